//! Leaky tampering: the adversary commits `N` functions, learns a few of
//! their outputs over adaptive rounds, then picks which outputs form the
//! tampered word.

use std::fmt;
use std::sync::Arc;

use crate::bitlinalg::BitVec;
use crate::circuits::FunctionFamily;
use crate::error::{Error, Result};

/// Output indices chosen by a selector, or the decision to output `⊥`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection {
    Indices(Vec<usize>),
    Bottom,
}

type SelectFn = dyn Fn(&[BitVec]) -> Selection + Send + Sync;

/// Maps the transcript of earlier leaks to a set of output indices of a fixed size.
#[derive(Clone)]
pub struct Selector {
    size: usize,
    f: Arc<SelectFn>,
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Selector(size {})", self.size)
    }
}

impl Selector {
    pub fn new(size: usize, f: impl Fn(&[BitVec]) -> Selection + Send + Sync + 'static) -> Self {
        Selector { size, f: Arc::new(f) }
    }

    pub fn fixed(indices: Vec<usize>) -> Self {
        let size = indices.len();
        Selector::new(size, move |_| Selection::Indices(indices.clone()))
    }

    /// `0..n`.
    pub fn prefix(n: usize) -> Self {
        Selector::fixed((0..n).collect())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn select(&self, transcript: &[BitVec]) -> Selection {
        (self.f)(transcript)
    }
}

/// The adversary `(F, h_1, …, h_i, h)`.
#[derive(Clone, Debug)]
pub struct LeakyAdversary {
    pub family: FunctionFamily,
    pub rounds: Vec<Selector>,
    pub output: Selector,
}

/// Everything the adversary saw and chose on one input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub leaks: Vec<(Vec<usize>, BitVec)>,
    /// `None` when a selector answered `⊥`.
    pub output: Option<(Vec<usize>, BitVec)>,
}

fn check_selection(sel: &[usize], size: usize, n_funcs: usize, what: &str) -> Result<()> {
    if sel.len() != size {
        return Err(Error::SelectorViolation(format!("{} selected {} indices, expected {}", what, sel.len(), size)));
    }
    if let Some(w) = sel.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::SelectorViolation(format!("{} indices not strictly increasing at {} then {}", what, w[0] + 1, w[1] + 1)));
    }
    if let Some(&i) = sel.iter().find(|&&i| i >= n_funcs) {
        return Err(Error::SelectorViolation(format!("{} selected output {} of {}", what, i + 1, n_funcs)));
    }
    Ok(())
}

impl LeakyAdversary {
    pub fn new(family: FunctionFamily, rounds: Vec<Selector>, output: Selector) -> Self {
        LeakyAdversary { family, rounds, output }
    }

    /// No leakage; the tampered word is the first `out_len` outputs.
    pub fn plain(family: FunctionFamily, out_len: usize) -> Self {
        LeakyAdversary { family, rounds: Vec::new(), output: Selector::prefix(out_len) }
    }

    pub fn input_len(&self) -> usize {
        self.family.n_inputs
    }

    pub fn output_len(&self) -> usize {
        self.output.size()
    }

    pub fn play(&self, x: &BitVec) -> Result<Transcript> {
        if x.len() != self.family.n_inputs {
            return Err(Error::DimensionMismatch(format!("input of length {}, family reads {}", x.len(), self.family.n_inputs)));
        }
        let n_funcs = self.family.len();
        let mut ys: Vec<BitVec> = Vec::with_capacity(self.rounds.len());
        let mut leaks = Vec::with_capacity(self.rounds.len());
        for (j, h) in self.rounds.iter().enumerate() {
            match h.select(&ys) {
                Selection::Bottom => return Ok(Transcript { leaks, output: None }),
                Selection::Indices(s) => {
                    check_selection(&s, h.size(), n_funcs, &format!("leak round {}", j + 1))?;
                    let y = self.family.eval_at(x, &s);
                    ys.push(y.clone());
                    leaks.push((s, y));
                }
            }
        }
        match self.output.select(&ys) {
            Selection::Bottom => Ok(Transcript { leaks, output: None }),
            Selection::Indices(t) => {
                check_selection(&t, self.output.size(), n_funcs, "final selector")?;
                let out = self.family.eval_at(x, &t);
                Ok(Transcript { leaks, output: Some((t, out)) })
            }
        }
    }

    /// The tampered word, or `None` for `⊥`.
    pub fn eval(&self, x: &BitVec) -> Result<Option<BitVec>> {
        Ok(self.play(x)?.output.map(|(_, y)| y))
    }
}

pub fn eval_leaky(adv: &LeakyAdversary, x: &BitVec) -> Result<Option<BitVec>> {
    adv.eval(x)
}

/// What a simulator hands back: a leaky adversary of the target class, or a
/// constant function (`None` is the constant `⊥`).
#[derive(Clone, Debug)]
pub enum Tampering {
    Leaky(LeakyAdversary),
    Constant(Option<BitVec>),
}

impl Tampering {
    pub fn eval(&self, x: &BitVec) -> Result<Option<BitVec>> {
        match self {
            Tampering::Leaky(a) => a.eval(x),
            Tampering::Constant(c) => Ok(c.clone()),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Tampering::Constant(_))
    }
}
