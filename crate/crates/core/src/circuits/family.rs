use std::collections::BTreeSet;

use crate::bitlinalg::BitVec;
use crate::circuits::layered::Circuit;
use crate::circuits::local::LocalFn;
use crate::circuits::table::TruthTable;
use crate::circuits::tree::DecisionTree;
use crate::error::{Error, Result};
use crate::restrictions::Restriction;

/// One output bit of a tampering family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoolFn {
    Circuit(Circuit),
    Tree(DecisionTree),
    Local(LocalFn),
}

impl BoolFn {
    pub fn eval(&self, x: &BitVec) -> bool {
        match self {
            BoolFn::Circuit(c) => c.eval(x),
            BoolFn::Tree(t) => t.eval(x),
            BoolFn::Local(l) => l.eval(x),
        }
    }

    pub fn restrict(&self, rho: &Restriction) -> BoolFn {
        match self {
            BoolFn::Circuit(c) => BoolFn::Circuit(c.restrict(rho)),
            BoolFn::Tree(t) => BoolFn::Tree(t.restrict(rho)),
            BoolFn::Local(l) => BoolFn::Local(l.restrict(rho)),
        }
    }

    pub fn rename(&self, map: &dyn Fn(usize) -> usize, new_n: usize) -> BoolFn {
        match self {
            BoolFn::Circuit(c) => BoolFn::Circuit(c.rename(map, new_n)),
            BoolFn::Tree(t) => BoolFn::Tree(t.rename(map)),
            BoolFn::Local(l) => BoolFn::Local(l.rename(map)),
        }
    }

    /// Syntactic support: literals of the simplified circuit, tree variables, or local dependencies.
    pub fn support(&self) -> Vec<usize> {
        match self {
            BoolFn::Circuit(c) => c.simplify().support(),
            BoolFn::Tree(t) => t.vars(),
            BoolFn::Local(l) => {
                let mut d = l.deps.clone();
                d.sort_unstable();
                d
            }
        }
    }

    pub fn truth_table(&self, n: usize) -> Result<TruthTable> {
        match self {
            BoolFn::Circuit(c) => c.truth_table(),
            BoolFn::Tree(t) => TruthTable::from_fn(n, t.vars(), |x| t.eval(x)),
            BoolFn::Local(l) => Ok(l.truth_table()),
        }
    }

    pub fn semantic_support(&self, n: usize) -> Result<Vec<usize>> {
        Ok(self.truth_table(n)?.semantic_support())
    }

    pub fn dt_depth(&self, n: usize) -> Result<usize> {
        match self {
            BoolFn::Tree(t) if t.depth() <= 1 => Ok(t.depth()),
            _ => Ok(self.truth_table(n)?.dt_depth()),
        }
    }

    /// Local function over the semantic support.
    pub fn to_local(&self, n: usize) -> Result<LocalFn> {
        let t = self.truth_table(n)?.reduce();
        LocalFn::new(t.vars, t.bits)
    }
}

/// `N` output functions over the same `n_inputs` inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionFamily {
    pub n_inputs: usize,
    pub funcs: Vec<BoolFn>,
}

impl FunctionFamily {
    pub fn new(n_inputs: usize, funcs: Vec<BoolFn>) -> Result<Self> {
        for (j, f) in funcs.iter().enumerate() {
            if let Some(&v) = f.support().iter().find(|&&v| v >= n_inputs) {
                return Err(Error::Parse(format!("function {} reads input {} of {}", j + 1, v + 1, n_inputs)));
            }
            if let BoolFn::Circuit(c) = f {
                if c.n_inputs() != n_inputs {
                    return Err(Error::Parse(format!(
                        "function {} is a circuit over {} inputs, family has {}",
                        j + 1,
                        c.n_inputs(),
                        n_inputs
                    )));
                }
            }
        }
        Ok(FunctionFamily { n_inputs, funcs })
    }

    /// Output `j` copies input `j`.
    pub fn identity(n: usize) -> Self {
        FunctionFamily { n_inputs: n, funcs: (0..n).map(|i| BoolFn::Local(LocalFn::projection(i))).collect() }
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    pub fn eval(&self, x: &BitVec) -> BitVec {
        BitVec::from_bools(&self.funcs.iter().map(|f| f.eval(x)).collect::<Vec<_>>())
    }

    /// Outputs at `idx`, in order.
    pub fn eval_at(&self, x: &BitVec, idx: &[usize]) -> BitVec {
        BitVec::from_bools(&idx.iter().map(|&j| self.funcs[j].eval(x)).collect::<Vec<_>>())
    }

    pub fn restrict(&self, rho: &Restriction) -> FunctionFamily {
        FunctionFamily { n_inputs: self.n_inputs, funcs: self.funcs.iter().map(|f| f.restrict(rho)).collect() }
    }

    pub fn rename(&self, map: &dyn Fn(usize) -> usize, new_n: usize) -> FunctionFamily {
        FunctionFamily { n_inputs: new_n, funcs: self.funcs.iter().map(|f| f.rename(map, new_n)).collect() }
    }

    /// Inputs read by the outputs in `s`, using each function's syntactic support.
    pub fn influence_set(&self, s: &[usize]) -> Vec<usize> {
        let set: BTreeSet<usize> = s.iter().flat_map(|&j| self.funcs[j].support()).collect();
        set.into_iter().collect()
    }

    /// Inputs the outputs in `s` semantically depend on.
    pub fn semantic_influence_set(&self, s: &[usize]) -> Result<Vec<usize>> {
        let mut set = BTreeSet::new();
        for &j in s {
            set.extend(self.funcs[j].semantic_support(self.n_inputs)?);
        }
        Ok(set.into_iter().collect())
    }

    /// Every output as a local function over its semantic support.
    pub fn to_local(&self) -> Result<FunctionFamily> {
        let funcs = self.funcs.iter().map(|f| Ok(BoolFn::Local(f.to_local(self.n_inputs)?))).collect::<Result<_>>()?;
        Ok(FunctionFamily { n_inputs: self.n_inputs, funcs })
    }

    pub fn max_locality(&self) -> usize {
        self.funcs.iter().map(|f| f.support().len()).max().unwrap_or(0)
    }
}
