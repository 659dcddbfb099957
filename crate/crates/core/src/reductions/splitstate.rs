//! Leaky-local to split-state reduction. The codeword is `Z ‖ X_L ‖ S_R`:
//! an RPE of a generator seed, the left RPE codeword embedded at the last
//! `n_L` survivors of a biased restriction over `τ` positions, and the right
//! RPE codeword.

use std::collections::HashMap;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::BitVec;
use crate::circuits::BoolFn;
use crate::codes::{LinearCode, RpeScheme};
use crate::error::{Error, Result};
use crate::prg::{ceil_log2, CwGenerator};
use crate::reductions::leaky::LeakyAdversary;
use crate::reductions::star::FALLBACK_BUDGET;
use crate::restrictions::{embed, ext_indices, extract, find_fallback_seed, ExtIndex, Restriction};

/// A decoded pair `(x_L, x_R)`, or `None` for `⊥`.
pub type SsOutcome = Option<(BitVec, BitVec)>;

/// Leakage budget the parameters are sized against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdversaryBudget {
    /// Leakage rounds.
    pub q: usize,
    /// Outputs leaked per round.
    pub m: usize,
    /// Locality of the committed functions.
    pub ell: usize,
}

#[derive(Clone, Debug)]
pub struct SplitStateParams {
    pub k: usize,
    pub sigma: usize,
    pub tau: usize,
    pub rpe_l: RpeScheme,
    pub rpe_z: RpeScheme,
    pub rpe_r: RpeScheme,
    pub gen: CwGenerator,
    pub zeta_star: BitVec,
    pub budget: AdversaryBudget,
}

/// Encoder randomness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsRandomness {
    pub zeta: BitVec,
    pub rho2: BitVec,
    pub l: BitVec,
    pub z: BitVec,
    pub r: BitVec,
}

/// Simulator coins, shared across hybrids in one trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsCoins {
    /// The uniform word standing in for the codeword.
    pub r: BitVec,
    pub zeta: BitVec,
    pub z: BitVec,
    pub l: BitVec,
    pub right: BitVec,
}

/// Events on which the simulator gives up and outputs the constant `⊥`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BadEvent {
    /// More survivors under the queried left positions than the left RPE hides.
    Survivors,
    /// More queried seed-encoding positions than its secrecy threshold.
    SeedQueries,
    /// More queried right positions than its secrecy threshold.
    RightQueries,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// The adversary's own selector answered `⊥`.
    AdversaryBottom,
    Bad(BadEvent),
    /// The simulated tampered seed gives too few survivors.
    SparseSeed,
    Ready,
}

/// Everything the simulator derives from one adversary and one set of coins.
#[derive(Clone, Debug)]
pub struct SimState {
    pub stage: Stage,
    pub fell_back: bool,
    /// `(ρ1, r_{I_L})` over the `τ` middle positions.
    pub rho: Restriction,
    /// Absolute positions of the left RPE codeword.
    pub ext_l: Vec<usize>,
    /// Left RPE coordinates whose position was queried.
    pub b: Vec<usize>,
    pub v_prime: BitVec,
    pub v: BitVec,
    /// `r` on `V` outside the seed block, `Z` on it, zero elsewhere.
    pub mu: BitVec,
    pub z: BitVec,
    pub tilde_rho: Option<BitVec>,
    /// Output indices of `T`, split by block; `t_l` picks the tampered left codeword.
    pub t_x: Vec<usize>,
    pub t_r: Vec<usize>,
    pub t_l: Vec<usize>,
}

/// `f_L`: depends on `x_L` and its own coins only.
#[derive(Clone, Debug)]
pub struct LeftFn {
    rpe: RpeScheme,
    b: Vec<usize>,
    chat: BitVec,
    rho: Restriction,
    offset: usize,
    base: BitVec,
    funcs: Vec<BoolFn>,
}

impl LeftFn {
    pub fn eval(&self, x_l: &BitVec, coins: &BitVec) -> Result<BitVec> {
        let s_l = self.rpe.reconstruct_with(&self.b, &self.chat, x_l, coins)?;
        let mut w = self.base.clone();
        for (i, bit) in embed(&s_l, &self.rho).iter().enumerate() {
            w.set(self.offset + i, bit);
        }
        let c = BitVec::from_bools(&self.funcs.iter().map(|f| f.eval(&w)).collect::<Vec<_>>());
        self.rpe.decode(&c)
    }
}

/// `f_R`: depends on `x_R` and its own coins only.
#[derive(Clone, Debug)]
pub struct RightFn {
    rpe: RpeScheme,
    a: Vec<usize>,
    chat: BitVec,
    offset: usize,
    base: BitVec,
    funcs: Vec<BoolFn>,
}

impl RightFn {
    pub fn eval(&self, x_r: &BitVec, coins: &BitVec) -> Result<BitVec> {
        let s_r = self.rpe.reconstruct_with(&self.a, &self.chat, x_r, coins)?;
        let mut w = self.base.clone();
        for (i, bit) in s_r.iter().enumerate() {
            w.set(self.offset + i, bit);
        }
        let c = BitVec::from_bools(&self.funcs.iter().map(|f| f.eval(&w)).collect::<Vec<_>>());
        self.rpe.decode(&c)
    }
}

/// The simulated split-state tampering function.
#[derive(Clone, Debug)]
pub enum SplitStateSim {
    Constant(SsOutcome),
    Split { left: LeftFn, right: RightFn },
}

impl SplitStateSim {
    pub fn eval(&self, x_l: &BitVec, x_r: &BitVec, coins_l: &BitVec, coins_r: &BitVec) -> Result<SsOutcome> {
        match self {
            SplitStateSim::Constant(c) => Ok(c.clone()),
            SplitStateSim::Split { left, right } => Ok(Some((left.eval(x_l, coins_l)?, right.eval(x_r, coins_r)?))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hybrid {
    H0,
    H1,
    H2,
    H3,
    H4,
}

impl Hybrid {
    pub const ALL: [Hybrid; 5] = [Hybrid::H0, Hybrid::H1, Hybrid::H2, Hybrid::H3, Hybrid::H4];
}

/// Inputs the simulator reads from output `j`: semantic support when the
/// truth table is small enough, syntactic support otherwise.
fn deps_of(f: &BoolFn, n: usize) -> Vec<usize> {
    f.semantic_support(n).unwrap_or_else(|_| f.support())
}

struct DepCache<'a> {
    adv: &'a LeakyAdversary,
    seen: HashMap<usize, Vec<usize>>,
}

impl<'a> DepCache<'a> {
    fn new(adv: &'a LeakyAdversary) -> Self {
        DepCache { adv, seen: HashMap::new() }
    }

    fn mark(&mut self, outputs: &[usize], keep: impl Fn(usize) -> bool, into: &mut BitVec) {
        let n = self.adv.input_len();
        for &j in outputs {
            let d = self.seen.entry(j).or_insert_with(|| deps_of(&self.adv.family.funcs[j], n));
            for &i in d.iter() {
                if keep(i) {
                    into.set(i, true);
                }
            }
        }
    }
}

fn in_range(r: &Range<usize>) -> impl Fn(usize) -> bool + '_ {
    move |i| r.contains(&i)
}

impl SplitStateParams {
    /// The message length per side is the left code's dimension. The
    /// restriction over `τ` positions has bias `3n_L/(2τ)` rounded down to
    /// the field grid.
    pub fn new(
        sigma: usize,
        code_l: LinearCode,
        code_z: LinearCode,
        code_r: LinearCode,
        tau: usize,
        budget: AdversaryBudget,
    ) -> Result<Self> {
        let k = code_l.k();
        if code_r.k() < k {
            return Err(Error::InfeasibleParams(format!("right code dimension {} below message length {}", code_r.k(), k)));
        }
        let n_l = code_l.n();
        if n_l > tau {
            return Err(Error::InfeasibleParams(format!("left codeword length {} exceeds τ = {}", n_l, tau)));
        }
        let field_log = ceil_log2(tau).max(1);
        let size = 1u64 << field_log;
        let bias_num = ((3 * n_l as u64 * size) / (2 * tau as u64)).min(size) as u32;
        let gen = CwGenerator::new(sigma, field_log, tau, bias_num)?;
        let s = gen.seed_len();
        if code_z.k() < s {
            return Err(Error::InfeasibleParams(format!("seed code dimension {} below seed length {}", code_z.k(), s)));
        }
        let zeta_star = find_fallback_seed(&gen, 1, 0..tau, n_l, FALLBACK_BUDGET)?;
        Ok(SplitStateParams {
            k,
            sigma,
            tau,
            rpe_l: RpeScheme::new(code_l)?,
            rpe_z: RpeScheme::with_message_len(code_z, s)?,
            rpe_r: RpeScheme::with_message_len(code_r, k)?,
            gen,
            zeta_star,
            budget,
        })
    }

    /// One bit per side: `[2,1,2]` left, `[31,1,31]` right, `[12,8,3]` seed
    /// code, `τ = 16`, `σ = 1`; `n = 59`.
    pub fn desk() -> Result<Self> {
        Self::new(
            1,
            LinearCode::xor_sharing(2)?,
            LinearCode::hamming(4)?.shorten(3)?,
            LinearCode::xor_sharing(31)?,
            16,
            AdversaryBudget { q: 1, m: 1, ell: 2 },
        )
    }

    /// Two bits per side: `[4,2,2]` left, `[40,2,20]` right, `[14,10,3]`
    /// seed code, `τ = 32`, `σ = 1`; `n = 86`.
    pub fn two_bit(budget: AdversaryBudget) -> Result<Self> {
        Self::new(
            1,
            LinearCode::identity(2)?.repeat(2)?,
            LinearCode::hamming(4)?.shorten(1)?,
            LinearCode::identity(2)?.repeat(20)?,
            32,
            budget,
        )
    }

    pub fn n_l(&self) -> usize {
        self.rpe_l.codeword_len()
    }

    pub fn n_z(&self) -> usize {
        self.rpe_z.codeword_len()
    }

    pub fn n_r(&self) -> usize {
        self.rpe_r.codeword_len()
    }

    pub fn n(&self) -> usize {
        self.n_z() + self.tau + self.n_r()
    }

    pub fn seed_len(&self) -> usize {
        self.gen.seed_len()
    }

    pub fn p(&self) -> f64 {
        self.gen.bias()
    }

    pub fn i_z(&self) -> Range<usize> {
        0..self.n_z()
    }

    pub fn i_l(&self) -> Range<usize> {
        self.n_z()..self.n_z() + self.tau
    }

    pub fn i_r(&self) -> Range<usize> {
        self.n_z() + self.tau..self.n()
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> SsRandomness {
        SsRandomness {
            zeta: BitVec::random(self.seed_len(), rng),
            rho2: BitVec::random(self.tau, rng),
            l: BitVec::random(self.rpe_l.rand_len(), rng),
            z: BitVec::random(self.rpe_z.rand_len(), rng),
            r: BitVec::random(self.rpe_r.rand_len(), rng),
        }
    }

    pub fn coins<R: Rng + ?Sized>(&self, rng: &mut R) -> SsCoins {
        SsCoins {
            r: BitVec::random(self.n(), rng),
            zeta: BitVec::random(self.seed_len(), rng),
            z: BitVec::random(self.rpe_z.rand_len(), rng),
            l: BitVec::random(self.rpe_l.rand_len(), rng),
            right: BitVec::random(self.rpe_r.rand_len(), rng),
        }
    }

    /// `G(ζ)` or `G(ζ*)` when it has fewer than `n_L` ones.
    pub fn effective_seed(&self, zeta: &BitVec) -> Result<(BitVec, bool)> {
        if self.gen.eval(zeta)?.count_ones() < self.n_l() {
            Ok((self.zeta_star.clone(), true))
        } else {
            Ok((zeta.clone(), false))
        }
    }

    fn check_message(&self, x: &BitVec, side: &str) -> Result<()> {
        if x.len() != self.k {
            return Err(Error::DimensionMismatch(format!("{} message of length {}, expected {}", side, x.len(), self.k)));
        }
        Ok(())
    }

    pub fn encode_with(&self, x_l: &BitVec, x_r: &BitVec, rnd: &SsRandomness) -> Result<BitVec> {
        self.check_message(x_l, "left")?;
        self.check_message(x_r, "right")?;
        let (zeta, _) = self.effective_seed(&rnd.zeta)?;
        let rho = Restriction::new(self.gen.eval(&zeta)?, rnd.rho2.clone())?;
        let s_l = self.rpe_l.encode(x_l, &rnd.l)?;
        let z = self.rpe_z.encode(&zeta, &rnd.z)?;
        let s_r = self.rpe_r.encode(x_r, &rnd.r)?;
        Ok(BitVec::concat(&[&z, &embed(&s_l, &rho), &s_r]))
    }

    pub fn encode<R: Rng + ?Sized>(&self, x_l: &BitVec, x_r: &BitVec, rng: &mut R) -> Result<BitVec> {
        let rnd = self.random(rng);
        self.encode_with(x_l, x_r, &rnd)
    }

    /// Left and right halves decoded with the restriction `ρ̃`.
    fn decode_halves(&self, c: &BitVec, tilde_rho: &BitVec) -> Result<SsOutcome> {
        let il = self.i_l();
        let Some(s_l) = extract(&c.slice(il.start, il.end), tilde_rho, self.n_l())? else {
            return Ok(None);
        };
        let ir = self.i_r();
        Ok(Some((self.rpe_l.decode(&s_l)?, self.rpe_r.decode(&c.slice(ir.start, ir.end))?)))
    }

    /// The mask `G(D_Z(Z̃))`, or `None` when it has fewer than `n_L` ones.
    pub fn recover_mask(&self, z: &BitVec) -> Result<Option<BitVec>> {
        let mask = self.gen.eval(&self.rpe_z.decode(z)?)?;
        Ok(if mask.count_ones() < self.n_l() { None } else { Some(mask) })
    }

    pub fn decode(&self, c: &BitVec) -> Result<SsOutcome> {
        if c.len() != self.n() {
            return Err(Error::DimensionMismatch(format!("codeword of length {}, expected {}", c.len(), self.n())));
        }
        match self.recover_mask(&c.slice(0, self.n_z()))? {
            None => Ok(None),
            Some(mask) => self.decode_halves(c, &mask),
        }
    }

    fn check_adversary(&self, adv: &LeakyAdversary) -> Result<()> {
        if adv.input_len() != self.n() || adv.output_len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "adversary maps {} to {} bits, codeword length is {}",
                adv.input_len(),
                adv.output_len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// Runs the simulator's bookkeeping on fixed coins.
    pub fn sim_state(&self, adv: &LeakyAdversary, coins: &SsCoins) -> Result<SimState> {
        self.check_adversary(adv)?;
        let n = self.n();
        let (iz, il, ir) = (self.i_z(), self.i_l(), self.i_r());
        let r = &coins.r;
        let transcript = adv.play(r)?;
        let mut deps = DepCache::new(adv);

        let mut v_prime = BitVec::zeros(n);
        for (s, _) in &transcript.leaks {
            deps.mark(s, |_| true, &mut v_prime);
        }
        let t = transcript.output.as_ref().map(|(t, _)| t.clone());
        let (t_z, t_x, t_r) = match &t {
            Some(t) => (t[iz.clone()].to_vec(), t[il.clone()].to_vec(), t[ir.clone()].to_vec()),
            None => (Vec::new(), Vec::new(), Vec::new()),
        };
        deps.mark(&t_z, |i| !iz.contains(&i), &mut v_prime);
        deps.mark(&t_r, in_range(&il), &mut v_prime);

        let (zeta, fell_back) = self.effective_seed(&coins.zeta)?;
        let rho1 = self.gen.eval(&zeta)?;
        let rho = Restriction::new(rho1.clone(), r.slice(il.start, il.end))?;
        let ext_l: Vec<usize> = ext_indices(&rho1, self.n_l()).into_iter().filter_map(ExtIndex::position).map(|i| i + il.start).collect();
        let b: Vec<usize> = (0..ext_l.len()).filter(|&j| v_prime.get(ext_l[j])).collect();

        let mut state = SimState {
            stage: Stage::Ready,
            fell_back,
            rho,
            ext_l,
            b,
            v: v_prime.clone(),
            mu: BitVec::zeros(n),
            z: BitVec::zeros(self.n_z()),
            tilde_rho: None,
            t_x: t_x.clone(),
            t_r: t_r.clone(),
            t_l: Vec::new(),
            v_prime,
        };

        let hidden = il.clone().filter(|&i| state.v_prime.get(i) && rho1.get(i - il.start)).count();
        if hidden > self.rpe_l.secrecy_threshold() {
            state.stage = Stage::Bad(BadEvent::Survivors);
            return Ok(state);
        }
        let c_set: Vec<usize> = iz.clone().filter(|&i| state.v_prime.get(i)).collect();
        if c_set.len() > self.rpe_z.secrecy_threshold() {
            state.stage = Stage::Bad(BadEvent::SeedQueries);
            return Ok(state);
        }
        state.z = self.rpe_z.reconstruct_with(&c_set, &r.slice(iz.start, iz.end), &zeta, &coins.z)?;

        let mut w = r.clone();
        for i in iz.clone() {
            w.set(i, state.z.get(i));
        }
        if t.is_some() {
            let z_tilde = adv.family.eval_at(&w, &t_z);
            state.tilde_rho = self.recover_mask(&z_tilde)?;
        }
        if let Some(tr) = &state.tilde_rho {
            state.t_l = ext_indices(tr, self.n_l()).into_iter().map(|e| t_x[e.position().expect("enough survivors")]).collect();
            let t_l = state.t_l.clone();
            deps.mark(&t_l, |i| !il.contains(&i), &mut state.v);
        }
        for i in iz.clone() {
            state.v.set(i, true);
        }
        for i in 0..n {
            if state.v.get(i) {
                state.mu.set(i, w.get(i));
            }
        }
        state.stage = if t.is_none() {
            Stage::AdversaryBottom
        } else if state.tilde_rho.is_none() {
            Stage::SparseSeed
        } else {
            Stage::Ready
        };
        if self.right_queries(&state.v).len() > self.rpe_r.secrecy_threshold() {
            state.stage = Stage::Bad(BadEvent::RightQueries);
        }
        Ok(state)
    }

    /// `mask ∩ I_R`, relative to the right block.
    fn right_queries(&self, mask: &BitVec) -> Vec<usize> {
        self.i_r().filter(|&i| mask.get(i)).map(|i| i - self.i_r().start).collect()
    }

    fn left_view(&self, state: &SimState) -> BitVec {
        let mut chat = BitVec::zeros(self.n_l());
        for &j in &state.b {
            chat.set(j, state.mu.get(state.ext_l[j]));
        }
        chat
    }

    fn right_view(&self, state: &SimState) -> BitVec {
        let ir = self.i_r();
        state.mu.slice(ir.start, ir.end)
    }

    pub fn simulate_state(&self, adv: &LeakyAdversary, state: &SimState) -> SplitStateSim {
        if state.stage != Stage::Ready {
            return SplitStateSim::Constant(None);
        }
        let funcs = |idx: &[usize]| idx.iter().map(|&j| adv.family.funcs[j].clone()).collect::<Vec<_>>();
        let left = LeftFn {
            rpe: self.rpe_l.clone(),
            b: state.b.clone(),
            chat: self.left_view(state),
            rho: state.rho.clone(),
            offset: self.i_l().start,
            base: state.mu.clone(),
            funcs: funcs(&state.t_l),
        };
        let right = RightFn {
            rpe: self.rpe_r.clone(),
            a: self.right_queries(&state.v),
            chat: self.right_view(state),
            offset: self.i_r().start,
            base: state.mu.clone(),
            funcs: funcs(&state.t_r),
        };
        SplitStateSim::Split { left, right }
    }

    pub fn simulate_with(&self, adv: &LeakyAdversary, coins: &SsCoins) -> Result<SplitStateSim> {
        let state = self.sim_state(adv, coins)?;
        Ok(self.simulate_state(adv, &state))
    }

    pub fn simulate<R: Rng + ?Sized>(&self, adv: &LeakyAdversary, rng: &mut R) -> Result<SplitStateSim> {
        let coins = self.coins(rng);
        self.simulate_with(adv, &coins)
    }

    /// The codeword built from the simulator's view: `Z`, the left RPE
    /// reconstructed on `B` and embedded with `ρ`, and the right RPE
    /// reconstructed on `V ∩ I_R` (or `V' ∩ I_R` when not coupled).
    fn alt_encoding(&self, state: &SimState, x_l: &BitVec, x_r: &BitVec, coins: &SsCoins, coupled: bool) -> Result<BitVec> {
        let s_l = self.rpe_l.reconstruct_with(&state.b, &self.left_view(state), x_l, &coins.l)?;
        let a = self.right_queries(if coupled { &state.v } else { &state.v_prime });
        let ir = self.i_r();
        let s_r = self.rpe_r.reconstruct_with(&a, &coins.r.slice(ir.start, ir.end), x_r, &coins.right)?;
        Ok(BitVec::concat(&[&state.z, &embed(&s_l, &state.rho), &s_r]))
    }

    /// One trial of a hybrid. `H0` is the real experiment on `real`; the
    /// others share `coins` and output `⊥` on bad events.
    #[allow(clippy::too_many_arguments)]
    pub fn hybrid(
        &self,
        h: Hybrid,
        adv: &LeakyAdversary,
        x_l: &BitVec,
        x_r: &BitVec,
        coins: &SsCoins,
        real: &SsRandomness,
        coupled: bool,
    ) -> Result<SsOutcome> {
        if h == Hybrid::H0 {
            return self.real_experiment(adv, x_l, x_r, real);
        }
        self.check_message(x_l, "left")?;
        self.check_message(x_r, "right")?;
        let state = self.sim_state(adv, coins)?;
        self.hybrid_on(h, &state, adv, x_l, x_r, coins, coupled)
    }

    pub fn real_experiment(&self, adv: &LeakyAdversary, x_l: &BitVec, x_r: &BitVec, real: &SsRandomness) -> Result<SsOutcome> {
        let c = self.encode_with(x_l, x_r, real)?;
        match adv.eval(&c)? {
            None => Ok(None),
            Some(ct) => self.decode(&ct),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn hybrid_on(
        &self,
        h: Hybrid,
        state: &SimState,
        adv: &LeakyAdversary,
        x_l: &BitVec,
        x_r: &BitVec,
        coins: &SsCoins,
        coupled: bool,
    ) -> Result<SsOutcome> {
        if matches!(state.stage, Stage::Bad(_)) {
            return Ok(None);
        }
        match h {
            Hybrid::H0 => Err(Error::Config("the real experiment does not run on simulator coins".into())),
            Hybrid::H1 | Hybrid::H2 | Hybrid::H3 => {
                let c = self.alt_encoding(state, x_l, x_r, coins, coupled || h == Hybrid::H3)?;
                let Some(ct) = adv.eval(&c)? else {
                    return Ok(None);
                };
                if h == Hybrid::H1 {
                    return self.decode(&ct);
                }
                match &state.tilde_rho {
                    None => Ok(None),
                    Some(tr) => self.decode_halves(&ct, tr),
                }
            }
            Hybrid::H4 => self.simulate_state(adv, state).eval(x_l, x_r, &coins.l, &coins.right),
        }
    }

    /// Every hybrid on one trial, with the simulator state computed once.
    pub fn replay(&self, adv: &LeakyAdversary, x_l: &BitVec, x_r: &BitVec, coins: &SsCoins, real: &SsRandomness) -> Result<Replay> {
        self.check_message(x_l, "left")?;
        self.check_message(x_r, "right")?;
        let state = self.sim_state(adv, coins)?;
        let mut outcomes: [SsOutcome; 5] = Default::default();
        outcomes[0] = self.real_experiment(adv, x_l, x_r, real)?;
        for (j, h) in Hybrid::ALL.iter().enumerate().skip(1) {
            outcomes[j] = self.hybrid_on(*h, &state, adv, x_l, x_r, coins, true)?;
        }
        let uncoupled_h2 = self.hybrid_on(Hybrid::H2, &state, adv, x_l, x_r, coins, false)?;
        Ok(Replay { outcomes, uncoupled_h2, stage: state.stage, fell_back: state.fell_back })
    }
}

/// All hybrids of one trial. `outcomes[j]` is `H_j`; `H1`–`H3` use the
/// coupled right sampler.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Replay {
    pub outcomes: [SsOutcome; 5],
    pub uncoupled_h2: SsOutcome,
    pub stage: Stage,
    pub fell_back: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{FunctionFamily, LocalFn};
    use crate::reductions::leaky::{Selection, Selector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn desk_layout() {
        let pp = SplitStateParams::desk().unwrap();
        assert_eq!((pp.n_z(), pp.tau, pp.n_r(), pp.n()), (12, 16, 31, 59));
        assert_eq!(pp.seed_len(), 8);
        assert_eq!(pp.p(), 3.0 / 16.0);
        assert!(pp.gen.eval(&pp.zeta_star).unwrap().count_ones() >= 2);
        let two = SplitStateParams::two_bit(AdversaryBudget { q: 1, m: 1, ell: 2 }).unwrap();
        assert_eq!((two.n_z(), two.tau, two.n_r(), two.n()), (14, 32, 40, 86));
        assert_eq!(two.p(), 3.0 / 16.0);
    }

    #[test]
    fn roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for pp in [SplitStateParams::desk().unwrap(), SplitStateParams::two_bit(AdversaryBudget { q: 1, m: 1, ell: 2 }).unwrap()] {
            for _ in 0..300 {
                let x_l = BitVec::random(pp.k, &mut rng);
                let x_r = BitVec::random(pp.k, &mut rng);
                let c = pp.encode(&x_l, &x_r, &mut rng).unwrap();
                assert_eq!(pp.decode(&c).unwrap(), Some((x_l, x_r)));
            }
        }
    }

    /// One leak of output `leak`; when it is 1 the tampered word drops input
    /// `flip_at` and appends its negation.
    fn one_local_adversary(n: usize, leak: usize, flip_at: usize, rng: &mut ChaCha8Rng) -> LeakyAdversary {
        let mut funcs: Vec<BoolFn> = (0..n).map(|i| BoolFn::Local(LocalFn::projection(i))).collect();
        funcs.push(BoolFn::Local(LocalFn::negation(flip_at)));
        let r: usize = rng.gen_range(0..n);
        funcs.push(BoolFn::Local(LocalFn::tabulate(vec![r, (r + 7) % n], |x| x.get(0) ^ x.get(1)).unwrap()));
        let fam = FunctionFamily::new(n, funcs).unwrap();
        let out = Selector::new(n, move |ys: &[BitVec]| {
            let mut t: Vec<usize> = (0..n).collect();
            if ys[0].get(0) {
                t.remove(flip_at);
                t.push(n);
            }
            Selection::Indices(t)
        });
        LeakyAdversary::new(fam, vec![Selector::fixed(vec![leak])], out)
    }

    fn adversaries(pp: &SplitStateParams, rng: &mut ChaCha8Rng) -> Vec<LeakyAdversary> {
        let n = pp.n();
        let mut advs = vec![LeakyAdversary::plain(FunctionFamily::identity(n), n)];
        for _ in 0..6 {
            let leak = rng.gen_range(0..n + 2);
            let flip = rng.gen_range(0..n);
            advs.push(one_local_adversary(n, leak, flip, rng));
        }
        advs
    }

    #[test]
    fn identity_is_simulated_as_identity() {
        let pp = SplitStateParams::desk().unwrap();
        let adv = LeakyAdversary::plain(FunctionFamily::identity(pp.n()), pp.n());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut split = 0;
        for _ in 0..200 {
            let sim = pp.simulate(&adv, &mut rng).unwrap();
            if let SplitStateSim::Split { left, right } = &sim {
                split += 1;
                for xi in 0..4u64 {
                    let x_l = BitVec::from_u64(xi & 1, 1);
                    let x_r = BitVec::from_u64(xi >> 1, 1);
                    let cl = BitVec::random(pp.rpe_l.rand_len(), &mut rng);
                    let cr = BitVec::random(pp.rpe_r.rand_len(), &mut rng);
                    assert_eq!(left.eval(&x_l, &cl).unwrap(), x_l);
                    assert_eq!(right.eval(&x_r, &cr).unwrap(), x_r);
                }
            }
        }
        assert!(split > 100);
    }

    #[test]
    fn coupled_hybrids_agree_per_trial() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for pp in [SplitStateParams::desk().unwrap(), SplitStateParams::two_bit(AdversaryBudget { q: 1, m: 1, ell: 2 }).unwrap()] {
            for adv in adversaries(&pp, &mut rng) {
                for _ in 0..150 {
                    let coins = pp.coins(&mut rng);
                    let real = pp.random(&mut rng);
                    let x_l = BitVec::random(pp.k, &mut rng);
                    let x_r = BitVec::random(pp.k, &mut rng);
                    let rep = pp.replay(&adv, &x_l, &x_r, &coins, &real).unwrap();
                    let out = &rep.outcomes;
                    assert_eq!(out[1], out[2], "H1 vs H2");
                    assert_eq!(out[2], out[3], "H2 vs H3");
                    assert_eq!(out[3], out[4], "H3 vs H4");
                    for h in [Hybrid::H1, Hybrid::H4] {
                        assert_eq!(pp.hybrid(h, &adv, &x_l, &x_r, &coins, &real, true).unwrap(), out[h as usize]);
                    }
                }
            }
        }
    }

    #[test]
    fn left_function_ignores_right_input() {
        let pp = SplitStateParams::desk().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let adv = one_local_adversary(pp.n(), 3, pp.n_z() + 2, &mut rng);
        for _ in 0..50 {
            let coins = pp.coins(&mut rng);
            let real = pp.random(&mut rng);
            let x_l = BitVec::random(1, &mut rng);
            let a = pp.hybrid(Hybrid::H4, &adv, &x_l, &BitVec::zeros(1), &coins, &real, true).unwrap();
            let b = pp.hybrid(Hybrid::H4, &adv, &x_l, &BitVec::ones(1), &coins, &real, true).unwrap();
            assert_eq!(a.map(|p| p.0), b.map(|p| p.0));
        }
    }

    #[test]
    fn wrong_adversary_size() {
        let pp = SplitStateParams::desk().unwrap();
        let adv = LeakyAdversary::plain(FunctionFamily::identity(10), 10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(pp.simulate(&adv, &mut rng), Err(Error::DimensionMismatch(_))));
    }
}
