//! Coders, their composition, the split-state code plugin, and the assembled
//! code against small-depth circuits.

use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::BitVec;
use crate::codes::{LinearCode, RpeScheme};
use crate::error::{Error, Result};
use crate::params::{chain_feasibility, ss_feasibility, SsInputs};
use crate::reductions::splitstate::AdversaryBudget;
use crate::reductions::{SplitStateParams, StarChain, StarParams};

/// A randomized encoder with a deterministic decoder; `None` is `⊥`.
pub trait Coder: Send + Sync {
    fn message_len(&self) -> usize;
    fn codeword_len(&self) -> usize;
    fn encode(&self, x: &BitVec, rng: &mut dyn RngCore) -> Result<BitVec>;
    fn decode(&self, c: &BitVec) -> Result<Option<BitVec>>;
    fn describe(&self) -> String;
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityCoder(pub usize);

impl Coder for IdentityCoder {
    fn message_len(&self) -> usize {
        self.0
    }

    fn codeword_len(&self) -> usize {
        self.0
    }

    fn encode(&self, x: &BitVec, _: &mut dyn RngCore) -> Result<BitVec> {
        Ok(x.clone())
    }

    fn decode(&self, c: &BitVec) -> Result<Option<BitVec>> {
        Ok(Some(c.clone()))
    }

    fn describe(&self) -> String {
        format!("identity({})", self.0)
    }
}

impl Coder for StarParams {
    fn message_len(&self) -> usize {
        self.k
    }

    fn codeword_len(&self) -> usize {
        self.n
    }

    fn encode(&self, x: &BitVec, rng: &mut dyn RngCore) -> Result<BitVec> {
        StarParams::encode(self, x, rng)
    }

    fn decode(&self, c: &BitVec) -> Result<Option<BitVec>> {
        StarParams::decode(self, c)
    }

    fn describe(&self) -> String {
        format!("star(k={}, n={}, m={})", self.k, self.n, self.m())
    }
}

impl Coder for StarChain {
    fn message_len(&self) -> usize {
        StarChain::message_len(self)
    }

    fn codeword_len(&self) -> usize {
        StarChain::codeword_len(self)
    }

    fn encode(&self, x: &BitVec, rng: &mut dyn RngCore) -> Result<BitVec> {
        StarChain::encode(self, x, rng)
    }

    fn decode(&self, c: &BitVec) -> Result<Option<BitVec>> {
        StarChain::decode(self, c)
    }

    fn describe(&self) -> String {
        let ns: Vec<String> = self.levels.iter().map(|l| l.n.to_string()).collect();
        format!("star-chain(d={}, k={}, n={})", self.depth(), StarChain::message_len(self), ns.join("→"))
    }
}

/// Messages are `x_L ‖ x_R`.
impl Coder for SplitStateParams {
    fn message_len(&self) -> usize {
        2 * self.k
    }

    fn codeword_len(&self) -> usize {
        self.n()
    }

    fn encode(&self, x: &BitVec, rng: &mut dyn RngCore) -> Result<BitVec> {
        if x.len() != 2 * self.k {
            return Err(Error::DimensionMismatch(format!("message of length {}, expected {}", x.len(), 2 * self.k)));
        }
        SplitStateParams::encode(self, &x.slice(0, self.k), &x.slice(self.k, 2 * self.k), rng)
    }

    fn decode(&self, c: &BitVec) -> Result<Option<BitVec>> {
        Ok(SplitStateParams::decode(self, c)?.map(|(l, r)| BitVec::concat(&[&l, &r])))
    }

    fn describe(&self) -> String {
        format!("split-state-reduction(k={}, n_Z={}, τ={}, n_R={})", self.k, self.n_z(), self.tau, self.n_r())
    }
}

/// `outer ∘ inner`: encode with `inner` then `outer`; decode in reverse, `⊥` short-circuits.
#[derive(Clone)]
pub struct Composed {
    pub outer: Arc<dyn Coder>,
    pub inner: Arc<dyn Coder>,
}

impl fmt::Debug for Composed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

pub fn compose(outer: Arc<dyn Coder>, inner: Arc<dyn Coder>) -> Result<Composed> {
    if outer.message_len() != inner.codeword_len() {
        return Err(Error::LengthMismatch(format!(
            "outer {} takes {}-bit messages, inner {} produces {}-bit codewords",
            outer.describe(),
            outer.message_len(),
            inner.describe(),
            inner.codeword_len()
        )));
    }
    Ok(Composed { outer, inner })
}

impl Coder for Composed {
    fn message_len(&self) -> usize {
        self.inner.message_len()
    }

    fn codeword_len(&self) -> usize {
        self.outer.codeword_len()
    }

    fn encode(&self, x: &BitVec, rng: &mut dyn RngCore) -> Result<BitVec> {
        let mid = self.inner.encode(x, rng)?;
        self.outer.encode(&mid, rng)
    }

    fn decode(&self, c: &BitVec) -> Result<Option<BitVec>> {
        match self.outer.decode(c)? {
            None => Ok(None),
            Some(mid) => self.inner.decode(&mid),
        }
    }

    fn describe(&self) -> String {
        format!("{} ∘ {}", self.outer.describe(), self.inner.describe())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecurityTag {
    ProvenExternal,
    ToyUnproven,
}

/// A split-state code: messages `x_L ‖ x_R` of `half_msg` bits each,
/// codewords of two `half_len`-bit regions decoded independently.
#[derive(Clone, Debug)]
pub struct SsNmcPlugin {
    pub half_msg: usize,
    pub rpe: RpeScheme,
    pub tag: SecurityTag,
}

/// Each half is an RPE of its half-message under a parity code.
/// Non-malleability is not claimed.
pub fn toy_ss_nmc(k: usize) -> Result<SsNmcPlugin> {
    if k == 0 {
        return Err(Error::InfeasibleParams("toy split-state code needs k ≥ 1".into()));
    }
    Ok(SsNmcPlugin { half_msg: k, rpe: RpeScheme::new(LinearCode::parity(k)?)?, tag: SecurityTag::ToyUnproven })
}

impl SsNmcPlugin {
    pub fn half_len(&self) -> usize {
        self.rpe.codeword_len()
    }

    pub fn decode_half(&self, h: &BitVec) -> Result<BitVec> {
        self.rpe.decode(h)
    }
}

impl Coder for SsNmcPlugin {
    fn message_len(&self) -> usize {
        2 * self.half_msg
    }

    fn codeword_len(&self) -> usize {
        2 * self.half_len()
    }

    fn encode(&self, x: &BitVec, rng: &mut dyn RngCore) -> Result<BitVec> {
        if x.len() != 2 * self.half_msg {
            return Err(Error::DimensionMismatch(format!("message of length {}, expected {}", x.len(), 2 * self.half_msg)));
        }
        let l = self.rpe.encode_rng(&x.slice(0, self.half_msg), rng)?;
        let r = self.rpe.encode_rng(&x.slice(self.half_msg, 2 * self.half_msg), rng)?;
        Ok(BitVec::concat(&[&l, &r]))
    }

    fn decode(&self, c: &BitVec) -> Result<Option<BitVec>> {
        let h = self.half_len();
        if c.len() != 2 * h {
            return Err(Error::DimensionMismatch(format!("codeword of length {}, expected {}", c.len(), 2 * h)));
        }
        let l = self.decode_half(&c.slice(0, h))?;
        let r = self.decode_half(&c.slice(h, 2 * h))?;
        Ok(Some(BitVec::concat(&[&l, &r])))
    }

    fn describe(&self) -> String {
        format!("toy-ss(k={}, half={}, {:?})", self.half_msg, self.half_len(), self.tag)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SsPreset {
    /// One bit per side, `n = 59`.
    Desk,
    /// Two bits per side, `n = 86`.
    TwoBit,
}

/// The parameter bundle of the assembled code, persisted with every report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSpec {
    /// Half-message length of the split-state plugin.
    pub toy_k: usize,
    pub ss: SsPreset,
    pub depth: usize,
    pub p_log_inv: usize,
    pub sigma: usize,
    pub t: usize,
    /// Refuse parameters that fail any feasibility inequality.
    #[serde(default)]
    pub strict: bool,
}

impl PipelineSpec {
    /// `d = 2`, `p = 1/2`, `σ = 1`, `t = 2` over the two-bit split-state instance.
    pub fn desk() -> Self {
        PipelineSpec { toy_k: 1, ss: SsPreset::TwoBit, depth: 2, p_log_inv: 1, sigma: 1, t: 2, strict: false }
    }
}

/// `chain ∘ split-state reduction ∘ plugin`.
#[derive(Clone, Debug)]
pub struct AcdNmc {
    pub spec: PipelineSpec,
    pub chain: StarChain,
    pub ss: SplitStateParams,
    pub plugin: SsNmcPlugin,
    coder: Composed,
}

impl AcdNmc {
    /// `(F ⟹ LL, LL ⟹ SS, SS code)` in outer-to-inner order.
    pub fn stages(&self) -> (&StarChain, &SplitStateParams, &SsNmcPlugin) {
        (&self.chain, &self.ss, &self.plugin)
    }
}

impl Coder for AcdNmc {
    fn message_len(&self) -> usize {
        self.coder.message_len()
    }

    fn codeword_len(&self) -> usize {
        self.coder.codeword_len()
    }

    fn encode(&self, x: &BitVec, rng: &mut dyn RngCore) -> Result<BitVec> {
        self.coder.encode(x, rng)
    }

    fn decode(&self, c: &BitVec) -> Result<Option<BitVec>> {
        self.coder.decode(c)
    }

    fn describe(&self) -> String {
        self.coder.describe()
    }
}

pub fn build_acd_nmc(spec: &PipelineSpec, plugin: SsNmcPlugin) -> Result<AcdNmc> {
    let half = plugin.half_len();
    let chain_of = |n_ss: usize| StarChain::design(n_ss, spec.depth, spec.p_log_inv, spec.sigma, spec.t, false);
    let ss = match spec.ss {
        SsPreset::Desk => SplitStateParams::desk()?,
        SsPreset::TwoBit => {
            // The leak budget depends on the chain, whose size depends on n_ss.
            let probe = SplitStateParams::two_bit(AdversaryBudget { q: 1, m: 1, ell: 1 })?;
            let chain = chain_of(probe.n())?;
            let m = chain.levels.iter().map(|l| l.m()).max().unwrap_or(0);
            SplitStateParams::two_bit(AdversaryBudget { q: spec.depth + 1, m, ell: 1 << spec.t })?
        }
    };
    if ss.k != half {
        return Err(Error::LengthMismatch(format!("split-state reduction takes {}-bit halves, plugin produces {}", ss.k, half)));
    }
    let chain = chain_of(ss.n())?;
    if spec.strict {
        for report in [ss_feasibility(&SsInputs::from_params(&ss), 1.0), chain_feasibility(&chain)] {
            if let Some(v) = report.violations().first() {
                return Err(Error::InfeasibleParams(format!("{}: {} vs {}", v.name, v.lhs, v.rhs)));
            }
        }
    }
    let inner = compose(Arc::new(ss.clone()), Arc::new(plugin.clone()))?;
    let coder = compose(Arc::new(chain.clone()), Arc::new(inner))?;
    Ok(AcdNmc { spec: spec.clone(), chain, ss, plugin, coder })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_composition() {
        let c = compose(Arc::new(IdentityCoder(5)), Arc::new(IdentityCoder(5))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x: BitVec = "10110".parse().unwrap();
        assert_eq!(c.encode(&x, &mut rng).unwrap(), x);
        assert_eq!(c.decode(&x).unwrap(), Some(x));
        let e = compose(Arc::new(IdentityCoder(5)), Arc::new(IdentityCoder(4))).unwrap_err();
        assert!(matches!(e, Error::LengthMismatch(_)));
    }

    #[test]
    fn bottom_propagates() {
        let star = StarParams::relaxed(3, 16, 1, 1, LinearCode::parity(8).unwrap()).unwrap();
        let c = compose(Arc::new(star.clone()), Arc::new(IdentityCoder(3))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rejected = (0..1000)
            .map(|_| BitVec::random(16, &mut rng))
            .find(|w| star.decode(w).unwrap().is_none())
            .expect("some word decodes to ⊥");
        assert_eq!(c.decode(&rejected).unwrap(), None);
    }

    #[test]
    fn toy_plugin_halves_independent() {
        let p = toy_ss_nmc(2).unwrap();
        assert_eq!(p.tag, SecurityTag::ToyUnproven);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: BitVec = "0111".parse().unwrap();
        let c = p.encode(&x, &mut rng).unwrap();
        let mut tampered = c.clone();
        tampered.flip(p.half_len());
        let d = p.decode(&tampered).unwrap().unwrap();
        assert_eq!(d.slice(0, 2), x.slice(0, 2));
    }

    #[test]
    fn desk_pipeline_roundtrip() {
        let acd = build_acd_nmc(&PipelineSpec::desk(), toy_ss_nmc(1).unwrap()).unwrap();
        assert_eq!(acd.message_len(), 2);
        assert_eq!(acd.ss.n(), acd.ss.n_z() + acd.ss.tau + acd.ss.n_r());
        assert_eq!(acd.chain.message_len(), acd.ss.n());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for xi in 0..4 {
            let x = BitVec::from_u64(xi, 2);
            for _ in 0..20 {
                let c = acd.encode(&x, &mut rng).unwrap();
                assert_eq!(c.len(), acd.codeword_len());
                assert_eq!(acd.decode(&c).unwrap(), Some(x.clone()));
            }
        }
        let strict = PipelineSpec { strict: true, ..PipelineSpec::desk() };
        assert!(matches!(build_acd_nmc(&strict, toy_ss_nmc(1).unwrap()), Err(Error::InfeasibleParams(_))));
    }
}
