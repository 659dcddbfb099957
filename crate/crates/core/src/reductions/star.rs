//! Pseudorandom-restriction reduction: the message sits at the last `k`
//! survivors of a restriction generated from a short seed, and an RPE of the
//! seed occupies the first `m` positions.

use std::ops::Range;
use std::sync::Arc;

use rand::Rng;

use crate::bitlinalg::BitVec;
use crate::circuits::{collapse_family, CollapseMode};
use crate::codes::{LinearCode, RpeScheme};
use crate::error::{Error, Result};
use crate::prg::CwGenerator;
use crate::reductions::leaky::{LeakyAdversary, Selection, Selector, Tampering};
use crate::restrictions::{count_in, ext_indices, embed, extract, find_fallback_seed, subset_from_string, ExtIndex, Restriction};

/// Seeds tried by the exhaustive fallback search.
pub const FALLBACK_BUDGET: u64 = 1 << 24;

/// When the decoder rejects a recovered seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeRule {
    /// Fewer than `k` survivors in positions `m..n`.
    #[default]
    Region,
    /// Fewer than `k` survivors overall, or the first embedding position below `m`.
    Strict,
}

#[derive(Clone, Debug)]
pub struct StarParams {
    pub k: usize,
    pub n: usize,
    pub p_log_inv: usize,
    pub sigma: usize,
    pub rpe: RpeScheme,
    pub gen: CwGenerator,
    pub zeta_star: BitVec,
    pub rule: DecodeRule,
}

/// Seed code with dimension at least `s` and distance above `sigma`.
pub fn seed_code_for(s: usize, sigma: usize) -> Result<LinearCode> {
    match sigma {
        0 => LinearCode::identity(s),
        1 => LinearCode::parity(s),
        2 | 3 => {
            let mut r = 3;
            while (1usize << r) - 1 - r < s {
                r += 1;
            }
            let h = LinearCode::hamming(r)?;
            let short = if h.k() > s { h.shorten(h.k() - s)? } else { h };
            short.extend()
        }
        _ => Err(Error::InfeasibleParams(format!("no built-in seed code for independence {}", sigma))),
    }
}

/// `(ζ, r, U)`: generator seed, RPE randomness and the free fill.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarRandomness {
    pub zeta: BitVec,
    pub r: BitVec,
    pub u: BitVec,
}

impl StarParams {
    /// Checks the window `4σ/log(1/p) ≤ k ≤ (n − m)p/2` and `d − 1 ≥ σ` for the seed code.
    pub fn new(k: usize, n: usize, p_log_inv: usize, sigma: usize, seed_code: LinearCode) -> Result<Self> {
        let pp = Self::relaxed(k, n, p_log_inv, sigma, seed_code)?;
        pp.check_window()?;
        if pp.rpe.secrecy_threshold() < sigma {
            return Err(Error::InfeasibleParams(format!(
                "seed RPE hides {} positions, independence {} needs m·c_sec ≥ σ",
                pp.rpe.secrecy_threshold(),
                sigma
            )));
        }
        Ok(pp)
    }

    /// Only the conditions decoding needs.
    pub fn relaxed(k: usize, n: usize, p_log_inv: usize, sigma: usize, seed_code: LinearCode) -> Result<Self> {
        if p_log_inv == 0 {
            return Err(Error::InfeasibleParams("p must be below 1".into()));
        }
        let gen = CwGenerator::unbiased(sigma, n * p_log_inv)?;
        let s = gen.seed_len();
        if seed_code.k() < s {
            return Err(Error::InfeasibleParams(format!("seed code dimension {} below seed length {}", seed_code.k(), s)));
        }
        let rpe = RpeScheme::with_message_len(seed_code, s)?;
        let m = rpe.codeword_len();
        if m + k > n {
            return Err(Error::InfeasibleParams(format!("m + k = {} + {} exceeds n = {}", m, k, n)));
        }
        let zeta_star = find_fallback_seed(&gen, p_log_inv, m..n, k, FALLBACK_BUDGET)?;
        Ok(StarParams { k, n, p_log_inv, sigma, rpe, gen, zeta_star, rule: DecodeRule::Region })
    }

    /// Smallest seed code for `(n, p, σ)` from `seed_code_for`.
    pub fn with_default_code(k: usize, n: usize, p_log_inv: usize, sigma: usize, strict: bool) -> Result<Self> {
        let s = CwGenerator::unbiased(sigma, n * p_log_inv)?.seed_len();
        let code = seed_code_for(s, sigma)?;
        if strict {
            Self::new(k, n, p_log_inv, sigma, code)
        } else {
            Self::relaxed(k, n, p_log_inv, sigma, code)
        }
    }

    pub fn check_window(&self) -> Result<()> {
        let lo = 4.0 * self.sigma as f64 / self.p_log_inv as f64;
        let hi = (self.n - self.m()) as f64 * self.p() / 2.0;
        if (self.k as f64) < lo {
            return Err(Error::InfeasibleParams(format!("4σ/log(1/p) ≤ k fails: {} > {}", lo, self.k)));
        }
        if self.k as f64 > hi {
            return Err(Error::InfeasibleParams(format!("k ≤ (n − m)p/2 fails: {} > {}", self.k, hi)));
        }
        Ok(())
    }

    pub fn p(&self) -> f64 {
        0.5f64.powi(self.p_log_inv as i32)
    }

    pub fn m(&self) -> usize {
        self.rpe.codeword_len()
    }

    pub fn seed_len(&self) -> usize {
        self.gen.seed_len()
    }

    pub fn payload(&self) -> Range<usize> {
        self.m()..self.n
    }

    /// Bits of `(ζ, r, U)`.
    pub fn randomness_len(&self) -> usize {
        self.seed_len() + self.rpe.rand_len() + (self.n - self.m())
    }

    pub fn randomness_from_bits(&self, bits: &BitVec) -> Result<StarRandomness> {
        if bits.len() != self.randomness_len() {
            return Err(Error::DimensionMismatch(format!("{} randomness bits, expected {}", bits.len(), self.randomness_len())));
        }
        let (s, rl) = (self.seed_len(), self.rpe.rand_len());
        Ok(StarRandomness {
            zeta: bits.slice(0, s),
            r: bits.slice(s, s + rl),
            u: bits.slice(s + rl, bits.len()),
        })
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> StarRandomness {
        StarRandomness {
            zeta: BitVec::random(self.seed_len(), rng),
            r: BitVec::random(self.rpe.rand_len(), rng),
            u: BitVec::random(self.n - self.m(), rng),
        }
    }

    /// `L(G(ζ))`.
    pub fn mask(&self, zeta: &BitVec) -> Result<BitVec> {
        subset_from_string(&self.gen.eval(zeta)?, self.n, self.p_log_inv)
    }

    /// Whether the decoder rejects this mask.
    pub fn too_sparse(&self, mask: &BitVec) -> bool {
        match self.rule {
            DecodeRule::Region => count_in(mask, self.payload()) < self.k,
            DecodeRule::Strict => {
                mask.count_ones() < self.k
                    || matches!(ext_indices(mask, self.k).first(), Some(ExtIndex::At(i)) if *i < self.m())
            }
        }
    }

    /// The seed actually used and whether the fallback fired.
    pub fn effective_seed(&self, zeta: &BitVec) -> Result<(BitVec, bool)> {
        if count_in(&self.mask(zeta)?, self.payload()) < self.k {
            Ok((self.zeta_star.clone(), true))
        } else {
            Ok((zeta.clone(), false))
        }
    }

    pub fn restriction(&self, rnd: &StarRandomness) -> Result<(Restriction, bool)> {
        let (zeta, fell_back) = self.effective_seed(&rnd.zeta)?;
        let rho1 = self.mask(&zeta)?;
        let head = self.rpe.encode(&zeta, &rnd.r)?;
        let rho2 = BitVec::concat(&[&head, &rnd.u]);
        Ok((Restriction::new(rho1, rho2)?, fell_back))
    }

    pub fn encode_with(&self, x: &BitVec, rnd: &StarRandomness) -> Result<BitVec> {
        if x.len() != self.k {
            return Err(Error::DimensionMismatch(format!("message of length {}, expected {}", x.len(), self.k)));
        }
        let (rho, _) = self.restriction(rnd)?;
        Ok(embed(x, &rho))
    }

    pub fn encode<R: Rng + ?Sized>(&self, x: &BitVec, rng: &mut R) -> Result<BitVec> {
        let rnd = self.random(rng);
        self.encode_with(x, &rnd)
    }

    /// Seed recovered from the first `m` positions, or `None` when it is rejected.
    pub fn recover_mask(&self, head: &BitVec) -> Result<Option<BitVec>> {
        let zeta = self.rpe.decode(head)?;
        let mask = self.mask(&zeta)?;
        Ok(if self.too_sparse(&mask) { None } else { Some(mask) })
    }

    pub fn decode(&self, c: &BitVec) -> Result<Option<BitVec>> {
        if c.len() != self.n {
            return Err(Error::DimensionMismatch(format!("codeword of length {}, expected {}", c.len(), self.n)));
        }
        match self.recover_mask(&c.slice(0, self.m()))? {
            None => Ok(None),
            Some(mask) => extract(c, &mask, self.k),
        }
    }

    /// The simulator on fixed randomness. Bad randomness (the restricted
    /// family leaves the target class) gives the constant `⊥`.
    pub fn simulate_with(&self, tau: &LeakyAdversary, t: usize, mode: CollapseMode, rnd: &StarRandomness) -> Result<Tampering> {
        if tau.input_len() != self.n || tau.output_len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "adversary maps {} to {} bits, codeword length is {}",
                tau.input_len(),
                tau.output_len(),
                self.n
            )));
        }
        let (rho, _) = self.restriction(rnd)?;
        let Some(collapsed) = collapse_family(&tau.family.restrict(&rho), t, mode)? else {
            return Ok(Tampering::Constant(None));
        };
        let ext: Vec<usize> = ext_indices(&rho.rho1, self.k).into_iter().filter_map(ExtIndex::position).collect();
        debug_assert_eq!(ext.len(), self.k);
        let mut keep = BitVec::zeros(self.n);
        let mut pos_of = vec![usize::MAX; self.n];
        for (j, &e) in ext.iter().enumerate() {
            keep.set(e, true);
            pos_of[e] = j;
        }
        let fix = Restriction::new(keep, rho.rho2.clone())?;
        let family = collapsed.restrict(&fix).rename(&|v| pos_of[v], self.k);

        let m = self.m();
        let h = tau.output.clone();
        let mut rounds = tau.rounds.clone();
        let h_seed = h.clone();
        rounds.push(Selector::new(m, move |ys: &[BitVec]| match h_seed.select(ys) {
            Selection::Indices(t) => Selection::Indices(t[..m].to_vec()),
            Selection::Bottom => Selection::Bottom,
        }));
        let pp = Arc::new(self.clone());
        let output = Selector::new(self.k, move |ys: &[BitVec]| {
            let (prev, last) = ys.split_at(ys.len() - 1);
            let Selection::Indices(t) = h.select(prev) else {
                return Selection::Bottom;
            };
            match pp.recover_mask(&last[0]).expect("leaked seed encoding has length m") {
                None => Selection::Bottom,
                Some(mask) => Selection::Indices(
                    ext_indices(&mask, pp.k).into_iter().map(|e| t[e.position().expect("enough survivors")]).collect(),
                ),
            }
        });
        Ok(Tampering::Leaky(LeakyAdversary::new(family, rounds, output)))
    }

    pub fn simulate<R: Rng + ?Sized>(&self, tau: &LeakyAdversary, t: usize, mode: CollapseMode, rng: &mut R) -> Result<Tampering> {
        let rnd = self.random(rng);
        self.simulate_with(tau, t, mode, &rnd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny() -> StarParams {
        StarParams::relaxed(3, 16, 1, 1, LinearCode::parity(8).unwrap()).unwrap()
    }

    #[test]
    fn tiny_layout() {
        let pp = tiny();
        assert_eq!(pp.seed_len(), 8);
        assert_eq!(pp.m(), 9);
        assert_eq!(pp.randomness_len(), 16);
        assert!(count_in(&pp.mask(&pp.zeta_star).unwrap(), pp.payload()) >= 3);
        assert!(pp.check_window().is_err());
    }

    #[test]
    fn region_and_strict_rules_agree() {
        let mut pp = tiny();
        let masks: Vec<BitVec> = (0..256u64).map(|z| pp.mask(&BitVec::from_u64(z, 8)).unwrap()).collect();
        let region: Vec<bool> = masks.iter().map(|m| pp.too_sparse(m)).collect();
        pp.rule = DecodeRule::Strict;
        let strict: Vec<bool> = masks.iter().map(|m| pp.too_sparse(m)).collect();
        assert_eq!(region, strict);
        assert!(region.iter().any(|&b| b) && region.iter().any(|&b| !b));
    }

    #[test]
    fn roundtrip_random() {
        let pp = StarParams::with_default_code(8, 64, 1, 1, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = BitVec::random(8, &mut rng);
            let c = pp.encode(&x, &mut rng).unwrap();
            assert_eq!(c.len(), 64);
            assert_eq!(pp.decode(&c).unwrap(), Some(x));
        }
    }

    #[test]
    fn strict_constructor_names_inequality() {
        let e = StarParams::with_default_code(2, 64, 1, 1, true).unwrap_err().to_string();
        assert!(e.contains("4σ/log(1/p) ≤ k"), "{}", e);
        let e = StarParams::with_default_code(30, 64, 1, 1, true).unwrap_err().to_string();
        assert!(e.contains("k ≤ (n − m)p/2"), "{}", e);
        assert!(StarParams::with_default_code(8, 64, 1, 1, true).is_ok());
    }

    #[test]
    fn seed_codes_have_distance() {
        for sigma in 0..=3 {
            let c = seed_code_for(12, sigma).unwrap();
            assert!(c.k() >= 12);
            assert!(c.distance() > sigma);
        }
    }
}
