//! Restrictions: survivor masks encoded by strings, sampling from a bit source,
//! and the `ExtIndices` / `Embed` / `Extract` helpers.

use std::fmt;
use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};
use crate::prg::CwGenerator;

/// A restriction over `n` positions. `rho1[i] = 1` marks a survivor (a star);
/// `rho2` holds the fixed value of every position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Restriction {
    pub rho1: BitVec,
    pub rho2: BitVec,
}

impl Restriction {
    pub fn new(rho1: BitVec, rho2: BitVec) -> Result<Self> {
        if rho1.len() != rho2.len() {
            return Err(Error::DimensionMismatch(format!("mask of length {} with fill of length {}", rho1.len(), rho2.len())));
        }
        Ok(Restriction { rho1, rho2 })
    }

    pub fn all_stars(n: usize) -> Self {
        Restriction { rho1: BitVec::ones(n), rho2: BitVec::zeros(n) }
    }

    pub fn len(&self) -> usize {
        self.rho1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho1.is_empty()
    }

    pub fn survivors(&self) -> Vec<usize> {
        self.rho1.ones_positions()
    }

    /// Full input obtained by placing `z` (one bit per survivor, increasing) into the fill.
    pub fn merge(&self, z: &BitVec) -> BitVec {
        let surv = self.survivors();
        assert_eq!(z.len(), surv.len(), "assignment does not match survivor count");
        let mut x = self.rho2.clone();
        for (j, &i) in surv.iter().enumerate() {
            x.set(i, z.get(j));
        }
        x
    }
}

/// One entry of `ExtIndices`: a position, or the padding sentinel standing for `n + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExtIndex {
    At(usize),
    Pad,
}

impl ExtIndex {
    pub fn position(self) -> Option<usize> {
        match self {
            ExtIndex::At(i) => Some(i),
            ExtIndex::Pad => None,
        }
    }
}

impl fmt::Display for ExtIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtIndex::At(i) => write!(f, "{}", i),
            ExtIndex::Pad => f.write_str("pad"),
        }
    }
}

/// Survivor mask: position `i` survives iff its block of `p_log_inv` bits of `s` is all ones.
pub fn subset_from_string(s: &BitVec, n: usize, p_log_inv: usize) -> Result<BitVec> {
    if p_log_inv == 0 || s.len() != n * p_log_inv {
        return Err(Error::DimensionMismatch(format!(
            "string of length {} for {} blocks of {} bits",
            s.len(),
            n,
            p_log_inv
        )));
    }
    let mut mask = BitVec::zeros(n);
    for i in 0..n {
        if (i * p_log_inv..(i + 1) * p_log_inv).all(|j| s.get(j)) {
            mask.set(i, true);
        }
    }
    Ok(mask)
}

/// The last `k` survivor positions in increasing order, padded with `Pad`.
pub fn ext_indices(rho1: &BitVec, k: usize) -> Vec<ExtIndex> {
    let ones = rho1.ones_positions();
    let take = ones.len().min(k);
    let mut out: Vec<ExtIndex> = ones[ones.len() - take..].iter().map(|&i| ExtIndex::At(i)).collect();
    out.resize(k, ExtIndex::Pad);
    out
}

/// Places `x` at `ext_indices(rho1, |x|)`; every other position takes `rho2`.
/// Bits of `x` mapped to `Pad` are dropped.
pub fn embed(x: &BitVec, rho: &Restriction) -> BitVec {
    let mut c = rho.rho2.clone();
    for (j, idx) in ext_indices(&rho.rho1, x.len()).into_iter().enumerate() {
        if let ExtIndex::At(i) = idx {
            c.set(i, x.get(j));
        }
    }
    c
}

/// `c` at `ext_indices(rho1, k)`, or `None` if `rho1` has fewer than `k` ones.
pub fn extract(c: &BitVec, rho1: &BitVec, k: usize) -> Result<Option<BitVec>> {
    if c.len() != rho1.len() {
        return Err(Error::DimensionMismatch(format!("word of length {} with mask of length {}", c.len(), rho1.len())));
    }
    if rho1.count_ones() < k {
        return Ok(None);
    }
    let pos: Vec<usize> = ext_indices(rho1, k).into_iter().filter_map(ExtIndex::position).collect();
    Ok(Some(c.select(&pos)))
}

pub fn count_in(mask: &BitVec, region: Range<usize>) -> usize {
    region.filter(|&i| mask.get(i)).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionDistribution {
    pub n: usize,
    pub p_log_inv: usize,
}

impl RestrictionDistribution {
    pub fn new(n: usize, p_log_inv: usize) -> Result<Self> {
        if p_log_inv == 0 {
            return Err(Error::InfeasibleParams("p must be below 1".into()));
        }
        Ok(RestrictionDistribution { n, p_log_inv })
    }

    pub fn p(&self) -> f64 {
        0.5f64.powi(self.p_log_inv as i32)
    }

    /// Bits consumed per restriction: `n·log(1/p)` for the mask and `n` for the fill.
    pub fn stream_len(&self) -> usize {
        self.n * self.p_log_inv + self.n
    }

    pub fn sample(&self, stream: &BitVec) -> Result<Restriction> {
        if stream.len() < self.stream_len() {
            return Err(Error::StreamExhausted { needed: self.stream_len(), available: stream.len() });
        }
        let split = self.n * self.p_log_inv;
        let rho1 = subset_from_string(&stream.slice(0, split), self.n, self.p_log_inv)?;
        let rho2 = stream.slice(split, split + self.n);
        Ok(Restriction { rho1, rho2 })
    }
}

/// Where restriction strings come from.
#[derive(Clone, Debug)]
pub enum RestrictionSource {
    Uniform,
    /// A σ-wise independent generator whose output covers the whole stream.
    Generator(CwGenerator),
}

impl RestrictionSource {
    pub fn bounded(dist: &RestrictionDistribution, sigma: usize) -> Result<Self> {
        Ok(RestrictionSource::Generator(CwGenerator::unbiased(sigma, dist.stream_len())?))
    }

    pub fn sample<R: Rng + ?Sized>(&self, dist: &RestrictionDistribution, rng: &mut R) -> Result<Restriction> {
        let stream = match self {
            RestrictionSource::Uniform => BitVec::random(dist.stream_len(), rng),
            RestrictionSource::Generator(g) => g.eval(&BitVec::random(g.seed_len(), rng))?,
        };
        dist.sample(&stream)
    }
}

/// Number of generator outputs per restriction position.
fn survivors_in(g: &CwGenerator, seed: &BitVec, p_log_inv: usize, region: &Range<usize>) -> Result<usize> {
    let out = g.eval(seed)?;
    let n = out.len() / p_log_inv;
    let mask = subset_from_string(&out.slice(0, n * p_log_inv), n, p_log_inv)?;
    Ok(count_in(&mask, region.clone()))
}

/// Seed whose restriction mask has at least `k` survivors inside `region`.
///
/// Tries interpolation first (forcing the blocks of the last `k` region
/// positions to all-ones), then scans seeds in lexicographic order.
pub fn find_fallback_seed(g: &CwGenerator, p_log_inv: usize, region: Range<usize>, k: usize, budget: u64) -> Result<BitVec> {
    if let Some(seed) = interpolated_seed(g, p_log_inv, &region, k)? {
        return Ok(seed);
    }
    exhaustive_fallback_seed(g, p_log_inv, region, k, budget)
}

pub fn interpolated_seed(g: &CwGenerator, p_log_inv: usize, region: &Range<usize>, k: usize) -> Result<Option<BitVec>> {
    let points_needed = k * p_log_inv;
    if g.bias_num == 0 || points_needed > g.sigma + 1 || region.len() < k {
        return Ok(None);
    }
    let q = g.bias_num;
    let size = g.field_size();
    let targets = region.end - k..region.end;
    let mut points: Vec<(u32, u32)> = targets
        .flat_map(|i| i * p_log_inv..(i + 1) * p_log_inv)
        .map(|j| (j as u32, j as u32 % q))
        .collect();
    // Remaining degrees of freedom push other points above the threshold where possible.
    let filler = if q < size { size - 1 } else { 0 };
    let mut x = 0u32;
    while points.len() < g.sigma + 1 {
        if x >= size {
            return Ok(None);
        }
        if !points.iter().any(|&(px, _)| px == x) {
            points.push((x, filler));
        }
        x += 1;
    }
    let coeffs = g.field().interpolate(&points);
    let seed = g.seed_from_coefficients(&coeffs);
    if survivors_in(g, &seed, p_log_inv, region)? >= k {
        Ok(Some(seed))
    } else {
        Ok(None)
    }
}

/// Seed position 0 is the most significant digit of the scan order.
pub fn exhaustive_fallback_seed(g: &CwGenerator, p_log_inv: usize, region: Range<usize>, k: usize, budget: u64) -> Result<BitVec> {
    let len = g.seed_len();
    let space = if len >= 64 { u64::MAX } else { 1u64 << len };
    for c in 0..space.min(budget) {
        let mut seed = BitVec::zeros(len);
        for b in 0..len.min(64) {
            if (c >> b) & 1 == 1 {
                seed.set(len - 1 - b, true);
            }
        }
        if survivors_in(g, &seed, p_log_inv, &region)? >= k {
            return Ok(seed);
        }
    }
    Err(Error::NotFound(format!("no seed with {} survivors in positions {:?} within {} candidates", k, region, budget)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    #[test]
    fn subset_examples() {
        assert_eq!(subset_from_string(&bv("1110"), 2, 2).unwrap(), bv("10"));
        assert_eq!(subset_from_string(&BitVec::ones(12), 4, 3).unwrap(), BitVec::ones(4));
        assert_eq!(subset_from_string(&bv("0110"), 4, 1).unwrap(), bv("0110"));
        assert!(subset_from_string(&bv("011"), 2, 2).is_err());
    }

    #[test]
    fn ext_indices_examples() {
        use ExtIndex::*;
        assert_eq!(ext_indices(&bv("0110"), 2), vec![At(1), At(2)]);
        assert_eq!(ext_indices(&bv("0100"), 2), vec![At(1), Pad]);
        assert_eq!(ext_indices(&bv("1111"), 2), vec![At(2), At(3)]);
    }

    #[test]
    fn embed_extract_examples() {
        let r = Restriction::new(bv("01"), bv("00")).unwrap();
        assert_eq!(embed(&bv("1"), &r), bv("01"));
        let r = Restriction::new(bv("1111"), bv("0000")).unwrap();
        assert_eq!(embed(&bv("10"), &r), bv("0010"));
        assert_eq!(extract(&bv("1010"), &bv("0000"), 1).unwrap(), None);
        assert_eq!(extract(&bv("1010"), &bv("0101"), 2).unwrap(), Some(bv("00")));
    }

    #[test]
    fn sample_requires_enough_bits() {
        let d = RestrictionDistribution::new(4, 2).unwrap();
        assert!(matches!(d.sample(&BitVec::ones(11)), Err(Error::StreamExhausted { needed: 12, available: 11 })));
        let r = d.sample(&BitVec::ones(12)).unwrap();
        assert_eq!(r.rho1, BitVec::ones(4));
    }

    #[test]
    fn fallback_seeds() {
        let g = CwGenerator::unbiased(3, 16).unwrap();
        let seed = interpolated_seed(&g, 2, &(4..8), 2).unwrap().expect("interpolation applies");
        assert!(survivors_in(&g, &seed, 2, &(4..8)).unwrap() >= 2);
        let seed = exhaustive_fallback_seed(&g, 2, 0..8, 8, 1 << 16).unwrap();
        assert!(seed.is_zero());
        let always = CwGenerator::new(1, 3, 8, 8).unwrap();
        let seed = find_fallback_seed(&always, 1, 0..8, 8, 10).unwrap();
        assert_eq!(always.eval(&seed).unwrap(), BitVec::ones(8));
    }
}
