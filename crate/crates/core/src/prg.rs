//! Carter–Wegman bounded-independence generators over GF(2^m).
//!
//! The seed holds the coefficients of a polynomial of degree σ over GF(2^m);
//! output `i` is `[poly(i) < q]`, where field elements are read as integers.

use std::sync::OnceLock;

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::BitVec;
use crate::codes::RpeScheme;
use crate::error::{Error, Result};

pub const MAX_FIELD_LOG: usize = 16;

/// Primitive polynomial per extension degree, with the leading term included.
pub const FIELD_POLYS: [u32; MAX_FIELD_LOG + 1] = [
    0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
];

/// GF(2^m) with log/antilog tables.
#[derive(Debug)]
pub struct Gf2m {
    m: usize,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl Gf2m {
    fn build(m: usize) -> Self {
        let size = 1usize << m;
        let order = size - 1;
        let poly = FIELD_POLYS[m];
        let mut exp = vec![0u32; 2 * order.max(1)];
        let mut log = vec![0u32; size];
        let mut x = 1u32;
        for i in 0..order {
            exp[i] = x;
            log[x as usize] = i as u32;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        for i in order..exp.len() {
            exp[i] = exp[i - order];
        }
        Gf2m { m, exp, log }
    }

    pub fn get(m: usize) -> &'static Gf2m {
        static FIELDS: [OnceLock<Gf2m>; MAX_FIELD_LOG + 1] = [const { OnceLock::new() }; MAX_FIELD_LOG + 1];
        assert!((1..=MAX_FIELD_LOG).contains(&m), "unsupported field GF(2^{})", m);
        FIELDS[m].get_or_init(|| Gf2m::build(m))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn size(&self) -> u32 {
        1 << self.m
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero");
        let order = self.size() - 1;
        self.exp[((order - self.log[a as usize]) % order) as usize]
    }

    /// Horner evaluation; `coeffs[j]` multiplies `x^j`.
    #[inline]
    pub fn eval_poly(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }

    /// Coefficients of the unique polynomial of degree < points.len() through `points`.
    pub fn interpolate(&self, points: &[(u32, u32)]) -> Vec<u32> {
        let k = points.len();
        let mut out = vec![0u32; k.max(1)];
        for (i, &(xi, yi)) in points.iter().enumerate() {
            // basis = Π_{j≠i} (x − x_j), denom = Π_{j≠i} (x_i − x_j)
            let mut basis = vec![1u32];
            let mut denom = 1u32;
            for (j, &(xj, _)) in points.iter().enumerate() {
                if j == i {
                    continue;
                }
                let mut next = vec![0u32; basis.len() + 1];
                for (d, &c) in basis.iter().enumerate() {
                    next[d + 1] ^= c;
                    next[d] ^= self.mul(c, xj);
                }
                basis = next;
                denom = self.mul(denom, xi ^ xj);
            }
            let scale = self.mul(yi, self.inv(denom));
            for (d, &c) in basis.iter().enumerate() {
                out[d] ^= self.mul(c, scale);
            }
        }
        out
    }
}

/// Carry-less product reduced modulo `poly`, used as an independent check of the tables.
pub fn slow_mul(m: usize, a: u32, b: u32) -> u32 {
    let poly = FIELD_POLYS[m];
    let mut acc = 0u32;
    let mut a = a;
    for i in 0..m {
        if (b >> i) & 1 == 1 {
            acc ^= a;
        }
        a <<= 1;
        if a & (1 << m) != 0 {
            a ^= poly;
        }
    }
    acc
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CwGenerator {
    pub sigma: usize,
    pub field_log: usize,
    pub out_len: usize,
    /// Output bit is 1 with probability `bias_num / 2^field_log`.
    pub bias_num: u32,
}

impl CwGenerator {
    pub fn new(sigma: usize, field_log: usize, out_len: usize, bias_num: u32) -> Result<Self> {
        if !(1..=MAX_FIELD_LOG).contains(&field_log) {
            return Err(Error::InfeasibleParams(format!("field GF(2^{}) outside 1..={}", field_log, MAX_FIELD_LOG)));
        }
        if out_len > 1 << field_log {
            return Err(Error::InfeasibleParams(format!(
                "{} outputs need more than the {} points of GF(2^{})",
                out_len,
                1u32 << field_log,
                field_log
            )));
        }
        if bias_num > 1 << field_log {
            return Err(Error::InfeasibleParams(format!("bias numerator {} above field size", bias_num)));
        }
        Ok(CwGenerator { sigma, field_log, out_len, bias_num })
    }

    /// Unbiased generator with the smallest field holding `out_len` points.
    pub fn unbiased(sigma: usize, out_len: usize) -> Result<Self> {
        let m = ceil_log2(out_len).max(1);
        Self::new(sigma, m, out_len, 1 << (m - 1))
    }

    /// Bias `q / 2^bias_log` with field size `max(⌈log n⌉, bias_log)`.
    pub fn biased(sigma: usize, out_len: usize, q: u32, bias_log: usize) -> Result<Self> {
        if bias_log > MAX_FIELD_LOG || q > 1 << bias_log {
            return Err(Error::InfeasibleParams(format!("bias {}/2^{}", q, bias_log)));
        }
        let m = ceil_log2(out_len).max(bias_log).max(1);
        Self::new(sigma, m, out_len, q << (m - bias_log))
    }

    pub fn seed_len(&self) -> usize {
        (self.sigma + 1) * self.field_log
    }

    pub fn field(&self) -> &'static Gf2m {
        Gf2m::get(self.field_log)
    }

    pub fn field_size(&self) -> u32 {
        1 << self.field_log
    }

    pub fn bias(&self) -> f64 {
        self.bias_num as f64 / self.field_size() as f64
    }

    pub fn coefficients(&self, seed: &BitVec) -> Result<Vec<u32>> {
        if seed.len() != self.seed_len() {
            return Err(Error::DimensionMismatch(format!("seed of length {}, expected {}", seed.len(), self.seed_len())));
        }
        let m = self.field_log;
        Ok((0..=self.sigma)
            .map(|j| (0..m).fold(0u32, |acc, b| acc | ((seed.get(j * m + b) as u32) << b)))
            .collect())
    }

    pub fn seed_from_coefficients(&self, coeffs: &[u32]) -> BitVec {
        let m = self.field_log;
        let mut seed = BitVec::zeros(self.seed_len());
        for (j, &c) in coeffs.iter().enumerate().take(self.sigma + 1) {
            for b in 0..m {
                if (c >> b) & 1 == 1 {
                    seed.set(j * m + b, true);
                }
            }
        }
        seed
    }

    /// Field values `poly(0), …, poly(n−1)`.
    pub fn values(&self, seed: &BitVec) -> Result<Vec<u32>> {
        let coeffs = self.coefficients(seed)?;
        let f = self.field();
        Ok((0..self.out_len as u32).map(|i| f.eval_poly(&coeffs, i)).collect())
    }

    pub fn eval(&self, seed: &BitVec) -> Result<BitVec> {
        let coeffs = self.coefficients(seed)?;
        let f = self.field();
        let mut out = BitVec::zeros(self.out_len);
        for i in 0..self.out_len {
            if f.eval_poly(&coeffs, i as u32) < self.bias_num {
                out.set(i, true);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndependenceReport {
    pub order: usize,
    pub subsets_checked: u64,
    pub violations: Vec<Vec<usize>>,
}

impl IndependenceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const MAX_EXHAUSTIVE_SEED: usize = 24;

fn all_outputs(g: &CwGenerator) -> Result<Vec<BitVec>> {
    if g.seed_len() > MAX_EXHAUSTIVE_SEED {
        return Err(Error::RegimeTooLarge(format!("seed length {} > {}", g.seed_len(), MAX_EXHAUSTIVE_SEED)));
    }
    (0..1u64 << g.seed_len()).map(|s| g.eval(&BitVec::from_u64(s, g.seed_len()))).collect()
}

fn scan_subsets(g: &CwGenerator, sizes: std::ops::RangeInclusive<usize>, stop_at_first: bool) -> Result<IndependenceReport> {
    let outputs = all_outputs(g)?;
    let m = g.field_log as u32;
    let q = g.bias_num as u128;
    let d = g.field_size() as u128;
    let mut report = IndependenceReport { order: *sizes.end(), subsets_checked: 0, violations: Vec::new() };
    for size in sizes {
        if size == 0 {
            continue;
        }
        if size > 20 || size as u32 * m + g.seed_len() as u32 > 120 {
            return Err(Error::RegimeTooLarge(format!("subsets of size {} over GF(2^{})", size, m)));
        }
        // count(pattern) · d^|T| must equal 2^seed_len · q^ones · (d − q)^zeros.
        let scale = d.pow(size as u32);
        let expected: Vec<u128> = (0..1u32 << size)
            .map(|p| {
                let ones = p.count_ones();
                (1u128 << g.seed_len()) * q.pow(ones) * (d - q).pow(size as u32 - ones)
            })
            .collect();
        for t in (0..g.out_len).combinations(size) {
            report.subsets_checked += 1;
            let mut counts = vec![0u128; 1 << size];
            for o in &outputs {
                counts[o.pattern(&t) as usize] += 1;
            }
            if counts.iter().zip(&expected).any(|(&c, &e)| c * scale != e) {
                report.violations.push(t);
                if stop_at_first {
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// Exhaustively checks that every set of at most `order` outputs is a product of Bernoulli(q/d).
pub fn verify_independence(g: &CwGenerator, order: usize) -> Result<IndependenceReport> {
    scan_subsets(g, 1..=order, false)
}

/// First output subset of exactly `size` positions that is not product-distributed.
pub fn find_dependence_witness(g: &CwGenerator, size: usize) -> Result<Option<Vec<usize>>> {
    Ok(scan_subsets(g, size..=size, true)?.violations.into_iter().next())
}

/// The restriction source `G(ζ) ‖ E_R(ζ; r) ‖ U`.
#[derive(Clone, Debug)]
pub struct SeededStream {
    gen: CwGenerator,
    rpe: RpeScheme,
    u_len: usize,
}

impl SeededStream {
    pub fn new(gen: CwGenerator, rpe: RpeScheme, u_len: usize) -> Result<Self> {
        if rpe.message_len() != gen.seed_len() {
            return Err(Error::DimensionMismatch(format!(
                "seed encoding takes {} bits but the seed has {}",
                rpe.message_len(),
                gen.seed_len()
            )));
        }
        if rpe.secrecy_threshold() < gen.sigma {
            return Err(Error::ThresholdViolation { threshold: rpe.secrecy_threshold(), sigma: gen.sigma });
        }
        Ok(SeededStream { gen, rpe, u_len })
    }

    pub fn len(&self) -> usize {
        self.gen.out_len + self.rpe.codeword_len() + self.u_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn randomness_len(&self) -> usize {
        self.gen.seed_len() + self.rpe.rand_len() + self.u_len
    }

    pub fn draw(&self, zeta: &BitVec, r: &BitVec, u: &BitVec) -> Result<BitVec> {
        if u.len() != self.u_len {
            return Err(Error::DimensionMismatch(format!("fresh part of length {}, expected {}", u.len(), self.u_len)));
        }
        let g = self.gen.eval(zeta)?;
        let e = self.rpe.encode(zeta, r)?;
        Ok(BitVec::concat(&[&g, &e, u]))
    }

    /// Draw indexed by a packed randomness vector `ζ ‖ r ‖ U`.
    pub fn draw_packed(&self, bits: &BitVec) -> Result<BitVec> {
        let s = self.gen.seed_len();
        let r = self.rpe.rand_len();
        if bits.len() != self.randomness_len() {
            return Err(Error::DimensionMismatch(format!("randomness of length {}, expected {}", bits.len(), self.randomness_len())));
        }
        self.draw(&bits.slice(0, s), &bits.slice(s, s + r), &bits.slice(s + r, bits.len()))
    }

    pub fn draw_rng<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BitVec> {
        self.draw_packed(&BitVec::random(self.randomness_len(), rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::LinearCode;

    fn poly_is_irreducible(m: usize) -> bool {
        // No factor of degree 1..=m/2: brute-force polynomial remainder.
        let p = FIELD_POLYS[m] as u64;
        let deg = |x: u64| 63 - x.leading_zeros() as i64;
        (2u64..(1u64 << (m / 2 + 1))).all(|f| {
            let mut r = p;
            while deg(r) >= deg(f) {
                r ^= f << (deg(r) - deg(f));
            }
            r != 0
        })
    }

    #[test]
    fn field_table_is_irreducible_and_primitive() {
        for m in 1..=MAX_FIELD_LOG {
            assert!(poly_is_irreducible(m), "polynomial for m = {} is reducible", m);
            let f = Gf2m::get(m);
            let mut seen = vec![false; 1 << m];
            for i in 0..(1usize << m) - 1 {
                assert!(!seen[f.exp[i] as usize], "x is not primitive for m = {}", m);
                seen[f.exp[i] as usize] = true;
            }
        }
    }

    #[test]
    fn table_multiplication_matches_carryless() {
        for m in [1, 2, 3, 4, 5, 8] {
            let f = Gf2m::get(m);
            for a in 0..f.size() {
                for b in 0..f.size() {
                    assert_eq!(f.mul(a, b), slow_mul(m, a, b));
                }
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
            }
        }
    }

    #[test]
    fn interpolation_passes_through_points() {
        let f = Gf2m::get(5);
        let pts = [(0, 7), (3, 1), (9, 30), (17, 0)];
        let c = f.interpolate(&pts);
        for &(x, y) in &pts {
            assert_eq!(f.eval_poly(&c, x), y);
        }
    }

    #[test]
    fn zero_seed_gives_all_ones() {
        let g = CwGenerator::unbiased(3, 10).unwrap();
        assert_eq!(g.eval(&BitVec::zeros(g.seed_len())).unwrap(), BitVec::ones(10));
        let g0 = CwGenerator::new(1, 3, 8, 0).unwrap();
        assert!(g0.eval(&BitVec::zeros(g0.seed_len())).unwrap().is_zero());
    }

    #[test]
    fn pairs_uniform_for_sigma_one() {
        let g = CwGenerator::new(1, 2, 4, 2).unwrap();
        assert_eq!(g.seed_len(), 4);
        assert!(verify_independence(&g, 2).unwrap().passed());
    }

    #[test]
    fn sigma_two_tightness() {
        let g = CwGenerator::unbiased(2, 8).unwrap();
        assert!(verify_independence(&g, 3).unwrap().passed());
        assert!(find_dependence_witness(&g, 4).unwrap().is_some());
    }

    #[test]
    fn biased_marginals() {
        let g = CwGenerator::biased(1, 6, 3, 4).unwrap();
        assert_eq!(g.field_log, 4);
        assert!((g.bias() - 3.0 / 16.0).abs() < 1e-12);
        assert!(verify_independence(&g, 2).unwrap().passed());
        let wide = CwGenerator::biased(1, 40, 3, 4).unwrap();
        assert_eq!(wide.field_log, 6);
        assert_eq!(wide.bias_num, 12);
    }

    #[test]
    fn stream_threshold() {
        let hamming = LinearCode::hamming74().unwrap();
        let g2 = CwGenerator::new(2, 1, 2, 1).unwrap();
        let rpe = RpeScheme::with_message_len(hamming.clone(), 3).unwrap();
        assert!(SeededStream::new(g2, rpe, 0).is_ok());
        let g3 = CwGenerator::new(3, 1, 2, 1).unwrap();
        let rpe = RpeScheme::with_message_len(hamming, 4).unwrap();
        assert!(matches!(SeededStream::new(g3, rpe, 0), Err(Error::ThresholdViolation { threshold: 2, sigma: 3 })));
    }
}
