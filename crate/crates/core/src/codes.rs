//! Binary linear codes and the reconstructable probabilistic encodings built on them.
//!
//! For a code with generator `A` (n×k), parity check `H` ((n−k)×n) and a left
//! inverse `B` of `A`, the encoding is `E(x; r) = Bᵀx ⊕ Hᵀr`, decoding is
//! `D(c) = Aᵀc`, and any `d − 1` coordinates of `E(x; ·)` are uniform.

use std::path::Path;

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::{BitVec, Gf2Matrix, SolutionSet};
use crate::error::{Error, Result};

/// Largest message length for which the minimum distance is computed by enumeration.
pub const MAX_BRUTE_FORCE_K: usize = 20;

#[derive(Clone, Debug)]
pub struct LinearCode {
    name: String,
    k: usize,
    n: usize,
    /// Generator rows, k×n. This is `Aᵀ`.
    g: Gf2Matrix,
    /// Parity check, (n−k)×n.
    h: Gf2Matrix,
    d: usize,
}

impl LinearCode {
    /// Builds a code from its k generator rows (each a codeword of length n).
    /// The distance is computed by enumeration, so `k` must be at most 20.
    pub fn from_generator_rows(name: &str, rows: Vec<BitVec>, n: usize) -> Result<Self> {
        let code = Self::assemble(name, rows, n, 0)?;
        let d = min_distance_of(&code.g)?;
        Ok(LinearCode { d, ..code })
    }

    /// Builds a code whose distance is known analytically. When `k` is small
    /// enough the claim is still checked.
    fn with_known_distance(name: &str, rows: Vec<BitVec>, n: usize, d: usize) -> Result<Self> {
        let code = Self::assemble(name, rows, n, d)?;
        if code.k <= MAX_BRUTE_FORCE_K {
            let got = min_distance_of(&code.g)?;
            assert_eq!(got, d, "analytic distance of {} is wrong", name);
        }
        Ok(code)
    }

    fn assemble(name: &str, rows: Vec<BitVec>, n: usize, d: usize) -> Result<Self> {
        let k = rows.len();
        if k == 0 || k > n {
            return Err(Error::DimensionMismatch(format!("code with k = {} and n = {}", k, n)));
        }
        let g = Gf2Matrix::from_rows(rows, n)?;
        let rank = g.rank();
        if rank != k {
            return Err(Error::NotFullRank { rank, cols: k });
        }
        let h_rows = g.null_space();
        debug_assert_eq!(h_rows.len(), n - k);
        let h = Gf2Matrix::from_rows(h_rows, n)?;
        Ok(LinearCode { name: name.to_string(), k, n, g, h, d })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn distance(&self) -> usize {
        self.d
    }

    /// Generator matrix `A`, n×k.
    pub fn generator(&self) -> Gf2Matrix {
        self.g.transpose()
    }

    pub fn generator_rows(&self) -> &Gf2Matrix {
        &self.g
    }

    pub fn parity_check(&self) -> &Gf2Matrix {
        &self.h
    }

    /// Codeword `A x`.
    pub fn encode_message(&self, x: &BitVec) -> Result<BitVec> {
        self.g.transpose_matmul(x)
    }

    // Built-in families.

    pub fn repetition(n: usize) -> Result<Self> {
        Self::with_known_distance(&format!("repetition({})", n), vec![BitVec::ones(n)], n, n)
    }

    /// The length-n repetition code viewed as n-party XOR sharing of one bit.
    pub fn xor_sharing(n: usize) -> Result<Self> {
        let mut c = Self::repetition(n)?;
        c.name = format!("xor-sharing({})", n);
        Ok(c)
    }

    pub fn identity(k: usize) -> Result<Self> {
        let rows = (0..k).map(|i| unit(k, i)).collect();
        Self::with_known_distance(&format!("identity({})", k), rows, k, 1)
    }

    /// Single parity check code `[k+1, k, 2]`.
    pub fn parity(k: usize) -> Result<Self> {
        let rows = (0..k)
            .map(|i| {
                let mut r = unit(k + 1, i);
                r.set(k, true);
                r
            })
            .collect();
        Self::with_known_distance(&format!("parity({})", k), rows, k + 1, 2)
    }

    /// Systematic Hamming(7,4): data bits first, then three parity bits.
    pub fn hamming74() -> Result<Self> {
        let rows = ["1000110", "0100101", "0010011", "0001111"]
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<BitVec>>>()?;
        Self::from_generator_rows("hamming(7,4)", rows, 7)
    }

    pub fn extended_hamming84() -> Result<Self> {
        let mut c = Self::hamming74()?.extend()?;
        c.name = "extended-hamming(8,4)".into();
        Ok(c)
    }

    /// Systematic Hamming code with `r` parity bits, `[2^r − 1, 2^r − 1 − r, 3]`.
    pub fn hamming(r: usize) -> Result<Self> {
        if !(2..=10).contains(&r) {
            return Err(Error::InfeasibleParams(format!("hamming code with r = {}", r)));
        }
        let n = (1usize << r) - 1;
        let cols: Vec<u64> = (1..=n as u64).filter(|v| !v.is_power_of_two()).collect();
        let k = cols.len();
        let rows = cols
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let mut row = unit(n, i);
                for b in 0..r {
                    if (p >> b) & 1 == 1 {
                        row.set(k + b, true);
                    }
                }
                row
            })
            .collect();
        Self::with_known_distance(&format!("hamming({},{})", n, k), rows, n, 3)
    }

    /// Simplex code `[2^r − 1, r, 2^{r−1}]`: every nonzero r-bit column once.
    pub fn simplex(r: usize) -> Result<Self> {
        let n = (1usize << r) - 1;
        let rows = (0..r)
            .map(|b| BitVec::from_bools(&(1..=n).map(|c| (c >> b) & 1 == 1).collect::<Vec<_>>()))
            .collect();
        Self::with_known_distance(&format!("simplex({},{})", n, r), rows, n, 1 << (r - 1))
    }

    /// Appends an overall parity bit.
    pub fn extend(&self) -> Result<Self> {
        let rows = self
            .g
            .row_vecs()
            .iter()
            .map(|r| {
                let mut e = r.clone();
                e.push(r.count_ones() % 2 == 1);
                e
            })
            .collect();
        let name = format!("extended-{}", self.name);
        if self.k <= MAX_BRUTE_FORCE_K {
            Self::from_generator_rows(&name, rows, self.n + 1)
        } else {
            Self::with_known_distance(&name, rows, self.n + 1, self.d + self.d % 2)
        }
    }

    /// Drops the first `s` information positions of a systematic code. Above
    /// the enumeration limit the parent's distance is kept as a lower bound.
    pub fn shorten(&self, s: usize) -> Result<Self> {
        if s >= self.k {
            return Err(Error::InfeasibleParams(format!("cannot shorten a k = {} code by {}", self.k, s)));
        }
        if !self.is_systematic() {
            return Err(Error::InfeasibleParams(format!("{} is not systematic", self.name)));
        }
        let rows = (s..self.k).map(|i| self.g.row(i).slice(s, self.n)).collect();
        let name = format!("shortened-{}-by-{}", self.name, s);
        if self.k - s <= MAX_BRUTE_FORCE_K {
            Self::from_generator_rows(&name, rows, self.n - s)
        } else {
            Self::with_known_distance(&name, rows, self.n - s, self.d)
        }
    }

    /// Every codeword repeated `times` times: `[times·n, k, times·d]`.
    pub fn repeat(&self, times: usize) -> Result<Self> {
        let rows = (0..self.k)
            .map(|i| {
                let row = self.g.row(i);
                BitVec::concat(&vec![row; times])
            })
            .collect();
        Self::with_known_distance(&format!("{}x{}", self.name, times), rows, self.n * times, self.d * times)
    }

    pub fn is_systematic(&self) -> bool {
        (0..self.k).all(|i| (0..self.k).all(|j| self.g.get(i, j) == (i == j)))
    }

    /// Random systematic `[n, k]` code with distance at least `min_d`.
    pub fn random_systematic<R: Rng + ?Sized>(k: usize, n: usize, min_d: usize, rng: &mut R, tries: usize) -> Result<Self> {
        if k > MAX_BRUTE_FORCE_K || k > n {
            return Err(Error::RegimeTooLarge(format!("random code with k = {}, n = {}", k, n)));
        }
        for _ in 0..tries {
            let rows = (0..k)
                .map(|i| {
                    let tail = BitVec::random(n - k, rng);
                    BitVec::concat(&[&unit(k, i), &tail])
                })
                .collect();
            let code = Self::from_generator_rows(&format!("random({},{})", n, k), rows, n)?;
            if code.d >= min_d {
                return Ok(code);
            }
        }
        Err(Error::NotFound(format!("no [{}, {}, >={}] code in {} tries", n, k, min_d, tries)))
    }
}

fn unit(n: usize, i: usize) -> BitVec {
    let mut v = BitVec::zeros(n);
    v.set(i, true);
    v
}

/// Minimum weight over nonzero codewords, by Gray-code enumeration of the span of `g`'s rows.
fn min_distance_of(g: &Gf2Matrix) -> Result<usize> {
    let k = g.rows();
    if k > MAX_BRUTE_FORCE_K {
        return Err(Error::RegimeTooLarge(format!("minimum distance with k = {} > {}", k, MAX_BRUTE_FORCE_K)));
    }
    let mut c = BitVec::zeros(g.cols());
    let mut best = usize::MAX;
    for i in 1u64..(1u64 << k) {
        c.xor_assign(g.row(i.trailing_zeros() as usize));
        best = best.min(c.count_ones());
    }
    Ok(best)
}

pub fn min_distance(code: &LinearCode) -> Result<usize> {
    min_distance_of(&code.g)
}

/// One entry of a JSON code registry. Each generator row is hex, `⌈n/8⌉`
/// bytes, codeword position 0 in the most significant bit of the first byte.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeEntry {
    pub name: String,
    pub k: usize,
    pub n: usize,
    pub generator_rows: Vec<String>,
    pub distance: usize,
}

pub fn row_from_hex(s: &str, n: usize) -> Result<BitVec> {
    let bytes = hex::decode(s).map_err(|e| Error::Parse(format!("generator row {:?}: {}", s, e)))?;
    if bytes.len() != (n + 7) / 8 {
        return Err(Error::Parse(format!("generator row {:?} has {} bytes, expected {}", s, bytes.len(), (n + 7) / 8)));
    }
    let mut v = BitVec::zeros(n);
    for (i, byte) in bytes.iter().enumerate() {
        for b in 0..8 {
            let pos = 8 * i + b;
            if (byte >> (7 - b)) & 1 == 1 {
                if pos >= n {
                    return Err(Error::Parse(format!("generator row {:?} has nonzero padding", s)));
                }
                v.set(pos, true);
            }
        }
    }
    Ok(v)
}

pub fn row_to_hex(v: &BitVec) -> String {
    let mut bytes = vec![0u8; (v.len() + 7) / 8];
    for i in v.ones_positions() {
        bytes[i / 8] |= 0x80 >> (i % 8);
    }
    hex::encode(bytes)
}

impl CodeEntry {
    pub fn from_code(code: &LinearCode) -> Self {
        CodeEntry {
            name: code.name.clone(),
            k: code.k,
            n: code.n,
            generator_rows: code.g.row_vecs().iter().map(row_to_hex).collect(),
            distance: code.d,
        }
    }

    pub fn to_code(&self) -> Result<LinearCode> {
        if self.generator_rows.len() != self.k {
            return Err(Error::Parse(format!(
                "code {}: {} generator rows for k = {}",
                self.name,
                self.generator_rows.len(),
                self.k
            )));
        }
        let rows = self.generator_rows.iter().map(|r| row_from_hex(r, self.n)).collect::<Result<Vec<_>>>()?;
        let code = LinearCode::from_generator_rows(&self.name, rows, self.n)?;
        if code.d != self.distance {
            return Err(Error::Parse(format!(
                "code {}: declared distance {} but computed {}",
                self.name, self.distance, code.d
            )));
        }
        Ok(code)
    }
}

pub fn parse_registry(json: &str) -> Result<Vec<LinearCode>> {
    let entries: Vec<CodeEntry> = serde_json::from_str(json)?;
    entries.iter().map(CodeEntry::to_code).collect()
}

pub fn load_registry(path: &Path) -> Result<Vec<LinearCode>> {
    parse_registry(&std::fs::read_to_string(path)?)
}

/// Reconstructable probabilistic encoding from a linear code, with zero-padding
/// of messages shorter than the code dimension.
#[derive(Clone, Debug)]
pub struct RpeScheme {
    code: LinearCode,
    /// Left inverse of `A`, k×n.
    b: Gf2Matrix,
    /// `Hᵀ`, n×(n−k); row i is the constraint row for coordinate i.
    ht: Gf2Matrix,
    msg_len: usize,
}

impl RpeScheme {
    pub fn new(code: LinearCode) -> Result<Self> {
        let k = code.k;
        Self::with_message_len(code, k)
    }

    /// Messages of `msg_len ≤ k` bits are zero-padded to `k` before encoding.
    pub fn with_message_len(code: LinearCode, msg_len: usize) -> Result<Self> {
        if msg_len > code.k {
            return Err(Error::DimensionMismatch(format!(
                "message length {} exceeds code dimension {}",
                msg_len, code.k
            )));
        }
        let b = code.generator().left_inverse()?;
        let ht = code.h.transpose();
        Ok(RpeScheme { code, b, ht, msg_len })
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn left_inverse(&self) -> &Gf2Matrix {
        &self.b
    }

    pub fn message_len(&self) -> usize {
        self.msg_len
    }

    pub fn padding(&self) -> usize {
        self.code.k - self.msg_len
    }

    pub fn codeword_len(&self) -> usize {
        self.code.n
    }

    pub fn rand_len(&self) -> usize {
        self.code.n - self.code.k
    }

    /// Largest number of coordinates whose joint distribution is message independent.
    pub fn secrecy_threshold(&self) -> usize {
        self.code.d - 1
    }

    pub fn c_sec(&self) -> f64 {
        (self.code.d - 1) as f64 / self.code.n as f64
    }

    fn pad(&self, x: &BitVec) -> Result<BitVec> {
        if x.len() != self.msg_len {
            return Err(Error::DimensionMismatch(format!("message of length {}, expected {}", x.len(), self.msg_len)));
        }
        if self.padding() == 0 {
            return Ok(x.clone());
        }
        Ok(BitVec::concat(&[x, &BitVec::zeros(self.padding())]))
    }

    pub fn encode(&self, x: &BitVec, r: &BitVec) -> Result<BitVec> {
        if r.len() != self.rand_len() {
            return Err(Error::DimensionMismatch(format!("randomness of length {}, expected {}", r.len(), self.rand_len())));
        }
        let mut c = self.b.transpose_matmul(&self.pad(x)?)?;
        c.xor_assign(&self.code.h.transpose_matmul(r)?);
        Ok(c)
    }

    pub fn encode_rng<R: Rng + ?Sized>(&self, x: &BitVec, rng: &mut R) -> Result<BitVec> {
        let r = BitVec::random(self.rand_len(), rng);
        self.encode(x, &r)
    }

    pub fn decode(&self, c: &BitVec) -> Result<BitVec> {
        if c.len() != self.code.n {
            return Err(Error::DimensionMismatch(format!("codeword of length {}, expected {}", c.len(), self.code.n)));
        }
        let full = self.code.g.matmul(c)?;
        Ok(if self.padding() == 0 { full } else { full.slice(0, self.msg_len) })
    }

    /// The affine space of randomness `r` with `E(x; r)_S = chat_S`.
    pub fn consistent_randomness(&self, s: &[usize], chat: &BitVec, x: &BitVec) -> Result<SolutionSet> {
        if chat.len() != self.code.n {
            return Err(Error::DimensionMismatch(format!("partial view of length {}, expected {}", chat.len(), self.code.n)));
        }
        if s.len() > self.secrecy_threshold() {
            return Err(Error::TooManyConstraints { got: s.len(), max: self.secrecy_threshold() });
        }
        let bx = self.b.transpose_matmul(&self.pad(x)?)?;
        let target = chat.xor(&bx).select(s);
        self.ht.select_rows(s).solve_affine(&target)
    }

    /// A fresh encoding of `x` conditioned on agreeing with `chat` on `s`.
    pub fn reconstruct<R: Rng + ?Sized>(&self, s: &[usize], chat: &BitVec, x: &BitVec, rng: &mut R) -> Result<BitVec> {
        let set = self.consistent_randomness(s, chat, x)?;
        let r = set.sample(rng).ok_or(Error::Infeasible)?;
        self.encode(x, &r)
    }

    /// Like `reconstruct`, with the choice inside the solution space read from
    /// the leading bits of `coins` (at least `rand_len` bits).
    pub fn reconstruct_with(&self, s: &[usize], chat: &BitVec, x: &BitVec, coins: &BitVec) -> Result<BitVec> {
        if coins.len() < self.rand_len() {
            return Err(Error::StreamExhausted { needed: self.rand_len(), available: coins.len() });
        }
        let set = self.consistent_randomness(s, chat, x)?;
        let dim = match &set {
            SolutionSet::Empty => return Err(Error::Infeasible),
            SolutionSet::Affine { null_basis, .. } => null_basis.len(),
        };
        let r = set.combine(&coins.slice(0, dim)).ok_or(Error::Infeasible)?;
        self.encode(x, &r)
    }
}

/// Outcome of an exhaustive secrecy check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SecrecyReport {
    pub max_set_size: usize,
    pub sets_checked: u64,
    pub violations: Vec<SecrecyViolation>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SecrecyViolation {
    pub message: BitVec,
    pub positions: Vec<usize>,
}

impl SecrecyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const SECRECY_WORK_LIMIT: f64 = 4.0e9;

fn all_encodings(scheme: &RpeScheme, x: &BitVec) -> Result<Vec<BitVec>> {
    let rl = scheme.rand_len();
    (0..1u64 << rl).map(|r| scheme.encode(x, &BitVec::from_u64(r, rl))).collect()
}

fn check_regime(scheme: &RpeScheme) -> Result<()> {
    let (k, rl) = (scheme.message_len(), scheme.rand_len());
    if k > 12 || rl > 16 {
        return Err(Error::RegimeTooLarge(format!("secrecy check with k = {}, n - k = {}", k, rl)));
    }
    Ok(())
}

/// Pattern counts of `E(x; r)_S` over all `r`; index = pattern with `s[0]` as bit 0.
pub fn projection_counts(scheme: &RpeScheme, x: &BitVec, s: &[usize]) -> Result<Vec<u64>> {
    check_regime(scheme)?;
    if s.len() > 20 {
        return Err(Error::RegimeTooLarge(format!("projection onto {} coordinates", s.len())));
    }
    let mut counts = vec![0u64; 1 << s.len()];
    for c in all_encodings(scheme, x)? {
        counts[c.pattern(s) as usize] += 1;
    }
    Ok(counts)
}

fn scan_sets(scheme: &RpeScheme, sizes: std::ops::RangeInclusive<usize>, stop_at_first: bool) -> Result<SecrecyReport> {
    check_regime(scheme)?;
    let (k, n, rl) = (scheme.message_len(), scheme.codeword_len(), scheme.rand_len());
    let sets: f64 = sizes.clone().map(|j| binomial(n, j)).sum();
    let work = sets * (1u64 << k) as f64 * (1u64 << rl) as f64;
    if work > SECRECY_WORK_LIMIT {
        return Err(Error::RegimeTooLarge(format!("secrecy check needs about {:.2e} pattern evaluations", work)));
    }
    let mut report = SecrecyReport { max_set_size: *sizes.end(), sets_checked: 0, violations: Vec::new() };
    for xi in 0..1u64 << k {
        let x = BitVec::from_u64(xi, k);
        let encodings = all_encodings(scheme, &x)?;
        for size in sizes.clone() {
            if size == 0 || size > 20 {
                continue;
            }
            let expected = (1u64 << rl) >> size.min(rl);
            let exact = size <= rl;
            for s in (0..n).combinations(size) {
                report.sets_checked += 1;
                let mut counts = vec![0u64; 1 << size];
                for c in &encodings {
                    counts[c.pattern(&s) as usize] += 1;
                }
                if !exact || counts.iter().any(|&c| c != expected) {
                    report.violations.push(SecrecyViolation { message: x.clone(), positions: s });
                    if stop_at_first {
                        return Ok(report);
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Checks that every projection onto at most `d − 1` coordinates is exactly uniform.
pub fn verify_secrecy(scheme: &RpeScheme) -> Result<SecrecyReport> {
    scan_sets(scheme, 1..=scheme.secrecy_threshold(), false)
}

/// First `(message, set)` of the given size whose projection is not uniform.
pub fn find_secrecy_witness(scheme: &RpeScheme, size: usize) -> Result<Option<SecrecyViolation>> {
    Ok(scan_sets(scheme, size..=size, true)?.violations.into_iter().next())
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distances() {
        assert_eq!(LinearCode::hamming74().unwrap().distance(), 3);
        assert_eq!(LinearCode::repetition(5).unwrap().distance(), 5);
        assert_eq!(LinearCode::identity(4).unwrap().distance(), 1);
        assert_eq!(LinearCode::extended_hamming84().unwrap().distance(), 4);
        assert_eq!(LinearCode::hamming(3).unwrap().distance(), 3);
        assert_eq!(LinearCode::hamming(4).unwrap().distance(), 3);
        assert_eq!(LinearCode::hamming(4).unwrap().extend().unwrap().distance(), 4);
        assert_eq!(LinearCode::simplex(3).unwrap().distance(), 4);
        assert_eq!(LinearCode::parity(6).unwrap().distance(), 2);
    }

    #[test]
    fn parity_check_annihilates_generator() {
        for code in [
            LinearCode::hamming74().unwrap(),
            LinearCode::simplex(3).unwrap(),
            LinearCode::hamming(4).unwrap().shorten(3).unwrap(),
        ] {
            assert!(code.parity_check().mul(&code.generator()).unwrap().is_zero());
            let rpe = RpeScheme::new(code.clone()).unwrap();
            assert_eq!(rpe.left_inverse().mul(&code.generator()).unwrap(), Gf2Matrix::identity(code.k()));
        }
    }

    #[test]
    fn zero_encodes_to_zero() {
        let rpe = RpeScheme::new(LinearCode::hamming74().unwrap()).unwrap();
        assert!(rpe.encode(&BitVec::zeros(4), &BitVec::zeros(3)).unwrap().is_zero());
        assert!(rpe.decode(&BitVec::zeros(7)).unwrap().is_zero());
    }

    #[test]
    fn padded_scheme_roundtrips() {
        let rpe = RpeScheme::with_message_len(LinearCode::hamming74().unwrap(), 3).unwrap();
        assert_eq!(rpe.padding(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for xi in 0..8 {
            let x = BitVec::from_u64(xi, 3);
            let c = rpe.encode_rng(&x, &mut rng).unwrap();
            assert_eq!(rpe.decode(&c).unwrap(), x);
        }
    }

    #[test]
    fn too_many_constraints() {
        let rpe = RpeScheme::new(LinearCode::hamming74().unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = rpe.reconstruct(&[0, 1, 2], &BitVec::zeros(7), &BitVec::zeros(4), &mut rng);
        assert!(matches!(err, Err(Error::TooManyConstraints { got: 3, max: 2 })));
    }

    #[test]
    fn hex_rows_roundtrip() {
        let v: BitVec = "1000110".parse().unwrap();
        assert_eq!(row_to_hex(&v), "8c");
        assert_eq!(row_from_hex("8c", 7).unwrap(), v);
        assert!(row_from_hex("8d", 7).is_err());
    }

    #[test]
    fn registry_rejects_wrong_distance() {
        let good = CodeEntry::from_code(&LinearCode::hamming74().unwrap());
        let json = serde_json::to_string(&vec![good.clone()]).unwrap();
        assert_eq!(parse_registry(&json).unwrap()[0].distance(), 3);
        let bad = CodeEntry { distance: 4, ..good };
        let json = serde_json::to_string(&vec![bad]).unwrap();
        assert!(parse_registry(&json).is_err());
    }

    #[test]
    fn random_codes_meet_requested_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let code = LinearCode::random_systematic(6, 14, 4, &mut rng, 200).unwrap();
        assert!(code.distance() >= 4);
        assert!(code.is_systematic());
    }
}
