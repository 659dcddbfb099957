//! Packed GF(2) vectors and matrices.
//!
//! Bits are stored LSB-first inside `u64` words: position `i` lives in word
//! `i / 64` at bit `i % 64`. Positions are 0-based in this API; the unused
//! high bits of the last word are always kept at zero.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    (len + WORD - 1) / WORD
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; words_for(len)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVec { len, words: vec![!0; words_for(len)] };
        v.trim();
        v
    }

    /// Bit `i` of the result is bit `i` of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut v = BitVec::zeros(len);
        if len > 0 {
            v.words[0] = value;
            v.trim();
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut v = BitVec { len, words: (0..words_for(len)).map(|_| rng.gen()).collect() };
        v.trim();
        v
    }

    fn trim(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {} out of range for length {}", i, self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, b: bool) {
        assert!(i < self.len, "bit index {} out of range for length {}", i, self.len);
        let mask = 1u64 << (i % WORD);
        if b {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {} out of range for length {}", i, self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Value of the first (up to) 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 on a vector of length {}", self.len);
        self.words.first().copied().unwrap_or(0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn and(&self, other: &BitVec) -> BitVec {
        assert_eq!(self.len, other.len, "and of vectors with different lengths");
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot of vectors with different lengths");
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Positions holding a one, increasing.
    pub fn ones_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count_ones());
        for (wi, &w) in self.words.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * WORD + b);
                w &= w - 1;
            }
        }
        out
    }

    pub fn slice(&self, start: usize, end: usize) -> BitVec {
        assert!(start <= end && end <= self.len, "slice {}..{} of length {}", start, end, self.len);
        let mut out = BitVec::zeros(end - start);
        for i in start..end {
            if self.get(i) {
                out.set(i - start, true);
            }
        }
        out
    }

    pub fn push(&mut self, b: bool) {
        if self.len % WORD == 0 {
            self.words.push(0);
        }
        self.len += 1;
        if b {
            self.set(self.len - 1, true);
        }
    }

    pub fn extend_from(&mut self, other: &BitVec) {
        for b in other.iter() {
            self.push(b);
        }
    }

    pub fn concat(parts: &[&BitVec]) -> BitVec {
        let total = parts.iter().map(|p| p.len).sum();
        let mut out = BitVec::zeros(total);
        let mut off = 0;
        for p in parts {
            for i in p.ones_positions() {
                out.set(off + i, true);
            }
            off += p.len;
        }
        out
    }

    /// Bits at the given positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> BitVec {
        let mut out = BitVec::zeros(positions.len());
        for (j, &i) in positions.iter().enumerate() {
            if self.get(i) {
                out.set(j, true);
            }
        }
        out
    }

    /// Pattern of the bits at `positions` packed into an integer (first position = bit 0).
    pub fn pattern(&self, positions: &[usize]) -> u64 {
        debug_assert!(positions.len() <= 64);
        let mut p = 0u64;
        for (j, &i) in positions.iter().enumerate() {
            p |= (self.get(i) as u64) << j;
        }
        p
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({})", self)
    }
}

impl FromStr for BitVec {
    type Err = Error;

    /// Parses a string of `0`/`1`; position 0 is the leftmost character.
    fn from_str(s: &str) -> Result<Self, Error> {
        let mut v = BitVec::zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(i, true),
                other => return Err(Error::Parse(format!("invalid bit character {:?} at offset {}", other, i))),
            }
        }
        Ok(v)
    }
}

impl Serialize for BitVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense row-major GF(2) matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    data: Vec<BitVec>,
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for r in &self.data {
            writeln!(f, "  {}", r)?;
        }
        Ok(())
    }
}

/// Solutions of `M s = b`: `particular ⊕ span(null_basis)`, or nothing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolutionSet {
    Empty,
    Affine { particular: BitVec, null_basis: Vec<BitVec> },
}

impl SolutionSet {
    pub fn is_empty(&self) -> bool {
        matches!(self, SolutionSet::Empty)
    }

    /// Solution indexed by `coeffs`: bit `j` selects `null_basis[j]`.
    pub fn combine(&self, coeffs: &BitVec) -> Option<BitVec> {
        match self {
            SolutionSet::Empty => None,
            SolutionSet::Affine { particular, null_basis } => {
                assert_eq!(coeffs.len(), null_basis.len(), "coefficient vector does not match null-space dimension");
                let mut s = particular.clone();
                for j in coeffs.ones_positions() {
                    s.xor_assign(&null_basis[j]);
                }
                Some(s)
            }
        }
    }

    /// Uniform draw from the solution set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<BitVec> {
        match self {
            SolutionSet::Empty => None,
            SolutionSet::Affine { null_basis, .. } => {
                let c = BitVec::random(null_basis.len(), rng);
                self.combine(&c)
            }
        }
    }
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Gf2Matrix { rows, cols, data: vec![BitVec::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Gf2Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitVec>, cols: usize) -> Result<Self, Error> {
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(format!("row {} has length {}, expected {}", i, r.len(), cols)));
            }
        }
        Ok(Gf2Matrix { rows: rows.len(), cols, data: rows })
    }

    /// Rows given as `0`/`1` strings of equal length.
    pub fn parse_rows(rows: &[&str]) -> Result<Self, Error> {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        let parsed = rows.iter().map(|r| r.parse()).collect::<Result<Vec<BitVec>, _>>()?;
        Gf2Matrix::from_rows(parsed, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVec {
        &self.data[i]
    }

    pub fn row_vecs(&self) -> &[BitVec] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, b: bool) {
        self.data[i].set(j, b)
    }

    pub fn column(&self, j: usize) -> BitVec {
        let mut c = BitVec::zeros(self.rows);
        for i in 0..self.rows {
            if self.get(i, j) {
                c.set(i, true);
            }
        }
        c
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut t = Gf2Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in self.data[i].ones_positions() {
                t.set(j, i, true);
            }
        }
        t
    }

    /// `M v`.
    pub fn matmul(&self, v: &BitVec) -> Result<BitVec, Error> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against matrix with {} columns",
                v.len(),
                self.cols
            )));
        }
        let mut out = BitVec::zeros(self.rows);
        for (i, r) in self.data.iter().enumerate() {
            if r.dot(v) {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// `Mᵀ v`, computed as the XOR of the rows selected by `v`.
    pub fn transpose_matmul(&self, v: &BitVec) -> Result<BitVec, Error> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against transposed matrix with {} columns",
                v.len(),
                self.rows
            )));
        }
        let mut out = BitVec::zeros(self.cols);
        for i in v.ones_positions() {
            out.xor_assign(&self.data[i]);
        }
        Ok(out)
    }

    /// `self · other`.
    pub fn mul(&self, other: &Gf2Matrix) -> Result<Gf2Matrix, Error> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .map(|r| other.transpose_matmul(r).expect("checked dimensions"))
            .collect();
        Ok(Gf2Matrix { rows: self.rows, cols: other.cols, data })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.is_zero())
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.data.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..rows.len()).find(|&i| rows[i].get(col)) else { continue };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (i, r) in rows.iter_mut().enumerate() {
                if i != rank && r.get(col) {
                    r.xor_assign(&pivot);
                }
            }
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }

    /// Solves `M s = b`. Free variables are zero in the particular solution.
    pub fn solve_affine(&self, b: &BitVec) -> Result<SolutionSet, Error> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side of length {} for {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut rows = self.data.clone();
        let mut rhs: Vec<bool> = b.iter().collect();
        let mut pivots: Vec<usize> = Vec::new();
        let mut r = 0;
        for col in 0..self.cols {
            if r == rows.len() {
                break;
            }
            let Some(p) = (r..rows.len()).find(|&i| rows[i].get(col)) else { continue };
            rows.swap(r, p);
            rhs.swap(r, p);
            let pivot = rows[r].clone();
            let pb = rhs[r];
            for i in 0..rows.len() {
                if i != r && rows[i].get(col) {
                    rows[i].xor_assign(&pivot);
                    rhs[i] ^= pb;
                }
            }
            pivots.push(col);
            r += 1;
        }
        if rhs[r..].iter().any(|&x| x) {
            return Ok(SolutionSet::Empty);
        }
        let mut particular = BitVec::zeros(self.cols);
        for (i, &col) in pivots.iter().enumerate() {
            if rhs[i] {
                particular.set(col, true);
            }
        }
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut null_basis = Vec::new();
        for free in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut v = BitVec::zeros(self.cols);
            v.set(free, true);
            for (i, &col) in pivots.iter().enumerate() {
                if rows[i].get(free) {
                    v.set(col, true);
                }
            }
            null_basis.push(v);
        }
        Ok(SolutionSet::Affine { particular, null_basis })
    }

    /// Basis of `{ v : M v = 0 }`.
    pub fn null_space(&self) -> Vec<BitVec> {
        match self.solve_affine(&BitVec::zeros(self.rows)).expect("dimensions match") {
            SolutionSet::Affine { null_basis, .. } => null_basis,
            SolutionSet::Empty => unreachable!("homogeneous systems are always solvable"),
        }
    }

    /// `B` with `B · self = I`, for `self` of full column rank.
    pub fn left_inverse(&self) -> Result<Gf2Matrix, Error> {
        let r = self.rank();
        if r < self.cols {
            return Err(Error::NotFullRank { rank: r, cols: self.cols });
        }
        // Row i of B solves Aᵀ y = e_i.
        let at = self.transpose();
        let mut rows = Vec::with_capacity(self.cols);
        for i in 0..self.cols {
            let mut e = BitVec::zeros(self.cols);
            e.set(i, true);
            match at.solve_affine(&e)? {
                SolutionSet::Affine { particular, .. } => rows.push(particular),
                SolutionSet::Empty => return Err(Error::NotFullRank { rank: r, cols: self.cols }),
            }
        }
        Gf2Matrix::from_rows(rows, self.rows)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Gf2Matrix) -> Result<Gf2Matrix, Error> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!("vstack of {} and {} columns", self.cols, other.cols)));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Gf2Matrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Submatrix with the given rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Gf2Matrix {
        Gf2Matrix { rows: idx.len(), cols: self.cols, data: idx.iter().map(|&i| self.data[i].clone()).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bv(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    #[test]
    fn matmul_examples() {
        assert_eq!(Gf2Matrix::identity(3).matmul(&bv("101")).unwrap(), bv("101"));
        assert_eq!(Gf2Matrix::zeros(2, 3).matmul(&bv("111")).unwrap(), bv("00"));
        let m = Gf2Matrix::parse_rows(&["11", "01"]).unwrap();
        assert_eq!(m.matmul(&bv("11")).unwrap(), bv("01"));
        assert!(matches!(m.matmul(&bv("1")), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn solve_examples() {
        let s = Gf2Matrix::identity(2).solve_affine(&bv("10")).unwrap();
        assert_eq!(s, SolutionSet::Affine { particular: bv("10"), null_basis: vec![] });
        assert!(Gf2Matrix::zeros(1, 2).solve_affine(&bv("1")).unwrap().is_empty());
        let s = Gf2Matrix::parse_rows(&["11"]).unwrap().solve_affine(&bv("0")).unwrap();
        let mut sols: Vec<String> =
            (0..2).map(|c| s.combine(&BitVec::from_u64(c, 1)).unwrap().to_string()).collect();
        sols.sort();
        assert_eq!(sols, vec!["00", "11"]);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(Gf2Matrix::identity(5).rank(), 5);
        assert_eq!(Gf2Matrix::zeros(3, 4).rank(), 0);
        assert_eq!(Gf2Matrix::parse_rows(&["11", "11"]).unwrap().rank(), 1);
    }

    #[test]
    fn left_inverse_of_systematic_is_projection() {
        let a = Gf2Matrix::parse_rows(&["100", "010", "001", "110", "011"]).unwrap();
        let b = a.left_inverse().unwrap();
        assert_eq!(b, Gf2Matrix::parse_rows(&["10000", "01000", "00100"]).unwrap());
        assert_eq!(b.mul(&a).unwrap(), Gf2Matrix::identity(3));
        let deficient = Gf2Matrix::parse_rows(&["11", "11"]).unwrap();
        assert!(matches!(deficient.left_inverse(), Err(Error::NotFullRank { rank: 1, cols: 2 })));
    }

    #[test]
    fn solution_sets_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(1..9);
            let m = Gf2Matrix::from_rows((0..rows).map(|_| BitVec::random(cols, &mut rng)).collect(), cols).unwrap();
            let b = BitVec::random(rows, &mut rng);
            let brute: Vec<u64> = (0..1u64 << cols)
                .filter(|&s| m.matmul(&BitVec::from_u64(s, cols)).unwrap() == b)
                .collect();
            match m.solve_affine(&b).unwrap() {
                SolutionSet::Empty => assert!(brute.is_empty()),
                set @ SolutionSet::Affine { .. } => {
                    let SolutionSet::Affine { null_basis, .. } = &set else { unreachable!() };
                    let dim = null_basis.len();
                    let mut got: Vec<u64> = (0..1u64 << dim)
                        .map(|c| set.combine(&BitVec::from_u64(c, dim)).unwrap().to_u64())
                        .collect();
                    got.sort();
                    let before = got.len();
                    got.dedup();
                    assert_eq!(before, got.len(), "two coefficient vectors reach the same solution");
                    assert_eq!(got, brute);
                }
            }
        }
    }

    #[test]
    fn bit_helpers() {
        let v = bv("0110100001");
        assert_eq!(v.count_ones(), 4);
        assert_eq!(v.ones_positions(), vec![1, 2, 4, 9]);
        assert_eq!(v.slice(1, 5), bv("1101"));
        assert_eq!(BitVec::concat(&[&bv("01"), &bv("1")]), bv("011"));
        assert_eq!(BitVec::ones(70).count_ones(), 70);
        let mut w = BitVec::zeros(0);
        for b in v.iter() {
            w.push(b);
        }
        assert_eq!(w, v);
        assert_eq!(serde_json::to_string(&v).unwrap(), "\"0110100001\"");
    }
}
