//! Truth tables over explicit variable lists, with exact decision-tree depth.

use std::collections::HashMap;

use crate::bitlinalg::BitVec;
use crate::circuits::tree::DecisionTree;
use crate::error::{Error, Result};

/// Relevant-variable cap for exact decision-tree depth.
pub const MAX_TABLE_VARS: usize = 22;

/// Function of the inputs `vars`; entry `idx` is the value where input
/// `vars[b]` equals bit `b` of `idx`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruthTable {
    pub vars: Vec<usize>,
    pub bits: BitVec,
}

impl TruthTable {
    pub fn new(vars: Vec<usize>, bits: BitVec) -> Result<Self> {
        if vars.len() > MAX_TABLE_VARS {
            return Err(Error::RegimeTooLarge(format!("{} variables > {}", vars.len(), MAX_TABLE_VARS)));
        }
        if bits.len() != 1 << vars.len() {
            return Err(Error::DimensionMismatch(format!(
                "table of {} entries for {} variables",
                bits.len(),
                vars.len()
            )));
        }
        Ok(TruthTable { vars, bits })
    }

    pub fn constant(b: bool) -> Self {
        TruthTable { vars: vec![], bits: if b { BitVec::ones(1) } else { BitVec::zeros(1) } }
    }

    /// Tabulates `f` over `vars`; `f` receives an `n`-bit input that is zero off `vars`.
    pub fn from_fn(n: usize, vars: Vec<usize>, mut f: impl FnMut(&BitVec) -> bool) -> Result<Self> {
        if vars.len() > MAX_TABLE_VARS {
            return Err(Error::RegimeTooLarge(format!("{} variables > {}", vars.len(), MAX_TABLE_VARS)));
        }
        let mut bits = BitVec::zeros(1 << vars.len());
        let mut x = BitVec::zeros(n);
        for idx in 0..1usize << vars.len() {
            for (b, &v) in vars.iter().enumerate() {
                x.set(v, (idx >> b) & 1 == 1);
            }
            if f(&x) {
                bits.set(idx, true);
            }
        }
        Ok(TruthTable { vars, bits })
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn index_of(&self, x: &BitVec) -> usize {
        self.vars.iter().enumerate().fold(0, |acc, (b, &v)| acc | ((x.get(v) as usize) << b))
    }

    pub fn eval(&self, x: &BitVec) -> bool {
        self.bits.get(self.index_of(x))
    }

    pub fn as_constant(&self) -> Option<bool> {
        if self.bits.is_zero() {
            Some(false)
        } else if self.bits.count_ones() == self.bits.len() {
            Some(true)
        } else {
            None
        }
    }

    /// Table with `vars[b]` fixed to `val`.
    pub fn cofactor(&self, b: usize, val: bool) -> TruthTable {
        let bits = cofactor_bits(&self.bits, self.vars.len(), b, val);
        let mut vars = self.vars.clone();
        vars.remove(b);
        TruthTable { vars, bits }
    }

    pub fn depends_on(&self, b: usize) -> bool {
        depends(&self.bits, b)
    }

    /// Same function restricted to the variables it actually depends on.
    pub fn reduce(&self) -> TruthTable {
        let mut t = self.clone();
        let mut b = 0;
        while b < t.vars.len() {
            if t.depends_on(b) {
                b += 1;
            } else {
                t = t.cofactor(b, false);
            }
        }
        t
    }

    pub fn semantic_support(&self) -> Vec<usize> {
        self.reduce().vars
    }

    /// Exact minimum decision-tree depth.
    pub fn dt_depth(&self) -> usize {
        let r = self.reduce();
        let v = r.vars.len();
        let mut memo = HashMap::new();
        (min_depth_lower_bound(v)..=v).find(|&t| depth_le(&r.bits, v, t, &mut memo)).unwrap_or(v)
    }

    /// Whether some decision tree of depth at most `t` computes this function.
    pub fn depth_at_most(&self, t: usize) -> bool {
        let r = self.reduce();
        depth_le(&r.bits, r.vars.len(), t, &mut HashMap::new())
    }

    /// A decision tree of depth at most `t`, if one exists.
    pub fn optimal_tree(&self, t: usize) -> Option<DecisionTree> {
        let r = self.reduce();
        let mut memo = HashMap::new();
        if !depth_le(&r.bits, r.vars.len(), t, &mut memo) {
            return None;
        }
        Some(build_tree(&r, t, &mut memo))
    }
}

fn cofactor_bits(bits: &BitVec, v: usize, b: usize, val: bool) -> BitVec {
    let mut out = BitVec::zeros(1 << (v - 1));
    let low = (1usize << b) - 1;
    for j in 0..1usize << (v - 1) {
        let idx = (j & low) | ((j & !low) << 1) | ((val as usize) << b);
        if bits.get(idx) {
            out.set(j, true);
        }
    }
    out
}

fn depends(bits: &BitVec, b: usize) -> bool {
    let stride = 1usize << b;
    (0..bits.len()).filter(|i| i & stride == 0).any(|i| bits.get(i) != bits.get(i | stride))
}

fn reduce_bits(bits: BitVec, v: usize) -> (BitVec, usize) {
    let (mut bits, mut v) = (bits, v);
    let mut b = 0;
    while b < v {
        if depends(&bits, b) {
            b += 1;
        } else {
            bits = cofactor_bits(&bits, v, b, false);
            v -= 1;
        }
    }
    (bits, v)
}

/// A depth-t tree reads at most 2^t − 1 distinct variables.
fn min_depth_lower_bound(v: usize) -> usize {
    let mut t = 0;
    while (1usize << t) - 1 < v {
        t += 1;
    }
    t
}

/// `bits` must already be reduced to its support of size `v`.
fn depth_le(bits: &BitVec, v: usize, t: usize, memo: &mut HashMap<(BitVec, usize), bool>) -> bool {
    if v == 0 {
        return true;
    }
    if t == 0 || min_depth_lower_bound(v) > t {
        return false;
    }
    if t >= v {
        return true;
    }
    if let Some(&r) = memo.get(&(bits.clone(), t)) {
        return r;
    }
    let ok = (0..v).any(|b| {
        let (lo, vl) = reduce_bits(cofactor_bits(bits, v, b, false), v - 1);
        if !depth_le(&lo, vl, t - 1, memo) {
            return false;
        }
        let (hi, vh) = reduce_bits(cofactor_bits(bits, v, b, true), v - 1);
        depth_le(&hi, vh, t - 1, memo)
    });
    memo.insert((bits.clone(), t), ok);
    ok
}

fn build_tree(r: &TruthTable, t: usize, memo: &mut HashMap<(BitVec, usize), bool>) -> DecisionTree {
    let r = r.reduce();
    if let Some(c) = r.as_constant() {
        return DecisionTree::Leaf(c);
    }
    for b in 0..r.vars.len() {
        let lo = r.cofactor(b, false).reduce();
        let hi = r.cofactor(b, true).reduce();
        if depth_le(&lo.bits, lo.vars.len(), t - 1, memo) && depth_le(&hi.bits, hi.vars.len(), t - 1, memo) {
            return DecisionTree::Node {
                var: r.vars[b],
                lo: Box::new(build_tree(&lo, t - 1, memo)),
                hi: Box::new(build_tree(&hi, t - 1, memo)),
            };
        }
    }
    unreachable!("depth bound was established before building")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parity(v: usize) -> TruthTable {
        TruthTable::from_fn(v, (0..v).collect(), |x| x.count_ones() % 2 == 1).unwrap()
    }

    /// Plain recursion without memo or pruning.
    fn naive_depth(t: &TruthTable) -> usize {
        if t.as_constant().is_some() {
            return 0;
        }
        (0..t.num_vars())
            .map(|b| 1 + naive_depth(&t.cofactor(b, false)).max(naive_depth(&t.cofactor(b, true))))
            .min()
            .unwrap()
    }

    #[test]
    fn depth_examples() {
        assert_eq!(TruthTable::constant(true).dt_depth(), 0);
        let lit = TruthTable::from_fn(3, vec![1], |x| !x.get(1)).unwrap();
        assert_eq!(lit.dt_depth(), 1);
        assert_eq!(parity(3).dt_depth(), 3);
    }

    #[test]
    fn depth_matches_naive_recursion() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let v = rng.gen_range(0..5);
            let bits = BitVec::random(1 << v, &mut rng);
            let t = TruthTable::new((0..v).collect(), bits).unwrap();
            let d = t.dt_depth();
            assert_eq!(d, naive_depth(&t));
            let tree = t.optimal_tree(d).unwrap();
            assert_eq!(tree.depth(), d);
            for idx in 0..1u64 << v {
                let x = BitVec::from_u64(idx, v);
                assert_eq!(tree.eval(&x), t.eval(&x));
            }
            if d > 0 {
                assert!(t.optimal_tree(d - 1).is_none());
            }
        }
    }

    #[test]
    fn reduce_drops_dummies() {
        let t = TruthTable::from_fn(4, vec![0, 1, 2, 3], |x| x.get(2)).unwrap();
        assert_eq!(t.semantic_support(), vec![2]);
    }
}
