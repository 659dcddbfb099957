use std::collections::BTreeSet;

use crate::bitlinalg::BitVec;
use crate::circuits::layered::{Circuit, Lit, Op};
use crate::circuits::local::LocalFn;
use crate::error::Result;
use crate::restrictions::Restriction;

/// Decision tree over 0-based input variables. `lo` is taken when the variable is 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecisionTree {
    Leaf(bool),
    Node { var: usize, lo: Box<DecisionTree>, hi: Box<DecisionTree> },
}

impl DecisionTree {
    pub fn eval(&self, x: &BitVec) -> bool {
        let mut node = self;
        loop {
            match node {
                DecisionTree::Leaf(b) => return *b,
                DecisionTree::Node { var, lo, hi } => node = if x.get(*var) { hi } else { lo },
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            DecisionTree::Leaf(_) => 0,
            DecisionTree::Node { lo, hi, .. } => 1 + lo.depth().max(hi.depth()),
        }
    }

    pub fn vars(&self) -> Vec<usize> {
        let mut set = BTreeSet::new();
        self.collect_vars(&mut set);
        set.into_iter().collect()
    }

    fn collect_vars(&self, set: &mut BTreeSet<usize>) {
        if let DecisionTree::Node { var, lo, hi } = self {
            set.insert(*var);
            lo.collect_vars(set);
            hi.collect_vars(set);
        }
    }

    /// Follows fixed variables; queries on survivors stay.
    pub fn restrict(&self, rho: &Restriction) -> DecisionTree {
        match self {
            DecisionTree::Leaf(b) => DecisionTree::Leaf(*b),
            DecisionTree::Node { var, lo, hi } => {
                if rho.rho1.get(*var) {
                    let (lo, hi) = (lo.restrict(rho), hi.restrict(rho));
                    if lo == hi {
                        lo
                    } else {
                        DecisionTree::Node { var: *var, lo: Box::new(lo), hi: Box::new(hi) }
                    }
                } else if rho.rho2.get(*var) {
                    hi.restrict(rho)
                } else {
                    lo.restrict(rho)
                }
            }
        }
    }

    pub fn rename(&self, map: &dyn Fn(usize) -> usize) -> DecisionTree {
        match self {
            DecisionTree::Leaf(b) => DecisionTree::Leaf(*b),
            DecisionTree::Node { var, lo, hi } => {
                DecisionTree::Node { var: map(*var), lo: Box::new(lo.rename(map)), hi: Box::new(hi.rename(map)) }
            }
        }
    }

    /// Consistent root-to-leaf paths ending at a leaf with value `target`.
    fn paths(&self, target: bool) -> Vec<Vec<Lit>> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), target, &mut out);
        out
    }

    fn walk(&self, path: &mut Vec<Lit>, target: bool, out: &mut Vec<Vec<Lit>>) {
        match self {
            DecisionTree::Leaf(b) => {
                if *b == target {
                    out.push(path.clone());
                }
            }
            DecisionTree::Node { var, lo, hi } => {
                for (child, val) in [(lo, false), (hi, true)] {
                    match path.iter().find(|l| l.var == *var) {
                        Some(l) if l.value() != val => continue,
                        Some(_) => child.walk(path, target, out),
                        None => {
                            path.push(Lit { var: *var, neg: !val });
                            child.walk(path, target, out);
                            path.pop();
                        }
                    }
                }
            }
        }
    }

    /// OR over the 1-paths, each path an AND of its literals.
    pub fn to_dnf(&self, n: usize) -> Circuit {
        Circuit::two_level(n, Op::Or, self.paths(true))
    }

    /// AND over the 0-paths, each path negated into a clause.
    pub fn to_cnf(&self, n: usize) -> Circuit {
        let clauses = self
            .paths(false)
            .into_iter()
            .map(|p| p.into_iter().map(|l| l.negate()).collect())
            .collect();
        Circuit::two_level(n, Op::And, clauses)
    }

    /// Top gate `top` over width-≤depth gates of the other kind.
    pub fn to_two_level(&self, n: usize, top: Op) -> Circuit {
        match top {
            Op::Or => self.to_dnf(n),
            Op::And => self.to_cnf(n),
        }
    }

    pub fn to_local(&self) -> Result<LocalFn> {
        LocalFn::tabulate(self.vars(), |x| self.eval(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(b: bool) -> Box<DecisionTree> {
        Box::new(DecisionTree::Leaf(b))
    }

    #[test]
    fn conversion_examples() {
        let zero = DecisionTree::Leaf(false);
        let dnf = zero.to_dnf(3);
        assert_eq!(dnf.size(), 1);
        assert!(!dnf.eval(&BitVec::zeros(3)));
        let x3 = DecisionTree::Node { var: 2, lo: leaf(false), hi: leaf(true) };
        let dnf = x3.to_dnf(3);
        assert_eq!(dnf.bottom().gates, vec![vec![Lit { var: 2, neg: false }]]);
    }

    #[test]
    fn random_trees_agree_with_conversions() {
        use rand::{Rng, SeedableRng};
        fn random_tree(rng: &mut impl Rng, n: usize, depth: usize) -> DecisionTree {
            if depth == 0 || rng.gen_bool(0.2) {
                return DecisionTree::Leaf(rng.gen());
            }
            DecisionTree::Node {
                var: rng.gen_range(0..n),
                lo: Box::new(random_tree(rng, n, depth - 1)),
                hi: Box::new(random_tree(rng, n, depth - 1)),
            }
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let n = 6;
            let t = random_tree(&mut rng, n, 3);
            let (dnf, cnf, local) = (t.to_dnf(n), t.to_cnf(n), t.to_local().unwrap());
            assert!(dnf.bottom_width() <= t.depth());
            assert!(dnf.bottom().gates.len() <= 1 << t.depth());
            assert!(local.deps.len() <= 1 << t.depth());
            for xi in 0..1u64 << n {
                let x = BitVec::from_u64(xi, n);
                let v = t.eval(&x);
                assert_eq!(dnf.eval(&x), v);
                assert_eq!(cnf.eval(&x), v);
                assert_eq!(local.eval(&x), v);
            }
        }
    }
}
