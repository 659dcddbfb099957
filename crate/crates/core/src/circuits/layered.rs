use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bitlinalg::BitVec;
use crate::circuits::table::TruthTable;
use crate::error::{Error, Result};
use crate::restrictions::Restriction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Op {
    And,
    Or,
}

impl Op {
    pub fn flip(self) -> Op {
        match self {
            Op::And => Op::Or,
            Op::Or => Op::And,
        }
    }

    /// Value of the gate with no inputs.
    pub fn identity(self) -> bool {
        self == Op::And
    }

    /// Input value that fixes the gate's output.
    pub fn absorbing(self) -> bool {
        self == Op::Or
    }
}

/// Input literal: `x_var`, or its negation when `neg`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    pub var: usize,
    pub neg: bool,
}

impl Lit {
    pub fn pos(var: usize) -> Self {
        Lit { var, neg: false }
    }

    pub fn negative(var: usize) -> Self {
        Lit { var, neg: true }
    }

    /// Value of the variable that satisfies the literal.
    pub fn value(self) -> bool {
        !self.neg
    }

    pub fn negate(self) -> Lit {
        Lit { var: self.var, neg: !self.neg }
    }

    pub fn eval(self, x: &BitVec) -> bool {
        x.get(self.var) != self.neg
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LitLayer {
    pub op: Op,
    pub gates: Vec<Vec<Lit>>,
}

/// Gates whose children are indices into the layer below.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateLayer {
    pub op: Op,
    pub gates: Vec<Vec<usize>>,
}

/// Layered circuit with alternating AND/OR layers, negations only at inputs,
/// and a single gate on the top layer as output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    n: usize,
    bottom: LitLayer,
    upper: Vec<GateLayer>,
}

enum Status<T> {
    Const(bool),
    Live(Vec<T>),
}

impl Circuit {
    pub fn new(n: usize, bottom: LitLayer, upper: Vec<GateLayer>) -> Result<Self> {
        for (g, lits) in bottom.gates.iter().enumerate() {
            if let Some(l) = lits.iter().find(|l| l.var >= n) {
                return Err(Error::Parse(format!("layer 1 gate {}: input {} out of range 1..={}", g + 1, l.var + 1, n)));
            }
        }
        let mut below_op = bottom.op;
        let mut below_len = bottom.gates.len();
        for (li, layer) in upper.iter().enumerate() {
            if layer.op == below_op {
                return Err(Error::Parse(format!("layer {} repeats the operation of layer {}", li + 2, li + 1)));
            }
            for (g, refs) in layer.gates.iter().enumerate() {
                if let Some(&r) = refs.iter().find(|&&r| r >= below_len) {
                    return Err(Error::Parse(format!(
                        "layer {} gate {}: reference {} out of range 1..={}",
                        li + 2,
                        g + 1,
                        r + 1,
                        below_len
                    )));
                }
            }
            below_op = layer.op;
            below_len = layer.gates.len();
        }
        if below_len != 1 {
            return Err(Error::Parse(format!("top layer has {} gates, expected exactly 1", below_len)));
        }
        Ok(Circuit { n, bottom, upper })
    }

    /// Depth-1 circuit: a single gate over literals.
    pub fn single_gate(n: usize, op: Op, lits: Vec<Lit>) -> Self {
        Circuit { n, bottom: LitLayer { op, gates: vec![lits] }, upper: vec![] }
    }

    pub fn constant(n: usize, b: bool) -> Self {
        Self::single_gate(n, if b { Op::And } else { Op::Or }, vec![])
    }

    pub fn literal(n: usize, lit: Lit) -> Self {
        Self::single_gate(n, Op::And, vec![lit])
    }

    /// `top` over gates of the other kind, one per literal list.
    pub fn two_level(n: usize, top: Op, children: Vec<Vec<Lit>>) -> Self {
        let refs = (0..children.len()).collect();
        Circuit {
            n,
            bottom: LitLayer { op: top.flip(), gates: children },
            upper: vec![GateLayer { op: top, gates: vec![refs] }],
        }
    }

    pub fn dnf(n: usize, terms: Vec<Vec<Lit>>) -> Self {
        Self::two_level(n, Op::Or, terms)
    }

    pub fn cnf(n: usize, clauses: Vec<Vec<Lit>>) -> Self {
        Self::two_level(n, Op::And, clauses)
    }

    pub fn n_inputs(&self) -> usize {
        self.n
    }

    pub fn bottom(&self) -> &LitLayer {
        &self.bottom
    }

    pub fn upper(&self) -> &[GateLayer] {
        &self.upper
    }

    pub fn depth(&self) -> usize {
        1 + self.upper.len()
    }

    pub fn size(&self) -> usize {
        self.bottom.gates.len() + self.upper.iter().map(|l| l.gates.len()).sum::<usize>()
    }

    pub fn bottom_width(&self) -> usize {
        self.bottom.gates.iter().map(|g| g.len()).max().unwrap_or(0)
    }

    pub fn top_op(&self) -> Op {
        self.upper.last().map_or(self.bottom.op, |l| l.op)
    }

    pub fn as_constant(&self) -> Option<bool> {
        if self.upper.is_empty() && self.bottom.gates[0].is_empty() {
            Some(self.bottom.op.identity())
        } else {
            None
        }
    }

    fn eval_bottom(&self, x: &BitVec) -> Vec<bool> {
        let op = self.bottom.op;
        self.bottom
            .gates
            .iter()
            .map(|lits| match op {
                Op::And => lits.iter().all(|l| l.eval(x)),
                Op::Or => lits.iter().any(|l| l.eval(x)),
            })
            .collect()
    }

    pub fn eval(&self, x: &BitVec) -> bool {
        assert_eq!(x.len(), self.n, "circuit over {} inputs evaluated on {} bits", self.n, x.len());
        let mut vals = self.eval_bottom(x);
        for layer in &self.upper {
            vals = layer
                .gates
                .iter()
                .map(|refs| match layer.op {
                    Op::And => refs.iter().all(|&r| vals[r]),
                    Op::Or => refs.iter().any(|&r| vals[r]),
                })
                .collect();
        }
        vals[0]
    }

    /// Fixes inputs where `rho` has no star, then simplifies.
    pub fn restrict(&self, rho: &Restriction) -> Circuit {
        assert_eq!(rho.len(), self.n, "restriction length does not match circuit inputs");
        self.rebuild(|v| if rho.rho1.get(v) { None } else { Some(rho.rho2.get(v)) })
    }

    /// Constant propagation and removal of unreachable gates.
    pub fn simplify(&self) -> Circuit {
        self.rebuild(|_| None)
    }

    fn rebuild(&self, fixed: impl Fn(usize) -> Option<bool>) -> Circuit {
        let op = self.bottom.op;
        let mut status: Vec<Status<usize>> = Vec::new();
        let mut bottom_lits: Vec<Vec<Lit>> = Vec::new();
        for lits in &self.bottom.gates {
            let mut keep: Vec<Lit> = Vec::new();
            let mut constant = None;
            for &l in lits {
                match fixed(l.var) {
                    Some(v) => {
                        if (v != l.neg) == op.absorbing() {
                            constant = Some(op.absorbing());
                            break;
                        }
                    }
                    None => {
                        if !keep.contains(&l) {
                            keep.push(l);
                        }
                    }
                }
            }
            match constant {
                Some(c) => status.push(Status::Const(c)),
                None if keep.is_empty() => status.push(Status::Const(op.identity())),
                None => {
                    status.push(Status::Live(vec![bottom_lits.len()]));
                    bottom_lits.push(keep);
                }
            }
        }
        let mut upper_status: Vec<Vec<Status<usize>>> = Vec::new();
        let mut prev = status;
        for layer in &self.upper {
            let mut cur = Vec::with_capacity(layer.gates.len());
            for refs in &layer.gates {
                let mut keep = Vec::new();
                let mut constant = None;
                for &r in refs {
                    match &prev[r] {
                        Status::Const(c) if *c == layer.op.absorbing() => {
                            constant = Some(*c);
                            break;
                        }
                        Status::Const(_) => {}
                        Status::Live(_) => {
                            if !keep.contains(&r) {
                                keep.push(r);
                            }
                        }
                    }
                }
                cur.push(match constant {
                    Some(c) => Status::Const(c),
                    None if keep.is_empty() => Status::Const(layer.op.identity()),
                    None => Status::Live(keep),
                });
            }
            upper_status.push(std::mem::replace(&mut prev, cur));
        }
        // `prev` is now the top layer (or the bottom layer when there is none).
        if let Status::Const(c) = prev[0] {
            return Circuit::constant(self.n, c);
        }
        if self.upper.is_empty() {
            return Circuit::single_gate(self.n, op, bottom_lits.swap_remove(0));
        }
        // Walk down from the output keeping reachable live gates.
        let mut layers_rev: Vec<GateLayer> = Vec::new();
        let mut wanted: Vec<usize> = vec![0];
        let mut current = prev;
        for layer in self.upper.iter().rev() {
            let below = upper_status.pop().expect("one status layer per gate layer");
            let mut new_index = vec![usize::MAX; below.len()];
            let mut order: Vec<usize> = Vec::new();
            let mut gates = Vec::with_capacity(wanted.len());
            for &g in &wanted {
                let Status::Live(refs) = &current[g] else { unreachable!("wanted gates are live") };
                let mapped = refs
                    .iter()
                    .map(|&r| {
                        if new_index[r] == usize::MAX {
                            new_index[r] = order.len();
                            order.push(r);
                        }
                        new_index[r]
                    })
                    .collect();
                gates.push(mapped);
            }
            layers_rev.push(GateLayer { op: layer.op, gates });
            wanted = order;
            current = below;
        }
        let bottom_gates = wanted
            .iter()
            .map(|&g| {
                let Status::Live(ix) = &current[g] else { unreachable!("wanted gates are live") };
                bottom_lits[ix[0]].clone()
            })
            .collect();
        layers_rev.reverse();
        Circuit { n: self.n, bottom: LitLayer { op, gates: bottom_gates }, upper: layers_rev }
    }

    /// Variables read by some literal (after simplification this is the syntactic support).
    pub fn support(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.bottom.gates.iter().flatten().map(|l| l.var).collect();
        set.into_iter().collect()
    }

    pub fn truth_table(&self) -> Result<TruthTable> {
        let s = self.simplify();
        TruthTable::from_fn(self.n, s.support(), |x| s.eval(x))
    }

    /// Renames every input `v` to `map(v)` over `new_n` inputs.
    pub fn rename(&self, map: &dyn Fn(usize) -> usize, new_n: usize) -> Circuit {
        let gates = self
            .bottom
            .gates
            .iter()
            .map(|lits| lits.iter().map(|l| Lit { var: map(l.var), neg: l.neg }).collect())
            .collect();
        Circuit { n: new_n, bottom: LitLayer { op: self.bottom.op, gates }, upper: self.upper.clone() }
    }

    pub(crate) fn from_parts_unchecked(n: usize, bottom: LitLayer, upper: Vec<GateLayer>) -> Circuit {
        Circuit { n, bottom, upper }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn restriction(r1: &str, r2: &str) -> Restriction {
        Restriction::new(r1.parse().unwrap(), r2.parse().unwrap()).unwrap()
    }

    #[test]
    fn literal_and() {
        let c = Circuit::single_gate(2, Op::And, vec![Lit::pos(0), Lit::negative(1)]);
        assert!(c.eval(&"10".parse().unwrap()));
        assert!(!c.eval(&"11".parse().unwrap()));
    }

    #[test]
    fn empty_gates() {
        assert!(Circuit::constant(3, true).eval(&BitVec::zeros(3)));
        assert!(!Circuit::constant(3, false).eval(&BitVec::zeros(3)));
        assert!(Circuit::dnf(2, vec![vec![]]).eval(&BitVec::zeros(2)));
        assert!(!Circuit::dnf(2, vec![]).eval(&BitVec::zeros(2)));
    }

    #[test]
    fn restriction_examples() {
        let c = Circuit::dnf(3, vec![vec![Lit::pos(0), Lit::pos(1)], vec![Lit::negative(2)]]);
        assert_eq!(c.restrict(&restriction("111", "000")), c);
        let fixed = c.restrict(&restriction("000", "110"));
        assert_eq!(fixed.as_constant(), Some(true));
        let part = c.restrict(&restriction("100", "011"));
        assert_eq!(part.support(), vec![0]);
        assert_eq!(part.depth(), 2);
    }

    #[test]
    fn contradiction_is_kept_syntactically() {
        let c = Circuit::single_gate(2, Op::And, vec![Lit::pos(0), Lit::negative(0)]);
        assert_eq!(c.simplify().support(), vec![0]);
        assert!(c.truth_table().unwrap().semantic_support().is_empty());
    }

    #[test]
    fn validation() {
        let bad = Circuit::new(
            2,
            LitLayer { op: Op::And, gates: vec![vec![Lit::pos(0)]] },
            vec![GateLayer { op: Op::And, gates: vec![vec![0]] }],
        );
        assert!(bad.is_err());
        let two_tops = Circuit::new(2, LitLayer { op: Op::And, gates: vec![vec![], vec![]] }, vec![]);
        assert!(two_tops.is_err());
    }
}
