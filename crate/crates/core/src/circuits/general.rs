//! Unlayered AND/OR circuits with negations at the inputs, and their
//! normalization into alternating layered form.

use std::collections::HashMap;

use crate::bitlinalg::BitVec;
use crate::circuits::layered::{Circuit, GateLayer, Lit, LitLayer, Op};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GNode {
    Input(usize),
    /// Negation of an `Input` node.
    Not(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
}

/// Nodes refer only to earlier nodes. Size counts every node, depth counts
/// AND/OR gates on the longest path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralCircuit {
    pub n: usize,
    pub nodes: Vec<GNode>,
    pub output: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Child {
    Lit(Lit),
    Gate(usize),
}

impl GeneralCircuit {
    pub fn new(n: usize, nodes: Vec<GNode>, output: usize) -> Result<Self> {
        for (i, node) in nodes.iter().enumerate() {
            let bad = |msg: String| Err(Error::Parse(format!("node {}: {}", i + 1, msg)));
            match node {
                GNode::Input(v) if *v >= n => return bad(format!("input {} out of range 1..={}", v + 1, n)),
                GNode::Not(c) => {
                    if *c >= i {
                        return bad(format!("refers to node {} which is not earlier", c + 1));
                    }
                    if !matches!(nodes[*c], GNode::Input(_)) {
                        return bad("negation of a non-input node".into());
                    }
                }
                GNode::And(cs) | GNode::Or(cs) => {
                    if let Some(c) = cs.iter().find(|&&c| c >= i) {
                        return bad(format!("refers to node {} which is not earlier", c + 1));
                    }
                }
                GNode::Input(_) => {}
            }
        }
        if output >= nodes.len() {
            return Err(Error::Parse(format!("output node {} does not exist", output + 1)));
        }
        Ok(GeneralCircuit { n, nodes, output })
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        let mut d = vec![0usize; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            d[i] = match node {
                GNode::Input(_) | GNode::Not(_) => 0,
                GNode::And(cs) | GNode::Or(cs) => 1 + cs.iter().map(|&c| d[c]).max().unwrap_or(0),
            };
        }
        d[self.output]
    }

    pub fn eval(&self, x: &BitVec) -> bool {
        let mut v = vec![false; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            v[i] = match node {
                GNode::Input(j) => x.get(*j),
                GNode::Not(c) => !v[*c],
                GNode::And(cs) => cs.iter().all(|&c| v[c]),
                GNode::Or(cs) => cs.iter().any(|&c| v[c]),
            };
        }
        v[self.output]
    }

    fn op(&self, i: usize) -> Option<Op> {
        match self.nodes[i] {
            GNode::And(_) => Some(Op::And),
            GNode::Or(_) => Some(Op::Or),
            _ => None,
        }
    }

    fn as_lit(&self, i: usize) -> Option<Lit> {
        match self.nodes[i] {
            GNode::Input(v) => Some(Lit::pos(v)),
            GNode::Not(c) => match self.nodes[c] {
                GNode::Input(v) => Some(Lit::negative(v)),
                _ => None,
            },
            _ => None,
        }
    }

    /// Children after absorbing same-operation gate children.
    fn flat_children(&self, i: usize, memo: &mut HashMap<usize, Vec<Child>>) -> Vec<Child> {
        if let Some(c) = memo.get(&i) {
            return c.clone();
        }
        let op = self.op(i).expect("gate node");
        let (GNode::And(cs) | GNode::Or(cs)) = &self.nodes[i] else { unreachable!() };
        let mut out: Vec<Child> = Vec::new();
        for &c in cs {
            let items = match self.as_lit(c) {
                Some(l) => vec![Child::Lit(l)],
                None if self.op(c) == Some(op) => self.flat_children(c, memo),
                None => vec![Child::Gate(c)],
            };
            for it in items {
                if !out.contains(&it) {
                    out.push(it);
                }
            }
        }
        memo.insert(i, out.clone());
        out
    }

    /// Alternating layered circuit computing the same function, with at most
    /// `depth · size` gates and depth at most `depth + 1`.
    pub fn normalize(&self) -> Circuit {
        if let Some(l) = self.as_lit(self.output) {
            return Circuit::literal(self.n, l);
        }
        let mut memo = HashMap::new();
        let mut best: Option<Circuit> = None;
        for bottom in [Op::And, Op::Or] {
            let c = self.layered(bottom, &mut memo);
            if best.as_ref().map_or(true, |b| c.depth() < b.depth() || (c.depth() == b.depth() && c.size() < b.size())) {
                best = Some(c);
            }
        }
        best.expect("two candidates")
    }

    fn layered(&self, bottom: Op, memo: &mut HashMap<usize, Vec<Child>>) -> Circuit {
        let op_at = |layer: usize| if layer % 2 == 1 { bottom } else { bottom.flip() };
        let mut lev: HashMap<usize, usize> = HashMap::new();
        self.level(self.output, &op_at, &mut lev, memo);
        let depth = lev[&self.output];
        let mut b = Builder { bottom_gates: vec![], upper: vec![vec![]; depth - 1], at: HashMap::new() };
        self.place(Child::Gate(self.output), depth, &lev, memo, &mut b);
        let upper = b
            .upper
            .into_iter()
            .enumerate()
            .map(|(i, gates)| GateLayer { op: op_at(i + 2), gates })
            .collect();
        Circuit::new(self.n, LitLayer { op: bottom, gates: b.bottom_gates }, upper).expect("normalization builds a valid circuit")
    }

    fn level(&self, i: usize, op_at: &dyn Fn(usize) -> Op, lev: &mut HashMap<usize, usize>, memo: &mut HashMap<usize, Vec<Child>>) -> usize {
        if let Some(&l) = lev.get(&i) {
            return l;
        }
        let mut lo = 1;
        for c in self.flat_children(i, memo) {
            if let Child::Gate(g) = c {
                lo = lo.max(1 + self.level(g, op_at, lev, memo));
            }
        }
        let op = self.op(i).expect("gate node");
        if op_at(lo) != op {
            lo += 1;
        }
        lev.insert(i, lo);
        lo
    }

    /// Index at `layer` of a gate computing `child`, creating pass-through gates as needed.
    fn place(&self, child: Child, layer: usize, lev: &HashMap<usize, usize>, memo: &mut HashMap<usize, Vec<Child>>, b: &mut Builder) -> usize {
        if let Some(&ix) = b.at.get(&(child, layer)) {
            return ix;
        }
        let base = match child {
            Child::Lit(_) => 1,
            Child::Gate(g) => lev[&g],
        };
        assert!(layer >= base);
        let ix = if layer > base {
            let below = self.place(child, layer - 1, lev, memo, b);
            b.push(layer, Entry::Refs(vec![below]))
        } else {
            match child {
                Child::Lit(l) => b.push(1, Entry::Lits(vec![l])),
                Child::Gate(g) => {
                    let kids = self.flat_children(g, memo);
                    if layer == 1 {
                        let lits = kids
                            .iter()
                            .map(|k| match k {
                                Child::Lit(l) => *l,
                                Child::Gate(_) => unreachable!("layer-1 gates have only literal children"),
                            })
                            .collect();
                        b.push(1, Entry::Lits(lits))
                    } else {
                        let refs = kids.into_iter().map(|k| self.place(k, layer - 1, lev, memo, b)).collect();
                        b.push(layer, Entry::Refs(refs))
                    }
                }
            }
        };
        b.at.insert((child, layer), ix);
        ix
    }
}

enum Entry {
    Lits(Vec<Lit>),
    Refs(Vec<usize>),
}

struct Builder {
    bottom_gates: Vec<Vec<Lit>>,
    upper: Vec<Vec<Vec<usize>>>,
    at: HashMap<(Child, usize), usize>,
}

impl Builder {
    fn push(&mut self, layer: usize, e: Entry) -> usize {
        match e {
            Entry::Lits(l) => {
                assert_eq!(layer, 1);
                self.bottom_gates.push(l);
                self.bottom_gates.len() - 1
            }
            Entry::Refs(r) => {
                let v = &mut self.upper[layer - 2];
                v.push(r);
                v.len() - 1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_general(rng: &mut impl Rng, n: usize, gates: usize) -> GeneralCircuit {
        let mut nodes: Vec<GNode> = (0..n).map(GNode::Input).collect();
        for i in 0..n {
            if rng.gen_bool(0.5) {
                nodes.push(GNode::Not(i));
            }
        }
        for _ in 0..gates {
            let k = rng.gen_range(1..=3);
            let cs: Vec<usize> = (0..k).map(|_| rng.gen_range(0..nodes.len())).collect();
            nodes.push(if rng.gen() { GNode::And(cs) } else { GNode::Or(cs) });
        }
        let out = nodes.len() - 1;
        GeneralCircuit::new(n, nodes, out).unwrap()
    }

    #[test]
    fn normalization_is_equivalent_and_small() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.gen_range(1..=8);
            let gates = rng.gen_range(1..12);
            let g = random_general(&mut rng, n, gates);
            let c = g.normalize();
            let d = g.depth().max(1);
            assert!(c.size() <= d * g.size(), "size {} > {}·{}", c.size(), d, g.size());
            assert!(c.depth() <= d + 1);
            for xi in 0..1u64 << n {
                let x = BitVec::from_u64(xi, n);
                assert_eq!(c.eval(&x), g.eval(&x));
            }
        }
    }

    #[test]
    fn rejects_forward_references() {
        assert!(GeneralCircuit::new(1, vec![GNode::And(vec![1]), GNode::Input(0)], 0).is_err());
        assert!(GeneralCircuit::new(1, vec![GNode::Input(0), GNode::And(vec![0]), GNode::Not(1)], 2).is_err());
    }
}
