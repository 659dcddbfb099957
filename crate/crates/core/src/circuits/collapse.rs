//! Class conversions used after a restriction: shrink the bottom fan-in,
//! remove one layer, or collapse the whole function to a shallow tree.

use serde::{Deserialize, Serialize};

use crate::circuits::family::{BoolFn, FunctionFamily};
use crate::circuits::layered::{Circuit, GateLayer, Lit, LitLayer};
use crate::circuits::table::TruthTable;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollapseMode {
    /// Every layer-1 gate must become a depth-≤t tree; result has bottom fan-in ≤ t.
    Width,
    /// Every layer-2 gate must become a depth-≤t tree; result is one layer shallower.
    Depth,
    /// The whole function must become a depth-≤t tree.
    Base,
}

impl CollapseMode {
    /// Mode of level `level` (0 = outermost) in a chain of `d` levels.
    pub fn for_level(level: usize, d: usize) -> CollapseMode {
        if level + 1 == d {
            CollapseMode::Base
        } else if level == 0 {
            CollapseMode::Width
        } else {
            CollapseMode::Depth
        }
    }
}

/// `Ok(None)` when the function does not collapse. Functions whose support
/// exceeds the exact truth-table regime count as not collapsing.
pub fn collapse(f: &BoolFn, n: usize, t: usize, mode: CollapseMode) -> Result<Option<BoolFn>> {
    match (f, mode) {
        (BoolFn::Tree(_) | BoolFn::Local(_), CollapseMode::Width | CollapseMode::Depth) => Ok(Some(f.clone())),
        (BoolFn::Circuit(c), CollapseMode::Width) if c.depth() >= 2 => Ok(collapse_bottom(c, t)?.map(BoolFn::Circuit)),
        (BoolFn::Circuit(c), CollapseMode::Depth) if c.depth() >= 3 => Ok(collapse_second(c, t)?.map(BoolFn::Circuit)),
        _ => match f.truth_table(n) {
            Ok(table) => Ok(table.optimal_tree(t).map(BoolFn::Tree)),
            Err(Error::RegimeTooLarge(_)) => Ok(None),
            Err(e) => Err(e),
        },
    }
}

/// Collapses every function; `None` if any fails.
pub fn collapse_family(fam: &FunctionFamily, t: usize, mode: CollapseMode) -> Result<Option<FunctionFamily>> {
    let mut funcs = Vec::with_capacity(fam.len());
    for f in &fam.funcs {
        match collapse(f, fam.n_inputs, t, mode)? {
            Some(g) => funcs.push(g),
            None => return Ok(None),
        }
    }
    Ok(Some(FunctionFamily { n_inputs: fam.n_inputs, funcs }))
}

fn shallow_tree_of(c: &Circuit, t: usize) -> Result<Option<crate::circuits::tree::DecisionTree>> {
    let table: TruthTable = match c.truth_table() {
        Ok(tt) => tt,
        Err(Error::RegimeTooLarge(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(table.optimal_tree(t))
}

fn collapse_bottom(c: &Circuit, t: usize) -> Result<Option<Circuit>> {
    let n = c.n_inputs();
    let bottom = c.bottom();
    let parent = &c.upper()[0];
    let mut gates: Vec<Vec<Lit>> = Vec::new();
    let mut image: Vec<Vec<usize>> = Vec::with_capacity(bottom.gates.len());
    for lits in &bottom.gates {
        if lits.len() <= t {
            image.push(vec![gates.len()]);
            gates.push(lits.clone());
            continue;
        }
        let Some(tree) = shallow_tree_of(&Circuit::single_gate(n, bottom.op, lits.clone()), t)? else {
            return Ok(None);
        };
        let two = tree.to_two_level(n, parent.op);
        let start = gates.len();
        gates.extend(two.bottom().gates.iter().cloned());
        image.push((start..gates.len()).collect());
    }
    let mut upper = c.upper().to_vec();
    upper[0] = GateLayer {
        op: parent.op,
        gates: parent.gates.iter().map(|refs| refs.iter().flat_map(|&r| image[r].iter().copied()).collect()).collect(),
    };
    let out = Circuit::from_parts_unchecked(n, LitLayer { op: bottom.op, gates }, upper);
    Ok(Some(out.simplify()))
}

fn collapse_second(c: &Circuit, t: usize) -> Result<Option<Circuit>> {
    let n = c.n_inputs();
    let bottom = c.bottom();
    let second = &c.upper()[0];
    let third = &c.upper()[1];
    let mut gates: Vec<Vec<Lit>> = Vec::new();
    let mut image: Vec<Vec<usize>> = Vec::with_capacity(second.gates.len());
    for refs in &second.gates {
        let sub = Circuit::two_level(n, second.op, refs.iter().map(|&r| bottom.gates[r].clone()).collect());
        let Some(tree) = shallow_tree_of(&sub, t)? else {
            return Ok(None);
        };
        let two = tree.to_two_level(n, third.op);
        let start = gates.len();
        gates.extend(two.bottom().gates.iter().cloned());
        image.push((start..gates.len()).collect());
    }
    let mut upper: Vec<GateLayer> = vec![GateLayer {
        op: third.op,
        gates: third.gates.iter().map(|refs| refs.iter().flat_map(|&r| image[r].iter().copied()).collect()).collect(),
    }];
    upper.extend(c.upper()[2..].iter().cloned());
    let out = Circuit::from_parts_unchecked(n, LitLayer { op: second.op, gates }, upper);
    Ok(Some(out.simplify()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitlinalg::BitVec;
    use crate::circuits::layered::Op;
    use rand::{Rng, SeedableRng};

    fn random_circuit(rng: &mut impl Rng, n: usize, depth: usize, fan: usize, width: usize) -> Circuit {
        let bottom_op = if rng.gen() { Op::And } else { Op::Or };
        let mut count = fan.pow(depth as u32 - 1);
        let gates = (0..count)
            .map(|_| {
                (0..rng.gen_range(1..=width))
                    .map(|_| Lit { var: rng.gen_range(0..n), neg: rng.gen() })
                    .collect()
            })
            .collect();
        let mut upper = Vec::new();
        let mut op = bottom_op;
        for _ in 1..depth {
            op = op.flip();
            let next = count / fan;
            upper.push(GateLayer { op, gates: (0..next).map(|g| (g * fan..(g + 1) * fan).collect()).collect() });
            count = next;
        }
        Circuit::new(n, LitLayer { op: bottom_op, gates }, upper).unwrap()
    }

    #[test]
    fn collapses_preserve_semantics_and_shape() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let n = 8;
        for _ in 0..60 {
            let c = random_circuit(&mut rng, n, 3, 2, 3);
            let f = BoolFn::Circuit(c.clone());
            for t in 1..=3 {
                if let Some(BoolFn::Circuit(w)) = collapse(&f, n, t, CollapseMode::Width).unwrap() {
                    assert!(w.bottom_width() <= t);
                    assert!(w.depth() <= c.depth());
                    for xi in 0..1u64 << n {
                        let x = BitVec::from_u64(xi, n);
                        assert_eq!(w.eval(&x), c.eval(&x));
                    }
                    if let Some(BoolFn::Circuit(d)) = collapse(&BoolFn::Circuit(w.clone()), n, t, CollapseMode::Depth).unwrap() {
                        assert!(d.depth() < w.depth() || d.as_constant().is_some());
                        for xi in 0..1u64 << n {
                            let x = BitVec::from_u64(xi, n);
                            assert_eq!(d.eval(&x), c.eval(&x));
                        }
                    }
                }
                let base = collapse(&f, n, t, CollapseMode::Base).unwrap();
                let depth = c.truth_table().unwrap().dt_depth();
                assert_eq!(base.is_some(), depth <= t);
            }
        }
    }

    #[test]
    fn level_modes() {
        assert_eq!(CollapseMode::for_level(0, 1), CollapseMode::Base);
        assert_eq!(CollapseMode::for_level(0, 3), CollapseMode::Width);
        assert_eq!(CollapseMode::for_level(1, 3), CollapseMode::Depth);
        assert_eq!(CollapseMode::for_level(2, 3), CollapseMode::Base);
    }
}
