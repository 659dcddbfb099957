//! JSON formats. All input, gate and node references are 1-based; a negative
//! literal `-i` in a layer-1 gate means the negation of input `i`.
//!
//! ```json
//! {"n": 3, "layers": [{"op": "AND", "gates": [[1, -2], [3]]}, {"op": "OR", "gates": [[1, 2]]}]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bitlinalg::BitVec;
use crate::circuits::family::{BoolFn, FunctionFamily};
use crate::circuits::general::{GNode, GeneralCircuit};
use crate::circuits::layered::{Circuit, GateLayer, Lit, LitLayer, Op};
use crate::circuits::local::LocalFn;
use crate::circuits::tree::DecisionTree;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerJson {
    pub op: Op,
    pub gates: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitJson {
    pub n: usize,
    pub layers: Vec<LayerJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeJson {
    Leaf(u8),
    Node { var: usize, lo: Box<TreeJson>, hi: Box<TreeJson> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecisionTreeJson {
    pub n: usize,
    pub tree: TreeJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalJson {
    pub n: usize,
    pub deps: Vec<usize>,
    pub table: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeJson {
    Input(usize),
    Not(usize),
    And(Vec<usize>),
    Or(Vec<usize>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneralJson {
    pub n: usize,
    pub nodes: Vec<NodeJson>,
    pub output: usize,
}

/// One family member; its input count is the family's.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionJson {
    Circuit { layers: Vec<LayerJson> },
    Tree(TreeJson),
    Local { deps: Vec<usize>, table: String },
    General { nodes: Vec<NodeJson>, output: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyJson {
    pub n: usize,
    pub functions: Vec<FunctionJson>,
}

fn one_based(r: usize, what: &str, limit: usize) -> Result<usize> {
    if r == 0 || r > limit {
        return Err(Error::Parse(format!("{} {} out of range 1..={}", what, r, limit)));
    }
    Ok(r - 1)
}

fn context<T>(res: Result<T>, ctx: impl Fn() -> String) -> Result<T> {
    res.map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {}", ctx(), m)),
        other => other,
    })
}

pub fn circuit_from_layers(n: usize, layers: &[LayerJson]) -> Result<Circuit> {
    let (first, rest) = layers.split_first().ok_or_else(|| Error::Parse("circuit has no layers".into()))?;
    let mut bottom = Vec::with_capacity(first.gates.len());
    for (g, refs) in first.gates.iter().enumerate() {
        let lits = refs
            .iter()
            .map(|&r| {
                let var = context(one_based(r.unsigned_abs() as usize, "input", n), || format!("layer 1 gate {}", g + 1))?;
                Ok(Lit { var, neg: r < 0 })
            })
            .collect::<Result<Vec<_>>>()?;
        bottom.push(lits);
    }
    let mut upper = Vec::with_capacity(rest.len());
    let mut below = first.gates.len();
    for (li, layer) in rest.iter().enumerate() {
        let mut gates = Vec::with_capacity(layer.gates.len());
        for (g, refs) in layer.gates.iter().enumerate() {
            let ctx = || format!("layer {} gate {}", li + 2, g + 1);
            let mapped = refs
                .iter()
                .map(|&r| {
                    if r <= 0 {
                        return Err(Error::Parse(format!("{}: gate reference {} must be positive", ctx(), r)));
                    }
                    context(one_based(r as usize, "gate", below), ctx)
                })
                .collect::<Result<Vec<_>>>()?;
            gates.push(mapped);
        }
        below = layer.gates.len();
        upper.push(GateLayer { op: layer.op, gates });
    }
    Circuit::new(n, LitLayer { op: first.op, gates: bottom }, upper)
}

pub fn circuit_to_json(c: &Circuit) -> CircuitJson {
    let mut layers = vec![LayerJson {
        op: c.bottom().op,
        gates: c
            .bottom()
            .gates
            .iter()
            .map(|g| g.iter().map(|l| if l.neg { -(l.var as i64 + 1) } else { l.var as i64 + 1 }).collect())
            .collect(),
    }];
    for layer in c.upper() {
        layers.push(LayerJson {
            op: layer.op,
            gates: layer.gates.iter().map(|g| g.iter().map(|&r| r as i64 + 1).collect()).collect(),
        });
    }
    CircuitJson { n: c.n_inputs(), layers }
}

pub fn tree_from_json(n: usize, t: &TreeJson) -> Result<DecisionTree> {
    match t {
        TreeJson::Leaf(0) => Ok(DecisionTree::Leaf(false)),
        TreeJson::Leaf(1) => Ok(DecisionTree::Leaf(true)),
        TreeJson::Leaf(v) => Err(Error::Parse(format!("leaf value {} is not 0 or 1", v))),
        TreeJson::Node { var, lo, hi } => Ok(DecisionTree::Node {
            var: one_based(*var, "tree variable", n)?,
            lo: Box::new(context(tree_from_json(n, lo), || format!("lo branch of variable {}", var))?),
            hi: Box::new(context(tree_from_json(n, hi), || format!("hi branch of variable {}", var))?),
        }),
    }
}

pub fn tree_to_json(t: &DecisionTree) -> TreeJson {
    match t {
        DecisionTree::Leaf(b) => TreeJson::Leaf(*b as u8),
        DecisionTree::Node { var, lo, hi } => {
            TreeJson::Node { var: var + 1, lo: Box::new(tree_to_json(lo)), hi: Box::new(tree_to_json(hi)) }
        }
    }
}

pub fn local_from_json(n: usize, deps: &[usize], table: &str) -> Result<LocalFn> {
    let deps = deps.iter().map(|&d| one_based(d, "dependency", n)).collect::<Result<Vec<_>>>()?;
    let table: BitVec = table.parse()?;
    LocalFn::new(deps, table)
}

pub fn general_from_json(n: usize, nodes: &[NodeJson], output: usize) -> Result<GeneralCircuit> {
    let count = nodes.len();
    let mut out = Vec::with_capacity(count);
    for (i, node) in nodes.iter().enumerate() {
        let ctx = || format!("node {}", i + 1);
        let refs = |cs: &Vec<usize>| cs.iter().map(|&c| context(one_based(c, "node", count), ctx)).collect::<Result<Vec<_>>>();
        out.push(match node {
            NodeJson::Input(v) => GNode::Input(context(one_based(*v, "input", n), ctx)?),
            NodeJson::Not(c) => GNode::Not(context(one_based(*c, "node", count), ctx)?),
            NodeJson::And(cs) => GNode::And(refs(cs)?),
            NodeJson::Or(cs) => GNode::Or(refs(cs)?),
        });
    }
    GeneralCircuit::new(n, out, one_based(output, "output node", count)?)
}

pub fn function_from_json(n: usize, f: &FunctionJson) -> Result<BoolFn> {
    Ok(match f {
        FunctionJson::Circuit { layers } => BoolFn::Circuit(circuit_from_layers(n, layers)?),
        FunctionJson::Tree(t) => BoolFn::Tree(tree_from_json(n, t)?),
        FunctionJson::Local { deps, table } => BoolFn::Local(local_from_json(n, deps, table)?),
        FunctionJson::General { nodes, output } => BoolFn::Circuit(general_from_json(n, nodes, *output)?.normalize()),
    })
}

pub fn function_to_json(f: &BoolFn) -> FunctionJson {
    match f {
        BoolFn::Circuit(c) => FunctionJson::Circuit { layers: circuit_to_json(c).layers },
        BoolFn::Tree(t) => FunctionJson::Tree(tree_to_json(t)),
        BoolFn::Local(l) => FunctionJson::Local { deps: l.deps.iter().map(|d| d + 1).collect(), table: l.table.to_string() },
    }
}

pub fn family_from_json(j: &FamilyJson) -> Result<FunctionFamily> {
    let funcs = j
        .functions
        .iter()
        .enumerate()
        .map(|(i, f)| context(function_from_json(j.n, f), || format!("function {}", i + 1)))
        .collect::<Result<Vec<_>>>()?;
    FunctionFamily::new(j.n, funcs)
}

pub fn family_to_json(f: &FunctionFamily) -> FamilyJson {
    FamilyJson { n: f.n_inputs, functions: f.funcs.iter().map(function_to_json).collect() }
}

pub fn parse_circuit(s: &str) -> Result<Circuit> {
    let j: CircuitJson = serde_json::from_str(s)?;
    circuit_from_layers(j.n, &j.layers)
}

pub fn parse_family(s: &str) -> Result<FunctionFamily> {
    family_from_json(&serde_json::from_str(s)?)
}

pub fn load_family(path: &Path) -> Result<FunctionFamily> {
    parse_family(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circuit_roundtrip() {
        let src = r#"{"n":3,"layers":[{"op":"AND","gates":[[1,-2],[3]]},{"op":"OR","gates":[[1,2]]}]}"#;
        let c = parse_circuit(src).unwrap();
        assert!(c.eval(&"100".parse().unwrap()));
        assert!(!c.eval(&"110".parse().unwrap()));
        let back = serde_json::to_string(&circuit_to_json(&c)).unwrap();
        assert_eq!(parse_circuit(&back).unwrap(), c);
    }

    #[test]
    fn errors_name_positions() {
        let src = r#"{"n":2,"layers":[{"op":"AND","gates":[[1],[3]]},{"op":"OR","gates":[[1,2]]}]}"#;
        let e = parse_circuit(src).unwrap_err().to_string();
        assert!(e.contains("layer 1 gate 2"), "{}", e);
        let src = r#"{"n":2,"layers":[{"op":"AND","gates":[[1]]},{"op":"OR","gates":[[2]]}]}"#;
        let e = parse_circuit(src).unwrap_err().to_string();
        assert!(e.contains("layer 2 gate 1"), "{}", e);
        let fam = r#"{"n":2,"functions":[{"local":{"deps":[1],"table":"01"}},{"tree":{"var":3,"lo":0,"hi":1}}]}"#;
        let e = parse_family(fam).unwrap_err().to_string();
        assert!(e.contains("function 2"), "{}", e);
    }

    #[test]
    fn family_formats() {
        let fam = r#"{"n":3,"functions":[
            {"local":{"deps":[1,3],"table":"0110"}},
            {"tree":{"var":2,"lo":0,"hi":{"var":3,"lo":1,"hi":0}}},
            {"general":{"nodes":[{"input":1},{"not":1},{"input":2},{"and":[2,3]},{"or":[4,1]}],"output":5}}
        ]}"#;
        let f = parse_family(fam).unwrap();
        let x: BitVec = "101".parse().unwrap();
        assert_eq!(f.eval(&x).to_string(), "001");
        let again = family_from_json(&family_to_json(&f)).unwrap();
        for xi in 0..8 {
            let x = BitVec::from_u64(xi, 3);
            assert_eq!(again.eval(&x), f.eval(&x));
        }
    }
}
