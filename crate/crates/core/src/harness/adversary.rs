//! Adversary descriptions: finite selector tables over an explicit family,
//! or built-in strategies sized to the codeword at hand. Indices in JSON are
//! 1-based.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitlinalg::BitVec;
use crate::circuits::json::{family_from_json, load_family, FamilyJson};
use crate::circuits::{BoolFn, FunctionFamily, LocalFn};
use crate::error::{Error, Result};
use crate::reductions::{LeakyAdversary, Selection, Selector};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilySource {
    File { file: PathBuf },
    Inline(FamilyJson),
}

/// Index set (1-based) or the string `"bottom"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SelectorEntry {
    Indices(Vec<usize>),
    Word(String),
}

/// Keys are the concatenated leaks of earlier rounds as a bitstring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectorTable {
    pub size: usize,
    #[serde(default)]
    pub table: BTreeMap<String, SelectorEntry>,
    pub default: SelectorEntry,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdversarySpec {
    Identity,
    /// Every output constant `fill`.
    Constant { fill: bool },
    /// A fixed word drawn from `seed`.
    RandomConstant { seed: u64 },
    /// Negates the listed positions.
    Flip { positions: Vec<usize> },
    /// Output `j` is a random function of position `j` and `locality − 1` random others.
    RandomLocal { locality: usize, seed: u64 },
    /// Leaks position `probe`; when it is 1, negates `positions`, otherwise copies.
    AdaptiveFlip { probe: usize, positions: Vec<usize> },
    Table { family: FamilySource, rounds: Vec<SelectorTable>, output: SelectorTable },
}

fn zero_based(idx: &[usize], bound: usize, what: &str) -> Result<Vec<usize>> {
    idx.iter()
        .map(|&i| {
            if i == 0 || i > bound {
                Err(Error::Config(format!("{}: index {} outside 1..={}", what, i, bound)))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

fn resolve(entry: &SelectorEntry, size: usize, n_funcs: usize, what: &str) -> Result<Selection> {
    match entry {
        SelectorEntry::Word(w) if w == "bottom" => Ok(Selection::Bottom),
        SelectorEntry::Word(w) => Err(Error::Config(format!("{}: unknown entry {:?}", what, w))),
        SelectorEntry::Indices(idx) => {
            if idx.len() != size {
                return Err(Error::SelectorViolation(format!("{} lists {} indices, size is {}", what, idx.len(), size)));
            }
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::SelectorViolation(format!("{} is not strictly increasing", what)));
            }
            Ok(Selection::Indices(zero_based(idx, n_funcs, what)?))
        }
    }
}

fn table_selector(t: &SelectorTable, key_len: usize, n_funcs: usize, what: &str) -> Result<Selector> {
    let mut map = BTreeMap::new();
    for (k, e) in &t.table {
        if k.len() != key_len || !k.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Config(format!("{}: key {:?} is not a {}-bit transcript", what, k, key_len)));
        }
        map.insert(k.clone(), resolve(e, t.size, n_funcs, &format!("{} entry {}", what, k))?);
    }
    let default = resolve(&t.default, t.size, n_funcs, &format!("{} default", what))?;
    Ok(Selector::new(t.size, move |ys: &[BitVec]| {
        let key: String = ys.iter().map(|y| y.to_string()).collect();
        map.get(&key).unwrap_or(&default).clone()
    }))
}

fn projections(n: usize) -> Vec<BoolFn> {
    (0..n).map(|i| BoolFn::Local(LocalFn::projection(i))).collect()
}

impl AdversarySpec {
    /// A leaky adversary mapping `n` bits to `n` bits. Relative family
    /// files are read from `base`.
    pub fn build(&self, n: usize, base: Option<&Path>) -> Result<LeakyAdversary> {
        let plain = |funcs: Vec<BoolFn>| -> Result<LeakyAdversary> { Ok(LeakyAdversary::plain(FunctionFamily::new(n, funcs)?, n)) };
        match self {
            AdversarySpec::Identity => plain(projections(n)),
            AdversarySpec::Constant { fill } => plain(vec![BoolFn::Local(LocalFn::constant(*fill)); n]),
            AdversarySpec::RandomConstant { seed } => {
                let w = BitVec::random(n, &mut ChaCha8Rng::seed_from_u64(*seed));
                plain(w.iter().map(|b| BoolFn::Local(LocalFn::constant(b))).collect())
            }
            AdversarySpec::Flip { positions } => {
                let mut funcs = projections(n);
                for i in zero_based(positions, n, "flip")? {
                    funcs[i] = BoolFn::Local(LocalFn::negation(i));
                }
                plain(funcs)
            }
            AdversarySpec::RandomLocal { locality, seed } => {
                if *locality == 0 || *locality > n {
                    return Err(Error::Config(format!("locality {} for {} inputs", locality, n)));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let funcs = (0..n)
                    .map(|j| {
                        let mut deps = vec![j];
                        while deps.len() < *locality {
                            let d = rng.gen_range(0..n);
                            if !deps.contains(&d) {
                                deps.push(d);
                            }
                        }
                        let table = BitVec::random(1 << locality, &mut rng);
                        LocalFn::new(deps, table).map(BoolFn::Local)
                    })
                    .collect::<Result<Vec<_>>>()?;
                plain(funcs)
            }
            AdversarySpec::AdaptiveFlip { probe, positions } => {
                // Outputs 2i and 2i + 1 are input i and its negation, so every
                // selection stays increasing.
                let probe = zero_based(&[*probe], n, "probe")?[0];
                let funcs = (0..n)
                    .flat_map(|i| [BoolFn::Local(LocalFn::projection(i)), BoolFn::Local(LocalFn::negation(i))])
                    .collect();
                let flipped = zero_based(positions, n, "flip")?;
                let out = Selector::new(n, move |ys: &[BitVec]| {
                    let on = ys[0].get(0);
                    Selection::Indices((0..n).map(|i| 2 * i + (on && flipped.contains(&i)) as usize).collect())
                });
                Ok(LeakyAdversary::new(FunctionFamily::new(n, funcs)?, vec![Selector::fixed(vec![2 * probe])], out))
            }
            AdversarySpec::Table { family, rounds, output } => {
                let fam = match family {
                    FamilySource::Inline(j) => family_from_json(j)?,
                    FamilySource::File { file } => {
                        let path = match base {
                            Some(b) if file.is_relative() => b.join(file),
                            _ => file.clone(),
                        };
                        load_family(&path)?
                    }
                };
                if fam.n_inputs != n {
                    return Err(Error::Config(format!("family reads {} inputs, codeword has {}", fam.n_inputs, n)));
                }
                if output.size != n {
                    return Err(Error::Config(format!("output selector has size {}, codeword has {}", output.size, n)));
                }
                let mut sels = Vec::with_capacity(rounds.len());
                let mut key_len = 0;
                for (j, r) in rounds.iter().enumerate() {
                    sels.push(table_selector(r, key_len, fam.len(), &format!("round {}", j + 1))?);
                    key_len += r.size;
                }
                let out = table_selector(output, key_len, fam.len(), "output")?;
                Ok(LeakyAdversary::new(fam, sels, out))
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            AdversarySpec::Identity => "identity".into(),
            AdversarySpec::Constant { fill } => format!("constant-{}", *fill as u8),
            AdversarySpec::RandomConstant { seed } => format!("random-constant-{}", seed),
            AdversarySpec::Flip { positions } => format!("flip-{}", positions.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("+")),
            AdversarySpec::RandomLocal { locality, seed } => format!("random-{}-local-{}", locality, seed),
            AdversarySpec::AdaptiveFlip { probe, .. } => format!("adaptive-flip-probe-{}", probe),
            AdversarySpec::Table { .. } => "table".into(),
        }
    }
}

/// Identity, three constants, five single-position flips, ten random
/// 2-local functions and one adaptive adversary leaking one bit.
pub fn standard_suite(n: usize, seed: u64) -> Vec<AdversarySpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut suite = vec![
        AdversarySpec::Identity,
        AdversarySpec::Constant { fill: false },
        AdversarySpec::Constant { fill: true },
        AdversarySpec::RandomConstant { seed: rng.gen() },
    ];
    for _ in 0..5 {
        suite.push(AdversarySpec::Flip { positions: vec![rng.gen_range(1..=n)] });
    }
    for _ in 0..10 {
        suite.push(AdversarySpec::RandomLocal { locality: 2, seed: rng.gen() });
    }
    let probe = rng.gen_range(1..=n);
    let mut positions: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=n)).collect();
    positions.sort_unstable();
    positions.dedup();
    suite.push(AdversarySpec::AdaptiveFlip { probe, positions });
    suite
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_behave() {
        let x: BitVec = "1100".parse().unwrap();
        let id = AdversarySpec::Identity.build(4, None).unwrap();
        assert_eq!(id.eval(&x).unwrap().unwrap(), x);
        let flip = AdversarySpec::Flip { positions: vec![1, 4] }.build(4, None).unwrap();
        assert_eq!(flip.eval(&x).unwrap().unwrap().to_string(), "0101");
        let c = AdversarySpec::Constant { fill: true }.build(4, None).unwrap();
        assert_eq!(c.eval(&x).unwrap().unwrap(), BitVec::ones(4));
        let a = AdversarySpec::AdaptiveFlip { probe: 1, positions: vec![2] }.build(4, None).unwrap();
        assert_eq!(a.eval(&x).unwrap().unwrap().to_string(), "1000");
        assert_eq!(a.eval(&"0100".parse().unwrap()).unwrap().unwrap().to_string(), "0100");
        assert_eq!(standard_suite(50, 1).len(), 20);
    }

    #[test]
    fn table_adversary_from_json() {
        let json = r#"{
            "kind": "table",
            "family": {"n": 2, "functions": [
                {"local": {"deps": [1], "table": "01"}},
                {"local": {"deps": [2], "table": "01"}},
                {"local": {"deps": [1], "table": "10"}}
            ]},
            "rounds": [{"size": 1, "default": [1]}],
            "output": {"size": 2, "table": {"1": [2, 3], "0": "bottom"}, "default": [1, 2]}
        }"#;
        let spec: AdversarySpec = serde_json::from_str(json).unwrap();
        let adv = spec.build(2, None).unwrap();
        assert_eq!(adv.eval(&"10".parse().unwrap()).unwrap().unwrap().to_string(), "00");
        assert_eq!(adv.eval(&"01".parse().unwrap()).unwrap(), None);
    }

    #[test]
    fn table_validation() {
        let bad = SelectorTable { size: 2, table: BTreeMap::new(), default: SelectorEntry::Indices(vec![2, 1]) };
        assert!(matches!(table_selector(&bad, 0, 3, "output"), Err(Error::SelectorViolation(_))));
        let mut keyed = BTreeMap::new();
        keyed.insert("01".to_string(), SelectorEntry::Indices(vec![1]));
        let wrong_key = SelectorTable { size: 1, table: keyed, default: SelectorEntry::Indices(vec![1]) };
        assert!(matches!(table_selector(&wrong_key, 1, 3, "round 2"), Err(Error::Config(_))));
    }
}
