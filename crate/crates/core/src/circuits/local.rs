use crate::bitlinalg::BitVec;
use crate::circuits::table::{TruthTable, MAX_TABLE_VARS};
use crate::error::{Error, Result};
use crate::restrictions::Restriction;

/// Output bit that reads only `deps`; `table[idx]` is the value where `deps[b]`
/// equals bit `b` of `idx`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalFn {
    pub deps: Vec<usize>,
    pub table: BitVec,
}

impl LocalFn {
    pub fn new(deps: Vec<usize>, table: BitVec) -> Result<Self> {
        if deps.len() > MAX_TABLE_VARS {
            return Err(Error::RegimeTooLarge(format!("local function with {} inputs", deps.len())));
        }
        if table.len() != 1 << deps.len() {
            return Err(Error::DimensionMismatch(format!(
                "table of {} entries for {} dependencies",
                table.len(),
                deps.len()
            )));
        }
        let mut sorted = deps.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != deps.len() {
            return Err(Error::Parse(format!("duplicate dependency in {:?}", deps)));
        }
        Ok(LocalFn { deps, table })
    }

    pub fn constant(b: bool) -> Self {
        LocalFn { deps: vec![], table: if b { BitVec::ones(1) } else { BitVec::zeros(1) } }
    }

    /// Copy of input `i`.
    pub fn projection(i: usize) -> Self {
        LocalFn { deps: vec![i], table: "01".parse().expect("literal") }
    }

    pub fn negation(i: usize) -> Self {
        LocalFn { deps: vec![i], table: "10".parse().expect("literal") }
    }

    pub fn tabulate(deps: Vec<usize>, f: impl Fn(&BitVec) -> bool) -> Result<Self> {
        let n = deps.iter().max().map_or(0, |&m| m + 1);
        let t = TruthTable::from_fn(n, deps, f)?;
        LocalFn::new(t.vars, t.bits)
    }

    pub fn eval(&self, x: &BitVec) -> bool {
        let idx = self.deps.iter().enumerate().fold(0usize, |acc, (b, &v)| acc | ((x.get(v) as usize) << b));
        self.table.get(idx)
    }

    pub fn truth_table(&self) -> TruthTable {
        TruthTable { vars: self.deps.clone(), bits: self.table.clone() }
    }

    pub fn restrict(&self, rho: &Restriction) -> LocalFn {
        let mut t = self.truth_table();
        let mut b = 0;
        while b < t.vars.len() {
            let v = t.vars[b];
            if rho.rho1.get(v) {
                b += 1;
            } else {
                t = t.cofactor(b, rho.rho2.get(v));
            }
        }
        LocalFn { deps: t.vars, table: t.bits }
    }

    pub fn rename(&self, map: &dyn Fn(usize) -> usize) -> LocalFn {
        LocalFn { deps: self.deps.iter().map(|&v| map(v)).collect(), table: self.table.clone() }
    }

    /// Drops dependencies the table ignores.
    pub fn reduce(&self) -> LocalFn {
        let t = self.truth_table().reduce();
        LocalFn { deps: t.vars, table: t.bits }
    }
}
