//! Outcome tables over `{0,1}^k ∪ {⊥}` and distances between them.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};

/// A decoded message or `⊥`.
pub type Outcome = Option<BitVec>;

const BOTTOM: &str = "⊥";

/// Outcome counts. Exact tables come from full enumeration and `total` is
/// the size of the randomness space; otherwise `total` is the trial count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionTable {
    pub msg_len: usize,
    #[serde(serialize_with = "ser_counts", deserialize_with = "de_counts")]
    pub counts: BTreeMap<Outcome, u64>,
    pub total: u64,
    pub exact: bool,
}

fn ser_counts<S: Serializer>(counts: &BTreeMap<Outcome, u64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let named: BTreeMap<String, u64> = counts.iter().map(|(o, c)| (outcome_label(o), *c)).collect();
    named.serialize(s)
}

fn de_counts<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Outcome, u64>, D::Error> {
    let named = BTreeMap::<String, u64>::deserialize(d)?;
    named
        .into_iter()
        .map(|(k, c)| {
            if k == BOTTOM {
                Ok((None, c))
            } else {
                k.parse::<BitVec>().map(|v| (Some(v), c)).map_err(serde::de::Error::custom)
            }
        })
        .collect()
}

pub fn outcome_label(o: &Outcome) -> String {
    match o {
        None => BOTTOM.to_string(),
        Some(v) => v.to_string(),
    }
}

impl DistributionTable {
    pub fn new(msg_len: usize, exact: bool) -> Self {
        DistributionTable { msg_len, counts: BTreeMap::new(), total: 0, exact }
    }

    pub fn record(&mut self, o: Outcome) {
        *self.counts.entry(o).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn from_outcomes(msg_len: usize, exact: bool, outcomes: impl IntoIterator<Item = Outcome>) -> Self {
        let mut t = Self::new(msg_len, exact);
        for o in outcomes {
            t.record(o);
        }
        t
    }

    /// Order-independent merge of two partial tables.
    pub fn merge(mut self, other: DistributionTable) -> Self {
        for (o, c) in other.counts {
            *self.counts.entry(o).or_insert(0) += c;
        }
        self.total += other.total;
        self.exact &= other.exact;
        self
    }

    pub fn probability(&self, o: &Outcome) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        *self.counts.get(o).unwrap_or(&0) as f64 / self.total as f64
    }

    pub fn bottom_rate(&self) -> f64 {
        self.probability(&None)
    }

    /// Outcomes with nonzero count.
    pub fn support_size(&self) -> usize {
        self.counts.values().filter(|&&c| c > 0).count()
    }
}

/// `½ Σ_z |D₁(z) − D₂(z)|`.
pub fn stat_distance(a: &DistributionTable, b: &DistributionTable) -> Result<f64> {
    let (num, den) = exact_distance(a, b)?;
    Ok(num as f64 / den as f64)
}

/// The distance as `num / den` with `den = 2·total_a·total_b`.
pub fn exact_distance(a: &DistributionTable, b: &DistributionTable) -> Result<(u128, u128)> {
    if a.msg_len != b.msg_len {
        return Err(Error::SpaceMismatch);
    }
    if a.total == 0 || b.total == 0 {
        return Err(Error::Config("distance of an empty table".into()));
    }
    let (ta, tb) = (a.total as u128, b.total as u128);
    let mut num = 0u128;
    for o in a.counts.keys().chain(b.counts.keys().filter(|o| !a.counts.contains_key(*o))) {
        let x = *a.counts.get(o).unwrap_or(&0) as u128 * tb;
        let y = *b.counts.get(o).unwrap_or(&0) as u128 * ta;
        num += x.abs_diff(y);
    }
    Ok((num, 2 * ta * tb))
}

/// Deviation of an empirical distribution over `outcomes` values from the
/// truth in total variation, holding with probability `1 − alpha`:
/// `½√(K/N) + √(ln(1/α)/(2N))`.
pub fn tv_margin(outcomes: usize, trials: u64, alpha: f64) -> f64 {
    let n = trials as f64;
    ((outcomes as f64 / n).sqrt() + (2.0 * (1.0 / alpha).ln() / n).sqrt()) / 2.0
}

/// One-sided Hoeffding upper confidence bound for a frequency.
pub fn hoeffding_upper(freq: f64, trials: u64, alpha: f64) -> f64 {
    freq + ((1.0 / alpha).ln() / (2.0 * trials as f64)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bit(b: bool) -> Outcome {
        Some(BitVec::from_bools(&[b]))
    }

    #[test]
    fn distances() {
        let half = DistributionTable::from_outcomes(1, true, [bit(false), bit(true)]);
        let zero = DistributionTable::from_outcomes(1, true, [bit(false)]);
        let one = DistributionTable::from_outcomes(1, true, [bit(true), bit(true)]);
        assert_eq!(stat_distance(&half, &half).unwrap(), 0.0);
        assert_eq!(stat_distance(&zero, &one).unwrap(), 1.0);
        assert_eq!(stat_distance(&half, &zero).unwrap(), 0.5);
        assert_eq!(exact_distance(&half, &zero).unwrap(), (2, 4));
        let other = DistributionTable::from_outcomes(2, true, [None]);
        assert!(matches!(stat_distance(&half, &other), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn json_roundtrip_with_bottom() {
        let t = DistributionTable::from_outcomes(2, false, [None, Some("01".parse().unwrap()), None]);
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"⊥\":2"));
        let back: DistributionTable = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn margins_shrink() {
        assert!(tv_margin(5, 10_000, 0.05) < tv_margin(5, 100, 0.05));
        assert!((hoeffding_upper(0.0, 100_000, 0.05) - 0.00387).abs() < 1e-4);
    }
}
