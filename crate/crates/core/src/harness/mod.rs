//! Experiment runner: configs, per-trial streams, verdicts and the
//! switching, tampering and hybrid experiments.

pub mod adversary;
pub mod dist;
pub mod hybrid;
pub mod nm;
pub mod switching;

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::CollapseMode;
use crate::error::{Error, Result};
use crate::nmcpipeline::{PipelineSpec, SsPreset};
use crate::reductions::DecodeRule;

pub use adversary::{standard_suite, AdversarySpec};
pub use dist::{exact_distance, hoeffding_upper, stat_distance, tv_margin, DistributionTable, Outcome};
pub use hybrid::{run_hybrid_replay, HybridReport};
pub use nm::{run_nm_experiment, NmReport};
pub use switching::{run_switching_experiment, SwitchingReport};

/// Largest randomness space enumerated in exact mode.
pub const EXHAUSTIVE_BITS: usize = 24;

pub const DEFAULT_TRIALS: u64 = 100_000;

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Montecarlo {
        #[serde(default = "default_trials")]
        trials: u64,
    },
}

/// Where a switching experiment's circuits come from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilySpec {
    File(PathBuf),
    Inline(crate::circuits::json::FamilyJson),
    /// `m` random DNFs with `terms` terms of `width` distinct literals over `n` inputs.
    RandomDnf { m: usize, terms: usize, width: usize, n: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceSpec {
    Uniform,
    /// Carter-Wegman generator with this independence.
    Cw { sigma: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SwitchingTarget {
    pub family: FamilySpec,
    pub w: usize,
    pub t: usize,
    pub p_log_inv: usize,
    #[serde(default)]
    pub delta: f64,
    pub source: SourceSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarTarget {
    pub k: usize,
    pub n: usize,
    pub p_log_inv: usize,
    pub sigma: usize,
    pub t: usize,
    pub collapse: CollapseMode,
    #[serde(default)]
    pub rule: DecodeRule,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SsTarget {
    pub preset: SsPreset,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Target {
    Switching(SwitchingTarget),
    StarReduction(StarTarget),
    SsReduction(SsTarget),
    Pipeline(PipelineSpec),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub mode: Mode,
    pub target: Target,
    #[serde(default)]
    pub adversaries: Vec<AdversarySpec>,
    /// Append the twenty built-in adversaries.
    #[serde(default)]
    pub standard_suite: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Directory for relative file references; not serialized.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    /// Explicit adversaries followed by the standard suite when requested.
    pub fn adversary_specs(&self, n: usize) -> Vec<AdversarySpec> {
        let mut v = self.adversaries.clone();
        if self.standard_suite {
            v.extend(standard_suite(n, self.master_seed));
        }
        v
    }
}

/// Refuses exact mode beyond `EXHAUSTIVE_BITS`.
pub fn check_exhaustive(bits: usize) -> Result<()> {
    if bits > EXHAUSTIVE_BITS {
        return Err(Error::RegimeTooLarge(format!(
            "exact mode needs {} randomness bits, the limit is {}",
            bits, EXHAUSTIVE_BITS
        )));
    }
    Ok(())
}

/// The stream of trial `trial` in cell `cell`: ChaCha8 keyed by the master
/// seed, on stream number `cell·2^32 + trial`.
pub fn trial_rng(master_seed: u64, cell: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((cell << 32) | (trial & 0xffff_ffff));
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, holds: bool, detail: impl Into<String>) -> Self {
        Verdict { name: name.into(), holds, detail: detail.into() }
    }
}

/// Common surface of every report: JSON, flat CSV and overall verdict.
pub trait Report: Serialize {
    fn verdicts(&self) -> &[Verdict];
    fn csv_header(&self) -> Vec<String>;
    fn csv_rows(&self) -> Vec<Vec<String>>;

    fn passed(&self) -> bool {
        self.verdicts().iter().all(|v| v.holds)
    }

    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        out.write_record(self.csv_header()).map_err(io)?;
        for row in self.csv_rows() {
            out.write_record(row).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Folds per-trial results in parallel; the fold is associative so the
/// result does not depend on scheduling.
pub(crate) fn par_fold<A, F, M>(trials: u64, init: impl Fn() -> A + Sync + Send, f: F, merge: M) -> Result<A>
where
    A: Send,
    F: Fn(&mut A, u64) -> Result<()> + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    use rayon::prelude::*;
    (0..trials)
        .into_par_iter()
        .fold(
            || Ok(init()),
            |acc: Result<A>, i| {
                let mut a = acc?;
                f(&mut a, i)?;
                Ok(a)
            },
        )
        .reduce(|| Ok(init()), |a, b| Ok(merge(a?, b?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = trial_rng(7, 1, 3).next_u64();
        assert_eq!(a, trial_rng(7, 1, 3).next_u64());
        assert_ne!(a, trial_rng(7, 1, 4).next_u64());
        assert_ne!(a, trial_rng(7, 2, 3).next_u64());
        assert_ne!(a, trial_rng(8, 1, 3).next_u64());
    }

    #[test]
    fn config_parses() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"master_seed": 1, "mode": {"montecarlo": {"trials": 10}},
                "target": {"kind": "ss-reduction", "preset": "desk"},
                "adversaries": [{"kind": "identity"}], "standard_suite": true}"#,
        )
        .unwrap();
        assert_eq!(cfg.mode, Mode::Montecarlo { trials: 10 });
        assert_eq!(cfg.adversary_specs(59).len(), 21);
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"master_seed": 1, "mode": "exhaustive", "target": {"kind": "pipeline", "toy_k": 1, "ss": "two-bit", "depth": 2, "p_log_inv": 1, "sigma": 1, "t": 2}}"#)
                .unwrap();
        assert!(matches!(cfg.target, Target::Pipeline(_)));
        assert!(check_exhaustive(25).is_err());
    }
}
