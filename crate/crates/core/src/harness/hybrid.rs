//! Shared-randomness replay of the split-state reduction's hybrids.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::nm::{all_messages, bad_total, count_stage, join, ss_params, Acc};
use crate::harness::{hoeffding_upper, par_fold, stat_distance, trial_rng, tv_margin, ExperimentConfig, Mode, Report, Target, Verdict};
use crate::nmcpipeline::Coder;

/// Coupled pairs whose outputs must agree on every trial.
pub const COUPLED_PAIRS: [(usize, usize); 3] = [(1, 2), (2, 3), (3, 4)];

#[derive(Clone, Debug, Serialize)]
pub struct HybridResult {
    pub adversary: String,
    pub trials: u64,
    /// Keyed `"H1-H2"` and so on; counted over trials and messages.
    pub mismatches: BTreeMap<String, u64>,
    /// Maximum over messages.
    pub h0_h1: f64,
    /// `H2` with the uncoupled right sampler against `H3`.
    pub uncoupled_h2_h3: f64,
    pub events: BTreeMap<String, u64>,
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HybridReport {
    pub config: ExperimentConfig,
    pub coder: String,
    /// `exp(−σ/2 + 1)`.
    pub sigma_bound: f64,
    pub results: Vec<HybridResult>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

impl Report for HybridReport {
    fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    fn csv_header(&self) -> Vec<String> {
        ["adversary", "trials", "h1_h2", "h2_h3", "h3_h4", "h0_h1", "uncoupled_h2_h3", "bad", "margin"].map(String::from).to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.results
            .iter()
            .map(|r| {
                let mut row = vec![r.adversary.clone(), r.trials.to_string()];
                row.extend(COUPLED_PAIRS.iter().map(|(a, b)| r.mismatches[&pair_name(*a, *b)].to_string()));
                let bad: u64 = r.events.iter().filter(|(e, _)| e.starts_with("bad-")).map(|(_, c)| c).sum();
                row.extend([r.h0_h1.to_string(), r.uncoupled_h2_h3.to_string(), bad.to_string(), r.margin.to_string()]);
                row
            })
            .collect()
    }
}

fn pair_name(a: usize, b: usize) -> String {
    format!("H{}-H{}", a, b)
}

// Series per message: H0, H1, uncoupled H2, H3.
const H0: usize = 0;
const H1: usize = 1;
const H2_UNCOUPLED: usize = 2;
const H3: usize = 3;

pub fn run_hybrid_replay(cfg: &ExperimentConfig) -> Result<HybridReport> {
    let Target::SsReduction(st) = &cfg.target else {
        return Err(Error::Config("hybrid replay needs an ss-reduction target".into()));
    };
    let Mode::Montecarlo { trials } = cfg.mode else {
        return Err(Error::RegimeTooLarge(format!("split-state experiments draw more than {} randomness bits", crate::harness::EXHAUSTIVE_BITS)));
    };
    let pp = ss_params(st.preset)?;
    let msgs = all_messages(2 * pp.k)?;
    let specs = cfg.adversary_specs(pp.n());
    if specs.is_empty() {
        return Err(Error::Config("no adversaries configured".into()));
    }
    let margin = 2.0 * tv_margin(msgs.len() + 1, trials, cfg.alpha);
    let sigma_bound = (-(pp.sigma as f64) / 2.0 + 1.0).exp();
    let mut results = Vec::new();
    let mut verdicts = Vec::new();
    for (cell, spec) in specs.iter().enumerate() {
        let label = spec.label();
        let adv = spec.build(pp.n(), cfg.base_dir.as_deref())?;
        let acc = par_fold(
            trials,
            || Acc::new(msgs.len(), 4, 2 * pp.k, false),
            |acc, i| {
                let mut rng = trial_rng(cfg.master_seed, cell as u64, i);
                let coins = pp.coins(&mut rng);
                for (j, x) in msgs.iter().enumerate() {
                    let real = pp.random(&mut rng);
                    let rep = pp.replay(&adv, &x.slice(0, pp.k), &x.slice(pp.k, 2 * pp.k), &coins, &real)?;
                    if j == 0 {
                        count_stage(acc, rep.stage, rep.fell_back);
                    }
                    for (a, b) in COUPLED_PAIRS {
                        if rep.outcomes[a] != rep.outcomes[b] {
                            acc.count(&pair_name(a, b));
                        }
                    }
                    let [o0, o1, _, o3, _] = rep.outcomes;
                    let tabs = &mut acc.tables[j];
                    tabs[H0].record(join(o0));
                    tabs[H1].record(join(o1));
                    tabs[H2_UNCOUPLED].record(join(rep.uncoupled_h2));
                    tabs[H3].record(join(o3));
                }
                Ok(())
            },
            Acc::merge,
        )?;
        let mut h0_h1: f64 = 0.0;
        let mut uncoupled_h2_h3: f64 = 0.0;
        for tabs in &acc.tables {
            h0_h1 = h0_h1.max(stat_distance(&tabs[H0], &tabs[H1])?);
            uncoupled_h2_h3 = uncoupled_h2_h3.max(stat_distance(&tabs[H2_UNCOUPLED], &tabs[H3])?);
        }
        let mismatches: BTreeMap<String, u64> = COUPLED_PAIRS.iter().map(|(a, b)| (pair_name(*a, *b), acc.events_of(&pair_name(*a, *b)))).collect();
        for (pair, c) in &mismatches {
            verdicts.push(Verdict::new(format!("{}: {} mismatches", label, pair), *c == 0, format!("{} over {} trials", c, trials)));
        }
        verdicts.push(Verdict::new(
            format!("{}: Δ(H0, H1) ≤ exp(−σ/2+1) + MC error", label),
            h0_h1 <= sigma_bound + margin,
            format!("{} ≤ {}{}", h0_h1, sigma_bound + margin, if sigma_bound >= 1.0 { " (vacuous)" } else { "" }),
        ));
        let bad_upper = hoeffding_upper(bad_total(&acc) as f64 / trials as f64, trials, cfg.alpha);
        verdicts.push(Verdict::new(
            format!("{}: Δ(H0, H1) ≤ Pr[bad] + MC error", label),
            h0_h1 <= bad_upper + margin,
            format!("{} ≤ {}", h0_h1, bad_upper + margin),
        ));
        results.push(HybridResult { adversary: label, trials, mismatches, h0_h1, uncoupled_h2_h3, events: acc.events.clone(), margin });
    }
    let passed = verdicts.iter().all(|v| v.holds);
    Ok(HybridReport { config: cfg.clone(), coder: Coder::describe(&pp), sigma_bound, results, verdicts, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::adversary::AdversarySpec;
    use crate::harness::SsTarget;
    use crate::nmcpipeline::SsPreset;

    #[test]
    fn coupled_hybrids_never_disagree() {
        let cfg = ExperimentConfig {
            master_seed: 9,
            mode: Mode::Montecarlo { trials: 500 },
            target: Target::SsReduction(SsTarget { preset: SsPreset::Desk }),
            adversaries: vec![AdversarySpec::Identity, AdversarySpec::RandomLocal { locality: 2, seed: 4 }, AdversarySpec::Flip { positions: vec![1, 20, 40] }],
            standard_suite: false,
            alpha: 0.05,
            output: None,
            base_dir: None,
        };
        let r = run_hybrid_replay(&cfg).unwrap();
        for res in &r.results {
            assert!(res.mismatches.values().all(|&c| c == 0), "{:?}", res);
        }
        assert!(r.sigma_bound > 1.0);
    }
}
