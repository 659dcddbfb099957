//! Real-versus-simulated tampering experiments for the star reduction, the
//! split-state reduction and the assembled pipeline.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::RngCore;
use serde::Serialize;

use crate::bitlinalg::BitVec;
use crate::error::{Error, Result};
use crate::harness::{
    check_exhaustive, exact_distance, hoeffding_upper, par_fold, stat_distance, trial_rng, tv_margin, DistributionTable, ExperimentConfig, Mode,
    Outcome, Report, Target, Verdict,
};
use crate::nmcpipeline::{build_acd_nmc, compose, toy_ss_nmc, AcdNmc, Coder, SsPreset};
use crate::reductions::splitstate::{SsOutcome, Stage};
use crate::reductions::{LeakyAdversary, SplitStateParams, StarParams, Tampering};

/// Messages are enumerated in full, so their length is capped.
pub const MAX_MESSAGE_BITS: usize = 8;

pub fn all_messages(len: usize) -> Result<Vec<BitVec>> {
    if len > MAX_MESSAGE_BITS {
        return Err(Error::RegimeTooLarge(format!("{} message bits, the limit is {}", len, MAX_MESSAGE_BITS)));
    }
    Ok((0..1u64 << len).map(|x| BitVec::from_u64(x, len)).collect())
}

pub(crate) fn ss_params(preset: SsPreset) -> Result<SplitStateParams> {
    match preset {
        SsPreset::Desk => SplitStateParams::desk(),
        SsPreset::TwoBit => SplitStateParams::two_bit(crate::reductions::AdversaryBudget { q: 1, m: 1, ell: 2 }),
    }
}

pub(crate) fn join(o: SsOutcome) -> Outcome {
    o.map(|(l, r)| BitVec::concat(&[&l, &r]))
}

/// Per-trial accumulator: one table per (message, series), event counts.
#[derive(Clone, Debug)]
pub(crate) struct Acc {
    pub tables: Vec<Vec<DistributionTable>>,
    pub events: BTreeMap<String, u64>,
}

impl Acc {
    pub fn new(messages: usize, series: usize, msg_len: usize, exact: bool) -> Self {
        Acc { tables: vec![vec![DistributionTable::new(msg_len, exact); series]; messages], events: BTreeMap::new() }
    }

    pub fn count(&mut self, event: &str) {
        *self.events.entry(event.to_string()).or_insert(0) += 1;
    }

    pub fn merge(mut self, other: Acc) -> Acc {
        for (mine, theirs) in self.tables.iter_mut().zip(other.tables) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a = std::mem::replace(a, DistributionTable::new(0, true)).merge(b);
            }
        }
        for (e, c) in other.events {
            *self.events.entry(e).or_insert(0) += c;
        }
        self
    }

    pub fn events_of(&self, e: &str) -> u64 {
        *self.events.get(e).unwrap_or(&0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MessageCell {
    pub message: String,
    pub tables: BTreeMap<String, DistributionTable>,
    /// Keyed `"a-b"` for series `a` and `b`.
    pub distances: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdversaryResult {
    pub adversary: String,
    pub trials: u64,
    pub cells: Vec<MessageCell>,
    /// Maximum over messages, per pair of series.
    pub max_distance: BTreeMap<String, f64>,
    pub events: BTreeMap<String, u64>,
    /// Two-table Monte Carlo error (zero in exact mode).
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NmReport {
    pub config: ExperimentConfig,
    pub coder: String,
    pub results: Vec<AdversaryResult>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

impl Report for NmReport {
    fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    fn csv_header(&self) -> Vec<String> {
        ["adversary", "message", "pair", "distance", "margin"].map(String::from).to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for r in &self.results {
            for c in &r.cells {
                for (pair, d) in &c.distances {
                    rows.push(vec![r.adversary.clone(), c.message.clone(), pair.clone(), d.to_string(), r.margin.to_string()]);
                }
            }
        }
        rows
    }
}

const SERIES_2: [&str; 2] = ["real", "sim"];
const SERIES_3: [&str; 3] = ["real", "mid", "sim"];

fn summarize(label: String, messages: &[BitVec], series: &[&str], acc: &Acc, trials: u64, margin: f64) -> Result<AdversaryResult> {
    let mut cells = Vec::with_capacity(messages.len());
    let mut max_distance: BTreeMap<String, f64> = BTreeMap::new();
    for (x, tabs) in messages.iter().zip(&acc.tables) {
        let mut distances = BTreeMap::new();
        for i in 0..series.len() {
            for j in i + 1..series.len() {
                let key = format!("{}-{}", series[i], series[j]);
                let d = stat_distance(&tabs[i], &tabs[j])?;
                let m = max_distance.entry(key.clone()).or_insert(0.0);
                *m = m.max(d);
                distances.insert(key, d);
            }
        }
        let tables = series.iter().map(|s| s.to_string()).zip(tabs.iter().cloned()).collect();
        cells.push(MessageCell { message: x.to_string(), tables, distances });
    }
    Ok(AdversaryResult { adversary: label, trials, cells, max_distance, events: acc.events.clone(), margin })
}

fn trials_of(mode: Mode, randomness_bits: usize) -> Result<(u64, bool)> {
    match mode {
        Mode::Exhaustive => {
            check_exhaustive(randomness_bits)?;
            Ok((1u64 << randomness_bits, true))
        }
        Mode::Montecarlo { trials } => Ok((trials, false)),
    }
}

fn upper(count: u64, trials: u64, alpha: f64) -> f64 {
    hoeffding_upper(count as f64 / trials as f64, trials, alpha)
}

pub fn run_nm_experiment(cfg: &ExperimentConfig) -> Result<NmReport> {
    let (coder, results, verdicts) = match &cfg.target {
        Target::StarReduction(st) => {
            let mut pp = StarParams::with_default_code(st.k, st.n, st.p_log_inv, st.sigma, false)?;
            pp.rule = st.rule;
            let (r, v) = star_experiment(cfg, &pp, st.t, st.collapse)?;
            (Coder::describe(&pp), r, v)
        }
        Target::SsReduction(st) => {
            let pp = ss_params(st.preset)?;
            let (r, v) = ss_experiment(cfg, &pp)?;
            (Coder::describe(&pp), r, v)
        }
        Target::Pipeline(spec) => {
            let acd = build_acd_nmc(spec, toy_ss_nmc(spec.toy_k)?)?;
            let (r, v) = pipeline_experiment(cfg, &acd)?;
            (acd.describe(), r, v)
        }
        Target::Switching(_) => return Err(Error::Config("nm experiment needs a star-reduction, ss-reduction or pipeline target".into())),
    };
    let passed = verdicts.iter().all(|v| v.holds);
    Ok(NmReport { config: cfg.clone(), coder, results, verdicts, passed })
}

fn adversaries(cfg: &ExperimentConfig, n: usize) -> Result<Vec<(String, LeakyAdversary)>> {
    let specs = cfg.adversary_specs(n);
    if specs.is_empty() {
        return Err(Error::Config("no adversaries configured".into()));
    }
    specs.iter().map(|s| Ok((s.label(), s.build(n, cfg.base_dir.as_deref())?))).collect()
}

/// Real and simulated runs share all randomness; "good" randomness is where
/// the restricted family collapses.
fn star_experiment(
    cfg: &ExperimentConfig,
    pp: &StarParams,
    t: usize,
    collapse: crate::circuits::CollapseMode,
) -> Result<(Vec<AdversaryResult>, Vec<Verdict>)> {
    let msgs = all_messages(pp.k)?;
    let (trials, exact) = trials_of(cfg.mode, pp.randomness_len())?;
    let mut results = Vec::new();
    let mut verdicts = Vec::new();
    for (cell, (label, adv)) in adversaries(cfg, pp.n)?.into_iter().enumerate() {
        let acc = par_fold(
            trials,
            || Acc::new(msgs.len(), 2, pp.k, exact),
            |acc, i| {
                let rnd = if exact {
                    pp.randomness_from_bits(&BitVec::from_u64(i, pp.randomness_len()))?
                } else {
                    pp.random(&mut trial_rng(cfg.master_seed, cell as u64, i))
                };
                if pp.restriction(&rnd)?.1 {
                    acc.count("seed-fallback");
                }
                let sim = pp.simulate_with(&adv, t, collapse, &rnd)?;
                let good = !sim.is_constant();
                if !good {
                    acc.count("collapse-failure");
                }
                for (j, x) in msgs.iter().enumerate() {
                    let real = match adv.eval(&pp.encode_with(x, &rnd)?)? {
                        None => None,
                        Some(c) => pp.decode(&c)?,
                    };
                    let s = sim.eval(x)?;
                    if good && real != s {
                        acc.count("good-mismatch");
                    }
                    acc.tables[j][0].record(real);
                    acc.tables[j][1].record(s);
                }
                Ok(())
            },
            Acc::merge,
        )?;
        let bad = acc.events_of("collapse-failure");
        let mismatches = acc.events_of("good-mismatch");
        verdicts.push(Verdict::new(format!("{}: simulator exact on good randomness", label), mismatches == 0, format!("{} mismatches", mismatches)));
        // Both tables have `trials` entries, so Δ = num / (2T²) ≤ bad / T exactly.
        let worst = acc.tables.iter().map(|t| exact_distance(&t[0], &t[1])).collect::<Result<Vec<_>>>()?;
        let within = worst.iter().all(|&(num, den)| num * trials as u128 <= bad as u128 * den);
        let res = summarize(label.clone(), &msgs, &SERIES_2, &acc, trials, 0.0)?;
        verdicts.push(Verdict::new(
            format!("{}: Δ(real, sim) ≤ Pr[collapse failure]", label),
            within,
            format!("{} ≤ {}", res.max_distance["real-sim"], bad as f64 / trials as f64),
        ));
        results.push(res);
    }
    Ok((results, verdicts))
}

/// Real and simulated runs use independent randomness; the simulator is
/// drawn once per trial and applied to every message.
fn ss_experiment(cfg: &ExperimentConfig, pp: &SplitStateParams) -> Result<(Vec<AdversaryResult>, Vec<Verdict>)> {
    let Mode::Montecarlo { trials } = cfg.mode else {
        return Err(Error::RegimeTooLarge(format!("split-state experiments draw more than {} randomness bits", crate::harness::EXHAUSTIVE_BITS)));
    };
    let msgs = all_messages(2 * pp.k)?;
    let margin = 2.0 * tv_margin(msgs.len() + 1, trials, cfg.alpha);
    let mut results = Vec::new();
    let mut verdicts = Vec::new();
    for (cell, (label, adv)) in adversaries(cfg, pp.n())?.into_iter().enumerate() {
        let acc = par_fold(
            trials,
            || Acc::new(msgs.len(), 2, 2 * pp.k, false),
            |acc, i| {
                let mut rng = trial_rng(cfg.master_seed, cell as u64, i);
                let coins = pp.coins(&mut rng);
                let state = pp.sim_state(&adv, &coins)?;
                count_stage(acc, state.stage, state.fell_back);
                let sim = pp.simulate_state(&adv, &state);
                for (x, tabs) in msgs.iter().zip(acc.tables.iter_mut()) {
                    let (x_l, x_r) = (x.slice(0, pp.k), x.slice(pp.k, 2 * pp.k));
                    let real = pp.real_experiment(&adv, &x_l, &x_r, &pp.random(&mut rng))?;
                    tabs[0].record(join(real));
                    tabs[1].record(join(sim.eval(&x_l, &x_r, &coins.l, &coins.right)?));
                }
                Ok(())
            },
            Acc::merge,
        )?;
        let res = summarize(label.clone(), &msgs, &SERIES_2, &acc, trials, margin)?;
        let bound = upper(bad_total(&acc), trials, cfg.alpha) + margin;
        let d = res.max_distance["real-sim"];
        verdicts.push(Verdict::new(format!("{}: Δ(real, sim) ≤ Pr[bad] + MC error", label), d <= bound, format!("{} ≤ {}", d, bound)));
        results.push(res);
    }
    Ok((results, verdicts))
}

pub(crate) fn count_stage(acc: &mut Acc, stage: Stage, fell_back: bool) {
    match stage {
        Stage::Bad(e) => acc.count(&format!("bad-{}", serde_json::to_value(e).expect("plain enum").as_str().unwrap_or("?"))),
        Stage::AdversaryBottom => acc.count("adversary-bottom"),
        Stage::SparseSeed => acc.count("sparse-seed"),
        Stage::Ready => {}
    }
    if fell_back {
        acc.count("seed-fallback");
    }
}

pub(crate) fn bad_total(acc: &Acc) -> u64 {
    acc.events.iter().filter(|(e, _)| e.starts_with("bad-")).map(|(_, c)| c).sum()
}

/// Three series per message: the real experiment, the chain simulator's
/// `τ'` run against the inner code (`mid`), and the split-state simulator's
/// functions run on the plugin halves (`sim`). `mid` and `sim` share `τ'`.
fn pipeline_experiment(cfg: &ExperimentConfig, acd: &AcdNmc) -> Result<(Vec<AdversaryResult>, Vec<Verdict>)> {
    let Mode::Montecarlo { trials } = cfg.mode else {
        return Err(Error::RegimeTooLarge(format!("pipeline experiments draw more than {} randomness bits", crate::harness::EXHAUSTIVE_BITS)));
    };
    let (chain, ss, plugin) = acd.stages();
    let inner = compose(Arc::new(ss.clone()), Arc::new(plugin.clone()))?;
    let k = acd.message_len();
    let msgs = all_messages(k)?;
    let h = plugin.half_len();
    let margin = 2.0 * tv_margin(msgs.len() + 1, trials, cfg.alpha);
    let mut results = Vec::new();
    let mut verdicts = Vec::new();
    for (cell, (label, adv)) in adversaries(cfg, acd.codeword_len())?.into_iter().enumerate() {
        let acc = par_fold(
            trials,
            || Acc::new(msgs.len(), 3, k, false),
            |acc, i| {
                let mut rng = trial_rng(cfg.master_seed, cell as u64, i);
                let tau = chain.simulate(&adv, &mut rng)?;
                let split = match &tau {
                    Tampering::Constant(_) => {
                        acc.count("chain-collapse-failure");
                        None
                    }
                    Tampering::Leaky(a) => {
                        let coins = ss.coins(&mut rng);
                        let state = ss.sim_state(a, &coins)?;
                        count_stage(acc, state.stage, state.fell_back);
                        Some((ss.simulate_state(a, &state), coins))
                    }
                };
                for (x, tabs) in msgs.iter().zip(acc.tables.iter_mut()) {
                    let real = match adv.eval(&acd.encode(x, &mut rng as &mut dyn RngCore)?)? {
                        None => None,
                        Some(c) => acd.decode(&c)?,
                    };
                    let mid = match tau.eval(&inner.encode(x, &mut rng)?)? {
                        None => None,
                        Some(c) => inner.decode(&c)?,
                    };
                    let sim = match (&tau, &split) {
                        (Tampering::Constant(c), _) => match c {
                            None => None,
                            Some(c) => inner.decode(c)?,
                        },
                        (_, Some((f, coins))) => {
                            let halves = plugin.encode(x, &mut rng)?;
                            match f.eval(&halves.slice(0, h), &halves.slice(h, 2 * h), &coins.l, &coins.right)? {
                                None => None,
                                Some((l, r)) => plugin.decode(&BitVec::concat(&[&l, &r]))?,
                            }
                        }
                        _ => unreachable!("leaky τ' always has a split-state simulator"),
                    };
                    tabs[0].record(real);
                    tabs[1].record(mid);
                    tabs[2].record(sim);
                }
                Ok(())
            },
            Acc::merge,
        )?;
        let res = summarize(label.clone(), &msgs, &SERIES_3, &acc, trials, margin)?;
        let eps_chain = upper(acc.events_of("chain-collapse-failure"), trials, cfg.alpha);
        let eps_ss = upper(bad_total(&acc), trials, cfg.alpha);
        let d = &res.max_distance;
        verdicts.push(Verdict::new(
            format!("{}: chain stage Δ(real, mid) ≤ Pr[collapse failure] + MC error", label),
            d["real-mid"] <= eps_chain + margin,
            format!("{} ≤ {}", d["real-mid"], eps_chain + margin),
        ));
        verdicts.push(Verdict::new(
            format!("{}: split-state stage Δ(mid, sim) ≤ Pr[bad] + MC error", label),
            d["mid-sim"] <= eps_ss + margin,
            format!("{} ≤ {}", d["mid-sim"], eps_ss + margin),
        ));
        verdicts.push(Verdict::new(
            format!("{}: composition Δ(real, sim) ≤ ε_chain + ε_ss + MC error", label),
            d["real-sim"] <= eps_chain + eps_ss + margin,
            format!("{} ≤ {} (stages measured {} + {})", d["real-sim"], eps_chain + eps_ss + margin, d["real-mid"], d["mid-sim"]),
        ));
        results.push(res);
    }
    Ok((results, verdicts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::CollapseMode;
    use crate::harness::adversary::AdversarySpec;
    use crate::harness::{SsTarget, StarTarget};
    use crate::reductions::DecodeRule;

    fn cfg(target: Target, mode: Mode, adversaries: Vec<AdversarySpec>) -> ExperimentConfig {
        ExperimentConfig { master_seed: 5, mode, target, adversaries, standard_suite: false, alpha: 0.05, output: None, base_dir: None }
    }

    fn tiny_star() -> Target {
        Target::StarReduction(StarTarget { k: 1, n: 8, p_log_inv: 1, sigma: 1, t: 2, collapse: CollapseMode::Base, rule: DecodeRule::Region })
    }

    #[test]
    fn identity_star_exhaustive() {
        let r = run_nm_experiment(&cfg(tiny_star(), Mode::Exhaustive, vec![AdversarySpec::Identity])).unwrap();
        assert!(r.passed, "{:?}", r.verdicts);
        let res = &r.results[0];
        assert_eq!(res.max_distance["real-sim"], 0.0);
        for c in &res.cells {
            assert_eq!(c.tables["real"].bottom_rate(), 0.0);
        }
    }

    #[test]
    fn constant_overwrite_is_degenerate() {
        let r = run_nm_experiment(&cfg(tiny_star(), Mode::Exhaustive, vec![AdversarySpec::Constant { fill: false }])).unwrap();
        assert!(r.passed, "{:?}", r.verdicts);
        for c in &r.results[0].cells {
            assert_eq!(c.tables["real"].support_size(), 1);
            assert_eq!(c.tables["real"], c.tables["sim"]);
        }
    }

    #[test]
    fn ss_identity() {
        let r = run_nm_experiment(&cfg(Target::SsReduction(SsTarget { preset: SsPreset::Desk }), Mode::Montecarlo { trials: 2000 }, vec![AdversarySpec::Identity]))
            .unwrap();
        assert!(r.passed, "{:?}", r.verdicts);
        assert!(run_nm_experiment(&cfg(Target::SsReduction(SsTarget { preset: SsPreset::Desk }), Mode::Exhaustive, vec![AdversarySpec::Identity])).is_err());
    }

    #[test]
    fn reproducible_with_same_seed() {
        let c = cfg(tiny_star(), Mode::Montecarlo { trials: 300 }, vec![AdversarySpec::RandomLocal { locality: 2, seed: 1 }]);
        let a = serde_json::to_string(&run_nm_experiment(&c).unwrap()).unwrap();
        let b = serde_json::to_string(&run_nm_experiment(&c).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
