//! Empirical collapse rates of circuit families under pseudorandom restrictions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bitlinalg::BitVec;
use crate::circuits::json::{family_from_json, load_family};
use crate::circuits::layered::{Circuit, Lit};
use crate::circuits::{BoolFn, FunctionFamily};
use crate::error::{Error, Result};
use crate::harness::{check_exhaustive, hoeffding_upper, par_fold, trial_rng, ExperimentConfig, FamilySpec, Mode, Report, SourceSpec, Target, Verdict};
use crate::params::{is_vacuous, switching_bound};
use crate::prg::CwGenerator;
use crate::restrictions::{Restriction, RestrictionDistribution};

/// `m` DNFs, each with `terms` terms of `width` literals on distinct variables.
pub fn random_dnfs(m: usize, terms: usize, width: usize, n: usize, seed: u64) -> Result<FunctionFamily> {
    if width > n {
        return Err(Error::Config(format!("terms of width {} over {} inputs", width, n)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let funcs = (0..m)
        .map(|_| {
            let ts = (0..terms)
                .map(|_| {
                    let mut vars: Vec<usize> = Vec::with_capacity(width);
                    while vars.len() < width {
                        let v = rng.gen_range(0..n);
                        if !vars.contains(&v) {
                            vars.push(v);
                        }
                    }
                    vars.into_iter().map(|v| if rng.gen() { Lit::pos(v) } else { Lit::negative(v) }).collect()
                })
                .collect();
            BoolFn::Circuit(Circuit::dnf(n, ts))
        })
        .collect();
    FunctionFamily::new(n, funcs)
}

/// Whether some member keeps decision-tree depth at least `t` under `rho`.
/// Members whose support is too large to tabulate count as failures.
pub fn collapse_fails(fam: &FunctionFamily, rho: &Restriction, t: usize) -> Result<bool> {
    for f in &fam.funcs {
        match f.restrict(rho).dt_depth(fam.n_inputs) {
            Ok(d) if d < t => {}
            Ok(_) | Err(Error::RegimeTooLarge(_)) => return Ok(true),
            Err(e) => return Err(e),
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, Serialize)]
pub struct SwitchingReport {
    pub config: ExperimentConfig,
    pub members: usize,
    pub n: usize,
    pub trials: u64,
    pub failures: u64,
    pub frequency: f64,
    /// Equal to the frequency in exact mode.
    pub upper_ci: f64,
    pub bound: f64,
    pub vacuous: bool,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

impl Report for SwitchingReport {
    fn verdicts(&self) -> &[Verdict] {
        &self.verdicts
    }

    fn csv_header(&self) -> Vec<String> {
        ["members", "n", "trials", "failures", "frequency", "upper_ci", "bound", "vacuous"].map(String::from).to_vec()
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        vec![vec![
            self.members.to_string(),
            self.n.to_string(),
            self.trials.to_string(),
            self.failures.to_string(),
            self.frequency.to_string(),
            self.upper_ci.to_string(),
            self.bound.to_string(),
            self.vacuous.to_string(),
        ]]
    }
}

pub fn run_switching_experiment(cfg: &ExperimentConfig) -> Result<SwitchingReport> {
    let Target::Switching(st) = &cfg.target else {
        return Err(Error::Config("switching experiment needs a switching target".into()));
    };
    let fam = match &st.family {
        FamilySpec::File(p) => load_family(&cfg.resolve(p))?,
        FamilySpec::Inline(j) => family_from_json(j)?,
        FamilySpec::RandomDnf { m, terms, width, n, seed } => random_dnfs(*m, *terms, *width, *n, *seed)?,
    };
    let n = fam.n_inputs;
    let dist = RestrictionDistribution::new(n, st.p_log_inv)?;
    let gen = match st.source {
        SourceSpec::Uniform => None,
        SourceSpec::Cw { sigma } => Some(CwGenerator::unbiased(sigma, dist.stream_len())?),
    };
    let stream_of = |bits: &BitVec| -> Result<Restriction> {
        match &gen {
            Some(g) => dist.sample(&g.eval(bits)?),
            None => dist.sample(bits),
        }
    };
    let draw_len = gen.as_ref().map_or(dist.stream_len(), |g| g.seed_len());
    let (trials, failures) = match cfg.mode {
        Mode::Exhaustive => {
            check_exhaustive(draw_len)?;
            let total = 1u64 << draw_len;
            let f = par_fold(
                total,
                || 0u64,
                |acc, i| {
                    let rho = stream_of(&BitVec::from_u64(i, draw_len))?;
                    *acc += collapse_fails(&fam, &rho, st.t)? as u64;
                    Ok(())
                },
                |a, b| a + b,
            )?;
            (total, f)
        }
        Mode::Montecarlo { trials } => {
            let f = par_fold(
                trials,
                || 0u64,
                |acc, i| {
                    let bits = BitVec::random(draw_len, &mut trial_rng(cfg.master_seed, 0, i));
                    *acc += collapse_fails(&fam, &stream_of(&bits)?, st.t)? as u64;
                    Ok(())
                },
                |a, b| a + b,
            )?;
            (trials, f)
        }
    };
    let frequency = failures as f64 / trials as f64;
    let upper_ci = match cfg.mode {
        Mode::Exhaustive => frequency,
        Mode::Montecarlo { .. } => hoeffding_upper(frequency, trials, cfg.alpha),
    };
    let bound = switching_bound(st.w, st.t, dist.p(), st.delta, fam.len());
    let vacuous = is_vacuous(bound);
    let verdicts = vec![Verdict::new(
        "failure upper CI ≤ M·(2^{w+t+1}(5pw)^t + δ)",
        vacuous || upper_ci <= bound,
        format!("{} ≤ {}{}", upper_ci, bound, if vacuous { " (vacuous)" } else { "" }),
    )];
    let passed = verdicts.iter().all(|v| v.holds);
    Ok(SwitchingReport { config: cfg.clone(), members: fam.len(), n, trials, failures, frequency, upper_ci, bound, vacuous, verdicts, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::SwitchingTarget;

    fn cfg(family: FamilySpec, p_log_inv: usize, source: SourceSpec, mode: Mode) -> ExperimentConfig {
        ExperimentConfig {
            master_seed: 11,
            mode,
            target: Target::Switching(SwitchingTarget { family, w: 2, t: 2, p_log_inv, delta: 0.0, source }),
            adversaries: vec![],
            standard_suite: false,
            alpha: 0.05,
            output: None,
            base_dir: None,
        }
    }

    #[test]
    fn constants_never_fail() {
        let fam = crate::circuits::json::family_to_json(&FunctionFamily::new(8, vec![BoolFn::Circuit(Circuit::constant(8, true)); 3]).unwrap());
        let r = run_switching_experiment(&cfg(FamilySpec::Inline(fam), 1, SourceSpec::Uniform, Mode::Montecarlo { trials: 500 })).unwrap();
        assert_eq!(r.failures, 0);
    }

    #[test]
    fn dnfs_within_bound() {
        let family = FamilySpec::RandomDnf { m: 4, terms: 6, width: 2, n: 32, seed: 3 };
        for source in [SourceSpec::Uniform, SourceSpec::Cw { sigma: 8 }] {
            let r = run_switching_experiment(&cfg(family.clone(), 6, source, Mode::Montecarlo { trials: 4000 })).unwrap();
            assert!(r.passed, "{:?}", r.verdicts);
        }
    }

    #[test]
    fn exhaustive_over_generator_seeds() {
        let family = FamilySpec::RandomDnf { m: 2, terms: 3, width: 2, n: 8, seed: 1 };
        let r = run_switching_experiment(&cfg(family.clone(), 2, SourceSpec::Cw { sigma: 2 }, Mode::Exhaustive)).unwrap();
        assert_eq!(r.trials, 1 << 15);
        assert_eq!(r.upper_ci, r.frequency);
        assert_eq!(run_switching_experiment(&cfg(family, 1, SourceSpec::Uniform, Mode::Exhaustive)).unwrap().trials, 1 << 16);
        let wide = FamilySpec::RandomDnf { m: 2, terms: 3, width: 2, n: 16, seed: 1 };
        assert!(run_switching_experiment(&cfg(wide, 2, SourceSpec::Uniform, Mode::Exhaustive)).is_err());
    }
}
