//! Closed-form bounds: switching-lemma failure, per-level and composed error,
//! Chernoff for bounded independence, generator independence, and the
//! split-state feasibility inequalities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reductions::{SplitStateParams, StarChain};

/// One checked inequality `lhs ≤ rhs` (or `lhs < rhs` when so named).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Inequality {
    pub fn at_most(name: &str, lhs: f64, rhs: f64) -> Self {
        Inequality { name: name.into(), lhs, rhs, holds: lhs <= rhs }
    }

    pub fn below(name: &str, lhs: f64, rhs: f64) -> Self {
        Inequality { name: name.into(), lhs, rhs, holds: lhs < rhs }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub formula: String,
    pub inputs: serde_json::Value,
    pub values: BTreeMap<String, f64>,
    pub checks: Vec<Inequality>,
    /// Values above 1, reported as they are.
    pub vacuous: Vec<String>,
    pub feasible: bool,
}

impl BoundReport {
    fn new(formula: &str, inputs: serde_json::Value) -> Self {
        BoundReport { formula: formula.into(), inputs, values: BTreeMap::new(), checks: Vec::new(), vacuous: Vec::new(), feasible: true }
    }

    fn value(&mut self, name: &str, v: f64) {
        self.values.insert(name.into(), v);
    }

    /// A probability bound; flagged when it exceeds 1.
    fn bound(&mut self, name: &str, v: f64) {
        if v > 1.0 {
            self.vacuous.push(name.into());
        }
        self.value(name, v);
    }

    fn check(&mut self, c: Inequality) {
        self.feasible &= c.holds;
        self.checks.push(c);
    }

    pub fn violations(&self) -> Vec<&Inequality> {
        self.checks.iter().filter(|c| !c.holds).collect()
    }
}

/// `M·(2^{w+t+1}(5pw)^t + δ)`.
pub fn switching_bound(w: usize, t: usize, p: f64, delta: f64, m: usize) -> f64 {
    m as f64 * (2f64.powi((w + t + 1) as i32) * (5.0 * p * w as f64).powi(t as i32) + delta)
}

pub fn is_vacuous(bound: f64) -> bool {
    bound > 1.0
}

/// Exact `log2 x` for powers of two.
pub fn exact_log2(x: f64) -> Result<u32> {
    let l = x.log2();
    if x <= 0.0 || l.fract() != 0.0 {
        return Err(Error::NonIntegralLog(x));
    }
    Ok(l as u32)
}

/// Per-level error `nS(2^{2logℓ+1}(5p logℓ)^{logℓ} + δ) + exp(−σ/(2 log(1/p)))`.
pub fn ac0_error(n: usize, s: usize, ell: usize, p: f64, delta: f64, sigma: usize) -> Result<f64> {
    let lg = exact_log2(ell as f64)? as i32;
    let collapse = 2f64.powi(2 * lg + 1) * (5.0 * p * lg as f64).powi(lg) + delta;
    Ok((n * s) as f64 * collapse + (-(sigma as f64) / (2.0 * (1.0 / p).log2())).exp())
}

/// `d` levels of `ac0_error`.
pub fn ac0_chain_error(d: usize, n: usize, s: usize, ell: usize, p: f64, delta: f64, sigma: usize) -> Result<f64> {
    Ok(d as f64 * ac0_error(n, s, ell, p, delta, sigma)?)
}

/// Error of the full code: `d` circuit levels plus the split-state stage.
pub fn composed_error(d: usize, level_error: f64, ss_error: f64) -> f64 {
    d as f64 * level_error + ss_error
}

/// `exp(−⌊σ/2⌋)`.
pub fn chernoff_bound(sigma: usize) -> f64 {
    (-((sigma / 2) as f64)).exp()
}

/// `σ ≤ ε²μe^{−1/3}`.
pub fn chernoff_precond(sigma: usize, eps: f64, mu: f64) -> bool {
    sigma as f64 <= eps * eps * mu * (-1.0f64 / 3.0).exp()
}

/// Independence for the pseudorandom switching lemma:
/// `⌈c·(log₂(M/ε))²⌉` with `M = S·2^{w(log(1/p)+1)}` and `ε = δ·2^{−(t+1)(2w+log S)}`.
pub fn tx_sigma(t: usize, w: usize, s: usize, delta: f64, p: f64, constant: f64) -> u64 {
    let log_s = (s as f64).log2();
    let log_m = log_s + w as f64 * ((1.0 / p).log2() + 1.0);
    let log_eps = delta.log2() - (t + 1) as f64 * (2.0 * w as f64 + log_s);
    let r = log_m - log_eps;
    (constant * r * r).ceil() as u64
}

/// What the split-state inequalities read. `c_sec` and `c_rate` are the
/// worst over the three RPEs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsInputs {
    pub k: usize,
    pub n_l: usize,
    pub n_z: usize,
    pub n_r: usize,
    pub tau: usize,
    pub s: usize,
    pub c_sec: f64,
    pub c_rate: f64,
    /// Leakage rounds, outputs per round, locality.
    pub q: usize,
    pub m: usize,
    pub ell: usize,
}

impl SsInputs {
    pub fn from_params(pp: &SplitStateParams) -> Self {
        let rpes = [&pp.rpe_l, &pp.rpe_z, &pp.rpe_r];
        let c_sec = rpes.iter().map(|r| r.c_sec()).fold(f64::INFINITY, f64::min);
        let c_rate = rpes.iter().map(|r| r.codeword_len() as f64 / r.message_len() as f64).fold(0.0, f64::max);
        SsInputs {
            k: pp.k,
            n_l: pp.n_l(),
            n_z: pp.n_z(),
            n_r: pp.n_r(),
            tau: pp.tau,
            s: pp.seed_len(),
            c_sec,
            c_rate,
            q: pp.budget.q,
            m: pp.budget.m,
            ell: pp.budget.ell,
        }
    }

    pub fn n(&self) -> usize {
        self.n_z + self.tau + self.n_r
    }
}

/// Every inequality of the split-state parameter figure, plus `mqℓ³ ≤ cn`.
pub fn ss_feasibility(x: &SsInputs, c: f64) -> BoundReport {
    let mut r = BoundReport::new("split-state feasibility", serde_json::to_value(x).expect("plain struct"));
    let (ell, mq) = (x.ell as f64, (x.m * x.q) as f64);
    let n = x.n() as f64;
    let p = 3.0 * x.n_l as f64 / (2.0 * x.tau as f64);
    r.value("n", n);
    r.value("p", p);
    r.value("rate", x.k as f64 / n);
    r.check(Inequality::below("1/c_sec < ℓ", 1.0 / x.c_sec, ell));
    r.check(Inequality::at_most("mqℓ/c_sec ≤ n_Z", mq * ell / x.c_sec, x.n_z as f64));
    r.check(Inequality::at_most("s·c_rate ≤ n_Z", x.s as f64 * x.c_rate, x.n_z as f64));
    r.check(Inequality::at_most("k·c_rate ≤ n_L", x.k as f64 * x.c_rate, x.n_l as f64));
    r.check(Inequality::at_most("(ℓ/c_sec)(n_L + n_Z + mq) ≤ n_R", ell / x.c_sec * (x.n_l + x.n_z) as f64 + ell / x.c_sec * mq, x.n_r as f64));
    r.check(Inequality::at_most("(9ℓ/(4c_sec))(n_R + n_Z + mq) ≤ τ", 9.0 * ell / (4.0 * x.c_sec) * ((x.n_r + x.n_z) as f64 + mq), x.tau as f64));
    r.check(Inequality::at_most("mqℓ³ ≤ cn", mq * ell.powi(3), c * n));
    r.check(Inequality::at_most("p ≤ 1", p, 1.0));
    r
}

/// Window and budget conditions of a star chain.
pub fn chain_feasibility(chain: &StarChain) -> BoundReport {
    let inputs = serde_json::json!({
        "k": chain.message_len(),
        "n": chain.codeword_len(),
        "d": chain.depth(),
        "levels": chain.levels.iter().map(|l| serde_json::json!({"k": l.k, "n": l.n, "m": l.m(), "p_log_inv": l.p_log_inv, "sigma": l.sigma})).collect::<Vec<_>>(),
    });
    let mut r = BoundReport::new("star chain feasibility", inputs);
    for (j, l) in chain.levels.iter().enumerate() {
        let lo = 4.0 * l.sigma as f64 / l.p_log_inv as f64;
        let hi = (l.n - l.m()) as f64 * l.p() / 2.0;
        r.check(Inequality::at_most(&format!("level {}: 4σ/log(1/p) ≤ k", j + 1), lo, l.k as f64));
        r.check(Inequality::at_most(&format!("level {}: k ≤ (n − m)p/2", j + 1), l.k as f64, hi));
        r.check(Inequality::at_most(
            &format!("level {}: σ ≤ m·c_sec", j + 1),
            l.sigma as f64,
            l.rpe.secrecy_threshold() as f64,
        ));
    }
    let m = chain.levels.iter().map(|l| l.m()).max().unwrap_or(0);
    let (k, n) = (chain.message_len() as f64, chain.codeword_len() as f64);
    let p = chain.levels[0].p();
    r.check(Inequality::at_most("2m ≤ k", 2.0 * m as f64, k));
    r.check(Inequality::at_most("k ≤ n(p/4)^d", k, n * (p / 4.0).powi(chain.depth() as i32)));
    r.value("rate", k / n);
    r
}

fn one() -> f64 {
    1.0
}

fn one_level() -> usize {
    1
}

/// A request read by the `params` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula", rename_all = "kebab-case")]
pub enum ParamRequest {
    Switching { w: usize, t: usize, p: f64, delta: f64, m: usize },
    Ac0 {
        n: usize,
        s: usize,
        ell: usize,
        p: f64,
        delta: f64,
        sigma: usize,
        #[serde(default = "one_level")]
        depth: usize,
    },
    Chernoff {
        sigma: usize,
        #[serde(default)]
        eps: Option<f64>,
        #[serde(default)]
        mu: Option<f64>,
    },
    TxSigma {
        t: usize,
        w: usize,
        s: usize,
        delta: f64,
        p: f64,
        #[serde(default = "one")]
        constant: f64,
    },
    SplitState {
        #[serde(flatten)]
        inputs: SsInputs,
        #[serde(default = "one")]
        constant: f64,
    },
    Chain { k: usize, d: usize, p_log_inv: usize, sigma: usize, t: usize },
    Composed { depth: usize, level_error: f64, ss_error: f64 },
}

pub fn evaluate(req: &ParamRequest) -> Result<BoundReport> {
    let inputs = serde_json::to_value(req)?;
    Ok(match req {
        ParamRequest::Switching { w, t, p, delta, m } => {
            let mut r = BoundReport::new("switching", inputs);
            r.bound("bound", switching_bound(*w, *t, *p, *delta, *m));
            r
        }
        ParamRequest::Ac0 { n, s, ell, p, delta, sigma, depth } => {
            let mut r = BoundReport::new("ac0", inputs);
            r.bound("level_error", ac0_error(*n, *s, *ell, *p, *delta, *sigma)?);
            r.bound("total_error", ac0_chain_error(*depth, *n, *s, *ell, *p, *delta, *sigma)?);
            r
        }
        ParamRequest::Chernoff { sigma, eps, mu } => {
            let mut r = BoundReport::new("chernoff", inputs);
            r.bound("bound", chernoff_bound(*sigma));
            if let (Some(eps), Some(mu)) = (eps, mu) {
                r.check(Inequality::at_most("σ ≤ ε²μe^{−1/3}", *sigma as f64, eps * eps * mu * (-1.0f64 / 3.0).exp()));
            }
            r
        }
        ParamRequest::TxSigma { t, w, s, delta, p, constant } => {
            let mut r = BoundReport::new("tx-sigma", inputs);
            r.value("sigma", tx_sigma(*t, *w, *s, *delta, *p, *constant) as f64);
            r
        }
        ParamRequest::SplitState { inputs: x, constant } => {
            let mut r = ss_feasibility(x, *constant);
            r.inputs = inputs;
            r
        }
        ParamRequest::Chain { k, d, p_log_inv, sigma, t } => {
            let chain = StarChain::design(*k, *d, *p_log_inv, *sigma, *t, false)?;
            let mut r = chain_feasibility(&chain);
            r.value("n", chain.codeword_len() as f64);
            r.inputs = inputs;
            r
        }
        ParamRequest::Composed { depth, level_error, ss_error } => {
            let mut r = BoundReport::new("composed", inputs);
            r.bound("error", composed_error(*depth, *level_error, *ss_error));
            r
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn switching_values() {
        assert!((switching_bound(2, 2, 2f64.powi(-8), 0.0, 1) - 0.048828125).abs() < 1e-12);
        assert_eq!(switching_bound(2, 2, 0.25, 0.0, 1), 200.0);
        assert!(is_vacuous(200.0));
        assert!(switching_bound(2, 2, 1e-12, 0.0, 1) < 1e-18);
    }

    #[test]
    fn ac0_value_and_log_check() {
        let e = ac0_error(2, 2, 2, 2f64.powi(-6), 2f64.powi(-10), 12).unwrap();
        assert!((e - (4.0 * (8.0 * 5.0 / 64.0 + 1.0 / 1024.0) + (-1.0f64).exp())).abs() < 1e-12);
        assert!(matches!(ac0_error(2, 2, 3, 0.01, 0.0, 4), Err(Error::NonIntegralLog(_))));
        assert_eq!(ac0_chain_error(3, 2, 2, 2, 2f64.powi(-6), 0.0, 12).unwrap(), 3.0 * ac0_error(2, 2, 2, 2f64.powi(-6), 0.0, 12).unwrap());
    }

    #[test]
    fn chernoff_values() {
        assert_eq!(chernoff_bound(0), 1.0);
        assert_eq!(chernoff_bound(11), chernoff_bound(10));
        assert!(chernoff_precond(4, 0.5, 32.0));
        assert!(!chernoff_precond(6, 0.5, 32.0));
    }

    #[test]
    fn tx_sigma_shape() {
        assert!(tx_sigma(1, 1, 1, 1.0, 0.5, 1.0) < tx_sigma(1, 1, 1, 0.5, 0.5, 1.0));
        assert_eq!(tx_sigma(1, 1, 1, 0.5, 0.5, 2.0), 98);
    }

    #[test]
    fn ss_report_names_violations() {
        let pp = SplitStateParams::desk().unwrap();
        let x = SsInputs::from_params(&pp);
        let r = ss_feasibility(&x, 1.0);
        assert!(!r.feasible);
        assert!(r.violations().iter().any(|c| c.name.contains("≤ τ")));
        assert_eq!(r.values["p"], 3.0 / 16.0);
        let back: BoundReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn requests_parse() {
        let req: ParamRequest = serde_json::from_str(r#"{"formula":"switching","w":2,"t":2,"p":0.25,"delta":0,"m":1}"#).unwrap();
        let r = evaluate(&req).unwrap();
        assert_eq!(r.vacuous, vec!["bound".to_string()]);
        let req: ParamRequest = serde_json::from_str(r#"{"formula":"chain","k":4,"d":2,"p_log_inv":1,"sigma":1,"t":2}"#).unwrap();
        let r = evaluate(&req).unwrap();
        assert!(r.values["n"] > 4.0);
    }
}
