use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use nmcode::bitlinalg::BitVec;
use nmcode::harness::{run_hybrid_replay, run_nm_experiment, run_switching_experiment, ExperimentConfig, Report, Target};
use nmcode::nmcpipeline::{build_acd_nmc, toy_ss_nmc, AcdNmc, Coder, PipelineSpec};
use nmcode::params::{evaluate, ParamRequest};

#[derive(Parser)]
#[command(name = "nmcode", version, about = "Non-malleable codes against small-depth tampering: coders, simulators and experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate one parameter request or an array of them.
    Params { file: PathBuf },
    /// Encode a message with the pipeline described in a JSON file.
    Encode {
        #[arg(long)]
        pipeline: PathBuf,
        /// Message bits, position 0 first.
        #[arg(long)]
        message: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Decode a codeword with the pipeline described in a JSON file.
    Decode {
        #[arg(long)]
        pipeline: PathBuf,
        #[arg(long)]
        codeword: String,
    },
    /// Collapse rates under pseudorandom restrictions.
    Switching(RunArgs),
    /// Real against simulated tampering.
    NmExperiment(RunArgs),
    /// Shared-randomness hybrid replay of the split-state reduction.
    HybridReplay(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Also write the flattened tables to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}

fn print<T: Serialize>(v: &T) -> Result<()> {
    emit(&serde_json::to_string_pretty(v)?)
}

fn emit(text: &str) -> Result<()> {
    match writeln!(io::stdout().lock(), "{}", text) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn load_pipeline(path: &Path) -> Result<AcdNmc> {
    let spec: PipelineSpec = serde_json::from_str(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?;
    Ok(build_acd_nmc(&spec, toy_ss_nmc(spec.toy_k)?)?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Params { file } => {
            let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?)?;
            let reqs: Vec<ParamRequest> = match v {
                serde_json::Value::Array(_) => serde_json::from_value(v)?,
                _ => vec![serde_json::from_value(v)?],
            };
            let reports = reqs.iter().map(evaluate).collect::<nmcode::error::Result<Vec<_>>>()?;
            let ok = reports.iter().all(|r| r.violations().is_empty());
            print(&reports)?;
            Ok(ok)
        }
        Cmd::Encode { pipeline, message, seed } => {
            let acd = load_pipeline(&pipeline)?;
            let x: BitVec = message.parse()?;
            let c = acd.encode(&x, &mut ChaCha8Rng::seed_from_u64(seed))?;
            print(&json!({ "pipeline": acd.spec, "message": message, "codeword": c.to_string() }))?;
            Ok(true)
        }
        Cmd::Decode { pipeline, codeword } => {
            let acd = load_pipeline(&pipeline)?;
            let c: BitVec = codeword.parse()?;
            let m = acd.decode(&c)?;
            print(&json!({ "pipeline": acd.spec, "message": m.map_or("⊥".to_string(), |m| m.to_string()) }))?;
            Ok(true)
        }
        Cmd::Switching(a) => experiment(&a, run_switching_experiment),
        Cmd::NmExperiment(a) => experiment(&a, run_nm_experiment),
        Cmd::HybridReplay(a) => experiment(&a, run_hybrid_replay),
    }
}

/// Runs, prints and persists a report; pipeline targets also persist their spec.
fn experiment<R: Report>(a: &RunArgs, f: impl Fn(&ExperimentConfig) -> nmcode::error::Result<R>) -> Result<bool> {
    let cfg = ExperimentConfig::load(&a.config).with_context(|| format!("loading {}", a.config.display()))?;
    let report = f(&cfg)?;
    let text = serde_json::to_string_pretty(&report)?;
    emit(&text)?;
    if let Some(out) = &cfg.output {
        let out = cfg.resolve(out);
        fs::write(&out, &text).with_context(|| format!("writing {}", out.display()))?;
        if let Target::Pipeline(spec) = &cfg.target {
            fs::write(out.with_extension("pipeline.json"), serde_json::to_string_pretty(spec)?)?;
        }
    }
    if let Some(path) = &a.csv {
        report.write_csv(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?)?;
    }
    if !report.passed() {
        for v in report.verdicts().iter().filter(|v| !v.holds) {
            eprintln!("failed: {} ({})", v.name, v.detail);
        }
    }
    Ok(report.passed())
}
