use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use qltc_core::amplify::default_amplification;
use qltc_core::checks::CheckSystem;
use qltc_core::decoder::{default_max_rounds, Decoder};
use qltc_core::experiment::{
    build_system, preamble, read_error_log, run_pipeline, single_qubit_soundness, write_code_bundle, write_manifest,
    Amplification, ClusterGraph, ExperimentConfig, SUMMARY_HEADER,
};
use qltc_core::gibbs::{run_chain, write_sample_log, ChainConfig};
use qltc_core::percolation::maxconn_alpha;
use qltc_core::stats::derive_seed;
use qltc_core::verify::run_verify_to;
use qltc_core::{Error, Result, VERSION};

#[derive(Parser, Debug)]
#[command(name = "qltc", version = VERSION, about = "Thermal-noise experiments on projective hypercube codes")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Experiment config file (key=value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; overrides the config.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Cube dimension N; overrides the config.
    #[arg(long, global = true)]
    dim: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the check matrices and qubit faces.
    BuildCode,
    /// Draw the amplified check family and write the code bundle with it.
    Amplify {
        #[arg(long)]
        subset_size: Option<usize>,
        #[arg(long)]
        m_prime: Option<usize>,
    },
    /// Run one Metropolis chain and log its samples.
    Sample {
        /// Inverse temperature; defaults to the first grid value.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 0)]
        chain: u64,
    },
    /// Cluster statistics for each error of an error log.
    Clusters {
        #[arg(long)]
        errors: PathBuf,
    },
    /// Decode each error of an error log with the base checks.
    Decode {
        #[arg(long)]
        errors: PathBuf,
        /// Also write per-error round traces.
        #[arg(long)]
        trace: bool,
    },
    /// Full β sweep: sample, analyze, decode, summarize.
    Sweep,
    /// Run the self-check suite; exits nonzero if any check fails.
    Verify,
}

fn load_config(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.output_dir = o.clone();
    }
    if let Some(j) = c.jobs {
        cfg.jobs = j;
    }
    if let Some(d) = c.dim {
        cfg.cube_dim = d;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    }
    fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn build_code(cfg: &ExperimentConfig) -> Result<()> {
    let system = build_system(cfg)?;
    info!("n={} k={} checks={}", system.code.n(), system.code.logical_qubits(), system.checks.m_total());
    write_code_bundle(&cfg.output_dir.join("code"), &system, VERSION, cfg.seed)?;
    write_manifest(&cfg.output_dir, VERSION, cfg.seed)
}

fn amplify_cmd(cfg: &mut ExperimentConfig, subset_size: Option<usize>, m_prime: Option<usize>) -> Result<()> {
    let (k, m) = match (subset_size, m_prime, cfg.amplification) {
        (Some(k), Some(m), _) => (k, m),
        (k, m, Some(a)) => (k.unwrap_or(a.subset_size), m.unwrap_or(a.m_prime)),
        (k, m, None) => {
            let code = build_system(&ExperimentConfig { amplification: None, ..cfg.clone() })?;
            let s = single_qubit_soundness(&code.checks)?;
            let (dk, dm) = default_amplification(code.code.n(), s);
            (k.unwrap_or(dk), m.unwrap_or(dm))
        }
    };
    cfg.amplification = Some(Amplification { subset_size: k, m_prime: m });
    build_code(cfg)
}

fn sample(cfg: &ExperimentConfig, beta: Option<f64>, chain: u64) -> Result<()> {
    let beta = beta.or(cfg.beta_grid.first().copied()).ok_or(Error::EmptySet)?;
    let system = build_system(cfg)?;
    let chain_cfg = ChainConfig {
        beta,
        truncation_k: cfg.truncation_k,
        steps: cfg.steps,
        burn_in: cfg.burn_in,
        thin: cfg.thin,
        proposal: cfg.proposal,
        seed: derive_seed(cfg.seed, &[2, beta.to_bits(), chain]),
    };
    let run = run_chain(&system.checks, &chain_cfg)?;
    info!("{} samples, acceptance {:.4}", run.samples.len(), run.acceptance_rate);
    let pre = preamble(VERSION, cfg.seed);
    let mut log = Vec::new();
    write_sample_log(&mut log, &pre, &system.checks, &chain_cfg, &run)
        .map_err(|e| Error::Io { path: cfg.output_dir.clone(), source: e })?;
    write(&cfg.output_dir.join("samples.csv"), &String::from_utf8_lossy(&log))?;
    let mut errors = pre;
    for s in &run.samples {
        writeln!(errors, "{}\t{}", s.step, s.error).expect("write to String");
    }
    write(&cfg.output_dir.join("errors.txt"), &errors)?;
    write_manifest(&cfg.output_dir, VERSION, cfg.seed)
}

fn clusters(cfg: &ExperimentConfig, errors: &Path) -> Result<()> {
    let system = build_system(cfg)?;
    let g = match cfg.cluster_graph {
        ClusterGraph::Base => CheckSystem::base(system.code.clone()).interaction_graph(),
        ClusterGraph::Union => system.checks.interaction_graph(),
    };
    let mut out = preamble(VERSION, cfg.seed);
    writeln!(out, "# alpha={} graph={}", cfg.alpha, cfg.cluster_graph).expect("write to String");
    out.push_str("step,weight,largest_component,maxconn_lower,maxconn_upper,exact\n");
    for (step, e) in read_error_log(errors)? {
        let r = maxconn_alpha(&g, &e.support().ones(), cfg.alpha, cfg.max_terminals)?;
        writeln!(
            out,
            "{step},{},{},{},{},{}",
            e.weight(),
            r.largest_component(),
            r.maxconn_lower,
            r.maxconn_upper,
            u8::from(r.exact)
        )
        .expect("write to String");
    }
    write(&cfg.output_dir.join("clusters.csv"), &out)?;
    write_manifest(&cfg.output_dir, VERSION, cfg.seed)
}

fn decode(cfg: &ExperimentConfig, errors: &Path, trace: bool) -> Result<()> {
    let system = build_system(cfg)?;
    let dec = Decoder::new(&system.code);
    let max_rounds = cfg.max_rounds.unwrap_or_else(|| default_max_rounds(system.code.n()));
    let pre = preamble(VERSION, cfg.seed);
    let mut out = format!("{pre}step,weight,rounds_z,rounds_x,syndrome_cleared,logical_failure\n");
    let (mut total, mut ok) = (0usize, 0usize);
    for (step, e) in read_error_log(errors)? {
        let r = dec.decode(&e, max_rounds)?;
        total += 1;
        ok += usize::from(r.recovered());
        writeln!(
            out,
            "{step},{},{},{},{},{}",
            e.weight(),
            r.rounds_z,
            r.rounds_x,
            u8::from(r.syndrome_cleared),
            u8::from(r.logical_failure)
        )
        .expect("write to String");
        if trace {
            let mut buf = pre.clone().into_bytes();
            r.write_trace(&mut buf).map_err(|e| Error::Io { path: cfg.output_dir.clone(), source: e })?;
            write(&cfg.output_dir.join("traces").join(format!("step_{step}.csv")), &String::from_utf8_lossy(&buf))?;
        }
    }
    info!("recovered {ok}/{total}");
    write(&cfg.output_dir.join("decodes.csv"), &out)?;
    write_manifest(&cfg.output_dir, VERSION, cfg.seed)
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = load_config(&cli.common)?;
    match cli.command {
        Command::BuildCode => build_code(&cfg)?,
        Command::Amplify { subset_size, m_prime } => amplify_cmd(&mut cfg, subset_size, m_prime)?,
        Command::Sample { beta, chain } => sample(&cfg, beta, chain)?,
        Command::Clusters { errors } => clusters(&cfg, &errors)?,
        Command::Decode { errors, trace } => decode(&cfg, &errors, trace)?,
        Command::Sweep => {
            let (_, rows) = run_pipeline(&cfg)?;
            println!("{SUMMARY_HEADER}");
            for r in &rows {
                println!("{}", r.to_csv());
            }
        }
        Command::Verify => {
            let report = run_verify_to(&cfg.output_dir, cfg.seed)?;
            for o in &report.outcomes {
                println!("{} {} {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            return Ok(report.all_passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
