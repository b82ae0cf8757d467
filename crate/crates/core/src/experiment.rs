//! Reproducible sweeps: build the code, optionally amplify, sample thermal
//! errors over a β grid, measure clusters, decode, and write a report tree.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_rational::Ratio;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::amplify::{amplify, AmplifiedCheckSet};
use crate::checks::CheckSystem;
use crate::code::{build_projective_code, CssCode, Pauli, PauliError, MAX_BUILD_DIM};
use crate::cube::faces_to_text;
use crate::decoder::{default_max_rounds, Decoder};
use crate::error::{Error, Result};
use crate::gibbs::{beta_window_from, run_chain, write_sample_log, BetaWindow, ChainConfig, ChainRun, Proposal};
use crate::graph::Graph;
use crate::percolation::{maxconn_alpha, parse_alpha, DEFAULT_MAX_TERMINALS};
use crate::stats::{derive_seed, wilson_interval, Z95};

pub const SCHEMA_VERSION: u32 = 1;

/// Graph on which error clusters are measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClusterGraph {
    /// Interaction graph of the base checks.
    #[default]
    Base,
    /// Interaction graph including amplified checks.
    Union,
}

impl std::fmt::Display for ClusterGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClusterGraph::Base => "base",
            ClusterGraph::Union => "union",
        })
    }
}

impl std::str::FromStr for ClusterGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(ClusterGraph::Base),
            "union" => Ok(ClusterGraph::Union),
            _ => Err(Error::param(format!("unknown cluster graph {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Amplification {
    pub subset_size: usize,
    pub m_prime: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub cube_dim: usize,
    pub beta_grid: Vec<f64>,
    pub chains_per_beta: usize,
    pub steps: u64,
    pub burn_in: u64,
    pub thin: u64,
    pub proposal: Proposal,
    pub truncation_k: Option<usize>,
    pub amplification: Option<Amplification>,
    pub alpha: Ratio<u64>,
    pub cluster_graph: ClusterGraph,
    pub max_terminals: usize,
    /// Decoder round limit; `None` uses `ceil(10 log2 n)`.
    pub max_rounds: Option<usize>,
    /// Soundness used for the β window; `None` uses the single-qubit value.
    pub soundness: Option<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            cube_dim: 6,
            beta_grid: vec![1.0, 2.0, 4.0, 8.0],
            chains_per_beta: 4,
            steps: 20_000,
            burn_in: 10_000,
            thin: 100,
            proposal: Proposal::Xz,
            truncation_k: None,
            amplification: None,
            alpha: Ratio::new(1, 2),
            cluster_graph: ClusterGraph::Base,
            max_terminals: DEFAULT_MAX_TERMINALS,
            max_rounds: None,
            soundness: None,
            seed: 1,
            output_dir: PathBuf::from("out"),
            jobs: 1,
        }
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), T::to_string)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cube_dim < 2 || self.cube_dim % 2 == 1 || self.cube_dim > MAX_BUILD_DIM {
            return Err(Error::param(format!(
                "cube_dim must be even and in 2..={MAX_BUILD_DIM}, got {}",
                self.cube_dim
            )));
        }
        if let Some(b) = self.beta_grid.iter().find(|b| !(**b >= 0.0) || !b.is_finite()) {
            return Err(Error::param(format!("beta values must be finite and >= 0, got {b}")));
        }
        if self.thin == 0 || self.jobs == 0 || self.max_terminals == 0 {
            return Err(Error::param("thin, jobs and max_terminals must be positive"));
        }
        if *self.alpha.numer() == 0 || self.alpha > Ratio::from_integer(1) {
            return Err(Error::param(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if let Some(a) = self.amplification {
            if a.subset_size == 0 || a.m_prime == 0 {
                return Err(Error::param("amplification sizes must be positive"));
            }
        }
        if let Some(s) = self.soundness {
            if !(s > 0.0) {
                return Err(Error::param("soundness must be positive"));
            }
        }
        Ok(())
    }

    /// Flat `key=value` text, one key per line, fixed order.
    pub fn to_text(&self) -> String {
        let grid: Vec<String> = self.beta_grid.iter().map(f64::to_string).collect();
        let amp = self
            .amplification
            .map_or_else(|| "none".to_string(), |a| format!("{},{}", a.subset_size, a.m_prime));
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            writeln!(s, "{k}={v}").expect("write to String");
        };
        kv("schema_version", SCHEMA_VERSION.to_string());
        kv("cube_dim", self.cube_dim.to_string());
        kv("beta_grid", grid.join(","));
        kv("chains_per_beta", self.chains_per_beta.to_string());
        kv("steps", self.steps.to_string());
        kv("burn_in", self.burn_in.to_string());
        kv("thin", self.thin.to_string());
        kv("proposal", self.proposal.to_string());
        kv("truncation_k", opt(&self.truncation_k));
        kv("amplification", amp);
        kv("alpha", self.alpha.to_string());
        kv("cluster_graph", self.cluster_graph.to_string());
        kv("max_terminals", self.max_terminals.to_string());
        kv("max_rounds", opt(&self.max_rounds));
        kv("soundness", opt(&self.soundness));
        kv("seed", self.seed.to_string());
        kv("output_dir", self.output_dir.display().to_string());
        kv("jobs", self.jobs.to_string());
        s
    }

    /// Parses [`ExperimentConfig::to_text`] output. Keys may be omitted (the
    /// default is used); unknown keys and schema mismatches are errors.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut schema_seen = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |e: &dyn std::fmt::Display| err(format!("{k}: {e}"));
            fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String>
            where
                T::Err: std::fmt::Display,
            {
                v.parse().map_err(|e: T::Err| e.to_string())
            }
            fn maybe<T: std::str::FromStr>(v: &str) -> std::result::Result<Option<T>, String>
            where
                T::Err: std::fmt::Display,
            {
                if v == "none" {
                    Ok(None)
                } else {
                    num(v).map(Some)
                }
            }
            match k {
                "schema_version" => {
                    let s: u32 = num(v).map_err(|e| bad(&e))?;
                    if s != SCHEMA_VERSION {
                        return Err(bad(&format!("unsupported schema version {s}")));
                    }
                    schema_seen = true;
                }
                "cube_dim" => cfg.cube_dim = num(v).map_err(|e| bad(&e))?,
                "beta_grid" => {
                    cfg.beta_grid = if v.is_empty() {
                        Vec::new()
                    } else {
                        v.split(',').map(|b| num(b.trim())).collect::<std::result::Result<_, _>>().map_err(|e| bad(&e))?
                    }
                }
                "chains_per_beta" => cfg.chains_per_beta = num(v).map_err(|e| bad(&e))?,
                "steps" => cfg.steps = num(v).map_err(|e| bad(&e))?,
                "burn_in" => cfg.burn_in = num(v).map_err(|e| bad(&e))?,
                "thin" => cfg.thin = num(v).map_err(|e| bad(&e))?,
                "proposal" => cfg.proposal = v.parse().map_err(|e: Error| bad(&e))?,
                "truncation_k" => cfg.truncation_k = maybe(v).map_err(|e| bad(&e))?,
                "amplification" => {
                    cfg.amplification = if v == "none" {
                        None
                    } else {
                        let (a, b) = v.split_once(',').ok_or_else(|| bad(&"expected subset_size,m_prime"))?;
                        Some(Amplification {
                            subset_size: num(a.trim()).map_err(|e| bad(&e))?,
                            m_prime: num(b.trim()).map_err(|e| bad(&e))?,
                        })
                    }
                }
                "alpha" => cfg.alpha = parse_alpha(v).map_err(|e| bad(&e))?,
                "cluster_graph" => cfg.cluster_graph = v.parse().map_err(|e: Error| bad(&e))?,
                "max_terminals" => cfg.max_terminals = num(v).map_err(|e| bad(&e))?,
                "max_rounds" => cfg.max_rounds = maybe(v).map_err(|e| bad(&e))?,
                "soundness" => cfg.soundness = maybe(v).map_err(|e| bad(&e))?,
                "seed" => cfg.seed = num(v).map_err(|e| bad(&e))?,
                "output_dir" => cfg.output_dir = PathBuf::from(v),
                "jobs" => cfg.jobs = num(v).map_err(|e| bad(&e))?,
                _ => return Err(bad(&"unknown key")),
            }
        }
        if !schema_seen {
            return Err(Error::Parse {
                line: 0,
                msg: "missing schema_version".into(),
            });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

/// One recorded chain state after clustering and decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleRecord {
    pub chain: usize,
    pub step: u64,
    /// Weight after greedy reduction by stabilizer generators.
    pub weight: usize,
    pub energy: usize,
    pub largest_component: usize,
    pub maxconn_lower: usize,
    pub maxconn_upper: usize,
    pub maxconn_exact: bool,
    pub rounds_z: usize,
    pub rounds_x: usize,
    pub syndrome_cleared: bool,
    pub logical_failure: bool,
}

impl SampleRecord {
    pub fn recovered(&self) -> bool {
        self.syndrome_cleared && !self.logical_failure
    }
}

#[derive(Clone, Debug)]
pub struct ChainOutput {
    pub chain: usize,
    pub seed: u64,
    pub run: ChainRun,
}

#[derive(Clone, Debug)]
pub struct BetaPoint {
    pub index: usize,
    pub beta: f64,
    pub chains: Vec<ChainOutput>,
    pub samples: Vec<SampleRecord>,
    pub component_histogram: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug)]
pub struct ReportBundle {
    pub config: ExperimentConfig,
    pub version: String,
    pub n: usize,
    pub m_total: usize,
    pub lambda: Ratio<u64>,
    pub max_degree: usize,
    pub soundness: f64,
    pub window: BetaWindow,
    pub points: Vec<BetaPoint>,
}

/// A code together with the check system that drives the dynamics.
#[derive(Clone, Debug)]
pub struct BuiltSystem {
    pub code: CssCode,
    pub amplified: Option<AmplifiedCheckSet>,
    pub checks: CheckSystem,
}

/// Builds the code and, if configured, the amplified family.
pub fn build_system(cfg: &ExperimentConfig) -> Result<BuiltSystem> {
    let code = build_projective_code(cfg.cube_dim)?;
    let (amplified, checks) = match cfg.amplification {
        None => (None, CheckSystem::base(code.clone())),
        Some(a) => {
            let amp = amplify(&code, a.subset_size, a.m_prime, derive_seed(cfg.seed, &[0]))?;
            (Some(amp.clone()), CheckSystem::with_amplified(code.clone(), amp)?)
        }
    };
    Ok(BuiltSystem {
        code,
        amplified,
        checks,
    })
}

/// Smallest soundness ratio over single-qubit errors.
pub fn single_qubit_soundness(checks: &CheckSystem) -> Result<f64> {
    let n = checks.n();
    let mut best = f64::INFINITY;
    for q in 0..n {
        for p in Pauli::ALL {
            let e = PauliError::single(n, q, p)?;
            best = best.min(crate::checks::soundness_ratio(checks, &e)?);
        }
    }
    Ok(best)
}

/// Runs the sweep in memory.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<(BuiltSystem, ReportBundle)> {
    cfg.validate()?;
    let system = build_system(cfg)?;
    let checks = &system.checks;
    let base_graph = CheckSystem::base(system.code.clone()).interaction_graph();
    let full_graph = checks.interaction_graph();
    let cluster_graph: &Graph = match cfg.cluster_graph {
        ClusterGraph::Base => &base_graph,
        ClusterGraph::Union => &full_graph,
    };
    let soundness = match cfg.soundness {
        Some(s) => s,
        None => single_qubit_soundness(checks)?,
    };
    let alpha_f = *cfg.alpha.numer() as f64 / *cfg.alpha.denom() as f64;
    let window = beta_window_from(full_graph.max_degree() as f64, checks.lambda_f64(), checks.n(), soundness, alpha_f)?;
    if window.is_empty() {
        log::info!("beta window is empty: [{:.4}, {:.4}]", window.low, window.high);
    }
    let decoder = Decoder::new(&system.code);
    let max_rounds = cfg.max_rounds.unwrap_or_else(|| default_max_rounds(checks.n()));

    let tasks: Vec<(usize, usize)> = (0..cfg.beta_grid.len())
        .flat_map(|b| (0..cfg.chains_per_beta).map(move |c| (b, c)))
        .collect();
    type TaskOutput = (ChainOutput, Vec<SampleRecord>, BTreeMap<usize, usize>);
    let run_task = |&(b, c): &(usize, usize)| -> Result<TaskOutput> {
        let seed = derive_seed(cfg.seed, &[1, b as u64, c as u64]);
        let chain_cfg = ChainConfig {
            beta: cfg.beta_grid[b],
            truncation_k: cfg.truncation_k,
            steps: cfg.steps,
            burn_in: cfg.burn_in,
            thin: cfg.thin,
            proposal: cfg.proposal,
            seed,
        };
        let run = run_chain(checks, &chain_cfg)?;
        let mut records = Vec::with_capacity(run.samples.len());
        let mut histogram = BTreeMap::new();
        for s in &run.samples {
            // Cluster statistics use a light representative of the error's
            // stabilizer coset; the raw chain wanders through the coset.
            let support = system.code.reduce_by_stabilizers(&s.error)?.support().ones();
            let clusters = maxconn_alpha(cluster_graph, &support, cfg.alpha, cfg.max_terminals)?;
            for (size, count) in &crate::percolation::connected_components(cluster_graph, &support)?.component_sizes {
                *histogram.entry(*size).or_insert(0) += count;
            }
            let dec = decoder.decode(&s.error, max_rounds)?;
            records.push(SampleRecord {
                chain: c,
                step: s.step,
                weight: support.len(),
                energy: s.energy,
                largest_component: clusters.largest_component(),
                maxconn_lower: clusters.maxconn_lower,
                maxconn_upper: clusters.maxconn_upper,
                maxconn_exact: clusters.exact,
                rounds_z: dec.rounds_z,
                rounds_x: dec.rounds_x,
                syndrome_cleared: dec.syndrome_cleared,
                logical_failure: dec.logical_failure,
            });
        }
        Ok((ChainOutput { chain: c, seed, run }, records, histogram))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    // Collecting an indexed parallel iterator keeps task order.
    let results: Vec<Result<TaskOutput>> = pool.install(|| tasks.par_iter().map(run_task).collect());

    let mut points: Vec<BetaPoint> = cfg
        .beta_grid
        .iter()
        .enumerate()
        .map(|(index, &beta)| BetaPoint {
            index,
            beta,
            chains: Vec::new(),
            samples: Vec::new(),
            component_histogram: BTreeMap::new(),
        })
        .collect();
    for ((b, _), r) in tasks.iter().zip(results) {
        let (out, records, histogram) = r?;
        points[*b].chains.push(out);
        points[*b].samples.extend(records);
        for (size, count) in histogram {
            *points[*b].component_histogram.entry(size).or_insert(0) += count;
        }
    }
    let lambda = checks.lambda();
    let bundle = ReportBundle {
        config: cfg.clone(),
        version: crate::VERSION.to_string(),
        n: checks.n(),
        m_total: checks.m_total(),
        lambda,
        max_degree: full_graph.max_degree(),
        soundness,
        window,
        points,
    };
    Ok((system, bundle))
}

/// One row of the summary table.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub beta: f64,
    pub beta_over_low: f64,
    pub beta_over_high: f64,
    pub samples: usize,
    pub mean_weight: f64,
    pub max_maxconn: usize,
    pub success_rate: f64,
    pub logical_failure_rate: f64,
    pub failures: usize,
    pub failure_ci: (f64, f64),
    pub mean_rounds: f64,
}

pub const SUMMARY_HEADER: &str = "beta,beta_over_window_low,beta_over_window_high,samples,mean_weight,max_maxconn,success_rate,logical_failure_rate,failures,failure_ci_low,failure_ci_high,mean_rounds";

impl SummaryRow {
    fn from_records(beta: f64, window: BetaWindow, records: &[SampleRecord]) -> SummaryRow {
        let n = records.len();
        let mean = |f: &dyn Fn(&SampleRecord) -> f64| {
            if n == 0 {
                0.0
            } else {
                records.iter().map(f).sum::<f64>() / n as f64
            }
        };
        let failures = records.iter().filter(|r| !r.recovered()).count();
        let logical = records.iter().filter(|r| r.logical_failure).count();
        SummaryRow {
            beta,
            beta_over_low: beta / window.low,
            beta_over_high: beta / window.high,
            samples: n,
            mean_weight: mean(&|r| r.weight as f64),
            max_maxconn: records.iter().map(|r| r.maxconn_upper).max().unwrap_or(0),
            success_rate: if n == 0 { 0.0 } else { (n - failures) as f64 / n as f64 },
            logical_failure_rate: if n == 0 { 0.0 } else { logical as f64 / n as f64 },
            failures,
            failure_ci: wilson_interval(failures as u64, n as u64, Z95),
            mean_rounds: mean(&|r| r.rounds_z.max(r.rounds_x) as f64),
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{:.6},{:.6},{},{:.6},{},{:.6},{:.6},{},{:.6},{:.6},{:.6}",
            self.beta,
            self.beta_over_low,
            self.beta_over_high,
            self.samples,
            self.mean_weight,
            self.max_maxconn,
            self.success_rate,
            self.logical_failure_rate,
            self.failures,
            self.failure_ci.0,
            self.failure_ci.1,
            self.mean_rounds
        )
    }
}

/// One summary row per β.
pub fn report_summary(bundle: &ReportBundle) -> Vec<SummaryRow> {
    bundle
        .points
        .iter()
        .map(|p| SummaryRow::from_records(p.beta, bundle.window, &p.samples))
        .collect()
}

pub fn summary_csv(preamble: &str, rows: &[SummaryRow]) -> String {
    let mut s = String::from(preamble);
    s.push_str(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

const DECODE_HEADER: &str = "chain,step,weight,energy,rounds_z,rounds_x,syndrome_cleared,logical_failure";
const CLUSTER_HEADER: &str = "chain,step,weight,largest_component,maxconn_lower,maxconn_upper,exact";

fn bool01(b: bool) -> u8 {
    u8::from(b)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// `# version=... seed=...` header line used by every emitted file.
pub fn preamble(version: &str, seed: u64) -> String {
    format!("# version={version} seed={seed}\n")
}

/// Writes the code bundle: check matrices, qubit faces and the amplified
/// family when present.
pub fn write_code_bundle(dir: &Path, system: &BuiltSystem, version: &str, seed: u64) -> Result<()> {
    let pre = preamble(version, seed);
    let code = &system.code;
    let dims = format!("# cube_dim={} n={} k={}\n", opt(&code.cube_dim()), code.n(), code.logical_qubits());
    write_file(&dir.join("h_x.txt"), format!("{pre}{dims}{}", code.h_x().to_text()).as_bytes())?;
    write_file(&dir.join("h_z.txt"), format!("{pre}{dims}{}", code.h_z().to_text()).as_bytes())?;
    if let Some(index) = code.face_index() {
        let faces = faces_to_text(index.middle.faces().iter());
        write_file(&dir.join("qubits.txt"), format!("{pre}{faces}").as_bytes())?;
    }
    if let Some(amp) = &system.amplified {
        let mut buf = pre.into_bytes();
        amp.write_text(&mut buf).map_err(|e| Error::io(dir.join("amplified.txt"), e))?;
        write_file(&dir.join("amplified.txt"), &buf)?;
    }
    Ok(())
}

/// Loads `h_x.txt` and `h_z.txt` from a code bundle directory.
pub fn read_code_bundle(dir: &Path) -> Result<CssCode> {
    let read = |name: &str| -> Result<crate::gf2::BitMatrix> {
        let path = dir.join(name);
        let f = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        crate::gf2::BitMatrix::read_text(std::io::BufReader::new(f))
    };
    CssCode::new(read("h_x.txt")?, read("h_z.txt")?)
}

/// Writes the full report tree and returns the summary rows.
pub fn write_bundle(dir: &Path, system: &BuiltSystem, bundle: &ReportBundle) -> Result<Vec<SummaryRow>> {
    let cfg = &bundle.config;
    let pre = preamble(&bundle.version, cfg.seed);
    write_file(&dir.join("config.txt"), format!("{pre}{}", cfg.to_text()).as_bytes())?;
    write_code_bundle(&dir.join("code"), system, &bundle.version, cfg.seed)?;
    for p in &bundle.points {
        let tag = format!("b{:02}", p.index);
        let window = format!(
            "# beta={} window_low={} window_high={} alpha={} n={} m_total={}\n",
            p.beta, bundle.window.low, bundle.window.high, cfg.alpha, bundle.n, bundle.m_total
        );
        for ch in &p.chains {
            let mut buf = Vec::new();
            let chain_cfg = ChainConfig {
                beta: p.beta,
                truncation_k: cfg.truncation_k,
                steps: cfg.steps,
                burn_in: cfg.burn_in,
                thin: cfg.thin,
                proposal: cfg.proposal,
                seed: ch.seed,
            };
            write_sample_log(&mut buf, &pre, &system.checks, &chain_cfg, &ch.run)
                .map_err(|e| Error::io(dir.join("samples"), e))?;
            write_file(&dir.join("samples").join(format!("{tag}_c{:03}.csv", ch.chain)), &buf)?;
            let errors: String = ch.run.samples.iter().map(|s| format!("{}\t{}\n", s.step, s.error)).collect();
            write_file(
                &dir.join("samples").join(format!("{tag}_c{:03}_errors.txt", ch.chain)),
                format!("{pre}{errors}").as_bytes(),
            )?;
        }
        let mut clusters = format!("{pre}{window}{CLUSTER_HEADER}\n");
        let mut decodes = format!("{pre}{window}{DECODE_HEADER}\n");
        for r in &p.samples {
            writeln!(
                clusters,
                "{},{},{},{},{},{},{}",
                r.chain,
                r.step,
                r.weight,
                r.largest_component,
                r.maxconn_lower,
                r.maxconn_upper,
                bool01(r.maxconn_exact)
            )
            .expect("write to String");
            writeln!(
                decodes,
                "{},{},{},{},{},{},{},{}",
                r.chain,
                r.step,
                r.weight,
                r.energy,
                r.rounds_z,
                r.rounds_x,
                bool01(r.syndrome_cleared),
                bool01(r.logical_failure)
            )
            .expect("write to String");
        }
        write_file(&dir.join("clusters").join(format!("{tag}.csv")), clusters.as_bytes())?;
        write_file(&dir.join("decodes").join(format!("{tag}.csv")), decodes.as_bytes())?;
        let mut hist = format!("{pre}{window}size,count\n");
        for (s, c) in &p.component_histogram {
            writeln!(hist, "{s},{c}").expect("write to String");
        }
        let lower = p.samples.iter().map(|r| r.maxconn_lower).max().unwrap_or(0);
        let upper = p.samples.iter().map(|r| r.maxconn_upper).max().unwrap_or(0);
        let exact = p.samples.iter().all(|r| r.maxconn_exact);
        writeln!(hist, "# summary alpha={} maxconn_lower={lower} maxconn_upper={upper} exact={exact}", cfg.alpha)
            .expect("write to String");
        write_file(&dir.join("clusters").join(format!("{tag}_histogram.csv")), hist.as_bytes())?;
    }
    let window_line = format!("# window_low={} window_high={} soundness={} max_degree={}\n", bundle.window.low, bundle.window.high, bundle.soundness, bundle.max_degree);
    let rows = report_summary(bundle);
    write_file(&dir.join("summary.csv"), summary_csv(&format!("{pre}{window_line}"), &rows).as_bytes())?;
    write_manifest(dir, &bundle.version, cfg.seed)?;
    Ok(rows)
}

/// Recomputes the summary from the `decodes/` and `clusters/` logs alone.
pub fn summary_from_logs(dir: &Path) -> Result<Vec<SummaryRow>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir.join("decodes"))
        .map_err(|e| Error::io(dir.join("decodes"), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    let mut rows = Vec::new();
    for path in files {
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let clusters_path = dir.join("clusters").join(path.file_name().expect("file name"));
        let ctext = fs::read_to_string(&clusters_path).map_err(|e| Error::io(&clusters_path, e))?;
        let mut header = BTreeMap::new();
        for line in text.lines().filter(|l| l.starts_with("# beta=")) {
            for kv in line[2..].split_whitespace() {
                if let Some((k, v)) = kv.split_once('=') {
                    header.insert(k.to_string(), v.to_string());
                }
            }
        }
        let get = |k: &str| -> Result<f64> {
            header
                .get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("{}: missing {k}", path.display()) })
        };
        let window = BetaWindow { low: get("window_low")?, high: get("window_high")? };
        let data = |t: &str| -> Vec<Vec<u64>> {
            t.lines()
                .filter(|l| !l.starts_with('#') && !l.starts_with("chain"))
                .map(|l| l.split(',').filter_map(|x| x.parse().ok()).collect())
                .collect()
        };
        let decodes = data(&text);
        let clusters = data(&ctext);
        if decodes.len() != clusters.len() {
            return Err(Error::Parse { line: 0, msg: format!("{}: cluster and decode logs differ in length", path.display()) });
        }
        let records: Vec<SampleRecord> = decodes
            .iter()
            .zip(&clusters)
            .map(|(d, c)| SampleRecord {
                chain: d[0] as usize,
                step: d[1],
                weight: d[2] as usize,
                energy: d[3] as usize,
                largest_component: c[3] as usize,
                maxconn_lower: c[4] as usize,
                maxconn_upper: c[5] as usize,
                maxconn_exact: c[6] == 1,
                rounds_z: d[4] as usize,
                rounds_x: d[5] as usize,
                syndrome_cleared: d[6] == 1,
                logical_failure: d[7] == 1,
            })
            .collect();
        rows.push(SummaryRow::from_records(get("beta")?, window, &records));
    }
    Ok(rows)
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            out.push(path.strip_prefix(root).expect("under root").to_path_buf());
        }
    }
    Ok(())
}

/// Writes `manifest.txt`: every other file with its size and SHA-256.
pub fn write_manifest(dir: &Path, version: &str, seed: u64) -> Result<()> {
    let mut files = Vec::new();
    collect_files(dir, dir, &mut files)?;
    files.retain(|p| p != Path::new("manifest.txt"));
    files.sort();
    let mut s = preamble(version, seed);
    s.push_str("path,bytes,sha256\n");
    for rel in files {
        let bytes = fs::read(dir.join(&rel)).map_err(|e| Error::io(dir.join(&rel), e))?;
        let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        // Forward slashes keep the manifest platform-independent.
        let name = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
        writeln!(s, "{name},{},{digest}", bytes.len()).expect("write to String");
    }
    write_file(&dir.join("manifest.txt"), s.as_bytes())
}

/// Reads a `step<TAB>pauli` error log as written under `samples/`.
pub fn read_error_log(path: &Path) -> Result<Vec<(u64, PauliError)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let parse = |msg: &str| Error::Parse { line: i + 1, msg: msg.to_string() };
        let (step, pauli) = line.split_once('\t').ok_or_else(|| parse("expected step<TAB>pauli"))?;
        let step = step.trim().parse().map_err(|_| parse("bad step"))?;
        let e = pauli.trim().parse().map_err(|_| parse("bad Pauli string"))?;
        out.push((step, e));
    }
    Ok(out)
}

/// Runs the sweep and writes everything under `cfg.output_dir`.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<(ReportBundle, Vec<SummaryRow>)> {
    let (system, bundle) = run_sweep(cfg)?;
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::io(&cfg.output_dir, e))?;
    let rows = write_bundle(&cfg.output_dir, &system, &bundle)?;
    Ok((bundle, rows))
}
