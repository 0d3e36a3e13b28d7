//! The `fewbody` command line: spectra, wavefunction values, verification,
//! admissibility and degeneracy counts.
//!
//! Output goes to stdout and, with `--out`, the same bytes to a file.
//! Exit codes: 0 success, 1 verification failure, 2 configuration or input
//! error.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::admissibility::{admissible_region_scan, check_branch, region_boundary, Axis, PhiCriterion};
use crate::coords::Configuration;
use crate::model::{build_model, BranchSelector, Couplings, Model, ModelError, ModelKind, Sign, Statistics};
use crate::numfmt::g15;
use crate::oracle::suite::write_csv;
use crate::oracle::{verify_suite, OracleError, SuiteOptions};
use crate::spectrum::{composite_count, energy, enumerate_levels, QuantumNumbers};
use crate::wavefunc::{eval_psi, NormalizedState, WaveError};

use config::FileConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fewbody", version, about = "Exactly solvable four-, five- and six-body models on the line")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// four-harmonic, four-coulomb, five-harmonic or six-harmonic
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Flipped exponents, e.g. `-a,+c`, or `regular`
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub branch: Option<String>,
    /// bose or fermi
    #[arg(long, global = true)]
    pub statistics: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Also write the output to this file
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML run configuration; flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda2: Option<f64>,
    /// Pair coupling of the five-body model
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub g: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Energy levels with degeneracies and member quantum numbers
    Spectrum {
        /// Upper energy bound (default: ground + 8ω, or 0 for Coulomb)
        #[arg(long, allow_negative_numbers = true)]
        emax: Option<f64>,
    },
    /// Normalized wavefunction values at configurations read from a CSV file
    Wavefn {
        /// CSV with one configuration (N coordinates) per line
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        qn: QnArgs,
    },
    /// Run the numerical verification suite
    Verify {
        /// Quantum-number depth of the suite
        #[arg(long)]
        depth: Option<u32>,
        /// Configurations per full-Hamiltonian check
        #[arg(long)]
        configs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Admissibility constraints of the branch, or a region scan
    Admissible {
        /// square-integrable (default) or dirichlet
        #[arg(long)]
        criterion: Option<String>,
        /// Scan λ (λ₁ for six bodies) over lo:hi:count
        #[arg(long, allow_hyphen_values = true)]
        scan_lambda: Option<Axis>,
        /// g axis of the scan, lo:hi:count or a value
        #[arg(long, allow_hyphen_values = true)]
        scan_g: Option<Axis>,
        /// μ axis of the scan, lo:hi:count or a value
        #[arg(long, allow_hyphen_values = true)]
        scan_mu: Option<Axis>,
        /// Write boundary points of the scanned region to this CSV file
        #[arg(long)]
        boundary: Option<PathBuf>,
    },
    /// Composite degeneracy counts against brute-force enumeration
    Degeneracy {
        #[arg(long, default_value_t = 10)]
        max_n: u32,
    },
}

#[derive(Debug, Args)]
pub struct QnArgs {
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    #[arg(long, default_value_t = 0)]
    pub l: u32,
    #[arg(long, default_value_t = 0)]
    pub j: u32,
    #[arg(long, default_value_t = 0)]
    pub m: u32,
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub n2: u32,
    /// Sector of the θ normalization half, + or -
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    pub w_sector: String,
    /// Sector of the β normalization half (five-body), + or -
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    pub z_sector: String,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}, line {line}: {message}")]
    Input { path: String, line: u64, message: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Wave(#[from] WaveError),
    #[error("{failed} of {total} checks failed")]
    VerificationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::VerificationFailed { .. } => EXIT_VERIFY_FAILED,
            _ => EXIT_CONFIG,
        }
    }
}

/// Everything a command needs, validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub branch: BranchSelector,
    pub statistics: Statistics,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub file: FileConfig,
}

impl RunConfig {
    pub fn resolve(global: &GlobalArgs) -> Result<Self, CliError> {
        let file = match &global.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| io_err(path, source))?;
                FileConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let pick = |flag: &Option<String>, key: &str| flag.clone().or_else(|| file.strings.get(key).cloned());
        let kind: ModelKind = pick(&global.model, "model").as_deref().unwrap_or("four-harmonic").parse()?;
        let branch: BranchSelector = pick(&global.branch, "branch").as_deref().unwrap_or("regular").parse()?;
        branch.check_for(kind)?;
        let statistics: Statistics = pick(&global.statistics, "statistics").as_deref().unwrap_or("bose").parse()?;
        let format = match pick(&None, "format").as_deref() {
            _ if global.format.is_some() => global.format.unwrap_or(Format::Table),
            None | Some("table") => Format::Table,
            Some("csv") => Format::Csv,
            Some(other) => return Err(CliError::Config(format!("unknown format '{other}' (expected table or csv)"))),
        };
        let flags = [
            ("omega", global.omega),
            ("eta", global.eta),
            ("lambda", global.lambda),
            ("lambda1", global.lambda1),
            ("lambda2", global.lambda2),
            ("kappa", global.kappa),
            ("g", global.g),
            ("mu", global.mu),
        ];
        let mut cp = Couplings::default();
        for (key, flag) in flags {
            if let Some(v) = flag.or_else(|| file.coupling(kind, key)) {
                let slot = match key {
                    "omega" => &mut cp.omega,
                    "eta" => &mut cp.eta,
                    "lambda" => &mut cp.lambda,
                    "lambda1" => &mut cp.lambda1,
                    "lambda2" => &mut cp.lambda2,
                    "kappa" => &mut cp.kappa_pair,
                    "g" => &mut cp.g,
                    _ => &mut cp.mu,
                };
                *slot = v;
            }
        }
        let model = build_model(kind, cp)?;
        Ok(Self { model, branch, statistics, format, out: global.out.clone(), file })
    }

    fn number(&self, key: &str) -> Option<f64> {
        self.file.numbers.get(key).copied()
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), source }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Normal output goes to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let mut buffer = Vec::new();
    let outcome = RunConfig::resolve(&cli.global).and_then(|cfg| {
        let result = dispatch(&cli.command, &cfg, &mut buffer);
        if let Some(path) = &cfg.out {
            fs::write(path, &buffer).map_err(|source| io_err(path, source))?;
        }
        result
    });
    let _ = stdout.write_all(&buffer);
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command, cfg: &RunConfig, out: &mut Vec<u8>) -> Result<(), CliError> {
    match command {
        Command::Spectrum { emax } => cmd_spectrum(cfg, emax.or_else(|| cfg.number("emax")), out),
        Command::Wavefn { input, qn } => cmd_wavefn(cfg, input, qn, out),
        Command::Verify { depth, configs, seed } => {
            let mut options = SuiteOptions::default();
            if let Some(d) = depth.or_else(|| cfg.number("depth").map(|v| v as u32)) {
                options.depth = d;
            }
            if let Some(c) = configs.or_else(|| cfg.number("configs").map(|v| v as usize)) {
                options.configs = c;
            }
            if let Some(s) = seed.or_else(|| cfg.number("seed").map(|v| v as u64)) {
                options.seed = s;
            }
            cmd_verify(cfg, &options, out)
        }
        Command::Admissible { criterion, scan_lambda, scan_g, scan_mu, boundary } => {
            let criterion = criterion.clone().or_else(|| cfg.file.strings.get("criterion").cloned());
            let criterion: PhiCriterion = match criterion {
                Some(c) => c.parse().map_err(CliError::Config)?,
                None => PhiCriterion::default(),
            };
            let scan = Scan { lambda: *scan_lambda, g: *scan_g, mu: *scan_mu, boundary: boundary.clone() };
            cmd_admissible(cfg, criterion, &scan, out)
        }
        Command::Degeneracy { max_n } => cmd_degeneracy(cfg, *max_n, out),
    }
}

fn emit(out: &mut Vec<u8>, line: impl AsRef<str>) {
    out.extend_from_slice(line.as_ref().as_bytes());
    out.push(b'\n');
}

fn csv_line(fields: &[String]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(fields).expect("writing to memory cannot fail");
    let mut s = String::from_utf8(w.into_inner().expect("flush to memory")).expect("fields are UTF-8");
    s.pop();
    s
}

fn qn_tag(kind: ModelKind, qn: &QuantumNumbers) -> String {
    qn.indices(kind).iter().map(|(n, v)| format!("{n}={v}")).collect::<Vec<_>>().join(" ")
}

/// Levels up to `emax`, ascending.
pub fn cmd_spectrum(cfg: &RunConfig, emax: Option<f64>, out: &mut Vec<u8>) -> Result<(), CliError> {
    let model = &cfg.model;
    let ground = energy(model, &cfg.branch, &QuantumNumbers::ground()).map_err(ModelOrLadder::from)?;
    let emax = emax.unwrap_or(if model.kind.is_coulomb() { 0.0 } else { ground + 8.0 * model.couplings.omega });
    let levels = enumerate_levels(model, &cfg.branch, emax);
    if cfg.format == Format::Csv {
        emit(out, "energy,degeneracy,composite,members");
    }
    for level in &levels {
        let members: Vec<String> = level.members.iter().map(|q| qn_tag(model.kind, q)).collect();
        let composite = level.composite.map(|c| c.to_string()).unwrap_or_default();
        match cfg.format {
            Format::Table => {
                let composite = if composite.is_empty() { "mixed".to_string() } else { composite };
                emit(
                    out,
                    format!(
                        "E={} deg={} composite={} members=[{}]",
                        g15(level.energy),
                        level.degeneracy,
                        composite,
                        members.join("; ")
                    ),
                );
            }
            Format::Csv => emit(
                out,
                csv_line(&[g15(level.energy), level.degeneracy.to_string(), composite, members.join(";")]),
            ),
        }
    }
    Ok(())
}

// spectrum errors surface as configuration errors naming the constraint
struct ModelOrLadder;

impl ModelOrLadder {
    #[allow(clippy::new_ret_no_self)]
    fn from(e: crate::spectrum::SpectrumError) -> CliError {
        CliError::Config(e.to_string())
    }
}

fn parse_sector(s: &str, name: &str) -> Result<Sign, CliError> {
    match s.trim() {
        "+" | "+1" | "plus" => Ok(Sign::Plus),
        "-" | "-1" | "minus" => Ok(Sign::Minus),
        other => Err(CliError::Config(format!("{name} must be + or -, got '{other}'"))),
    }
}

/// `Ψ` at each configuration of `input`. Blank lines and `#` comments are
/// skipped; singular configurations produce a flagged row.
pub fn cmd_wavefn(cfg: &RunConfig, input: &Path, qn: &QnArgs, out: &mut Vec<u8>) -> Result<(), CliError> {
    let kind = cfg.model.kind;
    let qn = QuantumNumbers { k: qn.k, l: qn.l, j: qn.j, m: qn.m, n: qn.n, n2: qn.n2, ..QuantumNumbers::ground() }
        .with_statistics(cfg.statistics)
        .with_sectors(parse_sector(&qn.w_sector, "w-sector")?, parse_sector(&qn.z_sector, "z-sector")?);
    let state = NormalizedState::new(&cfg.model, &cfg.branch, &qn)?;
    let text = fs::read_to_string(input).map_err(|source| io_err(input, source))?;
    let path = input.display().to_string();
    let n = kind.particles();
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| CliError::Input { path: path.clone(), line: i as u64 + 1, message };
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != n {
            return Err(bad(format!("expected {n} coordinates, found {}", fields.len())));
        }
        let x = fields
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| bad(format!("'{f}' is not a number"))))
            .collect::<Result<Vec<f64>, _>>()?;
        let cfg_x = Configuration::new(x.clone()).map_err(|e| bad(e.to_string()))?;
        rows.push((x, eval_psi(&state, &cfg_x)));
    }
    let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain(["psi".to_string(), "flag".to_string()]).collect();
    match cfg.format {
        Format::Csv => emit(out, header.join(",")),
        Format::Table => emit(out, header.join(" ")),
    }
    for (x, value) in rows {
        let (psi, flag) = match value {
            Ok(v) => (g15(v), String::new()),
            Err(WaveError::Singular { manifold }) => (String::new(), format!("singular:{manifold}")),
            Err(e) => return Err(e.into()),
        };
        let mut fields: Vec<String> = x.iter().map(|v| g15(*v)).collect();
        fields.push(psi);
        fields.push(flag);
        match cfg.format {
            Format::Csv => emit(out, fields.join(",")),
            Format::Table => emit(out, fields.iter().filter(|f| !f.is_empty()).cloned().collect::<Vec<_>>().join(" ")),
        }
    }
    Ok(())
}

/// The verification suite; fails with exit code 1 when any check fails.
pub fn cmd_verify(cfg: &RunConfig, options: &SuiteOptions, out: &mut Vec<u8>) -> Result<(), CliError> {
    let reports = verify_suite(&cfg.model, &cfg.branch, options)?;
    match cfg.format {
        Format::Csv => write_csv(&reports, &mut *out).map_err(|source| CliError::Io { path: "<output>".into(), source })?,
        Format::Table => {
            for r in &reports {
                let status = if r.pass { "PASS" } else { "FAIL" };
                let mut line = format!(
                    "{status} {} expected={} got={} {}_dev={} tol={}",
                    r.name,
                    g15(r.expected),
                    g15(r.got),
                    r.measure,
                    g15(if r.measure == crate::oracle::suite::Measure::Relative { r.rel_dev } else { r.abs_dev }),
                    g15(r.tol)
                );
                if !r.notes.is_empty() {
                    line.push_str(&format!(" | {}", r.notes));
                }
                emit(out, line);
            }
        }
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    if cfg.format == Format::Table {
        emit(out, format!("summary: {} of {} checks passed", reports.len() - failed, reports.len()));
    }
    if failed > 0 {
        return Err(CliError::VerificationFailed { failed, total: reports.len() });
    }
    Ok(())
}

pub struct Scan {
    pub lambda: Option<Axis>,
    pub g: Option<Axis>,
    pub mu: Option<Axis>,
    pub boundary: Option<PathBuf>,
}

/// The constraint table, or with any scan axis a `lambda,g,mu,verdict`
/// region CSV (unscanned axes fixed at the configured couplings).
pub fn cmd_admissible(cfg: &RunConfig, criterion: PhiCriterion, scan: &Scan, out: &mut Vec<u8>) -> Result<(), CliError> {
    let model = &cfg.model;
    let cp = model.couplings;
    if scan.lambda.is_none() && scan.g.is_none() && scan.mu.is_none() {
        let verdict = check_branch(model, &cfg.branch, criterion);
        match cfg.format {
            Format::Csv => emit(out, "name,inequality,margin,satisfied,extended"),
            Format::Table => emit(out, format!("{} branch {} criterion {}", model.kind, cfg.branch, criterion)),
        }
        for r in &verdict.records {
            match cfg.format {
                Format::Csv => emit(
                    out,
                    csv_line(&[
                        r.name.clone(),
                        r.inequality.clone(),
                        g15(r.margin),
                        r.satisfied.to_string(),
                        r.extended.to_string(),
                    ]),
                ),
                Format::Table => emit(
                    out,
                    format!(
                        "{} {} margin={} ({}){}",
                        if r.satisfied { "ok  " } else { "FAIL" },
                        r.name,
                        g15(r.margin),
                        r.inequality,
                        if r.extended { " [extended]" } else { "" }
                    ),
                ),
            }
        }
        if cfg.format == Format::Table {
            let violated: Vec<&str> = verdict.violated().map(|r| r.name.as_str()).collect();
            if verdict.admissible {
                emit(out, "verdict: admissible");
            } else {
                emit(out, format!("verdict: inadmissible (violated: {})", violated.join("; ")));
            }
        }
        return Ok(());
    }
    let lambda0 = if model.kind == ModelKind::SixHarmonic { cp.lambda1 } else { cp.lambda };
    let lambda = scan.lambda.unwrap_or(Axis::fixed(lambda0));
    let g = scan.g.unwrap_or(Axis::fixed(cp.g));
    let mu = scan.mu.unwrap_or(Axis::fixed(cp.mu));
    let points = admissible_region_scan(model.kind, cp, &cfg.branch, criterion, lambda, g, mu)?;
    emit(out, "lambda,g,mu,verdict");
    for p in &points {
        let verdict = match (p.valid, p.admissible) {
            (false, _) => "invalid",
            (true, true) => "admissible",
            (true, false) => "inadmissible",
        };
        emit(out, format!("{},{},{},{verdict}", g15(p.lambda), g15(p.g), g15(p.mu)));
    }
    if let Some(path) = &scan.boundary {
        let mut text = String::from("lambda,g,mu\n");
        for (l, gv, m) in region_boundary(&points, lambda.values().len()) {
            text.push_str(&format!("{},{},{}\n", g15(l), g15(gv), g15(m)));
        }
        fs::write(path, text).map_err(|source| io_err(path, source))?;
    }
    Ok(())
}

/// Index tuples per composite from the coin-change count and from the
/// enumerated zero-coupling spectrum (k = 0 members of each level).
pub fn cmd_degeneracy(cfg: &RunConfig, max_n: u32, out: &mut Vec<u8>) -> Result<(), CliError> {
    let kind = cfg.model.kind;
    let free = build_model(kind, Couplings { omega: cfg.model.couplings.omega, eta: cfg.model.couplings.eta, ..Default::default() })?;
    let enumerated = enumerated_composites(&free, max_n);
    match cfg.format {
        Format::Csv => emit(out, "composite,count,enumerated"),
        Format::Table => emit(out, format!("{kind} composite degeneracies (k = 0, zero couplings)")),
    }
    for n in 0..=max_n {
        let count = composite_count(kind, n);
        let found = enumerated[n as usize];
        match cfg.format {
            Format::Csv => emit(out, format!("{n},{count},{found}")),
            Format::Table => emit(out, format!("N={n} count={count} enumerated={found}")),
        }
    }
    Ok(())
}

/// Members with `k = 0` per composite `0..=max_n`, from the levels of a
/// zero-coupling model.
pub fn enumerated_composites(free: &Model, max_n: u32) -> Vec<u64> {
    let ground = energy(free, &BranchSelector::REGULAR, &QuantumNumbers::ground()).expect("zero couplings admit the ground state");
    // composite N shifts the zero-coupling energy by 2ωN (harmonic), or moves
    // κ by N (Coulomb); bound the enumeration just past N = max_n
    let emax = if free.kind.is_coulomb() {
        let kappa0 = (-free.couplings.eta.powi(2) / ground).sqrt();
        let k = kappa0 + max_n as f64 + 0.5;
        -free.couplings.eta.powi(2) / k.powi(2)
    } else {
        ground + 2.0 * free.couplings.omega * (max_n as f64 + 0.5)
    };
    let mut counts = vec![0u64; max_n as usize + 1];
    for level in enumerate_levels(free, &BranchSelector::REGULAR, emax) {
        for q in level.members.iter().filter(|q| q.k == 0) {
            let c = q.composite(free.kind);
            if c <= max_n {
                counts[c as usize] += 1;
            }
        }
    }
    counts
}
