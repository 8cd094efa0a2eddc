//! Command-line front end. Every command writes plain `key=value` text or
//! CSV; numbers carry 12 significant digits.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 certification failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::filtering::{default_schedule, trajectory, FilterMode};
use crate::frontier::{
    certify_all, mems_curve, scan_with_points, werner_curve, CurvePoint, MixednessMetric,
};
use crate::measures::measure_report;
use crate::sampling::{EnsembleKind, EnsembleSpec};
use crate::states::{bell, maximally_mixed, mems, parse_matrix_text, werner, BellKind, DensityMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CERT_FAIL: i32 = 3;

/// Caps the worker thread count when set.
pub const THREADS_ENV: &str = "MEMS_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "mems-lab",
    version,
    about = "Two-qubit entanglement vs. mixedness: measures, MEMS curves, frontier scans and filtering"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print every measure of one state
    Measure(MeasureArgs),
    /// Emit the analytic Werner or MEMS curve as CSV
    Curve(CurveArgs),
    /// Sample an ensemble and emit its points and binned envelope as CSV
    Scan(ScanArgs),
    /// Check sampled states against the analytic linear-entropy envelope
    Certify(CertifyArgs),
    /// Apply a κ-sweep of local filters to mems(γ) and emit the trajectory
    Concentrate(ConcentrateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Werner,
    Mems,
    #[value(name = "bell-phi+")]
    BellPhiPlus,
    #[value(name = "bell-phi-")]
    BellPhiMinus,
    #[value(name = "bell-psi+")]
    BellPsiPlus,
    #[value(name = "bell-psi-")]
    BellPsiMinus,
    Mixed,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// Matrix file in the text format (4 rows of `re,im` entries)
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, conflicts_with = "input")]
    pub family: Option<Family>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveFamily {
    Werner,
    Mems,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_enum)]
    pub family: CurveFamily,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Output path; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleName {
    /// Ginibre states of one rank (`--rank`, default 4)
    Ginibre,
    /// Ginibre states cycling through ranks 1–4
    GinibreRanks,
    /// Dirichlet mixtures of `--mixture` Haar pure states
    PureMixture,
    /// Perturbations about mems(γ); γ random per sample unless `--gamma` is given
    PerturbMems,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub count: i64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub mixture: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 0.02, allow_negative_numbers = true)]
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricName {
    Linear,
    Vn,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum, default_value = "ginibre")]
    pub ensemble: EnsembleName,
    #[command(flatten)]
    pub sampling: EnsembleArgs,
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
    #[arg(long, value_enum, default_value = "linear")]
    pub metric: MetricName,
    /// Points CSV (`tangle,mixedness`)
    #[arg(long)]
    pub out: PathBuf,
    /// Envelope CSV (`bin_lo,bin_hi,max_tangle`); defaults to `<out>.envelope.csv`
    #[arg(long)]
    pub envelope_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, value_enum, default_value = "ginibre-ranks")]
    pub ensemble: EnsembleName,
    #[command(flatten)]
    pub sampling: EnsembleArgs,
    #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    TwoSided,
    OneSided,
}

#[derive(Debug, Args)]
pub struct ConcentrateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, value_enum, default_value = "two-sided")]
    pub mode: ModeName,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Certification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses the thread cap from the environment.
pub fn threads_from_env() -> std::result::Result<Option<usize>, String> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got `{v}`")),
        },
    }
}

/// Runs one invocation with an explicit worker count (`None`: rayon default).
pub fn run_with_threads<I, T>(
    args: I,
    threads: Option<usize>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let mut buf = Vec::new();
    let result = match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command, &mut buf)),
            Err(e) => Err(Failure::Usage(format!("cannot start worker pool: {e}"))),
        },
        None => dispatch(&cli.command, &mut buf),
    };
    let flushed = stdout.write_all(&buf).and_then(|()| stdout.flush());
    let result = result.and_then(|()| flushed.map_err(Failure::from));
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Certification) => EXIT_CERT_FAIL,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

/// Runs one invocation, honoring `MEMS_LAB_THREADS`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match threads_from_env() {
        Ok(threads) => run_with_threads(args, threads, stdout, stderr),
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cmd: &Command, stdout: &mut dyn Write) -> CmdResult {
    match cmd {
        Command::Measure(a) => cmd_measure(a, stdout),
        Command::Curve(a) => cmd_curve(a, stdout),
        Command::Scan(a) => cmd_scan(a),
        Command::Certify(a) => cmd_certify(a, stdout),
        Command::Concentrate(a) => cmd_concentrate(a, stdout),
    }
}

fn require_gamma(gamma: Option<f64>, family: &str) -> std::result::Result<f64, Failure> {
    gamma.ok_or_else(|| Failure::Usage(format!("--family {family} needs --gamma")))
}

fn family_state(family: Family, gamma: Option<f64>) -> std::result::Result<DensityMatrix, Failure> {
    Ok(match family {
        Family::Werner => werner(require_gamma(gamma, "werner")?)?,
        Family::Mems => mems(require_gamma(gamma, "mems")?)?,
        Family::BellPhiPlus => bell(BellKind::PhiPlus),
        Family::BellPhiMinus => bell(BellKind::PhiMinus),
        Family::BellPsiPlus => bell(BellKind::PsiPlus),
        Family::BellPsiMinus => bell(BellKind::PsiMinus),
        Family::Mixed => maximally_mixed(),
    })
}

fn cmd_measure(a: &MeasureArgs, stdout: &mut dyn Write) -> CmdResult {
    let rho = match (&a.input, a.family) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            DensityMatrix::new(parse_matrix_text(&text)?)?
        }
        (None, Some(family)) => family_state(family, a.gamma)?,
        _ => {
            return Err(Failure::Usage(
                "give either a matrix file or --family".into(),
            ))
        }
    };
    let report = measure_report(&rho);
    for (key, value) in report.fields() {
        writeln!(stdout, "{key}={}", fmt_num(value))?;
    }
    Ok(())
}

fn open_output<'a>(
    path: &Option<PathBuf>,
    stdout: &'a mut dyn Write,
) -> io::Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn write_curve(points: &[CurvePoint], out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "gamma,tangle,linear_entropy")?;
    for p in points {
        writeln!(
            out,
            "{},{},{}",
            fmt_num(p.gamma),
            fmt_num(p.tangle),
            fmt_num(p.linear_entropy)
        )?;
    }
    Ok(())
}

fn cmd_curve(a: &CurveArgs, stdout: &mut dyn Write) -> CmdResult {
    let points = match a.family {
        CurveFamily::Mems => mems_curve(a.points)?,
        CurveFamily::Werner => werner_curve(a.points)?,
    };
    let mut out = open_output(&a.out, stdout)?;
    write_curve(&points, &mut out)?;
    out.flush()?;
    Ok(())
}

fn ensemble_spec(name: EnsembleName, s: &EnsembleArgs) -> std::result::Result<EnsembleSpec, Failure> {
    if s.count < 1 {
        return Err(Failure::Usage(format!("--count must be at least 1, got {}", s.count)));
    }
    let kind = match name {
        EnsembleName::Ginibre => match s.rank {
            None | Some(4) => EnsembleKind::GinibreFull,
            Some(k) => EnsembleKind::GinibreRank(k),
        },
        EnsembleName::GinibreRanks => EnsembleKind::GinibreMixedRanks,
        EnsembleName::PureMixture => EnsembleKind::PureMixture(s.mixture),
        EnsembleName::PerturbMems => match s.gamma {
            Some(g) => EnsembleKind::PerturbAbout {
                base: mems(g)?,
                eps: s.eps,
            },
            None => EnsembleKind::PerturbMemsFamily { eps: s.eps },
        },
    };
    Ok(EnsembleSpec::new(kind, s.count as usize, s.seed)?)
}

fn default_envelope_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scan".into());
    out.with_file_name(format!("{stem}.envelope.csv"))
}

fn cmd_scan(a: &ScanArgs) -> CmdResult {
    let spec = ensemble_spec(a.ensemble, &a.sampling)?;
    let metric = match a.metric {
        MetricName::Linear => MixednessMetric::Linear,
        MetricName::Vn => MixednessMetric::VonNeumannNormalized,
    };
    let (envelope, points) = scan_with_points(&spec, metric, a.bins)?;

    let mut out = io::BufWriter::new(fs::File::create(&a.out)?);
    writeln!(out, "tangle,mixedness")?;
    for p in &points {
        writeln!(out, "{},{}", fmt_num(p.tangle), fmt_num(p.mixedness))?;
    }
    out.flush()?;

    let env_path = a
        .envelope_out
        .clone()
        .unwrap_or_else(|| default_envelope_path(&a.out));
    let mut out = io::BufWriter::new(fs::File::create(env_path)?);
    writeln!(out, "bin_lo,bin_hi,max_tangle")?;
    for b in &envelope.bins {
        let max = b.max_tangle.map(fmt_num).unwrap_or_default();
        writeln!(out, "{},{},{}", fmt_num(b.lo), fmt_num(b.hi), max)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_certify(a: &CertifyArgs, stdout: &mut dyn Write) -> CmdResult {
    if !(a.tolerance > 0.0) {
        return Err(Failure::Usage(format!(
            "--tolerance must be positive, got {}",
            a.tolerance
        )));
    }
    let spec = ensemble_spec(a.ensemble, &a.sampling)?;
    let report = certify_all(std::slice::from_ref(&spec), a.tolerance)?;
    writeln!(stdout, "samples={}", report.samples_total)?;
    writeln!(stdout, "tolerance={}", fmt_num(report.tolerance))?;
    writeln!(stdout, "max_violation={}", fmt_num(report.max_violation))?;
    if report.passed() {
        writeln!(stdout, "verdict=PASS")?;
        Ok(())
    } else {
        writeln!(stdout, "verdict=FAIL")?;
        if let Some(rho) = &report.violating_state {
            writeln!(stdout, "violating_state={}", rho.digest())?;
        }
        Err(Failure::Certification)
    }
}

fn cmd_concentrate(a: &ConcentrateArgs, stdout: &mut dyn Write) -> CmdResult {
    if a.steps < 1 {
        return Err(Failure::Usage("--steps must be at least 1".into()));
    }
    let start = mems(a.gamma)?;
    let mode = match a.mode {
        ModeName::TwoSided => FilterMode::TwoSided,
        ModeName::OneSided => FilterMode::OneSided,
    };
    let schedule = default_schedule(a.steps, mode)?;
    let filters: Vec<_> = schedule.iter().map(|(_, f)| *f).collect();
    let points = trajectory(&start, &filters)?;

    let mut out = open_output(&a.out, stdout)?;
    writeln!(out, "kappa,tangle,linear_entropy,success_prob")?;
    for p in &points {
        let kappa = schedule
            .iter()
            .find(|(_, f)| *f == p.filter)
            .map(|(k, _)| *k)
            .expect("point comes from the schedule");
        writeln!(
            out,
            "{},{},{},{}",
            fmt_num(kappa),
            fmt_num(p.tangle),
            fmt_num(p.linear_entropy),
            fmt_num(p.success_prob)
        )?;
    }
    out.flush()?;
    Ok(())
}
