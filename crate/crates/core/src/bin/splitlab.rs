use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use splitlab::cfq::PeriodicCf;
use splitlab::melnikov;
use splitlab::report::{self, RunConfig};
use splitlab::Error;

#[derive(Parser)]
#[command(name = "splitlab", version, about = "Resonances, envelopes and splitting sweeps for quadratic frequency ratios")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Spectral data, primary resonances and separations B0, B1.
    Analyze(Common),
    /// Envelope table, corner list and gnuplot script.
    Envelope(Common),
    /// Closed-form predictions over a range of ratios.
    Verify(Common),
    /// Sweep of the splitting measures over whole periods.
    Melnikov(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Gnuplot,
}

#[derive(Args)]
struct Common {
    /// Continued fraction, e.g. `per:1,3` or `pre:2;per:1,3`.
    #[arg(long, default_value = "per:1")]
    ratio: String,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Exponent in mu = eps^r.
    #[arg(long, default_value_t = 3.5)]
    r: f64,
    /// The analysed period is the one whose centre is nearest to this eps.
    #[arg(long, default_value_t = 1e-8)]
    eps_ref: f64,
    #[arg(long, default_value_t = 64)]
    points: usize,
    #[arg(long, default_value_t = 1)]
    periods: u32,
    #[arg(long, default_value_t = 1000)]
    a_max: u64,
    #[arg(long, default_value_t = 50)]
    b_max: u64,
    /// Sweep points closer than this (in ln eps) to a transition are flagged.
    #[arg(long, default_value_t = 0.05)]
    exclude_radius: f64,
    /// Write artifacts into this directory instead of printing one of them.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// What to print when no output directory is given.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// verify: envelope checks only for ratios with lambda up to this value.
    #[arg(long, default_value_t = 200.0)]
    deep_max: f64,
}

enum Fail {
    Parse(String),
    Io(String),
    Mismatch(String),
    Regime(String),
    Other(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidInput(_) => Fail::Parse(e.to_string()),
            Error::Io(_) => Fail::Io(e.to_string()),
            Error::Regime(_) => Fail::Regime(e.to_string()),
            _ => Fail::Other(e.to_string()),
        }
    }
}

impl Common {
    fn config(&self) -> Result<RunConfig, Fail> {
        let ratio: PeriodicCf = self.ratio.parse()?;
        let cfg = RunConfig {
            ratio,
            rho: self.rho,
            r: self.r,
            eps_ref: self.eps_ref,
            points: self.points,
            periods: self.periods,
            a_max: self.a_max,
            b_max: self.b_max,
            exclude_radius: self.exclude_radius,
            seed: self.seed,
            deep_max: self.deep_max,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomic(dir: &Path, name: &str, body: &str) -> Result<(), Fail> {
    let io = |e: std::io::Error| Fail::Io(format!("{}: {e}", dir.join(name).display()));
    fs::create_dir_all(dir).map_err(io)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, body).map_err(io)?;
    fs::rename(&tmp, dir.join(name)).map_err(io)
}

fn emit(body: &str) -> Result<(), Fail> {
    std::io::stdout()
        .write_all(body.as_bytes())
        .map_err(|e| Fail::Io(format!("stdout: {e}")))
}

fn json(v: &impl serde::Serialize) -> Result<String, Fail> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Fail::Other(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn analyze(c: &Common) -> Result<(), Fail> {
    let cfg = c.config()?;
    let body = json(&report::analyze(&cfg.ratio)?)?;
    match &c.out_dir {
        Some(dir) => write_atomic(dir, "analysis.json", &body),
        None => emit(&body),
    }
}

fn envelope(c: &Common) -> Result<(), Fail> {
    let cfg = c.config()?;
    let (_, env) = report::build_envelope(&cfg.ratio, &cfg.envelope_options())?;
    let csv = report::envelope_csv(&env, cfg.points, cfg.periods)?;
    let corners = report::corner_entries(&env, cfg.periods);
    let cjson = json(&corners)?;
    let script = report::gnuplot_script("envelope.csv", &corners, &cfg.ratio.to_string());
    match &c.out_dir {
        Some(dir) => {
            write_atomic(dir, "envelope.csv", &csv)?;
            write_atomic(dir, "corners.json", &cjson)?;
            write_atomic(dir, "envelope.gp", &script)
        }
        None => emit(match c.format {
            Format::Csv => &csv,
            Format::Json => &cjson,
            Format::Gnuplot => &script,
        }),
    }
}

fn verify(c: &Common) -> Result<(), Fail> {
    let cfg = c.config()?;
    let ratios = report::campaign_ratios(cfg.a_max, cfg.b_max)?;
    let rows = report::campaign(&ratios, &cfg.envelope_options(), cfg.seed, cfg.deep_max);
    let table = report::campaign_table(&rows);
    match &c.out_dir {
        Some(dir) => {
            write_atomic(dir, "verify.tsv", &table)?;
            write_atomic(dir, "verify.json", &json(&rows)?)?;
        }
        None => emit(&table)?,
    }
    match rows.iter().find(|r| !r.pass) {
        Some(r) => {
            let failed = rows.iter().filter(|r| !r.pass).count();
            Err(Fail::Mismatch(format!("{failed} of {} ratios fail, first: {}", rows.len(), r.ratio)))
        }
        None => Ok(()),
    }
}

fn melnikov(c: &Common) -> Result<(), Fail> {
    let cfg = c.config()?;
    let (cat, env) = report::build_envelope(&cfg.ratio, &cfg.envelope_options())?;
    let params = cfg.splitting_params();
    report::regime_check(&cat, &params, cfg.eps_ref)?;
    let grid = report::sweep_grid(&env, cfg.points, cfg.periods);
    let rows = melnikov::sweep(&cat, Some(&env), &params, &grid);
    let csv = report::sweep_csv(&rows, &env, cfg.exclude_radius);
    let rjson = json(&rows)?;
    match &c.out_dir {
        Some(dir) => {
            write_atomic(dir, "melnikov.csv", &csv)?;
            write_atomic(dir, "melnikov.json", &rjson)
        }
        None => emit(if c.format == Format::Json { &rjson } else { &csv }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("SPLITLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let res = match &cli.cmd {
        Cmd::Analyze(c) => analyze(c),
        Cmd::Envelope(c) => envelope(c),
        Cmd::Verify(c) => verify(c),
        Cmd::Melnikov(c) => melnikov(c),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Fail::Mismatch(m) => (1, m),
                Fail::Parse(m) => (2, m),
                Fail::Io(m) => (3, m),
                Fail::Regime(m) => (4, m),
                Fail::Other(m) => (5, m),
            };
            eprintln!("splitlab: {msg}");
            ExitCode::from(code)
        }
    }
}
