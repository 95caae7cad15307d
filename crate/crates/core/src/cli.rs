//! Command-line front end. Exit codes: 0 success, 2 usage error, 1 numerical
//! or I/O failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{read_config_file, Command, RunConfig, Settings};
use crate::error::{Error, Result};
use crate::io::{emit_report, render_markdown, write_trajectory};
use crate::norms::norm_l2;
use crate::selftest::run_selftest;
use crate::study::{run_study, table_def, ConvergenceReport, StudySpec, TABLE_COUNT};
use crate::time_l1::{solve_with_policy, SnapshotPolicy};

#[derive(Debug, Parser)]
#[command(
    name = "twoscale",
    version,
    about = "Time-fractional two-scale diffusion solver and convergence studies"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Solve one problem and write the trajectory.
    Solve,
    /// Self-refinement study over a list of N (spatial) or M (temporal) values.
    Study,
    /// Reproduce one of the preset convergence tables.
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=TABLE_COUNT as i64))]
        number: u8,
    },
    /// Run the built-in oracle checks.
    Selftest,
}

#[derive(Debug, Args)]
struct Opts {
    /// Time order(s), comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// Space order(s), comma separated.
    #[arg(long, global = true, allow_hyphen_values = true)]
    s: Option<String>,
    /// a: indicator initial value; b: singular source.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Element count(s).
    #[arg(long = "N", global = true)]
    n: Option<String>,
    /// Step count(s).
    #[arg(long = "M", global = true)]
    m: Option<String>,
    /// Step size(s), e.g. 1/64.
    #[arg(long, global = true)]
    tau: Option<String>,
    /// Mesh size(s), e.g. 1/64.
    #[arg(long, global = true)]
    h: Option<String>,
    /// l2, h2s-1, or a Sobolev index in [-1, 2].
    #[arg(long, global = true, allow_hyphen_values = true)]
    norm: Option<String>,
    /// csv or markdown.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Maximum concurrent solves.
    #[arg(long, global = true)]
    parallelism: Option<String>,
    #[arg(long = "gauss-order", global = true)]
    gauss_order: Option<String>,
    #[arg(long = "duffy-levels", global = true)]
    duffy_levels: Option<String>,
    /// final or all.
    #[arg(long, global = true)]
    snapshots: Option<String>,
    /// key = value or JSON file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Opts {
    fn overlay(self, mut set: Settings) -> Settings {
        let pairs = [
            ("alpha", self.alpha),
            ("s", self.s),
            ("preset", self.preset),
            ("N", self.n),
            ("M", self.m),
            ("tau", self.tau),
            ("h", self.h),
            ("norm", self.norm),
            ("format", self.format),
            ("out", self.out),
            ("parallelism", self.parallelism),
            ("gauss_order", self.gauss_order),
            ("duffy_levels", self.duffy_levels),
            ("snapshots", self.snapshots),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                set.insert(k.to_string(), v);
            }
        }
        set
    }
}

/// Parses argv (including the program name) into a validated config.
pub fn parse_args<I, T>(args: I) -> std::result::Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(ParseOutcome::Clap)?;
    let command = match cli.verb {
        Verb::Solve => Command::Solve,
        Verb::Study => Command::Study,
        Verb::Table { number } => Command::Table(number),
        Verb::Selftest => Command::Selftest,
    };
    let base = match &cli.opts.config {
        Some(p) => read_config_file(p).map_err(ParseOutcome::Config)?,
        None => Settings::new(),
    };
    let settings = cli.opts.overlay(base);
    RunConfig::from_settings(command, &settings).map_err(ParseOutcome::Config)
}

#[derive(Debug)]
pub enum ParseOutcome {
    /// Includes `--help` and `--version`, which are not failures.
    Clap(clap::Error),
    Config(Error),
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("--parallelism: {e}")))
}

fn run_reports(cfg: &RunConfig, specs: Vec<StudySpec>) -> Result<Vec<ConvergenceReport>> {
    pool(cfg.parallelism)?.install(|| specs.par_iter().map(run_study).collect())
}

fn study_specs(cfg: &RunConfig) -> Result<Vec<StudySpec>> {
    let vary = cfg.vary();
    let (levels, fixed) = match vary {
        crate::study::Vary::Spatial => (cfg.n.clone(), cfg.m[0]),
        crate::study::Vary::Temporal => (cfg.m.clone(), cfg.n[0]),
    };
    let mut specs = Vec::new();
    for &alpha in &cfg.alphas {
        for &s in &cfg.ss {
            specs.push(StudySpec {
                problem: cfg.preset.problem(alpha, s)?,
                vary,
                levels: levels.clone(),
                fixed,
                norm: cfg.norm.resolve(s),
                quadrature: cfg.quadrature,
            });
        }
    }
    Ok(specs)
}

/// Executes a validated config, writing human-readable output to `out`.
pub fn execute(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool> {
    let w = |e: std::io::Error| Error::io("<stdout>", e);
    match cfg.command {
        Command::Solve => {
            let p = cfg.preset.problem(cfg.alphas[0], cfg.ss[0])?;
            let policy = if cfg.all_snapshots {
                SnapshotPolicy::All
            } else {
                SnapshotPolicy::FinalOnly
            };
            let traj = solve_with_policy(&p, cfg.n[0], cfg.m[0], &cfg.quadrature, &policy)?;
            std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
            let path = cfg.out.join(format!("solve_{}_{}.txt", p.alpha, p.s));
            write_trajectory(&traj, &path)?;
            writeln!(
                out,
                "alpha={} s={} N={} M={}: ||u(T)||_L2 = {:.6e}\nwrote {}",
                p.alpha,
                p.s,
                cfg.n[0],
                cfg.m[0],
                norm_l2(traj.final_state()),
                path.display()
            )
            .map_err(w)?;
            Ok(true)
        }
        Command::Study | Command::Table(_) => {
            let specs = match cfg.command {
                Command::Table(n) => table_def(n)?.specs(&cfg.quadrature)?,
                _ => study_specs(cfg)?,
            };
            let reports = run_reports(cfg, specs)?;
            let name = cfg.command.name();
            for r in &reports {
                let path = emit_report(r, &name, cfg.format, &cfg.out)?;
                writeln!(out, "wrote {}", path.display()).map_err(w)?;
            }
            write!(out, "{}", render_markdown(&reports)).map_err(w)?;
            Ok(true)
        }
        Command::Selftest => {
            let checks = run_selftest(&cfg.quadrature);
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                writeln!(out, "{tag} {}: {}", c.name, c.detail).map_err(w)?;
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

/// Full CLI: parse, execute, report. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_args(args) {
        Ok(c) => c,
        Err(ParseOutcome::Clap(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
        Err(ParseOutcome::Config(e)) => {
            let _ = writeln!(err, "error: {e}");
            return if e.is_usage() { 2 } else { 1 };
        }
    };
    match execute(&cfg, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
