//! Report rendering and trajectory files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::mesh::{FemVector, Mesh};
use crate::study::{ConvergenceReport, Vary};
use crate::time_l1::{Snapshot, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Markdown,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Markdown => "md",
        }
    }
}

pub fn render_csv(report: &ConvergenceReport) -> String {
    let p = &report.spec.problem;
    let mut out = String::from("alpha,s,level,resolution,error,rate\n");
    for (k, (&res, err)) in report
        .spec
        .error_levels()
        .iter()
        .zip(&report.errors)
        .enumerate()
    {
        let rate = if k == 0 {
            String::new()
        } else {
            format!("{:.6e}", report.rates[k - 1])
        };
        writeln!(
            out,
            "{},{},{},{},{:.6e},{}",
            p.alpha, p.s, k, res, err, rate
        )
        .unwrap();
    }
    out
}

fn axis_label(vary: Vary) -> &'static str {
    match vary {
        Vary::Spatial => "1/h",
        Vary::Temporal => "1/τ",
    }
}

fn markdown_header(vary: Vary, levels: &[usize]) -> String {
    let mut out = format!("| (α,s) | {} |", axis_label(vary));
    for l in levels {
        write!(out, " {l} |").unwrap();
    }
    out.push_str("\n|---|---|");
    out.push_str(&"---|".repeat(levels.len()));
    out.push('\n');
    out
}

fn markdown_rows(report: &ConvergenceReport) -> String {
    let p = &report.spec.problem;
    let mut out = format!("| ({},{}) | error |", p.alpha, p.s);
    for e in &report.errors {
        write!(out, " {} |", sci_upper(*e)).unwrap();
    }
    out.push_str("\n| | rate | |");
    for r in &report.rates {
        write!(out, " {r:.4} |").unwrap();
    }
    out.push('\n');
    out
}

/// `1.722E-04` style.
fn sci_upper(v: f64) -> String {
    let s = format!("{v:.3E}");
    match s.split_once('E') {
        Some((m, e)) => {
            let exp: i32 = e.parse().unwrap_or(0);
            let sign = if exp < 0 { '-' } else { '+' };
            format!("{m}E{sign}{:02}", exp.abs())
        }
        None => s,
    }
}

/// Error row and rate row per report under one header; all reports must
/// share the refinement axis and levels.
pub fn render_markdown(reports: &[ConvergenceReport]) -> String {
    let Some(first) = reports.first() else {
        return String::new();
    };
    let mut out = markdown_header(first.spec.vary, first.spec.error_levels());
    for r in reports {
        out.push_str(&markdown_rows(r));
    }
    out
}

pub fn render(report: &ConvergenceReport, format: Format) -> String {
    match format {
        Format::Csv => render_csv(report),
        Format::Markdown => render_markdown(std::slice::from_ref(report)),
    }
}

/// `{command}_{alpha}_{s}_{norm}.{ext}`
pub fn report_file_name(command: &str, report: &ConvergenceReport, format: Format) -> String {
    let p = &report.spec.problem;
    format!(
        "{command}_{}_{}_{}.{}",
        p.alpha,
        p.s,
        report.spec.norm.label(),
        format.extension()
    )
}

pub fn emit_report(
    report: &ConvergenceReport,
    command: &str,
    format: Format,
    dir: &Path,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(report_file_name(command, report, format));
    fs::write(&path, render(report, format)).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Header `a b N alpha s tau`, then `t v_1 … v_{N−1}` per snapshot, 17 significant digits.
pub fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    if traj.snapshots.is_empty() {
        return Err(Error::invalid("trajectory has no snapshots"));
    }
    let m = &traj.mesh;
    let mut out = format!(
        "{:.16e} {:.16e} {} {:.16e} {:.16e} {:.16e}\n",
        m.a(),
        m.b(),
        m.elements(),
        traj.alpha,
        traj.s,
        traj.tau
    );
    for snap in &traj.snapshots {
        write!(out, "{:.16e}", traj.time(snap.step)).unwrap();
        for v in snap.values.coeffs() {
            write!(out, " {v:.16e}").unwrap();
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(parse_err(
            1,
            format!("expected 6 header fields, found {}", fields.len()),
        ));
    }
    let num = |i: usize| -> Result<f64> {
        fields[i]
            .parse()
            .map_err(|_| parse_err(1, format!("bad number {:?}", fields[i])))
    };
    let n: usize = fields[2]
        .parse()
        .map_err(|_| parse_err(1, format!("bad element count {:?}", fields[2])))?;
    let mesh = Mesh::new(num(0)?, num(1)?, n).map_err(|e| parse_err(1, e.to_string()))?;
    let (alpha, s, tau) = (num(3)?, num(4)?, num(5)?);

    let mut snapshots = Vec::new();
    for (i, line) in lines {
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|w| {
                w.parse()
                    .map_err(|_| parse_err(i + 1, format!("bad number {w:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != n {
            return Err(parse_err(
                i + 1,
                format!(
                    "expected {} values (time + {} unknowns), found {}",
                    n,
                    n - 1,
                    values.len()
                ),
            ));
        }
        let step = (values[0] / tau).round() as usize;
        snapshots.push(Snapshot {
            step,
            values: FemVector::new(mesh, values[1..].to_vec())?,
        });
    }
    if snapshots.is_empty() {
        return Err(parse_err(1, "no snapshots".into()));
    }
    Ok(Trajectory {
        mesh,
        alpha,
        s,
        tau,
        snapshots,
    })
}
