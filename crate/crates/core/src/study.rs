//! Self-refinement convergence studies and the preset table grids.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

use crate::assembly::{assemble_mass, AssembledOperators};
use crate::error::{Error, Result};
use crate::mesh::{prolongate, Mesh};
use crate::norms::SpectralDecomposition;
use crate::problem::{preset_a, preset_b, ProblemSpec};
use crate::quadrature::QuadratureConfig;
use crate::time_l1::{solve_with_operators, SnapshotPolicy, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vary {
    /// Refine h at fixed τ.
    Spatial,
    /// Refine τ at fixed h.
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    /// Ĥ^ρ through the discrete Laplacian pencil.
    Hsigma(f64),
}

impl NormKind {
    /// The Ĥ^{2s−1} norm.
    pub fn negative_order(s: f64) -> Self {
        NormKind::Hsigma(2.0 * s - 1.0)
    }

    pub fn label(&self) -> String {
        match self {
            NormKind::L2 => "L2".into(),
            NormKind::Hsigma(rho) => format!("H{rho}"),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone)]
pub struct StudySpec {
    pub problem: ProblemSpec,
    pub vary: Vary,
    /// Resolutions solved along the varied axis (N or M), each twice the previous.
    pub levels: Vec<usize>,
    /// N (temporal study) or M (spatial study) on the frozen axis.
    pub fixed: usize,
    pub norm: NormKind,
    pub quadrature: QuadratureConfig,
}

impl StudySpec {
    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        self.quadrature.validate()?;
        if self.levels.len() < 2 {
            return Err(Error::invalid("a study needs at least two levels"));
        }
        if self.levels[0] < 2 {
            return Err(Error::invalid("levels must start at 2 or more"));
        }
        if let Some(w) = self.levels.windows(2).find(|w| w[1] != 2 * w[0]) {
            return Err(Error::invalid(format!(
                "levels must double: {} is followed by {}",
                w[0], w[1]
            )));
        }
        if self.fixed < 2 {
            return Err(Error::invalid("fixed resolution must be at least 2"));
        }
        if let NormKind::Hsigma(rho) = self.norm {
            if !(-1.0..=2.0).contains(&rho) {
                return Err(Error::invalid(format!(
                    "norm index must lie in [-1, 2], got {rho}"
                )));
            }
        }
        Ok(())
    }

    /// Resolutions at which errors are reported (all levels but the finest).
    pub fn error_levels(&self) -> &[usize] {
        &self.levels[..self.levels.len() - 1]
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub spec: StudySpec,
    /// `errors[k]` compares `levels[k]` with `levels[k + 1]`.
    pub errors: Vec<f64>,
    pub rates: Vec<f64>,
    /// Seconds spent solving each level.
    pub wall_times: Vec<f64>,
}

pub fn rates_from_errors(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Norm of the difference of two trajectories at time `at`.
///
/// Spatial pairs share τ and the fine mesh is the uniform refinement of the
/// coarse one; the coarse snapshot is prolongated. Temporal pairs share the
/// mesh and the fine step is half the coarse one. Norms use fine-level
/// matrices. `dec` may supply a prebuilt decomposition of the fine mesh.
pub fn self_refinement_error(
    coarse: &Trajectory,
    fine: &Trajectory,
    norm: NormKind,
    at: f64,
) -> Result<f64> {
    refinement_error_with(coarse, fine, norm, at, None)
}

fn refinement_error_with(
    coarse: &Trajectory,
    fine: &Trajectory,
    norm: NormKind,
    at: f64,
    dec: Option<&SpectralDecomposition>,
) -> Result<f64> {
    let same_tau = (coarse.tau - fine.tau).abs() <= 1e-12 * coarse.tau;
    let halved_tau = (coarse.tau - 2.0 * fine.tau).abs() <= 1e-12 * coarse.tau;
    let spatial = same_tau && fine.mesh == coarse.mesh.refined();
    let temporal = halved_tau && fine.mesh == coarse.mesh;
    if !(spatial || temporal) {
        return Err(Error::invalid(
            "trajectories are not a nested pair (2× mesh at equal τ, or τ/2 on the same mesh)",
        ));
    }
    let missing = |which: &str| {
        Error::invalid(format!(
            "time {at} is not a stored level of the {which} trajectory"
        ))
    };
    let c = coarse.at_time(at).ok_or_else(|| missing("coarse"))?;
    let f = fine.at_time(at).ok_or_else(|| missing("fine"))?;
    let c = if spatial {
        prolongate(c, &fine.mesh)?
    } else {
        c.clone()
    };
    let diff = c.sub(f)?;
    match norm {
        NormKind::L2 => Ok(assemble_mass(&fine.mesh)
            .quad_form(diff.coeffs())
            .max(0.0)
            .sqrt()),
        NormKind::Hsigma(rho) => match dec {
            Some(d) => d.norm(&diff, rho),
            None => SpectralDecomposition::for_mesh(&fine.mesh)?.norm(&diff, rho),
        },
    }
}

fn level_trajectory(
    spec: &StudySpec,
    level: usize,
    shared: Option<&AssembledOperators>,
) -> Result<(Trajectory, f64)> {
    let start = Instant::now();
    let p = &spec.problem;
    let q = &spec.quadrature;
    let traj = match spec.vary {
        Vary::Spatial => {
            let mesh = Mesh::new(p.a, p.b, level)?;
            let ops = AssembledOperators::new(&mesh, p.s, q)?;
            solve_with_operators(p, &ops, spec.fixed, q, &SnapshotPolicy::FinalOnly)?
        }
        Vary::Temporal => {
            let ops = shared.expect("temporal studies share operators");
            solve_with_operators(p, ops, level, q, &SnapshotPolicy::FinalOnly)?
        }
    };
    Ok((traj, start.elapsed().as_secs_f64()))
}

/// Solves every level (in parallel), then compares adjacent levels at T.
pub fn run_study(spec: &StudySpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let p = &spec.problem;
    let shared = match spec.vary {
        Vary::Temporal => {
            let mesh = Mesh::new(p.a, p.b, spec.fixed)?;
            Some(AssembledOperators::new(&mesh, p.s, &spec.quadrature)?)
        }
        Vary::Spatial => None,
    };
    let solved: Vec<(Trajectory, f64)> = spec
        .levels
        .par_iter()
        .map(|&level| {
            level_trajectory(spec, level, shared.as_ref())
                .map_err(|e| e.context(format!("level {level}")))
        })
        .collect::<Result<_>>()?;

    let temporal_dec = match (spec.vary, spec.norm) {
        (Vary::Temporal, NormKind::Hsigma(_)) => {
            Some(SpectralDecomposition::for_mesh(&solved[0].0.mesh)?)
        }
        _ => None,
    };
    let t = p.t_final;
    let errors: Vec<f64> = solved
        .par_windows(2)
        .map(|w| {
            let (coarse, fine) = (&w[0].0, &w[1].0);
            let own;
            let dec = match (&temporal_dec, spec.norm) {
                (Some(d), _) => Some(d),
                (None, NormKind::Hsigma(_)) => {
                    own = SpectralDecomposition::for_mesh(&fine.mesh)?;
                    Some(&own)
                }
                (None, NormKind::L2) => None,
            };
            // Both grids end exactly at T: compare final states by step.
            let at = coarse.time(coarse.final_step());
            if (at - t).abs() > 1e-9 * t {
                return Err(Error::invalid(format!(
                    "final level {at} does not reach T = {t}"
                )));
            }
            refinement_error_with(coarse, fine, spec.norm, at, dec)
        })
        .collect::<Result<_>>()?;

    Ok(ConvergenceReport {
        spec: spec.clone(),
        rates: rates_from_errors(&errors),
        errors,
        wall_times: solved.iter().map(|s| s.1).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    A,
    B,
}

impl Preset {
    pub fn problem(self, alpha: f64, s: f64) -> Result<ProblemSpec> {
        match self {
            Preset::A => preset_a(alpha, s),
            Preset::B => preset_b(alpha, s),
        }
    }
}

/// One of the published tables: a preset, a refinement axis, a norm rule and
/// its (α, s) rows.
#[derive(Debug, Clone)]
pub struct TableDef {
    pub number: u8,
    pub preset: Preset,
    pub vary: Vary,
    /// `true` for Ĥ^{2s−1}, `false` for L².
    pub negative_norm: bool,
    pub rows: Vec<(f64, f64)>,
}

pub const TABLE_COUNT: u8 = 8;
/// Resolutions on the varied axis; errors are reported for all but the last.
pub const TABLE_LEVELS: [usize; 6] = [16, 32, 64, 128, 256, 512];
pub const TABLE_FIXED: usize = 512;

pub fn table_def(number: u8) -> Result<TableDef> {
    use Preset::{A, B};
    use Vary::{Spatial, Temporal};
    let (preset, vary, negative_norm, rows): (Preset, Vary, bool, &[(f64, f64)]) = match number {
        1 => (
            A,
            Temporal,
            false,
            &[(0.4, 0.3), (0.4, 0.7), (0.8, 0.3), (0.8, 0.7)],
        ),
        2 => (
            B,
            Temporal,
            false,
            &[(0.3, 0.4), (0.3, 0.8), (0.7, 0.4), (0.7, 0.8)],
        ),
        3 => (
            A,
            Spatial,
            false,
            &[(0.4, 0.3), (0.6, 0.3), (0.4, 0.7), (0.6, 0.7)],
        ),
        4 => (
            A,
            Spatial,
            true,
            &[(0.3, 0.8), (0.8, 0.8), (0.3, 0.9), (0.8, 0.9)],
        ),
        5 => (
            A,
            Spatial,
            false,
            &[(0.3, 0.8), (0.8, 0.8), (0.3, 0.9), (0.8, 0.9)],
        ),
        6 => (
            B,
            Spatial,
            false,
            &[(0.3, 0.2), (0.8, 0.2), (0.3, 0.6), (0.8, 0.6)],
        ),
        7 => (
            B,
            Spatial,
            true,
            &[(0.4, 0.8), (0.6, 0.8), (0.4, 0.9), (0.6, 0.9)],
        ),
        8 => (
            B,
            Spatial,
            false,
            &[(0.4, 0.8), (0.6, 0.8), (0.4, 0.9), (0.6, 0.9)],
        ),
        _ => {
            return Err(Error::invalid(format!(
                "table must be between 1 and {TABLE_COUNT}, got {number}"
            )))
        }
    };
    Ok(TableDef {
        number,
        preset,
        vary,
        negative_norm,
        rows: rows.to_vec(),
    })
}

impl TableDef {
    pub fn specs(&self, q: &QuadratureConfig) -> Result<Vec<StudySpec>> {
        self.rows
            .iter()
            .map(|&(alpha, s)| {
                Ok(StudySpec {
                    problem: self.preset.problem(alpha, s)?,
                    vary: self.vary,
                    levels: TABLE_LEVELS.to_vec(),
                    fixed: TABLE_FIXED,
                    norm: if self.negative_norm {
                        NormKind::negative_order(s)
                    } else {
                        NormKind::L2
                    },
                    quadrature: *q,
                })
            })
            .collect()
    }
}
