//! L1 discretisation of the Riemann–Liouville derivative of u − u₀ and the
//! fully discrete time loop.

use statrs::function::gamma::gamma;

use crate::assembly::{l2_project, AssembledOperators, LoadRules};
use crate::error::{Error, Result};
use crate::linalg::SpdFactor;
#[cfg(test)]
use crate::linalg::SymMatrix;
use crate::mesh::{FemVector, Mesh};
use crate::problem::{check_open_unit, ProblemSpec};
use crate::quadrature::QuadratureConfig;

/// L1 coefficients for `M` steps of size `tau`.
///
/// `b[j] = ((j+1)^{1−α} − j^{1−α}) / Γ(2−α)`, `d[0] = τ^{−α} b[0]` and
/// `d[j] = τ^{−α} (b[j] − b[j−1])` for `j ≥ 1`, so that
/// `Σ_{j<n} d[j] (u^{n−j} − u⁰)` approximates the derivative at `t_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    pub alpha: f64,
    pub tau: f64,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
}

pub fn l1_weights(alpha: f64, tau: f64, m: usize) -> Result<L1Weights> {
    check_open_unit("alpha", alpha)?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    if m == 0 {
        return Err(Error::invalid("need at least one time step"));
    }
    let g = gamma(2.0 - alpha);
    let e = 1.0 - alpha;
    let b: Vec<f64> = (0..m)
        .map(|j| {
            if j == 0 {
                1.0 / g
            } else {
                // (j+1)^e − j^e without cancellation.
                let jf = j as f64;
                jf.powf(e) * (e * (1.0 / jf).ln_1p()).exp_m1() / g
            }
        })
        .collect();
    // Differences of the scaled values are exact for neighbouring b, so the
    // weights telescope to scale·b[n−1] up to a single rounding.
    let scale = tau.powf(-alpha);
    let d = (0..m)
        .map(|j| {
            if j == 0 {
                scale * b[0]
            } else {
                scale * b[j] - scale * b[j - 1]
            }
        })
        .collect();
    Ok(L1Weights { alpha, tau, b, d })
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

/// Which time levels a solve keeps.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum SnapshotPolicy {
    /// Initial and final level only.
    #[default]
    FinalOnly,
    All,
    /// Initial, final, and the listed step indices.
    Steps(Vec<usize>),
}

impl SnapshotPolicy {
    fn keeps(&self, n: usize, last: usize) -> bool {
        n == 0
            || n == last
            || match self {
                SnapshotPolicy::FinalOnly => false,
                SnapshotPolicy::All => true,
                SnapshotPolicy::Steps(steps) => steps.contains(&n),
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub values: FemVector,
}

/// Discrete solution at (a subset of) the time levels `t_n = n τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub mesh: Mesh,
    pub alpha: f64,
    pub s: f64,
    pub tau: f64,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.tau
    }

    pub fn at_step(&self, step: usize) -> Option<&FemVector> {
        self.snapshots
            .iter()
            .find(|s| s.step == step)
            .map(|s| &s.values)
    }

    /// Snapshot whose time level equals `t` up to rounding.
    pub fn at_time(&self, t: f64) -> Option<&FemVector> {
        let step = (t / self.tau).round();
        if step < 0.0 || (step * self.tau - t).abs() > 1e-9 * self.tau.max(t.abs()) {
            return None;
        }
        self.at_step(step as usize)
    }

    pub fn initial(&self) -> &FemVector {
        &self.snapshots[0].values
    }

    pub fn final_state(&self) -> &FemVector {
        &self
            .snapshots
            .last()
            .expect("trajectory has snapshots")
            .values
    }

    pub fn final_step(&self) -> usize {
        self.snapshots.last().map(|s| s.step).unwrap_or(0)
    }
}

/// Steps the scheme
///
/// ```text
/// (d₀M + K + S) uⁿ = Fⁿ + d₀ M u⁰ − M Σ_{j=1}^{n−1} d_j (u^{n−j} − u⁰)
/// ```
///
/// from a given `u⁰`. `load(n, t_n)` returns the load vector at each level.
/// The system matrix is factored once; the full history is kept because the
/// scheme is nonlocal in time.
pub fn march(
    ops: &AssembledOperators,
    alpha: f64,
    tau: f64,
    m_steps: usize,
    u0: FemVector,
    mut load: impl FnMut(usize, f64) -> Result<Option<Vec<f64>>>,
    policy: &SnapshotPolicy,
) -> Result<Trajectory> {
    if u0.mesh() != &ops.mesh {
        return Err(Error::invalid(
            "initial vector does not live on the operators' mesh",
        ));
    }
    let weights = l1_weights(alpha, tau, m_steps)?;
    let d = &weights.d;
    let dofs = ops.mesh.interior_dofs();

    let mut system = ops.elliptic_dense();
    for i in 0..dofs {
        for j in i.saturating_sub(1)..(i + 2).min(dofs) {
            system[(i, j)] += d[0] * ops.mass.get(i, j);
        }
    }
    let factor = SpdFactor::new(system, "time-step matrix d₀M + K + S")?;

    let base = ops.mass.mul_vec(u0.coeffs());
    // History of increments uⁿ − u⁰, index n − 1.
    let mut increments: Vec<Vec<f64>> = Vec::with_capacity(m_steps);
    let mut snapshots = vec![Snapshot {
        step: 0,
        values: u0.clone(),
    }];
    let mut hist = vec![0.0; dofs];

    for n in 1..=m_steps {
        hist.iter_mut().for_each(|h| *h = 0.0);
        for j in 1..n {
            let inc = &increments[n - j - 1];
            let dj = d[j];
            for (h, v) in hist.iter_mut().zip(inc) {
                *h += dj * v;
            }
        }
        let mhist = ops.mass.mul_vec(&hist);
        let f = load(n, n as f64 * tau)?;
        let mut rhs: Vec<f64> = base
            .iter()
            .zip(&mhist)
            .map(|(b, mh)| d[0] * b - mh)
            .collect();
        if let Some(f) = f {
            for (r, fi) in rhs.iter_mut().zip(&f) {
                *r += fi;
            }
        }
        if rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("right-hand side at step {n}")));
        }
        let un = factor.solve(&rhs);
        if policy.keeps(n, m_steps) {
            snapshots.push(Snapshot {
                step: n,
                values: FemVector::new(ops.mesh, un.clone())?,
            });
        }
        increments.push(un.iter().zip(u0.coeffs()).map(|(a, b)| a - b).collect());
    }

    Ok(Trajectory {
        mesh: ops.mesh,
        alpha,
        s: ops.s,
        tau,
        snapshots,
    })
}

/// Solves the problem on an already assembled set of operators with
/// `m_steps` uniform steps up to `problem.t_final`.
pub fn solve_with_operators(
    problem: &ProblemSpec,
    ops: &AssembledOperators,
    m_steps: usize,
    q: &QuadratureConfig,
    policy: &SnapshotPolicy,
) -> Result<Trajectory> {
    problem.validate()?;
    if ops.s != problem.s {
        return Err(Error::invalid(format!(
            "operators were assembled for s = {}, problem has s = {}",
            ops.s, problem.s
        )));
    }
    if ops.mesh.a() != problem.a || ops.mesh.b() != problem.b {
        return Err(Error::invalid(
            "operators' mesh does not cover the problem domain",
        ));
    }
    if m_steps == 0 {
        return Err(Error::invalid("need at least one time step"));
    }
    let tau = problem.t_final / m_steps as f64;
    let u0 = l2_project(&problem.u0, &ops.mesh, &ops.mass, q)?;
    let rules = (!problem.f.is_zero()).then(|| LoadRules::new(&ops.mesh, problem.f.features(), q));
    let f = &problem.f;
    march(
        ops,
        problem.alpha,
        tau,
        m_steps,
        u0,
        |n, t| match &rules {
            None => Ok(None),
            Some(r) => r
                .integrate(|x| f.eval(x, t))
                .map(Some)
                .map_err(|e| e.context(format!("load vector at step {n}"))),
        },
        policy,
    )
}

/// Assembles on an `n`-element mesh and solves with `m_steps` steps, keeping
/// the initial and final levels.
pub fn solve(
    problem: &ProblemSpec,
    n: usize,
    m_steps: usize,
    q: &QuadratureConfig,
) -> Result<Trajectory> {
    solve_with_policy(problem, n, m_steps, q, &SnapshotPolicy::FinalOnly)
}

pub fn solve_with_policy(
    problem: &ProblemSpec,
    n: usize,
    m_steps: usize,
    q: &QuadratureConfig,
    policy: &SnapshotPolicy,
) -> Result<Trajectory> {
    problem.validate()?;
    let mesh = Mesh::new(problem.a, problem.b, n)?;
    let ops = AssembledOperators::new(&mesh, problem.s, q)?;
    solve_with_operators(problem, &ops, m_steps, q, policy)
}

#[cfg(test)]
fn mass_norm(m: &SymMatrix, v: &[f64]) -> f64 {
    m.quad_form(v).max(0.0).sqrt()
}
