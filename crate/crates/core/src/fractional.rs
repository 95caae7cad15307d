//! Dense stiffness matrix of the integral fractional Laplacian with a
//! homogeneous exterior condition, for P1 elements on a uniform mesh.
//!
//! The bilinear form integrates over ℝ×ℝ minus Ωᶜ×Ωᶜ. Since trial functions
//! vanish outside Ω, it splits into
//!
//! ```text
//! S_ij = c/2 · [ ∬_{Ω×Ω} (φᵢ(x)−φᵢ(y))(φⱼ(x)−φⱼ(y)) |x−y|^{−1−2s} dx dy
//!               + 2 ∫_Ω φᵢ φⱼ w(x) dx ],   w(x) = ∫_{Ωᶜ} |x−y|^{−1−2s} dy.
//! ```
//!
//! The double integral is evaluated element pair by element pair. On a
//! uniform mesh an element pair contributes a small local matrix that depends
//! only on the offset between the two elements, scaled by `h^{1−2s}`:
//!
//! * identical elements: the integrand is `|x−y|^{1−2s}` times a constant and
//!   integrates in closed form;
//! * neighbours: the integrand is homogeneous of degree `1−2s` around the
//!   shared node. A Duffy split of the reference square into two triangles
//!   collapsed at that node separates a radial factor `r^{2−2s}` (dyadic
//!   Gauss cells plus a self-similar remainder) from a smooth angular integral;
//! * separated elements: tensor Gauss, subdivided so that every cell pair is
//!   well separated relative to its size.
//!
//! The exterior term uses the closed-form tail weight and graded Gauss
//! quadrature toward the endpoints where the weight blows up.

use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::mesh::Mesh;
use crate::problem::check_open_unit;
use crate::quadrature::{element_rule, Features, GaussRule, QuadratureConfig};

/// c_{1,s} = 2^{2s} s Γ(1/2 + s) / (√π Γ(1 − s)).
pub fn fractional_constant(s: f64) -> f64 {
    4f64.powf(s) * s * gamma(0.5 + s) / (std::f64::consts::PI.sqrt() * gamma(1.0 - s))
}

/// `∫_{Ωᶜ} |x−y|^{−1−2s} dy = ((x−a)^{−2s} + (b−x)^{−2s}) / (2s)` for `x` strictly inside the mesh domain.
pub fn exterior_tail_weight(x: f64, s: f64, mesh: &Mesh) -> Result<f64> {
    check_open_unit("s", s)?;
    if !(x > mesh.a() && x < mesh.b()) {
        return Err(Error::invalid(format!(
            "tail weight diverges at x = {x}; it needs a point strictly inside ({}, {})",
            mesh.a(),
            mesh.b()
        )));
    }
    Ok(tail_weight(x, s, mesh.a(), mesh.b()))
}

fn tail_weight(x: f64, s: f64, a: f64, b: f64) -> f64 {
    ((x - a).powf(-2.0 * s) + (b - x).powf(-2.0 * s)) / (2.0 * s)
}

// Local matrices live on the reference element of unit length; the physical
// contribution is h^{1−2s} times these.

/// Identical element: ∬_{[0,1]²} |ξ−η|^{1−2s} = 2/((2−2s)(3−2s)) times the
/// difference-of-slopes pattern [[1, −1], [−1, 1]].
fn same_element(s: f64) -> [[f64; 2]; 2] {
    let i0 = 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
    [[i0, -i0], [-i0, i0]]
}

// Angular integrals of the Duffy-transformed neighbour pair are split into this
// many Gauss cells; the nearest singularity of (1+t)^{−1−2s} sits at t = −1.
const ANGULAR_CELLS: usize = 4;

/// ∫₀¹ r^p dr on dyadic cells [2^{−k−1}, 2^{−k}], k < levels. The remainder
/// cell [0, 2^{−levels}] is self-similar to the whole interval and contributes
/// 2^{−levels·(p+1)} of the total, which closes the sum.
fn radial_factor(p: f64, levels: usize, gauss: &GaussRule) -> f64 {
    let mut sum = 0.0;
    let mut hi = 1.0;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        sum += gauss.integrate(lo, hi, |r| r.powf(p));
        hi = lo;
    }
    sum / (1.0 - hi.powf(p + 1.0))
}

/// Neighbouring elements K = [−1, 0], L = [0, 1] (reference units), nodes
/// (−1, 0, 1). With p the distance of x from the shared node and q that of y,
/// the three node functions φ(x) − φ(y) read p, q − p and −q; all vanish at
/// the shared node so each local entry is finite.
fn touching(s: f64, q: &QuadratureConfig) -> [[f64; 3]; 3] {
    let gauss = GaussRule::new(q.gauss_order);
    let radial = radial_factor(2.0 - 2.0 * s, q.duffy_levels, &gauss);
    let mut acc = [[0.0; 3]; 3];
    let step = 1.0 / ANGULAR_CELLS as f64;
    for c in 0..ANGULAR_CELLS {
        let (lo, hi) = (c as f64 * step, (c + 1) as f64 * step);
        for (t, w) in gauss.mapped(lo, hi) {
            let kernel = w * (1.0 + t).powf(-1.0 - 2.0 * s);
            // Triangle p ≥ q: (p, q) = r(1, t). Triangle q ≥ p: (p, q) = r(t, 1).
            let g1 = [1.0, t - 1.0, -t];
            let g2 = [t, 1.0 - t, -1.0];
            for a in 0..3 {
                for b in 0..3 {
                    acc[a][b] += kernel * (g1[a] * g1[b] + g2[a] * g2[b]);
                }
            }
        }
    }
    acc.map(|row| row.map(|v| radial * v))
}

// Cell pairs are made at least this many cell lengths apart.
const FAR_SEPARATION: f64 = 8.0;

/// Elements `d ≥ 2` apart: x ∈ K = [0, 1], y ∈ L = [d, d+1]. Node functions
/// φ(x) − φ(y) are (1−ξ, ξ, −(1−η), −η) for the nodes (k, k+1, k+d, k+d+1).
fn separated(d: usize, s: f64, q: &QuadratureConfig) -> [[f64; 4]; 4] {
    debug_assert!(d >= 2);
    let gauss = GaussRule::new(q.gauss_order);
    let m = (FAR_SEPARATION / (d - 1) as f64).ceil().max(1.0) as usize;
    let step = 1.0 / m as f64;
    let df = d as f64;
    let mut acc = [[0.0; 4]; 4];
    for ci in 0..m {
        let (x0, x1) = (ci as f64 * step, (ci + 1) as f64 * step);
        for cj in 0..m {
            let (y0, y1) = (cj as f64 * step, (cj + 1) as f64 * step);
            for (xi, wx) in gauss.mapped(x0, x1) {
                for (eta, wy) in gauss.mapped(y0, y1) {
                    let kernel = wx * wy * (df + eta - xi).powf(-1.0 - 2.0 * s);
                    let g = [1.0 - xi, xi, eta - 1.0, -eta];
                    for a in 0..4 {
                        for b in a..4 {
                            acc[a][b] += kernel * g[a] * g[b];
                        }
                    }
                }
            }
        }
    }
    #[allow(clippy::needless_range_loop)]
    for a in 1..4 {
        for b in 0..a {
            acc[a][b] = acc[b][a];
        }
    }
    acc
}

/// Local interaction of an ordered element pair at offset `d`, with the
/// global node numbers relative to the first element's left node.
#[derive(Debug, Clone)]
struct PairMatrix {
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl PairMatrix {
    fn for_offset(d: usize, s: f64, q: &QuadratureConfig) -> Self {
        match d {
            0 => Self::from_rows(&[0, 1], &same_element(s)),
            1 => {
                // Both (K, L) and (L, K) orderings contribute equally.
                let m = touching(s, q).map(|r| r.map(|v| 2.0 * v));
                Self::from_rows(&[0, 1, 2], &m)
            }
            _ => {
                let m = separated(d, s, q).map(|r| r.map(|v| 2.0 * v));
                Self::from_rows(&[0, 1, d, d + 1], &m)
            }
        }
    }

    fn from_rows<const K: usize>(offsets: &[usize], m: &[[f64; K]; K]) -> Self {
        Self {
            offsets: offsets.to_vec(),
            values: m.iter().flatten().copied().collect(),
        }
    }

    fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.offsets.len() + b]
    }
}

/// Exterior contribution ∫_{e_k} ψ_a ψ_b w on element `k` for the local
/// node pairs (a, b) ∈ {0, 1}², left node first.
fn exterior_local(mesh: &Mesh, k: usize, s: f64, q: &QuadratureConfig) -> [[f64; 2]; 2] {
    let (lo, hi) = mesh.element(k);
    let feats = Features::none().with_singularities(&[mesh.a(), mesh.b()]);
    let rule = element_rule(lo, hi, &feats, q);
    let h = mesh.h();
    let (a, b) = (mesh.a(), mesh.b());
    let mut acc = [[0.0; 2]; 2];
    for (&x, &w) in rule.points.iter().zip(&rule.weights) {
        let xi = (x - lo) / h;
        let psi = [1.0 - xi, xi];
        let ww = w * tail_weight(x, s, a, b);
        for i in 0..2 {
            for j in 0..2 {
                acc[i][j] += ww * psi[i] * psi[j];
            }
        }
    }
    acc
}

fn check_inputs(s: f64, q: &QuadratureConfig) -> Result<()> {
    check_open_unit("s", s)?;
    q.validate()
}

/// Dense SPD matrix of the fractional bilinear form on the interior hat functions.
///
/// The offset-dependent local matrices are computed once per offset (in
/// parallel) and then scattered sequentially, so results are deterministic.
pub fn assemble_fractional(mesh: &Mesh, s: f64, q: &QuadratureConfig) -> Result<SymMatrix> {
    check_inputs(s, q)?;
    let n_el = mesh.elements();
    let dofs = mesh.interior_dofs();
    let h = mesh.h();
    let c = fractional_constant(s);
    let pair_scale = 0.5 * c * h.powf(1.0 - 2.0 * s);

    let pairs: Vec<PairMatrix> = (0..n_el)
        .into_par_iter()
        .map(|d| PairMatrix::for_offset(d, s, q))
        .collect();
    let exterior: Vec<[[f64; 2]; 2]> = (0..n_el)
        .into_par_iter()
        .map(|k| exterior_local(mesh, k, s, q))
        .collect();

    let mut upper = DMatrix::<f64>::zeros(dofs, dofs);
    let mut add = |ni: usize, nj: usize, v: f64| {
        if let (Some(i), Some(j)) = (mesh.dof_of_node(ni), mesh.dof_of_node(nj)) {
            let (r, c) = if i <= j { (i, j) } else { (j, i) };
            upper[(r, c)] += v;
        }
    };

    for (d, pm) in pairs.iter().enumerate() {
        let nloc = pm.offsets.len();
        for k in 0..n_el - d {
            for a in 0..nloc {
                for b in a..nloc {
                    add(
                        k + pm.offsets[a],
                        k + pm.offsets[b],
                        pair_scale * pm.get(a, b),
                    );
                }
            }
        }
    }
    for (k, e) in exterior.iter().enumerate() {
        for (a, row) in e.iter().enumerate() {
            for (b, &v) in row.iter().enumerate().skip(a) {
                add(k + a, k + b, c * v);
            }
        }
    }

    mirror(&mut upper);
    Ok(SymMatrix::Dense(upper))
}

fn mirror(upper: &mut DMatrix<f64>) {
    let n = upper.nrows();
    for i in 0..n {
        for j in 0..i {
            upper[(i, j)] = upper[(j, i)];
        }
    }
}

/// Entry `(i, j)` (interior unknown indices) evaluated directly from its
/// element pairs, without sharing local matrices across offsets.
pub fn fractional_entry(
    mesh: &Mesh,
    s: f64,
    q: &QuadratureConfig,
    i: usize,
    j: usize,
) -> Result<f64> {
    check_inputs(s, q)?;
    let dofs = mesh.interior_dofs();
    if i >= dofs || j >= dofs {
        return Err(Error::invalid(format!(
            "entry ({i}, {j}) outside a {dofs}×{dofs} matrix"
        )));
    }
    let (ni, nj) = (i + 1, j + 1);
    let n_el = mesh.elements();
    let h = mesh.h();
    let c = fractional_constant(s);
    let pair_scale = 0.5 * c * h.powf(1.0 - 2.0 * s);

    let mut total = 0.0;
    for k in 0..n_el {
        for d in 0..n_el - k {
            let first = [k, k + 1];
            let second = [k + d, k + d + 1];
            let touches = |n: usize| first.contains(&n) || second.contains(&n);
            if !(touches(ni) && touches(nj)) {
                continue;
            }
            let pm = PairMatrix::for_offset(d, s, q);
            let local = |n: usize| pm.offsets.iter().position(|&o| k + o == n);
            if let (Some(a), Some(b)) = (local(ni), local(nj)) {
                total += pair_scale * pm.get(a, b);
            }
        }
    }
    for k in 0..n_el {
        let a = ni.checked_sub(k).filter(|&a| a < 2);
        let b = nj.checked_sub(k).filter(|&b| b < 2);
        if let (Some(a), Some(b)) = (a, b) {
            total += c * exterior_local(mesh, k, s, q)[a][b];
        }
    }
    Ok(total)
}

/// Assembles with `q` and with a finer rule (one extra Duffy level, Gauss
/// order + 2); fails if any entry moves by more than `tol`.
///
/// The radial Duffy factor is closed exactly, so the extra level alone would
/// not change anything; the Gauss order bump is what probes the remaining
/// angular and tensor-product error.
pub fn assemble_fractional_checked(
    mesh: &Mesh,
    s: f64,
    q: &QuadratureConfig,
    tol: f64,
) -> Result<SymMatrix> {
    let base = assemble_fractional(mesh, s, q)?;
    let finer = QuadratureConfig {
        duffy_levels: q.duffy_levels + 1,
        gauss_order: q.gauss_order + 2,
        ..*q
    };
    let check = assemble_fractional(mesh, s, &finer)?;
    let n = base.dim();
    let mut worst = (0, 0, 0.0f64);
    for i in 0..n {
        for j in i..n {
            let change = (base.get(i, j) - check.get(i, j)).abs();
            if change > worst.2 {
                worst = (i, j, change);
            }
        }
    }
    if worst.2 > tol {
        return Err(Error::QuadratureNotConverged {
            row: worst.0,
            col: worst.1,
            change: worst.2,
            tol,
        });
    }
    Ok(base)
}
