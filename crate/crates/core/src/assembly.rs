//! P1 mass and stiffness matrices, load vectors and the L² projection, plus
//! the bundle of operators the time stepper needs.

use crate::error::{Error, Result};
use crate::fractional::{assemble_fractional, fractional_constant};
use crate::linalg::SymMatrix;
use crate::mesh::{FemVector, Mesh};
use crate::problem::{check_open_unit, Datum};
use crate::quadrature::{element_rule, Features, PointRule, QuadratureConfig};

/// Consistent mass matrix: 2h/3 on the diagonal, h/6 off it.
pub fn assemble_mass(mesh: &Mesh) -> SymMatrix {
    let n = mesh.interior_dofs();
    let h = mesh.h();
    SymMatrix::tridiagonal(vec![2.0 * h / 3.0; n], vec![h / 6.0; n - 1])
}

/// Stiffness matrix of the Dirichlet Laplacian: 2/h and -1/h.
pub fn assemble_stiffness(mesh: &Mesh) -> SymMatrix {
    let n = mesh.interior_dofs();
    let h = mesh.h();
    SymMatrix::tridiagonal(vec![2.0 / h; n], vec![-1.0 / h; n - 1])
}

/// Per-element quadrature rules for integrating a datum against the hat
/// functions. Built once per mesh and feature set, reused for every time level.
#[derive(Debug, Clone)]
pub struct LoadRules {
    mesh: Mesh,
    rules: Vec<PointRule>,
}

impl LoadRules {
    pub fn new(mesh: &Mesh, features: &Features, q: &QuadratureConfig) -> Self {
        let rules = (0..mesh.elements())
            .map(|k| {
                let (lo, hi) = mesh.element(k);
                element_rule(lo, hi, features, q)
            })
            .collect();
        Self { mesh: *mesh, rules }
    }

    /// `∫ g φᵢ` for every interior hat function.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let mesh = &self.mesh;
        let h = mesh.h();
        let mut out = vec![0.0; mesh.interior_dofs()];
        for (k, rule) in self.rules.iter().enumerate() {
            let left = mesh.dof_of_node(k);
            let right = mesh.dof_of_node(k + 1);
            let x0 = mesh.node(k);
            let (mut acc_l, mut acc_r) = (0.0, 0.0);
            for (&x, &w) in rule.points.iter().zip(&rule.weights) {
                let v = g(x);
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "load integrand at x = {x:e} (element {k})"
                    )));
                }
                let xi = (x - x0) / h;
                acc_l += w * v * (1.0 - xi);
                acc_r += w * v * xi;
            }
            if let Some(i) = left {
                out[i] += acc_l;
            }
            if let Some(i) = right {
                out[i] += acc_r;
            }
        }
        Ok(out)
    }
}

/// Load vector `(f(·, t), φᵢ)`.
pub fn load_vector(f: &Datum, t: f64, mesh: &Mesh, q: &QuadratureConfig) -> Result<FemVector> {
    if f.is_zero() {
        return Ok(FemVector::zeros(*mesh));
    }
    let rules = LoadRules::new(mesh, f.features(), q);
    FemVector::new(*mesh, rules.integrate(|x| f.eval(x, t))?)
}

/// L² projection onto the P1 space: solves `M c = (g, φᵢ)`.
pub fn l2_project(
    g: &Datum,
    mesh: &Mesh,
    mass: &SymMatrix,
    q: &QuadratureConfig,
) -> Result<FemVector> {
    if mass.dim() != mesh.interior_dofs() {
        return Err(Error::invalid("mass matrix does not match the mesh"));
    }
    let rhs = load_vector(g, 0.0, mesh, q)?;
    let coeffs = match mass {
        SymMatrix::Tridiagonal { .. } => mass.solve_tridiagonal(rhs.coeffs())?,
        SymMatrix::Dense(m) => {
            crate::linalg::SpdFactor::new(m.clone(), "mass matrix")?.solve(rhs.coeffs())
        }
    };
    FemVector::new(*mesh, coeffs)
}

/// Everything assembled once per (mesh, s): mass, stiffness, fractional
/// stiffness and the normalisation constant of the fractional Laplacian.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    pub mesh: Mesh,
    pub mass: SymMatrix,
    pub stiffness: SymMatrix,
    pub fractional: SymMatrix,
    pub s: f64,
    pub c_frac: f64,
}

impl AssembledOperators {
    pub fn new(mesh: &Mesh, s: f64, q: &QuadratureConfig) -> Result<Self> {
        check_open_unit("s", s)?;
        q.validate()?;
        Ok(Self {
            mesh: *mesh,
            mass: assemble_mass(mesh),
            stiffness: assemble_stiffness(mesh),
            fractional: assemble_fractional(mesh, s, q)?,
            s,
            c_frac: fractional_constant(s),
        })
    }

    /// K + S as a dense matrix.
    pub fn elliptic_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut a = self.fractional.to_dense();
        let n = a.nrows();
        for i in 0..n {
            for j in i.saturating_sub(1)..(i + 2).min(n) {
                a[(i, j)] += self.stiffness.get(i, j);
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_spd;
    use crate::quadrature::GaussRule;

    #[test]
    fn mass_entries_quarter_mesh() {
        let m = assemble_mass(&Mesh::unit(4).unwrap());
        assert!((m.get(0, 0) - 1.0 / 6.0).abs() < 1e-16);
        assert!((m.get(0, 1) - 1.0 / 24.0).abs() < 1e-16);
        assert_eq!(m.get(0, 2), 0.0);
    }

    #[test]
    fn mass_interior_row_sums_equal_h() {
        let mesh = Mesh::unit(10).unwrap();
        let m = assemble_mass(&mesh);
        let ones = vec![1.0; mesh.interior_dofs()];
        let sums = m.mul_vec(&ones);
        for s in &sums[1..sums.len() - 1] {
            assert!((s - mesh.h()).abs() < 1e-15);
        }
    }

    #[test]
    fn mass_quadratic_form_matches_brute_force() {
        // ∫ (Σ φᵢ)² by composite Gauss on each element: the sum of interior hats
        // ramps up on the first element, is 1 inside and ramps down at the end.
        let mesh = Mesh::unit(7).unwrap();
        let m = assemble_mass(&mesh);
        let ones = FemVector::new(mesh, vec![1.0; 6]).unwrap();
        let rule = GaussRule::new(4);
        let brute: f64 = (0..7)
            .map(|k| {
                let (lo, hi) = mesh.element(k);
                rule.integrate(lo, hi, |x| ones.eval(x).powi(2))
            })
            .sum();
        assert!((m.quad_form(ones.coeffs()) - brute).abs() < 1e-12);
    }

    #[test]
    fn stiffness_entries_quarter_mesh() {
        let k = assemble_stiffness(&Mesh::unit(4).unwrap());
        assert_eq!(k.get(1, 1), 8.0);
        assert_eq!(k.get(1, 2), -4.0);
        assert!(is_spd(&k));
    }

    #[test]
    fn stiffness_consistency_on_parabola() {
        // -u'' = 2 for u = x(1-x): K·u_I equals the load of the constant 2
        // up to P1 consistency (here exact at the nodes).
        let mesh = Mesh::unit(64).unwrap();
        let k = assemble_stiffness(&mesh);
        let u = FemVector::interpolate(mesh, |x| x * (1.0 - x));
        let lhs = k.mul_vec(u.coeffs());
        let rhs = load_vector(
            &Datum::of_x(|_| 2.0),
            0.0,
            &mesh,
            &QuadratureConfig::default(),
        )
        .unwrap();
        let err = lhs
            .iter()
            .zip(rhs.coeffs())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12, "max error {err}");
    }

    #[test]
    fn load_of_zero_and_one() {
        let mesh = Mesh::unit(4).unwrap();
        let q = QuadratureConfig::default();
        let z = load_vector(&Datum::zero(), 0.3, &mesh, &q).unwrap();
        assert!(z.coeffs().iter().all(|&c| c == 0.0));
        let one = load_vector(&Datum::of_x(|_| 1.0), 0.0, &mesh, &q).unwrap();
        for c in one.coeffs() {
            assert!((c - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn load_of_singular_power_matches_closed_form() {
        // ∫ x^β φᵢ in closed form from the moments of x^β on each element.
        let mesh = Mesh::unit(8).unwrap();
        let beta = -0.2;
        let f = Datum::of_x(move |x| x.powf(beta))
            .with_features(Features::none().with_singularities(&[0.0]));
        let got = load_vector(&f, 0.0, &mesh, &QuadratureConfig::default()).unwrap();
        let h = mesh.h();
        let m0 = |a: f64, b: f64| (b.powf(beta + 1.0) - a.powf(beta + 1.0)) / (beta + 1.0);
        let m1 = |a: f64, b: f64| (b.powf(beta + 2.0) - a.powf(beta + 2.0)) / (beta + 2.0);
        for i in 1..8 {
            let (xl, xi, xr) = (mesh.node(i - 1), mesh.node(i), mesh.node(i + 1));
            let exact = (m1(xl, xi) - xl * m0(xl, xi)) / h + (xr * m0(xi, xr) - m1(xi, xr)) / h;
            let g = got.coeffs()[i - 1];
            assert!((g / exact - 1.0).abs() < 1e-10, "i={i}: {g} vs {exact}");
        }
    }

    #[test]
    fn load_reports_non_finite_integrand() {
        let mesh = Mesh::unit(4).unwrap();
        // Singularity not declared: grading is absent but Gauss nodes still avoid 0,
        // so poison the integrand explicitly.
        let f = Datum::of_x(|x| if x < 0.1 { f64::NAN } else { 1.0 });
        let err = load_vector(&f, 0.0, &mesh, &QuadratureConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
    }

    #[test]
    fn projection_is_identity_on_p1() {
        let mesh = Mesh::unit(16).unwrap();
        let q = QuadratureConfig::default();
        let mass = assemble_mass(&mesh);
        let v = FemVector::interpolate(mesh, |x| (3.0 * x).sin() * x * (1.0 - x));
        let vv = v.clone();
        let nodes = mesh.nodes();
        let g = Datum::of_x(move |x| vv.eval(x)).with_features(Features::none().with_jumps(&nodes));
        let p = l2_project(&g, &mesh, &mass, &q).unwrap();
        for (a, b) in p.coeffs().iter().zip(v.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn indicator_load_at_node_jump() {
        let mesh = Mesh::unit(4).unwrap();
        let p = crate::problem::preset_a(0.5, 0.5).unwrap();
        let f = load_vector(&p.u0, 0.0, &mesh, &QuadratureConfig::default()).unwrap();
        let expect = [0.0, 0.125, 0.25];
        for (a, b) in f.coeffs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn indicator_load_off_node_jump() {
        // N = 5: the jump at 0.5 falls inside element 2 = [0.4, 0.6].
        let mesh = Mesh::unit(5).unwrap();
        let p = crate::problem::preset_a(0.5, 0.5).unwrap();
        let f = load_vector(&p.u0, 0.0, &mesh, &QuadratureConfig::default()).unwrap();
        // node 0.4: ∫_{0.5}^{0.6} (0.6 − x)/h = 0.025
        // node 0.6: ∫_{0.5}^{0.6} (x − 0.4)/h + h/2 = 0.075 + 0.1
        let expect = [0.0, 0.025, 0.175, 0.2];
        for (a, b) in f.coeffs().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn projection_error_of_indicator_decays_like_sqrt_h() {
        let q = QuadratureConfig::default();
        let p = crate::problem::preset_a(0.5, 0.5).unwrap();
        let err = |n: usize| {
            let mesh = Mesh::unit(n).unwrap();
            let mass = assemble_mass(&mesh);
            let c = l2_project(&p.u0, &mesh, &mass, &q).unwrap();
            let f = load_vector(&p.u0, 0.0, &mesh, &q).unwrap();
            // ‖g − P g‖² = ‖g‖² − cᵀF with ‖g‖² = 1/2.
            let cf: f64 = c.coeffs().iter().zip(f.coeffs()).map(|(a, b)| a * b).sum();
            (0.5 - cf).sqrt()
        };
        let (e1, e2, e3) = (err(32), err(64), err(128));
        assert!(e2 < e1 && e3 < e2);
        let rate = (e2 / e3).log2();
        assert!((rate - 0.5).abs() < 0.05, "rate {rate}");
    }
}
