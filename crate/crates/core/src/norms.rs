//! Discrete L² and Ĥ^ρ norms through the generalized eigenpairs of the
//! Dirichlet Laplacian pencil (K, M).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::assembly::{assemble_mass, assemble_stiffness};
use crate::error::{Error, Result};
use crate::linalg::{SpdFactor, SymMatrix};
use crate::mesh::{FemVector, Mesh};

/// Eigenpairs of `K φ = λ M φ` with `Φᵀ M Φ = I`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub mesh: Mesh,
    pub eigenvalues: Vec<f64>,
    /// Columns are M-orthonormal eigenvectors.
    pub eigenvectors: DMatrix<f64>,
    mass: SymMatrix,
}

/// `M = LLᵀ`, `C = L⁻¹ K L⁻ᵀ` is diagonalised and `Φ = L⁻ᵀ V`.
pub fn spectral_decompose(
    mass: &SymMatrix,
    stiffness: &SymMatrix,
    mesh: Mesh,
) -> Result<SpectralDecomposition> {
    let n = mass.dim();
    if stiffness.dim() != n || mesh.interior_dofs() != n {
        return Err(Error::invalid("mass, stiffness and mesh dimensions differ"));
    }
    let l = SpdFactor::new(mass.to_dense(), "mass matrix")?.lower();
    let k = stiffness.to_dense();
    let tri = l.clone();
    let linv_k = tri
        .solve_lower_triangular(&k)
        .ok_or_else(|| Error::Factorization("mass factor is singular".into()))?;
    let c_t = tri
        .solve_lower_triangular(&linv_k.transpose())
        .ok_or_else(|| Error::Factorization("mass factor is singular".into()))?;
    let c = (&c_t + c_t.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let phi = l
        .transpose()
        .solve_upper_triangular(&eig.eigenvectors)
        .ok_or_else(|| Error::Factorization("mass factor is singular".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| phi[(r, order[c])]);
    if eigenvalues.first().is_some_and(|&l| l <= 0.0) {
        return Err(Error::Factorization(
            "stiffness matrix is not positive definite".into(),
        ));
    }
    Ok(SpectralDecomposition {
        mesh,
        eigenvalues,
        eigenvectors,
        mass: mass.clone(),
    })
}

impl SpectralDecomposition {
    /// Decomposition of the P1 Laplacian on `mesh`.
    pub fn for_mesh(mesh: &Mesh) -> Result<Self> {
        spectral_decompose(&assemble_mass(mesh), &assemble_stiffness(mesh), *mesh)
    }

    /// Coordinates `c = Φᵀ M v`.
    pub fn coefficients(&self, v: &[f64]) -> Vec<f64> {
        let mv = DVector::from_vec(self.mass.mul_vec(v));
        (self.eigenvectors.transpose() * mv)
            .iter()
            .copied()
            .collect()
    }

    /// `sqrt(Σ λᵢ^ρ cᵢ²)`; ρ = 0 is the L² norm, ρ = 1 the H¹₀ seminorm.
    pub fn norm(&self, v: &FemVector, rho: f64) -> Result<f64> {
        if v.mesh() != &self.mesh {
            return Err(Error::invalid(
                "vector does not live on the decomposition's mesh",
            ));
        }
        check_rho(rho)?;
        let c = self.coefficients(v.coeffs());
        Ok(c.iter()
            .zip(&self.eigenvalues)
            .map(|(ci, li)| li.powf(rho) * ci * ci)
            .sum::<f64>()
            .sqrt())
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if (-1.0..=2.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "norm index must lie in [-1, 2], got {rho}"
        )))
    }
}

pub fn norm_l2(v: &FemVector) -> f64 {
    assemble_mass(v.mesh())
        .quad_form(v.coeffs())
        .max(0.0)
        .sqrt()
}

/// Ĥ^ρ norm, building the decomposition on the fly. Prefer
/// [`SpectralDecomposition::norm`] when several vectors share a mesh.
pub fn norm_hsigma(v: &FemVector, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    SpectralDecomposition::for_mesh(v.mesh())?.norm(v, rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lowest_eigenvalues_approximate_laplacian() {
        let d = SpectralDecomposition::for_mesh(&Mesh::unit(64).unwrap()).unwrap();
        assert!((d.eigenvalues[0] / (PI * PI) - 1.0).abs() < 2e-3);
        assert!((d.eigenvalues[1] / (4.0 * PI * PI) - 1.0).abs() < 1e-2);
        assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigenvectors_are_mass_orthonormal() {
        let mesh = Mesh::unit(16).unwrap();
        let d = SpectralDecomposition::for_mesh(&mesh).unwrap();
        let m = assemble_mass(&mesh).to_dense();
        let g = d.eigenvectors.transpose() * m * &d.eigenvectors;
        let id = DMatrix::<f64>::identity(15, 15);
        assert!((g - id).amax() < 1e-12);
    }

    #[test]
    fn rho_zero_is_l2_and_rho_one_is_energy() {
        let mesh = Mesh::unit(20).unwrap();
        let v = FemVector::interpolate(mesh, |x| x * (1.0 - x) + (7.0 * x).sin() * 0.1);
        let d = SpectralDecomposition::for_mesh(&mesh).unwrap();
        let l2 = norm_l2(&v);
        assert!((d.norm(&v, 0.0).unwrap() - l2).abs() < 1e-12 * l2);
        let energy = assemble_stiffness(&mesh).quad_form(v.coeffs()).sqrt();
        assert!((d.norm(&v, 1.0).unwrap() - energy).abs() < 1e-11 * energy);
    }

    #[test]
    fn single_mode_norm() {
        let mesh = Mesh::unit(12).unwrap();
        let d = SpectralDecomposition::for_mesh(&mesh).unwrap();
        let phi: Vec<f64> = d.eigenvectors.column(2).iter().copied().collect();
        let v = FemVector::new(mesh, phi).unwrap();
        for rho in [-1.0, -0.4, 0.5, 2.0] {
            let expect = d.eigenvalues[2].powf(rho / 2.0);
            assert!((d.norm(&v, rho).unwrap() / expect - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rho_out_of_range_rejected() {
        let v = FemVector::zeros(Mesh::unit(4).unwrap());
        assert!(norm_hsigma(&v, 2.5).is_err());
        assert!(norm_hsigma(&v, -1.5).is_err());
    }
    #[test]
    fn stiffness_is_diagonalised_with_small_residuals() {
        let mesh = Mesh::unit(32).unwrap();
        let d = SpectralDecomposition::for_mesh(&mesh).unwrap();
        let k = assemble_stiffness(&mesh).to_dense();
        let m = assemble_mass(&mesh).to_dense();
        let kd = d.eigenvectors.transpose() * &k * &d.eigenvectors;
        for i in 0..31 {
            for j in 0..31 {
                let expect = if i == j { d.eigenvalues[i] } else { 0.0 };
                assert!((kd[(i, j)] - expect).abs() <= 1e-10 * d.eigenvalues[i.max(j)]);
            }
            let phi = d.eigenvectors.column(i);
            let res = &k * phi - (&m * phi) * d.eigenvalues[i];
            assert!(res.amax() <= 1e-10 * d.eigenvalues[i]);
            assert!(d.eigenvalues[i] > 0.0);
        }
    }

    #[test]
    fn l2_norm_of_sine_interpolant() {
        let v = FemVector::interpolate(Mesh::unit(128).unwrap(), |x| (PI * x).sin());
        assert!((norm_l2(&v) - 0.5f64.sqrt()).abs() < 1e-3);
        assert!((norm_hsigma(&v, 0.0).unwrap() - norm_l2(&v)).abs() < 1e-12);
        assert_eq!(norm_l2(&FemVector::zeros(Mesh::unit(8).unwrap())), 0.0);
    }

    #[test]
    fn parseval_and_homogeneity() {
        let mesh = Mesh::unit(24).unwrap();
        let d = SpectralDecomposition::for_mesh(&mesh).unwrap();
        // Fixed pseudo-random vector.
        let mut state = 12345u64;
        let coeffs: Vec<f64> = (0..23)
            .map(|_| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        let v = FemVector::new(mesh, coeffs).unwrap();
        let c = d.coefficients(v.coeffs());
        let mass = assemble_mass(&mesh).quad_form(v.coeffs());
        assert!((c.iter().map(|x| x * x).sum::<f64>() - mass).abs() < 1e-10 * mass);
        for rho in [-1.0, 0.3, 1.0] {
            let a = d.norm(&v, rho).unwrap();
            let b = d.norm(&v.scaled(-2.5), rho).unwrap();
            assert!((b - 2.5 * a).abs() < 1e-12 * b);
        }
    }
}
