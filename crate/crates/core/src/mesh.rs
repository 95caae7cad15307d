//! Uniform 1D meshes and P1 finite element functions with homogeneous
//! exterior values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform partition of (a, b) into `n` subintervals. Only the `n - 1`
/// interior nodes carry unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    a: f64,
    b: f64,
    n: usize,
}

impl Mesh {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::invalid(format!(
                "mesh needs finite endpoints with b > a, got ({a}, {b})"
            )));
        }
        if n < 2 {
            return Err(Error::invalid(format!(
                "mesh needs at least 2 subintervals for an interior unknown, got {n}"
            )));
        }
        Ok(Self { a, b, n })
    }

    /// The unit interval split into `n` pieces.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(0.0, 1.0, n)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of subintervals.
    pub fn elements(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn interior_dofs(&self) -> usize {
        self.n - 1
    }

    /// Node `i` for `i` in `0..=n`. The endpoints are returned exactly.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        if i == self.n {
            self.b
        } else {
            self.a + (self.b - self.a) * (i as f64 / self.n as f64)
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    /// Interior node coordinates, one per unknown.
    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.n).map(|i| self.node(i)).collect()
    }

    /// Endpoints of element `k`.
    pub fn element(&self, k: usize) -> (f64, f64) {
        (self.node(k), self.node(k + 1))
    }

    /// The mesh obtained by halving every element.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n,
            ..*self
        }
    }

    pub fn same_domain(&self, other: &Mesh) -> bool {
        self.a == other.a && self.b == other.b
    }

    /// Unknown index of global node `node`, if the node is interior.
    pub fn dof_of_node(&self, node: usize) -> Option<usize> {
        if node == 0 || node >= self.n {
            None
        } else {
            Some(node - 1)
        }
    }
}

/// Coefficients of a P1 function at the interior nodes of a mesh; the
/// function is zero at the boundary nodes and outside the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemVector {
    mesh: Mesh,
    coeffs: Vec<f64>,
}

impl FemVector {
    pub fn new(mesh: Mesh, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mesh.interior_dofs() {
            return Err(Error::invalid(format!(
                "expected {} coefficients for N = {}, got {}",
                mesh.interior_dofs(),
                mesh.elements(),
                coeffs.len()
            )));
        }
        Ok(Self { mesh, coeffs })
    }

    pub fn zeros(mesh: Mesh) -> Self {
        Self {
            mesh,
            coeffs: vec![0.0; mesh.interior_dofs()],
        }
    }

    /// Nodal interpolant of `g` (boundary values are discarded).
    pub fn interpolate(mesh: Mesh, g: impl Fn(f64) -> f64) -> Self {
        let coeffs = mesh.interior_nodes().into_iter().map(g).collect();
        Self { mesh, coeffs }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Value at global node `i` (0 at the boundary nodes).
    pub fn nodal_value(&self, i: usize) -> f64 {
        match self.mesh.dof_of_node(i) {
            Some(k) => self.coeffs[k],
            None => 0.0,
        }
    }

    /// Evaluates the piecewise-linear function at `x`; zero outside (a, b).
    pub fn eval(&self, x: f64) -> f64 {
        let m = &self.mesh;
        if !(x > m.a() && x < m.b()) {
            return 0.0;
        }
        let t = (x - m.a()) / m.h();
        let k = (t.floor() as usize).min(m.elements() - 1);
        let xi = t - k as f64;
        (1.0 - xi) * self.nodal_value(k) + xi * self.nodal_value(k + 1)
    }

    /// Returns `self - other`; both must live on the same mesh.
    pub fn sub(&self, other: &FemVector) -> Result<FemVector> {
        if self.mesh != other.mesh {
            return Err(Error::invalid(
                "cannot subtract vectors on different meshes",
            ));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(FemVector {
            mesh: self.mesh,
            coeffs,
        })
    }

    pub fn scaled(&self, factor: f64) -> FemVector {
        FemVector {
            mesh: self.mesh,
            coeffs: self.coeffs.iter().map(|c| factor * c).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Exact representation of a coarse P1 function on the twice-refined mesh:
/// shared nodes copy, new midpoints average their two neighbours.
pub fn prolongate(v: &FemVector, fine: &Mesh) -> Result<FemVector> {
    let coarse = v.mesh();
    if !coarse.same_domain(fine) || fine.elements() != 2 * coarse.elements() {
        return Err(Error::invalid(format!(
            "prolongation needs a nested mesh with twice the elements on the same domain; \
             coarse N = {} on ({}, {}), fine N = {} on ({}, {})",
            coarse.elements(),
            coarse.a(),
            coarse.b(),
            fine.elements(),
            fine.a(),
            fine.b()
        )));
    }
    let coeffs = (1..fine.elements())
        .map(|j| {
            if j % 2 == 0 {
                v.nodal_value(j / 2)
            } else {
                0.5 * (v.nodal_value(j / 2) + v.nodal_value(j / 2 + 1))
            }
        })
        .collect();
    FemVector::new(*fine, coeffs)
}
