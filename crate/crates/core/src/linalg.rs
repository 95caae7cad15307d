//! Symmetric matrix storage and the dense SPD factorization used by the
//! time stepper.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric matrix in either tridiagonal or dense storage.
#[derive(Debug, Clone, PartialEq)]
pub enum SymMatrix {
    /// `diag[i]` and `off[i] = A[i][i+1] = A[i+1][i]`.
    Tridiagonal { diag: Vec<f64>, off: Vec<f64> },
    /// Full storage; the assembly routines mirror the upper triangle exactly.
    Dense(DMatrix<f64>),
}

impl SymMatrix {
    pub fn tridiagonal(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        SymMatrix::Tridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        match self {
            SymMatrix::Tridiagonal { diag, .. } => diag.len(),
            SymMatrix::Dense(m) => m.nrows(),
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            SymMatrix::Tridiagonal { diag, off } => {
                if i == j {
                    diag[i]
                } else if i + 1 == j {
                    off[i]
                } else if j + 1 == i {
                    off[j]
                } else {
                    0.0
                }
            }
            SymMatrix::Dense(m) => m[(i, j)],
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim());
        match self {
            SymMatrix::Tridiagonal { diag, off } => {
                let n = diag.len();
                (0..n)
                    .map(|i| {
                        let mut acc = diag[i] * v[i];
                        if i > 0 {
                            acc += off[i - 1] * v[i - 1];
                        }
                        if i + 1 < n {
                            acc += off[i] * v[i + 1];
                        }
                        acc
                    })
                    .collect()
            }
            SymMatrix::Dense(m) => {
                let out = m * DVector::from_column_slice(v);
                out.as_slice().to_vec()
            }
        }
    }

    /// vᵀAv.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SymMatrix::Dense(m) => m.clone(),
            SymMatrix::Tridiagonal { .. } => {
                let n = self.dim();
                DMatrix::from_fn(n, n, |i, j| self.get(i, j))
            }
        }
    }

    /// True if `A[i][j] == A[j][i]` bit for bit.
    pub fn is_exactly_symmetric(&self) -> bool {
        match self {
            SymMatrix::Tridiagonal { .. } => true,
            SymMatrix::Dense(m) => {
                let n = m.nrows();
                (0..n).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]))
            }
        }
    }

    /// Solves `A x = rhs` for a tridiagonal SPD matrix (no pivoting).
    pub fn solve_tridiagonal(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let SymMatrix::Tridiagonal { diag, off } = self else {
            return Err(Error::invalid("solve_tridiagonal called on a dense matrix"));
        };
        let n = diag.len();
        assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = diag[0];
        if denom <= 0.0 {
            return Err(Error::Factorization(
                "non-positive pivot in tridiagonal solve".into(),
            ));
        }
        if n > 1 {
            c[0] = off[0] / denom;
        }
        d[0] = rhs[0] / denom;
        for i in 1..n {
            denom = diag[i] - off[i - 1] * c[i - 1];
            if denom <= 0.0 {
                return Err(Error::Factorization(format!(
                    "non-positive pivot at row {i} in tridiagonal solve"
                )));
            }
            if i + 1 < n {
                c[i] = off[i] / denom;
            }
            d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }

    /// Writes the matrix as `%%SymMatrix n` followed by one `i j value` line per
    /// upper-triangle nonzero (1-based indices, 17 significant digits).
    pub fn write_triplets(&self, path: &Path) -> Result<()> {
        let n = self.dim();
        let mut out = format!("%%SymMatrix {n}\n");
        for i in 0..n {
            for j in i..n {
                let v = self.get(i, j);
                if v != 0.0 {
                    let _ = writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v);
                }
            }
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn read_triplets(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: &str| Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.to_string(),
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
        let n: usize = header
            .strip_prefix("%%SymMatrix ")
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| parse_err(1, "expected '%%SymMatrix n' header"))?;
        let mut m = DMatrix::zeros(n, n);
        for (k, line) in lines.enumerate() {
            let mut it = line.split_whitespace();
            let (Some(i), Some(j), Some(v)) = (it.next(), it.next(), it.next()) else {
                return Err(parse_err(k + 2, "expected 'i j value'"));
            };
            let i: usize = i.parse().map_err(|_| parse_err(k + 2, "bad row index"))?;
            let j: usize = j
                .parse()
                .map_err(|_| parse_err(k + 2, "bad column index"))?;
            let v: f64 = v.parse().map_err(|_| parse_err(k + 2, "bad value"))?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err(parse_err(k + 2, "index out of range"));
            }
            m[(i - 1, j - 1)] = v;
            m[(j - 1, i - 1)] = v;
        }
        Ok(SymMatrix::Dense(m))
    }
}

/// Dense Cholesky factorization `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl SpdFactor {
    pub fn new(a: DMatrix<f64>, what: &str) -> Result<Self> {
        nalgebra::Cholesky::new(a)
            .map(|chol| Self { chol })
            .ok_or_else(|| {
                Error::Factorization(format!("{what} is not symmetric positive definite"))
            })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = DVector::from_column_slice(rhs);
        self.chol.solve_mut(&mut x);
        x.as_slice().to_vec()
    }

    pub fn lower(&self) -> DMatrix<f64> {
        self.chol.l()
    }
}

/// Cholesky succeeds, used as the SPD test throughout.
pub fn is_spd(a: &SymMatrix) -> bool {
    nalgebra::Cholesky::new(a.to_dense()).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve_recovers_known_solution() {
        let a = SymMatrix::tridiagonal(vec![4.0, 5.0, 6.0, 7.0], vec![1.0, -2.0, 0.5]);
        let x = vec![1.0, -1.0, 2.0, 0.25];
        let b = a.mul_vec(&x);
        let got = a.solve_tridiagonal(&b).unwrap();
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn dense_and_tridiagonal_agree() {
        let a = SymMatrix::tridiagonal(vec![2.0, 2.0, 2.0], vec![-1.0, -1.0]);
        let d = SymMatrix::Dense(a.to_dense());
        let v = [0.3, -0.7, 1.1];
        assert_eq!(a.mul_vec(&v), d.mul_vec(&v));
        assert!(is_spd(&a));
    }

    #[test]
    fn factor_rejects_indefinite() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            SpdFactor::new(m, "test"),
            Err(Error::Factorization(_))
        ));
    }

    #[test]
    fn triplet_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let m = SymMatrix::Dense(DMatrix::from_row_slice(
            3,
            3,
            &[
                1.0 / 3.0,
                -0.1,
                0.0,
                -0.1,
                2.0,
                1e-17,
                0.0,
                1e-17,
                std::f64::consts::PI,
            ],
        ));
        m.write_triplets(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("%%SymMatrix 3\n"));
        assert_eq!(SymMatrix::read_triplets(&path).unwrap(), m);
    }
}
