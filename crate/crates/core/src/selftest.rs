//! Fast internal consistency checks behind the `selftest` verb.

use crate::assembly::{assemble_mass, assemble_stiffness, AssembledOperators};
use crate::error::Result;
use crate::fractional::{assemble_fractional, fractional_constant};
use crate::linalg::{is_spd, SymMatrix};
use crate::mesh::{prolongate, FemVector, Mesh};
use crate::mittag_leffler::mittag_leffler;
use crate::norms::spectral_decompose;
use crate::quadrature::QuadratureConfig;
use crate::time_l1::{compensated_sum, l1_weights, march, SnapshotPolicy};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check {
            name,
            passed,
            detail,
        },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Whole-line Gram entry of two hats at offset `m`: a fourth difference of
/// |r|^{3−2s} (r² ln|r| at s = 1/2).
pub fn hat_gram_entry(h: f64, s: f64, m: usize) -> f64 {
    let w = [1.0, -4.0, 6.0, -4.0, 1.0];
    let half = (s - 0.5).abs() < 1e-14;
    let sum: f64 = w
        .iter()
        .enumerate()
        .map(|(q, wq)| {
            let r = (m as f64 + q as f64 - 2.0).abs();
            match (r == 0.0, half) {
                (true, _) => 0.0,
                (false, true) => wq * r * r * r.ln(),
                (false, false) => wq * r.powf(3.0 - 2.0 * s),
            }
        })
        .sum();
    let denom = if half {
        2.0
    } else {
        2.0 * s * (1.0 - 2.0 * s) * (2.0 - 2.0 * s) * (3.0 - 2.0 * s)
    };
    h.powf(1.0 - 2.0 * s) * fractional_constant(s) * sum / denom
}

pub fn run_selftest(q: &QuadratureConfig) -> Vec<Check> {
    let mut out = Vec::new();

    out.push(check("L1 weight identities", || {
        let mut worst = 0.0f64;
        for k in 1..=9 {
            let a = k as f64 / 10.0;
            let w = l1_weights(a, 1.0 / 256.0, 256)?;
            for n in 0..256 {
                let sum = compensated_sum(w.d[..=n].iter().copied());
                worst = worst.max((sum / (256f64.powf(a) * w.b[n]) - 1.0).abs());
            }
            if !w.b.windows(2).all(|p| p[1] < p[0]) {
                return Ok((false, format!("b not decreasing at alpha {a}")));
            }
        }
        Ok((
            worst < 1e-13,
            format!("max telescoping deviation {worst:.2e}"),
        ))
    }));

    out.push(check("mass and stiffness entries", || {
        let mesh = Mesh::unit(4)?;
        let (m, k) = (assemble_mass(&mesh), assemble_stiffness(&mesh));
        let ok = (m.get(0, 0) - 1.0 / 6.0).abs() < 1e-15
            && (m.get(0, 1) - 1.0 / 24.0).abs() < 1e-15
            && (k.get(0, 0) - 8.0).abs() < 1e-13
            && (k.get(0, 1) + 4.0).abs() < 1e-13;
        Ok((ok, "N = 4".into()))
    }));

    out.push(check("fractional stiffness vs closed form", || {
        let mut worst = 0.0f64;
        for s in [0.25, 0.5, 0.75] {
            let mesh = Mesh::unit(8)?;
            let a = assemble_fractional(&mesh, s, q)?;
            for i in 0..7 {
                for j in 0..7 {
                    worst =
                        worst.max((a.get(i, j) - hat_gram_entry(mesh.h(), s, i.abs_diff(j))).abs());
                }
            }
            if !(a.is_exactly_symmetric() && is_spd(&a)) {
                return Ok((false, format!("not SPD at s = {s}")));
            }
        }
        Ok((worst < 1e-8, format!("max deviation {worst:.2e}")))
    }));

    out.push(check("Mittag-Leffler erfc identity", || {
        let v = mittag_leffler(0.5, 1.0)?;
        let err = (v - 0.427_583_576_155_807).abs();
        Ok((err < 1e-12, format!("E_0.5(-1) = {v:.15}")))
    }));

    out.push(check("prolongation exactness", || {
        let coarse = Mesh::unit(8)?;
        let f = |x: f64| (x - 0.3).abs() * (1.0 - x) * x;
        let v = FemVector::interpolate(coarse, f);
        let fine = prolongate(&v, &coarse.refined())?;
        let worst = (1..16)
            .map(|i| {
                let x = i as f64 / 16.0;
                (fine.eval(x) - v.eval(x)).abs()
            })
            .fold(0.0, f64::max);
        Ok((worst < 1e-15, format!("max deviation {worst:.2e}")))
    }));

    out.push(check("eigenmode temporal rate", || {
        let mesh = Mesh::unit(32)?;
        let ops = AssembledOperators::new(&mesh, 0.5, q)?;
        let dec = spectral_decompose(&ops.mass, &SymMatrix::Dense(ops.elliptic_dense()), mesh)?;
        let phi = FemVector::new(mesh, dec.eigenvectors.column(0).iter().copied().collect())?;
        let exact = mittag_leffler(0.6, dec.eigenvalues[0])?;
        let mut errs = Vec::new();
        for m in [32, 64, 128] {
            let t = march(
                &ops,
                0.6,
                1.0 / m as f64,
                m,
                phi.clone(),
                |_, _| Ok(None),
                &SnapshotPolicy::FinalOnly,
            )?;
            let d = t.final_state().sub(&phi.scaled(exact))?;
            errs.push(ops.mass.quad_form(d.coeffs()).sqrt());
        }
        let rate = (errs[1] / errs[2]).log2();
        Ok(((rate - 1.0).abs() < 0.1, format!("rate {rate:.3}")))
    }));

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_selftest(&QuadratureConfig::default()) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
