//! Reference values computed independently of the library's assembly code.
#![allow(dead_code)]

use statrs::function::gamma::gamma;

pub fn c1s(s: f64) -> f64 {
    4f64.powf(s) * s * gamma(0.5 + s) / (std::f64::consts::PI.sqrt() * gamma(1.0 - s))
}

/// Gauss–Legendre nodes/weights on [-1, 1] by Golub–Welsch-free Newton.
pub fn gauss(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn integrate(rule: &[(f64, f64)], lo: f64, hi: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
    let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    rule.iter().map(|&(x, w)| w * f(m + r * x)).sum::<f64>() * r
}

/// Geometrically graded integral over [lo, hi], cells halving toward `lo`.
fn graded_left(rule: &[(f64, f64)], lo: f64, hi: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut outer = hi - lo;
    for _ in 0..400 {
        let inner = 0.5 * outer;
        sum += integrate(rule, lo + inner, lo + outer, f);
        outer = inner;
    }
    sum
}

fn hat(n: usize, node: usize, x: f64) -> f64 {
    let h = 1.0 / n as f64;
    (1.0 - (x / h - node as f64).abs()).max(0.0)
}

/// Length of [x, x + r] ∩ [a, b], exact (= r) when no end is cut off.
fn overlap(x: f64, r: f64, a: f64, b: f64) -> f64 {
    let lo_cut = (a - x).max(0.0);
    let hi_cut = (x + r - b).max(0.0);
    (r - lo_cut - hi_cut).max(0.0).min(b - a)
}

/// hat(x) − hat(x + r) as minus the integral of the slope over [x, x + r],
/// free of cancellation for tiny r.
fn hat_increment(n: usize, node: usize, x: f64, r: f64) -> f64 {
    let h = 1.0 / n as f64;
    let c = node as f64 * h;
    (overlap(x, r, c, c + h) - overlap(x, r, c - h, c)) / h
}

/// Fractional stiffness entry for interior nodes `i`, `j` (1-based node
/// numbers) on the uniform mesh of (0, 1) with `n` elements.
///
/// Uses y = x + r: the x-integral of the difference product is piecewise
/// quadratic and done exactly between breakpoints; the r-integral is graded
/// toward r = 0. The exterior part is graded toward both endpoints.
pub fn brute_force_entry(n: usize, s: f64, i: usize, j: usize) -> f64 {
    let h = 1.0 / n as f64;
    let g3 = gauss(3);
    let g20 = gauss(20);

    let inner = |r: f64| -> f64 {
        let top = 1.0 - r;
        let mut cuts: Vec<f64> = vec![0.0, top];
        for k in 0..=n {
            for c in [k as f64 * h, k as f64 * h - r] {
                if c > 0.0 && c < top {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let mut f = |x: f64| hat_increment(n, i, x, r) * hat_increment(n, j, x, r);
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| integrate(&g3, w[0], w[1], &mut f))
            .sum()
    };
    let mut kernel = |r: f64| inner(r) * r.powf(-1.0 - 2.0 * s);

    let mut double = graded_left(&g20, 0.0, h, &mut kernel);
    for k in 1..n {
        double += integrate(&g20, k as f64 * h, (k + 1) as f64 * h, &mut kernel);
    }
    double *= 2.0;

    let mut ext = 0.0;
    for k in 0..n {
        let (lo, hi) = (k as f64 * h, (k + 1) as f64 * h);
        let mid = 0.5 * (lo + hi);
        let mut f = |x: f64| {
            hat(n, i, x) * hat(n, j, x) * (x.powf(-2.0 * s) + (1.0 - x).powf(-2.0 * s)) / (2.0 * s)
        };
        if hat(n, i, mid) == 0.0 || hat(n, j, mid) == 0.0 {
            continue;
        }
        // Left half graded toward lo; right half in u = 1 − x, graded toward hi.
        ext += graded_left(&g20, lo, mid, &mut f);
        let mut g = |u: f64| {
            let x = 1.0 - u;
            hat(n, i, x) * hat(n, j, x) * (x.powf(-2.0 * s) + u.powf(-2.0 * s)) / (2.0 * s)
        };
        ext += graded_left(&g20, 1.0 - hi, 1.0 - mid, &mut g);
    }

    0.5 * c1s(s) * (double + 2.0 * ext)
}

pub fn brute_force_matrix(n: usize, s: f64) -> Vec<Vec<f64>> {
    (1..n)
        .map(|i| (1..n).map(|j| brute_force_entry(n, s, i, j)).collect())
        .collect()
}

/// Closed form of the same entry on the whole line: hat functions are second
/// differences of ramps, so the entry is a fourth difference of |r|^{3−2s}
/// (of r² ln|r| when s = 1/2). Depends only on m = |i − j|.
pub fn closed_form_entry(n: usize, s: f64, m: usize) -> f64 {
    let h = 1.0 / n as f64;
    let w = [1.0, -4.0, 6.0, -4.0, 1.0];
    let c = c1s(s);
    let sum: f64 = (0..5)
        .map(|q| {
            let r = (m as f64 + q as f64 - 2.0).abs();
            if r == 0.0 {
                0.0
            } else if s == 0.5 {
                w[q] * r * r * r.ln()
            } else {
                w[q] * r.powf(3.0 - 2.0 * s)
            }
        })
        .sum();
    let denom = if s == 0.5 {
        2.0
    } else {
        2.0 * s * (1.0 - 2.0 * s) * (2.0 - 2.0 * s) * (3.0 - 2.0 * s)
    };
    h.powf(1.0 - 2.0 * s) * c * sum / denom
}
