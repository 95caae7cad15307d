//! One-dimensional quadrature building blocks: Gauss–Legendre rules,
//! geometrically graded rules for endpoint singularities, element rules that
//! respect jumps and singular points of the integrand, and an adaptive
//! Gauss–Kronrod integrator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature parameters shared by the assembly routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss–Legendre order used on every smooth cell.
    pub gauss_order: usize,
    /// Dyadic radial levels of the Duffy-transformed touching-pair integrals.
    pub duffy_levels: usize,
    /// Geometric ratio of the cells graded toward an endpoint singularity.
    pub grading_ratio: f64,
    /// Number of graded cells before the innermost remainder cell.
    pub grading_levels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            gauss_order: 6,
            duffy_levels: 8,
            grading_ratio: 0.15,
            grading_levels: 30,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gauss_order < 2 || self.gauss_order > 64 {
            return Err(Error::invalid(format!(
                "gauss_order must lie in [2, 64], got {}",
                self.gauss_order
            )));
        }
        if self.duffy_levels < 1 || self.duffy_levels > 60 {
            return Err(Error::invalid(format!(
                "duffy_levels must lie in [1, 60], got {}",
                self.duffy_levels
            )));
        }
        if !(self.grading_ratio > 0.0 && self.grading_ratio < 1.0) {
            return Err(Error::invalid(format!(
                "grading_ratio must lie in (0, 1), got {}",
                self.grading_ratio
            )));
        }
        if self.grading_levels < 1 {
            return Err(Error::invalid("grading_levels must be at least 1"));
        }
        Ok(())
    }

    /// Order used on graded cells. Cells with ratio 0.15 are far from the
    /// singular point only by a factor ~1.35 of their half-width, so they need
    /// roughly twice the smooth-cell order to reach 1e-10.
    pub fn graded_order(&self) -> usize {
        2 * self.gauss_order
    }

    /// Same configuration with every quadrature order doubled.
    pub fn doubled(&self) -> Self {
        Self {
            gauss_order: 2 * self.gauss_order,
            duffy_levels: 2 * self.duffy_levels,
            grading_levels: 2 * self.grading_levels,
            ..*self
        }
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, refined by Newton on P_n.
            let mut x = ((4.0 * i as f64 + 3.0) / (4.0 * nf + 2.0) * std::f64::consts::PI).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto [lo, hi].
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(lo, hi).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Points at which an integrand is not smooth.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Features {
    /// Jump discontinuities: elements are split there before quadrature.
    pub jumps: Vec<f64>,
    /// Integrable algebraic singularities: never evaluated, graded toward.
    pub singularities: Vec<f64>,
}

impl Features {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_jumps(mut self, jumps: &[f64]) -> Self {
        self.jumps.extend_from_slice(jumps);
        self
    }

    pub fn with_singularities(mut self, points: &[f64]) -> Self {
        self.singularities.extend_from_slice(points);
        self
    }
}

/// A flat list of quadrature points and weights.
#[derive(Debug, Clone, Default)]
pub struct PointRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PointRule {
    fn push_gauss(&mut self, rule: &GaussRule, lo: f64, hi: f64) {
        for (x, w) in rule.mapped(lo, hi) {
            self.points.push(x);
            self.weights.push(w);
        }
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

// Cells closer to a singular point than this many of their own lengths are split.
const NEAR_FIELD_FACTOR: f64 = 4.0;
const MAX_NEAR_SPLIT: usize = 64;

/// Builds a quadrature rule for [lo, hi] that splits at interior jumps, grades
/// geometrically toward singular points on (or inside) the interval and splits
/// uniformly when a singular point sits just outside.
pub fn element_rule(lo: f64, hi: f64, features: &Features, q: &QuadratureConfig) -> PointRule {
    let scale = (hi - lo).abs().max(lo.abs()).max(hi.abs()).max(1.0);
    let snap = 64.0 * f64::EPSILON * scale;

    let mut cuts = vec![lo, hi];
    for &p in features.jumps.iter().chain(&features.singularities) {
        if p > lo + snap && p < hi - snap {
            cuts.push(p);
        }
    }
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup();

    let smooth = GaussRule::new(q.gauss_order);
    let graded = GaussRule::new(q.graded_order());
    let mut rule = PointRule::default();

    for piece in cuts.windows(2) {
        let (a, b) = (piece[0], piece[1]);
        let len = b - a;
        let sing_left = features
            .singularities
            .iter()
            .any(|&p| (p - a).abs() <= snap);
        let sing_right = features
            .singularities
            .iter()
            .any(|&p| (p - b).abs() <= snap);
        match (sing_left, sing_right) {
            (true, true) => {
                let m = 0.5 * (a + b);
                push_graded(&mut rule, &graded, a, m, true, q);
                push_graded(&mut rule, &graded, m, b, false, q);
            }
            (true, false) => push_graded(&mut rule, &graded, a, b, true, q),
            (false, true) => push_graded(&mut rule, &graded, a, b, false, q),
            (false, false) => {
                let dist = features
                    .singularities
                    .iter()
                    .map(|&p| {
                        if p < a {
                            a - p
                        } else if p > b {
                            p - b
                        } else {
                            0.0
                        }
                    })
                    .fold(f64::INFINITY, f64::min);
                let m = if dist.is_finite() && dist < NEAR_FIELD_FACTOR * len {
                    ((NEAR_FIELD_FACTOR * len / dist).ceil() as usize).clamp(1, MAX_NEAR_SPLIT)
                } else {
                    1
                };
                let step = len / m as f64;
                for k in 0..m {
                    let c0 = a + k as f64 * step;
                    let c1 = if k + 1 == m {
                        b
                    } else {
                        a + (k + 1) as f64 * step
                    };
                    rule.push_gauss(&smooth, c0, c1);
                }
            }
        }
    }
    rule
}

fn push_graded(
    rule: &mut PointRule,
    gauss: &GaussRule,
    a: f64,
    b: f64,
    toward_left: bool,
    q: &QuadratureConfig,
) {
    let len = b - a;
    // Distances from the singular end: len, len*r, len*r^2, ...
    let mut outer = len;
    for _ in 0..q.grading_levels {
        let inner = outer * q.grading_ratio;
        // Stop before cells shrink to rounding level next to a nonzero endpoint.
        let end = if toward_left { a } else { b };
        if inner <= 1024.0 * f64::EPSILON * end.abs() {
            break;
        }
        if toward_left {
            rule.push_gauss(gauss, a + inner, a + outer);
        } else {
            rule.push_gauss(gauss, b - outer, b - inner);
        }
        outer = inner;
    }
    // Innermost remainder: Gauss nodes are interior so the singular point is never hit.
    if toward_left {
        rule.push_gauss(gauss, a, a + outer);
    } else {
        rule.push_gauss(gauss, b - outer, b);
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of a smooth-enough integrand.
/// Subdivides bisectively until each panel's Kronrod/Gauss difference is below
/// its share of `abs_tol + rel_tol·|I|`.
pub fn adaptive_gk(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    const MAX_PANELS: usize = 20_000;
    let (v, e) = gk15(&mut f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) || panels.len() >= MAX_PANELS {
            return total;
        }
        // Split the worst panel.
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        for n in 1..=20 {
            let rule = GaussRule::new(n);
            let wsum: f64 = rule.weights.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-14, "n={n}");
            for p in 0..2 * n {
                let got = rule.integrate(0.0, 1.0, |x| x.powi(p as i32));
                let exact = 1.0 / (p as f64 + 1.0);
                assert!((got - exact).abs() < 1e-14, "n={n} p={p}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn gauss_nodes_are_ascending_and_interior() {
        let rule = GaussRule::new(9);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(rule.nodes.iter().all(|x| x.abs() < 1.0));
    }

    #[test]
    fn graded_rule_handles_endpoint_singularity() {
        let q = QuadratureConfig::default();
        let feats = Features::none().with_singularities(&[0.0]);
        for beta in [-0.2, -0.5, 0.2] {
            let rule = element_rule(0.0, 0.125, &feats, &q);
            assert!(rule.points.iter().all(|&x| x > 0.0));
            let got = rule.integrate(|x| x.powf(beta));
            let exact = 0.125f64.powf(beta + 1.0) / (beta + 1.0);
            assert!(
                (got / exact - 1.0).abs() < 1e-9,
                "beta={beta}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn element_rule_splits_at_jumps() {
        let q = QuadratureConfig::default();
        let feats = Features::none().with_jumps(&[0.3]);
        let rule = element_rule(0.0, 1.0, &feats, &q);
        let got = rule.integrate(|x| if x > 0.3 { x } else { 0.0 });
        assert!((got - 0.5 * (1.0 - 0.09)).abs() < 1e-15);
    }

    #[test]
    fn near_singularity_is_subdivided() {
        let q = QuadratureConfig::default();
        let feats = Features::none().with_singularities(&[0.0]);
        let h = 1.0 / 64.0;
        let rule = element_rule(h, 2.0 * h, &feats, &q);
        let got = rule.integrate(|x| x.powf(-1.8));
        let exact = (h.powf(-0.8) - (2.0 * h).powf(-0.8)) / 0.8;
        assert!((got / exact - 1.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_gk_matches_closed_forms() {
        let v = adaptive_gk(|x| x.sqrt(), 0.0, 1.0, 1e-15, 1e-13);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        let v = adaptive_gk(|x| (-x).exp(), 0.0, 40.0, 1e-15, 1e-13);
        assert!((v - (1.0 - (-40.0f64).exp())).abs() < 1e-12);
    }
}
