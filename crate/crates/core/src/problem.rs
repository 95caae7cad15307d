//! Problem data: model parameters, initial datum and source.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::Features;

type SpaceTimeFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// A scalar function of `(x, t)` together with the points where it is not
/// smooth in `x`, so quadrature can split or grade there.
#[derive(Clone)]
pub struct Datum {
    func: Option<Arc<SpaceTimeFn>>,
    features: Features,
}

impl Datum {
    /// The zero function; load vectors of it are skipped entirely.
    pub fn zero() -> Self {
        Self {
            func: None,
            features: Features::none(),
        }
    }

    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            func: Some(Arc::new(f)),
            features: Features::none(),
        }
    }

    /// A time-independent function of `x`.
    pub fn of_x(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(move |x, _| f(x))
    }

    pub fn with_features(mut self, features: Features) -> Self {
        self.features = features;
        self
    }

    pub fn features(&self) -> &Features {
        &self.features
    }

    pub fn is_zero(&self) -> bool {
        self.func.is_none()
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match &self.func {
            Some(f) => f(x, t),
            None => 0.0,
        }
    }

    /// Sum of two data; features are merged.
    pub fn plus(&self, other: &Datum) -> Datum {
        match (&self.func, &other.func) {
            (None, _) => other.clone(),
            (_, None) => self.clone(),
            (Some(f), Some(g)) => {
                let (f, g) = (f.clone(), g.clone());
                let mut features = self.features.clone();
                features.jumps.extend_from_slice(&other.features.jumps);
                features
                    .singularities
                    .extend_from_slice(&other.features.singularities);
                Datum::new(move |x, t| f(x, t) + g(x, t)).with_features(features)
            }
        }
    }
}

impl fmt::Debug for Datum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Datum")
            .field("zero", &self.is_zero())
            .field("features", &self.features)
            .finish()
    }
}

/// Parameters and data of the two-scale time-fractional problem on (a, b).
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
    pub t_final: f64,
    pub u0: Datum,
    pub f: Datum,
}

impl ProblemSpec {
    pub fn new(
        alpha: f64,
        s: f64,
        (a, b): (f64, f64),
        t_final: f64,
        u0: Datum,
        f: Datum,
    ) -> Result<Self> {
        let p = Self {
            alpha,
            s,
            a,
            b,
            t_final,
            u0,
            f,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("alpha", self.alpha)?;
        check_open_unit("s", self.s)?;
        if !(self.a.is_finite() && self.b.is_finite() && self.b > self.a) {
            return Err(Error::invalid(format!(
                "domain must satisfy a < b, got ({}, {})",
                self.a, self.b
            )));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::invalid(format!(
                "T must be positive, got {}",
                self.t_final
            )));
        }
        Ok(())
    }

    /// Same data with different fractional orders.
    pub fn with_orders(&self, alpha: f64, s: f64) -> Result<Self> {
        let mut p = self.clone();
        p.alpha = alpha;
        p.s = s;
        p.validate()?;
        Ok(p)
    }
}

pub(crate) fn check_open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must lie in (0, 1), got {v}"
        )))
    }
}

/// Indicator of (0.5, 1) as initial value, no source. Ω = (0, 1), T = 1.
pub fn preset_a(alpha: f64, s: f64) -> Result<ProblemSpec> {
    let u0 = Datum::of_x(|x| if x > 0.5 && x < 1.0 { 1.0 } else { 0.0 })
        .with_features(Features::none().with_jumps(&[0.5, 1.0]));
    ProblemSpec::new(alpha, s, (0.0, 1.0), 1.0, u0, Datum::zero())
}

/// Zero initial value, source t^0.1 x^-0.2. Ω = (0, 1), T = 1.
pub fn preset_b(alpha: f64, s: f64) -> Result<ProblemSpec> {
    let f = Datum::new(|x, t| t.powf(0.1) * x.powf(-0.2))
        .with_features(Features::none().with_singularities(&[0.0]));
    ProblemSpec::new(alpha, s, (0.0, 1.0), 1.0, Datum::zero(), f)
}
