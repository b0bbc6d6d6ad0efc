use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type Oracle = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Which family a [`QESSpec`] belongs to; recorded in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum QESKind {
    /// `F(x) = e^{-π‖x‖²/(2s²)}`, so `|F|²` is the Gaussian of parameter `s`.
    Gaussian { s: f64 },
    /// `F ≡ 1` on the declared support.
    Constant,
    /// The indicator of the origin.
    Delta,
    Custom,
}

/// An amplitude oracle together with its declared support.
///
/// The support is the closed Euclidean ball of radius `support_radius`
/// around the origin. Oracles take real arguments; specs flagged
/// `integer_only` are evaluated at the nearest integer point.
#[derive(Clone)]
pub struct QESSpec {
    pub kind: QESKind,
    pub label: String,
    pub support_radius: f64,
    /// Radius `t` at which the spec is considered bounded, if known.
    pub bound_radius: Option<f64>,
    pub integer_only: bool,
    oracle: Oracle,
}

impl fmt::Debug for QESSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QESSpec")
            .field("label", &self.label)
            .field("support_radius", &self.support_radius)
            .field("bound_radius", &self.bound_radius)
            .field("integer_only", &self.integer_only)
            .finish()
    }
}

impl QESSpec {
    pub fn custom(
        label: impl Into<String>,
        support_radius: f64,
        integer_only: bool,
        oracle: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(support_radius >= 0.0) {
            return Err(Error::Parameter("support radius must be non-negative".into()));
        }
        Ok(Self {
            kind: QESKind::Custom,
            label: label.into(),
            support_radius,
            bound_radius: None,
            integer_only,
            oracle: Arc::new(oracle),
        })
    }

    /// `F(x)`, or zero outside the declared support.
    pub fn amplitude(&self, x: &[f64]) -> Complex64 {
        if x.iter().map(|v| v * v).sum::<f64>() > self.support_radius * self.support_radius {
            return Complex64::new(0.0, 0.0);
        }
        if self.integer_only {
            let r: Vec<f64> = x.iter().map(|v| v.round()).collect();
            (self.oracle)(&r)
        } else {
            (self.oracle)(x)
        }
    }

    /// `|F(x)|²`.
    pub fn density(&self, x: &[f64]) -> f64 {
        self.amplitude(x).norm_sqr()
    }
}

/// Gaussian amplitudes with `|F(x)|²/|F(0)|² = e^{-π‖x‖²/s²}`, supported on
/// the ball of radius `grid_radius`.
pub fn gaussian_spec(s: f64, grid_radius: f64) -> Result<QESSpec> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Parameter(format!("Gaussian parameter must be positive, got {s}")));
    }
    let inv = std::f64::consts::PI / (2.0 * s * s);
    let mut spec = QESSpec::custom(format!("gaussian({s})"), grid_radius, false, move |x| {
        Complex64::new((-inv * x.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)
    })?;
    spec.kind = QESKind::Gaussian { s };
    Ok(spec)
}

/// The spec whose squared modulus is the Fourier dual of a Gaussian target.
///
/// If `|f|² = e^{-π‖x‖²/s²}` then `f` has parameter `s√2` and its transform
/// has parameter `1/(s√2)`, whose square has parameter `1/(2s)`. Radii scale
/// by `1/(2s²)` so a support of `k·s` maps to `k·(1/(2s))`.
pub fn gaussian_dual_spec(s: f64, target_radius: f64) -> Result<QESSpec> {
    let dual = 1.0 / (2.0 * s);
    let mut spec = gaussian_spec(dual, target_radius / (2.0 * s * s))?;
    spec.label = format!("fourier_dual(gaussian({s}))");
    spec.bound_radius = None;
    Ok(spec)
}

pub fn constant_spec(support_radius: f64) -> Result<QESSpec> {
    let mut spec = QESSpec::custom("constant", support_radius, false, |_| Complex64::new(1.0, 0.0))?;
    spec.kind = QESKind::Constant;
    Ok(spec)
}

pub fn delta_spec() -> Result<QESSpec> {
    let mut spec = QESSpec::custom("delta", 0.0, true, |x| {
        Complex64::new(if x.iter().all(|&v| v == 0.0) { 1.0 } else { 0.0 }, 0.0)
    })?;
    spec.kind = QESKind::Delta;
    Ok(spec)
}

/// Fraction of squared mass outside a ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub s: f64,
    pub epsilon: f64,
}

/// Exact mass ratio of `|F|²` on `Z^n` inside the ball of radius `s`,
/// over the declared support.
pub fn bounded_check(spec: &QESSpec, dim: usize, s: f64) -> Result<BoundednessReport> {
    if !(s > 0.0) {
        return Err(Error::Parameter("radius must be positive".into()));
    }
    let r = spec.support_radius.floor() as i64;
    let (mut inside, mut total) = (0f64, 0f64);
    let mut x = vec![-r; dim];
    loop {
        let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
        let m = spec.density(&xf);
        total += m;
        if xf.iter().map(|v| v * v).sum::<f64>() <= s * s {
            inside += m;
        }
        let mut pos = dim;
        loop {
            if pos == 0 {
                if total <= 0.0 {
                    return Err(Error::EmptySupport("spec has zero mass on its support".into()));
                }
                let epsilon = (1.0 - inside / total).clamp(0.0, 1.0);
                return Ok(BoundednessReport { s, epsilon });
            }
            pos -= 1;
            if x[pos] < r {
                x[pos] += 1;
                break;
            }
            x[pos] = -r;
        }
    }
}
