//! Pulse-envelope family interpolating between a pure sin² pulse and a
//! rectangular one at fixed peak field strength and fixed fluence.
//!
//! The smoothed shape with parameter `a > 0` is
//!
//! ```text
//! f(s) = (1+a)·sin²[π(N(a)s + ½)] / (1 + a·sin²[π(N(a)s + ½)]),   |s| ≤ 1/(2N(a)),
//! ```
//!
//! in normalized time s = t/τ, where the normalization factor N(a) is chosen
//! so that ∫ f²(s) ds = 1 over the support — i.e. the pulse carries the same
//! energy per unit cross section as a unit rectangle of duration τ. The
//! limits are N(0) = 3/8 (pure sin²) and N(∞) = 1 (rectangle); the support
//! length 1/N(a) shrinks toward 1 as a grows.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("smoothing factor must be positive and finite, got {0}")]
    Domain(f64),
    #[error("unrecognized envelope `{0}`; expected rect, sin2 or smooth:a=<float>")]
    Parse(String),
    #[error("per-color envelope shapes are not modeled; set shared_shape")]
    UnsharedShape,
}

/// Envelope shape tag. Rectangular is a distinct variant rather than a
/// huge-a smoothed shape so that the analytic propagator can be selected
/// exactly, without a tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Rectangular,
    PureSin2,
    Smoothed { a: f64 },
}

/// Pulse envelope shared by both colors (the model assumes a common pulse
/// duration and shape for the two fields).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSpec {
    pub shape: Shape,
    pub shared_shape: bool,
}

/// Below this smoothing factor N(a) is evaluated from its small-a series;
/// the closed form loses ~7 digits to cancellation as a → 0.
const SERIES_SWITCH: f64 = 1e-3;

/// Normalization factor N(a) = ((1+a)²/a²)·{1 − (2+3a)/(2(1+a)^{3/2})}.
pub fn normalization_factor(a: f64) -> Result<f64, EnvelopeError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(EnvelopeError::Domain(a));
    }
    if a < SERIES_SWITCH {
        // (1+a)²·(3/8 − 5a/8 + 105a²/128 − 63a³/64) + O(a⁴)
        let series = 3.0 / 8.0 - 5.0 / 8.0 * a + 105.0 / 128.0 * a * a - 63.0 / 64.0 * a * a * a;
        return Ok((1.0 + a) * (1.0 + a) * series);
    }
    let u = 1.0 + a;
    Ok(u * u / (a * a) * (1.0 - (2.0 + 3.0 * a) / (2.0 * u.powf(1.5))))
}

impl EnvelopeSpec {
    pub fn rectangular() -> EnvelopeSpec {
        EnvelopeSpec { shape: Shape::Rectangular, shared_shape: true }
    }

    pub fn pure_sin2() -> EnvelopeSpec {
        EnvelopeSpec { shape: Shape::PureSin2, shared_shape: true }
    }

    pub fn smoothed(a: f64) -> Result<EnvelopeSpec, EnvelopeError> {
        normalization_factor(a)?;
        Ok(EnvelopeSpec { shape: Shape::Smoothed { a }, shared_shape: true })
    }

    /// N for this shape: 1 (rectangle), 3/8 (pure sin²), or N(a).
    pub fn normalization(&self) -> f64 {
        match self.shape {
            Shape::Rectangular => 1.0,
            Shape::PureSin2 => 3.0 / 8.0,
            Shape::Smoothed { a } => normalization_factor(a).expect("validated at construction"),
        }
    }

    /// Half-length 1/(2N) of the support in normalized time.
    pub fn support_half_width(&self) -> f64 {
        0.5 / self.normalization()
    }

    /// Field-strength factor at normalized time s: unit peak at s = 0, zero
    /// at the support endpoints, zero outside the support.
    pub fn value(&self, s: f64) -> f64 {
        if s.abs() > self.support_half_width() {
            return 0.0;
        }
        match self.shape {
            Shape::Rectangular => 1.0,
            Shape::PureSin2 => {
                let w = (std::f64::consts::PI * (3.0 / 8.0 * s + 0.5)).sin();
                w * w
            }
            Shape::Smoothed { a } => {
                let n = self.normalization();
                let w = (std::f64::consts::PI * (n * s + 0.5)).sin();
                let s2 = w * w;
                (1.0 + a) * s2 / (1.0 + a * s2)
            }
        }
    }

    /// ∫ f²(s) ds over the support, by adaptive quadrature. Equals 1 for
    /// every shape by construction of N(a); deviations beyond ~1e−8 indicate
    /// a broken normalization.
    pub fn fluence(&self) -> f64 {
        let h = self.support_half_width();
        adaptive_simpson(&|s| self.value(s).powi(2), -h, h, 1e-10)
    }

    pub fn shape_label(&self) -> &'static str {
        match self.shape {
            Shape::Rectangular => "rect",
            Shape::PureSin2 => "sin2",
            Shape::Smoothed { .. } => "smooth",
        }
    }

    /// Smoothing factor as a CSV cell (empty for rect/sin2).
    pub fn a_label(&self) -> String {
        match self.shape {
            Shape::Smoothed { a } => format!("{a}"),
            _ => String::new(),
        }
    }
}

impl fmt::Display for EnvelopeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shape {
            Shape::Rectangular => f.write_str("rect"),
            Shape::PureSin2 => f.write_str("sin2"),
            Shape::Smoothed { a } => write!(f, "smooth:a={a}"),
        }
    }
}

impl FromStr for EnvelopeSpec {
    type Err = EnvelopeError;

    fn from_str(s: &str) -> Result<EnvelopeSpec, EnvelopeError> {
        match s {
            "rect" => Ok(EnvelopeSpec::rectangular()),
            "sin2" => Ok(EnvelopeSpec::pure_sin2()),
            other => {
                let a = other
                    .strip_prefix("smooth:a=")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| EnvelopeError::Parse(other.to_string()))?;
                EnvelopeSpec::smoothed(a)
            }
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1)
            + rec(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, eps, 48)
}
