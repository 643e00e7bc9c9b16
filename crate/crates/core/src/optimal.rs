//! Optimization of the narrow-level width and of the residual probability:
//! the closed-form optimal detuning line δ_opt(x), the optimized widths and
//! their large-x asymptotics, the δ̃ = 0 point, bracketed numerical width
//! minimization, and the empirical optimal-detuning fit for smooth pulses.
//!
//! The width g₊(δ, x) is stationary in δ where Im[δ̃·α₁₂*] = 0, which makes
//! δ_opt a linear function of x:
//!
//! ```text
//! δ_opt(x) = ¼{α₂′(ω₁)−α₁′(ω₁) − (α₁₂′/α₁₂″)[α₂″(ω₁)−α₁″(ω₁)]}
//!          + (x/4){α₂′(ω₂)−α₁′(ω₂) − (α₁₂′/α₁₂″)[α₂″(ω₂)−α₁″(ω₂)]}.
//! ```

use rayon::prelude::*;
use thiserror::Error;

use crate::atoms::AtomDataset;
use crate::dressed::{widths, DrivePoint};
use crate::dynamics::{self, DynamicsError};
use crate::pulses::EnvelopeSpec;

#[derive(Debug, Error)]
pub enum OptimalError {
    #[error("degenerate coupling: a12'' = 0, no optimal-detuning extremum exists")]
    DegenerateCoupling,
    #[error("closed-form optimized width requires a1w2'' = 0, dataset has {0}; minimize numerically instead")]
    UnsupportedDataset(f64),
    #[error("asymptotic width undefined: {0}")]
    DivisionDomain(&'static str),
    #[error("degenerate dataset: a2w2'' = a1w2'', no zero-detuning point")]
    DegenerateDataset,
    #[error("no interior minimum inside the bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
    #[error("empirical fit needs at least 3 grid points, got {0}")]
    InsufficientGrid(usize),
    #[error("optimizer failed at x = {failed:?}")]
    PartialFit { failed: Vec<f64> },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// A line δ(x) = intercept + slope·x; `fit_residual` is the rms of the fit
/// (0 for closed forms).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearLaw {
    pub intercept: f64,
    pub slope: f64,
    pub fit_residual: f64,
}

impl LinearLaw {
    pub fn eval(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Closed-form optimal-narrowing detuning line.
pub fn delta_opt_law(ds: &AtomDataset) -> Result<LinearLaw, OptimalError> {
    if ds.a12.im == 0.0 {
        return Err(OptimalError::DegenerateCoupling);
    }
    let r = ds.a12.re / ds.a12.im;
    let intercept = 0.25 * (ds.a2w1.re - ds.a1w1.re - r * (ds.a2w1.im - ds.a1w1.im));
    let slope = 0.25 * (ds.a2w2.re - ds.a1w2.re - r * (ds.a2w2.im - ds.a1w2.im));
    Ok(LinearLaw { intercept, slope, fit_residual: 0.0 })
}

/// δ_opt(x): the detuning minimizing the narrow width g₊ at fixed x.
pub fn delta_opt(ds: &AtomDataset, x: f64) -> Result<f64, OptimalError> {
    Ok(delta_opt_law(ds)?.eval(x))
}

/// Optimized widths (g₊, g₋) along δ = δ_opt(x), in the closed form valid
/// when the low-frequency field cannot ionize level 1 (α₁″(ω₂) = 0):
///
/// ```text
/// g_± = ½α₁″(ω₁) − δ̃″_opt(x) ∓ √(δ̃″_opt(x)² + ¼α₁₂″²x),
/// δ̃″_opt(x) = −¼[α₂″(ω₁) − α₁″(ω₁) + α₂″(ω₂)x].
/// ```
pub fn g_opt(ds: &AtomDataset, x: f64) -> Result<(f64, f64), OptimalError> {
    if ds.a1w2.im != 0.0 {
        return Err(OptimalError::UnsupportedDataset(ds.a1w2.im));
    }
    let dpp = -0.25 * (ds.a2w1.im - ds.a1w1.im + ds.a2w2.im * x);
    let root = (dpp * dpp + 0.25 * ds.a12.im * ds.a12.im * x).sqrt();
    let base = 0.5 * ds.a1w1.im - dpp;
    Ok((base - root, base + root))
}

/// Leading large-x term of the optimized narrow width,
/// g₊ ≈ α₁″(ω₁)α₂″(ω₁) / (2x·α₂″(ω₂)).
///
/// The 1/x decay to zero holds exactly only under exact factorization
/// α₁₂″² = α₁″(ω₁)α₂″(ω₂); with a factorization residual the optimized
/// width instead approaches the floor ½α₁″(ω₁) − α₁₂″²/(2α₂″(ω₂)).
pub fn asymptotic_width(ds: &AtomDataset, x: f64) -> Result<f64, OptimalError> {
    if ds.a2w2.im == 0.0 {
        return Err(OptimalError::DivisionDomain("a2w2'' = 0"));
    }
    if !(x > 0.0) {
        return Err(OptimalError::DivisionDomain("x must be positive"));
    }
    Ok(ds.a1w1.im * ds.a2w1.im / (2.0 * x * ds.a2w2.im))
}

/// The (x₀, δ₀) point where the dressed complex detuning δ̃ vanishes
/// entirely; it lies on the δ_opt line.
pub fn zero_detuning_point(ds: &AtomDataset) -> Result<(f64, f64), OptimalError> {
    let denom = ds.a2w2.im - ds.a1w2.im;
    if denom == 0.0 {
        return Err(OptimalError::DegenerateDataset);
    }
    let x0 = (ds.a1w1.im - ds.a2w1.im) / denom;
    let delta0 = 0.25 * ((ds.a2w1.re - ds.a1w1.re) + x0 * (ds.a2w2.re - ds.a1w2.re));
    Ok((x0, delta0))
}

/// Relative step-size target of the scalar searches, 1e−8·max(1, |δ|).
fn delta_tolerance(delta: f64) -> f64 {
    1e-8 * delta.abs().max(1.0)
}

/// Golden-section search followed by one parabolic polish. Returns the
/// minimizer and its value; errors if the minimum sits at the bracket edge.
fn bracketed_minimum(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> Result<(f64, f64), OptimalError> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (f_lo, f_hi) = (f(lo), f(hi));
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > delta_tolerance(0.5 * (a + b)) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let (mut xm, mut fm) = if f1 < f2 { (x1, f1) } else { (x2, f2) };

    // parabolic vertex through (a, xm, b)
    let (fa, fb) = (f(a), f(b));
    let num = (xm - a).powi(2) * (fm - fb) - (xm - b).powi(2) * (fm - fa);
    let den = (xm - a) * (fm - fb) - (xm - b) * (fm - fa);
    if den != 0.0 {
        let xv = xm - 0.5 * num / den;
        if xv > a && xv < b {
            let fv = f(xv);
            if fv < fm {
                (xm, fm) = (xv, fv);
            }
        }
    }

    // a genuine interior minimum must clear both bracket endpoints by more
    // than rounding noise; a flat or monotone objective fails here
    let noise = 1e-10 * (f_lo.abs() + f_hi.abs() + fm.abs()) + f64::MIN_POSITIVE;
    let edge = 10.0 * delta_tolerance(xm) + 1e-9 * (hi - lo);
    if !(fm < f_lo - noise && fm < f_hi - noise)
        || (xm - lo).abs() < edge
        || (hi - xm).abs() < edge
    {
        return Err(OptimalError::Bracket { lo, hi });
    }
    Ok((xm, fm))
}

/// Numerically minimizes the narrow width g₊(δ) over a bracket that must
/// contain exactly one interior local minimum. For datasets with
/// α₁″(ω₂) = 0 the result matches [`delta_opt`] to ~1e−8 relative.
pub fn minimize_width_over_delta(
    ds: &AtomDataset,
    x: f64,
    bracket: (f64, f64),
) -> Result<(f64, f64), OptimalError> {
    let (lo, hi) = bracket;
    bracketed_minimum(|delta| widths(ds, &DrivePoint { x, delta, theta: 0.0 }).0, lo, hi)
}

const COARSE_SCAN_POINTS: usize = 241;

/// One w_res(δ) maximization: coarse scan over the bracket, then a golden
/// refinement around the best cell.
fn best_delta_for_residual(
    ds: &AtomDataset,
    x: f64,
    theta: f64,
    envelope: EnvelopeSpec,
    bracket: (f64, f64),
    tolerance: f64,
) -> Result<f64, OptimalError> {
    let (lo, hi) = bracket;
    let n = COARSE_SCAN_POINTS;
    let w_res = |delta: f64| -> Result<f64, OptimalError> {
        let point = DrivePoint { x, delta, theta };
        Ok(dynamics::propagate(ds, &point, envelope, dynamics::Levels::Two, tolerance)?.w_res)
    };
    let mut best = (0usize, f64::NEG_INFINITY);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let d = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let w = w_res(d)?;
        values.push(w);
        if w > best.1 {
            best = (i, w);
        }
    }
    if best.0 == 0 || best.0 == n - 1 {
        return Err(OptimalError::Bracket { lo, hi });
    }
    let cell = (hi - lo) / (n - 1) as f64;
    let a = lo + cell * (best.0 - 1) as f64;
    let b = lo + cell * (best.0 + 1) as f64;
    // negate: maximize w_res with the minimizer machinery
    let g = |d: f64| -w_res(d).unwrap_or(f64::INFINITY);
    match bracketed_minimum(g, a, b) {
        Ok((d, _)) => Ok(d),
        // the refined max may sit on a coarse-cell edge; that is still interior
        Err(OptimalError::Bracket { .. }) => Ok(lo + cell * best.0 as f64),
        Err(e) => Err(e),
    }
}

/// Empirical optimal-detuning line for an arbitrary envelope: for every x
/// in the grid, finds the δ maximizing w_res inside `delta_bracket`, then
/// least-squares fits δ*(x) to a line.
pub fn fit_delta_opt_empirical(
    ds: &AtomDataset,
    envelope: EnvelopeSpec,
    theta: f64,
    x_grid: &[f64],
    delta_bracket: (f64, f64),
) -> Result<LinearLaw, OptimalError> {
    if x_grid.len() < 3 {
        return Err(OptimalError::InsufficientGrid(x_grid.len()));
    }
    let results: Vec<(f64, Result<f64, OptimalError>)> = x_grid
        .par_iter()
        .map(|&x| {
            (
                x,
                best_delta_for_residual(
                    ds,
                    x,
                    theta,
                    envelope,
                    delta_bracket,
                    dynamics::DEFAULT_ODE_TOLERANCE,
                ),
            )
        })
        .collect();

    let failed: Vec<f64> =
        results.iter().filter(|(_, r)| r.is_err()).map(|(x, _)| *x).collect();
    if !failed.is_empty() {
        return Err(OptimalError::PartialFit { failed });
    }
    let points: Vec<(f64, f64)> =
        results.into_iter().map(|(x, r)| (x, r.unwrap())).collect();

    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let rms = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(LinearLaw { intercept, slope, fit_residual: rms })
}
