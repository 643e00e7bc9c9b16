//! Complex algebra of the dressed two-level system: dressed detuning,
//! quasienergies, widths, branch tracking along intensity sweeps, and the
//! idealized equal-width two-level model.
//!
//! Quasienergies are reported relative to the initially populated level in
//! the rotated frame and in units of I₁:
//!
//! ```text
//! y_± = ½{δ − ¼[(α₁(ω₁)+α₂(ω₁)) + x(α₁(ω₂)+α₂(ω₂))]} ± ½√(δ̃² + ¼α₁₂²x)
//! ```
//!
//! with the principal square root and the dressed detuning δ̃ of
//! [`dressed_detuning`]. The width of a branch is g = −2·Im y, and the sum
//! g₊ + g₋ equals the branch-independent trace
//! ½[α₁″(ω₁)+α₂″(ω₁) + x(α₁″(ω₂)+α₂″(ω₂))].

use num_complex::Complex64;
use thiserror::Error;

use crate::atoms::AtomDataset;

#[derive(Debug, Error)]
pub enum DressedError {
    #[error("invalid drive point: {0}")]
    InvalidDrivePoint(String),
    #[error("invalid ideal-model parameters: {0}")]
    InvalidIdealModel(String),
    #[error("x grid must be strictly increasing")]
    GridNotIncreasing,
}

/// Dimensionless drive parameters: intensity ratio `x = I₂/I₁ ≥ 0`,
/// field-free detuning `delta = Δ/I₁`, interaction time `theta = τ·I₁ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivePoint {
    pub x: f64,
    pub delta: f64,
    pub theta: f64,
}

impl DrivePoint {
    pub fn new(x: f64, delta: f64, theta: f64) -> Result<DrivePoint, DressedError> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(DressedError::InvalidDrivePoint(format!("x = {x}, need x >= 0")));
        }
        if !delta.is_finite() {
            return Err(DressedError::InvalidDrivePoint(format!("delta = {delta} not finite")));
        }
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(DressedError::InvalidDrivePoint(format!(
                "theta = {theta}, need theta >= 0"
            )));
        }
        Ok(DrivePoint { x, delta, theta })
    }
}

/// How the ± labels of the two branches were assigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchRule {
    /// Per-point relabeling so that `g_plus <= g_minus`.
    WidthOrdered,
    /// Branches matched to the previous grid point by distance in the
    /// complex y-plane (used by [`width_curve`]).
    Continuity,
}

/// The two complex quasienergies with their widths `g = −2·Im y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasienergyPair {
    pub y_plus: Complex64,
    pub y_minus: Complex64,
    pub g_plus: f64,
    pub g_minus: f64,
    pub branch_rule: BranchRule,
}

/// Dressed complex detuning δ̃ = δ − ¼{[α₂(ω₁)−α₁(ω₁)] + x[α₂(ω₂)−α₁(ω₂)]}.
///
/// The difference form follows from Δ̃ = Ẽ₂+ω₂−Ẽ₁−ω₁ with the ac-Stark
/// shifted complex level energies; it vanishes at the (x₀, δ₀) point of
/// [`crate::optimal::zero_detuning_point`].
pub fn dressed_detuning(ds: &AtomDataset, point: &DrivePoint) -> Complex64 {
    Complex64::new(point.delta, 0.0)
        - 0.25 * ((ds.a2w1 - ds.a1w1) + point.x * (ds.a2w2 - ds.a1w2))
}

/// Mean of the two quasienergies, ½{δ − ¼[(α₁+α₂)(ω₁) + x(α₁+α₂)(ω₂)]}.
pub(crate) fn quasienergy_mean(ds: &AtomDataset, x: f64, delta: f64) -> Complex64 {
    0.5 * (Complex64::new(delta, 0.0) - 0.25 * ((ds.a1w1 + ds.a2w1) + x * (ds.a1w2 + ds.a2w2)))
}

/// Principal-branch root d = √(δ̃² + ¼α₁₂²x); the branch splitting is ±d/2.
pub(crate) fn splitting_root(ds: &AtomDataset, x: f64, dt: Complex64) -> Complex64 {
    (dt * dt + 0.25 * ds.a12 * ds.a12 * x).sqrt()
}

/// Both branches in the fixed (+, −) order of the principal root, unlabeled.
fn raw_branches(ds: &AtomDataset, x: f64, delta: f64) -> (Complex64, Complex64) {
    let m = quasienergy_mean(ds, x, delta);
    let dt = dressed_detuning(ds, &DrivePoint { x, delta, theta: 0.0 });
    let d = splitting_root(ds, x, dt);
    (m + 0.5 * d, m - 0.5 * d)
}

/// Branch-independent width sum ½[α₁″(ω₁)+α₂″(ω₁) + x(α₁″(ω₂)+α₂″(ω₂))].
pub fn width_trace(ds: &AtomDataset, x: f64) -> f64 {
    0.5 * ((ds.a1w1.im + ds.a2w1.im) + x * (ds.a1w2.im + ds.a2w2.im))
}

fn width_of(y: Complex64) -> f64 {
    -2.0 * y.im
}

/// Quasienergies at a drive point, width-ordered (`g_plus <= g_minus`).
pub fn quasienergies(ds: &AtomDataset, point: &DrivePoint) -> QuasienergyPair {
    let (ya, yb) = raw_branches(ds, point.x, point.delta);
    let (ga, gb) = (width_of(ya), width_of(yb));
    let ((yp, gp), (ym, gm)) = if ga <= gb {
        ((ya, ga), (yb, gb))
    } else {
        ((yb, gb), (ya, ga))
    };
    QuasienergyPair {
        y_plus: yp,
        y_minus: ym,
        g_plus: gp,
        g_minus: gm,
        branch_rule: BranchRule::WidthOrdered,
    }
}

/// Widths `(g_plus, g_minus)` of the fully dressed levels, `g_plus <= g_minus`.
pub fn widths(ds: &AtomDataset, point: &DrivePoint) -> (f64, f64) {
    let pair = quasienergies(ds, point);
    (pair.g_plus, pair.g_minus)
}

/// One grid point of a width sweep with continuity-matched branch labels.
#[derive(Debug, Clone, Copy)]
pub struct WidthCurveRow {
    pub x: f64,
    pub y1: Complex64,
    pub y2: Complex64,
    pub g1: f64,
    pub g2: f64,
    /// Branch movement between the adjacent grid points exceeded the branch
    /// separation; the assignment on this segment is not trustworthy.
    pub ambiguous: bool,
}

#[derive(Debug, Clone)]
pub struct WidthCurve {
    pub delta: f64,
    pub rows: Vec<WidthCurveRow>,
}

/// Width branches along an increasing `x_grid` at fixed `delta`, labels
/// carried by continuity in the complex y-plane (branch 1 starts as the
/// narrower one). Real crossings of g₁, g₂ and avoided crossings are both
/// rendered faithfully; segments where the matching is ambiguous (grid too
/// coarse) carry a warning flag.
pub fn width_curve(
    ds: &AtomDataset,
    delta: f64,
    x_grid: &[f64],
) -> Result<WidthCurve, DressedError> {
    if x_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DressedError::GridNotIncreasing);
    }
    let mut rows = Vec::with_capacity(x_grid.len());
    let mut prev: Option<(Complex64, Complex64)> = None;
    for &x in x_grid {
        let (ya, yb) = raw_branches(ds, x, delta);
        let (mut y1, mut y2) = (ya, yb);
        let mut ambiguous = false;
        match prev {
            None => {
                // initial labels by width ordering
                if width_of(ya) > width_of(yb) {
                    (y1, y2) = (yb, ya);
                }
            }
            Some((p1, p2)) => {
                let keep = (ya - p1).norm() + (yb - p2).norm();
                let swap = (yb - p1).norm() + (ya - p2).norm();
                if swap < keep {
                    (y1, y2) = (yb, ya);
                }
                ambiguous = keep.min(swap) > (ya - yb).norm();
            }
        }
        rows.push(WidthCurveRow {
            x,
            y1,
            y2,
            g1: width_of(y1),
            g2: width_of(y2),
            ambiguous,
        });
        prev = Some((y1, y2));
    }
    Ok(WidthCurve { delta, rows })
}

impl WidthCurve {
    /// Number of sign changes of g₁ − g₂ along the sweep (real width
    /// crossings; an avoided crossing contributes none).
    pub fn crossing_count(&self) -> usize {
        self.rows
            .windows(2)
            .filter(|w| {
                let a = w[0].g1 - w[0].g2;
                let b = w[1].g1 - w[1].g2;
                a.signum() != b.signum() && a != 0.0
            })
            .count()
    }
}

/// Quasienergies γ_± = ½{E₁+E₂−iΓ ± √((E₂−E₁)² − Γ²)} of the idealized
/// two-level model with equal width tensor components. Γ = E₂−E₁ is the
/// branching point: below it both widths equal Γ, above it one branch
/// narrows as the field grows.
pub fn ideal_quasienergies(
    e1: f64,
    e2: f64,
    gamma: f64,
) -> Result<(Complex64, Complex64), DressedError> {
    if e2 < e1 {
        return Err(DressedError::InvalidIdealModel(format!("E2 = {e2} < E1 = {e1}")));
    }
    if !(gamma >= 0.0) {
        return Err(DressedError::InvalidIdealModel(format!("Gamma = {gamma} < 0")));
    }
    let spacing = e2 - e1;
    let root = Complex64::new(spacing * spacing - gamma * gamma, 0.0).sqrt();
    let sum = Complex64::new(e1 + e2, -gamma);
    Ok((0.5 * (sum + root), 0.5 * (sum - root)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn he() -> AtomDataset {
        AtomDataset::builtin("He2").unwrap()
    }

    fn h() -> AtomDataset {
        AtomDataset::builtin("H2").unwrap()
    }

    #[test]
    fn drive_point_rejects_bad_values() {
        assert!(DrivePoint::new(-0.1, 0.0, 0.0).is_err());
        assert!(DrivePoint::new(0.0, f64::NAN, 0.0).is_err());
        assert!(DrivePoint::new(0.0, 0.0, -1.0).is_err());
        assert!(DrivePoint::new(0.0, -5.0, 2.0).is_ok());
    }

    #[test]
    fn dressed_detuning_vanishes_at_the_he_zero_point() {
        let p = DrivePoint::new(0.156, -13.3, 0.0).unwrap();
        let dt = dressed_detuning(&he(), &p);
        assert!(dt.norm() < 0.02, "dt = {dt}");
    }

    #[test]
    fn dressed_detuning_uncoupled_value() {
        // delta = 0, x = 0: -(1/4)(a2w1 - a1w1) = 3.81 + 4.86i
        let p = DrivePoint::new(0.0, 0.0, 0.0).unwrap();
        let dt = dressed_detuning(&he(), &p);
        assert_relative_eq!(dt.re, 3.81, epsilon = 1e-12);
        assert_relative_eq!(dt.im, 4.86, epsilon = 1e-12);
    }

    #[test]
    fn real_part_cancels_when_shifted() {
        let ds = he();
        let shift = 0.25 * (ds.a2w1.re - ds.a1w1.re);
        let p = DrivePoint::new(0.0, shift, 0.0).unwrap();
        assert_abs_diff_eq!(dressed_detuning(&ds, &p).re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn uncoupled_widths_at_x_zero() {
        for delta in [-50.0, 0.0, 120.0] {
            let (gp, gm) = widths(&he(), &DrivePoint::new(0.0, delta, 0.0).unwrap());
            assert_relative_eq!(gp, 0.5 * 3.21, max_relative = 1e-12);
            assert_relative_eq!(gm, 0.5 * 22.65, max_relative = 1e-12);
        }
    }

    #[test]
    fn widths_at_the_he_zero_point() {
        let (gp, gm) = widths(&he(), &DrivePoint::new(0.156, -13.3, 0.0).unwrap());
        assert_abs_diff_eq!(gp, 0.84, epsilon = 0.01);
        assert_abs_diff_eq!(gm, 21.8, epsilon = 0.1);
    }

    #[test]
    fn trace_identity_holds() {
        let ds = he();
        for &(x, delta) in &[(0.0, -13.3), (0.156, -13.3), (2.5, -200.0), (40.0, 1000.0)] {
            let (gp, gm) = widths(&ds, &DrivePoint::new(x, delta, 0.0).unwrap());
            assert_relative_eq!(gp + gm, width_trace(&ds, x), max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_coupling_gives_exact_uncoupled_branches() {
        let mut ds = he();
        ds.a12 = Complex64::new(0.0, 0.0);
        let x = 1.7;
        let (gp, gm) = widths(&ds, &DrivePoint::new(x, -40.0, 0.0).unwrap());
        let g1 = 0.5 * (ds.a1w1.im + ds.a1w2.im * x);
        let g2 = 0.5 * (ds.a2w1.im + ds.a2w2.im * x);
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        assert_relative_eq!(gp, lo, max_relative = 1e-14);
        assert_relative_eq!(gm, hi, max_relative = 1e-14);
    }

    #[test]
    fn he_width_curves_cross_twice_at_delta0() {
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
        let curve = width_curve(&he(), -13.3, &grid).unwrap();
        assert_eq!(curve.crossing_count(), 2);
        assert!(curve.rows.iter().all(|r| !r.ambiguous));
    }

    #[test]
    fn he_avoided_crossings_outside_the_window() {
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
        // left crossing avoided for delta >= -11.3, right one for delta <= -22.4
        assert_eq!(width_curve(&he(), -11.0, &grid).unwrap().crossing_count(), 1);
        assert_eq!(width_curve(&he(), -23.0, &grid).unwrap().crossing_count(), 1);
        assert_eq!(width_curve(&he(), -15.0, &grid).unwrap().crossing_count(), 2);
    }

    #[test]
    fn h_width_curves_avoid_crossing_at_delta0() {
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
        let curve = width_curve(&h(), -47.2, &grid).unwrap();
        assert_eq!(curve.crossing_count(), 0);
        let min_gap = curve
            .rows
            .iter()
            .map(|r| (r.g1 - r.g2).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(min_gap > 1.0, "min gap {min_gap}");
    }

    #[test]
    fn single_point_grid_degenerates_to_widths() {
        let curve = width_curve(&he(), -13.3, &[0.4]).unwrap();
        assert_eq!(curve.rows.len(), 1);
        let (gp, gm) = widths(&he(), &DrivePoint::new(0.4, -13.3, 0.0).unwrap());
        assert_eq!(curve.rows[0].g1, gp);
        assert_eq!(curve.rows[0].g2, gm);
    }

    #[test]
    fn non_increasing_grid_is_rejected() {
        assert!(width_curve(&he(), -13.3, &[0.0, 0.5, 0.5]).is_err());
    }

    #[test]
    fn ideal_field_free_limit() {
        let (gp, gm) = ideal_quasienergies(-1.0, 2.0, 0.0).unwrap();
        assert_eq!(gp, Complex64::new(2.0, 0.0));
        assert_eq!(gm, Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn ideal_branching_point_is_degenerate() {
        let (gp, gm) = ideal_quasienergies(0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!((gp - gm).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(gp.im, -0.5, max_relative = 1e-15);
    }

    #[test]
    fn ideal_above_branching_point() {
        // E2-E1 = 1, Gamma = 2: Im = (-2 +- sqrt(3))/2
        let (gp, gm) = ideal_quasienergies(0.0, 1.0, 2.0).unwrap();
        let s3 = 3.0_f64.sqrt();
        let mut ims = [gp.im, gm.im];
        ims.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(ims[0], (-2.0 - s3) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(ims[1], (-2.0 + s3) / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn ideal_rejects_bad_input() {
        assert!(ideal_quasienergies(1.0, 0.0, 1.0).is_err());
        assert!(ideal_quasienergies(0.0, 1.0, -1.0).is_err());
    }
}
