//! Figure-level grid experiments: residual-probability resonances, the
//! stabilization window in absolute intensity, spectral profiles, bound-state
//! population ratios, and envelope-smoothing studies.
//!
//! Every sweep returns a [`SweepResult`]: provenance comments, a header, and
//! self-describing rows (each row carries all swept and fixed parameters).
//! Cells are rendered with Rust's shortest round-trip float formatting, and
//! rows are kept in grid order regardless of internal parallelism, so
//! identical inputs produce byte-identical CSV.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::atoms::AtomDataset;
use crate::dressed::{DressedError, DrivePoint};
use crate::dynamics::{self, DynamicsError, Levels, Outcome};
use crate::optimal::LinearLaw;
use crate::pulses::EnvelopeSpec;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("empty grid")]
    EmptyGrid,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Dressed(#[from] DressedError),
}

/// One CSV cell. Floats print in Rust's default (shortest round-trip) form,
/// which is deterministic; absent values print as empty cells.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Comment lines written with a `# ` prefix ahead of the header.
    pub provenance: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl SweepResult {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for line in &self.provenance {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    write!(w, ",")?;
                }
                write!(w, "{cell}")?;
                first = false;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    /// Value of column `name` in row `i`, if it is a float cell.
    pub fn float(&self, i: usize, name: &str) -> Option<f64> {
        let j = self.columns.iter().position(|c| *c == name)?;
        match self.rows.get(i)?.get(j)? {
            Cell::Float(v) => Some(*v),
            _ => None,
        }
    }
}

/// `n` uniformly spaced points, endpoints inclusive (`n = 1` gives `[a]`).
pub fn linear_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn base_provenance(ds: &AtomDataset, envelope: &EnvelopeSpec, tolerance: f64) -> Vec<String> {
    vec![
        format!("stabsim-core {}", env!("CARGO_PKG_VERSION")),
        format!("dataset: {}", ds.name),
        format!("envelope: {envelope}"),
        format!("tolerance: {tolerance:e}"),
    ]
}

fn outcome_cells(
    point: &DrivePoint,
    envelope: &EnvelopeSpec,
    levels: Levels,
    out: &Outcome,
) -> Vec<Cell> {
    vec![
        Cell::Float(point.x),
        Cell::Float(point.delta),
        Cell::Float(point.theta),
        Cell::Text(envelope.shape_label().to_string()),
        match envelope.shape {
            crate::pulses::Shape::Smoothed { a } => Cell::Float(a),
            _ => Cell::Empty,
        },
        Cell::Int(levels.count() as i64),
        Cell::Float(out.w1),
        Cell::Float(out.w2),
        out.w3.map_or(Cell::Empty, Cell::Float),
        Cell::Float(out.w_res),
        Cell::Float(out.w_i),
    ]
}

const OUTCOME_COLUMNS: [&str; 11] =
    ["x", "delta", "theta", "shape", "a", "levels", "w1", "w2", "w3", "w_res", "w_i"];

fn outcome_columns_with(prefix: &[&'static str], suffix: &[&'static str]) -> Vec<&'static str> {
    prefix.iter().chain(OUTCOME_COLUMNS.iter()).chain(suffix.iter()).copied().collect()
}

/// Residual probability w_res(x) for each fixed detuning in `delta_list`,
/// plus — when an optimal-detuning law is supplied — the envelope-of-peaks
/// curve along δ = law(x).
pub fn resonance_scan(
    ds: &AtomDataset,
    delta_list: &[f64],
    x_grid: &[f64],
    theta: f64,
    envelope: EnvelopeSpec,
    levels: Levels,
    opt_law: Option<&LinearLaw>,
    tolerance: f64,
) -> Result<SweepResult, SweepError> {
    if delta_list.is_empty() && opt_law.is_none() || x_grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    let mut cells: Vec<(String, f64, f64)> = Vec::new();
    for &delta in delta_list {
        for &x in x_grid {
            cells.push((format!("delta={delta}"), x, delta));
        }
    }
    if let Some(law) = opt_law {
        for &x in x_grid {
            cells.push(("opt-law".to_string(), x, law.eval(x)));
        }
    }
    let rows: Result<Vec<Vec<Cell>>, SweepError> = cells
        .par_iter()
        .map(|(label, x, delta)| {
            let point = DrivePoint::new(*x, *delta, theta)?;
            let out = dynamics::propagate(ds, &point, envelope, levels, tolerance)?;
            let mut row = vec![Cell::Text(label.clone())];
            row.extend(outcome_cells(&point, &envelope, levels, &out));
            Ok(row)
        })
        .collect();

    let mut provenance = base_provenance(ds, &envelope, tolerance);
    provenance.push(format!("scan: {} fixed detunings, {} x points", delta_list.len(), x_grid.len()));
    if let Some(law) = opt_law {
        provenance.push(format!(
            "opt-law: delta(x) = {} + {}*x (rms {})",
            law.intercept, law.slope, law.fit_residual
        ));
    }
    Ok(SweepResult {
        provenance,
        columns: outcome_columns_with(&["curve"], &[]),
        rows: rows?,
    })
}

/// The fixed-absolute-Δ, fixed-absolute-τ intensity scan: for each ratio
/// r = I₁/I₀ the drive point is (x_fixed, delta_ref/r, theta_ref·r), so the
/// ionization probability traces the stabilization window as both
/// intensities grow together.
pub fn stabilization_window(
    ds: &AtomDataset,
    x_fixed: f64,
    delta_ref: f64,
    theta_ref: f64,
    i1_grid: &[f64],
    envelope: EnvelopeSpec,
    tolerance: f64,
) -> Result<SweepResult, SweepError> {
    if i1_grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    if i1_grid.iter().any(|&r| !(r > 0.0)) {
        return Err(SweepError::InvalidGrid("intensity ratios must be positive".into()));
    }
    let rows: Result<Vec<Vec<Cell>>, SweepError> = i1_grid
        .par_iter()
        .map(|&r| {
            let point = DrivePoint::new(x_fixed, delta_ref / r, theta_ref * r)?;
            let out = dynamics::propagate(ds, &point, envelope, Levels::Two, tolerance)?;
            let mut row = vec![Cell::Float(r)];
            row.extend(outcome_cells(&point, &envelope, Levels::Two, &out));
            Ok(row)
        })
        .collect();
    let mut provenance = base_provenance(ds, &envelope, tolerance);
    provenance.push(format!(
        "window: x = {x_fixed}, delta_ref = {delta_ref}, theta_ref = {theta_ref}"
    ));
    Ok(SweepResult {
        provenance,
        columns: outcome_columns_with(&["i1_ratio"], &[]),
        rows: rows?,
    })
}

/// Parabolic refinement of a grid extremum through three points; falls back
/// to the grid point at the edges.
fn refine_extremum(grid: &[f64], values: &[f64], idx: usize) -> f64 {
    if idx == 0 || idx + 1 >= grid.len() {
        return grid[idx];
    }
    let (x0, x1, x2) = (grid[idx - 1], grid[idx], grid[idx + 1]);
    let (f0, f1, f2) = (values[idx - 1], values[idx], values[idx + 1]);
    let num = (x1 - x0).powi(2) * (f1 - f2) - (x1 - x2).powi(2) * (f1 - f0);
    let den = (x1 - x0) * (f1 - f2) - (x1 - x2) * (f1 - f0);
    if den == 0.0 {
        x1
    } else {
        x1 - 0.5 * num / den
    }
}

/// Spectral profile w_res(δ) at fixed (x, θ); the rows at the global
/// maximum and minimum carry `max` / `min` flags for asymmetry inspection.
/// `i1_fixed` is recorded as provenance (the dimensionless triple already
/// fixes the physics).
pub fn spectral_profile(
    ds: &AtomDataset,
    x_fixed: f64,
    i1_fixed: f64,
    theta: f64,
    delta_grid: &[f64],
    envelope: EnvelopeSpec,
    tolerance: f64,
) -> Result<SweepResult, SweepError> {
    if delta_grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    let outcomes: Result<Vec<(DrivePoint, Outcome)>, SweepError> = delta_grid
        .par_iter()
        .map(|&delta| {
            let point = DrivePoint::new(x_fixed, delta, theta)?;
            let out = dynamics::propagate(ds, &point, envelope, Levels::Two, tolerance)?;
            Ok((point, out))
        })
        .collect();
    let outcomes = outcomes?;
    let w: Vec<f64> = outcomes.iter().map(|(_, o)| o.w_res).collect();
    let imax = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
    let imin = (0..w.len()).min_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();

    let rows: Vec<Vec<Cell>> = outcomes
        .iter()
        .enumerate()
        .map(|(i, (point, out))| {
            let mut row = outcome_cells(point, &envelope, Levels::Two, out);
            row.push(Cell::Text(
                if i == imax {
                    "max"
                } else if i == imin {
                    "min"
                } else {
                    ""
                }
                .to_string(),
            ));
            row
        })
        .collect();

    let mut provenance = base_provenance(ds, &envelope, tolerance);
    provenance.push(format!("profile: x = {x_fixed}, theta = {theta}, i1 = {i1_fixed}"));
    provenance.push(format!(
        "w_res max {} at delta ~ {} (grid {}), min {} at delta ~ {} (grid {})",
        w[imax],
        refine_extremum(delta_grid, &w, imax),
        delta_grid[imax],
        w[imin],
        refine_extremum(delta_grid, &w, imin),
        delta_grid[imin],
    ));
    Ok(SweepResult {
        provenance,
        columns: outcome_columns_with(&[], &["flag"]),
        rows,
    })
}

/// Bound-state population ratios w₂/w₁ and w₁/w₂ along δ = law(x).
/// A ratio with a vanishing denominator (< 1e−300) is reported as `inf`.
pub fn population_ratio(
    ds: &AtomDataset,
    law: &LinearLaw,
    x_grid: &[f64],
    theta: f64,
    envelope: EnvelopeSpec,
    tolerance: f64,
) -> Result<SweepResult, SweepError> {
    if x_grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    let rows: Result<Vec<Vec<Cell>>, SweepError> = x_grid
        .par_iter()
        .map(|&x| {
            let point = DrivePoint::new(x, law.eval(x), theta)?;
            let out = dynamics::propagate(ds, &point, envelope, Levels::Two, tolerance)?;
            let ratio = |num: f64, den: f64| {
                if den < 1e-300 {
                    Cell::Float(f64::INFINITY)
                } else {
                    Cell::Float(num / den)
                }
            };
            let mut row = outcome_cells(&point, &envelope, Levels::Two, &out);
            row.push(ratio(out.w2, out.w1));
            row.push(ratio(out.w1, out.w2));
            Ok(row)
        })
        .collect();
    let mut provenance = base_provenance(ds, &envelope, tolerance);
    provenance.push(format!(
        "ratio along delta(x) = {} + {}*x",
        law.intercept, law.slope
    ));
    Ok(SweepResult {
        provenance,
        columns: outcome_columns_with(&[], &["w2_over_w1", "w1_over_w2"]),
        rows: rows?,
    })
}

/// w_res(x) for each envelope in `envelopes` at fixed (δ, θ) — the
/// smoothing study comparing rectangular, smoothed and pure-sin² pulses.
pub fn smoothing_study(
    ds: &AtomDataset,
    delta: f64,
    theta: f64,
    envelopes: &[EnvelopeSpec],
    x_grid: &[f64],
    levels: Levels,
    tolerance: f64,
) -> Result<SweepResult, SweepError> {
    if envelopes.is_empty() || x_grid.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    let cells: Vec<(EnvelopeSpec, f64)> = envelopes
        .iter()
        .flat_map(|&env| x_grid.iter().map(move |&x| (env, x)))
        .collect();
    let rows: Result<Vec<Vec<Cell>>, SweepError> = cells
        .par_iter()
        .map(|&(env, x)| {
            let point = DrivePoint::new(x, delta, theta)?;
            let out = dynamics::propagate(ds, &point, env, levels, tolerance)?;
            let mut row = vec![Cell::Text(env.to_string())];
            row.extend(outcome_cells(&point, &env, levels, &out));
            Ok(row)
        })
        .collect();
    let mut provenance = vec![
        format!("stabsim-core {}", env!("CARGO_PKG_VERSION")),
        format!("dataset: {}", ds.name),
        format!("tolerance: {tolerance:e}"),
    ];
    provenance.push(format!(
        "smoothing study: delta = {delta}, theta = {theta}, envelopes = [{}]",
        envelopes.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
    ));
    Ok(SweepResult {
        provenance,
        columns: outcome_columns_with(&["curve"], &[]),
        rows: rows?,
    })
}
