//! `stabsim` — command-line front end for the two-color interference
//! stabilization simulator. All physical parameters are the dimensionless
//! (x, δ, θ) of the scaled model; `scale-check` converts absolute
//! parameters and demonstrates the scaling invariance.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use stabsim_core::atoms::{validate, AtomDataset};
use stabsim_core::dressed::{quasienergies, width_curve, DrivePoint};
use stabsim_core::dynamics::{
    self, propagate_ode, propagate_rectangular, scaling_transform, AbsoluteParams, Levels,
};
use stabsim_core::optimal::{
    asymptotic_width, delta_opt_law, fit_delta_opt_empirical, zero_detuning_point,
};
use stabsim_core::pulses::{EnvelopeSpec, Shape};
use stabsim_core::sweep::{
    linear_grid, population_ratio, resonance_scan, smoothing_study, spectral_profile,
    stabilization_window, Cell, SweepResult,
};
use stabsim_core::LinearLaw;

/// Scalar or grid argument: `<float>`, `a:b:n` (n uniform points, endpoints
/// inclusive) or a comma-separated list.
#[derive(Debug, Clone)]
struct Grid(Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Grid, String> {
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("`{s}`: range syntax is a:b:n"));
            }
            let a: f64 = parts[0].parse().map_err(|_| format!("`{}`: not a number", parts[0]))?;
            let b: f64 = parts[1].parse().map_err(|_| format!("`{}`: not a number", parts[1]))?;
            let n: usize = parts[2].parse().map_err(|_| format!("`{}`: not a count", parts[2]))?;
            if n == 0 {
                return Err("range needs at least one point".into());
            }
            Ok(Grid(linear_grid(a, b, n)))
        } else if s.contains(',') {
            s.split(',')
                .map(|v| v.parse::<f64>().map_err(|_| format!("`{v}`: not a number")))
                .collect::<Result<Vec<f64>, String>>()
                .map(Grid)
        } else {
            s.parse::<f64>().map(|v| Grid(vec![v])).map_err(|_| format!("`{s}`: not a number"))
        }
    }
}

/// Interval argument `lo:hi`.
#[derive(Debug, Clone, Copy)]
struct Interval(f64, f64);

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Interval, String> {
        let (lo, hi) = s.split_once(':').ok_or_else(|| format!("`{s}`: expected lo:hi"))?;
        let lo: f64 = lo.parse().map_err(|_| format!("`{lo}`: not a number"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("`{hi}`: not a number"))?;
        if !(lo < hi) {
            return Err(format!("`{s}`: need lo < hi"));
        }
        Ok(Interval(lo, hi))
    }
}

/// Comma-separated envelope list, e.g. `rect,sin2,smooth:a=10`.
#[derive(Debug, Clone)]
struct EnvelopeList(Vec<EnvelopeSpec>);

impl FromStr for EnvelopeList {
    type Err = String;

    fn from_str(s: &str) -> Result<EnvelopeList, String> {
        s.split(',')
            .map(|e| e.parse::<EnvelopeSpec>().map_err(|err| err.to_string()))
            .collect::<Result<Vec<_>, _>>()
            .map(EnvelopeList)
    }
}

#[derive(Args, Debug)]
struct AtomArg {
    /// Built-in dataset id (He2, H2, H3) or path to a dataset JSON file
    #[arg(long)]
    atom: String,
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output file, or `-` for stdout
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Debug)]
struct TolArg {
    /// Relative tolerance of the adaptive integrator (dimensionless)
    #[arg(long, default_value_t = dynamics::DEFAULT_ODE_TOLERANCE)]
    tol: f64,
}

#[derive(Parser, Debug)]
#[command(
    name = "stabsim",
    version,
    about = "Two-color interference stabilization: quasienergies, widths, pulse propagation and parameter scans",
    after_help = "All inputs are dimensionless: x = I2/I1, delta = Delta/I1, theta = tau*I1,\nwith intensity meaning the squared field amplitude in atomic units."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Physical-consistency report for a dataset (exit 1 on any failed check)
    Validate {
        #[command(flatten)]
        atom: AtomArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Complex quasienergies and widths at one drive point
    Quasienergies {
        #[command(flatten)]
        atom: AtomArg,
        /// Intensity ratio x = I2/I1 (dimensionless)
        #[arg(long)]
        x: f64,
        /// Field-free detuning delta = Delta/I1 (dimensionless)
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Width branches along an x sweep, labels carried by continuity
    Widths {
        #[command(flatten)]
        atom: AtomArg,
        /// Fixed detuning delta (dimensionless)
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        /// x grid: a:b:n or comma list (dimensionless)
        #[arg(long)]
        x: Grid,
        #[command(flatten)]
        out: OutArg,
    },
    /// Closed-form optimal-narrowing detuning line, optionally at one x
    DeltaOpt {
        #[command(flatten)]
        atom: AtomArg,
        /// Evaluate the law at this x (dimensionless)
        #[arg(long)]
        x: Option<f64>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Optimized widths along the law plus the large-x estimate
    GOpt {
        #[command(flatten)]
        atom: AtomArg,
        /// x values: scalar, a:b:n or comma list (dimensionless)
        #[arg(long)]
        x: Grid,
        #[command(flatten)]
        out: OutArg,
    },
    /// The dimensionless (x0, delta0) point where the dressed detuning vanishes
    ZeroPoint {
        #[command(flatten)]
        atom: AtomArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Residual and ionization probabilities after one pulse
    Propagate {
        #[command(flatten)]
        atom: AtomArg,
        /// Intensity ratio x (dimensionless)
        #[arg(long)]
        x: f64,
        /// Field-free detuning delta (dimensionless)
        #[arg(long)]
        delta: f64,
        /// Interaction time theta = tau*I1 (dimensionless)
        #[arg(long)]
        theta: f64,
        /// Pulse envelope: rect | sin2 | smooth:a=<float>
        #[arg(long)]
        envelope: EnvelopeSpec,
        /// Number of bound levels (2 or 3)
        #[arg(long, default_value_t = 2)]
        levels: u8,
        /// Propagation method: auto | analytic | ode
        #[arg(long, default_value = "auto")]
        method: String,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Residual-probability resonance curves w_res(x) at fixed detunings
    Scan {
        #[command(flatten)]
        atom: AtomArg,
        /// Fixed detunings: a:b:n or comma list (dimensionless)
        #[arg(long, allow_hyphen_values = true)]
        delta: Grid,
        /// x grid (dimensionless)
        #[arg(long)]
        x: Grid,
        /// Interaction time theta (dimensionless)
        #[arg(long)]
        theta: f64,
        /// Pulse envelope: rect | sin2 | smooth:a=<float>
        #[arg(long)]
        envelope: EnvelopeSpec,
        /// Number of bound levels (2 or 3)
        #[arg(long, default_value_t = 2)]
        levels: u8,
        /// Add the envelope-of-peaks curve along the closed-form law
        #[arg(long)]
        with_opt_law: bool,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Stabilization window: w_i vs I1/I0 at fixed absolute detuning and duration
    Window {
        #[command(flatten)]
        atom: AtomArg,
        /// Fixed intensity ratio x (dimensionless)
        #[arg(long)]
        x: f64,
        /// Detuning at I1 = I0, i.e. Delta/I0 (dimensionless)
        #[arg(long, allow_hyphen_values = true)]
        delta_ref: f64,
        /// Interaction time at I1 = I0, i.e. tau*I0 (dimensionless)
        #[arg(long)]
        theta_ref: f64,
        /// I1/I0 grid of positive ratios
        #[arg(long)]
        i1: Grid,
        /// Pulse envelope: rect | sin2 | smooth:a=<float>
        #[arg(long)]
        envelope: EnvelopeSpec,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Spectral profile w_res(delta) at fixed (x, theta) with extremum flags
    Profile {
        #[command(flatten)]
        atom: AtomArg,
        /// Fixed intensity ratio x (dimensionless)
        #[arg(long)]
        x: f64,
        /// Interaction time theta (dimensionless)
        #[arg(long)]
        theta: f64,
        /// delta grid (dimensionless)
        #[arg(long, allow_hyphen_values = true)]
        delta: Grid,
        /// Pulse envelope: rect | sin2 | smooth:a=<float>
        #[arg(long)]
        envelope: EnvelopeSpec,
        /// First-field intensity in units of I0 (provenance only)
        #[arg(long, default_value_t = 1.0)]
        i1: f64,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Population ratios w2/w1 and w1/w2 along a detuning law
    Ratio {
        #[command(flatten)]
        atom: AtomArg,
        /// x grid (dimensionless)
        #[arg(long)]
        x: Grid,
        /// Interaction time theta (dimensionless)
        #[arg(long)]
        theta: f64,
        /// Pulse envelope: rect | sin2 | smooth:a=<float>
        #[arg(long)]
        envelope: EnvelopeSpec,
        /// Law `intercept,slope` (defaults to the closed-form optimum)
        #[arg(long, allow_hyphen_values = true)]
        law: Option<String>,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// w_res(x) for several envelopes at fixed (delta, theta)
    Smoothing {
        #[command(flatten)]
        atom: AtomArg,
        /// Fixed detuning delta (dimensionless)
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        /// Interaction time theta (dimensionless)
        #[arg(long)]
        theta: f64,
        /// Envelope list, e.g. rect,sin2,smooth:a=10
        #[arg(long)]
        envelopes: EnvelopeList,
        /// x grid (dimensionless)
        #[arg(long)]
        x: Grid,
        /// Number of bound levels (2 or 3)
        #[arg(long, default_value_t = 2)]
        levels: u8,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
    /// Empirical optimal-detuning line by maximizing w_res per x
    FitDeltaopt {
        #[command(flatten)]
        atom: AtomArg,
        /// Pulse envelope: rect | sin2 | smooth:a=<float>
        #[arg(long)]
        envelope: EnvelopeSpec,
        /// Interaction time theta (dimensionless)
        #[arg(long)]
        theta: f64,
        /// x grid with at least 3 points (dimensionless)
        #[arg(long)]
        x: Grid,
        /// delta search bracket lo:hi (dimensionless)
        #[arg(long, allow_hyphen_values = true)]
        delta_bracket: Interval,
        #[command(flatten)]
        out: OutArg,
    },
    /// Scaling transformation: absolute parameters in, invariant triple out
    ScaleCheck {
        /// Raman detuning Delta in atomic units
        #[arg(long, allow_hyphen_values = true)]
        delta_abs: f64,
        /// Squared field amplitude of color 1 in atomic units
        #[arg(long)]
        eps1_sq: f64,
        /// Squared field amplitude of color 2 in atomic units
        #[arg(long)]
        eps2_sq: f64,
        /// Pulse duration tau in atomic units
        #[arg(long)]
        tau: f64,
        /// Scale factor lambda > 0
        #[arg(long)]
        lambda: f64,
        /// Also propagate both parameter sets with this dataset
        #[arg(long)]
        atom: Option<String>,
        /// Pulse envelope for the optional propagation
        #[arg(long, default_value = "sin2")]
        envelope: EnvelopeSpec,
        #[command(flatten)]
        tol: TolArg,
        #[command(flatten)]
        out: OutArg,
    },
}

struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> CliError {
        CliError(e.to_string())
    }
}

fn resolve_dataset(spec: &str) -> Result<AtomDataset, CliError> {
    if stabsim_core::atoms::BUILTIN_IDS.contains(&spec) {
        return Ok(AtomDataset::builtin(spec).expect("id checked"));
    }
    let path = PathBuf::from(spec);
    if !path.exists() {
        return Err(CliError(format!(
            "`{spec}` is neither a built-in dataset (He2, H2, H3) nor an existing file"
        )));
    }
    let doc = fs::read_to_string(&path).map_err(|e| CliError(format!("{spec}: {e}")))?;
    Ok(AtomDataset::from_json_str(&doc)?)
}

fn dataset_checksum(ds: &AtomDataset) -> String {
    let digest = Sha256::digest(ds.to_json_string().as_bytes());
    let mut hex = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

fn cli_provenance(ds: Option<&AtomDataset>) -> Vec<String> {
    let argv: Vec<String> = std::env::args().collect();
    let mut lines = vec![
        format!("stabsim {}", env!("CARGO_PKG_VERSION")),
        format!("command: {}", argv.join(" ")),
    ];
    if let Some(ds) = ds {
        lines.push(format!("dataset: {} sha256[0..8]={}", ds.name, dataset_checksum(ds)));
    }
    lines
}

fn emit(out: &OutArg, result: &SweepResult) -> Result<(), CliError> {
    if out.out == "-" {
        result.write_csv(std::io::stdout().lock())?;
    } else {
        let mut buf = Vec::new();
        result.write_csv(&mut buf)?;
        fs::write(&out.out, buf).map_err(|e| CliError(format!("{}: {e}", out.out)))?;
    }
    Ok(())
}

fn table(
    ds: Option<&AtomDataset>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
) -> SweepResult {
    SweepResult { provenance: cli_provenance(ds), columns, rows }
}

fn with_cli_provenance(ds: &AtomDataset, mut res: SweepResult) -> SweepResult {
    let mut provenance = cli_provenance(Some(ds));
    provenance.append(&mut res.provenance);
    res.provenance = provenance;
    res
}

fn levels_of(n: u8) -> Result<Levels, CliError> {
    Levels::try_from(n).map_err(CliError)
}

fn law_row(law: &LinearLaw) -> (Vec<&'static str>, Vec<Cell>) {
    (
        vec!["intercept", "slope", "fit_residual"],
        vec![
            Cell::Float(law.intercept),
            Cell::Float(law.slope),
            Cell::Float(law.fit_residual),
        ],
    )
}

fn outcome_columns() -> Vec<&'static str> {
    vec!["x", "delta", "theta", "shape", "a", "levels", "w1", "w2", "w3", "w_res", "w_i"]
}

fn outcome_row(
    p: &DrivePoint,
    envelope: &EnvelopeSpec,
    levels: Levels,
    out: &dynamics::Outcome,
) -> Vec<Cell> {
    vec![
        Cell::Float(p.x),
        Cell::Float(p.delta),
        Cell::Float(p.theta),
        Cell::Text(envelope.shape_label().to_string()),
        match envelope.shape {
            Shape::Smoothed { a } => Cell::Float(a),
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

fn run() -> Result<u8, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { atom, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let report = validate(&ds);
            let rows = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        Cell::Text(c.name.to_string()),
                        Cell::Text(c.status.to_string()),
                        c.value.map_or(Cell::Empty, Cell::Float),
                        Cell::Text(c.detail.clone()),
                    ]
                })
                .collect();
            emit(&out, &table(Some(&ds), vec!["check", "status", "value", "detail"], rows))?;
            Ok(if report.has_failures() { 1 } else { 0 })
        }
        Command::Quasienergies { atom, x, delta, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let p = DrivePoint::new(x, delta, 0.0)?;
            let q = quasienergies(&ds, &p);
            let rows = vec![vec![
                Cell::Float(x),
                Cell::Float(delta),
                Cell::Float(q.y_plus.re),
                Cell::Float(q.y_plus.im),
                Cell::Float(q.y_minus.re),
                Cell::Float(q.y_minus.im),
                Cell::Float(q.g_plus),
                Cell::Float(q.g_minus),
            ]];
            let cols = vec![
                "x",
                "delta",
                "y_plus_re",
                "y_plus_im",
                "y_minus_re",
                "y_minus_im",
                "g_plus",
                "g_minus",
            ];
            emit(&out, &table(Some(&ds), cols, rows))?;
            Ok(0)
        }
        Command::Widths { atom, delta, x, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let curve = width_curve(&ds, delta, &x.0)?;
            let rows = curve
                .rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Float(r.x),
                        Cell::Float(delta),
                        Cell::Float(r.y1.re),
                        Cell::Float(r.y1.im),
                        Cell::Float(r.y2.re),
                        Cell::Float(r.y2.im),
                        Cell::Float(r.g1),
                        Cell::Float(r.g2),
                        Cell::Int(r.ambiguous as i64),
                    ]
                })
                .collect();
            let cols =
                vec!["x", "delta", "y1_re", "y1_im", "y2_re", "y2_im", "g1", "g2", "ambiguous"];
            emit(&out, &table(Some(&ds), cols, rows))?;
            Ok(0)
        }
        Command::DeltaOpt { atom, x, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let law = delta_opt_law(&ds)?;
            let (mut cols, mut row) = law_row(&law);
            if let Some(x) = x {
                cols.push("x");
                cols.push("delta_opt");
                row.push(Cell::Float(x));
                row.push(Cell::Float(law.eval(x)));
            }
            emit(&out, &table(Some(&ds), cols, vec![row]))?;
            Ok(0)
        }
        Command::GOpt { atom, x, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let rows = x
                .0
                .iter()
                .map(|&x| {
                    let (gp, gm) = stabsim_core::optimal::g_opt(&ds, x)?;
                    let asym = if x > 0.0 && ds.a2w2.im != 0.0 {
                        Cell::Float(asymptotic_width(&ds, x)?)
                    } else {
                        Cell::Empty
                    };
                    Ok(vec![Cell::Float(x), Cell::Float(gp), Cell::Float(gm), asym])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            emit(
                &out,
                &table(Some(&ds), vec!["x", "g_plus", "g_minus", "g_plus_asymptotic"], rows),
            )?;
            Ok(0)
        }
        Command::ZeroPoint { atom, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let (x0, d0) = zero_detuning_point(&ds)?;
            let rows = vec![vec![Cell::Float(x0), Cell::Float(d0)]];
            emit(&out, &table(Some(&ds), vec!["x0", "delta0"], rows))?;
            Ok(0)
        }
        Command::Propagate { atom, x, delta, theta, envelope, levels, method, tol, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let levels = levels_of(levels)?;
            let p = DrivePoint::new(x, delta, theta)?;
            let outcome = match method.as_str() {
                "auto" => dynamics::propagate(&ds, &p, envelope, levels, tol.tol)?,
                "ode" => propagate_ode(&ds, &p, envelope, levels, tol.tol)?,
                "analytic" => {
                    if envelope.shape != Shape::Rectangular || levels != Levels::Two {
                        return Err(CliError(
                            "analytic propagation requires --envelope rect and --levels 2".into(),
                        ));
                    }
                    propagate_rectangular(&ds, &p)
                }
                other => return Err(CliError(format!("unknown method `{other}`"))),
            };
            let rows = vec![outcome_row(&p, &envelope, levels, &outcome)];
            let mut res = table(Some(&ds), outcome_columns(), rows);
            res.provenance.push(format!("tolerance: {:e}", tol.tol));
            res.provenance.push(format!("envelope: {envelope}"));
            emit(&out, &res)?;
            Ok(0)
        }
        Command::Scan { atom, delta, x, theta, envelope, levels, with_opt_law, tol, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let levels = levels_of(levels)?;
            let law = if with_opt_law { Some(delta_opt_law(&ds)?) } else { None };
            let res = resonance_scan(
                &ds,
                &delta.0,
                &x.0,
                theta,
                envelope,
                levels,
                law.as_ref(),
                tol.tol,
            )?;
            emit(&out, &with_cli_provenance(&ds, res))?;
            Ok(0)
        }
        Command::Window { atom, x, delta_ref, theta_ref, i1, envelope, tol, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let res =
                stabilization_window(&ds, x, delta_ref, theta_ref, &i1.0, envelope, tol.tol)?;
            emit(&out, &with_cli_provenance(&ds, res))?;
            Ok(0)
        }
        Command::Profile { atom, x, theta, delta, envelope, i1, tol, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let res = spectral_profile(&ds, x, i1, theta, &delta.0, envelope, tol.tol)?;
            emit(&out, &with_cli_provenance(&ds, res))?;
            Ok(0)
        }
        Command::Ratio { atom, x, theta, envelope, law, tol, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let law = match law {
                Some(text) => {
                    let (ic, sl) = text.split_once(',').ok_or_else(|| {
                        CliError(format!("--law `{text}`: expected intercept,slope"))
                    })?;
                    LinearLaw {
                        intercept: ic
                            .trim()
                            .parse()
                            .map_err(|_| CliError(format!("--law intercept `{ic}`")))?,
                        slope: sl
                            .trim()
                            .parse()
                            .map_err(|_| CliError(format!("--law slope `{sl}`")))?,
                        fit_residual: 0.0,
                    }
                }
                None => delta_opt_law(&ds)?,
            };
            let res = population_ratio(&ds, &law, &x.0, theta, envelope, tol.tol)?;
            emit(&out, &with_cli_provenance(&ds, res))?;
            Ok(0)
        }
        Command::Smoothing { atom, delta, theta, envelopes, x, levels, tol, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let levels = levels_of(levels)?;
            let res = smoothing_study(&ds, delta, theta, &envelopes.0, &x.0, levels, tol.tol)?;
            emit(&out, &with_cli_provenance(&ds, res))?;
            Ok(0)
        }
        Command::FitDeltaopt { atom, envelope, theta, x, delta_bracket, out } => {
            let ds = resolve_dataset(&atom.atom)?;
            let law = fit_delta_opt_empirical(
                &ds,
                envelope,
                theta,
                &x.0,
                (delta_bracket.0, delta_bracket.1),
            )?;
            let (cols, row) = law_row(&law);
            emit(&out, &table(Some(&ds), cols, vec![row]))?;
            Ok(0)
        }
        Command::ScaleCheck {
            delta_abs,
            eps1_sq,
            eps2_sq,
            tau,
            lambda,
            atom,
            envelope,
            tol,
            out,
        } => {
            let base = AbsoluteParams { delta_abs, eps1_sq, eps2_sq, tau };
            let scaled = scaling_transform(&base, lambda)?;
            let ds = atom.as_deref().map(resolve_dataset).transpose()?;
            let mut cols = vec![
                "label", "lambda", "delta_abs", "eps1_sq", "eps2_sq", "tau", "x", "delta",
                "theta",
            ];
            if ds.is_some() {
                cols.push("w_res");
            }
            let mut rows = Vec::new();
            for (label, lam, p) in [("base", 1.0, base), ("scaled", lambda, scaled)] {
                let point = p.drive_point()?;
                let mut row = vec![
                    Cell::Text(label.to_string()),
                    Cell::Float(lam),
                    Cell::Float(p.delta_abs),
                    Cell::Float(p.eps1_sq),
                    Cell::Float(p.eps2_sq),
                    Cell::Float(p.tau),
                    Cell::Float(point.x),
                    Cell::Float(point.delta),
                    Cell::Float(point.theta),
                ];
                if let Some(ds) = &ds {
                    let w = dynamics::propagate(ds, &point, envelope, Levels::Two, tol.tol)?;
                    row.push(Cell::Float(w.w_res));
                }
                rows.push(row);
            }
            emit(&out, &table(ds.as_ref(), cols, rows))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
