//! The `bertrand` command-line interface: reproducible sweeps and scans
//! with CSV or JSON output.
//!
//! Exit codes: 0 on success, 2 on usage errors (bad flags, grammar,
//! grids), 3 on numerical failures (`ToleranceNotMet`,
//! `IntegrationFailure`). Floats are printed with 17 significant digits so
//! every emitted table round-trips losslessly, and identical invocations
//! produce byte-identical output.

use crate::apsidal::{self, EnergyGrid, SweepStatus};
use crate::error::{Error, Result};
use crate::fractional::{self, EnergyFunction};
use crate::isochrony::{self, Family, ScanThresholds};
use crate::orbit::{self, Formulation};
use crate::potentials::{PotentialSpec, RadialProblem};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::PathBuf;

/// Grid argument: `min:max:step`, a comma list, a single value, or
/// `auto:N` where the consumer supports it.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Range { min: f64, max: f64, step: f64 },
    List(Vec<f64>),
    Auto(usize),
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::InvalidGrid("empty grid spec".into()));
        }
        let lower = s.to_ascii_lowercase();
        if let Some(count) = lower.strip_prefix("auto:") {
            let n: usize = count
                .parse()
                .map_err(|_| Error::InvalidGrid(format!("invalid auto count '{count}'")))?;
            if n == 0 {
                return Err(Error::InvalidGrid("auto grid needs at least one sample".into()));
            }
            return Ok(Self::Auto(n));
        }
        let colon_parts: Vec<&str> = s.split(':').collect();
        if colon_parts.len() == 3 {
            let min = parse_finite(colon_parts[0])?;
            let max = parse_finite(colon_parts[1])?;
            let step = parse_finite(colon_parts[2])?;
            if step <= 0.0 {
                return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
            }
            if max < min {
                return Err(Error::InvalidGrid(format!("range is empty: {min} > {max}")));
            }
            return Ok(Self::Range { min, max, step });
        }
        if colon_parts.len() != 1 {
            return Err(Error::InvalidGrid(format!(
                "expected min:max:step, a comma list, or auto:N, got '{s}'"
            )));
        }
        let values: Result<Vec<f64>> = s.split(',').map(parse_finite).collect();
        let values = values?;
        if values.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        Ok(Self::List(values))
    }

    /// Concrete values; `Auto` is rejected (only energy grids support it).
    pub fn explicit_values(&self) -> Result<Vec<f64>> {
        match self {
            Self::Range { min, max, step } => {
                let n = ((max - min) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| min + step * i as f64).collect())
            }
            Self::List(v) => Ok(v.clone()),
            Self::Auto(_) => {
                Err(Error::InvalidGrid("auto grids are only valid for energies".into()))
            }
        }
    }

    /// Energy-grid view: `Auto` resolves per problem once `V_R` is known.
    pub fn energy_grid(&self) -> Result<EnergyGrid> {
        Ok(match self {
            Self::Auto(n) => EnergyGrid::Auto(*n),
            other => EnergyGrid::Values(other.explicit_values()?),
        })
    }
}

fn parse_finite(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("invalid number '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite number '{s}'")));
    }
    Ok(v)
}

/// Angle or time span: `<float>`, `<float>pi`, or `pi`.
pub fn parse_span(s: &str) -> Result<f64> {
    let lower = s.trim().to_ascii_lowercase();
    let value = if let Some(mult) = lower.strip_suffix("pi") {
        let factor = if mult.is_empty() { 1.0 } else { parse_finite(mult)? };
        factor * std::f64::consts::PI
    } else {
        parse_finite(&lower)?
    };
    if !(value > 0.0) {
        return Err(Error::Parse(format!("span must be positive, got '{s}'")));
    }
    Ok(value)
}

/// Parses a `(rho, phi)` CSV for apsidal-law input: comma-separated pairs,
/// `#` comments, and an optional `rho,phi` header. Radii must be positive
/// and strictly increasing, angles positive.
pub fn parse_phi_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 0 && line.to_ascii_lowercase().starts_with("rho") {
            continue;
        }
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("line {}: expected rho,phi", lineno + 1)))?;
        let rho = parse_finite(a)?;
        let phi = parse_finite(b)?;
        if rho <= 0.0 || phi <= 0.0 {
            return Err(Error::Parse(format!(
                "line {}: rho and phi must be positive",
                lineno + 1
            )));
        }
        if let Some(&(prev, _)) = out.last() {
            if rho <= prev {
                return Err(Error::Parse(format!(
                    "line {}: radii must be strictly increasing",
                    lineno + 1
                )));
            }
        }
        out.push((rho, phi));
    }
    if out.len() < 2 {
        return Err(Error::Parse("apsidal-law CSV needs at least two samples".into()));
    }
    Ok(out)
}

/// Parsed form of an emitted CSV: `(preamble, header, rows)`.
pub type CsvTable = (Vec<String>, Vec<String>, Vec<Vec<String>>);

/// Splits an emitted CSV into `(preamble, header, rows)`; every row must
/// match the header's column count. The inverse of [`Table::to_csv`].
pub fn parse_csv_table(text: &str) -> Result<CsvTable> {
    let mut preamble = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for raw in text.lines() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix("# ") {
            if header.is_none() {
                preamble.push(comment.to_string());
                continue;
            }
            return Err(Error::Parse("comment after the header line".into()));
        }
        let fields: Vec<String> = line.split(',').map(|f| f.to_string()).collect();
        match &header {
            None => header = Some(fields),
            Some(h) => {
                if fields.len() != h.len() {
                    return Err(Error::Parse(format!(
                        "row has {} fields, header has {}",
                        fields.len(),
                        h.len()
                    )));
                }
                rows.push(fields);
            }
        }
    }
    let header = header.ok_or_else(|| Error::Parse("missing header line".into()))?;
    Ok((preamble, header, rows))
}

/// Lossless float formatting: 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

/// One output cell.
#[derive(Debug, Clone)]
pub enum Field {
    Float(f64),
    Int(i64),
    Str(String),
}

impl Field {
    fn csv(&self) -> String {
        match self {
            Self::Float(v) => fmt_float(*v),
            Self::Int(v) => v.to_string(),
            Self::Str(s) => s.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Self::Float(v) if v.is_nan() => "null".into(),
            Self::Float(v) => fmt_float(*v),
            Self::Int(v) => v.to_string(),
            Self::Str(s) => {
                let mut out = String::with_capacity(s.len() + 2);
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
                        c => out.push(c),
                    }
                }
                out.push('"');
                out
            }
        }
    }
}

/// A rectangular result table; the common shape of every subcommand's
/// output.
#[derive(Debug, Clone)]
pub struct Table {
    /// Comment lines, emitted before the header with a `# ` prefix.
    pub preamble: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in &self.preamble {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Field::csv).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    /// Rows as an array of objects with the CSV column names as keys.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str("  {");
            for (j, (col, field)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push('"');
                out.push_str(col);
                out.push_str("\": ");
                out.push_str(&field.json());
            }
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulationArg {
    Binet,
    Radial,
}

#[derive(Debug, Parser)]
#[command(
    name = "bertrand",
    version,
    about = "Central-force orbit toolkit: apsidal angles, period inversion, and closed-orbit selection",
    after_help = "Potential grammar: powerlaw:+,nu=<f>,k=<f> | powerlaw:-,nu=<f>,k=<f> | log:k=<f>\n\
                  Grid grammar: min:max:step | v1,v2,... | auto:N (energies only)\n\
                  Span grammar: <float> | <float>pi | pi"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Potential spec, e.g. powerlaw:-,nu=1,k=1
    #[arg(long)]
    potential: String,
    /// Particle mass
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Override the coupling strength of the potential spec
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
}

impl ProblemArgs {
    fn spec(&self) -> Result<PotentialSpec> {
        let spec: PotentialSpec = self.potential.parse()?;
        match self.k {
            Some(k) => spec.with_coupling(k),
            None => Ok(spec),
        }
    }

    fn problem(&self, l: f64) -> Result<RadialProblem> {
        RadialProblem::new(self.spec()?, self.m, l)
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; stdout when omitted
    #[arg(long)]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Apsidal angle over an L x E grid
    Apsidal {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Angular momentum grid
        #[arg(long = "L", default_value = "1", allow_hyphen_values = true)]
        l: String,
        /// Energy grid (supports auto:N)
        #[arg(long = "E", allow_hyphen_values = true)]
        e: String,
        /// Absolute tolerance on each angle
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Integrate one orbit and classify its closure
    Orbit {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Angular momentum
        #[arg(long = "L", default_value_t = 1.0, allow_hyphen_values = true)]
        l: f64,
        /// Energy
        #[arg(long = "E", allow_hyphen_values = true)]
        e: f64,
        /// Integration span: angle for binet, time for radial
        #[arg(long)]
        span: String,
        /// Dynamical formulation
        #[arg(long, value_enum, default_value_t = FormulationArg::Binet)]
        formulation: FormulationArg,
        /// Conservation tolerance of the integration
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Largest closure denominator searched
        #[arg(long, default_value_t = orbit::DEFAULT_Q_MAX)]
        q_max: u64,
        /// Closure tolerance on phi/pi
        #[arg(long, default_value_t = orbit::DEFAULT_CLOSURE_TOL)]
        closure_tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Invert a period law into the turning-point width Delta x(E)
    Invert {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Angular momentum
        #[arg(long = "L", default_value_t = 1.0, allow_hyphen_values = true)]
        l: f64,
        /// Energy grid (supports auto:N)
        #[arg(long = "E", allow_hyphen_values = true)]
        e: String,
        /// Constant apsidal-angle law
        #[arg(long, conflicts_with = "from_potential", allow_hyphen_values = true)]
        phi_const: Option<f64>,
        /// Use the potential's own apsidal law Phi(E)
        #[arg(long)]
        from_potential: bool,
        /// Tolerance on each width
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Scan a power-law family for isochronous exponents
    ScanBertrand {
        /// Family: attractive or positive
        #[arg(long)]
        family: String,
        /// Exponent grid
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        /// Accept threshold, relative to |V_R|
        #[arg(long, default_value_t = 1e-10)]
        accept: f64,
        /// Reject threshold, relative to |V_R|
        #[arg(long, default_value_t = 1e-3)]
        reject: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Perturbative coefficients and isochrony constraints of one problem
    Perturb {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Angular momentum
        #[arg(long = "L", default_value_t = 1.0, allow_hyphen_values = true)]
        l: f64,
        /// Highest coefficient order a_n
        #[arg(long, default_value_t = 2)]
        max_n: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reconstruct U(r) from a near-circular apsidal law
    Reconstruct {
        /// Constant apsidal angle
        #[arg(long, conflicts_with = "phi_csv", allow_hyphen_values = true)]
        phi_const: Option<f64>,
        /// CSV of rho,phi samples (linear interpolation)
        #[arg(long)]
        phi_csv: Option<PathBuf>,
        /// Radius grid
        #[arg(long)]
        r: String,
        /// Quadrature tolerance
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Runs the CLI; the process exit code is the return value.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (table, output) = match execute(cli.command) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                Error::ToleranceNotMet { .. } | Error::IntegrationFailure(_) => 3,
                _ => 2,
            };
        }
    };
    let rendered = match output.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json(),
    };
    match &output.output {
        None => {
            // Tolerate a closed pipe downstream.
            use std::io::Write;
            let _ = std::io::stdout().lock().write_all(rendered.as_bytes());
            0
        }
        Some(path) => match std::fs::write(path, rendered) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                2
            }
        },
    }
}

fn execute(command: Command) -> Result<(Table, OutputArgs)> {
    match command {
        Command::Apsidal { problem, l, e, tol, output } => {
            let spec = problem.spec()?;
            let l_values = GridSpec::parse(&l)?.explicit_values()?;
            let energies = GridSpec::parse(&e)?.energy_grid()?;
            let rows = apsidal::apsidal_sweep(&spec, problem.m, &l_values, &energies, tol)?;
            let table = Table {
                preamble: vec![],
                columns: vec!["L", "E", "phi", "err_est", "status"],
                rows: rows
                    .iter()
                    .map(|r| {
                        vec![
                            Field::Float(r.angular_momentum),
                            Field::Float(r.energy),
                            Field::Float(r.phi),
                            Field::Float(r.err_est),
                            Field::Str(r.status.as_str().into()),
                        ]
                    })
                    .collect(),
            };
            Ok((table, output))
        }
        Command::Orbit {
            problem,
            l,
            e,
            span,
            formulation,
            tol,
            q_max,
            closure_tol,
            output,
        } => {
            let problem = problem.problem(l)?;
            let span = parse_span(&span)?;
            let trace = match formulation {
                FormulationArg::Binet => orbit::integrate_binet(&problem, e, span, tol)?,
                FormulationArg::Radial => orbit::integrate_radial(&problem, e, span, tol)?,
            };
            let closure = orbit::classify_orbit(&problem, e, q_max, closure_tol)?;
            let table = Table {
                preamble: vec![
                    format!("formulation={}", trace.formulation.as_str()),
                    format!("classification={}", closure.label()),
                    format!("energy_drift={}", fmt_float(trace.energy_drift)),
                ],
                columns: vec!["param", "r_or_x", "deriv", "phi_or_t", "energy"],
                rows: trace
                    .samples
                    .iter()
                    .map(|s| {
                        vec![
                            Field::Float(s.param),
                            Field::Float(s.pos),
                            Field::Float(s.deriv),
                            Field::Float(match trace.formulation {
                                Formulation::Binet => s.angle,
                                Formulation::Radial => s.angle,
                            }),
                            Field::Float(s.energy),
                        ]
                    })
                    .collect(),
            };
            Ok((table, output))
        }
        Command::Invert { problem, l, e, phi_const, from_potential, tol, output } => {
            let problem = problem.problem(l)?;
            let energies = GridSpec::parse(&e)?.energy_grid()?.resolve(&problem)?;
            let v_min = problem.v_min();
            let law: EnergyFunction = match (phi_const, from_potential) {
                (Some(phi), false) => {
                    if !(phi > 0.0) {
                        return Err(Error::DomainError(format!(
                            "constant law must be positive, got {phi}"
                        )));
                    }
                    EnergyFunction::bounded_offset(v_min, move |_| phi)
                }
                (None, true) => {
                    let inner_tol = tol * 1e-2;
                    let p = problem.clone();
                    EnergyFunction::bounded_offset(v_min, move |delta| {
                        apsidal::apsidal_angle(&p, v_min + delta, inner_tol)
                            .map(|r| r.phi)
                            .unwrap_or(f64::NAN)
                    })
                }
                _ => {
                    return Err(Error::Parse(
                        "invert needs exactly one of --phi-const or --from-potential".into(),
                    ))
                }
            };
            let mut rows = Vec::new();
            for e in energies {
                let row = match fractional::invert_period(&law, &problem, e, tol) {
                    Ok(delta) if delta.is_finite() => {
                        vec![
                            Field::Float(e),
                            Field::Float(delta),
                            Field::Str(SweepStatus::Ok.as_str().into()),
                        ]
                    }
                    Ok(_) => vec![
                        Field::Float(e),
                        Field::Float(f64::NAN),
                        Field::Str(SweepStatus::TolFail.as_str().into()),
                    ],
                    Err(err) => {
                        let status = match err {
                            Error::EnergyBelowMinimum { .. } | Error::DomainError(_) => {
                                SweepStatus::BelowMin
                            }
                            Error::UnboundedOrbit(_) => SweepStatus::Unbounded,
                            Error::ToleranceNotMet { .. } => SweepStatus::TolFail,
                            other => return Err(other),
                        };
                        vec![
                            Field::Float(e),
                            Field::Float(f64::NAN),
                            Field::Str(status.as_str().into()),
                        ]
                    }
                };
                rows.push(row);
            }
            let table = Table {
                preamble: vec![format!("v_min={}", fmt_float(v_min))],
                columns: vec!["E", "delta_x", "status"],
                rows,
            };
            Ok((table, output))
        }
        Command::ScanBertrand { family, nu, accept, reject, output } => {
            let family = Family::parse(&family)
                .ok_or_else(|| Error::Parse(format!("unknown family '{family}'")))?;
            let grid = GridSpec::parse(&nu)?.explicit_values()?;
            let thresholds = ScanThresholds { accept, reject };
            let outcome =
                isochrony::bertrand_scan(family, &grid, &isochrony::DEFAULT_PROBES, thresholds)?;
            let mut rows: Vec<Vec<Field>> = outcome
                .reports
                .iter()
                .map(|r| {
                    vec![
                        Field::Str(r.family.as_str().into()),
                        Field::Float(r.nu),
                        Field::Float(r.transcendental_value),
                        Field::Float(r.residual_sup),
                        Field::Float(r.constraint_violation),
                        Field::Str(r.verdict.as_str().into()),
                    ]
                })
                .collect();
            for &root in &outcome.roots {
                let rep =
                    isochrony::report_at(family, root, &isochrony::DEFAULT_PROBES, thresholds)?;
                rows.push(vec![
                    Field::Str(family.as_str().into()),
                    Field::Float(root),
                    Field::Float(rep.transcendental_value),
                    Field::Float(rep.residual_sup),
                    Field::Float(rep.constraint_violation),
                    Field::Str("root".into()),
                ]);
            }
            let table = Table {
                preamble: vec![],
                columns: vec![
                    "family",
                    "nu",
                    "transcendental",
                    "residual_sup",
                    "fourth_order_violation",
                    "verdict",
                ],
                rows,
            };
            Ok((table, output))
        }
        Command::Perturb { problem, l, max_n, output } => {
            let problem = problem.problem(l)?;
            let coeffs = isochrony::perturbative_coefficients(&problem, max_n)?;
            let constraints = isochrony::isochrony_constraints(&problem)?;
            let curv = crate::turning::curvature(&problem)?;
            let mut rows = vec![
                vec![Field::Str("x0".into()), Field::Float(problem.x0())],
                vec![Field::Str("v_min".into()), Field::Float(problem.v_min())],
                vec![Field::Str("m_omega_sq".into()), Field::Float(curv.w_second)],
            ];
            for (i, a) in coeffs.iter().enumerate() {
                rows.push(vec![Field::Str(format!("a_{}", i + 1)), Field::Float(*a)]);
            }
            rows.push(vec![
                Field::Str("gamma_check".into()),
                Field::Float(constraints.gamma_check),
            ]);
            rows.push(vec![
                Field::Str("fourth_order_violation".into()),
                Field::Float(constraints.fourth_order_violation),
            ]);
            let table =
                Table { preamble: vec![], columns: vec!["quantity", "value"], rows };
            Ok((table, output))
        }
        Command::Reconstruct { phi_const, phi_csv, r, tol, output } => {
            let grid = GridSpec::parse(&r)?.explicit_values()?;
            let samples = match (phi_const, phi_csv) {
                (Some(phi), None) => {
                    isochrony::reconstruct_potential(&move |_| phi, &grid, tol)?
                }
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        Error::Parse(format!("cannot read {}: {e}", path.display()))
                    })?;
                    let table = parse_phi_csv(&text)?;
                    let law = move |rho: f64| interpolate_law(&table, rho);
                    isochrony::reconstruct_potential(&law, &grid, tol)?
                }
                _ => {
                    return Err(Error::Parse(
                        "reconstruct needs exactly one of --phi-const or --phi-csv".into(),
                    ))
                }
            };
            let table = Table {
                preamble: vec![],
                columns: vec!["r", "u", "du"],
                rows: samples
                    .iter()
                    .map(|s| {
                        vec![Field::Float(s.r), Field::Float(s.u), Field::Float(s.du)]
                    })
                    .collect(),
            };
            Ok((table, output))
        }
    }
}

/// Piecewise-linear interpolation of a sampled apsidal law; NaN outside
/// the sampled range, which the reconstruction rejects.
fn interpolate_law(samples: &[(f64, f64)], rho: f64) -> f64 {
    let n = samples.len();
    if rho < samples[0].0 || rho > samples[n - 1].0 {
        return f64::NAN;
    }
    let idx = samples.partition_point(|&(r, _)| r < rho).clamp(1, n - 1);
    let (r0, p0) = samples[idx - 1];
    let (r1, p1) = samples[idx];
    p0 + (p1 - p0) * (rho - r0) / (r1 - r0)
}
