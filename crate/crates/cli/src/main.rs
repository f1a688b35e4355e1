//! Command-line front end: parse field files (or built-in field names),
//! dispatch to the numerical library and emit machine-readable reports.
//!
//! Exit codes: 0 on success, 1 on validation errors, 2 on numerical
//! failures (instability or an unconverged horizon). Reports are written to
//! `--output` (stdout by default) and stay valid JSON even on failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use ballflow::bounds;
use ballflow::herglotz::{HerglotzField, SampleGrid, MEMBERSHIP_TOL};
use ballflow::io as fmt;
use ballflow::loewner;
use ballflow::Error;

const FIELD_HELP: &str = "field file, or one of the built-in names \
\"linear\", \"koebe\", \"pure_z2m:<m>\"";

#[derive(Parser)]
#[command(
    name = "ballflow",
    version,
    about = "Evolution families and coefficient bounds on the unit ball of C^2"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArg {
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sampled test of the class condition Re <G(z), z> <= 0.
    CheckField {
        #[arg(long, help = FIELD_HELP)]
        field: String,
        /// Truncation degree used for built-in field names.
        #[arg(long, default_value_t = 8)]
        degree: u32,
        #[arg(long, default_value_t = 20)]
        radial: usize,
        #[arg(long, default_value_t = 16)]
        polar: usize,
        #[arg(long, default_value_t = 24)]
        phases: usize,
        #[arg(long, default_value_t = MEMBERSHIP_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Keep only the resonant terms of a field.
    Decouple {
        #[arg(long, help = FIELD_HELP)]
        field: String,
        #[arg(long, default_value_t = 8)]
        degree: u32,
        #[arg(long)]
        k1: i64,
        #[arg(long)]
        k2: i64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Slice a field along a complex line and run the Caratheodory tests.
    Slice {
        #[arg(long, help = FIELD_HELP)]
        field: String,
        #[arg(long, default_value_t = 8)]
        degree: u32,
        /// Unit direction as "re1,im1,re2,im2".
        #[arg(long, short = 'v')]
        direction: String,
        #[arg(long, default_value_t = 6)]
        order: usize,
        /// Eigenvalue slack for the Toeplitz positivity test.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Integrate trajectories and emit them as CSV.
    Evolve {
        #[arg(long, help = FIELD_HELP)]
        field: String,
        #[arg(long, default_value_t = 8)]
        degree: u32,
        /// Start point "re1,im1,re2,im2"; repeatable.
        #[arg(long, required = true)]
        point: Vec<String>,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long, short = 't')]
        t: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Record every this many steps.
        #[arg(long, default_value_t = 100)]
        every: usize,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Coefficients of the parametric-representation limit of a field.
    Coeffs {
        #[arg(long, help = FIELD_HELP)]
        field: String,
        #[arg(long, default_value_t = 8)]
        degree: u32,
        /// Horizon T for the t -> infinity limit.
        #[arg(long, short = 't', default_value_t = 20.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        /// Cauchy tolerance between T/2 and T. The T/2 comparison point
        /// itself sits ~e^{-T/2} from the limit, which caps how small this
        /// can meaningfully be at a given horizon.
        #[arg(long, default_value_t = 1e-3)]
        conv_tol: f64,
        /// Also write the full evolution record as CSV to this path.
        #[arg(long)]
        record_csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Closed-form and numerically verified sharp bounds u_m.
    Bounds {
        /// Single value "4" or inclusive range "2..6".
        #[arg(long, short = 'm', default_value = "2..8")]
        m: String,
        #[arg(long, default_value_t = 10_000)]
        resolution: usize,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Squeezing margin and the contraction inequality check.
    Squeeze {
        #[arg(long, help = FIELD_HELP)]
        field: String,
        #[arg(long, default_value_t = 8)]
        degree: u32,
        /// Squeezing ratio to verify; the margin alone is reported if absent.
        #[arg(long)]
        ratio: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long, short = 't', default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 6)]
        radial: usize,
        #[arg(long, default_value_t = 6)]
        polar: usize,
        #[arg(long, default_value_t = 8)]
        phases: usize,
        #[command(flatten)]
        out: OutputArg,
    },
    /// Largest r with (z1 + a r z2^2, z2) in the parametric class.
    ShearRadius {
        /// Shear coefficient as "re" or "re,im".
        #[arg(long, short = 'a')]
        a: String,
        #[command(flatten)]
        out: OutputArg,
    },
}

#[derive(Serialize)]
struct ComplexRecord {
    re: f64,
    im: f64,
}

impl From<Complex64> for ComplexRecord {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Serialize)]
struct PointRecord {
    z1: ComplexRecord,
    z2: ComplexRecord,
}

impl From<[Complex64; 2]> for PointRecord {
    fn from(z: [Complex64; 2]) -> Self {
        Self { z1: z[0].into(), z2: z[1].into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let output = output_of(&cli.command);
    match dispatch(cli.command) {
        Ok(report) => match write_output(output.as_deref(), &report) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("ballflow: cannot write output: {e}");
                ExitCode::from(1)
            }
        },
        Err(err) => {
            let code = if err.is_numerical() { 2 } else { 1 };
            let report = error_report(&err, code);
            let _ = write_output(output.as_deref(), &report);
            eprintln!("ballflow: {err}");
            ExitCode::from(code)
        }
    }
}

fn output_of(command: &Command) -> Option<PathBuf> {
    match command {
        Command::CheckField { out, .. }
        | Command::Decouple { out, .. }
        | Command::Slice { out, .. }
        | Command::Evolve { out, .. }
        | Command::Coeffs { out, .. }
        | Command::Bounds { out, .. }
        | Command::Squeeze { out, .. }
        | Command::ShearRadius { out, .. } => out.output.clone(),
    }
}

fn write_output(path: Option<&std::path::Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(path) => fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn error_report(err: &Error, code: u8) -> String {
    #[derive(Serialize)]
    struct ErrorBody {
        kind: &'static str,
        message: String,
        exit: u8,
    }
    #[derive(Serialize)]
    struct ErrorReport {
        error: ErrorBody,
    }
    let report = ErrorReport {
        error: ErrorBody {
            kind: if err.is_numerical() { "numerical" } else { "validation" },
            message: err.to_string(),
            exit: code,
        },
    };
    fmt::canonical_json(&report).unwrap_or_else(|_| "{\"error\":{}}\n".into())
}

fn load_field(spec: &str, degree: u32) -> Result<HerglotzField, Error> {
    match spec {
        "linear" => Ok(bounds::linear_field(degree)),
        "koebe" => Ok(bounds::koebe_field(degree)),
        s if s.starts_with("pure_z2m:") => {
            let m = s["pure_z2m:".len()..]
                .parse::<u32>()
                .map_err(|_| Error::Parameter(format!("bad pure_z2m power in \"{s}\"")))?;
            bounds::pure_power_field(m, degree)
        }
        path => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Schema(format!("cannot read {path}: {e}")))?;
            fmt::field_from_json(&text)
        }
    }
}

fn parse_complex(s: &str) -> Result<Complex64, Error> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Parameter(format!("cannot parse complex number from \"{s}\""));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(re.parse().map_err(|_| bad())?, 0.0)),
        [re, im] => Ok(Complex64::new(
            re.parse().map_err(|_| bad())?,
            im.parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

fn parse_point(s: &str) -> Result<[Complex64; 2], Error> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(Error::Parameter(format!(
            "points are written \"re1,im1,re2,im2\", got \"{s}\""
        )));
    }
    let num = |p: &str| -> Result<f64, Error> {
        p.parse()
            .map_err(|_| Error::Parameter(format!("bad number \"{p}\" in point \"{s}\"")))
    };
    Ok([
        Complex64::new(num(parts[0])?, num(parts[1])?),
        Complex64::new(num(parts[2])?, num(parts[3])?),
    ])
}

fn parse_m_range(s: &str) -> Result<(u32, u32), Error> {
    let bad = || Error::Parameter(format!("bad m range \"{s}\"; use \"4\" or \"2..6\""));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if hi < lo {
            return Err(bad());
        }
        Ok((lo, hi))
    } else {
        let m: u32 = s.trim().parse().map_err(|_| bad())?;
        Ok((m, m))
    }
}

fn dispatch(command: Command) -> Result<String, Error> {
    match command {
        Command::CheckField { field, degree, radial, polar, phases, tol, .. } => {
            let field = load_field(&field, degree)?;
            let grid = SampleGrid::new(radial, polar, phases);
            let verdict = field.membership_test(&grid, tol);

            #[derive(Serialize)]
            struct GridRecord {
                radial: usize,
                polar: usize,
                phases: usize,
            }
            #[derive(Serialize)]
            struct Report {
                command: &'static str,
                grid: GridRecord,
                tol: f64,
                passed: bool,
                worst_value: f64,
                witness: Option<PointRecord>,
                note: &'static str,
            }
            fmt::canonical_json(&Report {
                command: "check-field",
                grid: GridRecord { radial: grid.radial, polar: grid.polar, phases: grid.phase },
                tol,
                passed: verdict.passed,
                worst_value: verdict.worst_value,
                witness: verdict.witness.map(Into::into),
                note: "a sampled pass is evidence only; a failure with witness is conclusive",
            })
        }

        Command::Decouple { field, degree, k1, k2, .. } => {
            let field = load_field(&field, degree)?;
            fmt::field_to_json(&field.decouple(k1, k2)?)
        }

        Command::Slice { field, degree, direction, order, tol, .. } => {
            let field = load_field(&field, degree)?;
            let v = parse_point(&direction)?;
            let slice = field.slice(v, order)?;
            let bound = slice.coeff_bound_check();
            let toeplitz = (1..=order)
                .map(|m| slice.toeplitz_check(m, tol))
                .collect::<Result<Vec<_>, _>>()?;

            #[derive(Serialize)]
            struct CoeffRow {
                m: usize,
                re: f64,
                im: f64,
                abs: f64,
            }
            #[derive(Serialize)]
            struct BoundRecord {
                ok: bool,
                violations: Vec<usize>,
                boundary: Vec<usize>,
                boundary_note: &'static str,
            }
            #[derive(Serialize)]
            struct ToeplitzRow {
                m: usize,
                psd: bool,
                min_eigenvalue: f64,
            }
            #[derive(Serialize)]
            struct Report {
                command: &'static str,
                direction: PointRecord,
                order: usize,
                coefficients: Vec<CoeffRow>,
                coeff_bound: BoundRecord,
                toeplitz: Vec<ToeplitzRow>,
            }
            fmt::canonical_json(&Report {
                command: "slice",
                direction: v.into(),
                order,
                coefficients: slice
                    .coefficients()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| CoeffRow { m: i + 1, re: c.re, im: c.im, abs: c.norm() })
                    .collect(),
                coeff_bound: BoundRecord {
                    ok: bound.ok,
                    violations: bound.violations,
                    boundary: bound.boundary,
                    boundary_note: "a coefficient of modulus 2 forces a finite convex \
                        combination of rotated half-plane kernels (reported, not verified)",
                },
                toeplitz: toeplitz
                    .iter()
                    .enumerate()
                    .map(|(i, t)| ToeplitzRow {
                        m: i + 1,
                        psd: t.psd,
                        min_eigenvalue: t.min_eigenvalue,
                    })
                    .collect(),
            })
        }

        Command::Evolve { field, degree, point, s, t, step, every, .. } => {
            let field = load_field(&field, degree)?;
            let mut csv = String::from("point,t,re_z1,im_z1,re_z2,im_z2\r\n");
            for (id, spec) in point.iter().enumerate() {
                let z = parse_point(spec)?;
                let (samples, _) = loewner::integrate_path(&field, z, s, t, step, every.max(1))?;
                for (tau, w) in samples {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\r\n",
                        id, tau, w[0].re, w[0].im, w[1].re, w[1].im
                    ));
                }
            }
            Ok(csv)
        }

        Command::Coeffs { field, degree, horizon, step, conv_tol, record_csv, .. } => {
            let field = load_field(&field, degree)?;
            let record = loewner::coeff_evolution(&field, degree, 0.0, horizon, step)?;
            if let Some(path) = record_csv {
                fs::write(&path, fmt::evolution_to_csv(&record))
                    .map_err(|e| Error::Schema(format!("cannot write {}: {e}", path.display())))?;
            }
            let (map, conv) = loewner::parametric_from_record(&record, conv_tol)?;

            #[derive(Serialize)]
            struct Convergence {
                horizon: f64,
                step: f64,
                conv_tol: f64,
                worst_delta: f64,
                worst_component: u8,
                worst_alpha: [u32; 2],
            }
            #[derive(Serialize)]
            struct Report {
                command: &'static str,
                map: fmt::MapRecord,
                convergence: Convergence,
            }
            fmt::canonical_json(&Report {
                command: "coeffs",
                map: fmt::map_to_record(&map),
                convergence: Convergence {
                    horizon,
                    step,
                    conv_tol,
                    worst_delta: conv.worst_delta,
                    worst_component: conv.worst_component,
                    worst_alpha: [conv.worst_alpha.a1, conv.worst_alpha.a2],
                },
            })
        }

        Command::Bounds { m, resolution, .. } => {
            let (lo, hi) = parse_m_range(&m)?;
            let mut rows = Vec::new();
            for m in lo..=hi {
                let r = bounds::verify_q0m_numeric(m, resolution)?;
                rows.push(BoundRow {
                    m,
                    closed_form: r.closed_form,
                    numeric: r.numeric,
                    x_opt: r.optimizer.0,
                    y_opt: r.optimizer.1,
                    abs_err: r.abs_err(),
                });
            }

            #[derive(Serialize)]
            struct Qm0 {
                bound: f64,
                witness: &'static str,
            }
            #[derive(Serialize)]
            struct Report {
                command: &'static str,
                resolution: usize,
                results: Vec<BoundRow>,
                qm0: Qm0,
            }
            fmt::canonical_json(&Report {
                command: "bounds",
                resolution,
                results: rows,
                qm0: Qm0 { bound: bounds::QM0_BOUND, witness: bounds::QM0_WITNESS },
            })
        }

        Command::Squeeze { field, degree, ratio, s, t, step, radial, polar, phases, .. } => {
            let field = load_field(&field, degree)?;
            let grid = SampleGrid::new(radial, polar, phases);
            let margin = loewner::squeezing_margin(&field, &grid);
            let violations = match ratio {
                Some(a) => loewner::squeezing_equiv_check(&field, a, s, t, &grid, step)?,
                None => Vec::new(),
            };

            #[derive(Serialize)]
            struct ViolationRow {
                s: f64,
                t: f64,
                z: PointRecord,
                lhs: f64,
                rhs: f64,
            }
            #[derive(Serialize)]
            struct Report {
                command: &'static str,
                margin: f64,
                ratio: Option<f64>,
                violation_count: usize,
                /// At most the first 50 violations.
                violations: Vec<ViolationRow>,
            }
            fmt::canonical_json(&Report {
                command: "squeeze",
                margin,
                ratio,
                violation_count: violations.len(),
                violations: violations
                    .iter()
                    .take(50)
                    .map(|v| ViolationRow {
                        s: v.s,
                        t: v.t,
                        z: v.z.into(),
                        lhs: v.lhs,
                        rhs: v.rhs,
                    })
                    .collect(),
            })
        }

        Command::ShearRadius { a, .. } => {
            let a = parse_complex(&a)?;
            let radius = bounds::shear_radius(a)?;

            #[derive(Serialize)]
            struct Report {
                command: &'static str,
                a: ComplexRecord,
                radius: f64,
            }
            fmt::canonical_json(&Report { command: "shear-radius", a: a.into(), radius })
        }
    }
}

#[derive(Serialize)]
struct BoundRow {
    m: u32,
    closed_form: f64,
    numeric: f64,
    x_opt: f64,
    y_opt: f64,
    abs_err: f64,
}
