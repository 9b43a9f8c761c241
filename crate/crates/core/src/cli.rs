//! Command-line front end.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::json;

use chaincraft::chain::{defect_of, integrate_chain, ChainConfig, ChainState};
use chaincraft::fefferman::{integrate_null_geodesic, null_lift, GeodesicConfig, GeodesicOracle};
use chaincraft::integrate::{CurveSample, IntegrationConfig, SamplePoint, Status};
use chaincraft::lie::{circles, flat, hooke, horocycle, LieAlgebraModel};
use chaincraft::output::{write_csv, JsonDocument, SvgPlot};
use chaincraft::verify::{self, VerifyOptions};
use chaincraft::{Error, SecondOrderOde};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

const CHAIN_COLUMNS: &str = "CSV columns: x,y,p,yp,pp,delta,resid
  x      independent variable
  y, p   point of the chain in the (x, y, p) chart
  yp, pp derivatives dy/dx and dp/dx
  delta  transversality yp - p
  resid  y'' - f(x, y, y') along the projected curve (0 for paths)";

const GEODESIC_COLUMNS: &str = "CSV columns: t,x,y,p,tau,xd,yd,pd,td,nullity,delta,chain_dist
  t          affine parameter
  x..tau     position in the chart, tau the fiber coordinate
  xd..td     velocity
  nullity    g(v, v) of the Fefferman metric
  delta      yd - p xd
  chain_dist distance to the chain with the same initial data at equal x
             (empty unless compared; NaN where x stops increasing)";

const HOMOG_COLUMNS: &str = "CSV columns by model:
  flat-heisenberg  t,x,y,z,closed_form_dist,concurrency
  flat-se2         t,x,y,theta,closed_form_dist
  circles-se2      t,theta,theta_dot,x,y,theta_excess,energy[,newton_dist]
  hooke-sl2        t,phi,r1,r2,h1,h2,det_drift,H,closed_form_dist
  horocycle        phi,x,y,resid,incidence";

#[derive(Debug, Parser)]
#[command(name = "chaincraft", version, about = "Chains of path geometries y'' = f(x, y, y')")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a chain from a transverse initial state.
    #[command(after_help = CHAIN_COLUMNS)]
    Chain(ChainArgs),
    /// Integrate a null geodesic of the Fefferman metric and compare with the chain.
    #[command(after_help = GEODESIC_COLUMNS)]
    Geodesic(GeodesicArgs),
    /// Chains of the homogeneous models.
    #[command(after_help = HOMOG_COLUMNS)]
    Homog(HomogArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dp54,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleArg {
    Generic,
    Explicit,
}

#[derive(Debug, Args)]
struct GeometryArgs {
    /// Built-in geometry: flat, hooke, poly-p.
    #[arg(long, conflicts_with = "expr", required_unless_present = "expr")]
    geometry: Option<String>,
    /// Right-hand side f(x, y, p) as an expression.
    #[arg(long)]
    expr: Option<String>,
    /// Parameter binding `name=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
}

impl GeometryArgs {
    fn build(&self) -> chaincraft::Result<SecondOrderOde> {
        let params: BTreeMap<String, f64> = self.params.iter().cloned().collect();
        match (&self.geometry, &self.expr) {
            (Some(name), None) => SecondOrderOde::builtin(name, &params),
            (None, Some(src)) => SecondOrderOde::from_source(src, &params),
            _ => Err(Error::Config("give exactly one of --geometry and --expr".into())),
        }
    }

    fn echo(&self) -> serde_json::Value {
        json!({ "geometry": self.geometry, "expr": self.expr, "params": self.params.iter().cloned().collect::<BTreeMap<_, _>>() })
    }
}

#[derive(Debug, Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "dp54")]
    method: MethodArg,
    /// Absolute and relative tolerance of dp54.
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    /// Step size of rk4.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 100_000)]
    max_steps: usize,
}

impl SolverArgs {
    fn config(&self) -> IntegrationConfig {
        let cfg = match self.method {
            MethodArg::Dp54 => IntegrationConfig::dp54(self.tol, self.tol),
            MethodArg::Rk4 => IntegrationConfig::rk4(self.step),
        };
        cfg.with_max_steps(self.max_steps)
    }

    fn echo(&self) -> serde_json::Value {
        json!({ "method": format!("{:?}", self.method).to_lowercase(), "tol": self.tol, "step": self.step, "max_steps": self.max_steps })
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ChainArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Initial state `x,y,p,yp,pp` with yp != p.
    #[arg(long, value_parser = parse_vec::<5>, allow_hyphen_values = true)]
    init: [f64; 5],
    /// End of the x interval; defaults to one unit past the start.
    #[arg(long, allow_hyphen_values = true)]
    xmax: Option<f64>,
    /// Stop once |yp| or |pp| reaches this bound (`inf` to disable).
    #[arg(long, default_value_t = 50.0)]
    slope_bound: f64,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct GeodesicArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    /// Base point `x,y,p`.
    #[arg(long, value_parser = parse_vec::<3>, allow_hyphen_values = true)]
    at: [f64; 3],
    /// Projected direction `xd,yd,pd`; the fiber rate is fixed by nullity.
    #[arg(long, value_parser = parse_vec::<3>, allow_hyphen_values = true)]
    dir: [f64; 3],
    /// Stop when x reaches this value.
    #[arg(long, allow_hyphen_values = true)]
    xmax: Option<f64>,
    /// Largest affine parameter.
    #[arg(long, default_value_t = 100.0)]
    tmax: f64,
    #[arg(long, value_enum, default_value = "generic")]
    oracle: OracleArg,
    /// Skip the comparison with the chain.
    #[arg(long)]
    no_compare: bool,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_steps: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct HomogArgs {
    /// flat-heisenberg, flat-se2, circles-se2, hooke-sl2 or horocycle.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    c: f64,
    /// Radius of the rigid-motion flat chain.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Initial heading of a circle chain; defaults to 0, or pi/2 when c = 0.
    #[arg(long, allow_hyphen_values = true)]
    theta0: Option<f64>,
    /// Initial turning parameter of a Hooke chain.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi0: f64,
    /// End time; negative values run circle chains backwards.
    #[arg(long, allow_hyphen_values = true)]
    tmax: Option<f64>,
    /// Samples of the horocycle parametrization.
    #[arg(long, default_value_t = 400)]
    samples: usize,
    /// Compare with an independent solution and report the distance.
    #[arg(long)]
    compare: bool,
    /// Also write an SVG plot of the projected chain.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Multiply upper tolerances (and divide lower bounds) by this factor.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    /// Run only these checks (comma separated).
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    /// Worker threads; defaults to CHAINCRAFT_THREADS or all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let value: f64 = value.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((name.trim().to_string(), value))
}

fn parse_vec<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("bad number `{v}`: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    <[f64; N]>::try_from(values).map_err(|v| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

/// Failure of a subcommand, carrying its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::NonFiniteState { .. } | Error::SingularMetric { .. } => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Chain(a) => cmd_chain(&a),
        Command::Geodesic(a) => cmd_geodesic(&a),
        Command::Homog(a) => cmd_homog(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn status_code(status: Status) -> i32 {
    match status {
        Status::ReachedEnd | Status::Event => EXIT_OK,
        Status::MaxSteps | Status::NonFinite => EXIT_NUMERICAL,
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => {
            let f = File::create(p)
                .map_err(|e| Failure { code: EXIT_USAGE, message: format!("cannot write {}: {e}", p.display()) })?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn write_text(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    let mut out = open_out(path)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure { code: EXIT_USAGE, message: e.to_string() })
}

/// Writes the curve in the requested format; `plot` supplies the SVG.
fn emit(
    output: &OutputArgs,
    command: &str,
    config: serde_json::Value,
    curve: &CurveSample,
    report: &BTreeMap<String, f64>,
    plot: impl FnOnce() -> SvgPlot,
) -> Result<(), Failure> {
    match output.format {
        Format::Csv => {
            let out = open_out(&output.out)?;
            write_csv(curve, out)?;
            Ok(())
        }
        Format::Json => {
            let doc = JsonDocument::new(command, config, curve, report);
            write_text(&output.out, &(doc.to_string_pretty()? + "\n"))
        }
        Format::Svg => write_text(&output.out, &plot().render()),
    }
}

fn print_report(status: Status, report: &BTreeMap<String, f64>) {
    eprintln!("status: {status}");
    for (k, v) in report {
        eprintln!("{k}: {v:e}");
    }
}

fn nan_max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().filter(|v| !v.is_nan()).fold(f64::NAN, |m, v| if m.is_nan() { v.abs() } else { m.max(v.abs()) })
}

fn cmd_chain(args: &ChainArgs) -> CmdResult {
    let geom = args.geometry.build()?;
    let [x, y, p, yp, pp] = args.init;
    let s0 = ChainState::new(x, y, p, yp, pp);
    let x1 = args.xmax.unwrap_or(x + 1.0);
    let mut cfg = ChainConfig::default().with_integration(args.solver.config());
    if args.slope_bound.is_finite() {
        cfg = cfg.with_slope_bound(args.slope_bound);
    }
    let curve = integrate_chain(&geom, &s0, x1, &cfg)?;
    let mut report = BTreeMap::new();
    report.insert("max_resid".to_string(), defect_of(&curve).unwrap_or(f64::NAN));
    report.insert(
        "min_abs_delta".to_string(),
        curve.diag("delta").unwrap_or_default().iter().fold(f64::INFINITY, |m, d| m.min(d.abs())),
    );
    report.insert("x_end".to_string(), curve.last().map_or(x, |s| s.t));
    print_report(curve.status, &report);
    let config = json!({
        "geometry": args.geometry.echo(), "init": args.init, "xmax": x1,
        "slope_bound": args.slope_bound, "solver": args.solver.echo(),
    });
    emit(&args.output, "chain", config, &curve, &report, || {
        let mut plot = SvgPlot::new(&format!("chain of y'' = {}", geom.name()));
        plot.polyline(curve.points.iter().map(|s| (s.t, s.state[0])).collect(), "black");
        plot
    })?;
    Ok(status_code(curve.status))
}

fn cmd_geodesic(args: &GeodesicArgs) -> CmdResult {
    let geom = args.geometry.build()?;
    let [x, y, p] = args.at;
    let start = null_lift(&geom, x, y, p, args.dir)?;
    let cfg = GeodesicConfig {
        oracle: match args.oracle {
            OracleArg::Generic => GeodesicOracle::Generic,
            OracleArg::Explicit => GeodesicOracle::Explicit,
        },
        integration: IntegrationConfig::dp54(args.tol, args.tol).with_max_steps(args.max_steps),
        x_stop: args.xmax,
        compare_chain: !args.no_compare,
        ..GeodesicConfig::default()
    };
    let curve = integrate_null_geodesic(&geom, &start, args.tmax, &cfg)?;
    let mut report = BTreeMap::new();
    report.insert("max_nullity".to_string(), nan_max(curve.diag("nullity").unwrap_or_default()));
    if let Some(d) = curve.diag("chain_dist") {
        report.insert("compared_samples".to_string(), d.iter().filter(|v| !v.is_nan()).count() as f64);
        report.insert("max_chain_dist".to_string(), nan_max(d));
    }
    report.insert("x_end".to_string(), curve.last().map_or(x, |s| s.state[0]));
    print_report(curve.status, &report);
    let config = json!({
        "geometry": args.geometry.echo(), "at": args.at, "dir": args.dir, "xmax": args.xmax,
        "tmax": args.tmax, "oracle": format!("{:?}", args.oracle).to_lowercase(),
        "compare": !args.no_compare, "tol": args.tol, "max_steps": args.max_steps,
    });
    emit(&args.output, "geodesic", config, &curve, &report, || {
        let mut plot = SvgPlot::new(&format!("null geodesic of y'' = {}", geom.name()));
        plot.polyline(curve.points.iter().map(|s| (s.state[0], s.state[1])).collect(), "black");
        plot
    })?;
    Ok(status_code(curve.status))
}

fn new_curve(t_name: &str, states: &[&str], diags: &[&str]) -> CurveSample {
    CurveSample::new(
        t_name,
        states.iter().map(|s| s.to_string()).collect(),
        diags.iter().map(|s| s.to_string()).collect(),
    )
}

struct HomogRun {
    curve: CurveSample,
    report: BTreeMap<String, f64>,
    plot: SvgPlot,
}

fn homog_heisenberg(args: &HomogArgs, cfg: &IntegrationConfig) -> chaincraft::Result<HomogRun> {
    let (a, b, c) = (args.a, args.b, args.c);
    let model = LieAlgebraModel::by_name("flat-heisenberg")?;
    let n = model.algebra().matrix_dim();
    let traj = model.reconstruct(
        flat::heisenberg_momenta(a, b, c),
        &DMatrix::identity(n, n),
        args.tmax.unwrap_or(1.0),
        cfg,
    )?;
    let mut curve = new_curve("t", &["x", "y", "z"], &["closed_form_dist", "concurrency"]);
    curve.status = traj.curve.status;
    for i in 0..traj.len() {
        let t = traj.time(i);
        let (x, y, z) = flat::heisenberg_coordinates(&traj.element(i));
        let (xe, ye, ze) = flat::heisenberg_closed_form(a, b, c, t);
        let dist = (x - xe).abs().max((y - ye).abs()).max((z - ze).abs());
        curve.points.push(SamplePoint {
            t,
            state: vec![x, y, z],
            diag: vec![dist, flat::concurrency_residual(b, x, y, z)],
        });
    }
    let mut report = BTreeMap::new();
    report.insert("max_closed_form_dist".into(), nan_max(curve.diag("closed_form_dist").unwrap_or_default()));
    report.insert("max_concurrency".into(), nan_max(curve.diag("concurrency").unwrap_or_default()));
    let mut plot = SvgPlot::new("flat chain, Heisenberg form");
    plot.polyline(curve.points.iter().map(|s| (s.state[0], s.state[1])).collect(), "red");
    // Lifted lines through (x, y) with slope -z all pass through (b, 0).
    for s in curve.points.iter().step_by((curve.len() / 20).max(1)) {
        plot.segment((s.state[0], s.state[1]), (b, 0.0), "gray");
    }
    Ok(HomogRun { curve, report, plot })
}

fn homog_se2(args: &HomogArgs, cfg: &IntegrationConfig) -> chaincraft::Result<HomogRun> {
    let (r, c) = (args.r, args.c);
    let model = LieAlgebraModel::by_name("flat-se2")?;
    let n = model.algebra().matrix_dim();
    let traj = model.reconstruct(flat::se2_momenta(r, c), &DMatrix::identity(n, n), args.tmax.unwrap_or(1.5), cfg)?;
    let mut curve = new_curve("t", &["x", "y", "theta"], &["closed_form_dist"]);
    curve.status = traj.curve.status;
    for i in 0..traj.len() {
        let p = traj.momentum(i);
        let (z, theta) = flat::se2_coordinates(&traj.element(i));
        let dist = match flat::flat_chain_se2(-c / r, p[2].atan2(p[1])) {
            Ok((ze, te)) => (z.conj() - ze).norm().max((theta + te).abs()),
            Err(_) => f64::NAN,
        };
        curve.points.push(SamplePoint { t: traj.time(i), state: vec![z.re, z.im, theta], diag: vec![dist] });
    }
    let mut report = BTreeMap::new();
    report.insert("max_closed_form_dist".into(), nan_max(curve.diag("closed_form_dist").unwrap_or_default()));
    let mut plot = SvgPlot::new("flat chain, rigid motions");
    plot.polyline(curve.points.iter().map(|s| (s.state[0], s.state[1])).collect(), "red");
    Ok(HomogRun { curve, report, plot })
}

fn homog_circles(args: &HomogArgs) -> chaincraft::Result<HomogRun> {
    let c = args.c;
    let theta0 = args.theta0.unwrap_or(if c == 0.0 { FRAC_PI_2 } else { 0.0 });
    let cfg = circles::CirclesConfig {
        integration: IntegrationConfig::dp54(args.tol, args.tol),
        ..circles::CirclesConfig::default()
    };
    let t1 = args.tmax.unwrap_or(10.0);
    let mut curve = circles::circles_chain(c, theta0, t1, &cfg)?;
    let mut report = BTreeMap::new();
    report.insert("theta_max".into(), circles::theta_max(c)?);
    report.insert("amplitude".into(), nan_max(curve.column(0)));
    report.insert("max_energy_residual".into(), nan_max(curve.diag("energy").unwrap_or_default()));
    if args.compare && t1 > 0.0 {
        let times: Vec<f64> = curve.times().into_iter().filter(|&t| t > 0.0).collect();
        let reference = circles::newton_form(c, theta0, &times, &cfg.integration)?;
        let mut it = std::iter::once(theta0).chain(reference);
        curve.push_diag("newton_dist", |s| (s.state[0] - it.next().unwrap_or(f64::NAN)).abs());
        report.insert("max_newton_dist".into(), nan_max(curve.diag("newton_dist").unwrap_or_default()));
    }
    let mut plot = SvgPlot::new(&format!("circle chain, c = {c}"));
    plot.polyline(curve.points.iter().map(|s| (s.state[2], s.state[3])).collect(), "red");
    let step = (curve.len() / 40).max(1);
    for s in curve.points.iter().step_by(step) {
        let z = Complex64::new(s.state[2], s.state[3]);
        let tip = z + Complex64::from_polar(0.15, s.state[0]);
        plot.segment((z.re, z.im), (tip.re, tip.im), "blue");
    }
    Ok(HomogRun { curve, report, plot })
}

fn homog_hooke(args: &HomogArgs, cfg: &IntegrationConfig) -> chaincraft::Result<HomogRun> {
    let (b, c) = (args.b, args.c);
    let t1 = args.tmax.unwrap_or(2.0);
    let curve = hooke::hooke_euler_chain(b, c, args.phi0, t1, cfg)?;
    let mut report = BTreeMap::new();
    report.insert("max_det_drift".into(), nan_max(curve.diag("det_drift").unwrap_or_default()));
    report.insert("max_H".into(), nan_max(curve.diag("H").unwrap_or_default()));
    if args.compare {
        report.insert("max_closed_form_dist".into(), nan_max(curve.diag("closed_form_dist").unwrap_or_default()));
        report.insert("reconstruction_error".into(), hooke::reconstruction_error(b, c, t1, cfg)?);
    }
    let mut plot = SvgPlot::new(&format!("Hooke chain, c = {c}"));
    plot.polyline(curve.points.iter().map(|s| (s.state[1], s.state[2])).collect(), "red");
    Ok(HomogRun { curve, report, plot })
}

fn homog_horocycle(args: &HomogArgs) -> chaincraft::Result<HomogRun> {
    let c = args.c;
    if args.samples < 2 {
        return Err(Error::Config("--samples must be at least 2".into()));
    }
    let mut curve = new_curve("phi", &["x", "y"], &["resid", "incidence"]);
    let n = args.samples as f64;
    for k in 0..args.samples {
        let phi = -FRAC_PI_2 + std::f64::consts::PI * (k as f64 + 0.5) / n;
        let Ok((x, y)) = horocycle::horocycle_projection(c, phi) else {
            continue;
        };
        let incidence = match hooke::gchain(c, 0.5 * phi) {
            Ok(g) => horocycle::ellipse_incidence(x, y, g[(0, 0)], g[(1, 0)]),
            Err(_) => f64::NAN,
        };
        curve.points.push(SamplePoint {
            t: phi,
            state: vec![x, y],
            diag: vec![horocycle::normalized_residual(c, x, y), incidence],
        });
    }
    let mut report = BTreeMap::new();
    report.insert("max_resid".into(), nan_max(curve.diag("resid").unwrap_or_default()));
    report.insert("max_incidence".into(), nan_max(curve.diag("incidence").unwrap_or_default()));
    report.insert("samples".into(), curve.len() as f64);
    let mut plot = SvgPlot::new(&format!("horocycle chain, c = {c}"));
    // Split at poles so the polyline does not jump through infinity.
    let mut run = Vec::new();
    for s in &curve.points {
        if s.state[0].hypot(s.state[1]) > 50.0 {
            if run.len() > 1 {
                plot.polyline(std::mem::take(&mut run), "red");
            }
            run.clear();
        } else {
            run.push((s.state[0], s.state[1]));
        }
    }
    if run.len() > 1 {
        plot.polyline(run, "red");
    }
    Ok(HomogRun { curve, report, plot })
}

fn cmd_homog(args: &HomogArgs) -> CmdResult {
    let cfg = IntegrationConfig::dp54(args.tol, args.tol);
    let run = match args.model.as_str() {
        "flat-heisenberg" => homog_heisenberg(args, &cfg)?,
        "flat-se2" => homog_se2(args, &cfg)?,
        "circles-se2" => homog_circles(args)?,
        "hooke-sl2" => homog_hooke(args, &cfg)?,
        "horocycle" => homog_horocycle(args)?,
        other => {
            return Err(Error::Config(format!(
                "unknown model `{other}`; expected one of {}",
                chaincraft::lie::MODEL_NAMES.join(", ")
            ))
            .into())
        }
    };
    print_report(run.curve.status, &run.report);
    if let Some(path) = &args.svg {
        write_text(&Some(path.clone()), &run.plot.render())?;
    }
    let config = json!({
        "model": args.model, "a": args.a, "b": args.b, "c": args.c, "r": args.r,
        "theta0": args.theta0, "phi0": args.phi0, "tmax": args.tmax, "samples": args.samples,
        "compare": args.compare, "tol": args.tol,
    });
    let plot = run.plot;
    emit(&args.output, "homog", config, &run.curve, &run.report, || plot)?;
    Ok(status_code(run.curve.status))
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let options = VerifyOptions { tol_scale: args.tol_scale, only: args.only.clone(), threads: args.threads };
    let reports = verify::run(&options)?;
    let mut out = io::stdout().lock();
    for r in &reports {
        let _ = write!(out, "{r}");
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    let _ = writeln!(out, "{passed}/{} checks passed", reports.len());
    Ok(if passed == reports.len() { EXIT_OK } else { EXIT_VERIFY_FAILED })
}
