//! The acceptance suite behind `chaincraft verify`.
//!
//! Every check is deterministic: random inputs come from fixed seeds.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::chain::{defect_of, integrate_chain, ChainConfig, ChainState};
use crate::error::{Error, Result};
use crate::expr;
use crate::fefferman::{
    integrate_null_geodesic, metric_at, null_lift, signature, ChartPoint, GeodesicConfig, GeodesicOracle,
};
use crate::geometry::{SecondOrderOde, BUILTIN_NAMES};
use crate::integrate::{self, IntegrationConfig, IvpProblem, Status};
use crate::lie::{circles, displayed, flat, hooke, horocycle, LieAlgebraModel, MODEL_NAMES};

/// Limit on a measured value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// Passes when `value < limit · tol_scale`.
    Below(f64),
    /// Passes when `value > limit / tol_scale`.
    Above(f64),
    /// Passes when `lo ≤ value ≤ hi`; not scaled.
    Within(f64, f64),
    /// Passes when `value == expected`; not scaled.
    Exact(f64),
}

impl Bound {
    pub fn accepts(self, value: f64, tol_scale: f64) -> bool {
        match self {
            Bound::Below(limit) => value < limit * tol_scale,
            Bound::Above(limit) => value > limit / tol_scale,
            Bound::Within(lo, hi) => (lo..=hi).contains(&value),
            Bound::Exact(expected) => value == expected,
        }
    }

    fn describe(self, tol_scale: f64) -> String {
        match self {
            Bound::Below(limit) => format!("< {:e}", limit * tol_scale),
            Bound::Above(limit) => format!("> {:e}", limit / tol_scale),
            Bound::Within(lo, hi) => format!("in [{lo}, {hi}]"),
            Bound::Exact(expected) => format!("== {expected}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub label: String,
    pub value: f64,
    pub bound: Bound,
}

impl Measure {
    pub fn new(label: impl Into<String>, value: f64, bound: Bound) -> Self {
        Measure { label: label.into(), value, bound }
    }
}

/// Outcome of one acceptance check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub id: u8,
    pub key: &'static str,
    pub title: &'static str,
    pub measures: Vec<Measure>,
    /// Set when the check could not run to completion.
    pub error: Option<String>,
    pub seconds: f64,
    pub tol_scale: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && !self.measures.is_empty()
            && self.measures.iter().all(|m| m.bound.accepts(m.value, self.tol_scale))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Measure> {
        self.measures.iter().filter(|m| !m.bound.accepts(m.value, self.tol_scale))
    }

    /// `PASS  3 signature  Metric signature  (200 ms)`
    pub fn summary_line(&self) -> String {
        format!(
            "{}  {:>2} {:<14} {}  ({:.0} ms)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.key,
            self.title,
            self.seconds * 1e3
        )
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary_line())?;
        if let Some(err) = &self.error {
            writeln!(f, "        error: {err}")?;
        }
        for m in &self.measures {
            let mark = if m.bound.accepts(m.value, self.tol_scale) { ' ' } else { '!' };
            writeln!(f, "      {mark} {}: {} {}", m.label, format_value(m.value), m.bound.describe(self.tol_scale))?;
        }
        Ok(())
    }
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e6 {
        format!("{v}")
    } else {
        format!("{v:.3e}")
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Multiplies every `Below` limit and divides every `Above` limit.
    pub tol_scale: f64,
    /// Restrict to these keys; empty runs everything.
    pub only: Vec<String>,
    /// Worker threads; `None` reads `CHAINCRAFT_THREADS`, else all cores.
    pub threads: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { tol_scale: 1.0, only: Vec::new(), threads: None }
    }
}

type CheckFn = fn() -> Result<Vec<Measure>>;

struct Check {
    id: u8,
    key: &'static str,
    title: &'static str,
    run: CheckFn,
}

const CHECKS: [Check; 10] = [
    Check { id: 1, key: "forward", title: "Chains of projective geometries project to paths", run: forward },
    Check { id: 2, key: "converse", title: "Chains of non-projective geometries do not", run: converse },
    Check { id: 3, key: "geodesic", title: "Null geodesics project to chains", run: geodesic },
    Check { id: 4, key: "signature", title: "Fefferman metric has signature (2,2)", run: metric_signature },
    Check { id: 5, key: "euler", title: "Euler equations and conserved quantities", run: euler },
    Check { id: 6, key: "flat", title: "Flat model closed forms", run: flat_model },
    Check { id: 7, key: "circles", title: "Chains of the circle geometry", run: circle_chains },
    Check { id: 8, key: "hooke", title: "Chains of the Hooke ellipse geometry", run: hooke_chains },
    Check { id: 9, key: "horocycle", title: "Horocycle chains lie on a bicircular quartic", run: horocycle_chains },
    Check { id: 10, key: "infrastructure", title: "Integrator order, parser robustness, jets", run: infrastructure },
];

/// Keys accepted by [`VerifyOptions::only`].
pub fn check_keys() -> Vec<&'static str> {
    CHECKS.iter().map(|c| c.key).collect()
}

/// Upper bound on the whole run, in seconds.
pub const TOTAL_SECONDS: f64 = 60.0;

/// Runs the selected checks, in parallel, and returns reports in id order.
pub fn run(options: &VerifyOptions) -> Result<Vec<CheckReport>> {
    if !(options.tol_scale > 0.0 && options.tol_scale.is_finite()) {
        return Err(Error::Config(format!("tol_scale must be positive, got {}", options.tol_scale)));
    }
    let keys = check_keys();
    if let Some(bad) = options.only.iter().find(|k| !keys.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown check {bad:?}; expected one of {}", keys.join(", "))));
    }
    let threads = match options.threads {
        Some(n) => n,
        None => std::env::var("CHAINCRAFT_THREADS").ok().and_then(|v| v.parse().ok()).unwrap_or(0),
    };
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(|e| Error::Config(e.to_string()))?;

    let start = Instant::now();
    let selected: Vec<&Check> =
        CHECKS.iter().filter(|c| options.only.is_empty() || options.only.iter().any(|k| k == c.key)).collect();
    let mut reports: Vec<CheckReport> =
        pool.install(|| selected.par_iter().map(|c| run_one(c, options.tol_scale)).collect());
    let total = start.elapsed().as_secs_f64();
    if let Some(infra) = reports.iter_mut().find(|r| r.key == "infrastructure") {
        infra.measures.push(Measure::new("verify wall time [s]", total, Bound::Within(0.0, TOTAL_SECONDS)));
    }
    Ok(reports)
}

fn run_one(check: &Check, tol_scale: f64) -> CheckReport {
    let start = Instant::now();
    let outcome = panic::catch_unwind(check.run);
    let (measures, error) = match outcome {
        Ok(Ok(m)) => (m, None),
        Ok(Err(e)) => (Vec::new(), Some(e.to_string())),
        Err(_) => (Vec::new(), Some("check panicked".to_string())),
    };
    CheckReport {
        id: check.id,
        key: check.key,
        title: check.title,
        measures,
        error,
        seconds: start.elapsed().as_secs_f64(),
        tol_scale,
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn geometry(source: &str) -> Result<SecondOrderOde> {
    SecondOrderOde::from_source(source, &BTreeMap::new())
}

fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let m = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

fn nan_max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0_f64, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// Random chain start: `x, y, y′ − p` offsets and `p′` in `[-a, a]`, `|Δ| ∈ [d_lo, d_hi)`.
fn random_chain_state(rng: &mut ChaCha8Rng, amp: f64, p_amp: f64, d_lo: f64, d_hi: f64) -> ChainState {
    let x = rng.gen_range(-amp..amp);
    let y = rng.gen_range(-amp..amp);
    let p = rng.gen_range(-p_amp..p_amp);
    let delta = signed(rng, d_lo, d_hi);
    let pp = rng.gen_range(-amp..amp);
    ChainState::new(x, y, p, p + delta, pp)
}

pub const FORWARD_GEOMETRIES: [&str; 4] = ["0", "p^3", "(x*p-y)^3", "p^3+x*p^2-y"];
pub const CONVERSE_GEOMETRIES: [&str; 2] = ["p^4", "sin(p)"];
pub const GEODESIC_GEOMETRIES: [&str; 3] = ["0", "(x*p-y)^3", "p^3+x*p^2-y"];

/// Chains are followed over one unit of `x` and stopped early once a slope
/// exceeds this bound, where the graph chart stops being useful.
const SLOPE_BOUND: f64 = 100.0;

/// Projectivity defects of 25 random chains per geometry.
fn chain_defects(source: &str, seed: u64, p_amp: f64, d_lo: f64, d_hi: f64) -> Result<Vec<f64>> {
    let cfg = ChainConfig::default().with_slope_bound(SLOPE_BOUND);
    let geom = geometry(source)?;
    let mut rng = rng(seed);
    let mut defects = Vec::new();
    for _ in 0..25 {
        let s0 = random_chain_state(&mut rng, 0.5, p_amp, d_lo, d_hi);
        let curve = integrate_chain(&geom, &s0, s0.x + 1.0, &cfg)?;
        if curve.status != Status::ReachedEnd && curve.status != Status::Event {
            return Err(Error::NonFiniteState { t: curve.last().map_or(s0.x, |s| s.t) });
        }
        defects.push(defect_of(&curve)?);
    }
    Ok(defects)
}

fn forward() -> Result<Vec<Measure>> {
    let mut measures = Vec::new();
    for (k, src) in FORWARD_GEOMETRIES.iter().enumerate() {
        let worst = nan_max(chain_defects(src, 0x100 + k as u64, 0.5, 0.5, 1.0)?);
        measures.push(Measure::new(format!("max defect, f = {src}"), worst, Bound::Below(1e-8)));
    }
    Ok(measures)
}

fn converse() -> Result<Vec<Measure>> {
    let mut measures = Vec::new();
    for (k, src) in CONVERSE_GEOMETRIES.iter().enumerate() {
        let least = chain_defects(src, 0x200 + k as u64, 1.0, 0.5, 1.5)?.into_iter().fold(f64::INFINITY, |m, d| {
            if d.is_nan() {
                f64::NAN
            } else {
                m.min(d)
            }
        });
        measures.push(Measure::new(format!("min defect, f = {src}"), least, Bound::Above(1e-3)));
    }
    Ok(measures)
}

fn geodesic() -> Result<Vec<Measure>> {
    let chain_cfg = ChainConfig::default().with_slope_bound(10.0);
    let geo_cfg = GeodesicConfig { oracle: GeodesicOracle::Generic, x_stop: Some(1.0), ..GeodesicConfig::default() };
    let mut measures = Vec::new();
    for (k, src) in GEODESIC_GEOMETRIES.iter().enumerate() {
        let geom = geometry(src)?;
        let mut rng = rng(0x300 + k as u64);
        let (mut dist, mut nullity, mut reached) = (0.0_f64, 0.0_f64, 0);
        let mut accepted = 0;
        let mut drawn = 0;
        while accepted < 10 {
            drawn += 1;
            if drawn > 1000 {
                return Err(Error::Degenerate(format!("too few chains of {src} span x ∈ [0, 1]")));
            }
            let s = random_chain_state(&mut rng, 0.5, 0.5, 0.25, 1.0);
            let s = ChainState::new(0.0, s.y, s.p, s.yp, s.pp);
            // Only starts whose chain is a graph over the whole interval.
            if integrate_chain(&geom, &s, 1.0, &chain_cfg)?.status != Status::ReachedEnd {
                continue;
            }
            accepted += 1;
            let start = null_lift(&geom, 0.0, s.y, s.p, [1.0, s.yp, s.pp])?;
            let curve = integrate_null_geodesic(&geom, &start, 100.0, &geo_cfg)?;
            let last_x = curve.last().map_or(0.0, |s| s.state[0]);
            if curve.status == Status::Event && (last_x - 1.0).abs() < 1e-9 {
                reached += 1;
            }
            dist = nan_max([dist, nan_max(curve.diag("chain_dist").unwrap_or_default())]);
            nullity = nan_max([nullity, nan_max(curve.diag("nullity").unwrap_or_default().into_iter().map(f64::abs))]);
        }
        measures.push(Measure::new(format!("sup distance to chain, f = {src}"), dist, Bound::Below(1e-6)));
        measures.push(Measure::new(format!("nullity drift, f = {src}"), nullity, Bound::Below(1e-8)));
        measures.push(Measure::new(format!("geodesics reaching x = 1, f = {src}"), reached as f64, Bound::Exact(10.0)));
    }
    Ok(measures)
}

fn metric_signature() -> Result<Vec<Measure>> {
    let mut rng = rng(0x400);
    let mut geoms = Vec::new();
    for name in BUILTIN_NAMES {
        let params = if name == "poly-p" {
            (0..4).map(|k| (format!("a{k}"), rng.gen_range(-1.0..1.0))).collect()
        } else {
            BTreeMap::new()
        };
        geoms.push(SecondOrderOde::builtin(name, &params)?);
    }
    let mut good = 0;
    let mut worst_det = 0.0_f64;
    for i in 0..200 {
        let geom = &geoms[i % geoms.len()];
        let pt = ChartPoint::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let g = metric_at(geom, &pt)?;
        if signature(&g) == (2, 2) {
            good += 1;
        }
        worst_det = worst_det.max((g.determinant() - 1.0 / 36.0).abs());
    }
    Ok(vec![
        Measure::new("points with signature (2,2) of 200", good as f64, Bound::Exact(200.0)),
        Measure::new("max |det g − 1/36|", worst_det, Bound::Below(1e-12)),
    ])
}

fn euler() -> Result<Vec<Measure>> {
    let mut measures = Vec::new();
    let cfg = IntegrationConfig::dp54(1e-13, 1e-13);
    for (k, name) in MODEL_NAMES.iter().enumerate() {
        let model = LieAlgebraModel::by_name(name)?;
        let shown = displayed::for_model(name).ok_or_else(|| Error::UnknownGeometry(name.to_string()))?;
        let mut rng = rng(0x500 + k as u64);
        let mut rhs_err = 0.0_f64;
        let mut drift = BTreeMap::new();
        for _ in 0..100 {
            let p: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let (a, b) = (model.euler_rhs(&p), shown(&p));
            rhs_err = a.iter().zip(&b).fold(rhs_err, |m, (u, v)| m.max((u - v).abs()));
            let curve = model.integrate_euler(p, 10.0, &cfg)?;
            if curve.status != Status::ReachedEnd {
                return Err(Error::NonFiniteState { t: curve.last().map_or(0.0, |s| s.t) });
            }
            for q in model.conserved_names() {
                let d = curve.max_abs_diag(&format!("{q}_drift")).unwrap_or(f64::NAN);
                let e = drift.entry(q).or_insert(0.0_f64);
                *e = nan_max([*e, d]);
            }
        }
        measures.push(Measure::new(format!("{name}: max |ad* − displayed|"), rhs_err, Bound::Below(1e-13)));
        for (q, d) in drift {
            measures.push(Measure::new(format!("{name}: drift of {q} over [0, 10]"), d, Bound::Below(1e-9)));
        }
    }
    Ok(measures)
}

fn flat_model() -> Result<Vec<Measure>> {
    let cfg = IntegrationConfig::dp54(1e-12, 1e-12);
    let heis = LieAlgebraModel::by_name("flat-heisenberg")?;
    let (mut dist, mut concur) = (0.0_f64, 0.0_f64);
    for (a, b, c) in [(1.0, 1.0, 1.0), (0.5, -1.2, 0.7), (-0.8, 0.4, -0.6), (2.0, 0.3, 1.3)] {
        let traj = heis.reconstruct(flat::heisenberg_momenta(a, b, c), &DMatrix::identity(4, 4), 1.0, &cfg)?;
        for i in 0..traj.len() {
            let (x, y, z) = flat::heisenberg_coordinates(&traj.element(i));
            let (xe, ye, ze) = flat::heisenberg_closed_form(a, b, c, traj.time(i));
            dist = nan_max([dist, (x - xe).abs(), (y - ye).abs(), (z - ze).abs()]);
            concur = nan_max([concur, flat::concurrency_residual(b, x, y, z).abs()]);
        }
    }
    let se2 = LieAlgebraModel::by_name("flat-se2")?;
    let mut se2_dist = 0.0_f64;
    let mut defined = 0;
    for (r, c) in [(0.8, 1.5), (1.0, -0.5), (0.4, 0.2), (1.5, 2.0)] {
        let traj = se2.reconstruct(flat::se2_momenta(r, c), &DMatrix::identity(4, 4), 1.5, &cfg)?;
        for i in 0..traj.len() {
            let p = traj.momentum(i);
            let (z, theta) = flat::se2_coordinates(&traj.element(i));
            // Integrated chains are the closed form reflected in the real axis.
            if let Ok((ze, te)) = flat::flat_chain_se2(-c / r, p[2].atan2(p[1])) {
                defined += 1;
                se2_dist = nan_max([se2_dist, (z.conj() - ze).norm(), (-theta - te).abs()]);
            }
        }
    }
    if defined == 0 {
        return Err(Error::Degenerate("no sample where tan φ is defined".into()));
    }
    Ok(vec![
        Measure::new("Heisenberg: max distance to closed form", dist, Bound::Below(1e-8)),
        Measure::new("Heisenberg: max concurrency residual", concur, Bound::Below(1e-8)),
        Measure::new("rigid motions: max distance to z = ic tan φ", se2_dist, Bound::Below(1e-10)),
    ])
}

/// Algebraic least-squares circle fit; returns `(center, radius, max |‖z − center‖ − radius|)`.
pub fn fit_circle(points: &[Complex64]) -> Result<(Complex64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::Degenerate("a circle fit needs three points".into()));
    }
    // x² + y² = A x + B y + C.
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for z in points {
        let row = Vector3::new(z.re, z.im, 1.0);
        ata += row * row.transpose();
        atb += row * z.norm_sqr();
    }
    let sol = ata.lu().solve(&atb).ok_or_else(|| Error::Degenerate("collinear points".into()))?;
    let center = Complex64::new(0.5 * sol[0], 0.5 * sol[1]);
    let radius = (sol[2] + center.norm_sqr()).sqrt();
    let residual = nan_max(points.iter().map(|z| ((z - center).norm() - radius).abs()));
    Ok((center, radius, residual))
}

fn circle_chains() -> Result<Vec<Measure>> {
    let cfg = circles::CirclesConfig::default();
    let mut measures = vec![
        Measure::new("θmax(0) − π", circles::theta_max(0.0)? - PI, Bound::Exact(0.0)),
        Measure::new("θmax(4)", circles::theta_max(4.0)?, Bound::Exact(0.0)),
    ];
    for c in [0.5, 1.0, 2.0, 3.0] {
        let curve = circles::circles_chain(c, 0.0, 20.0, &cfg)?;
        let amp = nan_max(curve.column(0).into_iter().map(f64::abs));
        measures.push(Measure::new(
            format!("c = {c}: |amplitude − θmax|"),
            (amp - circles::theta_max(c)?).abs(),
            Bound::Below(1e-6),
        ));
    }
    let (mut residual, mut radius_err) = (0.0_f64, 0.0_f64);
    for theta0 in [FRAC_PI_2, 1.0, 2.5] {
        let mut pts = Vec::new();
        for t1 in [8.0, -8.0] {
            let curve = circles::circles_chain(0.0, theta0, t1, &cfg)?;
            pts.extend(curve.points.iter().map(|s| Complex64::new(s.state[2], s.state[3])));
        }
        let (_, r, res) = fit_circle(&pts)?;
        residual = nan_max([residual, res]);
        radius_err = nan_max([radius_err, (r - 1.0).abs()]);
    }
    measures.push(Measure::new("c = 0: circle fit residual", residual, Bound::Below(1e-8)));
    measures.push(Measure::new("c = 0: |fitted radius − 1|", radius_err, Bound::Below(1e-8)));
    Ok(measures)
}

/// Exact `τ`-derivatives of the closed-form chain `(r, h)`.
fn hooke_closed_form_derivative(c: f64, tau: f64) -> ([f64; 2], [f64; 2]) {
    let sec = 1.0 / (2.0 * tau).cos();
    let a = c * sec;
    let a_prime = 2.0 * c * sec * (2.0 * tau).tan();
    let r = Complex64::from_polar(1.0, tau);
    let dr = Complex64::i() * r;
    // h = r(−a + i)  ⇒  h′ = r′(−a + i) − a′ r.
    let dh = dr * Complex64::new(-a, 1.0) - a_prime * r;
    ([dr.re, dr.im], [dh.re, dh.im])
}

fn hooke_chains() -> Result<Vec<Measure>> {
    let (mut eq_res, mut accel_res, mut det_res) = (0.0_f64, 0.0_f64, 0.0_f64);
    let cs = [0.5, 1.0, 2.0, 3.0];
    for c in cs {
        for k in 0..=40 {
            let tau = -0.7 + 1.4 * k as f64 / 40.0;
            let (r, h) = hooke::hooke_chain(c, tau)?;
            let (dr, dh) = hooke::hooke_chain_rhs(c, tau, r, h)?;
            let (er, eh) = hooke_closed_form_derivative(c, tau);
            let scale = 1.0 + h[0].abs().max(h[1].abs());
            for i in 0..2 {
                eq_res = nan_max([eq_res, (dr[i] - er[i]).abs() / scale, (dh[i] - eh[i]).abs() / scale]);
            }
            // r″ = (a′ + a² − b) r along the chain equations.
            let sec = 1.0 / (2.0 * tau).cos();
            let a = c * sec;
            let a_prime = 2.0 * c * sec * (2.0 * tau).tan();
            let b = 1.0 + c * (c + 2.0 * (2.0 * tau).sin()) * sec * sec;
            let coeff = a_prime + a * a - b;
            for ri in r {
                accel_res = nan_max([accel_res, ((coeff + 1.0) * ri).abs() / (1.0 + a * a)]);
            }
            det_res = nan_max([det_res, (hooke::frame_det(r, h) - 1.0).abs()]);
        }
    }
    let cfg = IntegrationConfig::dp54(1e-12, 1e-12);
    let (mut euler_dist, mut recon) = (0.0_f64, 0.0_f64);
    for c in cs {
        let curve = hooke::hooke_euler_chain(1.0, c, 0.0, 2.0, &cfg)?;
        euler_dist = nan_max([euler_dist, nan_max(curve.diag("closed_form_dist").unwrap_or_default())]);
        recon = nan_max([recon, hooke::reconstruction_error(1.0, c, 2.0, &cfg)?]);
    }
    Ok(vec![
        Measure::new("closed form vs chain equations (relative)", eq_res, Bound::Below(1e-10)),
        Measure::new("r″ + r (relative)", accel_res, Bound::Below(1e-10)),
        Measure::new("|det[r, h] − 1|", det_res, Bound::Below(1e-12)),
        Measure::new("Euler-integrated vs closed form after alignment", euler_dist, Bound::Below(1e-7)),
        Measure::new("reconstruction vs closed form through identity", recon, Bound::Below(1e-8)),
    ])
}

fn horocycle_chains() -> Result<Vec<Measure>> {
    let mut measures = Vec::new();
    let mut mirror = 0.0_f64;
    for c in [0.5, 1.0, 2.0, 3.0] {
        let mut worst = 0.0_f64;
        let mut samples = 0;
        for k in 0..200 {
            let phi = -1.55 + 3.1 * (k as f64 + 0.5) / 200.0;
            let Ok((x, y)) = horocycle::horocycle_projection(c, phi) else {
                continue;
            };
            samples += 1;
            worst = nan_max([worst, horocycle::normalized_residual(c, x, y).abs()]);
            if let Ok((xm, ym)) = horocycle::horocycle_projection(-c, -phi) {
                mirror = nan_max([mirror, (x + xm).abs(), (y - ym).abs()]);
                mirror = nan_max([mirror, horocycle::normalized_residual(-c, -x, y).abs()]);
            }
        }
        measures.push(Measure::new(format!("c = {c}: max normalized residual"), worst, Bound::Below(1e-9)));
        measures.push(Measure::new(format!("c = {c}: samples"), samples as f64, Bound::Exact(200.0)));
    }
    measures.push(Measure::new(
        "residual at (0, 1), c = 1",
        horocycle::horocycle_quartic_residual(1.0, 0.0, 1.0),
        Bound::Exact(0.0),
    ));
    measures.push(Measure::new(
        "residual at (2, 0), c = 1",
        horocycle::horocycle_quartic_residual(1.0, 2.0, 0.0),
        Bound::Exact(0.0),
    ));
    measures.push(Measure::new("c ↔ −c mirror defect", mirror, Bound::Below(1e-9)));
    Ok(measures)
}

/// Observed convergence order of fixed-step RK4 on `y″ = −y` over `[0, 1]`.
pub fn rk4_order() -> Result<f64> {
    let rhs = |_t: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
        dv[0] = v[1];
        dv[1] = -v[0];
        Ok(())
    };
    let mut pts = Vec::new();
    for n in [10, 20, 40, 80] {
        let h = 1.0 / n as f64;
        let curve = integrate::integrate(&IvpProblem::new(rhs, 0.0, vec![0.0, 1.0], 1.0), &IntegrationConfig::rk4(h))?;
        let last = curve.last().ok_or(Error::Degenerate("empty run".into()))?;
        let err = (last.state[0] - 1f64.sin()).abs().max((last.state[1] - 1f64.cos()).abs());
        pts.push((h.ln(), err.ln()));
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

const FUZZ_TOKENS: [&str; 22] = [
    "x", "y", "p", "pi", "k", "sin", "cos", "tan", "sec", "exp", "log", "sqrt", "(", ")", "+", "-", "*", "/", "^", "2",
    "1.5e3", " ",
];

/// A 4 KiB input: random printable ASCII, or a soup of grammar tokens.
pub fn fuzz_input(rng: &mut impl Rng, tokens: bool) -> String {
    let mut s = String::with_capacity(4096);
    while s.len() < 4096 {
        if tokens {
            s.push_str(FUZZ_TOKENS[rng.gen_range(0..FUZZ_TOKENS.len())]);
        } else {
            s.push(rng.gen_range(0x20u8..0x7f) as char);
        }
    }
    s.truncate(4096);
    s
}

/// Number of inputs for which parsing or evaluating panicked.
pub fn fuzz_parser(seed: u64, count: usize) -> usize {
    let mut rng = rng(seed);
    let mut inputs: Vec<String> = (0..count).map(|i| fuzz_input(&mut rng, i % 2 == 0)).collect();
    inputs.push("(".repeat(4096));
    inputs.push("-".repeat(4095) + "x");
    inputs.push("p^".repeat(2048));
    let params: BTreeMap<String, f64> = [("k".to_string(), 0.5)].into();
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let panics = inputs
        .iter()
        .filter(|src| {
            panic::catch_unwind(AssertUnwindSafe(|| {
                if let Ok(e) = expr::parse(src) {
                    let _ = e.eval::<f64>(0.3, -0.2, 0.7, &params);
                    let _ = e.eval::<crate::jet::Jet>(0.3, -0.2, 0.7, &params);
                    let _ = e.to_string();
                }
            }))
            .is_err()
        })
        .count();
    panic::set_hook(hook);
    panics
}

/// A random smooth expression in `x, y, p`, defined on all of `ℝ³`.
pub fn random_expression(rng: &mut impl Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => "x".into(),
            1 => "y".into(),
            2 => "p".into(),
            _ => format!("{:.3}", rng.gen_range(-2.0..2.0)),
        };
    }
    let mut sub = || random_expression(rng, depth - 1);
    let (a, b) = (sub(), sub());
    match rng.gen_range(0..10) {
        0 => format!("({a} + {b})"),
        1 => format!("({a} - {b})"),
        2 | 3 => format!("({a} * {b})"),
        4 => format!("sin({a})"),
        5 => format!("cos({a})"),
        6 => format!("exp(sin({a}))"),
        7 => format!("({a})^{}", rng.gen_range(2..4)),
        8 => format!("({a}) / (2 + cos({b}))"),
        _ => format!("log(2 + sin({a})) + sqrt(1 + ({b})^2)"),
    }
}

/// Worst relative disagreement between jet partials and central differences
/// over `count` random expressions, `|jet − fd| / max(1, |jet|)`.
pub fn jet_fd_disagreement(seed: u64, count: usize) -> Result<f64> {
    const H: f64 = 1e-3;
    let mut rng = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..count {
        let geom = geometry(&random_expression(&mut rng, 4))?;
        let (x, y, p) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let at = |dx: f64, dy: f64, dp: f64| geom.partials(x + dx, y + dy, p + dp);
        // Fourth-order central difference of `g` along a unit direction.
        let diff = |dir: [f64; 3], g: &dyn Fn(&crate::jet::Partials) -> f64| -> Result<f64> {
            let mut acc = 0.0;
            for (k, w) in [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)] {
                acc += w * g(&at(k * H * dir[0], k * H * dir[1], k * H * dir[2])?);
            }
            Ok(acc / (12.0 * H))
        };
        let d = at(0.0, 0.0, 0.0)?;
        const X: [f64; 3] = [1.0, 0.0, 0.0];
        const Y: [f64; 3] = [0.0, 1.0, 0.0];
        const P: [f64; 3] = [0.0, 0.0, 1.0];
        let pairs = [
            (d.f_x, diff(X, &|q| q.f)?),
            (d.f_y, diff(Y, &|q| q.f)?),
            (d.f_p, diff(P, &|q| q.f)?),
            (d.f_pp, diff(P, &|q| q.f_p)?),
            (d.f_ppp, diff(P, &|q| q.f_pp)?),
            (d.f_pppp, diff(P, &|q| q.f_ppp)?),
            (d.f_xp, diff(X, &|q| q.f_p)?),
            (d.f_xpp, diff(X, &|q| q.f_pp)?),
            (d.f_yp, diff(Y, &|q| q.f_p)?),
            (d.f_ypp, diff(Y, &|q| q.f_pp)?),
        ];
        for (jet, fd) in pairs {
            worst = nan_max([worst, (jet - fd).abs() / jet.abs().max(1.0)]);
        }
    }
    Ok(worst)
}

fn infrastructure() -> Result<Vec<Measure>> {
    Ok(vec![
        Measure::new("RK4 observed order", rk4_order()?, Bound::Within(3.7, 4.3)),
        Measure::new("parser panics on 4 KiB inputs", fuzz_parser(0xA00, 400) as f64, Bound::Exact(0.0)),
        Measure::new("jet vs finite differences (relative)", jet_fd_disagreement(0xA01, 200)?, Bound::Below(1e-6)),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_scale_in_the_strict_direction() {
        assert!(Bound::Below(1e-8).accepts(5e-9, 1.0));
        assert!(!Bound::Below(1e-8).accepts(5e-9, 0.1));
        assert!(Bound::Above(1e-3).accepts(5e-3, 1.0));
        assert!(!Bound::Above(1e-3).accepts(5e-3, 0.1));
        assert!(Bound::Within(3.7, 4.3).accepts(4.0, 1e-6));
        assert!(!Bound::Below(1.0).accepts(f64::NAN, 1.0));
        assert!(!Bound::Above(1.0).accepts(f64::NAN, 1.0));
    }

    #[test]
    fn circle_fit_recovers_circle() {
        let c = Complex64::new(0.3, -1.2);
        let pts: Vec<_> = (0..7).map(|k| c + Complex64::from_polar(2.0, 0.4 * k as f64)).collect();
        let (center, r, res) = fit_circle(&pts).unwrap();
        assert!((center - c).norm() < 1e-12 && (r - 2.0).abs() < 1e-12 && res < 1e-12);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let order = rk4_order().unwrap();
        assert!((3.7..=4.3).contains(&order), "{order}");
    }

    #[test]
    fn random_expressions_parse() {
        let mut rng = rng(1);
        for _ in 0..50 {
            let src = random_expression(&mut rng, 4);
            assert!(expr::parse(&src).is_ok(), "{src}");
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let opts = VerifyOptions { only: vec!["nope".into()], ..VerifyOptions::default() };
        assert!(matches!(run(&opts), Err(Error::Config(_))));
    }
}
