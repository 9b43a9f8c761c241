//! The Fefferman metric of a path geometry on `J¹(ℝ, ℝ) × ℝ*` and its null
//! geodesics, in coordinates `(x, y, p, τ)` with `τ = log|s|`.
//!
//! With `a·b = ½(a⊗b + b⊗a)` the metric is
//!
//! ```text
//! g = −dx·(dp − f dx) + (1/6)(dy − p dx)·[4 f_p dx + f_pp (dy − p dx) − 4 dτ]
//! ```
//!
//! Non-vertical null geodesics project to chains. Two right-hand sides are
//! provided: a closed form with `τ̇` eliminated by nullity, and a generic one
//! built from finite-difference Christoffel symbols, kept as an oracle.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use crate::chain::{self, ChainConfig, ChainState, DEFAULT_DELTA_MIN};
use crate::error::{Error, Result};
use crate::geometry::SecondOrderOde;
use crate::integrate::{self, CurveSample, Direction, Event, IntegrationConfig, IvpProblem, SamplePoint};
use crate::jet::Partials;

/// Finite-difference step for the Christoffel oracle.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub tau: f64,
}

impl ChartPoint {
    pub fn new(x: f64, y: f64, p: f64, tau: f64) -> Self {
        ChartPoint { x, y, p, tau }
    }

    fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.p, self.tau]
    }

    fn from_slice(v: &[f64]) -> Self {
        ChartPoint::new(v[0], v[1], v[2], v[3])
    }
}

/// A point of the bundle together with a velocity `(ẋ, ẏ, ṗ, τ̇)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub pos: ChartPoint,
    pub vel: [f64; 4],
}

impl GeodesicState {
    pub fn new(pos: ChartPoint, vel: [f64; 4]) -> Self {
        GeodesicState { pos, vel }
    }

    /// `ẏ − p ẋ`, the contact-form value of the projected velocity.
    pub fn transversality(&self) -> f64 {
        self.vel[1] - self.pos.p * self.vel[0]
    }

    fn to_vec(self) -> Vec<f64> {
        let mut v = self.pos.as_array().to_vec();
        v.extend_from_slice(&self.vel);
        v
    }

    fn from_slice(v: &[f64]) -> Self {
        GeodesicState::new(ChartPoint::from_slice(v), [v[4], v[5], v[6], v[7]])
    }
}

/// Metric components from the partials of `f` at `(x, y, p)`.
pub fn metric_from_partials(d: &Partials, p: f64) -> Matrix4<f64> {
    let (f, fp, fpp) = (d.f, d.f_p, d.f_pp);
    let xx = f + p * (p * fpp - 4.0 * fp) / 6.0;
    let xy = -p * fpp / 6.0 + fp / 3.0;
    let xp = -0.5;
    let xt = p / 3.0;
    let yy = fpp / 6.0;
    let yt = -1.0 / 3.0;
    Matrix4::new(
        xx, xy, xp, xt, //
        xy, yy, 0.0, yt, //
        xp, 0.0, 0.0, 0.0, //
        xt, yt, 0.0, 0.0,
    )
}

/// The metric at `pt`, coordinate order `(x, y, p, τ)`.
pub fn metric_at(geom: &SecondOrderOde, pt: &ChartPoint) -> Result<Matrix4<f64>> {
    let d = geom.partials(pt.x, pt.y, pt.p)?;
    Ok(metric_from_partials(&d, pt.p))
}

/// Counts of (positive, negative) eigenvalues of a symmetric matrix.
pub fn signature(m: &Matrix4<f64>) -> (usize, usize) {
    let eig = SymmetricEigen::new(*m);
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    let pos = eig.eigenvalues.iter().filter(|&&l| l > tol).count();
    let neg = eig.eigenvalues.iter().filter(|&&l| l < -tol).count();
    (pos, neg)
}

/// `g(v, v)` at the state's position.
pub fn nullity(geom: &SecondOrderOde, state: &GeodesicState) -> Result<f64> {
    let g = metric_at(geom, &state.pos)?;
    let v = Vector4::from(state.vel);
    Ok(v.dot(&(g * v)))
}

/// The `τ̇` making `(ẋ, ẏ, ṗ, τ̇)` null.
fn null_tau_rate(d: &Partials, p: f64, xd: f64, yd: f64, pd: f64) -> f64 {
    let delta = yd - p * xd;
    0.25 * (d.f_pp * delta + 4.0 * xd * d.f_p) - 1.5 * xd * (pd - d.f * xd) / delta
}

fn check_direction(p: f64, xd: f64, yd: f64, pd: f64) -> Result<()> {
    if xd == 0.0 && yd == 0.0 && pd == 0.0 {
        return Err(Error::VerticalDirection);
    }
    let delta = yd - p * xd;
    let scale = xd.abs().max(yd.abs()).max(1.0);
    if !(delta.abs() >= DEFAULT_DELTA_MIN * scale) {
        return Err(Error::Tangency { delta });
    }
    Ok(())
}

/// The unique null lift of the direction `(ẋ, ẏ, ṗ)` at `(x, y, p)`, with `τ = 0`.
pub fn null_lift(geom: &SecondOrderOde, x: f64, y: f64, p: f64, direction: [f64; 3]) -> Result<GeodesicState> {
    let [xd, yd, pd] = direction;
    check_direction(p, xd, yd, pd)?;
    let d = geom.partials(x, y, p)?;
    let td = null_tau_rate(&d, p, xd, yd, pd);
    Ok(GeodesicState::new(ChartPoint::new(x, y, p, 0.0), [xd, yd, pd, td]))
}

/// `(ẍ, ÿ, p̈)` of a null geodesic, with `τ̇` fixed by nullity.
///
/// Only `(ẋ, ẏ, ṗ)` of the state's velocity are read.
pub fn geodesic_rhs_explicit(geom: &SecondOrderOde, state: &GeodesicState) -> Result<[f64; 3]> {
    let ChartPoint { x, y, p, .. } = state.pos;
    let [xd, yd, pd, _] = state.vel;
    check_direction(p, xd, yd, pd)?;
    let d = geom.partials(x, y, p)?;
    let td = null_tau_rate(&d, p, xd, yd, pd);
    Ok(explicit_accelerations(&d, p, [xd, yd, pd, td]))
}

fn explicit_accelerations(d: &Partials, p: f64, vel: [f64; 4]) -> [f64; 3] {
    let [xd, yd, pd, td] = vel;
    let (f, f_x, f_y, f_p, f_pp, f_ppp) = (d.f, d.f_x, d.f_y, d.f_p, d.f_pp, d.f_ppp);
    let (f_xpp, f_yp, f_ypp) = (d.f_xpp, d.f_yp, d.f_ypp);
    let w = yd - p * xd;
    let xdd = (-w * (f_ppp * w + 2.0 * xd * f_pp) - 2.0 * xd * xd * f_p - 4.0 * td * xd) / 6.0;
    let ydd = (2.0 * xd * (-p * f_pp * w - p * xd * f_p - 2.0 * p * td + 3.0 * pd) - p * f_ppp * w * w) / 6.0;
    let pdd = (-p.powi(3) * xd * xd * f_ypp + 2.0 * p * p * xd * yd * f_ypp + 4.0 * p * p * xd * xd * f_yp
        - 2.0 * f * (w * (f_ppp * w + 2.0 * xd * f_pp) + 2.0 * xd * xd * f_p + 4.0 * td * xd)
        + 2.0 * pd * f_pp * w
        - f_xpp * w * w
        - 8.0 * p * xd * yd * f_yp
        - 6.0 * p * xd * xd * f_y
        + 8.0 * pd * xd * f_p
        - p * yd * yd * f_ypp
        + 12.0 * xd * yd * f_y
        + 6.0 * xd * xd * f_x
        + 4.0 * yd * yd * f_yp
        + 4.0 * pd * td)
        / 6.0;
    [xdd, ydd, pdd]
}

/// `(ẍ, ÿ, p̈, τ̈) = −Γ(v, v)` with Christoffel symbols from fourth-order
/// central differences of the metric (step [`FD_STEP`]).
pub fn geodesic_rhs_generic(geom: &SecondOrderOde, state: &GeodesicState) -> Result<[f64; 4]> {
    let base = state.pos.as_array();
    let g = metric_at(geom, &state.pos)?;
    let singular = || Error::SingularMetric { x: base[0], y: base[1], p: base[2] };
    if !(g.determinant().abs() > 1e-300) {
        return Err(singular());
    }
    let g_inv = g.try_inverse().ok_or_else(singular)?;

    let h = FD_STEP;
    let mut dg = [Matrix4::<f64>::zeros(); 4];
    for (c, dgc) in dg.iter_mut().enumerate() {
        let shifted = |k: f64| -> Result<Matrix4<f64>> {
            let mut q = base;
            q[c] += k * h;
            metric_at(geom, &ChartPoint::from_slice(&q))
        };
        *dgc = (shifted(-2.0)? - shifted(2.0)? + (shifted(1.0)? - shifted(-1.0)?) * 8.0) / (12.0 * h);
    }

    let v = Vector4::from(state.vel);
    // w_d = (∂_b g_dc − ½ ∂_d g_bc) v^b v^c
    let mut w = Vector4::zeros();
    for dd in 0..4 {
        let mut acc = 0.0;
        for b in 0..4 {
            acc += v[b] * (dg[b].row(dd) * v)[0];
        }
        acc -= 0.5 * v.dot(&(dg[dd] * v));
        w[dd] = acc;
    }
    let a = -(g_inv * w);
    Ok([a[0], a[1], a[2], a[3]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeodesicOracle {
    /// Closed-form accelerations with `τ̇` from nullity.
    Explicit,
    /// Finite-difference Christoffel symbols.
    Generic,
}

#[derive(Debug, Clone)]
pub struct GeodesicConfig {
    pub oracle: GeodesicOracle,
    pub integration: IntegrationConfig,
    /// Stop when the projected `x` reaches this value.
    pub x_stop: Option<f64>,
    /// Compare the projection with the chain solution at matching `x`.
    pub compare_chain: bool,
    pub chain: ChainConfig,
}

impl Default for GeodesicConfig {
    fn default() -> Self {
        GeodesicConfig {
            oracle: GeodesicOracle::Generic,
            integration: IntegrationConfig::dp54(1e-10, 1e-10).with_max_steps(50_000),
            x_stop: None,
            compare_chain: true,
            chain: ChainConfig::default(),
        }
    }
}

/// Integrates a null geodesic from `start` over parameter time `[0, t1]`.
///
/// States are `(x, y, p, tau, xd, yd, pd, td)`. Diagnostics: `nullity`
/// (`g(v, v)`), `delta` (`ẏ − pẋ`) and, when enabled, `chain_dist`, the
/// larger of `|y − y_chain|` and `|p − p_chain|` at the same `x` (NaN once
/// `x` stops increasing or the chain has ended).
pub fn integrate_null_geodesic(
    geom: &SecondOrderOde,
    start: &GeodesicState,
    t1: f64,
    config: &GeodesicConfig,
) -> Result<CurveSample> {
    let [xd, yd, pd, _] = start.vel;
    check_direction(start.pos.p, xd, yd, pd)?;

    let mut cfg = config.integration.clone();
    if let Some(x_stop) = config.x_stop {
        let direction = if xd >= 0.0 { Direction::Rising } else { Direction::Falling };
        cfg = cfg.with_event(Event::new("x_stop", direction, move |_, v| v[0] - x_stop));
    }

    let mut curve = match config.oracle {
        GeodesicOracle::Generic => {
            let rhs = |_t: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
                let s = GeodesicState::from_slice(v);
                let a = geodesic_rhs_generic(geom, &s)?;
                dv[..4].copy_from_slice(&v[4..]);
                dv[4..].copy_from_slice(&a);
                Ok(())
            };
            integrate::integrate(&IvpProblem::new(rhs, 0.0, start.to_vec(), t1), &cfg)?
        }
        GeodesicOracle::Explicit => {
            let rhs = |_t: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
                let (x, y, p) = (v[0], v[1], v[2]);
                let (xd, yd, pd) = (v[4], v[5], v[6]);
                check_direction(p, xd, yd, pd)?;
                let d = geom.partials(x, y, p)?;
                let td = null_tau_rate(&d, p, xd, yd, pd);
                let a = explicit_accelerations(&d, p, [xd, yd, pd, td]);
                dv[..3].copy_from_slice(&[xd, yd, pd]);
                dv[3] = td;
                dv[4..].copy_from_slice(&a);
                Ok(())
            };
            let mut curve = integrate::integrate(&IvpProblem::new(rhs, 0.0, start.to_vec()[..7].to_vec(), t1), &cfg)?;
            for s in &mut curve.points {
                let d = geom.partials(s.state[0], s.state[1], s.state[2])?;
                let td = null_tau_rate(&d, s.state[2], s.state[4], s.state[5], s.state[6]);
                s.state.push(td);
            }
            curve
        }
    };
    curve.state_names = ["x", "y", "p", "tau", "xd", "yd", "pd", "td"].map(String::from).to_vec();

    let nullity_of = |s: &SamplePoint| nullity(geom, &GeodesicState::from_slice(&s.state)).unwrap_or(f64::NAN);
    curve.push_diag("nullity", nullity_of);
    curve.push_diag("delta", |s| GeodesicState::from_slice(&s.state).transversality());
    if config.compare_chain {
        let dist = chain_distance(geom, &curve, &config.chain)?;
        let mut it = dist.into_iter();
        curve.push_diag("chain_dist", |_| it.next().unwrap_or(f64::NAN));
    }
    Ok(curve)
}

/// Distance from each projected geodesic sample to the chain through the
/// same initial data, evaluated at equal `x`.
fn chain_distance(geom: &SecondOrderOde, curve: &CurveSample, config: &ChainConfig) -> Result<Vec<f64>> {
    let mut out = vec![f64::NAN; curve.len()];
    let Some(first) = curve.points.first() else {
        return Ok(out);
    };
    let v = &first.state;
    if v[4] <= 0.0 {
        return Err(Error::Config("chain comparison needs a start with increasing x".into()));
    }
    out[0] = 0.0;
    // Longest prefix along which x increases strictly.
    let xs: Vec<f64> = curve.points.iter().map(|s| s.state[0]).collect();
    let n = 1 + xs.windows(2).take_while(|w| w[1] > w[0]).count();
    if n < 2 {
        return Ok(out);
    }
    let s0 = ChainState::new(v[0], v[1], v[2], v[5] / v[4], v[6] / v[4]);
    let mut chain_cfg = config.clone();
    chain_cfg.integration = chain_cfg.integration.with_stop_times(xs[1..n].to_vec());
    let chain_curve = chain::integrate_chain(geom, &s0, xs[n - 1], &chain_cfg)?;
    let mut j = 0;
    for (i, &x) in xs.iter().enumerate().take(n).skip(1) {
        while j < chain_curve.len() && chain_curve.points[j].t < x {
            j += 1;
        }
        if j < chain_curve.len() && chain_curve.points[j].t == x {
            let c = &chain_curve.points[j].state;
            let g = &curve.points[i].state;
            out[i] = (g[1] - c[0]).abs().max((g[2] - c[1]).abs());
        }
    }
    Ok(out)
}
