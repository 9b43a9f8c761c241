//! The reduced chain system over `x`, the path ODE and the projectivity defect.
//!
//! A chain is a curve `x ↦ (x, y(x), p(x))` in `J¹(ℝ, ℝ)` transverse to the
//! contact distribution, i.e. with `Δ = y′ − p ≠ 0`. Its `y`-component obeys
//! the cubic Taylor expansion of `f` in `p`; it is a path of the geometry
//! exactly when `f` is at most cubic in `p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SecondOrderOde;
use crate::integrate::{self, CurveSample, Direction, Event, IntegrationConfig, IvpProblem, Probe};
use crate::jet::Partials;

/// Default tangency threshold for [`chain_rhs`].
pub const DEFAULT_DELTA_MIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    /// `dy/dx`
    pub yp: f64,
    /// `dp/dx`
    pub pp: f64,
}

impl ChainState {
    pub fn new(x: f64, y: f64, p: f64, yp: f64, pp: f64) -> Self {
        ChainState { x, y, p, yp, pp }
    }

    /// Transversality `y′ − p`.
    pub fn delta(&self) -> f64 {
        self.yp - self.p
    }

    fn from_vec(x: f64, v: &[f64]) -> Self {
        ChainState::new(x, v[0], v[1], v[2], v[3])
    }

    fn to_vec(self) -> Vec<f64> {
        vec![self.y, self.p, self.yp, self.pp]
    }
}

impl TryFrom<&[f64]> for ChainState {
    type Error = Error;

    fn try_from(v: &[f64]) -> Result<Self> {
        match v {
            &[x, y, p, yp, pp] => Ok(ChainState::new(x, y, p, yp, pp)),
            _ => Err(Error::Config(format!("a chain state has 5 components, got {}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainDerivative {
    pub ypp: f64,
    pub ppp: f64,
}

/// Second derivatives of a chain from the partials of `f` at `(x, y, p)`.
pub fn chain_derivative(d: &Partials, p: f64, pp: f64, delta: f64) -> ChainDerivative {
    let f = d.f;
    let ypp = f + d.f_p * delta + 0.5 * d.f_pp * delta.powi(2) + d.f_ppp * delta.powi(3) / 6.0;
    let ppp = -2.0 * (pp - f).powi(2) / delta
        + d.f_p * (3.0 * pp - 2.0 * f)
        + d.f_x
        + p * d.f_y
        + (d.f_pp * (pp - f) + 2.0 * d.f_y) * delta
        + (d.f_ppp * (pp - 2.0 * f) - d.f_xpp + 4.0 * d.f_yp - p * d.f_ypp) * delta.powi(2) / 6.0;
    ChainDerivative { ypp, ppp }
}

/// `(y″, p″)` of the chain through `s`, with the default tangency threshold.
pub fn chain_rhs(geom: &SecondOrderOde, s: &ChainState) -> Result<ChainDerivative> {
    chain_rhs_with(geom, s, DEFAULT_DELTA_MIN)
}

pub fn chain_rhs_with(geom: &SecondOrderOde, s: &ChainState, delta_min: f64) -> Result<ChainDerivative> {
    let delta = s.delta();
    if !(delta.abs() >= delta_min) {
        return Err(Error::Tangency { delta });
    }
    let d = geom.partials(s.x, s.y, s.p)?;
    Ok(chain_derivative(&d, s.p, s.pp, delta))
}

/// `y″ = f(x, y, y′)` of the path ODE.
pub fn path_rhs(geom: &SecondOrderOde, x: f64, y: f64, yp: f64) -> Result<f64> {
    geom.value(x, y, yp)
}

/// Cubic Taylor polynomial of `f(x, y, ·)` about `p`, evaluated at `y′`.
pub fn cubic_taylor(geom: &SecondOrderOde, x: f64, y: f64, p: f64, yp: f64) -> Result<f64> {
    let d = geom.partials(x, y, p)?;
    let delta = yp - p;
    Ok(d.f + d.f_p * delta + 0.5 * d.f_pp * delta.powi(2) + d.f_ppp * delta.powi(3) / 6.0)
}

#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub integration: IntegrationConfig,
    /// Below this `|Δ|` the right-hand side refuses to evaluate.
    pub delta_min: f64,
    /// Integration stops when `|Δ|` falls to this value.
    pub delta_stop: f64,
    /// Integration stops when `|y′|` or `|p′|` exceeds this value: the chain
    /// is turning vertical and leaves the chart.
    pub slope_bound: Option<f64>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            integration: IntegrationConfig::dp54(1e-11, 1e-11).with_max_steps(100_000),
            delta_min: DEFAULT_DELTA_MIN,
            delta_stop: 1e-8,
            slope_bound: None,
        }
    }
}

impl ChainConfig {
    pub fn with_integration(mut self, integration: IntegrationConfig) -> Self {
        self.integration = integration;
        self
    }

    pub fn with_slope_bound(mut self, bound: f64) -> Self {
        self.slope_bound = Some(bound);
        self
    }
}

/// Integrates the chain from `s0` to `x1 > s0.x`.
///
/// Samples carry the state `(y, p, yp, pp)` over `x` and the diagnostics
/// `delta` and `resid = y″_chain − f(x, y, y′)` (NaN where `f` is undefined).
/// Stops with an event when `|Δ|` falls to `delta_stop` or a slope reaches
/// `slope_bound`.
pub fn integrate_chain(geom: &SecondOrderOde, s0: &ChainState, x1: f64, config: &ChainConfig) -> Result<CurveSample> {
    if !(s0.delta().abs() >= config.delta_min) {
        return Err(Error::Tangency { delta: s0.delta() });
    }
    let delta_min = config.delta_min;
    let rhs = |x: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
        let s = ChainState::from_vec(x, v);
        let d = chain_rhs_with(geom, &s, delta_min)?;
        dv[0] = s.yp;
        dv[1] = s.pp;
        dv[2] = d.ypp;
        dv[3] = d.ppp;
        Ok(())
    };
    let problem = IvpProblem::new(rhs, s0.x, s0.to_vec(), x1);

    let mut cfg = config.integration.clone();
    let stop = config.delta_stop;
    let bound = config.slope_bound.unwrap_or(f64::INFINITY);
    if s0.yp.abs().max(s0.pp.abs()) >= bound {
        return Err(Error::Config(format!("initial slopes exceed the bound {bound}")));
    }
    // Both stopping conditions fall through zero; their minimum does at the first one.
    let tangency = s0.delta().abs() > stop;
    cfg = cfg.with_event(Event::new("chart_exit", Direction::Falling, move |_, v| {
        let g_tangent = if tangency { (v[2] - v[1]).abs() - stop } else { f64::INFINITY };
        let g_slope = bound - v[2].abs().max(v[3].abs());
        g_tangent.min(g_slope).min(f64::MAX)
    }));
    let resid_geom = geom.clone();
    cfg = cfg.with_probe(Probe::new("delta", |_, v| v[2] - v[1])).with_probe(Probe::new("resid", move |x, v| {
        let s = ChainState::from_vec(x, v);
        match (cubic_taylor(&resid_geom, x, s.y, s.p, s.yp), resid_geom.value(x, s.y, s.yp)) {
            (Ok(chain), Ok(path)) => chain - path,
            _ => f64::NAN,
        }
    }));
    let mut curve = integrate::integrate(&problem, &cfg)?;
    curve.t_name = "x".into();
    Ok(curve.rename_states(&["y", "p", "yp", "pp"]))
}

/// Largest `|y″_chain − f(x, y, y′)|` along the integrated chain.
pub fn projectivity_defect(geom: &SecondOrderOde, s0: &ChainState, x1: f64, config: &ChainConfig) -> Result<f64> {
    let curve = integrate_chain(geom, s0, x1, config)?;
    defect_of(&curve)
}

/// Largest `|resid|` of a chain sample; an undefined residual is an error.
pub fn defect_of(curve: &CurveSample) -> Result<f64> {
    let resid = curve.diag("resid").ok_or_else(|| Error::Config("curve has no `resid` diagnostic".into()))?;
    if let Some(i) = resid.iter().position(|r| r.is_nan()) {
        let x = curve.points[i].t;
        return Err(Error::Domain(format!("f undefined along the chain at x = {x}")));
    }
    Ok(resid.iter().fold(0.0_f64, |m, r| m.max(r.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn geom(src: &str) -> SecondOrderOde {
        SecondOrderOde::from_source(src, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn flat_values() {
        let flat = SecondOrderOde::flat();
        let d = chain_rhs(&flat, &ChainState::new(0.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!((d.ypp, d.ppp), (0.0, 0.0));
        let d = chain_rhs(&flat, &ChainState::new(0.0, 0.0, 0.0, 1.0, 1.0)).unwrap();
        assert_eq!((d.ypp, d.ppp), (0.0, -2.0));
    }

    #[test]
    fn cubic_monomial() {
        let d = chain_rhs(&geom("p^3"), &ChainState::new(0.0, 0.0, 0.0, 1.0, 0.0)).unwrap();
        assert_eq!(d.ypp, 1.0);
        assert_eq!(path_rhs(&geom("p^3"), 0.0, 0.0, 2.0).unwrap(), 8.0);
        assert_eq!(path_rhs(&SecondOrderOde::hooke(), 1.0, 0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn taylor_truncation() {
        let q = geom("p^4");
        assert_eq!(cubic_taylor(&q, 0.0, 0.0, 0.0, 1.0).unwrap(), 0.0);
        assert!((cubic_taylor(&q, 0.3, 0.1, 0.7, 0.7).unwrap() - 0.7f64.powi(4)).abs() < 1e-15);
        let h = SecondOrderOde::hooke();
        let (x, y, p, yp) = (0.4, -0.3, 1.2, -0.9);
        let a = cubic_taylor(&h, x, y, p, yp).unwrap();
        let b = h.value(x, y, yp).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn tangency_rejected() {
        let s = ChainState::new(0.0, 0.0, 1.0, 1.0, 0.0);
        assert!(matches!(chain_rhs(&SecondOrderOde::flat(), &s), Err(Error::Tangency { .. })));
        let cfg = ChainConfig::default();
        assert!(integrate_chain(&SecondOrderOde::flat(), &s, 1.0, &cfg).is_err());
    }

    #[test]
    fn flat_chain_is_a_line_with_concurrent_pencil() {
        let cfg = ChainConfig::default();
        let s0 = ChainState::new(0.0, 0.0, 0.0, 1.0, 1.0);
        let curve = integrate_chain(&SecondOrderOde::flat(), &s0, 3.0, &cfg).unwrap();
        assert_eq!(curve.state_names, ["y", "p", "yp", "pp"]);
        // p″ = −2p′²/Δ with Δ = 1 − p gives p = x/(1 + x): contact lines through (−1, 0).
        for s in &curve.points {
            assert!((s.state[0] - s.t).abs() < 1e-12);
            assert!((s.state[1] - s.t / (1.0 + s.t)).abs() < 1e-8);
        }
        assert_eq!(defect_of(&curve).unwrap(), 0.0);
    }

    #[test]
    fn quartic_defect_is_large() {
        let s0 = ChainState::new(0.0, 0.0, 0.0, 1.0, 0.5);
        let d = projectivity_defect(&geom("p^4"), &s0, 1.0, &ChainConfig::default()).unwrap();
        assert!(d >= 0.1, "defect {d}");
    }
}
