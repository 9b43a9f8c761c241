//! Explicit ODE integration: fixed-step RK4 and adaptive Dormand–Prince 5(4),
//! with event location and per-step diagnostic probes.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Initial value problem `ẏ = rhs(t, y)`, `y(t0) = y0`, integrated to `t1 > t0`.
pub struct IvpProblem<F> {
    pub rhs: F,
    pub t0: f64,
    pub y0: Vec<f64>,
    pub t1: f64,
}

impl<F> IvpProblem<F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    pub fn new(rhs: F, t0: f64, y0: Vec<f64>, t1: f64) -> Self {
        IvpProblem { rhs, t0, y0, t1 }
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4 { h: f64 },
    Dp54 { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `g` crosses from negative to positive.
    Rising,
    /// `g` crosses from positive to negative.
    Falling,
    Either,
}

pub type ScalarFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Terminal event: integration stops where `g(t, y)` crosses zero.
#[derive(Clone)]
pub struct Event {
    pub name: String,
    pub g: ScalarFn,
    pub direction: Direction,
}

/// Diagnostic evaluated at every recorded sample.
#[derive(Clone)]
pub struct Probe {
    pub name: String,
    pub f: ScalarFn,
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Event({}, {:?})", self.name, self.direction)
    }
}

impl fmt::Debug for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Probe({})", self.name)
    }
}

impl Event {
    pub fn new(name: &str, direction: Direction, g: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Event { name: name.to_string(), g: Arc::new(g), direction }
    }
}

impl Probe {
    pub fn new(name: &str, f: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Probe { name: name.to_string(), f: Arc::new(f) }
    }
}

#[derive(Debug, Clone)]
pub struct IntegrationConfig {
    pub method: Method,
    pub max_steps: usize,
    /// Upper bound on the step size (adaptive method only).
    pub h_max: Option<f64>,
    pub event: Option<Event>,
    pub probes: Vec<Probe>,
    /// Times the integrator must land on exactly (recorded as samples).
    pub stop_times: Vec<f64>,
}

impl IntegrationConfig {
    pub fn rk4(h: f64) -> Self {
        IntegrationConfig {
            method: Method::Rk4 { h },
            max_steps: 1_000_000,
            h_max: None,
            event: None,
            probes: Vec::new(),
            stop_times: Vec::new(),
        }
    }

    pub fn dp54(abs_tol: f64, rel_tol: f64) -> Self {
        IntegrationConfig { method: Method::Dp54 { abs_tol, rel_tol }, ..IntegrationConfig::rk4(1.0) }
    }

    pub fn with_max_steps(mut self, n: usize) -> Self {
        self.max_steps = n;
        self
    }

    pub fn with_h_max(mut self, h: f64) -> Self {
        self.h_max = Some(h);
        self
    }

    pub fn with_event(mut self, event: Event) -> Self {
        self.event = Some(event);
        self
    }

    pub fn with_probe(mut self, probe: Probe) -> Self {
        self.probes.push(probe);
        self
    }

    pub fn with_stop_times(mut self, times: Vec<f64>) -> Self {
        self.stop_times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Rk4 { h } if !(h > 0.0 && h.is_finite()) => {
                return Err(Error::Config(format!("step size must be positive, got {h}")))
            }
            Method::Dp54 { abs_tol, rel_tol } if !(abs_tol > 0.0 && rel_tol > 0.0) => {
                return Err(Error::Config("tolerances must be positive".into()))
            }
            _ => {}
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        if matches!(self.h_max, Some(h) if !(h > 0.0)) {
            return Err(Error::Config("h_max must be positive".into()));
        }
        Ok(())
    }
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig::dp54(1e-10, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "reached_t1")]
    ReachedEnd,
    #[serde(rename = "event")]
    Event,
    #[serde(rename = "max_steps")]
    MaxSteps,
    #[serde(rename = "nonfinite")]
    NonFinite,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::ReachedEnd => "reached_t1",
            Status::Event => "event",
            Status::MaxSteps => "max_steps",
            Status::NonFinite => "nonfinite",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub t: f64,
    pub state: Vec<f64>,
    pub diag: Vec<f64>,
}

/// Time-stamped polyline with per-sample diagnostics.
///
/// Times are strictly increasing; every sample carries one value per entry
/// of `diag_names`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t_name: String,
    pub state_names: Vec<String>,
    pub diag_names: Vec<String>,
    pub points: Vec<SamplePoint>,
    pub status: Status,
}

impl CurveSample {
    pub fn new(t_name: &str, state_names: Vec<String>, diag_names: Vec<String>) -> Self {
        CurveSample {
            t_name: t_name.to_string(),
            state_names,
            diag_names,
            points: Vec::new(),
            status: Status::ReachedEnd,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> Option<&SamplePoint> {
        self.points.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.points.iter().map(|s| s.t).collect()
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.points.iter().map(|s| s.state[i]).collect()
    }

    pub fn diag_index(&self, name: &str) -> Option<usize> {
        self.diag_names.iter().position(|n| n == name)
    }

    pub fn diag(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.diag_index(name)?;
        Some(self.points.iter().map(|s| s.diag[i]).collect())
    }

    /// Largest `|value|` of a diagnostic, ignoring NaN entries.
    pub fn max_abs_diag(&self, name: &str) -> Option<f64> {
        let values = self.diag(name)?;
        Some(values.iter().filter(|v| !v.is_nan()).fold(0.0_f64, |m, v| m.max(v.abs())))
    }

    /// Appends a diagnostic column computed from each sample.
    pub fn push_diag(&mut self, name: &str, mut f: impl FnMut(&SamplePoint) -> f64) {
        self.diag_names.push(name.to_string());
        for s in &mut self.points {
            let v = f(s);
            s.diag.push(v);
        }
    }

    pub fn rename_states(mut self, names: &[&str]) -> Self {
        self.state_names = names.iter().map(|s| s.to_string()).collect();
        self
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

struct Stepper<'a, F> {
    rhs: &'a F,
    n: usize,
}

impl<F> Stepper<'_, F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let mut dy = vec![0.0; self.n];
        (self.rhs)(t, y, &mut dy)?;
        if dy.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        Ok(dy)
    }

    fn rk4(&self, t: f64, y: &[f64], h: f64) -> Result<Vec<f64>> {
        let axpy = |k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        let k1 = self.eval(t, y)?;
        let k2 = self.eval(t + 0.5 * h, &axpy(&k1, 0.5 * h))?;
        let k3 = self.eval(t + 0.5 * h, &axpy(&k2, 0.5 * h))?;
        let k4 = self.eval(t + h, &axpy(&k3, h))?;
        Ok((0..self.n).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect())
    }

    /// One Dormand–Prince step. Returns (5th-order solution, error estimate, f at the new point).
    fn dp(&self, t: f64, y: &[f64], h: f64, k1: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let mut k: Vec<Vec<f64>> = vec![k1.to_vec()];
        let mut y_stage = vec![0.0; self.n];
        for s in 1..7 {
            for i in 0..self.n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    acc += A[s][j] * kj[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            k.push(self.eval(t + C[s] * h, &y_stage)?);
        }
        // Stage 7 is evaluated at the 5th-order solution (FSAL).
        let err = (0..self.n).map(|i| h * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>()).collect();
        let k7 = k.pop().unwrap_or_default();
        Ok((y_stage, err, k7))
    }
}

fn weighted_rms(v: &[f64], y0: &[f64], y1: &[f64], atol: f64, rtol: f64) -> f64 {
    let n = v.len().max(1) as f64;
    let s: f64 = v
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sc = atol + rtol * a.abs().max(b.abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / n).sqrt()
}

fn crosses(direction: Direction, g0: f64, g1: f64) -> bool {
    match direction {
        Direction::Rising => g0 < 0.0 && g1 >= 0.0,
        Direction::Falling => g0 > 0.0 && g1 <= 0.0,
        Direction::Either => (g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0),
    }
}

/// Integrates `problem` from `t0` to `t1`.
///
/// Samples are recorded at every accepted step. With an event configured the
/// run stops at the first crossing, located by bisection over re-taken steps
/// until `|g| ≤ 1e-12·max(1, |g|)` over the bracketing step.
pub fn integrate<F>(problem: &IvpProblem<F>, config: &IntegrationConfig) -> Result<CurveSample>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    config.validate()?;
    let (t0, t1) = (problem.t0, problem.t1);
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::Config(format!("need finite t1 > t0, got [{t0}, {t1}]")));
    }
    if problem.y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteState { t: t0 });
    }
    let n = problem.dim();
    let stepper = Stepper { rhs: &problem.rhs, n };

    let mut stops: Vec<f64> = config.stop_times.iter().copied().filter(|&s| s > t0 && s < t1).collect();
    stops.sort_by(|a, b| a.total_cmp(b));
    stops.dedup();
    stops.push(t1);
    let mut next_stop = 0usize;

    let mut curve = CurveSample::new(
        "t",
        (0..n).map(|i| format!("y{i}")).collect(),
        config.probes.iter().map(|p| p.name.clone()).collect(),
    );
    let record = |curve: &mut CurveSample, t: f64, y: &[f64]| {
        curve.points.push(SamplePoint {
            t,
            state: y.to_vec(),
            diag: config.probes.iter().map(|p| (p.f)(t, y)).collect(),
        });
    };

    let mut t = t0;
    let mut y = problem.y0.clone();
    record(&mut curve, t, &y);
    let mut g_prev = config.event.as_ref().map(|e| (e.g)(t, &y));

    let locate = |t: f64,
                  y: &[f64],
                  h: f64,
                  g0: f64,
                  g1: f64,
                  take: &dyn Fn(f64) -> Result<Vec<f64>>|
     -> Result<(f64, Vec<f64>)> {
        let event = config.event.as_ref().expect("locate needs an event");
        let tol = 1e-12 * g0.abs().max(g1.abs()).max(1.0);
        let (mut lo, mut hi) = (0.0_f64, h);
        let mut g_lo = g0;
        let mut best = (h, take(h)?, g1);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let y_mid = take(mid)?;
            let g_mid = (event.g)(t + mid, &y_mid);
            if g_mid.abs() < best.2.abs() || (g_mid.abs() == best.2.abs() && mid < best.0) {
                best = (mid, y_mid.clone(), g_mid);
            }
            if g_mid.abs() <= tol {
                break;
            }
            if crosses(Direction::Either, g_lo, g_mid) || g_mid == 0.0 {
                hi = mid;
            } else {
                lo = mid;
                g_lo = g_mid;
            }
        }
        let _ = y;
        Ok((t + best.0, best.1))
    };

    let mut accepted = 0usize;
    match config.method {
        Method::Rk4 { h } => {
            while t < t1 {
                if accepted >= config.max_steps {
                    curve.status = Status::MaxSteps;
                    return Ok(curve);
                }
                let target = stops[next_stop];
                let mut step = h;
                let mut t_new = t + h;
                if t_new >= target - 1e-12 * h {
                    step = target - t;
                    t_new = target;
                    next_stop += 1;
                }
                let y_new = stepper.rk4(t, &y, step)?;
                if y_new.iter().any(|v| !v.is_finite()) {
                    curve.status = Status::NonFinite;
                    return Ok(curve);
                }
                accepted += 1;
                if let (Some(event), Some(g0)) = (&config.event, g_prev) {
                    let g1 = (event.g)(t_new, &y_new);
                    if crosses(event.direction, g0, g1) {
                        let take = |s: f64| stepper.rk4(t, &y, s);
                        let (te, ye) = locate(t, &y, step, g0, g1, &take)?;
                        if te > t {
                            record(&mut curve, te, &ye);
                        }
                        curve.status = Status::Event;
                        return Ok(curve);
                    }
                    g_prev = Some(g1);
                }
                t = t_new;
                y = y_new;
                record(&mut curve, t, &y);
            }
        }
        Method::Dp54 { abs_tol, rel_tol } => {
            let h_span = t1 - t0;
            let h_max = config.h_max.unwrap_or(h_span).min(h_span);
            let mut k1 = stepper.eval(t, &y)?;
            let mut h = initial_step(&stepper, t, &y, &k1, abs_tol, rel_tol).min(h_max);
            let mut rejections = 0usize;
            while t < t1 {
                if accepted >= config.max_steps {
                    curve.status = Status::MaxSteps;
                    return Ok(curve);
                }
                let h_min = 1e-14 * t.abs().max(1.0);
                let target = stops[next_stop];
                let mut step = h.min(h_max);
                let hits_stop = t + step >= target - 1e-12 * step.max(h_min);
                if hits_stop {
                    step = target - t;
                } else if step < h_min {
                    curve.status = Status::NonFinite;
                    return Ok(curve);
                }
                let trial = stepper.dp(t, &y, step, &k1);
                let (y_new, err, k7) = match trial {
                    Ok(v) if v.0.iter().all(|x| x.is_finite()) => v,
                    other => {
                        rejections += 1;
                        h = 0.25 * step;
                        if h < h_min || rejections > 200 {
                            return match other {
                                Err(e @ Error::NonFiniteState { .. }) | Err(e @ Error::Domain(_)) => {
                                    let _ = e;
                                    curve.status = Status::NonFinite;
                                    Ok(curve)
                                }
                                Err(e) => Err(e),
                                Ok(_) => {
                                    curve.status = Status::NonFinite;
                                    Ok(curve)
                                }
                            };
                        }
                        continue;
                    }
                };
                let err_norm = weighted_rms(&err, &y, &y_new, abs_tol, rel_tol);
                if !err_norm.is_finite() || err_norm > 1.0 {
                    rejections += 1;
                    let factor = if err_norm.is_finite() { (0.9 * err_norm.powf(-0.2)).max(0.2) } else { 0.2 };
                    h = step * factor;
                    if h < h_min {
                        curve.status = Status::NonFinite;
                        return Ok(curve);
                    }
                    continue;
                }
                rejections = 0;
                accepted += 1;
                let t_new = if hits_stop {
                    next_stop += 1;
                    target
                } else {
                    t + step
                };
                if let (Some(event), Some(g0)) = (&config.event, g_prev) {
                    let g1 = (event.g)(t_new, &y_new);
                    if crosses(event.direction, g0, g1) {
                        let take = |s: f64| stepper.dp(t, &y, s, &k1).map(|r| r.0);
                        let (te, ye) = locate(t, &y, step, g0, g1, &take)?;
                        if te > t {
                            record(&mut curve, te, &ye);
                        }
                        curve.status = Status::Event;
                        return Ok(curve);
                    }
                    g_prev = Some(g1);
                }
                t = t_new;
                y = y_new;
                k1 = k7;
                record(&mut curve, t, &y);
                let factor = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
                // Keep the unclamped step when the last step was shortened to hit a stop.
                h = if hits_stop { h.max(step * factor) } else { step * factor };
            }
        }
    }
    curve.status = Status::ReachedEnd;
    Ok(curve)
}

fn initial_step<F>(stepper: &Stepper<'_, F>, t: f64, y: &[f64], f0: &[f64], atol: f64, rtol: f64) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let zeros = vec![0.0; y.len()];
    let d0 = weighted_rms(y, y, &zeros, atol, rtol);
    let d1 = weighted_rms(f0, y, &zeros, atol, rtol);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let Ok(f1) = stepper.eval(t + h0, &y1) else {
        return h0;
    };
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = weighted_rms(&diff, y, &zeros, atol, rtol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[allow(clippy::type_complexity)]
    fn exp_problem() -> IvpProblem<impl Fn(f64, &[f64], &mut [f64]) -> Result<()>> {
        IvpProblem::new(
            |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[0];
                Ok(())
            },
            0.0,
            vec![1.0],
            1.0,
        )
    }

    #[test]
    fn constant_solution_is_exact() {
        let prob = IvpProblem::new(
            |_t, _y: &[f64], dy: &mut [f64]| {
                dy[0] = 0.0;
                Ok(())
            },
            0.0,
            vec![1.0],
            1.0,
        );
        for cfg in [IntegrationConfig::rk4(0.1), IntegrationConfig::dp54(1e-10, 1e-10)] {
            let out = integrate(&prob, &cfg).unwrap();
            let last = out.last().unwrap();
            assert_eq!(last.t, 1.0);
            assert_eq!(last.state[0], 1.0);
            assert_eq!(out.status, Status::ReachedEnd);
        }
    }

    #[test]
    fn dp54_exponential() {
        let out = integrate(&exp_problem(), &IntegrationConfig::dp54(1e-10, 1e-10)).unwrap();
        let last = out.last().unwrap();
        assert_eq!(last.t, 1.0);
        assert!((last.state[0] - std::f64::consts::E).abs() < 1e-8);
        // Strictly increasing times.
        assert!(out.points.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn dp54_respects_tolerance() {
        for rtol in [1e-6, 1e-8, 1e-10] {
            let out = integrate(&exp_problem(), &IntegrationConfig::dp54(rtol, rtol)).unwrap();
            let err = (out.last().unwrap().state[0] - std::f64::consts::E).abs();
            assert!(err < 100.0 * rtol, "rtol {rtol}: err {err}");
        }
    }

    #[test]
    fn rk4_fourth_order() {
        let err = |h: f64| {
            let out = integrate(&exp_problem(), &IntegrationConfig::rk4(h)).unwrap();
            (out.last().unwrap().state[0] - std::f64::consts::E).abs()
        };
        let order = (err(0.1) / err(0.05)).log2();
        assert!((3.7..=4.3).contains(&order), "order {order}");
    }

    #[test]
    fn event_stops_at_crossing() {
        // y = e^t crosses 2 at ln 2.
        let cfg =
            IntegrationConfig::dp54(1e-12, 1e-12).with_event(Event::new("two", Direction::Rising, |_, y| y[0] - 2.0));
        let out = integrate(&exp_problem(), &cfg).unwrap();
        assert_eq!(out.status, Status::Event);
        let last = out.last().unwrap();
        assert!((last.state[0] - 2.0).abs() <= 1e-12 * 2.0);
        assert!((last.t - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn event_direction_filter() {
        let cfg =
            IntegrationConfig::dp54(1e-10, 1e-10).with_event(Event::new("two", Direction::Falling, |_, y| y[0] - 2.0));
        let out = integrate(&exp_problem(), &cfg).unwrap();
        assert_eq!(out.status, Status::ReachedEnd);
    }

    #[test]
    fn event_location_independent_of_step() {
        // Harmonic oscillator x = cos t, first zero at pi/2.
        let prob = IvpProblem::new(
            |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            vec![1.0, 0.0],
            3.0,
        );
        let t_event = |h: f64| {
            let cfg = IntegrationConfig::rk4(h).with_event(Event::new("zero", Direction::Falling, |_, y| y[0]));
            let out = integrate(&prob, &cfg).unwrap();
            assert_eq!(out.status, Status::Event);
            out.last().unwrap().t
        };
        let (a, b) = (t_event(1e-3), t_event(5e-4));
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn stop_times_are_hit_exactly() {
        let stops = vec![0.1, 0.25, 0.7];
        let cfg = IntegrationConfig::dp54(1e-9, 1e-9).with_stop_times(stops.clone());
        let out = integrate(&exp_problem(), &cfg).unwrap();
        let ts = out.times();
        for s in stops {
            assert!(ts.contains(&s));
        }
        let cfg = IntegrationConfig::rk4(0.3).with_stop_times(vec![0.5]);
        let ts = integrate(&exp_problem(), &cfg).unwrap().times();
        assert_eq!(ts, vec![0.0, 0.3, 0.5, 0.8, 1.0]);
    }

    #[test]
    fn max_steps_and_blowup() {
        let cfg = IntegrationConfig::rk4(0.01).with_max_steps(5);
        assert_eq!(integrate(&exp_problem(), &cfg).unwrap().status, Status::MaxSteps);
        // y' = y^2 blows up at t = 1.
        let prob = IvpProblem::new(
            |_t, y: &[f64], dy: &mut [f64]| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            vec![1.0],
            2.0,
        );
        let out = integrate(&prob, &IntegrationConfig::dp54(1e-8, 1e-8)).unwrap();
        assert_ne!(out.status, Status::ReachedEnd);
        assert!(out.last().unwrap().t < 1.0 + 1e-6);
        assert!(out.points.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn probes_and_bad_input() {
        let cfg = IntegrationConfig::rk4(0.5).with_probe(Probe::new("twice", |_, y| 2.0 * y[0]));
        let out = integrate(&exp_problem(), &cfg).unwrap();
        assert_eq!(out.diag_names, ["twice"]);
        assert!(out.points.iter().all(|s| s.diag[0] == 2.0 * s.state[0]));
        let mut prob = exp_problem();
        prob.y0 = vec![f64::NAN];
        assert!(matches!(integrate(&prob, &cfg), Err(Error::NonFiniteState { .. })));
        assert!(integrate(&exp_problem(), &IntegrationConfig::rk4(-1.0)).is_err());
        assert!(integrate(&exp_problem(), &IntegrationConfig::rk4(0.1).with_max_steps(0)).is_err());
    }
}
