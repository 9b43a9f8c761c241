//! Chains of the geometry of unit circles.
//!
//! Normalized, a chain is `θ̇² = F(θ)` with `F = 8c cos θ + 4 sin²θ − 2c²`
//! and `ż = e^{iθ}[c − i(θ̇/2 + sin θ)]`, starting at `θ = θ₀`, `z = 0`,
//! `θ̇ = +√F`. For `c ∈ (0, 4)` the heading oscillates between `±θmax`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::{self, CurveSample, Direction, Event, IntegrationConfig, IvpProblem, SamplePoint, Status};

pub fn potential(theta: f64, c: f64) -> f64 {
    8.0 * c * theta.cos() + 4.0 * theta.sin().powi(2) - 2.0 * c * c
}

fn potential_slope(theta: f64, c: f64) -> f64 {
    8.0 * theta.sin() * (theta.cos() - c)
}

/// `θ̈` of the equivalent second-order form.
pub fn newton_acceleration(theta: f64, c: f64) -> f64 {
    0.5 * potential_slope(theta, c)
}

/// `ż` for heading `θ` turning at rate `θ̇`.
pub fn chain_velocity(c: f64, theta: f64, theta_dot: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta) * Complex64::new(c, -(0.5 * theta_dot + theta.sin()))
}

/// Turning angle `cos⁻¹(c − √(c²/2 + 1))`, defined for `0 ≤ c ≤ 4`.
pub fn theta_max(c: f64) -> Result<f64> {
    if !(0.0..=4.0).contains(&c) {
        return Err(Error::Range(format!("θmax needs 0 ≤ c ≤ 4, got {c}")));
    }
    Ok((c - (0.5 * c * c + 1.0).sqrt()).clamp(-1.0, 1.0).acos())
}

#[derive(Debug, Clone)]
pub struct CirclesConfig {
    pub integration: IntegrationConfig,
    /// A turn is taken over analytically once `F` falls to this value.
    pub turn_threshold: f64,
}

impl Default for CirclesConfig {
    fn default() -> Self {
        CirclesConfig { integration: IntegrationConfig::dp54(1e-12, 1e-12), turn_threshold: 1e-8 }
    }
}

/// Integrates the chain with parameter `c` from `θ(0) = θ₀`, `z(0) = 0` to time `t1`.
///
/// A negative `t1` integrates backwards. States are `(theta, theta_dot, x, y)`
/// with `z = x + iy`; diagnostics are `theta_excess = |θ| − θmax` and
/// `energy = θ̇² − F(θ)`. For `c = 0` the heading tends to `0` or `π`
/// without turning, and integration stops with an event once `F` is small.
pub fn circles_chain(c: f64, theta0: f64, t1: f64, config: &CirclesConfig) -> Result<CurveSample> {
    if !(0.0..4.0).contains(&c) {
        return Err(Error::Range(format!("circle chains need 0 ≤ c < 4, got {c}")));
    }
    let f0 = potential(theta0, c);
    if !(f0 > config.turn_threshold) {
        return Err(Error::Range(format!("F(θ₀) = {f0:e} must be positive; for c = 0 take θ₀ away from 0 and π")));
    }
    if t1 == 0.0 || !t1.is_finite() {
        return Err(Error::Config(format!("t1 must be finite and nonzero, got {t1}")));
    }
    let theta_cap = theta_max(c)?;
    // Integrate in u = sign·t so the solver always runs forward.
    let sign = t1.signum();
    let span = t1.abs();
    let eps = config.turn_threshold;

    let mut points: Vec<SamplePoint> = Vec::new();
    let mut push = |u: f64, theta: f64, theta_dot: f64, z: Complex64| {
        points.push(SamplePoint { t: u, state: vec![theta, theta_dot, z.re, z.im], diag: Vec::new() });
    };

    let (mut u, mut theta, mut z, mut branch) = (0.0, theta0, Complex64::new(0.0, 0.0), 1.0);
    push(0.0, theta, f0.sqrt(), z);
    let mut status = Status::ReachedEnd;
    while u < span {
        let rhs = |_u: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
            let theta_dot = branch * potential(v[0], c).max(0.0).sqrt();
            let zd = chain_velocity(c, v[0], theta_dot);
            dv[0] = sign * theta_dot;
            dv[1] = sign * zd.re;
            dv[2] = sign * zd.im;
            Ok(())
        };
        let cfg = config
            .integration
            .clone()
            .with_event(Event::new("turn", Direction::Falling, move |_, v| potential(v[0], c) - eps));
        let seg = integrate::integrate(&IvpProblem::new(rhs, u, vec![theta, z.re, z.im], span), &cfg)?;
        for s in seg.points.iter().skip(1) {
            let theta_dot = branch * potential(s.state[0], c).max(0.0).sqrt();
            push(s.t, s.state[0], theta_dot, Complex64::new(s.state[1], s.state[2]));
        }
        let last = seg.last().expect("segment has its start sample");
        (u, theta, z) = (last.t, last.state[0], Complex64::new(last.state[1], last.state[2]));
        if seg.status != Status::Event {
            status = seg.status;
            break;
        }
        if c == 0.0 {
            // Double root of F: the heading only approaches 0 or π.
            status = Status::Event;
            break;
        }

        // Turn: quadratic model of θ through the apex F(θ_apex) = 0.
        let apex = newton_root(theta, c)?;
        let rate = sign * branch * potential(theta, c).max(0.0).sqrt();
        if rate == 0.0 || (apex - theta) * rate <= 0.0 {
            return Err(Error::Degenerate(format!("turning point near θ = {theta} is not isolated")));
        }
        let half = 2.0 * (apex - theta) / rate;
        let accel = -rate / half;
        let end = (2.0 * half).min(span - u);
        let model = move |s: f64| (theta + rate * s + 0.5 * accel * s * s, sign * (rate + accel * s));
        let turn_rhs = |s: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
            let (th, th_dot) = model(s);
            let zd = chain_velocity(c, th, th_dot);
            dv[0] = sign * zd.re;
            dv[1] = sign * zd.im;
            let _ = v;
            Ok(())
        };
        let turn_cfg = config.integration.clone().with_stop_times(vec![half]);
        let turn = integrate::integrate(&IvpProblem::new(turn_rhs, 0.0, vec![z.re, z.im], end), &turn_cfg)?;
        for s in turn.points.iter().skip(1) {
            if s.t == half || s.t == end {
                let (th, th_dot) = if s.t == half { (apex, 0.0) } else { model(s.t) };
                push(u + s.t, th, th_dot, Complex64::new(s.state[0], s.state[1]));
            }
        }
        let last = turn.last().expect("turn has its start sample");
        theta = if end == 2.0 * half { theta } else { model(end).0 };
        z = Complex64::new(last.state[0], last.state[1]);
        u += end;
        branch = -branch;
    }

    if sign < 0.0 {
        points.reverse();
        for s in &mut points {
            s.t = -s.t;
        }
    }
    let mut curve = CurveSample::new("t", ["theta", "theta_dot", "x", "y"].map(String::from).to_vec(), Vec::new());
    curve.points = points;
    curve.status = status;
    curve.push_diag("theta_excess", |s| s.state[0].abs() - theta_cap);
    curve.push_diag("energy", |s| s.state[1].powi(2) - potential(s.state[0], c));
    Ok(curve)
}

fn newton_root(theta: f64, c: f64) -> Result<f64> {
    let mut th = theta;
    for _ in 0..60 {
        let step = potential(th, c) / potential_slope(th, c);
        if !step.is_finite() {
            break;
        }
        th -= step;
        if step.abs() <= 1e-15 * th.abs().max(1.0) {
            return Ok(th);
        }
    }
    Err(Error::Degenerate(format!("no simple turning point near θ = {theta} for c = {c}")))
}

/// Independent reference: `θ̈ = 4 sin θ (cos θ − c)` from `(θ₀, √F(θ₀))`,
/// sampled at `times` (positive, increasing).
pub fn newton_form(c: f64, theta0: f64, times: &[f64], config: &IntegrationConfig) -> Result<Vec<f64>> {
    let Some(&t1) = times.last() else {
        return Ok(Vec::new());
    };
    let rhs = |_t: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
        dv[0] = v[1];
        dv[1] = newton_acceleration(v[0], c);
        Ok(())
    };
    let v0 = vec![theta0, potential(theta0, c).max(0.0).sqrt()];
    let curve =
        integrate::integrate(&IvpProblem::new(rhs, 0.0, v0, t1), &config.clone().with_stop_times(times.to_vec()))?;
    Ok(times.iter().map(|&t| curve.points.iter().find(|s| s.t == t).map_or(f64::NAN, |s| s.state[0])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_max_values() {
        assert_eq!(theta_max(0.0).unwrap(), std::f64::consts::PI);
        assert_eq!(theta_max(4.0).unwrap(), 0.0);
        // Bisection on F(θ, 2) = 0 over (0, π).
        let (mut lo, mut hi) = (0.0_f64, std::f64::consts::PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if potential(mid, 2.0) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((theta_max(2.0).unwrap() - lo).abs() < 1e-14);
        assert!(theta_max(4.5).is_err());
        assert!(theta_max(-0.1).is_err());
    }

    #[test]
    fn amplitude_matches_theta_max() {
        for c in [0.5, 1.0, 2.0, 3.0] {
            let curve = circles_chain(c, 0.0, 20.0, &CirclesConfig::default()).unwrap();
            assert_eq!(curve.status, Status::ReachedEnd);
            let amp = curve.column(0).iter().fold(0.0_f64, |m, t| m.max(t.abs()));
            assert!((amp - theta_max(c).unwrap()).abs() < 1e-6, "c = {c}: {amp}");
            let min = curve.column(0).iter().fold(0.0_f64, |m, t| m.min(*t));
            assert!((min + theta_max(c).unwrap()).abs() < 1e-6, "c = {c}: {min}");
            assert!(curve.max_abs_diag("energy").unwrap() < 1e-9);
        }
    }

    #[test]
    fn agrees_with_newton_form() {
        for c in [0.5, 2.0, 3.5] {
            let curve = circles_chain(c, 0.0, 12.0, &CirclesConfig::default()).unwrap();
            let times: Vec<f64> = curve.times().into_iter().filter(|&t| t > 0.0).collect();
            let reference = newton_form(c, 0.0, &times, &IntegrationConfig::dp54(1e-12, 1e-12)).unwrap();
            for (s, th) in curve.points.iter().skip(1).zip(reference) {
                assert!((s.state[0] - th).abs() < 1e-6, "c = {c}, t = {}: {} vs {th}", s.t, s.state[0]);
            }
        }
    }

    #[test]
    fn degenerate_pencil_draws_a_unit_circle() {
        let cfg = CirclesConfig::default();
        let fwd = circles_chain(0.0, std::f64::consts::FRAC_PI_2, 8.0, &cfg).unwrap();
        let bwd = circles_chain(0.0, std::f64::consts::FRAC_PI_2, -8.0, &cfg).unwrap();
        assert_eq!(fwd.status, Status::Event);
        assert!(bwd.points.windows(2).all(|w| w[1].t > w[0].t));
        // z = z0 − e^{iθ} with z0 = e^{iπ/2}.
        for s in fwd.points.iter().chain(&bwd.points) {
            let z = Complex64::new(s.state[2], s.state[3]);
            assert!(((z - Complex64::i()).norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn range_errors() {
        let cfg = CirclesConfig::default();
        assert!(matches!(circles_chain(4.0, 0.0, 1.0, &cfg), Err(Error::Range(_))));
        assert!(matches!(circles_chain(0.0, 0.0, 1.0, &cfg), Err(Error::Range(_))));
        assert!(matches!(circles_chain(1.0, 3.0, 1.0, &cfg), Err(Error::Range(_))));
    }
}
