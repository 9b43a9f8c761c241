//! Chains of the geometry of central ellipses of unit area (Hooke ellipses).
//!
//! A chain is a curve of unimodular frames `(r, h)`; `r` traces the
//! projected ellipse and `τ` is half the turning parameter `φ`.

use nalgebra::{DMatrix, Matrix2};

use crate::error::{Error, Result};
use crate::integrate::{self, CurveSample, IntegrationConfig, IvpProblem};
use crate::lie::LieAlgebraModel;

fn check_pole(tau: f64) -> Result<f64> {
    let cos2 = (2.0 * tau).cos();
    if cos2.abs() < 1e-12 {
        return Err(Error::Pole(format!("sec 2τ is undefined at τ = {tau}")));
    }
    Ok(1.0 / cos2)
}

/// The closed-form chain `r = e^{iτ}`, `h = e^{iτ}(−c sec 2τ + i)`.
pub fn hooke_chain(c: f64, tau: f64) -> Result<([f64; 2], [f64; 2])> {
    if c == 0.0 {
        return Err(Error::Degenerate("c = 0 gives a curve tangent to the contact distribution".into()));
    }
    let sec = check_pole(tau)?;
    let (s, co) = tau.sin_cos();
    Ok(([co, s], [-c * sec * co - s, -c * sec * s + co]))
}

/// Right-hand side `(r′, h′)` of the chain equations in `τ`.
pub fn hooke_chain_rhs(c: f64, tau: f64, r: [f64; 2], h: [f64; 2]) -> Result<([f64; 2], [f64; 2])> {
    let sec = check_pole(tau)?;
    let a = c * sec;
    let b = 1.0 + c * (c + 2.0 * (2.0 * tau).sin()) * sec * sec;
    Ok(([a * r[0] + h[0], a * r[1] + h[1]], [-b * r[0] - a * h[0], -b * r[1] - a * h[1]]))
}

/// `det[r, h]`.
pub fn frame_det(r: [f64; 2], h: [f64; 2]) -> f64 {
    r[0] * h[1] - r[1] * h[0]
}

/// Frame matrix with columns `r`, `h`.
pub fn frame(r: [f64; 2], h: [f64; 2]) -> Matrix2<f64> {
    Matrix2::new(r[0], h[0], r[1], h[1])
}

/// The chain through the identity: `frame(τ₀ = 0)⁻¹ · frame(τ)`.
pub fn gchain(c: f64, tau: f64) -> Result<Matrix2<f64>> {
    let sec = check_pole(tau)?;
    let (s, co) = tau.sin_cos();
    let tan2 = (2.0 * tau).tan();
    Ok(Matrix2::new(co + c * s, -s * (c * c * sec + c * tan2 + 1.0), s, co - c * sec * s))
}

/// Gudermannian `gd(u) = atan(sinh u)`.
pub fn gudermannian(u: f64) -> f64 {
    u.sinh().atan()
}

/// `p(φ) = cos φ + c(c + 2 sin φ) sec φ`.
fn turning_coefficient(c: f64, phi: f64) -> f64 {
    phi.cos() + c * (c + 2.0 * phi.sin()) / phi.cos()
}

/// Momenta of the chain at turning parameter `φ`; all have `H = 0`.
pub fn chain_momenta(b: f64, c: f64, phi: f64) -> [f64; 4] {
    let p = turning_coefficient(c, phi);
    [b * (c + phi.sin()), 0.5 * b * phi.cos(), b * (phi.cos() - 0.5 * p), b * c / 3.0]
}

/// Integrates `φ̇ = 2b cos φ`, `ṙ = b[c r + cos φ h]`, `ḣ = −b[p r + c h]`
/// from the identity frame at `φ₀`.
///
/// States are `(phi, r1, r2, h1, h2)`. Diagnostics: `det_drift`, `H` of the
/// momenta along the run, and `closed_form_dist`, the largest entry of
/// `|frame(φ₀/2)·F(t) − frame(φ(t)/2)|`.
pub fn hooke_euler_chain(b: f64, c: f64, phi0: f64, t1: f64, config: &IntegrationConfig) -> Result<CurveSample> {
    if b == 0.0 {
        return Err(Error::Degenerate("b = 0 gives a constant curve".into()));
    }
    check_pole(0.5 * phi0)?;
    let rhs = |_t: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
        let phi = v[0];
        let cos = phi.cos();
        if cos.abs() < 1e-12 {
            return Err(Error::Pole(format!("sec φ is undefined at φ = {phi}")));
        }
        let p = turning_coefficient(c, phi);
        let (r, h) = ([v[1], v[2]], [v[3], v[4]]);
        dv[0] = 2.0 * b * cos;
        for i in 0..2 {
            dv[1 + i] = b * (c * r[i] + cos * h[i]);
            dv[3 + i] = -b * (p * r[i] + c * h[i]);
        }
        Ok(())
    };
    let y0 = vec![phi0, 1.0, 0.0, 0.0, 1.0];
    let curve = integrate::integrate(&IvpProblem::new(rhs, 0.0, y0, t1), config)?;
    let mut curve = curve.rename_states(&["phi", "r1", "r2", "h1", "h2"]);

    let model = LieAlgebraModel::by_name("hooke-sl2")?;
    let start = frame_at(c, 0.5 * phi0)?;
    curve.push_diag("det_drift", |s| frame_det([s.state[1], s.state[2]], [s.state[3], s.state[4]]) - 1.0);
    curve.push_diag("H", |s| model.hamiltonian(&chain_momenta(b, c, s.state[0])));
    curve.push_diag("closed_form_dist", |s| {
        let integrated = start * frame([s.state[1], s.state[2]], [s.state[3], s.state[4]]);
        match frame_at(c, 0.5 * s.state[0]) {
            Ok(exact) => (integrated - exact).amax(),
            Err(_) => f64::NAN,
        }
    });
    Ok(curve)
}

fn frame_at(c: f64, tau: f64) -> Result<Matrix2<f64>> {
    let (r, h) = hooke_chain(c, tau)?;
    Ok(frame(r, h))
}

/// Reconstructs the chain through the identity from its momenta and
/// returns the largest entry of `|g(t) − gchain(τ(t))|`, `τ = gd(2bt)/2`.
pub fn reconstruction_error(b: f64, c: f64, t1: f64, config: &IntegrationConfig) -> Result<f64> {
    let model = LieAlgebraModel::by_name("hooke-sl2")?;
    let traj = model.reconstruct(chain_momenta(b, c, 0.0), &DMatrix::identity(3, 3), t1, config)?;
    let mut worst = 0.0_f64;
    for i in 0..traj.len() {
        let g = traj.element(i);
        let tau = 0.5 * gudermannian(2.0 * b * traj.time(i));
        let exact = gchain(c, tau)?;
        for r in 0..2 {
            for col in 0..2 {
                worst = worst.max((g[(r, col)] - exact[(r, col)]).abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin() {
        let (r, h) = hooke_chain(1.0, 0.0).unwrap();
        assert_eq!((r, h), ([1.0, 0.0], [-1.0, 1.0]));
        assert_eq!(frame_det(r, h), 1.0);
        assert!(matches!(hooke_chain(0.0, 0.1), Err(Error::Degenerate(_))));
        assert!(matches!(hooke_chain(1.0, std::f64::consts::FRAC_PI_4), Err(Error::Pole(_))));
    }

    #[test]
    fn closed_form_solves_chain_equations() {
        let (c, tau, eps) = (0.7, 0.3, 1e-4);
        let (r, h) = hooke_chain(c, tau).unwrap();
        let (dr, dh) = hooke_chain_rhs(c, tau, r, h).unwrap();
        let at = |t: f64| hooke_chain(c, t).unwrap();
        let ((rp, hp), (rm, hm)) = (at(tau + eps), at(tau - eps));
        let ((rp2, hp2), (rm2, hm2)) = (at(tau + 2.0 * eps), at(tau - 2.0 * eps));
        for i in 0..2 {
            let fd_r = (8.0 * (rp[i] - rm[i]) - (rp2[i] - rm2[i])) / (12.0 * eps);
            let fd_h = (8.0 * (hp[i] - hm[i]) - (hp2[i] - hm2[i])) / (12.0 * eps);
            assert!((fd_r - dr[i]).abs() < 1e-10);
            assert!((fd_h - dh[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn gchain_is_aligned_frame() {
        let c = 1.3;
        let start = frame_at(c, 0.0).unwrap();
        let g = gchain(c, 0.4).unwrap();
        let expected = start.try_inverse().unwrap() * frame_at(c, 0.4).unwrap();
        assert!((g - expected).amax() < 1e-14);
    }

    #[test]
    fn chain_momenta_are_null() {
        let m = LieAlgebraModel::by_name("hooke-sl2").unwrap();
        for phi in [0.0, 0.4, -1.1] {
            assert!(m.hamiltonian(&chain_momenta(0.8, 1.7, phi)).abs() < 1e-14);
        }
    }

    #[test]
    fn euler_chain_tracks_closed_form() {
        let cfg = IntegrationConfig::dp54(1e-12, 1e-12);
        let curve = hooke_euler_chain(1.0, 2.0, 0.0, 2.0, &cfg).unwrap();
        assert!(curve.max_abs_diag("closed_form_dist").unwrap() < 1e-7);
        assert!(curve.max_abs_diag("det_drift").unwrap() < 1e-9);
        assert!(curve.max_abs_diag("H").unwrap() < 1e-10);
        assert!(reconstruction_error(1.0, 2.0, 2.0, &cfg).unwrap() < 1e-8);
    }
}
