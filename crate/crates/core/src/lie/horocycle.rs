//! Chains of the horocycle geometry of the hyperbolic plane, projected to the
//! upper half-plane. They are dual to the Hooke chains and project to
//! bicircular quartics.

use crate::error::{Error, Result};

/// Point of the projected chain at turning parameter `φ`.
pub fn horocycle_projection(c: f64, phi: f64) -> Result<(f64, f64)> {
    let (s, co) = phi.sin_cos();
    let den = -2.0 * co * co + c * (c + 2.0 * s) * co - c * c;
    let scale = 2.0 + c.abs() * (c.abs() + 2.0) + c * c;
    if den.abs() < 1e-12 * scale {
        return Err(Error::Pole(format!("projection is at infinity for c = {c}, φ = {phi}")));
    }
    let x = c * c * ((c + 2.0 * s) * co - c - s) / den;
    let y = -2.0 * co * co / den;
    Ok((x, y))
}

/// Left side of the quartic satisfied by the projected chain.
pub fn horocycle_quartic_residual(c: f64, x: f64, y: f64) -> f64 {
    let rho = x * x + y * y;
    let c2 = c * c;
    rho * rho - (4.0 * c * x + (c2 + 4.0) * y) * rho + (6.0 * c2 - 2.0) * x * x + 2.0 * c2 * c * x * y + 6.0 * y * y
        - 4.0 * c * (c2 - 1.0) * x
        - (c2 * c2 - 3.0 * c2 + 4.0) * y
        + (c2 - 1.0).powi(2)
}

/// Residual scaled by `(1 + x² + y²)²`.
pub fn normalized_residual(c: f64, x: f64, y: f64) -> f64 {
    horocycle_quartic_residual(c, x, y) / (1.0 + x * x + y * y).powi(2)
}

/// Upper half-plane point of the horocycle through ellipse parameters `(a, b)`:
/// the ellipse passes through `(u, v)` iff `u² − 2a·uv + (a² + b²)v² = b`.
pub fn ellipse_incidence(a: f64, b: f64, u: f64, v: f64) -> f64 {
    u * u - 2.0 * a * u * v + (a * a + b * b) * v * v - b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::hooke;

    #[test]
    fn anchor_points() {
        let (x, y) = horocycle_projection(1.0, 0.0).unwrap();
        assert_eq!((x, y), (0.0, 1.0));
        let (x, y) = horocycle_projection(1.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((x - 2.0).abs() < 1e-15 && y.abs() < 1e-15);
        for c in [0.5, 1.0, 2.0, -3.0] {
            assert_eq!(horocycle_quartic_residual(c, 0.0, 1.0), 0.0);
        }
        assert_eq!(horocycle_quartic_residual(1.0, 2.0, 0.0), 0.0);
    }

    #[test]
    fn samples_lie_on_quartic() {
        for c in [0.5, 1.0, 2.0, 3.0] {
            for k in 0..50 {
                let phi = -1.5 + 3.0 * k as f64 / 49.0;
                if let Ok((x, y)) = horocycle_projection(c, phi) {
                    assert!(normalized_residual(c, x, y).abs() < 1e-9, "c = {c}, φ = {phi}");
                }
            }
        }
    }

    #[test]
    fn mirror_symmetry() {
        for phi in [-1.2, -0.3, 0.2, 0.9] {
            let (x, y) = horocycle_projection(2.0, phi).unwrap();
            let (xm, ym) = horocycle_projection(-2.0, -phi).unwrap();
            assert!((x + xm).abs() < 1e-12 && (y - ym).abs() < 1e-12);
            assert!(normalized_residual(-2.0, -x, y).abs() < 1e-9);
        }
    }

    #[test]
    fn duality_with_hooke_chain() {
        let c = 1.5;
        for tau in [-0.6, -0.2, 0.1, 0.5] {
            let g = hooke::gchain(c, tau).unwrap();
            let (a, b) = horocycle_projection(c, 2.0 * tau).unwrap();
            let residual = ellipse_incidence(a, b, g[(0, 0)], g[(1, 0)]);
            assert!(residual.abs() < 1e-12, "τ = {tau}: {residual}");
        }
    }
}
