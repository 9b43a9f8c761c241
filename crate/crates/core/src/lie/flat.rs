//! Flat model: chains in the Heisenberg and rigid-motion realizations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Null momenta of the Heisenberg chain with constants `(a, b, c)`.
pub fn heisenberg_momenta(a: f64, b: f64, c: f64) -> [f64; 4] {
    let x = [a * c, b * c, -a * b * c, 1.5 * c];
    [x[1] / 2.0, x[0] / 2.0, x[3] / 3.0, x[2] / 3.0]
}

/// `(x, y, z)` of the Heisenberg chain through the identity at time `t`.
pub fn heisenberg_closed_form(a: f64, b: f64, c: f64, t: f64) -> (f64, f64, f64) {
    let decay = -(-c * t).exp_m1();
    (b * decay, -a * b * decay, a * (c * t).exp_m1())
}

/// Reads `(x, y, z)` off `[[1, z, y, ·], [0, 1, x, ·], …]`.
pub fn heisenberg_coordinates(g: &DMatrix<f64>) -> (f64, f64, f64) {
    (g[(1, 2)], g[(0, 2)], g[(0, 1)])
}

/// `y + z(b − x)`: vanishes when the line through the chain point passes through `(b, 0)`.
pub fn concurrency_residual(b: f64, x: f64, y: f64, z: f64) -> f64 {
    y + z * (b - x)
}

/// Null momenta of the rigid-motion chain with radius `r` and offset `c`.
pub fn se2_momenta(r: f64, c: f64) -> [f64; 4] {
    [0.0, r, 0.0, -2.0 * c / 3.0]
}

/// Position `z` and heading `θ` of a rigid motion `[[R, z], [0, 1]]`.
pub fn se2_coordinates(g: &DMatrix<f64>) -> (Complex64, f64) {
    (Complex64::new(g[(0, 2)], g[(1, 2)]), g[(1, 0)].atan2(g[(0, 0)]))
}

/// The flat chain `z = ic tan φ`, `θ = φ`.
pub fn flat_chain_se2(c: f64, phi: f64) -> Result<(Complex64, f64)> {
    if phi.cos().abs() < 1e-12 {
        return Err(Error::Pole(format!("tan φ is undefined at φ = {phi}")));
    }
    Ok((Complex64::new(0.0, c * phi.tan()), phi))
}
