//! Hand-written component forms of the Euler equations of each model.
//! Independent of the structure constants; used to cross-check
//! [`LieAlgebraModel::euler_rhs`](super::LieAlgebraModel::euler_rhs).

/// Heisenberg model in algebra coordinates `X = A⁻¹P`.
pub fn heisenberg_velocity(x: &[f64; 4]) -> [f64; 4] {
    [2.0 / 3.0 * x[0] * x[3], -2.0 / 3.0 * x[1] * x[3], 0.0, 0.0]
}

pub fn heisenberg(p: &[f64; 4]) -> [f64; 4] {
    [-2.0 * p[0] * p[2], 2.0 * p[1] * p[2], 0.0, 0.0]
}

pub fn flat_se2(p: &[f64; 4]) -> [f64; 4] {
    [-2.0 * p[0] * p[2] + 3.0 * p[1] * p[3], 2.0 * p[1] * p[2], -2.0 * p[1] * p[1], 0.0]
}

pub fn circles(p: &[f64; 4]) -> [f64; 4] {
    let (p1, p2, p3, p4) = (p[0], p[1], p[2], p[3]);
    [2.0 * p1 * p2 - 3.0 * p3 * p4, 2.0 * p3 * (p3 - 2.0 * p1), -2.0 * p2 * (p3 - 2.0 * p1), 0.0]
}

pub fn sl2(p: &[f64; 4]) -> [f64; 4] {
    let (p1, p2, p3, p4) = (p[0], p[1], p[2], p[3]);
    [8.0 * p2 * p2, 2.0 * p2 * (3.0 * p4 - p1), 2.0 * p1 * (p3 - 2.0 * p2) - 6.0 * p3 * p4, 0.0]
}

/// A momentum-space vector field.
pub type EulerField = fn(&[f64; 4]) -> [f64; 4];

/// The displayed system for a registry key.
pub fn for_model(name: &str) -> Option<EulerField> {
    match name {
        "flat-heisenberg" => Some(heisenberg),
        "flat-se2" => Some(flat_se2),
        "circles-se2" => Some(circles),
        "hooke-sl2" | "horocycle" => Some(sl2),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::super::LieAlgebraModel;
    use super::*;

    #[test]
    fn general_formula_reproduces_displayed_systems() {
        let samples = [[0.3, -1.2, 0.7, 2.0], [1.0, 0.0, 0.0, 0.0], [-0.5, 0.25, 1.5, -0.8]];
        for name in super::super::MODEL_NAMES {
            let m = LieAlgebraModel::by_name(name).unwrap();
            let shown = for_model(name).unwrap();
            for p in &samples {
                let (a, b) = (m.euler_rhs(p), shown(p));
                for k in 0..4 {
                    assert!((a[k] - b[k]).abs() < 1e-13, "{name} {p:?}: {a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn heisenberg_in_velocity_coordinates() {
        let m = LieAlgebraModel::by_name("flat-heisenberg").unwrap();
        let x = [0.4, -1.1, 0.9, 1.3];
        let pdot = m.euler_rhs(&m.momentum(&x));
        let xdot = m.velocity(&pdot);
        let shown = heisenberg_velocity(&x);
        for k in 0..4 {
            assert!((xdot[k] - shown[k]).abs() < 1e-13);
        }
    }
}
