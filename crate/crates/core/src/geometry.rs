//! Path geometries `y″ = f(x, y, y′)` in the `J¹(ℝ, ℝ)` chart.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{self, Expr};
use crate::jet::{Jet, Partials, Var};

/// Names accepted by [`SecondOrderOde::builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["flat", "hooke", "poly-p"];

#[derive(Clone, PartialEq)]
enum Rhs {
    Flat,
    /// `f = (x p − y)³`
    Hooke,
    /// `f = Σ a_k p^k`, coefficients read from parameters `a0, a1, …`.
    PolyP(Vec<f64>),
    Expr(Expr),
}

/// A path geometry given by a second-order ODE. Immutable once built.
#[derive(Clone, PartialEq)]
pub struct SecondOrderOde {
    name: String,
    rhs: Rhs,
    params: BTreeMap<String, f64>,
}

impl fmt::Debug for SecondOrderOde {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecondOrderOde").field("name", &self.name).field("params", &self.params).finish()
    }
}

impl SecondOrderOde {
    pub fn flat() -> Self {
        SecondOrderOde { name: "flat".into(), rhs: Rhs::Flat, params: BTreeMap::new() }
    }

    pub fn hooke() -> Self {
        SecondOrderOde { name: "hooke".into(), rhs: Rhs::Hooke, params: BTreeMap::new() }
    }

    /// `f = Σ coeffs[k] p^k`.
    pub fn poly_p(coeffs: &[f64]) -> Self {
        let params = coeffs.iter().enumerate().map(|(k, a)| (format!("a{k}"), *a)).collect();
        SecondOrderOde::builtin("poly-p", &params).expect("poly-p parameters are well formed")
    }

    /// Looks up a built-in geometry by name.
    pub fn builtin(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let rhs = match name {
            "flat" => Rhs::Flat,
            "hooke" => Rhs::Hooke,
            "poly-p" => Rhs::PolyP(poly_coefficients(params)?),
            _ => return Err(Error::UnknownGeometry(name.to_string())),
        };
        Ok(SecondOrderOde { name: name.to_string(), rhs, params: params.clone() })
    }

    /// Binds an expression's parameters and wraps it as a geometry.
    pub fn from_expr(expr: Expr, params: &BTreeMap<String, f64>) -> Result<Self> {
        if let Some(name) = expr.parameters().into_iter().find(|n| !params.contains_key(n)) {
            return Err(Error::UnboundParameter { name });
        }
        Ok(SecondOrderOde { name: expr.to_string(), rhs: Rhs::Expr(expr), params: params.clone() })
    }

    /// Parses `source` and binds it.
    pub fn from_source(source: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        SecondOrderOde::from_expr(expr::parse(source)?, params)
    }

    /// Same geometry with a new parameter map, without re-parsing.
    pub fn with_params(&self, params: &BTreeMap<String, f64>) -> Result<Self> {
        match &self.rhs {
            Rhs::Expr(e) => SecondOrderOde::from_expr(e.clone(), params),
            _ => SecondOrderOde::builtin(&self.name, params),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    /// `f` and its truncated partials at `(x, y, p)`.
    pub fn eval_jet(&self, x: f64, y: f64, p: f64) -> Result<Jet> {
        let jet = match &self.rhs {
            Rhs::Flat => Jet::constant(0.0),
            Rhs::Hooke => {
                let u = Jet::variable(Var::X, x) * Jet::variable(Var::P, p) - Jet::variable(Var::Y, y);
                u.powi(3)
            }
            Rhs::PolyP(coeffs) => {
                let pj = Jet::variable(Var::P, p);
                coeffs.iter().rev().fold(Jet::constant(0.0), |acc, a| acc * pj + *a)
            }
            Rhs::Expr(e) => e.eval::<Jet>(x, y, p, &self.params)?,
        };
        if !jet.is_finite() {
            return Err(Error::Domain(format!("f is not finite at ({x}, {y}, {p})")));
        }
        Ok(jet)
    }

    pub fn partials(&self, x: f64, y: f64, p: f64) -> Result<Partials> {
        Ok(self.eval_jet(x, y, p)?.partials())
    }

    /// Plain value `f(x, y, p)`.
    pub fn value(&self, x: f64, y: f64, p: f64) -> Result<f64> {
        match &self.rhs {
            Rhs::Expr(e) => {
                let v: f64 = e.eval(x, y, p, &self.params)?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Domain(format!("f is not finite at ({x}, {y}, {p})")))
                }
            }
            _ => Ok(self.eval_jet(x, y, p)?.value()),
        }
    }
}

fn poly_coefficients(params: &BTreeMap<String, f64>) -> Result<Vec<f64>> {
    let mut coeffs = Vec::new();
    for (name, value) in params {
        let k: usize = name
            .strip_prefix('a')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Config(format!("poly-p takes parameters a0, a1, ...; got `{name}`")))?;
        if coeffs.len() <= k {
            coeffs.resize(k + 1, 0.0);
        }
        coeffs[k] = *value;
    }
    Ok(coeffs)
}

/// Free-function form of [`SecondOrderOde::eval_jet`].
pub fn eval_jet(geom: &SecondOrderOde, x: f64, y: f64, p: f64) -> Result<Jet> {
    geom.eval_jet(x, y, p)
}

/// Sampled projectivity test: `|f_pppp| ≤ tol` at every sample point.
///
/// A geometry is projective iff `f` is a polynomial of degree ≤ 3 in `p`;
/// this only checks the fourth `p`-derivative at the given points.
pub fn is_cubic_in_p(geom: &SecondOrderOde, samples: &[(f64, f64, f64)], tol: f64) -> Result<bool> {
    if samples.is_empty() {
        return Err(Error::Config("is_cubic_in_p needs at least one sample point".into()));
    }
    for &(x, y, p) in samples {
        if geom.partials(x, y, p)?.f_pppp.abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_is_zero_everywhere() {
        let j = SecondOrderOde::flat().eval_jet(1.3, -2.0, 0.4).unwrap();
        assert_eq!(j.partials(), Partials::default());
    }

    #[test]
    fn hooke_matches_finite_differences() {
        let g = SecondOrderOde::hooke();
        let part = g.partials(1.0, 0.0, 1.0).unwrap();
        assert_eq!((part.f, part.f_p, part.f_pp, part.f_ppp, part.f_pppp), (1.0, 3.0, 6.0, 6.0, 0.0));
        let h = 1e-5;
        let f = |p: f64| g.value(1.0, 0.0, p).unwrap();
        let fd_p = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        let fd_pp = (f(1.0 + h) - 2.0 * f(1.0) + f(1.0 - h)) / (h * h);
        assert!((fd_p - 3.0).abs() < 1e-8);
        assert!((fd_pp - 6.0).abs() < 1e-4);
    }

    #[test]
    fn poly_p_coefficients() {
        let g = SecondOrderOde::poly_p(&[1.0, 0.0, 0.0, 0.0, 1.0]);
        let part = g.partials(0.0, 0.0, 1.0).unwrap();
        assert_eq!(part.f, 2.0);
        assert_eq!(part.f_pppp, 24.0);
        let mut params = BTreeMap::new();
        params.insert("b1".to_string(), 1.0);
        assert!(SecondOrderOde::builtin("poly-p", &params).is_err());
    }

    #[test]
    fn cubicity() {
        let pts = [(0.0, 0.0, 0.0), (1.0, -1.0, 2.0), (0.3, 0.2, -0.7)];
        assert!(is_cubic_in_p(&SecondOrderOde::flat(), &pts, 1e-12).unwrap());
        assert!(is_cubic_in_p(&SecondOrderOde::hooke(), &pts, 1e-9).unwrap());
        let quartic = SecondOrderOde::from_source("p^4", &BTreeMap::new()).unwrap();
        assert!(!is_cubic_in_p(&quartic, &pts, 1e-9).unwrap());
        assert!(is_cubic_in_p(&quartic, &[], 1e-9).is_err());
    }

    #[test]
    fn unbound_parameter_and_rebinding() {
        let e = expr::parse("a*p^2").unwrap();
        assert_eq!(
            SecondOrderOde::from_expr(e.clone(), &BTreeMap::new()),
            Err(Error::UnboundParameter { name: "a".into() })
        );
        let mut params = BTreeMap::new();
        params.insert("a".to_string(), 2.0);
        let g = SecondOrderOde::from_expr(e, &params).unwrap();
        assert_eq!(g.value(0.0, 0.0, 3.0).unwrap(), 18.0);
        params.insert("a".to_string(), -1.0);
        assert_eq!(g.with_params(&params).unwrap().value(0.0, 0.0, 3.0).unwrap(), -9.0);
    }

    #[test]
    fn domain_errors_propagate() {
        let g = SecondOrderOde::from_source("log(y)", &BTreeMap::new()).unwrap();
        assert!(matches!(g.eval_jet(0.0, -1.0, 0.0), Err(Error::Domain(_))));
        assert!(g.eval_jet(0.0, 2.0, 0.0).is_ok());
    }

    #[test]
    fn unknown_builtin() {
        assert!(matches!(SecondOrderOde::builtin("round", &BTreeMap::new()), Err(Error::UnknownGeometry(_))));
    }
}
