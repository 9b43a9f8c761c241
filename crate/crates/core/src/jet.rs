//! Truncated multivariate Taylor jets in the variables `(x, y, p)`.
//!
//! A [`Jet`] stores Taylor coefficients on the index set
//! `T = {(i, j, k) : i ≤ 1, j ≤ 1, k ≤ 4, i + j ≤ 1}`, i.e. up to fourth order
//! in `p`, optionally times one factor of `x` or `y`. Mixed `x·y` terms and
//! second derivatives in `x` or `y` are dropped. Arithmetic is exact on every
//! retained coefficient.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Highest retained order in `p`.
pub const P_ORDER: usize = 4;
const N: usize = P_ORDER + 1;
/// Highest total degree of a retained monomial (`x·p⁴`).
const MAX_DEGREE: usize = P_ORDER + 1;

/// Which of the three base variables a jet seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    P,
}

/// Truncated Taylor expansion of a function of `(x, y, p)`.
///
/// `base[k]`, `dx[k]`, `dy[k]` are the coefficients of `p^k`, `x·p^k` and
/// `y·p^k` (Taylor coefficients, not derivatives: divide by `k!`).
#[derive(Clone, Copy, PartialEq)]
pub struct Jet {
    base: [f64; N],
    dx: [f64; N],
    dy: [f64; N],
}

/// Every partial of `f` that the chain equations, the Fefferman metric and
/// the cubicity test use.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Partials {
    pub f: f64,
    pub f_x: f64,
    pub f_y: f64,
    pub f_p: f64,
    pub f_pp: f64,
    pub f_ppp: f64,
    pub f_pppp: f64,
    pub f_xp: f64,
    pub f_xpp: f64,
    pub f_yp: f64,
    pub f_ypp: f64,
}

const FACT: [f64; 7] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];

impl Jet {
    pub const fn constant(value: f64) -> Self {
        let mut base = [0.0; N];
        base[0] = value;
        Jet { base, dx: [0.0; N], dy: [0.0; N] }
    }

    /// Seeds the independent variable `var` at `value`.
    pub fn variable(var: Var, value: f64) -> Self {
        let mut j = Jet::constant(value);
        match var {
            Var::X => j.dx[0] = 1.0,
            Var::Y => j.dy[0] = 1.0,
            Var::P => j.base[1] = 1.0,
        }
        j
    }

    pub fn value(&self) -> f64 {
        self.base[0]
    }

    /// Taylor coefficient of `x^i y^j p^k`, or `None` outside the index set.
    pub fn coefficient(&self, i: usize, j: usize, k: usize) -> Option<f64> {
        if k > P_ORDER {
            return None;
        }
        match (i, j) {
            (0, 0) => Some(self.base[k]),
            (1, 0) => Some(self.dx[k]),
            (0, 1) => Some(self.dy[k]),
            _ => None,
        }
    }

    /// Partial derivative `∂x^i ∂y^j ∂p^k f`, or `None` outside the index set.
    pub fn derivative(&self, i: usize, j: usize, k: usize) -> Option<f64> {
        self.coefficient(i, j, k).map(|c| c * FACT[k])
    }

    pub fn partials(&self) -> Partials {
        let d = |i, j, k| self.derivative(i, j, k).unwrap_or(0.0);
        Partials {
            f: d(0, 0, 0),
            f_x: d(1, 0, 0),
            f_y: d(0, 1, 0),
            f_p: d(0, 0, 1),
            f_pp: d(0, 0, 2),
            f_ppp: d(0, 0, 3),
            f_pppp: d(0, 0, 4),
            f_xp: d(1, 0, 1),
            f_xpp: d(1, 0, 2),
            f_yp: d(0, 1, 1),
            f_ypp: d(0, 1, 2),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.base.iter().chain(self.dx.iter()).chain(self.dy.iter()).all(|v| v.is_finite())
    }

    fn zero() -> Self {
        Jet::constant(0.0)
    }

    fn scale(mut self, s: f64) -> Self {
        for k in 0..N {
            self.base[k] *= s;
            self.dx[k] *= s;
            self.dy[k] *= s;
        }
        self
    }

    /// Evaluates `φ(self)` given `derivs[n] = φ⁽ⁿ⁾(self.value())`.
    ///
    /// The non-constant part `δ` is nilpotent: `δ^(MAX_DEGREE+1) = 0` on `T`.
    fn compose(&self, derivs: &[f64; MAX_DEGREE + 1]) -> Self {
        let mut delta = *self;
        delta.base[0] = 0.0;
        let mut out = Jet::constant(derivs[0]);
        let mut power = Jet::constant(1.0);
        for (n, d) in derivs.iter().enumerate().skip(1) {
            power = power * delta;
            if *d != 0.0 {
                out = out + power.scale(d / FACT[n]);
            }
        }
        out
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s, -c, s, c])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c, s, c, -s])
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        self.compose(&[e; MAX_DEGREE + 1])
    }

    pub fn ln(&self) -> Result<Self> {
        let u = self.value();
        if !(u > 0.0) {
            return Err(Error::Domain(format!("log of non-positive value {u}")));
        }
        let r = 1.0 / u;
        Ok(self.compose(&[u.ln(), r, -r * r, 2.0 * r.powi(3), -6.0 * r.powi(4), 24.0 * r.powi(5)]))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let u = self.value();
        if !(u > 0.0) {
            return Err(Error::Domain(format!("sqrt of non-positive value {u}")));
        }
        let s = u.sqrt();
        let r = 1.0 / u;
        Ok(self.compose(&[
            s,
            0.5 * s * r,
            -0.25 * s * r * r,
            0.375 * s * r.powi(3),
            -0.9375 * s * r.powi(4),
            3.281_25 * s * r.powi(5),
        ]))
    }

    pub fn recip(&self) -> Result<Self> {
        let u = self.value();
        if u == 0.0 || !u.is_finite() {
            return Err(Error::Domain(format!("division by {u}")));
        }
        let r = 1.0 / u;
        Ok(self.compose(&[r, -r * r, 2.0 * r.powi(3), -6.0 * r.powi(4), 24.0 * r.powi(5), -120.0 * r.powi(6)]))
    }

    pub fn checked_div(&self, rhs: &Jet) -> Result<Self> {
        Ok(*self * rhs.recip()?)
    }

    pub fn tan(&self) -> Result<Self> {
        let c = self.cos();
        self.sin().checked_div(&c).map_err(|_| Error::Domain(format!("tan at pole {}", self.value())))
    }

    pub fn sec(&self) -> Result<Self> {
        self.cos().recip().map_err(|_| Error::Domain(format!("sec at pole {}", self.value())))
    }

    /// Integer power by repeated squaring; exact on `T`.
    pub fn powi(&self, n: u32) -> Self {
        let mut result = Jet::constant(1.0);
        let mut base = *self;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base;
            }
            e >>= 1;
            if e > 0 {
                base = base * base;
            }
        }
        result
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::zero()
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet").field("p", &self.base).field("x*p", &self.dx).field("y*p", &self.dy).finish()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for k in 0..N {
            self.base[k] += rhs.base[k];
            self.dx[k] += rhs.dx[k];
            self.dy[k] += rhs.dy[k];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut out = Jet::zero();
        for a in 0..N {
            for b in 0..N - a {
                out.base[a + b] += self.base[a] * rhs.base[b];
                out.dx[a + b] += self.base[a] * rhs.dx[b] + self.dx[a] * rhs.base[b];
                out.dy[a + b] += self.base[a] * rhs.dy[b] + self.dy[a] * rhs.base[b];
            }
        }
        out
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.base[0] += rhs;
        self
    }
}
