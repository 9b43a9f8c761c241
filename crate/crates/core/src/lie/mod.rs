//! Homogeneous examples: Euler–Arnold dynamics `Ṗ = ±(ad_X)ᵗ P`, `X = A⁻¹P`,
//! on 4-dimensional Lie algebras `𝔤₀ ⊕ ℝ`, with group reconstruction
//! `ġ = g X` and the closed forms of each example.

pub mod circles;
pub mod displayed;
pub mod flat;
pub mod hooke;
pub mod horocycle;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::integrate::{self, CurveSample, IntegrationConfig, IvpProblem};

/// Registry keys accepted by [`LieAlgebraModel::by_name`].
pub const MODEL_NAMES: [&str; 5] = ["flat-heisenberg", "flat-se2", "circles-se2", "hooke-sl2", "horocycle"];

/// Three-dimensional factor of the algebra; the fourth basis vector is central.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algebra {
    /// `[E₁, E₂] = E₃`
    Heisenberg,
    /// `[E₁, E₂] = E₃`, `[E₁, E₃] = −E₂`
    Se2,
    /// `[E₁, E₂] = 2E₂`, `[E₁, E₃] = −2E₃`, `[E₂, E₃] = E₁`
    Sl2,
}

impl Algebra {
    fn brackets(self) -> &'static [(usize, usize, usize, f64)] {
        match self {
            Algebra::Heisenberg => &[(0, 1, 2, 1.0)],
            Algebra::Se2 => &[(0, 1, 2, 1.0), (0, 2, 1, -1.0)],
            Algebra::Sl2 => &[(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)],
        }
    }

    /// Matrix realization of `Σ xᵢEᵢ`.
    pub fn embed(self, x: &[f64; 4]) -> DMatrix<f64> {
        match self {
            Algebra::Heisenberg => DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.0, x[0], x[2], 0.0, //
                    0.0, 0.0, x[1], 0.0, //
                    0.0, 0.0, 0.0, 0.0, //
                    0.0, 0.0, 0.0, x[3],
                ],
            ),
            Algebra::Se2 => DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.0, -x[0], x[1], 0.0, //
                    x[0], 0.0, x[2], 0.0, //
                    0.0, 0.0, 0.0, 0.0, //
                    0.0, 0.0, 0.0, x[3],
                ],
            ),
            Algebra::Sl2 => DMatrix::from_row_slice(
                3,
                3,
                &[
                    x[0], x[1], 0.0, //
                    x[2], -x[0], 0.0, //
                    0.0, 0.0, x[3],
                ],
            ),
        }
    }

    pub fn matrix_dim(self) -> usize {
        match self {
            Algebra::Sl2 => 3,
            _ => 4,
        }
    }
}

/// The conserved quantity a model carries besides `H` and `P₄`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extra {
    /// `P₃`
    Center,
    /// `k = P₂² + P₃²`
    Se2Casimir,
    /// `r² = P₂² + P₃²`
    Radius,
    /// `k = P₁² + 4P₂P₃`
    Sl2Casimir,
}

impl Extra {
    fn name(self) -> &'static str {
        match self {
            Extra::Center => "P3",
            Extra::Se2Casimir | Extra::Sl2Casimir => "k",
            Extra::Radius => "r2",
        }
    }

    fn eval(self, p: &[f64; 4]) -> f64 {
        match self {
            Extra::Center => p[2],
            Extra::Se2Casimir | Extra::Radius => p[1] * p[1] + p[2] * p[2],
            Extra::Sl2Casimir => p[0] * p[0] + 4.0 * p[1] * p[2],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraModel {
    name: String,
    algebra: Algebra,
    /// `structure[i][j][k]`: coefficient of `E_k` in `[E_i, E_j]`.
    structure: [[[f64; 4]; 4]; 4],
    inertia: Matrix4<f64>,
    inertia_inv: Matrix4<f64>,
    /// `+1` for `Ṗ = (ad_X)ᵗP`, `−1` for `Ṗ = −(ad_X)ᵗP`.
    ad_sign: f64,
    extra: Extra,
}

fn sixths(rows: [[f64; 4]; 4]) -> Matrix4<f64> {
    Matrix4::from_fn(|i, j| rows[i][j] / 6.0)
}

impl LieAlgebraModel {
    pub fn new(name: &str, algebra: Algebra, inertia: Matrix4<f64>, ad_sign: f64) -> Result<Self> {
        let inertia_inv =
            inertia.try_inverse().ok_or_else(|| Error::Degenerate(format!("inertia of `{name}` is not invertible")))?;
        let mut structure = [[[0.0; 4]; 4]; 4];
        for &(i, j, k, v) in algebra.brackets() {
            structure[i][j][k] = v;
            structure[j][i][k] = -v;
        }
        let extra = match algebra {
            Algebra::Heisenberg => Extra::Center,
            Algebra::Se2 if name.starts_with("circles") => Extra::Radius,
            Algebra::Se2 => Extra::Se2Casimir,
            Algebra::Sl2 => Extra::Sl2Casimir,
        };
        Ok(LieAlgebraModel { name: name.to_string(), algebra, structure, inertia, inertia_inv, ad_sign, extra })
    }

    pub fn by_name(name: &str) -> Result<Self> {
        let flat = sixths([[0.0, 3.0, 0.0, 0.0], [3.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 2.0], [0.0, 0.0, 2.0, 0.0]]);
        let circles = sixths([[0.0, 0.0, 3.0, 0.0], [0.0, 3.0, 0.0, 2.0], [3.0, 0.0, 6.0, 0.0], [0.0, 2.0, 0.0, 0.0]]);
        let sl2 = sixths([[6.0, 0.0, 0.0, 2.0], [0.0, 0.0, 3.0, 0.0], [0.0, 3.0, 6.0, 0.0], [2.0, 0.0, 0.0, 0.0]]);
        match name {
            "flat-heisenberg" => LieAlgebraModel::new(name, Algebra::Heisenberg, flat, 1.0),
            "flat-se2" => LieAlgebraModel::new(name, Algebra::Se2, flat, 1.0),
            "circles-se2" => LieAlgebraModel::new(name, Algebra::Se2, circles, 1.0),
            "hooke-sl2" | "horocycle" => LieAlgebraModel::new(name, Algebra::Sl2, sl2, 1.0),
            _ => Err(Error::Config(format!("unknown model `{name}`; expected one of {}", MODEL_NAMES.join(", ")))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn algebra(&self) -> Algebra {
        self.algebra
    }

    pub fn inertia(&self) -> &Matrix4<f64> {
        &self.inertia
    }

    pub fn ad_sign(&self) -> f64 {
        self.ad_sign
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[i][j][k]
    }

    /// Largest component of `[[Eᵢ,Eⱼ],E_k] + cyclic` over all basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let c = &self.structure;
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for m in 0..4 {
                        let s: f64 = (0..4)
                            .map(|l| c[i][j][l] * c[l][k][m] + c[j][k][l] * c[l][i][m] + c[k][i][l] * c[l][j][m])
                            .sum();
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// Algebra element `X = A⁻¹P`.
    pub fn velocity(&self, p: &[f64; 4]) -> [f64; 4] {
        let x = self.inertia_inv * Vector4::from(*p);
        [x[0], x[1], x[2], x[3]]
    }

    /// Momentum `P = A X`.
    pub fn momentum(&self, x: &[f64; 4]) -> [f64; 4] {
        let p = self.inertia * Vector4::from(*x);
        [p[0], p[1], p[2], p[3]]
    }

    /// `Ṗ_j = sign · Σ_{i,k} Xⁱ c^k_{ij} P_k`.
    pub fn euler_rhs(&self, p: &[f64; 4]) -> [f64; 4] {
        let x = self.velocity(p);
        let mut out = [0.0; 4];
        for (j, out_j) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, xi) in x.iter().enumerate() {
                for (k, pk) in p.iter().enumerate() {
                    acc += xi * self.structure[i][j][k] * pk;
                }
            }
            *out_j = self.ad_sign * acc;
        }
        out
    }

    /// `H = ½⟨P, A⁻¹P⟩`.
    pub fn hamiltonian(&self, p: &[f64; 4]) -> f64 {
        let x = self.velocity(p);
        0.5 * p.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `H`, `P4` and the model's extra invariant.
    pub fn conserved(&self, p: &[f64; 4]) -> BTreeMap<String, f64> {
        self.conserved_names().iter().zip(self.conserved_values(p)).map(|(n, v)| (n.to_string(), v)).collect()
    }

    /// Values in the order of [`conserved_names`](Self::conserved_names).
    pub fn conserved_values(&self, p: &[f64; 4]) -> [f64; 3] {
        [self.hamiltonian(p), p[3], self.extra.eval(p)]
    }

    pub fn conserved_names(&self) -> [&'static str; 3] {
        ["H", "P4", self.extra.name()]
    }

    /// Integrates the Euler equations alone. States `P1..P4`, diagnostics are
    /// the drifts of the conserved quantities from their initial values.
    pub fn integrate_euler(&self, p0: [f64; 4], t1: f64, config: &IntegrationConfig) -> Result<CurveSample> {
        let rhs = |_t: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
            dv.copy_from_slice(&self.euler_rhs(&[v[0], v[1], v[2], v[3]]));
            Ok(())
        };
        let curve = integrate::integrate(&IvpProblem::new(rhs, 0.0, p0.to_vec(), t1), config)?;
        Ok(self.with_drifts(curve.rename_states(&["P1", "P2", "P3", "P4"]), p0))
    }

    fn with_drifts(&self, mut curve: CurveSample, p0: [f64; 4]) -> CurveSample {
        let c0 = self.conserved_values(&p0);
        for (i, name) in self.conserved_names().iter().enumerate() {
            curve.push_diag(&format!("{name}_drift"), |s| {
                self.conserved_values(&[s.state[0], s.state[1], s.state[2], s.state[3]])[i] - c0[i]
            });
        }
        curve
    }

    /// Solves `Ṗ = euler_rhs(P)`, `ġ = g·embed(A⁻¹P)` from `(p0, g0)`.
    pub fn reconstruct(
        &self,
        p0: [f64; 4],
        g0: &DMatrix<f64>,
        t1: f64,
        config: &IntegrationConfig,
    ) -> Result<GroupTrajectory> {
        let n = self.algebra.matrix_dim();
        if g0.nrows() != n || g0.ncols() != n {
            return Err(Error::Config(format!("{}: initial group element must be {n}x{n}", self.name)));
        }
        let algebra = self.algebra;
        let rhs = |_t: f64, v: &[f64], dv: &mut [f64]| -> Result<()> {
            let p = [v[0], v[1], v[2], v[3]];
            dv[..4].copy_from_slice(&self.euler_rhs(&p));
            let g = DMatrix::from_row_slice(n, n, &v[4..]);
            let gx = g * algebra.embed(&self.velocity(&p));
            for (i, row) in gx.row_iter().enumerate() {
                for (j, value) in row.iter().enumerate() {
                    dv[4 + i * n + j] = *value;
                }
            }
            Ok(())
        };
        let mut y0 = p0.to_vec();
        for row in g0.row_iter() {
            y0.extend(row.iter());
        }
        let curve = integrate::integrate(&IvpProblem::new(rhs, 0.0, y0, t1), config)?;
        let mut names: Vec<String> = ["P1", "P2", "P3", "P4"].map(String::from).to_vec();
        for i in 0..n {
            for j in 0..n {
                names.push(format!("g{}{}", i + 1, j + 1));
            }
        }
        let mut curve = self.with_drifts(curve, p0);
        curve.state_names = names;
        // Upper-left 2×2 block: unipotent, rotation or SL₂ part.
        let block = 2;
        let det0 = g0.view((0, 0), (block, block)).determinant();
        curve.push_diag("det_drift", |s| {
            let g = DMatrix::from_row_slice(n, n, &s.state[4..]);
            g.view((0, 0), (block, block)).determinant() - det0
        });
        Ok(GroupTrajectory { curve, dim: n })
    }
}

/// Time-stamped group elements with the momentum trajectory they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupTrajectory {
    pub curve: CurveSample,
    pub dim: usize,
}

impl GroupTrajectory {
    pub fn len(&self) -> usize {
        self.curve.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curve.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.curve.points[i].t
    }

    pub fn momentum(&self, i: usize) -> [f64; 4] {
        let s = &self.curve.points[i].state;
        [s[0], s[1], s[2], s[3]]
    }

    pub fn element(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.curve.points[i].state[4..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_and_jacobi() {
        for name in MODEL_NAMES {
            let m = LieAlgebraModel::by_name(name).unwrap();
            assert!(m.jacobi_residual() < 1e-14, "{name}");
            assert_eq!(m.inertia(), &m.inertia().transpose());
        }
        assert!(LieAlgebraModel::by_name("kepler").is_err());
    }

    #[test]
    fn embedding_is_a_representation() {
        for algebra in [Algebra::Heisenberg, Algebra::Se2, Algebra::Sl2] {
            let m = LieAlgebraModel::new("t", algebra, Matrix4::identity(), 1.0).unwrap();
            let basis = |i: usize| {
                let mut x = [0.0; 4];
                x[i] = 1.0;
                x
            };
            for i in 0..4 {
                for j in 0..4 {
                    let (a, b) = (algebra.embed(&basis(i)), algebra.embed(&basis(j)));
                    let mut c = [0.0; 4];
                    for (k, ck) in c.iter_mut().enumerate() {
                        *ck = m.structure_constant(i, j, k);
                    }
                    assert_eq!(&a * &b - &b * &a, algebra.embed(&c), "{algebra:?} [{i},{j}]");
                }
            }
        }
    }

    #[test]
    fn sl2_values() {
        let m = LieAlgebraModel::by_name("hooke-sl2").unwrap();
        assert_eq!(m.euler_rhs(&[0.0, 1.0, 0.0, 0.0]), [8.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.euler_rhs(&[0.0; 4]), [0.0; 4]);
        let c = m.conserved(&[1.0, 0.0, 0.0, 0.0]);
        assert_eq!((c["k"], c["H"], c["P4"]), (1.0, 0.0, 0.0));
        assert_eq!(m.conserved(&[0.0, 1.0, 0.0, 0.0])["H"], -2.0);
    }

    #[test]
    fn constant_momentum_zero_keeps_identity() {
        let m = LieAlgebraModel::by_name("circles-se2").unwrap();
        let g0 = DMatrix::identity(4, 4);
        let traj = m.reconstruct([0.0; 4], &g0, 1.0, &IntegrationConfig::dp54(1e-10, 1e-10)).unwrap();
        assert_eq!(traj.element(traj.len() - 1), g0);
    }
}
