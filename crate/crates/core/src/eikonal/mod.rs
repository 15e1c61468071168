//! Covariant (De Donder-Weyl) Hamilton-Jacobi side.
//!
//! An [`EikonalAnsatz`] holds the functions
//!
//! ```text
//! S^mu(A, x) = g^mu(x) + f^{mu nu}(x) A_nu + 1/2 Q^{mu, nu rho}(x) A_nu A_rho
//! ```
//!
//! and evaluates the DDW equation
//! `d_mu S^mu - 1/4 (dS^mu/dA_nu)(dS_mu/dA^nu) = 0`, where `d_mu` acts on the
//! explicit `x` dependence only. Field strengths are recovered through the
//! embedding `F^{mu nu} = -dS^{[mu}/dA_{nu]}` and admissible ansaetze satisfy
//! the polymomentum constraint `dS^{(mu}/dA_{nu)} = 0`.

mod characteristics;

pub use characteristics::{characteristics_evolve, trajectory_maxwell_residual};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exprs::ScalarExpr;
use crate::fields::SpacetimeSolution;
use crate::minkowski::{Conventions, Rank2, MAX_DIM};

/// `Q^{mu nu rho}` indexed `[mu][nu][rho]`.
pub type QuadraticCoefficients = Vec<Vec<Vec<ScalarExpr>>>;

/// Scalar polynomial of degree <= 2 in the potentials:
/// `c(A, x) = g(x) + f^nu(x) A_nu + 1/2 q^{nu rho}(x) A_nu A_rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPolynomial {
    pub g: ScalarExpr,
    pub f: Vec<ScalarExpr>,
    pub q: Option<Vec<Vec<ScalarExpr>>>,
}

impl PotentialPolynomial {
    pub fn eval(&self, a: &[f64], x: &[f64]) -> f64 {
        let mut v = self.g.eval(x);
        for (nu, f) in self.f.iter().enumerate() {
            if !f.is_trivially_zero() {
                v += f.eval(x) * a[nu];
            }
        }
        if let Some(q) = &self.q {
            for (nu, row) in q.iter().enumerate() {
                for (rho, e) in row.iter().enumerate() {
                    if !e.is_trivially_zero() {
                        v += 0.5 * e.eval(x) * a[nu] * a[rho];
                    }
                }
            }
        }
        v
    }

    /// Explicit partial derivative in `x^mu` at fixed potentials.
    pub fn partial(&self, mu: usize) -> Self {
        Self {
            g: self.g.partial(mu),
            f: self.f.iter().map(|e| e.partial(mu)).collect(),
            q: self
                .q
                .as_ref()
                .map(|q| q.iter().map(|r| r.iter().map(|e| e.partial(mu)).collect()).collect()),
        }
    }

    fn sum(items: Vec<Self>, dim: usize) -> Self {
        let has_q = items.iter().any(|p| p.q.is_some());
        Self {
            g: ScalarExpr::sum(items.iter().map(|p| p.g.clone())),
            f: (0..dim)
                .map(|nu| ScalarExpr::sum(items.iter().map(|p| p.f[nu].clone())))
                .collect(),
            q: has_q.then(|| {
                (0..dim)
                    .map(|nu| {
                        (0..dim)
                            .map(|rho| {
                                ScalarExpr::sum(
                                    items.iter().filter_map(|p| p.q.as_ref().map(|q| q[nu][rho].clone())),
                                )
                            })
                            .collect()
                    })
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EikonalAnsatz {
    dim: usize,
    rows: Vec<PotentialPolynomial>,
    /// `d_mu S^mu` at fixed `A`.
    divergence: PotentialPolynomial,
    /// `d_i S^i` at fixed `A`, spatial indices only.
    spatial_divergence: PotentialPolynomial,
    /// `d_0 S^0` at fixed `A`.
    time_derivative: PotentialPolynomial,
}

impl EikonalAnsatz {
    /// `g[mu]`, `f[mu][nu]`, and optionally `q[mu][nu][rho]` (symmetric in `nu, rho`).
    pub fn new(
        g: Vec<ScalarExpr>,
        f: Vec<Vec<ScalarExpr>>,
        q: Option<QuadraticCoefficients>,
    ) -> Result<Self> {
        let dim = Conventions::new(g.len())?.dim();
        if f.len() != dim || f.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("f must be a dim x dim array".into()));
        }
        if let Some(q) = &q {
            if q.len() != dim || q.iter().any(|m| m.len() != dim || m.iter().any(|r| r.len() != dim)) {
                return Err(Error::InvalidArgument("Q must be a dim x dim x dim array".into()));
            }
            for (mu, m) in q.iter().enumerate() {
                for nu in 0..dim {
                    for rho in nu + 1..dim {
                        if m[nu][rho] != m[rho][nu] {
                            return Err(Error::InvalidArgument(format!(
                                "Q^({mu},{nu}{rho}) is not symmetric in its last two labels"
                            )));
                        }
                    }
                }
            }
        }
        let all = g
            .iter()
            .chain(f.iter().flatten())
            .chain(q.iter().flatten().flatten().flatten());
        if let Some(axis) = all.filter_map(|e| e.max_axis()).max() {
            if axis >= dim {
                return Err(Error::IndexOutOfRange { index: axis, dim });
            }
        }
        let rows: Vec<PotentialPolynomial> = (0..dim)
            .map(|mu| PotentialPolynomial {
                g: g[mu].clone(),
                f: f[mu].clone(),
                q: q.as_ref().map(|q| q[mu].clone()),
            })
            .collect();
        let divergence = PotentialPolynomial::sum((0..dim).map(|mu| rows[mu].partial(mu)).collect(), dim);
        let spatial_divergence =
            PotentialPolynomial::sum((1..dim).map(|i| rows[i].partial(i)).collect(), dim);
        let time_derivative = rows[0].partial(0);
        Ok(Self { dim, rows, divergence, spatial_divergence, time_derivative })
    }

    /// Builds a quadratic part from a closure, symmetrizing the last two labels.
    pub fn symmetric_q(
        dim: usize,
        mut entry: impl FnMut(usize, usize, usize) -> ScalarExpr,
    ) -> QuadraticCoefficients {
        let mut q = vec![vec![vec![ScalarExpr::zero(); dim]; dim]; dim];
        for mu in 0..dim {
            for nu in 0..dim {
                for rho in nu..dim {
                    let e = entry(mu, nu, rho);
                    q[mu][nu][rho] = e.clone();
                    q[mu][rho][nu] = e;
                }
            }
        }
        q
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(
            vec![ScalarExpr::zero(); dim],
            vec![vec![ScalarExpr::zero(); dim]; dim],
            None,
        )
    }

    /// Exact linear solution embedding the uniform field `A_1 = -E x^0`.
    pub fn constant_electric(dim: usize, e: f64) -> Result<Self> {
        Self::build_linear_solution(&SpacetimeSolution::constant_electric(dim, e)?)
    }

    /// Exact linear solution embedding a lattice-periodic null plane wave.
    pub fn plane_wave(dim: usize, amplitude: f64, modes: &[i64], length: f64) -> Result<Self> {
        Self::build_linear_solution(&SpacetimeSolution::plane_wave(dim, amplitude, modes, length)?)
    }

    /// Linear ansatz `f^{mu nu} = -Fbar^{mu nu}`, `g^i = 0`,
    /// `g^0 = int_0^{x^0} (1/4) Fbar^{mu nu} Fbar_{mu nu}`.
    ///
    /// With `Q = 0` the DDW equation splits into `d_mu f^{mu nu} = 0` (the
    /// Maxwell equations for `Fbar`) and `d_mu g^mu = (1/4) f^{mu nu} f_{mu nu}`.
    pub fn build_linear_solution(sol: &SpacetimeSolution) -> Result<Self> {
        let dim = sol.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d61_7877);
        let points: Vec<[f64; MAX_DIM]> = (0..64)
            .map(|_| {
                let mut x = [0.0; MAX_DIM];
                for v in x.iter_mut().take(dim) {
                    *v = rng.random_range(-2.0..2.0);
                }
                x
            })
            .collect();
        let residual = sol.maxwell_residual(&points).into_iter().fold(0.0, f64::max);
        if residual > 1e-12 {
            return Err(Error::NotAMaxwellSolution { residual });
        }
        let upper = sol.field_strength_upper_exprs();
        let mut f = vec![vec![ScalarExpr::zero(); dim]; dim];
        for mu in 0..dim {
            for nu in mu + 1..dim {
                let v = -upper[mu][nu].clone();
                f[nu][mu] = -v.clone();
                f[mu][nu] = v;
            }
        }
        let mut g = vec![ScalarExpr::zero(); dim];
        g[0] = sol.invariant_expr().time_antiderivative()?;
        Self::new(g, f, None)
    }

    /// Same ansatz with `g^0` multiplied by `factor`.
    pub fn with_scaled_g0(&self, factor: f64) -> Self {
        let (g, f, q) = self.parts();
        let mut g = g;
        g[0] = g[0].clone().scale(factor);
        Self::new(g, f, q).expect("shape unchanged")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[PotentialPolynomial] {
        &self.rows
    }

    pub fn is_linear(&self) -> bool {
        self.rows.iter().all(|r| r.q.is_none())
    }

    pub fn g(&self, mu: usize) -> &ScalarExpr {
        &self.rows[mu].g
    }

    pub fn f(&self, mu: usize, nu: usize) -> &ScalarExpr {
        &self.rows[mu].f[nu]
    }

    pub fn q(&self, mu: usize, nu: usize, rho: usize) -> Option<&ScalarExpr> {
        self.rows[mu].q.as_ref().map(|q| &q[nu][rho])
    }

    pub fn parts(&self) -> (Vec<ScalarExpr>, Vec<Vec<ScalarExpr>>, Option<QuadraticCoefficients>) {
        let g = self.rows.iter().map(|r| r.g.clone()).collect();
        let f = self.rows.iter().map(|r| r.f.clone()).collect();
        let q = if self.is_linear() {
            None
        } else {
            Some(
                self.rows
                    .iter()
                    .map(|r| {
                        r.q.clone()
                            .unwrap_or_else(|| vec![vec![ScalarExpr::zero(); self.dim]; self.dim])
                    })
                    .collect(),
            )
        };
        (g, f, q)
    }

    /// `S^mu(A, x)`.
    pub fn eval_s(&self, a: &[f64], x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.eval(a, x)).collect()
    }

    /// `T^{mu nu} = dS^mu/dA_nu = f^{mu nu} + Q^{mu, nu rho} A_rho`.
    pub fn ds_da(&self, a: &[f64], x: &[f64]) -> Rank2 {
        let d = self.dim;
        let mut t = Rank2::zeros(d);
        for (mu, row) in self.rows.iter().enumerate() {
            for nu in 0..d {
                let mut v = if row.f[nu].is_trivially_zero() { 0.0 } else { row.f[nu].eval(x) };
                if let Some(q) = &row.q {
                    for rho in 0..d {
                        if !q[nu][rho].is_trivially_zero() {
                            v += q[nu][rho].eval(x) * a[rho];
                        }
                    }
                }
                t[(mu, nu)] = v;
            }
        }
        t
    }

    /// Single entry `T^{mu nu}` without building the whole array.
    pub fn ds_da_entry(&self, mu: usize, nu: usize, a: &[f64], x: &[f64]) -> f64 {
        let row = &self.rows[mu];
        let mut v = row.f[nu].eval(x);
        if let Some(q) = &row.q {
            for rho in 0..self.dim {
                v += q[nu][rho].eval(x) * a[rho];
            }
        }
        v
    }

    /// `d_mu S^mu` with `A` held fixed.
    pub fn divergence(&self, a: &[f64], x: &[f64]) -> f64 {
        self.divergence.eval(a, x)
    }

    /// `d_i S^i` with `A` held fixed.
    pub fn spatial_divergence(&self, a: &[f64], x: &[f64]) -> f64 {
        self.spatial_divergence.eval(a, x)
    }

    /// `d_0 S^0` with `A` held fixed.
    pub fn time_derivative_s0(&self, a: &[f64], x: &[f64]) -> f64 {
        self.time_derivative.eval(a, x)
    }

    /// `d_mu S^mu - 1/4 (dS^mu/dA_nu)(dS_mu/dA^nu)`.
    pub fn ddw_residual(&self, a: &[f64], x: &[f64]) -> f64 {
        self.divergence(a, x) - 0.25 * self.ds_da(a, x).minkowski_square()
    }

    /// Symmetric part of `dS/dA`; vanishes for admissible ansaetze.
    pub fn constraint_residual(&self, a: &[f64], x: &[f64]) -> Rank2 {
        self.ds_da(a, x).sym()
    }

    /// `F^{mu nu} = -dS^{[mu}/dA_{nu]}`.
    pub fn embed_field_strength(&self, a: &[f64], x: &[f64]) -> Rank2 {
        -self.ds_da(a, x).antisym()
    }

    /// Symbolic admissibility: `f^{mu nu} + f^{nu mu} = 0` and
    /// `Q^{mu, nu rho} + Q^{nu, mu rho} = 0` identically.
    pub fn check_admissible(&self) -> Result<()> {
        let d = self.dim;
        for mu in 0..d {
            for nu in mu..d {
                let s = self.rows[mu].f[nu].clone() + self.rows[nu].f[mu].clone();
                if !s.is_zero() {
                    return Err(Error::InadmissibleAnsatz(format!("f^({mu}{nu}) has a symmetric part")));
                }
                for rho in 0..d {
                    let a = self.q(mu, nu, rho).cloned().unwrap_or_default();
                    let b = self.q(nu, mu, rho).cloned().unwrap_or_default();
                    if !(a + b).is_zero() {
                        return Err(Error::InadmissibleAnsatz(format!(
                            "Q^({mu}{nu}),{rho} has a symmetric part"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_admissible(&self) -> bool {
        self.check_admissible().is_ok()
    }

    pub fn is_spatially_periodic(&self, length: f64) -> bool {
        let (g, f, q) = self.parts();
        g.iter()
            .chain(f.iter().flatten())
            .chain(q.iter().flatten().flatten().flatten())
            .all(|e| e.is_spatially_periodic(self.dim, length))
    }
}
