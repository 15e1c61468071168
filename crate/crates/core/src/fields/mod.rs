//! Reference Maxwell solutions, lattice configurations and the FDTD
//! reference evolver.

mod config;
mod fdtd;
mod lattice;

pub use config::{spatial_field_strength, FieldConfiguration, SpatialFieldStrength};
pub use fdtd::{fdtd_step, gauss_divergence, MaxwellState};
pub use lattice::{pairwise_sum, Lattice, LatticeMeta};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exprs::ScalarExpr;
use crate::minkowski::{Conventions, Rank2, MAX_DIM};

/// Analytic potentials `A_mu(x)`, one expression per component.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeSolution {
    conv: Conventions,
    potentials: Vec<ScalarExpr>,
    /// `F_{mu nu}`, both indices down. The lower triangle is the negated
    /// upper triangle, so antisymmetry holds exactly at every point.
    strength: Vec<Vec<ScalarExpr>>,
}

impl SpacetimeSolution {
    pub fn new(potentials: Vec<ScalarExpr>) -> Result<Self> {
        let conv = Conventions::new(potentials.len())?;
        let d = conv.dim();
        if let Some(axis) = potentials.iter().filter_map(|e| e.max_axis()).max() {
            if axis >= d {
                return Err(Error::IndexOutOfRange { index: axis, dim: d });
            }
        }
        let mut strength = vec![vec![ScalarExpr::zero(); d]; d];
        for mu in 0..d {
            for nu in mu + 1..d {
                let f = potentials[nu].partial(mu) - potentials[mu].partial(nu);
                strength[nu][mu] = -f.clone();
                strength[mu][nu] = f;
            }
        }
        Ok(Self { conv, potentials, strength })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(vec![ScalarExpr::zero(); dim])
    }

    /// Uniform electric field: `A_1 = -E x^0`, so `F_{01} = -E`.
    pub fn constant_electric(dim: usize, e: f64) -> Result<Self> {
        let mut a = vec![ScalarExpr::zero(); dim];
        Conventions::new(dim)?;
        a[1] = ScalarExpr::coord(0).scale(-e);
        Self::new(a)
    }

    /// Uniform magnetic field: `A_2 = B x^1`, so `F_{12} = B`.
    ///
    /// Not periodic in `x^1`; suitable for analytic checks only.
    pub fn constant_magnetic(dim: usize, b: f64) -> Result<Self> {
        if dim < 3 {
            return Err(Error::InvalidArgument("a magnetic field needs at least two spatial axes".into()));
        }
        let mut a = vec![ScalarExpr::zero(); dim];
        a[2] = ScalarExpr::coord(1).scale(b);
        Self::new(a)
    }

    /// Lattice-periodic null plane wave `A_i = a e_i cos(k.x - |k| x^0)`
    /// with `k_i = 2 pi m_i / length` and a unit polarization `e` orthogonal
    /// to `k`, in temporal gauge.
    pub fn plane_wave(dim: usize, amplitude: f64, modes: &[i64], length: f64) -> Result<Self> {
        let conv = Conventions::new(dim)?;
        let ns = conv.spatial_dim();
        if modes.len() > ns {
            return Err(Error::InvalidArgument(format!(
                "{} mode numbers given for {ns} spatial axes",
                modes.len()
            )));
        }
        let mut k = [0.0; MAX_DIM];
        for (i, m) in modes.iter().enumerate() {
            k[i + 1] = 2.0 * PI * *m as f64 / length;
        }
        let nonzero: Vec<usize> = (1..dim).filter(|&i| k[i] != 0.0).collect();
        let mut pol = [0.0; MAX_DIM];
        match nonzero.as_slice() {
            [] => return Err(Error::InvalidArgument("plane wave needs a nonzero mode number".into())),
            [a] => {
                if ns < 2 {
                    return Err(Error::InvalidArgument(
                        "a transverse polarization needs at least two spatial axes".into(),
                    ));
                }
                pol[a % ns + 1] = 1.0;
            }
            [a, b, ..] => {
                let norm = k[*a].hypot(k[*b]);
                pol[*a] = -k[*b] / norm;
                pol[*b] = k[*a] / norm;
            }
        }
        let omega = (1..dim).map(|i| k[i] * k[i]).sum::<f64>().sqrt();
        k[0] = -omega;
        let mut a = vec![ScalarExpr::zero(); dim];
        for i in 1..dim {
            if pol[i] != 0.0 {
                a[i] = ScalarExpr::cos(&k[..dim], 0.0).scale(amplitude * pol[i]);
            }
        }
        Self::new(a)
    }

    pub fn dim(&self) -> usize {
        self.conv.dim()
    }

    pub fn potentials(&self) -> &[ScalarExpr] {
        &self.potentials
    }

    /// `F_{mu nu}` expressions, both indices down.
    pub fn field_strength_exprs(&self) -> &[Vec<ScalarExpr>] {
        &self.strength
    }

    /// `F^{mu nu}` expressions, both indices up.
    pub fn field_strength_upper_exprs(&self) -> Vec<Vec<ScalarExpr>> {
        let d = self.dim();
        (0..d)
            .map(|mu| {
                (0..d)
                    .map(|nu| {
                        let s = Conventions::metric(mu) * Conventions::metric(nu);
                        if s > 0.0 {
                            self.strength[mu][nu].clone()
                        } else {
                            -self.strength[mu][nu].clone()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn potential_at(&self, x: &[f64]) -> Vec<f64> {
        self.potentials.iter().map(|e| e.eval(x)).collect()
    }

    /// `F_{mu nu}(x)`, both indices covariant.
    pub fn field_strength(&self, x: &[f64]) -> Rank2 {
        let d = self.dim();
        let mut f = Rank2::zeros(d);
        for mu in 0..d {
            for nu in mu + 1..d {
                let v = self.strength[mu][nu].eval(x);
                f[(mu, nu)] = v;
                f[(nu, mu)] = -v;
            }
        }
        f
    }

    /// `F^{mu nu}(x)`, both indices contravariant.
    pub fn field_strength_upper(&self, x: &[f64]) -> Rank2 {
        self.field_strength(x)
            .raise_lower(&[0, 1])
            .expect("slots 0 and 1 exist")
    }

    /// `sum_mu d_mu F^{mu nu}` as one expression per `nu`.
    pub fn maxwell_residual_exprs(&self) -> Vec<ScalarExpr> {
        let upper = self.field_strength_upper_exprs();
        let d = self.dim();
        (0..d)
            .map(|nu| ScalarExpr::sum((0..d).map(|mu| upper[mu][nu].partial(mu))))
            .collect()
    }

    /// Per-`nu` maximum of `|d_mu F^{mu nu}|` over the given points.
    pub fn maxwell_residual(&self, points: &[[f64; MAX_DIM]]) -> Vec<f64> {
        self.maxwell_residual_exprs()
            .iter()
            .map(|r| points.iter().map(|x| r.eval(x).abs()).fold(0.0, f64::max))
            .collect()
    }

    /// `(1/4) F^{mu nu} F_{mu nu}` as an expression.
    pub fn invariant_expr(&self) -> ScalarExpr {
        let d = self.dim();
        let mut terms = Vec::new();
        for mu in 0..d {
            for nu in mu + 1..d {
                // two ordered pairs per unordered pair, times 1/4
                let w = 0.5 * Conventions::metric(mu) * Conventions::metric(nu);
                let f = &self.strength[mu][nu];
                terms.push(ScalarExpr::product([ScalarExpr::Const(w), f.clone(), f.clone()]));
            }
        }
        ScalarExpr::sum(terms)
    }

    /// Multiplies every potential by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.potentials.iter().map(|e| e.clone().scale(c)).collect())
            .expect("scaling preserves validity")
    }

    pub fn is_spatially_periodic(&self, length: f64) -> bool {
        self.potentials
            .iter()
            .all(|e| e.is_spatially_periodic(self.dim(), length))
    }

    /// Samples `A_mu` at every lattice site at time `t`.
    pub fn sample(&self, lat: &Lattice, t: f64) -> Result<FieldConfiguration> {
        if lat.dim() != self.dim() {
            return Err(Error::LatticeMismatch(format!(
                "solution has dimension {}, lattice {}",
                self.dim(),
                lat.dim()
            )));
        }
        let components: Vec<Vec<f64>> = self
            .potentials
            .iter()
            .map(|e| (0..lat.sites()).map(|s| e.eval(&lat.point(s, t))).collect())
            .collect();
        let mut cfg = FieldConfiguration::new(*lat, t, components)?;
        cfg.set_periodic(self.is_spatially_periodic(lat.length()));
        Ok(cfg)
    }
}
