//! Index conventions for flat spacetime with signature (+,-,...,-).
//!
//! Greek indices run over `0..dim`, spatial indices over `1..dim`. The
//! metric is diagonal with entries ±1, so raising and lowering an index is a
//! sign flip on the spatial components.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Conventions {
    dim: usize,
}

impl Default for Conventions {
    fn default() -> Self {
        Self { dim: 4 }
    }
}

impl Conventions {
    pub fn new(dim: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(Self { dim })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of spatial dimensions, `dim - 1`.
    #[inline]
    pub fn spatial_dim(&self) -> usize {
        self.dim - 1
    }

    /// Diagonal metric entry eta_{mu mu}; the inverse metric has the same entries.
    #[inline]
    pub fn metric(mu: usize) -> f64 {
        if mu == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// A `dim x dim` array `T^{mu nu}`.
///
/// The first slot is a spacetime index. The second slot usually labels the
/// potential component `A_nu` that was differentiated; it only behaves as a
/// tensor index when explicitly raised or lowered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rank2 {
    dim: usize,
    c: [[f64; MAX_DIM]; MAX_DIM],
}

impl Rank2 {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Self {
            dim,
            c: [[0.0; MAX_DIM]; MAX_DIM],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zeros(dim);
        for mu in 0..dim {
            t.c[mu][mu] = 1.0;
        }
        t
    }

    /// Builds from a row-major closure `f(mu, nu)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dim);
        for mu in 0..dim {
            for nu in 0..dim {
                t.c[mu][nu] = f(mu, nu);
            }
        }
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |mu, nu| self.c[nu][mu])
    }

    /// Multiplies each listed slot by the corresponding metric entry.
    ///
    /// With a diagonal ±1 metric, raising and lowering are the same operation.
    pub fn raise_lower(&self, slots: &[usize]) -> Result<Self> {
        let mut flip = [false; 2];
        for &s in slots {
            if s > 1 {
                return Err(Error::SlotOutOfRange(s));
            }
            flip[s] ^= true;
        }
        Ok(Self::from_fn(self.dim, |mu, nu| {
            let mut v = self.c[mu][nu];
            if flip[0] {
                v *= Conventions::metric(mu);
            }
            if flip[1] {
                v *= Conventions::metric(nu);
            }
            v
        }))
    }

    /// `X^{[mu nu]} = (X^{mu nu} - X^{nu mu}) / 2`.
    pub fn antisym(&self) -> Self {
        Self::from_fn(self.dim, |mu, nu| 0.5 * (self.c[mu][nu] - self.c[nu][mu]))
    }

    /// `X^{(mu nu)} = (X^{mu nu} + X^{nu mu}) / 2`.
    pub fn sym(&self) -> Self {
        Self::from_fn(self.dim, |mu, nu| 0.5 * (self.c[mu][nu] + self.c[nu][mu]))
    }

    /// `eta_{mu rho} eta_{nu sigma} T^{mu nu} T^{rho sigma}`.
    pub fn minkowski_square(&self) -> f64 {
        let d = self.dim;
        let mut time_time = self.c[0][0] * self.c[0][0];
        let mut mixed = 0.0;
        let mut space_space = 0.0;
        for i in 1..d {
            mixed += self.c[0][i] * self.c[0][i] + self.c[i][0] * self.c[i][0];
            for j in 1..d {
                space_space += self.c[i][j] * self.c[i][j];
            }
        }
        time_time -= mixed;
        time_time + space_space
    }

    /// `(1/4) eta eta T^{0 nu} T^{0 nu}`, the time row of the square.
    pub fn time_row_square(&self) -> f64 {
        (0..self.dim)
            .map(|nu| Conventions::metric(nu) * self.c[0][nu] * self.c[0][nu])
            .sum()
    }

    /// `sum_i eta_ii eta_nu nu (T^{i nu})^2`, the spatial rows of the square.
    pub fn spatial_rows_square(&self) -> f64 {
        let mut s = 0.0;
        for i in 1..self.dim {
            for nu in 0..self.dim {
                s -= Conventions::metric(nu) * self.c[i][nu] * self.c[i][nu];
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        let mut m: f64 = 0.0;
        for mu in 0..self.dim {
            for nu in 0..self.dim {
                m = m.max(self.c[mu][nu].abs());
            }
        }
        m
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.dim).all(|mu| (0..self.dim).all(|nu| self.c[mu][nu] == -self.c[nu][mu]))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|mu| self.c[mu][..self.dim].to_vec()).collect()
    }
}

impl Index<(usize, usize)> for Rank2 {
    type Output = f64;

    fn index(&self, (mu, nu): (usize, usize)) -> &f64 {
        assert!(mu < self.dim && nu < self.dim, "index ({mu},{nu}) out of range");
        &self.c[mu][nu]
    }
}

impl IndexMut<(usize, usize)> for Rank2 {
    fn index_mut(&mut self, (mu, nu): (usize, usize)) -> &mut f64 {
        assert!(mu < self.dim && nu < self.dim, "index ({mu},{nu}) out of range");
        &mut self.c[mu][nu]
    }
}

impl Add for Rank2 {
    type Output = Rank2;

    fn add(self, rhs: Rank2) -> Rank2 {
        debug_assert_eq!(self.dim, rhs.dim);
        Rank2::from_fn(self.dim, |mu, nu| self.c[mu][nu] + rhs.c[mu][nu])
    }
}

impl Sub for Rank2 {
    type Output = Rank2;

    fn sub(self, rhs: Rank2) -> Rank2 {
        debug_assert_eq!(self.dim, rhs.dim);
        Rank2::from_fn(self.dim, |mu, nu| self.c[mu][nu] - rhs.c[mu][nu])
    }
}

impl Neg for Rank2 {
    type Output = Rank2;

    fn neg(self) -> Rank2 {
        Rank2::from_fn(self.dim, |mu, nu| -self.c[mu][nu])
    }
}

impl Mul<Rank2> for f64 {
    type Output = Rank2;

    fn mul(self, rhs: Rank2) -> Rank2 {
        Rank2::from_fn(rhs.dim, |mu, nu| self * rhs.c[mu][nu])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent oracle: the full double loop over every index pair.
    fn brute_square(t: &Rank2) -> f64 {
        let d = t.dim();
        let mut s = 0.0;
        for mu in 0..d {
            for nu in 0..d {
                for rho in 0..d {
                    for sigma in 0..d {
                        let eta_mr = if mu == rho { Conventions::metric(mu) } else { 0.0 };
                        let eta_ns = if nu == sigma { Conventions::metric(nu) } else { 0.0 };
                        s += eta_mr * eta_ns * t[(mu, nu)] * t[(rho, sigma)];
                    }
                }
            }
        }
        s
    }

    #[test]
    fn dimension_bounds() {
        assert!(Conventions::new(1).is_err());
        assert!(Conventions::new(5).is_err());
        assert_eq!(Conventions::new(3).unwrap().spatial_dim(), 2);
        assert_eq!(Conventions::default().dim(), 4);
    }

    #[test]
    fn lowering_both_slots_of_identity() {
        let t = Rank2::identity(4).raise_lower(&[0, 1]).unwrap();
        assert_eq!(t, Rank2::identity(4));
    }

    #[test]
    fn lowering_single_spatial_slot() {
        let mut t = Rank2::zeros(4);
        t[(0, 1)] = 1.0;
        let l = t.raise_lower(&[1]).unwrap();
        assert_eq!(l[(0, 1)], -1.0);

        let mut t = Rank2::zeros(2);
        t[(1, 0)] = 2.0;
        let l = t.raise_lower(&[0]).unwrap();
        assert_eq!(l[(1, 0)], -2.0);
    }

    #[test]
    fn slot_out_of_range() {
        assert!(matches!(
            Rank2::zeros(3).raise_lower(&[2]),
            Err(Error::SlotOutOfRange(2))
        ));
    }

    #[test]
    fn antisym_weight_half() {
        let mut t = Rank2::zeros(4);
        t[(0, 1)] = 1.0;
        let a = t.antisym();
        assert_eq!(a[(0, 1)], 0.5);
        assert_eq!(a[(1, 0)], -0.5);
        let s = Rank2::identity(3);
        assert_eq!(s.antisym(), Rank2::zeros(3));
        assert_eq!(s.sym(), s);
    }

    #[test]
    fn square_examples() {
        assert_eq!(Rank2::zeros(4).minkowski_square(), 0.0);

        let e = 1.7;
        let mut t = Rank2::zeros(4);
        t[(0, 1)] = -e;
        t[(1, 0)] = e;
        assert_eq!(brute_square(&t), -2.0 * e * e);
        assert_eq!(t.minkowski_square(), -2.0 * e * e);

        let b = 0.3;
        let mut t = Rank2::zeros(4);
        t[(1, 2)] = b;
        t[(2, 1)] = -b;
        assert_eq!(brute_square(&t), 2.0 * b * b);
        assert_eq!(t.minkowski_square(), 2.0 * b * b);
    }

    fn rank2_strategy() -> impl Strategy<Value = Rank2> {
        (2usize..=4, prop::collection::vec(-10.0f64..10.0, 16)).prop_map(|(d, v)| {
            Rank2::from_fn(d, |mu, nu| v[mu * 4 + nu])
        })
    }

    proptest! {
        #[test]
        fn split_square_matches_brute_force(t in rank2_strategy()) {
            let fast = t.minkowski_square();
            let slow = brute_square(&t);
            let scale = t.max_abs().powi(2).max(1e-300) * 16.0;
            prop_assert!((fast - slow).abs() <= 1e-14 * scale);
            let rows = 0.25 * t.time_row_square() + 0.25 * t.spatial_rows_square();
            prop_assert!((0.25 * fast - rows).abs() <= 1e-14 * scale);
        }

        #[test]
        fn sym_antisym_decomposition(t in rank2_strategy()) {
            let a = t.antisym();
            let s = t.sym();
            prop_assert_eq!(a.antisym(), a);
            prop_assert_eq!(s.sym(), s);
            let back = a + s;
            for mu in 0..t.dim() {
                for nu in 0..t.dim() {
                    // (x - y)/2 + (x + y)/2 can differ from x by one rounding
                    let x = t[(mu, nu)];
                    prop_assert!((back[(mu, nu)] - x).abs() <= f64::EPSILON * x.abs().max(t.max_abs()));
                }
            }
        }

        #[test]
        fn raise_then_lower_is_identity(t in rank2_strategy(), slot in 0usize..2) {
            let round = t.raise_lower(&[slot]).unwrap().raise_lower(&[slot]).unwrap();
            prop_assert_eq!(round, t);
        }
    }
}
