use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::{Conventions, MAX_DIM};

/// Periodic cubic lattice discretizing a constant-time slice.
///
/// Sites are numbered lexicographically in their spatial indices
/// `(i1, ..., i_{D-1})` with `i1` varying slowest. Site `(n1, ..)` sits at
/// `x^i = n_i * h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    dim: usize,
    n: usize,
    h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeMeta {
    #[serde(rename = "D")]
    pub dim: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub h: f64,
}

impl Lattice {
    pub fn new(dim: usize, n: usize, h: f64) -> Result<Self> {
        Conventions::new(dim)?;
        if n < 3 {
            return Err(Error::InvalidLattice(format!("need at least 3 points per axis, got {n}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidLattice(format!("spacing must be positive and finite, got {h}")));
        }
        let sites = (n as u128).checked_pow((dim - 1) as u32);
        if sites.is_none_or(|s| s > (1u128 << 32)) {
            return Err(Error::InvalidLattice("too many sites".into()));
        }
        Ok(Self { dim, n, h })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn spatial_dim(&self) -> usize {
        self.dim - 1
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn conventions(&self) -> Conventions {
        Conventions::new(self.dim).expect("validated at construction")
    }

    pub fn meta(&self) -> LatticeMeta {
        LatticeMeta { dim: self.dim, n: self.n, h: self.h }
    }

    /// Number of sites, `N^(D-1)`.
    pub fn sites(&self) -> usize {
        self.n.pow(self.spatial_dim() as u32)
    }

    /// Period length `N h` along each spatial axis.
    pub fn length(&self) -> f64 {
        self.n as f64 * self.h
    }

    /// Volume element `h^(D-1)`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.spatial_dim() as i32)
    }

    /// Total spatial volume `(N h)^(D-1)`.
    pub fn volume(&self) -> f64 {
        self.cell_volume() * self.sites() as f64
    }

    /// Same physical box with `factor` times as many points per axis.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            dim: self.dim,
            n: self.n * factor,
            h: self.h / factor as f64,
        }
    }

    /// Stride of spatial axis `i` (1-based) in the flat site index.
    #[inline]
    fn stride(&self, axis: usize) -> usize {
        debug_assert!(axis >= 1 && axis < self.dim);
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    /// Spatial multi-index of a site (entry `i-1` holds `n_i`).
    pub fn multi_index(&self, site: usize) -> [usize; MAX_DIM - 1] {
        let mut idx = [0; MAX_DIM - 1];
        for axis in 1..self.dim {
            idx[axis - 1] = (site / self.stride(axis)) % self.n;
        }
        idx
    }

    pub fn site_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.spatial_dim() {
            return Err(Error::LatticeMismatch(format!(
                "expected {} indices, got {}",
                self.spatial_dim(),
                idx.len()
            )));
        }
        let mut s = 0;
        for (axis, &i) in (1..self.dim).zip(idx) {
            if i >= self.n {
                return Err(Error::IndexOutOfRange { index: i, dim: self.n });
            }
            s += i * self.stride(axis);
        }
        Ok(s)
    }

    /// Spacetime point of a site at time `t`; unused trailing slots are zero.
    pub fn point(&self, site: usize, t: f64) -> [f64; MAX_DIM] {
        let idx = self.multi_index(site);
        let mut x = [0.0; MAX_DIM];
        x[0] = t;
        for axis in 1..self.dim {
            x[axis] = idx[axis - 1] as f64 * self.h;
        }
        x
    }

    /// Neighbor of `site` one step along spatial `axis` in direction `+1`/`-1`, wrapping.
    #[inline]
    pub fn neighbor(&self, site: usize, axis: usize, forward: bool) -> usize {
        let stride = self.stride(axis);
        let i = (site / stride) % self.n;
        let j = if forward {
            (i + 1) % self.n
        } else {
            (i + self.n - 1) % self.n
        };
        site - i * stride + j * stride
    }

    /// Second-order periodic central difference along spatial `axis`.
    pub fn central_diff(&self, values: &[f64], axis: usize) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.sites());
        let inv = 0.5 / self.h;
        (0..values.len())
            .map(|s| {
                (values[self.neighbor(s, axis, true)] - values[self.neighbor(s, axis, false)]) * inv
            })
            .collect()
    }

    /// `h^(D-1) * sum` with deterministic pairwise summation.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.cell_volume() * pairwise_sum(values)
    }
}

/// Fixed-order pairwise summation. The split points depend only on the
/// length, so the result is bit-reproducible.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        let mut s = 0.0;
        for v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
