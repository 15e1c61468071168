use super::config::{spatial_field_strength, FieldConfiguration};
use super::lattice::Lattice;
use super::SpacetimeSolution;
use crate::error::{Error, Result};

/// Temporal-gauge state: spatial potentials `A_i` and `E_i = F_{0i}`.
///
/// Vectors are indexed by `i - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxwellState {
    pub lattice: Lattice,
    pub t: f64,
    pub a: Vec<Vec<f64>>,
    pub e: Vec<Vec<f64>>,
}

impl MaxwellState {
    pub fn new(lattice: Lattice, t: f64, a: Vec<Vec<f64>>, e: Vec<Vec<f64>>) -> Result<Self> {
        let ns = lattice.spatial_dim();
        let n = lattice.sites();
        if a.len() != ns || e.len() != ns || a.iter().chain(&e).any(|c| c.len() != n) {
            return Err(Error::LatticeMismatch("state arrays do not match the lattice".into()));
        }
        if a.iter().chain(&e).flatten().any(|v| !v.is_finite()) || !t.is_finite() {
            return Err(Error::NonFinite("Maxwell state"));
        }
        Ok(Self { lattice, t, a, e })
    }

    pub fn zeros(lattice: Lattice, t: f64) -> Self {
        let ns = lattice.spatial_dim();
        let n = lattice.sites();
        Self { lattice, t, a: vec![vec![0.0; n]; ns], e: vec![vec![0.0; n]; ns] }
    }

    /// Samples `A_i` and `E_i = F_{0i}` of an analytic solution.
    pub fn from_solution(sol: &SpacetimeSolution, lattice: Lattice, t: f64) -> Result<Self> {
        let cfg = sol.sample(&lattice, t)?;
        cfg.require_periodic()?;
        let f = sol.field_strength_exprs();
        let e = (1..lattice.dim())
            .map(|i| (0..lattice.sites()).map(|s| f[0][i].eval(&lattice.point(s, t))).collect())
            .collect();
        let a = (1..lattice.dim()).map(|i| cfg.component(i).to_vec()).collect();
        Self::new(lattice, t, a, e)
    }

    /// Configuration view with `A_0 = 0`.
    pub fn to_config(&self) -> FieldConfiguration {
        let mut comps = vec![vec![0.0; self.lattice.sites()]];
        comps.extend(self.a.iter().cloned());
        FieldConfiguration::new(self.lattice, self.t, comps).expect("state is validated")
    }

    /// `h^(D-1) sum (E^2/2 + sum_{i<j} F_ij^2 / 2)`.
    pub fn energy(&self) -> f64 {
        let f = spatial_field_strength(&self.to_config()).expect("states are periodic");
        let b2 = f.square_density();
        let density: Vec<f64> = (0..self.lattice.sites())
            .map(|s| 0.5 * self.e.iter().map(|c| c[s] * c[s]).sum::<f64>() + 0.5 * b2[s])
            .collect();
        self.lattice.integrate(&density)
    }

    pub fn max_abs_diff(&self, other: &MaxwellState) -> f64 {
        self.a
            .iter()
            .chain(&self.e)
            .flatten()
            .zip(other.a.iter().chain(&other.e).flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// `sum_i D_i E_i` per site.
pub fn gauss_divergence(state: &MaxwellState) -> Vec<f64> {
    let lat = &state.lattice;
    let mut div = vec![0.0; lat.sites()];
    for (k, e) in state.e.iter().enumerate() {
        for (d, v) in div.iter_mut().zip(lat.central_diff(e, k + 1)) {
            *d += v;
        }
    }
    div
}

/// `sum_j D_j F_{ji}`, the source of `dE_i/dt`.
fn curl_curl(lat: &Lattice, a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let ns = lat.spatial_dim();
    // grad[j][i] = D_j A_i
    let grad: Vec<Vec<Vec<f64>>> = (0..ns)
        .map(|j| (0..ns).map(|i| lat.central_diff(&a[i], j + 1)).collect())
        .collect();
    (0..ns)
        .map(|i| {
            let mut acc = vec![0.0; lat.sites()];
            for j in 0..ns {
                if i == j {
                    continue;
                }
                let f_ji: Vec<f64> = grad[j][i].iter().zip(&grad[i][j]).map(|(x, y)| x - y).collect();
                for (s, v) in acc.iter_mut().zip(lat.central_diff(&f_ji, j + 1)) {
                    *s += v;
                }
            }
            acc
        })
        .collect()
}

/// One kick-drift-kick leapfrog step of the temporal-gauge Maxwell system
/// `dA_i/dt = E_i`, `dE_i/dt = sum_j D_j F_{ji}`.
pub fn fdtd_step(state: &MaxwellState, dt: f64) -> Result<MaxwellState> {
    let lat = state.lattice;
    let limit = lat.h() / (lat.spatial_dim() as f64).sqrt();
    if !(dt.is_finite() && dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
        return Err(Error::StabilityViolation { dt, limit });
    }
    let half = 0.5 * dt;
    let kick = curl_curl(&lat, &state.a);
    let e_half: Vec<Vec<f64>> = state
        .e
        .iter()
        .zip(&kick)
        .map(|(e, k)| e.iter().zip(k).map(|(e, k)| e + half * k).collect())
        .collect();
    let a_new: Vec<Vec<f64>> = state
        .a
        .iter()
        .zip(&e_half)
        .map(|(a, e)| a.iter().zip(e).map(|(a, e)| a + dt * e).collect())
        .collect();
    let kick = curl_curl(&lat, &a_new);
    let e_new = e_half
        .iter()
        .zip(&kick)
        .map(|(e, k)| e.iter().zip(k).map(|(e, k)| e + half * k).collect())
        .collect();
    Ok(MaxwellState { lattice: lat, t: state.t + dt, a: a_new, e: e_new })
}
