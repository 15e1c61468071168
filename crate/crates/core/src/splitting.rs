//! Canonical functional side and the spacetime split `S[A] = int dx S^0`.
//!
//! All lattice integrals are `h^(D-1)` times a fixed-order pairwise sum, so
//! every value here is reproducible bit for bit.

use rayon::prelude::*;
use serde::Serialize;

use crate::eikonal::EikonalAnsatz;
use crate::error::{Error, Result};
use crate::fields::{spatial_field_strength, FieldConfiguration, Lattice, LatticeMeta, MaxwellState};

/// One checked identity: `lhs` against `rhs` on a lattice slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub equation: String,
    pub lhs: f64,
    pub rhs: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub lattice: LatticeMeta,
    pub t: f64,
}

impl ResidualRecord {
    pub fn new(equation: &str, lhs: f64, rhs: f64, lattice: &Lattice, t: f64) -> Self {
        Self::with_error(equation, lhs, rhs, (lhs - rhs).abs(), lattice, t)
    }

    /// Record whose mismatch is measured separately, e.g. as an integrated
    /// pointwise difference rather than the difference of the totals.
    pub fn with_error(equation: &str, lhs: f64, rhs: f64, abs_err: f64, lattice: &Lattice, t: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let rel_err = if scale > 0.0 { abs_err / scale } else { 0.0 };
        Self { equation: equation.to_string(), lhs, rhs, abs_err, rel_err, lattice: lattice.meta(), t }
    }
}

/// Canonical momenta on the lattice: `p_{A_0} = 0`, `p_{A_i} = -F^{0i} = E_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalMomenta {
    pub p_a0: Vec<f64>,
    /// Indexed by `i - 1`.
    pub p_a: Vec<Vec<f64>>,
}

pub fn canonical_momenta(state: &MaxwellState) -> CanonicalMomenta {
    CanonicalMomenta { p_a0: vec![0.0; state.lattice.sites()], p_a: state.e.clone() }
}

/// The canonical Hamiltonian with the `A_0` term written two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalHamiltonian {
    /// `int (E^2/2 + B^2/2)`.
    pub energy: f64,
    /// `int F^{0i} D_i A_0 = -int E_i D_i A_0`.
    pub gradient_term: f64,
    /// `-int A_0 D_i F^{0i} = int A_0 D_i E_i`.
    pub by_parts_term: f64,
}

impl CanonicalHamiltonian {
    pub fn gradient_form(&self) -> f64 {
        self.energy + self.gradient_term
    }

    pub fn by_parts_form(&self) -> f64 {
        self.energy + self.by_parts_term
    }
}

pub fn canonical_hamiltonian(state: &MaxwellState, a0: &[f64]) -> Result<CanonicalHamiltonian> {
    let lat = state.lattice;
    if a0.len() != lat.sites() {
        return Err(Error::LatticeMismatch("A_0 field does not match the lattice".into()));
    }
    if a0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("A_0 field"));
    }
    let mut grad = vec![0.0; lat.sites()];
    let mut div = vec![0.0; lat.sites()];
    for (k, e) in state.e.iter().enumerate() {
        let d_a0 = lat.central_diff(a0, k + 1);
        let d_e = lat.central_diff(e, k + 1);
        for s in 0..lat.sites() {
            grad[s] -= e[s] * d_a0[s];
            div[s] += a0[s] * d_e[s];
        }
    }
    Ok(CanonicalHamiltonian {
        energy: state.energy(),
        gradient_term: lat.integrate(&grad),
        by_parts_term: lat.integrate(&div),
    })
}

/// Terms of the canonical Hamilton-Jacobi equation on one slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalHjResidual {
    /// `dS/dt`, from the explicit time derivative of `S^0`.
    pub time_derivative: f64,
    /// `int 1/2 sum_i (dS/dA_i)^2`.
    pub kinetic: f64,
    /// `int 1/4 F_ij F^ij = int 1/2 sum_{i<j} F_ij^2`.
    pub magnetic: f64,
    /// `-int A_0 d/dx^i (dS/dA_i)`, zero when the term is switched off.
    pub gauss_term: f64,
    /// `dS/dt + H`: the residual in the orientation with positive energy.
    pub residual: f64,
    /// `dS/dt - H`: the opposite sign convention, reported for comparison.
    pub residual_opposite_sign: f64,
    /// Central difference of `S` in `t` at fixed configuration, as a check
    /// on `time_derivative`.
    pub time_derivative_fd: f64,
}

/// Per-site Gauss residual and its max norm.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussResidual {
    pub per_site: Vec<f64>,
    pub max: f64,
}

/// `S([A], t) = h^(D-1) sum_x S^0(A(x), x, t)` for a fixed ansatz and slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitFunctional {
    ansatz: EikonalAnsatz,
    lattice: Lattice,
    t: f64,
}

impl SplitFunctional {
    pub fn new(ansatz: EikonalAnsatz, lattice: Lattice, t: f64) -> Result<Self> {
        if ansatz.dim() != lattice.dim() {
            return Err(Error::LatticeMismatch(format!(
                "ansatz has dimension {}, lattice {}",
                ansatz.dim(),
                lattice.dim()
            )));
        }
        if !t.is_finite() {
            return Err(Error::NonFinite("slice time"));
        }
        Ok(Self { ansatz, lattice, t })
    }

    pub fn ansatz(&self) -> &EikonalAnsatz {
        &self.ansatz
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn at_time(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    fn check(&self, cfg: &FieldConfiguration) -> Result<()> {
        if cfg.lattice() != &self.lattice {
            return Err(Error::LatticeMismatch("configuration lives on a different lattice".into()));
        }
        if cfg.t() != self.t {
            return Err(Error::TimeMismatch { config: cfg.t(), functional: self.t });
        }
        Ok(())
    }

    fn per_site<F>(&self, cfg: &FieldConfiguration, f: F) -> Vec<f64>
    where
        F: Fn(&[f64; 4], &[f64; 4]) -> f64 + Sync,
    {
        (0..self.lattice.sites())
            .into_par_iter()
            .map(|s| f(&cfg.potential(s), &self.lattice.point(s, self.t)))
            .collect()
    }

    fn require_periodic_ansatz(&self) -> Result<()> {
        if self.ansatz.is_spatially_periodic(self.lattice.length()) {
            Ok(())
        } else {
            Err(Error::NonPeriodicInput)
        }
    }

    pub fn functional_value(&self, cfg: &FieldConfiguration) -> Result<f64> {
        self.check(cfg)?;
        let dens = self.per_site(cfg, |a, x| self.ansatz.eval_s(a, x)[0]);
        Ok(self.lattice.integrate(&dens))
    }

    /// `dS/dA_i(x) = dS^0/dA_i (A(x), x)` for spatial `i`.
    pub fn variational_derivative(&self, cfg: &FieldConfiguration, site: usize, i: usize) -> Result<f64> {
        self.check(cfg)?;
        let d = self.lattice.dim();
        if i == 0 || i >= d {
            return Err(Error::IndexOutOfRange { index: i, dim: d });
        }
        if site >= self.lattice.sites() {
            return Err(Error::InvalidArgument(format!("site {site} is outside the lattice")));
        }
        Ok(self.ansatz.ds_da_entry(0, i, &cfg.potential(site), &self.lattice.point(site, self.t)))
    }

    /// `dS/dA_i` at every site, indexed by `i - 1`.
    pub fn variational_field(&self, cfg: &FieldConfiguration) -> Result<Vec<Vec<f64>>> {
        self.check(cfg)?;
        Ok((1..self.lattice.dim())
            .map(|i| self.per_site(cfg, |a, x| self.ansatz.ds_da_entry(0, i, a, x)))
            .collect())
    }

    /// `dS/dt` at fixed configuration, `h^(D-1) sum d_0 S^0`.
    pub fn time_derivative(&self, cfg: &FieldConfiguration) -> Result<f64> {
        self.check(cfg)?;
        let dens = self.per_site(cfg, |a, x| self.ansatz.time_derivative_s0(a, x));
        Ok(self.lattice.integrate(&dens))
    }

    /// Central difference of the functional in `t` at fixed configuration.
    pub fn time_derivative_fd(&self, cfg: &FieldConfiguration, step: f64) -> Result<f64> {
        self.check(cfg)?;
        let value_at = |t: f64| {
            let f = self.at_time(t);
            f.functional_value(&cfg.clone().with_time(t))
        };
        Ok((value_at(self.t + step)? - value_at(self.t - step)?) / (2.0 * step))
    }

    /// `sum_i D_i [dS^0/dA_i (A(x), x)]`, the lattice total derivative of the
    /// composite map, including the dependence through `A(x)`.
    pub fn gauss_residual(&self, cfg: &FieldConfiguration) -> Result<GaussResidual> {
        cfg.require_periodic()?;
        self.require_periodic_ansatz()?;
        let field = self.variational_field(cfg)?;
        let mut per_site = vec![0.0; self.lattice.sites()];
        for (k, p) in field.iter().enumerate() {
            for (r, v) in per_site.iter_mut().zip(self.lattice.central_diff(p, k + 1)) {
                *r += v;
            }
        }
        let max = per_site.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(GaussResidual { per_site, max })
    }

    /// Terms of `dS/dt + int (1/2 (dS/dA_i)^2 + 1/4 F_ij F^ij) [- int A_0 d_i dS/dA_i]`.
    pub fn canonical_hj_residual(&self, cfg: &FieldConfiguration, include_a0: bool) -> Result<CanonicalHjResidual> {
        let time_derivative = self.time_derivative(cfg)?;
        let field = self.variational_field(cfg)?;
        let kin: Vec<f64> = (0..self.lattice.sites())
            .map(|s| 0.5 * field.iter().map(|p| p[s] * p[s]).sum::<f64>())
            .collect();
        let kinetic = self.lattice.integrate(&kin);
        let mag: Vec<f64> = spatial_field_strength(cfg)?.square_density().iter().map(|v| 0.5 * v).collect();
        let magnetic = self.lattice.integrate(&mag);
        let gauss_term = if include_a0 {
            let g = self.gauss_residual(cfg)?;
            let dens: Vec<f64> = g.per_site.iter().zip(cfg.component(0)).map(|(g, a0)| -a0 * g).collect();
            self.lattice.integrate(&dens)
        } else {
            0.0
        };
        let hamiltonian = kinetic + magnetic + gauss_term;
        let step = 1e-4 * self.t.abs().max(1.0);
        Ok(CanonicalHjResidual {
            time_derivative,
            kinetic,
            magnetic,
            gauss_term,
            residual: time_derivative + hamiltonian,
            residual_opposite_sign: time_derivative - hamiltonian,
            time_derivative_fd: self.time_derivative_fd(cfg, step)?,
        })
    }

    /// `max |dS/dA_i(x) - E_i(x)|` over sites and spatial `i`, with the
    /// functional evaluated on the state's potentials (`A_0 = 0`).
    pub fn embedding_check_canonical(&self, state: &MaxwellState) -> Result<f64> {
        let cfg = state.to_config();
        self.check(&cfg)?;
        let field = self.variational_field(&cfg)?;
        Ok(field
            .iter()
            .zip(&state.e)
            .flat_map(|(p, e)| p.iter().zip(e).map(|(p, e)| (p - e).abs()))
            .fold(0.0, f64::max))
    }

    /// Residual records for the canonical equation in both sign conventions.
    pub fn canonical_hj_records(&self, cfg: &FieldConfiguration, include_a0: bool) -> Result<Vec<ResidualRecord>> {
        let r = self.canonical_hj_residual(cfg, include_a0)?;
        let h = r.kinetic + r.magnetic + r.gauss_term;
        Ok(vec![
            ResidualRecord::new("canonical-hj: dS/dt + H = 0", r.time_derivative, -h, &self.lattice, self.t),
            ResidualRecord::new("canonical-hj: dS/dt = H", r.time_derivative, h, &self.lattice, self.t),
            ResidualRecord::new(
                "canonical-hj: analytic vs finite-difference dS/dt",
                r.time_derivative,
                r.time_derivative_fd,
                &self.lattice,
                self.t,
            ),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprs::ScalarExpr;
    use crate::fields::SpacetimeSolution;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn lattice() -> Lattice {
        Lattice::new(4, 6, 0.2).unwrap()
    }

    fn random_config(lat: Lattice, t: f64, seed: u64) -> FieldConfiguration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let comps = (0..lat.dim())
            .map(|_| (0..lat.sites()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        FieldConfiguration::new(lat, t, comps).unwrap()
    }

    fn constant_config(lat: Lattice, t: f64, a1: f64) -> FieldConfiguration {
        let mut cfg = FieldConfiguration::zeros(lat, t);
        cfg.component_mut(1).fill(a1);
        cfg
    }

    #[test]
    fn zero_ansatz_gives_zero_functional() {
        let lat = lattice();
        let sf = SplitFunctional::new(EikonalAnsatz::zero(4).unwrap(), lat, 0.3).unwrap();
        let cfg = random_config(lat, 0.3, 1);
        assert_eq!(sf.functional_value(&cfg).unwrap(), 0.0);
        assert_eq!(sf.variational_derivative(&cfg, 5, 2).unwrap(), 0.0);
        let r = sf.canonical_hj_residual(&FieldConfiguration::zeros(lat, 0.3), true).unwrap();
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn constant_field_functional_closed_form() {
        let lat = lattice();
        let (e, a, t) = (1.3, 0.7, 0.4);
        let sf = SplitFunctional::new(EikonalAnsatz::constant_electric(4, e).unwrap(), lat, t).unwrap();
        let cfg = constant_config(lat, t, a);
        let expected = lat.volume() * (-e * a - 0.5 * e * e * t);
        let direct: f64 = (0..lat.sites()).map(|_| -e * a - 0.5 * e * e * t).sum::<f64>() * lat.cell_volume();
        let got = sf.functional_value(&cfg).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected.abs());
        assert!((got - direct).abs() <= 1e-12 * expected.abs());
        for s in [0, 17, lat.sites() - 1] {
            assert_eq!(sf.variational_derivative(&cfg, s, 1).unwrap(), -e);
            assert_eq!(sf.variational_derivative(&cfg, s, 2).unwrap(), 0.0);
        }
    }

    #[test]
    fn time_mismatch_and_index_errors() {
        let lat = lattice();
        let sf = SplitFunctional::new(EikonalAnsatz::zero(4).unwrap(), lat, 0.0).unwrap();
        let cfg = FieldConfiguration::zeros(lat, 1.0);
        assert!(matches!(sf.functional_value(&cfg), Err(Error::TimeMismatch { .. })));
        let cfg = FieldConfiguration::zeros(lat, 0.0);
        assert!(matches!(sf.variational_derivative(&cfg, 0, 0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(sf.variational_derivative(&cfg, 0, 4), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn variational_derivative_matches_finite_difference_and_is_local() {
        let lat = Lattice::new(3, 5, 0.3).unwrap();
        // quadratic S^0 so the finite difference is not trivially exact
        let d = 3;
        let z = || ScalarExpr::zero();
        let mut q = vec![vec![vec![z(); d]; d]; d];
        q[0][1][1] = ScalarExpr::cos(&[0.0, 2.0 * PI / lat.length()], 0.0);
        q[0][1][2] = ScalarExpr::Const(0.5);
        q[0][2][1] = ScalarExpr::Const(0.5);
        let mut f = vec![vec![z(); d]; d];
        f[0][2] = ScalarExpr::Const(0.25);
        f[2][0] = ScalarExpr::Const(-0.25);
        let ans = EikonalAnsatz::new(vec![z(); d], f, Some(q)).unwrap();
        let sf = SplitFunctional::new(ans, lat, 0.0).unwrap();
        let cfg = random_config(lat, 0.0, 3);
        let eps = 1e-4;
        for (site, i) in [(0, 1), (7, 2), (24, 1)] {
            let mut up = cfg.clone();
            up.component_mut(i)[site] += eps;
            let mut dn = cfg.clone();
            dn.component_mut(i)[site] -= eps;
            let fd = (sf.functional_value(&up).unwrap() - sf.functional_value(&dn).unwrap())
                / (2.0 * eps * lat.cell_volume());
            let exact = sf.variational_derivative(&cfg, site, i).unwrap();
            assert!((fd - exact).abs() < 1e-8, "{fd} vs {exact}");
            // changing another site leaves the value untouched
            let mut other = cfg.clone();
            other.component_mut(i)[(site + 1) % lat.sites()] += 1.0;
            assert_eq!(sf.variational_derivative(&other, site, i).unwrap(), exact);
        }
    }

    #[test]
    fn canonical_momenta_are_electric_fields() {
        let lat = Lattice::new(3, 8, 0.125).unwrap();
        let zero = canonical_momenta(&MaxwellState::zeros(lat, 0.0));
        assert!(zero.p_a0.iter().chain(zero.p_a.iter().flatten()).all(|v| *v == 0.0));
        let mut s = MaxwellState::zeros(lat, 0.0);
        s.e[0].fill(0.6);
        let p = canonical_momenta(&s);
        assert!(p.p_a[0].iter().all(|v| *v == 0.6));
        assert!(p.p_a0.iter().all(|v| *v == 0.0));

        let sol = SpacetimeSolution::plane_wave(3, 0.1, &[1], lat.length()).unwrap();
        let st = MaxwellState::from_solution(&sol, lat, 0.2).unwrap();
        let p = canonical_momenta(&st);
        for site in 0..lat.sites() {
            let f = sol.field_strength(&lat.point(site, 0.2));
            assert_eq!(p.p_a[1][site], f[(0, 2)]);
        }
    }

    #[test]
    fn hamiltonian_closed_form_and_forms_agree() {
        let lat = Lattice::new(4, 5, 0.2).unwrap();
        let mut s = MaxwellState::zeros(lat, 0.0);
        let e = 0.9;
        s.e[0].fill(e);
        let h = canonical_hamiltonian(&s, &vec![0.0; lat.sites()]).unwrap();
        assert!((h.gradient_form() - 0.5 * e * e * lat.volume()).abs() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut r = |n: usize| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
        let a = (0..3).map(|_| r(lat.sites())).collect();
        let ef = (0..3).map(|_| r(lat.sites())).collect();
        let st = MaxwellState::new(lat, 0.0, a, ef).unwrap();
        let a0 = r(lat.sites());
        let h = canonical_hamiltonian(&st, &a0).unwrap();
        assert!(h.gradient_term.abs() > 1e-3);
        assert!((h.gradient_form() - h.by_parts_form()).abs() <= 1e-12);
    }

    #[test]
    fn plane_wave_energy_matches_analytic_integral() {
        // int (E^2 + B^2)/2 = a^2 k^2 V / 2 for a unit-amplitude cosine, up to O(h^2)
        let mut errs = Vec::new();
        for n in [8usize, 16, 32] {
            let lat = Lattice::new(3, n, 1.0 / n as f64).unwrap();
            let a = 0.1;
            let sol = SpacetimeSolution::plane_wave(3, a, &[1], 1.0).unwrap();
            let st = MaxwellState::from_solution(&sol, lat, 0.3).unwrap();
            let h = canonical_hamiltonian(&st, &vec![0.0; lat.sites()]).unwrap();
            let k = 2.0 * PI;
            let exact = 0.5 * a * a * k * k * lat.volume();
            errs.push((h.gradient_form() - exact).abs() / exact);
        }
        for w in errs.windows(2) {
            let p = (w[0] / w[1]).log2();
            assert!((1.8..=2.2).contains(&p), "{errs:?}");
        }
    }

    #[test]
    fn gauss_residual_cases() {
        let lat = Lattice::new(3, 16, 1.0 / 16.0).unwrap();
        let sf = SplitFunctional::new(EikonalAnsatz::constant_electric(3, 2.0).unwrap(), lat, 0.1).unwrap();
        let cfg = random_config(lat, 0.1, 4);
        assert_eq!(sf.gauss_residual(&cfg).unwrap().max, 0.0);

        // f^{01} = (c/k) sin(k x1) has d_1 f^{01} = c cos(k x1)
        let c = 0.7;
        let k = 2.0 * PI;
        let d = 3;
        let mut f = vec![vec![ScalarExpr::zero(); d]; d];
        f[0][1] = ScalarExpr::sin(&[0.0, k], 0.0).scale(c / k);
        let ans = EikonalAnsatz::new(vec![ScalarExpr::zero(); d], f, None).unwrap();
        let sf = SplitFunctional::new(ans, lat, 0.0).unwrap();
        let g = sf.gauss_residual(&FieldConfiguration::zeros(lat, 0.0)).unwrap();
        assert!((g.per_site[0] - c).abs() < c * (k * lat.h()).powi(2));
        assert!((g.max - c).abs() < c * (k * lat.h()).powi(2));
    }

    #[test]
    fn gauss_residual_rejects_non_periodic_ansatz() {
        let lat = Lattice::new(3, 8, 0.125).unwrap();
        let d = 3;
        let mut f = vec![vec![ScalarExpr::zero(); d]; d];
        f[0][1] = ScalarExpr::coord(1);
        let ans = EikonalAnsatz::new(vec![ScalarExpr::zero(); d], f, None).unwrap();
        let sf = SplitFunctional::new(ans, lat, 0.0).unwrap();
        assert!(matches!(
            sf.gauss_residual(&FieldConfiguration::zeros(lat, 0.0)),
            Err(Error::NonPeriodicInput)
        ));
    }

    #[test]
    fn canonical_residual_vanishes_on_embedded_constant_field() {
        let lat = lattice();
        let (e, t) = (1.5, 0.25);
        let sf = SplitFunctional::new(EikonalAnsatz::constant_electric(4, e).unwrap(), lat, t).unwrap();
        let cfg = constant_config(lat, t, -0.4);
        let r = sf.canonical_hj_residual(&cfg, true).unwrap();
        assert!(r.residual.abs() <= 1e-12 * lat.volume());
        assert!((r.time_derivative + 0.5 * e * e * lat.volume()).abs() < 1e-13);
        assert!((r.residual_opposite_sign + e * e * lat.volume()).abs() < 1e-12);
        assert!((r.time_derivative_fd - r.time_derivative).abs() < 1e-9);
        let recs = sf.canonical_hj_records(&cfg, true).unwrap();
        assert!(recs[0].abs_err <= 1e-12 * lat.volume());
        assert_eq!(recs[0].lattice.n, 6);
    }

    #[test]
    fn magnetic_perturbation_residual_is_quarter_square_mismatch() {
        let lat = Lattice::new(4, 8, 0.125).unwrap();
        let e = 1.0;
        let sf = SplitFunctional::new(EikonalAnsatz::constant_electric(4, e).unwrap(), lat, 0.0).unwrap();
        let k = 2.0 * PI / lat.length();
        for eps in [0.05, 0.2, 0.5] {
            let mut cfg = FieldConfiguration::zeros(lat, 0.0);
            for s in 0..lat.sites() {
                cfg.component_mut(2)[s] = eps * (k * lat.point(s, 0.0)[1]).sin();
            }
            let r = sf.canonical_hj_residual(&cfg, true).unwrap().residual;
            let f = spatial_field_strength(&cfg).unwrap();
            // the embedded field has no magnetic part, so the mismatch is F^conf itself
            let mismatch: Vec<f64> = f.square_density().iter().map(|v| 0.25 * 2.0 * v).collect();
            let expected = lat.integrate(&mismatch);
            assert!(expected > 0.0);
            assert!((r - expected).abs() <= 1e-10 * expected, "{r} vs {expected}");
        }
    }

    #[test]
    fn embedding_check_on_states() {
        let lat = lattice();
        let e = 0.8;
        let sf = SplitFunctional::new(EikonalAnsatz::constant_electric(4, e).unwrap(), lat, 0.0).unwrap();
        let sol = SpacetimeSolution::constant_electric(4, e).unwrap();
        let st = MaxwellState::from_solution(&sol, lat, 0.0).unwrap();
        assert_eq!(sf.embedding_check_canonical(&st).unwrap(), 0.0);
        let mut doubled = st.clone();
        doubled.e[0].iter_mut().for_each(|v| *v *= 2.0);
        assert!((sf.embedding_check_canonical(&doubled).unwrap() - e).abs() < 1e-15);
        let zero = SplitFunctional::new(EikonalAnsatz::zero(4).unwrap(), lat, 0.0).unwrap();
        assert_eq!(zero.embedding_check_canonical(&MaxwellState::zeros(lat, 0.0)).unwrap(), 0.0);
    }
}
