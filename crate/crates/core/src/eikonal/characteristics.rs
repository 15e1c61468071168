use rayon::prelude::*;

use super::EikonalAnsatz;
use crate::error::{Error, Result};
use crate::exprs::ScalarExpr;
use crate::fields::{spatial_field_strength, FieldConfiguration, Lattice};
use crate::minkowski::MAX_DIM;

/// `dA_i/dt = F_{0i} + D_i A_0` with `F_{0i}` read off the embedding
/// `F^{mu nu} = -dS^{[mu}/dA_{nu]}` at the current potentials.
fn velocity(ans: &EikonalAnsatz, gauge_grad: &[f64; MAX_DIM], a: &[f64; MAX_DIM], x: &[f64; MAX_DIM]) -> [f64; MAX_DIM] {
    let d = ans.dim();
    let mut v = [0.0; MAX_DIM];
    for i in 1..d {
        // F_{0i} = -F^{0i} = dS^{[0}/dA_{i]}
        let f0i = 0.5 * (ans.ds_da_entry(0, i, a, x) - ans.ds_da_entry(i, 0, a, x));
        v[i] = f0i + gauge_grad[i];
    }
    v
}

/// Lattice gradient of the gauge function at time `t`. Using the lattice
/// stencil rather than the analytic gradient keeps the gauge shift an exact
/// lattice gradient, so lattice field strengths do not see it.
fn gauge_gradient(lat: &Lattice, gauge: &ScalarExpr, t: f64) -> Vec<[f64; MAX_DIM]> {
    let chi: Vec<f64> = (0..lat.sites()).map(|s| gauge.eval(&lat.point(s, t))).collect();
    let mut out = vec![[0.0; MAX_DIM]; lat.sites()];
    for i in 1..lat.dim() {
        for (o, g) in out.iter_mut().zip(lat.central_diff(&chi, i)) {
            o[i] = g;
        }
    }
    out
}

fn stage(
    ans: &EikonalAnsatz,
    gauge: &ScalarExpr,
    base: &FieldConfiguration,
    at: &FieldConfiguration,
    t_eval: f64,
    step: f64,
    t_new: f64,
) -> Result<FieldConfiguration> {
    let lat = *base.lattice();
    let d = lat.dim();
    let grad = gauge_gradient(&lat, gauge, t_eval);
    let rows: Vec<[f64; MAX_DIM]> = (0..lat.sites())
        .into_par_iter()
        .map(|site| {
            let a = at.potential(site);
            let v = velocity(ans, &grad[site], &a, &lat.point(site, t_eval));
            let mut out = base.potential(site);
            for i in 1..d {
                out[i] += step * v[i];
            }
            out[0] = gauge.eval(&lat.point(site, t_new));
            out
        })
        .collect();
    let comps = (0..d).map(|mu| rows.iter().map(|r| r[mu]).collect()).collect();
    FieldConfiguration::new(lat, t_new, comps)
}

/// Evolves a slice with the embedding condition as the equation of motion,
/// using the explicit midpoint rule. Returns `steps + 1` slices starting
/// with `config0`. The `A_0` component of every slice, the first included,
/// is the gauge function, since that is what the update uses.
pub fn characteristics_evolve(
    ans: &EikonalAnsatz,
    config0: &FieldConfiguration,
    gauge: &ScalarExpr,
    dt: f64,
    steps: usize,
) -> Result<Vec<FieldConfiguration>> {
    ans.check_admissible()?;
    if ans.dim() != config0.lattice().dim() {
        return Err(Error::LatticeMismatch("ansatz and configuration dimensions differ".into()));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let lat = *config0.lattice();
    let mut first = config0.clone();
    for (s, a0) in first.component_mut(0).iter_mut().enumerate() {
        *a0 = gauge.eval(&lat.point(s, config0.t()));
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(first);
    for _ in 0..steps {
        let cur = out.last().unwrap();
        let t = cur.t();
        let mid = stage(ans, gauge, cur, cur, t, 0.5 * dt, t + 0.5 * dt)?;
        let mut next = stage(ans, gauge, cur, &mid, t + 0.5 * dt, dt, t + dt)?;
        next.set_periodic(cur.is_periodic());
        out.push(next);
    }
    Ok(out)
}

/// Discrete `max_nu |d_mu F^{mu nu}|` at every interior slice of a
/// uniformly spaced trajectory, with `F_{0i}` taken at half steps
/// `(A_i^{n+1} - A_i^n)/dt - D_i (A_0^{n+1} + A_0^n)/2`.
pub fn trajectory_maxwell_residual(traj: &[FieldConfiguration], dt: f64) -> Result<Vec<f64>> {
    if traj.len() < 3 {
        return Ok(Vec::new());
    }
    let lat = *traj[0].lattice();
    let d = lat.dim();
    let n = lat.sites();
    let half_step_e = |a: &FieldConfiguration, b: &FieldConfiguration| -> Vec<Vec<f64>> {
        let a0: Vec<f64> = a.component(0).iter().zip(b.component(0)).map(|(x, y)| 0.5 * (x + y)).collect();
        (1..d)
            .map(|i| {
                let grad = lat.central_diff(&a0, i);
                (0..n)
                    .map(|s| (b.component(i)[s] - a.component(i)[s]) / dt - grad[s])
                    .collect()
            })
            .collect()
    };
    let mut out = Vec::with_capacity(traj.len() - 2);
    let mut e_prev = half_step_e(&traj[0], &traj[1]);
    for w in traj.windows(3) {
        let mid = &w[1];
        let e_next = half_step_e(&w[1], &w[2]);
        let f = spatial_field_strength(mid)?;
        let mut worst: f64 = 0.0;
        // nu = 0: sum_i D_i F^{i0} = sum_i D_i F_{0i}
        let mut gauss = vec![0.0; n];
        for i in 1..d {
            let avg: Vec<f64> = e_prev[i - 1].iter().zip(&e_next[i - 1]).map(|(x, y)| 0.5 * (x + y)).collect();
            for (g, v) in gauss.iter_mut().zip(lat.central_diff(&avg, i)) {
                *g += v;
            }
        }
        worst = gauss.iter().fold(worst, |m, v| m.max(v.abs()));
        // nu = i: -d_0 F_{0i} + sum_j D_j F_{ji}
        for i in 1..d {
            let mut r: Vec<f64> = (0..n).map(|s| -(e_next[i - 1][s] - e_prev[i - 1][s]) / dt).collect();
            for j in 1..d {
                if j == i {
                    continue;
                }
                let fji: Vec<f64> = (0..n).map(|s| f.get(j, i, s)).collect();
                for (acc, v) in r.iter_mut().zip(lat.central_diff(&fji, j)) {
                    *acc += v;
                }
            }
            worst = r.iter().fold(worst, |m, v| m.max(v.abs()));
        }
        out.push(worst);
        e_prev = e_next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Lattice, SpacetimeSolution};

    #[test]
    fn zero_trajectory() {
        let lat = Lattice::new(4, 4, 0.25).unwrap();
        let ans = EikonalAnsatz::zero(4).unwrap();
        let cfg = FieldConfiguration::zeros(lat, 0.0);
        let traj = characteristics_evolve(&ans, &cfg, &ScalarExpr::zero(), 0.1, 5).unwrap();
        assert_eq!(traj.len(), 6);
        assert!(traj.iter().all(|c| c.components().iter().flatten().all(|v| *v == 0.0)));
    }

    #[test]
    fn constant_field_integrates_exactly() {
        let e = 1.5;
        let lat = Lattice::new(4, 4, 0.25).unwrap();
        let ans = EikonalAnsatz::constant_electric(4, e).unwrap();
        let cfg = FieldConfiguration::zeros(lat, 0.0);
        let dt = 0.125;
        let traj = characteristics_evolve(&ans, &cfg, &ScalarExpr::zero(), dt, 8).unwrap();
        let sol = SpacetimeSolution::constant_electric(4, e).unwrap();
        for (n, slice) in traj.iter().enumerate() {
            let t = n as f64 * dt;
            let exact = sol.sample(&lat, t).unwrap();
            assert!(slice.max_abs_diff(&exact) <= 1e-14, "step {n}");
            assert!((slice.t() - t).abs() < 1e-15);
        }
        let r = trajectory_maxwell_residual(&traj, dt).unwrap();
        assert!(r.iter().all(|v| *v <= 1e-12));
    }

    #[test]
    fn rejects_inadmissible_ansatz() {
        let d = 2;
        let f = vec![vec![ScalarExpr::Const(1.0); d]; d];
        let ans = EikonalAnsatz::new(vec![ScalarExpr::zero(); d], f, None).unwrap();
        let lat = Lattice::new(2, 4, 0.25).unwrap();
        let cfg = FieldConfiguration::zeros(lat, 0.0);
        assert!(matches!(
            characteristics_evolve(&ans, &cfg, &ScalarExpr::zero(), 0.1, 1),
            Err(Error::InadmissibleAnsatz(_))
        ));
    }

    #[test]
    fn gauge_function_only_shifts_potentials_by_a_gradient() {
        let lat = Lattice::new(3, 8, 0.125).unwrap();
        let ans = EikonalAnsatz::plane_wave(3, 0.2, &[1], lat.length()).unwrap();
        let sol = SpacetimeSolution::plane_wave(3, 0.2, &[1], lat.length()).unwrap();
        let cfg = sol.sample(&lat, 0.0).unwrap();
        let k = 2.0 * std::f64::consts::PI / lat.length();
        // chi = 0.1 sin(k x2) x0, so A_0 = d_0 chi
        let gauge = ScalarExpr::sin(&[0.0, 0.0, k], 0.0).scale(0.1);
        let dt = 0.01;
        let traj = characteristics_evolve(&ans, &cfg, &gauge, dt, 10).unwrap();
        let last = traj.last().unwrap();
        let exact = sol.sample(&lat, last.t()).unwrap();
        // A_2 picks up the lattice gradient D_2 chi = 0.1 sin(k h)/h cos(k x2) t
        let dk = (k * lat.h()).sin() / lat.h();
        for site in 0..lat.sites() {
            let x = lat.point(site, last.t());
            let shift = 0.1 * dk * (k * x[2]).cos() * last.t();
            let err = (last.component(2)[site] - exact.component(2)[site] - shift).abs();
            // the explicit midpoint rule carries an O(dt^2) phase error on the wave
            assert!(err < 1e-4, "site {site} err {err} shift {shift}");
            assert!((last.component(0)[site] - 0.1 * (k * x[2]).sin()).abs() < 1e-15);
        }
        // a pure gradient leaves the lattice field strength untouched
        let plain = characteristics_evolve(&ans, &cfg, &ScalarExpr::zero(), dt, 10).unwrap();
        let f_traj = spatial_field_strength(last).unwrap();
        let f_plain = spatial_field_strength(plain.last().unwrap()).unwrap();
        for s in 0..lat.sites() {
            assert!((f_traj.get(1, 2, s) - f_plain.get(1, 2, s)).abs() < 1e-13);
        }
        let with_gauge = trajectory_maxwell_residual(&traj, dt).unwrap();
        let without = trajectory_maxwell_residual(&plain, dt).unwrap();
        for (a, b) in with_gauge.iter().zip(&without) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}
