//! Computations behind the command-line verbs, each producing a
//! serializable result with a pass/fail verdict.

use std::fmt::Write as _;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::audit::{audit_refinement, run_audit, AuditOptions, AuditReport, Status, ToleranceClass};
use crate::convergence::{ConvergenceStudy, ORDER_BOUNDS};
use crate::eikonal::{characteristics_evolve, trajectory_maxwell_residual, EikonalAnsatz};
use crate::error::{Error, Result};
use crate::exprs::ScalarExpr;
use crate::fields::{
    fdtd_step, spatial_field_strength, FieldConfiguration, Lattice, LatticeMeta, MaxwellState, SpacetimeSolution,
};
use crate::minkowski::MAX_DIM;
use crate::scenario::{ConvergenceCheck, Scenario};

/// Orders at or above this pass for the evolution comparison, which mixes
/// `dt` and `h` errors of two different schemes.
pub const EVOLVE_MIN_ORDER: f64 = 1.8;

/// Errors at or below this count as exact in the evolution studies.
pub const EVOLVE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePoint {
    pub a: [f64; MAX_DIM],
    pub x: [f64; MAX_DIM],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DdwCheck {
    pub seed: u64,
    /// Lattice sites with random potentials plus free random points.
    pub samples: usize,
    pub tolerance: f64,
    pub max_residual: f64,
    pub worst_residual_at: Option<SamplePoint>,
    /// Largest entry of the symmetric part of `dS/dA`.
    pub max_constraint: f64,
    pub worst_constraint_at: Option<SamplePoint>,
    /// `max |R(A, x) - R(0, x)|`, reported for linear ansaetze only.
    pub max_a_dependence: Option<f64>,
    pub ddw_passed: bool,
    pub constraints_passed: bool,
    pub passed: bool,
}

/// Samples the covariant residual and the symmetric constraint at every
/// lattice site (random `A`) and at `extra` random spacetime points.
pub fn verify_ddw(
    ans: &EikonalAnsatz,
    lat: &Lattice,
    t: f64,
    extra: usize,
    seed: u64,
    tolerance: f64,
) -> Result<DdwCheck> {
    if ans.dim() != lat.dim() {
        return Err(Error::LatticeMismatch("ansatz and lattice dimensions differ".into()));
    }
    let d = ans.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_a = |rng: &mut ChaCha8Rng| {
        let mut a = [0.0; MAX_DIM];
        for v in a.iter_mut().take(d) {
            *v = rng.random_range(-1.0..1.0);
        }
        a
    };
    let mut points: Vec<SamplePoint> = Vec::with_capacity(lat.sites() + extra);
    for site in 0..lat.sites() {
        points.push(SamplePoint { a: random_a(&mut rng), x: lat.point(site, t) });
    }
    for _ in 0..extra {
        let a = random_a(&mut rng);
        let mut x = [0.0; MAX_DIM];
        x[0] = t + rng.random_range(-1.0..1.0);
        for v in x.iter_mut().take(d).skip(1) {
            *v = rng.random_range(0.0..lat.length());
        }
        points.push(SamplePoint { a, x });
    }
    let linear = ans.is_linear();
    let per_point: Vec<(f64, f64, f64)> = points
        .par_iter()
        .map(|p| {
            let r = ans.ddw_residual(&p.a, &p.x);
            let c = ans.constraint_residual(&p.a, &p.x).max_abs();
            let dep = if linear { (r - ans.ddw_residual(&[0.0; MAX_DIM], &p.x)).abs() } else { 0.0 };
            (r.abs(), c, dep)
        })
        .collect();
    let argmax = |key: fn(&(f64, f64, f64)) -> f64| {
        per_point
            .iter()
            .enumerate()
            .fold((0.0f64, None), |(m, at), (k, v)| {
                let v = key(v);
                // NaN compares false and must still surface
                if v > m || v.is_nan() && !m.is_nan() {
                    (v, Some(points[k]))
                } else {
                    (m, at)
                }
            })
    };
    let (max_residual, worst_residual_at) = argmax(|v| v.0);
    let (max_constraint, worst_constraint_at) = argmax(|v| v.1);
    let max_a_dependence = linear.then(|| argmax(|v| v.2).0);
    let ddw_passed = max_residual <= tolerance && max_a_dependence.is_none_or(|v| v <= tolerance);
    let constraints_passed = max_constraint <= tolerance;
    Ok(DdwCheck {
        seed,
        samples: points.len(),
        tolerance,
        max_residual,
        worst_residual_at,
        max_constraint,
        worst_constraint_at,
        max_a_dependence,
        ddw_passed,
        constraints_passed,
        passed: ddw_passed && constraints_passed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveStep {
    pub step: usize,
    pub t: f64,
    /// `max |A_i|` difference between the two evolutions.
    pub a_divergence: f64,
    /// `max` difference of `E_i` and lattice `F_ij`; insensitive to the gauge.
    pub field_divergence: f64,
    /// Discrete Maxwell residual of the characteristics trajectory.
    pub maxwell_residual: Option<f64>,
    /// `max` difference of `E_i` and lattice `F_ij` against the sampled
    /// analytic solution.
    pub analytic_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveReport {
    pub lattice: LatticeMeta,
    pub dt: f64,
    pub steps: usize,
    pub gauge: String,
    pub records: Vec<EvolveStep>,
    pub max_a_divergence: f64,
    pub max_field_divergence: f64,
    pub max_maxwell_residual: f64,
    pub max_analytic_error: Option<f64>,
    /// Relative change of the reference evolution's energy.
    pub reference_energy_drift: f64,
    /// `C (dt^2 + h^2) (1 + T) (max|E| + max|lap E| + max|grad lap E|)`.
    pub tolerance: f64,
    pub passed: bool,
}

/// `E_i = F_{0i}` read off the embedding at every site.
fn embedded_electric(ans: &EikonalAnsatz, cfg: &FieldConfiguration) -> Vec<Vec<f64>> {
    let lat = cfg.lattice();
    (1..lat.dim())
        .map(|i| {
            (0..lat.sites())
                .into_par_iter()
                .map(|s| {
                    let a = cfg.potential(s);
                    let x = lat.point(s, cfg.t());
                    0.5 * (ans.ds_da_entry(0, i, &a, &x) - ans.ds_da_entry(i, 0, &a, &x))
                })
                .collect()
        })
        .collect()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn field_diff(e1: &[Vec<f64>], c1: &FieldConfiguration, e2: &[Vec<f64>], c2: &FieldConfiguration) -> Result<f64> {
    let (f1, f2) = (spatial_field_strength(c1)?, spatial_field_strength(c2)?);
    let d = c1.lattice().dim();
    let mut worst = max_diff(e1, e2);
    for i in 1..d {
        for j in i + 1..d {
            for s in 0..c1.lattice().sites() {
                worst = worst.max((f1.get(i, j, s) - f2.get(i, j, s)).abs());
            }
        }
    }
    Ok(worst)
}

fn scale_of(lat: &Lattice, e: &[Vec<f64>]) -> f64 {
    let lap = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for k in 1..lat.dim() {
            let dd = lat.central_diff(&lat.central_diff(v, k), k);
            out.iter_mut().zip(dd).for_each(|(o, x)| *o += x);
        }
        out
    };
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut m = [0.0f64; 3];
    for c in e {
        let l = lap(c);
        m[0] = m[0].max(max(c));
        m[1] = m[1].max(max(&l));
        for k in 1..lat.dim() {
            m[2] = m[2].max(max(&lat.central_diff(&l, k)));
        }
    }
    m.iter().sum()
}

/// Characteristics evolution against the leapfrog reference from the same
/// initial data, with `E_i` for the reference taken from the embedding.
pub fn evolve(
    ans: &EikonalAnsatz,
    cfg0: &FieldConfiguration,
    gauge: &ScalarExpr,
    dt: f64,
    steps: usize,
    reference: Option<&SpacetimeSolution>,
    lattice_constant: f64,
) -> Result<(EvolveReport, Vec<FieldConfiguration>)> {
    let lat = *cfg0.lattice();
    let traj = characteristics_evolve(ans, cfg0, gauge, dt, steps)?;
    let residuals = trajectory_maxwell_residual(&traj, dt)?;
    let e0 = embedded_electric(ans, cfg0);
    let mut state = MaxwellState::new(lat, cfg0.t(), (1..lat.dim()).map(|i| cfg0.component(i).to_vec()).collect(), e0)?;
    let energy0 = state.energy();
    let tolerance = lattice_constant
        * (dt * dt + lat.h() * lat.h())
        * (1.0 + dt * steps as f64)
        * scale_of(&lat, &state.e)
        + 1e-12;
    let mut records = Vec::with_capacity(steps + 1);
    for (n, slice) in traj.iter().enumerate() {
        if n > 0 {
            state = fdtd_step(&state, dt)?;
        }
        let e_char = embedded_electric(ans, slice);
        let a_char: Vec<Vec<f64>> = (1..lat.dim()).map(|i| slice.component(i).to_vec()).collect();
        let field_divergence = field_diff(&e_char, slice, &state.e, &state.to_config())?;
        let analytic_error = match reference {
            Some(sol) => {
                let exact = MaxwellState::from_solution(sol, lat, slice.t())?;
                Some(field_diff(&e_char, slice, &exact.e, &exact.to_config())?)
            }
            None => None,
        };
        let maxwell_residual = (n >= 1 && n < traj.len() - 1).then(|| residuals[n - 1]);
        records.push(EvolveStep {
            step: n,
            t: slice.t(),
            a_divergence: max_diff(&a_char, &state.a),
            field_divergence,
            maxwell_residual,
            analytic_error,
        });
    }
    let fold = |f: fn(&EvolveStep) -> f64| records.iter().map(f).fold(0.0, f64::max);
    let max_field_divergence = fold(|r| r.field_divergence);
    let max_analytic_error = reference.map(|_| fold(|r| r.analytic_error.unwrap_or(0.0)));
    let report = EvolveReport {
        lattice: lat.meta(),
        dt,
        steps,
        gauge: gauge.to_string(),
        max_a_divergence: fold(|r| r.a_divergence),
        max_field_divergence,
        max_maxwell_residual: residuals.iter().copied().fold(0.0, f64::max),
        max_analytic_error,
        reference_energy_drift: (state.energy() - energy0).abs() / energy0.max(f64::MIN_POSITIVE),
        tolerance,
        passed: max_field_divergence.is_finite() && max_field_divergence <= tolerance,
        records,
    };
    Ok((report, traj))
}

/// Writes `step,t,i1,...,A_0,...` rows for every slice.
pub fn write_trajectory_csv<W: Write>(traj: &[FieldConfiguration], out: W) -> Result<()> {
    let Some(first) = traj.first() else { return Ok(()) };
    let lat = *first.lattice();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string(), "t".to_string()];
    header.extend(FieldConfiguration::csv_header(lat.dim()));
    w.write_record(&header)?;
    for (n, slice) in traj.iter().enumerate() {
        for site in 0..lat.sites() {
            let idx = lat.multi_index(site);
            let mut row = vec![n.to_string(), format!("{:?}", slice.t())];
            row.extend(idx[..lat.spatial_dim()].iter().map(usize::to_string));
            row.extend(slice.components().iter().map(|c| format!("{:?}", c[site])));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub check: ConvergenceCheck,
    pub lattices: Vec<LatticeMeta>,
    /// Time steps per level, for the evolution check.
    pub dt: Option<Vec<f64>>,
    pub studies: Vec<ConvergenceStudy>,
    /// Non-lattice steps that did not pass on some level.
    pub failed_exact_steps: Vec<String>,
    pub passed: bool,
}

fn audit_options(sc: &Scenario) -> AuditOptions {
    AuditOptions { lattice_constant: sc.lattice_constant, seed: sc.seed }
}

pub fn convergence(sc: &Scenario) -> Result<ConvergenceReport> {
    if sc.levels < 3 {
        return Err(Error::InvalidArgument(format!("a convergence study needs at least 3 levels, got {}", sc.levels)));
    }
    let lattices = sc.refinement_lattices()?;
    let metas: Vec<LatticeMeta> = lattices.iter().map(Lattice::meta).collect();
    if sc.check == ConvergenceCheck::Evolve {
        return evolve_convergence(sc, &lattices, metas);
    }
    let ans = sc.build_ansatz(&lattices[0])?;
    let refinement = audit_refinement(&ans, &lattices, |lat| sc.build_config(lat), &audit_options(sc))?;
    let wanted = match sc.check {
        ConvergenceCheck::Gauss => Some("gauss-law"),
        ConvergenceCheck::ChainRule => Some("total-divergence-chain-rule"),
        ConvergenceCheck::Telescoping => Some("total-divergence-telescoping"),
        _ => None,
    };
    let mut failed_exact_steps = Vec::new();
    let mut passed = refinement.passed;
    let studies = match wanted {
        None => {
            for (k, step) in refinement.levels[0].steps.iter().enumerate() {
                if step.class != ToleranceClass::Lattice
                    && refinement.levels.iter().any(|l| l.steps[k].status != Status::Pass)
                {
                    failed_exact_steps.push(step.step.clone());
                }
            }
            refinement.studies
        }
        Some(id) => {
            let records: Vec<_> = refinement.levels.iter().filter_map(|l| l.step(id)).collect();
            let floor = lattices.iter().map(|l| 1e-10 * l.volume()).fold(0.0, f64::max);
            let study = ConvergenceStudy::new(
                id,
                lattices.iter().map(Lattice::h).collect(),
                records.iter().map(|r| r.abs_err).collect(),
                floor,
                ORDER_BOUNDS,
            );
            let exact = records[0].class != ToleranceClass::Lattice;
            let statuses_ok = if exact {
                records.iter().all(|r| r.status == Status::Pass)
            } else {
                records.iter().all(|r| r.status != Status::Skipped)
            };
            if exact && !statuses_ok {
                failed_exact_steps.push(id.to_string());
            }
            passed = study.passed && statuses_ok;
            vec![study]
        }
    };
    Ok(ConvergenceReport { check: sc.check, lattices: metas, dt: None, studies, failed_exact_steps, passed })
}

fn evolve_convergence(sc: &Scenario, lattices: &[Lattice], metas: Vec<LatticeMeta>) -> Result<ConvergenceReport> {
    let steps0 = if sc.steps == 0 { 20 } else { sc.steps };
    let dt0 = sc.dt.unwrap_or(lattices[0].h() / 4.0);
    let mut dts = Vec::new();
    let (mut div, mut res) = (Vec::new(), Vec::new());
    for (k, lat) in lattices.iter().enumerate() {
        let scale = (1usize << k) as f64;
        let dt = dt0 / scale;
        let ans = sc.build_ansatz(lat)?;
        let cfg = sc.build_config(lat)?;
        let (rep, _) = evolve(&ans, &cfg, &sc.gauge, dt, steps0 << k, None, sc.lattice_constant)?;
        dts.push(dt);
        div.push(rep.max_field_divergence);
        res.push(rep.max_maxwell_residual);
    }
    let h: Vec<f64> = lattices.iter().map(Lattice::h).collect();
    let bounds = (EVOLVE_MIN_ORDER, f64::INFINITY);
    let studies = vec![
        ConvergenceStudy::new("characteristics-vs-reference", h.clone(), div, EVOLVE_FLOOR, bounds),
        ConvergenceStudy::new("trajectory-maxwell-residual", h, res, EVOLVE_FLOOR, bounds),
    ];
    let passed = studies.iter().all(|s| s.passed);
    Ok(ConvergenceReport {
        check: ConvergenceCheck::Evolve,
        lattices: metas,
        dt: Some(dts),
        studies,
        failed_exact_steps: Vec::new(),
        passed,
    })
}

/// Everything the scenario supports, in one document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullReport {
    pub verify_ddw: DdwCheck,
    pub audit: AuditReport,
    pub evolve: Option<EvolveReport>,
    pub convergence: Option<ConvergenceReport>,
    pub passed: bool,
}

pub fn run_verify_ddw(sc: &Scenario) -> Result<DdwCheck> {
    let lat = sc.lattice()?;
    verify_ddw(&sc.build_ansatz(&lat)?, &lat, sc.t, sc.random_samples, sc.seed, sc.ddw_tolerance)
}

pub fn run_scenario_audit(sc: &Scenario) -> Result<AuditReport> {
    let lat = sc.lattice()?;
    run_audit(&sc.build_ansatz(&lat)?, &sc.build_config(&lat)?, &audit_options(sc))
}

pub fn run_evolve(sc: &Scenario) -> Result<(EvolveReport, Vec<FieldConfiguration>)> {
    if sc.steps == 0 {
        return Err(Error::InvalidArgument("evolution needs steps > 0".into()));
    }
    let lat = sc.lattice()?;
    let reference = sc.reference_solution(&lat);
    evolve(
        &sc.build_ansatz(&lat)?,
        &sc.build_config(&lat)?,
        &sc.gauge,
        sc.dt.unwrap_or(lat.h() / 4.0),
        sc.steps,
        reference.as_ref(),
        sc.lattice_constant,
    )
}

/// Runs verification and the audit always, evolution when `steps > 0` and
/// the convergence study when `levels >= 3`.
pub fn run_full(sc: &Scenario) -> Result<FullReport> {
    let verify_ddw = run_verify_ddw(sc)?;
    let audit = run_scenario_audit(sc)?;
    let evolve = if sc.steps > 0 { Some(run_evolve(sc)?.0) } else { None };
    let convergence = if sc.levels >= 3 { Some(convergence(sc)?) } else { None };
    let passed = verify_ddw.passed
        && audit.passed()
        && evolve.as_ref().is_none_or(|e| e.passed)
        && convergence.as_ref().is_none_or(|c| c.passed);
    Ok(FullReport { verify_ddw, audit, evolve, convergence, passed })
}

fn verdict(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn ddw_table(r: &DdwCheck) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "samples            {}", r.samples);
    let _ = writeln!(out, "seed               {}", r.seed);
    let _ = writeln!(out, "max ddw residual   {:.3e}  {}", r.max_residual, verdict(r.ddw_passed));
    let _ = writeln!(out, "max constraint     {:.3e}  {}", r.max_constraint, verdict(r.constraints_passed));
    if let Some(v) = r.max_a_dependence {
        let _ = writeln!(out, "max A dependence   {v:.3e}");
    }
    let _ = writeln!(out, "tolerance          {:.3e}", r.tolerance);
    let _ = writeln!(out, "{}", verdict(r.passed));
    out
}

pub fn evolve_table(r: &EvolveReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>6} {:>10} {:>12} {:>12} {:>12} {:>12}",
        "step", "t", "A diff", "field diff", "maxwell", "analytic"
    );
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3e}"));
    for s in &r.records {
        let _ = writeln!(
            out,
            "{:>6} {:>10.4} {:>12.3e} {:>12.3e} {:>12} {:>12}",
            s.step,
            s.t,
            s.a_divergence,
            s.field_divergence,
            opt(s.maxwell_residual),
            opt(s.analytic_error)
        );
    }
    let _ = writeln!(
        out,
        "max field diff {:.3e}, tolerance {:.3e}: {}",
        r.max_field_divergence,
        r.tolerance,
        verdict(r.passed)
    );
    out
}

pub fn convergence_table(r: &ConvergenceReport) -> String {
    let mut out = String::new();
    for s in &r.studies {
        let _ = writeln!(out, "{} (floor {:.1e}): {}", s.label, s.floor, verdict(s.passed));
        for (k, (h, e)) in s.h.iter().zip(&s.errors).enumerate() {
            let order = match k.checked_sub(1).and_then(|k| s.orders[k]) {
                Some(p) => format!("{p:.3}"),
                None if k == 0 => String::new(),
                None => "floor".into(),
            };
            let _ = writeln!(out, "  h = {h:<10.5} err = {e:<12.4e} {order}");
        }
    }
    for id in &r.failed_exact_steps {
        let _ = writeln!(out, "{id}: FAIL on some level");
    }
    let _ = writeln!(out, "{}", verdict(r.passed));
    out
}

pub fn full_table(r: &FullReport) -> String {
    let mut out = String::from("== verify-ddw ==\n");
    out += &ddw_table(&r.verify_ddw);
    out += "== audit ==\n";
    out += &r.audit.to_table();
    if let Some(e) = &r.evolve {
        out += "== evolve ==\n";
        out += &evolve_table(e);
    }
    if let Some(c) = &r.convergence {
        out += "== convergence ==\n";
        out += &convergence_table(c);
    }
    let _ = writeln!(out, "{}", verdict(r.passed));
    out
}
