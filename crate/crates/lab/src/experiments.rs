//! The named experiments.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use nlkg_core::evolution::{make_lambda_data, make_perturbed_data, Monitor};
use nlkg_core::functionals::{gn_quotient, virial_k_from};
use nlkg_core::ground_state::{
    constrained_minimize_t, find_ground_state_unchecked, lagrange_degeneracy_check, mass_critical_level,
    mass_critical_nu, rescale_omega, scaling_exponent, seed_profile, MinimizeOptions,
};
use nlkg_core::inequalities::{corpus, gn_corpus_min, hardy_check, sobolev_fit};
use nlkg_core::monitors::{
    build_weights, margin_delta, membership_audit, negative_energy_flag, section4_audit, smooth_window,
    time_derivative, virial_remainder_audit, OrbitMonitor, VirialMonitor,
};
use nlkg_core::{
    evolve, find_ground_state, Canonical, FunctionalRecord, GroundState, ModelParams, RadialGrid, Regime, Run,
    StateSnapshot, Verdict, VirialIndex,
};
use rayon::prelude::*;

use crate::config::{ConfigError, Experiment, ExperimentConfig, GridBlock};
use crate::report::{Report, Row, RunError, RunSummary};

type Outcome<T> = Result<T, RunError>;

/// Runs the experiment named in `cfg` and writes its artifacts under `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Outcome<Report> {
    cfg.validate()?;
    let report = match cfg.experiment {
        Experiment::GroundState => run_ground_state(cfg),
        Experiment::Evolve => run_evolve(cfg),
        Experiment::Stability => run_stability(cfg),
        Experiment::Instability => run_instability(cfg),
        Experiment::ScalingLaw => run_scaling_law(cfg),
        Experiment::Identities => run_identities(cfg),
        Experiment::Inequalities => run_inequalities(cfg),
        Experiment::Section4 => run_section4(cfg),
    }?
    .finish();
    if let Some(dir) = &cfg.out {
        report.write(dir)?;
    }
    Ok(report)
}

fn grid_for(d: usize, g: &GridBlock, scale: usize) -> Outcome<Arc<RadialGrid>> {
    Ok(RadialGrid::shared(d, g.r_max, g.n * scale)?)
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Stable key of a parameter set, e.g. `d3_p2_g1_w0.8`.
pub fn params_key(p: &ModelParams) -> String {
    format!("d{}_p{}_g{}_w{}", p.d, num(p.p), num(p.gamma), num(p.omega))
}

fn run_dir(cfg: &ExperimentConfig, key: &str) -> Option<PathBuf> {
    cfg.out.as_ref().filter(|_| cfg.write_trajectories).map(|o| o.join("runs").join(key.replace('/', "__")))
}

fn save_run(cfg: &ExperimentConfig, key: &str, run: &Run) -> Outcome<()> {
    if let Some(dir) = run_dir(cfg, key) {
        std::fs::create_dir_all(&dir)?;
        run.record.write_csv(&dir.join("trajectory.csv"))?;
    }
    Ok(())
}

fn save_ground_state(cfg: &ExperimentConfig, key: &str, gs: &GroundState) -> Outcome<()> {
    if let Some(out) = &cfg.out {
        gs.write_archive(&out.join("ground-state").join(key))?;
    }
    Ok(())
}

fn evolve_from(
    cfg: &ExperimentConfig,
    init: &StateSnapshot,
    params: &ModelParams,
    monitors: &mut [Box<dyn Monitor>],
    dt_divisor: f64,
) -> Outcome<Run> {
    let mut ev = cfg.evolution.build(&init.grid);
    if dt_divisor != 1.0 {
        ev = ev.with_dt(ev.dt / dt_divisor);
        if let Some(k) = cfg.evolution.monitor_stride {
            ev.monitor_stride = k * dt_divisor.round().max(1.0) as usize;
        }
    }
    Ok(evolve(init, params, &ev, monitors)?)
}

fn verdict_metrics(run: &Run) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let h0 = run.record.samples.first().map_or(0.0, |s| s.h1);
    m.insert("h1_initial".into(), h0);
    m.insert("sup_h1".into(), run.record.sup_h1());
    m.insert("t_final".into(), run.final_state.t);
    if let Verdict::BlowUp { t_star, .. } = run.verdict {
        m.insert("t_star".into(), t_star);
    }
    m
}

fn sup_orbit(run: &Run) -> f64 {
    run.record.extra("orbit_dist").map_or(f64::NAN, |v| v.into_iter().fold(0.0, f64::max))
}

fn model_list(cfg: &ExperimentConfig) -> Outcome<Vec<ModelParams>> {
    cfg.params.iter().map(|b| b.resolve().map_err(RunError::from)).collect()
}

/// Ground-state solves with the invariant checks and archives.
pub fn run_ground_state(cfg: &ExperimentConfig) -> Outcome<Report> {
    let mut report = Report::new(cfg, "ground states of the stationary equation and their Pohozaev identities");
    let models = model_list(cfg)?;
    let solved: Vec<Outcome<(ModelParams, GroundState, f64)>> = models
        .par_iter()
        .map(|p| {
            let grid = grid_for(p.d, &cfg.grid, 1)?;
            let t0 = Instant::now();
            let gs = find_ground_state(p, grid)?;
            Ok((*p, gs, t0.elapsed().as_secs_f64()))
        })
        .collect();
    for item in solved {
        let (p, gs, secs) = item?;
        let key = params_key(&p);
        for c in gs.validate(nlkg_core::ground_state::TOL_K) {
            let row = if c.name == "positive" || c.name == "decreasing_beyond_max" {
                Row::flag(format!("{key}/{}", c.name), c.passed, c.value)
            } else {
                Row::le(format!("{key}/{}", c.name), c.value, c.tolerance)
            };
            report.checks.push(row);
        }
        report.checks.push(Row::flag(format!("{key}/scan_monotone"), gs.scan_monotone, gs.scan.len() as f64));
        for c in Canonical::ALL {
            report.checks.push(Row::info(format!("{key}/grid_pohozaev_{}", c.label()), gs.grid_pohozaev_defect(c)));
        }
        report.checks.push(Row::le(format!("{key}/runtime_s"), secs, 5.0));
        report.constants.insert(format!("{key}/S"), gs.record.s);
        report.constants.insert(format!("{key}/S_grid"), gs.r_level);
        report.constants.insert(format!("{key}/amplitude"), gs.amplitude);
        save_ground_state(cfg, &key, &gs)?;
    }
    Ok(report)
}

/// The canonical index to use for a minimizer cross-check, substituting (2,p−1) for an
/// inadmissible (d,2) below the mass-critical power.
fn cross_check_index(label: &str, p: &ModelParams) -> Outcome<(Canonical, VirialIndex, String)> {
    let c = Canonical::parse(label).ok_or_else(|| ConfigError(format!("unknown virial index '{label}'")))?;
    match c.index(p) {
        Ok(idx) => Ok((c, idx, String::new())),
        Err(e) if c == Canonical::D2 => {
            let idx = Canonical::TwoPm1.index(p)?;
            Ok((Canonical::TwoPm1, idx, format!("(d,2) inadmissible here ({e}); (2,p-1) used")))
        }
        Err(e) => Err(e.into()),
    }
}

/// Pohozaev suite, Lagrange values, mass-critical ν and the minimizer cross-check.
pub fn run_identities(cfg: &ExperimentConfig) -> Outcome<Report> {
    let mut report = Report::new(cfg, "Pohozaev identities, Lagrange degeneracy and agreement of minimizers with shooting");
    for p in model_list(cfg)? {
        let key = params_key(&p);
        let grid = grid_for(p.d, &cfg.grid, 1)?;
        let gs = find_ground_state(&p, grid.clone())?;
        let scale = gs.record.mass + gs.record.kinetic;
        report.checks.push(Row::le(format!("{key}/residual"), gs.residual, nlkg_core::ground_state::TOL_RESIDUAL));
        for c in gs.pohozaev_indices() {
            report.checks.push(Row::le(format!("{key}/pohozaev_{}", c.label()), gs.pohozaev_defect(c), 1e-6));
        }
        let nehari = VirialIndex::new(1.0, 0.0, &p)?;
        let kn = virial_k_from(&gs.record.norms(), &p, &nehari).abs() / scale;
        report.checks.push(Row::le(format!("{key}/pohozaev_1,0"), kn, 1e-6));
        report.checks.push(Row::le(format!("{key}/functional_consistency"), gs.record.consistency_defect(&p), 1e-12));
        for c in Canonical::ALL {
            match lagrange_degeneracy_check(&gs, c) {
                Ok(v) => report.checks.push(Row::info(format!("{key}/lagrange_{}", c.label()), v)),
                Err(e) => report
                    .checks
                    .push(Row::flag(format!("{key}/lagrange_{}", c.label()), false, f64::NAN).note(e.to_string())),
            }
        }
        if p.regime() == Regime::MassCritical {
            let nu = mass_critical_nu(&gs)?;
            report.checks.push(Row::flag(format!("{key}/nu_positive"), nu > 0.0, nu));
        }
        let results: Vec<Outcome<(String, f64, usize, String)>> = cfg
            .indices
            .par_iter()
            .map(|label| {
                let (c, idx, note) = cross_check_index(label, &p)?;
                let seed = seed_profile(&p, &grid);
                let m = constrained_minimize_t(&p, grid.clone(), &idx, &seed, MinimizeOptions::default())?;
                Ok((c.label().to_string(), m.r_level, m.iterations, note))
            })
            .collect();
        for r in results {
            let (label, s_min, iterations, note) = r?;
            let rel = (s_min - gs.record.s).abs() / gs.record.s;
            report.checks.push(Row::le(format!("{key}/minimize_{label}"), rel, 1e-5).note(note));
            report.constants.insert(format!("{key}/S_minimize_{label}"), s_min);
            report.constants.insert(format!("{key}/iterations_minimize_{label}"), iterations as f64);
        }
        report.constants.insert(format!("{key}/S"), gs.record.s);
        save_ground_state(cfg, &key, &gs)?;
    }
    Ok(report)
}

/// Conservation order and standing-wave persistence.
pub fn run_evolve(cfg: &ExperimentConfig) -> Outcome<Report> {
    let mut report = Report::new(cfg, "conservation of energy and charge and persistence of the standing wave");
    let p = cfg.model()?;
    let key = params_key(&p);
    let grid = grid_for(p.d, &cfg.grid, 1)?;
    let gs = find_ground_state(&p, grid)?;
    let mut jobs: Vec<(String, StateSnapshot, bool)> = Vec::new();
    for &l in &cfg.lambdas {
        jobs.push((format!("{key}/lambda{}", num(l)), make_lambda_data(&gs, l)?, l == 1.0));
    }
    jobs.push((format!("{key}/perturbed"), make_perturbed_data(&gs, 1e-2, cfg.rng_seed)?, false));
    let pairs: Vec<Outcome<(String, Run, Run, bool)>> = jobs
        .par_iter()
        .map(|(k, init, standing)| {
            let mut m1: Vec<Box<dyn Monitor>> = vec![Box::new(OrbitMonitor { gs: gs.clone() })];
            let mut m2: Vec<Box<dyn Monitor>> = vec![Box::new(OrbitMonitor { gs: gs.clone() })];
            let a = evolve_from(cfg, init, &p, &mut m1, 1.0)?;
            let b = evolve_from(cfg, init, &p, &mut m2, 2.0)?;
            Ok((k.clone(), a, b, *standing))
        })
        .collect();
    for item in pairs {
        let (k, a, b, standing) = item?;
        let (ea, eb) = (a.record.relative_drift(|s| s.record.e), b.record.relative_drift(|s| s.record.e));
        let (ca, cb) = (a.record.relative_drift(|s| s.record.c), b.record.relative_drift(|s| s.record.c));
        let ratio = |x: f64, y: f64| if y > 0.0 { x / y } else { f64::INFINITY };
        let (re, rc) = (ratio(ea, eb), ratio(ca, cb));
        if k.ends_with("perturbed") {
            report.checks.push(Row::info(format!("{k}/energy_drift_ratio"), re).note("context: generic trajectory"));
            report.checks.push(Row::info(format!("{k}/energy_drift"), ea));
        } else {
            report.checks.push(Row::le(format!("{k}/energy_drift"), ea, 1e-5));
            report.checks.push(Row::le(format!("{k}/charge_drift"), ca, 1e-5));
            report.checks.push(
                Row { tolerance: 0.5, ..Row::flag(format!("{k}/energy_drift_ratio"), (re - 4.0).abs() <= 0.5, re) }
                    .note("|ratio - 4| <= tolerance"),
            );
            report.checks.push(
                Row { tolerance: 0.5, ..Row::flag(format!("{k}/charge_drift_ratio"), (rc - 4.0).abs() <= 0.5, rc) }
                    .note("|ratio - 4| <= tolerance"),
            );
            if standing {
                report.checks.push(Row::le(format!("{k}/sup_orbit_distance"), sup_orbit(&a), 1e-3));
            }
        }
        let mut metrics = verdict_metrics(&a);
        metrics.insert("energy_drift".into(), ea);
        metrics.insert("energy_drift_half_dt".into(), eb);
        metrics.insert("charge_drift".into(), ca);
        metrics.insert("charge_drift_half_dt".into(), cb);
        metrics.insert("sup_orbit_distance".into(), sup_orbit(&a));
        save_run(cfg, &k, &a)?;
        report.runs.push(RunSummary { key: k, verdict: Some(a.verdict), metrics, resolution: 1, passed: true });
    }
    Ok(report)
}

struct StabilityJob {
    key: String,
    delta: f64,
    seed: u64,
}

fn stability_attempt(
    cfg: &ExperimentConfig,
    p: &ModelParams,
    job: &StabilityJob,
    scale: usize,
) -> Outcome<(RunSummary, Run)> {
    let grid = grid_for(p.d, &cfg.grid, scale)?;
    let gs = find_ground_state(p, grid)?;
    let init = make_perturbed_data(&gs, job.delta, job.seed)?;
    let mut mons: Vec<Box<dyn Monitor>> = vec![Box::new(OrbitMonitor { gs: gs.clone() })];
    let run = evolve_from(cfg, &init, p, &mut mons, 1.0)?;
    let sup = sup_orbit(&run);
    let limit = if job.delta == 0.0 { 1e-3 } else { cfg.epsilon };
    let passed = run.verdict.is_bounded() && sup <= limit;
    let mut metrics = verdict_metrics(&run);
    metrics.insert("sup_orbit_distance".into(), sup);
    metrics.insert("limit".into(), limit);
    metrics.insert("delta".into(), job.delta);
    Ok((RunSummary { key: job.key.clone(), verdict: Some(run.verdict), metrics, resolution: scale, passed }, run))
}

fn stability_jobs(cfg: &ExperimentConfig, p: &ModelParams) -> Vec<StabilityJob> {
    let key = params_key(p);
    let mut jobs = Vec::new();
    for &delta in &cfg.deltas {
        if delta == 0.0 {
            jobs.push(StabilityJob { key: format!("{key}/delta0"), delta, seed: 0 });
        } else {
            for &seed in &cfg.seeds {
                jobs.push(StabilityJob { key: format!("{key}/delta{}_seed{seed}", num(delta)), delta, seed });
            }
        }
    }
    jobs
}

/// Perturbations of a ground state in the stable window stay close to its orbit.
pub fn run_stability(cfg: &ExperimentConfig) -> Outcome<Report> {
    let mut report = Report::new(cfg, "orbital stability of ground states for omega_c < |omega| < 1");
    let p = cfg.model()?;
    let wc = p.omega_c.filter(|_| p.regime() == Regime::MassSub).ok_or_else(|| {
        ConfigError(format!("stability needs p < 1 + 4/d, got p = {}", p.p))
    })?;
    if !(p.omega.abs() > wc) {
        return Err(ConfigError(format!("stability needs |omega| > omega_c = {wc}, got {}", p.omega)).into());
    }
    let jobs = stability_jobs(cfg, &p);
    let results: Vec<Outcome<(RunSummary, Run)>> = jobs
        .par_iter()
        .map(|job| {
            let first = stability_attempt(cfg, &p, job, 1)?;
            if first.0.passed || !cfg.retry {
                return Ok(first);
            }
            stability_attempt(cfg, &p, job, 2)
        })
        .collect();
    for item in results {
        let (summary, run) = item?;
        let sup = summary.metrics["sup_orbit_distance"];
        let limit = summary.metrics["limit"];
        let name = format!("{}/sup_orbit_distance", summary.key);
        let row = if run.verdict.is_bounded() {
            Row::le(name, sup, limit)
        } else {
            Row::flag(name, false, sup).note(format!("verdict {:?}", run.verdict))
        };
        report.checks.push(if summary.resolution > 1 { row.note("after resolution-doubling retry") } else { row });
        save_run(cfg, &summary.key, &run)?;
        report.runs.push(summary);
    }
    Ok(report)
}

fn require_unstable(p: &ModelParams) -> Outcome<()> {
    match p.regime() {
        Regime::MassSuper | Regime::MassCritical => Ok(()),
        Regime::MassSub => {
            let wc = p.omega_c.unwrap_or(0.0);
            if p.omega.abs() <= wc + 1e-12 {
                Ok(())
            } else {
                Err(ConfigError(format!("instability needs |omega| <= omega_c = {wc} below the mass-critical power")).into())
            }
        }
    }
}

struct InstabilityOutcome {
    rows: Vec<Row>,
    summary: RunSummary,
    run: Run,
    audit_constants: BTreeMap<String, f64>,
}

fn instability_attempt(cfg: &ExperimentConfig, p: &ModelParams, lambda: f64, scale: usize) -> Outcome<InstabilityOutcome> {
    let grid = grid_for(p.d, &cfg.grid, scale)?;
    let gs = find_ground_state(p, grid.clone())?;
    let key = format!("{}/lambda{}", params_key(p), num(lambda));
    let r_far = 0.4995 * grid.r_max;
    let mut mons: Vec<Box<dyn Monitor>> = Vec::new();
    for &r in &cfg.radii {
        mons.push(Box::new(VirialMonitor::new(build_weights(&grid, r)?, *p, &format!("@{}", num(r)))));
    }
    mons.push(Box::new(VirialMonitor::new(build_weights(&grid, r_far)?, *p, "@far")));
    mons.push(Box::new(OrbitMonitor { gs: gs.clone() }));
    let init = make_lambda_data(&gs, lambda)?;
    let run = evolve_from(cfg, &init, p, &mut mons, 1.0)?;
    let mut rows = Vec::new();
    let mut metrics = verdict_metrics(&run);
    let mut audit_constants = BTreeMap::new();
    let h0 = metrics["h1_initial"];
    let growth = run.record.sup_h1() / h0;
    metrics.insert("h1_growth".into(), growth);
    let t_end = cfg.evolution.t_end;
    let mut passed = true;
    if lambda > 1.0 {
        let (ok, note) = match run.verdict {
            Verdict::BlowUp { t_star, .. } => (t_star < t_end, format!("blow-up at t* = {t_star:.4}")),
            _ if growth >= cfg.growth_factor => (true, format!("undecided at t_end, H1 grew {growth:.1}x")),
            v => (false, format!("verdict {v:?}")),
        };
        rows.push(Row::flag(format!("{key}/blow_up"), ok, metrics.get("t_star").copied().unwrap_or(growth)).note(note));
        passed &= ok;
        match margin_delta(&gs, lambda) {
            Ok(m) => {
                rows.push(Row::flag(format!("{key}/margin_positive"), m.delta > 0.0, m.delta));
                let which = if p.regime() == Regime::MassSub { "I_R2" } else { "I_R1" };
                let window = smooth_window(&run.record, 2.0);
                let r_top = cfg.radii.iter().copied().fold(f64::NAN, f64::max);
                let label = if r_top.is_nan() { "@far".to_string() } else { format!("@{}", num(r_top)) };
                let series = run.record.extra(&format!("{which}{label}")).unwrap_or_default();
                let di = time_derivative(&run.record.times(), &series);
                let min_rate = window.clone().map(|k| di[k]).fold(f64::INFINITY, f64::min);
                let ok = min_rate >= 0.9 * m.delta;
                passed &= ok;
                rows.push(
                    Row::ge(format!("{key}/virial_rate_{which}{label}"), min_rate, 0.9 * m.delta)
                        .note(format!("delta = {:.6e}, window of {} samples", m.delta, window.len())),
                );
                metrics.insert("delta".into(), m.delta);
                metrics.insert("min_virial_rate".into(), min_rate);
                let radii: Vec<(f64, String)> = cfg.radii.iter().map(|&r| (r, format!("@{}", num(r)))).collect();
                match virial_remainder_audit(&run.record, &radii, "@far", p, window) {
                    Ok(a) => {
                        rows.push(Row::le(format!("{key}/virial_identity"), a.identity_rel, 0.02));
                        let c0: Vec<f64> = a.rows.iter().map(|r| r.c0_est.max(0.0)).collect();
                        rows.push(
                            Row::flag(format!("{key}/remainder_constant_stable"), a.stable, c0.iter().copied().fold(0.0, f64::max))
                                .note(format!("floor {:.3e}/R^2", a.identity_floor)),
                        );
                        for r in &a.rows {
                            audit_constants.insert(format!("{key}/C0_est@{}", num(r.radius)), r.c0_est);
                            audit_constants.insert(format!("{key}/C0_est2@{}", num(r.radius)), r.c0_est2);
                        }
                        audit_constants.insert(format!("{key}/identity_floor"), a.identity_floor);
                    }
                    Err(e) => {
                        rows.push(Row::flag(format!("{key}/virial_identity"), false, f64::NAN).note(e.to_string()));
                        passed = false;
                    }
                }
            }
            Err(e) => {
                rows.push(Row::flag(format!("{key}/margin_positive"), false, f64::NAN).note(e.to_string()));
                passed = false;
            }
        }
    } else {
        let od = run.record.extra("orbit_dist").unwrap_or_default();
        let t = run.record.times();
        let leave = od.iter().position(|&x| x > 1e-3).map_or(f64::INFINITY, |k| t[k]);
        rows.push(
            Row::info(format!("{key}/control_orbit_exit_time"), leave)
                .note(format!("control row, verdict {:?}", run.verdict)),
        );
    }
    let summary = RunSummary { key, verdict: Some(run.verdict), metrics, resolution: scale, passed };
    Ok(InstabilityOutcome { rows, summary, run, audit_constants })
}

/// Blow-up of the data (λQ, iλωQ) and the localized virial audit.
pub fn run_instability(cfg: &ExperimentConfig) -> Outcome<Report> {
    let mut report = Report::new(cfg, "very strong instability of ground states through the localized virial");
    let models = model_list(cfg)?;
    let mut jobs = Vec::new();
    for p in &models {
        require_unstable(p)?;
        for &l in &cfg.lambdas {
            jobs.push((*p, l));
        }
    }
    let results: Vec<Outcome<InstabilityOutcome>> = jobs
        .par_iter()
        .map(|(p, l)| {
            let first = instability_attempt(cfg, p, *l, 1)?;
            if first.summary.passed || !cfg.retry {
                return Ok(first);
            }
            instability_attempt(cfg, p, *l, 2)
        })
        .collect();
    for item in results {
        let o = item?;
        let retried = o.summary.resolution > 1;
        report.checks.extend(o.rows.into_iter().map(|r| if retried { r.note("after resolution-doubling retry") } else { r }));
        report.constants.extend(o.audit_constants);
        save_run(cfg, &o.summary.key, &o.run)?;
        report.runs.push(o.summary);
    }
    Ok(report)
}

/// S(Q_ω)(1−ω²)^{d/2−(p+1)/(p−1)} constancy, monotonicity and convexity of ω ↦ S(Q_ω).
pub fn run_scaling_law(cfg: &ExperimentConfig) -> Outcome<Report> {
    let mut report = Report::new(cfg, "scaling law of the ground-state action in omega");
    let base = cfg.model()?;
    let mut all: Vec<f64> = cfg.omegas.iter().chain(&cfg.convexity_omegas).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    let grid = grid_for(base.d, &cfg.grid, 1)?;
    let solved: Vec<Outcome<(f64, GroundState)>> = all
        .par_iter()
        .map(|&w| Ok((w, find_ground_state(&base.with_omega(w)?, grid.clone())?)))
        .collect();
    let solved: Vec<(f64, GroundState)> = solved.into_iter().collect::<Outcome<_>>()?;
    let e = scaling_exponent(&base);
    report.constants.insert("exponent".into(), e);
    let normalized = |gs: &GroundState| gs.record.s / gs.params.m2().powf(e);
    let reference = solved
        .iter()
        .find(|(w, _)| Some(w) == cfg.omegas.first())
        .map(|(_, gs)| normalized(gs))
        .ok_or_else(|| ConfigError("scaling-law needs at least one omega".into()))?;
    for (w, gs) in &solved {
        report.constants.insert(format!("S@{}", num(*w)), gs.record.s);
        if cfg.omegas.contains(w) {
            let dev = (normalized(gs) / reference - 1.0).abs();
            report.checks.push(Row::le(format!("normalized_action@{}", num(*w)), dev, 1e-4));
        }
    }
    let ws: Vec<f64> = solved.iter().map(|(w, _)| *w).collect();
    let ss: Vec<f64> = solved.iter().map(|(_, gs)| gs.record.s).collect();
    for k in 1..ss.len() {
        if ws[k - 1] >= 0.0 {
            let diff = ss[k] - ss[k - 1];
            report.checks.push(Row::le(format!("decreasing@{}-{}", num(ws[k - 1]), num(ws[k])), diff, 0.0).note("first difference"));
        }
    }
    if let Some(wc) = base.omega_c.filter(|_| base.regime() == Regime::MassSub) {
        for k in 1..ss.len().saturating_sub(1) {
            if ws[k - 1] > wc {
                let (h1, h2) = (ws[k] - ws[k - 1], ws[k + 1] - ws[k]);
                let second = 2.0 * ((ss[k + 1] - ss[k]) / h2 - (ss[k] - ss[k - 1]) / h1) / (h1 + h2);
                report.checks.push(Row::flag(format!("convex@{}", num(ws[k])), second > 0.0, second).note("second difference"));
            }
        }
    }
    if let Some((_, g0)) = solved.iter().find(|(w, _)| *w == 0.0) {
        for (w, gs) in solved.iter().filter(|(w, _)| *w != 0.0) {
            let r = rescale_omega(g0, *w)?;
            let rel = (r.record.s - gs.record.s).abs() / gs.record.s;
            report.checks.push(Row::le(format!("rescaled_vs_direct@{}", num(*w)), rel, 1e-4));
            report.checks.push(Row::le(format!("rescaled_residual@{}", num(*w)), r.residual, 1e-8));
        }
    }
    Ok(report)
}

/// Hardy, radial Sobolev and Gagliardo–Nirenberg checks over a seeded corpus.
pub fn run_inequalities(cfg: &ExperimentConfig) -> Outcome<Report> {
    let mut report = Report::new(cfg, "Hardy, radial Sobolev and Gagliardo-Nirenberg inequalities on random radial fields");
    let p = cfg.model()?;
    let fields = corpus(cfg.rng_seed, cfg.corpus_size);
    let grid = grid_for(p.d, &cfg.grid, 1)?;
    let hardy = hardy_check(&grid, &fields);
    report.checks.push(Row::le("hardy_worst_relative_excess", hardy.worst_value, hardy.tolerance));
    let radii = if cfg.radii.is_empty() { vec![1.0, 2.0, 4.0] } else { cfg.radii.clone() };
    let fit = sobolev_fit(&grid, &fields, &radii, p.p)?;
    report.checks.push(Row::le("radial_sobolev_refinement_change", fit.relative_change(), 1e-2));
    report.constants.insert("radial_sobolev_C".into(), fit.constant);
    report.constants.insert("radial_sobolev_C_refined".into(), fit.refined);

    let p0 = p.with_gamma(0.0)?;
    let q0 = find_ground_state_unchecked(&p0, grid.clone())?;
    let j_q0 = gn_quotient(&grid, &q0.profile, &p0)?;
    let j_corpus0 = gn_corpus_min(&grid, &fields, &p0)?;
    let inv_c = j_q0.min(j_corpus0);
    report.constants.insert("inv_C_GN0".into(), inv_c);
    report.constants.insert("C_GN0".into(), 1.0 / inv_c);
    report.checks.push(Row::le("gn_ground_state_attains_gamma0", (j_q0 - inv_c) / inv_c, 0.0));
    let bound = (1.0 - 1e-3) * inv_c;
    if p.gamma > 0.0 {
        let jc = gn_corpus_min(&grid, &fields, &p)?;
        report.checks.push(Row::ge("gn_corpus_min_gamma", jc, bound));
        let q = find_ground_state(&p, grid.clone())?;
        let jq = gn_quotient(&grid, &q.profile, &p)?;
        report.checks.push(Row::ge("gn_ground_state_gamma", jq, bound));
        report.constants.insert("J_gamma_ground_state".into(), jq);
        if p.regime() == Regime::MassCritical {
            let closed = mass_critical_level(&p, 1.0 / inv_c);
            let rel = (q.record.s - closed).abs() / closed;
            report.checks.push(Row::le("mass_critical_level_closed_form", rel, 1e-2).note(format!(
                "r = {:.8}, closed form with C_GN(0) = {closed:.8}",
                q.record.s
            )));
            let closed0 = mass_critical_level(&p0, 1.0 / inv_c);
            report.checks.push(
                Row::info("mass_critical_level_gamma0", (q0.record.s - closed0).abs() / closed0)
                    .note("gamma = 0 ground state against the same closed form"),
            );
            let radial = mass_critical_level(&p, 1.0 / jq);
            report.checks.push(
                Row::info("mass_critical_level_radial_constant", (q.record.s - radial).abs() / radial)
                    .note("closed form with the radial constant 1/J_gamma(Q_gamma)"),
            );
            report.constants.insert("nu".into(), mass_critical_nu(&q)?);
        }
    }
    Ok(report)
}

/// The mass differential-inequality chain on bounded trajectories and the E < 0 predictor.
pub fn run_section4(cfg: &ExperimentConfig) -> Outcome<Report> {
    let mut report = Report::new(cfg, "differential inequalities for the mass along global solutions");
    let p = cfg.model()?;
    let grid = grid_for(p.d, &cfg.grid, 1)?;
    let gs = find_ground_state(&p, grid.clone())?;
    let jobs = stability_jobs(cfg, &p);
    let results: Vec<Outcome<(String, Run)>> = jobs
        .par_iter()
        .map(|job| {
            let init = make_perturbed_data(&gs, job.delta, job.seed)?;
            Ok((job.key.clone(), evolve_from(cfg, &init, &p, &mut [], 1.0)?))
        })
        .collect();
    for item in results {
        let (key, run) = item?;
        let mut metrics = verdict_metrics(&run);
        if run.verdict.is_bounded() {
            let audit = section4_audit(&run.record, &p)?;
            for c in &audit.checks {
                let row = Row {
                    name: format!("{key}/{}", c.name),
                    status: c.status,
                    value: c.worst_value,
                    tolerance: c.tolerance,
                    note: c.worst_t.map(|t| format!("worst at t = {t:.4}")).unwrap_or_default(),
                };
                report.checks.push(row);
            }
            let m = membership_audit(&run.record, gs.r_level, &p);
            report.checks.push(Row { name: format!("{key}/{}", m.name), status: m.status, value: m.worst_value, tolerance: m.tolerance, note: String::new() });
            report.audits.insert(key.clone(), audit);
        } else {
            report.checks.push(Row::info(format!("{key}/not_audited"), 0.0).note(format!("verdict {:?}", run.verdict)));
        }
        metrics.insert("energy_drift".into(), run.record.relative_drift(|s| s.record.e));
        save_run(cfg, &key, &run)?;
        report.runs.push(RunSummary { key, verdict: Some(run.verdict), metrics, resolution: 1, passed: true });
    }

    let mut ladder = cfg.lambdas.clone();
    ladder.sort_by(f64::total_cmp);
    let synthetic = ladder.iter().find_map(|&l| {
        let u = make_lambda_data(&gs, l).ok()?;
        let s = StateSnapshot::new(u.grid.clone(), 0.0, u.u, vec![Default::default(); u.grid.n]).ok()?;
        negative_energy_flag(&s, &p).then_some((l, s))
    });
    let Some((lambda, data)) = synthetic else {
        report.checks.push(Row::flag("negative_energy/flagged", false, f64::NAN).note("no lambda in the ladder gives E < 0"));
        return Ok(report);
    };
    let key = format!("{}/negative_energy_lambda{}", params_key(&p), num(lambda));
    let e0 = FunctionalRecord::of_state(&data, &p).e;
    report.checks.push(Row::le("negative_energy/flagged", e0, 0.0).note(format!("(lambda Q, 0) with lambda = {lambda}")));
    let run = evolve_from(cfg, &data, &p, &mut [], 1.0)?;
    report.checks.push(
        Row::flag("negative_energy/blows_up", run.verdict.is_blow_up(), run.final_state.t)
            .note(format!("verdict {:?}", run.verdict)),
    );
    if run.record.len() >= 5 {
        if let Ok(a) = section4_audit(&run.record, &p) {
            report.audits.insert(key.clone(), a);
        }
    }
    save_run(cfg, &key, &run)?;
    let metrics = verdict_metrics(&run);
    report.runs.push(RunSummary { key, verdict: Some(run.verdict), metrics, resolution: 1, passed: run.verdict.is_blow_up() });
    Ok(report)
}
