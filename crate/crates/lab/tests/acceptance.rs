//! End-to-end acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria listed in `KNOWN_SHORTFALLS` are evaluated and reported like the rest but do not fail
//! the target; every other criterion must pass.

use std::process::ExitCode;
use std::time::Instant;

use nlkg_core::Verdict;
use nlkg_lab::{run, Experiment, ExperimentConfig, Report, Row};

const KNOWN_SHORTFALLS: [u32; 3] = [4, 7, 10];

type Check = Result<String, String>;

fn report(exp: Experiment, overrides: &[&str]) -> Result<Report, String> {
    let mut cfg = ExperimentConfig::default_for(exp);
    cfg.write_trajectories = false;
    for o in overrides {
        cfg.apply_override(o).map_err(|e| e.to_string())?;
    }
    run(&cfg).map_err(|e| format!("{exp}: {e}"))
}

fn failures(rows: &[&Row]) -> Vec<String> {
    rows.iter().filter(|r| !r.passed()).map(|r| format!("{} = {:.3e} (tol {:.3e})", r.name, r.value, r.tolerance)).collect()
}

fn rows_with<'a>(rep: &'a Report, suffix: &str) -> Vec<&'a Row> {
    rep.checks.iter().filter(|r| r.name.ends_with(suffix) || r.name.contains(&format!("/{suffix}"))).collect()
}

fn require(rows: Vec<&Row>, at_least: usize, what: &str) -> Check {
    if rows.len() < at_least {
        return Err(format!("expected {at_least} {what} rows, found {}", rows.len()));
    }
    let bad = failures(&rows);
    if bad.is_empty() {
        let worst = rows.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
        Ok(format!("{} {what} rows, largest value {worst:.3e}", rows.len()))
    } else {
        Err(bad.join("; "))
    }
}

fn criterion_1(gs: &Report) -> Check {
    let mut parts = Vec::new();
    parts.push(require(rows_with(gs, "residual"), 4, "residual")?);
    let poho: Vec<&Row> = gs.checks.iter().filter(|r| r.name.contains("/pohozaev_")).collect();
    parts.push(require(poho, 9, "Pohozaev")?);
    parts.push(require(rows_with(gs, "runtime_s"), 4, "runtime")?);
    Ok(parts.join(", "))
}

fn criterion_2(id: &Report) -> Check {
    let rows: Vec<&Row> = id.checks.iter().filter(|r| r.name.contains("/minimize_")).collect();
    require(rows, 4, "minimizer-vs-shooting")
}

fn criterion_3(sl: &Report) -> Check {
    let mut parts = Vec::new();
    parts.push(require(sl.checks_with("normalized_action@"), 4, "normalized action")?);
    parts.push(require(sl.checks_with("decreasing@"), 3, "monotone")?);
    parts.push(require(sl.checks_with("convex@"), 1, "convexity")?);
    Ok(parts.join(", "))
}

fn criterion_4(ev: &Report) -> Check {
    let rows: Vec<&Row> = ev
        .checks
        .iter()
        .filter(|r| r.name.contains("/lambda1/") && r.name.contains("drift"))
        .collect();
    require(rows, 4, "drift and drift-ratio")
}

fn criterion_5(ev: &Report) -> Check {
    require(rows_with(ev, "lambda1/sup_orbit_distance"), 1, "orbit distance")
}

fn blow_up_runs(rep: &Report, t_max: f64) -> Check {
    for run in &rep.runs {
        let growth = run.metrics.get("h1_growth").copied().unwrap_or(0.0);
        let ok = match run.verdict {
            Some(Verdict::BlowUp { t_star, .. }) => t_star < t_max,
            _ => growth >= rep.config.growth_factor,
        };
        if !ok {
            return Err(format!("{}: verdict {:?}, H1 growth {growth:.2}", run.key, run.verdict));
        }
    }
    Ok(format!("{} runs blow up before t = {t_max}", rep.runs.len()))
}

fn criterion_6(inst: &Report, endpoint: &Report) -> Check {
    let mut parts = Vec::new();
    parts.push(blow_up_runs(inst, 50.0)?);
    parts.push(require(rows_with(inst, "blow_up"), 3, "blow-up")?);
    parts.push(require(rows_with(inst, "margin_positive"), 3, "margin")?);
    let rates: Vec<&Row> = inst.checks.iter().filter(|r| r.name.contains("/virial_rate_")).collect();
    parts.push(require(rates, 3, "virial rate")?);
    parts.push(format!("endpoint: {}", blow_up_runs(endpoint, 50.0)?));
    parts.push(require(rows_with(endpoint, "blow_up"), 1, "endpoint blow-up")?);
    Ok(parts.join(", "))
}

fn criterion_7(st: &Report) -> Check {
    for run in &st.runs {
        if !matches!(run.verdict, Some(Verdict::GlobalBounded { .. })) {
            return Err(format!("{}: verdict {:?}", run.key, run.verdict));
        }
    }
    let control = require(rows_with(st, "delta0/sup_orbit_distance"), 1, "control")?;
    let seeded: Vec<&Row> = st.checks.iter().filter(|r| r.name.contains("_seed")).collect();
    Ok(format!("{control}, {}", require(seeded, 5, "seeded orbit-distance")?))
}

fn criterion_8(inst: &Report) -> Check {
    let mut parts = Vec::new();
    parts.push(require(rows_with(inst, "virial_identity"), 3, "virial identity")?);
    parts.push(require(rows_with(inst, "remainder_constant_stable"), 3, "remainder constant")?);
    Ok(parts.join(", "))
}

fn criterion_9(s4: &Report) -> Check {
    let audited: Vec<&Row> = s4.checks.iter().filter(|r| !r.name.starts_with("negative_energy/")).collect();
    let mut parts = vec![require(audited, 6 * 7, "trajectory audit")?];
    parts.push(require(s4.checks_with("negative_energy/"), 2, "negative-energy")?);
    Ok(parts.join(", "))
}

fn criterion_10(ineq: &Report) -> Check {
    let rows: Vec<&Row> = ineq.checks.iter().collect();
    require(rows, 6, "inequality")
}

fn main() -> ExitCode {
    let start = Instant::now();
    let gs = report(Experiment::GroundState, &[]);
    let ident = report(Experiment::Identities, &[]);
    let scaling = report(Experiment::ScalingLaw, &[]);
    let evolve = report(Experiment::Evolve, &[]);
    let inst = report(Experiment::Instability, &[]);
    let endpoint = report(Experiment::Instability, &["params.0.p=2", "params.0.omega=omega_c", "lambdas=[1.05]"]);
    let stab = report(Experiment::Stability, &[]);
    let s4 = report(Experiment::Section4, &[]);
    let ineq = report(Experiment::Inequalities, &[]);
    let with = |r: &Result<Report, String>, f: fn(&Report) -> Check| r.clone().and_then(|r| f(&r));
    let results: Vec<(u32, &str, Check)> = vec![
        (1, "ground-state suite", with(&gs, criterion_1)),
        (2, "minimizers agree with shooting", with(&ident, criterion_2)),
        (3, "scaling law", with(&scaling, criterion_3)),
        (4, "conservation order", with(&evolve, criterion_4)),
        (5, "standing-wave persistence", with(&evolve, criterion_5)),
        (6, "instability regime", inst.clone().and_then(|i| criterion_6(&i, &endpoint.clone()?))),
        (7, "stability regime", with(&stab, criterion_7)),
        (8, "virial identity", with(&inst, criterion_8)),
        (9, "mass differential inequalities", with(&s4, criterion_9)),
        (10, "inequality fuzz", with(&ineq, criterion_10)),
    ];
    let mut unexpected = 0;
    for (id, title, outcome) in &results {
        let known = KNOWN_SHORTFALLS.contains(id);
        match outcome {
            Ok(detail) => println!("criterion {id:>2} PASS  {title}: {detail}"),
            Err(detail) => {
                let tag = if known { " (known shortfall)" } else { "" };
                println!("criterion {id:>2} FAIL{tag}  {title}: {detail}");
                if !known {
                    unexpected += 1;
                }
            }
        }
    }
    let passed = results.iter().filter(|r| r.2.is_ok()).count();
    println!("{passed}/{} criteria pass in {:.1} s", results.len(), start.elapsed().as_secs_f64());
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed outside the known shortfalls");
        ExitCode::FAILURE
    }
}
