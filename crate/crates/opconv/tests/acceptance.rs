//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use opconv::campaign::{CONTROL_CUBE, CONTROL_GEOMETRIC_PATH};
use opconv::catalog::{FFamily, GFamily, MapFamily};
use opconv::cli::{counterexample_record, EIGENVALUE_TOL, ENTRY_TOL, REFERENCE_EIGENVALUES, REFERENCE_S_GEO_T};
use opconv::config::CampaignConfig;
use opconv::report::{summarize, CampaignReport, CheckSummary, ControlSummary, Tally};
use opconv::run_campaign;
use opconv_core::matrix::DEFAULT_LOEWNER_TOL;
use opconv_core::verifier::{ids, reproduce_counterexample};

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn campaign(checks: &[&str], dims: &[usize], trials: usize) -> Result<CampaignReport, String> {
    let config = CampaignConfig {
        seed: 1,
        dims: dims.to_vec(),
        trials_per_check: trials,
        tolerance: DEFAULT_LOEWNER_TOL,
        checks: checks.iter().map(|s| s.to_string()).collect(),
        ..CampaignConfig::default()
    };
    run_campaign(&config).map_err(|e| e.to_string())
}

fn check<'a>(report: &'a CampaignReport, id: &str) -> Result<&'a CheckSummary, String> {
    report.check(id).ok_or_else(|| format!("{id} missing from report"))
}

/// `trials` trials, no Fail, no error.
fn clean(report: &CampaignReport, id: &str, trials: u64) -> Result<(), String> {
    let c = check(report, id)?;
    let t = &c.tally;
    ensure(t.trials == trials, || format!("{id}: {} trials, expected {trials}", t.trials))?;
    ensure(t.fail == 0 && t.error == 0, || {
        format!(
            "{id}: {} fail, {} error (worst seed {:?}: {:?}; first error {:?})",
            t.fail, t.error, t.worst_seed, t.worst_instance, t.first_error
        )
    })
}

fn detail_max(report: &CampaignReport, id: &str, key: &str) -> Result<f64, String> {
    check(report, id)?
        .detail_max
        .get(key)
        .copied()
        .ok_or_else(|| format!("{id}: no `{key}` detail"))
}

fn counterexample() -> Verdict {
    let started = Instant::now();
    let c = reproduce_counterexample();
    let elapsed = started.elapsed();
    let geo = c.s_geo_t.base();
    for (i, row) in REFERENCE_S_GEO_T.iter().enumerate() {
        for (j, want) in row.iter().enumerate() {
            let got = geo.entry(i, j);
            ensure((got.re - want).abs() <= ENTRY_TOL && got.im.abs() <= ENTRY_TOL, || {
                format!("S#T[{i}][{j}] = {got}, expected {want}")
            })?;
        }
    }
    let (l1, l2) = c.eigenvalues;
    ensure((l1 - REFERENCE_EIGENVALUES.0).abs() <= EIGENVALUE_TOL, || format!("lambda1 = {l1}"))?;
    ensure((l2 - REFERENCE_EIGENVALUES.1).abs() <= EIGENVALUE_TOL, || format!("lambda2 = {l2}"))?;
    ensure(l2 < 0.0, || format!("lambda2 = {l2} is not negative"))?;
    ensure(c.outcome.is_fail(), || "geometric path check did not fail".into())?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    ensure(counterexample_record(DEFAULT_LOEWNER_TOL).reproduced, || "CLI record not reproduced".into())?;
    Ok(format!(
        "S#T = [[{:.5}, {:.5}], [{:.5}, {:.5}]], eigenvalues {l1:.4} / {l2:.4}, {elapsed:.2?}",
        geo.entry(0, 0).re,
        geo.entry(0, 1).re,
        geo.entry(1, 0).re,
        geo.entry(1, 1).re
    ))
}

fn theorem_campaign(report: &CampaignReport, elapsed: Duration) -> Verdict {
    let expected = FFamily::ALL.len() * GFamily::ALL.len() * MapFamily::ALL.len();
    ensure(report.combinations.len() == expected, || {
        format!("{} combinations, expected {expected}", report.combinations.len())
    })?;
    for c in &report.combinations {
        let t = &c.tally;
        ensure(t.trials == 1000 && t.fail == 0 && t.error == 0, || {
            format!(
                "{}/{}/{}: {} trials, {} fail, {} error, worst seed {:?}",
                c.f, c.g, c.map, t.trials, t.fail, t.error, t.worst_seed
            )
        })?;
    }
    clean(report, ids::MAIN_CONVEXITY, 1000 * expected as u64)?;
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    let main = &check(report, ids::MAIN_CONVEXITY)?.tally;
    Ok(format!(
        "{expected} combinations x 1000, 0 fail, {} marginal, worst relative margin {:.2e}, {:.1?}",
        main.marginal,
        main.worst_relative_margin.unwrap_or(f64::NAN),
        elapsed
    ))
}

fn proof_chain(report: &CampaignReport) -> Verdict {
    let n = check(report, ids::MAIN_CONVEXITY)?.tally.trials;
    let mut worst = Vec::new();
    for id in [ids::CHAIN_EQ1, ids::CHAIN_EQ2, ids::CHAIN_EQ3, ids::CHAIN_IMPLIES_MAIN] {
        clean(report, id, n)?;
        worst.push(format!("{id} {:.1e}", check(report, id)?.tally.worst_relative_margin.unwrap_or(f64::NAN)));
    }
    ensure(report.combinations.iter().all(|c| c.chain_link_fail == 0), || "a chain link failed".into())?;
    Ok(format!("{n} instances; worst relative margins: {}", worst.join(", ")))
}

fn lemmas() -> Verdict {
    let report = campaign(&[ids::HARMONIC_SUBADDITIVITY, ids::F_MEAN_INEQUALITY], &[2, 3, 4, 5, 6], 1000)?;
    clean(&report, ids::HARMONIC_SUBADDITIVITY, 1000)?;
    clean(&report, ids::F_MEAN_INEQUALITY, 1000)?;
    Ok("1000 harmonic (outer + inner) and 1000 f-mean instances over dims 2..6, 0 fail".into())
}

fn derivatives() -> Verdict {
    let report = campaign(&[ids::RESOLVENT_DERIVATIVES], &[2, 3, 4, 6], 100)?;
    clean(&report, ids::RESOLVENT_DERIVATIVES, 100)?;
    let first = detail_max(&report, ids::RESOLVENT_DERIVATIVES, "first.relative_error")?;
    let second = detail_max(&report, ids::RESOLVENT_DERIVATIVES, "second.relative_error")?;
    ensure(first <= 1e-6, || format!("first derivative relative error {first:e}"))?;
    ensure(second <= 1e-4, || format!("second derivative relative error {second:e}"))?;
    Ok(format!("100 instances, max relative error first {first:.1e}, second {second:.1e}"))
}

fn lieb() -> Verdict {
    let report = campaign(&[ids::LIEB_CONVEXITY], &[2, 3, 4, 6], 500)?;
    clean(&report, ids::LIEB_CONVEXITY, 500)?;
    let fd = detail_max(&report, ids::LIEB_CONVEXITY, "finite_difference.relative_error")?;
    ensure(fd <= 1e-4, || format!("analytic vs finite difference {fd:e}"))?;
    Ok(format!("500 instances, h''(0) and midpoint pass, max FD relative error {fd:.1e}"))
}

fn joint() -> Verdict {
    let report = campaign(&[ids::JOINT_CONVEXITY], &[2, 3, 4, 6], 500)?;
    clean(&report, ids::JOINT_CONVEXITY, 500)?;
    let diff = detail_max(&report, ids::JOINT_CONVEXITY, "agreement.difference")?;
    ensure(diff <= 1e-8, || format!("direct vs embedded margins differ by {diff:e}"))?;
    Ok(format!("500 instances, max direct/embedded margin difference {diff:.1e}"))
}

fn trace_switch() -> Verdict {
    let report = campaign(&[ids::TRACE_SWITCH], &[2, 3, 4, 6], 500)?;
    clean(&report, ids::TRACE_SWITCH, 500)?;
    let rel = detail_max(&report, ids::TRACE_SWITCH, "relative_difference")?;
    ensure(rel <= 1e-9, || format!("relative difference {rel:e}"))?;
    Ok(format!("500 instances over log, power:0.5, power:1, max relative difference {rel:.1e}"))
}

fn negative_controls(report: &CampaignReport) -> Verdict {
    let cube = report.control(CONTROL_CUBE).ok_or("cube control missing")?;
    ensure(cube.tally.trials == 500 && cube.tally.fail >= 1, || {
        format!("cube control: {} fails in {} trials", cube.tally.fail, cube.tally.trials)
    })?;
    let path = report.control(CONTROL_GEOMETRIC_PATH).ok_or("geometric path control missing")?;
    ensure(path.tally.fail == 1, || "geometric path control did not fail".into())?;
    ensure(report.summary.controls_detected && report.summary.ok, || format!("{:?}", report.summary))?;

    // A run whose controls all pass must not be reported as a success.
    let silent = ControlSummary {
        control_id: CONTROL_CUBE.into(),
        tally: Tally {
            trials: 500,
            pass: 500,
            ..Tally::default()
        },
        detected: false,
    };
    let s = summarize(&report.checks, &[silent, path.clone()]);
    ensure(!s.ok, || "undetected control still reported ok".into())?;
    Ok(format!(
        "cube control {} / 500 fail, geometric path fails (margin {:.4}), undetected controls fail the run",
        cube.tally.fail,
        path.tally.worst_margin.unwrap_or(f64::NAN)
    ))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = CampaignConfig {
        seed: 1,
        trials_per_check: 25,
        ..CampaignConfig::default()
    };
    std::fs::write(dir.path().join("config.json"), config.to_json()).map_err(|e| e.to_string())?;
    let body = |name: &str| -> Result<String, String> {
        let status = Command::new(env!("CARGO_BIN_EXE_opconv"))
            .current_dir(dir.path())
            .args(["verify", "--config", "config.json", "--out", name])
            .output()
            .map_err(|e| e.to_string())?
            .status;
        ensure(status.success(), || format!("verify exited with {status}"))?;
        let text = std::fs::read_to_string(dir.path().join(name)).map_err(|e| e.to_string())?;
        let mut report = CampaignReport::from_json(&text).map_err(|e| e.to_string())?;
        report.config.output = None;
        Ok(report.body_json())
    };
    let (a, b) = (body("a.json")?, body("b.json")?);
    ensure(a == b, || "report bodies differ".into())?;
    Ok(format!("two verify runs, identical {}-byte bodies", a.len()))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Verdict)> = Vec::new();
    results.push(("counterexample reproduction", counterexample()));

    let started = Instant::now();
    let main_report = campaign(&[ids::MAIN_CONVEXITY], &[2, 3, 4, 6], 1000);
    let elapsed = started.elapsed();
    match &main_report {
        Ok(r) => {
            results.push(("main inequality campaign", theorem_campaign(r, elapsed)));
            results.push(("proof chain decomposition", proof_chain(r)));
        }
        Err(e) => {
            results.push(("main inequality campaign", Err(e.clone())));
            results.push(("proof chain decomposition", Err(e.clone())));
        }
    }
    results.push(("lemma suites", lemmas()));
    results.push(("derivative oracles", derivatives()));
    results.push(("Lieb-type convexity", lieb()));
    results.push(("joint convexity", joint()));
    results.push(("trace switch identity", trace_switch()));
    results.push((
        "negative controls",
        main_report.as_ref().map_err(Clone::clone).and_then(negative_controls),
    ));
    results.push(("determinism", determinism()));

    let mut failed = 0;
    for (i, (name, verdict)) in results.iter().enumerate() {
        match verdict {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
