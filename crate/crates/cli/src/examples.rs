//! `verify-example`: the check battery for each worked example.

use std::fs;
use std::path::Path;

use anyhow::Result;
use rand::seq::index::sample as pick;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relfix_core::engine::{
    certify_cauchy, certify_fixed_point, gap_chaining_violations, iterate, probe_uniqueness, IterateOptions,
    ProbeOptions, Uniqueness,
};
use relfix_core::fixtures::{ExampleId, Fixture};
use relfix_core::relation::{check_complete_on, check_t_closed, check_weak_t_closed, find_start_points, is_preserving};
use relfix_core::tail::TailWindow;
use relfix_core::verifier::{compare_classical, estimate_lambda, estimate_lambda_on_sample, verify_theorem, VerifyOptions};
use relfix_core::wdistance::{check_rlsc, check_triangle, check_w3, default_delta_ladder};
use relfix_core::{OrbitTrace, Point, StopReason};

use crate::report::Report;

/// Extra orbits drawn from the sample for the lemma checks.
const SEEDED_ORBITS: usize = 5;
const EPS_GRID: [f64; 5] = [1.0, 0.5, 0.25, 0.1, 0.05];

pub struct ExampleArgs {
    pub id: ExampleId,
    pub step: Option<f64>,
    pub seed: u64,
}

pub fn run(args: &ExampleArgs, out: &Path) -> Result<Report> {
    let fx = args.id.fixture();
    let step = args.step.unwrap_or(fx.default_step);
    let sample = fx.sample(step)?;
    let mut report = Report::new("verify-example", args.id.as_str());
    report.setting("step", step);
    report.setting("seed", args.seed);
    report.setting("sample_size", sample.len());
    report.setting("map", fx.map.name());
    report.setting("relation", fx.relation.name());
    report.setting("p", fx.p.name());

    let orbit = match args.id {
        ExampleId::Ex1_7 => {
            parity(&fx, &sample, &mut report)?;
            None
        }
        ExampleId::Ex1_13 | ExampleId::Ex1_14 => {
            semicontinuity(&fx, &sample, &mut report)?;
            None
        }
        ExampleId::Ex2_3 | ExampleId::Ex2_4 => Some(w_distance_suite(&fx, &sample, step, args.seed, &mut report)?),
    };
    if let Some(trace) = orbit {
        fs::write(out.join("orbit.csv"), trace.to_csv())?;
    }
    Ok(report)
}

fn s(v: f64) -> Point {
    Point::Scalar(v)
}

fn parity(fx: &Fixture, sample: &[Point], report: &mut Report) -> Result<()> {
    let strong = check_t_closed(&fx.relation, &fx.map, sample)?;
    let witness = strong.witnesses.first().map(|(x, y)| format!("({x:?}, {y:?})"));
    report.check(
        "t_closed_fails_with_witness",
        !strong.holds() && witness.is_some(),
        format!("{} related pairs with unrelated images, first {}", strong.witnesses.len(), witness.unwrap_or_default()),
    );
    let weak = check_weak_t_closed(&fx.relation, &fx.map, sample)?;
    report.check(
        "weak_t_closed",
        weak.holds(),
        format!("{:?} on {} points", weak.verdict, weak.sample_size),
    );
    let small: Vec<Point> = (1..=4).map(|i| s(i as f64)).collect();
    let complete = check_complete_on(&fx.relation, &small)?;
    report.note(
        "complete_on_1_to_4",
        complete.holds(),
        format!("unrelated pairs: {:?}", complete.witnesses),
    );
    let theorem = verify_theorem(&fx.map, &fx.space, &fx.relation, &fx.p, sample, &s(2.0), &VerifyOptions::for_space(&fx.space));
    report.check(
        "theorem_incomplete_without_contraction",
        !theorem.contraction.passed,
        format!("{:?}: {}", theorem.overall, theorem.contraction.detail),
    );
    report.result("theorem", &theorem);
    Ok(())
}

fn semicontinuity(fx: &Fixture, sample: &[Point], report: &mut Report) -> Result<()> {
    let anchor = s(0.0);
    for probe in fx.lsc_probes() {
        let r = check_rlsc(&fx.p, &anchor, &probe.relation, &fx.space, &probe.seq, &probe.limit, 1e-9, &TailWindow::default())?;
        let at_limit = fx.p.eval(&anchor, &probe.limit);
        let detail = match r.witnesses.first() {
            Some(w) => format!("tail value {} below f(limit) = {}", w.lhs, w.rhs),
            None => format!("tail stays at or above f(limit) = {at_limit}"),
        };
        let kind = if probe.relation.name() == fx.relation.name() { "r_lsc" } else { "plain_lsc" };
        let expect = if probe.expect_holds { "holds" } else { "fails" };
        report.check(
            &format!("{kind}_{expect}: {}", probe.label),
            r.holds() == probe.expect_holds,
            detail,
        );
        if !probe.expect_holds {
            report.note(
                &format!("preserving: {}", probe.label),
                is_preserving(&fx.relation, &probe.seq),
                format!("under {}", fx.relation.name()),
            );
        }
    }
    let starts = find_start_points(&fx.relation, &fx.map, sample)?;
    report.note("start_points", !starts.is_empty(), format!("{} of {} sampled points", starts.len(), sample.len()));
    Ok(())
}

fn w_distance_suite(fx: &Fixture, sample: &[Point], step: f64, seed: u64, report: &mut Report) -> Result<OrbitTrace> {
    let is_2_3 = fx.id == ExampleId::Ex2_3;

    let tri = check_triangle(&fx.p, sample)?;
    report.check("w1_triangle", tri.holds(), format!("{} violating triples", tri.witnesses.len()));
    let w3 = check_w3(&fx.p, &fx.space, sample, &EPS_GRID, &default_delta_ladder())?;
    let table: Vec<String> = w3
        .eps_table
        .iter()
        .map(|r| format!("eps {} -> delta {}", r.eps, r.delta.map_or("none".into(), |d| d.to_string())))
        .collect();
    report.check("w3_separation", w3.holds(), table.join(", "));
    report.result("w3_eps_table", &w3.eps_table);

    let (lsc_seq, lsc_limit, label): (Vec<Point>, Point, &str) = if is_2_3 {
        ((1..=100).map(|n| s(2.0 + 1.0 / n as f64)).collect(), s(2.0), "2 + 1/n")
    } else {
        ((0..40).scan(1.0, |x, _| {
            let cur = *x;
            *x = relfix_core::fixtures::four_branch(cur);
            Some(s(cur))
        })
        .collect(), s(0.0), "orbit of 1")
    };
    let anchor = s(1.0);
    let w2 = check_rlsc(&fx.p, &anchor, &fx.relation, &fx.space, &lsc_seq, &lsc_limit, 1e-9, &TailWindow::default())?;
    report.check("w2_r_lsc", w2.holds(), format!("along {label}, anchor 1"));

    let closed = check_t_closed(&fx.relation, &fx.map, sample)?;
    report.check("t_closed", closed.holds(), format!("{:?} on {} points", closed.verdict, closed.sample_size));

    // classical comparison at the pair singled out for each example
    let pair = if is_2_3 { (s(2.0), s(1.0)) } else { (s(1.0), s(0.75)) };
    let cmp = compare_classical(&fx.map, &fx.space, &fx.relation, std::slice::from_ref(&pair))?;
    let row = &cmp.rows[0];
    let at_pair = estimate_lambda(&fx.map, &fx.p, &fx.relation, std::slice::from_ref(&pair), false)?;
    if is_2_3 {
        report.check(
            "banach_fails_at_(2,1)",
            row.banach_fails() && (row.d_images - 1.5).abs() <= 1e-12 && (row.d_points - 1.0).abs() <= 1e-12,
            format!("d(Tx,Ty) = {}, d(x,y) = {}", row.d_images, row.d_points),
        );
        report.check(
            "mt_contraction_fails_at_(2,1)",
            row.mt_fails() && (row.m_t - 1.25).abs() <= 1e-12,
            format!("M_T = {} < d(Tx,Ty) = {}", row.m_t, row.d_images),
        );
        report.check(
            "w_ratio_at_(2,1)",
            (at_pair.lambda_hat - 5.0 / 6.0).abs() <= 1e-12,
            format!("p(Tx,Ty)/p(x,y) = {}", at_pair.lambda_hat),
        );
    } else {
        report.check(
            "mt_contraction_fails_at_(1,3/4)",
            row.mt_fails() && (row.m_t - 0.5).abs() <= 1e-12,
            format!("d(Tx,Ty) = {} = M_T = {}", row.d_images, row.m_t),
        );
        report.note("w_ratio_at_(1,3/4)", at_pair.lambda_hat < 1.0, format!("{}", at_pair.lambda_hat));
    }
    let all_pairs = relfix_core::verifier::related_pairs(&fx.relation, sample);
    let full = compare_classical(&fx.map, &fx.space, &fx.relation, &all_pairs)?;
    report.note(
        "classical_failures_on_sample",
        !full.banach_failures.is_empty(),
        format!(
            "{} Banach and {} M_T failures over {} related pairs",
            full.banach_failures.len(),
            full.mt_failures.len(),
            full.rows.len()
        ),
    );

    let orbit_seed = if is_2_3 { s(2.5) } else { s(1.0) };
    let opts = VerifyOptions::for_space(&fx.space);
    let theorem = verify_theorem(&fx.map, &fx.space, &fx.relation, &fx.p, sample, &orbit_seed, &opts);
    report.check("theorem_hypotheses", theorem.overall == relfix_core::verifier::Overall::AllVerifiedOnSample, format!("{:?}", theorem.overall));
    for a in &theorem.advisories {
        report.advise(a.clone());
    }
    let lambda = theorem.lambda_hat().unwrap_or(f64::NAN);
    report.result("lambda_hat", lambda);
    report.result("theorem", &theorem);
    if is_2_3 {
        let finer = estimate_lambda_on_sample(&fx.map, &fx.p, &fx.relation, &fx.sample(step / 2.0)?, false)?;
        report.result("lambda_hat_half_step", finer.lambda_hat);
        report.advise(format!(
            "lambda_hat = {lambda} at step {step} and {} at step {}: related pairs near (2, 2) push the ratio toward 1, \
             so no single lambda < 1 is confirmed for all pairs",
            finer.lambda_hat,
            step / 2.0
        ));
    } else {
        report.check("lambda_hat_is_3/4", (lambda - 0.75).abs() <= 1e-12, format!("{lambda}"));
    }
    if !(lambda < 1.0) {
        anyhow::bail!("no contraction constant for {}", fx.id);
    }

    // main orbit
    let x0 = s(2.0);
    let trace = iterate(&fx.map, &x0, &fx.p, &fx.space, &IterateOptions::scalar(lambda))?;
    let limit = trace.last().clone();
    let residual = fx.space.distance(&limit, &fx.map.apply(&limit)?)?;
    report.result("orbit_start", &x0);
    report.result("orbit_steps", trace.steps());
    report.result("fixed_point", &limit);
    report.result("fixed_point_residual", residual);
    let max_steps = if is_2_3 { 1 } else { 60 };
    report.check(
        "orbit_converges",
        trace.stop_reason == StopReason::Converged && residual <= 1e-9 && trace.steps() <= max_steps,
        format!("{:?} after {} steps at {limit:?}, residual {residual:e}", trace.stop_reason, trace.steps()),
    );
    let expected_fixed = if is_2_3 { 2.0 } else { 0.0 };
    report.check(
        "fixed_point_value",
        limit.as_scalar().is_some_and(|v| (v - expected_fixed).abs() <= 1e-9),
        format!("expected {expected_fixed}"),
    );
    if !is_preserving(&fx.relation, &trace.points) {
        report.advise(format!("the orbit of {x0:?} is not {}-preserving", fx.relation.name()));
    }
    let cert = certify_cauchy(&trace, &fx.p, 1e-10)?;
    report.check(
        "cauchy_certificate",
        cert.holds,
        format!("{} violations over {} pairs", cert.violations.len(), cert.pairs_checked),
    );
    let chain = gap_chaining_violations(&trace, 1e-12)?;
    report.check("gap_chaining", chain.is_empty(), format!("violations at {chain:?}"));

    let fp = certify_fixed_point(&fx.map, &limit, &fx.p, &fx.space, 1e-9)?;
    report.result("p_at_fixed_point", fp.p_self);
    let probe = probe_uniqueness(
        &fx.relation,
        &fx.map,
        &fx.p,
        &fx.space,
        std::slice::from_ref(&limit),
        sample,
        &ProbeOptions { lambda, n_steps: 200, tol: 1e-9 },
    )?;
    let expected = if is_2_3 { Uniqueness::UniqueByCondition2 } else { Uniqueness::UniqueByCondition1 };
    let z_ok = is_2_3 || probe.z == Some(s(0.0));
    report.check(
        "uniqueness",
        probe.verdict == expected && z_ok,
        format!("{:?}, z = {:?}: {}", probe.verdict, probe.z, probe.detail),
    );

    seeded_orbits(fx, sample, lambda, seed, report)?;
    Ok(trace)
}

/// Lemma bounds on orbits of start points drawn from the sample.
fn seeded_orbits(fx: &Fixture, sample: &[Point], lambda: f64, seed: u64, report: &mut Report) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = pick(&mut rng, sample.len(), SEEDED_ORBITS.min(sample.len()));
    let mut starts = Vec::new();
    let mut failures = Vec::new();
    for i in picked.into_iter() {
        let x = &sample[i];
        if !fx.relation.holds(x, &fx.map.apply(x)?) {
            continue;
        }
        let trace = iterate(&fx.map, x, &fx.p, &fx.space, &IterateOptions::scalar(lambda))?;
        let chain = gap_chaining_violations(&trace, 1e-12)?;
        let cert = certify_cauchy(&trace, &fx.p, 1e-10)?;
        if !chain.is_empty() || !cert.holds {
            failures.push(format!("{x:?}"));
        }
        starts.push(x.clone());
    }
    report.result("seeded_orbit_starts", &starts);
    report.check(
        "lemma_bounds_on_seeded_orbits",
        failures.is_empty(),
        format!("{} orbits checked, failures at {failures:?}", starts.len()),
    );
    Ok(())
}
