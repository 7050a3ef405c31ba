//! Empirical contraction constants, the classical comparison contractions,
//! and the aggregated hypothesis check for the relation-theoretic Banach
//! principle.

use serde::Serialize;

use crate::engine::{certify_cauchy, iterate, IterateOptions, OrbitTrace, SelfMap, StopReason};
use crate::error::{Error, Result};
use crate::relation::{check_t_closed, find_start_points, is_preserving, witness_d_self_closed, Relation};
use crate::space::{sample_pairs, MetricSpace, Point, SpaceKind};
use crate::tail::TailWindow;
use crate::wdistance::WDistance;

/// Pair sets are capped here; larger products are subsampled with a fixed stride.
pub const PAIR_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct ContractionEstimate {
    /// Max of `p(Tx, Ty) / p(x, y)` over checked pairs with `p(x, y) > 0`.
    pub lambda_hat: f64,
    pub witness_pair: Option<(Point, Point)>,
    /// Same maximum with diagonal pairs `(x, x)` included, always disclosed.
    pub lambda_hat_with_diagonal: f64,
    pub pairs_checked: usize,
    pub diagonal_pairs: usize,
    pub zero_p_pairs: usize,
    /// Pairs with `p(x, y) = 0` but `p(Tx, Ty) > 0`.
    pub zero_p_violations: Vec<(Point, Point)>,
    pub include_diagonal: bool,
}

impl ContractionEstimate {
    pub fn is_contraction(&self) -> bool {
        self.lambda_hat < 1.0 && self.zero_p_violations.is_empty()
    }
}

struct Accumulator {
    est: ContractionEstimate,
}

impl Accumulator {
    fn new(include_diagonal: bool) -> Self {
        Accumulator {
            est: ContractionEstimate {
                lambda_hat: 0.0,
                witness_pair: None,
                lambda_hat_with_diagonal: 0.0,
                pairs_checked: 0,
                diagonal_pairs: 0,
                zero_p_pairs: 0,
                zero_p_violations: Vec::new(),
                include_diagonal,
            },
        }
    }

    fn push(&mut self, x: &Point, y: &Point, base: f64, image: f64) {
        let est = &mut self.est;
        est.pairs_checked += 1;
        let diagonal = x == y;
        if diagonal {
            est.diagonal_pairs += 1;
        }
        if base == 0.0 {
            // 0/0 is a hypothesis question, not a ratio
            est.zero_p_pairs += 1;
            if image > 0.0 {
                est.zero_p_violations.push((x.clone(), y.clone()));
            }
            return;
        }
        let ratio = image / base;
        est.lambda_hat_with_diagonal = est.lambda_hat_with_diagonal.max(ratio);
        if (!diagonal || est.include_diagonal) && (ratio > est.lambda_hat || est.witness_pair.is_none()) {
            est.lambda_hat = ratio;
            est.witness_pair = Some((x.clone(), y.clone()));
        }
    }

    fn finish(self) -> Result<ContractionEstimate> {
        if self.est.pairs_checked == 0 {
            return Err(Error::Estimation("no pairs to estimate from".into()));
        }
        Ok(self.est)
    }
}

/// Empirical contraction constant over a set of related pairs.
pub fn estimate_lambda(
    map: &SelfMap,
    p: &WDistance,
    rel: &Relation,
    pairs: &[(Point, Point)],
    include_diagonal: bool,
) -> Result<ContractionEstimate> {
    if pairs.is_empty() {
        return Err(Error::Estimation("pair set is empty".into()));
    }
    let mut acc = Accumulator::new(include_diagonal);
    for (x, y) in pairs {
        if !rel.holds(x, y) {
            return Err(Error::Precondition(format!("pair ({x:?}, {y:?}) is not related")));
        }
        let (tx, ty) = (map.apply(x)?, map.apply(y)?);
        acc.push(x, y, p.eval(x, y), p.eval(&tx, &ty));
    }
    acc.finish()
}

/// As [`estimate_lambda`] over all related pairs of `sample`, applying the
/// map once per sample point.
pub fn estimate_lambda_on_sample(
    map: &SelfMap,
    p: &WDistance,
    rel: &Relation,
    sample: &[Point],
    include_diagonal: bool,
) -> Result<ContractionEstimate> {
    let images = sample.iter().map(|x| map.apply(x)).collect::<Result<Vec<_>>>()?;
    let n = sample.len();
    let stride = (n * n).div_ceil(PAIR_CAP).max(1);
    let mut acc = Accumulator::new(include_diagonal);
    for idx in (0..n * n).step_by(stride) {
        let (i, j) = (idx / n, idx % n);
        let (x, y) = (&sample[i], &sample[j]);
        if rel.holds(x, y) {
            acc.push(x, y, p.eval(x, y), p.eval(&images[i], &images[j]));
        }
    }
    acc.finish()
}

/// Sample pairs filtered by the relation.
pub fn related_pairs(rel: &Relation, sample: &[Point]) -> Vec<(Point, Point)> {
    sample_pairs(sample, PAIR_CAP)
        .into_iter()
        .filter(|(x, y)| rel.holds(x, y))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalRow {
    pub x: Point,
    pub y: Point,
    /// `d(Tx, Ty)`
    pub d_images: f64,
    /// `d(x, y)`
    pub d_points: f64,
    /// `max{d(x,y), d(x,Tx), d(y,Ty), (d(x,Ty) + d(y,Tx)) / 2}`
    pub m_t: f64,
}

impl ClassicalRow {
    /// No `k < 1` gives `d(Tx, Ty) <= k d(x, y)`.
    pub fn banach_fails(&self) -> bool {
        self.d_images > 0.0 && self.d_images >= self.d_points
    }

    /// No `φ` with `φ(t) < t` gives `d(Tx, Ty) <= φ(M_T)`.
    pub fn mt_fails(&self) -> bool {
        self.d_images > 0.0 && self.d_images >= self.m_t
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalComparison {
    pub rows: Vec<ClassicalRow>,
    pub banach_failures: Vec<usize>,
    pub mt_failures: Vec<usize>,
}

/// Evaluates the metric contraction and the `M_T` contraction on related pairs.
pub fn compare_classical(
    map: &SelfMap,
    space: &MetricSpace,
    rel: &Relation,
    pairs: &[(Point, Point)],
) -> Result<ClassicalComparison> {
    let mut rows = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        if !rel.holds(x, y) {
            return Err(Error::Precondition(format!("pair ({x:?}, {y:?}) is not related")));
        }
        let (tx, ty) = (map.apply(x)?, map.apply(y)?);
        let d = |a: &Point, b: &Point| space.distance(a, b);
        let d_points = d(x, y)?;
        let m_t = d_points
            .max(d(x, &tx)?)
            .max(d(y, &ty)?)
            .max((d(x, &ty)? + d(y, &tx)?) / 2.0);
        rows.push(ClassicalRow {
            x: x.clone(),
            y: y.clone(),
            d_images: d(&tx, &ty)?,
            d_points,
            m_t,
        });
    }
    let banach_failures = (0..rows.len()).filter(|&i| rows[i].banach_fails()).collect();
    let mt_failures = (0..rows.len()).filter(|&i| rows[i].mt_fails()).collect();
    Ok(ClassicalComparison {
        rows,
        banach_failures,
        mt_failures,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemCheck {
    pub passed: bool,
    pub detail: String,
}

impl ItemCheck {
    fn pass(detail: impl Into<String>) -> Self {
        ItemCheck {
            passed: true,
            detail: detail.into(),
        }
    }

    fn fail(detail: impl Into<String>) -> Self {
        ItemCheck {
            passed: false,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Overall {
    AllVerifiedOnSample,
    Incomplete,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub r_complete_proxy: ItemCheck,
    pub start_points: ItemCheck,
    pub t_closed: ItemCheck,
    pub continuity_or_self_closed: ItemCheck,
    pub contraction: ItemCheck,
    pub overall: Overall,
    pub estimate: Option<ContractionEstimate>,
    #[serde(skip)]
    pub orbit: Option<OrbitTrace>,
    /// Findings that never change the verdict.
    pub advisories: Vec<String>,
}

impl TheoremReport {
    pub fn lambda_hat(&self) -> Option<f64> {
        self.estimate.as_ref().map(|e| e.lambda_hat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub cauchy_tol: f64,
    pub window: TailWindow,
    pub include_diagonal: bool,
}

impl VerifyOptions {
    pub fn for_space(space: &MetricSpace) -> Self {
        let tol = match space.kind() {
            SpaceKind::Interval { .. } => 1e-9,
            SpaceKind::Functions { .. } => 1e-8,
        };
        VerifyOptions {
            max_iter: 10_000,
            tol,
            cauchy_tol: 1e-10,
            window: TailWindow::default(),
            include_diagonal: false,
        }
    }
}

/// Checks every hypothesis on the sample and on the orbit of `orbit_seed`.
#[allow(clippy::too_many_arguments)]
pub fn verify_theorem(
    map: &SelfMap,
    space: &MetricSpace,
    rel: &Relation,
    p: &WDistance,
    sample: &[Point],
    orbit_seed: &Point,
    opts: &VerifyOptions,
) -> TheoremReport {
    let mut advisories = Vec::new();
    let fail_on = |e: Error| ItemCheck::fail(format!("check errored: {e}"));

    if let Ok(escaped) = map.escapes(space, sample) {
        if !escaped.is_empty() {
            advisories.push(format!(
                "{} of {} sampled points are mapped outside the space (first: {:?})",
                escaped.len(),
                sample.len(),
                escaped[0]
            ));
        }
    }

    let start_points = match (find_start_points(rel, map, sample), map.apply(orbit_seed)) {
        (Ok(found), Ok(t_seed)) => {
            let seed_ok = rel.holds(orbit_seed, &t_seed);
            if found.is_empty() {
                ItemCheck::fail("no sampled x with (x, Tx) related")
            } else if !seed_ok {
                ItemCheck::fail(format!("{} sampled start points, but the orbit seed is not one", found.len()))
            } else {
                ItemCheck::pass(format!("{} sampled start points, orbit seed among them", found.len()))
            }
        }
        (Err(e), _) | (_, Err(e)) => fail_on(e),
    };

    let t_closed = match check_t_closed(rel, map, sample) {
        Ok(r) if r.holds() => ItemCheck::pass(format!("closed on {} sampled points", r.sample_size)),
        Ok(r) => ItemCheck::fail(format!("{} related pairs with unrelated images", r.witnesses.len())),
        Err(e) => fail_on(e),
    };

    let estimate = estimate_lambda_on_sample(map, p, rel, sample, opts.include_diagonal);
    let (contraction, estimate) = match estimate {
        Ok(est) => {
            if !opts.include_diagonal && est.lambda_hat < 1.0 && est.lambda_hat_with_diagonal >= 1.0 {
                advisories.push(format!(
                    "diagonal pairs give ratio {} (p(x, x) > 0 at a fixed point); excluded from lambda_hat = {}",
                    est.lambda_hat_with_diagonal, est.lambda_hat
                ));
            }
            let check = if est.is_contraction() {
                ItemCheck::pass(format!(
                    "lambda_hat = {} over {} related pairs",
                    est.lambda_hat, est.pairs_checked
                ))
            } else if !est.zero_p_violations.is_empty() {
                ItemCheck::fail(format!("{} pairs with p(x, y) = 0 < p(Tx, Ty)", est.zero_p_violations.len()))
            } else {
                ItemCheck::fail(format!("lambda_hat = {} is not below 1", est.lambda_hat))
            };
            (check, Some(est))
        }
        Err(e) => (fail_on(e), None),
    };

    let lambda = estimate.as_ref().filter(|e| e.is_contraction()).map(|e| e.lambda_hat);
    let (r_complete_proxy, continuity_or_self_closed, orbit) = match lambda {
        None => (
            ItemCheck::fail("no orbit: contraction constant unavailable"),
            ItemCheck::fail("no orbit: contraction constant unavailable"),
            None,
        ),
        Some(lambda) => {
            let iter_opts = IterateOptions {
                lambda: Some(lambda),
                max_iter: opts.max_iter,
                tol: opts.tol,
                divergence_gap: 1e8,
            };
            match iterate(map, orbit_seed, p, space, &iter_opts) {
                Err(e) => (fail_on(e), ItemCheck::fail("orbit failed"), None),
                Ok(trace) => {
                    let complete = orbit_completeness(&trace, p, space, opts);
                    let limit = trace.last().clone();
                    let closed = if !is_preserving(rel, &trace.points) {
                        ItemCheck::fail("orbit is not relation-preserving")
                    } else {
                        match witness_d_self_closed(rel, space, &trace.points, &limit, &opts.window) {
                            Ok(w) if w.is_witnessed() => {
                                ItemCheck::pass(format!("orbit tail related to its limit over {} steps", trace.steps()))
                            }
                            Ok(w) => ItemCheck::fail(format!("tail entries unrelated to the limit: {w:?}")),
                            Err(e) => fail_on(e),
                        }
                    };
                    (complete, closed, Some(trace))
                }
            }
        }
    };

    let items = [
        &r_complete_proxy,
        &start_points,
        &t_closed,
        &continuity_or_self_closed,
        &contraction,
    ];
    let overall = if items.iter().all(|c| c.passed) {
        Overall::AllVerifiedOnSample
    } else {
        Overall::Incomplete
    };
    TheoremReport {
        r_complete_proxy,
        start_points,
        t_closed,
        continuity_or_self_closed,
        contraction,
        overall,
        estimate,
        orbit,
        advisories,
    }
}

fn orbit_completeness(trace: &OrbitTrace, p: &WDistance, space: &MetricSpace, opts: &VerifyOptions) -> ItemCheck {
    if trace.stop_reason != StopReason::Converged {
        return ItemCheck::fail(format!("orbit stopped with {:?} after {} steps", trace.stop_reason, trace.steps()));
    }
    match certify_cauchy(trace, p, opts.cauchy_tol) {
        Ok(c) if !c.holds => ItemCheck::fail(format!("{} Cauchy-bound violations", c.violations.len())),
        Err(e) => ItemCheck::fail(format!("Cauchy certificate errored: {e}")),
        Ok(c) => {
            if space.contains(trace.last()) {
                ItemCheck::pass(format!(
                    "orbit Cauchy on {} index pairs, converged in {} steps inside the space",
                    c.pairs_checked,
                    trace.steps()
                ))
            } else {
                ItemCheck::fail("orbit limit lies outside the space")
            }
        }
    }
}
