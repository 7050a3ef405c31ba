//! Picard orbits, the geometric Cauchy bound, numeric certificates for the
//! limit lemmas, and uniqueness probes.

use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::relation::{check_complete_on, Relation};
use crate::space::{MetricSpace, Point};
use crate::wdistance::WDistance;

type MapFn = dyn Fn(&Point) -> Result<Point> + Send + Sync;

/// A self-map `T` of a space.
#[derive(Clone)]
pub struct SelfMap {
    name: String,
    f: Arc<MapFn>,
}

impl fmt::Debug for SelfMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SelfMap").field("name", &self.name).finish()
    }
}

impl SelfMap {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    ) -> Self {
        SelfMap {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// Map on scalars. Non-finite outputs are passed through so that
    /// [`iterate`] can report them as divergence.
    pub fn scalar(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        let name = name.into();
        let label = name.clone();
        SelfMap::new(name, move |x| match x {
            Point::Scalar(v) => Ok(Point::Scalar(f(*v))),
            Point::Grid(_) => Err(Error::Shape(format!("{label} acts on scalars only"))),
        })
    }

    pub fn identity() -> Self {
        SelfMap::new("identity", |x| Ok(x.clone()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        (self.f)(x)
    }

    /// Sampled points whose image leaves `space`.
    pub fn escapes(&self, space: &MetricSpace, sample: &[Point]) -> Result<Vec<Point>> {
        let mut out = Vec::new();
        for x in sample {
            if !space.contains(&self.apply(x)?) {
                out.push(x.clone());
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    Converged,
    MaxIter,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterateOptions {
    /// Contraction constant used for the bound sequence. `None` records no bound.
    pub lambda: Option<f64>,
    pub max_iter: usize,
    /// Stop once `d(x_n, x_{n+1}) <= tol`.
    pub tol: f64,
    /// A d-gap above this declares divergence.
    pub divergence_gap: f64,
}

impl IterateOptions {
    pub fn scalar(lambda: f64) -> Self {
        IterateOptions {
            lambda: Some(lambda),
            max_iter: 10_000,
            tol: 1e-9,
            divergence_gap: 1e8,
        }
    }

    pub fn grid(lambda: f64) -> Self {
        IterateOptions {
            tol: 1e-8,
            ..IterateOptions::scalar(lambda)
        }
    }
}

/// The Picard sequence `x_0, T x_0, T^2 x_0, ...` with its gaps and the
/// bound `u_n = λ^n p(x_0, x_1) / (1 - λ)`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitTrace {
    pub points: Vec<Point>,
    /// `p(x_n, x_{n+1})`
    pub p_gaps: Vec<f64>,
    /// `d(x_n, x_{n+1})`
    pub d_gaps: Vec<f64>,
    /// `u_n` for every recorded point; empty when no λ was supplied.
    pub bound: Vec<f64>,
    pub lambda_used: Option<f64>,
    pub stop_reason: StopReason,
}

impl OrbitTrace {
    /// Number of map applications.
    pub fn steps(&self) -> usize {
        self.d_gaps.len()
    }

    pub fn last(&self) -> &Point {
        self.points.last().expect("orbit holds at least x0")
    }

    /// Largest `gap_{n+1} / gap_n` over consecutive nonzero d-gaps.
    pub fn max_gap_ratio(&self) -> Option<f64> {
        self.d_gaps
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .reduce(f64::max)
    }

    /// Columns `n, point, d_gap, p_gap, bound`. Grid functions are written as
    /// their sup-norm; the final row has no gaps.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,point,d_gap,p_gap,bound\n");
        for (n, x) in self.points.iter().enumerate() {
            let opt = |v: Option<&f64>| v.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{n},{},{},{},{}",
                x.magnitude(),
                opt(self.d_gaps.get(n)),
                opt(self.p_gaps.get(n)),
                opt(self.bound.get(n)),
            );
        }
        out
    }
}

/// `λ^n p01 / (1 - λ)`.
pub fn cauchy_bound(lambda: f64, p01: f64, n: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1), got {lambda}")));
    }
    if !(p01 >= 0.0) {
        return Err(Error::Domain(format!("p(x0, x1) must be nonnegative, got {p01}")));
    }
    Ok(lambda.powi(n as i32) * p01 / (1.0 - lambda))
}

/// Runs `x_{n+1} = T x_n` until the d-gap drops to `opts.tol`.
pub fn iterate(
    map: &SelfMap,
    x0: &Point,
    p: &WDistance,
    space: &MetricSpace,
    opts: &IterateOptions,
) -> Result<OrbitTrace> {
    if let Some(l) = opts.lambda {
        if !(0.0..1.0).contains(&l) {
            return Err(Error::Domain(format!("lambda must lie in [0, 1), got {l}")));
        }
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::Precondition("need tol > 0 and max_iter >= 1".into()));
    }
    let mut trace = OrbitTrace {
        points: vec![x0.clone()],
        p_gaps: Vec::new(),
        d_gaps: Vec::new(),
        bound: Vec::new(),
        lambda_used: opts.lambda,
        stop_reason: StopReason::MaxIter,
    };
    for step in 1..=opts.max_iter {
        let next = map.apply(trace.last())?;
        if !next.is_finite() {
            return Err(diverged(trace, step, "non-finite iterate".into()));
        }
        let d_gap = space.distance(trace.last(), &next)?;
        let p_gap = p.eval(trace.last(), &next);
        trace.d_gaps.push(d_gap);
        trace.p_gaps.push(p_gap);
        trace.points.push(next);
        if d_gap > opts.divergence_gap {
            return Err(diverged(trace, step, format!("gap {d_gap} exceeds {}", opts.divergence_gap)));
        }
        if d_gap <= opts.tol {
            trace.stop_reason = StopReason::Converged;
            break;
        }
    }
    if let Some(l) = opts.lambda {
        let p01 = trace.p_gaps[0];
        trace.bound = (0..trace.points.len())
            .map(|n| cauchy_bound(l, p01, n))
            .collect::<Result<_>>()?;
    }
    Ok(trace)
}

fn diverged(mut trace: OrbitTrace, step: usize, reason: String) -> Error {
    trace.stop_reason = StopReason::Diverged;
    Error::Diverged {
        step,
        reason,
        trace: Box::new(trace),
    }
}

/// Indices `n >= 1` where `p_gaps[n] > λ p_gaps[n-1] + slack`.
pub fn gap_chaining_violations(trace: &OrbitTrace, slack: f64) -> Result<Vec<usize>> {
    let lambda = trace
        .lambda_used
        .ok_or_else(|| Error::Precondition("orbit was generated without a lambda".into()))?;
    Ok((1..trace.p_gaps.len())
        .filter(|&n| trace.p_gaps[n] > lambda * trace.p_gaps[n - 1] + slack)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyViolation {
    pub n: usize,
    pub m: usize,
    pub p_nm: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CauchyCertificate {
    pub holds: bool,
    pub pairs_checked: usize,
    pub violations: Vec<CauchyViolation>,
}

/// `p(x_n, x_m) <= u_n + tol` for every recorded `n < m`.
pub fn certify_cauchy(trace: &OrbitTrace, p: &WDistance, tol: f64) -> Result<CauchyCertificate> {
    if trace.points.is_empty() {
        return Err(Error::Precondition("orbit is empty".into()));
    }
    if trace.bound.len() != trace.points.len() {
        return Err(Error::Precondition("orbit carries no bound sequence".into()));
    }
    let pts = &trace.points;
    let mut violations = Vec::new();
    let mut pairs_checked = 0;
    for n in 0..pts.len() {
        for m in n + 1..pts.len() {
            pairs_checked += 1;
            let p_nm = p.eval(&pts[n], &pts[m]);
            if p_nm > trace.bound[n] + tol {
                violations.push(CauchyViolation {
                    n,
                    m,
                    p_nm,
                    bound: trace.bound[n],
                });
            }
        }
    }
    Ok(CauchyCertificate {
        holds: violations.is_empty(),
        pairs_checked,
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitTolerances {
    /// The dominating sequences count as vanished once their last entry is this small.
    pub vanish: f64,
    /// Largest `d(y, z)` accepted as `y = z`.
    pub separation: f64,
}

impl LimitTolerances {
    /// Separation from the `δ = ε/2` rung: two points within `δ` of a common
    /// anchor are at most `2δ` apart.
    pub fn from_vanish(vanish: f64) -> Self {
        LimitTolerances {
            vanish,
            separation: 2.0 * vanish,
        }
    }
}

impl Default for LimitTolerances {
    fn default() -> Self {
        LimitTolerances::from_vanish(1e-9)
    }
}

/// If `p(x_n, y) <= u_n` and `p(x_n, z) <= v_n` with `u, v -> 0`, then `y = z`.
/// Verifies the hypotheses and reports whether `d(y, z)` is within the
/// separation tolerance.
#[allow(clippy::too_many_arguments)]
pub fn certify_limit_uniqueness(
    p: &WDistance,
    xs: &[Point],
    y: &Point,
    z: &Point,
    u: &[f64],
    v: &[f64],
    space: &MetricSpace,
    tol: &LimitTolerances,
) -> Result<bool> {
    if xs.is_empty() || xs.len() != u.len() || xs.len() != v.len() {
        return Err(Error::Precondition(format!(
            "need equal nonempty lengths, got {} points, {} u, {} v",
            xs.len(),
            u.len(),
            v.len()
        )));
    }
    for (n, x) in xs.iter().enumerate() {
        let py = p.eval(x, y);
        if py > u[n] + 1e-12 {
            return Err(Error::Precondition(format!("p(x_{n}, y) = {py} exceeds u_{n} = {}", u[n])));
        }
        let pz = p.eval(x, z);
        if pz > v[n] + 1e-12 {
            return Err(Error::Precondition(format!("p(x_{n}, z) = {pz} exceeds v_{n} = {}", v[n])));
        }
    }
    let (u_last, v_last) = (u[u.len() - 1], v[v.len() - 1]);
    if u_last > tol.vanish || v_last > tol.vanish {
        return Err(Error::Precondition(format!(
            "dominating sequences end at {u_last}, {v_last}, above {}",
            tol.vanish
        )));
    }
    Ok(space.distance(y, z)? <= tol.separation)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Uniqueness {
    UniqueByCondition1,
    UniqueByCondition2,
    NotProbed,
    ProbeFailed,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedPointCertificate {
    pub point: Point,
    /// `d(x, Tx)`
    pub residual: f64,
    /// `p(x, x)`
    pub p_self: f64,
    pub unique: Uniqueness,
}

/// Issues a certificate when `d(x, Tx) <= tol`.
pub fn certify_fixed_point(
    map: &SelfMap,
    x: &Point,
    p: &WDistance,
    space: &MetricSpace,
    tol: f64,
) -> Result<FixedPointCertificate> {
    let residual = space.distance(x, &map.apply(x)?)?;
    if residual > tol {
        return Err(Error::Precondition(format!("residual {residual} exceeds {tol}")));
    }
    Ok(FixedPointCertificate {
        point: x.clone(),
        residual,
        p_self: p.eval(x, x),
        unique: Uniqueness::NotProbed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessProbe {
    pub verdict: Uniqueness,
    /// Common lower element used by the first condition.
    pub z: Option<Point>,
    pub detail: String,
}

/// Settings shared by the uniqueness probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbeOptions {
    pub lambda: f64,
    /// Length of the `T^n z` orbit examined by the first condition.
    pub n_steps: usize,
    /// Fixed-point residual tolerance the candidates were certified with.
    pub tol: f64,
}

/// Tries the common-lower-element condition, then completeness of `R` on
/// the image sample.
pub fn probe_uniqueness(
    rel: &Relation,
    map: &SelfMap,
    p: &WDistance,
    space: &MetricSpace,
    candidates: &[Point],
    sample: &[Point],
    opts: &ProbeOptions,
) -> Result<UniquenessProbe> {
    if candidates.is_empty() {
        return Err(Error::Precondition("no fixed-point candidates".into()));
    }
    if !(0.0..1.0).contains(&opts.lambda) {
        return Err(Error::Domain(format!("lambda must lie in [0, 1), got {}", opts.lambda)));
    }
    for c in candidates {
        let r = space.distance(c, &map.apply(c)?)?;
        if r > opts.tol {
            return Err(Error::Precondition(format!("candidate residual {r} exceeds {}", opts.tol)));
        }
    }
    // A fixed point known to within tol drifts by at most tol / (1 - λ)
    // along any contracted comparison.
    let slack = opts.tol / (1.0 - opts.lambda) + 1e-12;
    let limits = LimitTolerances::from_vanish(10.0 * slack);

    let mut pool = sample.iter().map(|x| map.apply(x)).collect::<Result<Vec<_>>>()?;
    for c in candidates {
        pool.push(map.apply(c)?);
    }

    let mut common_z: Option<Point> = None;
    let mut all_pairs = true;
    'pairs: for (i, a) in candidates.iter().enumerate() {
        for b in &candidates[i..] {
            match pool
                .iter()
                .filter(|z| rel.holds(z, a) && rel.holds(z, b))
                .find(|z| decays_to_both(map, p, space, z, a, b, opts, slack, &limits))
            {
                Some(z) => {
                    common_z.get_or_insert_with(|| (*z).clone());
                }
                None => {
                    all_pairs = false;
                    break 'pairs;
                }
            }
        }
    }
    if all_pairs {
        return Ok(UniquenessProbe {
            verdict: Uniqueness::UniqueByCondition1,
            z: common_z,
            detail: format!(
                "every candidate pair has a common lower element in T(sample) whose orbit closes on both within {}",
                limits.separation
            ),
        });
    }

    let mut images = pool;
    images.extend(candidates.iter().cloned());
    let complete = check_complete_on(rel, &images)?;
    if !complete.holds() {
        return Ok(UniquenessProbe {
            verdict: Uniqueness::ProbeFailed,
            z: None,
            detail: format!(
                "no common lower element found and the relation is incomplete on T(sample) ({} unrelated pairs)",
                complete.witnesses.len()
            ),
        });
    }
    for (i, a) in candidates.iter().enumerate() {
        for b in &candidates[i + 1..] {
            let d = space.distance(a, b)?;
            if d <= limits.separation {
                continue;
            }
            // two distinct fixed points: p(a, b) = p(Ta, Tb) <= λ p(a, b) forces p(a, b) = 0
            let (x, y) = if rel.holds(a, b) { (a, b) } else { (b, a) };
            let pxy = p.eval(x, y);
            let contracted = p.eval(&map.apply(x)?, &map.apply(y)?) <= opts.lambda * pxy + slack;
            return Ok(UniquenessProbe {
                verdict: Uniqueness::ProbeFailed,
                z: None,
                detail: format!(
                    "candidates at distance {d} are related but distinct (p = {pxy}, contraction {})",
                    if contracted { "holds" } else { "violated" }
                ),
            });
        }
    }
    Ok(UniquenessProbe {
        verdict: Uniqueness::UniqueByCondition2,
        z: None,
        detail: format!("relation complete on {} image points", images.len()),
    })
}

#[allow(clippy::too_many_arguments)]
fn decays_to_both(
    map: &SelfMap,
    p: &WDistance,
    space: &MetricSpace,
    z: &Point,
    a: &Point,
    b: &Point,
    opts: &ProbeOptions,
    slack: f64,
    limits: &LimitTolerances,
) -> bool {
    let mut orbit = vec![z.clone()];
    for _ in 0..opts.n_steps {
        match map.apply(orbit.last().expect("nonempty")) {
            Ok(next) if next.is_finite() => orbit.push(next),
            _ => return false,
        }
    }
    let (pa, pb) = (p.eval(z, a), p.eval(z, b));
    let lam_n = |n: usize| opts.lambda.powi(n as i32);
    let u: Vec<f64> = (0..orbit.len()).map(|n| lam_n(n) * pa + slack).collect();
    let v: Vec<f64> = (0..orbit.len()).map(|n| lam_n(n) * pb + slack).collect();
    matches!(
        certify_limit_uniqueness(p, &orbit, a, b, &u, &v, space, limits),
        Ok(true)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn bound_values() {
        assert_eq!(cauchy_bound(0.5, 1.0, 3).unwrap(), 0.25);
        assert_eq!(cauchy_bound(0.0, 7.0, 1).unwrap(), 0.0);
        let b = cauchy_bound(0.75, 1.5, 10).unwrap();
        assert!((b - 1.5 * 0.75f64.powi(10) / 0.25).abs() < 1e-15);
        assert!((b - 0.337_881).abs() < 1e-6);
        assert!(cauchy_bound(1.0, 1.0, 1).is_err());
        assert!(cauchy_bound(0.5, -1.0, 1).is_err());
    }

    #[test]
    fn bound_dominates_cumulative_gaps() {
        // independent route: sum of λ^j p01 for j >= n
        let (lambda, p01) = (0.75f64, 1.5);
        for n in 0..30 {
            let tail: f64 = (n..2000).map(|j| lambda.powi(j as i32) * p01).sum();
            assert!((cauchy_bound(lambda, p01, n).unwrap() - tail).abs() < 1e-12);
        }
    }

    #[test]
    fn ex2_4_orbit_from_two() {
        let fx = fixtures::ex2_4();
        let trace = iterate(&fx.map, &Point::Scalar(2.0), &fx.p, &fx.space, &IterateOptions::scalar(0.75)).unwrap();
        let vals: Vec<f64> = trace.points.iter().map(|p| p.as_scalar().unwrap()).collect();
        assert_eq!(&vals[..5], &[2.0, 1.5, 1.0, 0.75, 0.25]);
        assert!((vals[5] - 1.0 / 12.0).abs() < 1e-15);
        assert!((vals[6] - 1.0 / 36.0).abs() < 1e-15);
        assert_eq!(trace.stop_reason, StopReason::Converged);
        assert!(*trace.d_gaps.last().unwrap() <= 1e-9);
        assert_eq!(trace.bound.len(), trace.points.len());
    }

    #[test]
    fn ex2_3_fixed_start() {
        let fx = fixtures::ex2_3();
        let trace = iterate(&fx.map, &Point::Scalar(2.0), &fx.p, &fx.space, &IterateOptions::scalar(0.9)).unwrap();
        assert_eq!(trace.steps(), 1);
        assert_eq!(trace.stop_reason, StopReason::Converged);
        assert_eq!(trace.points, vec![Point::Scalar(2.0), Point::Scalar(2.0)]);
        let cert = certify_fixed_point(&fx.map, trace.last(), &fx.p, &fx.space, 1e-9).unwrap();
        assert_eq!(cert.residual, 0.0);
        assert_eq!(cert.p_self, 4.0);
    }

    #[test]
    fn divergence_is_an_error_with_trace() {
        let space = MetricSpace::closed(-1e300, 1e300).unwrap();
        let double = SelfMap::scalar("2x", |x| 2.0 * x);
        let err = iterate(&double, &Point::Scalar(1.0), &WDistance::metric(space), &space, &IterateOptions::scalar(0.5))
            .unwrap_err();
        match err {
            Error::Diverged { trace, .. } => {
                assert_eq!(trace.stop_reason, StopReason::Diverged);
                assert!(*trace.d_gaps.last().unwrap() > 1e8);
            }
            other => panic!("unexpected {other:?}"),
        }
        let blowup = SelfMap::scalar("inf", |_| f64::INFINITY);
        assert!(matches!(
            iterate(&blowup, &Point::Scalar(1.0), &WDistance::metric(space), &space, &IterateOptions::scalar(0.5)),
            Err(Error::Diverged { .. })
        ));
    }

    #[test]
    fn max_iter_stop() {
        let space = MetricSpace::closed(0.0, 1.0).unwrap();
        let slow = SelfMap::scalar("0.99x", |x| 0.99 * x);
        let opts = IterateOptions {
            max_iter: 5,
            ..IterateOptions::scalar(0.99)
        };
        let t = iterate(&slow, &Point::Scalar(1.0), &WDistance::metric(space), &space, &opts).unwrap();
        assert_eq!(t.stop_reason, StopReason::MaxIter);
        assert_eq!(t.points.len(), 6);
        assert_eq!(t.d_gaps.len(), 5);
    }

    #[test]
    fn cauchy_certificates() {
        let fx = fixtures::ex2_4();
        let trace = iterate(&fx.map, &Point::Scalar(2.0), &fx.p, &fx.space, &IterateOptions::scalar(0.75)).unwrap();
        let cert = certify_cauchy(&trace, &fx.p, 1e-10).unwrap();
        assert!(cert.holds, "{:?}", cert.violations);
        assert!(gap_chaining_violations(&trace, 1e-12).unwrap().is_empty());

        let mut corrupted = trace.clone();
        if let Point::Scalar(v) = &mut corrupted.points[8] {
            *v += 1.0;
        }
        let cert = certify_cauchy(&corrupted, &fx.p, 1e-10).unwrap();
        assert!(!cert.holds);
        assert!(cert.violations.iter().any(|v| v.m == 8));
    }

    #[test]
    fn constant_orbit_at_zero_is_cauchy() {
        let fx = fixtures::ex2_4();
        let trace = iterate(&fx.map, &Point::Scalar(0.0), &fx.p, &fx.space, &IterateOptions::scalar(0.75)).unwrap();
        assert!(certify_cauchy(&trace, &fx.p, 0.0).unwrap().holds);
    }

    #[test]
    fn limit_uniqueness() {
        let fx = fixtures::ex2_4();
        let trace = iterate(&fx.map, &Point::Scalar(2.0), &fx.p, &fx.space, &IterateOptions::scalar(0.75)).unwrap();
        let zero = Point::Scalar(0.0);
        let u: Vec<f64> = trace.bound.clone();
        // the bound only vanishes far out, so compare against the recorded gaps
        let tight: Vec<f64> = trace.points.iter().map(|x| x.as_scalar().unwrap()).collect();
        let tol = LimitTolerances::from_vanish(1e-9);
        assert!(certify_limit_uniqueness(&fx.p, &trace.points, &zero, &zero, &tight, &tight, &fx.space, &tol).unwrap());
        assert!(certify_limit_uniqueness(&fx.p, &trace.points, &zero, &zero, &u, &u, &fx.space, &tol).is_err());

        let half = Point::Scalar(0.5);
        let small = vec![1e-3; trace.points.len()];
        let err = certify_limit_uniqueness(&fx.p, &trace.points, &zero, &half, &small, &small, &fx.space, &tol);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn equal_limits_with_exact_dominators() {
        let space = MetricSpace::closed(0.0, 2.0).unwrap();
        let p = WDistance::metric(space);
        let y = Point::Scalar(1.25);
        let xs: Vec<Point> = (0..20).map(|n| Point::Scalar(1.25 + 0.5f64.powi(n))).collect();
        let exact: Vec<f64> = xs.iter().map(|x| p.eval(x, &y)).collect();
        let tol = LimitTolerances::from_vanish(1e-5);
        assert!(certify_limit_uniqueness(&p, &xs, &y, &y, &exact, &exact, &space, &tol).unwrap());
    }

    #[test]
    fn uniqueness_probes() {
        let fx = fixtures::ex2_4();
        let sample = fx.sample(0.05).unwrap();
        let opts = ProbeOptions { lambda: 0.75, n_steps: 100, tol: 1e-9 };
        let probe = probe_uniqueness(&fx.relation, &fx.map, &fx.p, &fx.space, &[Point::Scalar(0.0)], &sample, &opts)
            .unwrap();
        assert_eq!(probe.verdict, Uniqueness::UniqueByCondition1);
        assert_eq!(probe.z, Some(Point::Scalar(0.0)));

        let fx = fixtures::ex2_3();
        let sample = fx.sample(0.1).unwrap();
        let opts = ProbeOptions { lambda: 0.98, n_steps: 100, tol: 1e-9 };
        let probe = probe_uniqueness(&fx.relation, &fx.map, &fx.p, &fx.space, &[Point::Scalar(2.0)], &sample, &opts)
            .unwrap();
        assert_eq!(probe.verdict, Uniqueness::UniqueByCondition2);

        assert!(probe_uniqueness(&fx.relation, &fx.map, &fx.p, &fx.space, &[], &sample, &opts).is_err());
        assert!(probe_uniqueness(&fx.relation, &fx.map, &fx.p, &fx.space, &[Point::Scalar(1.5)], &sample, &opts).is_err());
    }

    #[test]
    fn csv_export() {
        let fx = fixtures::ex2_4();
        let trace = iterate(&fx.map, &Point::Scalar(2.0), &fx.p, &fx.space, &IterateOptions::scalar(0.75)).unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("n,point,d_gap,p_gap,bound"));
        assert_eq!(lines.next(), Some("0,2,0.5,1.5,6"));
        assert_eq!(csv.lines().count(), trace.points.len() + 1);
        assert!(csv.lines().last().unwrap().contains(",,"));
    }
}
