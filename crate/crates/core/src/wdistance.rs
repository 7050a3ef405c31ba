//! w-distances and sample-based checks of their three axioms.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::relation::{Relation, Verdict};
use crate::space::{MetricSpace, Point};
use crate::tail::TailWindow;

type PairFn = dyn Fn(&Point, &Point) -> f64 + Send + Sync;

/// A nonnegative pair function `p`. Neither symmetry nor `p(x, x) = 0` is
/// assumed.
#[derive(Clone)]
pub struct WDistance {
    name: String,
    p: Arc<PairFn>,
}

impl fmt::Debug for WDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WDistance").field("name", &self.name).finish()
    }
}

impl WDistance {
    pub fn new(
        name: impl Into<String>,
        p: impl Fn(&Point, &Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        WDistance {
            name: name.into(),
            p: Arc::new(p),
        }
    }

    /// Pair function on scalars. Grid-function arguments evaluate to `+inf`.
    pub fn on_scalars(
        name: impl Into<String>,
        p: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        WDistance::new(name, move |x, y| match (x, y) {
            (Point::Scalar(a), Point::Scalar(b)) => p(*a, *b),
            _ => f64::INFINITY,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: &Point, y: &Point) -> f64 {
        (self.p)(x, y)
    }

    /// The space's own metric. Kind mismatches evaluate to `+inf`.
    pub fn metric(space: MetricSpace) -> Self {
        WDistance::new("d", move |x, y| space.distance(x, y).unwrap_or(f64::INFINITY))
    }

    /// `p(x, y) = |x| + |y|`.
    pub fn abs_sum() -> Self {
        WDistance::on_scalars("|x| + |y|", |x, y| x.abs() + y.abs())
    }

    /// `p(x, y) = y`, meaningful on nonnegative spaces.
    pub fn second_coordinate() -> Self {
        WDistance::on_scalars("y", |_, y| y)
    }

    /// `p(x, y) = g(y)` for a one-variable function, anchor ignored. Lets a
    /// plain function go through the lower-semicontinuity checks.
    pub fn of_second(name: impl Into<String>, g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        WDistance::on_scalars(name, move |_, y| g(y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    W1Triangle,
    W2RLsc,
    W3Separation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomWitness {
    pub points: Vec<Point>,
    pub lhs: f64,
    pub rhs: f64,
}

/// One row of the ε–δ search for the separation axiom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsDelta {
    pub eps: f64,
    /// Largest ladder δ that works on every sampled triple, if any.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub distance: String,
    pub verdict: Verdict,
    pub witnesses: Vec<AxiomWitness>,
    pub eps_table: Vec<EpsDelta>,
}

impl AxiomReport {
    fn new(axiom: Axiom, p: &WDistance, witnesses: Vec<AxiomWitness>, eps_table: Vec<EpsDelta>) -> Self {
        let failed = !witnesses.is_empty() || eps_table.iter().any(|r| r.delta.is_none());
        AxiomReport {
            axiom,
            distance: p.name.clone(),
            verdict: if failed {
                Verdict::FailsWithWitness
            } else {
                Verdict::HoldsOnSample
            },
            witnesses,
            eps_table,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }
}

/// `p(x, z) <= p(x, y) + p(y, z)` over all sampled triples.
pub fn check_triangle(p: &WDistance, sample: &[Point]) -> Result<AxiomReport> {
    if sample.is_empty() {
        return Err(Error::Precondition("sample is empty".into()));
    }
    let n = sample.len();
    let table: Vec<f64> = (0..n * n)
        .map(|k| p.eval(&sample[k / n], &sample[k % n]))
        .collect();
    let mut witnesses = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let lhs = table[i * n + k];
                let rhs = table[i * n + j] + table[j * n + k];
                // relative slack absorbs the rounding in the sum
                if lhs > rhs + 1e-12 * (1.0 + rhs.abs()) {
                    witnesses.push(AxiomWitness {
                        points: vec![sample[i].clone(), sample[j].clone(), sample[k].clone()],
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    Ok(AxiomReport::new(Axiom::W1Triangle, p, witnesses, Vec::new()))
}

/// Lower semicontinuity of `p(anchor, ·)` along one `R`-preserving sequence:
/// the minimum over the tail window must not fall below `p(anchor, limit) - tol`.
#[allow(clippy::too_many_arguments)]
pub fn check_rlsc(
    p: &WDistance,
    anchor: &Point,
    rel: &Relation,
    space: &MetricSpace,
    seq: &[Point],
    limit: &Point,
    tol: f64,
    window: &TailWindow,
) -> Result<AxiomReport> {
    if seq.is_empty() {
        return Err(Error::Precondition("sequence is empty".into()));
    }
    if let Some(n) = seq.windows(2).position(|w| !rel.holds(&w[0], &w[1])) {
        return Err(Error::Precondition(format!(
            "sequence is not {}-preserving at index {n}",
            rel.name()
        )));
    }
    if !window.converges(space, seq, limit)? {
        return Err(Error::Precondition("sequence does not approach the limit".into()));
    }
    let start = window.start(seq.len());
    let (arg, tail_min) = seq[start..]
        .iter()
        .enumerate()
        .map(|(i, x)| (start + i, p.eval(anchor, x)))
        .fold((start, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
    let at_limit = p.eval(anchor, limit);
    let witnesses = if tail_min < at_limit - tol {
        vec![AxiomWitness {
            points: vec![anchor.clone(), seq[arg].clone(), limit.clone()],
            lhs: tail_min,
            rhs: at_limit,
        }]
    } else {
        Vec::new()
    };
    Ok(AxiomReport::new(Axiom::W2RLsc, p, witnesses, Vec::new()))
}

/// `δ ∈ {1, 1/2, ..., 2^-20}`.
pub fn default_delta_ladder() -> Vec<f64> {
    (0..=20).map(|k| 0.5f64.powi(k)).collect()
}

/// For each ε, the largest ladder δ such that `p(z, x) <= δ` and
/// `p(z, y) <= δ` imply `d(x, y) <= ε` on every sampled triple.
pub fn check_w3(
    p: &WDistance,
    space: &MetricSpace,
    sample: &[Point],
    eps_grid: &[f64],
    delta_ladder: &[f64],
) -> Result<AxiomReport> {
    if sample.is_empty() {
        return Err(Error::Precondition("sample is empty".into()));
    }
    if eps_grid.is_empty() || eps_grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Precondition("eps grid must be nonempty and positive".into()));
    }
    if delta_ladder.is_empty()
        || delta_ladder.iter().any(|&d| !(d > 0.0))
        || delta_ladder.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::Precondition("delta ladder must be positive and strictly descending".into()));
    }
    let n = sample.len();
    let p_table: Vec<f64> = (0..n * n)
        .map(|k| p.eval(&sample[k / n], &sample[k % n]))
        .collect();
    let d_table = (0..n * n)
        .map(|k| space.distance(&sample[k / n], &sample[k % n]))
        .collect::<Result<Vec<f64>>>()?;

    // Worst separation reachable with budget δ, and the triple attaining it.
    let worst = |delta: f64| -> (f64, Option<(usize, usize, usize)>) {
        let mut best = (0.0, None);
        for z in 0..n {
            let near: Vec<usize> = (0..n).filter(|&x| p_table[z * n + x] <= delta).collect();
            for (a, &x) in near.iter().enumerate() {
                for &y in &near[a..] {
                    let d = d_table[x * n + y];
                    if d > best.0 {
                        best = (d, Some((z, x, y)));
                    }
                }
            }
        }
        best
    };
    let spreads: Vec<_> = delta_ladder.iter().map(|&d| worst(d)).collect();

    let mut eps_table = Vec::with_capacity(eps_grid.len());
    let mut witnesses = Vec::new();
    for &eps in eps_grid {
        let found = delta_ladder
            .iter()
            .zip(&spreads)
            .find(|(_, (spread, _))| *spread <= eps)
            .map(|(&d, _)| d);
        if found.is_none() {
            let (spread, triple) = spreads.last().expect("ladder is nonempty");
            if let Some((z, x, y)) = *triple {
                witnesses.push(AxiomWitness {
                    points: vec![sample[z].clone(), sample[x].clone(), sample[y].clone()],
                    lhs: *spread,
                    rhs: eps,
                });
            }
        }
        eps_table.push(EpsDelta { eps, delta: found });
    }
    Ok(AxiomReport::new(Axiom::W3Separation, p, witnesses, eps_table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Sampling;

    fn lattice(space: &MetricSpace, step: f64) -> Vec<Point> {
        space.sample(Sampling::Lattice { step }, 0).unwrap()
    }

    #[test]
    fn triangle_on_builtins() {
        let half_open = MetricSpace::half_open(1.0, 3.0).unwrap();
        let pts: Vec<Point> = [1.0, 1.5, 2.0, 2.5].iter().map(|&v| Point::Scalar(v)).collect();
        assert!(check_triangle(&WDistance::abs_sum(), &pts).unwrap().holds());
        assert!(check_triangle(&WDistance::metric(half_open), &lattice(&half_open, 0.1)).unwrap().holds());
        let closed = MetricSpace::closed(0.0, 2.0).unwrap();
        assert!(check_triangle(&WDistance::second_coordinate(), &lattice(&closed, 0.1)).unwrap().holds());
    }

    #[test]
    fn triangle_failure_is_witnessed() {
        let sq = WDistance::on_scalars("(x-y)^2", |x, y| (x - y) * (x - y));
        let pts: Vec<Point> = [0.0, 1.0, 2.0].iter().map(|&v| Point::Scalar(v)).collect();
        let r = check_triangle(&sq, &pts).unwrap();
        assert!(!r.holds());
        assert!(r.witnesses.iter().any(|w| w.lhs == 4.0 && w.rhs == 2.0));
    }

    #[test]
    fn metric_separates_with_half_eps() {
        let space = MetricSpace::closed(0.0, 2.0).unwrap();
        let sample = lattice(&space, 0.05);
        let eps = [1.0, 0.5, 0.25, 0.1];
        let r = check_w3(&WDistance::metric(space), &space, &sample, &eps, &default_delta_ladder()).unwrap();
        assert!(r.holds());
        for row in &r.eps_table {
            let delta = row.delta.unwrap();
            // the largest ladder rung not exceeding eps / 2 always works
            let floor = default_delta_ladder().into_iter().find(|&d| d <= row.eps / 2.0).unwrap();
            assert!(delta >= floor, "{row:?}");
        }
    }

    #[test]
    fn abs_sum_separation_is_vacuous_below_one() {
        let space = MetricSpace::half_open(1.0, 3.0).unwrap();
        let sample = lattice(&space, 0.1);
        let r = check_w3(&WDistance::abs_sum(), &space, &sample, &[0.5, 0.01], &default_delta_ladder()).unwrap();
        assert!(r.holds());
        // δ = 1 is never reached since p >= 2 on [1, 3)
        assert!(r.eps_table.iter().all(|row| row.delta == Some(1.0)));
    }

    #[test]
    fn second_coordinate_separates() {
        let space = MetricSpace::closed(0.0, 2.0).unwrap();
        let sample = lattice(&space, 0.01);
        let r = check_w3(&WDistance::second_coordinate(), &space, &sample, &[1.0, 0.3, 0.05], &default_delta_ladder())
            .unwrap();
        assert!(r.holds());
        for row in &r.eps_table {
            assert!(row.delta.unwrap() >= default_delta_ladder().into_iter().find(|&d| d <= row.eps / 2.0).unwrap());
        }
    }

    #[test]
    fn constant_distance_fails_separation() {
        let space = MetricSpace::closed(0.0, 2.0).unwrap();
        let sample = lattice(&space, 0.5);
        let zero = WDistance::on_scalars("0", |_, _| 0.0);
        let r = check_w3(&zero, &space, &sample, &[0.1], &default_delta_ladder()).unwrap();
        assert!(!r.holds());
        assert_eq!(r.eps_table[0].delta, None);
        assert_eq!(r.witnesses[0].lhs, 2.0);
    }

    #[test]
    fn ladder_validation() {
        let space = MetricSpace::closed(0.0, 1.0).unwrap();
        let sample = lattice(&space, 0.5);
        let p = WDistance::metric(space);
        assert!(check_w3(&p, &space, &sample, &[0.1], &[0.5, 1.0]).is_err());
        assert!(check_w3(&p, &space, &sample, &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn rlsc_constant_sequence_holds_with_equality() {
        let space = MetricSpace::closed(0.0, 2.0).unwrap();
        let p = WDistance::second_coordinate();
        let seq = vec![Point::Scalar(1.0); 10];
        let r = check_rlsc(
            &p,
            &Point::Scalar(0.0),
            &Relation::universal(),
            &space,
            &seq,
            &Point::Scalar(1.0),
            1e-9,
            &TailWindow::default(),
        )
        .unwrap();
        assert!(r.holds());
    }
}
