//! Binary relations and the relation-theoretic predicates built on them.
//!
//! Every "for all x, y" property is decided on a finite sample; reports carry
//! the sample size so a verdict is never mistaken for a proof.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::engine::SelfMap;
use crate::error::{Error, Result};
use crate::space::{MetricSpace, Point};
use crate::tail::TailWindow;

type Predicate = dyn Fn(&Point, &Point) -> bool + Send + Sync;

/// A decidable binary relation `R` on points.
#[derive(Clone)]
pub struct Relation {
    name: String,
    note: String,
    pred: Arc<Predicate>,
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Relation").field("name", &self.name).finish()
    }
}

impl Relation {
    pub fn new(
        name: impl Into<String>,
        pred: impl Fn(&Point, &Point) -> bool + Send + Sync + 'static,
    ) -> Self {
        Relation {
            name: name.into(),
            note: String::new(),
            pred: Arc::new(pred),
        }
    }

    /// Relation on scalars; any grid-function argument is unrelated.
    pub fn on_scalars(
        name: impl Into<String>,
        pred: impl Fn(f64, f64) -> bool + Send + Sync + 'static,
    ) -> Self {
        Relation::new(name, move |x, y| match (x, y) {
            (Point::Scalar(a), Point::Scalar(b)) => pred(*a, *b),
            _ => false,
        })
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn note(&self) -> &str {
        &self.note
    }

    /// `(x, y) ∈ R`.
    pub fn holds(&self, x: &Point, y: &Point) -> bool {
        (self.pred)(x, y)
    }

    /// `[x, y] ∈ R`: related in at least one order.
    pub fn holds_either(&self, x: &Point, y: &Point) -> bool {
        self.holds(x, y) || self.holds(y, x)
    }

    pub fn universal() -> Self {
        Relation::new("universal", |_, _| true)
    }

    pub fn empty() -> Self {
        Relation::new("empty", |_, _| false)
    }

    /// `x >= y`.
    pub fn greater_or_equal() -> Self {
        Relation::on_scalars("x >= y", |x, y| x >= y)
    }

    /// `xy <= x` or `xy <= y`.
    pub fn product_below_either() -> Self {
        Relation::on_scalars("xy <= x or xy <= y", |x, y| {
            let p = x * y;
            p <= x || p <= y
        })
    }

    /// `x` a positive even integer and `y` a positive odd integer.
    pub fn even_to_odd() -> Self {
        Relation::on_scalars("x even, y odd", |x, y| {
            let int = |v: f64| v.fract() == 0.0 && v >= 1.0;
            int(x) && int(y) && x.rem_euclid(2.0) == 0.0 && y.rem_euclid(2.0) == 1.0
        })
    }

    /// Both points lie in the same open window `(n - 1/5, n + 1/5)`, `n ∈ Z`.
    pub fn same_integer_window() -> Self {
        Relation::on_scalars("x, y in (n - 1/5, n + 1/5)", |x, y| {
            let n = x.round();
            (x - n).abs() < 0.2 && (y - n).abs() < 0.2
        })
    }

    /// `x(t) y(t) >= 0` at every grid node.
    pub fn pointwise_same_sign() -> Self {
        Relation::new("x(t) y(t) >= 0", |x, y| match (x, y) {
            (Point::Grid(a), Point::Grid(b)) => {
                a.grid() == b.grid()
                    && a.values().iter().zip(b.values()).all(|(u, v)| u * v >= 0.0)
            }
            _ => false,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RelationProperty {
    TClosed,
    WeakTClosed,
    Complete,
    StartPointsNonempty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    HoldsOnSample,
    FailsWithWitness,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::HoldsOnSample
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationReport {
    pub property: RelationProperty,
    pub relation: String,
    pub verdict: Verdict,
    pub witnesses: Vec<(Point, Point)>,
    pub sample_size: usize,
}

impl RelationReport {
    fn from_witnesses(
        property: RelationProperty,
        rel: &Relation,
        witnesses: Vec<(Point, Point)>,
        sample_size: usize,
    ) -> Self {
        let verdict = if witnesses.is_empty() {
            Verdict::HoldsOnSample
        } else {
            Verdict::FailsWithWitness
        };
        RelationReport {
            property,
            relation: rel.name.clone(),
            verdict,
            witnesses,
            sample_size,
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }
}

/// Every consecutive pair of `seq` is related. Sequences shorter than two
/// entries are trivially preserving.
pub fn is_preserving(rel: &Relation, seq: &[Point]) -> bool {
    seq.windows(2).all(|w| rel.holds(&w[0], &w[1]))
}

fn require_nonempty(sample: &[Point]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::Precondition("sample is empty".into()));
    }
    Ok(())
}

fn closedness(
    rel: &Relation,
    map: &SelfMap,
    sample: &[Point],
    property: RelationProperty,
) -> Result<RelationReport> {
    require_nonempty(sample)?;
    let images = sample.iter().map(|x| map.apply(x)).collect::<Result<Vec<_>>>()?;
    let mut witnesses = Vec::new();
    for (i, x) in sample.iter().enumerate() {
        for (j, y) in sample.iter().enumerate() {
            if !rel.holds(x, y) {
                continue;
            }
            let (fx, fy) = (&images[i], &images[j]);
            let ok = match property {
                RelationProperty::TClosed => rel.holds(fx, fy),
                _ => rel.holds_either(fx, fy),
            };
            if !ok {
                witnesses.push((x.clone(), y.clone()));
            }
        }
    }
    Ok(RelationReport::from_witnesses(property, rel, witnesses, sample.len()))
}

/// `(x, y) ∈ R ⇒ (Tx, Ty) ∈ R` on every sampled pair. Witnesses are the
/// offending preimage pairs.
pub fn check_t_closed(rel: &Relation, map: &SelfMap, sample: &[Point]) -> Result<RelationReport> {
    closedness(rel, map, sample, RelationProperty::TClosed)
}

/// `(x, y) ∈ R ⇒ [Tx, Ty] ∈ R` on every sampled pair.
pub fn check_weak_t_closed(
    rel: &Relation,
    map: &SelfMap,
    sample: &[Point],
) -> Result<RelationReport> {
    closedness(rel, map, sample, RelationProperty::WeakTClosed)
}

/// Sampled admissible starting points `{x : (x, Tx) ∈ R}`.
pub fn find_start_points(rel: &Relation, map: &SelfMap, sample: &[Point]) -> Result<Vec<Point>> {
    require_nonempty(sample)?;
    let mut out = Vec::new();
    for x in sample {
        let tx = map.apply(x)?;
        if rel.holds(x, &tx) {
            out.push(x.clone());
        }
    }
    Ok(out)
}

/// Every unordered sampled pair, the diagonal included, is related in at
/// least one order.
pub fn check_complete_on(rel: &Relation, sample: &[Point]) -> Result<RelationReport> {
    require_nonempty(sample)?;
    let mut witnesses = Vec::new();
    for (i, x) in sample.iter().enumerate() {
        for y in &sample[i..] {
            if !rel.holds_either(x, y) {
                witnesses.push((x.clone(), y.clone()));
            }
        }
    }
    Ok(RelationReport::from_witnesses(
        RelationProperty::Complete,
        rel,
        witnesses,
        sample.len(),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", content = "indices", rename_all = "snake_case")]
pub enum SelfClosedWitness {
    /// Indices `n_k` with `(x_{n_k}, limit) ∈ R`; every tail index is among them.
    Witnessed(Vec<usize>),
    /// Tail indices at which `(x_n, limit) ∉ R`.
    Failed(Vec<usize>),
}

impl SelfClosedWitness {
    pub fn is_witnessed(&self) -> bool {
        matches!(self, SelfClosedWitness::Witnessed(_))
    }
}

/// Finite proxy for d-self-closedness: an `R`-preserving sequence converging
/// to `limit` has its whole tail window related to the limit.
pub fn witness_d_self_closed(
    rel: &Relation,
    space: &MetricSpace,
    seq: &[Point],
    limit: &Point,
    window: &TailWindow,
) -> Result<SelfClosedWitness> {
    if seq.is_empty() {
        return Err(Error::Precondition("sequence is empty".into()));
    }
    if let Some(n) = seq.windows(2).position(|w| !rel.holds(&w[0], &w[1])) {
        return Err(Error::Precondition(format!(
            "sequence is not {}-preserving at index {n}",
            rel.name
        )));
    }
    if !window.converges(space, seq, limit)? {
        return Err(Error::Precondition("sequence does not approach the limit".into()));
    }
    let start = window.start(seq.len());
    let related: Vec<usize> = (0..seq.len()).filter(|&i| rel.holds(&seq[i], limit)).collect();
    let failing: Vec<usize> = (start..seq.len())
        .filter(|&i| !rel.holds(&seq[i], limit))
        .collect();
    Ok(if failing.is_empty() {
        SelfClosedWitness::Witnessed(related)
    } else {
        SelfClosedWitness::Failed(failing)
    })
}
