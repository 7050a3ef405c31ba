//! Points, grids and the two metric spaces everything else operates on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform grid `t_i = i / n` on `[0, 1]` with `n` subintervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("grid needs at least one subinterval".into()));
        }
        Ok(Grid { n })
    }

    /// Number of subintervals.
    pub fn intervals(&self) -> usize {
        self.n
    }

    /// Number of nodes, `n + 1`.
    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        // i / n rather than i * h so that the last node is exactly 1
        i as f64 / self.n as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|i| self.node(i))
    }

    /// Index of the node closest to `t`, ties broken toward the lower node.
    pub fn nearest_node(&self, t: f64) -> usize {
        let scaled = t * self.n as f64;
        let lower = scaled.floor().clamp(0.0, self.n as f64) as usize;
        if lower < self.n && scaled - lower as f64 > 0.5 {
            lower + 1
        } else {
            lower
        }
    }
}

/// A real function sampled at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFn {
    #[serde(rename = "n", serialize_with = "serialize_grid_n")]
    grid: Grid,
    values: Vec<f64>,
}

fn serialize_grid_n<S: serde::Serializer>(grid: &Grid, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(grid.intervals() as u64)
}

impl GridFn {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "grid with {} nodes given {} values",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint(format!(
                "non-finite value {} at node {i}",
                values[i]
            )));
        }
        Ok(GridFn { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        GridFn::new(grid, values)
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        GridFn::new(grid, vec![c; grid.len()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Max-norm over the nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_distance(&self, other: &GridFn) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Shape(format!(
                "grids differ: n = {} vs n = {}",
                self.grid.intervals(),
                other.grid.intervals()
            )));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }
}

/// A point of one of the supported spaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Point {
    Scalar(f64),
    Grid(GridFn),
}

impl Point {
    pub fn scalar(v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(Point::Scalar(v))
        } else {
            Err(Error::InvalidPoint(format!("non-finite scalar {v}")))
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Point::Scalar(v) => Some(*v),
            Point::Grid(_) => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridFn> {
        match self {
            Point::Grid(g) => Some(g),
            Point::Scalar(_) => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Point::Scalar(v) => v.is_finite(),
            Point::Grid(g) => g.values.iter().all(|v| v.is_finite()),
        }
    }

    /// Scalar value, or the sup-norm of a grid function. Used for compact tables.
    pub fn magnitude(&self) -> f64 {
        match self {
            Point::Scalar(v) => *v,
            Point::Grid(g) => g.sup_norm(),
        }
    }
}

impl From<GridFn> for Point {
    fn from(g: GridFn) -> Self {
        Point::Grid(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    Interval { lo: f64, hi: f64, hi_inclusive: bool },
    Functions { n: usize },
}

/// How to draw a finite sample from a space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampling {
    /// `lo, lo + step, ...` up to the upper end of an interval.
    Lattice { step: f64 },
    /// `count` random grid functions with node values uniform in `[lo, hi]`,
    /// followed by the constant-zero function.
    Random { count: usize, lo: f64, hi: f64 },
}

impl Sampling {
    pub fn random(count: usize) -> Self {
        Sampling::Random { count, lo: 0.0, hi: 2.0 }
    }
}

/// A metric space: an interval of the real line with `|x - y|`, or grid
/// functions on `[0, 1]` with the max over nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSpace {
    kind: SpaceKind,
}

impl MetricSpace {
    pub fn interval(lo: f64, hi: f64, hi_inclusive: bool) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi || (lo == hi && !hi_inclusive) {
            return Err(Error::Domain(format!(
                "empty or invalid interval [{lo}, {hi}{}",
                if hi_inclusive { "]" } else { ")" }
            )));
        }
        Ok(MetricSpace {
            kind: SpaceKind::Interval { lo, hi, hi_inclusive },
        })
    }

    pub fn closed(lo: f64, hi: f64) -> Result<Self> {
        Self::interval(lo, hi, true)
    }

    pub fn half_open(lo: f64, hi: f64) -> Result<Self> {
        Self::interval(lo, hi, false)
    }

    pub fn functions(grid: Grid) -> Self {
        MetricSpace {
            kind: SpaceKind::Functions { n: grid.intervals() },
        }
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn grid(&self) -> Option<Grid> {
        match self.kind {
            SpaceKind::Functions { n } => Some(Grid { n }),
            SpaceKind::Interval { .. } => None,
        }
    }

    /// Membership with exact comparisons; an open upper end excludes `hi` itself.
    pub fn contains(&self, x: &Point) -> bool {
        match (self.kind, x) {
            (SpaceKind::Interval { lo, hi, hi_inclusive }, Point::Scalar(v)) => {
                *v >= lo && (*v < hi || (hi_inclusive && *v == hi))
            }
            (SpaceKind::Functions { n }, Point::Grid(g)) => g.grid.n == n && x.is_finite(),
            _ => false,
        }
    }

    /// `d(x, y)`.
    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        match (self.kind, x, y) {
            (SpaceKind::Interval { .. }, Point::Scalar(a), Point::Scalar(b)) => Ok((a - b).abs()),
            (SpaceKind::Functions { n }, Point::Grid(a), Point::Grid(b)) => {
                if a.grid.n != n {
                    return Err(Error::Shape(format!(
                        "point on n = {} grid, space uses n = {n}",
                        a.grid.n
                    )));
                }
                a.max_distance(b)
            }
            _ => Err(Error::Shape(format!(
                "cannot measure {} against {} in {:?}",
                kind_name(x),
                kind_name(y),
                self.kind
            ))),
        }
    }

    /// Deterministic finite sample. Lattice sampling applies to intervals,
    /// random sampling to function spaces.
    pub fn sample(&self, sampling: Sampling, seed: u64) -> Result<Vec<Point>> {
        let points = match (self.kind, sampling) {
            (SpaceKind::Interval { lo, hi, hi_inclusive }, Sampling::Lattice { step }) => {
                if !(step > 0.0 && step.is_finite()) {
                    return Err(Error::Sampling(format!("lattice step must be positive, got {step}")));
                }
                let mut out = Vec::new();
                for i in 0usize.. {
                    let v = lo + i as f64 * step;
                    if v > hi || (v == hi && !hi_inclusive) {
                        break;
                    }
                    out.push(Point::Scalar(v));
                }
                out
            }
            (SpaceKind::Functions { n }, Sampling::Random { count, lo, hi }) => {
                if count == 0 {
                    return Err(Error::Sampling("function-space sample count must be positive".into()));
                }
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::Sampling(format!("invalid value box [{lo}, {hi}]")));
                }
                let grid = Grid { n };
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out: Vec<Point> = (0..count)
                    .map(|_| {
                        let values = (0..grid.len())
                            .map(|_| if lo == hi { lo } else { rng.random_range(lo..=hi) })
                            .collect();
                        Point::Grid(GridFn { grid, values })
                    })
                    .collect();
                out.push(Point::Grid(GridFn::constant(grid, 0.0)?));
                out
            }
            (kind, sampling) => {
                return Err(Error::Sampling(format!("{sampling:?} does not apply to {kind:?}")));
            }
        };
        if points.is_empty() {
            return Err(Error::Sampling("sample is empty".into()));
        }
        Ok(points)
    }
}

fn kind_name(p: &Point) -> &'static str {
    match p {
        Point::Scalar(_) => "scalar",
        Point::Grid(_) => "grid function",
    }
}

/// All ordered pairs `(x, y)` of the sample, capped at `cap` with a
/// deterministic stride once the full product would exceed it.
pub fn sample_pairs(sample: &[Point], cap: usize) -> Vec<(Point, Point)> {
    let total = sample.len() * sample.len();
    let stride = total.div_ceil(cap.max(1)).max(1);
    let mut out = Vec::with_capacity(total.min(cap));
    for idx in (0..total).step_by(stride) {
        let (i, j) = (idx / sample.len(), idx % sample.len());
        out.push((sample[i].clone(), sample[j].clone()));
    }
    out
}
