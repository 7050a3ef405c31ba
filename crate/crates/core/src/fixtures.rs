//! Worked examples: each bundles a space, a relation, a self-map and a
//! w-distance.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::engine::SelfMap;
use crate::error::{Error, Result};
use crate::relation::Relation;
use crate::space::{MetricSpace, Point, Sampling};
use crate::wdistance::WDistance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ExampleId {
    Ex1_7,
    Ex1_13,
    Ex1_14,
    Ex2_3,
    Ex2_4,
}

impl ExampleId {
    pub const ALL: [ExampleId; 5] = [
        ExampleId::Ex1_7,
        ExampleId::Ex1_13,
        ExampleId::Ex1_14,
        ExampleId::Ex2_3,
        ExampleId::Ex2_4,
    ];

    pub fn fixture(self) -> Fixture {
        match self {
            ExampleId::Ex1_7 => ex1_7(),
            ExampleId::Ex1_13 => ex1_13(),
            ExampleId::Ex1_14 => ex1_14(),
            ExampleId::Ex2_3 => ex2_3(),
            ExampleId::Ex2_4 => ex2_4(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleId::Ex1_7 => "ex1.7",
            ExampleId::Ex1_13 => "ex1.13",
            ExampleId::Ex1_14 => "ex1.14",
            ExampleId::Ex2_3 => "ex2.3",
            ExampleId::Ex2_4 => "ex2.4",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    /// Accepts `ex2.4`, `ex2_4`, `Ex2_4`, `2.4`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['_', '-'], ".");
        let norm = norm.strip_prefix("ex").unwrap_or(&norm);
        Ok(match norm {
            "1.7" => ExampleId::Ex1_7,
            "1.13" => ExampleId::Ex1_13,
            "1.14" => ExampleId::Ex1_14,
            "2.3" => ExampleId::Ex2_3,
            "2.4" => ExampleId::Ex2_4,
            _ => {
                return Err(Error::Precondition(format!(
                    "unknown example id {s:?}; expected one of ex1.7, ex1.13, ex1.14, ex2.3, ex2.4"
                )))
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub id: ExampleId,
    pub space: MetricSpace,
    pub relation: Relation,
    pub map: SelfMap,
    pub p: WDistance,
    /// Lattice step used when none is given.
    pub default_step: f64,
}

impl Fixture {
    pub fn sample(&self, step: f64) -> Result<Vec<Point>> {
        self.space.sample(Sampling::Lattice { step }, 0)
    }

    /// Sequences along which the fixture's `p(anchor, ·)` is tested for
    /// lower semicontinuity.
    pub fn lsc_probes(&self) -> Vec<LscProbe> {
        match self.id {
            ExampleId::Ex1_13 => vec![LscProbe {
                label: "1 - 1/(5(n+1)) from below".into(),
                relation: self.relation.clone(),
                seq: scalars((1..=200).map(|n| 1.0 - 1.0 / (5.0 * (n as f64 + 1.0)))),
                limit: Point::Scalar(1.0),
                expect_holds: true,
            }],
            ExampleId::Ex1_14 => vec![
                LscProbe {
                    label: "1 - 1/(n+1) from below".into(),
                    relation: self.relation.clone(),
                    seq: scalars((1..=200).map(|n| 1.0 - 1.0 / (n as f64 + 1.0))),
                    limit: Point::Scalar(1.0),
                    expect_holds: true,
                },
                // not R-preserving, so only plain semicontinuity applies
                LscProbe {
                    label: "1 + 1/n from the right, unrestricted".into(),
                    relation: Relation::universal(),
                    seq: scalars((1..=200).map(|n| 1.0 + 1.0 / n as f64)),
                    limit: Point::Scalar(1.0),
                    expect_holds: false,
                },
            ],
            _ => Vec::new(),
        }
    }
}

/// A convergent sequence plus the relation it must preserve.
#[derive(Debug, Clone)]
pub struct LscProbe {
    pub label: String,
    pub relation: Relation,
    pub seq: Vec<Point>,
    pub limit: Point,
    pub expect_holds: bool,
}

fn scalars(it: impl Iterator<Item = f64>) -> Vec<Point> {
    it.map(Point::Scalar).collect()
}

/// Parity relation on `{1, ..., 20}` with the successor map.
pub fn ex1_7() -> Fixture {
    let space = MetricSpace::closed(1.0, 20.0).expect("valid interval");
    Fixture {
        id: ExampleId::Ex1_7,
        space,
        relation: Relation::even_to_odd(),
        map: SelfMap::scalar("x + 1", |x| x + 1.0),
        p: WDistance::metric(space),
        default_step: 1.0,
    }
}

pub fn ceiling(x: f64) -> f64 {
    x.ceil()
}

/// Ceiling function with the integer-window relation.
pub fn ex1_13() -> Fixture {
    Fixture {
        id: ExampleId::Ex1_13,
        space: MetricSpace::closed(-3.0, 3.0).expect("valid interval"),
        relation: Relation::same_integer_window(),
        map: SelfMap::scalar("ceil", ceiling),
        p: WDistance::of_second("ceil(y)", ceiling),
        default_step: 0.05,
    }
}

/// `2` on `[0, 1)`, `1` at `1`, `1/2` beyond.
pub fn three_level_step(x: f64) -> f64 {
    if x < 1.0 {
        2.0
    } else if x == 1.0 {
        1.0
    } else {
        0.5
    }
}

/// Three-level step function with the product relation.
pub fn ex1_14() -> Fixture {
    Fixture {
        id: ExampleId::Ex1_14,
        space: MetricSpace::closed(0.0, 4.0).expect("valid interval"),
        relation: Relation::product_below_either(),
        map: SelfMap::scalar("step", three_level_step),
        p: WDistance::of_second("step(y)", three_level_step),
        default_step: 0.05,
    }
}

/// `x / 2` below 2, constant 2 from there on. The first branch leaves
/// `[1, 3)`; the map is extended to all reals by the same rule.
pub fn halve_or_two(x: f64) -> f64 {
    if x < 2.0 {
        x / 2.0
    } else {
        2.0
    }
}

pub fn ex2_3() -> Fixture {
    Fixture {
        id: ExampleId::Ex2_3,
        space: MetricSpace::half_open(1.0, 3.0).expect("valid interval"),
        relation: Relation::greater_or_equal(),
        map: SelfMap::scalar("x/2 on [1,2), 2 on [2,3)", halve_or_two),
        p: WDistance::abs_sum(),
        default_step: 0.1,
    }
}

/// Four-branch map on `[0, 2]` with its unique fixed point at 0.
pub fn four_branch(x: f64) -> f64 {
    if x <= 2.0 / 3.0 {
        x / 3.0
    } else if x < 1.0 {
        1.0 - x
    } else if x == 1.0 {
        0.75
    } else {
        x - 0.5
    }
}

pub fn ex2_4() -> Fixture {
    Fixture {
        id: ExampleId::Ex2_4,
        space: MetricSpace::closed(0.0, 2.0).expect("valid interval"),
        relation: Relation::product_below_either(),
        map: SelfMap::scalar("four-branch", four_branch),
        p: WDistance::second_coordinate(),
        default_step: 0.01,
    }
}
