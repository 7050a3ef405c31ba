//! Finite stand-ins for "eventually" and "in the limit".

use serde::Serialize;

use crate::error::Result;
use crate::space::{MetricSpace, Point};

/// The trailing slice of a finite sequence that plays the role of its
/// infinite tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailWindow {
    /// Fraction of entries, counted from the end, that form the tail.
    pub fraction: f64,
    /// Distance to the limit under which a sequence counts as arrived.
    pub tol: f64,
}

impl Default for TailWindow {
    fn default() -> Self {
        TailWindow { fraction: 0.25, tol: 1e-9 }
    }
}

impl TailWindow {
    /// First index of the tail for a sequence of `len` entries. Always keeps
    /// at least one entry.
    pub fn start(&self, len: usize) -> usize {
        let keep = ((len as f64) * self.fraction).ceil() as usize;
        len - keep.clamp(1, len.max(1))
    }

    /// Convergence proxy: the last entry is within `tol` of the limit, or the
    /// distances to the limit never increase across the tail and strictly
    /// shrink from its first entry to its last.
    pub fn converges(&self, space: &MetricSpace, seq: &[Point], limit: &Point) -> Result<bool> {
        if seq.is_empty() {
            return Ok(false);
        }
        let start = self.start(seq.len());
        let dists = seq[start..]
            .iter()
            .map(|x| space.distance(x, limit))
            .collect::<Result<Vec<_>>>()?;
        let last = *dists.last().expect("tail is nonempty");
        if last <= self.tol {
            return Ok(true);
        }
        let monotone = dists.windows(2).all(|w| w[1] <= w[0] + 1e-15);
        Ok(monotone && last < dists[0])
    }
}
