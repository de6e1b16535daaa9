//! Damped PageRank without dangling-mass redistribution.

use super::{Kernel, Seed};
use crate::error::{Error, Result};
use crate::graph_model::VertexId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PageRank {
    alpha: f64,
    epsilon: f64,
}

pub const DEFAULT_DAMPING: f64 = 0.85;

impl PageRank {
    /// `epsilon = 0` runs a fixed number of iterations.
    pub fn new(alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidInput(format!("damping {alpha} outside (0, 1)")));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidInput(format!(
                "epsilon {epsilon} must be a finite non-negative number"
            )));
        }
        Ok(PageRank { alpha, epsilon })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Sum of all ranks.
    pub fn output(attrs: &[f64]) -> f64 {
        attrs.iter().sum()
    }
}

impl Kernel for PageRank {
    type Attr = f64;
    type Contrib = f64;

    fn name(&self) -> &'static str {
        "pagerank"
    }

    fn init(&self, _v: VertexId, n: u64) -> f64 {
        1.0 / n as f64
    }

    fn seed(&self, n: u64) -> Seed<f64> {
        Seed::Reset((1.0 - self.alpha) / n as f64)
    }

    #[inline]
    fn gather(&self, rank: &f64, out_degree: u32) -> Option<f64> {
        (out_degree > 0).then(|| self.alpha * rank / out_degree as f64)
    }

    #[inline]
    fn combine(&self, a: f64, b: f64) -> f64 {
        a + b
    }

    #[inline]
    fn apply(&self, cur: &f64, c: f64) -> f64 {
        cur + c
    }

    fn changed(&self, old: &f64, new: &f64) -> bool {
        (new - old).abs() > self.epsilon
    }

    fn fixed_iterations(&self) -> bool {
        self.epsilon == 0.0
    }

    fn skips_inactive_sources(&self) -> bool {
        false
    }

    fn needs_out_degrees(&self) -> bool {
        true
    }
}
