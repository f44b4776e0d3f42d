//! Provenance attached to every emitted report.

use serde::Serialize;

use crate::dirichlet::GridInfo;
use crate::VERSION;

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    /// Sieve limit N of the prime tables.
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "P_max")]
    pub p_max: u64,
    /// Grid used by the t-maximization, when one ran.
    pub grid: Option<GridInfo>,
    /// Point budget of the grid search.
    pub budget: u64,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(n: u64, p_max: u64, budget: u64) -> Self {
        Provenance { n, p_max, grid: None, budget, version: VERSION, seed: None }
    }

    pub fn with_grid(mut self, grid: Option<GridInfo>) -> Self {
        self.grid = grid;
        self
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}

/// A result together with its provenance, serialized as one flat object
/// with a `provenance` member.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub command: String,
    #[serde(flatten)]
    pub body: T,
    pub provenance: Provenance,
}
