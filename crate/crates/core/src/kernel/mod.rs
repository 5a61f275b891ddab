//! Marginalized random-walk kernel between relation candidates.
//!
//! A candidate is turned into a labeled [`GraphView`] according to a
//! [`KernelVariant`]; two views define a linear system over vertex pairs
//! whose solution gives the expected number of matching walks.

mod gram;
mod system;
mod view;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::KernelError;

pub use gram::{
    combined_kernel, cross_kernel_matrix, gram_matrix, min_eigenvalue, rw_kernel, GramMatrix,
    KernelMatrixBuilder,
};
pub use system::{assemble_matrices, solve_walk_system, TransitionMatrix, WalkSystem};
pub use view::{
    edge_kernel, variant_view, vertex_kernel, walk_distributions, GraphView, ViewEdge, ViewVertex,
    WalkDistributions,
};

/// Linear-system solver used for each kernel evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Solver {
    /// Dense LU when the system has at most `dense_max_pairs` unknowns,
    /// fixed-point iteration above.
    Auto,
    DenseDirect,
    FixedPoint,
}

impl FromStr for Solver {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(Solver::Auto),
            "dense" | "densedirect" | "dense-direct" => Ok(Solver::DenseDirect),
            "fixed-point" | "fixedpoint" | "fp" => Ok(Solver::FixedPoint),
            other => Err(KernelError::InvalidParams(format!(
                "unknown solver {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkParams {
    /// Per-step termination probability of a walk.
    pub gamma: f64,
    pub solver: Solver,
    pub fp_tolerance: f64,
    pub fp_max_iters: usize,
    /// Largest system size solved densely under [`Solver::Auto`].
    pub dense_max_pairs: usize,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            gamma: 0.1,
            solver: Solver::Auto,
            fp_tolerance: 1e-10,
            fp_max_iters: 10_000,
            dense_max_pairs: 4096,
        }
    }
}

impl WalkParams {
    pub fn with_gamma(gamma: f64) -> Self {
        WalkParams {
            gamma,
            ..Default::default()
        }
    }

    pub fn with_solver(self, solver: Solver) -> Self {
        WalkParams { solver, ..self }
    }

    pub fn validate(&self) -> Result<(), KernelError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(KernelError::InvalidParams(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if self.fp_tolerance.is_nan() || self.fp_tolerance <= 0.0 {
            return Err(KernelError::InvalidParams(format!(
                "fp_tolerance must be positive, got {}",
                self.fp_tolerance
            )));
        }
        if self.fp_max_iters == 0 {
            return Err(KernelError::InvalidParams(
                "fp_max_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// The concrete solver used for a system with `pairs` unknowns.
    pub fn resolve_solver(&self, pairs: usize) -> Solver {
        match self.solver {
            Solver::Auto if pairs <= self.dense_max_pairs => Solver::DenseDirect,
            Solver::Auto => Solver::FixedPoint,
            s => s,
        }
    }
}

/// Which view of a candidate the walks run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KernelVariant {
    /// Whole graph with entity and shortest-path flags.
    #[serde(rename = "FGK")]
    Full,
    /// Subgraph induced by the shortest path between the entities.
    #[serde(rename = "SPK")]
    ShortestPath,
    /// Whole graph with the shortest-path flags erased.
    #[serde(rename = "NSPK")]
    NoShortestPath,
}

impl KernelVariant {
    pub const ALL: [KernelVariant; 3] = [
        KernelVariant::Full,
        KernelVariant::ShortestPath,
        KernelVariant::NoShortestPath,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelVariant::Full => "FGK",
            KernelVariant::ShortestPath => "SPK",
            KernelVariant::NoShortestPath => "NSPK",
        }
    }
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelVariant {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FGK" => Ok(KernelVariant::Full),
            "SPK" => Ok(KernelVariant::ShortestPath),
            "NSPK" => Ok(KernelVariant::NoShortestPath),
            other => Err(KernelError::InvalidSpec(format!(
                "unknown kernel variant {other:?}"
            ))),
        }
    }
}

/// Unweighted sum of (optionally cosine-normalized) variant kernels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSpec {
    components: Vec<KernelVariant>,
    pub normalize_each: bool,
}

impl KernelSpec {
    pub fn new(components: Vec<KernelVariant>, normalize_each: bool) -> Result<Self, KernelError> {
        if components.is_empty() {
            return Err(KernelError::InvalidSpec("no kernel components".into()));
        }
        for (k, c) in components.iter().enumerate() {
            if components[..k].contains(c) {
                return Err(KernelError::InvalidSpec(format!("duplicate component {c}")));
            }
        }
        Ok(KernelSpec {
            components,
            normalize_each,
        })
    }

    pub fn single(variant: KernelVariant) -> Self {
        KernelSpec {
            components: vec![variant],
            normalize_each: true,
        }
    }

    pub fn components(&self) -> &[KernelVariant] {
        &self.components
    }

    /// `SPK+NSPK` style name.
    pub fn name(&self) -> String {
        self.components
            .iter()
            .map(|c| c.name())
            .collect::<Vec<_>>()
            .join("+")
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for KernelSpec {
    type Err = KernelError;

    /// Parses `FGK`, `SPK+NSPK`, ... with normalization on. `ALL` is
    /// shorthand for `FGK+SPK+NSPK`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("all") {
            return KernelSpec::new(KernelVariant::ALL.to_vec(), true);
        }
        let components = s
            .split('+')
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()?;
        KernelSpec::new(components, true)
    }
}

impl Serialize for KernelSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for KernelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
