//! The converged-run container shared by every algorithm, plus the
//! phase-invariant displacement used to detect fixed points.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{Beamformers, PowerAllocation};
use crate::linalg::{self, CMat, CVec};
use crate::metrics::{self, AlignmentDiagnostics, RateReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Iia,
    MaxSinr,
    Grad,
    TwoLayer,
    ZfOuter,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Iia,
        Algorithm::MaxSinr,
        Algorithm::Grad,
        Algorithm::TwoLayer,
        Algorithm::ZfOuter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Iia => "iia",
            Algorithm::MaxSinr => "max-sinr",
            Algorithm::Grad => "grad",
            Algorithm::TwoLayer => "two-layer",
            Algorithm::ZfOuter => "zf-outer",
        }
    }

    /// Whether the algorithm expects orthonormal initial blocks.
    pub fn wants_orthonormal_init(self) -> bool {
        !matches!(self, Algorithm::Grad)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                format!("unknown algorithm {s:?} (expected iia, max-sinr, grad, two-layer or zf-outer)")
            })
    }
}

/// One row of an iteration trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iter: usize,
    pub displacement: f64,
    pub sum_rate_bits: f64,
    pub leakage: f64,
}

pub fn trace_to_csv(trace: &[TraceEntry]) -> String {
    let mut out = String::from("iter,displacement,sum_rate_bits,leakage\n");
    for t in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.iter, t.displacement, t.sum_rate_bits, t.leakage
        ));
    }
    out
}

/// Result of one algorithm run.
///
/// `final_residual` is the quantity the run's stopping rule tests against
/// `tolerance`: the fixed-point displacement for max-SINR, the total
/// leakage for IIA and the projected-gradient norm for gradient ascent.
/// `converged` is exactly `final_residual < tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub beamformers: Beamformers,
    pub powers: PowerAllocation,
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub tolerance: f64,
    pub rate: RateReport,
    pub alignment: AlignmentDiagnostics,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceEntry>,
}

/// Per-user distance between two blocks that is blind to per-column phase:
/// chordal distance between the spanned subspaces plus the largest
/// phase-aligned column distance.
pub fn block_displacement(a: &CMat, b: &CMat) -> f64 {
    let columns = (0..a.ncols())
        .map(|j| {
            let x: CVec = a.column(j).into_owned();
            let y: CVec = b.column(j).into_owned();
            linalg::phase_aligned_distance(&x, &y)
        })
        .fold(0.0, f64::max);
    metrics::subspace_distance(a, b) + columns
}

/// `max_k block_displacement(a_k, b_k)`.
pub fn displacement(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| block_displacement(x, y))
        .fold(0.0, f64::max)
}

/// Largest per-user chordal distance between the column spaces of `a` and `b`.
pub fn max_subspace_distance(a: &[CMat], b: &[CMat]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| metrics::subspace_distance(x, y))
        .fold(0.0, f64::max)
}
