//! Types shared by the allocation policies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelError;
use crate::delay::DelayError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("{0} did not converge")]
    NonConvergence(&'static str),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid bracket for the equal-delay root: upper bound {bound}")]
    InvalidBracket { bound: f64 },
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("no sign change of q(x) - f_max found in the scan")]
    NoBracket,
    #[error("invalid settings: {0}")]
    Settings(String),
}

/// The seven allocation policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Policy {
    #[serde(rename = "p1")]
    P1,
    #[serde(rename = "p2")]
    P2,
    #[serde(rename = "min-data")]
    MinData,
    #[serde(rename = "first-layer")]
    FirstLayer,
    #[serde(rename = "p3")]
    P3,
    #[serde(rename = "queue-heuristic")]
    QueueHeuristic,
    #[serde(rename = "queue-first-layer")]
    QueueFirstLayer,
}

impl Policy {
    pub const ALL: [Policy; 7] = [
        Policy::P1,
        Policy::P2,
        Policy::MinData,
        Policy::FirstLayer,
        Policy::P3,
        Policy::QueueHeuristic,
        Policy::QueueFirstLayer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::P1 => "p1",
            Policy::P2 => "p2",
            Policy::MinData => "min-data",
            Policy::FirstLayer => "first-layer",
            Policy::P3 => "p3",
            Policy::QueueHeuristic => "queue-heuristic",
            Policy::QueueFirstLayer => "queue-first-layer",
        }
    }

    /// Serial (queued) server processing rather than parallel shares.
    pub fn is_serial(self) -> bool {
        matches!(self, Policy::P3 | Policy::QueueHeuristic | Policy::QueueFirstLayer)
    }

    /// Policies that alternate between resources and cut selection.
    pub fn is_iterative(self) -> bool {
        matches!(self, Policy::P1 | Policy::P2 | Policy::P3 | Policy::QueueHeuristic)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Policy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Policy::ALL.iter().map(|p| p.as_str()).collect();
                format!("unknown policy `{s}` (expected one of {})", names.join(", "))
            })
    }
}

/// Where the alternating solvers start their cut search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutInit {
    /// Smallest-payload cut of each device.
    MinData,
    /// Uniformly random cuts from a seeded generator.
    Random { seed: u64 },
}

/// Cut re-selection rule of the simultaneous-arrival serial policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum P3LayerRule {
    /// Minimize the full objective `max C + sum F / f_max` per device.
    Exact,
    /// Minimize the device's own arrival delay only.
    COnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Relative tolerance of inner bisections.
    pub tolerance: f64,
    /// Cap on outer alternating iterations of P1, P2 and P3.
    pub max_iterations: usize,
    /// Outer iterations of the queue heuristic.
    pub heuristic_iterations: usize,
    /// Stop when the objective improves by less than this, relatively.
    pub stall_tolerance: f64,
    pub cut_init: CutInit,
    /// Loop the break reallocation while more than one break is left,
    /// instead of more than two.
    pub strict_breaks: bool,
    pub p3_layer_rule: P3LayerRule,
    /// Re-solves per device that P1 and P3 may spend on single-device cut
    /// moves after their alternation settles; 0 disables the polish.
    pub polish_per_device: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 20,
            heuristic_iterations: 4,
            stall_tolerance: 1e-6,
            cut_init: CutInit::MinData,
            strict_breaks: false,
            p3_layer_rule: P3LayerRule::Exact,
            polish_per_device: 8,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tolerance > 0.0) || !(self.stall_tolerance > 0.0) || self.max_iterations == 0
            || self.heuristic_iterations == 0
        {
            return Err(SolverError::Settings(
                "tolerances and the iteration cap must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Sets the outer iteration count of every alternating policy.
    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.max_iterations = iterations;
        self.heuristic_iterations = iterations;
        self
    }

    /// True once `next` no longer improves on `prev` by the stall tolerance.
    pub(crate) fn stalled(&self, prev: f64, next: f64) -> bool {
        prev.is_finite() && (prev - next) <= self.stall_tolerance * prev.abs()
    }
}

/// A complete allocation with its delay breakdown.
///
/// Vectors are indexed by device. For parallel policies `server_compute`
/// holds each device's server share; for serial policies it is `f_max` for
/// every device with residual work (the server serves one job at a time).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationPlan {
    pub policy: Policy,
    pub cuts: Vec<usize>,
    pub bandwidth: Vec<f64>,
    pub server_compute: Vec<f64>,
    /// `C_k`, seconds.
    pub arrivals: Vec<f64>,
    /// `F_k`, FLOPs.
    pub residuals: Vec<f64>,
    /// Per-device completion time, seconds.
    pub delays: Vec<f64>,
    /// Completion of the slowest device, seconds.
    pub objective: f64,
    pub iterations: usize,
    /// Best objective after each outer iteration.
    pub history: Vec<f64>,
}

impl AllocationPlan {
    pub fn total_bandwidth(&self) -> f64 {
        self.bandwidth.iter().sum()
    }

    pub fn total_server_compute(&self) -> f64 {
        self.server_compute.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_names_roundtrip() {
        for p in Policy::ALL {
            assert_eq!(p.as_str().parse::<Policy>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("\"{}\"", p.as_str()));
        }
        assert!("p4".parse::<Policy>().is_err());
    }

    #[test]
    fn settings_validation() {
        assert!(SolverSettings::default().validate().is_ok());
        assert!(SolverSettings::default().with_iterations(0).validate().is_err());
    }
}
