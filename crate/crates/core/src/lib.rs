//! Split-inference planning for bottleneck-module segmentation networks.
//!
//! Devices run the first `l` modules of their network locally, ship the
//! activations (plus pooling indices) over a shared uplink, and a base-station
//! server finishes the rest. The crate models the per-cut workloads and
//! payloads, the delay algebra, and the allocation policies that pick cuts,
//! bandwidth shares and server compute:
//!
//! * parallel server processing: [`parallel::solve_p1`], [`parallel::solve_p2`],
//!   [`parallel::min_data_layer_policy`], [`parallel::first_layer_policy`];
//! * serial server processing: [`serial::solve_p3`], [`serial::queue_heuristic`],
//!   [`serial::queue_first_layer_policy`].
//!
//! [`oracle`] holds slow brute-force references and [`harness`] the seeded
//! Monte-Carlo driver behind the `splitplan` CLI.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod arch;
pub mod channel;
pub mod delay;
pub mod harness;
pub mod oracle;
pub mod parallel;
pub mod plan;
pub mod roots;
pub mod serial;

pub use arch::{load_architecture, propagate, Architecture, CutProfile, TensorShape};
pub use channel::{achievable_rate, bandwidth_for_rate, ChannelConfig, FadingSampler, LinkParams};
pub use delay::{Device, NetworkInstance, QueueState};

pub use plan::{AllocationPlan, CutInit, P3LayerRule, Policy, SolverError, SolverSettings};

/// Runs one policy on a network.
pub fn solve(policy: Policy, net: &NetworkInstance, settings: &SolverSettings) -> Result<AllocationPlan, SolverError> {
    match policy {
        Policy::P1 => parallel::solve_p1(net, settings),
        Policy::P2 => parallel::solve_p2(net, settings),
        Policy::MinData => parallel::min_data_layer_policy(net, settings),
        Policy::FirstLayer => parallel::first_layer_policy(net, settings),
        Policy::P3 => serial::solve_p3(net, settings),
        Policy::QueueHeuristic => serial::queue_heuristic(net, settings),
        Policy::QueueFirstLayer => serial::queue_first_layer_policy(net, settings),
    }
}
