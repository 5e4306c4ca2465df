//! Brute-force references for small instances: every cut tuple, a uniform
//! grid over the bandwidth simplex, and the exact inner evaluation per grid
//! point. Slow on purpose; grid minima are upper bounds on true optima.

use rayon::prelude::*;
use serde::Serialize;

use crate::delay::{serial_total, NetworkInstance};
use crate::parallel::{arrivals_and_residuals, lemma1_allocate, EqualDelayProblem};
use crate::plan::SolverError;
use crate::serial::simultaneous_objective;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    /// Grid points per simplex edge (101 gives 1% steps).
    pub simplex_points: usize,
    /// Largest module count accepted for exhaustive cut enumeration.
    pub max_modules: usize,
    /// Largest device count accepted.
    pub max_devices: usize,
    /// Samples of the dense root scan.
    pub scan_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            simplex_points: 101,
            max_modules: 6,
            max_devices: 3,
            scan_points: 1_000_000,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<(), SolverError> {
        if self.simplex_points < 2 || self.max_modules < 2 || self.max_devices < 2 || self.scan_points < 2 {
            return Err(SolverError::Settings("grid sizes must be at least 2".into()));
        }
        Ok(())
    }
}

/// Objective of the serial oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SerialObjective {
    /// `max C + sum F / f_max`, the objective the simultaneous-arrival
    /// policy optimizes.
    SimultaneousArrival,
    /// Completion of the last job of the arrival-ordered queue.
    ExactQueue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub objective: f64,
    pub cuts: Vec<usize>,
    pub bandwidth: Vec<f64>,
    /// Server shares for the parallel oracle; empty for the serial one.
    pub server_compute: Vec<f64>,
}

fn check_size(net: &NetworkInstance, grid: &GridSpec) -> Result<(), SolverError> {
    grid.validate()?;
    if net.len() > grid.max_devices {
        return Err(SolverError::TooLarge(format!("{} devices (limit {})", net.len(), grid.max_devices)));
    }
    if let Some(d) = net.devices.iter().find(|d| d.modules() > grid.max_modules) {
        return Err(SolverError::TooLarge(format!("{} modules (limit {})", d.modules(), grid.max_modules)));
    }
    Ok(())
}

/// All cut tuples in lexicographic order.
fn cut_tuples(net: &NetworkInstance) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for d in &net.devices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                d.profile().cuts().map(move |l| {
                    let mut t = prefix.clone();
                    t.push(l);
                    t
                })
            })
            .collect();
    }
    out
}

/// Points of the bandwidth simplex `sum B = B_tot` with step
/// `B_tot / (simplex_points - 1)`, in lexicographic order.
pub fn simplex_grid(devices: usize, spectrum: f64, simplex_points: usize) -> Vec<Vec<f64>> {
    let n = simplex_points - 1;
    let mut out = Vec::new();
    let mut counts = vec![0usize; devices];
    fn fill(k: usize, left: usize, counts: &mut Vec<usize>, n: usize, spectrum: f64, out: &mut Vec<Vec<f64>>) {
        if k + 1 == counts.len() {
            counts[k] = left;
            out.push(counts.iter().map(|&c| spectrum * c as f64 / n as f64).collect());
            return;
        }
        for c in 0..=left {
            counts[k] = c;
            fill(k + 1, left - c, counts, n, spectrum, out);
        }
    }
    fill(0, n, &mut counts, n, spectrum, &mut out);
    out
}

/// Minimum over cut tuples and grid points, ties to the earliest candidate.
fn grid_search<E>(net: &NetworkInstance, grid: &GridSpec, eval: E) -> Result<OracleResult, SolverError>
where
    E: Fn(&[usize], &[f64], &[f64], &[f64]) -> Option<(f64, Vec<f64>)> + Sync,
{
    check_size(net, grid)?;
    let points = simplex_grid(net.len(), net.spectrum, grid.simplex_points);
    let per_tuple: Vec<Option<OracleResult>> = cut_tuples(net)
        .into_par_iter()
        .map(|cuts| {
            let mut best: Option<OracleResult> = None;
            for bandwidth in &points {
                let (c, f) = arrivals_and_residuals(net, &cuts, bandwidth);
                if c.iter().any(|x| !x.is_finite()) {
                    continue;
                }
                let Some((objective, server)) = eval(&cuts, bandwidth, &c, &f) else { continue };
                if best.as_ref().is_none_or(|b| objective < b.objective) {
                    best = Some(OracleResult {
                        objective,
                        cuts: cuts.clone(),
                        bandwidth: bandwidth.clone(),
                        server_compute: server,
                    });
                }
            }
            best
        })
        .collect();
    per_tuple
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.objective < a.objective { b } else { a })
        .ok_or_else(|| SolverError::Infeasible("no grid point has finite delay".into()))
}

/// Grid minimum of the parallel-processing max delay, with the equal-delay
/// compute split at every grid point.
pub fn oracle_parallel(net: &NetworkInstance, grid: &GridSpec) -> Result<OracleResult, SolverError> {
    grid_search(net, grid, |_, _, c, f| {
        let problem = EqualDelayProblem::new(c, f, net.server_compute).ok()?;
        let outcome = lemma1_allocate(&problem).ok()?;
        Some((outcome.delay(), outcome.server(c.len())))
    })
}

/// Grid minimum of a serial-processing objective.
pub fn oracle_serial(net: &NetworkInstance, grid: &GridSpec, objective: SerialObjective) -> Result<OracleResult, SolverError> {
    grid_search(net, grid, |_, _, c, f| {
        let value = match objective {
            SerialObjective::SimultaneousArrival => simultaneous_objective(c, f, net.server_compute),
            SerialObjective::ExactQueue => serial_total(c, f, net.server_compute),
        };
        Some((value, Vec::new()))
    })
}

/// Samples `q(x) - f_max` at `points` evenly spaced `x` in
/// `(0, min(f_b, f_max)]` and returns the bracket of its only sign change.
///
/// `q(x) >= x` puts the root at or below `f_max`, so the scan never needs to
/// go further even when `f_b` is larger or infinite.
pub fn dense_root_scan(p: &EqualDelayProblem, points: usize) -> Result<(f64, f64), SolverError> {
    if p.active().is_empty() || points < 2 {
        return Err(SolverError::NoBracket);
    }
    let upper = p.bound().min(p.server());
    let fmax = p.server();
    let mut bracket = None;
    let mut prev_x = 0.0;
    let mut prev_neg = true; // q(0) = 0 < f_max
    for i in 1..=points {
        let x = upper * i as f64 / points as f64;
        let neg = p.q(x) < fmax;
        if prev_neg && !neg {
            if bracket.is_some() {
                return Err(SolverError::NoBracket);
            }
            bracket = Some((prev_x, x));
        } else if !prev_neg && neg {
            return Err(SolverError::NoBracket);
        }
        prev_x = x;
        prev_neg = neg;
    }
    bracket.ok_or(SolverError::NoBracket)
}
