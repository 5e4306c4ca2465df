//! Parallel server processing: every device gets its own share of the
//! server's compute, and all shares run concurrently.
//!
//! For fixed cuts and bandwidth, the min-max compute split equalizes the
//! delays of all devices that still have server work. Anchoring on the
//! earliest arrival `m`, every other share is a function of `x = f_m`:
//!
//! ```text
//! f_k = F_k x / (F_m + x (C_m - C_k))
//! q(x) = x + sum_{k != m} f_k(x) = f_max
//! ```
//!
//! `q` is strictly increasing on `(0, f_b)` with `f_b = min_k F_m / (C_k - C_m)`,
//! `q(0) = 0` and a pole at `f_b`, so the root there is unique and gives
//! positive shares.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::channel::{bandwidth_for_rate_snr, rate_from_snr, rate_slope, ChannelError};
use crate::delay::{Device, NetworkInstance};
use crate::plan::{AllocationPlan, CutInit, Policy, SolverError, SolverSettings};
use crate::roots::{illinois_increasing, newton_bracketed};

pub use crate::channel::bandwidth_for_rate;

/// Equal-delay compute split for fixed arrivals and residual workloads.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualDelayProblem {
    arrivals: Vec<f64>,
    residuals: Vec<f64>,
    server: f64,
    active: Vec<usize>,
    anchor: usize,
    bound: f64,
}

impl EqualDelayProblem {
    /// Anchors on the earliest arrival among devices with residual work
    /// (first index on ties).
    pub fn new(arrivals: &[f64], residuals: &[f64], server: f64) -> Result<Self, SolverError> {
        let active: Vec<usize> = (0..residuals.len()).filter(|&k| residuals[k] > 0.0).collect();
        let anchor = active
            .iter()
            .copied()
            .min_by(|&a, &b| arrivals[a].total_cmp(&arrivals[b]).then(a.cmp(&b)))
            .unwrap_or(0);
        Self::with_anchor(arrivals, residuals, server, anchor)
    }

    /// Same construction with an arbitrary anchor. Anchors other than the
    /// earliest arrival can produce an empty root interval (`bound() <= 0`).
    pub fn with_anchor(arrivals: &[f64], residuals: &[f64], server: f64, anchor: usize) -> Result<Self, SolverError> {
        if arrivals.len() != residuals.len() || arrivals.is_empty() {
            return Err(SolverError::Settings("arrivals and residuals must be non-empty and equal length".into()));
        }
        if !(server > 0.0) {
            return Err(SolverError::Settings("server compute must be positive".into()));
        }
        if arrivals.iter().any(|c| !c.is_finite()) || residuals.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return Err(SolverError::Settings("arrivals must be finite and residuals non-negative".into()));
        }
        let active: Vec<usize> = (0..residuals.len()).filter(|&k| residuals[k] > 0.0).collect();
        let mut bound = f64::INFINITY;
        if !active.is_empty() {
            let fm = residuals[anchor];
            for &k in &active {
                let dc = arrivals[anchor] - arrivals[k];
                if k != anchor && dc != 0.0 {
                    bound = bound.min(-fm / dc);
                }
            }
        }
        Ok(Self {
            arrivals: arrivals.to_vec(),
            residuals: residuals.to_vec(),
            server,
            active,
            anchor,
            bound,
        })
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    /// Right end `f_b` of the root interval (infinite when all active
    /// arrivals coincide).
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn server(&self) -> f64 {
        self.server
    }

    fn share(&self, k: usize, x: f64) -> f64 {
        let fm = self.residuals[self.anchor];
        let dc = self.arrivals[self.anchor] - self.arrivals[k];
        x * self.residuals[k] / (fm + x * dc)
    }

    /// `q(x) = x + sum_{k != m} F_k x / (F_m + x dc_k)`; `+inf` once any
    /// denominator is non-positive.
    pub fn q(&self, x: f64) -> f64 {
        let fm = self.residuals[self.anchor];
        let mut total = x;
        for &k in &self.active {
            if k == self.anchor {
                continue;
            }
            let denom = fm + x * (self.arrivals[self.anchor] - self.arrivals[k]);
            if denom <= 0.0 {
                return f64::INFINITY;
            }
            total += x * self.residuals[k] / denom;
        }
        total
    }

    /// `q` without the pole guard, for probing roots past the asymptote.
    pub fn q_unguarded(&self, x: f64) -> f64 {
        x + self
            .active
            .iter()
            .filter(|&&k| k != self.anchor)
            .map(|&k| self.share(k, x))
            .sum::<f64>()
    }

    fn q_slope(&self, x: f64) -> f64 {
        let fm = self.residuals[self.anchor];
        let mut slope = 1.0;
        for &k in &self.active {
            if k == self.anchor {
                continue;
            }
            let denom = fm + x * (self.arrivals[self.anchor] - self.arrivals[k]);
            if denom <= 0.0 {
                return f64::INFINITY;
            }
            slope += self.residuals[k] * fm / (denom * denom);
        }
        slope
    }

    /// Per-device shares implied by anchor share `x` (0 for idle devices).
    pub fn allocation_at(&self, x: f64) -> Vec<f64> {
        let mut f = vec![0.0; self.residuals.len()];
        for &k in &self.active {
            f[k] = if k == self.anchor { x } else { self.share(k, x) };
        }
        f
    }

    /// Common delay `C_m + F_m / x` of the active devices.
    pub fn common_delay(&self, x: f64) -> f64 {
        self.arrivals[self.anchor] + self.residuals[self.anchor] / x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Lemma1Outcome {
    /// Shares for every device and the resulting slowest-device delay.
    Allocated { server: Vec<f64>, root: f64, delay: f64 },
    /// No device has residual work; the delay is the latest arrival.
    NothingPending { delay: f64 },
}

impl Lemma1Outcome {
    pub fn delay(&self) -> f64 {
        match self {
            Lemma1Outcome::Allocated { delay, .. } | Lemma1Outcome::NothingPending { delay } => *delay,
        }
    }

    pub fn server(&self, devices: usize) -> Vec<f64> {
        match self {
            Lemma1Outcome::Allocated { server, .. } => server.clone(),
            Lemma1Outcome::NothingPending { .. } => vec![0.0; devices],
        }
    }
}

/// Solves `q(x) = f_max` on `(0, min(f_b, f_max)]` and expands the root into
/// per-device shares.
///
/// `q(x) >= x`, so the root never exceeds `f_max`; the search bracket is the
/// smaller of `f_b` and `f_max`.
pub fn lemma1_allocate(p: &EqualDelayProblem) -> Result<Lemma1Outcome, SolverError> {
    let latest = |ks: &mut dyn Iterator<Item = usize>| {
        ks.map(|k| p.arrivals[k]).fold(f64::NEG_INFINITY, f64::max)
    };
    if p.active.is_empty() {
        return Ok(Lemma1Outcome::NothingPending {
            delay: latest(&mut (0..p.arrivals.len())),
        });
    }
    if !(p.bound > 0.0) {
        return Err(SolverError::InvalidBracket { bound: p.bound });
    }
    let fmax = p.server;
    let upper = p.bound.min(fmax);
    let (lo, hi) = newton_bracketed(|x| (p.q(x) - fmax, p.q_slope(x)), 0.0, upper, 1e-16, 300);
    // Prefer the side whose share sum is closer to the budget.
    let root = if (p.q(lo) - fmax).abs() <= (p.q(hi) - fmax).abs() { lo } else { hi };
    if !(root > 0.0) {
        return Err(SolverError::NonConvergence("equal-delay root"));
    }
    let server = p.allocation_at(root);
    let common = p.common_delay(root);
    let idle_latest = latest(&mut (0..p.arrivals.len()).filter(|&k| p.residuals[k] == 0.0));
    let active_latest = p
        .active
        .iter()
        .map(|&k| p.arrivals[k] + p.residuals[k] / server[k])
        .fold(common, f64::max);
    Ok(Lemma1Outcome::Allocated {
        server,
        root,
        delay: active_latest.max(idle_latest),
    })
}

/// Arrival delays and residual workloads of `cuts` under `bandwidth`.
pub fn arrivals_and_residuals(net: &NetworkInstance, cuts: &[usize], bandwidth: &[f64]) -> (Vec<f64>, Vec<f64>) {
    net.devices
        .iter()
        .zip(cuts)
        .zip(bandwidth)
        .map(|((d, &l), &b)| (d.arrival_or_inf(l, b), d.residual(l) as f64))
        .unzip()
}

pub(crate) fn initial_cuts(net: &NetworkInstance, init: CutInit) -> Vec<usize> {
    match init {
        CutInit::MinData => net.devices.iter().map(|d| d.profile().min_payload_cut()).collect(),
        CutInit::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            net.devices
                .iter()
                .map(|d| (rng.next_u64() % (d.modules() as u64 + 1)) as usize)
                .collect()
        }
    }
}

/// Per-device cut minimizing `J_{k,l}` for fixed bandwidth and server share
/// (smallest index on ties).
pub fn reselect_cuts(net: &NetworkInstance, bandwidth: &[f64], server: &[f64]) -> Vec<usize> {
    net.devices
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let mut best = (f64::INFINITY, 0usize);
            for l in d.profile().cuts() {
                let j = parallel_delay_or_inf(d, l, bandwidth[k], server[k]);
                if j < best.0 {
                    best = (j, l);
                }
            }
            best.1
        })
        .collect()
}

/// Per-device cut update that accounts for the server split.
///
/// Sweeps the devices once in index order; device `k` takes the cut that
/// minimizes the slowest-device delay when the server is re-split with the
/// equal-delay rule for the candidate cut vector (bandwidth fixed). Unlike
/// [`reselect_cuts`] this sees that finishing one device locally frees server
/// compute for the others. Equal maxima (the slowest device is another one)
/// are broken by the device's own delay, then by the smaller cut, so a
/// device not on the critical path still moves to its fastest cut and frees
/// bandwidth for the next resource solve.
pub fn reselect_cuts_resplit(net: &NetworkInstance, cuts: &[usize], bandwidth: &[f64]) -> Vec<usize> {
    let mut cuts = cuts.to_vec();
    let (mut arrivals, mut residuals) = arrivals_and_residuals(net, &cuts, bandwidth);
    for (k, d) in net.devices.iter().enumerate() {
        let mut best = ((f64::INFINITY, f64::INFINITY), cuts[k]);
        for l in d.profile().cuts() {
            arrivals[k] = d.arrival_or_inf(l, bandwidth[k]);
            residuals[k] = d.residual(l) as f64;
            let score = EqualDelayProblem::new(&arrivals, &residuals, net.server_compute)
                .and_then(|p| lemma1_allocate(&p))
                .map_or((f64::INFINITY, f64::INFINITY), |o| {
                    let share = o.server(net.len())[k];
                    let own = if residuals[k] > 0.0 {
                        arrivals[k] + residuals[k] / share
                    } else {
                        arrivals[k]
                    };
                    (o.delay(), own)
                });
            if score.0 < best.0 .0 || (score.0 == best.0 .0 && score.1 < best.0 .1) {
                best = (score, l);
            }
        }
        cuts[k] = best.1;
        arrivals[k] = d.arrival_or_inf(best.1, bandwidth[k]);
        residuals[k] = d.residual(best.1) as f64;
    }
    cuts
}

fn parallel_delay_or_inf(d: &Device, cut: usize, bandwidth: f64, server: f64) -> f64 {
    let residual = d.residual(cut);
    let tail = if residual == 0 {
        0.0
    } else if server > 0.0 {
        residual as f64 / server
    } else {
        f64::INFINITY
    };
    d.arrival_or_inf(cut, bandwidth) + tail
}

/// Builds a parallel plan from cuts, bandwidth and server shares.
fn parallel_plan(
    policy: Policy,
    net: &NetworkInstance,
    cuts: Vec<usize>,
    bandwidth: Vec<f64>,
    server: Vec<f64>,
) -> AllocationPlan {
    let (arrivals, residuals) = arrivals_and_residuals(net, &cuts, &bandwidth);
    let delays: Vec<f64> = net
        .devices
        .iter()
        .enumerate()
        .map(|(k, d)| parallel_delay_or_inf(d, cuts[k], bandwidth[k], server[k]))
        .collect();
    let objective = delays.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    AllocationPlan {
        policy,
        cuts,
        bandwidth,
        server_compute: server,
        arrivals,
        residuals,
        delays,
        objective,
        iterations: 0,
        history: Vec::new(),
    }
}

/// Equal bandwidth plus the equal-delay compute split for fixed cuts.
pub fn fixed_bandwidth_resources(net: &NetworkInstance, cuts: &[usize]) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let bandwidth = net.equal_bandwidth();
    let (arrivals, residuals) = arrivals_and_residuals(net, cuts, &bandwidth);
    if arrivals.iter().any(|c| !c.is_finite()) {
        return Err(SolverError::Infeasible("a device cannot transmit with an equal bandwidth share".into()));
    }
    let problem = EqualDelayProblem::new(&arrivals, &residuals, net.server_compute)?;
    let outcome = lemma1_allocate(&problem)?;
    Ok((bandwidth, outcome.server(net.len())))
}

/// Alternates the equal-delay compute split (bandwidth fixed at
/// `B_tot / K`) with per-device cut re-selection.
pub fn solve_p2(net: &NetworkInstance, settings: &SolverSettings) -> Result<AllocationPlan, SolverError> {
    settings.validate()?;
    alternate(Policy::P2, net, settings, initial_cuts(net, settings.cut_init), CutStep::HoldShares, |net, cuts| {
        fixed_bandwidth_resources(net, cuts)
    })
}

/// Alternates the joint bandwidth / compute subproblem with per-device cut
/// re-selection.
///
/// The alternation is a local search, so it is started from several cut
/// vectors and the best plan is kept: the configured initial cuts, the
/// min-data cuts, the cuts P2 settles on, raw-input transmission and fully
/// local processing. The joint subproblem never does worse than the equal
/// bandwidth split, so the result is never worse than P2, min-data or
/// first-layer. A budgeted polish of single-device moves follows.
pub fn solve_p1(net: &NetworkInstance, settings: &SolverSettings) -> Result<AllocationPlan, SolverError> {
    settings.validate()?;
    let joint = |net: &NetworkInstance, cuts: &[usize]| joint_resources(net, cuts, settings);
    let first = initial_cuts(net, settings.cut_init);
    let mut best = alternate(Policy::P1, net, settings, first.clone(), CutStep::Resplit, joint)?;
    // Raw-input and min-data starts make P1 never worse than the
    // first-layer and min-data baselines, whose first round it reproduces.
    let mut starts = vec![initial_cuts(net, CutInit::MinData)];
    if let Ok(p2) = solve_p2(net, settings) {
        starts.push(p2.cuts);
    }
    starts.push(vec![0; net.len()]);
    starts.push(net.devices.iter().map(|d| d.modules()).collect());
    let mut seen = vec![first];
    for cuts in starts {
        if seen.contains(&cuts) {
            continue;
        }
        seen.push(cuts.clone());
        let plan = alternate(Policy::P1, net, settings, cuts, CutStep::Resplit, joint)?;
        if plan.objective < best.objective {
            best = plan;
        }
    }
    polish(net, settings, best, joint)
}

/// Improves a P1 plan by moving one device's cut at a time.
///
/// The alternation scores cut changes with the bandwidth held fixed, which
/// misses moves that only pay off once bandwidth is re-split. Here every
/// single-device move is ranked by that cheap score and the most promising
/// ones are re-solved with the joint subproblem; the first strict improvement
/// is taken and the ranking restarts. At most `polish_per_device` joint solves
/// per device are spent.
fn polish<R>(net: &NetworkInstance, settings: &SolverSettings, mut best: AllocationPlan, mut resources: R) -> Result<AllocationPlan, SolverError>
where
    R: FnMut(&NetworkInstance, &[usize]) -> Result<(Vec<f64>, Vec<f64>), SolverError>,
{
    let mut budget = settings.polish_per_device * net.len();
    let mut tried: Vec<Vec<usize>> = vec![best.cuts.clone()];
    while budget > 0 {
        let (mut arrivals, mut residuals) = arrivals_and_residuals(net, &best.cuts, &best.bandwidth);
        let mut moves: Vec<(f64, Vec<usize>)> = Vec::new();
        for (k, d) in net.devices.iter().enumerate() {
            let (keep_c, keep_f) = (arrivals[k], residuals[k]);
            for l in d.profile().cuts() {
                let mut cuts = best.cuts.clone();
                cuts[k] = l;
                if tried.contains(&cuts) {
                    continue;
                }
                arrivals[k] = d.arrival_or_inf(l, best.bandwidth[k]);
                residuals[k] = d.residual(l) as f64;
                let score = EqualDelayProblem::new(&arrivals, &residuals, net.server_compute)
                    .and_then(|p| lemma1_allocate(&p))
                    .map_or(f64::INFINITY, |o| o.delay());
                moves.push((score, cuts));
            }
            arrivals[k] = keep_c;
            residuals[k] = keep_f;
        }
        // Stable sort keeps device-then-cut order among equal scores.
        moves.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut improved = false;
        for (_, cuts) in moves {
            if budget == 0 {
                break;
            }
            budget -= 1;
            tried.push(cuts.clone());
            let Ok((bandwidth, server)) = resources(net, &cuts) else { continue };
            let plan = parallel_plan(Policy::P1, net, cuts, bandwidth, server);
            if plan.objective < best.objective && !settings.stalled(best.objective, plan.objective) {
                let mut plan = plan;
                plan.iterations = best.iterations + 1;
                plan.history = best.history.clone();
                plan.history.push(plan.objective);
                best = plan;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(best)
}

/// Smallest-payload cut per device, then one joint resource solve.
pub fn min_data_layer_policy(net: &NetworkInstance, settings: &SolverSettings) -> Result<AllocationPlan, SolverError> {
    settings.validate()?;
    let cuts = initial_cuts(net, CutInit::MinData);
    alternate(Policy::MinData, net, settings, cuts, CutStep::Fixed, |net, cuts| joint_resources(net, cuts, settings))
}

/// Raw-input transmission for every device, then one joint resource solve.
pub fn first_layer_policy(net: &NetworkInstance, settings: &SolverSettings) -> Result<AllocationPlan, SolverError> {
    settings.validate()?;
    let cuts = vec![0; net.len()];
    alternate(Policy::FirstLayer, net, settings, cuts, CutStep::Fixed, |net, cuts| joint_resources(net, cuts, settings))
}

/// Cut update between two resource solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CutStep {
    /// Keep the cuts: one resource solve only.
    Fixed,
    /// [`reselect_cuts`]: each device's own delay with its server share held.
    HoldShares,
    /// [`reselect_cuts_resplit`]: the max delay with the server re-split.
    Resplit,
}

fn alternate<R>(
    policy: Policy,
    net: &NetworkInstance,
    settings: &SolverSettings,
    mut cuts: Vec<usize>,
    step: CutStep,
    mut resources: R,
) -> Result<AllocationPlan, SolverError>
where
    R: FnMut(&NetworkInstance, &[usize]) -> Result<(Vec<f64>, Vec<f64>), SolverError>,
{
    let rounds = if step == CutStep::Fixed { 1 } else { settings.max_iterations };
    let mut best: Option<AllocationPlan> = None;
    let mut history = Vec::with_capacity(rounds);
    let mut iterations = 0;
    for _ in 0..rounds {
        iterations += 1;
        let (bandwidth, server) = resources(net, &cuts)?;
        let plan = parallel_plan(policy, net, cuts.clone(), bandwidth, server);
        let prev = best.as_ref().map_or(f64::INFINITY, |b| b.objective);
        let improved = plan.objective < prev;
        if improved {
            best = Some(plan);
        }
        let current = best.as_ref().expect("first round always stores a plan");
        history.push(current.objective);
        if !improved || settings.stalled(prev, current.objective) {
            break;
        }
        let next = match step {
            CutStep::Fixed => break,
            CutStep::HoldShares => reselect_cuts(net, &current.bandwidth, &current.server_compute),
            CutStep::Resplit => reselect_cuts_resplit(net, &current.cuts, &current.bandwidth),
        };
        if next == cuts {
            break;
        }
        cuts = next;
    }
    let mut plan = best.expect("at least one round");
    plan.iterations = iterations;
    plan.history = history;
    Ok(plan)
}

/// Per-device constants of the joint subproblem at fixed cuts.
struct JointTerm {
    local: f64,
    bits: f64,
    residual: f64,
    snr: f64,
}

impl JointTerm {
    fn rate(&self, b: f64) -> f64 {
        rate_from_snr(b, self.snr)
    }

    /// Slack left for server processing at target `t` with bandwidth `b`.
    fn slack(&self, t: f64, b: f64) -> f64 {
        let tx = if self.bits > 0.0 { self.bits / self.rate(b) } else { 0.0 };
        t - self.local - tx
    }

    /// Server share needed to finish by `t` with bandwidth `b`.
    fn compute_needed(&self, t: f64, b: f64) -> f64 {
        let s = self.slack(t, b);
        if s > 0.0 {
            self.residual / s
        } else {
            f64::INFINITY
        }
    }

    /// `-d compute_needed / d b`.
    fn marginal(&self, t: f64, b: f64) -> f64 {
        let s = self.slack(t, b);
        if s <= 0.0 {
            return f64::INFINITY;
        }
        let r = self.rate(b);
        self.residual * self.bits * rate_slope(b, self.snr) / (r * r * s * s)
    }

    /// Bandwidth needed to deliver the payload by `t` (no server work).
    fn bandwidth_floor(&self, t: f64) -> Result<f64, ChannelError> {
        let budget = t - self.local;
        if self.bits == 0.0 {
            return Ok(0.0);
        }
        if budget <= 0.0 {
            return Err(ChannelError::Domain("no transmission time left".into()));
        }
        bandwidth_for_rate_snr(self.snr, self.bits / budget)
    }
}

/// Outcome of the inner problem `min sum f_k(B_k)` subject to `sum B_k = B_tot`.
struct InnerSplit {
    bandwidth: Vec<f64>,
    compute: f64,
}

fn inner_split(terms: &[JointTerm], t: f64, spectrum: f64, tol: f64) -> Option<InnerSplit> {
    let mut floors = Vec::with_capacity(terms.len());
    for term in terms {
        floors.push(term.bandwidth_floor(t).ok()?);
    }
    let floor_sum: f64 = floors.iter().sum();
    if floor_sum >= spectrum {
        return None;
    }
    let pending: Vec<usize> = (0..terms.len()).filter(|&k| terms[k].residual > 0.0).collect();
    let mut bandwidth = floors.clone();
    if pending.is_empty() {
        return Some(InnerSplit { bandwidth, compute: 0.0 });
    }
    let free = spectrum - floor_sum + pending.iter().map(|&k| floors[k]).sum::<f64>();

    // Bandwidth of device k at multiplier lambda: marginal(B) = lambda.
    // Near the floor the marginal behaves like (B - floor)^-2 and far from
    // it like a power of B, so in x = ln(B - floor) the log-marginal is
    // close to linear and regula falsi converges in a handful of steps.
    let at = |k: usize, lambda: f64| -> f64 {
        let term = &terms[k];
        let lo = floors[k];
        if term.marginal(t, free) >= lambda {
            return free;
        }
        let span = free - lo;
        let ln_lambda = lambda.ln();
        let (_, hi) = illinois_increasing(
            |x| ln_lambda - term.marginal(t, lo + x.exp()).ln(),
            span.ln() - 200.0,
            span.ln(),
            tol * 1e-2,
            200,
        );
        (lo + hi.exp()).min(free)
    };
    let total = |lambda: f64| pending.iter().map(|&k| at(k, lambda)).sum::<f64>();

    // The bandwidth sum falls with lambda roughly as a power law: bracket,
    // then solve ln(free) = ln(total) in ln(lambda).
    let mut lam_hi = pending
        .iter()
        .map(|&k| terms[k].marginal(t, free / pending.len() as f64))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut guard = 0;
    while total(lam_hi) > free {
        lam_hi *= 16.0;
        guard += 1;
        if guard > 200 {
            return None;
        }
    }
    let mut lam_lo = lam_hi;
    guard = 0;
    while total(lam_lo) < free {
        lam_lo /= 16.0;
        guard += 1;
        if guard > 200 {
            break;
        }
    }
    let ln_free = free.ln();
    let (lo, hi) = illinois_increasing(|z| ln_free - total(z.exp()).ln(), lam_lo.ln(), lam_hi.ln(), 1e-14, 200);
    let lambda = (0.5 * (lo + hi)).exp();
    let mut shares: Vec<f64> = pending.iter().map(|&k| at(k, lambda)).collect();
    let sum: f64 = shares.iter().sum();
    if sum > 0.0 {
        for s in &mut shares {
            *s *= free / sum;
        }
    }
    let mut compute = 0.0;
    for (&k, &b) in pending.iter().zip(&shares) {
        bandwidth[k] = b;
        compute += terms[k].compute_needed(t, b);
    }
    Some(InnerSplit { bandwidth, compute })
}

/// Min-max bandwidth and server split for fixed cuts.
///
/// Bisects on the common target delay `T`. `T` is feasible when the
/// cheapest bandwidth split meeting it needs at most `f_max` of server
/// compute; that inner problem is separable and convex in each device's
/// bandwidth and is solved by bisection on the common marginal
/// `-d f_k / d B_k`. The equal-bandwidth split seeds the upper bound.
pub fn joint_resources(
    net: &NetworkInstance,
    cuts: &[usize],
    settings: &SolverSettings,
) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let terms: Vec<JointTerm> = net
        .devices
        .iter()
        .zip(cuts)
        .map(|(d, &l)| JointTerm {
            local: d.local_time(l),
            bits: d.payload_bits(l) as f64,
            residual: d.residual(l) as f64,
            snr: d.snr_bandwidth(),
        })
        .collect();
    let fmax = net.server_compute;
    let spectrum = net.spectrum;

    let fallback = fixed_bandwidth_resources(net, cuts).ok();
    let upper = fallback.as_ref().map(|(b, f)| {
        parallel_plan(Policy::P1, net, cuts.to_vec(), b.clone(), f.clone()).objective
    });
    let lower = terms
        .iter()
        .map(|t| {
            let tx = if t.bits > 0.0 { t.bits / t.rate(spectrum) } else { 0.0 };
            t.local + tx + t.residual / fmax
        })
        .fold(0.0, f64::max);

    let feasible = |t: f64| inner_split(&terms, t, spectrum, settings.tolerance).filter(|s| s.compute <= fmax);
    let mut hi = match upper {
        Some(u) if u.is_finite() => u,
        _ => {
            let mut t = lower.max(f64::MIN_POSITIVE) * 2.0;
            let mut tries = 0;
            while feasible(t).is_none() {
                t *= 2.0;
                tries += 1;
                if tries > 200 {
                    return Err(SolverError::Infeasible("no finite delay target is reachable".into()));
                }
            }
            t
        }
    };
    if feasible(hi).is_none() {
        // The equal split is feasible by construction; nudge past rounding.
        hi *= 1.0 + 1e-12;
    }
    // Needed compute blows up at the infeasible edge, so its reciprocal is
    // close to linear in T and continuous through that edge.
    let (_, t_star) = illinois_increasing(
        |t| match inner_split(&terms, t, spectrum, settings.tolerance) {
            Some(s) if s.compute > 0.0 => fmax / s.compute - 1.0,
            Some(_) => f64::INFINITY,
            None => -1.0,
        },
        lower,
        hi,
        settings.tolerance,
        200,
    );
    let Some(split) = feasible(t_star) else {
        return fallback.ok_or(SolverError::NonConvergence("joint resource bisection"));
    };

    let mut bandwidth = split.bandwidth;
    let sum_b: f64 = bandwidth.iter().sum();
    let spare = spectrum - sum_b;
    if spare > 0.0 {
        // Floors of finished devices can leave slack; give it to pending ones.
        let pending: Vec<usize> = (0..terms.len()).filter(|&k| terms[k].residual > 0.0).collect();
        let targets = if pending.is_empty() { (0..terms.len()).collect() } else { pending };
        let share = spare / targets.len() as f64;
        for k in targets {
            bandwidth[k] += share;
        }
    }
    let mut server: Vec<f64> = terms
        .iter()
        .zip(&bandwidth)
        .map(|(t, &b)| if t.residual > 0.0 { t.compute_needed(t_star, b) } else { 0.0 })
        .collect();
    let sum_f: f64 = server.iter().sum();
    if sum_f > 0.0 {
        for f in &mut server {
            *f *= fmax / sum_f;
        }
    }
    let candidate = parallel_plan(Policy::P1, net, cuts.to_vec(), bandwidth.clone(), server.clone());
    match (fallback, upper) {
        (Some(fb), Some(u)) if candidate.objective > u => Ok(fb),
        _ => Ok((bandwidth, server)),
    }
}
