//! Serial server processing: the server runs one job at a time at full
//! speed, in order of arrival.
//!
//! * [`solve_p3`] shapes bandwidth so that every payload arrives at the same
//!   time and minimizes `max C + sum F / f_max`.
//! * [`queue_heuristic`] starts from an equal bandwidth split and repeatedly
//!   moves bandwidth from the device that ends the first sub-queue to the
//!   device that opens the last one ([`reallocate_once`]), which removes the
//!   first break without delaying anything else.
//! * [`queue_first_layer_policy`] sends raw inputs with simultaneous-arrival
//!   bandwidth.

use thiserror::Error;

use crate::channel::{bandwidth_for_rate_snr, rate_from_snr};
use crate::delay::{serial_total, Device, NetworkInstance, QueueState};
use crate::parallel::{arrivals_and_residuals, initial_cuts};
use crate::plan::{AllocationPlan, P3LayerRule, Policy, SolverError, SolverSettings};
use crate::roots::bisect_increasing;

/// Relative gap below which an arrival after an idle server is not counted
/// as a break by the heuristic. Bandwidth inversion rounds towards the
/// faster side, so a removed break can leave a gap of a few ulps.
pub const BREAK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReallocError {
    #[error("reallocation needs at least two breaks, found {0}")]
    TooFewBreaks(usize),
    #[error("no donor can absorb the delay of the first break")]
    StalledBreak,
    #[error("the donor has no excess bandwidth")]
    NoExcess,
}

/// One bandwidth move of the break-elimination heuristic.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakReallocation {
    /// Queue position and device index of the donor (tail of a sub-queue).
    pub donor_position: usize,
    pub donor: usize,
    /// Queue position and device index of the receiver (head of the last
    /// sub-queue).
    pub receiver_position: usize,
    pub receiver: usize,
    /// Arrival the donor is slowed down to.
    pub target_arrival: f64,
    /// Donor bandwidth after the move.
    pub donor_bandwidth: f64,
    /// Bandwidth moved from donor to receiver.
    pub transferred: f64,
}

/// Break positions whose idle gap exceeds `rel_tol` of the arrival time.
pub fn significant_breaks(q: &QueueState, rel_tol: f64) -> Vec<usize> {
    q.breaks
        .iter()
        .copied()
        .filter(|&p| q.arrivals[p] - q.completions[p - 1] > rel_tol * q.arrivals[p].abs())
        .collect()
}

fn arrivals_residuals(net: &NetworkInstance, cuts: &[usize], bandwidth: &[f64]) -> (Vec<f64>, Vec<f64>) {
    crate::parallel::arrivals_and_residuals(net, cuts, bandwidth)
}

/// Queue of the pending jobs of a plan.
pub fn queue_of(net: &NetworkInstance, cuts: &[usize], bandwidth: &[f64]) -> QueueState {
    let (c, f) = arrivals_residuals(net, cuts, bandwidth);
    QueueState::of_pending(&c, &f, net.server_compute)
}

/// Moves bandwidth from the tail of the first sub-queue to the head of the
/// last one.
///
/// The donor is slowed down until it finishes exactly when the next
/// sub-queue starts, `C' = C_next_head - F_donor / f_max`; that closes the
/// break without changing any completion after it. The freed bandwidth goes
/// to the receiver, whose earlier arrival can only shorten the queue. If the
/// first break cannot be closed, tails of later sub-queues (except the last)
/// are tried in order. Returns the move and the updated bandwidth vector.
pub fn reallocate_once(
    net: &NetworkInstance,
    cuts: &[usize],
    bandwidth: &[f64],
    queue: &QueueState,
) -> Result<(BreakReallocation, Vec<f64>), ReallocError> {
    let breaks = significant_breaks(queue, BREAK_TOLERANCE);
    if breaks.len() < 2 {
        return Err(ReallocError::TooFewBreaks(breaks.len()));
    }
    let receiver_position = *breaks.last().expect("two or more breaks");
    let receiver = queue.order[receiver_position];
    let mut saw_stall = false;
    for &head in &breaks[..breaks.len() - 1] {
        let donor_position = head - 1;
        let donor = queue.order[donor_position];
        let target = queue.arrivals[head] - queue.service(donor_position);
        let device = &net.devices[donor];
        let cut = cuts[donor];
        let bits = device.payload_bits(cut) as f64;
        let budget = target - device.local_time(cut);
        if bits <= 0.0 || !(budget > 0.0) {
            saw_stall = true;
            continue;
        }
        let Ok(new_bandwidth) = bandwidth_for_rate_snr(device.snr_bandwidth(), bits / budget) else {
            saw_stall = true;
            continue;
        };
        let transferred = bandwidth[donor] - new_bandwidth;
        if !(transferred > 0.0) {
            continue;
        }
        let mut updated = bandwidth.to_vec();
        updated[receiver] = bandwidth[donor] + bandwidth[receiver] - new_bandwidth;
        updated[donor] = new_bandwidth;
        let realloc = BreakReallocation {
            donor_position,
            donor,
            receiver_position,
            receiver,
            target_arrival: target,
            donor_bandwidth: new_bandwidth,
            transferred,
        };
        return Ok((realloc, updated));
    }
    Err(if saw_stall { ReallocError::StalledBreak } else { ReallocError::NoExcess })
}

/// Bandwidth that makes every payload arrive at the same, smallest possible
/// time for fixed cuts.
///
/// Bisects on the common arrival `T`: each device needs
/// `B_k(T) = Binv(bits_k / (T - local_k))` and `T` is feasible when the sum
/// fits in `B_tot`. Bandwidth left over at the feasible end is split evenly
/// among transmitting devices, and the last share absorbs rounding so the
/// total is exactly `B_tot`.
pub fn simultaneous_arrival_bandwidth(
    net: &NetworkInstance,
    cuts: &[usize],
    tolerance: f64,
) -> Result<Vec<f64>, SolverError> {
    let spectrum = net.spectrum;
    let senders: Vec<usize> = (0..net.len())
        .filter(|&k| net.devices[k].payload_bits(cuts[k]) > 0)
        .collect();
    if senders.is_empty() {
        return Ok(net.equal_bandwidth());
    }
    let floor = |d: &Device, cut: usize, t: f64| -> Option<f64> {
        let bits = d.payload_bits(cut) as f64;
        let budget = t - d.local_time(cut);
        if bits == 0.0 {
            return Some(0.0);
        }
        if !(budget > 0.0) {
            return None;
        }
        bandwidth_for_rate_snr(d.snr_bandwidth(), bits / budget).ok()
    };
    let demand = |t: f64| -> Option<f64> {
        let mut total = 0.0;
        for &k in &senders {
            total += floor(&net.devices[k], cuts[k], t)?;
        }
        Some(total)
    };
    let lower = senders
        .iter()
        .map(|&k| {
            let d = &net.devices[k];
            d.local_time(cuts[k]) + d.payload_bits(cuts[k]) as f64 / rate_from_snr(spectrum, d.snr_bandwidth())
        })
        .fold(0.0, f64::max);
    if !lower.is_finite() {
        return Err(SolverError::Infeasible("a device cannot transmit with the whole spectrum".into()));
    }
    let share = spectrum / senders.len() as f64;
    let mut upper = senders
        .iter()
        .map(|&k| net.devices[k].arrival_or_inf(cuts[k], share))
        .fold(lower, f64::max);
    let fits = |t: f64| demand(t).is_some_and(|b| b <= spectrum);
    let mut guard = 0;
    while !fits(upper) {
        upper = if upper.is_finite() { upper * 2.0 } else { lower * 2.0 };
        guard += 1;
        if guard > 200 {
            return Err(SolverError::Infeasible("no common arrival time fits the spectrum".into()));
        }
    }
    let (_, t) = bisect_increasing(|t| if fits(t) { 1.0 } else { -1.0 }, lower, upper, tolerance, 200);
    let mut bandwidth = vec![0.0; net.len()];
    for &k in &senders {
        bandwidth[k] = floor(&net.devices[k], cuts[k], t).expect("feasible end of the bracket");
    }
    let spare = (spectrum - bandwidth.iter().sum::<f64>()).max(0.0);
    for &k in &senders {
        bandwidth[k] += spare / senders.len() as f64;
    }
    conserve(&mut bandwidth, spectrum, *senders.last().expect("non-empty"));
    Ok(bandwidth)
}

/// Sets `bandwidth[slot]` so the vector sums to `total` as closely as
/// floating point allows.
pub(crate) fn conserve(bandwidth: &mut [f64], total: f64, slot: usize) {
    let others: f64 = bandwidth.iter().enumerate().filter(|&(k, _)| k != slot).map(|(_, b)| b).sum();
    bandwidth[slot] = (total - others).max(0.0);
}

/// Per-device cut re-selection for serial processing with bandwidth fixed.
///
/// `Exact` sweeps the devices once in index order and gives each the cut
/// minimizing `max(C_{k,l}, M_{-k}) + F_{k,l} / f_max`, where `M_{-k}` is the
/// latest arrival among the other devices (their server work is a constant).
/// `COnly` minimizes each device's own arrival. Ties go to the smaller cut.
pub fn reselect_serial_cuts(
    net: &NetworkInstance,
    cuts: &[usize],
    bandwidth: &[f64],
    rule: P3LayerRule,
) -> Vec<usize> {
    let fmax = net.server_compute;
    let mut cuts = cuts.to_vec();
    let mut arrivals: Vec<f64> = (0..net.len())
        .map(|k| net.devices[k].arrival_or_inf(cuts[k], bandwidth[k]))
        .collect();
    for k in 0..net.len() {
        let others = max_excluding(&arrivals, k);
        let d = &net.devices[k];
        let mut best = (f64::INFINITY, cuts[k]);
        for l in d.profile().cuts() {
            let c = d.arrival_or_inf(l, bandwidth[k]);
            let score = match rule {
                P3LayerRule::Exact => c.max(others) + d.residual(l) as f64 / fmax,
                P3LayerRule::COnly => c,
            };
            if score < best.0 {
                best = (score, l);
            }
        }
        cuts[k] = best.1;
        arrivals[k] = d.arrival_or_inf(best.1, bandwidth[k]);
    }
    cuts
}

/// `max C + sum F / f_max`, the simultaneous-arrival objective.
pub fn simultaneous_objective(arrivals: &[f64], residuals: &[f64], server_compute: f64) -> f64 {
    let latest = arrivals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    latest + residuals.iter().sum::<f64>() / server_compute
}

/// Plan for serial processing; delays are exact queue completions.
/// Largest entry of `values` other than `values[skip]`, in one pass.
fn max_excluding(values: &[f64], skip: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for (j, &v) in values.iter().enumerate() {
        if j != skip && v > best {
            best = v;
        }
    }
    best
}

fn serial_plan(
    policy: Policy,
    net: &NetworkInstance,
    cuts: Vec<usize>,
    bandwidth: Vec<f64>,
    objective: impl Fn(&[f64], &[f64], f64) -> f64,
) -> AllocationPlan {
    let (arrivals, residuals) = arrivals_residuals(net, &cuts, &bandwidth);
    let fmax = net.server_compute;
    let queue = QueueState::of_pending(&arrivals, &residuals, fmax);
    let mut delays = arrivals.clone();
    for (p, &k) in queue.order.iter().enumerate() {
        delays[k] = queue.completions[p];
    }
    let server_compute = residuals.iter().map(|&f| if f > 0.0 { fmax } else { 0.0 }).collect();
    AllocationPlan {
        policy,
        objective: objective(&arrivals, &residuals, fmax),
        cuts,
        bandwidth,
        server_compute,
        arrivals,
        residuals,
        delays,
        iterations: 0,
        history: Vec::new(),
    }
}

/// Runs `local_search` from the configured initial cuts and from raw-input
/// transmission and keeps the better plan. Coordinate-wise cut re-selection
/// cannot move all devices to cut 0 at once, so the second start makes the
/// policy search a superset of its first-layer baseline.
fn best_of_starts<S>(net: &NetworkInstance, settings: &SolverSettings, mut local_search: S) -> Result<AllocationPlan, SolverError>
where
    S: FnMut(Vec<usize>) -> Result<AllocationPlan, SolverError>,
{
    let first = initial_cuts(net, settings.cut_init);
    let zeros = vec![0; net.len()];
    let mut best = local_search(first.clone())?;
    if first != zeros {
        let other = local_search(zeros)?;
        if other.objective < best.objective {
            best = other;
        }
    }
    Ok(best)
}

/// Alternates simultaneous-arrival bandwidth shaping with cut re-selection;
/// reports `max C + sum F / f_max`.
pub fn solve_p3(net: &NetworkInstance, settings: &SolverSettings) -> Result<AllocationPlan, SolverError> {
    settings.validate()?;
    let best = best_of_starts(net, settings, |cuts| p3_from(net, settings, cuts))?;
    polish_p3(net, settings, best)
}

/// Single-device cut moves on a settled P3 plan, ranked by the objective
/// with bandwidth held and re-solved with a fresh simultaneous-arrival
/// split; first strict improvement wins, at most `polish_per_device` re-solves per device.
fn polish_p3(net: &NetworkInstance, settings: &SolverSettings, mut best: AllocationPlan) -> Result<AllocationPlan, SolverError> {
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
                moves.push((simultaneous_objective(&arrivals, &residuals, net.server_compute), cuts));
            }
            arrivals[k] = keep_c;
            residuals[k] = keep_f;
        }
        moves.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut improved = false;
        for (_, cuts) in moves {
            if budget == 0 {
                break;
            }
            budget -= 1;
            tried.push(cuts.clone());
            let Ok(bandwidth) = simultaneous_arrival_bandwidth(net, &cuts, settings.tolerance) else { continue };
            let plan = serial_plan(Policy::P3, net, cuts, bandwidth, simultaneous_objective);
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

fn p3_from(net: &NetworkInstance, settings: &SolverSettings, mut cuts: Vec<usize>) -> Result<AllocationPlan, SolverError> {
    let mut best: Option<AllocationPlan> = None;
    let mut history = Vec::new();
    let mut iterations = 0;
    for _ in 0..settings.max_iterations {
        iterations += 1;
        let bandwidth = simultaneous_arrival_bandwidth(net, &cuts, settings.tolerance)?;
        let plan = serial_plan(Policy::P3, net, cuts.clone(), bandwidth, simultaneous_objective);
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
        let next = reselect_serial_cuts(net, &current.cuts, &current.bandwidth, settings.p3_layer_rule);
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

/// Break-elimination loop for fixed cuts, starting from `bandwidth`.
///
/// Runs [`reallocate_once`] while more than two breaks remain (more than one
/// with `strict_breaks`). Stops early when no donor can move bandwidth or
/// after `4 K` moves. Returns the final bandwidth and the number of moves.
pub fn eliminate_breaks(
    net: &NetworkInstance,
    cuts: &[usize],
    mut bandwidth: Vec<f64>,
    strict_breaks: bool,
) -> (Vec<f64>, usize) {
    let keep = if strict_breaks { 1 } else { 2 };
    let mut moves = 0;
    while moves < 4 * net.len() {
        let queue = queue_of(net, cuts, &bandwidth);
        if significant_breaks(&queue, BREAK_TOLERANCE).len() <= keep {
            break;
        }
        match reallocate_once(net, cuts, &bandwidth, &queue) {
            Ok((_, next)) => bandwidth = next,
            Err(_) => break,
        }
        moves += 1;
    }
    (bandwidth, moves)
}

/// Alternating heuristic for serial processing: equal bandwidth, break
/// elimination, cut re-selection; keeps the plan with the smallest exact
/// queue completion. `settings.heuristic_iterations` is the outer iteration
/// count.
pub fn queue_heuristic(net: &NetworkInstance, settings: &SolverSettings) -> Result<AllocationPlan, SolverError> {
    settings.validate()?;
    best_of_starts(net, settings, |cuts| heuristic_from(net, settings, cuts))
}

fn heuristic_from(net: &NetworkInstance, settings: &SolverSettings, mut cuts: Vec<usize>) -> Result<AllocationPlan, SolverError> {
    let mut best: Option<AllocationPlan> = None;
    let mut history = Vec::new();
    let mut iterations = 0;
    for _ in 0..settings.heuristic_iterations {
        iterations += 1;
        let (bandwidth, _) = eliminate_breaks(net, &cuts, net.equal_bandwidth(), settings.strict_breaks);
        let plan = serial_plan(Policy::QueueHeuristic, net, cuts.clone(), bandwidth, serial_total);
        if best.as_ref().is_none_or(|b| plan.objective < b.objective) {
            best = Some(plan);
        }
        let current = best.as_ref().expect("stored above");
        history.push(current.objective);
        let next = reselect_serial_cuts(net, &cuts, &current.bandwidth, settings.p3_layer_rule);
        if next == cuts {
            break;
        }
        cuts = next;
    }
    let mut plan = best.expect("at least one round");
    if !plan.objective.is_finite() {
        return Err(SolverError::Infeasible("no finite queue completion".into()));
    }
    plan.iterations = iterations;
    plan.history = history;
    Ok(plan)
}

/// Raw-input transmission, simultaneous-arrival bandwidth, exact queue.
pub fn queue_first_layer_policy(net: &NetworkInstance, settings: &SolverSettings) -> Result<AllocationPlan, SolverError> {
    settings.validate()?;
    let cuts = vec![0; net.len()];
    let bandwidth = simultaneous_arrival_bandwidth(net, &cuts, settings.tolerance)?;
    let mut plan = serial_plan(Policy::QueueFirstLayer, net, cuts, bandwidth, serial_total);
    plan.iterations = 1;
    plan.history = vec![plan.objective];
    Ok(plan)
}

/// The three queue transformations used to show that an `(M, 𝓜)`-broken
/// queue with `M >= 3` can always be improved.
///
/// Every variant first closes the first break by delaying the tail of the
/// first sub-queue (`C' = C_first_break - F_tail / f_max`) and then moves
/// the head of the last sub-queue earlier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma2Variant {
    /// The last break disappears: `𝓜₁ = 𝓜 \ {min, max}`.
    MergeLast,
    /// The last break moves one position later: `𝓜₂ = 𝓜 \ {min, max} ∪ {max+1}`.
    ShiftLast,
    /// A new break appears after the last one: `𝓜₃ = 𝓜 \ {min} ∪ {max+1}`.
    SplitLast,
}

impl Lemma2Variant {
    pub const ALL: [Lemma2Variant; 3] = [Lemma2Variant::MergeLast, Lemma2Variant::ShiftLast, Lemma2Variant::SplitLast];

    /// Break set the transformed queue must have.
    ///
    /// Delaying the tail of the first sub-queue closes the first break but
    /// opens one at the tail's own position, since the tail now arrives
    /// after its predecessor finished. That extra break is absent only when
    /// the tail is the queue head (position 0).
    ///
    /// The set covers positions up to `max + 1` only: once the last head
    /// arrives earlier, jobs further back in its old sub-queue can start
    /// to find the server idle and open further breaks.
    pub fn expected_breaks(self, breaks: &[usize]) -> Vec<usize> {
        let (first, last) = (breaks[0], breaks[breaks.len() - 1]);
        let mut out: Vec<usize> = Vec::with_capacity(breaks.len() + 1);
        if first > 1 {
            out.push(first - 1);
        }
        out.extend(breaks.iter().copied().filter(|&p| p != first));
        match self {
            Lemma2Variant::MergeLast => out.retain(|&p| p != last),
            Lemma2Variant::ShiftLast => {
                out.retain(|&p| p != last);
                out.push(last + 1);
            }
            Lemma2Variant::SplitLast => out.push(last + 1),
        }
        out
    }
}

/// Builds the transformed arrival vector of `variant` for an
/// arrival-sorted queue, or `None` when the queue's shape does not admit it.
///
/// `theta` in `(0, 1)` picks the new arrival of the last head inside the
/// admissible interval.
pub fn lemma2_transform(q: &QueueState, variant: Lemma2Variant, theta: f64) -> Option<Vec<f64>> {
    if q.breaks.len() < 2 || !(theta > 0.0 && theta < 1.0) {
        return None;
    }
    let (first, last) = (q.breaks[0], q.breaks[q.breaks.len() - 1]);
    let mut c = q.arrivals.clone();
    // Close the first break; nudge up so rounding cannot leave a gap.
    let tail = first - 1;
    let mut delayed = c[first] - q.service(tail);
    while delayed + q.service(tail) < c[first] {
        delayed = delayed.next_up();
    }
    c[tail] = delayed.max(c[tail]);

    let s = q.service(last);
    let before = q.completions[last - 1];
    let interp = |lo: f64, hi: f64| lo + theta * (hi - lo);
    match variant {
        Lemma2Variant::MergeLast => {
            // Arrive while the previous job is still running; the next
            // arrival must then not open a new break.
            if last + 1 < q.len() && q.arrivals[last + 1] > before + s {
                return None;
            }
            c[last] = interp(c[last - 1], before);
        }
        Lemma2Variant::ShiftLast => {
            let next = *q.arrivals.get(last + 1)?;
            if !(next > before + s) {
                return None;
            }
            c[last] = interp(c[last - 1], before);
        }
        Lemma2Variant::SplitLast => {
            let next = *q.arrivals.get(last + 1)?;
            let hi = next - s;
            if !(hi > before) {
                return None;
            }
            c[last] = interp(before, hi);
            if !(c[last] > before) || !(c[last] + s < next) {
                return None;
            }
        }
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::queue_completions;

    #[test]
    fn donor_target_example() {
        // C = [1, 3, 4, 8], unit services: breaks at positions 1 and 3.
        let q = QueueState::new(&[1.0, 3.0, 4.0, 8.0], &[1.0; 4], 1.0);
        assert_eq!(q.breaks, vec![1, 3]);
        let tail = q.breaks[0] - 1;
        assert_eq!(tail, 0);
        assert_eq!(q.arrivals[q.breaks[0]] - q.service(tail), 2.0);
    }

    #[test]
    fn lemma2_variants_on_hand_queues() {
        // Sub-queues [1], [3, 4], [8] and [1], [3, 4], [8, 8.5], unit services.
        let mut exercised = Vec::new();
        for c in [vec![1.0, 3.0, 4.0, 8.0], vec![1.0, 3.0, 4.0, 8.0, 8.5]] {
            let f = vec![1.0; c.len()];
            let q = QueueState::new(&c, &f, 1.0);
            assert_eq!(q.breaks, vec![1, 3]);
            for v in Lemma2Variant::ALL {
                let Some(t) = lemma2_transform(&q, v, 0.5) else { continue };
                let (i, breaks) = queue_completions(&t, &f, 1.0);
                assert!(*i.last().unwrap() < q.total(), "{v:?}");
                let last = *q.breaks.last().unwrap();
                let head: Vec<usize> = breaks.into_iter().filter(|&p| p <= last + 1).collect();
                assert_eq!(head, v.expected_breaks(&q.breaks), "{v:?}");
                exercised.push(v);
            }
        }
        assert_eq!(exercised, [Lemma2Variant::MergeLast, Lemma2Variant::ShiftLast, Lemma2Variant::SplitLast]);
    }

    #[test]
    fn significant_breaks_ignore_rounding_gaps() {
        let q = QueueState::new(&[0.0, 1.0 + 1e-15, 5.0], &[1.0; 3], 1.0);
        assert_eq!(q.breaks, vec![1, 2]);
        assert_eq!(significant_breaks(&q, BREAK_TOLERANCE), vec![2]);
    }
}
