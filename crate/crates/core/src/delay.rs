//! Delay algebra shared by every policy: arrival delays, residual server
//! work, the parallel-processing delay and the serial queue recursion.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::arch::CutProfile;
use crate::channel::{rate_from_snr, ChannelError, LinkParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DelayError {
    #[error("device has {bits} bits to send but zero rate")]
    ZeroRate { bits: u64 },
    #[error("residual workload {residual} FLOP but no server compute allocated")]
    MissingServerCompute { residual: u64 },
    #[error("cut {cut} out of range 0..={modules}")]
    BadCut { cut: usize, modules: usize },
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// A device: its uplink, local compute (FLOP/s) and network profile.
#[derive(Debug, Clone)]
pub struct Device {
    link: LinkParams,
    snr_bandwidth: f64,
    compute: f64,
    profile: Arc<CutProfile>,
}

impl Device {
    pub fn new(link: LinkParams, compute: f64, profile: Arc<CutProfile>) -> Result<Self, DelayError> {
        link.validate()?;
        if !(compute > 0.0) {
            return Err(DelayError::InvalidNetwork(format!(
                "device compute must be positive, got {compute}"
            )));
        }
        Ok(Self {
            snr_bandwidth: link.snr_bandwidth(),
            link,
            compute,
            profile,
        })
    }

    pub fn link(&self) -> &LinkParams {
        &self.link
    }

    /// `P G_t G_r L_p |h|^2 / N_0`, cached.
    pub fn snr_bandwidth(&self) -> f64 {
        self.snr_bandwidth
    }

    pub fn compute(&self) -> f64 {
        self.compute
    }

    pub fn profile(&self) -> &CutProfile {
        &self.profile
    }

    pub fn modules(&self) -> usize {
        self.profile.modules()
    }

    pub fn rate(&self, bandwidth: f64) -> f64 {
        rate_from_snr(bandwidth, self.snr_bandwidth)
    }

    /// Local processing time up to `cut`.
    pub fn local_time(&self, cut: usize) -> f64 {
        self.profile.local_workload(cut) as f64 / self.compute
    }

    pub fn payload_bits(&self, cut: usize) -> u64 {
        self.profile.payload_bits(cut)
    }

    pub fn residual(&self, cut: usize) -> u64 {
        self.profile.residual_workload(cut)
    }

    /// Transmission time of the cut payload; infinite on a dead link.
    pub fn transmit_time(&self, cut: usize, bandwidth: f64) -> f64 {
        let bits = self.payload_bits(cut);
        if bits == 0 {
            return 0.0;
        }
        bits as f64 / self.rate(bandwidth)
    }

    /// Arrival delay `C`, or infinity when the payload cannot be sent.
    pub fn arrival_or_inf(&self, cut: usize, bandwidth: f64) -> f64 {
        self.transmit_time(cut, bandwidth) + self.local_time(cut)
    }

    /// `(D + tau) / R + W_local / f`.
    pub fn arrival_delay(&self, cut: usize, bandwidth: f64) -> Result<f64, DelayError> {
        self.check_cut(cut)?;
        let bits = self.payload_bits(cut);
        if bits > 0 && self.rate(bandwidth) <= 0.0 {
            return Err(DelayError::ZeroRate { bits });
        }
        Ok(self.arrival_or_inf(cut, bandwidth))
    }

    /// Arrival delay plus residual work at the device's server share.
    pub fn parallel_delay(&self, cut: usize, bandwidth: f64, server: f64) -> Result<f64, DelayError> {
        let arrival = self.arrival_delay(cut, bandwidth)?;
        let residual = self.residual(cut);
        if residual == 0 {
            return Ok(arrival);
        }
        if !(server > 0.0) {
            return Err(DelayError::MissingServerCompute { residual });
        }
        Ok(arrival + residual as f64 / server)
    }

    fn check_cut(&self, cut: usize) -> Result<(), DelayError> {
        if cut > self.modules() {
            Err(DelayError::BadCut {
                cut,
                modules: self.modules(),
            })
        } else {
            Ok(())
        }
    }
}

pub fn arrival_delay(device: &Device, cut: usize, bandwidth: f64) -> Result<f64, DelayError> {
    device.arrival_delay(cut, bandwidth)
}

/// FLOPs of BMs `cut+1..=L`.
pub fn residual_workload(profile: &CutProfile, cut: usize) -> u64 {
    profile.residual_workload(cut)
}

pub fn parallel_delay(device: &Device, cut: usize, bandwidth: f64, server: f64) -> Result<f64, DelayError> {
    device.parallel_delay(cut, bandwidth, server)
}

/// Devices sharing one base station, its server and its spectrum.
#[derive(Debug, Clone)]
pub struct NetworkInstance {
    pub devices: Vec<Device>,
    /// `f_max`, FLOP/s.
    pub server_compute: f64,
    /// `B_tot`, Hz.
    pub spectrum: f64,
}

impl NetworkInstance {
    pub fn new(devices: Vec<Device>, server_compute: f64, spectrum: f64) -> Result<Self, DelayError> {
        if devices.is_empty() {
            return Err(DelayError::InvalidNetwork("at least one device required".into()));
        }
        if !(server_compute > 0.0) || !(spectrum > 0.0) {
            return Err(DelayError::InvalidNetwork(
                "server compute and spectrum must be positive".into(),
            ));
        }
        Ok(Self {
            devices,
            server_compute,
            spectrum,
        })
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    pub fn equal_bandwidth(&self) -> Vec<f64> {
        vec![self.spectrum / self.len() as f64; self.len()]
    }
}

/// A serial server queue in arrival order.
///
/// Positions are 0-based: `breaks` holds every position `p >= 1` whose
/// arrival comes strictly after the previous job finished.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueState {
    /// Caller-side indices in arrival order.
    pub order: Vec<usize>,
    pub arrivals: Vec<f64>,
    pub residuals: Vec<f64>,
    pub server_compute: f64,
    pub completions: Vec<f64>,
    pub breaks: Vec<usize>,
}

impl QueueState {
    /// Sorts jobs by arrival (stable, so ties keep index order) and runs
    /// `I_k = max(I_{k-1}, C_k) + F_k / f_max`.
    pub fn new(arrivals: &[f64], residuals: &[f64], server_compute: f64) -> Self {
        assert_eq!(arrivals.len(), residuals.len());
        let mut order: Vec<usize> = (0..arrivals.len()).collect();
        order.sort_by(|&a, &b| arrivals[a].total_cmp(&arrivals[b]));
        let arrivals: Vec<f64> = order.iter().map(|&k| arrivals[k]).collect();
        let residuals: Vec<f64> = order.iter().map(|&k| residuals[k]).collect();
        let (completions, breaks) = queue_completions(&arrivals, &residuals, server_compute);
        Self {
            order,
            arrivals,
            residuals,
            server_compute,
            completions,
            breaks,
        }
    }

    /// Queue of the jobs with non-zero residual work only; jobs with nothing
    /// left for the server never enter it.
    pub fn of_pending(arrivals: &[f64], residuals: &[f64], server_compute: f64) -> Self {
        let pending: Vec<usize> = (0..arrivals.len()).filter(|&k| residuals[k] > 0.0).collect();
        let c: Vec<f64> = pending.iter().map(|&k| arrivals[k]).collect();
        let f: Vec<f64> = pending.iter().map(|&k| residuals[k]).collect();
        let mut q = Self::new(&c, &f, server_compute);
        for slot in &mut q.order {
            *slot = pending[*slot];
        }
        q
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Completion time of the last job, `I_K` (0 for an empty queue).
    pub fn total(&self) -> f64 {
        self.completions.last().copied().unwrap_or(0.0)
    }

    /// Service time of position `p`.
    pub fn service(&self, p: usize) -> f64 {
        self.residuals[p] / self.server_compute
    }

    pub fn position_of(&self, index: usize) -> Option<usize> {
        self.order.iter().position(|&k| k == index)
    }
}

/// Runs the queue recursion over arrival-sorted jobs. Returns completions and
/// the 0-based break positions.
pub fn queue_completions(arrivals: &[f64], residuals: &[f64], server_compute: f64) -> (Vec<f64>, Vec<usize>) {
    let mut completions = Vec::with_capacity(arrivals.len());
    let mut breaks = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for (p, (&c, &f)) in arrivals.iter().zip(residuals).enumerate() {
        let start = if p == 0 {
            c
        } else if prev < c {
            breaks.push(p);
            c
        } else {
            prev
        };
        prev = start + f / server_compute;
        completions.push(prev);
    }
    (completions, breaks)
}

/// Closed-form completion time of the last job: the arrival of the head of
/// the last unbroken sub-queue plus the service of everything from there on.
pub fn broken_queue_total(q: &QueueState) -> f64 {
    if q.is_empty() {
        return 0.0;
    }
    let head = q.breaks.last().copied().unwrap_or(0);
    (head..q.len()).fold(q.arrivals[head], |acc, p| acc + q.service(p))
}

/// Completion of everything under serial processing: the queue of pending
/// jobs, or the latest arrival among jobs that need no server work.
pub fn serial_total(arrivals: &[f64], residuals: &[f64], server_compute: f64) -> f64 {
    let done_locally = arrivals
        .iter()
        .zip(residuals)
        .filter(|(_, &f)| f <= 0.0)
        .map(|(&c, _)| c)
        .fold(f64::NEG_INFINITY, f64::max);
    QueueState::of_pending(arrivals, residuals, server_compute)
        .total()
        .max(done_locally)
}
