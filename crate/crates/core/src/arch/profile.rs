use serde::{Deserialize, Serialize};

use super::{ArchError, Architecture};

/// Per-cut workload and payload of an architecture.
///
/// Index `l` ranges over `0..=L`. `cum_workload[l]` is the FLOP count of
/// BMs `1..=l`, `transmit_bits[l]` the activation payload handed over at cut
/// `l`, and `index_bits[l]` the pooling-index side data the server needs to
/// finish any unpooling still ahead of the cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutProfile {
    pub cum_workload: Vec<u64>,
    pub transmit_bits: Vec<u64>,
    pub index_bits: Vec<u64>,
    pub total_workload: u64,
}

impl CutProfile {
    /// Builds a profile from per-module workloads and per-cut payloads
    /// (`transmit_bits` and `index_bits` have one more entry than `workloads`).
    pub fn from_parts(workloads: &[u64], transmit_bits: Vec<u64>, index_bits: Vec<u64>) -> Self {
        assert_eq!(transmit_bits.len(), workloads.len() + 1, "one payload per cut");
        assert_eq!(index_bits.len(), workloads.len() + 1, "one index payload per cut");
        let mut cum_workload = Vec::with_capacity(workloads.len() + 1);
        let mut acc = 0u64;
        cum_workload.push(0);
        for w in workloads {
            acc += w;
            cum_workload.push(acc);
        }
        Self {
            cum_workload,
            transmit_bits,
            index_bits,
            total_workload: acc,
        }
    }

    /// Number of bottleneck modules, `L`.
    pub fn modules(&self) -> usize {
        self.cum_workload.len() - 1
    }

    pub fn cuts(&self) -> std::ops::RangeInclusive<usize> {
        0..=self.modules()
    }

    /// Workload of BM `l` (1-based).
    pub fn module_workload(&self, l: usize) -> u64 {
        self.cum_workload[l] - self.cum_workload[l - 1]
    }

    pub fn local_workload(&self, cut: usize) -> u64 {
        self.cum_workload[cut]
    }

    /// FLOPs left for the server after cut `cut`.
    pub fn residual_workload(&self, cut: usize) -> u64 {
        self.total_workload - self.cum_workload[cut]
    }

    /// Activation plus index bits shipped at `cut`.
    pub fn payload_bits(&self, cut: usize) -> u64 {
        self.transmit_bits[cut] + self.index_bits[cut]
    }

    /// Smallest cut with the minimum payload.
    pub fn min_payload_cut(&self) -> usize {
        self.cuts()
            .min_by_key(|&l| (self.payload_bits(l), l))
            .unwrap_or(0)
    }
}

/// Runs shape propagation and tabulates the cut profile.
pub fn propagate(arch: &Architecture) -> Result<CutProfile, ArchError> {
    let traces = arch.traces()?;
    let partners = arch.pool_partners(&traces)?;
    let bits = arch.bits_per_element();
    let modules = arch.modules();
    let cuts = modules.len() + 1;

    let workloads: Vec<u64> = traces.iter().map(|t| t.flops).collect();
    let mut transmit = Vec::with_capacity(cuts);
    transmit.push(arch.input_shape().elements() * bits);
    transmit.extend(traces.iter().map(|t| t.output.elements() * bits));

    // Module j (1-based cut index j) pools; its partner u unpools. The
    // indices are in flight for cuts j <= l < u.
    let mut index = vec![0u64; cuts];
    for (j, partner) in partners.iter().enumerate() {
        let Some(u) = partner else { continue };
        let side = modules[j].pool_bits_per_element * traces[j].pooled_elements;
        for slot in &mut index[j + 1..u + 1] {
            *slot += side;
        }
    }
    Ok(CutProfile::from_parts(&workloads, transmit, index))
}
