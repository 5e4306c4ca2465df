//! Seeded Monte-Carlo driver: experiment configs, trials, parameter sweeps,
//! data tables and scaling measurements.
//!
//! Trial `t` of an experiment with seed `s` draws its fading from
//! [`FadingSampler::new(s, t)`](crate::FadingSampler), so every record depends
//! only on `(config, seed, trial)` and trials can run in any order or
//! concurrently. Aggregation always walks trials in index order.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arch::{load_architecture, propagate, reference_architecture, ArchError, CutProfile};
use crate::channel::{ChannelConfig, FadingSampler};
use crate::delay::{DelayError, Device, NetworkInstance};
use crate::plan::{Policy, SolverSettings};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("architecture {path}: {source}")]
    Architecture { path: String, source: ArchError },
    #[error(transparent)]
    Network(#[from] DelayError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Parameter varied by a sweep. Values use base units: watts, hertz, FLOP/s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    /// Number of devices `K`.
    Devices,
    /// Transmit power of every device, W.
    Power,
    /// Total bandwidth `B_tot`, Hz.
    Bandwidth,
    /// Device compute `f_k`, FLOP/s.
    Fdev,
    /// Server compute `f_max`, FLOP/s.
    Fserver,
    /// Outer iterations of every alternating policy.
    Iters,
}

impl SweepParam {
    pub const ALL: [SweepParam; 6] = [
        SweepParam::Devices,
        SweepParam::Power,
        SweepParam::Bandwidth,
        SweepParam::Fdev,
        SweepParam::Fserver,
        SweepParam::Iters,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::Devices => "devices",
            SweepParam::Power => "power",
            SweepParam::Bandwidth => "bandwidth",
            SweepParam::Fdev => "fdev",
            SweepParam::Fserver => "fserver",
            SweepParam::Iters => "iters",
        }
    }

    fn is_count(self) -> bool {
        matches!(self, SweepParam::Devices | SweepParam::Iters)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SweepParam::ALL.iter().map(|p| p.as_str()).collect();
                format!("unknown sweep parameter `{s}` (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// One experiment. Every field has a default, so `{}` is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Architecture config path; the shipped reference network when absent.
    /// Relative paths are resolved by the caller (the CLI uses the config
    /// file's directory).
    pub architecture: Option<PathBuf>,
    pub channel: ChannelConfig,
    pub devices: usize,
    /// `f_k`, FLOP/s.
    pub device_compute: f64,
    /// `f_max`, FLOP/s.
    pub server_compute: f64,
    /// `B_tot`, Hz.
    pub spectrum_hz: f64,
    pub trials: u64,
    pub seed: u64,
    pub policies: Vec<Policy>,
    pub solver: SolverSettings,
    pub sweep: Option<Sweep>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            architecture: None,
            channel: ChannelConfig::default(),
            devices: 10,
            device_compute: 30e9,
            server_compute: 300e9,
            spectrum_hz: 200e6,
            trials: 100,
            seed: 1,
            policies: Policy::ALL.to_vec(),
            solver: SolverSettings::default(),
            sweep: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let config: Self = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.devices == 0 {
            return bad("devices must be at least 1");
        }
        if !(self.device_compute > 0.0 && self.server_compute > 0.0 && self.spectrum_hz > 0.0) {
            return bad("compute and bandwidth budgets must be positive");
        }
        if !(self.channel.power_w > 0.0) {
            return bad("transmit power must be positive");
        }
        if self.policies.is_empty() {
            return bad("at least one policy is required");
        }
        self.solver
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        self.channel
            .link(1.0)
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return bad("sweep values must be non-empty");
            }
            for &v in &sweep.values {
                self.with_param(sweep.param, v)?;
            }
        }
        Ok(())
    }

    /// Copy of the config with one sweep parameter set.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self, HarnessError> {
        if !(value > 0.0) || !value.is_finite() || (param.is_count() && value.fract() != 0.0) {
            return Err(HarnessError::Config(format!("invalid {param} value {value}")));
        }
        let mut c = self.clone();
        match param {
            SweepParam::Devices => c.devices = value as usize,
            SweepParam::Power => c.channel.power_w = value,
            SweepParam::Bandwidth => c.spectrum_hz = value,
            SweepParam::Fdev => c.device_compute = value,
            SweepParam::Fserver => c.server_compute = value,
            SweepParam::Iters => c.solver = c.solver.with_iterations(value as usize),
        }
        Ok(c)
    }

    /// Current value of a sweep parameter.
    pub fn param(&self, param: SweepParam) -> f64 {
        match param {
            SweepParam::Devices => self.devices as f64,
            SweepParam::Power => self.channel.power_w,
            SweepParam::Bandwidth => self.spectrum_hz,
            SweepParam::Fdev => self.device_compute,
            SweepParam::Fserver => self.server_compute,
            SweepParam::Iters => self.solver.heuristic_iterations as f64,
        }
    }

    /// Loads the configured architecture and computes its cut profile.
    pub fn profile(&self) -> Result<Arc<CutProfile>, HarnessError> {
        let (arch, path) = match &self.architecture {
            None => (reference_architecture(), "<reference>".to_string()),
            Some(path) => {
                let text = fs::read_to_string(path).map_err(io_error(path))?;
                let shown = path.display().to_string();
                let arch = load_architecture(&text).map_err(|source| HarnessError::Architecture {
                    path: shown.clone(),
                    source,
                })?;
                (arch, shown)
            }
        };
        propagate(&arch)
            .map(Arc::new)
            .map_err(|source| HarnessError::Architecture { path, source })
    }

    /// Network of trial `trial`: identical devices apart from their fading.
    pub fn network(&self, profile: &Arc<CutProfile>, trial: u64) -> Result<NetworkInstance, HarnessError> {
        let fading = FadingSampler::draw(self.seed, trial, self.devices);
        let devices = fading
            .into_iter()
            .map(|h| Device::new(self.channel.link(h), self.device_compute, Arc::clone(profile)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(NetworkInstance::new(devices, self.server_compute, self.spectrum_hz)?)
    }
}

/// Result of one policy in one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyOutcome {
    pub policy: Policy,
    /// Objective in seconds, or the solver error.
    pub objective: Result<f64, String>,
    pub iterations: usize,
    /// Not part of any table; varies between runs.
    pub wall_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub outcomes: Vec<PolicyOutcome>,
}

/// Runs every configured policy on trial `trial`. A failing policy is
/// recorded and does not stop the others.
pub fn run_trial(config: &ExperimentConfig, profile: &Arc<CutProfile>, trial: u64) -> Result<TrialRecord, HarnessError> {
    let net = config.network(profile, trial)?;
    let outcomes = config
        .policies
        .iter()
        .map(|&policy| {
            let start = Instant::now();
            let result = crate::solve(policy, &net, &config.solver);
            let wall_s = start.elapsed().as_secs_f64();
            match result {
                Ok(plan) => PolicyOutcome {
                    policy,
                    objective: Ok(plan.objective),
                    iterations: plan.iterations,
                    wall_s,
                },
                Err(e) => PolicyOutcome {
                    policy,
                    objective: Err(e.to_string()),
                    iterations: 0,
                    wall_s,
                },
            }
        })
        .collect();
    Ok(TrialRecord { trial, outcomes })
}

/// Runs all trials of one config, concurrently, in trial order.
pub fn run_trials(config: &ExperimentConfig, profile: &Arc<CutProfile>) -> Result<Vec<TrialRecord>, HarnessError> {
    (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, profile, t))
        .collect()
}

/// Aggregate of one policy at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub policy: Policy,
    pub mean_delay_s: f64,
    /// Sample standard deviation (0 for a single trial).
    pub std_s: f64,
    /// Trials the policy solved.
    pub n_trials: u64,
    pub failures: u64,
    pub mean_iterations: f64,
    pub mean_wall_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub param: SweepParam,
    pub points: Vec<SweepPoint>,
    /// First error message per (value, policy) that failed in some trial.
    pub errors: Vec<(f64, Policy, String)>,
}

impl SweepResult {
    pub fn point(&self, value: f64, policy: Policy) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.value == value && p.policy == policy)
    }

    /// Mean delays of one policy in sweep order.
    pub fn series(&self, policy: Policy) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter(|p| p.policy == policy)
            .map(|p| (p.value, p.mean_delay_s))
            .collect()
    }
}

fn aggregate(value: f64, policy: Policy, records: &[TrialRecord], errors: &mut Vec<(f64, Policy, String)>) -> SweepPoint {
    let mut delays = Vec::with_capacity(records.len());
    let (mut iterations, mut wall, mut failures) = (0usize, 0.0, 0u64);
    let mut first_error = None;
    for record in records {
        let outcome = record
            .outcomes
            .iter()
            .find(|o| o.policy == policy)
            .expect("every record holds every configured policy");
        wall += outcome.wall_s;
        match &outcome.objective {
            Ok(v) => {
                delays.push(*v);
                iterations += outcome.iterations;
            }
            Err(e) => {
                failures += 1;
                first_error.get_or_insert_with(|| e.clone());
            }
        }
    }
    if let Some(e) = first_error {
        errors.push((value, policy, e));
    }
    let n = delays.len();
    let mean = delays.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        (delays.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    SweepPoint {
        value,
        policy,
        mean_delay_s: if n > 0 { mean } else { f64::NAN },
        std_s: std,
        n_trials: n as u64,
        failures,
        mean_iterations: if n > 0 { iterations as f64 / n as f64 } else { 0.0 },
        mean_wall_s: wall / records.len().max(1) as f64,
    }
}

/// Runs the configured sweep, or a single point at the current device count
/// when no sweep is configured.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult, HarnessError> {
    config.validate()?;
    let profile = config.profile()?;
    let sweep = config.sweep.clone().unwrap_or(Sweep {
        param: SweepParam::Devices,
        values: vec![config.devices as f64],
    });
    let mut points = Vec::new();
    let mut errors = Vec::new();
    for &value in &sweep.values {
        let point_config = config.with_param(sweep.param, value)?;
        let records = run_trials(&point_config, &profile)?;
        for &policy in &config.policies {
            points.push(aggregate(value, policy, &records, &mut errors));
        }
    }
    Ok(SweepResult {
        param: sweep.param,
        points,
        errors,
    })
}

pub const CSV_HEADER: &str = "sweep_value,policy,mean_delay_s,std_s,n_trials";

/// Writes `<param>.csv` with every point and one `<param>_<policy>.dat`
/// (sweep value and mean delay, space separated) per policy. Contents depend
/// only on the delays, never on timings. Returns the written paths.
pub fn write_tables(result: &SweepResult, out_dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(out_dir).map_err(io_error(out_dir))?;
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for p in &result.points {
        csv.push_str(&format!("{},{},{},{},{}\n", p.value, p.policy, p.mean_delay_s, p.std_s, p.n_trials));
    }
    let csv_path = out_dir.join(format!("{}.csv", result.param));
    fs::write(&csv_path, csv).map_err(io_error(&csv_path))?;
    let mut written = vec![csv_path];

    let mut policies: Vec<Policy> = Vec::new();
    for p in &result.points {
        if !policies.contains(&p.policy) {
            policies.push(p.policy);
        }
    }
    for policy in policies {
        let mut dat = String::new();
        for (x, y) in result.series(policy) {
            dat.push_str(&format!("{x} {y}\n"));
        }
        let path = out_dir.join(format!("{}_{}.dat", result.param, policy));
        fs::write(&path, dat).map_err(io_error(&path))?;
        written.push(path);
    }
    Ok(written)
}

/// Median solver wall time of each policy at each device count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingTable {
    pub devices: Vec<usize>,
    /// `(policy, median seconds per device count)`.
    pub rows: Vec<(Policy, Vec<f64>)>,
}

impl ScalingTable {
    pub fn times(&self, policy: Policy) -> Option<&[f64]> {
        self.rows.iter().find(|(p, _)| *p == policy).map(|(_, t)| t.as_slice())
    }

    /// Time at the largest device count over time at the smallest; `None`
    /// with fewer than two device counts.
    pub fn growth(&self, policy: Policy) -> Option<f64> {
        let t = self.times(policy)?;
        (t.len() >= 2).then(|| t[t.len() - 1] / t[0])
    }
}

/// Times each policy on `repeats` trials per device count, sequentially,
/// and keeps the median. `device_counts` must be ascending.
pub fn bench_scaling(config: &ExperimentConfig, device_counts: &[usize], repeats: u64) -> Result<ScalingTable, HarnessError> {
    if device_counts.windows(2).any(|w| w[0] >= w[1]) || device_counts.is_empty() {
        return Err(HarnessError::Config("device counts must be ascending and non-empty".into()));
    }
    if repeats == 0 {
        return Err(HarnessError::Config("repeats must be at least 1".into()));
    }
    let profile = config.profile()?;
    let mut rows: Vec<(Policy, Vec<f64>)> = config.policies.iter().map(|&p| (p, Vec::new())).collect();
    for &k in device_counts {
        let c = config.with_param(SweepParam::Devices, k as f64)?;
        let nets = (0..repeats).map(|t| c.network(&profile, t)).collect::<Result<Vec<_>, _>>()?;
        for (policy, times) in &mut rows {
            let mut samples: Vec<f64> = nets
                .iter()
                .map(|net| {
                    let start = Instant::now();
                    let _ = crate::solve(*policy, net, &c.solver);
                    start.elapsed().as_secs_f64()
                })
                .collect();
            samples.sort_by(f64::total_cmp);
            times.push(samples[samples.len() / 2]);
        }
    }
    Ok(ScalingTable {
        devices: device_counts.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default() {
        assert_eq!(ExperimentConfig::from_json("{}").unwrap(), ExperimentConfig::default());
        assert!(ExperimentConfig::from_json(r#"{"trials": 0}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sweep": {"param": "devices", "values": [2.5]}}"#).is_err());
    }

    #[test]
    fn sweep_params_roundtrip() {
        for p in SweepParam::ALL {
            assert_eq!(p.as_str().parse::<SweepParam>().unwrap(), p);
            let c = ExperimentConfig::default().with_param(p, 7.0).unwrap();
            assert_eq!(c.param(p), 7.0);
        }
    }

    #[test]
    fn empty_result_writes_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let result = SweepResult {
            param: SweepParam::Power,
            points: Vec::new(),
            errors: Vec::new(),
        };
        let files = write_tables(&result, dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        assert_eq!(fs::read_to_string(&files[0]).unwrap(), format!("{CSV_HEADER}\n"));
    }
}
