//! Uplink model: free-space-style path loss, Rayleigh block fading and the
//! Shannon rate of an orthogonal bandwidth share.

use std::f64::consts::{LN_2, PI};

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::roots::newton_bracketed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("{0}")]
    Domain(String),
    #[error("rate {required:.6e} bit/s exceeds the infinite-bandwidth limit {limit:.6e} bit/s")]
    Unreachable { required: f64, limit: f64 },
}

pub fn dbi_to_linear(dbi: f64) -> f64 {
    10f64.powf(dbi / 10.0)
}

/// Converts a noise density in dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// `(4 pi d / lambda)^(-n)`.
pub fn path_loss(distance_m: f64, wavelength_m: f64, exponent: f64) -> Result<f64, ChannelError> {
    if !(distance_m > 0.0) || !(wavelength_m > 0.0) {
        return Err(ChannelError::Domain(format!(
            "path loss needs positive distance and wavelength (d={distance_m}, lambda={wavelength_m})"
        )));
    }
    Ok((4.0 * PI * distance_m / wavelength_m).powf(-exponent))
}

/// One device's link to the base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub power_w: f64,
    pub gain_tx: f64,
    pub gain_rx: f64,
    pub wavelength_m: f64,
    pub distance_m: f64,
    pub pathloss_exp: f64,
    /// Noise power spectral density, W/Hz.
    pub noise_density: f64,
    /// Small-scale fading power `|h|^2`.
    pub fading_power: f64,
}

impl LinkParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let checks = [
            (self.power_w >= 0.0, "transmit power must be >= 0"),
            (self.gain_tx > 0.0 && self.gain_rx > 0.0, "antenna gains must be > 0"),
            (self.wavelength_m > 0.0, "wavelength must be > 0"),
            (self.distance_m > 0.0, "distance must be > 0"),
            (self.pathloss_exp > 0.0, "path loss exponent must be > 0"),
            (self.noise_density > 0.0, "noise density must be > 0"),
            (self.fading_power >= 0.0, "fading power must be >= 0"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, msg)) => Err(ChannelError::Domain((*msg).to_string())),
            None => Ok(()),
        }
    }

    /// Received SNR per unit bandwidth, `P G_t G_r L_p |h|^2 / N_0` (Hz).
    ///
    /// The rate of a share `B` is `B log2(1 + c / B)`, which tends to
    /// `c / ln 2` as `B` grows.
    pub fn snr_bandwidth(&self) -> f64 {
        let loss = (4.0 * PI * self.distance_m / self.wavelength_m).powf(-self.pathloss_exp);
        self.power_w * self.gain_tx * self.gain_rx * loss * self.fading_power / self.noise_density
    }

    /// Asymptotic rate as bandwidth goes to infinity.
    pub fn rate_limit(&self) -> f64 {
        self.snr_bandwidth() / LN_2
    }

    pub fn with_fading(mut self, fading_power: f64) -> Self {
        self.fading_power = fading_power;
        self
    }
}

/// Shannon rate `B log2(1 + c / B)` for `c = snr_bandwidth`; 0 at `B = 0`.
#[inline]
pub fn rate_from_snr(bandwidth: f64, snr_bandwidth: f64) -> f64 {
    if bandwidth <= 0.0 || snr_bandwidth <= 0.0 {
        return 0.0;
    }
    bandwidth * (snr_bandwidth / bandwidth).ln_1p() / LN_2
}

/// `dR/dB = log2(1 + x) - x / ((1 + x) ln 2)` with `x = c / B`.
#[inline]
pub fn rate_slope(bandwidth: f64, snr_bandwidth: f64) -> f64 {
    if snr_bandwidth <= 0.0 {
        return 0.0;
    }
    if bandwidth <= 0.0 {
        return f64::INFINITY;
    }
    let x = snr_bandwidth / bandwidth;
    (x.ln_1p() - x / (1.0 + x)) / LN_2
}

/// Achievable uplink rate in bit/s for a bandwidth share in Hz.
pub fn achievable_rate(bandwidth_hz: f64, link: &LinkParams) -> f64 {
    rate_from_snr(bandwidth_hz, link.snr_bandwidth())
}

/// Smallest bandwidth whose rate reaches `required` bit/s, given the link's
/// SNR-bandwidth product `c`.
///
/// Grows a bracket geometrically, then refines it with a safeguarded Newton /
/// bisection iteration. The returned value is the upper end of the final
/// bracket, so `rate_from_snr(result, c) >= required` up to rounding.
pub fn bandwidth_for_rate_snr(snr_bandwidth: f64, required: f64) -> Result<f64, ChannelError> {
    if !(required >= 0.0) {
        return Err(ChannelError::Domain(format!("required rate must be >= 0, got {required}")));
    }
    if required == 0.0 {
        return Ok(0.0);
    }
    let limit = snr_bandwidth / LN_2;
    if !(required < limit) {
        return Err(ChannelError::Unreachable { required, limit });
    }
    // Rate is at least B log2(1 + c/B) >= B for B <= c, so start there.
    let mut lo = 0.0;
    let mut hi = required.min(snr_bandwidth).max(f64::MIN_POSITIVE);
    while rate_from_snr(hi, snr_bandwidth) < required {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(ChannelError::Unreachable { required, limit });
        }
    }
    let (_, hi) = newton_bracketed(
        |b| (rate_from_snr(b, snr_bandwidth) - required, rate_slope(b, snr_bandwidth)),
        lo,
        hi,
        1e-13,
        200,
    );
    Ok(hi)
}

pub fn bandwidth_for_rate(link: &LinkParams, required: f64) -> Result<f64, ChannelError> {
    bandwidth_for_rate_snr(link.snr_bandwidth(), required)
}

/// Channel settings as they appear in experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub power_w: f64,
    pub gain_tx_dbi: f64,
    pub gain_rx_dbi: f64,
    /// Linear gains; override the dBi entries when present.
    pub gain_tx_linear: Option<f64>,
    pub gain_rx_linear: Option<f64>,
    pub wavelength_m: f64,
    pub distance_m: f64,
    pub pathloss_exp: f64,
    /// Thermal noise density. Absolute delays depend directly on it.
    pub noise_dbm_per_hz: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            power_w: 1.0,
            gain_tx_dbi: 1.0,
            gain_rx_dbi: 10.0,
            gain_tx_linear: None,
            gain_rx_linear: None,
            wavelength_m: 0.05,
            distance_m: 50.0,
            pathloss_exp: 2.4,
            noise_dbm_per_hz: -174.0,
        }
    }
}

impl ChannelConfig {
    pub fn link(&self, fading_power: f64) -> LinkParams {
        LinkParams {
            power_w: self.power_w,
            gain_tx: self.gain_tx_linear.unwrap_or_else(|| dbi_to_linear(self.gain_tx_dbi)),
            gain_rx: self.gain_rx_linear.unwrap_or_else(|| dbi_to_linear(self.gain_rx_dbi)),
            wavelength_m: self.wavelength_m,
            distance_m: self.distance_m,
            pathloss_exp: self.pathloss_exp,
            noise_density: dbm_per_hz_to_watts(self.noise_dbm_per_hz),
            fading_power,
        }
    }
}

/// Rayleigh block-fading sampler for one Monte-Carlo trial.
///
/// ChaCha20 keyed by `seed` (via `seed_from_u64`), stream `trial`. Each draw
/// takes one 64-bit word `w` and returns `-ln(u)` with
/// `u = ((w >> 11) + 1) * 2^-53`, an Exponential(1) variate, i.e. `|h|^2`
/// for `h ~ CN(0, 1)`. Device `k` of a trial receives the `k`-th draw.
pub struct FadingSampler {
    rng: ChaCha20Rng,
}

impl FadingSampler {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        Self { rng }
    }

    pub fn sample(&mut self) -> f64 {
        let word = self.rng.next_u64();
        let u = ((word >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        -u.ln()
    }

    /// Fading powers for devices `0..count` of this trial.
    pub fn draw(seed: u64, trial: u64, count: usize) -> Vec<f64> {
        let mut s = Self::new(seed, trial);
        (0..count).map(|_| s.sample()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_link() -> LinkParams {
        LinkParams {
            power_w: 1.0,
            gain_tx: 1.0,
            gain_rx: 10.0,
            wavelength_m: 0.05,
            distance_m: 50.0,
            pathloss_exp: 2.4,
            noise_density: 10f64.powf(-204.0 / 10.0),
            fading_power: 1.0,
        }
    }

    #[test]
    fn path_loss_values() {
        let lambda = 0.05;
        assert!((path_loss(lambda / (4.0 * PI), lambda, 2.4).unwrap() - 1.0).abs() < 1e-12);
        // (4 pi 50 / 0.05)^-2.4, evaluated at 40 digits
        let pl = path_loss(50.0, 0.05, 2.4).unwrap();
        assert!((pl / 1.451_765_014_637_982e-10 - 1.0).abs() < 1e-12);
        assert_eq!(path_loss(123.0, 0.3, 0.0).unwrap(), 1.0);
        assert!(path_loss(0.0, 0.05, 2.0).is_err());
        assert!(path_loss(1.0, -1.0, 2.0).is_err());
    }

    #[test]
    fn rate_golden() {
        // Independent 40-digit evaluation: 283087413.88562048...
        let r = achievable_rate(20e6, &example_link());
        assert!((r / 283_087_413.885_620_5 - 1.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn rate_zero_cases() {
        let link = example_link();
        assert_eq!(achievable_rate(20e6, &LinkParams { power_w: 0.0, ..link }), 0.0);
        assert_eq!(achievable_rate(20e6, &link.with_fading(0.0)), 0.0);
        assert_eq!(achievable_rate(0.0, &link), 0.0);
    }

    #[test]
    fn rate_approaches_limit() {
        let link = example_link();
        let c = link.snr_bandwidth();
        let r = achievable_rate(1e4 * c, &link);
        assert!((r / link.rate_limit() - 1.0).abs() < 0.01);
    }

    #[test]
    fn bandwidth_inverse() {
        let link = example_link();
        assert_eq!(bandwidth_for_rate(&link, 0.0).unwrap(), 0.0);
        for b0 in [1.0, 1e3, 2e7, 3e9] {
            let r = achievable_rate(b0, &link);
            let b = bandwidth_for_rate(&link, r).unwrap();
            assert!((b / b0 - 1.0).abs() < 1e-9, "{b0} -> {b}");
            assert!(achievable_rate(b, &link) >= r * (1.0 - 1e-15));
        }
        let limit = link.rate_limit();
        let b = bandwidth_for_rate(&link, 0.99 * limit).unwrap();
        assert!(b.is_finite() && b > link.snr_bandwidth());
        assert!(matches!(
            bandwidth_for_rate(&link, 1.01 * limit),
            Err(ChannelError::Unreachable { .. })
        ));
    }

    #[test]
    fn rate_monotone_concave_in_bandwidth() {
        let link = example_link();
        let grid: Vec<f64> = (1..=400).map(|i| i as f64 * 5e5).collect();
        let r: Vec<f64> = grid.iter().map(|&b| achievable_rate(b, &link)).collect();
        for w in r.windows(3) {
            assert!(w[1] > w[0]);
            // Equal spacing: second difference <= 0.
            assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-6 * w[1]);
        }
    }

    #[test]
    fn rate_increasing_in_power_and_fading() {
        let link = example_link();
        let mut prev = 0.0;
        for p in [0.1, 0.5, 1.0, 2.0] {
            let r = achievable_rate(20e6, &LinkParams { power_w: p, ..link });
            assert!(r > prev);
            prev = r;
        }
        let mut prev = 0.0;
        for h in [0.01, 0.3, 1.0, 4.0] {
            let r = achievable_rate(20e6, &link.with_fading(h));
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn config_defaults() {
        let link = ChannelConfig::default().link(1.0);
        assert!((link.gain_tx - 1.258_925_411_794_167_2).abs() < 1e-12);
        assert!((link.gain_rx - 10.0).abs() < 1e-12);
        assert!((link.noise_density / 10f64.powf(-20.4) - 1.0).abs() < 1e-12);
        let linear = ChannelConfig {
            gain_tx_linear: Some(1.0),
            ..Default::default()
        };
        assert_eq!(linear.link(1.0).gain_tx, 1.0);
    }

    #[test]
    fn fading_is_deterministic() {
        let a = FadingSampler::draw(7, 3, 5);
        let b = FadingSampler::draw(7, 3, 5);
        assert_eq!(a, b);
        assert_ne!(a, FadingSampler::draw(7, 4, 5));
        assert_ne!(a, FadingSampler::draw(8, 3, 5));
        assert!(a.iter().all(|&h| h >= 0.0));
    }

    #[test]
    fn fading_mean_is_one() {
        let mut s = FadingSampler::new(2024, 0);
        let n = 1_000_000;
        let mean = (0..n).map(|_| s.sample()).sum::<f64>() / n as f64;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
    }
}
