//! Estimation quality and link metrics.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// `‖ĥ − h‖² / ‖h‖²` for one realization.
pub fn nmse(estimate: &[Complex64], truth: &[Complex64]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: estimate.len(),
        });
    }
    let energy: f64 = truth.iter().map(|v| v.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::Degenerate("true channel is zero".into()));
    }
    let err: f64 = estimate
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(err / energy)
}

/// Antenna index (1-based) with the largest estimated channel magnitude.
/// The lowest index wins ties.
pub fn select_antenna(estimate: &[Complex64]) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in estimate.iter().enumerate() {
        let mag = v.norm_sqr();
        if best.map_or(true, |(_, b)| mag > b) {
            best = Some((i, mag));
        }
    }
    best.map(|(i, _)| i + 1)
        .ok_or_else(|| invalid("cannot select from an empty channel"))
}

/// Transmit power and receiver noise used to score a selected antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConfig {
    transmit_power_w: f64,
    noise_variance_w: f64,
}

impl RateConfig {
    pub fn new(transmit_power_w: f64, noise_variance_w: f64) -> Result<Self> {
        if !(transmit_power_w > 0.0) || !(noise_variance_w > 0.0) {
            return Err(invalid("rate needs positive transmit power and noise variance"));
        }
        Ok(Self {
            transmit_power_w,
            noise_variance_w,
        })
    }

    pub fn transmit_power(&self) -> f64 {
        self.transmit_power_w
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance_w
    }
}

/// `log₂(1 + q_c |h_m|² / σ²)` in bit/s/Hz for antenna `m` (1-based) of the
/// true channel. The radiation coefficient has unit modulus and drops out.
pub fn achievable_rate(truth: &[Complex64], antenna: usize, rate: &RateConfig) -> Result<f64> {
    let h = antenna
        .checked_sub(1)
        .and_then(|i| truth.get(i))
        .ok_or(Error::IndexOutOfRange {
            index: antenna,
            count: truth.len(),
        })?;
    Ok((1.0 + rate.transmit_power_w * h.norm_sqr() / rate.noise_variance_w).log2())
}
