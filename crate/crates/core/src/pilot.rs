//! Pilot transmission and sequential single-antenna reception.
//!
//! During channel sounding the user transmits one pilot symbol per slot while
//! exactly one pinching antenna is active. Slot `t` observes
//! `y_t = w_{m_t} h_{m_t} s_t + z_t`.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ChannelVector, WaveguideConfig};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Split of the activated antennas into a near-end block (antennas
/// `1..=near_count`, used for angles) and a far-end block starting at
/// `far_start` (used for distances).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubarrayLayout {
    pub near_count: usize,
    pub far_count: usize,
    pub far_start: usize,
}

impl Default for SubarrayLayout {
    fn default() -> Self {
        Self {
            near_count: 30,
            far_count: 30,
            far_start: 450,
        }
    }
}

impl SubarrayLayout {
    pub fn new(near_count: usize, far_count: usize, far_start: usize, antenna_count: usize) -> Result<Self> {
        let layout = Self {
            near_count,
            far_count,
            far_start,
        };
        layout.validate(antenna_count)?;
        Ok(layout)
    }

    pub fn validate(&self, antenna_count: usize) -> Result<()> {
        if self.near_count < 1 || self.far_count < 1 {
            return Err(invalid("both subarrays need at least one antenna"));
        }
        if self.far_start <= self.near_count {
            return Err(invalid(format!(
                "far-end start {} overlaps the near-end block 1..={}",
                self.far_start, self.near_count
            )));
        }
        let last = self.far_start + self.far_count - 1;
        if last > antenna_count {
            return Err(Error::IndexOutOfRange {
                index: last,
                count: antenna_count,
            });
        }
        Ok(())
    }

    pub fn near_indices(&self) -> Vec<usize> {
        (1..=self.near_count).collect()
    }

    pub fn far_indices(&self) -> Vec<usize> {
        (self.far_start..self.far_start + self.far_count).collect()
    }

    /// Total pilot slots spent by the sparse scheme.
    pub fn slot_count(&self) -> usize {
        self.near_count + self.far_count
    }
}

/// Equal-power real pilots: every symbol is `sqrt(q / T)`, so the total
/// energy over the `T` slots is exactly `q`.
pub fn make_pilot_symbols(total_power_w: f64, slots: usize) -> Result<Vec<Complex64>> {
    if !(total_power_w > 0.0 && total_power_w.is_finite()) {
        return Err(invalid(format!("pilot power {total_power_w} W must be positive")));
    }
    if slots == 0 {
        return Err(invalid("at least one pilot slot is required"));
    }
    let amp = (total_power_w / slots as f64).sqrt();
    Ok(vec![Complex64::new(amp, 0.0); slots])
}

/// Circularly-symmetric complex Gaussian receiver noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    variance_w: f64,
}

impl NoiseModel {
    pub fn new(variance_w: f64) -> Result<Self> {
        if !(variance_w >= 0.0 && variance_w.is_finite()) {
            return Err(invalid(format!("noise variance {variance_w} must be non-negative")));
        }
        Ok(Self { variance_w })
    }

    pub fn noiseless() -> Self {
        Self { variance_w: 0.0 }
    }

    pub fn from_dbm(dbm: f64) -> Result<Self> {
        Self::new(dbm_to_watts(dbm))
    }

    pub fn variance(&self) -> f64 {
        self.variance_w
    }

    /// One `CN(0, σ²)` draw. Always consumes two normals so that streams stay
    /// aligned whatever the variance.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let scale = (0.5 * self.variance_w).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(scale * re, scale * im)
    }
}

/// Bookkeeping for one pilot slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slot {
    pub antenna: usize,
    pub pilot: Complex64,
    pub noise: Complex64,
    pub observation: Complex64,
}

/// Observations in activation order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReceivedFrame {
    pub slots: Vec<Slot>,
}

impl ReceivedFrame {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn antennas(&self) -> Vec<usize> {
        self.slots.iter().map(|s| s.antenna).collect()
    }

    pub fn pilots(&self) -> Vec<Complex64> {
        self.slots.iter().map(|s| s.pilot).collect()
    }

    pub fn observations(&self) -> Vec<Complex64> {
        self.slots.iter().map(|s| s.observation).collect()
    }

    /// Stacks `other` after `self`.
    pub fn concat(&self, other: &ReceivedFrame) -> ReceivedFrame {
        let mut slots = self.slots.clone();
        slots.extend_from_slice(&other.slots);
        ReceivedFrame { slots }
    }

    /// Known per-slot factor `w_{m_t} s_t` multiplying the channel.
    pub fn slot_gains(&self, cfg: &WaveguideConfig) -> Result<Vec<Complex64>> {
        self.slots
            .iter()
            .map(|s| Ok(cfg.radiation_coefficient(s.antenna)? * s.pilot))
            .collect()
    }
}

/// Activates `indices[t]` in slot `t` and records `w h s + z`.
pub fn receive_sequential<R: Rng + ?Sized>(
    cfg: &WaveguideConfig,
    h: &ChannelVector,
    indices: &[usize],
    pilots: &[Complex64],
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<ReceivedFrame> {
    if indices.len() != pilots.len() {
        return Err(Error::DimensionMismatch {
            expected: indices.len(),
            actual: pilots.len(),
        });
    }
    if h.len() != cfg.antenna_count() {
        return Err(Error::DimensionMismatch {
            expected: cfg.antenna_count(),
            actual: h.len(),
        });
    }
    let slots = indices
        .iter()
        .zip(pilots)
        .map(|(&m, &s)| {
            let w = cfg.radiation_coefficient(m)?;
            let z = noise.sample(rng);
            Ok(Slot {
                antenna: m,
                pilot: s,
                noise: z,
                observation: w * h[m - 1] * s + z,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReceivedFrame { slots })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random stream identified by `(base_seed, stream_id)`.
///
/// Streams with different ids are seeded independently, so trials can be
/// generated in any order or in parallel and still reproduce bit for bit.
#[derive(Debug, Clone)]
pub struct TrialRng {
    base_seed: u64,
    stream_id: u64,
    rng: ChaCha20Rng,
}

impl TrialRng {
    pub fn new(base_seed: u64, stream_id: u64) -> Self {
        let mut seed = [0u8; 32];
        let mut state = splitmix64(base_seed) ^ splitmix64(stream_id).rotate_left(17);
        for chunk in seed.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha20Rng::from_seed(seed);
        rng.set_stream(stream_id);
        Self {
            base_seed,
            stream_id,
            rng,
        }
    }

    /// Independent child stream, e.g. one per noise source within a trial.
    pub fn fork(&self, label: u64) -> TrialRng {
        let child = splitmix64(self.stream_id ^ splitmix64(label.wrapping_add(0xA5A5_A5A5)));
        TrialRng::new(self.base_seed ^ splitmix64(self.stream_id), child)
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for TrialRng {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
