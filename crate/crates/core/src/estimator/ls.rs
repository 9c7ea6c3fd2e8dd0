use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ChannelVector, WaveguideConfig};
use crate::pilot::ReceivedFrame;

/// Per-antenna LS estimate `ĥ_m = y_m / (w_m s_m)` from a frame that visits
/// every candidate position once, in index order.
pub fn ls_full_csi(cfg: &WaveguideConfig, frame: &ReceivedFrame) -> Result<ChannelVector> {
    let count = cfg.antenna_count();
    if frame.len() != count {
        return Err(Error::DimensionMismatch {
            expected: count,
            actual: frame.len(),
        });
    }
    frame
        .slots
        .iter()
        .enumerate()
        .map(|(t, slot)| {
            if slot.antenna != t + 1 {
                return Err(Error::InvalidParameter(format!(
                    "slot {t} activates antenna {} instead of {}",
                    slot.antenna,
                    t + 1
                )));
            }
            if slot.pilot == Complex64::new(0.0, 0.0) {
                return Err(Error::ZeroPilot { slot: t });
            }
            let w = cfg.radiation_coefficient(slot.antenna)?;
            Ok(slot.observation / (w * slot.pilot))
        })
        .collect::<Result<Vec<_>>>()
        .map(ChannelVector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{synthesize_channel, Polar, Scatterer, Scene};
    use crate::pilot::{make_pilot_symbols, receive_sequential, NoiseModel, TrialRng};

    fn setup() -> (WaveguideConfig, ChannelVector, Vec<usize>) {
        let cfg = WaveguideConfig::default();
        let scene = Scene::new(
            Polar::new(5.0, -0.4),
            vec![Scatterer {
                position: Polar::new(4.0, 1.0),
                rcs_m2: 1.0,
            }],
        )
        .unwrap();
        let h = synthesize_channel(&cfg, &scene);
        let idx = (1..=cfg.antenna_count()).collect();
        (cfg, h, idx)
    }

    #[test]
    fn noiseless_recovery() {
        let (cfg, h, idx) = setup();
        let pilots = make_pilot_symbols(10.0, idx.len()).unwrap();
        let mut rng = TrialRng::new(0, 0);
        let frame = receive_sequential(&cfg, &h, &idx, &pilots, &NoiseModel::noiseless(), &mut rng).unwrap();
        let est = ls_full_csi(&cfg, &frame).unwrap();
        for (a, b) in est.iter().zip(h.iter()) {
            assert!((a - b).norm() <= 1e-13 * b.norm());
        }
    }

    #[test]
    fn zero_pilot_and_shape_errors() {
        let (cfg, h, idx) = setup();
        let mut pilots = make_pilot_symbols(10.0, idx.len()).unwrap();
        pilots[7] = Complex64::new(0.0, 0.0);
        let mut rng = TrialRng::new(0, 0);
        let frame = receive_sequential(&cfg, &h, &idx, &pilots, &NoiseModel::noiseless(), &mut rng).unwrap();
        assert!(matches!(ls_full_csi(&cfg, &frame), Err(Error::ZeroPilot { slot: 7 })));
        let short = ReceivedFrame {
            slots: frame.slots[..10].to_vec(),
        };
        assert!(ls_full_csi(&cfg, &short).is_err());
    }

    #[test]
    fn per_entry_error_variance() {
        // Monte Carlo oracle: error of entry m is z_m / (w_m s_m), so its
        // variance is σ² / |s|² = σ² T / q
        let (cfg, h, idx) = setup();
        let q = 10.0;
        let sigma2 = 1e-13;
        let pilots = make_pilot_symbols(q, idx.len()).unwrap();
        let noise = NoiseModel::new(sigma2).unwrap();
        let expected = sigma2 * idx.len() as f64 / q;
        let draws = 10_000;
        let probe = [1usize, 200, 560];
        let mut acc = [0.0f64; 3];
        for d in 0..draws {
            let mut rng = TrialRng::new(77, d);
            let frame = receive_sequential(&cfg, &h, &idx, &pilots, &noise, &mut rng).unwrap();
            let est = ls_full_csi(&cfg, &frame).unwrap();
            for (a, &m) in acc.iter_mut().zip(&probe) {
                *a += (est[m - 1] - h[m - 1]).norm_sqr();
            }
        }
        for a in acc {
            let var = a / draws as f64;
            assert!((var / expected - 1.0).abs() < 0.03, "{var} vs {expected}");
        }
    }
}
