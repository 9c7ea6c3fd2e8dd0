//! Least-squares baseline: one pilot slot per candidate position, compared
//! with its analytic NMSE M²σ²/(q‖h‖²).

use pinching_csi::estimator::ls_full_csi;
use pinching_csi::geometry::{synthesize_channel, Polar, Scene, WaveguideConfig};
use pinching_csi::metrics::nmse;
use pinching_csi::pilot::{make_pilot_symbols, receive_sequential, NoiseModel, TrialRng};

fn main() -> pinching_csi::Result<()> {
    let cfg = WaveguideConfig::default();
    let m = cfg.antenna_count();
    let all: Vec<usize> = (1..=m).collect();
    let h = synthesize_channel(&cfg, &Scene::line_of_sight(Polar::new(5.0, 0.2))?);
    let (q, sigma2) = (10.0, 1e-13);
    let pilots = make_pilot_symbols(q, m)?;
    let noise = NoiseModel::new(sigma2)?;
    let trials = 200;
    let mut total = 0.0;
    for t in 0..trials {
        let frame = receive_sequential(&cfg, &h, &all, &pilots, &noise, &mut TrialRng::new(5, t))?;
        total += nmse(&ls_full_csi(&cfg, &frame)?, &h)?;
    }
    println!("measured NMSE {:.4e}", total / trials as f64);
    println!("analytic NMSE {:.4e}", (m * m) as f64 * sigma2 / (q * h.norm_sqr()));
    Ok(())
}
