//! Full sparse pipeline on one random scene, compared with the genie-aided
//! and coarse-only variants.

use pinching_csi::estimator::SparseEstimator;
use pinching_csi::geometry::synthesize_channel;
use pinching_csi::harness::{Experiment, ExperimentConfig};
use pinching_csi::metrics::nmse;
use pinching_csi::pilot::{dbm_to_watts, make_pilot_symbols, receive_sequential, NoiseModel, TrialRng};

fn main() -> pinching_csi::Result<()> {
    let config = ExperimentConfig::default();
    let exp = Experiment::new(&config, Experiment::default_point(&config))?;
    let scene = exp.scene(0)?;
    let cfg = config.waveguide;
    let layout = config.layout;
    let h = synthesize_channel(&cfg, &scene);

    let pilots = make_pilot_symbols(dbm_to_watts(40.0), layout.slot_count())?;
    let noise = NoiseModel::from_dbm(config.noise_dbm)?;
    let mut rng = TrialRng::new(7, 0);
    let (ne, fe) = pilots.split_at(layout.near_count);
    let near = receive_sequential(&cfg, &h, &layout.near_indices(), ne, &noise, &mut rng)?;
    let far = receive_sequential(&cfg, &h, &layout.far_indices(), fe, &noise, &mut rng)?;

    let est = SparseEstimator::new(cfg, layout, config.estimator_config())?;
    let refined = est.algorithm1(&near, &far)?;
    let coarse = est.coarse_only(&near, &far)?;
    let mut truth = vec![(scene.user.angle_rad, scene.user.distance_m)];
    truth.extend(scene.scatterers.iter().map(|s| (s.position.angle_rad, s.position.distance_m)));
    println!("true paths      {truth:.3?}");
    for p in &refined.paths {
        println!("estimated path  φ = {:+.4} rad, r = {:.3} m, |β| = {:.3e}", p.angle_rad, p.distance_m, p.gain.norm());
    }
    let angles: Vec<f64> = truth.iter().map(|t| t.0).collect();
    let oracle = est.oracle(&near, &far, &angles)?;
    println!("NMSE refined {:.3e}", nmse(&refined.channel, &h)?);
    println!("NMSE coarse  {:.3e}", nmse(&coarse.channel, &h)?);
    println!("NMSE oracle  {:.3e}", nmse(&oracle.channel, &h)?);
    Ok(())
}
