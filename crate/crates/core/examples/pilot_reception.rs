//! Sequential pilot reception on the two subarrays.

use pinching_csi::geometry::{synthesize_channel, Polar, Scene, WaveguideConfig};
use pinching_csi::pilot::{dbm_to_watts, make_pilot_symbols, receive_sequential, NoiseModel, SubarrayLayout, TrialRng};

fn main() -> pinching_csi::Result<()> {
    let cfg = WaveguideConfig::default();
    let layout = SubarrayLayout::default();
    let h = synthesize_channel(&cfg, &Scene::line_of_sight(Polar::new(5.0, 0.3))?);
    let pilots = make_pilot_symbols(dbm_to_watts(20.0), layout.slot_count())?;
    let noise = NoiseModel::from_dbm(-100.0)?;
    let mut rng = TrialRng::new(1, 0);
    let (ne, fe) = pilots.split_at(layout.near_count);
    let near = receive_sequential(&cfg, &h, &layout.near_indices(), ne, &noise, &mut rng)?;
    let far = receive_sequential(&cfg, &h, &layout.far_indices(), fe, &noise, &mut rng)?;
    println!("near-end antennas {:?}..", &near.antennas()[..3]);
    println!("far-end antennas  {:?}..", &far.antennas()[..3]);
    for (m, y) in near.antennas().iter().zip(near.observations()).take(4) {
        println!("slot at antenna {m:>3}: y = {y:.3e}");
    }
    Ok(())
}
