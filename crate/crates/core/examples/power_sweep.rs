//! Mean NMSE and rate of every method across pilot power. Pass a trial
//! count as the first argument (default 20).

use pinching_csi::harness::{sweep_power, ExperimentConfig};

fn main() -> pinching_csi::Result<()> {
    let trials = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let config = ExperimentConfig { trials, ..ExperimentConfig::default() };
    print!("{}", sweep_power(&config)?.to_csv());
    Ok(())
}
