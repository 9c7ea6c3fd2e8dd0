//! Refined NMSE across near/far subarray splits at 40 dBm. Pass a trial
//! count as the first argument (default 20).

use pinching_csi::harness::{sweep_subarray, ExperimentConfig, Method};

fn main() -> pinching_csi::Result<()> {
    let trials = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let config = ExperimentConfig {
        trials,
        methods: vec![Method::Refined, Method::Coarse],
        ..ExperimentConfig::default()
    };
    let table = sweep_subarray(&config)?;
    for row in table.series(Method::Refined) {
        println!("{:>6}  mean NMSE {:.4e}", row.sweep_value, row.mean_nmse);
    }
    Ok(())
}
