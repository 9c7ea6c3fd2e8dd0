//! Antenna selection from an estimated channel and the rate it achieves on
//! the true channel.

use pinching_csi::harness::{run_trial, ExperimentConfig, Method};

fn main() -> pinching_csi::Result<()> {
    let config = ExperimentConfig::default();
    for t in 0..3 {
        let record = run_trial(&config, t)?;
        println!("trial {t}");
        for method in [Method::PerfectCsi, Method::Refined, Method::Coarse, Method::Ls] {
            match record.outcome(method) {
                Some(m) => println!(
                    "  {:<10} antenna {:>3}, rate {:.4} bit/s/Hz, NMSE {:.3e}",
                    method.name(),
                    m.selected_antenna,
                    m.rate,
                    m.nmse
                ),
                None => println!("  {:<10} failed", method.name()),
            }
        }
    }
    Ok(())
}
