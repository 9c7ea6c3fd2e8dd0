use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pinching_csi::harness::{
    parse_methods, power_label, run_point, summarize, sweep_power, sweep_subarray, Experiment,
    ExperimentConfig, SweepTable,
};

#[derive(Parser)]
#[command(name = "pinching-csi", version, about = "Channel estimation experiments for pinching-antenna waveguides")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every method at the highest configured pilot power.
    Run(Common),
    /// Sweep the pilot power list of the configuration.
    SweepPower(Common),
    /// Sweep the near/far subarray splits of the configuration.
    SweepSubarray(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// CSV destination; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma separated subset of LS,Coarse,Refined,Oracle,PerfectCSI.
    #[arg(long)]
    methods: Option<String>,
}

impl Common {
    fn load(&self) -> pinching_csi::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.trials = trials;
        }
        if let Some(list) = &self.methods {
            cfg.methods = parse_methods(list)?;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(command: &Command) -> pinching_csi::Result<()> {
    let (common, run): (&Common, fn(&ExperimentConfig) -> pinching_csi::Result<SweepTable>) = match command {
        Command::Run(c) => (c, run_single),
        Command::SweepPower(c) => (c, sweep_power),
        Command::SweepSubarray(c) => (c, sweep_subarray),
    };
    let cfg = common.load()?;
    let table = run(&cfg)?;
    match &cfg.output {
        Some(path) => table.write_csv(path)?,
        None => print!("{}", table.to_csv()),
    }
    for row in table.rows.iter().filter(|r| r.failures > 0) {
        eprintln!("{} at {}: {} failed trials", row.method, row.sweep_value, row.failures);
    }
    Ok(())
}

fn run_single(cfg: &ExperimentConfig) -> pinching_csi::Result<SweepTable> {
    let point = Experiment::default_point(cfg);
    let records = run_point(cfg, point)?;
    Ok(SweepTable {
        rows: summarize(cfg, &power_label(cfg.max_pilot_power_dbm()), &records),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
