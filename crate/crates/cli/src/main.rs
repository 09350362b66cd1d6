use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use aec_core::sim::{
    nfr_sweep, read_wav_mono16, run_scenario, write_metrics_csv, write_summary_csv, ScenarioConfig, Source,
};
use aec_core::{PolicyKind, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Echo cancellation simulation: synthesizes echo scenarios, runs a
/// learning-rate policy over them and writes ERLE / misalignment metrics.
#[derive(Parser, Debug)]
#[command(name = "aec-sim", version, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario and write per-frame metrics.
    Run {
        #[arg(long, value_enum, default_value_t = PolicyArg::Proposed)]
        policy: PolicyArg,
        /// Near-end talker to echo power ratio in dB (`-inf` disables the talker).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        nfr_db: f64,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every NFR / policy combination and write steady-state summaries.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        nfr_db_list: Vec<f64>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PolicyArg::Proposed, PolicyArg::Ncc, PolicyArg::Fixed])]
        policies: Vec<PolicyArg>,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Background noise to echo power ratio in dB (`-inf` disables it).
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    noise_db: f64,
    #[arg(long, default_value_t = 32.0)]
    duration_s: f64,
    #[arg(long, default_value_t = 16.0, conflicts_with = "no_path_change")]
    path_change_at_s: f64,
    /// Keep the first echo path for the whole run.
    #[arg(long)]
    no_path_change: bool,
    #[arg(long, default_value_t = 64)]
    block_size: usize,
    #[arg(long, default_value_t = 16)]
    partitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rate of the fixed policy.
    #[arg(long, default_value_t = 0.25)]
    mu: f64,
    /// Far-end recording (16-bit PCM mono, taken as 8 kHz).
    #[arg(long)]
    far_wav: Option<PathBuf>,
    /// Near-end recording, scaled to the requested NFR.
    #[arg(long)]
    near_wav: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum PolicyArg {
    Proposed,
    Fixed,
    Ncc,
}

impl PolicyArg {
    fn resolve(self, mu: f64) -> PolicyKind {
        match self {
            PolicyArg::Proposed => PolicyKind::Proposed,
            PolicyArg::Fixed => PolicyKind::Fixed(mu),
            PolicyArg::Ncc => PolicyKind::Ncc,
        }
    }
}

impl ScenarioArgs {
    fn build(&self, nfr_db: f64) -> Result<ScenarioConfig> {
        let load = |path: &Option<PathBuf>, fallback: Source| -> Result<Source> {
            match path {
                Some(p) => Ok(Source::Samples(Arc::from(read_wav_mono16(p)?))),
                None => Ok(fallback),
            }
        };
        let nominal = ScenarioConfig::nominal(self.seed);
        let cfg = ScenarioConfig {
            duration_s: self.duration_s,
            path_change_at_s: (!self.no_path_change).then_some(self.path_change_at_s),
            nfr_db,
            noise_db: self.noise_db,
            far_source: load(&self.far_wav, nominal.far_source.clone())?,
            near_source: load(&self.near_wav, nominal.near_source.clone())?,
            block_size: self.block_size,
            partitions: self.partitions,
            ..nominal
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            policy,
            nfr_db,
            scenario,
            out,
        } => {
            let cfg = scenario.build(nfr_db)?;
            let run = run_scenario(&cfg, policy.resolve(scenario.mu))?;
            write_metrics_csv(&run.rows, BufWriter::new(File::create(&out)?))?;
            let s = &run.summary;
            println!(
                "{}: erle_ss {:.2} dB, excluding switch {:.2} dB, final misalignment {:.2} dB",
                s.policy, s.erle_ss_db, s.erle_ss_excl_switch_db, s.final_misalignment_db
            );
        }
        Command::Sweep {
            nfr_db_list,
            policies,
            scenario,
            out,
        } => {
            let cfg = scenario.build(0.0)?;
            let policies: Vec<PolicyKind> = policies.iter().map(|p| p.resolve(scenario.mu)).collect();
            let table = nfr_sweep(&cfg, &nfr_db_list, &policies)?;
            write_summary_csv(&table, BufWriter::new(File::create(&out)?))?;
            println!("{} cells written to {}", table.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("aec-sim: {err}");
            if err.is_io() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
