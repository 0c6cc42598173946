//! `spinsyn` command-line front end.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::actor::UpdateRule;
use crate::config::{parse_config, Config};
use crate::device::{
    apply_train, default_map_axes, pulse_map_sweep, DeviceState, PulseSpec, REFERENCE_DEPRESSION_PULSE,
    REFERENCE_POTENTIATION_PULSE, REFERENCE_PULSE_COUNT,
};
use crate::error::{Error, Result};
use crate::harness::{compare_rules, lr_sweep, run_trials, ArmSummary};
use crate::output;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spinsyn", version, about = "Spin-valve synapse actor-critic XOR experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Configuration file of `section.key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Overrides `harness.master_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for trials (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub parallelism: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train `harness.n_trials` actor-critic pairs and write learning_curve.csv.
    Train {
        #[arg(long)]
        rule: Option<UpdateRule>,
        #[arg(long)]
        lr: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the hidden learning rate and write sweep.csv.
    Sweep {
        /// Sweep a single rule instead of both.
        #[arg(long)]
        rule: Option<UpdateRule>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the power-law and linear rules; writes comparison.csv and stats.csv.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Pulse-parameter characterization; writes pulse_map.csv.
    DeviceMap {
        #[command(flatten)]
        common: Common,
    },
    /// Render a CSV written by another subcommand as SVG.
    Plot {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::ConfigLine { .. } => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

fn load(common: &Common) -> Result<Config> {
    let mut cfg = match &common.config {
        Some(p) => parse_config(p)?,
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.experiment.master_seed = seed;
    }
    Ok(cfg)
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

fn parallelism(common: &Common) -> Option<usize> {
    common.parallelism.map(|n| n as usize)
}

fn describe(a: &ArmSummary) -> String {
    format!(
        "{:<9} lr {:.3}  mean {:.1}  std {:.1}  converged {}/{}",
        a.rule,
        a.lr_hidden,
        a.mean,
        a.std,
        a.n_converged,
        a.n_trials()
    )
}

pub fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Train { rule, lr, common } => {
            let cfg = load(&common)?;
            let exp = &cfg.experiment;
            let lr = match (lr, rule) {
                (Some(v), _) => v,
                (None, Some(r)) => exp.lr_for(r),
                (None, None) => exp.actor.lr_hidden,
            };
            let rule = rule.unwrap_or(exp.actor.update_rule);
            prepare_out(&common.out)?;
            let trials = run_trials(exp, rule, lr, parallelism(&common))?;
            output::write_learning_curve_csv(&common.out.join("learning_curve.csv"), &trials)?;
            println!("{}", describe(&ArmSummary::from_trials(rule, lr, &trials)));
        }
        Command::Sweep { rule, common } => {
            let cfg = load(&common)?;
            prepare_out(&common.out)?;
            let rules = match rule {
                Some(r) => vec![r],
                None => UpdateRule::ALL.to_vec(),
            };
            let mut points = Vec::new();
            for r in rules {
                let res = lr_sweep(&cfg.experiment, r, parallelism(&common))?;
                println!("{:<9} best lr {:.3}", r, res.best_lr);
                points.extend(res.points);
            }
            output::write_sweep_csv(&common.out.join("sweep.csv"), &points)?;
        }
        Command::Compare { common } => {
            let cfg = load(&common)?;
            prepare_out(&common.out)?;
            let report = compare_rules(&cfg.experiment, parallelism(&common))?;
            output::write_comparison_csv(&common.out.join("comparison.csv"), &report)?;
            output::write_stats_csv(&common.out.join("stats.csv"), &report.welch)?;
            for a in &report.arms {
                println!("{}", describe(a));
            }
            let w = &report.welch;
            println!("welch t {:.4}  nu {:.2}  p(one-sided) {:.4}  p(two-sided) {:.4}", w.t, w.nu, w.p_one_sided, w.p_two_sided);
        }
        Command::DeviceMap { common } => {
            let cfg = load(&common)?;
            prepare_out(&common.out)?;
            let p = &cfg.device;
            let (volts, durs) = default_map_axes();
            let map = pulse_map_sweep(&volts, &durs, REFERENCE_PULSE_COUNT, p)?;
            output::write_pulse_map_csv(&common.out.join("pulse_map.csv"), &map)?;
            let train = |pulse: PulseSpec, start: DeviceState| apply_train(start, pulse, REFERENCE_PULSE_COUNT, p);
            let pot = train(REFERENCE_POTENTIATION_PULSE, DeviceState::low(p)).conductance() / p.g_min;
            let dep = p.g_max / train(REFERENCE_DEPRESSION_PULSE, DeviceState::high(p)).conductance();
            println!("tau {:.8e}", p.pulse_time_constant_tau);
            println!("potentiation ON/OFF (2.5 V, 5 ms, {REFERENCE_PULSE_COUNT} pulses) {pot:.3}");
            println!("depression ON/OFF (-2.35 V, 5 ms, {REFERENCE_PULSE_COUNT} pulses) {dep:.3}");
        }
        Command::Plot { input, common } => {
            let text = fs::read_to_string(&input).map_err(|e| Error::io(format!("reading {}", input.display()), e))?;
            let svg = output::plot_csv(&text)?;
            prepare_out(&common.out)?;
            let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
            let path = common.out.join(format!("{stem}.svg"));
            fs::write(&path, svg).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        }
    }
    Ok(())
}
