use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use dramtrojan::exploit::{exploit_demo, ExploitConfig, DEFAULT_SECRET};
use dramtrojan::report::Report;
use dramtrojan::scenario::{Scenario, TriggerMode};
use dramtrojan::trigger_pattern;
use dramtrojan::{defense_eval, mc, run, sweep, trace};

#[derive(Parser)]
#[command(name = "dramtrojan", version, about = "DRAM Trojan scenario runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Counter,
    Analog,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    TriggerCapacitance,
    DutyCycle,
    RetentionVoltage,
    Mc,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a trace against a scenario.
    Run { scenario: PathBuf, trace: PathBuf },
    /// Scripted leak of a secret through the wordline short.
    ExploitDemo {
        #[arg(long, default_value_t = DEFAULT_SECRET)]
        secret: u64,
        #[arg(long, value_enum, default_value_t = Mode::Counter)]
        mode: Mode,
        /// Trigger accesses before the adversary reads (default: N_SET).
        #[arg(long)]
        accesses: Option<u64>,
    },
    /// Parameter sweeps, one record per point.
    Sweep {
        #[arg(value_enum)]
        kind: SweepKind,
        /// Comma-separated points: fF, ns of t_off, or volts.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long, default_value_t = 10)]
        t_on: u64,
        #[arg(long, default_value_t = 1)]
        t_off: u64,
        #[arg(long, default_value_t = 25.0)]
        temp: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Monte-Carlo retention failure rates.
    Mc {
        #[arg(long, value_delimiter = ',', default_values_t = [-0.2, 0.3, 0.4])]
        v_wl: Vec<f64>,
        #[arg(long, default_value_t = 25.0)]
        temp: f64,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the scenario's payload against its defenses.
    DefenseEval { scenario: PathBuf },
    /// Fixed payload/defense matrix.
    DefenseMatrix,
}

fn execute(cmd: Cmd) -> anyhow::Result<Report> {
    Ok(match cmd {
        Cmd::Run { scenario, trace: path } => {
            let s = Scenario::load(&scenario).with_context(|| format!("loading {}", scenario.display()))?;
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            run::run_trace(&s, &trace::parse_trace(&text)?)?
        }
        Cmd::ExploitDemo { secret, mode, accesses } => {
            let mode = match mode {
                Mode::Counter => TriggerMode::Counter,
                Mode::Analog => TriggerMode::Analog,
            };
            let base = ExploitConfig::default();
            exploit_demo(&ExploitConfig { secret, mode, trigger_accesses: accesses.unwrap_or(base.n_set), ..base })?
        }
        Cmd::Sweep { kind, values, t_on, t_off, temp, seed, threads } => match kind {
            SweepKind::TriggerCapacitance => {
                let caps = values.unwrap_or_else(|| vec![1.0, 5.0, 20.0]);
                sweep::trigger_capacitance(&caps, trigger_pattern(t_on, t_off), threads)?
            }
            SweepKind::DutyCycle => {
                let offs: Vec<u64> = match values {
                    Some(v) => v.iter().map(|x| x.round() as u64).collect(),
                    None => (1..=23).step_by(2).collect(),
                };
                sweep::duty_cycle(t_on, &offs, trigger_pattern(t_on, t_off).max_accesses, threads)?
            }
            SweepKind::RetentionVoltage => {
                let v = values.unwrap_or_else(|| (0..=16).map(|i| -0.2 + 0.05 * i as f64).collect());
                sweep::retention_voltage(&v, temp)?
            }
            SweepKind::Mc => {
                let v = values.unwrap_or_else(|| vec![-0.2, 0.3, 0.4]);
                mc::mc_sweep(&v, temp, &Scenario::default().variation, seed, threads)?
            }
        },
        Cmd::Mc { v_wl, temp, sigma, trials, seed, threads } => {
            let mut section = Scenario::default().variation;
            section.sigma_vth = sigma;
            section.n_trials = trials;
            mc::mc_sweep(&v_wl, temp, &section, seed, threads)?
        }
        Cmd::DefenseEval { scenario } => {
            let s = Scenario::load(&scenario).with_context(|| format!("loading {}", scenario.display()))?;
            defense_eval::defense_eval(&s)?
        }
        Cmd::DefenseMatrix => defense_eval::defense_matrix()?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(report) => {
            print!("{report}");
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
