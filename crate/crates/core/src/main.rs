//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input or config, 2 size cap exceeded,
//! 3 theorem verification found a failing rule.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qaoa_mld::bits::mask_to_vars;
use qaoa_mld::constellation::{generate_instance_with_symbol, ChannelKind};
use qaoa_mld::hamiltonian::to_ising;
use qaoa_mld::harness::landscape::{global_minimum, landscape_csv};
use qaoa_mld::harness::verify::default_specs;
use qaoa_mld::harness::{
    experiment_ratio_vs_runs, experiment_ratio_vs_snr, landscape_f1, parse_joint, qml_detect, verify_theorems,
    ExperimentConfig, ParameterMode, QmlOptions,
};
use qaoa_mld::objective::{clause_weights, fast_coefficients, fast_expand, predict_zero_monomials, PRUNE_TOL};
use qaoa_mld::{Error, Result};

const VERIFY_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "qaoa-mld", version, about = "QAOA-based maximum-likelihood detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct InstanceArgs {
    /// Constellation: qpsk, 8qam, 16qam, 64qam, rect:<nI>x<nQ>, psk:<bits>,
    /// <n>x<name>, or a comma list for mixed antennas.
    #[arg(long, default_value = "qpsk")]
    constellation: String,
    #[arg(long, default_value_t = 1)]
    ntx: usize,
    #[arg(long, default_value_t = 1)]
    nrx: usize,
    #[arg(long, value_enum, default_value_t = Channel::Awgn)]
    channel: Channel,
    /// SNR in dB; `inf` gives a noiseless instance.
    #[arg(long, default_value_t = 15.0)]
    snr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Pin the transmitted joint index instead of drawing it.
    #[arg(long)]
    tx_index: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Channel {
    Awgn,
    Rayleigh,
}

impl From<Channel> for ChannelKind {
    fn from(c: Channel) -> Self {
        match c {
            Channel::Awgn => ChannelKind::Awgn,
            Channel::Rayleigh => ChannelKind::Rayleigh,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    RatioVsRuns,
    RatioVsSnr,
}

#[derive(Subcommand)]
enum Command {
    /// Detect one instance with exhaustive ML and with QAOA; prints JSON.
    Detect {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 200)]
        evals: usize,
        #[arg(long, default_value_t = 1024)]
        shots: u64,
        /// Optimise a separate schedule for every independent subsystem.
        #[arg(long)]
        per_part: bool,
        /// Also report the ratio with constants dropped.
        #[arg(long)]
        constant_free_rho: bool,
    },
    /// Expand one instance into its polynomial and spin Hamiltonian; prints JSON.
    Expand {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Depth-1 QPSK landscape over [0, π]² as CSV.
    Landscape {
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Channel::Awgn)]
        channel: Channel,
        #[arg(long, default_value_t = 0.0)]
        snr: f64,
        #[arg(long, default_value_t = 100)]
        seed: u64,
        #[arg(long)]
        tx_index: Option<usize>,
    },
    /// Approximation-ratio experiment driven by a JSON config.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the zero-coefficient rules and degree bounds on random instances.
    VerifyTheorems {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Constellations to check (repeatable); defaults to a standard set.
        #[arg(long)]
        constellation: Vec<String>,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

fn instance_of(
    args: &InstanceArgs,
) -> Result<(
    qaoa_mld::constellation::JointConstellation,
    qaoa_mld::constellation::ChannelInstance,
)> {
    let joint = parse_joint(&args.constellation, args.ntx)?;
    let inst = generate_instance_with_symbol(
        &joint,
        args.nrx,
        args.channel.into(),
        args.snr,
        args.seed,
        args.tx_index,
    )?;
    Ok((joint, inst))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Detect {
            instance,
            p,
            runs,
            evals,
            shots,
            per_part,
            constant_free_rho,
        } => {
            let (joint, inst) = instance_of(&instance)?;
            let opts = QmlOptions {
                p,
                runs,
                evals_per_run: evals,
                shots,
                seed: instance.seed,
                mode: if per_part {
                    ParameterMode::PerPart
                } else {
                    ParameterMode::Shared
                },
                ..QmlOptions::default()
            };
            let mut report = qml_detect(&inst, &joint, &opts)?;
            if !constant_free_rho {
                report.constant_free_rho = None;
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Expand { instance } => {
            let (joint, inst) = instance_of(&instance)?;
            let weights = clause_weights(&inst, &joint)?;
            let poly = fast_expand(&weights, &joint)?;
            let ising = to_ising(&poly);
            let prediction = match predict_zero_monomials(&joint) {
                Ok(pred) => {
                    let dense = fast_coefficients(&weights);
                    let scale = weights.max_weight();
                    let subsets: Vec<_> = pred
                        .predicted_zero
                        .iter()
                        .map(|&(m, rule)| {
                            json!({
                                "subset": mask_to_vars(m, joint.total_bits()),
                                "rule": rule,
                                "coeff": dense[m as usize],
                            })
                        })
                        .collect();
                    let confirmed = pred
                        .predicted_zero
                        .iter()
                        .all(|&(m, _)| dense[m as usize].abs() <= PRUNE_TOL * scale);
                    json!({
                        "degree_bound": pred.degree_bound,
                        "predicted_zero": subsets,
                        "all_confirmed": confirmed,
                    })
                }
                Err(Error::NotGray(msg)) => json!({ "skipped": msg }),
                Err(e) => return Err(e),
            };
            let doc = json!({
                "instance": inst,
                "polynomial": poly,
                "degree": poly.degree(),
                "ising": ising,
                "prediction": prediction,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::Landscape {
            grid,
            out,
            channel,
            snr,
            seed,
            tx_index,
        } => {
            let joint = parse_joint("qpsk", 1)?;
            let inst = generate_instance_with_symbol(&joint, 1, channel.into(), snr, seed, tx_index)?;
            let rows = landscape_f1(&inst, &joint, grid)?;
            fs::write(&out, landscape_csv(&rows))?;
            if let Some(m) = global_minimum(&rows) {
                eprintln!(
                    "wrote {} rows to {}; analytic minimum {:.6} at gamma={:.4}, beta={:.4}",
                    rows.len(),
                    out.display(),
                    m.f1_analytic,
                    m.gamma,
                    m.beta
                );
            }
        }
        Command::Experiment { kind, config, out } => {
            let text = fs::read_to_string(&config).map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let csv = match kind {
                ExperimentKind::RatioVsRuns => experiment_ratio_vs_runs(&cfg)?.to_csv(),
                ExperimentKind::RatioVsSnr => experiment_ratio_vs_snr(&cfg)?.to_csv(),
            };
            fs::write(&out, csv)?;
        }
        Command::VerifyTheorems {
            trials,
            seed,
            constellation,
            json,
        } => {
            let names: Vec<String> = if constellation.is_empty() {
                default_specs().into_iter().map(String::from).collect()
            } else {
                constellation
            };
            let joints = names.iter().map(|s| parse_joint(s, 1)).collect::<Result<Vec<_>>>()?;
            let report = verify_theorems(&joints, trials, seed)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.to_text());
            }
            if !report.pass() {
                return Ok(VERIFY_FAILED);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
