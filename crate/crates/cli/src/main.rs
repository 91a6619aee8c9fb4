//! `phasecap` — capacity bounds for the AWGN channel with Wiener phase noise.
//!
//! Exit codes: 0 on success, 1 on a computation error, 2 on a configuration
//! error (bad flags or config file).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use phasecap::bounds_upper::{default_mu_grid, default_r_grid, upper_bound_cu};
use phasecap::model::snr_db;
use phasecap::quad::{
    solve_aux_params, solve_input_params_with, InputDistParams, InputSolveOptions,
};
use phasecap::rate::{estimate_rate, InputLaw, RateOptions};
use phasecap::refs::{c_awgn, c_lapidoth, crossover_snr_db};
use phasecap::sampler::draw_input_block;
use phasecap::sweep::{parse_config, run_sweep, write_artifacts};
use phasecap::{ChannelParams64, Error};

#[derive(Parser)]
#[command(
    name = "phasecap",
    version,
    about = "Capacity bounds for the AWGN channel with Wiener phase noise"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the auxiliary output density parameters (alpha_u, beta_u)
    SolveAux(SolveAuxArgs),
    /// Solve the block input density parameters (alpha_l, beta_l)
    SolveInput(SolveInputArgs),
    /// Evaluate the grid-optimized upper bound C_U and closed-form C_U~
    UpperBound(UpperBoundArgs),
    /// Estimate an achievable-rate lower bound by particle filtering
    LowerBound(LowerBoundArgs),
    /// Draw input symbol blocks by rejection sampling, as CSV
    SampleInput(SampleInputArgs),
    /// Reference capacities (AWGN, high-SNR phase noise) and their crossover
    Refs(RefsArgs),
    /// SNR where the AWGN and high-SNR phase-noise capacities intersect
    Crossover(CrossoverArgs),
    /// Run SNR sweeps from a config file, emitting CSV + JSON artifacts
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct ChannelArgs {
    /// Phase-innovation variance in rad^2
    #[arg(long)]
    sigma_delta_sq: f64,
    /// Per-component AWGN variance (alternative to --snr-db)
    #[arg(long, conflicts_with = "snr_db")]
    sigma_w_sq: Option<f64>,
    /// SNR in dB, resolved as sigma_w_sq = es / (2 * 10^(snr/10))
    #[arg(long)]
    snr_db: Option<f64>,
    /// Average symbol power
    #[arg(long, default_value_t = 1.0)]
    es: f64,
}

impl ChannelArgs {
    fn params(&self) -> Result<ChannelParams64, CliError> {
        let params = match (self.sigma_w_sq, self.snr_db) {
            (Some(sw2), None) => ChannelParams64::new(sw2, self.sigma_delta_sq, self.es),
            (None, Some(db)) => ChannelParams64::from_snr_db(db, self.sigma_delta_sq, self.es),
            _ => {
                return Err(CliError::config(
                    "exactly one of --sigma-w-sq / --snr-db is required",
                ))
            }
        };
        params.map_err(|e| CliError::config(&e.to_string()))
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this path instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct SolveAuxArgs {
    #[command(flatten)]
    ch: ChannelArgs,
    /// Offset parameter of the auxiliary density
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SolveInputArgs {
    #[command(flatten)]
    ch: ChannelArgs,
    /// Block length (2 or 3)
    #[arg(long)]
    m: usize,
    /// Monte-Carlo samples for the m = 3 solve
    #[arg(long, default_value_t = 10_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct UpperBoundArgs {
    #[command(flatten)]
    ch: ChannelArgs,
    /// Samples per entropy estimate
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum InputKind {
    M2,
    M3,
    Gaussian,
    Gamma,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[command(flatten)]
    ch: ChannelArgs,
    /// Input law: the solved block densities or a reference law
    #[arg(long, value_enum)]
    input: InputKind,
    #[arg(long, default_value_t = 10_000)]
    particles: usize,
    #[arg(long, default_value_t = 1000)]
    uses: usize,
    /// Monte-Carlo samples for the m = 3 density solve
    #[arg(long, default_value_t = 10_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SampleInputArgs {
    #[command(flatten)]
    ch: ChannelArgs,
    /// Block length (2 or 3)
    #[arg(long)]
    m: usize,
    /// Number of blocks to draw
    #[arg(long, default_value_t = 1000)]
    blocks: usize,
    /// Monte-Carlo samples for the m = 3 density solve
    #[arg(long, default_value_t = 10_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write to this path instead of stdout (always CSV)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RefsArgs {
    #[command(flatten)]
    ch: ChannelArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CrossoverArgs {
    /// Phase-innovation variance in rad^2
    #[arg(long)]
    sigma_delta_sq: f64,
    #[arg(long, default_value_t = 1.0)]
    es: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config file (flat key-value sections)
    #[arg(long)]
    config: PathBuf,
    /// Output prefix; artifacts land at <prefix><name>.csv/.json
    #[arg(long, default_value = "sweep_")]
    out: PathBuf,
}

struct CliError {
    msg: String,
    code: u8,
}

impl CliError {
    fn config(msg: &str) -> Self {
        Self {
            msg: msg.to_string(),
            code: 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidConfig(_) => 2,
            _ => 1,
        };
        Self {
            msg: e.to_string(),
            code,
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError {
            msg: format!("writing {}: {e}", path.display()),
            code: 1,
        }),
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn solve_dist(
    params: &ChannelParams64,
    m: usize,
    samples: usize,
) -> Result<InputDistParams<f64>, CliError> {
    let opts = InputSolveOptions {
        mc_samples: samples,
        ..InputSolveOptions::default()
    };
    Ok(solve_input_params_with(params, m, &opts)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::SolveAux(a) => {
            let params = a.ch.params()?;
            let aux = solve_aux_params(&params, a.mu)?;
            let text = match a.output.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "sigma_w_sq": params.sigma_w_sq(),
                    "sigma_delta_sq": params.sigma_delta_sq(),
                    "es": params.es(),
                    "snr_db": snr_db(&params),
                    "mu": aux.mu,
                    "alpha_u": aux.alpha_u,
                    "beta_u": aux.beta_u,
                    "residual_mass": aux.residuals.0,
                    "residual_moment": aux.residuals.1,
                    "iterations": aux.iterations,
                }))
                .unwrap(),
                Format::Csv => format!(
                    "mu,alpha_u,beta_u,residual_mass,residual_moment,iterations\n{},{:.9e},{:.9e},{:.3e},{:.3e},{}\n",
                    aux.mu, aux.alpha_u, aux.beta_u, aux.residuals.0, aux.residuals.1, aux.iterations
                ),
            };
            emit(&text, a.output.out.as_deref())
        }
        Cmd::SolveInput(a) => {
            let params = a.ch.params()?;
            let opts = InputSolveOptions {
                mc_samples: a.samples,
                mc_seed: phasecap::special::derive_seed(a.seed, 0x10),
                ..InputSolveOptions::default()
            };
            let dist = solve_input_params_with(&params, a.m, &opts)?;
            let text = match a.output.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "sigma_w_sq": params.sigma_w_sq(),
                    "sigma_delta_sq": params.sigma_delta_sq(),
                    "es": params.es(),
                    "snr_db": snr_db(&params),
                    "m": dist.m,
                    "alpha_l": dist.alpha_l,
                    "beta_l": dist.beta_l,
                    "residual_mass": dist.residuals.0,
                    "residual_moment": dist.residuals.1,
                    "iterations": dist.iterations,
                    "mc_seed": dist.mc_seed,
                    "mc_samples": dist.mc_samples,
                }))
                .unwrap(),
                Format::Csv => format!(
                    "m,alpha_l,beta_l,residual_mass,residual_moment,iterations\n{},{:.9e},{:.9e},{:.3e},{:.3e},{}\n",
                    dist.m, dist.alpha_l, dist.beta_l, dist.residuals.0, dist.residuals.1, dist.iterations
                ),
            };
            emit(&text, a.output.out.as_deref())
        }
        Cmd::UpperBound(a) => {
            let params = a.ch.params()?;
            let mu_grid = default_mu_grid(params.es());
            let r_grid = default_r_grid(params.es());
            let res = upper_bound_cu(&params, &mu_grid, &r_grid, a.samples, a.seed)?;
            let text = match a.output.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "snr_db": res.snr_db,
                    "sigma_w_sq": params.sigma_w_sq(),
                    "sigma_delta_sq": params.sigma_delta_sq(),
                    "es": params.es(),
                    "c_u": res.c_u,
                    "c_u_tilde": res.c_u_tilde,
                    "argmax_r": res.argmax_r,
                    "argmin_mu": res.argmin_mu,
                    "alpha_u": res.aux.alpha_u,
                    "beta_u": res.aux.beta_u,
                    "aux_residuals": [res.aux.residuals.0, res.aux.residuals.1],
                    "bound_per_mu": res.bound_per_mu,
                    "mu_grid": mu_grid,
                    "r_grid": r_grid,
                    "entropy_samples": a.samples,
                    "seed": a.seed,
                }))
                .unwrap(),
                Format::Csv => format!(
                    "snr_db,c_u,c_u_tilde,argmax_r,argmin_mu\n{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}\n",
                    res.snr_db, res.c_u, res.c_u_tilde, res.argmax_r, res.argmin_mu
                ),
            };
            emit(&text, a.output.out.as_deref())
        }
        Cmd::LowerBound(a) => {
            let params = a.ch.params()?;
            let law = match a.input {
                InputKind::M2 => InputLaw::Block(solve_dist(&params, 2, a.samples)?),
                InputKind::M3 => InputLaw::Block(solve_dist(&params, 3, a.samples)?),
                InputKind::Gaussian => InputLaw::Gaussian,
                InputKind::Gamma => InputLaw::GammaAmplitude,
            };
            let est = estimate_rate(
                &params,
                &law,
                a.uses,
                a.particles,
                a.seed,
                &RateOptions::default(),
            )?;
            let text = match a.output.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "snr_db": snr_db(&params),
                    "sigma_w_sq": params.sigma_w_sq(),
                    "sigma_delta_sq": params.sigma_delta_sq(),
                    "es": params.es(),
                    "input": est.input_label,
                    "bits_per_use": est.bits_per_use,
                    "std_err": est.std_err,
                    "n_uses": est.n_uses,
                    "n_particles": est.n_particles,
                    "collapse_count": est.collapse_count,
                    "unreliable": est.unreliable,
                    "min_uncond_ess": est.min_uncond_ess,
                    "seed": a.seed,
                }))
                .unwrap(),
                Format::Csv => format!(
                    "snr_db,input,bits_per_use,std_err,n_uses,n_particles,collapses,unreliable\n{:.9e},{},{:.9e},{:.9e},{},{},{},{}\n",
                    snr_db(&params), est.input_label, est.bits_per_use, est.std_err,
                    est.n_uses, est.n_particles, est.collapse_count, est.unreliable
                ),
            };
            emit(&text, a.output.out.as_deref())
        }
        Cmd::SampleInput(a) => {
            let params = a.ch.params()?;
            let dist = solve_dist(&params, a.m, a.samples)?;
            let drawn = draw_input_block(&params, &dist, a.blocks, a.seed)?;
            let m = dist.m;
            let mut text = String::new();
            text.push_str("block");
            for i in 1..=m {
                text.push_str(&format!(",r{i}"));
            }
            for i in 1..=m {
                text.push_str(&format!(",theta{i}"));
            }
            text.push('\n');
            let amps = drawn.block.amplitudes();
            let phases = drawn.block.phases();
            for b in 0..a.blocks {
                text.push_str(&format!("{b}"));
                for i in 0..m {
                    text.push_str(&format!(",{:.9e}", amps[b * m + i]));
                }
                for i in 0..m {
                    text.push_str(&format!(",{:.9e}", phases[b * m + i]));
                }
                text.push('\n');
            }
            if drawn.stats.inefficient_proposal {
                eprintln!(
                    "warning: rejection acceptance rate {:.2e} is below 1e-4",
                    drawn.stats.acceptance_rate()
                );
            }
            emit(&text, a.out.as_deref())
        }
        Cmd::Refs(a) => {
            let params = a.ch.params()?;
            let awgn = c_awgn(&params);
            let lap = c_lapidoth(&params)?;
            let cross = crossover_snr_db(&params)?;
            let text = match a.output.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "snr_db": snr_db(&params),
                    "sigma_w_sq": params.sigma_w_sq(),
                    "sigma_delta_sq": params.sigma_delta_sq(),
                    "es": params.es(),
                    "c_awgn": awgn,
                    "c_lapidoth": lap,
                    "crossover_snr_db": cross,
                }))
                .unwrap(),
                Format::Csv => format!(
                    "snr_db,c_awgn,c_lapidoth,crossover_snr_db\n{:.9e},{:.9e},{:.9e},{:.9e}\n",
                    snr_db(&params), awgn, lap, cross
                ),
            };
            emit(&text, a.output.out.as_deref())
        }
        Cmd::Crossover(a) => {
            let params = ChannelParams64::new(1e-3, a.sigma_delta_sq, a.es)
                .map_err(|e| CliError::config(&e.to_string()))?;
            let cross = crossover_snr_db(&params)?;
            let text = match a.output.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "sigma_delta_sq": a.sigma_delta_sq,
                    "es": a.es,
                    "crossover_snr_db": cross,
                }))
                .unwrap(),
                Format::Csv => format!(
                    "sigma_delta_sq,crossover_snr_db\n{:.9e},{:.9e}\n",
                    a.sigma_delta_sq, cross
                ),
            };
            emit(&text, a.output.out.as_deref())
        }
        Cmd::Sweep(a) => {
            let text = std::fs::read_to_string(&a.config).map_err(|e| {
                CliError::config(&format!("reading {}: {e}", a.config.display()))
            })?;
            let configs = parse_config(&text)?;
            for cfg in &configs {
                let outcome = run_sweep(cfg)?;
                let (csv, jsonp) = write_artifacts(&outcome, &a.out)?;
                eprintln!("wrote {} and {}", csv.display(), jsonp.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
