use std::path::PathBuf;
use std::process::ExitCode;

use bandlab::ensemble::{build_covariance, sample_block_band, sample_seeds, write_sample, Boundary, LatticeSpec, Scaling};
use bandlab::harness::config::{BerezinSection, CrossoverSection};
use bandlab::harness::{experiment_title, run_experiment, ExperimentConfig, ExperimentId, RunManifest};
use bandlab::scalars::{
    bulk_constants, r_plus_minus_limit, r_plus_plus_limit, semicircle_density, LimitShifts, Shifts,
};
use bandlab::seed::Seed;
use bandlab::spectra::{gap_ratio_stats, sample_spectra, semicircle_distance, Window};
use bandlab::transfer::{compact_sector, evaluate_sigma_model, GridSpec, KernelOrder, TransferParams};
use bandlab::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

#[derive(Parser)]
#[command(name = "bandlab", version, about = "Block-band random matrices and their transfer-operator description")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    Sigma,
    Band,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Neumann,
    Periodic,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long = "W")]
    w: usize,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, value_enum, default_value = "sigma")]
    scaling: ScalingArg,
    #[arg(long, value_enum, default_value = "neumann")]
    boundary: BoundaryArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl ProfileArgs {
    fn profile(&self) -> Result<bandlab::ensemble::CovarianceProfile> {
        let scaling = match self.scaling {
            ScalingArg::Sigma => Scaling::Sigma,
            ScalingArg::Band => Scaling::Band,
        };
        let boundary = match self.boundary {
            BoundaryArg::Neumann => Boundary::Neumann,
            BoundaryArg::Periodic => Boundary::Periodic,
        };
        build_covariance(LatticeSpec::new(self.d, self.n, self.w)?, self.beta, scaling, boundary)
    }
}

#[derive(Args)]
struct PointArgs {
    #[arg(long = "E", default_value_t = 0.0, allow_hyphen_values = true)]
    energy: f64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Eight numbers: re,im of ξ₁, ξ₂, ξ₁′, ξ₂′.
    #[arg(long, value_delimiter = ',', num_args = 8, allow_hyphen_values = true,
          default_value = "0.5,0,-0.5,0,0.25,0,-0.25,0")]
    xi: Vec<f64>,
}

impl PointArgs {
    fn shifts(&self) -> Shifts {
        let c = |k: usize| Complex64::new(self.xi[2 * k], self.xi[2 * k + 1]);
        Shifts::new(c(0), c(1), c(2), c(3))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw matrices and write them with JSON sidecars.
    Ensemble {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long, default_value = "samples")]
        out: PathBuf,
    },
    /// Spectral statistics of a profile.
    Spectra {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        window: f64,
    },
    /// Gap-ratio crossover between GUE and Poisson oracles.
    Crossover {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "runs/crossover")]
        out: PathBuf,
    },
    /// Gaussian Berezin integrals against determinants.
    BerezinCheck {
        #[arg(long, default_value_t = 100)]
        matrices: usize,
        #[arg(long, default_value_t = 8)]
        max_size: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "runs/berezin")]
        out: PathBuf,
    },
    /// Closed-form limits and all intermediate constants.
    SigmaLimit {
        #[command(flatten)]
        point: PointArgs,
    },
    /// Finite-(n, β) correlator from the transfer operator.
    Transfer {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long)]
        nu: Option<usize>,
        #[arg(long)]
        ns: Option<usize>,
        #[arg(long)]
        smax: Option<f64>,
    },
    /// CSV of compact-sector eigenvalues.
    TransferSpectra {
        #[arg(long = "beta-tilde", value_delimiter = ',', default_value = "100,1000,10000")]
        beta_tilde: Vec<f64>,
        #[arg(long, default_value_t = 6)]
        lmax: u32,
    },
    /// Run an experiment from a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the registered experiments.
    ListExperiments,
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON values always serialize"));
}

fn report(manifest: &RunManifest) -> bool {
    for check in &manifest.checks {
        let bound = match check.lower {
            Some(lower) => format!("in [{lower:.3e}, {:.3e}]", check.tolerance),
            None => format!("<= {:.3e}", check.tolerance),
        };
        println!(
            "{} {:<28} measured {:.3e} {bound}{}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.measured,
            if check.gating { "" } else { " (non-gating)" }
        );
    }
    println!("{} in {:.1} s", if manifest.pass { "PASS" } else { "FAIL" }, manifest.wall_time_seconds);
    manifest.pass
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Ensemble { profile, samples, out } => {
            let p = profile.profile()?;
            std::fs::create_dir_all(&out)?;
            for (k, token) in sample_seeds(Seed(profile.seed), samples).into_iter().enumerate() {
                write_sample(&sample_block_band(&p, token), &out.join(format!("sample_{k}.bin")))?;
            }
            print_json(&json!({ "size": p.lattice.size(), "min_eigenvalue_J": p.min_eigenvalue(), "samples": samples }));
            Ok(true)
        }
        Command::Spectra { profile, samples, window } => {
            let ens = sample_spectra(&profile.profile()?, samples, Seed(profile.seed))?;
            let r = gap_ratio_stats(&ens, Window::around(0.0, window))?;
            print_json(&json!({ "semicircle_ks": semicircle_distance(&ens)?, "gap_ratio": r }));
            Ok(true)
        }
        Command::Crossover { seed, out } => {
            let mut config = ExperimentConfig::new(ExperimentId::A2, seed, out);
            config.crossover = Some(CrossoverSection::default());
            Ok(report(&run_experiment(&config)?))
        }
        Command::BerezinCheck { matrices, max_size, seed, out } => {
            let mut config = ExperimentConfig::new(ExperimentId::A3, seed, out);
            config.berezin = Some(BerezinSection { matrices, max_size, ..Default::default() });
            Ok(report(&run_experiment(&config)?))
        }
        Command::SigmaLimit { point } => {
            let xi = point.shifts();
            let bulk = bulk_constants(point.energy, 1.0)?;
            let shifts = LimitShifts::new(&bulk, point.eps, &xi);
            print_json(&json!({
                "energy": point.energy,
                "eps": point.eps,
                "rho": semicircle_density(point.energy),
                "bulk_constants": bulk,
                "limit_shifts": shifts,
                "r_plus_minus": r_plus_minus_limit(point.energy, point.eps, &xi)?,
                "r_plus_plus": r_plus_plus_limit(point.energy, point.eps, &xi)?,
                "sine_kernel_domain_ok": point.energy.abs() < 2f64.sqrt(),
            }));
            Ok(true)
        }
        Command::Transfer { point, beta, n, nu, ns, smax } => {
            let params = TransferParams { energy: point.energy, eps: point.eps, xi: point.shifts(), beta, n };
            let grid = match (nu, ns, smax) {
                (None, None, None) => None,
                (Some(n_u), Some(n_s), Some(s_max)) => Some(GridSpec { n_u, n_s, s_max }),
                _ => return Err(Error::InvalidArgument("give all of --nu, --ns, --smax or none".into())),
            };
            let v = evaluate_sigma_model(params, grid, KernelOrder::Leading)?;
            print_json(&json!({
                "value_re": v.value.re,
                "value_im": v.value.im,
                "closed_form_re": v.closed_form.re,
                "closed_form_im": v.closed_form.im,
                "rel_dev": v.relative_deviation,
                "beta_tilde": v.beta_tilde,
                "grid_report": v.grid,
            }));
            Ok(true)
        }
        Command::TransferSpectra { beta_tilde, lmax } => {
            println!("beta_tilde,l,lambda,lambda_m10,lambda_m1m1,mu");
            for b in beta_tilde {
                for l in 0..=lmax {
                    let s = compact_sector(l, b)?;
                    println!("{b},{l},{},{},{},{}", s.lambda, s.lambda_m10.re, s.lambda_m1m1.re, s.mu);
                }
            }
            Ok(true)
        }
        Command::Run { config } => Ok(report(&run_experiment(&ExperimentConfig::load(&config)?)?)),
        Command::ListExperiments => {
            for id in ExperimentId::REGISTERED {
                println!("{id}  {}", experiment_title(id));
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
