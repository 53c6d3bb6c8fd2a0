use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use earlystop::complexity::audit_at;
use earlystop::sim::{curves_csv, curves_for_config, run_experiment, ExperimentConfig};
use earlystop::{
    balancing_stop, build_gram, critical_radius, default_alpha, eigensystem, estimate_beta_with, estimate_sigma_auto,
    estimate_sigma_finite_rank, estimate_sigma_smoothed, holdout_stop, load_dataset, local_complexity_stop, mdp_stop,
    oracle_stop, rotate, theoretical_mdp_stop, vfold_stop, BetaMethod, Dataset, EigenSystem, EtaChoice, FilterFamily,
    FilterPolicy, FilterSpec, KernelKind, OracleMode, RotatedSample, StoppingRule, DEFAULT_FOLDS, DEFAULT_RANK_TOL,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "earlystop", version, about = "Kernel regression with early-stopped spectral filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Options shared by commands that fit a filter to a dataset.
#[derive(clap::Args)]
struct FitArgs {
    /// CSV with columns x,y or x,y,f_star.
    #[arg(long)]
    data: PathBuf,
    /// sobolev | poly:<degree> | gaussian:<bandwidth> | laplace:<bandwidth>
    #[arg(long, default_value = "sobolev")]
    kernel: KernelKind,
    /// gd | krr
    #[arg(long, default_value = "gd")]
    family: FilterFamily,
    /// Step size, or "auto".
    #[arg(long, default_value = "auto")]
    eta: String,
    /// Search horizon; defaults to 1e6/eta.
    #[arg(long)]
    t_max: Option<f64>,
}

impl FitArgs {
    fn policy(&self) -> Result<FilterPolicy> {
        let eta = if self.eta.eq_ignore_ascii_case("auto") {
            EtaChoice::Auto
        } else {
            EtaChoice::Fixed(self.eta.parse().with_context(|| format!("bad --eta {:?}", self.eta))?)
        };
        Ok(FilterPolicy { family: self.family, eta, t_max: self.t_max })
    }
}

struct Fitted {
    data: Dataset,
    eig: EigenSystem,
    spec: FilterSpec,
}

fn fit(args: &FitArgs) -> Result<Fitted> {
    let data = load_dataset(&args.data)?;
    let eig = eigensystem(&build_gram(args.kernel, data.sample.xs())?, DEFAULT_RANK_TOL)?;
    let spec = args.policy()?.resolve(&eig)?;
    Ok(Fitted { data, eig, spec })
}

impl Fitted {
    fn rotated(&self, sigma2: Option<f64>) -> Result<RotatedSample> {
        Ok(rotate(&self.eig, self.data.sample.ys(), self.data.f_star.as_deref(), sigma2)?)
    }

    fn sigma2(&self, arg: &str, rot: &RotatedSample) -> Result<f64> {
        match arg {
            "estimate" | "estimate:auto" => Ok(estimate_sigma_auto(rot, &self.eig, &self.spec)?.sigma2_hat),
            "estimate:finite_rank" => Ok(estimate_sigma_finite_rank(rot, &self.eig)?.sigma2_hat),
            "estimate:smoothed" => Ok(estimate_sigma_smoothed(rot, &self.eig, &self.spec, None)?.sigma2_hat),
            v => v.parse().with_context(|| format!("bad --sigma2 {v:?}")),
        }
    }

    fn alpha(&self, arg: &str) -> Result<f64> {
        if arg.eq_ignore_ascii_case("auto") {
            return Ok(default_alpha(estimate_beta_with(&self.eig, BetaMethod::TopTwo)?).alpha);
        }
        arg.parse().with_context(|| format!("bad --alpha {arg:?}"))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimand {
    Sigma2,
    Beta,
    Alpha,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Auto,
    FiniteRank,
    Smoothed,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seeded experiment and write report.json plus CSV summaries.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bias, variance, risk, and empirical-risk curves for one dataset of an experiment.
    Curves {
        #[arg(long)]
        config: PathBuf,
        /// Sample size; defaults to the first entry of n_grid.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply one stopping rule to a dataset and print the outcome as JSON.
    Stop {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        rule: StoppingRule,
        /// Smoothing level, or "auto" for 1/(beta_hat + 1).
        #[arg(long, default_value = "0")]
        alpha: String,
        /// Noise variance: a number, "estimate", "estimate:finite_rank", or "estimate:smoothed".
        #[arg(long, default_value = "estimate")]
        sigma2: String,
        /// Seed of the split for hold-out and cross-validation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_FOLDS)]
        folds: usize,
        /// Norm bound used by the complexity rule.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        /// Oracle rule on the realized instead of the expected risk.
        #[arg(long)]
        realized: bool,
    },
    /// Estimate the noise variance, the eigenvalue decay, or the smoothing level.
    Estimate {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, value_enum)]
        what: Estimand,
        #[arg(long, value_enum, default_value = "auto")]
        method: NoiseArg,
        /// Horizon of the smoothed noise estimator.
        #[arg(long)]
        horizon: Option<f64>,
        /// Use a least-squares log-log fit over the top 20 eigenvalues for beta.
        #[arg(long)]
        loglog: bool,
    },
    /// Critical radius, statistical dimension, and decay diagnostics.
    Complexity {
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn stop(
    args: &FitArgs,
    rule: StoppingRule,
    alpha: &str,
    sigma2: &str,
    seed: u64,
    folds: usize,
    radius: f64,
    realized: bool,
) -> Result<()> {
    let f = fit(args)?;
    let known: Option<f64> = sigma2.parse().ok();
    let rot = f.rotated(known)?;
    if rule.needs_oracle() && (f.data.f_star.is_none() || known.is_none()) {
        bail!("rule {rule} needs an f_star column and a numeric --sigma2");
    }
    let out = match rule {
        StoppingRule::Mdp | StoppingRule::SmoothedMdp => {
            let mut o = mdp_stop(&rot, &f.eig, &f.spec, f.alpha(alpha)?, f.sigma2(sigma2, &rot)?)?;
            o.rule = rule;
            o
        }
        StoppingRule::TheoreticalMdp => theoretical_mdp_stop(&rot, &f.eig, &f.spec, f.alpha(alpha)?)?,
        StoppingRule::Balancing => balancing_stop(&rot, &f.eig, &f.spec, f.alpha(alpha)?)?,
        StoppingRule::Oracle => {
            let mode = if realized { OracleMode::Realized } else { OracleMode::Expected };
            oracle_stop(&rot, &f.eig, &f.spec, mode)?
        }
        StoppingRule::LocalComplexity => {
            local_complexity_stop(&f.eig, &f.spec, f.sigma2(sigma2, &rot)?.sqrt(), radius)?
        }
        StoppingRule::HoldOut => holdout_stop(&f.data.sample, args.kernel, &args.policy()?, seed)?,
        StoppingRule::VFold => vfold_stop(&f.data.sample, args.kernel, &args.policy()?, folds, seed)?,
    };
    print_json(&out)
}

#[derive(Serialize)]
struct BetaOutput {
    beta_hat: f64,
    method: BetaMethod,
}

#[derive(Serialize)]
struct AlphaOutput {
    beta_hat: f64,
    alpha: f64,
    fallback: bool,
}

fn estimate(args: &FitArgs, what: Estimand, method: NoiseArg, horizon: Option<f64>, loglog: bool) -> Result<()> {
    let f = fit(args)?;
    let beta_method = if loglog { BetaMethod::LogLogFit } else { BetaMethod::TopTwo };
    match what {
        Estimand::Sigma2 => {
            let rot = f.rotated(None)?;
            let est = match method {
                NoiseArg::Auto if horizon.is_none() => estimate_sigma_auto(&rot, &f.eig, &f.spec)?,
                NoiseArg::FiniteRank => estimate_sigma_finite_rank(&rot, &f.eig)?,
                NoiseArg::Auto | NoiseArg::Smoothed => estimate_sigma_smoothed(&rot, &f.eig, &f.spec, horizon)?,
            };
            print_json(&est)
        }
        Estimand::Beta => {
            print_json(&BetaOutput { beta_hat: estimate_beta_with(&f.eig, beta_method)?, method: beta_method })
        }
        Estimand::Alpha => {
            let beta_hat = estimate_beta_with(&f.eig, beta_method)?;
            let choice = default_alpha(beta_hat);
            print_json(&AlphaOutput { beta_hat, alpha: choice.alpha, fallback: choice.fallback })
        }
    }
}

#[derive(Serialize)]
struct ComplexityOutput {
    n: usize,
    rank: usize,
    critical: earlystop::CriticalRadiusResult,
    audit: earlystop::AssumptionAudit,
}

fn complexity(args: &FitArgs, alpha: f64, radius: f64, sigma: f64, tol: f64) -> Result<()> {
    let f = fit(args)?;
    let critical = critical_radius(&f.eig, alpha, radius, sigma, tol)?;
    let audit = audit_at(&f.eig, &critical);
    print_json(&ComplexityOutput { n: f.eig.n(), rank: f.eig.rank(), critical, audit })
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_experiment(&cfg)?;
            report.write_dir(&out)?;
            eprintln!("wrote {} records to {}", report.records.len(), out.display());
            Ok(())
        }
        Command::Curves { config, n, points, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let n = n.unwrap_or(cfg.n_grid[0]);
            let rows = curves_for_config(&cfg, n, points)?;
            write_or_print(out.as_deref(), &curves_csv(&rows))
        }
        Command::Stop { fit, rule, alpha, sigma2, seed, folds, radius, realized } => {
            stop(&fit, rule, &alpha, &sigma2, seed, folds, radius, realized)
        }
        Command::Estimate { fit, what, method, horizon, loglog } => estimate(&fit, what, method, horizon, loglog),
        Command::Complexity { fit, alpha, radius, sigma, tol } => complexity(&fit, alpha, radius, sigma, tol),
    }
}
