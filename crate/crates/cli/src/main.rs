use clap::{Args, Parser, Subcommand};
use drift_cli::config::ConfigPatch;
use drift_cli::pipeline::{execute, Status};
use drift_cli::RunConfig;
use drift_core::chain::{admissible_windows, epsilon0, time_bounds, transition_count};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "drift", version, about = "Construct drifting orbits of the pendulum-rotator system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the chain and run the outer minimisation.
    Run(RunArgs),
    /// Print the admissible frequency windows for a perturbation size.
    Windows {
        #[arg(long)]
        mu: f64,
        /// Also print the transition count for this pair.
        #[arg(long, requires = "omega_f")]
        omega_i: Option<f64>,
        #[arg(long, requires = "omega_i")]
        omega_f: Option<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` configuration file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    omega_i: Option<f64>,
    #[arg(long)]
    omega_f: Option<f64>,
    /// Gradient-norm tolerance of the outer loop.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    h_max: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    bvp_tol: Option<f64>,
    #[arg(long)]
    n_override: Option<usize>,
    #[arg(long)]
    acknowledge_override: bool,
    /// Trajectory file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report file.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Zero wall-clock fields so reports are byte-identical between runs.
    #[arg(long)]
    deterministic: bool,
    /// Print the gradient norm every this many steps (0 disables).
    #[arg(long, default_value_t = 100)]
    progress: usize,
}

impl RunArgs {
    fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            mu: self.mu,
            omega_i: self.omega_i,
            omega_f: self.omega_f,
            eps: self.eps,
            alpha: self.alpha,
            h_max: self.h_max,
            max_steps: self.max_steps,
            bvp_tol: self.bvp_tol,
            n_override: self.n_override,
            acknowledge_override: self.acknowledge_override.then_some(true),
            trajectory: self.out.clone(),
            report: self.report.clone(),
            threads: self.threads,
            deterministic: self.deterministic.then_some(true),
            bvp_max_iter: None,
        }
    }
}

fn run(args: RunArgs) -> ExitCode {
    let file = match &args.config {
        None => None,
        Some(path) => {
            let text = match std::fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", path.display());
                    return ExitCode::from(Status::Io.exit_code());
                }
            };
            match ConfigPatch::parse(&text) {
                Ok(f) => Some(f),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(Status::Config.exit_code());
                }
            }
        }
    };
    let cfg = RunConfig::layered(file.as_ref(), &args.patch());
    let every = args.progress;
    let mut observe = |r: usize, g: f64| {
        if every > 0 && r % every == 0 {
            eprintln!("step {r:>6}  |grad F| = {g:.3e}");
        }
    };
    match execute(&cfg, &mut observe) {
        Ok(out) => {
            let rep = &out.report;
            eprintln!(
                "N = {}  T_d = {:.3}  T_d/N = {:.3}  steps = {}  |grad F| = {:.3e}  shadow {} ({:.3e}, {:.3e} <= {:.3e})",
                rep.n_transitions,
                rep.t_drift,
                rep.t_drift_per_n,
                rep.nesterov_steps,
                rep.final_grad_norm,
                if rep.shadow_passed { "ok" } else { "FAILED" },
                rep.shadow_dev_start,
                rep.shadow_dev_end,
                rep.shadow_bound
            );
            if out.status == Status::StepCap {
                eprintln!("error: step cap {} reached before |grad F| <= {:e}", cfg.max_steps, cfg.eps);
            }
            ExitCode::from(out.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status.exit_code())
        }
    }
}

fn windows(mu: f64, pair: Option<(f64, f64)>) -> ExitCode {
    let eps0 = match epsilon0(mu) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::Config.exit_code());
        }
    };
    let (lo, hi) = time_bounds(mu);
    println!("mu = {mu:e}\neps0 = {eps0:.9}\nt_minus = {lo:.6}\nt_plus = {hi:.6}");
    for w in admissible_windows(mu).unwrap_or_default() {
        println!(
            "window {}/{} .. {}/{}: ({:.9}, {:.9})",
            w.farey_lo.num, w.farey_lo.den, w.farey_hi.num, w.farey_hi.den, w.lo, w.hi
        );
    }
    if let Some((a, b)) = pair {
        match transition_count(a, b, mu) {
            Ok(n) => println!("n_transitions = {n}"),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(Status::Window.exit_code());
            }
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Windows { mu, omega_i, omega_f } => windows(mu, omega_i.zip(omega_f)),
    }
}
