use std::path::PathBuf;
use std::process::ExitCode;

use aorhb_cli::{run_experiment, CliResult, Experiment, ExperimentConfig, Mode, Overrides, Scale, SolverId};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aorhb", version, about = "Run AOR-HB solver experiments and write traces, certificates and plot data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured solvers and write one CSV trace per solver.
    Solve(RunArgs),
    /// Like `solve`, plus plot data for the error curves.
    Bench(RunArgs),
    /// Condition-number sweep with fitted iteration-scaling slopes.
    Sweep(RunArgs),
    /// Run and check the Lyapunov certificates; exits with 1 on a violation.
    Certify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Preset: piecewise_fig1, logistic_fig2, lasso_fig3, l1l2_fig4, mspbe_fig5, scaling_fig6 or custom.
    experiment: Option<String>,
    /// INI-style `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to $AORHB_OUT_DIR, then ./aorhb-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// desk or paper.
    #[arg(long)]
    scale: Option<String>,
    /// Comma-separated solver names.
    #[arg(long, value_delimiter = ',')]
    solvers: Option<Vec<String>>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Relative error tolerance ‖x_k − x*‖/‖x_0 − x*‖.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated condition numbers for a sweep.
    #[arg(long, value_delimiter = ',')]
    kappas: Option<Vec<f64>>,
    /// Fill the wall_ms column of the CSV traces.
    #[arg(long)]
    wall_time: bool,
}

impl RunArgs {
    fn overrides(&self) -> CliResult<Overrides> {
        Ok(Overrides {
            experiment: self.experiment.as_deref().map(str::parse::<Experiment>).transpose()?,
            scale: self.scale.as_deref().map(str::parse::<Scale>).transpose()?,
            solvers: self
                .solvers
                .as_ref()
                .map(|v| v.iter().map(|s| s.parse::<SolverId>()).collect::<CliResult<Vec<_>>>())
                .transpose()?,
            seed: self.seed,
            output_dir: self.out.clone(),
            max_iters: self.max_iters,
            tolerance: self.tol,
            kappas: self.kappas.clone(),
            wall_time: self.wall_time,
        })
    }
}

fn execute(mode: Mode, args: &RunArgs) -> CliResult<i32> {
    let config = ExperimentConfig::resolve(args.config.as_deref(), &args.overrides()?)?;
    let bundle = run_experiment(&config, mode)?;
    for r in &bundle.runs {
        let label = r.label.as_deref().map(|l| format!(" [{l}]")).unwrap_or_default();
        let err = r.final_relative_error.map(|e| format!("{e:.3e}")).unwrap_or_else(|| "n/a".into());
        println!("{:<24} iters {:>8}  rel.error {err:>10}  certificate {}{label}", r.solver, r.iterations, r.certificate.describe());
    }
    if let Some(sw) = &bundle.sweep {
        for (s, slope) in &sw.slopes {
            let v = slope.map(|v| format!("{v:.3}")).unwrap_or_else(|| "n/a".into());
            println!("{s:<24} iteration-scaling slope {v}");
        }
        if mode == Mode::Certify {
            for p in &sw.points {
                println!("{:<24} kappa {:>8.1e}  certificate {}", p.solver, p.kappa, p.certificate.describe());
            }
        }
    }
    println!("results written to {}", config.output_dir.display());
    Ok(bundle.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Solve(a) => (Mode::Solve, a),
        Command::Bench(a) => (Mode::Bench, a),
        Command::Sweep(a) => (Mode::Sweep, a),
        Command::Certify(a) => (Mode::Certify, a),
    };
    let code = match execute(mode, args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
