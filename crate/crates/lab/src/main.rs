use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use qbm_lab::experiments::gradcheck;
use qbm_lab::{run_experiment, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "qbm-lab", version, about = "Quantum Boltzmann machine training experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fermionic vs classical fit of the step-function POVM target
    PovmTrain(Common),
    /// Relative-entropy tomography of random pure and mixed states
    Tomography(Common),
    /// Learning transverse-Ising teachers from their thermal states
    Hamlearn(Common),
    /// Mean-field approximation of transverse-Ising thermal states
    Meanfield(Common),
    /// Golden-Thompson vs commutator-series training schedules
    CommutatorCompare(Common),
    /// Analytic gradients against finite differences
    Gradcheck(Common),
    /// Shot-noise scaling of the sampled gradient
    VarianceSweep(Common),
    /// Print the default configuration of an experiment as TOML
    Defaults { experiment: String },
}

#[derive(Args)]
struct Common {
    /// Flat TOML file with configuration keys
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of ensemble instances
    #[arg(long)]
    ensemble: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// gt, exact, commutator, relent or relent_sampled:<n>
    #[arg(long)]
    gradient_kind: Option<String>,
    #[arg(long)]
    commutator_order: Option<usize>,
    #[arg(long)]
    n_visible: Option<usize>,
    #[arg(long)]
    n_hidden: Option<usize>,
    /// Write wall-clock times into trace CSVs
    #[arg(long)]
    timing: bool,
    /// Any other configuration key, as key=value
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| anyhow::anyhow!("--set expects KEY=VALUE, got {item:?}"))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                out.push((key.to_string(), v));
            }
        };
        push("seed", self.seed.map(|v| v.to_string()));
        push(
            "out",
            self.out.as_ref().map(|p| format!("{:?}", p.display().to_string())),
        );
        push("ensemble", self.ensemble.map(|v| v.to_string()));
        push("epochs", self.epochs.map(|v| v.to_string()));
        push("learning_rate", self.learning_rate.map(|v| format!("{v:?}")));
        push("momentum", self.momentum.map(|v| format!("{v:?}")));
        push("lambda", self.lambda.map(|v| format!("{v:?}")));
        push("gradient_kind", self.gradient_kind.as_ref().map(|v| format!("{v:?}")));
        push("commutator_order", self.commutator_order.map(|v| v.to_string()));
        push("n_visible", self.n_visible.map(|v| v.to_string()));
        push("n_hidden", self.n_hidden.map(|v| v.to_string()));
        if self.timing {
            push("timing", Some("true".into()));
        }
        Ok(out)
    }
}

fn run(experiment: Experiment, common: &Common) -> Result<bool> {
    let config = ExperimentConfig::resolve(experiment, common.config.as_deref(), &common.overrides()?)?;
    let output = if experiment == Experiment::Gradcheck {
        let report = gradcheck(&config)?;
        print!("{}", report.render());
        report.output()?
    } else {
        run_experiment(&config)?
    };
    let files = output.write(&config, &config.out)?;
    println!("{experiment}: wrote {} files to {}", files.len(), config.out.display());
    Ok(output.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::PovmTrain(c) => run(Experiment::PovmTrain, c),
        Command::Tomography(c) => run(Experiment::Tomography, c),
        Command::Hamlearn(c) => run(Experiment::Hamlearn, c),
        Command::Meanfield(c) => run(Experiment::Meanfield, c),
        Command::CommutatorCompare(c) => run(Experiment::CommutatorCompare, c),
        Command::Gradcheck(c) => run(Experiment::Gradcheck, c),
        Command::VarianceSweep(c) => run(Experiment::VarianceSweep, c),
        Command::Defaults { experiment } => experiment
            .parse::<Experiment>()
            .and_then(|e| ExperimentConfig::defaults(e).to_toml())
            .map(|text| {
                print!("{text}");
                true
            }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
