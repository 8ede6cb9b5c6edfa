use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use palais_lab::commands::{self, Outcome, EXIT_INPUT};
use palais_lab::config::{check_tol, Generator, RunConfig};
use palais_lab::Format;

#[derive(Parser)]
#[command(name = "palais-lab", version, about = "Univalence, monodromy and leaf-space experiments for commuting holomorphic fields")]
struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `tolerances.report_tol`.
    #[arg(long, global = true, env = "PALAIS_LAB_TOL")]
    tol: Option<f64>,
    /// Directory receiving the report and any trajectory CSVs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Univalence verdict from the Laurent data.
    Classify,
    /// Lift a generator loop and compare its return map with the closed form.
    Monodromy {
        #[arg(long, value_enum)]
        generator: Option<Generator>,
    },
    /// Leaf-space table with per-stratum verification.
    Leafspace,
    /// Merging-leaf witness for the ellipse example.
    WitnessProp26 {
        #[arg(long)]
        epsilon: Option<f64>,
        /// Decreasing list, comma separated.
        #[arg(long, value_delimiter = ',')]
        delta: Vec<f64>,
        /// Report the invariant-disc chart only.
        #[arg(long)]
        u1_mode: bool,
    },
    /// Run every acceptance criterion.
    VerifyAll,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Monodromy { .. } => "monodromy",
            Command::Leafspace => "leafspace",
            Command::WitnessProp26 { .. } => "witness-prop26",
            Command::VerifyAll => "verify-all",
        }
    }
}

fn load(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(tol) = cli.tol {
        check_tol("--tol", tol)?;
        config.tolerances.report_tol = tol;
    }
    if let Some(out) = &cli.out {
        config.output.out_dir = Some(out.clone());
    }
    if let Command::WitnessProp26 { epsilon, delta, u1_mode } = &cli.command {
        if let Some(e) = epsilon {
            config.witness.epsilon = *e;
        }
        if !delta.is_empty() {
            config.witness.deltas = delta.clone();
        }
        config.witness.u1_mode |= u1_mode;
    }
    if let Command::Monodromy { generator: Some(g) } = &cli.command {
        config.monodromy.generator = *g;
    }
    Ok(config)
}

fn write_files(dir: &Path, command: &str, outcome: &Outcome) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir)?;
    let report = serde_json::to_string_pretty(&outcome.json)? + "\n";
    std::fs::write(dir.join(format!("{command}.json")), report)?;
    for (name, body) in &outcome.files {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("palais-lab: {e:#}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let outcome = match &cli.command {
        Command::Classify => commands::cmd_classify(&config),
        Command::Monodromy { .. } => commands::cmd_monodromy(&config, config.monodromy.generator),
        Command::Leafspace => commands::cmd_leafspace(&config),
        Command::WitnessProp26 { .. } => commands::cmd_witness_prop26(&config),
        Command::VerifyAll => commands::cmd_verify_all(&config),
    };
    print!("{}", outcome.render(cli.format));
    if let Some(dir) = &config.output.out_dir {
        if let Err(e) = write_files(dir, cli.command.name(), &outcome) {
            eprintln!("palais-lab: writing {}: {e:#}", dir.display());
            return ExitCode::from(EXIT_INPUT);
        }
    }
    if let Some(msg) = &outcome.message {
        eprintln!("palais-lab: {msg}");
    }
    ExitCode::from(outcome.code)
}
