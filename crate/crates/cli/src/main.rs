use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use slowcav_cli::error::EXIT_VALIDATION;
use slowcav_cli::{execute, load_config, scenarios, CliError, EmitOptions, Format, ScenarioConfig, Stage};

#[derive(Parser, Debug)]
#[command(name = "slowcav", version)]
#[command(about = "Slow-light cavity simulator: absorption profile, dispersion, cavity spectrum and pulse ring-down")]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// JSON scenario configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides the config's output_dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Scale exported pulse traces to unit peak intensity
    #[arg(long, global = true)]
    normalize: bool,

    /// Table format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sampled absorption profile
    Profile,
    /// Index deviation and group index
    Dispersion,
    /// Cavity transmission spectrum and resonances
    Spectrum,
    /// Resonance table and slow-light report per window
    Modes,
    /// Pulse propagation and ring-down peaks
    Pulse,
    /// Window-width sweep
    Sweep,
    /// Run every stage of a shipped scenario (or of --config)
    Scenario {
        /// One of: fig1a, fig1b, fig1c, fig3a, fig3b, tb-sweep
        name: Option<String>,
    },
    /// Check a configuration without running it
    Validate {
        /// Shipped scenario name (alternative to --config)
        name: Option<String>,
    },
    /// List shipped scenarios
    List,
}

fn resolve(name: Option<&str>, config: Option<&PathBuf>) -> Result<ScenarioConfig, CliError> {
    match (name, config) {
        (Some(n), _) => scenarios::load(n),
        (None, Some(p)) => load_config(p),
        (None, None) => Err(CliError::Invalid(vec![slowcav_cli::Violation {
            field: "config".into(),
            message: "a scenario name or --config is required".into(),
        }])),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let opts = EmitOptions {
        out: args.out.clone(),
        normalize: args.normalize,
        format: match args.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
    };
    let stage = match &args.command {
        Command::Profile => Stage::Profile,
        Command::Dispersion => Stage::Dispersion,
        Command::Spectrum => Stage::Spectrum,
        Command::Modes => Stage::Modes,
        Command::Pulse => Stage::Pulse,
        Command::Sweep => Stage::Sweep,
        Command::Scenario { .. } => Stage::All,
        Command::List => {
            for n in scenarios::NAMES {
                println!("{n}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Validate { name } => {
            return match resolve(name.as_deref(), args.config.as_ref()) {
                Ok(cfg) => {
                    let report = cfg.validate();
                    let text = serde_json::json!({
                        "status": if report.is_valid() { "valid" } else { "invalid" },
                        "errors": report.errors,
                        "warnings": report.warnings,
                    });
                    println!("{}", serde_json::to_string_pretty(&text).expect("report serializes"));
                    if report.is_valid() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_VALIDATION as u8)
                    }
                }
                Err(e) => fail(&e),
            };
        }
    };
    let name = match &args.command {
        Command::Scenario { name } => name.as_deref(),
        _ => None,
    };
    let result = resolve(name, args.config.as_ref()).and_then(|cfg| {
        let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
        execute(&cfg, stage, &opts).map(|m| (m, dir))
    });
    match result {
        Ok((m, dir)) => {
            eprintln!(
                "{}: wrote {} files to {} in {:.2} s",
                m.scenario,
                m.files.len() + 1,
                dir.display(),
                m.wall_time_s
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}
