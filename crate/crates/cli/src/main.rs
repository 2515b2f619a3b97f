use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nested_mzi_cli::{
    parse_channels, parse_config, parse_detector_groups, parse_time, run_report, CliError, Command,
};

#[derive(Parser)]
#[command(
    name = "nested-mzi",
    version,
    about = "Consistent histories and weak values in a nested Mach-Zehnder interferometer"
)]
struct Cli {
    /// key = value config file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    alpha2: Option<String>,
    #[arg(long, global = true)]
    epsilon: Option<String>,
    /// comma separated subset of a,d,b,c,e,w
    #[arg(long, global = true)]
    probes: Option<String>,
    #[arg(long, global = true)]
    family: Option<String>,
    #[arg(long, global = true)]
    tolerance: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    samples: Option<String>,
    /// text or csv
    #[arg(long, global = true)]
    format: Option<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Chain-ket overlaps of a named family
    Consistency {
        #[arg(id = "family_name", value_name = "FAMILY")]
        family: Option<String>,
    },
    /// Extended Born-rule probabilities of a named family
    Probs {
        #[arg(id = "family_name", value_name = "FAMILY")]
        family: Option<String>,
    },
    /// Pr(channels at time | S0, final) in the coarsest family
    Infer {
        /// e.g. t2
        time: String,
        /// e.g. C or B+C
        channels: String,
        /// final detector label(s), e.g. F
        #[arg(long)]
        given: String,
    },
    /// Weak values of every channel projector with presence verdicts
    WeakValues {
        #[arg(long, default_value = "F")]
        given: String,
    },
    /// Branch components and outcome probabilities with probes attached
    Probes,
    /// Which probe bitstrings accompany each detector outcome
    Coincidences {
        /// detector groups, e.g. F+G,H
        #[arg(long, default_value = "F+G,H")]
        detectors: String,
    },
    /// Monte Carlo draws of (detector, probe bitstring)
    Sample,
    /// Every closed-form result, tagged and checked
    PaperSuite,
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let source = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    let flags = [
        ("alpha2", &cli.alpha2),
        ("epsilon", &cli.epsilon),
        ("probes", &cli.probes),
        ("family", &cli.family),
        ("tolerance", &cli.tolerance),
        ("seed", &cli.seed),
        ("samples", &cli.samples),
        ("format", &cli.format),
    ];
    let overrides: Vec<(String, String)> = flags
        .iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect();
    let cfg = parse_config(&source, &overrides)?;

    let family = |f: &Option<String>| -> Result<_, CliError> {
        f.as_deref()
            .map(|s| s.parse().map_err(CliError::Usage))
            .transpose()
    };
    let command = match &cli.command {
        Cmd::Consistency { family: f } => Command::Consistency { family: family(f)? },
        Cmd::Probs { family: f } => Command::Probs { family: family(f)? },
        Cmd::Infer {
            time,
            channels,
            given,
        } => Command::Infer {
            time: parse_time(time)?,
            channels: parse_channels(channels),
            given: parse_channels(given),
        },
        Cmd::WeakValues { given } => Command::WeakValues {
            given: given.trim().to_ascii_uppercase(),
        },
        Cmd::Probes => Command::Probes,
        Cmd::Coincidences { detectors } => Command::Coincidences {
            detectors: parse_detector_groups(detectors),
        },
        Cmd::Sample => Command::Sample,
        Cmd::PaperSuite => Command::PaperSuite,
    };
    let outcome = run_report(&cfg, &command)?;
    print!("{}", outcome.report.render(cfg.format));
    Ok(outcome.status.code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("nested-mzi: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
