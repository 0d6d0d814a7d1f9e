mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use report::Format;
use spectra_core::ring::DEFAULT_SUPPORT_GUARD;

const EXIT_VIOLATION: u8 = 2;
const EXIT_INVALID: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "spectra",
    version,
    about = "Spectral radius estimates and extraction certificates for group rings"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// `free:R`, `fpc:M1,M2,...` (0 for an infinite factor) or `zd:D`.
    #[arg(long, global = true, default_value = "free:2")]
    pub group: String,
    /// Symmetric generating set such as `a,A,b,B`; defaults to the standard set.
    #[arg(long, global = true)]
    pub set: Option<String>,
    /// dense, radial or auto.
    #[arg(long, global = true, default_value = "auto")]
    pub engine: String,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Working precision of interval evaluations, in bits.
    #[arg(long, global = true, default_value_t = 128)]
    pub precision: u32,
    /// Maximum number of words a dense computation may hold.
    #[arg(long, global = true, default_value_t = DEFAULT_SUPPORT_GUARD)]
    pub guard: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace moments of m(S) with root and ratio lower bounds.
    Moments(commands::MomentsArgs),
    /// All available estimates of rho(S), checked for consistency.
    Radius(commands::RadiusArgs),
    /// Certificates for the extracted sets S_k.
    Extract(commands::ExtractArgs),
    /// Table of S_k against the exponent chain over a range of k.
    Reproduce(commands::ReproduceArgs),
    /// The exponent eps and the chain 4k ln|S| rho^k < |S|^(-eps k).
    Epsilon(commands::EpsilonArgs),
    /// Threshold selection on the extremal profiles f_n.
    Sharpness(commands::SharpnessArgs),
    /// Monte Carlo return probability of the simple random walk.
    Walk(commands::WalkArgs),
    /// Upper bounds on gamma(S) from spectral radius bounds.
    Gamma(commands::GammaArgs),
}

fn run(cli: Cli) -> Result<bool, spectra_core::Error> {
    let common = cli.common;
    let ctx = commands::Context::resolve(&common)?;
    let (name, params, out) = match &cli.command {
        Command::Moments(a) => (
            "moments",
            serde_json::to_value(a),
            commands::moments(&ctx, a)?,
        ),
        Command::Radius(a) => (
            "radius",
            serde_json::to_value(a),
            commands::radius(&ctx, a)?,
        ),
        Command::Extract(a) => (
            "extract",
            serde_json::to_value(a),
            commands::extract(&ctx, a)?,
        ),
        Command::Reproduce(a) => (
            "reproduce",
            serde_json::to_value(a),
            commands::reproduce(&ctx, a)?,
        ),
        Command::Epsilon(a) => (
            "epsilon",
            serde_json::to_value(a),
            commands::epsilon(&ctx, a)?,
        ),
        Command::Sharpness(a) => (
            "sharpness",
            serde_json::to_value(a),
            commands::sharpness(a)?,
        ),
        Command::Walk(a) => ("walk", serde_json::to_value(a), commands::walk(&ctx, a)?),
        Command::Gamma(a) => ("gamma", serde_json::to_value(a), commands::gamma(&ctx, a)?),
    };
    let mut config = ctx.config();
    config["params"] = params.expect("arguments serialize");
    let text = report::render(name, config, &out, common.format);
    report::emit(&text, common.out.as_deref())
        .map_err(|e| spectra_core::Error::InvalidArgument(format!("cannot write output: {e}")))?;
    Ok(!out.violation)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: certificate violation");
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
