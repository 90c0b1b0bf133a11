//! `coherent2d`: build 2D oscillator coherent states, check their closed
//! forms against a matrix oracle, and export density grids.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 when a numerical
//! contract check fails.

mod config;
mod presets;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{CommandKind, Format, IdentityKind, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "coherent2d", version, about = "Coherent states of the 2D harmonic oscillator")]
struct Cli {
    /// Command to run (alternatively --command).
    #[arg(value_enum, value_name = "COMMAND")]
    command_arg: Option<CommandKind>,

    #[arg(long, value_enum)]
    command: Option<CommandKind>,

    /// Schrodinger amplitude as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    psi: Option<String>,

    /// SU(2) parameter alpha as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,

    /// SU(2) parameter beta as "re,im".
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<String>,

    /// x frequency of the p:q oscillator.
    #[arg(long)]
    p: Option<u32>,

    /// y frequency of the p:q oscillator.
    #[arg(long)]
    q: Option<u32>,

    /// Shell index nu; for verify-identity the largest level probed.
    #[arg(long)]
    nu: Option<usize>,

    /// Number of shells kept in a Schrodinger expansion (default: Poisson tail rule).
    #[arg(long)]
    terms: Option<usize>,

    /// Grid as "xmin:xmax:nx,ymin:ymax:ny".
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,

    /// Output file.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<Format>,

    /// JSON file with any of the above settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Override the tolerance of the contract check.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Figure preset name (figure).
    #[arg(long)]
    name: Option<String>,

    /// Identity to verify (verify-identity).
    #[arg(long, value_enum)]
    kind: Option<IdentityKind>,

    /// Bra amplitude for overlap; defaults to --psi.
    #[arg(long, allow_hyphen_values = true)]
    bra_psi: Option<String>,

    /// Bra alpha for overlap; defaults to --alpha.
    #[arg(long, allow_hyphen_values = true)]
    bra_alpha: Option<String>,

    /// Bra beta for overlap; defaults to --beta.
    #[arg(long, allow_hyphen_values = true)]
    bra_beta: Option<String>,

    /// Bra shell index for overlap; defaults to --nu.
    #[arg(long)]
    bra_nu: Option<usize>,
}

impl Cli {
    fn into_config(self) -> Result<(RunConfig, Option<PathBuf>), String> {
        let command = match (self.command_arg, self.command) {
            (Some(a), Some(b)) if a != b => return Err("conflicting commands given".into()),
            (a, b) => a.or(b),
        };
        let cfg = RunConfig {
            command,
            psi: self.psi,
            alpha: self.alpha,
            beta: self.beta,
            p: self.p,
            q: self.q,
            nu: self.nu,
            terms: self.terms,
            grid: self.grid,
            out: self.out,
            format: self.format,
            tolerance: self.tolerance,
            name: self.name,
            kind: self.kind,
            bra_psi: self.bra_psi,
            bra_alpha: self.bra_alpha,
            bra_beta: self.bra_beta,
            bra_nu: self.bra_nu,
        };
        Ok((cfg, self.config))
    }
}

fn load_config(path: &PathBuf) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let resolved = cli.into_config().and_then(|(flags, path)| match path {
        Some(p) => Ok(flags.layered_over(load_config(&p)?)),
        None => Ok(flags),
    });
    let cfg = match resolved {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    match run::run(&cfg) {
        Ok(out) => {
            println!("{}", serde_json::to_string_pretty(&out.report).expect("report serializes"));
            if out.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &out.failures {
                    eprintln!("contract failure: {f}");
                }
                ExitCode::from(2)
            }
        }
        Err(run::ValidationError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
