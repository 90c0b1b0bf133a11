use std::path::PathBuf;

use clap::ValueEnum;
use coherent2d::C64;
use serde::{Deserialize, Serialize};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Su2Density,
    SchrodingerDensity,
    Coefficients,
    Variances,
    Energy,
    Overlap,
    VerifyIdentity,
    Figure,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Pgm,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityKind {
    Su2,
    Full,
    Fock,
    Weighted,
    Unweighted,
    Coherent1d,
}

/// Everything a run can be configured with. Every field is optional so a
/// JSON config file and command-line flags can be layered.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandKind>,
    pub psi: Option<String>,
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub nu: Option<usize>,
    pub terms: Option<usize>,
    pub grid: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub tolerance: Option<f64>,
    pub name: Option<String>,
    pub kind: Option<IdentityKind>,
    pub bra_psi: Option<String>,
    pub bra_alpha: Option<String>,
    pub bra_beta: Option<String>,
    pub bra_nu: Option<usize>,
}

impl RunConfig {
    /// Fields set in `self` win over those in `base`.
    pub fn layered_over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            command: self.command.or(base.command),
            psi: self.psi.or(base.psi),
            alpha: self.alpha.or(base.alpha),
            beta: self.beta.or(base.beta),
            p: self.p.or(base.p),
            q: self.q.or(base.q),
            nu: self.nu.or(base.nu),
            terms: self.terms.or(base.terms),
            grid: self.grid.or(base.grid),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            tolerance: self.tolerance.or(base.tolerance),
            name: self.name.or(base.name),
            kind: self.kind.or(base.kind),
            bra_psi: self.bra_psi.or(base.bra_psi),
            bra_alpha: self.bra_alpha.or(base.bra_alpha),
            bra_beta: self.bra_beta.or(base.bra_beta),
            bra_nu: self.bra_nu.or(base.bra_nu),
        }
    }
}

/// Parses a `"re,im"` literal; a bare real number is accepted too.
pub fn parse_complex(s: &str) -> Result<C64, String> {
    let bad = || format!("invalid complex literal {s:?}, expected \"re,im\"");
    let (re, im) = match s.split_once(',') {
        Some((re, im)) => (re, im),
        None => (s, "0"),
    };
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(format!("complex literal {s:?} is not finite"));
    }
    Ok(C64::new(re, im))
}
