use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use coherent2d::grid::{default_grid, DensitySource};
use coherent2d::identity::{
    coherent1d_identity, fock_reconstruction, full_identity_diagonal, su2_identity_matrix,
    weighted_schrodinger_identity, IdentityReport, PlaneQuadratureSpec, S3QuadratureSpec,
};
use coherent2d::oracle::{
    build_hamiltonian, build_number, build_quadrature, expectation, variance, Mode, Quadrature, StateVector,
    TruncatedSpace,
};
use coherent2d::oscillator::{poisson_partial_sum, DEFAULT_TAIL_EPS};
use coherent2d::schrodinger::{
    overlap_tail_bound, schrodinger_coefficients, schrodinger_overlap, schrodinger_variances,
};
use coherent2d::su2::{su2_coefficients, su2_energy, su2_overlap, su2_variances, QuadratureVariances};
use coherent2d::{
    render, AnisotropyRatio, CoeffVector, DensityGrid, Error, GridSpec, ModeIndex2D, SU2Params, SU2State,
    SchrodingerState, C64,
};
use serde_json::{json, Value};

use crate::config::{parse_complex, CommandKind, Format, IdentityKind, RunConfig};
use crate::presets::{preset, PresetState, PRESET_NAMES};

/// A run that could not start: bad flags, bad parameters, unwritable output.
#[derive(Debug)]
pub struct ValidationError(pub String);

impl From<Error> for ValidationError {
    fn from(e: Error) -> Self {
        ValidationError(e.to_string())
    }
}

impl From<std::io::Error> for ValidationError {
    fn from(e: std::io::Error) -> Self {
        ValidationError(e.to_string())
    }
}

type Result<T> = std::result::Result<T, ValidationError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ValidationError(msg.into()))
}

/// Outcome of a completed run. `failures` lists violated numerical
/// contracts; an empty list means success.
#[derive(Debug)]
pub struct RunOutput {
    pub report: Value,
    pub failures: Vec<String>,
}

/// Collects the report fields while a command runs.
struct Report {
    parameters: serde_json::Map<String, Value>,
    result: serde_json::Map<String, Value>,
    captured_norm: Option<f64>,
    outputs: Vec<String>,
    failures: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Self {
            parameters: Default::default(),
            result: Default::default(),
            captured_norm: None,
            outputs: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, value: impl serde::Serialize) {
        self.parameters.insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    fn result(&mut self, key: &str, value: impl serde::Serialize) {
        self.result.insert(key.into(), serde_json::to_value(value).expect("serializable"));
    }

    /// Records a contract check `|got − want| ≤ tol`.
    fn check(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let dev = (got - want).abs();
        if dev.is_nan() || dev > tol {
            self.failures.push(format!("{what}: |{got:e} - {want:e}| = {dev:e} > {tol:e}"));
        }
    }
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

enum State {
    Su2(SU2State),
    Schrodinger(SchrodingerState),
}

impl State {
    fn source(&self) -> &dyn DensitySource {
        match self {
            State::Su2(s) => s,
            State::Schrodinger(s) => s,
        }
    }

    fn coefficients(&self) -> CoeffVector {
        match self {
            State::Su2(s) => su2_coefficients(s),
            State::Schrodinger(s) => schrodinger_coefficients(s),
        }
    }

    fn ratio(&self) -> AnisotropyRatio {
        match self {
            State::Su2(s) => s.ratio(),
            State::Schrodinger(s) => s.ratio(),
        }
    }

    /// Captured norm the construction promises: 1 for SU(2) states, the
    /// Poisson partial sum for truncated Schrödinger states.
    fn expected_captured_norm(&self) -> f64 {
        match self {
            State::Su2(_) => 1.0,
            State::Schrodinger(s) => s.expected_captured_norm(),
        }
    }
}

fn complex_field(value: &Option<String>, default: &str, flag: &str) -> Result<C64> {
    parse_complex(value.as_deref().unwrap_or(default)).map_err(|e| ValidationError(format!("--{flag}: {e}")))
}

fn ratio_of(cfg: &RunConfig) -> Result<AnisotropyRatio> {
    Ok(AnisotropyRatio::new(cfg.p.unwrap_or(1), cfg.q.unwrap_or(1))?)
}

fn params_of(alpha: &Option<String>, beta: &Option<String>, prefix: &str) -> Result<SU2Params> {
    let a = complex_field(alpha, "1,0", &format!("{prefix}alpha"))?;
    let b = complex_field(beta, "0,0", &format!("{prefix}beta"))?;
    Ok(SU2Params::new(a, b)?)
}

fn schrodinger_state(
    psi: C64,
    params: SU2Params,
    ratio: AnisotropyRatio,
    terms: Option<usize>,
) -> Result<SchrodingerState> {
    Ok(match terms {
        Some(n) => SchrodingerState::new(psi, params, ratio, n)?,
        None => SchrodingerState::with_tail_rule(psi, params, ratio, DEFAULT_TAIL_EPS)?,
    })
}

/// Builds the ket state; a `--psi` selects the Schrödinger family unless
/// `force` says otherwise.
fn state_of(cfg: &RunConfig, report: &mut Report, force: Option<bool>) -> Result<State> {
    let params = params_of(&cfg.alpha, &cfg.beta, "")?;
    let ratio = ratio_of(cfg)?;
    report.param("alpha", pair(params.alpha()));
    report.param("beta", pair(params.beta()));
    report.param("p", ratio.p());
    report.param("q", ratio.q());
    let schrodinger = force.unwrap_or(cfg.psi.is_some());
    if schrodinger {
        let Some(psi) = &cfg.psi else {
            return invalid("--psi is required for Schrodinger-type states");
        };
        let psi = parse_complex(psi).map_err(|e| ValidationError(format!("--psi: {e}")))?;
        let s = schrodinger_state(psi, params, ratio, cfg.terms)?;
        report.param("family", "schrodinger");
        report.param("psi", pair(psi));
        report.param("terms", s.truncation());
        report.param("truncation_rule", if cfg.terms.is_some() { "fixed" } else { "poisson-tail-1e-12" });
        Ok(State::Schrodinger(s))
    } else {
        let nu = cfg.nu.unwrap_or(0);
        report.param("family", "su2");
        report.param("nu", nu);
        Ok(State::Su2(SU2State::new(nu, params, ratio)))
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    let Some(command) = cfg.command else {
        return invalid("no command given");
    };
    if let Some(t) = cfg.tolerance {
        if !(t.is_finite() && t >= 0.0) {
            return invalid(format!("--tolerance must be a non-negative number, got {t}"));
        }
    }
    let started = std::time::Instant::now();
    let mut report = Report::new();
    match command {
        CommandKind::Su2Density => density(cfg, &mut report, Some(false))?,
        CommandKind::SchrodingerDensity => density(cfg, &mut report, Some(true))?,
        CommandKind::Coefficients => coefficients(cfg, &mut report)?,
        CommandKind::Variances => variances(cfg, &mut report)?,
        CommandKind::Energy => energy(cfg, &mut report)?,
        CommandKind::Overlap => overlap(cfg, &mut report)?,
        CommandKind::VerifyIdentity => verify_identity(cfg, &mut report)?,
        CommandKind::Figure => figure(cfg, &mut report)?,
    }
    let value = json!({
        "command": command,
        "parameters": report.parameters,
        "captured_norm": report.captured_norm,
        "result": report.result,
        "outputs": report.outputs,
        "contract": { "pass": report.failures.is_empty(), "failures": report.failures },
        "timings": { "total_seconds": started.elapsed().as_secs_f64() },
    });
    Ok(RunOutput { report: value, failures: report.failures })
}

fn grid_of(cfg: &RunConfig, fallback: GridSpec) -> Result<GridSpec> {
    match &cfg.grid {
        Some(g) => Ok(g.parse::<GridSpec>()?),
        None => Ok(fallback),
    }
}

fn density(cfg: &RunConfig, report: &mut Report, force: Option<bool>) -> Result<()> {
    let state = state_of(cfg, report, force)?;
    let spec = grid_of(cfg, default_grid(state.source()))?;
    render_and_write(&state, &spec, cfg, report)
}

fn render_and_write(state: &State, spec: &GridSpec, cfg: &RunConfig, report: &mut Report) -> Result<()> {
    report.param("grid", spec);
    let grid = render(state.source(), spec)?;
    let meta = grid.metadata(state.source());
    report.captured_norm = Some(meta.captured_norm);
    report.check("captured_norm", meta.captured_norm, state.expected_captured_norm(), cfg.tolerance.unwrap_or(1e-12));
    if grid.mass() > 1.0 + 1e-6 {
        report.failures.push(format!("grid mass {} exceeds 1 + 1e-6", grid.mass()));
    }
    report.result("mass", grid.mass());
    report.result("peak_index", grid.peak_index());
    report.result("peak", grid.peak_position());
    report.result("max_value", grid.max_value());
    if let Some(out) = &cfg.out {
        let format = cfg.format.unwrap_or(Format::Csv);
        report.param("format", format);
        write_grid(&grid, &meta, out, format, report)?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| ValidationError(format!("cannot create {}: {e}", path.display())))
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn write_grid(
    grid: &DensityGrid,
    meta: &coherent2d::grid::GridMetadata,
    out: &Path,
    format: Format,
    report: &mut Report,
) -> Result<()> {
    match format {
        Format::Csv | Format::Pgm => {
            let mut w = create(out)?;
            if format == Format::Csv {
                grid.write_csv(&mut w)?;
            } else {
                grid.write_pgm(&mut w)?;
            }
            w.flush()?;
            let side = sidecar_path(out);
            let mut w = create(&side)?;
            serde_json::to_writer_pretty(&mut w, meta).map_err(|e| ValidationError(e.to_string()))?;
            writeln!(w)?;
            w.flush()?;
            report.outputs.push(out.display().to_string());
            report.outputs.push(side.display().to_string());
        }
        Format::Json => {
            let rows: Vec<&[f64]> = (0..grid.spec().ny).map(|j| grid.row(j)).collect();
            let mut w = create(out)?;
            serde_json::to_writer(&mut w, &json!({ "metadata": meta, "values": rows }))
                .map_err(|e| ValidationError(e.to_string()))?;
            writeln!(w)?;
            w.flush()?;
            report.outputs.push(out.display().to_string());
        }
    }
    Ok(())
}

fn coefficients(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let state = state_of(cfg, report, None)?;
    let coeffs = state.coefficients();
    let captured = coeffs.captured_norm();
    report.captured_norm = Some(captured);
    report.check("captured_norm", captured, state.expected_captured_norm(), cfg.tolerance.unwrap_or(1e-12));
    report.result("count", coeffs.len());
    let list: Vec<Value> =
        coeffs.iter().map(|(idx, c)| json!({ "n": idx.n, "m": idx.m, "re": c.re, "im": c.im })).collect();
    if let Some(out) = &cfg.out {
        let format = cfg.format.unwrap_or(Format::Csv);
        report.param("format", format);
        let mut w = create(out)?;
        match format {
            Format::Csv => {
                for (idx, c) in coeffs.iter() {
                    writeln!(w, "{},{},{:.16e},{:.16e}", idx.n, idx.m, c.re, c.im)?;
                }
            }
            Format::Json => {
                serde_json::to_writer(&mut w, &list).map_err(|e| ValidationError(e.to_string()))?;
                writeln!(w)?;
            }
            Format::Pgm => return invalid("coefficients cannot be written as pgm"),
        }
        w.flush()?;
        report.outputs.push(out.display().to_string());
    } else {
        report.result("coefficients", list);
    }
    Ok(())
}

/// Embeds the coefficients with `margin` spare levels per mode.
fn embed(coeffs: &CoeffVector, margin: usize) -> Result<StateVector> {
    let (n, m) = coeffs.max_modes().unwrap_or((0, 0));
    Ok(StateVector::from_coeffs(TruncatedSpace::new(n + margin, m + margin), coeffs)?)
}

fn oracle_variances(v: &StateVector) -> Result<QuadratureVariances> {
    let var = |q| variance(&build_quadrature(v.space(), q), v);
    Ok(QuadratureVariances {
        var_x: var(Quadrature::X)?,
        var_px: var(Quadrature::Px)?,
        var_y: var(Quadrature::Y)?,
        var_py: var(Quadrature::Py)?,
    })
}

fn variances(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let state = state_of(cfg, report, None)?;
    let coeffs = state.coefficients();
    report.captured_norm = Some(coeffs.captured_norm());
    let oracle = oracle_variances(&embed(&coeffs, 2)?)?;
    let closed = match &state {
        State::Su2(s) => Some(su2_variances(s)),
        State::Schrodinger(s) if s.ratio().is_isotropic() => Some(schrodinger_variances(s)?),
        State::Schrodinger(_) => None,
    };
    report.result("oracle", oracle);
    report.result("closed_form", closed);
    if let Some(cf) = closed {
        let default_tol = if matches!(state, State::Su2(_)) { 1e-10 } else { 1e-6 };
        let tol = cfg.tolerance.unwrap_or(default_tol);
        report.check("var_x", oracle.var_x, cf.var_x, tol);
        report.check("var_px", oracle.var_px, cf.var_px, tol);
        report.check("var_y", oracle.var_y, cf.var_y, tol);
        report.check("var_py", oracle.var_py, cf.var_py, tol);
    }
    Ok(())
}

fn energy(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let state = state_of(cfg, report, None)?;
    let coeffs = state.coefficients();
    report.captured_norm = Some(coeffs.captured_norm());
    let v = embed(&coeffs, 0)?;
    let space = v.space();
    let total = build_number(space, Mode::X).add(&build_number(space, Mode::Y))?;
    let quanta = expectation(&total, &v)?.re + 1.0;
    let hamiltonian = expectation(&build_hamiltonian(space, state.ratio()), &v)?.re;
    report.result("oracle_number_plus_one", quanta);
    report.result("oracle_hamiltonian", hamiltonian);
    if let State::Su2(s) = &state {
        let e = su2_energy(s);
        report.result("closed_form", e);
        report.check("energy", quanta, e, cfg.tolerance.unwrap_or(1e-10));
    } else {
        report.result("closed_form", Value::Null);
    }
    Ok(())
}

fn overlap(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let ket = state_of(cfg, report, None)?;
    let bra_params = params_of(
        &cfg.bra_alpha.clone().or(cfg.alpha.clone()),
        &cfg.bra_beta.clone().or(cfg.beta.clone()),
        "bra-",
    )?;
    report.param("bra_alpha", pair(bra_params.alpha()));
    report.param("bra_beta", pair(bra_params.beta()));
    let ratio = ket.ratio();
    let (closed, inner, tol) = match &ket {
        State::Su2(k) => {
            let nu = cfg.bra_nu.unwrap_or(k.nu());
            report.param("bra_nu", nu);
            let bra = SU2State::new(nu, bra_params, ratio);
            let closed = su2_overlap(&bra, k)?;
            let inner = su2_coefficients(&bra).inner(&su2_coefficients(k));
            (Some(closed), inner, cfg.tolerance.unwrap_or(1e-12))
        }
        State::Schrodinger(k) => {
            let psi = complex_field(&cfg.bra_psi.clone().or(cfg.psi.clone()), "0,0", "bra-psi")?;
            report.param("bra_psi", pair(psi));
            let bra = schrodinger_state(psi, bra_params, ratio, cfg.terms)?;
            let inner = schrodinger_coefficients(&bra).inner(&schrodinger_coefficients(k));
            let closed = match schrodinger_overlap(&bra, k) {
                Ok(v) => Some(v),
                Err(Error::AnisotropicCrossOverlap) => None,
                Err(e) => return Err(e.into()),
            };
            report.result("truncation_bound", overlap_tail_bound(&bra, k));
            (closed, inner, overlap_tail_bound(&bra, k) + cfg.tolerance.unwrap_or(1e-12))
        }
    };
    report.result("inner_product", pair(inner));
    report.result("closed_form", closed.map(pair));
    if let Some(c) = closed {
        report.check("overlap", (c - inner).norm(), 0.0, tol);
    }
    Ok(())
}

fn default_tolerance(kind: IdentityKind) -> f64 {
    match kind {
        IdentityKind::Weighted | IdentityKind::Unweighted => 1e-8,
        _ => 1e-10,
    }
}

fn verify_identity(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let Some(kind) = cfg.kind else {
        return invalid("verify-identity needs --kind (su2, full, fock, weighted, unweighted, coherent1d)");
    };
    let nu = cfg.nu.unwrap_or(0);
    let ratio = ratio_of(cfg)?;
    let tol = cfg.tolerance.unwrap_or(default_tolerance(kind));
    report.param("kind", kind);
    report.param("nu", nu);
    report.param("tolerance", tol);
    let identity = |_: ModeIndex2D| 1.0;
    let all = |_: ModeIndex2D| true;
    let entry = match kind {
        IdentityKind::Su2 => {
            report.param("p", ratio.p());
            report.param("q", ratio.q());
            let spec = S3QuadratureSpec::for_nu(nu);
            let m = su2_identity_matrix(nu, ratio, &spec)?;
            let label = if ratio.is_isotropic() { "identity" } else { "identity on the mapped shell (extension)" };
            IdentityReport::for_candidate("su2", label, &m, m.max_deviation(identity, all), tol, json!(spec))
        }
        IdentityKind::Full => {
            report.param("p", ratio.p());
            report.param("q", ratio.q());
            let spec = S3QuadratureSpec::for_nu(2 * nu);
            let m = full_identity_diagonal(nu, nu, ratio, &spec)?;
            let (p, q) = (ratio.p() as usize, ratio.q() as usize);
            let dev = m.max_deviation(|l| if l.n % p == 0 && l.m % q == 0 { 1.0 } else { 0.0 }, all);
            IdentityReport::for_candidate("full", "identity on n, m <= nu", &m, dev, tol, json!(spec))
        }
        IdentityKind::Fock => {
            let mut worst: f64 = 0.0;
            for n in 0..=nu {
                let spec = S3QuadratureSpec::for_nu(nu);
                let got = fock_reconstruction(n, nu - n, &spec)?;
                let want: CoeffVector = [(ModeIndex2D::new(n, nu - n), C64::new(1.0, 0.0))].into_iter().collect();
                worst = worst.max(got.max_abs_diff(&want));
            }
            let spec = json!(S3QuadratureSpec::for_nu(nu));
            IdentityReport::new("fock", "unit vectors on the shell", worst, 0.0, tol, spec)
        }
        IdentityKind::Weighted | IdentityKind::Unweighted => {
            let weighted = kind == IdentityKind::Weighted;
            let s3 = S3QuadratureSpec::for_nu(2 * nu);
            let plane = PlaneQuadratureSpec::for_nu(2 * nu);
            let m = weighted_schrodinger_identity(nu, nu, &s3, &plane, weighted)?;
            let probed = |l: ModeIndex2D| l.n + l.m <= nu;
            let (dev, target) = if weighted {
                (m.max_deviation(identity, probed), "identity")
            } else {
                (m.max_deviation(|l| 1.0 / (l.n + l.m + 1) as f64, probed), "diagonal 1/(n+m+1)")
            };
            let name = if weighted { "weighted" } else { "unweighted" };
            IdentityReport::for_candidate(name, target, &m, dev, tol, json!({ "s3": s3, "plane": plane }))
        }
        IdentityKind::Coherent1d => {
            let spec = PlaneQuadratureSpec::for_nu(nu);
            let m = coherent1d_identity(nu, &spec)?;
            IdentityReport::for_candidate("coherent1d", "identity", &m, m.max_deviation(identity, all), tol, json!(spec))
        }
    };
    if !entry.pass {
        report.failures.push(format!(
            "{}: deviation {:e} (hermiticity {:e}) exceeds tolerance {:e}",
            entry.name, entry.max_abs_deviation, entry.hermiticity_defect, entry.tolerance
        ));
    }
    report.result("checks", vec![entry]);
    Ok(())
}

fn figure(cfg: &RunConfig, report: &mut Report) -> Result<()> {
    let Some(name) = &cfg.name else {
        return invalid(format!("figure needs --name, one of {}", PRESET_NAMES.join(", ")));
    };
    let Some(p) = preset(name) else {
        return invalid(format!("unknown figure {name:?}, expected one of {}", PRESET_NAMES.join(", ")));
    };
    report.param("name", p.name);
    let params = SU2Params::new(p.alpha, p.beta)?;
    let ratio = AnisotropyRatio::new(p.p, p.q)?;
    report.param("alpha", pair(params.alpha()));
    report.param("beta", pair(params.beta()));
    report.param("p", p.p);
    report.param("q", p.q);
    let state = match p.state {
        PresetState::Su2 { nu } => {
            report.param("family", "su2");
            report.param("nu", nu);
            State::Su2(SU2State::new(nu, params, ratio))
        }
        PresetState::Schrodinger { psi, terms } => {
            let s = schrodinger_state(psi, params, ratio, terms)?;
            report.param("family", "schrodinger");
            report.param("psi", pair(psi));
            report.param("terms", s.truncation());
            report.result("poisson_partial_sum", poisson_partial_sum(psi.norm_sqr(), s.truncation()));
            State::Schrodinger(s)
        }
    };
    let spec = grid_of(cfg, p.grid.parse::<GridSpec>()?)?;
    render_and_write(&state, &spec, cfg, report)
}
