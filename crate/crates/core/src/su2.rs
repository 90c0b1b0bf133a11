//! SU(2) coherent states of the isotropic oscillator and their
//! generalization to commensurate anisotropic frequencies
//!
//! ```text
//! |ν⟩^{p,q}_{α,β} = Σ_{n=0}^{ν} αⁿ β^{ν−n} √(ν choose n) |pn, q(ν−n)⟩
//! ```
//!
//! The isotropic states are the special case `p = q = 1`; the same code path
//! serves both.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oscillator::{
    check_finite, hermite_psi_table, log_binomial_sqrt, CoeffVector, ComplexSum, ModeIndex2D,
    HERMITE_ORDER_CAP,
};
use crate::C64;

/// Largest tolerated deviation of `|α|² + |β|²` from 1 before the
/// constructor refuses to renormalize.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// The pair `(α, β)` with `|α|² + |β|² = 1`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SU2Params {
    alpha: C64,
    beta: C64,
}

impl SU2Params {
    /// Validates and renormalizes `(α, β)` onto the unit sphere.
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        check_finite(alpha, "alpha")?;
        check_finite(beta, "beta")?;
        let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
        if norm_sqr == 0.0 {
            return Err(Error::DegenerateParams);
        }
        if (norm_sqr - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { norm_sqr, tolerance: NORMALIZATION_TOLERANCE });
        }
        let s = norm_sqr.sqrt();
        Ok(Self { alpha: alpha / s, beta: beta / s })
    }

    /// `α = √u e^{iφ_α}`, `β = √(1−u) e^{iφ_β}` for `u ∈ [0, 1]`.
    pub fn from_polar(u: f64, phase_alpha: f64, phase_beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::NotNormalized { norm_sqr: u, tolerance: NORMALIZATION_TOLERANCE });
        }
        Self::new(
            C64::from_polar(u.sqrt(), phase_alpha),
            C64::from_polar((1.0 - u).sqrt(), phase_beta),
        )
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn approx_eq(&self, other: &SU2Params, tol: f64) -> bool {
        (self.alpha - other.alpha).norm() <= tol && (self.beta - other.beta).norm() <= tol
    }
}

/// Coprime frequency ratio `ω_x : ω_y = p : q`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnisotropyRatio {
    p: u32,
    q: u32,
}

impl AnisotropyRatio {
    pub const ISOTROPIC: AnisotropyRatio = AnisotropyRatio { p: 1, q: 1 };

    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidRatio { p, q, reason: "p and q must be positive" });
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidRatio { p, q, reason: "p and q must be coprime" });
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn is_isotropic(&self) -> bool {
        self.p == 1 && self.q == 1
    }

    /// Fock mode carrying `n` x-quanta and `m` y-quanta of the reduced
    /// ladder: `(pn, qm)`.
    pub fn map(&self, n: usize, m: usize) -> ModeIndex2D {
        ModeIndex2D::new(self.p as usize * n, self.q as usize * m)
    }

    pub(crate) fn check_same(&self, other: &AnisotropyRatio) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::RatioMismatch { bra: (self.p, self.q), ket: (other.p, other.q) })
        }
    }
}

impl Default for AnisotropyRatio {
    fn default() -> Self {
        Self::ISOTROPIC
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(ln |c|, arg c)` of the shell amplitude `αⁿ β^{ν−n} √(ν choose n)`, or
/// `None` when it vanishes exactly (`α = 0` with `n > 0`, or `β = 0` with
/// `n < ν`).
pub(crate) fn shell_log_amplitude(params: &SU2Params, nu: usize, n: usize) -> Option<(f64, f64)> {
    let (a, b) = (params.alpha, params.beta);
    let k = nu - n;
    if (a == C64::new(0.0, 0.0) && n > 0) || (b == C64::new(0.0, 0.0) && k > 0) {
        return None;
    }
    let mut ln_mag = log_binomial_sqrt(nu, n).expect("n <= nu");
    let mut phase = 0.0;
    if n > 0 {
        ln_mag += n as f64 * a.norm().ln();
        phase += n as f64 * a.arg();
    }
    if k > 0 {
        ln_mag += k as f64 * b.norm().ln();
        phase += k as f64 * b.arg();
    }
    Some((ln_mag, phase))
}

/// SU(2) coherent state `|ν⟩^{p,q}_{α,β}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SU2State {
    nu: usize,
    params: SU2Params,
    ratio: AnisotropyRatio,
}

impl SU2State {
    pub fn new(nu: usize, params: SU2Params, ratio: AnisotropyRatio) -> Self {
        Self { nu, params, ratio }
    }

    pub fn isotropic(nu: usize, params: SU2Params) -> Self {
        Self::new(nu, params, AnisotropyRatio::ISOTROPIC)
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn params(&self) -> &SU2Params {
        &self.params
    }

    pub fn ratio(&self) -> AnisotropyRatio {
        self.ratio
    }

    /// Shell terms in ascending `n`, as `(mode, amplitude)`.
    pub(crate) fn terms(&self) -> Vec<(ModeIndex2D, C64)> {
        (0..=self.nu)
            .filter_map(|n| {
                shell_log_amplitude(&self.params, self.nu, n).map(|(ln_mag, phase)| {
                    (self.ratio.map(n, self.nu - n), C64::from_polar(ln_mag.exp(), phase))
                })
            })
            .collect()
    }

    /// Largest x- and y-occupation in the expansion.
    pub fn max_modes(&self) -> (usize, usize) {
        (self.ratio.p as usize * self.nu, self.ratio.q as usize * self.nu)
    }
}

/// Fock expansion of `|ν⟩^{p,q}_{α,β}`.
pub fn su2_coefficients(state: &SU2State) -> CoeffVector {
    state.terms().into_iter().collect()
}

/// `⟨μ|^{p,q}_{γ,δ} |ν⟩^{p,q}_{α,β} = (γ̄α + δ̄β)^ν δ_{μν}`.
pub fn su2_overlap(bra: &SU2State, ket: &SU2State) -> Result<C64> {
    bra.ratio.check_same(&ket.ratio)?;
    if bra.nu != ket.nu {
        return Ok(C64::new(0.0, 0.0));
    }
    let base = bra.params.alpha.conj() * ket.params.alpha + bra.params.beta.conj() * ket.params.beta;
    Ok(base.powu(ket.nu as u32))
}

/// Evaluates `Σ c_{n,m} ψ_n(x) ψ_m(y)` over `terms`, summing in the given
/// order with compensation.
pub(crate) fn expansion_at(
    terms: &[(ModeIndex2D, C64)],
    max_modes: (usize, usize),
    x: f64,
    y: f64,
) -> Result<C64> {
    for order in [max_modes.0, max_modes.1] {
        if order > HERMITE_ORDER_CAP {
            return Err(Error::OrderOverflow { order, cap: HERMITE_ORDER_CAP });
        }
    }
    let hx = hermite_psi_table(max_modes.0, x)?;
    let hy = hermite_psi_table(max_modes.1, y)?;
    let mut acc = ComplexSum::default();
    for (idx, c) in terms {
        acc.add(c * (hx[idx.n] * hy[idx.m]));
    }
    Ok(acc.value())
}

/// Position-space amplitude `⟨x, y|ν⟩^{p,q}_{α,β}`.
pub fn su2_wavefunction(state: &SU2State, x: f64, y: f64) -> Result<C64> {
    expansion_at(&state.terms(), state.max_modes(), x, y)
}

/// Position and momentum variances of a state.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureVariances {
    pub var_x: f64,
    pub var_px: f64,
    pub var_y: f64,
    pub var_py: f64,
}

/// `(ΔX)² = (ΔP_x)² = ½ + |α|² p ν`, `(ΔY)² = (ΔP_y)² = ½ + |β|² q ν`.
pub fn su2_variances(state: &SU2State) -> QuadratureVariances {
    let nu = state.nu as f64;
    let vx = 0.5 + state.params.alpha.norm_sqr() * state.ratio.p as f64 * nu;
    let vy = 0.5 + state.params.beta.norm_sqr() * state.ratio.q as f64 * nu;
    QuadratureVariances { var_x: vx, var_px: vx, var_y: vy, var_py: vy }
}

/// `E^{p,q}_ν = p|α|²ν + q|β|²ν + 1`, the expectation of
/// `a_x⁺a_x⁻ + a_y⁺a_y⁻ + 1`.
///
/// This is not the expectation of the anisotropic Hamiltonian
/// `p(N_x + ½) + q(N_y + ½)`; that value is available through
/// [`crate::oracle::build_hamiltonian`].
pub fn su2_energy(state: &SU2State) -> f64 {
    let nu = state.nu as f64;
    state.ratio.p as f64 * state.params.alpha.norm_sqr() * nu
        + state.ratio.q as f64 * state.params.beta.norm_sqr() * nu
        + 1.0
}

/// Angle to the x axis of the line a real-phase state concentrates on,
/// `atan2(|β|, |α|) ∈ [0, π/2]`.
pub fn line_angle(params: &SU2Params) -> Result<f64> {
    let (a, b) = (params.alpha.norm(), params.beta.norm());
    if a == 0.0 && b == 0.0 {
        return Err(Error::DegenerateParams);
    }
    Ok(b.atan2(a))
}
