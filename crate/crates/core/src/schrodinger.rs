//! Schrödinger-type 2D coherent states
//!
//! ```text
//! |Ψ⟩^{p,q}_{α,β} = e^{−|Ψ|²/2} Σ_ν Ψ^ν / √(ν!) |ν⟩^{p,q}_{α,β}
//! ```
//!
//! kept as an explicit truncation to the first `N` shells. Isotropic states
//! additionally have closed forms for the wavefunction, the peak of the
//! density and the quadrature variances.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{build_generalized_ladder, Direction, StateVector, TruncatedSpace};
use crate::oscillator::{
    check_finite, ln_factorial, ln_poisson_pmf, poisson_partial_sum, poisson_tail,
    poisson_truncation, CoeffVector, ModeIndex2D,
};
use crate::su2::{expansion_at, shell_log_amplitude, AnisotropyRatio, QuadratureVariances, SU2Params};
use crate::C64;

/// Truncated Schrödinger-type coherent state `|Ψ⟩^{p,q}_{α,β}` keeping the
/// shells `ν < truncation`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchrodingerState {
    psi: C64,
    params: SU2Params,
    ratio: AnisotropyRatio,
    truncation: usize,
    // ascending ν, then ascending n within a shell
    terms: Vec<(ModeIndex2D, C64)>,
}

impl SchrodingerState {
    pub fn new(psi: C64, params: SU2Params, ratio: AnisotropyRatio, truncation: usize) -> Result<Self> {
        check_finite(psi, "psi")?;
        if truncation == 0 {
            return Err(Error::EmptyTruncation);
        }
        let terms = expansion_terms(psi, &params, ratio, truncation);
        Ok(Self { psi, params, ratio, truncation, terms })
    }

    /// Truncation chosen so that the discarded Poisson mass is below `eps`.
    pub fn with_tail_rule(psi: C64, params: SU2Params, ratio: AnisotropyRatio, eps: f64) -> Result<Self> {
        check_finite(psi, "psi")?;
        Self::new(psi, params, ratio, poisson_truncation(psi.norm_sqr(), eps))
    }

    pub fn psi(&self) -> C64 {
        self.psi
    }

    pub fn params(&self) -> &SU2Params {
        &self.params
    }

    pub fn ratio(&self) -> AnisotropyRatio {
        self.ratio
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// Largest x- and y-occupation among the kept terms.
    pub fn max_modes(&self) -> (usize, usize) {
        self.terms.iter().fold((0, 0), |(n, m), (idx, _)| (n.max(idx.n), m.max(idx.m)))
    }

    /// Poisson mass of the kept shells, `Σ_{ν<N} e^{−|Ψ|²}|Ψ|^{2ν}/ν!`.
    pub fn expected_captured_norm(&self) -> f64 {
        poisson_partial_sum(self.psi.norm_sqr(), self.truncation)
    }

    /// Poisson mass of the discarded shells.
    pub fn tail_mass(&self) -> f64 {
        poisson_tail(self.psi.norm_sqr(), self.truncation)
    }

    fn require_isotropic(&self) -> Result<()> {
        if self.ratio.is_isotropic() {
            Ok(())
        } else {
            Err(Error::AnisotropicUnsupported { p: self.ratio.p(), q: self.ratio.q() })
        }
    }
}

fn expansion_terms(
    psi: C64,
    params: &SU2Params,
    ratio: AnisotropyRatio,
    truncation: usize,
) -> Vec<(ModeIndex2D, C64)> {
    let r = psi.norm();
    if r == 0.0 {
        return vec![(ModeIndex2D::new(0, 0), C64::new(1.0, 0.0))];
    }
    let (ln_r, arg) = (r.ln(), psi.arg());
    let mut terms = Vec::with_capacity(truncation * (truncation + 1) / 2);
    for nu in 0..truncation {
        let ln_weight = -0.5 * r * r + nu as f64 * ln_r - 0.5 * ln_factorial(nu);
        let phase_weight = nu as f64 * arg;
        for n in 0..=nu {
            if let Some((ln_mag, phase)) = shell_log_amplitude(params, nu, n) {
                let c = C64::from_polar((ln_weight + ln_mag).exp(), phase_weight + phase);
                terms.push((ratio.map(n, nu - n), c));
            }
        }
    }
    terms
}

/// Fock expansion of the truncated state. Its captured norm is the Poisson
/// partial sum of the kept shells and is below 1 for any finite truncation.
pub fn schrodinger_coefficients(state: &SchrodingerState) -> CoeffVector {
    state.terms.iter().copied().collect()
}

/// Closed-form overlap
/// `⟨Ψ′|_{γ,δ} |Ψ⟩_{α,β} = e^{−(|Ψ′|²+|Ψ|²)/2} e^{Ψ̄′Ψ(γ̄α + δ̄β)}` of the
/// untruncated states.
///
/// For anisotropic ratios only the same-parameter case
/// `e^{−(|Ψ′|²+|Ψ|²)/2} e^{Ψ̄′Ψ}` is provided.
pub fn schrodinger_overlap(bra: &SchrodingerState, ket: &SchrodingerState) -> Result<C64> {
    bra.ratio.check_same(&ket.ratio)?;
    let shell = if bra.ratio.is_isotropic() {
        bra.params.alpha().conj() * ket.params.alpha() + bra.params.beta().conj() * ket.params.beta()
    } else if bra.params.approx_eq(&ket.params, 1e-12) {
        C64::new(1.0, 0.0)
    } else {
        return Err(Error::AnisotropicCrossOverlap);
    };
    let exponent = -0.5 * (bra.psi.norm_sqr() + ket.psi.norm_sqr()) + bra.psi.conj() * ket.psi * shell;
    Ok(exponent.exp())
}

/// Bound on `|⟨bra|ket⟩_truncated − ⟨bra|ket⟩|` from the discarded shells
/// (Cauchy–Schwarz over the shells both truncations drop).
pub fn overlap_tail_bound(bra: &SchrodingerState, ket: &SchrodingerState) -> f64 {
    let n = bra.truncation.min(ket.truncation);
    (poisson_tail(bra.psi.norm_sqr(), n) * poisson_tail(ket.psi.norm_sqr(), n)).sqrt()
}

/// Poisson probability `e^{−|Ψ|²}|Ψ|^{2μ}/μ!` of finding the untruncated
/// state in the shell `|μ⟩`.
pub fn poisson_occupation(state: &SchrodingerState, mu: usize) -> f64 {
    ln_poisson_pmf(state.psi.norm_sqr(), mu).exp()
}

/// `‖(A⁻_{α,β} − Ψ)|Ψ⟩‖` for the truncated vector, computed with the
/// truncated Fock-space lowering operator. Isotropic states only.
pub fn annihilation_residual(state: &SchrodingerState) -> Result<f64> {
    state.require_isotropic()?;
    let cutoff = state.truncation.saturating_sub(1).max(1);
    let space = TruncatedSpace::new(cutoff, cutoff);
    let v = StateVector::from_coeffs(space, &schrodinger_coefficients(state))?;
    let lowered = build_generalized_ladder(space, &state.params, Direction::Lower).apply(&v)?;
    let residual = lowered.sub(&v.scaled(state.psi))?;
    Ok(residual.norm())
}

/// Contract bound `10·√(tail mass)·(1 + |Ψ|)` for [`annihilation_residual`].
pub fn annihilation_residual_bound(state: &SchrodingerState) -> f64 {
    10.0 * state.tail_mass().sqrt() * (1.0 + state.psi.norm())
}

/// Position-space amplitude `⟨x, y|Ψ⟩`.
///
/// Isotropic states use the closed-form Gaussian
/// `π^{−1/2} exp(−½[(x−x₀)² + (y−y₀)²]) exp(i√2[x Im(αΨ) + y Im(βΨ)])`
/// with `(x₀, y₀) = √2 (Re(αΨ), Re(βΨ))`, times the constant phase
/// `e^{−i[Re(αΨ)Im(αΨ) + Re(βΨ)Im(βΨ)]}` that makes it equal to the Fock
/// expansion (the phase drops out of every density). Note the closed form
/// describes the untruncated state. Anisotropic states are summed termwise.
pub fn schrodinger_wavefunction(state: &SchrodingerState, x: f64, y: f64) -> Result<C64> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::NonFinite("position"));
    }
    if state.ratio.is_isotropic() {
        let a = state.params.alpha() * state.psi;
        let b = state.params.beta() * state.psi;
        let (dx, dy) = (x - SQRT_2 * a.re, y - SQRT_2 * b.re);
        let modulus = (-0.5 * (dx * dx + dy * dy)).exp() / PI.sqrt();
        let phase = SQRT_2 * (x * a.im + y * b.im) - (a.re * a.im + b.re * b.im);
        Ok(C64::from_polar(modulus, phase))
    } else {
        schrodinger_wavefunction_expansion(state, x, y)
    }
}

/// Termwise evaluation of the truncated expansion, ascending in `ν`.
pub fn schrodinger_wavefunction_expansion(state: &SchrodingerState, x: f64, y: f64) -> Result<C64> {
    expansion_at(&state.terms, state.max_modes(), x, y)
}

/// Density maximum `(√2 Re(αΨ), √2 Re(βΨ))` of an isotropic state.
pub fn peak_location(state: &SchrodingerState) -> Result<(f64, f64)> {
    state.require_isotropic()?;
    Ok((
        SQRT_2 * (state.params.alpha() * state.psi).re,
        SQRT_2 * (state.params.beta() * state.psi).re,
    ))
}

/// Isotropic states are minimal-uncertainty states: every quadrature
/// variance is ½.
pub fn schrodinger_variances(state: &SchrodingerState) -> Result<QuadratureVariances> {
    state.require_isotropic()?;
    Ok(QuadratureVariances { var_x: 0.5, var_px: 0.5, var_y: 0.5, var_py: 0.5 })
}

/// Parameters of a state, for reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SchrodingerSummary {
    pub psi: [f64; 2],
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub p: u32,
    pub q: u32,
    pub truncation: usize,
    pub captured_norm: f64,
    pub expected_captured_norm: f64,
}

impl SchrodingerState {
    pub fn summary(&self) -> SchrodingerSummary {
        SchrodingerSummary {
            psi: [self.psi.re, self.psi.im],
            alpha: [self.params.alpha().re, self.params.alpha().im],
            beta: [self.params.beta().re, self.params.beta().im],
            p: self.ratio.p(),
            q: self.ratio.q(),
            truncation: self.truncation,
            captured_norm: schrodinger_coefficients(self).captured_norm(),
            expected_captured_norm: self.expected_captured_norm(),
        }
    }
}
