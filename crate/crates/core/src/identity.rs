//! Numerical resolution-of-identity checks.
//!
//! Each routine assembles an identity candidate by quadrature over the
//! coherent-state parameters and returns the matrix, so callers can compare
//! it against a target. Phases enter every matrix element only through
//! harmonics `e^{ik(φ_α − φ_β)}`, so `φ_β` is pinned to zero and its volume
//! `2π` restored by hand; the remaining phase runs on a uniform grid, which
//! averages those harmonics exactly. The S³ measure in `u = |α|²` is
//! `(1/4) du dφ_α dφ_β`, and `u` is integrated by Gauss–Legendre.
//!
//! The plane measure `d²Ψ/π` becomes `(1/2π) dt dθ` with `t = |Ψ|²`; the
//! `e^{−t}` carried by every Schrödinger projector is the Gauss–Laguerre
//! weight.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::oscillator::{ln_factorial, log_binomial_sqrt, CoeffVector, ModeIndex2D};
use crate::quadrature::{gauss_laguerre, gauss_legendre_unit, uniform_angles};
use crate::su2::AnisotropyRatio;
use crate::C64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct S3QuadratureSpec {
    pub u_nodes: usize,
    pub phase_nodes: usize,
}

impl S3QuadratureSpec {
    /// `u_nodes = ν + 4`, `phase_nodes = 2ν + 2`.
    pub fn for_nu(nu_max: usize) -> Self {
        Self { u_nodes: nu_max + 4, phase_nodes: 2 * nu_max + 2 }
    }

    pub fn validate(&self, nu_max: usize) -> Result<()> {
        if self.u_nodes == 0 {
            return Err(Error::UnderResolved("u_nodes must be positive".into()));
        }
        if self.phase_nodes < 2 * nu_max + 2 {
            return Err(Error::UnderResolved(format!(
                "phase_nodes = {} < 2*nu + 2 = {} for nu = {nu_max}",
                self.phase_nodes,
                2 * nu_max + 2
            )));
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaneQuadratureSpec {
    pub radial_nodes: usize,
    pub angular_nodes: usize,
}

impl PlaneQuadratureSpec {
    /// `radial_nodes = 2(ν + 2)`, `angular_nodes = 2ν + 2`.
    pub fn for_nu(nu_max: usize) -> Self {
        Self { radial_nodes: 2 * (nu_max + 2), angular_nodes: 2 * nu_max + 2 }
    }

    /// `max_power` is the largest power of `t` (after the `e^{−t}` weight)
    /// the rule must integrate exactly.
    fn validate(&self, nu_max: usize, max_power: usize) -> Result<()> {
        if 2 * self.radial_nodes < max_power + 1 {
            return Err(Error::UnderResolved(format!(
                "radial_nodes = {} cannot integrate t^{max_power} e^-t exactly",
                self.radial_nodes
            )));
        }
        if self.angular_nodes < 2 * nu_max + 2 {
            return Err(Error::UnderResolved(format!(
                "angular_nodes = {} < 2*nu + 2 = {} for nu = {nu_max}",
                self.angular_nodes,
                2 * nu_max + 2
            )));
        }
        Ok(())
    }
}

/// An assembled identity candidate with the Fock labels of its rows and
/// columns. One-mode candidates use `m = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityCandidate {
    pub labels: Vec<ModeIndex2D>,
    pub matrix: DMatrix<C64>,
}

impl IdentityCandidate {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn position(&self, idx: ModeIndex2D) -> Option<usize> {
        self.labels.iter().position(|l| *l == idx)
    }

    pub fn entry(&self, row: ModeIndex2D, col: ModeIndex2D) -> Option<C64> {
        Some(self.matrix[(self.position(row)?, self.position(col)?)])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |M_ij − δ_ij t(label_i)|` over rows and columns accepted by
    /// `keep`.
    pub fn max_deviation(&self, target: impl Fn(ModeIndex2D) -> f64, keep: impl Fn(ModeIndex2D) -> bool) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            if !keep(self.labels[i]) {
                continue;
            }
            for j in 0..n {
                if !keep(self.labels[j]) {
                    continue;
                }
                let want = if i == j { target(self.labels[i]) } else { 0.0 };
                worst = worst.max((self.matrix[(i, j)] - C64::new(want, 0.0)).norm());
            }
        }
        worst
    }

    pub fn max_deviation_from_identity(&self) -> f64 {
        self.max_deviation(|_| 1.0, |_| true)
    }
}

/// `√C(ν,n) αⁿ β^{ν−n}` at `α = √u e^{iφ}`, `β = √(1−u)`.
fn shell_amplitude(nu: usize, n: usize, u: f64, phi: f64) -> C64 {
    let ln_mag = log_binomial_sqrt(nu, n).expect("n <= nu")
        + 0.5 * n as f64 * u.ln()
        + 0.5 * (nu - n) as f64 * (1.0 - u).ln();
    C64::from_polar(ln_mag.exp(), n as f64 * phi)
}

/// `(1/π²)∫ g_a ḡ_b` over the constrained S³ for the shell members in
/// `labels`, where `g` is the shell amplitude of each label's `ν`. Entries
/// between different shells use each label's own `ν`.
fn s3_moment_matrix(labels: &[(usize, usize)], spec: &S3QuadratureSpec) -> DMatrix<C64> {
    let rule = gauss_legendre_unit(spec.u_nodes);
    let angles = uniform_angles(spec.phase_nodes);
    // (1/π²)·(1/4)·2π·(2π/K) = 1/K per phase node.
    let phase_weight = 1.0 / spec.phase_nodes as f64;
    let dim = labels.len();
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    let mut g = vec![C64::new(0.0, 0.0); dim];
    for (u, wu) in rule.iter() {
        for &phi in &angles {
            for (k, &(nu, n)) in labels.iter().enumerate() {
                g[k] = shell_amplitude(nu, n, u, phi);
            }
            let w = wu * phase_weight;
            for a in 0..dim {
                let ga = g[a] * w;
                for b in 0..dim {
                    acc[(a, b)] += ga * g[b].conj();
                }
            }
        }
    }
    acc
}

/// `(ν+1)/π² ∫ |ν⟩⟨ν|` on the `(ν+1)`-dimensional shell. Rows are ordered
/// by `n`, labelled by the mapped modes `(pn, q(ν−n))`. For `p:q ≠ 1:1` this
/// closes the identity on the span of the mapped shell.
pub fn su2_identity_matrix(nu: usize, ratio: AnisotropyRatio, spec: &S3QuadratureSpec) -> Result<IdentityCandidate> {
    spec.validate(nu)?;
    let members: Vec<(usize, usize)> = (0..=nu).map(|n| (nu, n)).collect();
    let matrix = s3_moment_matrix(&members, spec).scale((nu + 1) as f64);
    let labels = (0..=nu).map(|n| ratio.map(n, nu - n)).collect();
    Ok(IdentityCandidate { labels, matrix })
}

/// `Σ_ν (ν+1)/π² ∫ |ν⟩⟨ν|` for `ν = 0..=n_max+m_max`, restricted to the
/// modes with `n ≤ n_max`, `m ≤ m_max`. Modes outside the mapped shells of
/// `ratio` get zero rows.
pub fn full_identity_diagonal(
    n_max: usize,
    m_max: usize,
    ratio: AnisotropyRatio,
    spec: &S3QuadratureSpec,
) -> Result<IdentityCandidate> {
    let nu_top = n_max + m_max;
    spec.validate(nu_top)?;
    let labels: Vec<ModeIndex2D> =
        (0..=n_max).flat_map(|n| (0..=m_max).map(move |m| ModeIndex2D::new(n, m))).collect();
    let dim = labels.len();
    let mut matrix = DMatrix::<C64>::zeros(dim, dim);
    for nu in 0..=nu_top {
        let shell = su2_identity_matrix(nu, ratio, spec)?;
        let slots: Vec<Option<usize>> =
            shell.labels.iter().map(|l| labels.iter().position(|x| x == l)).collect();
        for (a, sa) in slots.iter().enumerate() {
            for (b, sb) in slots.iter().enumerate() {
                if let (Some(i), Some(j)) = (sa, sb) {
                    matrix[(*i, *j)] += shell.matrix[(a, b)];
                }
            }
        }
    }
    Ok(IdentityCandidate { labels, matrix })
}

/// `(ν+1)/π² ∫ √C(ν,n) ᾱⁿ β̄ᵐ |ν⟩` with `ν = n + m`, which should return
/// `|n, m⟩`.
pub fn fock_reconstruction(n: usize, m: usize, spec: &S3QuadratureSpec) -> Result<CoeffVector> {
    let nu = n + m;
    spec.validate(nu)?;
    let mut members = vec![(nu, n)];
    members.extend((0..=nu).map(|k| (nu, k)));
    let moments = s3_moment_matrix(&members, spec);
    let scale = (nu + 1) as f64;
    // Row k+1 against column 0 is ∫ g_k ḡ_n.
    Ok((0..=nu).map(|k| (ModeIndex2D::new(k, nu - k), moments[(k + 1, 0)] * scale)).collect())
}

/// `∫ d²Ψ/π [|Ψ|²] (1/π²)∫ |Ψ⟩⟨Ψ|` on the isotropic modes with
/// `n ≤ n_max`, `m ≤ m_max`. The weighted measure should give the identity;
/// without the weight the diagonal is `1/(n+m+1)`.
///
/// The integrand separates into a plane factor depending only on the shell
/// labels `ν, ν′` and an S³ factor, so the tensor-product quadrature is
/// evaluated as the entrywise product of the two factor matrices.
pub fn weighted_schrodinger_identity(
    n_max: usize,
    m_max: usize,
    s3: &S3QuadratureSpec,
    plane: &PlaneQuadratureSpec,
    weighted: bool,
) -> Result<IdentityCandidate> {
    let nu_top = n_max + m_max;
    s3.validate(nu_top)?;
    plane.validate(nu_top, nu_top + usize::from(weighted))?;
    let labels: Vec<ModeIndex2D> =
        (0..=n_max).flat_map(|n| (0..=m_max).map(move |m| ModeIndex2D::new(n, m))).collect();
    let members: Vec<(usize, usize)> = labels.iter().map(|l| (l.n + l.m, l.n)).collect();
    let sphere = s3_moment_matrix(&members, s3);
    let radial = plane_moment_matrix(nu_top, plane, weighted);
    let dim = labels.len();
    let matrix = DMatrix::from_fn(dim, dim, |a, b| sphere[(a, b)] * radial[(members[a].0, members[b].0)]);
    Ok(IdentityCandidate { labels, matrix })
}

/// `∫ d²Ψ/π [t] e^{−t} Ψ^ν Ψ̄^{ν′} / √(ν! ν′!)` for `ν, ν′ ≤ nu_top`.
fn plane_moment_matrix(nu_top: usize, spec: &PlaneQuadratureSpec, weighted: bool) -> DMatrix<C64> {
    let rule = gauss_laguerre(spec.radial_nodes);
    let angles = uniform_angles(spec.angular_nodes);
    // (1/2π)·(2π/K) per angle node.
    let angle_weight = 1.0 / spec.angular_nodes as f64;
    let dim = nu_top + 1;
    let mut acc = DMatrix::<C64>::zeros(dim, dim);
    let mut f = vec![C64::new(0.0, 0.0); dim];
    for (t, wt) in rule.iter() {
        let w = if weighted { wt * t } else { wt } * angle_weight;
        for &theta in &angles {
            for (nu, slot) in f.iter_mut().enumerate() {
                let ln_mag = 0.5 * nu as f64 * t.ln() - 0.5 * ln_factorial(nu);
                *slot = C64::from_polar(ln_mag.exp(), nu as f64 * theta);
            }
            for a in 0..dim {
                let fa = f[a] * w;
                for b in 0..dim {
                    acc[(a, b)] += fa * f[b].conj();
                }
            }
        }
    }
    acc
}

/// `∫ d²z/π |z⟩⟨z|` for one mode on `n = 0..=n_max`.
pub fn coherent1d_identity(n_max: usize, spec: &PlaneQuadratureSpec) -> Result<IdentityCandidate> {
    spec.validate(n_max, n_max)?;
    let matrix = plane_moment_matrix(n_max, spec, false);
    let labels = (0..=n_max).map(|n| ModeIndex2D::new(n, 0)).collect();
    Ok(IdentityCandidate { labels, matrix })
}

/// One line of an identity verification report.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub target: String,
    pub max_abs_deviation: f64,
    pub hermiticity_defect: f64,
    pub tolerance: f64,
    pub spec: serde_json::Value,
    pub pass: bool,
}

impl IdentityReport {
    /// A check passes when `hermiticity_defect ≤ 1e-13` and
    /// `deviation ≤ tolerance`.
    pub fn new(
        name: impl Into<String>,
        target: impl Into<String>,
        deviation: f64,
        hermiticity_defect: f64,
        tolerance: f64,
        spec: serde_json::Value,
    ) -> Self {
        Self {
            name: name.into(),
            target: target.into(),
            max_abs_deviation: deviation,
            hermiticity_defect,
            tolerance,
            spec,
            pass: hermiticity_defect <= HERMITICITY_TOLERANCE && deviation <= tolerance,
        }
    }

    /// Report for an assembled matrix, taking its Hermiticity defect.
    pub fn for_candidate(
        name: impl Into<String>,
        target: impl Into<String>,
        candidate: &IdentityCandidate,
        deviation: f64,
        tolerance: f64,
        spec: serde_json::Value,
    ) -> Self {
        Self::new(name, target, deviation, candidate.hermiticity_defect(), tolerance, spec)
    }
}

pub const HERMITICITY_TOLERANCE: f64 = 1e-13;
