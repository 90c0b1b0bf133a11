//! Harmonic-oscillator eigenfunctions, 1D coherent amplitudes, and the
//! log-space combinatorics shared by the state constructors.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Default cap on the Hermite-function order.
pub const HERMITE_ORDER_CAP: usize = 1024;

/// Default Poisson tail tolerance for truncating infinite expansions.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;

/// Amplitudes below this magnitude are not stored in a [`CoeffVector`].
pub const DROP_BELOW: f64 = 1e-15;

/// Fock label `|n, m⟩` of a 2D number eigenstate.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeIndex2D {
    pub n: usize,
    pub m: usize,
}

impl ModeIndex2D {
    pub const fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }

    /// Isotropic eigenvalue `E_{n,m} = n + m + 1`.
    pub fn energy(&self) -> f64 {
        (self.n + self.m + 1) as f64
    }
}

impl From<(usize, usize)> for ModeIndex2D {
    fn from((n, m): (usize, usize)) -> Self {
        Self { n, m }
    }
}

/// Sparse expansion of a state over the 2D Fock basis.
///
/// Entries are kept in lexicographic `(n, m)` order. Amplitudes smaller than
/// [`DROP_BELOW`] are never stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoeffVector {
    entries: BTreeMap<ModeIndex2D, C64>,
}

impl CoeffVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Set the amplitude at `idx`, replacing any previous value.
    pub fn insert(&mut self, idx: ModeIndex2D, amplitude: C64) {
        if amplitude.norm() < DROP_BELOW {
            self.entries.remove(&idx);
        } else {
            self.entries.insert(idx, amplitude);
        }
    }

    pub fn get(&self, idx: ModeIndex2D) -> C64 {
        self.entries.get(&idx).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex2D, C64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    /// Sum of the stored `|c|²`.
    pub fn captured_norm(&self) -> f64 {
        let mut acc = NeumaierSum::default();
        for c in self.entries.values() {
            acc.add(c.norm_sqr());
        }
        acc.value()
    }

    /// `⟨self|ket⟩`.
    pub fn inner(&self, ket: &CoeffVector) -> C64 {
        let (small, large, conj_small) = if self.len() <= ket.len() {
            (self, ket, true)
        } else {
            (ket, self, false)
        };
        let mut acc = ComplexSum::default();
        for (idx, a) in small.iter() {
            if let Some(b) = large.entries.get(&idx) {
                if conj_small {
                    acc.add(a.conj() * b);
                } else {
                    acc.add(b.conj() * a);
                }
            }
        }
        acc.value()
    }

    /// Largest componentwise `|self − other|` over the union of supports.
    pub fn max_abs_diff(&self, other: &CoeffVector) -> f64 {
        let mut worst = 0.0f64;
        for (idx, a) in self.iter() {
            worst = worst.max((a - other.get(idx)).norm());
        }
        for (idx, b) in other.iter() {
            if !self.entries.contains_key(&idx) {
                worst = worst.max(b.norm());
            }
        }
        worst
    }

    /// Largest `n` and largest `m` among stored entries.
    pub fn max_modes(&self) -> Option<(usize, usize)> {
        if self.is_empty() {
            return None;
        }
        let n = self.entries.keys().map(|k| k.n).max().unwrap_or(0);
        let m = self.entries.keys().map(|k| k.m).max().unwrap_or(0);
        Some((n, m))
    }
}

impl FromIterator<(ModeIndex2D, C64)> for CoeffVector {
    fn from_iter<I: IntoIterator<Item = (ModeIndex2D, C64)>>(iter: I) -> Self {
        let mut v = CoeffVector::new();
        for (idx, c) in iter {
            v.insert(idx, c);
        }
        v
    }
}

/// Neumaier-compensated running sum.
#[derive(Copy, Clone, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Componentwise compensated sum of complex values.
#[derive(Copy, Clone, Debug, Default)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

pub(crate) fn check_finite(z: C64, what: &'static str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Values `ψ_0(x), …, ψ_{n_max}(x)` of the normalized 1D oscillator
/// eigenfunctions, using the default order cap.
pub fn hermite_psi_table(n_max: usize, x: f64) -> Result<Vec<f64>> {
    hermite_psi_table_with_cap(n_max, x, HERMITE_ORDER_CAP)
}

/// As [`hermite_psi_table`] with an explicit order cap.
///
/// Uses the normalized recurrence
/// `ψ_n = x √(2/n) ψ_{n−1} − √((n−1)/n) ψ_{n−2}`, which never forms the
/// Hermite polynomials themselves. The Gaussian prefactor is applied at the
/// end; when it would underflow the recurrence is carried with a separate
/// logarithmic scale.
#[allow(clippy::needless_range_loop)]
pub fn hermite_psi_table_with_cap(n_max: usize, x: f64, cap: usize) -> Result<Vec<f64>> {
    if n_max > cap {
        return Err(Error::OrderOverflow { order: n_max, cap });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("hermite_psi argument"));
    }
    let mut out = vec![0.0; n_max + 1];
    let log_base = -0.5 * x * x - 0.25 * PI.ln();
    let base = log_base.exp();

    // ψ_n / base stays below 1 / base, so no rescaling is needed unless the
    // prefactor itself is close to underflow.
    let direct = base > 1e-290;
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let emit = |cur: f64, log_scale: f64| -> f64 {
        if direct {
            cur * base
        } else if cur == 0.0 {
            0.0
        } else {
            cur.signum() * (cur.abs().ln() + log_scale + log_base).exp()
        }
    };
    out[0] = emit(cur, log_scale);
    for n in 1..=n_max {
        let nf = n as f64;
        let next = x * (2.0 / nf).sqrt() * cur - ((nf - 1.0) / nf).sqrt() * prev;
        prev = cur;
        cur = next;
        if !direct && cur.abs() > 1e150 {
            cur *= 1e-150;
            prev *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
        }
        out[n] = emit(cur, log_scale);
    }
    Ok(out)
}

/// `ψ_n(x) = (2ⁿ n!)^{-1/2} π^{-1/4} e^{-x²/2} H_n(x)`.
pub fn hermite_psi(n: usize, x: f64) -> Result<f64> {
    Ok(hermite_psi_table(n, x)?[n])
}

/// `⟨x, y|n, m⟩ = ψ_n(x) ψ_m(y)`.
pub fn psi_2d(idx: ModeIndex2D, x: f64, y: f64) -> Result<f64> {
    Ok(hermite_psi(idx.n, x)? * hermite_psi(idx.m, y)?)
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// `ln √(ν choose n)`.
pub fn log_binomial_sqrt(nu: usize, n: usize) -> Result<f64> {
    if n > nu {
        return Err(Error::BinomialDomain { nu, n });
    }
    Ok(0.5 * (ln_factorial(nu) - ln_factorial(n) - ln_factorial(nu - n)))
}

/// Fock amplitude `⟨n|z⟩ = e^{−|z|²/2} zⁿ / √(n!)` of a 1D coherent state,
/// evaluated as log-magnitude plus phase.
pub fn coherent1d_coeff(z: C64, n: usize) -> Result<C64> {
    check_finite(z, "coherent state label")?;
    let r = z.norm();
    if r == 0.0 {
        return Ok(if n == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    }
    let ln_mag = -0.5 * r * r + n as f64 * r.ln() - 0.5 * ln_factorial(n);
    Ok(C64::from_polar(ln_mag.exp(), n as f64 * z.arg()))
}

/// `ln` of the Poisson mass `e^{−λ} λ^k / k!`; `-∞` for impossible outcomes.
pub fn ln_poisson_pmf(mean: f64, k: usize) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + k as f64 * mean.ln() - ln_factorial(k)
}

pub fn poisson_pmf(mean: f64, k: usize) -> f64 {
    ln_poisson_pmf(mean, k).exp()
}

/// `Σ_{k < terms} e^{−λ} λ^k / k!`.
pub fn poisson_partial_sum(mean: f64, terms: usize) -> f64 {
    let mut acc = NeumaierSum::default();
    for k in (0..terms).rev() {
        acc.add(poisson_pmf(mean, k));
    }
    acc.value()
}

/// Poisson mass not captured by the first `terms` outcomes, `Σ_{k ≥ terms}`.
///
/// Above the mode the tail is summed directly in descending-magnitude order,
/// so tiny tails keep full relative accuracy.
pub fn poisson_tail(mean: f64, terms: usize) -> f64 {
    if (terms as f64) <= mean {
        return (1.0 - poisson_partial_sum(mean, terms)).max(0.0);
    }
    let mut acc = NeumaierSum::default();
    let mut k = terms;
    loop {
        let p = poisson_pmf(mean, k);
        acc.add(p);
        if p == 0.0 || p < 1e-20 * acc.value() {
            break;
        }
        k += 1;
    }
    acc.value()
}

/// Number of leading terms to keep so that the Poisson tail beyond them is
/// below `eps`: the smallest `N ≥ 1` with `Σ_{k ≥ N} pmf(k) < eps`.
pub fn poisson_truncation(mean: f64, eps: f64) -> usize {
    let eps = eps.max(f64::MIN_POSITIVE);
    let mut terms = (mean.floor() as usize).max(1);
    while terms > 1 && poisson_tail(mean, terms - 1) < eps {
        terms -= 1;
    }
    while poisson_tail(mean, terms) >= eps {
        terms += 1;
    }
    terms
}
