//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::f64::consts::PI;

use coherent2d::oracle::{
    build_generalized_ladder, build_number, build_quadrature, variance, Direction, Mode, Quadrature, StateVector,
    TruncatedSpace,
};
use coherent2d::oscillator::ln_factorial;
use coherent2d::su2::QuadratureVariances;
use coherent2d::{AnisotropyRatio, CoeffVector, ModeIndex2D, SU2Params, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on the unit 3-sphere: `u = |α|²` is uniform on `[0, 1]`.
pub fn random_params(rng: &mut ChaCha8Rng) -> SU2Params {
    let u: f64 = rng.random();
    SU2Params::from_polar(u, rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)).unwrap()
}

/// Uniform in the disc `|Ψ| ≤ r_max`.
pub fn random_psi(rng: &mut ChaCha8Rng, r_max: f64) -> C64 {
    let r = r_max * rng.random::<f64>().sqrt();
    C64::from_polar(r, rng.random_range(0.0..2.0 * PI))
}

/// `(A⁺)^ν |0⟩ / √ν!` built by repeated application of the oracle's
/// raising operator.
pub fn su2_by_ladder(nu: usize, params: &SU2Params) -> CoeffVector {
    let space = TruncatedSpace::new(nu, nu);
    let raise = build_generalized_ladder(space, params, Direction::Raise);
    let mut v = StateVector::vacuum(space);
    for k in 1..=nu {
        v = raise.apply(&v).unwrap().scaled(C64::new(1.0 / (k as f64).sqrt(), 0.0));
    }
    v.to_coeffs()
}

/// Relabels `|n, m⟩ → |pn, qm⟩`.
pub fn relabel_pq(coeffs: &CoeffVector, ratio: AnisotropyRatio) -> CoeffVector {
    coeffs.iter().map(|(idx, c)| (ratio.map(idx.n, idx.m), c)).collect()
}

/// Space holding every stored mode of `coeffs` plus `margin` levels.
pub fn space_for(coeffs: &CoeffVector, margin: usize) -> TruncatedSpace {
    let (n, m) = coeffs.max_modes().unwrap_or((0, 0));
    TruncatedSpace::new(n + margin, m + margin)
}

/// Quadrature variances of an embedded state, computed by the oracle.
/// Two levels of headroom keep `X²` exact on every stored mode.
pub fn oracle_variances(coeffs: &CoeffVector) -> QuadratureVariances {
    let space = space_for(coeffs, 2);
    let v = StateVector::from_coeffs(space, coeffs).unwrap();
    let var = |q| variance(&build_quadrature(space, q), &v).unwrap();
    QuadratureVariances {
        var_x: var(Quadrature::X),
        var_px: var(Quadrature::Px),
        var_y: var(Quadrature::Y),
        var_py: var(Quadrature::Py),
    }
}

/// `⟨a_x⁺a_x⁻ + a_y⁺a_y⁻ + 1⟩` from the oracle.
pub fn oracle_energy(coeffs: &CoeffVector) -> f64 {
    let space = space_for(coeffs, 1);
    let v = StateVector::from_coeffs(space, coeffs).unwrap();
    let total = build_number(space, Mode::X).add(&build_number(space, Mode::Y)).unwrap();
    coherent2d::oracle::expectation(&total, &v).unwrap().re + 1.0
}

pub fn max_abs_diff(a: &CoeffVector, b: &CoeffVector) -> f64 {
    a.max_abs_diff(b)
}

/// Same, restricted to modes with both occupations `≤ limit`.
pub fn max_abs_diff_within(a: &CoeffVector, b: &CoeffVector, limit: usize) -> f64 {
    let keep = |idx: ModeIndex2D| idx.n <= limit && idx.m <= limit;
    let mut worst: f64 = 0.0;
    for (idx, c) in a.iter().filter(|(i, _)| keep(*i)) {
        worst = worst.max((c - b.get(idx)).norm());
    }
    for (idx, c) in b.iter().filter(|(i, _)| keep(*i)) {
        worst = worst.max((c - a.get(idx)).norm());
    }
    worst
}

/// Physicists' Hermite polynomials `(H_n(x), H_{n−1}(x))`, unnormalized.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    (h1, h0)
}

/// Gauss–Hermite rule for `∫ e^{−x²} f(x) dx`, returned with the weights
/// already multiplied by `e^{x²}` so it integrates `f` directly.
///
/// Nodes start from the eigenvalues of the Jacobi matrix and are polished by
/// Newton steps on `H_n`; the weights come from
/// `2^{n−1} n! √π / (n² H_{n−1}(x)²)` evaluated in log space.
pub fn gauss_hermite_scaled(n: usize) -> Vec<(f64, f64)> {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    nodes
        .into_iter()
        .map(|mut x| {
            for _ in 0..5 {
                let (h, hm1) = hermite_pair(n, x);
                x -= h / (2.0 * n as f64 * hm1);
            }
            let (_, hm1) = hermite_pair(n, x);
            let ln_w = 0.5 * PI.ln() + (n as f64 - 1.0) * 2f64.ln() + ln_factorial(n - 1) - (n as f64).ln()
                - 2.0 * hm1.abs().ln()
                + x * x;
            (x, ln_w.exp())
        })
        .collect()
}
