//! Gauss–Legendre and Gauss–Laguerre rules.
//!
//! Nodes are found by Newton iteration on the three-term recurrences and the
//! weights use derivative-free forms that keep relative accuracy for the
//! small weights far out on the Laguerre axis.

use std::f64::consts::PI;

/// Nodes and weights of a one-dimensional rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

const MAX_NEWTON: usize = 100;

/// `(P_n(x), P_{n-1}(x))`.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Gauss–Legendre rule on `[-1, 1]`; exact for polynomials of degree `2n − 1`.
pub fn gauss_legendre(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..MAX_NEWTON {
            let (p, pm1) = legendre_pair(n, x);
            let dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-3) {
                break;
            }
        }
        let (p, pm1) = legendre_pair(n, x);
        let dp = nf * (x * p - pm1) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Gauss–Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Rule {
    let r = gauss_legendre(n);
    Rule {
        nodes: r.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
        weights: r.weights.iter().map(|w| 0.5 * w).collect(),
    }
}

/// `(L_n(t), L_{n-1}(t))`.
fn laguerre_pair(n: usize, t: f64) -> (f64, f64) {
    let (mut l0, mut l1) = (0.0, 1.0);
    for k in 1..=n {
        let k = k as f64;
        let l2 = ((2.0 * k - 1.0 - t) * l1 - (k - 1.0) * l0) / k;
        l0 = l1;
        l1 = l2;
    }
    (l1, l0)
}

/// Gauss–Laguerre rule for `∫₀^∞ e^{−t} f(t) dt`; exact for polynomials of
/// degree `2n − 1`.
pub fn gauss_laguerre(n: usize) -> Rule {
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Starting guesses from the asymptotic spacing of the zeros.
        let mut t = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => nodes[0] + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                nodes[i - 1] + (1.0 + 2.55 * ai) / (1.9 * ai) * (nodes[i - 1] - nodes[i - 2])
            }
        };
        for _ in 0..MAX_NEWTON {
            let (l, lm1) = laguerre_pair(n, t);
            let dl = nf * (l - lm1) / t;
            let dt = l / dl;
            t -= dt;
            if dt.abs() <= 1e-16 * t {
                break;
            }
        }
        let (_, lm1) = laguerre_pair(n, t);
        nodes.push(t);
        weights.push(t / (nf * nf * lm1 * lm1));
    }
    Rule { nodes, weights }
}

/// Uniform grid of `k` angles on `[0, 2π)`; with weight `1/k` each it
/// averages `e^{ijθ}` exactly for `|j| < k`.
pub fn uniform_angles(k: usize) -> Vec<f64> {
    (0..k).map(|j| 2.0 * PI * j as f64 / k as f64).collect()
}
