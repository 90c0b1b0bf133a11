//! Truncated Fock-space matrix engine.
//!
//! This module is the brute-force reference the closed forms elsewhere in the
//! crate are checked against. It knows nothing about SU(2) coefficients or
//! Poisson weights: states enter as plain vectors, and every property is
//! computed from ladder-operator matrices.
//!
//! The basis of a [`TruncatedSpace`] is every `|n, m⟩` with `n ≤ n_max`,
//! `m ≤ m_max`, ordered lexicographically (n-major): `|n, m⟩` has index
//! `n·(m_max + 1) + m`. Raising operators map the top Fock level of their
//! mode to zero, so results are only trustworthy on the interior, away from
//! the cutoff.
//!
//! Operators are stored in compressed sparse rows. The ladder algebra has at
//! most a handful of entries per row, which keeps anisotropic spaces with
//! ~10⁴ basis states cheap; [`TruncatedOperator::to_dense`] is used where a
//! dense matrix is genuinely needed (the matrix exponential).

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::oscillator::{poisson_tail, CoeffVector, ComplexSum, ModeIndex2D, NeumaierSum};
use crate::su2::{AnisotropyRatio, SU2Params};
use crate::C64;

/// Interior margin below the cutoff used by default for oracle comparisons.
pub const INTERIOR_MARGIN: usize = 5;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct TruncatedSpace {
    n_max: usize,
    m_max: usize,
}

impl TruncatedSpace {
    pub fn new(n_max: usize, m_max: usize) -> Self {
        Self { n_max, m_max }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.m_max + 1)
    }

    pub fn index(&self, idx: ModeIndex2D) -> Option<usize> {
        (idx.n <= self.n_max && idx.m <= self.m_max).then(|| idx.n * (self.m_max + 1) + idx.m)
    }

    pub fn mode(&self, i: usize) -> ModeIndex2D {
        ModeIndex2D::new(i / (self.m_max + 1), i % (self.m_max + 1))
    }

    /// Whether `idx` is at least `margin` levels below both cutoffs.
    pub fn is_interior(&self, idx: ModeIndex2D, margin: usize) -> bool {
        idx.n + margin <= self.n_max && idx.m + margin <= self.m_max
    }

    fn dims(&self) -> (usize, usize) {
        (self.n_max, self.m_max)
    }

    fn check_same(&self, other: &TruncatedSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch { left: self.dims(), right: other.dims() })
        }
    }

    fn outside(&self, idx: ModeIndex2D) -> Error {
        Error::OutsideSpace { n: idx.n, m: idx.m, n_max: self.n_max, m_max: self.m_max }
    }
}

/// Dense amplitude vector over a [`TruncatedSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: TruncatedSpace,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn zeros(space: TruncatedSpace) -> Self {
        Self { space, amplitudes: vec![C64::new(0.0, 0.0); space.dim()] }
    }

    pub fn vacuum(space: TruncatedSpace) -> Self {
        Self::basis(space, ModeIndex2D::new(0, 0)).expect("vacuum is in every space")
    }

    pub fn basis(space: TruncatedSpace, idx: ModeIndex2D) -> Result<Self> {
        let i = space.index(idx).ok_or_else(|| space.outside(idx))?;
        let mut v = Self::zeros(space);
        v.amplitudes[i] = C64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn from_amplitudes(space: TruncatedSpace, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::SpaceMismatch { left: space.dims(), right: (amplitudes.len(), 0) });
        }
        Ok(Self { space, amplitudes })
    }

    /// Embeds a sparse expansion; every stored mode must lie in `space`.
    pub fn from_coeffs(space: TruncatedSpace, coeffs: &CoeffVector) -> Result<Self> {
        let mut v = Self::zeros(space);
        for (idx, c) in coeffs.iter() {
            let i = space.index(idx).ok_or_else(|| space.outside(idx))?;
            v.amplitudes[i] = c;
        }
        Ok(v)
    }

    pub fn to_coeffs(&self) -> CoeffVector {
        self.amplitudes.iter().enumerate().map(|(i, c)| (self.space.mode(i), *c)).collect()
    }

    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn get(&self, idx: ModeIndex2D) -> C64 {
        self.space.index(idx).map(|i| self.amplitudes[i]).unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut acc = NeumaierSum::default();
        for c in &self.amplitudes {
            acc.add(c.norm_sqr());
        }
        acc.value()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.space.check_same(&other.space)?;
        let mut acc = ComplexSum::default();
        for (a, b) in self.amplitudes.iter().zip(&other.amplitudes) {
            acc.add(a.conj() * b);
        }
        Ok(acc.value())
    }

    pub fn scaled(&self, factor: C64) -> StateVector {
        Self { space: self.space, amplitudes: self.amplitudes.iter().map(|c| c * factor).collect() }
    }

    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        self.space.check_same(&other.space)?;
        let amplitudes = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a + b).collect();
        Ok(Self { space: self.space, amplitudes })
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// Largest componentwise difference, restricted to modes at least
    /// `margin` levels below the cutoffs.
    pub fn max_abs_diff_interior(&self, other: &StateVector, margin: usize) -> Result<f64> {
        self.space.check_same(&other.space)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .enumerate()
            .filter(|(i, _)| self.space.is_interior(self.space.mode(*i), margin))
            .map(|(_, (a, b))| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn max_abs(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// One `re,im` line per basis state, in basis order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for c in &self.amplitudes {
            writeln!(w, "{},{}", c.re, c.im)?;
        }
        Ok(())
    }
}

/// Operator on a [`TruncatedSpace`] in compressed sparse row form.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOperator {
    space: TruncatedSpace,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl TruncatedOperator {
    /// Builds from `(row, col, value)` entries; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(space: TruncatedSpace, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let dim = space.dim();
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "entry ({r}, {c}) outside dimension {dim}");
            if rows.last() == Some(&r) && cols.last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                vals.push(v);
            }
        }
        let keep: Vec<bool> = vals.iter().map(|v| *v != C64::new(0.0, 0.0)).collect();
        let mut k = 0;
        let (mut cols_out, mut vals_out) = (Vec::new(), Vec::new());
        for (i, r) in rows.iter().enumerate() {
            if keep[i] {
                row_ptr[r + 1] += 1;
                cols_out.push(cols[i]);
                vals_out.push(vals[i]);
                k += 1;
            }
        }
        debug_assert_eq!(k, cols_out.len());
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { space, row_ptr, cols: cols_out, vals: vals_out }
    }

    pub fn zero(space: TruncatedSpace) -> Self {
        Self::from_triplets(space, Vec::new())
    }

    pub fn identity(space: TruncatedSpace) -> Self {
        Self::diagonal(space, |_| 1.0)
    }

    /// Diagonal operator with entries `f(|n, m⟩)`.
    pub fn diagonal(space: TruncatedSpace, f: impl Fn(ModeIndex2D) -> f64) -> Self {
        let t = (0..space.dim()).map(|i| (i, i, C64::new(f(space.mode(i)), 0.0))).collect();
        Self::from_triplets(space, t)
    }

    pub fn space(&self) -> TruncatedSpace {
        self.space
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.space.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[range.clone()].binary_search(&col) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    /// `⟨row|O|col⟩` addressed by Fock labels.
    pub fn element(&self, row: ModeIndex2D, col: ModeIndex2D) -> Result<C64> {
        let r = self.space.index(row).ok_or_else(|| self.space.outside(row))?;
        let c = self.space.index(col).ok_or_else(|| self.space.outside(col))?;
        Ok(self.get(r, c))
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.space.check_same(&v.space)?;
        let amplitudes = (0..self.space.dim())
            .map(|r| {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.vals[k] * v.amplitudes[self.cols[k]];
                }
                acc
            })
            .collect();
        Ok(StateVector { space: self.space, amplitudes })
    }

    pub fn adjoint(&self) -> TruncatedOperator {
        let t = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.space, t)
    }

    pub fn scale(&self, factor: C64) -> TruncatedOperator {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &TruncatedOperator) -> Result<TruncatedOperator> {
        self.space.check_same(&other.space)?;
        let t = self.triplets().chain(other.triplets()).collect();
        Ok(Self::from_triplets(self.space, t))
    }

    pub fn sub(&self, other: &TruncatedOperator) -> Result<TruncatedOperator> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &TruncatedOperator) -> Result<TruncatedOperator> {
        self.space.check_same(&other.space)?;
        let mut t = Vec::new();
        for r in 0..self.space.dim() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let mid = self.cols[k];
                for j in other.row_ptr[mid]..other.row_ptr[mid + 1] {
                    t.push((r, other.cols[j], self.vals[k] * other.vals[j]));
                }
            }
        }
        Ok(Self::from_triplets(self.space, t))
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &TruncatedOperator) -> Result<TruncatedOperator> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Largest `|O_{rc} − conj(O_{cr})|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        self.sub(&adj).expect("same space").vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.space.dim()];
        for (_, c, v) in self.triplets() {
            sums[c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = self.space.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn from_dense(space: TruncatedSpace, m: &DMatrix<C64>) -> Result<Self> {
        let dim = space.dim();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::SpaceMismatch { left: space.dims(), right: (m.nrows(), m.ncols()) });
        }
        let mut t = Vec::new();
        for r in 0..dim {
            for c in 0..dim {
                t.push((r, c, m[(r, c)]));
            }
        }
        Ok(Self::from_triplets(space, t))
    }

    /// Dense dump: one line per row, `re,im` pairs in adjacent columns.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = self.space.dim();
        for r in 0..dim {
            let line: Vec<String> = (0..dim)
                .map(|c| {
                    let v = self.get(r, c);
                    format!("{},{}", v.re, v.im)
                })
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Mode {
    X,
    Y,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    Raise,
    Lower,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Quadrature {
    X,
    Px,
    Y,
    Py,
}

/// `a_x^±` or `a_y^±`.
pub fn build_ladder(space: TruncatedSpace, mode: Mode, direction: Direction) -> TruncatedOperator {
    let mut t = Vec::new();
    for i in 0..space.dim() {
        let idx = space.mode(i);
        let (k, to) = match (mode, direction) {
            (Mode::X, Direction::Lower) if idx.n > 0 => (idx.n, ModeIndex2D::new(idx.n - 1, idx.m)),
            (Mode::X, Direction::Raise) => (idx.n + 1, ModeIndex2D::new(idx.n + 1, idx.m)),
            (Mode::Y, Direction::Lower) if idx.m > 0 => (idx.m, ModeIndex2D::new(idx.n, idx.m - 1)),
            (Mode::Y, Direction::Raise) => (idx.m + 1, ModeIndex2D::new(idx.n, idx.m + 1)),
            _ => continue,
        };
        if let Some(j) = space.index(to) {
            t.push((j, i, C64::new((k as f64).sqrt(), 0.0)));
        }
    }
    TruncatedOperator::from_triplets(space, t)
}

/// `A⁺ = α a_x⁺ + β a_y⁺` or `A⁻ = ᾱ a_x⁻ + β̄ a_y⁻`.
pub fn build_generalized_ladder(
    space: TruncatedSpace,
    params: &SU2Params,
    direction: Direction,
) -> TruncatedOperator {
    let (a, b) = match direction {
        Direction::Raise => (params.alpha(), params.beta()),
        Direction::Lower => (params.alpha().conj(), params.beta().conj()),
    };
    build_ladder(space, Mode::X, direction)
        .scale(a)
        .add(&build_ladder(space, Mode::Y, direction).scale(b))
        .expect("same space")
}

/// Number operator `a⁺a` of one mode.
pub fn build_number(space: TruncatedSpace, mode: Mode) -> TruncatedOperator {
    TruncatedOperator::diagonal(space, |idx| match mode {
        Mode::X => idx.n as f64,
        Mode::Y => idx.m as f64,
    })
}

/// `X̂ = (a⁺ + a⁻)/√2` and `P̂ = (a⁻ − a⁺)/(√2 i)` for either mode.
pub fn build_quadrature(space: TruncatedSpace, which: Quadrature) -> TruncatedOperator {
    let mode = match which {
        Quadrature::X | Quadrature::Px => Mode::X,
        Quadrature::Y | Quadrature::Py => Mode::Y,
    };
    let raise = build_ladder(space, mode, Direction::Raise);
    let lower = build_ladder(space, mode, Direction::Lower);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match which {
        Quadrature::X | Quadrature::Y => raise.add(&lower).expect("same space").scale(C64::new(s, 0.0)),
        Quadrature::Px | Quadrature::Py => {
            lower.sub(&raise).expect("same space").scale(C64::new(0.0, -s))
        }
    }
}

/// Hamiltonian with frequencies `ω_x = p`, `ω_y = q`: diagonal
/// `p(n + ½) + q(m + ½)`.
pub fn build_hamiltonian(space: TruncatedSpace, ratio: AnisotropyRatio) -> TruncatedOperator {
    let (p, q) = (ratio.p() as f64, ratio.q() as f64);
    TruncatedOperator::diagonal(space, |idx| p * (idx.n as f64 + 0.5) + q * (idx.m as f64 + 0.5))
}

/// Anti-Hermitian generator `Ψ A⁺ − Ψ̄ A⁻`.
pub fn displacement_generator(space: TruncatedSpace, psi: C64, params: &SU2Params) -> TruncatedOperator {
    let raise = build_generalized_ladder(space, params, Direction::Raise).scale(psi);
    let lower = build_generalized_ladder(space, params, Direction::Lower).scale(psi.conj());
    raise.sub(&lower).expect("same space")
}

/// Largest Poisson tail beyond the smaller cutoff tolerated by the
/// displacement routines.
pub const DISPLACEMENT_TAIL_LIMIT: f64 = 1e-8;

fn check_displacement_cutoff(space: TruncatedSpace, psi: C64) -> Result<()> {
    let cutoff = space.n_max.min(space.m_max);
    let mean = psi.norm_sqr();
    let tail = poisson_tail(mean, cutoff + 1);
    if tail >= DISPLACEMENT_TAIL_LIMIT {
        return Err(Error::CutoffTooSmall { cutoff, mean, tail, limit: DISPLACEMENT_TAIL_LIMIT });
    }
    Ok(())
}

/// `D(Ψ) = exp(Ψ A⁺ − Ψ̄ A⁻)` as a dense matrix exponential.
///
/// Cost is cubic in the space dimension; for large spaces use
/// [`displaced_vacuum`], which only needs the action on one vector.
pub fn displacement(space: TruncatedSpace, psi: C64, params: &SU2Params) -> Result<TruncatedOperator> {
    check_displacement_cutoff(space, psi)?;
    let g = displacement_generator(space, psi, params).to_dense();
    TruncatedOperator::from_dense(space, &matrix_exp(&g))
}

/// `D(Ψ)|0⟩`, via the action of the exponential on the vacuum.
pub fn displaced_vacuum(space: TruncatedSpace, psi: C64, params: &SU2Params) -> Result<StateVector> {
    check_displacement_cutoff(space, psi)?;
    let g = displacement_generator(space, psi, params);
    expm_action(&g, &StateVector::vacuum(space))
}

/// Terms kept in each Taylor step of [`expm_action`]; with the step scaled to
/// unit norm the remainder is below `1/21! ≈ 2e-20`.
const TAYLOR_TERMS: usize = 20;

/// `exp(op)·v` by splitting into `s ≥ ‖op‖₁` steps of a truncated Taylor
/// series.
pub fn expm_action(op: &TruncatedOperator, v: &StateVector) -> Result<StateVector> {
    op.space.check_same(&v.space)?;
    let steps = op.one_norm().ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;
    let mut w = v.clone();
    for _ in 0..steps {
        let mut term = w.clone();
        let mut acc = w.clone();
        for k in 1..=TAYLOR_TERMS {
            term = op.apply(&term)?.scaled(C64::new(h / k as f64, 0.0));
            if term.max_abs() == 0.0 {
                break;
            }
            acc = acc.add(&term)?;
        }
        w = acc;
    }
    Ok(w)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Dense matrix exponential: scaling and squaring around a fixed degree-13
/// Padé approximant.
pub fn matrix_exp(a: &DMatrix<C64>) -> DMatrix<C64> {
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix_exp needs a square matrix");
    let norm1 = (0..n)
        .map(|c| a.column(c).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as u32 } else { 0 };
    let a = a.scale_ref(0.5f64.powi(squarings as i32));
    let eye = DMatrix::<C64>::identity(n, n);
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &eye * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &eye * b(0);
    let mut r = (&v - &u).lu().solve(&(&v + &u)).expect("Padé denominator is invertible");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

trait ScaleRef {
    fn scale_ref(&self, s: f64) -> DMatrix<C64>;
}

impl ScaleRef for DMatrix<C64> {
    fn scale_ref(&self, s: f64) -> DMatrix<C64> {
        self.map(|v| v * s)
    }
}

/// `⟨v|O|v⟩ / ⟨v|v⟩`.
pub fn expectation(op: &TruncatedOperator, v: &StateVector) -> Result<C64> {
    let norm = v.norm_sqr();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(v.inner(&op.apply(v)?)? / norm)
}

/// `⟨O²⟩ − ⟨O⟩²` with the same normalization. The imaginary part must
/// vanish (to 1e-12, relative to the size of the result) and is discarded.
pub fn variance(op: &TruncatedOperator, v: &StateVector) -> Result<f64> {
    let norm = v.norm_sqr();
    if norm == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let ov = op.apply(v)?;
    let mean = v.inner(&ov)? / norm;
    let second = v.inner(&op.apply(&ov)?)? / norm;
    let var = second - mean * mean;
    if var.im.abs() > 1e-12 * var.re.abs().max(1.0) {
        return Err(Error::NotReal(var.im));
    }
    Ok(var.re)
}
