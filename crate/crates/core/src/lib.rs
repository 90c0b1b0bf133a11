//! Coherent states of the two-dimensional quantum harmonic oscillator.
//!
//! The crate builds three families of states in natural units (ħ = m = ω = 1):
//!
//! - [`su2`]: SU(2) coherent states `|ν⟩_{α,β}` living on a single degenerate
//!   energy shell, and their generalization to commensurate anisotropic frequencies
//!   `|ν⟩^{p,q}_{α,β}` over the modes `|pn, q(ν−n)⟩`.
//! - [`schrodinger`]: Schrödinger-type coherent states `|Ψ⟩_{α,β}`, i.e. a
//!   Poisson-weighted superposition of the SU(2) states.
//! - [`oscillator`]: the 1D and 2D Fock wavefunctions and 1D coherent
//!   amplitudes every other module is built on.
//!
//! Every closed form is cross-checked by [`oracle`], an independent
//! truncated Fock-space matrix engine, and the resolution-of-identity
//! integrals are evaluated by deterministic quadrature in [`identity`].
//! Density grids for plotting are produced by [`grid`].

pub mod error;
pub mod grid;
pub mod identity;
pub mod oracle;
pub mod oscillator;
pub mod quadrature;
pub mod schrodinger;
pub mod su2;

pub use error::{Error, Result};
pub use grid::{render, DensityGrid, DensitySource, GridSpec};
pub use oscillator::{CoeffVector, ModeIndex2D};
pub use schrodinger::SchrodingerState;
pub use su2::{AnisotropyRatio, SU2Params, SU2State};

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;
