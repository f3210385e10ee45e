//! Kernels, a pseudospectral solver and diagnostics for solitary waves of the
//! generalized Kadomtsev–Petviashvili equations, written in convolution form
//! `v = K₀ * v^{p+1} / (p+1)` with K̂₀(ξ) = ξ₁² / (|ξ|² + ξ₁⁴).
//!
//! Modules:
//! - [`symbol`]: exact rational symbols and their derivatives,
//! - [`kernel`]: physical-space kernel values by oscillatory quadrature,
//! - [`spectral`]: periodic grids, FFT symbol application and the fixed-point solver,
//! - [`diagnostics`]: decay, asymptotic profile, Pohozaev and energy checks,
//! - [`io`]: field files and reports.

pub mod diagnostics;
pub mod io;
pub mod kernel;
pub mod par;
pub mod quadrature;
pub mod spectral;
pub mod symbol;
pub mod util;
