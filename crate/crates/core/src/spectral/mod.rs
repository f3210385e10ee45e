//! Periodic pseudospectral fields on boxes Π[−L_i, L_i), Fourier multipliers and
//! the stabilized fixed-point solver for v = K₀ * v^{p+1} / (p+1).
//!
//! Transforms use e^{−ix·ξ}, so ∂_k is multiplication by iξ_k. Every symbol is set
//! to zero at ξ = 0; odd multipliers (derivatives, ξ_j/ξ₁) are also zeroed on
//! Nyquist modes, where they have no real-valued representative.

mod fft;
mod grid;
mod interp;
mod pv_gradient;
mod solver;

use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use thiserror::Error;

pub use fft::Transform;
pub use grid::{Field, Grid};
pub use interp::{Interpolant, LocalInterpolant};
pub use pv_gradient::{pv_gradient, PvGradientOptions};
pub use solver::{
    residual_conv, residual_h0, solve_solitary_wave, FixedPointMap, IterationRecord, Seed, SolveOutcome, SolverOptions,
};

use crate::kernel::KernelError;
use crate::par;
use crate::symbol::{KernelSymbol, NamedKernel, SymbolError};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("symbol dimension {symbol} does not match grid dimension {grid}")]
    DimensionMismatch { grid: usize, symbol: usize },
    #[error("invalid exponent: {0}")]
    InvalidExponent(String),
    #[error("p = {p} is not below 4/(2N-3) = {bound} for N = {dim}: every solitary wave in the energy space is constant, so there is nothing to compute")]
    NoSolitaryWave { p: String, dim: usize, bound: String },
    #[error("speed must be positive and finite, got {0}")]
    InvalidSpeed(f64),
    #[error("field mean {mean:e} exceeds 1e-10 * max|v| = {limit:e}")]
    NonZeroMean { mean: f64, limit: f64 },
    #[error("field is identically zero")]
    ZeroField,
    #[error("stabilization factor {factor} at iteration {iteration} is not positive")]
    SignDegenerate { iteration: usize, factor: f64 },
    #[error("residual grew for {window} consecutive iterations (last {residual:e})")]
    Diverged {
        window: usize,
        residual: f64,
        history: Vec<IterationRecord>,
    },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        iterations: usize,
        residual: f64,
        history: Vec<IterationRecord>,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Rational exponent p = m/n with n odd, acting by u^p = Sign(u)^m |u|^p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Exponent {
    num: u32,
    den: u32,
}

impl Exponent {
    pub fn new(num: i64, den: i64) -> Result<Self, SpectralError> {
        if num <= 0 || den <= 0 {
            return Err(SpectralError::InvalidExponent(format!("{num}/{den} must be positive")));
        }
        let g = num.gcd(&den);
        if (den / g) % 2 == 0 {
            return Err(SpectralError::InvalidExponent(format!("{num}/{den}: denominator must be odd in lowest terms")));
        }
        let (num, den) = (num / g, den / g);
        let num = u32::try_from(num).map_err(|_| SpectralError::InvalidExponent("numerator too large".into()))?;
        let den = u32::try_from(den).map_err(|_| SpectralError::InvalidExponent("denominator too large".into()))?;
        Ok(Exponent { num, den })
    }

    pub fn integer(k: u32) -> Self {
        Exponent { num: k.max(1), den: 1 }
    }

    /// Parses "m/n" or "m".
    pub fn parse(s: &str) -> Result<Self, SpectralError> {
        let bad = || SpectralError::InvalidExponent(format!("cannot parse '{s}'"));
        let (m, n) = match s.trim().split_once('/') {
            Some((m, n)) => (m.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?),
            None => (s.trim().parse().map_err(|_| bad())?, 1),
        };
        Exponent::new(m, n)
    }

    pub fn num(self) -> u32 {
        self.num
    }

    pub fn den(self) -> u32 {
        self.den
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// p + 1.
    pub fn succ(self) -> Self {
        Exponent {
            num: self.num + self.den,
            den: self.den,
        }
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    /// Sign(u)^m |u|^{m/n}.
    pub fn pow(self, u: f64) -> f64 {
        if self.den == 1 {
            return u.powi(self.num as i32);
        }
        if u == 0.0 {
            return 0.0;
        }
        let mag = u.abs().powf(self.value());
        if self.num % 2 == 1 && u < 0.0 {
            -mag
        } else {
            mag
        }
    }

    /// Rejects p ≥ 4/(2N−3), where no nonconstant solitary wave exists.
    pub fn check_admissible(self, dim: usize) -> Result<(), SpectralError> {
        if dim < 2 {
            return Err(SpectralError::Unsupported(format!("dimension {dim}")));
        }
        let k = 2 * dim as u64 - 3;
        if self.num as u64 * k >= 4 * self.den as u64 {
            let bound = if k == 1 { "4".to_string() } else { format!("4/{k}") };
            return Err(SpectralError::NoSolitaryWave {
                p: self.to_string(),
                dim,
                bound,
            });
        }
        Ok(())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A solitary wave candidate: field, exponent and speed.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    field: Field,
    p: Exponent,
    speed: f64,
    history: Vec<IterationRecord>,
}

impl WaveState {
    pub fn new(field: Field, p: Exponent, speed: f64) -> Result<Self, SpectralError> {
        p.check_admissible(field.grid().dim())?;
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(SpectralError::InvalidSpeed(speed));
        }
        let limit = 1e-10 * field.max_abs();
        let mean = field.mean();
        if mean.abs() > limit {
            return Err(SpectralError::NonZeroMean { mean, limit });
        }
        Ok(WaveState {
            field,
            p,
            speed,
            history: Vec::new(),
        })
    }

    pub fn with_history(mut self, history: Vec<IterationRecord>) -> Self {
        self.history = history;
        self
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }
}

/// v₂ … v_N with ∂₁v_j = ∂_j v.
#[derive(Clone, Debug, PartialEq)]
pub struct TransverseFields {
    pub components: Vec<Field>,
}

/// Wavevector of the mode stored at `flat`.
pub fn mode_vector(grid: &Grid, flat: usize) -> Vec<f64> {
    let mut idx = vec![0; grid.dim()];
    grid.unravel(flat, &mut idx);
    idx.iter().enumerate().map(|(a, &i)| grid.wavenumber(a, i)).collect()
}

fn on_nyquist(grid: &Grid, flat: usize) -> bool {
    let mut idx = vec![0; grid.dim()];
    grid.unravel(flat, &mut idx);
    idx.iter().enumerate().any(|(a, &i)| grid.is_nyquist(a, i))
}

/// s(ξ) on every mode, with the ξ = 0 entry set to zero.
pub fn symbol_multiplier(grid: &Grid, s: &KernelSymbol) -> Result<Vec<f64>, SpectralError> {
    if s.dim() != grid.dim() {
        return Err(SpectralError::DimensionMismatch {
            grid: grid.dim(),
            symbol: s.dim(),
        });
    }
    Ok(par::map_range(grid.len(), |i| {
        let xi = mode_vector(grid, i);
        if xi.iter().all(|&v| v == 0.0) {
            0.0
        } else {
            s.eval_unchecked(&xi)
        }
    }))
}

/// 2/3-rule mask: 0 on modes with 3|k_a| > n_a on some axis.
pub fn dealias_mask(grid: &Grid) -> Vec<f64> {
    par::map_range(grid.len(), |i| {
        let mut idx = vec![0; grid.dim()];
        grid.unravel(i, &mut idx);
        let keep = idx
            .iter()
            .enumerate()
            .all(|(a, &k)| 3 * grid.mode(a, k).unsigned_abs() as usize <= grid.sizes()[a]);
        if keep {
            1.0
        } else {
            0.0
        }
    })
}

/// Applies a kernel symbol as a Fourier multiplier.
pub fn apply_symbol(f: &Field, s: &KernelSymbol) -> Result<Field, SpectralError> {
    let m = symbol_multiplier(f.grid(), s)?;
    Ok(Transform::new(f.grid()).apply_real_multiplier(f, &m))
}

/// Periodic response of a symbol to a unit point mass at the origin node, i.e. the
/// kernel of `s` folded onto the box (minus its mean, since ξ = 0 is dropped).
pub fn delta_response(grid: &Grid, s: &KernelSymbol) -> Result<Field, SpectralError> {
    let mut values = vec![0.0; grid.len()];
    values[grid.origin_index()] = 1.0 / grid.cell_volume();
    apply_symbol(&Field::from_parts_unchecked(grid.clone(), values), s)
}

/// Pointwise Sign(u)^m |u|^{m/n}.
pub fn signed_power(f: &Field, p: Exponent) -> Field {
    f.map(|u| p.pow(u))
}

fn derivative_multiplier(grid: &Grid, axis: usize) -> Vec<Complex64> {
    par::map_range(grid.len(), |i| {
        if on_nyquist(grid, i) {
            Complex64::new(0.0, 0.0)
        } else {
            let mut idx = vec![0; grid.dim()];
            grid.unravel(i, &mut idx);
            Complex64::new(0.0, grid.wavenumber(axis, idx[axis]))
        }
    })
}

/// Spectral ∂_axis f.
pub fn derivative(f: &Field, axis: usize) -> Field {
    let m = derivative_multiplier(f.grid(), axis);
    Transform::new(f.grid()).apply_complex_multiplier(f, &m)
}

/// Removes every mode with ξ₁ = 0, projecting onto fields with zero mean along x₁.
pub fn project_zero_mean_x1(f: &Field) -> Field {
    let g = f.grid();
    let n1 = g.len() / g.sizes()[0];
    let m: Vec<f64> = par::map_range(g.len(), |i| if i < n1 { 0.0 } else { 1.0 });
    Transform::new(g).apply_real_multiplier(f, &m)
}

/// v̂_j = (ξ_j/ξ₁) v̂ on modes with ξ₁ ≠ 0, zero elsewhere.
pub fn transverse_fields(w: &WaveState) -> TransverseFields {
    transverse_of(w.field())
}

pub(crate) fn transverse_of(f: &Field) -> TransverseFields {
    let g = f.grid();
    let t = Transform::new(g);
    let spec = t.forward(f);
    let components = (1..g.dim())
        .map(|j| {
            let mut s = spec.clone();
            par::for_each_chunk_mut(&mut s, 1 << 12, |c, chunk| {
                let mut idx = vec![0; g.dim()];
                for (k, z) in chunk.iter_mut().enumerate() {
                    let flat = (c << 12) + k;
                    g.unravel(flat, &mut idx);
                    let xi1 = g.wavenumber(0, idx[0]);
                    if xi1 == 0.0 || on_nyquist(g, flat) {
                        *z = Complex64::new(0.0, 0.0);
                    } else {
                        *z *= g.wavenumber(j, idx[j]) / xi1;
                    }
                }
            });
            t.inverse_real(s)
        })
        .collect();
    TransverseFields { components }
}

/// Moves the node of maximal |v| to the origin node.
pub fn align_center(f: &Field) -> Field {
    let g = f.grid();
    let mut from = vec![0; g.dim()];
    g.unravel(f.argmax_abs(), &mut from);
    let to: Vec<usize> = g.sizes().iter().map(|n| n / 2).collect();
    f.roll(&from, &to)
}

/// ‖a − b‖ / ‖b‖ in grid L².
pub fn relative_l2(a: &Field, b: &Field) -> f64 {
    a.zip_map(b, |x, y| x - y).norm_l2() / b.norm_l2()
}

/// Speed-c wave v_c(x₁, x⊥) = c^{1/p} ṽ(√c x₁, c x⊥) on the grid whose nodes map
/// exactly onto those of `w` (half lengths L₁/√c, L⊥/c).
pub fn rescale(w: &WaveState, c: f64) -> Result<WaveState, SpectralError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(SpectralError::InvalidSpeed(c));
    }
    let g = w.grid();
    let half: Vec<f64> = g
        .half_lengths()
        .iter()
        .enumerate()
        .map(|(a, &l)| if a == 0 { l / c.sqrt() } else { l / c })
        .collect();
    let grid = Grid::new(half, g.sizes().to_vec())?;
    let amp = c.powf(1.0 / w.p().value());
    let values = w.field().values().iter().map(|v| amp * v).collect();
    let field = Field::new(grid, values)?;
    Ok(WaveState::new(field, w.p(), w.speed() * c)?.with_history(w.history().to_vec()))
}

/// As [`rescale`], resampled onto `target` by trigonometric interpolation.
pub fn rescale_onto(w: &WaveState, c: f64, target: &Grid) -> Result<WaveState, SpectralError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(SpectralError::InvalidSpeed(c));
    }
    if target.dim() != w.grid().dim() {
        return Err(SpectralError::DimensionMismatch {
            grid: target.dim(),
            symbol: w.grid().dim(),
        });
    }
    let interp = Interpolant::new(w.field());
    let amp = c.powf(1.0 / w.p().value());
    let sc = c.sqrt();
    let coords: Vec<Vec<f64>> = (0..target.dim())
        .map(|a| {
            let s = if a == 0 { sc } else { c };
            (0..target.sizes()[a]).map(|i| s * target.coordinate(a, i)).collect()
        })
        .collect();
    let values = interp.eval_on_tensor(&coords).into_iter().map(|v| amp * v).collect();
    let field = Field::new(target.clone(), values)?;
    let field = project_zero_mean_x1(&field);
    WaveState::new(field, w.p(), w.speed() * c)
}

/// Symbol of K₀ in dimension `dim`.
pub fn k0_symbol(dim: usize) -> Result<KernelSymbol, SpectralError> {
    Ok(NamedKernel::K0.symbol(dim)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exponent_parsing_and_powers() {
        let p = Exponent::parse("2/3").unwrap();
        assert_eq!((p.num(), p.den()), (2, 3));
        assert!((p.pow(-8.0) - 4.0).abs() < 1e-14);
        assert_eq!(Exponent::integer(1).pow(-8.0), -8.0);
        assert_eq!(Exponent::integer(2).pow(4.0), 16.0);
        assert!((Exponent::parse("1/3").unwrap().pow(-8.0) + 2.0).abs() < 1e-14);
        assert_eq!(Exponent::parse("3/3").unwrap(), Exponent::integer(1));
        assert!(Exponent::parse("1/2").is_err());
        assert!(Exponent::parse("2/4").is_err());
        assert_eq!(Exponent::parse("2/2").unwrap(), Exponent::integer(1));
        assert!(Exponent::parse("0").is_err());
        assert!(Exponent::parse("x").is_err());
        assert_eq!(Exponent::parse("5/3").unwrap().succ().to_string(), "8/3");
    }

    #[test]
    fn admissibility_guard() {
        assert!(Exponent::integer(3).check_admissible(2).is_ok());
        assert!(matches!(
            Exponent::integer(4).check_admissible(2),
            Err(SpectralError::NoSolitaryWave { .. })
        ));
        assert!(Exponent::integer(1).check_admissible(3).is_ok());
        assert!(Exponent::parse("4/3").unwrap().check_admissible(3).is_err());
        assert!(Exponent::parse("5/4").is_err());
        assert!(Exponent::parse("6/5").unwrap().check_admissible(3).is_ok());
    }

    #[test]
    fn wave_state_rejects_nonzero_mean() {
        let g = Grid::cube(2, 10.0, 16).unwrap();
        let f = Field::from_fn(g, |x| 1.0 + x[0]);
        assert!(matches!(
            WaveState::new(f, Exponent::integer(1), 1.0),
            Err(SpectralError::NonZeroMean { .. })
        ));
    }

    #[test]
    fn k0_eigenmode() {
        let g = Grid::cube(2, PI, 16).unwrap();
        let f = Field::from_fn(g, |x| x[0].cos());
        let out = apply_symbol(&f, &k0_symbol(2).unwrap()).unwrap();
        for (a, b) in out.values().iter().zip(f.values()) {
            assert!((a - 0.5 * b).abs() < 1e-14);
        }
        let z = Field::zeros(Grid::cube(2, 1.0, 8).unwrap());
        assert_eq!(apply_symbol(&z, &k0_symbol(2).unwrap()).unwrap().max_abs(), 0.0);
        assert!(matches!(
            apply_symbol(&z, &k0_symbol(3).unwrap()),
            Err(SpectralError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transverse_of_pure_transverse_content_is_zero() {
        let g = Grid::cube(2, PI, 16).unwrap();
        let f = Field::from_fn(g, |x| (2.0 * x[1]).cos());
        let t = transverse_of(&f);
        assert!(t.components[0].max_abs() < 1e-15);
    }
}
