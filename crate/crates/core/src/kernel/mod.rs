//! Physical-space values of the kernels with symbols `Π ξ_j^{d_j} / (|ξ|² + ξ₁⁴)`,
//! the composed Riesz kernel, and power-law fits of their decay and singularities.
//!
//! Inverse transforms use `f(x) = (2π)^{−N} ∫ f̂(ξ) e^{ix·ξ} dξ`. Kernels whose
//! numerator has odd total degree are purely imaginary; [`kernel_value`] returns the
//! real representative κ with `f = i^{d mod 2} κ`.

mod fit;
mod split;

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

pub use fit::{decay_fit, richardson_inverse_r, singularity_fit, ApproachPath, PowerLawFit, SingularityFit};

use crate::par;
use crate::quadrature::QuadratureError;
use crate::symbol::{DerivativeTable, KernelSymbol, SymbolError};
use crate::util::{inverse_sphere_area, norm};
use split::Split;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("point is singular (origin)")]
    SingularPoint,
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),
    #[error("fewer than 8 usable samples ({0})")]
    TooFewSamples(usize),
    #[error("kernel vanishes identically on this path by symmetry")]
    VanishesBySymmetry,
}

/// Quadrature controls for the split representation.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureSpec {
    /// Splitting radius; `None` selects 1/|x|.
    pub lambda: Option<f64>,
    /// Maximum length of the rotated outer contour.
    pub outer_cutoff: f64,
    /// Absolute tolerance on the returned kernel value.
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            lambda: None,
            outer_cutoff: 1e30,
            abs_tol: 1e-12,
            rel_tol: 1e-8,
            max_subdivisions: 4000,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    fn resolve_lambda(&self, x: &[f64]) -> Result<f64, KernelError> {
        let lambda = self.lambda.unwrap_or_else(|| 1.0 / norm(x));
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(KernelError::Precondition(format!("lambda must be positive, got {lambda}")));
        }
        if self.outer_cutoff <= lambda {
            return Err(KernelError::Precondition("outer_cutoff must exceed lambda".into()));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(KernelError::Precondition("tolerances must be positive".into()));
        }
        Ok(lambda)
    }
}

/// A unit vector of S^{N−1}.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    components: Vec<f64>,
}

impl Direction {
    pub fn new(components: Vec<f64>) -> Result<Self, KernelError> {
        if components.len() < 2 {
            return Err(KernelError::Precondition("direction needs at least 2 components".into()));
        }
        if (norm(&components) - 1.0).abs() > 1e-12 {
            return Err(KernelError::Precondition("direction is not a unit vector".into()));
        }
        Ok(Direction { components })
    }

    pub fn normalized(v: &[f64]) -> Result<Self, KernelError> {
        let r = norm(v);
        if r == 0.0 || !r.is_finite() {
            return Err(KernelError::SingularPoint);
        }
        Direction::new(v.iter().map(|a| a / r).collect())
    }

    /// Unit vector in the (x₁, x₂) plane at angle `theta` from the x₁ axis.
    pub fn planar(dim: usize, theta: f64) -> Self {
        let mut c = vec![0.0; dim];
        c[0] = theta.cos();
        c[1] = theta.sin();
        Direction { components: c }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn sigma1(&self) -> f64 {
        self.components[0]
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn scaled(&self, r: f64) -> Vec<f64> {
        self.components.iter().map(|c| c * r).collect()
    }
}

/// Kernel value with quadrature diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelValue {
    /// Real representative κ.
    pub value: f64,
    /// The component of f/i^{d mod 2} that must vanish; a quadrature quality indicator.
    pub discarded: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// A kernel with monomial numerator, caching its derivative table.
#[derive(Debug, Clone)]
pub struct Kernel {
    exponents: Vec<u32>,
    table: Arc<DerivativeTable>,
}

impl Kernel {
    pub fn new(d: &[u32]) -> Result<Self, KernelError> {
        let n = d.len();
        if n < 2 {
            return Err(SymbolError::DimensionTooSmall(n).into());
        }
        let d1 = d[0];
        let dperp: u32 = d[1..].iter().sum();
        if d1 + 2 * dperp > 4 {
            return Err(KernelError::Precondition(format!(
                "exponents {d:?} violate d1 + 2 d_perp <= 4"
            )));
        }
        if n == 2 && d1 + dperp == 0 {
            return Err(KernelError::Precondition("d = 0 is excluded in dimension 2".into()));
        }
        let di: Vec<i64> = d.iter().map(|&v| v as i64).collect();
        let sym = KernelSymbol::monomial(n, &di)?;
        Ok(Kernel {
            exponents: d.to_vec(),
            table: Arc::new(DerivativeTable::new(sym)),
        })
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn symbol(&self) -> &KernelSymbol {
        self.table.base()
    }

    fn total_degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    /// Orders (p_j, m_j) of the representation along axis j.
    pub fn orders(&self, axis: usize) -> (u32, u32) {
        let n = self.dim() as u32;
        let d = self.total_degree();
        let p = n - 2 + d;
        let m = if axis == 0 {
            2 * n - 4 + self.exponents[0] + 2 * (d - self.exponents[0])
        } else {
            p
        };
        (p, m)
    }

    pub fn evaluate(&self, x: &[f64], spec: &QuadratureSpec) -> Result<KernelValue, KernelError> {
        if x.len() != self.dim() {
            return Err(SymbolError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            }
            .into());
        }
        if x.iter().all(|&v| v == 0.0) {
            return Err(KernelError::SingularPoint);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(KernelError::Precondition("point must be finite".into()));
        }
        let lambda = spec.resolve_lambda(x)?;
        let axis = (0..x.len())
            .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
            .unwrap();
        let (p, m) = self.orders(axis);
        let split = Split {
            table: &self.table,
            axis,
            p,
            m,
        };
        let r = split.evaluate(x, lambda, spec)?;
        let xp = x[axis].powi(p as i32);
        let f = r.value / xp;
        let (value, discarded) = if self.total_degree() % 2 == 0 {
            (f.re, f.im)
        } else {
            (f.im, f.re)
        };
        Ok(KernelValue {
            value,
            discarded,
            error: r.error / xp.abs(),
            evaluations: r.evaluations,
        })
    }

    pub fn value(&self, x: &[f64], spec: &QuadratureSpec) -> Result<f64, KernelError> {
        self.evaluate(x, spec).map(|v| v.value)
    }

    /// Values at many points, in parallel.
    pub fn values(&self, points: &[Vec<f64>], spec: &QuadratureSpec) -> Result<Vec<f64>, KernelError> {
        par::map(points, |x| self.value(x, spec)).into_iter().collect()
    }
}

/// Real representative of the kernel with symbol `Π ξ_j^{d_j} / (|ξ|² + ξ₁⁴)` at `x`.
pub fn kernel_value(d: &[u32], x: &[f64], quad: &QuadratureSpec) -> Result<f64, KernelError> {
    Kernel::new(d)?.value(x, quad)
}

/// Pointwise part of the composed Riesz kernel:
/// Γ(N/2)/(2π^{N/2}) · (|x|² − N x₁²)/|x|^{N+2}.
///
/// As a distribution the kernel also carries δ₀/N (see [`riesz_dirac_coefficient`])
/// and is a principal value inside the unit ball.
pub fn riesz_value(x: &[f64]) -> Result<f64, KernelError> {
    let n = x.len();
    if n < 2 {
        return Err(SymbolError::DimensionTooSmall(n).into());
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(KernelError::SingularPoint);
    }
    Ok(inverse_sphere_area(n) * (r2 - n as f64 * x[0] * x[0]) / r2.powf((n as f64 + 2.0) / 2.0))
}

/// Coefficient of the Dirac mass in the composed Riesz kernel.
pub fn riesz_dirac_coefficient(dim: usize) -> f64 {
    1.0 / dim as f64
}

/// lim_{R→∞} R^N K₀(Rσ) = Γ(N/2)/(2π^{N/2}) (1 − Nσ₁²).
pub fn k0_limit(sigma: &Direction) -> f64 {
    let n = sigma.dim() as f64;
    inverse_sphere_area(sigma.dim()) * (1.0 - n * sigma.sigma1().powi(2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RieszCheck {
    /// Real part of the right-hand side of the identity.
    pub rhs: f64,
    pub rhs_imag: f64,
    /// Γ(N/2)/(2π^{N/2})(1 − Nσ₁²)
    pub expected: f64,
    pub residual: f64,
}

/// Evaluates the split representation of the composed Riesz kernel at σ along
/// axis `axis` (orders N and N + 1, λ = 1) and compares with its pointwise value.
pub fn verify_riesz_identity(sigma: &Direction, axis: usize, quad: &QuadratureSpec) -> Result<RieszCheck, KernelError> {
    let n = sigma.dim();
    if axis >= n {
        return Err(SymbolError::AxisOutOfRange { axis, dim: n }.into());
    }
    let sj = sigma.components()[axis];
    if sj == 0.0 {
        return Err(KernelError::Precondition("sigma_j must be nonzero".into()));
    }
    let table = DerivativeTable::new(KernelSymbol::riesz_11(n)?);
    let split = Split {
        table: &table,
        axis,
        p: n as u32,
        m: n as u32 + 1,
    };
    let spec = QuadratureSpec {
        lambda: Some(1.0),
        ..quad.clone()
    };
    let lambda = spec.resolve_lambda(sigma.components())?;
    let r = split.evaluate(sigma.components(), lambda, &spec)?;
    let v: Complex64 = r.value / sj.powi(n as i32);
    let expected = k0_limit(sigma);
    Ok(RieszCheck {
        rhs: v.re,
        rhs_imag: v.im,
        expected,
        residual: (v.re - expected).abs(),
    })
}

/// One row of the far-field limit comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitRow {
    pub sigma: Direction,
    pub radii: (f64, f64),
    pub scaled: (f64, f64),
    pub measured: f64,
    pub predicted: f64,
    pub abs_err: f64,
    pub rel_err: f64,
}

/// R^N K₀(Rσ) at two radii, extrapolated in 1/R, against [`k0_limit`].
pub fn limit_check(dim: usize, directions: &[Direction], radii: (f64, f64), quad: &QuadratureSpec) -> Result<Vec<LimitRow>, KernelError> {
    let k0 = Kernel::new(&crate::symbol::NamedKernel::K0.exponents(dim))?;
    let jobs: Vec<(usize, f64)> = (0..directions.len())
        .flat_map(|i| [(i, radii.0), (i, radii.1)])
        .collect();
    let vals: Vec<f64> = par::map(&jobs, |&(i, r)| {
        k0.value(&directions[i].scaled(r), quad).map(|v| v * r.powi(dim as i32))
    })
    .into_iter()
    .collect::<Result<_, _>>()?;
    Ok(directions
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let (a, b) = (vals[2 * i], vals[2 * i + 1]);
            let measured = richardson_inverse_r(radii.0, a, radii.1, b);
            let predicted = k0_limit(s);
            let abs_err = (measured - predicted).abs();
            LimitRow {
                sigma: s.clone(),
                radii,
                scaled: (a, b),
                measured,
                predicted,
                abs_err,
                rel_err: abs_err / predicted.abs(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn riesz_pointwise_values() {
        assert_relative_eq!(riesz_value(&[1.0, 0.0]).unwrap(), -1.0 / (2.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(riesz_value(&[0.0, 1.0]).unwrap(), 1.0 / (2.0 * PI), epsilon = 1e-15);
        let s = 1.0 / 2f64.sqrt();
        assert!(riesz_value(&[s, s]).unwrap().abs() < 1e-16);
        assert_eq!(riesz_value(&[0.0, 0.0]), Err(KernelError::SingularPoint));
        assert_eq!(riesz_dirac_coefficient(3), 1.0 / 3.0);
    }

    #[test]
    fn limit_values() {
        assert_relative_eq!(k0_limit(&Direction::planar(2, 0.0)), -0.159_154_943_091_895_35, epsilon = 1e-15);
        assert!(k0_limit(&Direction::planar(2, PI / 4.0)).abs() < 1e-16);
        let s = Direction::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(k0_limit(&s), 1.0 / (4.0 * PI), epsilon = 1e-15);
    }

    #[test]
    fn direction_checks_norm() {
        assert!(Direction::new(vec![1.0, 1.0]).is_err());
        let d = Direction::normalized(&[3.0, 4.0]).unwrap();
        assert_relative_eq!(d.sigma1(), 0.6);
    }

    #[test]
    fn hypotheses_are_enforced() {
        assert!(matches!(Kernel::new(&[0, 0]), Err(KernelError::Precondition(_))));
        assert!(matches!(Kernel::new(&[2, 2]), Err(KernelError::Precondition(_))));
        assert!(Kernel::new(&[0, 0, 0]).is_ok());
        let k = Kernel::new(&[2, 0]).unwrap();
        assert_eq!(k.orders(0), (2, 2));
        assert_eq!(Kernel::new(&[2, 1]).unwrap().orders(0), (3, 4));
        assert_eq!(Kernel::new(&[2, 0, 0]).unwrap().orders(0), (3, 4));
        assert_eq!(Kernel::new(&[2, 0, 0]).unwrap().orders(2), (3, 3));
        assert_eq!(k.value(&[0.0, 0.0], &QuadratureSpec::default()), Err(KernelError::SingularPoint));
    }
}
