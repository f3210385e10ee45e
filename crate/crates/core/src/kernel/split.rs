//! Evaluation of `x_j^p f(x)` from the symbol of `f` by splitting Fourier space
//! at radius λ: an oscillatory outer integral of ∂_j^m f̂, boundary terms on
//! S(0,λ), and an inner integral of ∂_j^p f̂ against (e^{ix·ξ} − 1).
//!
//! Every term is written in polar coordinates ξ = ρω. Along a ray the symbol is
//! the rational function ρ^e A(ρ) / (1 + cρ²)^q whose poles sit on the imaginary
//! axis, so the outer radial integral is taken along a contour tilted into the
//! half plane where the oscillatory factor decays.

use std::sync::OnceLock;

use num_complex::Complex64;

use super::{KernelError, QuadratureSpec};
use crate::quadrature::{integrate, integrate_sphere, QuadratureError, Tolerance};
use crate::symbol::{DerivativeTable, KernelSymbol};
use crate::util::{dot, norm};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Restriction of a symbol, times the polar Jacobian ρ^{N−1}, to a ray.
pub(crate) struct RayRational {
    shift: i32,
    coeffs: Vec<f64>,
    q: i32,
    c: f64,
}

impl RayRational {
    pub(crate) fn new(sym: &KernelSymbol, omega: &[f64]) -> Self {
        let lo = sym.numerator().min_degree().unwrap_or(0) as usize;
        let all = sym.float_numerator().ray_coefficients(omega);
        let coeffs = if all.len() > lo { all[lo..].to_vec() } else { vec![0.0] };
        let q = sym.denom_power() as i32;
        RayRational {
            shift: lo as i32 - 2 * q + omega.len() as i32 - 1,
            coeffs,
            q,
            c: sym.denominator().ray_quartic(omega),
        }
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        let mut a = Complex64::new(0.0, 0.0);
        for &k in self.coeffs.iter().rev() {
            a = a * z + k;
        }
        let mut v = a * z.powi(self.shift);
        if self.c != 0.0 {
            v /= (1.0 + self.c * z * z).powi(self.q);
        }
        v
    }

    fn eval_real(&self, r: f64) -> f64 {
        let mut a = 0.0;
        for &k in self.coeffs.iter().rev() {
            a = a * r + k;
        }
        a * r.powi(self.shift) / (1.0 + self.c * r * r).powi(self.q)
    }

    /// Distance scale 1/√c of the complex poles, if any.
    fn pole_scale(&self) -> Option<f64> {
        (self.c > 0.0).then(|| 1.0 / self.c.sqrt())
    }
}

/// ∫_λ^∞ g(ρ) e^{iρs} dρ along the ray λ + t·e^{±iπ/4}, t ≥ 0, turned towards
/// the half plane where e^{iρs} decays. The tilt keeps the path a distance of
/// order 1/√c away from the poles ±i/√c even when the damping |s| is tiny.
fn outer_radial(g: &RayRational, s: f64, lambda: f64, tol: &Tolerance, cutoff: f64) -> Result<Complex64, QuadratureError> {
    let sigma = if s >= 0.0 { 1.0 } else { -1.0 };
    let dir = Complex64::from_polar(1.0, sigma * std::f64::consts::FRAC_PI_4);
    let a = s.abs().max(f64::MIN_POSITIVE);
    let damp = a * std::f64::consts::FRAC_1_SQRT_2;
    let rate = I * s * dir;
    let h = |t: f64| g.eval(lambda + t * dir) * (rate * t).exp();

    let mut breaks = vec![0.0];
    let mut b = lambda;
    while b < cutoff {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(cutoff);
    let mut pole_end = 0.0;
    if let Some(t0) = g.pole_scale() {
        if damp * t0 < 700.0 && t0 < cutoff {
            breaks.push(t0);
            pole_end = 2.0 * t0;
        }
    }
    breaks.retain(|&t| t <= cutoff);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let panel_tol = Tolerance::new(tol.abs / 16.0, tol.rel, tol.max_subdivisions);
    let mut total = Complex64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        let e = integrate(h, w, &panel_tol, false)?;
        total += e.value;
        let end = w[1];
        if end >= pole_end && damp * end >= 1.0 {
            let tail = g.eval(lambda + end * dir).norm() * (-damp * end).exp() / damp;
            if tail < tol.abs / 16.0 {
                break;
            }
        }
    }
    Ok(dir * Complex64::new(0.0, lambda * s).exp() * total)
}

/// ∫_0^λ g(ρ) (e^{iρs} − 1) dρ with the difference formed without cancellation.
fn inner_radial(g: &RayRational, s: f64, lambda: f64, tol: &Tolerance) -> Result<Complex64, QuadratureError> {
    if s == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let h = |r: f64| {
        let half = 0.5 * r * s;
        let em1 = Complex64::new(-2.0 * half.sin().powi(2), (r * s).sin());
        em1 * g.eval_real(r)
    };
    let mut breaks = vec![0.0, lambda];
    if let Some(t0) = g.pole_scale() {
        let mut b = t0 / 8.0;
        while b < lambda {
            breaks.push(b);
            b *= 2.0;
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    Ok(integrate(h, &breaks, tol, false)?.value)
}

/// Parameters of one application of the split representation.
pub(crate) struct Split<'a> {
    pub table: &'a DerivativeTable,
    pub axis: usize,
    pub p: u32,
    pub m: u32,
}

pub(crate) struct SplitResult {
    /// x_j^p f(x)
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

impl Split<'_> {
    pub(crate) fn evaluate(&self, x: &[f64], lambda: f64, spec: &QuadratureSpec) -> Result<SplitResult, KernelError> {
        let n = self.table.dim();
        let (p, m, j) = (self.p, self.m, self.axis);
        assert!(p >= 1 && m >= p);
        let sym_m = self.table.derive(j, m)?;
        let sym_p = self.table.derive(j, p)?;
        let sphere_syms: Vec<(u32, _)> = (p - 1..m)
            .map(|k| self.table.derive(j, k).map(|s| (k, s)))
            .collect::<Result<_, _>>()?;

        let xj = x[j];
        let mix = Complex64::new(0.0, -xj);
        let scale = (2.0 * std::f64::consts::PI).powi(n as i32) * xj.abs().powi(p as i32);
        let angular_tol = Tolerance::new(spec.abs_tol * scale, spec.rel_tol, spec.max_subdivisions);
        let area = 2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / crate::util::gamma_half(n);
        let radial_tol = Tolerance::new(0.1 * angular_tol.abs / area, 0.1 * spec.rel_tol, spec.max_subdivisions);
        let lam_pow = lambda.powi(n as i32 - 1);

        let failure: OnceLock<QuadratureError> = OnceLock::new();
        let direction_term = |omega: &[f64]| -> Complex64 {
            let s = dot(x, omega);
            let run = || -> Result<Complex64, QuadratureError> {
                let g_m = RayRational::new(&sym_m, omega);
                let mut acc = mix.powi(p as i32 - m as i32) * outer_radial(&g_m, s, lambda, &radial_tol, spec.outer_cutoff)?;
                let phase = Complex64::new(0.0, lambda * s).exp();
                let xi: Vec<f64> = omega.iter().map(|w| lambda * w).collect();
                for (k, sym) in &sphere_syms {
                    let r = lam_pow * omega[j] * sym.eval_unchecked(&xi);
                    if *k == p - 1 {
                        acc += r;
                    } else {
                        acc += mix.powi(p as i32 - *k as i32 - 1) * phase * r;
                    }
                }
                let g_p = RayRational::new(&sym_p, omega);
                acc += inner_radial(&g_p, s, lambda, &radial_tol)?;
                Ok(acc)
            };
            match run() {
                Ok(v) => v,
                Err(e) => {
                    let _ = failure.set(e);
                    Complex64::new(f64::NAN, f64::NAN)
                }
            }
        };
        let pole: Vec<f64> = x.iter().map(|v| v / norm(x)).collect();
        let result = integrate_sphere(&pole, direction_term, &angular_tol, Some(0));
        if let Some(e) = failure.get() {
            return Err(KernelError::Quadrature(e.clone()));
        }
        let est = result?;
        let pref = I.powi(p as i32) / (2.0 * std::f64::consts::PI).powi(n as i32);
        Ok(SplitResult {
            value: pref * est.value,
            error: est.error / (2.0 * std::f64::consts::PI).powi(n as i32),
            evaluations: est.evaluations,
        })
    }
}
