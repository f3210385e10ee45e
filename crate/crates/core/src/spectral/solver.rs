use super::fft::Transform;
use super::grid::{Field, Grid};
use super::{
    dealias_mask, derivative, k0_symbol, project_zero_mean_x1, signed_power, symbol_multiplier, Exponent,
    SpectralError, WaveState,
};
use crate::diagnostics::lump_value;
use crate::par;
use num_complex::Complex64;

/// One step of the iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    /// ‖v − T v‖ / ‖v‖ before the step.
    pub residual: f64,
    /// S = ⟨v, v⟩ / ⟨v, T v⟩.
    pub factor: f64,
    /// ‖v_{k+1} − v_k‖ / ‖v_k‖.
    pub update: f64,
}

#[derive(Clone, Debug)]
pub enum Seed {
    /// −∂₁² exp(−|x|²/25).
    Gaussian,
    /// The closed-form lump of speed 1 (N = 2).
    Lump,
    Field(Field),
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Stop when the relative update falls below this.
    pub tol: f64,
    /// Consecutive residual increases treated as divergence.
    pub divergence_window: usize,
    /// Residual a returned state must reach.
    pub residual_target: f64,
    pub dealias: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iter: 2000,
            tol: 1e-12,
            divergence_window: 50,
            residual_target: 1e-8,
            dealias: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub state: WaveState,
    pub iterations: usize,
    /// Whether the update tolerance was reached.
    pub converged: bool,
    pub residual: f64,
    pub seed_residual: f64,
    pub seed_factor: f64,
}

/// T(v) = K₀ * v^{p+1} / (p+1) with the nonlinear term 2/3-dealiased.
pub struct FixedPointMap {
    transform: Transform,
    multiplier: Vec<f64>,
    power: Exponent,
}

impl FixedPointMap {
    pub fn new(grid: &Grid, p: Exponent, dealias: bool) -> Result<Self, SpectralError> {
        let k0 = symbol_multiplier(grid, &k0_symbol(grid.dim())?)?;
        let scale = 1.0 / p.succ().value();
        let multiplier = if dealias {
            let mask = dealias_mask(grid);
            k0.iter().zip(&mask).map(|(a, b)| a * b * scale).collect()
        } else {
            k0.iter().map(|a| a * scale).collect()
        };
        Ok(FixedPointMap {
            transform: Transform::new(grid),
            multiplier,
            power: p.succ(),
        })
    }

    pub fn apply(&self, v: &Field) -> Field {
        let w = signed_power(v, self.power);
        self.transform.apply_real_multiplier(&w, &self.multiplier)
    }
}

fn seed_field(grid: &Grid, seed: Seed) -> Result<Field, SpectralError> {
    let raw = match seed {
        Seed::Gaussian => Field::from_fn(grid.clone(), |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            (2.0 / 25.0 - 4.0 * x[0] * x[0] / 625.0) * (-r2 / 25.0).exp()
        }),
        Seed::Lump => {
            if grid.dim() != 2 {
                return Err(SpectralError::Unsupported("the lump seed exists only for N = 2".into()));
            }
            Field::from_fn(grid.clone(), |x| lump_value(1.0, x).unwrap_or(0.0))
        }
        Seed::Field(f) => {
            if f.grid() != grid {
                return Err(SpectralError::InvalidGrid("seed field lives on a different grid".into()));
            }
            let limit = 1e-10 * f.max_abs();
            if f.mean().abs() > limit {
                return Err(SpectralError::NonZeroMean { mean: f.mean(), limit });
            }
            f
        }
    };
    let v = project_zero_mean_x1(&raw);
    if v.max_abs() == 0.0 {
        return Err(SpectralError::ZeroField);
    }
    Ok(v)
}

fn diff_ratio(a: &Field, b: &Field, denom: f64) -> f64 {
    let va = a.values();
    let vb = b.values();
    (par::sum(va.len(), |i| (va[i] - vb[i]).powi(2)) * a.grid().cell_volume()).sqrt() / denom
}

/// Stabilized fixed-point iteration v ← S^γ T(v), γ = (p+1)/p.
pub fn solve_solitary_wave(grid: &Grid, p: Exponent, seed: Seed, opts: &SolverOptions) -> Result<SolveOutcome, SpectralError> {
    p.check_admissible(grid.dim())?;
    let map = FixedPointMap::new(grid, p, opts.dealias)?;
    let gamma = p.succ().value() / p.value();
    let mut v = seed_field(grid, seed)?;
    let mut history = Vec::new();
    let mut converged = false;
    let mut rising = 0;
    let mut prev_residual = f64::INFINITY;
    for k in 0..opts.max_iter {
        let tv = map.apply(&v);
        let norm = v.norm_l2();
        let factor = v.dot(&v) / v.dot(&tv);
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(SpectralError::SignDegenerate { iteration: k, factor });
        }
        let residual = diff_ratio(&v, &tv, norm);
        let next = tv.scale(factor.powf(gamma));
        let update = diff_ratio(&next, &v, norm);
        history.push(IterationRecord { residual, factor, update });
        log::debug!("iteration {k}: residual {residual:e} factor {factor} update {update:e}");
        if residual > prev_residual {
            rising += 1;
            if rising >= opts.divergence_window {
                return Err(SpectralError::Diverged {
                    window: opts.divergence_window,
                    residual,
                    history,
                });
            }
        } else {
            rising = 0;
        }
        prev_residual = residual;
        v = next;
        if update < opts.tol {
            converged = true;
            break;
        }
    }
    let residual = diff_ratio(&v, &map.apply(&v), v.norm_l2());
    let (seed_residual, seed_factor) = history.first().map_or((residual, f64::NAN), |r| (r.residual, r.factor));
    if opts.max_iter > 0 && !(residual < opts.residual_target) {
        return Err(SpectralError::NotConverged {
            iterations: history.len(),
            residual,
            history,
        });
    }
    let iterations = history.len();
    let state = WaveState::new(v, p, 1.0)?.with_history(history);
    Ok(SolveOutcome {
        state,
        iterations,
        converged,
        residual,
        seed_residual,
        seed_factor,
    })
}

/// ‖v − K₀ * v^{p+1}/(p+1)‖ / ‖v‖, with the same dealiasing as the solver.
pub fn residual_conv(w: &WaveState) -> Result<f64, SpectralError> {
    let v = w.field();
    let norm = v.norm_l2();
    if norm == 0.0 {
        return Err(SpectralError::ZeroField);
    }
    let map = FixedPointMap::new(w.grid(), w.p(), true)?;
    Ok(diff_ratio(v, &map.apply(v), norm))
}

/// ‖v − F⁻¹[−iĤ₀ F(v^p ∂₁v)]‖ / ‖v‖.
pub fn residual_h0(w: &WaveState) -> Result<f64, SpectralError> {
    let v = w.field();
    let norm = v.norm_l2();
    if norm == 0.0 {
        return Err(SpectralError::ZeroField);
    }
    let g = w.grid();
    let h0 = symbol_multiplier(g, &crate::symbol::NamedKernel::H0.symbol(g.dim())?)?;
    let mask = dealias_mask(g);
    let m: Vec<Complex64> = h0.iter().zip(&mask).map(|(h, d)| Complex64::new(0.0, -h * d)).collect();
    let vp = signed_power(v, w.p());
    let product = vp.zip_map(&derivative(v, 0), |a, b| a * b);
    let out = Transform::new(g).apply_complex_multiplier(&product, &m);
    Ok(diff_ratio(v, &out, norm))
}
