//! Checks on solitary waves: the closed-form lump, mass, energy and action,
//! the far-field profile v∞, Pohozaev identities and decay exponents.

use serde::Serialize;
use thiserror::Error;

use crate::kernel::{decay_fit, richardson_inverse_r, PowerLawFit};
use crate::kernel::{Direction, KernelError};
use crate::par;
use crate::spectral::{
    derivative, signed_power, transverse_fields, Exponent, Field, Grid, Interpolant, SpectralError, WaveState,
};
use crate::util::{fmt17, inverse_sphere_area};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("radius {radius} exceeds the wrap bound {bound} (0.45 of the smallest half length)")]
    WrapBound { radius: f64, bound: f64 },
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// The explicit speed-c solitary wave of the two-dimensional KP-I equation (p = 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LumpOracle {
    speed: f64,
}

impl LumpOracle {
    pub fn new(speed: f64) -> Result<Self, DiagnosticsError> {
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(DiagnosticsError::Precondition(format!("speed must be positive, got {speed}")));
        }
        Ok(LumpOracle { speed })
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        let c = self.speed;
        let a = c * x1 * x1;
        let b = c * c * x2 * x2;
        24.0 * c * (3.0 - a + b) / (3.0 + a + b).powi(2)
    }

    /// Samples the lump on `grid` (no projection).
    pub fn sample(&self, grid: &Grid) -> Result<Field, DiagnosticsError> {
        if grid.dim() != 2 {
            return Err(DiagnosticsError::Unsupported("the lump is two-dimensional".into()));
        }
        Ok(Field::from_fn(grid.clone(), |x| self.value(x[0], x[1])))
    }

    /// ∫v² = 96π·√c (exact).
    pub fn mass(&self) -> f64 {
        96.0 * std::f64::consts::PI * self.speed.sqrt()
    }
}

pub fn lump_value(c: f64, x: &[f64]) -> Result<f64, DiagnosticsError> {
    if x.len() != 2 {
        return Err(DiagnosticsError::Unsupported(format!("lump needs N = 2, got {}", x.len())));
    }
    Ok(LumpOracle::new(c)?.value(x[0], x[1]))
}

/// The lump as a wave state on `grid` (p = 1), projected onto zero x₁-mean.
pub fn lump_state(grid: &Grid, c: f64) -> Result<WaveState, DiagnosticsError> {
    let f = LumpOracle::new(c)?.sample(grid)?;
    let f = crate::spectral::project_zero_mean_x1(&f);
    Ok(WaveState::new(f, Exponent::integer(1), c)?)
}

/// ∫v².
pub fn mass(w: &WaveState) -> f64 {
    w.field().integral_of(|v| v * v)
}

/// The integrals entering energy and the Pohozaev identities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Integrals {
    pub mass: f64,
    /// ∫v^{p+1}
    pub power_p1: f64,
    /// ∫v^{p+2}
    pub power_p2: f64,
    /// ∫(∂₁v)²
    pub dx1_sq: f64,
    /// ∫v_j² for j = 2 … N
    pub transverse_sq: Vec<f64>,
}

pub fn integrals(w: &WaveState) -> Integrals {
    let v = w.field();
    let p = w.p();
    let p1 = p.succ();
    let p2 = p1.succ();
    let d1 = derivative(v, 0);
    Integrals {
        mass: mass(w),
        power_p1: signed_power(v, p1).integral(),
        power_p2: signed_power(v, p2).integral(),
        dx1_sq: d1.integral_of(|u| u * u),
        transverse_sq: transverse_fields(w)
            .components
            .iter()
            .map(|f| f.integral_of(|u| u * u))
            .collect(),
    }
}

fn energy_from(i: &Integrals, p: Exponent) -> f64 {
    let pv = p.value();
    0.5 * i.dx1_sq + 0.5 * i.transverse_sq.iter().sum::<f64>() - i.power_p2 / ((pv + 1.0) * (pv + 2.0))
}

/// E(v) = ½∫(∂₁v)² + ½Σ∫v_j² − ∫v^{p+2}/((p+1)(p+2)).
pub fn energy(w: &WaveState) -> f64 {
    energy_from(&integrals(w), w.p())
}

/// S(v) = E(v) + (c/2)∫v².
pub fn action(w: &WaveState) -> f64 {
    let i = integrals(w);
    energy_from(&i, w.p()) + 0.5 * w.speed() * i.mass
}

/// σ ↦ coefficient·(1 − Nσ₁²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngularProfile {
    pub dim: usize,
    pub coefficient: f64,
}

impl AngularProfile {
    pub fn eval(&self, sigma: &[f64]) -> f64 {
        self.coefficient * (1.0 - self.dim as f64 * sigma[0] * sigma[0])
    }
}

/// v∞ from ∫v^{p+1}.
pub fn v_infinity_prediction(w: &WaveState) -> AngularProfile {
    let n = w.grid().dim();
    let integral = signed_power(w.field(), w.p().succ()).integral();
    AngularProfile {
        dim: n,
        coefficient: inverse_sphere_area(n) / w.p().succ().value() * integral,
    }
}

/// v∞ from the energy and, separately, from the action (p = 1, N ∈ {2, 3}).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyProfiles {
    pub energy: f64,
    pub action: f64,
    pub from_energy: AngularProfile,
    pub from_action: AngularProfile,
}

pub fn v_infinity_from_energy(w: &WaveState) -> Result<EnergyProfiles, DiagnosticsError> {
    let n = w.grid().dim();
    if w.p() != Exponent::integer(1) || !(n == 2 || n == 3) {
        return Err(DiagnosticsError::Unsupported(format!(
            "energy form of v∞ needs p = 1 and N in {{2, 3}}, got p = {} and N = {n}",
            w.p()
        )));
    }
    let i = integrals(w);
    let e = energy_from(&i, w.p());
    let s = e + 0.5 * w.speed() * i.mass;
    let nf = n as f64;
    // Γ(N/2)/π^{N/2} = 2/|S^{N−1}|
    let g = 2.0 * inverse_sphere_area(n);
    Ok(EnergyProfiles {
        energy: e,
        action: s,
        from_energy: AngularProfile {
            dim: n,
            coefficient: (7.0 - 2.0 * nf) * g / (2.0 * (2.0 * nf - 5.0)) * e,
        },
        from_action: AngularProfile {
            dim: n,
            coefficient: (7.0 - 2.0 * nf) * g / 4.0 * s,
        },
    })
}

/// R^N v(Rσ) on radii × directions, with the prediction from ∫v^{p+1}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoticProfile {
    pub radii: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    /// samples[i][j] = R_i^N v(R_i σ_j)
    pub samples: Vec<Vec<f64>>,
    pub prediction: Vec<f64>,
    /// Per-direction limit extrapolated from the two largest radii, error ~ 1/R.
    pub extrapolated: Vec<f64>,
    /// sup_σ |v_R − v∞| / sup|v∞| at the largest radius.
    pub sup_gap_largest: f64,
    /// Same gap for the extrapolated profile.
    pub sup_gap_extrapolated: f64,
    /// Uniform convergence is only established for p ≥ 1/N.
    pub uniformity_expected: bool,
}

fn wrap_bound(grid: &Grid) -> f64 {
    0.45 * grid.min_half_length()
}

pub fn profile_extract(
    w: &WaveState,
    radii: &[f64],
    directions: &[Direction],
) -> Result<AsymptoticProfile, DiagnosticsError> {
    let n = w.grid().dim();
    if radii.len() < 2 || radii.windows(2).any(|r| r[1] <= r[0]) || radii[0] <= 0.0 {
        return Err(DiagnosticsError::Precondition("need at least two increasing positive radii".into()));
    }
    if directions.iter().any(|d| d.dim() != n) {
        return Err(DiagnosticsError::Precondition("direction dimension mismatch".into()));
    }
    let bound = wrap_bound(w.grid());
    let rmax = *radii.last().unwrap();
    if rmax > bound {
        return Err(DiagnosticsError::WrapBound { radius: rmax, bound });
    }
    let interp = Interpolant::new(w.field());
    let pred = v_infinity_prediction(w);
    let mut points = Vec::new();
    for &r in radii {
        for d in directions {
            points.push(d.scaled(r));
        }
    }
    let vals = interp.eval_many(&points);
    let nd = directions.len();
    let samples: Vec<Vec<f64>> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| (0..nd).map(|j| r.powi(n as i32) * vals[i * nd + j]).collect())
        .collect();
    let prediction: Vec<f64> = directions.iter().map(|d| pred.eval(d.components())).collect();
    let k = radii.len();
    let extrapolated: Vec<f64> = (0..nd)
        .map(|j| richardson_inverse_r(radii[k - 2], samples[k - 2][j], radii[k - 1], samples[k - 1][j]))
        .collect();
    let scale = prediction.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gap = |row: &[f64]| row.iter().zip(&prediction).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / scale;
    Ok(AsymptoticProfile {
        radii: radii.to_vec(),
        directions: directions.iter().map(|d| d.components().to_vec()).collect(),
        sup_gap_largest: gap(&samples[k - 1]),
        sup_gap_extrapolated: gap(&extrapolated),
        samples,
        prediction,
        extrapolated,
        uniformity_expected: w.p().value() * n as f64 >= 1.0,
    })
}

/// The three integral identities satisfied by solitary waves of speed 1, and the
/// ratios they imply.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PohozaevReport {
    pub integrals: Integrals,
    pub residual_49: f64,
    /// One entry per transverse index k = 2 … N.
    pub residual_50: Vec<f64>,
    pub residual_51: f64,
    /// Measured ∫v^{p+2}/∫v² and its predicted value 2(p+1)(p+2)/A.
    pub ratio_power: (f64, f64),
    /// Measured ∫(∂₁v)²/∫v² and pN/A.
    pub ratio_dx1: (f64, f64),
    /// Measured ∫v_k²/∫v² and p/A, per k.
    pub ratio_transverse: Vec<(f64, f64)>,
    pub energy: f64,
    pub action: f64,
    pub mass: f64,
}

impl PohozaevReport {
    pub fn max_residual(&self) -> f64 {
        self.residual_50
            .iter()
            .fold(self.residual_49.abs().max(self.residual_51.abs()), |m, r| m.max(r.abs()))
    }

    pub fn max_ratio_error(&self) -> f64 {
        let rel = |(a, b): (f64, f64)| ((a - b) / b).abs();
        self.ratio_transverse
            .iter()
            .fold(rel(self.ratio_power).max(rel(self.ratio_dx1)), |m, &r| m.max(rel(r)))
    }
}

pub fn pohozaev_check(w: &WaveState) -> PohozaevReport {
    let i = integrals(w);
    let p = w.p().value();
    let n = w.grid().dim() as f64;
    let m = i.mass;
    let sum_t: f64 = i.transverse_sq.iter().sum();
    let r49 = (-m + 2.0 / (p + 2.0) * i.power_p2 - 3.0 * i.dx1_sq + sum_t) / m;
    let r50 = i
        .transverse_sq
        .iter()
        .map(|vk| (m - 2.0 / ((p + 1.0) * (p + 2.0)) * i.power_p2 + i.dx1_sq - 2.0 * vk + sum_t) / m)
        .collect();
    let r51 = (m - i.power_p2 / (p + 1.0) + i.dx1_sq + sum_t) / m;
    let a = 4.0 + p * (3.0 - 2.0 * n);
    let energy = energy_from(&i, w.p());
    PohozaevReport {
        residual_49: r49,
        residual_50: r50,
        residual_51: r51,
        ratio_power: (i.power_p2 / m, 2.0 * (p + 1.0) * (p + 2.0) / a),
        ratio_dx1: (i.dx1_sq / m, p * n / a),
        ratio_transverse: i.transverse_sq.iter().map(|vk| (vk / m, p / a)).collect(),
        energy,
        action: energy + 0.5 * w.speed() * m,
        mass: m,
        integrals: i,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DecayTarget {
    Value,
    Gradient,
}

/// −N for v, −min{(p+1)N, N+1} for ∇v.
pub fn expected_decay(dim: usize, p: Exponent, which: DecayTarget) -> f64 {
    let n = dim as f64;
    match which {
        DecayTarget::Value => -n,
        DecayTarget::Gradient => -((p.value() + 1.0) * n).min(n + 1.0),
    }
}

/// Default fit window as fractions of the smallest half length.
pub const DECAY_WINDOW: (f64, f64) = (0.05, 0.15);

/// Log-log slope of |v(Rσ)| or |∇v(Rσ)| over 12 radii spread geometrically
/// across `window` (fractions of the smallest half length).
pub fn decay_exponent(
    w: &WaveState,
    direction: &Direction,
    which: DecayTarget,
    window: (f64, f64),
) -> Result<PowerLawFit, DiagnosticsError> {
    let g = w.grid();
    let l = g.min_half_length();
    let (lo, hi) = (window.0 * l, window.1 * l);
    if !(lo > 0.0 && hi > lo) {
        return Err(DiagnosticsError::Precondition(format!("bad window {window:?}")));
    }
    if hi > wrap_bound(g) {
        return Err(DiagnosticsError::WrapBound {
            radius: hi,
            bound: wrap_bound(g),
        });
    }
    let radii: Vec<f64> = (0..12).map(|i| lo * (hi / lo).powf(i as f64 / 11.0)).collect();
    let interp = Interpolant::new(w.field());
    let vals = par::map(&radii, |&r| {
        let x = direction.scaled(r);
        match which {
            DecayTarget::Value => interp.eval(&x),
            DecayTarget::Gradient => (0..g.dim()).map(|a| interp.derivative(&x, a).powi(2)).sum::<f64>().sqrt(),
        }
    });
    let samples: Vec<(f64, f64)> = radii.into_iter().zip(vals).collect();
    Ok(decay_fit(&samples)?)
}

/// One pass/fail line of a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    /// Passes when |value − expected| ≤ tolerance.
    pub fn absolute(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        CheckRow {
            name: name.to_string(),
            value,
            expected,
            tolerance,
            pass: (value - expected).abs() <= tolerance,
        }
    }

    /// Passes when |value − expected| ≤ tolerance·|expected|.
    pub fn relative(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        CheckRow {
            name: name.to_string(),
            value,
            expected,
            tolerance,
            pass: (value - expected).abs() <= tolerance * expected.abs(),
        }
    }

    /// Passes when value < bound.
    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        CheckRow {
            name: name.to_string(),
            value,
            expected: 0.0,
            tolerance: bound,
            pass: value < bound,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<CheckRow>,
}

impl Report {
    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,value,expected,tolerance,pass\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.name,
                fmt17(r.value),
                fmt17(r.expected),
                fmt17(r.tolerance),
                r.pass
            ));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Standard rows for a wave state: Pohozaev identities, their ratios and, for
/// p = 1 in N ∈ {2, 3}, agreement of the three v∞ computations.
pub fn standard_report(w: &WaveState) -> Report {
    let mut rep = Report::default();
    let ph = pohozaev_check(w);
    rep.push(CheckRow::below("pohozaev_49", ph.residual_49.abs(), 1e-3));
    for (k, r) in ph.residual_50.iter().enumerate() {
        rep.push(CheckRow::below(&format!("pohozaev_50_k{}", k + 2), r.abs(), 1e-3));
    }
    rep.push(CheckRow::below("pohozaev_51", ph.residual_51.abs(), 1e-3));
    rep.push(CheckRow::relative("ratio_power", ph.ratio_power.0, ph.ratio_power.1, 5e-3));
    rep.push(CheckRow::relative("ratio_dx1", ph.ratio_dx1.0, ph.ratio_dx1.1, 5e-3));
    for (k, r) in ph.ratio_transverse.iter().enumerate() {
        rep.push(CheckRow::relative(&format!("ratio_v{}", k + 2), r.0, r.1, 5e-3));
    }
    if let Ok(ep) = v_infinity_from_energy(w) {
        let axis = {
            let mut s = vec![0.0; w.grid().dim()];
            s[0] = 1.0;
            s
        };
        let a = v_infinity_prediction(w).eval(&axis);
        let b = ep.from_energy.eval(&axis);
        let c = ep.from_action.eval(&axis);
        rep.push(CheckRow::relative("vinf_energy_vs_mass", b, a, 1e-2));
        rep.push(CheckRow::relative("vinf_action_vs_mass", c, a, 1e-2));
        rep.push(CheckRow::relative("vinf_energy_vs_action", b, c, 1e-2));
    }
    rep
}
