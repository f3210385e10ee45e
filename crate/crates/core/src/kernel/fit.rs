use super::{Kernel, KernelError, QuadratureSpec};

/// Least-squares fit of log|value| = a + slope·log(radius).
#[derive(Clone, Debug, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub std_error: f64,
    pub intercept: f64,
    pub used: usize,
    pub excluded: usize,
}

pub fn decay_fit(samples: &[(f64, f64)]) -> Result<PowerLawFit, KernelError> {
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(KernelError::Precondition("radii must be strictly increasing".into()));
    }
    if samples.iter().any(|s| !(s.0 > 0.0)) {
        return Err(KernelError::Precondition("radii must be positive".into()));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.1 != 0.0 && s.1.is_finite())
        .map(|&(r, v)| (r.ln(), v.abs().ln()))
        .collect();
    let excluded = samples.len() - pts.len();
    if excluded > 0 {
        log::warn!("decay_fit: excluded {excluded} zero or non-finite samples");
    }
    if pts.len() < 8 {
        return Err(KernelError::TooFewSamples(pts.len()));
    }
    let (slope, intercept, se) = linear_fit(&pts);
    Ok(PowerLawFit {
        exponent: slope,
        std_error: se,
        intercept,
        used: pts.len(),
        excluded,
    })
}

/// Ordinary least squares y = a + b x; returns (b, a, standard error of b).
pub(crate) fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - a - b * p.0).powi(2)).sum();
    let se = if pts.len() > 2 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (b, a, se)
}

/// Two-point extrapolation assuming v(R) = v∞ + c/R.
pub fn richardson_inverse_r(r1: f64, v1: f64, r2: f64, v2: f64) -> f64 {
    (r2 * v2 - r1 * v1) / (r2 - r1)
}

/// How the origin is approached in [`singularity_fit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApproachPath {
    /// x = (t, t², 0, …): the anisotropic scaling x⊥ ~ x₁² along which the
    /// singularity in the x₁ direction is attained.
    Axial,
    /// x = (t, 0, …, 0), the literal x₁ axis.
    LiteralAxis,
    /// x = (0, t, 0, …).
    Transverse,
}

impl ApproachPath {
    pub fn point(self, dim: usize, t: f64) -> Vec<f64> {
        let mut x = vec![0.0; dim];
        match self {
            ApproachPath::Axial => {
                x[0] = t;
                x[1] = t * t;
            }
            ApproachPath::LiteralAxis => x[0] = t,
            ApproachPath::Transverse => x[1] = t,
        }
        x
    }

    /// Whether a kernel with exponents `d` is odd in a coordinate held at zero.
    fn vanishes(self, d: &[u32]) -> bool {
        let zero_axes: Vec<usize> = match self {
            ApproachPath::Axial => (2..d.len()).collect(),
            ApproachPath::LiteralAxis => (1..d.len()).collect(),
            ApproachPath::Transverse => std::iter::once(0).chain(2..d.len()).collect(),
        };
        zero_axes.iter().any(|&k| d[k] % 2 == 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingularityFit {
    /// β in |f| ~ t^{−β}.
    pub beta: f64,
    pub std_error: f64,
    /// Set when the power is indistinguishable from zero but |f| grows like log(1/t).
    pub log_growth: bool,
    /// Slope of |f| against log(1/t), fitted on the same samples.
    pub log_slope: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Fits |f(x(t))| ~ t^{−β} for t ∈ [1e−3, 1e−1] along `path`.
pub fn singularity_fit(d: &[u32], path: ApproachPath, quad: &QuadratureSpec) -> Result<SingularityFit, KernelError> {
    if path.vanishes(d) {
        return Err(KernelError::VanishesBySymmetry);
    }
    let kernel = Kernel::new(d)?;
    let ts: Vec<f64> = (0..12).map(|i| 10f64.powf(-3.0 + 2.0 * i as f64 / 11.0)).collect();
    let pts: Vec<Vec<f64>> = ts.iter().map(|&t| path.point(d.len(), t)).collect();
    let vals = kernel.values(&pts, quad)?;
    let samples: Vec<(f64, f64)> = ts.iter().copied().zip(vals).collect();
    let fit = decay_fit(&samples)?;
    let lin: Vec<(f64, f64)> = samples.iter().map(|&(t, v)| ((1.0 / t).ln(), v.abs())).collect();
    let (b, _, se_b) = linear_fit(&lin);
    let span = (1e2f64).ln();
    let scale = lin.iter().map(|p| p.1).fold(0.0, f64::max);
    let log_growth = fit.exponent.abs() < 0.25 && b > 0.0 && b * span > 0.1 * scale && b > 10.0 * se_b;
    Ok(SingularityFit {
        beta: -fit.exponent,
        std_error: fit.std_error,
        log_growth,
        log_slope: b,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn synthetic_power_law() {
        let s: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, (i as f64).powi(-3))).collect();
        let f = decay_fit(&s).unwrap();
        assert_relative_eq!(f.exponent, -3.0, epsilon = 1e-12);
        assert!(f.std_error < 1e-12);
    }

    #[test]
    fn zero_values_are_excluded() {
        let mut s: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, 2.0 / (i * i) as f64)).collect();
        s[3].1 = 0.0;
        let f = decay_fit(&s).unwrap();
        assert_eq!(f.excluded, 1);
        assert_relative_eq!(f.exponent, -2.0, epsilon = 1e-12);
        s[4].1 = 0.0;
        s[5].1 = 0.0;
        assert_eq!(decay_fit(&s), Err(KernelError::TooFewSamples(7)));
    }

    #[test]
    fn extrapolation_removes_first_order_term() {
        let v = |r: f64| 3.0 + 5.0 / r;
        assert_relative_eq!(richardson_inverse_r(100.0, v(100.0), 200.0, v(200.0)), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn symmetric_paths_are_rejected() {
        let q = QuadratureSpec::default();
        assert_eq!(singularity_fit(&[1, 0], ApproachPath::Transverse, &q), Err(KernelError::VanishesBySymmetry));
        assert_eq!(singularity_fit(&[2, 1], ApproachPath::LiteralAxis, &q), Err(KernelError::VanishesBySymmetry));
    }
}
