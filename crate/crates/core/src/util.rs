//! Small numeric helpers shared across modules.

use std::f64::consts::PI;

/// Γ(n/2) for a positive integer n.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n > 0);
    if n % 2 == 0 {
        (1..n / 2).map(|k| k as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut a = 0.5;
        while a < n as f64 / 2.0 - 0.25 {
            g *= a;
            a += 1.0;
        }
        g
    }
}

/// Γ(N/2) / (2π^{N/2}), the reciprocal of the area of S^{N−1}.
pub fn inverse_sphere_area(dim: usize) -> f64 {
    gamma_half(dim) / (2.0 * PI.powf(dim as f64 / 2.0))
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Formats with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{:.16e}", v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_values() {
        assert_relative_eq!(gamma_half(1), PI.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(gamma_half(2), 1.0);
        assert_relative_eq!(gamma_half(3), PI.sqrt() / 2.0, epsilon = 1e-15);
        assert_relative_eq!(gamma_half(6), 2.0);
        assert_relative_eq!(gamma_half(7), 15.0 / 8.0 * PI.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(inverse_sphere_area(3), 1.0 / (4.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(inverse_sphere_area(2), 1.0 / (2.0 * PI), epsilon = 1e-15);
    }
}
