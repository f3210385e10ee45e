use num_complex::Complex64;

use super::fft::Transform;
use super::grid::{Field, Grid};
use crate::par;

/// Trigonometric interpolant Re Σ_k ĉ_k e^{iξ_k·(x+L)} of a periodic field.
pub struct Interpolant {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Interpolant {
    pub fn new(f: &Field) -> Self {
        let t = Transform::new(f.grid());
        let mut coeffs = t.forward(f);
        let scale = 1.0 / coeffs.len() as f64;
        coeffs.iter_mut().for_each(|z| *z *= scale);
        Interpolant {
            grid: f.grid().clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn contract(&self, x: &[f64], derivative: Option<usize>) -> f64 {
        let g = &self.grid;
        let phases: Vec<Vec<Complex64>> = (0..g.dim())
            .map(|a| {
                (0..g.sizes()[a])
                    .map(|k| {
                        let xi = g.wavenumber(a, k);
                        let e = Complex64::from_polar(1.0, xi * (x[a] + g.half_lengths()[a]));
                        match derivative {
                            Some(d) if d == a => {
                                if g.is_nyquist(a, k) {
                                    Complex64::new(0.0, 0.0)
                                } else {
                                    e * Complex64::new(0.0, xi)
                                }
                            }
                            _ => e,
                        }
                    })
                    .collect()
            })
            .collect();
        let mut buf: Vec<Complex64> = self.coeffs.clone();
        for a in (0..g.dim()).rev() {
            let n = g.sizes()[a];
            let e = &phases[a];
            buf = buf
                .chunks(n)
                .map(|row| row.iter().zip(e).fold(Complex64::new(0.0, 0.0), |s, (c, p)| s + c * p))
                .collect();
        }
        buf[0].re
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.contract(x, None)
    }

    pub fn derivative(&self, x: &[f64], axis: usize) -> f64 {
        self.contract(x, Some(axis))
    }

    pub fn eval_many(&self, points: &[Vec<f64>]) -> Vec<f64> {
        par::map(points, |x| self.eval(x))
    }

    /// Values on the tensor product of per-axis coordinates, row-major. Contracts
    /// one axis at a time, so the cost is Σ_a (Π sizes so far)·n_a·m_a rather than
    /// one full sum per output point.
    pub fn eval_on_tensor(&self, coords: &[Vec<f64>]) -> Vec<f64> {
        let g = &self.grid;
        assert_eq!(coords.len(), g.dim());
        let mut shape: Vec<usize> = g.sizes().to_vec();
        let mut buf = self.coeffs.clone();
        for a in (0..g.dim()).rev() {
            let n = shape[a];
            let m = coords[a].len();
            let phases: Vec<Complex64> = coords[a]
                .iter()
                .flat_map(|&y| {
                    (0..n).map(move |k| Complex64::from_polar(1.0, g.wavenumber(a, k) * (y + g.half_lengths()[a])))
                })
                .collect();
            let inner: usize = shape[a + 1..].iter().product();
            let outer: usize = shape[..a].iter().product();
            let src = &buf;
            buf = par::map_range(outer * m * inner, |flat| {
                let i = flat % inner;
                let j = (flat / inner) % m;
                let o = flat / (inner * m);
                let p = &phases[j * n..(j + 1) * n];
                let base = o * n * inner + i;
                (0..n).fold(Complex64::new(0.0, 0.0), |s, k| s + src[base + k * inner] * p[k])
            });
            shape[a] = m;
        }
        buf.into_iter().map(|z| z.re).collect()
    }
}

/// Periodic tensor-product Lagrange interpolation on an 8-point stencil.
pub struct LocalInterpolant {
    field: Field,
}

const STENCIL: usize = 8;

impl LocalInterpolant {
    pub fn new(f: &Field) -> Self {
        LocalInterpolant { field: f.clone() }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let g = self.field.grid();
        let dim = g.dim();
        let mut base = vec![0i64; dim];
        let mut weights = vec![[0.0; STENCIL]; dim];
        for a in 0..dim {
            let h = g.spacing(a);
            let u = (x[a] + g.half_lengths()[a]) / h;
            let i0 = u.floor() as i64 - (STENCIL as i64 / 2 - 1);
            base[a] = i0;
            let t = u - i0 as f64;
            for (k, w) in weights[a].iter_mut().enumerate() {
                let mut l = 1.0;
                for m in 0..STENCIL {
                    if m != k {
                        l *= (t - m as f64) / (k as f64 - m as f64);
                    }
                }
                *w = l;
            }
        }
        let vals = self.field.values();
        let mut idx = vec![0usize; dim];
        let mut total = 0.0;
        for flat in 0..STENCIL.pow(dim as u32) {
            let mut r = flat;
            let mut w = 1.0;
            for a in (0..dim).rev() {
                let k = r % STENCIL;
                r /= STENCIL;
                w *= weights[a][k];
                let n = g.sizes()[a] as i64;
                idx[a] = (base[a] + k as i64).rem_euclid(n) as usize;
            }
            total += w * vals[g.ravel(&idx)];
        }
        total
    }
}
