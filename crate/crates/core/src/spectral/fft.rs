use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Field, Grid};
use crate::par;

const LINES_PER_TASK: usize = 32;

/// Forward and inverse N-D transforms for one grid. Forward uses e^{−ix·ξ};
/// the inverse is normalized so `inverse(forward(f)) == f`.
pub struct Transform {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl Transform {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = grid.sizes().iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = grid.sizes().iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Transform {
            grid: grid.clone(),
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn forward(&self, f: &Field) -> Vec<Complex64> {
        assert_eq!(f.grid(), &self.grid);
        let v = f.values();
        let mut data = par::map_range(v.len(), |i| Complex64::new(v[i], 0.0));
        self.forward_in_place(&mut data);
        data
    }

    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        for axis in 0..self.grid.dim() {
            transform_axis(data, self.grid.sizes(), axis, &self.forward[axis]);
        }
    }

    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        for axis in 0..self.grid.dim() {
            transform_axis(data, self.grid.sizes(), axis, &self.inverse[axis]);
        }
        let scale = 1.0 / data.len() as f64;
        par::for_each_chunk_mut(data, 1 << 14, |_, c| c.iter_mut().for_each(|z| *z *= scale));
    }

    /// Inverse transform keeping the real part.
    pub fn inverse_real(&self, mut data: Vec<Complex64>) -> Field {
        self.inverse_in_place(&mut data);
        let values = par::map_range(data.len(), |i| data[i].re);
        Field::from_parts_unchecked(self.grid.clone(), values)
    }

    /// f ↦ F⁻¹[m · F f] for a real multiplier table `m` (one entry per mode).
    pub fn apply_real_multiplier(&self, f: &Field, m: &[f64]) -> Field {
        let mut spec = self.forward(f);
        par::for_each_chunk_mut(&mut spec, 1 << 14, |c, chunk| {
            let base = c << 14;
            for (k, z) in chunk.iter_mut().enumerate() {
                *z *= m[base + k];
            }
        });
        self.inverse_real(spec)
    }

    /// f ↦ F⁻¹[m · F f] for a complex multiplier table.
    pub fn apply_complex_multiplier(&self, f: &Field, m: &[Complex64]) -> Field {
        let mut spec = self.forward(f);
        par::for_each_chunk_mut(&mut spec, 1 << 14, |c, chunk| {
            let base = c << 14;
            for (k, z) in chunk.iter_mut().enumerate() {
                *z *= m[base + k];
            }
        });
        self.inverse_real(spec)
    }
}

/// One-dimensional transforms along `axis` of a row-major array. Lines along the
/// last axis are contiguous; other axes are gathered into a scratch buffer.
fn transform_axis(data: &mut [Complex64], sizes: &[usize], axis: usize, fft: &Arc<dyn Fft<f64>>) {
    let n = sizes[axis];
    let inner: usize = sizes[axis + 1..].iter().product();
    let task = n * LINES_PER_TASK;
    let run = |chunk: &mut [Complex64]| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(chunk, &mut scratch);
    };
    if inner == 1 {
        par::for_each_chunk_mut(data, task, |_, c| run(c));
        return;
    }
    let mut lines = vec![Complex64::new(0.0, 0.0); data.len()];
    {
        let src: &[Complex64] = data;
        par::for_each_chunk_mut(&mut lines, task, |t, chunk| {
            for (l, line) in chunk.chunks_mut(n).enumerate() {
                let id = t * LINES_PER_TASK + l;
                let (o, i) = (id / inner, id % inner);
                for (k, z) in line.iter_mut().enumerate() {
                    *z = src[(o * n + k) * inner + i];
                }
            }
            run(chunk);
        });
    }
    let lines = &lines;
    par::for_each_chunk_mut(data, inner, |r, row| {
        let (o, k) = (r / n, r % n);
        for (i, z) in row.iter_mut().enumerate() {
            *z = lines[(o * inner + i) * n + k];
        }
    });
}
