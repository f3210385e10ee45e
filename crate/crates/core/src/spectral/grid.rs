use std::f64::consts::PI;

use super::SpectralError;
use crate::par;

/// Periodic uniform grid on Π [−L_i, L_i) with n_i points per axis (row-major,
/// last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    half_lengths: Vec<f64>,
    sizes: Vec<usize>,
}

impl Grid {
    pub fn new(half_lengths: Vec<f64>, sizes: Vec<usize>) -> Result<Self, SpectralError> {
        if half_lengths.len() != sizes.len() || sizes.len() < 2 {
            return Err(SpectralError::InvalidGrid(format!(
                "need matching half_lengths/sizes of length >= 2, got {} and {}",
                half_lengths.len(),
                sizes.len()
            )));
        }
        for (&l, &n) in half_lengths.iter().zip(&sizes) {
            if !(l > 0.0 && l.is_finite()) {
                return Err(SpectralError::InvalidGrid(format!("half length {l} must be positive")));
            }
            if n < 8 || !n.is_power_of_two() {
                return Err(SpectralError::InvalidGrid(format!("size {n} must be a power of two >= 8")));
            }
        }
        Ok(Grid { half_lengths, sizes })
    }

    /// Same half length and size on every axis.
    pub fn cube(dim: usize, half_length: f64, size: usize) -> Result<Self, SpectralError> {
        Grid::new(vec![half_length; dim], vec![size; dim])
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn half_lengths(&self) -> &[f64] {
        &self.half_lengths
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_lengths[axis] / self.sizes[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn coordinate(&self, axis: usize, i: usize) -> f64 {
        -self.half_lengths[axis] + i as f64 * self.spacing(axis)
    }

    /// Signed mode number k ∈ [−n/2, n/2) of storage index i.
    pub fn mode(&self, axis: usize, i: usize) -> i64 {
        let n = self.sizes[axis];
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn is_nyquist(&self, axis: usize, i: usize) -> bool {
        i == self.sizes[axis] / 2
    }

    /// Angular wavenumber πk/L of storage index i.
    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        PI * self.mode(axis, i) as f64 / self.half_lengths[axis]
    }

    pub fn wavenumbers(&self, axis: usize) -> Vec<f64> {
        (0..self.sizes[axis]).map(|i| self.wavenumber(axis, i)).collect()
    }

    pub fn min_half_length(&self) -> f64 {
        self.half_lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Multi-index of a flat index.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for a in (0..self.dim()).rev() {
            out[a] = flat % self.sizes[a];
            flat /= self.sizes[a];
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.sizes).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0; self.dim()];
        self.unravel(flat, &mut idx);
        idx.iter().enumerate().map(|(a, &i)| self.coordinate(a, i)).collect()
    }

    /// Index of the node at the origin.
    pub fn origin_index(&self) -> usize {
        let idx: Vec<usize> = self.sizes.iter().map(|n| n / 2).collect();
        self.ravel(&idx)
    }
}

/// Real samples of a function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite(i));
        }
        Ok(Field { grid, values })
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Field {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at every node, in parallel.
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let values = par::map_range(grid.len(), |i| f(&grid.point(i)));
        Field { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F>(&self, f: F) -> Field
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let v = &self.values;
        Field {
            grid: self.grid.clone(),
            values: par::map_range(v.len(), |i| f(v[i])),
        }
    }

    pub fn zip_map<F>(&self, other: &Field, f: F) -> Field
    where
        F: Fn(f64, f64) -> f64 + Sync + Send,
    {
        assert_eq!(self.grid, other.grid, "fields live on different grids");
        let (a, b) = (&self.values, &other.values);
        Field {
            grid: self.grid.clone(),
            values: par::map_range(a.len(), |i| f(a[i], b[i])),
        }
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    /// Grid quadrature ∫ g(v) dx.
    pub fn integral_of<F>(&self, g: F) -> f64
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        let v = &self.values;
        par::sum(v.len(), |i| g(v[i])) * self.grid.cell_volume()
    }

    pub fn integral(&self) -> f64 {
        self.integral_of(|v| v)
    }

    pub fn dot(&self, other: &Field) -> f64 {
        assert_eq!(self.grid, other.grid);
        let (a, b) = (&self.values, &other.values);
        par::sum(a.len(), |i| a[i] * b[i]) * self.grid.cell_volume()
    }

    /// Continuous L² norm (grid quadrature).
    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn mean(&self) -> f64 {
        let v = &self.values;
        par::sum(v.len(), |i| v[i]) / v.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn argmax_abs(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.abs() > self.values[best].abs() {
                best = i;
            }
        }
        best
    }

    /// Cyclic shift moving the node at multi-index `from` to `to`.
    pub fn roll(&self, from: &[usize], to: &[usize]) -> Field {
        let g = &self.grid;
        let shift: Vec<usize> = (0..g.dim())
            .map(|a| (to[a] + g.sizes()[a] - from[a]) % g.sizes()[a])
            .collect();
        let src = &self.values;
        let values = par::map_range(src.len(), |i| {
            let mut idx = vec![0; g.dim()];
            g.unravel(i, &mut idx);
            for a in 0..g.dim() {
                idx[a] = (idx[a] + g.sizes()[a] - shift[a]) % g.sizes()[a];
            }
            src[g.ravel(&idx)]
        });
        Field {
            grid: g.clone(),
            values,
        }
    }
}
