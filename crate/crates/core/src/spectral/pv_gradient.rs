//! ∂_k v by direct quadrature against the kernel K_k, as a cross-check of the
//! spectral derivative. With g = K₀ * v^{p+1} and f = v^{p+1},
//!
//! ∂_k g(x) = −∫_{|y|>1} κ_k(y) f(x−y) dy − ∫_{|y|<1} κ_k(y)(f(x−y) − f(x)) dy + c_k f(x),
//!
//! where K_k = iκ_k (so ∂_k K₀ = −κ_k off the origin) and c_k = ∫_{S¹} K₀(y) y_k dσ.
//! Kernel values are computed once on a polar table and reused for every point.

use std::f64::consts::PI;

use super::interp::LocalInterpolant;
use super::{signed_power, SpectralError, WaveState};
use crate::kernel::{Kernel, QuadratureSpec};
use crate::quadrature::gauss_legendre;
use crate::symbol::NamedKernel;
use crate::util::norm;

#[derive(Clone, Debug)]
pub struct PvGradientOptions {
    /// Trapezoid nodes on the circle (multiple of 4).
    pub angles: usize,
    /// Chebyshev nodes in log r for the outer kernel table.
    pub table_nodes: usize,
    /// Dyadic shells [2^{−j−1}, 2^{−j}] covering the unit ball; the core below is dropped.
    pub inner_shells: usize,
    /// Dyadic angular panels towards the x₁ axis in the unit ball, where the
    /// kernel varies on the scale θ ~ r.
    pub inner_angle_panels: usize,
    /// Outer radius; defaults to 0.9·min L − max|x|.
    pub outer_radius: Option<f64>,
    pub quad: QuadratureSpec,
}

impl Default for PvGradientOptions {
    fn default() -> Self {
        PvGradientOptions {
            angles: 128,
            table_nodes: 16,
            inner_shells: 6,
            inner_angle_panels: 8,
            outer_radius: None,
            quad: QuadratureSpec::with_tolerance(1e-8, 1e-5),
        }
    }
}

fn chebyshev_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|j| ((2 * j + 1) as f64 * PI / (2 * n) as f64).cos()).collect()
}

/// Barycentric interpolation through Chebyshev points of the first kind.
fn chebyshev_interp(nodes: &[f64], values: &[f64], t: f64) -> f64 {
    let n = nodes.len();
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..n {
        let d = t - nodes[j];
        if d == 0.0 {
            return values[j];
        }
        let w = ((2 * j + 1) as f64 * PI / (2 * n) as f64).sin() * if j % 2 == 0 { 1.0 } else { -1.0 };
        num += w * values[j] / d;
        den += w / d;
    }
    num / den
}

/// Quadrature rule on the first quadrant, extended to the circle by reflection.
struct QuarterRule {
    nodes: Vec<(f64, f64)>,
}

impl QuarterRule {
    fn midpoint(m: usize) -> Self {
        let d = 2.0 * PI / m as f64;
        QuarterRule {
            nodes: (0..m / 4).map(|i| ((i as f64 + 0.5) * d, d)).collect(),
        }
    }

    /// Gauss–Legendre panels on [0, π/2] refined dyadically towards θ = 0.
    fn graded(panels: usize) -> Self {
        let (gx, gw) = gauss_legendre(6);
        let mut breaks: Vec<f64> = (0..panels).map(|k| 0.5 * PI * 0.5f64.powi(k as i32)).collect();
        breaks.push(0.0);
        breaks.reverse();
        let mut nodes = Vec::new();
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            for (x, wt) in gx.iter().zip(&gw) {
                nodes.push((0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * wt));
            }
        }
        QuarterRule { nodes }
    }

    /// (cos, sin, weight, reflected in x₁, reflected in x₂) for every node on the circle.
    fn circle(&self) -> Vec<(f64, f64, f64, bool, bool)> {
        let mut out = Vec::with_capacity(4 * self.nodes.len());
        for &(t, w) in &self.nodes {
            let (c, s) = (t.cos(), t.sin());
            out.push((c, s, w, false, false));
            out.push((-c, s, w, true, false));
            out.push((-c, -s, w, true, true));
            out.push((c, -s, w, false, true));
        }
        out
    }
}

/// Kernel values on rings of a polar grid.
struct PolarTable {
    /// (radius, radial weight including the Jacobian r)
    rings: Vec<(f64, f64)>,
    /// per ring, one value per node of `circle`
    values: Vec<Vec<f64>>,
    circle: Vec<(f64, f64, f64, bool, bool)>,
}

fn reflect(quarter: &[f64], parity: [bool; 2]) -> Vec<f64> {
    let mut out = Vec::with_capacity(4 * quarter.len());
    for &v in quarter {
        for (r1, r2) in [(false, false), (true, false), (true, true), (false, true)] {
            let flip = (r1 && parity[0]) != (r2 && parity[1]);
            out.push(if flip { -v } else { v });
        }
    }
    out
}

fn gauss_rings(breaks: &[f64], order: usize) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(order);
    let mut rings = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (x, wt) in gx.iter().zip(&gw) {
            let r = 0.5 * (a + b) + 0.5 * (b - a) * x;
            rings.push((r, 0.5 * (b - a) * wt * r));
        }
    }
    rings
}

/// ∂_axis v at `points` (N = 2) from kernel quadrature.
pub fn pv_gradient(
    w: &WaveState,
    axis: usize,
    points: &[Vec<f64>],
    opts: &PvGradientOptions,
) -> Result<Vec<f64>, SpectralError> {
    let g = w.grid();
    if g.dim() != 2 {
        return Err(SpectralError::Unsupported("kernel-quadrature gradient is implemented for N = 2".into()));
    }
    if axis >= 2 {
        return Err(SpectralError::InvalidGrid(format!("axis {axis} out of range")));
    }
    let m = opts.angles;
    if m < 8 || m % 4 != 0 {
        return Err(SpectralError::Unsupported("angle count must be a multiple of 4, at least 8".into()));
    }
    let xmax = points.iter().map(|x| norm(x)).fold(0.0, f64::max);
    let rmax = opts.outer_radius.unwrap_or(0.9 * g.min_half_length() - xmax);
    if rmax <= 2.0 {
        return Err(SpectralError::InvalidGrid(format!("outer radius {rmax} too small for the box")));
    }

    let exps = NamedKernel::K(axis).exponents(2);
    let kk = Kernel::new(&exps)?;
    let parity = [exps[0] % 2 == 1, exps[1] % 2 == 1];
    let at = |r: f64, t: f64| vec![r * t.cos(), r * t.sin()];
    let outer_rule = QuarterRule::midpoint(m);
    let inner_rule = QuarterRule::graded(opts.inner_angle_panels);

    // Outer: r³κ tabulated on Chebyshev nodes in log r, interpolated onto the rings.
    let u_max = rmax.ln();
    let cheb = chebyshev_nodes(opts.table_nodes);
    let table_r: Vec<f64> = cheb.iter().map(|c| (0.5 * u_max * (c + 1.0)).exp()).collect();
    let mut pts = Vec::new();
    for &r in &table_r {
        pts.extend(outer_rule.nodes.iter().map(|&(t, _)| at(r, t)));
    }
    let shells: Vec<f64> = (0..=opts.inner_shells).rev().map(|j| 0.5f64.powi(j as i32)).collect();
    let inner_rings = gauss_rings(&shells, 4);
    for &(r, _) in &inner_rings {
        pts.extend(inner_rule.nodes.iter().map(|&(t, _)| at(r, t)));
    }
    let circle_pts: Vec<Vec<f64>> = outer_rule.nodes.iter().map(|&(t, _)| at(1.0, t)).collect();
    let vals = kk.values(&pts, &opts.quad)?;
    let k0 = Kernel::new(&NamedKernel::K0.exponents(2))?;
    let k0_circle = reflect(&k0.values(&circle_pts, &opts.quad)?, [false, false]);
    let coefficient: f64 = outer_rule
        .circle()
        .iter()
        .zip(&k0_circle)
        .map(|(&(c, s, wt, _, _), k)| k * if axis == 0 { c } else { s } * wt)
        .sum();

    let q = outer_rule.nodes.len();
    let nt = table_r.len();
    let table: Vec<Vec<f64>> = (0..q)
        .map(|a| (0..nt).map(|j| vals[j * q + a] * table_r[j].powi(3)).collect())
        .collect();
    let mut breaks = vec![1.0];
    while *breaks.last().unwrap() < rmax {
        let next = (2.0 * breaks.last().unwrap()).min(rmax);
        breaks.push(next);
    }
    let outer_rings = gauss_rings(&breaks, 12);
    let outer = PolarTable {
        values: outer_rings
            .iter()
            .map(|&(r, _)| {
                let t = 2.0 * r.ln() / u_max - 1.0;
                let quarter: Vec<f64> = (0..q).map(|a| chebyshev_interp(&cheb, &table[a], t) / r.powi(3)).collect();
                reflect(&quarter, parity)
            })
            .collect(),
        rings: outer_rings,
        circle: outer_rule.circle(),
    };
    let base = nt * q;
    let qi = inner_rule.nodes.len();
    let inner = PolarTable {
        values: (0..inner_rings.len())
            .map(|j| reflect(&vals[base + j * qi..base + (j + 1) * qi], parity))
            .collect(),
        rings: inner_rings,
        circle: inner_rule.circle(),
    };

    let f = signed_power(w.field(), w.p().succ());
    let interp = LocalInterpolant::new(&f);
    let scale = 1.0 / w.p().succ().value();
    Ok(crate::par::map(points, |x| {
        let fx = interp.eval(x);
        let sweep = |table: &PolarTable, subtract: f64| -> f64 {
            let mut total = 0.0;
            for (row, &(r, wr)) in table.values.iter().zip(&table.rings) {
                let mut ring = 0.0;
                for (k, &(c, s, wt, _, _)) in row.iter().zip(&table.circle) {
                    ring += wt * k * (interp.eval(&[x[0] - r * c, x[1] - r * s]) - subtract);
                }
                total += wr * ring;
            }
            total
        };
        let dg = -sweep(&outer, 0.0) - sweep(&inner, fx) + coefficient * fx;
        dg * scale
    }))
}
