//! Adaptive Gauss–Kronrod integration over intervals and over unit spheres.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::par;

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error(
        "no convergence after {subdivisions} subdivisions: estimate {estimate:e} ± {error:e}, \
         worst interval [{worst_a}, {worst_b}] with error {worst_error:e}"
    )]
    NotConverged {
        subdivisions: usize,
        estimate: f64,
        error: f64,
        worst_a: f64,
        worst_b: f64,
        worst_error: f64,
    },
    #[error("integrand returned a non-finite value at {at}")]
    NonFinite { at: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_subdivisions: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64, max_subdivisions: usize) -> Self {
        Tolerance {
            abs,
            rel,
            max_subdivisions,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value)
    }

    /// A tighter tolerance for integrals nested inside another integral.
    pub fn nested(&self, factor: f64) -> Self {
        Tolerance {
            abs: self.abs * factor,
            rel: self.rel * factor,
            max_subdivisions: self.max_subdivisions,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Estimate<V> {
    pub value: V,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

fn kronrod_nodes(a: f64, b: f64) -> [f64; 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 21];
    for i in 0..10 {
        x[2 * i] = c - h * XGK[i];
        x[2 * i + 1] = c + h * XGK[i];
    }
    x[20] = c;
    x
}

fn kronrod_combine<V: QuadValue>(a: f64, b: f64, fv: &[V; 21]) -> (V, f64) {
    let h = 0.5 * (b - a);
    let mut resk = fv[20] * WGK[10];
    let mut resg = V::zero();
    for i in 0..10 {
        let pair = fv[2 * i] + fv[2 * i + 1];
        resk = resk + pair * WGK[i];
        if i % 2 == 1 {
            resg = resg + pair * WG[i / 2];
        }
    }
    let value = resk * h;
    let diff = (resk - resg) * h;
    // QUADPACK error scaling; keeps the estimate conservative on smooth integrands.
    let mean = resk * 0.5;
    let mut resasc = (fv[20] - mean).magnitude() * WGK[10];
    for i in 0..10 {
        resasc += WGK[i] * ((fv[2 * i] - mean).magnitude() + (fv[2 * i + 1] - mean).magnitude());
    }
    resasc *= h.abs();
    let mut err = diff.magnitude();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    (value, err.max(50.0 * f64::EPSILON * value.magnitude()))
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive G10K21 integration over the partition defined by `points`
/// (sorted, at least two entries). Set `parallel_nodes` when a single integrand
/// evaluation is expensive enough to be worth spreading over threads.
pub fn integrate<V, F>(
    f: F,
    points: &[f64],
    tol: &Tolerance,
    parallel_nodes: bool,
) -> Result<Estimate<V>, QuadratureError>
where
    V: QuadValue,
    F: Fn(f64) -> V + Sync + Send,
{
    assert!(points.len() >= 2, "need at least one interval");
    let eval = |a: f64, b: f64| -> Result<(V, f64), QuadratureError> {
        let x = kronrod_nodes(a, b);
        let vals: Vec<V> = if parallel_nodes {
            par::map(&x, |&t| f(t))
        } else {
            x.iter().map(|&t| f(t)).collect()
        };
        let mut fv = [V::zero(); 21];
        for (i, v) in vals.into_iter().enumerate() {
            if !v.magnitude().is_finite() {
                return Err(QuadratureError::NonFinite { at: x[i] });
            }
            fv[i] = v;
        }
        Ok(kronrod_combine(a, b, &fv))
    };

    let mut heap = BinaryHeap::new();
    let mut total = V::zero();
    let mut total_err = 0.0;
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e) = eval(w[0], w[1])?;
        evaluations += 21;
        total = total + v;
        total_err += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let mut subdivisions = 0;
    while total_err > tol.target(total.magnitude()) {
        let Some(worst) = heap.pop() else { break };
        if subdivisions >= tol.max_subdivisions {
            return Err(QuadratureError::NotConverged {
                subdivisions,
                estimate: total.magnitude(),
                error: total_err,
                worst_a: worst.a,
                worst_b: worst.b,
                worst_error: worst.error,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval below floating resolution: accept it as is.
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            total_err -= worst.error;
            continue;
        }
        let (v1, e1) = eval(worst.a, mid)?;
        let (v2, e2) = eval(mid, worst.b)?;
        evaluations += 42;
        subdivisions += 1;
        total = total - worst.value + v1 + v2;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of incremental updates.
    let mut value = V::zero();
    let mut error = 0.0;
    for s in heap.iter() {
        value = value + s.value;
        error += s.error;
    }
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Orthonormal frame whose first vector is `pole` (normalized).
pub fn frame_from_pole(pole: &[f64]) -> Vec<Vec<f64>> {
    let n = pole.len();
    let norm = pole.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut frame: Vec<Vec<f64>> = vec![pole.iter().map(|v| v / norm).collect()];
    let mut order: Vec<usize> = (0..n).collect();
    // Prefer coordinate axes least aligned with the pole for numerical stability.
    order.sort_by(|&a, &b| frame[0][a].abs().total_cmp(&frame[0][b].abs()));
    for &k in &order {
        if frame.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for _ in 0..2 {
            for u in &frame {
                let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= dot * ui;
                }
            }
        }
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nv > 1e-8 {
            v.iter_mut().for_each(|a| *a /= nv);
            frame.push(v);
        }
    }
    frame
}

fn combine(frame: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let n = frame[0].len();
    let mut out = vec![0.0; n];
    for (c, v) in coeffs.iter().zip(frame) {
        for (o, vi) in out.iter_mut().zip(v) {
            *o += c * vi;
        }
    }
    out
}

/// Integral over the circle spanned by `u`, `v` of `f(cosφ u + sinφ v)` by the
/// trapezoid rule, doubled until successive values agree to `tol`.
fn circle(u: &[f64], v: &[f64], f: &dyn Fn(&[f64]) -> Complex64, tol: &Tolerance) -> Result<Complex64, QuadratureError> {
    let point = |phi: f64| -> Vec<f64> {
        let (s, c) = phi.sin_cos();
        u.iter().zip(v).map(|(a, b)| c * a + s * b).collect()
    };
    let mut n = 16usize;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        sum += f(&point(2.0 * PI * k as f64 / n as f64));
    }
    let mut prev = sum * (2.0 * PI / n as f64);
    while n < 1 << 16 {
        for k in 0..n {
            sum += f(&point(2.0 * PI * (k as f64 + 0.5) / n as f64));
        }
        n *= 2;
        let cur = sum * (2.0 * PI / n as f64);
        if (cur - prev).norm() <= tol.target(cur.norm()) && n >= 32 {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(QuadratureError::NotConverged {
        subdivisions: n,
        estimate: prev.norm(),
        error: f64::NAN,
        worst_a: 0.0,
        worst_b: 2.0 * PI,
        worst_error: f64::NAN,
    })
}

/// Fixed-order rule over the unit sphere spanned by `frame` (dimension ≥ 2 of the frame).
fn sphere_fixed(
    frame: &[Vec<f64>],
    f: &dyn Fn(&[f64]) -> Complex64,
    tol: &Tolerance,
    order: usize,
) -> Result<Complex64, QuadratureError> {
    if frame.len() == 2 {
        return circle(&frame[0], &frame[1], f, tol);
    }
    let k = frame.len() - 1;
    let (x, w) = gauss_legendre(order);
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let theta = 0.5 * PI * (xi + 1.0);
        let (s, c) = theta.sin_cos();
        let sub = |eta: &[f64]| -> Complex64 {
            let mut p: Vec<f64> = frame[0].iter().map(|a| c * a).collect();
            for (pi, e) in p.iter_mut().zip(eta) {
                *pi += s * e;
            }
            f(&p)
        };
        let inner = sphere_fixed(&frame[1..], &sub, tol, order)?;
        acc += inner * (0.5 * PI * wi * s.powi(k as i32 - 1));
    }
    Ok(acc)
}

/// Angles φ ∈ (0, 2π) where a·cosφ + b·sinφ + c changes sign or is extremal.
fn circle_features(a: f64, b: f64, c: f64) -> Vec<f64> {
    let r = a.hypot(b);
    let mut out = Vec::new();
    if r == 0.0 {
        return out;
    }
    let phi0 = b.atan2(a);
    let mut cand = vec![phi0, phi0 + PI];
    if c.abs() <= r {
        let d = (-c / r).acos();
        cand.push(phi0 + d);
        cand.push(phi0 - d);
    }
    for t in cand {
        let t = t.rem_euclid(2.0 * PI);
        if t > 0.0 && t < 2.0 * PI {
            out.push(t);
        }
    }
    out
}

/// ∫_{S^{N−1}} f(ω) dω with polar angle θ measured from `pole`.
///
/// The θ integral is adaptive and split at π/2. When `feature_axis` is given, the
/// great sphere ω_k = 0 is treated as a place where f may lose smoothness and is
/// added to the breakpoints. For N = 3 the azimuthal integral is adaptive as well;
/// for N ≥ 4 the remaining angles use fixed Gauss–Legendre/trapezoid products.
pub fn integrate_sphere<F>(
    pole: &[f64],
    f: F,
    tol: &Tolerance,
    feature_axis: Option<usize>,
) -> Result<Estimate<Complex64>, QuadratureError>
where
    F: Fn(&[f64]) -> Complex64 + Sync + Send,
{
    let n = pole.len();
    assert!(n >= 2);
    let frame = frame_from_pole(pole);
    let inner_tol = tol.nested(0.1);
    let theta_fn = |theta: f64| -> Complex64 {
        let (s, c) = theta.sin_cos();
        match n {
            2 => f(&combine(&frame, &[c, s])) + f(&combine(&frame, &[c, -s])),
            3 => {
                let point = |phi: f64| {
                    let (sp, cp) = phi.sin_cos();
                    combine(&frame, &[c, s * cp, s * sp])
                };
                let mut breaks = vec![0.0, 2.0 * PI];
                if let Some(k) = feature_axis {
                    breaks.extend(circle_features(s * frame[1][k], s * frame[2][k], c * frame[0][k]));
                }
                breaks.sort_by(f64::total_cmp);
                breaks.dedup();
                match integrate(|phi: f64| f(&point(phi)), &breaks, &inner_tol, false) {
                    Ok(e) => e.value * s,
                    Err(_) => Complex64::new(f64::NAN, f64::NAN),
                }
            }
            _ => {
                let g = |eta: &[f64]| -> Complex64 {
                    let mut p: Vec<f64> = frame[0].iter().map(|a| c * a).collect();
                    for (pi, e) in p.iter_mut().zip(eta) {
                        *pi += s * e;
                    }
                    f(&p)
                };
                let inner = sphere_fixed(&frame[1..], &g, &inner_tol, 24)
                    .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                inner * s.powi(n as i32 - 2)
            }
        }
    };
    let mut pts = vec![0.0, 0.5 * PI, PI];
    if let (2, Some(k)) = (n, feature_axis) {
        let (a, b) = (frame[0][k], frame[1][k]);
        for t in [(-a).atan2(b), (-a).atan2(-b)] {
            let t = t.rem_euclid(PI);
            if t > 0.0 && t < PI {
                pts.push(t);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    integrate(theta_fn, &pts, tol, true)
}
