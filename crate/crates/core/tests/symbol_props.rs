use std::sync::OnceLock;

use gkp_core::symbol::{DerivativeTable, KernelSymbol, MultiIndexPoly, NamedKernel};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// (exponents, table) for every named kernel in N = 2, 3.
fn tables() -> &'static Vec<(Vec<u32>, DerivativeTable)> {
    static T: OnceLock<Vec<(Vec<u32>, DerivativeTable)>> = OnceLock::new();
    T.get_or_init(|| {
        let mut out = Vec::new();
        for dim in [2, 3] {
            let mut named = vec![NamedKernel::H0, NamedKernel::K0];
            named.extend((0..dim).map(NamedKernel::K));
            for k in named {
                out.push((k.exponents(dim), DerivativeTable::new(k.symbol(dim).unwrap())));
            }
        }
        out
    })
}

fn rational() -> impl Strategy<Value = (i64, i64)> {
    (prop_oneof![-40i64..=-2, 2i64..=40], 1i64..=16)
}

fn to_f64(v: &[(i64, i64)]) -> Vec<f64> {
    v.iter().map(|&(n, d)| n as f64 / d as f64).collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_matches_central_difference(
        which in 0usize..9,
        axis in 0usize..3,
        order in 0u32..3,
        xi in prop::collection::vec(rational(), 3),
    ) {
        let (_, t) = &tables()[which];
        let dim = t.dim();
        let axis = axis % dim;
        let x = to_f64(&xi[..dim]);
        let f = t.derive(axis, order).unwrap();
        let df = t.derive(axis, order + 1).unwrap();
        let h = 1e-5;
        let (mut a, mut b) = (x.clone(), x.clone());
        a[axis] += h;
        b[axis] -= h;
        let fd = (f.eval(&a).unwrap() - f.eval(&b).unwrap()) / (2.0 * h);
        let exact = df.eval(&x).unwrap();
        // Floor on the scale of the derivative so zeros of ∂R do not blow up the ratio.
        let scale = exact.abs().max(f.eval(&x).unwrap().abs() / norm(&x)).max(1e-300);
        prop_assert!((fd - exact).abs() <= 1e-6 * scale, "fd {fd:e} exact {exact:e}");
    }

    #[test]
    fn float_evaluation_matches_exact(
        which in 0usize..9,
        axis in 0usize..3,
        order in 0u32..4,
        xi in prop::collection::vec(rational(), 3),
    ) {
        let (_, t) = &tables()[which];
        let dim = t.dim();
        let f = t.derive(axis % dim, order).unwrap();
        let q: Vec<BigRational> = xi[..dim]
            .iter()
            .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
            .collect();
        let exact = gkp_core::symbol::rational_to_f64(&f.eval_exact(&q).unwrap());
        let float = f.eval(&to_f64(&xi[..dim])).unwrap();
        prop_assert!((exact - float).abs() <= 1e-12 * exact.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn json_round_trip(which in 0usize..9, axis in 0usize..3, order in 0u32..4) {
        let (_, t) = &tables()[which];
        let f = t.derive(axis % t.dim(), order).unwrap();
        let back = KernelSymbol::from_json(&f.to_json()).unwrap();
        prop_assert_eq!(&back, &*f);
    }

    #[test]
    fn polynomial_arithmetic_keeps_sparse_form(
        a in prop::collection::vec((0u32..4, 0u32..4, -5i64..=5), 0..6),
        b in prop::collection::vec((0u32..4, 0u32..4, -5i64..=5), 0..6),
    ) {
        let build = |t: &[(u32, u32, i64)]| {
            MultiIndexPoly::from_terms(
                2,
                t.iter().map(|&(i, j, c)| (vec![i, j], BigRational::from_integer(BigInt::from(c)))),
            )
            .unwrap()
        };
        let (pa, pb) = (build(&a), build(&b));
        for p in [&pa + &pb, &pa - &pb, &pa * &pb] {
            prop_assert!(p.terms().all(|(_, c)| *c != BigRational::from_integer(BigInt::from(0))));
        }
        let s = &pa + &pb;
        if let Some(d) = s.degree() {
            prop_assert!(d <= pa.degree().unwrap_or(0).max(pb.degree().unwrap_or(0)));
        }
        prop_assert!((&s - &pb) == pa);
        if !pa.is_zero() && !pb.is_zero() {
            prop_assert_eq!((&pa * &pb).degree(), Some(pa.degree().unwrap() + pb.degree().unwrap()));
        }
    }
}

#[test]
fn numerators_have_lowest_degree_at_least_order_plus_degree() {
    for (d, t) in tables() {
        let total: u32 = d.iter().sum();
        for axis in 0..t.dim() {
            for order in 0..=4 {
                let f = t.derive(axis, order).unwrap();
                assert_eq!(f.denom_power(), order + 1);
                if let Some(m) = f.numerator().min_degree() {
                    assert!(m >= order + total, "d = {d:?}, axis {axis}, order {order}: lowest degree {m}");
                }
            }
        }
    }
}

fn unit_ball_samples(rng: &mut ChaCha8Rng, dim: usize, n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&x);
        if r > 0.0 && r < 1.0 {
            out.push(x);
        }
    }
    out
}

#[test]
fn numerator_envelope_is_bounded_in_the_unit_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (d, t) in tables() {
        let total: u32 = d.iter().sum();
        let dim = t.dim();
        let first = unit_ball_samples(&mut rng, dim, 10_000);
        let second = unit_ball_samples(&mut rng, dim, 10_000);
        for axis in 0..dim {
            for order in 0..=3 {
                let p = t.derive(axis, order).unwrap().float_numerator().clone();
                let ratio = |s: &[Vec<f64>]| {
                    s.iter()
                        .map(|x| p.eval(x).abs() / norm(x).powi((order + total) as i32))
                        .fold(0.0, f64::max)
                };
                let (a, b) = (ratio(&first), ratio(&second));
                assert!(a.is_finite() && b <= 1.5 * a, "d = {d:?}, axis {axis}, order {order}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn ray_slopes_near_the_origin() {
    for dim in [2usize, 3] {
        let t = DerivativeTable::new(NamedKernel::K0.symbol(dim).unwrap());
        let mut u = vec![0.6, 0.8];
        if dim == 3 {
            u = vec![0.6, 0.48, 0.64];
        }
        for axis in 0..dim {
            for order in 0..=3u32 {
                let f = t.derive(axis, order).unwrap();
                let ts: Vec<f64> = (0..9).map(|i| 10f64.powf(-4.0 + 0.25 * i as f64)).collect();
                let pts: Vec<(f64, f64)> = ts
                    .iter()
                    .map(|&s| {
                        let x: Vec<f64> = u.iter().map(|c| c * s).collect();
                        (s.ln(), f.eval(&x).unwrap().abs().ln())
                    })
                    .collect();
                let n = pts.len() as f64;
                let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
                let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
                let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
                    / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
                let want = -(order as f64 + 2.0 - 2.0);
                assert!((slope - want).abs() < 0.05, "N = {dim}, axis {axis}, order {order}: slope {slope}");
            }
        }
    }
}

#[test]
fn tables_are_shared_across_threads() {
    let t = DerivativeTable::new(NamedKernel::K0.symbol(3).unwrap());
    let from_threads: Vec<KernelSymbol> = std::thread::scope(|s| {
        let hs: Vec<_> = (0..4).map(|_| s.spawn(|| (*t.derive(1, 3).unwrap()).clone())).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let fresh = NamedKernel::K0.symbol(3).unwrap().partial(1).unwrap().partial(1).unwrap().partial(1).unwrap();
    for s in from_threads {
        assert_eq!(s, fresh);
    }
}
