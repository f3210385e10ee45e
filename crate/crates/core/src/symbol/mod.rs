//! Rational Fourier symbols `P(ξ) / D(ξ)^q` and their exact partial derivatives.
//!
//! Axes are 0-based: axis 0 is the propagation direction ξ₁.

mod poly;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use poly::{rational_to_f64, FloatPoly, MultiIndexPoly};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("negative exponent {value} on axis {axis}")]
    NegativeExponent { axis: usize, value: i64 },
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("symbol is singular at the origin")]
    SingularPoint,
    #[error("malformed symbol document: {0}")]
    Parse(String),
}

/// The denominator base `D(ξ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Denominator {
    /// |ξ|² + ξ₁⁴, the dispersion of the solitary-wave kernels.
    Anisotropic,
    /// |ξ|², used for the composed Riesz symbol ξ₁²/|ξ|².
    Isotropic,
}

impl Denominator {
    pub fn eval(self, xi: &[f64]) -> f64 {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        match self {
            Denominator::Anisotropic => r2 + xi[0].powi(4),
            Denominator::Isotropic => r2,
        }
    }

    fn eval_exact(self, xi: &[BigRational]) -> BigRational {
        let mut r2 = BigRational::zero();
        for v in xi {
            r2 += v * v;
        }
        match self {
            Denominator::Anisotropic => r2 + num_traits::pow(xi[0].clone(), 4),
            Denominator::Isotropic => r2,
        }
    }

    fn poly(self, dim: usize) -> MultiIndexPoly {
        let mut d = MultiIndexPoly::zero(dim);
        for j in 0..dim {
            let mut e = vec![0; dim];
            e[j] = 2;
            d = &d + &MultiIndexPoly::monomial(dim, e, BigRational::one());
        }
        if self == Denominator::Anisotropic {
            let mut e = vec![0; dim];
            e[0] = 4;
            d = &d + &MultiIndexPoly::monomial(dim, e, BigRational::one());
        }
        d
    }

    /// ∂_axis D.
    fn partial(self, dim: usize, axis: usize) -> MultiIndexPoly {
        let two = MultiIndexPoly::coordinate(dim, axis, 2);
        if self == Denominator::Anisotropic && axis == 0 {
            let mut e = vec![0; dim];
            e[0] = 3;
            &two + &MultiIndexPoly::monomial(dim, e, BigRational::from_integer(BigInt::from(4)))
        } else {
            two
        }
    }

    /// D(ρω) = ρ²(1 + cρ²); returns c.
    pub fn ray_quartic(self, omega: &[f64]) -> f64 {
        match self {
            Denominator::Anisotropic => omega[0].powi(4),
            Denominator::Isotropic => 0.0,
        }
    }
}

/// A symbol `numerator(ξ) / D(ξ)^denom_power`.
#[derive(Clone, Debug)]
pub struct KernelSymbol {
    dim: usize,
    numerator: MultiIndexPoly,
    denom_power: u32,
    denominator: Denominator,
    float_num: FloatPoly,
}

impl PartialEq for KernelSymbol {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.denom_power == other.denom_power
            && self.denominator == other.denominator
            && self.numerator == other.numerator
    }
}

impl KernelSymbol {
    pub fn new(
        numerator: MultiIndexPoly,
        denom_power: u32,
        denominator: Denominator,
    ) -> Result<Self, SymbolError> {
        let dim = numerator.dim();
        if dim < 2 {
            return Err(SymbolError::DimensionTooSmall(dim));
        }
        if denom_power == 0 {
            return Err(SymbolError::Parse("denom_power must be positive".into()));
        }
        let float_num = numerator.to_float();
        Ok(KernelSymbol {
            dim,
            numerator,
            denom_power,
            denominator,
            float_num,
        })
    }

    /// `Π ξ_j^{d_j} / (|ξ|² + ξ₁⁴)`.
    pub fn monomial(dim: usize, d: &[i64]) -> Result<Self, SymbolError> {
        if dim < 2 {
            return Err(SymbolError::DimensionTooSmall(dim));
        }
        if d.len() != dim {
            return Err(SymbolError::DimensionMismatch {
                expected: dim,
                found: d.len(),
            });
        }
        let mut exps = Vec::with_capacity(dim);
        for (axis, &value) in d.iter().enumerate() {
            if value < 0 {
                return Err(SymbolError::NegativeExponent { axis, value });
            }
            exps.push(value as u32);
        }
        let num = MultiIndexPoly::monomial(dim, exps, BigRational::one());
        Self::new(num, 1, Denominator::Anisotropic)
    }

    /// The composed Riesz symbol ξ₁²/|ξ|².
    pub fn riesz_11(dim: usize) -> Result<Self, SymbolError> {
        if dim < 2 {
            return Err(SymbolError::DimensionTooSmall(dim));
        }
        let mut e = vec![0; dim];
        e[0] = 2;
        Self::new(
            MultiIndexPoly::monomial(dim, e, BigRational::one()),
            1,
            Denominator::Isotropic,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn numerator(&self) -> &MultiIndexPoly {
        &self.numerator
    }

    pub fn float_numerator(&self) -> &FloatPoly {
        &self.float_num
    }

    pub fn denom_power(&self) -> u32 {
        self.denom_power
    }

    pub fn denominator(&self) -> Denominator {
        self.denominator
    }

    pub fn eval(&self, xi: &[f64]) -> Result<f64, SymbolError> {
        if xi.len() != self.dim {
            return Err(SymbolError::DimensionMismatch {
                expected: self.dim,
                found: xi.len(),
            });
        }
        if xi.iter().all(|&v| v == 0.0) {
            return Err(SymbolError::SingularPoint);
        }
        Ok(self.eval_unchecked(xi))
    }

    /// Evaluation without argument checks; the caller guarantees ξ ≠ 0.
    #[inline]
    pub fn eval_unchecked(&self, xi: &[f64]) -> f64 {
        self.float_num.eval(xi) / self.denominator.eval(xi).powi(self.denom_power as i32)
    }

    pub fn eval_exact(&self, xi: &[BigRational]) -> Result<BigRational, SymbolError> {
        if xi.len() != self.dim {
            return Err(SymbolError::DimensionMismatch {
                expected: self.dim,
                found: xi.len(),
            });
        }
        let den = self.denominator.eval_exact(xi);
        if den.is_zero() {
            return Err(SymbolError::SingularPoint);
        }
        Ok(self.numerator.eval_exact(xi) / num_traits::pow(den, self.denom_power as usize))
    }

    /// One derivative along `axis`: (D ∂P − q (∂D) P) / D^{q+1}.
    pub fn partial(&self, axis: usize) -> Result<Self, SymbolError> {
        if axis >= self.dim {
            return Err(SymbolError::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        let d = self.denominator.poly(self.dim);
        let dd = self.denominator.partial(self.dim, axis);
        let q = BigRational::from_integer(BigInt::from(self.denom_power));
        let lhs = &d * &self.numerator.partial(axis);
        let rhs = (&dd * &self.numerator).scale(&q);
        Self::new(&lhs - &rhs, self.denom_power + 1, self.denominator)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SymbolDoc::from(self)).expect("symbol serialization")
    }

    pub fn from_json(s: &str) -> Result<Self, SymbolError> {
        let doc: SymbolDoc = serde_json::from_str(s).map_err(|e| SymbolError::Parse(e.to_string()))?;
        doc.try_into()
    }
}

#[derive(Serialize, Deserialize)]
struct TermDoc {
    exps: Vec<u32>,
    num: String,
    den: String,
}

#[derive(Serialize, Deserialize)]
struct SymbolDoc {
    dim: usize,
    denom_power: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    denominator: Option<Denominator>,
    terms: Vec<TermDoc>,
}

impl From<&KernelSymbol> for SymbolDoc {
    fn from(s: &KernelSymbol) -> Self {
        SymbolDoc {
            dim: s.dim,
            denom_power: s.denom_power,
            denominator: match s.denominator {
                Denominator::Anisotropic => None,
                d => Some(d),
            },
            terms: s
                .numerator
                .terms()
                .map(|(e, c)| TermDoc {
                    exps: e.clone(),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }
}

impl TryFrom<SymbolDoc> for KernelSymbol {
    type Error = SymbolError;
    fn try_from(doc: SymbolDoc) -> Result<Self, SymbolError> {
        let mut terms = Vec::with_capacity(doc.terms.len());
        for t in doc.terms {
            let n: BigInt = t.num.parse().map_err(|_| SymbolError::Parse(format!("bad numerator {:?}", t.num)))?;
            let d: BigInt = t.den.parse().map_err(|_| SymbolError::Parse(format!("bad denominator {:?}", t.den)))?;
            if d.is_zero() {
                return Err(SymbolError::Parse("zero denominator".into()));
            }
            terms.push((t.exps, BigRational::new(n, d)));
        }
        let num = MultiIndexPoly::from_terms(doc.dim, terms)?;
        KernelSymbol::new(num, doc.denom_power, doc.denominator.unwrap_or(Denominator::Anisotropic))
    }
}

/// Cache of ∂_j^p R for a fixed base symbol. Safe to share across threads.
#[derive(Debug)]
pub struct DerivativeTable {
    base: Arc<KernelSymbol>,
    entries: RwLock<HashMap<(usize, u32), Arc<KernelSymbol>>>,
}

impl DerivativeTable {
    pub fn new(base: KernelSymbol) -> Self {
        DerivativeTable {
            base: Arc::new(base),
            entries: RwLock::new(HashMap::new()),
        }
    }

    pub fn base(&self) -> &KernelSymbol {
        &self.base
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    /// ∂_axis^order R, computed by repeated application of the recursion and cached.
    pub fn derive(&self, axis: usize, order: u32) -> Result<Arc<KernelSymbol>, SymbolError> {
        if axis >= self.base.dim {
            return Err(SymbolError::AxisOutOfRange {
                axis,
                dim: self.base.dim,
            });
        }
        if order == 0 {
            return Ok(self.base.clone());
        }
        if let Some(s) = self.entries.read().unwrap().get(&(axis, order)) {
            return Ok(s.clone());
        }
        let (mut k, mut cur) = {
            let map = self.entries.read().unwrap();
            (1..order)
                .rev()
                .find_map(|k| map.get(&(axis, k)).map(|s| (k, s.clone())))
                .unwrap_or((0, self.base.clone()))
        };
        let mut fresh = Vec::new();
        while k < order {
            cur = Arc::new(cur.partial(axis)?);
            k += 1;
            fresh.push((k, cur.clone()));
        }
        let mut map = self.entries.write().unwrap();
        for (k, s) in fresh {
            map.entry((axis, k)).or_insert(s);
        }
        Ok(map[&(axis, order)].clone())
    }
}

/// The kernels entering the convolution form of the solitary-wave equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedKernel {
    H0,
    K0,
    /// K_k for 0-based axis k: K₀'s exponents with d_k incremented.
    K(usize),
}

impl NamedKernel {
    pub fn exponents(self, dim: usize) -> Vec<u32> {
        let mut d = vec![0; dim];
        match self {
            NamedKernel::H0 => d[0] = 1,
            NamedKernel::K0 => d[0] = 2,
            NamedKernel::K(k) => {
                d[0] = 2;
                d[k] += 1;
            }
        }
        d
    }

    pub fn symbol(self, dim: usize) -> Result<KernelSymbol, SymbolError> {
        if let NamedKernel::K(k) = self {
            if k >= dim {
                return Err(SymbolError::AxisOutOfRange { axis: k, dim });
            }
        }
        let d: Vec<i64> = self.exponents(dim.max(2)).iter().map(|&v| v as i64).collect();
        KernelSymbol::monomial(dim, &d)
    }

    /// Parses `H0`, `K0`, `K1`, `K2`, … with K_k indexed from 1 as in the usual notation.
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "H0" | "h0" => Some(NamedKernel::H0),
            "K0" | "k0" => Some(NamedKernel::K0),
            t if t.len() > 1 && (t.starts_with('K') || t.starts_with('k')) => {
                let k: usize = t[1..].parse().ok()?;
                (k >= 1).then(|| NamedKernel::K(k - 1))
            }
            _ => None,
        }
    }

    pub fn label(self) -> String {
        match self {
            NamedKernel::H0 => "H0".into(),
            NamedKernel::K0 => "K0".into(),
            NamedKernel::K(k) => format!("K{}", k + 1),
        }
    }
}

/// Singularity and integrability exponents of ∂_j^p R for a monomial numerator.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentRecord {
    /// α with |∂_j^p R(ξ)| ≲ |ξ|^{-α} near the origin; α = p + 2 − d.
    pub origin_blowup: i64,
    /// L^q(B(0,1)^c) holds for q strictly above this value, when the integrability condition holds.
    pub lq_threshold: Option<Ratio<i64>>,
    /// Whether the derivative is bounded outside the unit ball.
    pub bounded_at_infinity: bool,
}

pub fn predicted_exponents(d: &[u32], axis: usize, order: u32) -> Result<ExponentRecord, SymbolError> {
    let n = d.len();
    if n < 2 {
        return Err(SymbolError::DimensionTooSmall(n));
    }
    if axis >= n {
        return Err(SymbolError::AxisOutOfRange { axis, dim: n });
    }
    let d1 = d[0] as i64;
    let dperp: i64 = d[1..].iter().map(|&v| v as i64).sum();
    let p = order as i64;
    let total = d1 + dperp;
    // Thresholds compared in doubled units so that d₁/2 stays integral.
    let (twice_cond, gap) = if axis == 0 {
        (2 * (p - (d1 + 2 * dperp - 4)), p + 4 - d1 - 2 * dperp)
    } else {
        (2 * p - (d1 + 2 * dperp - 4), 2 * p + 4 - d1 - 2 * dperp)
    };
    let lq_threshold = (twice_cond > 0 && gap > 0).then(|| Ratio::new(2 * n as i64 - 1, gap));
    Ok(ExponentRecord {
        origin_blowup: p + 2 - total,
        lq_threshold,
        bounded_at_infinity: twice_cond >= 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn k0() -> DerivativeTable {
        DerivativeTable::new(NamedKernel::K0.symbol(2).unwrap())
    }

    #[test]
    fn named_symbols() {
        let s = KernelSymbol::monomial(2, &[2, 0]).unwrap();
        assert_eq!(s.eval(&[1.0, 0.0]).unwrap(), 0.5);
        let h = KernelSymbol::monomial(2, &[1, 0]).unwrap();
        assert_eq!(h.eval(&[0.0, 1.0]).unwrap(), 0.0);
        let c = KernelSymbol::monomial(3, &[0, 0, 0]).unwrap();
        assert_eq!(c.numerator().to_string(), "1");
        assert_eq!(NamedKernel::K(1).exponents(2), vec![2, 1]);
        assert_eq!(NamedKernel::K(0).exponents(3), vec![3, 0, 0]);
    }

    #[test]
    fn monomial_rejects_bad_input() {
        assert_eq!(
            KernelSymbol::monomial(1, &[1]).unwrap_err(),
            SymbolError::DimensionTooSmall(1)
        );
        assert!(matches!(
            KernelSymbol::monomial(2, &[2, -1]),
            Err(SymbolError::NegativeExponent { axis: 1, value: -1 })
        ));
    }

    #[test]
    fn first_derivatives_of_k0() {
        let t = k0();
        let d1 = t.derive(0, 1).unwrap();
        let want = MultiIndexPoly::from_terms(2, vec![(vec![1, 2], q(2, 1)), (vec![5, 0], q(-2, 1))]).unwrap();
        assert_eq!(d1.numerator(), &want);
        assert_eq!(d1.denom_power(), 2);
        assert_eq!(d1.eval(&[1.0, 0.0]).unwrap(), -0.5);

        let d2 = t.derive(1, 1).unwrap();
        let want = MultiIndexPoly::monomial(2, vec![2, 1], q(-2, 1));
        assert_eq!(d2.numerator(), &want);
        assert_eq!(d2.denom_power(), 2);
        assert_eq!(*t.derive(1, 0).unwrap(), *t.base());
    }

    #[test]
    fn singular_point_is_rejected() {
        let s = NamedKernel::K0.symbol(2).unwrap();
        assert_eq!(s.eval(&[0.0, 0.0]), Err(SymbolError::SingularPoint));
        assert_eq!(s.eval_exact(&[q(0, 1), q(0, 1)]), Err(SymbolError::SingularPoint));
    }

    #[test]
    fn table_is_consistent_with_one_step_recursion() {
        let t = DerivativeTable::new(NamedKernel::K(1).symbol(3).unwrap());
        let d3 = t.derive(0, 3).unwrap();
        let d4 = t.derive(0, 4).unwrap();
        assert_eq!(*d4, d3.partial(0).unwrap());
        assert_eq!(d4.denom_power(), 5);
    }

    #[test]
    fn exponent_records() {
        let r = predicted_exponents(&[2, 0], 0, 0).unwrap();
        assert_eq!(r.origin_blowup, 0);
        assert_eq!(r.lq_threshold, Some(Ratio::new(3, 2)));
        let r = predicted_exponents(&[2, 0], 0, 2).unwrap();
        assert_eq!(r.origin_blowup, 2);
        let r = predicted_exponents(&[1, 0], 1, 0).unwrap();
        assert_eq!(r.lq_threshold, Some(Ratio::new(1, 1)));
        assert!(r.bounded_at_infinity);
        // d₁ + 2d⊥ − 4 = 0: boundedness holds at p = 0 but integrability needs p ≥ 1.
        let r = predicted_exponents(&[2, 1], 0, 0).unwrap();
        assert!(r.bounded_at_infinity);
        assert_eq!(r.lq_threshold, None);
    }

    #[test]
    fn json_round_trip_keeps_denominator_kind() {
        let r = KernelSymbol::riesz_11(3).unwrap();
        let back = KernelSymbol::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let s = k0().derive(0, 3).unwrap();
        let j = s.to_json();
        assert!(!j.contains("denominator"));
        assert_eq!(KernelSymbol::from_json(&j).unwrap(), *s);
        assert!(KernelSymbol::from_json("{\"dim\":2}").is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!(NamedKernel::parse("K2"), Some(NamedKernel::K(1)));
        assert_eq!(NamedKernel::parse("H0"), Some(NamedKernel::H0));
        assert_eq!(NamedKernel::parse("K"), None);
        assert_eq!(NamedKernel::K(0).label(), "K1");
    }
}
