//! The ring of Fermat reals.
//!
//! Every value is stored in its unique decomposition
//! `st + c_1 dt_{a_1} + ... + c_N dt_{a_N}` with `a_1 > ... > a_N >= 1`.
//! The basic infinitesimals multiply as `dt_a * dt_b = dt_{ab/(a+b)}`, raise
//! to powers as `(dt_a)^p = dt_{a/p}` and vanish for orders below one. Orders
//! are exact rationals so that every nilpotency decision is exact; the
//! coefficients are `f64`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact order of an infinitesimal term.
pub type Rational = BigRational;

const DEFAULT_COEFF_EPSILON: f64 = 1e-12;

static COEFF_EPSILON_BITS: AtomicU64 = AtomicU64::new(DEFAULT_COEFF_EPSILON.to_bits());

/// Magnitude below which coefficients are dropped during normalization and
/// standard parts are treated as zero by comparisons.
pub fn coeff_epsilon() -> f64 {
    f64::from_bits(COEFF_EPSILON_BITS.load(AtomicOrdering::Relaxed))
}

/// Replaces the process-wide coefficient threshold. Values computed earlier
/// keep the normalization they received.
pub fn set_coeff_epsilon(eps: f64) {
    assert!(eps >= 0.0 && eps.is_finite(), "coefficient epsilon must be finite and >= 0");
    COEFF_EPSILON_BITS.store(eps.to_bits(), AtomicOrdering::Relaxed);
}

/// Builds the rational `num/den`.
pub fn rational(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn one() -> Rational {
    Rational::one()
}

/// `1/a + 1/b <= 1`, i.e. the product `dt_a * dt_b` survives.
fn product_survives(a: &Rational, b: &Rational) -> bool {
    a.recip() + b.recip() <= one()
}

/// One infinitesimal term `coeff * dt_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub order: Rational,
    pub coeff: f64,
}

/// An element of the ring of Fermat reals in normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct FermatReal {
    std: f64,
    terms: Vec<Term>,
}

impl Default for FermatReal {
    fn default() -> Self {
        Self::zero()
    }
}

impl FermatReal {
    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    /// A standard real.
    pub fn real(std: f64) -> Self {
        FermatReal {
            std,
            terms: Vec::new(),
        }
    }

    /// The basic infinitesimal `dt_order`.
    pub fn dt(order: Rational) -> Self {
        Self::term(1.0, order)
    }

    /// `dt_{num/den}`.
    pub fn dt_q(num: i64, den: i64) -> Self {
        Self::dt(rational(num, den))
    }

    /// `coeff * dt_order`, normalized (so orders below one give zero).
    pub fn term(coeff: f64, order: Rational) -> Self {
        Self::normalize(0.0, [(order, coeff)])
    }

    /// Builds the unique decomposition from an arbitrary list of terms:
    /// orders below one vanish, equal orders merge, negligible coefficients
    /// are dropped and the result is sorted by decreasing order.
    pub fn normalize<I>(std: f64, raw_terms: I) -> Self
    where
        I: IntoIterator<Item = (Rational, f64)>,
    {
        let threshold = one();
        let mut acc: BTreeMap<Rational, f64> = BTreeMap::new();
        for (order, coeff) in raw_terms {
            if order < threshold {
                continue;
            }
            *acc.entry(order).or_insert(0.0) += coeff;
        }
        Self::from_map(std, acc)
    }

    fn from_map(std: f64, acc: BTreeMap<Rational, f64>) -> Self {
        let eps = coeff_epsilon();
        let terms = acc
            .into_iter()
            .rev()
            .filter(|(_, c)| c.abs() > eps)
            .map(|(order, coeff)| Term { order, coeff })
            .collect();
        FermatReal { std, terms }
    }

    /// Standard part `st(x)`.
    pub fn std(&self) -> f64 {
        self.std
    }

    /// Infinitesimal terms, strictly decreasing in order.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// `x - st(x)`.
    pub fn infinitesimal_part(&self) -> FermatReal {
        FermatReal {
            std: 0.0,
            terms: self.terms.clone(),
        }
    }

    pub fn is_standard(&self) -> bool {
        self.terms.is_empty()
    }

    /// Standard part within `coeff_epsilon` of zero.
    pub fn is_infinitesimal(&self) -> bool {
        self.std.abs() <= coeff_epsilon()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.is_infinitesimal()
    }

    /// `ω(x)`: the leading order, or zero for a standard real.
    pub fn order(&self) -> Rational {
        self.terms
            .first()
            .map(|t| t.order.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// The `i`-th order, 1-based.
    pub fn order_i(&self, i: usize) -> Result<Rational> {
        self.term_at(i).map(|t| t.order.clone())
    }

    /// The `i`-th standard part (coefficient), 1-based.
    pub fn std_part_i(&self, i: usize) -> Result<f64> {
        self.term_at(i).map(|t| t.coeff)
    }

    fn term_at(&self, i: usize) -> Result<&Term> {
        if i == 0 || i > self.terms.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.terms.len(),
            });
        }
        Ok(&self.terms[i - 1])
    }

    pub fn scale(&self, factor: f64) -> FermatReal {
        let eps = coeff_epsilon();
        FermatReal {
            std: self.std * factor,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    order: t.order.clone(),
                    coeff: t.coeff * factor,
                })
                .filter(|t| t.coeff.abs() > eps)
                .collect(),
        }
    }

    fn add_ref(&self, other: &FermatReal) -> FermatReal {
        let mut acc: BTreeMap<Rational, f64> = BTreeMap::new();
        for t in self.terms.iter().chain(&other.terms) {
            *acc.entry(t.order.clone()).or_insert(0.0) += t.coeff;
        }
        Self::from_map(self.std + other.std, acc)
    }

    fn mul_ref(&self, other: &FermatReal) -> FermatReal {
        let mut acc: BTreeMap<Rational, f64> = BTreeMap::new();
        for t in &self.terms {
            *acc.entry(t.order.clone()).or_insert(0.0) += t.coeff * other.std;
        }
        for t in &other.terms {
            *acc.entry(t.order.clone()).or_insert(0.0) += t.coeff * self.std;
        }
        for a in &self.terms {
            for b in &other.terms {
                // terms are sorted descending: once a product vanishes, all
                // later `b` (smaller orders) vanish too
                if !product_survives(&a.order, &b.order) {
                    break;
                }
                let order = &a.order * &b.order / (&a.order + &b.order);
                *acc.entry(order).or_insert(0.0) += a.coeff * b.coeff;
            }
        }
        Self::from_map(self.std * other.std, acc)
    }

    /// Natural power by repeated squaring.
    pub fn powi(&self, n: u32) -> FermatReal {
        let mut result = FermatReal::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `x^p` for a rational exponent. Integer exponents work for any `x`;
    /// non-integer exponents `p >= 1` only for a single term `c dt_a` with
    /// `c >= 0`, giving `c^p dt_{a/p}`.
    pub fn pow(&self, p: &Rational) -> Result<FermatReal> {
        if p.is_integer() {
            if p.is_negative() {
                return Err(Error::InvalidExponent(p.to_string()));
            }
            let n = p
                .to_integer()
                .to_u32()
                .ok_or_else(|| Error::InvalidExponent(p.to_string()))?;
            return Ok(self.powi(n));
        }
        if *p < one() {
            return Err(Error::InvalidExponent(p.to_string()));
        }
        if self.std != 0.0 || self.terms.len() > 1 {
            return Err(Error::NonIntegerPowerOfSum);
        }
        let Some(t) = self.terms.first() else {
            return Ok(FermatReal::zero());
        };
        if t.coeff < 0.0 {
            return Err(Error::NegativeBase);
        }
        let exponent = p.to_f64().unwrap_or(f64::NAN);
        Ok(FermatReal::term(t.coeff.powf(exponent), &t.order / p))
    }

    /// Total order, decided on the decomposition of `self - other`.
    pub fn compare(&self, other: &FermatReal) -> Ordering {
        (self - other).sign()
    }

    /// Sign of the value: standard part first, then the leading coefficient.
    pub fn sign(&self) -> Ordering {
        if self.std.abs() > coeff_epsilon() {
            return self.std.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
        }
        match self.terms.first() {
            Some(t) => t.coeff.partial_cmp(&0.0).unwrap_or(Ordering::Equal),
            None => Ordering::Equal,
        }
    }

    pub fn lt(&self, other: &FermatReal) -> bool {
        self.compare(other) == Ordering::Less
    }

    pub fn le(&self, other: &FermatReal) -> bool {
        self.compare(other) != Ordering::Greater
    }

    pub fn max<'a>(&'a self, other: &'a FermatReal) -> &'a FermatReal {
        if self.compare(other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn min<'a>(&'a self, other: &'a FermatReal) -> &'a FermatReal {
        if self.compare(other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// `|x|` with respect to the total order.
    pub fn abs(&self) -> FermatReal {
        if self.sign() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// `x^k = 0`. For an infinitesimal this holds iff `ω(x) < k`; a value with
    /// nonzero standard part is never nilpotent.
    pub fn is_nilpotent_power_zero(&self, k: u32) -> bool {
        if !self.is_infinitesimal() {
            return false;
        }
        self.order() < Rational::from_integer(BigInt::from(k))
    }

    /// Membership in the ideal `D_k = { x : st(x) = 0, ω(x) < k + 1 }`.
    pub fn in_dk(&self, k: &IdealIndex) -> bool {
        if !self.is_infinitesimal() {
            return false;
        }
        match k {
            IdealIndex::Infinite => true,
            IdealIndex::Finite(k) => self.order() < k + one(),
        }
    }

    /// Multiplicative inverse, the Taylor lift of `t -> 1/t`:
    /// `1/(s + h) = sum_{n <= ⌊ω(h)⌋} (-1)^n h^n / s^{n+1}`.
    pub fn invert(&self) -> Result<FermatReal> {
        if !(self.std.abs() > coeff_epsilon()) {
            return Err(Error::NotInvertible);
        }
        let s = self.std;
        let h = self.infinitesimal_part();
        let k = truncation_order(&h);
        let mut result = FermatReal::real(1.0 / s);
        let mut h_pow = FermatReal::one();
        let mut factor = 1.0 / s;
        for _ in 1..=k {
            h_pow = &h_pow * &h;
            if h_pow.is_zero() {
                break;
            }
            factor = -factor / s;
            result = &result + &h_pow.scale(factor);
        }
        Ok(result)
    }

    /// `self / other`, defined when `st(other) != 0`.
    pub fn checked_div(&self, other: &FermatReal) -> Result<FermatReal> {
        Ok(self * &other.invert()?)
    }
}

/// Index of the ideal `D_k`: a rational `k >= 0` or infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum IdealIndex {
    Finite(Rational),
    Infinite,
}

impl IdealIndex {
    pub fn nat(k: u32) -> Self {
        IdealIndex::Finite(Rational::from_integer(BigInt::from(k)))
    }
}

/// `⌊ω(h)⌋`: the smallest `k` with `h ∈ D_k`, so `h^{k+1} = 0`.
pub fn truncation_order(h: &FermatReal) -> u32 {
    h.order().floor().to_integer().to_u32().unwrap_or(u32::MAX)
}

/// Decides `h_1^{i_1} ... h_n^{i_n} = 0` via `sum i_k / ω(h_k) > 1`, exactly.
pub fn product_vanishes(factors: &[(FermatReal, u32)]) -> Result<bool> {
    let mut total = Rational::zero();
    for (h, exponent) in factors {
        if !h.is_infinitesimal() || h.is_zero() {
            return Err(Error::NotInfinitesimal);
        }
        total += Rational::from_integer(BigInt::from(*exponent)) / h.order();
    }
    Ok(total > one())
}

/// A Fermat real or one of the two infinite symbols, used only as an
/// interval endpoint.
#[derive(Clone, Debug, PartialEq)]
pub enum FermatExt {
    NegInf,
    Finite(FermatReal),
    PosInf,
}

impl FermatExt {
    pub fn finite(&self) -> Option<&FermatReal> {
        match self {
            FermatExt::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn compare(&self, other: &FermatExt) -> Ordering {
        use FermatExt::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (Finite(a), Finite(b)) => a.compare(b),
        }
    }
}

impl From<FermatReal> for FermatExt {
    fn from(x: FermatReal) -> Self {
        FermatExt::Finite(x)
    }
}

impl From<f64> for FermatReal {
    fn from(x: f64) -> Self {
        FermatReal::real(x)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<'a, 'b> $trait<&'b FermatReal> for &'a FermatReal {
            type Output = FermatReal;
            fn $method(self, rhs: &'b FermatReal) -> FermatReal {
                $body(self, rhs)
            }
        }
        impl $trait<FermatReal> for FermatReal {
            type Output = FermatReal;
            fn $method(self, rhs: FermatReal) -> FermatReal {
                $body(&self, &rhs)
            }
        }
        impl<'b> $trait<&'b FermatReal> for FermatReal {
            type Output = FermatReal;
            fn $method(self, rhs: &'b FermatReal) -> FermatReal {
                $body(&self, rhs)
            }
        }
        impl<'a> $trait<FermatReal> for &'a FermatReal {
            type Output = FermatReal;
            fn $method(self, rhs: FermatReal) -> FermatReal {
                $body(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &FermatReal, b: &FermatReal| a.add_ref(b));
forward_binop!(Sub, sub, |a: &FermatReal, b: &FermatReal| a.add_ref(&-b));
forward_binop!(Mul, mul, |a: &FermatReal, b: &FermatReal| a.mul_ref(b));

impl Neg for &FermatReal {
    type Output = FermatReal;
    fn neg(self) -> FermatReal {
        FermatReal {
            std: -self.std,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    order: t.order.clone(),
                    coeff: -t.coeff,
                })
                .collect(),
        }
    }
}

impl Neg for FermatReal {
    type Output = FermatReal;
    fn neg(self) -> FermatReal {
        -&self
    }
}

impl Mul<f64> for &FermatReal {
    type Output = FermatReal;
    fn mul(self, rhs: f64) -> FermatReal {
        self.scale(rhs)
    }
}

impl Mul<f64> for FermatReal {
    type Output = FermatReal;
    fn mul(self, rhs: f64) -> FermatReal {
        self.scale(rhs)
    }
}

impl std::iter::Sum for FermatReal {
    fn sum<I: Iterator<Item = FermatReal>>(iter: I) -> Self {
        iter.fold(FermatReal::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for FermatReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::literal::format_fermat(self))
    }
}

/// Formats an order as `p` or `p/q`.
pub fn format_order(order: &Rational) -> String {
    if order.is_integer() {
        order.numer().to_string()
    } else {
        format!("{}/{}", order.numer(), order.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dt(a: i64) -> FermatReal {
        FermatReal::dt_q(a, 1)
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(FermatReal::normalize(0.0, [(rational(1, 2), 5.0)]), FermatReal::zero());
        assert_eq!(
            FermatReal::normalize(2.0, [(rational(1, 1), 3.0), (rational(1, 1), -3.0)]),
            FermatReal::real(2.0)
        );
        let x = FermatReal::normalize(0.0, [(rational(1, 1), 1.0), (rational(3, 1), 2.0)]);
        assert_eq!(x.terms().len(), 2);
        assert_eq!(x.terms()[0], Term { order: rational(3, 1), coeff: 2.0 });
        assert_eq!(x.terms()[1], Term { order: rational(1, 1), coeff: 1.0 });
    }

    #[test]
    fn add_examples() {
        assert_eq!(&dt(1) + &dt(1), FermatReal::term(2.0, rational(1, 1)));
        let a = FermatReal::real(1.0) + dt(2);
        let b = FermatReal::real(-1.0) - dt(2);
        assert!((a + b).is_zero());
        let s = dt(3) + dt(1);
        assert_eq!(s.order_i(1).unwrap(), rational(3, 1));
        assert_eq!(s.order_i(2).unwrap(), rational(1, 1));
    }

    #[test]
    fn mul_examples() {
        assert_eq!(&dt(2) * &dt(2), dt(1));
        assert!((&dt(1) * &dt(1)).is_zero());
        let lhs = FermatReal::real(3.0) * (FermatReal::real(2.0) + dt(3)) * (FermatReal::real(1.0) + dt(1));
        let expected = FermatReal::normalize(6.0, [(rational(3, 1), 3.0), (rational(1, 1), 6.0)]);
        assert_eq!(lhs, expected);
    }

    #[test]
    fn pow_examples() {
        assert_eq!(dt(2).pow(&rational(4, 3)).unwrap(), FermatReal::dt_q(3, 2));
        let x = FermatReal::real(1.0) + dt(1);
        assert_eq!(x.pow(&rational(2, 1)).unwrap(), FermatReal::real(1.0) + FermatReal::term(2.0, rational(1, 1)));
        assert!(dt(3).powi(4).is_zero());
        assert_eq!(x.pow(&rational(3, 2)), Err(Error::NonIntegerPowerOfSum));
        assert_eq!(FermatReal::term(-1.0, rational(2, 1)).pow(&rational(3, 2)), Err(Error::NegativeBase));
        assert!(matches!(dt(2).pow(&rational(1, 2)), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn order_examples() {
        assert_eq!((dt(3) - dt(1) * 3.0).order(), rational(3, 1));
        assert_eq!(FermatReal::real(5.0).order(), Rational::zero());
        assert_eq!((dt(2) * dt(3)).order(), rational(6, 5));
        let x = dt(3) - dt(1) * 3.0;
        assert_eq!(x.std_part_i(2).unwrap(), -3.0);
        assert_eq!(x.order_i(3), Err(Error::IndexOutOfRange { index: 3, len: 2 }));
        assert!(x.order_i(0).is_err());
    }

    #[test]
    fn compare_examples() {
        assert_eq!((dt(3) - dt(1) * 3.0).compare(&dt(1)), Ordering::Greater);
        assert_eq!(dt(1).compare(&FermatReal::zero()), Ordering::Greater);
        assert_eq!(dt(2).compare(&dt(3)), Ordering::Less);
        let x = FermatReal::real(1.0) + dt(1);
        assert_eq!(x.compare(&x.clone()), Ordering::Equal);
        assert_eq!(FermatExt::NegInf.compare(&FermatExt::Finite(x.clone())), Ordering::Less);
        assert_eq!(FermatExt::PosInf.compare(&FermatExt::PosInf), Ordering::Equal);
    }

    #[test]
    fn near_tie_standard_parts_fall_through() {
        let x = FermatReal::real(1.0 + 1e-14) - dt(1);
        let y = FermatReal::real(1.0);
        assert_eq!(x.compare(&y), Ordering::Less);
    }

    #[test]
    fn ideal_membership() {
        assert!(dt(1).in_dk(&IdealIndex::nat(1)));
        assert!(!dt(2).in_dk(&IdealIndex::nat(1)));
        assert!(FermatReal::dt_q(3, 2).is_nilpotent_power_zero(2));
        assert!(!FermatReal::real(1.0).in_dk(&IdealIndex::Infinite));
        assert!(dt(7).in_dk(&IdealIndex::Infinite));
        assert!(!FermatReal::dt_q(5, 2).in_dk(&IdealIndex::Finite(rational(3, 2))));
        assert!(FermatReal::dt_q(5, 2).in_dk(&IdealIndex::Finite(rational(7, 4))));
    }

    #[test]
    fn product_vanishing_examples() {
        assert!(!product_vanishes(&[(dt(2), 1), (dt(2), 1)]).unwrap());
        assert!(product_vanishes(&[(dt(1), 1), (dt(1), 1)]).unwrap());
        assert!(product_vanishes(&[(dt(3), 1), (dt(3), 1), (dt(3), 1), (dt(3), 1)]).unwrap());
        assert_eq!(product_vanishes(&[(FermatReal::real(1.0), 1)]), Err(Error::NotInfinitesimal));
        assert_eq!(product_vanishes(&[(FermatReal::zero(), 1)]), Err(Error::NotInfinitesimal));
    }

    #[test]
    fn invert_examples() {
        let x = FermatReal::real(1.0) + dt(1);
        assert_eq!(x.invert().unwrap(), FermatReal::real(1.0) - dt(1));
        assert_eq!(FermatReal::real(2.0).invert().unwrap(), FermatReal::real(0.5));
        let y = FermatReal::real(1.0) + dt(2);
        // 1/(1+h) = 1 - h + h^2 with h^2 = dt, h^3 = 0
        let expected = FermatReal::real(1.0) - dt(2) + dt(1);
        assert_eq!(y.invert().unwrap(), expected);
        assert_eq!(&y * &expected, FermatReal::one());
        assert_eq!(dt(1).invert(), Err(Error::NotInvertible));
    }
}
