//! Exact scalars in towers of quadratic extensions of the rationals, with a
//! certified dyadic interval fallback.

mod dyadic;
mod interval;
mod json;
mod tower;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use dyadic::{Dyadic, Round};
pub use interval::{CertInterval, Enclosure};
pub use tower::{Level, Tower, TowerElement};

/// Default bound on the number of adjoined square roots.
pub const DEFAULT_MAX_DEPTH: usize = 3;
/// Default working precision for interval evaluation.
pub const DEFAULT_PRECISION: u32 = 256;
/// Precision ceiling for automatic refinement.
pub const MAX_PRECISION: u32 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("divisor interval contains zero")]
    UncertifiableDivisor,
    #[error("square root of a negative number")]
    NegativeRadicand,
    #[error("tower depth limit {0} reached")]
    TowerDepthExceeded(usize),
    #[error("sign undecided at {0} bits")]
    Undecided(u32),
    #[error("value is not real")]
    NotReal,
    #[error("malformed scalar: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

#[derive(Clone, Debug)]
pub enum Scalar {
    Rational(BigRational),
    Tower(TowerElement),
    Interval(Enclosure),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(BigRational::one())
    }

    pub fn int(v: i64) -> Self {
        Scalar::Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_tower(t: TowerElement) -> Self {
        match t.as_rational() {
            Some(q) => Scalar::Rational(q.clone()),
            None => Scalar::Tower(t),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Scalar::Interval(_))
    }

    /// Exact zero, or the degenerate interval `[0, 0]`.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Tower(t) => t.is_zero(),
            Scalar::Interval(e) => e.is_point_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Scalar::Rational(q) if q.is_one())
    }

    /// True when the value is provably different from zero.
    pub fn is_certainly_nonzero(&self) -> bool {
        match self {
            Scalar::Interval(e) => !e.contains_zero(),
            _ => !self.is_zero(),
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(q) => Some(q),
            _ => None,
        }
    }

    pub fn tower(&self) -> Option<&Arc<Tower>> {
        match self {
            Scalar::Tower(t) => Some(t.tower()),
            _ => None,
        }
    }

    /// Re-expresses an exact value over `tower` (which must contain it).
    pub fn in_tower(&self, tower: &Arc<Tower>) -> TowerElement {
        match self {
            Scalar::Rational(q) => TowerElement::from_rational(tower.clone(), q.clone()),
            Scalar::Tower(t) => t.with_tower(tower.clone()),
            Scalar::Interval(_) => panic!("interval has no tower representation"),
        }
    }

    pub fn enclosure(&self, prec: u32) -> Enclosure {
        match self {
            Scalar::Rational(q) => Enclosure::real(CertInterval::from_rational(q, prec)),
            Scalar::Tower(t) => t.enclosure(prec),
            Scalar::Interval(e) => e.clone(),
        }
    }

    fn binary(&self, other: &Scalar, op: Op) -> Scalar {
        use Scalar::*;
        match (self, other) {
            (Rational(a), Rational(b)) => Rational(match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
            }),
            (Interval(a), b) => {
                let b = b.enclosure(a.precision_bits());
                Interval(op.interval(a, &b))
            }
            (a, Interval(b)) => {
                let a = a.enclosure(b.precision_bits());
                Interval(op.interval(&a, b))
            }
            (Tower(a), Rational(b)) => match op {
                Op::Mul => Scalar::from_tower(a.scale(b)),
                _ => Scalar::from_tower(op.tower(a, &TowerElement::from_rational(a.tower().clone(), b.clone()))),
            },
            (Rational(a), Tower(b)) => match op {
                Op::Mul => Scalar::from_tower(b.scale(a)),
                _ => Scalar::from_tower(op.tower(&TowerElement::from_rational(b.tower().clone(), a.clone()), b)),
            },
            (Tower(a), Tower(b)) => Scalar::from_tower(op.tower(a, b)),
        }
    }

    pub fn inv(&self) -> Result<Scalar, ScalarError> {
        match self {
            Scalar::Rational(q) => {
                if q.is_zero() {
                    Err(ScalarError::DivisionByZero)
                } else {
                    Ok(Scalar::Rational(q.recip()))
                }
            }
            Scalar::Tower(t) => t.inv().map(Scalar::from_tower).ok_or(ScalarError::DivisionByZero),
            Scalar::Interval(e) => {
                if e.is_point_zero() {
                    Err(ScalarError::DivisionByZero)
                } else {
                    e.recip().map(Scalar::Interval).ok_or(ScalarError::UncertifiableDivisor)
                }
            }
        }
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        Ok(self * &other.inv()?)
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Rational(_) => self.clone(),
            Scalar::Tower(t) => Scalar::Tower(t.conj()),
            Scalar::Interval(e) => Scalar::Interval(e.conj()),
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            Scalar::Rational(_) => true,
            Scalar::Tower(t) => t.is_real(),
            Scalar::Interval(e) => e.im.is_none(),
        }
    }

    pub fn pow(&self, k: i64) -> Result<Scalar, ScalarError> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Scalar::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            e >>= 1;
            if e > 0 {
                b = &b * &b;
            }
        }
        Ok(acc)
    }

    /// Sign of a real value; towers refine interval evaluation up to `max_bits`.
    pub fn certified_sign(&self, max_bits: u32) -> Result<Sign, ScalarError> {
        match self {
            Scalar::Rational(q) => Ok(sign_of(q.numer().signum().try_into().unwrap_or(0))),
            Scalar::Tower(t) => {
                if !t.is_real() {
                    return Err(ScalarError::NotReal);
                }
                if t.is_zero() {
                    return Ok(Sign::Zero);
                }
                let mut p = 64;
                while p <= max_bits.max(64) {
                    if let Some(s) = t.enclosure(p).re.sign() {
                        return Ok(sign_of(s));
                    }
                    p *= 2;
                }
                Err(ScalarError::Undecided(max_bits))
            }
            Scalar::Interval(e) => {
                if e.im.is_some() {
                    return Err(ScalarError::NotReal);
                }
                e.re.sign().map(sign_of).ok_or(ScalarError::Undecided(e.re.precision_bits()))
            }
        }
    }

    /// Enclosure of width at most `2^(2 - bits)` in each component for exact input.
    pub fn to_interval(&self, bits: u32) -> Enclosure {
        let bits = bits.max(8);
        match self {
            Scalar::Rational(q) => {
                let mag = (q.numer().bits() as i64 - q.denom().bits() as i64).max(0) as u32;
                Enclosure::real(CertInterval::from_rational(q, bits + mag + 2))
            }
            Scalar::Tower(t) => {
                let mut p = bits + 16;
                loop {
                    let e = t.enclosure(p);
                    let ok = |i: &CertInterval| i.width().magnitude() <= 2 - bits as i64;
                    if ok(&e.re) && e.im.as_ref().map_or(true, ok) {
                        return e;
                    }
                    p *= 2;
                }
            }
            Scalar::Interval(e) => e.clone(),
        }
    }

    /// A square root inside the current tower, or one level higher.
    pub fn exact_sqrt_or_adjoin(&self, max_depth: usize) -> Result<Scalar, ScalarError> {
        match self {
            Scalar::Interval(e) => {
                if e.im.is_some() {
                    return Err(ScalarError::NotReal);
                }
                e.re.sqrt().map(|s| Scalar::Interval(Enclosure::real(s))).ok_or(ScalarError::NegativeRadicand)
            }
            _ => {
                if self.certified_sign(MAX_PRECISION)? == Sign::Negative {
                    return Err(ScalarError::NegativeRadicand);
                }
                self.sqrt_signed(max_depth)
            }
        }
    }

    /// Like [`Scalar::exact_sqrt_or_adjoin`] but a negative real input adjoins
    /// an imaginary root. Nonreal inputs must already have a root in their tower.
    pub fn sqrt_signed(&self, max_depth: usize) -> Result<Scalar, ScalarError> {
        let t = match self {
            Scalar::Rational(q) => {
                if let Some(r) = tower::rational_sqrt(q) {
                    return Ok(Scalar::Rational(r));
                }
                TowerElement::from_rational(Tower::rationals(), q.clone())
            }
            Scalar::Tower(t) => t.clone(),
            Scalar::Interval(_) => return Err(ScalarError::NotReal),
        };
        if let Some(r) = t.sqrt_in_tower() {
            let r = Scalar::from_tower(r);
            if r.is_real() && r.certified_sign(MAX_PRECISION)? == Sign::Negative {
                return Ok(-r);
            }
            return Ok(r);
        }
        if !t.is_real() {
            return Err(ScalarError::NotReal);
        }
        let depth = t.tower().depth();
        if depth >= max_depth {
            return Err(ScalarError::TowerDepthExceeded(max_depth));
        }
        let negative = Scalar::from_tower(t.clone()).certified_sign(MAX_PRECISION)? == Sign::Negative;
        let (radicand, factor) = canonical_radicand(t.coeffs());
        let ext = t.tower().extend(radicand, negative);
        Ok(Scalar::from_tower(TowerElement::generator(ext, depth).scale(&factor)))
    }

    /// Decimal rendering of an enclosure midpoint with `digits` fractional digits.
    pub fn to_decimal(&self, digits: u32) -> String {
        let bits = (digits as f64 * 3.33) as u32 + 16;
        let e = self.to_interval(bits);
        let re = decimal(&e.re.midpoint(), digits);
        match e.im {
            None => re,
            Some(i) => format!("{re} + {}i", decimal(&i.midpoint(), digits)),
        }
    }

    /// Upper bound on `|x|`.
    pub fn abs_upper(&self, bits: u32) -> Dyadic {
        self.to_interval(bits).abs_upper()
    }
}

/// Splits `r = radicand * factor^2` with integer radicand coefficients whose
/// common divisor has no small square factors.
fn canonical_radicand(c: &[BigRational]) -> (Vec<BigRational>, BigRational) {
    let l = c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = c.iter().map(|x| (x * BigRational::from_integer(&l * &l)).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let (s, _) = tower::square_part(&g);
    let ss = &s * &s;
    let rad = ints.iter().map(|x| BigRational::from_integer(x / &ss)).collect();
    (rad, BigRational::new(s, l))
}

fn sign_of(s: i32) -> Sign {
    match s.cmp(&0) {
        std::cmp::Ordering::Less => Sign::Negative,
        std::cmp::Ordering::Equal => Sign::Zero,
        std::cmp::Ordering::Greater => Sign::Positive,
    }
}

fn decimal(d: &Dyadic, digits: u32) -> String {
    let q = d.to_rational() * BigRational::from_integer(BigInt::from(10).pow(digits));
    let n = q.round().to_integer();
    let neg = n.is_negative();
    let s = n.abs().to_string();
    let s = format!("{:0>width$}", s, width = digits as usize + 1);
    let (i, f) = s.split_at(s.len() - digits as usize);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{i}")
    } else {
        format!("{sign}{i}.{f}")
    }
}

#[derive(Clone, Copy)]
enum Op {
    Add,
    Sub,
    Mul,
}

impl Op {
    fn interval(self, a: &Enclosure, b: &Enclosure) -> Enclosure {
        match self {
            Op::Add => a.add(b),
            Op::Sub => a.sub(b),
            Op::Mul => a.mul(b),
        }
    }

    fn tower(self, a: &TowerElement, b: &TowerElement) -> TowerElement {
        match self {
            Op::Add => a.add(b),
            Op::Sub => a.sub(b),
            Op::Mul => a.mul(b),
        }
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => a == b,
            (Scalar::Tower(a), Scalar::Tower(b)) => a == b,
            (Scalar::Interval(a), Scalar::Interval(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Scalar {}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

impl From<BigRational> for Scalar {
    fn from(q: BigRational) -> Self {
        Scalar::Rational(q)
    }
}

impl From<TowerElement> for Scalar {
    fn from(t: TowerElement) -> Self {
        Scalar::from_tower(t)
    }
}

macro_rules! bin_ops {
    ($tr:ident, $f:ident, $op:expr, $atr:ident, $af:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $f(self, o: &Scalar) -> Scalar {
                self.binary(o, $op)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $f(self, o: Scalar) -> Scalar {
                self.binary(&o, $op)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $f(self, o: &Scalar) -> Scalar {
                self.binary(o, $op)
            }
        }
        impl $atr<&Scalar> for Scalar {
            fn $af(&mut self, o: &Scalar) {
                *self = self.binary(o, $op);
            }
        }
        impl $atr<Scalar> for Scalar {
            fn $af(&mut self, o: Scalar) {
                *self = self.binary(&o, $op);
            }
        }
    };
}

bin_ops!(Add, add, Op::Add, AddAssign, add_assign);
bin_ops!(Sub, sub, Op::Sub, SubAssign, sub_assign);
bin_ops!(Mul, mul, Op::Mul, MulAssign, mul_assign);

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(q) => Scalar::Rational(-q),
            Scalar::Tower(t) => Scalar::Tower(t.neg()),
            Scalar::Interval(e) => Scalar::Interval(e.neg()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => write!(f, "{q}"),
            Scalar::Tower(t) => write!(f, "{t}"),
            Scalar::Interval(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt13() -> Scalar {
        Scalar::int(13).exact_sqrt_or_adjoin(3).unwrap()
    }

    #[test]
    fn rational_sum() {
        assert_eq!(&Scalar::ratio(1, 2) + &Scalar::ratio(1, 3), Scalar::ratio(5, 6));
    }

    #[test]
    fn root_thirteen_squares_back() {
        let s = sqrt13();
        assert!(matches!(s, Scalar::Tower(_)));
        assert_eq!(&s * &s, Scalar::int(13));
    }

    #[test]
    fn perfect_square_stays_rational() {
        assert_eq!(Scalar::int(4).exact_sqrt_or_adjoin(3).unwrap(), Scalar::int(2));
        assert_eq!(Scalar::ratio(9, 4).exact_sqrt_or_adjoin(3).unwrap(), Scalar::ratio(3, 2));
    }

    #[test]
    fn nested_root_adjoins_second_level() {
        let y = (&Scalar::int(5) + &sqrt13()) * Scalar::ratio(1, 2);
        let t = y.exact_sqrt_or_adjoin(3).unwrap();
        assert_eq!(t.tower().unwrap().depth(), 2);
        assert_eq!(&t * &t, y);
        assert_eq!(t.certified_sign(256).unwrap(), Sign::Positive);
    }

    #[test]
    fn square_found_inside_tower() {
        // (1 + sqrt 13)^2 = 14 + 2 sqrt 13
        let z = &Scalar::int(14) + &(&Scalar::int(2) * &sqrt13());
        let r = z.exact_sqrt_or_adjoin(3).unwrap();
        assert_eq!(r, &Scalar::int(1) + &sqrt13());
    }

    #[test]
    fn signs() {
        assert_eq!(Scalar::ratio(-3, 7).certified_sign(64).unwrap(), Sign::Negative);
        let d = &Scalar::int(5) - &sqrt13();
        assert_eq!(d.certified_sign(64).unwrap(), Sign::Positive);
        assert_eq!((&sqrt13() - &sqrt13()).certified_sign(64).unwrap(), Sign::Zero);
    }

    #[test]
    fn negative_radicand_refused() {
        assert_eq!(Scalar::int(-2).exact_sqrt_or_adjoin(3), Err(ScalarError::NegativeRadicand));
    }

    #[test]
    fn imaginary_root_and_conjugation() {
        let i2 = Scalar::int(-2).sqrt_signed(3).unwrap();
        assert_eq!(&i2 * &i2, Scalar::int(-2));
        assert!(!i2.is_real());
        assert_eq!(i2.conj(), -&i2);
        assert_eq!(&i2 * &i2.conj(), Scalar::int(2));
        assert_eq!(i2.certified_sign(64), Err(ScalarError::NotReal));
    }

    #[test]
    fn depth_limit() {
        let a = Scalar::int(2).exact_sqrt_or_adjoin(1).unwrap();
        let c = &a + &Scalar::int(1);
        assert_eq!(c.exact_sqrt_or_adjoin(1), Err(ScalarError::TowerDepthExceeded(1)));
    }

    #[test]
    fn interval_of_third_is_tight() {
        let e = Scalar::ratio(1, 3).to_interval(64);
        assert!(e.re.contains(&BigRational::new(1.into(), 3.into())));
        assert!(e.re.width().magnitude() <= -62);
    }

    #[test]
    fn interval_division_by_straddling_divisor() {
        let z = Scalar::Interval(Enclosure::real(CertInterval::new(Dyadic::from_int(-1), Dyadic::from_int(1), 64)));
        assert_eq!(Scalar::one().checked_div(&z), Err(ScalarError::UncertifiableDivisor));
        assert_eq!(Scalar::one().checked_div(&Scalar::zero()), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Scalar::ratio(1, 3).to_decimal(5), "0.33333");
        assert_eq!(sqrt13().to_decimal(6), "3.605551");
        assert_eq!(Scalar::ratio(-5, 2).to_decimal(2), "-2.50");
    }
}
