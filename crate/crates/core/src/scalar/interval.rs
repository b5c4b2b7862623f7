use std::fmt;

use num_rational::BigRational;

use super::dyadic::{Dyadic, Round};

/// Closed interval with dyadic endpoints; every operation rounds outward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertInterval {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl CertInterval {
    /// Panics if `lo > hi`.
    pub fn new(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        CertInterval { lo, hi, prec: prec.max(8) }
    }

    pub fn point(d: Dyadic, prec: u32) -> Self {
        CertInterval { lo: d.clone(), hi: d, prec: prec.max(8) }
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> Self {
        CertInterval {
            lo: Dyadic::from_rational(q, prec, Round::Down),
            hi: Dyadic::from_rational(q, prec, Round::Up),
            prec: prec.max(8),
        }
    }

    pub fn lower(&self) -> &Dyadic {
        &self.lo
    }

    pub fn upper(&self) -> &Dyadic {
        &self.hi
    }

    pub fn precision_bits(&self) -> u32 {
        self.prec
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        CertInterval { lo: self.lo.clone(), hi: self.hi.clone(), prec: prec.max(8) }
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn midpoint(&self) -> Dyadic {
        self.lo.add(&self.hi).mul_pow2(-1)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo.to_rational() <= q && q <= &self.hi.to_rational()
    }

    pub fn is_point_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    /// Sign when the interval excludes zero.
    pub fn sign(&self) -> Option<i32> {
        if self.lo.signum() > 0 {
            Some(1)
        } else if self.hi.signum() < 0 {
            Some(-1)
        } else if self.is_point_zero() {
            Some(0)
        } else {
            None
        }
    }

    pub fn overlaps(&self, other: &CertInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Largest absolute value of any point in the interval.
    pub fn mag(&self) -> Dyadic {
        let a = self.lo.abs();
        let b = self.hi.abs();
        if a > b {
            a
        } else {
            b
        }
    }

    fn p(&self, other: &CertInterval) -> u32 {
        self.prec.max(other.prec)
    }

    pub fn neg(&self) -> Self {
        CertInterval { lo: self.hi.neg(), hi: self.lo.neg(), prec: self.prec }
    }

    pub fn add(&self, other: &CertInterval) -> Self {
        let p = self.p(other);
        CertInterval {
            lo: self.lo.add(&other.lo).round(p, Round::Down),
            hi: self.hi.add(&other.hi).round(p, Round::Up),
            prec: p,
        }
    }

    pub fn sub(&self, other: &CertInterval) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &CertInterval) -> Self {
        let p = self.p(other);
        let c = [
            self.lo.mul(&other.lo),
            self.lo.mul(&other.hi),
            self.hi.mul(&other.lo),
            self.hi.mul(&other.hi),
        ];
        let lo = c.iter().min().unwrap().round(p, Round::Down);
        let hi = c.iter().max().unwrap().round(p, Round::Up);
        CertInterval { lo, hi, prec: p }
    }

    pub fn square(&self) -> Self {
        let m = self.mul(self);
        if self.contains_zero() {
            CertInterval { lo: Dyadic::zero(), hi: m.hi, prec: m.prec }
        } else {
            m
        }
    }

    /// `None` when the divisor straddles zero.
    pub fn recip(&self) -> Option<Self> {
        if self.contains_zero() {
            return None;
        }
        let p = self.prec;
        let lo = Dyadic::from_rational(&self.hi.to_rational().recip(), p, Round::Down);
        let hi = Dyadic::from_rational(&self.lo.to_rational().recip(), p, Round::Up);
        Some(CertInterval { lo, hi, prec: p })
    }

    pub fn div(&self, other: &CertInterval) -> Option<Self> {
        let r = other.with_precision(self.p(other)).recip()?;
        Some(self.mul(&r))
    }

    /// Square root of the nonnegative part; `None` if the interval is entirely negative.
    pub fn sqrt(&self) -> Option<Self> {
        if self.hi.signum() < 0 {
            return None;
        }
        let lo = if self.lo.signum() <= 0 { Dyadic::zero() } else { self.lo.sqrt(self.prec, Round::Down) };
        Some(CertInterval { lo, hi: self.hi.sqrt(self.prec, Round::Up), prec: self.prec })
    }

    pub fn hull(&self, other: &CertInterval) -> Self {
        CertInterval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            prec: self.p(other),
        }
    }
}

impl fmt::Display for CertInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A certified enclosure of a real (`im = None`) or complex number as a box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    pub re: CertInterval,
    pub im: Option<CertInterval>,
}

impl Enclosure {
    pub fn real(re: CertInterval) -> Self {
        Enclosure { re, im: None }
    }

    pub fn precision_bits(&self) -> u32 {
        match &self.im {
            Some(i) => self.re.precision_bits().max(i.precision_bits()),
            None => self.re.precision_bits(),
        }
    }

    fn im_or_zero(&self) -> CertInterval {
        self.im.clone().unwrap_or_else(|| CertInterval::point(Dyadic::zero(), self.re.precision_bits()))
    }

    fn build(re: CertInterval, im: Option<CertInterval>) -> Self {
        Enclosure { re, im: im.filter(|i| !i.is_point_zero()) }
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.as_ref().map_or(true, |i| i.contains_zero())
    }

    pub fn is_point_zero(&self) -> bool {
        self.re.is_point_zero() && self.im.as_ref().map_or(true, |i| i.is_point_zero())
    }

    pub fn neg(&self) -> Self {
        Enclosure { re: self.re.neg(), im: self.im.as_ref().map(|i| i.neg()) }
    }

    pub fn conj(&self) -> Self {
        Enclosure { re: self.re.clone(), im: self.im.as_ref().map(|i| i.neg()) }
    }

    pub fn add(&self, o: &Enclosure) -> Self {
        let im = match (&self.im, &o.im) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => Some(a.add(b)),
        };
        Enclosure::build(self.re.add(&o.re), im)
    }

    pub fn sub(&self, o: &Enclosure) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Enclosure) -> Self {
        match (&self.im, &o.im) {
            (None, None) => Enclosure::real(self.re.mul(&o.re)),
            (None, Some(b)) => Enclosure::build(self.re.mul(&o.re), Some(self.re.mul(b))),
            (Some(a), None) => Enclosure::build(self.re.mul(&o.re), Some(a.mul(&o.re))),
            (Some(a), Some(b)) => {
                let re = self.re.mul(&o.re).sub(&a.mul(b));
                let im = self.re.mul(b).add(&a.mul(&o.re));
                Enclosure::build(re, Some(im))
            }
        }
    }

    /// `|z|^2` as a real interval.
    pub fn norm_sqr(&self) -> CertInterval {
        let r = self.re.square();
        match &self.im {
            Some(i) => r.add(&i.square()),
            None => r,
        }
    }

    pub fn recip(&self) -> Option<Self> {
        match &self.im {
            None => self.re.recip().map(Enclosure::real),
            Some(_) => {
                let n = self.norm_sqr().recip()?;
                let c = self.conj();
                Some(Enclosure::build(c.re.mul(&n), c.im.map(|i| i.mul(&n))))
            }
        }
    }

    /// Upper bound on `|z|`.
    pub fn abs_upper(&self) -> Dyadic {
        let n = self.norm_sqr();
        n.upper().sqrt(n.precision_bits(), Round::Up)
    }

    pub fn imag(&self) -> CertInterval {
        self.im_or_zero()
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.im {
            None => write!(f, "{}", self.re),
            Some(i) => write!(f, "{} + i{}", self.re, i),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn arithmetic_contains_exact_result() {
        let a = CertInterval::from_rational(&q(1, 3), 64);
        let b = CertInterval::from_rational(&q(-2, 7), 64);
        assert!(a.add(&b).contains(&(q(1, 3) + q(-2, 7))));
        assert!(a.mul(&b).contains(&(q(1, 3) * q(-2, 7))));
        assert!(a.div(&b).unwrap().contains(&(q(1, 3) / q(-2, 7))));
    }

    #[test]
    fn recip_of_straddling_interval_is_refused() {
        let z = CertInterval::new(Dyadic::from_int(-1), Dyadic::from_int(1), 64);
        assert!(z.recip().is_none());
    }

    #[test]
    fn complex_product() {
        // (1 + 2i)(3 - i) = 5 + 5i
        let a = Enclosure { re: CertInterval::from_rational(&q(1, 1), 64), im: Some(CertInterval::from_rational(&q(2, 1), 64)) };
        let b = Enclosure { re: CertInterval::from_rational(&q(3, 1), 64), im: Some(CertInterval::from_rational(&q(-1, 1), 64)) };
        let c = a.mul(&b);
        assert!(c.re.contains(&q(5, 1)) && c.im.unwrap().contains(&q(5, 1)));
    }
}
