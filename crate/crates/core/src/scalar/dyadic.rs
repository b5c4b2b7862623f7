use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact binary fraction `mant * 2^exp`, kept with an odd mantissa (or zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

/// Direction for rounding a result onto a coarser dyadic grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz as usize;
            self.exp += tz as i64;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    /// Position of the leading bit: `|self|` lies in `[2^(m-1), 2^m)`.
    pub fn magnitude(&self) -> i64 {
        if self.is_zero() {
            return i64::MIN / 4;
        }
        self.mant.bits() as i64 + self.exp
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.mant.bits() as i64;
        let shift = (bits - 60).max(0);
        let m: i64 = (&self.mant >> shift as usize).try_into().unwrap_or(0);
        (m as f64) * 2f64.powi((self.exp + shift) as i32)
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Round to at most `prec` significant bits in the given direction.
    pub fn round(&self, prec: u32, dir: Round) -> Dyadic {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = (bits - prec as u64) as usize;
        let q = shift_floor(&self.mant, shift, dir);
        Dyadic::new(q, self.exp + shift as i64)
    }

    /// Directed rounding of a rational to `prec` significant bits.
    pub fn from_rational(q: &BigRational, prec: u32, dir: Round) -> Dyadic {
        let num = q.numer();
        let den = q.denom();
        if num.is_zero() {
            return Dyadic::zero();
        }
        let k = prec as i64 + 2 - (num.bits() as i64 - den.bits() as i64);
        let (n, d) = if k >= 0 {
            (num << k as usize, den.clone())
        } else {
            (num.clone(), den << (-k) as usize)
        };
        let (fl, rem) = n.div_mod_floor(&d);
        let m = if dir == Round::Up && !rem.is_zero() { fl + 1 } else { fl };
        Dyadic::new(m, -k).round(prec, dir)
    }

    /// Directed square root, `prec` significant bits. Caller guarantees `self >= 0`.
    pub fn sqrt(&self, prec: u32, dir: Round) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        debug_assert!(self.signum() > 0);
        let want = 2 * (prec as i64 + 2);
        let mut s = (want - self.mant.bits() as i64).max(0);
        if (self.exp - s).rem_euclid(2) != 0 {
            s += 1;
        }
        let m = &self.mant << s as usize;
        let mut r = m.sqrt();
        if dir == Round::Up && &r * &r != m {
            r += 1;
        }
        Dyadic::new(r, (self.exp - s) / 2).round(prec, dir)
    }

    pub fn to_hex(&self) -> String {
        let sign = if self.mant.is_negative() { "-" } else { "" };
        let e = if self.exp >= 0 { format!("+{}", self.exp) } else { self.exp.to_string() };
        format!("{sign}0x{}p{e}", self.mant.abs().to_str_radix(16))
    }

    pub fn from_hex(s: &str) -> Option<Dyadic> {
        let (neg, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let rest = rest.strip_prefix("0x")?;
        let (m, e) = rest.split_once('p')?;
        let mant = BigInt::parse_bytes(m.as_bytes(), 16)?;
        let exp: i64 = e.trim_start_matches('+').parse().ok()?;
        Some(Dyadic::new(if neg { -mant } else { mant }, exp))
    }
}

fn shift_floor(m: &BigInt, shift: usize, dir: Round) -> BigInt {
    let d = BigInt::one() << shift;
    let (q, r) = m.div_mod_floor(&d);
    if dir == Round::Up && !r.is_zero() {
        q + 1
    } else {
        q
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sub(other).signum().cmp(&0)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        for d in [Dyadic::from_int(0), Dyadic::from_int(-12), Dyadic::new(BigInt::from(355), -7)] {
            assert_eq!(Dyadic::from_hex(&d.to_hex()).unwrap(), d);
        }
        assert_eq!(Dyadic::from_int(-12).to_hex(), "-0x3p+2");
    }

    #[test]
    fn directed_rational_rounding_brackets() {
        let third = BigRational::new(1.into(), 3.into());
        let lo = Dyadic::from_rational(&third, 64, Round::Down);
        let hi = Dyadic::from_rational(&third, 64, Round::Up);
        assert!(lo.to_rational() < third && third < hi.to_rational());
        let w = hi.sub(&lo);
        assert!(w.magnitude() <= -64);
    }

    #[test]
    fn sqrt_brackets() {
        let two = Dyadic::from_int(2);
        let lo = two.sqrt(80, Round::Down);
        let hi = two.sqrt(80, Round::Up);
        assert!(lo.mul(&lo) < two && two < hi.mul(&hi));
        let four = Dyadic::from_int(4);
        assert_eq!(four.sqrt(10, Round::Down), Dyadic::from_int(2));
    }
}
