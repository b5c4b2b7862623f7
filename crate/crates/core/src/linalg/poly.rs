use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{LinalgError, Matrix};
use crate::scalar::{CertInterval, Dyadic, Round, Scalar};

type Q = BigRational;

/// Univariate polynomial with rational coefficients, lowest degree first.
/// The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Q>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&x| Q::from_integer(BigInt::from(x))).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Q> {
        self.coeffs.last()
    }

    pub fn eval_q(&self, x: &Q) -> Q {
        self.coeffs.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        self.coeffs.iter().rev().fold(Scalar::zero(), |acc, c| &(&acc * x) + &Scalar::Rational(c.clone()))
    }

    /// Horner evaluation of the polynomial at a square matrix.
    pub fn eval_matrix(&self, m: &Matrix) -> Result<Matrix, LinalgError> {
        let n = m.rows();
        let mut acc = Matrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m)?;
            let id = Matrix::identity(n).scale(&Scalar::Rational(c.clone()));
            acc = Matrix::from_rows((0..n).map(|i| (0..n).map(|j| acc.get(i, j) + id.get(i, j)).collect()).collect());
        }
        Ok(acc)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).cloned().unwrap_or_else(Q::zero) + o.coeffs.get(i).cloned().unwrap_or_else(Q::zero))
                .collect(),
        )
    }

    pub fn neg(&self) -> Poly {
        Poly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut c = vec![Q::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }

    pub fn scale(&self, s: &Q) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer(BigInt::from(i))).collect())
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Poly::zero(),
        }
    }

    /// Quotient and remainder; panics on a zero divisor.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading().unwrap().clone();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![Q::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &lead;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    r[k + i] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (Poly::new(q), Poly::new(r))
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn squarefree_part(&self) -> Poly {
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) || g.is_zero() {
            self.monic()
        } else {
            self.div_rem(&g).0.monic()
        }
    }

    /// Substitutes `x -> x^2`.
    pub fn compose_square(&self) -> Poly {
        let mut c = vec![Q::zero(); 2 * self.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            c[2 * i] = a.clone();
        }
        Poly::new(c)
    }

    /// Newton interpolation through `(pts[i], vals[i])`.
    pub fn interpolate(pts: &[Q], vals: &[Q]) -> Poly {
        let n = pts.len();
        let mut dd = vals.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                dd[i] = (&dd[i] - &dd[i - 1]) / (&pts[i] - &pts[i - j]);
            }
        }
        let mut p = Poly::zero();
        for i in (0..n).rev() {
            p = p.mul(&Poly::new(vec![-pts[i].clone(), Q::one()])).add(&Poly::new(vec![dd[i].clone()]));
        }
        p
    }

    /// Sturm sequence `q, q', -rem(...)...` of the polynomial.
    pub fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).1.neg();
            if r.is_zero() {
                break;
            }
            seq.push(r);
        }
        seq.retain(|p| !p.is_zero());
        seq
    }

    /// Number of distinct real roots, by Sturm sign variations at the infinities.
    pub fn count_real_roots(&self) -> usize {
        let sq = self.squarefree_part();
        let seq = sq.sturm_sequence();
        let at = |neg: bool| -> Vec<i32> {
            seq.iter()
                .map(|p| {
                    let s = p.leading().unwrap().signum();
                    let s: i32 = if s.is_positive() { 1 } else { -1 };
                    if neg && p.degree().unwrap() % 2 == 1 {
                        -s
                    } else {
                        s
                    }
                })
                .collect()
        };
        variations(&at(true)) - variations(&at(false))
    }
}

fn variations(signs: &[i32]) -> usize {
    let nz: Vec<i32> = signs.iter().copied().filter(|&s| s != 0).collect();
    nz.windows(2).filter(|w| w[0] != w[1]).count()
}

fn sign_q(q: &Q) -> i32 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

fn sturm_variations(seq: &[Poly], x: &Q) -> usize {
    let s: Vec<i32> = seq.iter().map(|p| sign_q(&p.eval_q(x))).collect();
    variations(&s)
}

/// A half-open interval `(lo, hi]` holding exactly one root of a polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInterval {
    pub lo: Q,
    pub hi: Q,
}

impl RootInterval {
    /// Bisects against the squarefree polynomial `p` until `hi - lo <= 2^-bits`.
    pub fn refine(&self, p: &Poly, bits: u32) -> RootInterval {
        let eps = Q::new(BigInt::one(), BigInt::one() << bits as usize);
        let (mut lo, mut hi) = (self.lo.clone(), self.hi.clone());
        let shi = sign_q(&p.eval_q(&hi));
        if shi == 0 {
            return RootInterval { lo: hi.clone(), hi };
        }
        while &hi - &lo > eps {
            let mid = (&lo + &hi) / Q::from_integer(BigInt::from(2));
            let sm = sign_q(&p.eval_q(&mid));
            if sm == 0 {
                return RootInterval { lo: mid.clone(), hi: mid };
            }
            if sm == shi {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        RootInterval { lo, hi }
    }

    pub fn to_interval(&self, prec: u32) -> CertInterval {
        CertInterval::new(Dyadic::from_rational(&self.lo, prec, Round::Down), Dyadic::from_rational(&self.hi, prec, Round::Up), prec)
    }

    pub fn contains(&self, x: &Q) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Disjoint isolating intervals for the distinct real roots, in increasing order.
pub fn isolate_real_roots(p: &Poly) -> Vec<RootInterval> {
    assert!(!p.is_zero(), "zero polynomial");
    let q = p.squarefree_part();
    if q.degree() == Some(0) {
        return Vec::new();
    }
    let seq = q.sturm_sequence();
    let lead = q.leading().unwrap().abs();
    let bound = q.coeffs.iter().fold(Q::zero(), |m, c| m.max(c.abs() / &lead)) + Q::one();
    let b = Q::from_integer(bound.ceil().to_integer());
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((a, c)) = stack.pop() {
        let k = sturm_variations(&seq, &a) - sturm_variations(&seq, &c);
        match k {
            0 => {}
            1 => out.push(RootInterval { lo: a, hi: c }),
            _ => {
                let two = Q::from_integer(BigInt::from(2));
                let mut mid = (&a + &c) / &two;
                let mut t = 3;
                while q.eval_q(&mid).is_zero() {
                    mid = (&a * Q::from_integer(BigInt::from(t - 1)) + &c) / Q::from_integer(BigInt::from(t));
                    t += 1;
                }
                stack.push((mid.clone(), c));
                stack.push((a, mid));
            }
        }
    }
    out.sort_by(|x, y| x.lo.cmp(&y.lo));
    out
}

/// `det(x I - m)` by the division-free Berkowitz algorithm.
pub fn charpoly(m: &Matrix) -> Result<Poly, LinalgError> {
    let n = m.rows();
    if m.cols() != n {
        return Err(LinalgError::ShapeMismatch("square matrix expected".into()));
    }
    let a = m.rational_entries().ok_or(LinalgError::InexactEntries)?;
    let at = |i: usize, j: usize| &a[i * n + j];
    // coefficient vector, highest degree first
    let mut vect: Vec<Q> = vec![Q::one()];
    for r in 0..n {
        let mut col = vec![Q::one(), -at(r, r).clone()];
        let mut mc: Vec<Q> = (0..r).map(|i| at(i, r).clone()).collect();
        for _ in 0..r {
            let rc: Q = (0..r).fold(Q::zero(), |s, j| s + at(r, j) * &mc[j]);
            col.push(-rc);
            mc = (0..r).map(|i| (0..r).fold(Q::zero(), |s, j| s + at(i, j) * &mc[j])).collect();
        }
        let mut next = vec![Q::zero(); r + 2];
        for (i, nx) in next.iter_mut().enumerate() {
            for (j, v) in vect.iter().enumerate() {
                if i >= j {
                    *nx += &col[i - j] * v;
                }
            }
        }
        vect = next;
    }
    vect.reverse();
    Ok(Poly::new(vect))
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mon = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            let cs = if c.is_one() && i > 0 {
                String::new()
            } else if (-c).is_one() && i > 0 {
                "-".to_string()
            } else {
                c.to_string()
            };
            parts.push(if mon.is_empty() { cs } else if cs.is_empty() || cs == "-" { format!("{cs}{mon}") } else { format!("{cs}*{mon}") });
        }
        write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
    }
}
