use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::interval::{CertInterval, Enclosure};

type Q = BigRational;

/// One adjoined square root. The radicand lives in the field spanned by the
/// levels below it and is stored with exactly `2^k` coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Level {
    radicand: Vec<Q>,
    imaginary: bool,
}

impl Level {
    pub fn radicand(&self) -> &[Q] {
        &self.radicand
    }

    /// True when the radicand is negative, so the adjoined root is `i * sqrt|r|`.
    pub fn is_imaginary(&self) -> bool {
        self.imaginary
    }
}

/// A tower `Q(sqrt r_0)(sqrt r_1)...` of quadratic extensions.
#[derive(Debug)]
pub struct Tower {
    levels: Vec<Level>,
    roots: Mutex<HashMap<u32, Vec<Enclosure>>>,
}

impl Tower {
    pub fn rationals() -> Arc<Tower> {
        Arc::new(Tower { levels: Vec::new(), roots: Mutex::new(HashMap::new()) })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    fn imag_mask(&self) -> usize {
        self.levels.iter().enumerate().filter(|(_, l)| l.imaginary).fold(0, |m, (k, _)| m | (1 << k))
    }

    pub fn has_imaginary(&self) -> bool {
        self.levels.iter().any(|l| l.imaginary)
    }

    /// Levels `0..k` agree with those of `other`.
    pub fn agrees_below(&self, other: &Tower, k: usize) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        k <= self.depth() && k <= other.depth() && self.levels[..k] == other.levels[..k]
    }

    /// Extends the tower by `sqrt(radicand)`. The caller guarantees that the
    /// radicand is real and not a square in `self`.
    pub(crate) fn extend(self: &Arc<Tower>, radicand: Vec<Q>, imaginary: bool) -> Arc<Tower> {
        let k = self.depth();
        let mut r = radicand;
        r.resize(1 << k, Q::zero());
        let mut levels = self.levels.clone();
        levels.push(Level { radicand: r, imaginary });
        Arc::new(Tower { levels, roots: Mutex::new(HashMap::new()) })
    }

    /// Enclosures of the adjoined roots at the given precision.
    fn root_enclosures(&self, prec: u32) -> Vec<Enclosure> {
        if let Some(v) = self.roots.lock().unwrap().get(&prec) {
            return v.clone();
        }
        let mut out: Vec<Enclosure> = Vec::with_capacity(self.depth());
        for (k, lvl) in self.levels.iter().enumerate() {
            let r = eval_slice(&lvl.radicand, &out[..k], prec + 8);
            let mut re = r.re;
            if lvl.imaginary {
                re = re.neg();
            }
            let s = re.sqrt().expect("radicand enclosure must meet the nonnegative axis").with_precision(prec);
            out.push(if lvl.imaginary {
                Enclosure {
                    re: CertInterval::point(super::dyadic::Dyadic::zero(), prec),
                    im: Some(s),
                }
            } else {
                Enclosure::real(s)
            });
        }
        self.roots.lock().unwrap().insert(prec, out.clone());
        out
    }
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels
    }
}

fn eval_slice(c: &[Q], roots: &[Enclosure], prec: u32) -> Enclosure {
    if c.len() == 1 {
        return Enclosure::real(CertInterval::from_rational(&c[0], prec));
    }
    let h = c.len() / 2;
    let lo = eval_slice(&c[..h], roots, prec);
    if is_zero(&c[h..]) {
        return lo;
    }
    let hi = eval_slice(&c[h..], roots, prec);
    let d = c.len().trailing_zeros() as usize;
    lo.add(&hi.mul(&roots[d - 1]))
}

pub(crate) fn is_zero(c: &[Q]) -> bool {
    c.iter().all(|x| x.is_zero())
}

fn add_into(acc: &mut [Q], b: &[Q]) {
    for (a, b) in acc.iter_mut().zip(b) {
        if !b.is_zero() {
            *a += b;
        }
    }
}

fn sub_into(acc: &mut [Q], b: &[Q]) {
    for (a, b) in acc.iter_mut().zip(b) {
        if !b.is_zero() {
            *a -= b;
        }
    }
}

/// Product of two coefficient slices of equal length `2^d` over the first `d` levels.
pub(crate) fn mul_slice(a: &[Q], b: &[Q], levels: &[Level]) -> Vec<Q> {
    let n = a.len();
    if n == 1 {
        return vec![&a[0] * &b[0]];
    }
    let mut out = vec![Q::zero(); n];
    if is_zero(a) || is_zero(b) {
        return out;
    }
    let h = n / 2;
    let (a0, a1) = a.split_at(h);
    let (b0, b1) = b.split_at(h);
    let a1z = is_zero(a1);
    let b1z = is_zero(b1);
    let d = n.trailing_zeros() as usize;
    let (lo, hi) = out.split_at_mut(h);
    let c = mul_slice(a0, b0, levels);
    add_into(lo, &c);
    if !a1z && !b1z {
        let t = mul_slice(a1, b1, levels);
        let t = mul_slice(&t, &levels[d - 1].radicand, levels);
        add_into(lo, &t);
    }
    if !b1z {
        add_into(hi, &mul_slice(a0, b1, levels));
    }
    if !a1z {
        add_into(hi, &mul_slice(a1, b0, levels));
    }
    out
}

fn scale_slice(a: &[Q], s: &Q) -> Vec<Q> {
    a.iter().map(|x| if x.is_zero() { Q::zero() } else { x * s }).collect()
}

/// Inverse, `None` for zero.
pub(crate) fn inv_slice(a: &[Q], levels: &[Level]) -> Option<Vec<Q>> {
    let n = a.len();
    if n == 1 {
        return if a[0].is_zero() { None } else { Some(vec![a[0].recip()]) };
    }
    let h = n / 2;
    let (a0, a1) = a.split_at(h);
    let mut out = vec![Q::zero(); n];
    if is_zero(a1) {
        let i = inv_slice(a0, levels)?;
        out[..h].clone_from_slice(&i);
        return Some(out);
    }
    let d = n.trailing_zeros() as usize;
    let mut norm = mul_slice(a0, a0, levels);
    let t = mul_slice(a1, a1, levels);
    sub_into(&mut norm, &mul_slice(&t, &levels[d - 1].radicand, levels));
    let ni = inv_slice(&norm, levels)?;
    out[..h].clone_from_slice(&mul_slice(a0, &ni, levels));
    let hi = mul_slice(a1, &ni, levels);
    for (o, v) in out[h..].iter_mut().zip(hi) {
        *o = -v;
    }
    Some(out)
}

pub(crate) fn rational_sqrt(q: &Q) -> Option<Q> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Q::new(n, d))
    } else {
        None
    }
}

/// Some square root of `z` inside the field of the first `log2 len` levels.
pub(crate) fn sqrt_slice(z: &[Q], levels: &[Level]) -> Option<Vec<Q>> {
    let n = z.len();
    if n == 1 {
        return rational_sqrt(&z[0]).map(|s| vec![s]);
    }
    let h = n / 2;
    let d = n.trailing_zeros() as usize;
    let r = &levels[d - 1].radicand;
    let (a, b) = z.split_at(h);
    let mut out = vec![Q::zero(); n];
    if is_zero(b) {
        if let Some(x) = sqrt_slice(a, levels) {
            out[..h].clone_from_slice(&x);
            return Some(out);
        }
        let ri = inv_slice(r, levels)?;
        let y2 = mul_slice(a, &ri, levels);
        let y = sqrt_slice(&y2, levels)?;
        out[h..].clone_from_slice(&y);
        return Some(out);
    }
    let mut norm = mul_slice(a, a, levels);
    let bb = mul_slice(b, b, levels);
    sub_into(&mut norm, &mul_slice(&bb, r, levels));
    let s = sqrt_slice(&norm, levels)?;
    let half = Q::new(BigInt::one(), BigInt::from(2));
    for sign in [1, -1] {
        let mut t = a.to_vec();
        if sign > 0 {
            add_into(&mut t, &s);
        } else {
            sub_into(&mut t, &s);
        }
        let t = scale_slice(&t, &half);
        let Some(x) = sqrt_slice(&t, levels) else { continue };
        if is_zero(&x) {
            continue;
        }
        let two_x = scale_slice(&x, &Q::from_integer(BigInt::from(2)));
        let Some(ix) = inv_slice(&two_x, levels) else { continue };
        let y = mul_slice(b, &ix, levels);
        let mut cand = vec![Q::zero(); n];
        cand[..h].clone_from_slice(&x);
        cand[h..].clone_from_slice(&y);
        if mul_slice(&cand, &cand, levels) == z {
            return Some(cand);
        }
    }
    None
}

/// Element of a tower with `2^d` coefficients in the multi-radical basis,
/// `d` minimal (the top half is nonzero unless `d = 0`).
#[derive(Clone, Debug)]
pub struct TowerElement {
    tower: Arc<Tower>,
    coeffs: Vec<Q>,
}

impl TowerElement {
    pub fn new(tower: Arc<Tower>, mut coeffs: Vec<Q>) -> Self {
        assert!(coeffs.len().is_power_of_two() && coeffs.len() <= 1 << tower.depth(), "coefficient count");
        trim(&mut coeffs);
        TowerElement { tower, coeffs }
    }

    pub fn from_rational(tower: Arc<Tower>, q: Q) -> Self {
        TowerElement { tower, coeffs: vec![q] }
    }

    /// The adjoined root `sqrt(r_k)`.
    pub fn generator(tower: Arc<Tower>, k: usize) -> Self {
        assert!(k < tower.depth());
        let mut c = vec![Q::zero(); 2 << k];
        c[1 << k] = Q::one();
        TowerElement { tower, coeffs: c }
    }

    pub fn tower(&self) -> &Arc<Tower> {
        &self.tower
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    /// Number of levels the element actually uses.
    pub fn depth(&self) -> usize {
        self.coeffs.len().trailing_zeros() as usize
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    pub fn as_rational(&self) -> Option<&Q> {
        if self.coeffs.len() == 1 {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    pub fn with_tower(&self, tower: Arc<Tower>) -> Self {
        assert!(self.tower.agrees_below(&tower, self.depth()), "incompatible towers");
        TowerElement { tower, coeffs: self.coeffs.clone() }
    }

    fn padded(&self, d: usize) -> std::borrow::Cow<'_, [Q]> {
        if self.coeffs.len() == 1 << d {
            std::borrow::Cow::Borrowed(&self.coeffs)
        } else {
            let mut v = self.coeffs.clone();
            v.resize(1 << d, Q::zero());
            std::borrow::Cow::Owned(v)
        }
    }

    /// Common tower and working depth; panics on incompatible towers.
    fn join(&self, other: &TowerElement) -> (Arc<Tower>, usize) {
        let (da, db) = (self.depth(), other.depth());
        let d = da.max(db);
        if Arc::ptr_eq(&self.tower, &other.tower) {
            return (self.tower.clone(), d);
        }
        assert!(self.tower.agrees_below(&other.tower, da.min(db)), "tower elements from incompatible towers");
        let (big, small, ds) = if self.tower.depth() >= other.tower.depth() {
            (&self.tower, &other.tower, db)
        } else {
            (&other.tower, &self.tower, da)
        };
        if big.agrees_below(small, ds) {
            (big.clone(), d)
        } else if da >= db {
            (self.tower.clone(), d)
        } else {
            (other.tower.clone(), d)
        }
    }

    pub fn add(&self, other: &TowerElement) -> TowerElement {
        let (t, d) = self.join(other);
        let mut c = self.padded(d).into_owned();
        add_into(&mut c, &other.padded(d));
        TowerElement::new(t, c)
    }

    pub fn sub(&self, other: &TowerElement) -> TowerElement {
        let (t, d) = self.join(other);
        let mut c = self.padded(d).into_owned();
        sub_into(&mut c, &other.padded(d));
        TowerElement::new(t, c)
    }

    pub fn neg(&self) -> TowerElement {
        TowerElement { tower: self.tower.clone(), coeffs: self.coeffs.iter().map(|x| -x).collect() }
    }

    pub fn mul(&self, other: &TowerElement) -> TowerElement {
        let (t, d) = self.join(other);
        let c = mul_slice(&self.padded(d), &other.padded(d), t.levels());
        TowerElement::new(t, c)
    }

    pub fn scale(&self, q: &Q) -> TowerElement {
        TowerElement::new(self.tower.clone(), scale_slice(&self.coeffs, q))
    }

    pub fn inv(&self) -> Option<TowerElement> {
        inv_slice(&self.coeffs, self.tower.levels()).map(|c| TowerElement::new(self.tower.clone(), c))
    }

    /// Complex conjugate: flips the sign of every basis monomial carrying an
    /// odd number of imaginary roots.
    pub fn conj(&self) -> TowerElement {
        let m = self.tower.imag_mask();
        if m & (self.coeffs.len() - 1) == 0 {
            return self.clone();
        }
        let c = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(s, x)| if (s & m).count_ones() % 2 == 1 { -x } else { x.clone() })
            .collect();
        TowerElement { tower: self.tower.clone(), coeffs: c }
    }

    pub fn is_real(&self) -> bool {
        let m = self.tower.imag_mask();
        self.coeffs.iter().enumerate().all(|(s, x)| (s & m).count_ones() % 2 == 0 || x.is_zero())
    }

    /// A square root within the element's tower, if one exists.
    pub fn sqrt_in_tower(&self) -> Option<TowerElement> {
        let d = self.tower.depth();
        let z = self.padded(d);
        sqrt_slice(&z, self.tower.levels()).map(|c| TowerElement::new(self.tower.clone(), c))
    }

    pub fn enclosure(&self, prec: u32) -> Enclosure {
        let roots = self.tower.root_enclosures(prec);
        eval_slice(&self.coeffs, &roots, prec)
    }
}

fn trim(c: &mut Vec<Q>) {
    while c.len() > 1 {
        let h = c.len() / 2;
        if is_zero(&c[h..]) {
            c.truncate(h);
        } else {
            break;
        }
    }
}

impl PartialEq for TowerElement {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && self.tower.agrees_below(&other.tower, self.depth())
    }
}

impl Eq for TowerElement {}

/// Splits a positive integer as `s^2 * f` with `f` free of square factors below `2^16`.
pub(crate) fn square_part(n: &BigInt) -> (BigInt, BigInt) {
    let mut f = n.abs();
    let mut s = BigInt::one();
    let mut p: u32 = 2;
    while p < 1 << 16 {
        let pp = BigInt::from(p) * BigInt::from(p);
        if pp > f {
            break;
        }
        while f.is_multiple_of(&pp) {
            f /= &pp;
            s *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let r = f.sqrt();
    if &r * &r == f {
        s *= r;
        f = BigInt::one();
    }
    (s, f)
}

fn fmt_q(q: &Q) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn fmt_coeffs(c: &[Q], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (s, x) in c.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        let mon: Vec<&str> = (0..names.len()).filter(|k| s >> k & 1 == 1).map(|k| names[k].as_str()).collect();
        if mon.is_empty() {
            parts.push(fmt_q(x));
        } else if x.is_one() {
            parts.push(mon.join("*"));
        } else {
            parts.push(format!("({})*{}", fmt_q(x), mon.join("*")));
        }
    }
    if parts.is_empty() {
        "0".to_string()
    } else {
        parts.join(" + ")
    }
}

impl fmt::Display for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.depth();
        let names: Vec<String> = (0..d).map(|k| format!("s{k}")).collect();
        write!(f, "{}", fmt_coeffs(&self.coeffs, &names))?;
        if d > 0 {
            let levels = self.tower.levels();
            let defs: Vec<String> = (0..d)
                .map(|k| format!("s{k}=sqrt({})", fmt_coeffs(&levels[k].radicand, &names[..k])))
                .collect();
            write!(f, " where {}", defs.join(", "))?;
        }
        Ok(())
    }
}
