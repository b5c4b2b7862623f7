use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::{CertInterval, Dyadic, Enclosure, Scalar, ScalarError, Tower, TowerElement};

pub(crate) fn rational_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub(crate) fn rational_from_str(s: &str) -> Result<BigRational, ScalarError> {
    let bad = || ScalarError::Parse(format!("bad rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

fn interval_json(i: &CertInterval) -> (String, String) {
    (i.lower().to_hex(), i.upper().to_hex())
}

impl Scalar {
    pub fn to_json(&self) -> Value {
        match self {
            Scalar::Rational(q) => json!({
                "kind": "rat",
                "num": q.numer().to_string(),
                "den": q.denom().to_string(),
            }),
            Scalar::Tower(t) => {
                let d = t.depth();
                let radicands: Vec<Value> = t.tower().levels()[..d]
                    .iter()
                    .map(|l| Value::Array(l.radicand().iter().map(|q| Value::String(rational_to_string(q))).collect()))
                    .collect();
                let coeffs: Vec<Value> = t.coeffs().iter().map(|q| Value::String(rational_to_string(q))).collect();
                json!({"kind": "tower", "radicands": radicands, "coeffs": coeffs})
            }
            Scalar::Interval(e) => {
                let (lo, hi) = interval_json(&e.re);
                let mut v = json!({"kind": "interval", "lo": lo, "hi": hi, "prec": e.re.precision_bits()});
                if let Some(im) = &e.im {
                    let (a, b) = interval_json(im);
                    v["im_lo"] = Value::String(a);
                    v["im_hi"] = Value::String(b);
                }
                v
            }
        }
    }

    /// Parses the JSON encoding. Towers are rebuilt level by level; pass
    /// `base` to reuse an existing compatible tower.
    pub fn from_json(v: &Value, base: Option<&Arc<Tower>>) -> Result<Scalar, ScalarError> {
        let err = |m: &str| ScalarError::Parse(m.to_string());
        let kind = v.get("kind").and_then(Value::as_str).ok_or_else(|| err("missing kind"))?;
        let field = |k: &str| v.get(k).and_then(Value::as_str).ok_or_else(|| err(&format!("missing {k}")));
        match kind {
            "rat" => {
                let n: BigInt = field("num")?.parse().map_err(|_| err("bad num"))?;
                let d: BigInt = field("den")?.parse().map_err(|_| err("bad den"))?;
                if d.is_zero() {
                    return Err(err("zero denominator"));
                }
                Ok(Scalar::Rational(BigRational::new(n, d)))
            }
            "tower" => {
                let rads = v.get("radicands").and_then(Value::as_array).ok_or_else(|| err("missing radicands"))?;
                let coeffs = v.get("coeffs").and_then(Value::as_array).ok_or_else(|| err("missing coeffs"))?;
                let mut levels: Vec<Vec<BigRational>> = Vec::new();
                for r in rads {
                    let r = r.as_array().ok_or_else(|| err("radicand must be a list"))?;
                    levels.push(r.iter().map(|x| x.as_str().ok_or_else(|| err("radicand entry")).and_then(rational_from_str)).collect::<Result<_, _>>()?);
                }
                let c: Vec<BigRational> = coeffs
                    .iter()
                    .map(|x| x.as_str().ok_or_else(|| err("coefficient")).and_then(rational_from_str))
                    .collect::<Result<_, _>>()?;
                if c.len() != 1 << levels.len() {
                    return Err(err("coefficient count must be 2^depth"));
                }
                let tower = match base {
                    Some(b) if b.depth() >= levels.len() && b.levels()[..levels.len()].iter().zip(&levels).all(|(l, r)| l.radicand() == &r[..]) => b.clone(),
                    _ => build_tower(&levels)?,
                };
                Ok(Scalar::from_tower(TowerElement::new(tower, c)))
            }
            "interval" => {
                let hex = |k: &str| field(k).and_then(|s| Dyadic::from_hex(s).ok_or_else(|| err("bad hex dyadic")));
                let prec = v.get("prec").and_then(Value::as_u64).unwrap_or(super::DEFAULT_PRECISION as u64) as u32;
                let (lo, hi) = (hex("lo")?, hex("hi")?);
                if lo > hi {
                    return Err(err("interval endpoints out of order"));
                }
                let re = CertInterval::new(lo, hi, prec);
                let im = match (v.get("im_lo"), v.get("im_hi")) {
                    (Some(_), Some(_)) => {
                        let (a, b) = (hex("im_lo")?, hex("im_hi")?);
                        if a > b {
                            return Err(err("interval endpoints out of order"));
                        }
                        Some(CertInterval::new(a, b, prec))
                    }
                    _ => None,
                };
                Ok(Scalar::Interval(Enclosure { re, im }))
            }
            other => Err(err(&format!("unknown kind {other:?}"))),
        }
    }
}

fn build_tower(levels: &[Vec<BigRational>]) -> Result<Arc<Tower>, ScalarError> {
    let mut t = Tower::rationals();
    for (k, r) in levels.iter().enumerate() {
        if r.len() != 1 << k {
            return Err(ScalarError::Parse("radicand length must be 2^level".into()));
        }
        let e = Scalar::from_tower(TowerElement::new(t.clone(), r.clone()));
        if !e.is_real() {
            return Err(ScalarError::Parse("radicand must be real".into()));
        }
        if TowerElement::new(t.clone(), r.clone()).sqrt_in_tower().is_some() {
            return Err(ScalarError::Parse("radicand is a square in the field below".into()));
        }
        let neg = e.certified_sign(super::MAX_PRECISION)? == super::Sign::Negative;
        t = t.extend(r.clone(), neg);
    }
    Ok(t)
}
