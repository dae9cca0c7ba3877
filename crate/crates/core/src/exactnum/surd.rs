use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest trial divisor used when pulling square factors out of the radicand.
const TRIAL_LIMIT: u64 = 1 << 17;

/// An element `(P + S*sqrt(D)) / Q` of a real quadratic field, kept in canonical form.
///
/// Canonical means `Q > 0`, `gcd(P, S, Q) = 1`, `D` free of small square factors and not a
/// perfect square, and `S = 0` exactly when `D = 0`. Two canonical values over the same `D`
/// are equal iff their fields are equal, so the derived `Eq`/`Hash` are exact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    p: BigInt,
    s: BigInt,
    d: BigInt,
    q: BigInt,
}

/// Sign of `p + s*sqrt(d)` for `d >= 0` that is zero or not a perfect square.
pub(crate) fn sign_of(p: &BigInt, s: &BigInt, d: &BigInt) -> Ordering {
    let sp = p.sign();
    let ss = if d.is_zero() { Sign::NoSign } else { s.sign() };
    match (sp, ss) {
        (Sign::NoSign, Sign::NoSign) => Ordering::Equal,
        (x, Sign::NoSign) | (Sign::NoSign, x) => sign_to_ord(x),
        (a, b) if a == b => sign_to_ord(a),
        (a, b) => {
            if p * p > s * s * d {
                sign_to_ord(a)
            } else {
                sign_to_ord(b)
            }
        }
    }
}

fn sign_to_ord(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

/// `floor((p + s*sqrt(d)) / q)` for `q > 0`.
pub(crate) fn floor_parts(p: &BigInt, s: &BigInt, d: &BigInt, q: &BigInt) -> BigInt {
    if s.is_zero() || d.is_zero() {
        return p.div_floor(q);
    }
    let n = s * s * d;
    let m = n.sqrt();
    // n is not a perfect square, so m < |s|sqrt(d) < m + 1
    if s.is_positive() {
        (p + m).div_floor(q)
    } else {
        (p - m - BigInt::one()).div_floor(q)
    }
}

/// Splits `d = f^2 * r` removing square factors found by trial division, plus a final
/// perfect-square check on the cofactor.
fn extract_square(d: &BigInt) -> (BigInt, BigInt) {
    let mut f = BigInt::one();
    let mut r = d.clone();
    if r.is_zero() {
        return (f, r);
    }
    let mut p: u64 = 2;
    while p <= TRIAL_LIMIT {
        let pb = BigInt::from(p);
        let p2 = &pb * &pb;
        if p2 > r {
            break;
        }
        while (&r % &p2).is_zero() {
            r /= &p2;
            f *= &pb;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let root = r.sqrt();
    if &root * &root == r {
        f *= root;
        r = BigInt::one();
    }
    (f, r)
}

impl Surd {
    /// Builds `(p + s*sqrt(d)) / q` and brings it to canonical form.
    pub fn new(
        p: impl Into<BigInt>,
        s: impl Into<BigInt>,
        d: impl Into<BigInt>,
        q: impl Into<BigInt>,
    ) -> Result<Self> {
        let (p, s, d, q) = (p.into(), s.into(), d.into(), q.into());
        if q.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if d.is_negative() {
            return Err(Error::InvalidInput(format!("negative radicand {d}")));
        }
        if s.is_zero() || d.is_zero() {
            return Ok(Self::reduced(p, BigInt::zero(), BigInt::zero(), q));
        }
        let (f, r) = extract_square(&d);
        let s = s * f;
        if r.is_one() {
            return Ok(Self::reduced(p + s, BigInt::zero(), BigInt::zero(), q));
        }
        Ok(Self::reduced(p, s, r, q))
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::reduced(n.into(), BigInt::zero(), BigInt::zero(), BigInt::one())
    }

    pub fn from_ratio(r: &BigRational) -> Self {
        Self::reduced(r.numer().clone(), BigInt::zero(), BigInt::zero(), r.denom().clone())
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// Assumes `d` is already canonical for this field (or zero) and `q != 0`.
    fn reduced(mut p: BigInt, mut s: BigInt, mut d: BigInt, mut q: BigInt) -> Self {
        if s.is_zero() || d.is_zero() {
            s = BigInt::zero();
            d = BigInt::zero();
        }
        if q.is_negative() {
            p = -p;
            s = -s;
            q = -q;
        }
        let g = p.gcd(&s).gcd(&q);
        if !g.is_one() && !g.is_zero() {
            p /= &g;
            s /= &g;
            q /= &g;
        }
        Surd { p, s, d, q }
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }
    pub fn s(&self) -> &BigInt {
        &self.s
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }
    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn is_rational(&self) -> bool {
        self.s.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.s.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational()
            .then(|| BigRational::new(self.p.clone(), self.q.clone()))
    }

    fn common_d(&self, other: &Surd) -> Result<BigInt> {
        match (self.d.is_zero(), other.d.is_zero()) {
            (true, _) => Ok(other.d.clone()),
            (_, true) => Ok(self.d.clone()),
            _ if self.d == other.d => Ok(self.d.clone()),
            _ => Err(Error::FieldMismatch(self.d.to_string(), other.d.to_string())),
        }
    }

    pub fn checked_add(&self, o: &Surd) -> Result<Surd> {
        let d = self.common_d(o)?;
        Ok(Self::reduced(
            &self.p * &o.q + &o.p * &self.q,
            &self.s * &o.q + &o.s * &self.q,
            d,
            &self.q * &o.q,
        ))
    }

    pub fn checked_sub(&self, o: &Surd) -> Result<Surd> {
        self.checked_add(&-o)
    }

    pub fn checked_mul(&self, o: &Surd) -> Result<Surd> {
        let d = self.common_d(o)?;
        Ok(Self::reduced(
            &self.p * &o.p + &self.s * &o.s * &d,
            &self.p * &o.s + &o.p * &self.s,
            d,
            &self.q * &o.q,
        ))
    }

    pub fn checked_div(&self, o: &Surd) -> Result<Surd> {
        self.checked_mul(&o.recip()?)
    }

    /// Galois conjugate `(P - S*sqrt(D)) / Q`.
    pub fn conj(&self) -> Surd {
        Surd {
            p: self.p.clone(),
            s: -&self.s,
            d: self.d.clone(),
            q: self.q.clone(),
        }
    }

    /// Field norm `x * conj(x)`, always rational.
    pub fn norm(&self) -> BigRational {
        BigRational::new(
            &self.p * &self.p - &self.s * &self.s * &self.d,
            &self.q * &self.q,
        )
    }

    pub fn recip(&self) -> Result<Surd> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = &self.p * &self.p - &self.s * &self.s * &self.d;
        Ok(Self::reduced(
            &self.p * &self.q,
            -&self.s * &self.q,
            self.d.clone(),
            n,
        ))
    }

    pub fn mul_int(&self, k: &BigInt) -> Surd {
        Self::reduced(&self.p * k, &self.s * k, self.d.clone(), self.q.clone())
    }

    pub fn add_int(&self, k: &BigInt) -> Surd {
        Self::reduced(&self.p + k * &self.q, self.s.clone(), self.d.clone(), self.q.clone())
    }

    pub fn mul_rational(&self, r: &BigRational) -> Surd {
        Self::reduced(
            &self.p * r.numer(),
            &self.s * r.numer(),
            self.d.clone(),
            &self.q * r.denom(),
        )
    }

    pub fn signum(&self) -> Ordering {
        sign_of(&self.p, &self.s, &self.d)
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Surd {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact comparison; fails only for operands from different fields.
    pub fn compare(&self, o: &Surd) -> Result<Ordering> {
        Ok(self.checked_sub(o)?.signum())
    }

    pub fn floor(&self) -> BigInt {
        floor_parts(&self.p, &self.s, &self.d, &self.q)
    }

    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    /// Nearest integer. A half-integer has no unique answer and is reported as [`Error::Tie`].
    pub fn rint(&self) -> Result<BigInt> {
        if self.is_rational() && self.q == BigInt::from(2) {
            return Err(Error::Tie(self.to_string()));
        }
        Ok(floor_parts(
            &(&self.p * 2 + &self.q),
            &(&self.s * 2),
            &self.d,
            &(&self.q * 2),
        ))
    }

    /// Fractional part `x - floor(x)`, in `[0, 1)`.
    pub fn frac(&self) -> Surd {
        self.add_int(&-self.floor())
    }

    /// `floor(x * 2^k)` for `k >= 0`.
    fn floor_scaled(&self, k: u64) -> BigInt {
        let f = BigInt::one() << k;
        floor_parts(&(&self.p * &f), &(&self.s * &f), &self.d, &self.q)
    }

    /// Correctly scaled double approximation with relative error near machine precision.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let mut k: u64 = 64;
        loop {
            let n = self.floor_scaled(k);
            let bits = n.bits();
            if bits >= 64 || k > 1 << 14 {
                return scale_pow2(n.to_f64().unwrap_or(f64::NAN), -(k as i64));
            }
            k += 72 - bits;
        }
    }

    /// Natural logarithm of a positive value, safe for magnitudes outside the f64 range.
    pub fn ln(&self) -> f64 {
        if !self.is_positive() {
            return f64::NAN;
        }
        let fl = self.floor();
        if fl.bits() < 900 {
            return self.to_f64().ln();
        }
        let shift = fl.bits() - 60;
        let top = (&fl >> shift).to_f64().unwrap_or(f64::NAN);
        top.ln() + shift as f64 * std::f64::consts::LN_2
    }

    /// Truncated decimal expansion with `digits` digits after the point.
    pub fn to_decimal(&self, digits: u32) -> String {
        let neg = self.is_negative();
        let a = self.abs();
        let scale = BigInt::from(10u32).pow(digits);
        let n = floor_parts(&(&a.p * &scale), &(&a.s * &scale), &a.d, &a.q);
        let mut body = n.to_string();
        let w = digits as usize + 1;
        if body.len() < w {
            body = format!("{}{}", "0".repeat(w - body.len()), body);
        }
        let (int, frac) = body.split_at(body.len() - digits as usize);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }
}

fn scale_pow2(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    x * 2f64.powi(e as i32)
}

/// JSON number when it fits in an `i64`, decimal string otherwise.
pub(crate) fn big_json(n: &BigInt) -> serde_json::Value {
    match n.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(n.to_string()),
    }
}

/// `serialize_with` adapter writing a `BigInt` through [`big_json`].
pub(crate) fn ser_big<S: serde::Serializer>(n: &BigInt, ser: S) -> std::result::Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&big_json(n), ser)
}

impl serde::Serialize for Surd {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("Surd", 5)?;
        st.serialize_field("P", &big_json(&self.p))?;
        st.serialize_field("S", &big_json(&self.s))?;
        st.serialize_field("D", &big_json(&self.d))?;
        st.serialize_field("Q", &big_json(&self.q))?;
        st.serialize_field("decimal", &self.to_decimal(30))?;
        st.end()
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            if self.q.is_one() {
                write!(f, "{}", self.p)
            } else {
                write!(f, "{}/{}", self.p, self.q)
            }
        } else {
            write!(f, "({} + {}*sqrt({}))/{}", self.p, self.s, self.d, self.q)
        }
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Surd[{}] ~ {}", self, self.to_f64())
    }
}

impl PartialOrd for Surd {
    /// `None` when the operands come from different fields.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.compare(other).ok()
    }
}

impl From<i64> for Surd {
    fn from(n: i64) -> Self {
        Surd::from_int(n)
    }
}

impl From<BigInt> for Surd {
    fn from(n: BigInt) -> Self {
        Surd::from_int(n)
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            p: -&self.p,
            s: -&self.s,
            d: self.d.clone(),
            q: self.q.clone(),
        }
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        -&self
    }
}

// Operator forms panic on mixed fields or division by zero; use the `checked_*` methods
// when operands come from untrusted input.
macro_rules! forward_op {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&Surd> for &Surd {
            type Output = Surd;
            fn $m(self, o: &Surd) -> Surd {
                self.$checked(o).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Surd> for Surd {
            type Output = Surd;
            fn $m(self, o: Surd) -> Surd {
                (&self).$m(&o)
            }
        }
        impl $tr<&Surd> for Surd {
            type Output = Surd;
            fn $m(self, o: &Surd) -> Surd {
                (&self).$m(o)
            }
        }
        impl $tr<Surd> for &Surd {
            type Output = Surd;
            fn $m(self, o: Surd) -> Surd {
                self.$m(&o)
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);
forward_op!(Div, div, checked_div);

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: i64, s: i64, d: i64, q: i64) -> Surd {
        Surd::new(p, s, d, q).unwrap()
    }

    fn golden() -> Surd {
        s(-1, 1, 5, 2)
    }

    #[test]
    fn normalizes_rational_and_square_factors() {
        let x = s(2, 0, 5, 4);
        assert_eq!((x.p(), x.s(), x.d(), x.q()), (&1.into(), &0.into(), &0.into(), &2.into()));
        let y = s(-6, 2, 13, 4);
        assert_eq!((y.p(), y.s(), y.d(), y.q()), (&(-3).into(), &1.into(), &13.into(), &2.into()));
        let z = s(0, 1, 12, 1);
        assert_eq!((z.s(), z.d()), (&2.into(), &3.into()));
        let w = s(1, 3, 49, 2);
        assert!(w.is_rational());
        assert_eq!(w, Surd::from_int(11));
        let neg = s(1, 1, 2, -3);
        assert_eq!(neg.q(), &3.into());
        assert_eq!(neg.p(), &(-1).into());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Surd::new(1, 1, 5, 0), Err(Error::DivisionByZero)));
        assert!(matches!(Surd::new(1, 1, -5, 1), Err(Error::InvalidInput(_))));
        let a = s(0, 1, 2, 1);
        let b = s(0, 1, 3, 1);
        assert!(matches!(a.checked_add(&b), Err(Error::FieldMismatch(_, _))));
        assert!(a.partial_cmp(&b).is_none());
        assert!(matches!(Surd::zero().recip(), Err(Error::DivisionByZero)));
    }

    #[test]
    fn compares_exactly() {
        let half = Surd::new(1, 0, 0, 2).unwrap();
        assert!(golden() > half);
        assert!(s(-1, 1, 2, 1) < half);
        assert!(golden() < Surd::one());
        assert_eq!(golden().compare(&golden()).unwrap(), Ordering::Equal);
    }

    #[test]
    fn floor_and_rint() {
        assert_eq!(golden().rint().unwrap(), 1.into());
        assert_eq!(s(-1, 1, 2, 1).rint().unwrap(), 0.into());
        assert_eq!(golden().mul_int(&7.into()).rint().unwrap(), 4.into());
        assert_eq!(s(-1, -1, 5, 2).floor(), (-2).into());
        assert_eq!(s(-1, -1, 5, 2).ceil(), (-1).into());
        assert!(matches!(Surd::new(3, 0, 0, 2).unwrap().rint(), Err(Error::Tie(_))));
        assert_eq!(Surd::new(7, 0, 0, 3).unwrap().rint().unwrap(), 2.into());
        assert_eq!(Surd::new(-7, 0, 0, 2).unwrap().floor(), (-4).into());
    }

    #[test]
    fn field_arithmetic() {
        let g = golden();
        // g^2 + g - 1 = 0
        let r = &(&g * &g) + &g - Surd::one();
        assert!(r.is_zero());
        let inv = g.recip().unwrap();
        assert_eq!(inv, g.add_int(&1.into()));
        assert_eq!(&g / &g, Surd::one());
        assert_eq!(g.norm(), BigRational::new((-1).into(), 1.into()));
        assert_eq!(g.conj(), s(-1, -1, 5, 2));
    }

    #[test]
    fn float_and_decimal() {
        let g = golden();
        assert!((g.to_f64() - 0.618_033_988_749_894_8).abs() <= 1.2e-16);
        assert_eq!(g.to_decimal(30), "0.618033988749894848204586834365");
        assert_eq!((-&g).to_decimal(5), "-0.61803");
        // tiny value with heavy cancellation: g^40
        let mut t = Surd::one();
        for _ in 0..40 {
            t = &t * &g;
        }
        let expected = 0.618_033_988_749_894_8f64.powi(40);
        assert!((t.to_f64() / expected - 1.0).abs() < 1e-13);
        assert!((t.ln() - expected.ln()).abs() < 1e-12);
    }

    #[test]
    fn frac_is_in_unit_interval() {
        let x = s(17, -5, 7, 3);
        let f = x.frac();
        assert!(!f.is_negative());
        assert!(f < Surd::one());
        assert_eq!(f.add_int(&x.floor()), x);
    }
}
