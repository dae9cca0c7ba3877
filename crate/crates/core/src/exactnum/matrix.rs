use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::surd::big_json;
use super::Surd;
use crate::error::{Error, Result};

/// Integer vector `(k1, k2)`, used for Fourier harmonics.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IVec2 {
    pub k1: BigInt,
    pub k2: BigInt,
}

impl IVec2 {
    pub fn new(k1: impl Into<BigInt>, k2: impl Into<BigInt>) -> Self {
        IVec2 {
            k1: k1.into(),
            k2: k2.into(),
        }
    }

    pub fn l1_norm(&self) -> BigInt {
        self.k1.abs() + self.k2.abs()
    }

    pub fn is_zero(&self) -> bool {
        self.k1.is_zero() && self.k2.is_zero()
    }

    /// Membership in the half-lattice `k2 > 0` or `k2 = 0, k1 >= 0`.
    pub fn in_half_lattice(&self) -> bool {
        self.k2.is_positive() || (self.k2.is_zero() && !self.k1.is_negative())
    }

    /// The representative of `{k, -k}` lying in the half-lattice.
    pub fn to_half_lattice(&self) -> IVec2 {
        if self.in_half_lattice() {
            self.clone()
        } else {
            -self
        }
    }

    pub fn content(&self) -> BigInt {
        self.k1.gcd(&self.k2)
    }

    /// Primitive lattice vector (gcd of components equal to 1).
    pub fn is_primitive(&self) -> bool {
        self.content().is_one()
    }

    pub fn scale(&self, c: &BigInt) -> IVec2 {
        IVec2 {
            k1: &self.k1 * c,
            k2: &self.k2 * c,
        }
    }

    pub fn det(&self, o: &IVec2) -> BigInt {
        &self.k1 * &o.k2 - &self.k2 * &o.k1
    }

    /// `<k, (x, y)>` for a vector with entries in a quadratic field.
    pub fn dot_surd(&self, v: &(Surd, Surd)) -> Surd {
        &v.0.mul_int(&self.k1) + &v.1.mul_int(&self.k2)
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [
            self.k1.to_f64().unwrap_or(f64::NAN),
            self.k2.to_f64().unwrap_or(f64::NAN),
        ]
    }
}

impl std::ops::Neg for &IVec2 {
    type Output = IVec2;
    fn neg(self) -> IVec2 {
        IVec2 {
            k1: -&self.k1,
            k2: -&self.k2,
        }
    }
}

impl serde::Serialize for IVec2 {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&[big_json(&self.k1), big_json(&self.k2)], ser)
    }
}

impl fmt::Display for IVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k1, self.k2)
    }
}

impl fmt::Debug for IVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Integer 2x2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IMat2 {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl IMat2 {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Self {
        IMat2 {
            a: a.into(),
            b: b.into(),
            c: c.into(),
            d: d.into(),
        }
    }

    pub fn identity() -> Self {
        IMat2::new(1, 0, 0, 1)
    }

    /// The continued-fraction step matrix `[[a, 1], [1, 0]]`.
    pub fn cf_step(a: u64) -> Self {
        IMat2::new(a, 1, 1, 0)
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn mul(&self, o: &IMat2) -> IMat2 {
        IMat2 {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn apply(&self, v: &IVec2) -> IVec2 {
        IVec2 {
            k1: &self.a * &v.k1 + &self.b * &v.k2,
            k2: &self.c * &v.k1 + &self.d * &v.k2,
        }
    }

    pub fn apply_surd(&self, v: &(Surd, Surd)) -> (Surd, Surd) {
        (
            &v.0.mul_int(&self.a) + &v.1.mul_int(&self.b),
            &v.0.mul_int(&self.c) + &v.1.mul_int(&self.d),
        )
    }

    pub fn transpose(&self) -> IMat2 {
        IMat2 {
            a: self.a.clone(),
            b: self.c.clone(),
            c: self.b.clone(),
            d: self.d.clone(),
        }
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    /// Exact inverse of a unimodular matrix.
    pub fn inverse(&self) -> Result<IMat2> {
        let det = self.det();
        if !det.abs().is_one() {
            return Err(Error::Invariant(format!("matrix {self} has determinant {det}")));
        }
        Ok(IMat2 {
            a: &self.d * &det,
            b: -&self.b * &det,
            c: -&self.c * &det,
            d: &self.a * &det,
        })
    }

    /// Integer power; negative exponents use the inverse.
    pub fn pow(&self, n: i64) -> Result<IMat2> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = IMat2::identity();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            sq = sq.mul(&sq);
            e >>= 1;
        }
        Ok(acc)
    }

    /// The harmonic-shift matrix `U = sigma * (T^-1)^T` with `sigma = (-1)^m`, which for
    /// `det T = sigma` is just `[[d, -c], [-b, a]]`.
    pub fn u_from_t(t: &IMat2, m: usize) -> Result<IMat2> {
        let sigma = if m.is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
        let det = t.det();
        if !det.abs().is_one() {
            return Err(Error::Invariant(format!("T = {t} is not unimodular (det {det})")));
        }
        if det != sigma {
            return Err(Error::Invariant(format!(
                "det T = {det} disagrees with (-1)^{m} for period length {m}"
            )));
        }
        Ok(IMat2 {
            a: t.d.clone(),
            b: -&t.c,
            c: -&t.b,
            d: t.a.clone(),
        })
    }
}

impl serde::Serialize for IMat2 {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = [[big_json(&self.a), big_json(&self.b)], [big_json(&self.c), big_json(&self.d)]];
        serde::Serialize::serialize(&rows, ser)
    }
}

impl fmt::Display for IMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl fmt::Debug for IMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn u_from_t_examples() {
        let t = IMat2::new(3, 1, 1, 0);
        assert_eq!(IMat2::u_from_t(&t, 1).unwrap(), IMat2::new(0, -1, -1, 3));
        let t = IMat2::new(4, 1, 3, 1);
        assert_eq!(IMat2::u_from_t(&t, 2).unwrap(), IMat2::new(1, -3, -1, 4));
        assert_eq!(IMat2::u_from_t(&IMat2::identity(), 2).unwrap(), IMat2::identity());
        assert!(IMat2::u_from_t(&IMat2::new(2, 0, 0, 1), 0).is_err());
        assert!(IMat2::u_from_t(&IMat2::identity(), 1).is_err());
    }

    #[test]
    fn half_lattice() {
        assert!(IVec2::new(-4, 7).in_half_lattice());
        assert!(IVec2::new(3, 0).in_half_lattice());
        assert!(!IVec2::new(-3, 0).in_half_lattice());
        assert_eq!(IVec2::new(2, -1).to_half_lattice(), IVec2::new(-2, 1));
    }

    #[test]
    fn powers() {
        let t = IMat2::new(1, 1, 1, 0);
        assert_eq!(t.pow(5).unwrap(), IMat2::new(8, 5, 5, 3));
        assert_eq!(t.pow(-3).unwrap().mul(&t.pow(3).unwrap()), IMat2::identity());
    }

    fn unimodular() -> impl Strategy<Value = (IMat2, usize)> {
        prop::collection::vec(1u64..12, 1..8).prop_map(|qs| {
            let t = qs
                .iter()
                .fold(IMat2::identity(), |acc, &a| acc.mul(&IMat2::cf_step(a)));
            (t, qs.len())
        })
    }

    proptest! {
        #[test]
        fn u_is_signed_inverse_transpose((t, m) in unimodular()) {
            let u = IMat2::u_from_t(&t, m).unwrap();
            let sigma = if m % 2 == 0 { 1 } else { -1 };
            let inv_t = t.inverse().unwrap().transpose();
            let expect = IMat2 {
                a: &inv_t.a * sigma, b: &inv_t.b * sigma,
                c: &inv_t.c * sigma, d: &inv_t.d * sigma,
            };
            prop_assert_eq!(&u, &expect);
            prop_assert_eq!(u.det(), t.det());
        }

        #[test]
        fn inverse_roundtrip((t, _m) in unimodular()) {
            prop_assert_eq!(t.mul(&t.inverse().unwrap()), IMat2::identity());
        }
    }
}
