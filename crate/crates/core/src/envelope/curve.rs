use serde::Serialize;

use crate::error::{Error, Result};

/// One asymptotic curve `g*_{s(q,n)}` in `u = ln eps`: `mult * amp * cosh((u - u0) / 4)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoshCurve {
    pub q: u64,
    pub n: i64,
    /// `c` for the multiple `c * s(q, n)`; 1 for essential harmonics.
    pub mult: u32,
    /// `ln eps*` where the curve attains its minimum.
    pub u0: f64,
    /// `sqrt(gamma~*_q)`, the minimum value of the essential curve.
    pub amp: f64,
}

/// `ln |e^x - e^y|` without overflow.
pub(crate) fn ln_abs_diff(x: f64, y: f64) -> f64 {
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (-(lo - hi).exp_m1()).ln()
}

impl CoshCurve {
    pub fn height(&self) -> f64 {
        self.mult as f64 * self.amp
    }

    pub fn value(&self, u: f64) -> f64 {
        self.height() * ((u - self.u0) / 4.0).cosh()
    }

    pub fn slope(&self, u: f64) -> f64 {
        self.height() * ((u - self.u0) / 4.0).sinh() / 4.0
    }

    pub fn curvature(&self, u: f64) -> f64 {
        self.value(u) / 16.0
    }

    /// Unique crossing point of two distinct curves, if any.
    ///
    /// The difference of two curves is `alpha e^{u/4} + beta e^{-u/4}`, which vanishes once
    /// exactly when `alpha` and `beta` have opposite signs.
    pub fn intersect(&self, other: &CoshCurve) -> Result<Option<f64>> {
        let (l1, l2) = (self.height().ln(), other.height().ln());
        let (a1, a2) = (l1 - self.u0 / 4.0, l2 - other.u0 / 4.0);
        let (b1, b2) = (l1 + self.u0 / 4.0, l2 + other.u0 / 4.0);
        if a1 == a2 && b1 == b2 {
            return Err(Error::Invariant(format!(
                "curves (q={}, n={}) and (q={}, n={}) coincide",
                self.q, self.n, other.q, other.n
            )));
        }
        if (a1 > a2) == (b1 > b2) || a1 == a2 || b1 == b2 {
            return Ok(None);
        }
        Ok(Some(2.0 * (ln_abs_diff(b1, b2) - ln_abs_diff(a1, a2))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(u0: f64, amp: f64) -> CoshCurve {
        CoshCurve {
            q: 1,
            n: 0,
            mult: 1,
            u0,
            amp,
        }
    }

    /// Closed form in terms of `Z = (eps2/eps1)^{1/4}`, `W = (g2/g1)^{1/2} >= 1`:
    /// a crossing iff `Z < 1/W` or `Z > W`, at `eps1 (Z (W Z - 1) / (Z - W))^2`.
    fn zw_crossing(c1: &CoshCurve, c2: &CoshCurve) -> Option<f64> {
        let (c1, c2) = if c1.height() <= c2.height() { (c1, c2) } else { (c2, c1) };
        let z = ((c2.u0 - c1.u0) / 4.0).exp();
        let w = c2.height() / c1.height();
        if z < 1.0 / w || z > w {
            let x = z * (w * z - 1.0) / (z - w);
            Some(c1.u0 + 2.0 * x.ln())
        } else {
            None
        }
    }

    #[test]
    fn crossing_matches_closed_form_and_values() {
        let cases = [
            (c(0.0, 1.0), c(3.0, 1.2)),
            (c(-2.0, 2.0), c(5.0, 1.0)),
            (c(1.0, 1.0), c(1.5, 3.0)),
            (c(-30.0, 1.0), c(-24.0, 1.0)),
            (c(0.0, 1.0), c(0.1, 1.0)),
        ];
        for (x, y) in cases {
            let got = x.intersect(&y).unwrap();
            let want = zw_crossing(&x, &y);
            assert_eq!(got.is_some(), want.is_some(), "{x:?} {y:?}");
            if let (Some(g), Some(w)) = (got, want) {
                assert!((g - w).abs() < 1e-10, "{g} vs {w}");
                assert!((x.value(g) / y.value(g) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn equal_amplitudes_cross_at_midpoint() {
        let u = c(-10.0, 1.5).intersect(&c(-2.0, 1.5)).unwrap().unwrap();
        assert!((u + 6.0).abs() < 1e-12);
    }

    #[test]
    fn identical_curves_are_rejected() {
        assert!(c(0.5, 2.0).intersect(&c(0.5, 2.0)).is_err());
    }

    #[test]
    fn far_apart_curves_stay_finite() {
        let u = c(-400.0, 1.0).intersect(&c(400.0, 1.0)).unwrap().unwrap();
        assert!(u.abs() < 1e-9);
    }
}
