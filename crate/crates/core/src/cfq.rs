//! Eventually periodic continued fractions, their quadratic-surd values and the spectral data
//! (`T`, `U`, `lambda`, eigenvectors) of the period matrix.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{IMat2, IVec2, Surd};

/// `[0; b1, ..., br, (a1, ..., am)]` with the overline on the period.
///
/// Always stored in canonical form: minimal period and minimal pre-period. A pre-period whose
/// last entry equals the last period entry is absorbed into the period by rotation.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PeriodicCf {
    pre: Vec<u64>,
    per: Vec<u64>,
}

/// Shape of the periodic tail, as far as the closed-form separation results go.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum RatioClass {
    /// `(a)`
    Metallic { a: u64 },
    /// `(1, b)` with `b >= 2`
    GoldenColored { b: u64 },
    /// `(a, b)` with `2 <= a < b`
    MetallicColored { a: u64, b: u64 },
    Other,
}

impl PeriodicCf {
    pub fn new(pre: Vec<u64>, per: Vec<u64>) -> Result<Self> {
        if per.is_empty() {
            return Err(Error::InvalidInput("empty period".into()));
        }
        if pre.iter().chain(&per).any(|&a| a == 0) {
            return Err(Error::InvalidInput("partial quotients must be >= 1".into()));
        }
        let mut cf = PeriodicCf { pre, per };
        cf.canonicalize();
        Ok(cf)
    }

    pub fn purely_periodic(per: Vec<u64>) -> Result<Self> {
        Self::new(Vec::new(), per)
    }

    /// `(a)`, the metallic ratio of order `a`.
    pub fn metallic(a: u64) -> Result<Self> {
        Self::purely_periodic(vec![a])
    }

    /// `(a, b)`.
    pub fn two_periodic(a: u64, b: u64) -> Result<Self> {
        Self::purely_periodic(vec![a, b])
    }

    fn canonicalize(&mut self) {
        let n = self.per.len();
        if let Some(m) = (1..=n).find(|&m| {
            n.is_multiple_of(m) && self.per.chunks(m).all(|c| c == &self.per[..m])
        }) {
            self.per.truncate(m);
        }
        while let (Some(&b), Some(&a)) = (self.pre.last(), self.per.last()) {
            if a != b {
                break;
            }
            self.pre.pop();
            self.per.rotate_right(1);
        }
    }

    pub fn pre(&self) -> &[u64] {
        &self.pre
    }

    pub fn per(&self) -> &[u64] {
        &self.per
    }

    pub fn period_len(&self) -> usize {
        self.per.len()
    }

    pub fn is_purely_periodic(&self) -> bool {
        self.pre.is_empty()
    }

    /// The purely periodic number `(a1, ..., am)` sharing this period.
    pub fn tail(&self) -> PeriodicCf {
        PeriodicCf {
            pre: Vec::new(),
            per: self.per.clone(),
        }
    }

    /// Partial quotient `a_j` for `j >= 1`.
    pub fn quotient(&self, j: usize) -> u64 {
        assert!(j >= 1, "partial quotients are indexed from 1");
        let r = self.pre.len();
        if j <= r {
            self.pre[j - 1]
        } else {
            self.per[(j - r - 1) % self.per.len()]
        }
    }

    pub fn class(&self) -> RatioClass {
        match self.per.as_slice() {
            [a] => RatioClass::Metallic { a: *a },
            [1, b] if *b >= 2 => RatioClass::GoldenColored { b: *b },
            [a, b] if a < b => RatioClass::MetallicColored { a: *a, b: *b },
            _ => RatioClass::Other,
        }
    }

    /// Product of step matrices over the period.
    pub fn period_matrix(&self) -> IMat2 {
        product(&self.per)
    }

    /// Product of step matrices over the pre-period (identity when there is none).
    pub fn prefix_matrix(&self) -> IMat2 {
        product(&self.pre)
    }
}

fn product(qs: &[u64]) -> IMat2 {
    qs.iter()
        .fold(IMat2::identity(), |acc, &a| acc.mul(&IMat2::cf_step(a)))
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

impl fmt::Display for PeriodicCf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pre.is_empty() {
            write!(f, "per:{}", join(&self.per))
        } else {
            write!(f, "pre:{};per:{}", join(&self.pre), join(&self.per))
        }
    }
}

impl fmt::Debug for PeriodicCf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| Error::Parse(format!("bad partial quotient {t:?}: {e}")))
        })
        .collect()
}

impl FromStr for PeriodicCf {
    type Err = Error;

    /// Accepts `per:a1,...,am` or `pre:b1,...,br;per:a1,...,am`.
    fn from_str(s: &str) -> Result<Self> {
        let mut pre = Vec::new();
        let mut per = None;
        for part in s.trim().split(';') {
            let (key, val) = part
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("expected key:value in {part:?}")))?;
            match key.trim() {
                "pre" => pre = parse_list(val)?,
                "per" => per = Some(parse_list(val)?),
                k => return Err(Error::Parse(format!("unknown section {k:?}"))),
            }
        }
        let per = per.ok_or_else(|| Error::Parse(format!("no period in {s:?}")))?;
        PeriodicCf::new(pre, per).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Exact value in `(0, 1)` of the continued fraction.
pub fn cf_to_surd(cf: &PeriodicCf) -> Surd {
    let t = cf.period_matrix();
    // purely periodic part solves b x^2 + (a - d) x - c = 0, positive root
    let amd = &t.a - &t.d;
    let disc = &amd * &amd + BigInt::from(4) * &t.b * &t.c;
    let tail = Surd::new(-amd, 1, disc, BigInt::from(2) * &t.b)
        .expect("period matrix has positive b");
    if cf.is_purely_periodic() {
        return tail;
    }
    let s = cf.prefix_matrix();
    let num = tail.mul_int(&s.d).add_int(&s.c);
    let den = tail.mul_int(&s.b).add_int(&s.a);
    &num / &den
}

/// Default Gauss-map step budget for a radicand `d`.
pub fn default_max_iter(d: &BigInt) -> usize {
    10 * d.bits() as usize + 64
}

/// Continued fraction of an irrational quadratic surd in `(0, 1)`, found by running the Gauss
/// map until a canonical state repeats.
pub fn surd_to_cf(x: &Surd, max_iter: Option<usize>) -> Result<PeriodicCf> {
    if x.is_rational() {
        return Err(Error::InvalidInput(format!("{x} is rational")));
    }
    if !x.is_positive() || x >= &Surd::one() {
        return Err(Error::InvalidInput(format!("{x} is not in (0, 1)")));
    }
    let limit = max_iter.unwrap_or_else(|| default_max_iter(x.d()));
    let mut seen: HashMap<Surd, usize> = HashMap::new();
    let mut quotients = Vec::new();
    let mut cur = x.clone();
    seen.insert(cur.clone(), 0);
    for step in 1..=limit {
        let y = cur.recip()?;
        let a = y.floor();
        let a = a
            .to_u64()
            .ok_or_else(|| Error::Overflow(format!("partial quotient {a}")))?;
        quotients.push(a);
        cur = y.add_int(&BigInt::from(-(a as i128)));
        if let Some(&k) = seen.get(&cur) {
            let per = quotients[k..].to_vec();
            quotients.truncate(k);
            return PeriodicCf::new(quotients, per);
        }
        seen.insert(cur.clone(), step);
    }
    Err(Error::IterationLimit(limit))
}

/// Convergent denominators and numerators `(q_j, p_j)` for `j = -1, 0, ..., upto`.
pub fn convergents(cf: &PeriodicCf, upto: usize) -> Vec<(BigInt, BigInt)> {
    let mut out = vec![(BigInt::zero(), BigInt::one()), (BigInt::one(), BigInt::zero())];
    for j in 1..=upto {
        let a = BigInt::from(cf.quotient(j));
        let (q1, p1) = out[j].clone();
        let (q2, p2) = &out[j - 1];
        out.push((&a * &q1 + q2, &a * &p1 + p2));
    }
    out
}

/// `(q_j, p_j)` for a single index `j >= -1`.
pub fn convergent(cf: &PeriodicCf, j: i64) -> (BigInt, BigInt) {
    assert!(j >= -1, "convergents start at j = -1");
    convergents(cf, j.max(0) as usize)[(j + 1) as usize].clone()
}

/// Period matrix data of a quadratic irrational frequency ratio `Omega`.
///
/// `T omega = lambda omega` for `omega = (1, Omega)`, `det T = sigma = (-1)^m`, and
/// `U = sigma (T^-1)^T` shifts quasi-resonant harmonics by one period.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub cf: PeriodicCf,
    pub omega: Surd,
    /// Period matrix, conjugated by the prefix matrix when there is a pre-period.
    pub t: IMat2,
    pub u: IMat2,
    pub prefix: IMat2,
    pub lambda: Surd,
    pub sigma: i64,
    pub m: usize,
    /// `(-b Omega, c)`, eigenvector of `T` for `sigma / lambda`.
    pub v2: (Surd, Surd),
    /// `(c, b Omega)`, eigenvector of `U` for `sigma / lambda`.
    pub u1: (Surd, Surd),
    /// `(-Omega, 1)`, eigenvector of `U` for `lambda`.
    pub u2: (Surd, Surd),
}

impl SpectralData {
    pub fn omega_vec(&self) -> (Surd, Surd) {
        (Surd::one(), self.omega.clone())
    }

    /// `<k, omega>` exactly.
    pub fn small_divisor(&self, k: &IVec2) -> Surd {
        k.dot_surd(&self.omega_vec())
    }

    pub fn lambda_f64(&self) -> f64 {
        self.lambda.to_f64()
    }

    pub fn omega_f64(&self) -> f64 {
        self.omega.to_f64()
    }
}

/// Builds and self-checks the spectral data for `cf`.
pub fn build_spectral(cf: &PeriodicCf) -> Result<SpectralData> {
    let m = cf.period_len();
    let prefix = cf.prefix_matrix();
    let t0 = cf.period_matrix();
    let t = prefix.mul(&t0).mul(&prefix.inverse()?);
    let sigma: i64 = if m.is_multiple_of(2) { 1 } else { -1 };
    let omega = cf_to_surd(cf);
    let u = IMat2::u_from_t(&t, m)?;
    if t.b.is_zero() || t.c.is_zero() {
        return Err(Error::Invariant(format!("period matrix {t} has a zero off-diagonal")));
    }
    let lambda = omega.mul_int(&t.b).add_int(&t.a);
    let b_omega = omega.mul_int(&t.b);
    let v2 = (-&b_omega, Surd::from_int(t.c.clone()));
    let u1 = (Surd::from_int(t.c.clone()), b_omega);
    let u2 = (-&omega, Surd::one());
    let sd = SpectralData {
        cf: cf.clone(),
        omega,
        t,
        u,
        prefix,
        lambda,
        sigma,
        m,
        v2,
        u1,
        u2,
    };
    check_spectral(&sd)?;
    Ok(sd)
}

fn scale_vec(v: &(Surd, Surd), s: &Surd) -> (Surd, Surd) {
    (&v.0 * s, &v.1 * s)
}

fn check_spectral(sd: &SpectralData) -> Result<()> {
    let fail = |what: &str| Err(Error::Invariant(format!("{what} fails for {}", sd.cf)));
    let w = sd.omega_vec();
    if sd.t.apply_surd(&w) != scale_vec(&w, &sd.lambda) {
        return fail("T omega = lambda omega");
    }
    let lhs = &sd.lambda * &sd.lambda;
    let rhs = sd.lambda.mul_int(&sd.t.trace()).add_int(&BigInt::from(-sd.sigma));
    if lhs != rhs {
        return fail("lambda^2 = tr(T) lambda - sigma");
    }
    if sd.t.det() != BigInt::from(sd.sigma) {
        return fail("det T = sigma");
    }
    if sd.u.apply_surd(&sd.u2) != scale_vec(&sd.u2, &sd.lambda) {
        return fail("U u2 = lambda u2");
    }
    let inv = Surd::from_int(sd.sigma) / &sd.lambda;
    if sd.t.apply_surd(&sd.v2) != scale_vec(&sd.v2, &inv) {
        return fail("T v2 = (sigma/lambda) v2");
    }
    if sd.u.apply_surd(&sd.u1) != scale_vec(&sd.u1, &inv) {
        return fail("U u1 = (sigma/lambda) u1");
    }
    let r = sd.cf.pre().len();
    let cv = convergents(&sd.cf, r + 3 + sd.m);
    for j in r..=r + 3 {
        let (q, p) = &cv[j + 1];
        let (qm, pm) = &cv[j + 1 + sd.m];
        if sd.t.apply(&IVec2::new(q.clone(), p.clone())) != IVec2::new(qm.clone(), pm.clone()) {
            return fail("T w(j) = w(j + m)");
        }
        if sd.u.apply(&IVec2::new(-p, q.clone())) != IVec2::new(-pm, qm.clone()) {
            return fail("U v(j) = v(j + m)");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cf(s: &str) -> PeriodicCf {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(cf("per:1,1,1"), cf("per:1"));
        assert_eq!(cf("per:2,3,2,3"), cf("per:2,3"));
        assert_eq!(cf("pre:2;per:3,2"), cf("per:2,3"));
        assert_eq!(cf("pre:5,1,3;per:1,3").pre(), &[5]);
        assert_eq!(cf("pre:5,1,3;per:1,3").per(), &[1, 3]);
        assert_eq!(cf("pre:7,2;per:2").to_string(), "pre:7;per:2");
    }

    #[test]
    fn parse_errors() {
        assert!("per:".parse::<PeriodicCf>().is_err());
        assert!("pre:1".parse::<PeriodicCf>().is_err());
        assert!("per:0,1".parse::<PeriodicCf>().is_err());
        assert!("foo:1".parse::<PeriodicCf>().is_err());
        assert!("per:1,x".parse::<PeriodicCf>().is_err());
    }

    #[test]
    fn closed_forms() {
        for a in 1..20u64 {
            let want = Surd::new(-(a as i64), 1, a * a + 4, 2).unwrap();
            assert_eq!(cf_to_surd(&PeriodicCf::metallic(a).unwrap()), want);
        }
        for (a, b) in [(1u64, 2u64), (2, 3), (3, 7), (4, 9)] {
            let ab = (a * b) as i64;
            let want = Surd::new(-ab, 1, ab * ab + 4 * ab, 2 * a as i64).unwrap();
            assert_eq!(cf_to_surd(&PeriodicCf::two_periodic(a, b).unwrap()), want);
        }
        // [0; 2, (1)] = 1 / (2 + golden)
        let g = cf_to_surd(&cf("per:1"));
        let want = (g.add_int(&2.into())).recip().unwrap();
        assert_eq!(cf_to_surd(&cf("pre:2;per:1")), want);
    }

    #[test]
    fn gauss_map_round_trip() {
        for s in ["per:1", "per:2", "per:1,3", "per:1,2,2", "pre:4,1;per:2,5", "pre:3;per:7,1,1"] {
            let c = cf(s);
            let x = cf_to_surd(&c);
            assert_eq!(surd_to_cf(&x, None).unwrap(), c, "{s}");
        }
        let sqrt2m1 = Surd::new(-1, 1, 2, 1).unwrap();
        assert_eq!(surd_to_cf(&sqrt2m1, None).unwrap(), cf("per:2"));
        assert!(surd_to_cf(&Surd::from_int(0), None).is_err());
        assert!(surd_to_cf(&Surd::new(1, 1, 5, 2).unwrap(), None).is_err());
    }

    #[test]
    fn convergent_recurrence_matches_matrix_product() {
        let c = cf("pre:2;per:1,3");
        let cv = convergents(&c, 12);
        let mut w = IMat2::identity();
        for j in 1..=12 {
            w = w.mul(&IMat2::cf_step(c.quotient(j)));
            assert_eq!(w.a, cv[j + 1].0);
            assert_eq!(w.b, cv[j].0);
            assert_eq!(w.c, cv[j + 1].1);
            assert_eq!(w.d, cv[j].1);
        }
        assert_eq!(convergent(&c, -1), (0.into(), 1.into()));
        assert_eq!(convergent(&c, 0), (1.into(), 0.into()));
    }

    #[test]
    fn spectral_data_for_known_families() {
        let sd = build_spectral(&PeriodicCf::metallic(3).unwrap()).unwrap();
        assert_eq!(sd.t, IMat2::new(3, 1, 1, 0));
        assert_eq!(sd.u, IMat2::new(0, -1, -1, 3));
        assert_eq!(sd.lambda, sd.omega.recip().unwrap());
        assert_eq!(sd.sigma, -1);

        let sd = build_spectral(&PeriodicCf::two_periodic(3, 1).unwrap()).unwrap();
        assert_eq!(sd.t, IMat2::new(4, 3, 1, 1));

        let sd = build_spectral(&PeriodicCf::two_periodic(2, 5).unwrap()).unwrap();
        assert_eq!(sd.t, IMat2::new(11, 2, 5, 1));
        assert_eq!(sd.u, IMat2::new(1, -5, -2, 11));
        let l2 = &sd.lambda * &sd.lambda;
        assert_eq!(l2, sd.lambda.mul_int(&12.into()).add_int(&(-1).into()));

        let sd = build_spectral(&cf("pre:3,1;per:2,5")).unwrap();
        assert_eq!(sd.t.det(), 1.into());
    }

    #[test]
    fn classes() {
        assert_eq!(cf("per:4").class(), RatioClass::Metallic { a: 4 });
        assert_eq!(cf("per:1,6").class(), RatioClass::GoldenColored { b: 6 });
        assert_eq!(cf("per:2,5").class(), RatioClass::MetallicColored { a: 2, b: 5 });
        assert_eq!(cf("per:5,2").class(), RatioClass::Other);
        assert_eq!(cf("per:1,2,2").class(), RatioClass::Other);
    }
}
