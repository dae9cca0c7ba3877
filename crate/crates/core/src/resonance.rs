//! Quasi-resonant harmonics `k0(q) = (-rint(q Omega), q)`, their exact limit numerators and the
//! separation constants `B0`, `B1`.
//!
//! The catalog scan is complete: for a requested cap on the normalized numerator it walks `q`
//! until a proven lower bound on `gamma*_q` exceeds the cap, so every primitive resonance under
//! the cap is present.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::cfq::{convergents, SpectralData};
use crate::error::{Error, Result};
use crate::exactnum::{floor_parts, sign_of, IVec2, Surd};

/// Refuse to scan further than this many `q` in a single catalog.
const MAX_SCAN: u64 = 50_000_000;

/// One primitive quasi-resonance `k0(q)`.
#[derive(Clone, Debug)]
pub struct ResonanceRecord {
    pub q: u64,
    pub p: u64,
    pub k0: IVec2,
    /// `q Omega - p`
    pub r: Surd,
    /// `c q + b p Omega`
    pub z: Surd,
    /// `c q^2 - (a - d) q p - b p^2`, never zero.
    pub delta: BigInt,
    /// Limit numerator `gamma*_q = |r_q| K_q`.
    pub gamma_star: Surd,
    /// `|delta_q| / delta*`
    pub gamma_tilde: BigRational,
    /// Growth factor `K_q` with `|s(q, n)|_1 ~ K_q lambda^n`.
    pub k_factor: Surd,
    pub k_factor_f64: f64,
    /// `gcd(q, p) = 1`
    pub essential: bool,
}

impl ResonanceRecord {
    pub fn gamma_tilde_f64(&self) -> f64 {
        ratio_f64(&self.gamma_tilde)
    }
}

pub(crate) fn ratio_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Harmonic `s(q, n) = U^n k0(q)` with its exact `gamma`.
#[derive(Clone, Debug)]
pub struct SequenceTerm {
    pub q: u64,
    pub n: i64,
    pub k: IVec2,
    /// `|<k, omega>| * |k|_1`
    pub gamma: Surd,
    /// `gamma / gamma*`
    pub gamma_tilde: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimaryInfo {
    /// All `q` attaining the minimal `|delta_q|`, ascending.
    pub q_hat: Vec<u64>,
    pub delta_star: String,
    pub gamma_star: Surd,
    pub multiple: bool,
}

#[derive(Clone, Debug)]
pub struct Separations {
    pub b0: BigRational,
    /// Minimizers of `B0`.
    pub q1: Vec<u64>,
    pub b1: BigRational,
    /// Minimizers of `B1`.
    pub q2: Vec<u64>,
    /// Normalized-numerator cap that was needed to settle both minima.
    pub cap: BigRational,
}

/// All primitive quasi-resonances of a purely periodic ratio up to a proven bound.
#[derive(Clone, Debug)]
pub struct ResonanceCatalog {
    spectral: SpectralData,
    records: Vec<ResonanceRecord>,
    q_scanned: u64,
    cap: BigRational,
    delta_star: BigInt,
    /// `Omega (1 + Omega) / |c + b Omega^2|`, so that `gamma*_q = unit |delta_q|`.
    unit: Surd,
    /// `(1 + Omega) / |c + b Omega^2|`, so that `K_q = kconst |z_q|`.
    kconst: Surd,
    half_inv_lambda: Surd,
    one_plus_omega: Surd,
    alpha: Surd,
}

impl ResonanceCatalog {
    /// Scans until every primitive resonance with `gamma~*_q <= cap` is known.
    pub fn build(spectral: &SpectralData, cap: &BigRational) -> Result<Self> {
        if !spectral.cf.is_purely_periodic() {
            return Err(Error::InvalidInput(format!(
                "resonance catalog needs a purely periodic ratio, got {}",
                spectral.cf
            )));
        }
        let om = &spectral.omega;
        let t = &spectral.t;
        let denom = om.mul_int(&t.b).checked_mul(om)?.add_int(&t.c).abs();
        let one_plus_omega = om.add_int(&BigInt::one());
        let kconst = one_plus_omega.checked_div(&denom)?;
        let unit = om.checked_mul(&kconst)?;
        let alpha = unit.mul_int(&t.b.abs()).mul_rational(&BigRational::new(1.into(), 2.into()));
        let half_inv_lambda = spectral.lambda.mul_int(&BigInt::from(2)).recip()?;
        let mut cat = ResonanceCatalog {
            spectral: spectral.clone(),
            records: Vec::new(),
            q_scanned: 0,
            cap: BigRational::zero(),
            delta_star: BigInt::zero(),
            unit,
            kconst,
            half_inv_lambda,
            one_plus_omega,
            alpha,
        };
        cat.initial_scan()?;
        cat.extend_to(cap)?;
        Ok(cat)
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn records(&self) -> &[ResonanceRecord] {
        &self.records
    }

    pub fn essential(&self) -> impl Iterator<Item = &ResonanceRecord> {
        self.records.iter().filter(|r| r.essential)
    }

    pub fn record(&self, q: u64) -> Option<&ResonanceRecord> {
        self.records
            .binary_search_by_key(&q, |r| r.q)
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn cap(&self) -> &BigRational {
        &self.cap
    }

    pub fn q_scanned(&self) -> u64 {
        self.q_scanned
    }

    pub fn delta_star(&self) -> &BigInt {
        &self.delta_star
    }

    /// `gamma* = min_q gamma*_q`
    pub fn gamma_star(&self) -> Surd {
        self.unit.mul_int(&self.delta_star)
    }

    pub fn unit(&self) -> &Surd {
        &self.unit
    }

    /// Smallest `q` such that every larger `q` has `gamma*_q > cap * unit * delta`.
    fn q_limit(&self, cap: &BigRational, delta: &BigInt) -> Result<u64> {
        let rhs = self
            .spectral
            .lambda
            .checked_mul(&self.unit)?
            .mul_rational(&(cap * BigRational::from(delta * 2)))
            .checked_add(&self.alpha)?
            .checked_div(&self.one_plus_omega)?;
        rhs.floor()
            .to_u64()
            .ok_or_else(|| Error::Overflow(format!("scan bound {rhs}")))
    }

    fn initial_scan(&mut self) -> Result<()> {
        let one = BigRational::one();
        let mut dmin: Option<BigInt> = None;
        let mut q = 0u64;
        loop {
            if let Some(d) = &dmin {
                if q >= self.q_limit(&one, d)? {
                    break;
                }
            }
            q += 1;
            if q > MAX_SCAN {
                return Err(Error::Numerical("resonance scan did not terminate".into()));
            }
            if let Some((p, delta)) = self.probe(q)? {
                let ad = delta.abs();
                if dmin.as_ref().is_none_or(|d| &ad < d) {
                    dmin = Some(ad);
                }
                self.records.push(self.make_record(q, p, delta, None)?);
            }
        }
        self.q_scanned = q;
        self.delta_star = dmin.expect("loop exits only after a primitive is found");
        self.cap = one;
        let ds = self.delta_star.clone();
        for r in &mut self.records {
            r.gamma_tilde = BigRational::new(r.delta.abs(), ds.clone());
        }
        Ok(())
    }

    /// Continues the scan so that every primitive with `gamma~ <= cap` is present.
    pub fn extend_to(&mut self, cap: &BigRational) -> Result<()> {
        if cap <= &self.cap {
            return Ok(());
        }
        let limit = self.q_limit(cap, &self.delta_star)?;
        if limit > MAX_SCAN {
            return Err(Error::Numerical(format!(
                "cap {cap} needs a scan to q = {limit}, above the limit {MAX_SCAN}"
            )));
        }
        let ds = self.delta_star.clone();
        for q in self.q_scanned + 1..=limit {
            if let Some((p, delta)) = self.probe(q)? {
                if delta.abs() < ds {
                    return Err(Error::Invariant(format!(
                        "q = {q} beats the settled minimum |delta| = {ds}"
                    )));
                }
                let rec = self.make_record(q, p, delta, Some(&ds))?;
                self.records.push(rec);
            }
        }
        self.q_scanned = self.q_scanned.max(limit);
        self.cap = cap.clone();
        Ok(())
    }

    /// Returns `(p, delta_q)` when `k0(q)` is primitive.
    fn probe(&self, q: u64) -> Result<Option<(u64, BigInt)>> {
        let om = &self.spectral.omega;
        let qb = BigInt::from(q);
        let (op, os, d, oq) = (om.p(), om.s(), om.d(), om.q());
        let p = floor_parts(&(&qb * op * 2 + oq), &(&qb * os * 2), d, &(oq * 2));
        let rp = &qb * op - &p * oq;
        let rs = &qb * os;
        let sr = match sign_of(&rp, &rs, d) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Equal => {
                return Err(Error::Invariant(format!("q Omega is an integer for q = {q}")))
            }
        };
        let h = &self.half_inv_lambda;
        let diff_p = &rp * sr * h.q() - oq * h.p();
        let diff_s = &rs * sr * h.q() - oq * h.s();
        if sign_of(&diff_p, &diff_s, d) != std::cmp::Ordering::Greater {
            return Ok(None);
        }
        let t = &self.spectral.t;
        let delta = &t.c * &qb * &qb - (&t.a - &t.d) * &qb * &p - &t.b * &p * &p;
        if delta.is_zero() {
            return Err(Error::Invariant(format!("delta vanishes at q = {q}")));
        }
        let p = p
            .to_u64()
            .ok_or_else(|| Error::Overflow(format!("p = {p}")))?;
        Ok(Some((p, delta)))
    }

    fn make_record(
        &self,
        q: u64,
        p: u64,
        delta: BigInt,
        delta_star: Option<&BigInt>,
    ) -> Result<ResonanceRecord> {
        let om = &self.spectral.omega;
        let t = &self.spectral.t;
        let (qb, pb) = (BigInt::from(q), BigInt::from(p));
        let r = om.mul_int(&qb).add_int(&-&pb);
        let z = om.mul_int(&(&t.b * &pb)).add_int(&(&t.c * &qb));
        let gamma_star = self.unit.mul_int(&delta.abs());
        let k_factor = self.kconst.checked_mul(&z.abs())?;
        let gamma_tilde = match delta_star {
            Some(ds) => BigRational::new(delta.abs(), ds.clone()),
            None => BigRational::zero(),
        };
        Ok(ResonanceRecord {
            q,
            p,
            k0: IVec2::new(-pb.clone(), qb.clone()),
            r,
            z,
            gamma_star,
            gamma_tilde,
            k_factor_f64: k_factor.to_f64(),
            k_factor,
            essential: qb.gcd(&pb).is_one(),
            delta,
        })
    }

    pub fn find_primary(&self) -> PrimaryInfo {
        let q_hat: Vec<u64> = self
            .records
            .iter()
            .filter(|r| r.delta.abs() == self.delta_star)
            .map(|r| r.q)
            .collect();
        PrimaryInfo {
            multiple: q_hat.len() > 1,
            q_hat,
            delta_star: self.delta_star.to_string(),
            gamma_star: self.gamma_star(),
        }
    }

    /// `q` of the primitive resonant convergents (one per period step).
    pub fn convergent_generators(&self) -> Vec<u64> {
        primitive_convergents(&self.spectral)
            .iter()
            .map(|v| v.k2.to_u64().expect("small convergent"))
            .collect()
    }

    fn min_excluding(&self, excluded: &BTreeSet<u64>) -> Option<(BigRational, Vec<u64>)> {
        let mut best: Option<(BigRational, Vec<u64>)> = None;
        for r in self.essential() {
            if excluded.contains(&r.q) || r.gamma_tilde > self.cap {
                continue;
            }
            match &mut best {
                Some((b, qs)) if &r.gamma_tilde == b => qs.push(r.q),
                Some((b, _)) if &r.gamma_tilde > b => {}
                _ => best = Some((r.gamma_tilde.clone(), vec![r.q])),
            }
        }
        best
    }

    /// `B0` (excluding the primary generators) and `B1` (also excluding every resonant
    /// convergent generator), doubling the cap until both minima are settled.
    pub fn separations(&mut self) -> Result<Separations> {
        let primary: BTreeSet<u64> = self.find_primary().q_hat.into_iter().collect();
        let mut conv = primary.clone();
        conv.extend(self.convergent_generators());
        let mut cap = self.cap.clone().max(BigRational::from_integer(8.into()));
        loop {
            self.extend_to(&cap)?;
            if let (Some((b0, q1)), Some((b1, q2))) =
                (self.min_excluding(&primary), self.min_excluding(&conv))
            {
                return Ok(Separations {
                    b0,
                    q1,
                    b1,
                    q2,
                    cap,
                });
            }
            cap *= BigRational::from_integer(2.into());
        }
    }

    /// `s(q, n) = U^n k0(q)` with exact `gamma`; negative `n` walks backwards.
    pub fn sequence_term(&self, record: &ResonanceRecord, n: i64) -> Result<SequenceTerm> {
        let k = self.spectral.u.pow(n)?.apply(&record.k0).to_half_lattice();
        let gamma = self.spectral.small_divisor(&k).abs().mul_int(&k.l1_norm());
        let gamma_tilde = gamma.to_f64() / self.gamma_star().to_f64();
        Ok(SequenceTerm {
            q: record.q,
            n,
            k,
            gamma,
            gamma_tilde,
        })
    }
}

/// `v(j) = (-p_j, q_j)` over one period: `j = 1..=m` when `a1 = 1`, else `j = 0..m`.
pub fn primitive_convergents(spectral: &SpectralData) -> Vec<IVec2> {
    let m = spectral.m;
    let start = usize::from(spectral.cf.quotient(1) == 1);
    let cv = convergents(&spectral.cf, start + m);
    (start..start + m)
        .map(|j| {
            let (q, p) = &cv[j + 1];
            IVec2::new(-p, q.clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfq::{build_spectral, PeriodicCf};

    fn catalog(s: &str, cap: i64) -> ResonanceCatalog {
        let cf: PeriodicCf = s.parse().unwrap();
        ResonanceCatalog::build(&build_spectral(&cf).unwrap(), &BigRational::from_integer(cap.into()))
            .unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn golden_records() {
        let cat = catalog("per:1", 10);
        let r1 = cat.record(1).unwrap();
        assert_eq!(r1.delta, (-1).into());
        let r7 = cat.record(7).unwrap();
        assert_eq!(r7.k0, IVec2::new(-4, 7));
        assert_eq!(r7.delta, 5.into());
        assert!(cat.record(2).is_none());
        let pi = cat.find_primary();
        assert_eq!(pi.q_hat, vec![1]);
        assert!(!pi.multiple);
    }

    #[test]
    fn delta_is_r_times_z_over_omega() {
        let cat = catalog("per:2,3", 20);
        let om = &cat.spectral().omega;
        for r in cat.records() {
            assert_eq!(&(&r.r * &r.z) / om, Surd::from_int(r.delta.clone()), "q = {}", r.q);
            assert_eq!(r.gamma_star, &r.r.abs() * &r.k_factor);
        }
    }

    #[test]
    fn two_periodic_two_three() {
        let mut cat = catalog("per:2,3", 4);
        assert_eq!(cat.record(1).unwrap().delta, 3.into());
        assert_eq!(cat.record(2).unwrap().delta, (-2).into());
        assert_eq!(cat.find_primary().q_hat, vec![2]);
        let s = cat.separations().unwrap();
        assert_eq!(s.b0, rat(3, 2));
        assert_eq!(s.b1, rat(5, 2));
        assert_eq!(s.q2, vec![9]);
    }

    #[test]
    fn metallic_separation() {
        let mut cat = catalog("per:1", 1);
        let s = cat.separations().unwrap();
        assert_eq!((s.b0, s.q1), (rat(5, 1), vec![7]));
        let mut cat = catalog("per:2", 1);
        let s = cat.separations().unwrap();
        assert_eq!((s.b0, s.q1), (rat(2, 1), vec![3]));
        let mut cat = catalog("per:7", 1);
        let s = cat.separations().unwrap();
        assert_eq!((s.b0, s.q1), (rat(7, 1), vec![6, 8]));
    }

    #[test]
    fn one_three() {
        let mut cat = catalog("per:1,3", 1);
        let s = cat.separations().unwrap();
        assert_eq!(s.b0, rat(3, 1));
        assert_eq!(s.q1, vec![4]);
        // 7 by the b + 4 closed form, but q = 3 and q = 9 both have |delta| = 5
        assert_eq!(s.b1, rat(5, 1));
        assert_eq!(s.q2, vec![3, 9]);
        let v = primitive_convergents(cat.spectral());
        assert_eq!(v, vec![IVec2::new(-1, 1), IVec2::new(-3, 4)]);
    }

    #[test]
    fn sequence_terms_approach_limit() {
        let cat = catalog("per:1,3", 4);
        for r in cat.essential().take(5) {
            let mut prev = f64::INFINITY;
            for n in 0..10 {
                let t = cat.sequence_term(r, n).unwrap();
                let err = (&t.gamma - &r.gamma_star).abs().to_f64();
                let scaled = err * cat.spectral().lambda_f64().powi(2 * n as i32);
                assert!(scaled < 10.0 * r.gamma_star.to_f64() + 10.0, "q={} n={n}", r.q);
                assert!(err <= prev * 1.0001 || err < 1e-300);
                prev = err;
            }
        }
    }

    #[test]
    fn refuses_pre_period() {
        let cf: PeriodicCf = "pre:2;per:1,3".parse().unwrap();
        let sd = build_spectral(&cf).unwrap();
        assert!(ResonanceCatalog::build(&sd, &BigRational::one()).is_err());
    }
}
