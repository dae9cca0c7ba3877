//! Checks of the closed-form predictions (separations, inequalities between `B0`, `J1`, `J2`,
//! corner counts) against what was actually computed for one ratio.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::Envelope;
use crate::cfq::RatioClass;
use crate::error::Result;
use crate::exactnum::Surd;
use crate::resonance::{ratio_f64, ResonanceCatalog, Separations};

/// Relative tolerance for float comparisons of envelope values against `J1`, `J2`.
pub const VALUE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct ClaimCheck {
    pub name: String,
    pub predicted: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClaimReport {
    pub ratio: String,
    pub class: RatioClass,
    pub b0: String,
    pub b1: String,
    pub checks: Vec<ClaimCheck>,
}

impl ClaimReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(name: &str, predicted: impl ToString, observed: impl ToString, pass: bool) -> ClaimCheck {
    ClaimCheck {
        name: name.into(),
        predicted: predicted.to_string(),
        observed: observed.to_string(),
        pass,
    }
}

fn rat(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Closed-form `(B0, B1)` for the metallic and two-periodic families.
pub fn predicted_separations(class: RatioClass) -> Option<(BigRational, Option<BigRational>)> {
    match class {
        RatioClass::Metallic { a: 1 } => Some((rat(5, 1), None)),
        RatioClass::Metallic { a } => Some((rat(a, 1), None)),
        RatioClass::GoldenColored { b } => Some((rat(b, 1), Some(rat(b + 4, 1)))),
        RatioClass::MetallicColored { a, b } => Some((rat(b, a), Some(rat((a - 1) * b + a, a)))),
        RatioClass::Other => None,
    }
}

/// Minimizer sets `q1` (metallic) or `q2` (two-periodic) from the closed-form tables.
pub fn predicted_minimizers(class: RatioClass) -> Option<Vec<u64>> {
    Some(match class {
        RatioClass::Metallic { a: 1 } => vec![7],
        RatioClass::Metallic { a: 2 } => vec![3],
        RatioClass::Metallic { a } => vec![a - 1, a + 1],
        RatioClass::GoldenColored { b: 2 } => vec![2],
        RatioClass::GoldenColored { b: 3 } => vec![3, 9],
        RatioClass::GoldenColored { b: 4 } => vec![4, 11],
        RatioClass::GoldenColored { b: 5 } => vec![5, 8, 13],
        RatioClass::GoldenColored { b } => vec![b + 3],
        RatioClass::MetallicColored { a: 2, b } => vec![2 * b + 3],
        RatioClass::MetallicColored { a, b } => vec![a - 1, a * b + a + 1],
        RatioClass::Other => return None,
    })
}

/// `sqrt(B0)` against `J1`, decided exactly as `4 B0 lambda` against `(lambda + 1)^2`.
pub fn b0_vs_j1(lambda: &Surd, b0: &BigRational) -> Ordering {
    let lhs = lambda.mul_rational(&(b0 * BigRational::from_integer(4.into())));
    let l1 = lambda.add_int(&1.into());
    lhs.compare(&(&l1 * &l1)).expect("same field")
}

/// `sqrt(B0) J1 < J2`, decided exactly as `B0 lambda (lambda + 1)^2 < (lambda^2 + 1)^2`.
pub fn b0_j1_below_j2(lambda: &Surd, b0: &BigRational) -> bool {
    let l1 = lambda.add_int(&1.into());
    let lhs = (lambda * &(&l1 * &l1)).mul_rational(b0);
    let l2 = (lambda * lambda).add_int(&1.into());
    lhs < &l2 * &l2
}

/// Essential secondary curves with `sqrt(gamma~) < J2` evaluated at the nearest `eps^_n`;
/// returns `(number checked, violations as (q, value))`.
pub fn proof2b_scan(catalog: &mut ResonanceCatalog, env: &Envelope) -> Result<(usize, Vec<(u64, f64)>)> {
    let k = &env.constants;
    let cap = BigRational::from_integer(BigInt::from((k.j2 * k.j2).ceil() as u64 + 1));
    catalog.extend_to(&cap)?;
    let mut checked = 0;
    let mut bad = Vec::new();
    for r in catalog.essential() {
        if env.q_hat.contains(&r.q) {
            continue;
        }
        let gt = ratio_f64(&r.gamma_tilde);
        if gt.sqrt() >= k.j2 {
            continue;
        }
        checked += 1;
        let c = k.d0.ln() + 2.0 * gt.ln() - 4.0 * r.k_factor_f64.ln();
        let n = ((k.u_hat0 - c) / k.period).round() as i64;
        let v = gt.sqrt() * ((k.u_hat(n) - c) / 4.0).cosh();
        if v < k.j2 * (1.0 - VALUE_TOL) {
            bad.push((r.q, v));
        }
    }
    Ok((checked, bad))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= VALUE_TOL * b.abs().max(1.0)
}

/// Predictions that only need the resonance catalog: separations, minimizers and the exact
/// inequalities between `B0`, `J1` and `J2`.
pub fn verify_separations(catalog: &mut ResonanceCatalog) -> Result<ClaimReport> {
    let class = catalog.spectral().cf.class();
    let sep: Separations = catalog.separations()?;
    let lambda = catalog.spectral().lambda.clone();
    let mut checks = Vec::new();

    if let Some((b0, b1)) = predicted_separations(class) {
        checks.push(check("B0", &b0, &sep.b0, b0 == sep.b0));
        if let Some(b1) = b1 {
            checks.push(check("B1", &b1, &sep.b1, b1 == sep.b1));
        }
    }
    if let Some(qs) = predicted_minimizers(class) {
        let (name, got) = match class {
            RatioClass::Metallic { .. } => ("q1", &sep.q1),
            _ => ("q2", &sep.q2),
        };
        checks.push(check(name, format!("{qs:?}"), format!("{got:?}"), &qs == got));
    }

    let ord = b0_vs_j1(&lambda, &sep.b0);
    let observed = if ord == Ordering::Greater { "sqrt(B0) > J1" } else { "sqrt(B0) < J1" };
    match class {
        RatioClass::Metallic { .. } | RatioClass::GoldenColored { .. } => {
            checks.push(check("B0 vs J1", "sqrt(B0) > J1", observed, ord == Ordering::Greater))
        }
        RatioClass::MetallicColored { .. } => {
            checks.push(check("B0 vs J1", "sqrt(B0) < J1", observed, ord == Ordering::Less))
        }
        RatioClass::Other => {}
    }
    if let RatioClass::GoldenColored { .. } = class {
        let ok = b0_j1_below_j2(&lambda, &sep.b0);
        checks.push(check("sqrt(B0) J1 < J2", true, ok, ok));
    }

    Ok(ClaimReport {
        ratio: catalog.spectral().cf.to_string(),
        class,
        b0: sep.b0.to_string(),
        b1: sep.b1.to_string(),
        checks,
    })
}

/// Runs every applicable prediction for the ratio behind `catalog` and `env`.
pub fn verify_claims(catalog: &mut ResonanceCatalog, env: &Envelope) -> Result<ClaimReport> {
    let mut report = verify_separations(catalog)?;
    let class = report.class;
    let k = env.constants.clone();
    let checks = &mut report.checks;
    let n1 = env.corners_h1().len();
    let n2 = env.corners().len();
    let (min1, max1) = env.level_extrema(1);
    let (min2, max2) = env.level_extrema(2);
    checks.push(check("min h1 = 1", 1.0, min1, close(min1, 1.0)));
    checks.push(check("max h1 <= J1", k.j1, max1, max1 <= k.j1 * (1.0 + VALUE_TOL)));
    checks.push(check("max h2 <= J2", k.j2, max2, max2 <= k.j2 * (1.0 + VALUE_TOL)));
    checks.push(check("h1 corners >= 1", ">= 1", n1, n1 >= 1));
    checks.push(check("h2 corners >= 2", ">= 2", n2, n2 >= 2));

    match class {
        RatioClass::Metallic { .. } => {
            checks.push(check("h1 corners", 1, n1, n1 == 1));
            checks.push(check("max h1 = J1", k.j1, max1, close(max1, k.j1)));
            checks.push(check("h2 corners", 2, n2, n2 == 2));
            checks.push(check("min h2 = J1", k.j1, min2, close(min2, k.j1)));
            checks.push(check("max h2 = J2", k.j2, max2, close(max2, k.j2)));
            if n2 == 2 {
                let gap = env.corners()[1].u - env.corners()[0].u;
                let want = 2.0 * k.ln_lambda;
                checks.push(check("h2 corner spacing", want, gap, close(gap, want)));
            }
            let (count, bad) = proof2b_scan(catalog, env)?;
            checks.push(check(
                "secondary curves >= J2 at eps^_n",
                format!("0 of {count} below"),
                format!("{} of {count} below", bad.len()),
                bad.is_empty(),
            ));
        }
        RatioClass::GoldenColored { .. } => {
            checks.push(check("h1 corners", 1, n1, n1 == 1));
            checks.push(check("max h1 = J1", k.j1, max1, close(max1, k.j1)));
            checks.push(check("h2 corners >= 3", ">= 3", n2, n2 >= 3));
            checks.push(check("min h2 = J1", k.j1, min2, close(min2, k.j1)));
            checks.push(check("max h2 < J2", k.j2, max2, max2 < k.j2 * (1.0 - VALUE_TOL)));
        }
        RatioClass::MetallicColored { .. } => {
            checks.push(check("h1 corners >= 2", ">= 2", n1, n1 >= 2));
            checks.push(check("max h1 < J1", k.j1, max1, max1 < k.j1 * (1.0 - VALUE_TOL)));
        }
        RatioClass::Other => {}
    }

    Ok(report)
}
