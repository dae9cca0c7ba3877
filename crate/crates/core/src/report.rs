//! Artifacts behind the `splitlab` subcommands: ratio summaries, envelope tables, corner
//! lists, gnuplot scripts, Melnikov sweep tables and the verification campaign.
//!
//! Everything here returns strings or serializable values, so output bytes only depend on
//! the inputs.

use std::fmt::Write as _;

use num_rational::BigRational;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::cfq::{build_spectral, PeriodicCf, RatioClass};
use crate::envelope::claims::{verify_claims, verify_separations, ClaimCheck, ClaimReport};
use crate::envelope::{CornerKind, CurveRef, Envelope, EnvelopeOptions};
use crate::error::{Error, Result};
use crate::exactnum::{IMat2, Surd};
use crate::melnikov::{build_harmonics, SplittingParams, SweepRow};
use crate::resonance::ResonanceCatalog;

/// Settings shared by all subcommands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub ratio: PeriodicCf,
    pub rho: f64,
    pub r: f64,
    pub eps_ref: f64,
    pub points: usize,
    pub periods: u32,
    pub a_max: u64,
    pub b_max: u64,
    /// Half-width in `u` of the neighbourhoods of transitions flagged in sweeps.
    pub exclude_radius: f64,
    pub seed: u64,
    /// Envelope-based checks in `verify` only run for `lambda` up to this value; the cost of
    /// the envelope grows like `lambda^3`.
    pub deep_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            ratio: PeriodicCf::metallic(1).expect("golden ratio"),
            rho: 1.0,
            r: 3.5,
            eps_ref: 1e-8,
            points: 64,
            periods: 1,
            a_max: 1000,
            b_max: 50,
            exclude_radius: 0.05,
            seed: 1,
            deep_max: 200.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.rho, self.r, self.eps_ref, self.exclude_radius];
        if positive.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidInput("rho, r, eps and the exclusion radius must be positive".into()));
        }
        if self.eps_ref >= 1.0 {
            return Err(Error::InvalidInput(format!("eps = {} must be below 1", self.eps_ref)));
        }
        if !(self.deep_max >= 0.0) {
            return Err(Error::InvalidInput("deep-max must be non-negative".into()));
        }
        if self.points < 2 || self.periods == 0 || self.a_max == 0 || self.b_max == 0 {
            return Err(Error::InvalidInput("need points >= 2 and positive periods, a-max, b-max".into()));
        }
        Ok(())
    }

    pub fn envelope_options(&self) -> EnvelopeOptions {
        EnvelopeOptions {
            rho: self.rho,
            eps_ref: self.eps_ref,
        }
    }

    pub fn splitting_params(&self) -> SplittingParams {
        SplittingParams {
            rho: self.rho,
            r: self.r,
            ..SplittingParams::default()
        }
    }
}

fn initial_cap() -> BigRational {
    BigRational::from_integer(4.into())
}

/// Catalog and envelope for a purely periodic ratio.
pub fn build_envelope(cf: &PeriodicCf, opts: &EnvelopeOptions) -> Result<(ResonanceCatalog, Envelope)> {
    let sd = build_spectral(cf)?;
    let mut cat = ResonanceCatalog::build(&sd, &initial_cap())?;
    let env = Envelope::build(&mut cat, opts)?;
    Ok((cat, env))
}

#[derive(Clone, Debug, Serialize)]
pub struct Analysis {
    pub ratio: String,
    pub class: RatioClass,
    pub omega: Surd,
    #[serde(rename = "T")]
    pub t: IMat2,
    #[serde(rename = "U")]
    pub u: IMat2,
    pub lambda: Surd,
    pub sigma: i64,
    pub period_len: usize,
    /// Purely periodic tail used for the resonance analysis, when the ratio has a pre-period.
    pub tail: Option<String>,
    /// Period matrix of the tail; `T` above is its conjugate by the prefix matrix.
    #[serde(rename = "T_tail")]
    pub t_tail: Option<IMat2>,
    pub q_hat: Vec<u64>,
    pub multiple_primary: bool,
    pub delta_star: String,
    pub gamma_star: Surd,
    #[serde(rename = "B0")]
    pub b0: String,
    pub q1: Vec<u64>,
    #[serde(rename = "B1")]
    pub b1: String,
    pub q2: Vec<u64>,
}

/// Spectral data, primary resonances and separations of `cf`. Ratios with a pre-period are
/// analysed through their tail, which has the same resonance structure up to a unimodular map.
pub fn analyze(cf: &PeriodicCf) -> Result<Analysis> {
    let sd = build_spectral(cf)?;
    let tail = cf.tail();
    let tail_sd = if cf.is_purely_periodic() { sd.clone() } else { build_spectral(&tail)? };
    let mut cat = ResonanceCatalog::build(&tail_sd, &initial_cap())?;
    let primary = cat.find_primary();
    let sep = cat.separations()?;
    let reduced = !cf.is_purely_periodic();
    Ok(Analysis {
        ratio: cf.to_string(),
        class: tail.class(),
        omega: sd.omega.clone(),
        t: sd.t.clone(),
        u: sd.u.clone(),
        lambda: sd.lambda.clone(),
        sigma: sd.sigma,
        period_len: sd.m,
        tail: reduced.then(|| tail.to_string()),
        t_tail: reduced.then(|| tail_sd.t.clone()),
        q_hat: primary.q_hat,
        multiple_primary: primary.multiple,
        delta_star: primary.delta_star,
        gamma_star: primary.gamma_star,
        b0: sep.b0.to_string(),
        q1: sep.q1,
        b1: sep.b1.to_string(),
        q2: sep.q2,
    })
}

pub const ENVELOPE_HEADER: &str = "u,eps,h1,h2,h3,S1k1,S1k2,S2k1,S2k2,m_index,kappa";

/// Envelope table over `periods` periods ending at the window's upper edge.
pub fn envelope_csv(env: &Envelope, points: usize, periods: u32) -> Result<String> {
    let mut out = String::from(ENVELOPE_HEADER);
    out.push('\n');
    for s in env.sample(points, periods)? {
        writeln!(
            out,
            "{:.12},{:.6e},{:.12},{:.12},{:.12},{},{},{},{},{},{}",
            s.u, s.eps, s.h[0], s.h[1], s.h[2], s.s1.k1, s.s1.k2, s.s2.k1, s.s2.k2, s.m_index, s.kappa
        )
        .expect("write to string");
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CornerEntry {
    pub u: f64,
    pub eps: f64,
    pub kind: CornerKind,
    /// Levels with a corner here: `[1, 2]` for `h1 = h2`, `[2]` for a transition.
    pub levels: Vec<u8>,
    pub curves: Vec<CurveRef>,
}

/// Corners over the same `periods` periods as [`envelope_csv`], ascending in `u`.
pub fn corner_entries(env: &Envelope, periods: u32) -> Vec<CornerEntry> {
    let p = env.period();
    let mut out = Vec::new();
    for j in (0..periods.max(1) as i64).rev() {
        for c in env.corners() {
            let u = c.u - j as f64 * p;
            out.push(CornerEntry {
                u,
                eps: u.exp(),
                kind: c.kind,
                levels: match c.kind {
                    CornerKind::Check => vec![1, 2],
                    CornerKind::Transition => vec![2],
                },
                curves: c.curves.iter().map(|r| CurveRef { n: r.n + j, ..*r }).collect(),
            });
        }
    }
    out
}

/// Plots `h1..h3` from the envelope table and marks the corners.
pub fn gnuplot_script(csv_name: &str, corners: &[CornerEntry], title: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key top left\n");
    s.push_str("set xlabel 'ln eps'\n");
    s.push_str("set ylabel 'h_i'\n");
    writeln!(s, "set title '{title}'").unwrap();
    for (i, c) in corners.iter().enumerate() {
        let style = match c.kind {
            CornerKind::Check => "dt 2 lc rgb 'black'",
            CornerKind::Transition => "dt 3 lc rgb 'gray50'",
        };
        writeln!(s, "set arrow {} from {:.12},graph 0 to {:.12},graph 1 nohead {style}", i + 1, c.u, c.u).unwrap();
    }
    writeln!(
        s,
        "plot '{csv_name}' every ::1 using 1:3 with lines title 'h1', \\\n     '' every ::1 using 1:4 with lines title 'h2', \\\n     '' every ::1 using 1:5 with lines title 'h3'"
    )
    .unwrap();
    s
}

/// `points` values of `eps`, evenly spaced in `u` over `periods` periods ending at the
/// window's upper edge (upper edge excluded, so periods tile without repeats).
pub fn sweep_grid(env: &Envelope, points: usize, periods: u32) -> Vec<f64> {
    let hi = env.window.1;
    let len = periods.max(1) as f64 * env.period();
    (0..points)
        .map(|i| (hi - len + len * i as f64 / points as f64).exp())
        .collect()
}

/// Distance in `u` from `u` to the nearest transition (any period).
pub fn transition_distance(env: &Envelope, u: f64) -> f64 {
    let (r, _) = env.reduce(u);
    let p = env.period();
    env.transitions()
        .iter()
        .flat_map(|c| [c.u - p, c.u, c.u + p])
        .map(|t| (t - r).abs())
        .fold(f64::INFINITY, f64::min)
}

pub const SWEEP_HEADER: &str = "eps,u,log_max_M,log_m_star,ratio_max,ratio_mstar,kappa,status";

/// Sweep table. `status` is `near_transition` where `eta >= ETA_MAX` or the point lies
/// within `exclude_radius` of a transition, `error` (with empty measures) where the pipeline
/// failed, and `ok` otherwise.
pub fn sweep_csv(rows: &[SweepRow], env: &Envelope, exclude_radius: f64) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        let near = row.near_transition || transition_distance(env, row.u) <= exclude_radius;
        match &row.report {
            Some(r) => writeln!(
                out,
                "{:.6e},{:.12},{:.9},{:.9},{:.9},{:.9},{},{}",
                row.eps,
                row.u,
                r.log_max_m,
                r.log_m_star,
                r.ratios.max,
                r.ratios.mstar,
                r.kappa,
                if near { "near_transition" } else { "ok" }
            ),
            None => writeln!(out, "{:.6e},{:.12},,,,,,error", row.eps, row.u),
        }
        .expect("write to string");
    }
    out
}

/// Checks that `eps` is inside the regime where the harmonic model applies.
pub fn regime_check(cat: &ResonanceCatalog, params: &SplittingParams, eps: f64) -> Result<()> {
    build_harmonics(cat, params, eps).map(|_| ())
}

/// Ratios of the default campaign: metallic `a <= a_max`, two-periodic `a < b <= b_max`, and
/// the two-primary case `per:1,2,2`.
pub fn campaign_ratios(a_max: u64, b_max: u64) -> Result<Vec<PeriodicCf>> {
    let mut out = Vec::new();
    for a in 1..=a_max {
        out.push(PeriodicCf::metallic(a)?);
    }
    for b in 2..=b_max {
        for a in 1..b {
            out.push(PeriodicCf::two_periodic(a, b)?);
        }
    }
    out.push(PeriodicCf::purely_periodic(vec![1, 2, 2])?);
    Ok(out)
}

const SHIFT_SAMPLES: usize = 16;

/// Closed-form predictions, plus (for `lambda <= deep_max`) envelope checks and periodicity
/// and shift checks at seeded random points. The flag tells whether the envelope was built.
pub fn verify_ratio(cf: &PeriodicCf, opts: &EnvelopeOptions, seed: u64, deep_max: f64) -> Result<(ClaimReport, bool)> {
    let sd = build_spectral(cf)?;
    let mut cat = ResonanceCatalog::build(&sd, &initial_cap())?;
    if sd.lambda_f64() > deep_max {
        return Ok((verify_separations(&mut cat)?, false));
    }
    let env = Envelope::build(&mut cat, opts)?;
    let mut report = verify_claims(&mut cat, &env)?;
    let u_mat = cat.spectral().u.clone();
    let p = env.period();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut shift_ok = true;
    for _ in 0..SHIFT_SAMPLES {
        let u = rng.gen_range(env.window.0..env.window.1);
        for rank in 1..=3 {
            let (a, b) = (env.h(rank, u), env.h(rank, u + p));
            worst = worst.max((a - b).abs() / a);
        }
        let here = env.dominant_at(u.exp())?;
        let up = env.dominant_at((u + p).exp())?;
        shift_ok &= here.ties.is_empty() && (0..2).all(|i| here.s[i] == u_mat.apply(&up.s[i]).to_half_lattice());
    }
    report.checks.push(ClaimCheck {
        name: "h_i periodic".into(),
        predicted: "<= 1e-9".into(),
        observed: format!("{worst:.2e}"),
        pass: worst <= 1e-9,
    });
    report.checks.push(ClaimCheck {
        name: "S_i(eps) = U S_i(lambda^4 eps)".into(),
        predicted: "true".into(),
        observed: shift_ok.to_string(),
        pass: shift_ok,
    });
    if cf.per() == [1, 2, 2] {
        let primaries = env.q_hat.len();
        let (n1, n2) = (env.corners_h1().len(), env.corners().len());
        for (name, want, got) in [
            ("primary sequences", 2, primaries),
            ("h1 corners", 4, n1),
            ("h2 corners", 12, n2),
        ] {
            report.checks.push(ClaimCheck {
                name: name.into(),
                predicted: want.to_string(),
                observed: got.to_string(),
                pass: want == got,
            });
        }
    }
    Ok((report, true))
}

#[derive(Clone, Debug, Serialize)]
pub struct CampaignRow {
    pub ratio: String,
    pub pass: bool,
    pub envelope_checked: bool,
    pub failed: Vec<String>,
    pub error: Option<String>,
    pub report: Option<ClaimReport>,
}

/// Runs [`verify_ratio`] over `ratios` in parallel; rows keep the input order.
pub fn campaign(ratios: &[PeriodicCf], opts: &EnvelopeOptions, seed: u64, deep_max: f64) -> Vec<CampaignRow> {
    ratios
        .par_iter()
        .map(|cf| match verify_ratio(cf, opts, seed, deep_max) {
            Ok((rep, deep)) => CampaignRow {
                ratio: cf.to_string(),
                pass: rep.all_pass(),
                envelope_checked: deep,
                failed: rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect(),
                error: None,
                report: Some(rep),
            },
            Err(e) => CampaignRow {
                ratio: cf.to_string(),
                pass: false,
                envelope_checked: false,
                failed: Vec::new(),
                error: Some(e.to_string()),
                report: None,
            },
        })
        .collect()
}

/// One line per ratio, failing checks spelled out with predicted and observed values.
pub fn campaign_table(rows: &[CampaignRow]) -> String {
    let mut s = String::from("ratio\tresult\tenvelope\tdetails\n");
    for row in rows {
        let details = match (&row.error, &row.report) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(rep)) => rep
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("{}: predicted {}, got {}", c.name, c.predicted, c.observed))
                .collect::<Vec<_>>()
                .join("; "),
            (None, None) => String::new(),
        };
        let result = if row.pass { "pass" } else { "FAIL" };
        let deep = if row.envelope_checked { "checked" } else { "skipped" };
        writeln!(s, "{}\t{result}\t{deep}\t{details}", row.ratio).unwrap();
    }
    s
}
