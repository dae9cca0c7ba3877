//! Lower envelopes `h1 <= h2 <= h3` of the asymptotic curves `g*_{s(q,n)}` over one period in
//! `u = ln eps`, their corners, and the dominant harmonics they select.
//!
//! Every curve is `sqrt(gamma~*_q) cosh((u - u0) / 4)` and consecutive `n` shift `u0` by
//! `-4 ln lambda`, so the envelopes are periodic with that period. One window
//! `(ln eps'_{n+1}, ln eps'_n]` centred at `ln eps^_n` is computed exactly and everything
//! else is obtained by shifting.

pub mod claims;
mod curve;
mod sweep;

use std::collections::HashMap;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

pub use curve::CoshCurve;
use sweep::{sweep, Piece, LEVELS};

use crate::cfq::PeriodicCf;
use crate::error::{Error, Result};
use crate::exactnum::{IMat2, IVec2};
use crate::resonance::{ratio_f64, ResonanceCatalog};

/// Corners closer than this to the lower window edge belong to the previous period.
const EDGE_TOL: f64 = 1e-9;

/// Distance in `u` under which a query point counts as sitting on a corner.
const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct EnvelopeOptions {
    pub rho: f64,
    /// The window is the period whose centre `eps^_n` is nearest to this value (in log scale).
    pub eps_ref: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions {
            rho: 1.0,
            eps_ref: 1e-8,
        }
    }
}

/// Scalars shared by all curves of one ratio.
#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeConstants {
    pub rho: f64,
    pub gamma_star: f64,
    /// `(pi gamma* / (2 rho))^2`
    pub d0: f64,
    /// `(2 pi rho gamma*)^{1/2}`
    pub c0: f64,
    pub lambda: f64,
    pub ln_lambda: f64,
    /// `4 ln lambda`
    pub period: f64,
    /// `(sqrt(lambda) + 1/sqrt(lambda)) / 2`
    pub j1: f64,
    /// `(lambda + 1/lambda) / 2`
    pub j2: f64,
    /// `K` of the primary generator used for `eps^_n`.
    pub k_hat: f64,
    /// `ln eps^_0 = ln D0 - 4 ln K_hat`
    pub u_hat0: f64,
}

impl EnvelopeConstants {
    pub fn u_hat(&self, n: i64) -> f64 {
        self.u_hat0 - n as f64 * self.period
    }

    /// `ln eps'_n = ln eps^_n + 2 ln lambda`
    pub fn u_prime(&self, n: i64) -> f64 {
        self.u_hat(n) + 2.0 * self.ln_lambda
    }

    pub fn eps_hat(&self, n: i64) -> f64 {
        self.u_hat(n).exp()
    }

    pub fn eps_prime(&self, n: i64) -> f64 {
        self.u_prime(n).exp()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerKind {
    /// `h1 = h2`: the most dominant harmonic changes (a corner of both `h1` and `h2`).
    Check,
    /// `h2 = h3`: only the second dominant harmonic changes.
    Transition,
}

/// Names the curve of `c * s(q, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CurveRef {
    pub q: u64,
    pub n: i64,
    pub mult: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct Corner {
    pub u: f64,
    pub eps: f64,
    pub kind: CornerKind,
    pub curves: Vec<CurveRef>,
}

/// A maximal interval on which the curve of a given rank does not change.
#[derive(Clone, Debug, Serialize)]
pub struct Segment {
    pub u_lo: f64,
    pub u_hi: f64,
    pub rank: usize,
    pub curve: CurveRef,
}

/// Dominant essential harmonics at one `eps`.
#[derive(Clone, Debug, Serialize)]
pub struct DominantHarmonics {
    pub eps: f64,
    pub u: f64,
    /// `S1, S2, S3`
    pub s: [IVec2; 3],
    pub curves: [CurveRef; 3],
    /// Largest `m` with `m h1 <= h2`.
    pub m_index: u32,
    /// `|det(S1, S2)|`
    #[serde(serialize_with = "crate::exactnum::ser_big")]
    pub kappa: BigInt,
    /// When `eps` sits on a corner: rank (1-based) and the harmonic on the other side.
    pub ties: Vec<(usize, IVec2)>,
}

#[derive(Clone, Debug)]
pub struct Envelope {
    pub ratio: PeriodicCf,
    pub constants: EnvelopeConstants,
    /// Index `n` of the window centre `eps^_n`.
    pub n_window: i64,
    pub window: (f64, f64),
    /// Primary generators (more than one for ratios with several primary sequences).
    pub q_hat: Vec<u64>,
    /// Generator used to define `eps^_n`.
    pub q_main: u64,
    /// Cap on curve heights that was needed for a complete candidate set.
    pub h_cap: f64,
    pub max_h3: f64,
    curves: Vec<CoshCurve>,
    pieces: Vec<Piece>,
    corners: Vec<Corner>,
    third_breaks: Vec<f64>,
    primary_curves: Vec<CoshCurve>,
    primary_pieces: Vec<Piece>,
    k0: HashMap<u64, IVec2>,
    u_mat: IMat2,
}

struct CurveSource {
    q: u64,
    amp: f64,
    /// `u0` of `s(q, 0)`.
    c: f64,
}

impl Envelope {
    /// Builds the envelopes for one window, enlarging the catalog as needed.
    pub fn build(catalog: &mut ResonanceCatalog, opts: &EnvelopeOptions) -> Result<Envelope> {
        if !(opts.rho > 0.0) || !(opts.eps_ref > 0.0) {
            return Err(Error::InvalidInput("rho and eps_ref must be positive".into()));
        }
        let primary = catalog.find_primary();
        let q_main = *primary
            .q_hat
            .iter()
            .min_by_key(|&&q| catalog.record(q).expect("primary is catalogued").k0.clone())
            .expect("at least one primary");
        let sd = catalog.spectral().clone();
        let lambda = sd.lambda_f64();
        let ln_lambda = sd.lambda.ln();
        let gamma_star = catalog.gamma_star().to_f64();
        let d0 = (PI * gamma_star / (2.0 * opts.rho)).powi(2);
        let k_hat = catalog.record(q_main).expect("primary").k_factor_f64;
        let constants = EnvelopeConstants {
            rho: opts.rho,
            gamma_star,
            d0,
            c0: (2.0 * PI * opts.rho * gamma_star).sqrt(),
            lambda,
            ln_lambda,
            period: 4.0 * ln_lambda,
            j1: (ln_lambda / 2.0).cosh(),
            j2: ln_lambda.cosh(),
            k_hat,
            u_hat0: d0.ln() - 4.0 * k_hat.ln(),
        };
        let n_window = ((constants.u_hat0 - opts.eps_ref.ln()) / constants.period).round() as i64;
        let centre = constants.u_hat(n_window);
        let window = (centre - 2.0 * ln_lambda, centre + 2.0 * ln_lambda);
        let pad = 0.05 * constants.period;
        let range = (window.0 - pad, window.1 + pad);

        let mut h_cap = constants.j2 * (1.0 + 1.0 / lambda);
        for attempt in 0..3 {
            let gcap = BigRational::from_integer(BigInt::from((h_cap * h_cap).ceil() as u64 + 1));
            catalog.extend_to(&gcap)?;
            let sources: Vec<CurveSource> = catalog
                .essential()
                .map(|r| {
                    let gt = ratio_f64(&r.gamma_tilde);
                    CurveSource {
                        q: r.q,
                        amp: gt.sqrt(),
                        c: d0.ln() + 2.0 * gt.ln() - 4.0 * r.k_factor_f64.ln(),
                    }
                })
                .collect();
            let curves = collect_curves(&sources, h_cap, range, constants.period);
            let (pieces, events) = sweep(&curves, range.0, range.1)?;
            let clipped = clip(&pieces, window);
            let max_h3 = clipped
                .iter()
                .flat_map(|p| {
                    let c = &curves[p.top[LEVELS - 1]];
                    [c.value(p.u_lo), c.value(p.u_hi)]
                })
                .fold(f64::NEG_INFINITY, f64::max);
            if max_h3 > h_cap * (1.0 + 1e-12) {
                if attempt == 2 {
                    break;
                }
                h_cap = max_h3 * (1.0 + 1e-9);
                continue;
            }
            let mut corners = Vec::new();
            let mut third_breaks = Vec::new();
            for e in &events {
                if !(e.u > window.0 + EDGE_TOL && e.u <= window.1 + EDGE_TOL) {
                    continue;
                }
                let kind = if e.before[0] != e.after[0] {
                    CornerKind::Check
                } else if e.before[1] != e.after[1] {
                    CornerKind::Transition
                } else {
                    third_breaks.push(e.u);
                    continue;
                };
                let upto = if kind == CornerKind::Check { 2 } else { 3 };
                let mut involved: Vec<CurveRef> = Vec::new();
                for &i in e.before[..upto].iter().chain(&e.after[..upto]) {
                    let r = curve_ref(&curves[i]);
                    if !involved.contains(&r) {
                        involved.push(r);
                    }
                }
                corners.push(Corner {
                    u: e.u,
                    eps: e.u.exp(),
                    kind,
                    curves: involved,
                });
            }
            let primary_sources: Vec<&CurveSource> = sources
                .iter()
                .filter(|s| primary.q_hat.contains(&s.q))
                .collect();
            let primary_curves = collect_curves_ref(&primary_sources, f64::INFINITY, range, constants.period);
            let (ppieces, _) = sweep(&primary_curves, range.0, range.1)?;
            let k0 = catalog
                .essential()
                .filter(|r| curves.iter().any(|c| c.q == r.q))
                .map(|r| (r.q, r.k0.clone()))
                .collect();
            return Ok(Envelope {
                ratio: sd.cf.clone(),
                constants,
                n_window,
                window,
                q_hat: primary.q_hat.clone(),
                q_main,
                h_cap,
                max_h3,
                curves,
                pieces: clipped,
                corners,
                third_breaks,
                primary_curves,
                primary_pieces: clip(&ppieces, window),
                k0,
                u_mat: sd.u.clone(),
            });
        }
        Err(Error::Numerical(format!(
            "candidate set still incomplete after enlarging the height cap to {h_cap}"
        )))
    }

    pub fn period(&self) -> f64 {
        self.constants.period
    }

    pub fn curves(&self) -> &[CoshCurve] {
        &self.curves
    }

    /// Corners of `h1` and `h2` in `(window.0, window.1]`, ascending.
    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    pub fn corners_h1(&self) -> Vec<&Corner> {
        self.corners
            .iter()
            .filter(|c| c.kind == CornerKind::Check)
            .collect()
    }

    pub fn transitions(&self) -> Vec<&Corner> {
        self.corners
            .iter()
            .filter(|c| c.kind == CornerKind::Transition)
            .collect()
    }

    /// Points in the window where only the third level changes.
    pub fn third_level_breaks(&self) -> &[f64] {
        &self.third_breaks
    }

    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        for rank in 0..LEVELS {
            for p in &self.pieces {
                let curve = curve_ref(&self.curves[p.top[rank]]);
                match out.last_mut() {
                    Some(Segment { rank: r, curve: c, u_hi, .. }) if *r == rank + 1 && *c == curve => {
                        *u_hi = p.u_hi
                    }
                    _ => out.push(Segment {
                        u_lo: p.u_lo,
                        u_hi: p.u_hi,
                        rank: rank + 1,
                        curve,
                    }),
                }
            }
        }
        out
    }

    /// Maps `u` into the window; returns the reduced point and the number of periods removed.
    pub fn reduce(&self, u: f64) -> (f64, i64) {
        let p = self.period();
        let j = ((u - self.window.0) / p).floor() as i64;
        let r = u - j as f64 * p;
        (r.clamp(self.window.0, self.window.1), j)
    }

    fn piece_at(pieces: &[Piece], u: f64) -> &Piece {
        let i = pieces.partition_point(|p| p.u_hi < u);
        &pieces[i.min(pieces.len() - 1)]
    }

    /// `h_rank(u)` for rank 1, 2 or 3.
    pub fn h(&self, rank: usize, u: f64) -> f64 {
        let (r, _) = self.reduce(u);
        let p = Self::piece_at(&self.pieces, r);
        self.curves[p.top[rank - 1]].value(r)
    }

    /// Exact `(min, max)` of `h_rank` over one period.
    pub fn level_extrema(&self, rank: usize) -> (f64, f64) {
        Self::extrema(&self.pieces, &self.curves, rank)
    }

    /// Exact `(min, max)` of the primary-only level `h_bar_rank` over one period.
    pub fn primary_level_extrema(&self, rank: usize) -> (f64, f64) {
        Self::extrema(&self.primary_pieces, &self.primary_curves, rank)
    }

    fn extrema(pieces: &[Piece], curves: &[CoshCurve], rank: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in pieces {
            let c = &curves[p.top[rank - 1]];
            for v in [c.value(p.u_lo), c.value(p.u_hi)] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if (p.u_lo..=p.u_hi).contains(&c.u0) {
                lo = lo.min(c.height());
            }
        }
        (lo, hi)
    }

    /// Same levels restricted to the primary sequences.
    pub fn h_bar(&self, rank: usize, u: f64) -> f64 {
        let (r, _) = self.reduce(u);
        let p = Self::piece_at(&self.primary_pieces, r);
        self.primary_curves[p.top[rank - 1]].value(r)
    }

    /// `2 h1`, the level of the harmonic `2 S1`.
    pub fn h_tilde_2hat(&self, u: f64) -> f64 {
        2.0 * self.h(1, u)
    }

    /// `min(h2, 2 h1)`
    pub fn h_tilde_2(&self, u: f64) -> f64 {
        self.h(2, u).min(2.0 * self.h(1, u))
    }

    /// `min(h3, 2 h2)`
    pub fn h_tilde_3(&self, u: f64) -> f64 {
        self.h(3, u).min(2.0 * self.h(2, u))
    }

    /// Largest `m` with `m h1 <= h2`.
    pub fn m_index(&self, u: f64) -> u32 {
        ((self.h(2, u) / self.h(1, u)) * (1.0 + 1e-12)).floor() as u32
    }

    /// `c * s(q, n)` as a half-lattice vector.
    pub fn harmonic(&self, c: &CurveRef) -> Result<IVec2> {
        let k0 = self
            .k0
            .get(&c.q)
            .ok_or_else(|| Error::InvalidInput(format!("q = {} has no curve in this envelope", c.q)))?;
        Ok(self
            .u_mat
            .pow(c.n)?
            .apply(k0)
            .scale(&BigInt::from(c.mult))
            .to_half_lattice())
    }

    fn shifted(&self, c: &CoshCurve, j: i64) -> CurveRef {
        CurveRef {
            q: c.q,
            n: c.n - j,
            mult: c.mult,
        }
    }

    /// First three dominant essential harmonics at `eps`, with `m` and `kappa`.
    pub fn dominant_at(&self, eps: f64) -> Result<DominantHarmonics> {
        if !(eps > 0.0) {
            return Err(Error::InvalidInput(format!("eps = {eps} must be positive")));
        }
        let u = eps.ln();
        let (r, j) = self.reduce(u);
        let piece = Self::piece_at(&self.pieces, r);
        let curves = piece.top.map(|i| self.shifted(&self.curves[i], j));
        let s = [
            self.harmonic(&curves[0])?,
            self.harmonic(&curves[1])?,
            self.harmonic(&curves[2])?,
        ];
        let kappa = s[0].det(&s[1]).abs();
        let p = self.period();
        let mut ties = Vec::new();
        for c in &self.corners {
            for shift in [-p, 0.0, p] {
                if (c.u + shift - r).abs() < TIE_TOL {
                    let other_side = if r < c.u + shift { r + 2.0 * TIE_TOL } else { r - 2.0 * TIE_TOL };
                    let other = Self::piece_at(&self.pieces, self.reduce(other_side).0);
                    for rank in 0..2 {
                        if other.top[rank] != piece.top[rank] {
                            let cr = self.shifted(&self.curves[other.top[rank]], j);
                            ties.push((rank + 1, self.harmonic(&cr)?));
                        }
                    }
                }
            }
        }
        Ok(DominantHarmonics {
            eps,
            u,
            s,
            curves,
            m_index: self.m_index(u),
            kappa,
            ties,
        })
    }

    /// Evenly spaced samples over `periods` whole periods ending at the window's upper edge.
    pub fn sample(&self, points: usize, periods: u32) -> Result<Vec<EnvelopeSample>> {
        let points = points.max(2);
        let hi = self.window.1;
        let lo = hi - periods.max(1) as f64 * self.period();
        (0..points)
            .map(|i| {
                let u = lo + (hi - lo) * i as f64 / (points - 1) as f64;
                let d = self.dominant_at(u.exp())?;
                Ok(EnvelopeSample {
                    u,
                    eps: u.exp(),
                    h: [self.h(1, u), self.h(2, u), self.h(3, u)],
                    s1: d.s[0].clone(),
                    s2: d.s[1].clone(),
                    m_index: d.m_index,
                    kappa: d.kappa.to_u64().unwrap_or(u64::MAX),
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeSample {
    pub u: f64,
    pub eps: f64,
    pub h: [f64; 3],
    pub s1: IVec2,
    pub s2: IVec2,
    pub m_index: u32,
    pub kappa: u64,
}

fn curve_ref(c: &CoshCurve) -> CurveRef {
    CurveRef {
        q: c.q,
        n: c.n,
        mult: c.mult,
    }
}

fn collect_curves(sources: &[CurveSource], h_cap: f64, range: (f64, f64), period: f64) -> Vec<CoshCurve> {
    let refs: Vec<&CurveSource> = sources.iter().collect();
    collect_curves_ref(&refs, h_cap, range, period)
}

/// Every `(q, n)` whose graph enters `range x [1, h_cap]`; with an infinite cap, the
/// curves whose minimum lies within three periods of the range.
fn collect_curves_ref(
    sources: &[&CurveSource],
    h_cap: f64,
    range: (f64, f64),
    period: f64,
) -> Vec<CoshCurve> {
    let mut out = Vec::new();
    for s in sources {
        if s.amp > h_cap {
            continue;
        }
        let w = if h_cap.is_finite() {
            4.0 * (h_cap / s.amp).acosh()
        } else {
            3.0 * period
        };
        let n_lo = ((s.c - range.1 - w) / period).ceil() as i64;
        let n_hi = ((s.c - range.0 + w) / period).floor() as i64;
        for n in n_lo..=n_hi {
            out.push(CoshCurve {
                q: s.q,
                n,
                mult: 1,
                u0: s.c - n as f64 * period,
                amp: s.amp,
            });
        }
    }
    out
}

fn clip(pieces: &[Piece], window: (f64, f64)) -> Vec<Piece> {
    pieces
        .iter()
        .filter(|p| p.u_hi > window.0 && p.u_lo < window.1)
        .map(|p| Piece {
            u_lo: p.u_lo.max(window.0),
            u_hi: p.u_hi.min(window.1),
            top: p.top,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::claims::verify_claims;
    use super::*;
    use crate::cfq::build_spectral;

    fn env_for(s: &str, eps_ref: f64) -> (ResonanceCatalog, Envelope) {
        let cf: PeriodicCf = s.parse().unwrap();
        let sd = build_spectral(&cf).unwrap();
        let mut cat = ResonanceCatalog::build(&sd, &BigRational::from_integer(4.into())).unwrap();
        let env = Envelope::build(&mut cat, &EnvelopeOptions { rho: 1.0, eps_ref }).unwrap();
        (cat, env)
    }

    #[test]
    fn metallic_corners() {
        for s in ["per:1", "per:2", "per:3"] {
            let (mut cat, env) = env_for(s, 1e-8);
            let rep = verify_claims(&mut cat, &env).unwrap();
            assert!(rep.all_pass(), "{s}: {:?}", rep.checks);
            let k = &env.constants;
            let ch = env.corners_h1()[0];
            assert!((ch.u - k.u_prime(env.n_window)).abs() < 1e-9);
            assert!((env.h(1, ch.u) / k.j1 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn golden_colored_h1_is_primary_only() {
        let (mut cat, env) = env_for("per:1,3", 1e-8);
        assert_eq!(env.corners().len(), 4);
        assert_eq!(env.corners_h1().len(), 1);
        let (lo, hi) = env.window;
        for i in 0..=200 {
            let u = lo + (hi - lo) * i as f64 / 200.0;
            assert!((env.h(1, u) / env.h_bar(1, u) - 1.0).abs() < 1e-9);
        }
        let rep = verify_claims(&mut cat, &env).unwrap();
        let failing: Vec<_> = rep.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
        assert_eq!(failing, vec!["B1"]);
    }

    #[test]
    fn metallic_colored_loses_primary_dominance() {
        let (mut cat, env) = env_for("per:2,3", 1e-8);
        assert!(env.corners_h1().len() >= 2);
        assert!(env.level_extrema(1).1 < env.constants.j1 - 1e-6);
        assert!(verify_claims(&mut cat, &env).unwrap().all_pass());
    }

    #[test]
    fn windows_are_periodic() {
        let (_, a) = env_for("per:1,2", 1e-8);
        let (_, b) = env_for("per:1,2", 1e-8 / a.constants.lambda.powi(4));
        assert_eq!(b.n_window, a.n_window + 1);
        assert_eq!(a.corners().len(), b.corners().len());
        for (x, y) in a.corners().iter().zip(b.corners()) {
            assert!((x.u - a.period() - y.u).abs() < 1e-9);
            assert_eq!(x.kind, y.kind);
        }
        for i in 0..50 {
            let u = a.window.0 + 0.3 + 0.1 * i as f64;
            assert!((a.h(2, u) - b.h(2, u - a.period())).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_law_for_dominant_harmonics() {
        let (_, env) = env_for("per:2,3", 1e-8);
        let l4 = env.constants.lambda.powi(4);
        for eps in [3e-9, 1e-8, 4e-8, 2e-7] {
            let here = env.dominant_at(eps).unwrap();
            let there = env.dominant_at(l4 * eps).unwrap();
            for i in 0..3 {
                let mapped = env.u_mat.apply(&there.s[i]).to_half_lattice();
                assert_eq!(here.s[i], mapped, "eps {eps} rank {}", i + 1);
            }
        }
    }

    #[test]
    fn metallic_kappa_is_one_at_centre() {
        let (_, env) = env_for("per:2", 1e-8);
        let d = env.dominant_at(env.constants.eps_hat(env.n_window)).unwrap();
        assert_eq!(d.kappa, BigInt::from(1));
        assert_eq!(d.curves[0].q, 1);
    }

    #[test]
    fn multiple_primaries_are_both_used() {
        let (_, env) = env_for("per:1,2,2", 1e-8);
        assert_eq!(env.q_hat, vec![1, 3]);
        let qs: Vec<u64> = env.corners_h1().iter().flat_map(|c| c.curves.iter().map(|r| r.q)).collect();
        assert!(qs.contains(&1) && qs.contains(&3));
    }
}
