//! First-order splitting model.
//!
//! The Melnikov potential is `L(theta) = sum_k L_k cos(<k, theta> - sigma_k)` with
//! `L_k = alpha_k e^{-beta_k}`, `alpha_k = 4 pi gamma_k / (|k| sqrt(eps))` and
//! `beta_k = rho |k| + pi gamma_k / (2 |k| sqrt(eps))`. The coefficients underflow any float
//! format at interesting `eps`, so everything is kept as logs relative to the dominant
//! coefficient `L_{S1}`; the common factor `mu L_{S1}` (with `mu = eps^r`) only enters
//! `base_log`. Zeros of `M = grad L` and the eigenvalues there do not depend on that factor.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::exactnum::{IVec2, Surd};
use crate::resonance::ResonanceCatalog;

/// Above this value of `eta` the two-harmonic picture is not trusted and zero finding refuses.
pub const ETA_MAX: f64 = 0.1;

const NEWTON_ITERS: usize = 50;

#[derive(Clone, Debug)]
pub struct SplittingParams {
    pub rho: f64,
    /// `mu = eps^r`.
    pub r: f64,
    /// Phases `sigma_k`; missing entries are 0 (the reversible case).
    pub phases: HashMap<IVec2, f64>,
    /// Harmonics more than this many nats below the reference level are dropped.
    pub cutoff_nats: f64,
    /// Measure the cutoff from `L_{S2}` instead of `L_{S1}`, so that `S2` and everything
    /// comparable to it is kept. Needed for zeros whenever `h2 - h1` is large.
    pub keep_second: bool,
}

impl Default for SplittingParams {
    fn default() -> Self {
        SplittingParams {
            rho: 1.0,
            r: 3.5,
            phases: HashMap::new(),
            cutoff_nats: 46.0,
            keep_second: true,
        }
    }
}

impl SplittingParams {
    pub fn phase(&self, k: &IVec2) -> f64 {
        self.phases.get(k).copied().unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Harmonic {
    pub k: IVec2,
    /// `ln L_k - ln L_{S1}`
    pub rel_log: f64,
    pub beta: f64,
    pub log_alpha: f64,
    pub phase: f64,
    pub essential: bool,
}

impl Harmonic {
    pub fn l1(&self) -> f64 {
        let k = self.k.to_f64();
        k[0].abs() + k[1].abs()
    }
}

/// Harmonics of the Melnikov potential at one `eps`, sorted by decreasing `L_k`.
#[derive(Clone, Debug, Serialize)]
pub struct HarmonicSet {
    pub eps: f64,
    /// `ln(mu alpha_{S1}) - beta_{S1}`
    pub base_log: f64,
    pub entries: Vec<Harmonic>,
    /// Index in `entries` of the second essential harmonic, if it survived the cutoff.
    pub s2_index: Option<usize>,
}

impl HarmonicSet {
    pub fn s1(&self) -> &Harmonic {
        &self.entries[0]
    }

    pub fn s2(&self) -> Option<&Harmonic> {
        self.s2_index.map(|i| &self.entries[i])
    }

    pub fn kappa(&self) -> Option<BigInt> {
        self.s2().map(|s2| self.s1().k.det(&s2.k).abs())
    }

    /// Keeps only the harmonics within `nats` of the top one.
    pub fn truncated(&self, nats: f64) -> HarmonicSet {
        let entries: Vec<Harmonic> = self.entries.iter().filter(|h| h.rel_log >= -nats).cloned().collect();
        let s2_index = entries.iter().skip(1).position(|h| h.essential).map(|i| i + 1);
        HarmonicSet {
            eps: self.eps,
            base_log: self.base_log,
            entries,
            s2_index,
        }
    }

    fn find(&self, k: &IVec2) -> Option<&Harmonic> {
        self.entries.iter().find(|h| &h.k == k)
    }
}

/// Enumerates every harmonic within `cutoff_nats` of the reference level (`L_{S1}`, or
/// `L_{S2}` with `keep_second`).
///
/// Since `gamma_k <= |k| / 2`, every coefficient obeys `ln L_k <= ln(2 pi / sqrt(eps)) - rho |k|`,
/// and `|k| >= q`, so the scan over `q` stops once that bound drops below the reference level
/// minus the cutoff. Only quasi-resonant vectors `(-rint(q Omega), q)` are scanned: any other
/// `k` has `|<k, omega>| >= 1/2` and `ln L_k <= ln(2 pi / sqrt(eps)) - pi / (4 sqrt(eps))`,
/// which the regime guard requires to be below the cutoff as well.
pub fn build_harmonics(catalog: &ResonanceCatalog, params: &SplittingParams, eps: f64) -> Result<HarmonicSet> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !(params.rho > 0.0) || !(params.cutoff_nats > 0.0) {
        return Err(Error::InvalidInput("rho and cutoff_nats must be positive".into()));
    }
    let omega = catalog.spectral().omega.clone();
    let sqrt_eps = eps.sqrt();
    let amp_bound = (2.0 * PI / sqrt_eps).ln();
    let mut raw: Vec<Harmonic> = Vec::new();
    // two largest essential log-coefficients so far
    let mut top = [f64::NEG_INFINITY; 2];
    let mut q: u64 = 1;
    loop {
        let reference = if params.keep_second { top[1] } else { top[0] };
        if reference.is_finite() && amp_bound - params.rho * (q as f64) < reference - params.cutoff_nats {
            break;
        }
        if q > 50_000_000 {
            return Err(Error::IterationLimit(50_000_000));
        }
        let qb = BigInt::from(q);
        let x = omega.mul_int(&qb);
        let p = x.rint()?;
        let k = IVec2::new(-&p, qb.clone());
        let small = (&x - &Surd::from_int(p.clone())).abs().to_f64();
        let norm = (p.abs() + &qb).to_f64().unwrap_or(f64::INFINITY);
        let gamma = small * norm;
        let beta = params.rho * norm + PI * gamma / (2.0 * norm * sqrt_eps);
        let log_alpha = (4.0 * PI * gamma).ln() - norm.ln() - sqrt_eps.ln();
        let log_l = log_alpha - beta;
        let essential = p.gcd(&qb) == BigInt::from(1);
        if essential {
            if log_l > top[0] {
                top = [log_l, top[0]];
            } else if log_l > top[1] {
                top[1] = log_l;
            }
        }
        raw.push(Harmonic {
            essential,
            phase: params.phase(&k),
            k,
            rel_log: log_l,
            beta,
            log_alpha,
        });
        q += 1;
    }
    raw.sort_by(|a, b| b.rel_log.total_cmp(&a.rel_log));
    if !raw[0].essential {
        return Err(Error::Invariant("a non-essential harmonic dominates".into()));
    }
    let s1 = raw[0].clone();
    if s1.beta < 1.0 {
        return Err(Error::Regime(format!(
            "eps = {eps:e} is not asymptotic: beta_S1 = {:.3} < 1",
            s1.beta
        )));
    }
    let reference = if params.keep_second { top[1] } else { top[0] };
    let outside = amp_bound - PI / (4.0 * sqrt_eps);
    if outside >= reference - params.cutoff_nats {
        return Err(Error::Regime(format!(
            "eps = {eps:e} too large: non-resonant harmonics are not negligible"
        )));
    }
    let top_log = s1.rel_log;
    let mut entries: Vec<Harmonic> = raw
        .into_iter()
        .filter(|h| h.rel_log >= reference - params.cutoff_nats)
        .collect();
    for h in &mut entries {
        h.rel_log -= top_log;
    }
    let s2_index = entries.iter().skip(1).position(|h| h.essential).map(|i| i + 1);
    Ok(HarmonicSet {
        eps,
        base_log: params.r * eps.ln() + top_log,
        entries,
        s2_index,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EtaParameters {
    pub eta_21: f64,
    pub eta_2hat1: f64,
    pub eta_31: f64,
    pub eta_32: f64,
    /// `max(eta_2hat1, eta_31, eta_32)`
    pub eta: f64,
    /// Index of non-essentiality from the actual coefficients: largest `c` with `L_{c S1} >= L_{S2}`.
    pub m_index: u32,
}

/// Relative sizes of the remainders in the one- and two-harmonic approximations.
///
/// Harmonics below the cutoff count as 0, so every value is exact up to `e^{-cutoff}`.
pub fn eta_parameters(hset: &HarmonicSet) -> Result<EtaParameters> {
    let s1 = hset.s1();
    let s2 = hset
        .s2()
        .ok_or_else(|| Error::Regime("second essential harmonic is below the cutoff".into()))?;
    let mut m = 1u32;
    loop {
        let c = BigInt::from(m + 1);
        match hset.find(&s1.k.scale(&c)) {
            Some(h) if h.rel_log >= s2.rel_log => m += 1,
            _ => break,
        }
    }
    let multiples: Vec<IVec2> = (2..=m).map(|c| s1.k.scale(&BigInt::from(c))).collect();
    let eta_21 = hset.entries.get(1).map_or(0.0, |h| h.rel_log.exp());
    let eta_2hat1 = if m == 1 {
        0.0
    } else {
        hset.find(&multiples[0]).map_or(0.0, |h| h.rel_log.exp())
    };
    let third = hset
        .entries
        .iter()
        .skip(1)
        .find(|h| h.k != s2.k && !multiples.contains(&h.k))
        .map(|h| h.rel_log);
    let (eta_31, eta_32) = match third {
        Some(l) => (l.exp(), (l - s2.rel_log).exp()),
        None => (0.0, 0.0),
    };
    Ok(EtaParameters {
        eta_21,
        eta_2hat1,
        eta_31,
        eta_32,
        eta: eta_2hat1.max(eta_31).max(eta_32),
        m_index: m,
    })
}

/// Truncated potential in `theta`, with coefficients scaled so that `L_{S1} = 1`.
#[derive(Clone, Debug)]
pub struct ScaledPotential {
    terms: Vec<([f64; 2], f64, f64)>,
}

impl ScaledPotential {
    pub fn new(hset: &HarmonicSet) -> Self {
        ScaledPotential {
            terms: hset
                .entries
                .iter()
                .map(|h| (h.k.to_f64(), h.rel_log.exp(), h.phase))
                .collect(),
        }
    }

    pub fn value(&self, th: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|(k, w, s)| w * (k[0] * th[0] + k[1] * th[1] - s).cos())
            .sum()
    }

    /// `M(theta) = grad L`
    pub fn gradient(&self, th: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (k, w, s) in &self.terms {
            let v = -w * (k[0] * th[0] + k[1] * th[1] - s).sin();
            g[0] += k[0] * v;
            g[1] += k[1] * v;
        }
        g
    }
}

/// The potential `K(psi)` on one sheet of the change `psi_i = <S_i, theta> - sigma_{S_i}`.
///
/// Every harmonic is written as `k = c1 S1 + c2 S2` with `c = (det(k, S2), det(S1, k)) / det A`
/// computed in integers, so the `S1` and `S2` terms have exact coefficients `(1, 0)` and
/// `(0, 1)`. This keeps `d K / d psi_2` and `det D^2 K` accurate even when `L_{S2}` is hundreds
/// of nats below `L_{S1}`, where the same quantities in `theta` cancel catastrophically.
#[derive(Clone, Debug)]
pub struct PsiFrame {
    /// `(c, weight, offset)`; the phase of a term is `c . psi + offset`.
    terms: Vec<([f64; 2], f64, f64)>,
    rows: [[f64; 2]; 2],
    inv: [[f64; 2]; 2],
    shift: [f64; 2],
    pub kappa: u64,
}

impl PsiFrame {
    fn new(hset: &HarmonicSet, s2: &IVec2, tau: [f64; 2], sheet: [i64; 2]) -> Result<PsiFrame> {
        let s1 = &hset.s1().k;
        let det = s1.det(s2);
        let det_i = det
            .to_i64()
            .filter(|d| *d != 0)
            .ok_or_else(|| Error::Invariant(format!("det(S1, S2) = {det} is unusable")))?;
        let mut terms = Vec::with_capacity(hset.entries.len());
        for h in &hset.entries {
            let n = [h.k.det(s2), s1.det(&h.k)];
            let n = [
                n[0].to_i64().ok_or(Error::Overflow("harmonic coefficient".into()))?,
                n[1].to_i64().ok_or(Error::Overflow("harmonic coefficient".into()))?,
            ];
            let c = [n[0] as f64 / det_i as f64, n[1] as f64 / det_i as f64];
            let lattice = (n[0] as i128 * sheet[0] as i128 + n[1] as i128 * sheet[1] as i128).rem_euclid(det_i.abs() as i128);
            let offset = c[0] * tau[0] + c[1] * tau[1] + TAU * lattice as f64 / det_i.abs() as f64 - h.phase;
            terms.push((c, h.rel_log.exp(), offset));
        }
        let r1 = s1.to_f64();
        let r2 = s2.to_f64();
        let d = det_i as f64;
        Ok(PsiFrame {
            terms,
            rows: [r1, r2],
            inv: [[r2[1] / d, -r1[1] / d], [-r2[0] / d, r1[0] / d]],
            shift: [tau[0] + TAU * sheet[0] as f64, tau[1] + TAU * sheet[1] as f64],
            kappa: det_i.unsigned_abs(),
        })
    }

    pub fn value(&self, psi: [f64; 2]) -> f64 {
        self.terms
            .iter()
            .map(|(c, w, o)| w * (c[0] * psi[0] + c[1] * psi[1] + o).cos())
            .sum()
    }

    pub fn gradient(&self, psi: [f64; 2]) -> [f64; 2] {
        let mut g = [0.0; 2];
        for (c, w, o) in &self.terms {
            let v = -w * (c[0] * psi[0] + c[1] * psi[1] + o).sin();
            g[0] += c[0] * v;
            g[1] += c[1] * v;
        }
        g
    }

    /// `D^2 K` as `[k11, k12, k22]`.
    pub fn hessian(&self, psi: [f64; 2]) -> [f64; 3] {
        let mut h = [0.0; 3];
        for (c, w, o) in &self.terms {
            let v = -w * (c[0] * psi[0] + c[1] * psi[1] + o).cos();
            h[0] += c[0] * c[0] * v;
            h[1] += c[0] * c[1] * v;
            h[2] += c[1] * c[1] * v;
        }
        h
    }

    /// The point of `T^2` with these `psi` on this sheet.
    pub fn theta(&self, psi: [f64; 2]) -> [f64; 2] {
        let x = [psi[0] + self.shift[0], psi[1] + self.shift[1]];
        wrap([
            self.inv[0][0] * x[0] + self.inv[0][1] * x[1],
            self.inv[1][0] * x[0] + self.inv[1][1] * x[1],
        ])
    }

    /// `M = grad_theta L = A^T grad_psi K`
    pub fn splitting(&self, psi: [f64; 2]) -> [f64; 2] {
        let g = self.gradient(psi);
        let [r1, r2] = self.rows;
        [r1[0] * g[0] + r2[0] * g[1], r1[1] * g[0] + r2[1] * g[1]]
    }

    /// Smallest eigenvalue modulus of `D^2 L = A^T D^2 K A`, from its exact-ish determinant
    /// `det(A)^2 det D^2 K` and trace, as `2|D| / (|T| + sqrt(T^2 - 4D))`.
    pub fn min_eigenvalue(&self, psi: [f64; 2]) -> f64 {
        let h = self.hessian(psi);
        let [r1, r2] = self.rows;
        let det = (self.kappa as f64).powi(2) * (h[0] * h[2] - h[1] * h[1]);
        let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
        let tr = h[0] * dot(r1, r1) + 2.0 * h[1] * dot(r1, r2) + h[2] * dot(r2, r2);
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        if tr.abs() + disc == 0.0 {
            0.0
        } else {
            2.0 * det.abs() / (tr.abs() + disc)
        }
    }
}

/// Representatives of `Z^2 / A Z^2`, i.e. the `kappa` sheets of the change to `psi`.
fn sheets(s1: &IVec2, s2: &IVec2) -> Vec<[i64; 2]> {
    let det = s1.det(s2).abs().to_i64().unwrap_or(0).max(1);
    let (r1, r2) = (s1.to_f64(), s2.to_f64());
    let d = s1.det(s2).to_f64().unwrap_or(1.0);
    let inv = [[r2[1] / d, -r1[1] / d], [-r2[0] / d, r1[0] / d]];
    let mut reps: Vec<([i64; 2], [f64; 2])> = Vec::new();
    'outer: for j1 in 0..det {
        for j2 in 0..det {
            let x = [TAU * j1 as f64, TAU * j2 as f64];
            let th = wrap([inv[0][0] * x[0] + inv[0][1] * x[1], inv[1][0] * x[0] + inv[1][1] * x[1]]);
            if reps.iter().all(|(_, t)| torus_dist(*t, th) > 1e-9) {
                reps.push(([j1, j2], th));
                if reps.len() as i64 == det {
                    break 'outer;
                }
            }
        }
    }
    reps.into_iter().map(|(j, _)| j).collect()
}

/// A vector completing `k` to a unimodular basis, used when `S2` is not available.
fn complement(k: &IVec2) -> IVec2 {
    let g = k.k1.extended_gcd(&k.k2);
    // k1 x + k2 y = 1, so det(k, (-y, x)) = 1
    IVec2::new(-g.y, g.x)
}

fn frames(hset: &HarmonicSet) -> Result<Vec<PsiFrame>> {
    let s1 = hset.s1();
    let (s2, tau2) = match hset.s2() {
        Some(h) => (h.k.clone(), h.phase),
        None => (complement(&s1.k), 0.0),
    };
    sheets(&s1.k, &s2)
        .into_iter()
        .map(|j| PsiFrame::new(hset, &s2, [s1.phase, tau2], j))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct SplittingZero {
    pub theta: [f64; 2],
    pub psi: [f64; 2],
    /// Unperturbed critical point in `psi`, as multiples of `pi`.
    pub psi0: [u8; 2],
    /// `ln` of the smallest eigenvalue modulus of `D M(theta*)`, including `base_log`.
    pub log_min_eig: f64,
    /// `det D^2 K(psi*) / (delta1 delta2 L_{S1} L_{S2})`, ideally `1 + O(eta)`.
    pub det_ratio: f64,
    pub nondegenerate: bool,
}

fn torus_dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = |x: f64, y: f64| {
        let t = (x - y).rem_euclid(TAU);
        t.min(TAU - t)
    };
    d(a[0], b[0]).max(d(a[1], b[1]))
}

fn wrap(th: [f64; 2]) -> [f64; 2] {
    // tiny negative angles would otherwise come back as TAU
    let w = |x: f64| {
        let r = x.rem_euclid(TAU);
        if TAU - r < 1e-12 { 0.0 } else { r }
    };
    [w(th[0]), w(th[1])]
}

/// Psi-space frames for each sheet; public for gradient and Hessian checks.
pub fn psi_frames(hset: &HarmonicSet) -> Result<Vec<PsiFrame>> {
    frames(hset)
}

/// Newton iteration on `grad K = 0` from the unperturbed critical points
/// `psi^{*,0} in {0, pi}^2` on each of the `kappa` sheets, giving `4 kappa` zeros of `M`.
pub fn find_zeros(hset: &HarmonicSet) -> Result<Vec<SplittingZero>> {
    find_zeros_with(hset, ETA_MAX)
}

/// [`find_zeros`] with a custom refusal threshold; `f64::INFINITY` never refuses.
pub fn find_zeros_with(hset: &HarmonicSet, eta_max: f64) -> Result<Vec<SplittingZero>> {
    let eta = eta_parameters(hset)?;
    if eta.eta >= eta_max {
        return Err(Error::Regime(format!(
            "eta = {:.3e} >= {eta_max}: eps is too close to a transition",
            eta.eta
        )));
    }
    let l2 = hset.s2().expect("checked by eta_parameters").rel_log.exp();
    let mut zeros: Vec<SplittingZero> = Vec::new();
    for frame in frames(hset)? {
        for psi0 in [[0u8, 0u8], [1, 0], [0, 1], [1, 1]] {
            let mut psi = [psi0[0] as f64 * PI, psi0[1] as f64 * PI];
            let mut converged = false;
            for _ in 0..NEWTON_ITERS {
                let g = frame.gradient(psi);
                let h = frame.hessian(psi);
                let det = h[0] * h[2] - h[1] * h[1];
                if det == 0.0 || !det.is_finite() {
                    break;
                }
                let step = [(h[2] * g[0] - h[1] * g[1]) / det, (h[0] * g[1] - h[1] * g[0]) / det];
                psi = [psi[0] - step[0], psi[1] - step[1]];
                if step[0].abs().max(step[1].abs()) <= 1e-14 {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::IterationLimit(NEWTON_ITERS));
            }
            let theta = frame.theta(psi);
            if zeros.iter().any(|z| torus_dist(z.theta, theta) < 1e-9) {
                return Err(Error::Invariant(format!("two seeds converged to the same zero {theta:?}")));
            }
            let h = frame.hessian(psi);
            let sign = if psi0[0] == psi0[1] { 1.0 } else { -1.0 };
            let det_k = h[0] * h[2] - h[1] * h[1];
            let min_eig = frame.min_eigenvalue(psi);
            zeros.push(SplittingZero {
                theta,
                psi,
                psi0,
                log_min_eig: min_eig.ln() + hset.base_log,
                det_ratio: sign * det_k / l2,
                nondegenerate: min_eig > 0.0 && sign * det_k > 0.0,
            });
        }
    }
    Ok(zeros)
}

#[derive(Clone, Debug, Serialize)]
pub struct SplittingMeasures {
    /// `ln max |M(theta)|_1`
    pub log_max_m: f64,
    /// `ln m*`, smallest eigenvalue modulus over all zeros.
    pub log_m_star: f64,
    /// `max |M| / (|S1|_1 L_{S1})`
    pub ratio_max: f64,
    /// `m* / (sqrt(eps) L_{S2})`
    pub ratio_mstar: f64,
}

fn norm1(v: [f64; 2]) -> f64 {
    v[0].abs() + v[1].abs()
}

/// `max |M|_1` in units of `L_{S1}`: a grid over `psi` on every sheet, then compass search
/// from the best grid points.
pub fn max_splitting(hset: &HarmonicSet) -> Result<f64> {
    const N: usize = 64;
    let frames = frames(hset)?;
    let mut starts: Vec<(f64, usize, [f64; 2])> = Vec::new();
    for (fi, fr) in frames.iter().enumerate() {
        for i in 0..N {
            for j in 0..N {
                let psi = [TAU * i as f64 / N as f64, TAU * j as f64 / N as f64];
                starts.push((norm1(fr.splitting(psi)), fi, psi));
            }
        }
    }
    starts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = starts[0].0;
    for &(v0, fi, p0) in starts.iter().take(8) {
        let fr = &frames[fi];
        let (mut v, mut psi) = (v0, p0);
        let mut step = 0.5 * TAU / N as f64;
        while step > 1e-13 {
            let mut moved = false;
            for d in [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]] {
                let cand = [psi[0] + step * d[0], psi[1] + step * d[1]];
                let fc = norm1(fr.splitting(cand));
                if fc > v {
                    v = fc;
                    psi = cand;
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = best.max(v);
    }
    Ok(best)
}

pub fn splitting_measures(hset: &HarmonicSet, zeros: &[SplittingZero]) -> Result<SplittingMeasures> {
    if zeros.is_empty() {
        return Err(Error::InvalidInput("no zeros to measure".into()));
    }
    let max_scaled = max_splitting(hset)?;
    let log_m_star = zeros.iter().map(|z| z.log_min_eig).fold(f64::INFINITY, f64::min);
    let s2 = hset
        .s2()
        .ok_or_else(|| Error::Regime("second essential harmonic is below the cutoff".into()))?;
    Ok(SplittingMeasures {
        log_max_m: max_scaled.ln() + hset.base_log,
        log_m_star,
        ratio_max: max_scaled / hset.s1().l1(),
        ratio_mstar: (log_m_star - 0.5 * hset.eps.ln() - hset.base_log - s2.rel_log).exp(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MelnikovReport {
    pub eps: f64,
    pub u: f64,
    #[serde(rename = "S1")]
    pub s1: IVec2,
    #[serde(rename = "S2")]
    pub s2: IVec2,
    #[serde(serialize_with = "crate::exactnum::ser_big")]
    pub kappa: BigInt,
    pub m_index: u32,
    /// Index of non-essentiality read off the envelope, when one was supplied.
    pub m_index_envelope: Option<u32>,
    /// Whether `S1`, `S2` agree with the envelope's dominant harmonics.
    pub envelope_agrees: Option<bool>,
    pub eta: EtaParameters,
    pub zeros: Vec<SplittingZero>,
    pub log_max_m: f64,
    pub log_m_star: f64,
    pub ratios: Ratios,
    pub harmonics: usize,
    pub note: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Ratios {
    pub max: f64,
    pub mstar: f64,
}

/// The whole pipeline at one `eps`; refuses where `eta >= ETA_MAX`.
pub fn analyze_eps(
    catalog: &ResonanceCatalog,
    env: Option<&Envelope>,
    params: &SplittingParams,
    eps: f64,
) -> Result<MelnikovReport> {
    analyze_eps_with(catalog, env, params, eps, ETA_MAX)
}

/// [`analyze_eps`] with a custom refusal threshold for `eta`.
pub fn analyze_eps_with(
    catalog: &ResonanceCatalog,
    env: Option<&Envelope>,
    params: &SplittingParams,
    eps: f64,
    eta_max: f64,
) -> Result<MelnikovReport> {
    let hset = build_harmonics(catalog, params, eps)?;
    let eta = eta_parameters(&hset)?;
    let zeros = find_zeros_with(&hset, eta_max)?;
    let meas = splitting_measures(&hset, &zeros)?;
    let s1 = hset.s1().k.clone();
    let s2 = hset.s2().expect("zeros need S2").k.clone();
    let (m_env, agrees) = match env {
        Some(e) => {
            let d = e.dominant_at(eps)?;
            (Some(d.m_index), Some(d.s[0] == s1 && d.s[1] == s2))
        }
        None => (None, None),
    };
    Ok(MelnikovReport {
        eps,
        u: eps.ln(),
        kappa: s1.det(&s2).abs(),
        s1,
        s2,
        m_index: eta.m_index,
        m_index_envelope: m_env,
        envelope_agrees: agrees,
        eta,
        zeros,
        log_max_m: meas.log_max_m,
        log_m_star: meas.log_m_star,
        ratios: Ratios {
            max: meas.ratio_max,
            mstar: meas.ratio_mstar,
        },
        harmonics: hset.entries.len(),
        note: "first order in mu: tau_k = sigma_k",
    })
}

/// One row of a sweep. Points with `eta >= ETA_MAX` are still computed but flagged, since
/// the two-harmonic estimates are not trusted there; `error` holds anything that failed.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub u: f64,
    pub report: Option<MelnikovReport>,
    pub near_transition: bool,
    pub error: Option<String>,
}

/// Runs the pipeline over `eps` values in parallel without refusing; output order follows
/// the input.
pub fn sweep(
    catalog: &ResonanceCatalog,
    env: Option<&Envelope>,
    params: &SplittingParams,
    eps: &[f64],
) -> Vec<SweepRow> {
    eps.par_iter()
        .map(|&e| match analyze_eps_with(catalog, env, params, e, f64::INFINITY) {
            Ok(r) => SweepRow {
                eps: e,
                u: e.ln(),
                near_transition: r.eta.eta >= ETA_MAX,
                report: Some(r),
                error: None,
            },
            Err(err) => SweepRow {
                eps: e,
                u: e.ln(),
                report: None,
                near_transition: false,
                error: Some(err.to_string()),
            },
        })
        .collect()
}
