//! Kinetic sweep computing the three lowest levels of a family of cosh curves.
//!
//! Between events the ordered triple of lowest curves is constant. The next event is the
//! earliest crossing between adjacent members of the triple, or between the third member and
//! any outsider. At an event the triple is recomputed from scratch in right-limit order, which
//! absorbs coincident crossings (several curves through one point) into a single event.

use super::curve::CoshCurve;
use crate::error::{Error, Result};

pub(crate) const LEVELS: usize = 3;

/// Relative value gap under which two curves count as tied at a point.
const VALUE_TIE: f64 = 1e-11;

/// Crossings closer than this (relative to `max(1, |u|)`) to the current point are merged.
pub(crate) const MERGE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub(crate) struct Piece {
    pub u_lo: f64,
    pub u_hi: f64,
    pub top: [usize; LEVELS],
}

#[derive(Clone, Debug)]
pub(crate) struct Event {
    pub u: f64,
    pub before: [usize; LEVELS],
    pub after: [usize; LEVELS],
}

fn right_less(curves: &[CoshCurve], i: usize, j: usize, u: f64) -> bool {
    let (a, b) = (&curves[i], &curves[j]);
    let (va, vb) = (a.value(u), b.value(u));
    if (va - vb).abs() > VALUE_TIE * va.max(vb) {
        return va < vb;
    }
    let (sa, sb) = (a.slope(u), b.slope(u));
    if (sa - sb).abs() > 1e-9 * (sa.abs() + sb.abs()) {
        return sa < sb;
    }
    let (ca, cb) = (a.curvature(u), b.curvature(u));
    if (ca - cb).abs() > 1e-9 * (ca + cb) {
        return ca < cb;
    }
    i < j
}

fn select_top(curves: &[CoshCurve], u: f64) -> [usize; LEVELS] {
    let mut top = [usize::MAX; LEVELS];
    for slot in 0..LEVELS {
        let mut best: Option<usize> = None;
        for i in 0..curves.len() {
            if top[..slot].contains(&i) {
                continue;
            }
            best = match best {
                Some(b) if !right_less(curves, i, b, u) => Some(b),
                _ => Some(i),
            };
        }
        top[slot] = best.expect("at least LEVELS curves");
    }
    top
}

/// Sweeps `[lo, hi]` and returns the constant pieces of the lowest-three assignment plus the
/// points where it changes.
pub(crate) fn sweep(curves: &[CoshCurve], lo: f64, hi: f64) -> Result<(Vec<Piece>, Vec<Event>)> {
    if curves.len() < LEVELS {
        return Err(Error::InvalidInput(format!(
            "need at least {LEVELS} curves, got {}",
            curves.len()
        )));
    }
    let mut pieces = Vec::new();
    let mut events = Vec::new();
    let mut u = lo;
    let mut top = select_top(curves, u);
    let mut guard = 0usize;
    loop {
        guard += 1;
        if guard > 200_000 {
            return Err(Error::Numerical("envelope sweep does not advance".into()));
        }
        let floor = u + MERGE_TOL * u.abs().max(1.0);
        let mut next = hi;
        let mut consider = |i: usize, j: usize| -> Result<()> {
            if let Some(x) = curves[i].intersect(&curves[j])? {
                if x > floor && x < next {
                    next = x;
                }
            }
            Ok(())
        };
        for w in top.windows(2) {
            consider(w[0], w[1])?;
        }
        let last = top[LEVELS - 1];
        for j in 0..curves.len() {
            if !top.contains(&j) {
                consider(last, j)?;
            }
        }
        pieces.push(Piece {
            u_lo: u,
            u_hi: next,
            top,
        });
        if next >= hi {
            break;
        }
        let after = select_top(curves, next);
        if after != top {
            events.push(Event {
                u: next,
                before: top,
                after,
            });
        }
        top = after;
        u = next;
    }
    Ok((merge_pieces(pieces), events))
}

fn merge_pieces(pieces: Vec<Piece>) -> Vec<Piece> {
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        match out.last_mut() {
            Some(prev) if prev.top == p.top => prev.u_hi = p.u_hi,
            _ => out.push(p),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(q: u64, u0: f64, amp: f64) -> CoshCurve {
        CoshCurve {
            q,
            n: 0,
            mult: 1,
            u0,
            amp,
        }
    }

    /// Dense-sampling oracle for the sorted lowest three indices.
    fn brute(curves: &[CoshCurve], u: f64) -> [usize; LEVELS] {
        let mut idx: Vec<usize> = (0..curves.len()).collect();
        idx.sort_by(|&a, &b| curves[a].value(u).total_cmp(&curves[b].value(u)));
        [idx[0], idx[1], idx[2]]
    }

    #[test]
    fn matches_sampling_on_periodic_family() {
        let mut curves = Vec::new();
        for n in -4..=4 {
            curves.push(c(1, 4.0 * n as f64, 1.0));
            curves.push(c(7, 4.0 * n as f64 + 1.3, 1.9));
            curves.push(c(4, 4.0 * n as f64 - 0.7, 2.4));
        }
        let (pieces, events) = sweep(&curves, -6.0, 6.0).unwrap();
        assert!(!events.is_empty());
        for p in &pieces {
            let mid = 0.5 * (p.u_lo + p.u_hi);
            assert_eq!(p.top, brute(&curves, mid), "at {mid}");
        }
        assert!((pieces[0].u_lo + 6.0).abs() < 1e-15);
        assert!((pieces.last().unwrap().u_hi - 6.0).abs() < 1e-15);
    }

    #[test]
    fn triple_point_is_one_event() {
        // three curves through (0, 2): two symmetric ones and a flat one in between
        let a = c(1, -4.0, 2.0 / 1f64.cosh());
        let b = c(2, 4.0, 2.0 / 1f64.cosh());
        let m = c(3, 0.0, 2.0);
        let low = c(4, 0.0, 0.5);
        let curves = vec![a, b, m, low];
        let (_, events) = sweep(&curves, -1.0, 1.0).unwrap();
        let second_changes = events.iter().filter(|e| e.before[1] != e.after[1]).count();
        assert_eq!(second_changes, 1);
    }
}
