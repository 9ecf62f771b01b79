//! Lower envelopes of lines and segments with exact rational arithmetic,
//! and their transcription into DS sequences.
//!
//! An envelope is a list of pieces over consecutive open x-intervals; each
//! piece names the segment attaining the minimum there (smaller id on
//! ties) or is a gap where no segment is defined. Endpoints are handled
//! right-continuously: a piece of zero width is never emitted.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sequence::{ds_order, Sym};

pub type Q = BigRational;

/// `y = a x + b` on `[x1, x2]`; a missing end is unbounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub x1: Option<Q>,
    pub x2: Option<Q>,
    pub a: Q,
    pub b: Q,
}

impl Segment {
    pub fn line(a: Q, b: Q) -> Self {
        Segment { x1: None, x2: None, a, b }
    }

    pub fn at(&self, x: &Q) -> Q {
        &self.a * x + &self.b
    }

    pub fn defined_at(&self, x: &Q) -> bool {
        self.x1.as_ref().map_or(true, |l| l <= x) && self.x2.as_ref().map_or(true, |r| x <= r)
    }
}

/// An x-coordinate or an infinite end.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bound {
    NegInf,
    At(Q),
    PosInf,
}

/// `(lo, hi, id)` over the open interval `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub lo: Bound,
    pub hi: Bound,
    pub id: Option<usize>,
}

/// Envelope of a segment family, covering the whole real line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Envelope {
    pub pieces: Vec<Piece>,
}

/// Pieces and breakpoints without the leading and trailing gaps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopeTranscript {
    /// Segment ids, `None` for an interior gap.
    pub pieces: Vec<Option<usize>>,
    pub breakpoints: Vec<Q>,
}

impl EnvelopeTranscript {
    /// The envelope sequence: segment ids in order, gaps skipped.
    pub fn sequence(&self) -> Vec<Sym> {
        let mut out: Vec<Sym> = Vec::new();
        for id in self.pieces.iter().flatten() {
            if out.last() != Some(&(*id as Sym)) {
                out.push(*id as Sym);
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "pieces": self.pieces,
            "breakpoints": self.breakpoints.iter().map(q_json).collect::<Vec<_>>(),
        })
    }
}

/// `[p, q]`; a part outside i64 is written as a decimal string.
pub fn q_json(q: &Q) -> serde_json::Value {
    let part = |x: &BigInt| x.to_i64().map_or_else(|| serde_json::json!(x.to_string()), |v| serde_json::json!(v));
    serde_json::json!([part(q.numer()), part(q.denom())])
}

fn sample(lo: &Bound, hi: &Bound) -> Q {
    let one = Q::one();
    match (lo, hi) {
        (Bound::At(l), Bound::At(h)) => (l + h) / Q::from_integer(2.into()),
        (Bound::At(l), _) => l + one,
        (_, Bound::At(h)) => h - one,
        _ => Q::zero(),
    }
}

fn single(segs: &[Segment], k: usize) -> Envelope {
    let s = &segs[k];
    let lo = s.x1.clone().map_or(Bound::NegInf, Bound::At);
    let hi = s.x2.clone().map_or(Bound::PosInf, Bound::At);
    let mut pieces = Vec::new();
    if lo != Bound::NegInf {
        pieces.push(Piece { lo: Bound::NegInf, hi: lo.clone(), id: None });
    }
    pieces.push(Piece { lo, hi: hi.clone(), id: Some(k) });
    if hi != Bound::PosInf {
        pieces.push(Piece { lo: hi, hi: Bound::PosInf, id: None });
    }
    Envelope { pieces }
}

/// The lower of two candidates on `(lo, hi)`, split at their crossing.
fn lower(segs: &[Segment], lo: &Bound, hi: &Bound, p: Option<usize>, q: Option<usize>, out: &mut Vec<Piece>) {
    let (p, q) = match (p, q) {
        (None, x) | (x, None) => {
            push(out, Piece { lo: lo.clone(), hi: hi.clone(), id: x });
            return;
        }
        (Some(p), Some(q)) => (p, q),
    };
    let (f, g) = (&segs[p], &segs[q]);
    let mut cuts = vec![lo.clone()];
    if f.a != g.a {
        let x = (&g.b - &f.b) / (&f.a - &g.a);
        let xb = Bound::At(x);
        if *lo < xb && xb < *hi {
            cuts.push(xb);
        }
    }
    cuts.push(hi.clone());
    for w in cuts.windows(2) {
        let x = sample(&w[0], &w[1]);
        let (fv, gv) = (f.at(&x), g.at(&x));
        let id = if fv < gv || (fv == gv && p < q) { p } else { q };
        push(out, Piece { lo: w[0].clone(), hi: w[1].clone(), id: Some(id) });
    }
}

fn push(out: &mut Vec<Piece>, piece: Piece) {
    if piece.lo >= piece.hi {
        return;
    }
    if let Some(last) = out.last_mut() {
        if last.id == piece.id {
            last.hi = piece.hi;
            return;
        }
    }
    out.push(piece);
}

/// Merges two envelopes of disjoint families over the same segments.
pub fn merge(segs: &[Segment], e: &Envelope, f: &Envelope) -> Envelope {
    let mut out = Vec::with_capacity(e.pieces.len() + f.pieces.len());
    let (mut i, mut j) = (0, 0);
    let mut lo = Bound::NegInf;
    while i < e.pieces.len() && j < f.pieces.len() {
        let (a, b) = (&e.pieces[i], &f.pieces[j]);
        let hi = a.hi.clone().min(b.hi.clone());
        lower(segs, &lo, &hi, a.id, b.id, &mut out);
        if a.hi == hi {
            i += 1;
        }
        if b.hi == hi {
            j += 1;
        }
        lo = hi;
    }
    Envelope { pieces: out }
}

fn rec(segs: &[Segment], ids: &[usize]) -> Envelope {
    if ids.len() == 1 {
        return single(segs, ids[0]);
    }
    let (l, r) = ids.split_at(ids.len() / 2);
    let (a, b) = if ids.len() >= 64 {
        rayon::join(|| rec(segs, l), || rec(segs, r))
    } else {
        (rec(segs, l), rec(segs, r))
    };
    merge(segs, &a, &b)
}

/// Lower envelope by divide and conquer.
pub fn lower_envelope(segs: &[Segment]) -> Result<Envelope> {
    if segs.is_empty() {
        return invalid("need at least one segment");
    }
    for (k, s) in segs.iter().enumerate() {
        if let (Some(l), Some(r)) = (&s.x1, &s.x2) {
            if l >= r {
                return invalid(format!("segment {k} has x1 >= x2"));
            }
        }
    }
    let ids: Vec<usize> = (0..segs.len()).collect();
    Ok(rec(segs, &ids))
}

impl Envelope {
    pub fn transcript(&self) -> EnvelopeTranscript {
        let mut ps: &[Piece] = &self.pieces;
        while ps.first().is_some_and(|p| p.id.is_none()) {
            ps = &ps[1..];
        }
        while ps.last().is_some_and(|p| p.id.is_none()) {
            ps = &ps[..ps.len() - 1];
        }
        let breakpoints = ps
            .windows(2)
            .map(|w| match &w[0].hi {
                Bound::At(x) => x.clone(),
                _ => unreachable!("interior breakpoints are finite"),
            })
            .collect();
        EnvelopeTranscript { pieces: ps.iter().map(|p| p.id).collect(), breakpoints }
    }

    /// Checks at `samples` points inside every piece that the named
    /// segment is defined and no lower than any other defined segment,
    /// and that gaps have no defined segment. Returns the failing pieces.
    pub fn check_minimal<R: Rng>(&self, segs: &[Segment], rng: &mut R, samples: usize) -> Vec<usize> {
        let mut bad = Vec::new();
        for (k, p) in self.pieces.iter().enumerate() {
            let ok = (0..samples).all(|_| {
                let x = random_inside(rng, &p.lo, &p.hi);
                match p.id {
                    Some(id) => {
                        let v = segs[id].at(&x);
                        segs[id].defined_at(&x) && segs.iter().all(|s| !s.defined_at(&x) || s.at(&x) >= v)
                    }
                    None => segs.iter().all(|s| !s.defined_at(&x)),
                }
            });
            if !ok {
                bad.push(k);
            }
        }
        bad
    }
}

fn random_inside<R: Rng>(rng: &mut R, lo: &Bound, hi: &Bound) -> Q {
    let t = Q::new(BigInt::from(rng.gen_range(1..1000)), BigInt::from(1000));
    match (lo, hi) {
        (Bound::At(l), Bound::At(h)) => l + (h - l) * t,
        (Bound::At(l), _) => l + Q::from_integer(rng.gen_range(1..1000).into()) * t,
        (_, Bound::At(h)) => h - Q::from_integer(rng.gen_range(1..1000).into()) * t,
        _ => Q::from_integer(rng.gen_range(-1000..1000).into()) * t,
    }
}

/// Whether the envelope sequence has order at most `s`.
pub fn transcript_order_check(t: &EnvelopeTranscript, s: usize) -> bool {
    ds_order(&t.sequence()) <= s
}

/// JSON form: rationals are `[p, q]` pairs; `x1`/`x2` may be null.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SegmentJson {
    #[serde(default)]
    pub x1: Option<(i64, i64)>,
    #[serde(default)]
    pub x2: Option<(i64, i64)>,
    pub a: (i64, i64),
    pub b: (i64, i64),
}

fn q_of((p, q): (i64, i64)) -> Result<Q> {
    if q == 0 {
        return Err(Error::Malformed("zero denominator".into()));
    }
    Ok(Q::new(p.into(), q.into()))
}

pub fn parse_segments(text: &str) -> Result<Vec<Segment>> {
    let raw: Vec<SegmentJson> = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    raw.into_iter()
        .map(|s| {
            Ok(Segment {
                x1: s.x1.map(q_of).transpose()?,
                x2: s.x2.map(q_of).transpose()?,
                a: q_of(s.a)?,
                b: q_of(s.b)?,
            })
        })
        .collect()
}

fn rand_q<R: Rng>(rng: &mut R, range: i64, den: i64) -> Q {
    Q::new(rng.gen_range(-range..=range).into(), rng.gen_range(1..=den).into())
}

/// `n` random lines: slopes and intercepts `p/q` with `|p| <= 1000`,
/// `1 <= q <= 20`.
pub fn random_lines<R: Rng>(rng: &mut R, n: usize) -> Vec<Segment> {
    (0..n).map(|_| Segment::line(rand_q(rng, 1000, 20), rand_q(rng, 1000, 20))).collect()
}

/// `n` random segments: endpoints `p/q` with `0 <= p <= 1000`,
/// `1 <= q <= 4` (redrawn until `x1 < x2`), slopes and intercepts as for
/// lines.
pub fn random_segments<R: Rng>(rng: &mut R, n: usize) -> Vec<Segment> {
    (0..n)
        .map(|_| {
            let (x1, x2) = loop {
                let u = Q::new(rng.gen_range(0..=1000).into(), rng.gen_range(1..=4).into());
                let v = Q::new(rng.gen_range(0..=1000).into(), rng.gen_range(1..=4).into());
                if u < v {
                    break (u, v);
                } else if v < u {
                    break (v, u);
                }
            };
            Segment { x1: Some(x1), x2: Some(x2), a: rand_q(rng, 1000, 20), b: rand_q(rng, 1000, 20) }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct StatsRow {
    pub trial: usize,
    pub n: usize,
    pub length: usize,
    pub order: usize,
    pub bound: String,
    pub within_bound: bool,
}

/// Envelope sequence lengths of random segment instances against the
/// order-3 bound at `(n, 2n-1)`.
pub fn envelope_stats(n: usize, trials: usize, seed: u64) -> Result<Vec<StatsRow>> {
    if n < 1 {
        return invalid("need n >= 1");
    }
    let bound = crate::bounds::best_upper_bound(3, n as u64, 2 * n as u64 - 1)?.bound;
    let mut rng = crate::random::rng(seed);
    let mut rows = Vec::with_capacity(trials);
    for trial in 0..trials {
        let segs = random_segments(&mut rng, n);
        let seq = lower_envelope(&segs)?.transcript().sequence();
        rows.push(StatsRow {
            trial,
            n,
            length: seq.len(),
            order: ds_order(&seq),
            bound: bound.to_string(),
            within_bound: num_bigint::BigUint::from(seq.len()) <= bound,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;

    fn q(p: i64, d: i64) -> Q {
        Q::new(p.into(), d.into())
    }

    fn seg(x1: i64, x2: i64, a: Q, b: Q) -> Segment {
        Segment { x1: Some(q(x1, 1)), x2: Some(q(x2, 1)), a, b }
    }

    #[test]
    fn one_segment() {
        let s = vec![seg(0, 1, q(1, 1), q(0, 1))];
        let t = lower_envelope(&s).unwrap().transcript();
        assert_eq!(t.pieces, vec![Some(0)]);
        assert!(t.breakpoints.is_empty());
    }

    #[test]
    fn two_lines_cross_once() {
        let s = vec![Segment::line(q(1, 1), q(0, 1)), Segment::line(q(-1, 1), q(0, 1))];
        let t = lower_envelope(&s).unwrap().transcript();
        assert_eq!(t.pieces, vec![Some(0), Some(1)]);
        assert_eq!(t.breakpoints, vec![q(0, 1)]);
        assert!(transcript_order_check(&t, 1));
    }

    #[test]
    fn shallow_long_deep_short() {
        // a: y = 0 on [0, 10]; b: y = -1 on [4, 6]
        let s = vec![seg(0, 10, q(0, 1), q(0, 1)), seg(4, 6, q(0, 1), q(-1, 1))];
        let e = lower_envelope(&s).unwrap();
        let t = e.transcript();
        assert_eq!(t.sequence(), vec![0, 1, 0]);
        assert_eq!(t.breakpoints, vec![q(4, 1), q(6, 1)]);
        assert!(e.check_minimal(&s, &mut rng(1), 10).is_empty());
    }

    #[test]
    fn gaps_are_kept_inside() {
        let s = vec![seg(0, 1, q(0, 1), q(0, 1)), seg(2, 3, q(0, 1), q(0, 1))];
        let t = lower_envelope(&s).unwrap().transcript();
        assert_eq!(t.pieces, vec![Some(0), None, Some(1)]);
        assert_eq!(t.sequence(), vec![0, 1]);
    }

    #[test]
    fn coincident_segments_prefer_smaller_id() {
        let s = vec![seg(2, 8, q(1, 2), q(1, 1)), seg(0, 10, q(1, 2), q(1, 1))];
        let t = lower_envelope(&s).unwrap().transcript();
        assert_eq!(t.sequence(), vec![1, 0, 1]);
    }

    #[test]
    fn shared_endpoints() {
        // three segments meeting at x = 5 at the same height
        let s = vec![
            seg(0, 5, q(-1, 1), q(5, 1)),
            seg(5, 10, q(1, 1), q(-5, 1)),
            seg(0, 10, q(0, 1), q(0, 1)),
        ];
        let e = lower_envelope(&s).unwrap();
        let t = e.transcript();
        assert!(transcript_order_check(&t, 3));
        assert!(e.check_minimal(&s, &mut rng(2), 10).is_empty());
    }

    #[test]
    fn random_instances() {
        let mut g = rng(4);
        for _ in 0..20 {
            let n = g.gen_range(1..60);
            let lines = random_lines(&mut g, n);
            let e = lower_envelope(&lines).unwrap();
            let t = e.transcript();
            assert!(transcript_order_check(&t, 1));
            assert!(t.sequence().len() <= n);
            assert!(e.check_minimal(&lines, &mut g, 3).is_empty());
            let segs = random_segments(&mut g, n);
            let e = lower_envelope(&segs).unwrap();
            assert!(transcript_order_check(&e.transcript(), 3));
            assert!(e.check_minimal(&segs, &mut g, 3).is_empty());
        }
    }

    #[test]
    fn merge_of_halves_is_the_envelope() {
        let mut g = rng(8);
        for _ in 0..20 {
            let n = g.gen_range(2..40);
            let segs = random_segments(&mut g, n);
            let whole = lower_envelope(&segs).unwrap();
            let mut ids: Vec<usize> = (0..n).collect();
            let cut = g.gen_range(1..n);
            ids.swap(0, cut);
            let (a, b) = ids.split_at(g.gen_range(1..n));
            let merged = merge(&segs, &rec(&segs, a), &rec(&segs, b));
            assert_eq!(merged, whole);
        }
    }

    #[test]
    fn stats_are_deterministic() {
        let a = envelope_stats(30, 5, 3).unwrap();
        let b = envelope_stats(30, 5, 3).unwrap();
        assert_eq!(a.iter().map(|r| r.length).collect::<Vec<_>>(), b.iter().map(|r| r.length).collect::<Vec<_>>());
        assert!(a.iter().all(|r| r.within_bound && r.order <= 3));
        assert!(envelope_stats(1, 3, 0).unwrap().iter().all(|r| r.length == 1));
    }
}
