//! Piecewise-constant signals and the windowed operators built on them.
//!
//! A signal holds breakpoints `t0 < t1 < ... < tn <= T`; its value is `d_i` on
//! `[t_i, t_{i+1})` and `d_n` on `[t_n, T]`. Windows are closed, so every
//! windowed extremum is attained on a breakpoint or a window edge and the
//! operators below are exact.

use std::collections::VecDeque;

use thiserror::Error;

use crate::semiring::{Semiring, SignalDomain};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignalError {
    #[error("signal has no segments")]
    Empty,
    #[error("non-finite time in signal")]
    NonFiniteTime,
    #[error("breakpoint {index} is not after its predecessor")]
    Unsorted { index: usize },
    #[error("last breakpoint {last} lies after the signal end {end}")]
    EndBeforeLastBreakpoint { last: f64, end: f64 },
    #[error("horizon mismatch: {left} vs {right}")]
    HorizonMismatch { left: f64, right: f64 },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("window offset {offset} exceeds the signal horizon {horizon}")]
    HorizonTooShort { horizon: f64, offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSignal<V> {
    times: Vec<f64>,
    values: Vec<V>,
    end: f64,
}

impl<V: Clone + PartialEq> PiecewiseSignal<V> {
    pub fn new(segments: Vec<(f64, V)>, end: f64) -> Result<Self, SignalError> {
        if segments.is_empty() {
            return Err(SignalError::Empty);
        }
        if !end.is_finite() {
            return Err(SignalError::NonFiniteTime);
        }
        let mut times = Vec::with_capacity(segments.len());
        let mut values = Vec::with_capacity(segments.len());
        for (index, (t, v)) in segments.into_iter().enumerate() {
            if !t.is_finite() {
                return Err(SignalError::NonFiniteTime);
            }
            if times.last().is_some_and(|&prev| t <= prev) {
                return Err(SignalError::Unsorted { index });
            }
            times.push(t);
            values.push(v);
        }
        let last = *times.last().expect("non-empty");
        if last > end {
            return Err(SignalError::EndBeforeLastBreakpoint { last, end });
        }
        Ok(PiecewiseSignal { times, values, end })
    }

    pub fn constant(value: V, start: f64, end: f64) -> Self {
        assert!(start <= end, "constant signal with start after end");
        PiecewiseSignal {
            times: vec![start],
            values: vec![value],
            end,
        }
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, &V)> + '_ {
        self.times.iter().copied().zip(self.values.iter())
    }

    /// Index of the segment holding `t`, `None` outside `[start, end]`.
    fn segment_index(&self, t: f64) -> Option<usize> {
        if t < self.times[0] || t > self.end {
            return None;
        }
        Some(self.times.partition_point(|&bp| bp <= t) - 1)
    }

    /// Value at `t`; `None` before the first breakpoint or after the end, where
    /// callers substitute the bottom of their domain.
    pub fn value_at(&self, t: f64) -> Option<&V> {
        self.segment_index(t).map(|i| &self.values[i])
    }

    /// Drops breakpoints whose value equals the previous one.
    pub fn normalized(&self) -> Self {
        let mut times = Vec::with_capacity(self.times.len());
        let mut values: Vec<V> = Vec::with_capacity(self.values.len());
        for (t, v) in self.segments() {
            if values.last() != Some(v) {
                times.push(t);
                values.push(v.clone());
            }
        }
        PiecewiseSignal {
            times,
            values,
            end: self.end,
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.values.windows(2).all(|w| w[0] != w[1])
    }

    /// Same signal on the shorter domain `[start, end]`.
    pub fn restrict(&self, end: f64) -> Self {
        assert!(end >= self.start() && end <= self.end, "restrict outside domain");
        let keep = self.times.partition_point(|&bp| bp <= end);
        PiecewiseSignal {
            times: self.times[..keep].to_vec(),
            values: self.values[..keep].to_vec(),
            end,
        }
    }

    pub fn map<U: Clone + PartialEq>(&self, f: impl Fn(&V) -> U) -> PiecewiseSignal<U> {
        PiecewiseSignal {
            times: self.times.clone(),
            values: self.values.iter().map(f).collect(),
            end: self.end,
        }
        .normalized()
    }

    /// Inserts extra breakpoints without changing the denoted function.
    pub fn refined(&self, extra: &[f64]) -> Self {
        let mut extra = extra.to_vec();
        extra.sort_by(f64::total_cmp);
        let mut times = time_steps_union(&self.times, &extra);
        times.retain(|&t| t >= self.start() && t <= self.end);
        let values = times
            .iter()
            .map(|&t| self.value_at(t).expect("inside domain").clone())
            .collect();
        PiecewiseSignal {
            times,
            values,
            end: self.end,
        }
    }
}

/// Sorted, de-duplicated union of two breakpoint sets.
pub fn time_steps_union(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), Some(&y)) if y < x => {
                j += 1;
                y
            }
            (Some(&x), Some(_)) => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}

/// Applies `op` on the common domain `[max start, min end]`; breakpoints are
/// the union of both inputs.
pub(crate) fn zip_truncated<A, B, C>(
    s1: &PiecewiseSignal<A>,
    s2: &PiecewiseSignal<B>,
    op: impl Fn(&A, &B) -> C,
) -> PiecewiseSignal<C>
where
    A: Clone + PartialEq,
    B: Clone + PartialEq,
    C: Clone + PartialEq,
{
    let start = s1.start().max(s2.start());
    let end = s1.end().min(s2.end());
    let mut times = time_steps_union(&s1.times, &s2.times);
    times.retain(|&t| t >= start && t <= end);
    if times.first() != Some(&start) {
        times.insert(0, start);
    }
    let values = times
        .iter()
        .map(|&t| {
            op(
                s1.value_at(t).expect("inside common domain"),
                s2.value_at(t).expect("inside common domain"),
            )
        })
        .collect();
    PiecewiseSignal { times, values, end }.normalized()
}

/// Pointwise combination of two signals over the same horizon.
pub fn pointwise<A, B, C>(
    op: impl Fn(&A, &B) -> C,
    s1: &PiecewiseSignal<A>,
    s2: &PiecewiseSignal<B>,
) -> Result<PiecewiseSignal<C>, SignalError>
where
    A: Clone + PartialEq,
    B: Clone + PartialEq,
    C: Clone + PartialEq,
{
    if s1.end() != s2.end() {
        return Err(SignalError::HorizonMismatch {
            left: s1.end(),
            right: s2.end(),
        });
    }
    Ok(zip_truncated(s1, s2, op))
}

pub fn pointwise_unary<A, C>(op: impl Fn(&A) -> C, s: &PiecewiseSignal<A>) -> PiecewiseSignal<C>
where
    A: Clone + PartialEq,
    C: Clone + PartialEq,
{
    s.map(op)
}

fn check_interval(lo: f64, hi: f64) -> Result<(), SignalError> {
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(SignalError::InvalidInterval { lo, hi });
    }
    Ok(())
}

/// A segment of a windowed input: live for query times `t` with
/// `enter <= t < leave`.
struct Span<V> {
    enter: f64,
    leave: f64,
    value: V,
}

/// `⊕` of the spans live at each query time, with a monotone deque. Both
/// `enter` and `leave` must be non-decreasing along `spans`; `queries` must be
/// sorted. Requires a total order on the domain.
fn sliding_choose<D: Semiring>(spans: &[Span<D::Value>], queries: &[f64]) -> Vec<D::Value> {
    debug_assert!(D::TOTAL && D::IDEMPOTENT);
    let mut deque: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    let mut out = Vec::with_capacity(queries.len());
    for &t in queries {
        while next < spans.len() && spans[next].enter <= t {
            let v = spans[next].value;
            while deque.back().is_some_and(|&b| D::prefers(v, spans[b].value)) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        while deque.front().is_some_and(|&f| spans[f].leave <= t) {
            deque.pop_front();
        }
        out.push(deque.front().map_or(D::bottom(), |&f| spans[f].value));
    }
    out
}

/// Sorted unique candidate times within `[lo, hi]` (or `[lo, hi)` when
/// `closed` is false), always containing `lo`.
fn candidates(lo: f64, hi: f64, closed: bool, raw: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut ts: Vec<f64> = raw
        .filter(|&t| t > lo && (t < hi || (closed && t == hi)))
        .collect();
    ts.push(lo);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Output piece for queries in `[lo, hi)` (or `[lo, hi]`) of a future window
/// `[t + a, t + b]` over `segments`, each value pre-combined with `scale`.
fn future_piece<D: Semiring>(
    segments: &[(f64, f64, D::Value)],
    a: f64,
    b: f64,
    (lo, hi, closed): (f64, f64, bool),
    scale: D::Value,
    out: &mut Vec<(f64, D::Value)>,
) {
    let spans: Vec<Span<D::Value>> = segments
        .iter()
        .map(|&(start, end, value)| Span {
            enter: start - b,
            leave: end - a,
            value,
        })
        .collect();
    let queries = candidates(
        lo,
        hi,
        closed,
        spans.iter().flat_map(|s| [s.enter, s.leave]),
    );
    let values = sliding_choose::<D>(&spans, &queries);
    out.extend(
        queries
            .into_iter()
            .zip(values)
            .map(|(t, v)| (t, D::combine(scale, v))),
    );
}

/// Same for a past window `[t - b, t - a]`.
fn past_piece<D: Semiring>(
    segments: &[(f64, f64, D::Value)],
    a: f64,
    b: f64,
    (lo, hi, closed): (f64, f64, bool),
    scale: D::Value,
    out: &mut Vec<(f64, D::Value)>,
) {
    let spans: Vec<Span<D::Value>> = segments
        .iter()
        .map(|&(start, end, value)| Span {
            enter: start + a,
            leave: end + b,
            value,
        })
        .collect();
    let queries = candidates(
        lo,
        hi,
        closed,
        spans.iter().flat_map(|s| [s.enter, s.leave]),
    );
    let values = sliding_choose::<D>(&spans, &queries);
    out.extend(
        queries
            .into_iter()
            .zip(values)
            .map(|(t, v)| (t, D::combine(scale, v))),
    );
}

fn assemble<V: Clone + PartialEq>(pieces: Vec<(f64, V)>, end: f64) -> PiecewiseSignal<V> {
    let (times, values) = pieces.into_iter().unzip();
    PiecewiseSignal { times, values, end }.normalized()
}

/// `(start, end, value)` triples of a signal, last segment end = +inf (its
/// closing instant is the signal end, which no window ever passes).
fn open_segments<V: Copy + PartialEq>(s: &PiecewiseSignal<V>) -> Vec<(f64, f64, V)> {
    (0..s.len())
        .map(|i| {
            let end = if i + 1 < s.len() { s.times[i + 1] } else { f64::INFINITY };
            (s.times[i], end, s.values[i])
        })
        .collect()
}

/// `out(t) = ⊕ signal(t')` over `t' ∈ [t + a, min(t + b, T)]`, defined on
/// `[start, T - a]`.
pub fn window_choose<D: SignalDomain>(
    signal: &PiecewiseSignal<D::Value>,
    a: f64,
    b: f64,
) -> Result<PiecewiseSignal<D::Value>, SignalError> {
    check_interval(a, b)?;
    let out_end = signal.end() - a;
    if out_end < signal.start() {
        return Err(SignalError::HorizonTooShort {
            horizon: signal.end() - signal.start(),
            offset: a,
        });
    }
    let mut pieces = Vec::new();
    future_piece::<D>(
        &open_segments(signal),
        a,
        b,
        (signal.start(), out_end, true),
        D::top(),
        &mut pieces,
    );
    Ok(assemble(pieces, out_end))
}

/// Dual of [`window_choose`] with `combine`.
pub fn window_combine<D: SignalDomain>(
    signal: &PiecewiseSignal<D::Value>,
    a: f64,
    b: f64,
) -> Result<PiecewiseSignal<D::Value>, SignalError> {
    let negated = signal.map(|&v| D::negate(v));
    Ok(window_choose::<D>(&negated, a, b)?.map(|&v| D::negate(v)))
}

/// Bounded until over a shared domain:
/// `out(t) = ⊕_{t' ∈ [t+a, min(t+b, T)]} (s2(t') ⊗ ⊗_{t'' ∈ [t, t']} s1(t''))`
/// on `[start, T - a]`.
///
/// Sweeps the segments of `s1`: while `t` stays inside one `s1` segment the
/// inner `⊗` splits into that segment's value and a running prefix over the
/// later segments, which is independent of `t`; the outer `⊕` is then a
/// sliding-window extremum.
pub fn until<D: SignalDomain>(
    s1: &PiecewiseSignal<D::Value>,
    s2: &PiecewiseSignal<D::Value>,
    a: f64,
    b: f64,
) -> Result<PiecewiseSignal<D::Value>, SignalError> {
    check_interval(a, b)?;
    if s1.start() != s2.start() {
        return Err(SignalError::HorizonMismatch {
            left: s1.start(),
            right: s2.start(),
        });
    }
    let start = s1.start();
    let horizon = s1.end().min(s2.end());
    let out_end = horizon - a;
    if out_end < start {
        return Err(SignalError::HorizonTooShort {
            horizon: horizon - start,
            offset: a,
        });
    }
    let s1 = s1.restrict(horizon);
    let s2 = s2.restrict(horizon);
    let mut pieces = Vec::new();
    let mut segs = Vec::new();
    for k in 0..s1.len() {
        let lo = s1.times[k];
        if lo > out_end {
            break;
        }
        let next = s1.times.get(k + 1).copied();
        let (hi, closed) = match next {
            Some(n) if n <= out_end => (n, false),
            _ => (out_end, true),
        };
        // g_k(t') = s2(t') ⊗ (⊗ of s1 over (segment k, t']), for t' >= lo
        segs.clear();
        let mut prefix = D::top();
        let mut j = k;
        let mut i = s2.times.partition_point(|&bp| bp <= lo) - 1;
        let mut t = lo;
        loop {
            // stop once no query in [lo, hi] can see t in its window
            if t - b > hi {
                break;
            }
            let s1_next = s1.times.get(j + 1).copied().unwrap_or(f64::INFINITY);
            let s2_next = s2.times.get(i + 1).copied().unwrap_or(f64::INFINITY);
            let seg_end = s1_next.min(s2_next);
            segs.push((t, seg_end, D::combine(s2.values[i], prefix)));
            if seg_end.is_infinite() {
                break;
            }
            if s1_next == seg_end {
                j += 1;
                prefix = D::combine(prefix, s1.values[j]);
            }
            if s2_next == seg_end {
                i += 1;
            }
            t = seg_end;
        }
        future_piece::<D>(&segs, a, b, (lo, hi, closed), s1.values[k], &mut pieces);
    }
    Ok(assemble(pieces, out_end))
}

/// Bounded since over a shared domain:
/// `out(t) = ⊕_{t' ∈ [t-b, t-a], t' >= start} (s2(t') ⊗ ⊗_{t'' ∈ [t', t]} s1(t''))`
/// on `[start, T]`; `bottom` where the window is empty.
pub fn since<D: SignalDomain>(
    s1: &PiecewiseSignal<D::Value>,
    s2: &PiecewiseSignal<D::Value>,
    a: f64,
    b: f64,
) -> Result<PiecewiseSignal<D::Value>, SignalError> {
    check_interval(a, b)?;
    if s1.start() != s2.start() {
        return Err(SignalError::HorizonMismatch {
            left: s1.start(),
            right: s2.start(),
        });
    }
    let horizon = s1.end().min(s2.end());
    let s1 = s1.restrict(horizon);
    let s2 = s2.restrict(horizon);
    let mut pieces = Vec::new();
    let mut segs = Vec::new();
    for k in 0..s1.len() {
        let lo = s1.times[k];
        let (hi, closed) = match s1.times.get(k + 1) {
            Some(&n) => (n, false),
            None => (horizon, true),
        };
        // h_k(t') = s2(t') ⊗ (⊗ of s1 over [t', segment k)), for t' < hi
        segs.clear();
        let mut suffix = D::top();
        let mut j = k;
        let mut i = if closed {
            s2.times.partition_point(|&bp| bp <= hi) - 1
        } else {
            s2.times.partition_point(|&bp| bp < hi) - 1
        };
        let mut seg_end = hi;
        loop {
            let t = s1.times[j].max(s2.times[i]);
            segs.push((t, seg_end, D::combine(s2.values[i], suffix)));
            if t + b <= lo || t == s1.start() {
                break;
            }
            if s1.times[j] == t {
                j -= 1;
                suffix = D::combine(suffix, s1.values[j]);
            }
            if s2.times[i] == t {
                i -= 1;
            }
            seg_end = t;
        }
        segs.reverse();
        // the newest segment stays live for every query of this piece
        if let Some(last) = segs.last_mut() {
            last.1 = f64::INFINITY;
        }
        past_piece::<D>(&segs, a, b, (lo, hi, closed), s1.values[k], &mut pieces);
    }
    Ok(assemble(pieces, horizon))
}
