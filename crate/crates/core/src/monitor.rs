//! Offline monitoring: bottom-up evaluation of a formula over a trace and a
//! location service, with the spatial operators computed by fixpoints at
//! every instant where an input can change.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::logic::{validate, DistanceBound, Formula, InterpretationContext, ValidationError};
use crate::semiring::{choose_all, combine_all, SignalDomain};
use crate::signal::{self, PiecewiseSignal, SignalError};
use crate::space::{distances_from, DistanceFunction, LocationService, SpaceError, SpatialModel};
use crate::trace::{Sample, SpatioTemporalSignal, Trace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonitorError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("trace has {trace} locations but the location service has {space}")]
    UniverseMismatch { trace: usize, space: usize },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MonitorOptions {
    /// `None`: the ambient rayon pool. `Some(0)`: sequential. `Some(n)`: a
    /// dedicated pool of `n` threads. Ignored without the `parallel` feature.
    pub threads: Option<usize>,
}

impl MonitorOptions {
    pub fn sequential() -> Self {
        MonitorOptions { threads: Some(0) }
    }

    /// Reads `STREL_THREADS`; unset or unparsable means the ambient pool.
    pub fn from_env() -> Self {
        MonitorOptions {
            threads: std::env::var("STREL_THREADS")
                .ok()
                .and_then(|v| v.trim().parse().ok()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MonitorStats {
    /// Spatial fixpoint evaluations, one per operator per instant.
    pub spatial_evaluations: usize,
    /// Largest number of rounds any single fixpoint needed, the final stable
    /// round included.
    pub max_fixpoint_iterations: usize,
    pub universe: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorResult<V> {
    pub signal: SpatioTemporalSignal<V>,
    pub semantics: &'static str,
    pub formula: Formula,
    pub elapsed: Duration,
    pub stats: MonitorStats,
}

/// Result of one spatial fixpoint at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixpoint<V> {
    pub values: Vec<V>,
    pub iterations: usize,
}

/// Adds `(v, w)` to a Pareto front, where `(v, w)` dominates `(v', w')` when
/// `v' ⊑ v` and `w <= w'`. Returns whether the front changed.
fn insert_front<D: SignalDomain>(front: &mut Vec<(D::Value, f64)>, v: D::Value, w: f64) -> bool {
    if front.iter().any(|&(v0, w0)| D::leq(v, v0) && w0 <= w) {
        return false;
    }
    front.retain(|&(v0, w0)| !(D::leq(v0, v) && w <= w0));
    front.push((v, w));
    true
}

/// Pareto front of `(value, distance)` pairs for one target.
type Front<V> = Vec<(V, f64)>;

/// Reachability at one instant.
///
/// Propagates triples `(target, value, distance)` backwards along edges,
/// starting from `(ℓ, s2(ℓ), 0)` at every `ℓ`; only triples whose distance
/// satisfies `bound` are kept and, per location and target, only the Pareto
/// front of (value, distance). Each round extends by one edge the triples
/// found in the previous one, so the fixpoint is reached within `|L|` rounds.
///
/// The origin must satisfy the left operand too, also for the empty route:
/// the value at `ℓ` is `s1(ℓ) ⊗ ⊕{v | (ℓ', v, w)}`.
pub fn reach_fix<D: SignalDomain>(
    model: &SpatialModel,
    f: &DistanceFunction,
    bound: &DistanceBound,
    s1: &[D::Value],
    s2: &[D::Value],
) -> Fixpoint<D::Value> {
    let n = model.size();
    let bottom = D::bottom();
    let zero = f.zero();
    let mut fronts: Vec<Vec<Front<D::Value>>> = vec![vec![Vec::new(); n]; n];
    let mut delta: Vec<Vec<(usize, D::Value, f64)>> = vec![Vec::new(); n];
    for l in 0..n {
        if s2[l] != bottom {
            fronts[l][l].push((s2[l], zero));
            delta[l].push((l, s2[l], zero));
        }
    }
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut next: Vec<Vec<(usize, D::Value, f64)>> = vec![Vec::new(); n];
        let mut changed = false;
        for l1 in 0..n {
            if s1[l1] == bottom {
                continue;
            }
            for e in model.outgoing(l1) {
                for &(target, v, w) in &delta[e.dst] {
                    let w2 = f.accumulate(w, &e.weight);
                    if !bound.holds(w2) {
                        continue;
                    }
                    let v2 = D::combine(v, s1[l1]);
                    if v2 == bottom {
                        continue;
                    }
                    if insert_front::<D>(&mut fronts[l1][target], v2, w2) {
                        next[l1].push((target, v2, w2));
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
        delta = next;
    }
    let values = fronts
        .iter()
        .enumerate()
        .map(|(l, per_target)| {
            let best = choose_all::<D>(
                per_target
                    .iter()
                    .flatten()
                    .filter(|(_, w)| bound.holds(*w))
                    .map(|&(v, _)| v),
            );
            D::combine(s1[l], best)
        })
        .collect();
    Fixpoint { values, iterations }
}

/// Escape at one instant.
///
/// For every pair `(ℓ, ℓ')` keeps the `⊕` over routes from `ℓ` of the `⊗` of
/// `s` up to the first visit of `ℓ'`, and the shortest distance from `ℓ` to
/// `ℓ'`; both are Bellman-Ford relaxations and stabilise within `|L|` rounds.
/// The value at `ℓ` is the `⊕` over targets whose distance satisfies `bound`.
pub fn escape_fix<D: SignalDomain>(
    model: &SpatialModel,
    f: &DistanceFunction,
    bound: &DistanceBound,
    s: &[D::Value],
) -> Fixpoint<D::Value> {
    let n = model.size();
    let mut value = vec![D::bottom(); n * n];
    let mut dist = vec![f64::INFINITY; n * n];
    let mut delta: Vec<Vec<usize>> = (0..n).map(|l| vec![l]).collect();
    for l in 0..n {
        value[l * n + l] = s[l];
        dist[l * n + l] = f.zero();
    }
    let mut queued = vec![false; n * n];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut next: Vec<Vec<usize>> = vec![Vec::new(); n];
        for l1 in 0..n {
            for e in model.outgoing(l1) {
                let l2 = e.dst;
                for &t in &delta[l2] {
                    let (v, w) = (value[l2 * n + t], dist[l2 * n + t]);
                    let i = l1 * n + t;
                    let v2 = D::choose(value[i], D::combine(v, s[l1]));
                    let w2 = dist[i].min(f.accumulate(w, &e.weight));
                    if v2 != value[i] || w2 != dist[i] {
                        value[i] = v2;
                        dist[i] = w2;
                        if !queued[i] {
                            queued[i] = true;
                            next[l1].push(t);
                        }
                    }
                }
            }
        }
        if next.iter().all(Vec::is_empty) {
            break;
        }
        for (l, targets) in next.iter().enumerate() {
            for &t in targets {
                queued[l * n + t] = false;
            }
        }
        delta = next;
    }
    let values = (0..n)
        .map(|l| {
            choose_all::<D>(
                (0..n)
                    .filter(|&t| dist[l * n + t].is_finite() && bound.holds(dist[l * n + t]))
                    .map(|t| value[l * n + t]),
            )
        })
        .collect();
    Fixpoint { values, iterations }
}

/// `somewhere` (`dual = false`) or `everywhere` (`dual = true`) at one
/// instant, from shortest distances: with a constant `true` left operand the
/// route choice only matters through the distance.
fn somewhere_fix<D: SignalDomain>(
    model: &SpatialModel,
    f: &DistanceFunction,
    bound: &DistanceBound,
    s: &[D::Value],
    dual: bool,
) -> Fixpoint<D::Value> {
    let mut iterations = 0;
    let values = (0..model.size())
        .map(|l| {
            let table = distances_from(model, f, l);
            iterations = iterations.max(table.rounds);
            let near = table
                .distances
                .iter()
                .enumerate()
                .filter(|(_, &d)| d.is_finite() && bound.holds(d))
                .map(|(t, _)| s[t]);
            if dual {
                combine_all::<D>(near)
            } else {
                choose_all::<D>(near)
            }
        })
        .collect();
    Fixpoint { values, iterations }
}

type Signals<V> = Vec<PiecewiseSignal<V>>;

struct Evaluator<'a> {
    service: &'a LocationService,
    trace: &'a Trace,
    ctx: &'a InterpretationContext,
    #[cfg_attr(not(feature = "parallel"), allow(dead_code))]
    parallel: bool,
    max_iterations: AtomicUsize,
    spatial_evaluations: AtomicUsize,
}

impl Evaluator<'_> {
    fn map_indexed<T: Send>(&self, len: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        #[cfg(feature = "parallel")]
        if self.parallel {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    fn distance(&self, name: &str) -> &DistanceFunction {
        self.ctx
            .distance(name)
            .expect("distance names are validated before evaluation")
    }

    fn eval<D: SignalDomain>(&self, formula: &Formula) -> Result<Signals<D::Value>, MonitorError> {
        let n = self.trace.universe();
        let horizon = self.trace.horizon();
        let schema = self.trace.schema();
        Ok(match formula {
            Formula::True => vec![PiecewiseSignal::constant(D::top(), 0.0, horizon); n],
            Formula::Atomic(name) => {
                let (idx, _) = schema.lookup(name).expect("validated channel");
                (0..n)
                    .map(|l| {
                        self.trace.location(l).map(|v| match v[idx] {
                            Sample::Bool(b) => D::from_bool(b),
                            Sample::Real(_) => unreachable!("validated channel kind"),
                        })
                    })
                    .collect()
            }
            Formula::Cmp {
                channel,
                op,
                threshold,
            } => {
                let (idx, _) = schema.lookup(channel).expect("validated channel");
                (0..n)
                    .map(|l| {
                        self.trace.location(l).map(|v| match v[idx] {
                            Sample::Real(x) => D::from_comparison(x, *op, *threshold),
                            Sample::Bool(_) => unreachable!("validated channel kind"),
                        })
                    })
                    .collect()
            }
            Formula::At(at) => (0..n)
                .map(|l| PiecewiseSignal::constant(D::from_bool(l == *at), 0.0, horizon))
                .collect(),
            Formula::Not(a) => negate::<D>(self.eval::<D>(a)?),
            Formula::And(a, b) => {
                zip_all(self.eval::<D>(a)?, self.eval::<D>(b)?, |x, y| D::combine(*x, *y))
            }
            Formula::Or(a, b) => {
                zip_all(self.eval::<D>(a)?, self.eval::<D>(b)?, |x, y| D::choose(*x, *y))
            }
            Formula::Until {
                interval,
                left,
                right,
            } => {
                let (s1, s2) = (self.eval::<D>(left)?, self.eval::<D>(right)?);
                self.map_indexed(n, |l| signal::until::<D>(&s1[l], &s2[l], interval.lo, interval.hi))
                    .into_iter()
                    .collect::<Result<_, _>>()?
            }
            Formula::Since {
                interval,
                left,
                right,
            } => {
                let (s1, s2) = (self.eval::<D>(left)?, self.eval::<D>(right)?);
                self.map_indexed(n, |l| signal::since::<D>(&s1[l], &s2[l], interval.lo, interval.hi))
                    .into_iter()
                    .collect::<Result<_, _>>()?
            }
            Formula::Eventually(i, a) => {
                let s = self.eval::<D>(a)?;
                s.iter()
                    .map(|x| signal::window_choose::<D>(x, i.lo, i.hi))
                    .collect::<Result<_, _>>()?
            }
            Formula::Globally(i, a) => {
                let s = self.eval::<D>(a)?;
                s.iter()
                    .map(|x| signal::window_combine::<D>(x, i.lo, i.hi))
                    .collect::<Result<_, _>>()?
            }
            Formula::Once(i, a) => {
                let s = self.eval::<D>(a)?;
                s.iter()
                    .map(|x| {
                        let top = PiecewiseSignal::constant(D::top(), x.start(), x.end());
                        signal::since::<D>(&top, x, i.lo, i.hi)
                    })
                    .collect::<Result<_, _>>()?
            }
            Formula::Historically(i, a) => {
                let s = negate::<D>(self.eval::<D>(a)?);
                let once = s
                    .iter()
                    .map(|x| {
                        let top = PiecewiseSignal::constant(D::top(), x.start(), x.end());
                        signal::since::<D>(&top, x, i.lo, i.hi)
                    })
                    .collect::<Result<_, _>>()?;
                negate::<D>(once)
            }
            Formula::Reach {
                distance,
                bound,
                left,
                right,
            } => {
                let f = self.distance(distance);
                let inputs = [self.eval::<D>(left)?, self.eval::<D>(right)?];
                self.spatial::<D>(&inputs, |m, v| reach_fix::<D>(m, f, bound, &v[0], &v[1]))?
            }
            Formula::Escape {
                distance,
                bound,
                sub,
            } => {
                let f = self.distance(distance);
                let inputs = [self.eval::<D>(sub)?];
                self.spatial::<D>(&inputs, |m, v| escape_fix::<D>(m, f, bound, &v[0]))?
            }
            Formula::Somewhere {
                distance,
                bound,
                sub,
            } => {
                let f = self.distance(distance);
                let inputs = [self.eval::<D>(sub)?];
                self.spatial::<D>(&inputs, |m, v| somewhere_fix::<D>(m, f, bound, &v[0], false))?
            }
            Formula::Everywhere {
                distance,
                bound,
                sub,
            } => {
                let f = self.distance(distance);
                let inputs = [self.eval::<D>(sub)?];
                self.spatial::<D>(&inputs, |m, v| somewhere_fix::<D>(m, f, bound, &v[0], true))?
            }
            Formula::Surround {
                distance,
                bound,
                left,
                right,
            } => {
                let f = self.distance(distance);
                let inputs = [self.eval::<D>(left)?, self.eval::<D>(right)?];
                let exit_bound = bound.complement();
                self.spatial::<D>(&inputs, |m, v| {
                    let (inside, wall) = (&v[0], &v[1]);
                    let outside: Vec<_> = inside
                        .iter()
                        .zip(wall)
                        .map(|(&a, &b)| D::negate(D::choose(a, b)))
                        .collect();
                    let leak = reach_fix::<D>(m, f, bound, inside, &outside);
                    let exit = escape_fix::<D>(m, f, &exit_bound, inside);
                    let values = (0..inside.len())
                        .map(|l| {
                            D::combine(
                                inside[l],
                                D::combine(D::negate(leak.values[l]), D::negate(exit.values[l])),
                            )
                        })
                        .collect();
                    Fixpoint {
                        values,
                        iterations: leak.iterations.max(exit.iterations),
                    }
                })?
            }
        })
    }

    /// Evaluates `step` at every instant where an input or the spatial model
    /// may change, then rebuilds one signal per location.
    fn spatial<D: SignalDomain>(
        &self,
        inputs: &[Signals<D::Value>],
        step: impl Fn(&SpatialModel, &[Vec<D::Value>]) -> Fixpoint<D::Value> + Sync + Send,
    ) -> Result<Signals<D::Value>, MonitorError> {
        let end = inputs
            .iter()
            .flatten()
            .map(PiecewiseSignal::end)
            .fold(f64::INFINITY, f64::min);
        let mut times: Vec<f64> = inputs
            .iter()
            .flatten()
            .flat_map(|s| s.times().iter().copied())
            .chain(self.service.breakpoints().iter().copied())
            .chain([0.0])
            .filter(|&t| (0.0..=end).contains(&t))
            .collect();
        times.sort_by(f64::total_cmp);
        times.dedup();
        let per_time = self.map_indexed(times.len(), |k| {
            let t = times[k];
            let model = self.service.model_at(t)?;
            let snapshot: Vec<Vec<D::Value>> = inputs
                .iter()
                .map(|sigs| {
                    sigs.iter()
                        .map(|s| *s.value_at(t).expect("instant inside every input"))
                        .collect()
                })
                .collect();
            let out = step(model, &snapshot);
            self.max_iterations.fetch_max(out.iterations, Ordering::Relaxed);
            Ok::<_, SpaceError>(out.values)
        });
        self.spatial_evaluations
            .fetch_add(times.len(), Ordering::Relaxed);
        let per_time: Vec<Vec<D::Value>> = per_time.into_iter().collect::<Result<_, _>>()?;
        let n = self.trace.universe();
        Ok((0..n)
            .map(|l| {
                let segments = times
                    .iter()
                    .zip(&per_time)
                    .map(|(&t, vals)| (t, vals[l]))
                    .collect();
                PiecewiseSignal::new(segments, end)
                    .expect("sorted breakpoints inside the domain")
                    .normalized()
            })
            .collect())
    }
}

fn negate<D: SignalDomain>(signals: Signals<D::Value>) -> Signals<D::Value> {
    signals.iter().map(|s| s.map(|&v| D::negate(v))).collect()
}

fn zip_all<V: Copy + PartialEq>(
    a: Signals<V>,
    b: Signals<V>,
    op: impl Fn(&V, &V) -> V + Copy,
) -> Signals<V> {
    a.iter()
        .zip(&b)
        .map(|(x, y)| signal::zip_truncated(x, y, op))
        .collect()
}

/// Monitors `formula` under the semiring `D`.
///
/// Derived operators are evaluated directly (windowed extrema for the
/// temporal ones, shortest distances for somewhere and everywhere); their
/// results coincide with those of the expanded formula.
pub fn monitor<D: SignalDomain>(
    service: &LocationService,
    trace: &Trace,
    formula: &Formula,
    ctx: &InterpretationContext,
    options: &MonitorOptions,
) -> Result<MonitorResult<D::Value>, MonitorError> {
    let started = Instant::now();
    if service.universe() != trace.universe() {
        return Err(MonitorError::UniverseMismatch {
            trace: trace.universe(),
            space: service.universe(),
        });
    }
    validate(formula, ctx, trace.schema(), trace.universe())?;
    let evaluator = Evaluator {
        service,
        trace,
        ctx,
        parallel: cfg!(feature = "parallel") && options.threads != Some(0),
        max_iterations: AtomicUsize::new(0),
        spatial_evaluations: AtomicUsize::new(0),
    };
    let signals = run_with_threads(options.threads, || evaluator.eval::<D>(formula))??;
    Ok(MonitorResult {
        signal: SpatioTemporalSignal::new(signals),
        semantics: D::NAME,
        formula: formula.clone(),
        elapsed: started.elapsed(),
        stats: MonitorStats {
            spatial_evaluations: evaluator.spatial_evaluations.into_inner(),
            max_fixpoint_iterations: evaluator.max_iterations.into_inner(),
            universe: trace.universe(),
        },
    })
}

#[cfg(feature = "parallel")]
fn run_with_threads<R: Send>(
    threads: Option<usize>,
    op: impl FnOnce() -> R + Send,
) -> Result<R, MonitorError> {
    match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| MonitorError::ThreadPool(e.to_string()))?;
            Ok(pool.install(op))
        }
        _ => Ok(op()),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_with_threads<R: Send>(
    _threads: Option<usize>,
    op: impl FnOnce() -> R + Send,
) -> Result<R, MonitorError> {
    Ok(op())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse;
    use crate::scenarios::{zigbee_fixture, zigbee_model};
    use crate::semiring::{BooleanDomain, MaxMinDomain};

    fn zigbee_bool(text: &str) -> Vec<bool> {
        let (service, trace) = zigbee_fixture();
        let r = monitor::<BooleanDomain>(
            &service,
            &trace,
            &parse(text).unwrap(),
            &InterpretationContext::default(),
            &MonitorOptions::sequential(),
        )
        .unwrap();
        r.signal.at(0.0).unwrap()
    }

    /// Paper location numbers (1-based) whose verdict is true.
    fn holders(v: &[bool]) -> Vec<usize> {
        v.iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i + 1)
            .collect()
    }

    #[test]
    fn reach_on_the_zigbee_network() {
        let v = zigbee_bool("end_dev reach(hops)[<= 1] router");
        assert!(v[5], "location 6 reaches router 5 in one hop");
        assert!(!v[7], "location 8 is not an end device");
        assert_eq!(holders(&v), vec![1, 2, 4, 6, 12, 13, 14, 15]);
    }

    #[test]
    fn escape_on_the_zigbee_network() {
        let v = zigbee_bool("escape(hops)[>= 2] !end_dev");
        assert!(v[9], "location 10 escapes through 7 and 8");
        assert!(!v[0]);
    }

    #[test]
    fn surround_on_the_zigbee_network() {
        let v = zigbee_bool("(coord | router) surround(hops)[<= 3] end_dev");
        assert!(v[9]);
    }

    #[test]
    fn reach_iterations_bounded_by_universe() {
        let m = zigbee_model();
        let n = m.size();
        let s1 = vec![true; n];
        let mut s2 = vec![false; n];
        s2[0] = true;
        let out = reach_fix::<BooleanDomain>(&m, &DistanceFunction::hops(), &DistanceBound::finite(), &s1, &s2);
        assert!(out.values.iter().all(|&b| b));
        assert!(out.iterations <= n);
        let esc = escape_fix::<BooleanDomain>(&m, &DistanceFunction::hops(), &DistanceBound::at_least(0.0), &s1);
        assert!(esc.iterations <= n);
    }

    #[test]
    fn maxmin_reach_takes_best_route() {
        // 0 - 1 - 2 and 0 - 3 - 2 with different left values
        let m = SpatialModel::undirected(
            4,
            [(0, 1), (1, 2), (0, 3), (3, 2)].map(|(a, b)| (a, crate::space::Weight::Scalar(1.0), b)),
        )
        .unwrap();
        let s1 = [5.0, 1.0, 0.0, 3.0];
        let s2 = [-9.0, -9.0, 4.0, -9.0];
        let out = reach_fix::<MaxMinDomain>(&m, &DistanceFunction::hops(), &DistanceBound::at_most(2.0), &s1, &s2);
        assert_eq!(out.values[0], 3.0);
        let tight = reach_fix::<MaxMinDomain>(&m, &DistanceFunction::hops(), &DistanceBound::at_most(1.0), &s1, &s2);
        assert_eq!(tight.values[0], -9.0);
    }

    #[test]
    fn quantitative_sign_on_a_comparison() {
        let (service, trace) = crate::scenarios::zigbee_fixture();
        let f = parse("!end_dev").unwrap();
        let r = monitor::<MaxMinDomain>(&service, &trace, &f, &InterpretationContext::default(), &MonitorOptions::default()).unwrap();
        let b = zigbee_bool("!end_dev");
        for (q, b) in r.signal.at(0.0).unwrap().iter().zip(b) {
            assert_eq!(*q > 0.0, b);
        }
    }

    #[test]
    fn universe_mismatch_is_reported() {
        let (_, trace) = zigbee_fixture();
        let service = LocationService::constant(SpatialModel::new(3, []).unwrap());
        let err = monitor::<BooleanDomain>(&service, &trace, &Formula::True, &InterpretationContext::default(), &MonitorOptions::default());
        assert!(matches!(err, Err(MonitorError::UniverseMismatch { .. })));
    }
}
