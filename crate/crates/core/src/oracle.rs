//! Reference semantics by direct evaluation: temporal operators on a uniform
//! time grid, spatial operators by enumerating simple routes. Small inputs
//! only; used to cross-check [`crate::monitor::monitor`].

use std::time::Instant;

use thiserror::Error;

use crate::logic::{expand_derived, validate, DistanceBound, Formula, InterpretationContext};
use crate::monitor::{MonitorError, MonitorResult, MonitorStats};
use crate::semiring::{choose_all, combine_all, SignalDomain};
use crate::signal::PiecewiseSignal;
use crate::space::{DistanceFunction, Location, LocationService, SpatialModel};
use crate::trace::{Sample, SpatioTemporalSignal, Trace};

/// Grid step and size guards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub step: f64,
    pub max_locations: usize,
    /// Per location signal, and for the location service.
    pub max_breakpoints: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            step: 0.5,
            max_locations: 9,
            max_breakpoints: 8,
        }
    }
}

impl OracleOptions {
    pub fn with_step(step: f64) -> Self {
        OracleOptions {
            step,
            ..OracleOptions::default()
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance too large for the oracle: {0}")]
    TooLarge(String),
    #[error("{what} {value} is not a multiple of the grid step {step}")]
    OffGrid {
        what: &'static str,
        value: f64,
        step: f64,
    },
    #[error(transparent)]
    Monitor(#[from] MonitorError),
}

/// Values on grid ticks `0, h, 2h, ...`, per location.
type Table<V> = Vec<Vec<V>>;

struct Oracle<'a> {
    service: &'a LocationService,
    trace: &'a Trace,
    ctx: &'a InterpretationContext,
    step: f64,
}

fn ticks_of(x: f64, step: f64, what: &'static str) -> Result<usize, OracleError> {
    let k = (x / step).round();
    if (k * step - x).abs() > 1e-12 || k < 0.0 {
        return Err(OracleError::OffGrid {
            what,
            value: x,
            step,
        });
    }
    Ok(k as usize)
}

/// Every simple route starting at `from`, as location sequences.
fn simple_routes(model: &SpatialModel, from: Location) -> Vec<Vec<Location>> {
    let mut out = Vec::new();
    let mut path = vec![from];
    let mut on_path = vec![false; model.size()];
    on_path[from] = true;
    fn extend(
        model: &SpatialModel,
        path: &mut Vec<Location>,
        on_path: &mut Vec<bool>,
        out: &mut Vec<Vec<Location>>,
    ) {
        out.push(path.clone());
        let last = *path.last().expect("non-empty");
        for e in model.outgoing(last) {
            if !on_path[e.dst] {
                on_path[e.dst] = true;
                path.push(e.dst);
                extend(model, path, on_path, out);
                path.pop();
                on_path[e.dst] = false;
            }
        }
    }
    extend(model, &mut path, &mut on_path, &mut out);
    out
}

/// Distance of every prefix of `route`, accumulated from its start.
fn prefix_distances(model: &SpatialModel, f: &DistanceFunction, route: &[Location]) -> Vec<f64> {
    let mut d = vec![f.zero()];
    for w in route.windows(2) {
        let weight = model.weight(w[0], w[1]).expect("route follows edges");
        d.push(f.accumulate(*d.last().expect("non-empty"), &weight));
    }
    d
}

fn oracle_reach<D: SignalDomain>(
    model: &SpatialModel,
    f: &DistanceFunction,
    bound: &DistanceBound,
    s1: &[D::Value],
    s2: &[D::Value],
) -> Vec<D::Value> {
    (0..model.size())
        .map(|l| {
            let mut best = D::bottom();
            for route in simple_routes(model, l) {
                let d = prefix_distances(model, f, &route);
                let i = route.len() - 1;
                if bound.holds(d[i]) {
                    let before = combine_all::<D>(route[..i].iter().map(|&j| s1[j]));
                    best = D::choose(best, D::combine(s2[route[i]], before));
                }
            }
            D::combine(s1[l], best)
        })
        .collect()
}

fn oracle_escape<D: SignalDomain>(
    model: &SpatialModel,
    f: &DistanceFunction,
    bound: &DistanceBound,
    s: &[D::Value],
) -> Vec<D::Value> {
    let n = model.size();
    (0..n)
        .map(|l| {
            let routes = simple_routes(model, l);
            let mut dist = vec![f64::INFINITY; n];
            for r in &routes {
                let d = prefix_distances(model, f, r);
                let last = r.len() - 1;
                dist[r[last]] = dist[r[last]].min(d[last]);
            }
            choose_all::<D>(routes.iter().filter_map(|r| {
                let target = *r.last().expect("non-empty");
                bound
                    .holds(dist[target])
                    .then(|| combine_all::<D>(r.iter().map(|&j| s[j])))
            }))
        })
        .collect()
}

impl Oracle<'_> {
    fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    fn eval<D: SignalDomain>(&self, formula: &Formula, last: usize) -> Result<(Table<D::Value>, usize), OracleError> {
        let n = self.trace.universe();
        let lift = |v: &dyn Fn(Location, usize) -> D::Value| -> Table<D::Value> {
            (0..n).map(|l| (0..=last).map(|k| v(l, k)).collect()).collect()
        };
        let sample = |l: Location, k: usize, c: usize| -> Sample {
            self.trace.location(l).value_at(self.time(k)).expect("inside horizon")[c]
        };
        let schema = self.trace.schema();
        Ok(match formula {
            Formula::True => (lift(&|_, _| D::top()), last),
            Formula::Atomic(name) => {
                let (c, _) = schema.lookup(name).expect("validated");
                (
                    lift(&|l, k| match sample(l, k, c) {
                        Sample::Bool(b) => D::from_bool(b),
                        Sample::Real(_) => unreachable!("validated channel kind"),
                    }),
                    last,
                )
            }
            Formula::Cmp {
                channel,
                op,
                threshold,
            } => {
                let (c, _) = schema.lookup(channel).expect("validated");
                (
                    lift(&|l, k| match sample(l, k, c) {
                        Sample::Real(x) => D::from_comparison(x, *op, *threshold),
                        Sample::Bool(_) => unreachable!("validated channel kind"),
                    }),
                    last,
                )
            }
            Formula::At(at) => (lift(&|l, _| D::from_bool(l == *at)), last),
            Formula::Not(a) => {
                let (t, end) = self.eval::<D>(a, last)?;
                (
                    t.into_iter()
                        .map(|row| row.into_iter().map(D::negate).collect())
                        .collect(),
                    end,
                )
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                let (ta, ea) = self.eval::<D>(a, last)?;
                let (tb, eb) = self.eval::<D>(b, last)?;
                let end = ea.min(eb);
                let and = matches!(formula, Formula::And(..));
                let table = (0..n)
                    .map(|l| {
                        (0..=end)
                            .map(|k| {
                                if and {
                                    D::combine(ta[l][k], tb[l][k])
                                } else {
                                    D::choose(ta[l][k], tb[l][k])
                                }
                            })
                            .collect()
                    })
                    .collect();
                (table, end)
            }
            Formula::Until {
                interval,
                left,
                right,
            } => {
                let (t1, e1) = self.eval::<D>(left, last)?;
                let (t2, e2) = self.eval::<D>(right, last)?;
                let sub_end = e1.min(e2);
                let a = ticks_of(interval.lo, self.step, "interval bound")?;
                let b = ticks_of(interval.hi, self.step, "interval bound")?;
                let Some(end) = sub_end.checked_sub(a) else {
                    return Err(MonitorError::Signal(crate::signal::SignalError::HorizonTooShort {
                        horizon: self.time(sub_end),
                        offset: interval.lo,
                    })
                    .into());
                };
                let table = (0..n)
                    .map(|l| {
                        (0..=end)
                            .map(|k| {
                                choose_all::<D>((k + a..=(k + b).min(sub_end)).map(|m| {
                                    D::combine(t2[l][m], combine_all::<D>((k..=m).map(|j| t1[l][j])))
                                }))
                            })
                            .collect()
                    })
                    .collect();
                (table, end)
            }
            Formula::Since {
                interval,
                left,
                right,
            } => {
                let (t1, e1) = self.eval::<D>(left, last)?;
                let (t2, e2) = self.eval::<D>(right, last)?;
                let end = e1.min(e2);
                let a = ticks_of(interval.lo, self.step, "interval bound")?;
                let b = ticks_of(interval.hi, self.step, "interval bound")?;
                let table = (0..n)
                    .map(|l| {
                        (0..=end)
                            .map(|k| {
                                if k < a {
                                    return D::bottom();
                                }
                                choose_all::<D>((k.saturating_sub(b)..=k - a).map(|m| {
                                    D::combine(t2[l][m], combine_all::<D>((m..=k).map(|j| t1[l][j])))
                                }))
                            })
                            .collect()
                    })
                    .collect();
                (table, end)
            }
            Formula::Reach {
                distance,
                bound,
                left,
                right,
            } => {
                let f = self.ctx.distance(distance).expect("validated");
                let (t1, e1) = self.eval::<D>(left, last)?;
                let (t2, e2) = self.eval::<D>(right, last)?;
                let end = e1.min(e2);
                self.per_tick::<D>(end, |model, k| {
                    let s1: Vec<_> = (0..n).map(|l| t1[l][k]).collect();
                    let s2: Vec<_> = (0..n).map(|l| t2[l][k]).collect();
                    oracle_reach::<D>(model, f, bound, &s1, &s2)
                })?
            }
            Formula::Escape {
                distance,
                bound,
                sub,
            } => {
                let f = self.ctx.distance(distance).expect("validated");
                let (t, end) = self.eval::<D>(sub, last)?;
                self.per_tick::<D>(end, |model, k| {
                    let s: Vec<_> = (0..n).map(|l| t[l][k]).collect();
                    oracle_escape::<D>(model, f, bound, &s)
                })?
            }
            other => {
                return self.eval::<D>(&expand_derived(other), last);
            }
        })
    }

    fn per_tick<D: SignalDomain>(
        &self,
        end: usize,
        step: impl Fn(&SpatialModel, usize) -> Vec<D::Value>,
    ) -> Result<(Table<D::Value>, usize), OracleError> {
        let n = self.trace.universe();
        let mut table = vec![Vec::with_capacity(end + 1); n];
        for k in 0..=end {
            let model = self
                .service
                .model_at(self.time(k))
                .map_err(MonitorError::from)?;
            for (l, v) in step(model, k).into_iter().enumerate() {
                table[l].push(v);
            }
        }
        Ok((table, end))
    }
}

/// Evaluates `formula` by the defining equations on the grid `step·ℕ`.
///
/// Exact at the grid points when every trace breakpoint, location-service
/// breakpoint, interval bound and the horizon are multiples of `step`.
/// Simple-route enumeration is exponential in the worst case, hence the
/// size guards.
pub fn oracle_monitor<D: SignalDomain>(
    service: &LocationService,
    trace: &Trace,
    formula: &Formula,
    ctx: &InterpretationContext,
    options: &OracleOptions,
) -> Result<MonitorResult<D::Value>, OracleError> {
    let started = Instant::now();
    let step = options.step;
    let n = trace.universe();
    if n > options.max_locations {
        return Err(OracleError::TooLarge(format!(
            "{n} locations, at most {}",
            options.max_locations
        )));
    }
    if let Some(s) = trace.locations().iter().find(|s| s.len() > options.max_breakpoints) {
        return Err(OracleError::TooLarge(format!(
            "{} breakpoints, at most {}",
            s.len(),
            options.max_breakpoints
        )));
    }
    if service.breakpoints().len() > options.max_breakpoints {
        return Err(OracleError::TooLarge("too many spatial snapshots".into()));
    }
    if service.universe() != n {
        return Err(MonitorError::UniverseMismatch {
            trace: n,
            space: service.universe(),
        }
        .into());
    }
    validate(formula, ctx, trace.schema(), n).map_err(MonitorError::from)?;
    for &t in trace.breakpoints().iter().chain(service.breakpoints()) {
        ticks_of(t, step, "breakpoint")?;
    }
    let last = ticks_of(trace.horizon(), step, "horizon")?;
    let oracle = Oracle {
        service,
        trace,
        ctx,
        step,
    };
    let (table, end) = oracle.eval::<D>(formula, last)?;
    let signals = table
        .into_iter()
        .map(|row| {
            let segments = row
                .into_iter()
                .enumerate()
                .map(|(k, v)| (oracle.time(k), v))
                .collect();
            PiecewiseSignal::new(segments, oracle.time(end))
                .expect("grid times")
                .normalized()
        })
        .collect();
    Ok(MonitorResult {
        signal: SpatioTemporalSignal::new(signals),
        semantics: D::NAME,
        formula: formula.clone(),
        elapsed: started.elapsed(),
        stats: MonitorStats {
            universe: n,
            ..MonitorStats::default()
        },
    })
}
