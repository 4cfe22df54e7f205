//! Random (space, trace, formula) instances on an integer time grid, sized
//! for exhaustive cross-checking.

use rand::{Rng, RngCore};

use crate::logic::{CmpOp, DistanceBound, Formula, Interval};
use crate::signal::PiecewiseSignal;
use crate::space::{Edge, LocationService, SpatialModel, Weight};
use crate::trace::{ChannelKind, Sample, Trace, TraceSchema};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomParams {
    pub max_nodes: usize,
    /// Breakpoints per location signal.
    pub max_breakpoints: usize,
    pub max_depth: usize,
    /// Integer horizon.
    pub horizon: u32,
    pub edge_probability: f64,
    /// Allow a second spatial snapshot.
    pub dynamic: bool,
    /// Draw derived operators too.
    pub derived: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            max_nodes: 7,
            max_breakpoints: 5,
            max_depth: 4,
            horizon: 8,
            edge_probability: 0.35,
            dynamic: true,
            derived: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub service: LocationService,
    pub trace: Trace,
    pub formula: Formula,
}

pub const RANDOM_CHANNELS: [(&str, ChannelKind); 4] = [
    ("p", ChannelKind::Bool),
    ("q", ChannelKind::Bool),
    ("x", ChannelKind::Real),
    ("y", ChannelKind::Real),
];

/// Directed graph with integer scalar weights in `1..=3`.
pub fn random_graph(rng: &mut dyn RngCore, n: usize, p: f64) -> SpatialModel {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(p) {
                edges.push(Edge {
                    src: a,
                    weight: Weight::Scalar(rng.random_range(1..=3) as f64),
                    dst: b,
                });
            }
        }
    }
    SpatialModel::new(n, edges).expect("valid random graph")
}

fn random_signal(rng: &mut dyn RngCore, params: &RandomParams) -> PiecewiseSignal<Vec<Sample>> {
    let k = rng.random_range(1..=params.max_breakpoints.max(1));
    let mut times: Vec<u32> = vec![0];
    for _ in 1..k {
        times.push(rng.random_range(1..params.horizon));
    }
    times.sort_unstable();
    times.dedup();
    let segments = times
        .into_iter()
        .map(|t| {
            let sample = vec![
                Sample::Bool(rng.random_bool(0.5)),
                Sample::Bool(rng.random_bool(0.5)),
                Sample::Real(rng.random_range(-6..=6) as f64 * 0.5),
                Sample::Real(rng.random_range(-3..=3) as f64),
            ];
            (t as f64, sample)
        })
        .collect();
    PiecewiseSignal::new(segments, params.horizon as f64).expect("sorted integer breakpoints")
}

fn interval(rng: &mut dyn RngCore) -> Interval {
    let lo = rng.random_range(0..=2);
    let hi = lo + rng.random_range(0..=3);
    Interval::new(lo as f64, hi as f64)
}

fn upper_bound(rng: &mut dyn RngCore) -> DistanceBound {
    let op = if rng.random_bool(0.5) { CmpOp::Le } else { CmpOp::Lt };
    let value = match rng.random_range(0..5) {
        4 => f64::INFINITY,
        v => v as f64,
    };
    DistanceBound::new(op, value)
}

fn lower_bound(rng: &mut dyn RngCore) -> DistanceBound {
    let op = if rng.random_bool(0.5) { CmpOp::Ge } else { CmpOp::Gt };
    DistanceBound::new(op, rng.random_range(0..4) as f64)
}

fn distance(rng: &mut dyn RngCore) -> String {
    if rng.random_bool(0.5) { "hops" } else { "delta" }.to_string()
}

fn leaf(rng: &mut dyn RngCore, universe: usize) -> Formula {
    match rng.random_range(0..6) {
        0 => Formula::True,
        1 => Formula::atomic("p"),
        2 => Formula::atomic("q"),
        3 => Formula::cmp(
            "x",
            [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge][rng.random_range(0..4)],
            rng.random_range(-2..=2) as f64,
        ),
        4 => Formula::cmp(
            "y",
            [CmpOp::Lt, CmpOp::Ge][rng.random_range(0..2)],
            rng.random_range(-2..=2) as f64,
        ),
        _ => Formula::At(rng.random_range(0..universe)),
    }
}

/// Formula of depth at most `depth`; derived operators only when `derived`.
pub fn random_formula(rng: &mut dyn RngCore, depth: usize, universe: usize, derived: bool) -> Formula {
    if depth <= 1 || rng.random_bool(0.2) {
        return leaf(rng, universe);
    }
    let kinds = if derived { 16 } else { 9 };
    let sub = |rng: &mut dyn RngCore| Box::new(random_formula(rng, depth - 1, universe, derived));
    match rng.random_range(0..kinds) {
        0 => Formula::Not(sub(rng)),
        1 => Formula::And(sub(rng), sub(rng)),
        2 => Formula::Or(sub(rng), sub(rng)),
        3 => Formula::Until {
            interval: interval(rng),
            left: sub(rng),
            right: sub(rng),
        },
        4 => Formula::Since {
            interval: interval(rng),
            left: sub(rng),
            right: sub(rng),
        },
        5 | 6 => Formula::Reach {
            distance: distance(rng),
            bound: upper_bound(rng),
            left: sub(rng),
            right: sub(rng),
        },
        7 | 8 => Formula::Escape {
            distance: distance(rng),
            bound: lower_bound(rng),
            sub: sub(rng),
        },
        9 => Formula::Eventually(interval(rng), sub(rng)),
        10 => Formula::Globally(interval(rng), sub(rng)),
        11 => Formula::Once(interval(rng), sub(rng)),
        12 => Formula::Historically(interval(rng), sub(rng)),
        13 => Formula::Somewhere {
            distance: distance(rng),
            bound: upper_bound(rng),
            sub: sub(rng),
        },
        14 => Formula::Everywhere {
            distance: distance(rng),
            bound: upper_bound(rng),
            sub: sub(rng),
        },
        _ => Formula::Surround {
            distance: distance(rng),
            bound: upper_bound(rng),
            left: sub(rng),
            right: sub(rng),
        },
    }
}

pub fn random_schema() -> TraceSchema {
    TraceSchema::new(
        RANDOM_CHANNELS
            .iter()
            .map(|&(n, k)| (n.to_string(), k))
            .collect(),
    )
    .expect("distinct channels")
}

pub fn random_trace(rng: &mut dyn RngCore, n: usize, params: &RandomParams) -> Trace {
    let locations = (0..n).map(|_| random_signal(rng, params)).collect();
    Trace::new(random_schema(), params.horizon as f64, locations).expect("well-formed")
}

pub fn random_instance(rng: &mut dyn RngCore, params: &RandomParams) -> RandomInstance {
    let n = rng.random_range(1..=params.max_nodes.max(1));
    let mut snapshots = vec![(0.0, random_graph(rng, n, params.edge_probability))];
    if params.dynamic && params.horizon > 1 && rng.random_bool(0.5) {
        let t = rng.random_range(1..params.horizon) as f64;
        snapshots.push((t, random_graph(rng, n, params.edge_probability)));
    }
    let service = LocationService::new(snapshots).expect("increasing snapshot times");
    let trace = random_trace(rng, n, params);
    let formula = random_formula(rng, params.max_depth, n, params.derived);
    RandomInstance {
        service,
        trace,
        formula,
    }
}
