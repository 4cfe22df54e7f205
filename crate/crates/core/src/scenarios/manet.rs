use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use super::delaunay_edges;
use crate::signal::PiecewiseSignal;
use crate::space::{build_euclidean, LocationService, SpaceError};
use crate::trace::{ChannelKind, Sample, Trace, TraceError, TraceSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// Edge iff the Euclidean distance is at most the radius.
    Radius,
    Delaunay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManetConfig {
    pub nodes: usize,
    pub steps: usize,
    pub dt: f64,
    /// Side of the square arena.
    pub arena: f64,
    /// Standard deviation of one random-walk step per axis.
    pub walk_sigma: f64,
    pub radius: f64,
    pub graph: GraphKind,
    /// Share of non-coordinator nodes that are routers; the rest are end
    /// devices. There is always exactly one coordinator.
    pub router_fraction: f64,
    pub seed: u64,
}

impl Default for ManetConfig {
    fn default() -> Self {
        ManetConfig {
            nodes: 100,
            steps: 100,
            dt: 1.0,
            arena: 10.0,
            walk_sigma: 0.3,
            radius: 2.0,
            graph: GraphKind::Radius,
            router_fraction: 0.3,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

impl ManetConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.nodes == 0 {
            return Err(ScenarioError::InvalidConfig("nodes must be positive"));
        }
        if self.steps == 0 {
            return Err(ScenarioError::InvalidConfig("steps must be positive"));
        }
        if !positive(self.dt) || !positive(self.arena) || !positive(self.radius) {
            return Err(ScenarioError::InvalidConfig(
                "dt, arena and radius must be positive",
            ));
        }
        if !(self.walk_sigma.is_finite() && self.walk_sigma >= 0.0) {
            return Err(ScenarioError::InvalidConfig("walk step must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.router_fraction) {
            return Err(ScenarioError::InvalidConfig("router fraction must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Folds `x` back into `[0, side]`.
fn reflect(mut x: f64, side: f64) -> f64 {
    loop {
        if x < 0.0 {
            x = -x;
        } else if x > side {
            x = 2.0 * side - x;
        } else {
            return x;
        }
    }
}

/// Channel names of generated traces, in schema order.
pub const MANET_CHANNELS: [(&str, ChannelKind); 7] = [
    ("coord", ChannelKind::Bool),
    ("router", ChannelKind::Bool),
    ("end_dev", ChannelKind::Bool),
    ("X_B", ChannelKind::Real),
    ("X_H", ChannelKind::Real),
    ("X_P", ChannelKind::Real),
    ("X_S", ChannelKind::Real),
];

/// Random-walk MANET: one spatial snapshot and one sample vector per step,
/// over the horizon `steps * dt`. Battery drains within `[0, 100]`, humidity
/// and pollution wander within `[0, 200]`, and `X_S` is 1 at a single target
/// node.
pub fn manet_generate(config: &ManetConfig) -> Result<(LocationService, Trace), ScenarioError> {
    config.validate()?;
    let n = config.nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let walk = Normal::new(0.0, config.walk_sigma).expect("validated sigma");
    let noise = Normal::new(0.0, 8.0).expect("constant sigma");

    let routers = ((n - 1) as f64 * config.router_fraction).round() as usize;
    let mut roles: Vec<u8> = std::iter::once(0)
        .chain(std::iter::repeat_n(1, routers))
        .chain(std::iter::repeat_n(2, n - 1 - routers))
        .collect();
    roles.shuffle(&mut rng);
    let target = rng.random_range(0..n);

    let mut pos: Vec<[f64; 2]> = (0..n)
        .map(|_| {
            [
                rng.random_range(0.0..config.arena),
                rng.random_range(0.0..config.arena),
            ]
        })
        .collect();
    let mut battery: Vec<f64> = (0..n).map(|_| rng.random_range(40.0..100.0)).collect();
    let mut humidity: Vec<f64> = (0..n).map(|_| rng.random_range(40.0..140.0)).collect();
    let mut pollution: Vec<f64> = (0..n).map(|_| rng.random_range(60.0..180.0)).collect();

    let mut snapshots = Vec::with_capacity(config.steps);
    let mut segments: Vec<Vec<(f64, Vec<Sample>)>> = vec![Vec::with_capacity(config.steps); n];
    for k in 0..config.steps {
        let t = k as f64 * config.dt;
        if k > 0 {
            for p in pos.iter_mut() {
                for c in p.iter_mut() {
                    *c = reflect(*c + walk.sample(&mut rng), config.arena);
                }
            }
            for i in 0..n {
                battery[i] = (battery[i] - rng.random_range(0.0..2.0)).clamp(0.0, 100.0);
                humidity[i] = (humidity[i] + noise.sample(&mut rng)).clamp(0.0, 200.0);
                pollution[i] = (pollution[i] + noise.sample(&mut rng)).clamp(0.0, 200.0);
            }
        }
        let relation: Vec<(usize, usize)> = match config.graph {
            GraphKind::Radius => {
                let r2 = config.radius * config.radius;
                (0..n)
                    .flat_map(|a| (0..n).map(move |b| (a, b)))
                    .filter(|&(a, b)| {
                        let (dx, dy) = (pos[b][0] - pos[a][0], pos[b][1] - pos[a][1]);
                        a != b && dx * dx + dy * dy <= r2
                    })
                    .collect()
            }
            GraphKind::Delaunay => delaunay_edges(&pos)
                .into_iter()
                .flat_map(|(a, b)| [(a, b), (b, a)])
                .collect(),
        };
        snapshots.push((t, build_euclidean(&pos, &relation)?));
        for i in 0..n {
            segments[i].push((
                t,
                vec![
                    Sample::Bool(roles[i] == 0),
                    Sample::Bool(roles[i] == 1),
                    Sample::Bool(roles[i] == 2),
                    Sample::Real(battery[i]),
                    Sample::Real(humidity[i]),
                    Sample::Real(pollution[i]),
                    Sample::Real(if i == target { 1.0 } else { 0.0 }),
                ],
            ));
        }
    }
    let horizon = config.steps as f64 * config.dt;
    let schema = TraceSchema::new(
        MANET_CHANNELS
            .iter()
            .map(|&(name, kind)| (name.to_string(), kind))
            .collect(),
    )?;
    let locations = segments
        .into_iter()
        .map(|s| {
            PiecewiseSignal::new(s, horizon)
                .expect("increasing step times")
                .normalized()
        })
        .collect();
    Ok((LocationService::new(snapshots)?, Trace::new(schema, horizon, locations)?))
}
