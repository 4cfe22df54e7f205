//! Spatial models: weighted directed graphs over a dense location universe,
//! Euclidean constructions, routes, distances and location services.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Dense location identifier in `0..n`.
pub type Location = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("edge {src} -> {dst} references a location outside 0..{universe}")]
    UnknownLocation {
        src: Location,
        dst: Location,
        universe: usize,
    },
    #[error("duplicate edge {src} -> {dst}: at most one label per ordered pair")]
    DuplicateEdge { src: Location, dst: Location },
    #[error("edge {src} -> {dst} mixes weight kinds within one model")]
    MixedWeightKinds { src: Location, dst: Location },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("route step {index}: no edge {from} -> {to}")]
    BrokenRoute {
        index: usize,
        from: Location,
        to: Location,
    },
    #[error("route is empty")]
    EmptyRoute,
    #[error("location service has no snapshots")]
    EmptyService,
    #[error("location service breakpoints must be strictly increasing (index {index})")]
    UnsortedBreakpoints { index: usize },
    #[error("snapshot {index} has {found} locations, expected {expected}")]
    UniverseMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("time {t} precedes the first location-service breakpoint {start}")]
    BeforeStart { t: f64, start: f64 },
}

/// Edge label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Scalar(f64),
    /// Planar displacement vector.
    Vec2([f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Scalar,
    Vec2,
}

impl Weight {
    pub fn kind(&self) -> WeightKind {
        match self {
            Weight::Scalar(_) => WeightKind::Scalar,
            Weight::Vec2(_) => WeightKind::Vec2,
        }
    }

    /// Absolute value for scalars, Euclidean norm for vectors.
    pub fn norm(&self) -> f64 {
        match *self {
            Weight::Scalar(w) => w.abs(),
            Weight::Vec2([x, y]) => x.hypot(y),
        }
    }

    pub fn reversed(&self) -> Weight {
        match *self {
            Weight::Scalar(w) => Weight::Scalar(w),
            Weight::Vec2([x, y]) => Weight::Vec2([-x, -y]),
        }
    }

    fn is_finite(&self) -> bool {
        match *self {
            Weight::Scalar(w) => w.is_finite(),
            Weight::Vec2([x, y]) => x.is_finite() && y.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: Location,
    pub weight: Weight,
    pub dst: Location,
}

/// A weighted directed graph over locations `0..n`. At most one edge per
/// ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialModel {
    size: usize,
    edges: Vec<Edge>,
    // outgoing[l] = indices into `edges`
    outgoing: Vec<Vec<usize>>,
}

impl SpatialModel {
    pub fn new(size: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self, SpaceError> {
        let mut model = SpatialModel {
            size,
            edges: Vec::new(),
            outgoing: vec![Vec::new(); size],
        };
        for edge in edges {
            model.insert(edge)?;
        }
        Ok(model)
    }

    /// Builds a model with every pair stored as two symmetric directed edges.
    pub fn undirected(
        size: usize,
        edges: impl IntoIterator<Item = (Location, Weight, Location)>,
    ) -> Result<Self, SpaceError> {
        let mut model = SpatialModel::new(size, [])?;
        for (src, weight, dst) in edges {
            model.insert(Edge { src, weight, dst })?;
            model.insert(Edge {
                src: dst,
                weight: weight.reversed(),
                dst: src,
            })?;
        }
        Ok(model)
    }

    fn insert(&mut self, edge: Edge) -> Result<(), SpaceError> {
        let Edge { src, dst, weight } = edge;
        if src >= self.size || dst >= self.size {
            return Err(SpaceError::UnknownLocation {
                src,
                dst,
                universe: self.size,
            });
        }
        if !weight.is_finite() {
            return Err(SpaceError::NonFinite("edge weight"));
        }
        if let Some(first) = self.edges.first() {
            if first.weight.kind() != weight.kind() {
                return Err(SpaceError::MixedWeightKinds { src, dst });
            }
        }
        if self.outgoing[src].iter().any(|&i| self.edges[i].dst == dst) {
            return Err(SpaceError::DuplicateEdge { src, dst });
        }
        self.outgoing[src].push(self.edges.len());
        self.edges.push(edge);
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weight_kind(&self) -> Option<WeightKind> {
        self.edges.first().map(|e| e.weight.kind())
    }

    pub fn outgoing(&self, from: Location) -> impl Iterator<Item = &Edge> + '_ {
        self.outgoing[from].iter().map(move |&i| &self.edges[i])
    }

    pub fn weight(&self, src: Location, dst: Location) -> Option<Weight> {
        self.outgoing(src).find(|e| e.dst == dst).map(|e| e.weight)
    }

    /// Locations reachable from `from` along directed edges, `from` included.
    pub fn reachable_from(&self, from: Location) -> Vec<bool> {
        let mut seen = vec![false; self.size];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(l) = stack.pop() {
            for e in self.outgoing(l) {
                if !seen[e.dst] {
                    seen[e.dst] = true;
                    stack.push(e.dst);
                }
            }
        }
        seen
    }
}

/// A distance function `f: B x A -> B` with its value for the empty route.
///
/// Distances live in the tropical semiring (`choose = min`). Every function
/// must be non-decreasing in its first argument and satisfy `f(b, w) >= b`:
/// the fixpoint algorithms prune and merge on that assumption.
type Accumulate = dyn Fn(f64, &Weight) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct DistanceFunction {
    name: String,
    zero: f64,
    accumulate: Arc<Accumulate>,
}

impl fmt::Debug for DistanceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistanceFunction")
            .field("name", &self.name)
            .field("zero", &self.zero)
            .finish()
    }
}

impl DistanceFunction {
    pub fn new(
        name: impl Into<String>,
        zero: f64,
        accumulate: impl Fn(f64, &Weight) -> f64 + Send + Sync + 'static,
    ) -> Self {
        DistanceFunction {
            name: name.into(),
            zero,
            accumulate: Arc::new(accumulate),
        }
    }

    /// Number of edges traversed.
    pub fn hops() -> Self {
        DistanceFunction::new("hops", 0.0, |v, _| v + 1.0)
    }

    /// Sum of edge lengths (`‖w‖₂` for planar weights).
    pub fn euclidean() -> Self {
        DistanceFunction::new("delta", 0.0, |v, w| v + w.norm())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn zero(&self) -> f64 {
        self.zero
    }

    #[inline]
    pub fn accumulate(&self, acc: f64, weight: &Weight) -> f64 {
        (self.accumulate)(acc, weight)
    }
}

/// A finite route prefix: consecutive locations joined by edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route(Vec<Location>);

impl Route {
    pub fn new(model: &SpatialModel, steps: Vec<Location>) -> Result<Self, SpaceError> {
        if steps.is_empty() {
            return Err(SpaceError::EmptyRoute);
        }
        for (index, pair) in steps.windows(2).enumerate() {
            if pair[0] >= model.size() || model.weight(pair[0], pair[1]).is_none() {
                return Err(SpaceError::BrokenRoute {
                    index,
                    from: pair[0],
                    to: pair[1],
                });
            }
        }
        Ok(Route(steps))
    }

    pub fn steps(&self) -> &[Location] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the first occurrence of `l`, `None` when absent.
    pub fn first_occurrence(&self, l: Location) -> Option<usize> {
        self.0.iter().position(|&x| x == l)
    }

    /// Accumulated distance after the first `upto` edges.
    pub fn distance_upto(
        &self,
        model: &SpatialModel,
        f: &DistanceFunction,
        upto: usize,
    ) -> f64 {
        self.0
            .windows(2)
            .take(upto)
            .fold(f.zero(), |acc, pair| {
                let w = model
                    .weight(pair[0], pair[1])
                    .expect("route validated on construction");
                f.accumulate(acc, &w)
            })
    }
}

/// Distance accumulated along the whole of `route`.
pub fn route_distance(
    model: &SpatialModel,
    route: &[Location],
    f: &DistanceFunction,
) -> Result<f64, SpaceError> {
    let route = Route::new(model, route.to_vec())?;
    Ok(route.distance_upto(model, f, route.len() - 1))
}

/// Single-source distances computed by Bellman-Ford style relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    pub distances: Vec<f64>,
    /// Number of full relaxation rounds, the final (stable) one included.
    pub rounds: usize,
    pub relaxations: usize,
}

/// Distances from `source` to every location; unreachable locations get
/// `+inf`, the bottom of the tropical semiring.
pub fn distances_from(model: &SpatialModel, f: &DistanceFunction, source: Location) -> DistanceTable {
    let mut distances = vec![f64::INFINITY; model.size()];
    distances[source] = f.zero();
    let mut rounds = 0;
    let mut relaxations = 0;
    loop {
        rounds += 1;
        let mut changed = false;
        for e in model.edges() {
            if distances[e.src].is_infinite() {
                continue;
            }
            relaxations += 1;
            let candidate = f.accumulate(distances[e.src], &e.weight);
            if candidate < distances[e.dst] {
                distances[e.dst] = candidate;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    DistanceTable {
        distances,
        rounds,
        relaxations,
    }
}

/// `⊕` of the route distances over all routes from `source` to `target`.
pub fn pairwise_distance(
    model: &SpatialModel,
    f: &DistanceFunction,
    source: Location,
    target: Location,
) -> f64 {
    distances_from(model, f, source).distances[target]
}

/// Points in the plane plus the relation that induces edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanModel {
    pub positions: Vec<[f64; 2]>,
    pub relation: Vec<(Location, Location)>,
}

impl EuclideanModel {
    pub fn to_spatial_model(&self) -> Result<SpatialModel, SpaceError> {
        build_euclidean(&self.positions, &self.relation)
    }
}

/// Edge `(a, b)` gets the displacement `positions[b] - positions[a]`, so that
/// `positions[a] + w = positions[b]`.
pub fn build_euclidean(
    positions: &[[f64; 2]],
    relation: &[(Location, Location)],
) -> Result<SpatialModel, SpaceError> {
    if positions.iter().flatten().any(|c| !c.is_finite()) {
        return Err(SpaceError::NonFinite("position"));
    }
    let n = positions.len();
    let edges = relation.iter().map(|&(a, b)| {
        let w = if a < n && b < n {
            let (pa, pb) = (positions[a], positions[b]);
            Weight::Vec2([pb[0] - pa[0], pb[1] - pa[1]])
        } else {
            Weight::Vec2([0.0, 0.0])
        };
        Edge {
            src: a,
            weight: w,
            dst: b,
        }
    });
    SpatialModel::new(n, edges)
}

/// Rigid motion of the plane: optional reflection across the x axis, then
/// rotation by `angle`, then translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    pub angle: f64,
    pub translation: [f64; 2],
    pub reflect: bool,
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry {
            angle: 0.0,
            translation: [0.0, 0.0],
            reflect: false,
        }
    }

    pub fn apply(&self, [x, y]: [f64; 2]) -> [f64; 2] {
        let y = if self.reflect { -y } else { y };
        let (s, c) = self.angle.sin_cos();
        [
            c * x - s * y + self.translation[0],
            s * x + c * y + self.translation[1],
        ]
    }
}

pub fn apply_isometry(model: &EuclideanModel, isometry: &Isometry) -> EuclideanModel {
    EuclideanModel {
        positions: model.positions.iter().map(|&p| isometry.apply(p)).collect(),
        relation: model.relation.clone(),
    }
}

/// Piecewise-constant assignment of a spatial model to each time.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationService {
    times: Vec<f64>,
    models: Vec<Arc<SpatialModel>>,
}

impl LocationService {
    pub fn new(snapshots: Vec<(f64, SpatialModel)>) -> Result<Self, SpaceError> {
        let Some(first) = snapshots.first() else {
            return Err(SpaceError::EmptyService);
        };
        let expected = first.1.size();
        let mut times = Vec::with_capacity(snapshots.len());
        let mut models = Vec::with_capacity(snapshots.len());
        for (index, (t, model)) in snapshots.into_iter().enumerate() {
            if !t.is_finite() {
                return Err(SpaceError::NonFinite("snapshot time"));
            }
            if times.last().is_some_and(|&prev| t <= prev) {
                return Err(SpaceError::UnsortedBreakpoints { index });
            }
            if model.size() != expected {
                return Err(SpaceError::UniverseMismatch {
                    index,
                    expected,
                    found: model.size(),
                });
            }
            times.push(t);
            models.push(Arc::new(model));
        }
        Ok(LocationService { times, models })
    }

    /// Service with a single snapshot valid from time zero on.
    pub fn constant(model: SpatialModel) -> Self {
        LocationService {
            times: vec![0.0],
            models: vec![Arc::new(model)],
        }
    }

    pub fn universe(&self) -> usize {
        self.models[0].size()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> impl Iterator<Item = (f64, &SpatialModel)> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.models.iter().map(|m| m.as_ref()))
    }

    /// Model of the greatest breakpoint `<= t`.
    pub fn model_at(&self, t: f64) -> Result<&SpatialModel, SpaceError> {
        let idx = self.times.partition_point(|&bp| bp <= t);
        if idx == 0 {
            return Err(SpaceError::BeforeStart {
                t,
                start: self.times[0],
            });
        }
        Ok(&self.models[idx - 1])
    }
}
