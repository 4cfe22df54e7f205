//! Fixtures and generators: the ZigBee example network, a MANET trace
//! generator, the property library and random instances for differential
//! testing.

mod delaunay;
mod manet;
pub mod random;

pub use delaunay::delaunay_edges;
pub use manet::{manet_generate, GraphKind, ManetConfig, ScenarioError};

use crate::signal::PiecewiseSignal;
use crate::space::{LocationService, SpatialModel, Weight};
use crate::trace::{ChannelKind, Sample, Trace, TraceSchema};

const ZIGBEE_LINKS: [(usize, usize); 18] = [
    (1, 8),
    (2, 7),
    (8, 6),
    (8, 7),
    (7, 10),
    (7, 5),
    (3, 10),
    (6, 5),
    (10, 11),
    (10, 9),
    (11, 15),
    (11, 12),
    (9, 14),
    (10, 14),
    (10, 16),
    (11, 16),
    (13, 16),
    (8, 4),
];

/// 1-based location numbers of the example network.
pub const ZIGBEE_COORD: [usize; 1] = [10];
pub const ZIGBEE_ROUTERS: [usize; 6] = [5, 7, 8, 9, 11, 16];

/// Undirected unit-weight ZigBee topology; example locations `1..=16` are
/// ids `0..16`.
pub fn zigbee_model() -> SpatialModel {
    SpatialModel::undirected(
        16,
        ZIGBEE_LINKS
            .iter()
            .map(|&(a, b)| (a - 1, Weight::Scalar(1.0), b - 1)),
    )
    .expect("static topology")
}

fn zigbee_trace(battery: Option<f64>) -> Trace {
    let mut channels = vec![
        ("coord".to_string(), ChannelKind::Bool),
        ("router".to_string(), ChannelKind::Bool),
        ("end_dev".to_string(), ChannelKind::Bool),
    ];
    if battery.is_some() {
        channels.push(("X_B".to_string(), ChannelKind::Real));
    }
    let schema = TraceSchema::new(channels).expect("distinct channels");
    let locations = (1..=16)
        .map(|id| {
            let coord = ZIGBEE_COORD.contains(&id);
            let router = ZIGBEE_ROUTERS.contains(&id);
            let mut v = vec![
                Sample::Bool(coord),
                Sample::Bool(router),
                Sample::Bool(!coord && !router),
            ];
            if let Some(level) = battery {
                v.push(Sample::Real(level));
            }
            PiecewiseSignal::constant(v, 0.0, 1.0)
        })
        .collect();
    Trace::new(schema, 1.0, locations).expect("well-formed fixture")
}

/// The example network with `coord`, `router` and `end_dev` channels over
/// `[0, 1]` and a static location service.
pub fn zigbee_fixture() -> (LocationService, Trace) {
    (LocationService::constant(zigbee_model()), zigbee_trace(None))
}

/// [`zigbee_fixture`] plus a constant battery channel `X_B`.
pub fn zigbee_fixture_with_battery(level: f64) -> (LocationService, Trace) {
    (
        LocationService::constant(zigbee_model()),
        zigbee_trace(Some(level)),
    )
}

/// Parameters of the property library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyParams {
    /// Window of the temporal operators in `PH`, `Safe` and `connect_restore`.
    pub window: f64,
    /// Restore deadline `h`.
    pub restore: f64,
    /// Minimal escape distance in `Safe`.
    pub escape: f64,
    /// Location of the acyclicity check.
    pub location: usize,
}

impl Default for PropertyParams {
    fn default() -> Self {
        PropertyParams {
            window: 5.0,
            restore: 2.0,
            escape: 2.0,
            location: 0,
        }
    }
}

pub const CONNECT: &str = "end_dev reach(hops)[<= 1] (router reach(hops)[< infinity] coord)";
pub const RELIABLE_ROUTER: &str = "(X_B > 30 & router) reach(hops)[< infinity] coord";

pub fn reliable_connect() -> String {
    format!("end_dev reach(hops)[<= 1] ({RELIABLE_ROUTER})")
}

/// A route leaves `@l` in one hop and comes back.
pub fn phi_cycle(l: usize) -> String {
    format!("@{l} reach(hops)[<= 1] (!@{l} & somewhere(hops)[< infinity] @{l})")
}

pub fn phi_acyclic(l: usize) -> String {
    format!("!({})", phi_cycle(l))
}

pub fn phi_safe(p: &PropertyParams) -> String {
    format!(
        "G[0,{}] escape(delta)[>= {}] (X_H < 90 & X_P < 150)",
        p.window, p.escape
    )
}

/// The eight named properties over the MANET schema, as formula text.
pub fn property_library(p: &PropertyParams) -> Vec<(&'static str, String)> {
    vec![
        ("connect", CONNECT.to_string()),
        ("reliable_connect", reliable_connect()),
        (
            "connect_restore",
            format!(
                "G[0,{}] (({CONNECT}) | F[0,{}] ({CONNECT}))",
                p.window, p.restore
            ),
        ),
        ("acyclic", phi_acyclic(p.location)),
        ("PH", format!("!(X_P > 150) | F[0,{}] X_H > 100", p.window)),
        ("Safe", phi_safe(p)),
        ("some", format!("somewhere(delta)[<= 5] {}", phi_safe(p))),
        (
            "target",
            "everywhere(hops)[< infinity] somewhere(hops)[< 10] X_S >= 1".to_string(),
        ),
    ]
}
