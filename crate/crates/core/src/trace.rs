//! Multi-channel spatio-temporal traces and spatio-temporal signals.

use thiserror::Error;

use crate::signal::{PiecewiseSignal, SignalError};
use crate::space::Location;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    Bool,
    Real,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Bool => "bool",
            ChannelKind::Real => "real",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    Bool(bool),
    Real(f64),
}

impl Sample {
    pub fn kind(&self) -> ChannelKind {
        match self {
            Sample::Bool(_) => ChannelKind::Bool,
            Sample::Real(_) => ChannelKind::Real,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TraceSchema {
    channels: Vec<(String, ChannelKind)>,
}

impl TraceSchema {
    pub fn new(channels: Vec<(String, ChannelKind)>) -> Result<Self, TraceError> {
        for (i, (name, _)) in channels.iter().enumerate() {
            if channels[..i].iter().any(|(n, _)| n == name) {
                return Err(TraceError::DuplicateChannel(name.clone()));
            }
        }
        Ok(TraceSchema { channels })
    }

    pub fn channels(&self) -> &[(String, ChannelKind)] {
        &self.channels
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn lookup(&self, name: &str) -> Option<(usize, ChannelKind)> {
        self.channels
            .iter()
            .position(|(n, _)| n == name)
            .map(|i| (i, self.channels[i].1))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TraceError {
    #[error("channel `{0}` declared twice")]
    DuplicateChannel(String),
    #[error("trace has no locations")]
    NoLocations,
    #[error("location {location}: {source}")]
    Signal {
        location: Location,
        source: SignalError,
    },
    #[error("location {location} ends at {end}, expected the horizon {horizon}")]
    HorizonMismatch {
        location: Location,
        end: f64,
        horizon: f64,
    },
    #[error("location {location} starts at {start}; traces start at time 0")]
    Start { location: Location, start: f64 },
    #[error("location {location}, time {t}: expected {expected} samples, found {found}")]
    Arity {
        location: Location,
        t: f64,
        expected: usize,
        found: usize,
    },
    #[error("location {location}, time {t}: channel `{channel}` expects a {expected} sample")]
    Kind {
        location: Location,
        t: f64,
        channel: String,
        expected: &'static str,
    },
    #[error("location {location}, time {t}: channel `{channel}` is NaN")]
    NaN {
        location: Location,
        t: f64,
        channel: String,
    },
}

/// Per-location piecewise-constant sample vectors over `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    schema: TraceSchema,
    horizon: f64,
    locations: Vec<PiecewiseSignal<Vec<Sample>>>,
}

impl Trace {
    pub fn new(
        schema: TraceSchema,
        horizon: f64,
        locations: Vec<PiecewiseSignal<Vec<Sample>>>,
    ) -> Result<Self, TraceError> {
        if locations.is_empty() {
            return Err(TraceError::NoLocations);
        }
        for (location, sig) in locations.iter().enumerate() {
            if sig.end() != horizon {
                return Err(TraceError::HorizonMismatch {
                    location,
                    end: sig.end(),
                    horizon,
                });
            }
            if sig.start() != 0.0 {
                return Err(TraceError::Start {
                    location,
                    start: sig.start(),
                });
            }
            for (t, samples) in sig.segments() {
                if samples.len() != schema.len() {
                    return Err(TraceError::Arity {
                        location,
                        t,
                        expected: schema.len(),
                        found: samples.len(),
                    });
                }
                for (s, (name, kind)) in samples.iter().zip(schema.channels()) {
                    if s.kind() != *kind {
                        return Err(TraceError::Kind {
                            location,
                            t,
                            channel: name.clone(),
                            expected: kind.name(),
                        });
                    }
                    if matches!(s, Sample::Real(x) if x.is_nan()) {
                        return Err(TraceError::NaN {
                            location,
                            t,
                            channel: name.clone(),
                        });
                    }
                }
            }
        }
        Ok(Trace {
            schema,
            horizon,
            locations,
        })
    }

    pub fn schema(&self) -> &TraceSchema {
        &self.schema
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn universe(&self) -> usize {
        self.locations.len()
    }

    pub fn location(&self, l: Location) -> &PiecewiseSignal<Vec<Sample>> {
        &self.locations[l]
    }

    pub fn locations(&self) -> &[PiecewiseSignal<Vec<Sample>>] {
        &self.locations
    }

    /// Projection of one channel at one location.
    pub fn channel(&self, l: Location, channel: usize) -> PiecewiseSignal<Sample> {
        self.locations[l].map(|v| v[channel])
    }

    /// All breakpoints over all locations, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .locations
            .iter()
            .flat_map(|s| s.times().iter().copied())
            .collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all
    }
}

/// Value per location at one instant.
pub type SpatialSignal<V> = Vec<V>;

/// One piecewise-constant signal per location.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatioTemporalSignal<V> {
    signals: Vec<PiecewiseSignal<V>>,
}

impl<V: Clone + PartialEq> SpatioTemporalSignal<V> {
    pub fn new(signals: Vec<PiecewiseSignal<V>>) -> Self {
        SpatioTemporalSignal { signals }
    }

    pub fn universe(&self) -> usize {
        self.signals.len()
    }

    pub fn location(&self, l: Location) -> &PiecewiseSignal<V> {
        &self.signals[l]
    }

    pub fn signals(&self) -> &[PiecewiseSignal<V>] {
        &self.signals
    }

    pub fn into_signals(self) -> Vec<PiecewiseSignal<V>> {
        self.signals
    }

    pub fn end(&self) -> f64 {
        self.signals.first().map_or(0.0, |s| s.end())
    }

    /// Values of all locations at `t`; `None` outside the domain.
    pub fn at(&self, t: f64) -> Option<SpatialSignal<V>> {
        self.signals.iter().map(|s| s.value_at(t).cloned()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> TraceSchema {
        TraceSchema::new(vec![
            ("flag".into(), ChannelKind::Bool),
            ("level".into(), ChannelKind::Real),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_ill_typed_samples() {
        let bad = PiecewiseSignal::new(vec![(0.0, vec![Sample::Real(1.0), Sample::Real(1.0)])], 1.0)
            .unwrap();
        assert!(matches!(
            Trace::new(schema(), 1.0, vec![bad]),
            Err(TraceError::Kind { .. })
        ));
        let short = PiecewiseSignal::new(vec![(0.0, vec![Sample::Bool(true)])], 1.0).unwrap();
        assert!(matches!(
            Trace::new(schema(), 1.0, vec![short]),
            Err(TraceError::Arity { .. })
        ));
        let nan = PiecewiseSignal::new(vec![(0.0, vec![Sample::Bool(true), Sample::Real(f64::NAN)])], 1.0)
            .unwrap();
        assert!(matches!(
            Trace::new(schema(), 1.0, vec![nan]),
            Err(TraceError::NaN { .. })
        ));
        assert!(TraceSchema::new(vec![("a".into(), ChannelKind::Bool), ("a".into(), ChannelKind::Real)]).is_err());
    }

    #[test]
    fn channel_projection_and_breakpoints() {
        let sig = PiecewiseSignal::new(
            vec![
                (0.0, vec![Sample::Bool(true), Sample::Real(1.0)]),
                (2.0, vec![Sample::Bool(true), Sample::Real(3.0)]),
            ],
            4.0,
        )
        .unwrap();
        let t = Trace::new(schema(), 4.0, vec![sig.clone(), sig]).unwrap();
        assert_eq!(t.breakpoints(), vec![0.0, 2.0]);
        let flag = t.channel(1, 0);
        assert_eq!(flag.len(), 1);
        assert_eq!(t.schema().lookup("level"), Some((1, ChannelKind::Real)));
    }
}
