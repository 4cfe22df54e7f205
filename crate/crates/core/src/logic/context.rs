use std::collections::BTreeMap;

use thiserror::Error;

use super::{Closure, Formula};
use crate::space::DistanceFunction;
use crate::trace::{ChannelKind, TraceSchema};

/// Named distance functions available to formulas.
#[derive(Debug, Clone)]
pub struct InterpretationContext {
    distances: BTreeMap<String, DistanceFunction>,
}

impl Default for InterpretationContext {
    /// `hops` and `delta` (Euclidean norm of displacement labels).
    fn default() -> Self {
        let mut ctx = InterpretationContext::empty();
        ctx.register(DistanceFunction::hops());
        ctx.register(DistanceFunction::euclidean());
        ctx
    }
}

impl InterpretationContext {
    pub fn empty() -> Self {
        InterpretationContext {
            distances: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, f: DistanceFunction) {
        self.distances.insert(f.name().to_string(), f);
    }

    pub fn distance(&self, name: &str) -> Option<&DistanceFunction> {
        self.distances.get(name)
    }

    pub fn distance_names(&self) -> impl Iterator<Item = &str> {
        self.distances.keys().map(String::as_str)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
    #[error("channel `{name}` is {found}, used as {expected}")]
    ChannelKind {
        name: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("unknown distance function `{0}`")]
    UnknownDistance(String),
    #[error("{operator} needs an {needed} distance bound, got `{bound}`")]
    Closure {
        operator: &'static str,
        needed: &'static str,
        bound: String,
    },
    #[error("invalid interval [{lo}, {hi}]")]
    Interval { lo: f64, hi: f64 },
    #[error("location @{location} outside 0..{universe}")]
    Location { location: usize, universe: usize },
    #[error("NaN threshold on channel `{0}`")]
    Threshold(String),
}

fn check_channel(
    schema: &TraceSchema,
    name: &str,
    expected: ChannelKind,
) -> Result<(), ValidationError> {
    match schema.lookup(name) {
        None => Err(ValidationError::UnknownChannel(name.to_string())),
        Some((_, kind)) if kind != expected => Err(ValidationError::ChannelKind {
            name: name.to_string(),
            expected: expected.name(),
            found: kind.name(),
        }),
        Some(_) => Ok(()),
    }
}

/// Checks channel names and kinds, distance names, interval well-formedness,
/// location atoms and that every spatial bound has the closure its operator
/// needs: upper bounds under reach, somewhere, everywhere and surround, lower
/// bounds under escape.
pub fn validate(
    formula: &Formula,
    ctx: &InterpretationContext,
    schema: &TraceSchema,
    universe: usize,
) -> Result<(), ValidationError> {
    for node in formula.nodes() {
        match node {
            Formula::Atomic(name) => check_channel(schema, name, ChannelKind::Bool)?,
            Formula::Cmp {
                channel, threshold, ..
            } => {
                check_channel(schema, channel, ChannelKind::Real)?;
                if threshold.is_nan() {
                    return Err(ValidationError::Threshold(channel.clone()));
                }
            }
            Formula::At(l) if *l >= universe => {
                return Err(ValidationError::Location {
                    location: *l,
                    universe,
                })
            }
            Formula::Until { interval, .. }
            | Formula::Since { interval, .. }
            | Formula::Eventually(interval, _)
            | Formula::Globally(interval, _)
            | Formula::Once(interval, _)
            | Formula::Historically(interval, _)
                if !interval.is_valid() =>
            {
                return Err(ValidationError::Interval {
                    lo: interval.lo,
                    hi: interval.hi,
                })
            }
            Formula::Reach {
                distance, bound, ..
            }
            | Formula::Somewhere {
                distance, bound, ..
            }
            | Formula::Everywhere {
                distance, bound, ..
            }
            | Formula::Surround {
                distance, bound, ..
            }
            | Formula::Escape {
                distance, bound, ..
            } => {
                if ctx.distance(distance).is_none() {
                    return Err(ValidationError::UnknownDistance(distance.clone()));
                }
                let (operator, needed) = match node {
                    Formula::Escape { .. } => ("escape", Closure::Upward),
                    Formula::Reach { .. } => ("reach", Closure::Downward),
                    Formula::Somewhere { .. } => ("somewhere", Closure::Downward),
                    Formula::Everywhere { .. } => ("everywhere", Closure::Downward),
                    _ => ("surround", Closure::Downward),
                };
                if bound.value.is_nan() || bound.value < 0.0 || bound.closure() != needed {
                    return Err(ValidationError::Closure {
                        operator,
                        needed: match needed {
                            Closure::Downward => "upper (<, <=)",
                            Closure::Upward => "lower (>, >=)",
                        },
                        bound: bound.to_string(),
                    });
                }
            }
            _ => {}
        }
    }
    Ok(())
}
