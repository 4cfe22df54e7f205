//! Monitoring of spatio-temporal properties over piecewise-constant traces
//! on (possibly time-varying) weighted graphs, with Boolean and quantitative
//! semantics over constraint semirings.

pub mod io;
pub mod logic;
pub mod monitor;
pub mod oracle;
pub mod scenarios;
pub mod semiring;
pub mod signal;
pub mod space;
pub mod trace;

pub use logic::{expand_derived, parse, validate, Formula, InterpretationContext};
pub use monitor::{monitor, MonitorError, MonitorOptions, MonitorResult};
pub use oracle::oracle_monitor;
pub use semiring::{BooleanDomain, MaxMinDomain, Semiring, SignalDomain};
pub use signal::PiecewiseSignal;
pub use space::{LocationService, SpatialModel};
pub use trace::{SpatioTemporalSignal, Trace};
