//! File formats: JSON traces and spaces, CSV and JSON verdict export, and
//! CSV re-import.
//!
//! Trace file:
//! `{"horizon": T, "channels": [{"name", "kind": "bool"|"real"}],
//!   "locations": [[{"t", "values": [...]}, ...], ...]}`; reals may be the
//! strings `"inf"` / `"-inf"`.
//!
//! Space file: `{"locations": n, "undirected": bool, "snapshots": [...]}`
//! where each snapshot is `{"t", "edges": [{"src", "dst", "weight"}]}` with a
//! number or `[x, y]` weight, or `{"t", "positions": [[x, y]], "relation":
//! [[a, b]]}`. A single snapshot is a constant location service.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::monitor::MonitorResult;
use crate::signal::PiecewiseSignal;
use crate::space::{build_euclidean, Edge, LocationService, SpatialModel, Weight};
use crate::trace::{ChannelKind, Sample, SpatioTemporalSignal, Trace, TraceSchema};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    /// Malformed file or a value that violates the model's constraints.
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
}

impl IoError {
    fn schema(path: &Path, message: impl Into<String>) -> Self {
        IoError::Schema {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    name: String,
    kind: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentFile {
    t: f64,
    values: Vec<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceFile {
    horizon: f64,
    channels: Vec<ChannelFile>,
    locations: Vec<Vec<SegmentFile>>,
}

fn real_to_json(x: f64) -> Value {
    if x == f64::INFINITY {
        json!("inf")
    } else if x == f64::NEG_INFINITY {
        json!("-inf")
    } else {
        json!(x)
    }
}

fn json_to_sample(v: &Value, kind: ChannelKind) -> Option<Sample> {
    match (kind, v) {
        (ChannelKind::Bool, Value::Bool(b)) => Some(Sample::Bool(*b)),
        (ChannelKind::Real, Value::Number(n)) => n.as_f64().map(Sample::Real),
        (ChannelKind::Real, Value::String(s)) if s == "inf" => Some(Sample::Real(f64::INFINITY)),
        (ChannelKind::Real, Value::String(s)) if s == "-inf" => {
            Some(Sample::Real(f64::NEG_INFINITY))
        }
        _ => None,
    }
}

pub fn parse_trace(text: &str, path: &Path) -> Result<Trace, IoError> {
    let file: TraceFile =
        serde_json::from_str(text).map_err(|e| IoError::schema(path, e.to_string()))?;
    let channels = file
        .channels
        .iter()
        .map(|c| match c.kind.as_str() {
            "bool" => Ok((c.name.clone(), ChannelKind::Bool)),
            "real" => Ok((c.name.clone(), ChannelKind::Real)),
            other => Err(IoError::schema(
                path,
                format!("channel `{}`: unknown kind `{other}` (bool or real)", c.name),
            )),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let schema = TraceSchema::new(channels).map_err(|e| IoError::schema(path, e.to_string()))?;
    let mut locations = Vec::with_capacity(file.locations.len());
    for (l, segments) in file.locations.iter().enumerate() {
        let mut parsed = Vec::with_capacity(segments.len());
        for (i, seg) in segments.iter().enumerate() {
            if seg.values.len() != schema.len() {
                return Err(IoError::schema(
                    path,
                    format!(
                        "location {l}, segment {i}: {} values for {} channels",
                        seg.values.len(),
                        schema.len()
                    ),
                ));
            }
            let samples = seg
                .values
                .iter()
                .zip(schema.channels())
                .map(|(v, (name, kind))| {
                    json_to_sample(v, *kind).ok_or_else(|| {
                        IoError::schema(
                            path,
                            format!(
                                "location {l}, segment {i}: channel `{name}` expects a {} value, found {v}",
                                kind.name()
                            ),
                        )
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            parsed.push((seg.t, samples));
        }
        let signal = PiecewiseSignal::new(parsed, file.horizon)
            .map_err(|e| IoError::schema(path, format!("location {l}: {e}")))?;
        locations.push(signal);
    }
    Trace::new(schema, file.horizon, locations).map_err(|e| IoError::schema(path, e.to_string()))
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Trace, IoError> {
    let path = path.as_ref();
    parse_trace(&read(path)?, path)
}

pub fn trace_to_json(trace: &Trace) -> String {
    let file = TraceFile {
        horizon: trace.horizon(),
        channels: trace
            .schema()
            .channels()
            .iter()
            .map(|(name, kind)| ChannelFile {
                name: name.clone(),
                kind: kind.name().to_string(),
            })
            .collect(),
        locations: trace
            .locations()
            .iter()
            .map(|s| {
                s.segments()
                    .map(|(t, v)| SegmentFile {
                        t,
                        values: v
                            .iter()
                            .map(|x| match *x {
                                Sample::Bool(b) => json!(b),
                                Sample::Real(r) => real_to_json(r),
                            })
                            .collect(),
                    })
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

pub fn save_trace(trace: &Trace, path: impl AsRef<Path>) -> Result<(), IoError> {
    write(path.as_ref(), &trace_to_json(trace))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum WeightFile {
    Scalar(f64),
    Vec2([f64; 2]),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    src: usize,
    dst: usize,
    weight: WeightFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotFile {
    t: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<EdgeFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relation: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceFile {
    locations: usize,
    #[serde(default)]
    undirected: bool,
    snapshots: Vec<SnapshotFile>,
}

pub fn parse_space(text: &str, path: &Path) -> Result<LocationService, IoError> {
    let file: SpaceFile =
        serde_json::from_str(text).map_err(|e| IoError::schema(path, e.to_string()))?;
    let mut snapshots = Vec::with_capacity(file.snapshots.len());
    for (i, snap) in file.snapshots.into_iter().enumerate() {
        let err = |m: String| IoError::schema(path, format!("snapshot {i}: {m}"));
        let model = match (snap.edges, snap.positions, snap.relation) {
            (Some(edges), None, None) => {
                let edges = edges.into_iter().map(|e| {
                    let weight = match e.weight {
                        WeightFile::Scalar(w) => Weight::Scalar(w),
                        WeightFile::Vec2(v) => Weight::Vec2(v),
                    };
                    (e.src, weight, e.dst)
                });
                if file.undirected {
                    SpatialModel::undirected(file.locations, edges)
                } else {
                    SpatialModel::new(
                        file.locations,
                        edges.map(|(src, weight, dst)| Edge { src, weight, dst }),
                    )
                }
                .map_err(|e| err(e.to_string()))?
            }
            (None, Some(positions), Some(relation)) => {
                if positions.len() != file.locations {
                    return Err(err(format!(
                        "{} positions for {} locations",
                        positions.len(),
                        file.locations
                    )));
                }
                let mut pairs: Vec<(usize, usize)> = relation.iter().map(|&[a, b]| (a, b)).collect();
                if file.undirected {
                    pairs.extend(relation.iter().map(|&[a, b]| (b, a)));
                }
                build_euclidean(&positions, &pairs).map_err(|e| err(e.to_string()))?
            }
            _ => {
                return Err(err(
                    "give either `edges` or both `positions` and `relation`".to_string(),
                ))
            }
        };
        snapshots.push((snap.t, model));
    }
    LocationService::new(snapshots).map_err(|e| IoError::schema(path, e.to_string()))
}

pub fn load_space(path: impl AsRef<Path>) -> Result<LocationService, IoError> {
    let path = path.as_ref();
    parse_space(&read(path)?, path)
}

/// Edge-list form with every directed edge listed.
pub fn space_to_json(service: &LocationService) -> String {
    let file = SpaceFile {
        locations: service.universe(),
        undirected: false,
        snapshots: service
            .snapshots()
            .map(|(t, m)| SnapshotFile {
                t,
                edges: Some(
                    m.edges()
                        .iter()
                        .map(|e| EdgeFile {
                            src: e.src,
                            dst: e.dst,
                            weight: match e.weight {
                                Weight::Scalar(w) => WeightFile::Scalar(w),
                                Weight::Vec2(v) => WeightFile::Vec2(v),
                            },
                        })
                        .collect(),
                ),
                positions: None,
                relation: None,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("serializable") + "\n"
}

pub fn save_space(service: &LocationService, path: impl AsRef<Path>) -> Result<(), IoError> {
    write(path.as_ref(), &space_to_json(service))
}

/// Verdict values that can be exported.
pub trait VerdictValue: Copy + PartialEq {
    /// `true`/`false`, or the shortest round-trip decimal with `inf`/`-inf`.
    fn to_csv(&self) -> String;
    fn to_json(&self) -> Value;
}

impl VerdictValue for bool {
    fn to_csv(&self) -> String {
        self.to_string()
    }
    fn to_json(&self) -> Value {
        json!(self)
    }
}

impl VerdictValue for f64 {
    fn to_csv(&self) -> String {
        self.to_string()
    }
    fn to_json(&self) -> Value {
        real_to_json(*self)
    }
}

/// Restriction of an exported verdict signal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    /// Locations to export, in this order; all when `None`.
    pub locations: Option<Vec<usize>>,
    /// Export only the value at this time instead of every breakpoint.
    pub at: Option<f64>,
}

impl Selection {
    fn locations(&self, universe: usize) -> Vec<usize> {
        match &self.locations {
            Some(ls) => ls.iter().copied().filter(|&l| l < universe).collect(),
            None => (0..universe).collect(),
        }
    }

    /// `(t, value)` rows of one location signal.
    fn rows<V: VerdictValue>(&self, s: &PiecewiseSignal<V>) -> Vec<(f64, V)> {
        match self.at {
            Some(t) => s.value_at(t).map(|v| vec![(t, *v)]).unwrap_or_default(),
            None => s.segments().map(|(t, v)| (t, *v)).collect(),
        }
    }
}

/// `location,t,value`, one row per location and breakpoint, ordered by
/// location then time; each location ends with a row at the signal end
/// repeating its last value.
pub fn verdicts_to_csv<V: VerdictValue>(signal: &SpatioTemporalSignal<V>) -> String {
    verdicts_to_csv_selected(signal, &Selection::default())
}

/// As [`verdicts_to_csv`]; a selection with `at` set emits one row per
/// location and no end rows.
pub fn verdicts_to_csv_selected<V: VerdictValue>(
    signal: &SpatioTemporalSignal<V>,
    selection: &Selection,
) -> String {
    let mut out = String::from("location,t,value\n");
    for l in selection.locations(signal.universe()) {
        let s = signal.location(l);
        for (t, v) in selection.rows(s) {
            let _ = writeln!(out, "{l},{t},{}", v.to_csv());
        }
        if selection.at.is_none() {
            let last = s.values().last().expect("non-empty signal");
            let _ = writeln!(out, "{l},{},{}", s.end(), last.to_csv());
        }
    }
    out
}

pub fn result_to_json<V: VerdictValue>(result: &MonitorResult<V>) -> String {
    result_to_json_selected(result, &Selection::default())
}

pub fn result_to_json_selected<V: VerdictValue>(
    result: &MonitorResult<V>,
    selection: &Selection,
) -> String {
    let signal = &result.signal;
    let locations: Vec<Value> = selection
        .locations(signal.universe())
        .into_iter()
        .map(|l| {
            let s = signal.location(l);
            json!({
                "location": l,
                "end": s.end(),
                "segments": selection.rows(s).into_iter()
                    .map(|(t, v)| json!({"t": t, "value": v.to_json()}))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = json!({
        "formula": result.formula.to_string(),
        "semantics": result.semantics,
        "max_fixpoint_iterations": result.stats.max_fixpoint_iterations,
        "locations": locations,
    });
    serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
}

fn parse_csv_value(s: &str) -> Option<Sample> {
    match s {
        "true" => Some(Sample::Bool(true)),
        "false" => Some(Sample::Bool(false)),
        _ => s.parse::<f64>().ok().filter(|x| !x.is_nan()).map(Sample::Real),
    }
}

/// Reads a verdict CSV back as a trace with the single channel `value`.
pub fn parse_verdict_csv(text: &str, path: &Path) -> Result<Trace, IoError> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some("location,t,value") {
        return Err(IoError::schema(path, "expected header `location,t,value`"));
    }
    let mut rows: Vec<Vec<(f64, Sample)>> = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |m: &str| IoError::schema(path, format!("line {}: {m}", i + 2));
        let cells: Vec<&str> = line.split(',').collect();
        let [l, t, v] = cells[..] else {
            return Err(err("expected three fields"));
        };
        let l: usize = l.trim().parse().map_err(|_| err("bad location"))?;
        let t: f64 = t.trim().parse().map_err(|_| err("bad time"))?;
        let v = parse_csv_value(v.trim()).ok_or_else(|| err("bad value"))?;
        if l > rows.len() {
            return Err(err("locations must appear in order"));
        }
        if l == rows.len() {
            rows.push(Vec::new());
        }
        rows[l].push((t, v));
    }
    let kind = match rows.first().and_then(|r| r.first()) {
        Some((_, s)) => s.kind(),
        None => return Err(IoError::schema(path, "no rows")),
    };
    let schema = TraceSchema::new(vec![("value".to_string(), kind)])
        .map_err(|e| IoError::schema(path, e.to_string()))?;
    let mut ends = Vec::new();
    let mut locations = Vec::new();
    for (l, mut r) in rows.into_iter().enumerate() {
        let (end, _) = r.pop().ok_or_else(|| IoError::schema(path, "empty location"))?;
        if r.is_empty() {
            return Err(IoError::schema(path, format!("location {l}: missing end row")));
        }
        ends.push(end);
        let segments = r.into_iter().map(|(t, s)| (t, vec![s])).collect();
        let sig = PiecewiseSignal::new(segments, end)
            .map_err(|e| IoError::schema(path, format!("location {l}: {e}")))?;
        locations.push(sig);
    }
    let horizon = ends[0];
    Trace::new(schema, horizon, locations).map_err(|e| IoError::schema(path, e.to_string()))
}

pub fn load_verdict_csv(path: impl AsRef<Path>) -> Result<Trace, IoError> {
    let path = path.as_ref();
    parse_verdict_csv(&read(path)?, path)
}
