//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines are always printed; exits non-zero when any
//! criterion fails.

use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strel::logic::{expand_derived, parse, Formula, InterpretationContext};
use strel::monitor::{monitor, MonitorOptions, MonitorResult};
use strel::oracle::{oracle_monitor, OracleOptions};
use strel::scenarios::random::{random_formula, random_graph, random_instance, random_trace, RandomInstance, RandomParams};
use strel::scenarios::{manet_generate, property_library, zigbee_fixture, ManetConfig, PropertyParams};
use strel::semiring::{BooleanDomain, MaxMinDomain, SignalDomain};
use strel::space::{apply_isometry, distances_from, pairwise_distance, DistanceFunction, EuclideanModel, Isometry, LocationService, Route};
use strel::trace::SpatioTemporalSignal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn secs(d: Duration) -> String {
    format!("{:.4} s", d.as_secs_f64())
}

fn run<D: SignalDomain>(
    service: &LocationService,
    trace: &strel::Trace,
    formula: &Formula,
) -> Result<MonitorResult<D::Value>, strel::MonitorError> {
    monitor::<D>(service, trace, formula, &InterpretationContext::default(), &MonitorOptions::default())
}

/// Sample times: grid ticks of `step` plus every breakpoint of both signals.
fn sample_times<A: Clone + PartialEq, B: Clone + PartialEq>(
    a: &SpatioTemporalSignal<A>,
    b: &SpatioTemporalSignal<B>,
    step: f64,
) -> Vec<f64> {
    let end = a.end().min(b.end());
    let mut ts: Vec<f64> = (0..)
        .map(|k| k as f64 * step)
        .take_while(|&t| t <= end)
        .collect();
    for s in a.signals() {
        ts.extend(s.times().iter().copied().filter(|&t| t <= end));
    }
    for s in b.signals() {
        ts.extend(s.times().iter().copied().filter(|&t| t <= end));
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol
}

fn zigbee_golden() -> Outcome {
    let (service, trace) = zigbee_fixture();
    let started = Instant::now();
    let at0 = |text: &str| -> Vec<bool> {
        run::<BooleanDomain>(&service, &trace, &parse(text).unwrap())
            .unwrap()
            .signal
            .at(0.0)
            .unwrap()
    };
    // location ids are the 1-based labels minus one
    let checks = [
        ("reach true at 6, false at 8", {
            let v = at0("end_dev reach(hops)[<= 1] router");
            v[5] && !v[7]
        }),
        ("escape true at 10", at0("escape(hops)[>= 2] !end_dev")[9]),
        ("somewhere true everywhere", at0("somewhere(hops)[<= 4] coord").iter().all(|&b| b)),
        ("everywhere false everywhere", at0("everywhere(hops)[<= 2] router").iter().all(|&b| !b)),
        ("surround true at 10", at0("(coord | router) surround(hops)[<= 3] end_dev")[9]),
    ];
    let elapsed = started.elapsed();
    let ok = checks.iter().filter(|c| c.1).count();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        ok == checks.len() && elapsed < Duration::from_secs(1),
        format!("{ok}/{} verdicts in {} (limit 1 s){}", checks.len(), secs(elapsed),
            if failed.is_empty() { String::new() } else { format!("; wrong: {}", failed.join(", ")) }),
    )
}

/// Boolean and maxmin results of the monitor on one random instance.
struct CorpusEntry {
    boolean: Option<SpatioTemporalSignal<bool>>,
    maxmin: Option<SpatioTemporalSignal<f64>>,
}

fn agree<D: SignalDomain>(
    inst: &RandomInstance,
    eq: impl Fn(&D::Value, &D::Value) -> bool,
) -> (bool, Option<SpatioTemporalSignal<D::Value>>) {
    let ctx = InterpretationContext::default();
    let fast = monitor::<D>(&inst.service, &inst.trace, &inst.formula, &ctx, &MonitorOptions::default());
    let slow = oracle_monitor::<D>(&inst.service, &inst.trace, &inst.formula, &ctx, &OracleOptions::default());
    match (fast, slow) {
        (Ok(fast), Ok(slow)) => {
            if fast.signal.end() != slow.signal.end() || fast.signal.universe() != slow.signal.universe() {
                return (false, Some(fast.signal));
            }
            let mut t = 0.0;
            while t <= slow.signal.end() {
                let (a, b) = (fast.signal.at(t).unwrap(), slow.signal.at(t).unwrap());
                if !a.iter().zip(&b).all(|(x, y)| eq(x, y)) {
                    return (false, Some(fast.signal));
                }
                t += 0.5;
            }
            (true, Some(fast.signal))
        }
        (Err(_), Err(_)) => (true, None),
        (fast, _) => (false, fast.ok().map(|r| r.signal)),
    }
}

fn oracle_equivalence(corpus: &mut Vec<CorpusEntry>) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let params = RandomParams::default();
    let started = Instant::now();
    let (mut bool_bad, mut maxmin_bad, mut rejected) = (0, 0, 0);
    let mut first_bad = None;
    for _ in 0..1000 {
        let inst = random_instance(&mut rng, &params);
        let (b_ok, boolean) = agree::<BooleanDomain>(&inst, |a, b| a == b);
        let (m_ok, maxmin) = agree::<MaxMinDomain>(&inst, |a, b| close(*a, *b, 1e-9));
        bool_bad += usize::from(!b_ok);
        maxmin_bad += usize::from(!m_ok);
        rejected += usize::from(boolean.is_none());
        if (!b_ok || !m_ok) && first_bad.is_none() {
            first_bad = Some(inst.formula.to_string());
        }
        corpus.push(CorpusEntry { boolean, maxmin });
    }
    let elapsed = started.elapsed();
    outcome(
        bool_bad == 0 && maxmin_bad == 0 && elapsed < Duration::from_secs(60),
        format!(
            "1000 instances, {bool_bad} Boolean and {maxmin_bad} maxmin (tol 1e-9) disagreements, {rejected} rejected by both, {} (limit 60 s){}",
            secs(elapsed),
            first_bad.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn sign_soundness(corpus: &[CorpusEntry]) -> Outcome {
    let (mut checked, mut bad) = (0usize, 0usize);
    for entry in corpus {
        let (Some(b), Some(q)) = (&entry.boolean, &entry.maxmin) else { continue };
        for t in sample_times(b, q, 0.5) {
            let (bv, qv) = (b.at(t).unwrap(), q.at(t).unwrap());
            for (x, y) in bv.iter().zip(&qv) {
                checked += 1;
                if (*y > 0.0 && !x) || (*y < 0.0 && *x) {
                    bad += 1;
                }
            }
        }
    }
    outcome(bad == 0 && checked > 0, format!("{checked} (location, time) samples, {bad} counterexamples"))
}

fn random_euclidean(rng: &mut dyn RngCore, n: usize) -> EuclideanModel {
    let positions = (0..n)
        .map(|_| [rng.random_range(0.0..5.0), rng.random_range(0.0..5.0)])
        .collect();
    let mut relation = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.3) {
                relation.push((a, b));
                relation.push((b, a));
            }
        }
    }
    EuclideanModel { positions, relation }
}

fn random_isometry(rng: &mut dyn RngCore) -> Isometry {
    Isometry {
        angle: rng.random_range(0.0..TAU),
        translation: [rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)],
        reflect: rng.random_bool(0.5),
    }
}

/// Replaces every distance name with `delta`.
fn with_delta(f: &Formula) -> Formula {
    let s = f.to_string().replace("(hops)", "(delta)");
    parse(&s).unwrap()
}

fn signals_close<V: Clone + PartialEq>(
    a: &SpatioTemporalSignal<V>,
    b: &SpatioTemporalSignal<V>,
    eq: impl Fn(&V, &V) -> bool,
) -> bool {
    a.universe() == b.universe()
        && a.end() == b.end()
        && sample_times(a, b, 0.5)
            .into_iter()
            .all(|t| a.at(t).unwrap().iter().zip(&b.at(t).unwrap()).all(|(x, y)| eq(x, y)))
}

fn isometry_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let params = RandomParams::default();
    let (mut bool_bad, mut maxmin_bad) = (0, 0);
    for _ in 0..100 {
        let n = rng.random_range(2..=15);
        let model = random_euclidean(&mut rng, n);
        let moved = apply_isometry(&model, &random_isometry(&mut rng));
        let a = LocationService::constant(model.to_spatial_model().unwrap());
        let b = LocationService::constant(moved.to_spatial_model().unwrap());
        let trace = random_trace(&mut rng, n, &params);
        let formula = loop {
            let f = with_delta(&random_formula(&mut rng, params.max_depth, n, true));
            if f.nodes().into_iter().any(is_spatial) {
                break f;
            }
        };
        let (ba, bb) = (run::<BooleanDomain>(&a, &trace, &formula), run::<BooleanDomain>(&b, &trace, &formula));
        match (ba, bb) {
            (Ok(x), Ok(y)) => bool_bad += usize::from(x.signal != y.signal),
            (Err(_), Err(_)) => {}
            _ => bool_bad += 1,
        }
        let (qa, qb) = (run::<MaxMinDomain>(&a, &trace, &formula), run::<MaxMinDomain>(&b, &trace, &formula));
        match (qa, qb) {
            (Ok(x), Ok(y)) => maxmin_bad += usize::from(!signals_close(&x.signal, &y.signal, |p, q| close(*p, *q, 1e-6))),
            (Err(_), Err(_)) => {}
            _ => maxmin_bad += 1,
        }
    }
    outcome(
        bool_bad == 0 && maxmin_bad == 0,
        format!("100 models (n <= 15, spatial formulas over delta), {bool_bad} Boolean and {maxmin_bad} maxmin (tol 1e-6) differences"),
    )
}

fn is_spatial(f: &Formula) -> bool {
    matches!(
        f,
        Formula::Reach { .. }
            | Formula::Escape { .. }
            | Formula::Somewhere { .. }
            | Formula::Everywhere { .. }
            | Formula::Surround { .. }
    )
}

fn normalized<V: Clone + PartialEq>(s: &SpatioTemporalSignal<V>) -> SpatioTemporalSignal<V> {
    SpatioTemporalSignal::new(s.signals().iter().map(|x| x.normalized()).collect())
}

fn bridge() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    let params = RandomParams::default();
    let (mut cases, mut bad) = (0, 0);
    let mut first_bad = None;
    while cases < 200 {
        let inst = random_instance(&mut rng, &params);
        if inst.formula.is_core() {
            continue;
        }
        cases += 1;
        let core = expand_derived(&inst.formula);
        let same_bool = match (
            run::<BooleanDomain>(&inst.service, &inst.trace, &inst.formula),
            run::<BooleanDomain>(&inst.service, &inst.trace, &core),
        ) {
            (Ok(x), Ok(y)) => normalized(&x.signal) == normalized(&y.signal),
            (Err(_), Err(_)) => true,
            _ => false,
        };
        let same_maxmin = match (
            run::<MaxMinDomain>(&inst.service, &inst.trace, &inst.formula),
            run::<MaxMinDomain>(&inst.service, &inst.trace, &core),
        ) {
            (Ok(x), Ok(y)) => normalized(&x.signal) == normalized(&y.signal),
            (Err(_), Err(_)) => true,
            _ => false,
        };
        if !(same_bool && same_maxmin) {
            bad += 1;
            first_bad.get_or_insert_with(|| inst.formula.to_string());
        }
    }
    outcome(
        bad == 0,
        format!(
            "200 derived formulas vs their core expansion, {bad} differences (exact, both semantics){}",
            first_bad.map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn bfs(model: &strel::SpatialModel, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; model.size()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for e in model.outgoing(u) {
            if dist[e.dst].is_none() {
                dist[e.dst] = Some(dist[u].unwrap() + 1);
                queue.push_back(e.dst);
            }
        }
    }
    dist
}

fn distance_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let hops = DistanceFunction::hops();
    let delta = DistanceFunction::euclidean();

    let mut route_bad = 0;
    for _ in 0..200 {
        let n = rng.random_range(2..=10);
        let model = random_graph(&mut rng, n, 0.5);
        let mut steps = vec![rng.random_range(0..n)];
        for _ in 0..rng.random_range(0..12) {
            let out: Vec<usize> = model.outgoing(*steps.last().unwrap()).map(|e| e.dst).collect();
            if out.is_empty() {
                break;
            }
            steps.push(out[rng.random_range(0..out.len())]);
        }
        let route = Route::new(&model, steps).unwrap();
        route_bad += (0..route.len())
            .filter(|&i| route.distance_upto(&model, &hops, i) != i as f64)
            .count();
    }

    let mut bfs_bad = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let p = rng.random_range(0.05..0.6);
        let model = random_graph(&mut rng, n, p);
        for src in 0..n {
            let table = distances_from(&model, &hops, src).distances;
            let expected = bfs(&model, src);
            bfs_bad += table
                .iter()
                .zip(&expected)
                .filter(|(d, e)| match e {
                    Some(k) => **d != *k as f64,
                    None => d.is_finite(),
                })
                .count();
        }
    }

    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(2..=12);
        let model = random_euclidean(&mut rng, n);
        let moved = apply_isometry(&model, &random_isometry(&mut rng));
        let (a, b) = (model.to_spatial_model().unwrap(), moved.to_spatial_model().unwrap());
        for s in 0..n {
            for t in 0..n {
                let (x, y) = (pairwise_distance(&a, &delta, s, t), pairwise_distance(&b, &delta, s, t));
                if x.is_finite() != y.is_finite() {
                    worst = f64::INFINITY;
                } else if x.is_finite() {
                    worst = worst.max((x - y).abs());
                }
            }
        }
    }
    outcome(
        route_bad == 0 && bfs_bad == 0 && worst <= 1e-9,
        format!(
            "route hops = index: {route_bad} violations on 200 routes; hops = BFS: {bfs_bad} mismatches on 200 graphs; delta isometry drift {worst:.2e} (tol 1e-9)"
        ),
    )
}

fn manet_scale() -> Outcome {
    let config = ManetConfig::default();
    let (service, trace) = manet_generate(&config).unwrap();
    let library = property_library(&PropertyParams::default());
    let wanted = ["connect", "PH", "Safe", "some", "target"];
    let started = Instant::now();
    let mut max_iter = 0;
    let mut errors = Vec::new();
    for name in wanted {
        let text = &library.iter().find(|(n, _)| *n == name).unwrap().1;
        match run::<BooleanDomain>(&service, &trace, &parse(text).unwrap()) {
            Ok(r) => max_iter = max_iter.max(r.stats.max_fixpoint_iterations),
            Err(e) => errors.push(format!("{name}: {e}")),
        }
    }
    let elapsed = started.elapsed();
    let n = trace.universe();
    outcome(
        errors.is_empty() && elapsed < Duration::from_secs(30) && max_iter <= n,
        format!(
            "{n} nodes x {} steps, 5 properties in {} (limit 30 s), max fixpoint rounds {max_iter} (limit {n}){}",
            config.steps,
            secs(elapsed),
            if errors.is_empty() { String::new() } else { format!("; errors: {}", errors.join("; ")) }
        ),
    )
}

fn main() -> ExitCode {
    let mut corpus = Vec::new();
    let results = [
        ("1 ZigBee golden verdicts", zigbee_golden()),
        ("2 oracle equivalence", oracle_equivalence(&mut corpus)),
        ("3 isometry invariance", isometry_invariance()),
        ("4 derived-operator bridge", bridge()),
        ("5 robustness sign soundness", sign_soundness(&corpus)),
        ("6 distance laws", distance_laws()),
        ("7 MANET scale", manet_scale()),
    ];
    let mut all = true;
    for (name, o) in &results {
        all &= o.pass;
        println!("{} [{name}] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
