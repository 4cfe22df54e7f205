use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use strel::logic::{DistanceBound, Formula, InterpretationContext};
use strel::monitor::{escape_fix, monitor, reach_fix, MonitorOptions};
use strel::scenarios::random::{random_graph, random_instance, random_trace, RandomInstance, RandomParams};
use strel::semiring::{BooleanDomain, MaxMinDomain};
use strel::space::{pairwise_distance, DistanceFunction, LocationService, SpatialModel};
use strel::trace::Trace;

fn instance(seed: u64) -> RandomInstance {
    random_instance(&mut ChaCha8Rng::seed_from_u64(seed), &RandomParams::default())
}

/// Locations reachable from `from` in the union of all snapshots.
fn reachable(service: &LocationService, from: usize) -> Vec<bool> {
    let n = service.universe();
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(u) = stack.pop() {
        for (_, m) in service.snapshots() {
            for e in m.outgoing(u) {
                if !seen[e.dst] {
                    seen[e.dst] = true;
                    stack.push(e.dst);
                }
            }
        }
    }
    seen
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn verdicts_depend_only_on_reachable_locations(seed in any::<u64>(), other in any::<u64>()) {
        let inst = instance(seed);
        let n = inst.service.universe();
        let ctx = InterpretationContext::default();
        let replacement = random_trace(&mut ChaCha8Rng::seed_from_u64(other), n, &RandomParams::default());
        let before = monitor::<MaxMinDomain>(&inst.service, &inst.trace, &inst.formula, &ctx, &MonitorOptions::sequential());
        for l in 0..n {
            let keep = reachable(&inst.service, l);
            let locations = (0..n)
                .map(|k| if keep[k] { inst.trace.location(k) } else { replacement.location(k) }.clone())
                .collect();
            let perturbed = Trace::new(inst.trace.schema().clone(), inst.trace.horizon(), locations).unwrap();
            let after = monitor::<MaxMinDomain>(&inst.service, &perturbed, &inst.formula, &ctx, &MonitorOptions::sequential());
            match (&before, after) {
                (Ok(b), Ok(a)) => prop_assert_eq!(b.signal.location(l), a.signal.location(l), "{}", inst.formula),
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "errors differ"),
            }
        }
    }

    #[test]
    fn parallel_and_sequential_agree(seed in any::<u64>()) {
        let inst = instance(seed);
        let ctx = InterpretationContext::default();
        let seq = monitor::<MaxMinDomain>(&inst.service, &inst.trace, &inst.formula, &ctx, &MonitorOptions::sequential());
        let par = monitor::<MaxMinDomain>(&inst.service, &inst.trace, &inst.formula, &ctx, &MonitorOptions { threads: Some(3) });
        match (seq, par) {
            (Ok(s), Ok(p)) => {
                prop_assert_eq!(s.signal, p.signal);
                prop_assert_eq!(s.stats, p.stats);
            }
            (Err(a), Err(b)) => prop_assert_eq!(a, b),
            _ => prop_assert!(false, "errors differ"),
        }
    }

    #[test]
    fn unconstrained_escape_matches_pairwise_distances(
        seed in any::<u64>(), n in 1usize..9, p in 0.0f64..0.6, d in 0u32..5, strict in any::<bool>()
    ) {
        let model = random_graph(&mut ChaCha8Rng::seed_from_u64(seed), n, p);
        let bound = DistanceBound::new(if strict { strel::logic::CmpOp::Gt } else { strel::logic::CmpOp::Ge }, d as f64);
        for f in [DistanceFunction::hops(), DistanceFunction::euclidean()] {
            let out = escape_fix::<BooleanDomain>(&model, &f, &bound, &vec![true; n]);
            for l in 0..n {
                let expected = (0..n).any(|t| {
                    let dist = pairwise_distance(&model, &f, l, t);
                    dist.is_finite() && bound.holds(dist)
                });
                prop_assert_eq!(out.values[l], expected);
            }
            prop_assert!(out.iterations <= n.max(1));
        }
    }

    #[test]
    fn spatial_operators_without_edges_stay_local(
        s1 in proptest::collection::vec(-5.0f64..5.0, 1..8),
        seed in any::<u64>(),
        v in 0u32..3,
    ) {
        let n = s1.len();
        let s2: Vec<f64> = s1.iter().map(|x| x * -0.5 + (seed % 7) as f64 - 3.0).collect();
        let model = SpatialModel::new(n, []).unwrap();
        let hops = DistanceFunction::hops();
        for bound in [DistanceBound::at_most(v as f64), DistanceBound::new(strel::logic::CmpOp::Lt, v as f64)] {
            let r = reach_fix::<MaxMinDomain>(&model, &hops, &bound, &s1, &s2);
            for ((got, x), y) in r.values.iter().zip(&s1).zip(&s2) {
                let expected = if bound.holds(0.0) { x.min(*y) } else { f64::NEG_INFINITY };
                prop_assert_eq!(*got, expected);
            }
        }
        for bound in [DistanceBound::at_least(v as f64), DistanceBound::new(strel::logic::CmpOp::Gt, v as f64)] {
            let e = escape_fix::<MaxMinDomain>(&model, &hops, &bound, &s1);
            for (got, x) in e.values.iter().zip(&s1) {
                let expected = if bound.holds(0.0) { *x } else { f64::NEG_INFINITY };
                prop_assert_eq!(*got, expected);
            }
        }
    }
}

#[test]
fn true_is_top_everywhere() {
    let inst = instance(3);
    let ctx = InterpretationContext::default();
    let r = monitor::<MaxMinDomain>(&inst.service, &inst.trace, &Formula::True, &ctx, &MonitorOptions::default()).unwrap();
    for s in r.signal.signals() {
        assert_eq!(s.values(), &[f64::INFINITY]);
    }
}

#[test]
fn reliable_connect_implies_connect_on_generated_traces() {
    use strel::logic::parse;
    use strel::scenarios::{manet_generate, reliable_connect, GraphKind, ManetConfig, CONNECT};
    let ctx = InterpretationContext::default();
    for (seed, graph) in [(1, GraphKind::Radius), (2, GraphKind::Delaunay), (3, GraphKind::Radius)] {
        let cfg = ManetConfig { nodes: 30, steps: 20, graph, seed, ..ManetConfig::default() };
        let (service, trace) = manet_generate(&cfg).unwrap();
        let run = |text: &str| {
            monitor::<BooleanDomain>(&service, &trace, &parse(text).unwrap(), &ctx, &MonitorOptions::default())
                .unwrap()
                .signal
        };
        let (weak, strong) = (run(CONNECT), run(&reliable_connect()));
        for k in 0..cfg.steps {
            let t = k as f64 * cfg.dt;
            for (w, s) in weak.at(t).unwrap().iter().zip(strong.at(t).unwrap()) {
                assert!(!s || *w, "seed {seed}, t = {t}");
            }
        }
    }
}
