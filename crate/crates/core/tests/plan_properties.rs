//! Property tests for plan parsing and graph validation.

use proptest::collection::vec;
use proptest::prelude::*;

use fncap_core::types::{ApplicationGraph, CallEdge, CallMode, FunctionProfile};
use fncap_core::{
    expand_grid, parse_test_plan, serialize_test_plan, validate_graph, Slo, TestPlan, VuRange,
};

fn arb_plan() -> impl Strategy<Value = TestPlan> {
    let memory = vec(128u32..8192, 1..6).prop_map(|mut v| {
        v.sort_unstable();
        v.dedup();
        v
    });
    let concurrency = vec(1u32..200, 1..6).prop_map(|mut v| {
        v.sort_unstable();
        v.dedup();
        v
    });
    (memory, concurrency, 1u64..10, 1u32..50, 0u64..u64::MAX, 10.0f64..5000.0).prop_map(
        |(memory_mib, concurrency, intervals, vu_min, seed, max_ms)| TestPlan {
            memory_mib,
            concurrency,
            duration_s: 60 * (intervals + 2),
            vus: VuRange { min: vu_min, max: vu_min + 10 },
            slo: Slo::p95(max_ms),
            seed,
            sampling_interval_s: 60,
            timeout_ms: 30_000,
            app: ApplicationGraph {
                functions: vec![FunctionProfile::new("solo", 100.0)],
                edges: vec![],
            },
        },
    )
}

proptest! {
    /// parse . serialize . parse is a fixed point for valid plans.
    #[test]
    fn parse_serialize_parse_is_fixed_point(plan in arb_plan()) {
        let text = serialize_test_plan(&plan);
        let once = parse_test_plan(&text).expect("serialized plan parses");
        let text2 = serialize_test_plan(&once);
        let twice = parse_test_plan(&text2).expect("round-tripped plan parses");
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(&once, &plan);
    }

    /// Grid size is the product of the two grid lengths.
    #[test]
    fn grid_length_is_product(plan in arb_plan()) {
        let grid = expand_grid(&plan);
        prop_assert_eq!(grid.len(), plan.memory_mib.len() * plan.concurrency.len());
        // Memory-major ascending order.
        let keys: Vec<(u32, u32)> = grid.iter().map(|c| (c.memory_mib, c.concurrency)).collect();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        prop_assert_eq!(keys, sorted);
    }
}

/// Brute-force oracle: a graph is accepted iff it is a DAG over declared
/// names with exactly one root.
fn oracle_accepts(g: &ApplicationGraph) -> bool {
    use std::collections::HashSet;
    if g.functions.is_empty() {
        return false;
    }
    let names: Vec<&str> = g.functions.iter().map(|f| f.name.as_str()).collect();
    let set: HashSet<&str> = names.iter().copied().collect();
    if set.len() != names.len() {
        return false;
    }
    if !g
        .edges
        .iter()
        .all(|e| set.contains(e.caller.as_str()) && set.contains(e.callee.as_str()))
    {
        return false;
    }
    let mut positions = HashSet::new();
    if !g.edges.iter().all(|e| positions.insert((e.caller.as_str(), e.position))) {
        return false;
    }
    let roots = names
        .iter()
        .filter(|n| !g.edges.iter().any(|e| &e.callee == *n))
        .count();
    if roots != 1 {
        return false;
    }
    // Exhaustive reachability-based cycle check.
    fn has_cycle(g: &ApplicationGraph, start: &str, path: &mut Vec<String>) -> bool {
        if path.iter().any(|p| p == start) {
            return true;
        }
        path.push(start.to_string());
        let cyc = g
            .edges
            .iter()
            .filter(|e| e.caller == start)
            .any(|e| has_cycle(g, &e.callee, path));
        path.pop();
        cyc
    }
    !names.iter().any(|n| has_cycle(g, n, &mut Vec::new()))
}

fn arb_graph() -> impl Strategy<Value = ApplicationGraph> {
    let names = prop::sample::subsequence(vec!["a", "b", "c", "d", "e"], 1..=5);
    (names, vec((0usize..5, 0usize..5), 0..8)).prop_map(|(names, raw_edges)| {
        let functions: Vec<FunctionProfile> =
            names.iter().map(|n| FunctionProfile::new(*n, 50.0)).collect();
        let edges = raw_edges
            .into_iter()
            .enumerate()
            .map(|(i, (a, b))| CallEdge {
                caller: names[a % names.len()].to_string(),
                callee: names[b % names.len()].to_string(),
                mode: if i % 2 == 0 { CallMode::Sync } else { CallMode::Async },
                position: i as u32,
            })
            .collect();
        ApplicationGraph { functions, edges }
    })
}

proptest! {
    /// validate_graph accepts exactly the single-root DAGs the brute-force
    /// oracle accepts.
    #[test]
    fn validator_matches_bruteforce_oracle(g in arb_graph()) {
        let accepted = validate_graph(&g).is_empty();
        prop_assert_eq!(accepted, oracle_accepts(&g), "graph: {:?}", g);
    }
}
