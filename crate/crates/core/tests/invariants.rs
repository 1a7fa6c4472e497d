//! Cross-module invariant suites backed by independent oracles: brute-force
//! connectivity, exhaustive path packing, constructed spectra, and pinned
//! fixture checksums.

use std::path::Path;

use consensus_core::dynamics::{simulate, Horizon, ProtocolSpec, SystemState};
use consensus_core::graph::{
    algebraic_connectivity, build_laplacian, count_disjoint_paths, lambda2_lower_bound,
    vertex_connectivity, WeightedGraph,
};
use consensus_core::monitors::MonitorId;
use consensus_core::rng::SplitMix64;
use consensus_core::scenario::{build_builtin, builtin_names, run_scenario};
use consensus_core::weight::WeightFunction;

fn graph_from_mask(n: usize, mask: u32) -> WeightedGraph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            if mask & (1 << bit) != 0 {
                edges.push((i, j));
            }
            bit += 1;
        }
    }
    WeightedGraph::from_edges(n, &edges).unwrap()
}

fn random_graph(n: usize, p: f64, rng: &mut SplitMix64) -> WeightedGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.next_f64() < p {
                edges.push((i, j));
            }
        }
    }
    WeightedGraph::from_edges(n, &edges).unwrap()
}

/// Oracle: vertex connectivity by removing every vertex subset in increasing
/// size order until the remainder is disconnected or a single vertex.
fn brute_vertex_connectivity(g: &WeightedGraph) -> usize {
    let n = g.n();
    let connected_without = |removed: u32| -> bool {
        let alive: Vec<usize> = (0..n).filter(|&v| removed & (1 << v) == 0).collect();
        if alive.len() <= 1 {
            return false; // counts as "disconnected or a single vertex"
        }
        let mut seen = vec![false; n];
        let mut stack = vec![alive[0]];
        seen[alive[0]] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &v in &alive {
                if !seen[v] && g.has_link(u, v) {
                    seen[v] = true;
                    reached += 1;
                    stack.push(v);
                }
            }
        }
        reached == alive.len()
    };
    for size in 0..n {
        for removed in 0u32..(1 << n) {
            if removed.count_ones() as usize == size && !connected_without(removed) {
                return size;
            }
        }
    }
    n - 1
}

/// Oracle: maximum set of internally vertex-disjoint i-j paths by exhaustive
/// packing: enumerate simple paths avoiding used interior vertices, recurse.
/// The interior-free direct edge is a path too, usable at most once.
fn brute_disjoint_paths(g: &WeightedGraph, s: usize, t: usize) -> usize {
    #[allow(clippy::too_many_arguments)]
    fn extend(
        g: &WeightedGraph,
        t: usize,
        used: &mut Vec<bool>,
        direct_used: bool,
        path: &mut Vec<usize>,
        best: &mut usize,
        packed: usize,
    ) {
        let here = *path.last().unwrap();
        if here == t {
            let interior: Vec<usize> = path[1..path.len() - 1].to_vec();
            if interior.is_empty() && direct_used {
                return;
            }
            for &v in &interior {
                used[v] = true;
            }
            pack(
                g,
                path[0],
                t,
                used,
                direct_used || interior.is_empty(),
                best,
                packed + 1,
            );
            for &v in &interior {
                used[v] = false;
            }
            return;
        }
        for next in 0..g.n() {
            if g.has_link(here, next)
                && !used[next]
                && !path.contains(&next)
                && (next == t || next != path[0])
            {
                path.push(next);
                extend(g, t, used, direct_used, path, best, packed);
                path.pop();
            }
        }
    }
    fn pack(
        g: &WeightedGraph,
        s: usize,
        t: usize,
        used: &mut Vec<bool>,
        direct_used: bool,
        best: &mut usize,
        packed: usize,
    ) {
        *best = (*best).max(packed);
        let mut path = vec![s];
        extend(g, t, used, direct_used, &mut path, best, packed);
    }
    let mut used = vec![false; g.n()];
    let mut best = 0;
    pack(g, s, t, &mut used, false, &mut best, 0);
    best
}

#[test]
fn vertex_connectivity_matches_brute_force_exhaustively() {
    for n in 1..=5usize {
        let edge_slots = n * (n - 1) / 2;
        for mask in 0..(1u32 << edge_slots) {
            let g = graph_from_mask(n, mask);
            assert_eq!(
                vertex_connectivity(&g),
                brute_vertex_connectivity(&g),
                "n = {n}, mask {mask:#b}"
            );
        }
    }
    // Spot-check n = 6 on random masks (the full space is covered by the
    // acceptance oracles through the path bound).
    let mut rng = SplitMix64::new(61);
    for _ in 0..300 {
        let mask = (rng.next_u64() & 0x7FFF) as u32;
        let g = graph_from_mask(6, mask);
        assert_eq!(vertex_connectivity(&g), brute_vertex_connectivity(&g));
    }
}

#[test]
fn disjoint_paths_match_exhaustive_packing() {
    for n in 2..=5usize {
        let edge_slots = n * (n - 1) / 2;
        for mask in 0..(1u32 << edge_slots) {
            let g = graph_from_mask(n, mask);
            for i in 0..n {
                for j in (i + 1)..n {
                    assert_eq!(
                        count_disjoint_paths(&g, i, j).unwrap(),
                        brute_disjoint_paths(&g, i, j),
                        "n = {n}, mask {mask:#b}, pair ({i},{j})"
                    );
                }
            }
        }
    }
    let mut rng = SplitMix64::new(62);
    for n in [6usize, 7] {
        for _ in 0..40 {
            let g = random_graph(n, 0.5, &mut rng);
            let (i, j) = (rng.below(n), rng.below(n));
            if i == j {
                continue;
            }
            assert_eq!(
                count_disjoint_paths(&g, i, j).unwrap(),
                brute_disjoint_paths(&g, i, j)
            );
        }
    }
}

#[test]
fn quadratic_form_dominates_gap_times_offkernel_mass() {
    // For symmetric PSD matrices with a known kernel direction,
    // x^T A x >= lambda_2(A) ||x - proj_kernel(x)||^2. The matrices are
    // constructed as Q diag(0, l2, ..., ln) Q^T from a random orthonormal Q,
    // so the spectrum and kernel are known exactly, independent of any
    // eigensolver.
    let mut rng = SplitMix64::new(777);
    for _ in 0..200 {
        let n = 2 + rng.below(7);
        let q = random_orthonormal(n, &mut rng);
        let mut eigs = vec![0.0];
        for _ in 1..n {
            eigs.push(rng.uniform(0.05, 4.0));
        }
        eigs[1..].sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lambda2 = eigs[1];
        // A = sum_k eig_k q_k q_k^T.
        let a = |i: usize, j: usize| -> f64 { (0..n).map(|k| eigs[k] * q[k][i] * q[k][j]).sum() };
        let x: Vec<f64> = (0..n).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let mut quad = 0.0;
        for i in 0..n {
            for j in 0..n {
                quad += x[i] * a(i, j) * x[j];
            }
        }
        let kernel_component: f64 = (0..n).map(|i| q[0][i] * x[i]).sum();
        let off_kernel: f64 = (0..n)
            .map(|i| {
                let r = x[i] - kernel_component * q[0][i];
                r * r
            })
            .sum();
        assert!(
            quad >= lambda2 * off_kernel - 1e-9,
            "quad {quad} < {lambda2} * {off_kernel}"
        );
    }
}

fn random_orthonormal(n: usize, rng: &mut SplitMix64) -> Vec<Vec<f64>> {
    // Gram-Schmidt on random vectors, retrying on near-degeneracy.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= dot * bi;
            }
        }
        let norm: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for c in &mut v {
                *c /= norm;
            }
            basis.push(v);
        }
    }
    basis
}

#[test]
fn spectral_gap_lower_bound_holds_on_random_connected_graphs() {
    // When every pairwise distance stays at most B, the live spectral gap is
    // at least alpha(B^2) times the unit-weight gap.
    let mut rng = SplitMix64::new(0x60D);
    let mut seen = 0;
    while seen < 100 {
        let n = 2 + rng.below(7);
        let g = random_graph(n, 0.55, &mut rng);
        if !g.is_connected() {
            continue;
        }
        seen += 1;
        let weight =
            WeightFunction::cucker_smale(rng.uniform(0.5, 2.0), rng.uniform(0.2, 2.5)).unwrap();
        let m = 1 + rng.below(2);
        let distance_bound = rng.uniform(0.5, 3.0);
        // Scale a random cloud so the max pairwise distance is exactly B.
        let raw: Vec<f64> = (0..n * m).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let state = SystemState::first_order(n, m, raw).unwrap();
        let spread = state.max_pairwise_distance();
        let scale = distance_bound / spread.max(1e-9);
        let scaled: Vec<f64> = state.positions().iter().map(|c| c * scale).collect();
        let state = SystemState::first_order(n, m, scaled).unwrap();
        let live = algebraic_connectivity(&build_laplacian(&g, &state, &weight).unwrap());
        let bound = lambda2_lower_bound(&g, &weight, distance_bound).unwrap();
        assert!(
            live >= bound - 1e-9,
            "n = {n}: live gap {live} below bound {bound}"
        );
    }
}

/// FNV-1a over the canonical TOML text pins each builtin fixture.
fn fnv1a(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for byte in text.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

#[test]
fn builtin_fixtures_are_pinned() {
    let expected: &[(&str, u64)] = &[
        ("cs-ct2-static", 0x67729f6671ec8c52),
        ("cs-dt2", 0x10d27e1558585f90),
        ("cs-ct2-dynamic-fail", 0xd9ce15cefd8b40ec),
        ("cs-ct2-dynamic-pass", 0x524915d333f455e4),
        ("opinion-ct-fail", 0x553c637273441073),
        ("opinion-ct-pass", 0xc17d7d5f89c581ab),
        ("opinion-dt-fail", 0x4c4a922b4b94410f),
        ("opinion-dt-pass", 0xc74aacbf4f941b52),
        ("opinion-dt-linear", 0xc18c57feca518b1f),
        ("rendezvous-ct", 0xdaa5637b3475c409),
        ("rendezvous-dt", 0xbb22cd766c5c5e55),
    ];
    assert_eq!(expected.len(), builtin_names().len());
    for (name, checksum) in expected {
        let text = build_builtin(name).unwrap().to_toml_string().unwrap();
        assert_eq!(
            fnv1a(&text),
            *checksum,
            "builtin {name} drifted; serialized form:\n{text}"
        );
    }
}

#[test]
fn shipped_scenario_files_match_the_builtins() {
    // The annotated files under scenarios/ are the documented form of each
    // builtin; they must parse back to exactly the programmatic fixture.
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for name in builtin_names() {
        let path = dir.join(format!("{name}.toml"));
        let text = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("missing {}: {e}", path.display()));
        let parsed = consensus_core::scenario::ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(parsed, build_builtin(name).unwrap(), "{name} drifted");
    }
}

#[test]
fn builtin_verdicts_match_their_design() {
    // Fixtures whose hypotheses hold must reach consensus; the deliberate
    // failure twins must never report consensus.
    let must_converge = [
        "cs-ct2-static",
        "cs-dt2",
        "cs-ct2-dynamic-pass",
        "opinion-ct-pass",
        "opinion-dt-pass",
        "opinion-dt-linear",
        "rendezvous-ct",
        "rendezvous-dt",
    ];
    let must_not = ["cs-ct2-dynamic-fail", "opinion-ct-fail", "opinion-dt-fail"];
    for name in must_converge {
        let outcome = run_scenario(&build_builtin(name).unwrap(), None, 1e-3, 1e-3).unwrap();
        assert!(
            outcome.verdict.is_consensus(),
            "{name}: expected consensus, got {}",
            outcome.verdict
        );
    }
    for name in must_not {
        let outcome = run_scenario(&build_builtin(name).unwrap(), None, 1e-3, 1e-3).unwrap();
        assert!(
            !outcome.verdict.is_consensus(),
            "{name}: unexpected consensus"
        );
    }
}

#[test]
fn energy_monitors_descend_along_builtin_runs() {
    // Spot checks beyond the randomized acceptance suite: the recorded
    // monitor series of the converging fixtures descend sample to sample.
    for (name, monitor, slack) in [
        ("cs-ct2-static", MonitorId::VCt2Static, 1e-7),
        ("cs-dt2", MonitorId::VDt2, 1e-10),
        ("opinion-dt-pass", MonitorId::WStaircase, 1e-10),
        ("rendezvous-dt", MonitorId::VDt2, 1e-10),
        ("rendezvous-ct", MonitorId::VCt2Static, 1e-7),
    ] {
        let outcome = run_scenario(&build_builtin(name).unwrap(), None, 1e-3, 1e-3).unwrap();
        let series = outcome
            .trajectory
            .monitor_series(monitor)
            .unwrap_or_else(|| panic!("{name} records {monitor}"));
        for (i, pair) in series.windows(2).enumerate() {
            assert!(
                pair[1] <= pair[0] + slack,
                "{name} {monitor} rose at sample {}: {} -> {}",
                i + 1,
                pair[0],
                pair[1]
            );
        }
    }
}

#[test]
fn damped_flocking_fixture_settles_by_horizon_fifty() {
    // The damped second-order fixture is already tight by t = 50: both the
    // spread and the top speed sit below 1e-3 well before its full horizon.
    let config = build_builtin("cs-ct2-static").unwrap();
    let realized = config.realize(None).unwrap();
    let rec = simulate(
        &realized.protocol,
        &realized.graph,
        &realized.weight,
        &realized.initial,
        Horizon::Time(50.0),
        10,
        &[],
        0.0,
    )
    .unwrap();
    let final_state = rec.final_state();
    assert!(final_state.max_pairwise_distance() < 1e-3);
    assert!(final_state.max_speed().unwrap() < 1e-3);
}

#[test]
fn single_agent_run_is_immediate_consensus() {
    let spec = ProtocolSpec::ct1_fixed(0.01).unwrap();
    let g = WeightedGraph::complete(1);
    let w = WeightFunction::constant(1.0).unwrap();
    let s = SystemState::first_order(1, 2, vec![3.0, -1.0]).unwrap();
    let rec = simulate(&spec, &g, &w, &s, Horizon::Time(1.0), 10, &[], 0.0).unwrap();
    let verdict = consensus_core::monitors::detect_consensus(&rec, 1e-3, 1e-3);
    assert!(verdict.is_consensus());
}
