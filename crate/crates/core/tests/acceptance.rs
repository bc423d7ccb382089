//! Acceptance suite, library half: criteria 1-6. Each test prints a single
//! ACCEPTANCE pass/fail line for its criterion.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use smilp::bounds::{
    closed_form_cycle_bound, fractional_mixed_chromatic, mixed_chromatic, theoretical_bound,
    tree_mixed_coloring,
};
use smilp::constructions::{
    gen_random_instance, make_affine_design, make_planes_partition, GenParams,
};
use smilp::estimator::{estimate_zcut, EstimatorConfig};
use smilp::experiment::{verify_tightness, TightFamily};
use smilp::graph::{
    build_covering_graph, build_packing_graph, natural_sparse_list, support_columns,
    GraphKind, InteractionGraph, SupportList,
};
use smilp::instance::{q, qr};
use smilp::kernel::{
    enumerate_integer_points, exact_closure_value, solve_lp, solve_milp, OracleConfig,
    SolveStatus,
};
use smilp::{Axis, BlockPartition, Instance, Kind, Q, Sense};
use std::collections::BTreeSet;

fn criterion(number: usize, name: &str, body: impl FnOnce() + std::panic::UnwindSafe) {
    let result = std::panic::catch_unwind(body);
    println!(
        "ACCEPTANCE {number} ({name}): {}",
        if result.is_ok() { "PASS" } else { "FAIL" }
    );
    if let Err(payload) = result {
        std::panic::resume_unwind(payload);
    }
}

#[test]
fn acceptance_1_chromatic_closed_forms() {
    criterion(1, "chromatic closed forms", || {
        for k in 3..=9usize {
            let graph = InteractionGraph::cycle(k);
            let list = SupportList::edges_of(&graph);
            let eta = fractional_mixed_chromatic(&graph, &list).unwrap().value;
            assert_eq!(eta, closed_form_cycle_bound(k).unwrap(), "cycle C_{k}");
        }
        for k in 2..=6usize {
            let graph = InteractionGraph::complete(k);
            let list = SupportList::new((0..k).map(|v| BTreeSet::from([v])).collect());
            let eta = fractional_mixed_chromatic(&graph, &list).unwrap().value;
            assert_eq!(eta, q(k as i64), "complete K_{k} with singletons");
        }
        // Path on three nodes with the two edge supports.
        let graph = InteractionGraph::from_edges(GraphKind::Packing, 3, &[(0, 1), (0, 2)]);
        let list = SupportList::new(vec![BTreeSet::from([0, 1]), BTreeSet::from([0, 2])]);
        assert_eq!(fractional_mixed_chromatic(&graph, &list).unwrap().value, qr(3, 2));
        assert_eq!(mixed_chromatic(&graph, &list).unwrap().value, q(2));
    });
}

fn random_tree(rng: &mut ChaCha8Rng, nodes: usize) -> InteractionGraph {
    let edges: Vec<(usize, usize)> =
        (1..nodes).map(|v| (rng.gen_range(0..v), v)).collect();
    InteractionGraph::from_edges(GraphKind::Packing, nodes, &edges)
}

#[test]
fn acceptance_2_tree_coloring() {
    criterion(2, "tree coloring procedure", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let nodes = rng.gen_range(2..=12usize);
            let tree = random_tree(&mut rng, nodes);
            assert!(tree.is_tree());
            let delta = tree.max_degree();
            let list = SupportList::edges_of(&tree);
            let coloring = tree_mixed_coloring(&tree).unwrap();
            assert_eq!(coloring.len(), 2 * delta - 1, "color count on {nodes} nodes");
            let mut cover = vec![0usize; nodes];
            for set in &coloring {
                assert!(set.is_subordinate(&tree, &list), "not subordinate to edges");
                for v in set.union() {
                    cover[v] += 1;
                }
            }
            assert!(cover.iter().all(|&c| c == delta), "coverage {cover:?} != {delta}");
        }
    });
}

#[test]
fn acceptance_3_tight_ratios() {
    criterion(3, "tight ratio families", || {
        for (family, relaxed, integer) in [
            (TightFamily::ThreeCycle, qr(5, 2), q(1)),
            (TightFamily::StarSs, q(3), q(2)),
            (TightFamily::TreeNs, q(13), q(9)),
            (TightFamily::GeneralSs, qr(5, 2), q(1)),
            // The cycle-free general family needs K >= 3: at K = 2 the unit
            // vectors coincide with the complements and two y's can be 1.
            (TightFamily::GeneralNs, q(3), q(1)),
        ] {
            let outcome = verify_tightness(family).unwrap();
            assert!(outcome.pass, "{}: {:?}", family.as_str(), outcome);
            assert_eq!(outcome.z_relaxed, relaxed, "{}", family.as_str());
            assert_eq!(outcome.z_int, integer, "{}", family.as_str());
        }
        // tree_ns ratio matches the closed form (2nD - n - D)/(nD - 1).
        assert_eq!(qr(13, 9), qr(2 * 5 * 2 - 5 - 2, 5 * 2 - 1));
        // Cycle family: certified closure lower bound 9, integer optimum <= 7.
        let cycle = verify_tightness(TightFamily::CycleNs).unwrap();
        assert!(cycle.pass, "{cycle:?}");
        assert!(cycle.z_relaxed >= q(9) && cycle.z_int <= q(7));
        assert!(&cycle.z_relaxed / &cycle.z_int >= qr(9, 7));
        // Covering scenarios: z_int >= Kn - K^2; the closure lands on
        // n + K - 1 = 4 because each scenario's cheap hull points share the
        // common column of its concurrent design members.
        let cover = verify_tightness(TightFamily::Cover).unwrap();
        assert!(cover.pass, "{cover:?}");
        assert!(cover.z_int >= q(2));
        assert_eq!(cover.z_relaxed, q(4));
    });
}

#[test]
fn acceptance_4_covering_pathologies() {
    criterion(4, "set-cover pathologies", || {
        let ssc = verify_tightness(TightFamily::Ssc).unwrap();
        assert!(ssc.pass, "{ssc:?}");
        assert!(ssc.z_int >= q(3) && ssc.z_relaxed <= q(2));
        let dsc = verify_tightness(TightFamily::Dsc).unwrap();
        assert!(dsc.pass, "{dsc:?}");
        assert!(dsc.z_int >= q(3));
    });
}

#[test]
fn acceptance_5_designs() {
    criterion(5, "combinatorial designs", || {
        for n in [2usize, 3, 5, 7] {
            assert!(make_affine_design(n).unwrap().check(), "affine design n = {n}");
        }
        for n in [2usize, 3] {
            assert!(make_planes_partition(n).unwrap().check(), "planes partition n = {n}");
        }
    });
}

struct SoundnessCase {
    instance: Instance,
    graph: InteractionGraph,
    list: SupportList,
}

fn soundness_case(kind: Kind, seed: u64) -> SoundnessCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let nv = rng.gen_range(2..=4usize);
    let sqr = rng.gen_range(1..=3usize);
    let params = GenParams {
        nv,
        p: qr(3, 4),
        sqr,
        coeff_max: 4,
        eps_max: 2,
        obj_max: 6,
        seed,
        kind,
        two_stage: false,
    };
    let (instance, col_partition) = gen_random_instance(&params).unwrap();
    let graph = if kind == Kind::Covering {
        let nblocks = instance.rows.len() / sqr;
        let row_partition = BlockPartition::new(
            Axis::Rows,
            (0..nblocks).map(|b| (b * sqr..(b + 1) * sqr).collect()).collect(),
        );
        build_covering_graph(&instance, &row_partition).unwrap()
    } else {
        build_packing_graph(&instance, &col_partition).unwrap()
    };
    let list = natural_sparse_list(&instance, &graph);
    SoundnessCase { instance, graph, list }
}

#[test]
fn acceptance_6_estimator_soundness() {
    criterion(6, "estimator soundness", || {
        for kind in [Kind::Packing, Kind::Covering, Kind::General] {
            let mut done = 0usize;
            let mut seed = 0u64;
            while done < 30 {
                seed += 1;
                let case = soundness_case(kind, seed * 31 + kind as u64);
                let inst = &case.instance;
                let milp = solve_milp(inst, &[]).unwrap();
                if milp.status != SolveStatus::Optimal {
                    continue; // rare general-kind infeasibility
                }
                let z_int = milp.value;
                let z_lp = solve_lp(inst, &[]).unwrap().value;
                let supports: Vec<BTreeSet<usize>> = case
                    .list
                    .members
                    .iter()
                    .map(|m| support_columns(&case.graph, m))
                    .collect();
                let flat: Vec<Vec<usize>> =
                    supports.iter().map(|s| s.iter().copied().collect()).collect();
                let exact =
                    exact_closure_value(inst, &flat, OracleConfig::default()).unwrap().value;
                let run = estimate_zcut(inst, &supports, &EstimatorConfig::default()).unwrap();
                let estimate = run.z_estimate.clone();
                if inst.sense == Sense::Maximize {
                    assert!(z_int <= exact && exact <= estimate && estimate <= z_lp,
                        "sandwich failed: {z_int} {exact} {estimate} {z_lp} (seed {seed})");
                } else {
                    assert!(z_int >= exact && exact >= estimate && estimate >= z_lp,
                        "sandwich failed: {z_int} {exact} {estimate} {z_lp} (seed {seed})");
                }
                // Every generated cut must hold on every integer point.
                let points = enumerate_integer_points(inst).unwrap();
                for cut in &run.cuts_added {
                    let row = cut.as_row();
                    for idx in 0..points.len() {
                        assert!(
                            row.satisfied_by(&points.point_as_rationals(idx)),
                            "invalid cut (seed {seed})"
                        );
                    }
                }
                // Ratio of exact closure to integer optimum within the
                // theoretical bound (exact rational comparison).
                let bound = theoretical_bound(kind, &case.graph, &case.list).unwrap().value;
                let ratio = if inst.sense == Sense::Maximize {
                    if z_int.is_zero() {
                        assert!(exact.is_zero());
                        Q::one()
                    } else {
                        &exact / &z_int
                    }
                } else if exact.is_zero() {
                    assert!(z_int.is_zero());
                    Q::one()
                } else {
                    &z_int / &exact
                };
                assert!(ratio >= Q::one() && ratio <= bound, "{ratio} vs {bound} (seed {seed})");
                done += 1;
            }
        }
        // Gap between estimate and exact closure is zero on the quick tight
        // families of criterion 3.
        use smilp::constructions::{make_tight_3cycle, make_tight_general_ss, make_tight_star_ss};
        let cases: Vec<(Instance, Vec<BTreeSet<usize>>)> = vec![
            {
                let (i, p) = make_tight_3cycle(&qr(1, 2)).unwrap();
                let s = p.blocks.iter().map(|b| b.iter().copied().collect()).collect();
                (i, s)
            },
            {
                let (i, p) = make_tight_star_ss(2, &qr(1, 2)).unwrap();
                let s = p.blocks.iter().map(|b| b.iter().copied().collect()).collect();
                (i, s)
            },
            {
                let (i, p) = make_tight_general_ss(3, &qr(1, 2)).unwrap();
                let s = p.blocks.iter().map(|b| b.iter().copied().collect()).collect();
                (i, s)
            },
        ];
        for (inst, supports) in &cases {
            let flat: Vec<Vec<usize>> =
                supports.iter().map(|s| s.iter().copied().collect()).collect();
            let exact = exact_closure_value(inst, &flat, OracleConfig::default()).unwrap().value;
            let run = estimate_zcut(inst, supports, &EstimatorConfig::default()).unwrap();
            assert_eq!(run.z_estimate, exact, "estimator gap on tight instance");
        }
    });
}
