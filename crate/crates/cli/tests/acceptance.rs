//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line. Run with `cargo test --test acceptance -- --nocapture`
//! to see every line.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use railguard_cli::generate::seed_trains;
use railguard_cli::report::{csv_row, simulated_ms};
use railguard_cli::scenario::parse_scenario;
use railguard_cli::sweep::{run_sweep, sweep_scenario, SweepSpec};
use railguard_core::detection::{
    detect_head_on_junction, detect_head_on_track, detect_rear_end_platform,
    detect_rear_end_track, scan_with_options, IncidentKind, ScanOptions,
};
use railguard_core::kinematics::{braking_distance, distance_to_junction, KinematicConstants};
use railguard_core::maxsum::{
    brute_force_optimum, run_maxsum, total_utility, FactorGraph, VarId,
};
use railguard_core::net::{
    build_network, Direction, Occupancy, TrackDef, TrackId, TrainId, TrainState, VertexDef,
    VertexDefKind,
};
use railguard_core::sim::{efficiency, run_scenario, step, Mode, Scenario, World};
use railguard_core::coordination::SafetyOutcome;
use railguard_core::sim::EventKind;

const KMH: f64 = 1000.0 / 3600.0;

fn base_scenario() -> Scenario {
    parse_scenario(include_str!("../../../scenarios/sweep_base.scn"), "sweep_base").unwrap()
}

fn corpus_scenario(i: usize) -> Scenario {
    let base = base_scenario();
    let trains = 2 + (i % 15) * 2; // 2..30
    seed_trains(&base, trains, 1000 + i as u64).unwrap()
}

/// Criterion 1: braking distances at the sweep speed extremes match
/// independent arithmetic within 0.5%.
#[test]
fn criterion_1_braking_formula() {
    let k = KinematicConstants::default();
    assert_eq!((k.mu_k, k.g), (0.42, 9.81));
    // independent arithmetic: evaluate from km/h with a different
    // factorization than the implementation
    let independent = |kmh: f64| {
        let v = kmh / 3.6;
        (v / (2.0 * 0.42 * 9.81)) * v
    };
    let started = Instant::now();
    let low = braking_distance(40.0 * KMH, &k).unwrap();
    let high = braking_distance(220.0 * KMH, &k).unwrap();
    let elapsed = started.elapsed();
    let low_ref = independent(40.0);
    let high_ref = independent(220.0);
    assert!((low - low_ref).abs() / low_ref < 0.005, "low {low} vs {low_ref}");
    assert!((high - high_ref).abs() / high_ref < 0.005, "high {high} vs {high_ref}");
    // the headline figures at the range ends
    assert!((low - 14.98).abs() < 0.05, "40 km/h braking {low}");
    assert!((high - 453.2).abs() < 0.5, "220 km/h braking {high}");
    assert!(elapsed.as_micros() < 1000, "braking formula took {elapsed:?}");
    println!(
        "[PASS] criterion 1: braking distance {low:.2} m @ 40 km/h, {high:.1} m @ 220 km/h, {elapsed:?}"
    );
}

/// Criterion 2: each detection predicate equals the literal conjunction of
/// its conditions over a grid of more than 10 000 parameter combinations.
#[test]
fn criterion_2_detection_truth_tables() {
    let started = Instant::now();
    let headway = 200.0;
    let mut evaluated: u64 = 0;

    // two parallel tracks plus a junction with two approaches
    let net = build_network(
        vec![
            VertexDef {
                name: "SA".into(),
                comm_range: 200.0,
                kind: VertexDefKind::Station { platforms: vec![(1, "T0".into())] },
            },
            VertexDef {
                name: "SB".into(),
                comm_range: 200.0,
                kind: VertexDefKind::Station { platforms: Vec::new() },
            },
            VertexDef { name: "J".into(), comm_range: 200.0, kind: VertexDefKind::Junction },
            VertexDef {
                name: "SC".into(),
                comm_range: 200.0,
                kind: VertexDefKind::Station { platforms: Vec::new() },
            },
            VertexDef {
                name: "SD".into(),
                comm_range: 200.0,
                kind: VertexDefKind::Station { platforms: Vec::new() },
            },
        ],
        vec![
            TrackDef { name: "T0".into(), from: "SB".into(), to: "SA".into(), length: 6000.0 },
            TrackDef { name: "T1".into(), from: "SB".into(), to: "SA".into(), length: 6000.0 },
            TrackDef { name: "JA".into(), from: "SC".into(), to: "J".into(), length: 6000.0 },
            TrackDef { name: "JB".into(), from: "SD".into(), to: "J".into(), length: 6000.0 },
        ],
    )
    .unwrap();

    let speeds = [0.0, 1.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    let gaps = [10.0, 50.0, 100.0, 150.0, 199.0, 199.99, 200.0, 200.01, 250.0, 600.0];
    let body = 100.0;

    // on-track pair grid: track equality x direction bits x speeds x gaps
    for same_track in [true, false] {
        for dir_a in [Direction::Up, Direction::Down] {
            for dir_b in [Direction::Up, Direction::Down] {
                for &va in &speeds {
                    for &vb in &speeds {
                        for &gap in &gaps {
                            let a_tip = 2000.0;
                            let a = TrainState {
                                length: body,
                                ..TrainState::new(
                                    "A",
                                    Occupancy::OnTrack {
                                        track: TrackId(0),
                                        position: a_tip,
                                        direction: dir_a,
                                    },
                                    va,
                                )
                            };
                            // place b's body `gap` meters above a's body
                            let a_hi = match dir_a {
                                Direction::Up => a_tip,
                                Direction::Down => a_tip + body,
                            };
                            let b_lo = a_hi + gap;
                            let b_tip = match dir_b {
                                Direction::Up => b_lo + body,
                                Direction::Down => b_lo,
                            };
                            let b = TrainState {
                                length: body,
                                ..TrainState::new(
                                    "B",
                                    Occupancy::OnTrack {
                                        track: TrackId(if same_track { 0 } else { 1 }),
                                        position: b_tip,
                                        direction: dir_b,
                                    },
                                    vb,
                                )
                            };

                            // literal conjunctions, derived independently
                            let head_on_expected = same_track
                                && (dir_a != dir_b)
                                && (va > 0.0 || vb > 0.0)
                                && gap < headway;
                            let got_ho = detect_head_on_track(
                                TrainId(0),
                                &a,
                                TrainId(1),
                                &b,
                                &net,
                                headway,
                            );
                            assert_eq!(
                                got_ho.is_some(),
                                head_on_expected,
                                "head-on: same={same_track} {dir_a:?}/{dir_b:?} v=({va},{vb}) gap={gap}"
                            );
                            evaluated += 1;

                            // rear-end: b is above a, so the leader along Up
                            // is b, along Down it is a
                            let (v_lead, v_follow) = match dir_a {
                                Direction::Up => (vb, va),
                                Direction::Down => (va, vb),
                            };
                            let rear_expected = same_track
                                && (dir_a == dir_b)
                                && v_follow > v_lead
                                && v_lead > 0.0
                                && gap < headway;
                            let got_re = detect_rear_end_track(
                                TrainId(0),
                                &a,
                                TrainId(1),
                                &b,
                                &net,
                                headway,
                            );
                            assert_eq!(
                                got_re.is_some(),
                                rear_expected,
                                "rear-end: same={same_track} {dir_a:?}/{dir_b:?} v=({va},{vb}) gap={gap}"
                            );
                            evaluated += 1;
                        }
                    }
                }
            }
        }
    }

    // junction grid: distances x speeds x track split x heading x plans
    let j = net.find_vertex("J").unwrap();
    let r = net.vertex(j).comm_range;
    let dists = [50.0, 150.0, 199.0, 200.0, 201.0, 900.0];
    let jspeeds = [0.0, 5.0, 20.0];
    for &da in &dists {
        for &db in &dists {
            for &va in &jspeeds {
                for &vb in &jspeeds {
                    for same_track in [false, true] {
                        for toward_a in [true, false] {
                            let mk = |track: usize, d: f64, v: f64, toward: bool| TrainState {
                                length: body,
                                ..TrainState::new(
                                    "X",
                                    Occupancy::OnTrack {
                                        track: TrackId(track),
                                        position: 6000.0 - d,
                                        direction: if toward {
                                            Direction::Up
                                        } else {
                                            Direction::Down
                                        },
                                    },
                                    v,
                                )
                            };
                            let a = mk(2, da, va, toward_a);
                            let b = mk(if same_track { 2 } else { 3 }, db + 500.0 * same_track as u64 as f64, vb, true);
                            let trains = vec![a.clone(), b.clone()];
                            let db_eff = db + 500.0 * same_track as u64 as f64;
                            let expected = !same_track
                                && va > 0.0
                                && vb > 0.0
                                && toward_a
                                && da <= r
                                && db_eff <= r;
                            let approaching: Vec<TrainId> = (0..2)
                                .map(TrainId)
                                .filter(|t| {
                                    let tr = &trains[t.0];
                                    tr.speed > 0.0
                                        && tr.heading(&net).is_some_and(|(_, to)| to == j)
                                        && distance_to_junction(tr, j, &net)
                                            .is_ok_and(|d| d <= r)
                                })
                                .collect();
                            let got = detect_head_on_junction(j, &approaching, &trains, &net);
                            assert_eq!(
                                !got.is_empty(),
                                expected,
                                "junction: d=({da},{db_eff}) v=({va},{vb}) same={same_track} toward_a={toward_a}"
                            );
                            evaluated += 1;
                        }
                    }
                }
            }
        }
    }

    // platform grid: standing state x incoming speed/track/heading
    let sa = net.find_vertex("SA").unwrap();
    for standing_at_platform in [true, false] {
        for &vi in &[0.0, 10.0, 25.0] {
            for incoming_same_track in [true, false] {
                for toward in [true, false] {
                    let standing = if standing_at_platform {
                        TrainState::new(
                            "S",
                            Occupancy::AtPlatform { station: sa, platform: 1 },
                            0.0,
                        )
                    } else {
                        TrainState {
                            length: body,
                            ..TrainState::new(
                                "S",
                                Occupancy::OnTrack {
                                    track: TrackId(0),
                                    position: 5900.0,
                                    direction: Direction::Up,
                                },
                                0.0,
                            )
                        }
                    };
                    let incoming = TrainState {
                        length: body,
                        ..TrainState::new(
                            "I",
                            Occupancy::OnTrack {
                                track: TrackId(if incoming_same_track { 0 } else { 1 }),
                                position: 2000.0,
                                direction: if toward { Direction::Up } else { Direction::Down },
                            },
                            vi,
                        )
                    };
                    let trains = vec![standing, incoming];
                    let expected =
                        standing_at_platform && incoming_same_track && vi > 0.0 && toward;
                    let got =
                        detect_rear_end_platform(sa, TrainId(0), TrainId(1), &trains, &net);
                    assert_eq!(
                        got.is_some(),
                        expected,
                        "platform: at_platform={standing_at_platform} v={vi} same={incoming_same_track} toward={toward}"
                    );
                    evaluated += 1;
                }
            }
        }
    }

    let elapsed = started.elapsed();
    assert!(evaluated >= 10_000, "only {evaluated} grid evaluations");
    assert!(elapsed.as_secs() < 5, "truth tables took {elapsed:?}");
    println!("[PASS] criterion 2: {evaluated} truth-table evaluations, zero mismatches, {elapsed:?}");
}

/// Criterion 3: max-sum equals the enumeration optimum on 100 seeded trees
/// and on the standard three-agent incident topologies with their action-state
/// vectors.
#[test]
fn criterion_3_maxsum_tree_exactness() {
    let started = Instant::now();

    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=10usize);
        let mut g = FactorGraph::new();
        let vars: Vec<VarId> = (0..n).map(|i| g.add_variable(format!("v{i}"))).collect();
        fn beta(rng: &mut ChaCha8Rng) -> [f64; 2] {
            [
                if rng.gen::<bool>() { 1.0 } else { -1.0 },
                if rng.gen::<bool>() { 1.0 } else { -1.0 },
            ]
        }
        let b0 = beta(&mut rng);
        g.add_factor("f0", vars[0], &[], b0).unwrap();
        for i in 1..n {
            let parent = vars[rng.gen_range(0..i)];
            let b = beta(&mut rng);
            g.add_factor(format!("f{i}"), vars[i], &[parent], b).unwrap();
        }
        assert!(g.is_acyclic());
        let ms = run_maxsum(&g, 100, 0.0).unwrap();
        let bf = brute_force_optimum(&g).unwrap();
        let got = total_utility(&g, &ms.actions);
        let want = total_utility(&g, &bf.actions);
        assert!(
            (got - want).abs() < 1e-12,
            "seed {seed}: max-sum total {got} != optimum {want}"
        );
    }

    // the relay and direct three-agent topologies with beta = [-1,1], [1,-1], [-1,1]
    let betas = [[-1.0, 1.0], [1.0, -1.0], [-1.0, 1.0]];
    let mut relay = FactorGraph::new();
    let (v1, v2, v3) = (
        relay.add_variable("v1"),
        relay.add_variable("v2"),
        relay.add_variable("v3"),
    );
    relay.add_factor("U1", v1, &[v2], betas[0]).unwrap();
    relay.add_factor("U2", v2, &[v1, v3], betas[1]).unwrap();
    relay.add_factor("U3", v3, &[v2], betas[2]).unwrap();

    let mut direct = FactorGraph::new();
    let (w1, w2, w3) = (
        direct.add_variable("v1"),
        direct.add_variable("v2"),
        direct.add_variable("v3"),
    );
    direct.add_factor("U1", w1, &[w3], betas[0]).unwrap();
    direct.add_factor("U2", w2, &[w1, w3], betas[1]).unwrap();
    direct.add_factor("U3", w3, &[w1], betas[2]).unwrap();

    // rear-end two-factor variants: train-train and train-station
    let mut rear_tt = FactorGraph::new();
    let (r1, r3) = (rear_tt.add_variable("v1"), rear_tt.add_variable("v3"));
    rear_tt.add_factor("U1", r1, &[r3], betas[0]).unwrap();
    rear_tt.add_factor("U3", r3, &[r1], betas[2]).unwrap();

    let mut rear_ts = FactorGraph::new();
    let (s1, s2) = (rear_ts.add_variable("v1"), rear_ts.add_variable("v2"));
    rear_ts.add_factor("U1", s1, &[s2], betas[0]).unwrap();
    rear_ts.add_factor("U2", s2, &[s1], betas[1]).unwrap();

    for (name, g) in
        [("relay", relay), ("direct", direct), ("rear train-train", rear_tt), ("rear train-station", rear_ts)]
    {
        let damping = if g.is_acyclic() { 0.0 } else { 0.5 };
        let ms = run_maxsum(&g, 100, damping).unwrap();
        let bf = brute_force_optimum(&g).unwrap();
        let got = total_utility(&g, &ms.actions);
        let want = total_utility(&g, &bf.actions);
        assert!(
            (got - want).abs() < 1e-9,
            "{name}: max-sum total {got} != enumeration optimum {want}"
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 10, "max-sum exactness took {elapsed:?}");
    println!("[PASS] criterion 3: 100 seeded trees and 4 incident-topology graphs exact, {elapsed:?}");
}

/// Criterion 4: over 500 generated scenarios whose incidents are all
/// detected while a safe stop is still possible, no collision ever occurs.
#[test]
fn criterion_4_safety_theorem_at_desk_scale() {
    let started = Instant::now();
    let mut total_detected = 0u64;
    for i in 0..500 {
        let sc = corpus_scenario(i);
        let report = run_scenario(&sc);
        // the corpus guarantee: nothing was flagged unavoidable, so every
        // incident was detected while the safe-stop inequality held
        let unavoidable = report.events.iter().any(|e| {
            e.resolution.as_ref().is_some_and(|r| r.safety == SafetyOutcome::Unavoidable)
        });
        assert!(!unavoidable, "scenario {i} ({}) had an infeasible detection", sc.name);
        assert_eq!(
            report.occurred, 0,
            "scenario {i} ({}) recorded a collision:\n{}",
            sc.name,
            report.event_log()
        );
        assert!(report.counts_consistent());
        total_detected += report.detected;
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 120, "safety corpus took {elapsed:?}");
    assert!(total_detected > 1000, "corpus too quiet: {total_detected} detections");
    println!(
        "[PASS] criterion 4: 500 scenarios, {total_detected} detections, zero collisions, {elapsed:?}"
    );
}

/// Criterion 5: avoided + occurred = detected in every report, and the
/// efficiency formula is exact on integer counts.
#[test]
fn criterion_5_efficiency_accounting() {
    let started = Instant::now();
    for i in (0..500).step_by(23) {
        let sc = corpus_scenario(i);
        let report = run_scenario(&sc);
        assert!(report.counts_consistent(), "scenario {i}");
        let eff = report.efficiency_pct();
        let want = if report.detected == 0 {
            100.0
        } else {
            report.avoided as f64 / report.detected as f64 * 100.0
        };
        assert_eq!(eff, want);
    }
    // formula on integer counts, including the vacuous convention
    assert_eq!(efficiency(0, 0).unwrap(), 100.0);
    assert_eq!(efficiency(10, 9).unwrap(), 90.0);
    assert_eq!(efficiency(7, 7).unwrap(), 100.0);
    assert_eq!(efficiency(8, 2).unwrap(), 25.0);
    assert!(efficiency(3, 4).is_err());
    // an infeasible scenario: the formula still balances
    let net = build_network(
        vec![
            VertexDef {
                name: "SA".into(),
                comm_range: 5000.0,
                kind: VertexDefKind::Station { platforms: Vec::new() },
            },
            VertexDef {
                name: "SB".into(),
                comm_range: 5000.0,
                kind: VertexDefKind::Station { platforms: Vec::new() },
            },
        ],
        vec![TrackDef { name: "M".into(), from: "SA".into(), to: "SB".into(), length: 10_000.0 }],
    )
    .unwrap();
    let fast = |name: &str, pos: f64, dir: Direction| TrainState {
        length: 100.0,
        ..TrainState::new(
            name,
            Occupancy::OnTrack { track: TrackId(0), position: pos, direction: dir },
            220.0 * KMH,
        )
    };
    let doomed = Scenario {
        name: "doomed".into(),
        network: net,
        trains: vec![fast("A", 4000.0, Direction::Up), fast("B", 4350.0, Direction::Down)],
        config: railguard_core::sim::SimConfig { horizon: 120, ..Default::default() },
    };
    let report = run_scenario(&doomed);
    assert_eq!(report.occurred, 1);
    assert_eq!(report.detected, report.avoided + report.occurred);
    assert_eq!(report.efficiency_pct(), 0.0);
    println!("[PASS] criterion 5: outcome conservation and exact efficiency, {:?}", started.elapsed());
}

/// Criterion 6: distributed never spends more messages than centralized,
/// and the saving grows strictly with the train count on the standard sweep.
#[test]
fn criterion_6_message_count_ordering() {
    let started = Instant::now();
    let base = base_scenario();
    let spec = SweepSpec {
        counts: (2..=30).step_by(2).collect(),
        modes: vec![Mode::Distributed, Mode::Centralized],
        seed: 0,
        jobs: 4,
    };
    let rows = run_sweep(&base, &spec).unwrap();
    assert_eq!(rows.len(), 15 * 2);
    // per mode, the messages column never decreases with the train count
    for mode in [Mode::Distributed, Mode::Centralized] {
        let series: Vec<u64> = rows
            .iter()
            .filter(|r| r.mode == mode)
            .map(|r| r.report.messages_total)
            .collect();
        assert!(
            series.windows(2).all(|w| w[0] <= w[1]),
            "{} messages not monotone: {series:?}",
            mode.label()
        );
    }
    let mut previous_gap: Option<(usize, u64)> = None;
    for pair in rows.chunks(2) {
        // rows sort by (count, mode label): centralized before distributed
        let (cent, dist) = (&pair[0], &pair[1]);
        assert_eq!(cent.trains, dist.trains);
        assert_eq!(cent.mode, Mode::Centralized);
        assert_eq!(dist.mode, Mode::Distributed);
        // identical physics in both modes
        assert_eq!(cent.report.detected, dist.report.detected);
        assert_eq!(cent.report.avoided, dist.report.avoided);
        assert_eq!(cent.report.occurred, dist.report.occurred);
        assert!(
            dist.report.messages_total <= cent.report.messages_total,
            "{} trains: distributed {} > centralized {}",
            dist.trains,
            dist.report.messages_total,
            cent.report.messages_total
        );
        let gap = cent.report.messages_total - dist.report.messages_total;
        if let Some((prev_trains, prev_gap)) = previous_gap {
            assert!(
                gap > prev_gap,
                "gap not strictly increasing: {prev_gap} at {prev_trains} trains, {gap} at {} trains",
                dist.trains
            );
        }
        previous_gap = Some((dist.trains, gap));
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 120, "sweep took {elapsed:?}");
    println!("[PASS] criterion 6: distributed <= centralized with strictly growing gap, {elapsed:?}");
}

/// Criterion 7: the full agent scan finds a superset of the train-pairs-only
/// scan, strictly more whenever junction or platform conflicts exist.
#[test]
fn criterion_7_detection_completeness() {
    let started = Instant::now();
    let pairs_only = ScanOptions { junction_agents: false, platform_agents: false };
    let mut strict_scenarios = 0;
    for i in (0..500).step_by(5) {
        let sc = corpus_scenario(i);
        // walk the run tick by tick and compare scans on every world state
        let mut world = World::new(&sc);
        let mut full_total = 0usize;
        let mut pairs_total = 0usize;
        for _ in 0..sc.config.horizon.min(120) {
            let full = scan_with_options(&sc.network, &world.trains, sc.config.headway, &ScanOptions::default());
            let narrow = scan_with_options(&sc.network, &world.trains, sc.config.headway, &pairs_only);
            for inc in &narrow {
                assert!(
                    full.iter().any(|f| f.pair_key() == inc.pair_key() && f.kind == inc.kind),
                    "scenario {i}: pairs-only scan found {inc:?} that the full scan missed"
                );
            }
            full_total += full.len();
            pairs_total += narrow.len();
            let (next, _, _) = step(&world, &sc.network, &sc.config);
            world = next;
        }
        assert!(full_total >= pairs_total);
        // every generated scenario seeds at least a junction pair, and from
        // 8 trains up a platform conflict too: the full scan must see more
        assert!(
            full_total > pairs_total,
            "scenario {i}: junction/platform conflicts present but no extra detections"
        );
        strict_scenarios += 1;
    }
    let elapsed = started.elapsed();
    assert!(strict_scenarios > 50);
    println!(
        "[PASS] criterion 7: full scan superset on every tick, strictly more in {strict_scenarios} scenarios, {elapsed:?}"
    );
}

/// Criterion 8: identical scenario and seed produce byte-identical event
/// logs and CSV rows across ten runs.
#[test]
fn criterion_8_determinism() {
    let started = Instant::now();
    let ring = parse_scenario(include_str!("../../../scenarios/ring_demo.scn"), "ring_demo").unwrap();
    let generated = corpus_scenario(7);
    for sc in [&ring, &generated] {
        let reference = run_scenario(sc);
        let ref_log = reference.event_log();
        let ref_csv = csv_row(&reference, sc.config.mode, simulated_ms(&sc.config));
        for run in 1..10 {
            let report = run_scenario(sc);
            assert_eq!(report.event_log(), ref_log, "run {run} event log diverged");
            assert_eq!(
                csv_row(&report, sc.config.mode, simulated_ms(&sc.config)),
                ref_csv,
                "run {run} CSV row diverged"
            );
        }
    }
    // sweep points equal single runs of the same generated scenario
    let base = base_scenario();
    let spec = SweepSpec { counts: vec![6], modes: vec![Mode::Distributed], seed: 0, jobs: 2 };
    let rows = run_sweep(&base, &spec).unwrap();
    let standalone = run_scenario(&sweep_scenario(&base, 6, 0, Mode::Distributed).unwrap());
    assert_eq!(rows[0].report.event_log(), standalone.event_log());
    assert_eq!(rows[0].csv(), csv_row(&standalone, Mode::Distributed, rows[0].runtime_ms));
    println!("[PASS] criterion 8: ten byte-identical runs per scenario, {:?}", started.elapsed());
}

/// The twelve-station ring demo: two hazards, both avoided.
#[test]
fn ring_demo_reference_run() {
    let sc = parse_scenario(include_str!("../../../scenarios/ring_demo.scn"), "ring_demo").unwrap();
    assert_eq!(sc.network.vertex_count(), 22);
    assert_eq!(sc.network.station_count(), 12);
    assert_eq!(sc.network.junction_count(), 10);
    let report = run_scenario(&sc);
    assert_eq!(report.detected, 2);
    assert_eq!(report.avoided, 2);
    assert_eq!(report.occurred, 0);
    let kinds: Vec<IncidentKind> = report
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Detected)
        .map(|e| e.incident_kind)
        .collect();
    assert!(kinds.contains(&IncidentKind::RearEndPlatform));
    assert!(kinds.contains(&IncidentKind::RearEndTrack));
    println!("[PASS] ring demo reference: detected=2 avoided=2 occurred=0");
}
