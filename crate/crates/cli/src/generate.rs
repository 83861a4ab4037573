//! Deterministic seeded train placement for sweeps and corpus runs.
//!
//! Trains are seeded onto the base network in conflict groups, cycling
//! through junction approach pairs, rear-end pairs, head-on pairs, platform
//! conflicts, and solo background trains until the requested count is
//! reached. Group sites never share tracks, so every hazard in a generated
//! scenario is one the generator placed on purpose, with speeds bounded so
//! that detection always happens while a safe stop is still possible.
//!
//! All randomness comes from a ChaCha stream keyed by (seed, train count):
//! the same inputs always produce the same scenario.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use railguard_core::coordination::PriorityClass;
use railguard_core::kinematics::braking_distance;
use railguard_core::net::{Direction, Occupancy, TrackId, TrainState, VertexId};
use railguard_core::sim::Scenario;

const KMH: f64 = 1000.0 / 3600.0;
/// Clearance kept between a sampled braking distance and the stopping room
/// available at detection time.
const PLACEMENT_MARGIN: f64 = 120.0;

#[derive(Debug)]
pub enum GenError {
    InsufficientCapacity { needed: usize, kind: &'static str, available: usize },
    EmptyCounts,
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::InsufficientCapacity { needed, kind, available } => write!(
                f,
                "base network offers {available} {kind} sites but the sweep needs {needed}"
            ),
            GenError::EmptyCounts => write!(f, "the sweep needs at least one train count"),
        }
    }
}

impl std::error::Error for GenError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GroupKind {
    JunctionPair,
    RearEndPair,
    HeadOnPair,
    PlatformPair,
    /// Two independent background trains on spare tracks.
    SoloPair,
    /// Padding for odd counts.
    Solo,
}

impl GroupKind {
    const CYCLE: [GroupKind; 5] = [
        GroupKind::JunctionPair,
        GroupKind::RearEndPair,
        GroupKind::HeadOnPair,
        GroupKind::PlatformPair,
        GroupKind::SoloPair,
    ];

    fn trains(self) -> usize {
        match self {
            GroupKind::Solo => 1,
            _ => 2,
        }
    }
}

/// Deterministic group plan: an even count is an exact prefix of the fixed
/// group sequence, so the scenario for m trains is a subset of the one for
/// m + 2 under the same seed — message totals can only grow with the
/// count. Odd counts append one padding solo.
fn plan_groups(count: usize) -> Vec<GroupKind> {
    let mut plan = Vec::new();
    let mut remaining = count;
    let mut cursor = 0;
    while remaining >= 2 {
        let kind = GroupKind::CYCLE[cursor % GroupKind::CYCLE.len()];
        cursor += 1;
        plan.push(kind);
        remaining -= kind.trains();
    }
    if remaining == 1 {
        plan.push(GroupKind::Solo);
    }
    plan
}

/// A junction with two approach tracks (and their lengths).
struct JunctionSite {
    junction: VertexId,
    range: f64,
    approach_a: (TrackId, f64),
    approach_b: (TrackId, f64),
}

/// A station platform with its approach track.
struct PlatformSite {
    station: VertexId,
    platform: usize,
    track: TrackId,
    length: f64,
}

struct Sites {
    junctions: Vec<JunctionSite>,
    platforms: Vec<PlatformSite>,
    /// Long open tracks for pair placements.
    lines: Vec<(TrackId, f64)>,
    /// Any remaining tracks for solo trains.
    spares: Vec<(TrackId, f64)>,
}

/// Catalogues usable sites, claiming each track for at most one group.
fn catalogue(scenario: &Scenario) -> Sites {
    let net = &scenario.network;
    let mut taken: BTreeSet<TrackId> = BTreeSet::new();
    // tracks already used by scripted trains stay untouched
    for t in &scenario.trains {
        if let Some(track) = t.occupied_track(net) {
            taken.insert(track);
        }
        taken.extend(t.route.iter().copied());
    }

    let mut junctions = Vec::new();
    for j in net.junction_ids() {
        let free: Vec<(TrackId, f64)> = net
            .incident_tracks(j)
            .iter()
            .filter(|t| !taken.contains(t))
            .map(|&t| (t, net.track(t).length))
            .filter(|(_, len)| *len >= 1500.0)
            .collect();
        if free.len() >= 2 {
            taken.insert(free[0].0);
            taken.insert(free[1].0);
            junctions.push(JunctionSite {
                junction: j,
                range: net.vertex(j).comm_range,
                approach_a: free[0],
                approach_b: free[1],
            });
        }
    }

    let mut platforms = Vec::new();
    for s in net.station_ids() {
        for p in net.vertex(s).platforms() {
            if taken.contains(&p.track) {
                continue;
            }
            let len = net.track(p.track).length;
            if len >= 1500.0 {
                taken.insert(p.track);
                platforms.push(PlatformSite {
                    station: s,
                    platform: p.index,
                    track: p.track,
                    length: len,
                });
                break; // one platform site per station is plenty
            }
        }
    }

    let mut lines = Vec::new();
    let mut spares = Vec::new();
    for (i, t) in net.tracks().iter().enumerate() {
        let id = TrackId(i);
        if taken.contains(&id) {
            continue;
        }
        // keep pair sites away from junction endpoints so the only hazard
        // on the track is the one we place
        let touches_junction = net.vertex(t.ends.0).is_junction() || net.vertex(t.ends.1).is_junction();
        if !touches_junction && t.length >= 4000.0 {
            lines.push((id, t.length));
        } else {
            spares.push((id, t.length));
        }
    }

    Sites { junctions, platforms, lines, spares }
}

fn kmh_between(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..=hi) * KMH
}

fn pick_class(rng: &mut ChaCha8Rng) -> PriorityClass {
    match rng.gen_range(0..5) {
        0 => PriorityClass::Premium,
        1 => PriorityClass::SuperfastExpress,
        2 => PriorityClass::ExpressMail,
        3 => PriorityClass::Passenger,
        _ => PriorityClass::Freight,
    }
}

fn train(
    name: String,
    rng: &mut ChaCha8Rng,
    track: TrackId,
    position: f64,
    direction: Direction,
    speed: f64,
    range: f64,
) -> TrainState {
    TrainState {
        name,
        class: pick_class(rng),
        occupancy: Occupancy::OnTrack { track, position, direction },
        speed,
        length: 200.0,
        comm_range: range,
        route: Vec::new(),
        planned_next: None,
        activation_tick: 0,
        braking: false,
    }
}

/// Per-group random stream: placements of group k depend on (seed, k)
/// only, never on the total train count.
fn group_rng(seed: u64, group: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (group as u64).wrapping_mul(0xA24B_AED4_963E_E407),
    )
}

/// Seeds `count` generated trains onto the base scenario's network.
///
/// The returned scenario keeps the base configuration (mode aside) and any
/// scripted trains; generated trains are named `G1`, `G2`, ...
pub fn seed_trains(base: &Scenario, count: usize, seed: u64) -> Result<Scenario, GenError> {
    let kin = base.config.kin;
    let range = base.config.default_comm_range;
    let sites = catalogue(base);
    let plan = plan_groups(count);

    let need = |kind: GroupKind| plan.iter().filter(|g| **g == kind).count();
    if need(GroupKind::JunctionPair) > sites.junctions.len() {
        return Err(GenError::InsufficientCapacity {
            needed: need(GroupKind::JunctionPair),
            kind: "junction",
            available: sites.junctions.len(),
        });
    }
    if need(GroupKind::PlatformPair) > sites.platforms.len() {
        return Err(GenError::InsufficientCapacity {
            needed: need(GroupKind::PlatformPair),
            kind: "platform",
            available: sites.platforms.len(),
        });
    }
    let line_need = need(GroupKind::RearEndPair) + need(GroupKind::HeadOnPair);
    if line_need > sites.lines.len() {
        return Err(GenError::InsufficientCapacity {
            needed: line_need,
            kind: "open line",
            available: sites.lines.len(),
        });
    }
    let solo_need = 2 * need(GroupKind::SoloPair) + need(GroupKind::Solo);
    if solo_need > sites.spares.len() + (sites.lines.len() - line_need) {
        return Err(GenError::InsufficientCapacity {
            needed: solo_need,
            kind: "spare track",
            available: sites.spares.len() + (sites.lines.len() - line_need),
        });
    }

    let mut out = base.clone();
    let mut junctions = sites.junctions.into_iter();
    let mut platforms = sites.platforms.into_iter();
    // pair groups take lines from the front; solos take dedicated spares
    // first and then lines from the back, so a group's track never depends
    // on how many other groups exist
    let mut lines: std::collections::VecDeque<(TrackId, f64)> = sites.lines.into();
    let mut spares = sites.spares.into_iter();
    let mut serial = 0usize;
    let mut next_name = move || {
        serial += 1;
        format!("G{serial}")
    };

    for (group_index, group) in plan.into_iter().enumerate() {
        let mut rng = group_rng(seed, group_index);
        match group {
            GroupKind::JunctionPair => {
                let site = junctions.next().expect("capacity checked");
                let net = &out.network;
                for (track, track_len) in [site.approach_a, site.approach_b] {
                    // approach distance leaves stopping room inside the
                    // junction's detection radius
                    let speed = kmh_between(&mut rng, 40.0, 220.0);
                    let brake = braking_distance(speed, &kin).unwrap();
                    let d_max = (site.range * 0.95).min(track_len - 250.0);
                    let d_min = (brake + PLACEMENT_MARGIN).min(d_max - 1.0);
                    let d = rng.gen_range(d_min..=d_max);
                    // place the tip d meters from the junction end
                    let ends = net.track(track).ends;
                    let (position, direction) = if ends.1 == site.junction {
                        (track_len - d, Direction::Up)
                    } else {
                        (d, Direction::Down)
                    };
                    out.trains.push(train(
                        next_name(),
                        &mut rng,
                        track,
                        position,
                        direction,
                        speed,
                        range,
                    ));
                }
            }
            GroupKind::RearEndPair => {
                let (track, len) = lines.pop_front().expect("capacity checked");
                let leader_speed = kmh_between(&mut rng, 40.0, 70.0);
                let follower_speed = leader_speed + kmh_between(&mut rng, 10.0, 20.0);
                let gap = rng.gen_range(230.0..=380.0);
                let follower_tip = rng.gen_range(210.0..=(len - gap - 600.0));
                let leader_tip = follower_tip + gap + 200.0; // gap is body-to-body
                out.trains.push(train(
                    next_name(),
                    &mut rng,
                    track,
                    follower_tip,
                    Direction::Up,
                    follower_speed,
                    range,
                ));
                out.trains.push(train(
                    next_name(),
                    &mut rng,
                    track,
                    leader_tip,
                    Direction::Up,
                    leader_speed,
                    range,
                ));
            }
            GroupKind::HeadOnPair => {
                let (track, len) = lines.pop_front().expect("capacity checked");
                let va = kmh_between(&mut rng, 40.0, 55.0);
                let vb = kmh_between(&mut rng, 40.0, 55.0);
                let gap = rng.gen_range(250.0..=400.0);
                let a_tip = rng.gen_range(210.0..=(len - gap - 500.0));
                out.trains.push(train(next_name(), &mut rng, track, a_tip, Direction::Up, va, range));
                // opposing train: tip at a_tip + gap, body beyond
                out.trains.push(train(
                    next_name(),
                    &mut rng,
                    track,
                    a_tip + gap,
                    Direction::Down,
                    vb,
                    range,
                ));
            }
            GroupKind::PlatformPair => {
                let site = platforms.next().expect("capacity checked");
                let mut standing = TrainState::new(
                    next_name(),
                    Occupancy::AtPlatform { station: site.station, platform: site.platform },
                    0.0,
                );
                standing.class = pick_class(&mut rng);
                standing.comm_range = range;
                out.trains.push(standing);
                let speed = kmh_between(&mut rng, 40.0, 220.0);
                let brake = braking_distance(speed, &kin).unwrap();
                // distance from the standing body with stopping room
                let d_max = site.length - 450.0;
                let d_min = (brake + 2.0 * PLACEMENT_MARGIN).min(d_max - 1.0);
                let d = rng.gen_range(d_min..=d_max);
                let net = &out.network;
                let ends = net.track(site.track).ends;
                // standing body occupies the station end; the incoming tip
                // sits d meters before it, heading in
                let (position, direction) = if ends.1 == site.station {
                    ((site.length - 200.0) - d, Direction::Up)
                } else {
                    (200.0 + d, Direction::Down)
                };
                out.trains.push(train(
                    next_name(),
                    &mut rng,
                    site.track,
                    position,
                    direction,
                    speed,
                    range,
                ));
            }
            GroupKind::SoloPair => {
                for _ in 0..2 {
                    let (track, len) = spares.next().or_else(|| lines.pop_back()).expect("capacity checked");
                    let speed = kmh_between(&mut rng, 40.0, 220.0);
                    let tip = rng.gen_range((len * 0.2).max(200.0)..=(len * 0.8));
                    out.trains.push(train(
                        next_name(),
                        &mut rng,
                        track,
                        tip,
                        Direction::Up,
                        speed,
                        range,
                    ));
                }
            }
            GroupKind::Solo => {
                let (track, len) = spares.next().or_else(|| lines.pop_back()).expect("capacity checked");
                let speed = kmh_between(&mut rng, 40.0, 220.0);
                let tip = rng.gen_range((len * 0.2).max(200.0)..=(len * 0.8));
                out.trains.push(train(next_name(), &mut rng, track, tip, Direction::Up, speed, range));
            }
        }
    }

    out.name = format!("{}+g{}s{}", base.name, count, seed);
    out.config.seed = seed;
    debug_assert!(out.validate().is_ok(), "generated scenario must validate");
    Ok(out)
}
