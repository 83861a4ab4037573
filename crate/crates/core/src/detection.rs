//! Collision-detection predicates and the per-tick incident scan.
//!
//! Four predicates cover the hazard taxonomy: opposite-direction pairs on a
//! shared track, simultaneous junction approaches, faster followers on a
//! shared track, and inbound trains targeting an occupied platform. Each
//! predicate is the literal conjunction of its kinematic conditions;
//! non-applicable geometry yields no incident rather than an error.

use alloc::vec::Vec;

use crate::kinematics::distance_to_junction;
use crate::net::{train_separation, Occupancy, RailNetwork, TrackId, TrainId, TrainState, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IncidentKind {
    HeadOnTrack,
    HeadOnJunction,
    RearEndTrack,
    RearEndPlatform,
}

impl IncidentKind {
    /// Head-on kinds outrank rear-end kinds; lower ranks are handled first.
    pub fn severity_rank(self) -> u8 {
        match self {
            IncidentKind::HeadOnTrack | IncidentKind::HeadOnJunction => 0,
            IncidentKind::RearEndTrack | IncidentKind::RearEndPlatform => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            IncidentKind::HeadOnTrack => "HeadOnTrack",
            IncidentKind::HeadOnJunction => "HeadOnJunction",
            IncidentKind::RearEndTrack => "RearEndTrack",
            IncidentKind::RearEndPlatform => "RearEndPlatform",
        }
    }
}

/// A detected threat between two trains.
///
/// Participant order encodes roles: `(follower, leader)` for rear-end on
/// track, `(incoming, standing)` at platforms, ascending train index for
/// head-on kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionIncident {
    pub kind: IncidentKind,
    pub trains: (TrainId, TrainId),
    /// The junction or station involved, when applicable.
    pub vertex: Option<VertexId>,
    pub gap: f64,
    /// Closing-speed estimate; 0 means immediate, `INFINITY` a receding pair.
    pub time_to_collision: f64,
    pub severity_rank: u8,
}

impl CollisionIncident {
    fn new(
        kind: IncidentKind,
        trains: (TrainId, TrainId),
        vertex: Option<VertexId>,
        gap: f64,
        closing_speed: f64,
    ) -> Self {
        let time_to_collision = if gap <= 0.0 {
            0.0
        } else if closing_speed > 1e-12 {
            gap / closing_speed
        } else {
            f64::INFINITY
        };
        CollisionIncident {
            kind,
            trains,
            vertex,
            gap,
            time_to_collision,
            severity_rank: kind.severity_rank(),
        }
    }

    pub fn is_immediate(&self) -> bool {
        self.time_to_collision == 0.0
    }

    /// Unordered participant pair, for suppression and deduplication.
    pub fn pair_key(&self) -> (TrainId, TrainId) {
        let (a, b) = self.trains;
        if a <= b { (a, b) } else { (b, a) }
    }
}

fn on_track(train: &TrainState) -> Option<(TrackId, f64, crate::net::Direction)> {
    match &train.occupancy {
        Occupancy::OnTrack { track, position, direction } => Some((*track, *position, *direction)),
        Occupancy::AtPlatform { .. } => None,
    }
}

/// True when the pair is geometrically closing on their shared track: the
/// tips face each other for opposing trains.
fn facing(a_pos: f64, a_dir: crate::net::Direction, b_pos: f64, b_dir: crate::net::Direction) -> bool {
    use crate::net::Direction::*;
    if a_pos <= b_pos {
        a_dir == Up && b_dir == Down
    } else {
        a_dir == Down && b_dir == Up
    }
}

/// Case: two trains in opposite directions on the same track.
///
/// Fires iff all four conditions hold: shared track, direction XOR, at
/// least one positive speed, and current gap below the configured headway.
pub fn detect_head_on_track(
    a_id: TrainId,
    a: &TrainState,
    b_id: TrainId,
    b: &TrainState,
    net: &RailNetwork,
    headway: f64,
) -> Option<CollisionIncident> {
    let (ta, pa, da) = on_track(a)?;
    let (tb, pb, db) = on_track(b)?;
    if ta != tb || !da.opposes(db) {
        return None;
    }
    if !(a.speed > 0.0 || b.speed > 0.0) {
        return None;
    }
    let gap = train_separation(net, a, b);
    if !(gap < headway) {
        return None;
    }
    let closing = if facing(pa, da, pb, db) { a.speed + b.speed } else { 0.0 };
    let trains = if a_id <= b_id { (a_id, b_id) } else { (b_id, a_id) };
    Some(CollisionIncident::new(IncidentKind::HeadOnTrack, trains, None, gap, closing))
}

/// Case: a faster train following another on the same track.
///
/// Fires iff the pair shares track and direction (XNOR), the follower is
/// strictly faster than a strictly moving leader, and the gap is below the
/// headway. Returns the pair as `(follower, leader)`.
pub fn detect_rear_end_track(
    a_id: TrainId,
    a: &TrainState,
    b_id: TrainId,
    b: &TrainState,
    net: &RailNetwork,
    headway: f64,
) -> Option<CollisionIncident> {
    let (ta, pa, da) = on_track(a)?;
    let (tb, pb, db) = on_track(b)?;
    if ta != tb || da.opposes(db) {
        return None;
    }
    // shared direction: the train ahead along the travel direction leads
    let (front, rear) = match (da, pa >= pb) {
        (crate::net::Direction::Up, true) | (crate::net::Direction::Down, false) => {
            ((a_id, a), (b_id, b))
        }
        _ => ((b_id, b), (a_id, a)),
    };
    if pa == pb {
        return None;
    }
    let (leader_id, leader) = front;
    let (follower_id, follower) = rear;
    if !(follower.speed > leader.speed && leader.speed > 0.0) {
        return None;
    }
    let gap = train_separation(net, leader, follower);
    if !(gap < headway) {
        return None;
    }
    Some(CollisionIncident::new(
        IncidentKind::RearEndTrack,
        (follower_id, leader_id),
        None,
        gap,
        follower.speed - leader.speed,
    ))
}

/// Case: more than one train approaching the same junction inside its
/// communication range, on distinct tracks, both moving.
///
/// Emits one incident per conflicting pair; a single approach is never a
/// conflict. When both trains declare planned outbound tracks and the two
/// movements share no edge, the crossover paths are treated as parallel and
/// no incident is raised.
pub fn detect_head_on_junction(
    junction: VertexId,
    approaching: &[TrainId],
    trains: &[TrainState],
    net: &RailNetwork,
) -> Vec<CollisionIncident> {
    let mut out = Vec::new();
    if approaching.len() < 2 {
        return out;
    }
    let r = net.vertex(junction).comm_range;
    for (i, &a_id) in approaching.iter().enumerate() {
        for &b_id in &approaching[i + 1..] {
            let (a, b) = (&trains[a_id.0], &trains[b_id.0]);
            let (Some((ta, _, _)), Some((tb, _, _))) = (on_track(a), on_track(b)) else {
                continue;
            };
            if ta == tb {
                continue; // same-track pairs belong to the track predicates
            }
            if !(a.speed > 0.0 && b.speed > 0.0) {
                continue;
            }
            let (Some(da), Some(db)) = (heads_to(a, junction, net), heads_to(b, junction, net))
            else {
                continue;
            };
            if !(da <= r && db <= r) {
                continue;
            }
            if movements_clear(a, ta, b, tb) {
                continue;
            }
            let pair = if a_id <= b_id { (a_id, b_id) } else { (b_id, a_id) };
            out.push(CollisionIncident::new(
                IncidentKind::HeadOnJunction,
                pair,
                Some(junction),
                da + db,
                a.speed + b.speed,
            ));
        }
    }
    out
}

/// Tip distance to the junction when the train's current heading endpoint is
/// that junction.
fn heads_to(train: &TrainState, junction: VertexId, net: &RailNetwork) -> Option<f64> {
    let (_, toward) = train.heading(net)?;
    if toward != junction {
        return None;
    }
    distance_to_junction(train, junction, net).ok()
}

/// Planned crossover movements are non-conflicting only when both outbound
/// tracks are declared and the two movements share no edge.
fn movements_clear(a: &TrainState, ta: TrackId, b: &TrainState, tb: TrackId) -> bool {
    match (a.planned_outbound(), b.planned_outbound()) {
        (Some(oa), Some(ob)) => {
            let am = [ta, oa];
            let bm = [tb, ob];
            am.iter().all(|t| !bm.contains(t))
        }
        _ => false,
    }
}

/// Case: a train standing at a platform while another train approaches the
/// station on the platform's track with positive speed.
pub fn detect_rear_end_platform(
    station: VertexId,
    standing_id: TrainId,
    incoming_id: TrainId,
    trains: &[TrainState],
    net: &RailNetwork,
) -> Option<CollisionIncident> {
    let standing = &trains[standing_id.0];
    let incoming = &trains[incoming_id.0];
    let Occupancy::AtPlatform { station: occupied, .. } = standing.occupancy else {
        return None;
    };
    if occupied != station || standing.speed != 0.0 {
        return None;
    }
    let platform_track = standing.occupied_track(net)?;
    let (incoming_track, _, _) = on_track(incoming)?;
    if incoming_track != platform_track || !(incoming.speed > 0.0) {
        return None;
    }
    // approaching: heading endpoint is this station
    let (_, toward) = incoming.heading(net)?;
    if toward != station {
        return None;
    }
    let gap = train_separation(net, standing, incoming);
    Some(CollisionIncident::new(
        IncidentKind::RearEndPlatform,
        (incoming_id, standing_id),
        Some(station),
        gap,
        incoming.speed,
    ))
}

/// Which agent families contribute to a scan. Disabling junction and
/// platform agents leaves the train-pairs-only view used as a baseline
/// for detection-completeness comparisons.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub junction_agents: bool,
    pub platform_agents: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { junction_agents: true, platform_agents: true }
    }
}

/// Evaluates every predicate over all applicable pairs and vertices.
///
/// The result is deduplicated per unordered participant pair and sorted by
/// descending fatality: head-on kinds first, then smaller time-to-collision,
/// then participant indices. The ordering is total, so output is
/// independent of evaluation schedule.
pub fn scan_all(
    net: &RailNetwork,
    trains: &[TrainState],
    headway: f64,
) -> Vec<CollisionIncident> {
    scan_with_options(net, trains, headway, &ScanOptions::default())
}

pub fn scan_with_options(
    net: &RailNetwork,
    trains: &[TrainState],
    headway: f64,
    opts: &ScanOptions,
) -> Vec<CollisionIncident> {
    let mut found = Vec::new();

    for i in 0..trains.len() {
        for j in (i + 1)..trains.len() {
            let (a, b) = (&trains[i], &trains[j]);
            if let Some(inc) =
                detect_head_on_track(TrainId(i), a, TrainId(j), b, net, headway)
            {
                found.push(inc);
            }
            if let Some(inc) =
                detect_rear_end_track(TrainId(i), a, TrainId(j), b, net, headway)
            {
                found.push(inc);
            }
        }
    }

    if opts.junction_agents {
        for junction in net.junction_ids() {
            let r = net.vertex(junction).comm_range;
            let approaching: Vec<TrainId> = (0..trains.len())
                .map(TrainId)
                .filter(|id| {
                    trains[id.0].speed > 0.0
                        && heads_to(&trains[id.0], junction, net).is_some_and(|d| d <= r)
                })
                .collect();
            found.extend(detect_head_on_junction(junction, &approaching, trains, net));
        }
    }

    if opts.platform_agents {
        for (i, standing) in trains.iter().enumerate() {
            let Occupancy::AtPlatform { station, .. } = standing.occupancy else {
                continue;
            };
            for j in 0..trains.len() {
                if i == j {
                    continue;
                }
                if let Some(inc) =
                    detect_rear_end_platform(station, TrainId(i), TrainId(j), trains, net)
                {
                    found.push(inc);
                }
            }
        }
    }

    sort_incidents(&mut found);
    found.dedup_by(|a, b| a.pair_key() == b.pair_key());
    found
}

/// Total severity order: rank, then time-to-collision, then participants.
pub fn sort_incidents(incidents: &mut [CollisionIncident]) {
    incidents.sort_by(|a, b| {
        a.severity_rank
            .cmp(&b.severity_rank)
            .then(a.time_to_collision.total_cmp(&b.time_to_collision))
            .then(a.pair_key().cmp(&b.pair_key()))
    });
}
