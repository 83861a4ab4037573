//! Railway network model: a multigraph of stations and junctions joined by
//! tracks, plus per-train occupancy snapshots.
//!
//! Positions are 1-D offsets along a track measured from the track's first
//! endpoint. A train is summarized by the offset of its tip (leading end in
//! its travel direction); the body extends behind the tip opposite to travel.
//! Distances between agents on different tracks are shortest paths through
//! shared vertices — trains only ever meet along rails, so Euclidean
//! distance is meaningless here.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coordination::{AgentId, PriorityClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrackId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TrainId(pub usize);

/// Travel direction along a track: `Up` runs toward the track's second
/// endpoint (increasing offset), `Down` toward the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn bit(self) -> u8 {
        match self {
            Direction::Up => 1,
            Direction::Down => 0,
        }
    }

    /// XOR of direction bits: true for an opposite-direction pair.
    pub fn opposes(self, other: Direction) -> bool {
        self != other
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Platform {
    pub index: usize,
    pub track: TrackId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VertexKind {
    Station { platforms: Vec<Platform> },
    Junction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub name: String,
    pub comm_range: f64,
    pub kind: VertexKind,
}

impl Vertex {
    pub fn is_station(&self) -> bool {
        matches!(self.kind, VertexKind::Station { .. })
    }

    pub fn is_junction(&self) -> bool {
        matches!(self.kind, VertexKind::Junction)
    }

    pub fn platforms(&self) -> &[Platform] {
        match &self.kind {
            VertexKind::Station { platforms } => platforms,
            VertexKind::Junction => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub name: String,
    pub ends: (VertexId, VertexId),
    pub length: f64,
}

/// Input description of a vertex, with platform-to-track bindings by name.
#[derive(Debug, Clone)]
pub struct VertexDef {
    pub name: String,
    pub comm_range: f64,
    pub kind: VertexDefKind,
}

#[derive(Debug, Clone)]
pub enum VertexDefKind {
    Station { platforms: Vec<(usize, String)> },
    Junction,
}

#[derive(Debug, Clone)]
pub struct TrackDef {
    pub name: String,
    pub from: String,
    pub to: String,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkError {
    DuplicateId(String),
    DanglingEndpoint { track: String, vertex: String },
    NonPositiveLength(String),
    SelfLoop(String),
    NonPositiveRange(String),
    IsolatedJunction(String),
    UnknownPlatformTrack { station: String, track: String },
    PlatformNotIncident { station: String, track: String },
    DuplicatePlatform { station: String, index: usize },
    UnknownAgent(String),
}

impl fmt::Display for NetworkError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetworkError::DuplicateId(id) => write!(f, "duplicate id `{id}`"),
            NetworkError::DanglingEndpoint { track, vertex } => {
                write!(f, "track `{track}` references unknown vertex `{vertex}`")
            }
            NetworkError::NonPositiveLength(track) => {
                write!(f, "track `{track}` has non-positive length")
            }
            NetworkError::SelfLoop(track) => write!(f, "track `{track}` is a self-loop"),
            NetworkError::NonPositiveRange(name) => {
                write!(f, "`{name}` has non-positive communication range")
            }
            NetworkError::IsolatedJunction(name) => {
                write!(f, "junction `{name}` has fewer than 2 incident tracks")
            }
            NetworkError::UnknownPlatformTrack { station, track } => {
                write!(f, "platform of `{station}` references unknown track `{track}`")
            }
            NetworkError::PlatformNotIncident { station, track } => {
                write!(f, "platform track `{track}` does not touch station `{station}`")
            }
            NetworkError::DuplicatePlatform { station, index } => {
                write!(f, "station `{station}` declares platform {index} twice")
            }
            NetworkError::UnknownAgent(name) => write!(f, "unknown agent `{name}`"),
        }
    }
}

impl core::error::Error for NetworkError {}

/// Validated railway network `RN = <G, Ag>`: the multigraph part.
///
/// Immutable after construction; safe for concurrent reads. All-pairs
/// vertex distances are precomputed so along-track separations are O(1).
#[derive(Debug, Clone)]
pub struct RailNetwork {
    vertices: Vec<Vertex>,
    tracks: Vec<Track>,
    adjacency: Vec<Vec<TrackId>>,
    vertex_dist: Vec<f64>,
}

impl RailNetwork {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id.0]
    }

    pub fn track(&self, id: TrackId) -> &Track {
        &self.tracks[id.0]
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn station_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.is_station()).count()
    }

    pub fn junction_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.is_junction()).count()
    }

    pub fn find_vertex(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v.name == name).map(VertexId)
    }

    pub fn find_track(&self, name: &str) -> Option<TrackId> {
        self.tracks.iter().position(|t| t.name == name).map(TrackId)
    }

    pub fn incident_tracks(&self, v: VertexId) -> &[TrackId] {
        &self.adjacency[v.0]
    }

    pub fn junction_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_junction())
            .map(|(i, _)| VertexId(i))
    }

    pub fn station_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_station())
            .map(|(i, _)| VertexId(i))
    }

    /// Shortest along-track distance between two vertices, `INFINITY` when
    /// disconnected.
    pub fn vertex_distance(&self, a: VertexId, b: VertexId) -> f64 {
        self.vertex_dist[a.0 * self.vertices.len() + b.0]
    }
}

/// Builds and validates a network from name-based definitions.
///
/// Parallel edges between the same vertex pair are permitted (multigraph);
/// self-loops are rejected.
pub fn build_network(
    vertices: Vec<VertexDef>,
    tracks: Vec<TrackDef>,
) -> Result<RailNetwork, NetworkError> {
    let mut names: BTreeMap<String, VertexId> = BTreeMap::new();
    for (i, v) in vertices.iter().enumerate() {
        if names.insert(v.name.clone(), VertexId(i)).is_some() {
            return Err(NetworkError::DuplicateId(v.name.clone()));
        }
        if v.comm_range <= 0.0 {
            return Err(NetworkError::NonPositiveRange(v.name.clone()));
        }
    }

    let mut built_tracks = Vec::with_capacity(tracks.len());
    let mut track_names: BTreeMap<String, TrackId> = BTreeMap::new();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for (i, t) in tracks.iter().enumerate() {
        if track_names.insert(t.name.clone(), TrackId(i)).is_some() {
            return Err(NetworkError::DuplicateId(t.name.clone()));
        }
        let from = *names.get(&t.from).ok_or_else(|| NetworkError::DanglingEndpoint {
            track: t.name.clone(),
            vertex: t.from.clone(),
        })?;
        let to = *names.get(&t.to).ok_or_else(|| NetworkError::DanglingEndpoint {
            track: t.name.clone(),
            vertex: t.to.clone(),
        })?;
        if from == to {
            return Err(NetworkError::SelfLoop(t.name.clone()));
        }
        if !(t.length > 0.0) {
            return Err(NetworkError::NonPositiveLength(t.name.clone()));
        }
        adjacency[from.0].push(TrackId(i));
        adjacency[to.0].push(TrackId(i));
        built_tracks.push(Track {
            name: t.name.clone(),
            ends: (from, to),
            length: t.length,
        });
    }

    let mut built_vertices = Vec::with_capacity(vertices.len());
    for (i, v) in vertices.iter().enumerate() {
        let kind = match &v.kind {
            VertexDefKind::Junction => {
                if adjacency[i].len() < 2 {
                    return Err(NetworkError::IsolatedJunction(v.name.clone()));
                }
                VertexKind::Junction
            }
            VertexDefKind::Station { platforms } => {
                let mut built = Vec::with_capacity(platforms.len());
                for (index, track_name) in platforms {
                    if built.iter().any(|p: &Platform| p.index == *index) {
                        return Err(NetworkError::DuplicatePlatform {
                            station: v.name.clone(),
                            index: *index,
                        });
                    }
                    let track = *track_names.get(track_name).ok_or_else(|| {
                        NetworkError::UnknownPlatformTrack {
                            station: v.name.clone(),
                            track: track_name.clone(),
                        }
                    })?;
                    if !adjacency[i].contains(&track) {
                        return Err(NetworkError::PlatformNotIncident {
                            station: v.name.clone(),
                            track: track_name.clone(),
                        });
                    }
                    built.push(Platform { index: *index, track });
                }
                VertexKind::Station { platforms: built }
            }
        };
        built_vertices.push(Vertex {
            name: v.name.clone(),
            comm_range: v.comm_range,
            kind,
        });
    }

    let vertex_dist = all_pairs_distances(&built_vertices, &built_tracks);
    Ok(RailNetwork {
        vertices: built_vertices,
        tracks: built_tracks,
        adjacency,
        vertex_dist,
    })
}

fn all_pairs_distances(vertices: &[Vertex], tracks: &[Track]) -> Vec<f64> {
    let n = vertices.len();
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for t in tracks {
        let (a, b) = (t.ends.0 .0, t.ends.1 .0);
        // multigraph: keep the shortest parallel edge
        if t.length < d[a * n + b] {
            d[a * n + b] = t.length;
            d[b * n + a] = t.length;
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik.is_infinite() {
                continue;
            }
            for j in 0..n {
                let through = dik + d[k * n + j];
                if through < d[i * n + j] {
                    d[i * n + j] = through;
                }
            }
        }
    }
    d
}

/// Where a train currently is: running on a track, or berthed at a station
/// platform (which implies occupying that platform's track at the station
/// end, with zero speed).
#[derive(Debug, Clone, PartialEq)]
pub enum Occupancy {
    OnTrack {
        track: TrackId,
        /// Offset of the train tip (leading end in travel direction).
        position: f64,
        direction: Direction,
    },
    AtPlatform { station: VertexId, platform: usize },
}

/// Per-train kinematic and occupancy snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub name: String,
    pub class: PriorityClass,
    pub occupancy: Occupancy,
    /// m/s, never negative.
    pub speed: f64,
    /// m, tip-to-tail.
    pub length: f64,
    /// m, communication device radius.
    pub comm_range: f64,
    /// Remaining planned edges after the current track, front of the list next.
    pub route: Vec<TrackId>,
    /// Planned outbound track through the next junction when no full route
    /// is given; junction conflicts are assumed when absent.
    pub planned_next: Option<TrackId>,
    /// Tick at which the train enters the world.
    pub activation_tick: u64,
    /// Runtime flag: full brake applied, decelerating at mu_k * g.
    pub braking: bool,
}

impl TrainState {
    pub fn new(name: impl Into<String>, occupancy: Occupancy, speed: f64) -> Self {
        TrainState {
            name: name.into(),
            class: PriorityClass::Passenger,
            occupancy,
            speed,
            length: 200.0,
            comm_range: 200.0,
            route: Vec::new(),
            planned_next: None,
            activation_tick: 0,
            braking: false,
        }
    }

    pub fn is_at_platform(&self) -> bool {
        matches!(self.occupancy, Occupancy::AtPlatform { .. })
    }

    /// Track currently occupied, resolving platform occupancy to the
    /// platform's track.
    pub fn occupied_track(&self, net: &RailNetwork) -> Option<TrackId> {
        match &self.occupancy {
            Occupancy::OnTrack { track, .. } => Some(*track),
            Occupancy::AtPlatform { station, platform } => net
                .vertex(*station)
                .platforms()
                .iter()
                .find(|p| p.index == *platform)
                .map(|p| p.track),
        }
    }

    /// Body extent `(low, high)` in track offsets, clipped to the track.
    pub fn body(&self, net: &RailNetwork) -> Option<(TrackId, f64, f64)> {
        match &self.occupancy {
            Occupancy::OnTrack { track, position, direction } => {
                let len = net.track(*track).length;
                let (lo, hi) = match direction {
                    Direction::Up => (position - self.length, *position),
                    Direction::Down => (*position, position + self.length),
                };
                Some((*track, lo.max(0.0), hi.min(len)))
            }
            Occupancy::AtPlatform { station, .. } => {
                let track = self.occupied_track(net)?;
                let t = net.track(track);
                if t.ends.0 == *station {
                    Some((track, 0.0, self.length.min(t.length)))
                } else {
                    Some((track, (t.length - self.length).max(0.0), t.length))
                }
            }
        }
    }

    /// Tip offset and the vertex the train is heading toward; `None` when
    /// berthed.
    pub fn heading(&self, net: &RailNetwork) -> Option<(f64, VertexId)> {
        match &self.occupancy {
            Occupancy::OnTrack { track, position, direction } => {
                let t = net.track(*track);
                match direction {
                    Direction::Up => Some((*position, t.ends.1)),
                    Direction::Down => Some((*position, t.ends.0)),
                }
            }
            Occupancy::AtPlatform { .. } => None,
        }
    }

    /// Next planned edge, from the explicit route or the declared outbound
    /// track.
    pub fn planned_outbound(&self) -> Option<TrackId> {
        self.route.first().copied().or(self.planned_next)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OccupancyError {
    UnknownTrack { train: String },
    UnknownPlatform { train: String },
    PositionOutOfRange { train: String },
    PlatformConflict { a: String, b: String },
    OverlapConflict { a: String, b: String },
    NegativeSpeed { train: String },
    MovingAtPlatform { train: String },
}

impl fmt::Display for OccupancyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OccupancyError::UnknownTrack { train } => {
                write!(f, "train `{train}` references an unknown track")
            }
            OccupancyError::UnknownPlatform { train } => {
                write!(f, "train `{train}` references an unknown platform")
            }
            OccupancyError::PositionOutOfRange { train } => {
                write!(f, "train `{train}` position outside its track")
            }
            OccupancyError::PlatformConflict { a, b } => {
                write!(f, "trains `{a}` and `{b}` claim the same platform slot")
            }
            OccupancyError::OverlapConflict { a, b } => {
                write!(f, "trains `{a}` and `{b}` physically overlap")
            }
            OccupancyError::NegativeSpeed { train } => {
                write!(f, "train `{train}` has negative speed")
            }
            OccupancyError::MovingAtPlatform { train } => {
                write!(f, "train `{train}` is standing at a platform with nonzero speed")
            }
        }
    }
}

impl core::error::Error for OccupancyError {}

/// Checks platform-slot exclusivity and physical body overlap.
///
/// Two trains on the same track at different positions are a detectable
/// hazard, not a model error; only actual extent intersection is rejected
/// here (it represents an already-occurred collision).
pub fn validate_occupancy(net: &RailNetwork, trains: &[TrainState]) -> Result<(), OccupancyError> {
    let mut slots: BTreeMap<(VertexId, usize), usize> = BTreeMap::new();
    for (i, train) in trains.iter().enumerate() {
        if train.speed < 0.0 {
            return Err(OccupancyError::NegativeSpeed { train: train.name.clone() });
        }
        match &train.occupancy {
            Occupancy::OnTrack { track, position, .. } => {
                if track.0 >= net.tracks().len() {
                    return Err(OccupancyError::UnknownTrack { train: train.name.clone() });
                }
                let len = net.track(*track).length;
                if *position < 0.0 || *position > len {
                    return Err(OccupancyError::PositionOutOfRange { train: train.name.clone() });
                }
            }
            Occupancy::AtPlatform { station, platform } => {
                if station.0 >= net.vertex_count()
                    || !net
                        .vertex(*station)
                        .platforms()
                        .iter()
                        .any(|p| p.index == *platform)
                {
                    return Err(OccupancyError::UnknownPlatform { train: train.name.clone() });
                }
                if train.speed != 0.0 {
                    return Err(OccupancyError::MovingAtPlatform { train: train.name.clone() });
                }
                if let Some(prev) = slots.insert((*station, *platform), i) {
                    return Err(OccupancyError::PlatformConflict {
                        a: trains[prev].name.clone(),
                        b: train.name.clone(),
                    });
                }
            }
        }
    }
    for i in 0..trains.len() {
        for j in (i + 1)..trains.len() {
            let (ta, la, ha) = trains[i].body(net).expect("validated above");
            let (tb, lb, hb) = trains[j].body(net).expect("validated above");
            if ta == tb && la < hb && lb < ha {
                return Err(OccupancyError::OverlapConflict {
                    a: trains[i].name.clone(),
                    b: trains[j].name.clone(),
                });
            }
        }
    }
    Ok(())
}

/// Shortest along-track distance between two train bodies. Overlap reports
/// 0; disconnected tracks report `INFINITY`.
pub fn train_separation(net: &RailNetwork, a: &TrainState, b: &TrainState) -> f64 {
    let (ta, la, ha) = match a.body(net) {
        Some(v) => v,
        None => return f64::INFINITY,
    };
    let (tb, lb, hb) = match b.body(net) {
        Some(v) => v,
        None => return f64::INFINITY,
    };
    if ta == tb {
        return if la < hb && lb < ha {
            0.0
        } else if ha <= lb {
            lb - ha
        } else {
            la - hb
        };
    }
    interval_to_interval(net, ta, (la, ha), tb, (lb, hb))
}

/// Shortest along-track distance from a train body to a vertex.
pub fn train_vertex_separation(net: &RailNetwork, train: &TrainState, v: VertexId) -> f64 {
    match train.body(net) {
        Some((track, lo, hi)) => interval_to_vertex(net, track, (lo, hi), v),
        None => f64::INFINITY,
    }
}

fn interval_to_vertex(net: &RailNetwork, track: TrackId, body: (f64, f64), v: VertexId) -> f64 {
    let t = net.track(track);
    let via_from = body.0 + net.vertex_distance(t.ends.0, v);
    let via_to = (t.length - body.1) + net.vertex_distance(t.ends.1, v);
    via_from.min(via_to)
}

fn interval_to_interval(
    net: &RailNetwork,
    ta: TrackId,
    a: (f64, f64),
    tb: TrackId,
    b: (f64, f64),
) -> f64 {
    let (ea, eb) = (net.track(ta), net.track(tb));
    let exits_a = [(ea.ends.0, a.0), (ea.ends.1, ea.length - a.1)];
    let exits_b = [(eb.ends.0, b.0), (eb.ends.1, eb.length - b.1)];
    let mut best = f64::INFINITY;
    for (va, ca) in exits_a {
        for (vb, cb) in exits_b {
            // fixed summation order keeps the result bit-identical when the
            // arguments swap
            let (lo, hi) = if ca <= cb { (ca, cb) } else { (cb, ca) };
            let d = (lo + net.vertex_distance(va, vb)) + hi;
            if d < best {
                best = d;
            }
        }
    }
    best
}

/// Along-track separation between two agents, trains resolved to their body
/// extents and station/junction agents to their vertex.
pub fn agent_separation(
    net: &RailNetwork,
    trains: &[TrainState],
    a: AgentId,
    b: AgentId,
) -> f64 {
    match (a, b) {
        (AgentId::Train(x), AgentId::Train(y)) => train_separation(net, &trains[x.0], &trains[y.0]),
        (AgentId::Train(x), other) => train_vertex_separation(net, &trains[x.0], other.vertex().unwrap()),
        (other, AgentId::Train(y)) => train_vertex_separation(net, &trains[y.0], other.vertex().unwrap()),
        (x, y) => net.vertex_distance(x.vertex().unwrap(), y.vertex().unwrap()),
    }
}

/// All agents whose along-track separation from `agent` is at most
/// `radius_sum`. Symmetric for equal radii and monotone in `radius_sum`.
pub fn neighbors_in_range(
    net: &RailNetwork,
    trains: &[TrainState],
    agent: AgentId,
    radius_sum: f64,
) -> Result<Vec<AgentId>, NetworkError> {
    let known = match agent {
        AgentId::Train(t) => t.0 < trains.len(),
        AgentId::Station(v) => v.0 < net.vertex_count() && net.vertex(v).is_station(),
        AgentId::Junction(v) => v.0 < net.vertex_count() && net.vertex(v).is_junction(),
    };
    if !known {
        return Err(NetworkError::UnknownAgent(agent.describe()));
    }
    let mut out = Vec::new();
    for (i, _) in trains.iter().enumerate() {
        let other = AgentId::Train(TrainId(i));
        if other != agent && agent_separation(net, trains, agent, other) <= radius_sum {
            out.push(other);
        }
    }
    for (i, v) in net.vertices().iter().enumerate() {
        let other = if v.is_station() {
            AgentId::Station(VertexId(i))
        } else {
            AgentId::Junction(VertexId(i))
        };
        if other != agent && agent_separation(net, trains, agent, other) <= radius_sum {
            out.push(other);
        }
    }
    Ok(out)
}
