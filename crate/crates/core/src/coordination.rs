//! Agent layer: builds factor graphs from incidents according to
//! communication reachability, runs resolution (max-sum for mutual
//! decisions, the priority rule at junctions), applies decisions, and
//! accounts messages for both the distributed and the centralized-baseline
//! modes.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::detection::{CollisionIncident, IncidentKind};
use crate::kinematics::{
    braking_distance, comm_reachable, distance_to_junction, safe_stop_check, KinematicConstants,
};
use crate::maxsum::{run_maxsum, Action, FactorGraph, MaxSumError, VarId};
use crate::net::{
    agent_separation, RailNetwork, TrainId, TrainState, VertexId,
};

/// Identity of an autonomous agent: every train, station, and junction is
/// one, giving q = n + m agents in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgentId {
    Train(TrainId),
    Station(VertexId),
    Junction(VertexId),
}

impl AgentId {
    pub fn vertex(self) -> Option<VertexId> {
        match self {
            AgentId::Station(v) | AgentId::Junction(v) => Some(v),
            AgentId::Train(_) => None,
        }
    }

    pub fn describe(self) -> String {
        match self {
            AgentId::Train(t) => format!("train#{}", t.0),
            AgentId::Station(v) => format!("station#{}", v.0),
            AgentId::Junction(v) => format!("junction#{}", v.0),
        }
    }
}

/// Train categories in descending priority. Premium outranks everything;
/// freight yields to all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PriorityClass {
    Premium,
    SuperfastExpress,
    ExpressMail,
    Passenger,
    Freight,
}

impl PriorityClass {
    /// 0 is the highest priority.
    pub fn rank(self) -> u8 {
        match self {
            PriorityClass::Premium => 0,
            PriorityClass::SuperfastExpress => 1,
            PriorityClass::ExpressMail => 2,
            PriorityClass::Passenger => 3,
            PriorityClass::Freight => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PriorityClass::Premium => "premium",
            PriorityClass::SuperfastExpress => "superfast",
            PriorityClass::ExpressMail => "expressmail",
            PriorityClass::Passenger => "passenger",
            PriorityClass::Freight => "freight",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResolutionMode {
    MaxSum,
    JunctionPriority,
    CentralizedRelay,
}

impl ResolutionMode {
    pub fn label(self) -> &'static str {
        match self {
            ResolutionMode::MaxSum => "maxsum",
            ResolutionMode::JunctionPriority => "junction-priority",
            ResolutionMode::CentralizedRelay => "centralized-relay",
        }
    }
}

/// Outcome of the post-solver safety verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SafetyOutcome {
    /// Solver decisions passed the check unchanged.
    Passed,
    /// Decisions were replaced by the deterministic both-stop fallback.
    Overridden,
    /// No assignment can satisfy the critical-distance inequality; a
    /// collision is recorded.
    Unavoidable,
}

impl SafetyOutcome {
    pub fn label(self) -> &'static str {
        match self {
            SafetyOutcome::Passed => "passed",
            SafetyOutcome::Overridden => "overridden",
            SafetyOutcome::Unavoidable => "unavoidable",
        }
    }
}

/// Actions decided for every train participating in an incident.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionSet {
    pub actions: Vec<(TrainId, Action)>,
    pub mode: ResolutionMode,
    pub messages_used: u64,
    pub safety: SafetyOutcome,
}

impl DecisionSet {
    pub fn action_of(&self, train: TrainId) -> Option<Action> {
        self.actions.iter().find(|(t, _)| *t == train).map(|(_, a)| *a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CoordinationError {
    /// Trains are mutually unreachable and no station or junction covers
    /// both; each train falls back to a unilateral stop.
    NoRelayInRange,
    /// Even an immediate stop by both trains violates the critical-distance
    /// inequality. Carries the messages spent discovering that.
    Infeasible { messages_used: u64 },
    UnknownTrain(String),
    Solver(MaxSumError),
}

impl fmt::Display for CoordinationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoordinationError::NoRelayInRange => {
                write!(f, "no relay agent covers both trains")
            }
            CoordinationError::Infeasible { .. } => {
                write!(f, "no assignment satisfies the critical-distance inequality")
            }
            CoordinationError::UnknownTrain(name) => write!(f, "unknown train `{name}`"),
            CoordinationError::Solver(e) => write!(f, "solver failure: {e}"),
        }
    }
}

impl core::error::Error for CoordinationError {}

impl From<MaxSumError> for CoordinationError {
    fn from(e: MaxSumError) -> Self {
        CoordinationError::Solver(e)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CoordinationConfig {
    pub kin: KinematicConstants,
    pub headway: f64,
    pub critical: f64,
    pub max_iters: usize,
    /// Damping applied when the incident graph is cyclic; trees run undamped.
    pub damping_cyclic: f64,
    /// Scales the +-1 preference vectors; the conflict indicator stays at 1.
    pub beta_scale: f64,
}

impl Default for CoordinationConfig {
    fn default() -> Self {
        CoordinationConfig {
            kin: KinematicConstants::default(),
            headway: 200.0,
            critical: 100.0,
            max_iters: 100,
            damping_cyclic: 0.5,
            beta_scale: 1.0,
        }
    }
}

/// A factor graph bound to the incident that produced it: which variables
/// map back to trains, and the relay agent when one participates.
#[derive(Debug, Clone)]
pub struct IncidentGraph {
    pub graph: FactorGraph,
    pub train_vars: Vec<(VarId, TrainId)>,
    pub relay: Option<AgentId>,
}

fn beta_for_train(train: &TrainState, scale: f64) -> [f64; 2] {
    if train.speed > 0.0 && !train.braking {
        [-scale, scale]
    } else {
        [scale, -scale]
    }
}

fn relay_beta(scale: f64) -> [f64; 2] {
    [scale, -scale]
}

/// Nearest station or junction whose communication range covers both
/// trains; the incident's own vertex wins when it qualifies.
fn find_relay(
    incident: &CollisionIncident,
    net: &RailNetwork,
    trains: &[TrainState],
) -> Option<AgentId> {
    let (a, b) = incident.trains;
    let covers = |v: VertexId| -> Option<f64> {
        let range = net.vertex(v).comm_range;
        let da = agent_separation(net, trains, agent_of(net, v), AgentId::Train(a));
        let db = agent_separation(net, trains, agent_of(net, v), AgentId::Train(b));
        let ta = &trains[a.0];
        let tb = &trains[b.0];
        if comm_reachable(da, range, ta.comm_range) && comm_reachable(db, range, tb.comm_range) {
            Some(da + db)
        } else {
            None
        }
    };
    if let Some(v) = incident.vertex {
        if covers(v).is_some() {
            return Some(agent_of(net, v));
        }
    }
    let mut best: Option<(f64, VertexId)> = None;
    for i in 0..net.vertex_count() {
        let v = VertexId(i);
        if let Some(score) = covers(v) {
            if best.is_none_or(|(s, _)| score < s) {
                best = Some((score, v));
            }
        }
    }
    best.map(|(_, v)| agent_of(net, v))
}

fn agent_of(net: &RailNetwork, v: VertexId) -> AgentId {
    if net.vertex(v).is_station() {
        AgentId::Station(v)
    } else {
        AgentId::Junction(v)
    }
}

/// Builds the three-agent (or two-factor) graph for an incident.
///
/// Head-on geometry with the trains out of each other's range couples them
/// only through the relay variable; in direct range they couple directly
/// and the relay (when present) observes both. Rear-end incidents build the
/// two-factor mutual graph: follower and leader on track, incoming train
/// and station at a platform.
pub fn build_incident_graph(
    incident: &CollisionIncident,
    net: &RailNetwork,
    trains: &[TrainState],
    cfg: &CoordinationConfig,
) -> Result<IncidentGraph, CoordinationError> {
    let (a_id, b_id) = incident.trains;
    let a = &trains[a_id.0];
    let b = &trains[b_id.0];
    let direct = comm_reachable(incident.gap, a.comm_range, b.comm_range);
    let scale = cfg.beta_scale;

    if incident.kind == IncidentKind::RearEndPlatform {
        // moving train negotiates with the station agent directly
        let station = incident.vertex.expect("platform incidents carry their station");
        let mut g = FactorGraph::new();
        let v1 = g.add_variable(a.name.clone());
        let v2 = g.add_variable(net.vertex(station).name.clone());
        g.add_factor(format!("U_{}", a.name), v1, &[v2], beta_for_train(a, scale))?;
        g.add_factor(format!("U_{}", net.vertex(station).name), v2, &[v1], relay_beta(scale))?;
        return Ok(IncidentGraph {
            graph: g,
            train_vars: vec![(v1, a_id)],
            relay: Some(AgentId::Station(station)),
        });
    }

    if incident.kind == IncidentKind::RearEndTrack && direct {
        let mut g = FactorGraph::new();
        let v1 = g.add_variable(a.name.clone());
        let v2 = g.add_variable(b.name.clone());
        g.add_factor(format!("U_{}", a.name), v1, &[v2], beta_for_train(a, scale))?;
        g.add_factor(format!("U_{}", b.name), v2, &[v1], beta_for_train(b, scale))?;
        return Ok(IncidentGraph {
            graph: g,
            train_vars: vec![(v1, a_id), (v2, b_id)],
            relay: None,
        });
    }

    let relay = find_relay(incident, net, trains);
    if !direct {
        // out of range: every exchange goes through the relay
        let relay = relay.ok_or(CoordinationError::NoRelayInRange)?;
        let relay_v = relay.vertex().expect("relay is a vertex agent");
        let mut g = FactorGraph::new();
        let v1 = g.add_variable(a.name.clone());
        let v2 = g.add_variable(net.vertex(relay_v).name.clone());
        let v3 = g.add_variable(b.name.clone());
        g.add_factor(format!("U_{}", a.name), v1, &[v2], beta_for_train(a, scale))?;
        g.add_factor(
            format!("U_{}", net.vertex(relay_v).name),
            v2,
            &[v1, v3],
            relay_beta(scale),
        )?;
        g.add_factor(format!("U_{}", b.name), v3, &[v2], beta_for_train(b, scale))?;
        return Ok(IncidentGraph {
            graph: g,
            train_vars: vec![(v1, a_id), (v3, b_id)],
            relay: Some(relay),
        });
    }

    match relay {
        Some(relay) => {
            let relay_v = relay.vertex().expect("relay is a vertex agent");
            let mut g = FactorGraph::new();
            let v1 = g.add_variable(a.name.clone());
            let v2 = g.add_variable(net.vertex(relay_v).name.clone());
            let v3 = g.add_variable(b.name.clone());
            g.add_factor(format!("U_{}", a.name), v1, &[v3], beta_for_train(a, scale))?;
            g.add_factor(
                format!("U_{}", net.vertex(relay_v).name),
                v2,
                &[v1, v3],
                relay_beta(scale),
            )?;
            g.add_factor(format!("U_{}", b.name), v3, &[v1], beta_for_train(b, scale))?;
            Ok(IncidentGraph {
                graph: g,
                train_vars: vec![(v1, a_id), (v3, b_id)],
                relay: Some(relay),
            })
        }
        None => {
            // in mutual range with no observer nearby: negotiate pairwise
            let mut g = FactorGraph::new();
            let v1 = g.add_variable(a.name.clone());
            let v2 = g.add_variable(b.name.clone());
            g.add_factor(format!("U_{}", a.name), v1, &[v2], beta_for_train(a, scale))?;
            g.add_factor(format!("U_{}", b.name), v2, &[v1], beta_for_train(b, scale))?;
            Ok(IncidentGraph {
                graph: g,
                train_vars: vec![(v1, a_id), (v2, b_id)],
                relay: None,
            })
        }
    }
}

/// Applicable braking pair for the critical-distance inequality: head-on
/// geometry consumes the gap from both ends; for rear-end geometry only the
/// first participant (the follower / the incoming train) eats into the gap,
/// and no credit is taken for the leader's motion.
fn feasibility_brakes(
    incident: &CollisionIncident,
    trains: &[TrainState],
    kin: &KinematicConstants,
) -> (f64, f64) {
    let (a, b) = incident.trains;
    let ba = braking_distance(trains[a.0].speed, kin).unwrap_or(f64::INFINITY);
    let bb = braking_distance(trains[b.0].speed, kin).unwrap_or(f64::INFINITY);
    match incident.kind {
        IncidentKind::HeadOnTrack | IncidentKind::HeadOnJunction => (ba, bb),
        IncidentKind::RearEndTrack | IncidentKind::RearEndPlatform => (ba, 0.0),
    }
}

/// True when an immediate stop by the applicable trains still ends at or
/// beyond the critical distance.
pub fn incident_feasible(
    incident: &CollisionIncident,
    trains: &[TrainState],
    cfg: &CoordinationConfig,
) -> bool {
    let (ba, bb) = feasibility_brakes(incident, trains, &cfg.kin);
    safe_stop_check(incident.gap, ba, bb, cfg.critical)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Accounting {
    Distributed,
    Centralized,
}

/// Resolves an incident the distributed way: max-sum over the incident
/// graph, then safety verification. A max-sum assignment that leaves both
/// trains moving on a closing course is overridden by the both-stop
/// fallback. Junction incidents use the priority rule instead.
pub fn resolve_incident(
    incident: &CollisionIncident,
    net: &RailNetwork,
    trains: &[TrainState],
    cfg: &CoordinationConfig,
) -> Result<DecisionSet, CoordinationError> {
    decide(incident, net, trains, cfg, Accounting::Distributed)
}

/// Same decision logic with centralized message accounting: each involved
/// train (and junction) sends its state to the monitoring station and
/// receives the decision back; the computation itself happens within the
/// station.
pub fn centralized_resolve(
    incident: &CollisionIncident,
    net: &RailNetwork,
    trains: &[TrainState],
    cfg: &CoordinationConfig,
) -> Result<DecisionSet, CoordinationError> {
    decide(incident, net, trains, cfg, Accounting::Centralized)
}

fn centralized_message_cost(kind: IncidentKind) -> u64 {
    match kind {
        // two train agents, state up + decision down each
        IncidentKind::HeadOnTrack | IncidentKind::RearEndTrack | IncidentKind::RearEndPlatform => 4,
        // the junction agent reports as well
        IncidentKind::HeadOnJunction => 6,
    }
}

fn decide(
    incident: &CollisionIncident,
    net: &RailNetwork,
    trains: &[TrainState],
    cfg: &CoordinationConfig,
    accounting: Accounting,
) -> Result<DecisionSet, CoordinationError> {
    let centralized_cost = centralized_message_cost(incident.kind);

    if incident.kind == IncidentKind::HeadOnJunction {
        let junction = incident.vertex.expect("junction incidents carry their junction");
        let (a, b) = incident.trains;
        let mut ds = junction_priority_rule(a, b, junction, net, trains, cfg);
        if accounting == Accounting::Centralized {
            ds.mode = ResolutionMode::CentralizedRelay;
            ds.messages_used = centralized_cost;
        }
        if ds.safety == SafetyOutcome::Unavoidable {
            return Err(CoordinationError::Infeasible { messages_used: ds.messages_used });
        }
        return Ok(ds);
    }

    if !incident_feasible(incident, trains, cfg) {
        let messages_used = match accounting {
            Accounting::Distributed => 0,
            Accounting::Centralized => centralized_cost,
        };
        return Err(CoordinationError::Infeasible { messages_used });
    }

    let (a_id, b_id) = incident.trains;
    let (solved, messages_distributed) = match build_incident_graph(incident, net, trains, cfg) {
        Ok(ig) => {
            let damping = if ig.graph.is_acyclic() { 0.0 } else { cfg.damping_cyclic };
            let assignment = run_maxsum(&ig.graph, cfg.max_iters, damping)?;
            let msgs = 2 * ig.graph.inter_agent_edges() as u64 * assignment.iterations as u64;
            let mut actions: Vec<(TrainId, Action)> = ig
                .train_vars
                .iter()
                .map(|&(v, t)| (t, assignment.action(v)))
                .collect();
            // a berthed participant is not a variable; it holds still
            if incident.kind == IncidentKind::RearEndPlatform {
                actions.push((b_id, Action::Stop));
            }
            (actions, msgs)
        }
        Err(CoordinationError::NoRelayInRange) => {
            // mutually unreachable with no shared relay: each train can only
            // act on its own alert, which means stopping
            (vec![(a_id, Action::Stop), (b_id, Action::Stop)], 0)
        }
        Err(e) => return Err(e),
    };

    let messages_used = match accounting {
        Accounting::Distributed => messages_distributed,
        Accounting::Centralized => centralized_cost,
    };
    let mode = match accounting {
        Accounting::Distributed => ResolutionMode::MaxSum,
        Accounting::Centralized => ResolutionMode::CentralizedRelay,
    };

    // safety verification: both trains still moving on a closing course is
    // never acceptable
    let both_move = solved
        .iter()
        .filter(|(t, _)| *t == a_id || *t == b_id)
        .all(|(_, act)| *act == Action::Move);
    let closing = incident.time_to_collision.is_finite();
    if both_move && closing {
        return Ok(DecisionSet {
            actions: vec![(a_id, Action::Stop), (b_id, Action::Stop)],
            mode,
            messages_used,
            safety: SafetyOutcome::Overridden,
        });
    }

    Ok(DecisionSet { actions: solved, mode, messages_used, safety: SafetyOutcome::Passed })
}

/// Junction crossing rule: when both trains can stop short, the higher
/// priority class proceeds and the other stops; a train that can no longer
/// stop before the junction uses it first; when neither can stop the
/// outcome is an unavoidable recorded collision (both still brake).
pub fn junction_priority_rule(
    a_id: TrainId,
    b_id: TrainId,
    junction: VertexId,
    net: &RailNetwork,
    trains: &[TrainState],
    cfg: &CoordinationConfig,
) -> DecisionSet {
    let a = &trains[a_id.0];
    let b = &trains[b_id.0];
    let d_a = distance_to_junction(a, junction, net).unwrap_or(f64::INFINITY);
    let d_b = distance_to_junction(b, junction, net).unwrap_or(f64::INFINITY);
    let brake_a = braking_distance(a.speed, &cfg.kin).unwrap_or(f64::INFINITY);
    let brake_b = braking_distance(b.speed, &cfg.kin).unwrap_or(f64::INFINITY);
    let a_can_stop = d_a > brake_a;
    let b_can_stop = d_b > brake_b;

    let (actions, safety) = match (a_can_stop, b_can_stop) {
        (true, true) => {
            let a_wins = (a.class.rank(), a_id.0) < (b.class.rank(), b_id.0);
            if a_wins {
                (vec![(a_id, Action::Move), (b_id, Action::Stop)], SafetyOutcome::Passed)
            } else {
                (vec![(a_id, Action::Stop), (b_id, Action::Move)], SafetyOutcome::Passed)
            }
        }
        (true, false) => {
            (vec![(a_id, Action::Stop), (b_id, Action::Move)], SafetyOutcome::Passed)
        }
        (false, true) => {
            (vec![(a_id, Action::Move), (b_id, Action::Stop)], SafetyOutcome::Passed)
        }
        (false, false) => {
            (vec![(a_id, Action::Stop), (b_id, Action::Stop)], SafetyOutcome::Unavoidable)
        }
    };

    DecisionSet {
        actions,
        mode: ResolutionMode::JunctionPriority,
        messages_used: 4,
        safety,
    }
}

/// Produces the next world snapshot's train list with decisions applied:
/// Stop engages full braking; Move leaves the train untouched. A train
/// already braking is never released — stop decisions dominate.
pub fn apply_decisions(
    trains: &[TrainState],
    decisions: &DecisionSet,
) -> Result<Vec<TrainState>, CoordinationError> {
    let mut next: Vec<TrainState> = trains.to_vec();
    for (t, action) in &decisions.actions {
        let train = next
            .get_mut(t.0)
            .ok_or_else(|| CoordinationError::UnknownTrain(format!("#{}", t.0)))?;
        if *action == Action::Stop {
            train.braking = true;
        }
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detection::IncidentKind;
    use crate::net::{build_network, Direction, Occupancy, TrackDef, TrackId, VertexDef, VertexDefKind};

    const KMH: f64 = 1000.0 / 3600.0;

    fn big_station(name: &str, range: f64) -> VertexDef {
        VertexDef {
            name: name.into(),
            comm_range: range,
            kind: VertexDefKind::Station { platforms: Vec::new() },
        }
    }

    fn line_net(range: f64) -> RailNetwork {
        build_network(
            vec![big_station("S1", range), big_station("S2", range)],
            vec![TrackDef { name: "TR1".into(), from: "S1".into(), to: "S2".into(), length: 6000.0 }],
        )
        .unwrap()
    }

    fn moving(name: &str, pos: f64, dir: Direction, speed: f64) -> TrainState {
        let mut t = TrainState::new(
            name,
            Occupancy::OnTrack { track: TrackId(0), position: pos, direction: dir },
            speed,
        );
        t.length = 100.0;
        t
    }

    fn head_on(gap: f64, trains: &[TrainState]) -> CollisionIncident {
        CollisionIncident {
            kind: IncidentKind::HeadOnTrack,
            trains: (TrainId(0), TrainId(1)),
            vertex: None,
            gap,
            time_to_collision: gap / (trains[0].speed + trains[1].speed),
            severity_rank: 0,
        }
    }

    #[test]
    fn out_of_range_head_on_overridden_to_both_stop() {
        // gap 1200 with 200 m ranges: relay topology; max-sum keeps both
        // moving (they only couple through the relay) and the safety check
        // overrides to both-stop
        let net = line_net(5000.0);
        let a = moving("T1", 2000.0, Direction::Up, 220.0 * KMH);
        let b = moving("T2", 3200.0, Direction::Down, 220.0 * KMH);
        let trains = vec![a, b];
        let incident = head_on(1200.0, &trains);
        let ig = build_incident_graph(&incident, &net, &trains, &CoordinationConfig::default())
            .unwrap();
        assert!(ig.relay.is_some());
        assert_eq!(ig.graph.var_count(), 3);
        // relay topology: train factors scope only the relay variable
        assert_eq!(ig.graph.factors()[0].scope, vec![VarId(0), VarId(1)]);
        assert_eq!(ig.graph.factors()[2].scope, vec![VarId(2), VarId(1)]);
        let ds = resolve_incident(&incident, &net, &trains, &CoordinationConfig::default())
            .unwrap();
        assert_eq!(ds.safety, SafetyOutcome::Overridden);
        assert!(ds.actions.iter().all(|(_, a)| *a == Action::Stop));
        assert!(ds.messages_used > 0);
        // margin check from the worked figures: 1200 - 2*453.2 >= 100
        assert!(incident_feasible(&incident, &trains, &CoordinationConfig::default()));
    }

    #[test]
    fn in_range_head_on_couples_directly() {
        let net = line_net(5000.0);
        let a = moving("T1", 2000.0, Direction::Up, 15.0);
        let b = moving("T2", 2350.0, Direction::Down, 15.0);
        let trains = vec![a, b];
        let incident = head_on(350.0, &trains);
        let ig = build_incident_graph(&incident, &net, &trains, &CoordinationConfig::default())
            .unwrap();
        assert_eq!(ig.graph.var_count(), 3);
        // direct topology: train factors scope each other
        assert_eq!(ig.graph.factors()[0].scope, vec![VarId(0), VarId(2)]);
        assert_eq!(ig.graph.factors()[2].scope, vec![VarId(2), VarId(0)]);
    }

    #[test]
    fn rear_end_prefers_follower_stop_leader_move() {
        let net = line_net(5000.0);
        // follower at 30 m/s behind a 20 m/s leader, gap 180
        let leader = moving("L", 2380.0, Direction::Up, 20.0);
        let follower = moving("F", 2100.0, Direction::Up, 30.0);
        let trains = vec![follower.clone(), leader.clone()];
        let incident = CollisionIncident {
            kind: IncidentKind::RearEndTrack,
            trains: (TrainId(0), TrainId(1)), // (follower, leader)
            vertex: None,
            gap: 180.0,
            time_to_collision: 18.0,
            severity_rank: 1,
        };
        let cfg = CoordinationConfig { critical: 50.0, ..CoordinationConfig::default() };
        let ds = resolve_incident(&incident, &net, &trains, &cfg).unwrap();
        assert_eq!(ds.action_of(TrainId(0)), Some(Action::Stop));
        assert_eq!(ds.action_of(TrainId(1)), Some(Action::Move));
        assert_eq!(ds.safety, SafetyOutcome::Passed);
        assert_eq!(ds.mode, ResolutionMode::MaxSum);
    }

    #[test]
    fn infeasible_gap_is_reported_not_resolved() {
        let net = line_net(5000.0);
        // brakes ~300 m each: v = sqrt(300 * 2 * mu * g)
        let v = (300.0f64 * 2.0 * 0.42 * 9.81).sqrt();
        let a = moving("T1", 2000.0, Direction::Up, v);
        let b = moving("T2", 2500.0, Direction::Down, v);
        let trains = vec![a, b];
        let incident = head_on(500.0, &trains);
        let cfg = CoordinationConfig { critical: 50.0, ..CoordinationConfig::default() };
        let err = resolve_incident(&incident, &net, &trains, &cfg).unwrap_err();
        assert!(matches!(err, CoordinationError::Infeasible { .. }));
    }

    fn junction_world() -> (RailNetwork, VertexId) {
        let net = build_network(
            vec![
                big_station("S1", 200.0),
                big_station("S2", 200.0),
                big_station("S3", 200.0),
                VertexDef { name: "J1".into(), comm_range: 600.0, kind: VertexDefKind::Junction },
            ],
            vec![
                TrackDef { name: "TA".into(), from: "S1".into(), to: "J1".into(), length: 3000.0 },
                TrackDef { name: "TB".into(), from: "S2".into(), to: "J1".into(), length: 3000.0 },
                TrackDef { name: "TC".into(), from: "J1".into(), to: "S3".into(), length: 3000.0 },
            ],
        )
        .unwrap();
        let j = net.find_vertex("J1").unwrap();
        (net, j)
    }

    fn approaching(name: &str, track: usize, dist: f64, speed: f64) -> TrainState {
        let mut t = TrainState::new(
            name,
            Occupancy::OnTrack {
                track: TrackId(track),
                position: 3000.0 - dist,
                direction: Direction::Up,
            },
            speed,
        );
        t.length = 100.0;
        t
    }

    #[test]
    fn junction_rule_prefers_priority_when_both_can_stop() {
        let (net, j) = junction_world();
        let mut premium = approaching("P", 0, 400.0, 40.0 * KMH);
        premium.class = PriorityClass::Premium;
        let mut freight = approaching("F", 1, 400.0, 40.0 * KMH);
        freight.class = PriorityClass::Freight;
        let trains = vec![premium, freight];
        let ds = junction_priority_rule(
            TrainId(0),
            TrainId(1),
            j,
            &net,
            &trains,
            &CoordinationConfig::default(),
        );
        assert_eq!(ds.action_of(TrainId(0)), Some(Action::Move));
        assert_eq!(ds.action_of(TrainId(1)), Some(Action::Stop));
        assert_eq!(ds.mode, ResolutionMode::JunctionPriority);
        assert_eq!(ds.messages_used, 4);
    }

    #[test]
    fn junction_rule_lets_the_unstoppable_train_through() {
        let (net, j) = junction_world();
        // 220 km/h brakes in ~453 m but the junction is 300 m away
        let mut fast = approaching("X", 0, 300.0, 220.0 * KMH);
        fast.class = PriorityClass::Premium;
        let slow = approaching("Y", 1, 500.0, 40.0 * KMH);
        let trains = vec![slow, fast];
        let ds = junction_priority_rule(
            TrainId(0),
            TrainId(1),
            j,
            &net,
            &trains,
            &CoordinationConfig::default(),
        );
        assert_eq!(ds.action_of(TrainId(1)), Some(Action::Move));
        assert_eq!(ds.action_of(TrainId(0)), Some(Action::Stop));
        assert_eq!(ds.safety, SafetyOutcome::Passed);
    }

    #[test]
    fn junction_rule_worst_case_records_collision() {
        let (net, j) = junction_world();
        let a = approaching("A", 0, 300.0, 220.0 * KMH);
        let b = approaching("B", 1, 400.0, 220.0 * KMH);
        let trains = vec![a, b];
        let ds = junction_priority_rule(
            TrainId(0),
            TrainId(1),
            j,
            &net,
            &trains,
            &CoordinationConfig::default(),
        );
        assert_eq!(ds.safety, SafetyOutcome::Unavoidable);
        let incident = CollisionIncident {
            kind: IncidentKind::HeadOnJunction,
            trains: (TrainId(0), TrainId(1)),
            vertex: Some(j),
            gap: 700.0,
            time_to_collision: 700.0 / (2.0 * 220.0 * KMH),
            severity_rank: 0,
        };
        let err =
            resolve_incident(&incident, &net, &trains, &CoordinationConfig::default()).unwrap_err();
        assert!(matches!(err, CoordinationError::Infeasible { messages_used: 4 }));
    }

    #[test]
    fn centralized_mode_same_decisions_different_accounting() {
        let net = line_net(5000.0);
        let a = moving("T1", 2000.0, Direction::Up, 220.0 * KMH);
        let b = moving("T2", 3200.0, Direction::Down, 220.0 * KMH);
        let trains = vec![a, b];
        let incident = head_on(1200.0, &trains);
        let cfg = CoordinationConfig::default();
        let dist = resolve_incident(&incident, &net, &trains, &cfg).unwrap();
        let cent = centralized_resolve(&incident, &net, &trains, &cfg).unwrap();
        let mut da = dist.actions.clone();
        let mut ca = cent.actions.clone();
        da.sort();
        ca.sort();
        assert_eq!(da, ca);
        assert_eq!(cent.mode, ResolutionMode::CentralizedRelay);
        assert_eq!(cent.messages_used, 4);
        assert!(dist.messages_used >= cent.messages_used);
    }

    #[test]
    fn unreachable_pair_without_relay_stops_unilaterally() {
        // tiny ranges, tiny station coverage: no relay reaches both
        let net = line_net(10.0);
        let mut a = moving("T1", 2000.0, Direction::Up, 15.0);
        let mut b = moving("T2", 3200.0, Direction::Down, 15.0);
        a.comm_range = 10.0;
        b.comm_range = 10.0;
        let trains = vec![a, b];
        let incident = head_on(1200.0, &trains);
        let cfg = CoordinationConfig::default();
        assert!(matches!(
            build_incident_graph(&incident, &net, &trains, &cfg),
            Err(CoordinationError::NoRelayInRange)
        ));
        let ds = resolve_incident(&incident, &net, &trains, &cfg).unwrap();
        assert!(ds.actions.iter().all(|(_, act)| *act == Action::Stop));
        assert_eq!(ds.messages_used, 0);
    }

    #[test]
    fn braking_decision_applies_and_dominates() {
        let net = line_net(5000.0);
        let a = moving("T1", 2000.0, Direction::Up, 20.0);
        let b = moving("T2", 3000.0, Direction::Down, 20.0);
        let trains = vec![a, b];
        let ds = DecisionSet {
            actions: vec![(TrainId(0), Action::Stop), (TrainId(1), Action::Move)],
            mode: ResolutionMode::MaxSum,
            messages_used: 0,
            safety: SafetyOutcome::Passed,
        };
        let next = apply_decisions(&trains, &ds).unwrap();
        assert!(next[0].braking);
        assert!(!next[1].braking);
        // a later Move never releases the brake
        let ds2 = DecisionSet {
            actions: vec![(TrainId(0), Action::Move)],
            mode: ResolutionMode::MaxSum,
            messages_used: 0,
            safety: SafetyOutcome::Passed,
        };
        let after = apply_decisions(&next, &ds2).unwrap();
        assert!(after[0].braking);
        let bad = DecisionSet {
            actions: vec![(TrainId(9), Action::Stop)],
            mode: ResolutionMode::MaxSum,
            messages_used: 0,
            safety: SafetyOutcome::Passed,
        };
        assert!(matches!(apply_decisions(&trains, &bad), Err(CoordinationError::UnknownTrain(_))));
        let _ = net;
    }
}
