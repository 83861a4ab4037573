//! Deterministic time-stepped world evolution: advance kinematics, run
//! detection, trigger coordination, accumulate the event log and metrics.
//!
//! Within a tick: (1) incidents are scanned on current positions, (2) new
//! incidents are resolved in severity order, (3) decisions apply as braking
//! flags, (4) positions and speeds advance, (5) closed incidents classify
//! as avoided or occurred. Open incidents are additionally re-verified
//! every tick: the moment one more tick of the standing decisions would
//! break the critical-distance inequality, every participant is forced to
//! a full stop. Braking burns gap and remaining braking distance at the
//! same rate, so the margin that held at the forced stop still holds at
//! standstill.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::coordination::{
    apply_decisions, centralized_resolve, resolve_incident, CoordinationConfig,
    CoordinationError, DecisionSet, ResolutionMode, SafetyOutcome,
};
use crate::detection::{scan_all, CollisionIncident, IncidentKind};
use crate::kinematics::{braking_distance, comm_reachable, safe_stop_check, KinematicConstants};
use crate::maxsum::Action;
use crate::net::{
    train_separation, validate_occupancy, Occupancy, RailNetwork, TrainId, TrainState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Distributed,
    Centralized,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Distributed => "distributed",
            Mode::Centralized => "centralized",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub kin: KinematicConstants,
    /// Minimum permitted separation; gaps below it trigger detection.
    pub headway: f64,
    /// Below this remaining margin a collision is considered inevitable.
    pub critical: f64,
    /// Communication radius assigned to trains that do not declare one.
    pub default_comm_range: f64,
    pub tick_seconds: f64,
    pub horizon: u64,
    pub mode: Mode,
    /// Orders randomized sweep generation only; physics never consults it.
    pub seed: u64,
    /// Decision latency in ticks for sensitivity tests; 0 per the
    /// instantaneous-decision approximation.
    pub latency_ticks: u64,
    pub max_iters: usize,
    pub damping_cyclic: f64,
    pub beta_scale: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            kin: KinematicConstants::default(),
            headway: 200.0,
            critical: 100.0,
            default_comm_range: 200.0,
            tick_seconds: 1.0,
            horizon: 86_400,
            mode: Mode::Distributed,
            seed: 0,
            latency_ticks: 0,
            max_iters: 100,
            damping_cyclic: 0.5,
            beta_scale: 1.0,
        }
    }
}

impl SimConfig {
    pub fn coordination(&self) -> CoordinationConfig {
        CoordinationConfig {
            kin: self.kin,
            headway: self.headway,
            critical: self.critical,
            max_iters: self.max_iters,
            damping_cyclic: self.damping_cyclic,
            beta_scale: self.beta_scale,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.tick_seconds > 0.0) {
            return Err(SimError::Invalid("tick must be positive".into()));
        }
        if self.horizon < 1 {
            return Err(SimError::Invalid("horizon must be at least 1 tick".into()));
        }
        if !(self.critical > 0.0 && self.headway > self.critical) {
            return Err(SimError::Invalid("headway must exceed critical, both positive".into()));
        }
        if !(self.default_comm_range > 0.0) {
            return Err(SimError::Invalid("default communication range must be positive".into()));
        }
        if !(self.kin.mu_k > 0.0 && self.kin.g > 0.0) {
            return Err(SimError::Invalid("mu_k and g must be positive".into()));
        }
        if self.max_iters == 0 || !(0.0..1.0).contains(&self.damping_cyclic) {
            return Err(SimError::Invalid("bad solver parameters".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    Invalid(String),
    CountMismatch { detected: u64, avoided: u64 },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Invalid(why) => write!(f, "invalid scenario: {why}"),
            SimError::CountMismatch { detected, avoided } => {
                write!(f, "avoided count {avoided} exceeds detected count {detected}")
            }
        }
    }
}

impl core::error::Error for SimError {}

/// avoided / detected * 100, with an empty record vacuously safe.
pub fn efficiency(detected: u64, avoided: u64) -> Result<f64, SimError> {
    if avoided > detected {
        return Err(SimError::CountMismatch { detected, avoided });
    }
    if detected == 0 {
        return Ok(100.0);
    }
    Ok(avoided as f64 / detected as f64 * 100.0)
}

/// A complete simulation input: network, initial trains, constants.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub network: RailNetwork,
    pub trains: Vec<TrainState>,
    pub config: SimConfig,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        self.config.validate()?;
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for t in &self.trains {
            if !seen.insert(&t.name) {
                return Err(SimError::Invalid(format!("duplicate train name `{}`", t.name)));
            }
            if !(t.length > 0.0) {
                return Err(SimError::Invalid(format!("train `{}` has non-positive length", t.name)));
            }
            if !(t.comm_range > 0.0) {
                return Err(SimError::Invalid(format!("train `{}` has non-positive range", t.name)));
            }
            if let Occupancy::OnTrack { track, position, direction } = &t.occupancy {
                if track.0 >= self.network.tracks().len() {
                    return Err(SimError::Invalid(format!("train `{}` on unknown track", t.name)));
                }
                let len = self.network.track(*track).length;
                let fits = match direction {
                    crate::net::Direction::Up => *position >= t.length && *position <= len,
                    crate::net::Direction::Down => {
                        *position >= 0.0 && *position + t.length <= len
                    }
                };
                if !fits {
                    return Err(SimError::Invalid(format!(
                        "train `{}` does not fit its track at its position",
                        t.name
                    )));
                }
            }
            let mut prev = t.occupied_track(&self.network);
            for hop in &t.route {
                if hop.0 >= self.network.tracks().len() {
                    return Err(SimError::Invalid(format!("train `{}` routes unknown track", t.name)));
                }
                if let Some(p) = prev {
                    let (pe, he) = (self.network.track(p).ends, self.network.track(*hop).ends);
                    let touches =
                        pe.0 == he.0 || pe.0 == he.1 || pe.1 == he.0 || pe.1 == he.1;
                    if !touches {
                        return Err(SimError::Invalid(format!(
                            "train `{}` route is not edge-connected",
                            t.name
                        )));
                    }
                }
                prev = Some(*hop);
            }
        }
        validate_occupancy(&self.network, &self.trains)
            .map_err(|e| SimError::Invalid(format!("{e}")))?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Detected,
    Resolved,
    Avoided,
    Occurred,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::Detected => "detected",
            EventKind::Resolved => "resolved",
            EventKind::Avoided => "avoided",
            EventKind::Occurred => "occurred",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionInfo {
    pub actions: Vec<(String, Action)>,
    pub safety: SafetyOutcome,
    pub resolver: ResolutionMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub tick: u64,
    pub kind: EventKind,
    pub incident_id: u64,
    pub incident_kind: IncidentKind,
    pub trains: (String, String),
    pub gap: f64,
    pub mode: Mode,
    pub msgs: u64,
    pub resolution: Option<ResolutionInfo>,
}

impl Event {
    /// One line per event; decision lines append the incident id, per-train
    /// actions, the resolver, and the safety-check outcome.
    pub fn format_line(&self) -> String {
        let mut line = format!(
            "tick={} event={} kind={} trains={},{} gap={:.3} mode={} msgs={}",
            self.tick,
            self.kind.label(),
            self.incident_kind.label(),
            self.trains.0,
            self.trains.1,
            self.gap,
            self.mode.label(),
            self.msgs
        );
        if let Some(res) = &self.resolution {
            let acts: Vec<String> =
                res.actions.iter().map(|(n, a)| format!("{n}:{}", a.label())).collect();
            line.push_str(&format!(
                " incident=I{} actions={} resolver={} safe={}",
                self.incident_id,
                acts.join(","),
                res.resolver.label(),
                res.safety.label()
            ));
        }
        line
    }
}

#[derive(Debug, Clone)]
struct OpenIncident {
    id: u64,
    incident: CollisionIncident,
    decisions: DecisionSet,
    /// The watchdog already forced a full stop; no further re-checks.
    forced: bool,
    /// Unavoidable collision already counted; the pair stays suppressed
    /// until the usual closure condition, then drops silently.
    doomed: bool,
}

/// Mutable world snapshot threaded through `step`.
#[derive(Debug, Clone)]
pub struct World {
    pub tick: u64,
    pub trains: Vec<TrainState>,
    pending: Vec<TrainState>,
    open: Vec<OpenIncident>,
    in_range: BTreeSet<(TrainId, TrainId)>,
    next_incident: u64,
    brake_queue: Vec<(u64, TrainId)>,
}

impl World {
    pub fn new(scenario: &Scenario) -> World {
        let mut trains = Vec::new();
        let mut pending = Vec::new();
        for t in &scenario.trains {
            if t.activation_tick == 0 {
                trains.push(t.clone());
            } else {
                pending.push(t.clone());
            }
        }
        pending.sort_by_key(|t| t.activation_tick);
        World {
            tick: 0,
            trains,
            pending,
            open: Vec::new(),
            in_range: BTreeSet::new(),
            next_incident: 1,
            brake_queue: Vec::new(),
        }
    }

    pub fn open_incident_count(&self) -> usize {
        self.open.len()
    }
}

/// Simulation results: incident outcome counters, message tallies, and the
/// per-tick event log. `avoided + occurred = detected` always holds.
#[derive(Debug, Clone)]
pub struct SimReport {
    pub scenario: String,
    pub trains: usize,
    pub detected: u64,
    pub avoided: u64,
    pub occurred: u64,
    pub messages_total: u64,
    pub events: Vec<Event>,
    pub final_world: World,
}

impl SimReport {
    pub fn efficiency_pct(&self) -> f64 {
        efficiency(self.detected, self.avoided).expect("counters are consistent")
    }

    pub fn event_log(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.format_line());
            out.push('\n');
        }
        out
    }

    pub fn counts_consistent(&self) -> bool {
        self.avoided + self.occurred == self.detected
    }
}

fn advance_train(train: &mut TrainState, net: &RailNetwork, kin: &KinematicConstants, dt: f64) {
    if train.is_at_platform() || train.speed == 0.0 {
        if train.braking {
            train.speed = 0.0;
        }
        return;
    }
    let decel = kin.deceleration();
    let (dist, new_speed) = if train.braking {
        if train.speed <= decel * dt {
            // halts within this tick; exact remaining braking integral
            (train.speed * train.speed / (2.0 * decel), 0.0)
        } else {
            let v2 = train.speed - decel * dt;
            ((train.speed + v2) * 0.5 * dt, v2)
        }
    } else {
        (train.speed * dt, train.speed)
    };
    train.speed = new_speed;
    move_along(train, net, dist);
}

fn move_along(train: &mut TrainState, net: &RailNetwork, mut dist: f64) {
    loop {
        let Occupancy::OnTrack { track, position, direction } = &mut train.occupancy else {
            return;
        };
        let len = net.track(*track).length;
        let room = match direction {
            crate::net::Direction::Up => len - *position,
            crate::net::Direction::Down => *position,
        };
        if dist <= room {
            match direction {
                crate::net::Direction::Up => *position += dist,
                crate::net::Direction::Down => *position -= dist,
            }
            return;
        }
        // reach the end of this track
        let vertex = match direction {
            crate::net::Direction::Up => {
                *position = len;
                net.track(*track).ends.1
            }
            crate::net::Direction::Down => {
                *position = 0.0;
                net.track(*track).ends.0
            }
        };
        dist -= room;
        if train.route.is_empty() {
            // no routing beyond this edge: stop at the end
            train.speed = 0.0;
            return;
        }
        let next = train.route.remove(0);
        train.planned_next = None;
        let ends = net.track(next).ends;
        if ends.0 == vertex {
            train.occupancy = Occupancy::OnTrack {
                track: next,
                position: 0.0,
                direction: crate::net::Direction::Up,
            };
        } else if ends.1 == vertex {
            train.occupancy = Occupancy::OnTrack {
                track: next,
                position: net.track(next).length,
                direction: crate::net::Direction::Down,
            };
        } else {
            // discontinuous route: treat as end of the line
            train.speed = 0.0;
            return;
        }
    }
}

/// Applicable braking pair of an incident under current speeds (head-on
/// consumes the gap from both ends, rear-end only from the follower side).
fn margin_brakes(
    kind: IncidentKind,
    a: &TrainState,
    b: &TrainState,
    kin: &KinematicConstants,
) -> (f64, f64) {
    let ba = braking_distance(a.speed, kin).unwrap_or(f64::INFINITY);
    let bb = braking_distance(b.speed, kin).unwrap_or(f64::INFINITY);
    match kind {
        IncidentKind::HeadOnTrack | IncidentKind::HeadOnJunction => (ba, bb),
        IncidentKind::RearEndTrack | IncidentKind::RearEndPlatform => (ba, 0.0),
    }
}

/// Would the standing decisions still allow a safe both-stop fallback after
/// one more tick of motion?
fn holds_after_one_tick(
    incident: &CollisionIncident,
    trains: &[TrainState],
    net: &RailNetwork,
    cfg: &SimConfig,
) -> bool {
    let (a_id, b_id) = incident.trains;
    let mut a = trains[a_id.0].clone();
    let mut b = trains[b_id.0].clone();
    advance_train(&mut a, net, &cfg.kin, cfg.tick_seconds);
    advance_train(&mut b, net, &cfg.kin, cfg.tick_seconds);
    let gap = train_separation(net, &a, &b);
    if gap.is_infinite() {
        return true;
    }
    let (ba, bb) = margin_brakes(incident.kind, &a, &b, &cfg.kin);
    safe_stop_check(gap, ba, bb, cfg.critical)
}

fn incident_event(
    tick: u64,
    kind: EventKind,
    id: u64,
    incident: &CollisionIncident,
    trains: &[TrainState],
    gap: f64,
    cfg: &SimConfig,
    msgs: u64,
    resolution: Option<ResolutionInfo>,
) -> Event {
    Event {
        tick,
        kind,
        incident_id: id,
        incident_kind: incident.kind,
        trains: (
            trains[incident.trains.0 .0].name.clone(),
            trains[incident.trains.1 .0].name.clone(),
        ),
        gap,
        mode: cfg.mode,
        msgs,
        resolution,
    }
}

fn resolution_info(ds: &DecisionSet, trains: &[TrainState]) -> ResolutionInfo {
    ResolutionInfo {
        actions: ds
            .actions
            .iter()
            .map(|(t, a)| (trains[t.0].name.clone(), *a))
            .collect(),
        safety: ds.safety,
        resolver: ds.mode,
    }
}

/// One tick of world evolution. Returns the next snapshot, the events that
/// fired, and the messages exchanged during the tick.
pub fn step(world: &World, net: &RailNetwork, cfg: &SimConfig) -> (World, Vec<Event>, u64) {
    let mut w = world.clone();
    let mut events = Vec::new();
    let mut msgs: u64 = 0;
    let tick = w.tick;
    let coord = cfg.coordination();

    // activate pending trains whose spawn spot is clear
    let mut still_pending = Vec::new();
    for t in core::mem::take(&mut w.pending) {
        if t.activation_tick <= tick && spawn_clear(&t, &w.trains, net) {
            w.trains.push(t);
        } else {
            still_pending.push(t);
        }
    }
    w.pending = still_pending;

    // inter-agent traffic outside of incident handling
    match cfg.mode {
        Mode::Centralized => {
            // every train and junction polls its monitoring station: state
            // up, acknowledgement or decision down
            msgs += 2 * (w.trains.len() as u64 + net.junction_count() as u64);
        }
        Mode::Distributed => {
            // a state exchange happens when two trains enter mutual range
            let pairs = in_range_pairs(net, &w.trains);
            for p in &pairs {
                if !w.in_range.contains(p) {
                    msgs += 2;
                }
            }
            w.in_range = pairs;
        }
    }

    // (1) detection on current positions, suppressing pairs under an active
    // resolution
    let open_keys: BTreeSet<(TrainId, TrainId)> =
        w.open.iter().map(|o| o.incident.pair_key()).collect();
    let incidents: Vec<CollisionIncident> = scan_all(net, &w.trains, cfg.headway)
        .into_iter()
        .filter(|i| !open_keys.contains(&i.pair_key()))
        .collect();

    // (2) resolve in severity order; (3) decisions apply as braking flags
    for incident in incidents {
        let id = w.next_incident;
        w.next_incident += 1;
        events.push(incident_event(
            tick,
            EventKind::Detected,
            id,
            &incident,
            &w.trains,
            incident.gap,
            cfg,
            0,
            None,
        ));
        let outcome = match cfg.mode {
            Mode::Distributed => resolve_incident(&incident, net, &w.trains, &coord),
            Mode::Centralized => centralized_resolve(&incident, net, &w.trains, &coord),
        };
        match outcome {
            Ok(ds) => {
                msgs += ds.messages_used;
                events.push(incident_event(
                    tick,
                    EventKind::Resolved,
                    id,
                    &incident,
                    &w.trains,
                    incident.gap,
                    cfg,
                    ds.messages_used,
                    Some(resolution_info(&ds, &w.trains)),
                ));
                if cfg.latency_ticks == 0 {
                    w.trains = apply_decisions(&w.trains, &ds).expect("participants exist");
                } else {
                    for (t, a) in &ds.actions {
                        if *a == Action::Stop {
                            w.brake_queue.push((tick + cfg.latency_ticks, *t));
                        }
                    }
                }
                w.open.push(OpenIncident { id, incident, decisions: ds, forced: false, doomed: false });
            }
            Err(CoordinationError::Infeasible { messages_used }) => {
                msgs += messages_used;
                // unavoidable: both brake anyway, collision recorded now
                let ds = DecisionSet {
                    actions: alloc::vec![
                        (incident.trains.0, Action::Stop),
                        (incident.trains.1, Action::Stop),
                    ],
                    mode: match cfg.mode {
                        Mode::Distributed => ResolutionMode::MaxSum,
                        Mode::Centralized => ResolutionMode::CentralizedRelay,
                    },
                    messages_used,
                    safety: SafetyOutcome::Unavoidable,
                };
                w.trains = apply_decisions(&w.trains, &ds).expect("participants exist");
                events.push(incident_event(
                    tick,
                    EventKind::Resolved,
                    id,
                    &incident,
                    &w.trains,
                    incident.gap,
                    cfg,
                    messages_used,
                    Some(resolution_info(&ds, &w.trains)),
                ));
                events.push(incident_event(
                    tick,
                    EventKind::Occurred,
                    id,
                    &incident,
                    &w.trains,
                    incident.gap,
                    cfg,
                    0,
                    None,
                ));
                w.open.push(OpenIncident { id, incident, decisions: ds, forced: true, doomed: true });
            }
            Err(_) => {
                // solver or bookkeeping failure: fail safe, stop both
                let ds = DecisionSet {
                    actions: alloc::vec![
                        (incident.trains.0, Action::Stop),
                        (incident.trains.1, Action::Stop),
                    ],
                    mode: ResolutionMode::MaxSum,
                    messages_used: 0,
                    safety: SafetyOutcome::Overridden,
                };
                w.trains = apply_decisions(&w.trains, &ds).expect("participants exist");
                events.push(incident_event(
                    tick,
                    EventKind::Resolved,
                    id,
                    &incident,
                    &w.trains,
                    incident.gap,
                    cfg,
                    0,
                    Some(resolution_info(&ds, &w.trains)),
                ));
                w.open.push(OpenIncident { id, incident, decisions: ds, forced: true, doomed: false });
            }
        }
    }

    // delayed decisions coming due
    if !w.brake_queue.is_empty() {
        let due: Vec<TrainId> = w
            .brake_queue
            .iter()
            .filter(|(at, _)| *at <= tick)
            .map(|(_, t)| *t)
            .collect();
        w.brake_queue.retain(|(at, _)| *at > tick);
        for t in due {
            if let Some(train) = w.trains.get_mut(t.0) {
                train.braking = true;
            }
        }
    }

    // safety watchdog: force a full stop while the fallback still clears
    // the critical distance
    for oi in w.open.iter_mut() {
        if oi.forced {
            continue;
        }
        let (a, b) = oi.incident.trains;
        let any_coasting = [a, b]
            .iter()
            .any(|t| w.trains[t.0].speed > 0.0 && !w.trains[t.0].braking);
        if !any_coasting {
            continue;
        }
        // a junction conflict resolves by temporal separation: once the
        // yielding train is braking short of the vertex, the other may cross
        if oi.incident.kind == IncidentKind::HeadOnJunction
            && [a, b]
                .iter()
                .any(|t| w.trains[t.0].braking || w.trains[t.0].speed == 0.0)
        {
            continue;
        }
        if !holds_after_one_tick(&oi.incident, &w.trains, net, cfg) {
            oi.forced = true;
            let ds = DecisionSet {
                actions: alloc::vec![(a, Action::Stop), (b, Action::Stop)],
                mode: oi.decisions.mode,
                messages_used: 0,
                safety: SafetyOutcome::Overridden,
            };
            w.trains = apply_decisions(&w.trains, &ds).expect("participants exist");
            let gap = train_separation(net, &w.trains[a.0], &w.trains[b.0]);
            events.push(incident_event(
                tick,
                EventKind::Resolved,
                oi.id,
                &oi.incident,
                &w.trains,
                gap,
                cfg,
                0,
                Some(resolution_info(&ds, &w.trains)),
            ));
            oi.decisions = ds;
        }
    }

    // (4) advance kinematics
    for train in w.trains.iter_mut() {
        advance_train(train, net, &cfg.kin, cfg.tick_seconds);
    }

    // (5) classify closures on the advanced positions
    let mut remaining = Vec::new();
    for oi in core::mem::take(&mut w.open) {
        let (a, b) = oi.incident.trains;
        let gap = train_separation(net, &w.trains[a.0], &w.trains[b.0]);
        let stopped = w.trains[a.0].speed == 0.0 && w.trains[b.0].speed == 0.0;
        // the headway-recovery closure only applies to the kinds whose
        // detection condition is the headway violation itself; junction and
        // platform conflicts are detected at arbitrary gaps and close when
        // the dangerous simultaneity lapses
        let settled = match oi.incident.kind {
            IncidentKind::HeadOnTrack | IncidentKind::RearEndTrack => {
                gap >= cfg.headway || stopped
            }
            // once either train stands, the simultaneous-entry condition can
            // never re-fire: the vertex contention is over
            IncidentKind::HeadOnJunction => {
                w.trains[a.0].speed == 0.0 || w.trains[b.0].speed == 0.0
            }
            IncidentKind::RearEndPlatform => stopped,
        };
        if oi.doomed {
            // already counted as occurred; hold the suppression window until
            // the pair settles, then drop without a second event
            if gap <= 0.0 {
                w.trains[a.0].speed = 0.0;
                w.trains[a.0].braking = true;
                w.trains[b.0].speed = 0.0;
                w.trains[b.0].braking = true;
            }
            if !(stopped || gap >= cfg.headway) {
                remaining.push(oi);
            }
            continue;
        }
        if gap <= 0.0 {
            events.push(incident_event(
                tick,
                EventKind::Occurred,
                oi.id,
                &oi.incident,
                &w.trains,
                0.0,
                cfg,
                0,
                None,
            ));
            // a wreck blocks both trains
            w.trains[a.0].speed = 0.0;
            w.trains[a.0].braking = true;
            w.trains[b.0].speed = 0.0;
            w.trains[b.0].braking = true;
        } else if settled {
            events.push(incident_event(
                tick,
                EventKind::Avoided,
                oi.id,
                &oi.incident,
                &w.trains,
                gap,
                cfg,
                0,
                None,
            ));
        } else {
            remaining.push(oi);
        }
    }
    w.open = remaining;

    w.tick += 1;
    (w, events, msgs)
}

/// Outcome of an isolated pair simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub collided: bool,
    /// Smallest separation observed before the pair settled.
    pub min_gap: f64,
}

/// Analysis helper: forward-simulates an incident pair under forced initial
/// decisions, with the per-tick safety watchdog active, until the pair
/// settles (both stopped, gap recovered past headway, or bodies met).
pub fn simulate_pair_decisions(
    net: &RailNetwork,
    trains: &[TrainState],
    incident: &CollisionIncident,
    initial: &[(TrainId, Action)],
    cfg: &SimConfig,
    max_ticks: u64,
) -> PairOutcome {
    let mut ts: Vec<TrainState> = trains.to_vec();
    for (t, a) in initial {
        if *a == Action::Stop {
            ts[t.0].braking = true;
        }
    }
    let (a, b) = incident.trains;
    let mut min_gap = train_separation(net, &ts[a.0], &ts[b.0]);
    let mut forced = false;
    for _ in 0..max_ticks {
        if !forced {
            let coasting =
                [a, b].iter().any(|t| ts[t.0].speed > 0.0 && !ts[t.0].braking);
            let junction_settled = incident.kind == IncidentKind::HeadOnJunction
                && [a, b].iter().any(|t| ts[t.0].braking || ts[t.0].speed == 0.0);
            if coasting && !junction_settled && !holds_after_one_tick(incident, &ts, net, cfg) {
                ts[a.0].braking = true;
                ts[b.0].braking = true;
                forced = true;
            }
        }
        for t in ts.iter_mut() {
            advance_train(t, net, &cfg.kin, cfg.tick_seconds);
        }
        let gap = train_separation(net, &ts[a.0], &ts[b.0]);
        min_gap = min_gap.min(gap);
        if gap <= 0.0 {
            return PairOutcome { collided: true, min_gap: 0.0 };
        }
        if gap >= cfg.headway || (ts[a.0].speed == 0.0 && ts[b.0].speed == 0.0) {
            break;
        }
    }
    PairOutcome { collided: false, min_gap }
}

fn spawn_clear(candidate: &TrainState, trains: &[TrainState], net: &RailNetwork) -> bool {
    let Some((track, lo, hi)) = candidate.body(net) else {
        return true;
    };
    for t in trains {
        if let Some((other, olo, ohi)) = t.body(net) {
            if other == track && lo < ohi && olo < hi {
                return false;
            }
        }
    }
    true
}

/// Unordered train pairs currently within mutual communication range.
/// Stations and junctions are fixed infrastructure; their traffic is
/// accounted where it happens, at incident resolution.
fn in_range_pairs(net: &RailNetwork, trains: &[TrainState]) -> BTreeSet<(TrainId, TrainId)> {
    let mut pairs = BTreeSet::new();
    for i in 0..trains.len() {
        for j in (i + 1)..trains.len() {
            let gap = train_separation(net, &trains[i], &trains[j]);
            if comm_reachable(gap, trains[i].comm_range, trains[j].comm_range) {
                pairs.insert((TrainId(i), TrainId(j)));
            }
        }
    }
    pairs
}

/// Runs a scenario over its horizon. Identical scenarios produce identical
/// reports; any incident still open at the horizon is classified by its
/// final gap.
pub fn run_scenario(scenario: &Scenario) -> SimReport {
    let cfg = &scenario.config;
    let net = &scenario.network;
    let mut world = World::new(scenario);
    let mut events: Vec<Event> = Vec::new();
    let mut messages_total: u64 = 0;

    for _ in 0..cfg.horizon {
        let (next, tick_events, tick_msgs) = step(&world, net, cfg);
        events.extend(tick_events);
        messages_total += tick_msgs;
        world = next;
    }

    // flush incidents still open at the horizon
    let open = core::mem::take(&mut world.open);
    for oi in open {
        if oi.doomed {
            continue; // outcome already recorded
        }
        let (a, b) = oi.incident.trains;
        let gap = train_separation(net, &world.trains[a.0], &world.trains[b.0]);
        let kind = if gap <= 0.0 { EventKind::Occurred } else { EventKind::Avoided };
        events.push(incident_event(
            cfg.horizon,
            kind,
            oi.id,
            &oi.incident,
            &world.trains,
            gap.max(0.0),
            cfg,
            0,
            None,
        ));
    }

    let mut detected = 0;
    let mut avoided = 0;
    let mut occurred = 0;
    for e in &events {
        match e.kind {
            EventKind::Detected => detected += 1,
            EventKind::Avoided => avoided += 1,
            EventKind::Occurred => occurred += 1,
            EventKind::Resolved => {}
        }
    }

    SimReport {
        scenario: scenario.name.clone(),
        trains: scenario.trains.len(),
        detected,
        avoided,
        occurred,
        messages_total,
        events,
        final_world: world,
    }
}
