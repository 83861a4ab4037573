//! Scenario file format: a line-oriented text format with `[network]`,
//! `[trains]`, `[constants]`, and `[run]` sections.
//!
//! Every entry is `<kind> <name> key=value ...`. Length fields accept `m`
//! and `km` suffixes (meters by default), speeds accept `km/h` and `m/s`
//! (meters per second by default), durations accept `s`. A unit may be
//! attached to the number or follow it as a separate token.
//!
//! ```text
//! [network]
//! station S3 range=200m
//! junction J1 range=800m
//! track TR1 from=S2 to=S3 length=4000m
//! platform S3 p=2 track=TR1
//!
//! [trains]
//! train T2 class=passenger platform=S3:2 speed=0
//! train T1 class=expressmail track=TR1 position=800m direction=up speed=80km/h
//!
//! [constants]
//! mu_k=0.42
//! g=9.81
//! headway=200m
//! critical=100m
//! default_range=200m
//!
//! [run]
//! tick=1s
//! horizon=300
//! mode=distributed
//! seed=42
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use railguard_core::coordination::PriorityClass;
use railguard_core::net::{
    build_network, Direction, Occupancy, TrackDef, TrainState, VertexDef, VertexDefKind,
};
use railguard_core::sim::{Mode, Scenario, SimConfig};

#[derive(Debug)]
pub enum ScenarioError {
    Io(std::io::Error),
    Parse { line: usize, message: String },
    Validation(String),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Io(e) => write!(f, "cannot read scenario: {e}"),
            ScenarioError::Parse { line, message } => write!(f, "line {line}: {message}"),
            ScenarioError::Validation(message) => write!(f, "validation failed: {message}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl From<std::io::Error> for ScenarioError {
    fn from(e: std::io::Error) -> Self {
        ScenarioError::Io(e)
    }
}

fn perr(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse { line, message: message.into() }
}

/// Splits a line into tokens, re-joining a bare unit token (`km/h`, `m/s`,
/// `m`, `km`, `s`) with the numeric value before it.
fn tokenize(line: &str) -> Vec<String> {
    let raw: Vec<&str> = line.split_whitespace().collect();
    let mut out: Vec<String> = Vec::with_capacity(raw.len());
    for tok in raw {
        let is_unit = matches!(tok, "m" | "km" | "s" | "m/s" | "mps" | "km/h" | "kmh");
        if is_unit {
            if let Some(prev) = out.last_mut() {
                let numeric_tail = prev
                    .rsplit('=')
                    .next()
                    .map(|v| !v.is_empty() && v.chars().all(|c| c.is_ascii_digit() || c == '.' || c == '-'))
                    .unwrap_or(false);
                if numeric_tail {
                    prev.push_str(tok);
                    continue;
                }
            }
        }
        out.push(tok.to_string());
    }
    out
}

fn parse_number(s: &str, line: usize, field: &str) -> Result<f64, ScenarioError> {
    s.parse::<f64>().map_err(|_| perr(line, format!("field `{field}`: `{s}` is not a number")))
}

/// Meters, accepting `m` (default) and `km`.
fn parse_length(s: &str, line: usize, field: &str) -> Result<f64, ScenarioError> {
    if let Some(v) = s.strip_suffix("km") {
        return Ok(parse_number(v, line, field)? * 1000.0);
    }
    if let Some(v) = s.strip_suffix('m') {
        return parse_number(v, line, field);
    }
    parse_number(s, line, field)
}

/// Meters per second, accepting `km/h`, `kmh`, `m/s`, `mps` (default m/s).
/// The km/h conversion is the exact factor 1000/3600.
fn parse_speed(s: &str, line: usize, field: &str) -> Result<f64, ScenarioError> {
    for suffix in ["km/h", "kmh"] {
        if let Some(v) = s.strip_suffix(suffix) {
            return Ok(parse_number(v, line, field)? * 1000.0 / 3600.0);
        }
    }
    for suffix in ["m/s", "mps"] {
        if let Some(v) = s.strip_suffix(suffix) {
            return parse_number(v, line, field);
        }
    }
    parse_number(s, line, field)
}

/// Seconds, accepting a trailing `s`.
fn parse_duration(s: &str, line: usize, field: &str) -> Result<f64, ScenarioError> {
    if let Some(v) = s.strip_suffix('s') {
        return parse_number(v, line, field);
    }
    parse_number(s, line, field)
}

struct Attrs {
    line: usize,
    entry: String,
    map: BTreeMap<String, String>,
}

impl Attrs {
    fn parse(tokens: &[String], line: usize, entry: &str) -> Result<Attrs, ScenarioError> {
        let mut map = BTreeMap::new();
        for tok in tokens {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| perr(line, format!("expected key=value, found `{tok}`")))?;
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(perr(line, format!("duplicate field `{k}`")));
            }
        }
        Ok(Attrs { line, entry: entry.to_string(), map })
    }

    fn take(&mut self, names: &[&str]) -> Option<(String, String)> {
        for n in names {
            if let Some(v) = self.map.remove(*n) {
                return Some((n.to_string(), v));
            }
        }
        None
    }

    fn require(&mut self, names: &[&str]) -> Result<(String, String), ScenarioError> {
        self.take(names).ok_or_else(|| {
            perr(self.line, format!("{} is missing the `{}` field", self.entry, names[0]))
        })
    }

    fn finish(self) -> Result<(), ScenarioError> {
        if let Some(k) = self.map.keys().next() {
            return Err(perr(self.line, format!("{} has an unknown field `{k}`", self.entry)));
        }
        Ok(())
    }
}

#[derive(Default)]
struct NetworkSection {
    stations: Vec<(usize, String, f64)>,
    junctions: Vec<(usize, String, f64)>,
    tracks: Vec<(usize, TrackDef)>,
    platforms: Vec<(usize, String, usize, String)>,
}

struct TrainLine {
    line: usize,
    name: String,
    class: PriorityClass,
    place: TrainPlace,
    speed: f64,
    length: Option<f64>,
    range: Option<f64>,
    route: Vec<String>,
    next: Option<String>,
    activate: u64,
}

enum TrainPlace {
    Track { track: String, position: f64, direction: Direction },
    Platform { station: String, platform: usize },
}

fn parse_class(s: &str, line: usize) -> Result<PriorityClass, ScenarioError> {
    match s {
        "premium" => Ok(PriorityClass::Premium),
        "superfast" | "superfastexpress" => Ok(PriorityClass::SuperfastExpress),
        "expressmail" | "express" | "mail" => Ok(PriorityClass::ExpressMail),
        "passenger" | "fastpassenger" => Ok(PriorityClass::Passenger),
        "freight" => Ok(PriorityClass::Freight),
        other => Err(perr(line, format!("unknown train class `{other}`"))),
    }
}

fn parse_direction(s: &str, line: usize) -> Result<Direction, ScenarioError> {
    match s {
        "up" | "1" => Ok(Direction::Up),
        "down" | "0" => Ok(Direction::Down),
        other => Err(perr(line, format!("unknown direction `{other}` (use up or down)"))),
    }
}

pub fn parse_scenario(text: &str, name: &str) -> Result<Scenario, ScenarioError> {
    let mut section = String::new();
    let mut net = NetworkSection::default();
    let mut trains: Vec<TrainLine> = Vec::new();
    let mut config = SimConfig::default();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(perr(line_no, "unterminated section header"));
            }
            section = line[1..line.len() - 1].to_string();
            if !matches!(section.as_str(), "network" | "trains" | "constants" | "run") {
                return Err(perr(line_no, format!("unknown section `[{section}]`")));
            }
            continue;
        }
        let tokens = tokenize(line);
        match section.as_str() {
            "network" => parse_network_line(&tokens, line_no, &mut net)?,
            "trains" => trains.push(parse_train_line(&tokens, line_no)?),
            "constants" => parse_constants_line(&tokens, line_no, &mut config)?,
            "run" => parse_run_line(&tokens, line_no, &mut config)?,
            _ => return Err(perr(line_no, "content before the first section header")),
        }
    }

    build_scenario(name, net, trains, config)
}

fn parse_network_line(
    tokens: &[String],
    line: usize,
    net: &mut NetworkSection,
) -> Result<(), ScenarioError> {
    let kind = tokens[0].as_str();
    match kind {
        "station" | "junction" => {
            let name = tokens
                .get(1)
                .ok_or_else(|| perr(line, format!("{kind} needs a name")))?
                .clone();
            let mut attrs = Attrs::parse(&tokens[2..], line, kind)?;
            let range = match attrs.take(&["range", "comm_range"]) {
                Some((f, v)) => parse_length(&v, line, &f)?,
                None => 200.0,
            };
            attrs.finish()?;
            if kind == "station" {
                net.stations.push((line, name, range));
            } else {
                net.junctions.push((line, name, range));
            }
        }
        "track" => {
            let name =
                tokens.get(1).ok_or_else(|| perr(line, "track needs a name"))?.clone();
            let mut attrs = Attrs::parse(&tokens[2..], line, "track")?;
            let (_, from) = attrs.require(&["from"])?;
            let (_, to) = attrs.require(&["to"])?;
            let (f, len) = attrs.require(&["length"])?;
            let length = parse_length(&len, line, &f)?;
            attrs.finish()?;
            net.tracks.push((line, TrackDef { name, from, to, length }));
        }
        "platform" => {
            let station =
                tokens.get(1).ok_or_else(|| perr(line, "platform needs a station"))?.clone();
            let mut attrs = Attrs::parse(&tokens[2..], line, "platform")?;
            let (_, p) = attrs.require(&["p", "index"])?;
            let index: usize =
                p.parse().map_err(|_| perr(line, format!("bad platform index `{p}`")))?;
            let (_, track) = attrs.require(&["track"])?;
            attrs.finish()?;
            net.platforms.push((line, station, index, track));
        }
        other => return Err(perr(line, format!("unknown network entry `{other}`"))),
    }
    Ok(())
}

fn parse_train_line(tokens: &[String], line: usize) -> Result<TrainLine, ScenarioError> {
    if tokens[0] != "train" {
        return Err(perr(line, format!("unknown trains entry `{}`", tokens[0])));
    }
    let name = tokens.get(1).ok_or_else(|| perr(line, "train needs a name"))?.clone();
    let mut attrs = Attrs::parse(&tokens[2..], line, "train")?;

    let class = match attrs.take(&["class", "category"]) {
        Some((_, v)) => parse_class(&v, line)?,
        None => PriorityClass::Passenger,
    };
    let (f, sp) = attrs.require(&["speed"])?;
    let speed = parse_speed(&sp, line, &f)?;

    let place = if let Some((_, spec)) = attrs.take(&["platform"]) {
        let (station, p) = spec
            .split_once(':')
            .ok_or_else(|| perr(line, "platform occupancy is written station:index"))?;
        let platform: usize =
            p.parse().map_err(|_| perr(line, format!("bad platform index `{p}`")))?;
        TrainPlace::Platform { station: station.to_string(), platform }
    } else {
        let (_, track) = attrs.require(&["track"])?;
        let (pf, pos) = attrs.require(&["position", "pos"])?;
        let position = parse_length(&pos, line, &pf)?;
        let (_, dir) = attrs.require(&["direction", "dir"])?;
        let direction = parse_direction(&dir, line)?;
        TrainPlace::Track { track, position, direction }
    };

    let length = match attrs.take(&["length"]) {
        Some((f, v)) => Some(parse_length(&v, line, &f)?),
        None => None,
    };
    let range = match attrs.take(&["range", "comm_range"]) {
        Some((f, v)) => Some(parse_length(&v, line, &f)?),
        None => None,
    };
    let route = match attrs.take(&["route"]) {
        Some((_, v)) => v.split(',').map(|s| s.to_string()).collect(),
        None => Vec::new(),
    };
    let next = attrs.take(&["next"]).map(|(_, v)| v);
    let activate = match attrs.take(&["activate"]) {
        Some((_, v)) => {
            v.parse().map_err(|_| perr(line, format!("bad activation tick `{v}`")))?
        }
        None => 0,
    };
    attrs.finish()?;
    Ok(TrainLine { line, name, class, place, speed, length, range, route, next, activate })
}

fn parse_constants_line(
    tokens: &[String],
    line: usize,
    config: &mut SimConfig,
) -> Result<(), ScenarioError> {
    let mut attrs = Attrs::parse(tokens, line, "constants")?;
    if let Some((_, v)) = attrs.take(&["mu_k"]) {
        config.kin.mu_k = parse_number(&v, line, "mu_k")?;
    }
    if let Some((_, v)) = attrs.take(&["g"]) {
        config.kin.g = parse_number(&v, line, "g")?;
    }
    if let Some((f, v)) = attrs.take(&["headway"]) {
        config.headway = parse_length(&v, line, &f)?;
    }
    if let Some((f, v)) = attrs.take(&["critical"]) {
        config.critical = parse_length(&v, line, &f)?;
    }
    if let Some((f, v)) = attrs.take(&["default_range"]) {
        config.default_comm_range = parse_length(&v, line, &f)?;
    }
    if let Some((_, v)) = attrs.take(&["beta_scale"]) {
        config.beta_scale = parse_number(&v, line, "beta_scale")?;
    }
    attrs.finish()
}

fn parse_run_line(
    tokens: &[String],
    line: usize,
    config: &mut SimConfig,
) -> Result<(), ScenarioError> {
    let mut attrs = Attrs::parse(tokens, line, "run")?;
    if let Some((f, v)) = attrs.take(&["tick"]) {
        config.tick_seconds = parse_duration(&v, line, &f)?;
    }
    if let Some((_, v)) = attrs.take(&["horizon"]) {
        config.horizon =
            v.parse().map_err(|_| perr(line, format!("bad horizon `{v}`")))?;
    }
    if let Some((_, v)) = attrs.take(&["mode"]) {
        config.mode = parse_mode(&v).map_err(|m| perr(line, m))?;
    }
    if let Some((_, v)) = attrs.take(&["seed"]) {
        config.seed = v.parse().map_err(|_| perr(line, format!("bad seed `{v}`")))?;
    }
    if let Some((_, v)) = attrs.take(&["latency"]) {
        config.latency_ticks =
            v.parse().map_err(|_| perr(line, format!("bad latency `{v}`")))?;
    }
    attrs.finish()
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "distributed" => Ok(Mode::Distributed),
        "centralized" => Ok(Mode::Centralized),
        other => Err(format!("unknown mode `{other}` (distributed or centralized)")),
    }
}

fn build_scenario(
    name: &str,
    net: NetworkSection,
    train_lines: Vec<TrainLine>,
    config: SimConfig,
) -> Result<Scenario, ScenarioError> {
    let mut platform_map: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
    for (_, station, index, track) in &net.platforms {
        platform_map.entry(station.clone()).or_default().push((*index, track.clone()));
    }
    let mut vertices: Vec<VertexDef> = Vec::new();
    for (_, name, range) in &net.stations {
        vertices.push(VertexDef {
            name: name.clone(),
            comm_range: *range,
            kind: VertexDefKind::Station {
                platforms: platform_map.remove(name).unwrap_or_default(),
            },
        });
    }
    if let Some(station) = platform_map.keys().next() {
        return Err(ScenarioError::Validation(format!(
            "platform declared for unknown station `{station}`"
        )));
    }
    for (_, name, range) in &net.junctions {
        vertices.push(VertexDef {
            name: name.clone(),
            comm_range: *range,
            kind: VertexDefKind::Junction,
        });
    }
    let tracks: Vec<TrackDef> = net.tracks.into_iter().map(|(_, t)| t).collect();
    let network =
        build_network(vertices, tracks).map_err(|e| ScenarioError::Validation(e.to_string()))?;

    let mut trains = Vec::with_capacity(train_lines.len());
    for t in train_lines {
        let occupancy = match &t.place {
            TrainPlace::Track { track, position, direction } => {
                let track_id = network.find_track(track).ok_or_else(|| {
                    perr(t.line, format!("train `{}` references unknown track `{track}`", t.name))
                })?;
                Occupancy::OnTrack { track: track_id, position: *position, direction: *direction }
            }
            TrainPlace::Platform { station, platform } => {
                let station_id = network.find_vertex(station).ok_or_else(|| {
                    perr(t.line, format!("train `{}` references unknown station `{station}`", t.name))
                })?;
                Occupancy::AtPlatform { station: station_id, platform: *platform }
            }
        };
        let mut route = Vec::with_capacity(t.route.len());
        for hop in &t.route {
            route.push(network.find_track(hop).ok_or_else(|| {
                perr(t.line, format!("train `{}` routes unknown track `{hop}`", t.name))
            })?);
        }
        let next = match &t.next {
            Some(n) => Some(network.find_track(n).ok_or_else(|| {
                perr(t.line, format!("train `{}` plans unknown track `{n}`", t.name))
            })?),
            None => None,
        };
        trains.push(TrainState {
            name: t.name,
            class: t.class,
            occupancy,
            speed: t.speed,
            length: t.length.unwrap_or(200.0),
            comm_range: t.range.unwrap_or(config.default_comm_range),
            route,
            planned_next: next,
            activation_tick: t.activate,
            braking: false,
        });
    }

    let scenario = Scenario { name: name.to_string(), network, trains, config };
    scenario.validate().map_err(|e| ScenarioError::Validation(e.to_string()))?;
    Ok(scenario)
}

/// Reads and validates a scenario file. The scenario name is the file stem.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse_scenario(&text, name)
}
