//! Pure distance/speed mathematics: braking distance, headway gap,
//! critical-distance checks, communication-range predicate, junction
//! distances.
//!
//! All operations are pure functions of their arguments and safe for
//! parallel invocation. Speeds are m/s, distances meters.

use core::fmt;

use crate::net::{train_separation, RailNetwork, TrainState, VertexId};

/// Kinetic friction coefficient and gravity used by the braking model.
/// Steel-on-steel friction of 0.42 is the standard figure for rail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicConstants {
    pub mu_k: f64,
    pub g: f64,
}

impl Default for KinematicConstants {
    fn default() -> Self {
        KinematicConstants { mu_k: 0.42, g: 9.81 }
    }
}

impl KinematicConstants {
    /// Full-brake deceleration, mu_k * g.
    pub fn deceleration(&self) -> f64 {
        self.mu_k * self.g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KinematicsError {
    NegativeSpeed(f64),
    DisconnectedTracks,
    Unreachable,
    InvalidLimits { headway: f64, critical: f64 },
}

impl fmt::Display for KinematicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KinematicsError::NegativeSpeed(v) => write!(f, "negative speed {v}"),
            KinematicsError::DisconnectedTracks => write!(f, "trains on disconnected tracks"),
            KinematicsError::Unreachable => write!(f, "no along-track path to the target vertex"),
            KinematicsError::InvalidLimits { headway, critical } => {
                write!(f, "critical distance {critical} must be below headway {headway}")
            }
        }
    }
}

impl core::error::Error for KinematicsError {}

/// Distance traveled from full brake application to standstill:
/// speed^2 / (2 * mu_k * g). Strictly increasing in speed, zero at rest.
pub fn braking_distance(speed: f64, k: &KinematicConstants) -> Result<f64, KinematicsError> {
    if speed < 0.0 {
        return Err(KinematicsError::NegativeSpeed(speed));
    }
    Ok(speed * speed / (2.0 * k.mu_k * k.g))
}

/// Current tip-to-tail separation of a pair together with the configured
/// headway and critical thresholds it is judged against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    /// Actual separation right now (tip-to-tail, or tip-to-tip for opposing
    /// geometry); overlap reports 0.
    pub gap: f64,
    pub headway: f64,
    pub critical: f64,
}

impl GapReport {
    pub fn below_headway(&self) -> bool {
        self.gap < self.headway
    }
}

/// Measures the current separation between two train bodies along the rails.
pub fn headway_gap(
    a: &TrainState,
    b: &TrainState,
    net: &RailNetwork,
    headway: f64,
    critical: f64,
) -> Result<GapReport, KinematicsError> {
    if !(critical < headway) {
        return Err(KinematicsError::InvalidLimits { headway, critical });
    }
    let gap = train_separation(net, a, b);
    if gap.is_infinite() {
        return Err(KinematicsError::DisconnectedTracks);
    }
    Ok(GapReport { gap, headway, critical })
}

/// Two agents can exchange messages directly iff their separation does not
/// exceed the sum of their device radii.
pub fn comm_reachable(gap: f64, r_a: f64, r_b: f64) -> bool {
    gap <= r_a + r_b
}

/// True iff both trains can brake to a stop and still end up separated by at
/// least the critical distance: (gap - (brake_a + brake_b)) >= critical.
pub fn safe_stop_check(gap: f64, brake_a: f64, brake_b: f64, critical: f64) -> bool {
    gap - (brake_a + brake_b) >= critical
}

/// Along-track distance from the train tip (leading end in its travel
/// direction) to a junction vertex.
pub fn distance_to_junction(
    train: &TrainState,
    junction: VertexId,
    net: &RailNetwork,
) -> Result<f64, KinematicsError> {
    let (tip, toward) = train.heading(net).ok_or(KinematicsError::Unreachable)?;
    let track = match &train.occupancy {
        crate::net::Occupancy::OnTrack { track, .. } => *track,
        _ => return Err(KinematicsError::Unreachable),
    };
    let t = net.track(track);
    let remaining = if toward == t.ends.1 { t.length - tip } else { tip };
    let d = remaining + net.vertex_distance(toward, junction);
    if d.is_infinite() {
        return Err(KinematicsError::Unreachable);
    }
    Ok(d)
}
