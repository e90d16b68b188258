//! Deterministic simulation of the distributed coverage protocol.
//!
//! Robots take turns under a round-robin token. A robot first tries to move
//! inside its own partition (type 1); failing that it broadcasts the gains
//! `ρ_v` of a robot appearing at each of its vertices, and the proposal
//! spreads over the neighbour graph as a spanning-tree echo until some robot
//! can backfill profitably (type 2, single- or multi-hop).

mod sim;
mod verify;
mod view;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use sim::{run_distributed, run_distributed_with, MoveOutcome, MultiHopCost, ProtocolOptions, Simulator, WaveOutcome};
pub use verify::{
    non_neighbor_cost_changes, verify_no_improving_swap, verify_trace, SwapCheck, TraceCheck,
};
pub use view::{compute_delta, compute_ell, compute_ell_v, compute_rho, LocalView, NeighborInfo};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub uid: usize,
    pub position: usize,
    pub active: bool,
    pub neighbor_set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MessageBody {
    Proposal {
        wave_id: u64,
        origin_uid: usize,
        gamma: Arc<BTreeMap<usize, f64>>,
        counter: u32,
    },
    Acceptance {
        wave_id: u64,
        vertex: usize,
        total_change: f64,
        acceptor: usize,
    },
    Rejection {
        wave_id: u64,
    },
    Acknowledgment {
        wave_id: u64,
        vertex: usize,
    },
    Completion {
        origin_uid: usize,
    },
}

impl MessageBody {
    pub fn wave_id(&self) -> Option<u64> {
        match *self {
            MessageBody::Proposal { wave_id, .. }
            | MessageBody::Acceptance { wave_id, .. }
            | MessageBody::Rejection { wave_id }
            | MessageBody::Acknowledgment { wave_id, .. } => Some(wave_id),
            MessageBody::Completion { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub sender: usize,
    pub receiver: usize,
    #[serde(flatten)]
    pub body: MessageBody,
}

/// A relocation chain: `chain[0]` is the origin, the last entry is the
/// accepting robot, and `targets[k]` is where `chain[k]` ends up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainMove {
    pub wave_id: u64,
    pub vertex: usize,
    pub chain: Vec<usize>,
    pub targets: Vec<usize>,
    pub predicted: f64,
    pub realized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    #[serde(rename = "type1-move")]
    Type1Move {
        robot: usize,
        from: usize,
        to: usize,
        predicted: f64,
        realized: f64,
    },
    #[serde(rename = "type2-single-hop")]
    Type2SingleHop(ChainMove),
    #[serde(rename = "type2-multi-hop")]
    Type2MultiHop(ChainMove),
    MessageSent(Message),
    WaveRejected { wave_id: u64, origin: usize },
    Completion { robot: usize, recipients: Vec<usize> },
    ProtocolError { wave_id: Option<u64>, detail: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Scheduler turn during which the event happened.
    pub step: usize,
    #[serde(flatten)]
    pub event: TraceEvent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WaveCounts {
    pub wave_id: u64,
    pub origin: usize,
    pub proposals: usize,
    pub responses: usize,
    pub acknowledgments: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MoveShares {
    pub type1: usize,
    pub type2_single: usize,
    pub type2_multi: usize,
}

impl MoveShares {
    pub fn total(&self) -> usize {
        self.type1 + self.type2_single + self.type2_multi
    }

    /// Fractions of type-1, single-hop and multi-hop moves.
    pub fn fractions(&self) -> [f64; 3] {
        let t = self.total();
        if t == 0 {
            return [0.0; 3];
        }
        let t = t as f64;
        [
            self.type1 as f64 / t,
            self.type2_single as f64 / t,
            self.type2_multi as f64 / t,
        ]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTrace {
    pub robots: usize,
    pub epsilon0: f64,
    pub initial_cost: f64,
    pub events: Vec<TraceRecord>,
    /// `D(Q)` after each accepted move.
    pub cost_curve: Vec<f64>,
    pub waves: Vec<WaveCounts>,
}

impl ProtocolTrace {
    pub fn move_shares(&self) -> MoveShares {
        let mut s = MoveShares::default();
        for r in &self.events {
            match r.event {
                TraceEvent::Type1Move { .. } => s.type1 += 1,
                TraceEvent::Type2SingleHop(_) => s.type2_single += 1,
                TraceEvent::Type2MultiHop(_) => s.type2_multi += 1,
                _ => {}
            }
        }
        s
    }

    /// Wave messages (proposals, responses, acknowledgments) over the run.
    pub fn total_messages(&self) -> usize {
        self.waves
            .iter()
            .map(|w| w.proposals + w.responses + w.acknowledgments)
            .sum()
    }

    pub fn protocol_errors(&self) -> usize {
        self.events
            .iter()
            .filter(|r| matches!(r.event, TraceEvent::ProtocolError { .. }))
            .count()
    }

    /// One JSON object per event.
    pub fn to_json_lines(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.events {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Summary {
            initial_cost: f64,
            final_cost: f64,
            moves: MoveShares,
            fractions: [f64; 3],
            waves: usize,
            messages: usize,
        }
        let moves = self.move_shares();
        Ok(serde_json::to_string(&Summary {
            initial_cost: self.initial_cost,
            final_cost: self.cost_curve.last().copied().unwrap_or(self.initial_cost),
            fractions: moves.fractions(),
            moves,
            waves: self.waves.len(),
            messages: self.total_messages(),
        })?)
    }
}
