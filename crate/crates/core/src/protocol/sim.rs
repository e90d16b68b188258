use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::view::LocalView;
use super::{ChainMove, Message, MessageBody, ProtocolTrace, RobotState, TraceEvent, TraceRecord, WaveCounts};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::partition::{assign_unchecked, coverage_cost_unchecked, neighbors_unchecked, Configuration, NeighborRule};
use crate::solvers::local_search::exact_delta;
use crate::solvers::{HistoryEntry, SolveResult};

/// How a robot more than one hop from the origin prices leaving its post.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MultiHopCost {
    /// Re-serve the whole partition from the neighbours' positions,
    /// ignoring the proposed vertex.
    AsWritten,
    /// Same pricing as a direct neighbour of the origin: vertices the
    /// proposed vertex takes over are excluded and the proposed vertex
    /// counts as a server.
    #[default]
    VertexAware,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOptions {
    pub epsilon0: f64,
    pub rule: NeighborRule,
    /// Count the origin's own partition in `ρ_v`.
    pub rho_includes_origin: bool,
    pub multi_hop: MultiHopCost,
    /// Hard cap on accepted moves; defaults to `D(Q₀)/ε₀ + 1`.
    pub max_moves: Option<usize>,
}

impl ProtocolOptions {
    pub fn new(epsilon0: f64, rule: NeighborRule) -> Self {
        ProtocolOptions {
            epsilon0,
            rule,
            rho_includes_origin: true,
            multi_hop: MultiHopCost::default(),
            max_moves: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MoveOutcome {
    Type1 { vertex: usize, predicted: f64, realized: f64 },
    Type2 { chain: ChainMove, multi_hop: bool },
    NoMove,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveOutcome {
    pub counts: WaveCounts,
    pub accepted: Option<ChainMove>,
    pub multi_hop: bool,
}

#[derive(Debug, Clone, Copy)]
struct Offer {
    total: f64,
    acceptor: usize,
    vertex: usize,
}

impl Offer {
    fn beats(&self, other: &Option<Offer>) -> bool {
        match other {
            None => true,
            Some(o) => self.total < o.total || (self.total == o.total && self.acceptor < o.acceptor),
        }
    }
}

/// The single protocol world: configuration, derived partitions and
/// neighbour sets, activity flags and the growing trace.
#[derive(Debug, Clone)]
pub struct Simulator<'g> {
    graph: &'g MetricGraph,
    opts: ProtocolOptions,
    positions: Vec<usize>,
    cells: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    active: Vec<bool>,
    cost: f64,
    trace: ProtocolTrace,
    history: Vec<HistoryEntry>,
    next_wave: u64,
    step: usize,
    max_moves: usize,
}

impl<'g> Simulator<'g> {
    pub fn new(graph: &'g MetricGraph, init: &Configuration, opts: ProtocolOptions) -> Result<Self> {
        init.check(graph)?;
        if !(opts.epsilon0 > 0.0 && opts.epsilon0.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon0 must be positive, got {}",
                opts.epsilon0
            )));
        }
        let positions = init.positions().to_vec();
        let cost = coverage_cost_unchecked(graph, &positions);
        let max_moves = opts
            .max_moves
            .unwrap_or_else(|| ((cost / opts.epsilon0).ceil().min(1e7) as usize) + 1);
        let mut sim = Simulator {
            graph,
            opts,
            active: vec![true; positions.len()],
            positions,
            cells: Vec::new(),
            neighbors: Vec::new(),
            cost,
            trace: ProtocolTrace {
                robots: init.len(),
                epsilon0: opts.epsilon0,
                initial_cost: cost,
                ..ProtocolTrace::default()
            },
            history: Vec::new(),
            next_wave: 0,
            step: 0,
            max_moves,
        };
        sim.refresh();
        Ok(sim)
    }

    fn refresh(&mut self) {
        let part = assign_unchecked(self.graph, &self.positions);
        self.cells = part.cells(self.positions.len());
        self.neighbors = neighbors_unchecked(self.graph, &self.positions, &part.radius, self.opts.rule.factor());
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::new(self.positions.clone())
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn trace(&self) -> &ProtocolTrace {
        &self.trace
    }

    pub fn robot_states(&self) -> Vec<RobotState> {
        (0..self.positions.len())
            .map(|uid| RobotState {
                uid,
                position: self.positions[uid],
                active: self.active[uid],
                neighbor_set: self.neighbors[uid].clone(),
            })
            .collect()
    }

    pub fn view(&self, uid: usize) -> LocalView<'_> {
        LocalView::new(self.graph, &self.positions, &self.cells, &self.neighbors, uid)
    }

    fn record(&mut self, event: TraceEvent) {
        self.trace.events.push(TraceRecord { step: self.step, event });
    }

    /// Applies new positions and returns the realized global change.
    fn commit(&mut self, after: Vec<usize>) -> Result<f64> {
        if self.history.len() >= self.max_moves {
            return Err(Error::MoveLimit { limit: self.max_moves });
        }
        let realized = exact_delta(self.graph, &self.positions, &after);
        self.positions = after;
        self.cost = coverage_cost_unchecked(self.graph, &self.positions);
        self.trace.cost_curve.push(self.cost);
        self.history.push(HistoryEntry {
            config: self.configuration(),
            cost: self.cost,
        });
        self.refresh();
        Ok(realized)
    }

    /// One iteration of the local-move loop for robot `uid`: a type-1 move
    /// if one clears `ε₀`, otherwise a proposal wave.
    pub fn local_move_step(&mut self, uid: usize) -> Result<MoveOutcome> {
        if uid >= self.positions.len() {
            return Err(Error::InvalidArgument(format!("no robot {uid}")));
        }
        let view = self.view(uid);
        let mut best: Option<(usize, f64)> = None;
        for &v in view.cell {
            if v == view.position {
                continue;
            }
            let d = view.delta(v);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((v, d));
            }
        }
        if let Some((v, d)) = best.filter(|&(_, d)| d <= -self.opts.epsilon0) {
            let from = self.positions[uid];
            let mut after = self.positions.clone();
            after[uid] = v;
            let realized = self.commit(after)?;
            self.record(TraceEvent::Type1Move {
                robot: uid,
                from,
                to: v,
                predicted: d,
                realized,
            });
            return Ok(MoveOutcome::Type1 {
                vertex: v,
                predicted: d,
                realized,
            });
        }
        let wave = self.resolve_wave(uid)?;
        Ok(match wave.accepted {
            Some(chain) => MoveOutcome::Type2 {
                chain,
                multi_hop: wave.multi_hop,
            },
            None => MoveOutcome::NoMove,
        })
    }

    /// Broadcasts `Γ_origin`, runs the echo to completion and executes the
    /// best accepted chain, if any.
    pub fn resolve_wave(&mut self, origin: usize) -> Result<WaveOutcome> {
        let m = self.positions.len();
        let wave_id = self.next_wave;
        self.next_wave += 1;
        let eps0 = self.opts.epsilon0;

        let gamma: BTreeMap<usize, f64> = {
            let view = self.view(origin);
            view.cell
                .iter()
                .map(|&v| (v, view.rho(v, self.opts.rho_includes_origin)))
                .collect()
        };
        let gamma = Arc::new(gamma);

        let mut counts = WaveCounts {
            wave_id,
            origin,
            proposals: 0,
            responses: 0,
            acknowledgments: 0,
            accepted: false,
        };
        let mut joined = vec![false; m];
        let mut parent = vec![usize::MAX; m];
        let mut pending = vec![0usize; m];
        let mut best: Vec<Option<Offer>> = vec![None; m];
        let mut via: Vec<Option<usize>> = vec![None; m];
        joined[origin] = true;

        let mut outbox: Vec<Message> = Vec::new();
        let mut events: Vec<TraceEvent> = Vec::new();
        let mut send = |msg: Message, outbox: &mut Vec<Message>, counts: &mut WaveCounts| {
            match msg.body {
                MessageBody::Proposal { .. } => counts.proposals += 1,
                MessageBody::Acceptance { .. } | MessageBody::Rejection { .. } => counts.responses += 1,
                MessageBody::Acknowledgment { .. } => counts.acknowledgments += 1,
                MessageBody::Completion { .. } => {}
            }
            events.push(TraceEvent::MessageSent(msg.clone()));
            outbox.push(msg);
        };
        let proposal = |counter: u32| MessageBody::Proposal {
            wave_id,
            origin_uid: origin,
            gamma: Arc::clone(&gamma),
            counter,
        };

        pending[origin] = self.neighbors[origin].len();
        for &j in &self.neighbors[origin] {
            send(
                Message {
                    sender: origin,
                    receiver: j,
                    body: proposal(1),
                },
                &mut outbox,
                &mut counts,
            );
        }

        let mut errors = Vec::new();
        while !outbox.is_empty() {
            let mut inbox = std::mem::take(&mut outbox);
            inbox.sort_by_key(|msg| {
                let counter = match msg.body {
                    MessageBody::Proposal { counter, .. } => counter,
                    _ => 0,
                };
                (msg.receiver, counter, msg.sender)
            });
            for msg in inbox {
                let k = msg.receiver;
                if msg.body.wave_id() != Some(wave_id) {
                    errors.push((msg.body.wave_id(), format!("robot {k} dropped a message for another wave")));
                    continue;
                }
                let reply = |body: MessageBody| Message {
                    sender: k,
                    receiver: msg.sender,
                    body,
                };
                match &msg.body {
                    MessageBody::Proposal { gamma, counter, .. } => {
                        if joined[k] {
                            send(reply(MessageBody::Rejection { wave_id }), &mut outbox, &mut counts);
                            continue;
                        }
                        joined[k] = true;
                        parent[k] = msg.sender;
                        let view = self.view(k);
                        let flat_ell = if *counter > 1 && self.opts.multi_hop == MultiHopCost::AsWritten {
                            Some(view.ell()?)
                        } else {
                            None
                        };
                        let mut offer: Option<Offer> = None;
                        for (&v, &rho) in gamma.iter() {
                            let ell = flat_ell.unwrap_or_else(|| view.ell_v(v));
                            let total = rho + ell;
                            if offer.is_none_or(|o| total < o.total) {
                                offer = Some(Offer {
                                    total,
                                    acceptor: k,
                                    vertex: v,
                                });
                            }
                        }
                        match offer.filter(|o| o.total <= -eps0) {
                            Some(o) => {
                                best[k] = Some(o);
                                send(
                                    reply(MessageBody::Acceptance {
                                        wave_id,
                                        vertex: o.vertex,
                                        total_change: o.total,
                                        acceptor: k,
                                    }),
                                    &mut outbox,
                                    &mut counts,
                                );
                            }
                            None => {
                                let targets: Vec<usize> =
                                    self.neighbors[k].iter().copied().filter(|&j| j != msg.sender).collect();
                                if targets.is_empty() {
                                    send(reply(MessageBody::Rejection { wave_id }), &mut outbox, &mut counts);
                                } else {
                                    pending[k] = targets.len();
                                    for j in targets {
                                        send(
                                            Message {
                                                sender: k,
                                                receiver: j,
                                                body: proposal(counter + 1),
                                            },
                                            &mut outbox,
                                            &mut counts,
                                        );
                                    }
                                }
                            }
                        }
                    }
                    MessageBody::Acceptance { .. } | MessageBody::Rejection { .. } => {
                        if pending[k] == 0 {
                            errors.push((Some(wave_id), format!("robot {k} got an unsolicited response")));
                            continue;
                        }
                        pending[k] -= 1;
                        if let MessageBody::Acceptance {
                            vertex,
                            total_change,
                            acceptor,
                            ..
                        } = msg.body
                        {
                            let o = Offer {
                                total: total_change,
                                acceptor,
                                vertex,
                            };
                            if o.beats(&best[k]) {
                                best[k] = Some(o);
                                via[k] = Some(msg.sender);
                            }
                        }
                        if pending[k] == 0 && k != origin {
                            let body = match best[k] {
                                Some(o) => MessageBody::Acceptance {
                                    wave_id,
                                    vertex: o.vertex,
                                    total_change: o.total,
                                    acceptor: o.acceptor,
                                },
                                None => MessageBody::Rejection { wave_id },
                            };
                            send(
                                Message {
                                    sender: k,
                                    receiver: parent[k],
                                    body,
                                },
                                &mut outbox,
                                &mut counts,
                            );
                        }
                    }
                    MessageBody::Acknowledgment { .. } | MessageBody::Completion { .. } => {
                        errors.push((Some(wave_id), format!("robot {k} got an out-of-phase message")));
                    }
                }
            }
        }

        let mut accepted = None;
        let mut multi_hop = false;
        if let Some(offer) = best[origin] {
            let mut chain = vec![origin];
            let mut cur = origin;
            while let Some(next) = via[cur] {
                chain.push(next);
                cur = next;
            }
            let mut targets = vec![offer.vertex];
            for pair in chain.windows(2) {
                let vertex = self.positions[pair[0]];
                targets.push(vertex);
                send(
                    Message {
                        sender: pair[0],
                        receiver: pair[1],
                        body: MessageBody::Acknowledgment { wave_id, vertex },
                    },
                    &mut outbox,
                    &mut counts,
                );
            }
            multi_hop = chain.len() > 2;
            counts.accepted = true;
            accepted = Some(ChainMove {
                wave_id,
                vertex: offer.vertex,
                chain,
                targets,
                predicted: offer.total,
                realized: 0.0,
            });
        }

        for e in events {
            self.record(e);
        }
        for (wave_id, detail) in errors {
            self.record(TraceEvent::ProtocolError { wave_id, detail });
        }
        self.trace.waves.push(counts);

        if let Some(mv) = accepted.as_mut() {
            let mut after = self.positions.clone();
            for (&r, &t) in mv.chain.iter().zip(&mv.targets) {
                after[r] = t;
            }
            mv.realized = self.commit(after)?;
            let event = if multi_hop {
                TraceEvent::Type2MultiHop(mv.clone())
            } else {
                TraceEvent::Type2SingleHop(mv.clone())
            };
            self.record(event);
        } else {
            self.record(TraceEvent::WaveRejected { wave_id, origin });
        }
        Ok(WaveOutcome {
            counts,
            accepted,
            multi_hop,
        })
    }

    /// Delivers a message outside any wave. No wave is ever in flight
    /// between turns, so wave traffic here is a protocol error.
    pub fn deliver_external(&mut self, msg: Message) {
        if let Some(id) = msg.body.wave_id() {
            self.record(TraceEvent::ProtocolError {
                wave_id: Some(id),
                detail: format!("message from {} to {} names no live wave", msg.sender, msg.receiver),
            });
        }
    }

    /// Token-scheduled turns until every robot is inactive. The token starts
    /// at `seed mod m` and circulates by UID; any accepted move reactivates
    /// every robot.
    pub fn run(mut self, seed: u64) -> Result<(SolveResult, ProtocolTrace)> {
        let m = self.positions.len();
        let mut ptr = (seed % m as u64) as usize;
        while let Some(i) = (0..m).map(|d| (ptr + d) % m).find(|&r| self.active[r]) {
            self.step += 1;
            if self.view(i).cell_cost() > 0.0 {
                let mut moved = false;
                while self.local_move_step(i)? != MoveOutcome::NoMove {
                    moved = true;
                }
                let recipients = self.neighbors[i].clone();
                self.record(TraceEvent::Completion { robot: i, recipients });
                if moved {
                    self.active.iter_mut().for_each(|a| *a = true);
                }
            }
            self.active[i] = false;
            ptr = (i + 1) % m;
        }
        let result = SolveResult {
            config: self.configuration(),
            cost: self.cost,
            iterations: self.history.len(),
            history: self.history,
        };
        Ok((result, self.trace))
    }
}

pub fn run_distributed(
    graph: &MetricGraph,
    init: &Configuration,
    epsilon0: f64,
    rule: NeighborRule,
    seed: u64,
) -> Result<(SolveResult, ProtocolTrace)> {
    run_distributed_with(graph, init, ProtocolOptions::new(epsilon0, rule), seed)
}

pub fn run_distributed_with(
    graph: &MetricGraph,
    init: &Configuration,
    opts: ProtocolOptions,
    seed: u64,
) -> Result<(SolveResult, ProtocolTrace)> {
    Simulator::new(graph, init, opts)?.run(seed)
}
