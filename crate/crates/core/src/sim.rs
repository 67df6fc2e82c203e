//! Synchronous round engine with per-edge bandwidth enforcement and
//! FIFO multiplexing of concurrently running algorithm instances.
//!
//! A node program sees its own id and neighbor list; messages sent in
//! logical round `r` are available to the receiver in round `r + 1`.
//! Every directed edge carries at most one physical message per round.
//! An instance advances to its next logical round once all of its
//! messages from the previous one have crossed their edges, so a single
//! instance runs at full speed and several instances share edges in
//! arrival order.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{CommGraph, VertexId, INF};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("message of {bits} bits from {from} to {to} exceeds bandwidth {limit}")]
    BandwidthExceeded { from: VertexId, to: VertexId, bits: usize, limit: usize },
    #[error("round limit {limit} exceeded in `{label}`")]
    RoundLimitExceeded { limit: u64, label: String },
    #[error("{from} sent to non-neighbor {to}")]
    MisaddressedMessage { from: VertexId, to: VertexId },
}

#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    pub bandwidth_factor: usize,
    pub max_rounds: u64,
    /// Size of the id space when running on a subnetwork whose vertices
    /// were relabelled; bandwidth is set by the larger of this and `n`.
    pub id_universe: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { bandwidth_factor: 32, max_rounds: 5_000_000, id_universe: 0 }
    }
}

impl SimConfig {
    /// Bandwidth in bits on a network of `n` vertices.
    pub fn limit(&self, n: usize) -> usize {
        bandwidth(n.max(self.id_universe), self.bandwidth_factor)
    }
}

pub fn id_bits(n: usize) -> usize {
    let mut b = 0;
    while (1usize << b) < n {
        b += 1;
    }
    b.max(1)
}

/// `B = bandwidth_factor * ceil(log2 n)`, with the logarithm floored at 4
/// so that fixed-size headers fit on toy networks.
pub fn bandwidth(n: usize, factor: usize) -> usize {
    factor * id_bits(n).max(4)
}

/// Encoded size of an integer field: flag bit, 6-bit length prefix, payload.
/// The reserved infinity value costs only the flag and prefix.
pub fn value_bits(x: u64) -> usize {
    if x == INF {
        7
    } else {
        7 + (64 - x.leading_zeros() as usize).max(1)
    }
}

pub trait Message {
    fn bits(&self, id_bits: usize) -> usize;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Run again next round even without incoming messages.
    Active,
    /// Run only when messages arrive.
    Idle,
    /// Never run again.
    Halted,
}

pub struct Outbox<M> {
    buf: Vec<(VertexId, M)>,
}

impl<M> Outbox<M> {
    pub fn send(&mut self, to: VertexId, msg: M) {
        self.buf.push((to, msg));
    }
    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }
}

pub trait NodeProgram {
    type State;
    type Msg: Message;
    type Output;
    fn init(&self, v: VertexId, nbrs: &[VertexId]) -> (Self::State, Status);
    fn round(
        &self,
        v: VertexId,
        nbrs: &[VertexId],
        st: &mut Self::State,
        inbox: &[(VertexId, Self::Msg)],
        out: &mut Outbox<Self::Msg>,
    ) -> Status;
    fn output(&self, v: VertexId, st: &Self::State) -> Self::Output;
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub rounds: u64,
    pub max_message_bits: usize,
    pub messages_sent: u64,
    pub per_algorithm_rounds: BTreeMap<String, u64>,
}

impl RunStats {
    /// Sequential composition.
    pub fn then(&mut self, o: &RunStats) {
        self.rounds += o.rounds;
        self.max_message_bits = self.max_message_bits.max(o.max_message_bits);
        self.messages_sent += o.messages_sent;
        for (k, v) in &o.per_algorithm_rounds {
            *self.per_algorithm_rounds.entry(k.clone()).or_insert(0) += v;
        }
    }

    /// Composition of runs on vertex-disjoint parts: they share no edge, so
    /// multiplexing them costs the maximum of their round counts.
    pub fn parallel<'a>(items: impl IntoIterator<Item = &'a RunStats>) -> RunStats {
        let mut out = RunStats::default();
        for o in items {
            out.rounds = out.rounds.max(o.rounds);
            out.max_message_bits = out.max_message_bits.max(o.max_message_bits);
            out.messages_sent += o.messages_sent;
            for (k, v) in &o.per_algorithm_rounds {
                let e = out.per_algorithm_rounds.entry(k.clone()).or_insert(0);
                *e = (*e).max(*v);
            }
        }
        out
    }

    pub fn labelled(mut self, label: &str) -> RunStats {
        self.per_algorithm_rounds.clear();
        self.per_algorithm_rounds.insert(label.to_string(), self.rounds);
        self
    }
}

/// A packet handed to the multiplexer.
#[derive(Clone, Copy, Debug)]
pub struct Packet {
    pub from: VertexId,
    pub to: VertexId,
    pub bits: usize,
    pub slot: u32,
}

/// Type-erased algorithm instance.
pub trait Instance {
    fn label(&self) -> &str;
    /// Execute one logical round. Returns the emitted packets.
    fn compute(&mut self, limit: usize, idb: usize, out: &mut Vec<Packet>) -> Result<(), SimError>;
    fn deliver(&mut self, slot: u32);
    fn finished(&self) -> bool;
}

pub struct Runner<'a, P: NodeProgram> {
    prog: &'a P,
    comm: &'a CommGraph,
    label: String,
    states: Vec<P::State>,
    status: Vec<Status>,
    inbox: Vec<Vec<(VertexId, P::Msg)>>,
    has_mail: Vec<bool>,
    mailed: Vec<VertexId>,
    active: Vec<VertexId>,
    slab: Vec<Option<(VertexId, VertexId, P::Msg)>>,
    stamp: Vec<usize>,
    logical: usize,
    done: bool,
    host: Option<Host<'a>>,
}

/// Placement of virtual nodes on physical ones. Messages between virtual
/// nodes on the same host are delivered locally; others cross the physical
/// edge between the hosts and carry `tag_bits` extra bits of addressing.
#[derive(Clone, Copy)]
pub struct Host<'a> {
    pub of: &'a [VertexId],
    pub tag_bits: usize,
}

impl<'a, P: NodeProgram> Runner<'a, P> {
    pub fn new(comm: &'a CommGraph, prog: &'a P, label: &str) -> Self {
        let n = comm.n();
        let mut states = Vec::with_capacity(n);
        let mut status = Vec::with_capacity(n);
        let mut active = Vec::new();
        for v in 0..n {
            let (s, st) = prog.init(v, comm.neighbors(v));
            if st == Status::Active {
                active.push(v);
            }
            states.push(s);
            status.push(st);
        }
        let mut inbox = Vec::with_capacity(n);
        inbox.resize_with(n, Vec::new);
        Runner {
            prog,
            comm,
            label: label.to_string(),
            states,
            status,
            inbox,
            has_mail: vec![false; n],
            mailed: Vec::new(),
            active,
            slab: Vec::new(),
            stamp: vec![usize::MAX; n],
            logical: 0,
            done: false,
            host: None,
        }
    }

    /// Run the program on a virtual graph whose nodes live on the vertices
    /// of the multiplexer's physical graph.
    pub fn hosted(virt: &'a CommGraph, prog: &'a P, label: &str, host: Host<'a>) -> Self {
        let mut r = Runner::new(virt, prog, label);
        r.host = Some(host);
        r
    }

    pub fn outputs(&self) -> Vec<P::Output> {
        (0..self.states.len()).map(|v| self.prog.output(v, &self.states[v])).collect()
    }

    pub fn states(&self) -> &[P::State] {
        &self.states
    }
}

impl<'a, P: NodeProgram> Instance for Runner<'a, P> {
    fn label(&self) -> &str {
        &self.label
    }

    fn compute(&mut self, limit: usize, idb: usize, out: &mut Vec<Packet>) -> Result<(), SimError> {
        self.slab.clear();
        self.logical += 1;
        let mut todo: Vec<VertexId> = std::mem::take(&mut self.active);
        todo.append(&mut self.mailed);
        todo.sort_unstable();
        todo.dedup();
        let mut ob = Outbox { buf: Vec::new() };
        let mut empty = Vec::new();
        let mut local = Vec::new();
        for v in todo {
            self.has_mail[v] = false;
            let mut inbox = std::mem::replace(&mut self.inbox[v], std::mem::take(&mut empty));
            if self.status[v] == Status::Halted {
                inbox.clear();
                empty = inbox;
                continue;
            }
            inbox.sort_by_key(|m| m.0);
            let nbrs = self.comm.neighbors(v);
            let st = self.prog.round(v, nbrs, &mut self.states[v], &inbox, &mut ob);
            inbox.clear();
            empty = inbox;
            self.status[v] = st;
            if st == Status::Active {
                self.active.push(v);
            }
            for (to, msg) in ob.buf.drain(..) {
                if nbrs.binary_search(&to).is_err() {
                    return Err(SimError::MisaddressedMessage { from: v, to });
                }
                let mut bits = msg.bits(idb);
                if let Some(h) = self.host {
                    if h.of[v] == h.of[to] {
                        local.push(self.slab.len() as u32);
                        self.slab.push(Some((v, to, msg)));
                        continue;
                    }
                    bits += h.tag_bits;
                }
                if bits > limit {
                    return Err(SimError::BandwidthExceeded { from: v, to, bits, limit });
                }
                // A second message on the same edge in one logical round
                // would need twice the bandwidth.
                let key = self.logical * self.comm.n() + v;
                if self.stamp[to] == key {
                    return Err(SimError::BandwidthExceeded { from: v, to, bits: 2 * bits, limit });
                }
                self.stamp[to] = key;
                let (pf, pt) = match self.host {
                    Some(h) => (h.of[v], h.of[to]),
                    None => (v, to),
                };
                out.push(Packet { from: pf, to: pt, bits, slot: self.slab.len() as u32 });
                self.slab.push(Some((v, to, msg)));
            }
        }
        for slot in local {
            self.deliver(slot);
        }
        if out.is_empty() && self.active.is_empty() && self.mailed.is_empty() {
            self.done = true;
        }
        Ok(())
    }

    fn deliver(&mut self, slot: u32) {
        let (from, to, msg) = self.slab[slot as usize].take().expect("delivered twice");
        self.inbox[to].push((from, msg));
        if !self.has_mail[to] {
            self.has_mail[to] = true;
            self.mailed.push(to);
        }
    }

    fn finished(&self) -> bool {
        self.done
    }
}

/// Run a single program until every node is halted or idle with no
/// message in flight.
pub fn run<P: NodeProgram>(
    comm: &CommGraph,
    prog: &P,
    label: &str,
    cfg: &SimConfig,
) -> Result<(Vec<P::Output>, RunStats), SimError> {
    let mut r = Runner::new(comm, prog, label);
    let stats = run_multiplexed(comm, &mut [&mut r], cfg)?;
    Ok((r.outputs(), stats))
}

/// Run several independent programs of one type concurrently.
pub fn run_many<P: NodeProgram>(
    comm: &CommGraph,
    progs: &[P],
    label: &str,
    cfg: &SimConfig,
) -> Result<(Vec<Vec<P::Output>>, RunStats), SimError> {
    let mut runners: Vec<Runner<P>> = progs.iter().map(|p| Runner::new(comm, p, label)).collect();
    let mut refs: Vec<&mut dyn Instance> = runners.iter_mut().map(|r| r as &mut dyn Instance).collect();
    let stats = run_multiplexed(comm, &mut refs, cfg)?;
    Ok((runners.iter().map(|r| r.outputs()).collect(), stats))
}

/// Run independent instances concurrently. Each directed edge holds a FIFO
/// of pending messages and transmits one per round.
pub fn run_multiplexed(
    comm: &CommGraph,
    instances: &mut [&mut dyn Instance],
    cfg: &SimConfig,
) -> Result<RunStats, SimError> {
    let n = comm.n();
    let limit = bandwidth(n.max(cfg.id_universe), cfg.bandwidth_factor);
    let idb = id_bits(n.max(cfg.id_universe));
    let mut offset = Vec::with_capacity(n + 1);
    offset.push(0usize);
    for v in 0..n {
        offset.push(offset[v] + comm.neighbors(v).len());
    }
    let mut queues: Vec<VecDeque<(u32, u32, usize)>> = vec![VecDeque::new(); offset[n]];
    let mut busy: Vec<usize> = Vec::new();
    let mut in_flight = vec![0usize; instances.len()];
    let mut last_tx = vec![0u64; instances.len()];
    let mut stats = RunStats::default();
    let mut round: u64 = 0;
    let mut packets = Vec::new();
    loop {
        let mut alive = false;
        for (i, inst) in instances.iter_mut().enumerate() {
            if inst.finished() {
                continue;
            }
            if in_flight[i] == 0 {
                packets.clear();
                inst.compute(limit, idb, &mut packets)?;
                for p in &packets {
                    let idx = comm
                        .neighbors(p.from)
                        .binary_search(&p.to)
                        .map_err(|_| SimError::MisaddressedMessage { from: p.from, to: p.to })?;
                    let e = offset[p.from] + idx;
                    if queues[e].is_empty() {
                        busy.push(e);
                    }
                    queues[e].push_back((i as u32, p.slot, p.bits));
                }
                in_flight[i] += packets.len();
            }
            if !inst.finished() {
                alive = true;
            }
        }
        if !alive {
            break;
        }
        round += 1;
        if round > cfg.max_rounds {
            let label = instances
                .iter()
                .find(|i| !i.finished())
                .map(|i| i.label().to_string())
                .unwrap_or_default();
            return Err(SimError::RoundLimitExceeded { limit: cfg.max_rounds, label });
        }
        let mut still = Vec::with_capacity(busy.len());
        for &e in &busy {
            let (i, slot, bits) = queues[e].pop_front().unwrap();
            instances[i as usize].deliver(slot);
            in_flight[i as usize] -= 1;
            last_tx[i as usize] = round;
            stats.messages_sent += 1;
            stats.max_message_bits = stats.max_message_bits.max(bits);
            stats.rounds = round;
            if !queues[e].is_empty() {
                still.push(e);
            }
        }
        busy = still;
    }
    for (i, inst) in instances.iter().enumerate() {
        let e = stats.per_algorithm_rounds.entry(inst.label().to_string()).or_insert(0);
        *e = (*e).max(last_tx[i]);
    }
    debug_assert!(stats.max_message_bits <= limit);
    Ok(stats)
}

/// Flood from a set of sources; each node outputs its hop distance to the
/// nearest source, `None` if unreached.
pub struct Flood {
    pub sources: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hop(pub u64);

impl Message for Hop {
    fn bits(&self, _: usize) -> usize {
        value_bits(self.0)
    }
}

impl NodeProgram for Flood {
    type State = Option<u64>;
    type Msg = Hop;
    type Output = Option<u64>;

    fn init(&self, v: VertexId, _: &[VertexId]) -> (Self::State, Status) {
        if self.sources[v] {
            (Some(0), Status::Active)
        } else {
            (None, Status::Idle)
        }
    }

    fn round(
        &self,
        _v: VertexId,
        nbrs: &[VertexId],
        st: &mut Self::State,
        inbox: &[(VertexId, Hop)],
        out: &mut Outbox<Hop>,
    ) -> Status {
        let fresh = match *st {
            Some(0) if inbox.is_empty() => Some(0),
            None => inbox.iter().map(|m| m.1 .0).min(),
            _ => None,
        };
        if let Some(d) = fresh {
            *st = Some(d);
            for &w in nbrs {
                if !inbox.iter().any(|m| m.0 == w) {
                    out.send(w, Hop(d + 1));
                }
            }
        }
        Status::Halted
    }

    fn output(&self, _: VertexId, st: &Self::State) -> Self::Output {
        *st
    }
}
