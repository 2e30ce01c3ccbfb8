//! Fixed-step simulation loop: moves nodes, detects contacts, runs the
//! active router's exchange planning, executes rate-limited serial
//! transfers, generates ping-pong traffic, expires TTLs and logs every
//! event.
//!
//! One run is single-threaded and a pure function of its validated
//! [`ScenarioConfig`]: identical configs produce bit-identical event logs.
//! Independent runs parallelize freely.
//!
//! Contacts normally come from circular-range geometry over the mobility
//! model; [`run_with_contact_schedule`] replays a scripted contact trace
//! instead, which is how synthetic micro-instances are driven.

mod log;
mod metrics;

pub use self::log::{Event, EventKind, EventLog};
pub use self::metrics::{compute_metrics, contact_durations, count_encounters, MetricsReport};

use crate::mobility::{self, MobilityState};
use crate::routing::{
    epidemic_plan, prophet_plan, prophet_transitive, prophet_update_direct, snw_on_contact,
    Message, RouterState, SnwAction,
};
use crate::rng::{node_stream_id, RngStream};
use crate::scenario::{
    validate_scenario, FieldSpec, NodeRole, NodeSpec, Point, RouterKind, RouterParams,
    ScenarioConfig, TrafficSpec, ValidationError,
};
use std::collections::{BTreeMap, BTreeSet, HashSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("contact schedule references unknown node id {0}")]
    UnknownNode(u32),
    #[error("contact interval must satisfy start < end, got [{start}, {end}]")]
    BadInterval { start: f64, end: f64 },
}

/// A scripted interval during which two nodes can transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactInterval {
    pub node_a: u32,
    pub node_b: u32,
    pub start: f64,
    pub end: f64,
}

/// A contact trace replayed in place of geometric detection.
#[derive(Debug, Clone, Default)]
pub struct ContactSchedule {
    pub intervals: Vec<ContactInterval>,
}

/// Pairs (by slice index, lower first) within mutual RF range: Euclidean
/// distance at most `min(R_i, R_j)`, boundary inclusive.
pub fn detect_contacts(positions: &[Point], specs: &[NodeSpec]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..positions.len() {
        for j in (i + 1)..positions.len() {
            let range = specs[i].rf_range.min(specs[j].rf_range);
            if positions[i].distance_sq(positions[j]) <= range * range {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Runtime state of one node.
#[derive(Debug, Clone)]
struct NodeRt {
    pos: Point,
    mob: Option<MobilityState>,
    rng: RngStream,
    router: RouterState,
    /// Ids this node has received as final destination. Advertised during
    /// exchange planning so carriers stop re-offering consumed messages.
    delivered: HashSet<u64>,
}

/// One in-flight transfer: serial, head of its direction's queue.
#[derive(Debug, Clone, Copy)]
struct Flight {
    msg_id: u64,
    bytes_moved: f64,
}

#[derive(Debug, Clone, Default)]
struct OpenContact {
    /// In-flight transfer per direction; index 0 carries low-index to
    /// high-index, 1 the reverse.
    flights: [Option<Flight>; 2],
}

/// One planned direction of one contact for the current step.
struct DirPlan {
    pair: (usize, usize),
    dir: usize,
    sender: usize,
    receiver: usize,
    ids: Vec<u64>,
}

/// The simulation world, stepped at fixed `dt`.
pub struct World {
    specs: Vec<NodeSpec>,
    field: FieldSpec,
    traffic: TrafficSpec,
    router: RouterKind,
    params: RouterParams,
    dt: f64,
    total_steps: u64,
    step_idx: u64,
    nodes: Vec<NodeRt>,
    src_idx: usize,
    dst_idx: usize,
    /// Scripted contact intervals mapped to node indices, when replaying.
    schedule: Option<Vec<(usize, usize, f64, f64)>>,
    open: BTreeMap<(usize, usize), OpenContact>,
    log: EventLog,
    next_msg_id: u64,
    next_emission: u64,
    delivered_ids: HashSet<u64>,
}

impl World {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, EngineError> {
        Self::build(cfg, None)
    }

    pub fn with_contact_schedule(
        cfg: &ScenarioConfig,
        schedule: &ContactSchedule,
    ) -> Result<Self, EngineError> {
        Self::build(cfg, Some(schedule))
    }

    fn build(cfg: &ScenarioConfig, schedule: Option<&ContactSchedule>) -> Result<Self, EngineError> {
        validate_scenario(cfg)?;
        let specs = cfg.nodes.clone();
        let mut nodes = Vec::with_capacity(specs.len());
        for spec in &specs {
            let mut rng = RngStream::new(cfg.seed, node_stream_id(spec.id));
            let (pos, mob) = if spec.role.is_static() {
                (spec.position.expect("validated static position"), None)
            } else {
                let state = mobility::initial_state(spec, &cfg.field, &mut rng, 0.0)
                    .expect("validated mobile node");
                (state.target, Some(state))
            };
            nodes.push(NodeRt {
                pos,
                mob,
                rng,
                router: RouterState::new(cfg.router, spec.buffer_capacity),
                delivered: HashSet::new(),
            });
        }
        let src_idx = specs
            .iter()
            .position(|s| s.role == NodeRole::StaticSource)
            .expect("validated source");
        let dst_idx = specs
            .iter()
            .position(|s| s.role == NodeRole::StaticDestination)
            .expect("validated destination");
        let schedule = match schedule {
            None => None,
            Some(sched) => {
                let mut mapped = Vec::with_capacity(sched.intervals.len());
                for iv in &sched.intervals {
                    if !(iv.start < iv.end) {
                        return Err(EngineError::BadInterval {
                            start: iv.start,
                            end: iv.end,
                        });
                    }
                    let a = specs
                        .iter()
                        .position(|s| s.id == iv.node_a)
                        .ok_or(EngineError::UnknownNode(iv.node_a))?;
                    let b = specs
                        .iter()
                        .position(|s| s.id == iv.node_b)
                        .ok_or(EngineError::UnknownNode(iv.node_b))?;
                    mapped.push((a.min(b), a.max(b), iv.start, iv.end));
                }
                Some(mapped)
            }
        };
        Ok(Self {
            field: cfg.field,
            traffic: cfg.traffic,
            router: cfg.router,
            params: cfg.router_params,
            dt: cfg.time_step,
            total_steps: (cfg.sim_time / cfg.time_step).round() as u64,
            specs,
            step_idx: 0,
            nodes,
            src_idx,
            dst_idx,
            schedule,
            open: BTreeMap::new(),
            log: EventLog::new(),
            next_msg_id: 0,
            next_emission: 1,
            delivered_ids: HashSet::new(),
        })
    }

    pub fn time(&self) -> f64 {
        self.step_idx as f64 * self.dt
    }

    pub fn finished(&self) -> bool {
        self.step_idx >= self.total_steps
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn run_to_end(&mut self) {
        while !self.finished() {
            self.step();
        }
    }

    pub fn into_results(self) -> (MetricsReport, EventLog) {
        let report = compute_metrics(&self.log);
        (report, self.log)
    }

    fn push_event(
        &mut self,
        time: f64,
        kind: EventKind,
        msg_id: Option<u64>,
        node_a: Option<u32>,
        node_b: Option<u32>,
        detail: Option<&'static str>,
    ) {
        self.log.push(Event {
            time,
            kind,
            msg_id,
            node_a,
            node_b,
            detail,
        });
    }

    /// Ids of a pair ordered low-id first, for contact events.
    fn pair_ids(&self, pair: (usize, usize)) -> (u32, u32) {
        let a = self.specs[pair.0].id;
        let b = self.specs[pair.1].id;
        (a.min(b), a.max(b))
    }

    /// Advances the world by one step: clock, mobility, TTL expiry, contact
    /// transitions, exchange planning, rate-limited transfers with delivery,
    /// and traffic generation, in that order.
    pub fn step(&mut self) {
        self.step_idx += 1;
        let now = self.time();

        self.update_mobility(now);
        self.expire_ttls(now);
        let current = self.current_pairs(now);
        self.close_vanished_contacts(&current, now);
        self.open_new_contacts(&current, now);
        let plans = self.build_plans(now);
        self.execute_plans(plans, now);
        self.generate_traffic(now);
    }

    fn update_mobility(&mut self, now: f64) {
        for (i, node) in self.nodes.iter_mut().enumerate() {
            if let Some(mob) = &mut node.mob {
                if now >= mob.pause_until {
                    *mob = mobility::advance(mob, now, &self.specs[i], &self.field, &mut node.rng)
                        .expect("mobile node role");
                }
                node.pos = mobility::position_at(mob, now).expect("time within leg");
            }
        }
    }

    fn expire_ttls(&mut self, now: f64) {
        for i in 0..self.nodes.len() {
            let dropped = self.nodes[i].router.buffer.expire_ttl(now);
            let node_id = self.specs[i].id;
            for m in dropped {
                self.push_event(now, EventKind::DroppedTtl, Some(m.id), Some(node_id), None, None);
            }
        }
    }

    fn current_pairs(&self, now: f64) -> BTreeSet<(usize, usize)> {
        match &self.schedule {
            Some(intervals) => intervals
                .iter()
                .filter(|&&(_, _, s, e)| s <= now && now < e)
                .map(|&(a, b, _, _)| (a, b))
                .collect(),
            None => {
                let positions: Vec<Point> = self.nodes.iter().map(|n| n.pos).collect();
                detect_contacts(&positions, &self.specs).into_iter().collect()
            }
        }
    }

    fn close_vanished_contacts(&mut self, current: &BTreeSet<(usize, usize)>, now: f64) {
        let vanished: Vec<(usize, usize)> = self
            .open
            .keys()
            .filter(|p| !current.contains(p))
            .copied()
            .collect();
        for pair in vanished {
            let contact = self.open.remove(&pair).expect("key just listed");
            for (dir, flight) in contact.flights.iter().enumerate() {
                if let Some(f) = flight {
                    let (s, r) = direction_nodes(pair, dir);
                    let from = self.specs[s].id;
                    let to = self.specs[r].id;
                    self.push_event(
                        now,
                        EventKind::TransferAborted,
                        Some(f.msg_id),
                        Some(from),
                        Some(to),
                        Some("contact_down"),
                    );
                }
            }
            let (a, b) = self.pair_ids(pair);
            self.push_event(now, EventKind::ContactDown, None, Some(a), Some(b), None);
        }
    }

    fn open_new_contacts(&mut self, current: &BTreeSet<(usize, usize)>, now: f64) {
        for &pair in current {
            if self.open.contains_key(&pair) {
                continue;
            }
            self.open.insert(pair, OpenContact::default());
            let (a, b) = self.pair_ids(pair);
            self.push_event(now, EventKind::ContactUp, None, Some(a), Some(b), None);
            if self.router == RouterKind::Prophet {
                self.prophet_on_encounter(pair.0, pair.1, now);
            }
        }
    }

    /// Direct and transitive predictability updates on a fresh encounter.
    /// Both transitive passes read the peer's post-direct snapshot, so the
    /// result does not depend on processing order.
    fn prophet_on_encounter(&mut self, i: usize, j: usize, now: f64) {
        let p0 = self.params.prophet_p0;
        let beta = self.params.prophet_beta;
        let alpha = self.params.prophet_alpha;
        let i_id = self.specs[i].id;
        let j_id = self.specs[j].id;

        for (node, peer_id) in [(i, j_id), (j, i_id)] {
            let table = self.nodes[node]
                .router.predictability
                .as_mut()
                .expect("prophet router state");
            table.age_to(now, alpha);
            let p = table.get(peer_id);
            let updated = prophet_update_direct(p, p0).expect("closure keeps p in range");
            table.set(peer_id, updated, now);
        }

        let snap_i: Vec<(u32, f64)> = self.nodes[i]
            .router.predictability
            .as_ref()
            .expect("prophet router state")
            .destinations()
            .collect();
        let snap_j: Vec<(u32, f64)> = self.nodes[j]
            .router.predictability
            .as_ref()
            .expect("prophet router state")
            .destinations()
            .collect();

        for (node, self_id, peer_id, peer_snapshot) in
            [(i, i_id, j_id, &snap_j), (j, j_id, i_id, &snap_i)]
        {
            let table = self.nodes[node]
                .router.predictability
                .as_mut()
                .expect("prophet router state");
            let p_peer = table.get(peer_id);
            for &(z, p_peer_z) in peer_snapshot.iter() {
                if z == self_id {
                    continue;
                }
                let p_z = table.get(z);
                let updated = prophet_transitive(p_z, p_peer, p_peer_z, beta)
                    .expect("closure keeps p in range");
                if updated > p_z {
                    table.set(z, updated, now);
                }
            }
        }
    }

    /// Exchange plans for every open contact, both directions, from the
    /// step-start snapshot of all buffers. The in-flight transfer (if any)
    /// stays at the head of its queue, so propagation advances at most one
    /// hop per step.
    fn build_plans(&mut self, now: f64) -> Vec<DirPlan> {
        if self.open.is_empty() {
            return Vec::new();
        }
        if self.router == RouterKind::Prophet {
            let alpha = self.params.prophet_alpha;
            let involved: BTreeSet<usize> =
                self.open.keys().flat_map(|&(i, j)| [i, j]).collect();
            for idx in involved {
                self.nodes[idx]
                    .router.predictability
                    .as_mut()
                    .expect("prophet router state")
                    .age_to(now, alpha);
            }
        }

        let mut plans = Vec::new();
        for (&pair, contact) in &self.open {
            for dir in 0..2 {
                let (s, r) = direction_nodes(pair, dir);
                let mut peer_ids = self.nodes[r].router.buffer.ids();
                peer_ids.extend(&self.nodes[r].delivered);
                let receiver_id = self.specs[r].id;
                let sender = &self.nodes[s];
                let mut ids: Vec<u64> = match self.router {
                    RouterKind::Epidemic => epidemic_plan(&sender.router.buffer, &peer_ids)
                        .iter()
                        .map(|m| m.id)
                        .collect(),
                    RouterKind::SprayAndWait => epidemic_plan(&sender.router.buffer, &peer_ids)
                        .iter()
                        .filter(|m| {
                            !matches!(snw_on_contact(m, m.dst == receiver_id), SnwAction::Hold)
                        })
                        .map(|m| m.id)
                        .collect(),
                    RouterKind::Prophet => {
                        // Final-hop traffic always moves: the peer never has
                        // a predictability entry for itself, so the strict
                        // dominance rule alone would starve the destination.
                        let mut ids: Vec<u64> = epidemic_plan(&sender.router.buffer, &peer_ids)
                            .iter()
                            .filter(|m| m.dst == receiver_id)
                            .map(|m| m.id)
                            .collect();
                        let self_table = sender.router.predictability.as_ref().expect("prophet state");
                        let peer_table = self.nodes[r]
                            .router.predictability
                            .as_ref()
                            .expect("prophet state");
                        ids.extend(
                            prophet_plan(self_table, peer_table, &sender.router.buffer, &peer_ids)
                                .iter()
                                .filter(|m| m.dst != receiver_id)
                                .map(|m| m.id),
                        );
                        ids
                    }
                };
                if let Some(f) = &contact.flights[dir] {
                    ids.retain(|&id| id != f.msg_id);
                    ids.insert(0, f.msg_id);
                }
                if !ids.is_empty() {
                    plans.push(DirPlan {
                        pair,
                        dir,
                        sender: s,
                        receiver: r,
                        ids,
                    });
                }
            }
        }
        plans
    }

    /// True when the message is already riding another link out of `sender`.
    fn in_flight_elsewhere(
        &self,
        sender: usize,
        msg_id: u64,
        except: ((usize, usize), usize),
    ) -> bool {
        self.open.iter().any(|(&pair, contact)| {
            contact.flights.iter().enumerate().any(|(dir, flight)| {
                if (pair, dir) == except {
                    return false;
                }
                let (s, _) = direction_nodes(pair, dir);
                s == sender && flight.map(|f| f.msg_id) == Some(msg_id)
            })
        })
    }

    /// Moves bytes for every planned direction. Each sender's per-step byte
    /// budget (`bit_rate * dt`) splits equally among its active outgoing
    /// links; within a link, transfers run serially, head of queue first,
    /// with leftover budget flowing to the next queued message.
    fn execute_plans(&mut self, plans: Vec<DirPlan>, now: f64) {
        let mut active_out = vec![0u32; self.nodes.len()];
        for plan in &plans {
            active_out[plan.sender] += 1;
        }
        for plan in plans {
            let share = self.specs[plan.sender].bit_rate * self.dt
                / f64::from(active_out[plan.sender]);
            self.execute_direction(plan, share, now);
        }
    }

    fn execute_direction(&mut self, plan: DirPlan, mut budget: f64, now: f64) {
        let s = plan.sender;
        let r = plan.receiver;
        let s_id = self.specs[s].id;
        let r_id = self.specs[r].id;
        for msg_id in plan.ids {
            if budget <= 0.0 {
                break;
            }
            let flight = self.open.get(&plan.pair).expect("contact open").flights[plan.dir];
            let continuing = flight.map(|f| f.msg_id) == Some(msg_id);

            // Revalidate against the live buffers; a stale in-flight
            // transfer aborts, a stale queued offer is silently skipped.
            let info = self.nodes[s]
                .router
                .buffer
                .get(msg_id)
                .map(|m| (m.dst == r_id, m.size as f64, m.copies));
            let invalid: Option<&'static str> = match info {
                None => Some("source_dropped"),
                Some((to_destination, _, copies)) => {
                    if !to_destination && self.nodes[r].router.buffer.contains(msg_id) {
                        Some("duplicate")
                    } else if self.router == RouterKind::SprayAndWait
                        && !to_destination
                        && copies < 2
                    {
                        // Copies spent by an earlier split this step; never
                        // an in-flight transfer (one flight per message per
                        // sender).
                        Some("copies_spent")
                    } else {
                        None
                    }
                }
            };
            if let Some(reason) = invalid {
                if continuing {
                    self.push_event(
                        now,
                        EventKind::TransferAborted,
                        Some(msg_id),
                        Some(s_id),
                        Some(r_id),
                        Some(reason),
                    );
                    self.clear_flight(plan.pair, plan.dir);
                }
                continue;
            }
            if !continuing && self.in_flight_elsewhere(s, msg_id, (plan.pair, plan.dir)) {
                continue;
            }

            let (_, size, _) = info.expect("validated above");
            let already = if continuing {
                flight.expect("continuing flight").bytes_moved
            } else {
                0.0
            };
            let remaining = size - already;
            let moved = remaining.min(budget);
            budget -= moved;
            if moved >= remaining {
                self.clear_flight(plan.pair, plan.dir);
                self.apply_completion(s, r, msg_id, now);
            } else {
                self.open.get_mut(&plan.pair).expect("contact open").flights[plan.dir] =
                    Some(Flight {
                        msg_id,
                        bytes_moved: already + moved,
                    });
                break;
            }
        }
    }

    fn clear_flight(&mut self, pair: (usize, usize), dir: usize) {
        self.open.get_mut(&pair).expect("contact open").flights[dir] = None;
    }

    /// A full message crossed the link: count the relay, then either deliver
    /// (receiver is the destination; the sender drops its replica once it
    /// has delivered directly) or store a replica at the receiver.
    fn apply_completion(&mut self, s: usize, r: usize, msg_id: u64, now: f64) {
        let s_id = self.specs[s].id;
        let r_id = self.specs[r].id;
        let msg = self.nodes[s]
            .router
            .buffer
            .get(msg_id)
            .expect("validated sender copy")
            .clone();
        let to_destination = msg.dst == r_id;

        self.push_event(now, EventKind::Relayed, Some(msg_id), Some(s_id), Some(r_id), None);

        if to_destination {
            self.nodes[s].router.buffer.remove(msg_id);
            self.nodes[r].delivered.insert(msg_id);
            if self.delivered_ids.insert(msg_id) {
                self.push_event(
                    now,
                    EventKind::Delivered,
                    Some(msg_id),
                    Some(s_id),
                    Some(r_id),
                    None,
                );
            }
            return;
        }

        let replica = match self.router {
            RouterKind::SprayAndWait => match snw_on_contact(&msg, false) {
                SnwAction::ForwardHalf { kept, given } => {
                    self.nodes[s]
                        .router
                        .buffer
                        .get_mut(msg_id)
                        .expect("validated sender copy")
                        .copies = kept;
                    let mut replica = msg;
                    replica.copies = given;
                    replica.hops += 1;
                    replica
                }
                _ => unreachable!("plan admits only splittable spray-and-wait messages"),
            },
            _ => {
                let mut replica = msg;
                replica.copies = 1;
                replica.hops += 1;
                replica
            }
        };
        let evicted = self.nodes[r]
            .router
            .buffer
            .insert(replica, now)
            .expect("receiver validated to lack the id");
        for victim in evicted {
            self.push_event(
                now,
                EventKind::DroppedBuffer,
                Some(victim.id),
                Some(r_id),
                None,
                None,
            );
        }
    }

    /// Ping-pong traffic: both endpoints create one message addressed to
    /// the other at every whole generation interval, starting after the
    /// first full interval.
    fn generate_traffic(&mut self, now: f64) {
        let interval = self.traffic.generation_interval;
        while self.next_emission as f64 * interval <= now {
            for (from, to) in [(self.src_idx, self.dst_idx), (self.dst_idx, self.src_idx)] {
                let from_id = self.specs[from].id;
                let to_id = self.specs[to].id;
                let id = self.next_msg_id;
                self.next_msg_id += 1;
                let msg = Message {
                    id,
                    src: from_id,
                    dst: to_id,
                    size: self.traffic.packet_size,
                    created_at: now,
                    ttl: self.traffic.ttl,
                    copies: match self.router {
                        RouterKind::SprayAndWait => self.params.snw_initial_copies,
                        _ => 1,
                    },
                    hops: 0,
                };
                self.push_event(now, EventKind::Created, Some(id), Some(from_id), Some(to_id), None);
                let dropped = self.nodes[from]
                    .router
                    .buffer
                    .insert(msg, now)
                    .expect("fresh id cannot collide");
                for victim in dropped {
                    self.push_event(
                        now,
                        EventKind::DroppedBuffer,
                        Some(victim.id),
                        Some(from_id),
                        None,
                        None,
                    );
                }
            }
            self.next_emission += 1;
        }
    }
}

fn direction_nodes(pair: (usize, usize), dir: usize) -> (usize, usize) {
    if dir == 0 {
        (pair.0, pair.1)
    } else {
        (pair.1, pair.0)
    }
}

/// Runs a validated scenario to completion.
pub fn run(cfg: &ScenarioConfig) -> Result<(MetricsReport, EventLog), EngineError> {
    let mut world = World::new(cfg)?;
    world.run_to_end();
    Ok(world.into_results())
}

/// Runs a scenario with contacts replayed from a scripted schedule instead
/// of geometric detection; mobility still advances but does not influence
/// connectivity.
pub fn run_with_contact_schedule(
    cfg: &ScenarioConfig,
    schedule: &ContactSchedule,
) -> Result<(MetricsReport, EventLog), EngineError> {
    let mut world = World::with_contact_schedule(cfg, schedule)?;
    world.run_to_end();
    Ok(world.into_results())
}

#[cfg(test)]
mod tests;
