//! Message and buffer semantics plus the three store-carry-forward routing
//! protocols: epidemic, binary spray-and-wait and PRoPHET.
//!
//! The protocols are expressed as pure planning/update operations; the
//! engine owns the state and applies the plans during contacts.

use std::collections::{BTreeMap, HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoutingError {
    #[error("{name} must be in [0, 1], got {value}")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("message {id} already buffered")]
    DuplicateMessage { id: u64 },
}

/// A routed unit. `copies` is the logical spray-and-wait copy count carried
/// by this replica (1 under the other routers).
#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub id: u64,
    pub src: u32,
    pub dst: u32,
    pub size: u64,
    pub created_at: f64,
    pub ttl: f64,
    pub copies: u32,
    pub hops: u32,
}

impl Message {
    pub fn expires_at(&self) -> f64 {
        self.created_at + self.ttl
    }

    pub fn expired(&self, now: f64) -> bool {
        self.expires_at() < now
    }
}

/// FIFO message queue with a byte capacity. Insertion order is eviction
/// order; occupancy never exceeds capacity and ids are unique.
#[derive(Debug, Clone)]
pub struct Buffer {
    capacity: u64,
    entries: VecDeque<Message>,
    occupancy: u64,
}

impl Buffer {
    pub fn new(capacity: u64) -> Self {
        Self {
            capacity,
            entries: VecDeque::new(),
            occupancy: 0,
        }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn occupancy(&self) -> u64 {
        self.occupancy
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.entries.iter().any(|m| m.id == id)
    }

    pub fn get(&self, id: u64) -> Option<&Message> {
        self.entries.iter().find(|m| m.id == id)
    }

    pub fn get_mut(&mut self, id: u64) -> Option<&mut Message> {
        self.entries.iter_mut().find(|m| m.id == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Message> {
        self.entries.iter()
    }

    pub fn ids(&self) -> HashSet<u64> {
        self.entries.iter().map(|m| m.id).collect()
    }

    pub fn remove(&mut self, id: u64) -> Option<Message> {
        let idx = self.entries.iter().position(|m| m.id == id)?;
        let msg = self.entries.remove(idx).expect("index in range");
        self.occupancy -= msg.size;
        Some(msg)
    }

    /// Inserts `msg`, evicting oldest-inserted entries until it fits, and
    /// returns the dropped messages. A message larger than the whole buffer
    /// is rejected and returned in the dropped list itself.
    pub fn insert(&mut self, msg: Message, now: f64) -> Result<Vec<Message>, RoutingError> {
        if self.contains(msg.id) {
            return Err(RoutingError::DuplicateMessage { id: msg.id });
        }
        debug_assert!(!msg.expired(now), "inserting expired message {}", msg.id);
        let mut dropped = Vec::new();
        if msg.size > self.capacity {
            dropped.push(msg);
            return Ok(dropped);
        }
        while self.occupancy + msg.size > self.capacity {
            let victim = self.entries.pop_front().expect("occupancy > 0");
            self.occupancy -= victim.size;
            dropped.push(victim);
        }
        self.occupancy += msg.size;
        self.entries.push_back(msg);
        Ok(dropped)
    }

    /// Removes every entry whose TTL has expired at `now`.
    pub fn expire_ttl(&mut self, now: f64) -> Vec<Message> {
        let mut dropped = Vec::new();
        self.entries.retain(|m| {
            if m.expired(now) {
                dropped.push(m.clone());
                false
            } else {
                true
            }
        });
        for m in &dropped {
            self.occupancy -= m.size;
        }
        dropped
    }
}

/// Epidemic exchange plan: every buffered message the peer lacks, ordered
/// oldest-created-first (nearest TTL expiry first). Replication is copy
/// based; the local replica is never removed by planning.
pub fn epidemic_plan<'a>(buf: &'a Buffer, peer_ids: &HashSet<u64>) -> Vec<&'a Message> {
    let mut plan: Vec<&Message> = buf.iter().filter(|m| !peer_ids.contains(&m.id)).collect();
    plan.sort_by(|a, b| {
        a.created_at
            .total_cmp(&b.created_at)
            .then(a.id.cmp(&b.id))
    });
    plan
}

/// What binary spray-and-wait does with one buffered message on contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnwAction {
    /// Hand `given` logical copies to the peer and keep `kept`.
    ForwardHalf { kept: u32, given: u32 },
    /// The peer is the destination: deliver regardless of copy count.
    ForwardFinal,
    /// Single copy left and the peer is not the destination: wait.
    Hold,
}

/// Binary spray-and-wait decision for a message the peer lacks. With more
/// than one copy the carrier hands the receiver `ceil(copies/2)` and keeps
/// the rest; with one copy it only forwards to the destination itself.
pub fn snw_on_contact(msg: &Message, peer_is_destination: bool) -> SnwAction {
    if peer_is_destination {
        return SnwAction::ForwardFinal;
    }
    if msg.copies > 1 {
        let kept = msg.copies / 2;
        SnwAction::ForwardHalf {
            kept,
            given: msg.copies - kept,
        }
    } else {
        SnwAction::Hold
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<(), RoutingError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(RoutingError::OutOfRange { name, value })
    }
}

/// Direct-encounter predictability update: `p' = (1 - p) p0 + p`.
pub fn prophet_update_direct(p: f64, p0: f64) -> Result<f64, RoutingError> {
    check_unit("p", p)?;
    check_unit("p0", p0)?;
    Ok((1.0 - p) * p0 + p)
}

/// Aging over `k` whole time units since the last update: `p' = alpha^k p`.
pub fn prophet_age(p: f64, alpha: f64, k: u32) -> Result<f64, RoutingError> {
    check_unit("p", p)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(RoutingError::OutOfRange {
            name: "alpha",
            value: alpha,
        });
    }
    Ok(alpha.powi(k as i32) * p)
}

/// Transitive update through an intermediate:
/// `p_iz' = p_iz + (1 - p_iz) p_ij p_jz beta`.
pub fn prophet_transitive(
    p_iz: f64,
    p_ij: f64,
    p_jz: f64,
    beta: f64,
) -> Result<f64, RoutingError> {
    check_unit("p_iz", p_iz)?;
    check_unit("p_ij", p_ij)?;
    check_unit("p_jz", p_jz)?;
    check_unit("beta", beta)?;
    Ok(p_iz + (1.0 - p_iz) * p_ij * p_jz * beta)
}

/// Per-destination delivery predictabilities with lazy whole-second aging.
/// Absent entries read as 0.
#[derive(Debug, Clone, Default)]
pub struct PredictabilityTable {
    entries: BTreeMap<u32, PredEntry>,
}

#[derive(Debug, Clone, Copy)]
struct PredEntry {
    p: f64,
    last_update: f64,
}

impl PredictabilityTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, dst: u32) -> f64 {
        self.entries.get(&dst).map(|e| e.p).unwrap_or(0.0)
    }

    pub fn set(&mut self, dst: u32, p: f64, now: f64) {
        self.entries.insert(
            dst,
            PredEntry {
                p,
                last_update: now,
            },
        );
    }

    /// Destinations with an entry, in ascending id order.
    pub fn destinations(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.entries.iter().map(|(&dst, e)| (dst, e.p))
    }

    /// Applies `alpha^k` aging to every entry, `k` being the elapsed whole
    /// seconds since the entry's last update. The fractional remainder
    /// carries over to the next aging call.
    pub fn age_to(&mut self, now: f64, alpha: f64) {
        for entry in self.entries.values_mut() {
            let elapsed = now - entry.last_update;
            if elapsed < 1.0 {
                continue;
            }
            let k = elapsed.floor();
            entry.p *= alpha.powi(k as i32);
            entry.last_update += k;
        }
    }
}

/// PRoPHET exchange plan: offer each buffered message the peer lacks whose
/// destination predictability at the peer strictly exceeds the local one,
/// highest peer predictability first. Copy based: the local replica stays.
///
/// Both tables must already be aged to the current instant.
pub fn prophet_plan<'a>(
    self_table: &PredictabilityTable,
    peer_table: &PredictabilityTable,
    buf: &'a Buffer,
    peer_ids: &HashSet<u64>,
) -> Vec<&'a Message> {
    let mut plan: Vec<(&Message, f64)> = buf
        .iter()
        .filter(|m| !peer_ids.contains(&m.id))
        .filter_map(|m| {
            let peer_p = peer_table.get(m.dst);
            if peer_p > self_table.get(m.dst) {
                Some((m, peer_p))
            } else {
                None
            }
        })
        .collect();
    plan.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(a.0.created_at.total_cmp(&b.0.created_at))
            .then(a.0.id.cmp(&b.0.id))
    });
    plan.into_iter().map(|(m, _)| m).collect()
}

/// Router-specific per-node state held by the engine.
#[derive(Debug, Clone)]
pub struct RouterState {
    pub buffer: Buffer,
    /// Present only under the PRoPHET router.
    pub predictability: Option<PredictabilityTable>,
}

impl RouterState {
    pub fn new(kind: crate::scenario::RouterKind, buffer_capacity: u64) -> Self {
        Self {
            buffer: Buffer::new(buffer_capacity),
            predictability: match kind {
                crate::scenario::RouterKind::Prophet => Some(PredictabilityTable::new()),
                _ => None,
            },
        }
    }
}
