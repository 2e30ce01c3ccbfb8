//! Headline metrics computed from the event log.

use super::log::{EventKind, EventLog};
use std::collections::{BTreeMap, HashMap};

/// Delivery probability, overhead ratio and average latency plus the raw
/// event counts they derive from. Overhead and latency are undefined when
/// nothing was delivered.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub created: u64,
    /// Distinct message ids delivered at least once.
    pub delivered: u64,
    /// Completed node-to-node transfers, final hop included.
    pub relayed: u64,
    pub dropped_ttl: u64,
    pub dropped_buffer: u64,
    pub delivery_probability: f64,
    pub overhead_ratio: Option<f64>,
    pub average_latency: Option<f64>,
}

/// Derives the report from a complete log.
///
/// `delivery_probability = delivered / created`;
/// `overhead_ratio = (relayed - delivered) / delivered`;
/// `average_latency` is the mean over distinct delivered messages of first
/// delivery time minus creation time.
pub fn compute_metrics(log: &EventLog) -> MetricsReport {
    // Ordered maps: the latency mean must sum in a fixed order to stay
    // bit-identical across runs (f64 addition is not associative).
    let mut created_at: BTreeMap<u64, f64> = BTreeMap::new();
    let mut first_delivery: BTreeMap<u64, f64> = BTreeMap::new();
    let mut relayed = 0u64;
    let mut dropped_ttl = 0u64;
    let mut dropped_buffer = 0u64;

    for e in log.iter() {
        match e.kind {
            EventKind::Created => {
                if let Some(id) = e.msg_id {
                    created_at.entry(id).or_insert(e.time);
                }
            }
            EventKind::Delivered => {
                if let Some(id) = e.msg_id {
                    first_delivery.entry(id).or_insert(e.time);
                }
            }
            EventKind::Relayed => relayed += 1,
            EventKind::DroppedTtl => dropped_ttl += 1,
            EventKind::DroppedBuffer => dropped_buffer += 1,
            _ => {}
        }
    }

    let created = created_at.len() as u64;
    let delivered = first_delivery.len() as u64;
    let delivery_probability = if created == 0 {
        0.0
    } else {
        delivered as f64 / created as f64
    };
    let overhead_ratio = if delivered == 0 {
        None
    } else {
        Some((relayed as f64 - delivered as f64) / delivered as f64)
    };
    let average_latency = if delivered == 0 {
        None
    } else {
        let total: f64 = first_delivery
            .iter()
            .map(|(id, t)| t - created_at.get(id).copied().unwrap_or(*t))
            .sum();
        Some(total / delivered as f64)
    };

    MetricsReport {
        created,
        delivered,
        relayed,
        dropped_ttl,
        dropped_buffer,
        delivery_probability,
        overhead_ratio,
        average_latency,
    }
}

/// Counts contact_up events between a mobile node and each static endpoint
/// (the per-endpoint encounter totals of an area sweep). Contacts between
/// the two endpoints themselves do not count.
pub fn count_encounters(log: &EventLog, src_id: u32, dst_id: u32) -> (u64, u64) {
    let mut src = 0u64;
    let mut dst = 0u64;
    for e in log.iter() {
        if e.kind != EventKind::ContactUp {
            continue;
        }
        let (Some(a), Some(b)) = (e.node_a, e.node_b) else {
            continue;
        };
        let endpoints = [src_id, dst_id];
        let a_endpoint = endpoints.contains(&a);
        let b_endpoint = endpoints.contains(&b);
        if a_endpoint && b_endpoint {
            continue;
        }
        if a == src_id || b == src_id {
            src += 1;
        } else if a == dst_id || b == dst_id {
            dst += 1;
        }
    }
    (src, dst)
}

/// One closed contact interval between two nodes, low id first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactEvent {
    pub node_a: u32,
    pub node_b: u32,
    pub start: f64,
    pub end: f64,
}

impl ContactEvent {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// All closed contacts reconstructed from the log's up/down transitions.
pub fn contact_durations(log: &EventLog) -> Vec<ContactEvent> {
    let mut open: HashMap<(u32, u32), f64> = HashMap::new();
    let mut out = Vec::new();
    for e in log.iter() {
        let (Some(a), Some(b)) = (e.node_a, e.node_b) else {
            continue;
        };
        match e.kind {
            EventKind::ContactUp => {
                open.insert((a, b), e.time);
            }
            EventKind::ContactDown => {
                if let Some(start) = open.remove(&(a, b)) {
                    out.push(ContactEvent {
                        node_a: a,
                        node_b: b,
                        start,
                        end: e.time,
                    });
                }
            }
            _ => {}
        }
    }
    out
}
