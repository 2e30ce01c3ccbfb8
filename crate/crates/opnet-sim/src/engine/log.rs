//! Append-only simulation event log.
//!
//! Exported as one-line-per-event delimited text:
//! `time,event,msg_id,node_a,node_b,detail`, with empty columns where a
//! field does not apply.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Created,
    Relayed,
    Delivered,
    DroppedTtl,
    DroppedBuffer,
    ContactUp,
    ContactDown,
    TransferAborted,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Created => "created",
            EventKind::Relayed => "relayed",
            EventKind::Delivered => "delivered",
            EventKind::DroppedTtl => "dropped_ttl",
            EventKind::DroppedBuffer => "dropped_buffer",
            EventKind::ContactUp => "contact_up",
            EventKind::ContactDown => "contact_down",
            EventKind::TransferAborted => "transfer_aborted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub msg_id: Option<u64>,
    pub node_a: Option<u32>,
    pub node_b: Option<u32>,
    pub detail: Option<&'static str>,
}

impl Event {
    fn to_line(&self) -> String {
        let opt_u64 = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        let opt_u32 = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.time,
            self.kind.as_str(),
            opt_u64(self.msg_id),
            opt_u32(self.node_a),
            opt_u32(self.node_b),
            self.detail.unwrap_or("")
        )
    }
}

/// Time-ordered sequence of everything that happened in one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: Event) {
        debug_assert!(
            self.events.last().is_none_or(|e| e.time <= event.time),
            "event times must be non-decreasing"
        );
        self.events.push(event);
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.events.iter()
    }

    /// One line per event, suitable for `--log` export.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_line());
            out.push('\n');
        }
        out
    }
}
