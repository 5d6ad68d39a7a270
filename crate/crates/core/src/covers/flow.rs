//! Packet flows and their JSON Lines trace format.
//!
//! A trace is one JSON object per line. Packet lines look like
//! `{"t":1500000,"seq":2,"fields":{"ttl":{"v":64,"w":8,"r":false}},"opts":["A"],"payload":"ab"}`
//! and event lines like `{"t":2000000,"event":"disconnect"}`. Timestamps are
//! integer microseconds since flow start and must be nondecreasing within
//! each line kind.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::CoverError;

/// A width-annotated header field value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldValue {
    pub value: u64,
    /// Declared width, 1..=64 bits.
    pub width_bits: u8,
    /// Whether the protocol marks this field reserved/unused.
    pub reserved: bool,
}

impl FieldValue {
    pub fn new(value: u64, width_bits: u8) -> Self {
        Self {
            value,
            width_bits,
            reserved: false,
        }
    }

    pub fn mask(&self) -> u64 {
        if self.width_bits >= 64 {
            u64::MAX
        } else {
            (1u64 << self.width_bits) - 1
        }
    }

    pub fn fits(&self) -> bool {
        (1..=64).contains(&self.width_bits) && self.value <= self.mask()
    }
}

/// A packet. Serializes as the compact trace-line shape
/// `{"t":..,"seq":..,"fields":{"ttl":{"v":64,"w":8,"r":false}},"opts":[..],"payload":"<hex>"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PacketLine", into = "PacketLine")]
pub struct Packet {
    /// Microseconds since flow start.
    pub ts_us: u64,
    pub seq: u64,
    /// Ordered map of named header fields.
    pub fields: IndexMap<String, FieldValue>,
    /// Option tags, unique within one packet.
    pub options: Vec<String>,
    pub payload: Vec<u8>,
}

impl Packet {
    pub fn new(ts_us: u64, seq: u64) -> Self {
        Self {
            ts_us,
            seq,
            fields: IndexMap::new(),
            options: Vec::new(),
            payload: Vec::new(),
        }
    }

    pub fn with_field(ts_us: u64, seq: u64, name: &str, value: u64, width_bits: u8) -> Self {
        let mut p = Self::new(ts_us, seq);
        p.fields
            .insert(name.to_string(), FieldValue::new(value, width_bits));
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowEventKind {
    Connect,
    Disconnect,
    Send,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowEvent {
    pub ts_us: u64,
    pub kind: FlowEventKind,
}

/// An ordered packet sequence plus flow-level events.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PacketFlow {
    pub packets: Vec<Packet>,
    pub events: Vec<FlowEvent>,
}

impl PacketFlow {
    /// Successive packet timestamp gaps; `n` packets yield `n - 1` gaps.
    pub fn packet_gaps(&self) -> Vec<u64> {
        self.packets
            .windows(2)
            .map(|w| w[1].ts_us - w[0].ts_us)
            .collect()
    }

    pub fn event_gaps(&self) -> Vec<u64> {
        self.events
            .windows(2)
            .map(|w| w[1].ts_us - w[0].ts_us)
            .collect()
    }

    fn check(&self) -> Result<(), String> {
        if self.packets.windows(2).any(|w| w[1].ts_us < w[0].ts_us) {
            return Err("NonMonotonicTimestamps: packet timestamps decrease".into());
        }
        if self.events.windows(2).any(|w| w[1].ts_us < w[0].ts_us) {
            return Err("NonMonotonicTimestamps: event timestamps decrease".into());
        }
        for (i, p) in self.packets.iter().enumerate() {
            for (name, f) in &p.fields {
                if !f.fits() {
                    return Err(format!(
                        "packet {i}: field {name:?} value {} does not fit {} bits",
                        f.value, f.width_bits
                    ));
                }
            }
            let mut seen = std::collections::BTreeSet::new();
            for tag in &p.options {
                if !seen.insert(tag) {
                    return Err(format!("packet {i}: duplicate option tag {tag:?}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct FieldLine {
    v: u64,
    w: u8,
    #[serde(default)]
    r: bool,
}

#[derive(Serialize, Deserialize)]
struct PacketLine {
    t: u64,
    seq: u64,
    fields: IndexMap<String, FieldLine>,
    opts: Vec<String>,
    payload: String,
}

impl From<Packet> for PacketLine {
    fn from(p: Packet) -> Self {
        Self {
            t: p.ts_us,
            seq: p.seq,
            fields: p
                .fields
                .into_iter()
                .map(|(name, f)| {
                    (
                        name,
                        FieldLine {
                            v: f.value,
                            w: f.width_bits,
                            r: f.reserved,
                        },
                    )
                })
                .collect(),
            opts: p.options,
            payload: hex::encode(&p.payload),
        }
    }
}

impl TryFrom<PacketLine> for Packet {
    type Error = String;

    fn try_from(line: PacketLine) -> Result<Self, Self::Error> {
        let payload = hex::decode(&line.payload).map_err(|e| format!("bad payload hex: {e}"))?;
        Ok(Self {
            ts_us: line.t,
            seq: line.seq,
            fields: line
                .fields
                .into_iter()
                .map(|(name, f)| {
                    (
                        name,
                        FieldValue {
                            value: f.v,
                            width_bits: f.w,
                            reserved: f.r,
                        },
                    )
                })
                .collect(),
            options: line.opts,
            payload,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct EventLine {
    t: u64,
    event: FlowEventKind,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TraceLine {
    Event(EventLine),
    Packet(Packet),
}

/// Parse a JSONL flow trace. Rejects decreasing timestamps, over-wide field
/// values, duplicate option tags, and malformed lines, naming the offending
/// line.
pub fn load_flow(bytes: &[u8]) -> Result<PacketFlow, CoverError> {
    let textual = std::str::from_utf8(bytes)
        .map_err(|e| CoverError::parse(0, format!("trace is not UTF-8: {e}")))?;
    let mut flow = PacketFlow::default();
    for (lineno, line) in textual.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TraceLine = serde_json::from_str(line)
            .map_err(|e| CoverError::parse(lineno, format!("bad trace line: {e}")))?;
        match parsed {
            TraceLine::Packet(p) => flow.packets.push(p),
            TraceLine::Event(e) => flow.events.push(FlowEvent {
                ts_us: e.t,
                kind: e.event,
            }),
        }
    }
    flow.check().map_err(|msg| CoverError::parse(0, msg))?;
    Ok(flow)
}

/// Serialize a flow to its canonical JSONL form: packet lines in order,
/// then event lines in order.
pub fn save_flow(flow: &PacketFlow) -> Vec<u8> {
    let mut out = String::new();
    for p in &flow.packets {
        out.push_str(&serde_json::to_string(p).expect("packet line serializes"));
        out.push('\n');
    }
    for e in &flow.events {
        let line = EventLine {
            t: e.ts_us,
            event: e.kind,
        };
        out.push_str(&serde_json::to_string(&line).expect("event line serializes"));
        out.push('\n');
    }
    out.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_flow() -> PacketFlow {
        let mut flow = PacketFlow::default();
        let mut p0 = Packet::with_field(0, 1, "ttl", 64, 8);
        p0.options = vec!["A".into(), "B".into()];
        p0.payload = vec![0xde, 0xad];
        flow.packets.push(p0);
        flow.packets.push(Packet::with_field(1_500_000, 2, "ttl", 63, 8));
        flow.packets.push(Packet::with_field(2_000_000, 3, "ttl", 64, 8));
        flow.events.push(FlowEvent {
            ts_us: 2_500_000,
            kind: FlowEventKind::Disconnect,
        });
        flow
    }

    #[test]
    fn save_then_load_is_identity() {
        let flow = sample_flow();
        assert_eq!(load_flow(&save_flow(&flow)).unwrap(), flow);
    }

    #[test]
    fn saved_bytes_are_stable() {
        let flow = sample_flow();
        let a = save_flow(&flow);
        let b = save_flow(&load_flow(&a).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn decreasing_timestamps_are_rejected() {
        let bytes = b"{\"t\":5,\"seq\":1,\"fields\":{},\"opts\":[],\"payload\":\"\"}\n{\"t\":4,\"seq\":2,\"fields\":{},\"opts\":[],\"payload\":\"\"}\n";
        let err = load_flow(bytes).unwrap_err();
        assert!(err.to_string().contains("NonMonotonicTimestamps"), "{err}");
    }

    #[test]
    fn overwide_field_value_is_rejected() {
        let bytes = b"{\"t\":0,\"seq\":1,\"fields\":{\"ttl\":{\"v\":256,\"w\":8}},\"opts\":[],\"payload\":\"\"}\n";
        assert!(load_flow(bytes).is_err());
    }

    #[test]
    fn duplicate_option_tags_are_rejected() {
        let bytes = b"{\"t\":0,\"seq\":1,\"fields\":{},\"opts\":[\"A\",\"A\"],\"payload\":\"\"}\n";
        assert!(load_flow(bytes).is_err());
    }

    #[test]
    fn truncated_line_names_its_number() {
        let bytes = b"{\"t\":0,\"seq\":1,\"fields\":{},\"opts\":[],\"payload\":\"\"}\n{\"t\":1,\"seq\"\n";
        match load_flow(bytes).unwrap_err() {
            CoverError::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn field_order_survives_round_trip() {
        let mut p = Packet::new(0, 1);
        p.fields.insert("zeta".into(), FieldValue::new(1, 4));
        p.fields.insert("alpha".into(), FieldValue::new(2, 4));
        let flow = PacketFlow {
            packets: vec![p],
            events: vec![],
        };
        let loaded = load_flow(&save_flow(&flow)).unwrap();
        let names: Vec<&String> = loaded.packets[0].fields.keys().collect();
        assert_eq!(names, ["zeta", "alpha"]);
    }
}
