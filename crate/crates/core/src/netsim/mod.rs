//! Deterministic discrete-event channel.
//!
//! [`simulate`] maps a covert sender's scripted actions through a
//! [`ChannelModel`] into the [`ObservationTrace`] a covert receiver sees:
//! ARQ turns drops into observed retransmissions, trigger values force
//! client disconnect/reconnect pairs, and two frames scheduled into one
//! collision slot surface as a single corrupted frame. The channel is
//! noiseless; identical inputs produce byte-identical traces.

mod decode;
mod indirect;

pub use decode::{
    decode_frame_corruptions, decode_reconnections, decode_retransmissions, ReconnectionParams,
};
pub use indirect::{run_indirect_channel, IndirectOutcome, RepresentDecoder, SenderSpec};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covers::Packet;
use crate::embedders::CodecError;
use crate::message::FrameError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid script: {0}")]
    InvalidScript(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArqConfig {
    pub enabled: bool,
    pub timeout_us: u64,
    pub max_retries: u32,
}

impl Default for ArqConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            timeout_us: 200_000,
            max_retries: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub arq: ArqConfig,
    /// Duration of one collision slot.
    pub collision_slot_us: u64,
    /// Values that force the addressed client off the central element.
    pub disconnect_values: BTreeSet<u64>,
    pub reconnect_delay_us: u64,
    /// Clients attached to the central element; scripts may only address
    /// these.
    pub known_clients: BTreeSet<String>,
    /// Reserved; the channel is currently noiseless.
    #[serde(default)]
    pub rng_seed: u64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            arq: ArqConfig::default(),
            collision_slot_us: 1_000,
            disconnect_values: BTreeSet::new(),
            reconnect_delay_us: 50_000,
            known_clients: BTreeSet::new(),
            rng_seed: 0,
        }
    }
}

impl ChannelModel {
    fn check(&self) -> Result<(), SimError> {
        if self.arq.enabled && self.arq.timeout_us == 0 {
            return Err(SimError::InvalidParams(
                "arq timeout_us must be positive when arq is enabled".into(),
            ));
        }
        if self.collision_slot_us == 0 {
            return Err(SimError::InvalidParams(
                "collision_slot_us must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum SenderAction {
    Send { packet: Packet },
    Drop { seq: u64 },
    SendValue { client_id: String, value: u64 },
    ScheduleFrame { slot: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptEntry {
    #[serde(rename = "t")]
    pub ts_us: u64,
    #[serde(flatten)]
    pub action: SenderAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub sender_actions: Vec<ScriptEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationKind {
    PacketSeen,
    RetransmissionSeen,
    CorruptedFrameSeen,
    ClientDisconnected,
    ClientReconnected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    #[serde(rename = "t")]
    pub ts_us: u64,
    pub kind: ObservationKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub client_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<u64>,
}

impl Observation {
    fn at(ts_us: u64, kind: ObservationKind) -> Self {
        Self {
            ts_us,
            kind,
            seq: None,
            client_id: None,
            slot: None,
        }
    }

    fn seq(mut self, seq: u64) -> Self {
        self.seq = Some(seq);
        self
    }

    fn client(mut self, client: &str) -> Self {
        self.client_id = Some(client.to_string());
        self
    }

    fn slot(mut self, slot: u64) -> Self {
        self.slot = Some(slot);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ObservationTrace {
    pub observations: Vec<Observation>,
}

/// Run the sender script through the channel. Pure and deterministic:
/// equal inputs yield byte-identical traces.
pub fn simulate(script: &ScenarioScript, channel: &ChannelModel) -> Result<ObservationTrace, SimError> {
    channel.check()?;
    if script
        .sender_actions
        .windows(2)
        .any(|w| w[1].ts_us < w[0].ts_us)
    {
        return Err(SimError::InvalidScript(
            "sender action timestamps must be nondecreasing".into(),
        ));
    }
    let mut observations: Vec<Observation> = Vec::new();
    let mut frames: BTreeMap<u64, u32> = BTreeMap::new();
    for entry in &script.sender_actions {
        match &entry.action {
            SenderAction::Send { packet } => {
                observations.push(
                    Observation::at(entry.ts_us, ObservationKind::PacketSeen).seq(packet.seq),
                );
            }
            SenderAction::Drop { seq } => {
                // One observable retransmission per dropped seq; retries
                // beyond the first repeat the same PDU and are not traced.
                if channel.arq.enabled && channel.arq.max_retries >= 1 {
                    observations.push(
                        Observation::at(
                            entry.ts_us + channel.arq.timeout_us,
                            ObservationKind::RetransmissionSeen,
                        )
                        .seq(*seq),
                    );
                }
            }
            SenderAction::SendValue { client_id, value } => {
                if !channel.known_clients.contains(client_id) {
                    return Err(SimError::InvalidScript(format!(
                        "unknown client {client_id:?}"
                    )));
                }
                if channel.disconnect_values.contains(value) {
                    observations.push(
                        Observation::at(entry.ts_us, ObservationKind::ClientDisconnected)
                            .client(client_id),
                    );
                    observations.push(
                        Observation::at(
                            entry.ts_us + channel.reconnect_delay_us,
                            ObservationKind::ClientReconnected,
                        )
                        .client(client_id),
                    );
                } else {
                    observations.push(
                        Observation::at(entry.ts_us, ObservationKind::PacketSeen)
                            .client(client_id),
                    );
                }
            }
            SenderAction::ScheduleFrame { slot } => {
                *frames.entry(*slot).or_insert(0) += 1;
            }
        }
    }
    for (slot, count) in frames {
        let ts = slot * channel.collision_slot_us;
        if count >= 2 {
            observations
                .push(Observation::at(ts, ObservationKind::CorruptedFrameSeen).slot(slot));
        } else {
            observations.push(Observation::at(ts, ObservationKind::PacketSeen).slot(slot));
        }
    }
    observations.sort_by(|a, b| {
        (a.ts_us, a.kind, &a.seq, &a.client_id, &a.slot).cmp(&(
            b.ts_us, b.kind, &b.seq, &b.client_id, &b.slot,
        ))
    });
    Ok(ObservationTrace { observations })
}

/// JSONL forms for scripts and traces, one entry per line.
pub fn save_script(script: &ScenarioScript) -> Vec<u8> {
    let mut out = String::new();
    for entry in &script.sender_actions {
        out.push_str(&serde_json::to_string(entry).expect("script entry serializes"));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn load_script(bytes: &[u8]) -> Result<ScenarioScript, SimError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| SimError::InvalidScript(format!("script is not UTF-8: {e}")))?;
    let mut script = ScenarioScript::default();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: ScriptEntry = serde_json::from_str(line).map_err(|e| {
            SimError::InvalidScript(format!("line {}: {e}", lineno + 1))
        })?;
        script.sender_actions.push(entry);
    }
    Ok(script)
}

pub fn save_trace(trace: &ObservationTrace) -> Vec<u8> {
    let mut out = String::new();
    for obs in &trace.observations {
        out.push_str(&serde_json::to_string(obs).expect("observation serializes"));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn load_trace(bytes: &[u8]) -> Result<ObservationTrace, SimError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| SimError::InvalidScript(format!("trace is not UTF-8: {e}")))?;
    let mut trace = ObservationTrace::default();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let obs: Observation = serde_json::from_str(line).map_err(|e| {
            SimError::InvalidScript(format!("line {}: {e}", lineno + 1))
        })?;
        trace.observations.push(obs);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn channel() -> ChannelModel {
        ChannelModel {
            disconnect_values: [7].into_iter().collect(),
            known_clients: ["c1".to_string()].into_iter().collect(),
            ..ChannelModel::default()
        }
    }

    #[test]
    fn drop_produces_retransmission_after_timeout() {
        let script = ScenarioScript {
            sender_actions: vec![ScriptEntry {
                ts_us: 1_000_000,
                action: SenderAction::Drop { seq: 2 },
            }],
        };
        let trace = simulate(&script, &channel()).unwrap();
        assert_eq!(trace.observations.len(), 1);
        let obs = &trace.observations[0];
        assert_eq!(obs.kind, ObservationKind::RetransmissionSeen);
        assert_eq!(obs.ts_us, 1_200_000);
        assert_eq!(obs.seq, Some(2));
    }

    #[test]
    fn empty_script_yields_empty_trace() {
        let trace = simulate(&ScenarioScript::default(), &channel()).unwrap();
        assert!(trace.observations.is_empty());
    }

    #[test]
    fn two_frames_in_one_slot_collide_once() {
        let script = ScenarioScript {
            sender_actions: vec![
                ScriptEntry {
                    ts_us: 0,
                    action: SenderAction::ScheduleFrame { slot: 3 },
                },
                ScriptEntry {
                    ts_us: 10,
                    action: SenderAction::ScheduleFrame { slot: 3 },
                },
            ],
        };
        let trace = simulate(&script, &channel()).unwrap();
        let corrupted: Vec<_> = trace
            .observations
            .iter()
            .filter(|o| o.kind == ObservationKind::CorruptedFrameSeen)
            .collect();
        assert_eq!(corrupted.len(), 1);
        assert_eq!(corrupted[0].slot, Some(3));
    }

    #[test]
    fn disconnect_value_forces_reconnect_pair() {
        let script = ScenarioScript {
            sender_actions: vec![ScriptEntry {
                ts_us: 500,
                action: SenderAction::SendValue {
                    client_id: "c1".into(),
                    value: 7,
                },
            }],
        };
        let ch = channel();
        let trace = simulate(&script, &ch).unwrap();
        assert_eq!(trace.observations[0].kind, ObservationKind::ClientDisconnected);
        assert_eq!(trace.observations[1].kind, ObservationKind::ClientReconnected);
        assert_eq!(
            trace.observations[1].ts_us - trace.observations[0].ts_us,
            ch.reconnect_delay_us
        );
    }

    #[test]
    fn unknown_client_is_an_invalid_script() {
        let script = ScenarioScript {
            sender_actions: vec![ScriptEntry {
                ts_us: 0,
                action: SenderAction::SendValue {
                    client_id: "ghost".into(),
                    value: 1,
                },
            }],
        };
        assert!(matches!(
            simulate(&script, &channel()),
            Err(SimError::InvalidScript(_))
        ));
    }

    #[test]
    fn non_monotonic_script_is_rejected() {
        let script = ScenarioScript {
            sender_actions: vec![
                ScriptEntry {
                    ts_us: 10,
                    action: SenderAction::Drop { seq: 1 },
                },
                ScriptEntry {
                    ts_us: 5,
                    action: SenderAction::Drop { seq: 2 },
                },
            ],
        };
        assert!(matches!(
            simulate(&script, &channel()),
            Err(SimError::InvalidScript(_))
        ));
    }

    #[test]
    fn identical_runs_serialize_identically() {
        let script = ScenarioScript {
            sender_actions: vec![
                ScriptEntry {
                    ts_us: 0,
                    action: SenderAction::SendValue {
                        client_id: "c1".into(),
                        value: 7,
                    },
                },
                ScriptEntry {
                    ts_us: 40_000,
                    action: SenderAction::Drop { seq: 9 },
                },
                ScriptEntry {
                    ts_us: 40_000,
                    action: SenderAction::ScheduleFrame { slot: 1 },
                },
            ],
        };
        let ch = channel();
        let a = save_trace(&simulate(&script, &ch).unwrap());
        let b = save_trace(&simulate(&script, &ch).unwrap());
        assert_eq!(a, b);
        // and the trace itself round-trips through JSONL
        assert_eq!(load_trace(&a).unwrap(), simulate(&script, &ch).unwrap());
    }

    #[test]
    fn script_round_trips_through_jsonl() {
        let script = ScenarioScript {
            sender_actions: vec![
                ScriptEntry {
                    ts_us: 0,
                    action: SenderAction::Send {
                        packet: Packet::new(0, 1),
                    },
                },
                ScriptEntry {
                    ts_us: 10,
                    action: SenderAction::ScheduleFrame { slot: 2 },
                },
            ],
        };
        let bytes = save_script(&script);
        assert_eq!(load_script(&bytes).unwrap(), script);
    }

    #[test]
    fn retransmissions_follow_their_drops() {
        // causality: every retransmission ts = some drop ts + timeout
        let drops = [3u64, 9, 27];
        let script = ScenarioScript {
            sender_actions: drops
                .iter()
                .enumerate()
                .map(|(i, &seq)| ScriptEntry {
                    ts_us: i as u64 * 1000,
                    action: SenderAction::Drop { seq },
                })
                .collect(),
        };
        let ch = channel();
        let trace = simulate(&script, &ch).unwrap();
        for (i, obs) in trace.observations.iter().enumerate() {
            assert_eq!(obs.ts_us, i as u64 * 1000 + ch.arq.timeout_us);
        }
    }
}
