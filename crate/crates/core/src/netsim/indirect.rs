//! End-to-end covert channels through the simulator, with pattern-identity
//! bookkeeping: the embedding pattern the sender applies and the
//! representation pattern the receiver reads may differ.

use serde::{Deserialize, Serialize};

use crate::catalog::PatternId;
use crate::covers::{CoverObject, Packet};
use crate::embedders::{embed, extract, PatternSpec};
use crate::message::SecretMessage;

use super::decode::{
    decode_frame_corruptions, decode_reconnections, decode_retransmissions, ReconnectionParams,
};
use super::{simulate, ChannelModel, ScenarioScript, ScriptEntry, SenderAction, SimError};

/// How the covert sender embeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SenderSpec {
    /// State/value modulation: send a trigger or benign value to a client,
    /// one slot per bit.
    ValueModulation {
        client_id: String,
        slot_us: u64,
        disconnect_value: u64,
        benign_value: u64,
    },
    /// Artificial element loss: drop the first seq of bit-1 groups.
    ElementLoss {
        group_size: u32,
        base_seq: u64,
        gap_us: u64,
    },
    /// Event occurrence: schedule two colliding frames per symbol slot.
    EventOccurrence { slots_per_symbol: u32 },
    /// A direct channel: the receiver sees the stego cover itself.
    Direct {
        spec: PatternSpec,
        cover: CoverObject,
    },
}

impl SenderSpec {
    pub fn embedding_pattern(&self) -> PatternId {
        match self {
            Self::ValueModulation { .. } => PatternId::parse("EN4").expect("static id"),
            Self::ElementLoss { .. } => PatternId::parse("EN1").expect("static id"),
            Self::EventOccurrence { .. } => PatternId::parse("ET2").expect("static id"),
            Self::Direct { spec, .. } => spec.pattern.clone(),
        }
    }
}

/// How the covert receiver represents the hidden data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepresentDecoder {
    Reconnections {
        client_ids: Vec<String>,
        slot_us: u64,
    },
    Retransmissions {
        group_size: u32,
    },
    FrameCorruptions {
        slots_per_symbol: u32,
    },
    /// Read the stego cover directly with the sender's own spec.
    Direct,
}

impl RepresentDecoder {
    pub fn representation_pattern(&self, sender: &SenderSpec) -> PatternId {
        match self {
            Self::Reconnections { .. } => PatternId::parse("RN7n").expect("static id"),
            Self::Retransmissions { .. } => PatternId::parse("RN6n").expect("static id"),
            Self::FrameCorruptions { .. } => PatternId::parse("RT3n").expect("static id"),
            Self::Direct => sender.embedding_pattern(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndirectOutcome {
    pub sent: SecretMessage,
    pub recovered: SecretMessage,
    pub embed_id: PatternId,
    pub represent_id: PatternId,
}

impl IndirectOutcome {
    pub fn exact(&self) -> bool {
        self.sent == self.recovered
    }
}

fn value_modulation_script(
    framed: &[bool],
    client_id: &str,
    slot_us: u64,
    disconnect_value: u64,
    benign_value: u64,
) -> ScenarioScript {
    ScenarioScript {
        sender_actions: framed
            .iter()
            .enumerate()
            .map(|(i, &bit)| ScriptEntry {
                ts_us: i as u64 * slot_us,
                action: SenderAction::SendValue {
                    client_id: client_id.to_string(),
                    value: if bit { disconnect_value } else { benign_value },
                },
            })
            .collect(),
    }
}

fn element_loss_script(framed: &[bool], group_size: u32, base_seq: u64, gap_us: u64) -> ScenarioScript {
    let mut actions = Vec::new();
    let mut ts = 0u64;
    for (g, &bit) in framed.iter().enumerate() {
        for k in 0..group_size as u64 {
            let seq = base_seq + g as u64 * group_size as u64 + k;
            let action = if bit && k == 0 {
                SenderAction::Drop { seq }
            } else {
                SenderAction::Send {
                    packet: Packet::new(ts, seq),
                }
            };
            actions.push(ScriptEntry { ts_us: ts, action });
            ts += gap_us;
        }
    }
    ScenarioScript {
        sender_actions: actions,
    }
}

fn event_occurrence_script(
    framed: &[bool],
    slots_per_symbol: u32,
    collision_slot_us: u64,
) -> ScenarioScript {
    let bps = slots_per_symbol.trailing_zeros() as usize;
    let symbols = framed.len().div_ceil(bps);
    let mut actions = Vec::new();
    for k in 0..symbols {
        let mut v = 0u64;
        for j in 0..bps {
            let bit = framed.get(k * bps + j).copied().unwrap_or(false);
            v = (v << 1) | bit as u64;
        }
        let slot = k as u64 * slots_per_symbol as u64 + v;
        let ts = slot * collision_slot_us;
        // two frames in the same slot guarantee the collision
        for _ in 0..2 {
            actions.push(ScriptEntry {
                ts_us: ts,
                action: SenderAction::ScheduleFrame { slot },
            });
        }
    }
    ScenarioScript {
        sender_actions: actions,
    }
}

/// Build the sender's script from the embedding spec, run it through the
/// channel, decode from the trace, and report both pattern identities.
pub fn run_indirect_channel(
    sender: &SenderSpec,
    decoder: &RepresentDecoder,
    channel: &ChannelModel,
    message: &SecretMessage,
) -> Result<IndirectOutcome, SimError> {
    let framed = message.frame();
    let recovered = match (sender, decoder) {
        (SenderSpec::Direct { spec, cover }, RepresentDecoder::Direct) => {
            let (stego, _) = embed(cover, message, spec)?;
            extract(&stego, spec)?
        }
        (SenderSpec::Direct { .. }, _) | (_, RepresentDecoder::Direct) => {
            return Err(SimError::InvalidParams(
                "direct senders pair with the direct decoder".into(),
            ));
        }
        (sender, decoder) => {
            let script = match sender {
                SenderSpec::ValueModulation {
                    client_id,
                    slot_us,
                    disconnect_value,
                    benign_value,
                } => {
                    if !channel.disconnect_values.contains(disconnect_value) {
                        return Err(SimError::InvalidParams(format!(
                            "value {disconnect_value} does not force a disconnect on this channel"
                        )));
                    }
                    if channel.disconnect_values.contains(benign_value) {
                        return Err(SimError::InvalidParams(format!(
                            "benign value {benign_value} would force a disconnect"
                        )));
                    }
                    if *slot_us <= channel.reconnect_delay_us {
                        return Err(SimError::InvalidParams(
                            "slot_us must exceed the reconnect delay so reconnections land in their slot"
                                .into(),
                        ));
                    }
                    value_modulation_script(
                        &framed,
                        client_id,
                        *slot_us,
                        *disconnect_value,
                        *benign_value,
                    )
                }
                SenderSpec::ElementLoss {
                    group_size,
                    base_seq,
                    gap_us,
                } => {
                    if !channel.arq.enabled {
                        return Err(SimError::InvalidParams(
                            "element loss needs an ARQ-enabled channel".into(),
                        ));
                    }
                    if *group_size == 0 || *gap_us == 0 {
                        return Err(SimError::InvalidParams(
                            "group_size and gap_us must be positive".into(),
                        ));
                    }
                    element_loss_script(&framed, *group_size, *base_seq, *gap_us)
                }
                SenderSpec::EventOccurrence { slots_per_symbol } => {
                    if *slots_per_symbol < 2 || !slots_per_symbol.is_power_of_two() {
                        return Err(SimError::InvalidParams(format!(
                            "slots_per_symbol must be a power of two >= 2, got {slots_per_symbol}"
                        )));
                    }
                    event_occurrence_script(&framed, *slots_per_symbol, channel.collision_slot_us)
                }
                SenderSpec::Direct { .. } => unreachable!("handled above"),
            };
            let trace = simulate(&script, channel)?;
            match decoder {
                RepresentDecoder::Reconnections { client_ids, slot_us } => decode_reconnections(
                    &trace,
                    &ReconnectionParams {
                        client_ids: client_ids.clone(),
                        slot_us: *slot_us,
                    },
                )?,
                RepresentDecoder::Retransmissions { group_size } => {
                    decode_retransmissions(&trace, *group_size)?
                }
                RepresentDecoder::FrameCorruptions { slots_per_symbol } => {
                    decode_frame_corruptions(&trace, *slots_per_symbol)?
                }
                RepresentDecoder::Direct => unreachable!("handled above"),
            }
        }
    };
    Ok(IndirectOutcome {
        sent: message.clone(),
        recovered,
        embed_id: sender.embedding_pattern(),
        represent_id: decoder.representation_pattern(sender),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::PacketFlow;
    use crate::embedders::{Params, StateValueParams};
    use crate::covers::CarrierBinding;

    fn channel() -> ChannelModel {
        ChannelModel {
            disconnect_values: [13].into_iter().collect(),
            known_clients: ["alpha".to_string()].into_iter().collect(),
            ..ChannelModel::default()
        }
    }

    #[test]
    fn value_modulation_reads_back_as_reconnections() {
        let sender = SenderSpec::ValueModulation {
            client_id: "alpha".into(),
            slot_us: 100_000,
            disconnect_value: 13,
            benign_value: 1,
        };
        let decoder = RepresentDecoder::Reconnections {
            client_ids: vec!["alpha".into()],
            slot_us: 100_000,
        };
        let msg = SecretMessage::from_hex("d").unwrap(); // 1101
        let outcome = run_indirect_channel(&sender, &decoder, &channel(), &msg).unwrap();
        assert_eq!(outcome.recovered, msg);
        assert_ne!(outcome.embed_id, outcome.represent_id);
        assert_eq!(outcome.embed_id.canonical(), "EN4");
        assert_eq!(outcome.represent_id.canonical(), "RN7n");
    }

    #[test]
    fn element_loss_reads_back_as_retransmissions() {
        let sender = SenderSpec::ElementLoss {
            group_size: 2,
            base_seq: 500,
            gap_us: 1_000,
        };
        let decoder = RepresentDecoder::Retransmissions { group_size: 2 };
        let msg = SecretMessage::from_hex("beef").unwrap();
        let outcome = run_indirect_channel(&sender, &decoder, &channel(), &msg).unwrap();
        assert_eq!(outcome.recovered, msg);
        assert_eq!(outcome.embed_id.canonical(), "EN1");
        assert_eq!(outcome.represent_id.canonical(), "RN6n");
    }

    #[test]
    fn event_occurrence_reads_back_as_frame_corruptions() {
        let sender = SenderSpec::EventOccurrence { slots_per_symbol: 8 };
        let decoder = RepresentDecoder::FrameCorruptions { slots_per_symbol: 8 };
        let msg = SecretMessage::from_hex("0ddba11").unwrap();
        let outcome = run_indirect_channel(&sender, &decoder, &channel(), &msg).unwrap();
        assert_eq!(outcome.recovered, msg);
        assert_eq!(outcome.embed_id.canonical(), "ET2");
        assert_eq!(outcome.represent_id.canonical(), "RT3n");
    }

    #[test]
    fn direct_lsb_channel_reports_equal_ids() {
        let flow = PacketFlow {
            packets: (0..64)
                .map(|i| crate::covers::Packet::with_field(i * 10, i + 1, "ttl", 64, 8))
                .collect(),
            events: vec![],
        };
        let spec = PatternSpec::new(
            PatternId::parse("EN4").unwrap(),
            CarrierBinding::Field("ttl".into()),
            Params::StateValue(StateValueParams { prng_seed: None }),
        );
        let sender = SenderSpec::Direct {
            spec,
            cover: CoverObject::Flow(flow),
        };
        let msg = SecretMessage::from_hex("1234").unwrap();
        let outcome =
            run_indirect_channel(&sender, &RepresentDecoder::Direct, &channel(), &msg).unwrap();
        assert_eq!(outcome.recovered, msg);
        assert_eq!(outcome.embed_id, outcome.represent_id);
    }
}
