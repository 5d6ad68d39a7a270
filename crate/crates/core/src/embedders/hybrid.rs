//! Hybrid codecs.
//!
//! Sequence modulation permutes packets inside fixed windows via
//! lexicographic Lehmer unranking; timestamps stay attached to positions,
//! so nothing temporal changes. The LACK composition carries one message
//! in interval delays and a second one blindly overwritten into the
//! payloads of the delayed packets.

use serde::{Deserialize, Serialize};

use crate::covers::{CarrierBinding, Locator, ObjectHandle, PacketFlow};
use crate::message::{read_framed, FrameError, SecretMessage};
use crate::perm;

use super::timing::{interval_embed, interval_extract};
use super::{CodecError, EmbedReport, IntervalParams, SequenceParams};

fn check_sequence(params: &SequenceParams) -> Result<usize, CodecError> {
    let n = params.reorder_window as usize;
    if n == 0 {
        return Err(CodecError::InvalidParams(
            "reorder_window must be positive".into(),
        ));
    }
    if n > perm::MAX_WINDOW {
        return Err(CodecError::InvalidParams(format!(
            "reorder_window {n} exceeds the {}-element limit",
            perm::MAX_WINDOW
        )));
    }
    Ok(n)
}

fn check_sequence_binding(binding: &CarrierBinding) -> Result<(), CodecError> {
    match binding {
        CarrierBinding::Elements => Ok(()),
        other => Err(CodecError::unknown_binding(format!(
            "sequence modulation reorders packets, not {other}"
        ))),
    }
}

/// Window seqs must ascend in the cover so the decoder can reconstruct the
/// pre-permutation order by sorting.
fn check_ascending_windows(flow: &PacketFlow, n: usize) -> Result<(), CodecError> {
    for window in flow.packets.chunks_exact(n) {
        if window.windows(2).any(|w| w[0].seq >= w[1].seq) {
            return Err(CodecError::InvalidParams(
                "sequence modulation needs ascending sequence numbers inside each window".into(),
            ));
        }
    }
    Ok(())
}

pub(super) fn sequence_capacity(
    flow: &PacketFlow,
    params: &SequenceParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    let n = check_sequence(params)?;
    check_sequence_binding(binding)?;
    if check_ascending_windows(flow, n).is_err() {
        return Ok(0);
    }
    let windows = flow.packets.len() / n;
    Ok(windows as u64 * perm::rank_bits(n) as u64)
}

pub(super) fn sequence_embed(
    flow: &PacketFlow,
    framed: &[bool],
    params: &SequenceParams,
) -> Result<(PacketFlow, Vec<ObjectHandle>), CodecError> {
    let n = check_sequence(params)?;
    check_ascending_windows(flow, n)?;
    let bits = perm::rank_bits(n) as usize;
    let mut stego = flow.clone();
    let mut handles = Vec::new();
    if bits == 0 {
        return Ok((stego, handles));
    }
    let windows_needed = framed.len().div_ceil(bits);
    for w in 0..windows_needed {
        let mut rank = 0u64;
        for j in 0..bits {
            let bit = framed.get(w * bits + j).copied().unwrap_or(false);
            rank = (rank << 1) | bit as u64;
        }
        let permutation = perm::unrank(n, rank);
        let base = w * n;
        let original: Vec<_> = flow.packets[base..base + n].to_vec();
        for (j, &src) in permutation.iter().enumerate() {
            let ts = original[j].ts_us;
            stego.packets[base + j] = original[src].clone();
            // timestamps belong to transmission slots, not to packets
            stego.packets[base + j].ts_us = ts;
            handles.push(ObjectHandle {
                index: base + j,
                locator: Locator::Packet(base + j),
                value: stego.packets[base + j].seq,
                width_bits: None,
            });
        }
    }
    Ok((stego, handles))
}

pub(super) fn sequence_extract(
    flow: &PacketFlow,
    params: &SequenceParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    let n = check_sequence(params)?;
    check_sequence_binding(binding)?;
    let bits = perm::rank_bits(n) as usize;
    let windows = flow.packets.len() / n;
    read_framed(windows * bits, |i| {
        let w = i / bits;
        let base = w * n;
        let window = &flow.packets[base..base + n];
        let mut sorted: Vec<u64> = window.iter().map(|p| p.seq).collect();
        sorted.sort_unstable();
        let permutation: Vec<usize> = window
            .iter()
            .map(|p| sorted.binary_search(&p.seq).expect("seq in own window"))
            .collect();
        let rank = perm::rank(&permutation);
        if rank >> bits != 0 {
            return Err(CodecError::Frame(FrameError::Garbled(format!(
                "window {w} permutation rank {rank} exceeds {bits} bits"
            ))));
        }
        let shift = bits - 1 - (i % bits);
        Ok((rank >> shift) & 1 == 1)
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LackParams {
    pub base_us: u64,
    pub delta_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LackReport {
    pub timing: EmbedReport,
    pub payload: EmbedReport,
}

fn interval_params(params: &LackParams) -> Result<IntervalParams, CodecError> {
    if params.base_us == 0 || params.delta_us == 0 {
        return Err(CodecError::InvalidParams(
            "base_us and delta_us must be positive".into(),
        ));
    }
    Ok(IntervalParams {
        base_us: params.base_us,
        delta_us: params.delta_us,
    })
}

/// Packets that follow a delayed gap, looking only at the framed timing
/// region.
fn delayed_packets(gaps: &[u64], framed_timing_len: usize, params: &LackParams) -> Vec<usize> {
    gaps.iter()
        .take(framed_timing_len)
        .enumerate()
        .filter_map(|(i, &gap)| {
            (2 * u128::from(gap.saturating_sub(params.base_us)) >= u128::from(params.delta_us))
                .then_some(i + 1)
        })
        .collect()
}

/// Compose interval modulation with a blind payload overwrite: the timing
/// message selects which packets are delayed, and the payload message is
/// written into those packets' payload bytes. Both messages are framed and
/// independently recoverable from the stego flow.
pub fn hybrid_lack(
    flow: &PacketFlow,
    timing_message: &SecretMessage,
    payload_message: &SecretMessage,
    params: &LackParams,
) -> Result<(PacketFlow, LackReport), CodecError> {
    let iv = interval_params(params)?;
    let timing_capacity = flow.packets.len().saturating_sub(1) as u64;
    let framed_timing = timing_message.frame();
    if framed_timing.len() as u64 > timing_capacity {
        return Err(CodecError::InsufficientCapacity {
            needed: framed_timing.len() as u64,
            available: timing_capacity,
        });
    }
    let (mut stego, timing_handles) = interval_embed(flow, &framed_timing, &iv)?;

    let delayed = delayed_packets(&stego.packet_gaps(), framed_timing.len(), params);
    let payload_capacity: u64 = delayed
        .iter()
        .map(|&i| stego.packets[i].payload.len() as u64 * 8)
        .sum();
    let framed_payload = payload_message.frame();
    let mut payload_handles = Vec::new();
    let channel_skipped = payload_capacity == 0 && payload_message.is_empty();
    if !channel_skipped {
        // An empty payload channel with no delayed packets is represented
        // by its absence; anything else must fit the delayed payloads.
        if framed_payload.len() as u64 > payload_capacity {
            return Err(CodecError::InsufficientCapacity {
                needed: framed_payload.len() as u64,
                available: payload_capacity,
            });
        }
        let mut bit_idx = 0usize;
        for &i in &delayed {
            if bit_idx >= framed_payload.len() {
                break;
            }
            let payload = &mut stego.packets[i].payload;
            'bytes: for byte_idx in 0..payload.len() {
                for bit in 0..8 {
                    if bit_idx >= framed_payload.len() {
                        break 'bytes;
                    }
                    let mask = 1u8 << (7 - bit);
                    if framed_payload[bit_idx] {
                        payload[byte_idx] |= mask;
                    } else {
                        payload[byte_idx] &= !mask;
                    }
                    bit_idx += 1;
                }
            }
            payload_handles.push(ObjectHandle {
                index: payload_handles.len(),
                locator: Locator::Payload { packet: i },
                value: stego.packets[i].payload.len() as u64,
                width_bits: None,
            });
        }
    }
    Ok((
        stego,
        LackReport {
            timing: EmbedReport {
                bits_embedded: framed_timing.len() as u64,
                capacity_bits: timing_capacity,
                handles_touched: timing_handles,
            },
            payload: EmbedReport {
                bits_embedded: if channel_skipped {
                    0
                } else {
                    framed_payload.len() as u64
                },
                capacity_bits: payload_capacity,
                handles_touched: payload_handles,
            },
        },
    ))
}

/// Recover both LACK channels: the timing message from the gaps, then the
/// payload message from the delayed packets' payload bits.
pub fn extract_lack(
    flow: &PacketFlow,
    params: &LackParams,
) -> Result<(SecretMessage, SecretMessage), CodecError> {
    let iv = interval_params(params)?;
    let timing = interval_extract(flow, &iv, &CarrierBinding::Intervals)?;
    let framed_timing_len = timing.framed_len();
    let delayed = delayed_packets(&flow.packet_gaps(), framed_timing_len, params);
    let payload_bits: Vec<bool> = delayed
        .iter()
        .flat_map(|&i| {
            flow.packets[i]
                .payload
                .iter()
                .flat_map(|&byte| (0..8).map(move |bit| (byte >> (7 - bit)) & 1 == 1))
        })
        .collect();
    let payload = if payload_bits.is_empty() {
        SecretMessage::empty()
    } else {
        read_framed(payload_bits.len(), |i| {
            Ok::<bool, CodecError>(payload_bits[i])
        })?
    };
    Ok((timing, payload))
}
