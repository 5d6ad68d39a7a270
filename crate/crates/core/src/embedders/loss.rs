//! Artificial element loss: bit 1 drops the first packet of a sequence
//! group, bit 0 keeps the group intact. The decoder reads absence: a hole
//! at a group's first sequence number is a 1.

use crate::covers::{CarrierBinding, Locator, ObjectHandle, PacketFlow};
use crate::message::{read_framed, SecretMessage, FRAME_HEADER_BITS, MAX_MESSAGE_BITS};

use super::{CodecError, LossParams};

fn check(params: &LossParams) -> Result<(), CodecError> {
    if params.group_size == 0 {
        return Err(CodecError::InvalidParams("group_size must be positive".into()));
    }
    Ok(())
}

fn check_binding(binding: &CarrierBinding) -> Result<(), CodecError> {
    match binding {
        CarrierBinding::Elements => Ok(()),
        other => Err(CodecError::unknown_binding(format!(
            "element loss drops packets, not {other}"
        ))),
    }
}

/// The cover must carry consecutive ascending sequence numbers so holes are
/// attributable to drops.
fn check_consecutive(flow: &PacketFlow, base: u64) -> Result<(), CodecError> {
    for (i, p) in flow.packets.iter().enumerate() {
        if p.seq != base + i as u64 {
            return Err(CodecError::InvalidParams(format!(
                "element loss needs consecutive sequence numbers from {base}, packet {i} has seq {}",
                p.seq
            )));
        }
    }
    Ok(())
}

pub(super) fn capacity(
    flow: &PacketFlow,
    params: &LossParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    check(params)?;
    check_binding(binding)?;
    let base = match (params.base_seq, flow.packets.first()) {
        (Some(b), _) => b,
        (None, Some(p)) => p.seq,
        (None, None) => return Ok(0),
    };
    if check_consecutive(flow, base).is_err() {
        return Ok(0);
    }
    Ok(flow.packets.len() as u64 / params.group_size as u64)
}

pub(super) fn embed(
    flow: &PacketFlow,
    framed: &[bool],
    params: &LossParams,
) -> Result<(PacketFlow, Vec<ObjectHandle>), CodecError> {
    let base = params
        .base_seq
        .or_else(|| flow.packets.first().map(|p| p.seq))
        .ok_or(CodecError::InsufficientCapacity {
            needed: framed.len() as u64,
            available: 0,
        })?;
    check_consecutive(flow, base)?;
    let group = params.group_size as usize;
    let mut handles = Vec::new();
    let mut stego = PacketFlow {
        packets: Vec::with_capacity(flow.packets.len()),
        events: flow.events.clone(),
    };
    for (i, p) in flow.packets.iter().enumerate() {
        let g = i / group;
        let dropped = g < framed.len() && framed[g] && i % group == 0;
        if dropped {
            handles.push(ObjectHandle {
                index: g,
                locator: Locator::Packet(i),
                value: p.seq,
                width_bits: None,
            });
        } else {
            stego.packets.push(p.clone());
        }
    }
    Ok((stego, handles))
}

pub(super) fn extract(
    flow: &PacketFlow,
    params: &LossParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    check(params)?;
    check_binding(binding)?;
    let seqs: std::collections::BTreeSet<u64> = flow.packets.iter().map(|p| p.seq).collect();
    let base = match (params.base_seq, seqs.first()) {
        (Some(b), _) => b,
        (None, Some(&min)) => min,
        (None, None) => {
            return Err(CodecError::Frame(crate::message::FrameError::MissingHeader {
                available: 0,
            }))
        }
    };
    // Absence is the signal, so any group index is readable; the frame
    // header bounds how far we actually look.
    let available = FRAME_HEADER_BITS + MAX_MESSAGE_BITS;
    let group = params.group_size as u64;
    read_framed(available, |g| {
        let first = base + g as u64 * group;
        Ok::<bool, CodecError>(!seqs.contains(&first))
    })
}
