//! Representation-pattern decoders: the covert receiver's side of the
//! derived patterns. Each one reads a framed message out of an
//! [`ObservationTrace`].

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::message::{read_framed, FrameError, SecretMessage};

use super::{ObservationKind, ObservationTrace, SimError};

/// Per seq-number group of `group_size`, bit 1 iff the group saw a
/// retransmission. Inverse of driving element-loss drops through the
/// simulator's ARQ.
pub fn decode_retransmissions(
    trace: &ObservationTrace,
    group_size: u32,
) -> Result<SecretMessage, SimError> {
    if group_size == 0 {
        return Err(SimError::InvalidParams("group_size must be positive".into()));
    }
    let mut seqs: BTreeSet<u64> = BTreeSet::new();
    let mut retransmitted: BTreeSet<u64> = BTreeSet::new();
    for obs in &trace.observations {
        match obs.kind {
            ObservationKind::PacketSeen => {
                if let Some(seq) = obs.seq {
                    seqs.insert(seq);
                }
            }
            ObservationKind::RetransmissionSeen => {
                if let Some(seq) = obs.seq {
                    seqs.insert(seq);
                    retransmitted.insert(seq);
                }
            }
            _ => {}
        }
    }
    let (Some(&min), Some(&max)) = (seqs.first(), seqs.last()) else {
        return Err(SimError::Frame(FrameError::MissingHeader { available: 0 }));
    };
    // Under ARQ every dropped seq reappears as a retransmission; a hole
    // means this trace did not come from an ARQ channel.
    if max - min + 1 != seqs.len() as u64 {
        return Err(SimError::Frame(FrameError::Garbled(
            "sequence hole without retransmission; not an ARQ trace".into(),
        )));
    }
    let groups = seqs.len() / group_size as usize;
    let retrans_groups: BTreeSet<u64> = retransmitted
        .iter()
        .map(|seq| (seq - min) / group_size as u64)
        .collect();
    read_framed(groups, |g| {
        Ok::<bool, SimError>(retrans_groups.contains(&(g as u64)))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReconnectionParams {
    /// The clients whose connection state carries the channel.
    pub client_ids: Vec<String>,
    /// Symbol slot duration; one bit per slot.
    pub slot_us: u64,
}

/// Per symbol slot, bit 1 iff a designated client reconnected in that
/// slot. Inverse of driving value modulation at the sender through the
/// channel's forced-disconnect behavior.
pub fn decode_reconnections(
    trace: &ObservationTrace,
    params: &ReconnectionParams,
) -> Result<SecretMessage, SimError> {
    if params.client_ids.is_empty() {
        return Err(SimError::InvalidParams("client_ids must be nonempty".into()));
    }
    if params.slot_us == 0 {
        return Err(SimError::InvalidParams("slot_us must be positive".into()));
    }
    let designated = |c: &Option<String>| {
        c.as_ref()
            .is_some_and(|c| params.client_ids.iter().any(|d| d == c))
    };
    if !trace.observations.iter().any(|o| designated(&o.client_id)) {
        return Err(SimError::Frame(FrameError::Garbled(format!(
            "no observation references clients {:?}",
            params.client_ids
        ))));
    }
    let reconnect_slots: BTreeSet<u64> = trace
        .observations
        .iter()
        .filter(|o| o.kind == ObservationKind::ClientReconnected && designated(&o.client_id))
        .map(|o| o.ts_us / params.slot_us)
        .collect();
    let slots = trace
        .observations
        .last()
        .map_or(0, |o| (o.ts_us / params.slot_us) as usize + 1);
    read_framed(slots, |i| {
        Ok::<bool, SimError>(reconnect_slots.contains(&(i as u64)))
    })
}

/// Symbols are the slot indices of corrupted frames, log2(slots_per_symbol)
/// bits each. Inverse of timing two frames into one slot per symbol.
pub fn decode_frame_corruptions(
    trace: &ObservationTrace,
    slots_per_symbol: u32,
) -> Result<SecretMessage, SimError> {
    if slots_per_symbol < 2 || !slots_per_symbol.is_power_of_two() {
        return Err(SimError::InvalidParams(format!(
            "slots_per_symbol must be a power of two >= 2, got {slots_per_symbol}"
        )));
    }
    let bps = slots_per_symbol.trailing_zeros() as usize;
    let symbols: Vec<u64> = trace
        .observations
        .iter()
        .filter(|o| o.kind == ObservationKind::CorruptedFrameSeen)
        .filter_map(|o| o.slot)
        .map(|slot| slot % slots_per_symbol as u64)
        .collect();
    read_framed(symbols.len() * bps, |i| {
        let shift = bps - 1 - (i % bps);
        Ok::<bool, SimError>((symbols[i / bps] >> shift) & 1 == 1)
    })
}
