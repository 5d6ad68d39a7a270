//! Temporal codecs: interval modulation, rate modulation, event occurrence.
//! These rewrite timestamps and nothing else.

use crate::covers::{CarrierBinding, Locator, ObjectHandle, PacketFlow};
use crate::message::{read_framed, SecretMessage};

use super::{CodecError, IntervalParams, OccurrenceParams, RateParams};

fn check_interval(params: &IntervalParams) -> Result<(), CodecError> {
    if params.base_us == 0 {
        return Err(CodecError::InvalidParams("base_us must be positive".into()));
    }
    if params.delta_us == 0 {
        return Err(CodecError::InvalidParams("delta_us must be positive".into()));
    }
    Ok(())
}

fn check_interval_binding(binding: &CarrierBinding) -> Result<(), CodecError> {
    match binding {
        CarrierBinding::Intervals | CarrierBinding::Elements => Ok(()),
        other => Err(CodecError::unknown_binding(format!(
            "interval modulation acts on packet gaps, not {other}"
        ))),
    }
}

pub(super) fn interval_capacity(
    flow: &PacketFlow,
    params: &IntervalParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    check_interval(params)?;
    check_interval_binding(binding)?;
    Ok(flow.packets.len().saturating_sub(1) as u64)
}

/// Gap i carries bit i: `base_us` for 0, `base_us + delta_us` for 1.
/// Packets after the message keep their original gaps, time-shifted.
pub(super) fn interval_embed(
    flow: &PacketFlow,
    framed: &[bool],
    params: &IntervalParams,
) -> Result<(PacketFlow, Vec<ObjectHandle>), CodecError> {
    let mut stego = flow.clone();
    let mut handles = Vec::with_capacity(framed.len());
    for i in 1..stego.packets.len() {
        let prev = stego.packets[i - 1].ts_us;
        let ts = if i <= framed.len() {
            let gap = params.base_us + if framed[i - 1] { params.delta_us } else { 0 };
            handles.push(ObjectHandle {
                index: i - 1,
                locator: Locator::Gap(i - 1),
                value: gap,
                width_bits: None,
            });
            prev + gap
        } else {
            prev + (flow.packets[i].ts_us - flow.packets[i - 1].ts_us)
        };
        stego.packets[i].ts_us = ts;
    }
    Ok((stego, handles))
}

pub(super) fn interval_extract(
    flow: &PacketFlow,
    params: &IntervalParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    check_interval(params)?;
    check_interval_binding(binding)?;
    let gaps = flow.packet_gaps();
    // bit = 1 iff gap >= base + delta/2, evaluated without truncation.
    read_framed(gaps.len(), |i| {
        let over = gaps[i].saturating_sub(params.base_us) as u128;
        Ok::<bool, CodecError>(2 * over >= params.delta_us as u128)
    })
}

fn check_rate(params: &RateParams) -> Result<(), CodecError> {
    if params.window_us == 0 {
        return Err(CodecError::InvalidParams("window_us must be positive".into()));
    }
    if params.lo_rate == 0 {
        return Err(CodecError::InvalidParams("lo_rate must be at least 1".into()));
    }
    if params.hi_rate <= params.lo_rate {
        return Err(CodecError::InvalidParams(
            "hi_rate must exceed lo_rate, otherwise the rates are indistinguishable".into(),
        ));
    }
    Ok(())
}

fn check_rate_binding(binding: &CarrierBinding) -> Result<(), CodecError> {
    match binding {
        CarrierBinding::Elements | CarrierBinding::Intervals => Ok(()),
        other => Err(CodecError::unknown_binding(format!(
            "rate modulation re-times packets, not {other}"
        ))),
    }
}

pub(super) fn rate_capacity(
    flow: &PacketFlow,
    params: &RateParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    check_rate(params)?;
    check_rate_binding(binding)?;
    // Worst case every window runs at hi_rate.
    Ok(flow.packets.len() as u64 / params.hi_rate as u64)
}

/// Window w holds hi_rate packets for bit 1, lo_rate for bit 0; packets are
/// spread evenly inside each window. Leftover packets land in trailing
/// windows at lo_rate so the flow stays monotone.
pub(super) fn rate_embed(
    flow: &PacketFlow,
    framed: &[bool],
    params: &RateParams,
) -> Result<(PacketFlow, Vec<ObjectHandle>), CodecError> {
    let mut counts: Vec<u32> = framed
        .iter()
        .map(|&b| if b { params.hi_rate } else { params.lo_rate })
        .collect();
    let used: u64 = counts.iter().map(|&c| c as u64).sum();
    let mut leftover = flow.packets.len() as u64 - used;
    while leftover > 0 {
        let c = leftover.min(params.lo_rate as u64) as u32;
        counts.push(c);
        leftover -= c as u64;
    }
    let mut stego = flow.clone();
    let mut handles = Vec::with_capacity(stego.packets.len());
    let mut next = 0usize;
    for (w, &count) in counts.iter().enumerate() {
        let start = w as u64 * params.window_us;
        let spacing = params.window_us / count as u64;
        for j in 0..count {
            let ts = start + j as u64 * spacing;
            stego.packets[next].ts_us = ts;
            handles.push(ObjectHandle {
                index: next,
                locator: Locator::Packet(next),
                value: ts,
                width_bits: None,
            });
            next += 1;
        }
    }
    debug_assert_eq!(next, stego.packets.len());
    Ok((stego, handles))
}

pub(super) fn rate_extract(
    flow: &PacketFlow,
    params: &RateParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    check_rate(params)?;
    check_rate_binding(binding)?;
    let windows = match flow.packets.last() {
        Some(last) => (last.ts_us / params.window_us) as usize + 1,
        None => 0,
    };
    read_framed(windows, |w| {
        let start = w as u64 * params.window_us;
        let end = start + params.window_us;
        let count = flow
            .packets
            .iter()
            .filter(|p| p.ts_us >= start && p.ts_us < end)
            .count() as u64;
        // threshold at the midpoint of the two rates
        Ok::<bool, CodecError>(2 * count >= (params.hi_rate + params.lo_rate) as u64)
    })
}

fn check_occurrence(params: &OccurrenceParams) -> Result<(), CodecError> {
    if params.slot_us == 0 {
        return Err(CodecError::InvalidParams("slot_us must be positive".into()));
    }
    if params.slots_per_symbol < 2 || !params.slots_per_symbol.is_power_of_two() {
        return Err(CodecError::InvalidParams(format!(
            "slots_per_symbol must be a power of two >= 2, got {}",
            params.slots_per_symbol
        )));
    }
    Ok(())
}

fn check_occurrence_binding(binding: &CarrierBinding) -> Result<(), CodecError> {
    match binding {
        CarrierBinding::Events => Ok(()),
        other => Err(CodecError::unknown_binding(format!(
            "event occurrence schedules flow events, not {other}"
        ))),
    }
}

fn bits_per_symbol(slots: u32) -> usize {
    slots.trailing_zeros() as usize
}

pub(super) fn occurrence_capacity(
    flow: &PacketFlow,
    params: &OccurrenceParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    check_occurrence(params)?;
    check_occurrence_binding(binding)?;
    Ok(flow.events.len() as u64 * bits_per_symbol(params.slots_per_symbol) as u64)
}

/// Event k lands in symbol frame k at slot v, where v is the k-th group of
/// log2(slots) message bits. Events past the message keep their order in
/// later frames at slot 0.
pub(super) fn occurrence_embed(
    flow: &PacketFlow,
    framed: &[bool],
    params: &OccurrenceParams,
) -> Result<(PacketFlow, Vec<ObjectHandle>), CodecError> {
    let bps = bits_per_symbol(params.slots_per_symbol);
    let frame_us = params.slots_per_symbol as u64 * params.slot_us;
    let mut stego = flow.clone();
    let mut handles = Vec::with_capacity(stego.events.len());
    for (k, event) in stego.events.iter_mut().enumerate() {
        let mut v = 0u64;
        for j in 0..bps {
            let bit = framed.get(k * bps + j).copied().unwrap_or(false);
            v = (v << 1) | bit as u64;
        }
        event.ts_us = k as u64 * frame_us + v * params.slot_us;
        handles.push(ObjectHandle {
            index: k,
            locator: Locator::Event(k),
            value: event.ts_us,
            width_bits: None,
        });
    }
    Ok((stego, handles))
}

pub(super) fn occurrence_extract(
    flow: &PacketFlow,
    params: &OccurrenceParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    check_occurrence(params)?;
    check_occurrence_binding(binding)?;
    let bps = bits_per_symbol(params.slots_per_symbol);
    read_framed(flow.events.len() * bps, |i| {
        let event = &flow.events[i / bps];
        let v = (event.ts_us / params.slot_us) % params.slots_per_symbol as u64;
        let shift = bps - 1 - (i % bps);
        Ok::<bool, CodecError>((v >> shift) & 1 == 1)
    })
}
