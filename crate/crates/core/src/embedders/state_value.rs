//! State/value modulation and its three sub-forms.
//!
//! Plain writes one bit into the LSB of each bound value — the same rule
//! on a header field and on image pixels. Reserved/unused overwrites the
//! full width of reserved fields. Random whitens the framed bits with an
//! xorshift64* keystream before overwriting. Blind decides per packet
//! whether a 16-bit ones'-complement checksum over the payload stays valid.

use crate::covers::{CarrierBinding, ImageBuffer, Locator, ObjectHandle, PacketFlow};
use crate::keystream::KeystreamBits;
use crate::message::{read_framed, SecretMessage};

use super::{CodecError, En4Mode, StateValueParams};

/// Internet-style ones' complement of the ones'-complement sum over
/// big-endian 16-bit words, odd byte zero-padded.
pub fn ones_complement_checksum(payload: &[u8]) -> u16 {
    let mut sum: u32 = 0;
    for chunk in payload.chunks(2) {
        let word =
            (u32::from(chunk[0]) << 8) | chunk.get(1).copied().map_or(0, u32::from);
        sum += word;
    }
    while sum >> 16 != 0 {
        sum = (sum & 0xFFFF) + (sum >> 16);
    }
    !(sum as u16)
}

fn field_name<'a>(binding: &'a CarrierBinding) -> Result<&'a str, CodecError> {
    match binding {
        CarrierBinding::Field(name) => Ok(name),
        other => Err(CodecError::unknown_binding(format!(
            "state/value modulation on flows needs a field:NAME binding, got {other}"
        ))),
    }
}

/// Indices of packets carrying the bound field; empty means the binding is
/// unknown for this flow.
fn field_targets(
    flow: &PacketFlow,
    name: &str,
    require_reserved: bool,
) -> Result<Vec<usize>, CodecError> {
    let mut targets = Vec::new();
    let mut seen = false;
    for (i, p) in flow.packets.iter().enumerate() {
        if let Some(f) = p.fields.get(name) {
            seen = true;
            if require_reserved && !f.reserved {
                return Err(CodecError::InvalidParams(format!(
                    "reserved/unused modulation needs field {name:?} flagged reserved (packet {i})"
                )));
            }
            targets.push(i);
        }
    }
    if !seen {
        return Err(CodecError::unknown_binding(format!(
            "no packet carries field {name:?}"
        )));
    }
    Ok(targets)
}

fn check_mode(mode: En4Mode, params: &StateValueParams) -> Result<(), CodecError> {
    if mode == En4Mode::Random && params.prng_seed.is_none() {
        return Err(CodecError::InvalidParams(
            "random modulation needs prng_seed".into(),
        ));
    }
    Ok(())
}

pub(super) fn flow_capacity(
    flow: &PacketFlow,
    mode: En4Mode,
    params: &StateValueParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    check_mode(mode, params)?;
    let name = field_name(binding)?;
    let targets = field_targets(flow, name, mode == En4Mode::ReservedUnused)?;
    match mode {
        // One LSB per field occurrence.
        En4Mode::Plain => Ok(targets.len() as u64),
        // Full field width per occurrence.
        En4Mode::ReservedUnused | En4Mode::Random => Ok(targets
            .iter()
            .map(|&i| flow.packets[i].fields[name].width_bits as u64)
            .sum()),
        // Checksum valid/corrupt: one bit per occurrence.
        En4Mode::Blind => {
            for &i in &targets {
                if flow.packets[i].fields[name].width_bits != 16 {
                    return Err(CodecError::InvalidParams(format!(
                        "blind modulation needs a 16-bit checksum field, packet {i} has {} bits",
                        flow.packets[i].fields[name].width_bits
                    )));
                }
            }
            Ok(targets.len() as u64)
        }
    }
}

pub(super) fn flow_embed(
    flow: &PacketFlow,
    framed: &[bool],
    mode: En4Mode,
    params: &StateValueParams,
    binding: &CarrierBinding,
) -> Result<(PacketFlow, Vec<ObjectHandle>), CodecError> {
    let name = field_name(binding)?.to_string();
    let targets = field_targets(flow, &name, mode == En4Mode::ReservedUnused)?;
    let mut stego = flow.clone();
    let mut handles = Vec::new();
    let mut touch = |packet: usize, value: u64, width: u8, handles: &mut Vec<ObjectHandle>| {
        handles.push(ObjectHandle {
            index: handles.len(),
            locator: Locator::PacketField {
                packet,
                field: name.clone(),
            },
            value,
            width_bits: Some(width),
        });
    };
    match mode {
        En4Mode::Plain => {
            for (bit_idx, &i) in targets.iter().enumerate().take(framed.len()) {
                let f = stego.packets[i].fields.get_mut(&name).expect("target");
                f.value = (f.value & !1) | framed[bit_idx] as u64;
                let (v, w) = (f.value, f.width_bits);
                touch(i, v, w, &mut handles);
            }
        }
        En4Mode::ReservedUnused | En4Mode::Random => {
            let mut stream: Vec<bool> = framed.to_vec();
            if mode == En4Mode::Random {
                let mut ks = KeystreamBits::new(params.prng_seed.expect("checked"));
                for b in &mut stream {
                    *b ^= ks.next_bit();
                }
            }
            let mut consumed = 0usize;
            for &i in &targets {
                if consumed >= stream.len() {
                    break;
                }
                let f = stego.packets[i].fields.get_mut(&name).expect("target");
                let w = f.width_bits as usize;
                let mut v = 0u64;
                for j in 0..w {
                    let bit = stream.get(consumed + j).copied().unwrap_or(false);
                    v = (v << 1) | bit as u64;
                }
                f.value = v;
                consumed += w;
                let (v, wb) = (f.value, f.width_bits);
                touch(i, v, wb, &mut handles);
            }
        }
        En4Mode::Blind => {
            for (bit_idx, &i) in targets.iter().enumerate().take(framed.len()) {
                let valid = ones_complement_checksum(&stego.packets[i].payload);
                let f = stego.packets[i].fields.get_mut(&name).expect("target");
                f.value = if framed[bit_idx] {
                    u64::from(!valid)
                } else {
                    u64::from(valid)
                };
                let (v, w) = (f.value, f.width_bits);
                touch(i, v, w, &mut handles);
            }
        }
    }
    Ok((stego, handles))
}

pub(super) fn flow_extract(
    flow: &PacketFlow,
    mode: En4Mode,
    params: &StateValueParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    check_mode(mode, params)?;
    let name = field_name(binding)?;
    let targets = field_targets(flow, name, mode == En4Mode::ReservedUnused)?;
    match mode {
        En4Mode::Plain => read_framed(targets.len(), |i| {
            Ok::<bool, CodecError>(flow.packets[targets[i]].fields[name].value & 1 == 1)
        }),
        En4Mode::ReservedUnused | En4Mode::Random => {
            // Bit index -> (target, offset) through the concatenated widths.
            let mut raw = Vec::new();
            for &i in &targets {
                let f = &flow.packets[i].fields[name];
                let w = f.width_bits as usize;
                for j in 0..w {
                    raw.push((f.value >> (w - 1 - j)) & 1 == 1);
                }
            }
            if mode == En4Mode::Random {
                let mut ks = KeystreamBits::new(params.prng_seed.expect("checked"));
                for b in &mut raw {
                    *b ^= ks.next_bit();
                }
            }
            read_framed(raw.len(), |i| Ok::<bool, CodecError>(raw[i]))
        }
        En4Mode::Blind => {
            for &i in &targets {
                if flow.packets[i].fields[name].width_bits != 16 {
                    return Err(CodecError::InvalidParams(format!(
                        "blind modulation needs a 16-bit checksum field, packet {i} has {} bits",
                        flow.packets[i].fields[name].width_bits
                    )));
                }
            }
            read_framed(targets.len(), |i| {
                let p = &flow.packets[targets[i]];
                let valid = ones_complement_checksum(&p.payload);
                Ok::<bool, CodecError>(p.fields[name].value != u64::from(valid))
            })
        }
    }
}

fn check_pixel_binding(binding: &CarrierBinding) -> Result<(), CodecError> {
    match binding {
        CarrierBinding::Pixels | CarrierBinding::Elements => Ok(()),
        other => Err(CodecError::unknown_binding(format!(
            "state/value modulation on images writes pixel LSBs, not {other}"
        ))),
    }
}

pub(super) fn image_capacity(
    img: &ImageBuffer,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    check_pixel_binding(binding)?;
    Ok(img.pixels.len() as u64)
}

pub(super) fn image_embed(
    img: &ImageBuffer,
    framed: &[bool],
    binding: &CarrierBinding,
) -> Result<(ImageBuffer, Vec<ObjectHandle>), CodecError> {
    check_pixel_binding(binding)?;
    let mut stego = img.clone();
    let mut handles = Vec::with_capacity(framed.len());
    for (i, &bit) in framed.iter().enumerate() {
        stego.pixels[i] = (stego.pixels[i] & !1) | bit as u8;
        handles.push(ObjectHandle {
            index: i,
            locator: Locator::Pixel(i),
            value: u64::from(stego.pixels[i]),
            width_bits: Some(8),
        });
    }
    Ok((stego, handles))
}

pub(super) fn image_extract(
    img: &ImageBuffer,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    check_pixel_binding(binding)?;
    read_framed(img.pixels.len(), |i| {
        Ok::<bool, CodecError>(img.pixels[i] & 1 == 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::Packet;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn ttl_flow(values: &[u64]) -> PacketFlow {
        PacketFlow {
            packets: values
                .iter()
                .enumerate()
                .map(|(i, &v)| Packet::with_field(i as u64 * 10, i as u64 + 1, "ttl", v, 8))
                .collect(),
            events: vec![],
        }
    }

    #[test]
    fn plain_sets_lsb_of_even_ttl() {
        let flow = ttl_flow(&[64]);
        let params = StateValueParams { prng_seed: None };
        let binding = CarrierBinding::Field("ttl".into());
        let (stego, _) =
            flow_embed(&flow, &bits("1"), En4Mode::Plain, &params, &binding).unwrap();
        assert_eq!(stego.packets[0].fields["ttl"].value, 65);
    }

    #[test]
    fn plain_keeps_pixel_with_matching_lsb() {
        let img = ImageBuffer::new(1, 1, vec![200]).unwrap();
        let (stego, _) = image_embed(&img, &bits("0"), &CarrierBinding::Pixels).unwrap();
        assert_eq!(stego.pixels[0], 200);
    }

    #[test]
    fn plain_round_trip_on_flow_field() {
        let flow = ttl_flow(&(0..48).map(|i| (i * 3) % 256).collect::<Vec<u64>>());
        let params = StateValueParams { prng_seed: None };
        let binding = CarrierBinding::Field("ttl".into());
        let msg = SecretMessage::from_hex("cafe").unwrap();
        let (stego, _) = flow_embed(&flow, &msg.frame(), En4Mode::Plain, &params, &binding).unwrap();
        assert_eq!(
            flow_extract(&stego, En4Mode::Plain, &params, &binding).unwrap(),
            msg
        );
    }

    #[test]
    fn reserved_mode_requires_the_reserved_flag() {
        let flow = ttl_flow(&[64]);
        let params = StateValueParams { prng_seed: None };
        let binding = CarrierBinding::Field("ttl".into());
        assert!(matches!(
            flow_capacity(&flow, En4Mode::ReservedUnused, &params, &binding),
            Err(CodecError::InvalidParams(_))
        ));
    }

    #[test]
    fn reserved_round_trip_uses_full_width() {
        let mut flow = PacketFlow::default();
        for i in 0..8u64 {
            let mut p = Packet::with_field(i * 10, i + 1, "flags", 0, 12);
            p.fields.get_mut("flags").unwrap().reserved = true;
            flow.packets.push(p);
        }
        let params = StateValueParams { prng_seed: None };
        let binding = CarrierBinding::Field("flags".into());
        let cap = flow_capacity(&flow, En4Mode::ReservedUnused, &params, &binding).unwrap();
        assert_eq!(cap, 96);
        let msg = SecretMessage::from_hex("0123456789abcdef").unwrap();
        let (stego, _) = flow_embed(
            &flow,
            &msg.frame(),
            En4Mode::ReservedUnused,
            &params,
            &binding,
        )
        .unwrap();
        assert_eq!(
            flow_extract(&stego, En4Mode::ReservedUnused, &params, &binding).unwrap(),
            msg
        );
    }

    #[test]
    fn random_mode_needs_a_seed() {
        let flow = ttl_flow(&[64]);
        let params = StateValueParams { prng_seed: None };
        let binding = CarrierBinding::Field("ttl".into());
        assert!(matches!(
            flow_capacity(&flow, En4Mode::Random, &params, &binding),
            Err(CodecError::InvalidParams(_))
        ));
    }

    #[test]
    fn random_keystream_round_trips_many_seeds() {
        let flow = ttl_flow(&(0..20).map(|i| i % 256).collect::<Vec<u64>>());
        let binding = CarrierBinding::Field("ttl".into());
        for seed in 0..50u64 {
            let params = StateValueParams {
                prng_seed: Some(seed * 7919 + 1),
            };
            let msg = SecretMessage::from_hex("a5").unwrap();
            let (stego, _) =
                flow_embed(&flow, &msg.frame(), En4Mode::Random, &params, &binding).unwrap();
            assert_eq!(
                flow_extract(&stego, En4Mode::Random, &params, &binding).unwrap(),
                msg
            );
        }
    }

    #[test]
    fn blind_mode_flips_checksum_validity() {
        let mut flow = PacketFlow::default();
        for i in 0..2u64 {
            let mut p = Packet::with_field(i * 10, i + 1, "csum", 0, 16);
            p.payload = vec![1, 2, 3, 4 + i as u8];
            flow.packets.push(p);
        }
        let params = StateValueParams { prng_seed: None };
        let binding = CarrierBinding::Field("csum".into());
        let (stego, _) = flow_embed(&flow, &bits("10"), En4Mode::Blind, &params, &binding).unwrap();
        let c0 = ones_complement_checksum(&stego.packets[0].payload);
        let c1 = ones_complement_checksum(&stego.packets[1].payload);
        assert_ne!(stego.packets[0].fields["csum"].value, u64::from(c0));
        assert_eq!(stego.packets[1].fields["csum"].value, u64::from(c1));
    }

    #[test]
    fn checksum_words_are_big_endian_with_carry_fold() {
        // 0xFFFF + 0x0001 wraps to 0x0001 via end-around carry, then
        // complements.
        assert_eq!(ones_complement_checksum(&[0xff, 0xff, 0x00, 0x01]), !0x0001);
        assert_eq!(ones_complement_checksum(&[]), 0xffff);
        assert_eq!(ones_complement_checksum(&[0xab]), !0xab00);
    }
}
