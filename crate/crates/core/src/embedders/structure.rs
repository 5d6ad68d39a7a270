//! Feature structure modulation: element sizes padded into congruence
//! classes (payloads, text lines) and per-character features (case,
//! color tags).

use crate::covers::{CarrierBinding, Locator, ObjectHandle, PacketFlow, StyledChar, TextDocument};
use crate::message::{read_framed, FrameError, SecretMessage};

use super::{CharFeature, CharFeatureParams, CodecError, SizeParams};

fn check_size(params: &SizeParams) -> Result<(), CodecError> {
    if params.quantum == 0 {
        return Err(CodecError::InvalidParams("quantum must be positive".into()));
    }
    Ok(())
}

/// Smallest size >= `size` whose residue mod 2q falls in the class of
/// `bit`: [0, q) for 0, [q, 2q) for 1. Sizes only ever grow.
fn pad_to_class(size: u64, quantum: u64, bit: bool) -> u64 {
    let period = 2 * quantum;
    let r = size % period;
    let in_class = if bit { r >= quantum } else { r < quantum };
    if in_class {
        size
    } else if bit {
        size + (quantum - r)
    } else {
        size + (period - r)
    }
}

fn size_bit(size: u64, quantum: u64) -> bool {
    size % (2 * quantum) >= quantum
}

fn check_payload_binding(binding: &CarrierBinding) -> Result<(), CodecError> {
    match binding {
        CarrierBinding::Payload => Ok(()),
        other => Err(CodecError::unknown_binding(format!(
            "size modulation on flows pads payloads, not {other}"
        ))),
    }
}

pub(super) fn flow_capacity(
    flow: &PacketFlow,
    params: &SizeParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    check_size(params)?;
    check_payload_binding(binding)?;
    Ok(flow.packets.len() as u64)
}

pub(super) fn flow_embed(
    flow: &PacketFlow,
    framed: &[bool],
    params: &SizeParams,
) -> Result<(PacketFlow, Vec<ObjectHandle>), CodecError> {
    let mut stego = flow.clone();
    let mut handles = Vec::with_capacity(framed.len());
    for (i, &bit) in framed.iter().enumerate() {
        let p = &mut stego.packets[i];
        let target = pad_to_class(p.payload.len() as u64, params.quantum, bit);
        p.payload.resize(target as usize, 0);
        handles.push(ObjectHandle {
            index: i,
            locator: Locator::Payload { packet: i },
            value: target,
            width_bits: None,
        });
    }
    Ok((stego, handles))
}

pub(super) fn flow_extract(
    flow: &PacketFlow,
    params: &SizeParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    check_size(params)?;
    check_payload_binding(binding)?;
    read_framed(flow.packets.len(), |i| {
        Ok::<bool, CodecError>(size_bit(
            flow.packets[i].payload.len() as u64,
            params.quantum,
        ))
    })
}

fn check_lines_binding(binding: &CarrierBinding) -> Result<(), CodecError> {
    match binding {
        CarrierBinding::Lines => Ok(()),
        other => Err(CodecError::unknown_binding(format!(
            "size modulation on text pads lines, not {other}"
        ))),
    }
}

/// Newline-separated line ranges, like `str::split('\n')`.
fn lines(doc: &TextDocument) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0usize;
    for (i, c) in doc.chars.iter().enumerate() {
        if c.ch == '\n' {
            out.push((start, i));
            start = i + 1;
        }
    }
    out.push((start, doc.chars.len()));
    out
}

pub(super) fn text_capacity(
    doc: &TextDocument,
    params: &SizeParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    check_size(params)?;
    check_lines_binding(binding)?;
    Ok(lines(doc).len() as u64)
}

pub(super) fn text_embed(
    doc: &TextDocument,
    framed: &[bool],
    params: &SizeParams,
) -> Result<(TextDocument, Vec<ObjectHandle>), CodecError> {
    let ranges = lines(doc);
    let mut stego = TextDocument::default();
    let mut handles = Vec::with_capacity(framed.len());
    for (i, &(start, end)) in ranges.iter().enumerate() {
        if i > 0 {
            stego.chars.push(StyledChar::plain('\n'));
        }
        stego.chars.extend_from_slice(&doc.chars[start..end]);
        if let Some(&bit) = framed.get(i) {
            let len = (end - start) as u64;
            let target = pad_to_class(len, params.quantum, bit);
            for _ in len..target {
                stego.chars.push(StyledChar::plain(' '));
            }
            handles.push(ObjectHandle {
                index: i,
                locator: Locator::Line(i),
                value: target,
                width_bits: None,
            });
        }
    }
    Ok((stego, handles))
}

pub(super) fn text_extract(
    doc: &TextDocument,
    params: &SizeParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    check_size(params)?;
    check_lines_binding(binding)?;
    let ranges = lines(doc);
    read_framed(ranges.len(), |i| {
        let (start, end) = ranges[i];
        Ok::<bool, CodecError>(size_bit((end - start) as u64, params.quantum))
    })
}

fn feature_for(
    params: &CharFeatureParams,
    binding: &CarrierBinding,
) -> Result<CharFeature, CodecError> {
    let bound = match binding {
        CarrierBinding::Case => Some(CharFeature::Case),
        CarrierBinding::ColorTag => Some(CharFeature::ColorTag),
        CarrierBinding::Chars => None,
        other => {
            return Err(CodecError::unknown_binding(format!(
                "character features bind to case or color, got {other}"
            )))
        }
    };
    match bound {
        Some(b) if b != params.feature => Err(CodecError::InvalidParams(format!(
            "binding selects {b:?} but params select {:?}",
            params.feature
        ))),
        _ => Ok(params.feature),
    }
}

fn case_targets(doc: &TextDocument) -> Vec<usize> {
    doc.chars
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.case_significant.then_some(i))
        .collect()
}

pub(super) fn char_feature_capacity(
    doc: &TextDocument,
    params: &CharFeatureParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    Ok(match feature_for(params, binding)? {
        CharFeature::Case => case_targets(doc).len() as u64,
        CharFeature::ColorTag => doc.chars.len() as u64,
    })
}

pub(super) fn char_feature_embed(
    doc: &TextDocument,
    framed: &[bool],
    params: &CharFeatureParams,
    binding: &CarrierBinding,
) -> Result<(TextDocument, Vec<ObjectHandle>), CodecError> {
    let feature = feature_for(params, binding)?;
    let mut stego = doc.clone();
    let mut handles = Vec::with_capacity(framed.len());
    match feature {
        CharFeature::Case => {
            let targets = case_targets(doc);
            for (k, &bit) in framed.iter().enumerate() {
                let i = targets[k];
                stego.chars[i] = stego.chars[i].with_case(bit);
                handles.push(ObjectHandle {
                    index: k,
                    locator: Locator::Char(i),
                    value: bit as u64,
                    width_bits: None,
                });
            }
        }
        CharFeature::ColorTag => {
            for (i, &bit) in framed.iter().enumerate() {
                stego.chars[i].color_tag = Some(bit as u8);
                handles.push(ObjectHandle {
                    index: i,
                    locator: Locator::Char(i),
                    value: bit as u64,
                    width_bits: None,
                });
            }
        }
    }
    Ok((stego, handles))
}

pub(super) fn char_feature_extract(
    doc: &TextDocument,
    params: &CharFeatureParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    match feature_for(params, binding)? {
        CharFeature::Case => {
            let targets = case_targets(doc);
            read_framed(targets.len(), |k| {
                Ok::<bool, CodecError>(doc.chars[targets[k]].ch.is_uppercase())
            })
        }
        CharFeature::ColorTag => read_framed(doc.chars.len(), |i| {
            match doc.chars[i].color_tag {
                Some(0) => Ok(false),
                Some(1) => Ok(true),
                other => Err(CodecError::Frame(FrameError::Garbled(format!(
                    "char {i} carries color tag {other:?}, not a bit"
                )))),
            }
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::Packet;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn pad_to_class_matches_brute_force() {
        // Oracle: the smallest s' >= s with s' mod 2q in the right class.
        for q in 1..=9u64 {
            for s in 0..=100u64 {
                for bit in [false, true] {
                    let oracle = (s..)
                        .find(|&x| {
                            let r = x % (2 * q);
                            if bit {
                                r >= q
                            } else {
                                r < q
                            }
                        })
                        .unwrap();
                    assert_eq!(pad_to_class(s, q, bit), oracle, "s={s} q={q} bit={bit}");
                }
            }
        }
    }

    #[test]
    fn ten_byte_payload_with_quantum_eight_stays_put_for_bit_one() {
        // 10 mod 16 = 10, already in [8, 16)
        assert_eq!(pad_to_class(10, 8, true), 10);
        assert_eq!(pad_to_class(10, 8, false), 16);
    }

    #[test]
    fn empty_payload_is_class_zero() {
        assert_eq!(pad_to_class(0, 8, false), 0);
    }

    #[test]
    fn quantum_zero_is_invalid() {
        let params = SizeParams { quantum: 0 };
        assert!(matches!(
            flow_capacity(&PacketFlow::default(), &params, &CarrierBinding::Payload),
            Err(CodecError::InvalidParams(_))
        ));
    }

    #[test]
    fn payload_sizes_round_trip() {
        let mut flow = PacketFlow::default();
        for i in 0..40u64 {
            let mut p = Packet::new(i * 10, i + 1);
            p.payload = vec![7u8; (i % 13) as usize];
            flow.packets.push(p);
        }
        let params = SizeParams { quantum: 4 };
        let msg = SecretMessage::from_hex("1d2c").unwrap();
        let (stego, _) = flow_embed(&flow, &msg.frame(), &params).unwrap();
        assert_eq!(
            flow_extract(&stego, &params, &CarrierBinding::Payload).unwrap(),
            msg
        );
        // padding only grows payloads
        for (a, b) in flow.packets.iter().zip(&stego.packets) {
            assert!(b.payload.len() >= a.payload.len());
            assert_eq!(&b.payload[..a.payload.len()], &a.payload[..]);
        }
    }

    #[test]
    fn line_sizes_round_trip() {
        let text: String = (0..30)
            .map(|i| "x".repeat(i % 7))
            .collect::<Vec<_>>()
            .join("\n");
        let doc = TextDocument::from_plain(&text);
        let params = SizeParams { quantum: 2 };
        let msg = SecretMessage::from_hex("3c").unwrap();
        let (stego, _) = text_embed(&doc, &msg.frame(), &params).unwrap();
        assert_eq!(
            text_extract(&stego, &params, &CarrierBinding::Lines).unwrap(),
            msg
        );
    }

    #[test]
    fn case_bits_set_documented_word() {
        // "host" with bits 1,0,0,0 becomes "Host"
        let doc = TextDocument::from_plain("host");
        let params = CharFeatureParams {
            feature: CharFeature::Case,
        };
        let (stego, _) =
            char_feature_embed(&doc, &bits("1000"), &params, &CarrierBinding::Case).unwrap();
        assert_eq!(stego.to_plain(), "Host");
    }

    #[test]
    fn all_zero_bits_lowercase_everything() {
        let doc = TextDocument::from_plain("HOST");
        let params = CharFeatureParams {
            feature: CharFeature::Case,
        };
        let (stego, _) =
            char_feature_embed(&doc, &bits("0000"), &params, &CarrierBinding::Case).unwrap();
        assert_eq!(stego.to_plain(), "host");
    }

    #[test]
    fn digits_only_text_has_zero_case_capacity() {
        let doc = TextDocument::from_plain("0123456789");
        let params = CharFeatureParams {
            feature: CharFeature::Case,
        };
        assert_eq!(
            char_feature_capacity(&doc, &params, &CarrierBinding::Case).unwrap(),
            0
        );
    }

    #[test]
    fn color_tags_round_trip() {
        let doc = TextDocument::from_plain(&"pattern text ".repeat(5));
        let params = CharFeatureParams {
            feature: CharFeature::ColorTag,
        };
        let msg = SecretMessage::from_hex("99aa").unwrap();
        let (stego, _) =
            char_feature_embed(&doc, &msg.frame(), &params, &CarrierBinding::ColorTag).unwrap();
        assert_eq!(
            char_feature_extract(&stego, &params, &CarrierBinding::ColorTag).unwrap(),
            msg
        );
    }

    #[test]
    fn case_round_trip_with_mixed_content() {
        let doc = TextDocument::from_plain("GET /index HTTP/1.1 Host: example test 0042");
        let params = CharFeatureParams {
            feature: CharFeature::Case,
        };
        let msg = SecretMessage::from_hex("4e").unwrap();
        let (stego, _) =
            char_feature_embed(&doc, &msg.frame(), &params, &CarrierBinding::Case).unwrap();
        assert_eq!(
            char_feature_extract(&stego, &params, &CarrierBinding::Case).unwrap(),
            msg
        );
    }
}
