//! Elements/features positioning: a marker element is placed at a chosen
//! index inside a window — an option tag inside a packet's option list, or
//! a marker character inside a text paragraph.

use crate::covers::{CarrierBinding, Locator, ObjectHandle, PacketFlow, StyledChar, TextDocument};
use crate::message::{read_framed, FrameError, SecretMessage};

use super::{CodecError, PositioningParams};

fn check(params: &PositioningParams) -> Result<usize, CodecError> {
    if params.window < 2 || !params.window.is_power_of_two() {
        return Err(CodecError::InvalidParams(format!(
            "window must be a power of two >= 2, got {}",
            params.window
        )));
    }
    Ok(params.window.trailing_zeros() as usize)
}

fn marker_tag(binding: &CarrierBinding) -> Result<&str, CodecError> {
    match binding {
        CarrierBinding::Options(tag) => Ok(tag),
        other => Err(CodecError::unknown_binding(format!(
            "positioning on flows needs an options:TAG binding, got {other}"
        ))),
    }
}

/// Packets whose option list contains the marker and is long enough to
/// express every window index. Option tags are unique per packet, so the
/// marker occurs at most once.
fn usable_packets<'a>(
    flow: &'a PacketFlow,
    marker: &str,
    window: u32,
) -> Vec<(usize, usize)> {
    flow.packets
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let pos = p.options.iter().position(|t| t == marker)?;
            (p.options.len() >= window as usize).then_some((i, pos))
        })
        .collect()
}

pub(super) fn flow_capacity(
    flow: &PacketFlow,
    params: &PositioningParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    let bps = check(params)?;
    let marker = marker_tag(binding)?;
    Ok(usable_packets(flow, marker, params.window).len() as u64 * bps as u64)
}

pub(super) fn flow_embed(
    flow: &PacketFlow,
    framed: &[bool],
    params: &PositioningParams,
    binding: &CarrierBinding,
) -> Result<(PacketFlow, Vec<ObjectHandle>), CodecError> {
    let bps = check(params)?;
    let marker = marker_tag(binding)?;
    let usable = usable_packets(flow, marker, params.window);
    let symbols = framed.len().div_ceil(bps);
    let mut stego = flow.clone();
    let mut handles = Vec::with_capacity(symbols);
    for (k, &(packet_idx, _)) in usable.iter().take(symbols).enumerate() {
        let mut v = 0usize;
        for j in 0..bps {
            let bit = framed.get(k * bps + j).copied().unwrap_or(false);
            v = (v << 1) | bit as usize;
        }
        let options = &mut stego.packets[packet_idx].options;
        let pos = options.iter().position(|t| t == marker).expect("usable");
        let tag = options.remove(pos);
        options.insert(v, tag);
        handles.push(ObjectHandle {
            index: k,
            locator: Locator::OptionList { packet: packet_idx },
            value: v as u64,
            width_bits: None,
        });
    }
    Ok((stego, handles))
}

pub(super) fn flow_extract(
    flow: &PacketFlow,
    params: &PositioningParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    let bps = check(params)?;
    let marker = marker_tag(binding)?;
    let usable = usable_packets(flow, marker, params.window);
    read_framed(usable.len() * bps, |i| {
        let (_, pos) = usable[i / bps];
        if pos >= params.window as usize {
            return Err(CodecError::Frame(FrameError::Garbled(format!(
                "marker at index {pos}, outside the {}-slot window",
                params.window
            ))));
        }
        let shift = bps - 1 - (i % bps);
        Ok((pos >> shift) & 1 == 1)
    })
}

fn marker_char(binding: &CarrierBinding) -> Result<char, CodecError> {
    match binding {
        CarrierBinding::MarkerChar(c) => Ok(*c),
        other => Err(CodecError::unknown_binding(format!(
            "positioning on text needs a char:C binding, got {other}"
        ))),
    }
}

/// Paragraph boundaries: newline-separated char ranges.
fn paragraphs(doc: &TextDocument) -> Vec<(usize, usize)> {
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

/// Paragraphs usable for positioning: exactly one marker occurrence and at
/// least `window` characters. Returns (range, marker offset).
fn usable_paragraphs(
    doc: &TextDocument,
    marker: char,
    window: u32,
) -> Vec<((usize, usize), usize)> {
    paragraphs(doc)
        .into_iter()
        .filter_map(|(start, end)| {
            let slice = &doc.chars[start..end];
            if slice.len() < window as usize {
                return None;
            }
            let mut occurrences = slice.iter().enumerate().filter(|(_, c)| c.ch == marker);
            let (pos, _) = occurrences.next()?;
            occurrences.next().is_none().then_some(((start, end), pos))
        })
        .collect()
}

pub(super) fn text_capacity(
    doc: &TextDocument,
    params: &PositioningParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    let bps = check(params)?;
    let marker = marker_char(binding)?;
    Ok(usable_paragraphs(doc, marker, params.window).len() as u64 * bps as u64)
}

pub(super) fn text_embed(
    doc: &TextDocument,
    framed: &[bool],
    params: &PositioningParams,
    binding: &CarrierBinding,
) -> Result<(TextDocument, Vec<ObjectHandle>), CodecError> {
    let bps = check(params)?;
    let marker = marker_char(binding)?;
    let usable = usable_paragraphs(doc, marker, params.window);
    let symbols = framed.len().div_ceil(bps);
    let mut stego = doc.clone();
    let mut handles = Vec::with_capacity(symbols);
    for (k, &((start, _end), pos)) in usable.iter().take(symbols).enumerate() {
        let mut v = 0usize;
        for j in 0..bps {
            let bit = framed.get(k * bps + j).copied().unwrap_or(false);
            v = (v << 1) | bit as usize;
        }
        let slice: &mut Vec<StyledChar> = &mut stego.chars;
        let ch = slice.remove(start + pos);
        slice.insert(start + v, ch);
        handles.push(ObjectHandle {
            index: k,
            locator: Locator::Char(start + v),
            value: v as u64,
            width_bits: None,
        });
    }
    Ok((stego, handles))
}

pub(super) fn text_extract(
    doc: &TextDocument,
    params: &PositioningParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    let bps = check(params)?;
    let marker = marker_char(binding)?;
    let usable = usable_paragraphs(doc, marker, params.window);
    read_framed(usable.len() * bps, |i| {
        let (_, pos) = usable[i / bps];
        if pos >= params.window as usize {
            return Err(CodecError::Frame(FrameError::Garbled(format!(
                "marker at offset {pos}, outside the {}-slot window",
                params.window
            ))));
        }
        let shift = bps - 1 - (i % bps);
        Ok((pos >> shift) & 1 == 1)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::Packet;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn flow_with_options(lists: &[&[&str]]) -> PacketFlow {
        PacketFlow {
            packets: lists
                .iter()
                .enumerate()
                .map(|(i, opts)| {
                    let mut p = Packet::new(i as u64 * 10, i as u64 + 1);
                    p.options = opts.iter().map(|s| s.to_string()).collect();
                    p
                })
                .collect(),
            events: vec![],
        }
    }

    #[test]
    fn marker_moves_to_documented_index() {
        // options [A,B,C], marker A, window 2, symbol 1 -> [B,A,C]
        let flow = flow_with_options(&[&["A", "B", "C"]]);
        let params = PositioningParams { window: 2 };
        let (stego, _) = flow_embed(
            &flow,
            &bits("1"),
            &params,
            &CarrierBinding::Options("A".into()),
        )
        .unwrap();
        assert_eq!(stego.packets[0].options, vec!["B", "A", "C"]);
    }

    #[test]
    fn symbol_zero_puts_marker_at_window_start() {
        let flow = flow_with_options(&[&["B", "A", "C", "D"]]);
        let params = PositioningParams { window: 4 };
        let (stego, _) = flow_embed(
            &flow,
            &bits("00"),
            &params,
            &CarrierBinding::Options("A".into()),
        )
        .unwrap();
        assert_eq!(stego.packets[0].options[0], "A");
    }

    #[test]
    fn wrong_binding_is_unknown_binding() {
        let flow = flow_with_options(&[&["A", "B"]]);
        let params = PositioningParams { window: 2 };
        assert!(matches!(
            flow_capacity(&flow, &params, &CarrierBinding::Payload),
            Err(CodecError::Binding(_))
        ));
    }

    #[test]
    fn flow_round_trip() {
        let lists: Vec<Vec<String>> = (0..40)
            .map(|i| {
                vec![
                    "A".to_string(),
                    format!("B{i}"),
                    format!("C{i}"),
                    format!("D{i}"),
                ]
            })
            .collect();
        let mut flow = PacketFlow::default();
        for (i, opts) in lists.iter().enumerate() {
            let mut p = Packet::new(i as u64 * 10, i as u64 + 1);
            p.options = opts.clone();
            flow.packets.push(p);
        }
        let params = PositioningParams { window: 4 };
        let binding = CarrierBinding::Options("A".into());
        let msg = SecretMessage::from_hex("0bad").unwrap();
        let (stego, _) = flow_embed(&flow, &msg.frame(), &params, &binding).unwrap();
        assert_eq!(flow_extract(&stego, &params, &binding).unwrap(), msg);
    }

    #[test]
    fn text_round_trip_moves_markers_inside_paragraphs() {
        let paragraph = "qwerty x asdfgh";
        let text = vec![paragraph; 25].join("\n");
        let doc = TextDocument::from_plain(&text);
        let params = PositioningParams { window: 4 };
        let binding = CarrierBinding::MarkerChar('x');
        let msg = SecretMessage::from_hex("77").unwrap();
        let (stego, _) = text_embed(&doc, &msg.frame(), &params, &binding).unwrap();
        // paragraph structure unchanged
        assert_eq!(
            stego.chars.iter().filter(|c| c.ch == '\n').count(),
            doc.chars.iter().filter(|c| c.ch == '\n').count()
        );
        assert_eq!(text_extract(&stego, &params, &binding).unwrap(), msg);
    }

    #[test]
    fn paragraph_with_two_markers_is_not_usable() {
        let doc = TextDocument::from_plain("xxabc\nx def");
        let usable = usable_paragraphs(&doc, 'x', 2);
        assert_eq!(usable.len(), 1);
    }
}
