//! Elements/features enumeration: the number of appearances carries the
//! bit — packet fragments on flows, space-run lengths in text.

use crate::covers::{CarrierBinding, Locator, ObjectHandle, PacketFlow, StyledChar, TextDocument};
use crate::message::{read_framed, FrameError, SecretMessage};

use super::{CodecError, EnumerationParams};

fn check(params: &EnumerationParams) -> Result<(), CodecError> {
    if params.n0 == 0 || params.n1 == 0 {
        return Err(CodecError::InvalidParams(
            "appearance counts must be at least 1".into(),
        ));
    }
    if params.n0 == params.n1 {
        return Err(CodecError::InvalidParams(
            "n0 and n1 must differ, otherwise counts are indistinguishable".into(),
        ));
    }
    Ok(())
}

fn check_flow_binding(binding: &CarrierBinding) -> Result<(), CodecError> {
    match binding {
        CarrierBinding::Elements => Ok(()),
        other => Err(CodecError::unknown_binding(format!(
            "enumeration on flows replicates packets, not {other}"
        ))),
    }
}

/// Adjacent packets must differ in seq so replica runs stay attributable.
fn check_distinct_adjacent(flow: &PacketFlow) -> Result<(), CodecError> {
    if flow.packets.windows(2).any(|w| w[0].seq == w[1].seq) {
        return Err(CodecError::InvalidParams(
            "enumeration needs distinct adjacent sequence numbers in the cover".into(),
        ));
    }
    Ok(())
}

pub(super) fn flow_capacity(
    flow: &PacketFlow,
    params: &EnumerationParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    check(params)?;
    check_flow_binding(binding)?;
    if check_distinct_adjacent(flow).is_err() {
        return Ok(0);
    }
    Ok(flow.packets.len() as u64)
}

/// Packet i appears n1 times for bit 1, n0 times for bit 0. Replicas share
/// the original timestamp, so nothing temporal changes.
pub(super) fn flow_embed(
    flow: &PacketFlow,
    framed: &[bool],
    params: &EnumerationParams,
) -> Result<(PacketFlow, Vec<ObjectHandle>), CodecError> {
    check_distinct_adjacent(flow)?;
    let mut stego = PacketFlow {
        packets: Vec::new(),
        events: flow.events.clone(),
    };
    let mut handles = Vec::new();
    for (i, p) in flow.packets.iter().enumerate() {
        let count = match framed.get(i) {
            Some(true) => params.n1,
            Some(false) => params.n0,
            None => 1,
        };
        for _ in 0..count {
            stego.packets.push(p.clone());
        }
        if i < framed.len() {
            handles.push(ObjectHandle {
                index: i,
                locator: Locator::Packet(i),
                value: count as u64,
                width_bits: None,
            });
        }
    }
    Ok((stego, handles))
}

pub(super) fn flow_extract(
    flow: &PacketFlow,
    params: &EnumerationParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    check(params)?;
    check_flow_binding(binding)?;
    // Runs of consecutive packets with equal seq.
    let mut runs: Vec<u32> = Vec::new();
    let mut iter = flow.packets.iter().peekable();
    while let Some(p) = iter.next() {
        let mut run = 1u32;
        while iter.peek().is_some_and(|q| q.seq == p.seq) {
            iter.next();
            run += 1;
        }
        runs.push(run);
    }
    read_framed(runs.len(), |i| {
        let run = runs[i];
        if run == params.n1 {
            Ok(true)
        } else if run == params.n0 {
            Ok(false)
        } else {
            Err(CodecError::Frame(FrameError::Garbled(format!(
                "run of {run} replicas matches neither n0={} nor n1={}",
                params.n0, params.n1
            ))))
        }
    })
}

fn check_text_binding(binding: &CarrierBinding) -> Result<(), CodecError> {
    match binding {
        CarrierBinding::Whitespace => Ok(()),
        other => Err(CodecError::unknown_binding(format!(
            "enumeration on text resizes space runs, not {other}"
        ))),
    }
}

/// Maximal runs of U+0020 as (start, len).
fn space_runs(doc: &TextDocument) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut i = 0usize;
    while i < doc.chars.len() {
        if doc.chars[i].ch == ' ' {
            let start = i;
            while i < doc.chars.len() && doc.chars[i].ch == ' ' {
                i += 1;
            }
            runs.push((start, i - start));
        } else {
            i += 1;
        }
    }
    runs
}

pub(super) fn text_capacity(
    doc: &TextDocument,
    params: &EnumerationParams,
    binding: &CarrierBinding,
) -> Result<u64, CodecError> {
    check(params)?;
    check_text_binding(binding)?;
    Ok(space_runs(doc).len() as u64)
}

pub(super) fn text_embed(
    doc: &TextDocument,
    framed: &[bool],
    params: &EnumerationParams,
) -> Result<(TextDocument, Vec<ObjectHandle>), CodecError> {
    let runs = space_runs(doc);
    let mut stego = TextDocument::default();
    let mut handles = Vec::new();
    let mut run_idx = 0usize;
    let mut i = 0usize;
    while i < doc.chars.len() {
        if run_idx < runs.len() && runs[run_idx].0 == i {
            let (start, len) = runs[run_idx];
            let target = match framed.get(run_idx) {
                Some(true) => params.n1 as usize,
                Some(false) => params.n0 as usize,
                None => len,
            };
            if run_idx < framed.len() {
                handles.push(ObjectHandle {
                    index: run_idx,
                    locator: Locator::SpaceRun { start, len: target },
                    value: target as u64,
                    width_bits: None,
                });
            }
            for _ in 0..target {
                stego.chars.push(StyledChar::plain(' '));
            }
            i += len;
            run_idx += 1;
        } else {
            stego.chars.push(doc.chars[i]);
            i += 1;
        }
    }
    Ok((stego, handles))
}

pub(super) fn text_extract(
    doc: &TextDocument,
    params: &EnumerationParams,
    binding: &CarrierBinding,
) -> Result<SecretMessage, CodecError> {
    check(params)?;
    check_text_binding(binding)?;
    let runs = space_runs(doc);
    read_framed(runs.len(), |i| {
        let (_, len) = runs[i];
        if len == params.n1 as usize {
            Ok(true)
        } else if len == params.n0 as usize {
            Ok(false)
        } else {
            Err(CodecError::Frame(FrameError::Garbled(format!(
                "space run of {len} matches neither n0={} nor n1={}",
                params.n0, params.n1
            ))))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covers::Packet;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn whitespace_duplication_matches_documented_text() {
        // "a b c", n0=1, n1=2, bits 10 -> "a  b c"
        let doc = TextDocument::from_plain("a b c");
        let params = EnumerationParams { n0: 1, n1: 2 };
        let (stego, _) = text_embed(&doc, &bits("10"), &params).unwrap();
        assert_eq!(stego.to_plain(), "a  b c");
    }

    #[test]
    fn zero_bits_leave_text_unchanged() {
        let doc = TextDocument::from_plain("a b c");
        let params = EnumerationParams { n0: 1, n1: 2 };
        let (stego, _) = text_embed(&doc, &bits("00"), &params).unwrap();
        assert_eq!(stego.to_plain(), "a b c");
    }

    #[test]
    fn equal_counts_are_invalid() {
        let doc = TextDocument::from_plain("a b");
        let params = EnumerationParams { n0: 2, n1: 2 };
        assert!(matches!(
            text_capacity(&doc, &params, &CarrierBinding::Whitespace),
            Err(CodecError::InvalidParams(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let doc = TextDocument::from_plain(&vec!["word"; 40].join(" "));
        let params = EnumerationParams { n0: 1, n1: 3 };
        let msg = SecretMessage::from_hex("5a5a").unwrap();
        let (stego, _) = text_embed(&doc, &msg.frame(), &params).unwrap();
        assert_eq!(
            text_extract(&stego, &params, &CarrierBinding::Whitespace).unwrap(),
            msg
        );
    }

    #[test]
    fn flow_fragments_round_trip_by_counting() {
        let flow = PacketFlow {
            packets: (0..40).map(|i| Packet::new(i * 10, i + 1)).collect(),
            events: vec![],
        };
        let params = EnumerationParams { n0: 2, n1: 3 };
        let msg = SecretMessage::from_hex("f00d").unwrap();
        let (stego, _) = flow_embed(&flow, &msg.frame(), &params).unwrap();
        // replicas keep the parent timestamp
        for w in stego.packets.windows(2) {
            if w[0].seq == w[1].seq {
                assert_eq!(w[0].ts_us, w[1].ts_us);
            }
        }
        assert_eq!(
            flow_extract(&stego, &params, &CarrierBinding::Elements).unwrap(),
            msg
        );
    }
}
