//! Carrier data model: packet flows, text documents, and image buffers,
//! plus the glossary of modifiable objects and actions that pattern names
//! are built from.
//!
//! Carriers are immutable value types; codecs return fresh copies. Object
//! enumeration ([`enumerate_objects`]) exposes the modifiable objects of a
//! carrier as stable, ordered handles.

mod flow;
mod image;
mod text;

pub use flow::{FieldValue, FlowEvent, FlowEventKind, Packet, PacketFlow};
pub use image::ImageBuffer;
pub use text::{StyledChar, TextDocument};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The general object types secret data can be hidden in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModifiableObjectKind {
    /// A timed or forced appearance (connection setup, disconnect, ...).
    Event,
    /// A single unit of a sequence: packet, character, pixel.
    Element,
    /// A property of an element: header field, option list, char style.
    Feature,
    /// The temporal gap between two events or elements.
    Interval,
    /// A non-temporal numerical or positional quantity.
    StateValue,
}

/// What a pattern does to its object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionKind {
    Occurrence,
    Modulation,
    Corruption,
    Enumeration,
    Repeating,
    Positioning,
}

impl ActionKind {
    /// Repeating is the one action defined as a sub-form of another.
    pub fn is_enumeration_subform(self) -> bool {
        matches!(self, ActionKind::Repeating)
    }
}

impl fmt::Display for ModifiableObjectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Event => "Event",
            Self::Element => "Element",
            Self::Feature => "Feature",
            Self::Interval => "Interval",
            Self::StateValue => "StateValue",
        };
        f.write_str(s)
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Occurrence => "Occurrence",
            Self::Modulation => "Modulation",
            Self::Corruption => "Corruption",
            Self::Enumeration => "Enumeration",
            Self::Repeating => "Repeating",
            Self::Positioning => "Positioning",
        };
        f.write_str(s)
    }
}

/// A cover object: exactly one carrier variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverObject {
    Flow(PacketFlow),
    Text(TextDocument),
    Image(ImageBuffer),
}

impl CoverObject {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Flow(_) => "flow",
            Self::Text(_) => "text",
            Self::Image(_) => "image",
        }
    }

    pub fn as_flow(&self) -> Option<&PacketFlow> {
        match self {
            Self::Flow(f) => Some(f),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&TextDocument> {
        match self {
            Self::Text(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_image(&self) -> Option<&ImageBuffer> {
        match self {
            Self::Image(i) => Some(i),
            _ => None,
        }
    }
}

/// Which part of a carrier a pattern acts on.
///
/// The string form (used by the CLI) is `elements`, `events`, `intervals`,
/// `payload`, `pixels`, `chars`, `whitespace`, `lines`, `case`, `color`,
/// `field:NAME`, `options:TAG`, `char:C`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CarrierBinding {
    Elements,
    Events,
    Intervals,
    /// A named packet header field.
    Field(String),
    /// The per-packet option list, with a marker tag.
    Options(String),
    Payload,
    Pixels,
    Chars,
    /// A marker character inside text paragraphs.
    MarkerChar(char),
    /// Maximal runs of space characters.
    Whitespace,
    /// Newline-separated lines.
    Lines,
    /// Upper/lower case of case-significant letters.
    Case,
    /// Per-character color tags.
    ColorTag,
}

impl fmt::Display for CarrierBinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Elements => f.write_str("elements"),
            Self::Events => f.write_str("events"),
            Self::Intervals => f.write_str("intervals"),
            Self::Field(name) => write!(f, "field:{name}"),
            Self::Options(tag) => write!(f, "options:{tag}"),
            Self::Payload => f.write_str("payload"),
            Self::Pixels => f.write_str("pixels"),
            Self::Chars => f.write_str("chars"),
            Self::MarkerChar(c) => write!(f, "char:{c}"),
            Self::Whitespace => f.write_str("whitespace"),
            Self::Lines => f.write_str("lines"),
            Self::Case => f.write_str("case"),
            Self::ColorTag => f.write_str("color"),
        }
    }
}

impl FromStr for CarrierBinding {
    type Err = CoverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(name) = s.strip_prefix("field:") {
            if name.is_empty() {
                return Err(CoverError::UnknownBinding("empty field name".into()));
            }
            return Ok(Self::Field(name.to_string()));
        }
        if let Some(tag) = s.strip_prefix("options:") {
            if tag.is_empty() {
                return Err(CoverError::UnknownBinding("empty option tag".into()));
            }
            return Ok(Self::Options(tag.to_string()));
        }
        if let Some(c) = s.strip_prefix("char:") {
            let mut chars = c.chars();
            return match (chars.next(), chars.next()) {
                (Some(ch), None) => Ok(Self::MarkerChar(ch)),
                _ => Err(CoverError::UnknownBinding(format!(
                    "marker must be a single character, got {c:?}"
                ))),
            };
        }
        match s {
            "elements" => Ok(Self::Elements),
            "events" => Ok(Self::Events),
            "intervals" => Ok(Self::Intervals),
            "payload" => Ok(Self::Payload),
            "pixels" => Ok(Self::Pixels),
            "chars" => Ok(Self::Chars),
            "whitespace" => Ok(Self::Whitespace),
            "lines" => Ok(Self::Lines),
            "case" => Ok(Self::Case),
            "color" => Ok(Self::ColorTag),
            other => Err(CoverError::UnknownBinding(format!(
                "unrecognized binding {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("unknown binding: {0}")]
    UnknownBinding(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl CoverError {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Self::Parse {
            line,
            msg: msg.into(),
        }
    }
}

/// Where an enumerated object lives inside its carrier.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Locator {
    Packet(usize),
    /// Gap between packets `i` and `i + 1`.
    Gap(usize),
    /// Gap between events `i` and `i + 1`.
    EventGap(usize),
    PacketField { packet: usize, field: String },
    OptionList { packet: usize },
    Payload { packet: usize },
    Event(usize),
    Char(usize),
    Pixel(usize),
    Line(usize),
    SpaceRun { start: usize, len: usize },
}

/// An addressable modifiable object, in carrier order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectHandle {
    pub index: usize,
    pub locator: Locator,
    /// Snapshot of the object's value (gap in µs, field value, codepoint,
    /// pixel, ...).
    pub value: u64,
    pub width_bits: Option<u8>,
}

fn handle(index: usize, locator: Locator, value: u64, width_bits: Option<u8>) -> ObjectHandle {
    ObjectHandle {
        index,
        locator,
        value,
        width_bits,
    }
}

/// Enumerate the objects of `kind` addressed by `binding`, in carrier order.
/// The same cover always yields the same handles in the same order.
pub fn enumerate_objects(
    cover: &CoverObject,
    kind: ModifiableObjectKind,
    binding: &CarrierBinding,
) -> Result<Vec<ObjectHandle>, CoverError> {
    use CarrierBinding as B;
    use ModifiableObjectKind as K;

    let unsupported = || {
        Err(CoverError::UnknownBinding(format!(
            "{kind} objects via {binding} are not addressable on a {} carrier",
            cover.kind_name()
        )))
    };

    match (cover, kind) {
        (CoverObject::Flow(flow), K::Element) => match binding {
            B::Elements => Ok(flow
                .packets
                .iter()
                .enumerate()
                .map(|(i, p)| handle(i, Locator::Packet(i), p.seq, None))
                .collect()),
            _ => unsupported(),
        },
        (CoverObject::Flow(flow), K::Interval) => match binding {
            B::Intervals | B::Elements => Ok(flow
                .packet_gaps()
                .into_iter()
                .enumerate()
                .map(|(i, gap)| handle(i, Locator::Gap(i), gap, None))
                .collect()),
            B::Events => Ok(flow
                .event_gaps()
                .into_iter()
                .enumerate()
                .map(|(i, gap)| handle(i, Locator::EventGap(i), gap, None))
                .collect()),
            _ => unsupported(),
        },
        (CoverObject::Flow(flow), K::Feature) => match binding {
            B::Field(name) => {
                let handles: Vec<_> = flow
                    .packets
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| {
                        p.fields.get(name).map(|f| {
                            (
                                i,
                                Locator::PacketField {
                                    packet: i,
                                    field: name.clone(),
                                },
                                f.value,
                                Some(f.width_bits),
                            )
                        })
                    })
                    .enumerate()
                    .map(|(idx, (_, loc, v, w))| handle(idx, loc, v, w))
                    .collect();
                if handles.is_empty() {
                    return Err(CoverError::UnknownBinding(format!(
                        "no packet carries field {name:?}"
                    )));
                }
                Ok(handles)
            }
            B::Options(_) => Ok(flow
                .packets
                .iter()
                .enumerate()
                .map(|(i, p)| handle(i, Locator::OptionList { packet: i }, p.options.len() as u64, None))
                .collect()),
            _ => unsupported(),
        },
        (CoverObject::Flow(flow), K::StateValue) => match binding {
            B::Field(name) => enumerate_objects(cover, K::Feature, &B::Field(name.clone())),
            B::Payload => Ok(flow
                .packets
                .iter()
                .enumerate()
                .map(|(i, p)| handle(i, Locator::Payload { packet: i }, p.payload.len() as u64, None))
                .collect()),
            _ => unsupported(),
        },
        (CoverObject::Flow(flow), K::Event) => match binding {
            B::Events => Ok(flow
                .events
                .iter()
                .enumerate()
                .map(|(i, e)| handle(i, Locator::Event(i), e.ts_us, None))
                .collect()),
            _ => unsupported(),
        },
        (CoverObject::Text(text), K::Element) => match binding {
            B::Elements | B::Chars => Ok(text
                .chars
                .iter()
                .enumerate()
                .map(|(i, c)| handle(i, Locator::Char(i), c.ch as u64, None))
                .collect()),
            _ => unsupported(),
        },
        (CoverObject::Text(text), K::Feature) => match binding {
            B::Case => Ok(text
                .chars
                .iter()
                .enumerate()
                .filter(|(_, c)| c.case_significant)
                .enumerate()
                .map(|(idx, (i, c))| handle(idx, Locator::Char(i), c.ch.is_uppercase() as u64, None))
                .collect()),
            B::ColorTag => Ok(text
                .chars
                .iter()
                .enumerate()
                .map(|(i, c)| handle(i, Locator::Char(i), c.color_tag.map_or(0, u64::from), None))
                .collect()),
            _ => unsupported(),
        },
        (CoverObject::Image(img), K::Element | K::StateValue) => match binding {
            B::Elements | B::Pixels => Ok(img
                .pixels
                .iter()
                .enumerate()
                .map(|(i, &p)| handle(i, Locator::Pixel(i), u64::from(p), Some(8)))
                .collect()),
            _ => unsupported(),
        },
        _ => unsupported(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_packet_flow() -> CoverObject {
        let ts = [0u64, 1_000_000, 2_500_000, 2_500_000, 6_000_000];
        let mut flow = PacketFlow::default();
        for (i, &t) in ts.iter().enumerate() {
            flow.packets.push(Packet::with_field(t, i as u64 + 1, "ttl", 64, 8));
        }
        CoverObject::Flow(flow)
    }

    #[test]
    fn five_packets_have_four_interval_handles() {
        let handles = enumerate_objects(
            &five_packet_flow(),
            ModifiableObjectKind::Interval,
            &CarrierBinding::Intervals,
        )
        .unwrap();
        assert_eq!(handles.len(), 4);
        let gaps: Vec<u64> = handles.iter().map(|h| h.value).collect();
        assert_eq!(gaps, vec![1_000_000, 1_500_000, 0, 3_500_000]);
    }

    #[test]
    fn text_elements_count_characters() {
        let doc = CoverObject::Text(TextDocument::from_plain("ab c"));
        let handles =
            enumerate_objects(&doc, ModifiableObjectKind::Element, &CarrierBinding::Elements)
                .unwrap();
        assert_eq!(handles.len(), 4);
    }

    #[test]
    fn field_features_carry_value_and_width() {
        let handles = enumerate_objects(
            &five_packet_flow(),
            ModifiableObjectKind::Feature,
            &CarrierBinding::Field("ttl".into()),
        )
        .unwrap();
        assert_eq!(handles.len(), 5);
        assert!(handles.iter().all(|h| h.value == 64 && h.width_bits == Some(8)));
    }

    #[test]
    fn missing_field_is_unknown_binding() {
        let err = enumerate_objects(
            &five_packet_flow(),
            ModifiableObjectKind::Feature,
            &CarrierBinding::Field("hop".into()),
        )
        .unwrap_err();
        assert!(matches!(err, CoverError::UnknownBinding(_)));
    }

    #[test]
    fn element_minus_one_equals_interval_count() {
        let cover = five_packet_flow();
        let elems =
            enumerate_objects(&cover, ModifiableObjectKind::Element, &CarrierBinding::Elements)
                .unwrap();
        let gaps = enumerate_objects(
            &cover,
            ModifiableObjectKind::Interval,
            &CarrierBinding::Intervals,
        )
        .unwrap();
        assert_eq!(gaps.len(), elems.len() - 1);
    }

    #[test]
    fn binding_strings_round_trip() {
        for s in [
            "elements", "events", "intervals", "payload", "pixels", "chars", "whitespace",
            "lines", "case", "color", "field:ttl", "options:A", "char:x",
        ] {
            let b: CarrierBinding = s.parse().unwrap();
            assert_eq!(b.to_string(), s);
        }
        assert!("field:".parse::<CarrierBinding>().is_err());
        assert!("bogus".parse::<CarrierBinding>().is_err());
    }
}
