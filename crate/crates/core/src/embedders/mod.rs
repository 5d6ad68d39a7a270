//! Embedding patterns as reversible codecs.
//!
//! Every pattern is a branch of three operations: [`capacity`] (the raw
//! framed-bit budget of a cover under a spec), [`embed`] (frame the message
//! and write it), and [`extract`] (read the frame back). Embedding never
//! succeeds unless the framed message fits the budget, extraction is the
//! exact inverse of embedding under the same spec, and objects outside the
//! reported handles stay bit-identical to the cover.

mod enumeration;
mod hybrid;
mod loss;
mod positioning;
mod state_value;
mod structure;
mod timing;

pub use hybrid::{extract_lack, hybrid_lack, LackParams, LackReport};
pub use state_value::ones_complement_checksum;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{PatternId, PatternKind};
use crate::covers::{CarrierBinding, CoverError, CoverObject, ObjectHandle};
use crate::message::{FrameError, SecretMessage};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("insufficient capacity: message needs {needed} bits, carrier offers {available}")]
    InsufficientCapacity { needed: u64, available: u64 },
    #[error("pattern {pattern} is not defined for {carrier} carriers")]
    UnsupportedCarrier { pattern: String, carrier: String },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Binding(#[from] CoverError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

impl CodecError {
    fn unknown_binding(msg: impl Into<String>) -> Self {
        Self::Binding(CoverError::UnknownBinding(msg.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum En4Mode {
    Plain,
    ReservedUnused,
    Random,
    Blind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalParams {
    pub base_us: u64,
    pub delta_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateParams {
    pub window_us: u64,
    pub hi_rate: u32,
    pub lo_rate: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccurrenceParams {
    pub slot_us: u64,
    pub slots_per_symbol: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossParams {
    pub group_size: u32,
    /// First sequence number of group 0. Defaults to the first seq of the
    /// cover at embed time and to the smallest observed seq at extract
    /// time; supply it explicitly for messages long enough that the very
    /// first group may carry a drop.
    #[serde(default)]
    pub base_seq: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PositioningParams {
    pub window: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerationParams {
    pub n0: u32,
    pub n1: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateValueParams {
    #[serde(default)]
    pub prng_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeParams {
    pub quantum: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharFeature {
    Case,
    ColorTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharFeatureParams {
    pub feature: CharFeature,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceParams {
    pub reorder_window: u32,
}

/// Pattern-specific parameter record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Params {
    Interval(IntervalParams),
    Rate(RateParams),
    Occurrence(OccurrenceParams),
    Loss(LossParams),
    Positioning(PositioningParams),
    Enumeration(EnumerationParams),
    StateValue(StateValueParams),
    Size(SizeParams),
    CharFeature(CharFeatureParams),
    Sequence(SequenceParams),
}

impl Params {
    /// Parse a flat JSON parameter object for the given pattern, checking
    /// completeness up front.
    pub fn parse_for(pattern: &PatternId, value: &serde_json::Value) -> Result<Self, CodecError> {
        fn take<T: serde::de::DeserializeOwned>(
            value: &serde_json::Value,
        ) -> Result<T, CodecError> {
            serde_json::from_value(value.clone())
                .map_err(|e| CodecError::InvalidParams(e.to_string()))
        }
        match pattern.canonical().as_str() {
            "ET1" => Ok(Self::Interval(take(value)?)),
            "ET1.1" => Ok(Self::Rate(take(value)?)),
            "ET2" => Ok(Self::Occurrence(take(value)?)),
            "EN1" => Ok(Self::Loss(take(value)?)),
            "EN2" => Ok(Self::Positioning(take(value)?)),
            "EN3" => Ok(Self::Enumeration(take(value)?)),
            "EN4" | "EN4.1" | "EN4.2" | "EN4.3" => Ok(Self::StateValue(take(value)?)),
            "EN5" => {
                if value.get("quantum").is_some() {
                    Ok(Self::Size(take(value)?))
                } else if value.get("feature").is_some() {
                    Ok(Self::CharFeature(take(value)?))
                } else {
                    Err(CodecError::InvalidParams(
                        "EN5 needs either a size record (quantum) or a character-feature record (feature)".into(),
                    ))
                }
            }
            "EN5.1" => Ok(Self::Size(take(value)?)),
            "EN5.2" => Ok(Self::CharFeature(take(value)?)),
            "RN8n" | "RN8.1n" => Ok(Self::Sequence(take(value)?)),
            other => Err(CodecError::UnsupportedCarrier {
                pattern: other.to_string(),
                carrier: "any".to_string(),
            }),
        }
    }
}

/// The dispatch key for every codec: a pattern, a carrier binding, and the
/// pattern's parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub pattern: PatternId,
    pub binding: CarrierBinding,
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<En4Mode>,
}

impl PatternSpec {
    pub fn new(pattern: PatternId, binding: CarrierBinding, params: Params) -> Self {
        Self {
            pattern,
            binding,
            params,
            mode: None,
        }
    }

    pub fn with_mode(mut self, mode: En4Mode) -> Self {
        self.mode = Some(mode);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbedReport {
    /// Framed bits written into the carrier.
    pub bits_embedded: u64,
    pub capacity_bits: u64,
    pub handles_touched: Vec<ObjectHandle>,
}

/// Which concrete codec a spec selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Codec {
    Et1,
    Et1Rate,
    Et2,
    En1,
    En2,
    En3,
    En4(En4Mode),
    En5Size,
    En5Char,
    HybridSequence,
}

fn codec_for(spec: &PatternSpec) -> Result<Codec, CodecError> {
    let id = spec.pattern.canonical();
    let fixed_mode = |expected: En4Mode| -> Result<Codec, CodecError> {
        match spec.mode {
            None => Ok(Codec::En4(expected)),
            Some(m) if m == expected => Ok(Codec::En4(expected)),
            Some(m) => Err(CodecError::InvalidParams(format!(
                "pattern {id} implies mode {expected:?}, got {m:?}"
            ))),
        }
    };
    match id.as_str() {
        "ET1" => Ok(Codec::Et1),
        "ET1.1" => Ok(Codec::Et1Rate),
        "ET2" => Ok(Codec::Et2),
        "EN1" => Ok(Codec::En1),
        "EN2" => Ok(Codec::En2),
        "EN3" => Ok(Codec::En3),
        "EN4" => Ok(Codec::En4(spec.mode.unwrap_or(En4Mode::Plain))),
        "EN4.1" => fixed_mode(En4Mode::ReservedUnused),
        "EN4.2" => fixed_mode(En4Mode::Random),
        "EN4.3" => fixed_mode(En4Mode::Blind),
        "EN5" => match spec.params {
            Params::Size(_) => Ok(Codec::En5Size),
            Params::CharFeature(_) => Ok(Codec::En5Char),
            _ => Err(CodecError::InvalidParams(
                "EN5 dispatches on its parameter record (size or character feature)".into(),
            )),
        },
        "EN5.1" => Ok(Codec::En5Size),
        "EN5.2" => Ok(Codec::En5Char),
        // The sequence-modulation hybrids are representation-side records;
        // they dispatch to the same reorder codec.
        "RN8n" | "RN8.1n" => Ok(Codec::HybridSequence),
        other => Err(CodecError::UnsupportedCarrier {
            pattern: other.to_string(),
            carrier: "any".to_string(),
        }),
    }
}

fn wrong_carrier(spec: &PatternSpec, cover: &CoverObject) -> CodecError {
    CodecError::UnsupportedCarrier {
        pattern: spec.pattern.canonical(),
        carrier: cover.kind_name().to_string(),
    }
}

macro_rules! expect_params {
    ($spec:expr, $variant:ident) => {
        match &$spec.params {
            Params::$variant(p) => Ok(p),
            other => Err(CodecError::InvalidParams(format!(
                "pattern {} needs a {} parameter record, got {:?}",
                $spec.pattern,
                stringify!($variant),
                other
            ))),
        }
    };
}

/// Exact framed-bit budget of `cover` under `spec`; zero when the carrier
/// is too small. Embedding succeeds iff the framed message length is at
/// most this number.
pub fn capacity(cover: &CoverObject, spec: &PatternSpec) -> Result<u64, CodecError> {
    validate_pattern_kind(spec)?;
    match (codec_for(spec)?, cover) {
        (Codec::Et1, CoverObject::Flow(f)) => {
            timing::interval_capacity(f, expect_params!(spec, Interval)?, &spec.binding)
        }
        (Codec::Et1Rate, CoverObject::Flow(f)) => {
            timing::rate_capacity(f, expect_params!(spec, Rate)?, &spec.binding)
        }
        (Codec::Et2, CoverObject::Flow(f)) => {
            timing::occurrence_capacity(f, expect_params!(spec, Occurrence)?, &spec.binding)
        }
        (Codec::En1, CoverObject::Flow(f)) => {
            loss::capacity(f, expect_params!(spec, Loss)?, &spec.binding)
        }
        (Codec::En2, CoverObject::Flow(f)) => {
            positioning::flow_capacity(f, expect_params!(spec, Positioning)?, &spec.binding)
        }
        (Codec::En2, CoverObject::Text(t)) => {
            positioning::text_capacity(t, expect_params!(spec, Positioning)?, &spec.binding)
        }
        (Codec::En3, CoverObject::Flow(f)) => {
            enumeration::flow_capacity(f, expect_params!(spec, Enumeration)?, &spec.binding)
        }
        (Codec::En3, CoverObject::Text(t)) => {
            enumeration::text_capacity(t, expect_params!(spec, Enumeration)?, &spec.binding)
        }
        (Codec::En4(mode), CoverObject::Flow(f)) => {
            state_value::flow_capacity(f, mode, expect_params!(spec, StateValue)?, &spec.binding)
        }
        (Codec::En4(En4Mode::Plain), CoverObject::Image(img)) => {
            state_value::image_capacity(img, &spec.binding)
        }
        (Codec::En5Size, CoverObject::Flow(f)) => {
            structure::flow_capacity(f, expect_params!(spec, Size)?, &spec.binding)
        }
        (Codec::En5Size, CoverObject::Text(t)) => {
            structure::text_capacity(t, expect_params!(spec, Size)?, &spec.binding)
        }
        (Codec::En5Char, CoverObject::Text(t)) => {
            structure::char_feature_capacity(t, expect_params!(spec, CharFeature)?, &spec.binding)
        }
        (Codec::HybridSequence, CoverObject::Flow(f)) => {
            hybrid::sequence_capacity(f, expect_params!(spec, Sequence)?, &spec.binding)
        }
        _ => Err(wrong_carrier(spec, cover)),
    }
}

fn validate_pattern_kind(spec: &PatternSpec) -> Result<(), CodecError> {
    // Embedding leaves plus the declared sequence-modulation hybrids.
    let id = spec.pattern.canonical();
    let is_hybrid = matches!(id.as_str(), "RN8n" | "RN8.1n");
    if spec.pattern.kind != PatternKind::Embedding && !is_hybrid {
        return Err(CodecError::InvalidParams(format!(
            "pattern {id} is not an embedding pattern or declared hybrid"
        )));
    }
    Ok(())
}

/// Frame `message` and write it into `cover`, returning the stego cover
/// and an audit report. Objects outside `handles_touched` are bit-identical
/// to the cover.
pub fn embed(
    cover: &CoverObject,
    message: &SecretMessage,
    spec: &PatternSpec,
) -> Result<(CoverObject, EmbedReport), CodecError> {
    let cap = capacity(cover, spec)?;
    let framed = message.frame();
    if framed.len() as u64 > cap {
        return Err(CodecError::InsufficientCapacity {
            needed: framed.len() as u64,
            available: cap,
        });
    }
    let (stego, handles) = match (codec_for(spec)?, cover) {
        (Codec::Et1, CoverObject::Flow(f)) => {
            let (f, h) = timing::interval_embed(f, &framed, expect_params!(spec, Interval)?)?;
            (CoverObject::Flow(f), h)
        }
        (Codec::Et1Rate, CoverObject::Flow(f)) => {
            let (f, h) = timing::rate_embed(f, &framed, expect_params!(spec, Rate)?)?;
            (CoverObject::Flow(f), h)
        }
        (Codec::Et2, CoverObject::Flow(f)) => {
            let (f, h) = timing::occurrence_embed(f, &framed, expect_params!(spec, Occurrence)?)?;
            (CoverObject::Flow(f), h)
        }
        (Codec::En1, CoverObject::Flow(f)) => {
            let (f, h) = loss::embed(f, &framed, expect_params!(spec, Loss)?)?;
            (CoverObject::Flow(f), h)
        }
        (Codec::En2, CoverObject::Flow(f)) => {
            let (f, h) =
                positioning::flow_embed(f, &framed, expect_params!(spec, Positioning)?, &spec.binding)?;
            (CoverObject::Flow(f), h)
        }
        (Codec::En2, CoverObject::Text(t)) => {
            let (t, h) =
                positioning::text_embed(t, &framed, expect_params!(spec, Positioning)?, &spec.binding)?;
            (CoverObject::Text(t), h)
        }
        (Codec::En3, CoverObject::Flow(f)) => {
            let (f, h) = enumeration::flow_embed(f, &framed, expect_params!(spec, Enumeration)?)?;
            (CoverObject::Flow(f), h)
        }
        (Codec::En3, CoverObject::Text(t)) => {
            let (t, h) = enumeration::text_embed(t, &framed, expect_params!(spec, Enumeration)?)?;
            (CoverObject::Text(t), h)
        }
        (Codec::En4(mode), CoverObject::Flow(f)) => {
            let (f, h) = state_value::flow_embed(
                f,
                &framed,
                mode,
                expect_params!(spec, StateValue)?,
                &spec.binding,
            )?;
            (CoverObject::Flow(f), h)
        }
        (Codec::En4(En4Mode::Plain), CoverObject::Image(img)) => {
            let (img, h) = state_value::image_embed(img, &framed, &spec.binding)?;
            (CoverObject::Image(img), h)
        }
        (Codec::En5Size, CoverObject::Flow(f)) => {
            let (f, h) = structure::flow_embed(f, &framed, expect_params!(spec, Size)?)?;
            (CoverObject::Flow(f), h)
        }
        (Codec::En5Size, CoverObject::Text(t)) => {
            let (t, h) = structure::text_embed(t, &framed, expect_params!(spec, Size)?)?;
            (CoverObject::Text(t), h)
        }
        (Codec::En5Char, CoverObject::Text(t)) => {
            let (t, h) = structure::char_feature_embed(
                t,
                &framed,
                expect_params!(spec, CharFeature)?,
                &spec.binding,
            )?;
            (CoverObject::Text(t), h)
        }
        (Codec::HybridSequence, CoverObject::Flow(f)) => {
            let (f, h) = hybrid::sequence_embed(f, &framed, expect_params!(spec, Sequence)?)?;
            (CoverObject::Flow(f), h)
        }
        _ => return Err(wrong_carrier(spec, cover)),
    };
    Ok((
        stego,
        EmbedReport {
            bits_embedded: framed.len() as u64,
            capacity_bits: cap,
            handles_touched: handles,
        },
    ))
}

/// Read the framed message back out of a stego cover. Requires the spec
/// used at embed time; a wrong spec or an unembedded cover yields a
/// [`FrameError`] or a garbage message, never a panic.
pub fn extract(stego: &CoverObject, spec: &PatternSpec) -> Result<SecretMessage, CodecError> {
    validate_pattern_kind(spec)?;
    match (codec_for(spec)?, stego) {
        (Codec::Et1, CoverObject::Flow(f)) => {
            timing::interval_extract(f, expect_params!(spec, Interval)?, &spec.binding)
        }
        (Codec::Et1Rate, CoverObject::Flow(f)) => {
            timing::rate_extract(f, expect_params!(spec, Rate)?, &spec.binding)
        }
        (Codec::Et2, CoverObject::Flow(f)) => {
            timing::occurrence_extract(f, expect_params!(spec, Occurrence)?, &spec.binding)
        }
        (Codec::En1, CoverObject::Flow(f)) => {
            loss::extract(f, expect_params!(spec, Loss)?, &spec.binding)
        }
        (Codec::En2, CoverObject::Flow(f)) => {
            positioning::flow_extract(f, expect_params!(spec, Positioning)?, &spec.binding)
        }
        (Codec::En2, CoverObject::Text(t)) => {
            positioning::text_extract(t, expect_params!(spec, Positioning)?, &spec.binding)
        }
        (Codec::En3, CoverObject::Flow(f)) => {
            enumeration::flow_extract(f, expect_params!(spec, Enumeration)?, &spec.binding)
        }
        (Codec::En3, CoverObject::Text(t)) => {
            enumeration::text_extract(t, expect_params!(spec, Enumeration)?, &spec.binding)
        }
        (Codec::En4(mode), CoverObject::Flow(f)) => {
            state_value::flow_extract(f, mode, expect_params!(spec, StateValue)?, &spec.binding)
        }
        (Codec::En4(En4Mode::Plain), CoverObject::Image(img)) => {
            state_value::image_extract(img, &spec.binding)
        }
        (Codec::En5Size, CoverObject::Flow(f)) => {
            structure::flow_extract(f, expect_params!(spec, Size)?, &spec.binding)
        }
        (Codec::En5Size, CoverObject::Text(t)) => {
            structure::text_extract(t, expect_params!(spec, Size)?, &spec.binding)
        }
        (Codec::En5Char, CoverObject::Text(t)) => {
            structure::char_feature_extract(t, expect_params!(spec, CharFeature)?, &spec.binding)
        }
        (Codec::HybridSequence, CoverObject::Flow(f)) => {
            hybrid::sequence_extract(f, expect_params!(spec, Sequence)?, &spec.binding)
        }
        _ => Err(wrong_carrier(spec, stego)),
    }
}
