//! Secret messages as bit sequences with a 16-bit length frame.
//!
//! Every codec embeds the *framed* form of a message: a big-endian 16-bit
//! bit-count prefix followed by the payload bits, most significant bit
//! first. The frame makes extraction self-describing and gives decoders a
//! way to reject covers that were never embedded into ([`FrameError`]).

use thiserror::Error;

/// Number of bits in the length prefix.
pub const FRAME_HEADER_BITS: usize = 16;

/// Maximum payload length in bits (the prefix is 16 bits wide).
pub const MAX_MESSAGE_BITS: usize = u16::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("message of {bits} bits exceeds the {MAX_MESSAGE_BITS}-bit limit")]
    TooLong { bits: usize },
    #[error("carrier holds only {available} bits, not enough for a length frame")]
    MissingHeader { available: usize },
    #[error("frame declares {declared} payload bits but only {available} are available")]
    Truncated { declared: usize, available: usize },
    #[error("undecodable symbol while reading bits: {0}")]
    Garbled(String),
    #[error("invalid hex message: {0}")]
    BadHex(String),
}

/// A secret message: an ordered bit sequence, MSB-first by convention.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SecretMessage {
    bits: Vec<bool>,
}

impl SecretMessage {
    pub fn new(bits: Vec<bool>) -> Result<Self, FrameError> {
        if bits.len() > MAX_MESSAGE_BITS {
            return Err(FrameError::TooLong { bits: bits.len() });
        }
        Ok(Self { bits })
    }

    pub fn empty() -> Self {
        Self { bits: Vec::new() }
    }

    /// Parse a hex string (optionally `0x`-prefixed); each digit yields four
    /// bits, MSB first.
    pub fn from_hex(s: &str) -> Result<Self, FrameError> {
        let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
        if digits.is_empty() {
            return Ok(Self::empty());
        }
        let mut bits = Vec::with_capacity(digits.len() * 4);
        for c in digits.chars() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| FrameError::BadHex(format!("invalid digit {c:?}")))?;
            for shift in (0..4).rev() {
                bits.push((v >> shift) & 1 == 1);
            }
        }
        Self::new(bits)
    }

    /// Render as `0x…` when the bit count is a nibble multiple, `0b…`
    /// otherwise. The empty message renders as `0x`.
    pub fn display_compact(&self) -> String {
        if self.bits.len() % 4 == 0 {
            let mut out = String::from("0x");
            for chunk in self.bits.chunks(4) {
                let v = chunk.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                out.push(char::from_digit(v, 16).unwrap());
            }
            out
        } else {
            let mut out = String::from("0b");
            for &b in &self.bits {
                out.push(if b { '1' } else { '0' });
            }
            out
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len_bits(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// The framed form: 16-bit big-endian bit count, then the payload.
    pub fn frame(&self) -> Vec<bool> {
        let len = self.bits.len() as u16;
        let mut framed = Vec::with_capacity(FRAME_HEADER_BITS + self.bits.len());
        for shift in (0..FRAME_HEADER_BITS).rev() {
            framed.push((len >> shift) & 1 == 1);
        }
        framed.extend_from_slice(&self.bits);
        framed
    }

    /// Number of bits [`frame`](Self::frame) will produce.
    pub fn framed_len(&self) -> usize {
        FRAME_HEADER_BITS + self.bits.len()
    }
}

/// Read a framed message out of a bit-addressable carrier region holding
/// `available` bit slots. `read_bit(i)` must return slot `i`; it is only
/// called for slots the frame actually covers, so decoders may fail lazily
/// on slots that were never written.
pub fn read_framed<E>(
    available: usize,
    mut read_bit: impl FnMut(usize) -> Result<bool, E>,
) -> Result<SecretMessage, E>
where
    E: From<FrameError>,
{
    if available < FRAME_HEADER_BITS {
        return Err(FrameError::MissingHeader { available }.into());
    }
    let mut declared = 0usize;
    for i in 0..FRAME_HEADER_BITS {
        declared = (declared << 1) | read_bit(i)? as usize;
    }
    if FRAME_HEADER_BITS + declared > available {
        return Err(FrameError::Truncated {
            declared,
            available: available - FRAME_HEADER_BITS,
        }
        .into());
    }
    let mut bits = Vec::with_capacity(declared);
    for i in 0..declared {
        bits.push(read_bit(FRAME_HEADER_BITS + i)?);
    }
    Ok(SecretMessage { bits })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let m = SecretMessage::from_hex("0xAB").unwrap();
        assert_eq!(
            m.bits(),
            &[true, false, true, false, true, false, true, true]
        );
        assert_eq!(m.display_compact(), "0xab");
    }

    #[test]
    fn empty_message_frames_to_zero_header() {
        let framed = SecretMessage::empty().frame();
        assert_eq!(framed.len(), 16);
        assert!(framed.iter().all(|&b| !b));
    }

    #[test]
    fn frame_then_read_framed_is_identity() {
        let m = SecretMessage::from_hex("deadbeef").unwrap();
        let framed = m.frame();
        let got = read_framed::<FrameError>(framed.len(), |i| Ok(framed[i])).unwrap();
        assert_eq!(got, m);
    }

    #[test]
    fn truncated_frame_is_rejected() {
        // header declares 64 bits, carrier has 20 slots total
        let mut framed = SecretMessage::new(vec![true; 64]).unwrap().frame();
        framed.truncate(20);
        let err = read_framed::<FrameError>(20, |i| Ok(framed[i])).unwrap_err();
        assert_eq!(
            err,
            FrameError::Truncated {
                declared: 64,
                available: 4
            }
        );
    }

    #[test]
    fn carrier_smaller_than_header_is_rejected() {
        let err = read_framed::<FrameError>(7, |_| Ok(false)).unwrap_err();
        assert_eq!(err, FrameError::MissingHeader { available: 7 });
    }

    #[test]
    fn oversized_message_is_rejected() {
        assert!(matches!(
            SecretMessage::new(vec![false; MAX_MESSAGE_BITS + 1]),
            Err(FrameError::TooLong { .. })
        ));
    }

    #[test]
    fn non_nibble_lengths_render_as_binary() {
        let m = SecretMessage::new(vec![true, false, true]).unwrap();
        assert_eq!(m.display_compact(), "0b101");
    }
}
