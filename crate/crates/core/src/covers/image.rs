//! Grayscale image buffers stored as binary PGM (P5, maxval 255).

use serde::{Deserialize, Serialize};

use super::CoverError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageBuffer {
    pub width: u32,
    pub height: u32,
    /// Row-major, exactly `width * height` bytes.
    pub pixels: Vec<u8>,
}

impl ImageBuffer {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, CoverError> {
        if width == 0 || height == 0 {
            return Err(CoverError::parse(0, "image dimensions must be positive"));
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(CoverError::parse(
                0,
                format!("pixel count {} != width*height {expected}", pixels.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }
}

/// Read header tokens, skipping whitespace and `#` comments.
fn next_token(bytes: &[u8], pos: &mut usize) -> Option<Vec<u8>> {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b'#' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => *pos += 1,
            _ => break,
        }
    }
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    Some(bytes[start..*pos].to_vec())
}

pub fn load_image(bytes: &[u8]) -> Result<ImageBuffer, CoverError> {
    let mut pos = 0usize;
    let magic = next_token(bytes, &mut pos)
        .ok_or_else(|| CoverError::parse(1, "empty image file"))?;
    if magic != b"P5" {
        return Err(CoverError::parse(1, "not a binary PGM (expected P5)"));
    }
    let mut dim = |name: &str| -> Result<u32, CoverError> {
        let tok = next_token(bytes, &mut pos)
            .ok_or_else(|| CoverError::parse(1, format!("missing {name}")))?;
        std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CoverError::parse(1, format!("bad {name}")))
    };
    let width = dim("width")?;
    let height = dim("height")?;
    let maxval = dim("maxval")?;
    if maxval != 255 {
        return Err(CoverError::parse(1, format!("maxval must be 255, got {maxval}")));
    }
    // Exactly one whitespace byte separates the header from pixel data.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(CoverError::parse(1, "missing header terminator"));
    }
    pos += 1;
    let data = &bytes[pos..];
    let expected = width as usize * height as usize;
    if data.len() != expected {
        return Err(CoverError::parse(
            1,
            format!("pixel count {} != width*height {expected}", data.len()),
        ));
    }
    ImageBuffer::new(width, height, data.to_vec())
}

pub fn save_image(img: &ImageBuffer) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.pixels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let img = ImageBuffer::new(3, 2, vec![0, 10, 20, 30, 40, 255]).unwrap();
        assert_eq!(load_image(&save_image(&img)).unwrap(), img);
    }

    #[test]
    fn pixel_count_mismatch_is_rejected() {
        let mut bytes = save_image(&ImageBuffer::new(2, 2, vec![1, 2, 3, 4]).unwrap());
        bytes.pop();
        assert!(load_image(&bytes).is_err());
        assert!(ImageBuffer::new(2, 2, vec![1, 2, 3]).is_err());
    }

    #[test]
    fn comments_in_header_are_tolerated() {
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[7, 9]);
        let img = load_image(&bytes).unwrap();
        assert_eq!((img.width, img.height), (2, 1));
        assert_eq!(img.pixels, vec![7, 9]);
    }

    #[test]
    fn wrong_maxval_is_rejected() {
        assert!(load_image(b"P5\n1 1\n65535\n\x00\x00").is_err());
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let mut bytes = save_image(&ImageBuffer::new(1, 1, vec![5]).unwrap());
        bytes.push(0);
        assert!(load_image(&bytes).is_err());
    }
}
