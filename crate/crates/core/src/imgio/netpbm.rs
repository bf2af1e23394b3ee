//! Binary PPM (P6) and PGM (P5) with maxval 255.

use std::path::Path;

use super::{quantize_byte, read_bytes, write_atomic, BitMask, Image, CHANNELS};
use crate::error::{Error, Result};

pub(crate) struct Header {
    pub magic: [u8; 2],
    pub fields: Vec<String>,
    /// Offset of the first payload byte.
    pub payload: usize,
}

/// Reads the magic number followed by `n_fields` whitespace-separated
/// tokens, skipping `#` comments. Exactly one whitespace byte separates the
/// last token from the payload.
pub(crate) fn parse_header(bytes: &[u8], n_fields: usize) -> Result<Header> {
    if bytes.len() < 2 {
        return Err(Error::MalformedHeader("file shorter than magic number".into()));
    }
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = Vec::with_capacity(n_fields);
    while fields.len() < n_fields {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::MalformedHeader("header ends early".into())),
            }
        }
        let start = pos;
        while bytes
            .get(pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            pos += 1;
        }
        let token = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| Error::MalformedHeader("non-ASCII header token".into()))?;
        fields.push(token.to_string());
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedHeader("missing separator before payload".into())),
    }
    Ok(Header {
        magic,
        fields,
        payload: pos,
    })
}

fn parse_dim(token: &str, what: &str) -> Result<usize> {
    match token.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(Error::MalformedHeader(format!("bad {what} '{token}'"))),
    }
}

fn parse_pnm<'a>(bytes: &'a [u8], magic: &[u8; 2], channels: usize) -> Result<(usize, usize, &'a [u8])> {
    if bytes.len() >= 2 && &bytes[..2] != magic {
        return Err(Error::UnsupportedFormat(format!(
            "expected magic {}, found {}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&bytes[..2])
        )));
    }
    let header = parse_header(bytes, 3)?;
    let width = parse_dim(&header.fields[0], "width")?;
    let height = parse_dim(&header.fields[1], "height")?;
    let maxval: u32 = header.fields[2]
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad maxval '{}'", header.fields[2])))?;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval));
    }
    let expected = width * height * channels;
    let payload = &bytes[header.payload..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    Ok((width, height, &payload[..expected]))
}

pub fn decode_ppm(bytes: &[u8]) -> Result<Image> {
    let (w, h, payload) = parse_pnm(bytes, b"P6", CHANNELS)?;
    let data = payload.iter().map(|&b| b as f32 / 255.0).collect();
    Image::new(w, h, data)
}

pub fn encode_ppm(image: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.data().iter().map(|&v| quantize_byte(v)));
    out
}

pub fn read_ppm(path: &Path) -> Result<Image> {
    decode_ppm(&read_bytes(path)?)
}

pub fn write_ppm(image: &Image, path: &Path) -> Result<()> {
    write_atomic(path, &encode_ppm(image))
}

pub fn decode_pgm(bytes: &[u8]) -> Result<BitMask> {
    let (w, h, payload) = parse_pnm(bytes, b"P5", 1)?;
    let bits = payload
        .iter()
        .enumerate()
        .map(|(index, &value)| match value {
            0 => Ok(false),
            255 => Ok(true),
            value => Err(Error::AmbiguousMask { value, index }),
        })
        .collect::<Result<Vec<_>>>()?;
    BitMask::new(w, h, bits)
}

pub fn encode_pgm(mask: &BitMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    out.extend(mask.bits().iter().map(|&keep| if keep { 255u8 } else { 0 }));
    out
}

pub fn read_pgm(path: &Path) -> Result<BitMask> {
    decode_pgm(&read_bytes(path)?)
}

pub fn write_pgm(mask: &BitMask, path: &Path) -> Result<()> {
    write_atomic(path, &encode_pgm(mask))
}
