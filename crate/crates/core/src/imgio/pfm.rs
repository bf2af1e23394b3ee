//! Little-endian PFM. `Pf` holds one channel, `PF` holds interleaved RGB.
//! Rows are stored bottom-up on disk and top-down in memory.

use std::path::Path;

use super::netpbm::parse_header;
use super::{read_bytes, write_atomic, Image, ScalarMap, CHANNELS};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Pfm {
    Map(ScalarMap),
    Rgb(Image),
}

pub fn decode_pfm(bytes: &[u8]) -> Result<Pfm> {
    let header = parse_header(bytes, 3)?;
    let channels = match &header.magic {
        b"Pf" => 1,
        b"PF" => CHANNELS,
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "expected PFM magic Pf or PF, found {}",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let dim = |i: usize, what: &str| -> Result<usize> {
        match header.fields[i].parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(Error::MalformedHeader(format!("bad {what} '{}'", header.fields[i]))),
        }
    };
    let width = dim(0, "width")?;
    let height = dim(1, "height")?;
    let scale: f32 = header.fields[2]
        .parse()
        .map_err(|_| Error::MalformedHeader(format!("bad scale '{}'", header.fields[2])))?;
    if !scale.is_finite() || scale == 0.0 {
        return Err(Error::MalformedHeader(format!("bad scale '{}'", header.fields[2])));
    }
    if scale > 0.0 {
        return Err(Error::BigEndianPfm(scale));
    }

    let row_len = width * channels;
    let expected = row_len * height * 4;
    let payload = &bytes[header.payload..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    let mut data = vec![0f32; row_len * height];
    for (i, chunk) in payload[..expected].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if v.is_nan() {
            return Err(Error::NonFinite("PFM payload"));
        }
        let disk_row = i / row_len;
        let col = i % row_len;
        data[(height - 1 - disk_row) * row_len + col] = v;
    }
    if channels == 1 {
        ScalarMap::new(width, height, data).map(Pfm::Map)
    } else {
        Image::new(width, height, data).map(Pfm::Rgb)
    }
}

fn encode(magic: &str, width: usize, height: usize, channels: usize, data: &[f32]) -> Vec<u8> {
    let mut out = format!("{magic}\n{width} {height}\n-1.0\n").into_bytes();
    let row_len = width * channels;
    out.reserve(data.len() * 4);
    for row in data.chunks_exact(row_len).rev() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn encode_pfm_map(map: &ScalarMap) -> Vec<u8> {
    encode("Pf", map.width(), map.height(), 1, map.data())
}

pub fn encode_pfm_rgb(image: &Image) -> Vec<u8> {
    encode("PF", image.width(), image.height(), CHANNELS, image.data())
}

pub fn read_pfm(path: &Path) -> Result<Pfm> {
    decode_pfm(&read_bytes(path)?)
}

/// Reads a single-channel PFM; a 3-channel file is an error.
pub fn read_pfm_map(path: &Path) -> Result<ScalarMap> {
    match read_pfm(path)? {
        Pfm::Map(m) => Ok(m),
        Pfm::Rgb(_) => Err(Error::UnsupportedFormat(format!(
            "{} is a 3-channel PFM, expected Pf",
            path.display()
        ))),
    }
}

pub fn write_pfm_map(map: &ScalarMap, path: &Path) -> Result<()> {
    write_atomic(path, &encode_pfm_map(map))
}

pub fn write_pfm_rgb(image: &Image, path: &Path) -> Result<()> {
    write_atomic(path, &encode_pfm_rgb(image))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pf_bytes(scale: &str, values: &[f32]) -> Vec<u8> {
        let mut b = format!("Pf\n2 2\n{scale}\n").into_bytes();
        for v in values {
            b.extend_from_slice(&v.to_le_bytes());
        }
        b
    }

    #[test]
    fn rows_are_flipped_to_top_down() {
        // disk rows bottom-up: (0,1) is the bottom row
        let Pfm::Map(m) = decode_pfm(&pf_bytes("-1.0", &[0.0, 1.0, 2.0, 3.0])).unwrap() else {
            panic!("expected single channel");
        };
        assert_eq!(m.data(), &[2.0, 3.0, 0.0, 1.0]);
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let bytes = pf_bytes("-1.0", &[0.1, -7.5e-12, 3.4e38, 0.0]);
        let Pfm::Map(m) = decode_pfm(&bytes).unwrap() else {
            unreachable!()
        };
        assert_eq!(encode_pfm_map(&m), bytes);
    }

    #[test]
    fn rgb_roundtrip() {
        let img = Image::new(1, 2, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let back = decode_pfm(&encode_pfm_rgb(&img)).unwrap();
        assert_eq!(back, Pfm::Rgb(img));
    }

    #[test]
    fn rejects_big_endian_and_nan() {
        assert!(matches!(
            decode_pfm(&pf_bytes("1.0", &[0.0; 4])),
            Err(Error::BigEndianPfm(_))
        ));
        assert!(matches!(
            decode_pfm(&pf_bytes("-1.0", &[0.0, f32::NAN, 0.0, 0.0])),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            decode_pfm(&pf_bytes("-1.0", &[0.0; 3])),
            Err(Error::Truncated { .. })
        ));
        assert!(matches!(
            decode_pfm(b"P6\n1 1\n255\n\x00\x00\x00"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn map_roundtrip_bits(vals in proptest::collection::vec(-1e30f32..1e30, 6)) {
                let map = ScalarMap::new(3, 2, vals).unwrap();
                let Pfm::Map(back) = decode_pfm(&encode_pfm_map(&map)).unwrap() else {
                    unreachable!()
                };
                let a: Vec<u32> = back.data().iter().map(|v| v.to_bits()).collect();
                let b: Vec<u32> = map.data().iter().map(|v| v.to_bits()).collect();
                prop_assert_eq!(a, b);
            }
        }
    }
}
