//! Image file formats.
//!
//! Binary netpbm (PGM `P5`, PPM `P6`) with maxval 255 or 65535; 16-bit
//! samples are big-endian per the netpbm convention and get rescaled to
//! `[0, 255]`. The raw-tensor format `IGRD` is magic `IGRD`, little-endian
//! u32 width/height/channels, then an f32 row-major payload, and is used
//! where rounding to 8 bits would lose information.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::ImageGrid;
use crate::{Error, Result};

/// Decode a PGM, PPM, or IGRD file, dispatching on the magic bytes.
pub fn load_image(path: &Path) -> Result<ImageGrid> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match bytes.get(..2) {
        Some(b"P5") => decode_pnm(&bytes, 1),
        Some(b"P6") => decode_pnm(&bytes, 3),
        _ if bytes.starts_with(b"IGRD") => decode_igrd(&bytes),
        _ => Err(Error::MalformedImage(format!(
            "{}: unrecognized magic",
            path.display()
        ))),
    }
}

fn decode_pnm(bytes: &[u8], channels: usize) -> Result<ImageGrid> {
    let mut pos = 2;
    let width = read_header_int(bytes, &mut pos)?;
    let height = read_header_int(bytes, &mut pos)?;
    let maxval = read_header_int(bytes, &mut pos)?;
    if !(1..=65535).contains(&maxval) {
        return Err(Error::MalformedImage(format!("maxval {maxval} out of range")));
    }
    // Exactly one whitespace byte separates the header from the payload.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedImage("missing header terminator".into())),
    }
    if width == 0 || height == 0 {
        return Err(Error::MalformedImage("zero-sized image".into()));
    }
    let samples = width * height * channels;
    let wide = maxval > 255;
    let needed = samples * if wide { 2 } else { 1 };
    let payload = bytes
        .get(pos..pos + needed)
        .ok_or_else(|| Error::MalformedImage("malformed image: truncated payload".into()))?;
    let scale = 255.0 / maxval as f64;
    let data: Vec<f64> = if wide {
        payload
            .chunks_exact(2)
            .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 * scale)
            .collect()
    } else {
        payload.iter().map(|b| *b as f64 * scale).collect()
    };
    ImageGrid::new(width, height, channels, data)
}

/// One whitespace/comment-separated decimal integer from a netpbm header.
fn read_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_digit() => break,
            _ => return Err(Error::MalformedImage("malformed header".into())),
        }
    }
    let mut value = 0usize;
    while let Some(b) = bytes.get(*pos) {
        if !b.is_ascii_digit() {
            break;
        }
        value = value
            .checked_mul(10)
            .and_then(|v| v.checked_add((b - b'0') as usize))
            .ok_or_else(|| Error::MalformedImage("header value overflow".into()))?;
        *pos += 1;
    }
    Ok(value)
}

fn decode_igrd(bytes: &[u8]) -> Result<ImageGrid> {
    if bytes.len() < 16 {
        return Err(Error::MalformedImage("malformed image: truncated IGRD header".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (width, height, channels) = (word(4), word(8), word(12));
    if channels != 1 && channels != 3 {
        return Err(Error::UnsupportedChannels(channels));
    }
    let samples = width
        .checked_mul(height)
        .and_then(|v| v.checked_mul(channels))
        .ok_or_else(|| Error::MalformedImage("IGRD dimensions overflow".into()))?;
    let payload = bytes
        .get(16..16 + samples * 4)
        .ok_or_else(|| Error::MalformedImage("malformed image: truncated IGRD payload".into()))?;
    let data = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    ImageGrid::new(width, height, channels, data)
}

/// Write an 8-bit binary PGM; values are rounded and clamped to `[0, 255]`.
pub fn save_pgm(img: &ImageGrid, path: &Path) -> Result<()> {
    if img.channels() != 1 {
        return Err(Error::UnsupportedChannels(img.channels()));
    }
    save_pnm(img, path, b"P5")
}

/// Write an 8-bit binary PPM; values are rounded and clamped to `[0, 255]`.
pub fn save_ppm(img: &ImageGrid, path: &Path) -> Result<()> {
    if img.channels() != 3 {
        return Err(Error::UnsupportedChannels(img.channels()));
    }
    save_pnm(img, path, b"P6")
}

fn save_pnm(img: &ImageGrid, path: &Path, magic: &[u8]) -> Result<()> {
    let mut out = Vec::with_capacity(img.data().len() + 32);
    out.extend_from_slice(magic);
    out.extend_from_slice(format!("\n{} {}\n255\n", img.width(), img.height()).as_bytes());
    out.extend(img.data().iter().map(|v| v.round().clamp(0.0, 255.0) as u8));
    write_bytes(path, &out)
}

/// Write the raw-tensor format; f32 payload, so values survive negatives and
/// fractions.
pub fn save_igrd(img: &ImageGrid, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(16 + img.data().len() * 4);
    out.extend_from_slice(b"IGRD");
    for dim in [img.width(), img.height(), img.channels()] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in img.data() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    write_bytes(path, &out)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
