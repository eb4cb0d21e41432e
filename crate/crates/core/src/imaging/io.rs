//! Grayscale image files and the dataset manifest.
//!
//! Binary PGM (`P5`, 8- or 16-bit) is read and written; 8-bit grayscale PNG
//! is read. Writing quantizes to 8 bits with round-half-away-from-zero.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::{DomainLabel, GrayImage, ImagingError};

fn skip_ws_and_comments(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b'#' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            b if b.is_ascii_whitespace() => *pos += 1,
            _ => break,
        }
    }
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, ImagingError> {
    skip_ws_and_comments(bytes, pos);
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| ImagingError::InvalidImage(format!("PGM header: bad {what}")))
}

pub fn decode_pgm(bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(ImagingError::Unsupported("not a binary PGM (P5)".into()));
    }
    let mut pos = 2;
    let width = header_number(bytes, &mut pos, "width")?;
    let height = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 65_535 {
        return Err(ImagingError::InvalidImage(format!("PGM maxval {maxval}")));
    }
    // exactly one whitespace byte separates header and raster
    pos += 1;
    let wide = maxval > 255;
    let need = width * height * if wide { 2 } else { 1 };
    let raster = bytes
        .get(pos..pos + need)
        .ok_or_else(|| ImagingError::InvalidImage("PGM raster truncated".into()))?;
    let max = maxval as f64;
    let pixels = if wide {
        raster
            .chunks_exact(2)
            .map(|c| (f64::from(u16::from_be_bytes([c[0], c[1]])) / max).min(1.0))
            .collect()
    } else {
        raster.iter().map(|&b| (f64::from(b) / max).min(1.0)).collect()
    };
    GrayImage::new(width, height, pixels)
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().map(|p| (p * 255.0).round().clamp(0.0, 255.0) as u8));
    out
}

pub fn decode_png(bytes: &[u8]) -> Result<GrayImage, ImagingError> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| ImagingError::InvalidImage(format!("PNG: {e}")))?;
    let info = reader.info();
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(ImagingError::Unsupported(format!(
            "PNG must be 8-bit grayscale, got {:?} {:?}",
            info.color_type, info.bit_depth
        )));
    }
    let (w, h) = (info.width as usize, info.height as usize);
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(w * h)];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| ImagingError::InvalidImage(format!("PNG: {e}")))?;
    let stride = frame.line_size;
    let pixels = (0..h)
        .flat_map(|y| buf[y * stride..y * stride + w].iter().map(|&b| f64::from(b) / 255.0))
        .collect();
    GrayImage::new(w, h, pixels)
}

/// Load a PGM or PNG by sniffing the magic bytes.
pub fn read_image(path: &Path) -> Result<GrayImage, ImagingError> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(b"P5") {
        decode_pgm(&bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(&bytes)
    } else {
        Err(ImagingError::Unsupported(format!("{}: not PGM or PNG", path.display())))
    }
}

pub fn write_pgm(path: &Path, img: &GrayImage) -> Result<(), ImagingError> {
    std::fs::write(path, encode_pgm(img))?;
    Ok(())
}

/// Bilinear resize with half-pixel centres.
pub fn resize_bilinear(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage, ImagingError> {
    if width == 0 || height == 0 {
        return Err(ImagingError::InvalidImage("target size must be positive".into()));
    }
    let (sw, sh) = (img.width(), img.height());
    let sample = |out: usize, src_len: usize, dst_len: usize| -> (usize, usize, f64) {
        let pos = ((out as f64 + 0.5) * src_len as f64 / dst_len as f64 - 0.5)
            .clamp(0.0, (src_len - 1) as f64);
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(src_len - 1);
        (lo, hi, pos - lo as f64)
    };
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let (y0, y1, fy) = sample(y, sh, height);
        for x in 0..width {
            let (x0, x1, fx) = sample(x, sw, width);
            let top = img.get(x0, y0) * (1.0 - fx) + img.get(x1, y0) * fx;
            let bottom = img.get(x0, y1) * (1.0 - fx) + img.get(x1, y1) * fx;
            pixels.push((top * (1.0 - fy) + bottom * fy).clamp(0.0, 1.0));
        }
    }
    Ok(GrayImage::from_parts(width, height, pixels))
}

/// One manifest row. `domain` is empty on input manifests and filled on
/// the ones written after perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub path: String,
    pub label: u8,
    #[serde(default, with = "domain_code")]
    pub domain: Option<DomainLabel>,
}

mod domain_code {
    use super::DomainLabel;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Option<DomainLabel>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_str(d.name().to_ascii_lowercase().as_str()),
            None => s.serialize_str(""),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DomainLabel>, D::Error> {
        let raw = Option::<String>::deserialize(d)?.unwrap_or_default();
        if raw.trim().is_empty() {
            return Ok(None);
        }
        raw.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

/// Read a `path,label[,domain]` CSV with a header row.
pub fn read_manifest(text: &str) -> Result<Vec<ManifestRow>, ImagingError> {
    csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<ManifestRow>, _>>()
        .map_err(|e| ImagingError::InvalidRecord(format!("manifest: {e}")))
}

pub fn write_manifest(rows: &[ManifestRow]) -> Result<String, ImagingError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| ImagingError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| ImagingError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
