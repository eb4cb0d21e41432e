//! Minimal RIFF/WAVE reader and writer.
//!
//! Accepts PCM 16-bit and IEEE float 32-bit, mono or stereo (including the
//! `WAVE_FORMAT_EXTENSIBLE` wrapper around those two). Stereo is averaged to
//! mono on ingest.

use super::{AudioError, Waveform};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Pcm16,
    Float32,
}

#[derive(Debug, Clone, Copy)]
struct FmtChunk {
    format: SampleFormat,
    channels: u16,
    sample_rate: u32,
}

fn read_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn parse_fmt(body: &[u8]) -> Result<FmtChunk, AudioError> {
    if body.len() < 16 {
        return Err(AudioError::CorruptHeader("fmt chunk shorter than 16 bytes".into()));
    }
    let mut tag = read_u16(body, 0);
    let channels = read_u16(body, 2);
    let sample_rate = read_u32(body, 4);
    let bits = read_u16(body, 14);
    if tag == FORMAT_EXTENSIBLE {
        // cbSize(2) validBits(2) channelMask(4) then the subformat GUID
        if body.len() < 26 {
            return Err(AudioError::CorruptHeader("truncated WAVE_FORMAT_EXTENSIBLE".into()));
        }
        tag = read_u16(body, 24);
    }
    let format = match (tag, bits) {
        (FORMAT_PCM, 16) => SampleFormat::Pcm16,
        (FORMAT_FLOAT, 32) => SampleFormat::Float32,
        (FORMAT_PCM, b) | (FORMAT_FLOAT, b) => {
            return Err(AudioError::UnsupportedFormat(format!(
                "{b}-bit samples (format tag {tag})"
            )))
        }
        (t, _) => {
            return Err(AudioError::UnsupportedFormat(format!(
                "compressed or unknown format tag {t:#06x}"
            )))
        }
    };
    if channels == 0 || channels > 2 {
        return Err(AudioError::UnsupportedFormat(format!("{channels} channels")));
    }
    if sample_rate == 0 {
        return Err(AudioError::CorruptHeader("sample rate is zero".into()));
    }
    Ok(FmtChunk {
        format,
        channels,
        sample_rate,
    })
}

/// Decode a RIFF/WAVE byte buffer into a mono [`Waveform`].
///
/// 16-bit samples are scaled by `1/32768`. A data chunk whose declared size
/// runs past the end of the buffer is clipped to the bytes present
/// (streaming writers often leave the size unset); a trailing partial frame
/// is dropped.
pub fn ingest_wav(bytes: &[u8]) -> Result<Waveform, AudioError> {
    if bytes.len() < 12 {
        return Err(AudioError::CorruptHeader("shorter than RIFF header".into()));
    }
    if &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::CorruptHeader("missing RIFF/WAVE magic".into()));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = read_u32(bytes, pos + 4) as usize;
        let start = pos + 8;
        let available = bytes.len() - start;
        match id {
            b"fmt " => {
                if size > available {
                    return Err(AudioError::CorruptHeader("truncated fmt chunk".into()));
                }
                fmt = Some(parse_fmt(&bytes[start..start + size])?);
            }
            b"data" => {
                data = Some(&bytes[start..start + size.min(available)]);
                break;
            }
            _ => {}
        }
        pos = start.saturating_add(size).saturating_add(size & 1);
    }

    let fmt = fmt.ok_or_else(|| AudioError::CorruptHeader("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| AudioError::CorruptHeader("no data chunk".into()))?;

    let width = match fmt.format {
        SampleFormat::Pcm16 => 2,
        SampleFormat::Float32 => 4,
    };
    let channels = usize::from(fmt.channels);
    let frame_bytes = width * channels;
    let frames = data.len() / frame_bytes;

    let decode = |off: usize| -> f64 {
        match fmt.format {
            SampleFormat::Pcm16 => f64::from(i16::from_le_bytes([data[off], data[off + 1]])) / 32768.0,
            SampleFormat::Float32 => f64::from(f32::from_le_bytes([
                data[off],
                data[off + 1],
                data[off + 2],
                data[off + 3],
            ])),
        }
    };

    let samples: Vec<f64> = (0..frames)
        .map(|f| {
            let base = f * frame_bytes;
            let sum: f64 = (0..channels).map(|c| decode(base + c * width)).sum();
            sum / channels as f64
        })
        .collect();

    Waveform::new(samples, fmt.sample_rate).map_err(|e| match e {
        AudioError::InvalidWaveform(msg) => AudioError::CorruptHeader(msg),
        other => other,
    })
}

/// Encode interleaved samples as a WAV file.
///
/// `samples` holds `channels`-interleaved values in `[-1, 1]`; PCM16 output
/// is clipped and rounded.
pub fn encode_wav(samples: &[f64], sample_rate: u32, channels: u16, format: SampleFormat) -> Vec<u8> {
    let (tag, bits) = match format {
        SampleFormat::Pcm16 => (FORMAT_PCM, 16u16),
        SampleFormat::Float32 => (FORMAT_FLOAT, 32u16),
    };
    let block_align = channels * bits / 8;
    let data_len = samples.len() * usize::from(bits / 8);
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&(sample_rate * u32::from(block_align)).to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in samples {
        match format {
            SampleFormat::Pcm16 => {
                let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                out.extend_from_slice(&v.to_le_bytes());
            }
            SampleFormat::Float32 => out.extend_from_slice(&(s as f32).to_le_bytes()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pcm16_bytes(values: &[i16], channels: u16, rate: u32) -> Vec<u8> {
        let samples: Vec<f64> = values.iter().map(|&v| f64::from(v) / 32768.0).collect();
        encode_wav(&samples, rate, channels, SampleFormat::Pcm16)
    }

    #[test]
    fn pcm16_scaling() {
        let w = ingest_wav(&pcm16_bytes(&[16384, -16384], 1, 16_000)).unwrap();
        assert_eq!(w.samples(), &[0.5, -0.5]);
        assert_eq!(w.sample_rate(), 16_000);
    }

    #[test]
    fn stereo_float_is_averaged() {
        let bytes = encode_wav(&[1.0, 0.0], 8_000, 2, SampleFormat::Float32);
        let w = ingest_wav(&bytes).unwrap();
        assert_eq!(w.samples(), &[0.5]);
    }

    #[test]
    fn truncated_header() {
        let bytes = pcm16_bytes(&[1, 2, 3], 1, 16_000);
        assert!(matches!(ingest_wav(&bytes[..10]), Err(AudioError::CorruptHeader(_))));
        assert!(matches!(ingest_wav(&bytes[..30]), Err(AudioError::CorruptHeader(_))));
    }

    #[test]
    fn unsupported_depth_and_codec() {
        let mut bytes = pcm16_bytes(&[0, 0], 1, 16_000);
        bytes[34] = 24; // bits per sample
        assert!(matches!(ingest_wav(&bytes), Err(AudioError::UnsupportedFormat(_))));
        let mut bytes = pcm16_bytes(&[0, 0], 1, 16_000);
        bytes[20] = 2; // ADPCM
        assert!(matches!(ingest_wav(&bytes), Err(AudioError::UnsupportedFormat(_))));
    }

    #[test]
    fn skips_unknown_chunks() {
        let plain = pcm16_bytes(&[100, -100, 200], 1, 16_000);
        let mut with_list = plain[..36].to_vec();
        with_list.extend_from_slice(b"LIST");
        with_list.extend_from_slice(&3u32.to_le_bytes());
        with_list.extend_from_slice(&[1, 2, 3, 0]); // odd chunk + pad byte
        with_list.extend_from_slice(&plain[36..]);
        assert_eq!(ingest_wav(&with_list).unwrap(), ingest_wav(&plain).unwrap());
    }

    #[test]
    fn empty_data_is_corrupt() {
        let bytes = pcm16_bytes(&[], 1, 16_000);
        assert!(matches!(ingest_wav(&bytes), Err(AudioError::CorruptHeader(_))));
    }
}
