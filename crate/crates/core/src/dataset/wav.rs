//! RIFF/WAVE reader and writer restricted to 16-bit PCM mono.

use std::fs;
use std::io::{self, ErrorKind};
use std::path::Path;

use super::types::AudioClip;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

pub fn load_audio(path: &Path) -> Result<AudioClip> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_wav(&bytes).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        Error::UnsupportedFormat(m) => Error::UnsupportedFormat(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn truncated(what: &str) -> Error {
    Error::io(
        "<wav>",
        io::Error::new(ErrorKind::UnexpectedEof, format!("truncated WAV: {what}")),
    )
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Decodes an in-memory WAV file.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip> {
    if bytes.len() < 12 {
        return Err(truncated("RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::UnsupportedFormat("not a RIFF/WAVE file".into()));
    }
    let mut pos = 12;
    let mut format: Option<(u16, u32)> = None;
    loop {
        if pos + 8 > bytes.len() {
            return Err(truncated("missing data chunk"));
        }
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        match id {
            b"fmt " => {
                if size < 16 || body + size > bytes.len() {
                    return Err(truncated("fmt chunk"));
                }
                let mut tag = u16_at(bytes, body);
                let channels = u16_at(bytes, body + 2);
                let rate = u32_at(bytes, body + 4);
                let bits = u16_at(bytes, body + 14);
                if tag == FORMAT_EXTENSIBLE && size >= 26 {
                    tag = u16_at(bytes, body + 24);
                }
                if tag != FORMAT_PCM {
                    return Err(Error::UnsupportedFormat(format!(
                        "format tag {tag:#06x} is not PCM"
                    )));
                }
                if channels != 1 {
                    return Err(Error::UnsupportedFormat(format!(
                        "{channels} channels, only mono is supported"
                    )));
                }
                if bits != 16 {
                    return Err(Error::UnsupportedFormat(format!(
                        "{bits}-bit samples, only 16-bit is supported"
                    )));
                }
                if rate == 0 {
                    return Err(Error::UnsupportedFormat("sample rate is zero".into()));
                }
                format = Some((tag, rate));
            }
            b"data" => {
                let (_, rate) = format.ok_or_else(|| {
                    Error::UnsupportedFormat("data chunk precedes fmt chunk".into())
                })?;
                if body + size > bytes.len() {
                    return Err(truncated("data chunk shorter than declared"));
                }
                if size % 2 != 0 {
                    return Err(truncated("odd byte count in 16-bit data"));
                }
                let samples = bytes[body..body + size]
                    .chunks_exact(2)
                    .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]])) / 32768.0)
                    .collect();
                return AudioClip::new(samples, rate);
            }
            _ => {}
        }
        pos = body + size + (size & 1);
    }
}

/// Encodes a clip as 16-bit PCM mono. Samples are rounded to the nearest
/// step of 1/32768 and saturated at the integer range.
pub fn encode_wav(clip: &AudioClip) -> Vec<u8> {
    let data_len = clip.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate().to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate() * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in clip.samples() {
        let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

pub fn save_audio(clip: &AudioClip, path: &Path) -> Result<()> {
    fs::write(path, encode_wav(clip)).map_err(|e| Error::io(path, e))
}
