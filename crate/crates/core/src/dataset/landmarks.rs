//! Landmark CSV: header `frame,idx,x,y[,z]`, 68 rows per frame, frame
//! indices 0-based and consecutive.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::types::{LandmarkFrame, LandmarkTrack, N_LANDMARKS};
use crate::error::{Error, Result};

pub fn load_landmarks(path: &Path, frame_rate: f64) -> Result<LandmarkTrack> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_landmarks(file, frame_rate, &path.display().to_string())
}

pub fn read_landmarks<R: Read>(reader: R, frame_rate: f64, context: &str) -> Result<LandmarkTrack> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| csv_error(context, e))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (Some(c_frame), Some(c_idx), Some(c_x), Some(c_y)) =
        (column("frame"), column("idx"), column("x"), column("y"))
    else {
        return Err(Error::Schema(format!(
            "{context}: header must contain frame,idx,x,y (got {})",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    };
    let c_z = column("z");

    let mut frames: Vec<LandmarkFrame> = Vec::new();
    let mut filled: Vec<[bool; N_LANDMARKS]> = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_error(context, e))?;
        let row = line + 2;
        let field = |c: usize, name: &str| -> Result<&str> {
            record.get(c).ok_or_else(|| Error::Schema(format!("{context}:{row}: missing {name}")))
        };
        let frame: usize = parse(field(c_frame, "frame")?, context, row, "frame")?;
        let idx: usize = parse(field(c_idx, "idx")?, context, row, "idx")?;
        let x: f64 = parse(field(c_x, "x")?, context, row, "x")?;
        let y: f64 = parse(field(c_y, "y")?, context, row, "y")?;
        let z: f64 = match c_z {
            Some(c) => parse(field(c, "z")?, context, row, "z")?,
            None => 0.0,
        };
        if idx >= N_LANDMARKS {
            return Err(Error::Schema(format!(
                "{context}:{row}: landmark index {idx} outside 0..{N_LANDMARKS}"
            )));
        }
        if ![x, y, z].iter().all(|c| c.is_finite()) {
            return Err(Error::Validation(format!(
                "{context}:{row}: non-finite coordinate in frame {frame}, landmark {idx}"
            )));
        }
        if frame > frames.len() {
            return Err(Error::Schema(format!(
                "{context}:{row}: frame {frame} skips frame {}",
                frames.len()
            )));
        }
        if frame == frames.len() {
            if let Some(prev) = filled.last() {
                check_complete(prev, frames.len() - 1, context)?;
            }
            frames.push([[0.0; 3]; N_LANDMARKS]);
            filled.push([false; N_LANDMARKS]);
        } else if frame + 1 != frames.len() {
            return Err(Error::Schema(format!(
                "{context}:{row}: frame {frame} appears after frame {}",
                frames.len() - 1
            )));
        }
        if filled[frame][idx] {
            return Err(Error::Schema(format!(
                "{context}:{row}: frame {frame} repeats landmark {idx}"
            )));
        }
        filled[frame][idx] = true;
        frames[frame][idx] = [x, y, z];
    }
    if let Some(last) = filled.last() {
        check_complete(last, frames.len() - 1, context)?;
    }
    LandmarkTrack::new(frames, frame_rate)
}

fn check_complete(filled: &[bool; N_LANDMARKS], frame: usize, context: &str) -> Result<()> {
    let count = filled.iter().filter(|&&f| f).count();
    if count != N_LANDMARKS {
        return Err(Error::Schema(format!(
            "{context}: frame {frame} has {count} landmarks, expected {N_LANDMARKS}"
        )));
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(s: &str, context: &str, row: usize, name: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        context: format!("{context}:{row}"),
        message: format!("invalid {name} value {s:?}"),
    })
}

fn csv_error(context: &str, e: csv::Error) -> Error {
    Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    }
}

/// Writes a track with a z column, six decimals per coordinate.
pub fn write_landmarks<W: Write>(track: &LandmarkTrack, mut out: W) -> std::io::Result<()> {
    writeln!(out, "frame,idx,x,y,z")?;
    for (f, frame) in track.frames().iter().enumerate() {
        for (i, p) in frame.iter().enumerate() {
            writeln!(out, "{f},{i},{:.6},{:.6},{:.6}", p[0], p[1], p[2])?;
        }
    }
    Ok(())
}

pub fn save_landmarks(track: &LandmarkTrack, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_landmarks(track, &mut buf).map_err(|e| Error::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}
