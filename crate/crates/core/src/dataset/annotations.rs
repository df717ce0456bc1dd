//! Repetition annotations (`rep,onset_s,offset_s`) and ASR transcripts
//! (one hypothesis line per repetition).

use std::fs::{self, File};
use std::io::Read;
use std::path::Path;

use super::types::{validate_spans, RepetitionSpan};
use crate::error::{Error, Result};

pub fn load_annotations(path: &Path) -> Result<Vec<RepetitionSpan>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_annotations(file, &path.display().to_string())
}

pub fn read_annotations<R: Read>(reader: R, context: &str) -> Result<Vec<RepetitionSpan>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Parse {
        context: context.to_string(),
        message: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != ["rep", "onset_s", "offset_s"] {
        return Err(Error::Schema(format!(
            "{context}: header must be rep,onset_s,offset_s"
        )));
    }
    let mut spans = Vec::new();
    for (line, record) in rdr.deserialize::<(u32, f64, f64)>().enumerate() {
        let (index, onset_s, offset_s) = record.map_err(|e| Error::Parse {
            context: format!("{context}:{}", line + 2),
            message: e.to_string(),
        })?;
        if index == 0 {
            return Err(Error::Validation(format!(
                "{context}:{}: repetition numbers are 1-based",
                line + 2
            )));
        }
        spans.push(RepetitionSpan {
            index,
            onset_s,
            offset_s,
        });
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = spans.iter().find(|s| !seen.insert(s.index)) {
        return Err(Error::Validation(format!(
            "{context}: repetition {} annotated twice",
            dup.index
        )));
    }
    validate_spans(&spans).map_err(|e| Error::Validation(format!("{context}: {e}")))?;
    Ok(spans)
}

pub fn format_annotations(spans: &[RepetitionSpan]) -> String {
    let mut s = String::from("rep,onset_s,offset_s\n");
    for span in spans {
        s.push_str(&format!("{},{:.4},{:.4}\n", span.index, span.onset_s, span.offset_s));
    }
    s
}

/// Line `i` (0-based) holds the hypothesis for repetition `i + 1`.
pub fn load_transcripts(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(|l| l.trim().to_string()).collect())
}
