use crate::error::{Error, Result};

/// Lowercases, drops punctuation and splits on whitespace.
pub fn normalize_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| !c.is_ascii_punctuation())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|w| !w.is_empty())
        .collect()
}

/// Levenshtein distance over arbitrary tokens.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Word error rate of `hypothesis` against `reference`, both given as
/// raw text.
pub fn word_error_rate(reference: &str, hypothesis: &str) -> Result<f64> {
    let r = normalize_words(reference);
    if r.is_empty() {
        return Err(Error::InvalidArgument("reference transcript is empty".into()));
    }
    let h = normalize_words(hypothesis);
    Ok(edit_distance(&r, &h) as f64 / r.len() as f64)
}
