use std::ops::Range;

use super::types::{validate_spans, AudioClip, LandmarkTrack, RepetitionSpan};
use crate::error::{Error, Result};

/// A uniformly sampled signal whose element `k` sits at time `k / rate`.
pub trait Timeline: Sized {
    fn rate(&self) -> f64;
    fn count(&self) -> usize;
    fn sub_range(&self, range: Range<usize>) -> Self;
}

impl Timeline for AudioClip {
    fn rate(&self) -> f64 {
        f64::from(self.sample_rate())
    }

    fn count(&self) -> usize {
        self.len()
    }

    fn sub_range(&self, range: Range<usize>) -> Self {
        AudioClip::new(self.samples()[range].to_vec(), self.sample_rate())
            .expect("sub-range of a valid clip is valid")
    }
}

impl Timeline for LandmarkTrack {
    fn rate(&self) -> f64 {
        self.frame_rate()
    }

    fn count(&self) -> usize {
        self.len()
    }

    fn sub_range(&self, range: Range<usize>) -> Self {
        LandmarkTrack::new(self.frames()[range].to_vec(), self.frame_rate())
            .expect("sub-range of a valid track is valid")
    }
}

/// Smallest `k` with `k / rate >= t`.
fn first_index_at_or_after(t: f64, rate: f64) -> usize {
    let mut k = (t * rate).ceil().max(0.0) as usize;
    while k > 0 && (k - 1) as f64 / rate >= t {
        k -= 1;
    }
    while (k as f64) / rate < t {
        k += 1;
    }
    k
}

/// Index range of the elements whose time lies in `[onset_s, offset_s)`.
pub fn span_range<S: Timeline>(signal: &S, span: &RepetitionSpan) -> Result<Range<usize>> {
    let rate = signal.rate();
    let duration = signal.count() as f64 / rate;
    if span.offset_s > duration + 1e-9 {
        return Err(Error::Range(format!(
            "repetition {} ends at {} s but the signal lasts {} s",
            span.index, span.offset_s, duration
        )));
    }
    let start = first_index_at_or_after(span.onset_s, rate).min(signal.count());
    let end = first_index_at_or_after(span.offset_s, rate).min(signal.count());
    Ok(start..end.max(start))
}

/// Cuts one segment per span.
pub fn slice_spans<S: Timeline>(signal: &S, spans: &[RepetitionSpan]) -> Result<Vec<S>> {
    validate_spans(spans)?;
    spans
        .iter()
        .map(|span| Ok(signal.sub_range(span_range(signal, span)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(n: usize, rate: u32) -> AudioClip {
        AudioClip::new((0..n).map(|k| k as f64 / n as f64).collect(), rate).unwrap()
    }

    #[test]
    fn half_second_span_at_16k() {
        let clip = ramp(32000, 16000);
        let span = RepetitionSpan { index: 1, onset_s: 0.5, offset_s: 1.0 };
        assert_eq!(span_range(&clip, &span).unwrap(), 8000..16000);
        let seg = &slice_spans(&clip, &[span]).unwrap()[0];
        assert_eq!(seg.len(), 8000);
        assert_eq!(seg.samples()[0], clip.samples()[8000]);
        assert_eq!(*seg.samples().last().unwrap(), clip.samples()[15999]);
    }

    #[test]
    fn empty_span_list() {
        assert!(slice_spans(&ramp(100, 100), &[]).unwrap().is_empty());
    }

    #[test]
    fn overlapping_spans_error() {
        let spans = [
            RepetitionSpan { index: 1, onset_s: 0.0, offset_s: 1.0 },
            RepetitionSpan { index: 2, onset_s: 0.5, offset_s: 1.5 },
        ];
        assert!(matches!(slice_spans(&ramp(32000, 16000), &spans), Err(Error::Validation(_))));
    }

    #[test]
    fn span_past_end_is_range_error() {
        let spans = [RepetitionSpan { index: 1, onset_s: 0.5, offset_s: 2.5 }];
        assert!(matches!(slice_spans(&ramp(32000, 16000), &spans), Err(Error::Range(_))));
    }

    #[test]
    fn landmark_frames_use_frame_rate() {
        let track = LandmarkTrack::new(vec![[[0.0; 3]; 68]; 30], 30.0).unwrap();
        let span = RepetitionSpan { index: 1, onset_s: 0.1, offset_s: 0.5 };
        assert_eq!(span_range(&track, &span).unwrap(), 3..15);
    }

    proptest! {
        #[test]
        fn contiguous_spans_partition_region(cuts in proptest::collection::btree_set(1u32..1999, 1..8), rate in prop::sample::select(vec![8000u32, 11025, 16000, 22050])) {
            let clip = ramp(rate as usize * 2, rate);
            let mut bounds: Vec<f64> = vec![0.0];
            bounds.extend(cuts.iter().map(|&c| c as f64 / 1000.0));
            bounds.push(2.0);
            let spans: Vec<_> = bounds
                .windows(2)
                .enumerate()
                .map(|(i, w)| RepetitionSpan { index: i as u32 + 1, onset_s: w[0], offset_s: w[1] })
                .collect();
            let joined: Vec<f64> = slice_spans(&clip, &spans)
                .unwrap()
                .iter()
                .flat_map(|s| s.samples().to_vec())
                .collect();
            prop_assert_eq!(joined.as_slice(), clip.samples());
        }
    }
}
