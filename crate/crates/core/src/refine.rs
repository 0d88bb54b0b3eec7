//! Formant tracks and nearest-peak refinement.
//!
//! A [`FormantTrack`] carries externally produced per-frame estimates, for
//! example the output of a neural tracker. Refinement recomputes an all-pole
//! spectrum for every frame of the underlying audio and moves each predicted
//! formant to the closest spectral peak, frame by frame and formant by
//! formant. Frames without peaks, and frames marked invalid, pass through
//! untouched.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{lp_cov, LpModel};
use crate::qcp::{build_qcp_weights, detect_gci, qcp_fb, GciList, QcpParams};
use crate::signal::{
    frame_signal, preemphasize, FrameSpec, SignalBuffer, ANALYSIS_SAMPLE_RATE,
    DEFAULT_PREEMPHASIS,
};
use crate::spectrum::{
    allpole_power_spectrum, pick_peaks, LpMethod, PeakList, PeakPickConfig, DEFAULT_GRID_SIZE,
};

/// Tolerance for comparing frame times against a uniform grid.
const TIME_TOLERANCE_S: f64 = 1e-6;

/// Expected header of a track CSV file.
pub const TRACK_CSV_HEADER: &str = "time_s,f1_hz,f2_hz,f3_hz";

/// One frame of a formant track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackFrame {
    pub time_s: f64,
    pub formants_hz: [f64; 3],
    pub valid: bool,
}

/// Per-frame formant estimates on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FormantTrack {
    frames: Vec<TrackFrame>,
}

impl FormantTrack {
    /// Validates monotone, uniformly spaced times and positive formants on
    /// valid frames.
    pub fn new(frames: Vec<TrackFrame>) -> Result<Self> {
        for pair in frames.windows(2) {
            if pair[1].time_s <= pair[0].time_s {
                return Err(Error::invalid(
                    "formant track",
                    format!(
                        "times must increase strictly, got {} then {}",
                        pair[0].time_s, pair[1].time_s
                    ),
                ));
            }
        }
        if frames.len() >= 3 {
            let spacing = frames[1].time_s - frames[0].time_s;
            for (i, pair) in frames.windows(2).enumerate() {
                let step = pair[1].time_s - pair[0].time_s;
                if (step - spacing).abs() > TIME_TOLERANCE_S {
                    return Err(Error::invalid(
                        "formant track",
                        format!(
                            "frame spacing must be uniform: {} s at row {} vs {} s at row 0",
                            step,
                            i + 1,
                            spacing
                        ),
                    ));
                }
            }
        }
        for frame in &frames {
            if !frame.time_s.is_finite() || frame.time_s < 0.0 {
                return Err(Error::invalid("formant track", "times must be finite and nonnegative"));
            }
            if frame.valid {
                for f in frame.formants_hz {
                    if !f.is_finite() || f <= 0.0 {
                        return Err(Error::invalid(
                            "formant track",
                            format!("valid frame at {} s has non-positive formant {f}", frame.time_s),
                        ));
                    }
                }
            }
        }
        Ok(Self { frames })
    }

    pub fn frames(&self) -> &[TrackFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Reads the CSV track format (`time_s,f1_hz,f2_hz,f3_hz`).
    ///
    /// Rows with any non-positive formant are loaded as invalid frames, which
    /// is how upstream trackers mark frames they could not estimate.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "file is empty".to_string()))?;
        if header.trim() != TRACK_CSV_HEADER {
            return Err(Error::parse(
                path,
                1,
                format!("expected header '{TRACK_CSV_HEADER}', got '{}'", header.trim()),
            ));
        }
        let mut frames = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("expected 4 comma-separated values, got {}", fields.len()),
                ));
            }
            let mut numbers = [0.0f64; 4];
            for (slot, field) in numbers.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| {
                    Error::parse(path, idx + 1, format!("'{field}' is not a number"))
                })?;
                if !slot.is_finite() {
                    return Err(Error::parse(path, idx + 1, format!("'{field}' is not finite")));
                }
            }
            let formants_hz = [numbers[1], numbers[2], numbers[3]];
            let valid = formants_hz.iter().all(|&f| f > 0.0);
            frames.push(TrackFrame { time_s: numbers[0], formants_hz, valid });
        }
        Self::new(frames)
    }

    /// Writes the CSV track format with 6 significant digits per value.
    /// Invalid frames are written as zeros.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        out.push_str(TRACK_CSV_HEADER);
        out.push('\n');
        for frame in &self.frames {
            out.push_str(&format_sig6(frame.time_s));
            for f in frame.formants_hz {
                out.push(',');
                out.push_str(&format_sig6(if frame.valid { f } else { 0.0 }));
            }
            out.push('\n');
        }
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Formats with 6 significant digits in plain decimal notation.
pub(crate) fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (5 - exponent).max(0) as usize;
    format!("{v:.decimals$}")
}

/// Per-frame spectral peaks on the same grid as a [`FormantTrack`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeakTrack {
    times_s: Vec<f64>,
    peaks: Vec<PeakList>,
}

impl PeakTrack {
    pub fn new(times_s: Vec<f64>, peaks: Vec<PeakList>) -> Result<Self> {
        if times_s.len() != peaks.len() {
            return Err(Error::FrameCountMismatch { left: times_s.len(), right: peaks.len() });
        }
        Ok(Self { times_s, peaks })
    }

    pub fn times_s(&self) -> &[f64] {
        &self.times_s
    }

    pub fn peaks(&self) -> &[PeakList] {
        &self.peaks
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }
}

/// Settings for the frame analysis pipeline.
///
/// `align_offset_ms` shifts frame-center timestamps back so they land on the
/// track grid; `None` uses half the frame length, which maps the default
/// 25 ms / 10 ms framing onto exact 10 ms timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub method: LpMethod,
    pub order: usize,
    pub frame: FrameSpec,
    pub preemphasis: f64,
    pub qcp: QcpParams,
    pub grid_size: usize,
    pub pick: PeakPickConfig,
    pub align_offset_ms: Option<f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            method: LpMethod::LpCov,
            order: 13,
            frame: FrameSpec::default(),
            preemphasis: DEFAULT_PREEMPHASIS,
            qcp: QcpParams::default(),
            grid_size: DEFAULT_GRID_SIZE,
            pick: PeakPickConfig::default(),
            align_offset_ms: None,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::invalid("order", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.preemphasis) {
            return Err(Error::invalid("preemphasis", "must lie in [0, 1)"));
        }
        self.frame.validate(ANALYSIS_SAMPLE_RATE)?;
        self.qcp.validate()?;
        self.pick.validate()?;
        if let Some(ms) = self.align_offset_ms {
            if !ms.is_finite() {
                return Err(Error::invalid("align_offset_ms", "must be finite"));
            }
        }
        Ok(())
    }

    /// Alignment offset in seconds subtracted from frame centers.
    pub fn align_offset_s(&self) -> f64 {
        self.align_offset_ms.unwrap_or(self.frame.length_ms / 2.0) / 1000.0
    }
}

fn analyze_frame(
    pre: &SignalBuffer,
    start: usize,
    len: usize,
    gcis: &GciList,
    config: &AnalysisConfig,
) -> Result<PeakList> {
    let frame = &pre.samples()[start..start + len];
    let model: LpModel = match config.method {
        LpMethod::LpCov => lp_cov(frame, config.order)?,
        LpMethod::QcpFb => {
            let weights = build_qcp_weights(start, len, gcis, &config.qcp, pre.sample_rate())?;
            qcp_fb(frame, config.order, Some(&weights))?
        }
    };
    if model.degenerate {
        return Ok(PeakList::empty());
    }
    let spectrum = allpole_power_spectrum(&model, config.grid_size, pre.sample_rate())?;
    pick_peaks(&spectrum, &config.pick)
}

/// Computes per-frame spectral peaks for a whole utterance.
///
/// For the weighted method, glottal closure instants are taken from `gcis`
/// when provided (for example from an external detector) and detected from
/// the unprocessed audio otherwise. Frames are processed in parallel; the
/// output is identical to sequential evaluation.
pub fn peak_track(
    audio: &SignalBuffer,
    config: &AnalysisConfig,
    gcis: Option<&GciList>,
) -> Result<PeakTrack> {
    config.validate()?;
    if audio.sample_rate() != ANALYSIS_SAMPLE_RATE {
        return Err(Error::SampleRateMismatch {
            got: audio.sample_rate(),
            required: ANALYSIS_SAMPLE_RATE,
        });
    }
    let detected;
    let gcis = match (config.method, gcis) {
        (LpMethod::QcpFb, None) => {
            detected = detect_gci(audio);
            &detected
        }
        (_, Some(list)) => list,
        (LpMethod::LpCov, None) => {
            detected = GciList::empty();
            &detected
        }
    };

    let pre = preemphasize(audio, config.preemphasis)?;
    let spans = frame_signal(&pre, &config.frame)?;
    let offset = config.align_offset_s();
    let times: Vec<f64> = spans
        .iter()
        .map(|s| s.center_s(audio.sample_rate()) - offset)
        .collect();
    let peaks: Vec<PeakList> = spans
        .par_iter()
        .map(|span| analyze_frame(&pre, span.start, span.len, gcis, config))
        .collect::<Result<_>>()?;
    PeakTrack::new(times, peaks)
}

/// Runs the raw estimation pipeline: the lowest three spectral peaks of each
/// frame become F1, F2 and F3. Frames with fewer than three peaks are marked
/// invalid.
pub fn estimate_track(
    audio: &SignalBuffer,
    config: &AnalysisConfig,
    gcis: Option<&GciList>,
) -> Result<FormantTrack> {
    let peaks = peak_track(audio, config, gcis)?;
    let frames = peaks
        .times_s()
        .iter()
        .zip(peaks.peaks())
        .map(|(&time_s, list)| {
            let f = list.frequencies();
            if f.len() >= 3 {
                TrackFrame { time_s, formants_hz: [f[0], f[1], f[2]], valid: true }
            } else {
                TrackFrame { time_s, formants_hz: [0.0; 3], valid: false }
            }
        })
        .collect();
    FormantTrack::new(frames)
}

/// Moves each predicted formant to the nearest peak, independently per
/// formant. An empty peak list keeps the prediction.
pub fn refine_frame(predicted: [f64; 3], peaks: &PeakList) -> [f64; 3] {
    if peaks.is_empty() {
        return predicted;
    }
    let mut refined = predicted;
    for (slot, p) in refined.iter_mut().zip(predicted) {
        let nearest = peaks
            .frequencies()
            .iter()
            .copied()
            .min_by(|a, b| (a - p).abs().partial_cmp(&(b - p).abs()).unwrap())
            .unwrap();
        *slot = nearest;
    }
    refined
}

/// Counters describing what refinement did; none of these conditions is
/// repaired, they are reported so callers can monitor them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RefineDiagnostics {
    /// Frames where two or more formants landed on the same peak.
    pub collisions: usize,
    /// Frames whose refined output violates F1 < F2 < F3.
    pub monotonicity_violations: usize,
    /// Frames processed (valid frames with at least one peak).
    pub frames: usize,
}

/// Refines a predicted track against the all-pole spectra of `audio`.
///
/// The predicted grid must match the analysis grid frame for frame. Invalid
/// frames pass through unchanged.
pub fn refine_track(
    predicted: &FormantTrack,
    audio: &SignalBuffer,
    config: &AnalysisConfig,
    gcis: Option<&GciList>,
) -> Result<(FormantTrack, RefineDiagnostics)> {
    let peaks = peak_track(audio, config, gcis)?;
    if peaks.len() != predicted.len() {
        return Err(Error::FrameCountMismatch { left: predicted.len(), right: peaks.len() });
    }
    let mut diagnostics = RefineDiagnostics::default();
    let mut frames = Vec::with_capacity(predicted.len());
    for (frame, list) in predicted.frames().iter().zip(peaks.peaks()) {
        if !frame.valid || list.is_empty() {
            frames.push(*frame);
            continue;
        }
        diagnostics.frames += 1;
        let refined = refine_frame(frame.formants_hz, list);
        let [f1, f2, f3] = refined;
        if f1 == f2 || f2 == f3 || f1 == f3 {
            diagnostics.collisions += 1;
        }
        if !(f1 < f2 && f2 < f3) {
            diagnostics.monotonicity_violations += 1;
        }
        frames.push(TrackFrame { time_s: frame.time_s, formants_hz: refined, valid: true });
    }
    Ok((FormantTrack::new(frames)?, diagnostics))
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{synthesize_vowel_with_excitation, SynthSpec};
    use rand::RngExt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vowel(duration_s: f64, seed: u64) -> SignalBuffer {
        let spec = SynthSpec {
            f0_hz: 120.0,
            formants_hz: vec![700.0, 1220.0, 2600.0],
            bandwidths_hz: vec![60.0, 100.0, 120.0],
            duration_s,
            sample_rate: 8000,
        };
        synthesize_vowel_with_excitation(&spec, seed).unwrap().0
    }

    fn peaks(freqs: &[f64]) -> PeakList {
        PeakList::new(freqs.to_vec(), 8000).unwrap()
    }

    #[test]
    fn refine_frame_moves_each_formant_to_its_nearest_peak() {
        let out = refine_frame([550.0, 1400.0, 2600.0], &peaks(&[500.0, 1500.0, 2500.0]));
        assert_eq!(out, [500.0, 1500.0, 2500.0]);
    }

    #[test]
    fn refine_frame_is_a_fixed_point_on_exact_predictions() {
        let list = peaks(&[500.0, 1500.0, 2500.0]);
        let out = refine_frame([500.0, 1500.0, 2500.0], &list);
        assert_eq!(out, [500.0, 1500.0, 2500.0]);
    }

    #[test]
    fn refine_frame_without_peaks_keeps_the_prediction() {
        let out = refine_frame([550.0, 1400.0, 2600.0], &PeakList::empty());
        assert_eq!(out, [550.0, 1400.0, 2600.0]);
    }

    #[test]
    fn close_predictions_may_collide_on_one_peak() {
        let out = refine_frame([900.0, 1000.0, 2500.0], &peaks(&[950.0, 2500.0]));
        assert_eq!(out, [950.0, 950.0, 2500.0]);
    }

    #[test]
    fn track_csv_roundtrip_preserves_values_and_validity() {
        let track = FormantTrack::new(vec![
            TrackFrame { time_s: 0.0, formants_hz: [512.345, 1501.5, 2499.9], valid: true },
            TrackFrame { time_s: 0.01, formants_hz: [0.0; 3], valid: false },
            TrackFrame { time_s: 0.02, formants_hz: [612.0, 1601.0, 2601.0], valid: true },
        ])
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("track.csv");
        track.write_csv(&path).unwrap();

        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "time_s,f1_hz,f2_hz,f3_hz");
        assert_eq!(lines.next().unwrap(), "0,512.345,1501.50,2499.90");
        assert_eq!(lines.next().unwrap(), "0.0100000,0,0,0");

        let back = FormantTrack::read_csv(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert!(back.frames()[0].valid);
        assert!(!back.frames()[1].valid);
        assert!((back.frames()[0].formants_hz[0] - 512.345).abs() < 1e-9);
        assert!((back.frames()[2].formants_hz[2] - 2601.0).abs() < 1e-9);
    }

    #[test]
    fn csv_reader_rejects_wrong_header_and_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");

        std::fs::write(&path, "time,f1,f2,f3\n0,500,1500,2500\n").unwrap();
        let err = FormantTrack::read_csv(&path).unwrap_err().to_string();
        assert!(err.contains("expected header"), "unexpected message: {err}");

        std::fs::write(&path, "time_s,f1_hz,f2_hz,f3_hz\n0,500,abc,2500\n").unwrap();
        let err = FormantTrack::read_csv(&path).unwrap_err().to_string();
        assert!(err.contains("line 2"), "unexpected message: {err}");

        std::fs::write(&path, "time_s,f1_hz,f2_hz,f3_hz\n0,500,1500\n").unwrap();
        assert!(FormantTrack::read_csv(&path).is_err());
    }

    #[test]
    fn track_validation_rejects_nonuniform_or_unordered_times() {
        let frame = |t: f64| TrackFrame { time_s: t, formants_hz: [500.0, 1500.0, 2500.0], valid: true };
        assert!(FormantTrack::new(vec![frame(0.0), frame(0.01), frame(0.03)]).is_err());
        assert!(FormantTrack::new(vec![frame(0.01), frame(0.0)]).is_err());
        assert!(FormantTrack::new(vec![frame(0.0), frame(0.01), frame(0.02)]).is_ok());
    }

    #[test]
    fn six_significant_digit_formatting() {
        assert_eq!(format_sig6(2600.0), "2600.00");
        assert_eq!(format_sig6(0.0125), "0.0125000");
        assert_eq!(format_sig6(123456.0), "123456");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(-512.3), "-512.300");
    }

    #[test]
    fn default_alignment_puts_frames_on_the_10ms_grid() {
        let audio = vowel(0.5, 5);
        let track = estimate_track(&audio, &AnalysisConfig::default(), None).unwrap();
        for (k, frame) in track.frames().iter().enumerate() {
            assert!(
                (frame.time_s - k as f64 * 0.01).abs() < 1e-12,
                "frame {k} stamped {} s",
                frame.time_s
            );
        }
    }

    #[test]
    fn estimates_on_a_clean_vowel_are_near_truth() {
        let audio = vowel(0.5, 5);
        let track = estimate_track(&audio, &AnalysisConfig::default(), None).unwrap();
        let truth = [700.0, 1220.0, 2600.0];
        let valid: Vec<&TrackFrame> = track.frames().iter().filter(|f| f.valid).collect();
        assert!(valid.len() * 10 >= track.len() * 9, "too few valid frames");
        for frame in valid {
            for (hyp, t) in frame.formants_hz.iter().zip(truth) {
                assert!(
                    (hyp - t).abs() < 100.0,
                    "estimate {hyp} Hz far from {t} Hz at {} s",
                    frame.time_s
                );
            }
        }
    }

    #[test]
    fn refining_the_estimated_track_is_idempotent_and_a_fixed_point() {
        let audio = vowel(0.5, 6);
        let config = AnalysisConfig::default();
        let estimated = estimate_track(&audio, &config, None).unwrap();

        let (once, _) = refine_track(&estimated, &audio, &config, None).unwrap();
        assert_eq!(once, estimated, "estimates are peaks, so refinement must not move them");

        let (twice, _) = refine_track(&once, &audio, &config, None).unwrap();
        assert_eq!(twice, once);
    }

    #[test]
    fn refined_values_are_peaks_or_the_original_prediction() {
        let audio = vowel(0.5, 7);
        let config = AnalysisConfig::default();
        let all_peaks = peak_track(&audio, &config, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let frames: Vec<TrackFrame> = all_peaks
            .times_s()
            .iter()
            .map(|&t| TrackFrame {
                time_s: t,
                formants_hz: [
                    rng.random_range(300.0..900.0),
                    rng.random_range(1000.0..1800.0),
                    rng.random_range(2000.0..3000.0),
                ],
                valid: true,
            })
            .collect();
        let predicted = FormantTrack::new(frames).unwrap();
        let (refined, _) = refine_track(&predicted, &audio, &config, None).unwrap();
        for ((out, inp), list) in refined
            .frames()
            .iter()
            .zip(predicted.frames())
            .zip(all_peaks.peaks())
        {
            for (o, i) in out.formants_hz.iter().zip(inp.formants_hz) {
                let is_peak = list.frequencies().iter().any(|p| p == o);
                assert!(
                    is_peak || *o == i,
                    "refined value {o} is neither a peak nor the prediction {i}"
                );
            }
        }
    }

    #[test]
    fn refinement_on_silence_passes_everything_through() {
        let silence = SignalBuffer::new(vec![0.0; 4000], 8000).unwrap();
        let frames: Vec<TrackFrame> = (0..48)
            .map(|k| TrackFrame {
                time_s: k as f64 * 0.01,
                formants_hz: [550.0, 1400.0, 2600.0],
                valid: true,
            })
            .collect();
        let predicted = FormantTrack::new(frames).unwrap();
        let (refined, diagnostics) =
            refine_track(&predicted, &silence, &AnalysisConfig::default(), None).unwrap();
        assert_eq!(refined, predicted);
        assert_eq!(diagnostics.frames, 0);
    }

    #[test]
    fn invalid_predictions_pass_through_unchanged() {
        let audio = vowel(0.5, 8);
        let config = AnalysisConfig::default();
        let grid = peak_track(&audio, &config, None).unwrap();
        let frames: Vec<TrackFrame> = grid
            .times_s()
            .iter()
            .enumerate()
            .map(|(k, &t)| TrackFrame {
                time_s: t,
                formants_hz: if k % 2 == 0 { [600.0, 1300.0, 2500.0] } else { [0.0; 3] },
                valid: k % 2 == 0,
            })
            .collect();
        let predicted = FormantTrack::new(frames).unwrap();
        let (refined, _) = refine_track(&predicted, &audio, &config, None).unwrap();
        for (out, inp) in refined.frames().iter().zip(predicted.frames()) {
            if !inp.valid {
                assert_eq!(out, inp);
            }
        }
    }

    #[test]
    fn frame_count_mismatch_is_reported_with_both_counts() {
        let audio = vowel(0.5, 9);
        let predicted = FormantTrack::new(
            (0..5)
                .map(|k| TrackFrame {
                    time_s: k as f64 * 0.01,
                    formants_hz: [500.0, 1500.0, 2500.0],
                    valid: true,
                })
                .collect(),
        )
        .unwrap();
        let err = refine_track(&predicted, &audio, &AnalysisConfig::default(), None).unwrap_err();
        match err {
            Error::FrameCountMismatch { left, right } => {
                assert_eq!(left, 5);
                assert_eq!(right, 48);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn editing_one_sample_only_affects_frames_that_contain_it() {
        let audio = vowel(0.5, 10);
        let config = AnalysisConfig::default();
        let before = peak_track(&audio, &config, None).unwrap();

        let target = 1700usize;
        let mut samples = audio.samples().to_vec();
        samples[target] += 0.25;
        let edited = SignalBuffer::new(samples, 8000).unwrap();
        let after = peak_track(&edited, &config, None).unwrap();

        let frame_len = config.frame.length_samples(8000);
        let shift = config.frame.shift_samples(8000);
        for (k, (a, b)) in before.peaks().iter().zip(after.peaks()).enumerate() {
            let start = k * shift;
            // Pre-emphasis smears the edit one sample forward.
            let touches = target + 1 >= start && target < start + frame_len;
            if !touches {
                assert_eq!(a, b, "frame {k} does not contain sample {target} but changed");
            }
        }
        let changed = before
            .peaks()
            .iter()
            .zip(after.peaks())
            .filter(|(a, b)| a != b)
            .count();
        assert!(changed > 0, "the edit should perturb at least one containing frame");
    }

    #[test]
    fn parallel_analysis_matches_sequential_composition() {
        let audio = vowel(0.5, 11);
        let config = AnalysisConfig { method: LpMethod::QcpFb, ..AnalysisConfig::default() };
        let parallel = peak_track(&audio, &config, None).unwrap();

        let gcis = detect_gci(&audio);
        let pre = preemphasize(&audio, config.preemphasis).unwrap();
        let spans = frame_signal(&pre, &config.frame).unwrap();
        let sequential: Vec<PeakList> = spans
            .iter()
            .map(|s| analyze_frame(&pre, s.start, s.len, &gcis, &config).unwrap())
            .collect();
        assert_eq!(parallel.peaks(), sequential.as_slice());
    }

    #[test]
    fn refining_perturbed_predictions_reduces_error_on_every_formant() {
        let truth = [700.0, 1220.0, 2600.0];
        let audio = vowel(1.0, 12);
        let config = AnalysisConfig::default();
        let grid = peak_track(&audio, &config, None).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(120);
        let frames: Vec<TrackFrame> = grid
            .times_s()
            .iter()
            .map(|&t| TrackFrame {
                time_s: t,
                formants_hz: [
                    truth[0] + rng.random_range(-150.0..150.0),
                    truth[1] + rng.random_range(-150.0..150.0),
                    truth[2] + rng.random_range(-150.0..150.0),
                ],
                valid: true,
            })
            .collect();
        let predicted = FormantTrack::new(frames).unwrap();
        let (refined, _) = refine_track(&predicted, &audio, &config, None).unwrap();

        for i in 0..3 {
            let mean_abs = |track: &FormantTrack| {
                let sum: f64 = track
                    .frames()
                    .iter()
                    .map(|f| (f.formants_hz[i] - truth[i]).abs())
                    .sum();
                sum / track.len() as f64
            };
            let before = mean_abs(&predicted);
            let after = mean_abs(&refined);
            assert!(
                after < before,
                "formant {} error went from {before:.1} to {after:.1} Hz",
                i + 1
            );
        }
    }
}
