//! Time-domain primitives: sample buffers, pre-emphasis, frame slicing, and
//! an impulse-train vowel synthesizer used by tests and the corpus generator.
//!
//! Analysis operations elsewhere in the crate assume 8 kHz input; the types
//! here are rate-agnostic so synthesis and noise mixing can run at any rate.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Sample rate required by the analysis pipeline (Hz).
pub const ANALYSIS_SAMPLE_RATE: u32 = 8000;

/// Default pre-emphasis coefficient: y[n] = x[n] - 0.97 x[n-1].
pub const DEFAULT_PREEMPHASIS: f64 = 0.97;

/// Mono signal with its sample rate. Samples are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl SignalBuffer {
    /// Wraps samples, rejecting NaN/Inf values and a zero sample rate.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate", "must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(
                "signal",
                format!("non-finite sample at index {i}"),
            ));
        }
        Ok(SignalBuffer { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Root mean square over the whole buffer; 0 for an empty buffer.
    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let power: f64 = self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64;
        power.sqrt()
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Analysis framing: window length and hop, both in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSpec {
    pub length_ms: f64,
    pub shift_ms: f64,
}

impl Default for FrameSpec {
    fn default() -> Self {
        FrameSpec { length_ms: 25.0, shift_ms: 10.0 }
    }
}

impl FrameSpec {
    pub fn length_samples(&self, sample_rate: u32) -> usize {
        (self.length_ms * sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn shift_samples(&self, sample_rate: u32) -> usize {
        (self.shift_ms * sample_rate as f64 / 1000.0).round() as usize
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        if !self.length_ms.is_finite() || !self.shift_ms.is_finite() {
            return Err(Error::invalid("frame spec", "lengths must be finite"));
        }
        if self.shift_ms <= 0.0 || self.length_ms < self.shift_ms {
            return Err(Error::invalid(
                "frame spec",
                format!(
                    "need 0 < shift <= length, got shift {} ms, length {} ms",
                    self.shift_ms, self.length_ms
                ),
            ));
        }
        if self.length_samples(sample_rate) == 0 || self.shift_samples(sample_rate) == 0 {
            return Err(Error::invalid("frame spec", "frame rounds to zero samples"));
        }
        Ok(())
    }
}

/// One analysis frame: a half-open sample range within a signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpan {
    pub start: usize,
    pub len: usize,
}

impl FrameSpan {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }

    /// Center of the frame in seconds.
    pub fn center_s(&self, sample_rate: u32) -> f64 {
        (self.start as f64 + self.len as f64 / 2.0) / sample_rate as f64
    }
}

/// First-order pre-emphasis y[n] = x[n] - c x[n-1], y[0] = x[0].
pub fn preemphasize(x: &SignalBuffer, coefficient: f64) -> Result<SignalBuffer> {
    if x.is_empty() {
        return Err(Error::EmptySignal);
    }
    if !coefficient.is_finite() {
        return Err(Error::invalid("pre-emphasis coefficient", "must be finite"));
    }
    let s = x.samples();
    let mut out = Vec::with_capacity(s.len());
    out.push(s[0]);
    for n in 1..s.len() {
        out.push(s[n] - coefficient * s[n - 1]);
    }
    Ok(SignalBuffer { samples: out, sample_rate: x.sample_rate })
}

/// Slices a signal into overlapping frames. A signal shorter than one frame
/// yields an empty list, not an error. Frame k starts at k * shift.
pub fn frame_signal(x: &SignalBuffer, spec: &FrameSpec) -> Result<Vec<FrameSpan>> {
    spec.validate(x.sample_rate)?;
    let len = spec.length_samples(x.sample_rate);
    let shift = spec.shift_samples(x.sample_rate);
    let n = x.len();
    if n < len {
        return Ok(Vec::new());
    }
    let count = (n - len) / shift + 1;
    Ok((0..count).map(|k| FrameSpan { start: k * shift, len }).collect())
}

/// Two-pole resonator y[n] = x[n] + c1 y[n-1] + c2 y[n-2] with poles at
/// radius exp(-pi B / fs) and angle 2 pi F / fs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Resonator {
    c1: f64,
    c2: f64,
    y1: f64,
    y2: f64,
}

impl Resonator {
    pub(crate) fn new(freq_hz: f64, bandwidth_hz: f64, sample_rate: u32) -> Self {
        let mut r = Resonator { c1: 0.0, c2: 0.0, y1: 0.0, y2: 0.0 };
        r.retune(freq_hz, bandwidth_hz, sample_rate);
        r
    }

    pub(crate) fn retune(&mut self, freq_hz: f64, bandwidth_hz: f64, sample_rate: u32) {
        let fs = sample_rate as f64;
        let radius = (-std::f64::consts::PI * bandwidth_hz / fs).exp();
        let theta = 2.0 * std::f64::consts::PI * freq_hz / fs;
        self.c1 = 2.0 * radius * theta.cos();
        self.c2 = -radius * radius;
    }

    /// Denominator coefficients [a1, a2] of A(z) = 1 + a1 z^-1 + a2 z^-2.
    #[cfg(test)]
    pub(crate) fn denominator(&self) -> [f64; 2] {
        [-self.c1, -self.c2]
    }

    #[inline]
    pub(crate) fn tick(&mut self, x: f64) -> f64 {
        let y = x + self.c1 * self.y1 + self.c2 * self.y2;
        self.y2 = self.y1;
        self.y1 = y;
        y
    }
}

/// Static vowel synthesis parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub f0_hz: f64,
    pub formants_hz: Vec<f64>,
    pub bandwidths_hz: Vec<f64>,
    pub duration_s: f64,
    pub sample_rate: u32,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(Error::invalid("synth spec", "sample rate must be positive"));
        }
        if !(self.f0_hz.is_finite() && self.f0_hz > 0.0) {
            return Err(Error::invalid("synth spec", "f0 must be positive"));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::invalid("synth spec", "duration must be positive"));
        }
        if self.formants_hz.is_empty() || self.formants_hz.len() != self.bandwidths_hz.len() {
            return Err(Error::invalid(
                "synth spec",
                "need one bandwidth per formant, at least one formant",
            ));
        }
        let nyquist = self.sample_rate as f64 / 2.0;
        for &f in &self.formants_hz {
            if !(f.is_finite() && f > 0.0 && f < nyquist) {
                return Err(Error::invalid(
                    "synth spec",
                    format!("formant {f} Hz outside (0, {nyquist}) Hz"),
                ));
            }
        }
        if self.bandwidths_hz.iter().any(|&b| !(b.is_finite() && b > 0.0)) {
            return Err(Error::invalid("synth spec", "bandwidths must be positive"));
        }
        Ok(())
    }
}

/// Impulse train at f0 through a cascade of two-pole resonators, RMS
/// normalized to 0.1. The seed randomizes the phase of the impulse train;
/// everything else is deterministic.
pub fn synthesize_vowel(spec: &SynthSpec, seed: u64) -> Result<SignalBuffer> {
    synthesize_vowel_with_excitation(spec, seed).map(|(buf, _)| buf)
}

/// Like [`synthesize_vowel`] but also returns the impulse positions, which
/// serve as ground-truth glottal closure instants.
pub fn synthesize_vowel_with_excitation(
    spec: &SynthSpec,
    seed: u64,
) -> Result<(SignalBuffer, Vec<usize>)> {
    spec.validate()?;
    let fs = spec.sample_rate as f64;
    let n = (spec.duration_s * fs).round() as usize;
    let period = fs / spec.f0_hz;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: f64 = rng.random_range(0.0..period);

    let mut excitation = vec![0.0; n];
    let mut instants = Vec::new();
    let mut t = offset;
    while t.round() < n as f64 {
        let idx = t.round() as usize;
        excitation[idx] = 1.0;
        instants.push(idx);
        t += period;
    }
    if instants.is_empty() {
        return Err(Error::invalid(
            "synth spec",
            "duration too short to fit one pitch period",
        ));
    }

    let mut resonators: Vec<Resonator> = spec
        .formants_hz
        .iter()
        .zip(&spec.bandwidths_hz)
        .map(|(&f, &b)| Resonator::new(f, b, spec.sample_rate))
        .collect();

    let mut samples = excitation;
    for res in &mut resonators {
        for s in &mut samples {
            *s = res.tick(*s);
        }
    }

    let mut buf = SignalBuffer { samples, sample_rate: spec.sample_rate };
    normalize_rms(&mut buf, 0.1)?;
    Ok((buf, instants))
}

/// Scales the buffer in place to the requested RMS. Errors on silent input.
pub(crate) fn normalize_rms(x: &mut SignalBuffer, target: f64) -> Result<()> {
    let rms = x.rms();
    if rms == 0.0 {
        return Err(Error::ZeroPowerSignal);
    }
    let gain = target / rms;
    for s in &mut x.samples {
        *s *= gain;
    }
    Ok(())
}

pub(crate) fn signal_from_raw(samples: Vec<f64>, sample_rate: u32) -> SignalBuffer {
    debug_assert!(samples.iter().all(|s| s.is_finite()));
    SignalBuffer { samples, sample_rate }
}

// ---------------------------------------------------------------------------
