//! All-pole power spectra and local-peak extraction.
//!
//! The estimation pipeline turns an LP model into a one-sided power spectrum
//! evaluated on a uniform grid, then picks resonance candidates as the local
//! maxima of the smoothed log spectrum. Smoothing and differentiation are
//! fused into a single convolution with a Gaussian-derivative kernel; peaks
//! are the positive-to-negative zero crossings of that output.

use crate::error::{Error, Result};
use crate::lp::{lp_cov, LpModel};
use crate::qcp::{qcp_fb, WeightFunction};
use crate::signal::ANALYSIS_SAMPLE_RATE;

/// One-sided grid size used by the frame pipeline: 4096-point transform
/// resolution, 2049 bins from DC to Nyquist inclusive.
pub const DEFAULT_GRID_SIZE: usize = 2049;

/// Ceiling applied where the model denominator vanishes on a grid point.
pub const SPECTRUM_CLAMP: f64 = 1e12;

/// Power spectrum of an all-pole model on a uniform grid over [0, fs/2].
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    values: Vec<f64>,
    sample_rate: u32,
    clamped: bool,
}

impl PowerSpectrum {
    /// Wraps raw nonnegative values defined on a `2^m + 1` sized grid.
    pub fn from_values(values: Vec<f64>, sample_rate: u32) -> Result<Self> {
        validate_grid_size(values.len())?;
        if sample_rate == 0 {
            return Err(Error::invalid("sample_rate", "must be positive"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(
                "power spectrum",
                format!("values must be finite and nonnegative, found {v}"),
            ));
        }
        Ok(Self { values, sample_rate, clamped: false })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// True when at least one grid point hit the evaluation ceiling.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    pub fn grid_size(&self) -> usize {
        self.values.len()
    }

    /// Grid spacing in Hz.
    pub fn hz_per_bin(&self) -> f64 {
        self.sample_rate as f64 / 2.0 / (self.values.len() - 1) as f64
    }

    /// Frequency of bin `k` in Hz.
    pub fn bin_hz(&self, k: usize) -> f64 {
        k as f64 * self.hz_per_bin()
    }
}

fn validate_grid_size(grid_size: usize) -> Result<()> {
    if grid_size < 3 || !(grid_size - 1).is_power_of_two() {
        return Err(Error::invalid(
            "grid_size",
            format!("must be a power of two plus one, got {grid_size}"),
        ));
    }
    Ok(())
}

/// Evaluates `1 / |A(e^{jw})|^2` on `grid_size` points from DC to Nyquist.
///
/// Grid points where the denominator vanishes are clamped to
/// [`SPECTRUM_CLAMP`] and the result is flagged. Evaluation is direct per
/// bin with a complex-rotation recurrence, so no transform planner or
/// shared state is involved.
pub fn allpole_power_spectrum(
    model: &LpModel,
    grid_size: usize,
    sample_rate: u32,
) -> Result<PowerSpectrum> {
    validate_grid_size(grid_size)?;
    if sample_rate == 0 {
        return Err(Error::invalid("sample_rate", "must be positive"));
    }
    let mut values = Vec::with_capacity(grid_size);
    let mut clamped = false;
    for k in 0..grid_size {
        let omega = std::f64::consts::PI * k as f64 / (grid_size - 1) as f64;
        // Step e^{-j omega} applied incrementally across coefficient index.
        let (step_re, step_im) = (omega.cos(), -omega.sin());
        let (mut z_re, mut z_im) = (1.0, 0.0);
        let (mut a_re, mut a_im) = (1.0, 0.0);
        for &c in &model.coefficients {
            let nr = z_re * step_re - z_im * step_im;
            let ni = z_re * step_im + z_im * step_re;
            z_re = nr;
            z_im = ni;
            a_re += c * z_re;
            a_im += c * z_im;
        }
        let denom = a_re * a_re + a_im * a_im;
        let v = 1.0 / denom;
        if v.is_finite() && v < SPECTRUM_CLAMP {
            values.push(v);
        } else {
            values.push(SPECTRUM_CLAMP);
            clamped = true;
        }
    }
    Ok(PowerSpectrum { values, sample_rate, clamped })
}

/// Candidate resonance frequencies in ascending order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakList {
    frequencies: Vec<f64>,
}

impl PeakList {
    /// Wraps frequencies, which must ascend strictly and sit inside (0, fs/2).
    pub fn new(frequencies: Vec<f64>, sample_rate: u32) -> Result<Self> {
        let nyquist = sample_rate as f64 / 2.0;
        for pair in frequencies.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::invalid(
                    "peak list",
                    format!("frequencies must ascend strictly, got {} then {}", pair[0], pair[1]),
                ));
            }
        }
        if let Some(f) = frequencies.iter().find(|f| !f.is_finite() || **f <= 0.0 || **f >= nyquist) {
            return Err(Error::invalid(
                "peak list",
                format!("frequency {f} outside (0, {nyquist})"),
            ));
        }
        Ok(Self { frequencies })
    }

    pub fn empty() -> Self {
        Self { frequencies: Vec::new() }
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// Peak-picking controls.
///
/// `smoothing_width_hz` is the full width of the Gaussian (two standard
/// deviations); the kernel is truncated at three standard deviations.
/// `linear_domain` switches the crossing search from the dB spectrum to raw
/// power, kept for sensitivity checks.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakPickConfig {
    pub smoothing_width_hz: f64,
    pub edge_margin_hz: f64,
    pub linear_domain: bool,
}

impl Default for PeakPickConfig {
    fn default() -> Self {
        Self { smoothing_width_hz: 100.0, edge_margin_hz: 50.0, linear_domain: false }
    }
}

impl PeakPickConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.smoothing_width_hz.is_finite() || self.smoothing_width_hz <= 0.0 {
            return Err(Error::invalid("smoothing_width_hz", "must be positive"));
        }
        if !self.edge_margin_hz.is_finite() || self.edge_margin_hz < 0.0 {
            return Err(Error::invalid("edge_margin_hz", "must be nonnegative"));
        }
        Ok(())
    }
}

fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if i < 0 {
        i = -i;
    }
    if i >= n {
        i = 2 * (n - 1) - i;
    }
    debug_assert!((0..n).contains(&i), "kernel wider than spectrum");
    i as usize
}

fn spectrum_domain(s: &PowerSpectrum, config: &PeakPickConfig) -> Vec<f64> {
    if config.linear_domain {
        s.values.clone()
    } else {
        s.values.iter().map(|&v| 10.0 * v.max(f64::MIN_POSITIVE).log10()).collect()
    }
}

fn gaussian_kernels(sigma_bins: f64) -> (Vec<f64>, Vec<f64>) {
    let half = (3.0 * sigma_bins).ceil() as isize;
    let mut smooth = Vec::with_capacity((2 * half + 1) as usize);
    let mut derivative = Vec::with_capacity((2 * half + 1) as usize);
    for t in -half..=half {
        let t = t as f64;
        let g = (-t * t / (2.0 * sigma_bins * sigma_bins)).exp();
        smooth.push(g);
        derivative.push(-t * g);
    }
    let norm: f64 = smooth.iter().sum();
    for v in &mut smooth {
        *v /= norm;
    }
    (smooth, derivative)
}

fn convolve_reflect(values: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = values.len();
    let half = (kernel.len() / 2) as isize;
    let mut out = vec![0.0; n];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (j, &w) in kernel.iter().enumerate() {
            let t = j as isize - half;
            acc += w * values[reflect(k as isize - t, n)];
        }
        *slot = acc;
    }
    out
}

/// The spectrum in dB after Gaussian smoothing, as seen by the peak picker.
pub fn smooth_db_spectrum(s: &PowerSpectrum, config: &PeakPickConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let sigma_bins = config.smoothing_width_hz / 2.0 / s.hz_per_bin();
    let (smooth, _) = gaussian_kernels(sigma_bins);
    Ok(convolve_reflect(&spectrum_domain(s, config), &smooth))
}

/// Picks local maxima of the smoothed spectrum.
///
/// The spectrum (in dB unless `linear_domain` is set) is convolved with a
/// Gaussian-derivative kernel; each positive-to-negative zero crossing of
/// the result is a peak, located by linear interpolation between the two
/// straddling bins. Peaks within `edge_margin_hz` of DC or Nyquist are
/// dropped.
pub fn pick_peaks(s: &PowerSpectrum, config: &PeakPickConfig) -> Result<PeakList> {
    config.validate()?;
    let sigma_bins = config.smoothing_width_hz / 2.0 / s.hz_per_bin();
    let (_, derivative) = gaussian_kernels(sigma_bins);
    let slope = convolve_reflect(&spectrum_domain(s, config), &derivative);

    let nyquist = s.sample_rate as f64 / 2.0;
    let mut frequencies = Vec::new();
    for k in 0..slope.len() - 1 {
        if slope[k] > 0.0 && slope[k + 1] <= 0.0 {
            let frac = slope[k] / (slope[k] - slope[k + 1]);
            let f = (k as f64 + frac) * s.hz_per_bin();
            if f > config.edge_margin_hz && f < nyquist - config.edge_margin_hz {
                frequencies.push(f);
            }
        }
    }
    PeakList::new(frequencies, s.sample_rate)
}

/// Linear-prediction variant used by the frame pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpMethod {
    /// Covariance-method LP on the forward error.
    LpCov,
    /// Forward-backward LP with optional quasi-closed-phase weighting.
    QcpFb,
}

/// Runs one pre-emphasized 8 kHz frame through the chosen LP solver, the
/// spectrum evaluator and the peak picker.
///
/// `weights` applies only to [`LpMethod::QcpFb`]; `None` falls back to unit
/// weighting. A degenerate frame (for example silence) yields an empty list.
pub fn formants_from_frame(
    frame: &[f64],
    method: LpMethod,
    order: usize,
    weights: Option<&WeightFunction>,
    config: &PeakPickConfig,
) -> Result<PeakList> {
    let model = match method {
        LpMethod::LpCov => lp_cov(frame, order)?,
        LpMethod::QcpFb => qcp_fb(frame, order, weights)?,
    };
    if model.degenerate {
        return Ok(PeakList::empty());
    }
    let spectrum = allpole_power_spectrum(&model, DEFAULT_GRID_SIZE, ANALYSIS_SAMPLE_RATE)?;
    pick_peaks(&spectrum, config)
}

// ---------------------------------------------------------------------------
