//! Linear-prediction formant estimation and track refinement.
//!
//! The crate implements a frame-based analysis pipeline for 8 kHz speech:
//!
//! * [`signal`]: buffers, pre-emphasis, rectangular framing and a small
//!   vowel synthesizer used for oracle tests.
//! * [`lp`]: covariance-method linear prediction and its forward-backward
//!   variant, with optional per-sample error weighting.
//! * [`qcp`]: quasi-closed-phase weight construction from glottal closure
//!   instants, and a zero-frequency-filtering detector for those instants.
//! * [`spectrum`]: all-pole power spectra and peak picking via
//!   Gaussian-derivative smoothing.
//! * [`refine`]: formant tracks, the raw estimation pipeline, and
//!   nearest-peak refinement of externally predicted tracks.
//! * [`eval`]: detection-rate and estimation-error metrics with optional
//!   phonetic-category breakdowns.
//! * [`corpus`]: additive noise at a target SNR and a synthetic corpus with
//!   exact ground truth.
//!
//! ```
//! use formant_core::refine::{estimate_track, AnalysisConfig};
//! use formant_core::signal::{synthesize_vowel, SynthSpec};
//!
//! let spec = SynthSpec {
//!     f0_hz: 120.0,
//!     formants_hz: vec![700.0, 1220.0, 2600.0],
//!     bandwidths_hz: vec![60.0, 100.0, 120.0],
//!     duration_s: 0.3,
//!     sample_rate: 8000,
//! };
//! let audio = synthesize_vowel(&spec, 1).unwrap();
//! let track = estimate_track(&audio, &AnalysisConfig::default(), None).unwrap();
//! let frame = track.frames().iter().find(|f| f.valid).unwrap();
//! assert!((frame.formants_hz[0] - 700.0).abs() < 100.0);
//! ```

pub mod corpus;
pub mod error;
pub mod eval;
pub mod lp;
pub mod qcp;
pub mod refine;
pub mod signal;
pub mod spectrum;
pub mod wav;

pub use error::{Error, Result};
pub use refine::{AnalysisConfig, FormantTrack, TrackFrame};
pub use signal::SignalBuffer;
pub use spectrum::LpMethod;
