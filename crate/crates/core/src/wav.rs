//! WAV input and output. The on-disk contract is 16-bit PCM mono; integer
//! samples map to [-1, 1) through division by 32768.

use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::{signal_from_raw, SignalBuffer};

const SCALE: f64 = 32768.0;

pub fn read_wav(path: impl AsRef<Path>) -> Result<SignalBuffer> {
    let path = path.as_ref();
    let mut reader = hound::WavReader::open(path)
        .map_err(|e| wav_err(path, e))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::WavFormat {
            path: path.to_path_buf(),
            why: format!("expected mono, got {} channels", spec.channels),
        });
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::WavFormat {
            path: path.to_path_buf(),
            why: format!(
                "expected 16-bit integer PCM, got {}-bit {:?}",
                spec.bits_per_sample, spec.sample_format
            ),
        });
    }
    let samples: std::result::Result<Vec<i16>, _> = reader.samples::<i16>().collect();
    let samples = samples.map_err(|e| wav_err(path, e))?;
    let samples: Vec<f64> = samples.into_iter().map(|s| s as f64 / SCALE).collect();
    Ok(signal_from_raw(samples, spec.sample_rate))
}

pub fn write_wav(path: impl AsRef<Path>, signal: &SignalBuffer) -> Result<()> {
    let path = path.as_ref();
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(|e| wav_err(path, e))?;
    for &s in signal.samples() {
        let q = (s * SCALE).round().clamp(-32768.0, 32767.0) as i16;
        writer.write_sample(q).map_err(|e| wav_err(path, e))?;
    }
    writer.finalize().map_err(|e| wav_err(path, e))?;
    Ok(())
}

fn wav_err(path: &Path, e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::WavFormat { path: path.to_path_buf(), why: other.to_string() },
    }
}
