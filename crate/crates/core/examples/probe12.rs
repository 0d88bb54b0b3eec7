// temporary probe: pole structure of no-low-peak noisy frames
use formant_core::corpus::{make_synthetic_corpus, mix_noise, NoiseKind, NoiseSpec};
use formant_core::lp::lp_cov;
use formant_core::qcp::{build_qcp_weights, detect_gci, qcp_fb, QcpParams};
use formant_core::refine::AnalysisConfig;
use formant_core::signal::{frame_signal, preemphasize, FrameSpec};
use formant_core::spectrum::{allpole_power_spectrum, pick_peaks, PeakPickConfig, DEFAULT_GRID_SIZE};

fn pole_report(coeffs: &[f64]) -> Vec<(f64, f64)> {
    // companion-matrix eigenvalues via nalgebra is overkill here; use the
    // spectrum instead: report local maxima of 1/|A| on a dense grid with
    // their sharpness. Cheap and tells us peak-vs-shoulder directly.
    let _ = coeffs;
    Vec::new()
}

fn main() {
    let corpus = make_synthetic_corpus(20, 0xC0FFEE).unwrap();
    let u = 19usize;
    let utt = &corpus[u];
    let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
    let noisy = mix_noise(&utt.audio, &spec, None).unwrap();
    let config = AnalysisConfig::default();
    let pre = preemphasize(&noisy, config.preemphasis).unwrap();
    let spans = frame_signal(&pre, &FrameSpec::default()).unwrap();
    let gcis = detect_gci(&utt.audio); // clean GCIs to isolate the fit itself
    let k = 84usize; // known no-low-peak frame from earlier probe
    let span = &spans[k];
    let frame = &pre.samples()[span.range()];
    let truth = &utt.truth.frames()[k];

    let cov_model = lp_cov(frame, 13).unwrap();
    let weights = build_qcp_weights(span.start, span.len, &gcis, &QcpParams::default(), 8000).unwrap();
    let qcp_model = qcp_fb(frame, 13, Some(&weights)).unwrap();
    let _ = pole_report(&cov_model.coefficients);

    for (name, model) in [("cov", &cov_model), ("qcp", &qcp_model)] {
        let ps = allpole_power_spectrum(model, DEFAULT_GRID_SIZE, 8000).unwrap();
        let peaks = pick_peaks(&ps, &PeakPickConfig::default()).unwrap();
        // raw dB curve coarse dump every 100 Hz up to 1.4 kHz
        let hz_per_bin = 4000.0 / (DEFAULT_GRID_SIZE - 1) as f64;
        let mut curve = String::new();
        for hz in (0..=1400).step_by(100) {
            let bin = (hz as f64 / hz_per_bin).round() as usize;
            curve.push_str(&format!("{:5.1} ", 10.0 * ps.values()[bin].log10()));
        }
        println!("{name}: truth F1 {:.0}, peaks {:?}", truth.formants_hz[0],
            peaks.frequencies().iter().map(|v| v.round() as i64).collect::<Vec<_>>());
        println!("  dB 0..1.4k: {curve}");
    }
}
