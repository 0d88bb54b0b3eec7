// temporary probe: one frame of one utterance, periodogram vs LP spectra
use formant_core::corpus::{make_synthetic_corpus, mix_noise, NoiseKind, NoiseSpec};
use formant_core::lp::lp_cov;
use formant_core::qcp::{build_qcp_weights, detect_gci, qcp_fb};
use formant_core::refine::AnalysisConfig;
use formant_core::signal::preemphasize;
use formant_core::spectrum::{allpole_power_spectrum, pick_peaks, LpMethod};

fn main() {
    let u: usize = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(3);
    let k: usize = std::env::args().nth(2).and_then(|v| v.parse().ok()).unwrap_or(20);
    let corpus = make_synthetic_corpus(20, 0xC0FFEE).unwrap();
    let utt = &corpus[u];
    let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
    let noisy = mix_noise(&utt.audio, &spec, None).unwrap();
    let fs = noisy.sample_rate() as f64;
    let config = AnalysisConfig::default();
    let pre = preemphasize(&noisy, config.preemphasis).unwrap();
    let start = k * 80;
    let frame = &pre.samples()[start..start + 200];

    // periodogram of the pre-emphasized frame, 16 coarse bands (max per band)
    let mut band = [f64::MIN; 16];
    for b in 0..64 {
        let f = (b as f64 + 0.5) * (fs / 2.0) / 64.0;
        let w = 2.0 * std::f64::consts::PI * f / fs;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (i, &v) in frame.iter().enumerate() {
            re += v * (w * i as f64).cos();
            im += v * (w * i as f64).sin();
        }
        let p = 10.0 * ((re * re + im * im) / frame.len() as f64).log10();
        let idx = b * 16 / 64;
        if p > band[idx] {
            band[idx] = p;
        }
    }
    let top = band.iter().cloned().fold(f64::MIN, f64::max);
    println!("u{u} frame {k}: truth F1 {:.0}", utt.truth.frames()[k].formants_hz[0]);
    print!("bands (250 Hz):");
    for p in band {
        print!(" {:5.1}", p - top);
    }
    println!("  <- periodogram");

    let gcis = if std::env::var("ORACLE").is_ok() { detect_gci(&utt.audio) } else { detect_gci(&noisy) };
    for method in [LpMethod::LpCov, LpMethod::QcpFb] {
        let model = match method {
            LpMethod::LpCov => lp_cov(frame, config.order).unwrap(),
            LpMethod::QcpFb => {
                let w = build_qcp_weights(start, frame.len(), &gcis, &config.qcp, 8000).unwrap();
                qcp_fb(frame, config.order, Some(&w)).unwrap()
            }
        };
        let ps = allpole_power_spectrum(&model, config.grid_size, 8000).unwrap();
        let vals = ps.values();
        let m = vals.len();
        let mut lp_band = [f64::MIN; 16];
        for (i, &v) in vals.iter().enumerate() {
            let f = i as f64 * (fs / 2.0) / (m - 1) as f64;
            let idx = ((f / 250.0) as usize).min(15);
            let db = 10.0 * v.log10();
            if db > lp_band[idx] {
                lp_band[idx] = db;
            }
        }
        let top = lp_band.iter().cloned().fold(f64::MIN, f64::max);
        print!("bands (250 Hz):");
        for p in lp_band {
            print!(" {:5.1}", p - top);
        }
        println!("  <- {method:?}");
        let peaks = pick_peaks(&ps, &config.pick).unwrap();
        println!(
            "  {method:?} peaks: {:?}",
            peaks.frequencies().iter().map(|v| v.round() as i64).collect::<Vec<_>>()
        );
    }
}
