// temporary probe: frames where detected-GCI QCP is gross but oracle-GCI QCP is not,
// with the local GCI picture inside each such frame
use formant_core::corpus::{make_synthetic_corpus, mix_noise, NoiseKind, NoiseSpec};
use formant_core::qcp::detect_gci;
use formant_core::refine::{refine_track, AnalysisConfig, TrackFrame};
use formant_core::spectrum::LpMethod;
use formant_core::FormantTrack;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn perturb(truth: &FormantTrack, seed: u64) -> FormantTrack {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FormantTrack::new(truth.frames().iter().map(|f| TrackFrame {
        time_s: f.time_s,
        formants_hz: std::array::from_fn(|i| f.formants_hz[i] + rng.random_range(-150.0..150.0)),
        valid: f.valid,
    }).collect()).unwrap()
}

fn main() {
    let corpus = make_synthetic_corpus(20, 0xC0FFEE).unwrap();
    let u: usize = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(3);
    let utt = &corpus[u];
    let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
    let noisy = mix_noise(&utt.audio, &spec, None).unwrap();
    let predicted = perturb(&utt.truth, 7000u64 ^ u as u64);
    let config = AnalysisConfig { method: LpMethod::QcpFb, ..AnalysisConfig::default() };

    let clean_gci = detect_gci(&utt.audio);
    let noisy_gci = detect_gci(&noisy);
    let (det, _) = refine_track(&predicted, &noisy, &config, None).unwrap();
    let (ora, _) = refine_track(&predicted, &noisy, &config, Some(&clean_gci)).unwrap();

    let fs = 8000.0f64;
    if std::env::var("DUMP").is_ok() {
        let cg = clean_gci.samples();
        for &n in noisy_gci.samples() {
            let off = cg.iter().map(|&c| (n as i64 - c as i64) as f64 / fs * 1000.0)
                .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap()).unwrap_or(f64::NAN);
            if off.abs() > 1.0 { println!("noisy gci {n:6} off_ms {off:6.1}"); }
        }
        return;
    }
    for (k, r) in utt.truth.frames().iter().enumerate() {
        let d = &det.frames()[k];
        let o = &ora.frames()[k];
        if !r.valid || !d.valid || !o.valid {
            continue;
        }
        let ed = (d.formants_hz[0] - r.formants_hz[0]).abs();
        let eo = (o.formants_hz[0] - r.formants_hz[0]).abs();
        if ed <= 200.0 {
            continue;
        }
        let start = k * 80;
        let end = start + 200;
        let in_frame = |g: &[usize]| -> Vec<i64> {
            g.iter().filter(|&&s| s >= start && s < end).map(|&s| s as i64).collect()
        };
        let cg = in_frame(clean_gci.samples());
        let ng = in_frame(noisy_gci.samples());
        let offsets: Vec<f64> = ng.iter()
            .map(|&n| cg.iter().map(|&c| (n - c) as f64 / fs * 1000.0)
                .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap()).unwrap_or(f64::NAN))
            .collect();
        println!("frame {k:3} truth {:4.0} det err {ed:5.0} ora err {eo:5.0} | clean gcis {} noisy gcis {} offsets_ms {:?}",
            r.formants_hz[0], cg.len(), ng.len(),
            offsets.iter().map(|v| (v * 10.0).round() / 10.0).collect::<Vec<_>>());
    }
}
// dump mode lives in main above via env var
