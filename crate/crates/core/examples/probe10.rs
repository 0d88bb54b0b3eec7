// temporary probe: utterance 19 at 5 dB, per-frame F1 errors and peak lists
use formant_core::corpus::{make_synthetic_corpus, mix_noise, NoiseKind, NoiseSpec};
use formant_core::refine::{peak_track, refine_track, AnalysisConfig, TrackFrame};
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
    let u: usize = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(19);
    let utt = &corpus[u];
    let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
    let noisy = mix_noise(&utt.audio, &spec, None).unwrap();
    let predicted = perturb(&utt.truth, 7000u64 ^ u as u64);
    for method in [LpMethod::LpCov, LpMethod::QcpFb] {
        let config = AnalysisConfig { method, ..AnalysisConfig::default() };
        let peaks = peak_track(&noisy, &config, None).unwrap();
        let (refined, _) = refine_track(&predicted, &noisy, &config, None).unwrap();
        let mut errs: Vec<(f64, usize)> = utt.truth.frames().iter().zip(refined.frames()).enumerate()
            .filter(|(_, (r, h))| r.valid && h.valid)
            .map(|(k, (r, h))| ((r.formants_hz[0] - h.formants_hz[0]).abs(), k)).collect();
        errs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let gross = errs.iter().filter(|e| e.0 > 200.0).count();
        println!("== {method:?} u{u} 5dB: F1 gross(>200Hz) {gross}/{} top frames:", errs.len());
        for &(e, k) in errs.iter().take(4) {
            let t = &utt.truth.frames()[k];
            let p = &predicted.frames()[k];
            println!("  frame {k:3} err {e:6.0}: truth F1 {:4.0} pred F1 {:4.0} peaks {:?}",
                t.formants_hz[0], p.formants_hz[0],
                peaks.peaks()[k].frequencies().iter().map(|v| v.round() as i64).collect::<Vec<_>>());
        }
    }
    println!("utterance truth F1 range: {:?}",
        utt.truth.frames().iter().map(|f| f.formants_hz[0].round() as i64)
            .fold((i64::MAX, i64::MIN), |acc, v| (acc.0.min(v), acc.1.max(v))));
}
