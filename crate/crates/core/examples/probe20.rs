// temporary probe: qcp 5dB FEE(F1) only, for fast detector tuning
use formant_core::corpus::{make_synthetic_corpus, mix_noise, NoiseKind, NoiseSpec};
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
    let mut sum = 0.0f64;
    let mut n = 0usize;
    let mut gross = 0usize;
    for (u, utt) in corpus.iter().enumerate() {
        let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
        let noisy = mix_noise(&utt.audio, &spec, None).unwrap();
        let predicted = perturb(&utt.truth, 7000u64 ^ u as u64);
        let config = AnalysisConfig { method: LpMethod::QcpFb, ..AnalysisConfig::default() };
        let (refined, _) = refine_track(&predicted, &noisy, &config, None).unwrap();
        for (r, h) in utt.truth.frames().iter().zip(refined.frames()) {
            if !(r.valid && h.valid) { continue; }
            let e = (r.formants_hz[0] - h.formants_hz[0]).abs();
            sum += e;
            n += 1;
            if e > 200.0 { gross += 1; }
        }
    }
    println!("qcp 5dB FEE {:.2} gross {}", sum / n as f64, gross);
}
