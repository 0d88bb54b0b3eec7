// temporary probe: QCP noisy refined FEE with GCIs detected on clean audio
// (upper bound on what noise-robust detection could recover)
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
    let config = AnalysisConfig { method: LpMethod::QcpFb, ..AnalysisConfig::default() };
    let mut sums = [0.0f64; 3];
    let mut n = 0usize;
    for (u, utt) in corpus.iter().enumerate() {
        let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
        let noisy = mix_noise(&utt.audio, &spec, None).unwrap();
        let oracle_gcis = detect_gci(&utt.audio);
        let predicted = perturb(&utt.truth, 7000u64 ^ u as u64);
        let (refined, _) = refine_track(&predicted, &noisy, &config, Some(&oracle_gcis)).unwrap();
        for (r, h) in utt.truth.frames().iter().zip(refined.frames()) {
            if !r.valid || !h.valid { continue; }
            n += 1;
            for i in 0..3 { sums[i] += (r.formants_hz[i] - h.formants_hz[i]).abs(); }
        }
    }
    println!("QcpFb 5dB clean-audio GCIs: refined FEE {:6.2} {:6.2} {:6.2}",
        sums[0]/n as f64, sums[1]/n as f64, sums[2]/n as f64);
}
