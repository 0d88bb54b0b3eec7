// temporary probe: criterion-5 internals, clean/noisy refined FEE per method,
// plus noisy GCI offset quality on one utterance
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
    for method in [LpMethod::LpCov, LpMethod::QcpFb] {
        let config = AnalysisConfig { method, ..AnalysisConfig::default() };
        for noisy in [false, true] {
            let mut sums = [0.0f64; 3];
            let mut n = 0usize;
            let mut per_utt = Vec::new();
            for (u, utt) in corpus.iter().enumerate() {
                let audio = if noisy {
                    let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
                    mix_noise(&utt.audio, &spec, None).unwrap()
                } else { utt.audio.clone() };
                let predicted = perturb(&utt.truth, 7000u64 ^ u as u64);
                let (refined, _) = refine_track(&predicted, &audio, &config, None).unwrap();
                let mut s1 = 0.0; let mut nu = 0usize;
                for (r, h) in utt.truth.frames().iter().zip(refined.frames()) {
                    if !r.valid || !h.valid { continue; }
                    n += 1; nu += 1;
                    for i in 0..3 { sums[i] += (r.formants_hz[i] - h.formants_hz[i]).abs(); }
                    s1 += (r.formants_hz[0] - h.formants_hz[0]).abs();
                }
                per_utt.push(s1 / nu as f64);
            }
            let tag = if noisy { "5dB " } else { "clean" };
            let mut worst: Vec<(f64, usize)> = per_utt.iter().cloned().zip(0..).map(|(v, u)| (v, u)).collect();
            worst.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            println!("{method:?} {tag}: refined FEE {:6.2} {:6.2} {:6.2}  worst F1 utts: {:?}",
                sums[0]/n as f64, sums[1]/n as f64, sums[2]/n as f64,
                worst.iter().take(4).map(|&(v, u)| format!("u{u}={v:.0}")).collect::<Vec<_>>());
        }
    }
    // GCI health on noisy utterance 0 and 13
    for u in [0usize, 13] {
        let utt = &corpus[u];
        let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
        let noisy = mix_noise(&utt.audio, &spec, None).unwrap();
        let clean_gci = detect_gci(&utt.audio);
        let noisy_gci = detect_gci(&noisy);
        let mut offs: Vec<i64> = noisy_gci.samples().iter().map(|&d| {
            clean_gci.samples().iter().map(|&p| d as i64 - p as i64).min_by_key(|o| o.abs()).unwrap()
        }).collect();
        offs.sort_unstable();
        let within = offs.iter().filter(|o| o.abs() <= 8).count();
        println!("utt {u}: clean GCIs {} noisy {} within1ms {} median {}",
            clean_gci.len(), noisy_gci.len(), within, offs.get(offs.len()/2).unwrap_or(&0));
    }
}
