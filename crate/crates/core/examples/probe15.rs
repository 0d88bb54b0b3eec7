// temporary probe: decompose criterion-5 degradation into catastrophe vs inflation
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
    FormantTrack::new(
        truth
            .frames()
            .iter()
            .map(|f| TrackFrame {
                time_s: f.time_s,
                formants_hz: std::array::from_fn(|i| {
                    f.formants_hz[i] + rng.random_range(-150.0..150.0)
                }),
                valid: f.valid,
            })
            .collect(),
    )
    .unwrap()
}

fn main() {
    let n_utt = 20usize;
    let corpus = make_synthetic_corpus(n_utt, 0xC0FFEE).unwrap();
    // per-utterance error sums for each row
    let mut sums = vec![[0.0f64; 5]; n_utt];
    let mut counts = vec![[0usize; 5]; n_utt];
    for (row, (label, method, oracle, noisy)) in [
        ("cov  clean", LpMethod::LpCov, false, false),
        ("cov  5dB  ", LpMethod::LpCov, false, true),
        ("qcp  clean", LpMethod::QcpFb, false, false),
        ("qcp  5dB  ", LpMethod::QcpFb, false, true),
        ("qcpO 5dB  ", LpMethod::QcpFb, true, true),
    ]
    .into_iter()
    .enumerate()
    {
        let mut n_total = 0usize;
        let mut n_gross = 0usize;
        let mut sum_gross = 0.0f64;
        let mut sum_ok = 0.0f64;
        let mut per_utt: Vec<(usize, usize)> = Vec::new();
        for (u, utt) in corpus.iter().enumerate() {
            let audio = if noisy {
                let spec = NoiseSpec {
                    kind: NoiseKind::White,
                    snr_db: 5.0,
                    seed: 9000 + u as u64,
                };
                mix_noise(&utt.audio, &spec, None).unwrap()
            } else {
                utt.audio.clone()
            };
            let predicted = perturb(&utt.truth, 7000u64 ^ u as u64);
            let config = AnalysisConfig {
                method,
                ..AnalysisConfig::default()
            };
            let gcis = if oracle {
                Some(detect_gci(&utt.audio))
            } else {
                None
            };
            let (refined, _) = refine_track(&predicted, &audio, &config, gcis.as_ref()).unwrap();
            let mut utt_gross = 0usize;
            for (r, h) in utt.truth.frames().iter().zip(refined.frames()) {
                if !(r.valid && h.valid) {
                    continue;
                }
                let e = (r.formants_hz[0] - h.formants_hz[0]).abs();
                n_total += 1;
                sums[u][row] += e;
                counts[u][row] += 1;
                if e > 200.0 {
                    n_gross += 1;
                    utt_gross += 1;
                    sum_gross += e;
                } else {
                    sum_ok += e;
                }
            }
            if utt_gross > 0 {
                per_utt.push((u, utt_gross));
            }
        }
        let fee = (sum_gross + sum_ok) / n_total as f64;
        println!(
            "{label}: FEE {fee:6.2}  gross {n_gross:3}/{n_total} ({:4.1}%) contrib {:5.2} Hz  ok-mean {:5.2} Hz",
            100.0 * n_gross as f64 / n_total as f64,
            sum_gross / n_total as f64,
            sum_ok / (n_total - n_gross) as f64
        );
        per_utt.sort_by(|a, b| b.1.cmp(&a.1));
        println!("    gross by utt: {:?}", per_utt);
    }
    // per-utterance net criterion contribution, in pooled-FEE Hz:
    // [(qcp_n - qcp_c) - (cov_n - cov_c)] / total frames
    let total: usize = counts.iter().map(|c| c[0]).sum();
    println!("\nper-utterance net (positive hurts criterion), pooled Hz:");
    let mut nets: Vec<(f64, usize)> = (0..n_utt)
        .map(|u| {
            let net = (sums[u][3] - sums[u][2]) - (sums[u][1] - sums[u][0]);
            (net / total as f64, u)
        })
        .collect();
    nets.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for &(net, u) in &nets {
        println!(
            "  u{u:2}: net {net:6.2}  (cov {:6.1}->{:6.1}, qcp {:6.1}->{:6.1}, frames {})",
            sums[u][0] / counts[u][0] as f64,
            sums[u][1] / counts[u][1] as f64,
            sums[u][2] / counts[u][2] as f64,
            sums[u][3] / counts[u][3] as f64,
            counts[u][0]
        );
    }
    let total_net: f64 = nets.iter().map(|&(v, _)| v).sum();
    println!("  total net: {total_net:.2} (pass needs <= 0)");
}
