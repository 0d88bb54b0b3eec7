// temporary probe: noisy-vs-clean ZFF period estimates and crossing accuracy
use formant_core::corpus::{make_synthetic_corpus, mix_noise, NoiseKind, NoiseSpec};
use formant_core::qcp::detect_gci;

fn main() {
    let corpus = make_synthetic_corpus(20, 0xC0FFEE).unwrap();
    for u in 0..20usize {
        let utt = &corpus[u];
        let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
        let noisy = mix_noise(&utt.audio, &spec, None).unwrap();
        let clean_gci = detect_gci(&utt.audio);
        let noisy_gci = detect_gci(&noisy);
        let cg = clean_gci.samples();
        let med_gap = |v: &[usize]| -> usize {
            let mut gaps: Vec<usize> = v.windows(2).map(|w| w[1] - w[0]).collect();
            if gaps.is_empty() { return 0; }
            gaps.sort_unstable();
            gaps[gaps.len() / 2]
        };
        let within = noisy_gci.samples().iter().filter(|&&d| {
            cg.iter().any(|&p| (d as i64 - p as i64).abs() <= 8)
        }).count();
        println!("utt {u:2}: clean n={:3} T={:3} | noisy n={:3} T={:3} within1ms {:3} ({:4.0}%)",
            cg.len(), med_gap(cg), noisy_gci.len(), med_gap(noisy_gci.samples()),
            within, 100.0 * within as f64 / noisy_gci.len().max(1) as f64);
    }
}
