// temporary probe: noisy frames lacking any sub-1kHz peak, per method,
// and with oracle GCIs for the weighted method
use formant_core::corpus::{make_synthetic_corpus, mix_noise, NoiseKind, NoiseSpec};
use formant_core::qcp::detect_gci;
use formant_core::refine::{peak_track, AnalysisConfig};
use formant_core::spectrum::LpMethod;

fn main() {
    let corpus = make_synthetic_corpus(20, 0xC0FFEE).unwrap();
    let mut counts = [0usize; 3];
    let mut total = 0usize;
    for (u, utt) in corpus.iter().enumerate() {
        let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
        let noisy = mix_noise(&utt.audio, &spec, None).unwrap();
        let cov = AnalysisConfig { method: LpMethod::LpCov, ..AnalysisConfig::default() };
        let qcp = AnalysisConfig { method: LpMethod::QcpFb, ..AnalysisConfig::default() };
        let oracle = detect_gci(&utt.audio);
        let runs = [
            peak_track(&noisy, &cov, None).unwrap(),
            peak_track(&noisy, &qcp, None).unwrap(),
            peak_track(&noisy, &qcp, Some(&oracle)).unwrap(),
        ];
        total += runs[0].len();
        for (slot, run) in counts.iter_mut().zip(&runs) {
            *slot += run.peaks().iter()
                .filter(|list| !list.frequencies().iter().any(|&f| f < 1000.0))
                .count();
        }
    }
    println!("frames with no sub-1kHz peak at 5 dB (of {total}):");
    println!("  LpCov            {}", counts[0]);
    println!("  QcpFb detected   {}", counts[1]);
    println!("  QcpFb oracle-GCI {}", counts[2]);
}
