// temporary probe: noisy autocorrelation shape for collapsing utterances
use formant_core::corpus::{make_synthetic_corpus, mix_noise, NoiseKind, NoiseSpec};

fn main() {
    let corpus = make_synthetic_corpus(20, 0xC0FFEE).unwrap();
    for u in [3usize, 6, 8, 16] {
        let utt = &corpus[u];
        let spec = NoiseSpec { kind: NoiseKind::White, snr_db: 5.0, seed: 9000 + u as u64 };
        let noisy = mix_noise(&utt.audio, &spec, None).unwrap();
        let s = noisy.samples();
        let n = s.len();
        let mut d = vec![0.0; n];
        d[0] = -s[0];
        for i in 1..n { d[i] = s[i - 1] - s[i]; }
        let r: Vec<f64> = (36..=89).map(|lag| (lag..n).map(|i| d[i] * d[i - lag]).sum()).collect();
        let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let picked = 36 + r.iter().position(|&v| v >= 0.9 * max).unwrap();
        let mut tops: Vec<(usize, f64)> = r.iter().enumerate().map(|(i, &v)| (36 + i, v / max)).collect();
        tops.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap());
        println!("utt {u:2}: picked {picked}, top lags {:?}",
            tops.iter().take(6).map(|&(l, v)| format!("{l}:{v:.2}")).collect::<Vec<_>>());
    }
}
