// temporary probe: long-term spectral balance of the synthetic utterances
use formant_core::corpus::make_synthetic_corpus;

fn main() {
    let corpus = make_synthetic_corpus(20, 0xC0FFEE).unwrap();
    println!("utt   0-1k   1-2k   2-3k   3-4k   (% of power)");
    for (u, utt) in corpus.iter().enumerate() {
        let s = utt.audio.samples();
        let n = s.len();
        let fs = utt.audio.sample_rate() as f64;
        // coarse periodogram: 128 bins across 0..fs/2 via direct DFT
        let bins = 128usize;
        let mut band = [0.0f64; 4];
        for b in 0..bins {
            let f = (b as f64 + 0.5) * (fs / 2.0) / bins as f64;
            let w = 2.0 * std::f64::consts::PI * f / fs;
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for (i, &v) in s.iter().enumerate() {
                let ph = w * i as f64;
                re += v * ph.cos();
                im += v * ph.sin();
            }
            let p = (re * re + im * im) / n as f64;
            let idx = ((f / 1000.0) as usize).min(3);
            band[idx] += p;
        }
        let total: f64 = band.iter().sum();
        println!(
            "u{u:<3} {:6.1} {:6.1} {:6.1} {:6.1}",
            100.0 * band[0] / total,
            100.0 * band[1] / total,
            100.0 * band[2] / total,
            100.0 * band[3] / total
        );
    }
}
