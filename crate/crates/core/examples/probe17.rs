// temporary probe: parameters and coarse spectrum of one utterance
use formant_core::corpus::make_synthetic_corpus;

fn main() {
    let u: usize = std::env::args()
        .nth(1)
        .and_then(|v| v.parse().ok())
        .unwrap_or(4);
    let corpus = make_synthetic_corpus(20, 0xC0FFEE).unwrap();
    let utt = &corpus[u];
    let fr = utt.truth.frames();
    let range = |i: usize| {
        fr.iter()
            .filter(|f| f.valid)
            .map(|f| f.formants_hz[i])
            .fold((f64::MAX, f64::MIN), |a, v| (a.0.min(v), a.1.max(v)))
    };
    println!(
        "u{u}: frames {} F1 {:?} F2 {:?} F3 {:?}",
        fr.len(),
        range(0),
        range(1),
        range(2)
    );
    let s = utt.audio.samples();
    let n = s.len();
    let fs = utt.audio.sample_rate() as f64;
    // crude f0: autocorrelation peak in 36..89 lags
    let mut best = (0usize, f64::MIN);
    for lag in 36..=89 {
        let r: f64 = (lag..n).map(|i| s[i] * s[i - lag]).sum();
        if r > best.1 {
            best = (lag, r);
        }
    }
    println!("autocorr best lag {} -> f0 ~ {:.0} Hz", best.0, fs / best.0 as f64);
    // 16-band dB spectrum
    let bins = 64usize;
    let mut band = vec![0.0f64; 16];
    for b in 0..bins {
        let f = (b as f64 + 0.5) * (fs / 2.0) / bins as f64;
        let w = 2.0 * std::f64::consts::PI * f / fs;
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (i, &v) in s.iter().enumerate() {
            let ph = w * i as f64;
            re += v * ph.cos();
            im += v * ph.sin();
        }
        band[b * 16 / bins] += (re * re + im * im) / n as f64;
    }
    let peak = band.iter().cloned().fold(f64::MIN, f64::max);
    for (k, &p) in band.iter().enumerate() {
        let lo = k as f64 * fs / 2.0 / 16.0;
        println!("{:4.0}-{:4.0} Hz: {:6.1} dB", lo, lo + fs / 32.0, 10.0 * (p / peak).log10());
    }
}
