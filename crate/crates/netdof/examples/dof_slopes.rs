//! Monte Carlo multiplexing gains of the retrospective scheme against the
//! feedback scaling exponent, for K = 2 (exact round simulation) and K = 3
//! (structural system synthesis), compared with the closed-form prediction
//! min((1 + (K-1) alpha)/K, 1) * K / H_K.
//!
//! Run: cargo run --release --example dof_slopes

use netdof::analysis::{estimate_dof_slope, RateSample};
use netdof::mat::mat_rate_mc;
use netdof::quantizer::FeedbackBits;

const SNR_GRID_DB: [f64; 7] = [60.0, 80.0, 100.0, 120.0, 140.0, 160.0, 180.0];

fn slope_at(k: usize, bits: &FeedbackBits, trials: usize, seed: u64) -> f64 {
    let samples: Vec<RateSample> = SNR_GRID_DB
        .iter()
        .enumerate()
        .map(|(i, &db)| {
            mat_rate_mc(k, bits, 10f64.powf(db / 10.0), trials, seed + i as u64).unwrap()
        })
        .collect();
    estimate_dof_slope(&samples, 4).unwrap().slope
}

fn predicted(k: usize, alpha: f64) -> f64 {
    let h: f64 = (1..=k).map(|i| 1.0 / i as f64).sum();
    ((1.0 + (k - 1) as f64 * alpha) / k as f64).min(1.0) * k as f64 / h
}

fn main() {
    let alphas = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5];
    for (k, trials) in [(2usize, 4000usize), (3, 1500)] {
        println!("K = {k} ({trials} trials per SNR point)");
        println!("{:>7} {:>10} {:>10}", "alpha", "fitted", "predicted");
        for (i, &alpha) in alphas.iter().enumerate() {
            let fitted = slope_at(k, &FeedbackBits::Alpha(alpha), trials, 40 + 10 * i as u64);
            println!("{alpha:>7} {fitted:>10.4} {:>10.4}", predicted(k, alpha));
        }
        // bounded feedback: the prelog falls to 1/H_K no matter how many
        // bits, because the error no longer shrinks with power
        let fitted = slope_at(k, &FeedbackBits::Fixed(8), trials, 99);
        println!(
            "{:>7} {fitted:>10.4} {:>10.4}  (fixed Q = 8)\n",
            "0",
            predicted(k, 0.0)
        );
    }
}
