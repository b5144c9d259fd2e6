//! Which scheme to run at which coherence time: exact regime boundaries
//! over a range of user counts and feedback delays.
//!
//! Run: cargo run --release --example regime_planner

use netdof::exact::{format_ratio, to_f64};
use netdof::planner::{regime_boundaries, winner};

fn main() {
    println!("exact boundaries (N in symbols):");
    println!("{:>4} {:>7} {:>16} {:>16}", "K", "N_fd", "n_low", "n_high");
    for k in [2usize, 3, 4, 8, 16] {
        for n_fd in [100usize, 1680] {
            let r = regime_boundaries(k, n_fd).unwrap();
            println!(
                "{k:>4} {n_fd:>7} {:>16} {:>16}",
                format!("{} ({:.2})", format_ratio(&r.n_low), to_f64(&r.n_low)),
                format!("{} ({:.1})", format_ratio(&r.n_high), to_f64(&r.n_high)),
            );
        }
    }

    // winner transitions around the K = 4, N_fd = 100 boundaries
    let (k, n_fd) = (4usize, 100usize);
    let r = regime_boundaries(k, n_fd).unwrap();
    println!(
        "\nK = {k}, N_fd = {n_fd}: n_low = {:.3}, n_high = {:.3}",
        to_f64(&r.n_low),
        to_f64(&r.n_high)
    );
    let lo = to_f64(&r.n_low) as usize;
    let hi = to_f64(&r.n_high) as usize;
    for n in [1, lo, lo + 1, 50, hi, hi + 1, 2 * hi] {
        println!("  N = {n:>5}: run {}", winner(k, n.max(1), n_fd));
    }
}
