//! Net degrees of freedom of the three schemes against the coherence block
//! length, for two and three users at a feedback delay of 100 symbols.
//!
//! Reproduces the crossover picture: single-user transmission wins for very
//! short blocks, retrospective transmission in a wide middle window, and
//! zero-forcing once blocks get long relative to the feedback delay.
//!
//! Run: cargo run --release --example net_dof_sweep

use netdof::exact::{format_ratio, to_f64};
use netdof::planner::{compare_schemes, regime_boundaries};

fn main() {
    let n_fd = 100usize;
    for k in [2usize, 3] {
        let bounds = regime_boundaries(k, n_fd).unwrap();
        println!(
            "K = {k}, N_fd = {n_fd}: boundaries n_low = {} ({:.3}), n_high = {} ({:.3})",
            format_ratio(&bounds.n_low),
            to_f64(&bounds.n_low),
            format_ratio(&bounds.n_high),
            to_f64(&bounds.n_high),
        );
        println!(
            "{:>6} {:>12} {:>12} {:>12}  winner",
            "N", "MAT", "ZF", "SISO"
        );
        for n in [
            1usize, 2, 3, 5, 10, 30, 100, 200, 222, 223, 302, 303, 400, 1000,
        ] {
            let cmp = compare_schemes(k, n, n_fd);
            let tie = if cmp.tied_with.is_empty() {
                String::new()
            } else {
                format!(
                    " (tie with {})",
                    cmp.tied_with
                        .iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>()
                        .join(", ")
                )
            };
            println!(
                "{n:>6} {:>12.6} {:>12.6} {:>12.6}  {}{tie}",
                to_f64(&cmp.mat),
                to_f64(&cmp.zf),
                to_f64(&cmp.siso),
                cmp.winner,
            );
        }
        // the integer window where retrospective transmission is not beaten
        let lo = to_f64(&bounds.n_low).ceil() as usize;
        let hi = to_f64(&bounds.n_high).floor() as usize;
        println!("retrospective transmission is unbeaten on N in [{lo}, {hi}]\n");
    }
}
