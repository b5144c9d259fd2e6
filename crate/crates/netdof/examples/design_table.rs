//! Design guidance for an LTE-like deployment: for each antenna count, the
//! mobility window in which retrospective transmission beats both
//! single-user transmission and zero-forcing.
//!
//! Carrier 2.1 GHz, data symbol slot 1/168 ms (12 subcarriers x 14 OFDM
//! symbols per ms), feedback delay one 10 ms frame = 1680 symbols. The
//! block length maps to a user velocity through v = c / (f_c N T_s).
//!
//! Run: cargo run --release --example design_table

use netdof::exact::to_f64;
use netdof::planner::design_table;

fn main() {
    let fc_hz = 2.1e9;
    let ts_s = (1.0 / 168.0) * 1e-3;
    let n_fd = 1680usize;
    let rows = design_table(fc_hz, ts_s, n_fd, &[2, 4, 8, 16]).unwrap();

    println!(
        "f_c = {:.1} GHz, T_s = 1/168 ms, N_fd = {n_fd} symbols\n",
        fc_hz / 1e9
    );
    println!(
        "{:>4} | {:>20} | {:>22} | {:>22}",
        "K", "coherence N (symbols)", "coherence time (ms)", "velocity (km/h)"
    );
    for row in rows {
        println!(
            "{:>4} | {:>8.1} .. {:>8.1} | {:>9.3} .. {:>9.2} | {:>9.1} .. {:>9.0}",
            row.k,
            to_f64(&row.n_range.0),
            to_f64(&row.n_range.1),
            row.coherence_ms.0,
            row.coherence_ms.1,
            row.velocity_kmh.0,
            row.velocity_kmh.1,
        );
    }
    println!(
        "\nbelow the lower velocity, predictions are good enough that \
         zero-forcing wins; above the upper velocity even stale CSI \
         costs more than it returns and one falls back to a single stream"
    );
}
