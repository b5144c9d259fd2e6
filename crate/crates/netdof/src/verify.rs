//! Executable checks for the linear-algebra facts the rate and DoF
//! derivations lean on. Each check samples its own inputs from a derived
//! stream, measures the worst violation over all trials, and reports a
//! pass/fail count; the suite runs from the `verify` CLI subcommand so the
//! checks can be replayed with any seed or trial count.

use crate::channel::derive_stream;
use crate::mat::{assemble_system_2user, sample_round_2user, synth_system_general, zf_combiner};
use crate::numerics::{logdet_ipaa, row_subspace_distance, svd, ComplexMatrix, C64};
use crate::quantizer::{build_random_codebook, quantize, random_direction, FeedbackBits};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Outcome of one check: `failures == 0` means it passed.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub trials: usize,
    pub failures: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    fn from_violations(name: &str, violations: Vec<f64>, tolerance: f64) -> Self {
        let failures = violations.iter().filter(|&&v| v > tolerance).count();
        let worst = violations.iter().cloned().fold(0.0f64, f64::max);
        Self {
            check_name: name.to_string(),
            trials: violations.len(),
            failures,
            worst_violation: worst,
            tolerance,
        }
    }
}

/// A 2x2 matrix whose rows are unit vectors at angle theta has singular
/// values sqrt(2) cos(theta/2) and sqrt(2) sin(theta/2); the second one is
/// exactly the interference leakage of the two-user scheme.
pub fn check_sigma2_closed_form(trials: usize, master_seed: u64) -> CheckReport {
    let violations: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive_stream(master_seed, "sigma2", trial as u64);
            let theta = rng.gen::<f64>() * std::f64::consts::FRAC_PI_2;
            let h = random_direction(2, &mut rng);
            // error direction orthogonal to h
            let g = random_direction(2, &mut rng);
            let dot = crate::numerics::vec_dot(&h, &g);
            let mut d: Vec<C64> = g.iter().zip(&h).map(|(gi, hi)| gi - dot * hi).collect();
            let norm = crate::numerics::vec_norm(&d);
            for z in d.iter_mut() {
                *z /= norm;
            }
            let e: Vec<C64> = h
                .iter()
                .zip(&d)
                .map(|(hi, di)| hi * theta.cos() + di * theta.sin())
                .collect();
            let m = ComplexMatrix::from_rows(&[
                vec![h[0].conj(), h[1].conj()],
                vec![e[0].conj(), e[1].conj()],
            ])
            .expect("finite rows");
            let s = svd(&m).expect("2x2 svd");
            let expect2 = std::f64::consts::SQRT_2 * (theta / 2.0).sin();
            let expect1 = std::f64::consts::SQRT_2 * (theta / 2.0).cos();
            (s.singular_values[1] - expect2)
                .abs()
                .max((s.singular_values[0] - expect1).abs())
        })
        .collect();
    CheckReport::from_violations("sigma2_closed_form", violations, 1e-10)
}

/// Weyl's perturbation bound |sigma_i(A+E) - sigma_i(A)| <= |E|_F on random
/// dense pairs and on structured three-user interference matrices.
pub fn check_weyl(trials: usize, shapes: &[(usize, usize)], master_seed: u64) -> CheckReport {
    let dense: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive_stream(master_seed, "weyl-dense", trial as u64);
            let (rows, cols) = shapes[trial % shapes.len()];
            let a = crate::channel::sample_matrix(rows, cols, &mut rng);
            let scale = 10f64.powf(rng.gen::<f64>() * 4.0 - 3.0);
            let e = ComplexMatrix::from_fn(rows, cols, |_, _| {
                crate::channel::complex_gaussian(&mut rng) * scale
            });
            let perturbed = ComplexMatrix::from_fn(rows, cols, |i, j| a.get(i, j) + e.get(i, j));
            let sa = svd(&a).expect("svd").singular_values;
            let sp = svd(&perturbed).expect("svd").singular_values;
            let bound = e.frobenius_norm();
            sa.iter()
                .zip(&sp)
                .map(|(x, y)| (x - y).abs() - bound)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let structured: Vec<f64> = (0..trials / 4)
        .into_par_iter()
        .map(|trial| {
            let mut rng_clean = derive_stream(master_seed, "weyl-struct", trial as u64);
            let mut rng_noisy = derive_stream(master_seed, "weyl-struct", trial as u64);
            let mut rng_angles = derive_stream(master_seed, "weyl-angles", trial as u64);
            let sin2: Vec<f64> = (0..5).map(|_| rng_angles.gen::<f64>() * 0.05).collect();
            let clean = synth_system_general(3, &[0.0; 5], &mut rng_clean);
            let noisy = synth_system_general(3, &sin2, &mut rng_noisy);
            let e = noisy.interference.sub(&clean.interference);
            let bound = e.frobenius_norm();
            let sc = svd(&clean.interference).expect("svd").singular_values;
            let sn = svd(&noisy.interference).expect("svd").singular_values;
            sc.iter()
                .zip(&sn)
                .map(|(x, y)| (x - y).abs() - bound)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let mut violations = dense;
    violations.extend(structured);
    // the bound is an inequality; any positive excess beyond float noise fails
    CheckReport::from_violations("weyl_perturbation", violations, 1e-11)
}

/// Negative second moment identity on square full-rank matrices:
/// sum_i sigma_i^{-2} = sum_i dist(row_i, span of other rows)^{-2}.
/// Draws with condition number above 1e8 are skipped (and logged), since
/// both sides lose all precision there.
pub fn check_neg_second_moment(trials: usize, n_max: usize, master_seed: u64) -> CheckReport {
    let violations: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive_stream(master_seed, "neg2m", trial as u64);
            loop {
                let n = 2 + (rng.gen::<u64>() as usize) % (n_max - 1);
                let a = crate::channel::sample_matrix(n, n, &mut rng);
                let s = svd(&a).expect("svd").singular_values;
                let smin = *s.last().unwrap();
                if smin <= 0.0 || s[0] / smin > 1e8 {
                    log::debug!("skipping ill-conditioned draw in trial {trial}");
                    continue;
                }
                let lhs: f64 = s.iter().map(|x| x.powi(-2)).sum();
                let rhs: f64 = (0..n).map(|i| row_subspace_distance(&a, i).powi(-2)).sum();
                return (lhs - rhs).abs() / rhs;
            }
        })
        .collect();
    CheckReport::from_violations("negative_second_moment", violations, 1e-8)
}

/// Interference power through the zero-forcing combiner of a simulated
/// two-user round collapses to the closed form 1 + (P/2) sigma_2^2; checked
/// as the log-determinant difference across a power grid.
pub fn check_interference_power(trials: usize, p_grid_db: &[f64], master_seed: u64) -> CheckReport {
    let violations: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive_stream(master_seed, "intpow", trial as u64);
            let p_db = p_grid_db[trial % p_grid_db.len()];
            let p = 10f64.powf(p_db / 10.0);
            loop {
                let round = match sample_round_2user(&FeedbackBits::Fixed(8), p, &mut rng) {
                    Ok(r) => r,
                    Err(_) => continue,
                };
                let sys = match assemble_system_2user(&round) {
                    Ok(s) => s,
                    Err(_) => continue,
                };
                let u = zf_combiner(&sys).expect("combiner");
                let projected = sys.interference.adjoint().mul(&u);
                let lhs = logdet_ipaa(p / 2.0, &projected).expect("logdet");
                let sigma2 = svd(&sys.interference).expect("svd").singular_values[1];
                let rhs = (1.0 + (p / 2.0) * sigma2 * sigma2).log2();
                // |log2 lhs - log2 rhs| * ln 2 ~ relative determinant error
                return (lhs - rhs).abs() * std::f64::consts::LN_2 / rhs.abs().max(1.0);
            }
        })
        .collect();
    CheckReport::from_violations("interference_power_closed_form", violations, 1e-9)
}

/// Random-codebook quantization error against the optimal-codebook
/// envelope: the empirical mean of sin^2 theta must sit below the upper
/// bound 2^{-Q/(M-1)} (with Monte Carlo slack), and its log2 slope in Q
/// must match the exponent -1/(M-1) within 15 percent.
pub fn check_quantization_bounds(
    m_list: &[usize],
    q_list: &[u32],
    trials: usize,
    master_seed: u64,
) -> CheckReport {
    let mut violations = Vec::new();
    for &m in m_list {
        let mut mean_log2 = Vec::new();
        for &q in q_list {
            // keep the work bounded: large codebooks use fewer channels
            let per_q_trials = (trials / (1 << (q / 3)).max(1)).max(800);
            let means: Vec<f64> = (0..per_q_trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = derive_stream(master_seed, &format!("rvq-{m}-{q}"), trial as u64);
                    let cb = build_random_codebook(m, q, &mut rng).expect("codebook");
                    let h = random_direction(m, &mut rng);
                    quantize(&h, &cb).sin2_theta
                })
                .collect();
            let mean = means.iter().sum::<f64>() / means.len() as f64;
            let (_, upper) = crate::quantizer::optimal_error_bounds(m, q).expect("bounds");
            let slack = 1.0 + 3.0 / (per_q_trials as f64).sqrt();
            // positive when the empirical mean escapes the envelope
            violations.push(mean / (upper * slack) - 1.0);
            mean_log2.push((q as f64, mean.log2()));
        }
        // least-squares slope of log2 E[sin^2] against Q
        let n = mean_log2.len() as f64;
        let sx: f64 = mean_log2.iter().map(|p| p.0).sum();
        let sy: f64 = mean_log2.iter().map(|p| p.1).sum();
        let sxx: f64 = mean_log2.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = mean_log2.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let expect = -1.0 / (m - 1) as f64;
        violations.push((slope - expect).abs() / expect.abs() - 0.15);
    }
    CheckReport::from_violations("quantization_error_bounds", violations, 0.0)
}

/// Check names accepted by `run_checks`.
pub const CHECK_NAMES: [&str; 5] = [
    "sigma2",
    "weyl",
    "neg-second-moment",
    "interference-power",
    "quantization-bounds",
];

/// Runs the named checks (or all of them) at the default sizes. Unknown
/// names are reported as an error by the caller; see `CHECK_NAMES`.
pub fn run_checks(names: &[String], trials: usize, master_seed: u64) -> Vec<CheckReport> {
    let all = names.is_empty();
    let want = |name: &str| all || names.iter().any(|n| n == name);
    let mut reports = Vec::new();
    if want("sigma2") {
        reports.push(check_sigma2_closed_form(trials, master_seed));
    }
    if want("weyl") {
        reports.push(check_weyl(
            trials,
            &[(3, 2), (4, 4), (6, 3), (5, 8), (11, 12)],
            master_seed,
        ));
    }
    if want("neg-second-moment") {
        reports.push(check_neg_second_moment(trials.min(2000), 12, master_seed));
    }
    if want("interference-power") {
        reports.push(check_interference_power(
            trials,
            &[30.0, 60.0, 90.0, 120.0],
            master_seed,
        ));
    }
    if want("quantization-bounds") {
        reports.push(check_quantization_bounds(
            &[2, 4],
            &[4, 6, 8, 10, 12, 14],
            trials,
            master_seed,
        ));
    }
    reports
}
