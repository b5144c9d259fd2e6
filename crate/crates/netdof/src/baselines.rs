//! Zero-forcing precoding with delayed quantized CSIT, and the single-user
//! baseline.
//!
//! ZF is the "predict" side of the comparison: each receiver quantizes its
//! current channel direction at the start of a block, the transmitter
//! receives it N_fd symbols later and beamforms against the quantized
//! directions for the remaining N - N_fd symbols of the block. During the
//! first N_fd symbols it has no current-block CSI and serves nobody, which
//! is exactly the (1 - N_fd/N) prelog factor of the analytic expression.
//! Residual interference from quantization error is treated as noise.
//!
//! Single-user transmission needs no feedback at all and its net DoF is the
//! constant 1.

use crate::analysis::RateSample;
use crate::channel::{derive_stream, sample_matrix};
use crate::exact::from_int;
use crate::numerics::{svd, vec_dot, ComplexMatrix, NumericsError, C64};
use crate::quantizer::{synthesize_quantized_direction, FeedbackBits};
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use thiserror::Error;

/// Quantized direction sets closer to singular than this are rejected.
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BaselinesError {
    #[error("quantized direction set is rank deficient; resample")]
    DegenerateInput,
    #[error("zero-forcing needs N > N_fd >= 0, got N = {n}, N_fd = {n_fd}")]
    NoServiceTime { n: usize, n_fd: usize },
    #[error("coherence length must be positive")]
    ZeroCoherence,
    #[error("alpha must be positive for the net-DoF expression, got {got}")]
    AlphaOutOfRange { got: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Quantizer(#[from] crate::quantizer::QuantizerError),
}

/// Zero-forcing experiment parameters.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ZfConfig {
    pub k: usize,
    /// Coherence length N in symbols.
    pub n: usize,
    /// Feedback delay N_fd in symbols; must leave service time (N > N_fd).
    pub n_fd: usize,
    /// Feedback scaling exponent.
    pub alpha: f64,
}

impl ZfConfig {
    pub fn new(k: usize, n: usize, n_fd: usize, alpha: f64) -> Result<Self, BaselinesError> {
        if n <= n_fd {
            return Err(BaselinesError::NoServiceTime { n, n_fd });
        }
        Ok(Self { k, n, n_fd, alpha })
    }
}

/// Unit-norm beamformers, one per user, each orthogonal to every *other*
/// user's quantized direction: the normalized columns of the inverse
/// adjoint of the direction matrix, computed through the SVD so that
/// rank-deficient inputs are detected rather than amplified.
pub fn zf_beamformers(directions: &ComplexMatrix) -> Result<ComplexMatrix, BaselinesError> {
    let m = directions.rows();
    let k = directions.cols();
    assert_eq!(m, k, "square direction matrix expected (M = K)");

    // solve E* W = I, i.e. W = V diag(1/sigma) U* applied to E* = U S V*
    let e_adj = directions.adjoint();
    let s = svd(&e_adj)?;
    let smin = *s.singular_values.last().unwrap();
    let smax = s.singular_values[0];
    if smin <= RANK_TOL * smax.max(1.0) {
        return Err(BaselinesError::DegenerateInput);
    }
    let mut w = ComplexMatrix::zeros(m, k);
    for col in 0..k {
        // column of the inverse: V diag(1/sigma) U* e_col
        let mut coeffs = vec![C64::new(0.0, 0.0); k];
        for (j, coeff) in coeffs.iter_mut().enumerate() {
            *coeff = s.left.get(col, j).conj() / s.singular_values[j];
        }
        let mut norm_sq = 0.0;
        let mut column = vec![C64::new(0.0, 0.0); m];
        for (i, entry) in column.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (j, coeff) in coeffs.iter().enumerate() {
                acc += s.right.get(i, j) * coeff;
            }
            *entry = acc;
            norm_sq += acc.norm_sqr();
        }
        let norm = norm_sq.sqrt();
        for (i, entry) in column.iter().enumerate() {
            w.set(i, col, entry / norm);
        }
    }
    Ok(w)
}

/// Per-user (signal power, interference power) pairs for one block: user k
/// sees |h_k* w_k|^2 p_sym of signal and sum_{j != k} |h_k* w_j|^2 p_sym of
/// residual interference, with noise power 1.
pub fn zf_sinr_terms(
    channels: &ComplexMatrix,
    beamformers: &ComplexMatrix,
    p_sym: f64,
) -> Vec<(f64, f64)> {
    let k = channels.cols();
    (0..k)
        .map(|user| {
            let h = channels.col(user);
            let mut signal = 0.0;
            let mut interference = 0.0;
            for j in 0..k {
                let gain = vec_dot(&h, &beamformers.col(j)).norm_sqr() * p_sym;
                if j == user {
                    signal = gain;
                } else {
                    interference += gain;
                }
            }
            (signal, interference)
        })
        .collect()
}

/// Monte Carlo throughput of delayed limited-feedback zero-forcing.
///
/// Per block: every user's direction is quantized at Q = alpha (K-1) log2 P
/// bits (statistical error model), the transmitter beamforms against the
/// quantized directions with equal power P/K, and the sum rate
/// sum_k log2(1 + SINR_k) — evaluated against the *true* channel — is
/// earned over the (N - N_fd)/N fraction of the block that remains after
/// the feedback delay.
pub fn zf_rate_mc(
    cfg: &ZfConfig,
    p: f64,
    trials: usize,
    master_seed: u64,
) -> Result<RateSample, BaselinesError> {
    assert!(trials >= 1, "need at least one trial");
    assert!(p > 1.0, "power must exceed 1");
    if cfg.n == 0 {
        return Err(BaselinesError::ZeroCoherence);
    }
    if cfg.n <= cfg.n_fd {
        return Err(BaselinesError::NoServiceTime {
            n: cfg.n,
            n_fd: cfg.n_fd,
        });
    }
    let k = cfg.k;
    let q = FeedbackBits::Alpha(cfg.alpha).bits(k, p)?;
    let service = (cfg.n - cfg.n_fd) as f64 / cfg.n as f64;
    let p_sym = p / k as f64;

    let per_trial: Result<Vec<f64>, BaselinesError> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = derive_stream(master_seed, "zf-trial", trial as u64);
            loop {
                let h = sample_matrix(k, k, &mut rng);
                let mut dirs = ComplexMatrix::zeros(k, k);
                for user in 0..k {
                    let csi = synthesize_quantized_direction(&h.col(user), q, &mut rng);
                    for i in 0..k {
                        dirs.set(i, user, csi.direction[i]);
                    }
                }
                let w = match zf_beamformers(&dirs) {
                    Ok(w) => w,
                    Err(BaselinesError::DegenerateInput) => {
                        log::debug!("rank-deficient direction set at trial {trial}; resampling");
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let rate: f64 = zf_sinr_terms(&h, &w, p_sym)
                    .iter()
                    .map(|&(sig, intf)| (1.0 + sig / (1.0 + intf)).log2())
                    .sum();
                return Ok(service * rate);
            }
        })
        .collect();
    let values = per_trial?;

    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok(RateSample {
        power: p,
        rate: mean,
        stderr: (var / n).sqrt(),
        trials,
    })
}

/// Exact net DoF of delayed limited-feedback zero-forcing: the prelog
/// (alpha ^ 1) K (1 - N_fd/N) earned by the transmission minus the feedback
/// overhead alpha K (K-1) / N, i.e.
/// K ((alpha ^ 1)(1 - N_fd/N) - (K-1) alpha / N).
/// Piecewise linear in alpha with its maximum at alpha = 1, where it equals
/// K (1 - (N_fd + K - 1)/N). Requires alpha > 0: the scheme serves nothing
/// without feedback, so the alpha = 0 boundary is degenerate.
pub fn zf_net_dof(
    k: usize,
    n: usize,
    n_fd: usize,
    alpha: &BigRational,
) -> Result<BigRational, BaselinesError> {
    if n == 0 {
        return Err(BaselinesError::ZeroCoherence);
    }
    if !alpha.is_positive() {
        return Err(BaselinesError::AlphaOutOfRange {
            got: alpha.to_string(),
        });
    }
    let k_r = from_int(k as u64);
    let n_r = from_int(n as u64);
    let n_fd_r = from_int(n_fd as u64);
    let capped = alpha.clone().min(BigRational::one());
    let dof_frac = capped * (BigRational::one() - n_fd_r / &n_r);
    let overhead_frac = from_int(k as u64 - 1) * alpha / n_r;
    Ok(k_r * (dof_frac - overhead_frac))
}

/// Net DoF of zero-forcing at its maximizing alpha = 1:
/// K (1 - (N_fd + K - 1)/N). Evaluated for any positive N (may be
/// negative, which simply means the scheme is not worth running there).
pub fn zf_net_dof_max(k: usize, n: &BigRational, n_fd: usize) -> BigRational {
    assert!(n.is_positive(), "coherence length must be positive");
    let k_r = from_int(k as u64);
    let n_fd_r = from_int(n_fd as u64);
    let k1 = from_int(k as u64 - 1);
    &k_r * (BigRational::one() - (n_fd_r + k1) / n)
}

/// Single-user transmission: one data stream, full power, no feedback.
/// Its net DoF is the constant 1.
pub fn siso_net_dof() -> BigRational {
    BigRational::one()
}
