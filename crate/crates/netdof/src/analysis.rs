//! Closed-form DoF, feedback-overhead and net-DoF expressions for every
//! scheme, plus the finite-power slope estimator applied to Monte Carlo
//! output.
//!
//! With H_K = 1 + 1/2 + ... + 1/K and the per-user feedback budget scaled as
//! Q = alpha (K-1) log2 P:
//!
//! - retrospective (MAT) transmission:
//!   DoF = min((1 + (K-1) alpha)/K, 1) * K/H_K,
//!   overhead = K (K-1) (H_K - 1) alpha / (H_K N),
//!   net = DoF - overhead, maximized at alpha = 1;
//! - zero-forcing: net = K (1 - ((alpha ^ 1) N_fd + (K-1) alpha)/N);
//! - single-user transmission: net = 1, no feedback at all;
//! - analog feedback variants of both, with overhead K^2/N.
//!
//! Everything here is exact rational arithmetic; floats appear only in the
//! slope estimator, which is a least-squares fit over simulated rate points.

use crate::exact::{from_int, harmonic};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("number of users must be at least {min}, got {got}")]
    TooFewUsers { min: usize, got: usize },
    #[error("alpha must be {requirement}, got {got}")]
    AlphaOutOfRange {
        requirement: &'static str,
        got: String,
    },
    #[error("coherence length must be positive, got {got}")]
    NonPositiveCoherence { got: String },
    #[error("need at least two rate samples with distinct powers")]
    InsufficientData,
}

/// Transmission scheme labels used across reports and serialized output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scheme {
    Siso,
    Mat,
    Zf,
    MatAnalog,
    ZfAnalog,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Scheme::Siso => "SISO",
            Scheme::Mat => "MAT",
            Scheme::Zf => "ZF",
            Scheme::MatAnalog => "MAT_analog",
            Scheme::ZfAnalog => "ZF_analog",
        };
        write!(f, "{name}")
    }
}

/// One simulated (power, throughput) point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateSample {
    /// Transmit power on the linear scale.
    pub power: f64,
    /// Average throughput in bits/symbol.
    pub rate: f64,
    /// Standard error of the throughput estimate.
    pub stderr: f64,
    /// Monte Carlo trials behind the estimate.
    pub trials: usize,
}

/// A fitted prelog slope.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DofEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub points_used: usize,
}

/// Analytic net-DoF entry for one scheme; `net = dof - overhead` always.
#[derive(Debug, Clone)]
pub struct NetDofReport {
    pub scheme: Scheme,
    pub dof: BigRational,
    pub overhead: BigRational,
    pub net: BigRational,
    pub alpha: BigRational,
}

impl NetDofReport {
    pub fn new(
        scheme: Scheme,
        dof: BigRational,
        overhead: BigRational,
        alpha: BigRational,
    ) -> Self {
        let net = &dof - &overhead;
        Self {
            scheme,
            dof,
            overhead,
            net,
            alpha,
        }
    }
}

fn check_users(k: usize, min: usize) -> Result<(), AnalysisError> {
    if k < min {
        Err(AnalysisError::TooFewUsers { min, got: k })
    } else {
        Ok(())
    }
}

fn check_alpha_nonneg(alpha: &BigRational) -> Result<(), AnalysisError> {
    if alpha.is_negative() {
        Err(AnalysisError::AlphaOutOfRange {
            requirement: "nonnegative",
            got: alpha.to_string(),
        })
    } else {
        Ok(())
    }
}

fn check_coherence(n: &BigRational) -> Result<(), AnalysisError> {
    if *n <= BigRational::zero() {
        Err(AnalysisError::NonPositiveCoherence { got: n.to_string() })
    } else {
        Ok(())
    }
}

/// Optimal multiplexing gain with outdated CSIT and unconstrained feedback:
/// K / H_K.
pub fn dof_star(k: usize) -> Result<BigRational, AnalysisError> {
    check_users(k, 1)?;
    Ok(from_int(k as u64) / harmonic(k))
}

/// Multiplexing gain of retrospective transmission at feedback scaling
/// alpha: min((1 + (K-1) alpha)/K, 1) * DoF*(K).
pub fn mat_dof(k: usize, alpha: &BigRational) -> Result<BigRational, AnalysisError> {
    check_users(k, 2)?;
    check_alpha_nonneg(alpha)?;
    let k_r = from_int(k as u64);
    let fraction = (BigRational::one() + from_int(k as u64 - 1) * alpha) / &k_r;
    let capped = fraction.min(BigRational::one());
    Ok(capped * dof_star(k)?)
}

/// The two candidate thresholds below which outdated CSIT stops paying off.
///
/// `printed` is (H_K - 1) / (H_K (K - 1)); `dof_consistent` solves
/// mat_dof(K, alpha) = 1 exactly, giving (H_K - 1) / (K - 1). The two do
/// not agree; callers get both and decide which to trust.
#[derive(Debug, Clone)]
pub struct AlphaStar {
    pub printed: BigRational,
    pub dof_consistent: BigRational,
}

pub fn mat_alpha_star(k: usize) -> Result<AlphaStar, AnalysisError> {
    check_users(k, 2)?;
    let h = harmonic(k);
    let tail = &h - BigRational::one(); // 1/2 + ... + 1/K
    let k1 = from_int(k as u64 - 1);
    Ok(AlphaStar {
        printed: &tail / (&h * &k1),
        dof_consistent: tail / k1,
    })
}

/// Feedback overhead of retrospective transmission:
/// K (K-1) (H_K - 1) alpha / (H_K N).
pub fn mat_overhead(
    k: usize,
    alpha: &BigRational,
    n: &BigRational,
) -> Result<BigRational, AnalysisError> {
    check_users(k, 2)?;
    check_alpha_nonneg(alpha)?;
    check_coherence(n)?;
    let h = harmonic(k);
    let tail = &h - BigRational::one();
    let k_r = from_int(k as u64);
    let k1 = from_int(k as u64 - 1);
    Ok(k_r * k1 * tail * alpha / (h * n))
}

/// Net multiplexing gain of retrospective transmission: the smaller of the
/// two affine-in-alpha branches
///   [N + alpha (K-1)(N - K (H_K - 1))] / (H_K N)   and
///   K [N - alpha (K-1)(H_K - 1)] / (H_K N),
/// which intersect at alpha = 1 for every K and N.
pub fn mat_net_dof(
    k: usize,
    alpha: &BigRational,
    n: &BigRational,
) -> Result<BigRational, AnalysisError> {
    check_users(k, 2)?;
    check_alpha_nonneg(alpha)?;
    check_coherence(n)?;
    let h = harmonic(k);
    let tail = &h - BigRational::one();
    let k_r = from_int(k as u64);
    let k1 = from_int(k as u64 - 1);
    let denom = &h * n;
    let branch1 = (n + alpha * &k1 * (n - &k_r * &tail)) / &denom;
    let branch2 = &k_r * (n - alpha * &k1 * &tail) / &denom;
    Ok(branch1.min(branch2))
}

/// The two branches of the net-DoF expression, for boundary studies.
pub fn mat_net_dof_branches(
    k: usize,
    alpha: &BigRational,
    n: &BigRational,
) -> Result<(BigRational, BigRational), AnalysisError> {
    check_users(k, 2)?;
    check_alpha_nonneg(alpha)?;
    check_coherence(n)?;
    let h = harmonic(k);
    let tail = &h - BigRational::one();
    let k_r = from_int(k as u64);
    let k1 = from_int(k as u64 - 1);
    let denom = &h * n;
    let branch1 = (n + alpha * &k1 * (n - &k_r * &tail)) / &denom;
    let branch2 = &k_r * (n - alpha * &k1 * &tail) / &denom;
    Ok((branch1, branch2))
}

/// Net DoF of retrospective transmission at the maximizing alpha = 1:
/// K (N - (K-1)(H_K - 1)) / (H_K N).
pub fn mat_net_dof_max(k: usize, n: &BigRational) -> Result<BigRational, AnalysisError> {
    mat_net_dof(k, &BigRational::one(), n)
}

/// Per-scheme net-DoF decomposition at one operating point. The zero-
/// forcing entries follow its transmission/overhead split
/// ((alpha ^ 1) K (1 - N_fd/N) earned, alpha K (K-1)/N spent), the analog
/// variants spend K^2/N, and single-user transmission spends nothing.
pub fn net_dof_report(
    scheme: Scheme,
    k: usize,
    alpha: &BigRational,
    n: &BigRational,
    n_fd: &BigRational,
) -> Result<NetDofReport, AnalysisError> {
    check_coherence(n)?;
    let k_r = from_int(k as u64);
    let (dof, overhead) = match scheme {
        Scheme::Siso => (BigRational::one(), BigRational::zero()),
        Scheme::Mat => (mat_dof(k, alpha)?, mat_overhead(k, alpha, n)?),
        Scheme::Zf => {
            check_users(k, 2)?;
            if !alpha.is_positive() {
                return Err(AnalysisError::AlphaOutOfRange {
                    requirement: "positive for zero-forcing",
                    got: alpha.to_string(),
                });
            }
            let capped = alpha.clone().min(BigRational::one());
            let dof = capped * &k_r * (BigRational::one() - n_fd / n);
            let overhead = alpha * &k_r * from_int(k as u64 - 1) / n;
            (dof, overhead)
        }
        Scheme::MatAnalog => {
            check_users(k, 2)?;
            (dof_star(k)?, &k_r * &k_r / n)
        }
        Scheme::ZfAnalog => {
            check_users(k, 2)?;
            let dof = &k_r * (BigRational::one() - n_fd / n);
            (dof, &k_r * &k_r / n)
        }
    };
    Ok(NetDofReport::new(scheme, dof, overhead, alpha.clone()))
}

/// Net DoF with analog (unquantized, noisy-channel) feedback. The CSIT is
/// delay-limited only and the overhead is K^2/N for both schemes.
pub fn analog_net_dof(
    scheme: Scheme,
    k: usize,
    n: &BigRational,
    n_fd: &BigRational,
) -> Result<BigRational, AnalysisError> {
    check_users(k, 2)?;
    check_coherence(n)?;
    let k_r = from_int(k as u64);
    match scheme {
        Scheme::Mat | Scheme::MatAnalog => {
            let h = harmonic(k);
            Ok(&k_r * (n - &k_r * &h) / (h * n))
        }
        Scheme::Zf | Scheme::ZfAnalog => Ok(&k_r * (BigRational::one() - (n_fd + &k_r) / n)),
        Scheme::Siso => Ok(BigRational::one()),
    }
}

/// Least-squares slope of rate against log2(power) over the `top_points`
/// largest-power samples. The prelog is an asymptotic quantity, so low-power
/// points are excluded rather than downweighted.
pub fn estimate_dof_slope(
    samples: &[RateSample],
    top_points: usize,
) -> Result<DofEstimate, AnalysisError> {
    let mut sorted: Vec<&RateSample> = samples.iter().collect();
    sorted.sort_by(|a, b| a.power.partial_cmp(&b.power).unwrap());
    sorted.dedup_by(|a, b| a.power == b.power);
    let use_n = top_points.min(sorted.len());
    if use_n < 2 {
        return Err(AnalysisError::InsufficientData);
    }
    let chosen = &sorted[sorted.len() - use_n..];

    let xs: Vec<f64> = chosen.iter().map(|s| s.power.log2()).collect();
    let ys: Vec<f64> = chosen.iter().map(|s| s.rate).collect();
    let n = use_n as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let stderr = if use_n > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(DofEstimate {
        slope,
        stderr,
        points_used: use_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{ratio, to_f64};

    #[test]
    fn dof_star_values() {
        assert_eq!(dof_star(1).unwrap(), ratio(1, 1));
        assert_eq!(dof_star(2).unwrap(), ratio(4, 3));
        assert_eq!(dof_star(3).unwrap(), ratio(18, 11));
        assert!(dof_star(0).is_err());
    }

    #[test]
    fn mat_dof_cases() {
        assert_eq!(mat_dof(2, &ratio(1, 1)).unwrap(), ratio(4, 3));
        assert_eq!(mat_dof(3, &ratio(1, 4)).unwrap(), ratio(9, 11));
        // alpha -> 0 leaves the bounded-feedback floor 1/H_K
        assert_eq!(mat_dof(2, &ratio(0, 1)).unwrap(), ratio(2, 3));
        assert_eq!(mat_dof(3, &ratio(0, 1)).unwrap(), ratio(6, 11));
        assert!(mat_dof(2, &ratio(-1, 2)).is_err());
    }

    #[test]
    fn mat_dof_piecewise_linear_and_capped() {
        for k in 2..=16 {
            let cap = dof_star(k).unwrap();
            let mut prev = mat_dof(k, &ratio(0, 1)).unwrap();
            for step in 1..=40 {
                let alpha = ratio(step, 20);
                let val = mat_dof(k, &alpha).unwrap();
                assert!(val >= prev, "mat_dof not nondecreasing at K={k}");
                assert!(val <= cap, "mat_dof exceeds cap at K={k}");
                prev = val;
            }
            assert_eq!(mat_dof(k, &ratio(2, 1)).unwrap(), cap);
        }
    }

    #[test]
    fn alpha_star_mismatch_is_real() {
        let astar = mat_alpha_star(2).unwrap();
        assert_eq!(astar.printed, ratio(1, 3));
        assert_eq!(astar.dof_consistent, ratio(1, 2));
        // the printed threshold does NOT satisfy mat_dof = 1 ...
        assert_eq!(mat_dof(2, &astar.printed).unwrap(), ratio(8, 9));
        // ... while the consistent solve does, for a range of K
        for k in 2..=8 {
            let a = mat_alpha_star(k).unwrap();
            assert_eq!(
                mat_dof(k, &a.dof_consistent).unwrap(),
                ratio(1, 1),
                "dof-consistent threshold broken at K={k}"
            );
        }
        let a3 = mat_alpha_star(3).unwrap();
        assert_eq!(a3.printed, ratio(5, 22));
    }

    #[test]
    fn overhead_specializations() {
        // K=2: 2 alpha / (3N); K=3: 30 alpha / (11 N)
        assert_eq!(
            mat_overhead(2, &ratio(1, 1), &ratio(10, 1)).unwrap(),
            ratio(1, 15)
        );
        assert_eq!(
            mat_overhead(3, &ratio(1, 1), &ratio(11, 1)).unwrap(),
            ratio(30, 121)
        );
        assert_eq!(
            mat_overhead(4, &ratio(0, 1), &ratio(7, 1)).unwrap(),
            ratio(0, 1)
        );
        // symbolic check across alpha and N grids
        for n in [2i64, 10, 100, 1000] {
            for a in [ratio(1, 4), ratio(1, 2), ratio(1, 1), ratio(3, 2)] {
                let n_r = ratio(n, 1);
                assert_eq!(
                    mat_overhead(2, &a, &n_r).unwrap(),
                    ratio(2, 3 * n) * a.clone()
                );
                assert_eq!(
                    mat_overhead(3, &a, &n_r).unwrap(),
                    ratio(30, 11 * n) * a.clone()
                );
            }
        }
    }

    #[test]
    fn net_dof_values_and_maximum() {
        assert_eq!(
            mat_net_dof(2, &ratio(1, 1), &ratio(10, 1)).unwrap(),
            ratio(19, 15)
        );
        assert_eq!(
            mat_net_dof(3, &ratio(1, 1), &ratio(11, 1)).unwrap(),
            ratio(168, 121)
        );
        // identity: net = dof - overhead
        for k in 2..=6 {
            for a in [ratio(1, 4), ratio(1, 1), ratio(7, 4)] {
                let n = ratio(37, 1);
                let direct = mat_net_dof(k, &a, &n).unwrap();
                let assembled = mat_dof(k, &a).unwrap() - mat_overhead(k, &a, &n).unwrap();
                assert_eq!(direct, assembled, "net != dof - overhead at K={k}");
            }
        }
        // overhead vanishes as N grows
        let huge = ratio(1_000_000_000, 1);
        let v = mat_net_dof(2, &ratio(1, 1), &huge).unwrap();
        assert!((to_f64(&v) - 4.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn net_dof_branches_intersect_at_alpha_one() {
        for k in 2..=16usize {
            for n in [k as i64, 10, 137, 10_000] {
                let n_r = ratio(n, 1);
                let (b1, b2) = mat_net_dof_branches(k, &ratio(1, 1), &n_r).unwrap();
                assert_eq!(b1, b2, "branches differ at alpha=1, K={k}, N={n}");
                // the intersection maximizes over alpha wherever the first
                // branch is nondecreasing, i.e. N >= K (H_K - 1) — below
                // that the scheme is dominated by single-user transmission
                // anyway
                let rising = n_r >= from_int(k as u64) * (harmonic(k) - ratio(1, 1));
                if rising {
                    let at_one = mat_net_dof(k, &ratio(1, 1), &n_r).unwrap();
                    for a in [ratio(9, 10), ratio(11, 10), ratio(1, 2), ratio(2, 1)] {
                        assert!(mat_net_dof(k, &a, &n_r).unwrap() <= at_one);
                    }
                }
            }
        }
    }

    #[test]
    fn report_decomposition_is_consistent() {
        let n = ratio(302, 1);
        let n_fd = ratio(100, 1);
        for scheme in [
            Scheme::Siso,
            Scheme::Mat,
            Scheme::Zf,
            Scheme::MatAnalog,
            Scheme::ZfAnalog,
        ] {
            for alpha in [ratio(1, 4), ratio(1, 1), ratio(3, 2)] {
                let r = net_dof_report(scheme, 2, &alpha, &n, &n_fd).unwrap();
                assert_eq!(r.net, &r.dof - &r.overhead, "net != dof - overhead");
            }
        }
        // the assembled nets agree with the direct expressions
        let mat = net_dof_report(Scheme::Mat, 2, &ratio(1, 1), &n, &n_fd).unwrap();
        assert_eq!(mat.net, mat_net_dof(2, &ratio(1, 1), &n).unwrap());
        let zf = net_dof_report(Scheme::Zf, 2, &ratio(1, 1), &n, &n_fd).unwrap();
        assert_eq!(
            zf.net,
            crate::baselines::zf_net_dof(2, 302, 100, &ratio(1, 1)).unwrap()
        );
        assert_eq!(zf.net, ratio(201, 151));
        let analog = net_dof_report(Scheme::MatAnalog, 2, &ratio(1, 1), &n, &n_fd).unwrap();
        assert_eq!(
            analog.net,
            analog_net_dof(Scheme::Mat, 2, &n, &n_fd).unwrap()
        );
        let zfa = net_dof_report(Scheme::ZfAnalog, 2, &ratio(1, 1), &n, &n_fd).unwrap();
        assert_eq!(zfa.net, analog_net_dof(Scheme::Zf, 2, &n, &n_fd).unwrap());
        // zero-forcing requires positive alpha
        assert!(net_dof_report(Scheme::Zf, 2, &ratio(0, 1), &n, &n_fd).is_err());
    }

    #[test]
    fn analog_feedback_values_and_gap() {
        assert_eq!(
            analog_net_dof(Scheme::Mat, 2, &ratio(30, 1), &ratio(0, 1)).unwrap(),
            ratio(6, 5)
        );
        assert_eq!(
            analog_net_dof(Scheme::Zf, 2, &ratio(30, 1), &ratio(10, 1)).unwrap(),
            ratio(6, 5)
        );
        // limits: MAT analog -> DoF*(K), ZF analog -> K
        let huge = ratio(1_000_000_000, 1);
        let mat_limit = analog_net_dof(Scheme::Mat, 3, &huge, &ratio(0, 1)).unwrap();
        assert!((to_f64(&mat_limit) - to_f64(&dof_star(3).unwrap())).abs() < 1e-6);
        let zf_limit = analog_net_dof(Scheme::Zf, 3, &huge, &ratio(100, 1)).unwrap();
        assert!((to_f64(&zf_limit) - 3.0).abs() < 1e-6);
        // digital at alpha=1 vs analog: gap bounded by K^2/N
        for k in 2..=10usize {
            for n in [20i64, 100, 5000] {
                let n_r = ratio(n, 1);
                let digital = mat_net_dof_max(k, &n_r).unwrap();
                let analog = analog_net_dof(Scheme::Mat, k, &n_r, &ratio(0, 1)).unwrap();
                let gap = (digital - analog).abs();
                assert!(
                    gap <= ratio((k * k) as i64, n),
                    "analog gap too large at K={k}, N={n}"
                );
            }
        }
    }

    #[test]
    fn slope_estimator_exact_and_constant() {
        let mk = |p: f64, r: f64| RateSample {
            power: p,
            rate: r,
            stderr: 0.0,
            trials: 1,
        };
        let line: Vec<RateSample> = (1..=6)
            .map(|i| {
                let p = 2f64.powi(10 * i);
                mk(p, (4.0 / 3.0) * p.log2() + 7.0)
            })
            .collect();
        let est = estimate_dof_slope(&line, 4).unwrap();
        assert!((est.slope - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(est.points_used, 4);

        let flat: Vec<RateSample> = (1..=5).map(|i| mk(2f64.powi(8 * i), 3.5)).collect();
        let est = estimate_dof_slope(&flat, 3).unwrap();
        assert!(est.slope.abs() < 1e-12);

        assert!(estimate_dof_slope(&[mk(4.0, 1.0)], 4).is_err());
        assert!(estimate_dof_slope(&[mk(4.0, 1.0), mk(4.0, 2.0)], 4).is_err());
    }

    #[test]
    fn slope_estimator_with_log_log_correction_term() {
        // rate = 2 log2 P - log2 log2 P approaches slope 2 from below
        let samples: Vec<RateSample> = (1..=7)
            .map(|i| {
                let log2p = 60.0 + 20.0 * (i - 1) as f64;
                RateSample {
                    power: log2p.exp2(),
                    rate: 2.0 * log2p - log2p.log2(),
                    stderr: 0.0,
                    trials: 1,
                }
            })
            .collect();
        let est = estimate_dof_slope(&samples, 4).unwrap();
        assert!((est.slope - 2.0).abs() < 0.05, "slope {}", est.slope);
    }
}
