//! Coherence-time regime analysis and real-world design guidance.
//!
//! For each user count K and feedback delay N_fd the coherence axis splits
//! into three regimes by exact rational comparison of the max-alpha net DoF
//! of the three schemes:
//!
//! - short blocks (N below `n_low`): feedback of any rate costs more than
//!   retrospective transmission returns, single-user wins;
//! - long blocks (N above `n_high`): the delay fraction N_fd/N has shrunk
//!   enough that zero-forcing's full K-stream prelog dominates;
//! - in between, retrospective transmission is strictly best.
//!
//! The design table converts the N window into coherence times and user
//! velocities under the standard Doppler relation v = c / (f_c N T_s).

use crate::analysis::{AnalysisError, Scheme};
use crate::baselines::siso_net_dof;
use crate::exact::{from_int, harmonic, to_f64};
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("carrier frequency and symbol time must be positive")]
    NonPositiveConstants,
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Baselines(String),
}

/// The two scheme-crossover boundaries for one (K, N_fd) pair.
///
/// `n_low` solves mat = siso: K (K-1)(H_K - 1) / (K - H_K);
/// `n_high` solves mat = zf: (H_K N_fd + K - 1) / (H_K - 1).
/// Both compare the schemes at their maximizing alpha = 1.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub k: usize,
    pub n_fd: usize,
    pub n_low: BigRational,
    pub n_high: BigRational,
}

impl RegimeReport {
    /// Best scheme at integer coherence length `n`.
    pub fn winner(&self, n: usize) -> Scheme {
        winner(self.k, n, self.n_fd)
    }
}

pub fn regime_boundaries(k: usize, n_fd: usize) -> Result<RegimeReport, PlannerError> {
    if k < 2 {
        return Err(AnalysisError::TooFewUsers { min: 2, got: k }.into());
    }
    let h = harmonic(k);
    let tail = &h - BigRational::one();
    let k_r = from_int(k as u64);
    let k1 = from_int(k as u64 - 1);
    let n_fd_r = from_int(n_fd as u64);
    let n_low = &k_r * &k1 * &tail / (&k_r - &h);
    let n_high = (&h * n_fd_r + k1) / tail;
    Ok(RegimeReport {
        k,
        n_fd,
        n_low,
        n_high,
    })
}

/// Max-alpha net DoF of the three schemes at one coherence length, with the
/// winner and any exact ties.
#[derive(Debug, Clone)]
pub struct NetDofComparison {
    pub n: usize,
    pub siso: BigRational,
    pub mat: BigRational,
    pub zf: BigRational,
    pub winner: Scheme,
    /// Schemes whose net DoF exactly equals the winner's (excluding the
    /// winner itself); nonempty only on boundary coherence lengths.
    pub tied_with: Vec<Scheme>,
}

/// Compares the three schemes at integer N and their maximizing alpha = 1.
/// Ties go to the scheme with the larger perfect-CSIT capability
/// (SISO < MAT < ZF) and are reported explicitly.
pub fn compare_schemes(k: usize, n: usize, n_fd: usize) -> NetDofComparison {
    compare_schemes_at(k, n, n_fd, &BigRational::one()).expect("alpha = 1 is always valid")
}

/// Compares the three schemes at integer N with MAT and ZF evaluated at the
/// given feedback scaling (alpha must be positive; the ZF net-DoF expression
/// degenerates at zero).
pub fn compare_schemes_at(
    k: usize,
    n: usize,
    n_fd: usize,
    alpha: &BigRational,
) -> Result<NetDofComparison, PlannerError> {
    assert!(k >= 2 && n >= 1);
    let n_r = from_int(n as u64);
    let siso = siso_net_dof();
    let mat = crate::analysis::mat_net_dof(k, alpha, &n_r)?;
    let zf = crate::baselines::zf_net_dof(k, n, n_fd, alpha)
        .map_err(|e| PlannerError::Baselines(e.to_string()))?;

    finish_comparison(n, siso, mat, zf)
}

fn finish_comparison(
    n: usize,
    siso: BigRational,
    mat: BigRational,
    zf: BigRational,
) -> Result<NetDofComparison, PlannerError> {
    let entries = [
        (Scheme::Siso, siso.clone()),
        (Scheme::Mat, mat.clone()),
        (Scheme::Zf, zf.clone()),
    ];
    let best_value = entries
        .iter()
        .map(|(_, v)| v.clone())
        .max()
        .expect("nonempty");
    let mut at_max: Vec<Scheme> = entries
        .iter()
        .filter(|(_, v)| *v == best_value)
        .map(|(s, _)| *s)
        .collect();
    let winner = at_max.pop().expect("at least one maximizer");
    Ok(NetDofComparison {
        n,
        siso,
        mat,
        zf,
        winner,
        tied_with: at_max,
    })
}

/// Best scheme at integer coherence length `n`.
pub fn winner(k: usize, n: usize, n_fd: usize) -> Scheme {
    compare_schemes(k, n, n_fd).winner
}

/// One row of the design-guideline table: the coherence window where
/// retrospective transmission is optimal, in symbols, milliseconds and
/// km/h.
#[derive(Debug, Clone, Serialize)]
pub struct DesignRow {
    pub k: usize,
    /// (n_low, n_high) in symbols, exact.
    #[serde(serialize_with = "crate::cli::serialize_ratio_pair")]
    pub n_range: (BigRational, BigRational),
    /// Coherence times N T_s at the window edges, ascending, in ms.
    pub coherence_ms: (f64, f64),
    /// Velocities at the window edges, ascending, in km/h: slow users sit
    /// at the long-block edge, fast users at the short-block edge.
    pub velocity_kmh: (f64, f64),
}

/// Builds design rows for the given user counts under carrier frequency
/// `f_c_hz` and data-symbol duration `symbol_time_s`.
pub fn design_table(
    f_c_hz: f64,
    symbol_time_s: f64,
    n_fd: usize,
    k_list: &[usize],
) -> Result<Vec<DesignRow>, PlannerError> {
    if f_c_hz <= 0.0 || symbol_time_s <= 0.0 {
        return Err(PlannerError::NonPositiveConstants);
    }
    k_list
        .iter()
        .map(|&k| {
            let bounds = regime_boundaries(k, n_fd)?;
            let n_low = to_f64(&bounds.n_low);
            let n_high = to_f64(&bounds.n_high);
            let velocity = |n: f64| SPEED_OF_LIGHT / (f_c_hz * n * symbol_time_s) * 3.6;
            Ok(DesignRow {
                k,
                n_range: (bounds.n_low, bounds.n_high),
                coherence_ms: (n_low * symbol_time_s * 1e3, n_high * symbol_time_s * 1e3),
                velocity_kmh: (velocity(n_high), velocity(n_low)),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::mat_net_dof_max;
    use crate::baselines::zf_net_dof_max;
    use crate::exact::ratio;

    #[test]
    fn boundaries_small_k() {
        let r2 = regime_boundaries(2, 100).unwrap();
        assert_eq!(r2.n_low, ratio(2, 1));
        assert_eq!(r2.n_high, ratio(302, 1)); // 3 N_fd + 2
        let r3 = regime_boundaries(3, 100).unwrap();
        assert_eq!(r3.n_low, ratio(30, 7));
        assert_eq!(r3.n_high, ratio(1112, 5)); // (11 N_fd + 12)/5
                                               // boundary formula with arbitrary delay, K = 2
        for n_fd in [0usize, 7, 1680] {
            let r = regime_boundaries(2, n_fd).unwrap();
            assert_eq!(r.n_high, ratio(3 * n_fd as i64 + 2, 1));
        }
    }

    #[test]
    fn boundary_equalities_exact() {
        // at n_low the max-alpha mat net DoF equals 1; at n_high it equals
        // the zero-forcing maximum — exactly, in rational arithmetic
        for (k, n_fd) in [(2usize, 100usize), (3, 100), (4, 1680), (7, 13)] {
            let r = regime_boundaries(k, n_fd).unwrap();
            let at_low = mat_net_dof_max(k, &r.n_low).unwrap();
            assert_eq!(at_low, ratio(1, 1), "mat != siso at n_low for K={k}");
            let at_high = mat_net_dof_max(k, &r.n_high).unwrap();
            assert_eq!(
                at_high,
                zf_net_dof_max(k, &r.n_high, n_fd),
                "mat != zf at n_high for K={k}"
            );
        }
    }

    #[test]
    fn winner_examples() {
        assert_eq!(winner(2, 150, 100), Scheme::Mat);
        assert_eq!(winner(2, 400, 100), Scheme::Zf);
        assert_eq!(winner(3, 3, 100), Scheme::Siso);
    }

    #[test]
    fn winner_partitions_integer_sweep() {
        for (k, n_fd) in [(2usize, 100usize), (3, 100), (4, 50)] {
            let r = regime_boundaries(k, n_fd).unwrap();
            for n in 1..=(to_f64(&r.n_high) as usize + 50) {
                let n_r = from_int(n as u64);
                let w = winner(k, n, n_fd);
                if n_r < r.n_low {
                    assert_eq!(w, Scheme::Siso, "K={k} N={n}");
                } else if n_r > r.n_low && n_r < r.n_high {
                    assert_eq!(w, Scheme::Mat, "K={k} N={n}");
                } else if n_r > r.n_high {
                    assert_eq!(w, Scheme::Zf, "K={k} N={n}");
                }
            }
        }
    }

    #[test]
    fn ties_reported_on_boundaries() {
        // K=2, N_fd=100: n_low = 2 and n_high = 302 are integers, so both
        // boundaries are exact ties
        let at_low = compare_schemes(2, 2, 100);
        assert_eq!(at_low.mat, ratio(1, 1));
        assert_eq!(at_low.winner, Scheme::Mat);
        assert_eq!(at_low.tied_with, vec![Scheme::Siso]);
        let at_high = compare_schemes(2, 302, 100);
        assert_eq!(at_high.winner, Scheme::Zf);
        assert_eq!(at_high.tied_with, vec![Scheme::Mat]);
        assert_eq!(at_high.mat, at_high.zf);
    }

    #[test]
    fn asymptotic_boundary_scalings() {
        // n_low tracks K ln K and n_high tracks
        // (N_fd + K/ln K)(1 - 1/ln K)^{-1} within modest constants
        for k in [8usize, 16, 32, 64] {
            let r = regime_boundaries(k, 1000).unwrap();
            let kf = k as f64;
            let ratio_low = to_f64(&r.n_low) / (kf * kf.ln());
            assert!(
                (0.8..=1.25).contains(&ratio_low),
                "n_low ratio {ratio_low} out of band at K={k}"
            );
            let approx_high = (1000.0 + kf / kf.ln()) / (1.0 - 1.0 / kf.ln());
            let ratio_high = to_f64(&r.n_high) / approx_high;
            assert!(
                (0.8..=1.25).contains(&ratio_high),
                "n_high ratio {ratio_high} out of band at K={k}"
            );
        }
    }

    #[test]
    fn design_table_velocity_identity() {
        let ts = 1.0 / 168.0 * 1e-3;
        let rows = design_table(2.1e9, ts, 1680, &[2, 4, 16]).unwrap();
        assert_eq!(rows.len(), 3);
        for row in &rows {
            // v(n) * n is constant: both endpoints give c/(f_c T_s)
            let (v_min, v_max) = row.velocity_kmh;
            let n_low = to_f64(&row.n_range.0);
            let n_high = to_f64(&row.n_range.1);
            let prod_low = v_max / 3.6 * n_low;
            let prod_high = v_min / 3.6 * n_high;
            let expect = SPEED_OF_LIGHT / (2.1e9 * ts);
            assert!((prod_low - expect).abs() < 1e-6 * expect);
            assert!((prod_high - expect).abs() < 1e-6 * expect);
            assert!(v_min < v_max);
            assert!(row.coherence_ms.0 < row.coherence_ms.1);
        }
        assert!(design_table(0.0, ts, 1680, &[2]).is_err());
    }
}
