//! Retrospective ("observe, then retransmit") scheme with delayed
//! finite-rate feedback.
//!
//! The two-user case is simulated exactly: three symbol times over three
//! consecutive blocks, with phase two retransmitting the linear combinations
//! the receivers overheard, reconstructed from *quantized* directions. For
//! three or more users the per-receiver linear system is synthesized
//! structurally — a T x D signal matrix of rank D and a T x (K-1)D
//! interference matrix with D/K zero rows whose error-free part has rank
//! exactly T - D — because every rate and DoF statement about the scheme is
//! a statement about that structure, not about a specific symbol schedule.
//!
//! Receivers zero-force: the combiner is the set of right singular vectors
//! of the stacked interference belonging to its D smallest singular values,
//! and the achievable rate is the log-det ratio of (signal + interference +
//! noise) to (interference + noise) covariances in the projected space.

use crate::analysis::RateSample;
use crate::channel::{complex_gaussian, derive_stream, sample_matrix, ChannelBlock};
use crate::exact::harmonic;
use crate::numerics::{
    logdet_ipaa, orthonormal_complement, svd, vec_dot, vec_norm, ComplexMatrix, NumericsError, C64,
};
use crate::quantizer::{synthesize_quantized_direction, FeedbackBits, QuantizedCsi};
use num_traits::ToPrimitive;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

/// Below this magnitude a draw that appears in a denominator is treated as
/// degenerate and resampled.
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MatError {
    #[error("degenerate channel draw (|coefficient| < {DEGENERATE_TOL}); resample")]
    DegenerateDraw,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Quantizer(#[from] crate::quantizer::QuantizerError),
}

/// Round-trip dimensions of the K-user scheme: K/H_K = K D / T with
/// T, D integers, so the scheme recovers K D symbols in T symbol times.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatDims {
    pub k: usize,
    /// Symbol times per round (numerator of H_K in lowest terms).
    pub t: usize,
    /// Symbols per user per round (denominator of H_K in lowest terms).
    pub d: usize,
    /// Harmonic number H_K = T/D.
    pub harmonic: num_rational::BigRational,
}

/// T and D from H_K in lowest terms: K=2 gives (3, 2), K=3 gives (11, 6),
/// K=4 gives (25, 12).
pub fn mat_dims(k: usize) -> MatDims {
    assert!(k >= 2, "the scheme needs at least two users");
    let h = harmonic(k);
    let t = h.numer().to_usize().expect("T fits in usize at desk scale");
    let d = h.denom().to_usize().expect("D fits in usize at desk scale");
    MatDims {
        k,
        t,
        d,
        harmonic: h,
    }
}

/// Dimensions actually used by the structural synthesizer: `mat_dims`
/// scaled by the smallest factor that makes D/K (the zero-row count) an
/// integer. The scaling is the identity for K <= 5.
pub fn synth_dims(k: usize) -> MatDims {
    let mut dims = mat_dims(k);
    let g = gcd(dims.d, k);
    let factor = k / g;
    dims.t *= factor;
    dims.d *= factor;
    dims
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One round of the two-user scheme: a symbol each in three consecutive
/// blocks, plus the two quantized directions the transmitter received
/// (receiver B's channel at block 1, receiver A's at block 2).
#[derive(Debug, Clone)]
pub struct MatRound2User {
    pub blocks: [ChannelBlock; 3],
    pub fb_b: QuantizedCsi,
    pub fb_a: QuantizedCsi,
}

/// The four information symbols of a two-user round.
#[derive(Debug, Clone, Copy)]
pub struct Mat2Symbols {
    pub u_a: C64,
    pub v_a: C64,
    pub u_b: C64,
    pub v_b: C64,
}

impl Mat2Symbols {
    /// Independent Gaussian symbols at per-symbol power `p_sym` (the round
    /// splits total power P as P/2 per symbol).
    pub fn gaussian<R: Rng>(p_sym: f64, rng: &mut R) -> Self {
        let scale = p_sym.sqrt();
        let draw = |rng: &mut R| complex_gaussian(rng) * scale;
        Self {
            u_a: draw(rng),
            v_a: draw(rng),
            u_b: draw(rng),
            v_b: draw(rng),
        }
    }
}

/// Stacked signal and interference matrices seen by one receiver over one
/// round: signal is T x D, interference is T x (K-1)D.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub signal: ComplexMatrix,
    pub interference: ComplexMatrix,
    pub t: usize,
    pub d: usize,
    pub k: usize,
}

/// Samples a fresh two-user round: three independent blocks and the two
/// feedback directions at the bit budget `bits` resolved at power `p`.
pub fn sample_round_2user<R: Rng>(
    bits: &FeedbackBits,
    p: f64,
    rng: &mut R,
) -> Result<MatRound2User, MatError> {
    let q = bits.bits(2, p)?;
    let blocks = [
        ChannelBlock {
            block_index: 0,
            h: sample_matrix(2, 2, rng),
        },
        ChannelBlock {
            block_index: 1,
            h: sample_matrix(2, 2, rng),
        },
        ChannelBlock {
            block_index: 2,
            h: sample_matrix(2, 2, rng),
        },
    ];
    let mut fb_b = synthesize_quantized_direction(&blocks[0].user_channel(1), q, rng);
    let mut fb_a = synthesize_quantized_direction(&blocks[1].user_channel(0), q, rng);
    fb_b.alpha = bits.alpha();
    fb_a.alpha = bits.alpha();
    Ok(MatRound2User { blocks, fb_b, fb_a })
}

/// Runs the two-user transmission: block 1 carries receiver A's symbol
/// pair, block 2 carries receiver B's, block 3 sends the sum of the two
/// overheard combinations rebuilt from the quantized directions on antenna
/// one. Returns both receivers' raw three-sample observations with CN(0,
/// noise_var) noise added.
pub fn run_mat2_round<R: Rng>(
    round: &MatRound2User,
    sym: &Mat2Symbols,
    noise_var: f64,
    rng: &mut R,
) -> ([C64; 3], [C64; 3]) {
    let x1 = [sym.u_a, sym.v_a];
    let x2 = [sym.u_b, sym.v_b];

    // overheard combinations rebuilt from quantized directions
    let lb1 = vec_dot(&round.fb_b.direction, &x1);
    let la2 = vec_dot(&round.fb_a.direction, &x2);
    let x3 = lb1 + la2;

    let noise = |rng: &mut R| {
        if noise_var > 0.0 {
            complex_gaussian(rng) * noise_var.sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    };

    let observe = |user: usize, rng: &mut R| {
        let y1 = vec_dot(&round.blocks[0].user_channel(user), &x1) + noise(rng);
        let y2 = vec_dot(&round.blocks[1].user_channel(user), &x2) + noise(rng);
        let y3 = round.blocks[2].h.get(0, user).conj() * x3 + noise(rng);
        [y1, y2, y3]
    };

    let y_a = observe(0, rng);
    let y_b = observe(1, rng);
    (y_a, y_b)
}

/// Receiver A's stacked system for a two-user round, with the row
/// normalizations that make the nonzero interference rows unit vectors:
/// row 2 is divided by |h_A[2]| and row 3 by |h_A1[3]|.
pub fn assemble_system_2user(round: &MatRound2User) -> Result<LinearSystem, MatError> {
    let h_a1 = round.blocks[0].user_channel(0);
    let h_a2 = round.blocks[1].user_channel(0);
    let h_a13 = round.blocks[2].h.get(0, 0);

    let h_a2_norm = vec_norm(&h_a2);
    let h_a13_mag = h_a13.norm();
    if h_a13_mag < DEGENERATE_TOL || h_a2_norm < DEGENERATE_TOL {
        return Err(MatError::DegenerateDraw);
    }
    let phase3 = h_a13.conj() / h_a13_mag;

    let zero = C64::new(0.0, 0.0);
    let e_b = &round.fb_b.direction;
    let e_a = &round.fb_a.direction;

    let signal = ComplexMatrix::from_rows(&[
        vec![h_a1[0].conj(), h_a1[1].conj()],
        vec![zero, zero],
        vec![phase3 * e_b[0].conj(), phase3 * e_b[1].conj()],
    ])?;
    let interference = ComplexMatrix::from_rows(&[
        vec![zero, zero],
        vec![h_a2[0].conj() / h_a2_norm, h_a2[1].conj() / h_a2_norm],
        vec![phase3 * e_a[0].conj(), phase3 * e_a[1].conj()],
    ])?;

    Ok(LinearSystem {
        signal,
        interference,
        t: 3,
        d: 2,
        k: 2,
    })
}

/// The same round viewed with the user roles exchanged: feeding the result
/// to `assemble_system_2user` yields receiver B's system (with its rows in
/// the order block 2, block 1, block 3, which leaves singular values and
/// rates unchanged).
pub fn swap_roles(round: &MatRound2User) -> MatRound2User {
    let swap_cols = |blk: &ChannelBlock| ChannelBlock {
        block_index: blk.block_index,
        h: ComplexMatrix::from_fn(blk.h.rows(), 2, |i, j| blk.h.get(i, 1 - j)),
    };
    MatRound2User {
        blocks: [
            swap_cols(&round.blocks[1]),
            swap_cols(&round.blocks[0]),
            swap_cols(&round.blocks[2]),
        ],
        fb_b: round.fb_a.clone(),
        fb_a: round.fb_b.clone(),
    }
}

/// Synthesizes one receiver's K-user system structurally.
///
/// The error-free interference has D/K zero rows (leading) and its nonzero
/// rows are random combinations of T - D basis rows, so its rank is exactly
/// T - D. Each nonzero row i is then perturbed by an error of norm
/// 2 sin(theta_i / 2) — the chord length between a unit direction and its
/// quantization at angle theta_i — in a uniformly random direction,
/// cycling through `per_vector_sin2` (one entry per fed-back vector).
/// Randomness consumption does not depend on the sin^2 values, so calls
/// with the same stream and different error levels share the same base
/// matrices (common random numbers).
pub fn synth_system_general<R: Rng>(
    k: usize,
    per_vector_sin2: &[f64],
    rng: &mut R,
) -> LinearSystem {
    let dims = synth_dims(k);
    let (t, d) = (dims.t, dims.d);
    let fed_back = t - d;
    assert_eq!(
        per_vector_sin2.len(),
        fed_back,
        "expected one sin^2 value per fed-back vector (T - D = {fed_back})"
    );
    for &s in per_vector_sin2 {
        assert!((0.0..=1.0).contains(&s), "sin^2 values must lie in [0,1]");
    }

    let width = (k - 1) * d;
    let zero_rows = d / k;
    let nonzero_rows = t - zero_rows;

    let signal = sample_matrix(t, d, rng);
    let basis = sample_matrix(fed_back, width, rng);
    let coeffs = sample_matrix(nonzero_rows, fed_back, rng);
    let clean_rows = coeffs.mul(&basis);

    let mut interference = ComplexMatrix::zeros(t, width);
    for i in 0..nonzero_rows {
        let sin2 = per_vector_sin2[i % fed_back];
        let theta = sin2.sqrt().min(1.0).asin();
        let err_norm = 2.0 * (theta / 2.0).sin();
        // direction always drawn, so error level does not shift the stream
        let dir = crate::quantizer::random_direction(width, rng);
        for (j, d) in dir.iter().enumerate() {
            interference.set(zero_rows + i, j, clean_rows.get(i, j) + d * err_norm);
        }
    }

    LinearSystem {
        signal,
        interference,
        t,
        d,
        k,
    }
}

/// Zero-forcing combiner: T x D orthonormal columns spanning the directions
/// least touched by the interference — the right singular vectors of the
/// (K-1)D x T stacked interference for its D smallest singular values,
/// computed as the trailing left singular vectors of the T x (K-1)D matrix
/// (completed with its nullspace when T exceeds the interference width).
pub fn zf_combiner(system: &LinearSystem) -> Result<ComplexMatrix, MatError> {
    let a = &system.interference;
    let t = a.rows();
    let d = system.d;
    let s = svd(a)?;
    let k = s.singular_values.len();
    let full = if k < t {
        let comp = orthonormal_complement(&s.left);
        s.left.hcat(&comp)
    } else {
        s.left
    };
    Ok(ComplexMatrix::from_fn(t, d, |i, j| full.get(i, t - d + j)))
}

/// Achievable rate (bits over the whole round) for one receiver: the
/// combiner projects the T observations to D dimensions with unit noise,
/// and the rate is
/// log2 det(I + p (Gs Gs* + Gi Gi*)) - log2 det(I + p Gi Gi*)
/// with Gs, Gi the projected signal and interference matrices and p the
/// per-symbol power.
pub fn system_rate(system: &LinearSystem, p_sym: f64) -> Result<f64, MatError> {
    let combiner = zf_combiner(system)?;
    let adj = combiner.adjoint();
    let gs = adj.mul(&system.signal);
    let gi = adj.mul(&system.interference);
    let num = logdet_ipaa(p_sym, &gs.hcat(&gi))?;
    let den = logdet_ipaa(p_sym, &gi)?;
    Ok(num - den)
}

/// Monte Carlo throughput of the K-user scheme at total power `p`.
///
/// K = 2 simulates full rounds (both receivers); K >= 3 evaluates one
/// synthesized receiver per trial and scales by K (users are exchangeable
/// by construction). Per-symbol power is P/K. Trials run on independent
/// derived streams and are reduced in trial order, so the result does not
/// depend on the worker count.
pub fn mat_rate_mc(
    k: usize,
    bits: &FeedbackBits,
    p: f64,
    trials: usize,
    master_seed: u64,
) -> Result<RateSample, MatError> {
    assert!(trials >= 1, "need at least one trial");
    assert!(p > 1.0, "power must exceed 1");
    assert!(k >= 2, "the scheme needs at least two users");

    let per_trial: Result<Vec<f64>, MatError> = if k == 2 {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = derive_stream(master_seed, "mat2-trial", trial as u64);
                loop {
                    let round = sample_round_2user(bits, p, &mut rng)?;
                    let sys_a = match assemble_system_2user(&round) {
                        Ok(sys) => sys,
                        Err(MatError::DegenerateDraw) => {
                            log::debug!("degenerate two-user draw at trial {trial}; resampling");
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    let sys_b = match assemble_system_2user(&swap_roles(&round)) {
                        Ok(sys) => sys,
                        Err(MatError::DegenerateDraw) => {
                            log::debug!("degenerate two-user draw at trial {trial}; resampling");
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    let p_sym = p / 2.0;
                    return Ok((system_rate(&sys_a, p_sym)? + system_rate(&sys_b, p_sym)?) / 3.0);
                }
            })
            .collect()
    } else {
        let dims = synth_dims(k);
        let q = bits.bits(k, p)?;
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = derive_stream(master_seed, "matk-trial", trial as u64);
                let sin2: Vec<f64> = (0..dims.t - dims.d)
                    .map(|_| crate::quantizer::sample_min_beta_sin2(k, q, &mut rng))
                    .collect();
                let system = synth_system_general(k, &sin2, &mut rng);
                let ratio = system_rate(&system, p / k as f64)?;
                Ok(k as f64 * ratio / dims.t as f64)
            })
            .collect()
    };
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
