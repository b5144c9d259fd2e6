//! Block-fading MISO channel generation with coherence-block and
//! feedback-delay bookkeeping.
//!
//! One transmitter with M antennas serves K = M single-antenna receivers;
//! the channel matrix holds for N symbols per block and redraws i.i.d.
//! CN(0,1) across blocks. All sampling is a pure function of
//! (master seed, stream label, index), so concurrent trials never share a
//! stream and a full experiment is reproducible from its config alone.

use crate::numerics::{svd, ComplexMatrix, C64};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("number of users must be at least 1")]
    NoUsers,
    #[error("coherence length must be at least 1 symbol")]
    ZeroCoherence,
}

/// Static parameters of one experiment's channel process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ChannelConfig {
    /// Number of single-antenna receivers K.
    pub num_users: usize,
    /// Number of transmit antennas M; equal to K throughout.
    pub num_tx_antennas: usize,
    /// Coherence length N in symbols per block.
    pub coherence_len: usize,
    /// Feedback delay N_fd in symbols.
    pub feedback_delay: usize,
    /// Master seed every derived stream descends from.
    pub master_seed: u64,
}

impl ChannelConfig {
    /// M = K is enforced here; antenna/user selection for K != M is out of
    /// scope.
    pub fn new(
        num_users: usize,
        coherence_len: usize,
        feedback_delay: usize,
        master_seed: u64,
    ) -> Result<Self, ChannelError> {
        if num_users == 0 {
            return Err(ChannelError::NoUsers);
        }
        if coherence_len == 0 {
            return Err(ChannelError::ZeroCoherence);
        }
        Ok(Self {
            num_users,
            num_tx_antennas: num_users,
            coherence_len,
            feedback_delay,
            master_seed,
        })
    }
}

/// One coherence block: M x K matrix whose column r is receiver r's channel
/// vector h_r.
#[derive(Debug, Clone)]
pub struct ChannelBlock {
    pub block_index: u64,
    pub h: ComplexMatrix,
}

impl ChannelBlock {
    /// Channel vector of receiver `r` (column r).
    pub fn user_channel(&self, r: usize) -> Vec<C64> {
        self.h.col(r)
    }

    /// Smallest singular value; positive with probability 1 for Gaussian
    /// draws, so this doubles as a full-rank probe.
    pub fn min_singular_value(&self) -> f64 {
        let s = svd(&self.h).expect("SVD of a sampled channel block");
        *s.singular_values.last().unwrap()
    }
}

/// Derives an independent ChaCha stream from (master seed, label, index).
///
/// The 256-bit ChaCha seed is expanded with splitmix64 from
/// `master ^ fnv1a(label) + GOLDEN * (index + 1)`; distinct labels and
/// indices therefore map to unrelated streams, and the construction is
/// bit-exact across platforms.
pub fn derive_stream(master_seed: u64, label: &str, index: u64) -> ChaCha12Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut state = (master_seed ^ h)
        .wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(index.wrapping_add(1)));
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform in (0, 1]: (x >> 11) + 1 scaled by 2^-53, so the log in
/// Box-Muller never sees zero.
fn uniform_open_closed(rng: &mut impl RngCore) -> f64 {
    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in [0, 1).
fn uniform_closed_open(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64)
}

/// One CN(0,1) draw via the polar Box-Muller form
/// z = sqrt(-ln u1) * exp(2 pi i u2); |z|^2 is Exp(1), so E|z|^2 = 1 and
/// the real and imaginary parts are independent N(0, 1/2).
pub fn complex_gaussian(rng: &mut impl RngCore) -> C64 {
    let radius = (-uniform_open_closed(rng).ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * uniform_closed_open(rng);
    C64::new(radius * angle.cos(), radius * angle.sin())
}

/// Additive receiver noise z_r ~ CN(0,1).
pub fn noise_sample(rng: &mut impl RngCore) -> C64 {
    complex_gaussian(rng)
}

/// Samples coherence block `block_index`: an M x K matrix of i.i.d. CN(0,1)
/// entries, filled row-major from the stream ("block", block_index).
/// Deterministic given (master_seed, block_index), independent across
/// indices.
pub fn sample_block(cfg: &ChannelConfig, block_index: u64) -> ChannelBlock {
    let mut rng = derive_stream(cfg.master_seed, "block", block_index);
    let h = ComplexMatrix::from_fn(cfg.num_tx_antennas, cfg.num_users, |_, _| {
        complex_gaussian(&mut rng)
    });
    ChannelBlock { block_index, h }
}

/// Fills an M x K channel matrix from an already-derived stream; used by the
/// per-trial Monte Carlo loops that own their own stream.
pub fn sample_matrix(m: usize, k: usize, rng: &mut impl RngCore) -> ComplexMatrix {
    ComplexMatrix::from_fn(m, k, |_, _| complex_gaussian(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> ChannelConfig {
        ChannelConfig::new(2, 10, 10, seed).unwrap()
    }

    #[test]
    fn config_enforces_m_equals_k() {
        let c = ChannelConfig::new(3, 5, 2, 1).unwrap();
        assert_eq!(c.num_tx_antennas, 3);
        assert!(matches!(
            ChannelConfig::new(0, 5, 2, 1),
            Err(ChannelError::NoUsers)
        ));
        assert!(matches!(
            ChannelConfig::new(2, 0, 2, 1),
            Err(ChannelError::ZeroCoherence)
        ));
    }

    #[test]
    fn same_seed_and_index_reproduce() {
        let a = sample_block(&cfg(42), 7);
        let b = sample_block(&cfg(42), 7);
        assert_eq!(a.h, b.h);
        let c = sample_block(&cfg(42), 8);
        assert_ne!(a.h, c.h);
        let d = sample_block(&cfg(43), 7);
        assert_ne!(a.h, d.h);
    }

    #[test]
    fn entry_variance_is_unit() {
        let c = cfg(1);
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for idx in 0..25_000u64 {
            let blk = sample_block(&c, idx);
            for i in 0..2 {
                for j in 0..2 {
                    sum_sq += blk.h.get(i, j).norm_sqr();
                    count += 1;
                }
            }
        }
        let var = sum_sq / count as f64;
        assert!((var - 1.0).abs() < 0.02, "empirical E|h|^2 = {var}");
    }

    #[test]
    fn column_energy_matches_dimension() {
        let c = cfg(2);
        let mut sum = 0.0;
        let mut count = 0usize;
        for idx in 0..50_000u64 {
            let blk = sample_block(&c, idx);
            for r in 0..2 {
                let col = blk.user_channel(r);
                sum += col.iter().map(|z| z.norm_sqr()).sum::<f64>();
                count += 1;
            }
        }
        let mean = sum / count as f64;
        assert!((mean - 2.0).abs() < 0.04, "empirical E|h_r|^2 = {mean}");
    }

    #[test]
    fn noise_moments() {
        let mut rng = derive_stream(5, "noise-test", 0);
        let n = 100_000;
        let mut sum = C64::new(0.0, 0.0);
        let mut sum_sq = 0.0;
        let mut cross = 0.0;
        for _ in 0..n {
            let z = noise_sample(&mut rng);
            sum += z;
            sum_sq += z.norm_sqr();
            cross += z.re * z.im;
        }
        let mean = sum / n as f64;
        assert!(mean.norm() < 0.02, "noise mean {mean}");
        let var = sum_sq / n as f64;
        assert!((var - 1.0).abs() < 0.02, "noise variance {var}");
        let cov = cross / n as f64;
        assert!(cov.abs() < 0.02, "re/im covariance {cov}");
    }

    #[test]
    fn sampled_blocks_are_full_rank() {
        let c = cfg(3);
        for idx in 0..10_000u64 {
            let blk = sample_block(&c, idx);
            assert!(
                blk.min_singular_value() > 1e-9,
                "rank-deficient draw at block {idx}"
            );
        }
    }

    #[test]
    fn derived_streams_differ_by_label() {
        let mut a = derive_stream(9, "block", 0);
        let mut b = derive_stream(9, "trial", 0);
        assert_ne!(a.next_u64(), b.next_u64());
    }
}
