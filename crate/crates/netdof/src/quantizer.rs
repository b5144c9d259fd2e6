//! Direction-only channel quantization.
//!
//! Three layers:
//! - explicit random vector codebooks (RVQ) for small bit budgets,
//! - a statistical error-synthesis model for bit budgets where 2^Q is
//!   astronomically large: the squared angular error of RVQ is exactly the
//!   minimum of 2^Q i.i.d. Beta(M-1, 1) variables, which can be sampled in
//!   closed form without enumerating a codebook,
//! - the closed-form optimal-codebook bounds on E[sin^2 theta].
//!
//! Only the channel direction is quantized; magnitudes never leave the
//! receiver. Quantized directions carry the phase convention that <h, e> is
//! real and nonnegative, which removes a gauge freedom and keeps tests
//! deterministic.

use crate::numerics::{vec_dot, vec_norm, C64};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

/// Explicit enumeration stops here; beyond it use the statistical model.
pub const MAX_EXPLICIT_BITS: u32 = 20;

#[derive(Debug, Error)]
pub enum QuantizerError {
    #[error("codebook with Q = {bits} bits exceeds the explicit cap of {MAX_EXPLICIT_BITS}; use the statistical model")]
    CodebookTooLarge { bits: u32 },
    #[error("direction quantization needs at least two dimensions")]
    ScalarDirection,
    #[error("alpha must be nonnegative, got {alpha}")]
    NegativeAlpha { alpha: f64 },
}

/// A fixed vector quantization codebook of 2^Q unit-norm M-vectors.
#[derive(Debug, Clone)]
pub struct Codebook {
    dimension: usize,
    bits: u32,
    vectors: Vec<Vec<C64>>,
}

impl Codebook {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, index: usize) -> &[C64] {
        &self.vectors[index]
    }
}

/// Where a quantized direction came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CsiSource {
    ExplicitCodebook,
    StatisticalModel,
}

/// A quantized channel direction together with its true angular error.
#[derive(Debug, Clone)]
pub struct QuantizedCsi {
    /// Unit-norm quantized direction, phase-aligned so <h, direction> >= 0.
    pub direction: Vec<C64>,
    /// sin^2 of the angle between the true channel and the direction.
    pub sin2_theta: f64,
    /// Feedback bits Q that produced this direction.
    pub bits: u32,
    /// Scaling exponent alpha the bit budget was derived from; 0 when the
    /// caller fixed Q directly.
    pub alpha: f64,
    pub source: CsiSource,
}

impl QuantizedCsi {
    /// Error-free CSI: the direction is the normalized channel itself.
    /// Stands in for the infinite-feedback limit in tests and examples.
    pub fn perfect(h: &[C64]) -> Self {
        let norm = vec_norm(h);
        assert!(norm > 0.0, "cannot normalize the zero vector");
        Self {
            direction: h.iter().map(|z| z / norm).collect(),
            sin2_theta: 0.0,
            bits: 0,
            alpha: 0.0,
            source: CsiSource::StatisticalModel,
        }
    }
}

/// 2^Q i.i.d. uniform directions on the unit sphere of C^M.
pub fn build_random_codebook<R: Rng>(
    m: usize,
    q: u32,
    rng: &mut R,
) -> Result<Codebook, QuantizerError> {
    if m < 2 {
        return Err(QuantizerError::ScalarDirection);
    }
    if q > MAX_EXPLICIT_BITS {
        return Err(QuantizerError::CodebookTooLarge { bits: q });
    }
    let count = 1usize << q;
    let vectors = (0..count).map(|_| random_direction(m, rng)).collect();
    Ok(Codebook {
        dimension: m,
        bits: q,
        vectors,
    })
}

/// Uniform direction on the unit sphere of C^M: normalized i.i.d. Gaussian.
pub fn random_direction<R: Rng>(m: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..m)
            .map(|_| crate::channel::complex_gaussian(rng))
            .collect();
        let norm = vec_norm(&v);
        if norm > 1e-12 {
            return v.iter().map(|z| z / norm).collect();
        }
    }
}

/// Quantizes `h` to the codeword minimizing sin^2 of the angle to it; ties
/// break toward the lowest index. Scale-invariant in `h`.
pub fn quantize(h: &[C64], cb: &Codebook) -> QuantizedCsi {
    let h_norm = vec_norm(h);
    assert!(h_norm > 0.0, "cannot quantize the zero vector");
    assert_eq!(h.len(), cb.dimension, "dimension mismatch");

    let mut best_index = 0usize;
    let mut best_cos2 = -1.0f64;
    for (idx, w) in cb.vectors.iter().enumerate() {
        let cos2 = vec_dot(h, w).norm_sqr() / (h_norm * h_norm);
        if cos2 > best_cos2 {
            best_cos2 = cos2;
            best_index = idx;
        }
    }
    let chosen = &cb.vectors[best_index];
    let direction = align_phase(h, chosen);
    let sin2 = (1.0 - best_cos2).clamp(0.0, 1.0);
    QuantizedCsi {
        direction,
        sin2_theta: sin2,
        bits: cb.bits,
        alpha: 0.0,
        source: CsiSource::ExplicitCodebook,
    }
}

/// Rotates `w` by a unit phase so that <h, w> becomes real nonnegative.
fn align_phase(h: &[C64], w: &[C64]) -> Vec<C64> {
    let c = vec_dot(h, w);
    if c.norm() == 0.0 {
        return w.to_vec();
    }
    let phase = c.conj() / c.norm();
    w.iter().map(|z| z * phase).collect()
}

/// Draws sin^2 theta with the exact RVQ law: the minimum of n = 2^Q i.i.d.
/// Beta(M-1, 1) variables, sampled by inverting
/// P(min > x) = (1 - x^{M-1})^n, i.e.
/// x = (1 - (1 - u)^{1/n})^{1/(M-1)} = (-expm1(ln(v) / 2^Q))^{1/(M-1)}.
pub fn sample_min_beta_sin2<R: Rng>(m: usize, q: u32, rng: &mut R) -> f64 {
    assert!(m >= 2, "need at least two dimensions");
    assert!(q >= 1, "need at least one feedback bit");
    let v: f64 = loop {
        let u = rng.gen::<f64>();
        if u > 0.0 {
            break u;
        }
    };
    let n = (q as f64).exp2();
    let inner = -(v.ln() / n).exp_m1();
    inner.powf(1.0 / (m - 1) as f64).clamp(0.0, 1.0)
}

/// Synthesizes a quantized direction at a bit budget too large to enumerate:
/// draws sin^2 theta from the closed-form RVQ law and places the error
/// uniformly in the orthogonal complement of `h`, so
/// e = cos(theta) h/|h| + sin(theta) d with d a unit vector orthogonal to h.
pub fn synthesize_quantized_direction<R: Rng>(h: &[C64], q: u32, rng: &mut R) -> QuantizedCsi {
    let m = h.len();
    let h_norm = vec_norm(h);
    assert!(h_norm > 0.0, "cannot quantize the zero vector");
    assert!(m >= 2, "need at least two dimensions");

    let sin2 = sample_min_beta_sin2(m, q, rng);
    let h_unit: Vec<C64> = h.iter().map(|z| z / h_norm).collect();

    // error direction: Gaussian draw projected out of h, renormalized
    let d = loop {
        let g: Vec<C64> = (0..m)
            .map(|_| crate::channel::complex_gaussian(rng))
            .collect();
        let dot = vec_dot(&h_unit, &g);
        let mut d: Vec<C64> = g
            .iter()
            .zip(&h_unit)
            .map(|(gi, hi)| gi - dot * hi)
            .collect();
        let norm = vec_norm(&d);
        if norm > 1e-12 {
            for z in d.iter_mut() {
                *z /= norm;
            }
            break d;
        }
    };

    let cos_t = (1.0 - sin2).max(0.0).sqrt();
    let sin_t = sin2.sqrt();
    let direction: Vec<C64> = h_unit
        .iter()
        .zip(&d)
        .map(|(hi, di)| hi * cos_t + di * sin_t)
        .collect();

    QuantizedCsi {
        direction,
        sin2_theta: sin2,
        bits: q,
        alpha: 0.0,
        source: CsiSource::StatisticalModel,
    }
}

/// Closed-form lower and upper bounds on E[sin^2 theta] for the optimal
/// M-dimensional codebook at Q bits:
/// ((M-1)/M) 2^{-Q/(M-1)} and 2^{-Q/(M-1)}.
pub fn optimal_error_bounds(m: usize, q: u32) -> Result<(f64, f64), QuantizerError> {
    if m < 2 {
        return Err(QuantizerError::ScalarDirection);
    }
    let upper = (-(q as f64) / (m - 1) as f64).exp2();
    let lower = upper * (m - 1) as f64 / m as f64;
    Ok((lower, upper))
}

/// Bit budget under the scaling Q = alpha (K-1) log2 P, rounded to the
/// nearest integer with a floor of 1 bit.
pub fn bits_for_alpha(alpha: f64, k: usize, p: f64) -> Result<u32, QuantizerError> {
    if alpha < 0.0 {
        return Err(QuantizerError::NegativeAlpha { alpha });
    }
    assert!(k >= 2, "need at least two users");
    assert!(p > 1.0, "power must exceed 1");
    let q = (alpha * (k - 1) as f64 * p.log2()).round();
    Ok((q as u32).max(1))
}

/// How the per-user feedback budget scales with transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FeedbackBits {
    /// Q = alpha (K-1) log2 P.
    Alpha(f64),
    /// Power-independent Q (the bounded-feedback, "alpha -> 0" regime).
    Fixed(u32),
}

impl FeedbackBits {
    /// Resolves the budget to a concrete bit count at power `p`.
    pub fn bits(&self, k: usize, p: f64) -> Result<u32, QuantizerError> {
        match *self {
            FeedbackBits::Alpha(a) => bits_for_alpha(a, k, p),
            FeedbackBits::Fixed(q) => Ok(q.max(1)),
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            FeedbackBits::Alpha(a) => a,
            FeedbackBits::Fixed(_) => 0.0,
        }
    }
}
