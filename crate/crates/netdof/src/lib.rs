//! Net degrees-of-freedom analysis and link-level simulation for the K-user
//! MISO broadcast channel with delayed finite-rate feedback.
//!
//! A base station with K antennas serves K single-antenna receivers over a
//! block-fading channel. Receivers quantize their channel directions to Q
//! bits and feed them back with a delay; the crate compares three ways of
//! spending that feedback:
//!
//! - **retrospective transmission** (`mat`): exploit *stale* CSI by
//!   retransmitting overheard symbol combinations so each receiver can
//!   zero-force the aligned interference;
//! - **zero-forcing precoding** (`baselines`): treat the delayed quantized
//!   CSI as a prediction of the current channel and orthogonalize users;
//! - **single-user transmission** (`baselines`): one stream, no feedback.
//!
//! The figure of merit is the *net* multiplexing gain — the capacity prelog
//! minus the prelog of the feedback rate — and the crate provides both exact
//! rational formula evaluation (`analysis`, `planner`) and seeded Monte
//! Carlo rate simulation with fitted slopes (`mat`, `baselines`,
//! `analysis::estimate_dof_slope`). The `verify` module re-derives the
//! supporting linear-algebra identities numerically, and `cli` exposes
//! everything as reproducible batch commands with CSV/JSON output.
//!
//! Start with the runnable examples:
//!
//! ```bash
//! cargo run --release --example net_dof_sweep
//! cargo run --release --example regime_planner
//! cargo run --release --example dof_slopes
//! ```

pub mod analysis;
pub mod baselines;
pub mod channel;
pub mod cli;
pub mod exact;
pub mod mat;
pub mod numerics;
pub mod planner;
pub mod quantizer;
pub mod verify;

pub use analysis::{DofEstimate, NetDofReport, RateSample, Scheme};
pub use channel::{ChannelBlock, ChannelConfig};
pub use mat::{LinearSystem, MatDims, MatRound2User};
pub use numerics::{ComplexMatrix, SvdResult, C64};
pub use quantizer::{Codebook, FeedbackBits, QuantizedCsi};
