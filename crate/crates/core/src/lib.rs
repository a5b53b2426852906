//! Neural combinatorial optimization for matrix-input TSP and the quadratic
//! assignment problem (QAP).
//!
//! The crate bundles everything needed to train and run graph pointer
//! networks on explicit-matrix problems:
//!
//! - [`instance`]: TSPLIB / QAPLIB parsing, synthetic instance generation,
//!   and the TSP-to-QAP reduction.
//! - [`tensor`]: a small dense-tensor library with reverse-mode automatic
//!   differentiation and the Adam optimizer.
//! - [`gpn`]: graph embedding encoder, pointer-attention decoder, softmax
//!   policy, and an optional LSTM cell.
//! - [`dfp`]: the implicit distance-flow product matrix with block,
//!   element, and representative indexing.
//! - [`solver`]: decoding pipelines for matrix TSP and two-stage QAP,
//!   objective evaluation, and the gap metric.
//! - [`training`]: REINFORCE with baseline, learning-rate schedule,
//!   checkpointing, and the sparsity-routed model bank.
//! - [`baselines`]: greedy two-stage search, random permutations,
//!   pairwise-swap local search, and a brute-force oracle.

pub mod baselines;
pub mod dfp;
pub mod error;
pub mod gpn;
pub mod instance;
pub mod matrix;
pub mod solver;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
