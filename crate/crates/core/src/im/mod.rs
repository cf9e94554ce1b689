//! Discrete probability machinery: joint pmfs of a code bit and an
//! observation, mutual information, information-maximizing quantizers and
//! reconstruction tables.

pub mod pmf;
pub mod quantize;
pub mod recon;

use thiserror::Error;

pub use pmf::{pmf_of_cn, pmf_of_cn_pair, pmf_of_sum, JointPmf, PairKernel};
pub use quantize::{
    apply_quantizer, cell_of_label, design_mim_quantizer, label_of_cell, labels, quantize_pmf,
    quantize_pmf_symmetric, Quantizer, QuantizerDesign, ThresholdQuantizer, UniformQuantizer,
};
pub use recon::{label_llrs, Parity, ReconTable};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ImError {
    #[error("pmf has no points")]
    EmptyPmf,
    #[error("pmf values must be finite")]
    NonFiniteValue,
    #[error("probabilities must be finite and non-negative")]
    NegativeProbability,
    #[error("pmf mass is {0}, expected 1")]
    NotNormalized(f64),
    #[error("pmfs have different bit marginals")]
    MassMismatch,
    #[error("pmf or table is not symmetric")]
    Asymmetric,
    #[error("lengths do not match")]
    LengthMismatch,
    #[error("unsupported bit width {0}")]
    UnsupportedWidth(u32),
    #[error("quantizer boundaries must be strictly increasing")]
    UnsortedBoundaries,
    #[error("{points} points cannot fill {cells} cells")]
    AlphabetTooSmall { points: usize, cells: usize },
    #[error("all probability mass sits on one point")]
    Degenerate,
    #[error("reconstruction magnitudes must be non-negative and non-decreasing in |t|")]
    NonMonotoneTable,
}
