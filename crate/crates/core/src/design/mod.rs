//! Decoder design: channel quantization, density evolution and the
//! resulting decoder program.

pub mod channel;
pub mod evolve;
pub mod program;

use thiserror::Error;

use crate::im::ImError;

pub use channel::{channel_pmf, design_channel_quantizer, design_uniform_channel, ChannelModel, DEFAULT_CHANNEL_GRID};
pub use evolve::{de_threshold_ebn0, design_program, sigma_from_ebn0, DesignConfig, Scaling, VnQuantizerKind};
pub use program::{CnKernel, CnStage, DecoderProgram, IterationStages, ProgramError, Schedule, VnStage};

#[derive(Error, Debug)]
pub enum DesignError {
    #[error(transparent)]
    Kernel(#[from] ImError),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("invalid design parameters: {0}")]
    Invalid(String),
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
}
