//! Fixed-point message-passing decoding driven by a [`DecoderProgram`],
//! plus floating-point belief propagation as a reference.

mod bp;
mod engine;
pub mod nodes;
mod omsq;

use thiserror::Error;

pub use bp::decode_bp;
pub use engine::{decode, DecodeOptions, Decoder, VnUpdate};
pub use omsq::{decode_omsq, omsq_config, omsq_program};

#[cfg(doc)]
use crate::design::DecoderProgram;

/// A message label: sign-magnitude integer, never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(transparent)]
pub struct Msg(i8);

impl Msg {
    /// `None` for zero.
    pub fn new(value: i8) -> Option<Msg> {
        (value != 0).then_some(Msg(value))
    }

    #[inline]
    pub(crate) fn from_parts(negative: bool, magnitude: u8) -> Msg {
        debug_assert!(magnitude > 0 && magnitude <= 64);
        let m = magnitude as i8;
        Msg(if negative { -m } else { m })
    }

    #[inline]
    pub fn value(self) -> i8 {
        self.0
    }

    #[inline]
    pub fn magnitude(self) -> u8 {
        self.0.unsigned_abs()
    }

    #[inline]
    pub fn is_negative(self) -> bool {
        self.0 < 0
    }
}

/// Outcome of decoding one received word.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecodeResult {
    /// Hard decisions, one byte (0 or 1) per code bit.
    pub hard_bits: Vec<u8>,
    pub iterations_used: usize,
    /// The hard decisions satisfy every parity check.
    pub converged: bool,
    /// Syndrome weight after every iteration.
    pub syndrome_trace: Vec<usize>,
    /// Accumulator reads that had to be clipped.
    pub saturations: u64,
    /// Hard decisions taken on an exactly zero posterior sum (decided as 0).
    pub ties: u64,
    /// Three-minimum states rebuilt from message memory.
    pub min_refreshes: u64,
}

impl DecodeResult {
    pub fn bit_errors(&self, codeword: &[u8]) -> usize {
        self.hard_bits.iter().zip(codeword).filter(|(a, b)| a != b).count()
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DecodeError {
    #[error("program and code do not match: {0}")]
    DimensionMismatch(String),
    #[error("expected {expected} channel messages, found {found}")]
    ChannelLength { expected: usize, found: usize },
    #[error("channel message {0} outside the channel alphabet")]
    InvalidChannelMessage(i32),
    #[error("{0} needs a program whose check messages keep one reconstruction")]
    NotStationary(&'static str),
    #[error("unsupported decoder setting: {0}")]
    Unsupported(String),
}
