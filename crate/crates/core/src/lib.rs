//! Coarsely quantized decoding of regular quasi-cyclic LDPC codes with
//! lookup tables chosen to maximize mutual information.
//!
//! The usual flow is [`code`] for the parity-check structure, [`design`] to
//! build a decoder program by density evolution, [`decoder`] to run it and
//! [`sim`] for Monte Carlo error rates. [`complexity`] holds the gate-count
//! model used to compare decoder architectures.

pub mod code;
pub mod complexity;
pub mod config;
pub mod decoder;
pub mod design;
pub mod im;
pub mod sim;

// The guide is doc-tested by treating each chapter as a module doc.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/codes.md")]
    mod codes {}
    #[doc = include_str!("../../../book/src/quantizers.md")]
    mod quantizers {}
    #[doc = include_str!("../../../book/src/programs.md")]
    mod programs {}
    #[doc = include_str!("../../../book/src/decoding.md")]
    mod decoding {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/complexity.md")]
    mod complexity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
