//! Quantized offset min-sum decoding as a fixed-table program.

use super::{DecodeError, DecodeOptions, DecodeResult, Decoder};
use crate::code::QcCode;
use crate::design::{design_program, CnKernel, DecoderProgram, DesignConfig, DesignError, Schedule};

/// Design parameters of a `w`-bit offset min-sum decoder. Messages and
/// channel values use the levels `2t - sign(t)`; variable sums are clipped to
/// `ceil(log2(d_v 2^w))` magnitude bits.
pub fn omsq_config(bits: u32, offset: i32, schedule: Schedule, iterations: usize) -> DesignConfig {
    DesignConfig {
        schedule,
        cn_kernel: CnKernel::Omsq,
        msg_bits: bits,
        channel_bits: bits,
        recon_bits: bits + 1,
        iterations,
        omsq_offset: offset,
        ..DesignConfig::default()
    }
}

/// Offset min-sum program; the channel step is chosen to maximize the
/// channel information at `sigma`.
pub fn omsq_program(
    sigma: f64,
    dv: usize,
    dc: usize,
    bits: u32,
    offset: i32,
    schedule: Schedule,
    iterations: usize,
) -> Result<DecoderProgram, DesignError> {
    design_program(sigma, dv, dc, &omsq_config(bits, offset, schedule, iterations))
}

/// Quantizes received samples and runs offset min-sum decoding.
pub fn decode_omsq(
    code: &QcCode,
    samples: &[f64],
    sigma: f64,
    bits: u32,
    offset: i32,
    schedule: Schedule,
    iterations: usize,
) -> Result<DecodeResult, DecodeError> {
    let program = omsq_program(sigma, code.dv(), code.dc(), bits, offset, schedule, iterations)
        .map_err(|e| DecodeError::Unsupported(e.to_string()))?;
    let mut dec = Decoder::new(code, &program, DecodeOptions::default())?;
    let mut labels = Vec::with_capacity(samples.len());
    dec.quantize_channel(samples, &mut labels);
    dec.decode(&labels)
}
