//! Double-precision sum-product decoding with a flooding schedule.

use super::{DecodeError, DecodeResult};
use crate::code::QcCode;

// keeps atanh finite
const TANH_CLAMP: f64 = 1.0 - 1e-15;

/// Belief propagation on channel LLRs (positive favours bit 0).
pub fn decode_bp(
    code: &QcCode,
    llrs: &[f64],
    max_iterations: usize,
    early_termination: bool,
) -> Result<DecodeResult, DecodeError> {
    let n = code.n();
    if llrs.len() != n {
        return Err(DecodeError::ChannelLength {
            expected: n,
            found: llrs.len(),
        });
    }
    let (dv, dc, z) = (code.dv(), code.dc(), code.lift());
    // edge (l, n) at l * n + n, as in the fixed-point decoder
    let mut v2c: Vec<f64> = (0..dv).flat_map(|_| llrs.iter().copied()).collect();
    let mut c2v = vec![0.0; dv * n];
    let mut hard: Vec<u8> = llrs.iter().map(|&l| (l < 0.0) as u8).collect();
    let mut tanh = vec![0.0; dc];
    let mut suffix = vec![0.0; dc + 1];
    let mut trace = Vec::with_capacity(max_iterations);
    let mut used = 0;
    let mut converged = max_iterations == 0 && code.syndrome_weight(&hard) == 0;
    for it in 0..max_iterations {
        for m in 0..code.m() {
            let l = m / z;
            let vars = code.check_neighbors(m);
            for (k, &v) in vars.iter().enumerate() {
                tanh[k] = (0.5 * v2c[l * n + v as usize]).tanh();
            }
            suffix[dc] = 1.0;
            for k in (0..dc).rev() {
                suffix[k] = suffix[k + 1] * tanh[k];
            }
            let mut prefix = 1.0;
            for (k, &v) in vars.iter().enumerate() {
                let p = (prefix * suffix[k + 1]).clamp(-TANH_CLAMP, TANH_CLAMP);
                c2v[l * n + v as usize] = 2.0 * p.atanh();
                prefix *= tanh[k];
            }
        }
        for i in 0..n {
            let total: f64 = llrs[i] + (0..dv).map(|l| c2v[l * n + i]).sum::<f64>();
            for l in 0..dv {
                v2c[l * n + i] = total - c2v[l * n + i];
            }
            hard[i] = (total < 0.0) as u8;
        }
        used = it + 1;
        let w = code.syndrome_weight(&hard);
        trace.push(w);
        converged = w == 0;
        if converged && early_termination {
            break;
        }
    }
    Ok(DecodeResult {
        hard_bits: hard,
        iterations_used: used,
        converged,
        syndrome_trace: trace,
        ..DecodeResult::default()
    })
}
