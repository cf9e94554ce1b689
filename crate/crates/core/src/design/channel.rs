//! Channel quantization for BPSK over AWGN.

use statrs::distribution::{ContinuousCDF, Normal};

use super::DesignError;
use crate::im::quantize::{cell_count, label_of_cell};
use crate::im::{design_mim_quantizer, JointPmf, ThresholdQuantizer};

/// Default number of grid points used to discretize the channel output.
pub const DEFAULT_CHANNEL_GRID: usize = 2048;

/// A channel quantizer together with the joint pmf of `(b, t_ch)` it induces.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub sigma: f64,
    pub quantizer: ThresholdQuantizer,
    /// Joint pmf over channel labels.
    pub pmf: JointPmf,
    pub mutual_information: f64,
}

fn normal(sigma: f64) -> Result<Normal, DesignError> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(DesignError::Invalid(format!("noise deviation {sigma} must be positive")));
    }
    Normal::new(1.0, sigma).map_err(|e| DesignError::Invalid(e.to_string()))
}

// p(y in [lo, hi) | x = +1); x = +1 carries b = 0
fn interval_mass(n: &Normal, lo: f64, hi: f64) -> f64 {
    // upper tail differences are more accurate for intervals above the mean
    if lo > 1.0 {
        n.sf(lo) - n.sf(hi)
    } else {
        n.cdf(hi) - n.cdf(lo)
    }
}

/// Exact joint pmf of `(b, q(y))` for equiprobable BPSK over AWGN with noise
/// deviation `sigma` and a symmetric threshold quantizer.
pub fn channel_pmf(sigma: f64, q: &ThresholdQuantizer) -> Result<JointPmf, DesignError> {
    let n = normal(sigma)?;
    let bits = q.bits();
    let b = q.boundaries();
    let k = cell_count(bits);
    let mut given_zero = Vec::with_capacity(k);
    for c in 0..k {
        let lo = if c == 0 { f64::NEG_INFINITY } else { b[c - 1] };
        let hi = if c == k - 1 { f64::INFINITY } else { b[c] };
        given_zero.push(interval_mass(&n, lo, hi).max(0.0));
    }
    let total: f64 = given_zero.iter().sum();
    given_zero.iter_mut().for_each(|p| *p /= total);
    let values: Vec<f64> = (0..k).map(|c| label_of_cell(c, bits) as f64).collect();
    Ok(JointPmf::symmetric_from_conditional(&values, &given_zero)?)
}

/// Discretizes the channel output onto `grid` equal-width bins over
/// `[-(1 + 6 sigma), 1 + 6 sigma]` (outer bins open) and returns the joint pmf
/// with one point per bin centre.
pub fn discretized_channel(sigma: f64, grid: usize) -> Result<JointPmf, DesignError> {
    if grid < 4 || grid % 2 != 0 {
        return Err(DesignError::Invalid(format!("channel grid {grid} must be even and >= 4")));
    }
    let n = normal(sigma)?;
    let r = 1.0 + 6.0 * sigma;
    let step = 2.0 * r / grid as f64;
    let mut values = Vec::with_capacity(grid);
    let mut given_zero = Vec::with_capacity(grid);
    for i in 0..grid {
        let lo = if i == 0 { f64::NEG_INFINITY } else { -r + step * i as f64 };
        let hi = if i == grid - 1 { f64::INFINITY } else { -r + step * (i + 1) as f64 };
        values.push(-r + step * (i as f64 + 0.5));
        given_zero.push(interval_mass(&n, lo, hi).max(0.0));
    }
    let total: f64 = given_zero.iter().sum();
    given_zero.iter_mut().for_each(|p| *p /= total);
    Ok(JointPmf::symmetric_from_conditional(&values, &given_zero)?)
}

/// Information-maximizing symmetric `w_ch`-bit channel quantizer.
pub fn design_channel_quantizer(sigma: f64, bits: u32, grid: usize) -> Result<ChannelModel, DesignError> {
    let min_grid = cell_count(bits) << 4;
    if grid < min_grid {
        return Err(DesignError::Invalid(format!(
            "channel grid {grid} too coarse for {bits}-bit quantizer (need >= {min_grid})"
        )));
    }
    let fine = discretized_channel(sigma, grid)?;
    let design = design_mim_quantizer(&fine, bits, true)?;
    let pmf = channel_pmf(sigma, &design.quantizer)?;
    let mutual_information = pmf.mutual_information();
    if mutual_information < 1e-9 {
        return Err(DesignError::Degenerate(format!("channel carries no information at sigma {sigma}")));
    }
    Ok(ChannelModel {
        sigma,
        quantizer: design.quantizer,
        pmf,
        mutual_information,
    })
}

/// Symmetric channel quantizer with thresholds at multiples of `step`.
pub fn uniform_channel_quantizer(bits: u32, step: f64) -> Result<ThresholdQuantizer, DesignError> {
    let half = cell_count(bits) as i64 / 2;
    let boundaries = (-(half - 1)..half).map(|k| k as f64 * step).collect();
    Ok(ThresholdQuantizer::new(bits, boundaries)?)
}

/// Uniform channel quantizer whose step maximizes `I(B; T_ch)`.
pub fn design_uniform_channel(sigma: f64, bits: u32) -> Result<ChannelModel, DesignError> {
    let mut best: Option<ChannelModel> = None;
    for i in 1..=400 {
        let step = i as f64 * 0.005;
        let quantizer = uniform_channel_quantizer(bits, step)?;
        let pmf = channel_pmf(sigma, &quantizer)?;
        let mi = pmf.mutual_information();
        if best.as_ref().is_none_or(|b| mi > b.mutual_information) {
            best = Some(ChannelModel {
                sigma,
                quantizer,
                pmf,
                mutual_information: mi,
            });
        }
    }
    Ok(best.expect("non-empty scan"))
}

#[cfg(test)]
mod tests {
    use super::*;

    // I(B;T) for symmetric positive thresholds, computed directly from erfc
    fn mi_of_thresholds(sigma: f64, pos: &[f64]) -> f64 {
        let q = |x: f64| 0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2);
        let mut edges = vec![0.0];
        edges.extend_from_slice(pos);
        edges.push(f64::INFINITY);
        let mut mi = 0.0;
        for w in edges.windows(2) {
            // P(y in [a,b) | +1) and P(y in [a,b) | -1)
            let p = q((w[0] - 1.0) / sigma) - q((w[1] - 1.0) / sigma);
            let m = q((w[0] + 1.0) / sigma) - q((w[1] + 1.0) / sigma);
            let avg = 0.5 * (p + m);
            // the mirrored cell contributes the same amount
            for a in [p, m] {
                if a > 0.0 {
                    mi += a * (a / avg).log2();
                }
            }
        }
        mi
    }

    #[test]
    fn three_bit_channel_matches_exhaustive_search() {
        let sigma = 0.4887;
        let model = design_channel_quantizer(sigma, 3, DEFAULT_CHANNEL_GRID).unwrap();
        let mut best = 0.0f64;
        let step = 0.04;
        let n = 60;
        for a in 1..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    let t = [a as f64 * step, b as f64 * step, c as f64 * step];
                    best = best.max(mi_of_thresholds(sigma, &t));
                }
            }
        }
        let pos: Vec<f64> = model.quantizer.boundaries()[4..].to_vec();
        let direct = mi_of_thresholds(sigma, &pos);
        assert!((direct - model.mutual_information).abs() < 1e-9);
        assert!(model.mutual_information >= best - 1e-4, "{} vs {best}", model.mutual_information);
        assert!((model.mutual_information - best).abs() < 1e-3);
    }

    #[test]
    fn channel_quantizer_is_symmetric() {
        let m = design_channel_quantizer(0.7, 4, 1024).unwrap();
        assert!(m.quantizer.is_symmetric());
        assert!(m.pmf.is_symmetric(1e-12));
        assert!(m.pmf.is_llr_monotone());
        assert!((m.pmf.bit_marginal()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(design_channel_quantizer(0.0, 3, 1024), Err(DesignError::Invalid(_))));
        assert!(matches!(design_channel_quantizer(0.5, 4, 64), Err(DesignError::Invalid(_))));
        assert!(matches!(discretized_channel(0.5, 33), Err(DesignError::Invalid(_))));
    }

    #[test]
    fn one_bit_channel_is_hard_decision() {
        let sigma = 0.8;
        let m = design_channel_quantizer(sigma, 1, 512).unwrap();
        assert_eq!(m.quantizer.boundaries(), &[0.0]);
        let eps = Normal::new(0.0, 1.0).unwrap().sf(1.0 / sigma);
        let h = -eps * eps.log2() - (1.0 - eps) * (1.0 - eps).log2();
        assert!((m.mutual_information - (1.0 - h)).abs() < 1e-9);
    }
}
