//! Reconstruction tables: message label to a signed integer proportional to
//! the message LLR.

use super::pmf::JointPmf;
use super::quantize::{cell_count, cell_of_label, label_of_cell, max_label};
use super::ImError;

/// Rounding grid for reconstruction values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Any,
    Odd,
    Even,
}

impl Parity {
    fn round(self, x: f64, max_mag: i32) -> i32 {
        let x = x.max(0.0);
        let (v, top) = match self {
            Parity::Any => (x.round() as i64, max_mag),
            Parity::Odd => (
                2 * (x / 2.0).floor() as i64 + 1,
                if max_mag % 2 == 1 { max_mag } else { max_mag - 1 },
            ),
            Parity::Even => (
                2 * (x / 2.0).round() as i64,
                if max_mag % 2 == 0 { max_mag } else { max_mag - 1 },
            ),
        };
        v.min(top as i64) as i32
    }
}

/// Odd-symmetric lookup table from `w`-bit labels to integers, with
/// magnitudes non-decreasing in `|t|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconTable {
    bits: u32,
    values: Vec<i32>,
}

impl ReconTable {
    /// `values[k]` is the reconstruction of the label of cell `k`.
    pub fn new(bits: u32, values: Vec<i32>) -> Result<Self, ImError> {
        let k = cell_count(bits);
        if values.len() != k {
            return Err(ImError::LengthMismatch);
        }
        for c in 0..k / 2 {
            if values[c] != -values[k - 1 - c] {
                return Err(ImError::Asymmetric);
            }
        }
        // positive half: cells k/2 .. k, |t| increasing
        let pos = &values[k / 2..];
        if pos.iter().any(|&v| v < 0) || pos.windows(2).any(|w| w[1] < w[0]) {
            return Err(ImError::NonMonotoneTable);
        }
        Ok(ReconTable { bits, values })
    }

    pub fn zeros(bits: u32) -> Self {
        ReconTable {
            bits,
            values: vec![0; cell_count(bits)],
        }
    }

    /// Table with `phi(t) = t`.
    pub fn identity(bits: u32) -> Self {
        ReconTable {
            bits,
            values: (0..cell_count(bits)).map(|c| label_of_cell(c, bits)).collect(),
        }
    }

    /// Rounds `scale * L(t)` onto the requested grid, clamped to `max_mag`.
    /// `llrs` holds one (odd-symmetric, |t|-monotone) LLR per cell.
    pub fn from_llrs(bits: u32, llrs: &[f64], scale: f64, max_mag: i32, parity: Parity) -> Self {
        let k = cell_count(bits);
        let mut values = vec![0; k];
        for c in k / 2..k {
            let v = parity.round(scale * llrs[c], max_mag);
            values[c] = v;
            values[k - 1 - c] = -v;
        }
        // rounding keeps monotonicity, but clamp out any float noise
        for c in k / 2 + 1..k {
            if values[c] < values[c - 1] {
                values[c] = values[c - 1];
                values[k - 1 - c] = -values[c];
            }
        }
        ReconTable { bits, values }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Values indexed by cell.
    pub fn values(&self) -> &[i32] {
        &self.values
    }

    #[inline]
    pub fn get(&self, label: i32) -> i32 {
        self.values[cell_of_label(label, self.bits)]
    }

    pub fn max_magnitude(&self) -> i32 {
        self.values.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }
}

/// Per-cell LLRs `L(b | t)` of a pmf over `bits`-bit labels.
///
/// The result is odd-symmetric and non-decreasing in `|t|`; infinite LLRs
/// are capped at `cap` and labels without mass inherit their inner neighbour.
pub fn label_llrs(pmf: &JointPmf, bits: u32, cap: f64) -> Vec<f64> {
    let k = cell_count(bits);
    let half = max_label(bits);
    let mut pos = Vec::with_capacity(half as usize);
    let mut last = 0.0f64;
    for t in 1..=half {
        let [a0, a1] = pmf.prob_of(t as f64);
        let [b0, b1] = pmf.prob_of(-t as f64);
        // symmetrized: L(t) and -L(-t) describe the same quantity
        let num = a0 + b1;
        let den = a1 + b0;
        let l = if num + den <= 0.0 {
            last
        } else if den <= 0.0 {
            cap
        } else {
            (num / den).ln().clamp(0.0, cap)
        };
        last = last.max(l);
        pos.push(last);
    }
    let mut out = vec![0.0; k];
    for (i, &l) in pos.iter().enumerate() {
        let t = i as i32 + 1;
        out[cell_of_label(t, bits)] = l;
        out[cell_of_label(-t, bits)] = -l;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ReconTable::new(2, vec![-5, -1, 1, 5]).is_ok());
        assert_eq!(ReconTable::new(2, vec![-5, -1, 2, 5]), Err(ImError::Asymmetric));
        assert_eq!(ReconTable::new(2, vec![-1, -5, 5, 1]), Err(ImError::NonMonotoneTable));
        assert_eq!(ReconTable::new(2, vec![0, 0, 0]), Err(ImError::LengthMismatch));
    }

    #[test]
    fn lookup_by_label() {
        let t = ReconTable::new(2, vec![-9, -3, 3, 9]).unwrap();
        assert_eq!(t.get(-2), -9);
        assert_eq!(t.get(1), 3);
        assert_eq!(ReconTable::identity(3).get(-4), -4);
    }

    #[test]
    fn parity_rounding() {
        let llrs = [-3.0, -1.2, 1.2, 3.0];
        let odd = ReconTable::from_llrs(2, &llrs, 10.0, 31, Parity::Odd);
        assert!(odd.values().iter().all(|v| v.rem_euclid(2) == 1));
        let even = ReconTable::from_llrs(2, &llrs, 10.0, 31, Parity::Even);
        assert_eq!(even.values(), &[-30, -12, 12, 30]);
        let clipped = ReconTable::from_llrs(2, &llrs, 100.0, 31, Parity::Even);
        assert_eq!(clipped.max_magnitude(), 30);
        assert!(ReconTable::new(2, odd.values().to_vec()).is_ok());
    }

    #[test]
    fn llrs_of_label_pmf() {
        let pmf = JointPmf::symmetric_from_conditional(&[-2.0, -1.0, 1.0, 2.0], &[0.0, 0.2, 0.3, 0.5]).unwrap();
        let l = label_llrs(&pmf, 2, 20.0);
        assert!((l[2] - (0.3f64 / 0.2).ln()).abs() < 1e-12);
        assert_eq!(l[3], 20.0);
        assert_eq!(l[0], -20.0);
    }
}
