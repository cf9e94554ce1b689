//! Message alphabets, quantizers and information-maximizing quantizer design.
//!
//! A `w`-bit message takes values in the sign-magnitude alphabet
//! `{-2^(w-1), ..., -1, +1, ..., +2^(w-1)}`. Zero is not a message. Cell `k`
//! of a `2^w`-cell quantizer (cells ordered by increasing LLR) carries the
//! label returned by [`label_of_cell`], so that cells `k` and `2^w - 1 - k`
//! carry opposite labels.

use std::ops::Range;

use super::pmf::{mi_term, JointPmf, MERGE_TOLERANCE};
use super::ImError;

/// Largest supported message width.
pub const MAX_BITS: u32 = 7;

#[inline]
pub fn cell_count(bits: u32) -> usize {
    1usize << bits
}

#[inline]
pub fn max_label(bits: u32) -> i32 {
    1i32 << (bits - 1)
}

/// Label of cell `cell` in a `2^bits`-cell quantizer.
#[inline]
pub fn label_of_cell(cell: usize, bits: u32) -> i32 {
    let half = max_label(bits);
    let k = cell as i32;
    if k < half {
        k - half
    } else {
        k - half + 1
    }
}

/// Inverse of [`label_of_cell`].
#[inline]
pub fn cell_of_label(label: i32, bits: u32) -> usize {
    debug_assert!(label != 0 && label.abs() <= max_label(bits));
    let half = max_label(bits);
    if label < 0 {
        (label + half) as usize
    } else {
        (label + half - 1) as usize
    }
}

/// All labels of the `bits`-bit alphabet in increasing order.
pub fn labels(bits: u32) -> Vec<i32> {
    (0..cell_count(bits)).map(|k| label_of_cell(k, bits)).collect()
}

fn check_bits(bits: u32) -> Result<(), ImError> {
    if bits == 0 || bits > MAX_BITS {
        return Err(ImError::UnsupportedWidth(bits));
    }
    Ok(())
}

/// Non-uniform quantizer: `2^w - 1` increasing thresholds on the value axis.
///
/// A value `y` falls into cell `#{boundaries <= y}`, so a value sitting
/// exactly on the middle threshold of a symmetric quantizer maps to `+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdQuantizer {
    bits: u32,
    boundaries: Vec<f64>,
}

impl ThresholdQuantizer {
    pub fn new(bits: u32, boundaries: Vec<f64>) -> Result<Self, ImError> {
        check_bits(bits)?;
        if boundaries.len() != cell_count(bits) - 1 {
            return Err(ImError::LengthMismatch);
        }
        if boundaries.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ImError::UnsortedBoundaries);
        }
        Ok(ThresholdQuantizer { bits, boundaries })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    #[inline]
    pub fn cell(&self, y: f64) -> usize {
        self.boundaries.partition_point(|&b| b <= y)
    }

    #[inline]
    pub fn apply(&self, y: f64) -> i32 {
        label_of_cell(self.cell(y), self.bits)
    }

    /// Boundaries mirror about zero with the middle one at zero.
    pub fn is_symmetric(&self) -> bool {
        let n = self.boundaries.len();
        (0..n).all(|i| (self.boundaries[i] + self.boundaries[n - 1 - i]).abs() < 1e-9)
    }
}

/// Shift-and-clip quantizer on integers:
/// `t = sign(y) * min(max(|y| >> shift, 1), 2^(w-1))` with `sign(0) = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniformQuantizer {
    bits: u32,
    shift: u32,
}

impl UniformQuantizer {
    pub fn new(bits: u32, shift: u32) -> Result<Self, ImError> {
        check_bits(bits)?;
        if shift > 31 {
            return Err(ImError::UnsupportedWidth(shift));
        }
        Ok(UniformQuantizer { bits, shift })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn shift(&self) -> u32 {
        self.shift
    }

    /// Largest output magnitude, `2^(w-1)`.
    pub fn clip(&self) -> i32 {
        max_label(self.bits)
    }

    #[inline]
    pub fn apply(&self, y: i64) -> i32 {
        let mag = (y.unsigned_abs() >> self.shift).clamp(1, self.clip() as u64) as i32;
        if y < 0 {
            -mag
        } else {
            mag
        }
    }
}

/// Either quantizer family, applied to an integer value.
#[derive(Debug, Clone, PartialEq)]
pub enum Quantizer {
    Threshold(ThresholdQuantizer),
    Uniform(UniformQuantizer),
}

impl Quantizer {
    pub fn bits(&self) -> u32 {
        match self {
            Quantizer::Threshold(q) => q.bits(),
            Quantizer::Uniform(q) => q.bits(),
        }
    }
}

/// Maps an integer observation to a message label.
pub fn apply_quantizer(q: &Quantizer, y: i64) -> i32 {
    match q {
        Quantizer::Threshold(t) => t.apply(y as f64),
        Quantizer::Uniform(u) => u.apply(y),
    }
}

/// Result of [`design_mim_quantizer`].
#[derive(Debug, Clone)]
pub struct QuantizerDesign {
    pub quantizer: ThresholdQuantizer,
    /// Joint pmf of the bit and the output label.
    pub compressed: JointPmf,
    /// `I(B; T)` of the compressed pmf, in bits.
    pub mutual_information: f64,
    /// Point ranges (indices into the input pmf) of every cell.
    pub cells: Vec<Range<usize>>,
}

// Prefix sums for O(1) cell information evaluation.
struct CellScorer {
    pre0: Vec<f64>,
    pre1: Vec<f64>,
    pb: [f64; 2],
}

impl CellScorer {
    fn new(probs: impl Iterator<Item = [f64; 2]>, pb: [f64; 2]) -> Self {
        let mut pre0 = vec![0.0];
        let mut pre1 = vec![0.0];
        for p in probs {
            pre0.push(pre0.last().unwrap() + p[0]);
            pre1.push(pre1.last().unwrap() + p[1]);
        }
        CellScorer { pre0, pre1, pb }
    }

    #[inline]
    fn score(&self, a: usize, b: usize) -> f64 {
        let q0 = (self.pre0[b] - self.pre0[a]).max(0.0);
        let q1 = (self.pre1[b] - self.pre1[a]).max(0.0);
        let q = q0 + q1;
        mi_term(q0, self.pb[0], q) + mi_term(q1, self.pb[1], q)
    }
}

/// Optimal split of `n` ordered points into `cells` non-empty contiguous
/// cells. Returns the cell end indices and the summed score.
fn best_partition(scorer: &CellScorer, n: usize, cells: usize) -> (Vec<usize>, f64) {
    debug_assert!(cells >= 1 && n >= cells);
    // best[k][j]: best score of k+1 cells covering points 0..j
    let mut best = vec![vec![f64::NEG_INFINITY; n + 1]; cells];
    let mut arg = vec![vec![0usize; n + 1]; cells];
    for j in 1..=n {
        best[0][j] = scorer.score(0, j);
    }
    for k in 1..cells {
        // the remaining cells - 1 - k cells each need one point
        let hi = n - (cells - 1 - k);
        for j in (k + 1)..=hi {
            let mut b = f64::NEG_INFINITY;
            let mut a = k;
            for i in k..j {
                let s = best[k - 1][i] + scorer.score(i, j);
                if s > b {
                    b = s;
                    a = i;
                }
            }
            best[k][j] = b;
            arg[k][j] = a;
        }
    }
    let mut ends = vec![0usize; cells];
    let mut j = n;
    for k in (0..cells).rev() {
        ends[k] = j;
        j = if k > 0 { arg[k][j] } else { 0 };
    }
    (ends, best[cells - 1][n])
}

/// Finds the contiguous `2^w`-cell partition of `pmf` (in its value order)
/// that maximizes `I(B; T)`, by exact dynamic programming.
///
/// With `symmetric` the pmf must be symmetric; the partition is then built
/// from mirror pairs of cells with the middle threshold at zero. A point at
/// `y = 0` carries no information and is split evenly between the two middle
/// cells in the compressed pmf.
pub fn design_mim_quantizer(
    pmf: &JointPmf,
    bits: u32,
    symmetric: bool,
) -> Result<QuantizerDesign, ImError> {
    check_bits(bits)?;
    let k_cells = cell_count(bits);
    let n = pmf.len();
    if n < k_cells {
        return Err(ImError::AlphabetTooSmall { points: n, cells: k_cells });
    }
    if pmf
        .probs()
        .iter()
        .filter(|p| p[0] + p[1] > 0.0)
        .count()
        <= 1
    {
        return Err(ImError::Degenerate);
    }
    let values = pmf.values();
    let pb = pmf.bit_marginal();
    let mid = |a: usize| 0.5 * (values[a - 1] + values[a]);

    if !symmetric {
        let scorer = CellScorer::new(pmf.probs().iter().copied(), pb);
        let (ends, _) = best_partition(&scorer, n, k_cells);
        let mut cells = Vec::with_capacity(k_cells);
        let mut start = 0;
        for &e in &ends {
            cells.push(start..e);
            start = e;
        }
        let boundaries = cells[1..].iter().map(|c| mid(c.start)).collect();
        let quantizer = ThresholdQuantizer::new(bits, boundaries)?;
        let compressed = compress_cells(pmf, &cells, bits, None);
        let mutual_information = compressed.mutual_information();
        return Ok(QuantizerDesign {
            quantizer,
            compressed,
            mutual_information,
            cells,
        });
    }

    if !pmf.is_symmetric(1e-9) {
        return Err(ImError::Asymmetric);
    }
    let half_cells = k_cells / 2;
    let center = values.iter().position(|v| v.abs() < MERGE_TOLERANCE);
    let first_pos = values.partition_point(|&v| v < MERGE_TOLERANCE);
    let mut half: Vec<[f64; 2]> = Vec::with_capacity(n / 2 + 1);
    if let Some(c) = center {
        let p = pmf.probs()[c];
        half.push([0.5 * p[0], 0.5 * p[1]]);
    }
    half.extend_from_slice(&pmf.probs()[first_pos..]);
    if half.len() < half_cells {
        return Err(ImError::AlphabetTooSmall { points: n, cells: k_cells });
    }
    let scorer = CellScorer::new(half.iter().copied(), pb);
    let (ends, _) = best_partition(&scorer, half.len(), half_cells);

    // Map half-list ends back to point ranges of the positive side.
    let offset = first_pos as isize - center.is_some() as isize;
    let mut pos_cells = Vec::with_capacity(half_cells);
    let mut start = first_pos;
    for &e in &ends {
        let end = (e as isize + offset) as usize;
        pos_cells.push(start..end);
        start = end;
    }
    if let Some(c) = center {
        pos_cells[0].start = c;
    }
    let mut cells: Vec<Range<usize>> = pos_cells
        .iter()
        .rev()
        // mirror image; a centre point lands in both middle cells
        .map(|r| (n - r.end)..(n - r.start))
        .collect();
    cells.extend(pos_cells.iter().cloned());

    let mut boundaries = Vec::with_capacity(k_cells - 1);
    let pos_bounds: Vec<f64> = pos_cells[1..].iter().map(|c| mid(c.start)).collect();
    boundaries.extend(pos_bounds.iter().rev().map(|b| -b));
    boundaries.push(0.0);
    boundaries.extend(pos_bounds.iter().copied());
    let quantizer = ThresholdQuantizer::new(bits, boundaries)?;
    let compressed = compress_cells(pmf, &cells, bits, center);
    let mutual_information = compressed.mutual_information();
    Ok(QuantizerDesign {
        quantizer,
        compressed,
        mutual_information,
        cells,
    })
}

// Joint pmf of (b, label) for the given cells; a shared centre point is
// counted half in each of the two cells containing it.
fn compress_cells(pmf: &JointPmf, cells: &[Range<usize>], bits: u32, center: Option<usize>) -> JointPmf {
    let probs = pmf.probs();
    let points = cells
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let mut q = [0.0; 2];
            for i in r.clone() {
                let w = if Some(i) == center { 0.5 } else { 1.0 };
                q[0] += w * probs[i][0];
                q[1] += w * probs[i][1];
            }
            (label_of_cell(k, bits) as f64, q)
        })
        .collect();
    JointPmf::merge_sorted(points)
}

/// Joint pmf of `(b, q(y))` for an integer-valued pmf and any quantizer.
///
/// Values equal to zero go through the quantizer as-is, i.e. the `sign(0) =
/// +1` convention applies; use [`quantize_pmf_symmetric`] to split them.
pub fn quantize_pmf(pmf: &JointPmf, q: &Quantizer) -> JointPmf {
    pmf.map_values(|v| apply_quantizer(q, v.round() as i64) as f64)
}

/// Like [`quantize_pmf`] but the mass at `y = 0` is split evenly between
/// the labels of `+0` and `-0`, keeping symmetric pmfs symmetric.
pub fn quantize_pmf_symmetric(pmf: &JointPmf, mut q: impl FnMut(i64) -> i32) -> JointPmf {
    let mut points = Vec::with_capacity(pmf.len() + 1);
    for (v, p) in pmf.points() {
        let y = v.round() as i64;
        if y == 0 {
            let t = q(0).abs() as f64;
            points.push((t, [0.5 * p[0], 0.5 * p[1]]));
            points.push((-t, [0.5 * p[0], 0.5 * p[1]]));
        } else {
            points.push((q(y) as f64, p));
        }
    }
    JointPmf::merge_sorted(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::im::pmf::JointPmf;

    #[test]
    fn label_cell_round_trip() {
        for bits in 1..=4 {
            let k = cell_count(bits);
            for c in 0..k {
                let t = label_of_cell(c, bits);
                assert_ne!(t, 0);
                assert_eq!(cell_of_label(t, bits), c);
                assert_eq!(label_of_cell(k - 1 - c, bits), -t);
            }
        }
        assert_eq!(labels(2), vec![-2, -1, 1, 2]);
    }

    #[test]
    fn uniform_examples() {
        let q = UniformQuantizer::new(3, 0).unwrap();
        assert_eq!(q.clip(), 4);
        assert_eq!(q.apply(3), 3);
        assert_eq!(q.apply(0), 1);
        let q = UniformQuantizer::new(3, 2).unwrap();
        assert_eq!(q.apply(-37), -4);
        assert_eq!(q.apply(-3), -1);
        assert_eq!(q.apply(9), 2);
    }

    #[test]
    fn threshold_example() {
        let q = ThresholdQuantizer::new(2, vec![-2.5, 0.0, 2.5]).unwrap();
        assert_eq!(q.apply(1.0), 1);
        assert_eq!(q.apply(0.0), 1);
        assert_eq!(q.apply(-0.1), -1);
        assert_eq!(q.apply(-7.0), -2);
        assert_eq!(q.apply(2.5), 2);
        assert!(q.is_symmetric());
        let qq = Quantizer::Threshold(q);
        assert_eq!(apply_quantizer(&qq, 1), 1);
        assert!(ThresholdQuantizer::new(2, vec![0.0, 0.0, 1.0]).is_err());
        assert!(ThresholdQuantizer::new(2, vec![0.0, 1.0]).is_err());
    }

    fn ramp(n: usize) -> JointPmf {
        // symmetric pmf on n points with LLR increasing in the value
        let values: Vec<f64> = (0..n).map(|i| i as f64 - (n as f64 - 1.0) / 2.0).collect();
        let mut given0: Vec<f64> = values.iter().map(|v| (0.35 * v).exp()).collect();
        let s: f64 = given0.iter().sum();
        given0.iter_mut().for_each(|x| *x /= s);
        JointPmf::symmetric_from_conditional(&values, &given0).unwrap()
    }

    #[test]
    fn identity_partition_when_already_small() {
        let p = ramp(4);
        let d = design_mim_quantizer(&p, 2, true).unwrap();
        assert_eq!(d.cells, vec![0..1, 1..2, 2..3, 3..4]);
        assert!((d.mutual_information - p.mutual_information()).abs() < 1e-12);
        let d = design_mim_quantizer(&p, 2, false).unwrap();
        assert!((d.mutual_information - p.mutual_information()).abs() < 1e-12);
    }

    #[test]
    fn data_processing_and_symmetry() {
        for n in [9, 16, 33] {
            let p = ramp(n);
            for bits in [1, 2, 3] {
                let d = design_mim_quantizer(&p, bits, true).unwrap();
                assert!(d.mutual_information <= p.mutual_information() + 1e-12);
                assert!(d.quantizer.is_symmetric());
                assert!(d.compressed.is_symmetric(1e-12));
                let free = design_mim_quantizer(&p, bits, false).unwrap();
                assert!(free.mutual_information + 1e-12 >= d.mutual_information);
            }
        }
    }

    #[test]
    fn one_bit_symmetric_threshold_is_zero() {
        let d = design_mim_quantizer(&ramp(10), 1, true).unwrap();
        assert_eq!(d.quantizer.boundaries(), &[0.0]);
    }

    #[test]
    fn design_errors() {
        assert!(matches!(
            design_mim_quantizer(&ramp(3), 2, false),
            Err(ImError::AlphabetTooSmall { .. })
        ));
        let point = JointPmf::new(vec![
            (0.0, [0.5, 0.5]),
            (1.0, [0.0, 0.0]),
            (2.0, [0.0, 0.0]),
            (3.0, [0.0, 0.0]),
        ])
        .unwrap();
        assert_eq!(design_mim_quantizer(&point, 2, false).unwrap_err(), ImError::Degenerate);
    }

    #[test]
    fn symmetric_quantization_splits_zero() {
        let p = JointPmf::new(vec![(0.0, [0.2, 0.2]), (2.0, [0.25, 0.05]), (-2.0, [0.05, 0.25])]).unwrap();
        let q = UniformQuantizer::new(2, 1).unwrap();
        let out = quantize_pmf_symmetric(&p, |y| q.apply(y));
        assert!(out.is_symmetric(1e-15));
        let biased = quantize_pmf(&p, &Quantizer::Uniform(q));
        assert!(!biased.is_symmetric(1e-3));
    }
}
