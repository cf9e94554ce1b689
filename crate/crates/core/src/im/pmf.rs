//! Joint distributions `p(b, y)` of a code bit and a discrete observation.

use super::ImError;

/// Absolute tolerance on the total mass of a pmf.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Values closer than this are treated as the same point.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Discrete joint pmf over a code bit `b` and an observation `y`.
///
/// Points are kept in ascending order of `y` with equal values merged. For
/// every pmf built by the design pipeline the value order coincides with the
/// LLR order, which is what contiguous-cell quantizer design relies on; see
/// [`JointPmf::is_llr_monotone`].
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    values: Vec<f64>,
    probs: Vec<[f64; 2]>,
}

/// How a check node combines the magnitudes of two sign-magnitude inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairKernel {
    /// Minimum of the magnitudes.
    Min,
    /// Sum of the magnitudes.
    Sum,
}

#[inline]
pub(crate) fn sign_of(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

impl JointPmf {
    /// Builds a pmf from `(y, [p(b=0, y), p(b=1, y)])` points in any order.
    pub fn new(points: Vec<(f64, [f64; 2])>) -> Result<Self, ImError> {
        if points.is_empty() {
            return Err(ImError::EmptyPmf);
        }
        let mut total = 0.0;
        for (v, p) in &points {
            if !v.is_finite() {
                return Err(ImError::NonFiniteValue);
            }
            if p[0] < 0.0 || p[1] < 0.0 || !p[0].is_finite() || !p[1].is_finite() {
                return Err(ImError::NegativeProbability);
            }
            total += p[0] + p[1];
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(ImError::NotNormalized(total));
        }
        Ok(Self::merge_sorted(points))
    }

    /// Builds a symmetric pmf from `p(y | b = 0)` on the given values; the
    /// values must be symmetric about zero, and `p(y | b = 1) = p(-y | b = 0)`.
    pub fn symmetric_from_conditional(values: &[f64], given_zero: &[f64]) -> Result<Self, ImError> {
        if values.len() != given_zero.len() {
            return Err(ImError::LengthMismatch);
        }
        let mut points = Vec::with_capacity(values.len());
        for (i, &v) in values.iter().enumerate() {
            let mirror = values
                .iter()
                .position(|&u| (u + v).abs() < MERGE_TOLERANCE)
                .ok_or(ImError::Asymmetric)?;
            points.push((v, [0.5 * given_zero[i], 0.5 * given_zero[mirror]]));
        }
        Self::new(points)
    }

    // Sorts, merges equal values and renormalizes away rounding drift.
    pub(crate) fn merge_sorted(mut points: Vec<(f64, [f64; 2])>) -> Self {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(points.len());
        let mut probs: Vec<[f64; 2]> = Vec::with_capacity(points.len());
        for (v, p) in points {
            match values.last() {
                Some(&last) if (v - last).abs() < MERGE_TOLERANCE => {
                    let q = probs.last_mut().unwrap();
                    q[0] += p[0];
                    q[1] += p[1];
                }
                _ => {
                    values.push(v);
                    probs.push(p);
                }
            }
        }
        let total: f64 = probs.iter().map(|p| p[0] + p[1]).sum();
        if total > 0.0 {
            for p in &mut probs {
                p[0] /= total;
                p[1] /= total;
            }
        }
        JointPmf { values, probs }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[[f64; 2]] {
        &self.probs
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, [f64; 2])> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    /// Probability of `y` (summed over `b`), or zero if `y` is not a point.
    pub fn prob_of(&self, y: f64) -> [f64; 2] {
        match self
            .values
            .binary_search_by(|v| v.total_cmp(&y))
        {
            Ok(i) => self.probs[i],
            Err(i) => {
                for j in [i.wrapping_sub(1), i] {
                    if j < self.len() && (self.values[j] - y).abs() < MERGE_TOLERANCE {
                        return self.probs[j];
                    }
                }
                [0.0, 0.0]
            }
        }
    }

    /// Marginal `[p(b=0), p(b=1)]`.
    pub fn bit_marginal(&self) -> [f64; 2] {
        self.probs
            .iter()
            .fold([0.0, 0.0], |acc, p| [acc[0] + p[0], acc[1] + p[1]])
    }

    /// `L(b | y) = ln p(b=0 | y) / p(b=1 | y)`; infinite when one side is zero.
    pub fn llr(&self, index: usize) -> f64 {
        let [p0, p1] = self.probs[index];
        (p0 / p1).ln()
    }

    /// True if the LLR is non-decreasing along the value order (points with
    /// zero total mass are skipped).
    pub fn is_llr_monotone(&self) -> bool {
        let mut last = f64::NEG_INFINITY;
        for (i, p) in self.probs.iter().enumerate() {
            if p[0] + p[1] == 0.0 {
                continue;
            }
            let l = self.llr(i);
            if l < last - 1e-9 {
                return false;
            }
            last = l;
        }
        true
    }

    /// Symmetric in the channel sense: `p(0, y) = p(1, -y)` for every point.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            let j = n - 1 - i;
            (self.values[i] + self.values[j]).abs() < MERGE_TOLERANCE
                && (self.probs[i][0] - self.probs[j][1]).abs() <= tol
        })
    }

    /// Mutual information `I(B; Y)` in bits.
    pub fn mutual_information(&self) -> f64 {
        let pb = self.bit_marginal();
        self.probs
            .iter()
            .map(|p| {
                let py = p[0] + p[1];
                mi_term(p[0], pb[0], py) + mi_term(p[1], pb[1], py)
            })
            .sum()
    }

    /// Same as [`mutual_information`](Self::mutual_information) but first
    /// checks normalization.
    pub fn checked_mutual_information(&self) -> Result<f64, ImError> {
        let total: f64 = self.probs.iter().map(|p| p[0] + p[1]).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(ImError::NotNormalized(total));
        }
        Ok(self.mutual_information())
    }

    /// Pushes every point through `f` and merges collisions.
    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> JointPmf {
        Self::merge_sorted(self.points().map(|(v, p)| (f(v), p)).collect())
    }
}

#[inline]
pub(crate) fn mi_term(pby: f64, pb: f64, py: f64) -> f64 {
    if pby <= 0.0 {
        0.0
    } else {
        pby * (pby / (pb * py)).log2()
    }
}

/// Distribution of `y1 + y2` for observations that are independent given `b`.
pub fn pmf_of_sum(a: &JointPmf, b: &JointPmf) -> Result<JointPmf, ImError> {
    let ma = a.bit_marginal();
    let mb = b.bit_marginal();
    if (ma[0] - mb[0]).abs() > 1e-9 {
        return Err(ImError::MassMismatch);
    }
    let mut points = Vec::with_capacity(a.len() * b.len());
    for (ya, pa) in a.points() {
        for (yb, pb) in b.points() {
            let mut p = [0.0; 2];
            for bit in 0..2 {
                if ma[bit] > 0.0 {
                    p[bit] = pa[bit] * pb[bit] / ma[bit];
                }
            }
            points.push((ya + yb, p));
        }
    }
    Ok(JointPmf::merge_sorted(points))
}

/// Check-node combination of two independent sign-magnitude observations.
///
/// The output bit is `b1 xor b2`, the output sign is the product of input
/// signs (`sign(0) = +1`) and the magnitude is combined by `kernel`.
pub fn pmf_of_cn_pair(
    a: &JointPmf,
    b: &JointPmf,
    kernel: PairKernel,
    require_symmetric: bool,
) -> Result<JointPmf, ImError> {
    if require_symmetric && !(a.is_symmetric(1e-12) && b.is_symmetric(1e-12)) {
        return Err(ImError::Asymmetric);
    }
    let mut points = Vec::with_capacity(a.len() * b.len());
    for (ya, pa) in a.points() {
        for (yb, pb) in b.points() {
            let mag = match kernel {
                PairKernel::Min => ya.abs().min(yb.abs()),
                PairKernel::Sum => ya.abs() + yb.abs(),
            };
            let y = sign_of(ya) * sign_of(yb) * mag;
            let p0 = pa[0] * pb[0] + pa[1] * pb[1];
            let p1 = pa[0] * pb[1] + pa[1] * pb[0];
            points.push((y, [p0, p1]));
        }
    }
    Ok(JointPmf::merge_sorted(points))
}

/// Folds `pmf_of_cn_pair` over all inputs.
pub fn pmf_of_cn(inputs: &[&JointPmf], kernel: PairKernel) -> Result<JointPmf, ImError> {
    let (first, rest) = inputs.split_first().ok_or(ImError::EmptyPmf)?;
    rest.iter().try_fold((*first).clone(), |acc, p| {
        pmf_of_cn_pair(&acc, p, kernel, false)
    })
}
