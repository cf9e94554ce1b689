//! Quasi-cyclic LDPC codes defined by a base matrix and a lifting size.
//!
//! Every base entry `h >= 0` expands into a `Z x Z` identity matrix cyclically
//! shifted by `h`, and `h = -1` expands into the all-zero block. Check
//! `m = iZ + z` of base row `i` is connected to variable
//! `jZ + ((z + h_ij) mod Z)` for every base column `j` with `h_ij >= 0`.
//!
//! Horizontal layers are base rows and vertical layers are base columns. The
//! decoders in this crate only handle regular codes, where every base entry
//! is non-negative, so each check has degree `d_c = cols` and each variable
//! has degree `d_v = rows`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("lifting size must be positive")]
    InvalidLift,
    #[error("base matrix must have at least one row and one column")]
    Empty,
    #[error("base entry {value} at ({row}, {col}) is outside [-1, {max}]")]
    ShiftOutOfRange {
        row: usize,
        col: usize,
        value: i64,
        max: usize,
    },
    #[error("expected {expected} base entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("base entry at ({row}, {col}) is -1; only regular codes are supported")]
    Irregular { row: usize, col: usize },
    #[error("layer {layer} out of range (0..{count})")]
    LayerOutOfRange { layer: usize, count: usize },
    #[error("offset {offset} out of range (0..{lift})")]
    OffsetOutOfRange { offset: usize, lift: usize },
    #[error("bit vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Base matrix with shifts in `{-1, ..., Z-1}`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMatrix {
    rows: usize,
    cols: usize,
    lift: usize,
    shifts: Vec<i32>,
}

impl BaseMatrix {
    pub fn new(rows: usize, cols: usize, lift: usize, shifts: Vec<i32>) -> Result<Self, CodeError> {
        if lift == 0 {
            return Err(CodeError::InvalidLift);
        }
        if rows == 0 || cols == 0 {
            return Err(CodeError::Empty);
        }
        if shifts.len() != rows * cols {
            return Err(CodeError::ShapeMismatch {
                expected: rows * cols,
                got: shifts.len(),
            });
        }
        for (k, &h) in shifts.iter().enumerate() {
            if h < -1 || h as i64 >= lift as i64 {
                return Err(CodeError::ShiftOutOfRange {
                    row: k / cols,
                    col: k % cols,
                    value: h as i64,
                    max: lift - 1,
                });
            }
        }
        Ok(BaseMatrix {
            rows,
            cols,
            lift,
            shifts,
        })
    }

    /// Builds a base matrix from nested rows; all rows must have equal length.
    pub fn from_rows(lift: usize, rows: &[Vec<i32>]) -> Result<Self, CodeError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut shifts = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(CodeError::ShapeMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            shifts.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, lift, shifts)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn lift(&self) -> usize {
        self.lift
    }

    pub fn shift(&self, row: usize, col: usize) -> i32 {
        self.shifts[row * self.cols + col]
    }

    pub fn is_regular(&self) -> bool {
        self.shifts.iter().all(|&h| h >= 0)
    }

    /// Expands the base matrix into per-check variable lists.
    ///
    /// Works for irregular base matrices too; `-1` entries contribute no edges.
    pub fn lift_checks(&self) -> Vec<Vec<usize>> {
        let z_size = self.lift;
        let mut checks = Vec::with_capacity(self.rows * z_size);
        for i in 0..self.rows {
            for z in 0..z_size {
                let vars = (0..self.cols)
                    .filter_map(|j| {
                        let h = self.shift(i, j);
                        (h >= 0).then(|| j * z_size + (z + h as usize) % z_size)
                    })
                    .collect();
                checks.push(vars);
            }
        }
        checks
    }
}

impl FromStr for BaseMatrix {
    type Err = CodeError;

    /// Parses the plain-text format: a header line `Z <lift>` followed by one
    /// base row per line with whitespace-separated shifts. `#` starts a comment.
    fn from_str(text: &str) -> Result<Self, CodeError> {
        let mut lift = None;
        let mut rows: Vec<Vec<i32>> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| CodeError::Parse { line: k + 1, msg };
            if lift.is_none() {
                let mut it = line.split_whitespace();
                if it.next() != Some("Z") {
                    return Err(parse_err("expected header `Z <lift>`".into()));
                }
                let value = it
                    .next()
                    .ok_or_else(|| parse_err("missing lifting size".into()))?;
                let z: usize = value
                    .parse()
                    .map_err(|_| parse_err(format!("invalid lifting size `{value}`")))?;
                lift = Some(z);
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<i32>()
                        .map_err(|_| parse_err(format!("invalid shift `{tok}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        let lift = lift.ok_or(CodeError::Parse {
            line: 0,
            msg: "missing header `Z <lift>`".into(),
        })?;
        Self::from_rows(lift, &rows)
    }
}

impl fmt::Display for BaseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Z {}", self.lift)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.shift(i, j).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// A regular quasi-cyclic code with precomputed adjacency.
///
/// Immutable after construction and cheap to share between decoders.
#[derive(Debug, Clone)]
pub struct QcCode {
    base: BaseMatrix,
    // check m's neighbours, in base-column order, flattened (M x d_c)
    check_vars: Vec<u32>,
    // variable n's neighbours, in base-row order, flattened (N x d_v)
    var_checks: Vec<u32>,
}

/// The rate-5/6 regular code with `Z = 512`, `d_v = 3`, `d_c = 18`.
pub const REGULAR_3X18_Z512: &str = include_str!("../codes/regular_3x18_z512.txt");

impl QcCode {
    pub fn new(base: BaseMatrix) -> Result<Self, CodeError> {
        for i in 0..base.rows() {
            for j in 0..base.cols() {
                if base.shift(i, j) < 0 {
                    return Err(CodeError::Irregular { row: i, col: j });
                }
            }
        }
        let z_size = base.lift();
        let (rows, cols) = (base.rows(), base.cols());
        let mut check_vars = Vec::with_capacity(rows * z_size * cols);
        for i in 0..rows {
            for z in 0..z_size {
                for j in 0..cols {
                    let h = base.shift(i, j) as usize;
                    check_vars.push((j * z_size + (z + h) % z_size) as u32);
                }
            }
        }
        let mut var_checks = Vec::with_capacity(cols * z_size * rows);
        for j in 0..cols {
            for z in 0..z_size {
                for i in 0..rows {
                    let h = base.shift(i, j) as usize;
                    var_checks.push((i * z_size + (z + z_size - h) % z_size) as u32);
                }
            }
        }
        Ok(QcCode {
            base,
            check_vars,
            var_checks,
        })
    }

    /// The rate-5/6 `Z = 512` example code shipped with the crate.
    pub fn regular_3x18_z512() -> Self {
        let base: BaseMatrix = REGULAR_3X18_Z512.parse().expect("bundled base matrix");
        QcCode::new(base).expect("bundled code is regular")
    }

    pub fn base(&self) -> &BaseMatrix {
        &self.base
    }

    pub fn lift(&self) -> usize {
        self.base.lift()
    }

    /// Code length `N`.
    pub fn n(&self) -> usize {
        self.base.cols() * self.base.lift()
    }

    /// Number of parity checks `M`.
    pub fn m(&self) -> usize {
        self.base.rows() * self.base.lift()
    }

    pub fn dv(&self) -> usize {
        self.base.rows()
    }

    pub fn dc(&self) -> usize {
        self.base.cols()
    }

    pub fn edges(&self) -> usize {
        self.n() * self.dv()
    }

    /// Design rate `1 - d_v / d_c`.
    pub fn rate(&self) -> f64 {
        1.0 - self.dv() as f64 / self.dc() as f64
    }

    /// Variables of check `m`, ordered by base column.
    #[inline]
    pub fn check_neighbors(&self, m: usize) -> &[u32] {
        let dc = self.dc();
        &self.check_vars[m * dc..(m + 1) * dc]
    }

    /// Checks of variable `n`, ordered by base row.
    #[inline]
    pub fn var_neighbors(&self, n: usize) -> &[u32] {
        let dv = self.dv();
        &self.var_checks[n * dv..(n + 1) * dv]
    }

    /// Variable set of check `z` in horizontal layer `layer` (base row).
    pub fn cn_neighbors(&self, layer: usize, z: usize) -> Result<Vec<usize>, CodeError> {
        self.check_layer(layer, self.dv())?;
        self.check_offset(z)?;
        let m = layer * self.lift() + z;
        Ok(self.check_neighbors(m).iter().map(|&v| v as usize).collect())
    }

    /// Check set of variable `z` in vertical layer `layer` (base column).
    pub fn vn_neighbors(&self, layer: usize, z: usize) -> Result<Vec<usize>, CodeError> {
        self.check_layer(layer, self.dc())?;
        self.check_offset(z)?;
        let n = layer * self.lift() + z;
        Ok(self.var_neighbors(n).iter().map(|&c| c as usize).collect())
    }

    fn check_layer(&self, layer: usize, count: usize) -> Result<(), CodeError> {
        if layer >= count {
            return Err(CodeError::LayerOutOfRange { layer, count });
        }
        Ok(())
    }

    fn check_offset(&self, offset: usize) -> Result<(), CodeError> {
        if offset >= self.lift() {
            return Err(CodeError::OffsetOutOfRange {
                offset,
                lift: self.lift(),
            });
        }
        Ok(())
    }

    /// Parity of every check for the given hard decisions (0/1 per bit).
    pub fn syndrome(&self, hard_bits: &[u8]) -> Result<Vec<u8>, CodeError> {
        if hard_bits.len() != self.n() {
            return Err(CodeError::LengthMismatch {
                expected: self.n(),
                got: hard_bits.len(),
            });
        }
        Ok((0..self.m())
            .map(|m| {
                self.check_neighbors(m)
                    .iter()
                    .fold(0u8, |acc, &v| acc ^ (hard_bits[v as usize] & 1))
            })
            .collect())
    }

    /// Number of unsatisfied checks; zero iff `hard_bits` is a codeword.
    pub fn syndrome_weight(&self, hard_bits: &[u8]) -> usize {
        debug_assert_eq!(hard_bits.len(), self.n());
        (0..self.m())
            .filter(|&m| {
                self.check_neighbors(m)
                    .iter()
                    .fold(0u8, |acc, &v| acc ^ hard_bits[v as usize])
                    != 0
            })
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(lift: usize, rows: &[Vec<i32>]) -> QcCode {
        QcCode::new(BaseMatrix::from_rows(lift, rows).unwrap()).unwrap()
    }

    #[test]
    fn zero_shift_lifts_to_identity() {
        let base = BaseMatrix::from_rows(3, &[vec![0]]).unwrap();
        assert_eq!(base.lift_checks(), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn unit_shift_rotates() {
        let base = BaseMatrix::from_rows(3, &[vec![1]]).unwrap();
        assert_eq!(base.lift_checks(), vec![vec![1], vec![2], vec![0]]);
    }

    #[test]
    fn minus_one_is_zero_block() {
        let base = BaseMatrix::from_rows(2, &[vec![0, -1]]).unwrap();
        assert_eq!(base.lift_checks(), vec![vec![0], vec![1]]);
        assert!(matches!(
            QcCode::new(base),
            Err(CodeError::Irregular { row: 0, col: 1 })
        ));
    }

    #[test]
    fn rejects_bad_shifts_and_lift() {
        assert!(matches!(
            BaseMatrix::from_rows(4, &[vec![4]]),
            Err(CodeError::ShiftOutOfRange { .. })
        ));
        assert!(matches!(
            BaseMatrix::from_rows(4, &[vec![-2]]),
            Err(CodeError::ShiftOutOfRange { .. })
        ));
        assert_eq!(BaseMatrix::from_rows(0, &[vec![0]]), Err(CodeError::InvalidLift));
    }

    #[test]
    fn bundled_code_dimensions() {
        let c = QcCode::regular_3x18_z512();
        assert_eq!((c.n(), c.m(), c.edges()), (9216, 1536, 27648));
        assert_eq!((c.dv(), c.dc()), (3, 18));
        assert!((c.rate() - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(c.cn_neighbors(1, 0).unwrap()[1], 717);
    }

    #[test]
    fn horizontal_neighbors() {
        let c = code(8, &[vec![1, 2, 0]]);
        assert_eq!(c.cn_neighbors(0, 7).unwrap(), vec![0, 9, 23]);
        let c = code(4, &[vec![0, 0], vec![0, 0]]);
        assert_eq!(c.cn_neighbors(0, 2).unwrap(), vec![2, 6]);
        assert!(c.cn_neighbors(2, 0).is_err());
        assert!(c.cn_neighbors(0, 4).is_err());
    }

    #[test]
    fn vertical_neighbors() {
        let c = code(8, &[vec![1], vec![2]]);
        assert_eq!(c.vn_neighbors(0, 0).unwrap(), vec![7, 14]);
        let c = code(4, &[vec![0], vec![0], vec![0]]);
        assert_eq!(c.vn_neighbors(0, 3).unwrap(), vec![3, 7, 11]);
        assert!(c.vn_neighbors(1, 0).is_err());
    }

    #[test]
    fn syndrome_basics() {
        let c = QcCode::regular_3x18_z512();
        let mut bits = vec![0u8; c.n()];
        assert!(c.syndrome(&bits).unwrap().iter().all(|&s| s == 0));
        bits[4321] = 1;
        assert_eq!(c.syndrome(&bits).unwrap().iter().filter(|&&s| s == 1).count(), 3);
        assert_eq!(c.syndrome_weight(&bits), 3);
        assert!(c.syndrome(&bits[1..]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let base: BaseMatrix = REGULAR_3X18_Z512.parse().unwrap();
        let again: BaseMatrix = base.to_string().parse().unwrap();
        assert_eq!(base, again);
        assert!("0 1\n".parse::<BaseMatrix>().is_err());
        assert!("Z 4\n0 x\n".parse::<BaseMatrix>().is_err());
    }
}
