//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use mim_ldpc::code::{BaseMatrix, QcCode};
use mim_ldpc::im::JointPmf;
use rand::Rng;

/// The `Z = 4`, `d_v = 2`, `d_c = 3` toy code.
pub fn toy_code() -> QcCode {
    QcCode::new(BaseMatrix::from_rows(4, &[vec![0, 1, 2], vec![3, 0, 1]]).unwrap()).unwrap()
}

/// A `Z = 16`, `d_v = 3`, `d_c = 6` code.
pub fn small_code() -> QcCode {
    QcCode::new(
        BaseMatrix::from_rows(16, &[vec![0, 1, 2, 3, 4, 5], vec![0, 3, 7, 11, 2, 9], vec![0, 5, 13, 6, 10, 1]]).unwrap(),
    )
    .unwrap()
}

fn plogp_ratio(p: f64, marg: f64, q: f64) -> f64 {
    if p > 0.0 {
        p * (p / (marg * q)).log2()
    } else {
        0.0
    }
}

/// `I(B; T)` of cells given as `[p(b=0, t), p(b=1, t)]`.
pub fn cells_mi(cells: &[[f64; 2]]) -> f64 {
    let pb0: f64 = cells.iter().map(|c| c[0]).sum();
    let pb1: f64 = cells.iter().map(|c| c[1]).sum();
    cells
        .iter()
        .map(|c| {
            let q = c[0] + c[1];
            plogp_ratio(c[0], pb0, q) + plogp_ratio(c[1], pb1, q)
        })
        .sum()
}

/// Visits every way of cutting `0..len` into `k` non-empty contiguous runs,
/// passing the run end indices.
pub fn for_each_partition(len: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, len: usize, left: usize, ends: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if left == 1 {
            ends.push(len);
            f(ends);
            ends.pop();
            return;
        }
        for e in start + 1..=len - (left - 1) {
            ends.push(e);
            rec(e, len, left - 1, ends, f);
            ends.pop();
        }
    }
    if k >= 1 && len >= k {
        rec(0, len, k, &mut Vec::new(), f);
    }
}

/// Best `I(B; T)` over all contiguous `2^w`-cell partitions.
pub fn exhaustive_mi(probs: &[[f64; 2]], bits: u32) -> f64 {
    let k = 1usize << bits;
    let mut best = f64::NEG_INFINITY;
    for_each_partition(probs.len(), k, &mut |ends| {
        let mut cells = Vec::with_capacity(k);
        let mut s = 0;
        for &e in ends {
            let mut c = [0.0; 2];
            for p in &probs[s..e] {
                c[0] += p[0];
                c[1] += p[1];
            }
            cells.push(c);
            s = e;
        }
        best = best.max(cells_mi(&cells));
    });
    best
}

/// Best `I(B; T)` over all symmetric `2^w`-cell partitions of a symmetric
/// pmf: cells mirror about zero and a point at zero is split between the
/// two middle cells.
pub fn exhaustive_symmetric_mi(values: &[f64], probs: &[[f64; 2]], bits: u32) -> f64 {
    let k = 1usize << (bits - 1);
    // positive half, with half of a centre point in front
    let mut half: Vec<[f64; 2]> = Vec::new();
    for (v, p) in values.iter().zip(probs) {
        if *v == 0.0 {
            half.insert(0, [0.5 * p[0], 0.5 * p[1]]);
        } else if *v > 0.0 {
            half.push(*p);
        }
    }
    let mut best = f64::NEG_INFINITY;
    for_each_partition(half.len(), k, &mut |ends| {
        let mut cells = Vec::with_capacity(2 * k);
        let mut s = 0;
        for &e in ends {
            let mut c = [0.0; 2];
            for p in &half[s..e] {
                c[0] += p[0];
                c[1] += p[1];
            }
            cells.push(c);
            cells.push([c[1], c[0]]);
            s = e;
        }
        best = best.max(cells_mi(&cells));
    });
    best
}

/// Random symmetric pmf on `n` points; odd `n` puts one point at zero.
pub fn random_symmetric_pmf(rng: &mut impl Rng, n: usize) -> JointPmf {
    let pos = n / 2;
    let mut v = 0.0;
    let mut positive = Vec::with_capacity(pos);
    for _ in 0..pos {
        v += rng.random_range(0.05..1.0);
        positive.push(v);
    }
    let mut values: Vec<f64> = positive.iter().rev().map(|x| -x).collect();
    if n % 2 == 1 {
        values.push(0.0);
    }
    values.extend(&positive);
    let weights: Vec<f64> = values.iter().map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let given_zero: Vec<f64> = weights.iter().map(|w| w / total).collect();
    JointPmf::symmetric_from_conditional(&values, &given_zero).unwrap()
}

/// Scalar offset min-sum on labels with levels `2t - sign(t)`.
pub struct ReferenceOmsq {
    pub bits: u32,
    pub offset: i32,
}

pub struct ReferenceRun {
    pub hard: Vec<u8>,
    pub trace: Vec<usize>,
    pub iterations: usize,
}

impl ReferenceOmsq {
    fn level(t: i32) -> i32 {
        2 * t - t.signum()
    }

    // nearest level, ties towards +infinity, clipped at 2^(w-1)
    fn quantize(&self, y: i32) -> i32 {
        let cap = 1 << (self.bits - 1);
        if y >= 0 {
            (y / 2 + 1).min(cap)
        } else {
            -((-y + 1) / 2).min(cap)
        }
    }

    fn clip(&self, y: i32, dv: usize) -> i32 {
        let bits = usize::BITS - ((dv << self.bits) - 1).leading_zeros();
        let lim = (1 << bits) - 1;
        y.clamp(-lim, lim)
    }

    fn check(&self, inputs: &[i32]) -> Vec<i32> {
        (0..inputs.len())
            .map(|i| {
                let others = inputs.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, &t)| t);
                let negative = others.clone().filter(|&t| t < 0).count() % 2 == 1;
                let mag = (others.map(i32::abs).min().unwrap() - self.offset).max(1);
                if negative {
                    -mag
                } else {
                    mag
                }
            })
            .collect()
    }

    fn check_layer(&self, code: &QcCode, layer: usize, v2c: &[Vec<i32>], c2v: &mut [Vec<i32>]) {
        let z = code.lift();
        for m in layer * z..(layer + 1) * z {
            let vars = code.check_neighbors(m);
            let inputs: Vec<i32> = vars.iter().map(|&v| v2c[layer][v as usize]).collect();
            for (&v, out) in vars.iter().zip(self.check(&inputs)) {
                c2v[layer][v as usize] = out;
            }
        }
    }

    pub fn decode(&self, code: &QcCode, ch: &[i32], horizontal: bool, iterations: usize, early: bool) -> ReferenceRun {
        let (n, dv) = (code.n(), code.dv());
        let mut v2c: Vec<Vec<i32>> = vec![ch.iter().map(|&t| self.quantize(Self::level(t))).collect(); dv];
        let mut c2v = vec![vec![1; n]; dv];
        let mut hard: Vec<u8> = ch.iter().map(|&t| (t < 0) as u8).collect();
        let mut trace = Vec::new();
        let mut computed = vec![false; dv];
        let mut used = 0;
        for _ in 0..iterations {
            if horizontal {
                for j in 0..dv {
                    self.check_layer(code, j, &v2c, &mut c2v);
                    computed[j] = true;
                    let target = (j + 1) % dv;
                    for i in 0..n {
                        let mut y = Self::level(ch[i]);
                        for l in (0..dv).filter(|&l| l != target && computed[l]) {
                            y += Self::level(c2v[l][i]);
                        }
                        v2c[target][i] = self.quantize(self.clip(y, dv));
                        if j == dv - 1 {
                            let app = y + if computed[target] { Self::level(c2v[target][i]) } else { 0 };
                            hard[i] = (app < 0) as u8;
                        }
                    }
                }
            } else {
                for l in 0..dv {
                    self.check_layer(code, l, &v2c, &mut c2v);
                }
                for i in 0..n {
                    let total: i32 = Self::level(ch[i]) + (0..dv).map(|l| Self::level(c2v[l][i])).sum::<i32>();
                    for l in 0..dv {
                        v2c[l][i] = self.quantize(self.clip(total - Self::level(c2v[l][i]), dv));
                    }
                    hard[i] = (total < 0) as u8;
                }
            }
            used += 1;
            let w = code.syndrome_weight(&hard);
            trace.push(w);
            if w == 0 && early {
                break;
            }
        }
        ReferenceRun {
            hard,
            trace,
            iterations: used,
        }
    }
}

/// Gaussian tail probability `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}
