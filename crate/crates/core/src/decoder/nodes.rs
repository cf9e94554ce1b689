//! Check- and variable-node update rules on sign-magnitude messages.

use super::Msg;

/// Extrinsic min-sum update: output `n` carries the sign product and the
/// minimum magnitude of all inputs except `n`.
pub fn cn_full_min(inputs: &[Msg], out: &mut [Msg]) {
    debug_assert!(inputs.len() >= 2 && out.len() == inputs.len());
    let (mut min1, mut min2, mut idx) = (u8::MAX, u8::MAX, 0);
    let mut parity = false;
    for (i, m) in inputs.iter().enumerate() {
        let mag = m.magnitude();
        parity ^= m.is_negative();
        if mag < min1 {
            min2 = min1;
            min1 = mag;
            idx = i;
        } else if mag < min2 {
            min2 = mag;
        }
    }
    for (i, (o, m)) in out.iter_mut().zip(inputs).enumerate() {
        let mag = if i == idx { min2 } else { min1 };
        *o = Msg::from_parts(parity ^ m.is_negative(), mag);
    }
}

/// Sum-kernel check update: `f[i]` is the reconstructed magnitude of input
/// `i`; the output magnitude is `lut[S - f[i]]` with `S` the total.
pub fn cn_full_sum(inputs: &[Msg], f: &[i32], lut: &[u8], out: &mut [Msg]) {
    debug_assert!(inputs.len() == f.len() && out.len() == inputs.len());
    let total: i32 = f.iter().sum();
    let parity = inputs.iter().fold(false, |p, m| p ^ m.is_negative());
    for ((o, m), &fi) in out.iter_mut().zip(inputs).zip(f) {
        *o = Msg::from_parts(parity ^ m.is_negative(), lut[(total - fi) as usize]);
    }
}

/// Outcome of a saturating accumulator read.
#[inline]
pub fn saturate(y: i32, limit: i32, saturations: &mut u64) -> i32 {
    if y > limit {
        *saturations += 1;
        limit
    } else if y < -limit {
        *saturations += 1;
        -limit
    } else {
        y
    }
}

/// Full variable-node update: `y_i = ch + sum_{k != i} r[k]`, saturated to
/// `limit` and quantized through `q` (indexed by `y + limit`). Returns the
/// unsaturated total `ch + sum r`.
pub fn vn_full(ch: i32, r: &[i32], q: &[Msg], limit: i32, out: &mut [Msg], saturations: &mut u64) -> i32 {
    debug_assert!(r.len() == out.len());
    let total = ch + r.iter().sum::<i32>();
    for (o, &ri) in out.iter_mut().zip(r) {
        let y = saturate(total - ri, limit, saturations);
        *o = q[(y + limit) as usize];
    }
    total
}

/// Up to three smallest message magnitudes of a check, with their positions.
///
/// The tracked entries are always the exact smallest magnitudes of the
/// current messages: every untracked message is at least as large as the
/// largest tracked one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ThreeMin {
    mags: [u8; 3],
    pos: [u8; 3],
    len: u8,
}

impl ThreeMin {
    /// State of a check whose messages have the given magnitudes.
    pub fn from_magnitudes(mags: impl IntoIterator<Item = u8>) -> Self {
        let mut s = ThreeMin::default();
        for (p, m) in mags.into_iter().enumerate() {
            s.insert_sorted(m, p as u8);
        }
        s
    }

    fn insert_sorted(&mut self, mag: u8, pos: u8) {
        let len = self.len as usize;
        let mut i = len;
        while i > 0 && self.mags[i - 1] > mag {
            i -= 1;
        }
        if i >= 3 {
            return;
        }
        let end = len.min(2);
        for k in (i..end).rev() {
            self.mags[k + 1] = self.mags[k];
            self.pos[k + 1] = self.pos[k];
        }
        self.mags[i] = mag;
        self.pos[i] = pos;
        self.len = (len + 1).min(3) as u8;
    }

    /// Tracked magnitudes in ascending order.
    pub fn magnitudes(&self) -> &[u8] {
        &self.mags[..self.len as usize]
    }

    /// Replaces the message at `pos` by one of magnitude `mag`.
    pub fn update(&mut self, pos: u8, mag: u8) {
        let len = self.len as usize;
        if let Some(k) = self.pos[..len].iter().position(|&p| p == pos) {
            for i in k..len - 1 {
                self.mags[i] = self.mags[i + 1];
                self.pos[i] = self.pos[i + 1];
            }
            self.len -= 1;
        }
        // only a value no larger than the tracked maximum is known to rank
        let len = self.len as usize;
        if len > 0 && mag <= self.mags[len - 1] {
            self.insert_sorted(mag, pos);
        }
    }

    /// Minimum magnitude over all messages except `pos`, if the tracked
    /// entries determine it.
    pub fn min_excluding(&self, pos: u8) -> Option<u8> {
        let len = self.len as usize;
        if len >= 1 && self.pos[0] != pos {
            Some(self.mags[0])
        } else if len >= 2 {
            Some(self.mags[1])
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn msgs(v: &[i8]) -> Vec<Msg> {
        v.iter().map(|&x| Msg::new(x).unwrap()).collect()
    }

    fn leave_one_out_min(v: &[Msg]) -> Vec<Msg> {
        (0..v.len())
            .map(|i| {
                let others = v.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, m)| *m);
                let neg = others.clone().filter(|m| m.is_negative()).count() % 2 == 1;
                let mag = others.map(|m| m.magnitude()).min().unwrap();
                Msg::from_parts(neg, mag)
            })
            .collect()
    }

    #[test]
    fn hand_example() {
        let mut out = msgs(&[1, 1, 1]);
        cn_full_min(&msgs(&[2, -1, 3]), &mut out);
        assert_eq!(out, msgs(&[-1, 2, -1]));
        let mut out = msgs(&[1; 4]);
        cn_full_min(&msgs(&[3; 4]), &mut out);
        assert_eq!(out, msgs(&[3; 4]));
    }

    #[test]
    fn three_min_order_statistics() {
        let s = ThreeMin::from_magnitudes([5, 2, 7, 1]);
        assert_eq!(s.magnitudes(), &[1, 2, 5]);
        assert_eq!(s.min_excluding(3), Some(2));
        assert_eq!(s.min_excluding(0), Some(1));
    }

    #[test]
    fn vn_cancellation_and_no_extrinsic() {
        let limit = 127;
        let q: Vec<Msg> = (-limit..=limit).map(|y| Msg::new(if y < 0 { -1 } else { 1 }).unwrap()).collect();
        let mut out = msgs(&[1, 1]);
        let mut sat = 0;
        let total = vn_full(-3, &[10, -10], &q, limit, &mut out, &mut sat);
        assert_eq!(total, -3);
        assert_eq!(out, msgs(&[-1, 1]));
        let mut one = msgs(&[1]);
        vn_full(-3, &[4], &q, limit, &mut one, &mut sat);
        assert_eq!(one, msgs(&[-1]));
        assert_eq!(sat, 0);
    }

    #[test]
    fn saturation_is_counted() {
        let mut sat = 0;
        assert_eq!(saturate(200, 127, &mut sat), 127);
        assert_eq!(saturate(-128, 127, &mut sat), -127);
        assert_eq!(saturate(5, 127, &mut sat), 5);
        assert_eq!(sat, 2);
    }

    fn msg_strategy(bits: u32) -> impl Strategy<Value = Msg> {
        let half = 1i8 << (bits - 1);
        (1..=half, any::<bool>()).prop_map(|(m, neg)| Msg::new(if neg { -m } else { m }).unwrap())
    }

    proptest! {
        #[test]
        fn min_matches_leave_one_out(
            dc in prop::sample::select(vec![2usize, 3, 6, 18]),
            seed in prop::collection::vec(msg_strategy(4), 18),
        ) {
            let v = &seed[..dc];
            let mut out = vec![Msg::new(1).unwrap(); dc];
            cn_full_min(v, &mut out);
            prop_assert_eq!(out, leave_one_out_min(v));
        }

        #[test]
        fn sum_matches_leave_one_out(
            dc in prop::sample::select(vec![2usize, 3, 6, 18]),
            seed in prop::collection::vec((msg_strategy(3), 1i32..=31), 18),
        ) {
            let v: Vec<Msg> = seed[..dc].iter().map(|s| s.0).collect();
            let f: Vec<i32> = seed[..dc].iter().map(|s| s.1).collect();
            let lut: Vec<u8> = (0..=18 * 31).map(|s: i32| (4 - (s / 40).min(3)) as u8).collect();
            let mut out = vec![Msg::new(1).unwrap(); dc];
            cn_full_sum(&v, &f, &lut, &mut out);
            for i in 0..dc {
                let s: i32 = (0..dc).filter(|&k| k != i).map(|k| f[k]).sum();
                let neg = (0..dc).filter(|&k| k != i && v[k].is_negative()).count() % 2 == 1;
                prop_assert_eq!(out[i], Msg::from_parts(neg, lut[s as usize]));
            }
        }

        #[test]
        fn vn_matches_leave_one_out(
            dv in prop::sample::select(vec![2usize, 3, 6, 18]),
            ch in -31i32..=31,
            r in prop::collection::vec(-15i32..=15, 18),
        ) {
            let limit = 63;
            let q: Vec<Msg> = (-limit..=limit)
                .map(|y: i32| Msg::from_parts(y < 0, (y.unsigned_abs() / 8).clamp(1, 4) as u8))
                .collect();
            let r = &r[..dv];
            let mut out = vec![Msg::new(1).unwrap(); dv];
            let mut sat = 0;
            vn_full(ch, r, &q, limit, &mut out, &mut sat);
            let mut sat2 = 0;
            for i in 0..dv {
                let y: i32 = ch + (0..dv).filter(|&k| k != i).map(|k| r[k]).sum::<i32>();
                let y = saturate(y, limit, &mut sat2);
                prop_assert_eq!(out[i], q[(y + limit) as usize]);
            }
            prop_assert_eq!(sat, sat2);
        }

        #[test]
        fn three_min_tracks_exact_minimum(
            dc in 2usize..20,
            init in prop::collection::vec(1u8..=8, 20),
            updates in prop::collection::vec((0usize..20, 1u8..=8), 1..200),
        ) {
            let mut mags: Vec<u8> = init[..dc].to_vec();
            let mut s = ThreeMin::from_magnitudes(mags.iter().copied());
            for (p, m) in updates {
                let p = p % dc;
                mags[p] = m;
                s.update(p as u8, m);
                for q in 0..dc {
                    let exact = (0..dc).filter(|&k| k != q).map(|k| mags[k]).min().unwrap();
                    if let Some(v) = s.min_excluding(q as u8) {
                        prop_assert_eq!(v, exact);
                    }
                }
                // tracked entries are sorted and are the smallest values
                let t = s.magnitudes();
                prop_assert!(t.windows(2).all(|w| w[0] <= w[1]));
                let mut sorted = mags.clone();
                sorted.sort();
                prop_assert_eq!(t, &sorted[..t.len()]);
            }
        }
    }
}
