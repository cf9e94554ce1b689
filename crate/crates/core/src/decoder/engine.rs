//! Table-driven decoding of all schedules.

use super::nodes::{cn_full_min, cn_full_sum, saturate, vn_full, ThreeMin};
use super::{DecodeError, DecodeResult, Msg};
use crate::code::QcCode;
use crate::design::{CnKernel, CnStage, DecoderProgram, Schedule, VnStage};
use crate::im::apply_quantizer;
use crate::im::quantize::max_label;

/// How horizontal variable stages form their sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VnUpdate {
    /// Recompute the full extrinsic sum at every layer.
    #[default]
    Iterative,
    /// Keep a running sum and replace one term per layer.
    Recursive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOptions {
    pub vn_update: VnUpdate,
    /// Caps the number of iterations below the program length.
    pub max_iterations: Option<usize>,
    /// Stop once the hard decisions form a codeword (checked after every
    /// full iteration).
    pub early_termination: bool,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        DecodeOptions {
            vn_update: VnUpdate::Iterative,
            max_iterations: None,
            early_termination: true,
        }
    }
}

// Lookup tables of one variable stage.
struct VnTables {
    // channel label + half_ch -> integer
    ch: Vec<i32>,
    // check label + half -> integer, one per input table
    inputs: Vec<Vec<i32>>,
    // saturated sum + limit -> message
    q: Vec<Msg>,
    // |t| -> reconstructed check magnitude (sum kernels)
    f: Vec<i32>,
}

enum CnTables {
    Min,
    Offset(u8),
    // S -> output magnitude
    Sum(Vec<u8>),
}

/// A decoder bound to one code and program, owning its working memory.
pub struct Decoder<'a> {
    code: &'a QcCode,
    program: &'a DecoderProgram,
    opts: DecodeOptions,
    vn: Vec<VnTables>,
    // flat index of the first variable stage of every iteration
    vn_offset: Vec<usize>,
    cn: Vec<Vec<CnTables>>,
    // source tables for APP transfer: [iteration][layer], iteration 0 empty
    sources: Vec<Vec<usize>>,
    limit: i32,
    half: i32,
    half_ch: i32,
    state: State,
}

#[derive(Default)]
struct State {
    ch: Vec<i32>,
    v2c: Vec<Msg>,
    c2v: Vec<Msg>,
    acc: Vec<i32>,
    hard: Vec<u8>,
    f_store: Vec<i32>,
    sums: Vec<i32>,
    parity: Vec<bool>,
    three: Vec<ThreeMin>,
    // latest producer stage of the messages towards each horizontal layer
    producer: Vec<usize>,
    buf_in: Vec<Msg>,
    buf_out: Vec<Msg>,
    buf_f: Vec<i32>,
    buf_r: Vec<i32>,
    saturations: u64,
    ties: u64,
    refreshes: u64,
}

const ONE: Msg = Msg(1);

impl<'a> Decoder<'a> {
    pub fn new(code: &'a QcCode, program: &'a DecoderProgram, opts: DecodeOptions) -> Result<Self, DecodeError> {
        if program.dv != code.dv() || program.dc != code.dc() {
            return Err(DecodeError::DimensionMismatch(format!(
                "program degrees ({}, {}) vs code degrees ({}, {})",
                program.dv,
                program.dc,
                code.dv(),
                code.dc()
            )));
        }
        program
            .validate()
            .map_err(|e| DecodeError::DimensionMismatch(e.to_string()))?;
        if program.dc > 255 {
            return Err(DecodeError::Unsupported("check degree above 255".into()));
        }
        let horizontal = matches!(program.schedule, Schedule::Horizontal | Schedule::HorizontalApp);
        if opts.vn_update == VnUpdate::Recursive && !horizontal {
            return Err(DecodeError::Unsupported("recursive sums need a horizontal schedule".into()));
        }
        let needs_stationary = opts.vn_update == VnUpdate::Recursive || program.schedule == Schedule::HorizontalApp;
        if needs_stationary && !program.is_stationary() {
            return Err(DecodeError::NotStationary(if program.schedule == Schedule::HorizontalApp {
                "APP transfer"
            } else {
                "recursive variable update"
            }));
        }

        let limit = program.accumulator_limit() as i32;
        let half = max_label(program.msg_bits);
        let half_ch = max_label(program.channel_bits);
        let recon_limit = (1i32 << (program.recon_bits - 1)) - 1;
        let build_vn = |s: &VnStage| {
            let index = |t: &crate::im::ReconTable, h: i32| {
                let mut v = vec![0; (2 * h + 1) as usize];
                for label in (-h..=h).filter(|&l| l != 0) {
                    v[(label + h) as usize] = t.get(label);
                }
                v
            };
            VnTables {
                ch: index(&s.channel, half_ch),
                inputs: s.inputs.iter().map(|t| index(t, half)).collect(),
                q: (-limit..=limit)
                    .map(|y| Msg(apply_quantizer(&s.quantizer, y as i64) as i8))
                    .collect(),
                f: s
                    .cn_recon
                    .as_ref()
                    .map(|r| std::iter::once(0).chain(r.iter().copied()).collect())
                    .unwrap_or_default(),
            }
        };
        let mut vn = vec![build_vn(&program.init)];
        let mut vn_offset = Vec::with_capacity(program.iterations.len());
        let mut cn = Vec::with_capacity(program.iterations.len());
        let sum_range = program.dc as i64 * recon_limit as i64;
        for it in &program.iterations {
            vn_offset.push(vn.len());
            vn.extend(it.vn.iter().map(build_vn));
            cn.push(
                it.cn
                    .iter()
                    .map(|c| match c {
                        CnStage::Min => CnTables::Min,
                        CnStage::OffsetMin { offset } => CnTables::Offset((*offset).min(127) as u8),
                        CnStage::Sum { thresholds } => CnTables::Sum(
                            (0..=sum_range)
                                .map(|s| CnStage::sum_magnitude(thresholds, s, program.msg_bits) as u8)
                                .collect(),
                        ),
                    })
                    .collect(),
            );
        }
        // source (i, l) is read at index l by stage l of iteration i
        let mut sources = vec![Vec::new()];
        if horizontal {
            for off in &vn_offset {
                sources.push((0..program.dv).map(|l| off + l).collect());
            }
        }

        let n = code.n();
        let e = code.edges();
        let state = State {
            ch: vec![0; n],
            v2c: vec![ONE; e],
            c2v: vec![ONE; e],
            acc: vec![0; n],
            hard: vec![0; n],
            f_store: vec![0; e],
            sums: vec![0; code.m()],
            parity: vec![false; code.m()],
            three: vec![ThreeMin::default(); code.m()],
            producer: vec![0; program.dv],
            buf_in: vec![ONE; program.dc],
            buf_out: vec![ONE; program.dc.max(program.dv)],
            buf_f: vec![0; program.dc],
            buf_r: vec![0; program.dv],
            ..State::default()
        };
        Ok(Decoder {
            code,
            program,
            opts,
            vn,
            vn_offset,
            cn,
            sources,
            limit,
            half,
            half_ch,
            state,
        })
    }

    pub fn program(&self) -> &DecoderProgram {
        self.program
    }

    pub fn code(&self) -> &QcCode {
        self.code
    }

    /// Maps received samples onto channel labels with the program's
    /// channel quantizer.
    pub fn quantize_channel(&self, samples: &[f64], labels: &mut Vec<i32>) {
        labels.clear();
        labels.extend(samples.iter().map(|&y| self.program.channel_quantizer.apply(y)));
    }

    /// Decodes one word of channel labels.
    pub fn decode(&mut self, channel: &[i32]) -> Result<DecodeResult, DecodeError> {
        let n = self.code.n();
        if channel.len() != n {
            return Err(DecodeError::ChannelLength {
                expected: n,
                found: channel.len(),
            });
        }
        if let Some(&bad) = channel.iter().find(|&&t| t == 0 || t.abs() > self.half_ch) {
            return Err(DecodeError::InvalidChannelMessage(bad));
        }
        Ok(self.run(channel))
    }

    fn run(&mut self, channel: &[i32]) -> DecodeResult {
        let iterations = self
            .opts
            .max_iterations
            .map_or(self.program.iterations.len(), |m| m.min(self.program.iterations.len()));
        let n = self.code.n();
        let st = &mut self.state;
        st.saturations = 0;
        st.ties = 0;
        st.refreshes = 0;
        // channel integers are identical in every stage of stationary programs;
        // non-stationary stages re-read them from their own table
        let init = &self.vn[0];
        for (i, &t) in channel.iter().enumerate() {
            st.ch[i] = t;
            let y = init.ch[(t + self.half_ch) as usize];
            let q = init.q[(saturate(y, self.limit, &mut st.saturations) + self.limit) as usize];
            for l in 0..self.program.dv {
                st.v2c[l * n + i] = q;
            }
            st.acc[i] = y;
            st.hard[i] = decide(y, &mut st.ties);
        }
        st.c2v.fill(ONE);
        st.producer.fill(0);

        let mut trace = Vec::with_capacity(iterations);
        let mut used = 0;
        let mut converged = iterations == 0 && self.code.syndrome_weight(&self.state.hard) == 0;
        for it in 0..iterations {
            match self.program.schedule {
                Schedule::Flooding => self.flooding_iteration(it),
                Schedule::Horizontal => match self.opts.vn_update {
                    VnUpdate::Iterative => self.horizontal_iteration(it),
                    VnUpdate::Recursive => self.recursive_iteration(it),
                },
                Schedule::HorizontalApp => self.app_iteration(it),
                Schedule::Vertical if it == 0 => {
                    self.flooding_iteration(0);
                    self.init_vertical_state();
                }
                Schedule::Vertical => self.vertical_iteration(it),
            }
            used = it + 1;
            let w = self.code.syndrome_weight(&self.state.hard);
            trace.push(w);
            converged = w == 0;
            if converged && self.opts.early_termination {
                break;
            }
        }
        let st = &self.state;
        DecodeResult {
            hard_bits: st.hard.clone(),
            iterations_used: used,
            converged,
            syndrome_trace: trace,
            saturations: st.saturations,
            ties: st.ties,
            min_refreshes: st.refreshes,
        }
    }

    // Check updates of every check in horizontal layer `l`.
    fn cn_layer(&mut self, l: usize, cn: &CnTables, producer: usize) {
        let code = self.code;
        let n = code.n();
        let z = code.lift();
        let f = &self.vn[producer].f;
        let st = &mut self.state;
        let (v2c, c2v) = (&st.v2c[l * n..(l + 1) * n], &mut st.c2v[l * n..(l + 1) * n]);
        for m in l * z..(l + 1) * z {
            let vars = code.check_neighbors(m);
            for (k, &v) in vars.iter().enumerate() {
                st.buf_in[k] = v2c[v as usize];
            }
            let out = &mut st.buf_out[..vars.len()];
            match cn {
                CnTables::Min => cn_full_min(&st.buf_in, out),
                CnTables::Offset(beta) => {
                    cn_full_min(&st.buf_in, out);
                    for o in out.iter_mut() {
                        *o = offset(*o, *beta);
                    }
                }
                CnTables::Sum(lut) => {
                    for (k, m) in st.buf_in.iter().enumerate() {
                        st.buf_f[k] = f[m.magnitude() as usize];
                    }
                    cn_full_sum(&st.buf_in, &st.buf_f, lut, out);
                }
            }
            for (k, &v) in vars.iter().enumerate() {
                c2v[v as usize] = out[k];
            }
        }
    }

    fn flooding_iteration(&mut self, it: usize) {
        let producer = if it == 0 { 0 } else { self.vn_offset[it - 1] };
        let cn = std::mem::replace(&mut self.cn[it][0], CnTables::Min);
        for l in 0..self.program.dv {
            self.cn_layer(l, &cn, producer);
        }
        self.cn[it][0] = cn;
        let s = &self.vn[self.vn_offset[it]];
        let (n, dv) = (self.code.n(), self.program.dv);
        let st = &mut self.state;
        for i in 0..n {
            let ch = s.ch[(st.ch[i] + self.half_ch) as usize];
            for l in 0..dv {
                st.buf_r[l] = s.inputs[0][(st.c2v[l * n + i].value() as i32 + self.half) as usize];
            }
            let out = &mut st.buf_out[..dv];
            let total = vn_full(ch, &st.buf_r, &s.q, self.limit, out, &mut st.saturations);
            for l in 0..dv {
                st.v2c[l * n + i] = out[l];
            }
            st.hard[i] = decide(total, &mut st.ties);
        }
    }

    fn horizontal_iteration(&mut self, it: usize) {
        let (n, dv) = (self.code.n(), self.program.dv);
        for j in 0..dv {
            let producer = self.state.producer[j];
            let cn = std::mem::replace(&mut self.cn[it][j], CnTables::Min);
            self.cn_layer(j, &cn, producer);
            self.cn[it][j] = cn;
            let stage = self.vn_offset[it] + j;
            let s = &self.vn[stage];
            let target = (j + 1) % dv;
            let st = &mut self.state;
            for i in 0..n {
                let mut y = s.ch[(st.ch[i] + self.half_ch) as usize];
                for l in (0..dv).filter(|&l| l != target) {
                    y += s.inputs[l][(st.c2v[l * n + i].value() as i32 + self.half) as usize];
                }
                st.v2c[target * n + i] = s.q[(saturate(y, self.limit, &mut st.saturations) + self.limit) as usize];
                if j == dv - 1 {
                    let app = y + s.inputs[target][(st.c2v[target * n + i].value() as i32 + self.half) as usize];
                    st.hard[i] = decide(app, &mut st.ties);
                }
            }
            st.producer[target] = stage;
        }
    }

    fn recursive_iteration(&mut self, it: usize) {
        let (n, dv) = (self.code.n(), self.program.dv);
        for j in 0..dv {
            let producer = self.state.producer[j];
            let cn = std::mem::replace(&mut self.cn[it][j], CnTables::Min);
            self.cn_layer(j, &cn, producer);
            self.cn[it][j] = cn;
            let stage = self.vn_offset[it] + j;
            let s = &self.vn[stage];
            let target = (j + 1) % dv;
            let st = &mut self.state;
            for i in 0..n {
                let new = s.inputs[j][(st.c2v[j * n + i].value() as i32 + self.half) as usize];
                let old = s.inputs[target][(st.c2v[target * n + i].value() as i32 + self.half) as usize];
                let y = if target == j { st.acc[i] } else { st.acc[i] + new - old };
                st.acc[i] = y;
                st.v2c[target * n + i] = s.q[(saturate(y, self.limit, &mut st.saturations) + self.limit) as usize];
                if j == dv - 1 {
                    let app = y + s.inputs[target][(st.c2v[target * n + i].value() as i32 + self.half) as usize];
                    st.hard[i] = decide(app, &mut st.ties);
                }
            }
            st.producer[target] = stage;
        }
    }

    fn app_iteration(&mut self, it: usize) {
        let (n, dv) = (self.code.n(), self.program.dv);
        for j in 0..dv {
            let producer = self.state.producer[j];
            {
                let q = &self.vn[producer].q;
                let old = (it > 0).then(|| &self.vn[self.sources[it][j]].inputs[j]);
                let st = &mut self.state;
                for i in 0..n {
                    if let Some(old) = old {
                        st.acc[i] -= old[(st.c2v[j * n + i].value() as i32 + self.half) as usize];
                    }
                    st.v2c[j * n + i] = q[(saturate(st.acc[i], self.limit, &mut st.saturations) + self.limit) as usize];
                }
            }
            let cn = std::mem::replace(&mut self.cn[it][j], CnTables::Min);
            self.cn_layer(j, &cn, producer);
            self.cn[it][j] = cn;
            let new = &self.vn[self.sources[it + 1][j]].inputs[j];
            let st = &mut self.state;
            for i in 0..n {
                st.acc[i] += new[(st.c2v[j * n + i].value() as i32 + self.half) as usize];
            }
            st.producer[(j + 1) % dv] = self.vn_offset[it] + j;
        }
        let st = &mut self.state;
        for i in 0..n {
            st.hard[i] = decide(st.acc[i], &mut st.ties);
        }
    }

    fn uses_three_min(&self) -> bool {
        matches!(self.program.cn_kernel, CnKernel::ThreeMin | CnKernel::Omsq)
    }

    // Check states after the first (flooding) vertical iteration.
    fn init_vertical_state(&mut self) {
        let code = self.code;
        let (n, z) = (code.n(), code.lift());
        let f = &self.vn[self.vn_offset[0]].f;
        let st = &mut self.state;
        for m in 0..code.m() {
            let l = m / z;
            let vars = code.check_neighbors(m);
            let msgs = vars.iter().map(|&v| st.v2c[l * n + v as usize]);
            st.parity[m] = msgs.clone().fold(false, |p, t| p ^ t.is_negative());
            st.three[m] = ThreeMin::from_magnitudes(msgs.clone().map(|t| t.magnitude()));
            if !f.is_empty() {
                let mut s = 0;
                for &v in vars {
                    let e = l * n + v as usize;
                    st.f_store[e] = f[st.v2c[e].magnitude() as usize];
                    s += st.f_store[e];
                }
                st.sums[m] = s;
            }
        }
    }

    fn vertical_iteration(&mut self, it: usize) {
        let code = self.code;
        let (n, z, dv) = (code.n(), code.lift(), self.program.dv);
        let three = self.uses_three_min();
        for j in 0..self.program.dc {
            let s = &self.vn[self.vn_offset[it] + j];
            let cn = &self.cn[it][j];
            let st = &mut self.state;
            for i in j * z..(j + 1) * z {
                let checks = code.var_neighbors(i);
                for l in 0..dv {
                    let m = checks[l] as usize;
                    let e = l * n + i;
                    let own = st.v2c[e];
                    let mag = match cn {
                        CnTables::Sum(lut) => lut[(st.sums[m] - st.f_store[e]) as usize],
                        CnTables::Min | CnTables::Offset(_) => {
                            let min = if three {
                                match st.three[m].min_excluding(j as u8) {
                                    Some(v) => v,
                                    None => {
                                        st.refreshes += 1;
                                        let vars = code.check_neighbors(m);
                                        st.three[m] =
                                            ThreeMin::from_magnitudes(vars.iter().map(|&v| st.v2c[l * n + v as usize].magnitude()));
                                        st.three[m].min_excluding(j as u8).expect("d_c >= 2")
                                    }
                                }
                            } else {
                                code.check_neighbors(m)
                                    .iter()
                                    .enumerate()
                                    .filter(|&(k, _)| k != j)
                                    .map(|(_, &v)| st.v2c[l * n + v as usize].magnitude())
                                    .min()
                                    .expect("d_c >= 2")
                            };
                            match cn {
                                CnTables::Offset(beta) => min.saturating_sub(*beta).max(1),
                                _ => min,
                            }
                        }
                    };
                    let c = Msg::from_parts(st.parity[m] ^ own.is_negative(), mag);
                    st.c2v[e] = c;
                    st.buf_r[l] = s.inputs[0][(c.value() as i32 + self.half) as usize];
                }
                let ch = s.ch[(st.ch[i] + self.half_ch) as usize];
                let out = &mut st.buf_out[..dv];
                let total = vn_full(ch, &st.buf_r, &s.q, self.limit, out, &mut st.saturations);
                st.hard[i] = decide(total, &mut st.ties);
                for l in 0..dv {
                    let m = checks[l] as usize;
                    let e = l * n + i;
                    let (old, new) = (st.v2c[e], out[l]);
                    st.parity[m] ^= old.is_negative() ^ new.is_negative();
                    if three {
                        st.three[m].update(j as u8, new.magnitude());
                    }
                    if !s.f.is_empty() {
                        let fnew = s.f[new.magnitude() as usize];
                        st.sums[m] += fnew - st.f_store[e];
                        st.f_store[e] = fnew;
                    }
                    st.v2c[e] = new;
                }
            }
        }
    }
}

#[inline]
fn offset(m: Msg, beta: u8) -> Msg {
    Msg::from_parts(m.is_negative(), m.magnitude().saturating_sub(beta).max(1))
}

#[inline]
fn decide(y: i32, ties: &mut u64) -> u8 {
    if y < 0 {
        1
    } else {
        if y == 0 {
            *ties += 1;
        }
        0
    }
}

/// One-shot decode of channel labels.
pub fn decode(program: &DecoderProgram, code: &QcCode, channel: &[i32]) -> Result<DecodeResult, DecodeError> {
    Decoder::new(code, program, DecodeOptions::default())?.decode(channel)
}
