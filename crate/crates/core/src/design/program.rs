//! The designed decoder: schedule, per-stage reconstruction tables and
//! quantizers, and its binary file format.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::im::quantize::{cell_count, label_of_cell, max_label};
use crate::im::{ImError, Quantizer, ReconTable, ThresholdQuantizer, UniformQuantizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schedule {
    Flooding,
    Horizontal,
    HorizontalApp,
    Vertical,
}

impl Schedule {
    pub fn name(self) -> &'static str {
        match self {
            Schedule::Flooding => "flooding",
            Schedule::Horizontal => "horizontal",
            Schedule::HorizontalApp => "horizontal-app",
            Schedule::Vertical => "vertical",
        }
    }

    fn tag(self) -> u8 {
        self as u8
    }

    fn from_tag(t: u8) -> Option<Self> {
        [
            Schedule::Flooding,
            Schedule::Horizontal,
            Schedule::HorizontalApp,
            Schedule::Vertical,
        ]
        .get(t as usize)
        .copied()
    }
}

impl std::str::FromStr for Schedule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "flooding" | "f" => Ok(Schedule::Flooding),
            "horizontal" | "h" => Ok(Schedule::Horizontal),
            "horizontal-app" | "ha" => Ok(Schedule::HorizontalApp),
            "vertical" | "v" => Ok(Schedule::Vertical),
            _ => Err(format!("unknown schedule `{s}`")),
        }
    }
}

/// Check-node update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CnKernel {
    /// Sign product and minimum magnitude.
    Min,
    /// Minimum kept as three tracked minima (vertical partial updates).
    ThreeMin,
    /// Sum of reconstructed magnitudes, non-uniform threshold quantization.
    BoxplusNonUniform,
    /// Sum of reconstructed magnitudes, uniformly spaced thresholds.
    BoxplusUniform,
    /// Offset minimum with fixed message levels.
    Omsq,
}

impl CnKernel {
    pub fn name(self) -> &'static str {
        match self {
            CnKernel::Min => "min",
            CnKernel::ThreeMin => "3min",
            CnKernel::BoxplusNonUniform => "boxplus-nonuniform",
            CnKernel::BoxplusUniform => "boxplus-uniform",
            CnKernel::Omsq => "omsq",
        }
    }

    pub fn is_sum(self) -> bool {
        matches!(self, CnKernel::BoxplusNonUniform | CnKernel::BoxplusUniform)
    }

    fn from_tag(t: u8) -> Option<Self> {
        [
            CnKernel::Min,
            CnKernel::ThreeMin,
            CnKernel::BoxplusNonUniform,
            CnKernel::BoxplusUniform,
            CnKernel::Omsq,
        ]
        .get(t as usize)
        .copied()
    }
}

impl std::str::FromStr for CnKernel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "min" => Ok(CnKernel::Min),
            "3min" | "three-min" => Ok(CnKernel::ThreeMin),
            "boxplus-nonuniform" | "boxplus" => Ok(CnKernel::BoxplusNonUniform),
            "boxplus-uniform" => Ok(CnKernel::BoxplusUniform),
            "omsq" => Ok(CnKernel::Omsq),
            _ => Err(format!("unknown check-node kernel `{s}`")),
        }
    }
}

/// One variable-node update: `y = phi_ch(t_ch) + sum phi_in(t_c)`, then `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct VnStage {
    /// Reconstruction of the channel message (`w_ch`-bit labels).
    pub channel: ReconTable,
    /// Reconstruction of incoming check messages. Horizontal stages hold one
    /// table per layer; flooding and vertical stages hold a single table.
    pub inputs: Vec<ReconTable>,
    /// Quantizer of the integer sum onto `w`-bit messages.
    pub quantizer: Quantizer,
    /// `|phi_c|` of the produced messages, indexed by `|t| - 1`, for the
    /// sum check-node kernels.
    pub cn_recon: Option<Vec<i32>>,
    /// Predicted `I(B; T^v)` of the produced messages.
    pub mutual_information: f64,
}

/// One check-node update.
#[derive(Debug, Clone, PartialEq)]
pub enum CnStage {
    Min,
    /// `max(|min| - offset, 1)`.
    OffsetMin { offset: i32 },
    /// Quantization of the reconstructed magnitude sum `S`: the output
    /// magnitude is `2^(w-1) - #{thresholds <= S}`.
    Sum { thresholds: Vec<i64> },
}

impl CnStage {
    /// Output magnitude of a sum-kernel stage.
    #[inline]
    pub fn sum_magnitude(thresholds: &[i64], sum: i64, bits: u32) -> i32 {
        max_label(bits) - thresholds.partition_point(|&t| t <= sum) as i32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationStages {
    pub cn: Vec<CnStage>,
    pub vn: Vec<VnStage>,
}

/// Everything a decoder needs: schedule, widths and all per-stage tables.
///
/// Stage layout per iteration:
/// * flooding: one check stage and one variable stage;
/// * horizontal: `d_v` check stages (one per layer) and `d_v` variable
///   stages, stage `l` producing the messages for layer `(l + 1) mod d_v`;
/// * vertical: the first iteration is flooding, later ones have `d_c`
///   stages of each kind, one per vertical layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderProgram {
    pub schedule: Schedule,
    pub cn_kernel: CnKernel,
    /// Message width `w`.
    pub msg_bits: u32,
    /// Reconstruction width `w'`.
    pub recon_bits: u32,
    /// Channel message width `w_ch`.
    pub channel_bits: u32,
    pub dv: usize,
    pub dc: usize,
    /// Noise standard deviation the tables were designed for.
    pub design_sigma: f64,
    /// Received sample to channel label.
    pub channel_quantizer: ThresholdQuantizer,
    /// Channel label to first variable-to-check message.
    pub init: VnStage,
    pub iterations: Vec<IterationStages>,
    /// Predicted message information after each iteration.
    pub mi_trajectory: Vec<f64>,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ProgramError {
    #[error("not a decoder program (bad magic bytes)")]
    BadMagic,
    #[error("unsupported program version {0}")]
    UnsupportedVersion(u16),
    #[error("program file is truncated")]
    Truncated,
    #[error("invalid program: {0}")]
    Invalid(String),
    #[error(transparent)]
    Table(#[from] ImError),
}

impl DecoderProgram {
    pub fn max_iterations(&self) -> usize {
        self.iterations.len()
    }

    /// Signed accumulator magnitude limit, `w' + ceil(log2(d_v + 1))` bits.
    pub fn accumulator_limit(&self) -> i64 {
        let extra = usize::BITS - self.dv.leading_zeros();
        let bits = self.recon_bits + extra;
        (1i64 << (bits - 1)) - 1
    }

    /// Checks stage counts and table widths against the schedule.
    pub fn validate(&self) -> Result<(), ProgramError> {
        let bad = |m: String| Err(ProgramError::Invalid(m));
        if self.msg_bits == 0 || self.msg_bits > 6 || self.channel_bits == 0 || self.channel_bits > 6 {
            return bad("message widths must be 1..=6 bits".into());
        }
        if self.dv < 1 || self.dc < 2 {
            return bad("degrees must satisfy d_v >= 1, d_c >= 2".into());
        }
        if self.channel_quantizer.bits() != self.channel_bits {
            return bad("channel quantizer width mismatch".into());
        }
        self.check_vn(&self.init, 0)?;
        for (i, it) in self.iterations.iter().enumerate() {
            let (n_cn, n_inputs) = self.stage_shape(i);
            if it.cn.len() != n_cn || it.vn.len() != n_cn {
                return bad(format!(
                    "iteration {}: expected {n_cn} stages, found {}/{}",
                    i + 1,
                    it.cn.len(),
                    it.vn.len()
                ));
            }
            for vn in &it.vn {
                self.check_vn(vn, n_inputs)?;
            }
            for cn in &it.cn {
                match (cn, self.cn_kernel) {
                    (CnStage::Sum { thresholds }, k) if k.is_sum() => {
                        if thresholds.len() != cell_count(self.msg_bits) / 2 - 1
                            || thresholds.windows(2).any(|w| w[0] > w[1])
                        {
                            return bad("sum-kernel thresholds malformed".into());
                        }
                    }
                    (CnStage::Min, CnKernel::Min | CnKernel::ThreeMin) => {}
                    (CnStage::OffsetMin { offset }, CnKernel::Omsq) if *offset >= 0 => {}
                    _ => return bad("check stage does not match kernel".into()),
                }
            }
        }
        Ok(())
    }

    /// (stages per iteration, input tables per variable stage)
    pub fn stage_shape(&self, iteration: usize) -> (usize, usize) {
        match self.schedule {
            Schedule::Flooding => (1, 1),
            Schedule::Horizontal | Schedule::HorizontalApp => (self.dv, self.dv),
            Schedule::Vertical if iteration == 0 => (1, 1),
            Schedule::Vertical => (self.dc, 1),
        }
    }

    fn check_vn(&self, vn: &VnStage, n_inputs: usize) -> Result<(), ProgramError> {
        let bad = |m: &str| Err(ProgramError::Invalid(m.to_string()));
        if vn.channel.bits() != self.channel_bits {
            return bad("channel table width mismatch");
        }
        if vn.inputs.len() != n_inputs || vn.inputs.iter().any(|t| t.bits() != self.msg_bits) {
            return bad("input table count or width mismatch");
        }
        if vn.quantizer.bits() != self.msg_bits {
            return bad("variable quantizer width mismatch");
        }
        let limit = (1 << (self.recon_bits - 1)) - 1;
        if vn.channel.max_magnitude() > limit || vn.inputs.iter().any(|t| t.max_magnitude() > limit) {
            return bad("reconstruction value exceeds w' bits");
        }
        if self.cn_kernel.is_sum() {
            match &vn.cn_recon {
                Some(m) if m.len() == cell_count(self.msg_bits) / 2 => {}
                _ => return bad("sum kernel needs check reconstruction tables"),
            }
        }
        Ok(())
    }

    /// True when every check-message source is reconstructed with the same
    /// table wherever it is read and the channel table never changes; this
    /// is what recursive and APP-transfer horizontal decoding require.
    pub fn is_stationary(&self) -> bool {
        if !matches!(self.schedule, Schedule::Horizontal | Schedule::HorizontalApp) {
            return false;
        }
        let dv = self.dv;
        let same_channel = self
            .iterations
            .iter()
            .flat_map(|it| it.vn.iter())
            .all(|vn| vn.channel == self.init.channel);
        if !same_channel {
            return false;
        }
        // source (iteration, layer) -> table, iteration 0 means "no message yet"
        let mut seen: std::collections::HashMap<(usize, usize), &ReconTable> = Default::default();
        for (i, it) in self.iterations.iter().enumerate() {
            let iter = i + 1;
            for (j, vn) in it.vn.iter().enumerate() {
                for (l, table) in vn.inputs.iter().enumerate() {
                    let src = if l <= j { (iter, l) } else { (iter - 1, l) };
                    if src.0 == 0 && !table.is_zero() {
                        return false;
                    }
                    match seen.get(&src) {
                        Some(t) if *t != table => return false,
                        _ => {
                            seen.insert(src, table);
                        }
                    }
                }
            }
        }
        dv > 0
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u16(VERSION);
        w.u8(self.schedule.tag());
        w.u8(self.cn_kernel as u8);
        w.u8(self.msg_bits as u8);
        w.u8(self.recon_bits as u8);
        w.u8(self.channel_bits as u8);
        w.u32(self.dv as u32);
        w.u32(self.dc as u32);
        w.f64(self.design_sigma);
        w.threshold(&self.channel_quantizer);
        w.vn(&self.init);
        w.u32(self.iterations.len() as u32);
        for it in &self.iterations {
            w.u32(it.cn.len() as u32);
            for cn in &it.cn {
                w.cn(cn);
            }
            w.u32(it.vn.len() as u32);
            for vn in &it.vn {
                w.vn(vn);
            }
        }
        w.u32(self.mi_trajectory.len() as u32);
        for &m in &self.mi_trajectory {
            w.f64(m);
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProgramError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(ProgramError::BadMagic);
        }
        let mut r = Reader {
            buf: bytes,
            pos: MAGIC.len(),
        };
        let version = r.u16()?;
        if version != VERSION {
            return Err(ProgramError::UnsupportedVersion(version));
        }
        let schedule = Schedule::from_tag(r.u8()?).ok_or_else(|| invalid("schedule tag"))?;
        let cn_kernel = CnKernel::from_tag(r.u8()?).ok_or_else(|| invalid("kernel tag"))?;
        let msg_bits = r.bits()?;
        let recon_bits = r.u8()? as u32;
        if !(2..=16).contains(&recon_bits) {
            return Err(invalid("reconstruction width"));
        }
        let channel_bits = r.bits()?;
        let dv = r.u32()? as usize;
        let dc = r.u32()? as usize;
        let design_sigma = r.f64()?;
        let channel_quantizer = r.threshold()?;
        let init = r.vn()?;
        let n_iter = r.count()?;
        let mut iterations = Vec::with_capacity(n_iter);
        for _ in 0..n_iter {
            let n_cn = r.count()?;
            let cn = (0..n_cn).map(|_| r.cn()).collect::<Result<Vec<_>, _>>()?;
            let n_vn = r.count()?;
            let vn = (0..n_vn).map(|_| r.vn()).collect::<Result<Vec<_>, _>>()?;
            iterations.push(IterationStages { cn, vn });
        }
        let n_mi = r.count()?;
        let mi_trajectory = (0..n_mi).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
        if r.pos != bytes.len() {
            return Err(invalid("trailing bytes"));
        }
        let program = DecoderProgram {
            schedule,
            cn_kernel,
            msg_bits,
            recon_bits,
            channel_bits,
            dv,
            dc,
            design_sigma,
            channel_quantizer,
            init,
            iterations,
            mi_trajectory,
        };
        program.validate()?;
        Ok(program)
    }

    /// Human-readable listing of every table.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = self.dump_into(&mut s);
        s
    }

    fn dump_into(&self, s: &mut String) -> fmt::Result {
        writeln!(s, "schedule        {}", self.schedule.name())?;
        writeln!(s, "cn kernel       {}", self.cn_kernel.name())?;
        writeln!(s, "w / w' / w_ch   {} / {} / {}", self.msg_bits, self.recon_bits, self.channel_bits)?;
        writeln!(s, "degrees         d_v={} d_c={}", self.dv, self.dc)?;
        writeln!(s, "design sigma    {:.6}", self.design_sigma)?;
        writeln!(s, "iterations      {}", self.iterations.len())?;
        writeln!(
            s,
            "channel thresholds {}",
            fmt_list(self.channel_quantizer.boundaries().iter().map(|b| format!("{b:.4}")))
        )?;
        writeln!(s, "\n[init]")?;
        dump_vn(s, &self.init, self.msg_bits)?;
        for (i, it) in self.iterations.iter().enumerate() {
            for (j, (cn, vn)) in it.cn.iter().zip(&it.vn).enumerate() {
                writeln!(s, "\n[iteration {} stage {}]", i + 1, j)?;
                match cn {
                    CnStage::Min => writeln!(s, "  cn  min")?,
                    CnStage::OffsetMin { offset } => writeln!(s, "  cn  offset-min beta={offset}")?,
                    CnStage::Sum { thresholds } => {
                        writeln!(s, "  cn  sum thresholds {}", fmt_list(thresholds.iter()))?
                    }
                }
                dump_vn(s, vn, self.msg_bits)?;
            }
        }
        writeln!(
            s,
            "\nmi trajectory {}",
            fmt_list(self.mi_trajectory.iter().map(|m| format!("{m:.6}")))
        )
    }
}

fn fmt_list<T: fmt::Display>(it: impl Iterator<Item = T>) -> String {
    it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn dump_vn(s: &mut String, vn: &VnStage, bits: u32) -> fmt::Result {
    let labels = fmt_list((0..cell_count(bits)).map(|c| label_of_cell(c, bits)));
    writeln!(s, "  labels       {labels}")?;
    writeln!(s, "  phi_ch       {}", fmt_list(vn.channel.values().iter()))?;
    for (k, t) in vn.inputs.iter().enumerate() {
        writeln!(s, "  phi_in[{k}]    {}", fmt_list(t.values().iter()))?;
    }
    match &vn.quantizer {
        Quantizer::Uniform(u) => writeln!(s, "  q_v          uniform shift={}", u.shift())?,
        Quantizer::Threshold(t) => writeln!(s, "  q_v          thresholds {}", fmt_list(t.boundaries().iter()))?,
    }
    if let Some(m) = &vn.cn_recon {
        writeln!(s, "  |phi_c|      {}", fmt_list(m.iter()))?;
    }
    writeln!(s, "  I(B;T)       {:.6}", vn.mutual_information)
}

const MAGIC: &[u8; 4] = b"MIMP";
const VERSION: u16 = 1;

fn invalid(what: &str) -> ProgramError {
    ProgramError::Invalid(what.to_string())
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i32(&mut self, v: i32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn table(&mut self, t: &ReconTable) {
        self.u8(t.bits() as u8);
        for &v in t.values() {
            self.i32(v);
        }
    }
    fn threshold(&mut self, q: &ThresholdQuantizer) {
        self.u8(q.bits() as u8);
        for &b in q.boundaries() {
            self.f64(b);
        }
    }
    fn vn(&mut self, vn: &VnStage) {
        self.table(&vn.channel);
        self.u32(vn.inputs.len() as u32);
        for t in &vn.inputs {
            self.table(t);
        }
        match &vn.quantizer {
            Quantizer::Threshold(q) => {
                self.u8(0);
                self.threshold(q);
            }
            Quantizer::Uniform(q) => {
                self.u8(1);
                self.u8(q.bits() as u8);
                self.u8(q.shift() as u8);
            }
        }
        match &vn.cn_recon {
            None => self.u32(0),
            Some(m) => {
                self.u32(m.len() as u32);
                for &v in m {
                    self.i32(v);
                }
            }
        }
        self.f64(vn.mutual_information);
    }
    fn cn(&mut self, cn: &CnStage) {
        match cn {
            CnStage::Min => self.u8(0),
            CnStage::OffsetMin { offset } => {
                self.u8(1);
                self.i32(*offset);
            }
            CnStage::Sum { thresholds } => {
                self.u8(2);
                self.u32(thresholds.len() as u32);
                for &t in thresholds {
                    self.i64(t);
                }
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N], ProgramError> {
        let end = self.pos.checked_add(N).ok_or(ProgramError::Truncated)?;
        let s = self.buf.get(self.pos..end).ok_or(ProgramError::Truncated)?;
        self.pos = end;
        Ok(s.try_into().unwrap())
    }
    fn u8(&mut self) -> Result<u8, ProgramError> {
        Ok(self.take::<1>()?[0])
    }
    fn u16(&mut self) -> Result<u16, ProgramError> {
        Ok(u16::from_le_bytes(self.take()?))
    }
    fn u32(&mut self) -> Result<u32, ProgramError> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn i32(&mut self) -> Result<i32, ProgramError> {
        Ok(i32::from_le_bytes(self.take()?))
    }
    fn i64(&mut self) -> Result<i64, ProgramError> {
        Ok(i64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64, ProgramError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
    // element counts are bounded by what is left in the buffer
    fn count(&mut self) -> Result<usize, ProgramError> {
        let n = self.u32()? as usize;
        if n > self.buf.len() - self.pos {
            return Err(ProgramError::Truncated);
        }
        Ok(n)
    }
    fn bits(&mut self) -> Result<u32, ProgramError> {
        let b = self.u8()? as u32;
        if !(1..=6).contains(&b) {
            return Err(invalid("message width"));
        }
        Ok(b)
    }
    fn table(&mut self) -> Result<ReconTable, ProgramError> {
        let bits = self.bits()?;
        let values = (0..cell_count(bits))
            .map(|_| self.i32())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ReconTable::new(bits, values)?)
    }
    fn threshold(&mut self) -> Result<ThresholdQuantizer, ProgramError> {
        let bits = self.bits()?;
        let b = (0..cell_count(bits) - 1)
            .map(|_| self.f64())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ThresholdQuantizer::new(bits, b)?)
    }
    fn vn(&mut self) -> Result<VnStage, ProgramError> {
        let channel = self.table()?;
        let n = self.count()?;
        let inputs = (0..n).map(|_| self.table()).collect::<Result<Vec<_>, _>>()?;
        let quantizer = match self.u8()? {
            0 => Quantizer::Threshold(self.threshold()?),
            1 => {
                let bits = self.bits()?;
                let shift = self.u8()? as u32;
                Quantizer::Uniform(UniformQuantizer::new(bits, shift)?)
            }
            _ => return Err(invalid("quantizer tag")),
        };
        let n = self.count()?;
        let cn_recon = if n == 0 {
            None
        } else {
            Some((0..n).map(|_| self.i32()).collect::<Result<Vec<_>, _>>()?)
        };
        let mutual_information = self.f64()?;
        Ok(VnStage {
            channel,
            inputs,
            quantizer,
            cn_recon,
            mutual_information,
        })
    }
    fn cn(&mut self) -> Result<CnStage, ProgramError> {
        match self.u8()? {
            0 => Ok(CnStage::Min),
            1 => Ok(CnStage::OffsetMin { offset: self.i32()? }),
            2 => {
                let n = self.count()?;
                let thresholds = (0..n).map(|_| self.i64()).collect::<Result<Vec<_>, _>>()?;
                Ok(CnStage::Sum { thresholds })
            }
            _ => Err(invalid("check stage tag")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{design_program, DesignConfig, VnQuantizerKind};

    fn sample(schedule: Schedule, kernel: CnKernel, vq: VnQuantizerKind) -> DecoderProgram {
        let cfg = DesignConfig {
            schedule,
            cn_kernel: kernel,
            iterations: 3,
            vn_quantizer: vq,
            channel_grid: 512,
            ..DesignConfig::default()
        };
        design_program(0.55, 3, 6, &cfg).unwrap()
    }

    #[test]
    fn round_trip() {
        for p in [
            sample(Schedule::Horizontal, CnKernel::Min, VnQuantizerKind::Uniform),
            sample(Schedule::Vertical, CnKernel::ThreeMin, VnQuantizerKind::NonUniform),
            sample(Schedule::Flooding, CnKernel::BoxplusNonUniform, VnQuantizerKind::Uniform),
        ] {
            let bytes = p.to_bytes();
            assert_eq!(DecoderProgram::from_bytes(&bytes).unwrap(), p);
        }
    }

    #[test]
    fn corrupted_files() {
        let p = sample(Schedule::Horizontal, CnKernel::Min, VnQuantizerKind::Uniform);
        let bytes = p.to_bytes();
        assert_eq!(DecoderProgram::from_bytes(b"XXXX"), Err(ProgramError::BadMagic));
        let mut v = bytes.clone();
        v[4] = 9;
        assert_eq!(DecoderProgram::from_bytes(&v), Err(ProgramError::UnsupportedVersion(9)));
        for cut in [6, 20, bytes.len() / 2, bytes.len() - 1] {
            assert_eq!(DecoderProgram::from_bytes(&bytes[..cut]), Err(ProgramError::Truncated));
        }
        let mut v = bytes.clone();
        v.push(0);
        assert!(matches!(DecoderProgram::from_bytes(&v), Err(ProgramError::Invalid(_))));
    }

    #[test]
    fn dump_lists_every_stage() {
        let p = sample(Schedule::Horizontal, CnKernel::Min, VnQuantizerKind::Uniform);
        let text = p.dump();
        assert!(text.contains("schedule        horizontal"));
        assert_eq!(text.matches("[iteration").count(), 9);
        assert!(text.contains("phi_in[2]"));
    }

    #[test]
    fn accumulator_width() {
        let p = sample(Schedule::Horizontal, CnKernel::Min, VnQuantizerKind::Uniform);
        // w' = 6, d_v = 3 -> two extra bits
        assert_eq!(p.accumulator_limit(), 127);
    }
}
