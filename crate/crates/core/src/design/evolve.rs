//! Discrete density evolution and per-stage table design.

use crate::im::pmf::sign_of;
use crate::im::quantize::{cell_count, max_label};
use crate::im::{
    design_mim_quantizer, label_llrs, pmf_of_cn, pmf_of_sum, quantize_pmf_symmetric, apply_quantizer, ImError,
    JointPmf, PairKernel, Parity, Quantizer, ReconTable, ThresholdQuantizer, UniformQuantizer,
};

use super::channel::{design_channel_quantizer, design_uniform_channel, ChannelModel, DEFAULT_CHANNEL_GRID};
use super::program::{CnKernel, CnStage, DecoderProgram, IterationStages, Schedule, VnStage};
use super::DesignError;

/// `-ln tanh(L / 2)` is capped at this value before scaling to integers.
pub const BOXPLUS_F_CAP: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VnQuantizerKind {
    /// Shift-and-clip of the integer sum.
    Uniform,
    /// Information-maximizing thresholds on the integer sum.
    NonUniform,
}

/// How reconstruction tables are scaled to `w'`-bit integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scaling {
    /// Each variable stage picks its own scale.
    PerStage,
    /// One scale for the whole program, so that a check message is always
    /// reconstructed to the same integer.
    Global,
}

impl std::str::FromStr for VnQuantizerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(VnQuantizerKind::Uniform),
            "non-uniform" | "nonuniform" => Ok(VnQuantizerKind::NonUniform),
            _ => Err(format!("unknown variable-node quantizer `{s}` (uniform, non-uniform)")),
        }
    }
}

impl std::str::FromStr for Scaling {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "per-stage" => Ok(Scaling::PerStage),
            "global" => Ok(Scaling::Global),
            _ => Err(format!("unknown scaling `{s}` (per-stage, global)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub schedule: Schedule,
    pub cn_kernel: CnKernel,
    pub msg_bits: u32,
    pub recon_bits: u32,
    pub channel_bits: u32,
    pub iterations: usize,
    pub vn_quantizer: VnQuantizerKind,
    /// `None` picks [`Scaling::Global`] for APP-transfer schedules and
    /// [`Scaling::PerStage`] otherwise.
    pub scaling: Option<Scaling>,
    pub channel_grid: usize,
    /// Cap on label LLRs, in nats.
    pub llr_cap: f64,
    /// Offset of the offset-min kernel, in label units.
    pub omsq_offset: i32,
}

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            schedule: Schedule::Horizontal,
            cn_kernel: CnKernel::Min,
            msg_bits: 3,
            recon_bits: 6,
            channel_bits: 4,
            iterations: 10,
            vn_quantizer: VnQuantizerKind::Uniform,
            scaling: None,
            channel_grid: DEFAULT_CHANNEL_GRID,
            llr_cap: 25.0,
            omsq_offset: 1,
        }
    }
}

impl DesignConfig {
    pub fn effective_scaling(&self) -> Scaling {
        self.scaling.unwrap_or(match self.schedule {
            Schedule::HorizontalApp => Scaling::Global,
            _ => Scaling::PerStage,
        })
    }

    fn validate(&self, dv: usize, dc: usize) -> Result<(), DesignError> {
        let bad = |m: String| Err(DesignError::Invalid(m));
        if !(1..=6).contains(&self.msg_bits) || !(1..=6).contains(&self.channel_bits) {
            return bad("message widths must be 1..=6 bits".into());
        }
        if self.recon_bits < self.msg_bits.max(2) || self.recon_bits > 16 {
            return bad(format!("reconstruction width {} out of range", self.recon_bits));
        }
        if dv < 1 || dc < 2 {
            return bad(format!("degrees d_v={dv} d_c={dc} unsupported"));
        }
        let vertical_kernels = matches!(self.cn_kernel, CnKernel::ThreeMin);
        if vertical_kernels && self.schedule != Schedule::Vertical {
            return bad("the three-minimum kernel needs the vertical schedule".into());
        }
        if self.cn_kernel == CnKernel::Omsq {
            if self.omsq_offset < 0 {
                return bad("offset must be non-negative".into());
            }
            if (1 << self.recon_bits) <= (1 << self.msg_bits.max(self.channel_bits)) - 1 {
                return bad("offset-min levels need w' > max(w, w_ch)".into());
            }
        }
        if self.schedule == Schedule::HorizontalApp && self.effective_scaling() != Scaling::Global {
            return bad("APP-transfer decoding needs globally scaled tables".into());
        }
        Ok(())
    }
}

/// Designs a complete decoder program for noise deviation `sigma`.
pub fn design_program(sigma: f64, dv: usize, dc: usize, cfg: &DesignConfig) -> Result<DecoderProgram, DesignError> {
    cfg.validate(dv, dc)?;
    let channel = if cfg.cn_kernel == CnKernel::Omsq {
        design_uniform_channel(sigma, cfg.channel_bits)?
    } else {
        design_channel_quantizer(sigma, cfg.channel_bits, cfg.channel_grid)?
    };
    match (cfg.cn_kernel, cfg.effective_scaling()) {
        (CnKernel::Omsq, _) | (_, Scaling::PerStage) => {
            let mut d = Designer::new(cfg, &channel, None);
            d.run(dv, dc)
        }
        (_, Scaling::Global) => {
            let mut probe = Designer::new(cfg, &channel, None);
            probe.run(dv, dc)?;
            let limit = recon_limit(cfg.recon_bits) as f64;
            let scale = limit / probe.max_llr.max(1e-9);
            let mut d = Designer::new(cfg, &channel, Some(scale));
            d.run(dv, dc)
        }
    }
}

/// Noise deviation of BPSK over AWGN at `ebn0_db` for code rate `rate`.
pub fn sigma_from_ebn0(ebn0_db: f64, rate: f64) -> Result<f64, DesignError> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(DesignError::Invalid(format!("code rate {rate} must lie in (0, 1)")));
    }
    if ebn0_db.is_nan() {
        return Err(DesignError::Invalid("Eb/N0 is NaN".into()));
    }
    Ok((1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt())
}

/// Lowest Eb/N0 on the grid `lo, lo + step, ..` (up to `hi`) at which the
/// designed program's final predicted mutual information reaches `target`.
pub fn de_threshold_ebn0(
    dv: usize,
    dc: usize,
    rate: f64,
    cfg: &DesignConfig,
    (lo, hi, step): (f64, f64, f64),
    target: f64,
) -> Result<Option<f64>, DesignError> {
    if !(step > 0.0 && hi >= lo) {
        return Err(DesignError::Invalid(format!("bad threshold grid {lo}..{hi} step {step}")));
    }
    let points = ((hi - lo) / step + 1e-9).floor() as usize;
    for i in 0..=points {
        let ebn0 = lo + step * i as f64;
        let program = design_program(sigma_from_ebn0(ebn0, rate)?, dv, dc, cfg)?;
        if program.mi_trajectory.last().copied().unwrap_or(0.0) >= target {
            return Ok(Some(ebn0));
        }
    }
    Ok(None)
}

fn recon_limit(bits: u32) -> i32 {
    (1 << (bits - 1)) - 1
}

/// A variable-to-check message distribution and how checks reconstruct it.
#[derive(Debug, Clone)]
struct Message {
    pmf: JointPmf,
    cn_recon: Option<Vec<i32>>,
}

struct Designer<'a> {
    cfg: &'a DesignConfig,
    channel: &'a ChannelModel,
    scale: Option<f64>,
    max_llr: f64,
}

impl<'a> Designer<'a> {
    fn new(cfg: &'a DesignConfig, channel: &'a ChannelModel, scale: Option<f64>) -> Self {
        Designer {
            cfg,
            channel,
            scale,
            max_llr: 0.0,
        }
    }

    fn run(&mut self, dv: usize, dc: usize) -> Result<DecoderProgram, DesignError> {
        let (init, v0) = self.vn_stage(&[], &[])?;
        let mut iterations = Vec::with_capacity(self.cfg.iterations);
        let mut mi_trajectory = Vec::with_capacity(self.cfg.iterations);
        match self.cfg.schedule {
            Schedule::Flooding => self.flooding(dv, dc, v0, &mut iterations, &mut mi_trajectory)?,
            Schedule::Horizontal | Schedule::HorizontalApp => {
                self.horizontal(dv, dc, v0, &mut iterations, &mut mi_trajectory)?
            }
            Schedule::Vertical => self.vertical(dv, dc, v0, &mut iterations, &mut mi_trajectory)?,
        }
        let program = DecoderProgram {
            schedule: self.cfg.schedule,
            cn_kernel: self.cfg.cn_kernel,
            msg_bits: self.cfg.msg_bits,
            recon_bits: self.cfg.recon_bits,
            channel_bits: self.cfg.channel_bits,
            dv,
            dc,
            design_sigma: self.channel.sigma,
            channel_quantizer: self.channel.quantizer.clone(),
            init,
            iterations,
            mi_trajectory,
        };
        program.validate()?;
        Ok(program)
    }

    fn flooding(
        &mut self,
        dv: usize,
        dc: usize,
        mut v: Message,
        iterations: &mut Vec<IterationStages>,
        mi: &mut Vec<f64>,
    ) -> Result<(), DesignError> {
        for _ in 0..self.cfg.iterations {
            let inputs = vec![&v; dc - 1];
            let (cn, c) = self.cn_stage(&inputs)?;
            let (vn, next) = self.vn_stage(&[Some(&c)], &vec![0; dv - 1])?;
            mi.push(next.pmf.mutual_information());
            iterations.push(IterationStages {
                cn: vec![cn],
                vn: vec![vn],
            });
            v = next;
        }
        Ok(())
    }

    fn horizontal(
        &mut self,
        dv: usize,
        dc: usize,
        v0: Message,
        iterations: &mut Vec<IterationStages>,
        mi: &mut Vec<f64>,
    ) -> Result<(), DesignError> {
        // latest message towards each layer, latest check output of each layer
        let mut towards: Vec<Message> = vec![v0; dv];
        let mut checks: Vec<Option<JointPmf>> = vec![None; dv];
        for _ in 0..self.cfg.iterations {
            let mut stages = IterationStages {
                cn: Vec::with_capacity(dv),
                vn: Vec::with_capacity(dv),
            };
            for j in 0..dv {
                let inputs = vec![&towards[j]; dc - 1];
                let (cn, c) = self.cn_stage(&inputs)?;
                checks[j] = Some(c);
                let target = (j + 1) % dv;
                let sources: Vec<Option<&JointPmf>> = checks.iter().map(|c| c.as_ref()).collect();
                let extrinsic: Vec<usize> = (0..dv).filter(|&l| l != target && checks[l].is_some()).collect();
                let (vn, out) = self.vn_stage(&sources, &extrinsic)?;
                stages.cn.push(cn);
                stages.vn.push(vn);
                towards[target] = out;
            }
            mi.push(towards[0].pmf.mutual_information());
            iterations.push(stages);
        }
        Ok(())
    }

    fn vertical(
        &mut self,
        dv: usize,
        dc: usize,
        v0: Message,
        iterations: &mut Vec<IterationStages>,
        mi: &mut Vec<f64>,
    ) -> Result<(), DesignError> {
        if self.cfg.iterations == 0 {
            return Ok(());
        }
        // first iteration: every check sees the channel-only messages
        let inputs = vec![&v0; dc - 1];
        let (cn, c) = self.cn_stage(&inputs)?;
        let (vn, v1) = self.vn_stage(&[Some(&c)], &vec![0; dv - 1])?;
        mi.push(v1.pmf.mutual_information());
        iterations.push(IterationStages {
            cn: vec![cn],
            vn: vec![vn],
        });
        let mut layers: Vec<Message> = vec![v1; dc];
        for _ in 1..self.cfg.iterations {
            let mut stages = IterationStages {
                cn: Vec::with_capacity(dc),
                vn: Vec::with_capacity(dc),
            };
            for l in 0..dc {
                let inputs: Vec<&Message> = (0..dc).filter(|&k| k != l).map(|k| &layers[k]).collect();
                let (cn, c) = self.cn_stage(&inputs)?;
                let (vn, out) = self.vn_stage(&[Some(&c)], &vec![0; dv - 1])?;
                stages.cn.push(cn);
                stages.vn.push(vn);
                layers[l] = out;
            }
            let mean = layers.iter().map(|m| m.pmf.mutual_information()).sum::<f64>() / dc as f64;
            mi.push(mean);
            iterations.push(stages);
        }
        Ok(())
    }

    fn cn_stage(&self, inputs: &[&Message]) -> Result<(CnStage, JointPmf), DesignError> {
        let bits = self.cfg.msg_bits;
        match self.cfg.cn_kernel {
            CnKernel::Min | CnKernel::ThreeMin => {
                let pmfs: Vec<&JointPmf> = inputs.iter().map(|m| &m.pmf).collect();
                Ok((CnStage::Min, pmf_of_cn(&pmfs, PairKernel::Min)?))
            }
            CnKernel::Omsq => {
                let pmfs: Vec<&JointPmf> = inputs.iter().map(|m| &m.pmf).collect();
                let beta = self.cfg.omsq_offset as f64;
                let out = pmf_of_cn(&pmfs, PairKernel::Min)?.map_values(|t| sign_of(t) * (t.abs() - beta).max(1.0));
                Ok((
                    CnStage::OffsetMin {
                        offset: self.cfg.omsq_offset,
                    },
                    out,
                ))
            }
            CnKernel::BoxplusNonUniform | CnKernel::BoxplusUniform => {
                let mapped: Vec<JointPmf> = inputs
                    .iter()
                    .map(|m| {
                        let r = m.cn_recon.as_ref().expect("sum kernel messages carry check tables");
                        m.pmf.map_values(|t| sign_of(t) * r[t.abs() as usize - 1] as f64)
                    })
                    .collect();
                let refs: Vec<&JointPmf> = mapped.iter().collect();
                let sums = pmf_of_cn(&refs, PairKernel::Sum)?;
                let thresholds = if self.cfg.cn_kernel == CnKernel::BoxplusNonUniform {
                    match sum_thresholds_mim(&sums, bits) {
                        Ok(t) => t,
                        Err(ImError::AlphabetTooSmall { .. }) => sum_thresholds_uniform(&sums, bits),
                        Err(e) => return Err(e.into()),
                    }
                } else {
                    sum_thresholds_uniform(&sums, bits)
                };
                let out = apply_sum_thresholds(&sums, &thresholds, bits);
                Ok((CnStage::Sum { thresholds }, out))
            }
        }
    }

    /// Designs one variable stage. `sources[k]` is the distribution of check
    /// messages read through input table `k` (`None`: nothing received yet);
    /// `extrinsic` lists the sources summed into the outgoing message, with
    /// repetition.
    fn vn_stage(&mut self, sources: &[Option<&JointPmf>], extrinsic: &[usize]) -> Result<(VnStage, Message), DesignError> {
        if self.cfg.cn_kernel == CnKernel::Omsq {
            return self.vn_stage_fixed(sources, extrinsic);
        }
        let cfg = self.cfg;
        let w = cfg.msg_bits;
        let limit = recon_limit(cfg.recon_bits);
        let ch_llr = label_llrs(&self.channel.pmf, cfg.channel_bits, cfg.llr_cap);
        let src_llr: Vec<Option<Vec<f64>>> = sources
            .iter()
            .map(|s| s.map(|p| label_llrs(p, w, cfg.llr_cap)))
            .collect();
        let l_max = src_llr
            .iter()
            .flatten()
            .chain(std::iter::once(&ch_llr))
            .flat_map(|v| v.iter())
            .fold(0.0f64, |a, &b| a.max(b.abs()));
        self.max_llr = self.max_llr.max(l_max);
        if l_max <= 0.0 {
            return Err(DesignError::Degenerate("messages carry no information".into()));
        }
        let alphas: Vec<f64> = match (self.scale, cfg.vn_quantizer) {
            (Some(a), _) => vec![a],
            (None, VnQuantizerKind::NonUniform) => vec![limit as f64 / l_max],
            (None, VnQuantizerKind::Uniform) => (0..16).map(|i| limit as f64 / l_max * (0.5 + i as f64 / 30.0)).collect(),
        };

        let mut best: Option<(f64, VnStage, JointPmf)> = None;
        for &alpha in &alphas {
            let channel = ReconTable::from_llrs(cfg.channel_bits, &ch_llr, alpha, limit, Parity::Odd);
            let inputs: Vec<ReconTable> = src_llr
                .iter()
                .map(|l| match l {
                    Some(l) => ReconTable::from_llrs(w, l, alpha, limit, Parity::Even),
                    None => ReconTable::zeros(w),
                })
                .collect();
            let y = sum_pmf(&self.channel.pmf, &channel, sources, &inputs, extrinsic)?;
            let mut consider = |q: Quantizer, out: JointPmf| {
                let mi = out.mutual_information();
                if best.as_ref().is_none_or(|b| mi > b.0 + 1e-12) {
                    let stage = VnStage {
                        channel: channel.clone(),
                        inputs: inputs.clone(),
                        quantizer: q,
                        cn_recon: None,
                        mutual_information: mi,
                    };
                    best = Some((mi, stage, out));
                }
            };
            let designed = match cfg.vn_quantizer {
                VnQuantizerKind::NonUniform => match design_mim_quantizer(&y, w, true) {
                    Ok(d) => {
                        consider(Quantizer::Threshold(d.quantizer), d.compressed);
                        true
                    }
                    Err(ImError::AlphabetTooSmall { .. }) => false,
                    Err(e) => return Err(e.into()),
                },
                VnQuantizerKind::Uniform => false,
            };
            if !designed {
                // shift 0 up to the width of the accumulator
                for s in 0..=cfg.recon_bits + 3 {
                    let q = Quantizer::Uniform(UniformQuantizer::new(w, s)?);
                    let out = quantize_pmf_symmetric(&y, |v| apply_quantizer(&q, v));
                    consider(q, out);
                }
            }
        }
        let (_, mut stage, pmf) = best.expect("at least one candidate");
        let cn_recon = cfg.cn_kernel.is_sum().then(|| boxplus_magnitudes(&pmf, w, cfg.llr_cap, limit));
        stage.cn_recon = cn_recon.clone();
        Ok((stage, Message { pmf, cn_recon }))
    }

    // offset-min decoding: odd integer levels 2t - sign(t) everywhere and a
    // nearest-level quantizer
    fn vn_stage_fixed(&mut self, sources: &[Option<&JointPmf>], extrinsic: &[usize]) -> Result<(VnStage, Message), DesignError> {
        let cfg = self.cfg;
        let w = cfg.msg_bits;
        let channel = odd_levels(cfg.channel_bits)?;
        let inputs: Vec<ReconTable> = sources
            .iter()
            .map(|s| if s.is_some() { odd_levels(w) } else { Ok(ReconTable::zeros(w)) })
            .collect::<Result<_, _>>()?;
        let y = sum_pmf(&self.channel.pmf, &channel, sources, &inputs, extrinsic)?;
        let q = Quantizer::Threshold(nearest_odd_level_quantizer(w)?);
        let pmf = quantize_pmf_symmetric(&y, |v| apply_quantizer(&q, v));
        let stage = VnStage {
            channel,
            inputs,
            quantizer: q,
            cn_recon: None,
            mutual_information: pmf.mutual_information(),
        };
        Ok((stage, Message { pmf, cn_recon: None }))
    }
}

/// Table with `phi(t) = 2t - sign(t)`.
pub fn odd_levels(bits: u32) -> Result<ReconTable, ImError> {
    let values = crate::im::labels(bits).into_iter().map(|t| 2 * t - t.signum()).collect();
    ReconTable::new(bits, values)
}

/// Maps an integer onto the nearest odd level `2t - sign(t)`, clipping at
/// `2^w - 1`.
pub fn nearest_odd_level_quantizer(bits: u32) -> Result<ThresholdQuantizer, ImError> {
    let half = cell_count(bits) as i64 / 2;
    let boundaries = (-(half - 1)..half).map(|k| 2.0 * k as f64).collect();
    ThresholdQuantizer::new(bits, boundaries)
}

// Distribution of phi_ch(t_ch) + sum over `extrinsic` of phi_k(t_k).
fn sum_pmf(
    channel_pmf: &JointPmf,
    channel: &ReconTable,
    sources: &[Option<&JointPmf>],
    inputs: &[ReconTable],
    extrinsic: &[usize],
) -> Result<JointPmf, ImError> {
    let mut y = channel_pmf.map_values(|t| channel.get(t as i32) as f64);
    let mut mapped: Vec<Option<JointPmf>> = vec![None; sources.len()];
    for &k in extrinsic {
        let Some(src) = sources[k] else { continue };
        let m = mapped[k].get_or_insert_with(|| src.map_values(|t| inputs[k].get(t as i32) as f64));
        y = pmf_of_sum(&y, m)?;
    }
    Ok(y)
}

/// `|phi_c|` per message magnitude: `-ln tanh(L/2)` scaled so that
/// [`BOXPLUS_F_CAP`] maps to `limit`, clamped to `[1, limit]`.
fn boxplus_magnitudes(pmf: &JointPmf, bits: u32, cap: f64, limit: i32) -> Vec<i32> {
    let llrs = label_llrs(pmf, bits, cap);
    let half = max_label(bits) as usize;
    let scale = limit as f64 / BOXPLUS_F_CAP;
    let mut out: Vec<i32> = llrs[half..]
        .iter()
        .map(|&l| {
            let f = if l <= 0.0 { BOXPLUS_F_CAP } else { (-(l / 2.0).tanh().ln()).min(BOXPLUS_F_CAP) };
            ((scale * f).round() as i32).clamp(1, limit)
        })
        .collect();
    // keep |phi_c| non-increasing in |t|
    for i in 1..out.len() {
        out[i] = out[i].min(out[i - 1]);
    }
    out
}

/// Joint pmf of the output labels of a sum-kernel check stage.
pub fn apply_sum_thresholds(sums: &JointPmf, thresholds: &[i64], bits: u32) -> JointPmf {
    sums.map_values(|v| sign_of(v) * CnStage::sum_magnitude(thresholds, v.abs().round() as i64, bits) as f64)
}

// Information-maximizing thresholds on S. Reliability falls with S, so the
// design runs on the key sign * (S_max + 1 - S).
fn sum_thresholds_mim(sums: &JointPmf, bits: u32) -> Result<Vec<i64>, ImError> {
    let s_max = sums.values().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let keys = sums.map_values(|v| sign_of(v) * (s_max + 1.0 - v.abs()));
    let design = design_mim_quantizer(&keys, bits, true)?;
    let half = cell_count(bits) / 2;
    let values = keys.values();
    let mut thresholds = Vec::with_capacity(half - 1);
    for m in (2..=half).rev() {
        // smallest S in the cell of magnitude m - 1
        let cell = &design.cells[half + m - 2];
        let top_key = values[cell.end - 1];
        thresholds.push((s_max + 1.0 - top_key).round() as i64);
    }
    Ok(thresholds)
}

fn sum_thresholds_uniform(sums: &JointPmf, bits: u32) -> Vec<i64> {
    let half = cell_count(bits) as i64 / 2;
    let mut best: Option<(f64, Vec<i64>)> = None;
    for s in 0..24 {
        let th: Vec<i64> = (1..half).map(|j| j << s).collect();
        let mi = apply_sum_thresholds(sums, &th, bits).mutual_information();
        if best.as_ref().is_none_or(|b| mi > b.0 + 1e-12) {
            best = Some((mi, th));
        }
    }
    best.expect("non-empty scan").1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::im::quantize::labels;

    #[test]
    fn ebn0_conversion() {
        assert!((sigma_from_ebn0(0.0, 0.5).unwrap() - 1.0).abs() < 1e-12);
        assert!((sigma_from_ebn0(4.0, 5.0 / 6.0).unwrap() - 0.4887).abs() < 1e-4);
        assert!(sigma_from_ebn0(200.0, 0.5).unwrap() < 1e-9);
        assert!(sigma_from_ebn0(1.0, 1.0).is_err());
    }

    #[test]
    fn threshold_scan_finds_first_passing_point() {
        let c = cfg(Schedule::Flooding, CnKernel::Min, 10);
        let t = de_threshold_ebn0(3, 6, 0.5, &c, (0.0, 4.0, 0.25), 0.999).unwrap().unwrap();
        let below = design_program(sigma_from_ebn0(t - 0.25, 0.5).unwrap(), 3, 6, &c).unwrap();
        let at = design_program(sigma_from_ebn0(t, 0.5).unwrap(), 3, 6, &c).unwrap();
        assert!(*below.mi_trajectory.last().unwrap() < 0.999);
        assert!(*at.mi_trajectory.last().unwrap() >= 0.999);
    }

    fn cfg(schedule: Schedule, kernel: CnKernel, iterations: usize) -> DesignConfig {
        DesignConfig {
            schedule,
            cn_kernel: kernel,
            iterations,
            channel_grid: 512,
            ..DesignConfig::default()
        }
    }

    #[test]
    fn horizontal_min_program_shape() {
        let p = design_program(0.55, 3, 6, &cfg(Schedule::Horizontal, CnKernel::Min, 4)).unwrap();
        assert_eq!(p.iterations.len(), 4);
        assert!(p.iterations.iter().all(|it| it.cn.len() == 3 && it.vn.len() == 3));
        assert!(p.iterations.iter().flat_map(|it| &it.vn).all(|v| v.inputs.len() == 3));
        // nothing from the previous iteration exists yet in the first one
        assert!(p.iterations[0].vn[0].inputs[1].is_zero());
        assert!(p.iterations[0].vn[0].inputs[2].is_zero());
        assert!(!p.iterations[0].vn[0].inputs[0].is_zero());
        assert_eq!(p.mi_trajectory.len(), 4);
    }

    #[test]
    fn odd_channel_even_messages() {
        let p = design_program(0.6, 3, 6, &cfg(Schedule::Flooding, CnKernel::Min, 3)).unwrap();
        for vn in p.iterations.iter().flat_map(|it| &it.vn) {
            assert!(vn.channel.values().iter().all(|v| v.rem_euclid(2) == 1));
            assert!(vn.inputs[0].values().iter().all(|v| v % 2 == 0));
            assert!(vn.channel.max_magnitude() <= 31);
        }
    }

    #[test]
    fn information_grows_below_threshold() {
        // rate-1/2 (3,6) code well above its threshold in Eb/N0
        let p = design_program(0.7, 3, 6, &cfg(Schedule::Flooding, CnKernel::Min, 15)).unwrap();
        let mi = &p.mi_trajectory;
        assert!(mi.last().unwrap() > &0.99, "{mi:?}");
        assert!(mi.windows(2).all(|w| w[1] >= w[0] - 1e-9), "{mi:?}");
    }

    #[test]
    fn check_stage_never_creates_information() {
        let channel = design_channel_quantizer(0.6, 4, 512).unwrap();
        let c = cfg(Schedule::Flooding, CnKernel::Min, 1);
        let mut d = Designer::new(&c, &channel, None);
        let (_, v0) = d.vn_stage(&[], &[]).unwrap();
        let (_, out) = d.cn_stage(&[&v0, &v0]).unwrap();
        assert!(out.mutual_information() <= v0.pmf.mutual_information() + 1e-12);
    }

    #[test]
    fn degree_two_check_passes_message_through() {
        let channel = design_channel_quantizer(0.6, 3, 512).unwrap();
        let c = DesignConfig {
            channel_bits: 3,
            ..cfg(Schedule::Flooding, CnKernel::Min, 1)
        };
        let mut d = Designer::new(&c, &channel, None);
        let (_, v0) = d.vn_stage(&[], &[]).unwrap();
        let (_, out) = d.cn_stage(&[&v0]).unwrap();
        assert_eq!(out, v0.pmf);
    }

    #[test]
    fn global_scaling_is_stationary() {
        let p = design_program(0.5, 3, 18, &cfg(Schedule::HorizontalApp, CnKernel::Min, 5)).unwrap();
        assert!(p.is_stationary());
        let p = design_program(0.5, 3, 18, &cfg(Schedule::Horizontal, CnKernel::Min, 5)).unwrap();
        assert!(!p.is_stationary());
    }

    #[test]
    fn vertical_layout() {
        let p = design_program(0.6, 3, 6, &cfg(Schedule::Vertical, CnKernel::ThreeMin, 3)).unwrap();
        assert_eq!(p.iterations[0].cn.len(), 1);
        assert_eq!(p.iterations[1].cn.len(), 6);
        assert_eq!(p.iterations[2].vn.len(), 6);
    }

    #[test]
    fn sum_kernel_thresholds_are_consistent() {
        for kernel in [CnKernel::BoxplusNonUniform, CnKernel::BoxplusUniform] {
            let p = design_program(0.6, 3, 6, &cfg(Schedule::Flooding, kernel, 3)).unwrap();
            for it in &p.iterations {
                let CnStage::Sum { thresholds } = &it.cn[0] else { panic!() };
                assert_eq!(thresholds.len(), 3);
                assert!(thresholds.windows(2).all(|w| w[0] <= w[1]));
            }
            let r = p.init.cn_recon.as_ref().unwrap();
            assert!(r.windows(2).all(|w| w[0] >= w[1]) && r.iter().all(|&v| v >= 1));
        }
    }

    #[test]
    fn mim_sum_thresholds_match_designed_cells() {
        // the S-threshold conversion must reproduce the designed compression
        let a: Vec<f64> = (1..=12).map(|s| 0.8f64.powi(s)).collect();
        let b: Vec<f64> = (1..=12).map(|s| 0.5f64.powi(s)).collect();
        let total: f64 = a.iter().chain(&b).sum();
        let values: Vec<f64> = (1..=12).flat_map(|s| [s as f64, -(s as f64)]).collect();
        let given: Vec<f64> = a.iter().zip(&b).flat_map(|(x, y)| [x / total, y / total]).collect();
        let p = JointPmf::symmetric_from_conditional(&values, &given).unwrap();
        let th = sum_thresholds_mim(&p, 2).unwrap();
        let s_max = 12.0;
        let keys = p.map_values(|v| sign_of(v) * (s_max + 1.0 - v.abs()));
        let d = design_mim_quantizer(&keys, 2, true).unwrap();
        let out = apply_sum_thresholds(&p, &th, 2);
        assert!((out.mutual_information() - d.mutual_information).abs() < 1e-12);
    }

    #[test]
    fn odd_levels_and_nearest_quantizer() {
        let t = odd_levels(3).unwrap();
        assert_eq!(t.values(), &[-7, -5, -3, -1, 1, 3, 5, 7]);
        let q = nearest_odd_level_quantizer(3).unwrap();
        for y in -20i32..=20 {
            let label = q.apply(y as f64);
            let level = 2 * label - label.signum();
            if y % 2 != 0 && y.abs() <= 7 {
                assert_eq!(level, y);
            }
            assert!(labels(3).contains(&label));
        }
    }

    #[test]
    fn omsq_program_validates() {
        let c = DesignConfig {
            msg_bits: 4,
            channel_bits: 4,
            recon_bits: 6,
            ..cfg(Schedule::Horizontal, CnKernel::Omsq, 4)
        };
        let p = design_program(0.5, 3, 18, &c).unwrap();
        assert!(p.is_stationary());
        assert!(matches!(p.iterations[0].cn[0], CnStage::OffsetMin { offset: 1 }));
    }

    #[test]
    fn invalid_configs() {
        let c = cfg(Schedule::Horizontal, CnKernel::ThreeMin, 3);
        assert!(matches!(design_program(0.5, 3, 6, &c), Err(DesignError::Invalid(_))));
        let c = DesignConfig {
            scaling: Some(Scaling::PerStage),
            ..cfg(Schedule::HorizontalApp, CnKernel::Min, 3)
        };
        assert!(matches!(design_program(0.5, 3, 6, &c), Err(DesignError::Invalid(_))));
        let c = DesignConfig {
            recon_bits: 2,
            ..cfg(Schedule::Horizontal, CnKernel::Min, 3)
        };
        assert!(matches!(design_program(0.5, 3, 6, &c), Err(DesignError::Invalid(_))));
    }
}
