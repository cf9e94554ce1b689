//! Gate-count and memory estimates per edge and iteration.
//!
//! Arithmetic units are ripple-carry: five gates per full adder, one full
//! adder per bit. Barrel shifters are built from 2:1 multiplexers at three
//! gates each.

use std::fmt;

use thiserror::Error;

use crate::design::Schedule;

/// Multiplexer counts of reconfigurable barrel shifters, by lifting size.
pub const BARREL_SHIFTERS: [(usize, usize); 6] = [(48, 336), (64, 448), (128, 1024), (256, 2304), (384, 3840), (512, 5120)];

#[derive(Error, Debug, Clone, PartialEq)]
pub enum ComplexityError {
    #[error("no barrel shifter figure for Z = {z}; supported sizes are {supported:?}")]
    UnsupportedLift { z: usize, supported: Vec<usize> },
    #[error("adder width {0} outside the tabulated 1..=9 bits")]
    BitWidth(u32),
    #[error("invalid node configuration: {0}")]
    InvalidNode(String),
}

/// Unit gate costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateModel {
    pub gates_per_mux: f64,
    pub gates_per_full_adder: u32,
}

impl Default for GateModel {
    fn default() -> Self {
        GateModel {
            gates_per_mux: 3.0,
            gates_per_full_adder: 5,
        }
    }
}

impl GateModel {
    pub fn shifter_gates_per_bit(&self, z: usize) -> Result<f64, ComplexityError> {
        let n_mux = BARREL_SHIFTERS.iter().find(|(lz, _)| *lz == z).map(|&(_, n)| n).ok_or_else(|| {
            ComplexityError::UnsupportedLift {
                z,
                supported: BARREL_SHIFTERS.iter().map(|&(lz, _)| lz).collect(),
            }
        })?;
        Ok(self.gates_per_mux * n_mux as f64 / z as f64)
    }

    pub fn arith_gates(&self, bits: u32) -> Result<u32, ComplexityError> {
        if !(1..=9).contains(&bits) {
            return Err(ComplexityError::BitWidth(bits));
        }
        Ok(self.gates_per_full_adder * bits)
    }
}

/// Gates per shifted bit for lifting size `z` under the default gate model.
pub fn shifter_gates_per_bit(z: usize) -> Result<f64, ComplexityError> {
    GateModel::default().shifter_gates_per_bit(z)
}

/// Gates of one `bits`-wide addition or comparison.
pub fn arith_gates(bits: u32) -> Result<u32, ComplexityError> {
    GateModel::default().arith_gates(bits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeType {
    Check,
    Variable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Update {
    Full,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKernel {
    NonUniform,
    Uniform,
    Min,
    ThreeMin,
}

/// Operation counts of one node update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeOps {
    pub additions: f64,
    pub comparisons: f64,
    pub translations: f64,
}

/// Operation counts of one update of a node of degree `d` exchanging
/// `w`-bit messages.
pub fn node_cost(node: NodeType, update: Update, kernel: NodeKernel, d: usize, w: u32) -> Result<NodeOps, ComplexityError> {
    use NodeKernel::*;
    if d < 2 || w < 1 {
        return Err(ComplexityError::InvalidNode(format!("degree {d} and width {w} unsupported")));
    }
    let d = d as f64;
    let w1 = (w - 1) as f64;
    let ops = |additions, comparisons, translations| {
        Ok(NodeOps {
            additions,
            comparisons,
            translations,
        })
    };
    match (node, update, kernel) {
        (NodeType::Check, Update::Full, NonUniform) => ops(2.0 * d - 2.0, d * w1, d),
        (NodeType::Check, Update::Full, Uniform) => ops(2.0 * d - 2.0, 0.0, d - 2.0),
        (NodeType::Check, Update::Full, Min) => ops(0.0, d + d.log2() - 2.0, 0.0),
        (NodeType::Variable, Update::Full, NonUniform) => ops(2.0 * d - 1.0, d * w1, d + 1.0),
        (NodeType::Variable, Update::Full, Uniform) => ops(2.0 * d - 1.0, 0.0, d + 1.0),
        (NodeType::Check, Update::Partial, NonUniform) => ops(2.0, w1, 1.0),
        (NodeType::Check, Update::Partial, Uniform) => ops(d - 2.0, 0.0, d - 2.0),
        (NodeType::Check, Update::Partial, ThreeMin) => ops(0.0, 3.0, 0.0),
        (NodeType::Variable, Update::Partial, NonUniform) => ops(2.0, w1, 1.0),
        (NodeType::Variable, Update::Partial, Uniform) => ops(d - 1.0, 0.0, d),
        (n, u, k) => Err(ComplexityError::InvalidNode(format!("{u:?} {n:?} update with {k:?} kernel"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Information-maximizing decoder with reconstruction tables.
    Mim,
    /// Quantized offset min-sum.
    Omsq,
}

/// A decoder whose cost is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderSpec {
    pub family: Family,
    pub schedule: Schedule,
    pub msg_bits: u32,
    /// Reconstruction width `w'`; ignored for offset min-sum.
    pub recon_bits: u32,
    pub z: usize,
    pub dv: usize,
    pub dc: usize,
}

impl DecoderSpec {
    pub fn mim(schedule: Schedule) -> Self {
        DecoderSpec {
            family: Family::Mim,
            schedule,
            msg_bits: 3,
            recon_bits: 6,
            z: 512,
            dv: 3,
            dc: 18,
        }
    }

    pub fn omsq(schedule: Schedule) -> Self {
        DecoderSpec {
            family: Family::Omsq,
            msg_bits: 4,
            ..DecoderSpec::mim(schedule)
        }
    }

    /// Short label such as `MIM-HA`.
    pub fn label(&self) -> String {
        let f = match self.family {
            Family::Mim => "MIM",
            Family::Omsq => "OMSQ",
        };
        let s = match self.schedule {
            Schedule::Flooding => "F",
            Schedule::Horizontal => "H",
            Schedule::HorizontalApp => "HA",
            Schedule::Vertical => "V",
        };
        format!("{f}-{s}")
    }

    /// Width of a posterior sum at a variable node.
    pub fn app_bits(&self) -> u32 {
        match self.family {
            Family::Mim => self.recon_bits + 2,
            Family::Omsq => ceil_log2(self.dv << self.msg_bits),
        }
    }

    /// Width of the variable-node adders.
    pub fn vn_adder_bits(&self) -> u32 {
        match self.family {
            Family::Mim => self.recon_bits + 1,
            Family::Omsq => self.app_bits(),
        }
    }
}

fn ceil_log2(x: usize) -> u32 {
    usize::BITS - (x.max(1) - 1).leading_zeros()
}

/// Gates and memory per edge for one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    pub label: String,
    pub cn_gates: f64,
    pub vn_gates: f64,
    pub network_gates: f64,
    pub total_gates: f64,
    pub memory_bits: f64,
    /// The figure is a lower bound (operations left out of the count).
    pub lower_bound: bool,
    pub notes: Vec<String>,
}

/// Composes shifter, arithmetic and node costs for one decoder.
pub fn decoder_cost(spec: &DecoderSpec) -> Result<CostBreakdown, ComplexityError> {
    decoder_cost_with(&GateModel::default(), spec)
}

pub fn decoder_cost_with(model: &GateModel, spec: &DecoderSpec) -> Result<CostBreakdown, ComplexityError> {
    let DecoderSpec { family, schedule, msg_bits: w, dv, dc, .. } = *spec;
    if w < 2 {
        return Err(ComplexityError::InvalidNode("messages need a sign and a magnitude bit".into()));
    }
    if family == Family::Mim && spec.recon_bits < w {
        return Err(ComplexityError::InvalidNode(format!("w' = {} below w = {w}", spec.recon_bits)));
    }
    let shift = model.shifter_gates_per_bit(spec.z)?;
    let cmp = model.arith_gates(w - 1)? as f64;
    let add = model.arith_gates(spec.vn_adder_bits())? as f64;
    let mut notes = Vec::new();
    let mut lower_bound = false;

    let cn_gates = if schedule == Schedule::Vertical {
        // one partial update per edge
        let ops = node_cost(NodeType::Check, Update::Partial, NodeKernel::ThreeMin, dc, w)?;
        ops.comparisons * cmp
    } else {
        let ops = node_cost(NodeType::Check, Update::Full, NodeKernel::Min, dc, w)?;
        let mut g = ops.comparisons * cmp;
        if family == Family::Omsq {
            notes.push(format!("offset subtracted from both minima with {}-bit adders", w - 1));
            g += 2.0 * cmp;
        }
        g / dc as f64
    };

    let vn_gates = match schedule {
        Schedule::Horizontal | Schedule::HorizontalApp => {
            // one partial update per layer, d_v layers per iteration
            let ops = node_cost(NodeType::Variable, Update::Partial, NodeKernel::Uniform, dv, w)?;
            ops.additions * add
        }
        Schedule::Vertical | Schedule::Flooding => {
            let ops = node_cost(NodeType::Variable, Update::Full, NodeKernel::Uniform, dv, w)?;
            ops.additions * add / dv as f64
        }
    };
    if family == Family::Mim && schedule == Schedule::HorizontalApp {
        lower_bound = true;
        notes.push("rescaling of the posterior message before uniform quantization is not counted".into());
    }

    let network_bits = if schedule == Schedule::HorizontalApp {
        spec.app_bits()
    } else {
        2 * w
    };
    let network_gates = network_bits as f64 * shift;

    let lg = ceil_log2(dc) as f64;
    let memory_bits = match schedule {
        Schedule::Flooding => 0.0,
        Schedule::Horizontal => {
            notes.push("layered memory taken as w (d_v - 1) / d_v bits per edge".into());
            (w * (dv as u32 - 1)) as f64 / dv as f64
        }
        Schedule::HorizontalApp => (lg + 2.0 * (w - 1) as f64 + dc as f64) / dc as f64,
        Schedule::Vertical => {
            notes.push(
                "vertical memory assumes three w-bit minima, two indices, d_c signs and one sign product per check"
                    .into(),
            );
            (3.0 * w as f64 + 2.0 * lg + dc as f64 + 1.0) / dc as f64
        }
    };
    notes.push("iteration-dependent reconstruction tables are not counted".into());

    Ok(CostBreakdown {
        label: spec.label(),
        cn_gates,
        vn_gates,
        network_gates,
        total_gates: cn_gates + vn_gates + network_gates,
        memory_bits,
        lower_bound,
        notes,
    })
}

/// The eight decoders of the reference comparison.
pub fn reference_decoders() -> Vec<DecoderSpec> {
    let order = [Schedule::Horizontal, Schedule::HorizontalApp, Schedule::Vertical, Schedule::Flooding];
    let mut v: Vec<DecoderSpec> = order.iter().map(|&s| DecoderSpec::mim(s)).collect();
    v.extend(order.iter().map(|&s| DecoderSpec::omsq(s)));
    v
}

pub const CSV_HEADER: &str = "label,cn_gates,vn_gates,network_gates,total_gates,memory_bits,lower_bound";

impl fmt::Display for CostBreakdown {
    /// One CSV row matching [`CSV_HEADER`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{:.1},{:.1},{:.1},{:.1},{:.2},{}",
            self.label, self.cn_gates, self.vn_gates, self.network_gates, self.total_gates, self.memory_bits, self.lower_bound
        )
    }
}

/// CSV table of cost rows followed by nothing else.
pub fn cost_csv(rows: &[CostBreakdown]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_string());
        s.push('\n');
    }
    s
}

/// Distinct assumption notes of `rows`, prefixed by the labels using them.
pub fn assumptions(rows: &[CostBreakdown]) -> String {
    let mut seen: Vec<(String, Vec<String>)> = Vec::new();
    for r in rows {
        for n in &r.notes {
            match seen.iter_mut().find(|(note, _)| note == n) {
                Some((_, labels)) => labels.push(r.label.clone()),
                None => seen.push((n.clone(), vec![r.label.clone()])),
            }
        }
    }
    seen.iter().map(|(n, l)| format!("[{}] {n}\n", l.join(", "))).collect()
}
