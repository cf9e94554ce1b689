//! TOML experiment files.
//!
//! Every key is optional so that command-line flags can fill in or replace
//! any of them. A file looks like
//!
//! ```toml
//! code = "codes/rate56.txt"
//!
//! [design]
//! ebn0_db = 3.25
//! schedule = "horizontal"
//! kernel = "min"
//! msg_bits = 3
//!
//! [simulate]
//! ebn0_db = [3.2, 3.3, 3.4]
//! max_codewords = 100000
//!
//! [[simulate.decoder]]
//! label = "MIM-H 3-bit"
//! kind = "mim"
//! msg_bits = 3
//! design_ebn0 = "threshold"
//!
//! [[simulate.decoder]]
//! kind = "bp"
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::code::{BaseMatrix, QcCode};
use crate::decoder::{omsq_config, DecodeOptions, VnUpdate};
use crate::design::{CnKernel, DecoderProgram, DesignConfig, Scaling, Schedule, VnQuantizerKind, DEFAULT_CHANNEL_GRID};
use crate::sim::{DecoderEntry, DecoderKind, DesignPoint, SimSettings, StopRule};

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, ConfigError> {
    std::fs::read(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a base-matrix file, or the built-in rate-5/6 code for `None`.
pub fn load_code(path: Option<&Path>) -> Result<QcCode, ConfigError> {
    let Some(path) = path else {
        return Ok(QcCode::regular_3x18_z512());
    };
    let text = String::from_utf8(read_file(path)?).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
    let base: BaseMatrix = text.parse().map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
    QcCode::new(base).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))
}

pub fn load_program(path: &Path) -> Result<DecoderProgram, ConfigError> {
    DecoderProgram::from_bytes(&read_file(path)?).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub code: Option<PathBuf>,
    #[serde(default)]
    pub design: DesignSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub complexity: ComplexitySection,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path`; relative paths inside are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = String::from_utf8(read_file(path)?).map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        cfg.code.as_mut().map(fix);
        for d in &mut cfg.simulate.decoder {
            d.program.as_mut().map(fix);
        }
        Ok(cfg)
    }
}

/// Eb/N0 written either as a number or as `"matched"` / `"threshold"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DesignEbn0 {
    Value(f64),
    Name(String),
}

impl DesignEbn0 {
    pub fn to_point(&self) -> Result<DesignPoint, ConfigError> {
        match self {
            DesignEbn0::Value(v) => Ok(DesignPoint::Fixed(*v)),
            DesignEbn0::Name(n) => match n.as_str() {
                "matched" => Ok(DesignPoint::Matched),
                "threshold" => Ok(DesignPoint::Threshold),
                other => other
                    .parse()
                    .map(DesignPoint::Fixed)
                    .or_else(|_| invalid(format!("design Eb/N0 `{other}` is not a number, `matched` or `threshold`"))),
            },
        }
    }
}

fn parse_opt<T: std::str::FromStr<Err = String>>(v: &Option<String>) -> Result<Option<T>, ConfigError> {
    v.as_deref().map(str::parse).transpose().map_err(ConfigError::Invalid)
}

/// Table-design parameters shared by the `design` section and by designed
/// decoders in a simulation.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignParams {
    pub schedule: Option<String>,
    pub kernel: Option<String>,
    pub msg_bits: Option<u32>,
    pub recon_bits: Option<u32>,
    pub channel_bits: Option<u32>,
    pub iterations: Option<usize>,
    pub vn_quantizer: Option<String>,
    pub scaling: Option<String>,
    pub channel_grid: Option<usize>,
    pub llr_cap: Option<f64>,
    pub omsq_offset: Option<i32>,
}

impl DesignParams {
    /// Fields of `other` replace those of `self`.
    pub fn overridden_by(&self, other: &DesignParams) -> DesignParams {
        DesignParams {
            schedule: other.schedule.clone().or_else(|| self.schedule.clone()),
            kernel: other.kernel.clone().or_else(|| self.kernel.clone()),
            msg_bits: other.msg_bits.or(self.msg_bits),
            recon_bits: other.recon_bits.or(self.recon_bits),
            channel_bits: other.channel_bits.or(self.channel_bits),
            iterations: other.iterations.or(self.iterations),
            vn_quantizer: other.vn_quantizer.clone().or_else(|| self.vn_quantizer.clone()),
            scaling: other.scaling.clone().or_else(|| self.scaling.clone()),
            channel_grid: other.channel_grid.or(self.channel_grid),
            llr_cap: other.llr_cap.or(self.llr_cap),
            omsq_offset: other.omsq_offset.or(self.omsq_offset),
        }
    }

    pub fn to_config(&self) -> Result<DesignConfig, ConfigError> {
        let d = DesignConfig::default();
        let schedule = parse_opt::<Schedule>(&self.schedule)?.unwrap_or(d.schedule);
        let kernel = parse_opt::<CnKernel>(&self.kernel)?.unwrap_or(d.cn_kernel);
        let iterations = self.iterations.unwrap_or(d.iterations);
        let base = if kernel == CnKernel::Omsq {
            let bits = self.msg_bits.unwrap_or(4);
            if self.channel_bits.is_some_and(|c| c != bits) {
                return invalid("offset min-sum uses channel messages as wide as its check messages");
            }
            omsq_config(bits, self.omsq_offset.unwrap_or(d.omsq_offset), schedule, iterations)
        } else {
            DesignConfig {
                schedule,
                cn_kernel: kernel,
                iterations,
                msg_bits: self.msg_bits.unwrap_or(d.msg_bits),
                channel_bits: self.channel_bits.unwrap_or(d.channel_bits),
                ..d
            }
        };
        Ok(DesignConfig {
            recon_bits: self.recon_bits.unwrap_or(base.recon_bits),
            vn_quantizer: parse_opt::<VnQuantizerKind>(&self.vn_quantizer)?.unwrap_or(base.vn_quantizer),
            scaling: parse_opt::<Scaling>(&self.scaling)?,
            channel_grid: self.channel_grid.unwrap_or(DEFAULT_CHANNEL_GRID),
            llr_cap: self.llr_cap.unwrap_or(base.llr_cap),
            ..base
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    /// Design point; `sigma` takes precedence.
    pub ebn0_db: Option<DesignEbn0>,
    pub sigma: Option<f64>,
    pub output: Option<PathBuf>,
    #[serde(flatten)]
    pub params: DesignParams,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSection {
    pub label: Option<String>,
    /// `mim`, `omsq`, `bp`, `uncoded` or `program`.
    pub kind: String,
    pub program: Option<PathBuf>,
    pub design_ebn0: Option<DesignEbn0>,
    pub vn_update: Option<String>,
    #[serde(flatten)]
    pub params: DesignParams,
}

impl DecoderSection {
    /// Parses the compact flag form `kind=mim,msg_bits=3,design_ebn0=threshold`.
    pub fn from_flag(spec: &str) -> Result<Self, ConfigError> {
        let mut table = toml::Table::new();
        for pair in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let Some((k, v)) = pair.split_once('=') else {
                return invalid(format!("decoder field `{pair}` is not key=value"));
            };
            let value = if let Ok(i) = v.parse::<i64>() {
                toml::Value::Integer(i)
            } else if let Ok(f) = v.parse::<f64>() {
                toml::Value::Float(f)
            } else {
                toml::Value::String(v.to_string())
            };
            table.insert(k.trim().to_string(), value);
        }
        Ok(table.try_into()?)
    }

    pub fn default_label(&self) -> String {
        let p = &self.params;
        match self.kind.as_str() {
            "mim" | "omsq" => {
                let s = parse_opt::<Schedule>(&p.schedule).ok().flatten().unwrap_or(Schedule::Horizontal);
                let tag = match s {
                    Schedule::Flooding => "F",
                    Schedule::Horizontal => "H",
                    Schedule::HorizontalApp => "HA",
                    Schedule::Vertical => "V",
                };
                let bits = p.msg_bits.unwrap_or(if self.kind == "omsq" { 4 } else { 3 });
                format!("{}-{tag} {bits}-bit", self.kind.to_uppercase())
            }
            "program" => self
                .program
                .as_ref()
                .and_then(|p| p.file_stem())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "program".into()),
            other => other.to_uppercase(),
        }
    }

    pub fn to_entry(&self) -> Result<DecoderEntry, ConfigError> {
        let label = self.label.clone().unwrap_or_else(|| self.default_label());
        let kind = match self.kind.as_str() {
            "bp" => DecoderKind::Bp,
            "uncoded" => DecoderKind::Uncoded,
            "program" => {
                let Some(path) = &self.program else {
                    return invalid("decoder kind `program` needs a `program` path");
                };
                DecoderKind::Program(Arc::new(load_program(path)?))
            }
            "mim" | "omsq" => {
                let mut params = self.params.clone();
                if self.kind == "omsq" {
                    params.kernel = Some("omsq".into());
                } else if params.kernel.as_deref() == Some("omsq") {
                    return invalid("use kind = \"omsq\" for offset min-sum");
                }
                let point = match &self.design_ebn0 {
                    Some(e) => e.to_point()?,
                    None => DesignPoint::Matched,
                };
                DecoderKind::Design {
                    config: params.to_config()?,
                    point,
                }
            }
            other => return invalid(format!("unknown decoder kind `{other}` (mim, omsq, bp, uncoded, program)")),
        };
        let vn_update = match self.vn_update.as_deref() {
            None | Some("iterative") => VnUpdate::Iterative,
            Some("recursive") => VnUpdate::Recursive,
            Some(o) => return invalid(format!("unknown vn_update `{o}` (iterative, recursive)")),
        };
        Ok(DecoderEntry {
            label,
            kind,
            options: DecodeOptions {
                vn_update,
                ..DecodeOptions::default()
            },
        })
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub ebn0_db: Option<Vec<f64>>,
    pub max_iterations: Option<usize>,
    pub min_frame_errors: Option<u64>,
    pub min_bit_errors: Option<u64>,
    pub max_codewords: Option<u64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub batch: Option<usize>,
    pub output: Option<PathBuf>,
    pub omit_timing: Option<bool>,
    #[serde(default)]
    pub decoder: Vec<DecoderSection>,
}

impl SimulateSection {
    pub fn settings(&self) -> SimSettings {
        let d = SimSettings::default();
        SimSettings {
            ebn0_db: self.ebn0_db.clone().unwrap_or(d.ebn0_db),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            stop: StopRule {
                min_frame_errors: self.min_frame_errors.unwrap_or(d.stop.min_frame_errors),
                min_bit_errors: self.min_bit_errors.unwrap_or(d.stop.min_bit_errors),
                max_codewords: self.max_codewords.unwrap_or(d.stop.max_codewords),
            },
            seed: self.seed.unwrap_or(d.seed),
            workers: self.workers.unwrap_or(d.workers),
            batch: self.batch.unwrap_or(d.batch),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexitySection {
    /// Labels such as `MIM-H` or `OMSQ-V`; empty means all eight.
    #[serde(default)]
    pub decoders: Vec<String>,
    pub msg_bits: Option<u32>,
    pub recon_bits: Option<u32>,
    pub z: Option<usize>,
    pub dv: Option<usize>,
    pub dc: Option<usize>,
    pub output: Option<PathBuf>,
}
