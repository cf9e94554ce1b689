//! Monte Carlo error-rate simulation over BPSK and AWGN.
//!
//! Every decoder sees the all-zero codeword. The decoders are symmetric
//! under sign flips, so the error rates equal those of random codewords.
//! Codeword `i` draws its noise from the ChaCha stream `i` of the configured
//! seed, and codewords are processed in fixed-size batches with the stopping
//! rule checked between batches, so results do not depend on the number of
//! worker threads.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::code::QcCode;
use crate::decoder::{decode_bp, DecodeError, DecodeOptions, Decoder};
use crate::design::{de_threshold_ebn0, design_program, sigma_from_ebn0, DecoderProgram, DesignConfig, DesignError};

/// Final predicted mutual information that counts as successful decoding
/// when searching the design threshold.
pub const THRESHOLD_TARGET_MI: f64 = 0.9999;

#[derive(Error, Debug)]
pub enum SimError {
    #[error("invalid simulation setting: {0}")]
    Config(String),
    #[error("run stopped before any codeword was decoded")]
    EmptyRun,
    #[error("no design threshold found for {0} below 10 dB")]
    NoThreshold(String),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Noise level a program is designed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DesignPoint {
    /// The simulated Eb/N0 of each point.
    Matched,
    /// The lowest Eb/N0 (0.05 dB grid) at which density evolution decodes.
    Threshold,
    /// A fixed Eb/N0 in dB.
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub enum DecoderKind {
    /// A ready-made program.
    Program(Arc<DecoderProgram>),
    /// A program designed from a configuration.
    Design { config: DesignConfig, point: DesignPoint },
    /// Floating-point belief propagation on exact channel LLRs.
    Bp,
    /// Hard decisions on the channel output.
    Uncoded,
}

#[derive(Debug, Clone)]
pub struct DecoderEntry {
    pub label: String,
    pub kind: DecoderKind,
    pub options: DecodeOptions,
}

impl DecoderEntry {
    pub fn new(label: impl Into<String>, kind: DecoderKind) -> Self {
        DecoderEntry {
            label: label.into(),
            kind,
            options: DecodeOptions::default(),
        }
    }
}

/// Stop once both error minimums are met, or at `max_codewords`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_frame_errors: u64,
    pub min_bit_errors: u64,
    pub max_codewords: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_frame_errors: 200,
            min_bit_errors: 0,
            max_codewords: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub ebn0_db: Vec<f64>,
    pub max_iterations: usize,
    pub stop: StopRule,
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    /// Codewords between stopping-rule checks.
    pub batch: usize,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            ebn0_db: vec![4.0],
            max_iterations: 10,
            stop: StopRule::default(),
            seed: 1,
            workers: 0,
            batch: 64,
        }
    }
}

impl SimSettings {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.into()));
        if self.ebn0_db.iter().any(|e| !e.is_finite()) {
            return bad("Eb/N0 values must be finite");
        }
        if self.ebn0_db.windows(2).any(|w| w[0] >= w[1]) {
            return bad("Eb/N0 grid must be strictly increasing");
        }
        if self.stop.min_frame_errors == 0 && self.stop.min_bit_errors == 0 {
            return bad("at least one error minimum must be >= 1");
        }
        if self.batch == 0 {
            return bad("batch size must be positive");
        }
        Ok(())
    }
}

/// Statistics of one decoder at one Eb/N0.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub label: String,
    pub ebn0_db: f64,
    pub codewords: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    /// Non-converged codewords count with the iterations they ran.
    pub avg_iterations: f64,
    pub saturations: u64,
    pub seconds: f64,
}

impl SimRecord {
    /// Two-sided normal-approximation confidence half-width of the BER.
    pub fn ber_half_width(&self, z: f64, n: usize) -> f64 {
        let trials = (self.codewords * n as u64) as f64;
        z * (self.ber * (1.0 - self.ber) / trials).sqrt()
    }
}

#[derive(Default, Clone, Copy)]
struct Outcome {
    bit_errors: u64,
    iterations: u64,
    saturations: u64,
}

enum Resolved {
    Program(Arc<DecoderProgram>),
    Bp,
    Uncoded,
}

/// Fills `y` with the received BPSK samples of the all-zero codeword.
pub fn channel_samples(seed: u64, index: u64, sigma: f64, y: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    for v in y.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = 1.0 + sigma * z;
    }
}

/// Design Eb/N0 of a threshold-designed program.
pub fn threshold_ebn0(code: &QcCode, config: &DesignConfig) -> Result<f64, SimError> {
    let (dv, dc, rate) = (code.dv(), code.dc(), code.rate());
    let coarse = de_threshold_ebn0(dv, dc, rate, config, (0.0, 10.0, 0.5), THRESHOLD_TARGET_MI)?;
    let hi = coarse.ok_or_else(|| SimError::NoThreshold(format!("{:?} {:?}", config.schedule, config.cn_kernel)))?;
    let fine = de_threshold_ebn0(dv, dc, rate, config, ((hi - 0.5).max(0.0), hi, 0.05), THRESHOLD_TARGET_MI)?;
    Ok(fine.unwrap_or(hi))
}

fn resolve(code: &QcCode, entry: &DecoderEntry, ebn0: f64, iterations: usize) -> Result<Resolved, SimError> {
    Ok(match &entry.kind {
        DecoderKind::Program(p) => Resolved::Program(Arc::clone(p)),
        DecoderKind::Bp => Resolved::Bp,
        DecoderKind::Uncoded => Resolved::Uncoded,
        DecoderKind::Design { config, point } => {
            let config = DesignConfig {
                iterations,
                ..config.clone()
            };
            let design_ebn0 = match point {
                DesignPoint::Matched => ebn0,
                DesignPoint::Fixed(e) => *e,
                DesignPoint::Threshold => threshold_ebn0(code, &config)?,
            };
            let sigma = sigma_from_ebn0(design_ebn0, code.rate())?;
            Resolved::Program(Arc::new(design_program(sigma, code.dv(), code.dc(), &config)?))
        }
    })
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, SimError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Config(e.to_string()))
}

/// Simulates one decoder at one Eb/N0.
pub fn simulate_point(code: &QcCode, entry: &DecoderEntry, ebn0: f64, settings: &SimSettings) -> Result<SimRecord, SimError> {
    settings.validate()?;
    let resolved = resolve(code, entry, ebn0, settings.max_iterations)?;
    run_point(code, entry, &resolved, ebn0, settings, &pool(settings.workers)?)
}

fn run_point(
    code: &QcCode,
    entry: &DecoderEntry,
    resolved: &Resolved,
    ebn0: f64,
    settings: &SimSettings,
    pool: &rayon::ThreadPool,
) -> Result<SimRecord, SimError> {
    let stop = settings.stop;
    if stop.max_codewords == 0 {
        return Err(SimError::EmptyRun);
    }
    let sigma = sigma_from_ebn0(ebn0, code.rate())?;
    let n = code.n();
    let options = DecodeOptions {
        max_iterations: Some(entry.options.max_iterations.unwrap_or(settings.max_iterations)),
        ..entry.options.clone()
    };
    if let Resolved::Program(p) = resolved {
        // surfaces mismatches before any work is spread out
        Decoder::new(code, p, options.clone())?;
    }
    let start = Instant::now();
    let (mut codewords, mut frame_errors) = (0u64, 0u64);
    let mut total = Outcome::default();
    while codewords < stop.max_codewords
        && (frame_errors < stop.min_frame_errors || total.bit_errors < stop.min_bit_errors)
    {
        let end = (codewords + settings.batch as u64).min(stop.max_codewords);
        let outcomes: Vec<Result<Outcome, DecodeError>> = pool.install(|| {
            (codewords..end)
                .into_par_iter()
                .map_init(
                    || Worker::new(code, resolved, options.clone()),
                    |w, i| w.run(settings.seed, i, sigma),
                )
                .collect()
        });
        for o in outcomes {
            let o = o?;
            frame_errors += (o.bit_errors > 0) as u64;
            total.bit_errors += o.bit_errors;
            total.iterations += o.iterations;
            total.saturations += o.saturations;
        }
        codewords = end;
    }
    Ok(SimRecord {
        label: entry.label.clone(),
        ebn0_db: ebn0,
        codewords,
        bit_errors: total.bit_errors,
        frame_errors,
        ber: total.bit_errors as f64 / (codewords as f64 * n as f64),
        fer: frame_errors as f64 / codewords as f64,
        avg_iterations: total.iterations as f64 / codewords as f64,
        saturations: total.saturations,
        seconds: start.elapsed().as_secs_f64(),
    })
}

struct Worker<'a> {
    code: &'a QcCode,
    decoder: Option<Decoder<'a>>,
    bp: bool,
    max_iterations: usize,
    early_termination: bool,
    y: Vec<f64>,
    labels: Vec<i32>,
}

impl<'a> Worker<'a> {
    fn new(code: &'a QcCode, resolved: &'a Resolved, options: DecodeOptions) -> Self {
        let max_iterations = options.max_iterations.unwrap_or(0);
        let early_termination = options.early_termination;
        let decoder = match resolved {
            Resolved::Program(p) => Some(Decoder::new(code, p, options).expect("checked before the run")),
            _ => None,
        };
        Worker {
            code,
            decoder,
            bp: matches!(resolved, Resolved::Bp),
            max_iterations,
            early_termination,
            y: vec![0.0; code.n()],
            labels: Vec::with_capacity(code.n()),
        }
    }

    fn run(&mut self, seed: u64, index: u64, sigma: f64) -> Result<Outcome, DecodeError> {
        channel_samples(seed, index, sigma, &mut self.y);
        let result = if let Some(d) = self.decoder.as_mut() {
            d.quantize_channel(&self.y, &mut self.labels);
            d.decode(&self.labels)?
        } else if self.bp {
            let scale = 2.0 / (sigma * sigma);
            let llrs: Vec<f64> = self.y.iter().map(|v| v * scale).collect();
            decode_bp(self.code, &llrs, self.max_iterations, self.early_termination)?
        } else {
            let errors = self.y.iter().filter(|&&v| v < 0.0).count() as u64;
            return Ok(Outcome {
                bit_errors: errors,
                ..Outcome::default()
            });
        };
        Ok(Outcome {
            bit_errors: result.hard_bits.iter().map(|&b| b as u64).sum(),
            iterations: result.iterations_used as u64,
            saturations: result.saturations,
        })
    }
}

/// Runs every decoder over the Eb/N0 grid, one record per pair, decoders in
/// the outer loop.
pub fn run_sweep(code: &QcCode, entries: &[DecoderEntry], settings: &SimSettings) -> Result<Vec<SimRecord>, SimError> {
    run_sweep_with(code, entries, settings, |_| {})
}

/// Like [`run_sweep`], calling `progress` after every record.
pub fn run_sweep_with(
    code: &QcCode,
    entries: &[DecoderEntry],
    settings: &SimSettings,
    mut progress: impl FnMut(&SimRecord),
) -> Result<Vec<SimRecord>, SimError> {
    settings.validate()?;
    let pool = pool(settings.workers)?;
    let mut records = Vec::new();
    for entry in entries {
        // programs that do not depend on the point are designed once
        let fixed = match &entry.kind {
            DecoderKind::Design {
                point: DesignPoint::Matched,
                ..
            } => None,
            _ => Some(resolve(code, entry, f64::NAN, settings.max_iterations)?),
        };
        for &ebn0 in &settings.ebn0_db {
            let resolved = match &fixed {
                Some(r) => r,
                None => &resolve(code, entry, ebn0, settings.max_iterations)?,
            };
            let rec = run_point(code, entry, resolved, ebn0, settings, &pool)?;
            progress(&rec);
            records.push(rec);
        }
    }
    Ok(records)
}

pub const CSV_HEADER: &str = "label,ebn0_db,codewords,bit_errors,frame_errors,ber,fer,avg_iters,seconds";

/// CSV table of `records`; with `omit_timing` the seconds column stays
/// empty so that equal runs give equal bytes.
pub fn records_csv(records: &[SimRecord], omit_timing: bool) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let seconds = if omit_timing { String::new() } else { format!("{:.3}", r.seconds) };
        let _ = writeln!(
            s,
            "{},{:.3},{},{},{},{:.6e},{:.6e},{:.4},{}",
            csv_field(&r.label),
            r.ebn0_db,
            r.codewords,
            r.bit_errors,
            r.frame_errors,
            r.ber,
            r.fer,
            r.avg_iterations,
            seconds
        );
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
