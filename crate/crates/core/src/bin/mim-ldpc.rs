use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mim_ldpc::complexity::{self, ComplexityError, DecoderSpec, Family};
use mim_ldpc::config::{load_code, load_program, ConfigError, DecoderSection, DesignEbn0, DesignParams, FileConfig};
use mim_ldpc::design::{design_program, sigma_from_ebn0, DesignError, Schedule};
use mim_ldpc::im::ImError;
use mim_ldpc::sim::{records_csv, run_sweep_with, threshold_ebn0, SimError};

/// Coarsely quantized LDPC decoding: table design, simulation and
/// complexity estimates.
#[derive(Parser)]
#[command(name = "mim-ldpc", version)]
struct Cli {
    /// Base-matrix file (`Z <lift>` header, one row of shifts per line).
    /// Defaults to the built-in rate-5/6 code.
    #[arg(long, global = true)]
    code: Option<PathBuf>,
    /// TOML experiment file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design a decoder program and write it to a file.
    Design(DesignArgs),
    /// Simulate decoders over an Eb/N0 grid and emit CSV.
    Simulate(SimulateArgs),
    /// Estimate gates and memory per edge and iteration.
    Complexity(ComplexityArgs),
    /// Print every table of a program file.
    DumpProgram { program: PathBuf },
    /// Print statistics of the code and, optionally, of a program.
    Info {
        #[arg(long)]
        program: Option<PathBuf>,
        /// Also print the base matrix.
        #[arg(long)]
        base: bool,
    },
}

#[derive(Args, Default)]
struct ParamArgs {
    /// flooding, horizontal, horizontal-app or vertical (f, h, ha, v).
    #[arg(long)]
    schedule: Option<String>,
    /// min, 3min, boxplus-nonuniform, boxplus-uniform or omsq.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    msg_bits: Option<u32>,
    #[arg(long)]
    recon_bits: Option<u32>,
    #[arg(long)]
    channel_bits: Option<u32>,
    #[arg(long)]
    iterations: Option<usize>,
    /// uniform or non-uniform.
    #[arg(long)]
    vn_quantizer: Option<String>,
    /// per-stage or global.
    #[arg(long)]
    scaling: Option<String>,
    #[arg(long)]
    channel_grid: Option<usize>,
    #[arg(long)]
    llr_cap: Option<f64>,
    #[arg(long)]
    omsq_offset: Option<i32>,
}

impl ParamArgs {
    fn params(&self) -> DesignParams {
        DesignParams {
            schedule: self.schedule.clone(),
            kernel: self.kernel.clone(),
            msg_bits: self.msg_bits,
            recon_bits: self.recon_bits,
            channel_bits: self.channel_bits,
            iterations: self.iterations,
            vn_quantizer: self.vn_quantizer.clone(),
            scaling: self.scaling.clone(),
            channel_grid: self.channel_grid,
            llr_cap: self.llr_cap,
            omsq_offset: self.omsq_offset,
        }
    }
}

#[derive(Args)]
struct DesignArgs {
    /// Design Eb/N0 in dB, or `threshold` for the density-evolution threshold.
    #[arg(long)]
    ebn0: Option<String>,
    /// Design noise deviation; overrides --ebn0.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Comma-separated Eb/N0 grid in dB.
    #[arg(long, value_delimiter = ',')]
    ebn0: Option<Vec<f64>>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    min_frame_errors: Option<u64>,
    #[arg(long)]
    min_bit_errors: Option<u64>,
    #[arg(long)]
    max_codewords: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Codewords between stopping-rule checks.
    #[arg(long)]
    batch: Option<usize>,
    /// Decoder as `key=value` pairs, e.g. `kind=mim,msg_bits=3,design_ebn0=threshold`.
    /// Repeatable; replaces the decoders of the config file.
    #[arg(long = "decoder")]
    decoders: Vec<String>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Leave the seconds column empty so equal runs give equal bytes.
    #[arg(long)]
    omit_timing: bool,
    /// Suppress per-point progress on stderr.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct ComplexityArgs {
    /// Decoder labels such as MIM-H or OMSQ-HA (repeatable); default all eight.
    #[arg(long = "decoder")]
    decoders: Vec<String>,
    /// Message width for every row (default 3 for MIM, 4 for OMSQ).
    #[arg(long)]
    msg_bits: Option<u32>,
    #[arg(long)]
    recon_bits: Option<u32>,
    #[arg(long)]
    z: Option<usize>,
    #[arg(long)]
    dv: Option<usize>,
    #[arg(long)]
    dc: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Degenerate(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Degenerate(_) => 3,
            Failure::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Degenerate(m) | Failure::Other(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<DesignError> for Failure {
    fn from(e: DesignError) -> Self {
        match &e {
            DesignError::Degenerate(_) | DesignError::Kernel(ImError::Degenerate | ImError::AlphabetTooSmall { .. }) => {
                Failure::Degenerate(e.to_string())
            }
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Design(d) => d.into(),
            SimError::NoThreshold(_) => Failure::Degenerate(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<ComplexityError> for Failure {
    fn from(e: ComplexityError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::Other(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).map_err(|e| Failure::Other(e.to_string()))
        }
    }
}

fn design(file: &FileConfig, code_path: Option<&Path>, args: &DesignArgs) -> Result<(), Failure> {
    let code = load_code(code_path)?;
    let params = file.design.params.overridden_by(&args.params.params());
    let cfg = params.to_config()?;
    let ebn0 = args.ebn0.clone().map(DesignEbn0::Name).or_else(|| file.design.ebn0_db.clone());
    let sigma = match (args.sigma.or(file.design.sigma), ebn0) {
        (Some(s), _) => s,
        (None, Some(e)) => {
            let point = e.to_point()?;
            let db = match point {
                mim_ldpc::sim::DesignPoint::Fixed(v) => v,
                mim_ldpc::sim::DesignPoint::Threshold => {
                    let t = threshold_ebn0(&code, &cfg)?;
                    eprintln!("threshold Eb/N0 {t:.2} dB");
                    t
                }
                mim_ldpc::sim::DesignPoint::Matched => {
                    return Err(Failure::Config("`matched` needs a simulation point; give a number".into()))
                }
            };
            sigma_from_ebn0(db, code.rate())?
        }
        (None, None) => return Err(Failure::Config("design needs --ebn0 or --sigma".into())),
    };
    let program = design_program(sigma, code.dv(), code.dc(), &cfg)?;
    let out = args
        .output
        .clone()
        .or_else(|| file.design.output.clone())
        .unwrap_or_else(|| PathBuf::from("decoder.mimp"));
    write_out(Some(&out), &program.to_bytes())?;
    let mi: Vec<String> = program.mi_trajectory.iter().map(|m| format!("{m:.4}")).collect();
    println!(
        "{} {} w={} sigma={sigma:.5}: predicted MI per iteration {}",
        program.schedule.name(),
        program.cn_kernel.name(),
        program.msg_bits,
        mi.join(" ")
    );
    println!("wrote {}", out.display());
    Ok(())
}

fn simulate(file: &FileConfig, code_path: Option<&Path>, args: &SimulateArgs) -> Result<(), Failure> {
    let code = load_code(code_path)?;
    let mut sec = file.simulate.clone();
    sec.ebn0_db = args.ebn0.clone().or(sec.ebn0_db);
    sec.max_iterations = args.max_iterations.or(sec.max_iterations);
    sec.min_frame_errors = args.min_frame_errors.or(sec.min_frame_errors);
    sec.min_bit_errors = args.min_bit_errors.or(sec.min_bit_errors);
    sec.max_codewords = args.max_codewords.or(sec.max_codewords);
    sec.seed = args.seed.or(sec.seed);
    sec.workers = args.workers.or(sec.workers);
    sec.batch = args.batch.or(sec.batch);
    if !args.decoders.is_empty() {
        sec.decoder = args.decoders.iter().map(|d| DecoderSection::from_flag(d)).collect::<Result<_, _>>()?;
    }
    if sec.decoder.is_empty() {
        return Err(Failure::Config("no decoders configured (use --decoder or [[simulate.decoder]])".into()));
    }
    let entries = sec.decoder.iter().map(|d| d.to_entry()).collect::<Result<Vec<_>, _>>()?;
    let settings = sec.settings();
    let quiet = args.quiet;
    let records = run_sweep_with(&code, &entries, &settings, |r| {
        if !quiet {
            eprintln!(
                "{} {:.2} dB: {} codewords, BER {:.3e}, FER {:.3e}, {:.2} iterations, {} saturations",
                r.label, r.ebn0_db, r.codewords, r.ber, r.fer, r.avg_iterations, r.saturations
            );
        }
    })?;
    let omit = args.omit_timing || sec.omit_timing.unwrap_or(false);
    write_out(args.output.as_deref().or(sec.output.as_deref()), records_csv(&records, omit).as_bytes())
}

fn parse_label(label: &str) -> Result<(Family, Schedule), Failure> {
    let bad = || Failure::Config(format!("unknown decoder label `{label}` (e.g. MIM-H, OMSQ-HA)"));
    let (f, s) = label.split_once('-').ok_or_else(bad)?;
    let family = match f.to_ascii_uppercase().as_str() {
        "MIM" => Family::Mim,
        "OMSQ" => Family::Omsq,
        _ => return Err(bad()),
    };
    let schedule = s.to_ascii_lowercase().parse().map_err(|_| bad())?;
    Ok((family, schedule))
}

fn complexity_cmd(file: &FileConfig, code_path: Option<&Path>, args: &ComplexityArgs) -> Result<(), Failure> {
    let sec = &file.complexity;
    let code = match code_path {
        Some(p) => Some(load_code(Some(p))?),
        None => None,
    };
    let labels = if !args.decoders.is_empty() { &args.decoders } else { &sec.decoders };
    let specs: Vec<DecoderSpec> = if labels.is_empty() {
        complexity::reference_decoders()
    } else {
        labels
            .iter()
            .map(|l| {
                parse_label(l).map(|(family, schedule)| match family {
                    Family::Mim => DecoderSpec::mim(schedule),
                    Family::Omsq => DecoderSpec::omsq(schedule),
                })
            })
            .collect::<Result<_, _>>()?
    };
    let mut rows = Vec::new();
    for mut s in specs {
        if let Some(c) = &code {
            (s.z, s.dv, s.dc) = (c.lift(), c.dv(), c.dc());
        }
        s.msg_bits = args.msg_bits.or(sec.msg_bits).unwrap_or(s.msg_bits);
        s.recon_bits = args.recon_bits.or(sec.recon_bits).unwrap_or(s.recon_bits);
        s.z = args.z.or(sec.z).unwrap_or(s.z);
        s.dv = args.dv.or(sec.dv).unwrap_or(s.dv);
        s.dc = args.dc.or(sec.dc).unwrap_or(s.dc);
        rows.push(complexity::decoder_cost(&s)?);
    }
    let mut text = complexity::cost_csv(&rows);
    text.push_str("\n# assumptions\n");
    for line in complexity::assumptions(&rows).lines() {
        let _ = writeln!(text, "# {line}");
    }
    write_out(args.output.as_deref().or(sec.output.as_deref()), text.as_bytes())
}

fn info(code_path: Option<&Path>, program: Option<&Path>, base: bool) -> Result<(), Failure> {
    let code = load_code(code_path)?;
    let mut s = String::new();
    let _ = writeln!(s, "lifting size Z   {}", code.lift());
    let _ = writeln!(s, "base matrix      {} x {}", code.base().rows(), code.base().cols());
    let _ = writeln!(s, "N / M / edges    {} / {} / {}", code.n(), code.m(), code.edges());
    let _ = writeln!(s, "degrees          d_v={} d_c={}", code.dv(), code.dc());
    let _ = writeln!(s, "rate             {:.6}", code.rate());
    if base {
        let _ = write!(s, "\n{}", code.base());
    }
    if let Some(p) = program {
        let prog = load_program(p)?;
        let _ = writeln!(s, "\nprogram          {}", p.display());
        let _ = writeln!(s, "schedule         {}", prog.schedule.name());
        let _ = writeln!(s, "cn kernel        {}", prog.cn_kernel.name());
        let _ = writeln!(s, "w / w' / w_ch    {} / {} / {}", prog.msg_bits, prog.recon_bits, prog.channel_bits);
        let _ = writeln!(s, "iterations       {}", prog.max_iterations());
        let _ = writeln!(s, "design sigma     {:.6}", prog.design_sigma);
        let _ = writeln!(s, "stationary       {}", prog.is_stationary());
        let matches = prog.dv == code.dv() && prog.dc == code.dc();
        let _ = writeln!(s, "matches code     {matches}");
    }
    write_out(None, s.as_bytes())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let code_path = cli.code.as_deref().or(file.code.as_deref());
    match &cli.command {
        Command::Design(a) => design(&file, code_path, a),
        Command::Simulate(a) => simulate(&file, code_path, a),
        Command::Complexity(a) => complexity_cmd(&file, code_path, a),
        Command::DumpProgram { program } => write_out(None, load_program(program)?.dump().as_bytes()),
        Command::Info { program, base } => info(code_path, program.as_deref(), *base),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
