//! Command-line front end.
//!
//! Every command prints the SHA-256 of the channel file and its fully
//! resolved configuration before any result. CSV artifacts always carry
//! nats; `--units bits` only changes what is printed.
//!
//! | option | default |
//! |--------|---------|
//! | `--resolution` (mono-static frontiers) | 200 / 60 / 24 for \|X\| = 2 / 3 / 4 |
//! | `--e-samples` | 200 |
//! | `--px-resolution` (bi-static regions) | 10 |
//! | `--rate-samples` | 8 |
//! | `--row-grid` | 60 (exponents), 30 (regions) |
//! | `--tol` (Chernoff search) | 1e-9 |
//! | `--trials` | 100000 |
//! | `--seed` | 1 |
//! | `--memory-cap` | 16777216 likelihood cells |
//! | `--threads` | `JCAS_THREADS`, else all cores |

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::bistatic::{
    bistatic_regions, rho_joint, rho_joint_lower_bound, rho_succ, ExponentQuery, DEFAULT_REFINE_TOL,
    DEFAULT_ROW_GRID,
};
use crate::channel::{ChannelFamily, ChannelMode, Distribution, SYMMETRY_TOL};
use crate::error::{JcasError, Result};
use crate::info::{chernoff_rows, phi, CHERNOFF_TOL};
use crate::region::{
    compound_capacity, default_resolution, mono_closed_inner_region, mono_open_region, per_state_capacity,
    worst_case_capacity, RegionCurve, BA_TOL, COMPOUND_REFINE_TOL, E_SWEEP_SAMPLES,
};
use crate::sim::{
    simulate_bistatic, simulate_closed_loop, simulate_mono_open, BiMode, ClosedLoopConfig, ExponentFit,
    MessageCount, Sampler, SimReport, DEFAULT_MEMORY_CAP,
};

#[derive(Debug, Parser)]
#[command(name = "jcas", version, about = "Rate / detection-exponent tradeoffs for joint communication and sensing")]
pub struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "JCAS_THREADS")]
    pub threads: Option<usize>,
    /// Units for printed values; files always hold nats.
    #[arg(long, global = true, value_enum, default_value_t = Units::Nats)]
    pub units: Units,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    pub fn show(self, nats: f64) -> String {
        match self {
            Units::Nats => format!("{nats:.6} nats"),
            Units::Bits => format!("{:.6} bits", nats / std::f64::consts::LN_2),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ChannelArg {
    /// Channel specification (JSON).
    #[arg(long)]
    pub channel: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Open-loop mono-static frontier.
    RegionMonoOpen {
        #[command(flatten)]
        channel: ChannelArg,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value_t = CHERNOFF_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-loop mono-static inner bound.
    RegionMonoClosed {
        #[command(flatten)]
        channel: ChannelArg,
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long, default_value_t = E_SWEEP_SAMPLES)]
        e_samples: usize,
        #[arg(long, default_value_t = CHERNOFF_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bi-static regions for successive and joint decoding.
    RegionBi {
        #[command(flatten)]
        channel: ChannelArg,
        #[arg(long, default_value_t = 10)]
        px_resolution: usize,
        #[arg(long, default_value_t = 8)]
        rate_samples: usize,
        #[arg(long, default_value_t = 30)]
        row_grid: usize,
        #[arg(long)]
        out_succ: Option<PathBuf>,
        #[arg(long)]
        out_joint: Option<PathBuf>,
    },
    /// Worst-pair Chernoff information φ(P_X).
    ExponentPhi {
        #[command(flatten)]
        channel: ChannelArg,
        /// Input distribution, comma separated.
        #[arg(long)]
        px: String,
        #[arg(long, default_value_t = CHERNOFF_TOL)]
        tol: f64,
    },
    /// Bi-static exponents at one rate.
    ExponentRho {
        #[command(flatten)]
        channel: ChannelArg,
        #[arg(long)]
        px: String,
        /// Rate in nats per symbol.
        #[arg(long)]
        rate: f64,
        #[arg(long, value_enum, default_value_t = RhoKind::All)]
        kind: RhoKind,
        #[arg(long, default_value_t = DEFAULT_ROW_GRID)]
        row_grid: usize,
        /// Write the joint-exponent breakdown here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Open-loop mono-static detection by simulation.
    SimulateMono {
        #[command(flatten)]
        channel: ChannelArg,
        /// Codeword type, comma separated; `n·P(x)` must be integral.
        #[arg(long = "type")]
        p_type: String,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SamplerArg::Direct)]
        sampler: SamplerArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Three-phase closed-loop protocol by simulation.
    SimulateClosed {
        #[command(flatten)]
        channel: ChannelArg,
        #[arg(long)]
        delta1: f64,
        #[arg(long)]
        delta2: f64,
        #[arg(long)]
        probe_type: String,
        /// One type per state, separated by `;`.
        #[arg(long)]
        per_state_types: String,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[command(flatten)]
        messages: MessagesArg,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Exit with status 4 unless an exponent can be fitted.
        #[arg(long)]
        require_fit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Bi-static decoding and detection by simulation.
    SimulateBi {
        #[command(flatten)]
        channel: ChannelArg,
        #[arg(long = "type")]
        p_type: String,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[command(flatten)]
        messages: MessagesArg,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Joint)]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_MEMORY_CAP)]
        memory_cap: usize,
        #[arg(long)]
        require_fit: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Output-symmetry test with its permutation witness.
    CheckSymmetry {
        #[command(flatten)]
        channel: ChannelArg,
        #[arg(long, default_value_t = SYMMETRY_TOL)]
        tol: f64,
    },
    /// Capacities of the communication channel.
    Capacity {
        #[command(flatten)]
        channel: ChannelArg,
        #[arg(long, value_enum, default_value_t = CapacityKind::All)]
        kind: CapacityKind,
        #[arg(long)]
        resolution: Option<usize>,
    },
}

#[derive(Debug, Args, Clone, Copy)]
#[group(required = true, multiple = false)]
pub struct MessagesArg {
    /// Number of messages.
    #[arg(long)]
    pub messages: Option<usize>,
    /// Rate in nats per symbol; `M = ⌈e^{nR}⌉`.
    #[arg(long)]
    pub rate: Option<f64>,
}

impl MessagesArg {
    fn resolve(self) -> Result<MessageCount> {
        match (self.messages, self.rate) {
            (Some(m), None) if m >= 1 => Ok(MessageCount::Fixed(m)),
            (None, Some(r)) if r >= 0.0 && r.is_finite() => Ok(MessageCount::Rate(r)),
            _ => Err(JcasError::InvalidArgument("need --messages >= 1 or a finite --rate >= 0".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoKind {
    Succ,
    Joint,
    Bound,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Direct,
    Tilted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Joint,
    Successive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityKind {
    Compound,
    WorstCase,
    PerState,
    All,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::RegionMonoOpen { .. } => "region-mono-open",
            Command::RegionMonoClosed { .. } => "region-mono-closed",
            Command::RegionBi { .. } => "region-bi",
            Command::ExponentPhi { .. } => "exponent-phi",
            Command::ExponentRho { .. } => "exponent-rho",
            Command::SimulateMono { .. } => "simulate-mono",
            Command::SimulateClosed { .. } => "simulate-closed",
            Command::SimulateBi { .. } => "simulate-bi",
            Command::CheckSymmetry { .. } => "check-symmetry",
            Command::Capacity { .. } => "capacity",
        }
    }

    fn channel(&self) -> &Path {
        match self {
            Command::RegionMonoOpen { channel, .. }
            | Command::RegionMonoClosed { channel, .. }
            | Command::RegionBi { channel, .. }
            | Command::ExponentPhi { channel, .. }
            | Command::ExponentRho { channel, .. }
            | Command::SimulateMono { channel, .. }
            | Command::SimulateClosed { channel, .. }
            | Command::SimulateBi { channel, .. }
            | Command::CheckSymmetry { channel, .. }
            | Command::Capacity { channel, .. } => &channel.channel,
        }
    }

    /// `None` accepts either kind of spec: mono-static when `w_z` is
    /// present, bi-static otherwise.
    fn mode(&self) -> Option<ChannelMode> {
        match self {
            Command::RegionBi { .. } | Command::ExponentRho { .. } | Command::SimulateBi { .. } => {
                Some(ChannelMode::BiStatic)
            }
            Command::RegionMonoOpen { .. } | Command::RegionMonoClosed { .. } | Command::SimulateClosed { .. } => {
                Some(ChannelMode::MonoStatic)
            }
            Command::ExponentPhi { .. }
            | Command::SimulateMono { .. }
            | Command::CheckSymmetry { .. }
            | Command::Capacity { .. } => None,
        }
    }
}

fn load_family(text: &str, mode: Option<ChannelMode>) -> Result<ChannelFamily> {
    match mode {
        Some(m) => ChannelFamily::from_json(text, m),
        None => match ChannelFamily::from_json(text, ChannelMode::MonoStatic) {
            Err(JcasError::MissingSensingKernel) => ChannelFamily::from_json(text, ChannelMode::BiStatic),
            other => other,
        },
    }
}

fn parse_types(text: &str) -> Result<Vec<Distribution>> {
    text.split(';').map(|t| Distribution::parse_csv(t.trim())).collect()
}

fn path_json(p: &Option<PathBuf>) -> serde_json::Value {
    p.as_ref().map_or(serde_json::Value::Null, |p| json!(p))
}

/// Every option of the command after defaults have been applied.
fn resolved_config(cli: &Cli, family: &ChannelFamily, threads: usize) -> Result<serde_json::Value> {
    let res_or_default = |r: &Option<usize>| -> Result<usize> {
        match r {
            Some(r) => Ok(*r),
            None => default_resolution(family.x_size()),
        }
    };
    let body = match &cli.command {
        Command::RegionMonoOpen { resolution, tol, out, .. } => json!({
            "resolution": res_or_default(resolution)?, "tol": tol, "out": path_json(out),
        }),
        Command::RegionMonoClosed { resolution, e_samples, tol, out, .. } => json!({
            "resolution": res_or_default(resolution)?, "e_samples": e_samples, "tol": tol, "out": path_json(out),
        }),
        Command::RegionBi { px_resolution, rate_samples, row_grid, out_succ, out_joint, .. } => json!({
            "px_resolution": px_resolution, "rate_samples": rate_samples, "row_grid": row_grid,
            "out_succ": path_json(out_succ), "out_joint": path_json(out_joint),
        }),
        Command::ExponentPhi { px, tol, .. } => json!({ "px": Distribution::parse_csv(px)?.probs(), "tol": tol }),
        Command::ExponentRho { px, rate, kind, row_grid, json, .. } => json!({
            "px": Distribution::parse_csv(px)?.probs(), "rate": rate, "kind": kind, "row_grid": row_grid,
            "refine_tol": DEFAULT_REFINE_TOL, "json": path_json(json),
        }),
        Command::SimulateMono { p_type, n_list, trials, seed, sampler, out, json, .. } => json!({
            "type": Distribution::parse_csv(p_type)?.probs(), "n_list": n_list, "trials": trials, "seed": seed,
            "sampler": format!("{sampler:?}").to_lowercase(), "out": path_json(out), "json": path_json(json),
        }),
        Command::SimulateClosed {
            delta1, delta2, probe_type, per_state_types, n_list, messages, trials, seed, require_fit, out, json, ..
        } => json!({
            "delta1": delta1, "delta2": delta2, "probe_type": Distribution::parse_csv(probe_type)?.probs(),
            "per_state_types": parse_types(per_state_types)?.iter().map(|d| d.probs().to_vec()).collect::<Vec<_>>(),
            "n_list": n_list, "messages": messages.resolve()?, "trials": trials, "seed": seed,
            "require_fit": require_fit, "out": path_json(out), "json": path_json(json),
        }),
        Command::SimulateBi {
            p_type, n_list, messages, trials, seed, mode, memory_cap, require_fit, out, json, ..
        } => json!({
            "type": Distribution::parse_csv(p_type)?.probs(), "n_list": n_list, "messages": messages.resolve()?,
            "trials": trials, "seed": seed, "mode": format!("{mode:?}").to_lowercase(),
            "successive_decoder": "mmi", "memory_cap": memory_cap, "require_fit": require_fit,
            "out": path_json(out), "json": path_json(json),
        }),
        Command::CheckSymmetry { tol, .. } => json!({ "tol": tol }),
        Command::Capacity { kind, resolution, .. } => json!({
            "kind": kind, "resolution": res_or_default(resolution).unwrap_or(0), "ba_tol": BA_TOL,
        }),
    };
    Ok(json!({
        "command": cli.command.name(),
        "channel": cli.command.channel(),
        "units": cli.units,
        "threads": threads,
        "options": body,
    }))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// What the binary should do after a command finished.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Artifacts were written but no exponent could be fitted.
    InsufficientData(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::InsufficientData(_) => 4,
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli, &mut std::io::stdout()) {
        Ok(outcome) => {
            if let Outcome::InsufficientData(msg) = &outcome {
                eprintln!("insufficient data: {msg}");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_threads(cli: &Cli) -> Result<usize> {
    match cli.threads {
        Some(0) => Err(JcasError::InvalidArgument("--threads must be at least 1".into())),
        Some(t) => Ok(t),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Runs a parsed command, writing the summary to `out`.
pub fn run(cli: &Cli, out: &mut (dyn Write + Send)) -> Result<Outcome> {
    let path = cli.command.channel();
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| JcasError::Malformed(e.to_string()))?;
    let family = load_family(&text, cli.command.mode())?;
    let hash = sha256_hex(&bytes);
    let threads = resolve_threads(cli)?;
    let config = resolved_config(cli, &family, threads)?;
    if cli.dump_config {
        writeln!(out, "{}", serde_json::to_string_pretty(&config)?)?;
        return Ok(Outcome::Success);
    }
    writeln!(out, "channel_sha256: {hash}")?;
    writeln!(out, "config: {}", serde_json::to_string(&config)?)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| JcasError::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli, &family, &hash, &config, out))
}

fn emit_curve(curve: &mut RegionCurve, hash: &str, path: &Option<PathBuf>, units: Units, out: &mut (dyn Write + Send)) -> Result<()> {
    curve.metadata.insert("channel_sha256".into(), hash.to_string());
    writeln!(
        out,
        "{}: {} points, max E = {}, max R = {}",
        curve.kind.as_str(),
        curve.points.len(),
        units.show(curve.max_exponent()),
        units.show(curve.max_rate())
    )?;
    match path {
        Some(p) => {
            curve.write_csv(p)?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => write!(out, "{}", curve.to_csv())?,
    }
    Ok(())
}

fn emit_report(
    report: &SimReport,
    hash: &str,
    config: &serde_json::Value,
    csv: &Option<PathBuf>,
    json_path: &Option<PathBuf>,
    units: Units,
    out: &mut (dyn Write + Send),
) -> Result<()> {
    match csv {
        Some(p) => {
            std::fs::write(p, report.to_csv())?;
            writeln!(out, "wrote {}", p.display())?;
        }
        None => write!(out, "{}", report.to_csv())?,
    }
    let summary = json!({
        "channel_sha256": hash,
        "config": config,
        "report": report,
    });
    if let Some(p) = json_path {
        std::fs::write(p, serde_json::to_string_pretty(&summary)?)?;
        writeln!(out, "wrote {}", p.display())?;
    }
    match report.fitted_exponent {
        ExponentFit::Fitted(v) => writeln!(out, "fitted exponent: {}", units.show(v))?,
        ExponentFit::Infinite => writeln!(out, "fitted exponent: inf (no detection errors)")?,
        ExponentFit::InsufficientData => writeln!(out, "fitted exponent: insufficient data")?,
    }
    Ok(())
}

fn fit_outcome(report: &SimReport, required: bool) -> Outcome {
    if required && report.fitted_exponent == ExponentFit::InsufficientData {
        Outcome::InsufficientData(format!(
            "fewer than three block lengths with at least {} errors",
            crate::sim::MIN_FIT_ERRORS
        ))
    } else {
        Outcome::Success
    }
}

fn dispatch(
    cli: &Cli,
    family: &ChannelFamily,
    hash: &str,
    config: &serde_json::Value,
    out: &mut (dyn Write + Send),
) -> Result<Outcome> {
    let units = cli.units;
    let opt = &config["options"];
    match &cli.command {
        Command::RegionMonoOpen { tol, out: path, .. } => {
            let res = opt["resolution"].as_u64().unwrap_or(0) as usize;
            let mut curve = mono_open_region(family, res, *tol)?;
            emit_curve(&mut curve, hash, path, units, out)?;
        }
        Command::RegionMonoClosed { e_samples, tol, out: path, .. } => {
            let res = opt["resolution"].as_u64().unwrap_or(0) as usize;
            let mut curve = mono_closed_inner_region(family, res, *e_samples, *tol)?;
            emit_curve(&mut curve, hash, path, units, out)?;
        }
        Command::RegionBi { px_resolution, rate_samples, row_grid, out_succ, out_joint, .. } => {
            let (mut succ, mut joint) = bistatic_regions(family, *px_resolution, *rate_samples, *row_grid)?;
            emit_curve(&mut succ, hash, out_succ, units, out)?;
            emit_curve(&mut joint, hash, out_joint, units, out)?;
        }
        Command::ExponentPhi { px, tol, .. } => {
            let p = Distribution::parse_csv(px)?;
            let value = phi(&p, family, *tol)?;
            for s in 0..family.num_states() {
                for t in s + 1..family.num_states() {
                    let c = chernoff_rows(p.probs(), family.sense(s).rows(), family.sense(t).rows(), *tol);
                    writeln!(
                        out,
                        "chernoff({}, {}) = {} at ell = {:.6}",
                        family.states()[s],
                        family.states()[t],
                        units.show(c.value),
                        c.ell_star
                    )?;
                }
            }
            writeln!(out, "phi = {}", units.show(value))?;
        }
        Command::ExponentRho { px, rate, kind, row_grid, json, .. } => {
            let p = Distribution::parse_csv(px)?;
            let q = ExponentQuery::new(family, p, *rate)?.with_grid(*row_grid)?;
            if matches!(kind, RhoKind::Succ | RhoKind::All) {
                writeln!(out, "rho_succ = {}", units.show(rho_succ(&q)?))?;
            }
            if matches!(kind, RhoKind::Bound | RhoKind::All) {
                writeln!(out, "rho_joint_lower_bound = {}", units.show(rho_joint_lower_bound(&q)?))?;
            }
            if matches!(kind, RhoKind::Joint | RhoKind::All) {
                let b = rho_joint(&q)?;
                writeln!(out, "rho_joint = {}", units.show(b.rho))?;
                if let Some(path) = json {
                    std::fs::write(path, b.to_json())?;
                    writeln!(out, "wrote {}", path.display())?;
                }
            }
        }
        Command::SimulateMono { p_type, n_list, trials, seed, sampler, out: csv, json, .. } => {
            let p = Distribution::parse_csv(p_type)?;
            let sampler = match sampler {
                SamplerArg::Direct => Sampler::Direct,
                SamplerArg::Tilted => Sampler::Tilted,
            };
            let report = simulate_mono_open(family, &p, n_list, *trials, *seed, sampler)?;
            emit_report(&report, hash, config, csv, json, units, out)?;
            return Ok(fit_outcome(&report, true));
        }
        Command::SimulateClosed {
            delta1, delta2, probe_type, per_state_types, n_list, messages, trials, seed, require_fit, out: csv, json, ..
        } => {
            let cfg = ClosedLoopConfig {
                delta1: *delta1,
                delta2: *delta2,
                probe_type: Distribution::parse_csv(probe_type)?,
                per_state_types: parse_types(per_state_types)?,
                messages: messages.resolve()?,
            };
            let report = simulate_closed_loop(family, &cfg, n_list, *trials, *seed)?;
            emit_report(&report, hash, config, csv, json, units, out)?;
            return Ok(fit_outcome(&report, *require_fit));
        }
        Command::SimulateBi {
            p_type, n_list, messages, trials, seed, mode, memory_cap, require_fit, out: csv, json, ..
        } => {
            let p = Distribution::parse_csv(p_type)?;
            let mode = match mode {
                ModeArg::Joint => BiMode::Joint,
                ModeArg::Successive => BiMode::Successive,
            };
            let report =
                simulate_bistatic(family, &p, n_list, messages.resolve()?, *trials, *seed, mode, *memory_cap)?;
            emit_report(&report, hash, config, csv, json, units, out)?;
            return Ok(fit_outcome(&report, *require_fit));
        }
        Command::CheckSymmetry { tol, .. } => {
            let r = family.check_output_symmetry(*tol);
            writeln!(out, "symmetric={}", r.symmetric)?;
            if r.symmetric {
                writeln!(out, "base_input={}", r.base_input.unwrap_or(0))?;
                writeln!(out, "witness={}", serde_json::to_string(&r.witness)?)?;
            }
        }
        Command::Capacity { kind, .. } => {
            if matches!(kind, CapacityKind::PerState | CapacityKind::All) {
                for s in 0..family.num_states() {
                    let c = per_state_capacity(family, s, BA_TOL)?;
                    writeln!(
                        out,
                        "capacity[{}] = {} at {:?}",
                        family.states()[s],
                        units.show(c.value),
                        c.argmax_input.probs()
                    )?;
                }
            }
            if matches!(kind, CapacityKind::WorstCase | CapacityKind::All) {
                let c = worst_case_capacity(family, BA_TOL)?;
                writeln!(out, "worst_case = {}", units.show(c.value))?;
            }
            if matches!(kind, CapacityKind::Compound | CapacityKind::All) {
                let res = opt["resolution"].as_u64().unwrap_or(0) as usize;
                if res == 0 {
                    return Err(JcasError::Unsupported(format!(
                        "compound capacity needs --resolution for |X| = {}",
                        family.x_size()
                    )));
                }
                let c = compound_capacity(family, res, COMPOUND_REFINE_TOL)?;
                writeln!(out, "compound = {} at {:?}", units.show(c.value), c.argmax_input.probs())?;
            }
        }
    }
    Ok(Outcome::Success)
}
