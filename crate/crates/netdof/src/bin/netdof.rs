//! Batch experiment driver: `netdof <command> [flags]`.
//!
//! All logic lives in the library; this binary parses flags, merges them
//! over an optional TOML config file and the built-in defaults, sizes the
//! worker pool, runs the command and writes the output.

use clap::{Args, Parser, Subcommand};
use netdof::cli::{
    cmd_design_table, cmd_net_dof, cmd_regimes, cmd_simulate, cmd_verify, CliError, CommandOutput,
    ExperimentConfig, OutputFormat, SimScheme, EXIT_VERIFICATION,
};
use serde::Deserialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "netdof",
    about = "Net-DoF planning and simulation for the MISO broadcast channel with delayed finite-rate feedback",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact net-DoF table over a coherence-length or alpha sweep
    NetDof(CommonArgs),
    /// Monte Carlo rate sweep over an SNR grid with a fitted DoF slope
    Simulate(CommonArgs),
    /// Scheme-crossover boundaries (and optional per-N winner sweep)
    Regimes(CommonArgs),
    /// Coherence-window table in symbols, milliseconds and km/h
    DesignTable(CommonArgs),
    /// Numerical verification suite for the supporting identities
    Verify(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::NetDof(_) => "net-dof",
            Command::Simulate(_) => "simulate",
            Command::Regimes(_) => "regimes",
            Command::DesignTable(_) => "design-table",
            Command::Verify(_) => "verify",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::NetDof(a)
            | Command::Simulate(a)
            | Command::Regimes(a)
            | Command::DesignTable(a)
            | Command::Verify(a) => a,
        }
    }
}

/// Flags shared by every subcommand. Precedence: flag > config file >
/// built-in default.
#[derive(Args, Deserialize, Default, Clone)]
#[serde(deny_unknown_fields, default)]
struct CommonArgs {
    /// Number of users (= transmit antennas)
    #[arg(long)]
    k: Option<usize>,
    /// Coherence length N in symbols
    #[arg(long)]
    n: Option<usize>,
    /// Inclusive N sweep "lo:hi"
    #[arg(long, value_name = "LO:HI")]
    n_range: Option<String>,
    /// Feedback delay N_fd in symbols
    #[arg(long)]
    nfd: Option<usize>,
    /// Feedback scaling exponent alpha, as "p/q", integer or decimal
    #[arg(long)]
    alpha: Option<String>,
    /// Alpha sweep "lo:hi:step" (rationals)
    #[arg(long, value_name = "LO:HI:STEP")]
    alpha_range: Option<String>,
    /// Power-independent feedback bits (overrides --alpha for MAT runs)
    #[arg(long)]
    fixed_q: Option<u32>,
    /// Scheme to simulate
    #[arg(long, value_enum)]
    scheme: Option<SimScheme>,
    /// SNR grid in dB, comma separated
    #[arg(long, value_name = "DB,DB,...")]
    snr_grid_db: Option<String>,
    /// Monte Carlo trials per grid point (also sizes verify checks)
    #[arg(long)]
    trials: Option<usize>,
    /// Points used by the slope fit (largest powers first)
    #[arg(long)]
    fit_points: Option<usize>,
    /// Master seed; every stream of the run derives from it
    #[arg(long)]
    seed: Option<u64>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to available parallelism)
    #[arg(long)]
    workers: Option<usize>,
    /// Verification check name; repeat for several (default: all)
    #[arg(long)]
    check: Vec<String>,
    /// Carrier frequency in Hz (design-table)
    #[arg(long)]
    fc_hz: Option<f64>,
    /// Data symbol duration in ms (design-table)
    #[arg(long)]
    ts_ms: Option<f64>,
    /// User counts for the design table, comma separated
    #[arg(long, value_name = "K,K,...")]
    k_list: Option<String>,
    /// TOML config file; flags override its values
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Print the effective configuration as JSON and exit
    #[arg(long, default_value_t = false)]
    #[serde(skip)]
    show_config: bool,
}

impl CommonArgs {
    /// `self` wins over `file`, which wins over the defaults.
    fn merge(self, file: CommonArgs) -> CommonArgs {
        CommonArgs {
            k: self.k.or(file.k),
            n: self.n.or(file.n),
            n_range: self.n_range.or(file.n_range),
            nfd: self.nfd.or(file.nfd),
            alpha: self.alpha.or(file.alpha),
            alpha_range: self.alpha_range.or(file.alpha_range),
            fixed_q: self.fixed_q.or(file.fixed_q),
            scheme: self.scheme.or(file.scheme),
            snr_grid_db: self.snr_grid_db.or(file.snr_grid_db),
            trials: self.trials.or(file.trials),
            fit_points: self.fit_points.or(file.fit_points),
            seed: self.seed.or(file.seed),
            format: self.format.or(file.format),
            out: self.out.or(file.out),
            workers: self.workers.or(file.workers),
            check: if self.check.is_empty() {
                file.check
            } else {
                self.check
            },
            fc_hz: self.fc_hz.or(file.fc_hz),
            ts_ms: self.ts_ms.or(file.ts_ms),
            k_list: self.k_list.or(file.k_list),
            config: self.config,
            show_config: self.show_config,
        }
    }

    fn into_config(self, command: &str) -> Result<ExperimentConfig, CliError> {
        let defaults = ExperimentConfig::default();
        let n_range = match &self.n_range {
            Some(spec) => Some(parse_usize_pair(spec)?),
            None => defaults.n_range,
        };
        let snr_grid_db = match &self.snr_grid_db {
            Some(spec) => parse_f64_list(spec)?,
            None => defaults.snr_grid_db,
        };
        let k_list = match &self.k_list {
            Some(spec) => parse_usize_list(spec)?,
            None => defaults.k_list,
        };
        Ok(ExperimentConfig {
            command: command.to_string(),
            k: self.k.unwrap_or(defaults.k),
            n: self.n.unwrap_or(defaults.n),
            n_range,
            n_fd: self.nfd.unwrap_or(defaults.n_fd),
            alpha: self.alpha.unwrap_or(defaults.alpha),
            alpha_range: self.alpha_range,
            fixed_q: self.fixed_q,
            scheme: self.scheme.unwrap_or(defaults.scheme),
            snr_grid_db,
            trials: self.trials.unwrap_or(defaults.trials),
            fit_points: self.fit_points.unwrap_or(defaults.fit_points),
            seed: self.seed.unwrap_or(defaults.seed),
            format: self.format.unwrap_or(defaults.format),
            out: self.out.map(|p| p.display().to_string()),
            workers: self.workers,
            check: self.check,
            fc_hz: self.fc_hz.unwrap_or(defaults.fc_hz),
            ts_ms: self.ts_ms.unwrap_or(defaults.ts_ms),
            k_list,
        })
    }
}

fn parse_usize_pair(spec: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 2 {
        return Err(CliError::Usage(format!(
            "range must be lo:hi, got {spec:?}"
        )));
    }
    let lo = parts[0]
        .trim()
        .parse::<usize>()
        .map_err(|e| CliError::Usage(format!("bad range bound {:?}: {e}", parts[0])))?;
    let hi = parts[1]
        .trim()
        .parse::<usize>()
        .map_err(|e| CliError::Usage(format!("bad range bound {:?}: {e}", parts[1])))?;
    Ok((lo, hi))
}

fn parse_f64_list(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad dB value {s:?}: {e}")))
        })
        .collect()
}

fn parse_usize_list(spec: &str) -> Result<Vec<usize>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Usage(format!("bad user count {s:?}: {e}")))
        })
        .collect()
}

fn load_config_file(path: &PathBuf) -> Result<CommonArgs, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("cannot parse config {}: {e}", path.display())))
}

fn write_output(out: &CommandOutput, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let rendered = out.render(cfg.format);
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, rendered)
                .map_err(|e| CliError::Usage(format!("cannot write {path}: {e}")))?;
            for note in &out.notes {
                println!("{note}");
            }
        }
        None => {
            print!("{rendered}");
            // keep the data stream clean: human notes go to stderr
            for note in &out.notes {
                eprintln!("{note}");
            }
        }
    }
    std::io::stdout().flush().ok();
    Ok(())
}

fn run() -> Result<bool, CliError> {
    let cli = Cli::parse();
    let args = cli.command.args().clone();
    let merged = match &args.config {
        Some(path) => {
            let file = load_config_file(path)?;
            args.merge(file)
        }
        None => args,
    };
    let show_config = merged.show_config;
    let cfg = merged.into_config(cli.command.name())?;

    if show_config {
        println!(
            "{}",
            serde_json::to_string_pretty(&cfg).expect("config serializes")
        );
        return Ok(true);
    }

    if let Some(workers) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size worker pool: {e}")))?;
    }

    let output = match cli.command {
        Command::NetDof(_) => cmd_net_dof(&cfg)?,
        Command::Simulate(_) => cmd_simulate(&cfg)?,
        Command::Regimes(_) => cmd_regimes(&cfg)?,
        Command::DesignTable(_) => cmd_design_table(&cfg)?,
        Command::Verify(_) => cmd_verify(&cfg)?,
    };
    write_output(&output, &cfg)?;
    Ok(output.all_passed)
}

fn main() -> ExitCode {
    env_logger::init();
    // clap itself exits with the usage status (2) on unparsable flags
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFICATION as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
