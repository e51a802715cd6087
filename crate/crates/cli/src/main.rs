use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use mgchain_cli::config::{overlay, parse_config_text};
use mgchain_cli::output::write_csv;
use mgchain_cli::{commands, CliError, Command, Label, RunConfig, SweepResult};

#[derive(Parser)]
#[command(name = "mgchain", version, about = "Exact-diagonalization sweeps for J1-J2 chains with a local field")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Sector ground states and distance measures over a field sweep
    Ground,
    /// Pairwise mutual-information map of one ground state
    Entmap,
    /// Initial distance to the dephased state after a small field change
    QuenchSmall,
    /// Full time series and histograms after a large field change
    QuenchLarge,
    /// Small-quench sweep over (h, J2) plus the zero-field gap curve
    J2sweep,
    /// Fit of the effective coupling across a strongly polarized block
    Approx,
    /// Global spectral gap
    Gap,
    /// Built-in invariant checks
    Selftest,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Command {
        match s {
            Sub::Ground => Command::Ground,
            Sub::Entmap => Command::Entmap,
            Sub::QuenchSmall => Command::QuenchSmall,
            Sub::QuenchLarge => Command::QuenchLarge,
            Sub::J2sweep => Command::J2Sweep,
            Sub::Approx => Command::Approx,
            Sub::Gap => Command::Gap,
            Sub::Selftest => Command::Selftest,
        }
    }
}

/// Every flag is kept as text and parsed together with the config file.
#[derive(Args)]
struct Flags {
    /// key = value file; flags given on the command line win
    #[arg(long, global = true)]
    config: Option<String>,
    /// Chain length(s), comma separated
    #[arg(long, global = true)]
    n: Option<String>,
    /// Number of field sites N', comma separated
    #[arg(long, global = true)]
    nprime: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    j2: Option<String>,
    /// lo:hi:step
    #[arg(long, global = true, allow_hyphen_values = true)]
    j2_range: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    h: Option<String>,
    /// lo:hi:step
    #[arg(long, global = true, allow_hyphen_values = true)]
    h_range: Option<String>,
    /// open, periodic, or both comma separated
    #[arg(long, global = true)]
    boundary: Option<String>,
    /// Total polarization values L, comma separated
    #[arg(long, global = true, allow_hyphen_values = true)]
    sectors: Option<String>,
    #[arg(long, global = true)]
    levels: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    dense_threshold: Option<String>,
    /// Output file; standard output when absent
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    h_initial: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    h_final: Option<String>,
    #[arg(long, global = true)]
    tmax: Option<String>,
    #[arg(long, global = true)]
    samples: Option<String>,
    #[arg(long, global = true)]
    bins: Option<String>,
    /// lo:hi:step grid for the effective coupling
    #[arg(long, global = true, allow_hyphen_values = true)]
    j_add_range: Option<String>,
    /// Use the exact dimer state instead of a computed ground state (entmap)
    #[arg(long, global = true)]
    mg_state: bool,
}

impl Flags {
    fn to_map(&self) -> BTreeMap<String, String> {
        let pairs = [
            ("n", &self.n),
            ("nprime", &self.nprime),
            ("j2", &self.j2),
            ("j2-range", &self.j2_range),
            ("h", &self.h),
            ("h-range", &self.h_range),
            ("boundary", &self.boundary),
            ("sectors", &self.sectors),
            ("levels", &self.levels),
            ("seed", &self.seed),
            ("dense-threshold", &self.dense_threshold),
            ("out", &self.out),
            ("epsilon", &self.epsilon),
            ("h-initial", &self.h_initial),
            ("h-final", &self.h_final),
            ("tmax", &self.tmax),
            ("samples", &self.samples),
            ("bins", &self.bins),
            ("j-add-range", &self.j_add_range),
        ];
        let mut map: BTreeMap<String, String> =
            pairs.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v))).collect();
        if self.mg_state {
            map.insert("mg-state".into(), "true".into());
        }
        map
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let base = match &cli.flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{path}: {e}")))?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    RunConfig::resolve(cli.command.into(), overlay(base, &cli.flags.to_map())?)
}

fn emit(cfg: &RunConfig, result: &SweepResult) -> Result<(), CliError> {
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    match &cfg.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_csv(&mut w, cfg, result, stamp)?;
            w.flush()?;
        }
        None => write_csv(io::stdout().lock(), cfg, result, stamp)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // help and version requests are not failures; bad flags are config errors
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = load(&cli).and_then(|cfg| {
        let result = commands::run(&cfg)?;
        if cfg.command == Command::Selftest {
            for r in result.rows.iter().filter(|r| r.label == Label::Selftest) {
                eprintln!("{} {}", if r.value == "1" { "PASS" } else { "FAIL" }, r.key);
            }
        }
        for r in result.rows.iter().filter(|r| r.label == Label::Error) {
            eprintln!("cell {}: {}", r.cell.index, r.value);
        }
        emit(&cfg, &result)?;
        Ok(result.worst_exit)
    });
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("mgchain: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
