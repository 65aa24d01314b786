//! `ydof`: region computation, scheme checks, simulation and verification
//! for the three-user MIMO Y channel.
//!
//! Exit status: 0 on success, 1 when a tuple is outside the region or a
//! verification fails, 2 on malformed input.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ydof::linalg::Tolerances;
use ydof::report;
use ydof::simulate::{self, Mode, SimOptions, SymbolSource};
use ydof::{AntennaConfig, DofTuple, Error};

#[derive(Parser)]
#[command(name = "ydof", version, about = "DoF region and alignment schemes for the three-user MIMO Y channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the halfspaces (and optionally the vertices) of the DoF region.
    Region {
        #[command(flatten)]
        config: ConfigArg,
        /// Enumerate the vertices as well.
        #[arg(long)]
        vertices: bool,
        /// Write JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check membership of a tuple and print its pattern plan.
    Check {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        dof: DofArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run Monte Carlo trials of the signal chain.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        dof: DofArg,
        /// Seed of the first trial; trial i uses seed + i.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// noiseless or rates.
        #[arg(long, default_value = "noiseless")]
        mode: String,
        /// Power levels in dB: `start:step:stop` or a comma list.
        #[arg(long, default_value = "40:10:60")]
        power_grid: String,
        /// Symbol source for noiseless runs: gaussian or qpsk.
        #[arg(long, default_value = "gaussian")]
        source: String,
        /// Directory for report.json and the CSV; stdout JSON when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Run the independent oracles on a tuple, or on every vertex.
    Verify {
        #[command(flatten)]
        config: ConfigArg,
        /// Tuple to verify; all vertices of the region when omitted.
        #[arg(long)]
        dof: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of channel seeds per tuple.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Synthesize one design and export channel.bin, design.bin, design.json.
    Synthesize {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        dof: DofArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
}

#[derive(Args)]
struct ConfigArg {
    /// Antenna counts `M1,M2,M3,N`.
    #[arg(long)]
    config: String,
}

#[derive(Args)]
struct DofArg {
    /// DoF tuple `d12,d13,d21,d23,d31,d32`; entries may be `p/q`.
    #[arg(long)]
    dof: String,
}

#[derive(Args)]
struct TolArgs {
    /// Maximum relative symbol recovery error.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Relative singular-value threshold for numerical rank.
    #[arg(long)]
    rank_tolerance: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<Tolerances, Error> {
        let mut tol = Tolerances::default();
        if let Some(t) = self.tolerance {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::Usage("--tolerance must be positive".into()));
            }
            tol.recovery = t;
        }
        if let Some(t) = self.rank_tolerance {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::Usage("--rank-tolerance must be positive".into()));
            }
            tol.rank_rtol = Some(t);
        }
        Ok(tol)
    }
}

fn parse_config(s: &str) -> Result<AntennaConfig, Error> {
    s.parse()
}

fn parse_dof(s: &str) -> Result<DofTuple, Error> {
    s.parse()
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::Usage(format!("bad power grid `{s}`"));
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, step, b] = parts[..] else { return Err(bad()) };
        let (a, step, b) = (num(a)?, num(step)?, num(b)?);
        if ![a, step, b].iter().all(|x| x.is_finite()) || step <= 0.0 || b < a {
            return Err(bad());
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| a + step * i as f64).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(bad());
    }
    if grid.len() < 2 {
        return Err(Error::Usage("power grid needs at least 2 points".into()));
    }
    Ok(grid)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}")?;
        }
    }
    Ok(())
}

/// Exit status for an error: 2 for input problems, 1 otherwise.
fn status(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::InvalidTuple(_) | Error::Usage(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Region { config, vertices, out } => {
            let rep = report::region_report(&parse_config(&config.config)?, vertices)?;
            emit(&rep, out.as_deref())?;
            Ok(0)
        }
        Command::Check { config, dof, out } => {
            let rep = report::check_report(&parse_config(&config.config)?, &parse_dof(&dof.dof)?)?;
            emit(&rep, out.as_deref())?;
            if let Some(v) = &rep.violated {
                eprintln!("not in the DoF region: violates {v}");
            }
            Ok(u8::from(!rep.pass))
        }
        Command::Simulate { config, dof, seed, trials, mode, power_grid, source, out, tol } => {
            let config = parse_config(&config.config)?;
            let d = parse_dof(&dof.dof)?;
            let mode: Mode = mode.parse()?;
            let opts = SimOptions {
                source: source.parse::<SymbolSource>()?,
                power_grid_db: parse_grid(&power_grid)?,
                tolerances: tol.resolve()?,
            };
            let rep = simulate::monte_carlo(&config, &d, trials, seed, mode, &opts)?;
            match out {
                None => emit(&rep, None)?,
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    emit(&rep, Some(&dir.join("report.json")))?;
                    let (name, rates) = match mode {
                        Mode::Rates => ("rates.csv", true),
                        Mode::Noiseless => ("trials.csv", false),
                    };
                    let w = BufWriter::new(File::create(dir.join(name))?);
                    if rates {
                        simulate::write_rate_csv(&rep, w)?;
                    } else {
                        simulate::write_trials_csv(&rep, w)?;
                    }
                }
            }
            let failed = rep.trials - rep.successes;
            if failed > 0 {
                eprintln!("{failed} of {} trials did not succeed", rep.trials);
            }
            Ok(0)
        }
        Command::Verify { config, dof, seed, seeds, out, tol } => {
            let config = parse_config(&config.config)?;
            let tuples = match dof {
                Some(s) => vec![parse_dof(&s)?],
                None => Vec::new(),
            };
            let seeds: Vec<u64> = (0..seeds).map(|i| seed.wrapping_add(i)).collect();
            let rep = report::verify_report(&config, &tuples, &seeds, &tol.resolve()?)?;
            emit(&rep, out.as_deref())?;
            for t in rep.tuples.iter().filter(|t| !t.pass) {
                let w = std::iter::once(&t.membership)
                    .chain(&t.verdicts)
                    .find(|v| !v.pass)
                    .and_then(|v| v.witness.clone())
                    .unwrap_or_default();
                eprintln!("{}: {w}", t.dof);
            }
            Ok(u8::from(!rep.pass))
        }
        Command::Synthesize { config, dof, seed, out, tol } => {
            let config = parse_config(&config.config)?;
            let s = report::synthesize(&config, &parse_dof(&dof.dof)?, seed, &tol.resolve()?)?;
            fs::create_dir_all(&out)?;
            s.channel.write_binary(BufWriter::new(File::create(out.join("channel.bin"))?))?;
            s.design.write_binary(BufWriter::new(File::create(out.join("design.bin"))?))?;
            emit(&s.design.manifest(&s.plan), Some(&out.join("design.json")))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(status(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("40:10:60").unwrap(), vec![40.0, 50.0, 60.0]);
        assert_eq!(parse_grid("0, 5").unwrap(), vec![0.0, 5.0]);
        assert!(parse_grid("40").is_err());
        assert!(parse_grid("60:10:40").is_err());
        assert!(parse_grid("1:0:5").is_err());
        assert!(parse_grid("nan,5").is_err());
        assert!(parse_grid("0:1:inf").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
