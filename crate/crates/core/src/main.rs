use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qzeno::config::ConfigFile;
use qzeno::sweep::{self, OracleLevel, Scenario, Series};
use qzeno::zeno::{threshold_time_with, MeasurementMode, ReferenceRate};
use qzeno::{Error, Result, SystemParams};

#[derive(Parser)]
#[command(name = "qzeno", version, about = "Zeno and anti-Zeno control of qubit-pair entanglement in a leaky cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario and write a CSV or JSON table.
    Run(RunArgs),
    /// List the built-in figure presets.
    Presets,
    /// Locate the Zeno / anti-Zeno crossover interval T*.
    Threshold(ThresholdArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Fast,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Envelope,
    Stepwise,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reference {
    FreeDecay,
    GoldenRule,
}

#[derive(Args)]
struct RunArgs {
    /// Run file with `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a built-in preset (see `qzeno presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Number of qubits.
    #[arg(long)]
    n: Option<u32>,
    /// g/kappa.
    #[arg(long)]
    coupling_ratio: Option<f64>,
    /// Delta/kappa.
    #[arg(long, allow_negative_numbers = true)]
    detuning_over_kappa: Option<f64>,
    /// Last kappa*t of the grid.
    #[arg(long)]
    tau_max: Option<f64>,
    /// Grid spacing in kappa*t.
    #[arg(long)]
    tau_step: Option<f64>,
    /// Measurement interval kappa*T; repeat or comma-separate for several.
    #[arg(long, value_delimiter = ',')]
    measure_interval: Vec<f64>,
    /// Detunings for the delta_concurrence columns.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    delta_detuning: Vec<f64>,
    /// Series: survival, concurrence, measured_concurrence, delta_concurrence, gamma_z.
    #[arg(long, value_delimiter = ',')]
    series: Vec<String>,
    /// How measured curves are drawn.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Output file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Cross-check against independent solvers; exit 2 on disagreement.
    #[arg(long, value_enum)]
    oracle_check: Option<Level>,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    coupling_ratio: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    detuning_over_kappa: f64,
    /// Upper end of the scanned interval range.
    #[arg(long, default_value_t = 20.0)]
    tau_max: f64,
    #[arg(long, value_enum, default_value = "free-decay")]
    reference: Reference,
}

enum Outcome {
    Ok,
    OracleFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Presets => {
            print!("{}", sweep::list_presets());
            Ok(Outcome::Ok)
        }
        Command::Threshold(args) => threshold(args),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::OracleFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {}", chain(&e));
            ExitCode::from(1)
        }
    }
}

fn chain(e: &Error) -> String {
    let mut s = e.to_string();
    let mut cur: Option<&(dyn std::error::Error + 'static)> = std::error::Error::source(e);
    while let Some(inner) = cur {
        s.push_str(": ");
        s.push_str(&inner.to_string());
        cur = inner.source();
    }
    s
}

fn scalar<T: std::str::FromStr>(flag: Option<T>, cfg: &ConfigFile, key: &str) -> Result<Option<T>> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.parse_value(key),
    }
}

fn list<T: std::str::FromStr>(flag: Vec<T>, cfg: &ConfigFile, key: &str) -> Result<Option<Vec<T>>> {
    if !flag.is_empty() {
        return Ok(Some(flag));
    }
    let v: Vec<T> = cfg.parse_list(key)?;
    Ok((!v.is_empty()).then_some(v))
}

fn build_scenario(args: &RunArgs, cfg: &ConfigFile) -> Result<Scenario> {
    let preset_name = scalar(args.preset.clone(), cfg, "preset")?;
    let base = match &preset_name {
        Some(name) => sweep::preset(name)
            .ok_or_else(|| Error::InvalidParams(format!("unknown preset '{name}'")))?
            .scenario(),
        None => Scenario::new(SystemParams::dimensionless(4, 0.1, 0.0)?, 50.0, 0.01),
    };
    let n = scalar(args.n, cfg, "n")?.unwrap_or(base.params.n());
    let r = scalar(args.coupling_ratio, cfg, "coupling-ratio")?.unwrap_or(base.params.coupling_ratio());
    let d = scalar(args.detuning_over_kappa, cfg, "detuning-over-kappa")?.unwrap_or(base.params.detuning());
    let mut s = base.clone();
    s.params = SystemParams::dimensionless(n, r, d)?;
    s.tau_max = scalar(args.tau_max, cfg, "tau-max")?.unwrap_or(base.tau_max);
    s.tau_step = scalar(args.tau_step, cfg, "tau-step")?.unwrap_or(base.tau_step);
    if let Some(t) = list(args.measure_interval.clone(), cfg, "measure-interval")? {
        s.schedules = t;
    }
    if let Some(dd) = list(args.delta_detuning.clone(), cfg, "delta-detuning")? {
        s.detunings = dd;
    }
    let mode = match args.mode {
        Some(Mode::Envelope) => Some(MeasurementMode::Envelope),
        Some(Mode::Stepwise) => Some(MeasurementMode::Stepwise),
        None => match cfg.get("mode") {
            None => None,
            Some(e) => Some(match e.value.as_str() {
                "envelope" => MeasurementMode::Envelope,
                "stepwise" => MeasurementMode::Stepwise,
                other => {
                    return Err(Error::Config {
                        line: e.line,
                        reason: format!("mode must be envelope or stepwise, got '{other}'"),
                    })
                }
            }),
        },
    };
    if let Some(m) = mode {
        s.mode = m;
    }
    match list(args.series.clone(), cfg, "series")? {
        Some(names) => {
            s.outputs = names.iter().map(|n| n.parse()).collect::<Result<_>>()?;
        }
        None if preset_name.is_none() => {
            s.outputs = vec![Series::Concurrence];
            if !s.schedules.is_empty() {
                s.outputs.push(Series::MeasuredConcurrence);
            }
            if !s.detunings.is_empty() {
                s.outputs.push(Series::DeltaConcurrence);
            }
        }
        None => {}
    }
    s.validate()?;
    Ok(s)
}

fn run(args: RunArgs) -> Result<Outcome> {
    let cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidParams(format!("cannot read {}: {e}", path.display())))?;
            ConfigFile::parse(&text).map_err(|e| e.at(path.display().to_string()))?
        }
        None => ConfigFile::default(),
    };
    let scenario = build_scenario(&args, &cfg)?;
    let format = match args.format {
        Some(f) => f,
        None => match cfg.get("format") {
            None => Format::Csv,
            Some(e) => match e.value.as_str() {
                "csv" => Format::Csv,
                "json" => Format::Json,
                other => {
                    return Err(Error::Config {
                        line: e.line,
                        reason: format!("format must be csv or json, got '{other}'"),
                    })
                }
            },
        },
    };
    let level = match args.oracle_check {
        Some(Level::Fast) => Some(OracleLevel::Fast),
        Some(Level::Full) => Some(OracleLevel::Full),
        None => match cfg.get("oracle-check") {
            None => None,
            Some(e) => Some(e.value.parse::<OracleLevel>().map_err(|err| Error::Config {
                line: e.line,
                reason: err.to_string(),
            })?),
        },
    };
    let output = args.output.clone().or_else(|| cfg.get("output").map(|e| PathBuf::from(&e.value)));

    let mut result = sweep::run_scenario(&scenario)?;
    let mut outcome = Outcome::Ok;
    if let Some(level) = level {
        let report = sweep::run_oracle_check(&scenario, level);
        eprint!("{}", report.summary());
        result.metadata.insert("oracle_check".into(), report.status().into());
        if !report.pass {
            outcome = Outcome::OracleFailed;
        }
    }
    let text = match format {
        Format::Csv => result.to_csv(),
        Format::Json => result.to_json(),
    };
    match output {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| Error::InvalidParams(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(outcome)
}

fn threshold(args: ThresholdArgs) -> Result<Outcome> {
    let params = SystemParams::dimensionless(args.n, args.coupling_ratio, args.detuning_over_kappa)?;
    let reference = match args.reference {
        Reference::FreeDecay => ReferenceRate::FreeDecay,
        Reference::GoldenRule => ReferenceRate::GoldenRule,
    };
    let search = threshold_time_with(&params, args.tau_max, reference)?;
    println!("gamma_ref: {:.10e}", search.gamma_ref);
    match search.threshold {
        Some(t) => println!("threshold: {t:.10e}"),
        None => println!("threshold: none"),
    }
    if !search.skipped.is_empty() {
        println!("skipped_zeros: {}", search.skipped.len());
    }
    Ok(Outcome::Ok)
}
