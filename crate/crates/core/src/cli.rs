//! Command-line front end. Every output file starts with the configuration
//! that produced it, so a run can be repeated from its own artifact.

use crate::comparison;
use crate::error::Error;
use crate::ft::{self, TelecorrectionCircuitSpec, ThresholdSearch};
use crate::logical::{self, BmInput, PairChannel};
use crate::loss::{self, LossChannel, LossSides};
use crate::photonic::{self, TargetPair};
use crate::protocols::{self, GateKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "BELLSIM_THREADS";

/// Prefix of the configuration line in CSV output.
pub const CSV_CONFIG_PREFIX: &str = "# config: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Parser)]
#[command(name = "bellsim", version, about = "Bell measurement and fault-tolerance simulations")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Master seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; inferred from the output file extension when absent.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Derive the click-pattern table of the two-photon Bell device.
    BsTable {
        #[arg(long, value_enum, default_value_t = Target::PhiMinusPsiMinus)]
        target: Target,
    },
    /// Exact and sampled success of the logical Bell measurement.
    LogicalBm {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
    },
    /// Loss sweep of the logical Bell measurement against its closed form.
    LossSweep(LossSweepArgs),
    /// Teleport random logical qubits.
    Teleport(ProtocolArgs),
    /// Teleport random logical qubits through an H or CZ resource.
    Gate {
        #[arg(long, value_enum)]
        kind: GateArg,
        #[command(flatten)]
        run: ProtocolArgs,
    },
    /// Success probability versus mean photon number for all schemes.
    Compare {
        #[arg(long, default_value_t = 2.0)]
        grid_start: f64,
        #[arg(long, default_value_t = 20.0)]
        grid_end: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
    },
    /// Loss threshold of the concatenated telecorrection scheme.
    FtThreshold(FtArgs),
    /// Photon cost of one error-correction round.
    Resources {
        #[arg(long, default_value_t = 0)]
        nh: u64,
        #[arg(long, default_value_t = 0)]
        ncz: u64,
        #[arg(long, default_value_t = 0)]
        nplus: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    PhiMinusPsiMinus,
    PhiPlusPsiPlus,
    PhiMinusPsiPlus,
    PhiPlusPsiMinus,
}

impl From<Target> for TargetPair {
    fn from(t: Target) -> Self {
        match t {
            Target::PhiMinusPsiMinus => TargetPair::PhiMinusPsiMinus,
            Target::PhiPlusPsiPlus => TargetPair::PhiPlusPsiPlus,
            Target::PhiMinusPsiPlus => TargetPair::PhiMinusPsiPlus,
            Target::PhiPlusPsiMinus => TargetPair::PhiPlusPsiMinus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Sides {
    /// Both photons of every measured pair can be lost.
    Both,
    /// Only the input side is lossy (fresh resource states).
    Input,
}

impl From<Sides> for LossSides {
    fn from(s: Sides) -> Self {
        match s {
            Sides::Both => LossSides::Both,
            Sides::Input => LossSides::InputOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GateArg {
    H,
    Cz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct LossSweepArgs {
    /// Photons per logical qubit; repeat or separate with commas.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 4, 8, 16])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0.0)]
    pub eta_start: f64,
    #[arg(long, default_value_t = 0.3)]
    pub eta_end: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eta_step: f64,
    #[arg(long, value_enum, default_value_t = Sides::Both)]
    pub sides: Sides,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct ProtocolArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    /// Fresh input copies tried before giving up.
    #[arg(long, default_value_t = 1)]
    pub max_attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Args)]
pub struct FtArgs {
    /// Photons per logical qubit; repeat or separate with commas.
    #[arg(long, value_delimiter = ',', default_values_t = [4usize])]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Circuit in the text format; the built-in round when absent.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[arg(long, default_value_t = ThresholdSearch::default().eta_low)]
    pub eta_low: f64,
    #[arg(long, default_value_t = ThresholdSearch::default().eta_high)]
    pub eta_high: f64,
    #[arg(long, default_value_t = ThresholdSearch::default().tolerance)]
    pub tolerance: f64,
    /// Write the circuit in the text format instead of searching.
    #[arg(long)]
    pub print_circuit: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Sim(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Sim(Error::Domain(_) | Error::ResourceBound { .. } | Error::CircuitParse { .. }) => {
                EXIT_USAGE
            }
            _ => EXIT_RUNTIME,
        }
    }
}

/// Formats with nine significant digits; plain notation for moderate
/// magnitudes, scientific otherwise.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-5..9).contains(&exp) {
        return sci;
    }
    let s = format!("{:.*}", (8 - exp).max(0) as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn to_csv(&self, config: &RunConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{CSV_CONFIG_PREFIX}{}", serde_json::to_string(config).unwrap());
        let _ = writeln!(s, "{}", self.header.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }
}

/// Structured result plus its flat table form.
struct Output {
    json: serde_json::Value,
    table: Table,
}

fn json_doc(config: &RunConfig, result: serde_json::Value) -> String {
    let doc = serde_json::json!({ "config": config, "result": result });
    let mut s = serde_json::to_string_pretty(&doc).unwrap();
    s.push('\n');
    s
}

/// Reads back the configuration embedded in an output file of either format.
pub fn config_from_output(text: &str) -> Option<RunConfig> {
    if let Some(rest) = text.strip_prefix(CSV_CONFIG_PREFIX) {
        return serde_json::from_str(rest.lines().next()?).ok();
    }
    let v: serde_json::Value = serde_json::from_str(text).ok()?;
    serde_json::from_value(v.get("config")?.clone()).ok()
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("result types serialize")
}

fn b(x: bool) -> String {
    x.to_string()
}

fn bs_table(target: Target) -> Result<Output, CliError> {
    let net = photonic::build_bs_network(target.into());
    let table = photonic::derive_bs_table(&net)?;
    let mut t = Table::new(&["pattern", "outcome", "p_phi_plus", "p_phi_minus", "p_psi_plus", "p_psi_minus"]);
    for e in &table.entries {
        let outcome = match e.outcome {
            photonic::BsOutcome::Identified(s) => s.symbol().to_string(),
            photonic::BsOutcome::Fail => "fail".into(),
        };
        let mut row = vec![e.pattern.to_string(), outcome];
        row.extend(e.probabilities.iter().map(|&p| fmt_sig9(p)));
        t.push(row);
    }
    let json = serde_json::json!({
        "table": to_value(&table),
        "average_success": table.average_success(),
    });
    Ok(Output { json, table: t })
}

fn logical_bm(n: usize, trials: u64, seed: u64) -> Result<Output, CliError> {
    let exact = logical::exact_success_probability(BmInput::UniformAverage, n, &PairChannel::standard())?;
    let mc = logical::monte_carlo_success(n, trials, seed)?;
    let within = mc.within_sigma(exact, 4.0);
    let mut t = Table::new(&["n", "exact", "closed_form", "mc_mean", "mc_stderr", "trials", "within_4_sigma"]);
    let closed = 1.0 - 0.5f64.powi(n as i32);
    t.push(vec![
        n.to_string(),
        fmt_sig9(exact),
        fmt_sig9(closed),
        fmt_sig9(mc.mean),
        fmt_sig9(mc.stderr),
        trials.to_string(),
        b(within),
    ]);
    let json = serde_json::json!({
        "n": n,
        "exact": exact,
        "closed_form": closed,
        "monte_carlo": to_value(&mc),
        "within_4_sigma": within,
    });
    Ok(Output { json, table: t })
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    eta: f64,
    closed_form: f64,
    estimate: logical::Estimate,
    within_4_sigma: bool,
}

fn loss_sweep(a: &LossSweepArgs, seed: u64) -> Result<Output, CliError> {
    let etas = comparison::grid(a.eta_start, a.eta_end, a.eta_step)?;
    let sides: LossSides = a.sides.into();
    let mut rows = Vec::new();
    let mut t = Table::new(&["n", "eta", "closed_form", "mc_mean", "mc_stderr", "trials", "within_4_sigma"]);
    for &n in &a.n {
        for &eta in &etas {
            let closed = match sides {
                LossSides::Both => loss::bm_success_prob_lossy(n, eta),
                LossSides::InputOnly => loss::gate_teleport_success_prob(n, eta),
            };
            let est = loss::mc_bm_success(n, LossChannel::new(eta)?, sides, a.trials, seed)?;
            let within = est.within_sigma(closed, 4.0);
            t.push(vec![
                n.to_string(),
                fmt_sig9(eta),
                fmt_sig9(closed),
                fmt_sig9(est.mean),
                fmt_sig9(est.stderr),
                a.trials.to_string(),
                b(within),
            ]);
            rows.push(SweepRow {
                n,
                eta,
                closed_form: closed,
                estimate: est,
                within_4_sigma: within,
            });
        }
    }
    Ok(Output {
        json: to_value(&rows),
        table: t,
    })
}

fn protocol(kind: GateKind, a: &ProtocolArgs, seed: u64) -> Result<Output, CliError> {
    // the resource side is fresh, so only the input can be lossy
    let sides = match kind {
        GateKind::TeleportIdentity => LossSides::Both,
        _ => LossSides::InputOnly,
    };
    let r = protocols::run_protocol(kind, a.n, a.eta, sides, a.trials, a.max_attempts, seed)?;
    let mut t = Table::new(&[
        "n",
        "eta",
        "trials",
        "max_attempts",
        "successes",
        "success_rate",
        "attempt_success_rate",
        "z_errors",
        "mean_fidelity",
        "min_fidelity",
    ]);
    t.push(vec![
        r.n.to_string(),
        fmt_sig9(r.eta),
        r.trials.to_string(),
        r.max_attempts.to_string(),
        r.successes.to_string(),
        fmt_sig9(r.success_rate.mean),
        fmt_sig9(r.attempt_success_rate.mean),
        r.z_errors.to_string(),
        fmt_sig9(r.mean_fidelity),
        fmt_sig9(r.min_fidelity),
    ]);
    Ok(Output {
        json: to_value(&r),
        table: t,
    })
}

fn compare(start: f64, end: f64, step: f64) -> Result<Output, CliError> {
    let grid = comparison::grid(start, end, step)?;
    let points = comparison::generate_figure2(&grid)?;
    let mut t = Table::new(&["scheme", "nbar", "ps", "physical"]);
    for p in &points {
        t.push(vec![p.scheme.to_string(), fmt_sig9(p.nbar), fmt_sig9(p.ps), b(p.is_physical_point)]);
    }
    let (nbar, ps) = comparison::coherent_scheme(2f64.sqrt())?;
    let json = serde_json::json!({
        "points": to_value(&points),
        "coherent_reference": { "alpha": 2f64.sqrt(), "nbar": nbar, "ps": ps },
    });
    Ok(Output { json, table: t })
}

fn load_circuit(path: &Option<PathBuf>) -> Result<TelecorrectionCircuitSpec, CliError> {
    match path {
        None => Ok(TelecorrectionCircuitSpec::default_round()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?;
            Ok(TelecorrectionCircuitSpec::parse(&text)?)
        }
    }
}

fn ft_threshold(a: &FtArgs, seed: u64) -> Result<Output, CliError> {
    let circuit = load_circuit(&a.circuit)?;
    let search = ThresholdSearch {
        eta_low: a.eta_low,
        eta_high: a.eta_high,
        tolerance: a.tolerance,
    };
    if !(a.tolerance > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()).into());
    }
    let mut results = Vec::new();
    let mut t = Table::new(&[
        "n",
        "eta_threshold",
        "curve",
        "eta",
        "level",
        "memory_z",
        "gate_fail",
        "x_rate",
        "z_rate",
        "total",
    ]);
    for &n in &a.n {
        let r = ft::find_threshold_with(&circuit, n, a.levels, a.trials, seed, search)?;
        for (name, c) in [("contracting", &r.contraction_curve), ("diverging", &r.divergence_curve)] {
            for (level, v) in c.levels.iter().enumerate() {
                t.push(vec![
                    n.to_string(),
                    fmt_sig9(r.eta_threshold),
                    name.into(),
                    fmt_sig9(c.eta),
                    (level + 1).to_string(),
                    fmt_sig9(v.memory_z),
                    fmt_sig9(v.gate_fail),
                    fmt_sig9(v.x_rate),
                    fmt_sig9(v.z_rate),
                    fmt_sig9(v.total()),
                ]);
            }
        }
        results.push(r);
    }
    Ok(Output {
        json: to_value(&results),
        table: t,
    })
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // a second call in the same process keeps the first pool
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn format_for(config: &RunConfig) -> Format {
    config.format.unwrap_or_else(|| {
        match config.out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    })
}

/// Executes a parsed configuration.
pub fn execute(config: &RunConfig) -> Result<(), CliError> {
    let seed = config.seed;
    let output = match &config.command {
        Command::Resources { nh, ncz, nplus } => {
            let cost = protocols::resource_cost(*nh, *ncz, *nplus);
            let text = match (config.out.is_some(), format_for(config)) {
                (true, Format::Json) => json_doc(config, serde_json::json!({ "photons": cost })),
                (true, Format::Csv) => {
                    let mut t = Table::new(&["nh", "ncz", "nplus", "photons"]);
                    t.push(vec![nh.to_string(), ncz.to_string(), nplus.to_string(), cost.to_string()]);
                    t.to_csv(config)
                }
                // bare number on a terminal
                (false, _) => format!("{cost}\n"),
            };
            return write_out(&config.out, &text);
        }
        Command::FtThreshold(a) if a.print_circuit => {
            return write_out(&config.out, &load_circuit(&a.circuit)?.to_text());
        }
        Command::BsTable { target } => bs_table(*target)?,
        Command::LogicalBm { n, trials } => logical_bm(*n, *trials, seed)?,
        Command::LossSweep(a) => loss_sweep(a, seed)?,
        Command::Teleport(a) => protocol(GateKind::TeleportIdentity, a, seed)?,
        Command::Gate { kind, run } => {
            let kind = match kind {
                GateArg::H => GateKind::Hadamard,
                GateArg::Cz => GateKind::Cz,
            };
            protocol(kind, run, seed)?
        }
        Command::Compare {
            grid_start,
            grid_end,
            step,
        } => compare(*grid_start, *grid_end, *step)?,
        Command::FtThreshold(a) => ft_threshold(a, seed)?,
    };
    let text = match format_for(config) {
        Format::Json => json_doc(config, output.json),
        Format::Csv => output.table.to_csv(config),
    };
    write_out(&config.out, &text)
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    match execute(&config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig9(0.99609375), "0.99609375");
        assert_eq!(fmt_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig9(2.0), "2");
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(1.997e-3), "0.001997");
        assert_eq!(fmt_sig9(1.234e-7), "1.23400000e-7");
        assert_eq!(fmt_sig9(-0.5), "-0.5");
        assert_eq!(fmt_sig9(123456789.0), "123456789");
    }

    #[test]
    fn config_round_trips_through_both_formats() {
        let config = RunConfig::try_parse_from(["bellsim", "compare", "--step", "1", "--seed", "5"]).unwrap();
        let json = json_doc(&config, serde_json::json!(null));
        assert_eq!(config_from_output(&json), Some(config.clone()));
        let csv = Table::new(&["a"]).to_csv(&config);
        assert_eq!(config_from_output(&csv), Some(config));
    }

    #[test]
    fn usage_errors_map_to_exit_two() {
        assert_eq!(run(["bellsim", "no-such-command"]), EXIT_USAGE);
        assert_eq!(run(["bellsim", "logical-bm", "--n", "x"]), EXIT_USAGE);
        assert_eq!(run(["bellsim", "logical-bm", "--n", "0"]), EXIT_USAGE);
    }

    #[test]
    fn format_follows_extension() {
        let c = RunConfig::try_parse_from(["bellsim", "compare", "--out", "x.csv"]).unwrap();
        assert_eq!(format_for(&c), Format::Csv);
        let c = RunConfig::try_parse_from(["bellsim", "compare", "--out", "x.csv", "--format", "json"]).unwrap();
        assert_eq!(format_for(&c), Format::Json);
    }
}
