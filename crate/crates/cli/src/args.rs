use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "ionqv", version, about = "Virtual-qubit trapped-ion experiments")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Synthesize a pulse sequence for a target unitary.
    Compile(CompileArgs),
    /// Audit the bundled appendix tables.
    Tables(TablesArgs),
    /// Gates needed for random circuits to reach a cross-entropy threshold.
    Xeb(XebArgs),
    /// Bernstein–Vazirani circuits and gate counts.
    Bv(BvArgs),
    /// Repetition-code memory experiment.
    Repcode(RepcodeArgs),
    /// Computational-manifold search.
    Manifold(ManifoldArgs),
    /// Run the experiment described by a JSON config file.
    Run(RunArgs),
}

#[derive(Parser, Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Parser, Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompileArgs {
    /// Target unitary: one matrix row per line, as real/imaginary pairs.
    #[arg(long)]
    pub target: PathBuf,
    /// Register description (JSON).
    #[arg(long)]
    pub register: PathBuf,
    /// Output circuit file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for the variational search (multi-ion registers).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 4)]
    pub layers_max: usize,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 400)]
    pub sweeps: usize,
}

#[derive(Parser, Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TablesArgs {
    /// Table file (default: tables.json in the data directory, else the bundled copy).
    #[arg(long)]
    pub tables: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 600)]
    pub sweeps: usize,
    /// Longest pulse sequence tried by exhaustive search.
    #[arg(long, default_value_t = 3)]
    pub search_depth: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    #[default]
    AllToAll,
    Minimal,
    MsLimited,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    #[default]
    Brickwork,
    Longrange,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum StatisticArg {
    #[default]
    Xeb,
    Moment,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum RuleArg {
    #[default]
    EnsembleMean,
    PerCircuit,
}

#[derive(Parser, Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct XebArgs {
    /// Total qubit counts N (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [12])]
    pub qubits: Vec<usize>,
    /// Qubits per ion (comma separated); combinations with N not divisible by n are skipped.
    #[arg(long, value_delimiter = ',', default_values_t = [2])]
    pub n: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Policy::AllToAll)]
    pub policy: Policy,
    #[arg(long, value_enum, default_value_t = Arch::Brickwork)]
    pub arch: Arch,
    #[arg(long, value_enum, default_value_t = StatisticArg::Xeb)]
    pub statistic: StatisticArg,
    /// Threshold (default: 2 for xeb, 4 for moment).
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum, default_value_t = RuleArg::EnsembleMean)]
    pub rule: RuleArg,
    #[arg(long, default_value_t = 20)]
    pub circuits: usize,
    #[arg(long, default_value_t = 20000)]
    pub max_gates: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum LayoutArg {
    /// One qubit per ion.
    One,
    /// Two qubits per data ion.
    #[default]
    Two,
}

#[derive(Parser, Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BvArgs {
    /// Secret bit strings (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub secret: Vec<String>,
    /// Random secrets of this length, drawn with --seed.
    #[arg(long)]
    pub random_length: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub random_count: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [LayoutArg::One, LayoutArg::Two])]
    pub layout: Vec<LayoutArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum DecoderArg {
    #[default]
    SpaceTime,
    PerRound,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum RoundsRule {
    /// d1 rounds for both encodings.
    #[default]
    Matched,
    /// d rounds for n=1, ceil(d/2) for n=2.
    HalfDistance,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum ReadingArg {
    #[default]
    NonIdentity,
    IncludeIdentity,
}

#[derive(Parser, Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepcodeArgs {
    /// Ion counts L (odd, comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [5])]
    pub l: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2])]
    pub n: Vec<usize>,
    /// Physical error rates p = 14 ε1 (comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [1e-2])]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = 100000)]
    pub shots: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fixed round count (overrides --rounds-rule).
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long, value_enum, default_value_t = RoundsRule::Matched)]
    pub rounds_rule: RoundsRule,
    #[arg(long, value_enum, default_value_t = DecoderArg::SpaceTime)]
    pub decoder: DecoderArg,
    #[arg(long, value_enum, default_value_t = ReadingArg::NonIdentity)]
    pub reading: ReadingArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum MechanismArg {
    #[default]
    Raman,
    M1,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize, Default)]
#[value(rename_all = "snake_case")]
#[serde(rename_all = "snake_case")]
pub enum MemoryPairsArg {
    #[default]
    All,
    Allowed,
}

#[derive(Parser, Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManifoldArgs {
    /// Level data file (default: ba137_d52.json in the data directory, else the bundled copy).
    #[arg(long)]
    pub level: Option<PathBuf>,
    /// Quantisation field, G.
    #[arg(long, default_value_t = 20.0)]
    pub field: f64,
    /// Field grid lo:hi:steps in G; replaces --field.
    #[arg(long)]
    pub field_sweep: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    #[arg(long, value_enum, default_value_t = MechanismArg::Raman)]
    pub mechanism: MechanismArg,
    /// Rabi frequency per unit matrix element (Hz/m² for Raman, Hz per Bohr magneton for M1).
    #[arg(long, default_value = "1.018e64")]
    pub d: f64,
    /// RMS field noise, μG.
    #[arg(long, default_value_t = 50.0)]
    pub db_rms_ug: f64,
    #[arg(long, default_value_t = 0.5)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    /// Motional frequency, MHz.
    #[arg(long, default_value_t = 1.0)]
    pub motional_mhz: f64,
    /// Rabi frequency at the smallest allowed matrix element, kHz.
    #[arg(long, default_value_t = 10.0)]
    pub threshold_khz: f64,
    #[arg(long, value_enum, default_value_t = MemoryPairsArg::All)]
    pub memory_pairs: MemoryPairsArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

macro_rules! parsed_default {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                <$t>::parse_from(["ionqv"])
            }
        }
    )*};
}

parsed_default!(TablesArgs, XebArgs, BvArgs, RepcodeArgs, ManifoldArgs);

impl Default for CompileArgs {
    fn default() -> Self {
        Self { target: PathBuf::new(), register: PathBuf::new(), out: None, seed: None, layers_max: 4, restarts: 8, sweeps: 400 }
    }
}
