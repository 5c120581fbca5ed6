use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "periodlab", version, about = "Iterated period integrals of cusp forms and their cocycle identities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Completed multiple L-value Λ(a; s_1, …, s_r)
    Lvalue(LvalueArgs),
    /// Run one identity checker
    Check(CheckArgs),
    /// Run the acceptance matrix (or a manifest) and write a CSV summary
    Suite(SuiteArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Identity {
    Cocycle1,
    Cocycle2,
    Cocycle3,
    Bkm,
    Fin0,
    Lincomb,
    Mellin,
    Route,
}

impl Identity {
    pub fn name(self) -> &'static str {
        match self {
            Identity::Cocycle1 => "cocycle1",
            Identity::Cocycle2 => "cocycle2",
            Identity::Cocycle3 => "cocycle3",
            Identity::Bkm => "bkm",
            Identity::Fin0 => "fin0",
            Identity::Lincomb => "lincomb",
            Identity::Mellin => "mellin",
            Identity::Route => "route",
        }
    }
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Poly,
    Samples,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// write here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// record wall-clock seconds (output is then no longer reproducible byte for byte)
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug)]
pub struct LvalueArgs {
    /// comma-separated form specs: delta, theta:<j>:<N>, file:<path>, zero
    #[arg(long = "forms", visible_alias = "form", value_delimiter = ',', required = true)]
    pub forms: Vec<String>,
    /// rational basepoint p/q
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub basepoint: String,
    /// one positive integer per form
    #[arg(long, value_delimiter = ',', required = true)]
    pub s: Vec<i64>,
    #[arg(long, env = "PERIODLAB_DIGITS")]
    pub digits: Option<u32>,
    #[arg(long)]
    pub quad_level: Option<u32>,
    /// also sum the twisted Dirichlet series up to this exponent
    #[arg(long)]
    pub n_terms: Option<f64>,
    #[command(flatten)]
    pub out: Output,
}

/// Settings of one checker run; also the entry type of suite manifests.
#[derive(Args, Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckOpts {
    /// comma-separated form specs; defaults to delta repeated to the identity's depth
    #[arg(long = "forms", visible_alias = "form", value_delimiter = ',')]
    pub forms: Vec<String>,
    /// level N of the group Γ₀(N) the words are drawn from; defaults to the forms' level
    #[arg(long)]
    pub level: Option<i64>,
    /// number of random pairs (or single elements for bkm, fin0, route)
    #[arg(long, default_value_t = 5)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, env = "PERIODLAB_DIGITS")]
    pub digits: Option<u32>,
    #[arg(long)]
    pub quad_level: Option<u32>,
    /// maximal word length in the generators
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    /// sample point in the lower half-plane, e.g. -0.2-1.1i; repeatable
    #[arg(long = "tau", allow_hyphen_values = true)]
    pub taus: Vec<String>,
    /// multiply one side of every identity by 1 + perturb
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub basepoint: Option<String>,
    /// powers k in γ₂ = γ₁^k for the lincomb specialisations
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2])]
    pub ks: Vec<i64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// depth >= 3: print how far σ_j is from −r(γ⁻¹)∘γ (informational)
    #[arg(long)]
    pub compare_sigma: bool,
}

impl Default for CheckOpts {
    fn default() -> Self {
        CheckOpts {
            forms: Vec::new(),
            level: None,
            pairs: 5,
            seed: 1,
            digits: None,
            quad_level: None,
            max_len: 6,
            taus: Vec::new(),
            perturb: 0.0,
            tolerance: None,
            s: Vec::new(),
            basepoint: None,
            ks: vec![1, 2],
            mode: None,
            compare_sigma: false,
        }
    }
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(value_enum)]
    pub identity: Identity,
    #[command(flatten)]
    pub opts: CheckOpts,
    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug)]
pub struct SuiteArgs {
    /// precision ceiling; rows pinned above it are reported as skipped
    #[arg(long, env = "PERIODLAB_DIGITS", default_value_t = 40)]
    pub digits: u32,
    /// overrides the seed of every row
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON list of rows ({"id", "identity", and any check option}) replacing the built-in matrix
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// run only the rows with these ids
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    /// applied to every row
    #[arg(long, default_value_t = 0.0)]
    pub perturb: f64,
    /// directory for one JSON report file per row
    #[arg(long)]
    pub json_dir: Option<PathBuf>,
    /// print the rows and exit
    #[arg(long)]
    pub list: bool,
    /// write the CSV summary here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}
