use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "loopon", version, about = "Loop O(n) model toolkit")]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<String>,

    /// Run manifest path (default: `<out>.manifest.json` when --out is set).
    #[arg(long, global = true)]
    pub manifest: Option<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Exact partition function, optionally with the loop-length law at a vertex.
    Z(ZArgs),
    /// Run an exhaustive check suite.
    Verify(VerifyArgs),
    /// Walk, polygon and pattern-deficient counts as CSV.
    Counts(CountsArgs),
    /// Threshold curve as CSV.
    BoundCurve(CurveArgs),
    /// Face-flip Monte Carlo run.
    Mc(McArgs),
    /// Compare sampled and exact loop-length laws.
    McTv(McTvArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Z(_) => "z",
            Command::Verify(_) => "verify",
            Command::Counts(_) => "counts",
            Command::BoundCurve(_) => "bound-curve",
            Command::Mc(_) => "mc",
            Command::McTv(_) => "mc-tv",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DomainArgs {
    /// `z2`, `z3`, ... or `hex`.
    #[arg(long, default_value = "z2")]
    pub lattice: String,

    /// Box side lengths in vertices, e.g. `4x4`.
    #[arg(long = "box", value_name = "SIDES")]
    pub sides: Option<String>,

    /// Lowest corner of the box (default: the origin).
    #[arg(long)]
    pub corner: Option<String>,

    /// Vertices to delete, e.g. `--remove 1,1 --remove 2,2` or `--remove "1,1;2,2"`.
    #[arg(long)]
    pub remove: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Args, Serialize)]
pub struct ZArgs {
    #[command(flatten)]
    pub domain: DomainArgs,

    #[arg(long)]
    pub lambda: String,

    #[arg(long)]
    pub n: String,

    #[arg(long, value_enum, default_value = "rational")]
    pub mode: Mode,

    /// Also report the law of the loop length at this vertex.
    #[arg(long)]
    pub mark: Option<String>,

    #[arg(long, default_value_t = 40)]
    pub edge_cap: usize,

    /// Ignore size caps.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    StartingPoint,
    Factorization,
    Lemma1,
    BoundPartition,
    QDisjointness,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,

    #[command(flatten)]
    pub domain: DomainArgs,

    /// Parameter pair `lambda:n`; repeatable.
    #[arg(long = "at", value_name = "LAMBDA:N")]
    pub at: Vec<String>,

    #[arg(long, value_enum, default_value = "rational")]
    pub mode: Mode,

    /// Longest polygon checked (starting-point, factorization, q-disjointness).
    #[arg(long)]
    pub max_len: Option<usize>,

    /// Occurrence density for the `ceil(aN)` form of lemma1.
    #[arg(long)]
    pub a: Option<f64>,

    /// Number of disjoint squares for bound-partition.
    #[arg(long, default_value_t = 4)]
    pub k: usize,

    #[arg(long, default_value_t = 40)]
    pub edge_cap: usize,

    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountKind {
    Saw,
    Sap,
    Deficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Object {
    Saw,
    Sap,
}

#[derive(Debug, Args, Serialize)]
pub struct CountsArgs {
    #[arg(long, value_enum)]
    pub kind: CountKind,

    #[arg(long, default_value = "z2")]
    pub lattice: String,

    #[arg(long, default_value_t = 1)]
    pub from: usize,

    #[arg(long)]
    pub to: usize,

    /// Density for the threshold `w = ceil(aN)`.
    #[arg(long, default_value_t = 0.01)]
    pub a: f64,

    /// Fixed threshold, overriding --a.
    #[arg(long)]
    pub w: Option<u64>,

    /// Objects counted by `--kind deficient`.
    #[arg(long, value_enum, default_value = "saw")]
    pub object: Object,

    #[arg(long)]
    pub no_cache: bool,

    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CurveArgs {
    #[arg(long)]
    pub mu: f64,

    #[arg(long)]
    pub mu_prime: f64,

    #[arg(long, default_value_t = 0.01)]
    pub a_prime: f64,

    /// Explicit comma-separated grid of n values.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<f64>,

    /// Uniform grid on [0, n-max] when --n is not given.
    #[arg(long, default_value_t = 1.0)]
    pub n_max: f64,

    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[command(flatten)]
    pub domain: DomainArgs,

    #[arg(long)]
    pub lambda: f64,

    #[arg(long)]
    pub n: f64,

    /// Measured sweeps; accepts forms like `1e6`.
    #[arg(long, default_value = "10000")]
    pub sweeps: String,

    #[arg(long, default_value = "1000")]
    pub burn_in: String,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Vertices whose loop length is recorded (default: the lowest vertex).
    #[arg(long)]
    pub mark: Vec<String>,

    /// Recount every loop after each flip.
    #[arg(long)]
    pub full_recount: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct McTvArgs {
    #[command(flatten)]
    pub domain: DomainArgs,

    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,

    #[arg(long, default_value_t = 1.0)]
    pub n: f64,

    #[arg(long, default_value = "1e6")]
    pub sweeps: String,

    #[arg(long, default_value = "1000")]
    pub burn_in: String,

    #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
    pub seeds: Vec<u64>,

    #[arg(long)]
    pub mark: Option<String>,

    #[arg(long, default_value_t = 0.02)]
    pub tol: f64,
}
