use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "quasilab", version, about = "Quasicrystals, bounded remainder sets and Riesz-bound diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Algebra declaration file (default: w1 = sqrt 2).
    #[arg(long)]
    pub algebra: Option<PathBuf>,
    /// Write the main artifact here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Cut-and-project set Λ(Γ, I) of the special lattice with data α, β.
    Gen {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        /// Window literal, e.g. "(-1,0]" or "[0,w1-1)".
        #[arg(long, allow_hyphen_values = true)]
        window: String,
        /// Lattice coordinates m range over [-R, R]^d.
        #[arg(long)]
        range: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Dual model set Λ* for n in [-R, R].
    Dual {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        /// Region file or window literal.
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[arg(long)]
        range: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Periodic set {n : ⟨n,α⟩ ∈ I mod 1}, or its dual {m : −mα ∈ S} with --set.
    Periodic {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "set", required_unless_present = "set")]
        window: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        set: Option<String>,
        #[arg(long)]
        range: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Discrepancy trace D_n(S, x0).
    Disc {
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// Trace runs over [0, N], or [-N, N] with --two-sided.
        #[arg(long)]
        n: i64,
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        #[arg(long)]
        two_sided: bool,
        /// Add a BMO statistic over dyadic windows up to this length.
        #[arg(long)]
        bmo_max: Option<usize>,
        /// Write Dn.dat and its descriptor here.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical BRS statistic and/or certificate verification.
    BrsTest {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "cert")]
        set: Option<String>,
        #[arg(long, allow_hyphen_values = true, required_unless_present = "cert")]
        alpha: Option<String>,
        #[arg(long, default_value_t = 100_000)]
        n: i64,
        #[arg(long, default_value_t = 10_000)]
        j: i64,
        /// Equidecomposition certificate file.
        #[arg(long)]
        cert: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Build a BRS: edges "n:m1,m2" (repeat), a measure γ, or γ with --inner and --outer.
    BrsMake {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        #[arg(long = "edge", allow_hyphen_values = true)]
        edges: Vec<String>,
        #[arg(long, default_value_t = 4)]
        bound: i64,
        #[arg(long, allow_hyphen_values = true, requires = "outer")]
        inner: Option<String>,
        #[arg(long, allow_hyphen_values = true, requires = "inner")]
        outer: Option<String>,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 2000)]
        max_n: i64,
        #[arg(long, default_value_t = 6)]
        refinements: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Block enumeration λ_j of Λ* with δ_j.
    Enum {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[arg(long)]
        range: i64,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        s0: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Avdonin's averaged condition on the enumerated Λ*.
    Avdonin {
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        /// |I| (default: mes S).
        #[arg(long, allow_hyphen_values = true)]
        length: Option<String>,
        #[arg(long, default_value_t = 128)]
        n_max: usize,
        #[arg(long, default_value_t = 1000)]
        k_max: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Gram matrix of a point set on a region and its extreme eigenvalues.
    Gram {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        /// Also write the matrix as `j,k,re,im` rows.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Extreme eigenvalues of nested sections over increasing radii.
    Bounds {
        #[arg(long)]
        points: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        /// Comma-separated radii.
        #[arg(long)]
        radii: String,
        /// Write lmin.dat and its descriptor here.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Primal and dual traces with Avdonin's condition.
    Duality {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full experiment from a config file into its output directory.
    Report {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the output directory of the config.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}
