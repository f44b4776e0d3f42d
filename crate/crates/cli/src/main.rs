//! `halasz-lab`: one subcommand per mean-value estimate, each printing a
//! single JSON object (or CSV rows) with a provenance block.

mod commands;
mod config;
mod examples;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use halasz_core::LabError;

#[derive(Parser, Debug)]
#[command(name = "halasz-lab", version, about = "Numerical laboratory for Halász-type mean value theorems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

/// Every flag is global so that one config file can serve every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    /// Multiplicative function, e.g. `moebius`, `d_kappa(2)`, `twist(one,5:1)`.
    #[arg(long, global = true)]
    pub spec: Option<String>,
    #[arg(long, global = true)]
    pub x: Option<f64>,
    #[arg(long, global = true)]
    pub q: Option<u64>,
    #[arg(long, global = true)]
    pub a: Option<u64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub w: Option<f64>,
    #[arg(long, global = true)]
    pub j: Option<usize>,
    #[arg(long, global = true)]
    pub y: Option<f64>,
    #[arg(long, global = true)]
    pub z: Option<f64>,
    /// Truncation point of the Euler products (default min(x, 10⁷)).
    #[arg(long, global = true)]
    pub pmax: Option<u64>,
    /// Point budget of the t-grid maximization.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Sieve limit N; must cover P_max and every argument.
    #[arg(long, global = true)]
    pub limit: Option<u64>,
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    pub format: Option<String>,
    /// Seed substituted into a bare `random_pm1`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// key=value file; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// `simple` or `integral`.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub windows: Option<usize>,
    #[arg(long, global = true)]
    pub cap: Option<u64>,
    /// Scan every modulus up to this value.
    #[arg(long, global = true)]
    pub qmax: Option<u64>,
    /// Comma-separated scales.
    #[arg(long, global = true)]
    pub xs: Option<String>,
    /// Comma-separated heights (truncation heights or evaluation points).
    #[arg(long, global = true)]
    pub t: Option<String>,
    /// Comma-separated abscissa shifts for `repulsion`.
    #[arg(long, global = true)]
    pub deltas: Option<String>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Character as `q:e1,e2,…`, `q:principal` or `quadratic:k`.
    #[arg(long, global = true)]
    pub character: Option<String>,
    /// Weight family for `meansquare`: inv-n, one, inv-sqrt.
    #[arg(long, global = true)]
    pub weights: Option<String>,
    /// Comma-separated β values for `selberg-delange`.
    #[arg(long, global = true)]
    pub betas: Option<String>,
    /// Abscissa of the s-line for `lemma22`.
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Length of the Dirichlet series in `lemma22`.
    #[arg(long, global = true)]
    pub nmax: Option<u64>,
    /// Cut-off A of the shift integrals in `lemma22`.
    #[arg(long, global = true)]
    pub shift_cutoff: Option<f64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Σ_{n≤x} f(n).
    Meanvalue,
    /// Σ_{n≤x} f(n) against the Halász bound.
    Halasz,
    /// Sum over (x, x + x^{1−δ}] against its bound.
    ShortInterval,
    /// Sum over n ≡ a (mod q) against its bound.
    Ap,
    /// Variation of the renormalised mean between x/w and x.
    Lipschitz,
    /// The three exceptional character sets.
    ExceptionalSets,
    /// Pretentious large sieve.
    Pls,
    /// Σ Λ(n) over consecutive windows of length x^{1−δ}.
    Hoheisel,
    /// ψ(x, χ) for one or every character modulo q.
    PsiChi,
    /// The exceptional-character condition for real characters modulo q.
    ExceptionalCondition,
    /// Least primes in reduced classes.
    Linnik,
    /// Friedlander–Iwaniec main term for π(x; q, a).
    FiEstimate,
    /// Numerical checks of the convolution identities.
    PerronVerify {
        #[command(subcommand)]
        which: PerronWhich,
    },
    /// Σ log|F| at well-spaced points against its repulsion bound.
    Repulsion,
    /// The worked examples.
    Examples {
        #[command(subcommand)]
        which: ExampleWhich,
    },
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum PerronWhich {
    /// Shifted log-derivative identity.
    #[command(name = "lemma22")]
    Shifted,
    /// Small/large-prime split identity.
    #[command(name = "prop21")]
    Split,
    Meansquare,
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum ExampleWhich {
    SelbergDelange,
    SignCos,
    GPlus,
}

fn exit_code(err: &LabError) -> u8 {
    if err.is_resource() {
        3
    } else {
        2
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("HALASZ_LAB_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let argv = match config::merged_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match commands::run(&cli).and_then(|out| output::render(&cli, out)) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
