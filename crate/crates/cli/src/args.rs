use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "witnesskit",
    version,
    about = "Entanglement witnesses and Hilbert-Schmidt measures for bipartite qudits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form measure and GBI violation of isotropic states over an alpha grid.
    IsoSweep {
        #[arg(long)]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: AlphaSpec,
        /// Also project numerically onto the separable set.
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Test whether the isotropic state at `guess-alpha` is nearest to the target.
    WitnessCheck {
        #[arg(long)]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: AlphaSpec,
        /// Defaults to the separability boundary 1/(d+1).
        #[arg(long, allow_hyphen_values = true)]
        guess_alpha: Option<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Numeric distance to the separable set for an isotropic state or a JSON state file.
    Measure {
        #[arg(long, required_unless_present = "state")]
        d: Option<usize>,
        #[arg(
            long,
            required_unless_present = "state",
            conflicts_with = "state",
            allow_hyphen_values = true
        )]
        alpha: Option<AlphaSpec>,
        #[arg(long)]
        state: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Numeric measure D against the GBI violation B of the witness it induces.
    Bnt {
        #[arg(long)]
        d: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: AlphaSpec,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Signs c_i of the generator expansion of the maximally entangled projector.
    GammaSigns {
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Maximal CHSH value of two-qubit isotropic states.
    ChshScan {
        #[arg(long, allow_hyphen_values = true)]
        alpha: AlphaSpec,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub n_starts: Option<usize>,
    /// Iteration cap for each alternating-minimization start.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Iteration cap for the projection onto the separable set.
    #[arg(long)]
    pub max_outer_iters: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol_gap: Option<f64>,
    #[arg(long, env = "WITNESSKIT_SEED")]
    pub seed: Option<u64>,
    /// JSON solver config {n_starts, max_iters, tol_conv, seed}; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// A single alpha or an inclusive grid `start:end:step`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaSpec(pub Vec<f64>);

impl FromStr for AlphaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("invalid number '{t}'"))
        };
        match parts.as_slice() {
            [x] => Ok(AlphaSpec(vec![num(x)?])),
            [a, b, h] => grid(num(a)?, num(b)?, num(h)?).map(AlphaSpec),
            _ => Err("expected ALPHA or START:END:STEP".into()),
        }
    }
}

/// Points `start + k step` up to `end`; a last point within half a step of
/// `end` is replaced by `end` itself.
pub fn grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>, String> {
    if step.is_nan() || step <= 0.0 {
        return Err("step must be positive".into());
    }
    if end < start {
        return Err("end must not be below start".into());
    }
    let n = ((end - start) / step + 0.5).floor() as usize;
    let mut pts: Vec<f64> = (0..=n).map(|k| start + k as f64 * step).collect();
    if let Some(last) = pts.last_mut() {
        if *last > end || end - *last <= 0.5 * step {
            *last = end;
        }
    }
    Ok(pts)
}
