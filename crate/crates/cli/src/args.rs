use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "ptmetric", version, about = "Metric, observables and classical limit for a PT-symmetric imaginary step")]
pub struct Cli {
    /// TOML file with defaults for any flag; flags on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub params: ParamArgs,

    /// Seed for randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

/// Physical parameters; defaults are m = 1/2, hbar = 1, L = 2, zeta = 1/3.
#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct ParamArgs {
    #[arg(long, global = true, default_value_t = 0.5)]
    pub m: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long = "l", global = true, default_value_t = 2.0)]
    pub l: f64,
    #[arg(long, global = true, default_value_t = 1.0 / 3.0)]
    pub zeta: f64,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// O(Z) kernel coefficients at a point or on a grid.
    Kernel(KernelArgs),
    /// Table of the moment functions and the coefficients of h2.
    Coeffs(CoeffsArgs),
    /// Classical limit of the equivalent Hermitian Hamiltonian.
    Classical {
        #[command(subcommand)]
        command: ClassicalCommand,
    },
    /// Crank-Nicolson wave-packet run with L2 and eta norms.
    Evolve(EvolveArgs),
    /// Localized state rho^-1 |y> (regular part) on a grid.
    Localized(LocalizedArgs),
    /// Physical probability density of a sampled state.
    Density(DensityArgs),
    /// Spectral-integral oracle against the closed-form metric.
    SpectralCheck(SpectralArgs),
    /// Data for one of the figures 1-6.
    Figures(FigureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum KernelKind {
    Eta1,
    #[value(alias = "X")]
    X,
    #[value(alias = "P")]
    P,
    Xi,
    H2,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Eta1 => "eta1",
            KernelKind::X => "X",
            KernelKind::P => "P",
            KernelKind::Xi => "xi",
            KernelKind::H2 => "h2",
        }
    }
}

/// `a,b,n`: `n` uniform points on `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl FromStr for GridSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected a,b,n, got '{s}'"));
        }
        let f = |v: &str| v.parse::<f64>().map_err(|e| format!("'{v}': {e}"));
        let n = parts[2].parse::<usize>().map_err(|e| format!("'{}': {e}", parts[2]))?;
        Ok(GridSpec { a: f(parts[0])?, b: f(parts[1])?, n })
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.n)
    }
}

/// `x0,p0,sigma`
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PacketSpec {
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
}

impl FromStr for PacketSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [x0, p0, sigma] => Ok(PacketSpec { x0, p0, sigma }),
            _ => Err(format!("expected x0,p0,sigma, got '{s}'")),
        }
    }
}

impl std::fmt::Display for PacketSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{},{}", self.x0, self.p0, self.sigma)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct KernelArgs {
    #[arg(value_enum)]
    pub kind: KernelKind,
    /// Single point; prints the value instead of writing a table.
    #[arg(long, requires = "y", conflicts_with = "grid", allow_hyphen_values = true)]
    pub x: Option<f64>,
    #[arg(long, requires = "x", allow_hyphen_values = true)]
    pub y: Option<f64>,
    /// Square grid `a,b,n` in both x and y.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,
    /// Physical units and coordinates (X, P and xi only).
    #[arg(long)]
    pub physical: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ExpansionArg {
    Origin,
    Centered,
}

#[derive(Debug, Args, Serialize)]
pub struct CoeffsArgs {
    /// Dimensionless sample points `a,b,n`.
    #[arg(long, default_value = "-4,4,801", allow_hyphen_values = true)]
    pub grid: GridSpec,
    #[arg(long, value_enum, default_value_t = ExpansionArg::Origin)]
    pub expansion: ExpansionArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum ClassicalCommand {
    /// Phase portrait from the default set of initial conditions.
    Portrait(PortraitArgs),
    /// Effective mass and potential on a grid.
    Meff(MeffArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct PortraitArgs {
    #[arg(long, default_value_t = 5e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    /// Keep every n-th step.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
    /// Highest power p^(2n) kept in the Hamiltonian (0..=2).
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MeffArgs {
    #[arg(long, default_value_t = 5.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 1001)]
    pub n: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvolveArgs {
    /// Dimensionless packet `x0,p0,sigma`.
    #[arg(long, default_value = "-10,2,2", allow_hyphen_values = true)]
    pub packet: PacketSpec,
    /// Coupling Z; taken from the physical parameters when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<f64>,
    #[arg(long, default_value_t = 5e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 8.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 40)]
    pub half_width: usize,
    #[arg(long, default_value_t = 20)]
    pub per_unit: usize,
    #[arg(long, default_value_t = 20)]
    pub log_every: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LocalizedArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub center: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<f64>,
    #[arg(long, default_value = "-6,6,1201", allow_hyphen_values = true)]
    pub grid: GridSpec,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DensityArgs {
    /// CSV with header and columns x, re, im on a uniform grid.
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectralArgs {
    #[arg(long, default_value_t = 32)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FigureArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=6))]
    pub fig: u8,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
