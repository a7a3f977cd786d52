use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "sip", version, about = "Construct, verify and solve shape-invariant potentials")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Output root for data files (overrides SIP_OUT_DIR).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Run every line of FILE as an independent job.
    #[arg(long, value_name = "FILE")]
    pub batch: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// List the catalog families.
    List(ListArgs),
    /// Check shape invariance of a catalog family on a grid.
    Verify(VerifyArgs),
    /// Algebraic spectrum, optionally compared with the numerical oracle.
    Spectrum(SpectrumArgs),
    /// Build W from a seed solution of u'' + K u = 0.
    Construct(ConstructArgs),
    /// 3D prepotential construction from a harmonic Legendre seed.
    #[command(name = "3d")]
    #[serde(rename = "3d")]
    ThreeD(ThreeDArgs),
    /// Radial intertwining and spherical Bessel checks.
    Radial(RadialArgs),
    /// Test candidate parameter translations for shape invariance.
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ListArgs {
    #[arg(long)]
    pub family: Option<String>,
}

/// Family parameters; unset ones take the family's reference values.
#[derive(Debug, Clone, Default, Args, Serialize)]
pub struct ParamArgs {
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub ell: Option<f64>,
    #[arg(long)]
    pub e2: Option<f64>,
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a_big: Option<f64>,
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b_big: Option<f64>,
    #[arg(long = "a")]
    pub a: Option<f64>,
}

impl ParamArgs {
    pub fn given(&self) -> Vec<(&'static str, f64)> {
        [
            ("omega", self.omega),
            ("b", self.b),
            ("ell", self.ell),
            ("e2", self.e2),
            ("A", self.a_big),
            ("B", self.b_big),
            ("a", self.a),
        ]
        .into_iter()
        .filter_map(|(n, v)| v.map(|v| (n, v)))
        .collect()
    }
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct VerifyArgs {
    pub family: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    /// Grid start (defaults to the family's verification interval).
    #[arg(long)]
    pub lo: Option<f64>,
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct SpectrumArgs {
    pub family: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    #[arg(short = 'n', long = "levels", default_value_t = 5)]
    pub levels: usize,
    /// Compare against the finite-difference eigensolver.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 2000)]
    pub oracle_points: usize,
    /// Added to every printed energy.
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
    /// Largest accepted gap deviation from the oracle.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    /// Also export ladder wavefunctions.
    #[arg(long)]
    pub wavefunctions: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ConstructArgs {
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: f64,
    /// linear, sin, cos, sinh, cosh or exp.
    #[arg(long)]
    pub branch: String,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub lambda: f64,
    /// Second-solution term `(C ∫u + D)/u`.
    #[arg(long = "C")]
    #[serde(rename = "C")]
    pub c_coef: Option<f64>,
    #[arg(long = "D")]
    #[serde(rename = "D")]
    pub d_coef: Option<f64>,
    /// Constant term `c/λ`.
    #[arg(long = "c")]
    pub c: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub lo: f64,
    #[arg(long, default_value_t = 3.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ThreeDArgs {
    /// Legendre coefficients, e.g. "a0=2,a1=1,b2=0.5".
    #[arg(long)]
    pub seed: String,
    #[arg(long)]
    pub lambda: f64,
    /// Defaults to lambda - 1.
    #[arg(long)]
    pub mu: Option<f64>,
    /// "r_lo,r_hi,theta_lo,theta_hi".
    #[arg(long, default_value = "0.5,1.5,0.3,2.8")]
    pub region: String,
    #[arg(long, default_value_t = 128)]
    pub nr: usize,
    #[arg(long, default_value_t = 128)]
    pub ntheta: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct RadialArgs {
    #[arg(long)]
    pub ell: usize,
    /// Wave number of the sampled `j_ℓ(k r)`.
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    /// Tabulate the Bessel lowering relation and Wronskian.
    #[arg(long)]
    pub check_bessel: bool,
    #[arg(long, default_value_t = 0.5)]
    pub lo: f64,
    #[arg(long, default_value_t = 10.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct ScanArgs {
    pub family: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,
    /// Parameter increments, e.g. "A=-1" or "A=1,B=0"; repeatable.
    #[arg(long = "candidate", required = true)]
    pub candidates: Vec<String>,
    #[arg(long, default_value_t = 512)]
    pub points: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}
