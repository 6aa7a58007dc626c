use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dimerlab::experiments::Campaign;
use dimerlab::Point;
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "dimerlab", version, about = "Numerics for the two-periodic Aztec diamond")]
pub struct Cli {
    /// Directory receiving outputs and the run manifest.
    #[arg(long, global = true, env = "DIMERLAB_OUT", default_value = "results")]
    pub out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Graph construction.
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
    /// Exact random tilings by domino shuffling.
    Sample(SampleArgs),
    /// Heights, squished components and the last path of one sample.
    Geometry {
        #[command(subcommand)]
        action: GeometryAction,
    },
    /// Dense inverse of the Kasteleyn matrix.
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
    /// Inverse Kasteleyn entries from the contour formulas.
    Kernel {
        #[command(subcommand)]
        action: KernelAction,
    },
    /// Extended Airy kernel and Airy process distributions.
    Airy {
        #[command(subcommand)]
        action: AiryAction,
    },
    /// The discrete Bessel kernel and its finite-order approximation.
    Bessel(BesselArgs),
    /// Run a verification campaign.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Lattice { .. } => "lattice dump".into(),
            Command::Sample(_) => "sample".into(),
            Command::Geometry { .. } => "geometry analyze".into(),
            Command::Oracle { .. } => "oracle kinv".into(),
            Command::Kernel { action } => match action {
                KernelAction::Entry(_) => "kernel entry".into(),
                KernelAction::Window(_) => "kernel window".into(),
            },
            Command::Airy { action } => match action {
                AiryAction::Fdd(_) => "airy fdd".into(),
                AiryAction::Kernel(_) => "airy kernel".into(),
            },
            Command::Bessel(_) => "bessel".into(),
            Command::Verify(v) => format!("verify {}", v.campaign),
        }
    }
}

#[derive(Debug, Args, Serialize, Clone, Copy)]
pub struct ModelArgs {
    /// Order of the diamond, a multiple of 4.
    #[arg(long)]
    pub n: usize,
    /// Weight of edges around a-faces.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Weight of edges around b-faces.
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum LatticeAction {
    /// Write vertices and edges as JSON.
    Dump(ModelArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum GeometryAction {
    Analyze(GeometryArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GeometryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Use `a = n^(gamma - 1)` and also report the scaling window.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub stream: u64,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum OracleAction {
    /// Write every entry of the inverse as CSV.
    Kinv(KinvArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct KinvArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Largest order accepted.
    #[arg(long, default_value_t = 16)]
    pub cap: usize,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum KernelAction {
    /// One entry `K^-1(white, black)` and its decomposition.
    Entry(EntryArgs),
    /// The rescaled entry at two window points against its Airy limit.
    Window(WindowArgs),
}

pub fn parse_point(s: &str) -> Result<Point, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [x, y] => Ok(Point::new(
            x.trim().parse().map_err(|e| format!("{x}: {e}"))?,
            y.trim().parse().map_err(|e| format!("{y}: {e}"))?,
        )),
        _ => Err(format!("expected 'x1,x2', got '{s}'")),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct EntryArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// White vertex as `x1,x2`.
    #[arg(long, value_parser = parse_point)]
    pub white: Point,
    /// Black vertex as `x1,x2`.
    #[arg(long, value_parser = parse_point)]
    pub black: Point,
}

#[derive(Debug, Args, Serialize)]
pub struct WindowArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.3)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha_i: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta_i: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha_j: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta_j: f64,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum AiryAction {
    /// `P(A(t_1) <= xi_1, ..., A(t_k) <= xi_k)`.
    Fdd(FddArgs),
    /// One value of the extended Airy kernel.
    Kernel(AiryKernelArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct FddArgs {
    /// Strictly increasing times, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub times: Vec<f64>,
    /// One level per time.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub levels: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct AiryKernelArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub t2: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub y: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct BesselArgs {
    /// Even offset of the black vertex.
    #[arg(long, allow_negative_numbers = true)]
    pub p: i64,
    /// Even offset of the white vertex.
    #[arg(long, allow_negative_numbers = true)]
    pub q: i64,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Also evaluate the finite-order quantity at this order.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Campaign name, e.g. kernel-convergence.
    #[arg(value_parser = parse_campaign)]
    pub campaign: Campaign,
    /// JSON configuration; the preset is used when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn parse_campaign(s: &str) -> Result<Campaign, String> {
    s.parse::<Campaign>().map_err(|_| {
        let names: Vec<&str> = Campaign::ALL.iter().map(|c| c.name()).collect();
        format!("unknown campaign '{s}' (expected one of {})", names.join(", "))
    })
}
