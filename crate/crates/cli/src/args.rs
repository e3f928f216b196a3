use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "mclass", version, about = "Classify positive functions by their polynomial order at infinity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Class label with order and index estimates.
    Classify(ClassifyArgs),
    /// Classification plus the condition suite for the class.
    Report(ReportArgs),
    /// Block-maxima simulation for a distribution tail.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Catalog function name.
    #[arg(long = "fn", value_name = "NAME")]
    pub name: Option<String>,
    /// CSV table with header `x,value` or `x,logvalue`.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Function parameter, repeatable.
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// log10 of the smallest grid abscissa.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub xmin: f64,
    /// log10 of the largest grid abscissa.
    #[arg(long, default_value_t = 8.0, allow_negative_numbers = true)]
    pub xmax: f64,
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Directory for plot-data CSV files.
    #[arg(long, value_name = "DIR")]
    pub plots: Option<PathBuf>,
    /// JSON output (the default and only format).
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Karamata exponent, repeatable.
    #[arg(long = "r", allow_negative_numbers = true)]
    pub r: Vec<f64>,
    /// Base point of representations and integrals.
    #[arg(long, default_value_t = 2.0)]
    pub b: f64,
    /// Also run the Laplace–Stieltjes index check.
    #[arg(long)]
    pub tauberian: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Block size, repeatable.
    #[arg(long = "n")]
    pub n: Vec<u64>,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Compare maxima along n = 2^k and n = 3·2^k.
    #[arg(long)]
    pub subsequences: bool,
}

pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected K=V, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    if k.trim().is_empty() {
        return Err("empty parameter name".into());
    }
    Ok((k.trim().to_string(), v))
}

