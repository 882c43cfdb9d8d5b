use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Overrides;

#[derive(Debug, Parser)]
#[command(
    name = "finsler",
    version,
    about = "Tensors, geodesics and homogeneous geodesic search on homogeneous Finsler spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Built-in space (see `finsler spaces`).
    #[arg(long, global = true, conflicts_with = "config")]
    pub space: Option<String>,

    /// TOML space-spec file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Number of sphere samples.
    #[arg(long, global = true)]
    pub samples: Option<usize>,

    /// Integrator step.
    #[arg(long, global = true)]
    pub step: Option<f64>,

    /// Tolerance override `name=value`; a bare value sets t_residual. Repeatable.
    #[arg(long, global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

impl Common {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            samples: self.samples,
            step: self.step,
            seed: self.seed,
            tol: self.tol.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// List the built-in spaces.
    Spaces {
        #[arg(long)]
        dim: Option<usize>,
        /// Keep spaces whose name, family, metric or theorem branch contains this.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Fundamental, Cartan, Christoffel, nonlinear and Chern coefficients at (x, y).
    Tensors {
        /// Base point, comma separated; defaults to the origin.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        y: Vec<f64>,
    },
    /// Integrate the geodesic with initial data (x, y).
    Geodesic {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        y: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
    },
    /// Search the unit sphere for geodesic vectors.
    Search,
    /// Certify a single direction.
    Verify {
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        vector: Vec<f64>,
    },
    /// Sample the sphere field.
    SphereField,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spaces { .. } => "spaces",
            Command::Tensors { .. } => "tensors",
            Command::Geodesic { .. } => "geodesic",
            Command::Search => "search",
            Command::Verify { .. } => "verify",
            Command::SphereField => "sphere-field",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Geodesic { .. } | Command::SphereField => Format::Csv,
            _ => Format::Json,
        }
    }
}
