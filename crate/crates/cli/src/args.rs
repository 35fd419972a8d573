use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "varifold-lab", version, about = "Discrete integral 2-varifold toolkit")]
pub struct Cli {
    /// Run every library call on one thread (bit-reproducible output).
    #[arg(long, global = true)]
    pub serial: bool,

    /// Tolerance set used for pass/fail checks.
    #[arg(long, global = true, value_enum, default_value_t = Profile::Default)]
    pub tolerance_profile: Profile,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Strict,
    Default,
    Coarse,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write an example surface as mesh JSON with its analytic block.
    Generate {
        #[command(subcommand)]
        generator: Generator,
    },
    /// Run the requested analyses on a mesh and write a report.
    Analyze(AnalyzeArgs),
    /// Geodesic nets on the unit sphere.
    Net {
        #[command(subcommand)]
        command: NetCommand,
    },
    /// Boundary circle integrals and admissibility.
    Boundary {
        #[command(subcommand)]
        command: BoundaryCommand,
    },
    /// Energy, topology, Li–Yau and every analytic density point of a mesh.
    Report {
        mesh: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct Level {
    #[arg(long, default_value_t = 4)]
    pub level: usize,
}

#[derive(Subcommand, Debug)]
pub enum Generator {
    Sphere {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: PathBuf,
    },
    Cap {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long)]
        theta: f64,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: PathBuf,
    },
    DoubleBubble {
        #[arg(long)]
        theta2: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Equal-volume double bubble with a flat separating disk.
    DoubleBubbleFlat {
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: PathBuf,
    },
    TripleBubble {
        #[arg(long, default_value_t = 5)]
        level: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    BranchedPatch {
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        rho0: f64,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Two graph sheets touching on a union of disks.
    SingularPair {
        /// Disk as x,y:r; repeat for several disks.
        #[arg(long = "disk", required = true)]
        disks: Vec<String>,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: PathBuf,
    },
    FlatDisk {
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: PathBuf,
    },
    Torus {
        #[arg(long, default_value_t = 2.0)]
        major: f64,
        #[arg(long, default_value_t = 0.5)]
        minor: f64,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: PathBuf,
    },
    Cylinder {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 2.0)]
        height: f64,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Mesh JSON (optionally with an analytic block) or OBJ file.
    pub mesh: PathBuf,
    #[arg(long)]
    pub energy: bool,
    /// Density at x,y,z; repeatable.
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    pub density: Vec<String>,
    /// Spherical link at x,y,z with radius r; repeatable.
    #[arg(long, value_name = "X,Y,Z:R", allow_hyphen_values = true)]
    pub link: Vec<String>,
    #[arg(long)]
    pub topology: bool,
    #[arg(long)]
    pub liyau: bool,
    /// Helfrich energy with spontaneous curvature c0; repeatable.
    #[arg(long, value_name = "C0", allow_hyphen_values = true)]
    pub helfrich: Vec<f64>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum NetCommand {
    /// Print the ten-entry catalogue of stationary nets.
    Catalogue {
        #[arg(long)]
        json: bool,
    },
    /// Relax a net JSON to a balanced net with the same combinatorics.
    Relax {
        net: PathBuf,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Classify a link JSON (anything with a total_length field).
    Match { link: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum BoundaryCommand {
    /// Conormal integral of a circle datum at a point.
    CircleIntegral {
        datum: PathBuf,
        #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
        point: String,
        /// Also evaluate by trapezoid quadrature with this many samples.
        #[arg(long)]
        quad: Option<usize>,
    },
    /// Supremum of the conormal integral over x₀.
    Sup {
        datum: PathBuf,
        #[arg(long, default_value_t = 41)]
        grid: usize,
    },
    /// P + 2·sup against 6π or 8π.
    Admissible {
        datum: PathBuf,
        #[arg(long = "p")]
        p_estimate: f64,
        #[arg(long, value_enum, default_value_t = ThresholdArg::SixPi)]
        threshold: ThresholdArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ThresholdArg {
    #[value(name = "6pi")]
    SixPi,
    #[value(name = "8pi")]
    EightPi,
}
