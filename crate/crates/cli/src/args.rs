use crate::{input_err, CliError};
use antmine::evolve::{ControllerKind, EvolutionConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "antmine", version, about = "Evolve and study neural-tissue controllers for robot teams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a full evolution and write its log, champion and manifest.
    Evolve {
        #[command(flatten)]
        config: ConfigArgs,
        /// Floor partition count (1, 4 or 16).
        #[arg(long)]
        partitions: Option<u32>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate a genome, print its mean fitness and write replay traces.
    Eval {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        genome: PathBuf,
        #[arg(long)]
        partitions: Option<u32>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evaluate a genome at several team sizes with fixed resources.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        genome: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        counts: Vec<u32>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Classify a directory of replay traces for bucket-brigade transport.
    Brigade {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long, default_value_t = antmine::experiments::BRIGADE_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evolve with the light beacon on and off at several time budgets.
    Beacon {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',', default_value = "60,300")]
        budgets: Vec<u32>,
        /// Number of evolution runs per setting.
        #[arg(long, default_value_t = 5)]
        seeds: u32,
        #[arg(long, default_value_t = 30)]
        test_episodes: u32,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Evolve at several floor-partition settings with equal budgets.
    Partition {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,4,16")]
        partitions: Vec<u32>,
        #[arg(long, default_value_t = 5)]
        seeds: u32,
        #[arg(long, default_value_t = 30)]
        test_episodes: u32,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Basis,
    Primitive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Ant,
    Fc,
    Pc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

/// Options shared by every command that builds an [`EvolutionConfig`].
/// Flags override values from the config file.
#[derive(Args, Debug)]
pub struct ConfigArgs {
    /// JSON evolution config; unknown keys are rejected.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evaluation threads; never changes any output.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub controller: Option<Family>,
    #[arg(long)]
    pub robots: Option<u32>,
    #[arg(long, value_enum)]
    pub beacon: Option<OnOff>,
    #[arg(long)]
    pub generations: Option<u32>,
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub episodes: Option<u32>,
    #[arg(long)]
    pub timesteps: Option<u32>,
}

pub fn load_config(path: &Path) -> Result<EvolutionConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| input_err(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_err(format!("config {}: {e}", path.display())))
}

impl ConfigArgs {
    pub fn workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }

    /// Config file (or defaults) with command-line overrides applied.
    pub fn resolve(&self, partitions: Option<u32>) -> Result<EvolutionConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => load_config(path)?,
            None => EvolutionConfig::default(),
        };
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        let (family, mode) = match c.controller {
            ControllerKind::AntBasis => (Family::Ant, Mode::Basis),
            ControllerKind::AntPrimitive => (Family::Ant, Mode::Primitive),
            ControllerKind::Fc => (Family::Fc, Mode::Basis),
            ControllerKind::Pc => (Family::Pc, Mode::Basis),
        };
        c.controller = match (self.controller.unwrap_or(family), self.mode.unwrap_or(mode)) {
            (Family::Ant, Mode::Basis) => ControllerKind::AntBasis,
            (Family::Ant, Mode::Primitive) => ControllerKind::AntPrimitive,
            (Family::Fc, Mode::Basis) => ControllerKind::Fc,
            (Family::Pc, Mode::Basis) => ControllerKind::Pc,
            (_, Mode::Primitive) => {
                return Err(CliError::Input("mode: fixed-topology controllers support only the basis repertoire".into()))
            }
        };
        if let Some(n) = self.robots {
            c.world.robot_count = n;
        }
        if let Some(b) = self.beacon {
            c.world.beacon_enabled = b == OnOff::On;
        }
        if let Some(p) = partitions {
            c.world.partition_count = p;
        }
        if let Some(g) = self.generations {
            c.generations = g;
        }
        if let Some(p) = self.pop {
            c.population = p;
        }
        if let Some(e) = self.episodes {
            c.episodes = e;
        }
        if let Some(t) = self.timesteps {
            c.world.max_timesteps = t;
        }
        Ok(c)
    }
}
