//! Command-line parsing. A `--config` file supplies defaults for any flag of
//! the chosen subcommand; flags given on the command line win.

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use mrf_core::simgen::{SpaceKind, DEFAULT_TEST_SIZE};
use mrf_core::{ForestConfig, SplitRule};

use crate::grid::GridConfig;

#[derive(Debug, Parser)]
#[command(name = "mrf-bench", version, about = "Metric random forest experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    /// TOML file whose keys mirror the long flags (`n = [50, 100]`,
    /// `methods = ["medoid", "two_means"]`, `n_test = 100`, ...).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit and score every method on every grid cell; write one CSV row each.
    Run(RunArgs),
    /// Write the grid's datasets as text dumps, one file per replicate.
    Datagen(DatagenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub space: SpaceKind,
    /// Training sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    pub n: Vec<usize>,
    /// Covariate dimensions.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub d: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TEST_SIZE)]
    pub n_test: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Split rules: medoid, exact_frechet, two_means.
    #[arg(long, value_delimiter = ',', default_value = "medoid,two_means")]
    pub methods: Vec<SplitRule>,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    /// Minimum leaf size.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Minimum child fraction of a split.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Subsample fraction per tree.
    #[arg(long, default_value_t = 0.5)]
    pub subsample: f64,
    /// Features tried per node (default: all).
    #[arg(long)]
    pub mtry: Option<usize>,
    /// Grow trees on the whole subsample instead of honest halves.
    #[arg(long)]
    pub no_honesty: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = "results.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct DatagenArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "datasets")]
    pub out_dir: PathBuf,
}

impl RunArgs {
    pub fn grid_config(&self) -> GridConfig {
        GridConfig {
            methods: self.methods.clone(),
            forest: ForestConfig {
                n_trees: self.trees,
                subsample_fraction: self.subsample,
                honesty: !self.no_honesty,
                min_leaf: self.k,
                balance_alpha: self.alpha,
                mtry: self.mtry,
                ..ForestConfig::default()
            },
            ..self.grid.base()
        }
    }
}

impl GridArgs {
    fn base(&self) -> GridConfig {
        GridConfig {
            n: self.n.clone(),
            d: self.d.clone(),
            reps: self.reps,
            seed: self.seed,
            n_test: self.n_test,
            ..GridConfig::new(self.space)
        }
    }
}

impl DatagenArgs {
    pub fn grid_config(&self) -> GridConfig {
        self.grid.base()
    }
}

/// Flags for one config-file entry.
fn flags_for(key: &str, value: &toml::Value) -> anyhow::Result<Vec<String>> {
    let flag = format!("--{}", key.replace('_', "-"));
    let scalar = |v: &toml::Value| -> anyhow::Result<String> {
        Ok(match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            other => bail!("unsupported value for `{key}`: {other}"),
        })
    };
    Ok(match value {
        toml::Value::Boolean(true) => vec![flag],
        toml::Value::Boolean(false) => vec![],
        toml::Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<anyhow::Result<Vec<_>>>()?;
            vec![flag, parts.join(",")]
        }
        v => vec![flag, scalar(v)?],
    })
}

/// Reads the config file and splices its flags in front of the
/// subcommand's own arguments, so that explicit flags override them.
pub fn expand_config(args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let mut config = None;
    let mut command_at = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            config = args.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(path) = a.strip_prefix("--config=") {
            config = Some(path.into());
        } else if command_at.is_none() && (a == "run" || a == "datagen") {
            command_at = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(at)) = (config, command_at) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read config file {}", path.to_string_lossy()))?;
    let table: toml::Table = text
        .parse()
        .with_context(|| format!("invalid config file {}", path.to_string_lossy()))?;
    let mut injected = Vec::new();
    for (key, value) in &table {
        injected.extend(flags_for(key, value)?.into_iter().map(OsString::from));
    }
    let mut out = args[..=at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}

pub fn parse(args: Vec<OsString>) -> anyhow::Result<Cli> {
    let args = expand_config(args)?;
    Ok(Cli::try_parse_from(args)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_lists_and_overrides() {
        let cli = Cli::try_parse_from(os(&[
            "mrf-bench", "run", "--space", "sphere", "--n", "50,100", "--methods", "medoid,exact",
            "--k", "3", "--mtry", "2",
        ]))
        .unwrap();
        let Command::Run(run) = cli.command else { panic!() };
        let g = run.grid_config();
        assert_eq!(g.space, SpaceKind::Sphere);
        assert_eq!(g.n, vec![50, 100]);
        assert_eq!(g.methods, vec![SplitRule::Medoid, SplitRule::ExactFrechet]);
        assert_eq!(g.forest.min_leaf, 3);
        assert_eq!(g.forest.mtry, Some(2));
        assert_eq!(g.reps, 10);
    }

    #[test]
    fn config_file_supplies_defaults() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "space = \"wasserstein\"\nn = [40, 60]\nreps = 3\ntrees = 7\nno_honesty = true").unwrap();
        let path = f.path().to_str().unwrap();
        let cli = parse(os(&["mrf-bench", "--config", path, "run", "--reps", "4"])).unwrap();
        let Command::Run(run) = cli.command else { panic!() };
        let g = run.grid_config();
        assert_eq!(g.space, SpaceKind::Wasserstein);
        assert_eq!(g.n, vec![40, 60]);
        assert_eq!(g.reps, 4);
        assert_eq!(g.forest.n_trees, 7);
        assert!(!g.forest.honesty);
    }

    #[test]
    fn rejects_unknown_values() {
        assert!(Cli::try_parse_from(os(&["mrf-bench", "run", "--space", "torus"])).is_err());
        assert!(Cli::try_parse_from(os(&["mrf-bench", "run", "--space", "sphere", "--methods", "knn"])).is_err());
    }
}
