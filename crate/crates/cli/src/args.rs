use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nids_core::dataset::LabelMode;
use nids_core::discretize::DiscretizeMethod;
use nids_core::ensemble::FusionRule;
use nids_core::learner::Algorithm;
use nids_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "nids", version, about = "Train and evaluate NSL-KDD intrusion detectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a model and write it to --model
    Train(Opts),
    /// Evaluate a saved model on --test (or --data)
    Eval(Opts),
    /// Stratified k-fold cross-validation of --algo on --data
    Crossval(Opts),
    /// ROC curve CSV from cross-validation, or from --model on --test
    Roc(Opts),
    /// Rank features by information gain
    Rank(Opts),
    /// Wrapper feature-subset search
    Wrapper(Opts),
    /// Cross-validate every algorithm under the same folds and seed
    Report(Opts),
    /// Download the dataset and verify its SHA-256
    FetchDataset(FetchOpts),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Nb,
    NbDisc,
    K2bn,
    Rtree,
    Rforest,
    Combined,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Nb => Algorithm::Nb,
            AlgoArg::NbDisc => Algorithm::NbDisc,
            AlgoArg::K2bn => Algorithm::K2bn,
            AlgoArg::Rtree => Algorithm::Rtree,
            AlgoArg::Rforest => Algorithm::Rforest,
            AlgoArg::Combined => Algorithm::Combined,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LabelsArg {
    Binary,
    Category5,
}

impl From<LabelsArg> for LabelMode {
    fn from(l: LabelsArg) -> Self {
        match l {
            LabelsArg::Binary => LabelMode::Binary,
            LabelsArg::Category5 => LabelMode::Category5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiscArg {
    EqualWidth,
    EqualFrequency,
    Mdl,
}

impl From<DiscArg> for DiscretizeMethod {
    fn from(d: DiscArg) -> Self {
        match d {
            DiscArg::EqualWidth => DiscretizeMethod::EqualWidth,
            DiscArg::EqualFrequency => DiscretizeMethod::EqualFrequency,
            DiscArg::Mdl => DiscretizeMethod::EntropyMdl,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FusionArg {
    Union,
    Majority,
    Average,
}

impl From<FusionArg> for FusionRule {
    fn from(f: FusionArg) -> Self {
        match f {
            FusionArg::Union => FusionRule::AnomalyUnion,
            FusionArg::Majority => FusionRule::MajorityVote,
            FusionArg::Average => FusionRule::AverageProbability,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Greedy,
    BestFirst,
}

/// Flags shared by the data commands. Every flag can also come from the
/// --config file; flags win.
#[derive(Args, Debug, Default, Clone)]
pub struct Opts {
    /// Flat key=value file supplying defaults for any flag below
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algo: Option<AlgoArg>,
    /// Training data (.csv in NSL-KDD layout, or .arff)
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub labels: Option<LabelsArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Bins for equal-width / equal-frequency discretization
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, value_enum)]
    pub disc_method: Option<DiscArg>,
    /// Trees in the random forest
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub bag_fraction: Option<f64>,
    /// Sample forest bags with replacement
    #[arg(long)]
    pub with_replacement: bool,
    /// Features examined per tree node: a number or `auto`
    #[arg(long)]
    pub k_features: Option<String>,
    /// K2 parents per feature besides the class
    #[arg(long)]
    pub max_parents: Option<usize>,
    #[arg(long, value_enum)]
    pub fusion: Option<FusionArg>,
    /// Keep only the N features ranked best by information gain (fitted per fold)
    #[arg(long)]
    pub top_n: Option<usize>,
    /// Keep only these comma-separated feature indices
    #[arg(long)]
    pub features: Option<String>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    /// Largest subset the wrapper search may return
    #[arg(long)]
    pub max_features: Option<usize>,
    /// Folds for re-scoring the wrapper's final subset
    #[arg(long)]
    pub final_folds: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct FetchOpts {
    #[arg(long)]
    pub url: String,
    /// Expected SHA-256 of the downloaded file, hex encoded
    #[arg(long)]
    pub sha256: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn usage(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| usage(format!("config key `{key}`: cannot parse `{value}`")))
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T> {
    T::from_str(value, false).map_err(|_| usage(format!("config key `{key}`: invalid value `{value}`")))
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<HashMap<String, String>> {
    // An unreadable config file is a configuration error, not a data error.
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{}:{}: expected key=value", path.display(), n + 1)))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_owned());
    }
    Ok(map)
}

impl Opts {
    /// Fills flags left unset on the command line from the --config file.
    pub fn merge_config(mut self) -> Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        for (key, value) in read_config(&path)? {
            let v = value.as_str();
            let k = key.as_str();
            match k {
                "algo" => fill(&mut self.algo, parse_enum(k, v)?),
                "data" => fill(&mut self.data, PathBuf::from(v)),
                "test" => fill(&mut self.test, PathBuf::from(v)),
                "model" => fill(&mut self.model, PathBuf::from(v)),
                "folds" => fill(&mut self.folds, parse_value(k, v)?),
                "seed" => fill(&mut self.seed, parse_value(k, v)?),
                "labels" => fill(&mut self.labels, parse_enum(k, v)?),
                "out" => fill(&mut self.out, PathBuf::from(v)),
                "bins" => fill(&mut self.bins, parse_value(k, v)?),
                "disc-method" => fill(&mut self.disc_method, parse_enum(k, v)?),
                "trees" => fill(&mut self.trees, parse_value(k, v)?),
                "bag-fraction" => fill(&mut self.bag_fraction, parse_value(k, v)?),
                "with-replacement" => self.with_replacement |= parse_value::<bool>(k, v)?,
                "k-features" => fill(&mut self.k_features, v.to_owned()),
                "max-parents" => fill(&mut self.max_parents, parse_value(k, v)?),
                "fusion" => fill(&mut self.fusion, parse_enum(k, v)?),
                "top-n" => fill(&mut self.top_n, parse_value(k, v)?),
                "features" => fill(&mut self.features, v.to_owned()),
                "strategy" => fill(&mut self.strategy, parse_enum(k, v)?),
                "max-features" => fill(&mut self.max_features, parse_value(k, v)?),
                "final-folds" => fill(&mut self.final_folds, parse_value(k, v)?),
                other => return Err(usage(format!("unknown config key `{other}`"))),
            }
        }
        Ok(self)
    }
}

fn fill<T>(slot: &mut Option<T>, value: T) {
    if slot.is_none() {
        *slot = Some(value);
    }
}
