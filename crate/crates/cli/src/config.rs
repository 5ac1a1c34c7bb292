//! Experiment configuration files and their validation.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use lnat_core::adversaries::{lower_bound_adversary, random_lnat_stream, SequenceMeta};
use lnat_core::applications::{Demand, InventoryModel, SchedulingModel};
use lnat_core::extension::{certify_lipschitz, measure_bound};
use lnat_core::io::DomainFile;
use lnat_core::projection::ProjectionConfig;
use lnat_core::{
    Algorithm, CostOracle, CostSequence, Error as CoreError, ExperimentOptions, Family, FunctionSpec, LNatDomain,
    StreamParams,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const KEYS_HELP: &str = "\
CONFIG KEYS (TOML, all optional unless noted)
  algo = \"full\" | \"bandit\"          learner (default full)
  T = 1024                           horizon, must be >= 1 (required)
  seed = 0                           first seed
  seeds = 1                          number of seeds: seed, seed+1, ...
  adversary = \"lower_bound\"          lower_bound | random | fixed | inventory | scheduling
  d, N, L                            lower_bound: dimension, width, Lipschitz constant (L default 1)
  domain = \"k.toml\" or [domain]      random, fixed: domain file or inline table
                                     (dim, lower, upper, gamma = [[i, j, g]] with x_i - x_j <= g, 1-based)
                                     random without domain uses the cube [0, N]^d
  family = \"mixed\"                   random: separable_quadratic | max_component | mixed
  scale = 1.0                        random: coefficient scale
  certify = false                    random: certify every draw exhaustively
  function = \"f.toml\" or [function]  fixed: function file or inline [[function.term]] tables
  M, L_hat                           fixed: explicit bounds (otherwise measured over K)
  [inventory]                        inventory: d, p, c, n, demand = { kind = ... }
  demand_file = \"y.txt\"              inventory: per-round demand rows, overrides demand
  [scheduling]                       scheduling: shift_starts, intervals, shift_length, n,
                                     labor, profit, miss, c_wait, mu, lambda (rows reused cyclically)
  eta, delta                         override the theoretical step parameters
  proj_tol = 1e-10, proj_max_sweeps = 100000
  x1 = [..]                          initial point (default: projected box midpoint)
  regret_per_round = false           fill regret_to_date on every row
  output = \"out\"                     output directory
  workers = 0                        worker threads (0: available parallelism)

Relative input paths are resolved against the config file's directory.";

/// A path to a TOML file or the table itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Source<T> {
    Path(String),
    Inline(T),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub algo: Option<Algorithm>,
    #[serde(rename = "T")]
    pub horizon: Option<i64>,
    pub seed: Option<u64>,
    pub seeds: Option<u64>,
    pub adversary: Option<String>,
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<i64>,
    #[serde(rename = "L")]
    pub l: Option<f64>,
    pub domain: Option<Source<DomainFile>>,
    pub family: Option<Family>,
    pub scale: Option<f64>,
    pub certify: Option<bool>,
    pub function: Option<Source<FunctionSpec>>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    #[serde(rename = "L_hat")]
    pub l_hat: Option<f64>,
    pub inventory: Option<InventoryModel>,
    pub demand_file: Option<String>,
    pub scheduling: Option<SchedulingModel>,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub proj_tol: Option<f64>,
    pub proj_max_sweeps: Option<usize>,
    pub x1: Option<Vec<f64>>,
    pub regret_per_round: Option<bool>,
    pub output: Option<String>,
    pub workers: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub algo: Option<Algorithm>,
    pub horizon: Option<i64>,
    pub seed: Option<u64>,
    pub seeds: Option<u64>,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub proj_tol: Option<f64>,
    pub proj_max_sweeps: Option<usize>,
    pub regret_per_round: bool,
    pub output: Option<String>,
    pub workers: Option<usize>,
}

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($f:ident),*) => { $( if o.$f.is_some() { self.$f = o.$f.clone(); } )* };
        }
        take!(algo, horizon, seed, seeds, eta, delta, proj_tol, proj_max_sweeps, output, workers);
        if o.regret_per_round {
            self.regret_per_round = Some(true);
        }
    }
}

/// Where each seed's cost sequence comes from.
#[derive(Clone)]
pub enum Adversary {
    LowerBound { d: usize, n: i64, l: f64 },
    Random { domain: Arc<LNatDomain>, params: StreamParams },
    Fixed { cost: CostOracle },
    Inventory(InventoryModel),
    Scheduling(SchedulingModel),
}

impl Adversary {
    pub fn sequence(&self, horizon: usize, seed: u64) -> lnat_core::Result<CostSequence> {
        match self {
            Adversary::LowerBound { d, n, l } => Ok(lower_bound_adversary(*d, *n, *l, horizon, seed)?.sequence),
            Adversary::Random { domain, params } => random_lnat_stream(domain.clone(), params, horizon, seed),
            Adversary::Fixed { cost } => {
                let meta = SequenceMeta { generator: "fixed".into(), seed, params: Vec::new() };
                CostSequence::repeated(cost.clone(), horizon, meta)
            }
            Adversary::Inventory(model) => model.sequence(horizon, seed),
            Adversary::Scheduling(model) => {
                let mut m = model.clone();
                m.lambda = (0..horizon).map(|t| model.lambda[t % model.lambda.len()].clone()).collect();
                m.sequence(seed)
            }
        }
    }
}

/// A validated experiment.
#[derive(Clone)]
pub struct Plan {
    pub options: ExperimentOptions,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub adversary: Adversary,
    pub output: PathBuf,
    pub workers: usize,
    /// The configuration after overrides, echoed into every sidecar.
    pub echo: RawConfig,
}

fn config_err(e: CoreError) -> CliError {
    CliError::Config(e.to_string())
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let path = Path::new(p);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

fn read(base: &Path, p: &str) -> Result<String, CliError> {
    let path = resolve(base, p);
    std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn load_domain(base: &Path, src: &Source<DomainFile>) -> Result<LNatDomain, CliError> {
    match src {
        Source::Path(p) => lnat_core::io::parse_domain(&read(base, p)?).map_err(config_err),
        Source::Inline(file) => file.build().map_err(config_err),
    }
}

fn load_function(base: &Path, src: &Source<FunctionSpec>) -> Result<FunctionSpec, CliError> {
    match src {
        Source::Path(p) => FunctionSpec::from_toml_str(&read(base, p)?).map_err(config_err),
        Source::Inline(spec) => Ok(spec.clone()),
    }
}

fn require<T>(v: Option<T>, what: &str, adversary: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("adversary {adversary} needs `{what}`")))
}

/// An explicit value, else a measurement over `K`. Returns `None` when `K`
/// is too large to measure.
fn explicit_or_measured(
    explicit: Option<f64>,
    measure: impl FnOnce() -> lnat_core::Result<f64>,
) -> Result<Option<f64>, CliError> {
    match explicit {
        Some(v) => Ok(Some(v)),
        None => match measure() {
            Ok(v) => Ok(Some(v)),
            Err(CoreError::TooLarge { .. }) => Ok(None),
            Err(e) => Err(config_err(e)),
        },
    }
}

fn fixed_cost(raw: &RawConfig, base: &Path, algo: Algorithm) -> Result<CostOracle, CliError> {
    let domain = Arc::new(load_domain(base, &require(raw.domain.clone(), "domain", "fixed")?)?);
    let spec = load_function(base, &require(raw.function.clone(), "function", "fixed")?)?;
    spec.validate(domain.dim()).map_err(config_err)?;
    let m = explicit_or_measured(raw.m, || measure_bound(&spec, &domain))?;
    let l = explicit_or_measured(raw.l_hat, || certify_lipschitz(&spec, &domain))?;
    let (am, al) = spec.bounds(&domain);
    let (m, l) = match (algo, m, l) {
        (Algorithm::Bandit, None, _) => {
            return Err(CliError::Config(
                "M is not derivable for this domain (too many points); set M explicitly".into(),
            ))
        }
        (Algorithm::Full, _, None) => {
            return Err(CliError::Config(
                "L_hat is not derivable for this domain (too many points); set L_hat explicitly".into(),
            ))
        }
        (_, m, l) => (m.unwrap_or(am), l.unwrap_or(al)),
    };
    for (name, v) in [("M", m), ("L_hat", l)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("{name} must be finite and nonnegative, got {v}")));
        }
    }
    Ok(CostOracle::new(domain, Arc::new(spec), m, l))
}

impl Plan {
    pub fn from_raw(raw: RawConfig, base: &Path) -> Result<Self, CliError> {
        let algo = raw.algo.unwrap_or(Algorithm::Full);
        let horizon = match raw.horizon {
            None => return Err(CliError::Config("missing `T`".into())),
            Some(t) if t < 1 => return Err(CliError::Config("T must be ≥ 1".into())),
            Some(t) => t as usize,
        };
        let count = raw.seeds.unwrap_or(1);
        if count == 0 {
            return Err(CliError::Config("seeds must be ≥ 1".into()));
        }
        let first = raw.seed.unwrap_or(0);
        let seeds: Vec<u64> = (0..count)
            .map(|k| first.checked_add(k).ok_or_else(|| CliError::Config("seed range overflows u64".into())))
            .collect::<Result<_, _>>()?;

        let name = raw.adversary.clone().unwrap_or_else(|| "lower_bound".into());
        let adversary = match name.as_str() {
            "lower_bound" => {
                let d = require(raw.d, "d", &name)?;
                let n = require(raw.n, "N", &name)?;
                let l = raw.l.unwrap_or(1.0);
                // Surfaces argument errors now rather than per seed.
                lower_bound_adversary(d, n, l, 1, 0).map_err(config_err)?;
                Adversary::LowerBound { d, n, l }
            }
            "random" => {
                let domain = match &raw.domain {
                    Some(src) => load_domain(base, src)?,
                    None => LNatDomain::cube(require(raw.d, "d", &name)?, 0, require(raw.n, "N", &name)?)
                        .map_err(config_err)?,
                };
                let params = StreamParams {
                    family: raw.family.unwrap_or(Family::Mixed),
                    scale: raw.scale.unwrap_or(1.0),
                    certify: raw.certify.unwrap_or(false),
                };
                if !(params.scale >= 0.0 && params.scale.is_finite()) {
                    return Err(CliError::Config("scale must be finite and nonnegative".into()));
                }
                Adversary::Random { domain: Arc::new(domain), params }
            }
            "fixed" => Adversary::Fixed { cost: fixed_cost(&raw, base, algo)? },
            "inventory" => {
                let mut model = require(raw.inventory.clone(), "[inventory]", &name)?;
                if let Some(p) = &raw.demand_file {
                    let rounds =
                        lnat_core::applications::parse_demand_trace(&read(base, p)?, model.d).map_err(config_err)?;
                    model.demand = Demand::Trace { rounds };
                }
                model.validate().map_err(config_err)?;
                if let Demand::Trace { rounds } = &model.demand {
                    if rounds.len() < horizon {
                        return Err(CliError::Config(format!(
                            "demand trace has {} rounds, T is {horizon}",
                            rounds.len()
                        )));
                    }
                }
                Adversary::Inventory(model)
            }
            "scheduling" => {
                let model = require(raw.scheduling.clone(), "[scheduling]", &name)?;
                model.validate().map_err(config_err)?;
                Adversary::Scheduling(model)
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown adversary {other:?}; expected lower_bound, random, fixed, inventory or scheduling"
                )))
            }
        };

        let projection = ProjectionConfig::new(
            raw.proj_tol.unwrap_or(ProjectionConfig::default().tolerance),
            raw.proj_max_sweeps.unwrap_or(ProjectionConfig::default().max_sweeps),
        )
        .map_err(config_err)?;
        let mut options = ExperimentOptions::new(algo);
        options.eta = raw.eta;
        options.delta = raw.delta;
        options.projection = projection;
        options.x1 = raw.x1.clone();
        options.regret_per_round = raw.regret_per_round.unwrap_or(false);
        if let Some(e) = options.eta {
            if !(e > 0.0 && e.is_finite()) {
                return Err(CliError::Config(format!("eta must be positive, got {e}")));
            }
        }
        if let Some(dl) = options.delta {
            if !(dl > 0.0 && dl <= 1.0) {
                return Err(CliError::Config(format!("delta must lie in (0, 1], got {dl}")));
            }
        }

        // One short sequence checks the domain, x1 and the parameters.
        let probe = adversary.sequence(1, seeds[0]).map_err(config_err)?;
        if let Some(x1) = &options.x1 {
            if !probe.domain().contains_real(x1).map_err(config_err)? {
                return Err(CliError::Config("x1 lies outside the domain hull".into()));
            }
        }

        let workers = match raw.workers.unwrap_or(0) {
            0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
            w => w,
        };
        let output = PathBuf::from(raw.output.clone().unwrap_or_else(|| "out".into()));
        Ok(Plan { options, horizon, seeds, adversary, output, workers, echo: raw })
    }
}
