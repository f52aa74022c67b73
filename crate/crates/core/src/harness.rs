//! Experiment runner: `R` independent runs of each policy for `T` rounds,
//! averaged per round and written as plot-ready CSV traces plus a summary.
//!
//! Randomness is split into independent ChaCha streams keyed by the base
//! seed. The environment stream is addressed by (run, round, arm) and shared
//! by all policies of a run; each policy gets its own stream per run. A run
//! therefore never depends on which other runs or policies are executed, and
//! runs may execute in parallel as long as they are folded in run order.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::confidence::ConfidenceParams;
use crate::env::{load_arm_table, stream_key, synthetic_instance, ArmTable, CommonRewards, Environment};
use crate::error::{Error, Result};
use crate::metrics::{oracle_line, MetricsRecorder, RoundTotals, TraceAverage, TraceRow};
use crate::policies::{oracle_policy, PolicyKind};
use crate::types::ProblemInstance;

pub const DEFAULT_STRIDE: u64 = 50;

/// Header of every per-policy trace file.
pub const TRACE_HEADER: &str = "t,cum_reward,cum_regret,vio_horizon,vio_clipped,ratio";

#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    /// An arm table; `expected_arms`, when given, must match its length.
    File {
        path: PathBuf,
        expected_arms: Option<usize>,
    },
    Synthetic {
        generator: String,
        num_arms: usize,
        seed: u64,
    },
}

impl InstanceSource {
    pub fn describe(&self) -> String {
        match self {
            InstanceSource::File { path, .. } => format!("file:{}", path.display()),
            InstanceSource::Synthetic { generator, .. } => format!("synthetic:{generator}"),
        }
    }

    pub fn load(&self) -> Result<ArmTable> {
        match self {
            InstanceSource::File {
                path,
                expected_arms,
            } => {
                let table = load_arm_table(path)?;
                match expected_arms {
                    Some(k) if *k != table.len() => Err(Error::InvalidParameter(format!(
                        "K = {k} but {} lists {} arms",
                        path.display(),
                        table.len()
                    ))),
                    _ => Ok(table),
                }
            }
            InstanceSource::Synthetic {
                generator,
                num_arms,
                seed,
            } => synthetic_instance(generator, *num_arms, *seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub source: InstanceSource,
    pub size: usize,
    pub threshold: f64,
    pub horizon: u64,
    pub delta: f64,
    pub policies: Vec<PolicyKind>,
    pub runs: u64,
    pub base_seed: u64,
    pub stride: u64,
    /// Overrides Con-UCB's confidence scale; `None` means `72 ln(8KT/δ)`.
    pub gamma: Option<f64>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if self.policies.is_empty() {
            return bad("at least one policy is required".into());
        }
        if let Some(g) = self.gamma {
            ConfidenceParams::new(g)?;
        }
        Ok(())
    }

    pub fn instance(&self, table: &ArmTable) -> Result<ProblemInstance> {
        ProblemInstance::new(
            table.params(),
            self.size,
            self.threshold,
            self.horizon,
            self.delta,
        )
    }
}

/// Partial configuration as read from a TOML file or from command-line flags.
/// Later sources override earlier ones field by field.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub arms: Option<PathBuf>,
    pub synthetic: Option<String>,
    #[serde(rename = "K")]
    pub num_arms: Option<usize>,
    pub instance_seed: Option<u64>,
    #[serde(rename = "L")]
    pub size: Option<usize>,
    pub h: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: Option<u64>,
    pub delta: Option<f64>,
    pub policies: Option<Vec<String>>,
    pub runs: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub stride: Option<u64>,
    pub gamma: Option<f64>,
}

impl ExperimentSpec {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        toml::from_str(&text).map_err(|e| {
            Error::InvalidParameter(format!("config file {}: {e}", path.display()))
        })
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: ExperimentSpec) -> ExperimentSpec {
        ExperimentSpec {
            arms: other.arms.or(self.arms),
            synthetic: other.synthetic.or(self.synthetic),
            num_arms: other.num_arms.or(self.num_arms),
            instance_seed: other.instance_seed.or(self.instance_seed),
            size: other.size.or(self.size),
            h: other.h.or(self.h),
            horizon: other.horizon.or(self.horizon),
            delta: other.delta.or(self.delta),
            policies: other.policies.or(self.policies),
            runs: other.runs.or(self.runs),
            seed: other.seed.or(self.seed),
            out: other.out.or(self.out),
            stride: other.stride.or(self.stride),
            gamma: other.gamma.or(self.gamma),
        }
    }

    pub fn into_config(self) -> Result<ExperimentConfig> {
        let missing = |name: &str| Error::InvalidParameter(format!("missing required `{name}`"));
        let seed = self.seed.ok_or_else(|| missing("seed"))?;
        let source = match (self.arms, self.synthetic) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidParameter(
                    "give either an arm table or a synthetic generator, not both".into(),
                ))
            }
            (Some(path), None) => InstanceSource::File {
                path,
                expected_arms: self.num_arms,
            },
            (None, Some(generator)) => InstanceSource::Synthetic {
                generator,
                num_arms: self.num_arms.ok_or_else(|| missing("K"))?,
                seed: self.instance_seed.unwrap_or(seed),
            },
            (None, None) => return Err(missing("arms or synthetic")),
        };
        let policies = self
            .policies
            .ok_or_else(|| missing("policies"))?
            .iter()
            .flat_map(|p| p.split(','))
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<PolicyKind>>>()?;
        let config = ExperimentConfig {
            source,
            size: self.size.ok_or_else(|| missing("L"))?,
            threshold: self.h.ok_or_else(|| missing("h"))?,
            horizon: self.horizon.ok_or_else(|| missing("T"))?,
            delta: self.delta.ok_or_else(|| missing("delta"))?,
            policies,
            runs: self.runs.ok_or_else(|| missing("runs"))?,
            base_seed: seed,
            stride: self.stride.unwrap_or(DEFAULT_STRIDE),
            gamma: self.gamma,
            out_dir: self.out,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Final averaged metrics of one policy.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct PolicySummary {
    pub cum_reward: f64,
    pub cum_regret: f64,
    pub vio_horizon: f64,
    pub vio_clipped: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ConfigEcho {
    pub source: String,
    #[serde(rename = "K")]
    pub num_arms: usize,
    #[serde(rename = "L")]
    pub size: usize,
    pub h: f64,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub delta: f64,
    pub gamma: f64,
    pub runs: u64,
    pub stride: u64,
    pub policies: Vec<String>,
    pub optimal_value: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub base_seed: u64,
    pub config: ConfigEcho,
    pub policies: BTreeMap<String, PolicySummary>,
}

/// In-memory result of an experiment: averaged traces per policy, in the
/// order the policies were requested.
#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub instance: ProblemInstance,
    pub table: ArmTable,
    pub optimal_value: f64,
    pub gamma: f64,
    pub traces: Vec<(PolicyKind, Vec<TraceRow>)>,
}

impl ExperimentResult {
    pub fn trace(&self, kind: PolicyKind) -> Option<&[TraceRow]> {
        self.traces
            .iter()
            .find(|(k, _)| *k == kind)
            .map(|(_, rows)| rows.as_slice())
    }
}

/// `t · x*ᵀg` for `t = 1..=T`.
pub fn compute_oracle_line(instance: &ProblemInstance) -> Result<Vec<f64>> {
    let x = oracle_policy(instance)?;
    Ok(oracle_line(x.dot(&instance.g_means()), instance.horizon()))
}

/// Plays one policy for one run and returns its sampled trace.
pub fn run_single(
    kind: PolicyKind,
    instance: &ProblemInstance,
    optimal_value: f64,
    base_seed: u64,
    run: u64,
    stride: u64,
    gamma: Option<f64>,
) -> Result<Vec<TraceRow>> {
    let env = Environment::new(&ArmTable::from_params(instance.arms().to_vec()));
    let mut policy = kind.build(instance, gamma)?;
    let mut noise = CommonRewards::new(base_seed, run, instance.num_arms());
    let mut rng = ChaCha8Rng::from_seed(stream_key(base_seed, kind.stream_tag()));
    rng.set_stream(run);
    let mut rec = MetricsRecorder::new(optimal_value, instance.threshold(), instance.horizon(), stride);
    for t in 1..=instance.horizon() {
        let selection = policy.select(&mut rng);
        let outcome = env.sample_round_common(t, &selection, &mut noise);
        policy.update(&outcome)?;
        rec.record(RoundTotals {
            a: outcome.total_a(),
            g: outcome.total_g(),
        });
    }
    Ok(rec.into_rows())
}

/// Runs every configured policy without touching the filesystem.
pub fn simulate(config: &ExperimentConfig, table: &ArmTable) -> Result<ExperimentResult> {
    config.validate()?;
    let instance = config.instance(table)?;
    let x_star = oracle_policy(&instance)?;
    let optimal_value = x_star.dot(&instance.g_means());
    let gamma = match config.gamma {
        Some(g) => g,
        None => ConfidenceParams::for_horizon(instance.num_arms(), instance.horizon(), instance.delta())?
            .gamma(),
    };

    let per_run: Vec<Vec<Vec<TraceRow>>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            config
                .policies
                .iter()
                .map(|&kind| {
                    run_single(
                        kind,
                        &instance,
                        optimal_value,
                        config.base_seed,
                        run,
                        config.stride,
                        config.gamma,
                    )
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut averages = vec![TraceAverage::new(); config.policies.len()];
    for run in &per_run {
        for (avg, rows) in averages.iter_mut().zip(run) {
            avg.add(rows);
        }
    }
    let traces = config
        .policies
        .iter()
        .copied()
        .zip(averages.iter().map(TraceAverage::mean))
        .collect();
    Ok(ExperimentResult {
        instance,
        table: table.clone(),
        optimal_value,
        gamma,
        traces,
    })
}

pub fn summarize(config: &ExperimentConfig, result: &ExperimentResult) -> Summary {
    let policies = result
        .traces
        .iter()
        .map(|(kind, rows)| {
            let last = rows.last().copied().expect("horizon >= 1");
            (
                kind.name().to_string(),
                PolicySummary {
                    cum_reward: last.cum_reward,
                    cum_regret: last.cum_regret,
                    vio_horizon: last.vio_horizon,
                    vio_clipped: last.vio_clipped,
                    ratio: last.ratio().as_f64(),
                },
            )
        })
        .collect();
    Summary {
        base_seed: config.base_seed,
        config: ConfigEcho {
            source: config.source.describe(),
            num_arms: result.instance.num_arms(),
            size: config.size,
            h: config.threshold,
            horizon: config.horizon,
            delta: config.delta,
            gamma: result.gamma,
            runs: config.runs,
            stride: config.stride,
            policies: config.policies.iter().map(|p| p.name().to_string()).collect(),
            optimal_value: result.optimal_value,
        },
        policies,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t,
            r.cum_reward,
            r.cum_regret,
            r.vio_horizon,
            r.vio_clipped,
            r.ratio()
        ));
    }
    s
}

/// Writes `<policy>.csv` for each policy, `optimal_reward.csv` and
/// `summary.toml` into `dir`.
pub fn write_outputs(dir: &Path, summary: &Summary, result: &ExperimentResult) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    for (kind, rows) in &result.traces {
        write_file(&dir.join(format!("{}.csv", kind.name())), &trace_csv(rows))?;
    }
    if let Some((_, rows)) = result.traces.first() {
        let mut s = String::from("t,optimal_reward\n");
        for r in rows {
            s.push_str(&format!("{},{}\n", r.t, r.t as f64 * result.optimal_value));
        }
        write_file(&dir.join("optimal_reward.csv"), &s)?;
    }
    let text = toml::to_string(summary)
        .map_err(|e| Error::InvalidParameter(format!("serializing summary: {e}")))?;
    write_file(&dir.join("summary.toml"), &text)
}

/// Loads the instance, runs all policies and writes the outputs if an output
/// directory is configured.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Summary> {
    config.validate()?;
    let table = config.source.load()?;
    let result = simulate(config, &table)?;
    let summary = summarize(config, &result);
    if let Some(dir) = &config.out_dir {
        write_outputs(dir, &summary, &result)?;
    }
    Ok(summary)
}
