//! Bernoulli two-level reward environment and arm-table loading.
//!
//! Every selected arm yields an independent click `a ~ Bernoulli(a_mean)` and
//! an independent conversion `b ~ Bernoulli(b_mean)`; the compound reward is
//! `a · b`. Arms that were not selected produce nothing.

use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{ArmParams, RewardSample, RoundOutcome, SelectionSet};

/// Required header of an arm-table CSV.
pub const ARM_TABLE_HEADER: [&str; 3] = ["arm_id", "a_mean", "b_mean"];

#[derive(Debug, Clone, PartialEq)]
pub struct NamedArm {
    pub id: String,
    pub params: ArmParams,
}

/// Arms in index order, each with the identifier it had in its source file.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmTable {
    arms: Vec<NamedArm>,
}

impl ArmTable {
    pub fn new(arms: Vec<NamedArm>) -> Result<Self> {
        let mut seen = HashSet::new();
        for arm in &arms {
            if !seen.insert(arm.id.as_str()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate arm id `{}`",
                    arm.id
                )));
            }
        }
        Ok(Self { arms })
    }

    /// Arms named by their index.
    pub fn from_params(params: Vec<ArmParams>) -> Self {
        let arms = params
            .into_iter()
            .enumerate()
            .map(|(i, params)| NamedArm {
                id: i.to_string(),
                params,
            })
            .collect();
        Self { arms }
    }

    pub fn arms(&self) -> &[NamedArm] {
        &self.arms
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn params(&self) -> Vec<ArmParams> {
        self.arms.iter().map(|a| a.params).collect()
    }

    pub fn a_means(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.params.a_mean()).collect()
    }

    pub fn b_means(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.params.b_mean()).collect()
    }

    pub fn g_means(&self) -> Vec<f64> {
        self.arms.iter().map(|a| a.params.g_mean()).collect()
    }

    /// Sum of the `size` largest first-level means.
    pub fn top_attractiveness(&self, size: usize) -> f64 {
        let mut a = self.a_means();
        a.sort_unstable_by(|x, y| y.total_cmp(x));
        a.iter().take(size).sum()
    }

    /// Writes the table in the same CSV format [`load_arm_table`] reads.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let ctx = || format!("writing {}", path.display());
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(ctx(), e.into()))?;
        w.write_record(ARM_TABLE_HEADER)
            .map_err(|e| Error::io(ctx(), e.into()))?;
        for arm in &self.arms {
            w.write_record([
                arm.id.clone(),
                arm.params.a_mean().to_string(),
                arm.params.b_mean().to_string(),
            ])
            .map_err(|e| Error::io(ctx(), e.into()))?;
        }
        w.flush().map_err(|e| Error::io(ctx(), e))
    }
}

/// Reads an arm table: UTF-8 CSV with header `arm_id,a_mean,b_mean`, one arm
/// per row. Row order defines arm index order.
pub fn load_arm_table(path: &Path) -> Result<ArmTable> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_arm_table(file, path)
}

fn read_arm_table<R: std::io::Read>(reader: R, path: &Path) -> Result<ArmTable> {
    let table_err = |line: u64, message: String| Error::ArmTable {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut arms = Vec::new();
    let mut seen = HashSet::new();
    let mut header_checked = false;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            table_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if !header_checked {
            if record.iter().ne(ARM_TABLE_HEADER) {
                return Err(table_err(
                    line,
                    format!("header must be `{}`", ARM_TABLE_HEADER.join(",")),
                ));
            }
            header_checked = true;
            continue;
        }
        if record.len() != 3 {
            return Err(table_err(
                line,
                format!("expected 3 fields, found {}", record.len()),
            ));
        }
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(table_err(line, "empty arm_id".into()));
        }
        let mean = |field: usize, name: &str| -> Result<f64> {
            let v: f64 = record[field]
                .parse()
                .map_err(|_| table_err(line, format!("{name} `{}` is not a number", &record[field])))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(table_err(line, format!("{name} = {v} is outside [0, 1]")));
            }
            Ok(v)
        };
        let a = mean(1, "a_mean")?;
        let b = mean(2, "b_mean")?;
        if !seen.insert(id.clone()) {
            return Err(table_err(line, format!("duplicate arm_id `{id}`")));
        }
        arms.push(NamedArm {
            id,
            params: ArmParams::new(a, b)?,
        });
    }
    if !header_checked {
        return Err(table_err(1, "empty file".into()));
    }
    Ok(ArmTable { arms })
}

/// Known synthetic generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// `a, b ~ U[0, 1]` independently.
    Uniform,
    /// `a ~ U[0, 1]`, `b = clip(1 - a + U[-0.1, 0.1])`: links that attract
    /// clicks tend to convert poorly.
    Conflicting,
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Generator::Uniform),
            "conflicting" => Ok(Generator::Conflicting),
            other => Err(Error::UnknownGenerator(other.to_string())),
        }
    }
}

impl Generator {
    pub fn name(self) -> &'static str {
        match self {
            Generator::Uniform => "uniform",
            Generator::Conflicting => "conflicting",
        }
    }
}

/// Deterministic synthetic arm table.
pub fn synthetic_instance(kind: &str, num_arms: usize, seed: u64) -> Result<ArmTable> {
    let generator: Generator = kind.parse()?;
    if num_arms < 2 {
        return Err(Error::InvalidParameter(format!(
            "synthetic tables need K >= 2, got {num_arms}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = (0..num_arms)
        .map(|_| {
            let a: f64 = rng.random();
            let b: f64 = match generator {
                Generator::Uniform => rng.random(),
                Generator::Conflicting => {
                    (1.0 - a + rng.random_range(-0.1..=0.1)).clamp(0.0, 1.0)
                }
            };
            ArmParams::new(a, b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ArmTable::from_params(params))
}

/// Counter-addressed uniforms shared by every policy in a run: the pair drawn
/// for `(round, arm)` does not depend on which arms were selected before, so
/// compared policies see the same reward realizations.
#[derive(Debug, Clone)]
pub struct CommonRewards {
    rng: ChaCha8Rng,
    num_arms: usize,
}

impl CommonRewards {
    /// Stream `run` of the environment generator keyed by `base_seed`.
    pub fn new(base_seed: u64, run: u64, num_arms: usize) -> Self {
        let mut rng = ChaCha8Rng::from_seed(stream_key(base_seed, 0));
        rng.set_stream(run);
        Self { rng, num_arms }
    }

    /// Two uniforms in [0, 1) for (`round` >= 1, `arm`).
    pub fn uniforms(&mut self, round: u64, arm: usize) -> (f64, f64) {
        // Each pair consumes two u64 = four 32-bit words.
        let slot = round.saturating_sub(1) as u128 * self.num_arms as u128 + arm as u128;
        self.rng.set_word_pos(slot * 4);
        (self.rng.random(), self.rng.random())
    }
}

/// 256-bit ChaCha key for (`base_seed`, `domain`).
pub fn stream_key(base_seed: u64, domain: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&base_seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.to_le_bytes());
    key
}

/// Bernoulli two-level environment over an [`ArmTable`].
#[derive(Debug, Clone)]
pub struct Environment {
    a_means: Vec<f64>,
    b_means: Vec<f64>,
}

impl Environment {
    pub fn new(table: &ArmTable) -> Self {
        Self {
            a_means: table.a_means(),
            b_means: table.b_means(),
        }
    }

    pub fn num_arms(&self) -> usize {
        self.a_means.len()
    }

    fn draw(&self, arm: usize, (ua, ub): (f64, f64)) -> RewardSample {
        let a = if ua < self.a_means[arm] { 1.0 } else { 0.0 };
        let b = if ub < self.b_means[arm] { 1.0 } else { 0.0 };
        RewardSample::new(a, b)
    }

    fn check(&self, selection: &SelectionSet) {
        assert!(
            selection.indices().iter().all(|&i| i < self.num_arms()),
            "selection {:?} out of range for K = {}",
            selection.indices(),
            self.num_arms()
        );
    }

    /// Samples the selected arms from a sequential random stream.
    pub fn sample_round<R: Rng + ?Sized>(
        &self,
        round: u64,
        selection: &SelectionSet,
        rng: &mut R,
    ) -> RoundOutcome {
        self.check(selection);
        let samples = selection
            .indices()
            .iter()
            .map(|&i| self.draw(i, (rng.random(), rng.random())))
            .collect();
        RoundOutcome::new(round, selection.clone(), samples).expect("one sample per index")
    }

    /// Samples the selected arms from the counter-addressed stream.
    pub fn sample_round_common(
        &self,
        round: u64,
        selection: &SelectionSet,
        noise: &mut CommonRewards,
    ) -> RoundOutcome {
        self.check(selection);
        let samples = selection
            .indices()
            .iter()
            .map(|&i| self.draw(i, noise.uniforms(round, i)))
            .collect();
        RoundOutcome::new(round, selection.clone(), samples).expect("one sample per index")
    }
}
