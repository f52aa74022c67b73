//! Selection policies behind a common propose/absorb contract.

mod conucb;
mod cucb;
mod exp3m;
mod fixed;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::types::{ProblemInstance, RoundOutcome, SelectionSet};

pub use conucb::ConUcb;
pub use cucb::{cucb_index, Cucb};
pub use exp3m::{default_exploration_rate, Exp3M};
pub use fixed::{oracle_policy, OraclePolicy, UniformPolicy};

/// A policy proposes one selection per round and then absorbs the rewards
/// observed for it. `select` and `update` must alternate.
pub trait Policy: Send {
    fn kind(&self) -> PolicyKind;

    fn select(&mut self, rng: &mut dyn RngCore) -> SelectionSet;

    fn update(&mut self, outcome: &RoundOutcome) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolicyKind {
    ConUcb,
    Cucb,
    Exp3M,
    Oracle,
    Uniform,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::ConUcb,
        PolicyKind::Cucb,
        PolicyKind::Exp3M,
        PolicyKind::Oracle,
        PolicyKind::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::ConUcb => "conucb",
            PolicyKind::Cucb => "cucb",
            PolicyKind::Exp3M => "exp3m",
            PolicyKind::Oracle => "oracle",
            PolicyKind::Uniform => "uniform",
        }
    }

    /// Stable per-policy tag used to derive independent random streams.
    pub fn stream_tag(self) -> u64 {
        match self {
            PolicyKind::ConUcb => 1,
            PolicyKind::Cucb => 2,
            PolicyKind::Exp3M => 3,
            PolicyKind::Oracle => 4,
            PolicyKind::Uniform => 5,
        }
    }

    /// Builds a fresh policy for `instance`. `gamma` overrides Con-UCB's
    /// confidence scale; `None` uses the horizon-derived default.
    pub fn build(self, instance: &ProblemInstance, gamma: Option<f64>) -> Result<Box<dyn Policy>> {
        Ok(match self {
            PolicyKind::ConUcb => Box::new(match gamma {
                Some(g) => ConUcb::with_gamma(instance, g)?,
                None => ConUcb::new(instance)?,
            }),
            PolicyKind::Cucb => Box::new(Cucb::new(instance.num_arms(), instance.size())?),
            PolicyKind::Exp3M => Box::new(Exp3M::for_horizon(
                instance.num_arms(),
                instance.size(),
                instance.horizon(),
            )?),
            PolicyKind::Oracle => Box::new(OraclePolicy::new(instance)?),
            PolicyKind::Uniform => {
                Box::new(UniformPolicy::new(instance.num_arms(), instance.size())?)
            }
        })
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::UnknownPolicy(s.trim().to_string()))
    }
}

/// Remembers the selection handed out by `select` until `update` consumes it.
#[derive(Debug, Default, Clone)]
pub(crate) struct Pending(Option<SelectionSet>);

impl Pending {
    pub(crate) fn set(&mut self, selection: &SelectionSet) {
        self.0 = Some(selection.clone());
    }

    pub(crate) fn take_matching(&mut self, outcome: &RoundOutcome) -> Result<()> {
        match self.0.take() {
            Some(s) if &s == outcome.selection() => Ok(()),
            Some(s) => {
                let msg = format!(
                    "expected arms {:?}, outcome has {:?}",
                    s.indices(),
                    outcome.selection().indices()
                );
                self.0 = Some(s);
                Err(Error::OutcomeMismatch(msg))
            }
            None => Err(Error::OutcomeMismatch("no selection is pending".into())),
        }
    }
}
