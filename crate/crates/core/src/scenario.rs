//! Scenario and condition documents read by the command-line tool.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cantor::{CantorIndex, ScaleFunction};
use crate::error::{Error, Result};
use crate::forcing::codec::ConditionJson;
use crate::generic::{Agenda, Demand, RunConfig};
use crate::ground::GroundFunction;
use crate::names::NameRef;
use crate::poset::{PosetSpec, RankedPoset, MAX_STRATUM};

/// Longest run depth accepted from a scenario.
pub const MAX_DEPTH: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScaleSpec {
    Preset(String),
    Explicit(Vec<u64>),
}

impl Default for ScaleSpec {
    fn default() -> Self {
        ScaleSpec::Preset("min_log".into())
    }
}

impl ScaleSpec {
    pub fn build(&self) -> Result<ScaleFunction> {
        match self {
            ScaleSpec::Preset(p) => match p.as_str() {
                "min_log" => Ok(ScaleFunction::min_log()),
                "n_squared" => Ok(ScaleFunction::n_squared()),
                other => Err(Error::Input(format!("unknown scale {other:?}"))),
            },
            ScaleSpec::Explicit(values) => ScaleFunction::new(values.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NameSpec {
    /// A ground function listed in the scenario, by name.
    Check(String),
    /// The rank trace of an element.
    R(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum DemandSpec {
    Join { x: String },
    Prolong { x: String, n: usize },
    AddName { x: String, name: NameSpec },
    Witness { a: String, b: String, after: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub poset: PosetSpec,
    #[serde(default)]
    pub scale: ScaleSpec,
    pub depth: usize,
    /// Bound on the values of listed ground functions.
    pub index_budget: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ground_functions: Vec<GroundFunction>,
    #[serde(default)]
    pub agenda: Vec<DemandSpec>,
    #[serde(default)]
    pub random_demands: usize,
    #[serde(default = "yes")]
    pub sweep: bool,
    pub output: Option<OutputSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Scenario> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("scenario: {e}")))
    }

    pub fn poset(&self) -> Result<RankedPoset> {
        let poset = RankedPoset::from_spec(&self.poset).map_err(as_input)?;
        if poset.max_stratum_len() > MAX_STRATUM {
            return Err(Error::Input(format!(
                "a rank has {} elements (limit {MAX_STRATUM})",
                poset.max_stratum_len()
            )));
        }
        Ok(poset)
    }

    pub fn index(&self) -> Result<CantorIndex> {
        let scale = self.scale.build().map_err(as_input)?;
        if self.depth > MAX_DEPTH || self.depth >= scale.n_max() {
            return Err(Error::Input(format!(
                "depth {} exceeds the limit {}",
                self.depth,
                MAX_DEPTH.min(scale.n_max().saturating_sub(1))
            )));
        }
        Ok(CantorIndex::new(scale))
    }

    fn ground_table(&self) -> Result<BTreeMap<&str, &GroundFunction>> {
        let mut table = BTreeMap::new();
        for g in &self.ground_functions {
            let over = g.prefix.iter().chain([&g.tail]).any(|v| v.0 >= self.index_budget.into());
            if over {
                return Err(Error::Input(format!("{} has a value at or above the index budget", g.name)));
            }
            if table.insert(g.name.as_str(), g).is_some() {
                return Err(Error::Input(format!("duplicate ground function {}", g.name)));
            }
        }
        Ok(table)
    }

    pub fn agenda(&self, poset: &RankedPoset) -> Result<Agenda> {
        let table = self.ground_table()?;
        let mut demands = Vec::new();
        for d in &self.agenda {
            demands.push(match d {
                DemandSpec::Join { x } => Demand::Join { x: poset.id(x)? },
                DemandSpec::Prolong { x, n } => Demand::Prolong { x: poset.id(x)?, n: *n },
                DemandSpec::AddName { x, name } => Demand::AddName {
                    x: poset.id(x)?,
                    name: match name {
                        NameSpec::Check(g) => NameRef::Check(
                            (*table
                                .get(g.as_str())
                                .ok_or_else(|| Error::Input(format!("unknown ground function {g}")))?)
                            .clone(),
                        ),
                        NameSpec::R(y) => NameRef::RSlalom(poset.id(y)?),
                    },
                },
                DemandSpec::Witness { a, b, after } => Demand::Witness {
                    a: poset.id(a)?,
                    b: poset.id(b)?,
                    after: *after,
                },
            });
        }
        let agenda = Agenda::new(demands);
        agenda.check(poset).map_err(as_input)?;
        Ok(agenda)
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            depth: self.depth,
            seed: self.seed,
            random_demands: self.random_demands,
            ground_functions: self.ground_functions.clone(),
            sweep: self.sweep,
        }
    }
}

fn yes() -> bool {
    true
}

/// A condition together with the poset it lives over.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionDocument {
    pub poset: PosetSpec,
    #[serde(default)]
    pub scale: ScaleSpec,
    pub condition: ConditionJson,
}

/// Validation failures of scenario contents are input errors.
fn as_input(e: Error) -> Error {
    match e {
        Error::Validation(m) | Error::PreconditionViolated(m) => Error::Input(m),
        other => other,
    }
}
