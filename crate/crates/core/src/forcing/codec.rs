//! Canonical JSON form of conditions: coordinates sorted by element name,
//! names sorted, slalom entries as sorted integer arrays.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::GroundFunction;
use crate::names::NameRef;
use crate::poset::RankedPoset;
use crate::slalom::PartialSlalom;

use super::{Atom, NQCondition};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NameJson {
    Check(GroundFunction),
    #[serde(rename = "r")]
    RankTrace(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordinateJson {
    pub element: String,
    pub s: PartialSlalom,
    pub w: usize,
    #[serde(rename = "F", default)]
    pub f: Vec<NameJson>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionJson {
    pub coordinates: Vec<CoordinateJson>,
}

pub fn encode_name(poset: &RankedPoset, name: &NameRef) -> NameJson {
    match name {
        NameRef::Check(g) => NameJson::Check(g.clone()),
        NameRef::RSlalom(a) => NameJson::RankTrace(poset.name(*a).to_string()),
    }
}

pub fn decode_name(poset: &RankedPoset, name: &NameJson) -> Result<NameRef> {
    Ok(match name {
        NameJson::Check(g) => NameRef::Check(g.clone()),
        NameJson::RankTrace(a) => NameRef::RSlalom(poset.id(a)?),
    })
}

pub fn encode(poset: &RankedPoset, p: &NQCondition) -> ConditionJson {
    let mut coordinates: Vec<CoordinateJson> = p
        .entries()
        .iter()
        .map(|(&x, a)| {
            let mut f: Vec<NameJson> = a.f.iter().map(|n| encode_name(poset, n)).collect();
            f.sort();
            CoordinateJson {
                element: poset.name(x).to_string(),
                s: a.s.clone(),
                w: a.w,
                f,
            }
        })
        .collect();
    coordinates.sort_by(|a, b| a.element.cmp(&b.element));
    ConditionJson { coordinates }
}

pub fn decode(poset: &RankedPoset, doc: &ConditionJson) -> Result<NQCondition> {
    let mut p = NQCondition::empty();
    for c in &doc.coordinates {
        let x = poset.id(&c.element)?;
        let mut f = BTreeSet::new();
        for n in &c.f {
            if !f.insert(decode_name(poset, n)?) {
                return Err(Error::Input(format!("duplicate name at {}", c.element)));
            }
        }
        if p.insert(x, Atom::new(c.s.clone(), c.w, f)).is_some() {
            return Err(Error::Input(format!("duplicate coordinate {}", c.element)));
        }
    }
    Ok(p)
}

pub fn to_json_string(poset: &RankedPoset, p: &NQCondition) -> String {
    serde_json::to_string(&encode(poset, p)).expect("conditions serialize")
}

pub fn from_json_str(poset: &RankedPoset, text: &str) -> Result<NQCondition> {
    let doc: ConditionJson = serde_json::from_str(text).map_err(|e| Error::Input(e.to_string()))?;
    decode(poset, &doc)
}
