//! Seeded generators for posets, slaloms, names and conditions. Conditions
//! are produced by chaining constructive operations, so every generated
//! condition comes with a verified chain of extensions.

use std::collections::BTreeSet;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cantor::ClopenIndex;
use crate::error::Result;
use crate::forcing::{Atom, Forcing, NQCondition, PreExtension};
use crate::ground::GroundFunction;
use crate::names::NameRef;
use crate::poset::{ElementId, ElementSet, RankedPoset};
use crate::slalom::PartialSlalom;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A partial slalom of length `len` with values below `max_index`.
pub fn slalom(rng: &mut SeededRng, len: usize, max_index: u64) -> PartialSlalom {
    let entries = (0..len)
        .map(|n| {
            let k = rng.gen_range(0..=n.min(max_index as usize));
            (0..max_index).choose_multiple(rng, k).into_iter().map(ClopenIndex::from).collect()
        })
        .collect();
    PartialSlalom::new(entries).expect("entries respect the size bound")
}

pub fn ground_function(rng: &mut SeededRng, name: impl Into<String>, max_index: u64) -> GroundFunction {
    let len = rng.gen_range(0..4);
    let prefix = (0..len).map(|_| rng.gen_range(0..max_index)).collect();
    GroundFunction::new(name, prefix, rng.gen_range(0..max_index))
}

/// A random ranked poset on `size` elements named `e0, e1, ...`. Each pair
/// `i < j` is ordered with probability `density`; maximal elements are always
/// in the cofinal set, the others with probability one half.
pub fn poset(rng: &mut SeededRng, size: usize, density: f64) -> RankedPoset {
    let names: Vec<String> = (0..size).map(|i| format!("e{i}")).collect();
    let mut order = Vec::new();
    for i in 0..size {
        for j in i + 1..size {
            if rng.gen_bool(density) {
                order.push((i, j));
            }
        }
    }
    let has_above = |i: usize| order.iter().any(|&(x, _)| x == i);
    let cofinal: Vec<&str> = (0..size)
        .filter(|&i| !has_above(i) || rng.gen_bool(0.5))
        .map(|i| names[i].as_str())
        .collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let order: Vec<(&str, &str)> = order.iter().map(|&(i, j)| (refs[i], refs[j])).collect();
    RankedPoset::new(&refs, &order, &cofinal).expect("generated poset is valid")
}

/// `base` with an incomparable twin `x'` of every element `x`: same strict
/// lower and upper bounds, same membership in the cofinal set, same rank.
pub fn with_twins(base: &RankedPoset) -> RankedPoset {
    let spec = base.spec();
    let mut elements = spec.elements.clone();
    elements.extend(spec.elements.iter().map(|e| format!("{e}'")));
    let twin = |e: &str| format!("{e}'");
    let mut order = Vec::new();
    for (x, y) in &spec.order {
        for (a, b) in [(x.clone(), y.clone()), (twin(x), y.clone()), (x.clone(), twin(y)), (twin(x), twin(y))] {
            order.push((a, b));
        }
    }
    let mut cofinal = spec.cofinal.clone();
    cofinal.extend(spec.cofinal.iter().map(|e| twin(e)));
    let e: Vec<&str> = elements.iter().map(String::as_str).collect();
    let o: Vec<(&str, &str)> = order.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let c: Vec<&str> = cofinal.iter().map(String::as_str).collect();
    RankedPoset::new(&e, &o, &c).expect("twin poset is valid")
}

/// The twin of `x` in a poset built by [`with_twins`].
pub fn twin_of(poset: &RankedPoset, x: ElementId) -> ElementId {
    poset.id(&format!("{}'", poset.name(x))).expect("element has a twin")
}

/// A name over `Q_x` whose support lies in `within`.
pub fn name_for(
    rng: &mut SeededRng,
    poset: &RankedPoset,
    x: ElementId,
    within: &ElementSet,
    max_index: u64,
) -> NameRef {
    let candidates: Vec<ElementId> = poset
        .q_of(x)
        .into_iter()
        .filter(|y| poset.down_set(*y).is_subset(within))
        .collect();
    if !candidates.is_empty() && rng.gen_bool(0.5) {
        return NameRef::RSlalom(*candidates.choose(rng).unwrap());
    }
    let id = rng.gen_range(0..1_000_000u32);
    NameRef::Check(ground_function(rng, format!("g{id}"), max_index))
}

/// One random density operation applied to `p`, with coordinates drawn from
/// the downward-closed `within`.
pub fn step(
    rng: &mut SeededRng,
    fx: &Forcing<'_>,
    p: &NQCondition,
    within: &ElementSet,
    max_index: u64,
) -> Result<NQCondition> {
    let poset = fx.poset();
    let x = *within.iter().choose(rng).expect("nonempty element set");
    match rng.gen_range(0..4) {
        0 => fx.join(p, x),
        1 => {
            let name = name_for(rng, poset, x, within, max_index);
            fx.add_name(p, x, &name)
        }
        2 => match p.domain().into_iter().choose(rng) {
            Some(y) => {
                let xi = fx.rank(y);
                let l = fx.length_at(p, xi).unwrap();
                fx.prolong(p, xi, l + rng.gen_range(1..3))
            }
            None => fx.join(p, x),
        },
        _ => match p.domain().into_iter().choose(rng) {
            Some(y) => fx.bump_weight(p, y),
            None => fx.join(p, x),
        },
    }
}

/// `steps` random operations starting from `p`.
pub fn extension(
    rng: &mut SeededRng,
    fx: &Forcing<'_>,
    p: &NQCondition,
    within: &ElementSet,
    steps: usize,
    max_index: u64,
) -> Result<NQCondition> {
    let mut q = p.clone();
    for _ in 0..steps {
        q = step(rng, fx, &q, within, max_index)?;
    }
    Ok(q)
}

pub fn condition(
    rng: &mut SeededRng,
    fx: &Forcing<'_>,
    within: &ElementSet,
    steps: usize,
    max_index: u64,
) -> Result<NQCondition> {
    extension(rng, fx, &NQCondition::empty(), within, steps, max_index)
}

/// A random `gamma`-preextension of `p`: the part below `gamma` extended
/// by random steps, weights at `gamma` raised, and possibly fresh
/// coordinates of rank `gamma`.
pub fn preextension(
    rng: &mut SeededRng,
    fx: &Forcing<'_>,
    p: &NQCondition,
    within: &ElementSet,
    max_index: u64,
) -> Result<PreExtension> {
    let ranks: BTreeSet<usize> = within.iter().map(|&x| fx.rank(x)).collect();
    let gamma = *ranks.iter().choose(rng).expect("nonempty element set");
    let below: ElementSet = within.iter().copied().filter(|&x| fx.rank(x) < gamma).collect();
    let lower = if below.is_empty() {
        NQCondition::empty()
    } else {
        let steps = rng.gen_range(0..3);
        extension(rng, fx, &fx.restrict_below(p, gamma), &below, steps, max_index)?
    };
    let mut candidate = lower.merged(&fx.restrict_from(p, gamma));
    for x in fx.stratum(p, gamma) {
        candidate.get_mut(x).unwrap().w += rng.gen_range(0..3);
    }
    let fresh: Vec<ElementId> = within
        .iter()
        .copied()
        .filter(|&x| fx.rank(x) == gamma && !p.contains(x))
        .collect();
    let len = fx.length_at(p, gamma).unwrap_or_else(|| rng.gen_range(0..3));
    for x in fresh {
        let forced = fx.stratum(&candidate, gamma).is_empty();
        if forced || rng.gen_bool(0.5) {
            candidate.insert(x, Atom::blank(len));
        }
    }
    Ok(PreExtension::new(p.clone(), gamma, candidate))
}

/// A uniformly chosen downward-closed subset of `within`.
pub fn downward_closed_subset(rng: &mut SeededRng, poset: &RankedPoset, within: &ElementSet) -> ElementSet {
    let all: Vec<ElementSet> = poset
        .downward_closed_sets()
        .into_iter()
        .filter(|e| e.is_subset(within))
        .collect();
    all.choose(rng).cloned().unwrap_or_default()
}
