//! Finite generic runs: a descending chain of conditions meeting a list of
//! density demands, followed by a check of the order statements on the
//! resulting slaloms. The check recomputes everything from the raw slaloms
//! with the slalom module and does not consult the forcing engine, apart from
//! the chain-soundness verdict.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::cantor::{CantorIndex, ClopenIndex};
use crate::error::{precondition, Error, Result};
use crate::forcing::{Forcing, NQCondition};
use crate::ground::GroundFunction;
use crate::jsonint::JsonIndex;
use crate::names::NameRef;
use crate::poset::{ElementId, RankedPoset};
use crate::random;
use crate::slalom::{a_stage, r_phi, PartialSlalom, RankTrace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Demand {
    Prolong { x: ElementId, n: usize },
    Join { x: ElementId },
    AddName { x: ElementId, name: NameRef },
    Witness { a: ElementId, b: ElementId, after: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Agenda {
    pub demands: Vec<Demand>,
}

impl Agenda {
    pub fn new(demands: Vec<Demand>) -> Self {
        Agenda { demands }
    }

    pub fn check(&self, poset: &RankedPoset) -> Result<()> {
        for d in &self.demands {
            match d {
                Demand::Prolong { x, .. } | Demand::Join { x } => {
                    precondition!(poset.contains(*x), "unknown element {x}")
                }
                Demand::AddName { x, name } => {
                    precondition!(poset.contains(*x), "unknown element {x}");
                    if let NameRef::RSlalom(y) = name {
                        precondition!(poset.contains(*y), "unknown element {y}");
                    }
                    precondition!(
                        name.support(poset).is_subset(&poset.q_of(*x)),
                        "{} is not a name over Q_{}",
                        name.display(poset),
                        poset.name(*x)
                    );
                }
                Demand::Witness { a, b, .. } => {
                    precondition!(poset.contains(*a) && poset.contains(*b), "unknown element");
                    precondition!(
                        !poset.leq(*a, *b),
                        "witness demand for {} <= {}",
                        poset.name(*a),
                        poset.name(*b)
                    );
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Every rank is prolonged to at least this length by the final sweep.
    pub depth: usize,
    pub seed: u64,
    /// Seeded demands mixed into the agenda.
    pub random_demands: usize,
    /// Check names available to seeded demands.
    pub ground_functions: Vec<GroundFunction>,
    /// Whether to finish with the joining, registering and prolonging sweep.
    pub sweep: bool,
}

impl RunConfig {
    pub fn new(depth: usize, seed: u64) -> Self {
        RunConfig {
            depth,
            seed,
            random_demands: 0,
            ground_functions: Vec::new(),
            sweep: true,
        }
    }
}

/// Where an obligation came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Agenda,
    Seeded,
    Sweep,
}

/// `name(n) ∈ φ_x(n)` is owed for every `n >= threshold`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub x: ElementId,
    pub name: NameRef,
    pub threshold: usize,
    pub source: Source,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessRecord {
    pub a: ElementId,
    pub b: ElementId,
    pub after: usize,
    pub m: usize,
    pub k: ClopenIndex,
    pub step: usize,
}

#[derive(Clone, Debug)]
pub struct GenericRun {
    pub chain: Vec<NQCondition>,
    pub labels: Vec<String>,
    pub obligations: Vec<Obligation>,
    pub witnesses: Vec<WitnessRecord>,
    /// Length of the rank of `x` in the first condition containing `x`.
    pub joined_at: BTreeMap<ElementId, usize>,
    pub depth: usize,
    pub seed: u64,
}

impl GenericRun {
    pub fn last(&self) -> &NQCondition {
        self.chain.last().expect("chain starts with the empty condition")
    }

    /// `φ_x`, the slalom of `x` in the last condition.
    pub fn slalom(&self, x: ElementId) -> Option<&PartialSlalom> {
        self.last().slalom(x)
    }

    pub fn traces(&self, index: &CantorIndex) -> Result<BTreeMap<ElementId, RankTrace>> {
        let mut out = BTreeMap::new();
        for (&x, atom) in self.last().entries() {
            if !atom.s.is_empty() {
                out.insert(x, r_phi(&atom.s, index)?);
            }
        }
        Ok(out)
    }
}

struct Runner<'f, 'a> {
    fx: &'f Forcing<'a>,
    run: GenericRun,
}

impl Runner<'_, '_> {
    fn push(&mut self, q: NQCondition, label: String) -> Result<()> {
        let fx = self.fx;
        let step = self.run.chain.len();
        let prev = self.run.last();
        if q == *prev {
            return Ok(());
        }
        let v = fx.validate(&q, None);
        if let Some(v) = v.first() {
            return Err(Error::CertificateFailure(format!("link {step} ({label}): {v}")));
        }
        if let Some(v) = fx.leq_failure(&q, prev)? {
            return Err(Error::CertificateFailure(format!("link {step} ({label}): {v}")));
        }
        let fresh: Vec<ElementId> = q.entries().keys().copied().filter(|&x| !prev.contains(x)).collect();
        for x in fresh {
            let len = fx.length_at(&q, fx.rank(x)).unwrap();
            self.run.joined_at.insert(x, len);
        }
        self.run.chain.push(q);
        self.run.labels.push(label);
        Ok(())
    }

    fn apply(&mut self, d: &Demand, source: Source) -> Result<()> {
        let fx = self.fx;
        let poset = fx.poset();
        let p = self.run.last().clone();
        match d {
            Demand::Join { x } => self.push(fx.join(&p, *x)?, format!("join {}", poset.name(*x))),
            Demand::Prolong { x, n } => {
                let q = fx.join(&p, *x)?;
                let q = fx.prolong(&q, fx.rank(*x), *n)?;
                self.push(q, format!("prolong {} to {n}", poset.name(*x)))
            }
            Demand::AddName { x, name } => {
                if p.get(*x).is_some_and(|a| a.f.contains(name)) {
                    return Ok(());
                }
                let q = fx.add_name(&p, *x, name)?;
                let threshold = q.slalom(*x).unwrap().len();
                self.push(q, format!("add {} at {}", name.display(poset), poset.name(*x)))?;
                self.run.obligations.push(Obligation {
                    x: *x,
                    name: name.clone(),
                    threshold,
                    source,
                });
                Ok(())
            }
            Demand::Witness { a, b, after } => {
                let w = fx.incompatibility_witness(&p, *a, *b, *after)?;
                let label = format!("witness {} vs {} after {after}", poset.name(*a), poset.name(*b));
                self.push(w.q, label)?;
                self.run.witnesses.push(WitnessRecord {
                    a: *a,
                    b: *b,
                    after: *after,
                    m: w.m,
                    k: w.k,
                    step: self.run.chain.len() - 1,
                });
                Ok(())
            }
        }
    }
}

fn seeded_demands(poset: &RankedPoset, config: &RunConfig) -> Vec<Demand> {
    let mut rng = random::rng(config.seed);
    let ids: Vec<ElementId> = poset.ids().collect();
    let mut out = Vec::new();
    for _ in 0..config.random_demands {
        let x = *ids.choose(&mut rng).unwrap();
        let d = match rng.gen_range(0..3) {
            0 => Demand::Join { x },
            1 => Demand::Prolong {
                x,
                n: rng.gen_range(1..=config.depth.max(1)),
            },
            _ => {
                let below = poset.q_of(x).into_iter().choose(&mut rng);
                match (config.ground_functions.choose(&mut rng), below) {
                    (Some(g), None) => Demand::AddName {
                        x,
                        name: NameRef::Check(g.clone()),
                    },
                    (Some(g), Some(y)) => Demand::AddName {
                        x,
                        name: if rng.gen_bool(0.5) {
                            NameRef::Check(g.clone())
                        } else {
                            NameRef::RSlalom(y)
                        },
                    },
                    (None, Some(y)) => Demand::AddName {
                        x,
                        name: NameRef::RSlalom(y),
                    },
                    (None, None) => Demand::Join { x },
                }
            }
        };
        out.push(d);
    }
    out
}

/// Meets the agenda (with seeded demands interleaved), then, when sweeping,
/// joins every element, registers `ṙ_a` at `b` for every `a ≪ b`, and
/// prolongs every rank to `config.depth`.
pub fn run(fx: &Forcing<'_>, agenda: &Agenda, config: &RunConfig) -> Result<GenericRun> {
    let poset = fx.poset();
    agenda.check(poset)?;
    let mut demands: Vec<(Demand, Source)> =
        agenda.demands.iter().cloned().map(|d| (d, Source::Agenda)).collect();
    let mut rng = random::rng(config.seed ^ 0x5eed);
    for d in seeded_demands(poset, config) {
        let at = rng.gen_range(0..=demands.len());
        demands.insert(at, (d, Source::Seeded));
    }
    let mut r = Runner {
        fx,
        run: GenericRun {
            chain: vec![NQCondition::empty()],
            labels: vec!["start".into()],
            obligations: Vec::new(),
            witnesses: Vec::new(),
            joined_at: BTreeMap::new(),
            depth: config.depth,
            seed: config.seed,
        },
    };
    for (d, source) in &demands {
        r.apply(d, *source)?;
    }
    if !config.sweep {
        return Ok(r.run);
    }
    for x in poset.ids() {
        r.apply(&Demand::Join { x }, Source::Sweep)?;
    }
    for b in poset.ids() {
        for a in poset.q_of(b) {
            r.apply(
                &Demand::AddName {
                    x: b,
                    name: NameRef::RSlalom(a),
                },
                Source::Sweep,
            )?;
        }
    }
    let ranks: BTreeSet<usize> = poset.ids().map(|x| poset.rank(x)).collect();
    for xi in ranks {
        let x = poset.ids().find(|&x| poset.rank(x) == xi).unwrap();
        r.apply(&Demand::Prolong { x, n: config.depth }, Source::Sweep)?;
    }
    Ok(r.run)
}

/// One checked statement of a report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub claim: String,
    pub statement: String,
    pub subject: String,
    pub pass: bool,
    pub data: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ElementReport {
    pub element: String,
    pub rank: usize,
    pub slalom: PartialSlalom,
    pub trace: Vec<JsonIndex>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    pub a: String,
    pub b: String,
    pub after: usize,
    pub m: usize,
    pub k: JsonIndex,
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub depth: usize,
    pub chain: Vec<String>,
    pub elements: Vec<ElementReport>,
    pub witnesses: Vec<WitnessReport>,
    pub verdicts: Vec<Verdict>,
    pub passed: usize,
    pub failed: usize,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed {}  depth {}  chain of {} conditions", self.seed, self.depth, self.chain.len());
        for e in &self.elements {
            let _ = writeln!(s, "  {} (rank {}): {}", e.element, e.rank, e.slalom);
        }
        for v in &self.verdicts {
            let mark = if v.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{mark} {:<18} {}  [{}]", v.claim, v.subject, v.statement);
        }
        let _ = writeln!(s, "{} passed, {} failed", self.passed, self.failed);
        s
    }
}

struct Checker<'r> {
    poset: &'r RankedPoset,
    index: &'r CantorIndex,
    run: &'r GenericRun,
    traces: BTreeMap<ElementId, RankTrace>,
    verdicts: Vec<Verdict>,
}

impl Checker<'_> {
    fn phi(&self, x: ElementId) -> PartialSlalom {
        self.run.slalom(x).cloned().unwrap_or_default()
    }

    fn verdict(&mut self, claim: &str, statement: &str, subject: String, pass: bool, data: serde_json::Value) {
        self.verdicts.push(Verdict {
            claim: claim.into(),
            statement: statement.into(),
            subject,
            pass,
            data,
        });
    }

    fn value(&self, name: &NameRef, n: usize) -> Option<ClopenIndex> {
        match name {
            NameRef::Check(g) => Some(g.eval(n)),
            NameRef::RSlalom(y) => self.traces.get(y).and_then(|t| t.values.get(n).cloned()),
        }
    }

    /// First `n` in `from..len(φ_x)` with `name(n) ∉ φ_x(n)`.
    fn localize_failure(&self, x: ElementId, name: &NameRef, from: usize) -> Option<(usize, Option<ClopenIndex>)> {
        let phi = self.phi(x);
        (from..phi.len()).find_map(|n| match self.value(name, n) {
            Some(v) if phi.entry(n).unwrap().contains(&v) => None,
            v => Some((n, v)),
        })
    }

    fn localize(&mut self, claim: &str, statement: &str, ob: &Obligation) {
        let phi_len = self.phi(ob.x).len();
        let fail = self.localize_failure(ob.x, &ob.name, ob.threshold);
        let subject = format!("{} at {}", ob.name.display(self.poset), self.poset.name(ob.x));
        let data = json!({
            "from": ob.threshold,
            "to": phi_len,
            "source": ob.source,
            "first_miss": fail.as_ref().map(|(n, v)| json!({"n": n, "value": v.as_ref().map(|v| v.to_string())})),
        });
        self.verdict(claim, statement, subject, fail.is_none(), data);
    }

    fn same_rank_pair(&mut self, x: ElementId, y: ElementId) -> Result<()> {
        let t = self.run.joined_at[&x].max(self.run.joined_at[&y]);
        if !(self.run.joined_at.contains_key(&x) && self.run.joined_at.contains_key(&y)) {
            return Ok(());
        }
        let (px, py) = (self.phi(x), self.phi(y));
        let len = px.len().min(py.len());
        let miss = (t..len).find(|&n| !px.entry(n).unwrap().is_subset(py.entry(n).unwrap()));
        let subject = format!("{} < {}", self.poset.name(x), self.poset.name(y));
        self.verdict(
            "cannibal",
            "φ_x(n) ⊆ φ_y(n) for every stage n from the threshold, for x < y of equal rank",
            subject.clone(),
            miss.is_none(),
            json!({"from": t, "to": len, "first_miss": miss}),
        );
        let (pass, data) = if len == 0 || t + 1 >= len {
            (true, json!({"from": t, "to": len, "vacuous": true}))
        } else {
            let lo = t.saturating_sub(1);
            let ax = a_stage(&px, lo, len - 1, self.index)?;
            let ay = a_stage(&py, lo, len - 1, self.index)?;
            (
                ax.is_subset(&ay),
                json!({"from": t, "to": len, "measure_x": ax.measure().to_string(), "measure_y": ay.measure().to_string()}),
            )
        };
        self.verdict(
            "order_preserving",
            "the stage union of φ_x lies inside that of φ_y from the threshold, for x < y of equal rank",
            subject,
            pass,
            data,
        );
        Ok(())
    }

    fn witness(&mut self, w: &WitnessRecord) {
        let phi_a = self.phi(w.a);
        let in_a = phi_a.entry(w.m).is_some_and(|e| e.contains(&w.k));
        let r_b = self.traces.get(&w.b).and_then(|t| t.values.get(w.m));
        let pass = w.m > w.after && in_a && r_b == Some(&w.k);
        self.verdict(
            "incomparability",
            "r_b(m) ∈ φ_a(m) at a stage m past the bound, so H_a is not inside H_b",
            format!("{} vs {}", self.poset.name(w.a), self.poset.name(w.b)),
            pass,
            json!({
                "after": w.after,
                "m": w.m,
                "k": w.k.to_string(),
                "r_b_m": r_b.map(|v| v.to_string()),
                "k_in_phi_a": in_a,
            }),
        );
    }
}

/// Checks the run: chain soundness, localization of every registered name,
/// same-rank inclusion and stage-set inclusion for `x < y`, localization of
/// `ṙ_a` at `b` for `a ≪ b`, and every recorded incompatibility witness.
pub fn verify(fx: &Forcing<'_>, run: &GenericRun) -> Result<Report> {
    let poset = fx.poset();
    let index = fx.index();
    let mut c = Checker {
        poset,
        index,
        run,
        traces: run.traces(index)?,
        verdicts: Vec::new(),
    };

    let mut bad_link = None;
    for (i, pair) in run.chain.windows(2).enumerate() {
        let valid = fx.validate(&pair[1], None).is_empty();
        if !valid || !fx.leq(&pair[1], &pair[0])? {
            bad_link = Some(i + 1);
            break;
        }
    }
    c.verdict(
        "chain",
        "every condition is valid and extends its predecessor",
        format!("{} links", run.chain.len() - 1),
        bad_link.is_none(),
        json!({"first_bad_link": bad_link}),
    );

    for ob in run.obligations.iter().filter(|ob| ob.source != Source::Sweep) {
        c.localize("localize", "f(n) ∈ φ_x(n) for every stage n from the threshold", ob);
    }
    for b in poset.ids() {
        for a in poset.q_of(b) {
            let name = NameRef::RSlalom(a);
            let first = run
                .obligations
                .iter()
                .filter(|ob| ob.x == b && ob.name == name)
                .min_by_key(|ob| ob.threshold);
            if let Some(ob) = first {
                c.localize("order_preserving", "r_a(n) ∈ φ_b(n) from the threshold, for a ≪ b", ob);
            }
        }
    }
    for x in poset.ids() {
        for y in poset.ids() {
            if poset.less(x, y) && poset.rank(x) == poset.rank(y) {
                c.same_rank_pair(x, y)?;
            }
        }
    }
    for w in &run.witnesses {
        c.witness(w);
    }

    let elements = run
        .last()
        .entries()
        .iter()
        .map(|(&x, a)| ElementReport {
            element: poset.name(x).to_string(),
            rank: poset.rank(x),
            slalom: a.s.clone(),
            trace: c.traces.get(&x).map_or_else(Vec::new, |t| t.values.iter().cloned().map(JsonIndex).collect()),
        })
        .collect();
    let witnesses = run
        .witnesses
        .iter()
        .map(|w| WitnessReport {
            a: poset.name(w.a).to_string(),
            b: poset.name(w.b).to_string(),
            after: w.after,
            m: w.m,
            k: JsonIndex(w.k.clone()),
            step: w.step,
        })
        .collect();
    let passed = c.verdicts.iter().filter(|v| v.pass).count();
    let failed = c.verdicts.len() - passed;
    Ok(Report {
        seed: run.seed,
        depth: run.depth,
        chain: run.labels.clone(),
        elements,
        witnesses,
        verdicts: c.verdicts,
        passed,
        failed,
    })
}
