//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails or overruns its time limit.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;

use nullslalom::cantor::{CantorIndex, ClopenSet, ScaleFunction};
use nullslalom::dyadic::Dyadic;
use nullslalom::forcing::{Atom, Forcing, NQCondition, PreExtension};
use nullslalom::generic::{run, verify};
use nullslalom::ground::GroundFunction;
use nullslalom::loc::{
    loc_star_add_function, loc_star_leq, loc_star_link, loc_star_linked_key, loc_star_prolong, LocStarCondition,
};
use nullslalom::names::NameRef;
use nullslalom::poset::{ElementId, ElementSet, RankedPoset};
use nullslalom::random::{self, SeededRng};
use nullslalom::scenario::Scenario;
use nullslalom::slalom::{r_phi, r_stage_disjointness, PartialSlalom};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

// ---------------------------------------------------------------- oracles

/// Sets of measure `2^-h` in enumeration order, by brute force over small depths.
fn brute_enumeration(h: u32, max_depth: u32, want: usize) -> Vec<BTreeSet<u64>> {
    let mut out = Vec::new();
    for d in h..=max_depth {
        let k = 1usize << (d - h);
        let n_addr = 1u64 << d;
        let mut combo: Vec<u64> = (0..k as u64).collect();
        loop {
            let set: BTreeSet<u64> = combo.iter().copied().collect();
            // minimal depth: not a union of whole sibling pairs
            let reducible = d > 0 && set.iter().all(|a| set.contains(&(a ^ 1)));
            if !reducible {
                out.push(set);
                if out.len() == want {
                    return out;
                }
            }
            // next combination in lexicographic order
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if combo[i] < n_addr - (k - i) as u64 {
                    combo[i] += 1;
                    for j in i + 1..k {
                        combo[j] = combo[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX || k == 0 {
                break;
            }
        }
    }
    out
}

fn mask_of(set: &ClopenSet, depth: u32) -> Vec<bool> {
    set.to_mask(depth).expect("small depth")
}

fn popcount(mask: &[bool]) -> usize {
    mask.iter().filter(|&&b| b).count()
}

fn u64_entries(s: &PartialSlalom) -> Vec<BTreeSet<u64>> {
    s.entries()
        .iter()
        .map(|e| e.iter().map(|v| v.try_into().expect("small value")).collect())
        .collect()
}

/// The weighted localization order, written out from its definition.
fn loc_star_oracle(p: &LocStarCondition, q: &LocStarCondition) -> bool {
    let (sp, sq) = (u64_entries(&p.s), u64_entries(&q.s));
    let (lp, lq) = (sp.len(), sq.len());
    if lq > lp || sp[..lq] != sq[..] || q.w > p.w || !q.f.is_subset(&p.f) {
        return false;
    }
    for n in lq..lp {
        for f in &q.f {
            if !sp[n].contains(&f.eval_u64(n).unwrap()) {
                return false;
            }
        }
        if sp[n].len() > q.w + (n - lq) {
            return false;
        }
    }
    p.w <= q.w + (lp - lq)
}

fn loc_star_valid(p: &LocStarCondition) -> bool {
    p.f.len() <= p.w && p.w <= p.s.len() && p.s.entries().iter().enumerate().all(|(n, e)| e.len() <= n)
}

fn in_w_oracle(fx: &Forcing<'_>, p: &NQCondition) -> bool {
    let poset = fx.poset();
    let mut by_rank: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (&x, a) in p.entries() {
        if 2 * a.f.len() > a.w {
            return false;
        }
        let e = by_rank.entry(poset.rank(x)).or_insert((0, a.s.len()));
        e.0 += a.w;
    }
    by_rank.values().all(|&(w, l)| 2 * w <= l)
}

fn subsets<T: Copy>(items: &[T]) -> Vec<Vec<T>> {
    (0u32..1 << items.len())
        .map(|m| items.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, &x)| x).collect())
        .collect()
}

/// For `p <= q`: every `E ⊆ D^p_ξ` has `Σ_E w^p <= Σ_{E ∩ D^q} w^q + (l^p_ξ - l^q_ξ)`.
fn discard_terms(fx: &Forcing<'_>, p: &NQCondition, q: &NQCondition) -> Result<(), String> {
    for xi in fx.ranks(q) {
        let dp = fx.stratum(p, xi);
        let (lp, lq) = (fx.length_at(p, xi).unwrap(), fx.length_at(q, xi).unwrap());
        for e in subsets(&dp) {
            let left: usize = e.iter().map(|x| p.get(*x).unwrap().w).sum();
            let right: usize = e.iter().filter_map(|x| q.get(*x)).map(|a| a.w).sum::<usize>() + (lp - lq);
            ensure!(left <= right, "discard-terms fails at rank {xi}: {left} > {right}");
        }
    }
    Ok(())
}

fn fresh_fx<'a>(poset: &'a RankedPoset, idx: &'a CantorIndex) -> Forcing<'a> {
    Forcing::new(poset, idx)
}

fn random_poset(rng: &mut SeededRng) -> RankedPoset {
    let size = rng.gen_range(4..=6);
    random::poset(rng, size, 0.4)
}

// ---------------------------------------------------------------- criteria

fn clopen_algebra() -> Outcome {
    let idx = CantorIndex::new(ScaleFunction::min_log());
    let mut checked = 0;
    for n in 0..=3usize {
        let h = idx.scale().get(n).unwrap() as u32;
        let expected = brute_enumeration(h, h + 3, 16);
        ensure!(
            n > 0 || expected.len() == 1,
            "stage 0 should hold only the whole space"
        );
        if expected.len() < 16 {
            ensure!(idx.set_at(n, &BigUint::from(expected.len())).is_err(), "stage {n} enumerates too far");
        }
        let mut seen = BTreeSet::new();
        for (i, addrs) in expected.iter().enumerate() {
            let got = ok(idx.set_at(n, &BigUint::from(i)), "set_at")?;
            let depth = got.depth();
            let values: BTreeSet<u64> = got
                .addresses_at(depth)
                .iter()
                .map(|a| a.bits().iter().fold(0u64, |acc, &b| acc << 1 | u64::from(b)))
                .collect();
            ensure!(&values == addrs, "C^{n}_{i}: got {values:?}, expected {addrs:?}");
            ensure!(got.measure() == Dyadic::pow2_inv(h as u64), "C^{n}_{i} has the wrong measure");
            ensure!(ok(idx.index_of(n, &got), "index_of")? == BigUint::from(i), "index_of(C^{n}_{i}) != {i}");
            ensure!(seen.insert(values), "C^{n}_{i} repeats");
            checked += 1;
        }
    }
    let mut rng = random::rng(1);
    for _ in 0..1000 {
        let (da, db) = (rng.gen_range(0..=8u32), rng.gen_range(0..=8u32));
        let ma: Vec<bool> = (0..1 << da).map(|_| rng.gen_bool(0.5)).collect();
        let mb: Vec<bool> = (0..1 << db).map(|_| rng.gen_bool(0.5)).collect();
        let a = ClopenSet::from_mask(da, &ma).unwrap();
        let b = ClopenSet::from_mask(db, &mb).unwrap();
        let (u, i) = (a.union(&b), a.intersect(&b));
        ensure!(&u.measure() + &i.measure() == &a.measure() + &b.measure(), "modularity fails");
        let (xa, xb) = (mask_of(&a, 8), mask_of(&b, 8));
        let xu: Vec<bool> = xa.iter().zip(&xb).map(|(p, q)| *p || *q).collect();
        let xi: Vec<bool> = xa.iter().zip(&xb).map(|(p, q)| *p && *q).collect();
        ensure!(mask_of(&u, 8) == xu && mask_of(&i, 8) == xi, "union or intersection differs from bitmask");
        ensure!(u.measure() == Dyadic::new(popcount(&xu) as u64, 8), "measure differs from the address count");
    }
    Ok(format!("{checked} enumerated sets, 1000 modular pairs"))
}

fn rank_construction() -> Outcome {
    let idx = CantorIndex::new(ScaleFunction::min_log());
    const D: u32 = 14;
    let mut rng = random::rng(2);
    let mut stages = 0;
    // (stage, index) -> mask at depth D, or None past depth D
    let mut masks: BTreeMap<(usize, u64), Option<Vec<bool>>> = BTreeMap::new();
    let mut mask_at = |n: usize, i: u64| -> Result<Option<Vec<bool>>, String> {
        if let Some(m) = masks.get(&(n, i)) {
            return Ok(m.clone());
        }
        let c = ok(idx.set_at(n, &BigUint::from(i)), "set_at")?;
        let m = (c.depth() <= D).then(|| mask_of(&c, D));
        masks.insert((n, i), m.clone());
        Ok(m)
    };
    for _ in 0..500 {
        let len = rng.gen_range(1..=6);
        let phi = random::slalom(&mut rng, len, 32);
        let trace = ok(r_phi(&phi, &idx), "r_phi")?;
        let mut r_mask = vec![true; 1 << D];
        let mut a_mask = vec![false; 1 << D];
        for n in 0..len {
            let h = idx.scale().get(n).unwrap() as u32;
            let block = 1usize << (D - h);
            if n > 0 {
                let mut container = r_mask.clone();
                for j in phi.entry(n).unwrap() {
                    let j: u64 = j.try_into().unwrap();
                    let m = mask_at(n, j)?.ok_or(format!("C^{n}_{j} is deeper than the oracle depth"))?;
                    for (c, x) in container.iter_mut().zip(&m) {
                        *c &= !x;
                    }
                    for (a, x) in a_mask.iter_mut().zip(&m) {
                        *a |= x;
                    }
                }
                let mut found = None;
                for i in 0u64..1 << 16 {
                    if let Some(m) = mask_at(n, i)? {
                        if m.iter().zip(&container).all(|(x, c)| !x || *c) {
                            found = Some((i, m));
                            break;
                        }
                    }
                }
                let (first, set) = found.ok_or(format!("stage {n}: no enumerated set inside the container"))?;
                ensure!(trace.values[n] == BigUint::from(first), "r({n}) = {} but oracle gives {first}", trace.values[n]);
                r_mask = set;
            }
            ensure!(mask_of(&trace.sets[n], D) == r_mask, "stage set {n} differs from oracle");
            ensure!(popcount(&r_mask) == block, "R_{n} has the wrong measure");
            ensure!(!r_mask.iter().zip(&a_mask).any(|(r, a)| *r && *a), "R_{n} meets A_{n}");
            let cert = ok(r_stage_disjointness(&phi, n, &idx), "certificate")?;
            ensure!(!cert.r_set.is_empty(), "R_{n} empty");
            ensure!(cert.r_set.measure() == Dyadic::pow2_inv(h as u64), "certified R_{n} has the wrong measure");
            ensure!(mask_of(&cert.a_set, D) == a_mask, "certified A_{n} differs from oracle");
            stages += 1;
        }
    }
    Ok(format!("500 slaloms, {stages} stages"))
}

fn random_loc_star(rng: &mut SeededRng, max_f: usize) -> LocStarCondition {
    let len = rng.gen_range(1..=7);
    let s = random::slalom(rng, len, 16);
    let w = rng.gen_range(0..=len);
    let k = rng.gen_range(0..=w.min(max_f));
    let f = (0..k).map(|i| random::ground_function(rng, format!("f{i}"), 16)).collect();
    LocStarCondition::new(s, w, f).unwrap()
}

fn loc_star_step(rng: &mut SeededRng, p: &LocStarCondition) -> LocStarCondition {
    if rng.gen_bool(0.5) {
        loc_star_prolong(p, p.s.len() + rng.gen_range(1..4))
    } else {
        let id = rng.gen_range(0..1000);
        loc_star_add_function(p, &random::ground_function(rng, format!("g{id}"), 16))
    }
}

fn loc_star_suite() -> Outcome {
    let mut rng = random::rng(3);
    for _ in 0..1000 {
        let p = random_loc_star(&mut rng, 4);
        let q = loc_star_prolong(&p, p.s.len() + rng.gen_range(0..4));
        ensure!(loc_star_valid(&q) && loc_star_oracle(&q, &p), "prolong output does not extend");
        ensure!(loc_star_leq(&q, &p), "engine disagrees on a prolong extension");
        let g = random::ground_function(&mut rng, "new", 16);
        let r = loc_star_add_function(&p, &g);
        ensure!(loc_star_valid(&r) && loc_star_oracle(&r, &p) && r.f.contains(&g), "add_function output fails");
        ensure!(loc_star_leq(&r, &p), "engine disagrees on an add_function extension");
    }
    let mut linked = 0;
    while linked < 200 {
        let p = random_loc_star(&mut rng, 3);
        let Some(_) = loc_star_linked_key(&p) else { continue };
        let k = rng.gen_range(0..=p.w / 2);
        let f = (0..k).map(|i| random::ground_function(&mut rng, format!("h{i}"), 16)).collect();
        let q = LocStarCondition::new(p.s.clone(), p.w, f).unwrap();
        ensure!(loc_star_linked_key(&p) == loc_star_linked_key(&q), "same (s, w) but different keys");
        let r = ok(loc_star_link(&p, &q), "link")?;
        ensure!(
            loc_star_valid(&r) && loc_star_oracle(&r, &p) && loc_star_oracle(&r, &q),
            "linked pair has no common extension"
        );
        linked += 1;
    }
    for _ in 0..500 {
        let p = random_loc_star(&mut rng, 4);
        let mut q = p.clone();
        for _ in 0..rng.gen_range(1..4) {
            q = loc_star_step(&mut rng, &q);
        }
        let mut r = q.clone();
        for _ in 0..rng.gen_range(1..4) {
            r = loc_star_step(&mut rng, &r);
        }
        ensure!(loc_star_oracle(&q, &p) && loc_star_oracle(&r, &q), "generated chain is not descending");
        ensure!(loc_star_oracle(&r, &p) && loc_star_leq(&r, &p), "transitivity fails");
    }
    Ok("1000 conditions, 200 linked pairs, 500 triples".into())
}

fn order_engine() -> Outcome {
    let mut rng = random::rng(4);
    let idx = CantorIndex::new(ScaleFunction::min_log());
    let mut restrictions = 0;
    for t in 0..500 {
        let poset = random_poset(&mut rng);
        let fx = fresh_fx(&poset, &idx);
        let all = poset.all();
        let p = ok(random::condition(&mut rng, &fx, &all, 3, 16), "generate p")?;
        let q = ok(random::extension(&mut rng, &fx, &p, &all, 2, 16), "generate q")?;
        let r = ok(random::extension(&mut rng, &fx, &q, &all, 2, 16), "generate r")?;
        for c in [&p, &q, &r] {
            ensure!(fx.is_valid(c), "triple {t}: invalid condition");
            ensure!(ok(fx.leq(c, c), "leq")?, "triple {t}: leq is not reflexive");
        }
        ensure!(ok(fx.leq(&q, &p), "leq")? && ok(fx.leq(&r, &q), "leq")?, "triple {t}: chain not descending");
        ensure!(ok(fx.leq(&r, &p), "leq")?, "triple {t}: transitivity fails");
        if t % 5 == 0 {
            for b in poset.ids() {
                let (pb, qb) = (fx.restrict_element(&p, b), fx.restrict_element(&q, b));
                ensure!(fx.is_valid(&qb) && ok(fx.leq(&qb, &pb), "leq")?, "triple {t}: restriction to Q_b");
                restrictions += 1;
            }
            for a in poset.downward_closed_sets() {
                let (pa, qa) = (p.restrict_to(&a), q.restrict_to(&a));
                ensure!(fx.is_valid(&qa) && ok(fx.leq(&qa, &pa), "leq")?, "triple {t}: restriction to A");
                restrictions += 1;
            }
        }
        discard_terms(&fx, &q, &p)?;
        discard_terms(&fx, &r, &q)?;
        discard_terms(&fx, &r, &p)?;
    }
    Ok(format!("500 triples, {restrictions} restrictions"))
}

fn amalgamation() -> Outcome {
    let mut rng = random::rng(5);
    let idx = CantorIndex::new(ScaleFunction::min_log());
    let mut cases = 0;
    while cases < 200 {
        let poset = random_poset(&mut rng);
        let fx = fresh_fx(&poset, &idx);
        let b = random::downward_closed_subset(&mut rng, &poset, &poset.all());
        if b.is_empty() {
            continue;
        }
        let a = random::downward_closed_subset(&mut rng, &poset, &b);
        let p = ok(random::condition(&mut rng, &fx, &b, 4, 16), "generate p")?;
        let r = if a.is_empty() {
            NQCondition::empty()
        } else {
            let steps = rng.gen_range(1..4);
            ok(random::extension(&mut rng, &fx, &p.restrict_to(&a), &a, steps, 16), "generate r")?
        };
        let q = ok(fx.amalgamate(&p, &r, &a), "amalgamate")?;
        ensure!(fx.validate(&q, Some(&b)).is_empty(), "case {cases}: amalgamation is invalid over B");
        ensure!(ok(fx.leq(&q, &p), "leq")?, "case {cases}: does not extend p");
        ensure!(ok(fx.leq(&q, &r), "leq")?, "case {cases}: does not extend r");
        cases += 1;
    }
    Ok("200 amalgamations".into())
}

fn repair_and_density() -> Outcome {
    let mut rng = random::rng(6);
    let idx = CantorIndex::new(ScaleFunction::min_log());
    for case in 0..300 {
        let poset = random_poset(&mut rng);
        let fx = fresh_fx(&poset, &idx);
        let all = poset.all();
        let p = ok(random::condition(&mut rng, &fx, &all, 3, 16), "generate p")?;
        let pre = ok(random::preextension(&mut rng, &fx, &p, &all, 16), "generate preextension")?;
        let v = ok(fx.preextension_violations(&pre), "preextension check")?;
        ensure!(v.is_empty(), "case {case}: generator produced a bad preextension: {}", v[0]);
        let PreExtension { base, gamma, candidate } = &pre;
        let l = fx.length_at(candidate, *gamma).unwrap();
        let n_min = rng.gen_range(0..l + 6);
        let q = ok(fx.repair(&pre, n_min), "repair")?;
        ensure!(fx.is_valid(&q), "case {case}: repair output invalid");
        // (1)
        ensure!(ok(fx.leq(&q, base), "leq")?, "case {case}: q does not extend p");
        let (qb, cb) = (fx.restrict_below(&q, *gamma), fx.restrict_below(candidate, *gamma));
        ensure!(ok(fx.leq(&qb, &cb), "leq")?, "case {case}: q below gamma does not extend p' below gamma");
        // (2)
        ensure!(fx.stratum(&q, *gamma) == fx.stratum(candidate, *gamma), "case {case}: rank-gamma domain changed");
        for x in fx.stratum(&q, *gamma) {
            let (aq, ac) = (q.get(x).unwrap(), candidate.get(x).unwrap());
            ensure!(ac.s.is_prefix_of(&aq.s) && aq.w == ac.w && aq.f == ac.f, "case {case}: rank-gamma data altered");
        }
        // (3)
        let above = |c: &NQCondition| -> BTreeMap<ElementId, Atom> {
            c.entries().iter().filter(|(x, _)| fx.rank(**x) > *gamma).map(|(x, a)| (*x, a.clone())).collect()
        };
        ensure!(above(&q) == above(base), "case {case}: coordinates above gamma changed");
        // (4)
        ensure!(fx.length_at(&q, *gamma).unwrap() >= n_min, "case {case}: l_gamma below N");

        let (member, w) = ok(fx.w_dense(&p), "w_dense")?;
        ensure!(member == in_w_oracle(&fx, &p), "case {case}: W membership misreported");
        ensure!(in_w_oracle(&fx, &w), "case {case}: w_dense output not in W");
        ensure!(fx.is_valid(&w) && ok(fx.leq(&w, &p), "leq")?, "case {case}: w_dense output does not extend");
    }
    Ok("300 preextensions repaired, 300 W-extensions".into())
}

fn rename(p: &NQCondition, map: &BTreeMap<ElementId, ElementId>) -> NQCondition {
    NQCondition::from_entries(p.entries().iter().map(|(x, a)| (*map.get(x).unwrap_or(x), a.clone())))
}

/// `p` in `W` over the base elements of a twin poset and a copy of it with
/// a nonempty proper subset of coordinates moved to their twins.
fn delta_pair(
    rng: &mut SeededRng,
    fx: &Forcing<'_>,
    base: &ElementSet,
) -> Result<Option<(NQCondition, NQCondition)>, String> {
    let mut p = NQCondition::empty();
    for _ in 0..rng.gen_range(2..5) {
        p = ok(random::step(rng, fx, &p, base, 16), "generate")?;
    }
    let (_, p) = ok(fx.w_dense(&p), "w_dense")?;
    let dom: Vec<ElementId> = p.domain().into_iter().collect();
    if dom.len() < 2 {
        return Ok(None);
    }
    let k = rng.gen_range(1..dom.len());
    let moved: BTreeMap<ElementId, ElementId> = dom
        .choose_multiple(rng, k)
        .map(|&x| (x, random::twin_of(fx.poset(), x)))
        .collect();
    Ok(Some((p.clone(), rename(&p, &moved))))
}

fn delta_pairs() -> Outcome {
    let mut rng = random::rng(7);
    let idx = CantorIndex::new(ScaleFunction::min_log());
    let mut positive = 0;
    let mut negative: BTreeMap<&str, usize> = BTreeMap::new();
    while positive < 100 || negative.values().sum::<usize>() < 15 {
        let size = rng.gen_range(3..=5);
        let base_poset = random::poset(&mut rng, size, 0.4);
        let poset = random::with_twins(&base_poset);
        let fx = fresh_fx(&poset, &idx);
        let base: ElementSet = base_poset.ids().map(|x| poset.id(base_poset.name(x)).unwrap()).collect();
        let Some((p, q)) = delta_pair(&mut rng, &fx, &base)? else { continue };
        if positive < 100 {
            ensure!(fx.check_delta_pair(&p, &q).is_none(), "synthesized pair rejected");
            let r = ok(fx.delta_pair_extend(&p, &q), "delta_pair_extend")?;
            ensure!(fx.is_valid(&r), "pair {positive}: common extension invalid");
            ensure!(ok(fx.leq(&r, &p), "leq")? && ok(fx.leq(&r, &q), "leq")?, "pair {positive}: not a common extension");
            positive += 1;
        }
        // negatives from the same pair
        let root: Vec<ElementId> = p.domain().intersection(&q.domain()).copied().collect();
        let kind = ["W", "2", "4"][negative.values().sum::<usize>() % 3];
        if negative.get(kind).copied().unwrap_or(0) >= 5 {
            continue;
        }
        let bad = match kind {
            "W" => {
                // all of the rank's length spent on one weight
                let x = *q.domain().iter().next().unwrap();
                let l = q.get(x).unwrap().s.len();
                if l == 0 {
                    continue;
                }
                let mut bad = q.clone();
                bad.get_mut(x).unwrap().w = l;
                bad
            }
            "2" => {
                let x = root[0];
                let l = fx.length_at(&q, fx.rank(x)).unwrap();
                ok(fx.prolong(&q, fx.rank(x), l + 1), "prolong")?
            }
            _ => {
                let x = root[0];
                let s = &q.get(x).unwrap().s;
                let n = (1..s.len()).find(|&n| s.entry(n).unwrap().len() < n);
                let Some(n) = n else { continue };
                let mut entry = s.entry(n).unwrap().clone();
                let fresh = (0u64..).map(BigUint::from).find(|v| !entry.contains(v)).unwrap();
                entry.insert(fresh);
                let mut bad = q.clone();
                bad.get_mut(x).unwrap().s = s.with_entry(n, entry).unwrap();
                bad
            }
        };
        let v = fx.check_delta_pair(&p, &bad);
        ensure!(
            v.as_ref().is_some_and(|v| v.condition == kind),
            "negative pair for condition {kind} reported {v:?}"
        );
        ensure!(fx.delta_pair_extend(&p, &bad).is_err(), "negative pair for condition {kind} accepted");
        *negative.entry(kind).or_default() += 1;
    }
    // condition 5: a renamed coordinate below a root coordinate loses a name
    let poset = RankedPoset::new(&["u", "z", "z'"], &[("z", "u"), ("z'", "u")], &["u"]).unwrap();
    let fx = fresh_fx(&poset, &idx);
    let [u, z, z2] = ["u", "z", "z'"].map(|n| poset.id(n).unwrap());
    for i in 0..5u64 {
        let mut p = NQCondition::empty();
        p = ok(fx.add_name(&p, u, &NameRef::Check(GroundFunction::constant("c", i))), "add_name")?;
        for j in 0..=i % 2 {
            let g = GroundFunction::new(format!("g{j}"), vec![i, j], i + j);
            p = ok(fx.add_name(&p, z, &NameRef::Check(g)), "add_name")?;
        }
        let (_, p) = ok(fx.w_dense(&p), "w_dense")?;
        let mut q = rename(&p, &[(z, z2)].into());
        let name = q.get(z2).unwrap().f.iter().next().cloned().unwrap();
        q.get_mut(z2).unwrap().f.remove(&name);
        let v = fx.check_delta_pair(&p, &q);
        ensure!(v.as_ref().is_some_and(|v| v.condition == "5"), "negative pair for condition 5 reported {v:?}");
        ensure!(fx.delta_pair_extend(&p, &q).is_err(), "negative pair for condition 5 accepted");
        *negative.entry("5").or_default() += 1;
    }
    let total: usize = negative.values().sum();
    ensure!(total == 20, "built {total} negative pairs");
    Ok(format!("100 pairs extended, negatives rejected {negative:?}"))
}

fn check_witness(fx: &Forcing<'_>, p: &NQCondition, a: ElementId, b: ElementId, m_min: usize) -> Result<(), String> {
    let w = ok(fx.incompatibility_witness(p, a, b, m_min), "witness")?;
    ensure!(w.m > m_min, "m = {} is not past {m_min}", w.m);
    ensure!(fx.is_valid(&w.q) && ok(fx.leq(&w.q, p), "leq")?, "witness condition does not extend p");
    let decided = ok(fx.decide(&NameRef::RSlalom(b), &w.q, w.m), "decide")?;
    ensure!(decided.as_ref() == Some(&w.k), "decided r_b(m) is {decided:?}, k = {}", w.k);
    ensure!(w.q.slalom(a).unwrap().entry(w.m).unwrap().contains(&w.k), "k is missing from s_a(m)");
    let trace = ok(r_phi(w.q.slalom(b).unwrap(), fx.index()), "r_phi")?;
    ensure!(trace.values[w.m] == w.k, "independent r_b(m) = {} differs from k", trace.values[w.m]);
    Ok(())
}

fn witnesses() -> Outcome {
    let mut rng = random::rng(8);
    let idx = CantorIndex::new(ScaleFunction::min_log());
    let antichain = RankedPoset::new(&["a", "b"], &[], &["a", "b"]).unwrap();
    let fx = fresh_fx(&antichain, &idx);
    let (a, b) = (antichain.id("a").unwrap(), antichain.id("b").unwrap());
    let mut count = 0;
    for m in [0, 5, 11] {
        check_witness(&fx, &NQCondition::empty(), a, b, m)?;
        check_witness(&fx, &NQCondition::empty(), b, a, m)?;
        count += 2;
    }
    let mut posets = 0;
    while posets < 20 {
        let poset = random_poset(&mut rng);
        let Some(&(a, b)) = poset.non_leq_pairs().choose(&mut rng) else { continue };
        let fx = fresh_fx(&poset, &idx);
        let p = ok(random::condition(&mut rng, &fx, &poset.all(), 3, 16), "generate p")?;
        for m in [0, 5, 11] {
            check_witness(&fx, &p, a, b, m).map_err(|e| format!("{} vs {}, M = {m}: {e}", poset.name(a), poset.name(b)))?;
            count += 1;
        }
        posets += 1;
    }
    Ok(format!("{count} witnesses"))
}

fn end_to_end() -> Outcome {
    let sc = ok(Scenario::from_json(include_str!("../../../scenarios/two_chains.json")), "scenario")?;
    let poset = ok(sc.poset(), "poset")?;
    ensure!(poset.len() == 4 && poset.non_leq_pairs().len() == 10, "unexpected poset");
    ensure!(sc.depth == 8 && sc.scale == nullslalom::scenario::ScaleSpec::Preset("min_log".into()), "unexpected setup");
    let idx = ok(sc.index(), "index")?;
    let agenda = ok(sc.agenda(&poset), "agenda")?;
    let report = || -> Result<_, String> {
        let fx = Forcing::new(&poset, &idx);
        let r = ok(run(&fx, &agenda, &sc.run_config()), "run")?;
        ok(verify(&fx, &r), "verify")
    };
    let first = report()?;
    let second = report()?;
    ensure!(first.to_json() == second.to_json(), "rerun differs");
    for v in &first.verdicts {
        ensure!(v.pass, "{} {} failed", v.claim, v.subject);
    }
    for claim in ["chain", "localize", "cannibal", "order_preserving", "incomparability"] {
        ensure!(first.verdicts.iter().any(|v| v.claim == claim), "no {claim} verdict");
    }
    let mut per_pair: BTreeMap<(String, String), usize> = BTreeMap::new();
    for w in &first.witnesses {
        *per_pair.entry((w.a.clone(), w.b.clone())).or_default() += 1;
    }
    for (x, y) in poset.non_leq_pairs() {
        let n = per_pair.get(&(poset.name(x).to_string(), poset.name(y).to_string())).copied().unwrap_or(0);
        ensure!(n >= 2, "{} vs {} has {n} witnesses", poset.name(x), poset.name(y));
    }
    let ll = first.verdicts.iter().any(|v| v.claim == "order_preserving" && v.subject == "r[a0] at a1");
    ensure!(ll, "no a0 ≪ a1 verdict");
    Ok(format!("{} verdicts pass, {} witnesses, rerun identical", first.passed, first.witnesses.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("clopen algebra and enumeration", 2, clopen_algebra),
        ("rank trace construction", 10, rank_construction),
        ("weighted localization", 5, loc_star_suite),
        ("order engine", 30, order_engine),
        ("amalgamation", 30, amalgamation),
        ("repair and W-density", 10, repair_and_density),
        ("delta-pair amalgamation", 10, delta_pairs),
        ("incompatibility witness", 20, witnesses),
        ("end-to-end generic run", 60, end_to_end),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*limit);
        let (mark, detail) = match (&result, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the time limit")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if mark == "FAIL" {
            failed += 1;
        }
        println!(
            "{mark} [{}] {name} ({:.2} s, limit {limit} s): {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
