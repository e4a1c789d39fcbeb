use super::*;
use crate::cantor::ScaleFunction;
use crate::ground::GroundFunction;
use crate::slalom::r_phi;

fn index() -> CantorIndex {
    CantorIndex::new(ScaleFunction::min_log())
}

fn chain() -> RankedPoset {
    RankedPoset::new(&["a", "b"], &[("a", "b")], &["a", "b"]).unwrap()
}

fn antichain() -> RankedPoset {
    RankedPoset::new(&["a", "b"], &[], &["a", "b"]).unwrap()
}

fn two_chains() -> RankedPoset {
    RankedPoset::new(
        &["a0", "a1", "b0", "b1"],
        &[("a0", "a1"), ("b0", "b1")],
        &["a0", "a1", "b1"],
    )
    .unwrap()
}

fn check(v: u64) -> NameRef {
    NameRef::Check(GroundFunction::constant(format!("g{v}"), v))
}

fn atom(s: &[&[u64]], w: usize, f: &[NameRef]) -> Atom {
    Atom::new(PartialSlalom::from_u64s(s).unwrap(), w, f.iter().cloned().collect())
}

fn chain_condition(poset: &RankedPoset, w_a: usize) -> NQCondition {
    let (a, b) = (poset.id("a").unwrap(), poset.id("b").unwrap());
    NQCondition::from_entries([
        (a, atom(&[&[], &[2]], w_a, &[check(2)])),
        (b, atom(&[&[]], 1, &[NameRef::RSlalom(a)])),
    ])
}

#[test]
fn validate_chain_example() {
    let poset = chain();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    assert!(fx.validate(&NQCondition::empty(), None).is_empty());
    assert_eq!(poset.rank(poset.id("b").unwrap()), 1);
    assert!(fx.validate(&chain_condition(&poset, 1), None).is_empty());

    let v = fx.validate(&chain_condition(&poset, 3), None);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].clause, "3");
    assert_eq!(v[0].coordinate.as_deref(), Some("a"));
}

#[test]
fn validate_reports_ambient_and_support() {
    let poset = chain();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let a = poset.id("a").unwrap();
    let p = chain_condition(&poset, 1);
    let v = fx.validate(&p, Some(&[a].into()));
    assert!(v.iter().any(|v| v.clause == "1" && v.coordinate.as_deref() == Some("b")));

    let bad = NQCondition::from_entries([(a, atom(&[&[]], 1, &[NameRef::RSlalom(a)]))]);
    assert!(fx.validate(&bad, None).iter().any(|v| v.clause == "2"));
}

#[test]
fn leq_singleton_example() {
    let poset = RankedPoset::new(&["a"], &[], &["a"]).unwrap();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let a = poset.id("a").unwrap();
    let q = NQCondition::from_entries([(a, atom(&[&[]], 1, &[check(0)]))]);
    let p = NQCondition::from_entries([(a, atom(&[&[], &[0]], 1, &[check(0)]))]);
    assert!(fx.leq(&q, &q).unwrap());
    assert!(fx.leq(&p, &q).unwrap());
    assert!(!fx.leq(&q, &p).unwrap());

    let bad = NQCondition::from_entries([(a, atom(&[&[], &[1]], 1, &[check(0)]))]);
    assert_eq!(fx.leq_failure(&bad, &q).unwrap().unwrap().clause, "6");
}

#[test]
fn leq_weight_and_union_bounds() {
    let poset = RankedPoset::new(&["a"], &[], &["a"]).unwrap();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let a = poset.id("a").unwrap();
    let q = NQCondition::from_entries([(a, atom(&[&[], &[]], 0, &[]))]);
    // two new values at stage 2 with weight 0 and no slack
    let p = NQCondition::from_entries([(a, atom(&[&[], &[], &[0, 1]], 0, &[]))]);
    assert_eq!(fx.leq_failure(&p, &q).unwrap().unwrap().clause, "9");
    let heavy = NQCondition::from_entries([(a, atom(&[&[], &[], &[]], 2, &[]))]);
    assert_eq!(fx.leq_failure(&heavy, &q).unwrap().unwrap().clause, "8");
}

#[test]
fn restrictions_partition_by_rank() {
    let poset = chain();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let (a, b) = (poset.id("a").unwrap(), poset.id("b").unwrap());
    let p = chain_condition(&poset, 1);
    assert_eq!(fx.restrict_element(&p, b).domain(), [a].into());
    assert!(fx.restrict_element(&NQCondition::empty(), b).is_empty());
    for xi in 0..3 {
        let whole = fx
            .restrict_below(&p, xi)
            .merged(&fx.restrict_rank(&p, xi))
            .merged(&fx.restrict_from(&p, xi + 1));
        assert_eq!(whole, p);
    }
}

#[test]
fn combine_cases() {
    let poset = chain();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let a = poset.id("a").unwrap();
    let p = chain_condition(&poset, 1);
    assert_eq!(fx.combine(&fx.restrict_below(&p, 1), &p, 1).unwrap(), p);

    let q = fx.prolong(&fx.restrict_below(&p, 1), 0, 4).unwrap();
    assert_eq!(q.slalom(a).unwrap().len(), 4);
    let c = fx.combine(&q, &p, 1).unwrap();
    assert_eq!(c.get(a), q.get(a));
    assert_eq!(c.get(poset.id("b").unwrap()), p.get(poset.id("b").unwrap()));
    assert!(fx.leq(&c, &p).unwrap() && fx.leq(&c, &q).unwrap());

    let other = NQCondition::from_entries([(a, atom(&[&[], &[3]], 1, &[check(3)]))]);
    assert!(matches!(fx.combine(&other, &p, 1), Err(Error::PreconditionViolated(_))));
}

#[test]
fn decide_names_prolongs_supports() {
    let poset = chain();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let a = poset.id("a").unwrap();
    let p = NQCondition::from_entries([(a, atom(&[&[]], 0, &[]))]);
    let checks: BTreeSet<NameRef> = [check(1), check(5)].into();
    assert_eq!(fx.decide_names(&p, &checks, 10, None).unwrap(), p);

    let names: BTreeSet<NameRef> = [NameRef::RSlalom(a)].into();
    let q = fx.decide_names(&p, &names, 3, None).unwrap();
    let s = q.slalom(a).unwrap();
    assert!(s.len() >= 3);
    let trace = r_phi(s, &idx).unwrap();
    for n in 0..3 {
        assert_eq!(fx.decide(&NameRef::RSlalom(a), &q, n).unwrap(), Some(trace.values[n].clone()));
    }
    let b_only: ElementSet = [poset.id("b").unwrap()].into();
    assert!(matches!(
        fx.decide_names(&p, &names, 3, Some(&b_only)),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn repair_cases() {
    let poset = RankedPoset::new(&["a", "c"], &[], &["a", "c"]).unwrap();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let (a, c) = (poset.id("a").unwrap(), poset.id("c").unwrap());
    let p = NQCondition::from_entries([(a, atom(&[&[], &[0]], 1, &[check(0)]))]);

    let q = fx.repair(&PreExtension::new(p.clone(), 0, p.clone()), 0).unwrap();
    assert!(fx.is_valid(&q) && fx.leq(&q, &p).unwrap());

    let mut fresh = p.clone();
    fresh.insert(c, Atom::blank(2));
    let q = fx.repair(&PreExtension::new(p.clone(), 0, fresh), 0).unwrap();
    assert!(q.contains(c) && fx.is_valid(&q) && fx.leq(&q, &p).unwrap());

    let mut bumped = p.clone();
    bumped.get_mut(a).unwrap().w = 2;
    let q = fx.repair(&PreExtension::new(p.clone(), 0, bumped), 2 + 5).unwrap();
    assert!(fx.length_at(&q, 0).unwrap() >= 7);
    assert_eq!(q.get(a).unwrap().w, 2);
    assert!(fx.leq(&q, &p).unwrap());

    let mut broken = p.clone();
    broken.get_mut(a).unwrap().f.clear();
    assert!(matches!(
        fx.repair(&PreExtension::new(p, 0, broken), 0),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn density_operations() {
    let poset = chain();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let (a, b) = (poset.id("a").unwrap(), poset.id("b").unwrap());
    let p = NQCondition::from_entries([(a, atom(&[&[]], 1, &[check(4)]))]);

    let q = fx.join(&p, b).unwrap();
    assert_eq!(q.get(b), Some(&Atom::new(PartialSlalom::empty(), 0, BTreeSet::new())));
    assert_eq!(fx.prolong(&p, 0, 1).unwrap(), p);

    let q = fx.add_name(&p, a, &check(7)).unwrap();
    let at = q.get(a).unwrap();
    assert!(at.f.contains(&check(7)) && at.f.len() <= at.w);
    assert!(fx.leq(&q, &p).unwrap());

    let q = fx.add_name(&q, b, &NameRef::RSlalom(a)).unwrap();
    assert!(q.get(b).unwrap().f.contains(&NameRef::RSlalom(a)));
    let base = q.slalom(b).unwrap().len();
    assert!(matches!(
        fx.add_name(&q, a, &NameRef::RSlalom(b)),
        Err(Error::PreconditionViolated(_))
    ));

    let q = fx.prolong(&q, 1, 6).unwrap();
    assert!(fx.length_at(&q, 1).unwrap() >= 6);
    let s_a = q.slalom(a).unwrap();
    let s_b = q.slalom(b).unwrap();
    for n in base..s_b.len() {
        let v = fx.decide(&NameRef::RSlalom(a), &q, n).unwrap().unwrap();
        assert!(s_b.entry(n).unwrap().contains(&v));
    }
    assert!(s_a.len() >= s_b.len());
}

#[test]
fn w_dense_cases() {
    let poset = chain();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let a = poset.id("a").unwrap();
    assert_eq!(fx.w_dense(&NQCondition::empty()).unwrap(), (true, NQCondition::empty()));

    let p = NQCondition::from_entries([(a, atom(&[&[]], 1, &[check(1)]))]);
    let (member, q) = fx.w_dense(&p).unwrap();
    assert!(!member && fx.in_w(&q));
    assert!(q.get(a).unwrap().w >= 2);
    assert!(fx.length_at(&q, 0).unwrap() >= 2 * q.get(a).unwrap().w);

    let (member, q2) = fx.w_dense(&q).unwrap();
    assert!(member);
    assert_eq!(q2, q);

    let (_, q) = fx.w_dense(&chain_condition(&poset, 1)).unwrap();
    assert!(fx.in_w(&q) && fx.leq(&q, &chain_condition(&poset, 1)).unwrap());
}

fn rename(p: &NQCondition, from: ElementId, to: ElementId) -> NQCondition {
    let mut q = p.clone();
    let at = q.remove(from).unwrap();
    q.insert(to, at);
    q
}

#[test]
fn delta_pair_cases() {
    let poset = RankedPoset::new(&["r", "x", "y"], &[], &["r", "x", "y"]).unwrap();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let [r, x, y] = ["r", "x", "y"].map(|n| poset.id(n).unwrap());
    let p = NQCondition::from_entries([
        (r, atom(&[&[]], 1, &[check(2)])),
        (x, atom(&[&[]], 1, &[check(3)])),
    ]);
    let (_, p) = fx.w_dense(&p).unwrap();
    assert!(fx.check_delta_pair(&p, &p).is_none());
    let same = fx.delta_pair_extend(&p, &p).unwrap();
    assert!(fx.leq(&same, &p).unwrap());

    let q = rename(&p, x, y);
    assert!(fx.check_delta_pair(&p, &q).is_none());
    let e = fx.delta_pair_extend(&p, &q).unwrap();
    assert!(fx.is_valid(&e) && fx.leq(&e, &p).unwrap() && fx.leq(&e, &q).unwrap());

    let longer = fx.prolong(&q, 0, fx.length_at(&q, 0).unwrap() + 1).unwrap();
    assert_eq!(fx.check_delta_pair(&p, &longer).unwrap().condition, "2");
    assert!(matches!(fx.delta_pair_extend(&p, &longer), Err(Error::PreconditionViolated(_))));

    let outside = NQCondition::from_entries([(r, atom(&[&[]], 1, &[check(2)]))]);
    assert_eq!(fx.check_delta_pair(&outside, &p).unwrap().condition, "W");
}

#[test]
fn amalgamate_over_a_branch() {
    let poset = two_chains();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let [a0, a1, b0, b1] = ["a0", "a1", "b0", "b1"].map(|n| poset.id(n).unwrap());
    let mut p = NQCondition::empty();
    for x in [a0, a1, b0, b1] {
        p = fx.join(&p, x).unwrap();
    }
    p = fx.add_name(&p, b1, &check(1)).unwrap();
    p = fx.add_name(&p, a1, &NameRef::RSlalom(a0)).unwrap();
    let branch: ElementSet = [a0, a1].into();

    let q = fx.amalgamate(&p, &p.restrict_to(&branch), &branch).unwrap();
    assert!(fx.leq(&q, &p).unwrap());

    let mut r = p.restrict_to(&branch);
    r = fx.add_name(&r, a0, &check(6)).unwrap();
    r = fx.prolong(&r, 1, 5).unwrap();
    let q = fx.amalgamate(&p, &r, &branch).unwrap();
    assert!(fx.is_valid(&q) && fx.leq(&q, &p).unwrap() && fx.leq(&q, &r).unwrap());

    let not_closed: ElementSet = [a1].into();
    assert!(matches!(
        fx.amalgamate(&p, &p.restrict_to(&not_closed), &not_closed),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn witness_on_antichain() {
    let poset = antichain();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let (a, b) = (poset.id("a").unwrap(), poset.id("b").unwrap());
    let p = NQCondition::empty();
    for m_min in [0, 7] {
        let w = fx.incompatibility_witness(&p, a, b, m_min).unwrap();
        assert!(w.m > m_min);
        assert!(w.q.slalom(a).unwrap().entry(w.m).unwrap().contains(&w.k));
        assert_eq!(fx.decide(&NameRef::RSlalom(b), &w.q, w.m).unwrap(), Some(w.k.clone()));
        assert!(fx.leq(&w.q, &p).unwrap());
    }
}

#[test]
fn witness_across_chains() {
    let poset = two_chains();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let [a0, a1, b1] = ["a0", "a1", "b1"].map(|n| poset.id(n).unwrap());
    let p = fx.add_name(&NQCondition::empty(), a1, &NameRef::RSlalom(a0)).unwrap();
    let w = fx.incompatibility_witness(&p, b1, a1, 2).unwrap();
    assert!(w.q.slalom(b1).unwrap().entry(w.m).unwrap().contains(&w.k));
    assert!(fx.leq(&w.q, &p).unwrap());
}

#[test]
fn witness_requires_incomparability() {
    let poset = chain();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let (a, b) = (poset.id("a").unwrap(), poset.id("b").unwrap());
    assert!(matches!(
        fx.incompatibility_witness(&NQCondition::empty(), a, b, 0),
        Err(Error::PreconditionViolated(_))
    ));
}

#[test]
fn codec_round_trip() {
    let poset = chain();
    let idx = index();
    let fx = Forcing::new(&poset, &idx);
    let p = fx.prolong(&chain_condition(&poset, 1), 1, 3).unwrap();
    let text = codec::to_json_string(&poset, &p);
    let back = codec::from_json_str(&poset, &text).unwrap();
    assert_eq!(back, p);
    assert_eq!(codec::to_json_string(&poset, &back), text);
    assert!(text.contains(r#"{"r":"a"}"#));
    assert!(matches!(
        codec::from_json_str(&poset, r#"{"coordinates":[{"element":"z","s":[],"w":0}]}"#),
        Err(Error::Input(_))
    ));
}
