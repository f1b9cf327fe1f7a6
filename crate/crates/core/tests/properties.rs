use std::collections::BTreeSet;

use proptest::prelude::*;
use tdlek::agent::{init_from_formulas, replay, to_model};
use tdlek::dynamics::{apply, Reducer};
use tdlek::formula::{free_vars, match_atom, substitute, substitute_atom};
use tdlek::gen::{self, GenBounds};
use tdlek::model::validate_model;
use tdlek::parser::parse_literal;
use tdlek::scenario::parse_scenario;
use tdlek::{parse, Atom, Formula, Interval, IntervalSet, Literal, MentalOp, Substitution, TLekModel, Term, TimeExpr, TimePoint, Value};

// ---- an independent checker over the core connectives ----

type Span = (u64, Option<u64>);

fn hull(a: Option<Span>, b: Option<Span>) -> Option<Span> {
    match (a, b) {
        (Some((l1, h1)), Some((l2, h2))) => Some((l1.min(l2), h1.zip(h2).map(|(x, y)| x.max(y)))),
        (x, None) => x,
        (None, y) => y,
    }
}

fn span_of_atom(a: &Atom) -> Span {
    let lo = match a.from.as_lit() {
        Some(TimePoint::At(t)) => t,
        _ => panic!("ground"),
    };
    (lo, a.to.as_lit().and_then(TimePoint::finite))
}

fn span(f: &Formula) -> Option<Span> {
    match f {
        Formula::True | Formula::False => None,
        Formula::Atom(a) => Some(span_of_atom(a)),
        Formula::Not(a) | Formula::Belief(a) | Formula::Knowledge(a) => span(a),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => hull(span(a), span(b)),
        Formula::Always(j, _) => {
            let j = j.interval().unwrap();
            Some((j.lo(), j.hi().finite()))
        }
        Formula::Dynamic(..) => unreachable!(),
    }
}

fn inside(a: Span, b: Span) -> bool {
    a.0 >= b.0
        && match (a.1, b.1) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => x <= y,
        }
}

fn normalize(f: &Formula) -> Formula {
    use Formula as F;
    match f {
        F::Or(a, b) => F::implies(F::not(normalize(a)), normalize(b)),
        F::Iff(a, b) => {
            let (a, b) = (normalize(a), normalize(b));
            F::and(F::implies(a.clone(), b.clone()), F::implies(b, a))
        }
        F::Not(a) => F::not(normalize(a)),
        F::And(a, b) => F::and(normalize(a), normalize(b)),
        F::Implies(a, b) => F::implies(normalize(a), normalize(b)),
        F::Belief(a) => F::belief(normalize(a)),
        F::Knowledge(a) => F::knowledge(normalize(a)),
        F::Always(j, a) => F::Always(j.clone(), Box::new(normalize(a))),
        other => other.clone(),
    }
}

struct Oracle<'a> {
    m: &'a TLekModel,
}

impl Oracle<'_> {
    fn interval(&self, w: usize) -> Span {
        let spans: Vec<Span> = self.m.world(w).atoms.iter().map(span_of_atom).collect();
        if spans.is_empty() {
            return (0, None);
        }
        let lo = spans.iter().map(|s| s.0).min().unwrap();
        let hi = if spans.iter().any(|s| s.1.is_none()) { None } else { spans.iter().map(|s| s.1).max().unwrap() };
        (lo, hi)
    }

    fn related(&self, w: usize) -> Vec<usize> {
        self.m.classes().iter().find(|c| c.contains(&w)).unwrap().clone()
    }

    fn gate(&self, w: usize, f: &Formula) -> bool {
        span(f).is_none_or(|s| inside(s, self.interval(w)))
    }

    fn truth(&self, w: usize, f: &Formula) -> bool {
        use Formula as F;
        match f {
            F::True => true,
            F::False => false,
            F::Atom(a) => self.m.world(w).atoms.contains(a) && self.gate(w, f),
            F::Not(a) => self.gate(w, a) && !self.truth(w, a),
            F::And(a, b) => self.gate(w, a) && self.gate(w, b) && self.truth(w, a) && self.truth(w, b),
            F::Implies(a, b) => self.gate(w, a) && self.gate(w, b) && (!self.truth(w, a) || self.truth(w, b)),
            F::Belief(a) => {
                let ext: BTreeSet<usize> = self.related(w).into_iter().filter(|&v| self.truth(v, a)).collect();
                self.gate(w, a) && self.m.nbhd(w).contains(&ext)
            }
            F::Knowledge(a) => self.gate(w, a) && self.related(w).iter().all(|&v| self.truth(v, a)),
            F::Always(j, a) => {
                let j = j.interval().unwrap();
                let j = (j.lo(), j.hi().finite());
                span(a).is_none_or(|s| inside(s, j))
                    && inside(j, self.interval(w))
                    && self.related(w).iter().all(|&v| self.truth(v, a))
            }
            F::Or(..) | F::Iff(..) | F::Dynamic(..) => unreachable!("normalized"),
        }
    }
}

fn model_and_formulas(seed: u64, anchor: Option<Interval>, n: usize) -> (TLekModel, Vec<Formula>) {
    let bounds = GenBounds { anchor, ..GenBounds::default() };
    let mut rng = gen::rng(seed);
    let universe = gen::gen_universe(&mut rng, &bounds);
    let m = gen::gen_model_over(&mut rng, &bounds, &universe);
    let fs = (0..n).map(|_| gen::gen_static(&mut rng, &universe, &bounds, 4, 0.1)).collect();
    (m, fs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn checker_matches_oracle(seed in any::<u64>()) {
        let (m, fs) = model_and_formulas(seed, None, 8);
        let oracle = Oracle { m: &m };
        for f in &fs {
            let nf = normalize(f);
            prop_assert_eq!(span(&nf), f.span().unwrap().map(|iv| (iv.lo(), iv.hi().finite())));
            for w in 0..m.len() {
                prop_assert_eq!(m.check(w, f).unwrap(), oracle.truth(w, &nf), "{} at {}", f, w);
            }
        }
    }

    #[test]
    fn semantic_invariants(seed in any::<u64>()) {
        let (m, fs) = model_and_formulas(seed, None, 6);
        for f in &fs {
            for w in 0..m.len() {
                let class: BTreeSet<usize> = m.class(w).iter().copied().collect();
                prop_assert!(m.extension(w, f).unwrap().is_subset(&class));
                if m.check(w, f).unwrap() {
                    if let Some(s) = f.span().unwrap() {
                        prop_assert!(s.is_subset(&m.world_interval(w)), "{} true outside I({})", f, w);
                    }
                }
                let k = Formula::knowledge(f.clone());
                let b = Formula::belief(f.clone());
                for &v in m.class(w) {
                    let covered = f.span().unwrap().is_none_or(|s| s.is_subset(&m.world_interval(v)))
                        && f.span().unwrap().is_none_or(|s| s.is_subset(&m.world_interval(w)));
                    if covered {
                        prop_assert_eq!(m.check(w, &k).unwrap(), m.check(v, &k).unwrap());
                    }
                    if m.check(w, &b).unwrap() && covered {
                        prop_assert!(m.check(v, &b).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn operations_keep_frames(seed in any::<u64>()) {
        let bounds = GenBounds::default();
        let mut rng = gen::rng(seed);
        let universe = gen::gen_universe(&mut rng, &bounds);
        let m = gen::gen_model_over(&mut rng, &bounds, &universe);
        for _ in 0..6 {
            let op = gen::gen_op(&mut rng, &universe, &bounds, 2);
            let out = apply(&m, &op).unwrap();
            prop_assert!(validate_model(&out.model).is_empty());
            if !out.applied {
                prop_assert_eq!(&out.model, &m);
            }
            if let MentalOp::Learn(_) = op {
                let twice = apply(&out.model, &op).unwrap();
                prop_assert_eq!(&twice.model, &out.model);
            }
        }
    }

    #[test]
    fn model_text_round_trip(seed in any::<u64>()) {
        let m = gen::gen_random_model_seeded(seed, &GenBounds::default());
        let text = m.save();
        let back = TLekModel::load(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.save(), text);
    }

    #[test]
    fn formula_round_trip(seed in any::<u64>()) {
        let mut rng = gen::rng(seed);
        for _ in 0..10 {
            let f = gen::gen_syntax(&mut rng, 6);
            prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
        }
    }

    #[test]
    fn substitute_removes_bound_vars(seed in any::<u64>(), t in 10u64..40, use_t in any::<bool>(), use_s in any::<bool>(), use_x in any::<bool>()) {
        let mut rng = gen::rng(seed);
        let f = gen::gen_syntax(&mut rng, 4);
        let mut s = Substitution::new();
        if use_t {
            s.insert("T".into(), Value::Time(TimePoint::At(t)));
            s.insert("T1".into(), Value::Time(TimePoint::At(t + 1)));
        }
        if use_s {
            s.insert("S".into(), Value::Time(TimePoint::At(t)));
        }
        if use_x {
            s.insert("X".into(), Value::Const("c1".into()));
        }
        if let Ok(g) = substitute(&f, &s) {
            let want: BTreeSet<String> = free_vars(&f).into_iter().filter(|v| !s.contains_key(v)).collect();
            prop_assert_eq!(free_vars(&g), want);
        }
    }

    #[test]
    fn match_is_sound_and_complete(
        from in time_pattern(), to in time_pattern(),
        args in prop::collection::vec(term_pattern(), 0..3),
        tv in 3u64..20, sv in 3u64..20, cx in "[ab]", cy in "[ab]",
    ) {
        let pattern = Atom::new("p", from, to, args);
        let s: Substitution = [
            ("T".to_string(), Value::Time(TimePoint::At(tv))),
            ("S".to_string(), Value::Time(TimePoint::At(sv))),
            ("X".to_string(), Value::Const(cx)),
            ("Y".to_string(), Value::Const(cy)),
        ].into_iter().collect();
        if let Ok(g) = substitute_atom(&pattern, &s) {
            let found = match_atom(&pattern, &g);
            prop_assert!(found.is_some(), "{} vs {}", pattern, g);
            prop_assert_eq!(substitute_atom(&pattern, &found.unwrap()).unwrap(), g);
        }
    }

    #[test]
    fn match_never_lies(from in time_pattern(), to in time_pattern(), args in prop::collection::vec(term_pattern(), 0..3),
                        lo in 0u64..25, len in 0u64..5, inf in any::<bool>(), consts in prop::collection::vec("[ab]", 0..3)) {
        let pattern = Atom::new("p", from, to, args);
        let hi = if inf { TimePoint::Infinity } else { TimePoint::At(lo + len) };
        let g = Atom::new("p", TimeExpr::lit(lo), TimeExpr::lit(hi), consts.into_iter().map(Term::Const).collect());
        if let Some(s) = match_atom(&pattern, &g) {
            prop_assert_eq!(substitute_atom(&pattern, &s).unwrap(), g);
        }
    }

    #[test]
    fn interval_sets_are_canonical(ivs in prop::collection::vec(interval(), 0..8)) {
        let set: IntervalSet = ivs.iter().copied().collect();
        for w in set.parts().windows(2) {
            prop_assert!(w[0].hi() < TimePoint::At(w[1].lo().saturating_sub(1)), "{}", set);
        }
        for t in 0..80 {
            prop_assert_eq!(set.contains(t), ivs.iter().any(|iv| iv.contains(t)));
        }
    }

    #[test]
    fn difference_and_intersection_partition(a in interval(), b in interval()) {
        let d = a.difference(&b);
        let i = a.intersect(&b);
        for t in 0..80 {
            prop_assert_eq!(a.contains(t), d.contains(t) || i.contains(t));
            prop_assert!(!(d.contains(t) && i.contains(t)));
        }
        prop_assert!(a.is_subset(&a.hull(&b)) && b.is_subset(&a.hull(&b)));
    }

    #[test]
    fn text_entry_points_never_panic(s in "\\PC{0,40}") {
        let _ = parse(&s);
        let _ = TLekModel::load(&s);
        let _ = parse_scenario(&s);
        let _ = s.parse::<Interval>();
    }

    #[test]
    fn formula_like_text_never_panics(s in "[pqBK~&|()\\[\\]+,0-9TXinfbox<>-]{0,30}") {
        let _ = parse(&s);
    }
}

fn time_pattern() -> impl Strategy<Value = TimeExpr> {
    prop_oneof![
        (0u64..30).prop_map(TimeExpr::lit),
        Just(TimeExpr::lit(TimePoint::Infinity)),
        (prop_oneof![Just("T"), Just("S")], -2i64..3).prop_map(|(n, o)| TimeExpr::Var { name: n.into(), offset: o }),
    ]
}

fn term_pattern() -> impl Strategy<Value = Term> {
    prop_oneof![
        prop_oneof![Just("a"), Just("b")].prop_map(|c| Term::Const(c.into())),
        prop_oneof![Just("X"), Just("Y")].prop_map(|v| Term::Var(v.into())),
    ]
}

fn interval() -> impl Strategy<Value = Interval> {
    (0u64..70, 0u64..10, prop::bool::weighted(0.2)).prop_map(|(lo, len, inf)| {
        if inf {
            Interval::from(lo)
        } else {
            Interval::closed(lo, lo + len).unwrap()
        }
    })
}

// ---- revision reduction on models rich in nested same-fluent beliefs ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn revision_reduction_agrees(seed in any::<u64>()) {
        let bounds = GenBounds { anchor: Some(Interval::from(0)), max_preds: 2, ..GenBounds::default() };
        let mut rng = gen::rng(seed);
        let universe = gen::gen_universe(&mut rng, &bounds);
        let m = gen::gen_model_over(&mut rng, &bounds, &universe);
        let reducer = Reducer::new(Some(bounds.horizon));
        for p in &universe {
            for q in &universe {
                let op = MentalOp::Revise(p.clone(), q.clone());
                for x in &universe {
                    for body in [Formula::belief(Formula::Atom(x.clone())), Formula::belief(Formula::not(Formula::Atom(x.clone())))] {
                        let f = Formula::dynamic(op.clone(), body);
                        let r = reducer.reduce(&f).unwrap();
                        for w in 0..m.len() {
                            prop_assert_eq!(m.check(w, &f).unwrap(), m.check(w, &r).unwrap(), "{} at {}\n{}", f, w, m);
                        }
                    }
                }
            }
        }
    }
}

// ---- agent layer ----

const EXCLUSIONS: [&str; 4] = [
    "K(p(T,S) -> ~q(T,S))",
    "K(q(T,S) -> ~p(T,S))",
    "K(p(T,T) -> r(T+1,T+2))",
    "K(r(T,S) & p(T,T) -> q(S,S))",
];

fn events() -> impl Strategy<Value = Vec<(String, u64, u64, bool, u64)>> {
    prop::collection::vec((prop_oneof![Just("p".to_string()), Just("q".to_string()), Just("r".to_string())], 0u64..12, 0u64..4, any::<bool>(), 0u64..3), 1..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agent_invariants(evs in events()) {
        let start = init_from_formulas(&EXCLUSIONS.iter().map(|r| parse(r).unwrap()).collect::<Vec<_>>()).unwrap();
        let mut st = start.clone();
        let mut clock = 0;
        for (pred, lo, len, positive, dt) in evs {
            clock += dt;
            let sign = if positive { "" } else { "~" };
            let lit: Literal = parse_literal(&format!("{sign}{pred}({lo},{})", lo + len)).unwrap();
            st = st.perceive(&lit, clock).unwrap().infer_fixpoint().unwrap();
            let wm = st.wm();
            for (i, a) in wm.iter().enumerate() {
                for b in &wm[i + 1..] {
                    if a.literal.atom.same_fluent(&b.literal.atom) && a.interval().overlaps(&b.interval()) {
                        prop_assert!(false, "overlap: {} and {}", a.literal, b.literal);
                    }
                }
            }
        }
        let again = replay(&start, st.trace()).unwrap();
        prop_assert_eq!(again.wm_json(), st.wm_json());

        let h = 16;
        let m = to_model(&st, h);
        prop_assert!(validate_model(&m).is_empty());
        for pred in ["p", "q", "r"] {
            for a in 0..=h {
                for b in a..=h {
                    for sign in ["", "~"] {
                        let q = parse(&format!("B {sign}{pred}({a},{b})")).unwrap();
                        prop_assert_eq!(st.query(&q).unwrap(), m.check(0, &q).unwrap(), "{}", q);
                    }
                }
            }
        }
    }
}
