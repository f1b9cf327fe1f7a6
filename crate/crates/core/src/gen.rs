//! Seeded random generators for models, formulas and operations.
//!
//! Everything is driven by a caller-supplied RNG so a seed reproduces a run.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Atom, Formula, IntervalExpr, Literal, MentalOp, Term};
use crate::model::{TLekModel, World, WorldSet};
use crate::time::{Interval, TimeExpr, TimePoint};

/// Predicate of the atom added to every world by an anchor.
pub const ANCHOR: &str = "now";

const PREDICATES: [&str; 6] = ["p", "q", "r", "s", "u", "v"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenBounds {
    pub max_worlds: usize,
    pub max_preds: usize,
    /// Largest finite time point.
    pub horizon: u64,
    /// Interval of an extra atom put in every world, fixing `I(w)`.
    pub anchor: Option<Interval>,
}

impl Default for GenBounds {
    fn default() -> Self {
        GenBounds { max_worlds: 4, max_preds: 3, horizon: 10, anchor: None }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gen_interval(rng: &mut impl Rng, horizon: u64) -> Interval {
    let lo = rng.gen_range(0..=horizon);
    if rng.gen_bool(0.2) {
        Interval::from(lo)
    } else {
        Interval::closed(lo, rng.gen_range(lo..=horizon)).expect("lo <= hi")
    }
}

/// A handful of ground atoms over the first `max_preds` predicates. Some
/// atoms share a fluent with nested intervals, so revision has material.
pub fn gen_universe(rng: &mut impl Rng, bounds: &GenBounds) -> Vec<Atom> {
    let preds = &PREDICATES[..bounds.max_preds.clamp(1, PREDICATES.len())];
    let n = rng.gen_range(2..=6);
    let mut out = BTreeSet::new();
    while out.len() < n {
        let pred = preds.choose(rng).expect("non-empty");
        let iv = gen_interval(rng, bounds.horizon);
        let a = Atom::ground(*pred, iv, &[]);
        if rng.gen_bool(0.3) {
            if let Some(inner) = sub_interval(rng, iv, bounds.horizon) {
                out.insert(a.with_interval(inner));
            }
        }
        out.insert(a);
    }
    out.into_iter().take(n).collect()
}

fn sub_interval(rng: &mut impl Rng, iv: Interval, horizon: u64) -> Option<Interval> {
    let hi = iv.hi().finite().unwrap_or(horizon.max(iv.lo()));
    let lo = rng.gen_range(iv.lo()..=hi);
    Interval::closed(lo, rng.gen_range(lo..=hi)).ok()
}

pub fn gen_random_model(rng: &mut impl Rng, bounds: &GenBounds) -> TLekModel {
    let universe = gen_universe(rng, bounds);
    gen_model_over(rng, bounds, &universe)
}

/// A model whose valuations are drawn from `universe`. Classes form a
/// random partition and each class shares one neighbourhood, built partly
/// from extensions of universe literals so beliefs are not all vacuous.
pub fn gen_model_over(rng: &mut impl Rng, bounds: &GenBounds, universe: &[Atom]) -> TLekModel {
    let n = rng.gen_range(1..=bounds.max_worlds.max(1));
    let worlds: Vec<World> = (0..n)
        .map(|i| {
            let mut atoms: BTreeSet<Atom> = universe.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
            if let Some(iv) = bounds.anchor {
                atoms.insert(Atom::ground(ANCHOR, iv, &[]));
            }
            World::new(format!("w{i}"), atoms)
        })
        .collect();
    let k = rng.gen_range(1..=n);
    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for w in 0..n {
        by_label.entry(rng.gen_range(0..k)).or_default().push(w);
    }
    let classes: Vec<Vec<usize>> = by_label.into_values().collect();
    let mut nbhd = vec![BTreeSet::new(); n];
    for class in &classes {
        let mut sets: BTreeSet<WorldSet> = BTreeSet::new();
        for _ in 0..rng.gen_range(0..=3) {
            if rng.gen_bool(0.6) && !universe.is_empty() {
                let a = universe.choose(rng).expect("non-empty");
                let positive = rng.gen_bool(0.75);
                sets.insert(class.iter().copied().filter(|&w| worlds[w].atoms.contains(a) == positive).collect());
            } else {
                sets.insert(class.iter().copied().filter(|_| rng.gen_bool(0.5)).collect());
            }
        }
        for &w in class {
            nbhd[w] = sets.clone();
        }
    }
    TLekModel::new(worlds, classes, nbhd).expect("generated model is well formed")
}

/// Seeded convenience wrapper around [`gen_random_model`].
pub fn gen_random_model_seeded(seed: u64, bounds: &GenBounds) -> TLekModel {
    gen_random_model(&mut rng(seed), bounds)
}

/// Largest finite time point mentioned by the model's atoms.
pub fn model_horizon(m: &TLekModel) -> u64 {
    m.worlds()
        .iter()
        .flat_map(|w| w.atoms.iter())
        .filter_map(|a| a.interval().ok())
        .map(|iv| iv.hi().finite().unwrap_or(iv.lo()))
        .max()
        .unwrap_or(0)
}

fn pick_atom(rng: &mut impl Rng, universe: &[Atom], bounds: &GenBounds) -> Atom {
    if universe.is_empty() || rng.gen_bool(0.1) {
        let preds = &PREDICATES[..bounds.max_preds.clamp(1, PREDICATES.len())];
        Atom::ground(*preds.choose(rng).expect("non-empty"), gen_interval(rng, bounds.horizon), &[])
    } else {
        universe.choose(rng).expect("non-empty").clone()
    }
}

pub fn gen_literal(rng: &mut impl Rng, universe: &[Atom], bounds: &GenBounds) -> Literal {
    let a = pick_atom(rng, universe, bounds);
    if rng.gen_bool(0.7) {
        Literal::pos(a)
    } else {
        Literal::neg(a)
    }
}

/// Ground static formula of nesting depth at most `depth`. `box` appears
/// with probability `box_rate` per inner node.
pub fn gen_static(rng: &mut impl Rng, universe: &[Atom], bounds: &GenBounds, depth: usize, box_rate: f64) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..20) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::Atom(pick_atom(rng, universe, bounds)),
        };
    }
    if rng.gen_bool(box_rate) {
        let j = gen_interval(rng, bounds.horizon);
        return Formula::always(j, gen_static(rng, universe, bounds, depth - 1, box_rate));
    }
    let sub = |rng: &mut _| gen_static(rng, universe, bounds, depth - 1, box_rate);
    match rng.gen_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::iff(sub(rng), sub(rng)),
        5 | 6 => Formula::belief(sub(rng)),
        _ => Formula::knowledge(sub(rng)),
    }
}

/// Ground operation with static payloads of depth at most `depth`.
pub fn gen_op(rng: &mut impl Rng, universe: &[Atom], bounds: &GenBounds, depth: usize) -> MentalOp {
    match rng.gen_range(0..4) {
        0 => MentalOp::Learn(gen_literal(rng, universe, bounds)),
        1 => MentalOp::Conj(
            gen_static(rng, universe, bounds, depth, 0.0),
            gen_static(rng, universe, bounds, depth, 0.0),
        ),
        2 => MentalOp::Infer(gen_static(rng, universe, bounds, depth, 0.0), pick_atom(rng, universe, bounds)),
        _ => MentalOp::Revise(pick_atom(rng, universe, bounds), pick_atom(rng, universe, bounds)),
    }
}

/// Ground formula with at least one dynamic prefix and dynamic depth at
/// most `max_dyn` (1 or more).
pub fn gen_dynamic(rng: &mut impl Rng, universe: &[Atom], bounds: &GenBounds, max_dyn: usize) -> Formula {
    let op = gen_op(rng, universe, bounds, 1);
    let body = if max_dyn > 1 && rng.gen_bool(0.4) {
        let inner = gen_dynamic(rng, universe, bounds, max_dyn - 1);
        match rng.gen_range(0..4) {
            0 => Formula::belief(inner),
            1 => Formula::not(inner),
            2 => Formula::and(inner, gen_static(rng, universe, bounds, 1, 0.0)),
            _ => inner,
        }
    } else {
        gen_static(rng, universe, bounds, 2, 0.01)
    };
    let f = Formula::dynamic(op, body);
    if rng.gen_bool(0.2) {
        Formula::implies(gen_static(rng, universe, bounds, 1, 0.0), f)
    } else {
        f
    }
}

fn gen_time_expr(rng: &mut impl Rng) -> TimeExpr {
    let vars = ["T", "T1", "S"];
    match rng.gen_range(0..6) {
        0 => TimeExpr::lit(TimePoint::Infinity),
        1 | 2 => TimeExpr::Var { name: vars.choose(rng).expect("non-empty").to_string(), offset: rng.gen_range(-3..=3) },
        _ => TimeExpr::lit(rng.gen_range(0..=40u64)),
    }
}

fn gen_bounds_pair(rng: &mut impl Rng) -> (TimeExpr, TimeExpr) {
    loop {
        let lo = gen_time_expr(rng);
        let hi = gen_time_expr(rng);
        match (lo.as_lit(), hi.as_lit()) {
            (Some(TimePoint::Infinity), _) => continue,
            (Some(l), Some(h)) if l > h => continue,
            _ => return (lo, hi),
        }
    }
}

fn gen_any_atom(rng: &mut impl Rng) -> Atom {
    let preds = ["p", "q", "rain", "take", "married", "marryA"];
    let consts = ["umbrella", "alice", "c1"];
    let (from, to) = gen_bounds_pair(rng);
    let args = (0..rng.gen_range(0..=2))
        .map(|_| {
            if rng.gen_bool(0.3) {
                Term::Var(["X", "Y"].choose(rng).expect("non-empty").to_string())
            } else {
                Term::Const(consts.choose(rng).expect("non-empty").to_string())
            }
        })
        .collect();
    Atom::new(*preds.choose(rng).expect("non-empty"), from, to, args)
}

/// Arbitrary, possibly non-ground, syntax tree of depth at most `depth`,
/// used for printer/parser round trips.
pub fn gen_syntax(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..12) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::Atom(gen_any_atom(rng)),
        };
    }
    let sub = |rng: &mut _| gen_syntax(rng, depth - 1);
    match rng.gen_range(0..12) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::iff(sub(rng), sub(rng)),
        5 => Formula::belief(sub(rng)),
        6 => Formula::knowledge(sub(rng)),
        7 => {
            let iv = if rng.gen_bool(0.3) {
                IntervalExpr::all()
            } else {
                let (lo, hi) = gen_bounds_pair(rng);
                IntervalExpr { lo, hi }
            };
            Formula::Always(iv, Box::new(sub(rng)))
        }
        _ => {
            let op = match rng.gen_range(0..4) {
                0 => MentalOp::Learn(Literal { atom: gen_any_atom(rng), positive: rng.gen_bool(0.5) }),
                1 => MentalOp::Conj(sub(rng), sub(rng)),
                2 => MentalOp::Infer(sub(rng), gen_any_atom(rng)),
                _ => MentalOp::Revise(gen_any_atom(rng), gen_any_atom(rng)),
            };
            Formula::dynamic(op, sub(rng))
        }
    }
}
