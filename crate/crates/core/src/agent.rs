//! Working memory of timed beliefs, long-term memory of rules, and the
//! forward-chaining engine that connects them.
//!
//! Rules fire by grounding on demand: a premise pattern is matched against
//! a belief, binding time variables to the belief's bounds and then
//! requiring the grounded premise interval to lie inside the belief's
//! interval. Each rule instance fires at most once. Conflicts between a
//! conclusion and an opposite belief are settled by recency: every belief
//! records the clock at which it was formed (for derived beliefs, the
//! newest of their supports), and only beliefs no newer than the incoming
//! information are restructured.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{free_vars, substitute_atom, Atom, Formula, IntervalExpr, Literal, Substitution, Term, Value};
use crate::model::{validate_model, TLekModel, World, WorldSet};
use crate::parser::parse_literal;
use crate::time::{Interval, IntervalSet, TimeExpr, TimePoint};

pub const DEFAULT_BUDGET: usize = 10_000;

/// Version of the JSON trace record layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Predicate of the atom that pins every world interval in [`to_model`].
pub const HORIZON_ANCHOR: &str = "horizon";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Premise {
    /// A literal that must be covered by a belief of the same polarity.
    Holds(Literal),
    /// `box[J] a`: `a` must be believed and its grounded interval lie in `J`.
    Window(IntervalExpr, Atom),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub premises: Vec<Premise>,
    pub conclusion: Literal,
}

impl Rule {
    /// Reads `K(p1 & ... & pn -> c)`; the `K` is optional.
    pub fn from_formula(f: &Formula) -> Result<Rule> {
        let bad = |why: &str| Error::MalformedRule(format!("{f}: {why}"));
        let body = match f {
            Formula::Knowledge(b) => b.as_ref(),
            other => other,
        };
        let Formula::Implies(lhs, rhs) = body else {
            return Err(bad("expected an implication"));
        };
        let conclusion = literal_of(rhs).ok_or_else(|| bad("the conclusion must be a literal"))?;
        let mut flat = Vec::new();
        flatten_and(lhs, &mut flat);
        let mut premises = Vec::new();
        for p in flat {
            match p {
                Formula::True => {}
                Formula::Always(j, a) => match a.as_ref() {
                    Formula::Atom(a) => premises.push(Premise::Window(j.clone(), a.clone())),
                    _ => return Err(bad("a window premise must be `box[J]` over an atom")),
                },
                other => premises.push(Premise::Holds(
                    literal_of(other).ok_or_else(|| bad("premises must be literals or windows"))?,
                )),
            }
        }
        let rule = Rule { premises, conclusion };
        let bound = rule.premise_vars();
        let mut needed = free_vars(&rule.conclusion.to_formula());
        for p in &rule.premises {
            if let Premise::Window(j, _) = p {
                needed.extend([&j.lo, &j.hi].iter().filter_map(|e| e.var_name()).map(str::to_string));
            }
        }
        if let Some(v) = needed.difference(&bound).next() {
            return Err(bad(&format!("variable `{v}` does not occur in a premise atom")));
        }
        Ok(rule)
    }

    fn premise_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for p in &self.premises {
            let a = match p {
                Premise::Holds(l) => &l.atom,
                Premise::Window(_, a) => a,
            };
            out.extend(free_vars(&Formula::Atom(a.clone())));
        }
        out
    }

    pub fn to_formula(&self) -> Formula {
        let premises = self.premises.iter().map(|p| match p {
            Premise::Holds(l) => l.to_formula(),
            Premise::Window(j, a) => Formula::Always(j.clone(), Box::new(Formula::Atom(a.clone()))),
        });
        Formula::knowledge(Formula::implies(Formula::conj_all(premises), self.conclusion.to_formula()))
    }

    /// Variables renamed `V0, V1, ...` in order of first occurrence.
    fn canonical(&self) -> Formula {
        let mut names: BTreeMap<String, String> = BTreeMap::new();
        let mut order = Vec::new();
        collect_order(&self.to_formula(), &mut order);
        for v in order {
            let n = names.len();
            names.entry(v).or_insert_with(|| format!("V{n}"));
        }
        rename(&self.to_formula(), &names)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_formula())
    }
}

fn flatten_and<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        other => out.push(other),
    }
}

fn literal_of(f: &Formula) -> Option<Literal> {
    match f {
        Formula::Atom(a) => Some(Literal::pos(a.clone())),
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Atom(a) => Some(Literal::neg(a.clone())),
            _ => None,
        },
        _ => None,
    }
}

fn atom_vars_in_order(a: &Atom, out: &mut Vec<String>) {
    for e in [&a.from, &a.to] {
        if let Some(n) = e.var_name() {
            out.push(n.to_string());
        }
    }
    for t in &a.args {
        if let Term::Var(v) = t {
            out.push(v.clone());
        }
    }
}

fn collect_order(f: &Formula, out: &mut Vec<String>) {
    match f {
        Formula::Atom(a) => atom_vars_in_order(a, out),
        Formula::Not(a) | Formula::Belief(a) | Formula::Knowledge(a) => collect_order(a, out),
        Formula::Always(j, a) => {
            out.extend([&j.lo, &j.hi].iter().filter_map(|e| e.var_name()).map(str::to_string));
            collect_order(a, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_order(a, out);
            collect_order(b, out);
        }
        Formula::True | Formula::False | Formula::Dynamic(..) => {}
    }
}

fn rename_time(e: &TimeExpr, names: &BTreeMap<String, String>) -> TimeExpr {
    match e {
        TimeExpr::Var { name, offset } => TimeExpr::Var { name: names[name].clone(), offset: *offset },
        lit => lit.clone(),
    }
}

fn rename_atom(a: &Atom, names: &BTreeMap<String, String>) -> Atom {
    let args = a
        .args
        .iter()
        .map(|t| match t {
            Term::Var(v) => Term::Var(names[v].clone()),
            c => c.clone(),
        })
        .collect();
    Atom::new(a.predicate.clone(), rename_time(&a.from, names), rename_time(&a.to, names), args)
}

fn rename(f: &Formula, names: &BTreeMap<String, String>) -> Formula {
    match f {
        Formula::Atom(a) => Formula::Atom(rename_atom(a, names)),
        Formula::Not(a) => Formula::not(rename(a, names)),
        Formula::Belief(a) => Formula::belief(rename(a, names)),
        Formula::Knowledge(a) => Formula::knowledge(rename(a, names)),
        Formula::Always(j, a) => Formula::Always(
            IntervalExpr { lo: rename_time(&j.lo, names), hi: rename_time(&j.hi, names) },
            Box::new(rename(a, names)),
        ),
        Formula::And(a, b) => Formula::and(rename(a, names), rename(b, names)),
        Formula::Or(a, b) => Formula::or(rename(a, names), rename(b, names)),
        Formula::Implies(a, b) => Formula::implies(rename(a, names), rename(b, names)),
        Formula::Iff(a, b) => Formula::iff(rename(a, names), rename(b, names)),
        other => other.clone(),
    }
}

/// A ground literal in working memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Belief {
    pub literal: Literal,
    /// Clock value when the belief was formed.
    pub since: u64,
}

impl Belief {
    pub fn interval(&self) -> Interval {
        self.literal.atom.interval().expect("working memory is ground")
    }

    fn same_group(&self, lit: &Literal) -> bool {
        self.literal.positive == lit.positive && self.literal.atom.same_fluent(&lit.atom)
    }

    fn sort_key(&self) -> (Interval, &str, &[Term], bool) {
        (self.interval(), &self.literal.atom.predicate, &self.literal.atom.args, !self.literal.positive)
    }
}

/// One trace record. Literals and intervals are kept in their text form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Perceived { literal: String, at: u64, added: Vec<String> },
    Fired { rule: usize, substitution: BTreeMap<String, String>, conclusion: String, added: Vec<String>, since: u64 },
    Restructured { old: String, since: u64, residual: Vec<String> },
    Conjoined { left: String, right: String },
}

#[derive(Serialize, Deserialize)]
struct Record {
    schema_version: u32,
    #[serde(flatten)]
    event: TraceEvent,
}

/// Serializes events as JSON lines, one record per event.
pub fn trace_to_jsonl(events: &[TraceEvent]) -> String {
    events
        .iter()
        .map(|e| {
            let r = Record { schema_version: SCHEMA_VERSION, event: e.clone() };
            serde_json::to_string(&r).expect("trace records serialize") + "\n"
        })
        .collect()
}

pub fn trace_from_jsonl(text: &str) -> Result<Vec<TraceEvent>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let bad = |m: String| Error::Scenario { line: i + 1, message: m };
        let r: Record = serde_json::from_str(line).map_err(|e| bad(format!("bad trace record: {e}")))?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(bad(format!("unsupported schema_version {}", r.schema_version)));
        }
        out.push(r.event);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentState {
    wm: Vec<Belief>,
    ltm: Vec<Rule>,
    clock: u64,
    trace: Vec<TraceEvent>,
    fired: BTreeSet<(usize, Substitution)>,
    budget: usize,
}

pub fn init(rules: Vec<Rule>) -> AgentState {
    AgentState { wm: Vec::new(), ltm: rules, clock: 0, trace: Vec::new(), fired: BTreeSet::new(), budget: DEFAULT_BUDGET }
}

/// [`init`] from rule formulas.
pub fn init_from_formulas(rules: &[Formula]) -> Result<AgentState> {
    Ok(init(rules.iter().map(Rule::from_formula).collect::<Result<_>>()?))
}

fn ground_literal(lit: &Literal) -> Result<()> {
    if lit.atom.is_ground() {
        lit.atom.interval().map(|_| ())
    } else {
        Err(Error::NonGround(lit.to_string()))
    }
}

fn touches(a: &Interval, b: &Interval) -> bool {
    IntervalSet::from_iter([*a, *b]).len() == 1
}

fn show_parts(s: &IntervalSet) -> Vec<String> {
    s.parts().iter().map(Interval::to_string).collect()
}

impl AgentState {
    pub fn wm(&self) -> &[Belief] {
        &self.wm
    }

    pub fn ltm(&self) -> &[Rule] {
        &self.ltm
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn add_rule(&self, rule: Rule) -> AgentState {
        let mut st = self.clone();
        st.ltm.push(rule);
        st
    }

    /// Working-memory literals, comma separated.
    pub fn render_wm(&self) -> String {
        self.wm.iter().map(|b| b.literal.to_string()).collect::<Vec<_>>().join(", ")
    }

    /// Working memory as JSON, including formation times.
    pub fn wm_json(&self) -> String {
        let items: Vec<serde_json::Value> = self
            .wm
            .iter()
            .map(|b| serde_json::json!({ "literal": b.literal.to_string(), "since": b.since }))
            .collect();
        serde_json::to_string(&items).expect("json")
    }

    fn sort(&mut self) {
        self.wm.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    }

    // Adds `lit` restricted to `part`, merging with touching beliefs of
    // the same fluent and polarity.
    fn insert_part(&mut self, lit: &Literal, part: Interval, since: u64) {
        let mut hull = part;
        let mut newest = since;
        self.wm.retain(|b| {
            if b.same_group(lit) && touches(&b.interval(), &part) {
                hull = hull.hull(&b.interval());
                newest = newest.max(b.since);
                false
            } else {
                true
            }
        });
        self.wm.push(Belief { literal: Literal { atom: lit.atom.with_interval(hull), positive: lit.positive }, since: newest });
        self.sort();
    }

    fn replace(&mut self, old: &Belief, residual: &IntervalSet) {
        self.wm.retain(|b| b != old);
        for part in residual.parts() {
            self.wm.push(Belief { literal: Literal { atom: old.literal.atom.with_interval(*part), positive: old.literal.positive }, since: old.since });
        }
        self.sort();
    }

    // Brings `lit` into working memory with formation time `since`.
    // Opposite beliefs that are not newer lose the overlap; newer ones cut
    // it out of the incoming interval. With `store` false only the first
    // half happens.
    fn integrate(&mut self, lit: &Literal, since: u64, store: bool) -> (IntervalSet, Vec<TraceEvent>) {
        let c = lit.atom.interval().expect("ground");
        let mut incoming: IntervalSet = [c].into_iter().collect();
        let mut events = Vec::new();
        let flipped = Literal { atom: lit.atom.clone(), positive: !lit.positive };
        let opposite: Vec<Belief> =
            self.wm.iter().filter(|b| b.same_group(&flipped) && b.interval().overlaps(&c)).cloned().collect();
        for b in opposite {
            if b.since <= since {
                let residual = b.interval().difference(&c);
                self.replace(&b, &residual);
                events.push(TraceEvent::Restructured {
                    old: b.literal.to_string(),
                    since: b.since,
                    residual: show_parts(&residual),
                });
            } else {
                incoming = incoming.remove(&b.interval());
            }
        }
        if !store {
            return (IntervalSet::empty(), events);
        }
        for b in self.wm.iter().filter(|b| b.same_group(lit)) {
            incoming = incoming.remove(&b.interval());
        }
        for part in incoming.parts() {
            self.insert_part(lit, *part, since);
        }
        (incoming, events)
    }

    /// `+lit` at time `at`.
    pub fn perceive(&self, lit: &Literal, at: u64) -> Result<AgentState> {
        ground_literal(lit)?;
        if at < self.clock {
            return Err(Error::TimeRegression { clock: self.clock, at });
        }
        let mut st = self.clone();
        st.clock = at;
        let (added, events) = st.integrate(lit, at, true);
        st.trace.push(TraceEvent::Perceived { literal: lit.to_string(), at, added: show_parts(&added) });
        st.trace.extend(events);
        Ok(st)
    }

    /// Runs rules in list order until nothing new fires.
    pub fn infer_fixpoint(&self) -> Result<AgentState> {
        let order: Vec<usize> = (0..self.ltm.len()).collect();
        self.infer_fixpoint_ordered(&order)
    }

    /// As [`AgentState::infer_fixpoint`], trying rules in `order`.
    pub fn infer_fixpoint_ordered(&self, order: &[usize]) -> Result<AgentState> {
        let mut st = self.clone();
        let mut steps = 0;
        'scan: loop {
            for &ri in order {
                for (sub, since) in st.matches(&st.ltm[ri]) {
                    if st.fired.contains(&(ri, sub.clone())) {
                        continue;
                    }
                    let rule = &st.ltm[ri];
                    let grounded = substitute_atom(&rule.conclusion.atom, &sub)
                        .ok()
                        .filter(|a| a.is_ground() && a.interval().is_ok())
                        .map(|atom| Literal { atom, positive: rule.conclusion.positive });
                    // a negative instance waits until it has something to revise
                    if let Some(lit) = &grounded {
                        if !lit.positive && !st.has_target(lit, since) {
                            continue;
                        }
                    }
                    steps += 1;
                    if steps > st.budget {
                        return Err(Error::BudgetExhausted(st.budget));
                    }
                    st.fired.insert((ri, sub.clone()));
                    let Some(lit) = grounded else { continue };
                    let (added, events) = st.integrate(&lit, since, lit.positive);
                    st.trace.push(TraceEvent::Fired {
                        rule: ri,
                        substitution: sub.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
                        conclusion: lit.to_string(),
                        added: show_parts(&added),
                        since,
                    });
                    st.trace.extend(events);
                    continue 'scan;
                }
            }
            return Ok(st);
        }
    }

    // A positive belief that `¬lit` formed at `since` would restructure.
    fn has_target(&self, lit: &Literal, since: u64) -> bool {
        let c = lit.atom.interval().expect("ground");
        let flipped = Literal { atom: lit.atom.clone(), positive: !lit.positive };
        self.wm.iter().any(|b| b.same_group(&flipped) && b.since <= since && b.interval().overlaps(&c))
    }

    /// Substitutions under which every premise is covered, with the newest
    /// formation time among the supporting beliefs, sorted.
    fn matches(&self, rule: &Rule) -> Vec<(Substitution, u64)> {
        let mut out = Vec::new();
        self.match_from(rule, 0, &Substitution::new(), 0, &mut out);
        out.sort();
        out.dedup_by(|a, b| a.0 == b.0);
        out
    }

    fn match_from(&self, rule: &Rule, i: usize, sub: &Substitution, since: u64, out: &mut Vec<(Substitution, u64)>) {
        let Some(p) = rule.premises.get(i) else {
            if self.windows_hold(rule, sub) {
                out.push((sub.clone(), since));
            }
            return;
        };
        let (pattern, positive) = match p {
            Premise::Holds(l) => (&l.atom, l.positive),
            Premise::Window(_, a) => (a, true),
        };
        for b in &self.wm {
            if b.literal.positive != positive || b.literal.atom.predicate != pattern.predicate {
                continue;
            }
            let mut s = sub.clone();
            if cover_match(pattern, &b.literal.atom, &mut s) {
                self.match_from(rule, i + 1, &s, since.max(b.since), out);
            }
        }
    }

    fn windows_hold(&self, rule: &Rule, sub: &Substitution) -> bool {
        rule.premises.iter().all(|p| match p {
            Premise::Holds(_) => true,
            Premise::Window(j, a) => {
                let lookup = |n: &str| match sub.get(n) {
                    Some(Value::Time(t)) => Ok(Some(*t)),
                    _ => Ok(None),
                };
                let (Ok(lo), Ok(hi)) = (j.lo.eval_by(lookup), j.hi.eval_by(lookup)) else { return false };
                let (Ok(j), Ok(g)) = (Interval::new(lo, hi), substitute_atom(a, sub)) else { return false };
                g.interval().is_ok_and(|iv| iv.is_subset(&j))
            }
        })
    }

    /// `⊣(p,q)` on working memory: the belief `q` keeps only the parts of
    /// its interval outside `T(p)`.
    pub fn revise(&self, p: &Atom, q: &Atom) -> Result<AgentState> {
        ground_literal(&Literal::pos(p.clone()))?;
        ground_literal(&Literal::pos(q.clone()))?;
        let Some(old) = self.wm.iter().find(|b| b.literal.positive && &b.literal.atom == q).cloned() else {
            return Err(Error::NoSuchBelief(q.to_string()));
        };
        let mut st = self.clone();
        let residual = old.interval().difference(&p.interval()?);
        st.replace(&old, &residual);
        st.trace.push(TraceEvent::Restructured { old: old.literal.to_string(), since: old.since, residual: show_parts(&residual) });
        Ok(st)
    }

    /// `∩(φ,ψ)`: both conjuncts must be believed; working memory keeps
    /// literals only, so the step is recorded in the trace.
    pub fn conjoin(&self, left: &Formula, right: &Formula) -> Result<AgentState> {
        for f in [left, right] {
            if !self.query(&Formula::belief(f.clone()))? {
                return Err(Error::NoSuchBelief(f.to_string()));
            }
        }
        let mut st = self.clone();
        st.trace.push(TraceEvent::Conjoined { left: left.to_string(), right: right.to_string() });
        Ok(st)
    }

    fn covered(&self, lit: &Literal) -> Result<bool> {
        ground_literal(lit)?;
        let iv = lit.atom.interval()?;
        Ok(self.wm.iter().any(|b| b.same_group(lit) && iv.is_subset(&b.interval())))
    }

    /// Entailment by the belief base: `B` over literals or conjunctions of
    /// literals (coverage), `K` of a rule (membership up to renaming), and
    /// Boolean combinations of those.
    pub fn query(&self, f: &Formula) -> Result<bool> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Not(a) => !self.query(a)?,
            Formula::And(a, b) => self.query(a)? && self.query(b)?,
            Formula::Or(a, b) => self.query(a)? || self.query(b)?,
            Formula::Implies(a, b) => !self.query(a)? || self.query(b)?,
            Formula::Iff(a, b) => self.query(a)? == self.query(b)?,
            Formula::Belief(inner) => {
                let mut flat = Vec::new();
                flatten_and(inner, &mut flat);
                let mut all = true;
                for g in flat {
                    let lit = literal_of(g).ok_or_else(|| Error::UnsupportedQuery(f.to_string()))?;
                    all &= self.covered(&lit)?;
                }
                all
            }
            Formula::Knowledge(_) => {
                let rule = Rule::from_formula(f).map_err(|_| Error::UnsupportedQuery(f.to_string()))?;
                let target = rule.canonical();
                self.ltm.iter().any(|r| r.canonical() == target)
            }
            _ => return Err(Error::UnsupportedQuery(f.to_string())),
        })
    }
}

// Binds unbound variables of `pattern` to the bounds of `belief`, then
// requires the grounded pattern interval to lie inside the belief's.
fn cover_match(pattern: &Atom, belief: &Atom, s: &mut Substitution) -> bool {
    if pattern.args.len() != belief.args.len() {
        return false;
    }
    for (t, c) in pattern.args.iter().zip(&belief.args) {
        let Term::Const(c) = c else { return false };
        match t {
            Term::Const(x) if x == c => {}
            Term::Const(_) => return false,
            Term::Var(v) => match s.get(v) {
                Some(Value::Const(y)) if y == c => {}
                Some(_) => return false,
                None => {
                    s.insert(v.clone(), Value::Const(c.clone()));
                }
            },
        }
    }
    let Ok(biv) = belief.interval() else { return false };
    for (e, bound) in [(&pattern.from, TimePoint::At(biv.lo())), (&pattern.to, biv.hi())] {
        if let TimeExpr::Var { name, offset } = e {
            match s.get(name) {
                Some(Value::Time(_)) => {}
                Some(Value::Const(_)) => return false,
                None => {
                    let Ok(v) = bound.offset(-offset) else { return false };
                    s.insert(name.clone(), Value::Time(v));
                }
            }
        }
    }
    match substitute_atom(pattern, s).and_then(|g| g.interval()) {
        Ok(iv) => iv.is_subset(&biv),
        Err(_) => false,
    }
}

/// Rebuilds a state by replaying trace events from `initial`.
pub fn replay(initial: &AgentState, events: &[TraceEvent]) -> Result<AgentState> {
    let mut st = initial.clone();
    let lit = |s: &str| parse_literal(s);
    let parts = |v: &[String]| v.iter().map(|s| s.parse::<Interval>()).collect::<Result<Vec<_>>>();
    for e in events {
        match e {
            TraceEvent::Perceived { literal, at, added } => {
                let l = lit(literal)?;
                st.clock = *at;
                for p in parts(added)? {
                    st.insert_part(&l, p, *at);
                }
            }
            TraceEvent::Fired { rule, substitution, conclusion, added, since } => {
                let l = lit(conclusion)?;
                for p in parts(added)? {
                    st.insert_part(&l, p, *since);
                }
                let sub = substitution
                    .iter()
                    .map(|(k, v)| {
                        let val = v.parse::<TimePoint>().map(Value::Time).unwrap_or_else(|_| Value::Const(v.clone()));
                        (k.clone(), val)
                    })
                    .collect();
                st.fired.insert((*rule, sub));
            }
            TraceEvent::Restructured { old, since, residual } => {
                let old = Belief { literal: lit(old)?, since: *since };
                if !st.wm.contains(&old) {
                    return Err(Error::NoSuchBelief(old.literal.to_string()));
                }
                st.replace(&old, &parts(residual)?.into_iter().collect());
            }
            TraceEvent::Conjoined { .. } => {}
        }
        st.trace.push(e.clone());
    }
    Ok(st)
}

fn truncate(iv: Interval, h: u64) -> Option<Interval> {
    iv.intersection(&Interval::closed(0, h).expect("0 <= h"))
}

fn sub_intervals(iv: Interval) -> Vec<Interval> {
    let hi = iv.hi().finite().expect("truncated");
    (iv.lo()..=hi).flat_map(|a| (a..=hi).map(move |b| Interval::closed(a, b).expect("a <= b"))).collect()
}

/// A one-class model of the working memory up to time `h`.
///
/// Every world carries `horizon(0,h)`, so all world intervals are `[0,h]`.
/// Let `A` be every sub-interval atom of a positive belief truncated at
/// `h`. World `w0` holds `A`; each `a` in `A` gets a world without `a`,
/// and each sub-interval `x` of a negative belief a world with `A ∪ {x}`.
/// The neighbourhood holds the extensions of every `a` and every `¬x`, so
/// each believed literal is believed in the model and nothing else is.
pub fn to_model(st: &AgentState, h: u64) -> TLekModel {
    let anchor = Atom::ground(HORIZON_ANCHOR, Interval::closed(0, h).expect("0 <= h"), &[]);
    let mut pos = BTreeSet::new();
    let mut neg = BTreeSet::new();
    for b in &st.wm {
        if let Some(iv) = truncate(b.interval(), h) {
            let target = if b.literal.positive { &mut pos } else { &mut neg };
            target.extend(sub_intervals(iv).into_iter().map(|j| b.literal.atom.with_interval(j)));
        }
    }
    let with_anchor = |atoms: BTreeSet<Atom>| {
        let mut atoms = atoms;
        atoms.insert(anchor.clone());
        atoms
    };
    let mut worlds = vec![World::new("w0", with_anchor(pos.clone()))];
    let mut pos_world = Vec::new();
    for a in &pos {
        let mut v = pos.clone();
        v.remove(a);
        pos_world.push(worlds.len());
        worlds.push(World::new(format!("w{}", worlds.len()), with_anchor(v)));
    }
    let mut neg_world = Vec::new();
    for x in &neg {
        let mut v = pos.clone();
        v.insert(x.clone());
        neg_world.push(worlds.len());
        worlds.push(World::new(format!("w{}", worlds.len()), with_anchor(v)));
    }
    let all: WorldSet = (0..worlds.len()).collect();
    let without = |w: usize| -> WorldSet { all.iter().copied().filter(|&v| v != w).collect() };
    let sets: BTreeSet<WorldSet> = pos_world.iter().chain(&neg_world).map(|&w| without(w)).collect();
    let n = worlds.len();
    let m = TLekModel::new(worlds, vec![(0..n).collect()], vec![sets; n]).expect("well formed");
    debug_assert!(validate_model(&m).is_empty());
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse, parse_atom};

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn lit(s: &str) -> Literal {
        parse_literal(s).unwrap()
    }

    fn agent(rules: &[&str]) -> AgentState {
        init_from_formulas(&rules.iter().map(|r| f(r)).collect::<Vec<_>>()).unwrap()
    }

    const UMBRELLA_RULES: [&str; 2] = [
        "K(rain(T1,T2) -> take(T1,T2,umbrella))",
        "K(rain(T1,T2) & take(T1,T2,umbrella) -> go(T1+1,inf,shops))",
    ];

    const MARRIAGE_RULES: [&str; 4] = [
        "K(marryA(T,T) -> married(T+1,inf))",
        "K(divorceA(T,T) -> divorced(T+1,inf))",
        "K(married(T,inf) -> ~divorced(T,inf))",
        "K(divorced(T,inf) -> ~married(T,inf))",
    ];

    #[test]
    fn init_examples() {
        let st = agent(&UMBRELLA_RULES);
        assert_eq!(st.ltm().len(), 2);
        assert!(st.wm().is_empty());
        assert!(init(vec![]).ltm().is_empty());
        assert!(matches!(init_from_formulas(&[f("K(p(T,T) -> q(S,S))")]), Err(Error::MalformedRule(_))));
        assert!(matches!(init_from_formulas(&[f("K(p(1,1) | q(1,1) -> r(1,1))")]), Err(Error::MalformedRule(_))));
        assert!(matches!(init_from_formulas(&[f("B p(1,1)")]), Err(Error::MalformedRule(_))));
    }

    #[test]
    fn umbrella() {
        let st = agent(&UMBRELLA_RULES).perceive(&lit("rain(2,2)"), 2).unwrap().infer_fixpoint().unwrap();
        assert_eq!(st.render_wm(), "rain(2,2), take(2,2,umbrella), go(3,inf,shops)");
        assert!(st.query(&f("B take(2,2,umbrella)")).unwrap());
        assert!(st.query(&f("B go(5,9,shops)")).unwrap());
        assert!(!st.query(&f("B go(2,9,shops)")).unwrap());
    }

    #[test]
    fn marriage() {
        let st = agent(&MARRIAGE_RULES)
            .perceive(&lit("marryA(5,5)"), 5)
            .unwrap()
            .infer_fixpoint()
            .unwrap();
        assert_eq!(st.render_wm(), "marryA(5,5), married(6,inf)");
        let st = st.perceive(&lit("divorceA(8,8)"), 8).unwrap().infer_fixpoint().unwrap();
        assert_eq!(st.render_wm(), "marryA(5,5), married(6,8), divorceA(8,8), divorced(9,inf)");
        assert!(st.query(&f("B married(7,7)")).unwrap());
        assert!(!st.query(&f("B married(9,9)")).unwrap());
        assert!(st.query(&f("B(married(6,8) & divorced(9,inf))")).unwrap());
    }

    #[test]
    fn marriage_late_inference_and_orders() {
        // both perceptions before inference; every rule order agrees
        let base = agent(&MARRIAGE_RULES)
            .perceive(&lit("marryA(5,5)"), 5)
            .unwrap()
            .perceive(&lit("divorceA(8,8)"), 8)
            .unwrap();
        let mut orders = vec![vec![]];
        for n in 0..4 {
            orders = orders
                .into_iter()
                .flat_map(|o: Vec<usize>| (0..=o.len()).map(move |i| {
                    let mut o = o.clone();
                    o.insert(i, n);
                    o
                }))
                .collect();
        }
        assert_eq!(orders.len(), 24);
        for o in orders {
            let st = base.infer_fixpoint_ordered(&o).unwrap();
            assert_eq!(st.render_wm(), "marryA(5,5), married(6,8), divorceA(8,8), divorced(9,inf)", "{o:?}");
        }
    }

    #[test]
    fn perceive_twice_and_merge() {
        let st = init(vec![]).perceive(&lit("p(1,2)"), 1).unwrap();
        let again = st.perceive(&lit("p(1,2)"), 1).unwrap();
        assert_eq!(st.wm(), again.wm());
        let st = again.perceive(&lit("p(3,5)"), 3).unwrap();
        assert_eq!(st.render_wm(), "p(1,5)");
        assert_eq!(st.wm()[0].since, 3);
        assert!(matches!(st.perceive(&lit("p(1,1)"), 2), Err(Error::TimeRegression { .. })));
        assert!(matches!(st.perceive(&lit("p(T,1)"), 4), Err(Error::NonGround(_))));
    }

    #[test]
    fn perception_revises_opposite() {
        let st = init(vec![]).perceive(&lit("p(0,10)"), 0).unwrap().perceive(&lit("~p(4,5)"), 4).unwrap();
        assert_eq!(st.render_wm(), "p(0,3), ~p(4,5), p(6,10)");
    }

    #[test]
    fn revise_examples() {
        let st = init(vec![]).perceive(&lit("q(3,10)"), 0).unwrap();
        let r = st.revise(&parse_atom("p(5,7)").unwrap(), &parse_atom("q(3,10)").unwrap()).unwrap();
        assert_eq!(r.render_wm(), "q(3,4), q(8,10)");
        let st = init(vec![]).perceive(&lit("q(3,7)"), 0).unwrap();
        let r = st.revise(&parse_atom("p(3,7)").unwrap(), &parse_atom("q(3,7)").unwrap()).unwrap();
        assert_eq!(r.render_wm(), "");
        let st = init(vec![]).perceive(&lit("married(6,inf)"), 5).unwrap();
        let r = st.revise(&parse_atom("divorced(9,inf)").unwrap(), &parse_atom("married(6,inf)").unwrap()).unwrap();
        assert_eq!(r.render_wm(), "married(6,8)");
        assert!(matches!(
            st.revise(&parse_atom("p(1,1)").unwrap(), &parse_atom("married(7,inf)").unwrap()),
            Err(Error::NoSuchBelief(_))
        ));
    }

    #[test]
    fn query_rules_and_errors() {
        let st = agent(&UMBRELLA_RULES);
        assert!(st.query(&f("K(rain(A,B) -> take(A,B,umbrella))")).unwrap());
        assert!(st.query(&f("rain(A,B) -> take(A,B,umbrella)")).is_err());
        assert!(!st.query(&f("K(rain(A,B) -> take(B,A,umbrella))")).unwrap());
        assert!(!st.query(&f("B p(1,1)")).unwrap());
        assert!(st.query(&f("~B p(1,1) & true")).unwrap());
        assert!(matches!(st.query(&f("box B p(1,1)")), Err(Error::UnsupportedQuery(_))));
        assert!(matches!(st.query(&f("B p(T,1)")), Err(Error::NonGround(_))));
    }

    #[test]
    fn budget() {
        // p(0,1) merges the derived point, so this one stops on its own
        let st = agent(&["K(p(T,T) -> p(T+1,T+1))"]).perceive(&lit("p(0,0)"), 0).unwrap();
        assert_eq!(st.infer_fixpoint().unwrap().render_wm(), "p(0,1)");
        let st = agent(&["K(p(T,T) -> r(T+2,T+2))", "K(r(T,T) -> p(T,T))"]).perceive(&lit("p(0,0)"), 0).unwrap();
        assert!(matches!(st.clone().with_budget(50).infer_fixpoint(), Err(Error::BudgetExhausted(50))));
    }

    #[test]
    fn windows() {
        let st = agent(&["K(box[0,10] p(T,T) -> q(T,T))"])
            .perceive(&lit("p(4,4)"), 4)
            .unwrap()
            .perceive(&lit("p(12,12)"), 12)
            .unwrap()
            .infer_fixpoint()
            .unwrap();
        assert_eq!(st.render_wm(), "p(4,4), q(4,4), p(12,12)");
    }

    #[test]
    fn replay_reproduces() {
        let start = agent(&MARRIAGE_RULES);
        let st = start
            .perceive(&lit("marryA(5,5)"), 5)
            .unwrap()
            .infer_fixpoint()
            .unwrap()
            .perceive(&lit("divorceA(8,8)"), 8)
            .unwrap()
            .infer_fixpoint()
            .unwrap();
        let text = trace_to_jsonl(st.trace());
        assert!(text.lines().all(|l| l.contains("\"schema_version\":1")));
        let events = trace_from_jsonl(&text).unwrap();
        let again = replay(&start, &events).unwrap();
        assert_eq!(again.wm_json(), st.wm_json());
        assert_eq!(again, st);
    }

    #[test]
    fn bridge_agrees_with_checker() {
        let st = agent(&MARRIAGE_RULES)
            .perceive(&lit("marryA(5,5)"), 5)
            .unwrap()
            .infer_fixpoint()
            .unwrap()
            .perceive(&lit("divorceA(8,8)"), 8)
            .unwrap()
            .infer_fixpoint()
            .unwrap()
            .perceive(&lit("~single(2,3)"), 9)
            .unwrap();
        let h = 12;
        let m = to_model(&st, h);
        assert!(validate_model(&m).is_empty());
        for pred in ["married", "divorced", "marryA", "single"] {
            for a in 0..=h {
                for b in a..=h {
                    for sign in ["", "~"] {
                        let q = f(&format!("B {sign}{pred}({a},{b})"));
                        assert_eq!(st.query(&q).unwrap(), m.check(0, &q).unwrap(), "{q}");
                    }
                }
            }
        }
        let empty = to_model(&init(vec![]), 5);
        assert!(empty.nbhd(0).is_empty());
        assert!(!empty.check(0, &f("B p(1,1)")).unwrap());
    }
}
