//! Formulas of the static and dynamic timed belief/knowledge languages.
//!
//! The first two arguments of every atom are its time bounds. Variables start
//! with an uppercase letter; predicates and constants with a lowercase one.
//! Grounding is on demand: [`substitute`] instantiates whatever a
//! [`Substitution`] binds and leaves the rest symbolic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::{Interval, TimeExpr, TimePoint};

/// Non-time argument of an atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    Const(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(s) | Term::Const(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub from: TimeExpr,
    pub to: TimeExpr,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, from: TimeExpr, to: TimeExpr, args: Vec<Term>) -> Self {
        Atom { predicate: predicate.into(), from, to, args }
    }

    /// Ground atom over `iv` with constant extra arguments.
    pub fn ground(predicate: impl Into<String>, iv: Interval, args: &[&str]) -> Self {
        Atom {
            predicate: predicate.into(),
            from: TimeExpr::Lit(TimePoint::At(iv.lo())),
            to: TimeExpr::Lit(iv.hi()),
            args: args.iter().map(|a| Term::Const(a.to_string())).collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.from.as_lit().is_some()
            && self.to.as_lit().is_some()
            && self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }

    /// Time interval of a ground atom.
    pub fn interval(&self) -> Result<Interval> {
        match (self.from.as_lit(), self.to.as_lit()) {
            (Some(lo), Some(hi)) => Interval::new(lo, hi),
            _ => Err(Error::NonGround(self.to_string())),
        }
    }

    /// Same predicate and extra arguments, ignoring the time bounds.
    pub fn same_fluent(&self, other: &Atom) -> bool {
        self.predicate == other.predicate && self.args == other.args
    }

    /// This atom's fluent over another interval.
    pub fn with_interval(&self, iv: Interval) -> Atom {
        Atom {
            predicate: self.predicate.clone(),
            from: TimeExpr::Lit(TimePoint::At(iv.lo())),
            to: TimeExpr::Lit(iv.hi()),
            args: self.args.clone(),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for e in [&self.from, &self.to] {
            if let Some(n) = e.var_name() {
                out.insert(n.to_string());
            }
        }
        for t in &self.args {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{}", self.predicate, self.from, self.to)?;
        for a in &self.args {
            write!(f, ",{a}")?;
        }
        f.write_str(")")
    }
}

/// An atom or a negated atom.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, positive: false }
    }

    pub fn to_formula(&self) -> Formula {
        let a = Formula::Atom(self.atom.clone());
        if self.positive {
            a
        } else {
            Formula::not(a)
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            f.write_str("~")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// Interval whose bounds may still mention variables (the index of `box`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntervalExpr {
    pub lo: TimeExpr,
    pub hi: TimeExpr,
}

impl IntervalExpr {
    pub fn all() -> Self {
        IntervalExpr::from(Interval::ALL)
    }

    pub fn is_default(&self) -> bool {
        *self == IntervalExpr::all()
    }

    pub fn interval(&self) -> Result<Interval> {
        match (self.lo.as_lit(), self.hi.as_lit()) {
            (Some(lo), Some(hi)) => Interval::new(lo, hi),
            _ => Err(Error::NonGround(self.to_string())),
        }
    }
}

impl From<Interval> for IntervalExpr {
    fn from(iv: Interval) -> Self {
        IntervalExpr { lo: TimeExpr::Lit(TimePoint::At(iv.lo())), hi: TimeExpr::Lit(iv.hi()) }
    }
}

impl fmt::Display for IntervalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let close = if self.hi == TimeExpr::Lit(TimePoint::Infinity) { ')' } else { ']' };
        write!(f, "[{},{}{}", self.lo, self.hi, close)
    }
}

/// The four mental operations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MentalOp {
    /// `+φ`: form a belief from a perceived literal.
    Learn(Literal),
    /// `∩(φ,ψ)`: conjoin two beliefs.
    Conj(Formula, Formula),
    /// `⊢(φ,ψ)`: one inference step to the ground atom ψ.
    Infer(Formula, Atom),
    /// `⊣(p,q)`: restructure the belief in `q` given `p`.
    Revise(Atom, Atom),
}

impl MentalOp {
    /// The formulas an operation carries, atoms wrapped as formulas.
    pub fn payloads(&self) -> Vec<Formula> {
        match self {
            MentalOp::Learn(l) => vec![l.to_formula()],
            MentalOp::Conj(a, b) => vec![a.clone(), b.clone()],
            MentalOp::Infer(a, b) => vec![a.clone(), Formula::Atom(b.clone())],
            MentalOp::Revise(a, b) => vec![Formula::Atom(a.clone()), Formula::Atom(b.clone())],
        }
    }

    pub fn is_ground(&self) -> bool {
        self.payloads().iter().all(Formula::is_ground)
    }

    /// Time of the operation itself: the payload for `+`, the hull for `∩`,
    /// the conclusion for `⊢`, and the hull of the restored part of `q` for
    /// `⊣` (all of `q` when nothing remains).
    pub fn time(&self) -> Result<Option<Interval>> {
        match self {
            MentalOp::Learn(l) => l.atom.interval().map(Some),
            MentalOp::Conj(a, b) => Ok(hull_opt(a.span()?, b.span()?)),
            MentalOp::Infer(_, b) => b.interval().map(Some),
            MentalOp::Revise(p, q) => {
                let tq = q.interval()?;
                let rest = tq.difference(&p.interval()?);
                Ok(Some(rest.hull().unwrap_or(tq)))
            }
        }
    }

    pub(crate) fn map_formulas(&self, f: &mut impl FnMut(&Formula) -> Result<Formula>) -> Result<MentalOp> {
        let atom_of = |x: Formula| match x {
            Formula::Atom(a) => Ok(a),
            other => Err(Error::MalformedOp(format!("expected an atom, got {other}"))),
        };
        Ok(match self {
            MentalOp::Learn(l) => {
                let a = atom_of(f(&Formula::Atom(l.atom.clone()))?)?;
                MentalOp::Learn(Literal { atom: a, positive: l.positive })
            }
            MentalOp::Conj(a, b) => MentalOp::Conj(f(a)?, f(b)?),
            MentalOp::Infer(a, b) => MentalOp::Infer(f(a)?, atom_of(f(&Formula::Atom(b.clone()))?)?),
            MentalOp::Revise(a, b) => MentalOp::Revise(
                atom_of(f(&Formula::Atom(a.clone()))?)?,
                atom_of(f(&Formula::Atom(b.clone()))?)?,
            ),
        })
    }
}

impl fmt::Display for MentalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MentalOp::Learn(l) => write!(f, "+{l}"),
            MentalOp::Conj(a, b) => write!(f, "and({a},{b})"),
            MentalOp::Infer(a, b) => write!(f, "inf({a},{b})"),
            MentalOp::Revise(a, b) => write!(f, "rev({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Always(IntervalExpr, Box<Formula>),
    Belief(Box<Formula>),
    Knowledge(Box<Formula>),
    Dynamic(Box<MentalOp>, Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }
    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }
    pub fn always(iv: impl Into<IntervalExpr>, f: Formula) -> Self {
        Formula::Always(iv.into(), Box::new(f))
    }
    pub fn belief(f: Formula) -> Self {
        Formula::Belief(Box::new(f))
    }
    pub fn knowledge(f: Formula) -> Self {
        Formula::Knowledge(Box::new(f))
    }
    pub fn dynamic(op: MentalOp, f: Formula) -> Self {
        Formula::Dynamic(Box::new(op), Box::new(f))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn conj_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::and).unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn disj_all(items: impl IntoIterator<Item = Formula>) -> Formula {
        items.into_iter().reduce(Formula::or).unwrap_or(Formula::False)
    }

    pub fn is_ground(&self) -> bool {
        free_vars(self).is_empty()
    }

    /// True when no dynamic prefix occurs anywhere, including inside
    /// operation payloads.
    pub fn is_static(&self) -> bool {
        self.dynamic_depth() == 0
    }

    /// Maximum nesting of dynamic prefixes.
    pub fn dynamic_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 0,
            Formula::Not(a) | Formula::Always(_, a) | Formula::Belief(a) | Formula::Knowledge(a) => a.dynamic_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.dynamic_depth().max(b.dynamic_depth())
            }
            Formula::Dynamic(op, body) => {
                let inner = op.payloads().iter().map(Formula::dynamic_depth).max().unwrap_or(0);
                1 + inner.max(body.dynamic_depth())
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => 1,
            Formula::Not(a) | Formula::Always(_, a) | Formula::Belief(a) | Formula::Knowledge(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Dynamic(op, body) => 1 + body.size() + op.payloads().iter().map(Formula::size).sum::<usize>(),
        }
    }

    /// The time function, with `None` for formulas built only from
    /// `true`/`false`. Such formulas impose no timing condition and are the
    /// identity of the hull.
    ///
    /// A dynamic formula `[α]φ` is timed by its body φ.
    pub fn span(&self) -> Result<Option<Interval>> {
        match self {
            Formula::True | Formula::False => Ok(None),
            Formula::Atom(a) => a.interval().map(Some),
            Formula::Not(a) | Formula::Belief(a) | Formula::Knowledge(a) => a.span(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                Ok(hull_opt(a.span()?, b.span()?))
            }
            Formula::Always(iv, _) => iv.interval().map(Some),
            Formula::Dynamic(op, body) => {
                if !op.is_ground() {
                    return Err(Error::NonGround(op.to_string()));
                }
                body.span()
            }
        }
    }
}

pub(crate) fn hull_opt(a: Option<Interval>, b: Option<Interval>) -> Option<Interval> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.hull(&y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// The time function `T` on ground formulas.
pub fn time_of(f: &Formula) -> Result<Interval> {
    f.span()?.ok_or_else(|| Error::Timeless(f.to_string()))
}

/// Variables occurring anywhere in `f`.
pub fn free_vars(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_vars(f, &mut out);
    out
}

fn collect_vars(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(a) => a.collect_vars(out),
        Formula::Not(a) | Formula::Belief(a) | Formula::Knowledge(a) => collect_vars(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            collect_vars(a, out);
            collect_vars(b, out);
        }
        Formula::Always(iv, a) => {
            for e in [&iv.lo, &iv.hi] {
                if let Some(n) = e.var_name() {
                    out.insert(n.to_string());
                }
            }
            collect_vars(a, out);
        }
        Formula::Dynamic(op, body) => {
            for p in op.payloads() {
                collect_vars(&p, out);
            }
            collect_vars(body, out);
        }
    }
}

/// Ground value of a variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Value {
    Time(TimePoint),
    Const(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Time(t) => write!(f, "{t}"),
            Value::Const(c) => f.write_str(c),
        }
    }
}

pub type Substitution = BTreeMap<String, Value>;

fn subst_time(e: &TimeExpr, s: &Substitution) -> Result<TimeExpr> {
    match e {
        TimeExpr::Lit(_) => Ok(e.clone()),
        TimeExpr::Var { name, .. } => match s.get(name) {
            None => Ok(e.clone()),
            Some(Value::Time(_)) => e
                .eval_by(|n| match s.get(n) {
                    Some(Value::Time(t)) => Ok(Some(*t)),
                    _ => Err(Error::TypeMismatch(n.to_string())),
                })
                .map(TimeExpr::Lit),
            Some(Value::Const(_)) => Err(Error::TypeMismatch(name.clone())),
        },
    }
}

fn check_bounds(lo: &TimeExpr, hi: &TimeExpr, what: &dyn fmt::Display) -> Result<()> {
    if lo.as_lit() == Some(TimePoint::Infinity) {
        return Err(Error::BadInterval(format!("{what}: lower bound cannot be inf")));
    }
    if let (Some(l), Some(h)) = (lo.as_lit(), hi.as_lit()) {
        if l > h {
            return Err(Error::BadInterval(format!("{what}: {l} > {h}")));
        }
    }
    Ok(())
}

pub fn substitute_atom(a: &Atom, s: &Substitution) -> Result<Atom> {
    let from = subst_time(&a.from, s)?;
    let to = subst_time(&a.to, s)?;
    let args = a
        .args
        .iter()
        .map(|t| match t {
            Term::Const(_) => Ok(t.clone()),
            Term::Var(v) => match s.get(v) {
                None => Ok(t.clone()),
                Some(Value::Const(c)) => Ok(Term::Const(c.clone())),
                Some(Value::Time(_)) => Err(Error::TypeMismatch(v.clone())),
            },
        })
        .collect::<Result<Vec<_>>>()?;
    let out = Atom { predicate: a.predicate.clone(), from, to, args };
    check_bounds(&out.from, &out.to, &out)?;
    Ok(out)
}

/// Uniformly replaces every variable bound by `s`; grounded atoms and box
/// intervals are re-validated.
pub fn substitute(f: &Formula, s: &Substitution) -> Result<Formula> {
    let rec = |x: &Formula| substitute(x, s).map(Box::new);
    Ok(match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(a) => Formula::Atom(substitute_atom(a, s)?),
        Formula::Not(a) => Formula::Not(rec(a)?),
        Formula::Belief(a) => Formula::Belief(rec(a)?),
        Formula::Knowledge(a) => Formula::Knowledge(rec(a)?),
        Formula::And(a, b) => Formula::And(rec(a)?, rec(b)?),
        Formula::Or(a, b) => Formula::Or(rec(a)?, rec(b)?),
        Formula::Implies(a, b) => Formula::Implies(rec(a)?, rec(b)?),
        Formula::Iff(a, b) => Formula::Iff(rec(a)?, rec(b)?),
        Formula::Always(iv, a) => {
            let iv = IntervalExpr { lo: subst_time(&iv.lo, s)?, hi: subst_time(&iv.hi, s)? };
            check_bounds(&iv.lo, &iv.hi, &iv)?;
            Formula::Always(iv, rec(a)?)
        }
        Formula::Dynamic(op, body) => {
            let op = op.map_formulas(&mut |x| substitute(x, s))?;
            Formula::Dynamic(Box::new(op), rec(body)?)
        }
    })
}

/// Substitutes and requires the result to be ground.
pub fn ground(f: &Formula, s: &Substitution) -> Result<Formula> {
    if let Some(v) = free_vars(f).into_iter().find(|v| !s.contains_key(v)) {
        return Err(Error::UnboundVariable(v));
    }
    substitute(f, s)
}

fn split_vars(f: &Formula, times: &mut BTreeSet<String>, objects: &mut BTreeSet<String>) {
    let atom = |a: &Atom, times: &mut BTreeSet<String>, objects: &mut BTreeSet<String>| {
        times.extend([&a.from, &a.to].iter().filter_map(|e| e.var_name()).map(str::to_string));
        objects.extend(a.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.clone()),
            Term::Const(_) => None,
        }));
    };
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(a) => atom(a, times, objects),
        Formula::Not(a) | Formula::Belief(a) | Formula::Knowledge(a) => split_vars(a, times, objects),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            split_vars(a, times, objects);
            split_vars(b, times, objects);
        }
        Formula::Always(iv, a) => {
            times.extend([&iv.lo, &iv.hi].iter().filter_map(|e| e.var_name()).map(str::to_string));
            split_vars(a, times, objects);
        }
        Formula::Dynamic(op, body) => {
            for p in op.payloads() {
                split_vars(&p, times, objects);
            }
            split_vars(body, times, objects);
        }
    }
}

// Every `box[J] φ` inside has T(φ) within J.
fn windows_respected(f: &Formula) -> Result<bool> {
    Ok(match f {
        Formula::True | Formula::False | Formula::Atom(_) => true,
        Formula::Not(a) | Formula::Belief(a) | Formula::Knowledge(a) => windows_respected(a)?,
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            windows_respected(a)? && windows_respected(b)?
        }
        Formula::Always(iv, a) => {
            let j = iv.interval()?;
            a.span()?.is_none_or(|s| s.is_subset(&j)) && windows_respected(a)?
        }
        Formula::Dynamic(op, body) => {
            op.payloads().iter().map(windows_respected).collect::<Result<Vec<_>>>()?.into_iter().all(|b| b)
                && windows_respected(body)?
        }
    })
}

/// Brute-force grounding: every substitution with time variables drawn
/// from `times` and object variables from `consts` that yields a well-formed
/// ground formula whose `box` windows contain the times of their bodies.
pub fn ground_instances(f: &Formula, times: std::ops::RangeInclusive<u64>, consts: &[&str]) -> Vec<Substitution> {
    let (mut tv, mut ov) = (BTreeSet::new(), BTreeSet::new());
    split_vars(f, &mut tv, &mut ov);
    let mut subs = vec![Substitution::new()];
    for v in &tv {
        subs = subs
            .into_iter()
            .flat_map(|s| {
                times.clone().map(move |t| {
                    let mut s = s.clone();
                    s.insert(v.clone(), Value::Time(TimePoint::At(t)));
                    s
                })
            })
            .collect();
    }
    for v in &ov {
        subs = subs
            .into_iter()
            .flat_map(|s| {
                consts.iter().map(move |c| {
                    let mut s = s.clone();
                    s.insert(v.clone(), Value::Const(c.to_string()));
                    s
                })
            })
            .collect();
    }
    subs.into_iter()
        .filter(|s| ground(f, s).and_then(|g| windows_respected(&g)).unwrap_or(false))
        .collect()
}

fn bind(s: &mut Substitution, name: &str, v: Value) -> bool {
    match s.get(name) {
        Some(old) => *old == v,
        None => {
            s.insert(name.to_string(), v);
            true
        }
    }
}

/// Solves `e = value` for the variable in `e`, extending `s`.
pub(crate) fn unify_time(e: &TimeExpr, value: TimePoint, s: &mut Substitution) -> bool {
    match e {
        TimeExpr::Lit(t) => *t == value,
        TimeExpr::Var { name, offset } => match value.offset(-offset) {
            // a finite value below the offset has no natural solution
            Ok(v) => bind(s, name, Value::Time(v)),
            Err(_) => false,
        },
    }
}

pub(crate) fn unify_term(t: &Term, c: &Term, s: &mut Substitution) -> bool {
    match (t, c) {
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::Var(v), Term::Const(b)) => bind(s, v, Value::Const(b.clone())),
        _ => false,
    }
}

/// Most general substitution making `pattern` syntactically equal to the
/// ground atom `ground`, if any.
pub fn match_atom(pattern: &Atom, ground: &Atom) -> Option<Substitution> {
    let mut s = Substitution::new();
    match_atom_into(pattern, ground, &mut s).then_some(s)
}

pub(crate) fn match_atom_into(pattern: &Atom, ground: &Atom, s: &mut Substitution) -> bool {
    if pattern.predicate != ground.predicate || pattern.args.len() != ground.args.len() {
        return false;
    }
    let (Some(lo), Some(hi)) = (ground.from.as_lit(), ground.to.as_lit()) else {
        return false;
    };
    unify_time(&pattern.from, lo, s)
        && unify_time(&pattern.to, hi, s)
        && pattern.args.iter().zip(&ground.args).all(|(p, g)| unify_term(p, g, s))
}

// Printing. Binding strength: <-> 1, -> 2, | 3, & 4, prefix operators 5.
fn strength(f: &Formula) -> u8 {
    match f {
        Formula::Iff(..) => 1,
        Formula::Implies(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        _ => 5,
    }
}

struct Paren<'a>(&'a Formula, bool);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let operand = |x: &Formula| strength(x) < 5;
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(a) => write!(f, "~{}", Paren(a, operand(a))),
            Formula::Belief(a) => write!(f, "B({a})"),
            Formula::Knowledge(a) => write!(f, "K({a})"),
            Formula::Always(iv, a) => {
                f.write_str("box")?;
                if !iv.is_default() {
                    write!(f, "{iv}")?;
                }
                if operand(a) {
                    write!(f, "({a})")
                } else {
                    write!(f, " {a}")
                }
            }
            Formula::Dynamic(op, a) => write!(f, "[{op}] {}", Paren(a, operand(a))),
            // left-associative
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Iff(a, b) => {
                let (s, sym) = match self {
                    Formula::And(..) => (4, "&"),
                    Formula::Or(..) => (3, "|"),
                    _ => (1, "<->"),
                };
                write!(f, "{} {sym} {}", Paren(a, strength(a) < s), Paren(b, strength(b) <= s))
            }
            // right-associative
            Formula::Implies(a, b) => {
                write!(f, "{} -> {}", Paren(a, strength(a) <= 2), Paren(b, strength(b) < 2))
            }
        }
    }
}
