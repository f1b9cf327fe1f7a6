//! Discrete time: time points with a symbolic infinity, intervals over the
//! naturals, canonical interval sets and the small arithmetic language used in
//! time positions of atoms.
//!
//! Time points are `u64`; arithmetic that would leave that range is reported
//! as an error rather than wrapped.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A natural-number instant or the symbolic point at infinity.
///
/// The derived ordering puts every `At(_)` strictly below `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TimePoint {
    At(u64),
    Infinity,
}

impl TimePoint {
    pub fn is_finite(self) -> bool {
        matches!(self, TimePoint::At(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            TimePoint::At(t) => Some(t),
            TimePoint::Infinity => None,
        }
    }

    /// `Infinity + k = Infinity`; finite overflow is an error.
    pub fn add(self, k: u64) -> Result<TimePoint> {
        match self {
            TimePoint::Infinity => Ok(TimePoint::Infinity),
            TimePoint::At(t) => t
                .checked_add(k)
                .map(TimePoint::At)
                .ok_or_else(|| Error::Underflow(format!("{t}+{k} exceeds the 64-bit time range"))),
        }
    }

    /// `Infinity - k = Infinity`; no subtraction below zero.
    pub fn sub(self, k: u64) -> Result<TimePoint> {
        match self {
            TimePoint::Infinity => Ok(TimePoint::Infinity),
            TimePoint::At(t) => t
                .checked_sub(k)
                .map(TimePoint::At)
                .ok_or_else(|| Error::Underflow(format!("{t}-{k}"))),
        }
    }

    /// Shift by a signed offset.
    pub fn offset(self, k: i64) -> Result<TimePoint> {
        if k >= 0 {
            self.add(k as u64)
        } else {
            self.sub(k.unsigned_abs())
        }
    }
}

impl From<u64> for TimePoint {
    fn from(t: u64) -> Self {
        TimePoint::At(t)
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimePoint::At(t) => write!(f, "{t}"),
            TimePoint::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for TimePoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" {
            return Ok(TimePoint::Infinity);
        }
        s.parse::<u64>()
            .map(TimePoint::At)
            .map_err(|_| Error::BadInterval(format!("`{s}` is not a time point")))
    }
}

/// `[lo,hi]`, or `[lo,inf)` when the upper bound is infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    lo: u64,
    hi: TimePoint,
}

impl Interval {
    /// The default interval of `box`, `[0,inf)`.
    pub const ALL: Interval = Interval { lo: 0, hi: TimePoint::Infinity };

    pub fn new(lo: TimePoint, hi: TimePoint) -> Result<Interval> {
        let TimePoint::At(l) = lo else {
            return Err(Error::BadInterval("lower bound cannot be inf".into()));
        };
        if lo > hi {
            return Err(Error::BadInterval(format!("[{lo},{hi}] has lo > hi")));
        }
        Ok(Interval { lo: l, hi })
    }

    pub fn closed(lo: u64, hi: u64) -> Result<Interval> {
        Interval::new(TimePoint::At(lo), TimePoint::At(hi))
    }

    /// `[lo,inf)`.
    pub fn from(lo: u64) -> Interval {
        Interval { lo, hi: TimePoint::Infinity }
    }

    pub fn point(t: u64) -> Interval {
        Interval { lo: t, hi: TimePoint::At(t) }
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> TimePoint {
        self.hi
    }

    pub fn is_finite(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn contains(&self, t: u64) -> bool {
        self.lo <= t && TimePoint::At(t) <= self.hi
    }

    /// Smallest interval including both.
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (TimePoint::At(lo) <= hi).then_some(Interval { lo, hi })
    }

    pub fn intersect(&self, other: &Interval) -> IntervalSet {
        IntervalSet::from_iter(self.intersection(other))
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.intersection(other).is_some()
    }

    /// Pointwise `self \ other`, at most two parts.
    pub fn difference(&self, other: &Interval) -> IntervalSet {
        let mut parts = Vec::with_capacity(2);
        if self.lo < other.lo {
            let left_hi = self.hi.min(TimePoint::At(other.lo - 1));
            parts.push(Interval { lo: self.lo, hi: left_hi });
        }
        if let Some(h1) = other.hi.finite().and_then(|h| h.checked_add(1)) {
            let right_lo = self.lo.max(h1);
            if TimePoint::At(right_lo) <= self.hi {
                parts.push(Interval { lo: right_lo, hi: self.hi });
            }
        }
        IntervalSet::from_iter(parts)
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Strict superset.
    pub fn strictly_contains(&self, other: &Interval) -> bool {
        other.is_subset(self) && self != other
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hi {
            TimePoint::At(h) => write!(f, "[{},{}]", self.lo, h),
            TimePoint::Infinity => write!(f, "[{},inf)", self.lo),
        }
    }
}

impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadInterval(format!("`{s}` is not an interval"));
        let body = s.trim().strip_prefix('[').ok_or_else(bad)?;
        let (body, open) = if let Some(b) = body.strip_suffix(')') {
            (b, true)
        } else {
            (body.strip_suffix(']').ok_or_else(bad)?, false)
        };
        let (lo, hi) = body.split_once(',').ok_or_else(bad)?;
        let lo: TimePoint = lo.parse()?;
        let hi: TimePoint = hi.parse()?;
        if open != (hi == TimePoint::Infinity) {
            return Err(bad());
        }
        Interval::new(lo, hi)
    }
}

/// A set of time points in canonical form: sorted, pairwise disjoint and
/// non-adjacent intervals.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn contains(&self, t: u64) -> bool {
        self.parts.iter().any(|p| p.contains(t))
    }

    pub fn insert(&mut self, iv: Interval) {
        self.parts.push(iv);
        self.normalize();
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        self.parts.iter().chain(other.parts.iter()).copied().collect()
    }

    /// Removes every point of `iv`.
    pub fn remove(&self, iv: &Interval) -> IntervalSet {
        self.parts.iter().flat_map(|p| p.difference(iv).parts).collect()
    }

    pub fn hull(&self) -> Option<Interval> {
        let first = self.parts.first()?;
        let last = self.parts.last()?;
        Some(Interval { lo: first.lo, hi: last.hi })
    }

    fn normalize(&mut self) {
        self.parts.sort();
        let mut out: Vec<Interval> = Vec::with_capacity(self.parts.len());
        for iv in self.parts.drain(..) {
            match out.last_mut() {
                Some(last) if adjoins(last, &iv) => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        self.parts = out;
    }
}

// sorted input: `b.lo >= a.lo`
fn adjoins(a: &Interval, b: &Interval) -> bool {
    match a.hi {
        TimePoint::Infinity => true,
        TimePoint::At(h) => b.lo <= h.saturating_add(1),
    }
}

impl FromIterator<Interval> for IntervalSet {
    fn from_iter<I: IntoIterator<Item = Interval>>(iter: I) -> Self {
        let mut set = IntervalSet { parts: iter.into_iter().collect() };
        set.normalize();
        set
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// A time position: literal, variable, or variable plus/minus a constant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TimeExpr {
    Lit(TimePoint),
    Var { name: String, offset: i64 },
}

impl TimeExpr {
    pub fn var(name: impl Into<String>) -> Self {
        TimeExpr::Var { name: name.into(), offset: 0 }
    }

    pub fn lit(t: impl Into<TimePoint>) -> Self {
        TimeExpr::Lit(t.into())
    }

    pub fn as_lit(&self) -> Option<TimePoint> {
        match self {
            TimeExpr::Lit(t) => Some(*t),
            TimeExpr::Var { .. } => None,
        }
    }

    pub fn var_name(&self) -> Option<&str> {
        match self {
            TimeExpr::Lit(_) => None,
            TimeExpr::Var { name, .. } => Some(name),
        }
    }

    /// Evaluates with `lookup` resolving variables; `Ok(None)` from the
    /// lookup means unbound.
    pub fn eval_by(&self, lookup: impl Fn(&str) -> Result<Option<TimePoint>>) -> Result<TimePoint> {
        match self {
            TimeExpr::Lit(t) => Ok(*t),
            TimeExpr::Var { name, offset } => {
                let base = lookup(name)?.ok_or_else(|| Error::UnboundVariable(name.clone()))?;
                base.offset(*offset)
            }
        }
    }
}

/// Evaluates a time expression under a binding of time variables.
pub fn eval_time_expr(e: &TimeExpr, binding: &BTreeMap<String, TimePoint>) -> Result<TimePoint> {
    e.eval_by(|name| Ok(binding.get(name).copied()))
}

impl fmt::Display for TimeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeExpr::Lit(t) => write!(f, "{t}"),
            TimeExpr::Var { name, offset } => match offset.cmp(&0) {
                std::cmp::Ordering::Equal => f.write_str(name),
                std::cmp::Ordering::Greater => write!(f, "{name}+{offset}"),
                std::cmp::Ordering::Less => write!(f, "{name}-{}", offset.unsigned_abs()),
            },
        }
    }
}
