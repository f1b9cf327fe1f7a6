//! Finite neighbourhood models `⟨W, N, R, V, T⟩` and the model checker.
//!
//! `R` is stored as a partition of the worlds, so it is an equivalence
//! relation by construction. Each world's interval `I(w)` is derived from its
//! valuation: the least lower bound and the greatest upper bound over its
//! atoms, or `[0,inf)` for an empty valuation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::dynamics;
use crate::error::{Error, Result};
use crate::formula::{Atom, Formula};
use crate::parser::parse_atom_list;
use crate::time::Interval;

/// Index of a world in its model.
pub type WorldIx = usize;

/// A set of worlds, by index.
pub type WorldSet = BTreeSet<WorldIx>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub id: String,
    pub atoms: BTreeSet<Atom>,
}

impl World {
    pub fn new(id: impl Into<String>, atoms: impl IntoIterator<Item = Atom>) -> Self {
        World { id: id.into(), atoms: atoms.into_iter().collect() }
    }

    /// `I(w)`.
    pub fn interval(&self) -> Interval {
        let mut it = self.atoms.iter().filter_map(|a| a.interval().ok());
        let Some(first) = it.next() else {
            return Interval::ALL;
        };
        it.fold(first, |acc, iv| acc.hull(&iv))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TLekModel {
    worlds: Vec<World>,
    classes: Vec<Vec<WorldIx>>,
    class_of: Vec<usize>,
    nbhd: Vec<BTreeSet<WorldSet>>,
    intervals: Vec<Interval>,
}

/// A breach of one of the two neighbourhood frame conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// 1: every neighbourhood element lies inside the epistemic state.
    /// 2: R-related worlds have included neighbourhoods.
    pub condition: u8,
    pub world: String,
    pub other: Option<String>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.other {
            Some(o) => write!(f, "condition {} at ({}, {}): {}", self.condition, self.world, o, self.detail),
            None => write!(f, "condition {} at {}: {}", self.condition, self.world, self.detail),
        }
    }
}

impl TLekModel {
    /// Builds a model. `classes` must partition the worlds and every atom
    /// must be ground; the frame conditions are checked separately by
    /// [`validate_model`].
    pub fn new(worlds: Vec<World>, classes: Vec<Vec<WorldIx>>, nbhd: Vec<BTreeSet<WorldSet>>) -> Result<Self> {
        let n = worlds.len();
        if nbhd.len() != n {
            return Err(Error::MalformedModel(format!("{} neighbourhoods for {n} worlds", nbhd.len())));
        }
        let mut ids = BTreeSet::new();
        for w in &worlds {
            if !ids.insert(w.id.as_str()) {
                return Err(Error::MalformedModel(format!("duplicate world `{}`", w.id)));
            }
            if let Some(a) = w.atoms.iter().find(|a| !a.is_ground()) {
                return Err(Error::MalformedModel(format!("world `{}`: atom {a} is not ground", w.id)));
            }
        }
        let mut classes: Vec<Vec<WorldIx>> = classes
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c
            })
            .collect();
        classes.sort();
        let mut class_of = vec![usize::MAX; n];
        for (ci, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::MalformedModel("empty class".into()));
            }
            for &w in class {
                if w >= n {
                    return Err(Error::MalformedModel(format!("class member {w} out of range")));
                }
                if class_of[w] != usize::MAX {
                    return Err(Error::MalformedModel(format!("world `{}` in two classes", worlds[w].id)));
                }
                class_of[w] = ci;
            }
        }
        if let Some(w) = class_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::MalformedModel(format!("world `{}` in no class", worlds[w].id)));
        }
        if nbhd.iter().flatten().flatten().any(|&v| v >= n) {
            return Err(Error::MalformedModel("neighbourhood mentions an unknown world".into()));
        }
        let intervals = worlds.iter().map(World::interval).collect();
        Ok(TLekModel { worlds, classes, class_of, nbhd, intervals })
    }

    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    pub fn world(&self, w: WorldIx) -> &World {
        &self.worlds[w]
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn world_index(&self, id: &str) -> Result<WorldIx> {
        self.worlds.iter().position(|w| w.id == id).ok_or_else(|| Error::UnknownWorld(id.to_string()))
    }

    pub fn classes(&self) -> &[Vec<WorldIx>] {
        &self.classes
    }

    /// `R(w)`.
    pub fn class(&self, w: WorldIx) -> &[WorldIx] {
        &self.classes[self.class_of[w]]
    }

    pub fn related(&self, w: WorldIx, v: WorldIx) -> bool {
        self.class_of[w] == self.class_of[v]
    }

    /// `N(w)`.
    pub fn nbhd(&self, w: WorldIx) -> &BTreeSet<WorldSet> {
        &self.nbhd[w]
    }

    /// `I(w)`.
    pub fn world_interval(&self, w: WorldIx) -> Interval {
        self.intervals[w]
    }

    /// Same worlds and relation, new neighbourhood function.
    pub fn with_nbhd(&self, nbhd: Vec<BTreeSet<WorldSet>>) -> TLekModel {
        assert_eq!(nbhd.len(), self.worlds.len());
        TLekModel { nbhd, ..self.clone() }
    }

    /// Atoms of every world in `R(w)`.
    pub fn class_atoms(&self, w: WorldIx) -> BTreeSet<&Atom> {
        self.class(w).iter().flat_map(|&v| self.worlds[v].atoms.iter()).collect()
    }

    pub(crate) fn covers(&self, w: WorldIx, span: Option<Interval>) -> bool {
        span.is_none_or(|s| s.is_subset(&self.intervals[w]))
    }

    /// `M, w ⊨ φ` for a ground formula. Dynamic prefixes are evaluated by
    /// applying the operation (see [`dynamics::check_dynamic`]).
    pub fn check(&self, w: WorldIx, f: &Formula) -> Result<bool> {
        if !f.is_ground() {
            return Err(Error::NonGround(f.to_string()));
        }
        self.eval(w, f)
    }

    /// `‖φ‖` at `w`: the worlds of `R(w)` satisfying φ.
    pub fn extension(&self, w: WorldIx, f: &Formula) -> Result<WorldSet> {
        if !f.is_ground() {
            return Err(Error::NonGround(f.to_string()));
        }
        self.ext(w, f)
    }

    /// φ holds at every world.
    pub fn valid_in_model(&self, f: &Formula) -> Result<bool> {
        for w in 0..self.len() {
            if !self.check(w, f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub(crate) fn ext(&self, w: WorldIx, f: &Formula) -> Result<WorldSet> {
        let mut out = WorldSet::new();
        for &v in self.class(w) {
            if self.eval(v, f)? {
                out.insert(v);
            }
        }
        Ok(out)
    }

    fn gate(&self, w: WorldIx, fs: &[&Formula]) -> Result<bool> {
        for f in fs {
            if !self.covers(w, f.span()?) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn everywhere(&self, w: WorldIx, f: &Formula) -> Result<bool> {
        for &v in self.class(w) {
            if !self.eval(v, f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    // `f` is ground
    pub(crate) fn eval(&self, w: WorldIx, f: &Formula) -> Result<bool> {
        Ok(match f {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(a) => self.worlds[w].atoms.contains(a) && self.covers(w, Some(a.interval()?)),
            Formula::Not(a) => self.gate(w, &[a])? && !self.eval(w, a)?,
            Formula::And(a, b) => self.gate(w, &[a, b])? && self.eval(w, a)? && self.eval(w, b)?,
            Formula::Or(a, b) => self.gate(w, &[a, b])? && (self.eval(w, a)? || self.eval(w, b)?),
            Formula::Implies(a, b) => self.gate(w, &[a, b])? && (!self.eval(w, a)? || self.eval(w, b)?),
            Formula::Iff(a, b) => self.gate(w, &[a, b])? && (self.eval(w, a)? == self.eval(w, b)?),
            Formula::Belief(a) => self.gate(w, &[a])? && self.nbhd[w].contains(&self.ext(w, a)?),
            Formula::Knowledge(a) => self.gate(w, &[a])? && self.everywhere(w, a)?,
            Formula::Always(j, a) => {
                let j = j.interval()?;
                a.span()?.is_none_or(|s| s.is_subset(&j))
                    && j.is_subset(&self.intervals[w])
                    && self.everywhere(w, a)?
            }
            Formula::Dynamic(op, body) => dynamics::eval_dynamic(self, w, op, body)?,
        })
    }

    /// Renders a world set as `{w0, w1}`.
    pub fn show_set(&self, s: &WorldSet) -> String {
        let ids: Vec<&str> = s.iter().map(|&v| self.worlds[v].id.as_str()).collect();
        format!("{{{}}}", ids.join(", "))
    }

    /// Text form: `worlds:`, `classes:` and `nbhd:` sections.
    pub fn save(&self) -> String {
        let mut out = String::from("worlds:\n");
        for w in &self.worlds {
            let atoms: Vec<String> = w.atoms.iter().map(|a| a.to_string()).collect();
            if atoms.is_empty() {
                out += &format!("  {}:\n", w.id);
            } else {
                out += &format!("  {}: {}\n", w.id, atoms.join(", "));
            }
        }
        out += "classes:\n";
        for c in &self.classes {
            out += &format!("  {}\n", self.show_set(&c.iter().copied().collect()));
        }
        out += "nbhd:\n";
        for (w, n) in self.nbhd.iter().enumerate() {
            let sets: Vec<String> = n.iter().map(|s| self.show_set(s)).collect();
            if sets.is_empty() {
                out += &format!("  {}:\n", self.worlds[w].id);
            } else {
                out += &format!("  {}: {}\n", self.worlds[w].id, sets.join(", "));
            }
        }
        out
    }

    pub fn load(text: &str) -> Result<TLekModel> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Worlds,
            Classes,
            Nbhd,
        }
        let mut section = Section::None;
        let mut worlds: Vec<World> = Vec::new();
        let mut class_lines: Vec<(usize, String)> = Vec::new();
        let mut nbhd_lines: Vec<(usize, String, String)> = Vec::new();
        let bad = |line: usize, msg: String| Error::MalformedModel(format!("line {line}: {msg}"));
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "worlds:" => section = Section::Worlds,
                "classes:" => section = Section::Classes,
                "nbhd:" => section = Section::Nbhd,
                _ => match section {
                    Section::None => return Err(bad(ln, "content before the `worlds:` section".into())),
                    Section::Worlds => {
                        let (id, rest) = split_entry(line).ok_or_else(|| bad(ln, "expected `id: atoms`".into()))?;
                        let atoms = parse_atom_list(rest).map_err(|e| bad(ln, e.to_string()))?;
                        worlds.push(World::new(id, atoms));
                    }
                    Section::Classes => class_lines.push((ln, line.to_string())),
                    Section::Nbhd => {
                        let (id, rest) = split_entry(line).ok_or_else(|| bad(ln, "expected `id: sets`".into()))?;
                        nbhd_lines.push((ln, id.to_string(), rest.to_string()));
                    }
                },
            }
        }
        let index: BTreeMap<&str, WorldIx> = worlds.iter().enumerate().map(|(i, w)| (w.id.as_str(), i)).collect();
        let lookup = |ln: usize, id: &str| index.get(id).copied().ok_or_else(|| bad(ln, format!("unknown world `{id}`")));
        let mut classes = Vec::new();
        for (ln, line) in &class_lines {
            let sets = parse_sets(line).map_err(|m| bad(*ln, m))?;
            for s in sets {
                classes.push(s.iter().map(|id| lookup(*ln, id)).collect::<Result<Vec<_>>>()?);
            }
        }
        let mut nbhd = vec![BTreeSet::new(); worlds.len()];
        let mut seen = BTreeSet::new();
        for (ln, id, rest) in &nbhd_lines {
            let w = lookup(*ln, id)?;
            if !seen.insert(w) {
                return Err(bad(*ln, format!("second neighbourhood for `{id}`")));
            }
            for s in parse_sets(rest).map_err(|m| bad(*ln, m))? {
                nbhd[w].insert(s.iter().map(|id| lookup(*ln, id)).collect::<Result<WorldSet>>()?);
            }
        }
        TLekModel::new(worlds, classes, nbhd)
    }
}

fn split_entry(line: &str) -> Option<(&str, &str)> {
    let (id, rest) = line.split_once(':')?;
    let id = id.trim();
    valid_id(id).then_some((id, rest.trim()))
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

// `{a, b}, {}, {c}`
fn parse_sets(text: &str) -> std::result::Result<Vec<Vec<String>>, String> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let body = rest.strip_prefix('{').ok_or_else(|| format!("expected `{{` at `{rest}`"))?;
        let close = body.find('}').ok_or("unclosed `{`")?;
        let members: Vec<String> = body[..close]
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        if let Some(m) = members.iter().find(|m| !valid_id(m)) {
            return Err(format!("bad world id `{m}`"));
        }
        if body[..close].contains(',') && members.len() != body[..close].split(',').count() {
            return Err("empty member in world set".into());
        }
        out.push(members);
        rest = body[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err("trailing `,`".into());
            }
        } else if !rest.is_empty() {
            return Err(format!("expected `,` at `{rest}`"));
        }
    }
    Ok(out)
}

/// Checks both neighbourhood frame conditions for every world (pair).
pub fn validate_model(m: &TLekModel) -> Vec<Violation> {
    let mut out = Vec::new();
    for w in 0..m.len() {
        let class: WorldSet = m.class(w).iter().copied().collect();
        for x in m.nbhd(w) {
            if !x.is_subset(&class) {
                out.push(Violation {
                    condition: 1,
                    world: m.world(w).id.clone(),
                    other: None,
                    detail: format!("{} is not inside R({})", m.show_set(x), m.world(w).id),
                });
            }
        }
        for &v in m.class(w) {
            if v != w && !m.nbhd(w).is_subset(m.nbhd(v)) {
                out.push(Violation {
                    condition: 2,
                    world: m.world(w).id.clone(),
                    other: Some(m.world(v).id.clone()),
                    detail: format!("N({}) is not included in N({})", m.world(w).id, m.world(v).id),
                });
            }
        }
    }
    out
}

/// `I(w)` of a world given by id.
pub fn world_interval(m: &TLekModel, id: &str) -> Result<Interval> {
    Ok(m.world_interval(m.world_index(id)?))
}

/// True when every world's interval includes `iv`.
pub fn covers_everywhere(m: &TLekModel, iv: Interval) -> bool {
    (0..m.len()).all(|w| iv.is_subset(&m.world_interval(w)))
}

impl fmt::Display for TLekModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.save())
    }
}
