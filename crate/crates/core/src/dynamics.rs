//! Mental operations as model transformers, dynamic formulas, and their
//! reduction to static formulas.
//!
//! Within one epistemic class all neighbourhoods coincide (the relation is
//! an equivalence and the neighbourhood function is monotone along it), so
//! an operation updates a whole class at once: it fires for the class when
//! its guard holds at some world of it. Every extension is computed against
//! the input model.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{Atom, Formula, Literal, MentalOp};
use crate::model::{TLekModel, WorldIx, WorldSet};
use crate::time::{Interval, TimePoint};

/// Neighbourhood changes at one world.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorldDelta {
    pub world: String,
    pub added: Vec<Vec<String>>,
    pub removed: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct OpOutcome {
    pub model: TLekModel,
    /// False when the guard failed everywhere; the model is then the input.
    pub applied: bool,
    pub delta: Vec<WorldDelta>,
}

/// `M^α`.
pub fn apply(m: &TLekModel, op: &MentalOp) -> Result<OpOutcome> {
    if !op.is_ground() {
        return Err(Error::NonGround(op.to_string()));
    }
    apply_ground(m, op)
}

fn apply_ground(m: &TLekModel, op: &MentalOp) -> Result<OpOutcome> {
    let mut nbhd: Vec<BTreeSet<WorldSet>> = (0..m.len()).map(|w| m.nbhd(w).clone()).collect();
    let mut applied = false;
    let mut delta = Vec::new();
    for class in m.classes() {
        let mut fires = false;
        for &w in class {
            if guard(m, w, op)? {
                fires = true;
                break;
            }
        }
        if !fires {
            continue;
        }
        applied = true;
        let (remove, add) = update_sets(m, class[0], op)?;
        for &v in class {
            let before = nbhd[v].clone();
            if let Some(r) = &remove {
                nbhd[v].remove(r);
            }
            nbhd[v].extend(add.iter().cloned());
            let show = |s: &WorldSet| s.iter().map(|&u| m.world(u).id.clone()).collect::<Vec<_>>();
            let added: Vec<_> = nbhd[v].difference(&before).map(show).collect();
            let removed: Vec<_> = before.difference(&nbhd[v]).map(show).collect();
            if !added.is_empty() || !removed.is_empty() {
                delta.push(WorldDelta { world: m.world(v).id.clone(), added, removed });
            }
        }
    }
    let model = if applied { m.with_nbhd(nbhd) } else { m.clone() };
    Ok(OpOutcome { model, applied, delta })
}

fn belief(f: &Formula) -> Formula {
    Formula::belief(f.clone())
}

fn atom(a: &Atom) -> Formula {
    Formula::Atom(a.clone())
}

/// Restriction of `q` to `T(p) ∩ T(q)`, if that is non-empty.
fn revised_part(p: &Atom, q: &Atom) -> Result<Option<Atom>> {
    Ok(p.interval()?.intersection(&q.interval()?).map(|iv| q.with_interval(iv)))
}

/// `q` over each part of `T(q) \ T(p)`.
fn residuals(p: &Atom, q: &Atom) -> Result<Vec<Atom>> {
    let rest = q.interval()?.difference(&p.interval()?);
    Ok(rest.parts().iter().map(|iv| q.with_interval(*iv)).collect())
}

// Believed q-fluent atoms strictly wider than T(p), other than q itself.
fn wider_belief(m: &TLekModel, w: WorldIx, p: &Atom, q: &Atom) -> Result<bool> {
    let tp = p.interval()?;
    for c in m.class_atoms(w) {
        if c.same_fluent(q) && c != q && c.interval()?.strictly_contains(&tp) && m.eval(w, &belief(&atom(c)))? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn guard(m: &TLekModel, w: WorldIx, op: &MentalOp) -> Result<bool> {
    let timed = m.covers(w, op.time()?);
    Ok(match op {
        MentalOp::Learn(_) => timed,
        MentalOp::Conj(a, b) => timed && m.eval(w, &belief(a))? && m.eval(w, &belief(b))?,
        MentalOp::Infer(a, b) => {
            timed
                && m.eval(w, &belief(a))?
                && m.eval(w, &Formula::knowledge(Formula::implies(a.clone(), atom(b))))?
        }
        MentalOp::Revise(p, q) => {
            timed
                && m.eval(w, &belief(&atom(p)))?
                && m.eval(w, &belief(&atom(q)))?
                && m.eval(w, &Formula::knowledge(Formula::implies(atom(p), Formula::not(atom(q)))))?
                && !wider_belief(m, w, p, q)?
        }
    })
}

// Sets to remove and to add in the class of `w`.
fn update_sets(m: &TLekModel, w: WorldIx, op: &MentalOp) -> Result<(Option<WorldSet>, Vec<WorldSet>)> {
    Ok(match op {
        MentalOp::Learn(l) => (None, vec![m.ext(w, &l.to_formula())?]),
        MentalOp::Conj(a, b) => (None, vec![m.ext(w, &Formula::and(a.clone(), b.clone()))?]),
        MentalOp::Infer(_, b) => (None, vec![m.ext(w, &atom(b))?]),
        MentalOp::Revise(p, q) => {
            let remove = match revised_part(p, q)? {
                Some(big_q) => Some(m.ext(w, &atom(&big_q))?),
                None => None,
            };
            let add = residuals(p, q)?.iter().map(|r| m.ext(w, &atom(r))).collect::<Result<_>>()?;
            (remove, add)
        }
    })
}

/// `M, w ⊨ φ` where φ may carry dynamic prefixes: `[α]ψ` holds when ψ
/// holds at `w` in `M^α` and `T(ψ) ⊆ I(w)`.
pub fn check_dynamic(m: &TLekModel, w: WorldIx, f: &Formula) -> Result<bool> {
    m.check(w, f)
}

pub(crate) fn eval_dynamic(m: &TLekModel, w: WorldIx, op: &MentalOp, body: &Formula) -> Result<bool> {
    if !m.covers(w, body.span()?) {
        return Ok(false);
    }
    let out = apply_ground(m, op)?;
    out.model.eval(w, body)
}

/// Rewrites dynamic formulas into static ones, innermost prefix first.
///
/// The `B` clause for `⊣` must enumerate the intervals that could witness a
/// strictly wider belief, so it needs a bound on the finite time points of
/// the models of interest; without one that clause is unreducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct Reducer {
    pub horizon: Option<u64>,
}

/// [`Reducer::reduce`] without a horizon.
pub fn reduce(f: &Formula) -> Result<Formula> {
    Reducer::default().reduce(f)
}

impl Reducer {
    pub fn new(horizon: Option<u64>) -> Self {
        Reducer { horizon }
    }

    pub fn reduce(&self, f: &Formula) -> Result<Formula> {
        if !f.is_ground() {
            return Err(Error::NonGround(f.to_string()));
        }
        self.red(f)
    }

    fn red(&self, f: &Formula) -> Result<Formula> {
        Ok(match f {
            Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
            Formula::Not(a) => Formula::not(self.red(a)?),
            Formula::And(a, b) => Formula::and(self.red(a)?, self.red(b)?),
            Formula::Or(a, b) => Formula::or(self.red(a)?, self.red(b)?),
            Formula::Implies(a, b) => Formula::implies(self.red(a)?, self.red(b)?),
            Formula::Iff(a, b) => Formula::iff(self.red(a)?, self.red(b)?),
            Formula::Always(j, a) => Formula::Always(j.clone(), Box::new(self.red(a)?)),
            Formula::Belief(a) => Formula::belief(self.red(a)?),
            Formula::Knowledge(a) => Formula::knowledge(self.red(a)?),
            Formula::Dynamic(op, body) => {
                let op = op.map_formulas(&mut |x| self.red(x))?;
                let body = self.red(body)?;
                self.push(&op, &body)?
            }
        })
    }

    // `[op] f` for static `f` and an operation with static payloads.
    fn push(&self, op: &MentalOp, f: &Formula) -> Result<Formula> {
        Ok(match f {
            Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
            Formula::Not(a) => Formula::not(self.push(op, a)?),
            Formula::And(a, b) => Formula::and(self.push(op, a)?, self.push(op, b)?),
            Formula::Or(a, b) => Formula::or(self.push(op, a)?, self.push(op, b)?),
            Formula::Implies(a, b) => Formula::implies(self.push(op, a)?, self.push(op, b)?),
            Formula::Iff(a, b) => Formula::iff(self.push(op, a)?, self.push(op, b)?),
            Formula::Knowledge(a) => Formula::knowledge(self.push(op, a)?),
            Formula::Belief(a) => {
                let x = self.push(op, a)?;
                self.belief_clause(op, x)?
            }
            Formula::Always(..) | Formula::Dynamic(..) => {
                return Err(Error::UnreducibleShape(format!("[{op}] {f}")));
            }
        })
    }

    fn belief_clause(&self, op: &MentalOp, x: Formula) -> Result<Formula> {
        use Formula as F;
        let bx = F::belief(x.clone());
        let same = |y: Formula| F::knowledge(F::iff(x.clone(), y));
        Ok(match op {
            MentalOp::Learn(l) => F::or(bx, same(l.to_formula())),
            MentalOp::Conj(a, b) => F::or(
                bx,
                F::and(F::and(belief(a), belief(b)), same(F::and(a.clone(), b.clone()))),
            ),
            MentalOp::Infer(a, b) => F::or(
                bx,
                F::and(F::and(belief(a), F::knowledge(F::implies(a.clone(), atom(b)))), same(atom(b))),
            ),
            MentalOp::Revise(p, q) => {
                let pre = self.revise_guard(op, p, q)?;
                let kept = match revised_part(p, q)? {
                    Some(big_q) => F::and(bx.clone(), F::not(same(atom(&big_q)))),
                    None => bx.clone(),
                };
                let after = F::disj_all(std::iter::once(kept).chain(residuals(p, q)?.iter().map(|r| same(atom(r)))));
                F::or(F::and(F::not(pre.clone()), bx), F::and(pre, after))
            }
        })
    }

    fn revise_guard(&self, op: &MentalOp, p: &Atom, q: &Atom) -> Result<Formula> {
        use Formula as F;
        let Some(h) = self.horizon else {
            return Err(Error::UnreducibleShape(format!("[{op}] B(..) needs a time horizon")));
        };
        let tp = p.interval()?;
        let tq = q.interval()?;
        let mut his: Vec<TimePoint> = match tp.hi() {
            TimePoint::At(b) => (b..=h.max(b)).map(TimePoint::At).collect(),
            TimePoint::Infinity => Vec::new(),
        };
        his.push(TimePoint::Infinity);
        let mut parts = vec![
            belief(&atom(p)),
            belief(&atom(q)),
            F::knowledge(F::implies(atom(p), F::not(atom(q)))),
        ];
        for lo in 0..=tp.lo() {
            for &hi in &his {
                let j = Interval::new(TimePoint::At(lo), hi)?;
                if j.strictly_contains(&tp) && j != tq {
                    let c = atom(&q.with_interval(j));
                    let occurs = F::not(F::knowledge(F::not(c.clone())));
                    parts.push(F::not(F::and(belief(&c), occurs)));
                }
            }
        }
        Ok(F::conj_all(parts))
    }
}

/// One operation-validity instance that failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub model: String,
    pub world: String,
    pub hypothesis: String,
    pub conclusion: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Property1Report {
    pub models: usize,
    /// Instances whose hypothesis held, per operation: learn, conj, infer, revise.
    pub exercised: [usize; 4],
    pub counterexamples: Vec<Counterexample>,
}

impl Property1Report {
    pub fn merge(&mut self, other: Property1Report) {
        self.models += other.models;
        for (a, b) in self.exercised.iter_mut().zip(other.exercised) {
            *a += b;
        }
        self.counterexamples.extend(other.counterexamples);
    }
}

/// The four operation validity schemas, instantiated with the atoms of each model:
/// `[+φ]Bφ`; `(Bφ ∧ Bψ) → [∩(φ,ψ)]B(φ∧ψ)`; `(K(φ→ψ) ∧ Bφ) → [⊢(φ,ψ)]Bψ`;
/// and for `⊣(p,q)` with `T(p) ⊆ T(q)` and its guard, belief in every
/// residual part of `q`. Timing side conditions are part of each
/// hypothesis; `∩` payloads are objective literals.
pub fn property1_suite(models: &[TLekModel]) -> Result<Property1Report> {
    let mut report = Property1Report::default();
    for m in models {
        report.merge(property1_model(m)?);
    }
    Ok(report)
}

fn property1_model(m: &TLekModel) -> Result<Property1Report> {
    let mut report = Property1Report { models: 1, ..Default::default() };
    let atoms: Vec<Atom> = m.worlds().iter().flat_map(|w| w.atoms.iter().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let lits: Vec<Literal> = atoms.iter().flat_map(|a| [Literal::pos(a.clone()), Literal::neg(a.clone())]).collect();
    let mut instances: Vec<(usize, MentalOp, Formula, Vec<Formula>)> = Vec::new();
    for l in &lits {
        instances.push((0, MentalOp::Learn(l.clone()), Formula::True, vec![belief(&l.to_formula())]));
    }
    for a in &lits {
        for b in &lits {
            let (fa, fb) = (a.to_formula(), b.to_formula());
            let hyp = Formula::and(belief(&fa), belief(&fb));
            let concl = belief(&Formula::and(fa.clone(), fb.clone()));
            instances.push((1, MentalOp::Conj(fa, fb), hyp, vec![concl]));
        }
    }
    for a in &lits {
        for b in &atoms {
            let fa = a.to_formula();
            let hyp = Formula::and(Formula::knowledge(Formula::implies(fa.clone(), atom(b))), belief(&fa));
            instances.push((2, MentalOp::Infer(fa, b.clone()), hyp, vec![belief(&atom(b))]));
        }
    }
    for p in &atoms {
        for q in &atoms {
            if p.interval()?.is_subset(&q.interval()?) {
                let concl = residuals(p, q)?.iter().map(|r| belief(&atom(r))).collect();
                instances.push((3, MentalOp::Revise(p.clone(), q.clone()), Formula::True, concl));
            }
        }
    }
    for w in 0..m.len() {
        for (kind, op, hyp, concls) in &instances {
            let holds = match (kind, op) {
                (0, _) => m.covers(w, op.time()?),
                (3, _) => guard(m, w, op)?,
                _ => m.covers(w, op.time()?) && m.eval(w, hyp)?,
            };
            if !holds {
                continue;
            }
            report.exercised[*kind] += 1;
            for c in concls {
                let f = Formula::dynamic(op.clone(), c.clone());
                if !m.eval(w, &f)? {
                    let hypothesis = match kind {
                        0 => format!("T({op}) within I"),
                        3 => format!("guard of {op}"),
                        _ => hyp.to_string(),
                    };
                    report.counterexamples.push(Counterexample {
                        model: m.save(),
                        world: m.world(w).id.clone(),
                        hypothesis,
                        conclusion: f.to_string(),
                    });
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_model;
    use crate::parser::parse;

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    fn op(s: &str) -> MentalOp {
        match parse(&format!("[{s}] true")).unwrap() {
            Formula::Dynamic(op, _) => *op,
            _ => unreachable!(),
        }
    }

    const RAIN: &str = "worlds:
  w0: rain(2,2), take(2,2,umbrella)
  w1: take(2,2,umbrella)
  w2: rain(2,2), take(2,2,umbrella)
classes:
  {w0, w1, w2}
nbhd:
  w0: {w0, w2}
  w1: {w0, w2}
  w2: {w0, w2}
";

    #[test]
    fn learn_adds_belief() {
        let m = TLekModel::load(RAIN).unwrap();
        assert!(!m.check(0, &f("B take(2,2,umbrella)")).unwrap());
        let out = apply(&m, &op("+take(2,2,umbrella)")).unwrap();
        assert!(out.applied);
        assert!(out.model.check(0, &f("B take(2,2,umbrella)")).unwrap());
        assert!(validate_model(&out.model).is_empty());
        assert_eq!(out.delta.len(), 3);
        assert_eq!(out.delta[0].added, vec![vec!["w0", "w1", "w2"]]);
        assert!(m.check(0, &f("[+take(2,2,umbrella)] B take(2,2,umbrella)")).unwrap());
    }

    #[test]
    fn learn_is_idempotent() {
        let m = TLekModel::load(RAIN).unwrap();
        let once = apply(&m, &op("+~rain(2,2)")).unwrap().model;
        let twice = apply(&once, &op("+~rain(2,2)")).unwrap().model;
        assert_eq!(once, twice);
    }

    #[test]
    fn infer_needs_knowledge() {
        let m = TLekModel::load(RAIN).unwrap();
        let out = apply(&m, &op("inf(rain(2,2),take(2,2,umbrella))")).unwrap();
        assert!(out.applied);
        assert!(out.model.check(0, &f("B take(2,2,umbrella)")).unwrap());

        // w3 has rain without taking the umbrella: K(rain -> take) fails
        let text = RAIN.replace("  w2: rain(2,2), take(2,2,umbrella)\n", "  w2: rain(2,2), take(2,2,umbrella)\n  w3: rain(2,2)\n")
            .replace("{w0, w1, w2}\nnbhd", "{w0, w1, w2, w3}\nnbhd")
            .replace("  w2: {w0, w2}\n", "  w2: {w0, w2}\n  w3: {w0, w2}\n");
        let m = TLekModel::load(&text).unwrap();
        let out = apply(&m, &op("inf(rain(2,2),take(2,2,umbrella))")).unwrap();
        assert!(!out.applied);
        assert_eq!(out.model, m);
        assert!(out.delta.is_empty());
    }

    #[test]
    fn learn_outside_interval_does_nothing() {
        let m = TLekModel::load(RAIN).unwrap();
        let out = apply(&m, &op("+rain(7,7)")).unwrap();
        assert!(!out.applied);
        assert_eq!(out.model, m);
    }

    const MARRIAGE: &str = "worlds:
  w0: divorced(9,inf), married(6,8), now(0,inf)
  w1: married(6,inf), now(0,inf)
  w2: divorced(9,inf), now(0,inf)
classes:
  {w0, w1, w2}
nbhd:
  w0: {w0, w2}, {w1}
  w1: {w0, w2}, {w1}
  w2: {w0, w2}, {w1}
";

    #[test]
    fn revise_restructures() {
        let m = TLekModel::load(MARRIAGE).unwrap();
        assert!(!m.check(0, &f("B married(6,8)")).unwrap());
        let out = apply(&m, &op("rev(divorced(9,inf),married(6,inf))")).unwrap();
        assert!(out.applied);
        assert!(out.model.check(0, &f("B married(6,8)")).unwrap());
        assert!(validate_model(&out.model).is_empty());
        assert!(m.check(1, &f("[rev(divorced(9,inf),married(6,inf))] B married(6,8)")).unwrap());
    }

    #[test]
    fn revise_blocked_by_wider_belief() {
        // married(5,inf) is believed and strictly wider than [9,inf)
        let text = MARRIAGE.replace("w1: married(6,inf), now(0,inf)", "w1: married(6,inf), married(5,inf), now(0,inf)");
        let m = TLekModel::load(&text).unwrap();
        assert!(m.check(0, &f("B married(5,inf)")).unwrap());
        let out = apply(&m, &op("rev(divorced(9,inf),married(6,inf))")).unwrap();
        assert!(!out.applied);
    }

    #[test]
    fn revise_removes_overlap() {
        let text = "worlds:
  w0: p(3,4), now(0,inf)
  w1: q(1,6), q(3,4), now(0,inf)
classes:
  {w0, w1}
nbhd:
  w0: {w0}, {w1}
  w1: {w0}, {w1}
";
        let m = TLekModel::load(text).unwrap();
        // ‖q(3,4)‖ = ‖q(1,6)‖ = {w1}: removed, but no residual has that extension
        let out = apply(&m, &op("rev(p(3,4),q(1,6))")).unwrap();
        assert!(out.applied);
        assert!(!out.model.check(0, &f("B q(1,6)")).unwrap());
        assert!(out.model.check(0, &f("B q(1,2)")).unwrap());
        assert_eq!(out.delta[0].removed, vec![vec!["w1"]]);
        assert_eq!(out.delta[0].added, vec![Vec::<String>::new()]);
    }

    #[test]
    fn dynamic_over_atom() {
        let m = TLekModel::load(RAIN).unwrap();
        for w in 0..m.len() {
            assert_eq!(m.check(w, &f("[+rain(2,2)] take(2,2,umbrella)")).unwrap(), m.check(w, &f("take(2,2,umbrella)")).unwrap());
        }
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&f("[+p(1,1)] p(1,1)")).unwrap(), f("p(1,1)"));
        assert_eq!(reduce(&f("[+p(1,1)] ~q(2,2)")).unwrap(), f("~q(2,2)"));
        assert_eq!(reduce(&f("[+p(1,1)] B q(2,2)")).unwrap(), f("B(q(2,2)) | K(q(2,2) <-> p(1,1))"));
        assert_eq!(reduce(&f("[+p(1,1)] K q(2,2)")).unwrap(), f("K q(2,2)"));
        assert_eq!(
            reduce(&f("[inf(p(1,1),q(2,2))] B r(3,3)")).unwrap(),
            f("B r(3,3) | ((B p(1,1) & K(p(1,1) -> q(2,2))) & K(r(3,3) <-> q(2,2)))")
        );
        assert!(matches!(reduce(&f("[+p(1,1)] box p(1,1)")), Err(Error::UnreducibleShape(_))));
        assert!(matches!(reduce(&f("[rev(p(1,1),q(0,3))] B q(0,0)")), Err(Error::UnreducibleShape(_))));
        assert!(Reducer::new(Some(5)).reduce(&f("[rev(p(1,1),q(0,3))] B q(0,0)")).unwrap().is_static());
        assert!(matches!(reduce(&f("[+p(T,1)] p(1,1)")), Err(Error::NonGround(_))));
    }

    #[test]
    fn reduce_agrees_on_fixtures() {
        let reducer = Reducer::new(Some(10));
        for (text, forms) in [
            (MARRIAGE, vec![
                "[rev(divorced(9,inf),married(6,inf))] B married(6,8)",
                "[rev(divorced(9,inf),married(6,inf))] B married(9,inf)",
                "[rev(divorced(9,inf),married(6,inf))] ~B(married(6,inf) & now(0,inf))",
                "[+married(6,8)] [and(married(6,8),divorced(9,inf))] B(married(6,8) & divorced(9,inf))",
                "[inf(divorced(9,inf),married(6,8))] K B married(6,8)",
            ]),
        ] {
            let m = TLekModel::load(text).unwrap();
            for s in forms {
                let g = f(s);
                let r = reducer.reduce(&g).unwrap();
                for w in 0..m.len() {
                    assert_eq!(m.check(w, &g).unwrap(), m.check(w, &r).unwrap(), "{s} at {w}");
                }
            }
        }
    }

    #[test]
    fn property1_on_fixtures() {
        let ms = [TLekModel::load(RAIN).unwrap(), TLekModel::load(MARRIAGE).unwrap()];
        let report = property1_suite(&ms).unwrap();
        assert!(report.counterexamples.is_empty(), "{:?}", report.counterexamples);
        assert!(report.exercised.iter().all(|&n| n > 0), "{:?}", report.exercised);
    }
}
