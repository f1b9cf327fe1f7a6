//! Randomized validity suites over generated models.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::{apply, property1_suite, Reducer};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::gen::{self, GenBounds};
use crate::model::{validate_model, TLekModel};
use crate::time::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Frame conditions survive every operation.
    Frame,
    /// The five static axioms on covering models.
    AxiomsLek,
    /// The four validities about mental operations.
    Property1,
    /// Dynamic formulas agree with their reductions.
    ReductionOracle,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Frame, Suite::AxiomsLek, Suite::Property1, Suite::ReductionOracle];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Frame => "frame",
            Suite::AxiomsLek => "axioms-lek",
            Suite::Property1 => "property1",
            Suite::ReductionOracle => "reduction-oracle",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub count: usize,
    pub bounds: GenBounds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub model: String,
    pub world: Option<String>,
    pub formula: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trials: usize,
    /// Trials that tested something: applied operations, non-vacuous
    /// hypotheses, or reduced formulas, depending on the suite.
    pub exercised: usize,
    /// Formulas reported as unreducible (reduction oracle only).
    pub unreduced: usize,
    pub failures: Vec<Failure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn rand_test(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport { suite: suite.name().to_string(), ..Default::default() };
    let mut rng = gen::rng(cfg.seed);
    match suite {
        Suite::Frame => frame(&mut rng, cfg, &mut report)?,
        Suite::AxiomsLek => axioms(&mut rng, cfg, &mut report)?,
        Suite::Property1 => {
            let models: Vec<TLekModel> = (0..cfg.count).map(|_| gen::gen_random_model(&mut rng, &cfg.bounds)).collect();
            let p1 = property1_suite(&models)?;
            report.trials = p1.models;
            report.exercised = p1.exercised.iter().sum();
            report.failures = p1
                .counterexamples
                .into_iter()
                .map(|c| Failure {
                    trial: 0,
                    model: c.model,
                    world: Some(c.world),
                    formula: c.conclusion,
                    detail: format!("hypothesis: {}", c.hypothesis),
                })
                .collect();
        }
        Suite::ReductionOracle => oracle(&mut rng, cfg, &mut report)?,
    }
    Ok(report)
}

fn frame(rng: &mut impl rand::Rng, cfg: &SuiteConfig, report: &mut SuiteReport) -> Result<()> {
    for trial in 0..cfg.count {
        let universe = gen::gen_universe(rng, &cfg.bounds);
        let m = gen::gen_model_over(rng, &cfg.bounds, &universe);
        let op = gen::gen_op(rng, &universe, &cfg.bounds, 1);
        let out = apply(&m, &op)?;
        report.trials += 1;
        if out.applied {
            report.exercised += 1;
        } else if out.model != m || !out.delta.is_empty() {
            report.failures.push(Failure {
                trial,
                model: m.save(),
                world: None,
                formula: op.to_string(),
                detail: "guard failed but the model changed".into(),
            });
        }
        for v in validate_model(&out.model) {
            report.failures.push(Failure {
                trial,
                model: m.save(),
                world: Some(v.world.clone()),
                formula: op.to_string(),
                detail: v.to_string(),
            });
        }
    }
    Ok(())
}

/// `K1`..`K5` instantiated with `φ` and `ψ`.
pub fn lek_axioms(phi: &Formula, psi: &Formula) -> [Formula; 5] {
    use Formula as F;
    let k = |f: F| F::knowledge(f);
    [
        F::implies(F::and(k(phi.clone()), k(F::implies(phi.clone(), psi.clone()))), k(psi.clone())),
        F::implies(k(phi.clone()), phi.clone()),
        F::implies(k(phi.clone()), k(k(phi.clone()))),
        F::implies(F::not(k(phi.clone())), k(F::not(k(phi.clone())))),
        F::implies(F::and(F::belief(phi.clone()), k(F::iff(phi.clone(), psi.clone()))), F::belief(psi.clone())),
    ]
}

fn axioms(rng: &mut impl rand::Rng, cfg: &SuiteConfig, report: &mut SuiteReport) -> Result<()> {
    let h = cfg.bounds.horizon;
    let bounds = GenBounds { anchor: Some(Interval::closed(0, h)?), ..cfg.bounds };
    // formula times stay finite and inside [0,h]
    let finite = |f: &Formula| f.span().map(|s| s.is_none_or(|iv| iv.is_finite()));
    for trial in 0..cfg.count {
        let universe: Vec<_> = gen::gen_universe(rng, &bounds)
            .into_iter()
            .map(|a| {
                let iv = a.interval().expect("ground");
                a.with_interval(Interval::closed(iv.lo(), iv.hi().finite().unwrap_or(h)).expect("lo <= h"))
            })
            .collect();
        let m = gen::gen_model_over(rng, &bounds, &universe);
        let (phi, psi) = loop {
            let phi = gen::gen_static(rng, &universe, &bounds, 3, 0.05);
            let psi = gen::gen_static(rng, &universe, &bounds, 3, 0.05);
            if finite(&phi)? && finite(&psi)? {
                break (phi, psi);
            }
        };
        report.trials += 1;
        for (i, ax) in lek_axioms(&phi, &psi).iter().enumerate() {
            for w in 0..m.len() {
                if m.check(w, ax)? {
                    report.exercised += 1;
                } else {
                    report.failures.push(Failure {
                        trial,
                        model: m.save(),
                        world: Some(m.world(w).id.clone()),
                        formula: ax.to_string(),
                        detail: format!("axiom {} fails", i + 1),
                    });
                }
            }
        }
    }
    Ok(())
}

fn oracle(rng: &mut impl rand::Rng, cfg: &SuiteConfig, report: &mut SuiteReport) -> Result<()> {
    let bounds = GenBounds { anchor: Some(Interval::from(0)), ..cfg.bounds };
    let reducer = Reducer::new(Some(bounds.horizon));
    for trial in 0..cfg.count {
        let universe = gen::gen_universe(rng, &bounds);
        let m = gen::gen_model_over(rng, &bounds, &universe);
        let f = gen::gen_dynamic(rng, &universe, &bounds, 2);
        report.trials += 1;
        let r = match reducer.reduce(&f) {
            Ok(r) => r,
            Err(Error::UnreducibleShape(_)) => {
                report.unreduced += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        report.exercised += 1;
        for w in 0..m.len() {
            let (dynamic, reduced) = (m.check(w, &f)?, m.check(w, &r)?);
            if dynamic != reduced {
                report.failures.push(Failure {
                    trial,
                    model: m.save(),
                    world: Some(m.world(w).id.clone()),
                    formula: f.to_string(),
                    detail: format!("dynamic {dynamic}, reduced {reduced}: {r}"),
                });
            }
        }
    }
    Ok(())
}
