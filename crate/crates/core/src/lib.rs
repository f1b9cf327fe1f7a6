//! Reasoning engine for timed logics of explicit beliefs and knowledge.
//!
//! * [`time`]: time points, intervals and interval sets.
//! * [`formula`] and [`parser`]: the formula language and its ASCII syntax.
//! * [`model`]: finite neighbourhood models and the model checker.
//! * [`dynamics`]: mental operations as model transformers, and the
//!   reduction of dynamic formulas to static ones.
//! * [`agent`] and [`scenario`]: working/long-term memory engine driven by
//!   scenario scripts.
//! * [`gen`] and [`suites`]: seeded generators and randomized validity suites.

pub mod agent;
pub mod dynamics;
pub mod error;
pub mod formula;
pub mod gen;
pub mod model;
pub mod parser;
pub mod scenario;
pub mod suites;
pub mod time;

pub use error::{Error, Result, SyntaxError};
pub use formula::{time_of, Atom, Formula, IntervalExpr, Literal, MentalOp, Substitution, Term, Value};
pub use model::{validate_model, TLekModel, World};
pub use parser::parse;
pub use time::{Interval, IntervalSet, TimeExpr, TimePoint};
