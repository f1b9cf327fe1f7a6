//! Line-oriented scenario scripts driving an agent.
//!
//! ```text
//! # comment
//! rule K(rain(T1,T2) -> take(T1,T2,umbrella))
//! perceive rain(2,2) @ 2
//! infer
//! query B take(2,2,umbrella)
//! expect true
//! ```

use crate::agent::{init, AgentState, Rule};
use crate::error::{Error, Result};
use crate::formula::{Formula, Literal};
use crate::parser::{parse, parse_literal};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Rule(Rule),
    Perceive(Literal, u64),
    Infer,
    Query(Formula),
    Expect(bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub line: usize,
    pub command: Command,
}

pub fn parse_scenario(text: &str) -> Result<Vec<Statement>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Scenario { line, message };
        let (word, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        let command = match word {
            "rule" => Command::Rule(Rule::from_formula(&parse(rest).map_err(|e| bad(e.to_string()))?).map_err(|e| bad(e.to_string()))?),
            "perceive" => {
                let (lit, at) = rest.rsplit_once('@').ok_or_else(|| bad("expected `perceive <literal> @ <time>`".into()))?;
                let lit = parse_literal(lit.trim()).map_err(|e| bad(e.to_string()))?;
                if !lit.atom.is_ground() {
                    return Err(bad(format!("perception `{lit}` is not ground")));
                }
                let at = at.trim().parse::<u64>().map_err(|_| bad(format!("bad time `{}`", at.trim())))?;
                Command::Perceive(lit, at)
            }
            "infer" if rest.is_empty() => Command::Infer,
            "query" => Command::Query(parse(rest).map_err(|e| bad(e.to_string()))?),
            "expect" => match rest {
                "true" => Command::Expect(true),
                "false" => Command::Expect(false),
                _ => return Err(bad(format!("expected `true` or `false`, got `{rest}`"))),
            },
            _ => return Err(bad(format!("unknown command `{body}`"))),
        };
        out.push(Statement { line, command });
    }
    Ok(out)
}

/// Result of one `query` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub line: usize,
    pub query: Formula,
    pub value: bool,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub state: AgentState,
    pub answers: Vec<Answer>,
}

/// Executes statements in order. An `expect` that disagrees with the last
/// answer stops the run with [`Error::ExpectMismatch`].
pub fn run_statements(stmts: &[Statement]) -> Result<ScenarioRun> {
    let mut st = init(Vec::new());
    let mut answers: Vec<Answer> = Vec::new();
    let at_line = |line: usize| move |e: Error| match e {
        Error::Scenario { .. } => e,
        other => Error::Scenario { line, message: other.to_string() },
    };
    for s in stmts {
        match &s.command {
            Command::Rule(r) => st = st.add_rule(r.clone()),
            Command::Perceive(l, at) => st = st.perceive(l, *at).map_err(at_line(s.line))?,
            Command::Infer => {
                st = st.infer_fixpoint().map_err(|e| match e {
                    Error::BudgetExhausted(_) => e,
                    other => at_line(s.line)(other),
                })?
            }
            Command::Query(f) => {
                let value = st.query(f).map_err(at_line(s.line))?;
                answers.push(Answer { line: s.line, query: f.clone(), value });
            }
            Command::Expect(want) => {
                let last = answers.last().ok_or_else(|| Error::Scenario { line: s.line, message: "`expect` before any `query`".into() })?;
                if last.value != *want {
                    return Err(Error::ExpectMismatch { line: s.line, query: last.query.to_string(), expected: *want, actual: last.value });
                }
            }
        }
    }
    Ok(ScenarioRun { state: st, answers })
}

pub fn run_scenario(text: &str) -> Result<ScenarioRun> {
    run_statements(&parse_scenario(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UMBRELLA: &str = "\
# rain at 2
rule K(rain(T1,T2) -> take(T1,T2,umbrella))
rule K(rain(T1,T2) & take(T1,T2,umbrella) -> go(T1+1,inf,shops))
perceive rain(2,2) @ 2
infer
query B go(3,inf,shops)
expect true
query B go(2,inf,shops)   # not covered
expect false
";

    #[test]
    fn runs_umbrella() {
        let run = run_scenario(UMBRELLA).unwrap();
        assert_eq!(run.state.render_wm(), "rain(2,2), take(2,2,umbrella), go(3,inf,shops)");
        assert_eq!(run.answers.iter().map(|a| a.value).collect::<Vec<_>>(), [true, false]);
        assert_eq!(run.answers[0].line, 6);
    }

    #[test]
    fn expect_mismatch() {
        let text = UMBRELLA.replace("expect false", "expect true");
        match run_scenario(&text) {
            Err(Error::ExpectMismatch { line: 9, expected: true, actual: false, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn errors_carry_lines() {
        for (text, line) in [
            ("infer\nfly away", 2),
            ("perceive p(1,1)", 1),
            ("perceive p(T,1) @ 1", 1),
            ("perceive p(1,1) @ x", 1),
            ("\n\nrule K(p(1,1) | q(1,1) -> r(1,1))", 3),
            ("expect true", 1),
            ("query B(", 1),
            ("expect maybe", 1),
            ("perceive p(1,1) @ 5\nperceive p(1,1) @ 4", 2),
            ("query box p(1,1)", 1),
        ] {
            match run_scenario(text) {
                Err(Error::Scenario { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
