//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! formula := imp ('<->' imp)*
//! imp     := or ('->' imp)?
//! or      := and ('|' and)*
//! and     := unary ('&' unary)*
//! unary   := '~' unary | 'B' unary | 'K' unary | 'box' interval? unary
//!          | '[' op ']' unary | '(' formula ')' | 'true' | 'false' | atom
//! op      := '+' literal | 'and(' formula ',' formula ')'
//!          | 'inf(' formula ',' atom ')' | 'rev(' atom ',' atom ')'
//! atom    := ident '(' time ',' time (',' term)* ')'
//! time    := nat | 'inf' | Var (('+'|'-') nat)?
//! ```

use crate::error::{Result, SyntaxError};
use crate::formula::{Atom, Formula, IntervalExpr, Literal, MentalOp, Term};
use crate::time::{TimeExpr, TimePoint};

const RESERVED: [&str; 4] = ["box", "true", "false", "inf"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Nat(u64),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Tilde,
    Amp,
    Bar,
    Arrow,
    DArrow,
    Plus,
    Minus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => format!("`{s}`"),
            Tok::Nat(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DArrow => "`<->`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, found: String, message: &str| SyntaxError {
        line,
        col,
        expected: vec![],
        found,
        message: Some(message.to_string()),
    };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if c.is_ascii_uppercase() {
                Tok::Upper(word)
            } else if c == '_' {
                return Err(err(l0, c0, format!("`{word}`"), "identifiers cannot start with `_`"));
            } else {
                Tok::Lower(word)
            }
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            let n = digits
                .parse::<u64>()
                .map_err(|_| err(l0, c0, format!("`{digits}`"), "time constant out of range"))?;
            Tok::Nat(n)
        } else {
            let two: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let (tok, len) = if two.starts_with("<->") {
                (Tok::DArrow, 3)
            } else if two.starts_with("->") {
                (Tok::Arrow, 2)
            } else {
                let t = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    ',' => Tok::Comma,
                    '~' => Tok::Tilde,
                    '&' => Tok::Amp,
                    '|' => Tok::Bar,
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    other => return Err(err(l0, c0, format!("`{other}`"), &format!("unexpected character `{other}`"))),
                };
                (t, 1)
            };
            i += len;
            tok
        };
        col += i - start;
        out.push(Spanned { tok, line: l0, col: c0 });
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = std::result::Result<T, SyntaxError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> SyntaxError {
        let sp = &self.toks[self.pos];
        SyntaxError {
            line: sp.line,
            col: sp.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: sp.tok.describe(),
            message: None,
        }
    }

    fn fail_at(&self, pos: usize, message: String) -> SyntaxError {
        let sp = &self.toks[pos];
        SyntaxError { line: sp.line, col: sp.col, expected: vec![], found: sp.tok.describe(), message: Some(message) }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[&tok.describe()]))
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            lhs = Formula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Upper(ref s) if s == "B" => {
                self.bump();
                Ok(Formula::belief(self.unary()?))
            }
            Tok::Upper(ref s) if s == "K" => {
                self.bump();
                Ok(Formula::knowledge(self.unary()?))
            }
            Tok::Lower(ref s) if s == "box" => {
                self.bump();
                // `box [+p(..)] φ` is a dynamic operand, `box[1,2] φ` an index
                let indexed = *self.peek() == Tok::LBrack
                    && matches!(self.peek_at(1), Tok::Nat(_) | Tok::Upper(_) | Tok::Lower(_))
                    && !matches!(self.peek_at(2), Tok::LParen);
                let iv = if indexed { self.interval()? } else { IntervalExpr::all() };
                Ok(Formula::Always(iv, Box::new(self.unary()?)))
            }
            Tok::Lower(ref s) if s == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Lower(ref s) if s == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LBrack => {
                self.bump();
                let op = self.mental_op()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::dynamic(op, self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Lower(_) => Ok(Formula::Atom(self.atom()?)),
            _ => Err(self.unexpected(&["`~`", "`B`", "`K`", "`box`", "`[`", "`(`", "`true`", "`false`", "atom"])),
        }
    }

    fn mental_op(&mut self) -> PResult<MentalOp> {
        match self.peek().clone() {
            Tok::Plus => {
                self.bump();
                let positive = if *self.peek() == Tok::Tilde {
                    self.bump();
                    false
                } else {
                    true
                };
                Ok(MentalOp::Learn(Literal { atom: self.atom()?, positive }))
            }
            Tok::Lower(ref s) if matches!(s.as_str(), "and" | "inf" | "rev") && *self.peek_at(1) == Tok::LParen => {
                let kind = s.clone();
                self.bump();
                self.bump();
                let op = match kind.as_str() {
                    "and" => {
                        let a = self.formula()?;
                        self.expect(Tok::Comma)?;
                        MentalOp::Conj(a, self.formula()?)
                    }
                    "inf" => {
                        let a = self.formula()?;
                        self.expect(Tok::Comma)?;
                        MentalOp::Infer(a, self.atom()?)
                    }
                    _ => {
                        let a = self.atom()?;
                        self.expect(Tok::Comma)?;
                        MentalOp::Revise(a, self.atom()?)
                    }
                };
                self.expect(Tok::RParen)?;
                Ok(op)
            }
            _ => Err(self.unexpected(&["`+`", "`and(`", "`inf(`", "`rev(`"])),
        }
    }

    fn interval(&mut self) -> PResult<IntervalExpr> {
        let start = self.pos;
        self.expect(Tok::LBrack)?;
        let lo = self.time()?;
        self.expect(Tok::Comma)?;
        let hi = self.time()?;
        let is_inf = hi == TimeExpr::Lit(TimePoint::Infinity);
        self.expect(if is_inf { Tok::RParen } else { Tok::RBrack })?;
        check_bounds(&lo, &hi).map_err(|m| self.fail_at(start, m))?;
        Ok(IntervalExpr { lo, hi })
    }

    fn time(&mut self) -> PResult<TimeExpr> {
        match self.peek().clone() {
            Tok::Nat(n) => {
                self.bump();
                Ok(TimeExpr::Lit(TimePoint::At(n)))
            }
            Tok::Lower(ref s) if s == "inf" => {
                self.bump();
                Ok(TimeExpr::Lit(TimePoint::Infinity))
            }
            Tok::Upper(name) => {
                self.bump();
                let sign = match self.peek() {
                    Tok::Plus => 1i64,
                    Tok::Minus => -1,
                    _ => return Ok(TimeExpr::Var { name, offset: 0 }),
                };
                self.bump();
                match self.bump() {
                    Tok::Nat(k) if k <= i64::MAX as u64 => Ok(TimeExpr::Var { name, offset: sign * k as i64 }),
                    _ => {
                        self.pos -= 1;
                        Err(self.unexpected(&["natural number"]))
                    }
                }
            }
            _ => Err(self.unexpected(&["natural number", "`inf`", "variable"])),
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let start = self.pos;
        let predicate = match self.peek().clone() {
            Tok::Lower(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                s
            }
            _ => return Err(self.unexpected(&["predicate"])),
        };
        self.expect(Tok::LParen)?;
        let from = self.time()?;
        self.expect(Tok::Comma)?;
        let to = self.time()?;
        let mut args = Vec::new();
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(match self.bump() {
                Tok::Upper(v) => Term::Var(v),
                Tok::Lower(c) if !RESERVED.contains(&c.as_str()) => Term::Const(c),
                _ => {
                    self.pos -= 1;
                    return Err(self.unexpected(&["variable", "constant"]));
                }
            });
        }
        self.expect(Tok::RParen)?;
        check_bounds(&from, &to).map_err(|m| self.fail_at(start, format!("atom `{predicate}`: {m}")))?;
        Ok(Atom { predicate, from, to, args })
    }
}

fn check_bounds(lo: &TimeExpr, hi: &TimeExpr) -> std::result::Result<(), String> {
    if lo.as_lit() == Some(TimePoint::Infinity) {
        return Err("lower time bound cannot be inf".into());
    }
    match (lo.as_lit(), hi.as_lit()) {
        (Some(l), Some(h)) if l > h => Err(format!("time bounds violate {l} <= {h}")),
        _ => Ok(()),
    }
}

fn run<T>(text: &str, f: impl FnOnce(&mut Parser) -> PResult<T>) -> Result<T> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 };
    let out = f(&mut p)?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected(&["end of input"]).into());
    }
    Ok(out)
}

/// Parses a formula.
pub fn parse(text: &str) -> Result<Formula> {
    run(text, Parser::formula)
}

/// Parses a single atom.
pub fn parse_atom(text: &str) -> Result<Atom> {
    run(text, Parser::atom)
}

/// Parses a comma-separated, possibly empty, list of atoms.
pub fn parse_atom_list(text: &str) -> Result<Vec<Atom>> {
    run(text, |p| {
        let mut out = Vec::new();
        if *p.peek() == Tok::Eof {
            return Ok(out);
        }
        out.push(p.atom()?);
        while *p.peek() == Tok::Comma {
            p.bump();
            out.push(p.atom()?);
        }
        Ok(out)
    })
}

/// Parses `p(..)` or `~p(..)`.
pub fn parse_literal(text: &str) -> Result<Literal> {
    run(text, |p| {
        let positive = if *p.peek() == Tok::Tilde {
            p.bump();
            false
        } else {
            true
        };
        Ok(Literal { atom: p.atom()?, positive })
    })
}
