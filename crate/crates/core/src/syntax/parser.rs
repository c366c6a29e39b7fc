//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! f ::= true | false | name(v,...) | v=v | dist(v,v) (<=|>|=) INT
//!     | !f | f & f | f | f | f -> f | (f)
//!     | E v. f | A v. f | E>=INT v. f | E<=INT v. f
//! ```
//!
//! `!` binds tighter than `&`, then `|`, then `->` (right associative).
//! Quantifier bodies extend as far right as possible. Free variables must be
//! written `x<i>`; bound variables may use any identifier and are renamed
//! apart by [`normalize`](super::normalize).

use std::fmt;

use thiserror::Error;

use super::{normalize, DistCmp, Formula, Var};
use crate::error::Result;
use crate::structure::Signature;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    LParen,
    RParen,
    Comma,
    Dot,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Eq,
    Le,
    Ge,
    Gt,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::Dot => write!(f, "`.`"),
            Tok::Bang => write!(f, "`!`"),
            Tok::Amp => write!(f, "`&`"),
            Tok::Pipe => write!(f, "`|`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::Eq => write!(f, "`=`"),
            Tok::Le => write!(f, "`<=`"),
            Tok::Ge => write!(f, "`>=`"),
            Tok::Gt => write!(f, "`>`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, len: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: tl,
                column: tc,
            });
            *i += len;
            *col += len;
        };
        let next = chars.get(i + 1).copied();
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            '!' => push(Tok::Bang, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Pipe, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            '-' if next == Some('>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '<' if next == Some('=') => push(Tok::Le, 2, &mut i, &mut col),
            '>' if next == Some('=') => push(Tok::Ge, 2, &mut i, &mut col),
            '>' => push(Tok::Gt, 1, &mut i, &mut col),
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let value = s.parse::<u64>().map_err(|_| ParseError {
                    line: tl,
                    column: tc,
                    message: format!("integer `{s}` is too large"),
                })?;
                col += i - start;
                out.push(Token {
                    tok: Tok::Int(value),
                    line: tl,
                    column: tc,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                col += i - start;
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: tl,
                    column: tc,
                });
            }
            other => {
                return Err(ParseError {
                    line: tl,
                    column: tc,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::End,
        line,
        column: col,
    });
    Ok(out)
}

/// Placeholder indices for bound variables before renaming.
const BOUND_BASE: Var = 1 << 30;

struct Parser<'s> {
    tokens: Vec<Token>,
    pos: usize,
    scope: Vec<(String, Var)>,
    next_bound: Var,
    signature: Option<&'s Signature>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let t = &self.tokens[self.pos];
        ParseError {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {want}, found {}", self.peek())))
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.advance();
            let rhs = self.formula()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Pipe {
            self.advance();
            let rhs = self.conjunction()?;
            lhs = lhs.or(rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.advance();
            let rhs = self.unary()?;
            lhs = lhs.and(rhs);
        }
        Ok(lhs)
    }

    fn is_quantifier_start(&self) -> bool {
        match (self.peek(), self.peek_at(1)) {
            (Tok::Ident(q), Tok::Ident(_)) => q == "E" || q == "A",
            (Tok::Ident(q), Tok::Ge | Tok::Le) => q == "E",
            _ => false,
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if *self.peek() == Tok::Bang {
            self.advance();
            return Ok(self.unary()?.not());
        }
        if self.is_quantifier_start() {
            return self.quantifier();
        }
        self.atom()
    }

    fn quantifier(&mut self) -> Result<Formula, ParseError> {
        let Tok::Ident(q) = self.advance() else {
            unreachable!()
        };
        let count = match self.peek() {
            Tok::Ge | Tok::Le => {
                let ge = *self.peek() == Tok::Ge;
                self.advance();
                let bound = self.integer()?;
                Some((ge, bound))
            }
            _ => None,
        };
        let name = match self.peek().clone() {
            Tok::Ident(name) if name != "true" && name != "false" => {
                self.advance();
                name
            }
            other => return Err(self.error_here(format!("expected a variable, found {other}"))),
        };
        self.expect(Tok::Dot)?;
        let var = self.next_bound;
        self.next_bound += 1;
        self.scope.push((name, var));
        let body = self.formula();
        self.scope.pop();
        let body = body?;
        Ok(match (q.as_str(), count) {
            ("A", _) => Formula::forall(var, body),
            (_, None) => Formula::exists(var, body),
            (_, Some((true, a))) => Formula::count_ge(a, var, body),
            (_, Some((false, b))) => Formula::count_le(b, var, body),
        })
    }

    fn integer(&mut self) -> Result<u32, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                let v = u32::try_from(v)
                    .map_err(|_| self.error_here(format!("integer {v} is too large")))?;
                self.advance();
                Ok(v)
            }
            other => Err(self.error_here(format!("expected an integer, found {other}"))),
        }
    }

    fn variable(&mut self) -> Result<Var, ParseError> {
        let Tok::Ident(name) = self.peek().clone() else {
            return Err(self.error_here(format!("expected a variable, found {}", self.peek())));
        };
        if let Some(&(_, v)) = self.scope.iter().rev().find(|(n, _)| *n == name) {
            self.advance();
            return Ok(v);
        }
        match free_index(&name) {
            Some(i) => {
                self.advance();
                Ok(i)
            }
            None => Err(self.error_here(format!(
                "unbound variable `{name}` (free variables are written x1, x2, ...)"
            ))),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) if name == "true" => {
                self.advance();
                Ok(Formula::True)
            }
            Tok::Ident(name) if name == "false" => {
                self.advance();
                Ok(Formula::False)
            }
            Tok::Ident(name) if name == "dist" && *self.peek_at(1) == Tok::LParen => {
                self.advance();
                self.advance();
                let left = self.variable()?;
                self.expect(Tok::Comma)?;
                let right = self.variable()?;
                self.expect(Tok::RParen)?;
                let cmp = match self.peek() {
                    Tok::Le => DistCmp::Le,
                    Tok::Gt => DistCmp::Gt,
                    Tok::Eq => DistCmp::Eq,
                    other => {
                        return Err(self.error_here(format!(
                            "expected `<=`, `>` or `=` after dist(..), found {other}"
                        )))
                    }
                };
                self.advance();
                let bound = self.integer()?;
                Ok(Formula::dist(left, right, cmp, bound))
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LParen => {
                let start = self.pos;
                self.advance();
                self.advance();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    loop {
                        args.push(self.variable()?);
                        if *self.peek() == Tok::Comma {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RParen)?;
                if let Some(sig) = self.signature {
                    let here = |message: String| {
                        let t = &self.tokens[start];
                        ParseError {
                            line: t.line,
                            column: t.column,
                            message,
                        }
                    };
                    match sig.get(&name) {
                        None => return Err(here(format!("unknown relation `{name}`"))),
                        Some(sym) if sym.arity != args.len() => {
                            return Err(here(format!(
                                "relation `{name}` has arity {}, found {} arguments",
                                sym.arity,
                                args.len()
                            )))
                        }
                        _ => {}
                    }
                }
                if args.is_empty() {
                    return Err(self.error_here(format!("relation `{name}` applied to no arguments")));
                }
                Ok(Formula::Rel(name, args))
            }
            Tok::Ident(_) => {
                let left = self.variable()?;
                self.expect(Tok::Eq)?;
                let right = self.variable()?;
                Ok(Formula::Eq(left, right))
            }
            other => Err(self.error_here(format!("expected a formula, found {other}"))),
        }
    }
}

/// `x<i>` with `i >= 1` maps to `i`.
fn free_index(name: &str) -> Option<Var> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse::<Var>().ok().filter(|&i| i < BOUND_BASE)
}

fn parse_inner(text: &str, signature: Option<&Signature>) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        scope: Vec::new(),
        next_bound: BOUND_BASE,
        signature,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.error_here(format!("unexpected {}", p.peek())));
    }
    Ok(normalize(&f))
}

/// Parses a formula and renames bound variables apart.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    parse_inner(text, None)
}

/// Parses and checks every relation atom against `signature`.
pub fn parse_with_signature(text: &str, signature: &Signature) -> Result<Formula, ParseError> {
    parse_inner(text, Some(signature))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::RelationSymbol;

    #[test]
    fn atoms() {
        assert_eq!(parse("adj(x1,x2)").unwrap(), Formula::rel("adj", [1, 2]));
        assert_eq!(parse("x1 = x3").unwrap(), Formula::Eq(1, 3));
        assert_eq!(
            parse("dist(x1,x2) <= 2").unwrap(),
            Formula::dist(1, 2, DistCmp::Le, 2)
        );
        assert_eq!(parse("true").unwrap(), Formula::True);
    }

    #[test]
    fn quantifiers_are_renamed_apart() {
        let f = parse("E x2. adj(x1,x2)").unwrap();
        assert_eq!(f, Formula::exists(2, Formula::rel("adj", [1, 2])));
        let g = parse("E y. dist(x1,y)<=2 & M(y)").unwrap();
        assert_eq!(
            g,
            Formula::exists(
                2,
                Formula::dist(1, 2, DistCmp::Le, 2).and(Formula::rel("M", [2]))
            )
        );
        let h = parse("adj(x1,x2) & E x2. M(x2)").unwrap();
        assert_eq!(h.to_string(), "adj(x1,x2) & (E x3. M(x3))");
        let c = parse("E>=2 x2. adj(x1,x2)").unwrap();
        assert_eq!(c, Formula::count_ge(2, 2, Formula::rel("adj", [1, 2])));
    }

    #[test]
    fn shadowing_and_reuse() {
        let f = parse("(E y. M(y)) & (E y. E y. adj(y,y))").unwrap();
        assert_eq!(f.to_string(), "(E x1. M(x1)) & (E x2. E x3. adj(x3,x3))");
    }

    #[test]
    fn precedence() {
        let f = parse("!a(x1) & b(x1) | c(x1) -> d(x1) -> e(x1)").unwrap();
        let a = Formula::rel("a", [1]);
        let b = Formula::rel("b", [1]);
        let c = Formula::rel("c", [1]);
        let d = Formula::rel("d", [1]);
        let e = Formula::rel("e", [1]);
        assert_eq!(f, a.not().and(b).or(c).implies(d.implies(e)));
        let g = parse("E x2. M(x2) & N(x1)").unwrap();
        assert!(matches!(g, Formula::Exists(..)));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("adj(x1,\n  x2 &").unwrap_err();
        assert_eq!((err.line, err.column), (2, 6));
        let err = parse("adj(x1, y)").unwrap_err();
        assert!(err.message.contains("unbound variable `y`"));
        let err = parse("adj(x1,x2) $").unwrap_err();
        assert_eq!(err.column, 12);
        let sig = Signature::new([RelationSymbol::new("adj", 2, true)]).unwrap();
        let err = parse_with_signature("adj(x1)", &sig).unwrap_err();
        assert!(err.message.contains("arity"));
        let err = parse_with_signature("foo(x1)", &sig).unwrap_err();
        assert!(err.message.contains("unknown relation"));
    }

    #[test]
    fn relation_named_like_quantifier() {
        let f = parse("E(x1,x2) & A(x1)").unwrap();
        assert_eq!(f, Formula::rel("E", [1, 2]).and(Formula::rel("A", [1])));
    }
}
