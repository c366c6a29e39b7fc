//! First-order formulas over relational signatures.
//!
//! Variables are numbered `x1, x2, ...`. Besides the usual connectives and
//! quantifiers the language has counting quantifiers `E>=a`, `E<=b` and
//! distance atoms `dist(xi,xj) <= c`, evaluated in the Gaifman graph.

mod meta;
mod parser;
mod transform;

use std::collections::BTreeSet;
use std::fmt;

pub use meta::{meta, FormulaMeta};
pub(crate) use meta::radius as tight_radius;
pub use parser::{parse, parse_with_signature, ParseError};
pub use transform::{lambda_r, normalize, pack, rename_free, theta_r};

use crate::error::{Error, Result};
use crate::structure::Signature;

/// Index `i` of variable `x_i`, `i >= 1`.
pub type Var = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistCmp {
    Le,
    Gt,
    Eq,
}

impl DistCmp {
    /// Whether a distance (`None` = infinite) satisfies the comparison.
    pub fn test(self, distance: Option<usize>, bound: u32) -> bool {
        let bound = bound as usize;
        match (self, distance) {
            (DistCmp::Le, Some(d)) => d <= bound,
            (DistCmp::Eq, Some(d)) => d == bound,
            (DistCmp::Gt, Some(d)) => d > bound,
            (DistCmp::Gt, None) => true,
            (_, None) => false,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            DistCmp::Le => "<=",
            DistCmp::Gt => ">",
            DistCmp::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Rel(String, Vec<Var>),
    Eq(Var, Var),
    Dist {
        left: Var,
        right: Var,
        cmp: DistCmp,
        bound: u32,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    /// At least `a` witnesses.
    CountGe(u32, Var, Box<Formula>),
    /// At most `b` witnesses.
    CountLe(u32, Var, Box<Formula>),
}

impl Formula {
    pub fn rel(name: impl Into<String>, args: impl IntoIterator<Item = Var>) -> Self {
        Formula::Rel(name.into(), args.into_iter().collect())
    }

    pub fn dist(left: Var, right: Var, cmp: DistCmp, bound: u32) -> Self {
        Formula::Dist {
            left,
            right,
            cmp,
            bound,
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    pub fn exists(var: Var, body: Formula) -> Self {
        Formula::Exists(var, Box::new(body))
    }

    pub fn forall(var: Var, body: Formula) -> Self {
        Formula::Forall(var, Box::new(body))
    }

    pub fn count_ge(a: u32, var: Var, body: Formula) -> Self {
        Formula::CountGe(a, var, Box::new(body))
    }

    pub fn count_le(b: u32, var: Var, body: Formula) -> Self {
        Formula::CountLe(b, var, Box::new(body))
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn and_all(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn or_all(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut add = |v: Var, bound: &Vec<Var>| {
            if !bound.contains(&v) {
                out.insert(v);
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Rel(_, args) => args.iter().for_each(|&v| add(v, bound)),
            Formula::Eq(a, b) | Formula::Dist { left: a, right: b, .. } => {
                add(*a, bound);
                add(*b, bound);
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(v, f)
            | Formula::Forall(v, f)
            | Formula::CountGe(_, v, f)
            | Formula::CountLe(_, v, f) => {
                bound.push(*v);
                f.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Maximum quantifier nesting depth; counting quantifiers count once.
    pub fn qrank(&self) -> u32 {
        match self {
            Formula::True
            | Formula::False
            | Formula::Rel(..)
            | Formula::Eq(..)
            | Formula::Dist { .. } => 0,
            Formula::Not(f) => f.qrank(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.qrank().max(b.qrank())
            }
            Formula::Exists(_, f)
            | Formula::Forall(_, f)
            | Formula::CountGe(_, _, f)
            | Formula::CountLe(_, _, f) => 1 + f.qrank(),
        }
    }

    /// Largest variable index occurring anywhere, bound or free; 0 if none.
    pub fn max_var(&self) -> Var {
        match self {
            Formula::True | Formula::False => 0,
            Formula::Rel(_, args) => args.iter().copied().max().unwrap_or(0),
            Formula::Eq(a, b) | Formula::Dist { left: a, right: b, .. } => *a.max(b),
            Formula::Not(f) => f.max_var(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.max_var().max(b.max_var())
            }
            Formula::Exists(v, f)
            | Formula::Forall(v, f)
            | Formula::CountGe(_, v, f)
            | Formula::CountLe(_, v, f) => (*v).max(f.max_var()),
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::True
            | Formula::False
            | Formula::Rel(..)
            | Formula::Eq(..)
            | Formula::Dist { .. } => 1,
            Formula::Not(f) => 1 + f.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Exists(_, f)
            | Formula::Forall(_, f)
            | Formula::CountGe(_, _, f)
            | Formula::CountLe(_, _, f) => 1 + f.size(),
        }
    }

    /// Relation names used, with the arity of each occurrence.
    pub fn relations(&self) -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let Formula::Rel(name, args) = f {
                out.push((name.as_str(), args.len()));
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Formula::Not(g)
            | Formula::Exists(_, g)
            | Formula::Forall(_, g)
            | Formula::CountGe(_, _, g)
            | Formula::CountLe(_, _, g) => g.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Checks every relation atom against `signature`.
    pub fn check_signature(&self, signature: &Signature) -> Result<()> {
        for (name, arity) in self.relations() {
            let sym = signature
                .get(name)
                .ok_or_else(|| Error::UnknownRelation(name.to_string()))?;
            if sym.arity != arity {
                return Err(Error::ArityMismatch {
                    relation: name.to_string(),
                    expected: sym.arity,
                    found: arity,
                });
            }
        }
        Ok(())
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(..) => 4,
            Formula::Exists(..)
            | Formula::Forall(..)
            | Formula::CountGe(..)
            | Formula::CountLe(..) => 0,
            _ => 5,
        }
    }

    fn is_quantifier(&self) -> bool {
        self.precedence() == 0
    }
}

struct Operand<'a> {
    f: &'a Formula,
    parens: bool,
}

impl fmt::Display for Operand<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parens {
            write!(out, "({})", self.f)
        } else {
            write!(out, "{}", self.f)
        }
    }
}

// Quantified operands are always parenthesized: a quantifier body extends as
// far right as possible.
fn loose(f: &Formula, level: u8) -> Operand<'_> {
    Operand {
        f,
        parens: f.is_quantifier() || f.precedence() < level,
    }
}

fn tight(f: &Formula, level: u8) -> Operand<'_> {
    Operand {
        f,
        parens: f.is_quantifier() || f.precedence() <= level,
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(out, "true"),
            Formula::False => write!(out, "false"),
            Formula::Rel(name, args) => {
                write!(out, "{name}(")?;
                for (i, v) in args.iter().enumerate() {
                    if i > 0 {
                        write!(out, ",")?;
                    }
                    write!(out, "x{v}")?;
                }
                write!(out, ")")
            }
            Formula::Eq(a, b) => write!(out, "x{a}=x{b}"),
            Formula::Dist {
                left,
                right,
                cmp,
                bound,
            } => write!(out, "dist(x{left},x{right}) {} {bound}", cmp.symbol()),
            Formula::Not(f) => {
                let parens = f.is_quantifier()
                    || f.precedence() < 4
                    || matches!(**f, Formula::Eq(..) | Formula::Dist { .. });
                write!(out, "!{}", Operand { f, parens })
            }
            // `&` and `|` associate to the left, `->` to the right.
            Formula::And(a, b) => write!(out, "{} & {}", loose(a, 3), tight(b, 3)),
            Formula::Or(a, b) => write!(out, "{} | {}", loose(a, 2), tight(b, 2)),
            Formula::Implies(a, b) => write!(out, "{} -> {}", tight(a, 1), loose(b, 1)),
            Formula::Exists(v, f) => write!(out, "E x{v}. {f}"),
            Formula::Forall(v, f) => write!(out, "A x{v}. {f}"),
            Formula::CountGe(a, v, f) => write!(out, "E>={a} x{v}. {f}"),
            Formula::CountLe(b, v, f) => write!(out, "E<={b} x{v}. {f}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_and_rank() {
        let f = parse("E x2. adj(x1,x2)").unwrap();
        assert_eq!(f.free_vars(), BTreeSet::from([1]));
        assert_eq!(f.qrank(), 1);
        let g = parse("E>=2 x2. adj(x1,x2) & A x3. (adj(x2,x3) -> x3=x1)").unwrap();
        assert_eq!(g.qrank(), 2);
    }

    #[test]
    fn printing() {
        assert_eq!(parse("adj(x1,x2)").unwrap().to_string(), "adj(x1,x2)");
        assert_eq!(theta_r(2, 2).unwrap().to_string(), "dist(x1,x2) > 2");
        let f = Formula::rel("adj", [1, 2]).not().and(Formula::Eq(1, 2).not());
        assert_eq!(f.to_string(), "!adj(x1,x2) & !(x1=x2)");
        let g = Formula::exists(2, Formula::rel("adj", [1, 2])).and(Formula::True);
        assert_eq!(g.to_string(), "(E x2. adj(x1,x2)) & true");
        let h = Formula::True.and(Formula::False.or(Formula::True));
        assert_eq!(h.to_string(), "true & (false | true)");
        let i = Formula::True.implies(Formula::False).implies(Formula::True);
        assert_eq!(i.to_string(), "(true -> false) -> true");
    }

    #[test]
    fn dist_cmp_with_infinity() {
        assert!(DistCmp::Gt.test(None, 100));
        assert!(!DistCmp::Le.test(None, 100));
        assert!(!DistCmp::Eq.test(None, 0));
        assert!(DistCmp::Le.test(Some(2), 2));
    }
}
