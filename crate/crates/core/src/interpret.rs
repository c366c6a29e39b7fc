//! Basic interpretation schemes.
//!
//! A scheme of exponent `k` maps a source structure `A` to a target
//! structure on `A^k`. Target element `(v1..vk)` is numbered
//! `v1*n^(k-1) + ... + vk` (base `n`, leftmost slot most significant), and a
//! target relation `R` of arity `r` holds on `(a1..ar)` iff its defining
//! formula holds at the concatenation of the decoded blocks, with slot
//! `x(k*(i-1)+t)` receiving coordinate `t` of `ai`.

use std::collections::BTreeMap;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::eval::{EvalOptions, Evaluator};
use crate::fraction::Fraction;
use crate::structure::{Signature, Structure, Vertex};
use crate::syntax::{normalize, parse, parse_with_signature, rename_free, Formula, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicScheme {
    source: Signature,
    target: Signature,
    exponent: usize,
    defs: BTreeMap<String, Formula>,
}

impl BasicScheme {
    pub fn new(
        source: Signature,
        target: Signature,
        exponent: usize,
        defs: BTreeMap<String, Formula>,
    ) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::Scheme("exponent must be at least 1".into()));
        }
        for name in defs.keys() {
            if target.get(name).is_none() {
                return Err(Error::Scheme(format!(
                    "definition for `{name}`, which is not a target relation"
                )));
            }
        }
        for sym in target.symbols() {
            let theta = defs.get(&sym.name).ok_or_else(|| {
                Error::Scheme(format!("target relation `{}` has no definition", sym.name))
            })?;
            let slots = (exponent * sym.arity) as Var;
            if let Some(v) = theta.free_vars().into_iter().find(|&v| v == 0 || v > slots) {
                return Err(Error::Scheme(format!(
                    "definition of `{}` uses x{v}, but only x1..x{slots} are available",
                    sym.name
                )));
            }
            theta.check_signature(&source).map_err(|e| {
                Error::Scheme(format!("definition of `{}`: {e}", sym.name))
            })?;
        }
        Ok(BasicScheme {
            source,
            target,
            exponent,
            defs,
        })
    }

    /// `R' := R` for every symbol.
    pub fn identity(signature: &Signature) -> Self {
        let defs = signature
            .symbols()
            .iter()
            .map(|s| {
                let args = 1..=s.arity as Var;
                (s.name.clone(), Formula::rel(s.name.clone(), args))
            })
            .collect();
        BasicScheme::new(signature.clone(), signature.clone(), 1, defs).unwrap()
    }

    /// Graph complement.
    pub fn complement() -> Self {
        Self::builtin(Signature::graph(), Signature::graph(), &[("adj", "!adj(x1,x2) & !(x1=x2)")])
    }

    /// Rooted tree to forest: the root becomes an isolated principal vertex
    /// and each son roots the subtree below it.
    pub fn y_to_f() -> Self {
        Self::builtin(
            Signature::rooted_graph(),
            Signature::principal_forest(),
            &[
                ("adj", "adj(x1,x2) & !R(x1) & !R(x2)"),
                ("R", "E z. R(z) & adj(z,x1)"),
                ("P", "R(x1)"),
            ],
        )
    }

    /// Forest to rooted tree: the principal vertex becomes the root and every
    /// other root becomes one of its sons.
    pub fn f_to_y() -> Self {
        Self::builtin(
            Signature::principal_forest(),
            Signature::rooted_graph(),
            &[
                ("adj", "adj(x1,x2) | R(x1) & P(x2) | R(x2) & P(x1)"),
                ("R", "P(x1)"),
            ],
        )
    }

    fn builtin(source: Signature, target: Signature, defs: &[(&str, &str)]) -> Self {
        let defs = defs
            .iter()
            .map(|(name, text)| (name.to_string(), parse(text).unwrap()))
            .collect();
        BasicScheme::new(source, target, 1, defs).unwrap()
    }

    pub fn source(&self) -> &Signature {
        &self.source
    }

    pub fn target(&self) -> &Signature {
        &self.target
    }

    pub fn exponent(&self) -> usize {
        self.exponent
    }

    pub fn definition(&self, relation: &str) -> Option<&Formula> {
        self.defs.get(relation)
    }

    pub fn apply(&self, s: &Structure) -> Result<Structure> {
        self.apply_with(s, &EvalOptions::default())
    }

    /// Builds the target structure. The domain size `n^k` and each relation's
    /// enumeration `n^(k*r + qrank)` are held to `options.max_work`.
    pub fn apply_with(&self, s: &Structure, options: &EvalOptions) -> Result<Structure> {
        self.check_source(s)?;
        let n = s.size();
        let k = self.exponent;
        let size = (n as u128)
            .checked_pow(k as u32)
            .filter(|&d| options.max_work.is_none_or(|limit| d <= limit) && d <= usize::MAX as u128)
            .ok_or_else(|| Error::WorkLimit {
                estimate: format!("{n}^{k}"),
                limit: options.max_work.unwrap_or(usize::MAX as u128),
            })? as usize;
        let eval = Evaluator::with_options(s, options.clone());
        let mut relations = Vec::new();
        for sym in self.target.symbols() {
            let theta = &self.defs[&sym.name];
            let rows = eval.satisfying_tuples(theta, k * sym.arity)?;
            let tuples = rows
                .into_iter()
                .map(|row| row.chunks(k).map(|block| encode(block, n)).collect())
                .collect();
            relations.push((sym.name.clone(), tuples));
        }
        Structure::new_checked(self.target.clone(), size, relations)
            .map_err(|e| Error::Scheme(e.to_string()))
    }

    fn check_source(&self, s: &Structure) -> Result<()> {
        for sym in self.source.symbols() {
            match s.signature().get(&sym.name) {
                Some(have) if have.arity == sym.arity => {}
                Some(have) => {
                    return Err(Error::SignatureMismatch(format!(
                        "relation `{}` has arity {} in the structure but {} in the scheme source",
                        sym.name, have.arity, sym.arity
                    )))
                }
                None => {
                    return Err(Error::SignatureMismatch(format!(
                        "structure lacks source relation `{}`",
                        sym.name
                    )))
                }
            }
        }
        Ok(())
    }

    /// Translates a target formula into a source formula with
    /// `<f, I(A)> = <rewrite(f), A>`. Target variable `xj` becomes the block
    /// `x(k*(j-1)+1) .. x(k*j)`.
    pub fn rewrite(&self, f: &Formula) -> Result<Formula> {
        f.check_signature(&self.target)?;
        Ok(normalize(&self.subst(f)?))
    }

    fn block(&self, v: Var) -> impl Iterator<Item = Var> {
        let k = self.exponent as Var;
        (1..=k).map(move |t| k * (v - 1) + t)
    }

    fn subst(&self, f: &Formula) -> Result<Formula> {
        let k = self.exponent as Var;
        Ok(match f {
            Formula::True => Formula::True,
            Formula::False => Formula::False,
            Formula::Rel(name, args) => {
                let map: BTreeMap<Var, Var> = args
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &a)| {
                        (1..=k).map(move |t| (k * i as Var + t, k * (a - 1) + t))
                    })
                    .collect();
                rename_free(&self.defs[name], &map)
            }
            Formula::Eq(a, b) => {
                Formula::and_all(self.block(*a).zip(self.block(*b)).map(|(u, v)| Formula::Eq(u, v)))
            }
            Formula::Dist { .. } => {
                return Err(Error::Unsupported(
                    "distance atoms cannot be rewritten through a scheme".into(),
                ))
            }
            Formula::Not(g) => self.subst(g)?.not(),
            Formula::And(a, b) => self.subst(a)?.and(self.subst(b)?),
            Formula::Or(a, b) => self.subst(a)?.or(self.subst(b)?),
            Formula::Implies(a, b) => self.subst(a)?.implies(self.subst(b)?),
            Formula::Exists(v, g) => {
                let vars: Vec<Var> = self.block(*v).collect();
                vars.into_iter()
                    .rev()
                    .fold(self.subst(g)?, |acc, y| Formula::exists(y, acc))
            }
            Formula::Forall(v, g) => {
                let vars: Vec<Var> = self.block(*v).collect();
                vars.into_iter()
                    .rev()
                    .fold(self.subst(g)?, |acc, y| Formula::forall(y, acc))
            }
            Formula::CountGe(a, v, g) | Formula::CountLe(a, v, g) => {
                if k > 1 {
                    return Err(Error::Unsupported(
                        "counting quantifiers cannot be rewritten when the exponent exceeds 1"
                            .into(),
                    ));
                }
                let body = Box::new(self.subst(g)?);
                match f {
                    Formula::CountGe(..) => Formula::CountGe(*a, *v, body),
                    _ => Formula::CountLe(*a, *v, body),
                }
            }
        })
    }

    pub fn to_json(&self) -> Value {
        let mut defs = Map::new();
        for (name, theta) in &self.defs {
            defs.insert(name.clone(), Value::String(theta.to_string()));
        }
        let mut obj = Map::new();
        obj.insert("exponent".into(), Value::from(self.exponent));
        obj.insert("source".into(), self.source.to_json());
        obj.insert("target".into(), self.target.to_json());
        obj.insert("defs".into(), Value::Object(defs));
        Value::Object(obj)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| {
            Error::Load(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        Self::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Load("scheme: expected an object".into()))?;
        let exponent = obj
            .get("exponent")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Load("exponent: expected a positive integer".into()))?;
        let source = Signature::from_json(
            obj.get("source").ok_or_else(|| Error::Load("source: missing".into()))?,
            "source",
        )?;
        let target = Signature::from_json(
            obj.get("target").ok_or_else(|| Error::Load("target: missing".into()))?,
            "target",
        )?;
        let raw = obj
            .get("defs")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Load("defs: expected an object".into()))?;
        let mut defs = BTreeMap::new();
        for (name, text) in raw {
            let text = text
                .as_str()
                .ok_or_else(|| Error::Load(format!("defs.{name}: expected formula text")))?;
            let theta = parse_with_signature(text, &source)
                .map_err(|e| Error::Load(format!("defs.{name}: {e}")))?;
            defs.insert(name.clone(), theta);
        }
        BasicScheme::new(source, target, exponent as usize, defs)
    }
}

/// Base-`n` code of a block, leftmost slot most significant.
pub fn encode(block: &[Vertex], n: usize) -> Vertex {
    block.iter().fold(0, |acc, &v| acc * n + v)
}

/// Inverse of [`encode`] for blocks of length `k`.
pub fn decode(mut code: Vertex, n: usize, k: usize) -> Vec<Vertex> {
    let mut block = vec![0; k];
    for slot in block.iter_mut().rev() {
        *slot = code % n;
        code /= n;
    }
    block
}

fn require_marks(s: &Structure, name: &str) -> Result<()> {
    let count = s.marked(name).len();
    if count != 1 {
        return Err(Error::Scheme(format!(
            "expected exactly one vertex marked {name}, found {count}"
        )));
    }
    Ok(())
}

/// Detaches the root of a rooted tree; see [`BasicScheme::y_to_f`].
pub fn y_to_f(s: &Structure) -> Result<Structure> {
    let scheme = BasicScheme::y_to_f();
    scheme.check_source(s)?;
    require_marks(s, "R")?;
    scheme.apply(s)
}

/// Reattaches a principal vertex; see [`BasicScheme::f_to_y`].
pub fn f_to_y(s: &Structure) -> Result<Structure> {
    let scheme = BasicScheme::f_to_y();
    scheme.check_source(s)?;
    require_marks(s, "P")?;
    scheme.apply(s)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingIdentity {
    pub rewritten: Formula,
    /// Pairing of the formula with the interpreted structure.
    pub lhs: Fraction,
    /// Pairing of the rewritten formula with the source structure.
    pub rhs: Fraction,
    pub equal: bool,
}

pub fn verify_pairing_identity(
    scheme: &BasicScheme,
    s: &Structure,
    f: &Formula,
) -> Result<PairingIdentity> {
    let target = scheme.apply(s)?;
    let rewritten = scheme.rewrite(f)?;
    let lhs = Evaluator::new(&target).stone_pairing(f)?;
    let rhs = Evaluator::new(s).stone_pairing(&rewritten)?;
    let equal = lhs == rhs;
    Ok(PairingIdentity {
        rewritten,
        lhs,
        rhs,
        equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{path, star, with_root};
    use crate::structure::graph_from_edges;

    fn k3() -> Structure {
        graph_from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn complement_of_triangle_is_empty() {
        let out = BasicScheme::complement().apply(&k3()).unwrap();
        assert_eq!(out, Structure::empty(Signature::graph(), 3));
        let back = BasicScheme::complement().apply(&out).unwrap();
        assert_eq!(back, k3());
    }

    #[test]
    fn identity_scheme() {
        let s = with_root(&path(5), 2).unwrap();
        let id = BasicScheme::identity(s.signature());
        assert_eq!(id.apply(&s).unwrap(), s);
        let f = parse("E x2. adj(x1,x2) & R(x2)").unwrap();
        assert_eq!(id.rewrite(&f).unwrap(), f);
    }

    fn pair_scheme() -> BasicScheme {
        let defs = BTreeMap::from([("adj".to_string(), parse("adj(x1,x3)").unwrap())]);
        BasicScheme::new(Signature::graph(), Signature::graph(), 2, defs).unwrap()
    }

    #[test]
    fn square_scheme_on_an_edge() {
        let e = graph_from_edges(2, &[(0, 1)]).unwrap();
        let out = pair_scheme().apply(&e).unwrap();
        assert_eq!(out.size(), 4);
        // Oracle: (a,b) ~ (c,d) iff a ~ c.
        for u in 0..4 {
            for v in 0..4 {
                let (a, c) = (decode(u, 2, 2)[0], decode(v, 2, 2)[0]);
                assert_eq!(out.holds("adj", &[u, v]), a != c, "{u} {v}");
            }
        }
    }

    #[test]
    fn coding_round_trips() {
        for code in 0..125 {
            assert_eq!(encode(&decode(code, 5, 3), 5), code);
        }
        assert_eq!(encode(&[1, 0, 2], 3), 11);
    }

    #[test]
    fn rewrite_examples() {
        let c = BasicScheme::complement();
        assert_eq!(
            c.rewrite(&parse("adj(x1,x2)").unwrap()).unwrap().to_string(),
            "!adj(x1,x2) & !(x1=x2)"
        );
        let r = pair_scheme().rewrite(&parse("E y. adj(x1,y)").unwrap()).unwrap();
        assert_eq!(r.to_string(), "E x2. E x3. adj(x1,x2)");
        assert!(pair_scheme().rewrite(&parse("E>=2 y. adj(x1,y)").unwrap()).is_err());
        assert!(c.rewrite(&parse("dist(x1,x2) <= 1").unwrap()).is_err());
        assert!(c.rewrite(&parse("M(x1)").unwrap()).is_err());
        let counted = c.rewrite(&parse("E>=2 y. adj(x1,y)").unwrap()).unwrap();
        assert_eq!(counted.qrank(), 1);
    }

    #[test]
    fn rewrite_avoids_capture() {
        // The inlined definition binds z; the target quantifier must not clash.
        let s = BasicScheme::y_to_f();
        let f = parse("E y. R(y) & adj(x1,y)").unwrap();
        let r = s.rewrite(&f).unwrap();
        let t = with_root(&star(4), 0).unwrap();
        let lhs = crate::stone_pairing(&s.apply(&t).unwrap(), &f).unwrap();
        let rhs = crate::stone_pairing(&t, &r).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn rooted_star_to_forest() {
        let t = with_root(&star(4), 0).unwrap();
        let f = y_to_f(&t).unwrap();
        assert_eq!(f.signature(), &Signature::principal_forest());
        assert!(f.tuples("adj").unwrap().is_empty());
        assert_eq!(f.marked("P").as_slice(), &[0]);
        assert_eq!(f.marked("R").as_slice(), &[1, 2, 3]);
        assert_eq!(f_to_y(&f).unwrap(), t);
    }

    #[test]
    fn single_vertex_round_trip() {
        let t = with_root(&path(1), 0).unwrap();
        let f = y_to_f(&t).unwrap();
        assert_eq!(f.marked("P").as_slice(), &[0]);
        assert!(f.marked("R").is_empty());
        assert_eq!(f_to_y(&f).unwrap(), t);
    }

    #[test]
    fn mark_multiplicity() {
        assert!(y_to_f(&path(3).with_relation(
            crate::structure::RelationSymbol::new("R", 1, false),
            vec![]
        ).unwrap())
        .is_err());
        assert!(y_to_f(&path(3)).is_err());
    }

    #[test]
    fn pairing_identity_examples() {
        let r = verify_pairing_identity(
            &BasicScheme::complement(),
            &k3(),
            &parse("adj(x1,x2)").unwrap(),
        )
        .unwrap();
        assert!(r.equal);
        assert_eq!(r.lhs, Fraction::zero());
        let p3 = with_root(&path(3), 0).unwrap();
        let r = verify_pairing_identity(&BasicScheme::y_to_f(), &p3, &parse("R(x1)").unwrap())
            .unwrap();
        assert!(r.equal);
        assert_eq!(r.lhs, Fraction::new(1u32, 3u32));
        assert_eq!(r.rhs, Fraction::new(1u32, 3u32));
    }

    #[test]
    fn asymmetric_definition_is_rejected() {
        let defs = BTreeMap::from([("adj".to_string(), parse("adj(x1,x2) & R(x1)").unwrap())]);
        let scheme = BasicScheme::new(Signature::rooted_graph(), Signature::graph(), 1, defs).unwrap();
        let t = with_root(&path(3), 0).unwrap();
        assert!(matches!(scheme.apply(&t), Err(Error::Scheme(_))));
    }

    #[test]
    fn json_round_trip() {
        let s = BasicScheme::f_to_y();
        let back = BasicScheme::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
        let bad = r#"{"exponent":1,"source":{"adj":{"arity":2,"symmetric":true}},
            "target":{"adj":{"arity":2,"symmetric":true}},"defs":{"adj":"adj(x1,"}}"#;
        let err = BasicScheme::from_json_str(bad).unwrap_err().to_string();
        assert!(err.starts_with("defs.adj: line 1, column"), "{err}");
    }
}
