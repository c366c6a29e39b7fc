//! Free variables, quantifier rank, and a syntactic locality radius.
//!
//! The radius is an upper bound `r` such that satisfaction at a tuple only
//! depends on the substructure induced by the `r`-ball around it. It is
//! derived from distance guards: a quantified variable `y` whose body is a
//! conjunction containing `dist(z,y) <= c`, `dist(z,y) = c`, `y = z` or a
//! relation atom mentioning both `y` and an in-scope `z` ranges inside the
//! `c`-ball (resp. 0-, 1-ball) of the tuple. Universal quantifiers are
//! guarded through `A y. guard & ... -> body`. Any unguarded quantifier
//! makes the radius unknown.

use std::collections::BTreeSet;

use super::{DistCmp, Formula, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaMeta {
    pub free_vars: BTreeSet<Var>,
    pub qrank: u32,
    /// `None` when no finite radius could be derived.
    pub locality_radius: Option<u32>,
}

pub fn meta(f: &Formula) -> FormulaMeta {
    FormulaMeta {
        free_vars: f.free_vars(),
        qrank: f.qrank(),
        // Atoms are reported 1-local; locality is monotone in the radius.
        locality_radius: radius(f).map(|r| r.max(1)),
    }
}

/// Tight syntactic radius; atoms over relations are 0-local.
pub(crate) fn radius(f: &Formula) -> Option<u32> {
    match f {
        Formula::True | Formula::False | Formula::Rel(..) | Formula::Eq(..) => Some(0),
        // A shortest path of length <= c between the endpoints stays within
        // floor(c/2) of one of them.
        Formula::Dist { bound, .. } => Some(bound / 2),
        Formula::Not(g) => radius(g),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            Some(radius(a)?.max(radius(b)?))
        }
        Formula::Exists(y, body) | Formula::CountGe(_, y, body) | Formula::CountLe(_, y, body) => {
            let scope = scope_of(f);
            let conjuncts = flatten_and(body);
            guarded_radius(*y, &scope, &conjuncts, &[])
        }
        Formula::Forall(y, body) => {
            let Formula::Implies(premise, conclusion) = &**body else {
                return None;
            };
            let scope = scope_of(f);
            let conjuncts = flatten_and(premise);
            guarded_radius(*y, &scope, &conjuncts, &[conclusion])
        }
    }
}

fn scope_of(f: &Formula) -> BTreeSet<Var> {
    f.free_vars()
}

fn flatten_and(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::And(a, b) => {
            let mut out = flatten_and(a);
            out.extend(flatten_and(b));
            out
        }
        other => vec![other],
    }
}

/// Distance bound a conjunct places between `y` and the in-scope variables.
fn guard_bound(y: Var, scope: &BTreeSet<Var>, f: &Formula) -> Option<u32> {
    let ties = |a: Var, b: Var| (a == y && scope.contains(&b)) || (b == y && scope.contains(&a));
    match f {
        Formula::Dist {
            left,
            right,
            cmp: DistCmp::Le | DistCmp::Eq,
            bound,
        } if ties(*left, *right) => Some(*bound),
        Formula::Eq(a, b) if ties(*a, *b) => Some(0),
        Formula::Rel(_, args) if args.contains(&y) && args.iter().any(|v| scope.contains(v)) => {
            Some(1)
        }
        _ => None,
    }
}

fn guarded_radius(
    y: Var,
    scope: &BTreeSet<Var>,
    conjuncts: &[&Formula],
    extra: &[&Formula],
) -> Option<u32> {
    let (guard_idx, c) = conjuncts
        .iter()
        .enumerate()
        .filter_map(|(i, g)| guard_bound(y, scope, g).map(|c| (i, c)))
        .min_by_key(|&(i, c)| (c, i))?;
    let mut rest = 0;
    for (i, g) in conjuncts.iter().enumerate() {
        if i != guard_idx {
            rest = rest.max(radius(g)?);
        }
    }
    for g in extra {
        rest = rest.max(radius(g)?);
    }
    Some(c + rest)
}
