use std::collections::BTreeMap;

use super::{DistCmp, Formula, Var};
use crate::error::{Error, Result};

/// Renames bound variables apart, leftmost-outermost: with `m` the largest
/// free variable, quantifiers receive `x(m+1), x(m+2), ...` in pre-order.
/// Free variables are untouched. Idempotent.
pub fn normalize(f: &Formula) -> Formula {
    let mut next = f.free_vars().iter().max().map_or(1, |m| m + 1);
    rebind(f, &BTreeMap::new(), &mut Vec::new(), &mut next)
}

/// Capture-avoiding renaming of free variables; unmapped free variables
/// stay. The result is normalized.
pub fn rename_free(f: &Formula, map: &BTreeMap<Var, Var>) -> Formula {
    let top = map.values().copied().max().unwrap_or(0);
    let mut next = f.max_var().max(top) + 1;
    normalize(&rebind(f, map, &mut Vec::new(), &mut next))
}

/// Renames the free variables `x(i1) < ... < x(ip)` to `x1, ..., xp`.
pub fn pack(f: &Formula) -> Formula {
    let map = f
        .free_vars()
        .into_iter()
        .zip(1..)
        .collect::<BTreeMap<Var, Var>>();
    rename_free(f, &map)
}

/// Pairwise separation `/\_{i<j} dist(xi,xj) > r` over `x1..xp`.
pub fn theta_r(p: u32, r: u32) -> Result<Formula> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!(
            "separation formula needs at least 2 variables, got {p}"
        )));
    }
    Ok(Formula::and_all((1..=p).flat_map(|i| {
        (i + 1..=p).map(move |j| Formula::dist(i, j, DistCmp::Gt, r))
    })))
}

/// `r`-neighborhood closure of a packed formula `f(x1..xp)`: some
/// `y1..yp` with `dist(xi,yi) <= r` satisfy `f(y1..yp)`.
///
/// Built as nested guarded quantifiers
/// `E y1. dist(x1,y1) <= r & E y2. dist(x2,y2) <= r & ... & f(y1..yp)`,
/// which keeps the result distance-guarded for locality analysis.
pub fn lambda_r(f: &Formula, r: u32) -> Result<Formula> {
    let free = f.free_vars();
    let p = free.len() as Var;
    if !free.iter().copied().eq(1..=p) {
        return Err(Error::InvalidArgument(format!(
            "formula must have free variables x1..x{p} (pack it first), found {free:?}"
        )));
    }
    let base = f.max_var();
    let shift: BTreeMap<Var, Var> = (1..=p).map(|i| (i, base + i)).collect();
    let mut body = rename_free(f, &shift);
    for i in (1..=p).rev() {
        body = Formula::exists(
            base + i,
            Formula::dist(i, base + i, DistCmp::Le, r).and(body),
        );
    }
    Ok(normalize(&body))
}

fn lookup(v: Var, env: &[(Var, Var)], free: &BTreeMap<Var, Var>) -> Var {
    env.iter()
        .rev()
        .find(|(from, _)| *from == v)
        .map(|&(_, to)| to)
        .unwrap_or_else(|| free.get(&v).copied().unwrap_or(v))
}

fn rebind(
    f: &Formula,
    free: &BTreeMap<Var, Var>,
    env: &mut Vec<(Var, Var)>,
    next: &mut Var,
) -> Formula {
    let quantified = |v: Var, body: &Formula, env: &mut Vec<(Var, Var)>, next: &mut Var| {
        let fresh = *next;
        *next += 1;
        env.push((v, fresh));
        let body = rebind(body, free, env, next);
        env.pop();
        (fresh, Box::new(body))
    };
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::Rel(name, args) => Formula::Rel(
            name.clone(),
            args.iter().map(|&v| lookup(v, env, free)).collect(),
        ),
        Formula::Eq(a, b) => Formula::Eq(lookup(*a, env, free), lookup(*b, env, free)),
        Formula::Dist {
            left,
            right,
            cmp,
            bound,
        } => Formula::dist(lookup(*left, env, free), lookup(*right, env, free), *cmp, *bound),
        Formula::Not(g) => rebind(g, free, env, next).not(),
        Formula::And(a, b) => {
            let a = rebind(a, free, env, next);
            a.and(rebind(b, free, env, next))
        }
        Formula::Or(a, b) => {
            let a = rebind(a, free, env, next);
            a.or(rebind(b, free, env, next))
        }
        Formula::Implies(a, b) => {
            let a = rebind(a, free, env, next);
            a.implies(rebind(b, free, env, next))
        }
        Formula::Exists(v, g) => {
            let (v, g) = quantified(*v, g, env, next);
            Formula::Exists(v, g)
        }
        Formula::Forall(v, g) => {
            let (v, g) = quantified(*v, g, env, next);
            Formula::Forall(v, g)
        }
        Formula::CountGe(a, v, g) => {
            let (v, g) = quantified(*v, g, env, next);
            Formula::CountGe(*a, v, g)
        }
        Formula::CountLe(b, v, g) => {
            let (v, g) = quantified(*v, g, env, next);
            Formula::CountLe(*b, v, g)
        }
    }
}
