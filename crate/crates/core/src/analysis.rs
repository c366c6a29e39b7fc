//! Ball statistics, ball-cover breaking, splitting at centers, the
//! pairing pseudometric and convergence reports along structure sequences.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::eval::{EvalOptions, Evaluator};
use crate::fraction::{pow2_inverse, Fraction};
use crate::structure::{RelationSymbol, Signature, Structure, Vertex, VertexSet};
use crate::syntax::{pack, Formula, Var};

/// `max_v |B_r(v)| / n`, with denominator `n`.
pub fn residual_index(s: &Structure, r: usize) -> Result<Fraction> {
    let n = s.size();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let max = (0..n).into_par_iter().map(|v| s.ball_size(v, r)).max().unwrap();
    Ok(Fraction::new(max, n))
}

/// `|B_d(root)| / n` for `d = 0..=d_max`.
pub fn dispersion_profile(s: &Structure, root: Vertex, d_max: usize) -> Result<Vec<Fraction>> {
    s.check_vertex(root)?;
    let n = s.size();
    let dist = s.bfs(&[root], Some(d_max));
    let mut at = vec![0usize; d_max + 1];
    for d in dist.into_iter().flatten() {
        at[d] += 1;
    }
    let mut total = 0;
    Ok(at
        .into_iter()
        .map(|c| {
            total += c;
            Fraction::new(total, n)
        })
        .collect())
}

fn check_epsilon(eps: &BigRational) -> Result<()> {
    if !eps.is_positive() || eps > &BigRational::one() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1], got {eps}"
        )));
    }
    Ok(())
}

/// `size >= eps * n`, exactly.
fn at_least(size: usize, eps: &BigRational, n: usize) -> bool {
    BigInt::from(size) * eps.denom() >= eps.numer() * BigInt::from(n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakResult {
    pub epsilon: BigRational,
    pub r: usize,
    pub centers: Vec<Vertex>,
    /// Union of the `2r`-balls around the centers.
    pub cover: VertexSet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BreakChecks {
    /// `|centers| <= 1/eps`.
    pub few_centers: bool,
    /// Every center has `|B_2r| >= eps*n`.
    pub heavy_centers: bool,
    /// Every vertex outside the cover has `|B_r| < eps*n`.
    pub light_outside: bool,
    /// The `r`-balls around distinct centers are disjoint.
    pub disjoint: bool,
}

impl BreakChecks {
    pub fn all(&self) -> bool {
        self.few_centers && self.heavy_centers && self.light_outside && self.disjoint
    }
}

impl BreakResult {
    /// Re-checks the four cover properties against `s` from scratch.
    pub fn check(&self, s: &Structure) -> BreakChecks {
        let n = s.size();
        let eps = &self.epsilon;
        let few_centers =
            BigInt::from(self.centers.len()) * eps.numer() <= eps.denom().clone();
        let heavy_centers = self
            .centers
            .iter()
            .all(|&c| at_least(s.ball_size(c, 2 * self.r), eps, n));
        let light_outside = (0..n)
            .filter(|&v| !self.cover.contains(v))
            .all(|v| !at_least(s.ball_size(v, self.r), eps, n));
        let balls: Vec<VertexSet> = self
            .centers
            .iter()
            .map(|&c| s.ball(&[c], self.r).unwrap())
            .collect();
        let disjoint = (0..balls.len())
            .all(|i| (i + 1..balls.len()).all(|j| balls[i].is_disjoint(&balls[j])));
        BreakChecks {
            few_centers,
            heavy_centers,
            light_outside,
            disjoint,
        }
    }
}

/// Greedy maximal set of centers with heavy, pairwise disjoint `r`-balls.
///
/// Candidates are the vertices with `|B_r(v)| >= eps*n`, taken by
/// decreasing ball size and then by vertex id; a candidate is accepted when
/// its `r`-ball misses every accepted ball.
pub fn break_cover(s: &Structure, eps: &BigRational, r: usize) -> Result<BreakResult> {
    check_epsilon(eps)?;
    let n = s.size();
    let sizes: Vec<usize> = (0..n).into_par_iter().map(|v| s.ball_size(v, r)).collect();
    let mut candidates: Vec<Vertex> = (0..n).filter(|&v| at_least(sizes[v], eps, n)).collect();
    candidates.sort_by_key(|&v| (std::cmp::Reverse(sizes[v]), v));
    let mut taken = vec![false; n];
    let mut centers = Vec::new();
    for v in candidates {
        let ball = s.ball(&[v], r)?;
        if ball.iter().all(|u| !taken[u]) {
            for u in ball.iter() {
                taken[u] = true;
            }
            centers.push(v);
        }
    }
    let cover = s.ball(&centers, 2 * r)?;
    Ok(BreakResult {
        epsilon: eps.clone(),
        r,
        centers,
        cover,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPart {
    pub center: Vertex,
    /// Induced `d`-ball with the center marked.
    pub structure: Structure,
    /// Original id of each vertex of `structure`.
    pub vertices: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    pub d: usize,
    /// Name of the unary relation marking each part's center.
    pub mark: String,
    pub parts: Vec<SplitPart>,
    pub residue: Structure,
    pub residue_vertices: Vec<Vertex>,
}

/// Cuts out the induced `d`-balls around `centers`, which must be pairwise
/// disjoint. Centers are marked by a unary relation absent from `s`
/// (`R` when free).
pub fn split_by_centers(s: &Structure, centers: &[Vertex], d: usize) -> Result<SplitResult> {
    let balls = centers
        .iter()
        .map(|&c| s.ball(&[c], d))
        .collect::<Result<Vec<_>>>()?;
    let mut used = HashSet::new();
    for (i, ball) in balls.iter().enumerate() {
        for v in ball.iter() {
            if !used.insert(v) {
                return Err(Error::InvalidArgument(format!(
                    "the {d}-ball around center {} overlaps an earlier ball at vertex {v}",
                    centers[i]
                )));
            }
        }
    }
    let mark = s.signature().fresh_name("R");
    let symbol = RelationSymbol::new(mark.clone(), 1, false);
    let mut parts = Vec::new();
    for (&c, ball) in centers.iter().zip(&balls) {
        let (local, map) = s.induced(ball);
        let at = map.binary_search(&c).unwrap();
        parts.push(SplitPart {
            center: c,
            structure: local.with_relation(symbol.clone(), vec![vec![at]])?,
            vertices: map,
        });
    }
    let rest: VertexSet = (0..s.size()).filter(|v| !used.contains(v)).collect();
    let (residue, residue_vertices) = s.induced(&rest);
    Ok(SplitResult {
        d,
        mark,
        parts,
        residue,
        residue_vertices,
    })
}

/// Complexity used by the pseudometric: `qrank + |Fv|`.
pub fn complexity(f: &Formula) -> u32 {
    f.qrank() + f.free_vars().len() as u32
}

/// Deterministic formula catalog over `signature` with complexity at most
/// `n_max`, at most `budget` entries, in generation order: `true`, atoms
/// over `x1..x(n_max)`, their negations, conjunctions of two literals, then
/// `E` and `A` applied to each free variable of those. Formulas are packed
/// and duplicates dropped.
pub fn complexity_catalog(signature: &Signature, n_max: u32, budget: usize) -> Vec<Formula> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut push = |f: Formula, out: &mut Vec<Formula>| -> bool {
        if out.len() >= budget {
            return false;
        }
        let f = pack(&f);
        if complexity(&f) <= n_max && seen.insert(f.clone()) {
            out.push(f);
        }
        out.len() < budget
    };
    let m = n_max.max(1) as Var;
    if !push(Formula::True, &mut out) {
        return out;
    }
    let mut atoms = Vec::new();
    for sym in signature.symbols() {
        let r = sym.arity as u32;
        let total = (m as u64).saturating_pow(r);
        for code in 0..total.min(1 << 16) {
            let mut c = code;
            let mut args = vec![0; r as usize];
            for a in args.iter_mut().rev() {
                *a = (c % m as u64) as Var + 1;
                c /= m as u64;
            }
            atoms.push(Formula::rel(sym.name.clone(), args));
        }
    }
    for i in 1..=m {
        for j in i + 1..=m {
            atoms.push(Formula::Eq(i, j));
        }
    }
    let mut literals = atoms.clone();
    literals.extend(atoms.iter().map(|a| a.clone().not()));
    let mut base = literals.clone();
    for i in 0..literals.len() {
        for j in i + 1..literals.len() {
            base.push(literals[i].clone().and(literals[j].clone()));
        }
    }
    for f in &base {
        if !push(f.clone(), &mut out) {
            return out;
        }
    }
    for f in &base {
        for v in f.free_vars() {
            if !push(Formula::exists(v, f.clone()), &mut out)
                || !push(Formula::forall(v, f.clone()), &mut out)
            {
                return out;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoDistance {
    /// `2^-level`.
    pub value: Fraction,
    pub level: u32,
    pub catalog_size: usize,
    /// A formula of complexity `level + 1` whose pairings differ by at
    /// least `2^-(level+1)`, when `level < n_max`.
    pub witness: Option<(Formula, BigRational)>,
}

/// Catalog approximation of the pairing pseudometric: `2^-n*` for the
/// largest `n* <= n_max` such that every catalog formula of complexity at
/// most `n*` has pairings differing by less than `2^-n*`.
pub fn pseudo_distance(
    s1: &Structure,
    s2: &Structure,
    n_max: u32,
    budget: usize,
) -> Result<PseudoDistance> {
    if s1.signature() != s2.signature() {
        return Err(Error::SignatureMismatch(
            "structures must share a signature".into(),
        ));
    }
    let catalog = complexity_catalog(s1.signature(), n_max, budget);
    let (e1, e2) = (Evaluator::new(s1), Evaluator::new(s2));
    let mut diffs = Vec::with_capacity(catalog.len());
    for f in &catalog {
        let a = e1.stone_pairing(f)?.to_rational();
        let b = e2.stone_pairing(f)?.to_rational();
        diffs.push((complexity(f), (a - b).abs()));
    }
    let mut level = 0;
    let mut witness = None;
    while level < n_max {
        let next = level + 1;
        let bound = pow2_inverse(next).to_rational();
        if let Some(i) = (0..catalog.len()).find(|&i| diffs[i].0 <= next && diffs[i].1 >= bound) {
            witness = Some((catalog[i].clone(), diffs[i].1.clone()));
            break;
        }
        level = next;
    }
    Ok(PseudoDistance {
        value: pow2_inverse(level),
        level,
        catalog_size: catalog.len(),
        witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub formula: Formula,
    pub values: Vec<Fraction>,
    /// `max - min` over the last `window` values.
    pub cauchy_tail: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidualTrajectory {
    pub r: usize,
    pub values: Vec<Fraction>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceReport {
    pub grid: Vec<usize>,
    /// Domain size at each grid point.
    pub sizes: Vec<usize>,
    pub trajectories: Vec<Trajectory>,
    pub residual: Vec<ResidualTrajectory>,
}

fn tail_spread(values: &[Fraction], window: usize) -> BigRational {
    let tail = &values[values.len().saturating_sub(window.max(1))..];
    match (tail.iter().min(), tail.iter().max()) {
        (Some(lo), Some(hi)) => hi.to_rational() - lo.to_rational(),
        _ => BigRational::zero(),
    }
}

/// Pairings of every catalog formula and residual indices at every grid
/// point. Grid points are built and evaluated in parallel.
pub fn convergence_report<F>(
    build: F,
    grid: &[usize],
    catalog: &[Formula],
    radii: &[usize],
    window: usize,
    options: &EvalOptions,
) -> Result<ConvergenceReport>
where
    F: Fn(usize) -> Result<Structure> + Sync,
{
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("grid must be strictly ascending".into()));
    }
    let rows = grid
        .par_iter()
        .map(|&g| {
            let s = build(g)?;
            let eval = Evaluator::with_options(&s, options.clone());
            let values = catalog
                .iter()
                .map(|f| eval.stone_pairing(f))
                .collect::<Result<Vec<_>>>()?;
            let residual = radii
                .iter()
                .map(|&r| residual_index(&s, r))
                .collect::<Result<Vec<_>>>()?;
            Ok((s.size(), values, residual))
        })
        .collect::<Result<Vec<_>>>()?;
    let trajectories = catalog
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let values: Vec<Fraction> = rows.iter().map(|row| row.1[i].clone()).collect();
            Trajectory {
                formula: f.clone(),
                cauchy_tail: tail_spread(&values, window),
                values,
            }
        })
        .collect();
    let residual = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| ResidualTrajectory {
            r,
            values: rows.iter().map(|row| row.2[i].clone()).collect(),
        })
        .collect();
    Ok(ConvergenceReport {
        grid: grid.to_vec(),
        sizes: rows.iter().map(|row| row.0).collect(),
        trajectories,
        residual,
    })
}

fn rational_json(q: &BigRational) -> Value {
    let num = q.numer().magnitude().clone();
    let den = q.denom().magnitude().clone();
    Fraction::new(num, den).to_json()
}

fn with_value(mut record: Map<String, Value>, value: Value) -> Value {
    if let Value::Object(v) = value {
        record.extend(v);
    }
    Value::Object(record)
}

impl ConvergenceReport {
    /// JSON-lines records: one per (grid point, formula), one per
    /// (grid point, radius), then one tail summary per formula.
    pub fn to_json_lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        for (i, (&g, &size)) in self.grid.iter().zip(&self.sizes).enumerate() {
            for t in &self.trajectories {
                let mut rec = Map::new();
                rec.insert("n".into(), json!(g));
                rec.insert("size".into(), json!(size));
                rec.insert("formula".into(), json!(t.formula.to_string()));
                lines.push(with_value(rec, t.values[i].to_json()).to_string());
            }
            for rt in &self.residual {
                let mut rec = Map::new();
                rec.insert("n".into(), json!(g));
                rec.insert("size".into(), json!(size));
                rec.insert("residual_radius".into(), json!(rt.r));
                lines.push(with_value(rec, rt.values[i].to_json()).to_string());
            }
        }
        for t in &self.trajectories {
            let mut rec = Map::new();
            rec.insert("formula".into(), json!(t.formula.to_string()));
            rec.insert("cauchy_tail".into(), rational_json(&t.cauchy_tail));
            lines.push(Value::Object(rec).to_string());
        }
        lines
    }
}

/// Exact rational from `a/b` or an integer; decimals are rejected.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("expected a rational `a/b` or an integer, got `{text}`"));
    let (a, b) = match text.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), "1"),
    };
    let num: BigInt = a.parse().map_err(|_| bad())?;
    let den: BigUint = b.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, BigInt::from(den)))
}
