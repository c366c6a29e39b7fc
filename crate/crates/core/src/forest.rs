//! Rooted forests, mass transport checks and skeleton decompositions.
//!
//! Two encodings of rooted trees are used. The directed one
//! ([`RootedForest`]) has arcs `arc(u,v)` from father to son and roots
//! marked `R`. The undirected one is a graph over
//! [`Signature::rooted_graph`] with the root marked `R`; it is the form the
//! tree/forest schemes of [`crate::interpret`] work on.

use std::collections::VecDeque;

use num_bigint::BigUint;
use num_rational::BigRational;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::fraction::Fraction;
use crate::interpret::y_to_f;
use crate::structure::{RelationSymbol, Signature, Structure, Vertex, VertexSet};
use crate::syntax::Formula;

/// `{arc/2, R/1}`.
pub fn forest_signature() -> Signature {
    Signature::new([RelationSymbol::new("arc", 2, false), RelationSymbol::new("R", 1, false)])
        .unwrap()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestDiagnostics {
    pub valid: bool,
    pub problems: Vec<String>,
}

/// Checks the rooted forest axioms: roots have in-degree 0 and other
/// vertices in-degree 1, no directed cycles, at most one root per component.
pub fn validate_rooted_forest(s: &Structure) -> ForestDiagnostics {
    let mut problems = Vec::new();
    let arc_ok = matches!(s.signature().get("arc"), Some(sym) if sym.arity == 2);
    let root_ok = matches!(s.signature().get("R"), Some(sym) if sym.arity == 1);
    if !arc_ok {
        problems.push("signature lacks a binary relation `arc`".to_string());
    }
    if !root_ok {
        problems.push("signature lacks a unary relation `R`".to_string());
    }
    if !arc_ok || !root_ok {
        return ForestDiagnostics {
            valid: false,
            problems,
        };
    }
    let n = s.size();
    let roots = s.marked("R");
    let arcs = s.tuples("arc").unwrap();
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for t in arcs {
        indeg[t[1]] += 1;
        out[t[0]].push(t[1]);
    }
    for (v, &deg) in indeg.iter().enumerate() {
        match (roots.contains(v), deg) {
            (true, 0) | (false, 1) => {}
            (true, d) => problems.push(format!("root {v} has in-degree {d}")),
            (false, d) => problems.push(format!("vertex {v} has in-degree {d}, expected 1")),
        }
    }
    // Kahn's algorithm: leftover vertices lie on or below a cycle.
    let mut remaining = indeg.clone();
    let mut queue: VecDeque<Vertex> = (0..n).filter(|&v| remaining[v] == 0).collect();
    let mut removed = 0;
    while let Some(u) = queue.pop_front() {
        removed += 1;
        for &w in &out[u] {
            remaining[w] -= 1;
            if remaining[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    if removed < n {
        let first = (0..n).find(|&v| remaining[v] > 0).unwrap();
        problems.push(format!("directed cycle reachable to vertex {first}"));
    }
    for comp in s.components() {
        let count = comp.iter().filter(|&v| roots.contains(v)).count();
        let min = comp.as_slice()[0];
        if count > 1 {
            problems.push(format!("component of vertex {min} has {count} roots"));
        } else if count == 0 {
            problems.push(format!("component of vertex {min} has no root"));
        }
    }
    ForestDiagnostics {
        valid: problems.is_empty(),
        problems,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootedForest {
    structure: Structure,
    parent: Vec<Option<Vertex>>,
}

impl RootedForest {
    pub fn new(structure: Structure) -> Result<Self> {
        let diag = validate_rooted_forest(&structure);
        if !diag.valid {
            return Err(Error::Forest(diag.problems.join("; ")));
        }
        let mut parent = vec![None; structure.size()];
        for t in structure.tuples("arc").unwrap() {
            parent[t[1]] = Some(t[0]);
        }
        Ok(RootedForest { structure, parent })
    }

    /// Orients an undirected forest with one `R`-marked vertex per
    /// component away from the marks.
    pub fn orient(s: &Structure) -> Result<Self> {
        let roots = s.marked("R");
        let n = s.size();
        let mut parent: Vec<Option<Vertex>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut arcs = Vec::new();
        for comp in s.components() {
            let marked: Vec<Vertex> = comp.iter().filter(|&v| roots.contains(v)).collect();
            if marked.len() != 1 {
                return Err(Error::Forest(format!(
                    "component of vertex {} has {} roots, expected 1",
                    comp.as_slice()[0],
                    marked.len()
                )));
            }
            let mut queue = VecDeque::from([marked[0]]);
            seen[marked[0]] = true;
            while let Some(u) = queue.pop_front() {
                for &w in s.neighbors(u) {
                    if !seen[w] {
                        seen[w] = true;
                        parent[w] = Some(u);
                        arcs.push(vec![u, w]);
                        queue.push_back(w);
                    } else if parent[u] != Some(w) {
                        return Err(Error::Forest(format!(
                            "edge {u} -- {w} closes a cycle"
                        )));
                    }
                }
            }
        }
        let structure = Structure::new(
            forest_signature(),
            n,
            [("arc", arcs), ("R", roots.iter().map(|v| vec![v]).collect())],
        )?;
        Ok(RootedForest { structure, parent })
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn size(&self) -> usize {
        self.structure.size()
    }

    pub fn roots(&self) -> VertexSet {
        self.structure.marked("R")
    }

    pub fn parent(&self, v: Vertex) -> Result<Option<Vertex>> {
        self.structure.check_vertex(v)?;
        Ok(self.parent[v])
    }

    /// `k`-fold father; roots are fixed points.
    pub fn ancestor(&self, v: Vertex, k: usize) -> Result<Vertex> {
        self.structure.check_vertex(v)?;
        let mut u = v;
        for _ in 0..k {
            match self.parent[u] {
                Some(p) => u = p,
                None => break,
            }
        }
        Ok(u)
    }

    /// Undirected form over [`Signature::rooted_graph`].
    pub fn to_undirected(&self) -> Structure {
        let adj = self.structure.tuples("arc").unwrap().to_vec();
        let roots = self.roots().iter().map(|v| vec![v]).collect();
        Structure::new(Signature::rooted_graph(), self.size(), [("adj", adj), ("R", roots)]).unwrap()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FmtpReport {
    pub n: usize,
    pub phi_count: usize,
    pub psi_count: usize,
    /// Every `phi`-vertex has at least `a` `psi`-neighbors.
    pub premise1: bool,
    /// Every `psi`-vertex has at most `b` `phi`-neighbors.
    pub premise2: bool,
    /// `a * <phi> <= b * <psi>`.
    pub conclusion: bool,
    /// Some premise fails, so the conclusion is not implied.
    pub vacuous: bool,
    /// Sum over `phi`-vertices of their `psi`-neighbor counts.
    pub phi_to_psi: usize,
    /// Sum over `psi`-vertices of their `phi`-neighbor counts.
    pub psi_to_phi: usize,
}

impl FmtpReport {
    /// Both edge sums count the same edges.
    pub fn identity_holds(&self) -> bool {
        self.phi_to_psi == self.psi_to_phi
    }

    pub fn counterexample(&self) -> bool {
        !self.vacuous && !self.conclusion
    }
}

fn unary_set(eval: &Evaluator, f: &Formula) -> Result<Vec<bool>> {
    if f.free_vars().iter().any(|&v| v != 1) {
        return Err(Error::InvalidArgument(format!(
            "`{f}` must have no free variable other than x1"
        )));
    }
    let n = eval.structure().size();
    let mut member = vec![false; n];
    for row in eval.satisfying_tuples(f, 1)? {
        member[row[0]] = true;
    }
    Ok(member)
}

fn count_in(s: &Structure, v: Vertex, member: &[bool]) -> usize {
    s.neighbors(v).iter().filter(|&&w| member[w]).count()
}

/// Checks the finitary mass transport principle for `(phi, psi, a, b)` on
/// `s`. Premises are checked in `s` itself.
pub fn check_fmtp(s: &Structure, phi: &Formula, psi: &Formula, a: usize, b: usize) -> Result<FmtpReport> {
    let eval = Evaluator::new(s);
    let in_phi = unary_set(&eval, phi)?;
    let in_psi = unary_set(&eval, psi)?;
    let n = s.size();
    let phi_vs: Vec<Vertex> = (0..n).filter(|&v| in_phi[v]).collect();
    let psi_vs: Vec<Vertex> = (0..n).filter(|&v| in_psi[v]).collect();
    let down: Vec<usize> = phi_vs.iter().map(|&v| count_in(s, v, &in_psi)).collect();
    let up: Vec<usize> = psi_vs.iter().map(|&v| count_in(s, v, &in_phi)).collect();
    let premise1 = down.iter().all(|&c| c >= a);
    let premise2 = up.iter().all(|&c| c <= b);
    let conclusion = (a as u128) * (phi_vs.len() as u128) <= (b as u128) * (psi_vs.len() as u128);
    Ok(FmtpReport {
        n,
        phi_count: phi_vs.len(),
        psi_count: psi_vs.len(),
        premise1,
        premise2,
        conclusion,
        vacuous: !(premise1 && premise2),
        phi_to_psi: down.iter().sum(),
        psi_to_phi: up.iter().sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmtpReport {
    /// Fewest `Y`-neighbors of an `X`-vertex; `None` when `X` is empty.
    pub min_y_neighbors: Option<usize>,
    /// Most `X`-neighbors of a `Y`-vertex; `None` when `Y` is empty.
    pub max_x_neighbors: Option<usize>,
    pub premise1: bool,
    pub premise2: bool,
    /// `a * |X| <= b * |Y|`.
    pub conclusion: bool,
    pub vacuous: bool,
    /// Ordered adjacent pairs `(x, y)` with `x` in `X` and `y` in `Y`.
    pub edge_count: usize,
}

impl SmtpReport {
    pub fn counterexample(&self) -> bool {
        !self.vacuous && !self.conclusion
    }
}

/// Mass transport check for explicit vertex sets.
pub fn check_smtp(s: &Structure, x: &VertexSet, y: &VertexSet, a: usize, b: usize) -> Result<SmtpReport> {
    for v in x.iter().chain(y.iter()) {
        s.check_vertex(v)?;
    }
    let n = s.size();
    let mut in_x = vec![false; n];
    let mut in_y = vec![false; n];
    x.iter().for_each(|v| in_x[v] = true);
    y.iter().for_each(|v| in_y[v] = true);
    let down: Vec<usize> = x.iter().map(|v| count_in(s, v, &in_y)).collect();
    let up: Vec<usize> = y.iter().map(|v| count_in(s, v, &in_x)).collect();
    let min_y_neighbors = down.iter().copied().min();
    let max_x_neighbors = up.iter().copied().max();
    let premise1 = min_y_neighbors.is_none_or(|m| m >= a);
    let premise2 = max_x_neighbors.is_none_or(|m| m <= b);
    Ok(SmtpReport {
        min_y_neighbors,
        max_x_neighbors,
        premise1,
        premise2,
        conclusion: (a as u128) * (x.len() as u128) <= (b as u128) * (y.len() as u128),
        vacuous: !(premise1 && premise2),
        edge_count: down.iter().sum(),
    })
}

/// A rooted subtree cut off during decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtree {
    /// Undirected, root marked `R`.
    pub structure: Structure,
    /// Original id of each vertex.
    pub vertices: Vec<Vertex>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonNode {
    pub principal: Vertex,
    /// Share of the original tree held by this node: the principal vertex,
    /// its residual subtrees and any subtrees folded at the depth limit.
    pub mass: Fraction,
    pub residual_components: Vec<Subtree>,
    /// Large subtrees left unexpanded at the depth limit.
    pub folded: Vec<Subtree>,
    pub children: Vec<SkeletonNode>,
}

impl SkeletonNode {
    pub fn total_mass(&self) -> BigRational {
        self.children
            .iter()
            .fold(self.mass.to_rational(), |acc, c| acc + c.total_mass())
    }

    /// Every vertex accounted for in this subtree of the skeleton, with
    /// multiplicity.
    pub fn vertices(&self) -> Vec<Vertex> {
        let mut out = vec![self.principal];
        for t in self.residual_components.iter().chain(&self.folded) {
            out.extend(&t.vertices);
        }
        for c in &self.children {
            out.extend(c.vertices());
        }
        out
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(SkeletonNode::node_count).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        self.children.iter().map(|c| c.depth() + 1).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let num = self.mass.numer();
        let den = self.mass.denom();
        json!({
            "principal": self.principal,
            "mass": {"num": big_json(num), "den": big_json(den)},
            "residual_sizes": self.residual_components.iter().map(|t| t.vertices.len()).collect::<Vec<_>>(),
            "children": self.children.iter().map(SkeletonNode::to_json).collect::<Vec<_>>(),
        })
    }
}

fn big_json(x: &BigUint) -> Value {
    match u64::try_from(x) {
        Ok(v) => Value::from(v),
        Err(_) => Value::from(x.to_string()),
    }
}

/// Checks that `t` is a tree with a single root and returns its undirected
/// form. Accepts either encoding.
fn as_rooted_tree(t: &Structure) -> Result<Structure> {
    let tree = if t.signature().get("arc").is_some() {
        RootedForest::new(t.clone())?.to_undirected()
    } else {
        for (name, arity) in [("adj", 2), ("R", 1)] {
            if !matches!(t.signature().get(name), Some(sym) if sym.arity == arity) {
                return Err(Error::Forest(format!(
                    "expected a rooted tree with relations adj/2 and R/1, missing `{name}`"
                )));
            }
        }
        let roots = t.marked("R").iter().map(|v| vec![v]).collect();
        Structure::new(
            Signature::rooted_graph(),
            t.size(),
            [("adj", t.tuples("adj").unwrap().to_vec()), ("R", roots)],
        )?
    };
    let n = tree.size();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let roots = tree.marked("R").len();
    if roots != 1 {
        return Err(Error::Forest(format!("expected exactly one root, found {roots}")));
    }
    if !tree.is_connected() || tree.gaifman_edges().len() != n - 1 {
        return Err(Error::Forest("not a tree".into()));
    }
    if tree.tuples("adj").unwrap().iter().any(|t| t[0] == t[1]) {
        return Err(Error::Forest("not a tree: self-loop".into()));
    }
    Ok(tree)
}

/// Recursive skeleton of a rooted tree.
///
/// The root is detached with the tree-to-forest scheme. Every resulting
/// subtree with at least `eps * N` vertices (`N` the original size) becomes
/// a child node while the node depth is below `max_depth`, and is folded
/// into the node otherwise; smaller subtrees become residual components.
/// Masses have denominator `N` and sum to one.
pub fn skeleton_decompose(t: &Structure, eps: &BigRational, max_depth: usize) -> Result<SkeletonNode> {
    use num_traits::{One, Signed};
    if !eps.is_positive() || eps > &BigRational::one() {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {eps}")));
    }
    let tree = as_rooted_tree(t)?;
    let n = tree.size();
    let ids: Vec<Vertex> = (0..n).collect();
    decompose(&tree, &ids, eps, max_depth, 0, n)
}

fn decompose(
    tree: &Structure,
    ids: &[Vertex],
    eps: &BigRational,
    max_depth: usize,
    depth: usize,
    total: usize,
) -> Result<SkeletonNode> {
    let root = tree.marked("R").as_slice()[0];
    let forest = y_to_f(tree)?;
    let mut residual = Vec::new();
    let mut folded = Vec::new();
    let mut expand = Vec::new();
    for comp in forest.components() {
        if comp.contains(root) {
            continue;
        }
        let (local, map) = forest.induced(&comp);
        let sub = Structure::new(
            Signature::rooted_graph(),
            local.size(),
            [
                ("adj", local.tuples("adj").unwrap().to_vec()),
                ("R", local.tuples("R").unwrap().to_vec()),
            ],
        )?;
        let vertices: Vec<Vertex> = map.iter().map(|&v| ids[v]).collect();
        let heavy = num_bigint::BigInt::from(sub.size()) * eps.denom()
            >= eps.numer() * num_bigint::BigInt::from(total);
        let subtree = Subtree {
            structure: sub,
            vertices,
        };
        match (heavy, depth < max_depth) {
            (true, true) => expand.push(subtree),
            (true, false) => folded.push(subtree),
            (false, _) => residual.push(subtree),
        }
    }
    let mut children = expand
        .par_iter()
        .map(|st| decompose(&st.structure, &st.vertices, eps, max_depth, depth + 1, total))
        .collect::<Result<Vec<_>>>()?;
    children.sort_by(|a, b| b.mass.cmp(&a.mass).then(a.principal.cmp(&b.principal)));
    let held: usize = 1 + residual
        .iter()
        .chain(&folded)
        .map(|st: &Subtree| st.vertices.len())
        .sum::<usize>();
    Ok(SkeletonNode {
        principal: ids[root],
        mass: Fraction::new(held, total),
        residual_components: residual,
        folded,
        children,
    })
}
