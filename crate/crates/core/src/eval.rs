//! Exact satisfaction, solution counting and Stone pairings.
//!
//! The Stone pairing of a formula `f` with `p` free variables on a structure
//! with `n` vertices is `|solutions of pack(f)| / n^p`, the probability that
//! a uniformly random assignment satisfies `f`. Values are exact.
//!
//! Two fast paths are available and must agree bit for bit with plain
//! enumeration:
//! * a top-level conjunction whose conjuncts split into groups with disjoint
//!   free variables is counted group by group and multiplied;
//! * a formula with a finite syntactic locality radius `r` is checked per
//!   tuple on the substructure induced by the `r`-ball around the tuple.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::structure::{Structure, Vertex};
use crate::syntax::{pack, tight_radius, DistCmp, Formula, Var};

/// Default cap on `n^(|Fv| + qrank)`.
pub const DEFAULT_MAX_WORK: u128 = 1_000_000_000;

/// Stone pairing value: `numer = |solutions|`, `denom = n^|Fv|`.
pub type Pairing = Fraction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locality {
    Off,
    /// Used for quantified formulas on structures with at least 64 vertices.
    Auto,
    Always,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// `None` disables the guardrail.
    pub max_work: Option<u128>,
    pub product_split: bool,
    pub locality: Locality,
    /// Memo entries kept per worker before the table is cleared.
    pub memo_cap: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_work: Some(DEFAULT_MAX_WORK),
            product_split: true,
            locality: Locality::Auto,
            memo_cap: 1 << 20,
        }
    }
}

impl EvalOptions {
    /// Plain enumeration without fast paths.
    pub fn brute_force() -> Self {
        EvalOptions {
            product_split: false,
            locality: Locality::Off,
            ..EvalOptions::default()
        }
    }
}

/// Partial map from variables to vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<Var, Vertex>);

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    /// `x1 -> tuple[0], x2 -> tuple[1], ...`
    pub fn from_tuple(tuple: &[Vertex]) -> Self {
        Assignment((1..).zip(tuple.iter().copied()).collect())
    }

    pub fn with(mut self, var: Var, v: Vertex) -> Self {
        self.0.insert(var, v);
        self
    }

    pub fn get(&self, var: Var) -> Option<Vertex> {
        self.0.get(&var).copied()
    }
}

const INF: u32 = u32::MAX;

/// Lazily filled all-pairs BFS rows; safe to share between workers.
pub struct DistanceCache<'s> {
    structure: &'s Structure,
    rows: Vec<OnceLock<Vec<u32>>>,
}

impl<'s> DistanceCache<'s> {
    pub fn new(structure: &'s Structure) -> Self {
        DistanceCache {
            structure,
            rows: (0..structure.size()).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn get(&self, u: Vertex, v: Vertex) -> Option<usize> {
        let row = self.rows[u].get_or_init(|| {
            self.structure
                .bfs(&[u], None)
                .into_iter()
                .map(|d| d.map_or(INF, |d| d as u32))
                .collect()
        });
        match row[v] {
            INF => None,
            d => Some(d as usize),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum QuantKind {
    Exists,
    Forall,
    AtLeast(u32),
    AtMost(u32),
}

#[derive(Debug, Clone)]
enum Node {
    True,
    False,
    Rel(usize, Vec<Var>),
    Eq(Var, Var),
    Dist(Var, Var, DistCmp, u32),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Quant {
        kind: QuantKind,
        var: Var,
        body: usize,
        /// Free variables of the quantified node, for memo keys.
        free: Vec<Var>,
    },
}

/// A formula with relation names resolved against one signature.
struct Program {
    nodes: Vec<Node>,
    root: usize,
    width: usize,
}

impl Program {
    fn compile(f: &Formula, s: &Structure) -> Result<Program> {
        f.check_signature(s.signature())?;
        let mut nodes = Vec::with_capacity(f.size());
        let root = Self::push(f, s, &mut nodes);
        Ok(Program {
            nodes,
            root,
            width: f.max_var() as usize + 1,
        })
    }

    fn push(f: &Formula, s: &Structure, nodes: &mut Vec<Node>) -> usize {
        let node = match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Rel(name, args) => {
                Node::Rel(s.signature().index_of(name).unwrap(), args.clone())
            }
            Formula::Eq(a, b) => Node::Eq(*a, *b),
            Formula::Dist {
                left,
                right,
                cmp,
                bound,
            } => Node::Dist(*left, *right, *cmp, *bound),
            Formula::Not(g) => Node::Not(Self::push(g, s, nodes)),
            Formula::And(a, b) => Node::And(Self::push(a, s, nodes), Self::push(b, s, nodes)),
            Formula::Or(a, b) => Node::Or(Self::push(a, s, nodes), Self::push(b, s, nodes)),
            Formula::Implies(a, b) => {
                Node::Implies(Self::push(a, s, nodes), Self::push(b, s, nodes))
            }
            Formula::Exists(v, g)
            | Formula::Forall(v, g)
            | Formula::CountGe(_, v, g)
            | Formula::CountLe(_, v, g) => {
                let kind = match f {
                    Formula::Exists(..) => QuantKind::Exists,
                    Formula::Forall(..) => QuantKind::Forall,
                    Formula::CountGe(a, ..) => QuantKind::AtLeast(*a),
                    Formula::CountLe(b, ..) => QuantKind::AtMost(*b),
                    _ => unreachable!(),
                };
                Node::Quant {
                    kind,
                    var: *v,
                    body: Self::push(g, s, nodes),
                    free: f.free_vars().into_iter().collect(),
                }
            }
        };
        nodes.push(node);
        nodes.len() - 1
    }
}

const UNSET: usize = usize::MAX;

/// Single-worker evaluation state.
struct Machine<'a> {
    structure: &'a Structure,
    program: &'a Program,
    distances: &'a DistanceCache<'a>,
    memo: HashMap<(usize, u128), bool>,
    memo_cap: usize,
    tuple: Vec<Vertex>,
}

impl<'a> Machine<'a> {
    fn new(
        structure: &'a Structure,
        program: &'a Program,
        distances: &'a DistanceCache<'a>,
        memo_cap: usize,
    ) -> Self {
        Machine {
            structure,
            program,
            distances,
            memo: HashMap::new(),
            memo_cap,
            tuple: Vec::new(),
        }
    }

    fn memo_key(&self, id: usize, free: &[Var], asg: &[Vertex]) -> Option<(usize, u128)> {
        let n = self.structure.size() as u128;
        let mut code: u128 = 0;
        for &v in free {
            code = code.checked_mul(n)?.checked_add(asg[v as usize] as u128)?;
        }
        Some((id, code))
    }

    fn sat(&mut self, id: usize, asg: &mut [Vertex]) -> bool {
        let program = self.program;
        match &program.nodes[id] {
            Node::True => true,
            Node::False => false,
            Node::Rel(rel, args) => {
                self.tuple.clear();
                self.tuple.extend(args.iter().map(|&v| asg[v as usize]));
                self.structure.holds_at(*rel, &self.tuple)
            }
            Node::Eq(a, b) => asg[*a as usize] == asg[*b as usize],
            Node::Dist(a, b, cmp, bound) => {
                let (u, v) = (asg[*a as usize], asg[*b as usize]);
                let d = if u == v {
                    Some(0)
                } else {
                    self.distances.get(u, v)
                };
                cmp.test(d, *bound)
            }
            Node::Not(g) => !self.sat(*g, asg),
            Node::And(a, b) => self.sat(*a, asg) && self.sat(*b, asg),
            Node::Or(a, b) => self.sat(*a, asg) || self.sat(*b, asg),
            Node::Implies(a, b) => !self.sat(*a, asg) || self.sat(*b, asg),
            Node::Quant {
                kind,
                var,
                body,
                free,
            } => {
                let key = self.memo_key(id, free, asg);
                if let Some(hit) = key.and_then(|k| self.memo.get(&k)) {
                    return *hit;
                }
                let value = self.quantify(*kind, *var as usize, *body, asg);
                if let Some(k) = key {
                    if self.memo.len() >= self.memo_cap {
                        self.memo.clear();
                    }
                    self.memo.insert(k, value);
                }
                value
            }
        }
    }

    fn quantify(&mut self, kind: QuantKind, var: usize, body: usize, asg: &mut [Vertex]) -> bool {
        let saved = asg[var];
        let n = self.structure.size();
        let result = match kind {
            QuantKind::Exists => (0..n).any(|w| {
                asg[var] = w;
                self.sat(body, asg)
            }),
            QuantKind::Forall => (0..n).all(|w| {
                asg[var] = w;
                self.sat(body, asg)
            }),
            QuantKind::AtLeast(a) => {
                let mut count = 0u32;
                if a == 0 {
                    true
                } else {
                    (0..n).any(|w| {
                        asg[var] = w;
                        if self.sat(body, asg) {
                            count += 1;
                        }
                        count >= a
                    })
                }
            }
            QuantKind::AtMost(b) => {
                let mut count = 0u32;
                !(0..n).any(|w| {
                    asg[var] = w;
                    if self.sat(body, asg) {
                        count += 1;
                    }
                    count > b
                })
            }
        };
        asg[var] = saved;
        result
    }
}

/// Evaluation context for one structure. Distance rows are shared across
/// all formulas evaluated through the same evaluator.
pub struct Evaluator<'s> {
    structure: &'s Structure,
    distances: DistanceCache<'s>,
    options: EvalOptions,
}

impl<'s> Evaluator<'s> {
    pub fn new(structure: &'s Structure) -> Self {
        Self::with_options(structure, EvalOptions::default())
    }

    pub fn with_options(structure: &'s Structure, options: EvalOptions) -> Self {
        Evaluator {
            structure,
            distances: DistanceCache::new(structure),
            options,
        }
    }

    pub fn structure(&self) -> &'s Structure {
        self.structure
    }

    pub fn options(&self) -> &EvalOptions {
        &self.options
    }

    /// Tarskian satisfaction under `assignment`, which must cover `Fv(f)`.
    pub fn satisfies(&self, f: &Formula, assignment: &Assignment) -> Result<bool> {
        let program = Program::compile(f, self.structure)?;
        let mut asg = vec![UNSET; program.width];
        for v in f.free_vars() {
            let w = assignment.get(v).ok_or(Error::UnassignedVariable(v))?;
            self.structure.check_vertex(w)?;
            asg[v as usize] = w;
        }
        let mut m = Machine::new(self.structure, &program, &self.distances, self.options.memo_cap);
        Ok(m.sat(program.root, &mut asg))
    }

    /// `|solutions of pack(f)|`; sentences count 1 or 0.
    pub fn solution_count(&self, f: &Formula) -> Result<BigUint> {
        let packed = pack(f);
        packed.check_signature(self.structure.signature())?;
        self.check_work(&packed)?;
        if self.options.product_split {
            let groups = independent_groups(&packed);
            if groups.len() > 1 {
                let mut total = BigUint::one();
                for g in groups {
                    let c = self.count_packed(&pack(&g))?;
                    if c.is_zero() {
                        return Ok(c);
                    }
                    total *= c;
                }
                return Ok(total);
            }
        }
        self.count_packed(&packed)
    }

    pub fn stone_pairing(&self, f: &Formula) -> Result<Pairing> {
        let n = self.structure.size();
        if n == 0 {
            return Err(Error::EmptyDomain);
        }
        let p = f.free_vars().len();
        let count = self.solution_count(f)?;
        Ok(Fraction::new(count, BigUint::from(n).pow(p as u32)))
    }

    pub fn pairing_vector(&self, catalog: &[Formula]) -> Result<Vec<(Formula, Pairing)>> {
        catalog
            .iter()
            .map(|f| Ok((f.clone(), self.stone_pairing(f)?)))
            .collect()
    }

    /// All tuples `(v1..vp)` in lexicographic order such that `f` holds with
    /// `xi := vi`. `Fv(f)` must lie within `x1..xp`.
    pub fn satisfying_tuples(&self, f: &Formula, p: usize) -> Result<Vec<Vec<Vertex>>> {
        if let Some(&v) = f.free_vars().iter().find(|&&v| v == 0 || v as usize > p) {
            return Err(Error::UnassignedVariable(v));
        }
        self.check_work_exp(p as u32 + f.qrank())?;
        let program = Program::compile(f, self.structure)?;
        let n = self.structure.size();
        let width = program.width.max(p + 1);
        let rows = |first: Option<Vertex>| -> Vec<Vec<Vertex>> {
            let mut m = Machine::new(self.structure, &program, &self.distances, self.options.memo_cap);
            let mut asg = vec![UNSET; width];
            let mut out = Vec::new();
            let mut tuple = vec![0; p];
            let fixed = match first {
                Some(v) => {
                    tuple[0] = v;
                    1
                }
                None => 0,
            };
            loop {
                for (i, &v) in tuple.iter().enumerate() {
                    asg[i + 1] = v;
                }
                if m.sat(program.root, &mut asg) {
                    out.push(tuple.clone());
                }
                let mut i = p;
                loop {
                    if i == fixed {
                        return out;
                    }
                    i -= 1;
                    tuple[i] += 1;
                    if tuple[i] < n {
                        break;
                    }
                    tuple[i] = 0;
                }
            }
        };
        if p == 0 {
            return Ok(rows(None));
        }
        if n == 0 {
            return Ok(Vec::new());
        }
        let parts: Vec<Vec<Vec<Vertex>>> = (0..n).into_par_iter().map(|v| rows(Some(v))).collect();
        Ok(parts.into_iter().flatten().collect())
    }

    fn check_work(&self, f: &Formula) -> Result<()> {
        self.check_work_exp(f.free_vars().len() as u32 + f.qrank())
    }

    fn check_work_exp(&self, exp: u32) -> Result<()> {
        let Some(limit) = self.options.max_work else {
            return Ok(());
        };
        let estimate = BigUint::from(self.structure.size()).pow(exp);
        if estimate > BigUint::from(limit) {
            return Err(Error::WorkLimit {
                estimate: estimate.to_string(),
                limit,
            });
        }
        Ok(())
    }

    fn use_locality(&self, f: &Formula) -> Option<u32> {
        let radius = tight_radius(f)?;
        match self.options.locality {
            Locality::Off => None,
            Locality::Always => Some(radius),
            Locality::Auto => (f.qrank() > 0 && self.structure.size() >= 64).then_some(radius),
        }
    }

    /// Counts satisfying tuples of a packed formula by enumeration.
    fn count_packed(&self, f: &Formula) -> Result<BigUint> {
        let program = Program::compile(f, self.structure)?;
        let p = f.free_vars().len();
        let n = self.structure.size();
        if p == 0 {
            let mut m = Machine::new(self.structure, &program, &self.distances, self.options.memo_cap);
            let mut asg = vec![UNSET; program.width];
            return Ok(BigUint::from(m.sat(program.root, &mut asg) as u32));
        }
        if n == 0 {
            return Ok(BigUint::zero());
        }
        let radius = self.use_locality(f);
        let first_values: Vec<Vertex> = (0..n).collect();
        let partial = |first: Vertex| -> u128 {
            let mut m = Machine::new(self.structure, &program, &self.distances, self.options.memo_cap);
            let mut asg = vec![UNSET; program.width];
            let mut tuple = vec![0; p];
            tuple[0] = first;
            let mut count: u128 = 0;
            loop {
                for (i, &v) in tuple.iter().enumerate() {
                    asg[i + 1] = v;
                }
                let ok = match radius {
                    Some(r) => self.sat_local(f, &tuple, r),
                    None => m.sat(program.root, &mut asg),
                };
                count += ok as u128;
                // Odometer over positions 1..p; position 0 is fixed.
                let mut i = p;
                loop {
                    if i == 1 {
                        return count;
                    }
                    i -= 1;
                    tuple[i] += 1;
                    if tuple[i] < n {
                        break;
                    }
                    tuple[i] = 0;
                }
            }
        };
        let total: u128 = if p == 1 {
            // One tuple per task is too fine-grained to parallelize.
            first_values.iter().map(|&v| partial(v)).sum()
        } else {
            first_values.par_iter().map(|&v| partial(v)).sum()
        };
        Ok(BigUint::from(total))
    }

    /// Satisfaction on the substructure induced by the `radius`-ball.
    fn sat_local(&self, f: &Formula, tuple: &[Vertex], radius: u32) -> bool {
        let ball = self.structure.ball(tuple, radius as usize).expect("tuple in range");
        let (local, map) = self.structure.induced(&ball);
        let local_tuple: Vec<Vertex> = tuple
            .iter()
            .map(|v| map.binary_search(v).expect("center in ball"))
            .collect();
        let program = Program::compile(f, &local).expect("signature already checked");
        let distances = DistanceCache::new(&local);
        let mut m = Machine::new(&local, &program, &distances, self.options.memo_cap);
        let mut asg = vec![UNSET; program.width];
        for (i, &v) in local_tuple.iter().enumerate() {
            asg[i + 1] = v;
        }
        m.sat(program.root, &mut asg)
    }
}

/// Splits a top-level conjunction into groups of conjuncts that are
/// connected through shared free variables. Sentences form their own groups.
fn independent_groups(f: &Formula) -> Vec<Formula> {
    fn flatten<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
        match f {
            Formula::And(a, b) => {
                flatten(a, out);
                flatten(b, out);
            }
            other => out.push(other),
        }
    }
    let mut conjuncts = Vec::new();
    flatten(f, &mut conjuncts);
    if conjuncts.len() < 2 {
        return vec![f.clone()];
    }
    let vars: Vec<BTreeSet<Var>> = conjuncts.iter().map(|c| c.free_vars()).collect();
    let mut group: Vec<usize> = (0..conjuncts.len()).collect();
    fn find(group: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while group[r] != r {
            r = group[r];
        }
        group[i] = r;
        r
    }
    for i in 0..conjuncts.len() {
        for j in i + 1..conjuncts.len() {
            if !vars[i].is_disjoint(&vars[j]) {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let mut buckets: BTreeMap<usize, Vec<Formula>> = BTreeMap::new();
    for (i, c) in conjuncts.iter().enumerate() {
        let root = find(&mut group, i);
        buckets.entry(root).or_default().push((*c).clone());
    }
    buckets.into_values().map(Formula::and_all).collect()
}

pub fn satisfies(s: &Structure, f: &Formula, assignment: &Assignment) -> Result<bool> {
    Evaluator::new(s).satisfies(f, assignment)
}

pub fn solution_count(s: &Structure, f: &Formula) -> Result<BigUint> {
    Evaluator::new(s).solution_count(f)
}

pub fn stone_pairing(s: &Structure, f: &Formula) -> Result<Pairing> {
    Evaluator::new(s).stone_pairing(f)
}

pub fn pairing_vector(s: &Structure, catalog: &[Formula]) -> Result<Vec<(Formula, Pairing)>> {
    Evaluator::new(s).pairing_vector(catalog)
}
