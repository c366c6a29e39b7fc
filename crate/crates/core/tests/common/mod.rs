//! Seeded random corpora and a naive reference evaluator shared by the
//! property tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use fostat_core::generators::SplitMix64;
use fostat_core::interpret::BasicScheme;
use fostat_core::structure::{RelationSymbol, Signature, Structure, Vertex};
use fostat_core::syntax::{DistCmp, Formula, Var};
use num_bigint::BigUint;
use num_rational::BigRational;

pub struct Seeded(pub SplitMix64);

impl Seeded {
    pub fn new(seed: u64) -> Self {
        Seeded(SplitMix64::new(seed))
    }

    pub fn below(&mut self, bound: usize) -> usize {
        self.0.below(bound as u64) as usize
    }

    pub fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn chance(&mut self, num: usize, den: usize) -> bool {
        self.below(den) < num
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}

/// `{adj/2 symmetric, M/1}`.
pub fn colored_graph_signature() -> Signature {
    Signature::new([RelationSymbol::new("adj", 2, true), RelationSymbol::new("M", 1, false)]).unwrap()
}

/// Random graph over [`colored_graph_signature`] with edge density
/// `num/den` and about a third of the vertices marked.
pub fn random_graph(rng: &mut Seeded, n: usize, num: usize, den: usize) -> Structure {
    let mut adj = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.chance(num, den) {
                adj.push(vec![u, v]);
            }
        }
    }
    let marks = (0..n).filter(|_| rng.chance(1, 3)).map(|v| vec![v]).collect();
    Structure::new(colored_graph_signature(), n, [("adj", adj), ("M", marks)]).unwrap()
}

pub struct FormulaGen<'a> {
    pub relations: &'a [(&'a str, usize)],
    pub free: Var,
    pub max_rank: u32,
    pub dist: bool,
    pub counting: bool,
    next: Var,
}

impl<'a> FormulaGen<'a> {
    pub fn new(relations: &'a [(&'a str, usize)], free: Var, max_rank: u32) -> Self {
        FormulaGen {
            relations,
            free,
            max_rank,
            dist: true,
            counting: true,
            next: 100,
        }
    }

    pub fn gen(&mut self, rng: &mut Seeded) -> Formula {
        let scope: Vec<Var> = (1..=self.free).collect();
        self.go(rng, &scope, self.max_rank, 4)
    }

    fn atom(&mut self, rng: &mut Seeded, scope: &[Var]) -> Formula {
        let kinds = if self.dist { 4 } else { 3 };
        match rng.below(kinds + 1) {
            0 | 1 => {
                let (name, arity) = *rng.pick(self.relations);
                let args: Vec<Var> = (0..arity).map(|_| *rng.pick(scope)).collect();
                Formula::rel(name, args)
            }
            2 => Formula::Eq(*rng.pick(scope), *rng.pick(scope)),
            3 if !self.dist => Formula::True,
            3 => {
                let cmp = *rng.pick(&[DistCmp::Le, DistCmp::Gt, DistCmp::Eq]);
                Formula::dist(*rng.pick(scope), *rng.pick(scope), cmp, rng.below(4) as u32)
            }
            _ => {
                if rng.chance(1, 2) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
        }
    }

    fn go(&mut self, rng: &mut Seeded, scope: &[Var], rank: u32, size: u32) -> Formula {
        if size == 0 || rng.chance(1, 4) {
            return self.atom(rng, scope);
        }
        match rng.below(if rank > 0 { 7 } else { 4 }) {
            0 => self.go(rng, scope, rank, size - 1).not(),
            1 => {
                let a = self.go(rng, scope, rank, size - 1);
                a.and(self.go(rng, scope, rank, size - 1))
            }
            2 => {
                let a = self.go(rng, scope, rank, size - 1);
                a.or(self.go(rng, scope, rank, size - 1))
            }
            3 => {
                let a = self.go(rng, scope, rank, size - 1);
                a.implies(self.go(rng, scope, rank, size - 1))
            }
            q => {
                let v = self.next;
                self.next += 1;
                let mut inner = scope.to_vec();
                inner.push(v);
                let body = self.go(rng, &inner, rank - 1, size - 1);
                match (q, self.counting) {
                    (4, _) => Formula::exists(v, body),
                    (5, _) => Formula::forall(v, body),
                    (_, true) if rng.chance(1, 2) => Formula::count_ge(rng.below(4) as u32, v, body),
                    (_, true) => Formula::count_le(rng.below(3) as u32, v, body),
                    _ => Formula::exists(v, body),
                }
            }
        }
    }
}

/// All-pairs distances by BFS, `None` for unreachable.
pub fn naive_distances(s: &Structure) -> Vec<Vec<Option<usize>>> {
    let n = s.size();
    let mut nbrs = vec![Vec::new(); n];
    for sym in s.signature().symbols() {
        for t in s.tuples(&sym.name).unwrap() {
            for &a in t {
                for &b in t {
                    if a != b {
                        nbrs[a].push(b);
                    }
                }
            }
        }
    }
    (0..n)
        .map(|src| {
            let mut d = vec![None; n];
            d[src] = Some(0);
            let mut q = VecDeque::from([src]);
            while let Some(u) = q.pop_front() {
                for &w in &nbrs[u] {
                    if d[w].is_none() {
                        d[w] = Some(d[u].unwrap() + 1);
                        q.push_back(w);
                    }
                }
            }
            d
        })
        .collect()
}

/// Direct recursive Tarski semantics with no caching or shortcuts.
pub fn naive_sat(
    s: &Structure,
    dist: &[Vec<Option<usize>>],
    f: &Formula,
    asg: &mut BTreeMap<Var, Vertex>,
) -> bool {
    let n = s.size();
    let quant = |v: Var, body: &Formula, asg: &mut BTreeMap<Var, Vertex>| -> usize {
        let saved = asg.get(&v).copied();
        let mut count = 0;
        for w in 0..n {
            asg.insert(v, w);
            if naive_sat(s, dist, body, asg) {
                count += 1;
            }
        }
        match saved {
            Some(x) => asg.insert(v, x),
            None => asg.remove(&v),
        };
        count
    };
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Rel(name, args) => {
            let t: Vec<Vertex> = args.iter().map(|a| asg[a]).collect();
            s.tuples(name).unwrap().contains(&t)
        }
        Formula::Eq(a, b) => asg[a] == asg[b],
        Formula::Dist { left, right, cmp, bound } => {
            let d = dist[asg[left]][asg[right]];
            match (cmp, d) {
                (_, None) => matches!(cmp, DistCmp::Gt),
                (DistCmp::Le, Some(d)) => d <= *bound as usize,
                (DistCmp::Gt, Some(d)) => d > *bound as usize,
                (DistCmp::Eq, Some(d)) => d == *bound as usize,
            }
        }
        Formula::Not(g) => !naive_sat(s, dist, g, asg),
        Formula::And(a, b) => naive_sat(s, dist, a, asg) & naive_sat(s, dist, b, asg),
        Formula::Or(a, b) => naive_sat(s, dist, a, asg) | naive_sat(s, dist, b, asg),
        Formula::Implies(a, b) => !naive_sat(s, dist, a, asg) | naive_sat(s, dist, b, asg),
        Formula::Exists(v, g) => quant(*v, g, asg) >= 1,
        Formula::Forall(v, g) => quant(*v, g, asg) == n,
        Formula::CountGe(a, v, g) => quant(*v, g, asg) >= *a as usize,
        Formula::CountLe(b, v, g) => quant(*v, g, asg) <= *b as usize,
    }
}

/// Stone pairing by enumerating every assignment of the free variables.
pub fn naive_pairing(s: &Structure, f: &Formula) -> BigRational {
    let dist = naive_distances(s);
    let free: Vec<Var> = f.free_vars().into_iter().collect();
    let n = s.size();
    let total = n.pow(free.len() as u32);
    let mut hits = 0u64;
    for code in 0..total {
        let mut c = code;
        let mut asg = BTreeMap::new();
        for &v in free.iter().rev() {
            asg.insert(v, c % n);
            c /= n;
        }
        if naive_sat(s, &dist, f, &mut asg) {
            hits += 1;
        }
    }
    BigRational::new(BigUint::from(hits).into(), BigUint::from(total).into())
}

/// Random basic scheme from `{adj, M}` graphs to `{E/2, U/1}` structures.
pub fn random_scheme(rng: &mut Seeded, k: usize) -> BasicScheme {
    let source = colored_graph_signature();
    let target = Signature::new([RelationSymbol::new("E", 2, false), RelationSymbol::new("U", 1, false)])
        .unwrap();
    let rels = [("adj", 2), ("M", 1)];
    let mut defs = BTreeMap::new();
    for (name, arity) in [("E", 2usize), ("U", 1usize)] {
        let mut g = FormulaGen::new(&rels, (k * arity) as Var, 1);
        defs.insert(name.to_string(), g.gen(rng));
    }
    BasicScheme::new(source, target, k, defs).unwrap()
}

/// Random formula over the target of [`random_scheme`].
pub fn random_target_formula(rng: &mut Seeded, k: usize) -> Formula {
    let rels = [("E", 2), ("U", 1)];
    let mut g = FormulaGen::new(&rels, 2, if k == 1 { 2 } else { 1 });
    g.dist = false;
    g.counting = k == 1;
    g.gen(rng)
}

/// Random rooted tree over `{adj, R}` with a random root.
pub fn random_rooted_tree(rng: &mut Seeded, n: usize) -> Structure {
    let seed = rng.0.next_u64();
    let t = fostat_core::generators::random_tree(n, seed);
    fostat_core::generators::with_root(&t, rng.below(n)).unwrap()
}
