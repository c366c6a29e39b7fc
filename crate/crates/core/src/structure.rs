//! Finite relational structures and their Gaifman geometry.
//!
//! A [`Structure`] has domain `0..n` and one tuple set per relation of its
//! [`Signature`]. Unary relations double as vertex marks. Distances, balls
//! and components are taken in the Gaifman graph, where two distinct
//! vertices are adjacent when some tuple contains both.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Vertex ids are positions in `0..n`.
pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSymbol {
    pub name: String,
    pub arity: usize,
    /// Tuple sets are closed under transposition at load time. Arity 2 only.
    pub symmetric: bool,
}

impl RelationSymbol {
    pub fn new(name: impl Into<String>, arity: usize, symmetric: bool) -> Self {
        RelationSymbol {
            name: name.into(),
            arity,
            symmetric,
        }
    }
}

/// Relation symbols kept sorted by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    symbols: Vec<RelationSymbol>,
}

impl Signature {
    pub fn new(symbols: impl IntoIterator<Item = RelationSymbol>) -> Result<Self> {
        let mut symbols: Vec<RelationSymbol> = symbols.into_iter().collect();
        symbols.sort_by(|a, b| a.name.cmp(&b.name));
        for w in symbols.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::Signature(format!("duplicate relation `{}`", w[0].name)));
            }
        }
        for s in &symbols {
            if !is_identifier(&s.name) {
                return Err(Error::Signature(format!("`{}` is not a valid relation name", s.name)));
            }
            if s.arity == 0 {
                return Err(Error::Signature(format!("relation `{}` has arity 0", s.name)));
            }
            if s.symmetric && s.arity != 2 {
                return Err(Error::Signature(format!(
                    "relation `{}` is flagged symmetric but has arity {}",
                    s.name, s.arity
                )));
            }
        }
        Ok(Signature { symbols })
    }

    /// `{adj/2 symmetric}`: undirected graphs.
    pub fn graph() -> Self {
        Signature::new([RelationSymbol::new("adj", 2, true)]).unwrap()
    }

    /// `{adj/2 symmetric, R/1}`: graphs with a root mark.
    pub fn rooted_graph() -> Self {
        Signature::new([RelationSymbol::new("adj", 2, true), RelationSymbol::new("R", 1, false)])
            .unwrap()
    }

    /// `{adj/2 symmetric, R/1, P/1}`: forests with a principal component.
    pub fn principal_forest() -> Self {
        Signature::new([
            RelationSymbol::new("adj", 2, true),
            RelationSymbol::new("R", 1, false),
            RelationSymbol::new("P", 1, false),
        ])
        .unwrap()
    }

    pub fn symbols(&self) -> &[RelationSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.binary_search_by(|s| s.name.as_str().cmp(name)).ok()
    }

    pub fn get(&self, name: &str) -> Option<&RelationSymbol> {
        self.index_of(name).map(|i| &self.symbols[i])
    }

    /// A copy with `symbol` added.
    pub fn with(&self, symbol: RelationSymbol) -> Result<Self> {
        Signature::new(self.symbols.iter().cloned().chain(std::iter::once(symbol)))
    }

    /// A relation name not yet used, derived from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        if self.index_of(base).is_none() {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|n| self.index_of(n).is_none())
            .unwrap()
    }

    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for s in &self.symbols {
            let mut entry = Map::new();
            entry.insert("arity".into(), Value::from(s.arity));
            entry.insert("symmetric".into(), Value::from(s.symmetric));
            map.insert(s.name.clone(), Value::Object(entry));
        }
        Value::Object(map)
    }

    pub fn from_json(value: &Value, path: &str) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Load(format!("{path}: expected an object")))?;
        let mut symbols = Vec::new();
        for (name, spec) in obj {
            let at = format!("{path}.{name}");
            let spec = spec
                .as_object()
                .ok_or_else(|| Error::Load(format!("{at}: expected an object")))?;
            let arity = spec
                .get("arity")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Load(format!("{at}.arity: expected a non-negative integer")))?;
            let symmetric = match spec.get("symmetric") {
                None => false,
                Some(v) => v
                    .as_bool()
                    .ok_or_else(|| Error::Load(format!("{at}.symmetric: expected a boolean")))?,
            };
            symbols.push(RelationSymbol::new(name.clone(), arity as usize, symmetric));
        }
        Signature::new(symbols).map_err(|e| Error::Load(format!("{path}: {e}")))
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Sorted, duplicate-free set of vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        VertexSet((0..n).collect())
    }

    pub fn from_sorted_unchecked(v: Vec<Vertex>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<Vertex> {
        self.0
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        self.iter().chain(other.iter()).collect()
    }

    /// Complement within `0..n`.
    pub fn complement(&self, n: usize) -> VertexSet {
        VertexSet((0..n).filter(|&v| !self.contains(v)).collect())
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<I: IntoIterator<Item = Vertex>>(iter: I) -> Self {
        let mut v: Vec<Vertex> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

const DENSE_LIMIT: usize = 4096;

#[derive(Debug, Clone)]
enum Lookup {
    Unary(Vec<bool>),
    Dense { n: usize, bits: Vec<u64> },
    Hashed(HashSet<Vec<Vertex>>),
}

#[derive(Debug, Clone)]
struct Relation {
    /// Sorted lexicographically, no duplicates.
    tuples: Vec<Vec<Vertex>>,
    lookup: Lookup,
}

impl Relation {
    fn build(arity: usize, n: usize, mut tuples: Vec<Vec<Vertex>>) -> Self {
        tuples.sort_unstable();
        tuples.dedup();
        let lookup = if arity == 1 {
            let mut marks = vec![false; n];
            for t in &tuples {
                marks[t[0]] = true;
            }
            Lookup::Unary(marks)
        } else if arity == 2 && n <= DENSE_LIMIT {
            let mut bits = vec![0u64; (n * n).div_ceil(64)];
            for t in &tuples {
                let i = t[0] * n + t[1];
                bits[i / 64] |= 1 << (i % 64);
            }
            Lookup::Dense { n, bits }
        } else {
            Lookup::Hashed(tuples.iter().cloned().collect())
        };
        Relation { tuples, lookup }
    }

    fn contains(&self, tuple: &[Vertex]) -> bool {
        match &self.lookup {
            Lookup::Unary(marks) => marks[tuple[0]],
            Lookup::Dense { n, bits } => {
                let i = tuple[0] * n + tuple[1];
                bits[i / 64] >> (i % 64) & 1 == 1
            }
            Lookup::Hashed(set) => set.contains(tuple),
        }
    }
}

/// A finite relational structure on `0..n`. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Structure {
    signature: Signature,
    size: usize,
    relations: Vec<Relation>,
    adjacency: OnceLock<Vec<Vec<Vertex>>>,
}

impl Structure {
    /// Builds a structure, validating tuples and closing symmetric relations.
    /// Relations absent from `tuples` are empty.
    pub fn new<I, S>(signature: Signature, size: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<Vec<Vertex>>)>,
        S: AsRef<str>,
    {
        let mut per_rel: Vec<Vec<Vec<Vertex>>> = vec![Vec::new(); signature.len()];
        for (name, list) in tuples {
            let name = name.as_ref();
            let idx = signature
                .index_of(name)
                .ok_or_else(|| Error::UnknownRelation(name.to_string()))?;
            let sym = &signature.symbols()[idx];
            for t in list {
                if t.len() != sym.arity {
                    return Err(Error::ArityMismatch {
                        relation: sym.name.clone(),
                        expected: sym.arity,
                        found: t.len(),
                    });
                }
                if let Some(&v) = t.iter().find(|&&v| v >= size) {
                    return Err(Error::VertexOutOfRange { vertex: v, size });
                }
                if sym.symmetric {
                    per_rel[idx].push(vec![t[1], t[0]]);
                }
                per_rel[idx].push(t);
            }
        }
        Ok(Self::from_parts(signature, size, per_rel))
    }

    /// Like [`Structure::new`] but symmetric relations must already be
    /// closed under transposition.
    pub fn new_checked<I, S>(signature: Signature, size: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<Vec<Vertex>>)>,
        S: AsRef<str>,
    {
        let mut given: BTreeMap<String, Vec<Vec<Vertex>>> = BTreeMap::new();
        for (name, list) in tuples {
            given.entry(name.as_ref().to_string()).or_default().extend(list);
        }
        let s = Structure::new(signature, size, given.clone())?;
        for (name, mut list) in given {
            let idx = s.signature.index_of(&name).unwrap();
            list.sort_unstable();
            list.dedup();
            if s.signature.symbols()[idx].symmetric && list.len() != s.relations[idx].tuples.len() {
                return Err(Error::SignatureMismatch(format!(
                    "relation `{name}` is flagged symmetric but its tuples are not closed under transposition"
                )));
            }
        }
        Ok(s)
    }

    fn from_parts(signature: Signature, size: usize, per_rel: Vec<Vec<Vec<Vertex>>>) -> Self {
        let relations = signature
            .symbols()
            .iter()
            .zip(per_rel)
            .map(|(sym, t)| Relation::build(sym.arity, size, t))
            .collect();
        Structure {
            signature,
            size,
            relations,
            adjacency: OnceLock::new(),
        }
    }

    /// Structure with no tuples.
    pub fn empty(signature: Signature, size: usize) -> Self {
        let k = signature.len();
        Self::from_parts(signature, size, vec![Vec::new(); k])
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    /// Domain size `n`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn tuples(&self, name: &str) -> Option<&[Vec<Vertex>]> {
        self.signature
            .index_of(name)
            .map(|i| self.relations[i].tuples.as_slice())
    }

    pub fn tuples_at(&self, relation: usize) -> &[Vec<Vertex>] {
        &self.relations[relation].tuples
    }

    /// Membership test by relation index. The tuple must have the right arity
    /// and in-range entries.
    pub fn holds_at(&self, relation: usize, tuple: &[Vertex]) -> bool {
        self.relations[relation].contains(tuple)
    }

    pub fn holds(&self, name: &str, tuple: &[Vertex]) -> bool {
        match self.signature.index_of(name) {
            Some(i) => {
                tuple.len() == self.signature.symbols()[i].arity
                    && tuple.iter().all(|&v| v < self.size)
                    && self.relations[i].contains(tuple)
            }
            None => false,
        }
    }

    /// Vertices carrying the unary mark `name`.
    pub fn marked(&self, name: &str) -> VertexSet {
        self.tuples(name)
            .map(|ts| ts.iter().filter(|t| t.len() == 1).map(|t| t[0]).collect())
            .unwrap_or_default()
    }

    /// A copy of this structure with an extra relation.
    pub fn with_relation(
        &self,
        symbol: RelationSymbol,
        tuples: Vec<Vec<Vertex>>,
    ) -> Result<Structure> {
        let signature = self.signature.with(symbol.clone())?;
        let mut all: Vec<(String, Vec<Vec<Vertex>>)> = self
            .signature
            .symbols()
            .iter()
            .zip(&self.relations)
            .map(|(s, r)| (s.name.clone(), r.tuples.clone()))
            .collect();
        all.push((symbol.name, tuples));
        Structure::new(signature, self.size, all)
    }

    /// Sorted neighbor lists of the Gaifman graph, computed once.
    pub fn gaifman(&self) -> &[Vec<Vertex>] {
        self.adjacency.get_or_init(|| {
            let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); self.size];
            for rel in &self.relations {
                for t in &rel.tuples {
                    for (i, &u) in t.iter().enumerate() {
                        for &v in &t[i + 1..] {
                            if u != v {
                                adj[u].push(v);
                                adj[v].push(u);
                            }
                        }
                    }
                }
            }
            for list in &mut adj {
                list.sort_unstable();
                list.dedup();
            }
            adj
        })
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.gaifman()[v]
    }

    /// Unordered adjacent pairs `(u, v)` with `u < v`.
    pub fn gaifman_edges(&self) -> Vec<(Vertex, Vertex)> {
        let adj = self.gaifman();
        let mut out = Vec::new();
        for (u, list) in adj.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.size {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v,
                size: self.size,
            })
        }
    }

    /// Gaifman distance; `None` when `u` and `v` lie in different components.
    pub fn distance(&self, u: Vertex, v: Vertex) -> Result<Option<usize>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Ok(Some(0));
        }
        let dist = self.bfs(&[u], None);
        Ok(dist[v])
    }

    /// BFS distances from `sources`, truncated at `limit` when given.
    pub fn bfs(&self, sources: &[Vertex], limit: Option<usize>) -> Vec<Option<usize>> {
        let adj = self.gaifman();
        let mut dist = vec![None; self.size];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s].is_none() {
                dist[s] = Some(0);
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            if limit.is_some_and(|l| d >= l) {
                continue;
            }
            for &w in &adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All vertices within distance `r` of some center.
    pub fn ball(&self, centers: &[Vertex], r: usize) -> Result<VertexSet> {
        for &c in centers {
            self.check_vertex(c)?;
        }
        let dist = self.bfs(centers, Some(r));
        Ok(dist
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.map(|_| v))
            .collect())
    }

    /// Size of the `r`-ball around a single vertex.
    pub fn ball_size(&self, center: Vertex, r: usize) -> usize {
        let adj = self.gaifman();
        let mut seen = HashSet::new();
        seen.insert(center);
        let mut frontier = vec![center];
        for _ in 0..r {
            let mut next = Vec::new();
            for u in frontier {
                for &w in &adj[u] {
                    if seen.insert(w) {
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        seen.len()
    }

    /// Induced substructure on `set`, relabeled `0..|set|` in increasing
    /// order. Returns the map from new ids to old ids.
    pub fn induced(&self, set: &VertexSet) -> (Structure, Vec<Vertex>) {
        let map: Vec<Vertex> = set.iter().filter(|&v| v < self.size).collect();
        let mut inverse = vec![usize::MAX; self.size];
        for (new, &old) in map.iter().enumerate() {
            inverse[old] = new;
        }
        let per_rel = self
            .relations
            .iter()
            .map(|rel| {
                // Tuples are sorted, so those starting at `u` are contiguous.
                let mut out = Vec::new();
                for &u in &map {
                    let lo = rel.tuples.partition_point(|t| t[0] < u);
                    for t in rel.tuples[lo..].iter().take_while(|t| t[0] == u) {
                        if t.iter().all(|&v| inverse[v] != usize::MAX) {
                            out.push(t.iter().map(|&v| inverse[v]).collect());
                        }
                    }
                }
                out
            })
            .collect();
        (
            Structure::from_parts(self.signature.clone(), map.len(), per_rel),
            map,
        )
    }

    /// Gaifman components ordered by minimum vertex.
    pub fn components(&self) -> Vec<VertexSet> {
        let adj = self.gaifman();
        let mut comp = vec![usize::MAX; self.size];
        let mut parts = Vec::new();
        for start in 0..self.size {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = parts.len();
            comp[start] = id;
            let mut members = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &w in &adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            parts.push(members.into_iter().collect());
        }
        parts
    }

    pub fn is_connected(&self) -> bool {
        self.size <= 1 || self.components().len() == 1
    }

    pub fn to_json(&self) -> Value {
        let mut rels = Map::new();
        for (sym, rel) in self.signature.symbols().iter().zip(&self.relations) {
            let tuples = rel
                .tuples
                .iter()
                .map(|t| Value::Array(t.iter().map(|&v| Value::from(v)).collect()))
                .collect();
            rels.insert(sym.name.clone(), Value::Array(tuples));
        }
        let mut obj = Map::new();
        obj.insert("signature".into(), self.signature.to_json());
        obj.insert("domain".into(), Value::from(self.size));
        obj.insert("relations".into(), Value::Object(rels));
        Value::Object(obj)
    }

    /// Compact JSON followed by a newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string(&self.to_json()).expect("structure serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Load(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        Structure::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Load("top level: expected an object".into()))?;
        let signature = Signature::from_json(
            obj.get("signature")
                .ok_or_else(|| Error::Load("missing key `signature`".into()))?,
            "signature",
        )?;
        let size = obj
            .get("domain")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Load("domain: expected a non-negative integer".into()))?
            as usize;
        let mut tuples: BTreeMap<String, Vec<Vec<Vertex>>> = BTreeMap::new();
        if let Some(rels) = obj.get("relations") {
            let rels = rels
                .as_object()
                .ok_or_else(|| Error::Load("relations: expected an object".into()))?;
            for (name, list) in rels {
                let sym = signature.get(name).ok_or_else(|| {
                    Error::Load(format!("relations.{name}: relation not declared in signature"))
                })?;
                let list = list
                    .as_array()
                    .ok_or_else(|| Error::Load(format!("relations.{name}: expected a list")))?;
                let mut out = Vec::with_capacity(list.len());
                for (i, t) in list.iter().enumerate() {
                    let at = format!("relations.{name}[{i}]");
                    let t = t
                        .as_array()
                        .ok_or_else(|| Error::Load(format!("{at}: expected a list of vertices")))?;
                    if t.len() != sym.arity {
                        return Err(Error::Load(format!(
                            "{at}: arity mismatch, expected {} entries, found {}",
                            sym.arity,
                            t.len()
                        )));
                    }
                    let mut tuple = Vec::with_capacity(t.len());
                    for (j, v) in t.iter().enumerate() {
                        let v = v.as_u64().ok_or_else(|| {
                            Error::Load(format!("{at}[{j}]: expected a non-negative integer"))
                        })? as usize;
                        if v >= size {
                            return Err(Error::Load(format!(
                                "{at}[{j}]: vertex {v} out of range for domain of size {size}"
                            )));
                        }
                        tuple.push(v);
                    }
                    out.push(tuple);
                }
                tuples.insert(name.clone(), out);
            }
        }
        Structure::new(signature, size, tuples)
    }
}

/// Labeled equality: same signature, domain and tuple sets.
impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.size == other.size
            && self
                .relations
                .iter()
                .zip(&other.relations)
                .all(|(a, b)| a.tuples == b.tuples)
    }
}

impl Eq for Structure {}

/// Graph on `n` vertices over [`Signature::graph`] from unordered edges.
pub fn graph_from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Structure> {
    Structure::new(
        Signature::graph(),
        n,
        [("adj", edges.iter().map(|&(u, v)| vec![u, v]).collect())],
    )
}
