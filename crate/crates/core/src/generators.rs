//! Graph, tree and forest families used as running examples.
//!
//! Vertex numbering is fixed per family:
//!
//! * `path(n)`: vertices `0..n`, edges `i -- i+1`.
//! * `star(m)`: hub `0`, leaves `1..m`.
//! * `star_of_stars(k, m)`: `k` disjoint stars of order `m`; star `i`
//!   occupies `i*m .. (i+1)*m` with hub `i*m`.
//! * `path_of_stars(k, m)`: as `star_of_stars` with hubs `i*m -- (i+1)*m`
//!   joined in a path.
//! * `balanced_tree(b, h)`: complete `b`-ary tree of height `h` in BFS order
//!   (children of `v` are `b*v+1 ..= b*v+b`), root `0` marked `R`.
//! * `random_tree(n, seed)`: vertex `i >= 1` attaches to a uniformly chosen
//!   earlier vertex; root `0` marked `R`.
//!
//! `random_tree` draws from SplitMix64: the state advances by
//! `0x9E3779B97F4A7C15`, and the output is the state mixed by
//! `z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB;
//! z ^ z>>31` (wrapping arithmetic). The parent of vertex `i` is `x % i` for
//! the first output `x` below `floor(2^64 / i) * i`, so the choice is exactly
//! uniform.

use std::fmt;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::structure::{graph_from_edges, Signature, Structure, Vertex};
use crate::syntax::{pack, parse, Formula};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Path { n: usize },
    Star { m: usize },
    StarOfStars { k: usize, m: usize },
    PathOfStars { k: usize, m: usize },
    BalancedTree { branching: usize, height: usize },
    RandomTree { n: usize, seed: u64 },
}

impl Family {
    pub const NAMES: [&'static str; 6] = [
        "path",
        "star",
        "star_of_stars",
        "path_of_stars",
        "balanced_tree",
        "random_tree",
    ];

    /// Builds a family from its name and positional parameters.
    pub fn from_parts(name: &str, params: &[usize], seed: Option<u64>) -> Result<Family> {
        let want = |count: usize| -> Result<()> {
            if params.len() != count {
                return Err(Error::InvalidArgument(format!(
                    "family `{name}` takes {count} parameter(s), got {}",
                    params.len()
                )));
            }
            if let Some(p) = params.iter().find(|&&p| p == 0) {
                return Err(Error::InvalidArgument(format!(
                    "family `{name}`: parameters must be positive, got {p}"
                )));
            }
            Ok(())
        };
        let family = match name {
            "path" => {
                want(1)?;
                Family::Path { n: params[0] }
            }
            "star" => {
                want(1)?;
                Family::Star { m: params[0] }
            }
            "star_of_stars" => {
                want(2)?;
                Family::StarOfStars {
                    k: params[0],
                    m: params[1],
                }
            }
            "path_of_stars" => {
                want(2)?;
                Family::PathOfStars {
                    k: params[0],
                    m: params[1],
                }
            }
            "balanced_tree" => {
                if params.len() != 2 || params[0] == 0 {
                    return Err(Error::InvalidArgument(
                        "family `balanced_tree` takes branching >= 1 and height >= 0".into(),
                    ));
                }
                Family::BalancedTree {
                    branching: params[0],
                    height: params[1],
                }
            }
            "random_tree" => {
                want(1)?;
                let seed = seed.ok_or_else(|| {
                    Error::InvalidArgument("family `random_tree` requires a seed".into())
                })?;
                Family::RandomTree { n: params[0], seed }
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown family `{other}` (expected one of {})",
                    Family::NAMES.join(", ")
                )))
            }
        };
        Ok(family)
    }

    /// One-parameter scaling used by convergence reports: the grid value is
    /// the path/star order, both star parameters, or the tree height.
    pub fn scaled(name: &str, size: usize, seed: Option<u64>) -> Result<Family> {
        match name {
            "star_of_stars" | "path_of_stars" => Family::from_parts(name, &[size, size], seed),
            "balanced_tree" => Family::from_parts(name, &[2, size], seed),
            _ => Family::from_parts(name, &[size], seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Path { .. } => "path",
            Family::Star { .. } => "star",
            Family::StarOfStars { .. } => "star_of_stars",
            Family::PathOfStars { .. } => "path_of_stars",
            Family::BalancedTree { .. } => "balanced_tree",
            Family::RandomTree { .. } => "random_tree",
        }
    }

    pub fn vertex_count(&self) -> usize {
        match *self {
            Family::Path { n } | Family::RandomTree { n, .. } => n,
            Family::Star { m } => m,
            Family::StarOfStars { k, m } | Family::PathOfStars { k, m } => k.saturating_mul(m),
            Family::BalancedTree { branching, height } => {
                // Saturates rather than overflowing for absurd heights.
                (0..=height)
                    .map(|d| branching.saturating_pow(d.min(u32::MAX as usize) as u32))
                    .fold(0usize, usize::saturating_add)
            }
        }
    }

    pub fn is_rooted(&self) -> bool {
        matches!(self, Family::BalancedTree { .. } | Family::RandomTree { .. })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Path { n } => write!(f, "path({n})"),
            Family::Star { m } => write!(f, "star({m})"),
            Family::StarOfStars { k, m } => write!(f, "star_of_stars({k},{m})"),
            Family::PathOfStars { k, m } => write!(f, "path_of_stars({k},{m})"),
            Family::BalancedTree { branching, height } => {
                write!(f, "balanced_tree({branching},{height})")
            }
            Family::RandomTree { n, seed } => write!(f, "random_tree({n},{seed})"),
        }
    }
}

/// SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `0..bound` by rejection. `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let limit = (1u128 << 64) / bound as u128 * bound as u128;
        loop {
            let x = self.next_u64();
            if (x as u128) < limit {
                return x % bound;
            }
        }
    }
}

pub fn path(n: usize) -> Structure {
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    graph_from_edges(n, &edges).unwrap()
}

pub fn star(m: usize) -> Structure {
    let edges: Vec<_> = (1..m).map(|i| (0, i)).collect();
    graph_from_edges(m, &edges).unwrap()
}

fn star_edges(k: usize, m: usize) -> Vec<(Vertex, Vertex)> {
    (0..k)
        .flat_map(|i| (1..m).map(move |j| (i * m, i * m + j)))
        .collect()
}

pub fn star_of_stars(k: usize, m: usize) -> Structure {
    graph_from_edges(k * m, &star_edges(k, m)).unwrap()
}

pub fn path_of_stars(k: usize, m: usize) -> Structure {
    let mut edges: Vec<_> = (1..k).map(|i| ((i - 1) * m, i * m)).collect();
    edges.extend(star_edges(k, m));
    graph_from_edges(k * m, &edges).unwrap()
}

/// Tree over [`Signature::rooted_graph`] from a parent array; `parent[0]`
/// is ignored and vertex 0 is the root.
pub fn tree_from_parents(parents: &[Vertex]) -> Structure {
    let n = parents.len();
    let adj = (1..n).map(|v| vec![parents[v], v]).collect();
    let root = if n > 0 { vec![vec![0]] } else { vec![] };
    Structure::new(Signature::rooted_graph(), n, [("adj", adj), ("R", root)]).unwrap()
}

pub fn balanced_tree(branching: usize, height: usize) -> Structure {
    let n = Family::BalancedTree { branching, height }.vertex_count();
    let parents: Vec<Vertex> = (0..n).map(|v| if v == 0 { 0 } else { (v - 1) / branching }).collect();
    tree_from_parents(&parents)
}

pub fn random_tree(n: usize, seed: u64) -> Structure {
    let mut rng = SplitMix64::new(seed);
    let parents: Vec<Vertex> = (0..n)
        .map(|v| if v == 0 { 0 } else { rng.below(v as u64) as Vertex })
        .collect();
    tree_from_parents(&parents)
}

/// Adds the root mark `R` at `root` (the signature gains `R` if needed).
pub fn with_root(s: &Structure, root: Vertex) -> Result<Structure> {
    s.check_vertex(root)?;
    match s.signature().get("R") {
        Some(sym) if sym.arity == 1 => {
            let mut rels: Vec<(String, Vec<Vec<Vertex>>)> = s
                .signature()
                .symbols()
                .iter()
                .map(|sym| (sym.name.clone(), s.tuples(&sym.name).unwrap().to_vec()))
                .collect();
            for (name, tuples) in &mut rels {
                if name == "R" {
                    *tuples = vec![vec![root]];
                }
            }
            Structure::new(s.signature().clone(), s.size(), rels)
        }
        Some(_) => Err(Error::SignatureMismatch("relation `R` is not unary".into())),
        None => s.with_relation(
            crate::structure::RelationSymbol::new("R", 1, false),
            vec![vec![root]],
        ),
    }
}

pub fn generate(family: &Family) -> Structure {
    match *family {
        Family::Path { n } => path(n),
        Family::Star { m } => star(m),
        Family::StarOfStars { k, m } => star_of_stars(k, m),
        Family::PathOfStars { k, m } => path_of_stars(k, m),
        Family::BalancedTree { branching, height } => balanced_tree(branching, height),
        Family::RandomTree { n, seed } => random_tree(n, seed),
    }
}

/// Exact pairing from a closed form, for the supported (family, formula)
/// pairs: `true` on every family, `adj(x1,x2)` on every family, and
/// `dist(x1,x2) <= 2` on paths. Denominators are `n^p` as in the evaluator.
pub fn closed_form_pairing(family: &Family, f: &Formula) -> Result<Fraction> {
    let f = pack(f);
    let n = family.vertex_count();
    if n == 0 {
        return Err(Error::EmptyDomain);
    }
    let n2 = BigUint::from(n) * BigUint::from(n);
    if f == Formula::True {
        return Ok(Fraction::one());
    }
    let adj = parse("adj(x1,x2)").unwrap();
    let adj_rev = parse("adj(x2,x1)").unwrap();
    if f == adj || f == adj_rev {
        let edges = match *family {
            Family::Path { n } => n - 1,
            Family::Star { m } => m - 1,
            Family::StarOfStars { k, m } => k * (m - 1),
            Family::PathOfStars { k, m } => (k - 1) + k * (m - 1),
            Family::BalancedTree { .. } | Family::RandomTree { .. } => n - 1,
        };
        return Ok(Fraction::new(BigUint::from(2 * edges), n2));
    }
    let near = parse("dist(x1,x2) <= 2").unwrap();
    let near_rev = parse("dist(x2,x1) <= 2").unwrap();
    if let (Family::Path { n }, true) = (family, f == near || f == near_rev) {
        let count = if *n == 1 { 1 } else { 5 * n - 6 };
        return Ok(Fraction::new(BigUint::from(count), n2));
    }
    Err(Error::Unsupported(format!(
        "no closed form for `{f}` on family {}",
        family.name()
    )))
}
