mod common;

use common::*;
use fostat_core::analysis::{
    break_cover, parse_rational, pseudo_distance, residual_index, split_by_centers,
};
use fostat_core::eval::{EvalOptions, Evaluator, Locality};
use fostat_core::forest::{check_fmtp, check_smtp, skeleton_decompose, RootedForest};
use fostat_core::generators::{path, random_tree, star_of_stars};
use fostat_core::interpret::{f_to_y, verify_pairing_identity, y_to_f};
use fostat_core::structure::{graph_from_edges, VertexSet};
use fostat_core::syntax::{meta, normalize, parse, rename_free, theta_r};
use fostat_core::{Formula, Fraction};
use num_rational::BigRational;
use num_traits::{One, Signed};
use proptest::prelude::*;

const RELS: [(&str, usize); 2] = [("adj", 2), ("M", 1)];

fn formula(rng: &mut Seeded, free: u32, rank: u32) -> Formula {
    FormulaGen::new(&RELS, free, rank).gen(rng)
}

fn q(text: &str) -> BigRational {
    parse_rational(text).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn evaluator_matches_naive_oracle(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 7);
        let g = random_graph(&mut rng, n, 1, 3);
        let f = formula(&mut rng, 3, 2);
        let want = naive_pairing(&g, &f);
        for options in [
            EvalOptions::brute_force(),
            EvalOptions { locality: Locality::Always, ..EvalOptions::default() },
            EvalOptions::default(),
        ] {
            let got = Evaluator::with_options(&g, options).stone_pairing(&f).unwrap();
            prop_assert_eq!(got.to_rational(), want.clone(), "{}", f);
        }
    }

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let f = normalize(&formula(&mut rng, 3, 3));
        let back = parse(&f.to_string()).unwrap();
        prop_assert_eq!(&back, &f, "{}", f);
        prop_assert_eq!(back.to_string(), f.to_string());
    }

    #[test]
    fn conjunction_bound(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 8);
        let g = random_graph(&mut rng, n, 1, 3);
        let phi = formula(&mut rng, 3, 2);
        let psi = formula(&mut rng, 3, 2);
        let e = Evaluator::new(&g);
        let a = e.stone_pairing(&phi).unwrap().to_rational();
        let b = e.stone_pairing(&phi.clone().and(psi.clone())).unwrap().to_rational();
        let c = e.stone_pairing(&psi).unwrap().to_rational();
        prop_assert!((a - b).abs() <= BigRational::one() - c);
    }

    #[test]
    fn product_law(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 8);
        let g = random_graph(&mut rng, n, 1, 2);
        let phi = formula(&mut rng, 2, 1);
        let psi = formula(&mut rng, 2, 1);
        let shift = [(1, 3), (2, 4)].into_iter().collect();
        let psi = rename_free(&psi, &shift);
        let both = phi.clone().and(psi.clone());
        let e = Evaluator::with_options(&g, EvalOptions::brute_force());
        let lhs = e.stone_pairing(&both).unwrap();
        let rhs = e.stone_pairing(&phi).unwrap().mul(&e.stone_pairing(&psi).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn union_bound(seed in any::<u64>(), p in 2u32..=3, r in 1u32..=2) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 14);
        let g = random_graph(&mut rng, n, 1, 4);
        let close = theta_r(p, r).unwrap().not();
        let lhs = Evaluator::new(&g).stone_pairing(&close).unwrap().to_rational();
        let pairs = BigRational::from_integer((p * (p - 1) / 2).into());
        let rhs = pairs * residual_index(&g, r as usize).unwrap().to_rational();
        prop_assert!(lhs <= rhs);
    }

    #[test]
    fn balls_and_metric(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 15);
        let g = random_graph(&mut rng, n, 1, 5);
        let d = naive_distances(&g);
        for u in 0..n {
            for r in 0..4 {
                let small = g.ball(&[u], r).unwrap();
                prop_assert!(small.is_subset(&g.ball(&[u], r + 1).unwrap()));
                prop_assert_eq!(small.len(), g.ball_size(u, r));
            }
            for v in 0..n {
                prop_assert_eq!(g.distance(u, v).unwrap(), d[u][v]);
                prop_assert_eq!(g.distance(u, v).unwrap(), g.distance(v, u).unwrap());
                for w in 0..n {
                    if let (Some(a), Some(b)) = (d[u][v], d[v][w]) {
                        prop_assert!(d[u][w].unwrap() <= a + b);
                    }
                }
            }
        }
    }

    #[test]
    fn locality_radius_is_sound(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(2, 10);
        let g = random_graph(&mut rng, n, 1, 4);
        let f = formula(&mut rng, 2, 2);
        let Some(r) = meta(&f).locality_radius else { return Ok(()) };
        let dist = naive_distances(&g);
        let free: Vec<u32> = f.free_vars().into_iter().collect();
        if free.is_empty() {
            return Ok(());
        }
        for _ in 0..6 {
            let tuple: Vec<usize> = free.iter().map(|_| rng.below(n)).collect();
            let ball = g.ball(&tuple, r as usize).unwrap();
            let (local, map) = g.induced(&ball);
            let ldist = naive_distances(&local);
            let mut asg: std::collections::BTreeMap<u32, usize> =
                free.iter().copied().zip(tuple.iter().copied()).collect();
            let mut lasg = asg
                .iter()
                .map(|(&v, w)| (v, map.binary_search(w).unwrap()))
                .collect();
            prop_assert_eq!(
                naive_sat(&g, &dist, &f, &mut asg),
                naive_sat(&local, &ldist, &f, &mut lasg),
                "{} at {:?}", f, tuple
            );
        }
    }

    #[test]
    fn break_cover_invariants(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 40);
        let g = if rng.chance(1, 2) { random_graph(&mut rng, n, 1, n) } else { random_tree(n, seed) };
        let eps = q(&format!("{}/{}", rng.range(1, 10), 10));
        let r = rng.range(0, 3);
        let b = break_cover(&g, &eps, r).unwrap();
        let checks = b.check(&g);
        prop_assert!(checks.all(), "{:?}", checks);
        let floor = (eps.denom() / eps.numer()).to_string().parse::<usize>().unwrap();
        prop_assert!(b.centers.len() <= floor);
    }

    #[test]
    fn split_partitions_domain(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 40);
        let g = random_tree(n, seed);
        let d = rng.range(0, 2);
        // Greedy centers more than 2d+1 apart.
        let mut centers: Vec<usize> = Vec::new();
        for v in 0..n {
            if rng.chance(1, 4)
                && centers.iter().all(|&c| g.distance(c, v).unwrap().is_none_or(|x| x > 2 * d + 1))
            {
                centers.push(v);
            }
        }
        let split = split_by_centers(&g, &centers, d).unwrap();
        let mut all: Vec<usize> = split.residue_vertices.clone();
        for p in &split.parts {
            all.extend(&p.vertices);
        }
        all.sort();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        for (i, a) in split.parts.iter().enumerate() {
            for b in &split.parts[i + 1..] {
                for &u in &a.vertices {
                    for &v in &b.vertices {
                        prop_assert!(!g.neighbors(u).contains(&v));
                    }
                }
            }
        }
    }

    #[test]
    fn pairing_identity(seed in any::<u64>(), k in 1usize..=2) {
        let mut rng = Seeded::new(seed);
        let n = if k == 1 { rng.range(1, 8) } else { rng.range(1, 4) };
        let g = random_graph(&mut rng, n, 1, 2);
        let scheme = random_scheme(&mut rng, k);
        let f = random_target_formula(&mut rng, k);
        let report = verify_pairing_identity(&scheme, &g, &f).unwrap();
        prop_assert!(report.equal, "{} => {}: {} vs {}", f, report.rewritten, report.lhs, report.rhs);
    }

    #[test]
    fn tree_forest_round_trip(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 60);
        let t = random_rooted_tree(&mut rng, n);
        prop_assert_eq!(f_to_y(&y_to_f(&t).unwrap()).unwrap(), t);
    }

    #[test]
    fn mass_transport(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 12);
        let g = random_graph(&mut rng, n, 1, 3);
        let phi = formula(&mut rng, 1, 1);
        let psi = formula(&mut rng, 1, 1);
        let (a, b) = (rng.range(0, 4), rng.range(0, 4));
        let r = check_fmtp(&g, &phi, &psi, a, b).unwrap();
        prop_assert!(r.identity_holds());
        prop_assert!(!r.counterexample());
        let x: VertexSet = (0..n).filter(|_| rng.chance(1, 2)).collect();
        let y: VertexSet = (0..n).filter(|_| rng.chance(1, 2)).collect();
        let s = check_smtp(&g, &x, &y, a, b).unwrap();
        prop_assert!(!s.counterexample());
    }

    #[test]
    fn skeleton_accounts_for_every_vertex(seed in any::<u64>(), e in 0usize..3) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 80);
        let t = random_rooted_tree(&mut rng, n);
        let eps = q(["1/2", "1/4", "1/10"][e]);
        let sk = skeleton_decompose(&t, &eps, rng.range(0, 6)).unwrap();
        prop_assert_eq!(sk.total_mass(), BigRational::one());
        let mut vs = sk.vertices();
        vs.sort();
        prop_assert_eq!(vs, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn ancestor_composes(seed in any::<u64>()) {
        let mut rng = Seeded::new(seed);
        let n = rng.range(1, 50);
        let f = RootedForest::orient(&random_rooted_tree(&mut rng, n)).unwrap();
        for v in 0..n {
            for k in 0..5 {
                let once = f.ancestor(f.ancestor(v, k).unwrap(), 1).unwrap();
                prop_assert_eq!(f.ancestor(v, k + 1).unwrap(), once);
            }
        }
    }
}

#[test]
fn pseudo_distance_is_a_metric_on_samples() {
    let family: Vec<_> = (3..7).map(path).chain([star_of_stars(2, 3)]).collect();
    let d = |i: usize, j: usize| pseudo_distance(&family[i], &family[j], 2, 500).unwrap().value;
    for i in 0..family.len() {
        assert_eq!(d(i, i), Fraction::new(1u32, 4u32));
        for j in 0..family.len() {
            assert_eq!(d(i, j), d(j, i));
            for k in 0..family.len() {
                let (a, b, c) = (d(i, k).to_rational(), d(i, j).to_rational(), d(j, k).to_rational());
                assert!(a <= b + c);
            }
        }
    }
}

#[test]
fn pseudo_distance_matches_full_enumeration() {
    // P_10 vs P_11 at n_max = 2: compare against the catalog evaluated by
    // the naive oracle.
    let (a, b) = (path(10), path(11));
    let got = pseudo_distance(&a, &b, 2, 100_000).unwrap();
    let catalog = fostat_core::analysis::complexity_catalog(a.signature(), 2, 100_000);
    let mut level = 2;
    for n in 1..=2u32 {
        let bound = BigRational::new(1.into(), (1u32 << n).into());
        let bad = catalog.iter().any(|f| {
            fostat_core::analysis::complexity(f) <= n
                && (naive_pairing(&a, f) - naive_pairing(&b, f)).abs() >= bound
        });
        if bad {
            level = n - 1;
            break;
        }
    }
    assert_eq!(got.level, level);
}

#[test]
fn residual_index_on_paths() {
    for n in 1..40 {
        for r in 0..5 {
            let want = Fraction::new((2 * r + 1).min(n), n);
            assert_eq!(residual_index(&path(n), r).unwrap(), want, "n={n} r={r}");
        }
    }
}

#[test]
fn transport_on_fixed_graph() {
    let g = graph_from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let r = check_fmtp(&g, &Formula::True, &Formula::True, 2, 2).unwrap();
    assert!(r.premise1 && r.premise2 && r.conclusion);
    assert_eq!(r.phi_to_psi, 8);
}
