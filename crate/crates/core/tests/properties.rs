mod common;

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toric_lambda::constructions::{
    blowup_points_of_projective_space, point_blowdown, product_of_projective_spaces, projective_space,
    star_subdivide, BlowupSite,
};
use toric_lambda::lattice::{determinant, nonneg_combination_feasible, solve_in_basis, to_rational};
use toric_lambda::mmp::{classify_variety, curve_class, MoriCone};
use toric_lambda::positivity::{
    analyze_relations, brute_force_check, criterion_check, splitting_type, wall_relations,
};
use toric_lambda::{ContractionKind, Fan, Int, Matrix, Mode, Outcome, SmoothFan, Wall, WallRelation};

fn ints(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| Int::from(x)).collect()
}

fn fake_relation(b: &[i64]) -> WallRelation {
    let n = b.len() + 1;
    WallRelation {
        wall: Wall {
            ray_indices: (0..n - 1).collect(),
            cone_a: 0,
            cone_b: 1,
            apex_a: n - 1,
            apex_b: n,
        },
        coefficients: ints(b),
    }
}

fn permuted(fan: &Fan, perm: &[usize]) -> SmoothFan {
    // ray i of the input becomes ray perm[i]
    let mut rays = vec![Vec::new(); perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        rays[p] = fan.ray(i).clone();
    }
    let cones = fan
        .max_cones()
        .iter()
        .map(|c| c.iter().map(|&r| perm[r]).collect())
        .collect();
    SmoothFan::new(Fan::new(fan.rank(), rays, cones).unwrap()).unwrap()
}

fn random_perm(len: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..len).collect();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    p
}

fn small_matrix(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-6i64..=6, n), n)
}

/// Unimodular matrix as a product of elementary row operations.
fn unimodular(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec((0..n, 0..n, -3i64..=3, any::<bool>()), 0..12).prop_map(move |ops| {
        let mut m: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
            .collect();
        for (i, j, k, swap) in ops {
            if i == j {
                continue;
            }
            if swap {
                m.swap(i, j);
            } else {
                let src = m[j].clone();
                for (x, y) in m[i].iter_mut().zip(src) {
                    *x += k * y;
                }
            }
        }
        m
    })
}

/// Solves `Σ c_j g_j = t` for linearly independent `g_j` by Gaussian
/// elimination; `None` if inconsistent.
fn exact_coefficients(gens: &[&Vec<BigRational>], t: &[BigRational]) -> Option<Vec<BigRational>> {
    let k = gens.len();
    let d = t.len();
    let mut rows: Vec<Vec<BigRational>> = (0..d)
        .map(|r| {
            let mut row: Vec<_> = gens.iter().map(|g| g[r].clone()).collect();
            row.push(t[r].clone());
            row
        })
        .collect();
    for (pivot_row, col) in (0..k).enumerate() {
        let p = (pivot_row..d).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(pivot_row, p);
        let pv = rows[pivot_row][col].clone();
        for x in rows[pivot_row].iter_mut() {
            *x = &*x / &pv;
        }
        for r in 0..d {
            if r != pivot_row && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                let src = rows[pivot_row].clone();
                for (x, y) in rows[r].iter_mut().zip(src) {
                    *x = &*x - &f * y;
                }
            }
        }
    }
    if rows[k..].iter().any(|r| !r[k].is_zero()) {
        return None;
    }
    Some(rows[..k].iter().map(|r| r[k].clone()).collect())
}

fn rank_of(gens: &[&Vec<BigRational>]) -> usize {
    if gens.is_empty() {
        return 0;
    }
    let d = gens[0].len();
    let mut rows: Vec<Vec<BigRational>> = gens.iter().map(|g| (*g).clone()).collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        for r in rank + 1..rows.len() {
            let f = &rows[r][col] / &rows[rank][col];
            let src = rows[rank].clone();
            for (x, y) in rows[r].iter_mut().zip(src) {
                *x = &*x - &f * y;
            }
        }
        rank += 1;
    }
    rank
}

/// Carathéodory: `t` lies in the cone iff it is a nonnegative combination of
/// some linearly independent subset.
fn caratheodory(gens: &[Vec<BigRational>], t: &[BigRational]) -> bool {
    if t.iter().all(Zero::is_zero) {
        return true;
    }
    (1..=gens.len()).any(|k| {
        gens.iter().combinations(k).any(|sub| {
            rank_of(&sub) == k
                && exact_coefficients(&sub, t).is_some_and(|c| c.iter().all(|x| !x.is_negative()))
        })
    })
}

fn corpus_fan() -> impl Strategy<Value = SmoothFan> {
    (any::<u64>(), 2usize..=4, 0usize..=3).prop_map(|(seed, n, steps)| {
        common::random_fan(&mut ChaCha8Rng::seed_from_u64(seed), n, steps)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn determinant_is_multiplicative(a in small_matrix(4), b in small_matrix(4)) {
        let a = Matrix::from_rows(&a.iter().map(|r| ints(r)).collect::<Vec<_>>()).unwrap();
        let b = Matrix::from_rows(&b.iter().map(|r| ints(r)).collect::<Vec<_>>()).unwrap();
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(
            determinant(&ab).unwrap(),
            determinant(&a).unwrap() * determinant(&b).unwrap()
        );
    }

    #[test]
    fn determinant_matches_leibniz(a in small_matrix(3)) {
        let leibniz = (0..3usize).permutations(3).map(|p| {
            let inversions = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j]).count();
            let sign = if inversions % 2 == 0 { 1 } else { -1 };
            sign * (0..3).map(|i| a[i][p[i]]).product::<i64>()
        }).sum::<i64>();
        let m = Matrix::from_rows(&a).unwrap();
        prop_assert_eq!(determinant(&m).unwrap(), leibniz);
    }

    #[test]
    fn solve_round_trip(basis in unimodular(4), target in prop::collection::vec(-20i64..=20, 4)) {
        let m = Matrix::from_rows(&basis.iter().map(|r| ints(r)).collect::<Vec<_>>()).unwrap();
        prop_assert!(determinant(&m).unwrap().abs().is_one());
        let t = ints(&target);
        let c = solve_in_basis(&m, &t).unwrap();
        let back: Vec<Int> = (0..4)
            .map(|j| (0..4).map(|i| &c[i] * m.get(i, j)).sum())
            .collect();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn feasibility_agrees_with_caratheodory(
        dim in 1usize..=3,
        raw in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 0..=4),
        target in prop::collection::vec(-3i64..=3, 3),
    ) {
        let gens: Vec<Vec<BigRational>> = raw.iter().map(|g| to_rational(&ints(&g[..dim]))).collect();
        let t = to_rational(&ints(&target[..dim]));
        prop_assert_eq!(nonneg_combination_feasible(&gens, &t).unwrap(), caratheodory(&gens, &t));
    }

    #[test]
    fn criterion_agrees_with_brute_force(b in prop::collection::vec(-4i64..=4, 1..=6)) {
        let rel = fake_relation(&b);
        for m in 1..=rel.dim() {
            let v = criterion_check(&rel, m).unwrap();
            prop_assert_eq!((v.ample, v.nef), brute_force_check(&rel, m).unwrap(), "m = {}", m);
            prop_assert!(!v.ample || v.nef);
        }
    }

    #[test]
    fn positivity_is_monotone_in_m(b in prop::collection::vec(-4i64..=4, 1..=6)) {
        let rel = fake_relation(&b);
        for m in 1..rel.dim() {
            let lo = criterion_check(&rel, m).unwrap();
            let hi = criterion_check(&rel, m + 1).unwrap();
            prop_assert!(!lo.nef || hi.nef);
            prop_assert!(!lo.ample || hi.ample);
        }
    }

    #[test]
    fn splitting_type_sum_rule(b in prop::collection::vec(-5i64..=5, 1..=7)) {
        let rel = fake_relation(&b);
        let st = splitting_type(&rel);
        prop_assert!(st.degrees().contains(&Int::from(2)));
        prop_assert_eq!(st.rank(), b.len() + 1);
        prop_assert_eq!(st.total(), rel.antican_degree());
        prop_assert_eq!(rel.antican_degree(), Int::from(2 + b.iter().sum::<i64>()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn validation_flags_survive_permutation(fan in corpus_fan(), seed in any::<u64>()) {
        let perm = random_perm(fan.rays().len(), seed);
        let p = permuted(fan.fan(), &perm);
        prop_assert_eq!(fan.validate().flags(), p.validate().flags());
        prop_assert_eq!(fan.canonical().into_fan(), p.canonical().into_fan());
        prop_assert_eq!(fan.walls().len(), p.walls().len());
    }

    #[test]
    fn wall_relations_are_exact_and_symmetric(fan in corpus_fan()) {
        let rels = wall_relations(&fan).unwrap();
        prop_assert_eq!(rels.len(), fan.walls().len());
        for rel in &rels {
            let w = &rel.wall;
            prop_assert!(!w.ray_indices.contains(&w.apex_a) && !w.ray_indices.contains(&w.apex_b));
            prop_assert_ne!(w.apex_a, w.apex_b);
            for k in 0..fan.rank() {
                let mut s = &fan.ray(w.apex_a)[k] + &fan.ray(w.apex_b)[k];
                for (b, &r) in rel.b().iter().zip(&w.ray_indices) {
                    s += b * &fan.ray(r)[k];
                }
                prop_assert!(s.is_zero());
            }
            let sw = rel.swapped();
            prop_assert_eq!(sw.b(), rel.b());
            prop_assert_eq!(sw.full_vector(fan.rays().len()), rel.full_vector(fan.rays().len()));
        }
    }

    #[test]
    fn star_subdivide_counts(fan in corpus_fan(), seed in any::<u64>(), size in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cone = fan.max_cones().choose(&mut rng).unwrap().clone();
        let size = size.min(fan.rank());
        let face: Vec<usize> = cone.choose_multiple(&mut rng, size).copied().collect();
        let containing = fan
            .max_cones()
            .iter()
            .filter(|c| face.iter().all(|r| c.contains(r)))
            .count();
        let blown = star_subdivide(&fan, &BlowupSite::new(face.clone())).unwrap();
        prop_assert!(blown.validate().all_passed());
        prop_assert_eq!(blown.rays().len(), fan.rays().len() + 1);
        prop_assert_eq!(
            blown.max_cones().len(),
            fan.max_cones().len() + containing * (face.len() - 1)
        );
        if face.len() == fan.rank() {
            prop_assert_eq!(blown.max_cones().len(), fan.max_cones().len() + face.len() - 1);
            let down = point_blowdown(&blown, fan.rays().len()).unwrap();
            prop_assert_eq!(down.canonical().into_fan(), fan.canonical().into_fan());
        }
    }

    #[test]
    fn mori_cone_invariants(fan in corpus_fan()) {
        let cone = MoriCone::new(&fan).unwrap();
        let n = fan.rank();
        let relation_matrix = fan.relation_matrix();
        for rel in cone.relations() {
            let class = curve_class(&fan, rel).unwrap();
            let image = relation_matrix.mul_vec(&class.intersections).unwrap();
            prop_assert!(image.iter().all(Zero::is_zero));
        }
        prop_assert!(cone.generators().iter().enumerate().any(|(g, _)| cone.is_extremal(g)));
        for c in cone.contractions() {
            match c.kind {
                ContractionKind::Fiber => prop_assert!(c.j_minus.is_empty()),
                ContractionKind::Divisorial => prop_assert_eq!(c.j_minus.len(), 1),
                ContractionKind::Small => prop_assert!(c.j_minus.len() > 1),
            }
            prop_assert_eq!(c.fiber_dim + 1, c.j_plus.len());
            prop_assert_eq!(
                c.image_of_exceptional_dim,
                (c.kind == ContractionKind::Divisorial).then(|| n - c.j_plus.len())
            );
        }
    }

    #[test]
    fn lambda2_nef_excludes_small_contractions(fan in corpus_fan()) {
        let n = fan.rank();
        let rels = wall_relations(&fan).unwrap();
        let verdicts = analyze_relations(&rels, n).unwrap();
        if n >= 2 && verdicts[1].nef {
            let cone = MoriCone::from_relations(&fan, rels).unwrap();
            for c in cone.contractions() {
                prop_assert_ne!(c.kind, ContractionKind::Small);
                if c.kind == ContractionKind::Divisorial {
                    prop_assert_eq!(c.image_of_exceptional_dim, Some(0));
                }
            }
        }
        for v in &verdicts {
            prop_assert!(!v.ample || v.nef);
        }
    }

    #[test]
    fn classification_ignores_ray_order(n in 3usize..=5, points in 0usize..=1, seed in any::<u64>()) {
        let fan = blowup_points_of_projective_space(n, points).unwrap();
        let p = permuted(fan.fan(), &random_perm(fan.rays().len(), seed));
        let a = classify_variety(&fan, Mode::Lambda2Nef).unwrap();
        let b = classify_variety(&p, Mode::Lambda2Nef).unwrap();
        prop_assert_eq!(&a.outcome, &b.outcome);
        prop_assert_eq!(a.chain.len(), b.chain.len());
        prop_assert_eq!(a.terminal.canonical().into_fan(), b.terminal.canonical().into_fan());
        prop_assert_eq!(b.terminal.canonical().into_fan(), projective_space(n).unwrap().canonical().into_fan());
    }
}

#[test]
fn product_wall_count() {
    for n in 2..=6 {
        for dims in common::partitions(n) {
            let fan = product_of_projective_spaces(&dims).unwrap();
            let cones: usize = dims.iter().map(|d| d + 1).product();
            assert_eq!(fan.max_cones().len(), cones, "{dims:?}");
            assert_eq!(fan.walls().len(), n * cones / 2, "{dims:?}");
        }
    }
}

#[test]
fn projective_space_walls_are_all_ones() {
    for n in 1..=7 {
        let fan = projective_space(n).unwrap();
        for rel in wall_relations(&fan).unwrap() {
            assert!(rel.b().iter().all(One::is_one), "P{n}: {rel}");
        }
    }
}

#[test]
fn tangent_nef_outcome_has_nonnegative_walls() {
    for n in 3..=6 {
        for dims in std::iter::once(vec![n]).chain(common::partitions(n)) {
            let fan = product_of_projective_spaces(&dims).unwrap();
            let c = classify_variety(&fan, Mode::Lambda2Nef).unwrap();
            assert_eq!(c.outcome, Outcome::TangentNef, "{dims:?}");
            for rel in wall_relations(&fan).unwrap() {
                assert!(rel.b().iter().all(|b| !b.is_negative()));
            }
        }
    }
}

#[test]
fn corpus_is_large_and_valid() {
    let corpus = common::corpus();
    assert!(corpus.len() >= 200, "{}", corpus.len());
    for e in &corpus {
        assert!(e.fan.validate().all_passed(), "{}", e.name);
    }
}
