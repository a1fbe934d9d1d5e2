use tabmoves::json::parse_design;
use tabmoves::lattice::*;
use tabmoves::*;

fn design(r: usize, c: usize) -> IntMatrix {
    IntMatrix::from(&two_way_design(Shape::new(r, c).unwrap()))
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn twisted_cubic() -> IntMatrix {
    IntMatrix::from_rows(&[[1i64, 1, 1, 1], [0, 1, 2, 3]]).unwrap()
}

fn fraction_design() -> DesignMatrix {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/independence_2x2x2.json")).unwrap();
    parse_design(&text).unwrap()
}

#[test]
fn kernel_rank_of_two_way_designs() {
    for n in 2..=5 {
        let a = design(n, n);
        assert_eq!(kernel_basis(&a).unwrap().len(), (n - 1) * (n - 1));
        assert_eq!(a.rank(), 2 * n - 1);
    }
}

#[test]
fn kernel_of_general_matrix() {
    let a = IntMatrix::from_rows(&[[2i64, 4, 6], [1, 3, 5]]).unwrap();
    let b = kernel_basis(&a).unwrap();
    assert_eq!(b.len(), 1);
    assert!(a.annihilates(&b[0]));
    assert_eq!(b[0].iter().fold(0, |g, &x| gcd(g, x)), 1);
}

#[test]
fn graver_elements_are_primitive_kernel_vectors() {
    let fraction = IntMatrix::from(&fraction_design());
    for a in [design(3, 4), twisted_cubic(), fraction] {
        let g = graver_vectors(&a, DEFAULT_NORM_CAP).unwrap();
        for v in &g {
            assert!(a.annihilates(v));
            assert_eq!(v.iter().fold(0, |acc, &x| gcd(acc, x)), 1);
        }
        for (i, u) in g.iter().enumerate() {
            for (j, v) in g.iter().enumerate() {
                let neg: Vec<i64> = v.iter().map(|x| -x).collect();
                assert!(i == j || (!conformal_le(u, v) && !conformal_le(u, &neg)));
            }
        }
    }
}

#[test]
fn circuits_inside_graver() {
    let fraction = IntMatrix::from(&fraction_design());
    for a in [design(2, 4), design(3, 3), twisted_cubic(), fraction] {
        let c = circuits_general(&a, DEFAULT_CIRCUIT_SUBSET_LIMIT).unwrap();
        let g = graver_basis(&a, DEFAULT_NORM_CAP).unwrap();
        assert!(!c.is_empty());
        assert!(c.is_subset_of(&g));
    }
}

#[test]
fn graver_of_fraction_design_has_twenty_elements() {
    let a = IntMatrix::from(&fraction_design());
    assert_eq!(graver_basis(&a, DEFAULT_NORM_CAP).unwrap().len(), 20);
}

/// All primitive kernel vectors with entries in `[-b, b]`, minimal under
/// sign-compatible domination, one per sign pair.
fn brute_force_graver(a: &IntMatrix, b: i64) -> MoveSet {
    let k = a.cols();
    let width = (2 * b + 1) as u64;
    let mut kernel = Vec::new();
    for code in 0..width.pow(k as u32) {
        let mut c = code;
        let v: Vec<i64> = (0..k)
            .map(|_| {
                let x = (c % width) as i64 - b;
                c /= width;
                x
            })
            .collect();
        if v.iter().all(|&x| x == 0) || !a.annihilates(&v) {
            continue;
        }
        kernel.push(v);
    }
    let minimal: Vec<Move> = kernel
        .iter()
        .filter(|v| !kernel.iter().any(|u| u != *v && conformal_le(u, v)))
        .filter(|v| v.iter().fold(0, |g, &x| gcd(g, x)) == 1)
        .map(|v| Move::from_dense(v).unwrap())
        .collect();
    MoveSet::new(k, minimal).unwrap()
}

#[test]
fn graver_matches_brute_force_oracle() {
    let a = design(3, 3);
    assert_eq!(graver_basis(&a, DEFAULT_NORM_CAP).unwrap(), brute_force_graver(&a, 1));

    let tc = twisted_cubic();
    let g = graver_basis(&tc, DEFAULT_NORM_CAP).unwrap();
    let max = g.iter().flat_map(|m| m.entries().iter().map(|e| e.1.abs())).max().unwrap();
    assert!(max <= 3);
    assert_eq!(g, brute_force_graver(&tc, 3));
}

#[test]
fn graver_equals_circuits_on_two_way_designs() {
    for r in 2..=3 {
        for c in 2..=4 {
            let shape = Shape::new(r, c).unwrap();
            let g = graver_basis(&design(r, c), DEFAULT_NORM_CAP).unwrap();
            let cm = MoveSet::new(shape.cells(), circuit_moves(shape).iter().cloned()).unwrap();
            assert_eq!(g, cm, "{shape}");
        }
    }
}

#[test]
fn cap_exceeded_is_an_error_not_a_truncation() {
    let err = graver_basis(&twisted_cubic(), 3).unwrap_err();
    assert!(err.is_cap_exceeded());
    let err = universal_markov_basis(
        &LiftSpec::all_bounded(design(3, 3)),
        &UniversalOptions {
            norm_cap: 5,
            order: None,
        },
    )
    .unwrap_err();
    assert!(err.is_cap_exceeded());
}

#[test]
fn partial_lift_shapes() {
    let a = design(3, 3);
    let p = partial_lawrence_lift(&a, &[0]);
    assert_eq!((p.rows(), p.cols()), (7, 10));
    assert_eq!(partial_lawrence_lift(&a, &(0..9).collect::<Vec<_>>()), lawrence_lift(&a));
    let l = lawrence_lift(&IntMatrix::identity(4));
    assert_eq!((l.rows(), l.cols()), (8, 8));
}

#[test]
fn lift_spec_from_bounds() {
    let shape = Shape::new(3, 3).unwrap();
    let mut b = BoundsGrid::unbounded(shape);
    b.set((0, 0), CellBound::AtMost(0)).unwrap();
    b.set((1, 2), CellBound::AtMost(4)).unwrap();
    let spec = LiftSpec::from_bounds(design(3, 3), &b).unwrap();
    assert_eq!(spec.bounded_cells(), &[0, 5]);
    assert_eq!(spec.zeros(), &[0]);
    let u = universal_markov_basis(&spec, &UniversalOptions::default()).unwrap();
    assert!(u.moves.iter().all(|m| m.delta(0) == 0));
    assert!(u.removed_by_zeros > 0);
    assert!(LiftSpec::new(design(2, 2), vec![4]).is_err());
}

#[test]
fn unbounded_universal_basis_is_the_basic_moves() {
    let shape = Shape::new(3, 3).unwrap();
    let u = universal_markov_basis(&LiftSpec::new(design(3, 3), vec![]).unwrap(), &UniversalOptions::default()).unwrap();
    let basic = MoveSet::new(9, basic_moves(shape).iter().cloned()).unwrap();
    assert_eq!(u.moves, basic);
}

#[test]
fn universal_basis_depends_on_term_order_only_for_partial_bounds() {
    let a = design(3, 3);
    let full = LiftSpec::all_bounded(a.clone());
    let partial = LiftSpec::new(a, vec![0]).unwrap();
    let with = |spec: &LiftSpec, order: TermOrder| {
        universal_markov_basis(spec, &UniversalOptions { norm_cap: DEFAULT_NORM_CAP, order: Some(order) })
            .unwrap()
            .moves
    };
    assert_eq!(with(&full, TermOrder::DegRevLex), with(&full, TermOrder::seeded(7, 9)));
    assert_eq!(with(&partial, TermOrder::default_for(9)).len(), 10);
    assert_eq!(with(&partial, TermOrder::DegRevLex).len(), 9);
    assert!(matches!(
        universal_markov_basis(&full, &UniversalOptions { norm_cap: 64, order: Some(TermOrder::seeded(1, 4)) }),
        Err(Error::Dimension { .. })
    ));
}

#[test]
fn circuit_subset_limit_refuses() {
    let err = circuits_general(&design(4, 4), 100).unwrap_err();
    assert!(err.is_cap_exceeded());
    assert!(circuits_general(&IntMatrix::identity(5), 1).unwrap().is_empty());
}
