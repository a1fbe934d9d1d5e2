use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tabmoves::*;

fn shape_strategy() -> impl Strategy<Value = Shape> {
    (2usize..=4, 2usize..=4).prop_map(|(r, c)| Shape::new(r, c).unwrap())
}

fn sparse_vector() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, 1..12).prop_filter("nonzero", |v| v.iter().any(|&x| x != 0))
}

proptest! {
    #[test]
    fn canonical_form_is_idempotent_and_sign_blind(v in sparse_vector()) {
        let m = Move::from_dense(&v).unwrap();
        let neg: Vec<i64> = v.iter().map(|x| -x).collect();
        prop_assert_eq!(&Move::from_dense(&neg).unwrap(), &m);
        prop_assert_eq!(&Move::from_dense(&m.to_dense(v.len())).unwrap(), &m);
        prop_assert!(m.entries()[0].1 > 0);
        prop_assert_eq!(m.l1_norm(), m.entries().iter().map(|e| e.1.unsigned_abs() as u64).sum::<u64>());
    }

    #[test]
    fn margins_are_linear(shape in shape_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = shape.cells();
        let a: Vec<u32> = (0..k).map(|_| rng.random_range(0..5)).collect();
        let b: Vec<u32> = (0..k).map(|_| rng.random_range(0..5)).collect();
        let sum: Vec<u32> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let d = two_way_design(shape);
        let ma = margins(&Table::new(shape, a).unwrap(), &d).unwrap();
        let mb = margins(&Table::new(shape, b).unwrap(), &d).unwrap();
        let ms = margins(&Table::new(shape, sum).unwrap(), &d).unwrap();
        prop_assert_eq!(ms, ma.iter().zip(&mb).map(|(x, y)| x + y).collect::<Vec<_>>());
    }

    #[test]
    fn random_loops_preserve_margins(shape in shape_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = rng.random_range(2..=shape.rows.min(shape.cols));
        let mut rows: Vec<usize> = (0..shape.rows).collect();
        let mut cols: Vec<usize> = (0..shape.cols).collect();
        rand::seq::SliceRandom::shuffle(rows.as_mut_slice(), &mut rng);
        rand::seq::SliceRandom::shuffle(cols.as_mut_slice(), &mut rng);
        let m = loop_move(shape, &rows[..s], &cols[..s]).unwrap();
        prop_assert!(two_way_design(shape).annihilates(&m.to_dense(shape.cells())));
        prop_assert!(circuit_moves(shape).contains(&m));
    }

    #[test]
    fn applied_moves_stay_in_fiber(shape in shape_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let counts: Vec<u32> = (0..shape.cells()).map(|_| rng.random_range(0..3)).collect();
        let t = Table::new(shape, counts).unwrap();
        let bounds = BoundsGrid::uniform(shape, 3);
        let spec = FiberSpec::through(two_way_design(shape), &t, bounds.clone()).unwrap();
        for m in basic_moves(shape).iter() {
            for sign in Sign::BOTH {
                if let Some(n) = apply_move(&t, m, sign, &bounds).unwrap() {
                    prop_assert!(spec.contains(&n));
                }
            }
        }
    }

    #[test]
    fn graver_elements_are_primitive(rows in prop::collection::vec(prop::collection::vec(0i64..=2, 4), 1..=2)) {
        let a = IntMatrix::from_rows(&rows).unwrap();
        match graver_basis(&a, 24) {
            Ok(g) => {
                for m in g.iter() {
                    let v = m.to_dense(4);
                    prop_assert!(a.annihilates(&v));
                    prop_assert_eq!(v.iter().fold(0i64, |g, &x| num_gcd(g, x)), 1);
                }
            }
            Err(e) => prop_assert!(e.is_cap_exceeded()),
        }
    }

    #[test]
    fn structural_zero_filter_avoids_zeros(shape in shape_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let zeros: Vec<Cell> = (0..2).map(|_| (rng.random_range(0..shape.rows), rng.random_range(0..shape.cols))).collect();
        let kept = filter_structural_zeros(&circuit_moves(shape), shape, &zeros).unwrap();
        for m in kept.iter() {
            for &z in &zeros {
                prop_assert_eq!(m.delta(shape.index(z)), 0);
            }
        }
    }
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { num_gcd(b, a % b) }
}

fn random_bounds(shape: Shape, rng: &mut ChaCha8Rng) -> BoundsGrid {
    let cells = (0..shape.cells())
        .map(|_| match rng.random_range(0..4) {
            3 => CellBound::Unbounded,
            b => CellBound::AtMost(b),
        })
        .collect();
    BoundsGrid::new(shape, cells).unwrap()
}

/// The universal basis of a bounds grid connects every fiber of that grid.
#[test]
fn universal_basis_connects_random_bounded_fibers() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = VerifyOptions {
        margin_total_cap: 6,
        ..VerifyOptions::default()
    };
    for (r, c, grids) in [(2, 2, 40), (2, 3, 40), (3, 3, 25)] {
        let shape = Shape::new(r, c).unwrap();
        let design = two_way_design(shape);
        for _ in 0..grids {
            let bounds = random_bounds(shape, &mut rng);
            let spec = LiftSpec::from_bounds(IntMatrix::from(&design), &bounds).unwrap();
            let u = universal_markov_basis(&spec, &UniversalOptions::default()).unwrap();
            let v = verify_subbasis(&design, shape, &u.moves, std::slice::from_ref(&bounds), &opts).unwrap();
            assert_eq!(v.status, VerifyStatus::ConnectedUpToCap, "{shape} {:?}", bounds.bounds());
        }
    }
}
