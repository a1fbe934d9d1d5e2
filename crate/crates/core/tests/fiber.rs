use tabmoves::fiber::{canonical_pattern, classify_pattern, pattern_search, zero_patterns, PatternStatus};
use tabmoves::*;

fn fiber_through(rows: &[[u32; 3]], bounds: Option<BoundsGrid>) -> Fiber {
    let t = Table::from_rows(rows).unwrap();
    let b = bounds.unwrap_or_else(|| BoundsGrid::unbounded(t.shape()));
    let spec = FiberSpec::through(two_way_design(t.shape()), &t, b).unwrap();
    enumerate_fiber(&spec, 100_000).unwrap()
}

#[test]
fn small_fiber_sizes() {
    let f = fiber_through(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]], None);
    assert_eq!(f.len(), 6);
    let f = fiber_through(&[[1, 1, 1], [1, 1, 1], [1, 1, 1]], None);
    assert_eq!(f.len(), 55);
    let f = fiber_through(&[[1, 1, 1], [1, 1, 1], [1, 1, 1]], Some(BoundsGrid::uniform(Shape::new(3, 3).unwrap(), 1)));
    assert_eq!(f.len(), 1);
}

#[test]
fn enumeration_is_sorted_and_unique() {
    let f = fiber_through(&[[2, 1, 0], [0, 1, 3], [1, 0, 1]], None);
    assert!(f.tables().windows(2).all(|w| w[0].counts() < w[1].counts()));
    for t in f.tables() {
        assert!(f.spec().contains(t));
        assert_eq!(f.index_of(t).map(|i| &f.tables()[i]), Some(t));
    }
}

#[test]
fn enumeration_cap_is_an_error() {
    let t = Table::from_rows(&[[3, 3, 3], [3, 3, 3], [3, 3, 3]]).unwrap();
    let spec = FiberSpec::through(two_way_design(t.shape()), &t, BoundsGrid::unbounded(t.shape())).unwrap();
    assert!(enumerate_fiber(&spec, 10).unwrap_err().is_cap_exceeded());
}

#[test]
fn infeasible_target_gives_empty_fiber() {
    let shape = Shape::new(2, 2).unwrap();
    let spec = FiberSpec::new(two_way_design(shape), vec![2, 0, 1, 0], BoundsGrid::unbounded(shape)).unwrap();
    assert!(enumerate_fiber(&spec, 10).unwrap().is_empty());
}

#[test]
fn basic_moves_connect_unbounded_fibers() {
    let shape = Shape::new(3, 3).unwrap();
    for rows in [[[1, 0, 0], [0, 1, 0], [0, 0, 1]], [[2, 1, 0], [0, 1, 3], [1, 0, 1]]] {
        let r = connectivity(&fiber_through(&rows, None), &basic_moves(shape)).unwrap();
        assert!(r.is_connected());
        assert_eq!(r.escaped, 0);
    }
}

#[test]
fn diagonal_zero_fiber_splits_under_basic_moves() {
    let shape = Shape::new(3, 3).unwrap();
    let zeros = [(0, 0), (1, 1), (2, 2)];
    let f = fiber_through(&[[0, 1, 0], [0, 0, 1], [1, 0, 0]], Some(BoundsGrid::with_zeros(shape, &zeros).unwrap()));
    assert_eq!(f.len(), 2);
    let basic = filter_structural_zeros(&basic_moves(shape), shape, &zeros).unwrap();
    let r = connectivity(&f, &basic).unwrap();
    assert_eq!(r.component_count, 2);
    assert!(r.witness.is_some());
    let circuits = filter_structural_zeros(&circuit_moves(shape), shape, &zeros).unwrap();
    assert!(connectivity(&f, &circuits).unwrap().is_connected());
}

#[test]
fn adding_moves_never_adds_components() {
    let shape = Shape::new(3, 3).unwrap();
    let f = fiber_through(&[[2, 0, 1], [0, 2, 1], [1, 1, 0]], Some(BoundsGrid::uniform(shape, 2)));
    let circuits = circuit_moves(shape);
    let mut prefix = MoveSet::empty(9);
    let mut last = f.len();
    for m in circuits.iter() {
        prefix = prefix.union(&MoveSet::new(9, [m.clone()]).unwrap()).unwrap();
        let c = connectivity(&f, &prefix).unwrap().component_count;
        assert!(c <= last);
        last = c;
    }
    assert_eq!(last, 1);
}

#[test]
fn moves_outside_kernel_are_counted_as_escapes() {
    let shape = Shape::new(3, 3).unwrap();
    let f = fiber_through(&[[1, 0, 0], [0, 1, 0], [0, 0, 1]], None);
    let bogus = MoveSet::new(9, [Move::from_sparse([(0, 1), (1, -1)]).unwrap()]).unwrap();
    let r = connectivity(&f, &bogus).unwrap();
    assert_eq!(r.component_count, f.len());
    assert!(r.escaped > 0);
    assert!(connectivity(&f, &MoveSet::empty(4)).is_err());
    let _ = shape;
}

#[test]
fn bounded_three_by_three_verification() {
    let shape = Shape::new(3, 3).unwrap();
    let family = [BoundsGrid::uniform(shape, 1), BoundsGrid::uniform(shape, 2)];
    let circuits = MoveSet::new(9, circuit_moves(shape).iter().cloned()).unwrap();
    let v = verify_subbasis(&two_way_design(shape), shape, &circuits, &family, &VerifyOptions::default()).unwrap();
    assert_eq!(v.status, VerifyStatus::ConnectedUpToCap);
    assert!(v.fibers_checked > 0);
    let basic = basic_moves(shape);
    let v = verify_subbasis(&two_way_design(shape), shape, &basic, &family[..1], &VerifyOptions::default()).unwrap();
    assert_eq!(v.status, VerifyStatus::ConnectedUpToCap);
    let diagonal = [BoundsGrid::with_zeros(shape, &[(0, 0), (1, 1), (2, 2)]).unwrap()];
    let v = verify_subbasis(&two_way_design(shape), shape, &basic, &diagonal, &VerifyOptions::default()).unwrap();
    assert_eq!(v.status, VerifyStatus::Disconnected);
    let w = v.witness.unwrap();
    assert!(w.component_count >= 2);
    assert_ne!(w.first, w.second);
}

#[test]
fn fiber_size_cap_reports_inconclusive() {
    let shape = Shape::new(3, 3).unwrap();
    let opts = VerifyOptions {
        margin_total_cap: 6,
        require_positive_margins: false,
        fiber_size_cap: 3,
    };
    let v = verify_subbasis(&two_way_design(shape), shape, &basic_moves(shape), &[BoundsGrid::unbounded(shape)], &opts).unwrap();
    assert_eq!(v.status, VerifyStatus::Inconclusive);
    assert!(!v.inconclusive.is_empty());
}

#[test]
fn canonical_patterns_are_permutation_invariant() {
    let shape = Shape::new(3, 4).unwrap();
    let z = [(0, 1), (2, 3), (1, 1)];
    let swapped: Vec<Cell> = z.iter().map(|&(i, j)| (2 - i, [3, 2, 1, 0][j])).collect();
    assert_eq!(canonical_pattern(shape, &z), canonical_pattern(shape, &swapped));
    let c = canonical_pattern(shape, &z);
    assert_eq!(canonical_pattern(shape, &c), c);
}

#[test]
fn three_by_three_pattern_classes() {
    let shape = Shape::new(3, 3).unwrap();
    assert_eq!(zero_patterns(shape, 1, 1).len(), 1);
    assert_eq!(zero_patterns(shape, 2, 2).len(), 3);
    let opts = VerifyOptions::default();
    for v in pattern_search(shape, 1, 2, &opts).unwrap() {
        assert_eq!(v.status, PatternStatus::ConnectedUpToCap, "{:?}", v.zeros);
    }
    let three = pattern_search(shape, 3, 3, &opts).unwrap();
    let bad: Vec<_> = three.iter().filter(|v| v.status == PatternStatus::Disconnected).collect();
    assert_eq!(bad.len(), 1);
    assert_eq!(bad[0].zeros, vec![(0, 0), (1, 1), (2, 2)]);
}

#[test]
fn transversal_supersets_leave_only_singleton_fibers() {
    let shape = Shape::new(3, 3).unwrap();
    let opts = VerifyOptions::default();
    for v in pattern_search(shape, 4, 4, &opts).unwrap() {
        assert_eq!(v.status, PatternStatus::ConnectedUpToCap, "{:?}", v.zeros);
    }
}

#[test]
fn pattern_verdicts_agree_across_representatives() {
    let shape = Shape::new(3, 4).unwrap();
    let design = two_way_design(shape);
    let moves = basic_moves(shape);
    let opts = VerifyOptions {
        margin_total_cap: 5,
        ..VerifyOptions::default()
    };
    let z = vec![(0, 0), (1, 1), (2, 2)];
    let conj: Vec<Cell> = z.iter().map(|&(i, j)| ((i + 1) % 3, [2, 3, 0, 1][j])).collect();
    assert_eq!(canonical_pattern(shape, &z), canonical_pattern(shape, &conj));
    let a = classify_pattern(shape, &design, &moves, z, &opts).unwrap();
    let b = classify_pattern(shape, &design, &moves, conj, &opts).unwrap();
    assert_eq!(a.status, b.status);
}

#[test]
fn general_design_verification() {
    let shape = Shape::flat(4).unwrap();
    let design = DesignMatrix::from_rows(&[[1u32, 1, 1, 1], [0, 1, 2, 3]]).unwrap();
    let a = IntMatrix::from(&design);
    let g = graver_basis(&a, 64).unwrap();
    let opts = VerifyOptions {
        margin_total_cap: 6,
        ..VerifyOptions::default()
    };
    let v = verify_subbasis(&design, shape, &g, &[BoundsGrid::unbounded(shape)], &opts).unwrap();
    assert_eq!(v.status, VerifyStatus::ConnectedUpToCap);
    let one = MoveSet::new(4, [g.get(0).clone()]).unwrap();
    let v = verify_subbasis(&design, shape, &one, &[BoundsGrid::unbounded(shape)], &opts).unwrap();
    assert_eq!(v.status, VerifyStatus::Disconnected);
}
