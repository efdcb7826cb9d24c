use super::*;
use crate::symplectic::{rotation, standard_path};

fn rot_path(c0: f64, c1: f64) -> PiecewisePath {
    PiecewisePath::smooth(
        1,
        Arc::new(move |t| rotation(c0 + (c1 - c0) * t)),
        Arc::new(move |t| j_matrix(1) * rotation(c0 + (c1 - c0) * t) * (c1 - c0)),
    )
}

#[test]
fn anchors() {
    let w1 = UnitCircleParam::one();
    // R(πt) from I to −I
    assert_eq!(maslov_index(&rot_path(0.0, PI), w1).unwrap(), IndexPair { i: 1, nu: 0 });
    for m in 1..=3 {
        let c = PiecewisePath::constant(Mat::identity(2 * m, 2 * m));
        assert_eq!(
            maslov_index(&c, w1).unwrap(),
            IndexPair {
                i: -(m as i64),
                nu: 2 * m
            }
        );
        assert_eq!(maslov_index(&c, UnitCircleParam::new(1.0)).unwrap(), IndexPair { i: 0, nu: 0 });
    }
}

#[test]
fn rotations_at_various_omega() {
    // R(ct) from I: crossings at t = θ/c for ω = e^{iθ}, each counting one
    let w = UnitCircleParam::new(1.0);
    assert_eq!(maslov_index(&rot_path(0.0, 3.0), w).unwrap().i, 1);
    // 8t ∈ {1, 2π − 1, 2π + 1}
    assert_eq!(maslov_index(&rot_path(0.0, 8.0), w).unwrap().i, 3);
    assert_eq!(maslov_index(&rot_path(0.0, -3.0), w).unwrap().i, -1);
    let wm = UnitCircleParam::minus_one();
    assert_eq!(maslov_index(&rot_path(0.0, 4.0), wm).unwrap().i, 2);
    assert_eq!(maslov_index(&rot_path(0.0, PI), wm).unwrap(), IndexPair { i: 0, nu: 2 });
    assert_eq!(maslov_index(&rot_path(0.0, 2.0 * PI), UnitCircleParam::one()).unwrap(), IndexPair { i: 1, nu: 2 });
}

#[test]
fn standard_paths_have_index_j() {
    let w1 = UnitCircleParam::one();
    for m in 1..=3 {
        for j in -3..=4 {
            let p = standard_path(m, j).unwrap().to_path();
            let got = maslov_index(&p, w1).unwrap();
            assert_eq!(got, IndexPair { i: j, nu: 0 }, "m {m} j {j}");
        }
    }
}

#[test]
fn refinement_is_stable() {
    let w = UnitCircleParam::new(0.4);
    let p = standard_path(2, 3).unwrap().to_path();
    let coarse = maslov_index_detailed(&p, w, &ScanConfig::default()).unwrap().pair;
    let fine = maslov_index_detailed(
        &p,
        w,
        &ScanConfig {
            samples_per_segment: 256,
            ..ScanConfig::default()
        },
    )
    .unwrap()
    .pair;
    assert_eq!(coarse, fine);
}

#[test]
fn regular_crossings_are_classified() {
    let recs = crossing_scan(&rot_path(0.0, 3.0), UnitCircleParam::new(1.0), &ScanConfig::default()).unwrap();
    assert_eq!(recs.len(), 1);
    let r = &recs[0];
    assert_eq!(r.resolution, Resolution::Regular);
    assert_eq!(r.kernel_dim, 1);
    assert_eq!(r.contribution, 1);
    assert!((r.t_star - 1.0 / 3.0).abs() < 1e-9);
}

#[test]
fn diamond_additivity() {
    let w = UnitCircleParam::new(0.7);
    let a = standard_path(1, 2).unwrap().to_path();
    let b = rot_path(0.0, -5.0);
    let ab = a.diamond(&b).unwrap();
    let ia = maslov_index(&a, w).unwrap();
    let ib = maslov_index(&b, w).unwrap();
    let iab = maslov_index(&ab, w).unwrap();
    assert_eq!(iab.i, ia.i + ib.i);
    assert_eq!(iab.nu, ia.nu + ib.nu);
}

#[test]
fn perturbation_difference_is_nullity() {
    let w1 = UnitCircleParam::one();
    let cfg = ScanConfig::default();
    for (path, nu) in [
        (PiecewisePath::constant(Mat::identity(2, 2)), 2i64),
        (rot_path(0.0, 2.0 * PI), 2),
        (PiecewisePath::constant(Mat::identity(4, 4)), 4),
    ] {
        let pairs = perturbation_pair(&path, w1, &PerturbationSpec::default(), &cfg).unwrap();
        for (plus, minus) in pairs {
            assert_eq!(plus - minus, nu);
        }
    }
}

#[test]
fn endpoint_splitting_of_identity() {
    let sp = splitting_endpoint(
        &PiecewisePath::constant(Mat::identity(2, 2)),
        UnitCircleParam::one(),
        1e-3,
        &ScanConfig::default(),
    )
    .unwrap();
    assert_eq!((sp.s_plus, sp.s_minus), (1, 1));
}

#[test]
fn inserted_loops() {
    let w = UnitCircleParam::new(2.0);
    let base = standard_path(1, 3).unwrap().to_path();
    let i0 = maslov_index(&base, w).unwrap();
    let s = nalgebra::dmatrix![1.0, 0.3; 0.3, 2.0];
    let bumped = with_inserted_loop(&base, 0.2, 0.6, &s, false);
    assert_eq!(maslov_index(&bumped, w).unwrap(), i0);
    let wound = with_inserted_loop(&base, 0.2, 0.6, &s, true);
    assert_eq!(maslov_index(&wound, w).unwrap().i, i0.i + 2);
}
