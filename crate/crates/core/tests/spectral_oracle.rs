mod common;

use common::*;
use qelm::linalg::hermitian_spectrum;
use qelm::reservoir::*;

const TOL: f64 = 1e-9;

fn static_kinds() -> Vec<HamiltonianKind> {
    HamiltonianKind::ALL
        .into_iter()
        .filter(|k| !k.is_floquet())
        .collect()
}

#[test]
fn jacobi_oracle_sanity() {
    let a = nalgebra::DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
    let ev = jacobi_eigenvalues(a);
    let s = 2f64.sqrt();
    assert!(max_diff(&ev, &[2.0 - s, 2.0, 2.0 + s]) < 1e-12);
    // complex embedding: Y has spectrum ±1
    assert!(max_diff(&oracle_spectrum(&py()), &[-1.0, 1.0]) < 1e-12);
}

#[test]
fn library_matrices_equal_kronecker_construction() {
    for n in 1..=3 {
        for kind in static_kinds() {
            for periodic in [false, true] {
                let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
                let h = build_static(kind, n, 7, boundary).unwrap();
                let o = oracle_static(kind, n, 7, periodic);
                assert!(matrix_diff(h.matrix(), &o) < 1e-12, "{kind} N={n} periodic={periodic}");
            }
        }
        if n >= 2 {
            let (a, b) = build_h1_pair(n).unwrap();
            let (oa, ob) = oracle_h1(n);
            assert!(matrix_diff(a.matrix(), &oa) < 1e-12);
            assert!(matrix_diff(b.matrix(), &ob) < 1e-12);
        }
    }
}

#[test]
fn every_family_matches_oracle_spectrum_up_to_three_qubits() {
    for n in 1..=3 {
        for seed in [0u64, 1, 42] {
            for kind in static_kinds() {
                let h = build_static(kind, n, seed, Boundary::Open).unwrap();
                let ours = hermitian_spectrum(h.matrix()).unwrap();
                let oracle = oracle_spectrum(&oracle_static(kind, n, seed, false));
                let d = max_diff(&ours, &oracle);
                assert!(d < TOL, "{kind} N={n} seed={seed}: {d:e}");
            }
        }
        if n >= 2 {
            let (a, b) = build_h1_pair(n).unwrap();
            let (oa, ob) = oracle_h1(n);
            assert!(max_diff(&hermitian_spectrum(a.matrix()).unwrap(), &oracle_spectrum(&oa)) < TOL);
            assert!(max_diff(&hermitian_spectrum(b.matrix()).unwrap(), &oracle_spectrum(&ob)) < TOL);
        }
    }
}

#[test]
fn xx_pair_spectrum() {
    let h = build_h5(2, Boundary::Open).unwrap();
    let ev = hermitian_spectrum(h.matrix()).unwrap();
    assert!(max_diff(&ev, &[-1.0, 0.0, 0.0, 1.0]) < TOL);
    assert!(max_diff(&oracle_spectrum(&oracle_h5(2, false)), &[-1.0, 0.0, 0.0, 1.0]) < TOL);
}

#[test]
fn h5_three_site_spectrum_is_symmetric() {
    let ev = hermitian_spectrum(build_h5(3, Boundary::Open).unwrap().matrix()).unwrap();
    let mirrored: Vec<f64> = ev.iter().rev().map(|x| -x).collect();
    assert!(max_diff(&ev, &mirrored) < TOL);
}

#[test]
fn h3_single_site_closed_form() {
    let ev = hermitian_spectrum(build_h3(1).unwrap().matrix()).unwrap();
    let r = (1.5f64 * 1.5 + 0.7 * 0.7).sqrt();
    assert!(max_diff(&ev, &[-r, r]) < TOL);
}

#[test]
fn h2_with_fixed_couplings_matches_oracle() {
    let c = TransverseIsingCouplings::uniform(2, 0.75, 1.0);
    let h = build_h2_from(2, &c, ParamRecord::new("h2", None)).unwrap();
    let oracle = oracle_spectrum(&oracle_h2(2, &[0.75], &[1.0, 1.0]));
    assert!(max_diff(&hermitian_spectrum(h.matrix()).unwrap(), &oracle) < TOL);
}

#[test]
fn h1_couplings_fixture() {
    // 0.06 * 2^-1.51 from a 30-digit decimal evaluation
    const J02: f64 = 0.021_066_673_136_069_958;
    assert!((h1_coupling(0, 1) - 0.06).abs() < 1e-15);
    assert!((h1_coupling(0, 2) - J02).abs() < 1e-15);
    assert!((0.06 * 2f64.powf(-1.51) - J02).abs() < 1e-15);
    let (a, _) = build_h1_pair(2).unwrap();
    let ev = hermitian_spectrum(h1_drive(1).unwrap().matrix()).unwrap();
    assert!(max_diff(&ev, &[-3.05, 3.05]) < 1e-12);
    assert_eq!(a.n_qubits(), 2);
}
