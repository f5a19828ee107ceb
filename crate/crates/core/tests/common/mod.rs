#![allow(dead_code)]

//! Independent reference implementations used by the integration tests:
//! Hamiltonians assembled from explicit Kronecker products of 2x2 Pauli
//! matrices, and a cyclic Jacobi eigensolver.

use nalgebra::{Complex, DMatrix};
use qelm::reservoir::*;

pub type C = Complex<f64>;
pub type M = DMatrix<C>;

pub fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

pub fn eye2() -> M {
    M::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])
}
pub fn px() -> M {
    M::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}
pub fn py() -> M {
    M::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}
pub fn pz() -> M {
    M::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// `P_0 ⊗ P_1 ⊗ … ⊗ P_{n-1}` with qubit 0 leftmost (most significant).
pub fn string(n: usize, ops: &[(usize, M)]) -> M {
    let mut out = M::from_element(1, 1, c(1., 0.));
    for q in 0..n {
        let f = ops
            .iter()
            .find(|(i, _)| *i == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(eye2);
        out = out.kronecker(&f);
    }
    out
}

pub fn zeros(n: usize) -> M {
    M::zeros(1 << n, 1 << n)
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

fn chain(n: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut b: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
    if periodic && n >= 3 {
        b.push((n - 1, 0));
    }
    b
}

pub fn oracle_h1(n: usize) -> (M, M) {
    let mut a = zeros(n);
    for i in 0..n {
        a += string(n, &[(i, px())]) * c(3.05, 0.);
    }
    let mut b = zeros(n);
    for (i, j) in pairs(n) {
        let jij = 0.06 / ((j - i) as f64).powf(1.51);
        b += string(n, &[(i, pz()), (j, pz())]) * c(jij, 0.);
    }
    (a, b)
}

pub fn oracle_h2(n: usize, couplings: &[f64], fields: &[f64]) -> M {
    let mut h = zeros(n);
    for ((i, j), &jij) in pairs(n).iter().zip(couplings) {
        h += string(n, &[(*i, pz()), (*j, pz())]) * c(jij, 0.);
    }
    for (i, &b) in fields.iter().enumerate() {
        h += string(n, &[(i, px())]) * c(b, 0.);
    }
    h
}

pub fn oracle_h3(n: usize) -> M {
    let mut h = zeros(n);
    for (i, j) in chain(n, false) {
        h += string(n, &[(i, pz()), (j, pz())]) * c(-1., 0.);
    }
    for i in 0..n {
        h += string(n, &[(i, pz())]) * c(1.5, 0.) + string(n, &[(i, px())]) * c(0.7, 0.);
    }
    h
}

pub fn oracle_h4(n: usize, periodic: bool) -> M {
    let mut h = zeros(n);
    for (i, j) in chain(n, periodic) {
        h += string(n, &[(i, px()), (j, px())]) * c(2., 0.);
        h += string(n, &[(i, py()), (j, py())]) * c(2., 0.);
        h += string(n, &[(i, pz()), (j, pz())]) * c(0.54, 0.);
    }
    for i in 0..n {
        h += string(n, &[(i, pz())]) * c(0.54, 0.);
    }
    h * c(-0.5, 0.)
}

pub fn oracle_h5(n: usize, periodic: bool) -> M {
    let mut h = zeros(n);
    for (i, j) in chain(n, periodic) {
        h += string(n, &[(i, px()), (j, px())]) + string(n, &[(i, py()), (j, py())]);
    }
    h * c(0.5, 0.)
}

pub fn oracle_h6(n: usize, field: f64, couplings: &[f64], disorder: &[f64]) -> M {
    let mut h = zeros(n);
    for ((i, j), &jij) in pairs(n).iter().zip(couplings) {
        h += string(n, &[(*i, px()), (*j, px())]) * c(jij, 0.);
    }
    for (i, &d) in disorder.iter().enumerate() {
        h += string(n, &[(i, pz())]) * c(0.5 * (field + d), 0.);
    }
    h
}

/// Reference matrix for a static family, with the same random draws the
/// library uses for `seed`.
pub fn oracle_static(kind: HamiltonianKind, n: usize, seed: u64, periodic: bool) -> M {
    match kind {
        HamiltonianKind::H1 => panic!("H1 is a pair"),
        HamiltonianKind::H2 | HamiltonianKind::H2NoCoupling => {
            let cpl = TransverseIsingCouplings::sample(n, seed, kind == HamiltonianKind::H2NoCoupling);
            oracle_h2(n, &cpl.pair_couplings, &cpl.fields)
        }
        HamiltonianKind::H3 => oracle_h3(n),
        HamiltonianKind::H4 => oracle_h4(n, periodic),
        HamiltonianKind::H5 => oracle_h5(n, periodic),
        HamiltonianKind::H6(regime) => {
            let (field, width) = regime.field_and_width();
            let d = DisorderedCouplings::sample(n, width, seed);
            oracle_h6(n, field, &d.pair_couplings, &d.disorder)
        }
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// ascending.
pub fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Spectrum of a Hermitian `H = A + iB` via the real symmetric embedding
/// `[[A, -B], [B, A]]`, whose eigenvalues are those of `H`, each twice.
pub fn oracle_spectrum(h: &M) -> Vec<f64> {
    let n = h.nrows();
    let emb = DMatrix::from_fn(2 * n, 2 * n, |r, col| {
        let (i, j) = (r % n, col % n);
        match (r < n, col < n) {
            (true, true) | (false, false) => h[(i, j)].re,
            (true, false) => -h[(i, j)].im,
            (false, true) => h[(i, j)].im,
        }
    });
    jacobi_eigenvalues(emb).into_iter().step_by(2).collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn matrix_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
