//! Independent reference computations built on nalgebra.
#![allow(dead_code)]

use nalgebra::DMatrix;
use qexpander::{Complex64, ComplexMatrix, MixedUnitaryEnsemble};

pub fn to_na(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

/// `(1/D) sum U (x) conj(U)`: the channel acting on row-major `vec(X)`.
pub fn natural_superoperator(g: &MixedUnitaryEnsemble) -> DMatrix<Complex64> {
    let n = g.dim();
    let mut s = DMatrix::<Complex64>::zeros(n * n, n * n);
    for u in g.unitaries() {
        let a = to_na(u);
        s += a.kronecker(&a.conjugate());
    }
    s / Complex64::new(g.degree() as f64, 0.0)
}

/// Largest singular value of the channel with the `I/sqrt(N)` direction
/// removed, which is the norm on the traceless subspace for a unital,
/// trace-preserving channel.
pub fn lambda_oracle(g: &MixedUnitaryEnsemble) -> f64 {
    let n = g.dim();
    let mut s = natural_superoperator(g);
    for i in 0..n {
        for j in 0..n {
            s[(i * n + i, j * n + j)] -= Complex64::new(1.0 / n as f64, 0.0);
        }
    }
    s.singular_values().max()
}

/// Conjugation distance from the eigenphases of `U^dag V` (2x2 only):
/// `max_{j,k} |1 - exp(i(theta_j - theta_k))|`.
pub fn conjugation_distance_2x2(u: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    assert_eq!(u.rows(), 2);
    let w = u.adjoint().matmul(v);
    let tr = w[(0, 0)] + w[(1, 1)];
    let det = w[(0, 0)] * w[(1, 1)] - w[(0, 1)] * w[(1, 0)];
    let disc = (tr * tr - det * 4.0).sqrt();
    let e1 = (tr + disc) / 2.0;
    let e2 = (tr - disc) / 2.0;
    let phase = (e1 / e1.norm()) * (e2 / e2.norm()).conj();
    (Complex64::new(1.0, 0.0) - phase).norm()
}

/// Second largest singular value of a doubly stochastic walk matrix, i.e.
/// its norm on vectors orthogonal to the all-ones vector.
pub fn classical_second_singular_value(walk: &DMatrix<f64>) -> f64 {
    let n = walk.nrows();
    let centered = walk - DMatrix::from_element(n, n, 1.0 / n as f64);
    centered.singular_values().max()
}

pub fn walk_matrix(perms: &[Vec<usize>]) -> DMatrix<f64> {
    let n = perms[0].len();
    let mut a = DMatrix::zeros(n, n);
    for p in perms {
        for (i, &j) in p.iter().enumerate() {
            a[(j, i)] += 1.0 / perms.len() as f64;
        }
    }
    a
}

pub fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
