//! D-regular mixed-unitary superoperators.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, UnitaryMatrix, DEFAULT_DIM_CAP};

/// `G(X) = (1/D) sum_d U_d X U_d^dag` with uniform weights.
///
/// The order of `unitaries` is part of the value: squaring, tensoring and the
/// Zig-Zag product emit their Kraus lists in a fixed canonical order so that
/// serialized ensembles are reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedUnitaryEnsemble {
    dim: usize,
    unitaries: Vec<UnitaryMatrix>,
    label: String,
}

/// The completely mixed state `I / dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaximallyMixed {
    pub dim: usize,
}

impl MaximallyMixed {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0);
        Self { dim }
    }

    pub fn to_matrix(self) -> ComplexMatrix {
        ComplexMatrix::maximally_mixed(self.dim)
    }
}

impl MixedUnitaryEnsemble {
    pub fn new(unitaries: Vec<UnitaryMatrix>, label: impl Into<String>) -> Result<Self> {
        let dim = unitaries.first().ok_or(Error::EmptyEnsemble)?.dim();
        for (index, u) in unitaries.iter().enumerate() {
            if u.dim() != dim {
                return Err(Error::InvalidKraus {
                    index,
                    source: Box::new(Error::DimensionMismatch {
                        op: "ensemble",
                        left_rows: dim,
                        left_cols: dim,
                        right_rows: u.rows(),
                        right_cols: u.cols(),
                    }),
                });
            }
        }
        Ok(Self {
            dim,
            unitaries,
            label: label.into(),
        })
    }

    /// Validates every matrix as unitary; failures name the offending index.
    pub fn from_matrices(matrices: Vec<ComplexMatrix>, label: impl Into<String>) -> Result<Self> {
        let unitaries = matrices
            .into_iter()
            .enumerate()
            .map(|(index, m)| {
                UnitaryMatrix::new(m).map_err(|e| Error::InvalidKraus {
                    index,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(unitaries, label)
    }

    /// Degree-1 ensemble `{I}`.
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            unitaries: vec![UnitaryMatrix::identity(dim)],
            label: format!("identity({dim})"),
        }
    }

    /// `{I, X, Y, Z}` on one qubit: the completely depolarizing channel.
    pub fn pauli() -> Self {
        let unitaries = ['I', 'X', 'Y', 'Z']
            .into_iter()
            .map(|p| UnitaryMatrix::from_trusted(linalg::pauli(p)))
            .collect();
        Self {
            dim: 2,
            unitaries,
            label: "pauli".into(),
        }
    }

    /// Permutation unitaries `P|i> = |perm[i]>`, e.g. the permutation
    /// decomposition of a regular graph.
    pub fn permutations(perms: &[Vec<usize>], label: impl Into<String>) -> Result<Self> {
        let mut unitaries = Vec::with_capacity(perms.len());
        for (index, perm) in perms.iter().enumerate() {
            let n = perm.len();
            let mut seen = vec![false; n];
            for &p in perm {
                if p >= n || std::mem::replace(&mut seen[p], true) {
                    return Err(Error::InvalidKraus {
                        index,
                        source: Box::new(Error::InvalidParameter(format!("{perm:?} is not a permutation"))),
                    });
                }
            }
            let mut m = ComplexMatrix::zeros(n, n);
            for (i, &p) in perm.iter().enumerate() {
                m[(p, i)] = linalg::ONE;
            }
            unitaries.push(UnitaryMatrix::from_trusted(m));
        }
        Self::new(unitaries, label)
    }

    /// `d` independent Haar unitaries drawn from one seeded stream.
    pub fn haar(dim: usize, degree: usize, seed: u64) -> Self {
        let mut rng = linalg::seeded_rng(seed);
        Self::haar_from_rng(dim, degree, &mut rng, format!("haar(n={dim},d={degree},seed={seed})"))
    }

    pub fn haar_from_rng<R: Rng + ?Sized>(dim: usize, degree: usize, rng: &mut R, label: String) -> Self {
        assert!(dim >= 1 && degree >= 1);
        let unitaries = (0..degree).map(|_| linalg::haar_unitary_from_rng(dim, rng)).collect();
        Self { dim, unitaries, label }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.unitaries.len()
    }

    pub fn unitaries(&self) -> &[UnitaryMatrix] {
        &self.unitaries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `(1/D) sum_d U_d X U_d^dag`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::DimensionMismatch {
                op: "apply",
                left_rows: self.dim,
                left_cols: self.dim,
                right_rows: x.rows(),
                right_cols: x.cols(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let terms = self.unitaries.iter().map(|u| x.conjugate_by(u)).collect();
        let mut sum = pairwise_sum(terms);
        sum.scale_mut(1.0 / self.degree() as f64);
        sum
    }

    /// Hilbert-Schmidt adjoint: each `U_d` replaced by `U_d^dag`.
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            unitaries: self.unitaries.iter().map(UnitaryMatrix::adjoint).collect(),
            label: format!("adjoint({})", self.label),
        }
    }

    /// `G^2` with Kraus list `U_{d2} U_{d1}` at index `d1 * D + d2`.
    pub fn square(&self) -> Self {
        let mut unitaries = Vec::with_capacity(self.degree() * self.degree());
        for first in &self.unitaries {
            for second in &self.unitaries {
                unitaries.push(second.compose(first));
            }
        }
        Self {
            dim: self.dim,
            unitaries,
            label: format!("square({})", self.label),
        }
    }

    /// `{W U_d W^dag}`: the same channel expressed in a rotated basis.
    pub fn conjugated_by(&self, w: &UnitaryMatrix) -> Result<Self> {
        if w.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                op: "conjugated_by",
                left_rows: self.dim,
                left_cols: self.dim,
                right_rows: w.rows(),
                right_cols: w.cols(),
            });
        }
        let unitaries = self
            .unitaries
            .iter()
            .map(|u| UnitaryMatrix::from_trusted(u.as_matrix().conjugate_by(w)))
            .collect();
        Ok(Self {
            dim: self.dim,
            unitaries,
            label: format!("conj({})", self.label),
        })
    }
}

/// `G1 (x) G2` with Kraus list `U_d (x) V_e` at index `d * D2 + e`.
pub fn tensor_channels(g1: &MixedUnitaryEnsemble, g2: &MixedUnitaryEnsemble) -> Result<MixedUnitaryEnsemble> {
    tensor_channels_with_cap(g1, g2, DEFAULT_DIM_CAP)
}

pub fn tensor_channels_with_cap(
    g1: &MixedUnitaryEnsemble,
    g2: &MixedUnitaryEnsemble,
    cap: usize,
) -> Result<MixedUnitaryEnsemble> {
    let dim = g1.dim.saturating_mul(g2.dim);
    if dim > cap {
        return Err(Error::CapExceeded {
            what: "tensor_channels",
            requested: dim,
            cap,
            hint: "raise --cap or work with certified bounds only",
        });
    }
    let mut unitaries = Vec::with_capacity(g1.degree() * g2.degree());
    for u in &g1.unitaries {
        for v in &g2.unitaries {
            unitaries.push(u.tensor(v, cap)?);
        }
    }
    Ok(MixedUnitaryEnsemble {
        dim,
        unitaries,
        label: format!("tensor({}, {})", g1.label, g2.label),
    })
}

/// Sums in a fixed binary-tree order: adjacent pairs, then pairs of pairs.
pub(crate) fn pairwise_sum(mut terms: Vec<ComplexMatrix>) -> ComplexMatrix {
    assert!(!terms.is_empty());
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(&a + &b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}

/// Traceless part `X - Tr(X) I / N`.
pub fn traceless_part(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.rows();
    let shift: Complex64 = x.trace() / n as f64;
    let mut out = x.clone();
    for i in 0..n {
        out[(i, i)] -= shift;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ginibre, hs_inner, seeded_rng};

    /// Hermitian PSD matrix with unit trace.
    fn random_density(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let a = ginibre(n, n, rng);
        let mut rho = a.mul_adjoint(&a);
        let t = rho.trace().re;
        rho.scale_mut(1.0 / t);
        rho
    }

    #[test]
    fn fixes_the_mixed_state() {
        for (n, d, seed) in [(2, 3, 1), (5, 4, 2), (8, 1, 3)] {
            let g = MixedUnitaryEnsemble::haar(n, d, seed);
            let mixed = MaximallyMixed::new(n).to_matrix();
            let out = g.apply(&mixed).unwrap();
            assert!((&out - &mixed).norm() <= 1e-12);
        }
    }

    #[test]
    fn identity_ensemble_is_identity_map() {
        let mut rng = seeded_rng(4);
        let x = ginibre(3, 3, &mut rng);
        let out = MixedUnitaryEnsemble::identity(3).apply(&x).unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn pauli_ensemble_kills_traceless_operators() {
        // Oracle: (1/4) sum_P P X P = Tr(X) I / 2 by expanding X in the
        // Pauli basis; each non-identity Pauli anticommutes with two of the
        // three others, so its coefficient cancels.
        let mut rng = seeded_rng(6);
        for _ in 0..10 {
            let x = traceless_part(&ginibre(2, 2, &mut rng));
            let out = MixedUnitaryEnsemble::pauli().apply(&x).unwrap();
            assert!(out.max_abs() <= 1e-14, "{out:?}");
        }
    }

    #[test]
    fn apply_rejects_wrong_dimension() {
        let g = MixedUnitaryEnsemble::identity(3);
        assert!(matches!(
            g.apply(&ComplexMatrix::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn adjoint_is_hs_adjoint() {
        let mut rng = seeded_rng(10);
        let g = MixedUnitaryEnsemble::haar(3, 2, 77);
        let ga = g.adjoint();
        for _ in 0..10 {
            let x = ginibre(3, 3, &mut rng);
            let y = ginibre(3, 3, &mut rng);
            let lhs = hs_inner(&g.apply(&x).unwrap(), &y).unwrap();
            let rhs = hs_inner(&x, &ga.apply(&y).unwrap()).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12);
        }
    }

    #[test]
    fn adjoint_is_an_involution() {
        let g = MixedUnitaryEnsemble::haar(4, 3, 5);
        let back = g.adjoint().adjoint();
        assert_eq!(back.unitaries(), g.unitaries());
        let id = MixedUnitaryEnsemble::identity(3);
        assert_eq!(id.adjoint().unitaries(), id.unitaries());
    }

    #[test]
    fn square_matches_double_application() {
        let mut rng = seeded_rng(12);
        let g = MixedUnitaryEnsemble::haar(4, 2, 9);
        let g2 = g.square();
        assert_eq!(g2.degree(), 4);
        // Canonical order: index d1 * D + d2 holds U_d2 U_d1.
        let u = g.unitaries();
        assert_eq!(g2.unitaries()[1].as_matrix(), &u[1].as_matrix().matmul(&u[0]));
        for _ in 0..5 {
            let x = ginibre(4, 4, &mut rng);
            let a = g2.apply(&x).unwrap();
            let b = g.apply(&g.apply(&x).unwrap()).unwrap();
            assert!((&a - &b).max_abs() <= 1e-12);
        }
        let id = MixedUnitaryEnsemble::identity(3).square();
        assert_eq!(id.degree(), 1);
        assert_eq!(id.unitaries()[0].as_matrix(), &ComplexMatrix::identity(3));
    }

    #[test]
    fn tensor_shapes_and_order() {
        let g1 = MixedUnitaryEnsemble::haar(2, 2, 1);
        let g2 = MixedUnitaryEnsemble::haar(3, 2, 2);
        let t = tensor_channels(&g1, &g2).unwrap();
        assert_eq!((t.dim(), t.degree()), (6, 4));
        let expected = linalg::tensor(&g1.unitaries()[1], &g2.unitaries()[0]).unwrap();
        assert_eq!(t.unitaries()[2].as_matrix(), &expected);

        let trivial = tensor_channels(&g1, &MixedUnitaryEnsemble::identity(1)).unwrap();
        assert_eq!(trivial.unitaries(), g1.unitaries());
    }

    #[test]
    fn tensor_acts_factorwise() {
        let mut rng = seeded_rng(13);
        let g1 = MixedUnitaryEnsemble::haar(2, 3, 1);
        let g2 = MixedUnitaryEnsemble::haar(3, 2, 2);
        let t = tensor_channels(&g1, &g2).unwrap();
        let x = ginibre(2, 2, &mut rng);
        let y = ginibre(3, 3, &mut rng);
        let lhs = t.apply(&linalg::tensor(&x, &y).unwrap()).unwrap();
        let rhs = linalg::tensor(&g1.apply(&x).unwrap(), &g2.apply(&y).unwrap()).unwrap();
        assert!((&lhs - &rhs).max_abs() <= 1e-12);
    }

    #[test]
    fn tensor_respects_cap() {
        let g = MixedUnitaryEnsemble::identity(16);
        assert!(matches!(
            tensor_channels_with_cap(&g, &g, 255),
            Err(Error::CapExceeded { requested: 256, .. })
        ));
    }

    #[test]
    fn rejects_bad_ensembles() {
        assert!(matches!(
            MixedUnitaryEnsemble::new(vec![], "empty"),
            Err(Error::EmptyEnsemble)
        ));
        let mixed = vec![UnitaryMatrix::identity(2), UnitaryMatrix::identity(3)];
        assert!(matches!(
            MixedUnitaryEnsemble::new(mixed, "x"),
            Err(Error::InvalidKraus { index: 1, .. })
        ));
        let mut bad = ComplexMatrix::identity(2);
        bad[(1, 1)] = Complex64::new(2.0, 0.0);
        let err = MixedUnitaryEnsemble::from_matrices(vec![ComplexMatrix::identity(2), bad], "x").unwrap_err();
        assert!(matches!(err, Error::InvalidKraus { index: 1, .. }));
        assert!(MixedUnitaryEnsemble::permutations(&[vec![0, 0]], "p").is_err());
    }

    #[test]
    fn preserves_density_operators() {
        let mut rng = seeded_rng(21);
        let g = MixedUnitaryEnsemble::haar(5, 3, 8);
        for _ in 0..5 {
            let rho = random_density(5, &mut rng);
            let out = g.apply(&rho).unwrap();
            assert!(out.is_hermitian(1e-12));
            assert!((out.trace() - linalg::ONE).norm() <= 1e-12);
            let floor = out.hermitian_eigenvalues().unwrap()[0];
            assert!(floor >= -1e-12, "eigenvalue floor {floor}");
        }
    }

    #[test]
    fn permutation_ensemble_moves_basis_states() {
        let g = MixedUnitaryEnsemble::permutations(&[vec![1, 2, 0]], "shift").unwrap();
        let mut e0 = ComplexMatrix::zeros(3, 3);
        e0[(0, 0)] = linalg::ONE;
        let out = g.apply(&e0).unwrap();
        assert_eq!(out[(1, 1)], linalg::ONE);
    }
}
