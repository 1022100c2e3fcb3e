//! The lifted unitary, the Zig-Zag product and the `W_par` / `W_perp`
//! decomposition of `L(H_{N1} (x) H_{D1})`.
//!
//! Tensor factors are ordered expander-first: basis state `|a> (x) |b>` has
//! index `a * D1 + b`.

use crate::channels::{pairwise_sum, MixedUnitaryEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{self, check_factorization, ComplexMatrix, UnitaryMatrix, DEFAULT_DIM_CAP};

/// `U_dot |a>|b> = U_b |a> (x) |b>`: block-diagonal in the seed index `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedUnitary {
    unitary: UnitaryMatrix,
    inner_dim: usize,
    blocks: usize,
}

impl LiftedUnitary {
    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.unitary
    }

    /// `N1`, the size of each block.
    pub fn inner_dim(&self) -> usize {
        self.inner_dim
    }

    /// `D1`, the number of blocks.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Block `b` read back out of the interleaved matrix.
    pub fn block(&self, b: usize) -> ComplexMatrix {
        let d = self.blocks;
        ComplexMatrix::from_fn(self.inner_dim, self.inner_dim, |r, c| {
            self.unitary[(r * d + b, c * d + b)]
        })
    }

    /// `Ġ1(X) = U_dot X U_dot^dag`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.unitary.dim();
        if x.rows() != n || x.cols() != n {
            return Err(dimension_error("lifted apply", n, x));
        }
        Ok(x.conjugate_by(&self.unitary))
    }
}

fn dimension_error(op: &'static str, n: usize, x: &ComplexMatrix) -> Error {
    Error::DimensionMismatch {
        op,
        left_rows: n,
        left_cols: n,
        right_rows: x.rows(),
        right_cols: x.cols(),
    }
}

pub fn lift(g1: &MixedUnitaryEnsemble) -> Result<LiftedUnitary> {
    lift_with_cap(g1, DEFAULT_DIM_CAP)
}

pub fn lift_with_cap(g1: &MixedUnitaryEnsemble, cap: usize) -> Result<LiftedUnitary> {
    let (n, d) = (g1.dim(), g1.degree());
    let dim = n.saturating_mul(d);
    if dim > cap {
        return Err(Error::CapExceeded {
            what: "lift",
            requested: dim,
            cap,
            hint: "raise --cap; the lifted unitary lives on N1 * D1 dimensions",
        });
    }
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (b, u) in g1.unitaries().iter().enumerate() {
        for a2 in 0..n {
            for a in 0..n {
                m[(a2 * d + b, a * d + b)] = u[(a2, a)];
            }
        }
    }
    Ok(LiftedUnitary {
        unitary: UnitaryMatrix::from_trusted(m),
        inner_dim: n,
        blocks: d,
    })
}

/// `(I (x) G2)(X)` on `L(H_{dim1} (x) H_{G2.dim})`.
pub fn apply_second_factor(g2: &MixedUnitaryEnsemble, x: &ComplexMatrix, dim1: usize) -> Result<ComplexMatrix> {
    check_factorization(x, dim1, g2.dim())?;
    let id = ComplexMatrix::identity(dim1);
    let terms = g2
        .unitaries()
        .iter()
        .map(|v| {
            let lifted = linalg::tensor_with_cap(&id, v, usize::MAX)?;
            Ok(x.conjugate_by(&lifted))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sum = pairwise_sum(terms);
    sum.scale_mut(1.0 / g2.degree() as f64);
    Ok(sum)
}

fn check_regular(g1: &MixedUnitaryEnsemble, g2: &MixedUnitaryEnsemble) -> Result<()> {
    if g2.dim() != g1.degree() {
        return Err(Error::Regularity {
            g1_degree: g1.degree(),
            g2_dim: g2.dim(),
        });
    }
    Ok(())
}

/// The product as a three-stage composition
/// `(I (x) G2) ∘ Ġ1 ∘ (I (x) G2^dag)`, without materializing its Kraus list.
pub fn apply_zigzag_composed(
    g1: &MixedUnitaryEnsemble,
    g2: &MixedUnitaryEnsemble,
    x: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_regular(g1, g2)?;
    let lifted = lift(g1)?;
    let n1 = g1.dim();
    let y = apply_second_factor(&g2.adjoint(), x, n1)?;
    let y = lifted.apply(&y)?;
    apply_second_factor(g2, &y, n1)
}

pub fn zigzag(g1: &MixedUnitaryEnsemble, g2: &MixedUnitaryEnsemble) -> Result<MixedUnitaryEnsemble> {
    zigzag_with_cap(g1, g2, DEFAULT_DIM_CAP)
}

/// Zig-Zag product of `G1` (dimension `N1`, degree `D1`) with `G2` on
/// dimension `D1`. The result has dimension `N1 * D1`, degree `D2^2` and
/// Kraus unitaries `(I (x) V_b) U_dot (I (x) V_a^dag)` at index `a * D2 + b`.
pub fn zigzag_with_cap(
    g1: &MixedUnitaryEnsemble,
    g2: &MixedUnitaryEnsemble,
    cap: usize,
) -> Result<MixedUnitaryEnsemble> {
    check_regular(g1, g2)?;
    let lifted = lift_with_cap(g1, cap)?;
    let id = ComplexMatrix::identity(g1.dim());
    let sandwiches = g2
        .unitaries()
        .iter()
        .map(|v| linalg::tensor_with_cap(&id, v, cap))
        .collect::<Result<Vec<_>>>()?;
    let mut unitaries = Vec::with_capacity(g2.degree() * g2.degree());
    for first in &sandwiches {
        let inner = lifted.unitary().mul_adjoint(first);
        for second in &sandwiches {
            unitaries.push(UnitaryMatrix::from_trusted(second.matmul(&inner)));
        }
    }
    MixedUnitaryEnsemble::new(unitaries, format!("zigzag({}, {})", g1.label(), g2.label()))
}

/// `X_par = Tr_2(X) (x) I/dim2`, the orthogonal projection onto
/// `span{sigma (x) I/dim2}`.
pub fn project_parallel(x: &ComplexMatrix, dim1: usize, dim2: usize) -> Result<ComplexMatrix> {
    let reduced = linalg::partial_trace_second(x, dim1, dim2)?;
    linalg::tensor_with_cap(&reduced, &ComplexMatrix::maximally_mixed(dim2), usize::MAX)
}

/// `X_perp = X - X_par`.
pub fn project_perp(x: &ComplexMatrix, dim1: usize, dim2: usize) -> Result<ComplexMatrix> {
    Ok(x - &project_parallel(x, dim1, dim2)?)
}
