//! Estimators for the expansion parameter: the operator norm (in the
//! Hilbert-Schmidt norm) of a channel restricted to traceless operators.
//!
//! Two independent routes are provided. [`lambda_exact`] materializes the
//! restricted `(N^2 - 1) x (N^2 - 1)` superoperator matrix in a generalized
//! Gell-Mann basis and takes its top singular value. [`lambda_power`] never
//! forms that matrix; it runs power iteration on `M^dag M` with
//! `M = P G P` acting on `N x N` iterates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{traceless_part, MixedUnitaryEnsemble};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ZERO};

/// Largest channel dimension `N` accepted by [`lambda_exact`]; the
/// superoperator matrix is then at most 4096 x 4096.
pub const DEFAULT_EXACT_CAP: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactSvd,
    PowerIteration,
}

impl Method {
    pub fn short_name(self) -> &'static str {
        match self {
            Method::ExactSvd => "exact",
            Method::PowerIteration => "power",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub lambda: f64,
    pub method: Method,
    pub iterations: usize,
    /// Rayleigh-quotient change at termination (0 for the exact method).
    pub residual: f64,
    /// Seed of the start vectors; power method only.
    pub seed: Option<u64>,
    pub converged: bool,
}

impl SpectralEstimate {
    fn exact(lambda: f64) -> Self {
        Self {
            lambda,
            method: Method::ExactSvd,
            iterations: 0,
            residual: 0.0,
            seed: None,
            converged: true,
        }
    }
}

/// One element of the generalized Gell-Mann basis, stored as its non-zero
/// entries `(row, col, value)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisElement {
    pub entries: Vec<(usize, usize, Complex64)>,
}

impl BasisElement {
    pub fn to_matrix(&self, n: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(n, n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}

/// Orthonormal traceless basis of `L(C^n)`: symmetric `(E_jk + E_kj)/sqrt2`
/// for `j < k`, then antisymmetric `(-i E_jk + i E_kj)/sqrt2`, then the
/// diagonal elements `(sum_{m<l} E_mm - l E_ll) / sqrt(l(l+1))`.
///
/// Together with `I / sqrt(n)` this spans the whole operator space.
pub fn traceless_basis(n: usize) -> Vec<BasisElement> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in j + 1..n {
            out.push(BasisElement {
                entries: vec![(j, k, Complex64::new(s, 0.0)), (k, j, Complex64::new(s, 0.0))],
            });
        }
    }
    for j in 0..n {
        for k in j + 1..n {
            out.push(BasisElement {
                entries: vec![(j, k, Complex64::new(0.0, -s)), (k, j, Complex64::new(0.0, s))],
            });
        }
    }
    for l in 1..n {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut entries: Vec<_> = (0..l).map(|m| (m, m, Complex64::new(norm, 0.0))).collect();
        entries.push((l, l, Complex64::new(-(l as f64) * norm, 0.0)));
        out.push(BasisElement { entries });
    }
    out
}

/// Coordinates `<Y, B_i>` of `Y` along [`traceless_basis`], in the same order.
fn traceless_coords(y: &ComplexMatrix, out: &mut [Complex64]) {
    let n = y.rows();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let i = Complex64::new(0.0, 1.0);
    let pairs = n * (n - 1) / 2;
    let mut idx = 0;
    for j in 0..n {
        for k in j + 1..n {
            let (a, b) = (y[(j, k)], y[(k, j)]);
            out[idx] = (a + b) * s;
            out[pairs + idx] = (a - b) * i * s;
            idx += 1;
        }
    }
    let mut prefix = ZERO;
    for l in 1..n {
        prefix += y[(l - 1, l - 1)];
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        out[2 * pairs + l - 1] = (prefix - y[(l, l)] * l as f64) * norm;
    }
}

/// `G(B)` for a sparse `B`, using `U B U^dag = sum v u_p u_q^dag` over the
/// non-zeros of `B` (`u_p` is column `p` of `U`).
fn apply_sparse(g: &MixedUnitaryEnsemble, b: &BasisElement) -> ComplexMatrix {
    let n = g.dim();
    let mut out = vec![ZERO; n * n];
    for u in g.unitaries() {
        let u_adj = u.adjoint();
        let rows = u_adj.as_slice();
        for &(p, q, v) in &b.entries {
            let conj_col_q = &rows[q * n..(q + 1) * n];
            for r in 0..n {
                let left = u[(r, p)] * v;
                for (o, &w) in out[r * n..(r + 1) * n].iter_mut().zip(conj_col_q) {
                    *o += left * w;
                }
            }
        }
    }
    let mut out = ComplexMatrix::new(n, n, out).expect("finite entries");
    out.scale_mut(1.0 / g.degree() as f64);
    out
}

/// Matrix of `X -> P G(P X)` on the traceless subspace, in the
/// [`traceless_basis`]: entry `(i, j)` is `<G(B_j), B_i>`.
pub fn traceless_superoperator_matrix(g: &MixedUnitaryEnsemble) -> ComplexMatrix {
    let n = g.dim();
    let m = n * n - 1;
    let basis = traceless_basis(n);
    let mut data = vec![ZERO; m * m];
    let mut column = vec![ZERO; m];
    for (j, b) in basis.iter().enumerate() {
        let image = apply_sparse(g, b);
        traceless_coords(&image, &mut column);
        for (i, &z) in column.iter().enumerate() {
            data[i * m + j] = z;
        }
    }
    ComplexMatrix::new(m, m, data).expect("finite superoperator entries")
}

pub fn lambda_exact(g: &MixedUnitaryEnsemble) -> Result<SpectralEstimate> {
    lambda_exact_with_cap(g, DEFAULT_EXACT_CAP)
}

/// Largest singular value of the channel restricted to traceless operators,
/// from a dense direct decomposition.
pub fn lambda_exact_with_cap(g: &MixedUnitaryEnsemble, cap: usize) -> Result<SpectralEstimate> {
    let n = g.dim();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "lambda_exact",
            requested: n,
            cap,
            hint: "use the power method (--method power) or raise the exact cap",
        });
    }
    if n == 1 {
        return Ok(SpectralEstimate::exact(0.0));
    }
    let m = traceless_superoperator_matrix(g);
    // The basis is Hermitian and G preserves Hermiticity, so M is real up to
    // rounding; the real decomposition is about four times cheaper.
    let scale = m.max_abs().max(1.0);
    if m.as_slice().iter().all(|z| z.im.abs() <= 1e-12 * scale) {
        let k = m.rows();
        let real = faer::Mat::<f64>::from_fn(k, k, |r, c| m[(r, c)].re);
        return Ok(SpectralEstimate::exact(linalg::real_spectral_norm(real.as_ref())?));
    }
    Ok(SpectralEstimate::exact(m.spectral_norm()?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    /// Stop once the Rayleigh quotient changes by at most this much.
    pub tol: f64,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 10_000,
            restarts: 3,
            seed: 0,
        }
    }
}

struct Run {
    quotient: f64,
    residual: f64,
    iterations: usize,
    converged: bool,
}

fn normalize(x: &mut ComplexMatrix) -> f64 {
    let n = x.norm();
    if n > 0.0 {
        x.scale_mut(1.0 / n);
    }
    n
}

fn power_run(g: &MixedUnitaryEnsemble, g_adj: &MixedUnitaryEnsemble, mut x: ComplexMatrix, cfg: &PowerConfig) -> Run {
    let mut prev = f64::NEG_INFINITY;
    let mut residual = f64::INFINITY;
    for iter in 1..=cfg.max_iter {
        // x is traceless and normalized here.
        let y = traceless_part(&g.apply_unchecked(&x));
        let quotient = y.norm_sqr();
        residual = (quotient - prev).abs();
        prev = quotient;
        let mut next = traceless_part(&g_adj.apply_unchecked(&y));
        if normalize(&mut next) == 0.0 {
            return Run {
                quotient,
                residual: 0.0,
                iterations: iter,
                converged: true,
            };
        }
        if residual <= cfg.tol {
            return Run {
                quotient,
                residual,
                iterations: iter,
                converged: true,
            };
        }
        x = next;
    }
    Run {
        quotient: prev.max(0.0),
        residual,
        iterations: cfg.max_iter,
        converged: false,
    }
}

/// Matrix-free power iteration for the restricted operator norm.
///
/// Each restart starts from a Haar unitary projected onto the traceless
/// subspace. The result is the largest estimate over restarts; if that
/// restart hit `max_iter` the estimate is returned with `converged = false`.
pub fn lambda_power(g: &MixedUnitaryEnsemble, cfg: &PowerConfig) -> Result<SpectralEstimate> {
    if cfg.tol.is_nan() || cfg.tol < 0.0 || cfg.max_iter == 0 || cfg.restarts == 0 {
        return Err(Error::InvalidParameter(format!(
            "power method needs tol >= 0, max_iter >= 1, restarts >= 1 (got {cfg:?})"
        )));
    }
    let n = g.dim();
    if n == 1 {
        return Ok(SpectralEstimate {
            lambda: 0.0,
            method: Method::PowerIteration,
            iterations: 0,
            residual: 0.0,
            seed: Some(cfg.seed),
            converged: true,
        });
    }
    let g_adj = g.adjoint();
    let mut rng = linalg::seeded_rng(cfg.seed);
    let mut best: Option<Run> = None;
    for _ in 0..cfg.restarts {
        let mut start = traceless_part(&linalg::haar_unitary_from_rng(n, &mut rng));
        if normalize(&mut start) == 0.0 {
            continue;
        }
        let run = power_run(g, &g_adj, start, cfg);
        if best.as_ref().is_none_or(|b| run.quotient > b.quotient) {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| Error::Numerical("every power-method start was degenerate".into()))?;
    Ok(SpectralEstimate {
        lambda: best.quotient.max(0.0).sqrt(),
        method: Method::PowerIteration,
        iterations: best.iterations,
        residual: best.residual,
        seed: Some(cfg.seed),
        converged: best.converged,
    })
}

/// Expansion of `G` restricted to traceless diagonal operators.
///
/// Only meaningful when `G` maps diagonal operators to diagonal operators
/// (e.g. permutation ensembles); otherwise this fails. For a permutation
/// ensemble the restriction is the classical random-walk matrix, so the result
/// is the walk's second singular value.
pub fn lambda_diagonal(g: &MixedUnitaryEnsemble) -> Result<f64> {
    let n = g.dim();
    if n == 1 {
        return Ok(0.0);
    }
    let mut leak: f64 = 0.0;
    let mut images = Vec::with_capacity(n);
    for i in 0..n {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(i, i)] = linalg::ONE;
        let image = g.apply_unchecked(&e);
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    leak = leak.max(image[(r, c)].norm());
                }
            }
        }
        images.push((0..n).map(|k| image[(k, k)]).collect::<Vec<_>>());
    }
    if leak > 1e-12 {
        return Err(Error::NotDiagonalPreserving { leak });
    }
    // Walk matrix W[k][i] = <e_k| G(|i><i|) |e_k>, restricted to vectors
    // orthogonal to the all-ones vector via an orthonormal Helmert basis.
    let helmert: Vec<Vec<f64>> = (1..n)
        .map(|l| {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            (0..n)
                .map(|m| match m.cmp(&l) {
                    std::cmp::Ordering::Less => norm,
                    std::cmp::Ordering::Equal => -(l as f64) * norm,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect();
    let restricted = ComplexMatrix::from_fn(n - 1, n - 1, |a, b| {
        let mut acc = ZERO;
        for (i, &hb) in helmert[b].iter().enumerate() {
            if hb == 0.0 {
                continue;
            }
            for (k, &ha) in helmert[a].iter().enumerate() {
                acc += images[i][k] * (ha * hb);
            }
        }
        acc
    });
    restricted.spectral_norm()
}
