//! Certified spectral bounds propagated through compositions, and the
//! recursive family
//!
//! ```text
//! G_1 = H^2,  G_2 = H (x) H,
//! G_t = (G_ceil((t-1)/2) (x) G_floor((t-1)/2))^2 zigzag H   for t > 2
//! ```
//!
//! which, for a base `H` on dimension `D^8` with degree `D`, has dimension
//! `D^(8t)` and degree `D^2` at every level.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channels::{tensor_channels_with_cap, MixedUnitaryEnsemble};
use crate::error::{Error, Result};
use crate::zigzag::zigzag_with_cap;

/// Largest dimension for which `build_gt` materializes Kraus ensembles.
pub const DEFAULT_MATERIALIZE_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompositionRule {
    Square,
    Tensor,
    Zigzag,
}

/// Bound for a composite from its children's bounds:
/// square `l^2`, tensor `max(l1, l2)`, zigzag `min(1, l1 + l2 + l2^2)`.
pub fn cert_bound(rule: CompositionRule, children: &[f64]) -> Result<f64> {
    let arity = match rule {
        CompositionRule::Square => 1,
        CompositionRule::Tensor | CompositionRule::Zigzag => 2,
    };
    if children.len() != arity {
        return Err(Error::InvalidParameter(format!(
            "{rule:?} takes {arity} child bound(s), got {}",
            children.len()
        )));
    }
    if let Some(bad) = children.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::InvalidParameter(format!("child bound {bad} is outside [0, 1]")));
    }
    Ok(match rule {
        CompositionRule::Square => children[0] * children[0],
        CompositionRule::Tensor => children[0].max(children[1]),
        CompositionRule::Zigzag => {
            let (outer, seed) = (children[0], children[1]);
            (outer + seed + seed * seed).min(1.0)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CertNode {
    Base {
        label: String,
    },
    Square {
        child: Arc<ExpanderCert>,
    },
    Tensor {
        left: Arc<ExpanderCert>,
        right: Arc<ExpanderCert>,
    },
    Zigzag {
        outer: Arc<ExpanderCert>,
        seed: Arc<ExpanderCert>,
    },
}

/// `(dim, degree, lambda_bound)` plus the composition tree that produced it.
/// Dimensions are arbitrary precision: `G_30` over a `2^8`-dimensional base
/// lives on `2^240` dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpanderCert {
    #[serde(with = "decimal")]
    pub dim: BigUint,
    #[serde(with = "decimal")]
    pub degree: BigUint,
    pub lambda_bound: f64,
    pub provenance: CertNode,
}

mod decimal {
    use super::*;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(|| serde::de::Error::custom(format!("bad integer {s:?}")))
    }
}

impl fmt::Display for ExpanderCert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {:.6})", self.dim, self.degree, self.lambda_bound)
    }
}

impl ExpanderCert {
    /// Leaf certificate. The bound is clamped into `[0, 1]` so estimates a few
    /// ulps above 1 are accepted.
    pub fn base(
        dim: impl Into<BigUint>,
        degree: impl Into<BigUint>,
        lambda_bound: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        if !lambda_bound.is_finite() || !(-1e-12..=1.0 + 1e-9).contains(&lambda_bound) {
            return Err(Error::InvalidParameter(format!(
                "lambda bound {lambda_bound} is outside [0, 1]"
            )));
        }
        Ok(Self {
            dim: dim.into(),
            degree: degree.into(),
            lambda_bound: lambda_bound.clamp(0.0, 1.0),
            provenance: CertNode::Base { label: label.into() },
        })
    }

    pub fn for_ensemble(g: &MixedUnitaryEnsemble, lambda_bound: f64) -> Result<Self> {
        Self::base(g.dim(), g.degree(), lambda_bound, g.label())
    }

    pub fn square(child: &Arc<Self>) -> Self {
        Self {
            dim: child.dim.clone(),
            degree: &child.degree * &child.degree,
            lambda_bound: cert_bound(CompositionRule::Square, &[child.lambda_bound]).expect("bound in range"),
            provenance: CertNode::Square { child: child.clone() },
        }
    }

    pub fn tensor(left: &Arc<Self>, right: &Arc<Self>) -> Self {
        Self {
            dim: &left.dim * &right.dim,
            degree: &left.degree * &right.degree,
            lambda_bound: cert_bound(CompositionRule::Tensor, &[left.lambda_bound, right.lambda_bound])
                .expect("bound in range"),
            provenance: CertNode::Tensor {
                left: left.clone(),
                right: right.clone(),
            },
        }
    }

    /// Fails unless `seed.dim == outer.degree`.
    pub fn zigzag(outer: &Arc<Self>, seed: &Arc<Self>) -> Result<Self> {
        if seed.dim != outer.degree {
            return Err(Error::InvalidParameter(format!(
                "zig-zag requires the outer expander to be dim(seed)-regular: seed dim {} vs outer degree {}",
                seed.dim, outer.degree
            )));
        }
        Ok(Self {
            dim: &outer.dim * &outer.degree,
            degree: &seed.degree * &seed.degree,
            lambda_bound: cert_bound(CompositionRule::Zigzag, &[outer.lambda_bound, seed.lambda_bound])?,
            provenance: CertNode::Zigzag {
                outer: outer.clone(),
                seed: seed.clone(),
            },
        })
    }

    /// Number of nodes in the provenance tree, counting shared subtrees once
    /// per reference.
    pub fn tree_size(&self) -> usize {
        1 + match &self.provenance {
            CertNode::Base { .. } => 0,
            CertNode::Square { child } => child.tree_size(),
            CertNode::Tensor { left, right } => left.tree_size() + right.tree_size(),
            CertNode::Zigzag { outer, seed } => outer.tree_size() + seed.tree_size(),
        }
    }
}

/// Every member `G_1 ..= G_t` of the recursive family.
#[derive(Debug, Clone)]
pub struct GtFamily {
    /// `certs[s - 1]` certifies `G_s`.
    pub certs: Vec<Arc<ExpanderCert>>,
    /// `ensembles[s - 1]` is `G_s`'s Kraus list when its dimension is within
    /// the materialization cap.
    pub ensembles: Vec<Option<MixedUnitaryEnsemble>>,
}

impl GtFamily {
    pub fn cert(&self, t: usize) -> &Arc<ExpanderCert> {
        &self.certs[t - 1]
    }

    pub fn ensemble(&self, t: usize) -> Option<&MixedUnitaryEnsemble> {
        self.ensembles[t - 1].as_ref()
    }
}

fn fits(dim: &BigUint, cap: usize) -> bool {
    *dim <= BigUint::from(cap)
}

/// Builds `G_1 ..= G_t` from a base certificate and, optionally, the base
/// ensemble itself. Subscripts are memoized, so each `G_s` is built once.
pub fn build_gt(
    base: &ExpanderCert,
    base_ensemble: Option<&MixedUnitaryEnsemble>,
    t: usize,
    materialize_cap: usize,
) -> Result<GtFamily> {
    if t < 1 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    if base.dim != base.degree.pow(8) {
        let dim = usize::try_from(&base.dim).unwrap_or(usize::MAX);
        let degree = usize::try_from(&base.degree).unwrap_or(usize::MAX);
        return Err(Error::BaseShape { dim, degree });
    }
    if let Some(h) = base_ensemble {
        if BigUint::from(h.dim()) != base.dim || BigUint::from(h.degree()) != base.degree {
            return Err(Error::InvalidParameter(format!(
                "base ensemble ({}, {}) does not match its certificate {base}",
                h.dim(),
                h.degree()
            )));
        }
    }
    let h_cert = Arc::new(base.clone());
    let mut certs: Vec<Arc<ExpanderCert>> = Vec::with_capacity(t);
    let mut ensembles: Vec<Option<MixedUnitaryEnsemble>> = Vec::with_capacity(t);
    for s in 1..=t {
        let (cert, ensemble) = match s {
            1 => {
                let cert = ExpanderCert::square(&h_cert);
                let ens = base_ensemble
                    .filter(|_| fits(&cert.dim, materialize_cap))
                    .map(|h| h.square().with_label("G_1"));
                (cert, ens)
            }
            2 => {
                let cert = ExpanderCert::tensor(&h_cert, &h_cert);
                let ens = match base_ensemble {
                    Some(h) if fits(&cert.dim, materialize_cap) => {
                        Some(tensor_channels_with_cap(h, h, materialize_cap)?.with_label("G_2"))
                    }
                    _ => None,
                };
                (cert, ens)
            }
            _ => {
                let (hi, lo) = (s / 2, (s - 1) / 2);
                debug_assert_eq!(hi, (s - 1).div_ceil(2));
                let product = Arc::new(ExpanderCert::tensor(&certs[hi - 1], &certs[lo - 1]));
                let squared = Arc::new(ExpanderCert::square(&product));
                let cert = ExpanderCert::zigzag(&squared, &h_cert)?;
                let ens = match (&ensembles[hi - 1], &ensembles[lo - 1], base_ensemble) {
                    (Some(a), Some(b), Some(h)) if fits(&cert.dim, materialize_cap) => {
                        let product = tensor_channels_with_cap(a, b, materialize_cap)?.square();
                        Some(zigzag_with_cap(&product, h, materialize_cap)?.with_label(format!("G_{s}")))
                    }
                    _ => None,
                };
                (cert, ens)
            }
        };
        certs.push(Arc::new(cert));
        ensembles.push(ensemble);
    }
    Ok(GtFamily { certs, ensembles })
}
