use crate::channels::MixedUnitaryEnsemble;
use crate::error::{Error, Result};

/// `d` independent Haar unitaries on dimension `n`, deterministic in `seed`.
///
/// Degree 1 is accepted as a degenerate fixture (its expansion is 1).
pub fn random_base(n: usize, d: usize, seed: u64) -> Result<MixedUnitaryEnsemble> {
    if n < 2 || d < 1 {
        return Err(Error::InvalidParameter(format!(
            "random_base needs n >= 2 and d >= 1, got n = {n}, d = {d}"
        )));
    }
    Ok(MixedUnitaryEnsemble::haar(n, d, seed).with_label(format!("random_base(n={n},d={d},seed={seed})")))
}
