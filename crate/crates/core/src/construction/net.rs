//! Finite nets of unitaries built from gate words, and the discretization of
//! an ensemble onto such a net.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;
use rand::Rng;

use crate::channels::MixedUnitaryEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, UnitaryMatrix, ONE, ZERO};
use crate::spectral::{lambda_exact, SpectralEstimate, DEFAULT_EXACT_CAP};

/// Largest number of tuples an exhaustive [`net_search`] will evaluate.
pub const DEFAULT_SEARCH_BUDGET: u128 = 1_000_000;

/// Two search candidates whose expansions differ by less than this are tied.
const TIE_TOL: f64 = 1e-12;

/// A named list of gates of one common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    pub name: String,
    pub gates: Vec<(String, UnitaryMatrix)>,
}

impl GeneratorSet {
    pub fn new(name: impl Into<String>, gates: Vec<(String, UnitaryMatrix)>) -> Result<Self> {
        let dim = gates.first().ok_or(Error::EmptyGenerators)?.1.dim();
        if let Some((label, g)) = gates.iter().find(|(_, g)| g.dim() != dim) {
            return Err(Error::InvalidParameter(format!(
                "generator {label} has dimension {} but {dim} was expected",
                g.dim()
            )));
        }
        Ok(Self {
            name: name.into(),
            gates,
        })
    }

    /// Hadamard and `T = diag(1, e^{i pi/4})` on one qubit.
    pub fn hadamard_t() -> Self {
        let h = ComplexMatrix::from_fn(2, 2, |r, c| {
            let s = if r == 1 && c == 1 {
                -FRAC_1_SQRT_2
            } else {
                FRAC_1_SQRT_2
            };
            Complex64::new(s, 0.0)
        });
        let t = ComplexMatrix::from_diagonal(&[ONE, Complex64::from_polar(1.0, FRAC_PI_4)]);
        Self {
            name: "ht".into(),
            gates: vec![
                ("H".into(), UnitaryMatrix::from_trusted(h)),
                ("T".into(), UnitaryMatrix::from_trusted(t)),
            ],
        }
    }

    /// Hadamard on each of three qubits plus Toffoli, on dimension 8.
    pub fn hadamard_toffoli() -> Self {
        let h = Self::hadamard_t().gates[0].1.clone();
        let id = ComplexMatrix::identity(2);
        let mut gates = Vec::new();
        for q in 0..3 {
            let factors: Vec<&ComplexMatrix> = (0..3).map(|k| if k == q { h.as_matrix() } else { &id }).collect();
            let m = linalg::tensor_all(&factors, 8).expect("dimension 8");
            gates.push((format!("H{q}"), UnitaryMatrix::from_trusted(m)));
        }
        let mut toffoli = ComplexMatrix::identity(8);
        toffoli[(6, 6)] = ZERO;
        toffoli[(7, 7)] = ZERO;
        toffoli[(6, 7)] = ONE;
        toffoli[(7, 6)] = ONE;
        gates.push(("CCX".into(), UnitaryMatrix::from_trusted(toffoli)));
        Self {
            name: "h-toffoli".into(),
            gates,
        }
    }

    /// Looks up a built-in set: `ht` or `h-toffoli`.
    pub fn named(name: &str) -> Result<Self> {
        match name {
            "ht" => Ok(Self::hadamard_t()),
            "h-toffoli" => Ok(Self::hadamard_toffoli()),
            other => Err(Error::InvalidParameter(format!(
                "unknown generator set {other:?} (known: ht, h-toffoli)"
            ))),
        }
    }

    pub fn dim(&self) -> usize {
        self.gates[0].1.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetMember {
    pub unitary: UnitaryMatrix,
    /// Gates in application order, joined by `.`; empty for the identity.
    pub word: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryNet {
    pub dim: usize,
    pub accuracy: f64,
    pub members: Vec<NetMember>,
    pub generator_set: String,
    pub max_word_length: usize,
}

impl UnitaryNet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// A net holding exactly the given unitaries, for tests and custom sets.
    pub fn from_members(members: Vec<NetMember>, accuracy: f64) -> Result<Self> {
        let dim = members.first().ok_or(Error::EmptyNet)?.unitary.dim();
        Ok(Self {
            dim,
            accuracy,
            members,
            generator_set: "custom".into(),
            max_word_length: 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugationDistance {
    pub value: f64,
    /// `false` when the dimension exceeded the exact cap and `value` is the
    /// certified upper bound `2 |U - e^{i phi} V|_op`.
    pub exact: bool,
}

/// `sup_{|X| = 1} |U X U^dag - V X V^dag|` with the default exact cap.
pub fn conjugation_distance(u: &UnitaryMatrix, v: &UnitaryMatrix) -> Result<ConjugationDistance> {
    conjugation_distance_with_cap(u, v, DEFAULT_EXACT_CAP)
}

/// Exact value is the top singular value of `U (x) conj(U) - V (x) conj(V)`,
/// the difference of the two conjugation superoperators in the row-major
/// vectorization.
pub fn conjugation_distance_with_cap(u: &UnitaryMatrix, v: &UnitaryMatrix, cap: usize) -> Result<ConjugationDistance> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            op: "conjugation_distance",
            left_rows: u.rows(),
            left_cols: u.cols(),
            right_rows: v.rows(),
            right_cols: v.cols(),
        });
    }
    let n = u.dim();
    if n <= cap {
        let su = linalg::tensor_with_cap(u, &u.conj(), usize::MAX)?;
        let sv = linalg::tensor_with_cap(v, &v.conj(), usize::MAX)?;
        let value = (&su - &sv).spectral_norm()?;
        return Ok(ConjugationDistance { value, exact: true });
    }
    // Any phase gives a valid bound; this one minimizes the Frobenius gap.
    let overlap = linalg::hs_inner(u, v)?;
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        ONE
    };
    let diff = u.as_matrix() - &v.as_matrix().scaled(phase);
    Ok(ConjugationDistance {
        value: 2.0 * diff.spectral_norm()?,
        exact: false,
    })
}

fn word_matrix(gens: &GeneratorSet, word: &[usize]) -> UnitaryMatrix {
    word.iter().fold(UnitaryMatrix::identity(gens.dim()), |acc, &g| {
        gens.gates[g].1.compose(&acc)
    })
}

fn word_label(gens: &GeneratorSet, word: &[usize]) -> String {
    word.iter()
        .map(|&g| gens.gates[g].0.as_str())
        .collect::<Vec<_>>()
        .join(".")
}

/// Breadth-first enumeration of every generator word up to
/// `max_word_length`. Words of equal length are visited in lexicographic
/// order of generator indices; a word's unitary applies its first letter
/// first. A candidate joins the net only if its conjugation distance to every
/// member already present exceeds `accuracy / 2`.
pub fn build_net(dim: usize, gens: &GeneratorSet, max_word_length: usize, accuracy: f64) -> Result<UnitaryNet> {
    if gens.gates.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    if gens.dim() != dim {
        return Err(Error::InvalidParameter(format!(
            "generator set {} acts on dimension {}, not {dim}",
            gens.name,
            gens.dim()
        )));
    }
    if accuracy.is_nan() || accuracy < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "accuracy must be non-negative, got {accuracy}"
        )));
    }
    let mut members = vec![NetMember {
        unitary: UnitaryMatrix::identity(dim),
        word: String::new(),
    }];
    let mut frontier: Vec<(Vec<usize>, UnitaryMatrix)> = vec![(Vec::new(), UnitaryMatrix::identity(dim))];
    for _ in 0..max_word_length {
        let mut next = Vec::with_capacity(frontier.len() * gens.gates.len());
        for (word, u) in &frontier {
            for (g, (_, gate)) in gens.gates.iter().enumerate() {
                let mut w = word.clone();
                w.push(g);
                next.push((w, gate.compose(u)));
            }
        }
        // The frontier is built prefix-major, which is lexicographic order.
        for (word, u) in &next {
            let mut far = true;
            for m in &members {
                if conjugation_distance(u, &m.unitary)?.value <= accuracy / 2.0 {
                    far = false;
                    break;
                }
            }
            if far {
                debug_assert_eq!(u, &word_matrix(gens, word));
                members.push(NetMember {
                    unitary: u.clone(),
                    word: word_label(gens, word),
                });
            }
        }
        frontier = next;
    }
    Ok(UnitaryNet {
        dim,
        accuracy,
        members,
        generator_set: gens.name.clone(),
        max_word_length,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discretized {
    pub ensemble: MixedUnitaryEnsemble,
    /// Net index chosen for each Kraus unitary.
    pub replacements: Vec<usize>,
    pub distances: Vec<f64>,
}

impl Discretized {
    pub fn max_distance(&self) -> f64 {
        self.distances.iter().copied().fold(0.0, f64::max)
    }
}

/// Replaces every `U_i` by its nearest net member (lowest index on ties).
/// Then `lambda(G') <= lambda(G) + max_i dist(U_i, V_i)` by the triangle
/// inequality.
pub fn discretize(g: &MixedUnitaryEnsemble, net: &UnitaryNet) -> Result<Discretized> {
    if net.is_empty() {
        return Err(Error::EmptyNet);
    }
    if net.dim != g.dim() {
        return Err(Error::InvalidParameter(format!(
            "net dimension {} does not match ensemble dimension {}",
            net.dim,
            g.dim()
        )));
    }
    let mut replacements = Vec::with_capacity(g.degree());
    let mut distances = Vec::with_capacity(g.degree());
    for u in g.unitaries() {
        let mut best = (0, f64::INFINITY);
        for (idx, m) in net.members.iter().enumerate() {
            let d = conjugation_distance(u, &m.unitary)?.value;
            if d < best.1 {
                best = (idx, d);
            }
        }
        replacements.push(best.0);
        distances.push(best.1);
    }
    let unitaries = replacements.iter().map(|&i| net.members[i].unitary.clone()).collect();
    let ensemble = MixedUnitaryEnsemble::new(unitaries, format!("discretize({})", g.label()))?;
    Ok(Discretized {
        ensemble,
        replacements,
        distances,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive { budget: u128 },
    RandomSample { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub ensemble: MixedUnitaryEnsemble,
    pub estimate: SpectralEstimate,
    /// Net indices of the chosen tuple.
    pub indices: Vec<usize>,
    pub evaluated: usize,
}

fn tuple_ensemble(net: &UnitaryNet, idx: &[usize]) -> Result<MixedUnitaryEnsemble> {
    let unitaries = idx.iter().map(|&i| net.members[i].unitary.clone()).collect();
    let words: Vec<&str> = idx
        .iter()
        .map(|&i| match net.members[i].word.as_str() {
            "" => "I",
            w => w,
        })
        .collect();
    MixedUnitaryEnsemble::new(unitaries, format!("net[{}]", words.join(", ")))
}

/// Lower expansion wins; near-ties go to the lexicographically smaller tuple.
fn improves(candidate: (f64, &[usize]), best: Option<(f64, &[usize])>) -> bool {
    match best {
        None => true,
        Some((lambda, idx)) => candidate.0 < lambda - TIE_TOL || (candidate.0 <= lambda + TIE_TOL && candidate.1 < idx),
    }
}

/// Finds the ordered `d`-tuple (with repetition) of net members with the
/// smallest exact expansion.
pub fn net_search(n: usize, d: usize, net: &UnitaryNet, mode: SearchMode) -> Result<SearchResult> {
    if net.is_empty() {
        return Err(Error::EmptyNet);
    }
    if net.dim != n {
        return Err(Error::InvalidParameter(format!(
            "net dimension {} does not match requested dimension {n}",
            net.dim
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    let size = net.len();
    let mut best: Option<(SpectralEstimate, Vec<usize>)> = None;
    let mut evaluated = 0;
    let mut consider = |idx: &[usize]| -> Result<()> {
        let est = lambda_exact(&tuple_ensemble(net, idx)?)?;
        evaluated += 1;
        if improves((est.lambda, idx), best.as_ref().map(|(e, i)| (e.lambda, i.as_slice()))) {
            best = Some((est, idx.to_vec()));
        }
        Ok(())
    };
    match mode {
        SearchMode::Exhaustive { budget } => {
            let tuples = (size as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
            if tuples > budget {
                return Err(Error::BudgetExceeded { tuples, budget });
            }
            let mut idx = vec![0usize; d];
            'odometer: loop {
                consider(&idx)?;
                for pos in (0..d).rev() {
                    idx[pos] += 1;
                    if idx[pos] < size {
                        continue 'odometer;
                    }
                    idx[pos] = 0;
                }
                break;
            }
        }
        SearchMode::RandomSample { samples, seed } => {
            if samples == 0 {
                return Err(Error::InvalidParameter(
                    "random-sample search needs at least one sample".into(),
                ));
            }
            let mut rng = linalg::seeded_rng(seed);
            for _ in 0..samples {
                let idx: Vec<usize> = (0..d).map(|_| rng.random_range(0..size)).collect();
                consider(&idx)?;
            }
        }
    }
    let (estimate, indices) = best.expect("at least one tuple evaluated");
    Ok(SearchResult {
        ensemble: tuple_ensemble(net, &indices)?,
        estimate,
        indices,
        evaluated,
    })
}
