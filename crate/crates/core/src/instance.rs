//! Quantum 2-SAT instances: rank-one two-qubit clause projectors, the
//! YES/NO promise, planted-solution generators and the JSON file format.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::densesim::{self, Matrix, Matrix2, Matrix4, StateVector};
use crate::{observables, trajectory, Error, Result, C64};

/// Amplitude tolerance used by clause classification.
pub const FORM_TOL: f64 = 1e-12;
/// Tolerance on Σ|amps|² = 1.
pub const NORM_TOL: f64 = 1e-12;
/// Largest clause energy the planted state may carry.
pub const PLANTED_TOL: f64 = 1e-10;
/// Attempts made by [`NoInstanceStyle::RandomCertified`] before giving up.
pub const CERTIFY_ATTEMPTS: usize = 1000;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Rank-one projector |φ⟩⟨φ| on the ordered qubit pair (i, j).
///
/// Amplitudes are the coefficients of |00⟩, |01⟩, |10⟩, |11⟩ with qubit i
/// as the left factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    i: usize,
    j: usize,
    amps: [C64; 4],
}

/// Builds a clause, normalizing the amplitude vector.
pub fn make_clause(i: usize, j: usize, amps: [C64; 4]) -> Result<Clause> {
    if i == j {
        return Err(Error::QubitPairInvalid { i, j });
    }
    if amps.iter().all(|a| a.norm() < 1e-14) {
        return Err(Error::ZeroVector);
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    Ok(Clause {
        i,
        j,
        amps: amps.map(|a| a / norm),
    })
}

impl Clause {
    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn amps(&self) -> &[C64; 4] {
        &self.amps
    }

    /// |φ⟩⟨φ| as a 4×4 matrix on (i, j).
    pub fn projector(&self) -> Matrix4 {
        densesim::outer4(&self.amps)
    }

    pub fn form(&self) -> ClauseForm {
        classify_clause(self)
    }

    /// ⟨a ⊗ b|Φ|a ⊗ b⟩ for single-qubit states a on i and b on j.
    pub fn product_energy(&self, a: &[C64; 2], b: &[C64; 2]) -> f64 {
        let overlap = self.amps[0].conj() * a[0] * b[0]
            + self.amps[1].conj() * a[0] * b[1]
            + self.amps[2].conj() * a[1] * b[0]
            + self.amps[3].conj() * a[1] * b[1];
        overlap.norm_sqr()
    }

    /// The clause with amplitudes replaced by (u_i ⊗ u_j)|φ⟩.
    fn transformed(&self, ui: &Matrix2, uj: &Matrix2) -> Clause {
        let mut out = [ZERO; 4];
        for (r, slot) in out.iter_mut().enumerate() {
            for (c, a) in self.amps.iter().enumerate() {
                *slot += ui[(r / 2, c / 2)] * uj[(r % 2, c % 2)] * a;
            }
        }
        Clause {
            i: self.i,
            j: self.j,
            amps: out,
        }
    }
}

/// Structural class of a clause in the frame where |0…0⟩ is satisfying.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClauseForm {
    /// a|01⟩ + b|10⟩.
    RestrictedTypeI,
    /// |11⟩ up to phase.
    TypeII,
    /// a|01⟩ + b|10⟩ + c|11⟩.
    GeneralNoZeroZero,
    Arbitrary,
}

impl fmt::Display for ClauseForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClauseForm::RestrictedTypeI => "restricted-type-i",
            ClauseForm::TypeII => "type-ii",
            ClauseForm::GeneralNoZeroZero => "general-no-00",
            ClauseForm::Arbitrary => "arbitrary",
        };
        f.write_str(s)
    }
}

/// Most specific form; precedence TypeII > RestrictedTypeI >
/// GeneralNoZeroZero > Arbitrary.
pub fn classify_clause(c: &Clause) -> ClauseForm {
    let small = |k: usize| c.amps[k].norm() <= FORM_TOL;
    if small(0) && small(1) && small(2) && (c.amps[3].norm() - 1.0).abs() <= FORM_TOL {
        ClauseForm::TypeII
    } else if small(0) && small(3) {
        ClauseForm::RestrictedTypeI
    } else if small(0) {
        ClauseForm::GeneralNoZeroZero
    } else {
        ClauseForm::Arbitrary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromiseKind {
    Yes,
    No,
}

/// Which side of the promise the instance is on, with the promise gap c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Promise {
    pub kind: PromiseKind,
    pub c: f64,
}

impl Promise {
    pub fn yes(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidPromise(c));
        }
        Ok(Self {
            kind: PromiseKind::Yes,
            c,
        })
    }

    pub fn no(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidPromise(c));
        }
        Ok(Self {
            kind: PromiseKind::No,
            c,
        })
    }
}

/// Where an instance file came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub parameters: String,
}

/// n qubits, L ≥ 1 clauses, optional hidden planted basis and promise.
///
/// When `planted_basis` is present, entry q is the single-qubit unitary W_q
/// with W_q|0⟩ the planted state of qubit q. The product ⊗W_q maps the
/// hidden analysis frame to computational coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    n: usize,
    clauses: Vec<Clause>,
    planted_basis: Option<Vec<Matrix2>>,
    promise: Option<Promise>,
    provenance: Option<Provenance>,
}

fn check_unitary(u: &Matrix2) -> Result<()> {
    let m = Matrix::from_fn(2, 2, |r, c| u[(r, c)]);
    let deviation = densesim::unitary_deviation(&m);
    if deviation > 1e-10 {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

impl Instance {
    pub fn new(
        n: usize,
        clauses: Vec<Clause>,
        planted_basis: Option<Vec<Matrix2>>,
        promise: Option<Promise>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInstance(format!("n = {n} < 2")));
        }
        if clauses.is_empty() {
            return Err(Error::InvalidInstance("no clauses".into()));
        }
        for (k, c) in clauses.iter().enumerate() {
            if c.i >= n || c.j >= n {
                return Err(Error::InvalidInstance(format!(
                    "clause {k} acts on ({}, {}) outside {n} qubits",
                    c.i, c.j
                )));
            }
            let norm: f64 = c.amps.iter().map(|a| a.norm_sqr()).sum();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidInstance(format!(
                    "clause {k} has squared norm {norm}"
                )));
            }
        }
        if let Some(p) = promise {
            if !(p.c > 0.0) && p.kind == PromiseKind::No {
                return Err(Error::InvalidPromise(p.c));
            }
        }
        let inst = Self {
            n,
            clauses,
            planted_basis,
            promise,
            provenance: None,
        };
        if let Some(basis) = &inst.planted_basis {
            if basis.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: basis.len(),
                });
            }
            for u in basis {
                check_unitary(u)?;
            }
            for (k, c) in inst.clauses.iter().enumerate() {
                let e = inst.planted_clause_energy(c);
                if e > PLANTED_TOL {
                    return Err(Error::InvalidInstance(format!(
                        "planted state violates clause {k} (energy {e:.3e})"
                    )));
                }
            }
        }
        Ok(inst)
    }

    pub fn with_promise(mut self, promise: Promise) -> Self {
        self.promise = Some(promise);
        self
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Clause count L.
    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn planted_basis(&self) -> Option<&[Matrix2]> {
        self.planted_basis.as_deref()
    }

    pub fn promise(&self) -> Option<Promise> {
        self.promise
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    fn planted_qubit(&self, q: usize) -> Option<[C64; 2]> {
        self.planted_basis
            .as_ref()
            .map(|b| [b[q][(0, 0)], b[q][(1, 0)]])
    }

    fn planted_clause_energy(&self, c: &Clause) -> f64 {
        match (self.planted_qubit(c.i), self.planted_qubit(c.j)) {
            (Some(a), Some(b)) => c.product_energy(&a, &b),
            _ => 0.0,
        }
    }

    /// The planted product state ⊗ W_q|0⟩, if known.
    pub fn planted_state(&self) -> Option<StateVector> {
        let factors: Vec<[C64; 2]> = (0..self.n)
            .map(|q| self.planted_qubit(q))
            .collect::<Option<_>>()?;
        StateVector::product(&factors).ok()
    }

    /// ⊗ W_q, or the identity without a planted basis.
    pub fn hidden_frame(&self) -> Matrix {
        match &self.planted_basis {
            Some(b) => densesim::product_operator(b),
            None => {
                let d = densesim::dim(self.n);
                Matrix::identity(d, d)
            }
        }
    }

    /// Clauses rewritten in the hidden frame, (W_i ⊗ W_j)†|φ⟩.
    pub fn hidden_clauses(&self) -> Vec<Clause> {
        match &self.planted_basis {
            Some(b) => self
                .clauses
                .iter()
                .map(|c| c.transformed(&b[c.i].adjoint(), &b[c.j].adjoint()))
                .collect(),
            None => self.clauses.clone(),
        }
    }

    /// The same instance expressed in its hidden frame, with identity basis.
    pub fn to_hidden_frame(&self) -> Instance {
        Instance {
            n: self.n,
            clauses: self.hidden_clauses(),
            planted_basis: self
                .planted_basis
                .as_ref()
                .map(|_| vec![Matrix2::identity(); self.n]),
            promise: self.promise,
            provenance: None,
        }
    }

    /// Clause forms, classified in the hidden frame.
    pub fn clause_forms(&self) -> Vec<ClauseForm> {
        self.hidden_clauses().iter().map(classify_clause).collect()
    }

    pub fn census(&self) -> BTreeMap<ClauseForm, usize> {
        let mut out = BTreeMap::new();
        for f in self.clause_forms() {
            *out.entry(f).or_insert(0) += 1;
        }
        out
    }
}

fn random_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    (i.min(j), i.max(j))
}

fn restricted_clause<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Clause {
    let (i, j) = random_pair(n, rng);
    let a = densesim::standard_complex(rng);
    let b = densesim::standard_complex(rng);
    make_clause(i, j, [ZERO, a, b, ZERO]).expect("gaussian pair is nonzero")
}

fn type_ii_clause<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Clause {
    let (i, j) = random_pair(n, rng);
    make_clause(i, j, [ZERO, ZERO, ZERO, ONE]).expect("nonzero")
}

fn check_sizes(n: usize, l: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("n = {n} < 2")));
    }
    if l < 1 {
        return Err(Error::InvalidArgument("L must be at least 1".into()));
    }
    Ok(())
}

/// Promise gap attached to generated YES instances.
pub const DEFAULT_YES_GAP: f64 = 1.0;

/// YES instance with clauses a|01⟩ + b|10⟩ on random pairs; |0…0⟩ satisfies
/// every clause.
pub fn generate_planted_restricted(n: usize, l: usize, seed: u64) -> Result<Instance> {
    generate_planted_extended(n, l, 0.0, seed)
}

/// YES instance mixing Type I and Type II (|11⟩) clauses.
pub fn generate_planted_extended(
    n: usize,
    l: usize,
    type_ii_fraction: f64,
    seed: u64,
) -> Result<Instance> {
    check_sizes(n, l)?;
    if !(0.0..=1.0).contains(&type_ii_fraction) {
        return Err(Error::InvalidArgument(format!(
            "Type II fraction {type_ii_fraction} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clauses = (0..l)
        .map(|_| {
            if type_ii_fraction > 0.0 && rng.random::<f64>() < type_ii_fraction {
                type_ii_clause(n, &mut rng)
            } else {
                restricted_clause(n, &mut rng)
            }
        })
        .collect();
    Instance::new(
        n,
        clauses,
        Some(vec![Matrix2::identity(); n]),
        Some(Promise::yes(DEFAULT_YES_GAP)?),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoInstanceStyle {
    /// |00⟩, |01⟩, |10⟩, |11⟩ on one pair; H is the identity there.
    CompletePair,
    /// Random arbitrary clauses until the minimum eigenvalue of H reaches
    /// `c_target`. `clauses` defaults to 2n(n−1).
    RandomCertified {
        c_target: f64,
        clauses: Option<usize>,
    },
}

/// NO instance with a numerically certified promise gap.
pub fn generate_no_instance(n: usize, style: NoInstanceStyle, seed: u64) -> Result<Instance> {
    check_sizes(n, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match style {
        NoInstanceStyle::CompletePair => {
            let (i, j) = random_pair(n, &mut rng);
            let clauses = (0..4)
                .map(|k| {
                    let mut amps = [ZERO; 4];
                    amps[k] = ONE;
                    make_clause(i, j, amps)
                })
                .collect::<Result<Vec<_>>>()?;
            let inst = Instance::new(n, clauses, None, None)?;
            let lambda_min = min_energy(&inst);
            if (lambda_min - 1.0).abs() > 1e-9 {
                return Err(Error::CertificationFailed {
                    c_target: 1.0,
                    attempts: 1,
                });
            }
            Ok(inst.with_promise(Promise::no(1.0)?))
        }
        NoInstanceStyle::RandomCertified { c_target, clauses } => {
            if !(c_target > 0.0) {
                return Err(Error::InvalidPromise(c_target));
            }
            let l = clauses.unwrap_or(2 * n * (n - 1));
            check_sizes(n, l)?;
            for _ in 0..CERTIFY_ATTEMPTS {
                let clauses = (0..l)
                    .map(|_| {
                        let (i, j) = random_pair(n, &mut rng);
                        let amps = std::array::from_fn(|_| densesim::standard_complex(&mut rng));
                        make_clause(i, j, amps)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let inst = Instance::new(n, clauses, None, None)?;
                let lambda_min = min_energy(&inst);
                if lambda_min >= c_target {
                    return Ok(inst.with_promise(Promise::no(lambda_min)?));
                }
            }
            Err(Error::CertificationFailed {
                c_target,
                attempts: CERTIFY_ATTEMPTS,
            })
        }
    }
}

fn min_energy(inst: &Instance) -> f64 {
    observables::build_hamiltonian(inst).eig().values[0]
}

/// Haar-random single-qubit unitaries, one per qubit.
pub fn random_product_basis(n: usize, seed: u64) -> Vec<Matrix2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| trajectory::haar_unitary(&mut rng)).collect()
}

/// Rotates every clause by the product unitary ⊗ v_q, composing the planted
/// basis accordingly. The promise is unchanged.
pub fn conjugate_instance(inst: &Instance, basis: &[Matrix2]) -> Result<Instance> {
    if basis.len() != inst.n {
        return Err(Error::DimensionMismatch {
            expected: inst.n,
            found: basis.len(),
        });
    }
    for u in basis {
        check_unitary(u)?;
    }
    let clauses = inst
        .clauses
        .iter()
        .map(|c| c.transformed(&basis[c.i], &basis[c.j]))
        .collect();
    let planted_basis = inst
        .planted_basis
        .as_ref()
        .map(|w| w.iter().zip(basis).map(|(w, v)| v * w).collect());
    Ok(Instance {
        n: inst.n,
        clauses,
        planted_basis,
        promise: inst.promise,
        provenance: inst.provenance.clone(),
    })
}

type Pair = [f64; 2];

#[derive(Serialize, Deserialize)]
struct ClauseRecord {
    i: usize,
    j: usize,
    amps: [Pair; 4],
}

#[derive(Serialize, Deserialize)]
struct InstanceRecord {
    n: usize,
    clauses: Vec<ClauseRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    planted_basis: Option<Vec<[Pair; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    promise: Option<Promise>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

fn to_pair(z: C64) -> Pair {
    [z.re, z.im]
}

fn from_pair(p: Pair) -> C64 {
    C64::new(p[0], p[1])
}

/// Instance as pretty-printed JSON.
pub fn serialize(inst: &Instance) -> String {
    let record = InstanceRecord {
        n: inst.n,
        clauses: inst
            .clauses
            .iter()
            .map(|c| ClauseRecord {
                i: c.i,
                j: c.j,
                amps: c.amps.map(to_pair),
            })
            .collect(),
        planted_basis: inst.planted_basis.as_ref().map(|b| {
            b.iter()
                .map(|u| [u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]].map(to_pair))
                .collect()
        }),
        promise: inst.promise,
        provenance: inst.provenance.clone(),
    };
    serde_json::to_string_pretty(&record).expect("instance records always serialize")
}

/// Parses and validates an instance. Amplitudes are taken verbatim, so
/// re-serialization reproduces the parsed values bit for bit.
pub fn deserialize(text: &str) -> Result<Instance> {
    let record: InstanceRecord = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    if record.n < 2 {
        return Err(Error::parse("n", format!("n = {} < 2", record.n)));
    }
    if record.clauses.is_empty() {
        return Err(Error::parse("clauses", "no clauses"));
    }
    let mut clauses = Vec::with_capacity(record.clauses.len());
    for (k, c) in record.clauses.iter().enumerate() {
        if c.i == c.j || c.i >= record.n || c.j >= record.n {
            return Err(Error::parse(
                format!("clauses[{k}]"),
                format!("invalid qubit pair ({}, {}) for n = {}", c.i, c.j, record.n),
            ));
        }
        let amps = c.amps.map(from_pair);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::parse(
                format!("clauses[{k}].amps"),
                format!("normalization violated: squared norm {norm}"),
            ));
        }
        clauses.push(Clause {
            i: c.i,
            j: c.j,
            amps,
        });
    }
    let planted_basis = record.planted_basis.map(|b| {
        b.iter()
            .map(|u| {
                let z = u.map(from_pair);
                Matrix2::new(z[0], z[1], z[2], z[3])
            })
            .collect()
    });
    if let Some(p) = record.promise {
        if !(p.c > 0.0) && p.kind == PromiseKind::No {
            return Err(Error::parse(
                "promise.c",
                format!("NO promise needs c > 0, got {}", p.c),
            ));
        }
    }
    let inst = Instance::new(record.n, clauses, planted_basis, record.promise)
        .map_err(|e| Error::parse("instance", e.to_string()))?;
    Ok(match record.provenance {
        Some(p) => inst.with_provenance(p),
        None => inst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn singlet_clause_keeps_unit_norm() {
        let cl = make_clause(0, 1, [ZERO, c(S), c(-S), ZERO]).unwrap();
        let norm: f64 = cl.amps().iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
        assert_eq!(cl.form(), ClauseForm::RestrictedTypeI);
    }

    #[test]
    fn type_ii_clause() {
        let cl = make_clause(0, 1, [ZERO, ZERO, ZERO, ONE]).unwrap();
        assert_eq!(cl.form(), ClauseForm::TypeII);
    }

    #[test]
    fn clause_construction_errors() {
        assert_eq!(
            make_clause(2, 2, [ONE, ZERO, ZERO, ZERO]),
            Err(Error::QubitPairInvalid { i: 2, j: 2 })
        );
        assert_eq!(make_clause(0, 1, [ZERO; 4]), Err(Error::ZeroVector));
    }

    #[test]
    fn normalizes_amplitudes() {
        let cl = make_clause(1, 0, [ZERO, c(3.0), c(4.0), ZERO]).unwrap();
        assert!((cl.amps()[1].re - 0.6).abs() < 1e-15);
        assert!((cl.amps()[2].re - 0.8).abs() < 1e-15);
        assert_eq!((cl.i(), cl.j()), (1, 0));
    }

    #[test]
    fn classification_examples() {
        let f = |a: [C64; 4]| classify_clause(&make_clause(0, 1, a).unwrap());
        assert_eq!(f([ZERO, c(0.6), c(0.8), ZERO]), ClauseForm::RestrictedTypeI);
        assert_eq!(f([ZERO, ZERO, ZERO, ONE]), ClauseForm::TypeII);
        assert_eq!(f([ZERO, c(S), ZERO, c(S)]), ClauseForm::GeneralNoZeroZero);
        assert_eq!(f([c(S), ZERO, ZERO, c(S)]), ClauseForm::Arbitrary);
    }

    proptest! {
        #[test]
        fn classification_ignores_global_phase(
            theta in 0.0..std::f64::consts::TAU,
            kind in 0usize..4,
            re in prop::array::uniform4(-1.0f64..1.0),
            im in prop::array::uniform4(-1.0f64..1.0),
        ) {
            let mut amps: [C64; 4] = std::array::from_fn(|k| C64::new(re[k], im[k]));
            match kind {
                0 => { amps[0] = ZERO; amps[3] = ZERO; }
                1 => { amps = [ZERO, ZERO, ZERO, ONE]; }
                2 => { amps[0] = ZERO; }
                _ => {}
            }
            prop_assume!(amps.iter().any(|a| a.norm() > 1e-3));
            let phase = C64::from_polar(1.0, theta);
            let a = make_clause(0, 1, amps).unwrap();
            let b = make_clause(0, 1, amps.map(|z| z * phase)).unwrap();
            prop_assert_eq!(a.form(), b.form());
        }
    }

    #[test]
    fn restricted_generator_small() {
        let inst = generate_planted_restricted(2, 1, 7).unwrap();
        let cl = &inst.clauses()[0];
        assert_eq!((cl.i(), cl.j()), (0, 1));
        assert_eq!(cl.form(), ClauseForm::RestrictedTypeI);
        let zero = [ONE, ZERO];
        assert!(cl.product_energy(&zero, &zero) < 1e-30);
        assert_eq!(inst.promise().unwrap().kind, PromiseKind::Yes);
    }

    #[test]
    fn restricted_generator_forms() {
        let inst = generate_planted_restricted(4, 6, 1).unwrap();
        assert_eq!(inst.num_clauses(), 6);
        assert!(inst
            .clause_forms()
            .iter()
            .all(|f| *f == ClauseForm::RestrictedTypeI));
        assert!(generate_planted_restricted(1, 1, 0).is_err());
        assert!(generate_planted_restricted(3, 0, 0).is_err());
    }

    #[test]
    fn extended_generator() {
        assert_eq!(
            generate_planted_extended(4, 6, 0.0, 9).unwrap(),
            generate_planted_restricted(4, 6, 9).unwrap()
        );
        let inst = generate_planted_extended(2, 1, 1.0, 4).unwrap();
        let cl = &inst.clauses()[0];
        assert_eq!((cl.i(), cl.j()), (0, 1));
        assert_eq!(cl.amps(), &[ZERO, ZERO, ZERO, ONE]);
        let inst = generate_planted_extended(5, 10, 0.5, 3).unwrap();
        assert!(inst
            .clause_forms()
            .iter()
            .all(|f| matches!(f, ClauseForm::RestrictedTypeI | ClauseForm::TypeII)));
    }

    #[test]
    fn planted_state_annihilated() {
        for seed in 0..20 {
            let inst = generate_planted_extended(5, 8, 0.3, seed).unwrap();
            let psi = inst.planted_state().unwrap();
            let h = observables::build_hamiltonian(&inst);
            assert!(densesim::expectation(&h, &psi).unwrap().abs() <= 1e-10);
        }
    }

    #[test]
    fn complete_pair_no_instance() {
        let inst = generate_no_instance(2, NoInstanceStyle::CompletePair, 0).unwrap();
        assert_eq!(inst.num_clauses(), 4);
        let p = inst.promise().unwrap();
        assert_eq!(p.kind, PromiseKind::No);
        assert_eq!(p.c, 1.0);
        let e = observables::build_hamiltonian(&inst).eig();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn random_certified_no_instance() {
        let style = NoInstanceStyle::RandomCertified {
            c_target: 0.05,
            clauses: None,
        };
        let inst = generate_no_instance(3, style, 5).unwrap();
        let c = inst.promise().unwrap().c;
        assert!(c >= 0.05);
        let lambda = observables::build_hamiltonian(&inst).eig().values[0];
        assert!((lambda - c).abs() < 1e-12);
    }

    #[test]
    fn impossible_certification_fails() {
        let style = NoInstanceStyle::RandomCertified {
            c_target: 10.0,
            clauses: None,
        };
        assert!(matches!(
            generate_no_instance(2, style, 0),
            Err(Error::CertificationFailed { .. })
        ));
    }

    #[test]
    fn identity_conjugation_is_noop() {
        let inst = generate_planted_restricted(3, 4, 2).unwrap();
        let out = conjugate_instance(&inst, &[Matrix2::identity(); 3]).unwrap();
        assert_eq!(out, inst);
    }

    #[test]
    fn singlet_is_invariant_under_uu() {
        let singlet = make_clause(0, 1, [ZERO, c(S), c(-S), ZERO]).unwrap();
        let inst = Instance::new(2, vec![singlet.clone()], None, None).unwrap();
        let u = random_product_basis(1, 42)[0];
        let out = conjugate_instance(&inst, &[u, u]).unwrap();
        // oracle: explicit 4×4 multiplication by u ⊗ u
        let uu = Matrix4::from_fn(|r, col| u[(r / 2, col / 2)] * u[(r % 2, col % 2)]);
        let v = uu * nalgebra::Vector4::from_column_slice(singlet.amps());
        let phase = v[1] / singlet.amps()[1];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        for k in 0..4 {
            assert!((out.clauses()[0].amps()[k] - singlet.amps()[k] * phase).norm() < 1e-12);
            assert!((out.clauses()[0].amps()[k] - v[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugation_rejects_non_unitary() {
        let inst = generate_planted_restricted(2, 1, 0).unwrap();
        let bad = Matrix2::new(c(2.0), ZERO, ZERO, ONE);
        assert!(matches!(
            conjugate_instance(&inst, &[bad, Matrix2::identity()]),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn conjugation_transports_planted_state() {
        for seed in 0..10 {
            let inst = generate_planted_extended(4, 6, 0.4, seed).unwrap();
            let basis = random_product_basis(4, 100 + seed);
            let out = conjugate_instance(&inst, &basis).unwrap();
            let psi = inst.planted_state().unwrap();
            let psi2 = out.planted_state().unwrap();
            for (a, b) in inst.clauses().iter().zip(out.clauses()) {
                let pa = densesim::HermitianOp::new(
                    densesim::kron_embed(&a.projector(), a.i(), a.j(), 4).unwrap(),
                )
                .unwrap();
                let pb = densesim::HermitianOp::new(
                    densesim::kron_embed(&b.projector(), b.i(), b.j(), 4).unwrap(),
                )
                .unwrap();
                let ea = densesim::expectation(&pa, &psi).unwrap();
                let eb = densesim::expectation(&pb, &psi2).unwrap();
                assert!((ea - eb).abs() < 1e-10);
            }
            // the hidden frame recovers the original clause forms
            assert_eq!(out.clause_forms(), inst.clause_forms());
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for seed in 0..100u64 {
            let inst = match seed % 3 {
                0 => generate_planted_restricted(3, 4, seed).unwrap(),
                1 => {
                    let base = generate_planted_extended(4, 5, 0.5, seed).unwrap();
                    conjugate_instance(&base, &random_product_basis(4, seed)).unwrap()
                }
                _ => generate_no_instance(2, NoInstanceStyle::CompletePair, seed).unwrap(),
            };
            let text = serialize(&inst);
            let back = deserialize(&text).unwrap();
            assert_eq!(back, inst);
            assert_eq!(serialize(&back), text);
        }
    }

    #[test]
    fn parse_errors() {
        let missing_n = r#"{"clauses": [{"i": 0, "j": 1, "amps": [[0,0],[1,0],[0,0],[0,0]]}]}"#;
        let err = deserialize(missing_n).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        assert!(err.to_string().contains("`n`"));

        let norm2 = r#"{"n": 2, "clauses": [{"i": 0, "j": 1, "amps": [[0,0],[1,0],[1,0],[1,0]]}]}"#;
        let err = deserialize(norm2).unwrap_err();
        match err {
            Error::Parse { location, message } => {
                assert_eq!(location, "clauses[0].amps");
                assert!(message.contains("normalization"));
            }
            other => panic!("unexpected {other:?}"),
        }

        let negative =
            r#"{"n": 2, "clauses": [{"i": -1, "j": 1, "amps": [[0,0],[1,0],[0,0],[0,0]]}]}"#;
        assert!(matches!(deserialize(negative), Err(Error::Parse { .. })));
    }
}
