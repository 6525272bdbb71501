//! Analysis operators: total spin Ŝ = Σσz_i, its square, the clause
//! Hamiltonian H = ΣΦ_α, and spectral quantities of H.
//!
//! σz|0⟩ = +|0⟩ throughout. Operators built "for" an instance live in its
//! hidden frame: with planted basis W = ⊗W_q they are W Ŝ W†.

use crate::densesim::{self, expectation, DensityMatrix, HermitianOp, Matrix, QuantumState};
use crate::instance::{Clause, Instance};
use crate::{Error, Result};

/// Eigenvalues below this are treated as zero.
pub const ZERO_TOL: f64 = 1e-10;

fn spin_diagonal(n: usize) -> Vec<f64> {
    (0..densesim::dim(n))
        .map(|x: usize| n as f64 - 2.0 * x.count_ones() as f64)
        .collect()
}

/// Ŝ = Σ_i σz_i, diagonal with entry n − 2·popcount(x).
pub fn build_total_spin(n: usize) -> HermitianOp {
    HermitianOp::from_diagonal(n, &spin_diagonal(n)).expect("diagonal has dimension 2^n")
}

/// Ŝ² = Σ_{i,j} σz_i σz_j.
pub fn build_total_spin_squared(n: usize) -> HermitianOp {
    let d: Vec<f64> = spin_diagonal(n).into_iter().map(|s| s * s).collect();
    HermitianOp::from_diagonal(n, &d).expect("diagonal has dimension 2^n")
}

/// σz on qubit q.
pub fn sigma_z(q: usize, n: usize) -> HermitianOp {
    let d: Vec<f64> = (0..densesim::dim(n))
        .map(|x| {
            if densesim::bit(x, q, n) == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    HermitianOp::from_diagonal(n, &d).expect("diagonal has dimension 2^n")
}

/// Ŝ and Ŝ² expressed in the instance's hidden frame.
pub fn spin_operators_for(inst: &Instance) -> (HermitianOp, HermitianOp) {
    let s = build_total_spin(inst.n());
    let s2 = build_total_spin_squared(inst.n());
    if inst.planted_basis().is_none() {
        return (s, s2);
    }
    let w = inst.hidden_frame();
    (s.conjugate_by(&w), s2.conjugate_by(&w))
}

/// Φ_α embedded into the n-qubit space.
pub fn clause_projector(clause: &Clause, n: usize) -> Result<HermitianOp> {
    let m = densesim::kron_embed(&clause.projector(), clause.i(), clause.j(), n)?;
    Ok(HermitianOp::from_matrix_unchecked(n, m))
}

/// H = Σ_α Φ_α.
pub fn build_hamiltonian(inst: &Instance) -> HermitianOp {
    let d = densesim::dim(inst.n());
    let mut h = Matrix::zeros(d, d);
    for c in inst.clauses() {
        h += densesim::kron_embed(&c.projector(), c.i(), c.j(), inst.n())
            .expect("instance clauses are in range");
    }
    HermitianOp::from_matrix_unchecked(inst.n(), h)
}

/// Ground-space summary of a positive semidefinite Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    pub min_eigenvalue: f64,
    /// Smallest eigenvalue at or above the zero tolerance.
    pub epsilon: f64,
    pub ground_degeneracy: usize,
    /// Projector Π₀ onto eigenvectors with eigenvalue below the tolerance.
    pub ground_projector: HermitianOp,
}

pub fn spectral_data(h: &HermitianOp, zero_tol: f64) -> Result<SpectralData> {
    let eig = densesim::hermitian_eig(h.matrix())?;
    let epsilon = eig
        .values
        .iter()
        .copied()
        .find(|&v| v >= zero_tol)
        .ok_or(Error::DegenerateSpectrum)?;
    let ground_degeneracy = eig.values.iter().filter(|&&v| v < zero_tol).count();
    let mut p = eig.projector(|v| v < zero_tol);
    p = (&p + p.adjoint()).unscale(2.0);
    Ok(SpectralData {
        min_eigenvalue: eig.values[0],
        epsilon,
        ground_degeneracy,
        ground_projector: HermitianOp::from_matrix_unchecked(h.n(), p),
        eigenvalues: eig.values,
    })
}

/// Π₀ for the instance's Hamiltonian: the zero operator if H has no null
/// space, the identity if H = 0.
pub fn ground_space_projector(inst: &Instance) -> HermitianOp {
    spectral_data(&build_hamiltonian(inst), ZERO_TOL)
        .map(|s| s.ground_projector)
        .unwrap_or_else(|_| HermitianOp::identity(inst.n()))
}

/// tr[Π_f ρ] with Π_f the projector onto eigenvectors of H with eigenvalue
/// below `threshold`.
pub fn low_energy_weight<S: QuantumState + ?Sized>(
    state: &S,
    h: &HermitianOp,
    threshold: f64,
) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold {threshold} must be positive"
        )));
    }
    let eig = densesim::hermitian_eig(h.matrix())?;
    let p = eig.projector(|v| v < threshold);
    let p = HermitianOp::from_matrix_unchecked(h.n(), (&p + p.adjoint()).unscale(2.0));
    expectation(&p, state)
}

/// tr[Ŝ ρ], tr[Ŝ² ρ] and tr[H ρ] in one call.
pub fn spin_energy(inst: &Instance, rho: &DensityMatrix) -> Result<(f64, f64, f64)> {
    let (s, s2) = spin_operators_for(inst);
    let h = build_hamiltonian(inst);
    Ok((
        expectation(&s, rho)?,
        expectation(&s2, rho)?,
        expectation(&h, rho)?,
    ))
}
