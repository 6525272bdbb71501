//! Dense linear algebra over the 2ⁿ-dimensional qubit Hilbert space.
//!
//! Qubit 0 is the most significant bit of a basis-state index, so the
//! basis state |q₀ q₁ … qₙ₋₁⟩ has index Σ q_k 2^(n-1-k). Two-qubit
//! operators act on an ordered pair (i, j) with qubit i as the left tensor
//! factor: the local index is 2·bit_i + bit_j.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::ComplexFloat;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result, C64};

pub type Matrix = DMatrix<C64>;
pub type Matrix2 = nalgebra::Matrix2<C64>;
pub type Matrix4 = nalgebra::Matrix4<C64>;

/// Tolerance on ‖A − A†‖_max for Hermitian operators.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on |tr ρ − 1| for density matrices.
pub const TRACE_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn dim(n: usize) -> usize {
    1usize << n
}

#[inline]
pub(crate) fn shift(q: usize, n: usize) -> usize {
    n - 1 - q
}

#[inline]
pub(crate) fn bit(index: usize, q: usize, n: usize) -> usize {
    (index >> shift(q, n)) & 1
}

fn qubits_for_dim(d: usize) -> Result<usize> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "dimension {d} is not a power of two >= 2"
        )));
    }
    Ok(d.trailing_zeros() as usize)
}

fn check_qubit(q: usize, n: usize) -> Result<()> {
    if q >= n {
        return Err(Error::IndexOutOfRange { index: q, n });
    }
    Ok(())
}

fn check_pair(i: usize, j: usize, n: usize) -> Result<()> {
    check_qubit(i, n)?;
    check_qubit(j, n)?;
    if i == j {
        return Err(Error::QubitPairInvalid { i, j });
    }
    Ok(())
}

/// Largest entrywise deviation ‖A − A†‖_max.
pub fn hermitian_deviation(m: &Matrix) -> f64 {
    let d = m.nrows();
    let mut worst = 0.0f64;
    for c in 0..d {
        for r in c..d {
            let dev = (m[(r, c)] - m[(c, r)].conj()).norm();
            worst = worst.max(dev);
        }
    }
    worst
}

/// Largest entrywise deviation ‖U†U − I‖_max.
pub fn unitary_deviation(m: &Matrix) -> f64 {
    let prod = m.adjoint() * m;
    let d = prod.nrows();
    let mut worst = 0.0f64;
    for c in 0..d {
        for r in 0..d {
            let target = if r == c { ONE } else { ZERO };
            worst = worst.max((prod[(r, c)] - target).norm());
        }
    }
    worst
}

pub(crate) fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// A normalized pure state on n qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: DVector<C64>,
}

impl StateVector {
    /// Computational basis state with the given index.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if index >= dim(n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        let mut amps = DVector::from_element(dim(n), ZERO);
        amps[index] = ONE;
        Ok(Self { n, amps })
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = qubits_for_dim(amps.len())?;
        let mut amps = DVector::from_vec(amps);
        let norm = amps.norm();
        if norm < 1e-14 {
            return Err(Error::ZeroVector);
        }
        amps.unscale_mut(norm);
        Ok(Self { n, amps })
    }

    /// Tensor product of single-qubit states, qubit 0 first.
    pub fn product(factors: &[[C64; 2]]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("empty product state".into()));
        }
        let mut amps = vec![ONE];
        for f in factors {
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(a * f[0]);
                next.push(a * f[1]);
            }
            amps = next;
        }
        Self::from_amplitudes(amps)
    }

    /// Haar-random pure state.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let amps = (0..dim(n)).map(|_| standard_complex(rng)).collect();
        Self::from_amplitudes(amps).expect("gaussian vector is nonzero")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub(crate) fn amps_mut(&mut self) -> &mut DVector<C64> {
        &mut self.amps
    }

    pub(crate) fn renormalize(&mut self) -> f64 {
        let norm = self.amps.norm();
        self.amps.unscale_mut(norm);
        norm
    }

    /// Applies a single-qubit operator to qubit `q` in place.
    pub fn apply_single(&mut self, u: &Matrix2, q: usize) -> Result<()> {
        check_qubit(q, self.n)?;
        let s = 1usize << shift(q, self.n);
        for base in 0..dim(self.n) {
            if base & s != 0 {
                continue;
            }
            let a0 = self.amps[base];
            let a1 = self.amps[base | s];
            self.amps[base] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
            self.amps[base | s] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
        }
        Ok(())
    }

    /// Applies a two-qubit operator to the ordered pair (i, j) in place.
    pub fn apply_pair(&mut self, op: &Matrix4, i: usize, j: usize) -> Result<()> {
        check_pair(i, j, self.n)?;
        let (si, sj) = (1usize << shift(i, self.n), 1usize << shift(j, self.n));
        let offsets = [0, sj, si, si | sj];
        for base in 0..dim(self.n) {
            if base & (si | sj) != 0 {
                continue;
            }
            let local: [C64; 4] = std::array::from_fn(|k| self.amps[base | offsets[k]]);
            for r in 0..4 {
                let mut acc = ZERO;
                for (c, v) in local.iter().enumerate() {
                    acc += op[(r, c)] * v;
                }
                self.amps[base | offsets[r]] = acc;
            }
        }
        Ok(())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            n: self.n,
            mat: &self.amps * self.amps.adjoint(),
        }
    }
}

/// A mixed state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    mat: Matrix,
}

impl DensityMatrix {
    /// Validates hermiticity and unit trace. Positivity is not checked here;
    /// see [`DensityMatrix::min_eigenvalue`].
    pub fn from_matrix(mat: Matrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        let n = qubits_for_dim(mat.nrows())?;
        let deviation = hermitian_deviation(&mat);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        Ok(Self { n, mat })
    }

    pub(crate) fn from_matrix_unchecked(n: usize, mat: Matrix) -> Self {
        debug_assert_eq!(mat.nrows(), dim(n));
        Self { n, mat }
    }

    /// I / 2ⁿ.
    pub fn maximally_mixed(n: usize) -> Self {
        let d = dim(n);
        Self {
            n,
            mat: Matrix::identity(d, d).unscale(d as f64),
        }
    }

    pub fn basis(n: usize, index: usize) -> Result<Self> {
        Ok(StateVector::basis(n, index)?.to_density())
    }

    pub fn pure(psi: &StateVector) -> Self {
        psi.to_density()
    }

    /// Random full-rank state G G† / tr(G G†) with G a complex Ginibre matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let d = dim(n);
        let g = Matrix::from_fn(d, d, |_, _| standard_complex(rng));
        let mut mat = &g * g.adjoint();
        let tr = mat.trace().re;
        mat.unscale_mut(tr);
        let mut rho = Self { n, mat };
        rho.symmetrize();
        rho
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eig(&self.mat)
            .map(|e| e.values[0])
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// U ρ U†.
    pub fn conjugate_by(&self, u: &Matrix) -> Result<Self> {
        if u.nrows() != self.mat.nrows() || u.ncols() != self.mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.mat.nrows(),
                found: u.nrows(),
            });
        }
        Ok(Self {
            n: self.n,
            mat: u * &self.mat * u.adjoint(),
        })
    }

    /// Replaces ρ by (ρ + ρ†)/2 rescaled to unit trace. Returns the largest
    /// correction applied, the sum of hermiticity and trace deviations.
    pub fn symmetrize(&mut self) -> f64 {
        let herm = hermitian_deviation(&self.mat);
        let sym = (&self.mat + self.mat.adjoint()).unscale(2.0);
        let tr = sym.trace().re;
        self.mat = sym.unscale(tr);
        herm + (tr - 1.0).abs()
    }

    /// Largest entrywise difference to another state.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.mat - &other.mat)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Trace distance ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        let diff = &self.mat - &other.mat;
        let eig = hermitian_eig(&diff)?;
        Ok(0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>())
    }
}

/// A Hermitian operator on n qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    n: usize,
    mat: Matrix,
}

impl HermitianOp {
    pub fn new(mat: Matrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        let n = qubits_for_dim(mat.nrows())?;
        let deviation = hermitian_deviation(&mat);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { n, mat })
    }

    pub fn from_diagonal(n: usize, diag: &[f64]) -> Result<Self> {
        if diag.len() != dim(n) {
            return Err(Error::DimensionMismatch {
                expected: dim(n),
                found: diag.len(),
            });
        }
        let v = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Ok(Self {
            n,
            mat: Matrix::from_diagonal(&v),
        })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            mat: Matrix::zeros(dim(n), dim(n)),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            mat: Matrix::identity(dim(n), dim(n)),
        }
    }

    pub(crate) fn from_matrix_unchecked(n: usize, mat: Matrix) -> Self {
        Self { n, mat }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn eig(&self) -> Eigen {
        hermitian_eig(&self.mat).expect("validated Hermitian operator")
    }

    /// V A V† for a unitary V on the same space.
    pub fn conjugate_by(&self, v: &Matrix) -> Self {
        let mut mat = v * &self.mat * v.adjoint();
        mat = (&mat + mat.adjoint()).unscale(2.0);
        Self { n: self.n, mat }
    }

    pub fn product(&self, other: &HermitianOp) -> Matrix {
        &self.mat * &other.mat
    }
}

/// Anything an expectation value can be taken against.
pub trait QuantumState {
    fn num_qubits(&self) -> usize;
    /// tr[Aρ] or ⟨ψ|A|ψ⟩ without the reality check.
    fn raw_expectation(&self, a: &Matrix) -> C64;
}

impl QuantumState for DensityMatrix {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn raw_expectation(&self, a: &Matrix) -> C64 {
        trace_of_product(a, &self.mat)
    }
}

impl QuantumState for StateVector {
    fn num_qubits(&self) -> usize {
        self.n
    }

    fn raw_expectation(&self, a: &Matrix) -> C64 {
        let av = a * &self.amps;
        self.amps.dotc(&av)
    }
}

/// tr[A B] without forming the product.
pub fn trace_of_product(a: &Matrix, b: &Matrix) -> C64 {
    let d = a.nrows();
    let mut acc = ZERO;
    for r in 0..d {
        for c in 0..d {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

/// Expectation value of a Hermitian operator. Imaginary residue above 1e−8
/// is an error; anything smaller is discarded.
pub fn expectation<S: QuantumState + ?Sized>(a: &HermitianOp, state: &S) -> Result<f64> {
    if a.n != state.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: dim(a.n),
            found: dim(state.num_qubits()),
        });
    }
    let z = state.raw_expectation(&a.mat);
    if z.im.abs() > 1e-8 {
        return Err(Error::NonRealExpectation { imag: z.im });
    }
    Ok(z.re)
}

/// Embeds a 4×4 operator on the ordered qubit pair (i, j) of an n-qubit
/// register, identity elsewhere.
pub fn kron_embed(op4: &Matrix4, i: usize, j: usize, n: usize) -> Result<Matrix> {
    check_pair(i, j, n)?;
    let d = dim(n);
    let mask = (1usize << shift(i, n)) | (1usize << shift(j, n));
    let local = |x: usize| 2 * bit(x, i, n) + bit(x, j, n);
    Ok(Matrix::from_fn(d, d, |r, c| {
        if r & !mask == c & !mask {
            op4[(local(r), local(c))]
        } else {
            ZERO
        }
    }))
}

/// Embeds a 2×2 operator on qubit q, identity elsewhere.
pub fn embed_single(op2: &Matrix2, q: usize, n: usize) -> Result<Matrix> {
    check_qubit(q, n)?;
    let d = dim(n);
    let mask = 1usize << shift(q, n);
    Ok(Matrix::from_fn(d, d, |r, c| {
        if r & !mask == c & !mask {
            op2[(bit(r, q, n), bit(c, q, n))]
        } else {
            ZERO
        }
    }))
}

/// ⊗ₖ blocks[k] with qubit 0 as the leftmost factor.
pub fn product_operator(blocks: &[Matrix2]) -> Matrix {
    let mut out = Matrix::from_element(1, 1, ONE);
    for b in blocks {
        let b = Matrix::from_fn(2, 2, |r, c| b[(r, c)]);
        out = out.kronecker(&b);
    }
    out
}

/// tr_q over an n-qubit matrix, returning an (n−1)-qubit matrix.
pub(crate) fn partial_trace_matrix(m: &Matrix, n: usize, q: usize) -> Matrix {
    let d_out = dim(n - 1);
    let s = shift(q, n);
    // insert a zero bit at position s of a reduced index
    let expand = |x: usize| {
        let low = x & ((1usize << s) - 1);
        let high = x >> s;
        (high << (s + 1)) | low
    };
    Matrix::from_fn(d_out, d_out, |r, c| {
        let (r0, c0) = (expand(r), expand(c));
        m[(r0, c0)] + m[(r0 | (1 << s), c0 | (1 << s))]
    })
}

/// (𝟙_q/2) ⊗ tr_q[m], re-embedded at position q.
pub(crate) fn twirl_matrix(m: &Matrix, n: usize, q: usize) -> Matrix {
    let d = dim(n);
    let sb = 1usize << shift(q, n);
    let mut out = Matrix::zeros(d, d);
    for c in 0..d {
        if c & sb != 0 {
            continue;
        }
        for r in 0..d {
            if r & sb != 0 {
                continue;
            }
            let v = (m[(r, c)] + m[(r | sb, c | sb)]) * 0.5;
            out[(r, c)] = v;
            out[(r | sb, c | sb)] = v;
        }
    }
    out
}

/// Partial trace over qubit q.
pub fn partial_trace(rho: &DensityMatrix, q: usize) -> Result<DensityMatrix> {
    check_qubit(q, rho.n)?;
    if rho.n < 2 {
        return Err(Error::InvalidArgument(
            "cannot trace out the only qubit".into(),
        ));
    }
    Ok(DensityMatrix::from_matrix_unchecked(
        rho.n - 1,
        partial_trace_matrix(&rho.mat, rho.n, q),
    ))
}

/// m ← (op4 on (i, j)) · m, in place.
pub(crate) fn apply_local_left(m: &mut Matrix, op4: &Matrix4, i: usize, j: usize, n: usize) {
    let d = dim(n);
    let (si, sj) = (1usize << shift(i, n), 1usize << shift(j, n));
    let offsets = [0, sj, si, si | sj];
    for c in 0..d {
        let col = &mut m.as_mut_slice()[c * d..(c + 1) * d];
        for base in 0..d {
            if base & (si | sj) != 0 {
                continue;
            }
            let v: [C64; 4] = std::array::from_fn(|k| col[base | offsets[k]]);
            for r in 0..4 {
                col[base | offsets[r]] = op4[(r, 0)] * v[0]
                    + op4[(r, 1)] * v[1]
                    + op4[(r, 2)] * v[2]
                    + op4[(r, 3)] * v[3];
            }
        }
    }
}

/// m ← m · (op4 on (i, j)), in place.
pub(crate) fn apply_local_right(m: &mut Matrix, op4: &Matrix4, i: usize, j: usize, n: usize) {
    let d = dim(n);
    let (si, sj) = (1usize << shift(i, n), 1usize << shift(j, n));
    let offsets = [0, sj, si, si | sj];
    let data = m.as_mut_slice();
    for base in 0..d {
        if base & (si | sj) != 0 {
            continue;
        }
        let cols: [usize; 4] = std::array::from_fn(|k| base | offsets[k]);
        for r in 0..d {
            let v: [C64; 4] = std::array::from_fn(|k| data[cols[k] * d + r]);
            for k in 0..4 {
                data[cols[k] * d + r] = v[0] * op4[(0, k)]
                    + v[1] * op4[(1, k)]
                    + v[2] * op4[(2, k)]
                    + v[3] * op4[(3, k)];
            }
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    /// Column k is the eigenvector for `values[k]`.
    pub vectors: Matrix,
}

impl Eigen {
    /// Σ λ_k v_k v_k†.
    pub fn reconstruct(&self) -> Matrix {
        let d = self.vectors.nrows();
        let mut out = Matrix::zeros(d, d);
        for (k, &lambda) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            out += (v * v.adjoint()).scale(lambda);
        }
        out
    }

    /// Projector onto the span of eigenvectors whose eigenvalue satisfies `keep`.
    pub fn projector<F: Fn(f64) -> bool>(&self, keep: F) -> Matrix {
        let d = self.vectors.nrows();
        let mut out = Matrix::zeros(d, d);
        for (k, &lambda) in self.values.iter().enumerate() {
            if keep(lambda) {
                let v = self.vectors.column(k);
                out += v * v.adjoint();
            }
        }
        out
    }
}

/// Hermitian eigen-decomposition.
pub fn hermitian_eig(a: &Matrix) -> Result<Eigen> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let deviation = hermitian_deviation(a);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let sym = (a + a.adjoint()).unscale(2.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let d = a.nrows();
    let vectors = Matrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

/// Pauli Z with σz|0⟩ = +|0⟩.
pub fn pauli_z() -> Matrix2 {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

/// Outer product |v⟩⟨v| of a 4-vector.
pub fn outer4(v: &[C64; 4]) -> Matrix4 {
    Matrix4::from_fn(|r, c| v[r] * v[c].conj())
}

#[cfg(test)]
pub(crate) fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let g = Matrix::from_fn(d, d, |_, _| standard_complex(rng));
        (&g + g.adjoint()).unscale(2.0)
    }

    fn random4(rng: &mut ChaCha8Rng) -> Matrix4 {
        Matrix4::from_fn(|_, _| standard_complex(rng))
    }

    #[test]
    fn embed_identity_is_identity() {
        let m = kron_embed(&Matrix4::identity(), 0, 2, 3).unwrap();
        assert_eq!(m, Matrix::identity(8, 8));
    }

    #[test]
    fn embed_zz_is_diagonal() {
        let z = pauli_z();
        let zz = Matrix4::from_fn(|r, c| z[(r / 2, c / 2)] * z[(r % 2, c % 2)]);
        let m = kron_embed(&zz, 0, 1, 2).unwrap();
        let expected = [1.0, -1.0, -1.0, 1.0];
        for r in 0..4 {
            for col in 0..4 {
                let want = if r == col { c(expected[r]) } else { ZERO };
                assert_eq!(m[(r, col)], want);
            }
        }
    }

    #[test]
    fn embed_projector_matches_index_arithmetic() {
        // |11⟩⟨11| on (0, 2) of 3 qubits; oracle: diag entry x is 1 iff bits 0 and 2 are set
        let mut p = Matrix4::zeros();
        p[(3, 3)] = ONE;
        let m = kron_embed(&p, 0, 2, 3).unwrap();
        for x in 0..8usize {
            let want = if (x >> 2) & 1 == 1 && x & 1 == 1 {
                1.0
            } else {
                0.0
            };
            assert_eq!(m[(x, x)], c(want));
        }
        let psi = StateVector::basis(3, 0b101).unwrap();
        let out = &m * psi.amplitudes();
        assert_eq!(out, *psi.amplitudes());
    }

    #[test]
    fn embed_rejects_bad_indices() {
        assert!(matches!(
            kron_embed(&Matrix4::identity(), 0, 3, 3),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            kron_embed(&Matrix4::identity(), 1, 1, 3),
            Err(Error::QubitPairInvalid { .. })
        ));
    }

    #[test]
    fn disjoint_embeddings_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 4..=5 {
            for _ in 0..5 {
                let a = kron_embed(&random4(&mut rng), 0, 2, n).unwrap();
                let b = kron_embed(&random4(&mut rng), 3, 1, n).unwrap();
                let diff = &a * &b - &b * &a;
                assert!(max_abs(&diff) < 1e-10);
            }
        }
    }

    #[test]
    fn local_apply_matches_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 4;
        let m = Matrix::from_fn(16, 16, |_, _| standard_complex(&mut rng));
        let op = random4(&mut rng);
        let full = kron_embed(&op, 3, 1, n).unwrap();
        let mut left = m.clone();
        apply_local_left(&mut left, &op, 3, 1, n);
        assert!(max_abs(&(left - &full * &m)) < 1e-12);
        let mut right = m.clone();
        apply_local_right(&mut right, &op, 3, 1, n);
        assert!(max_abs(&(right - &m * &full)) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let rho = DensityMatrix::basis(2, 0b01).unwrap();
        let red = partial_trace(&rho, 0).unwrap();
        assert_eq!(red.matrix(), DensityMatrix::basis(1, 1).unwrap().matrix());
        let red = partial_trace(&rho, 1).unwrap();
        assert_eq!(red.matrix(), DensityMatrix::basis(1, 0).unwrap().matrix());
    }

    #[test]
    fn partial_trace_of_singlet_is_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::from_amplitudes(vec![ZERO, c(s), c(-s), ZERO]).unwrap();
        let rho = psi.to_density();
        for q in 0..2 {
            let red = partial_trace(&rho, q).unwrap();
            assert!(red.max_abs_diff(&DensityMatrix::maximally_mixed(1)) < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_mixed_state() {
        let rho = DensityMatrix::maximally_mixed(4);
        for q in 0..4 {
            let red = partial_trace(&rho, q).unwrap();
            assert!(red.max_abs_diff(&DensityMatrix::maximally_mixed(3)) < 1e-15);
        }
        assert!(matches!(
            partial_trace(&rho, 4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn partial_trace_commutes_with_local_operator_elsewhere() {
        // tr_q[(A ⊗ 𝟙_q) ρ] = A tr_q[ρ] for A acting on the other qubits
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = DensityMatrix::random(3, &mut rng);
        let op = random4(&mut rng);
        let full = kron_embed(&op, 0, 1, 3).unwrap();
        let lhs = partial_trace_matrix(&(&full * rho.matrix()), 3, 2);
        let reduced_op = kron_embed(&op, 0, 1, 2).unwrap();
        let rhs = &reduced_op * partial_trace_matrix(rho.matrix(), 3, 2);
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn partial_trace_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 2..=5 {
            let rho = DensityMatrix::random(n, &mut rng);
            for q in 0..n {
                let red = partial_trace(&rho, q).unwrap();
                assert!((red.trace() - rho.trace()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eig_of_pauli_z() {
        let z = Matrix::from_fn(2, 2, |r, col| pauli_z()[(r, col)]);
        let e = hermitian_eig(&z).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12);
        assert!((e.values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_of_singlet_projector() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = outer4(&[ZERO, c(s), c(-s), ZERO]);
        let m = kron_embed(&p, 0, 1, 2).unwrap();
        let e = hermitian_eig(&m).unwrap();
        for (got, want) in e.values.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-8);
        }
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for d in [2, 4, 8, 16, 32] {
            let a = random_hermitian(d, &mut rng);
            let e = hermitian_eig(&a).unwrap();
            assert!(max_abs(&(e.reconstruct() - &a)) <= 1e-8);
            assert!(unitary_deviation(&e.vectors) <= 1e-8);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn projector_eigenvalues_are_binary() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a = random_hermitian(8, &mut rng);
        let p = hermitian_eig(&a).unwrap().projector(|v| v < 0.0);
        let e = hermitian_eig(&p).unwrap();
        for v in e.values {
            assert!(v.abs() < 1e-8 || (v - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn expectation_values() {
        let z = HermitianOp::from_diagonal(1, &[1.0, -1.0]).unwrap();
        let rho = DensityMatrix::basis(1, 0).unwrap();
        assert_eq!(expectation(&z, &rho).unwrap(), 1.0);
        let psi = StateVector::basis(1, 1).unwrap();
        assert_eq!(expectation(&z, &psi).unwrap(), -1.0);
        let wrong = DensityMatrix::maximally_mixed(2);
        assert!(matches!(
            expectation(&z, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expectation_agrees_between_pure_and_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = HermitianOp::new(random_hermitian(8, &mut rng)).unwrap();
        let psi = StateVector::random(3, &mut rng);
        let x = expectation(&a, &psi).unwrap();
        let y = expectation(&a, &psi.to_density()).unwrap();
        assert!((x - y).abs() < 1e-12);
    }

    #[test]
    fn single_and_pair_application_match_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let psi = StateVector::random(3, &mut rng);
        let u = Matrix2::from_fn(|_, _| standard_complex(&mut rng));
        let mut a = psi.clone();
        a.apply_single(&u, 1).unwrap();
        let want = embed_single(&u, 1, 3).unwrap() * psi.amplitudes();
        assert!((a.amplitudes() - want).norm() < 1e-12);

        let op = random4(&mut rng);
        let mut b = psi.clone();
        b.apply_pair(&op, 2, 0).unwrap();
        let want = kron_embed(&op, 2, 0, 3).unwrap() * psi.amplitudes();
        assert!((b.amplitudes() - want).norm() < 1e-12);
    }

    #[test]
    fn product_operator_orders_qubit_zero_first() {
        let x = Matrix2::new(ZERO, ONE, ONE, ZERO);
        let v = product_operator(&[x, Matrix2::identity()]);
        // X on qubit 0 maps |00⟩ (index 0) to |10⟩ (index 2)
        assert_eq!(v[(2, 0)], ONE);
        assert_eq!(v, embed_single(&x, 0, 2).unwrap());
    }

    #[test]
    fn random_density_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 1..=4 {
            let rho = DensityMatrix::random(n, &mut rng);
            assert!(DensityMatrix::from_matrix(rho.matrix().clone()).is_ok());
            assert!(rho.min_eigenvalue() > -1e-12);
        }
    }
}
