//! Dense complex linear algebra over bipartite Hilbert spaces.
//!
//! Everything in this crate lives on a space `H_A ⊗ H_B` with fixed local
//! dimensions. Composite indices are row-major over `(i_A, i_B)`:
//! `flat = i_A * dim_b + i_B`. Tensor products of bipartite objects
//! regroup the parties so the result is again bipartite `A:B` — the `A`
//! factors of both operands are grouped together, likewise the `B`
//! factors. This is what makes `n`-copy operators `ρ^⊗n` live on
//! `H_A^⊗n ⊗ H_B^⊗n` with a single A:B cut across copies.
//!
//! All values are immutable after construction and cheap to clone at the
//! dimensions this crate targets.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Tolerances, DEFAULT_TOL};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Local dimensions of a bipartite space `H_A ⊗ H_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceShape {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl SpaceShape {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidInput(format!(
                "local dimensions must be >= 1, got {dim_a}x{dim_b}"
            )));
        }
        Ok(SpaceShape { dim_a, dim_b })
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    /// Flat index of `(i_A, i_B)`.
    pub fn index(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < self.dim_a && b < self.dim_b);
        a * self.dim_b + b
    }

    /// Inverse of [`SpaceShape::index`].
    pub fn split(&self, flat: usize) -> (usize, usize) {
        (flat / self.dim_b, flat % self.dim_b)
    }

    /// Shape of the party-grouped tensor product with `other`.
    pub fn tensor(&self, other: &SpaceShape) -> SpaceShape {
        SpaceShape { dim_a: self.dim_a * other.dim_a, dim_b: self.dim_b * other.dim_b }
    }
}

impl std::fmt::Display for SpaceShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}⊗{}", self.dim_a, self.dim_b)
    }
}

/// A unit-norm pure state on a bipartite space.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    shape: SpaceShape,
    amplitudes: CVector,
}

impl PureState {
    /// Validating constructor: length must match the shape and the norm
    /// must be 1 within `tol.norm`.
    pub fn new(shape: SpaceShape, amplitudes: CVector) -> Result<Self> {
        Self::with_tolerances(shape, amplitudes, &DEFAULT_TOL)
    }

    pub fn with_tolerances(
        shape: SpaceShape,
        amplitudes: CVector,
        tol: &Tolerances,
    ) -> Result<Self> {
        if amplitudes.len() != shape.total() {
            return Err(Error::ShapeMismatch(format!(
                "amplitude vector has length {}, shape {} needs {}",
                amplitudes.len(),
                shape,
                shape.total()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > tol.norm {
            return Err(Error::NotNormalized((norm - 1.0).abs()));
        }
        Ok(PureState { shape, amplitudes })
    }

    /// Normalize `amplitudes` and wrap; errors on the zero vector.
    pub fn normalized(shape: SpaceShape, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput("cannot normalize the zero vector".into()));
        }
        Self::new(shape, amplitudes / C64::new(norm, 0.0))
    }

    /// Computational basis state `|a⟩_A ⊗ |b⟩_B`.
    pub fn basis_state(shape: SpaceShape, a: usize, b: usize) -> Self {
        let mut v = CVector::zeros(shape.total());
        v[shape.index(a, b)] = C64::new(1.0, 0.0);
        PureState { shape, amplitudes: v }
    }

    /// Haar-ish random state: iid complex Gaussian entries, normalized.
    pub fn random<R: Rng>(shape: SpaceShape, rng: &mut R) -> Self {
        let v = random_complex_vector(shape.total(), rng);
        let norm = v.norm();
        PureState { shape, amplitudes: v / C64::new(norm, 0.0) }
    }

    pub fn shape(&self) -> SpaceShape {
        self.shape
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, a: usize, b: usize) -> C64 {
        self.amplitudes[self.shape.index(a, b)]
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "cannot take inner product of {} and {} states",
                self.shape, other.shape
            )));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Party-grouped tensor product: the result is bipartite with
    /// `A = A₁A₂`, `B = B₁B₂`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let shape = self.shape.tensor(&other.shape);
        let mut v = CVector::zeros(shape.total());
        for a1 in 0..self.shape.dim_a {
            for b1 in 0..self.shape.dim_b {
                let x = self.amplitudes[self.shape.index(a1, b1)];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for a2 in 0..other.shape.dim_a {
                    for b2 in 0..other.shape.dim_b {
                        let y = other.amplitudes[other.shape.index(a2, b2)];
                        let a = a1 * other.shape.dim_a + a2;
                        let b = b1 * other.shape.dim_b + b2;
                        v[shape.index(a, b)] = x * y;
                    }
                }
            }
        }
        PureState { shape, amplitudes: v }
    }

    /// Rank-one density operator `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityOperator {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityOperator { shape: self.shape, matrix: m }
    }
}

/// A product state `|a⟩_A ⊗ |b⟩_B` kept in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    a_part: CVector,
    b_part: CVector,
}

impl ProductState {
    /// Both factors must be unit norm within `DEFAULT_TOL.norm`.
    pub fn new(a_part: CVector, b_part: CVector) -> Result<Self> {
        for part in [&a_part, &b_part] {
            let norm = part.norm();
            if (norm - 1.0).abs() > DEFAULT_TOL.norm {
                return Err(Error::NotNormalized((norm - 1.0).abs()));
            }
        }
        Ok(ProductState { a_part, b_part })
    }

    /// Normalize both factors and wrap; errors on zero factors.
    pub fn normalized(a_part: CVector, b_part: CVector) -> Result<Self> {
        let (na, nb) = (a_part.norm(), b_part.norm());
        if na == 0.0 || nb == 0.0 {
            return Err(Error::InvalidInput("zero factor in product state".into()));
        }
        Ok(ProductState {
            a_part: a_part / C64::new(na, 0.0),
            b_part: b_part / C64::new(nb, 0.0),
        })
    }

    pub fn random<R: Rng>(shape: SpaceShape, rng: &mut R) -> Self {
        let a = random_complex_vector(shape.dim_a, rng);
        let b = random_complex_vector(shape.dim_b, rng);
        Self::normalized(a, b).expect("gaussian vectors are nonzero")
    }

    pub fn a_part(&self) -> &CVector {
        &self.a_part
    }

    pub fn b_part(&self) -> &CVector {
        &self.b_part
    }

    pub fn shape(&self) -> SpaceShape {
        SpaceShape { dim_a: self.a_part.len(), dim_b: self.b_part.len() }
    }

    /// Embed into the composite space (row-major `(i_A, i_B)` Kronecker).
    pub fn embed(&self) -> PureState {
        let shape = self.shape();
        let v = self.a_part.kronecker(&self.b_part);
        PureState { shape, amplitudes: CVector::from_column_slice(v.as_slice()) }
    }

    /// Party-grouped tensor product of two product states.
    pub fn tensor(&self, other: &ProductState) -> ProductState {
        let a = self.a_part.kronecker(&other.a_part);
        let b = self.b_part.kronecker(&other.b_part);
        ProductState {
            a_part: CVector::from_column_slice(a.as_slice()),
            b_part: CVector::from_column_slice(b.as_slice()),
        }
    }

    /// `⟨a ⊗ b| M |a ⊗ b⟩` for an operator on this shape, as a real
    /// number (imaginary part discarded; meaningful for Hermitian `M`).
    pub fn expectation(&self, matrix: &CMatrix) -> f64 {
        let v = self.embed();
        let mv = matrix * v.amplitudes();
        v.amplitudes().dotc(&mv).re
    }
}

/// A Hermitian, positive-semidefinite, trace-one operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    shape: SpaceShape,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validating constructor: checks Hermiticity, positivity (up to
    /// `tol.psd` slack) and unit trace.
    pub fn new(shape: SpaceShape, matrix: CMatrix) -> Result<Self> {
        Self::with_tolerances(shape, matrix, &DEFAULT_TOL)
    }

    pub fn with_tolerances(shape: SpaceShape, matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        let d = shape.total();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::ShapeMismatch(format!(
                "matrix is {}x{}, shape {} needs {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                shape,
                d,
                d
            )));
        }
        let herm_defect = hermiticity_defect(&matrix);
        if herm_defect > tol.herm {
            return Err(Error::NotHermitian(herm_defect));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol.norm || trace.im.abs() > tol.norm {
            return Err(Error::TraceNotOne((trace - C64::new(1.0, 0.0)).norm()));
        }
        let min_eig = hermitian_eigenvalues(&matrix)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -tol.psd {
            return Err(Error::NotPositiveSemidefinite(min_eig));
        }
        Ok(DensityOperator { shape, matrix })
    }

    /// Wrap without re-validating. For internal construction paths that
    /// preserve the invariants structurally (tensoring, projectors).
    pub(crate) fn from_parts_unchecked(shape: SpaceShape, matrix: CMatrix) -> Self {
        DensityOperator { shape, matrix }
    }

    pub fn shape(&self) -> SpaceShape {
        self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Party-grouped tensor product; see [`PureState::tensor`].
    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let shape = self.shape.tensor(&other.shape);
        let matrix = tensor_matrices(&self.matrix, self.shape, &other.matrix, other.shape);
        DensityOperator { shape, matrix }
    }

    /// Trace out Bob's subsystem; the result lives on `A ⊗ C¹`.
    pub fn partial_trace_b(&self) -> DensityOperator {
        let reduced = partial_trace_b(&self.matrix, self.shape)
            .expect("shape is validated at construction");
        DensityOperator {
            shape: SpaceShape { dim_a: self.shape.dim_a, dim_b: 1 },
            matrix: reduced,
        }
    }

    /// Eigenvalues (ascending order not guaranteed).
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    /// Number of eigenvalues above `cutoff`.
    pub fn rank(&self, cutoff: f64) -> usize {
        self.eigenvalues().into_iter().filter(|&e| e > cutoff).count()
    }

    /// Projector onto the range (eigenvalue above `cutoff`).
    pub fn range_projector(&self, cutoff: f64) -> CMatrix {
        let eig = self.matrix.clone().symmetric_eigen();
        let d = self.matrix.nrows();
        let mut p = CMatrix::zeros(d, d);
        for (idx, &val) in eig.eigenvalues.iter().enumerate() {
            if val > cutoff {
                let col = eig.eigenvectors.column(idx);
                p += col * col.adjoint();
            }
        }
        p
    }

    /// `Tr(self · other)` as a real number.
    pub fn overlap(&self, other: &DensityOperator) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "cannot overlap operators on {} and {}",
                self.shape, other.shape
            )));
        }
        Ok((&self.matrix * &other.matrix).trace().re)
    }

    /// `n`-fold party-grouped tensor power.
    pub fn tensor_power(&self, n: usize) -> Result<DensityOperator> {
        if n == 0 {
            return Err(Error::InvalidInput("tensor power needs n >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        Ok(out)
    }
}

/// A subspace held as an orthonormal column basis. Rank zero is allowed
/// (basis with no columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    shape: SpaceShape,
    basis: CMatrix,
}

impl Subspace {
    /// Wrap a basis whose columns are already orthonormal within
    /// `DEFAULT_TOL.orth`.
    pub fn from_orthonormal(shape: SpaceShape, basis: CMatrix) -> Result<Self> {
        if basis.nrows() != shape.total() {
            return Err(Error::ShapeMismatch(format!(
                "basis rows {} don't match space dimension {}",
                basis.nrows(),
                shape.total()
            )));
        }
        if basis.ncols() > shape.total() {
            return Err(Error::InvalidInput(format!(
                "rank {} exceeds space dimension {}",
                basis.ncols(),
                shape.total()
            )));
        }
        let gram = basis.adjoint() * &basis;
        let mut defect = 0.0f64;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let expect = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                defect = defect.max((gram[(i, j)] - expect).norm());
            }
        }
        if defect > DEFAULT_TOL.orth {
            return Err(Error::NotOrthonormal(defect));
        }
        Ok(Subspace { shape, basis })
    }

    /// Span of arbitrary vectors: modified Gram-Schmidt with rank
    /// detection (vectors whose residual norm falls below `1e-12` are
    /// dropped as linearly dependent).
    pub fn span(shape: SpaceShape, vectors: &[CVector]) -> Result<Self> {
        let d = shape.total();
        let mut kept: Vec<CVector> = Vec::new();
        for v in vectors {
            if v.len() != d {
                return Err(Error::ShapeMismatch(format!(
                    "span vector has length {}, expected {}",
                    v.len(),
                    d
                )));
            }
            let mut w = v.clone();
            for u in &kept {
                let c = u.dotc(&w);
                w -= u * c;
            }
            // second orthogonalization pass for numerical safety
            for u in &kept {
                let c = u.dotc(&w);
                w -= u * c;
            }
            let norm = w.norm();
            if norm > 1e-12 {
                kept.push(w / C64::new(norm, 0.0));
            }
        }
        let basis = CMatrix::from_columns(&kept.iter().map(|v| v.column(0)).collect::<Vec<_>>());
        let basis = if kept.is_empty() { CMatrix::zeros(d, 0) } else { basis };
        Ok(Subspace { shape, basis })
    }

    /// The whole space (identity basis).
    pub fn full(shape: SpaceShape) -> Self {
        Subspace { shape, basis: CMatrix::identity(shape.total(), shape.total()) }
    }

    pub fn shape(&self) -> SpaceShape {
        self.shape
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Unnormalized projector `P = B B†` (idempotent, trace = rank).
    pub fn projector(&self) -> CMatrix {
        if self.rank() == 0 {
            return CMatrix::zeros(self.shape.total(), self.shape.total());
        }
        &self.basis * self.basis.adjoint()
    }

    /// `P / rank`, a valid density operator. Errors on the empty
    /// subspace.
    pub fn normalized_projector(&self) -> Result<DensityOperator> {
        let r = self.rank();
        if r == 0 {
            return Err(Error::EmptySubspace);
        }
        let m = self.projector() / C64::new(r as f64, 0.0);
        Ok(DensityOperator { shape: self.shape, matrix: m })
    }

    /// Orthogonal complement: eigenvectors of the projector with
    /// eigenvalue below 1/2. Ranks add up to the space dimension.
    pub fn orthogonal_complement(&self) -> Subspace {
        let d = self.shape.total();
        if self.rank() == 0 {
            return Subspace::full(self.shape);
        }
        if self.rank() == d {
            return Subspace { shape: self.shape, basis: CMatrix::zeros(d, 0) };
        }
        let eig = self.projector().symmetric_eigen();
        let mut cols: Vec<usize> = (0..d).filter(|&i| eig.eigenvalues[i] < 0.5).collect();
        cols.sort_unstable();
        let basis_cols: Vec<_> = cols.iter().map(|&i| eig.eigenvectors.column(i)).collect();
        Subspace { shape: self.shape, basis: CMatrix::from_columns(&basis_cols) }
    }

    /// Whether `v` lies in the subspace within `tol`: `‖P v − v‖ < tol`.
    pub fn contains(&self, v: &CVector, tol: f64) -> bool {
        let pv = self.projector() * v;
        (pv - v).norm() < tol
    }

    /// `n`-fold party-grouped tensor power.
    pub fn tensor_power(&self, n: usize) -> Result<Subspace> {
        if n == 0 {
            return Err(Error::InvalidInput("tensor power needs n >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        Ok(out)
    }

    /// Party-grouped tensor product of subspaces (basis = pairwise
    /// tensor of basis vectors).
    pub fn tensor(&self, other: &Subspace) -> Subspace {
        let shape = self.shape.tensor(&other.shape);
        let mut cols: Vec<CVector> = Vec::with_capacity(self.rank() * other.rank());
        for i in 0..self.rank() {
            let u = PureState {
                shape: self.shape,
                amplitudes: self.basis.column(i).into_owned(),
            };
            for j in 0..other.rank() {
                let v = PureState {
                    shape: other.shape,
                    amplitudes: other.basis.column(j).into_owned(),
                };
                cols.push(u.tensor(&v).amplitudes);
            }
        }
        if cols.is_empty() {
            return Subspace { shape, basis: CMatrix::zeros(shape.total(), 0) };
        }
        let basis = CMatrix::from_columns(&cols.iter().map(|v| v.column(0)).collect::<Vec<_>>());
        Subspace { shape, basis }
    }
}

/// Partial trace over Bob for a raw (not necessarily Hermitian)
/// bipartite operator: `out[a1, a2] = Σ_b M[(a1,b), (a2,b)]`.
pub fn partial_trace_b(matrix: &CMatrix, shape: SpaceShape) -> Result<CMatrix> {
    let d = shape.total();
    if matrix.nrows() != d || matrix.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "matrix is {}x{} but shape {} needs {}x{}",
            matrix.nrows(),
            matrix.ncols(),
            shape,
            d,
            d
        )));
    }
    let mut out = CMatrix::zeros(shape.dim_a, shape.dim_a);
    for a1 in 0..shape.dim_a {
        for a2 in 0..shape.dim_a {
            let mut sum = C64::new(0.0, 0.0);
            for b in 0..shape.dim_b {
                sum += matrix[(shape.index(a1, b), shape.index(a2, b))];
            }
            out[(a1, a2)] = sum;
        }
    }
    Ok(out)
}

/// Party-grouped tensor product of two bipartite operators.
pub fn tensor_matrices(
    m1: &CMatrix,
    s1: SpaceShape,
    m2: &CMatrix,
    s2: SpaceShape,
) -> CMatrix {
    let shape = s1.tensor(&s2);
    let d = shape.total();
    let mut out = CMatrix::zeros(d, d);
    for ra1 in 0..s1.dim_a {
        for rb1 in 0..s1.dim_b {
            for ca1 in 0..s1.dim_a {
                for cb1 in 0..s1.dim_b {
                    let x = m1[(s1.index(ra1, rb1), s1.index(ca1, cb1))];
                    if x == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for ra2 in 0..s2.dim_a {
                        for rb2 in 0..s2.dim_b {
                            for ca2 in 0..s2.dim_a {
                                for cb2 in 0..s2.dim_b {
                                    let y = m2[(s2.index(ra2, rb2), s2.index(ca2, cb2))];
                                    let row = shape.index(
                                        ra1 * s2.dim_a + ra2,
                                        rb1 * s2.dim_b + rb2,
                                    );
                                    let col = shape.index(
                                        ca1 * s2.dim_a + ca2,
                                        cb1 * s2.dim_b + cb2,
                                    );
                                    out[(row, col)] = x * y;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Max entrywise deviation of `M` from `M†`.
pub fn hermiticity_defect(matrix: &CMatrix) -> f64 {
    let adj = matrix.adjoint();
    (matrix - adj).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix (real, unordered).
pub fn hermitian_eigenvalues(matrix: &CMatrix) -> Vec<f64> {
    matrix
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect()
}

/// One standard normal sample (Box-Muller over the rng's uniforms).
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Vector of iid standard complex Gaussian entries.
pub(crate) fn random_complex_vector<R: Rng>(dim: usize, rng: &mut R) -> CVector {
    CVector::from_fn(dim, |_, _| C64::new(standard_normal(rng), standard_normal(rng)))
}

/// Random Hermitian-free complex matrix with iid Gaussian entries.
pub fn random_complex_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(standard_normal(rng), standard_normal(rng))
    })
}

/// Random traceless complex matrix (Gaussian entries, mean of the
/// diagonal subtracted).
pub fn random_traceless_matrix<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let mut m = random_complex_matrix(dim, dim, rng);
    let shift = m.trace() / C64::new(dim as f64, 0.0);
    for i in 0..dim {
        m[(i, i)] -= shift;
    }
    m
}

/// `n` pairwise orthogonal random pure states (Gaussian + Gram-Schmidt).
pub fn random_orthogonal_states<R: Rng>(
    shape: SpaceShape,
    n: usize,
    rng: &mut R,
) -> Result<Vec<PureState>> {
    let d = shape.total();
    if n > d {
        return Err(Error::InvalidInput(format!(
            "cannot fit {n} orthogonal states in dimension {d}"
        )));
    }
    let mut kept: Vec<CVector> = Vec::with_capacity(n);
    while kept.len() < n {
        let mut v = random_complex_vector(d, rng);
        for u in &kept {
            let c = u.dotc(&v);
            v -= u * c;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            kept.push(v / C64::new(norm, 0.0));
        }
    }
    Ok(kept
        .into_iter()
        .map(|v| PureState { shape, amplitudes: v })
        .collect())
}

/* JSON mirror types ********************************************************/

/// On-disk form of a pure state or density operator. Complex numbers are
/// `[re, im]` pairs; matrices are row-major flattened.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    pub dim_a: usize,
    pub dim_b: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
}

pub(crate) fn to_pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

pub(crate) fn matrix_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.push([z.re, z.im]);
        }
    }
    out
}

pub(crate) fn vector_from_pairs(pairs: &[[f64; 2]]) -> CVector {
    CVector::from_iterator(pairs.len(), pairs.iter().map(|p| C64::new(p[0], p[1])))
}

pub(crate) fn matrix_from_pairs(pairs: &[[f64; 2]], dim: usize) -> Result<CMatrix> {
    if pairs.len() != dim * dim {
        return Err(Error::ShapeMismatch(format!(
            "matrix payload has {} entries, expected {}",
            pairs.len(),
            dim * dim
        )));
    }
    Ok(CMatrix::from_fn(dim, dim, |r, c| {
        let p = pairs[r * dim + c];
        C64::new(p[0], p[1])
    }))
}

impl PureState {
    pub fn to_json(&self) -> StateJson {
        StateJson {
            dim_a: self.shape.dim_a,
            dim_b: self.shape.dim_b,
            amplitudes: Some(to_pairs(&self.amplitudes)),
            matrix: None,
        }
    }

    pub fn from_json(json: &StateJson) -> Result<Self> {
        let shape = SpaceShape::new(json.dim_a, json.dim_b)?;
        let amps = json
            .amplitudes
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("state json has no amplitudes".into()))?;
        PureState::new(shape, vector_from_pairs(amps))
    }
}

impl DensityOperator {
    pub fn to_json(&self) -> StateJson {
        StateJson {
            dim_a: self.shape.dim_a,
            dim_b: self.shape.dim_b,
            amplitudes: None,
            matrix: Some(matrix_to_pairs(&self.matrix)),
        }
    }

    pub fn from_json(json: &StateJson) -> Result<Self> {
        let shape = SpaceShape::new(json.dim_a, json.dim_b)?;
        let pairs = json
            .matrix
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("state json has no matrix".into()))?;
        DensityOperator::new(shape, matrix_from_pairs(pairs, shape.total())?)
    }
}
