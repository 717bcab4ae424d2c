//! Canonical form of two orthogonal bipartite pure states.
//!
//! Any two orthogonal pure states `|ψ₁⟩, |ψ₂⟩` on `H_A ⊗ H_B` can be
//! written, in a suitable Alice basis `{|i⟩}` and with unnormalized
//! Bob-side vectors, as
//!
//! ```text
//! |ψ₁⟩ = Σ_i |i⟩ ⊗ |φ_i⟩        |ψ₂⟩ = Σ_i |i⟩ ⊗ |φ_i^⊥⟩
//! ```
//!
//! with `⟨φ_i^⊥|φ_i⟩ = 0` for every `i`. The Alice basis is found
//! constructively: the cross operator `N = Tr_B(|ψ₁⟩⟨ψ₂|)` is traceless
//! exactly when the states are orthogonal, a traceless matrix is
//! unitarily similar to one with zero diagonal, and the diagonal of
//! `V† N V` is precisely the vector of overlaps `⟨φ_i^⊥|φ_i⟩` in the
//! basis given by `V`'s columns.

use num_complex::Complex64 as C64;

use crate::hilbert::{CMatrix, CVector, PureState, SpaceShape};
use crate::{Error, Result, DEFAULT_TOL};

/// Magnitude below which a diagonal counts as zeroed.
pub const ZERO_DIAG_TOL: f64 = 1e-9;
/// Sweep cap for the zero-diagonal rotation.
pub const MAX_SWEEPS: usize = 100;
/// Norm below which a Bob-side vector is treated as structurally zero.
const ZERO_VECTOR_TOL: f64 = 1e-12;

/// The canonical decomposition data for a pair of orthogonal states.
#[derive(Debug, Clone)]
pub struct CanonicalPair {
    shape: SpaceShape,
    /// Unitary whose columns are the Alice basis vectors `|i⟩_A`.
    pub alice_basis: CMatrix,
    /// `|φ_i⟩ = (⟨i|_A ⊗ I)|ψ₁⟩`, unnormalized.
    pub phis: Vec<CVector>,
    /// `|φ_i^⊥⟩ = (⟨i|_A ⊗ I)|ψ₂⟩`, unnormalized.
    pub phi_perps: Vec<CVector>,
}

/// Orthonormal Bob basis attached to one Alice outcome: the (normalized)
/// `φ` direction, the `φ^⊥` direction, and a completion `{η_p}`.
///
/// Slots are `None` when the corresponding canonical vector is zero; the
/// basis is then completed by an arbitrary orthonormal extension.
#[derive(Debug, Clone)]
pub struct BobBasis {
    pub vectors: Vec<CVector>,
    pub phi_slot: Option<usize>,
    pub phi_perp_slot: Option<usize>,
}

impl BobBasis {
    /// Indices that belong to neither canonical direction.
    pub fn eta_slots(&self) -> Vec<usize> {
        (0..self.vectors.len())
            .filter(|j| Some(*j) != self.phi_slot && Some(*j) != self.phi_perp_slot)
            .collect()
    }
}

/// Expansion of one remaining state `|ψ_n⟩` over the per-outcome Bob
/// bases: `coeffs[i][j] = ⟨B_i[j] | χ_i^n⟩` where
/// `|χ_i^n⟩ = (⟨i|_A ⊗ I)|ψ_n⟩`.
#[derive(Debug, Clone)]
pub struct ResidualExpansion {
    pub coeffs: Vec<Vec<C64>>,
    pub bases: Vec<BobBasis>,
}

impl ResidualExpansion {
    /// Coefficient on the `φ_i` direction (zero when that direction is
    /// structurally absent).
    pub fn a(&self, i: usize) -> C64 {
        match self.bases[i].phi_slot {
            Some(j) => self.coeffs[i][j],
            None => C64::new(0.0, 0.0),
        }
    }

    /// Coefficient on the `φ_i^⊥` direction.
    pub fn b(&self, i: usize) -> C64 {
        match self.bases[i].phi_perp_slot {
            Some(j) => self.coeffs[i][j],
            None => C64::new(0.0, 0.0),
        }
    }

    /// Tail coefficients on the `η_p^i` directions.
    pub fn tail(&self, i: usize) -> Vec<C64> {
        self.bases[i]
            .eta_slots()
            .into_iter()
            .map(|j| self.coeffs[i][j])
            .collect()
    }

    /// Rebuild `|χ_i⟩` from the stored coefficients.
    pub fn reconstruct(&self, i: usize) -> CVector {
        let d_b = self.bases[i].vectors.first().map_or(0, |v| v.len());
        let mut out = CVector::zeros(d_b);
        for (j, v) in self.bases[i].vectors.iter().enumerate() {
            out += v * self.coeffs[i][j];
        }
        out
    }
}

/// Debug-friendly on-disk form of a [`CanonicalPair`]. Complex entries
/// are `[re, im]` pairs; the basis matrix is row-major flattened.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CanonicalPairJson {
    pub dim_a: usize,
    pub dim_b: usize,
    pub alice_basis: Vec<[f64; 2]>,
    pub phis: Vec<Vec<[f64; 2]>>,
    pub phi_perps: Vec<Vec<[f64; 2]>>,
}

impl CanonicalPair {
    pub fn to_json(&self) -> CanonicalPairJson {
        CanonicalPairJson {
            dim_a: self.shape.dim_a,
            dim_b: self.shape.dim_b,
            alice_basis: crate::hilbert::matrix_to_pairs(&self.alice_basis),
            phis: self.phis.iter().map(crate::hilbert::to_pairs).collect(),
            phi_perps: self.phi_perps.iter().map(crate::hilbert::to_pairs).collect(),
        }
    }
}

/// `N = Tr_B(|ψ₁⟩⟨ψ₂|)`, a `d_A × d_A` matrix. Traceless exactly when
/// the inputs are orthogonal; errors otherwise.
pub fn cross_operator(psi1: &PureState, psi2: &PureState) -> Result<CMatrix> {
    if psi1.shape() != psi2.shape() {
        return Err(Error::ShapeMismatch(format!(
            "states live on {} and {}",
            psi1.shape(),
            psi2.shape()
        )));
    }
    let overlap = psi2.inner(psi1)?;
    if overlap.norm() > DEFAULT_TOL.orth {
        return Err(Error::NotOrthogonal(overlap.norm()));
    }
    let shape = psi1.shape();
    let mut n = CMatrix::zeros(shape.dim_a, shape.dim_a);
    for i in 0..shape.dim_a {
        for j in 0..shape.dim_a {
            let mut sum = C64::new(0.0, 0.0);
            for b in 0..shape.dim_b {
                sum += psi1.amplitude(i, b) * psi2.amplitude(j, b).conj();
            }
            n[(i, j)] = sum;
        }
    }
    Ok(n)
}

/// Find a unitary `U` with `diag(U n U†) = 0` for a traceless `n`.
///
/// Sweeps of 2×2 plane rotations: each pair step replaces the two
/// affected diagonal entries by their mean (exactly — the rotation nulls
/// the traceless part of the 2×2 principal block, which is always
/// possible analytically). Since the full trace is zero, the diagonal
/// contracts geometrically to zero; sweeps stop once every entry is
/// below `tol`, erroring after `max_sweeps`.
pub fn zero_diagonal_rotation(n: &CMatrix, tol: f64, max_sweeps: usize) -> Result<CMatrix> {
    let d = n.nrows();
    if n.ncols() != d {
        return Err(Error::ShapeMismatch(format!(
            "expected square matrix, got {}x{}",
            n.nrows(),
            n.ncols()
        )));
    }
    let scale = n.norm().max(1.0);
    let trace = n.trace();
    if trace.norm() > DEFAULT_TOL.orth * scale {
        return Err(Error::NotTraceless(trace.norm()));
    }
    let mut m = n.clone();
    let mut u = CMatrix::identity(d, d);
    if d == 1 {
        // 1x1 traceless matrix is already zero
        return Ok(u);
    }
    for _sweep in 0..max_sweeps {
        let max_diag = (0..d).map(|i| m[(i, i)].norm()).fold(0.0, f64::max);
        if max_diag < tol {
            return Ok(u);
        }
        for k in 0..d {
            for l in (k + 1)..d {
                equalize_pair(&mut m, &mut u, k, l, scale);
            }
        }
    }
    let max_diag = (0..d).map(|i| m[(i, i)].norm()).fold(0.0, f64::max);
    if max_diag < tol {
        Ok(u)
    } else {
        Err(Error::NonConvergence(
            "zero_diagonal_rotation",
            format!("max |diag| = {max_diag:.3e} after {max_sweeps} sweeps"),
        ))
    }
}

/// Apply the plane rotation on `(k, l)` that sends both diagonal entries
/// to their mean. Updates `m ← G m G†` and `u ← G u`.
fn equalize_pair(m: &mut CMatrix, u: &mut CMatrix, k: usize, l: usize, scale: f64) {
    let s = m[(k, k)] + m[(l, l)];
    let half = s * C64::new(0.5, 0.0);
    // traceless part of the 2x2 principal block
    let c = m[(k, k)] - half;
    if c.norm() <= f64::EPSILON * scale {
        return; // entries already equal
    }
    let a = m[(k, l)];
    let b = m[(l, k)];

    // Choose the relative phase so that z = (a e^{iφ} + b e^{-iφ})/2 is
    // collinear with c, then the rotation angle that nulls
    // c cos2θ + z sin2θ.
    let p = ((a + b) * c.conj()).im;
    let q = ((a - b) * c.conj()).re;
    let phi = (-p).atan2(q);
    let e_pos = C64::from_polar(1.0, phi);
    let z = (a * e_pos + b * e_pos.conj()) * C64::new(0.5, 0.0);

    // z is collinear with c by the choice of φ: z c̄ = t |c|² for real t,
    // and 2θ = atan2(-|c|², t |c|²) solves c cos2θ + z sin2θ = 0 exactly
    // for every t, including z = 0
    let denom = (z * c.conj()).re;
    let theta = 0.5 * (-c.norm_sqr()).atan2(denom);
    let (sin_t, cos_t) = theta.sin_cos();

    // 2x2 unitary rows (conjugates of the nulling vectors)
    let g_kk = C64::new(cos_t, 0.0);
    let g_kl = e_pos.conj() * sin_t;
    let g_lk = -e_pos * sin_t;
    let g_ll = C64::new(cos_t, 0.0);

    let d = m.nrows();
    // rows of m
    for j in 0..d {
        let mk = m[(k, j)];
        let ml = m[(l, j)];
        m[(k, j)] = g_kk * mk + g_kl * ml;
        m[(l, j)] = g_lk * mk + g_ll * ml;
    }
    // columns of m (right-multiply by G†)
    for i in 0..d {
        let mk = m[(i, k)];
        let ml = m[(i, l)];
        m[(i, k)] = mk * g_kk.conj() + ml * g_kl.conj();
        m[(i, l)] = mk * g_lk.conj() + ml * g_ll.conj();
    }
    // the rotation puts both entries at the exact mean; re-pinning them
    // keeps the diagonal dynamics an exact pairwise averaging
    debug_assert!(
        (m[(k, k)] - half).norm().max((m[(l, l)] - half).norm()) < 1e-8 * scale,
        "plane rotation failed to equalize the pair"
    );
    m[(k, k)] = half;
    m[(l, l)] = half;
    // rows of u
    for j in 0..d {
        let uk = u[(k, j)];
        let ul = u[(l, j)];
        u[(k, j)] = g_kk * uk + g_kl * ul;
        u[(l, j)] = g_lk * uk + g_ll * ul;
    }
}

/// Compute the canonical decomposition of two orthogonal states.
pub fn walgate_decompose(psi1: &PureState, psi2: &PureState) -> Result<CanonicalPair> {
    let n = cross_operator(psi1, psi2)?;
    let u = zero_diagonal_rotation(&n, ZERO_DIAG_TOL, MAX_SWEEPS)?;
    let alice_basis = u.adjoint(); // columns are the rotated basis vectors
    let shape = psi1.shape();
    let phis = residuals(&alice_basis, psi1);
    let phi_perps = residuals(&alice_basis, psi2);
    Ok(CanonicalPair { shape, alice_basis, phis, phi_perps })
}

/// `χ_i = (⟨i|_A ⊗ I)|ψ⟩` for every column `|i⟩` of `basis`.
fn residuals(basis: &CMatrix, psi: &PureState) -> Vec<CVector> {
    let shape = psi.shape();
    (0..shape.dim_a)
        .map(|i| {
            let mut chi = CVector::zeros(shape.dim_b);
            for a in 0..shape.dim_a {
                let coef = basis[(a, i)].conj();
                for b in 0..shape.dim_b {
                    chi[b] += coef * psi.amplitude(a, b);
                }
            }
            chi
        })
        .collect()
}

impl CanonicalPair {
    pub fn shape(&self) -> SpaceShape {
        self.shape
    }

    /// Residual of an arbitrary state in this pair's Alice basis.
    pub fn residual(&self, psi: &PureState, i: usize) -> Result<CVector> {
        if psi.shape() != self.shape {
            return Err(Error::ShapeMismatch(format!(
                "state on {} against pair on {}",
                psi.shape(),
                self.shape
            )));
        }
        Ok(residuals(&self.alice_basis, psi).swap_remove(i))
    }

    /// `Σ_i |i⟩ ⊗ |φ_i⟩` as a raw amplitude vector (should equal `|ψ₁⟩`).
    pub fn reconstruct_first(&self) -> CVector {
        self.reconstruct(&self.phis)
    }

    /// `Σ_i |i⟩ ⊗ |φ_i^⊥⟩` (should equal `|ψ₂⟩`).
    pub fn reconstruct_second(&self) -> CVector {
        self.reconstruct(&self.phi_perps)
    }

    fn reconstruct(&self, parts: &[CVector]) -> CVector {
        let mut out = CVector::zeros(self.shape.total());
        for (i, part) in parts.iter().enumerate() {
            for a in 0..self.shape.dim_a {
                let coef = self.alice_basis[(a, i)];
                for b in 0..self.shape.dim_b {
                    out[self.shape.index(a, b)] += coef * part[b];
                }
            }
        }
        out
    }

    /// Max magnitude of `⟨φ_i^⊥|φ_i⟩` over `i` — the quantity the
    /// decomposition drives to zero.
    pub fn max_pairwise_overlap(&self) -> f64 {
        self.phis
            .iter()
            .zip(&self.phi_perps)
            .map(|(phi, perp)| perp.dotc(phi).norm())
            .fold(0.0, f64::max)
    }

    /// Per-outcome Bob bases: normalized `φ_i`, normalized `φ_i^⊥`, and
    /// an orthonormal completion. Zero canonical vectors leave their
    /// slot `None`.
    pub fn bob_bases(&self) -> Vec<BobBasis> {
        let d_b = self.shape.dim_b;
        self.phis
            .iter()
            .zip(&self.phi_perps)
            .map(|(phi, perp)| {
                let mut vectors: Vec<CVector> = Vec::with_capacity(d_b);
                let mut phi_slot = None;
                let mut phi_perp_slot = None;
                if phi.norm() > ZERO_VECTOR_TOL {
                    phi_slot = Some(0);
                    vectors.push(phi / C64::new(phi.norm(), 0.0));
                }
                if perp.norm() > ZERO_VECTOR_TOL {
                    let mut w = perp.clone();
                    for u in &vectors {
                        let c = u.dotc(&w);
                        w -= u * c;
                    }
                    // φ and φ⊥ are orthogonal by construction; the
                    // re-orthogonalization only strips rounding noise
                    let norm = w.norm();
                    if norm > ZERO_VECTOR_TOL {
                        phi_perp_slot = Some(vectors.len());
                        vectors.push(w / C64::new(norm, 0.0));
                    }
                }
                // complete with computational directions
                for e in 0..d_b {
                    if vectors.len() == d_b {
                        break;
                    }
                    let mut w = CVector::zeros(d_b);
                    w[e] = C64::new(1.0, 0.0);
                    for u in &vectors {
                        let c = u.dotc(&w);
                        w -= u * c;
                    }
                    for u in &vectors {
                        let c = u.dotc(&w);
                        w -= u * c;
                    }
                    let norm = w.norm();
                    if norm > 1e-8 {
                        vectors.push(w / C64::new(norm, 0.0));
                    }
                }
                debug_assert_eq!(vectors.len(), d_b);
                BobBasis { vectors, phi_slot, phi_perp_slot }
            })
            .collect()
    }
}

/// Expand the remaining states of an ensemble over the pair's Bob bases.
/// Returns one expansion per input state, in order. All states must be
/// on the pair's shape.
pub fn expand_residuals(
    pair: &CanonicalPair,
    others: &[PureState],
) -> Result<Vec<ResidualExpansion>> {
    let bases = pair.bob_bases();
    others
        .iter()
        .map(|psi| {
            if psi.shape() != pair.shape {
                return Err(Error::ShapeMismatch(format!(
                    "state on {} against pair on {}",
                    psi.shape(),
                    pair.shape
                )));
            }
            let chis = residuals(&pair.alice_basis, psi);
            let coeffs = bases
                .iter()
                .zip(&chis)
                .map(|(basis, chi)| {
                    basis.vectors.iter().map(|v| v.dotc(chi)).collect::<Vec<_>>()
                })
                .collect();
            Ok(ResidualExpansion { coeffs, bases: bases.clone() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{random_orthogonal_states, random_traceless_matrix, CVector};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bell(shape: SpaceShape, signs: (f64, f64), flipped: bool) -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (i0, i1) = if flipped { (1, 2) } else { (0, 3) };
        let mut v = CVector::zeros(4);
        v[i0] = c(signs.0 * s, 0.0);
        v[i1] = c(signs.1 * s, 0.0);
        PureState::new(shape, v).unwrap()
    }

    fn unitarity_defect(u: &CMatrix) -> f64 {
        let d = u.nrows();
        let id = CMatrix::identity(d, d);
        (u * u.adjoint() - id).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn cross_operator_of_disjoint_product_states_is_zero() {
        let s = SpaceShape::new(2, 2).unwrap();
        let psi1 = PureState::basis_state(s, 0, 0);
        let psi2 = PureState::basis_state(s, 1, 1);
        let n = cross_operator(&psi1, &psi2).unwrap();
        assert!(n.norm() < 1e-14);
    }

    #[test]
    fn cross_operator_of_phi_pair_is_half_z() {
        let s = SpaceShape::new(2, 2).unwrap();
        let phi_plus = bell(s, (1.0, 1.0), false);
        let phi_minus = bell(s, (1.0, -1.0), false);
        let n = cross_operator(&phi_plus, &phi_minus).unwrap();
        // index-sum oracle gives (|0⟩⟨0| − |1⟩⟨1|)/2
        assert!((n[(0, 0)] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((n[(1, 1)] - c(-0.5, 0.0)).norm() < 1e-12);
        assert!(n[(0, 1)].norm() < 1e-12);
        assert!(n[(1, 0)].norm() < 1e-12);
    }

    #[test]
    fn cross_operator_rejects_non_orthogonal_states() {
        let s = SpaceShape::new(2, 2).unwrap();
        let psi = PureState::basis_state(s, 0, 0);
        assert!(matches!(
            cross_operator(&psi, &psi),
            Err(Error::NotOrthogonal(_))
        ));
    }

    #[test]
    fn zero_diag_on_pauli_z_like_matrix() {
        let n = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        let u = zero_diagonal_rotation(&n, 1e-9, 100).unwrap();
        let rotated = &u * &n * u.adjoint();
        assert!(rotated[(0, 0)].norm() < 1e-12);
        assert!(rotated[(1, 1)].norm() < 1e-12);
        assert!(unitarity_defect(&u) < 1e-12);
        // Hadamard-type: all entries have magnitude 1/√2
        for e in u.iter() {
            assert!((e.norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_diag_on_zero_matrix_is_identity() {
        let n = CMatrix::zeros(3, 3);
        let u = zero_diagonal_rotation(&n, 1e-9, 100).unwrap();
        assert!((u - CMatrix::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn zero_diag_rejects_non_traceless() {
        let n = CMatrix::identity(2, 2);
        assert!(matches!(
            zero_diagonal_rotation(&n, 1e-9, 100),
            Err(Error::NotTraceless(_))
        ));
    }

    #[test]
    fn zero_diag_on_random_traceless_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 2..=6 {
            for _ in 0..20 {
                let n = random_traceless_matrix(dim, &mut rng);
                let u = zero_diagonal_rotation(&n, 1e-9, 100).unwrap();
                let rotated = &u * &n * u.adjoint();
                for i in 0..dim {
                    assert!(
                        rotated[(i, i)].norm() < 1e-9,
                        "diag entry {:.3e} at dim {dim}",
                        rotated[(i, i)].norm()
                    );
                }
                assert!(unitarity_defect(&u) < 1e-10);
            }
        }
    }

    #[test]
    fn decompose_disjoint_product_pair() {
        // |00⟩, |11⟩ → alice basis = identity, φ₀ = |0⟩_B, φ₁ = 0,
        // φ₀⊥ = 0, φ₁⊥ = |1⟩_B
        let s = SpaceShape::new(2, 2).unwrap();
        let psi1 = PureState::basis_state(s, 0, 0);
        let psi2 = PureState::basis_state(s, 1, 1);
        let pair = walgate_decompose(&psi1, &psi2).unwrap();
        assert!((pair.alice_basis.clone() - CMatrix::identity(2, 2)).norm() < 1e-12);
        assert!((pair.phis[0][0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(pair.phis[1].norm() < 1e-12);
        assert!(pair.phi_perps[0].norm() < 1e-12);
        assert!((pair.phi_perps[1][1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn decompose_phi_bell_pair_rotates_to_plus_minus_basis() {
        let s = SpaceShape::new(2, 2).unwrap();
        let phi_plus = bell(s, (1.0, 1.0), false);
        let phi_minus = bell(s, (1.0, -1.0), false);
        let pair = walgate_decompose(&phi_plus, &phi_minus).unwrap();
        assert!(pair.max_pairwise_overlap() < 1e-9);
        // all four B-side vectors nonzero in this genuinely rotated case
        for v in pair.phis.iter().chain(&pair.phi_perps) {
            assert!(v.norm() > 0.1);
        }
        // and each column of the alice basis is unbiased (|±⟩-type)
        for i in 0..2 {
            for a in 0..2 {
                assert!((pair.alice_basis[(a, i)].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
            }
        }
        // reconstruction
        assert!((pair.reconstruct_first() - phi_plus.amplitudes()).norm() < 1e-9);
        assert!((pair.reconstruct_second() - phi_minus.amplitudes()).norm() < 1e-9);
    }

    #[test]
    fn expand_residuals_empty_for_two_state_ensemble() {
        let s = SpaceShape::new(2, 2).unwrap();
        let pair = walgate_decompose(
            &PureState::basis_state(s, 0, 0),
            &PureState::basis_state(s, 1, 1),
        )
        .unwrap();
        let expansions = expand_residuals(&pair, &[]).unwrap();
        assert!(expansions.is_empty());
    }

    #[test]
    fn residual_expansion_reconstructs_remaining_bell_states() {
        let s = SpaceShape::new(2, 2).unwrap();
        let phi_plus = bell(s, (1.0, 1.0), false);
        let phi_minus = bell(s, (1.0, -1.0), false);
        let psi_plus = bell(s, (1.0, 1.0), true);
        let psi_minus = bell(s, (1.0, -1.0), true);
        let pair = walgate_decompose(&phi_plus, &phi_minus).unwrap();
        let expansions = expand_residuals(&pair, &[psi_plus.clone(), psi_minus.clone()]).unwrap();
        for (exp, psi) in expansions.iter().zip([&psi_plus, &psi_minus]) {
            for i in 0..2 {
                let chi = pair.residual(psi, i).unwrap();
                let rebuilt = exp.reconstruct(i);
                assert!((rebuilt - chi).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn residual_expansion_handles_zero_phi_directions() {
        // pair |00⟩,|11⟩ leaves φ₁ = 0 and φ₀⊥ = 0; expanding |01⟩ must
        // still produce a complete basis and consistent coefficients
        let s = SpaceShape::new(2, 2).unwrap();
        let psi1 = PureState::basis_state(s, 0, 0);
        let psi2 = PureState::basis_state(s, 1, 1);
        let other = PureState::basis_state(s, 0, 1);
        let pair = walgate_decompose(&psi1, &psi2).unwrap();
        let exp = expand_residuals(&pair, &[other.clone()]).unwrap().remove(0);
        for i in 0..2 {
            assert_eq!(exp.bases[i].vectors.len(), 2);
            let chi = pair.residual(&other, i).unwrap();
            assert!((exp.reconstruct(i) - chi).norm() < 1e-12);
        }
        // slot bookkeeping: basis 0 has φ but no φ⊥; basis 1 the reverse
        assert!(exp.bases[0].phi_slot.is_some());
        assert!(exp.bases[0].phi_perp_slot.is_none());
        assert!(exp.bases[1].phi_slot.is_none());
        assert!(exp.bases[1].phi_perp_slot.is_some());
        // |01⟩ sits on the φ⊥-free η direction of basis 0
        assert!(exp.a(0).norm() < 1e-12);
        assert!((exp.tail(0)[0].norm() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn random_orthogonal_pairs_decompose_cleanly(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = SpaceShape::new(3, 3).unwrap();
            let states = random_orthogonal_states(s, 2, &mut rng).unwrap();
            let pair = walgate_decompose(&states[0], &states[1]).unwrap();
            prop_assert!(pair.max_pairwise_overlap() < 1e-9);
            prop_assert!((pair.reconstruct_first() - states[0].amplitudes()).norm() < 1e-9);
            prop_assert!((pair.reconstruct_second() - states[1].amplitudes()).norm() < 1e-9);
        }

        #[test]
        fn bob_bases_are_orthonormal(seed in 0u64..2_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = SpaceShape::new(2, 4).unwrap();
            let states = random_orthogonal_states(s, 2, &mut rng).unwrap();
            let pair = walgate_decompose(&states[0], &states[1]).unwrap();
            for basis in pair.bob_bases() {
                prop_assert_eq!(basis.vectors.len(), 4);
                for (j, v) in basis.vectors.iter().enumerate() {
                    for (k, w) in basis.vectors.iter().enumerate() {
                        let expect = if j == k { 1.0 } else { 0.0 };
                        prop_assert!((v.dotc(w).norm() - expect).abs() < 1e-9);
                    }
                }
            }
        }
    }
}
