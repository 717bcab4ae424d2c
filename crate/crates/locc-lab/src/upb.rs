//! Unextendible product bases and the sigma/rho ensembles built on them.
//!
//! An unextendible product basis (UPB) is an orthogonal set of product
//! states whose complementary subspace contains no product state. The
//! pair {normalized projector onto the span, any state supported on the
//! complement} is orthogonal yet cannot be conclusively told apart by
//! local measurements — and tensor powers inherit the property, because
//! the tensor product of two bipartite UPBs is again a UPB.
//!
//! Orthogonality of a candidate is checked exactly; *un*extendibility is
//! certified heuristically by a multi-restart see-saw search over the
//! complement projector (see [`crate::witness`]).

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::hilbert::{
    random_complex_matrix, random_complex_vector, to_pairs, vector_from_pairs, CVector,
    DensityOperator, ProductState, SpaceShape, Subspace,
};
use crate::witness::{max_product_overlap, SeesawConfig};
use crate::{Error, Result};

/// Pairwise member overlaps must stay below this for a candidate to
/// count as orthogonal (the catalog constructions are exact to machine
/// precision, far below it).
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// A named set of product states proposed as a UPB.
#[derive(Debug, Clone)]
pub struct UpbCandidate {
    name: String,
    shape: SpaceShape,
    members: Vec<ProductState>,
}

impl UpbCandidate {
    /// Validates shapes and factor norms; orthogonality and
    /// unextendibility are checked by [`verify_upb`], not here — a
    /// candidate is allowed to be wrong.
    pub fn new(name: impl Into<String>, shape: SpaceShape, members: Vec<ProductState>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("UPB candidate needs at least one member".into()));
        }
        for m in &members {
            if m.shape() != shape {
                return Err(Error::ShapeMismatch(format!(
                    "member on {} in a candidate on {}",
                    m.shape(),
                    shape
                )));
            }
        }
        Ok(UpbCandidate { name: name.into(), shape, members })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn shape(&self) -> SpaceShape {
        self.shape
    }

    pub fn members(&self) -> &[ProductState] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Max off-diagonal Gram magnitude (0 for an orthogonal set).
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.members.len() {
            let vi = self.members[i].embed();
            for j in (i + 1)..self.members.len() {
                let vj = self.members[j].embed();
                worst = worst.max(vi.inner(&vj).map(|c| c.norm()).unwrap_or(f64::INFINITY));
            }
        }
        worst
    }

    /// Span of the member states.
    pub fn span(&self) -> Result<Subspace> {
        let vectors: Vec<CVector> = self
            .members
            .iter()
            .map(|m| m.embed().amplitudes().clone())
            .collect();
        Subspace::span(self.shape, &vectors)
    }
}

/// The 3⊗3 "Tiles" UPB: four domino tiles plus the stopper state.
pub fn catalog_tiles() -> UpbCandidate {
    let e = |i: usize| {
        let mut v = CVector::zeros(3);
        v[i] = C64::new(1.0, 0.0);
        v
    };
    let diff = |i: usize, j: usize| {
        let mut v = CVector::zeros(3);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        v[i] = C64::new(s, 0.0);
        v[j] = C64::new(-s, 0.0);
        v
    };
    let uniform = || {
        let s = 1.0 / 3.0f64.sqrt();
        CVector::from_element(3, C64::new(s, 0.0))
    };
    let members = vec![
        ProductState::new(e(0), diff(0, 1)).unwrap(),
        ProductState::new(e(2), diff(1, 2)).unwrap(),
        ProductState::new(diff(0, 1), e(2)).unwrap(),
        ProductState::new(diff(1, 2), e(0)).unwrap(),
        ProductState::new(uniform(), uniform()).unwrap(),
    ];
    UpbCandidate::new("tiles", SpaceShape { dim_a: 3, dim_b: 3 }, members)
        .expect("catalog construction is well-formed")
}

/// Verification verdict for a UPB candidate.
#[derive(Debug, Clone)]
pub enum UpbVerdict {
    /// Orthogonal, and no see-saw restart found a product state in the
    /// complement — a heuristic certificate, not a proof.
    Verified {
        /// Largest product overlap with the complement projector seen
        /// across all restarts.
        best_complement_overlap: f64,
        restarts_used: usize,
    },
    /// Two members fail orthogonality.
    NotOrthogonal { i: usize, j: usize, overlap: f64 },
    /// The complement contains (numerically) a product state, so the
    /// candidate is extendible — not a UPB.
    ProductStateFound { witness: ProductState, overlap: f64 },
}

impl UpbVerdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, UpbVerdict::Verified { .. })
    }
}

/// Check orthogonality exactly, then hunt for a product state in the
/// complement with the configured see-saw budget.
pub fn verify_upb(candidate: &UpbCandidate, cfg: &SeesawConfig) -> Result<UpbVerdict> {
    for i in 0..candidate.members.len() {
        let vi = candidate.members[i].embed();
        for j in (i + 1)..candidate.members.len() {
            let vj = candidate.members[j].embed();
            let overlap = vi.inner(&vj)?.norm();
            if overlap > ORTHOGONALITY_TOL {
                return Ok(UpbVerdict::NotOrthogonal { i, j, overlap });
            }
        }
    }
    let span = candidate.span()?;
    if span.rank() < candidate.len() {
        return Err(Error::InvalidInput(
            "orthogonal members must be linearly independent".into(),
        ));
    }
    let complement = span.orthogonal_complement();
    if complement.rank() == 0 {
        // a full product basis spans everything; the complement is
        // trivially product-free
        return Ok(UpbVerdict::Verified { best_complement_overlap: 0.0, restarts_used: 0 });
    }
    // members make natural warm starts: they sit at overlap zero, and
    // escaping them exercises the see-saw from structured corners
    let mut cfg = cfg.clone();
    cfg.warm_starts.extend(candidate.members.iter().cloned());
    let outcome = max_product_overlap(&complement.projector(), candidate.shape, &cfg)?;
    // extendibility is only claimed when the maximizer sits in the
    // complement at numerical precision; see the membership threshold
    // discussion in `witness`
    if outcome.best_value >= 1.0 - crate::witness::MEMBERSHIP_EPS {
        return Ok(UpbVerdict::ProductStateFound {
            witness: outcome.best_state,
            overlap: outcome.best_value,
        });
    }
    Ok(UpbVerdict::Verified {
        best_complement_overlap: outcome.best_value,
        restarts_used: outcome.restarts.len(),
    })
}

/// Tensor two candidates member-by-member (party-grouped). The result
/// has `|c1|·|c2|` members on the product shape.
pub fn tensor_upb(c1: &UpbCandidate, c2: &UpbCandidate) -> UpbCandidate {
    let shape = c1.shape.tensor(&c2.shape);
    let mut members = Vec::with_capacity(c1.len() * c2.len());
    for m1 in &c1.members {
        for m2 in &c2.members {
            members.push(m1.tensor(m2));
        }
    }
    UpbCandidate {
        name: format!("{}x{}", c1.name, c2.name),
        shape,
        members,
    }
}

impl UpbCandidate {
    /// `n`-fold tensor power (`n = 1` is a copy of `self`).
    pub fn tensor_power(&self, n: usize) -> Result<UpbCandidate> {
        if n == 0 {
            return Err(Error::InvalidInput("tensor power needs n >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = tensor_upb(&out, self);
        }
        out.name = format!("{}^{}", self.name, n);
        Ok(out)
    }
}

/// How to pick the complement-supported state ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum RhoSpec {
    /// Normalized projector onto the full complement.
    MaximallyMixedComplement,
    /// Random rank-`rank` mixture of orthonormal complement vectors.
    RandomRank { rank: usize, seed: u64 },
    /// Haar-ish random pure state inside the complement.
    PureInComplement { seed: u64 },
}

/// The orthogonal pair {σ^⊗n, ρ^⊗n} derived from a UPB, kept together
/// with its provenance.
#[derive(Debug, Clone)]
pub struct SigmaRhoEnsemble {
    /// Normalized projector onto the n-copy UPB span.
    pub sigma: DensityOperator,
    /// n-copy version of the complement-supported state.
    pub rho: DensityOperator,
    pub copies: usize,
    /// The single-copy UPB this was built from.
    pub source: UpbCandidate,
    /// Single-copy σ and ρ (handy for reconstruction checks).
    pub base_sigma: DensityOperator,
    pub base_rho: DensityOperator,
}

/// Build σ = P_S / rank(S) and a ρ supported on the complement, raised
/// to `copies` tensor powers with party-grouped indices.
pub fn make_sigma_rho(
    candidate: &UpbCandidate,
    rho_spec: &RhoSpec,
    copies: usize,
) -> Result<SigmaRhoEnsemble> {
    if copies == 0 {
        return Err(Error::InvalidInput("copies must be >= 1".into()));
    }
    let span = candidate.span()?;
    if span.rank() < candidate.len() {
        return Err(Error::InvalidInput(
            "UPB members must be linearly independent".into(),
        ));
    }
    let complement = span.orthogonal_complement();
    if complement.rank() == 0 {
        return Err(Error::EmptySubspace);
    }
    let base_sigma = span.normalized_projector()?;
    let base_rho = build_rho(&complement, rho_spec)?;

    let mut sigma = base_sigma.clone();
    let mut rho = base_rho.clone();
    for _ in 1..copies {
        sigma = sigma.tensor(&base_sigma);
        rho = rho.tensor(&base_rho);
    }
    let cross = sigma.overlap(&rho)?;
    debug_assert!(cross.abs() < 1e-10, "sigma/rho overlap {cross:.3e}");

    Ok(SigmaRhoEnsemble {
        sigma,
        rho,
        copies,
        source: candidate.clone(),
        base_sigma,
        base_rho,
    })
}

fn build_rho(complement: &Subspace, spec: &RhoSpec) -> Result<DensityOperator> {
    let r = complement.rank();
    let shape = complement.shape();
    match spec {
        RhoSpec::MaximallyMixedComplement => complement.normalized_projector(),
        RhoSpec::PureInComplement { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let coeffs = random_complex_vector(r, &mut rng);
            let v = complement.basis() * coeffs;
            let norm = v.norm();
            let v = v / C64::new(norm, 0.0);
            let m = &v * v.adjoint();
            Ok(DensityOperator::from_parts_unchecked(shape, m))
        }
        RhoSpec::RandomRank { rank, seed } => {
            if *rank == 0 || *rank > r {
                return Err(Error::InvalidInput(format!(
                    "requested rho rank {rank} outside 1..={r}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            // orthonormal frame inside the complement
            let g = random_complex_matrix(r, *rank, &mut rng);
            let raw = complement.basis() * g;
            let cols: Vec<CVector> = (0..*rank).map(|i| raw.column(i).into_owned()).collect();
            let frame = Subspace::span(shape, &cols)?;
            if frame.rank() < *rank {
                return Err(Error::InvalidInput(
                    "random frame degenerated; try another seed".into(),
                ));
            }
            // random mixing weights, normalized to unit trace
            let mut weights: Vec<f64> = (0..*rank)
                .map(|_| rand::Rng::gen_range(&mut rng, 0.1..1.0))
                .collect();
            let total: f64 = weights.iter().sum();
            for w in &mut weights {
                *w /= total;
            }
            let d = shape.total();
            let mut m = crate::hilbert::CMatrix::zeros(d, d);
            for (i, w) in weights.iter().enumerate() {
                let col = frame.basis().column(i);
                m += (col * col.adjoint()) * C64::new(*w, 0.0);
            }
            Ok(DensityOperator::from_parts_unchecked(shape, m))
        }
    }
}

/* JSON mirror types ********************************************************/

/// On-disk UPB format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpbJson {
    pub name: String,
    pub dim_a: usize,
    pub dim_b: usize,
    pub members: Vec<UpbMemberJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpbMemberJson {
    pub a: Vec<[f64; 2]>,
    pub b: Vec<[f64; 2]>,
}

impl UpbCandidate {
    pub fn to_json(&self) -> UpbJson {
        UpbJson {
            name: self.name.clone(),
            dim_a: self.shape.dim_a,
            dim_b: self.shape.dim_b,
            members: self
                .members
                .iter()
                .map(|m| UpbMemberJson { a: to_pairs(m.a_part()), b: to_pairs(m.b_part()) })
                .collect(),
        }
    }

    pub fn from_json(json: &UpbJson) -> Result<Self> {
        let shape = SpaceShape::new(json.dim_a, json.dim_b)?;
        let members = json
            .members
            .iter()
            .map(|m| ProductState::new(vector_from_pairs(&m.a), vector_from_pairs(&m.b)))
            .collect::<Result<Vec<_>>>()?;
        UpbCandidate::new(json.name.clone(), shape, members)
    }
}
