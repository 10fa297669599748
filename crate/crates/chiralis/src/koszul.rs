//! Koszul complexes of graded sequences and their minimal reductions.
//!
//! For a base ring `R` (even, positively graded in the graded setting) and a
//! homogeneous sequence `f₁, …, f_r`, the Koszul complex adjoins one odd
//! variable `ξ_i` of bidegree `(−1, 0)` and inner degree `deg f_i` per
//! sequence element, with differential `∂ξ_i = f_i`, `∂x = 0`. When the
//! sequence is regular the complex is a resolution of `A = R/(f⃗)`:
//! `H⁰ ≅ A` and `H^{<0} = 0`, which [`KoszulData::verify_resolution`] checks
//! per inner degree with exact linear algebra (global regularity is not
//! decided).
//!
//! The module also computes minimal generating sets of graded ideals
//! degree-by-degree, the block-upper-triangular transformation matrices
//! relating generating sets, and the reduction of a Koszul complex to a
//! minimal one (no generator with a linear part) by an exact graded
//! coordinate change.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::Zero;

use crate::linalg::{Q, SparseMatrix, SubspaceReducer};
use crate::superpoly::{
    monomials_of_inner_degree, AlgebraError, Derivation, Parity, RingSpec, Substitution,
    SuperPolynomial, VariableSpec,
};

/// A Koszul complex: full ring (base variables followed by the adjoined odd
/// ones), the sequence, and the square-zero differential.
#[derive(Clone, Debug)]
pub struct KoszulData {
    base_ring: Arc<RingSpec>,
    ring: Arc<RingSpec>,
    /// Sequence elements, expressed in the full ring.
    sequence: Vec<SuperPolynomial>,
    differential: Derivation,
}

/// Matrix of polynomial entries expressing one family of ring elements
/// through another: `old_i = Σ_α entry(i, α) · new_α`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformationMatrix {
    ring: Arc<RingSpec>,
    entries: Vec<Vec<SuperPolynomial>>,
}

/// Result of a minimal-generating-set computation.
#[derive(Clone, Debug)]
pub struct MinimalGenerators {
    /// Indices of the kept input generators, in input order.
    pub kept: Vec<usize>,
    /// The kept generators themselves.
    pub generators: Vec<SuperPolynomial>,
    /// Expresses every input generator through the kept ones.
    pub matrix: TransformationMatrix,
}

/// A verified dg map between two Koszul complexes over the same base ring.
#[derive(Clone, Debug)]
pub struct DgMorphism {
    pub map: Substitution,
}

/// Result of reducing a Koszul complex to a minimal one.
#[derive(Clone, Debug)]
pub struct MinimalReduction {
    pub minimal: KoszulData,
    /// Quotient dg map from the original complex onto the minimal one.
    pub projection: Substitution,
    /// `(sequence index, base variable index)` pairs that became coordinates.
    pub pivots: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum KoszulError {
    #[error("sequence element {0} is not even")]
    NotEven(usize),
    #[error("sequence element {0} is not homogeneous of positive inner degree")]
    Inhomogeneous(usize),
    #[error("sequence element {0} is zero")]
    ZeroElement(usize),
    #[error("the identity old = matrix · new fails at row {0}")]
    IdentityFails(usize),
    #[error("transformation matrix has {got} columns, expected {expected}")]
    ShapeMismatch { got: usize, expected: usize },
    #[error("complexes live over different base rings")]
    BaseMismatch,
    #[error("reduction failed: {0}")]
    InvalidReduction(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl KoszulData {
    pub fn base_ring(&self) -> &Arc<RingSpec> {
        &self.base_ring
    }

    /// The full ring, base variables first, then one odd variable per
    /// sequence element.
    pub fn ring(&self) -> &Arc<RingSpec> {
        &self.ring
    }

    pub fn base_len(&self) -> usize {
        self.base_ring.len()
    }

    pub fn sequence_len(&self) -> usize {
        self.sequence.len()
    }

    /// Sequence elements in the full ring.
    pub fn sequence(&self) -> &[SuperPolynomial] {
        &self.sequence
    }

    /// Index of the odd variable paired with sequence element `i`.
    pub fn xi_index(&self, i: usize) -> usize {
        self.base_ring.len() + i
    }

    pub fn differential(&self) -> &Derivation {
        &self.differential
    }

    /// Cohomology dimensions of `(K, ∂)` per (cohomological degree, inner
    /// degree), for inner degrees `0..=max_inner`.
    pub fn cohomology_dims(
        &self,
        max_inner: i64,
    ) -> Result<BTreeMap<(i64, i64), usize>, KoszulError> {
        let mut out = BTreeMap::new();
        for d in 0..=max_inner {
            let monomials = monomials_of_inner_degree(&self.ring, d)?;
            // Group the degree-d monomials by cohomological degree.
            let mut by_coh: BTreeMap<i64, Vec<Vec<u32>>> = BTreeMap::new();
            for m in monomials {
                let c: i64 = m
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| self.ring.var(i).coh_degree() * e as i64)
                    .sum();
                by_coh.entry(c).or_default().push(m);
            }
            let degrees: Vec<i64> = by_coh.keys().copied().collect();
            let index: BTreeMap<i64, BTreeMap<Vec<u32>, usize>> = by_coh
                .iter()
                .map(|(c, ms)| {
                    (*c, ms.iter().enumerate().map(|(k, m)| (m.clone(), k)).collect())
                })
                .collect();
            // Matrix of ∂ out of each cohomological degree.
            let mut rank_out: BTreeMap<i64, usize> = BTreeMap::new();
            let mut kernel_dim: BTreeMap<i64, usize> = BTreeMap::new();
            for &c in &degrees {
                let domain = &by_coh[&c];
                let codomain_index = index.get(&(c + 1));
                let codomain_size = codomain_index.map(|ix| ix.len()).unwrap_or(0);
                let mut columns = Vec::with_capacity(domain.len());
                for m in domain {
                    let p = SuperPolynomial::monomial(&self.ring, m.clone(), Q::from_integer(1.into()))
                        .expect("basis monomial");
                    let image = self.differential.apply(&p)?;
                    let mut col = Vec::new();
                    for (mm, coeff) in image.terms() {
                        let ix = codomain_index
                            .and_then(|ixmap| ixmap.get(mm))
                            .copied()
                            .expect("differential preserves inner degree and raises coh by 1");
                        col.push((ix, coeff.clone()));
                    }
                    columns.push(col);
                }
                let matrix = SparseMatrix::from_columns(codomain_size, &columns);
                let r = matrix.rank();
                rank_out.insert(c, r);
                kernel_dim.insert(c, domain.len() - r);
            }
            for &c in &degrees {
                let dim = kernel_dim[&c] - rank_out.get(&(c - 1)).copied().unwrap_or(0);
                if dim > 0 {
                    out.insert((c, d), dim);
                }
            }
        }
        Ok(out)
    }

    /// Checks `H⁰ ≅ R/(f⃗)` (dimension per inner degree, against an
    /// independent ideal-span rank) and `H^{<0} = 0`, for inner degrees up to
    /// the cutoff.
    pub fn verify_resolution(&self, max_inner: i64) -> Result<bool, KoszulError> {
        let coh = self.cohomology_dims(max_inner)?;
        for (&(c, _), _) in coh.iter() {
            if c < 0 {
                return Ok(false);
            }
        }
        for d in 0..=max_inner {
            let h0 = coh.get(&(0, d)).copied().unwrap_or(0);
            let (monomials, reducer) = self.quotient_reducer(d)?;
            let a_dim = monomials.len() - reducer.subspace_dim();
            if h0 != a_dim {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The degree-`d` monomial basis of the base ring together with a
    /// reducer for the degree-`d` component of the ideal `(f⃗)`, so the
    /// complement indices form a basis of `(R/(f⃗))_d`.
    pub fn quotient_reducer(
        &self,
        d: i64,
    ) -> Result<(Vec<Vec<u32>>, SubspaceReducer), KoszulError> {
        let base_seq: Vec<SuperPolynomial> = (0..self.sequence.len())
            .map(|i| restrict_to_base(&self.sequence[i], &self.base_ring))
            .collect();
        let (monomials, span) = ideal_span_in_degree(&self.base_ring, &base_seq, d)?;
        Ok((monomials.clone(), SubspaceReducer::new(monomials.len(), &span)))
    }

    /// Probes whether `A = R/(f⃗)` is finite-dimensional: looks for a run of
    /// `max deg x_j` consecutive zero components (which forces all higher
    /// components to vanish, since `A` is generated in variable degrees).
    /// Returns the top nonzero degree if the probe succeeds within
    /// `probe_limit`.
    pub fn quotient_finite_probe(&self, probe_limit: i64) -> Result<Option<i64>, KoszulError> {
        let max_var = self
            .base_ring
            .vars()
            .iter()
            .map(|v| v.inner)
            .max()
            .unwrap_or(1)
            .max(1);
        let mut top_nonzero = 0i64;
        let mut zero_run = 0i64;
        for d in 1..=probe_limit {
            let (monomials, reducer) = self.quotient_reducer(d)?;
            if monomials.len() == reducer.subspace_dim() {
                zero_run += 1;
                if zero_run >= max_var {
                    return Ok(Some(top_nonzero));
                }
            } else {
                zero_run = 0;
                top_nonzero = d;
            }
        }
        Ok(None)
    }
}

/// Embeds a polynomial of the base ring into a ring that extends it (the
/// base variables must come first, in order).
pub fn embed(p: &SuperPolynomial, ring: &Arc<RingSpec>) -> SuperPolynomial {
    let pad = ring.len() - p.ring().len();
    let mut out = SuperPolynomial::zero(ring);
    for (m, c) in p.terms() {
        let mut exps = m.to_vec();
        exps.extend(std::iter::repeat(0).take(pad));
        out = out
            .checked_add(&SuperPolynomial::monomial(ring, exps, c.clone()).expect("valid"))
            .expect("same ring");
    }
    out
}

/// Restricts a polynomial of an extended ring back to the base ring; panics
/// if any term involves a non-base variable.
fn restrict_to_base(p: &SuperPolynomial, base: &Arc<RingSpec>) -> SuperPolynomial {
    let n = base.len();
    let mut out = SuperPolynomial::zero(base);
    for (m, c) in p.terms() {
        assert!(
            m[n..].iter().all(|&e| e == 0),
            "polynomial involves non-base variables"
        );
        out = out
            .checked_add(
                &SuperPolynomial::monomial(base, m[..n].to_vec(), c.clone()).expect("valid"),
            )
            .expect("same ring");
    }
    out
}

/// Builds the Koszul complex of a homogeneous sequence over its base ring.
pub fn build_koszul(
    base_ring: &Arc<RingSpec>,
    sequence: &[SuperPolynomial],
) -> Result<KoszulData, KoszulError> {
    let graded = base_ring.is_graded();
    let mut vars = base_ring.vars().to_vec();
    for (i, f) in sequence.iter().enumerate() {
        if **f.ring() != **base_ring {
            return Err(KoszulError::Algebra(AlgebraError::RingMismatch));
        }
        if f.is_zero() {
            return Err(KoszulError::ZeroElement(i));
        }
        if f.parity() != Some(Parity::Even) {
            return Err(KoszulError::NotEven(i));
        }
        let deg = match f.inner_degree() {
            Some(d) if !graded || d > 0 => d,
            _ => return Err(KoszulError::Inhomogeneous(i)),
        };
        if f.bidegree() != Some((0, 0)) {
            return Err(KoszulError::Inhomogeneous(i));
        }
        let mut name = format!("xi{}", i + 1);
        while vars.iter().any(|v| v.name == name) {
            name.insert(0, '_');
        }
        vars.push(VariableSpec { name, parity: Parity::Odd, bidegree: (-1, 0), inner: deg });
    }
    let ring = RingSpec::new(vars)?;
    let sequence_full: Vec<SuperPolynomial> =
        sequence.iter().map(|f| embed(f, &ring)).collect();
    let base_len = base_ring.len();
    let images: Vec<SuperPolynomial> = (0..ring.len())
        .map(|i| {
            if i < base_len {
                SuperPolynomial::zero(&ring)
            } else {
                sequence_full[i - base_len].clone()
            }
        })
        .collect();
    let differential = Derivation::new(&ring, images, Parity::Odd)?;
    debug_assert!(differential.is_square_zero().expect("same ring"));
    Ok(KoszulData {
        base_ring: base_ring.clone(),
        ring,
        sequence: sequence_full,
        differential,
    })
}

/// The degree-`d` monomials of the ring together with spanning vectors (in
/// that monomial basis) of the degree-`d` component of the ideal generated
/// by `gens`.
fn ideal_span_in_degree(
    ring: &Arc<RingSpec>,
    gens: &[SuperPolynomial],
    d: i64,
) -> Result<(Vec<Vec<u32>>, Vec<Vec<(usize, Q)>>), KoszulError> {
    let monomials = monomials_of_inner_degree(ring, d)?;
    let index: BTreeMap<Vec<u32>, usize> = monomials
        .iter()
        .enumerate()
        .map(|(k, m)| (m.clone(), k))
        .collect();
    let mut span = Vec::new();
    for g in gens {
        let gd = g.inner_degree().expect("homogeneous generator");
        if gd > d {
            continue;
        }
        for m in monomials_of_inner_degree(ring, d - gd)? {
            let shift = SuperPolynomial::monomial(ring, m, Q::from_integer(1.into()))
                .expect("valid")
                .checked_mul(g)?;
            if shift.is_zero() {
                continue;
            }
            let vec: Vec<(usize, Q)> = shift
                .terms()
                .map(|(mm, c)| (index[mm], c.clone()))
                .collect();
            span.push(vec);
        }
    }
    Ok((monomials, span))
}

fn validate_ideal_generators(
    ring: &Arc<RingSpec>,
    gens: &[SuperPolynomial],
) -> Result<Vec<i64>, KoszulError> {
    ring.require_graded()?;
    let mut degrees = Vec::with_capacity(gens.len());
    for (i, g) in gens.iter().enumerate() {
        if **g.ring() != **ring {
            return Err(KoszulError::Algebra(AlgebraError::RingMismatch));
        }
        if g.is_zero() {
            return Err(KoszulError::ZeroElement(i));
        }
        if g.parity() != Some(Parity::Even) {
            return Err(KoszulError::NotEven(i));
        }
        match g.inner_degree() {
            Some(d) if d > 0 => degrees.push(d),
            _ => return Err(KoszulError::Inhomogeneous(i)),
        }
    }
    Ok(degrees)
}

/// Computes a minimal generating set of the ideal generated by `gens`:
/// processes degrees in ascending order and keeps the earliest generators
/// whose classes modulo `R_> · J` are linearly independent. Also returns the
/// block-upper-triangular transformation matrix expressing every input
/// generator through the kept ones (rows of kept generators are unit
/// vectors; diagonal blocks are constant).
pub fn minimal_generating_set(
    ring: &Arc<RingSpec>,
    gens: &[SuperPolynomial],
) -> Result<MinimalGenerators, KoszulError> {
    let degrees = validate_ideal_generators(ring, gens)?;
    let mut order: Vec<usize> = (0..gens.len()).collect();
    order.sort_by_key(|&i| (degrees[i], i));

    let mut kept: Vec<usize> = Vec::new();
    for &i in &order {
        let d = degrees[i];
        let monomials = monomials_of_inner_degree(ring, d)?;
        let index: BTreeMap<Vec<u32>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(k, m)| (m.clone(), k))
            .collect();
        // Span of (R_> · J)_d plus the classes already kept in this degree.
        let (_, mut span) = ideal_span_in_degree(
            ring,
            &strictly_lower_degree(gens, &degrees, d),
            d,
        )?;
        for &j in &kept {
            if degrees[j] == d {
                span.push(poly_vector(&gens[j], &index));
            }
        }
        let reducer = SubspaceReducer::new(monomials.len(), &span);
        let candidate: Vec<Q> = dense_vector(&gens[i], &index);
        if !reducer.contains(&candidate) {
            kept.push(i);
        }
    }
    kept.sort_unstable();

    // Transformation matrix: old_i = Σ_α G[i][α] · new_α.
    let mut entries = Vec::with_capacity(gens.len());
    for (i, g) in gens.iter().enumerate() {
        if let Some(alpha) = kept.iter().position(|&j| j == i) {
            let row = (0..kept.len())
                .map(|b| {
                    if b == alpha {
                        SuperPolynomial::one(ring)
                    } else {
                        SuperPolynomial::zero(ring)
                    }
                })
                .collect();
            entries.push(row);
            continue;
        }
        let kept_gens: Vec<&SuperPolynomial> = kept.iter().map(|&j| &gens[j]).collect();
        let row = express_through(ring, g, &kept_gens).ok_or_else(|| {
            KoszulError::InvalidReduction(format!(
                "generator {i} is not expressible through the kept generators"
            ))
        })?;
        entries.push(row);
    }
    let generators = kept.iter().map(|&j| gens[j].clone()).collect();
    Ok(MinimalGenerators {
        kept,
        generators,
        matrix: TransformationMatrix { ring: ring.clone(), entries },
    })
}

fn strictly_lower_degree(
    gens: &[SuperPolynomial],
    degrees: &[i64],
    d: i64,
) -> Vec<SuperPolynomial> {
    gens.iter()
        .zip(degrees)
        .filter(|(_, &gd)| gd < d)
        .map(|(g, _)| g.clone())
        .collect()
}

fn poly_vector(p: &SuperPolynomial, index: &BTreeMap<Vec<u32>, usize>) -> Vec<(usize, Q)> {
    p.terms().map(|(m, c)| (index[m], c.clone())).collect()
}

fn dense_vector(p: &SuperPolynomial, index: &BTreeMap<Vec<u32>, usize>) -> Vec<Q> {
    let mut v = vec![Q::zero(); index.len()];
    for (m, c) in p.terms() {
        v[index[m]] = c.clone();
    }
    v
}

/// Expresses `target = Σ_α h_α · gens_α` with homogeneous `h_α`, solving one
/// exact linear system on the monomial coefficients (free coordinates zero).
/// Returns `None` if no such expression exists.
pub fn express_through(
    ring: &Arc<RingSpec>,
    target: &SuperPolynomial,
    gens: &[&SuperPolynomial],
) -> Option<Vec<SuperPolynomial>> {
    let d = target.inner_degree().expect("homogeneous");
    let monomials = monomials_of_inner_degree(ring, d).ok()?;
    let index: BTreeMap<Vec<u32>, usize> = monomials
        .iter()
        .enumerate()
        .map(|(k, m)| (m.clone(), k))
        .collect();
    // Columns: (generator α, shift monomial) in deterministic order.
    let mut columns = Vec::new();
    let mut column_meta: Vec<(usize, Vec<u32>)> = Vec::new();
    for (alpha, g) in gens.iter().enumerate() {
        let gd = g.inner_degree().expect("homogeneous");
        if gd > d {
            continue;
        }
        for m in monomials_of_inner_degree(ring, d - gd).ok()? {
            let shift = SuperPolynomial::monomial(ring, m.clone(), Q::from_integer(1.into()))
                .ok()?
                .checked_mul(g)
                .ok()?;
            if shift.is_zero() {
                continue;
            }
            columns.push(poly_vector(&shift, &index));
            column_meta.push((alpha, m));
        }
    }
    let matrix = SparseMatrix::from_columns(monomials.len(), &columns);
    let rhs = dense_vector(target, &index);
    let solution = matrix.solve(&rhs)?;
    let mut row = vec![SuperPolynomial::zero(ring); gens.len()];
    for (coeff, (alpha, m)) in solution.into_iter().zip(column_meta) {
        if coeff.is_zero() {
            continue;
        }
        let term = SuperPolynomial::monomial(ring, m, coeff).expect("valid");
        row[alpha] = row[alpha].checked_add(&term).expect("same ring");
    }
    Some(row)
}

impl TransformationMatrix {
    pub fn new(
        ring: &Arc<RingSpec>,
        entries: Vec<Vec<SuperPolynomial>>,
    ) -> Result<Self, KoszulError> {
        let cols = entries.first().map(|r| r.len()).unwrap_or(0);
        for row in &entries {
            if row.len() != cols {
                return Err(KoszulError::ShapeMismatch { got: row.len(), expected: cols });
            }
            for e in row {
                if **e.ring() != **ring {
                    return Err(KoszulError::Algebra(AlgebraError::RingMismatch));
                }
            }
        }
        Ok(TransformationMatrix { ring: ring.clone(), entries })
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map(|r| r.len()).unwrap_or(0)
    }

    pub fn entry(&self, i: usize, j: usize) -> &SuperPolynomial {
        &self.entries[i][j]
    }

    pub fn ring(&self) -> &Arc<RingSpec> {
        &self.ring
    }

    /// Whether `old_i = Σ_α entry(i,α) · new_α` holds identically.
    pub fn verify_factors(
        &self,
        old: &[SuperPolynomial],
        new: &[SuperPolynomial],
    ) -> Result<(), KoszulError> {
        assert_eq!(old.len(), self.rows());
        assert_eq!(new.len(), self.cols());
        for (i, f) in old.iter().enumerate() {
            let mut acc = SuperPolynomial::zero(&self.ring);
            for (alpha, g) in new.iter().enumerate() {
                acc = acc.checked_add(&self.entries[i][alpha].checked_mul(g)?)?;
            }
            if acc != *f {
                return Err(KoszulError::IdentityFails(i));
            }
        }
        Ok(())
    }

    /// Block-triangularity for degree-sorted families: entries pairing an
    /// old generator with a strictly higher-degree new generator vanish, and
    /// equal-degree entries are constants.
    pub fn is_block_upper_triangular(&self, old_degrees: &[i64], new_degrees: &[i64]) -> bool {
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e.is_zero() {
                    continue;
                }
                if new_degrees[j] > old_degrees[i] {
                    return false;
                }
                if new_degrees[j] == old_degrees[i]
                    && e.inner_degree() != Some(0)
                {
                    return false;
                }
            }
        }
        true
    }

    /// For a square matrix of constants in a graded-compatible block shape:
    /// whether it is invertible (exact rank check on the constant terms).
    pub fn constant_square_invertible(&self) -> bool {
        let n = self.rows();
        if n != self.cols() {
            return false;
        }
        let zero_exps = vec![0u32; self.ring.len()];
        let mut triplets = Vec::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e.is_zero() {
                    continue;
                }
                if e.inner_degree() != Some(0) {
                    return false;
                }
                triplets.push((i, j, e.coefficient(&zero_exps)));
            }
        }
        SparseMatrix::from_triplets(n, n, triplets).rank() == n
    }
}

/// The dg map `K(R, f⃗) → K(R, g⃗)` induced by a factorization `f = G·g`:
/// `ξ_i ↦ Σ_α G_{iα} η_α` on the odd generators, identity on the base. The
/// factorization and the intertwining of differentials are verified.
pub fn sequence_transform(
    source: &KoszulData,
    target: &KoszulData,
    g: &TransformationMatrix,
) -> Result<DgMorphism, KoszulError> {
    if **source.base_ring() != **target.base_ring() {
        return Err(KoszulError::BaseMismatch);
    }
    if g.rows() != source.sequence_len() || g.cols() != target.sequence_len() {
        return Err(KoszulError::ShapeMismatch {
            got: g.cols(),
            expected: target.sequence_len(),
        });
    }
    // Verify f = G·g over the base ring (embedded into the target ring).
    let old: Vec<SuperPolynomial> = source
        .sequence()
        .iter()
        .map(|f| reembed(f, source, target))
        .collect();
    let new: Vec<SuperPolynomial> = target.sequence().to_vec();
    let g_embedded = TransformationMatrix {
        ring: target.ring().clone(),
        entries: g
            .entries
            .iter()
            .map(|row| row.iter().map(|e| embed_any(e, target)).collect())
            .collect(),
    };
    g_embedded.verify_factors(&old, &new)?;

    // Generator images.
    let mut images = Vec::with_capacity(source.ring().len());
    for i in 0..source.base_len() {
        debug_assert_eq!(source.ring().var(i), target.ring().var(i));
        images.push(SuperPolynomial::variable(target.ring(), i));
    }
    for i in 0..source.sequence_len() {
        let mut img = SuperPolynomial::zero(target.ring());
        for alpha in 0..target.sequence_len() {
            let eta = SuperPolynomial::variable(target.ring(), target.xi_index(alpha));
            img = img.checked_add(&g_embedded.entries[i][alpha].checked_mul(&eta)?)?;
        }
        images.push(img);
    }
    let map = Substitution::new(source.ring(), target.ring(), images)?;

    // Intertwining: both φ∘∂ and ∂'∘φ are φ-derivations, so checking the
    // generators suffices.
    for i in 0..source.ring().len() {
        let v = SuperPolynomial::variable(source.ring(), i);
        let lhs = map.apply(&source.differential().apply(&v)?)?;
        let rhs = target.differential().apply(&map.apply(&v)?)?;
        if lhs != rhs {
            return Err(KoszulError::InvalidReduction(format!(
                "differentials do not intertwine on generator {}",
                source.ring().var(i).name
            )));
        }
    }
    Ok(DgMorphism { map })
}

/// Re-expresses a full-ring polynomial of `source` that only involves base
/// variables inside the full ring of `target`.
fn reembed(p: &SuperPolynomial, source: &KoszulData, target: &KoszulData) -> SuperPolynomial {
    let base = restrict_to_base(p, source.base_ring());
    embed(&base, target.ring())
}

fn embed_any(p: &SuperPolynomial, target: &KoszulData) -> SuperPolynomial {
    embed(p, target.ring())
}

/// Reduces a Koszul complex to a minimal one:
/// 1. same-degree constant combinations make the generators with a linear
///    part linearly independent modulo `R_>²` and zero out the linear parts
///    of the rest;
/// 2. an exact graded coordinate change turns those generators into
///    coordinates;
/// 3. the complex is cut by the dg ideal they generate together with their
///    odd partners.
pub fn reduce_to_minimal(k: &KoszulData) -> Result<MinimalReduction, KoszulError> {
    let base = k.base_ring().clone();
    base.require_graded()?;
    let n = base.len();
    let r = k.sequence_len();
    let base_seq: Vec<SuperPolynomial> =
        k.sequence().iter().map(|f| restrict_to_base(f, &base)).collect();
    let degrees: Vec<i64> = base_seq
        .iter()
        .map(|f| f.inner_degree().expect("homogeneous"))
        .collect();

    // Linear part of f: coefficients on the single-variable monomials of
    // matching degree.
    let linear_part = |f: &SuperPolynomial| -> Vec<Q> {
        let mut v = vec![Q::zero(); n];
        for (m, c) in f.terms() {
            if m.iter().sum::<u32>() == 1 {
                let j = m.iter().position(|&e| e == 1).unwrap();
                v[j] = c.clone();
            }
        }
        v
    };

    // Step 1: eliminate linear parts by same-degree constant combinations.
    let mut seq1 = base_seq.clone();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (sequence idx, var idx)
    let mut step1 = identity_entries(&base, r);
    let mut distinct_degrees: Vec<i64> = degrees.clone();
    distinct_degrees.sort_unstable();
    distinct_degrees.dedup();
    for &d in &distinct_degrees {
        let members: Vec<usize> = (0..r).filter(|&i| degrees[i] == d).collect();
        let mut chosen: Vec<(usize, usize)> = Vec::new(); // (seq idx, pivot var)
        for &i in &members {
            let mut v = linear_part(&seq1[i]);
            // Reduce against the pivots already chosen in this degree.
            let mut coeffs: Vec<(usize, Q)> = Vec::new();
            for &(j, pv) in &chosen {
                if v[pv].is_zero() {
                    continue;
                }
                let pivot_vec = linear_part(&seq1[j]);
                let c = &v[pv] / &pivot_vec[pv];
                for (slot, pe) in v.iter_mut().zip(&pivot_vec) {
                    *slot -= &c * pe;
                }
                coeffs.push((j, c));
            }
            // Apply the same combination to the polynomial itself.
            if !coeffs.is_empty() {
                let mut f = seq1[i].clone();
                for (j, c) in &coeffs {
                    f = &f - &seq1[*j].scale(c);
                }
                seq1[i] = f;
                // Record old = combination of new: f_i = f'_i + Σ c_j f'_j.
                for (j, c) in &coeffs {
                    step1[i][*j] = step1[i][*j]
                        .checked_add(&SuperPolynomial::constant(&base, c.clone()))?;
                }
            }
            if let Some(pv) = v.iter().position(|x| !x.is_zero()) {
                chosen.push((i, pv));
            }
        }
        pivots.extend(chosen);
    }
    pivots.sort_unstable();
    for (i, f) in seq1.iter().enumerate() {
        if f.is_zero() {
            return Err(KoszulError::InvalidReduction(format!(
                "sequence element {i} became zero during linear elimination"
            )));
        }
    }

    // Step 2: inverse of the coordinate change sending pivot variables to
    // the pivot generators, by bounded fixed-point iteration.
    let pivot_vars: Vec<usize> = pivots.iter().map(|&(_, v)| v).collect();
    let pivot_seq: Vec<usize> = pivots.iter().map(|&(i, _)| i).collect();
    let kmax = degrees.iter().copied().max().unwrap_or(1);
    let mut psi: Vec<SuperPolynomial> = (0..n)
        .map(|j| SuperPolynomial::variable(&base, j))
        .collect();
    if !pivots.is_empty() {
        // Constant pivot matrix C[s][t] = coefficient of pivot var t in f'_{p_s}.
        let c_matrix = SparseMatrix::from_triplets(
            pivots.len(),
            pivots.len(),
            pivots.iter().enumerate().flat_map(|(s, &(i, _))| {
                let lp = linear_part(&seq1[i]);
                pivot_vars
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| !lp[v].is_zero())
                    .map(|(t, &v)| (s, t, lp[v].clone()))
                    .collect::<Vec<_>>()
            }),
        );
        for _ in 0..=kmax {
            // Solve C·ψ_pivot = rhs where rhs_s = y_{v_s} − (non-pivot linear
            // terms) − H_s(ψ), H_s the nonlinear part of f'_{p_s}.
            let mut rhs: Vec<SuperPolynomial> = Vec::with_capacity(pivots.len());
            for &(i, v) in &pivots {
                let lp = linear_part(&seq1[i]);
                let mut acc = SuperPolynomial::variable(&base, v);
                for (j, c) in lp.iter().enumerate() {
                    if c.is_zero() || pivot_vars.contains(&j) {
                        continue;
                    }
                    acc = &acc - &SuperPolynomial::variable(&base, j).scale(c);
                }
                // Nonlinear part evaluated at the current ψ.
                let nonlinear = nonlinear_part(&seq1[i]);
                let sub = Substitution::new(&base, &base, psi.clone())?;
                acc = &acc - &sub.apply(&nonlinear)?;
                rhs.push(acc);
            }
            // ψ_pivot := C⁻¹ · rhs, solved coefficient-wise.
            let new_pivot_images = solve_poly_system(&c_matrix, &rhs, &base)?;
            for (t, img) in new_pivot_images.into_iter().enumerate() {
                psi[pivot_vars[t]] = img;
            }
        }
        // Verify the fixed point exactly: f'_{p_s}(ψ) = v_s.
        let sub = Substitution::new(&base, &base, psi.clone())?;
        for &(i, v) in &pivots {
            if sub.apply(&seq1[i])? != SuperPolynomial::variable(&base, v) {
                return Err(KoszulError::InvalidReduction(
                    "coordinate change is not invertible".into(),
                ));
            }
        }
    }
    let psi_sub = Substitution::new(&base, &base, psi)?;

    // Step 3: rewrite the sequence in the new coordinates, drop the pivots.
    let seq2: Vec<SuperPolynomial> = seq1
        .iter()
        .map(|f| psi_sub.apply(f))
        .collect::<Result<_, _>>()?;
    let keep_var: Vec<usize> =
        (0..n).filter(|j| !pivot_vars.contains(j)).collect();
    let minimal_base = RingSpec::new(
        keep_var.iter().map(|&j| base.var(j).clone()).collect(),
    )?;
    // Quotient map on the base: pivot vars ↦ 0, others ↦ themselves.
    let quotient_images: Vec<SuperPolynomial> = (0..n)
        .map(|j| match keep_var.iter().position(|&kj| kj == j) {
            Some(jj) => SuperPolynomial::variable(&minimal_base, jj),
            None => SuperPolynomial::zero(&minimal_base),
        })
        .collect();
    let quotient_base = Substitution::new(&base, &minimal_base, quotient_images.clone())?;
    let keep_seq: Vec<usize> =
        (0..r).filter(|i| !pivot_seq.contains(i)).collect();
    let minimal_sequence: Vec<SuperPolynomial> = keep_seq
        .iter()
        .map(|&i| quotient_base.apply(&seq2[i]))
        .collect::<Result<_, _>>()?;
    for (pos, f) in minimal_sequence.iter().enumerate() {
        if f.is_zero() {
            return Err(KoszulError::InvalidReduction(format!(
                "sequence element {} vanishes in the quotient (non-regular input)",
                keep_seq[pos]
            )));
        }
    }
    let minimal = build_koszul(&minimal_base, &minimal_sequence)?;

    // Full projection on the Koszul ring: base var ↦ ψ then quotient,
    // ξ_i ↦ (step1 recombination, then keep or kill).
    let mut images: Vec<SuperPolynomial> = Vec::with_capacity(k.ring().len());
    for j in 0..n {
        images.push(embed(&quotient_base.apply(psi_sub.image(j))?, minimal.ring()));
    }
    // Step 1 expressed old = E·new with constant E, so the induced dg map
    // sends ξ_i ↦ Σ_j E_{ij} ξ'_j; the quotient then kills the pivot ξ's.
    let zero_exps = vec![0u32; base.len()];
    for i in 0..r {
        let mut img = SuperPolynomial::zero(minimal.ring());
        for (beta, e) in step1[i].iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            if let Some(pos) = keep_seq.iter().position(|&s| s == beta) {
                let xi = SuperPolynomial::variable(minimal.ring(), minimal.xi_index(pos));
                img = img.checked_add(&xi.scale(&e.coefficient(&zero_exps)))?;
            }
        }
        images.push(img);
    }
    let projection = Substitution::new(k.ring(), minimal.ring(), images)?;

    // The projection must intertwine the differentials (generator check
    // suffices: both sides are projection-derivations).
    for i in 0..k.ring().len() {
        let v = SuperPolynomial::variable(k.ring(), i);
        let lhs = projection.apply(&k.differential().apply(&v)?)?;
        let rhs = minimal.differential().apply(&projection.apply(&v)?)?;
        if lhs != rhs {
            return Err(KoszulError::InvalidReduction(format!(
                "projection fails to intertwine differentials on {}",
                k.ring().var(i).name
            )));
        }
    }

    Ok(MinimalReduction { minimal, projection, pivots })
}

fn identity_entries(ring: &Arc<RingSpec>, n: usize) -> Vec<Vec<SuperPolynomial>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        SuperPolynomial::one(ring)
                    } else {
                        SuperPolynomial::zero(ring)
                    }
                })
                .collect()
        })
        .collect()
}

/// The terms of `f` that are not single-variable monomials.
fn nonlinear_part(f: &SuperPolynomial) -> SuperPolynomial {
    let ring = f.ring().clone();
    let mut out = SuperPolynomial::zero(&ring);
    for (m, c) in f.terms() {
        if m.iter().sum::<u32>() != 1 {
            out = out
                .checked_add(&SuperPolynomial::monomial(&ring, m.to_vec(), c.clone()).expect("valid"))
                .expect("same ring");
        }
    }
    out
}

/// Solves `C·u⃗ = rhs⃗` for polynomial unknowns `u⃗` with a constant exact
/// matrix `C`, coefficient-by-coefficient.
fn solve_poly_system(
    c: &SparseMatrix,
    rhs: &[SuperPolynomial],
    ring: &Arc<RingSpec>,
) -> Result<Vec<SuperPolynomial>, KoszulError> {
    let k = rhs.len();
    // Collect all monomials appearing anywhere on the right.
    let mut monomials: std::collections::BTreeSet<Vec<u32>> = Default::default();
    for p in rhs {
        for (m, _) in p.terms() {
            monomials.insert(m.to_vec());
        }
    }
    let mut out = vec![SuperPolynomial::zero(ring); k];
    for m in monomials {
        let b: Vec<Q> = rhs.iter().map(|p| p.coefficient(&m)).collect();
        let x = c.solve(&b).ok_or_else(|| {
            KoszulError::InvalidReduction("pivot system is singular".into())
        })?;
        for (t, coeff) in x.into_iter().enumerate() {
            if !coeff.is_zero() {
                let term =
                    SuperPolynomial::monomial(ring, m.clone(), coeff).expect("valid");
                out[t] = out[t].checked_add(&term)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::qi;
    use crate::superpoly::parse_polynomial;

    fn ring1() -> Arc<RingSpec> {
        RingSpec::new(vec![VariableSpec::even("x", 1)]).unwrap()
    }

    fn ring2() -> Arc<RingSpec> {
        RingSpec::new(vec![VariableSpec::even("x", 1), VariableSpec::even("y", 1)])
            .unwrap()
    }

    fn poly(ring: &Arc<RingSpec>, text: &str) -> SuperPolynomial {
        parse_polynomial(ring, text).unwrap()
    }

    #[test]
    fn koszul_of_x_squared() {
        let r = ring1();
        let k = build_koszul(&r, &[poly(&r, "x^2")]).unwrap();
        assert_eq!(k.ring().len(), 2);
        let xi = SuperPolynomial::variable(k.ring(), k.xi_index(0));
        assert_eq!(k.differential().apply(&xi).unwrap(), embed(&poly(&r, "x^2"), k.ring()));
        assert!(k.differential().is_square_zero().unwrap());
        // H⁰ = C[x]/(x²): dimensions 1, 1, 0, 0, … and no negative cohomology.
        assert!(k.verify_resolution(6).unwrap());
        let coh = k.cohomology_dims(6).unwrap();
        assert_eq!(coh.get(&(0, 0)), Some(&1));
        assert_eq!(coh.get(&(0, 1)), Some(&1));
        assert_eq!(coh.get(&(0, 2)), None);
        assert!(coh.keys().all(|&(c, _)| c == 0));
    }

    #[test]
    fn koszul_of_two_elements() {
        let r = ring2();
        let k = build_koszul(&r, &[poly(&r, "x"), poly(&r, "y^2")]).unwrap();
        assert_eq!(k.ring().len(), 4);
        assert!(k.verify_resolution(6).unwrap());
        // A = C[x,y]/(x, y²) ≅ C[y]/(y²): dims 1, 1, 0, …
        let coh = k.cohomology_dims(4).unwrap();
        assert_eq!(coh.get(&(0, 0)), Some(&1));
        assert_eq!(coh.get(&(0, 1)), Some(&1));
        assert_eq!(coh.get(&(0, 2)), None);
    }

    #[test]
    fn empty_sequence_is_the_base_ring() {
        let r = ring1();
        let k = build_koszul(&r, &[]).unwrap();
        assert_eq!(k.ring().len(), 1);
        let x = SuperPolynomial::variable(k.ring(), 0);
        assert!(k.differential().apply(&x).unwrap().is_zero());
    }

    #[test]
    fn rejects_odd_or_inhomogeneous_elements() {
        let r = ring2();
        // deg x = deg y = 1 makes x + y² inhomogeneous.
        assert!(matches!(
            build_koszul(&r, &[poly(&r, "x + y^2")]),
            Err(KoszulError::Inhomogeneous(0))
        ));
        assert!(matches!(
            build_koszul(&r, &[SuperPolynomial::zero(&r)]),
            Err(KoszulError::ZeroElement(0))
        ));
    }

    #[test]
    fn quotient_finiteness_probe() {
        let r = ring1();
        let k = build_koszul(&r, &[poly(&r, "x^3")]).unwrap();
        assert_eq!(k.quotient_finite_probe(10).unwrap(), Some(2));
        let free = build_koszul(&r, &[]).unwrap();
        assert_eq!(free.quotient_finite_probe(10).unwrap(), None);
    }

    #[test]
    fn minimal_set_drops_multiples() {
        // {x², x³}: x³ = x·x² is redundant.
        let r = ring1();
        let gens = vec![poly(&r, "x^2"), poly(&r, "x^3")];
        let min = minimal_generating_set(&r, &gens).unwrap();
        assert_eq!(min.kept, vec![0]);
        min.matrix.verify_factors(&gens, &min.generators).unwrap();
        assert_eq!(min.matrix.entry(1, 0), &poly(&r, "x"));
    }

    #[test]
    fn minimal_set_keeps_independent_generators() {
        let r = ring2();
        let gens = vec![poly(&r, "x^2"), poly(&r, "y^2")];
        let min = minimal_generating_set(&r, &gens).unwrap();
        assert_eq!(min.kept, vec![0, 1]);
        assert!(min.matrix.constant_square_invertible());
    }

    #[test]
    fn minimal_set_drops_dependent_same_degree_generator() {
        let r = ring2();
        let gens = vec![
            poly(&r, "x^2 + y^2"),
            poly(&r, "y^2"),
            poly(&r, "2*y^2"),
        ];
        let min = minimal_generating_set(&r, &gens).unwrap();
        assert_eq!(min.kept, vec![0, 1]);
        min.matrix.verify_factors(&gens, &min.generators).unwrap();
        assert_eq!(min.matrix.entry(2, 1), &poly(&r, "2"));
        assert!(min.matrix.is_block_upper_triangular(&[2, 2, 2], &[2, 2]));
    }

    #[test]
    fn sequence_transform_scaling() {
        // f = {2x²}, g = {x²}, G = (2): ξ ↦ 2η intertwines ∂.
        let r = ring1();
        let src = build_koszul(&r, &[poly(&r, "2*x^2")]).unwrap();
        let tgt = build_koszul(&r, &[poly(&r, "x^2")]).unwrap();
        let g = TransformationMatrix::new(&r, vec![vec![poly(&r, "2")]]).unwrap();
        let m = sequence_transform(&src, &tgt, &g).unwrap();
        let xi = SuperPolynomial::variable(src.ring(), src.xi_index(0));
        let eta = SuperPolynomial::variable(tgt.ring(), tgt.xi_index(0));
        assert_eq!(m.map.apply(&xi).unwrap(), eta.scale(&qi(2)));
    }

    #[test]
    fn sequence_transform_two_by_two() {
        let r = ring2();
        let src = build_koszul(&r, &[poly(&r, "x^2"), poly(&r, "y^2")]).unwrap();
        let tgt = build_koszul(&r, &[poly(&r, "x^2 + y^2"), poly(&r, "y^2")]).unwrap();
        let g = TransformationMatrix::new(
            &r,
            vec![
                vec![poly(&r, "1"), poly(&r, "-1")],
                vec![poly(&r, "0"), poly(&r, "1")],
            ],
        )
        .unwrap();
        assert!(sequence_transform(&src, &tgt, &g).is_ok());
    }

    #[test]
    fn sequence_transform_rejects_wrong_matrix() {
        let r = ring1();
        let src = build_koszul(&r, &[poly(&r, "2*x^2")]).unwrap();
        let tgt = build_koszul(&r, &[poly(&r, "x^2")]).unwrap();
        let g = TransformationMatrix::new(&r, vec![vec![poly(&r, "3")]]).unwrap();
        assert!(matches!(
            sequence_transform(&src, &tgt, &g),
            Err(KoszulError::IdentityFails(0))
        ));
    }

    #[test]
    fn reduction_peels_off_a_coordinate() {
        // K(C[x,y], {x, y²}) reduces to K(C[y], {y²}).
        let r = ring2();
        let k = build_koszul(&r, &[poly(&r, "x"), poly(&r, "y^2")]).unwrap();
        let red = reduce_to_minimal(&k).unwrap();
        assert_eq!(red.pivots, vec![(0, 0)]);
        assert_eq!(red.minimal.base_ring().len(), 1);
        assert_eq!(red.minimal.base_ring().var(0).name, "y");
        assert_eq!(red.minimal.sequence_len(), 1);
        let y2 = poly(red.minimal.base_ring(), "y^2");
        assert_eq!(
            red.minimal.sequence()[0],
            embed(&y2, red.minimal.ring())
        );
    }

    #[test]
    fn reduction_of_already_minimal_complex_is_identity() {
        let r = ring1();
        let k = build_koszul(&r, &[poly(&r, "x^2")]).unwrap();
        let red = reduce_to_minimal(&k).unwrap();
        assert!(red.pivots.is_empty());
        assert_eq!(red.minimal.base_ring().len(), 1);
        assert_eq!(red.minimal.sequence()[0], k.sequence()[0]);
    }

    #[test]
    fn reduction_with_nonlinear_coordinate_change() {
        // K(C[x,y], {x + y², y²}) with deg x = 2: the change x ↦ x − y²
        // makes x + y² a coordinate; the reduced complex is K(C[y], {y²}).
        let r = RingSpec::new(vec![
            VariableSpec::even("x", 2),
            VariableSpec::even("y", 1),
        ])
        .unwrap();
        let k = build_koszul(&r, &[poly(&r, "x + y^2"), poly(&r, "y^2")]).unwrap();
        let red = reduce_to_minimal(&k).unwrap();
        assert_eq!(red.pivots, vec![(0, 0)]);
        assert_eq!(red.minimal.base_ring().len(), 1);
        // H⁰ of the result is C[y]/(y²).
        let coh = red.minimal.cohomology_dims(6).unwrap();
        assert_eq!(coh.get(&(0, 0)), Some(&1));
        assert_eq!(coh.get(&(0, 1)), Some(&1));
        assert_eq!(coh.get(&(0, 2)), None);
        // The projection sends x ↦ −y² (the new x-coordinate is set to 0).
        let x = SuperPolynomial::variable(k.ring(), 0);
        let expected = embed(&poly(red.minimal.base_ring(), "-y^2"), red.minimal.ring());
        assert_eq!(red.projection.apply(&x).unwrap(), expected);
    }

    #[test]
    fn reduction_cohomology_agrees_with_original() {
        let r = ring2();
        let k = build_koszul(&r, &[poly(&r, "x"), poly(&r, "y^2")]).unwrap();
        let red = reduce_to_minimal(&k).unwrap();
        let before = k.cohomology_dims(6).unwrap();
        let after = red.minimal.cohomology_dims(6).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn reduction_invariant_under_permutation() {
        let r = ring2();
        let k1 = build_koszul(&r, &[poly(&r, "x"), poly(&r, "y^2")]).unwrap();
        let k2 = build_koszul(&r, &[poly(&r, "y^2"), poly(&r, "x")]).unwrap();
        let r1 = reduce_to_minimal(&k1).unwrap();
        let r2 = reduce_to_minimal(&k2).unwrap();
        assert_eq!(r1.minimal.base_ring().len(), r2.minimal.base_ring().len());
        let degs = |k: &KoszulData| {
            let mut v: Vec<i64> = k
                .sequence()
                .iter()
                .map(|f| f.inner_degree().unwrap())
                .collect();
            v.sort_unstable();
            v
        };
        assert_eq!(degs(&r1.minimal), degs(&r2.minimal));
    }
}
