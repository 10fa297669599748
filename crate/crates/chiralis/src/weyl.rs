//! Weyl algebras of exact differential operators on super polynomial rings.
//!
//! Elements are finite rational combinations of normal-ordered monomials
//! `x^a ξ^b ∂_x^c ∂_ξ^d`: all multiplication operators strictly left of all
//! derivative operators, each block in ring order, odd exponents at most one.
//! Products are rewritten into this form exactly — per even variable by the
//! closed contraction formula, for the odd variables by word rewriting with
//! super-signs. A brute-force action on polynomials doubles as an
//! independent correctness oracle for the rewrite rules.
//!
//! On top of the algebra the module builds the two graded complexes used for
//! computing the cohomology of differential operators on a quotient:
//! the fat-point complex `0 → D_ℂ/x^n D_ℂ → ∂_ξ D_ℂ/x^n D_ℂ → 0` with its
//! per-degree kernel analysis and the induced action on `gl(ℂ[x]/(x^n))`,
//! and the quotient-page complex `A ⊗ D → A ⊗ D[∂_ξ]^{(1)} → ⋯` attached to
//! an arbitrary Koszul datum with finite-dimensional quotient.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::koszul::KoszulData;
use crate::linalg::{Q, SparseMatrix, SubspaceReducer};
use crate::superpoly::{
    AlgebraError, Parity, RingSpec, SuperPolynomial, VariableSpec,
};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WeylError {
    #[error("elements live over different rings")]
    RingMismatch,
    #[error("odd exponent exceeds one")]
    OddExponent,
    #[error("exponent vector has wrong length")]
    BadShape,
    #[error("operator is not odd")]
    NotOdd,
    #[error("operator does not square to zero")]
    NotSquareZero,
    #[error("truncation must be positive")]
    BadTruncation,
    #[error("quotient ring is not finite-dimensional within the probe window")]
    NotFiniteQuotient,
    #[error("the quotient-page complex requires an all-even base ring")]
    EvenBaseRequired,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// A normal-ordered monomial: multiplication exponents on the left,
/// derivative exponents on the right, both indexed by ring variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeylMonomial {
    pub mult: Vec<u32>,
    pub der: Vec<u32>,
}

impl WeylMonomial {
    pub fn identity(n: usize) -> Self {
        WeylMonomial { mult: vec![0; n], der: vec![0; n] }
    }

    fn parity(&self, ring: &RingSpec) -> Parity {
        let odd: u64 = (0..ring.len())
            .filter(|&i| ring.var(i).parity == Parity::Odd)
            .map(|i| (self.mult[i] + self.der[i]) as u64)
            .sum();
        Parity::from_count(odd)
    }

    fn inner_degree(&self, ring: &RingSpec) -> i64 {
        (0..ring.len())
            .map(|i| (self.mult[i] as i64 - self.der[i] as i64) * ring.var(i).inner)
            .sum()
    }

    fn coh_degree(&self, ring: &RingSpec) -> i64 {
        (0..ring.len())
            .map(|i| (self.mult[i] as i64 - self.der[i] as i64) * ring.var(i).coh_degree())
            .sum()
    }
}

/// A graded piece of a Weyl algebra: its degree label and an explicit
/// monomial basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedWeylComponent {
    /// `(cohomological degree, inner degree)` of every basis monomial.
    pub degree: (i64, i64),
    pub basis: Vec<WeylMonomial>,
}

impl GradedWeylComponent {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// An exact element of the Weyl algebra of a super polynomial ring.
#[derive(Clone, Debug)]
pub struct WeylElement {
    ring: Arc<RingSpec>,
    terms: BTreeMap<WeylMonomial, Q>,
}

impl PartialEq for WeylElement {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.terms == other.terms
    }
}

impl Eq for WeylElement {}

impl WeylElement {
    pub fn zero(ring: &Arc<RingSpec>) -> Self {
        WeylElement { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<RingSpec>, value: Q) -> Self {
        let mut out = Self::zero(ring);
        out.add_term(WeylMonomial::identity(ring.len()), value);
        out
    }

    pub fn one(ring: &Arc<RingSpec>) -> Self {
        Self::constant(ring, Q::one())
    }

    pub fn monomial(
        ring: &Arc<RingSpec>,
        monomial: WeylMonomial,
        coeff: Q,
    ) -> Result<Self, WeylError> {
        if monomial.mult.len() != ring.len() || monomial.der.len() != ring.len() {
            return Err(WeylError::BadShape);
        }
        for i in 0..ring.len() {
            if ring.var(i).parity == Parity::Odd
                && (monomial.mult[i] > 1 || monomial.der[i] > 1)
            {
                return Err(WeylError::OddExponent);
            }
        }
        let mut out = Self::zero(ring);
        out.add_term(monomial, coeff);
        Ok(out)
    }

    /// The operator of left multiplication by a polynomial.
    pub fn multiplication(p: &SuperPolynomial) -> Self {
        let ring = p.ring().clone();
        let mut out = Self::zero(&ring);
        for (m, c) in p.terms() {
            out.add_term(
                WeylMonomial { mult: m.to_vec(), der: vec![0; ring.len()] },
                c.clone(),
            );
        }
        out
    }

    /// The variable `x_i` as a multiplication operator.
    pub fn variable(ring: &Arc<RingSpec>, i: usize) -> Self {
        Self::multiplication(&SuperPolynomial::variable(ring, i))
    }

    /// The derivative operator `∂_i`.
    pub fn derivative(ring: &Arc<RingSpec>, i: usize) -> Self {
        let mut der = vec![0; ring.len()];
        der[i] = 1;
        let mut out = Self::zero(ring);
        out.add_term(WeylMonomial { mult: vec![0; ring.len()], der }, Q::one());
        out
    }

    pub fn ring(&self) -> &Arc<RingSpec> {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&WeylMonomial, &Q)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &WeylMonomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    fn add_term(&mut self, m: WeylMonomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        WeylElement {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, q)| (m.clone(), q * c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    /// Parity if every term agrees; zero counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| m.parity(&self.ring));
        match it.next() {
            None => Some(Parity::Even),
            Some(p) => it.all(|q| q == p).then_some(p),
        }
    }

    /// Inner degree if every term agrees; zero counts as degree 0.
    pub fn inner_degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| m.inner_degree(&self.ring));
        match it.next() {
            None => Some(0),
            Some(d) => it.all(|e| e == d).then_some(d),
        }
    }

    /// Cohomological degree if every term agrees; zero counts as degree 0.
    pub fn coh_degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| m.coh_degree(&self.ring));
        match it.next() {
            None => Some(0),
            Some(d) => it.all(|e| e == d).then_some(d),
        }
    }

    /// The terms of the given parity.
    pub fn parity_component(&self, p: Parity) -> Self {
        WeylElement {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.parity(&self.ring) == p)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Applies the operator to a polynomial (multiplication operators after
    /// derivatives, derivatives rightmost-first). This is a deliberately
    /// simple evaluation used to cross-check the normal-ordering rewrite.
    pub fn apply_to_polynomial(
        &self,
        p: &SuperPolynomial,
    ) -> Result<SuperPolynomial, WeylError> {
        if **p.ring() != *self.ring {
            return Err(WeylError::RingMismatch);
        }
        let mut out = SuperPolynomial::zero(&self.ring);
        for (m, c) in &self.terms {
            let mut value = p.clone();
            for i in (0..self.ring.len()).rev() {
                for _ in 0..m.der[i] {
                    value = value.partial_derivative(i);
                }
            }
            if value.is_zero() {
                continue;
            }
            let shift = SuperPolynomial::monomial(&self.ring, m.mult.clone(), c.clone())
                .map_err(WeylError::Algebra)?;
            out = out
                .checked_add(&shift.checked_mul(&value).map_err(WeylError::Algebra)?)
                .map_err(WeylError::Algebra)?;
        }
        Ok(out)
    }
}

impl std::ops::Add for &WeylElement {
    type Output = WeylElement;
    fn add(self, rhs: &WeylElement) -> WeylElement {
        assert_eq!(*self.ring, *rhs.ring, "ring mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &WeylElement {
    type Output = WeylElement;
    fn sub(self, rhs: &WeylElement) -> WeylElement {
        self + &rhs.neg()
    }
}

impl std::ops::Mul for &WeylElement {
    type Output = WeylElement;
    fn mul(self, rhs: &WeylElement) -> WeylElement {
        weyl_multiply(self, rhs).expect("ring mismatch")
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mut factors = Vec::new();
            for (i, &e) in m.mult.iter().enumerate() {
                if e == 1 {
                    factors.push(self.ring.var(i).name.clone());
                } else if e > 1 {
                    factors.push(format!("{}^{}", self.ring.var(i).name, e));
                }
            }
            for (i, &e) in m.der.iter().enumerate() {
                if e == 1 {
                    factors.push(format!("D{}", self.ring.var(i).name));
                } else if e > 1 {
                    factors.push(format!("D{}^{}", self.ring.var(i).name, e));
                }
            }
            let body = if factors.is_empty() {
                format!("{c}")
            } else if c.is_one() {
                factors.join(" ")
            } else if (-c.clone()).is_one() {
                format!("-{}", factors.join(" "))
            } else {
                format!("{c} {}", factors.join(" "))
            };
            if first {
                write!(f, "{body}")?;
                first = false;
            } else if let Some(stripped) = body.strip_prefix('-') {
                write!(f, " - {stripped}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        Ok(())
    }
}

fn factorial(k: u32) -> BigInt {
    let mut f = BigInt::one();
    for i in 2..=k as u64 {
        f *= i;
    }
    f
}

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// Sorts an odd word, counting transpositions; `None` on a repeated letter.
fn sort_odd_word(word: &[usize]) -> Option<(i32, Vec<usize>)> {
    let mut w = word.to_vec();
    let mut sign = 1;
    for i in 1..w.len() {
        let mut j = i;
        while j > 0 && w[j - 1] > w[j] {
            w.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for pair in w.windows(2) {
        if pair[0] == pair[1] {
            return None;
        }
    }
    Some((sign, w))
}

/// Normal-orders the product of two monomials.
fn multiply_monomials(
    ring: &RingSpec,
    m1: &WeylMonomial,
    m2: &WeylMonomial,
) -> Vec<(WeylMonomial, Q)> {
    let n = ring.len();
    let even: Vec<usize> =
        (0..n).filter(|&i| ring.var(i).parity == Parity::Even).collect();
    let odd: Vec<usize> =
        (0..n).filter(|&i| ring.var(i).parity == Parity::Odd).collect();

    // Even part: per-variable contractions of ∂^{c₁} against x^{a₂}.
    let mut even_terms: Vec<(Vec<u32>, Vec<u32>, Q)> = {
        let mut mult = vec![0u32; n];
        let mut der = vec![0u32; n];
        for &i in &even {
            mult[i] = m1.mult[i] + m2.mult[i];
            der[i] = m1.der[i] + m2.der[i];
        }
        vec![(mult, der, Q::one())]
    };
    for &i in &even {
        let c1 = m1.der[i];
        let a2 = m2.mult[i];
        let kmax = c1.min(a2);
        if kmax == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(even_terms.len() * (kmax as usize + 1));
        for (mult, der, q) in &even_terms {
            for k in 0..=kmax {
                let coeff = factorial(k) * binomial(c1, k) * binomial(a2, k);
                let mut mult2 = mult.clone();
                let mut der2 = der.clone();
                mult2[i] -= k;
                der2[i] -= k;
                next.push((mult2, der2, q * Q::from_integer(coeff)));
            }
        }
        even_terms = next;
    }

    // Odd part: push the ∂'s of m1 through the odd multiplication word of
    // m2, one at a time from the innermost.
    let d1: Vec<usize> = odd.iter().copied().filter(|&i| m1.der[i] == 1).collect();
    let a2: Vec<usize> = odd.iter().copied().filter(|&i| m2.mult[i] == 1).collect();
    let mut odd_terms: Vec<(i32, Vec<usize>, Vec<usize>)> = vec![(1, a2, Vec::new())];
    for &theta in d1.iter().rev() {
        let mut next = Vec::with_capacity(odd_terms.len() * 2);
        for (s, mw, dw) in &odd_terms {
            if let Some(pos) = mw.iter().position(|&u| u == theta) {
                let sign = if pos % 2 == 0 { *s } else { -*s };
                let mut reduced = mw.clone();
                reduced.remove(pos);
                next.push((sign, reduced, dw.clone()));
            }
            let sign = if mw.len() % 2 == 0 { *s } else { -*s };
            let mut extended = dw.clone();
            extended.insert(0, theta);
            next.push((sign, mw.clone(), extended));
        }
        odd_terms = next;
    }
    let a1: Vec<usize> = odd.iter().copied().filter(|&i| m1.mult[i] == 1).collect();
    let d2: Vec<usize> = odd.iter().copied().filter(|&i| m2.der[i] == 1).collect();

    let mut out = Vec::new();
    for (s, mw, dw) in &odd_terms {
        let full_mult: Vec<usize> =
            a1.iter().chain(mw.iter()).copied().collect();
        let Some((sign_m, sorted_mult)) = sort_odd_word(&full_mult) else {
            continue;
        };
        let full_der: Vec<usize> = dw.iter().chain(d2.iter()).copied().collect();
        let Some((sign_d, sorted_der)) = sort_odd_word(&full_der) else {
            continue;
        };
        let odd_sign = s * sign_m * sign_d;
        for (mult, der, q) in &even_terms {
            let mut mult2 = mult.clone();
            let mut der2 = der.clone();
            for &i in &sorted_mult {
                mult2[i] = 1;
            }
            for &i in &sorted_der {
                der2[i] = 1;
            }
            let coeff = if odd_sign == 1 { q.clone() } else { -q.clone() };
            out.push((WeylMonomial { mult: mult2, der: der2 }, coeff));
        }
    }
    out
}

/// The associative normal-ordered product of two Weyl elements.
pub fn weyl_multiply(a: &WeylElement, b: &WeylElement) -> Result<WeylElement, WeylError> {
    if *a.ring != *b.ring {
        return Err(WeylError::RingMismatch);
    }
    let mut out = WeylElement::zero(&a.ring);
    for (m1, c1) in &a.terms {
        for (m2, c2) in &b.terms {
            let c = c1 * c2;
            for (m, q) in multiply_monomials(&a.ring, m1, m2) {
                out.add_term(m, q * &c);
            }
        }
    }
    Ok(out)
}

/// The supercommutator `[a, b] = ab − (−1)^{|a||b|} ba`, extended bilinearly
/// over the parity components of the inputs.
pub fn supercommutator(a: &WeylElement, b: &WeylElement) -> WeylElement {
    assert_eq!(*a.ring, *b.ring, "ring mismatch");
    let mut out = WeylElement::zero(&a.ring);
    for pa in [Parity::Even, Parity::Odd] {
        let ca = a.parity_component(pa);
        if ca.is_zero() {
            continue;
        }
        for pb in [Parity::Even, Parity::Odd] {
            let cb = b.parity_component(pb);
            if cb.is_zero() {
                continue;
            }
            let ab = weyl_multiply(&ca, &cb).expect("same ring");
            let ba = weyl_multiply(&cb, &ca).expect("same ring");
            let signed = if pa == Parity::Odd && pb == Parity::Odd {
                &ab + &ba
            } else {
                &ab - &ba
            };
            out = &out + &signed;
        }
    }
    out
}

/// The square-zero endomorphism `a ↦ [∂, a]` attached to an odd square-zero
/// operator.
#[derive(Clone, Debug)]
pub struct DgWeylDifferential {
    operator: WeylElement,
}

impl DgWeylDifferential {
    pub fn operator(&self) -> &WeylElement {
        &self.operator
    }

    pub fn apply(&self, a: &WeylElement) -> WeylElement {
        supercommutator(&self.operator, a)
    }
}

/// Checks that the operator is odd with `[∂, ∂] = 0` and wraps it as the
/// differential `[∂, ·]` of the dg Weyl algebra.
pub fn dg_weyl_differential(operator: &WeylElement) -> Result<DgWeylDifferential, WeylError> {
    if operator.parity() != Some(Parity::Odd) {
        return Err(WeylError::NotOdd);
    }
    if !supercommutator(operator, operator).is_zero() {
        return Err(WeylError::NotSquareZero);
    }
    Ok(DgWeylDifferential { operator: operator.clone() })
}

/// The Koszul differential `Σ_i f_i ∂_{ξ_i}` as a Weyl element over the full
/// Koszul ring.
pub fn koszul_weyl_operator(k: &KoszulData) -> WeylElement {
    let ring = k.ring();
    let mut out = WeylElement::zero(ring);
    for i in 0..k.sequence_len() {
        let f = WeylElement::multiplication(&k.sequence()[i]);
        let d = WeylElement::derivative(ring, k.xi_index(i));
        out = &out + &(&f * &d);
    }
    out
}

// ---------------------------------------------------------------------------
// Fat-point complex
// ---------------------------------------------------------------------------

/// The two-term complex `0 → D_ℂ/x^n D_ℂ → ∂_ξ D_ℂ/x^n D_ℂ → 0` for the fat
/// point `ℂ[x]/(x^n)`, graded by `x ↦ 1`, `∂_x ↦ −1`, with the differential
/// `u ↦ [x^n, u]` computed per degree on the basis `x^a ∂_x^b`, `0 ≤ a < n`.
#[derive(Clone, Debug)]
pub struct FatPointComplex {
    ring: Arc<RingSpec>,
    n: u32,
}

pub fn fat_point_complex(n: u32) -> FatPointComplex {
    assert!(n >= 1, "fat point order must be positive");
    let ring = RingSpec::new(vec![VariableSpec::even("x", 1)]).expect("valid ring");
    FatPointComplex { ring, n }
}

impl FatPointComplex {
    pub fn order(&self) -> u32 {
        self.n
    }

    /// The degree-`j` component of `D_ℂ/x^n D_ℂ` on the basis
    /// `{x^a ∂_x^b : 0 ≤ a < n, a − b = j}`.
    pub fn component(&self, j: i64) -> GradedWeylComponent {
        let mut basis = Vec::new();
        let lo = j.max(0);
        for a in lo..self.n as i64 {
            let b = a - j;
            if b < 0 {
                continue;
            }
            basis.push(WeylMonomial { mult: vec![a as u32], der: vec![b as u32] });
        }
        GradedWeylComponent { degree: (0, j), basis }
    }

    /// The matrix of `u ↦ [x^n, u] mod x^n D_ℂ` from degree `j` to degree
    /// `j + n`, rows indexed by the codomain basis.
    pub fn matrix(&self, j: i64) -> SparseMatrix {
        let domain = self.component(j);
        let codomain = self.component(j + self.n as i64);
        let index: BTreeMap<&WeylMonomial, usize> =
            codomain.basis.iter().enumerate().map(|(k, m)| (m, k)).collect();
        let xn = {
            let x = WeylElement::variable(&self.ring, 0);
            let mut acc = WeylElement::one(&self.ring);
            for _ in 0..self.n {
                acc = &acc * &x;
            }
            acc
        };
        let mut columns = Vec::with_capacity(domain.basis.len());
        for m in &domain.basis {
            let u = WeylElement::monomial(&self.ring, m.clone(), Q::one()).expect("valid");
            let image = supercommutator(&xn, &u);
            let mut col = Vec::new();
            for (mm, c) in image.terms() {
                if mm.mult[0] >= self.n {
                    continue; // reduce modulo x^n D_ℂ
                }
                col.push((index[mm], c.clone()));
            }
            columns.push(col);
        }
        SparseMatrix::from_columns(codomain.basis.len(), &columns)
    }

    pub fn kernel_dim(&self, j: i64) -> usize {
        let m = self.matrix(j);
        m.cols() - m.rank()
    }

    pub fn is_surjective(&self, j: i64) -> bool {
        let m = self.matrix(j);
        m.rank() == m.rows()
    }

    /// Total kernel dimension over `j_min ≤ j ≤ n − 1`.
    pub fn total_kernel_dim(&self, j_min: i64) -> usize {
        (j_min..self.n as i64).map(|j| self.kernel_dim(j)).sum()
    }

    /// `H⁰` of the complex; the kernel vanishes for `j ≤ −n`, so the sum is
    /// complete.
    pub fn h0_dim(&self) -> usize {
        self.total_kernel_dim(-(self.n as i64) - 1)
    }

    /// Realizes the kernel classes as operators on `A = ℂ[x]/(x^n)` and
    /// returns the rank of the resulting family inside `gl(A)`.
    pub fn gl_embedding_rank(&self, j_min: i64) -> usize {
        let n = self.n as i64;
        let mut rows: Vec<Vec<(usize, Q)>> = Vec::new();
        for j in j_min..n {
            let domain = self.component(j);
            let matrix = self.matrix(j);
            for v in matrix.kernel_basis() {
                // Action of Σ v_k x^{a_k} ∂^{b_k} on the basis {x^m}, flattened
                // into a vector of length n².
                let mut action: Vec<(usize, Q)> = Vec::new();
                for (k, coeff) in v.iter().enumerate() {
                    if coeff.is_zero() {
                        continue;
                    }
                    let a = domain.basis[k].mult[0] as i64;
                    let b = domain.basis[k].der[0] as i64;
                    for m in 0..n {
                        if m < b {
                            continue;
                        }
                        let target = m - b + a;
                        if target >= n {
                            continue;
                        }
                        // ∂^b x^m = m(m−1)⋯(m−b+1) x^{m−b}
                        let mut falling = BigInt::one();
                        for t in 0..b {
                            falling *= m - t;
                        }
                        action.push(
                            ((target * n + m) as usize, coeff * Q::from_integer(falling)),
                        );
                    }
                }
                rows.push(action);
            }
        }
        // Rank of the family inside gl(A).
        let cols = (n * n) as usize;
        let mut triplets = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, q) in row {
                triplets.push((r, *c, q.clone()));
            }
        }
        SparseMatrix::from_triplets(rows.len(), cols, triplets).rank()
    }
}

// ---------------------------------------------------------------------------
// Quotient-page complex of a Koszul datum
// ---------------------------------------------------------------------------

/// Basis element of the quotient-page complex: a quotient-ring coefficient
/// monomial, derivative exponents in the base variables, and a sorted set of
/// exterior slots.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SpectralBasisElement {
    pub coeff_monomial: Vec<u32>,
    pub der_exponents: Vec<u32>,
    pub exterior: Vec<usize>,
}

/// One inner degree of the quotient-page complex, with bases and the
/// differential matrices `C^p → C^{p+1}`.
#[derive(Clone, Debug)]
pub struct SpectralSlice {
    pub inner: i64,
    pub bases: Vec<Vec<SpectralBasisElement>>,
    pub differentials: Vec<SparseMatrix>,
}

impl SpectralSlice {
    pub fn h0_dim(&self) -> usize {
        match self.differentials.first() {
            None => self.bases[0].len(),
            Some(m) => m.cols() - m.rank(),
        }
    }

    /// Cohomology dimension at exterior slot `p`.
    pub fn cohomology_dim(&self, p: usize) -> usize {
        let kernel = if p < self.differentials.len() {
            self.bases[p].len() - self.differentials[p].rank()
        } else {
            self.bases[p].len()
        };
        let image = if p >= 1 { self.differentials[p - 1].rank() } else { 0 };
        kernel - image
    }
}

/// The assembled complex over a window of inner degrees.
#[derive(Clone, Debug)]
pub struct SpectralComplex {
    exterior_rank: usize,
    finite_quotient: bool,
    h0_by_inner: BTreeMap<i64, usize>,
    component_dims: BTreeMap<(usize, i64), usize>,
}

impl SpectralComplex {
    pub fn exterior_rank(&self) -> usize {
        self.exterior_rank
    }

    /// Whether the quotient ring was detected as finite-dimensional (exact
    /// dimensions) rather than windowed (free case, zero differential).
    pub fn finite_quotient(&self) -> bool {
        self.finite_quotient
    }

    pub fn h0_by_inner(&self) -> &BTreeMap<i64, usize> {
        &self.h0_by_inner
    }

    pub fn h0_total(&self) -> usize {
        self.h0_by_inner.values().sum()
    }

    pub fn component_dim(&self, p: usize, inner: i64) -> usize {
        self.component_dims.get(&(p, inner)).copied().unwrap_or(0)
    }
}

/// Exponent vectors `γ` with `Σ γ_i · degrees_i = total`.
fn weak_exponents(degrees: &[i64], total: i64) -> Vec<Vec<u32>> {
    fn recurse(degrees: &[i64], total: i64, out: &mut Vec<Vec<u32>>, prefix: &mut Vec<u32>) {
        if degrees.is_empty() {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        let d = degrees[0];
        let max = total / d;
        for e in 0..=max {
            prefix.push(e as u32);
            recurse(&degrees[1..], total - e * d, out, prefix);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if total >= 0 {
        recurse(degrees, total, &mut out, &mut Vec::new());
    }
    out
}

struct QuotientCache<'a> {
    k: &'a KoszulData,
    map: BTreeMap<i64, (Vec<Vec<u32>>, BTreeMap<Vec<u32>, usize>, SubspaceReducer)>,
}

impl<'a> QuotientCache<'a> {
    fn new(k: &'a KoszulData) -> Self {
        QuotientCache { k, map: BTreeMap::new() }
    }

    fn get(
        &mut self,
        e: i64,
    ) -> Result<&(Vec<Vec<u32>>, BTreeMap<Vec<u32>, usize>, SubspaceReducer), WeylError> {
        if !self.map.contains_key(&e) {
            let (monomials, reducer) = self
                .k
                .quotient_reducer(e)
                .map_err(|_| WeylError::NotFiniteQuotient)?;
            let index = monomials
                .iter()
                .enumerate()
                .map(|(i, m)| (m.clone(), i))
                .collect();
            self.map.insert(e, (monomials, index, reducer));
        }
        Ok(&self.map[&e])
    }
}

/// Builds one inner degree of the quotient-page complex of `k`: exterior
/// slot `p` has basis `Ā ⊗ ∂_x^γ ⊗ ∂_{ξ_S}` with `|S| = p`, and the
/// differential sends a basis element to `Σ_{i∉S} [f_i, ā ∂^γ] ∂_{ξ_i} ∂_{ξ_S}`
/// with the coefficient reduced into the quotient complement.
fn build_slice(
    k: &KoszulData,
    cache: &mut QuotientCache<'_>,
    top: i64,
    inner: i64,
) -> Result<SpectralSlice, WeylError> {
    let base = k.base_ring();
    let r = k.sequence_len();
    let base_degrees: Vec<i64> = base.vars().iter().map(|v| v.inner).collect();
    let f_degrees: Vec<i64> = k
        .sequence()
        .iter()
        .map(|f| f.inner_degree().expect("homogeneous"))
        .collect();
    let f_base: Vec<SuperPolynomial> = (0..r)
        .map(|i| {
            let mut p = SuperPolynomial::zero(base);
            for (m, c) in k.sequence()[i].terms() {
                let mono =
                    SuperPolynomial::monomial(base, m[..base.len()].to_vec(), c.clone())
                        .expect("valid");
                p = p.checked_add(&mono).expect("same ring");
            }
            p
        })
        .collect();

    // Bases per exterior slot.
    let mut bases: Vec<Vec<SpectralBasisElement>> = Vec::with_capacity(r + 1);
    for p in 0..=r {
        let mut basis = Vec::new();
        for s in combinations(r, p) {
            let degf: i64 = s.iter().map(|&i| f_degrees[i]).sum();
            for e in 0..=top {
                let g = e - inner - degf;
                if g < 0 {
                    continue;
                }
                for gamma in weak_exponents(&base_degrees, g) {
                    let (monomials, _, reducer) = cache.get(e)?;
                    for &ci in reducer.complement() {
                        basis.push(SpectralBasisElement {
                            coeff_monomial: monomials[ci].clone(),
                            der_exponents: gamma.clone(),
                            exterior: s.clone(),
                        });
                    }
                }
            }
        }
        bases.push(basis);
    }

    // Differentials.
    let mut differentials = Vec::with_capacity(r);
    for p in 0..r {
        let target_index: BTreeMap<&SpectralBasisElement, usize> =
            bases[p + 1].iter().enumerate().map(|(i, b)| (b, i)).collect();
        let mut columns = Vec::with_capacity(bases[p].len());
        for elt in &bases[p] {
            let u = WeylElement::monomial(
                base,
                WeylMonomial {
                    mult: elt.coeff_monomial.clone(),
                    der: elt.der_exponents.clone(),
                },
                Q::one(),
            )
            .expect("valid");
            let mut col: BTreeMap<usize, Q> = BTreeMap::new();
            for i in 0..r {
                if elt.exterior.contains(&i) {
                    continue;
                }
                let sign_count = elt.exterior.iter().filter(|&&s| s < i).count();
                let sign = if sign_count % 2 == 0 { Q::one() } else { -Q::one() };
                let mut extended = elt.exterior.clone();
                extended.push(i);
                extended.sort_unstable();
                let fi = WeylElement::multiplication(&f_base[i]);
                let image = supercommutator(&fi, &u);
                for (wm, q) in image.terms() {
                    let e2: i64 = wm
                        .mult
                        .iter()
                        .enumerate()
                        .map(|(v, &ex)| ex as i64 * base_degrees[v])
                        .sum();
                    let (monomials, index, reducer) = cache.get(e2)?;
                    let mut dense = vec![Q::zero(); monomials.len()];
                    dense[index[&wm.mult]] = Q::one();
                    let reduced = reducer.reduce(&dense);
                    for (mi, rc) in reduced.iter().enumerate() {
                        if rc.is_zero() {
                            continue;
                        }
                        let target = SpectralBasisElement {
                            coeff_monomial: monomials[mi].clone(),
                            der_exponents: wm.der.clone(),
                            exterior: extended.clone(),
                        };
                        let row = *target_index
                            .get(&target)
                            .expect("differential preserves inner degree");
                        let val = q * rc * &sign;
                        let entry = col.entry(row).or_insert_with(Q::zero);
                        *entry += val;
                    }
                }
            }
            columns.push(
                col.into_iter().filter(|(_, q)| !q.is_zero()).collect::<Vec<_>>(),
            );
        }
        differentials.push(SparseMatrix::from_columns(bases[p + 1].len(), &columns));
    }
    Ok(SpectralSlice { inner, bases, differentials })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn recurse(start: usize, n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for i in start..n {
            prefix.push(i);
            recurse(i + 1, n, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    recurse(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// One inner degree of the quotient-page complex.
pub fn spectral_slice(k: &KoszulData, inner: i64) -> Result<SpectralSlice, WeylError> {
    k.base_ring().require_graded()?;
    require_even_base(k)?;
    let top = probe_top_degree(k)?;
    let mut cache = QuotientCache::new(k);
    build_slice(k, &mut cache, top, inner)
}

fn require_even_base(k: &KoszulData) -> Result<(), WeylError> {
    if k.base_ring().vars().iter().any(|v| v.parity == Parity::Odd) {
        return Err(WeylError::EvenBaseRequired);
    }
    Ok(())
}

fn probe_top_degree(k: &KoszulData) -> Result<i64, WeylError> {
    let max_var = k
        .base_ring()
        .vars()
        .iter()
        .map(|v| v.inner)
        .max()
        .unwrap_or(1);
    let degf: i64 = k
        .sequence()
        .iter()
        .map(|f| f.inner_degree().expect("homogeneous"))
        .sum();
    k.quotient_finite_probe(degf + max_var + 1)
        .map_err(|_| WeylError::NotFiniteQuotient)?
        .ok_or(WeylError::NotFiniteQuotient)
}

/// Builds the quotient-page complex of a Koszul datum over the symmetric
/// window `|inner| ≤ truncation` and reports the `H⁰` dimension per inner
/// degree. With a nonempty sequence the quotient must be finite-dimensional,
/// making every inner degree exact; with an empty sequence the single-term
/// complex is windowed by the degree of the coefficient monomial.
pub fn spectral_complex(
    k: &KoszulData,
    truncation: i64,
) -> Result<SpectralComplex, WeylError> {
    if truncation <= 0 {
        return Err(WeylError::BadTruncation);
    }
    k.base_ring().require_graded()?;
    require_even_base(k)?;
    let r = k.sequence_len();
    let base_degrees: Vec<i64> =
        k.base_ring().vars().iter().map(|v| v.inner).collect();

    if r == 0 {
        // Free case: zero differential, symmetric window on multiplication
        // and derivative degrees.
        let mut h0 = BTreeMap::new();
        let mut dims = BTreeMap::new();
        for d in -truncation..=truncation {
            let mut count = 0usize;
            for e in d.max(0)..=truncation {
                if e - d > truncation {
                    continue;
                }
                count += weak_exponents(&base_degrees, e).len()
                    * weak_exponents(&base_degrees, e - d).len();
            }
            h0.insert(d, count);
            dims.insert((0usize, d), count);
        }
        return Ok(SpectralComplex {
            exterior_rank: 0,
            finite_quotient: false,
            h0_by_inner: h0,
            component_dims: dims,
        });
    }

    let top = probe_top_degree(k)?;
    let mut cache = QuotientCache::new(k);
    let mut h0 = BTreeMap::new();
    let mut dims = BTreeMap::new();
    for d in -truncation..=truncation {
        let slice = build_slice(k, &mut cache, top, d)?;
        for (p, basis) in slice.bases.iter().enumerate() {
            if !basis.is_empty() {
                dims.insert((p, d), basis.len());
            }
        }
        let h = slice.h0_dim();
        if h > 0 {
            h0.insert(d, h);
        }
    }
    Ok(SpectralComplex {
        exterior_rank: r,
        finite_quotient: true,
        h0_by_inner: h0,
        component_dims: dims,
    })
}
