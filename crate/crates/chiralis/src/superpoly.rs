//! Free supercommutative polynomial algebras with multi-grading.
//!
//! A ring is an ordered list of variables, each carrying a parity, a
//! cohomological bidegree and an inner degree. Monomials are exponent
//! vectors in the fixed variable order; a monomial denotes the product of
//! its variables taken left-to-right in that order, and all signs follow
//! from the Koszul rule (odd variables anticommute, odd squares vanish).
//!
//! The bidegree of a variable is a pair `(r, f)` with `r ≤ 0` (the
//! resolution direction, carried by odd resolution variables) and `f ≥ 0`
//! (the form direction, carried by the variables adjoined in
//! [`RingSpec::de_rham_extend`]); the cohomological degree is `r + f`.
//! Inner degrees are nonnegative; inner degree 0 marks an ungraded ring,
//! which the enumeration-based algorithms reject explicitly.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::linalg::Q;

mod parse;
pub use parse::{parse_polynomial, ParseError};

/// Even/odd grading of a variable or a homogeneous element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn is_odd(self) -> bool {
        matches!(self, Parity::Odd)
    }

    /// Parity of a count of odd factors.
    pub fn from_count(n: u64) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// One generator of a ring: name, parity, cohomological bidegree and inner
/// degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableSpec {
    pub name: String,
    pub parity: Parity,
    /// `(resolution degree ≤ 0, form degree ≥ 0)`; cohomological degree is
    /// the sum of the two components.
    pub bidegree: (i64, i64),
    /// Inner degree, `≥ 0`; `0` means the ring is used ungraded.
    pub inner: i64,
}

impl VariableSpec {
    /// A variable with bidegree `(coh, 0)`.
    pub fn new(name: impl Into<String>, parity: Parity, coh: i64, inner: i64) -> Self {
        VariableSpec { name: name.into(), parity, bidegree: (coh, 0), inner }
    }

    /// An even variable of bidegree `(0, 0)`.
    pub fn even(name: impl Into<String>, inner: i64) -> Self {
        Self::new(name, Parity::Even, 0, inner)
    }

    /// An odd resolution variable of bidegree `(−1, 0)`.
    pub fn odd(name: impl Into<String>, inner: i64) -> Self {
        Self::new(name, Parity::Odd, -1, inner)
    }

    pub fn coh_degree(&self) -> i64 {
        self.bidegree.0 + self.bidegree.1
    }
}

/// An ordered list of variables. The order is canonical: it fixes the
/// monomial normal form and every sign in the algebra.
#[derive(Debug, PartialEq, Eq)]
pub struct RingSpec {
    vars: Vec<VariableSpec>,
}

/// Record of a de Rham extension: for each variable of the base ring, the
/// index of its adjoined form partner in the extended ring.
#[derive(Clone, Debug)]
pub struct DeRhamExtension {
    pub base_len: usize,
    /// `partner[i]` is the index of the form partner of base variable `i`.
    pub partner: Vec<usize>,
}

impl RingSpec {
    pub fn new(vars: Vec<VariableSpec>) -> Result<Arc<RingSpec>, AlgebraError> {
        let mut seen = std::collections::BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.name.clone()) {
                return Err(AlgebraError::DuplicateVariable(v.name.clone()));
            }
            if v.inner < 0 {
                return Err(AlgebraError::InvalidVariable {
                    name: v.name.clone(),
                    reason: "inner degree must be nonnegative".into(),
                });
            }
            if v.bidegree.0 > 0 || v.bidegree.1 < 0 {
                return Err(AlgebraError::InvalidVariable {
                    name: v.name.clone(),
                    reason: "bidegree must be (≤0, ≥0)".into(),
                });
            }
        }
        Ok(Arc::new(RingSpec { vars }))
    }

    pub fn vars(&self) -> &[VariableSpec] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var(&self, i: usize) -> &VariableSpec {
        &self.vars[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Whether every variable has positive inner degree.
    pub fn is_graded(&self) -> bool {
        self.vars.iter().all(|v| v.inner > 0)
    }

    /// Errors with the offending variable if the ring is not graded.
    pub fn require_graded(&self) -> Result<(), AlgebraError> {
        match self.vars.iter().find(|v| v.inner == 0) {
            None => Ok(()),
            Some(v) => Err(AlgebraError::UngradedRing(v.name.clone())),
        }
    }

    /// Adjoins a form partner `d<name>` for every variable: partners of even
    /// variables are odd of bidegree `(0, 1)` (de Rham forms), partners of
    /// odd resolution variables are even of bidegree `(−1, 1)`; inner degrees
    /// are inherited. Partners of even variables come first, then partners of
    /// odd ones. Fails if the ring already carries form variables.
    pub fn de_rham_extend(
        self: &Arc<Self>,
    ) -> Result<(Arc<RingSpec>, DeRhamExtension), AlgebraError> {
        if let Some(v) = self.vars.iter().find(|v| v.bidegree.1 != 0) {
            return Err(AlgebraError::InvalidVariable {
                name: v.name.clone(),
                reason: "ring already carries form variables".into(),
            });
        }
        let mut vars = self.vars.clone();
        let mut partner = vec![0usize; self.vars.len()];
        for odd_pass in [false, true] {
            for (i, v) in self.vars.iter().enumerate() {
                if v.parity.is_odd() != odd_pass {
                    continue;
                }
                partner[i] = vars.len();
                vars.push(VariableSpec {
                    name: format!("d{}", v.name),
                    parity: v.parity.flip(),
                    bidegree: (v.bidegree.0, 1),
                    inner: v.inner,
                });
            }
        }
        let ext = DeRhamExtension { base_len: self.vars.len(), partner };
        Ok((RingSpec::new(vars)?, ext))
    }
}

/// Finite linear combination of monomials with exact rational coefficients.
#[derive(Clone, Debug)]
pub struct SuperPolynomial {
    ring: Arc<RingSpec>,
    /// Canonically ordered, no zero coefficients, odd exponents ≤ 1.
    terms: BTreeMap<Vec<u32>, Q>,
}

impl PartialEq for SuperPolynomial {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.terms == other.terms
    }
}

impl Eq for SuperPolynomial {}

impl SuperPolynomial {
    pub fn zero(ring: &Arc<RingSpec>) -> Self {
        SuperPolynomial { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ring: &Arc<RingSpec>) -> Self {
        Self::constant(ring, Q::one())
    }

    pub fn constant(ring: &Arc<RingSpec>, c: Q) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; ring.len()], c);
        }
        SuperPolynomial { ring: ring.clone(), terms }
    }

    pub fn variable(ring: &Arc<RingSpec>, i: usize) -> Self {
        let mut exps = vec![0; ring.len()];
        exps[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exps, Q::one());
        SuperPolynomial { ring: ring.clone(), terms }
    }

    /// A single monomial with the given exponents and coefficient.
    pub fn monomial(ring: &Arc<RingSpec>, exps: Vec<u32>, c: Q) -> Result<Self, AlgebraError> {
        assert_eq!(exps.len(), ring.len(), "exponent vector length mismatch");
        for (i, &e) in exps.iter().enumerate() {
            if ring.var(i).parity.is_odd() && e > 1 {
                return Err(AlgebraError::OddSquare(ring.var(i).name.clone()));
            }
        }
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        Ok(SuperPolynomial { ring: ring.clone(), terms })
    }

    pub fn ring(&self) -> &Arc<RingSpec> {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Q)> {
        self.terms.iter().map(|(m, c)| (m.as_slice(), c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, exps: &[u32]) -> Q {
        self.terms.get(exps).cloned().unwrap_or_else(Q::zero)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(&self.ring);
        }
        SuperPolynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    fn require_same_ring(&self, other: &Self) -> Result<(), AlgebraError> {
        if *self.ring == *other.ring {
            Ok(())
        } else {
            Err(AlgebraError::RingMismatch)
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.require_same_ring(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    /// Supercommutative product; fails on a ring mismatch.
    pub fn checked_mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.require_same_ring(other)?;
        let mut out = Self::zero(&self.ring);
        let odd_vars: Vec<usize> = (0..self.ring.len())
            .filter(|&i| self.ring.var(i).parity.is_odd())
            .collect();
        for (m1, c1) in &self.terms {
            let odds1: Vec<usize> =
                odd_vars.iter().copied().filter(|&i| m1[i] == 1).collect();
            'terms2: for (m2, c2) in &other.terms {
                // Koszul sign: each odd factor of `m2` moves left past the
                // odd factors of `m1` with larger variable index.
                let mut inversions = 0usize;
                for &i in &odd_vars {
                    if m2[i] == 0 {
                        continue;
                    }
                    if m1[i] == 1 {
                        continue 'terms2; // odd square
                    }
                    inversions += odds1.iter().filter(|&&j| j > i).count();
                }
                let exps: Vec<u32> =
                    m1.iter().zip(m2.iter()).map(|(a, b)| a + b).collect();
                let mut c = c1 * c2;
                if inversions % 2 == 1 {
                    c = -c;
                }
                out.add_term(exps, c);
            }
        }
        Ok(out)
    }

    /// Raises to a nonnegative integer power.
    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(&self.ring);
        for _ in 0..n {
            out = out.checked_mul(self).expect("same ring");
        }
        out
    }

    /// Left partial derivative with respect to variable `i`: for odd
    /// variables the derivative is moved in from the left, so
    /// `∂_ξ(ξ·m) = m` and signs come from the odd factors preceding `ξ`.
    pub fn partial_derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.ring);
        for (m, c) in &self.terms {
            if m[i] == 0 {
                continue;
            }
            let mut exps = m.clone();
            exps[i] -= 1;
            let mut coeff = c * Q::from_integer(m[i].into());
            if self.ring.var(i).parity.is_odd() {
                let jumps = (0..i)
                    .filter(|&j| self.ring.var(j).parity.is_odd() && m[j] == 1)
                    .count();
                if jumps % 2 == 1 {
                    coeff = -coeff;
                }
            }
            out.add_term(exps, coeff);
        }
        out
    }

    /// Parity of the polynomial if all terms agree; `None` for mixed parity.
    /// The zero polynomial counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let mut result: Option<Parity> = None;
        for m in self.terms.keys() {
            let p = self.monomial_parity(m);
            match result {
                None => result = Some(p),
                Some(prev) if prev == p => {}
                Some(_) => return None,
            }
        }
        Some(result.unwrap_or(Parity::Even))
    }

    fn monomial_parity(&self, m: &[u32]) -> Parity {
        let n = m
            .iter()
            .enumerate()
            .filter(|(i, e)| self.ring.var(*i).parity.is_odd() && **e == 1)
            .count() as u64;
        Parity::from_count(n)
    }

    /// Inner degree if homogeneous (`Some(0)` for zero), else `None`.
    pub fn inner_degree(&self) -> Option<i64> {
        self.homogeneous_degree(|v| v.inner)
    }

    /// Bidegree if homogeneous.
    pub fn bidegree(&self) -> Option<(i64, i64)> {
        let a = self.homogeneous_degree(|v| v.bidegree.0)?;
        let b = self.homogeneous_degree(|v| v.bidegree.1)?;
        Some((a, b))
    }

    pub fn coh_degree(&self) -> Option<i64> {
        self.homogeneous_degree(|v| v.coh_degree())
    }

    fn homogeneous_degree(&self, weight: impl Fn(&VariableSpec) -> i64) -> Option<i64> {
        let mut result: Option<i64> = None;
        for m in self.terms.keys() {
            let d: i64 = m
                .iter()
                .enumerate()
                .map(|(i, &e)| weight(self.ring.var(i)) * e as i64)
                .sum();
            match result {
                None => result = Some(d),
                Some(prev) if prev == d => {}
                Some(_) => return None,
            }
        }
        Some(result.unwrap_or(0))
    }

    /// The terms of inner degree exactly `d`.
    pub fn inner_component(&self, d: i64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| {
                let deg: i64 = m
                    .iter()
                    .enumerate()
                    .map(|(i, &e)| self.ring.var(i).inner * e as i64)
                    .sum();
                deg == d
            })
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        SuperPolynomial { ring: self.ring.clone(), terms }
    }
}

impl std::ops::Add for &SuperPolynomial {
    type Output = SuperPolynomial;
    fn add(self, other: &SuperPolynomial) -> SuperPolynomial {
        self.checked_add(other).expect("ring mismatch")
    }
}

impl std::ops::Sub for &SuperPolynomial {
    type Output = SuperPolynomial;
    fn sub(self, other: &SuperPolynomial) -> SuperPolynomial {
        self.checked_add(&other.neg()).expect("ring mismatch")
    }
}

impl std::ops::Mul for &SuperPolynomial {
    type Output = SuperPolynomial;
    fn mul(self, other: &SuperPolynomial) -> SuperPolynomial {
        self.checked_mul(other).expect("ring mismatch")
    }
}

impl SuperPolynomial {
    pub fn neg(&self) -> Self {
        SuperPolynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl fmt::Display for SuperPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.iter().all(|&e| e == 0) {
                if abs.denom().is_one() {
                    factors.push(format!("{}", abs.numer()));
                } else {
                    factors.push(format!("{}/{}", abs.numer(), abs.denom()));
                }
            }
            for (i, &e) in m.iter().enumerate() {
                if e == 1 {
                    factors.push(self.ring.var(i).name.clone());
                } else if e > 1 {
                    factors.push(format!("{}^{}", self.ring.var(i).name, e));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// An algebra homomorphism given by generator images.
#[derive(Clone, Debug)]
pub struct Substitution {
    source: Arc<RingSpec>,
    target: Arc<RingSpec>,
    images: Vec<SuperPolynomial>,
}

impl Substitution {
    /// Validates that each image is homogeneous of its variable's parity,
    /// inner degree and bidegree (zero images are exempt from the degree
    /// checks but must still be "odd-capable", i.e. zero is fine).
    pub fn new(
        source: &Arc<RingSpec>,
        target: &Arc<RingSpec>,
        images: Vec<SuperPolynomial>,
    ) -> Result<Self, AlgebraError> {
        assert_eq!(images.len(), source.len(), "one image per source variable");
        for (i, img) in images.iter().enumerate() {
            if **img.ring() != **target {
                return Err(AlgebraError::RingMismatch);
            }
            let v = source.var(i);
            if img.is_zero() {
                continue;
            }
            if img.parity() != Some(v.parity) {
                return Err(AlgebraError::BadImage {
                    name: v.name.clone(),
                    reason: "is not homogeneous of the variable's parity".into(),
                });
            }
            if img.inner_degree() != Some(v.inner) {
                return Err(AlgebraError::BadImage {
                    name: v.name.clone(),
                    reason: "does not preserve the inner degree".into(),
                });
            }
            if img.bidegree() != Some(v.bidegree) {
                return Err(AlgebraError::BadImage {
                    name: v.name.clone(),
                    reason: "does not preserve the cohomological bidegree".into(),
                });
            }
        }
        Ok(Substitution { source: source.clone(), target: target.clone(), images })
    }

    /// The identity substitution of a ring.
    pub fn identity(ring: &Arc<RingSpec>) -> Self {
        let images = (0..ring.len())
            .map(|i| SuperPolynomial::variable(ring, i))
            .collect();
        Substitution { source: ring.clone(), target: ring.clone(), images }
    }

    pub fn image(&self, i: usize) -> &SuperPolynomial {
        &self.images[i]
    }

    pub fn source(&self) -> &Arc<RingSpec> {
        &self.source
    }

    pub fn target(&self) -> &Arc<RingSpec> {
        &self.target
    }

    /// Applies the homomorphism.
    pub fn apply(&self, p: &SuperPolynomial) -> Result<SuperPolynomial, AlgebraError> {
        if **p.ring() != *self.source {
            return Err(AlgebraError::RingMismatch);
        }
        let mut out = SuperPolynomial::zero(&self.target);
        for (m, c) in &p.terms {
            let mut acc = SuperPolynomial::constant(&self.target, c.clone());
            for (i, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    acc = acc.checked_mul(&self.images[i])?;
                    if acc.is_zero() {
                        break;
                    }
                }
            }
            out = out.checked_add(&acc)?;
        }
        Ok(out)
    }

    /// Composition `other ∘ self` (apply `self` first).
    pub fn then(&self, other: &Substitution) -> Result<Substitution, AlgebraError> {
        if *self.target != *other.source {
            return Err(AlgebraError::RingMismatch);
        }
        let images = self
            .images
            .iter()
            .map(|img| other.apply(img))
            .collect::<Result<Vec<_>, _>>()?;
        Substitution::new(&self.source, &other.target, images)
    }
}

/// A super-derivation of a ring, determined by generator images and a parity.
#[derive(Clone, Debug)]
pub struct Derivation {
    ring: Arc<RingSpec>,
    images: Vec<SuperPolynomial>,
    parity: Parity,
}

impl Derivation {
    pub fn new(
        ring: &Arc<RingSpec>,
        images: Vec<SuperPolynomial>,
        parity: Parity,
    ) -> Result<Self, AlgebraError> {
        assert_eq!(images.len(), ring.len(), "one image per variable");
        for (i, img) in images.iter().enumerate() {
            if **img.ring() != **ring {
                return Err(AlgebraError::RingMismatch);
            }
            if img.is_zero() {
                continue;
            }
            let expected = match parity {
                Parity::Even => ring.var(i).parity,
                Parity::Odd => ring.var(i).parity.flip(),
            };
            if img.parity() != Some(expected) {
                return Err(AlgebraError::BadImage {
                    name: ring.var(i).name.clone(),
                    reason: "parity inconsistent with the derivation's parity".into(),
                });
            }
        }
        Ok(Derivation { ring: ring.clone(), images, parity })
    }

    /// The partial derivative `∂/∂(variable i)` scaled by `coeff`.
    pub fn partial(ring: &Arc<RingSpec>, i: usize, coeff: SuperPolynomial) -> Result<Self, AlgebraError> {
        let parity = match (ring.var(i).parity, coeff.parity()) {
            (p, Some(Parity::Even)) => p,
            (p, Some(Parity::Odd)) => p.flip(),
            (p, None) => p, // mixed coefficient: caller beware; used with homogeneous coeffs
        };
        let images = (0..ring.len())
            .map(|j| if j == i { coeff.clone() } else { SuperPolynomial::zero(ring) })
            .collect();
        Derivation::new(ring, images, parity)
    }

    pub fn ring(&self) -> &Arc<RingSpec> {
        &self.ring
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn image(&self, i: usize) -> &SuperPolynomial {
        &self.images[i]
    }

    /// Super-Leibniz extension of the generator images.
    pub fn apply(&self, p: &SuperPolynomial) -> Result<SuperPolynomial, AlgebraError> {
        if **p.ring() != *self.ring {
            return Err(AlgebraError::RingMismatch);
        }
        let mut out = SuperPolynomial::zero(&self.ring);
        for (m, c) in &p.terms {
            for i in 0..self.ring.len() {
                if m[i] == 0 || self.images[i].is_zero() {
                    continue;
                }
                // m = A · v^e · B with v the i-th variable; the contribution
                // is ±A·(e·v^{e−1}·d(v))·B, the sign from moving d past A.
                let mut sign_flips = 0usize;
                if self.parity.is_odd() {
                    sign_flips = (0..i)
                        .filter(|&j| self.ring.var(j).parity.is_odd() && m[j] == 1)
                        .count();
                }
                let mut prefix = vec![0u32; self.ring.len()];
                prefix[..i].copy_from_slice(&m[..i]);
                prefix[i] = m[i] - 1;
                let mut suffix = vec![0u32; self.ring.len()];
                suffix[(i + 1)..].copy_from_slice(&m[(i + 1)..]);

                let mut coeff = c * Q::from_integer(m[i].into());
                if sign_flips % 2 == 1 {
                    coeff = -coeff;
                }
                let prefix_poly =
                    SuperPolynomial::monomial(&self.ring, prefix, coeff).expect("valid");
                let suffix_poly =
                    SuperPolynomial::monomial(&self.ring, suffix, Q::one()).expect("valid");
                let term = prefix_poly
                    .checked_mul(&self.images[i])?
                    .checked_mul(&suffix_poly)?;
                out = out.checked_add(&term)?;
            }
        }
        Ok(out)
    }

    /// For an odd derivation, whether `d² = 0`; checking the generators
    /// suffices because `d²` is again a derivation.
    pub fn is_square_zero(&self) -> Result<bool, AlgebraError> {
        for img in &self.images {
            if !self.apply(img)?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// All monomials of the given inner degree, in canonical (ascending
/// exponent-vector) order. Requires a positively graded ring.
pub fn monomials_of_inner_degree(
    ring: &Arc<RingSpec>,
    degree: i64,
) -> Result<Vec<Vec<u32>>, AlgebraError> {
    ring.require_graded()?;
    let mut out = Vec::new();
    if degree < 0 {
        return Ok(out);
    }
    let mut current = vec![0u32; ring.len()];
    enumerate_rec(ring, 0, degree, &mut current, &mut out);
    Ok(out)
}

fn enumerate_rec(
    ring: &Arc<RingSpec>,
    i: usize,
    remaining: i64,
    current: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if i == ring.len() {
        if remaining == 0 {
            out.push(current.clone());
        }
        return;
    }
    let v = ring.var(i);
    let max_e = if v.parity.is_odd() {
        1.min(remaining / v.inner) as u32
    } else {
        (remaining / v.inner) as u32
    };
    for e in 0..=max_e {
        current[i] = e;
        enumerate_rec(ring, i + 1, remaining - v.inner * e as i64, current, out);
    }
    current[i] = 0;
}

/// Errors of the polynomial layer.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("operands live in different rings")]
    RingMismatch,
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },
    #[error("odd variable `{0}` squared")]
    OddSquare(String),
    #[error("image of `{name}` {reason}")]
    BadImage { name: String, reason: String },
    #[error("ring is not positively graded (variable `{0}` has inner degree 0)")]
    UngradedRing(String),
}
