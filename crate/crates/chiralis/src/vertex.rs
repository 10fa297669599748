//! Free-field vertex algebra engine over conjugate generator pairs.
//!
//! A [`VertexAlgebraSpec`] lists pairs `(u, ∂_u)` of a function-type
//! generator and its conjugate derivation-type generator: both carry the
//! parity of `u`, the conjugate carries minus its inner degree and bidegree,
//! and their conformal weights are 0 and 1. States are finite rational
//! combinations of monomials in the divided-power jet symbols
//! `u^{(k)} = u_{(−k−1)}1` (so `(x)_{(−n−1)}P = x^{(n)}·P` holds verbatim
//! and `T(u^{(k)}) = (k+1)·u^{(k+1)}`), with the empty monomial as vacuum.
//!
//! Modes act exactly: creation modes (`m ≤ −1`) multiply by the matching jet
//! symbol with the Koszul sign of the insertion; annihilation modes
//! (`m ≥ 0`) are super-derivations contracting against the conjugate
//! symbols, vanishing on the vacuum. General n-th products are computed by
//! the normally ordered reconstruction: the field of `u^{(k)}·a′` is the
//! normally ordered product of `∂^{(k)}u(z)` with the field of `a′`, giving
//! a recursion whose mode sums are finite because weights are bounded below
//! and contractions are bounded by the jets present in the right factor.
//!
//! Every state checks the conformal-weight window at creation time; window
//! overflow is a hard error, never a silent truncation. Inner degree is
//! conserved by every mode action, so the inner bound of the window only
//! governs basis enumeration.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::linalg::Q;
use crate::superpoly::Parity;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VertexError {
    #[error("state of conformal weight {weight} exceeds the window (max {max})")]
    WindowOverflow { weight: i64, max: i64 },
    #[error("requested degrees (weight {weight}, inner {inner}) are outside the window")]
    OutOfWindow { weight: i64, inner: i64 },
    #[error("states live over different vertex algebra specs")]
    SpecMismatch,
    #[error("odd mode symbol has exponent > 1")]
    OddExponent,
    #[error("monomial is not sorted with positive exponents")]
    NotCanonical,
    #[error("generator pair index {0} out of range")]
    BadPair(usize),
    #[error("window bounds must be nonnegative")]
    BadWindow,
    #[error("duplicate generator name {0}")]
    DuplicateName(String),
    #[error("basis enumeration requires positive inner degree on {0}")]
    UngradedSpec(String),
}

/// A conjugate pair: the function-type generator `u` with its gradings; the
/// conjugate `∂_u` has the same parity, negated inner degree and bidegree,
/// and conformal weight 1 instead of 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorPair {
    pub function_name: String,
    pub parity: Parity,
    pub bidegree: (i64, i64),
    pub inner: i64,
}

impl GeneratorPair {
    pub fn new(name: &str, parity: Parity, bidegree: (i64, i64), inner: i64) -> Self {
        GeneratorPair {
            function_name: name.to_string(),
            parity,
            bidegree,
            inner,
        }
    }

    pub fn conjugate_name(&self) -> String {
        format!("D{}", self.function_name)
    }
}

/// Which member of a pair a symbol or mode refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Role {
    Function,
    Conjugate,
}

impl Role {
    pub fn conjugate(self) -> Role {
        match self {
            Role::Function => Role::Conjugate,
            Role::Conjugate => Role::Function,
        }
    }
}

/// The jet symbol `u^{(jet)}` (role Function) or `∂_u^{(jet)}` (role
/// Conjugate) of generator pair `pair`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModeSymbol {
    pub pair: usize,
    pub role: Role,
    pub jet: u32,
}

/// Truncation window: states may not exceed `max_weight`; `max_inner` only
/// bounds basis enumeration (inner degree is conserved by all products).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub max_weight: i64,
    pub max_inner: i64,
}

/// A free-field vertex algebra: generator pairs plus the truncation window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexAlgebraSpec {
    pairs: Vec<GeneratorPair>,
    window: Window,
}

impl VertexAlgebraSpec {
    pub fn new(
        pairs: Vec<GeneratorPair>,
        window: Window,
    ) -> Result<Arc<Self>, VertexError> {
        if window.max_weight < 0 || window.max_inner < 0 {
            return Err(VertexError::BadWindow);
        }
        let mut seen = std::collections::BTreeSet::new();
        for p in &pairs {
            if !seen.insert(p.function_name.clone()) {
                return Err(VertexError::DuplicateName(p.function_name.clone()));
            }
        }
        Ok(Arc::new(VertexAlgebraSpec { pairs, window }))
    }

    pub fn pairs(&self) -> &[GeneratorPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pair(&self, i: usize) -> &GeneratorPair {
        &self.pairs[i]
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn symbol_parity(&self, s: &ModeSymbol) -> Parity {
        self.pairs[s.pair].parity
    }

    /// Conformal weight `wt(u) + jet` with `wt = 0` for functions, 1 for
    /// conjugates.
    pub fn symbol_weight(&self, s: &ModeSymbol) -> i64 {
        let base = match s.role {
            Role::Function => 0,
            Role::Conjugate => 1,
        };
        base + s.jet as i64
    }

    pub fn symbol_inner(&self, s: &ModeSymbol) -> i64 {
        match s.role {
            Role::Function => self.pairs[s.pair].inner,
            Role::Conjugate => -self.pairs[s.pair].inner,
        }
    }

    pub fn symbol_bidegree(&self, s: &ModeSymbol) -> (i64, i64) {
        let (a, b) = self.pairs[s.pair].bidegree;
        match s.role {
            Role::Function => (a, b),
            Role::Conjugate => (-a, -b),
        }
    }

    pub fn symbol_coh(&self, s: &ModeSymbol) -> i64 {
        let (a, b) = self.symbol_bidegree(s);
        a + b
    }

    pub fn symbol_name(&self, s: &ModeSymbol) -> String {
        let base = match s.role {
            Role::Function => self.pairs[s.pair].function_name.clone(),
            Role::Conjugate => self.pairs[s.pair].conjugate_name(),
        };
        format!("{base}({})", s.jet)
    }

    pub fn monomial_weight(&self, m: &FockMonomial) -> i64 {
        m.iter()
            .map(|(s, e)| self.symbol_weight(s) * *e as i64)
            .sum()
    }

    pub fn monomial_inner(&self, m: &FockMonomial) -> i64 {
        m.iter().map(|(s, e)| self.symbol_inner(s) * *e as i64).sum()
    }

    pub fn monomial_bidegree(&self, m: &FockMonomial) -> (i64, i64) {
        m.iter().fold((0, 0), |(a, b), (s, e)| {
            let (c, d) = self.symbol_bidegree(s);
            (a + c * *e as i64, b + d * *e as i64)
        })
    }

    pub fn monomial_coh(&self, m: &FockMonomial) -> i64 {
        let (a, b) = self.monomial_bidegree(m);
        a + b
    }

    pub fn monomial_parity(&self, m: &FockMonomial) -> Parity {
        let count: u64 = m
            .iter()
            .filter(|(s, _)| self.symbol_parity(s) == Parity::Odd)
            .map(|(_, e)| *e as u64)
            .sum();
        Parity::from_count(count)
    }
}

/// A sorted exponent list of mode symbols; the empty list is the vacuum.
pub type FockMonomial = Vec<(ModeSymbol, u32)>;

/// A finite rational combination of Fock monomials over a common spec.
#[derive(Clone, Debug)]
pub struct FockState {
    spec: Arc<VertexAlgebraSpec>,
    terms: BTreeMap<FockMonomial, Q>,
}

impl PartialEq for FockState {
    fn eq(&self, other: &Self) -> bool {
        *self.spec == *other.spec && self.terms == other.terms
    }
}

impl Eq for FockState {}

impl FockState {
    pub fn zero(spec: &Arc<VertexAlgebraSpec>) -> Self {
        FockState { spec: spec.clone(), terms: BTreeMap::new() }
    }

    pub fn vacuum(spec: &Arc<VertexAlgebraSpec>) -> Self {
        let mut s = Self::zero(spec);
        s.add_term(Vec::new(), Q::one());
        s
    }

    /// A single monomial state; the monomial must be sorted with positive
    /// exponents, odd exponents at most one, and fit the weight window.
    pub fn monomial(
        spec: &Arc<VertexAlgebraSpec>,
        monomial: FockMonomial,
        coeff: Q,
    ) -> Result<Self, VertexError> {
        for (s, e) in &monomial {
            if s.pair >= spec.len() {
                return Err(VertexError::BadPair(s.pair));
            }
            if *e == 0 {
                return Err(VertexError::NotCanonical);
            }
            if spec.symbol_parity(s) == Parity::Odd && *e > 1 {
                return Err(VertexError::OddExponent);
            }
        }
        if monomial.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(VertexError::NotCanonical);
        }
        let weight = spec.monomial_weight(&monomial);
        if weight > spec.window().max_weight {
            return Err(VertexError::WindowOverflow {
                weight,
                max: spec.window().max_weight,
            });
        }
        let mut s = Self::zero(spec);
        s.add_term(monomial, coeff);
        Ok(s)
    }

    /// The generator state `u^{(0)}` or `∂_u^{(0)}`.
    pub fn generator(
        spec: &Arc<VertexAlgebraSpec>,
        pair: usize,
        role: Role,
    ) -> Result<Self, VertexError> {
        Self::jet(spec, pair, role, 0)
    }

    /// The jet state `u^{(k)}`.
    pub fn jet(
        spec: &Arc<VertexAlgebraSpec>,
        pair: usize,
        role: Role,
        jet: u32,
    ) -> Result<Self, VertexError> {
        Self::monomial(spec, vec![(ModeSymbol { pair, role, jet }, 1)], Q::one())
    }

    pub fn spec(&self) -> &Arc<VertexAlgebraSpec> {
        &self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockMonomial, &Q)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &FockMonomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    fn add_term(&mut self, m: FockMonomial, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
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
            return Self::zero(&self.spec);
        }
        FockState {
            spec: self.spec.clone(),
            terms: self.terms.iter().map(|(m, q)| (m.clone(), q * c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, VertexError> {
        if *self.spec != *other.spec {
            return Err(VertexError::SpecMismatch);
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    /// Conformal weight if every term agrees; zero counts as weight 0.
    pub fn weight(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| self.spec.monomial_weight(m));
        match it.next() {
            None => Some(0),
            Some(w) => it.all(|v| v == w).then_some(w),
        }
    }

    /// The largest conformal weight among the terms (0 for the zero state).
    pub fn max_weight(&self) -> i64 {
        self.terms
            .keys()
            .map(|m| self.spec.monomial_weight(m))
            .max()
            .unwrap_or(0)
    }

    pub fn inner_degree(&self) -> Option<i64> {
        let mut it = self.terms.keys().map(|m| self.spec.monomial_inner(m));
        match it.next() {
            None => Some(0),
            Some(d) => it.all(|v| v == d).then_some(d),
        }
    }

    pub fn bidegree(&self) -> Option<(i64, i64)> {
        let mut it = self.terms.keys().map(|m| self.spec.monomial_bidegree(m));
        match it.next() {
            None => Some((0, 0)),
            Some(d) => it.all(|v| v == d).then_some(d),
        }
    }

    pub fn coh_degree(&self) -> Option<i64> {
        self.bidegree().map(|(a, b)| a + b)
    }

    pub fn parity(&self) -> Option<Parity> {
        let mut it = self.terms.keys().map(|m| self.spec.monomial_parity(m));
        match it.next() {
            None => Some(Parity::Even),
            Some(p) => it.all(|q| q == p).then_some(p),
        }
    }

    /// The terms of exact conformal weight `w`.
    pub fn weight_component(&self, w: i64) -> Self {
        FockState {
            spec: self.spec.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| self.spec.monomial_weight(m) == w)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }
}

impl std::ops::Add for &FockState {
    type Output = FockState;
    fn add(self, rhs: &FockState) -> FockState {
        self.checked_add(rhs).expect("spec mismatch")
    }
}

impl std::ops::Sub for &FockState {
    type Output = FockState;
    fn sub(self, rhs: &FockState) -> FockState {
        self + &rhs.neg()
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let mut factors = Vec::new();
            for (s, e) in m {
                if *e == 1 {
                    factors.push(self.spec.symbol_name(s));
                } else {
                    factors.push(format!("{}^{}", self.spec.symbol_name(s), e));
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

/// Inserts one factor of `sym` into a sorted monomial, returning the Koszul
/// sign of moving it past the earlier symbols; `None` kills an odd square.
fn multiply_symbol(
    spec: &VertexAlgebraSpec,
    monomial: &FockMonomial,
    sym: ModeSymbol,
) -> Option<(i64, FockMonomial)> {
    let odd = spec.symbol_parity(&sym) == Parity::Odd;
    let mut sign = 1i64;
    let mut out = Vec::with_capacity(monomial.len() + 1);
    let mut placed = false;
    for (s, e) in monomial {
        if !placed {
            if *s < sym {
                if odd && spec.symbol_parity(s) == Parity::Odd {
                    sign = -sign;
                }
                out.push((*s, *e));
                continue;
            }
            if *s == sym {
                if odd {
                    return None;
                }
                out.push((*s, e + 1));
            } else {
                out.push((sym, 1));
                out.push((*s, *e));
            }
            placed = true;
            continue;
        }
        out.push((*s, *e));
    }
    if !placed {
        out.push((sym, 1));
    }
    Some((sign, out))
}

/// Applies the mode `u_{(m)}` (or `(∂_u)_{(m)}`) of a generator to a state.
/// Creation modes (`m ≤ −1`) multiply by the jet symbol `u^{(−m−1)}`;
/// annihilation modes (`m ≥ 0`) contract against the conjugate symbols of
/// jet exactly `m`: conjugate modes contract function symbols with
/// coefficient `+1`, function modes contract conjugate symbols with `+1`
/// for odd pairs and `−1` for even pairs.
pub fn apply_mode(
    pair: usize,
    role: Role,
    m: i64,
    state: &FockState,
) -> Result<FockState, VertexError> {
    let spec = state.spec().clone();
    if pair >= spec.len() {
        return Err(VertexError::BadPair(pair));
    }
    let mut out = FockState::zero(&spec);
    if m <= -1 {
        let sym = ModeSymbol { pair, role, jet: (-m - 1) as u32 };
        let extra = spec.symbol_weight(&sym);
        for (mono, c) in state.terms() {
            let Some((sign, new_mono)) = multiply_symbol(&spec, mono, sym) else {
                continue;
            };
            let weight = spec.monomial_weight(mono) + extra;
            if weight > spec.window().max_weight {
                return Err(VertexError::WindowOverflow {
                    weight,
                    max: spec.window().max_weight,
                });
            }
            out.add_term(new_mono, c * Q::from_integer(sign.into()));
        }
        return Ok(out);
    }
    // Annihilation: super-derivation pairing against the conjugate role.
    let target = ModeSymbol { pair, role: role.conjugate(), jet: m as u32 };
    let mode_odd = spec.pair(pair).parity == Parity::Odd;
    let base: Q = match role {
        Role::Conjugate => Q::one(),
        Role::Function => {
            if mode_odd {
                Q::one()
            } else {
                -Q::one()
            }
        }
    };
    for (mono, c) in state.terms() {
        let mut prefix_odd = 0u64;
        for (i, (s, e)) in mono.iter().enumerate() {
            if *s == target {
                let sign = if mode_odd && prefix_odd % 2 == 1 { -Q::one() } else { Q::one() };
                let mut new_mono = mono.clone();
                if *e == 1 {
                    new_mono.remove(i);
                } else {
                    new_mono[i].1 -= 1;
                }
                let coeff = c * &base * sign * Q::from_integer((*e).into());
                out.add_term(new_mono, coeff);
                break; // symbols are unique within a sorted monomial
            }
            if spec.symbol_parity(s) == Parity::Odd {
                prefix_odd += *e as u64;
            }
        }
    }
    Ok(out)
}

fn generalized_binomial(m: i64, k: u32) -> Q {
    let mut num = BigInt::one();
    for t in 0..k as i64 {
        num *= m - t;
    }
    let mut den = BigInt::one();
    for t in 2..=k as i64 {
        den *= t;
    }
    Q::new(num, den)
}

/// The mode of a jet field: `(u^{(k)})_{(m)} = (−1)^k · C(m, k) · u_{(m−k)}`.
fn apply_jet_mode(
    sym: ModeSymbol,
    m: i64,
    state: &FockState,
) -> Result<FockState, VertexError> {
    let k = sym.jet;
    let c = generalized_binomial(m, k);
    if c.is_zero() {
        return Ok(FockState::zero(state.spec()));
    }
    let applied = apply_mode(sym.pair, sym.role, m - k as i64, state)?;
    let sign = if k % 2 == 0 { c } else { -c };
    Ok(applied.scale(&sign))
}

/// The n-th product `a_{(n)} b`, computed by normally ordered reconstruction:
/// `1_{(n)} = δ_{n,−1}·Id`, and for `a = s·a′` with `s` the leading jet
/// symbol, the creation half of the field of `s` is applied outside the
/// recursion and the annihilation half is pushed through with the super-sign
/// of `a′`. Both mode sums are finite: the creation sum because weights of
/// states are bounded below by zero, the annihilation sum because
/// contractions are bounded by the conjugate jets present in `b`.
pub fn nth_product(a: &FockState, b: &FockState, n: i64) -> Result<FockState, VertexError> {
    if *a.spec() != *b.spec() {
        return Err(VertexError::SpecMismatch);
    }
    let spec = a.spec().clone();
    let mut out = FockState::zero(&spec);
    for (mono, c) in a.terms() {
        let contribution = monomial_product(&spec, mono, b, n)?;
        out = out.checked_add(&contribution.scale(c))?;
    }
    Ok(out)
}

fn monomial_product(
    spec: &Arc<VertexAlgebraSpec>,
    mono: &FockMonomial,
    b: &FockState,
    n: i64,
) -> Result<FockState, VertexError> {
    if mono.is_empty() {
        // Vacuum: 1_{(n)} = δ_{n,−1} Id.
        return Ok(if n == -1 { b.clone() } else { FockState::zero(spec) });
    }
    let (sym, exp) = mono[0];
    let mut rest = mono.to_vec();
    if exp == 1 {
        rest.remove(0);
    } else {
        rest[0].1 -= 1;
    }
    let rest_weight = spec.monomial_weight(&rest);
    let rest_parity = spec.monomial_parity(&rest);
    let sym_odd = spec.symbol_parity(&sym) == Parity::Odd;

    let mut out = FockState::zero(spec);

    // Creation half: Σ_{m ≤ −1} A_{(m)} (a′_{(n−m−1)} b).
    let m_low = n - rest_weight - b.max_weight();
    for m in m_low..=-1 {
        let inner = monomial_product(spec, &rest, b, n - m - 1)?;
        if inner.is_zero() {
            continue;
        }
        let outer = apply_jet_mode(sym, m, &inner)?;
        out = out.checked_add(&outer)?;
    }

    // Annihilation half: (−1)^{|u||a′|} Σ_{m ≥ 0} a′_{(n−m−1)} (A_{(m)} b).
    let target_role = sym.role.conjugate();
    let max_jet = b
        .terms()
        .flat_map(|(m, _)| m.iter())
        .filter(|(s, _)| s.pair == sym.pair && s.role == target_role)
        .map(|(s, _)| s.jet)
        .max();
    if let Some(max_jet) = max_jet {
        let sign = if sym_odd && rest_parity == Parity::Odd {
            -Q::one()
        } else {
            Q::one()
        };
        for m in sym.jet as i64..=(sym.jet + max_jet) as i64 {
            let contracted = apply_jet_mode(sym, m, b)?;
            if contracted.is_zero() {
                continue;
            }
            let inner = monomial_product(spec, &rest, &contracted, n - m - 1)?;
            out = out.checked_add(&inner.scale(&sign))?;
        }
    }
    Ok(out)
}

/// The translation operator: the even derivation with
/// `T(u^{(k)}) = (k+1)·u^{(k+1)}` and `T(1) = 0`.
pub fn translation(state: &FockState) -> Result<FockState, VertexError> {
    let spec = state.spec().clone();
    let mut out = FockState::zero(&spec);
    for (mono, c) in state.terms() {
        let weight = spec.monomial_weight(mono) + 1;
        for (i, (s, e)) in mono.iter().enumerate() {
            let raised = ModeSymbol { pair: s.pair, role: s.role, jet: s.jet + 1 };
            // Remove one factor of s, insert one factor of the raised jet;
            // T is even, so the extraction and insertion signs cancel.
            let mut reduced = mono.clone();
            if *e == 1 {
                reduced.remove(i);
            } else {
                reduced[i].1 -= 1;
            }
            let Some((sign, new_mono)) = multiply_symbol(&spec, &reduced, raised) else {
                continue;
            };
            if weight > spec.window().max_weight {
                return Err(VertexError::WindowOverflow {
                    weight,
                    max: spec.window().max_weight,
                });
            }
            let removal_sign = removal_parity_sign(&spec, mono, i);
            let coeff = c
                * Q::from_integer(((*e as i64) * (s.jet as i64 + 1)).into())
                * Q::from_integer((sign * removal_sign).into());
            out.add_term(new_mono, coeff);
        }
    }
    Ok(out)
}

/// Sign of extracting the factor at position `i` to the front of the
/// monomial (for odd symbols: past the odd prefix).
fn removal_parity_sign(spec: &VertexAlgebraSpec, mono: &FockMonomial, i: usize) -> i64 {
    if spec.symbol_parity(&mono[i].0) == Parity::Even {
        return 1;
    }
    let odd_prefix: u64 = mono[..i]
        .iter()
        .filter(|(s, _)| spec.symbol_parity(s) == Parity::Odd)
        .map(|(_, e)| *e as u64)
        .sum();
    if odd_prefix % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The operator `v ↦ a_{(0)} v`; a super-derivation of all n-th products.
#[derive(Clone, Debug)]
pub struct ZeroModeDerivation {
    state: FockState,
}

impl ZeroModeDerivation {
    pub fn state(&self) -> &FockState {
        &self.state
    }

    pub fn apply(&self, v: &FockState) -> Result<FockState, VertexError> {
        nth_product(&self.state, v, 0)
    }
}

pub fn zero_mode_derivation(a: &FockState) -> ZeroModeDerivation {
    ZeroModeDerivation { state: a.clone() }
}

/// Enumerates, in canonical order, the basis monomials of exact conformal
/// weight `w` and inner degree `d`. Positive-weight symbols are enumerated
/// first (finitely many since every symbol has weight ≥ 0 and weight-0
/// symbols are excluded), then the weight-0 slot is filled with function
/// jets of order zero carrying the remaining inner degree, which requires
/// every function generator to have positive inner degree.
pub fn weight_inner_basis(
    spec: &Arc<VertexAlgebraSpec>,
    w: i64,
    d: i64,
) -> Result<Vec<FockMonomial>, VertexError> {
    if w > spec.window().max_weight || d.abs() > spec.window().max_inner {
        return Err(VertexError::OutOfWindow { weight: w, inner: d });
    }
    if w < 0 {
        return Ok(Vec::new());
    }
    for p in spec.pairs() {
        if p.inner <= 0 {
            return Err(VertexError::UngradedSpec(p.function_name.clone()));
        }
    }
    // All symbols of weight 1..=w, in canonical symbol order.
    let mut positive: Vec<ModeSymbol> = Vec::new();
    for pair in 0..spec.len() {
        for v in 1..=w {
            positive.push(ModeSymbol { pair, role: Role::Function, jet: v as u32 });
            positive.push(ModeSymbol { pair, role: Role::Conjugate, jet: (v - 1) as u32 });
        }
    }
    positive.sort_unstable();

    let mut out: Vec<FockMonomial> = Vec::new();
    let mut prefix: FockMonomial = Vec::new();
    enumerate_positive(spec, &positive, 0, w, &mut prefix, &mut out, d);
    out.sort();
    Ok(out)
}

fn enumerate_positive(
    spec: &Arc<VertexAlgebraSpec>,
    symbols: &[ModeSymbol],
    start: usize,
    remaining_weight: i64,
    prefix: &mut FockMonomial,
    out: &mut Vec<FockMonomial>,
    inner_target: i64,
) {
    if remaining_weight == 0 {
        // Fill the weight-0 slot with function jets of order zero.
        let d0 = inner_target - spec.monomial_inner(prefix);
        let zero_symbols: Vec<ModeSymbol> = (0..spec.len())
            .map(|pair| ModeSymbol { pair, role: Role::Function, jet: 0 })
            .collect();
        let mut exps: Vec<u32> = Vec::new();
        enumerate_zero_weight(spec, &zero_symbols, 0, d0, &mut exps, prefix, out);
        return;
    }
    if start == symbols.len() {
        return;
    }
    let sym = symbols[start];
    let wt = spec.symbol_weight(&sym);
    let max_exp = if spec.symbol_parity(&sym) == Parity::Odd {
        1.min(remaining_weight / wt)
    } else {
        remaining_weight / wt
    };
    for e in (0..=max_exp).rev() {
        if e > 0 {
            prefix.push((sym, e as u32));
        }
        enumerate_positive(
            spec,
            symbols,
            start + 1,
            remaining_weight - e * wt,
            prefix,
            out,
            inner_target,
        );
        if e > 0 {
            prefix.pop();
        }
    }
}

fn enumerate_zero_weight(
    spec: &Arc<VertexAlgebraSpec>,
    symbols: &[ModeSymbol],
    start: usize,
    remaining_inner: i64,
    exps: &mut Vec<u32>,
    prefix: &FockMonomial,
    out: &mut Vec<FockMonomial>,
) {
    if start == symbols.len() {
        if remaining_inner == 0 {
            let mut mono: FockMonomial = prefix.clone();
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    mono.push((symbols[i], e));
                }
            }
            mono.sort_by(|a, b| a.0.cmp(&b.0));
            out.push(mono);
        }
        return;
    }
    if remaining_inner < 0 {
        return;
    }
    let sym = symbols[start];
    let inner = spec.symbol_inner(&sym);
    let mut max_exp = remaining_inner / inner;
    if spec.symbol_parity(&sym) == Parity::Odd {
        max_exp = max_exp.min(1);
    }
    for e in 0..=max_exp {
        exps.push(e as u32);
        enumerate_zero_weight(
            spec,
            symbols,
            start + 1,
            remaining_inner - e * inner,
            exps,
            prefix,
            out,
        );
        exps.pop();
    }
}

/// The basis monomials of exact tri-degree (weight, inner, cohomological).
pub fn bigraded_basis(
    spec: &Arc<VertexAlgebraSpec>,
    weight: i64,
    inner: i64,
    coh: i64,
) -> Result<Vec<FockMonomial>, VertexError> {
    Ok(weight_inner_basis(spec, weight, inner)?
        .into_iter()
        .filter(|m| spec.monomial_coh(m) == coh)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{qi, qr};

    fn window(w: i64, d: i64) -> Window {
        Window { max_weight: w, max_inner: d }
    }

    /// One even pair: x of inner degree 1, bidegree (0,0).
    fn x_spec(w: i64) -> Arc<VertexAlgebraSpec> {
        VertexAlgebraSpec::new(
            vec![GeneratorPair::new("x", Parity::Even, (0, 0), 1)],
            window(w, 12),
        )
        .unwrap()
    }

    /// An even pair x and an odd pair phi (the de Rham partner of x).
    fn x_phi_spec(w: i64) -> Arc<VertexAlgebraSpec> {
        VertexAlgebraSpec::new(
            vec![
                GeneratorPair::new("x", Parity::Even, (0, 0), 1),
                GeneratorPair::new("phi", Parity::Odd, (0, 1), 1),
            ],
            window(w, 12),
        )
        .unwrap()
    }

    fn x(spec: &Arc<VertexAlgebraSpec>) -> FockState {
        FockState::generator(spec, 0, Role::Function).unwrap()
    }

    fn dx(spec: &Arc<VertexAlgebraSpec>) -> FockState {
        FockState::generator(spec, 0, Role::Conjugate).unwrap()
    }

    #[test]
    fn creation_on_vacuum_gives_jet_symbols() {
        let spec = x_spec(4);
        let vac = FockState::vacuum(&spec);
        assert_eq!(apply_mode(0, Role::Function, -1, &vac).unwrap(), x(&spec));
        assert_eq!(
            apply_mode(0, Role::Function, -3, &vac).unwrap(),
            FockState::jet(&spec, 0, Role::Function, 2).unwrap()
        );
    }

    #[test]
    fn zero_mode_of_conjugate_differentiates() {
        let spec = x_spec(4);
        assert_eq!(
            apply_mode(0, Role::Conjugate, 0, &x(&spec)).unwrap(),
            FockState::vacuum(&spec)
        );
        // d/dx on x² gives 2x.
        let x2 = apply_mode(0, Role::Function, -1, &x(&spec)).unwrap();
        assert_eq!(
            apply_mode(0, Role::Conjugate, 0, &x2).unwrap(),
            x(&spec).scale(&qi(2))
        );
    }

    #[test]
    fn annihilation_on_vacuum_vanishes() {
        let spec = x_spec(4);
        let vac = FockState::vacuum(&spec);
        for m in 0..4 {
            assert!(apply_mode(0, Role::Function, m, &vac).unwrap().is_zero());
            assert!(apply_mode(0, Role::Conjugate, m, &vac).unwrap().is_zero());
        }
    }

    #[test]
    fn high_mode_annihilates_low_jets() {
        let spec = x_spec(4);
        // ∂_{x(2)} kills x^{(1)}·x^{(1)} (only jet-2 symbols pair with it) …
        let m = FockState::monomial(
            &spec,
            vec![(ModeSymbol { pair: 0, role: Role::Function, jet: 1 }, 2)],
            Q::one(),
        )
        .unwrap();
        assert!(apply_mode(0, Role::Conjugate, 2, &m).unwrap().is_zero());
        // … and [∂_{x(2)}, x_{(−3)}] = Id on the vacuum.
        let vac = FockState::vacuum(&spec);
        let created = apply_mode(0, Role::Function, -3, &vac).unwrap();
        let collapsed = apply_mode(0, Role::Conjugate, 2, &created).unwrap();
        assert_eq!(collapsed, vac);
    }

    #[test]
    fn commutation_relation_on_sample_states() {
        // [∂_{x(m)}, x_{(n−1)}] = δ_{m,−n}·Id on states, including even
        // exponent bookkeeping.
        let spec = x_spec(6);
        let states = [
            FockState::vacuum(&spec),
            x(&spec),
            apply_mode(0, Role::Function, -1, &x(&spec)).unwrap(),
            FockState::jet(&spec, 0, Role::Conjugate, 1).unwrap(),
        ];
        for s in &states {
            for m in 0..3i64 {
                for n in -3..3i64 {
                    let first = apply_mode(0, Role::Function, n - 1, s).unwrap();
                    let lhs1 = apply_mode(0, Role::Conjugate, m, &first).unwrap();
                    let second = apply_mode(0, Role::Conjugate, m, s).unwrap();
                    let lhs2 = apply_mode(0, Role::Function, n - 1, &second).unwrap();
                    let commutator = &lhs1 - &lhs2;
                    let expected = if m == -n { s.clone() } else { FockState::zero(&spec) };
                    assert_eq!(commutator, expected, "m={m}, n={n}");
                }
            }
        }
    }

    #[test]
    fn odd_pair_contractions_are_positive() {
        let spec = x_phi_spec(4);
        let phi = FockState::generator(&spec, 1, Role::Function).unwrap();
        let dphi = FockState::generator(&spec, 1, Role::Conjugate).unwrap();
        // ∂_{φ(0)} φ = 1 and φ_{(0)} ∂_φ = 1.
        assert_eq!(apply_mode(1, Role::Conjugate, 0, &phi).unwrap(), FockState::vacuum(&spec));
        assert_eq!(apply_mode(1, Role::Function, 0, &dphi).unwrap(), FockState::vacuum(&spec));
        // x_{(0)} ∂_x = −1 for the even pair.
        assert_eq!(
            apply_mode(0, Role::Function, 0, &dx(&spec)).unwrap(),
            FockState::vacuum(&spec).neg()
        );
    }

    #[test]
    fn koszul_sign_in_annihilation() {
        let spec = x_phi_spec(4);
        // State φ^{(0)}·∂φ^{(0)}: contracting with ∂_{φ(0)} must hop over φ.
        let phi_sym = ModeSymbol { pair: 1, role: Role::Function, jet: 0 };
        let dphi_sym = ModeSymbol { pair: 1, role: Role::Conjugate, jet: 0 };
        let state =
            FockState::monomial(&spec, vec![(phi_sym, 1), (dphi_sym, 1)], Q::one()).unwrap();
        // φ_{(0)} contracts ∂φ^{(0)} behind the odd φ: sign −1.
        let contracted = apply_mode(1, Role::Function, 0, &state).unwrap();
        let phi = FockState::monomial(&spec, vec![(phi_sym, 1)], Q::one()).unwrap();
        assert_eq!(contracted, phi.neg());
    }

    #[test]
    fn nth_product_agrees_with_apply_mode_on_jets() {
        let spec = x_phi_spec(5);
        let targets = [
            FockState::vacuum(&spec),
            x(&spec),
            FockState::jet(&spec, 0, Role::Conjugate, 1).unwrap(),
            FockState::monomial(
                &spec,
                vec![
                    (ModeSymbol { pair: 0, role: Role::Function, jet: 1 }, 1),
                    (ModeSymbol { pair: 1, role: Role::Function, jet: 0 }, 1),
                ],
                Q::one(),
            )
            .unwrap(),
        ];
        for pair in 0..2 {
            for role in [Role::Function, Role::Conjugate] {
                for jet in 0..3u32 {
                    let a = FockState::jet(&spec, pair, role, jet);
                    let Ok(a) = a else { continue };
                    for n in -4..4i64 {
                        for b in &targets {
                            let sym = ModeSymbol { pair, role, jet };
                            let direct = apply_jet_mode(sym, n, b);
                            let recursive = nth_product(&a, b, n);
                            match (direct, recursive) {
                                (Ok(d), Ok(r)) => assert_eq!(
                                    d, r,
                                    "pair={pair}, role={role:?}, jet={jet}, n={n}"
                                ),
                                (Err(_), Err(_)) => {}
                                (d, r) => {
                                    panic!("disagreement: direct={d:?}, recursive={r:?}")
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn functions_have_regular_ope() {
        let spec = x_spec(4);
        for n in 0..4 {
            assert!(nth_product(&x(&spec), &x(&spec), n).unwrap().is_zero());
        }
        assert_eq!(
            nth_product(&dx(&spec), &x(&spec), 0).unwrap(),
            FockState::vacuum(&spec)
        );
    }

    #[test]
    fn odd_contraction_via_nth_product() {
        let spec = x_phi_spec(4);
        let phi = FockState::generator(&spec, 1, Role::Function).unwrap();
        let dphi = FockState::generator(&spec, 1, Role::Conjugate).unwrap();
        assert_eq!(nth_product(&phi, &dphi, 0).unwrap(), FockState::vacuum(&spec));
    }

    #[test]
    fn minus_one_product_is_multiplication() {
        let spec = x_spec(4);
        let x1 = FockState::jet(&spec, 0, Role::Function, 1).unwrap();
        let product = nth_product(&x1, &x(&spec), -1).unwrap();
        let expected = FockState::monomial(
            &spec,
            vec![
                (ModeSymbol { pair: 0, role: Role::Function, jet: 0 }, 1),
                (ModeSymbol { pair: 0, role: Role::Function, jet: 1 }, 1),
            ],
            Q::one(),
        )
        .unwrap();
        assert_eq!(product, expected);
    }

    #[test]
    fn wick_contraction_in_normally_ordered_product() {
        // (∂x)_{(−1)} x: creation part gives ∂x^{(0)}x^{(0)}; the
        // contraction of the annihilation half vanishes against the vacuum
        // factor, so the result is the plain monomial.
        let spec = x_spec(4);
        let product = nth_product(&dx(&spec), &x(&spec), -1).unwrap();
        let expected = FockState::monomial(
            &spec,
            vec![
                (ModeSymbol { pair: 0, role: Role::Function, jet: 0 }, 1),
                (ModeSymbol { pair: 0, role: Role::Conjugate, jet: 0 }, 1),
            ],
            Q::one(),
        )
        .unwrap();
        assert_eq!(product, expected);
    }

    #[test]
    fn translation_is_a_derivation() {
        let spec = x_spec(6);
        assert!(translation(&FockState::vacuum(&spec)).unwrap().is_zero());
        assert_eq!(
            translation(&x(&spec)).unwrap(),
            FockState::jet(&spec, 0, Role::Function, 1).unwrap()
        );
        // T(x^{(1)}) = 2x^{(2)}.
        let x1 = FockState::jet(&spec, 0, Role::Function, 1).unwrap();
        assert_eq!(
            translation(&x1).unwrap(),
            FockState::jet(&spec, 0, Role::Function, 2).unwrap().scale(&qi(2))
        );
        // Leibniz against nth products.
        let a = FockState::jet(&spec, 0, Role::Conjugate, 0).unwrap();
        let b = apply_mode(0, Role::Function, -2, &x(&spec)).unwrap();
        for n in -2..2i64 {
            let lhs = translation(&nth_product(&a, &b, n).unwrap()).unwrap();
            let rhs = &nth_product(&translation(&a).unwrap(), &b, n).unwrap()
                + &nth_product(&a, &translation(&b).unwrap(), n).unwrap();
            assert_eq!(lhs, rhs, "n={n}");
        }
    }

    #[test]
    fn translation_as_shifted_creation() {
        // T(u^{(k)}) = (k+1) u^{(k+1)} = u_{(−k−2)}1 scaled: check against
        // apply_mode.
        let spec = x_spec(5);
        for k in 0..3u32 {
            let jet = FockState::jet(&spec, 0, Role::Function, k).unwrap();
            let translated = translation(&jet).unwrap();
            let direct = apply_mode(0, Role::Function, -(k as i64) - 2, &FockState::vacuum(&spec))
                .unwrap()
                .scale(&qi(k as i64 + 1));
            assert_eq!(translated, direct);
        }
    }

    #[test]
    fn zero_mode_derivation_examples() {
        let spec = x_phi_spec(4);
        // a = ∂x acts as d/dx.
        let d = zero_mode_derivation(&dx(&spec));
        let x2 = apply_mode(0, Role::Function, -1, &x(&spec)).unwrap();
        assert_eq!(d.apply(&x2).unwrap(), x(&spec).scale(&qi(2)));
        // a = 1: zero operator.
        let unit = zero_mode_derivation(&FockState::vacuum(&spec));
        assert!(unit.apply(&x2).unwrap().is_zero());
        // a = (φ)_{(−1)}∂x maps x ↦ φ.
        let phi = FockState::generator(&spec, 1, Role::Function).unwrap();
        let a = nth_product(&phi, &dx(&spec), -1).unwrap();
        let de_rham = zero_mode_derivation(&a);
        assert_eq!(de_rham.apply(&x(&spec)).unwrap(), phi);
    }

    #[test]
    fn zero_mode_is_a_super_derivation() {
        let spec = x_phi_spec(5);
        let phi = FockState::generator(&spec, 1, Role::Function).unwrap();
        let a = nth_product(&phi, &dx(&spec), -1).unwrap();
        let d = zero_mode_derivation(&a);
        // d(u_{(n)} v) = (d u)_{(n)} v + (−1)^{|a||u|} u_{(n)} (d v).
        let u = FockState::generator(&spec, 1, Role::Conjugate).unwrap(); // odd
        let v = x(&spec);
        for n in -2..2i64 {
            let lhs = d.apply(&nth_product(&u, &v, n).unwrap()).unwrap();
            let rhs = &nth_product(&d.apply(&u).unwrap(), &v, n).unwrap()
                - &nth_product(&u, &d.apply(&v).unwrap(), n).unwrap();
            assert_eq!(lhs, rhs, "n={n}");
        }
    }

    #[test]
    fn borcherds_commutator_formula() {
        // [a_{(m)}, b_{(k)}] = Σ_{j≥0} C(m,j) (a_{(j)} b)_{(m+k−j)} on
        // generators of both parities.
        let spec = x_phi_spec(5);
        let gens = [
            (x(&spec), Parity::Even),
            (dx(&spec), Parity::Even),
            (FockState::generator(&spec, 1, Role::Function).unwrap(), Parity::Odd),
            (FockState::generator(&spec, 1, Role::Conjugate).unwrap(), Parity::Odd),
        ];
        let targets = [
            x(&spec),
            FockState::jet(&spec, 0, Role::Conjugate, 0).unwrap(),
            nth_product(
                &FockState::generator(&spec, 1, Role::Function).unwrap(),
                &x(&spec),
                -1,
            )
            .unwrap(),
        ];
        for (a, pa) in &gens {
            for (b, pb) in &gens {
                for m in -2..2i64 {
                    for k in -2..2i64 {
                        for v in &targets {
                            let bv = nth_product(b, v, k).unwrap();
                            let abv = nth_product(a, &bv, m).unwrap();
                            let av = nth_product(a, v, m).unwrap();
                            let bav = nth_product(b, &av, k).unwrap();
                            let lhs = if pa.is_odd() && pb.is_odd() {
                                &abv + &bav
                            } else {
                                &abv - &bav
                            };
                            let mut rhs = FockState::zero(&spec);
                            for j in 0..5i64 {
                                let aj = nth_product(a, b, j).unwrap();
                                if aj.is_zero() {
                                    continue;
                                }
                                let term = nth_product(&aj, v, m + k - j).unwrap();
                                rhs = rhs
                                    .checked_add(
                                        &term.scale(&generalized_binomial(m, j as u32)),
                                    )
                                    .unwrap();
                            }
                            assert_eq!(lhs, rhs, "m={m}, k={k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn grading_additivity() {
        let spec = x_phi_spec(5);
        let a = nth_product(
            &FockState::generator(&spec, 1, Role::Function).unwrap(),
            &dx(&spec),
            -1,
        )
        .unwrap();
        let b = apply_mode(0, Role::Function, -2, &x(&spec)).unwrap();
        for n in -3..2i64 {
            let p = nth_product(&a, &b, n).unwrap();
            if p.is_zero() {
                continue;
            }
            assert_eq!(
                p.weight(),
                Some(a.weight().unwrap() + b.weight().unwrap() - n - 1),
                "n={n}"
            );
            assert_eq!(
                p.inner_degree(),
                Some(a.inner_degree().unwrap() + b.inner_degree().unwrap())
            );
        }
    }

    #[test]
    fn window_overflow_is_hard_error() {
        let spec = x_spec(2);
        let vac = FockState::vacuum(&spec);
        assert!(apply_mode(0, Role::Function, -3, &vac).is_ok());
        assert!(matches!(
            apply_mode(0, Role::Function, -4, &vac),
            Err(VertexError::WindowOverflow { weight: 3, max: 2 })
        ));
        // A product whose result fits exactly at the boundary succeeds.
        let x2jet = FockState::jet(&spec, 0, Role::Function, 2).unwrap();
        let p = nth_product(&x2jet, &x(&spec), -1).unwrap();
        assert_eq!(p.weight(), Some(2));
    }

    #[test]
    fn basis_enumeration_matches_hand_counts() {
        let spec = x_spec(4);
        // Weight 0, inner 2: {x·x}.
        let b = weight_inner_basis(&spec, 0, 2).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0], vec![(ModeSymbol { pair: 0, role: Role::Function, jet: 0 }, 2)]);
        // Weight 0, inner 0: vacuum only.
        let b = weight_inner_basis(&spec, 0, 0).unwrap();
        assert_eq!(b, vec![Vec::new()]);
        // Weight 1, inner 0: {x^{(0)} ∂x^{(0)}}.
        let b = weight_inner_basis(&spec, 1, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(
            b[0],
            vec![
                (ModeSymbol { pair: 0, role: Role::Function, jet: 0 }, 1),
                (ModeSymbol { pair: 0, role: Role::Conjugate, jet: 0 }, 1),
            ]
        );
        // Weight 1, inner 2: x^{(1)}x^{(0)} and ∂x^{(0)}x·x·x.
        let b = weight_inner_basis(&spec, 1, 2).unwrap();
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn bigraded_basis_filters_cohomological_degree() {
        // An odd pair of bidegree (−1, 0) and inner 2 alongside x: the
        // Koszul variable of K(ℂ[x], x²).
        let spec = VertexAlgebraSpec::new(
            vec![
                GeneratorPair::new("x", Parity::Even, (0, 0), 1),
                GeneratorPair::new("xi", Parity::Odd, (-1, 0), 2),
            ],
            window(3, 8),
        )
        .unwrap();
        let b = bigraded_basis(&spec, 0, 2, -1).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0], vec![(ModeSymbol { pair: 1, role: Role::Function, jet: 0 }, 1)]);
        let b0 = bigraded_basis(&spec, 0, 2, 0).unwrap();
        assert_eq!(b0.len(), 1); // x·x
        assert!(bigraded_basis(&spec, 0, 2, 1).unwrap().is_empty());
    }

    #[test]
    fn basis_requires_window_coverage() {
        let spec = x_spec(2);
        assert!(matches!(
            weight_inner_basis(&spec, 3, 0),
            Err(VertexError::OutOfWindow { .. })
        ));
        assert!(matches!(
            weight_inner_basis(&spec, 1, 100),
            Err(VertexError::OutOfWindow { .. })
        ));
    }

    #[test]
    fn divided_power_binomials() {
        assert_eq!(generalized_binomial(-1, 2), qi(1));
        assert_eq!(generalized_binomial(-2, 1), qi(-2));
        assert_eq!(generalized_binomial(3, 2), qi(3));
        assert_eq!(generalized_binomial(1, 3), qi(0));
        assert_eq!(generalized_binomial(-1, 0), qi(1));
        assert_eq!(generalized_binomial(5, 2), qr(10, 1));
    }
}
