//! Randomized law checks for the algebraic core. Every identity here is
//! exact — rational arithmetic end to end — so a single failing case is a
//! genuine counterexample and proptest's shrinking will minimize it.

use std::sync::Arc;

use chiralis::linalg::qi;
use chiralis::superpoly::Parity;
use chiralis::vertex::{
    nth_product, translation, weight_inner_basis, FockMonomial, FockState, GeneratorPair,
    VertexAlgebraSpec, Window,
};
use chiralis::weyl::{
    dg_weyl_differential, supercommutator, weyl_multiply, WeylElement, WeylMonomial,
};
use chiralis::{Q, RingSpec, SparseMatrix, SuperPolynomial, VariableSpec};
use num_traits::Zero;
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// Shared generators
// ---------------------------------------------------------------------------

/// Two even and two odd variables, all of inner degree 1.
fn plane_ring() -> Arc<RingSpec> {
    RingSpec::new(vec![
        VariableSpec::even("x", 1),
        VariableSpec::even("y", 1),
        VariableSpec::odd("xi", 1),
        VariableSpec::odd("eta", 1),
    ])
    .unwrap()
}

/// One even and one odd variable, for Weyl-algebra checks.
fn weyl_ring() -> Arc<RingSpec> {
    RingSpec::new(vec![VariableSpec::even("x", 1), VariableSpec::odd("xi", 1)]).unwrap()
}

/// `(x-exp, y-exp, xi-exp, eta-exp, |coefficient|, negate)` for one monomial
/// over [`plane_ring`]. Coefficients are kept nonzero so terms never silently
/// vanish at construction time.
type PolyTerm = (u32, u32, u32, u32, i64, bool);

fn arb_poly_terms(max: usize) -> impl Strategy<Value = Vec<PolyTerm>> {
    proptest::collection::vec(
        (0u32..=2, 0u32..=2, 0u32..=1, 0u32..=1, 1i64..=4, any::<bool>()),
        0..=max,
    )
}

fn poly_from_terms(ring: &Arc<RingSpec>, terms: &[PolyTerm]) -> SuperPolynomial {
    let mut p = SuperPolynomial::zero(ring);
    for &(ex, ey, exi, eeta, c, neg) in terms {
        let coeff = if neg { qi(-c) } else { qi(c) };
        let m = SuperPolynomial::monomial(ring, vec![ex, ey, exi, eeta], coeff).unwrap();
        p = &p + &m;
    }
    p
}

/// Forces every term to the requested parity by flipping its `eta` exponent
/// when the odd-exponent count has the wrong residue.
fn homogeneous_from_terms(
    ring: &Arc<RingSpec>,
    terms: &[PolyTerm],
    parity: Parity,
) -> SuperPolynomial {
    let want = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let fixed: Vec<PolyTerm> = terms
        .iter()
        .map(|&(ex, ey, exi, eeta, c, neg)| {
            if (exi + eeta) % 2 == want {
                (ex, ey, exi, eeta, c, neg)
            } else {
                (ex, ey, exi, 1 - eeta, c, neg)
            }
        })
        .collect();
    poly_from_terms(ring, &fixed)
}

/// `(x-mult, xi-mult, x-der, xi-der, |coefficient|, negate)` for one
/// normal-ordered monomial over [`weyl_ring`].
type WeylTerm = (u32, u32, u32, u32, i64, bool);

fn arb_weyl_terms(max: usize) -> impl Strategy<Value = Vec<WeylTerm>> {
    proptest::collection::vec(
        (0u32..=2, 0u32..=1, 0u32..=2, 0u32..=1, 1i64..=3, any::<bool>()),
        1..=max,
    )
}

fn weyl_from_terms(ring: &Arc<RingSpec>, terms: &[WeylTerm]) -> WeylElement {
    let mut out = WeylElement::zero(ring);
    for &(mx, mxi, dx, dxi, c, neg) in terms {
        let coeff = if neg { qi(-c) } else { qi(c) };
        let term = WeylElement::monomial(
            ring,
            WeylMonomial { mult: vec![mx, mxi], der: vec![dx, dxi] },
            coeff,
        )
        .unwrap();
        out = &out + &term;
    }
    out
}

/// The square-zero odd operator `x²·∂_ξ` over [`weyl_ring`].
fn square_zero_operator(ring: &Arc<RingSpec>) -> WeylElement {
    WeylElement::monomial(
        ring,
        WeylMonomial { mult: vec![2, 0], der: vec![0, 1] },
        qi(1),
    )
    .unwrap()
}

/// One even and one odd generator pair in a generous window.
fn fock_spec() -> Arc<VertexAlgebraSpec> {
    VertexAlgebraSpec::new(
        vec![
            GeneratorPair::new("x", Parity::Even, (0, 0), 1),
            GeneratorPair::new("phi", Parity::Odd, (0, 1), 1),
        ],
        Window { max_weight: 8, max_inner: 8 },
    )
    .unwrap()
}

/// Every basis monomial of weight ≤ 2 and |inner| ≤ 3, the raw material for
/// random states kept far away from the window boundary.
fn basis_pool(spec: &Arc<VertexAlgebraSpec>) -> Vec<FockMonomial> {
    let mut pool = Vec::new();
    for w in 0..=2 {
        for d in -3..=3 {
            pool.extend(weight_inner_basis(spec, w, d).unwrap());
        }
    }
    pool
}

fn pool_state(
    spec: &Arc<VertexAlgebraSpec>,
    pool: &[FockMonomial],
    pick: prop::sample::Index,
    c: i64,
) -> FockState {
    FockState::monomial(spec, pool[pick.index(pool.len())].clone(), qi(c)).unwrap()
}

/// A sparse rational matrix with up to 5 rows and columns and small integer
/// entries.
fn arb_matrix() -> impl Strategy<Value = SparseMatrix> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(rows, cols)| {
        proptest::collection::vec(
            (0..rows, 0..cols, -3i64..=3),
            0..=2 * rows.max(cols),
        )
        .prop_map(move |trip| {
            SparseMatrix::from_triplets(
                rows,
                cols,
                trip.into_iter().map(|(r, c, v)| (r, c, qi(v))),
            )
        })
    })
}

/// A matrix together with a row permutation and a nonzero scale per row.
fn arb_relabeled_matrix() -> impl Strategy<Value = (SparseMatrix, Vec<usize>, Vec<i64>)> {
    arb_matrix().prop_flat_map(|m| {
        let rows = m.rows();
        let perm = Just((0..rows).collect::<Vec<usize>>()).prop_shuffle();
        let scales = proptest::collection::vec(
            prop_oneof![Just(1i64), Just(2), Just(-1), Just(3), Just(-2)],
            rows,
        );
        (Just(m), perm, scales)
    })
}

// ---------------------------------------------------------------------------
// Exact linear algebra
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Rank–nullity: the kernel basis has exactly `cols − rank` vectors.
    #[test]
    fn prop_rank_plus_kernel_dim_is_cols(m in arb_matrix()) {
        prop_assert_eq!(m.rank() + m.kernel_basis().len(), m.cols());
    }

    /// Every reported kernel vector is nonzero and actually annihilated.
    #[test]
    fn prop_kernel_vectors_are_annihilated(m in arb_matrix()) {
        for v in m.kernel_basis() {
            prop_assert!(v.iter().any(|c| !c.is_zero()));
            prop_assert!(m.mul_vec(&v).iter().all(Q::is_zero));
        }
    }

    /// `solve` recovers a preimage for any vector already in the image.
    #[test]
    fn prop_solve_round_trip(
        m in arb_matrix(),
        raw in proptest::collection::vec(-3i64..=3, 5),
    ) {
        let x: Vec<Q> = raw.iter().take(m.cols()).map(|&v| qi(v)).collect();
        let b = m.mul_vec(&x);
        let y = m.solve(&b);
        prop_assert!(y.is_some());
        prop_assert_eq!(m.mul_vec(&y.unwrap()), b);
    }

    /// Rank is invariant under permuting rows and scaling them by nonzero
    /// rationals.
    #[test]
    fn prop_rank_invariant_under_row_relabeling(
        (m, perm, scales) in arb_relabeled_matrix(),
    ) {
        let relabeled = SparseMatrix::from_triplets(
            m.rows(),
            m.cols(),
            m.entries()
                .iter()
                .map(|(r, c, v)| (perm[*r], *c, v * qi(scales[*r]))),
        );
        prop_assert_eq!(relabeled.rank(), m.rank());
    }

    /// Rank is invariant under transposition.
    #[test]
    fn prop_rank_invariant_under_transpose(m in arb_matrix()) {
        let t = SparseMatrix::from_triplets(
            m.cols(),
            m.rows(),
            m.entries().iter().map(|(r, c, v)| (*c, *r, v.clone())),
        );
        prop_assert_eq!(t.rank(), m.rank());
    }
}

// ---------------------------------------------------------------------------
// Supercommutative polynomials
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Homogeneous elements supercommute: `a·b = (−1)^{|a||b|} b·a`.
    #[test]
    fn prop_multiplication_supercommutes(
        ta in arb_poly_terms(4),
        tb in arb_poly_terms(4),
        pa in any::<bool>(),
        pb in any::<bool>(),
    ) {
        let ring = plane_ring();
        let par = |odd: bool| if odd { Parity::Odd } else { Parity::Even };
        let a = homogeneous_from_terms(&ring, &ta, par(pa));
        let b = homogeneous_from_terms(&ring, &tb, par(pb));
        let ab = &a * &b;
        let ba = &b * &a;
        let expected = if pa && pb { ba.neg() } else { ba };
        prop_assert_eq!(ab, expected);
    }

    /// Multiplication is associative.
    #[test]
    fn prop_multiplication_associative(
        ta in arb_poly_terms(3),
        tb in arb_poly_terms(3),
        tc in arb_poly_terms(3),
    ) {
        let ring = plane_ring();
        let a = poly_from_terms(&ring, &ta);
        let b = poly_from_terms(&ring, &tb);
        let c = poly_from_terms(&ring, &tc);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    /// Multiplication distributes over addition.
    #[test]
    fn prop_multiplication_distributes(
        ta in arb_poly_terms(3),
        tb in arb_poly_terms(3),
        tc in arb_poly_terms(3),
    ) {
        let ring = plane_ring();
        let a = poly_from_terms(&ring, &ta);
        let b = poly_from_terms(&ring, &tb);
        let c = poly_from_terms(&ring, &tc);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    /// An even partial derivative satisfies the plain Leibniz rule.
    #[test]
    fn prop_even_partial_is_a_derivation(
        ta in arb_poly_terms(4),
        tb in arb_poly_terms(4),
    ) {
        let ring = plane_ring();
        let a = poly_from_terms(&ring, &ta);
        let b = poly_from_terms(&ring, &tb);
        let lhs = (&a * &b).partial_derivative(0);
        let rhs = &(&a.partial_derivative(0) * &b) + &(&a * &b.partial_derivative(0));
        prop_assert_eq!(lhs, rhs);
    }

    /// An odd partial derivative satisfies the signed Leibniz rule on
    /// homogeneous left factors.
    #[test]
    fn prop_odd_partial_is_a_super_derivation(
        ta in arb_poly_terms(4),
        tb in arb_poly_terms(4),
        pa in any::<bool>(),
    ) {
        let ring = plane_ring();
        let parity = if pa { Parity::Odd } else { Parity::Even };
        let a = homogeneous_from_terms(&ring, &ta, parity);
        let b = poly_from_terms(&ring, &tb);
        let lhs = (&a * &b).partial_derivative(2);
        let signed = if pa {
            (&a * &b.partial_derivative(2)).neg()
        } else {
            &a * &b.partial_derivative(2)
        };
        prop_assert_eq!(lhs, &(&a.partial_derivative(2) * &b) + &signed);
    }

    /// Odd elements square to zero.
    #[test]
    fn prop_odd_elements_square_to_zero(ta in arb_poly_terms(4)) {
        let ring = plane_ring();
        let a = homogeneous_from_terms(&ring, &ta, Parity::Odd);
        prop_assert!((&a * &a).is_zero());
    }

    /// Partial derivatives supercommute: even pairs commute, odd pairs
    /// anticommute, and an odd partial squares to zero.
    #[test]
    fn prop_partials_supercommute(t in arb_poly_terms(4)) {
        let ring = plane_ring();
        let p = poly_from_terms(&ring, &t);
        let xy = p.partial_derivative(1).partial_derivative(0);
        let yx = p.partial_derivative(0).partial_derivative(1);
        prop_assert_eq!(xy, yx);
        let xe = p.partial_derivative(3).partial_derivative(2);
        let ex = p.partial_derivative(2).partial_derivative(3);
        prop_assert_eq!(xe, ex.neg());
        prop_assert!(p.partial_derivative(2).partial_derivative(2).is_zero());
    }
}

// ---------------------------------------------------------------------------
// Weyl algebras
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// The normal-ordering rewrite is associative.
    #[test]
    fn prop_weyl_multiplication_associative(
        ta in arb_weyl_terms(3),
        tb in arb_weyl_terms(3),
        tc in arb_weyl_terms(3),
    ) {
        let ring = weyl_ring();
        let a = weyl_from_terms(&ring, &ta);
        let b = weyl_from_terms(&ring, &tb);
        let c = weyl_from_terms(&ring, &tc);
        let left = weyl_multiply(&weyl_multiply(&a, &b).unwrap(), &c).unwrap();
        let right = weyl_multiply(&a, &weyl_multiply(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    /// Multiplying operators then acting agrees with acting twice: the
    /// normal-ordering rewrite computes genuine operator composition.
    #[test]
    fn prop_weyl_product_acts_as_composition(
        ta in arb_weyl_terms(3),
        tb in arb_weyl_terms(3),
        tp in arb_weyl_terms(3),
    ) {
        let ring = weyl_ring();
        let a = weyl_from_terms(&ring, &ta);
        let b = weyl_from_terms(&ring, &tb);
        // Reuse the operator generator for a polynomial: keep multiplication
        // exponents only.
        let mut p = SuperPolynomial::zero(&ring);
        for &(mx, mxi, _, _, c, neg) in &tp {
            let coeff = if neg { qi(-c) } else { qi(c) };
            let m = SuperPolynomial::monomial(&ring, vec![mx, mxi], coeff).unwrap();
            p = &p + &m;
        }
        let composed = weyl_multiply(&a, &b).unwrap().apply_to_polynomial(&p).unwrap();
        let stepwise = a
            .apply_to_polynomial(&b.apply_to_polynomial(&p).unwrap())
            .unwrap();
        prop_assert_eq!(composed, stepwise);
    }

    /// `[a, b] = −(−1)^{|a||b|} [b, a]` on homogeneous components.
    #[test]
    fn prop_supercommutator_antisymmetry(
        ta in arb_weyl_terms(3),
        tb in arb_weyl_terms(3),
        pa in any::<bool>(),
        pb in any::<bool>(),
    ) {
        let ring = weyl_ring();
        let par = |odd: bool| if odd { Parity::Odd } else { Parity::Even };
        let a = weyl_from_terms(&ring, &ta).parity_component(par(pa));
        let b = weyl_from_terms(&ring, &tb).parity_component(par(pb));
        let ab = supercommutator(&a, &b);
        let ba = supercommutator(&b, &a);
        let expected = if pa && pb { ba } else { ba.scale(&qi(-1)) };
        prop_assert_eq!(ab, expected);
    }

    /// Bracketing with a square-zero odd operator is a super-derivation and
    /// squares to zero.
    #[test]
    fn prop_dg_differential_laws(
        ta in arb_weyl_terms(3),
        tb in arb_weyl_terms(3),
        pa in any::<bool>(),
    ) {
        let ring = weyl_ring();
        let diff = dg_weyl_differential(&square_zero_operator(&ring)).unwrap();
        let parity = if pa { Parity::Odd } else { Parity::Even };
        let mut a = weyl_from_terms(&ring, &ta).parity_component(parity);
        let mut a_odd = pa;
        if a.is_zero() {
            // Fall back to the complementary component so the case is not
            // vacuous; the sampled element always has one nonzero half.
            a = weyl_from_terms(&ring, &ta).parity_component(match parity {
                Parity::Even => Parity::Odd,
                Parity::Odd => Parity::Even,
            });
            a_odd = !a_odd;
        }
        let b = weyl_from_terms(&ring, &tb);
        let product = weyl_multiply(&a, &b).unwrap();
        let lhs = diff.apply(&product);
        let signed = if a_odd {
            weyl_multiply(&a, &diff.apply(&b)).unwrap().scale(&qi(-1))
        } else {
            weyl_multiply(&a, &diff.apply(&b)).unwrap()
        };
        let rhs = &weyl_multiply(&diff.apply(&a), &b).unwrap() + &signed;
        prop_assert_eq!(lhs, rhs);
        prop_assert!(diff.apply(&diff.apply(&b)).is_zero());
    }
}

// ---------------------------------------------------------------------------
// Fock states and mode products
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Translation is a derivation of every `n`-th product.
    #[test]
    fn prop_translation_derives_all_products(
        ia in any::<prop::sample::Index>(),
        ib in any::<prop::sample::Index>(),
        ca in 1i64..=3,
        cb in 1i64..=3,
        n in -2i64..=2,
    ) {
        let spec = fock_spec();
        let pool = basis_pool(&spec);
        let a = pool_state(&spec, &pool, ia, ca);
        let b = pool_state(&spec, &pool, ib, cb);
        let lhs = translation(&nth_product(&a, &b, n).unwrap()).unwrap();
        let rhs = &nth_product(&translation(&a).unwrap(), &b, n).unwrap()
            + &nth_product(&a, &translation(&b).unwrap(), n).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// Translating the left factor shifts the mode index:
    /// `(Ta)_{(n)} b = −n · a_{(n−1)} b`.
    #[test]
    fn prop_translation_shifts_modes(
        ia in any::<prop::sample::Index>(),
        ib in any::<prop::sample::Index>(),
        ca in 1i64..=3,
        cb in 1i64..=3,
        n in -2i64..=2,
    ) {
        let spec = fock_spec();
        let pool = basis_pool(&spec);
        let a = pool_state(&spec, &pool, ia, ca);
        let b = pool_state(&spec, &pool, ib, cb);
        let lhs = nth_product(&translation(&a).unwrap(), &b, n).unwrap();
        let rhs = nth_product(&a, &b, n - 1).unwrap().scale(&qi(-n));
        prop_assert_eq!(lhs, rhs);
    }

    /// Skew-symmetry:
    /// `a_{(n)} b = (−1)^{|a||b|} Σ_j (−1)^{n+j+1} T^j(b_{(n+j)} a) / j!`.
    /// The sum is finite because weights in the Fock space are nonnegative.
    #[test]
    fn prop_skew_symmetry(
        ia in any::<prop::sample::Index>(),
        ib in any::<prop::sample::Index>(),
        ca in 1i64..=3,
        cb in 1i64..=3,
        n in -2i64..=2,
    ) {
        let spec = fock_spec();
        let pool = basis_pool(&spec);
        let a = pool_state(&spec, &pool, ia, ca);
        let b = pool_state(&spec, &pool, ib, cb);
        let lhs = nth_product(&a, &b, n).unwrap();

        let both_odd = a.parity().unwrap() == Parity::Odd
            && b.parity().unwrap() == Parity::Odd;
        let bound = (a.weight().unwrap() + b.weight().unwrap() - n).max(0);
        let mut rhs = FockState::zero(&spec);
        let mut factorial = qi(1);
        for j in 0..=bound {
            if j > 0 {
                factorial = &factorial * &qi(j);
            }
            let mut term = nth_product(&b, &a, n + j).unwrap();
            if term.is_zero() {
                continue;
            }
            for _ in 0..j {
                term = translation(&term).unwrap();
            }
            let mut coeff = &qi(1) / &factorial;
            if (n + j).rem_euclid(2) == 0 {
                coeff = -coeff;
            }
            if both_odd {
                coeff = -coeff;
            }
            rhs = &rhs + &term.scale(&coeff);
        }
        prop_assert_eq!(lhs, rhs);
    }
}
