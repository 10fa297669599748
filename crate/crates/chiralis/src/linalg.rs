//! Exact rational scalars and sparse exact linear algebra.
//!
//! Everything here works over arbitrary-precision rationals ([`Q`]), so rank,
//! kernel and cokernel computations are exact — there is no pivoting
//! tolerance and no rounding. Elimination is fraction-free: rows are scaled
//! to integers once, row updates use integer cross-multiplication
//! (`r_j := p·r_j − q·r_i`), and each updated row is divided by the gcd of
//! its entries to keep growth in check. Rational arithmetic only reappears
//! in the final back-substitution.
//!
//! Pivot choice is deterministic: smallest column index first, then the row
//! with the fewest stored entries, ties broken by row index. This makes all
//! outputs (kernel bases, reduced representatives) reproducible across runs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Exact scalar: arbitrary-precision rational, always in lowest terms with a
/// positive denominator. Equality is value equality.
pub type Q = num_rational::BigRational;

/// Shorthand for an integer scalar.
pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Shorthand for the fraction `n/d` (`d` nonzero).
pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Sparse matrix over [`Q`]: explicit row/column counts plus a canonically
/// sorted list of `(row, col, value)` entries with no duplicate positions and
/// no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, Q)>,
}

impl SparseMatrix {
    /// The `rows × cols` zero matrix.
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols, entries: Vec::new() }
    }

    /// The `n × n` identity matrix.
    pub fn identity(n: usize) -> Self {
        let entries = (0..n).map(|i| (i, i, Q::one())).collect();
        SparseMatrix { rows: n, cols: n, entries }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicate positions
    /// are summed; zero results are dropped.
    ///
    /// Panics if an index is out of range.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, Q)>,
    {
        let mut acc: std::collections::BTreeMap<(usize, usize), Q> = Default::default();
        for (r, c, v) in triplets {
            assert!(r < rows && c < cols, "entry ({r},{c}) out of range for {rows}×{cols}");
            let slot = acc.entry((r, c)).or_insert_with(Q::zero);
            *slot += v;
        }
        let entries = acc
            .into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|((r, c), v)| (r, c, v))
            .collect();
        SparseMatrix { rows, cols, entries }
    }

    /// Builds a matrix column by column: `columns[j]` lists the `(row, value)`
    /// pairs of column `j`.
    pub fn from_columns(rows: usize, columns: &[Vec<(usize, Q)>]) -> Self {
        let cols = columns.len();
        let triplets = columns
            .iter()
            .enumerate()
            .flat_map(|(j, col)| col.iter().map(move |(i, v)| (*i, j, v.clone())));
        Self::from_triplets(rows, cols, triplets)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[(usize, usize, Q)] {
        &self.entries
    }

    /// Matrix–vector product (`v` is a dense length-`cols` vector).
    pub fn mul_vec(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        let mut out = vec![Q::zero(); self.rows];
        for (r, c, a) in &self.entries {
            if !v[*c].is_zero() {
                out[*r] += a * &v[*c];
            }
        }
        out
    }

    /// Rank over the rationals, computed exactly.
    pub fn rank(&self) -> usize {
        echelon(self).rows.len()
    }

    /// Basis of the right kernel `{v : m·v = 0}`. The basis has exactly
    /// `cols − rank` vectors, one per free column in ascending column order;
    /// each vector is integral, content-free, and has a positive entry at its
    /// free column.
    pub fn kernel_basis(&self) -> Vec<Vec<Q>> {
        let ech = echelon(self);
        let pivot_cols: Vec<usize> = ech.rows.iter().map(|r| r.lead_col()).collect();
        let is_pivot = {
            let mut flags = vec![false; self.cols];
            for &c in &pivot_cols {
                flags[c] = true;
            }
            flags
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut v = vec![Q::zero(); self.cols];
            v[free] = Q::one();
            // Back-substitute pivot coordinates, last pivot first.
            for row in ech.rows.iter().rev() {
                let c = row.lead_col();
                let mut s = Q::zero();
                for (j, a) in &row.entries {
                    if *j > c && !v[*j].is_zero() {
                        s += Q::from_integer(a.clone()) * &v[*j];
                    }
                }
                v[c] = -s / Q::from_integer(row.entries[0].1.clone());
            }
            normalize_vector(&mut v);
            basis.push(v);
        }
        basis
    }

    /// `rows − rank`: the dimension of the cokernel.
    pub fn cokernel_dim(&self) -> usize {
        self.rows - self.rank()
    }

    /// Solves `m·x = b` exactly. Returns the solution with all free
    /// coordinates set to zero, or `None` if the system is inconsistent.
    pub fn solve(&self, b: &[Q]) -> Option<Vec<Q>> {
        assert_eq!(b.len(), self.rows, "right-hand side length mismatch");
        // Eliminate on the augmented matrix [m | b]; if the extra column ever
        // becomes a pivot the system is inconsistent.
        let aug = {
            let mut triplets: Vec<(usize, usize, Q)> = self.entries.clone();
            for (i, v) in b.iter().enumerate() {
                if !v.is_zero() {
                    triplets.push((i, self.cols, v.clone()));
                }
            }
            SparseMatrix::from_triplets(self.rows, self.cols + 1, triplets)
        };
        let ech = echelon(&aug);
        if ech.rows.iter().any(|r| r.lead_col() == self.cols) {
            return None;
        }
        let mut x = vec![Q::zero(); self.cols];
        for row in ech.rows.iter().rev() {
            let c = row.lead_col();
            let mut s = Q::zero();
            for (j, a) in &row.entries[1..] {
                let contribution = if *j == self.cols {
                    // Augmented column: moves to the right-hand side.
                    -Q::from_integer(a.clone())
                } else if !x[*j].is_zero() {
                    Q::from_integer(a.clone()) * &x[*j]
                } else {
                    continue;
                };
                s += contribution;
            }
            x[c] = -s / Q::from_integer(row.entries[0].1.clone());
        }
        Some(x)
    }
}

/// Clears denominators, divides by the content, and makes the first nonzero
/// entry positive. No-op on the zero vector.
fn normalize_vector(v: &mut [Q]) {
    let mut lcm = BigInt::one();
    for x in v.iter() {
        if !x.is_zero() {
            lcm = lcm.lcm(x.denom());
        }
    }
    let mut ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&lcm / x.denom()))
        .collect();
    let mut gcd = BigInt::zero();
    for a in &ints {
        gcd = gcd.gcd(a);
    }
    if gcd.is_zero() {
        return;
    }
    if let Some(first) = ints.iter().find(|a| !a.is_zero()) {
        if first.is_negative() {
            gcd = -gcd;
        }
    }
    for a in &mut ints {
        *a = &*a / &gcd;
    }
    for (slot, a) in v.iter_mut().zip(ints) {
        *slot = Q::from_integer(a);
    }
}

/// An integer row of an echelon form: sorted `(col, coeff)` entries, first
/// entry is the leading one.
#[derive(Clone, Debug)]
struct IntRow {
    entries: Vec<(usize, BigInt)>,
}

impl IntRow {
    fn lead_col(&self) -> usize {
        self.entries[0].0
    }

    /// Divides by the content and flips signs so the leading coefficient is
    /// positive.
    fn normalize(&mut self) {
        let mut gcd = BigInt::zero();
        for (_, a) in &self.entries {
            gcd = gcd.gcd(a);
        }
        if self.entries[0].1.is_negative() {
            gcd = -gcd;
        }
        if !gcd.is_one() {
            for (_, a) in &mut self.entries {
                *a = &*a / &gcd;
            }
        }
    }
}

struct Echelon {
    /// Rows with pairwise distinct leading columns, sorted by leading column.
    rows: Vec<IntRow>,
}

/// Fraction-free forward elimination.
fn echelon(m: &SparseMatrix) -> Echelon {
    // Scale each row to a content-free integer row.
    let mut active: Vec<(usize, IntRow)> = Vec::new();
    {
        let mut per_row: Vec<Vec<(usize, Q)>> = vec![Vec::new(); m.rows];
        for (r, c, v) in &m.entries {
            per_row[*r].push((*c, v.clone()));
        }
        for (idx, row) in per_row.into_iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            let mut lcm = BigInt::one();
            for (_, v) in &row {
                lcm = lcm.lcm(v.denom());
            }
            let mut int_row = IntRow {
                entries: row
                    .into_iter()
                    .map(|(c, v)| (c, v.numer() * (&lcm / v.denom())))
                    .collect(),
            };
            int_row.normalize();
            active.push((idx, int_row));
        }
    }

    let mut done: Vec<IntRow> = Vec::new();
    while !active.is_empty() {
        // Pivot: smallest leading column, then fewest entries, then row index.
        let pivot_col = active.iter().map(|(_, r)| r.lead_col()).min().unwrap();
        let pivot_pos = active
            .iter()
            .enumerate()
            .filter(|(_, (_, r))| r.lead_col() == pivot_col)
            .min_by_key(|(_, (idx, r))| (r.entries.len(), *idx))
            .map(|(pos, _)| pos)
            .unwrap();
        let (_, pivot_row) = active.remove(pivot_pos);
        let p = pivot_row.entries[0].1.clone();

        let mut next_active = Vec::with_capacity(active.len());
        for (idx, row) in active {
            if row.lead_col() != pivot_col {
                next_active.push((idx, row));
                continue;
            }
            // row := p·row − q·pivot_row, integer cross-multiplication.
            let q = row.entries[0].1.clone();
            let mut merged: Vec<(usize, BigInt)> = Vec::with_capacity(
                row.entries.len() + pivot_row.entries.len(),
            );
            let (mut i, mut j) = (0, 0);
            while i < row.entries.len() || j < pivot_row.entries.len() {
                let from_row = i < row.entries.len();
                let from_pivot = j < pivot_row.entries.len();
                let take_row = from_row
                    && (!from_pivot || row.entries[i].0 <= pivot_row.entries[j].0);
                let take_pivot = from_pivot
                    && (!from_row || pivot_row.entries[j].0 <= row.entries[i].0);
                let (col, val) = match (take_row, take_pivot) {
                    (true, true) => {
                        let col = row.entries[i].0;
                        let val = &p * &row.entries[i].1 - &q * &pivot_row.entries[j].1;
                        i += 1;
                        j += 1;
                        (col, val)
                    }
                    (true, false) => {
                        let col = row.entries[i].0;
                        let val = &p * &row.entries[i].1;
                        i += 1;
                        (col, val)
                    }
                    (false, true) => {
                        let col = pivot_row.entries[j].0;
                        let val = -(&q * &pivot_row.entries[j].1);
                        j += 1;
                        (col, val)
                    }
                    (false, false) => unreachable!(),
                };
                if !val.is_zero() {
                    merged.push((col, val));
                }
            }
            if !merged.is_empty() {
                let mut new_row = IntRow { entries: merged };
                new_row.normalize();
                next_active.push((idx, new_row));
            }
        }
        active = next_active;
        done.push(pivot_row);
    }
    done.sort_by_key(|r| r.lead_col());
    Echelon { rows: done }
}

/// Canonical reduction against a subspace `W ⊆ Q^dim` given by a spanning
/// set. Precomputes the reduced row-echelon form of the span; afterwards
/// every vector has a unique representative supported on the non-pivot
/// ("complement") coordinates, which form a basis of the quotient `Q^dim/W`.
#[derive(Clone, Debug)]
pub struct SubspaceReducer {
    dim: usize,
    /// Fully reduced rational echelon rows, sorted by leading column; each
    /// row has leading coefficient 1 and zeros above/below other pivots.
    rref: Vec<Vec<(usize, Q)>>,
    pivot_cols: Vec<usize>,
    complement: Vec<usize>,
}

impl SubspaceReducer {
    /// `spanning[k]` lists the `(index, value)` pairs of the k-th spanning
    /// vector.
    pub fn new(dim: usize, spanning: &[Vec<(usize, Q)>]) -> Self {
        let m = SparseMatrix::from_triplets(
            spanning.len(),
            dim,
            spanning
                .iter()
                .enumerate()
                .flat_map(|(r, v)| v.iter().map(move |(c, x)| (r, *c, x.clone()))),
        );
        let ech = echelon(&m);
        // Turn the integer echelon into a reduced rational one.
        let mut rref: Vec<Vec<(usize, Q)>> = ech
            .rows
            .iter()
            .map(|row| {
                let lead = Q::from_integer(row.entries[0].1.clone());
                row.entries
                    .iter()
                    .map(|(c, a)| (*c, Q::from_integer(a.clone()) / &lead))
                    .collect()
            })
            .collect();
        // Eliminate above the pivots, last pivot first.
        for k in (0..rref.len()).rev() {
            let (col, row_k) = (rref[k][0].0, rref[k].clone());
            for upper in rref.iter_mut().take(k) {
                let coeff = upper
                    .iter()
                    .find(|(c, _)| *c == col)
                    .map(|(_, x)| x.clone());
                if let Some(coeff) = coeff {
                    let mut merged: std::collections::BTreeMap<usize, Q> =
                        upper.iter().cloned().collect();
                    for (c, x) in &row_k {
                        let slot = merged.entry(*c).or_insert_with(Q::zero);
                        *slot -= &coeff * x;
                    }
                    *upper = merged.into_iter().filter(|(_, x)| !x.is_zero()).collect();
                }
            }
        }
        let pivot_cols: Vec<usize> = rref.iter().map(|r| r[0].0).collect();
        let mut is_pivot = vec![false; dim];
        for &c in &pivot_cols {
            is_pivot[c] = true;
        }
        let complement = (0..dim).filter(|&c| !is_pivot[c]).collect();
        SubspaceReducer { dim, rref, pivot_cols, complement }
    }

    pub fn subspace_dim(&self) -> usize {
        self.pivot_cols.len()
    }

    /// Indices forming a basis of the quotient space.
    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    /// The canonical representative of `v` modulo the subspace, supported on
    /// the complement indices.
    pub fn reduce(&self, v: &[Q]) -> Vec<Q> {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        let mut w = v.to_vec();
        for row in &self.rref {
            let c = row[0].0;
            if w[c].is_zero() {
                continue;
            }
            let coeff = w[c].clone();
            for (j, x) in row {
                w[*j] -= &coeff * x;
            }
        }
        w
    }

    /// Whether `v` lies in the subspace.
    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: usize, cols: usize, data: &[i64]) -> SparseMatrix {
        assert_eq!(data.len(), rows * cols);
        SparseMatrix::from_triplets(
            rows,
            cols,
            data.iter()
                .enumerate()
                .map(|(k, &v)| (k / cols, k % cols, qi(v))),
        )
    }

    #[test]
    fn identity_has_full_rank() {
        assert_eq!(SparseMatrix::identity(3).rank(), 3);
        assert_eq!(SparseMatrix::identity(3).cokernel_dim(), 0);
    }

    #[test]
    fn rank_one_matrix() {
        let m = dense(2, 2, &[1, 1, 1, 1]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_of_zero_matrix() {
        let m = SparseMatrix::zero(2, 2);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(m.mul_vec(v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn kernel_of_rank_one_matrix() {
        let m = dense(2, 2, &[1, 1, 1, 1]);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0], vec![qi(1), qi(-1)]);
        assert!(m.mul_vec(&basis[0]).iter().all(|x| x.is_zero()));
    }

    // The x-degree −1 component of the quotient of the one-variable operator
    // algebra by the left ideal generated by x³ has basis {∂, x∂², x²∂³};
    // the bracket with x³ sends these to −3x², −6x², −6x² respectively
    // (expanded by hand), landing in the one-dimensional degree-2 component.
    #[test]
    fn bracket_block_has_rank_one() {
        let m = dense(1, 3, &[-3, -6, -6]);
        assert_eq!(m.rank(), 1);
        assert_eq!(m.kernel_basis().len(), 2);
    }

    // For the quotient by x² the degree-0 component {1, x∂} maps into the
    // degree-2 component, which is empty; the kernel is everything.
    #[test]
    fn degenerate_block_kernel() {
        let m = SparseMatrix::zero(0, 2);
        assert_eq!(m.rank(), 0);
        assert_eq!(m.kernel_basis().len(), 2);
    }

    #[test]
    fn cokernel_of_wide_zero_matrix() {
        assert_eq!(SparseMatrix::zero(1, 2).cokernel_dim(), 1);
    }

    #[test]
    fn rank_with_rational_entries() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            vec![
                (0, 0, qr(1, 2)),
                (0, 1, qr(1, 3)),
                (1, 0, qr(3, 2)),
                (1, 1, qi(1)),
            ],
        );
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn solve_unique_system() {
        // [1 2; 3 4]·x = (5, 6) → x = (−4, 9/2)
        let m = dense(2, 2, &[1, 2, 3, 4]);
        let x = m.solve(&[qi(5), qi(6)]).unwrap();
        assert_eq!(x, vec![qi(-4), qr(9, 2)]);
        assert_eq!(m.mul_vec(&x), vec![qi(5), qi(6)]);
    }

    #[test]
    fn solve_underdetermined_puts_free_vars_to_zero() {
        let m = dense(1, 2, &[2, 2]);
        let x = m.solve(&[qi(4)]).unwrap();
        assert_eq!(x, vec![qi(2), qi(0)]);
    }

    #[test]
    fn solve_inconsistent_system() {
        let m = dense(2, 1, &[1, 1]);
        assert!(m.solve(&[qi(1), qi(2)]).is_none());
    }

    #[test]
    fn reducer_produces_complement_representatives() {
        // W = span{(1,1,0), (0,0,1)} inside Q³: complement = {index 1}.
        let red = SubspaceReducer::new(
            3,
            &[vec![(0, qi(1)), (1, qi(1))], vec![(2, qi(1))]],
        );
        assert_eq!(red.subspace_dim(), 2);
        assert_eq!(red.complement(), &[1]);
        let r = red.reduce(&[qi(3), qi(5), qi(7)]);
        assert_eq!(r, vec![qi(0), qi(2), qi(0)]);
        assert!(red.contains(&[qi(2), qi(2), qi(-1)]));
        assert!(!red.contains(&[qi(0), qi(1), qi(0)]));
    }

    #[test]
    fn kernel_vectors_satisfy_matrix_equation() {
        let m = dense(
            3,
            5,
            &[
                1, 2, 0, -1, 3, //
                0, 1, 1, 1, 0, //
                1, 3, 1, 0, 3,
            ],
        );
        assert_eq!(m.rank(), 2);
        let basis = m.kernel_basis();
        assert_eq!(basis.len(), 3);
        for v in &basis {
            assert!(m.mul_vec(v).iter().all(|x| x.is_zero()), "m·v ≠ 0");
        }
    }
}
