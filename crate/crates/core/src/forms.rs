//! Constant-coefficient `(k,k)` forms on `C^n`.
//!
//! A form is stored through its Hermitian coefficient matrix `H` on
//! increasing `k`-multi-indices, in the basis
//! `e_IJ = (2 pi)^{-k} i^{k^2} dz_I ^ dzbar_J`, so that `e_II` is positive,
//! `beta = dd^c |z|^2 = sum_j e_jj` and `beta^n / n!` is `Lebesgue / pi^n`.
//! With this basis `e_IJ ^ e_{I'J'} = sign(I) sign(J) vol` where `I'` is the
//! complement of `I` and `sign(I)` the sign of the permutation `(I, I')`.

use nalgebra::DMatrix;

use crate::geometry::{Frame, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

pub type CMatrix = DMatrix<C64>;

/// Increasing `k`-subsets of `{0, .., n-1}` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

pub fn complement(subset: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|i| !subset.contains(i)).collect()
}

/// Sign of the permutation listing `subset` first and its complement after.
pub fn subset_sign(subset: &[usize]) -> f64 {
    let inversions: usize = subset.iter().enumerate().map(|(j, &i)| i - j).sum();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Determinant of a `k x k` row-major matrix by LU with partial pivoting.
/// The input is overwritten.
pub fn det_in_place(m: &mut [C64], k: usize) -> C64 {
    let mut d = C64::new(1.0, 0.0);
    for col in 0..k {
        let mut piv = col;
        let mut best = m[col * k + col].norm_sqr();
        for row in col + 1..k {
            let v = m[row * k + col].norm_sqr();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return ZERO;
        }
        if piv != col {
            for j in 0..k {
                m.swap(col * k + j, piv * k + j);
            }
            d = -d;
        }
        let p = m[col * k + col];
        d *= p;
        for row in col + 1..k {
            let f = m[row * k + col] / p;
            if f != ZERO {
                for j in col + 1..k {
                    let v = m[col * k + j];
                    m[row * k + j] -= f * v;
                }
            }
        }
    }
    d
}

/// Determinant of the submatrix of `a` on `rows x cols`.
pub fn minor(a: &CMatrix, rows: &[usize], cols: &[usize]) -> C64 {
    let k = rows.len();
    let mut buf: Vec<C64> = Vec::with_capacity(k * k);
    for &r in rows {
        for &c in cols {
            buf.push(a[(r, c)]);
        }
    }
    det_in_place(&mut buf, k)
}

/// The `k`-th compound of an `n x q` frame: entry `(I, M)` is the minor on
/// rows `I` and columns `M`.
pub fn compound(frame: &Frame, k: usize) -> CMatrix {
    let n = frame.ambient_dim();
    let q = frame.sub_dim();
    let f = CMatrix::from_fn(n, q, |i, j| frame.entry(i, j));
    let rows = k_subsets(n, k);
    let cols = k_subsets(q, k);
    CMatrix::from_fn(rows.len(), cols.len(), |a, b| minor(&f, &rows[a], &cols[b]))
}

/// Coefficients of the pullback of a `(k,k)` form through `z = F w`:
/// `H' = C^T H conj(C)` with `C` the `k`-th compound of `F`.
pub fn pullback_coefficients(h: &CMatrix, frame: &Frame, k: usize) -> CMatrix {
    let c = compound(frame, k);
    c.transpose() * h * c.map(|x| x.conj())
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(h: &CMatrix) -> f64 {
    if h.nrows() == 0 {
        return 0.0;
    }
    let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Index bookkeeping for wedging `(k,k)` forms against `n-k` forms of
/// bidegree `(1,1)` on `C^n`.
#[derive(Debug, Clone)]
pub struct WedgeBasis {
    n: usize,
    k: usize,
    /// `k`-subsets, the row/column labels of `H`.
    subsets: Vec<Vec<usize>>,
    /// `(n-k)`-subsets.
    co_subsets: Vec<Vec<usize>>,
    /// For each `k`-subset: position of its complement in `co_subsets`.
    complement_pos: Vec<usize>,
    sign: Vec<f64>,
}

impl WedgeBasis {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(k <= n, "bidegree exceeds dimension");
        let subsets = k_subsets(n, k);
        let co_subsets = k_subsets(n, n - k);
        let complement_pos = subsets
            .iter()
            .map(|s| {
                let c = complement(s, n);
                co_subsets.iter().position(|x| *x == c).expect("complement present")
            })
            .collect();
        let sign = subsets.iter().map(|s| subset_sign(s)).collect();
        WedgeBasis {
            n,
            k,
            subsets,
            co_subsets,
            complement_pos,
            sign,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Coefficients `P_KL` of `A_1 ^ .. ^ A_p` on `(p,p)` multi-indices, where
    /// `A_j` are `(1,1)` forms given by their `n x n` matrices in the basis
    /// `e_jk`. Uses the polarization identity
    /// `P_KL = sum_S (-1)^{p-|S|} det((sum_{j in S} A_j)[K, L])`.
    pub fn wedge_ones(&self, factors: &[&CMatrix]) -> CMatrix {
        let p = factors.len();
        assert_eq!(p, self.n - self.k, "need n-k factors");
        let m = self.co_subsets.len();
        let mut out = CMatrix::zeros(m, m);
        // identical factors need a single determinant per entry
        if p > 0 && factors.iter().all(|a| *a == factors[0]) {
            let f = factorial(p);
            for (a, ka) in self.co_subsets.iter().enumerate() {
                for (b, kb) in self.co_subsets.iter().enumerate() {
                    out[(a, b)] = minor(factors[0], ka, kb) * f;
                }
            }
            return out;
        }
        self.wedge_ones_general(factors)
    }

    fn wedge_ones_general(&self, factors: &[&CMatrix]) -> CMatrix {
        let p = factors.len();
        let m = self.co_subsets.len();
        let mut out = CMatrix::zeros(m, m);
        for mask in 0u64..(1u64 << p) {
            let size = mask.count_ones() as usize;
            let sign = if (p - size) % 2 == 0 { 1.0 } else { -1.0 };
            let mut sum = CMatrix::zeros(self.n, self.n);
            for (j, a) in factors.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    sum += *a;
                }
            }
            for (a, ka) in self.co_subsets.iter().enumerate() {
                for (b, kb) in self.co_subsets.iter().enumerate() {
                    out[(a, b)] += minor(&sum, ka, kb) * sign;
                }
            }
        }
        out
    }

    /// Real coefficient `c` of `T ^ A_1 ^ .. ^ A_{n-k} = c vol`.
    pub fn top_coefficient(&self, h: &CMatrix, factors: &[&CMatrix]) -> f64 {
        let p = self.wedge_ones(factors);
        self.pair(h, &p)
    }

    /// `sum_IJ H_IJ sign(I) sign(J) P_{I'J'}`.
    pub fn pair(&self, h: &CMatrix, p: &CMatrix) -> f64 {
        let mut acc = ZERO;
        for a in 0..self.subsets.len() {
            for b in 0..self.subsets.len() {
                let hv = h[(a, b)];
                if hv == ZERO {
                    continue;
                }
                acc += hv * p[(self.complement_pos[a], self.complement_pos[b])]
                    * (self.sign[a] * self.sign[b]);
            }
        }
        acc.re
    }

    /// For covectors given as the columns of an `n x (n-k)` matrix `a`,
    /// the vector `u` with `u^* H u` proportional to
    /// `T ^ (i a_1 ^ conj a_1) ^ .. ^ (i a_p ^ conj a_p)`.
    pub fn decomposable_vector(&self, a: &CMatrix) -> Vec<C64> {
        let cols: Vec<usize> = (0..a.ncols()).collect();
        self.subsets
            .iter()
            .enumerate()
            .map(|(idx, _)| {
                let d = minor(a, &self.co_subsets[self.complement_pos[idx]], &cols);
                (d * self.sign[idx]).conj()
            })
            .collect()
    }
}

/// `u^* H u` (real part).
pub fn hermitian_form(h: &CMatrix, u: &[C64]) -> f64 {
    let mut acc = ZERO;
    for (a, ua) in u.iter().enumerate() {
        for (b, ub) in u.iter().enumerate() {
            acc += ua.conj() * h[(a, b)] * ub;
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_grassmannian;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn subsets_and_binomials() {
        assert_eq!(k_subsets(4, 2).len(), 6);
        assert_eq!(k_subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(k_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        for n in 0..7 {
            for k in 0..=n {
                assert_eq!(k_subsets(n, k).len(), binomial(n, k));
            }
        }
    }

    #[test]
    fn subset_signs() {
        assert_eq!(subset_sign(&[0]), 1.0);
        assert_eq!(subset_sign(&[1]), -1.0);
        assert_eq!(subset_sign(&[2]), 1.0);
        assert_eq!(subset_sign(&[1, 2]), 1.0);
        assert_eq!(subset_sign(&[0, 2]), -1.0);
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let m = [c(1.0, 1.0), c(2.0, 0.0), c(0.0, 3.0), c(1.0, -1.0), c(0.5, 0.0), c(2.0, 2.0), c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.5)];
        let e = |i: usize, j: usize| m[i * 3 + j];
        let expect = e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
        let mut buf = m;
        assert!((det_in_place(&mut buf, 3) - expect).norm() < 1e-12);
    }

    #[test]
    fn beta_power_top_coefficient_is_factorial() {
        // beta^n = n! vol
        for n in 1..5 {
            let basis = WedgeBasis::new(n, 0);
            let id = CMatrix::identity(n, n);
            let factors: Vec<&CMatrix> = (0..n).map(|_| &id).collect();
            let h = CMatrix::from_element(1, 1, c(1.0, 0.0));
            assert!((basis.top_coefficient(&h, &factors) - factorial(n)).abs() < 1e-9);
        }
    }

    #[test]
    fn polarization_matches_repeated_factor_shortcut() {
        let a = CMatrix::from_fn(3, 3, |i, j| if i == j { c(1.0 + i as f64, 0.0) } else { c(0.1, 0.2 * (i as f64 - j as f64)) });
        let basis = WedgeBasis::new(3, 1);
        let fast = basis.wedge_ones(&[&a, &a]);
        let slow = basis.wedge_ones_general(&[&a, &a]);
        assert!((fast - slow).norm() < 1e-9);
    }

    #[test]
    fn kahler_form_restricts_isometrically() {
        let basis_h = CMatrix::identity(2, 2);
        for f in sample_grassmannian(1, 2, 10, 3).unwrap() {
            let h = pullback_coefficients(&basis_h, &f, 1);
            assert!((h[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        }
        // (2,2) part of beta^2 / 2 on C^3 restricted to a plane
        let h = CMatrix::identity(3, 3);
        for f in sample_grassmannian(2, 3, 10, 4).unwrap() {
            let hp = pullback_coefficients(&h, &f, 2);
            assert!((hp[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn pullback_composes() {
        let h = CMatrix::from_fn(3, 3, |i, j| if i == j { c(2.0, 0.0) } else { c(0.3, if i < j { 0.1 } else { -0.1 }) });
        let f1 = &sample_grassmannian(2, 3, 1, 5).unwrap()[0];
        let f2 = &sample_grassmannian(1, 2, 1, 6).unwrap()[0];
        let twice = pullback_coefficients(&pullback_coefficients(&h, f1, 1), f2, 1);
        let once = pullback_coefficients(&h, &f1.compose(f2).unwrap(), 1);
        assert!((twice - once).norm() < 1e-12);
    }

    #[test]
    fn decomposable_vector_reproduces_wedge() {
        // T ^ (i a ^ conj a) for k = 1 on C^2 is proportional to u^* H u with u = conj(sign * a_{I'})
        let basis = WedgeBasis::new(2, 1);
        let a = CMatrix::from_column_slice(2, 1, &[c(0.3, 0.4), c(-1.0, 0.2)]);
        let h = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.2, 0.5), c(0.2, -0.5), c(2.0, 0.0)]);
        let u = basis.decomposable_vector(&a);
        let rank_one = &a * a.adjoint();
        let direct = basis.top_coefficient(&h, &[&rank_one]);
        assert!((hermitian_form(&h, &u) - direct).abs() < 1e-12);
    }

    #[test]
    fn min_eigenvalue_of_swap_matrix() {
        let h = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((min_hermitian_eigenvalue(&h) + 1.0).abs() < 1e-12);
    }
}
