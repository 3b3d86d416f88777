//! Finitely supported corrections `E = F G^T` kept in factored form.

use nalgebra::{DMatrix, DVector};

use crate::error::{CqtError, Result};
use crate::scalar::Scalar;
use crate::symbol::LaurentSymbol;

/// `E = F G^T`, where `F` has `rows()` rows and `G` has `cols()` rows; the
/// semi-infinite matrix is zero outside the leading `rows() x cols()` block.
#[derive(Clone, Debug, PartialEq)]
pub struct Correction<T: Scalar = f64> {
    f: DMatrix<T>,
    g: DMatrix<T>,
}

impl<T: Scalar> Correction<T> {
    pub fn new(f: DMatrix<T>, g: DMatrix<T>) -> Result<Self> {
        if f.ncols() != g.ncols() {
            return Err(CqtError::Layout(format!(
                "factor column counts differ: F has {}, G has {}",
                f.ncols(),
                g.ncols()
            )));
        }
        Ok(Self { f, g }.normalize_empty())
    }

    pub fn zero() -> Self {
        Self {
            f: DMatrix::zeros(0, 0),
            g: DMatrix::zeros(0, 0),
        }
    }

    /// Rank-one `s e_i e_j^T` (zero-based indices).
    pub fn unit(i: usize, j: usize, s: T) -> Self {
        let mut f = DMatrix::zeros(i + 1, 1);
        let mut g = DMatrix::zeros(j + 1, 1);
        f[(i, 0)] = s;
        g[(j, 0)] = T::one();
        Self { f, g }
    }

    /// Exact rank-revealing factorization of a dense block, compressed.
    pub fn from_dense(block: &DMatrix<T>, eps: f64) -> Self {
        let k = block.ncols();
        Self {
            f: block.clone(),
            g: DMatrix::identity(k, k),
        }
        .compress(eps)
    }

    fn normalize_empty(self) -> Self {
        if self.f.ncols() == 0 || self.f.nrows() == 0 || self.g.nrows() == 0 {
            Self::zero()
        } else {
            self
        }
    }

    pub fn f(&self) -> &DMatrix<T> {
        &self.f
    }

    pub fn g(&self) -> &DMatrix<T> {
        &self.g
    }

    /// Number of nonzero rows of `E`.
    pub fn rows(&self) -> usize {
        self.f.nrows()
    }

    /// Number of nonzero columns of `E`.
    pub fn cols(&self) -> usize {
        self.g.nrows()
    }

    pub fn rank(&self) -> usize {
        self.f.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    /// The leading `rows x cols` block of `E`.
    pub fn dense(&self, rows: usize, cols: usize) -> DMatrix<T> {
        let mut out = DMatrix::zeros(rows, cols);
        let (r, c) = (rows.min(self.rows()), cols.min(self.cols()));
        if self.rank() > 0 && r > 0 && c > 0 {
            let block = self.f.rows(0, r) * self.g.rows(0, c).transpose();
            out.view_mut((0, 0), (r, c)).copy_from(&block);
        }
        out
    }

    /// The full support block `F G^T`.
    pub fn to_dense(&self) -> DMatrix<T> {
        self.dense(self.rows(), self.cols())
    }

    /// `sum |e_ij|`.
    pub fn f_norm(&self) -> f64 {
        self.to_dense().iter().map(|e| e.modulus()).sum()
    }

    pub fn scale(&self, s: T) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Self {
            f: &self.f * s,
            g: self.g.clone(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            f: self.g.clone(),
            g: self.f.clone(),
        }
    }

    /// `[F1, F2] [G1, G2]^T = E1 + E2`.
    pub fn concat(&self, other: &Self) -> Self {
        concat_all(&[self, other])
    }

    /// Recompression by pivoted QR of both factors followed by an SVD of the
    /// small middle factor; singular values below `eps * sigma_1` are dropped.
    pub fn compress(&self, eps: f64) -> Self {
        self.compress_with_floor(eps, 0.0)
    }

    /// Like [`compress`](Self::compress), also dropping singular values below
    /// the absolute level `floor` (roundoff left over from cancellation).
    pub fn compress_with_floor(&self, eps: f64, floor: f64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let (qf, rf) = truncated_qr(&self.f, eps);
        let (qg, rg) = truncated_qr(&self.g, eps);
        if rf.nrows() == 0 || rg.nrows() == 0 {
            return Self::zero();
        }
        let (u, sigma, v) = jacobi_svd(&rf * rg.transpose());
        let s1 = sigma[0];
        let cut = (eps * s1).max(floor);
        let keep = sigma.iter().take_while(|&&s| s > 0.0 && s >= cut).count();
        if keep == 0 {
            return Self::zero();
        }
        let mut uf = u.columns(0, keep).into_owned();
        // E = F G^T with a plain transpose, so G picks up conj(V)
        let mut vg = v.columns(0, keep).map(|x| x.conjugate());
        for (c, s) in sigma.iter().take(keep).enumerate() {
            let root = T::of_real(s.sqrt());
            let mut uc = uf.column_mut(c);
            uc *= root;
            let mut vc = vg.column_mut(c);
            vc *= root;
        }
        let f = trim_trailing_rows(qf * uf, eps * s1.sqrt());
        let g = trim_trailing_rows(qg * vg, eps * s1.sqrt());
        Self { f, g }.normalize_empty()
    }
}

/// Column concatenation of several corrections.
pub fn concat_all<T: Scalar>(parts: &[&Correction<T>]) -> Correction<T> {
    let parts: Vec<_> = parts.iter().filter(|p| !p.is_zero()).collect();
    let rows = parts.iter().map(|p| p.rows()).max().unwrap_or(0);
    let cols = parts.iter().map(|p| p.cols()).max().unwrap_or(0);
    let k: usize = parts.iter().map(|p| p.rank()).sum();
    let mut f = DMatrix::zeros(rows, k);
    let mut g = DMatrix::zeros(cols, k);
    let mut at = 0;
    for p in parts {
        f.view_mut((0, at), (p.rows(), p.rank())).copy_from(&p.f);
        g.view_mut((0, at), (p.cols(), p.rank())).copy_from(&p.g);
        at += p.rank();
    }
    Correction { f, g }.normalize_empty()
}

/// Leading `rows_out` rows of `T(a) [M; 0]`.
pub fn toeplitz_apply<T: Scalar>(a: &LaurentSymbol<T>, m: &DMatrix<T>, rows_out: usize) -> DMatrix<T> {
    let (rows, k) = m.shape();
    let (nm, np) = (a.n_minus() as isize, a.n_plus() as isize);
    let mut out = DMatrix::zeros(rows_out, k);
    for i in 0..rows_out as isize {
        let lo = (i - nm).max(0);
        let hi = (i + np).min(rows as isize - 1);
        for j in lo..=hi {
            let t = a.coeff(j - i);
            if t.is_zero() {
                continue;
            }
            for c in 0..k {
                out[(i as usize, c)] += t * m[(j as usize, c)];
            }
        }
    }
    out
}

/// Zero-pads (or keeps) `m` to exactly `rows` rows.
pub(crate) fn pad_rows<T: Scalar>(m: &DMatrix<T>, rows: usize) -> DMatrix<T> {
    let mut out = DMatrix::zeros(rows, m.ncols());
    let r = rows.min(m.nrows());
    out.view_mut((0, 0), (r, m.ncols())).copy_from(&m.rows(0, r));
    out
}

/// Drops trailing rows while their joint Frobenius norm stays within `budget`.
fn trim_trailing_rows<T: Scalar>(m: DMatrix<T>, budget: f64) -> DMatrix<T> {
    let mut acc = 0.0;
    let mut keep = m.nrows();
    while keep > 0 {
        let r2: f64 = m.row(keep - 1).iter().map(|x| x.modulus_squared()).sum();
        if (acc + r2).sqrt() > budget {
            break;
        }
        acc += r2;
        keep -= 1;
    }
    m.rows(0, keep).into_owned()
}

/// Householder QR with pivoting on the largest remaining column norm.
/// Returns `(Q, R)` with `A ~ Q R` and the columns of `R` in their original
/// order. Stops once the unreduced block falls below `eps` times the largest
/// row of `R` so far; every later row of `R` would be at most that size.
fn truncated_qr<T: Scalar>(a: &DMatrix<T>, eps: f64) -> (DMatrix<T>, DMatrix<T>) {
    let (m, k) = a.shape();
    let p = m.min(k);
    let mut r = a.clone();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut reflectors: Vec<DVector<T>> = Vec::with_capacity(p);
    let mut max_row = 0.0f64;
    for i in 0..p {
        let norms: Vec<f64> = (i..k).map(|c| r.view((i, c), (m - i, 1)).norm_squared()).collect();
        let rest = norms.iter().sum::<f64>().sqrt();
        if rest == 0.0 || (i > 0 && rest <= eps * max_row) {
            break;
        }
        let best = i + norms.iter().enumerate().fold(0, |b, (j, &n)| if n > norms[b] { j } else { b });
        r.swap_columns(i, best);
        perm.swap(i, best);

        let mut v: DVector<T> = r.view((i, i), (m - i, 1)).column(0).into_owned();
        let norm = v.norm();
        let x0 = v[0];
        let phase = if x0.modulus() == 0.0 {
            T::one()
        } else {
            x0 / T::of_real(x0.modulus())
        };
        let alpha = -phase * T::of_real(norm);
        v[0] -= alpha;
        let vn = v.norm();
        v.iter_mut().for_each(|x| *x /= T::of_real(vn));
        apply_reflector(&mut r, &v, i, i);
        reflectors.push(v);
        max_row = max_row.max(r.view((i, i), (1, k - i)).norm());
    }
    let rank = reflectors.len();
    let mut q = DMatrix::<T>::identity(m, rank);
    for (i, v) in reflectors.iter().enumerate().rev() {
        apply_reflector(&mut q, v, i, 0);
    }
    let mut out = DMatrix::zeros(rank, k);
    for (c, &orig) in perm.iter().enumerate() {
        for i in 0..rank.min(c + 1) {
            out[(i, orig)] = r[(i, c)];
        }
    }
    (q, out)
}

/// One-sided Jacobi SVD `M = U diag(sigma) V^H`, singular values descending.
/// Accurate to roundoff relative to each singular value on small matrices,
/// including graded ones where bidiagonalization-based SVD loses digits.
fn jacobi_svd<T: Scalar>(m: DMatrix<T>) -> (DMatrix<T>, Vec<f64>, DMatrix<T>) {
    let n = m.ncols();
    let mut a = m;
    let mut v = DMatrix::<T>::identity(n, n);
    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.modulus();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate column q by the phase of gamma, then a real rotation
                let phase = gamma / T::of_real(g);
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for r in 0..mat.nrows() {
                        let xp = mat[(r, p)];
                        let xq = mat[(r, q)] * phase.conjugate();
                        mat[(r, p)] = xp * T::of_real(c) - xq * T::of_real(s);
                        mat[(r, q)] = xp * T::of_real(s) + xq * T::of_real(c);
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DMatrix::<T>::zeros(a.nrows(), n);
    let mut vs = DMatrix::<T>::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        sigma.push(norms[j]);
        if norms[j] > 0.0 {
            u.set_column(k, &(a.column(j) / T::of_real(norms[j])));
        }
        vs.set_column(k, &v.column(j));
    }
    (u, sigma, vs)
}

/// `A[row0.., col0..] <- (I - 2 v v^H) A[row0.., col0..]`.
fn apply_reflector<T: Scalar>(a: &mut DMatrix<T>, v: &DVector<T>, row0: usize, col0: usize) {
    let two = T::of_real(2.0);
    for c in col0..a.ncols() {
        let mut w = T::zero();
        for (t, vt) in v.iter().enumerate() {
            w += vt.conjugate() * a[(row0 + t, c)];
        }
        if w.is_zero() {
            continue;
        }
        for (t, &vt) in v.iter().enumerate() {
            a[(row0 + t, c)] -= two * vt * w;
        }
    }
}
