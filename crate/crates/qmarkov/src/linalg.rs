//! Dense complex linear algebra shared by every module.
//!
//! Matrices are `ndarray::Array2` over a [`ChanScalar`]; subspaces of the
//! Hilbert–Schmidt space are plain `Vec`s of orthonormal vectors or matrices.
//! Vectorization is fixed once and for all to column stacking, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Inverse, SVD, UPLO};
use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::scalar::ChanScalar;

pub fn eye<A: ChanScalar>(n: usize) -> Array2<A> {
    Array2::eye(n)
}

/// Copy into standard (row-major) layout before handing a matrix to the
/// LAPACK-backed routines: their results are layout-sensitive, and products
/// or adjoints of owned arrays routinely come out column-major.
fn lapack_ready<A: ChanScalar>(m: &Array2<A>) -> Array2<A> {
    m.as_standard_layout().into_owned()
}

pub fn adjoint<A: ChanScalar>(m: &Array2<A>) -> Array2<A> {
    m.t().mapv(|z| z.conj())
}

pub fn trace<A: ChanScalar>(m: &Array2<A>) -> A {
    m.diag().sum()
}

/// Hilbert–Schmidt inner product `tr(a† b)`, conjugate-linear in `a`.
pub fn hs_dot<A: ChanScalar>(a: &Array2<A>, b: &Array2<A>) -> A {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * *y).sum()
}

/// Conjugating dot product of flat vectors.
pub fn vdot<A: ChanScalar>(a: &Array1<A>, b: &Array1<A>) -> A {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * *y).sum()
}

pub fn fro_norm<A: ChanScalar>(m: &Array2<A>) -> A::Real {
    Float::sqrt(m.iter().map(|z| z.square()).sum::<A::Real>())
}

pub fn vec_norm<A: ChanScalar>(v: &Array1<A>) -> A::Real {
    Float::sqrt(v.iter().map(|z| z.square()).sum::<A::Real>())
}

/// Largest singular value.
pub fn op_norm<A: ChanScalar>(m: &Array2<A>) -> A::Real {
    let (_, s, _) = lapack_ready(m)
        .svd(false, false)
        .expect("svd failed in op_norm");
    s.iter().copied().fold(A::Real::zero(), A::Real::max)
}

/// Sum of singular values (Schatten 1-norm).
pub fn trace_norm<A: ChanScalar>(m: &Array2<A>) -> A::Real {
    let (_, s, _) = lapack_ready(m)
        .svd(false, false)
        .expect("svd failed in trace_norm");
    s.sum()
}

pub fn kron<A: ChanScalar>(a: &Array2<A>, b: &Array2<A>) -> Array2<A> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Column-stacking vectorization.
pub fn vec_col<A: ChanScalar>(m: &Array2<A>) -> Array1<A> {
    let (rows, cols) = m.dim();
    let mut out = Array1::zeros(rows * cols);
    for j in 0..cols {
        for i in 0..rows {
            out[j * rows + i] = m[(i, j)];
        }
    }
    out
}

/// Inverse of [`vec_col`] for square matrices.
pub fn unvec_col<A: ChanScalar>(v: &Array1<A>, rows: usize) -> Array2<A> {
    let cols = v.len() / rows;
    let mut out = Array2::zeros((rows, cols));
    for j in 0..cols {
        for i in 0..rows {
            out[(i, j)] = v[j * rows + i];
        }
    }
    out
}

pub fn matrix_unit<A: ChanScalar>(n: usize, i: usize, j: usize) -> Array2<A> {
    let mut m = Array2::zeros((n, n));
    m[(i, j)] = A::one();
    m
}

/// Matrix units `e_ij` in row-major order, an orthonormal basis of the
/// Hilbert–Schmidt space.
pub fn matrix_unit_basis<A: ChanScalar>(n: usize) -> Vec<Array2<A>> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(matrix_unit(n, i, j));
        }
    }
    out
}

/// Hermitian orthonormal basis (generalized Gell-Mann matrices plus the
/// normalized identity).
pub fn hermitian_basis<A: ChanScalar>(n: usize) -> Vec<Array2<A>> {
    let mut out = Vec::with_capacity(n * n);
    let inv_sqrt_n = A::real(1.0) / Float::sqrt(A::real(n as f64));
    out.push(eye::<A>(n) * A::from_real(inv_sqrt_n));
    for k in 1..n {
        let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut m = Array2::zeros((n, n));
        for i in 0..k {
            m[(i, i)] = A::real(norm);
        }
        m[(k, k)] = A::real(-(k as f64) * norm);
        out.push(m.mapv(|z: A::Real| A::from_real(z)));
    }
    let s = A::real(std::f64::consts::FRAC_1_SQRT_2);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut re = Array2::zeros((n, n));
            re[(i, j)] = A::from_real(s);
            re[(j, i)] = A::from_real(s);
            out.push(re);
            let mut im = Array2::zeros((n, n));
            im[(i, j)] = A::complex(0.0, -1.0) * A::from_real(s);
            im[(j, i)] = A::complex(0.0, 1.0) * A::from_real(s);
            out.push(im);
        }
    }
    out
}

/// Hermitian eigendecomposition, eigenvalues ascending, eigenvectors in
/// columns. The backend solves the transposed problem on row-major input,
/// so the eigenvector matrix comes back conjugated; undo that here and keep
/// every caller on the standard convention.
pub fn eigh_herm<A: ChanScalar>(h: &Array2<A>) -> Result<(Array1<A::Real>, Array2<A>)> {
    let (w, v) = lapack_ready(h).eigh(UPLO::Lower)?;
    Ok((w, v.mapv(|z| z.conj())))
}

pub fn min_eig_herm<A: ChanScalar>(h: &Array2<A>) -> Result<A::Real> {
    let (w, _) = eigh_herm(h)?;
    Ok(w.iter().copied().fold(A::Real::infinity(), A::Real::min))
}

/// Apply a real function to a Hermitian matrix through its spectrum.
pub fn herm_func<A, F>(h: &Array2<A>, f: F) -> Result<Array2<A>>
where
    A: ChanScalar,
    F: Fn(A::Real) -> A::Real,
{
    let (w, v) = eigh_herm(h)?;
    let n = h.nrows();
    let mut out = Array2::zeros((n, n));
    for (k, lam) in w.iter().enumerate() {
        let fk = A::from_real(f(*lam));
        let col = v.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += fk * col[i] * col[j].conj();
            }
        }
    }
    Ok(out)
}

/// Principal square root of a PSD matrix (negative tail clipped at zero).
pub fn psd_sqrt<A: ChanScalar>(h: &Array2<A>) -> Result<Array2<A>> {
    herm_func(h, |x| Float::sqrt(x.max(A::Real::zero())))
}

/// Full eigendecomposition of a general complex matrix.
pub fn eig_general<A: ChanScalar>(m: &Array2<A>) -> Result<(Array1<A>, Array2<A>)> {
    let (w, v) = lapack_ready(m).eig()?;
    Ok((w, v))
}

pub fn inverse<A: ChanScalar>(m: &Array2<A>) -> Result<Array2<A>> {
    Ok(lapack_ready(m).inv()?)
}

/// Orthonormal basis of `ker(m)`: right singular vectors whose singular value
/// is at most `tol`.
pub fn null_space<A: ChanScalar>(m: &Array2<A>, tol: f64) -> Result<Vec<Array1<A>>> {
    let cols = m.ncols();
    let (_, s, vt) = lapack_ready(m).svd(false, true)?;
    let vt = vt.expect("svd requested vt");
    let tol = A::real(tol);
    let mut out = Vec::new();
    for k in 0..cols {
        let sigma = if k < s.len() { s[k] } else { A::Real::zero() };
        if sigma <= tol {
            out.push(vt.row(k).mapv(|z| z.conj()));
        }
    }
    Ok(out)
}

/// Modified Gram–Schmidt with a re-orthogonalization pass; vectors whose
/// residual norm falls below `drop_tol` are discarded.
pub fn orthonormalize<A: ChanScalar>(vecs: &[Array1<A>], drop_tol: f64) -> Vec<Array1<A>> {
    let mut basis: Vec<Array1<A>> = Vec::new();
    let drop = A::real(drop_tol);
    for v in vecs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = vdot(b, &w);
                w = &w - &(b * c);
            }
        }
        let n = vec_norm(&w);
        if n > drop {
            basis.push(w / A::from_real(n));
        }
    }
    basis
}

/// Matrix-space counterpart of [`orthonormalize`].
pub fn orthonormalize_mats<A: ChanScalar>(mats: &[Array2<A>], drop_tol: f64) -> Vec<Array2<A>> {
    if mats.is_empty() {
        return Vec::new();
    }
    let rows = mats[0].nrows();
    let flat: Vec<Array1<A>> = mats.iter().map(vec_col).collect();
    orthonormalize(&flat, drop_tol)
        .into_iter()
        .map(|v| unvec_col(&v, rows))
        .collect()
}

/// Distance from `x` to the span of an orthonormal set.
pub fn residual_to_span<A: ChanScalar>(basis: &[Array1<A>], x: &Array1<A>) -> A::Real {
    let mut r = x.clone();
    for b in basis {
        let c = vdot(b, &r);
        r = &r - &(b * c);
    }
    vec_norm(&r)
}

pub fn residual_to_span_mats<A: ChanScalar>(basis: &[Array2<A>], x: &Array2<A>) -> A::Real {
    let flat: Vec<Array1<A>> = basis.iter().map(vec_col).collect();
    residual_to_span(&flat, &vec_col(x))
}

/// Largest residual of any `b`-element against the span of `a`.
pub fn span_containment_defect<A: ChanScalar>(a: &[Array2<A>], b: &[Array2<A>]) -> A::Real {
    b.iter()
        .map(|x| {
            let nx = fro_norm(x);
            let r = residual_to_span_mats(a, x);
            if nx > A::Real::zero() {
                r / nx
            } else {
                A::Real::zero()
            }
        })
        .fold(A::Real::zero(), A::Real::max)
}

pub fn spans_equal<A: ChanScalar>(a: &[Array2<A>], b: &[Array2<A>], tol: f64) -> bool {
    a.len() == b.len()
        && span_containment_defect(a, b) <= A::real(tol)
        && span_containment_defect(b, a) <= A::real(tol)
}

fn stack_columns<A: ChanScalar>(vecs: &[Array1<A>]) -> Array2<A> {
    let rows = vecs.first().map(|v| v.len()).unwrap_or(0);
    let mut m = Array2::zeros((rows, vecs.len()));
    for (j, v) in vecs.iter().enumerate() {
        for i in 0..rows {
            m[(i, j)] = v[i];
        }
    }
    m
}

/// Intersection of two subspaces given by orthonormal bases; a canonical
/// correlation above `1 − gap_tol` counts as a shared direction.
pub fn intersect_spans<A: ChanScalar>(
    a: &[Array1<A>],
    b: &[Array1<A>],
    gap_tol: f64,
) -> Result<Vec<Array1<A>>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let ma = stack_columns(a);
    let mb = stack_columns(b);
    let cross = adjoint(&ma).dot(&mb);
    let (u, s, _) = lapack_ready(&cross).svd(true, false)?;
    let u = u.expect("svd requested u");
    let thresh = A::real(1.0 - gap_tol);
    let mut out = Vec::new();
    for (k, sigma) in s.iter().enumerate() {
        if *sigma > thresh {
            let coeffs = u.column(k);
            let mut v = Array1::zeros(a[0].len());
            for (i, basis_vec) in a.iter().enumerate() {
                v = &v + &(basis_vec * coeffs[i]);
            }
            out.push(v);
        }
    }
    Ok(orthonormalize(&out, 1e-12))
}

pub fn intersect_spans_mats<A: ChanScalar>(
    a: &[Array2<A>],
    b: &[Array2<A>],
    gap_tol: f64,
) -> Result<Vec<Array2<A>>> {
    if a.is_empty() || b.is_empty() {
        return Ok(Vec::new());
    }
    let rows = a[0].nrows();
    let fa: Vec<Array1<A>> = a.iter().map(vec_col).collect();
    let fb: Vec<Array1<A>> = b.iter().map(vec_col).collect();
    Ok(intersect_spans(&fa, &fb, gap_tol)?
        .into_iter()
        .map(|v| unvec_col(&v, rows))
        .collect())
}

/// Spectral (oblique) projector onto the eigenvalue-1 eigenspace of a
/// power-bounded map given as a matrix. Uses right and left kernels of
/// `m − 1`; the eigenvalue is assumed semisimple, which holds for the
/// superoperators handled here.
pub fn fixed_point_projector<A: ChanScalar>(m: &Array2<A>, tol: f64) -> Result<Array2<A>> {
    let n = m.nrows();
    let shifted = m - &eye::<A>(n);
    let right = null_space(&shifted, tol)?;
    let left = null_space(&adjoint(&shifted), tol)?;
    if right.is_empty() || right.len() != left.len() {
        return Err(Error::Eigensolver(format!(
            "fixed space dimensions disagree: right {} left {}",
            right.len(),
            left.len()
        )));
    }
    let k = stack_columns(&right);
    let l = stack_columns(&left);
    let small = adjoint(&l).dot(&k);
    let small_inv = inverse(&small)?;
    Ok(k.dot(&small_inv).dot(&adjoint(&l)))
}
