use nalgebra::{DMatrix, SymmetricEigen};

/// `(u, s, vt)` of a thin SVD.
pub(crate) type Svd = (DMatrix<f64>, Vec<f64>, DMatrix<f64>);

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
pub(crate) fn sym_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn is_diagonal(m: &DMatrix<f64>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix, dropping
/// eigenvalues at or below `rel_tol * max`.
pub(crate) fn psd_pinv(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let d = m.nrows();
    if is_diagonal(m) {
        let max = (0..d).map(|i| m[(i, i)]).fold(0.0, f64::max);
        return DMatrix::from_fn(d, d, |i, j| {
            let v = m[(i, i)];
            if i == j && v > rel_tol * max && v > 0.0 {
                1.0 / v
            } else {
                0.0
            }
        });
    }
    let (vals, vecs) = sym_eigen(m);
    let max = vals.last().copied().unwrap_or(0.0);
    let mut out = DMatrix::zeros(d, d);
    for (k, &v) in vals.iter().enumerate() {
        if v > rel_tol * max && v > 0.0 {
            let col = vecs.column(k);
            out += col * col.transpose() / v;
        }
    }
    out
}

/// Thin SVD `a = u diag(s) vt`, singular values descending.
///
/// The bidiagonal iteration in nalgebra occasionally stalls on nearly
/// rank-deficient tall matrices and returns a wrong spectrum, so tall inputs
/// are reduced by QR first and every candidate is checked by recomposition.
pub(crate) fn thin_svd(a: &DMatrix<f64>) -> Svd {
    let norm = a.norm();
    let residual = |(u, s, vt): &Svd| {
        let mut us = u.clone();
        for (k, sv) in s.iter().enumerate() {
            us.column_mut(k).scale_mut(*sv);
        }
        (us * vt - a).norm()
    };
    let mut best: Option<(Svd, f64)> = None;
    for candidate in [svd_via_qr, svd_via_transpose, svd_direct] {
        let c = candidate(a);
        let r = residual(&c);
        if r <= 1e-12 * norm.max(f64::MIN_POSITIVE) {
            return c;
        }
        if best.as_ref().is_none_or(|(_, b)| r < *b) {
            best = Some((c, r));
        }
    }
    let (c, r) = best.expect("at least one candidate");
    log::warn!("SVD recomposition residual {r:e} relative to norm {norm:e}");
    c
}

fn sorted(u: DMatrix<f64>, s: &[f64], vt: DMatrix<f64>) -> Svd {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let vt = DMatrix::from_fn(order.len(), vt.ncols(), |r, c| vt[(order[r], c)]);
    (u, order.iter().map(|&i| s[i]).collect(), vt)
}

fn svd_direct(a: &DMatrix<f64>) -> Svd {
    let svd = a.clone().svd(true, true);
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    sorted(svd.u.expect("u requested"), &s, svd.v_t.expect("v_t requested"))
}

fn svd_via_transpose(a: &DMatrix<f64>) -> Svd {
    let (u, s, vt) = svd_direct(&a.transpose());
    (vt.transpose(), s, u.transpose())
}

fn svd_via_qr(a: &DMatrix<f64>) -> Svd {
    if a.nrows() < a.ncols() {
        let (u, s, vt) = svd_via_qr(&a.transpose());
        return (vt.transpose(), s, u.transpose());
    }
    let qr = a.clone().qr();
    let (u, s, vt) = svd_direct(&qr.r());
    (qr.q() * u, s, vt)
}
