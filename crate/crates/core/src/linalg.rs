//! Small dense solvers used by the closed-form fits.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Solves `A X = B` for symmetric positive definite `A` (Cholesky).
pub fn cholesky_solve(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(Error::DimensionMismatch { axis: "normal matrix rows", expected: n, found: b.nrows() });
    }
    let mut l = Array2::<f64>::zeros((n, n));
    let scale = a.diag().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= l[[j, k]] * l[[j, k]];
        }
        if !(diag > 1e-14 * scale) {
            return Err(Error::Singular(format!("matrix is not positive definite at pivot {j}")));
        }
        let d = diag.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    let mut x = b.to_owned();
    for mut col in x.axis_iter_mut(Axis(1)) {
        for i in 0..n {
            let mut s = col[i];
            for k in 0..i {
                s -= l[[i, k]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in (i + 1)..n {
                s -= l[[k, i]] * col[k];
            }
            col[i] = s / l[[i, i]];
        }
    }
    Ok(x)
}

/// Least-squares solution of `min ||A x - b||` by Householder QR.
pub fn lstsq(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<Array1<f64>> {
    let (m, n) = a.dim();
    if b.len() != m {
        return Err(Error::DimensionMismatch { axis: "least-squares rows", expected: m, found: b.len() });
    }
    if m < n {
        return Err(Error::Singular(format!("underdetermined system ({m} rows, {n} unknowns)")));
    }
    let mut r = a.to_owned();
    let mut rhs = b.to_owned();
    let col_scale = (0..n).map(|j| r.column(j).dot(&r.column(j)).sqrt()).fold(0.0_f64, f64::max);
    for k in 0..n {
        let norm = r.slice(ndarray::s![k.., k]).dot(&r.slice(ndarray::s![k.., k])).sqrt();
        if norm <= 1e-13 * col_scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Singular(format!("rank deficient at column {k}")));
        }
        let alpha = if r[[k, k]] > 0.0 { -norm } else { norm };
        let mut v = r.slice(ndarray::s![k.., k]).to_owned();
        v[0] -= alpha;
        let vnorm2 = v.dot(&v);
        if vnorm2 > 0.0 {
            for j in k..n {
                let proj = 2.0 * v.dot(&r.slice(ndarray::s![k.., j])) / vnorm2;
                let mut col = r.slice_mut(ndarray::s![k.., j]);
                col.scaled_add(-proj, &v);
            }
            let proj = 2.0 * v.dot(&rhs.slice(ndarray::s![k..])) / vnorm2;
            rhs.slice_mut(ndarray::s![k..]).scaled_add(-proj, &v);
        }
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in (i + 1)..n {
            s -= r[[i, k]] * x[k];
        }
        x[i] = s / r[[i, i]];
    }
    Ok(x)
}
