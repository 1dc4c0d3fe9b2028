//! Lowest eigenpair of real symmetric matrices.
//!
//! Dense input is reduced to tridiagonal form with Householder reflections;
//! the tridiagonal problem is solved by Sturm-sequence bisection for the
//! eigenvalue and inverse iteration for the eigenvector.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LowestEigen {
    pub value: f64,
    /// Unit-norm eigenvector, sign fixed so the largest-magnitude entry is positive.
    pub vector: Vec<f64>,
    /// Distance to the second-lowest eigenvalue (infinite for 1x1 input).
    pub gap: f64,
}

/// Number of eigenvalues of the tridiagonal matrix strictly below each of
/// three shifts. The three recurrences are independent, so they overlap in
/// the pipeline. `off2` holds the squared off-diagonal.
fn sturm_counts(diag: &[f64], off2: &[f64], x: [f64; 3], pivmin: f64) -> [usize; 3] {
    let guard = |q: f64| if q.abs() < pivmin { -pivmin } else { q };
    let mut q = x.map(|x| guard(diag[0] - x));
    let mut count = q.map(|q| usize::from(q < 0.0));
    for (d, o2) in diag[1..].iter().zip(off2) {
        for k in 0..3 {
            q[k] = guard(d - x[k] - o2 / q[k]);
            count[k] += usize::from(q[k] < 0.0);
        }
    }
    count
}

/// `k`-th smallest eigenvalue (0-based) by quadrisection to machine precision.
fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let off2: Vec<f64> = off.iter().map(|o| o * o).collect();
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * scale);
    lo -= 2.0 * f64::EPSILON * scale;
    hi += 2.0 * f64::EPSILON * scale;
    for _ in 0..256 {
        let w = 0.25 * (hi - lo);
        let x = [lo + w, 0.5 * (lo + hi), hi - w];
        if x[0] <= lo || x[2] >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        let counts = sturm_counts(diag, &off2, x, pivmin);
        // counts are non-decreasing in the shift
        match counts.iter().position(|&c| c > k) {
            Some(0) => hi = x[0],
            Some(j) => {
                lo = x[j - 1];
                hi = x[j];
            }
            None => lo = x[2],
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift) y = rhs` in place by Gaussian elimination with
/// partial pivoting. Zero pivots are replaced by a tiny perturbation, which
/// is what inverse iteration wants.
fn shifted_solve(diag: &[f64], off: &[f64], shift: f64, rhs: &mut [f64]) {
    let n = diag.len();
    let scale = diag.iter().chain(off).fold(0.0f64, |m, v| m.max(v.abs())).max(shift.abs()).max(1.0);
    let tiny = f64::EPSILON * scale;
    // Row i holds (a[i], b[i], c[i]) at columns i, i+1, i+2 after elimination.
    let mut a: Vec<f64> = diag.iter().map(|d| d - shift).collect();
    let mut b: Vec<f64> = off.to_vec();
    b.push(0.0);
    let mut c = vec![0.0; n];
    let mut sub: Vec<f64> = off.to_vec();
    for i in 0..n.saturating_sub(1) {
        if sub[i].abs() > a[i].abs() {
            // swap rows i and i+1
            let (ai, bi, ci) = (a[i], b[i], c[i]);
            a[i] = sub[i];
            b[i] = a[i + 1];
            c[i] = b[i + 1];
            rhs.swap(i, i + 1);
            let f = ai / a[i];
            a[i + 1] = bi - f * b[i];
            b[i + 1] = ci - f * c[i];
            rhs[i + 1] -= f * rhs[i];
        } else {
            if a[i] == 0.0 {
                a[i] = tiny;
            }
            let f = sub[i] / a[i];
            a[i + 1] -= f * b[i];
            b[i + 1] -= f * c[i];
            rhs[i + 1] -= f * rhs[i];
        }
        sub[i] = 0.0;
    }
    if a[n - 1] == 0.0 {
        a[n - 1] = tiny;
    }
    for i in (0..n).rev() {
        let mut v = rhs[i];
        if i + 1 < n {
            v -= b[i] * rhs[i + 1];
        }
        if i + 2 < n {
            v -= c[i] * rhs[i + 2];
        }
        rhs[i] = v / if a[i].abs() < tiny { tiny.copysign(a[i]) } else { a[i] };
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (xc, yc) = (x.chunks_exact(4), y.chunks_exact(4));
    let tail: f64 = xc.remainder().iter().zip(yc.remainder()).map(|(a, b)| a * b).sum();
    for (a, b) in xc.zip(yc) {
        for k in 0..4 {
            acc[k] += a[k] * b[k];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn fix_sign(v: &mut [f64]) {
    let (mut best, mut idx) = (0.0, 0);
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Lowest eigenpair of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off` (`off[i]` couples rows `i` and `i + 1`).
pub fn tridiagonal_lowest(diag: &[f64], off: &[f64]) -> Result<LowestEigen> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::Eigensolve(format!("bad tridiagonal shape: {} diagonal, {} off-diagonal", n, off.len())));
    }
    if diag.iter().chain(off).any(|x| !x.is_finite()) {
        return Err(Error::Eigensolve("non-finite matrix entry".into()));
    }
    if n == 1 {
        return Ok(LowestEigen { value: diag[0], vector: vec![1.0], gap: f64::INFINITY });
    }
    let value = kth_eigenvalue(diag, off, 0);
    let gap = kth_eigenvalue(diag, off, 1) - value;

    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7).sin()).collect();
    normalize(&mut v);
    for _ in 0..4 {
        shifted_solve(diag, off, value, &mut v);
        if normalize(&mut v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Eigensolve("inverse iteration broke down".into()));
        }
    }
    fix_sign(&mut v);
    Ok(LowestEigen { value, vector: v, gap })
}

/// Lowest eigenpair of a dense symmetric `n x n` matrix stored row-major.
/// Only the lower triangle is read; the matrix is overwritten.
pub fn symmetric_lowest(a: &mut [f64], n: usize) -> Result<LowestEigen> {
    if a.len() != n * n || n == 0 {
        return Err(Error::Eigensolve(format!("matrix of length {} is not {n} x {n}", a.len())));
    }
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n.saturating_sub(2));
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut v: Vec<f64> = (0..len).map(|i| a[(k + 1 + i) * n + k]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        diag[k] = a[k * n + k];
        if norm == 0.0 {
            off[k] = 0.0;
            reflectors.push((v, 0.0));
            continue;
        }
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        let beta = 2.0 / vtv;
        off[k] = alpha;
        // Trailing block B <- P B P with P = I - beta v v^T.
        let base = k + 1;
        // Only the lower triangle of the trailing block is kept up to date.
        let p = &mut p[..len];
        p.iter_mut().for_each(|x| *x = 0.0);
        for i in 0..len {
            let row = &a[(base + i) * n + base..(base + i) * n + base + i];
            let diag_term = a[(base + i) * n + base + i] * v[i];
            p[i] += dot(row, &v[..i]) + diag_term;
            let vi = v[i];
            p[..i].iter_mut().zip(row).for_each(|(pj, r)| *pj += vi * r);
        }
        p.iter_mut().for_each(|x| *x *= beta);
        let kfac = 0.5 * beta * dot(p, &v);
        p.iter_mut().zip(&v).for_each(|(pi, vi)| *pi -= kfac * vi);
        for i in 0..len {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a[(base + i) * n + base..(base + i) * n + base + i + 1];
            for ((r, pj), vj) in row.iter_mut().zip(p.iter()).zip(&v) {
                *r -= vi * pj + wi * vj;
            }
        }
        reflectors.push((v, beta));
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + n - 2];
        off[n - 2] = a[(n - 1) * n + n - 2];
    }
    diag[n - 1] = a[n * n - 1];

    let tri = tridiagonal_lowest(&diag, &off)?;
    let mut x = tri.vector;
    for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
        if *beta == 0.0 {
            continue;
        }
        let seg = &mut x[k + 1..];
        let dot: f64 = seg.iter().zip(v).map(|(a, b)| a * b).sum();
        for (xi, vi) in seg.iter_mut().zip(v) {
            *xi -= beta * dot * vi;
        }
    }
    normalize(&mut x);
    fix_sign(&mut x);
    Ok(LowestEigen { value: tri.value, vector: x, gap: tri.gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn reference(a: &[f64], n: usize) -> (f64, Vec<f64>, f64) {
        let m = DMatrix::from_row_slice(n, n, a);
        let eig = m.symmetric_eigen();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let v: Vec<f64> = eig.eigenvectors.column(idx[0]).iter().copied().collect();
        let gap = if n > 1 { eig.eigenvalues[idx[1]] - eig.eigenvalues[idx[0]] } else { f64::INFINITY };
        (eig.eigenvalues[idx[0]], v, gap)
    }

    fn symmetric(n: usize, entries: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                a[i * n + j] = entries[k % entries.len()];
                a[j * n + i] = a[i * n + j];
                k += 1;
            }
        }
        a
    }

    #[test]
    fn diagonal_and_tiny_cases() {
        let e = tridiagonal_lowest(&[3.0], &[]).unwrap();
        assert_eq!((e.value, e.vector.clone()), (3.0, vec![1.0]));
        let e = tridiagonal_lowest(&[2.0, -1.0, 5.0], &[0.0, 0.0]).unwrap();
        assert!((e.value + 1.0).abs() < 1e-14);
        assert!((e.vector[1] - 1.0).abs() < 1e-12);
        // [[0, -1], [-1, 0]] -> -1 with (1, 1)/sqrt(2)
        let e = tridiagonal_lowest(&[0.0, 0.0], &[-1.0]).unwrap();
        assert!((e.value + 1.0).abs() < 1e-14);
        assert!((e.vector[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((e.gap - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(tridiagonal_lowest(&[1.0, 2.0], &[]).is_err());
        assert!(symmetric_lowest(&mut [1.0, 2.0, 3.0], 2).is_err());
        assert!(tridiagonal_lowest(&[f64::NAN], &[]).is_err());
    }

    proptest! {
        #[test]
        fn dense_matches_nalgebra(n in 1usize..24, entries in proptest::collection::vec(-3.0f64..3.0, 1..300)) {
            let a = symmetric(n, &entries);
            let (val, vec, gap) = reference(&a, n);
            prop_assume!(gap > 1e-6);
            let mut work = a.clone();
            let e = symmetric_lowest(&mut work, n).unwrap();
            prop_assert!((e.value - val).abs() < 1e-10 * (1.0 + val.abs()));
            let overlap: f64 = e.vector.iter().zip(&vec).map(|(x, y)| x * y).sum();
            prop_assert!((overlap.abs() - 1.0).abs() < 1e-8, "overlap {}", overlap);
            // residual check against the original matrix
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i * n + j] * e.vector[j]).sum();
                prop_assert!((av - e.value * e.vector[i]).abs() < 1e-9);
            }
        }
    }
}
