//! Lowest eigenpairs of a real symmetric tridiagonal matrix by Sturm-sequence
//! bisection followed by inverse iteration.

/// Number of eigenvalues strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q.abs() < tiny { tiny.copysign(q) } else { q };
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The k-th smallest eigenvalue (0-based).
pub fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let (mut lo, mut hi) = gershgorin(diag, off);
    let pad = 1e-12 * (lo.abs().max(hi.abs()) + 1.0);
    lo -= pad;
    hi += pad;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solve (T − λ I) y = b by Gaussian elimination with partial pivoting.
fn shifted_solve(diag: &[f64], off: &[f64], lambda: f64, b: &mut [f64]) {
    let n = diag.len();
    let eps = f64::EPSILON * (diag.iter().map(|d| d.abs()).fold(0.0, f64::max) + lambda.abs()).max(1.0);
    let mut d: Vec<f64> = diag.iter().map(|x| x - lambda).collect();
    let mut du: Vec<f64> = off.to_vec();
    du.push(0.0);
    let mut du2 = vec![0.0; n];
    let dl = off;
    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = eps;
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
        } else {
            let fact = d[i] / dl[i];
            let old_du = du[i];
            d[i] = dl[i];
            du[i] = d[i + 1];
            du2[i] = du[i + 1];
            d[i + 1] = old_du - fact * du[i];
            du[i + 1] = -fact * du2[i];
            b.swap(i, i + 1);
            b[i + 1] -= fact * b[i];
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = eps;
    }
    b[n - 1] /= d[n - 1];
    if n >= 2 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Eigenvector for eigenvalue `lambda`, orthogonalized against `previous`
/// (needed only for numerically degenerate eigenvalues).
pub fn eigenvector(diag: &[f64], off: &[f64], lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
    let n = diag.len();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64 / 13.0).collect();
    normalize(&mut v);
    for _ in 0..8 {
        let before = v.clone();
        shifted_solve(diag, off, lambda, &mut v);
        for p in previous {
            let dot: f64 = v.iter().zip(p).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(p).for_each(|(a, b)| *a -= dot * b);
        }
        normalize(&mut v);
        let overlap: f64 = v.iter().zip(&before).map(|(a, b)| a * b).sum::<f64>().abs();
        if (1.0 - overlap) < 1e-15 {
            break;
        }
    }
    v
}

/// Lowest `k` eigenpairs in ascending order.
pub fn lowest_eigenpairs(diag: &[f64], off: &[f64], k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let k = k.min(diag.len());
    let values: Vec<f64> = (0..k).map(|i| kth_eigenvalue(diag, off, i)).collect();
    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (i, &lambda) in values.iter().enumerate() {
        let near: Vec<Vec<f64>> = (0..i)
            .filter(|&j| (values[j] - lambda).abs() < 1e-9 * scale)
            .map(|j| vectors[j].clone())
            .collect();
        vectors.push(eigenvector(diag, off, lambda, &near));
    }
    (values, vectors)
}
