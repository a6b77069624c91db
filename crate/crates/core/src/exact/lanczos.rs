//! Lowest eigenpair of a large sparse symmetric operator by Lanczos iteration
//! with full reorthogonalization.

use super::tridiag;

#[derive(Debug, Clone, PartialEq)]
pub struct LanczosResult {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// `apply(x, y)` must overwrite `y` with A·x.
pub fn lanczos_lowest<F>(dim: usize, mut apply: F, max_iter: usize, tol: f64) -> LanczosResult
where
    F: FnMut(&[f64], &mut [f64]),
{
    let max_iter = max_iter.min(dim).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter);
    let mut alphas = Vec::with_capacity(max_iter);
    let mut betas: Vec<f64> = Vec::with_capacity(max_iter);

    // Deterministic start with weight on every basis state.
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 / (1.0 + i as f64).sqrt()).collect();
    let n0 = norm(&v);
    scale(&mut v, 1.0 / n0);
    let mut w = vec![0.0; dim];
    let mut last = f64::INFINITY;
    let mut converged = false;

    for it in 0..max_iter {
        apply(&v, &mut w);
        let a = dot(&w, &v);
        alphas.push(a);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= a * vi;
        }
        if let Some(prev) = basis.last() {
            let b = *betas.last().unwrap();
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= b * pi;
            }
        }
        basis.push(v.clone());
        // Two passes of classical Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = norm(&w);

        if it % 5 == 4 || b < 1e-14 || it + 1 == max_iter {
            let theta = tridiag::kth_eigenvalue(&alphas, &betas, 0);
            if (theta - last).abs() < tol * theta.abs().max(1.0) || b < 1e-14 {
                converged = true;
                break;
            }
            last = theta;
        }
        if it + 1 == max_iter {
            break;
        }
        betas.push(b);
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / b);
    }

    let m = alphas.len();
    let off = &betas[..m - 1];
    let (vals, vecs) = tridiag::lowest_eigenpairs(&alphas, off, 1);
    let y = &vecs[0];
    let mut x = vec![0.0; dim];
    for (coef, q) in y.iter().zip(&basis) {
        for (xi, qi) in x.iter_mut().zip(q) {
            *xi += coef * qi;
        }
    }
    let nx = norm(&x);
    scale(&mut x, 1.0 / nx);
    LanczosResult {
        value: vals[0],
        vector: x,
        iterations: m,
        converged,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_of_tridiagonal_operator() {
        let n = 300;
        let diag: Vec<f64> = (0..n)
            .map(|i| 0.1 * i as f64 + if i % 2 == 0 { -0.5 } else { 0.5 })
            .collect();
        let off: Vec<f64> = (1..n).map(|i| 0.3 * (i as f64).sqrt()).collect();
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += off[i] * x[i + 1];
                }
                y[i] = s;
            }
        };
        let r = lanczos_lowest(n, apply, 300, 1e-14);
        let exact = tridiag::kth_eigenvalue(&diag, &off, 0);
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-10, "{} vs {}", r.value, exact);
    }
}
