#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    uniform(rng, lo.ln(), hi.ln()).exp()
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Normalized oscillator eigenfunction of frequency ξ (in units of ω),
/// level n, displaced so that its center sits at u = 0.
pub fn packet(n: usize, xi: f64, u: f64) -> f64 {
    let fact: f64 = (1..=n).map(|k| k as f64).product();
    let norm = (xi / std::f64::consts::PI).powf(0.25) / (2f64.powi(n as i32) * fact).sqrt();
    norm * hermite(n, xi.sqrt() * u) * (-0.5 * xi * u * u).exp()
}

/// ∫ f over the real line for integrands concentrated near `centers`,
/// split at every center so each piece is smooth and single-humped.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, centers: &[f64], width: f64) -> f64 {
    let lo = centers.iter().cloned().fold(f64::INFINITY, f64::min) - 14.0 * width;
    let hi = centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 14.0 * width;
    let mut cuts = vec![lo];
    let mut inner: Vec<f64> = centers.to_vec();
    inner.sort_by(f64::total_cmp);
    cuts.extend(inner);
    cuts.push(hi);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| adaptive(&f, w[0], w[1], 1e-13, 0))
        .sum()
}

/// Double-exponential rule on each half, accepted once the halves agree
/// with the whole interval.
fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    let m = 0.5 * (a + b);
    let whole = quadrature::integrate(f, a, b, tol).integral;
    let halves = quadrature::integrate(f, a, m, tol).integral + quadrature::integrate(f, m, b, tol).integral;
    if (whole - halves).abs() <= tol || depth >= 10 {
        return halves;
    }
    adaptive(f, a, m, 0.5 * tol, depth + 1) + adaptive(f, m, b, 0.5 * tol, depth + 1)
}

/// Ladder-operator matrix elements in a truncated basis, as an independent
/// dense reference for small problems.
pub fn dense_rabi_ground(omega: f64, big_omega: f64, g: f64, n_max: usize) -> f64 {
    let dim = 2 * (n_max + 1);
    let mut h = nalgebra::DMatrix::<f64>::zeros(dim, dim);
    // index 2n + s, s = 0 for σ_z = +1, s = 1 for σ_z = −1
    for n in 0..=n_max {
        for s in 0..2 {
            let i = 2 * n + s;
            h[(i, i)] = omega * n as f64;
            h[(i, 2 * n + (1 - s))] = 0.5 * big_omega;
            if n < n_max {
                let sz = if s == 0 { 1.0 } else { -1.0 };
                let j = 2 * (n + 1) + s;
                let v = g * sz * ((n + 1) as f64).sqrt();
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
    }
    h.symmetric_eigenvalues().min()
}
