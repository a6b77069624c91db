//! Truncated-Fock exact diagonalization.
//!
//! In the basis |n⟩ ⊗ |s_x⟩ with s_x = η(−1)ⁿ the parity-η block of the
//! single-mode Hamiltonian is tridiagonal: diagonal ωn + (Ω/2)η(−1)ⁿ,
//! off-diagonal g√(n+1). The default path solves both blocks that way; the
//! full-space path assembles the 2(N+1)-dimensional matrix in the σ_z basis
//! and calls a dense symmetric eigensolver.

mod lanczos;
pub mod tridiag;

pub use lanczos::{lanczos_lowest, LanczosResult};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::overlaps::hermite_functions;
use crate::params::{ModelParams, Parity};
use crate::variational::{scaling_gamma, Observables};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EDConfig {
    /// Initial photon cutoff; `None` uses max(32, ⌈8(g/ω)²⌉).
    pub n_max: Option<usize>,
    pub n_levels: usize,
    /// Relative ground-energy change accepted between successive cutoffs.
    pub tol_convergence: f64,
    pub use_parity_reduction: bool,
    /// Largest photon cutoff tried before giving up.
    pub n_max_cap: usize,
}

impl Default for EDConfig {
    fn default() -> Self {
        Self {
            n_max: None,
            n_levels: 6,
            tol_convergence: 1e-12,
            use_parity_reduction: true,
            n_max_cap: 4096,
        }
    }
}

impl EDConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.n_max {
            if n < 4 {
                return Err(RabiError::InvalidParameter(format!(
                    "n_max must be at least 4, got {n}"
                )));
            }
        }
        if self.tol_convergence.is_nan() || self.tol_convergence <= 0.0 {
            return Err(RabiError::InvalidParameter("tol_convergence must be positive".into()));
        }
        if self.n_levels == 0 {
            return Err(RabiError::InvalidParameter("n_levels must be at least 1".into()));
        }
        Ok(())
    }
}

/// Initial photon cutoff for coupling g/ω.
pub fn initial_cutoff(g: f64, omega: f64, floor: usize) -> usize {
    let r = g / omega;
    floor.max((8.0 * r * r).ceil() as usize)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EDSolution {
    /// Ascending.
    pub energies: Vec<f64>,
    /// Per level, amplitudes c_{n,σ} at index 2·n + σ (σ = 0 for ↑, 1 for ↓).
    /// For several modes the photon index runs over the product basis in
    /// row-major order of `mode_dims`.
    pub coefficients: Vec<Vec<f64>>,
    pub parities: Vec<Parity>,
    pub n_max_used: usize,
    /// Photon states per mode (cutoff + 1).
    pub mode_dims: Vec<usize>,
    pub converged: bool,
}

impl EDSolution {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn amplitude(&self, level: usize, n: usize, spin_down: bool) -> f64 {
        self.coefficients[level][2 * n + spin_down as usize]
    }

    fn photon_states(&self) -> usize {
        self.mode_dims.iter().product()
    }
}

/// Lowest `k` eigenpairs of the parity block as (energies, vectors over n).
pub fn parity_block(params: &ModelParams, parity: Parity, n_max: usize, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (diag, off) = block_bands(params, parity, n_max);
    tridiag::lowest_eigenpairs(&diag, &off, k)
}

fn block_bands(params: &ModelParams, parity: Parity, n_max: usize) -> (Vec<f64>, Vec<f64>) {
    let half = 0.5 * params.big_omega * parity.sign();
    let diag = (0..=n_max)
        .map(|n| params.omega * n as f64 + if n % 2 == 0 { half } else { -half })
        .collect();
    let off = (1..=n_max).map(|n| params.g * (n as f64).sqrt()).collect();
    (diag, off)
}

/// Lift a parity-block vector to σ_z amplitudes.
fn block_to_spin(parity: Parity, v: &[f64]) -> Vec<f64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(2 * v.len());
    for (n, &c) in v.iter().enumerate() {
        let sx = parity.sign() * if n % 2 == 0 { 1.0 } else { -1.0 };
        out.push(r * c);
        out.push(r * sx * c);
    }
    out
}

/// Full-space Hamiltonian in the |n⟩ ⊗ |σ_z⟩ basis (index 2n + σ).
pub fn full_hamiltonian(params: &ModelParams, n_max: usize) -> DMatrix<f64> {
    let dim = 2 * (n_max + 1);
    let mut h = DMatrix::zeros(dim, dim);
    for n in 0..=n_max {
        let (up, dn) = (2 * n, 2 * n + 1);
        h[(up, up)] = params.omega * n as f64;
        h[(dn, dn)] = params.omega * n as f64;
        h[(up, dn)] = 0.5 * params.big_omega;
        h[(dn, up)] = 0.5 * params.big_omega;
        if n < n_max {
            let c = params.g * ((n + 1) as f64).sqrt();
            h[(up, up + 2)] = c;
            h[(up + 2, up)] = c;
            h[(dn, dn + 2)] = -c;
            h[(dn + 2, dn)] = -c;
        }
    }
    h
}

fn solve_at(params: &ModelParams, n_max: usize, n_levels: usize, parity_reduced: bool) -> EDSolution {
    let mut levels: Vec<(f64, Vec<f64>, Parity)> = Vec::new();
    if parity_reduced {
        for parity in [Parity::Negative, Parity::Positive] {
            let (vals, vecs) = parity_block(params, parity, n_max, n_levels);
            for (e, v) in vals.into_iter().zip(vecs) {
                levels.push((e, block_to_spin(parity, &v), parity));
            }
        }
    } else {
        let eig = full_hamiltonian(params, n_max).symmetric_eigen();
        for (i, &e) in eig.eigenvalues.iter().enumerate() {
            let v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
            let p = parity_expectation(&v, &[n_max + 1]);
            let parity = if p < 0.0 { Parity::Negative } else { Parity::Positive };
            levels.push((e, v, parity));
        }
    }
    // Ties broken by parity so both paths order degenerate doublets alike.
    levels.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.2 as u8).cmp(&(b.2 as u8))));
    levels.truncate(n_levels);
    let mut sol = EDSolution {
        energies: Vec::with_capacity(levels.len()),
        coefficients: Vec::with_capacity(levels.len()),
        parities: Vec::with_capacity(levels.len()),
        n_max_used: n_max,
        mode_dims: vec![n_max + 1],
        converged: false,
    };
    for (e, v, p) in levels {
        sol.energies.push(e);
        sol.coefficients.push(v);
        sol.parities.push(p);
    }
    sol
}

/// ⟨σ_x (−1)^{photon number}⟩ of a σ_z-basis vector.
pub(crate) fn parity_expectation(v: &[f64], dims: &[usize]) -> f64 {
    let states = v.len() / 2;
    (0..states)
        .map(|idx| {
            let total: usize = photon_numbers(idx, dims).iter().sum();
            let sign = if total.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * 2.0 * v[2 * idx] * v[2 * idx + 1]
        })
        .sum()
}

/// Photon numbers of the product-basis index `idx` (row-major over `dims`).
pub(crate) fn photon_numbers(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (k, &d) in dims.iter().enumerate().rev() {
        out[k] = idx % d;
        idx /= d;
    }
    out
}

/// Cutoff schedule: doubling, clamped to the cap, until the ground energy
/// settles.
pub(crate) fn converge_cutoff<F>(start: usize, cap: usize, tol: f64, scale: f64, mut solve: F) -> Result<EDSolution>
where
    F: FnMut(usize) -> EDSolution,
{
    let mut n = start.min(cap);
    if n == cap {
        n = (cap / 2).max(4);
    }
    let mut prev = solve(n);
    let mut last_change = f64::INFINITY;
    while n < cap {
        let next_n = (2 * n).min(cap);
        let next = solve(next_n);
        let change = (next.energies[0] - prev.energies[0]).abs() / prev.energies[0].abs().max(scale);
        last_change = change;
        prev = next;
        n = next_n;
        if change < tol {
            prev.converged = true;
            return Ok(prev);
        }
    }
    Err(RabiError::TruncationNotConverged { cap, last_change })
}

pub fn solve(params: &ModelParams, cfg: &EDConfig) -> Result<EDSolution> {
    params.validate()?;
    cfg.validate()?;
    let start = cfg.n_max.unwrap_or_else(|| initial_cutoff(params.g, params.omega, 32));
    let scale = params.omega.max(params.big_omega);
    converge_cutoff(start, cfg.n_max_cap, cfg.tol_convergence, scale, |n| {
        solve_at(params, n, cfg.n_levels, cfg.use_parity_reduction)
    })
}

/// Lowest `n_levels` energies of one parity sector at a converged cutoff.
pub fn parity_spectrum(params: &ModelParams, parity: Parity, cfg: &EDConfig) -> Result<Vec<f64>> {
    let sol = solve(
        params,
        &EDConfig {
            n_levels: 2 * cfg.n_levels,
            ..*cfg
        },
    )?;
    let (vals, _) = parity_block(params, parity, sol.n_max_used, cfg.n_levels);
    Ok(vals)
}

/// Merged two-parity spectrum with parity labels.
pub fn spectrum(params: &ModelParams, cfg: &EDConfig) -> Result<Vec<(f64, Parity)>> {
    let sol = solve(params, cfg)?;
    Ok(sol.energies.iter().copied().zip(sol.parities.iter().copied()).collect())
}

/// Ground-state observables from the Fock-space coefficients.
pub fn ed_observables(sol: &EDSolution, params: &ModelParams) -> Observables {
    level_observables(sol, params, 0)
}

pub fn level_observables(sol: &EDSolution, params: &ModelParams, level: usize) -> Observables {
    let c = &sol.coefficients[level];
    let dims = &sol.mode_dims;
    let states = sol.photon_states();
    // Only the first mode enters the single-mode observables.
    let stride: usize = dims[1..].iter().product();
    let mut photons = 0.0;
    let mut sx = 0.0;
    let mut corr = 0.0;
    let mut a2 = 0.0;
    for idx in 0..states {
        let n = photon_numbers(idx, dims)[0];
        let (u, d) = (c[2 * idx], c[2 * idx + 1]);
        photons += n as f64 * (u * u + d * d);
        sx += 2.0 * u * d;
        if n + 1 < dims[0] {
            let j = idx + stride;
            corr += 2.0 * ((n + 1) as f64).sqrt() * (c[2 * j] * u - c[2 * j + 1] * d);
        }
        if n + 2 < dims[0] {
            let j = idx + 2 * stride;
            a2 += (((n + 1) * (n + 2)) as f64).sqrt() * (c[2 * j] * u + c[2 * j + 1] * d);
        }
    }
    let t = 2.0 * photons + 1.0 - 2.0 * a2;
    Observables {
        energy: sol.energies[level],
        photon_number: photons,
        coupling_corr: corr,
        tunneling: sx,
        t,
        gamma: scaling_gamma(params.omega, params.g, photons, t),
        channels: None,
    }
}

/// Spin amplitudes ψ_σ(x) = Σₙ c_{n,σ} φₙ(ω, x) of the ground state.
///
/// The overall sign is fixed so that ψ₊ is positive where |ψ₊| peaks on the
/// grid. Each component carries norm ½ of the total.
pub fn ed_wavefunction(sol: &EDSolution, xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let c = &sol.coefficients[0];
    let n_max = sol.mode_dims[0] - 1;
    let mut up = Vec::with_capacity(xs.len());
    let mut down = Vec::with_capacity(xs.len());
    for &x in xs {
        let phi = hermite_functions(n_max, x);
        let (mut u, mut d) = (0.0, 0.0);
        for (n, f) in phi.iter().enumerate() {
            u += c[2 * n] * f;
            d += c[2 * n + 1] * f;
        }
        debug_assert!(u.is_finite() && d.is_finite());
        up.push(u);
        down.push(d);
    }
    let peak = up
        .iter()
        .copied()
        .fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    if peak < 0.0 {
        up.iter_mut().for_each(|v| *v = -*v);
        down.iter_mut().for_each(|v| *v = -*v);
    }
    (up, down)
}
