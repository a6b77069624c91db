//! Single-particle picture of the spin-up amplitude.
//!
//! Eliminating ψ₋ from the spin-up Schrödinger equation gives
//! (ω/2)(p² + v₊ + δv₊)ψ₊ = (E − ℰ₀)ψ₊ with the bare well v₊ = (x + g′)² and
//! the tunneling term δv₊ = (Ω/ω) ψ₋/ψ₊. With ψ₋(x) = η ψ₊(−x) this is
//! δv₊(x) = η (Ω/ω) ψ₊(−x)/ψ₊(x). The spin-down expressions follow from
//! x → −x.

use std::io::Write;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::overlaps::{DeformedPacket, PacketSide};
use crate::params::ModelParams;
use crate::variational::{spin_up_amplitude, VariationalState};

/// Relative amplitude below which δv is left undefined.
pub const PSI_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Well {
    Polaron,
    Antipolaron,
}

/// Sampled potentials; `v_delta` and `v_total` are NaN where the amplitude
/// falls below the floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialProfile {
    pub spin: Spin,
    pub grid: Vec<f64>,
    pub v_bare: Vec<f64>,
    pub v_delta: Vec<f64>,
    pub v_total: Vec<f64>,
    pub psi_up: Vec<f64>,
    pub psi_down: Vec<f64>,
}

impl PotentialProfile {
    pub fn is_defined(&self, i: usize) -> bool {
        self.v_delta[i].is_finite()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "v_bare", "v_delta", "v_total", "psi_up", "psi_down"])?;
        for i in 0..self.grid.len() {
            w.write_record(
                [
                    self.grid[i],
                    self.v_bare[i],
                    self.v_delta[i],
                    self.v_total[i],
                    self.psi_up[i],
                    self.psi_down[i],
                ]
                .iter()
                .map(|v| crate::diagram::fmt_float(*v)),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Profile from sampled spin amplitudes (variational or exact).
pub fn profile_from_amplitudes(
    params: &ModelParams,
    grid: &[f64],
    psi_up: Vec<f64>,
    psi_down: Vec<f64>,
    spin: Spin,
) -> PotentialProfile {
    let gp = params.gprime();
    let (own, other, shift) = match spin {
        Spin::Up => (&psi_up, &psi_down, gp),
        Spin::Down => (&psi_down, &psi_up, -gp),
    };
    let peak = own.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = PSI_FLOOR * peak;
    let ratio = params.big_omega / params.omega;
    let v_bare: Vec<f64> = grid.iter().map(|x| (x + shift).powi(2)).collect();
    let v_delta: Vec<f64> = own
        .iter()
        .zip(other)
        .map(|(&a, &b)| {
            if a.abs() < floor || a == 0.0 {
                f64::NAN
            } else if ratio == 0.0 {
                0.0
            } else {
                ratio * b / a
            }
        })
        .collect();
    let v_total = v_bare.iter().zip(&v_delta).map(|(a, b)| a + b).collect();
    PotentialProfile {
        spin,
        grid: grid.to_vec(),
        v_bare,
        v_delta,
        v_total,
        psi_up,
        psi_down,
    }
}

pub fn potential_profile(state: &VariationalState, params: &ModelParams, grid: &[f64], spin: Spin) -> PotentialProfile {
    let (up, down) = crate::variational::wavefunction_eval(state, params, grid);
    profile_from_amplitudes(params, grid, up, down, spin)
}

/// Local quadratic expansion v^tot ≈ v(x_min) + f1·(x − x_min) + f2·(x − x_min)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellExpansion {
    pub x_min: f64,
    pub f1: f64,
    pub f2: f64,
    /// Local level in units of ω/2.
    pub epsilon: f64,
    /// v^tot at x_min.
    pub value: f64,
}

/// Packet radii 2/√ξ; the wells count as separated when the centers are
/// farther apart than the sum.
pub fn check_separation(state: &VariationalState, gprime: f64) -> Result<()> {
    let distance = (state.zeta_a + state.zeta_b) * gprime;
    let radii = 2.0 / state.xi_a.sqrt() + 2.0 / state.xi_b.sqrt();
    if distance.is_finite() && distance > radii {
        Ok(())
    } else {
        Err(RabiError::WellsNotSeparated { distance, radii })
    }
}

/// ψ₊ and its first two derivatives.
fn spin_up_with_derivatives(st: &VariationalState, gp: f64, x: f64) -> (f64, f64, f64) {
    let mut acc = (0.0, 0.0, 0.0);
    let parts = [
        (st.alpha, st.xi_a, st.zeta_a, PacketSide::Polaron),
        (st.beta, st.xi_b, st.zeta_b, PacketSide::Antipolaron),
    ];
    for (w, xi, zeta, side) in parts {
        if w == 0.0 {
            continue;
        }
        let p = DeformedPacket {
            xi,
            zeta,
            side,
            level: 0,
        };
        let (f, d1, d2) = p.eval_with_derivatives(x, gp);
        acc.0 += w * f;
        acc.1 += w * d1;
        acc.2 += w * d2;
    }
    acc
}

/// Expansion of the spin-up total potential at one of the packet centers,
/// using analytic derivatives of the variational amplitude.
pub fn well_expansion(state: &VariationalState, params: &ModelParams, well: Well) -> Result<WellExpansion> {
    let gp = params.gprime();
    check_separation(state, gp)?;
    let (x0, epsilon) = match well {
        Well::Polaron => (-state.zeta_a * gp, state.xi_a),
        Well::Antipolaron => (state.zeta_b * gp, state.xi_b),
    };
    let (d, d1, d2) = spin_up_with_derivatives(state, gp, x0);
    let (m, m1, m2) = spin_up_with_derivatives(state, gp, -x0);
    // N(x) = ψ₊(−x): N' = −ψ₊'(−x), N'' = ψ₊''(−x).
    let (n, n1, n2) = (m, -m1, m2);
    let r = n / d;
    let r1 = (n1 - r * d1) / d;
    let r2 = (n2 - 2.0 * r1 * d1 - r * d2) / d;
    let k = params.eta() * params.big_omega / params.omega;
    Ok(WellExpansion {
        x_min: x0,
        f1: 2.0 * (x0 + gp) + k * r1,
        f2: 1.0 + 0.5 * k * r2,
        epsilon,
        value: (x0 + gp).powi(2) + k * r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelfConsistentConfig {
    pub damping: f64,
    pub max_iter: usize,
    /// Max-norm of the residual vector at convergence, in units of
    /// max(1, g′²).
    pub tol: f64,
}

impl Default for SelfConsistentConfig {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iter: 200,
            tol: 1e-10,
        }
    }
}

/// Strong-coupling residuals of the two-well conditions for
/// u = (ζ_α, ζ_β, ξ_α, ξ_β, α), with β = √(1 − α²).
fn residuals(u: &[f64; 5], gp: f64, k: f64) -> [f64; 5] {
    let [za, zb, xa, xb, a] = *u;
    let b = (1.0 - a * a).max(0.0).sqrt();
    let dz = (za - zb) * gp;
    // δv at each center from the dominant packet pair.
    let d_a = k * (b / a) * (xb / xa).powf(0.25) * (0.5 * (-xb * dz * dz)).exp();
    let d_b = k * (a / b) * (xa / xb).powf(0.25) * (0.5 * (-xa * dz * dz)).exp();
    let f1a = 2.0 * (1.0 - za) * gp + d_a * xb * dz;
    let f1b = 2.0 * (1.0 + zb) * gp + d_b * xa * dz;
    let f2a = 1.0 + 0.5 * d_a * (xa - xb + xb * xb * dz * dz);
    let f2b = 1.0 + 0.5 * d_b * (xb - xa + xa * xa * dz * dz);
    let va = ((1.0 - za) * gp).powi(2) + d_a + xa;
    let vb = ((1.0 + zb) * gp).powi(2) + d_b + xb;
    [f1a, f1b, f2a - xa * xa, f2b - xb * xb, va - vb]
}

/// Determine the trial parameters from the well conditions instead of
/// energy minimization. Requires g above the changeover scale.
pub fn self_consistent_solve(params: &ModelParams, cfg: &SelfConsistentConfig) -> Result<VariationalState> {
    let d = params.derive()?;
    if params.big_omega == 0.0 {
        return Ok(VariationalState::polaron(1.0, 1.0));
    }
    if params.g <= d.gc {
        return Err(RabiError::LeftStrongCouplingDomain);
    }
    let gp = d.gprime;
    let k = params.eta() * params.big_omega / params.omega;
    let z0 = (1.0 - (d.gc0 / params.g).powi(4)).max(0.0).sqrt();
    // Weight of the polaron when both packets sit at the same displacement.
    let mut u = [z0, z0, 1.0, 1.0, (0.5 * (1.0 + z0)).sqrt()];
    let tol = cfg.tol * gp.powi(2).max(1.0);
    let mut last = f64::INFINITY;
    for iter in 0..cfg.max_iter {
        let f = residuals(&u, gp, k);
        let fnorm = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !fnorm.is_finite() {
            return Err(RabiError::NoConvergence {
                iterations: iter,
                residual: fnorm,
            });
        }
        last = fnorm;
        if fnorm < tol {
            let st = VariationalState::new(params, u[2], u[3], u[0], u[1], u[4])?;
            return Ok(st);
        }
        let mut jac = SMatrix::<f64, 5, 5>::zeros();
        for j in 0..5 {
            let h = 1e-7 * u[j].abs().max(1e-3);
            let mut up = u;
            let mut dn = u;
            up[j] += h;
            dn[j] -= h;
            let fu = residuals(&up, gp, k);
            let fd = residuals(&dn, gp, k);
            for i in 0..5 {
                jac[(i, j)] = (fu[i] - fd[i]) / (2.0 * h);
            }
        }
        let rhs = SVector::<f64, 5>::from_column_slice(&f);
        let step = jac.lu().solve(&rhs).ok_or(RabiError::NoConvergence {
            iterations: iter,
            residual: fnorm,
        })?;
        // Shorten the damped step until the weights and frequencies stay admissible.
        let mut scale = cfg.damping;
        let next = loop {
            let mut v = u;
            for i in 0..5 {
                v[i] -= scale * step[i];
            }
            if (v[2] > 0.0 && v[3] > 0.0 && v[4] > 0.0 && v[4] < 1.0) || scale < 1e-12 {
                break v;
            }
            scale *= 0.5;
        };
        u = next;
        u[2] = u[2].max(1e-6);
        u[3] = u[3].max(1e-6);
        u[4] = u[4].clamp(1e-9, 1.0 - 1e-9);
        let trial = VariationalState {
            xi_a: u[2],
            xi_b: u[3],
            zeta_a: u[0],
            zeta_b: u[1],
            alpha: u[4],
            beta: (1.0 - u[4] * u[4]).sqrt(),
        };
        if check_separation(&trial, gp).is_err() {
            return Err(RabiError::LeftStrongCouplingDomain);
        }
    }
    Err(RabiError::NoConvergence {
        iterations: cfg.max_iter,
        residual: last,
    })
}

/// Spin-up amplitude at one point.
pub fn spin_up(state: &VariationalState, params: &ModelParams, x: f64) -> f64 {
    spin_up_amplitude(state, params, x, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn no_tunneling_means_bare_potential() {
        let p = ModelParams::new(0.5, 0.0, 0.3).unwrap();
        let st = VariationalState::polaron(1.0, 1.0);
        let grid: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.2).collect();
        let prof = potential_profile(&st, &p, &grid, Spin::Up);
        for i in 0..grid.len() {
            assert_eq!(prof.v_delta[i], 0.0);
            assert_eq!(prof.v_total[i], prof.v_bare[i]);
        }
    }

    #[test]
    fn decoupled_shift_is_constant() {
        let p = ModelParams::new(0.1, 1.0, 0.0).unwrap();
        let st = VariationalState::polaron(0.0, 1.0);
        let grid: Vec<f64> = (-10..=10).map(|i| i as f64 * 0.3).collect();
        let prof = potential_profile(&st, &p, &grid, Spin::Up);
        for v in &prof.v_delta {
            assert_abs_diff_eq!(*v, -10.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bare_parabola_expansion() {
        let p = ModelParams::new(0.1, 0.0, 0.5).unwrap();
        let st = VariationalState::polaron(1.0, 1.0);
        let w = well_expansion(&st, &p, Well::Polaron).unwrap();
        assert_abs_diff_eq!(w.x_min, -p.gprime(), epsilon = 1e-14);
        assert_abs_diff_eq!(w.f1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.f2, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn overlapping_wells_rejected() {
        let p = ModelParams::new(0.1, 1.0, 0.05).unwrap();
        let st = VariationalState::new(&p, 1.0, 1.0, 0.3, 0.3, 0.7).unwrap();
        assert!(matches!(
            well_expansion(&st, &p, Well::Polaron),
            Err(RabiError::WellsNotSeparated { .. })
        ));
    }

    #[test]
    fn zero_splitting_gives_pure_polaron() {
        let p = ModelParams::new(0.1, 0.0, 0.5).unwrap();
        let st = self_consistent_solve(&p, &SelfConsistentConfig::default()).unwrap();
        assert_eq!(st.alpha, 1.0);
        assert_eq!(st.beta, 0.0);
    }

    #[test]
    fn weak_coupling_is_outside_domain() {
        let p = ModelParams::new(0.1, 1.0, 0.1).unwrap();
        assert_eq!(
            self_consistent_solve(&p, &SelfConsistentConfig::default()),
            Err(RabiError::LeftStrongCouplingDomain)
        );
    }

    #[test]
    fn csv_header() {
        let p = ModelParams::new(0.5, 1.0, 0.3).unwrap();
        let st = VariationalState::polaron(1.0, 1.0);
        let prof = potential_profile(&st, &p, &[0.0, 0.1], Spin::Down);
        let mut buf = Vec::new();
        prof.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,v_bare,v_delta,v_total,psi_up,psi_down\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
