//! Polaron–antipolaron trial state, its energy functional and observables.
//!
//! The spin-up amplitude is ψ₊(x) = α φ_α(x) + β φ_β(x) with
//! φ_α = φₙ(ξ_α ω, x + ζ_α g′) and φ_β = φₙ(ξ_β ω, x − ζ_β g′); the
//! spin-down amplitude follows from parity, ψ₋(x) = η ψ₊(−x). With
//! ⟨ψ₊|ψ₊⟩ = 1 the energy is E = ⟨h₊⟩ + η(Ω/2)⟨ψ₊(x)|ψ₊(−x)⟩ + ℰ₀ where
//! h₊ = (ω/2)(p² + (x + g′)²).

mod solver;

pub use solver::{
    excited_energy, optimize_constrained, optimize_ground, optimize_ground_from, optimize_level, ConstraintSet,
    OptimizerConfig, VariationalSolution,
};

use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::overlaps::{
    generalized_moment, ground_moments_unchecked, oscillator_state, overlap_s_unchecked, OverlapSet,
};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalState {
    pub xi_a: f64,
    pub xi_b: f64,
    pub zeta_a: f64,
    pub zeta_b: f64,
    pub alpha: f64,
    /// Fixed by normalization; never an independent parameter.
    pub beta: f64,
}

impl VariationalState {
    /// Level-0 state with β chosen to normalize ψ₊.
    pub fn new(params: &ModelParams, xi_a: f64, xi_b: f64, zeta_a: f64, zeta_b: f64, alpha: f64) -> Result<Self> {
        Self::at_level(params, 0, xi_a, xi_b, zeta_a, zeta_b, alpha)
    }

    pub fn at_level(
        params: &ModelParams,
        level: usize,
        xi_a: f64,
        xi_b: f64,
        zeta_a: f64,
        zeta_b: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(RabiError::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        let s_ab = packet_overlap(params.gprime(), level, xi_a, xi_b, zeta_a, zeta_b)?;
        Ok(Self {
            xi_a,
            xi_b,
            zeta_a,
            zeta_b,
            alpha,
            beta: beta_from_alpha(alpha, s_ab)?,
        })
    }

    /// Single polaron, α = 1.
    pub fn polaron(zeta: f64, xi: f64) -> Self {
        Self {
            xi_a: xi,
            xi_b: xi,
            zeta_a: zeta,
            zeta_b: zeta,
            alpha: 1.0,
            beta: 0.0,
        }
    }

    /// The same ψ₊ written with the roles of the two packets exchanged.
    pub fn mirrored(&self) -> Self {
        Self {
            xi_a: self.xi_b,
            xi_b: self.xi_a,
            zeta_a: -self.zeta_b,
            zeta_b: -self.zeta_a,
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    /// Representative with the polaron center left of the antipolaron center,
    /// ζ_α + ζ_β ≥ 0.
    pub fn canonical(self) -> Self {
        if self.zeta_a + self.zeta_b < 0.0 {
            self.mirrored()
        } else {
            self
        }
    }

    /// |⟨ψ₊|ψ₊⟩ − 1| at the given level.
    pub fn norm_residual(&self, params: &ModelParams, level: usize) -> Result<f64> {
        let s = packet_overlap(params.gprime(), level, self.xi_a, self.xi_b, self.zeta_a, self.zeta_b)?;
        Ok((self.alpha * self.alpha + self.beta * self.beta + 2.0 * self.alpha * self.beta * s - 1.0).abs())
    }

    pub fn xi_mean(&self) -> f64 {
        0.5 * (self.xi_a + self.xi_b)
    }
}

/// Weighted tunneling overlaps, one per channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channels {
    /// α² S_{αᾱ}
    pub aa: f64,
    /// β² S_{ββ̄}
    pub bb: f64,
    /// αβ S_{αβ̄}
    pub ab: f64,
    /// αβ S_{βᾱ}
    pub ba: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub energy: f64,
    /// ⟨a†a⟩
    pub photon_number: f64,
    /// ⟨σ_z (a† + a)⟩
    pub coupling_corr: f64,
    /// ⟨σ_x⟩
    pub tunneling: f64,
    /// t = −⟨(a† − a)²⟩
    pub t: f64,
    /// None at g = 0.
    pub gamma: Option<f64>,
    /// Only defined for the variational state.
    pub channels: Option<Channels>,
}

impl Observables {
    pub fn gamma_or_err(&self) -> Result<f64> {
        self.gamma.ok_or(RabiError::GammaUndefined)
    }
}

/// γ = (ω / (g t)) √(⟨a†a⟩ − (t + 1/t)/4 + ½); `None` when g = 0.
pub fn scaling_gamma(omega: f64, g: f64, photon_number: f64, t: f64) -> Option<f64> {
    if g == 0.0 {
        return None;
    }
    // The radicand equals ⟨x²⟩/2 − 1/(8⟨p²⟩) ≥ 0; clip rounding noise.
    let radicand = (photon_number - (t + 1.0 / t) / 4.0 + 0.5).max(0.0);
    Some(omega / (g * t) * radicand.sqrt())
}

/// β = −α S + √(α² S² − α² + 1), the non-negative root of α² + β² + 2αβS = 1.
pub fn beta_from_alpha(alpha: f64, s_ab: f64) -> Result<f64> {
    let disc = alpha * alpha * s_ab * s_ab - alpha * alpha + 1.0;
    if disc < -1e-14 {
        return Err(RabiError::NegativeDiscriminant(disc));
    }
    Ok((-alpha * s_ab + disc.max(0.0).sqrt()).max(0.0))
}

/// AA/GRWA ground energy −g²/ω − (Ω/2) e^{−2g²/ω²}.
pub fn aa_grwa_ground(params: &ModelParams) -> f64 {
    aa_grwa_level(params, 0)
}

/// AA/GRWA level nω − g²/ω + η(−1)ⁿ(Ω/2) e^{−2g²/ω²} Lₙ(4g²/ω²).
pub fn aa_grwa_level(params: &ModelParams, level: usize) -> f64 {
    let r = params.g / params.omega;
    let sign = params.eta() * if level.is_multiple_of(2) { 1.0 } else { -1.0 };
    level as f64 * params.omega - params.g * r
        + sign * 0.5 * params.big_omega * (-2.0 * r * r).exp() * laguerre(level, 4.0 * r * r)
}

fn laguerre(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - x) * cur / (k as f64 + 1.0) - k as f64 * prev / (k as f64 + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

fn packet_overlap(gprime: f64, level: usize, xi_a: f64, xi_b: f64, zeta_a: f64, zeta_b: f64) -> Result<f64> {
    check_positive(xi_a, xi_b)?;
    if level == 0 {
        Ok(overlap_s_unchecked(zeta_a, zeta_b, xi_a, xi_b, gprime))
    } else {
        generalized_moment(level, 0, zeta_a, zeta_b, xi_a, xi_b, gprime)
    }
}

fn check_positive(xi_a: f64, xi_b: f64) -> Result<()> {
    if xi_a.is_finite() && xi_b.is_finite() && xi_a > 0.0 && xi_b > 0.0 {
        Ok(())
    } else {
        Err(RabiError::InvalidParameter(format!(
            "frequency renormalizations must be positive, got {xi_a}, {xi_b}"
        )))
    }
}

/// Matrix elements between the two packets of one mode.
pub(crate) struct Elements {
    pub(crate) ov: OverlapSet,
    /// ⟨h₊⟩ entries: αα, ββ, αβ (energy units).
    pub(crate) h: [f64; 3],
    /// ⟨(ω/2)(p² + x²)⟩ entries.
    pub(crate) h0: [f64; 3],
    pub(crate) x: [f64; 3],
    pub(crate) p2: [f64; 3],
}

impl Elements {
    fn compute(params: &ModelParams, level: usize, st: &VariationalState) -> Result<Self> {
        Self::compute_raw(
            params.omega,
            params.gprime(),
            level,
            st.xi_a,
            st.xi_b,
            st.zeta_a,
            st.zeta_b,
        )
    }

    pub(crate) fn compute_raw(omega: f64, gp: f64, level: usize, xa: f64, xb: f64, za: f64, zb: f64) -> Result<Self> {
        check_positive(xa, xb)?;
        let w2 = 0.5 * omega;
        let (ov, s, x1, x2) = if level == 0 {
            let m = ground_moments_unchecked(za, zb, xa, xb, gp);
            let ov = OverlapSet {
                s_ab: m.s,
                s_ab_bar: overlap_s_unchecked(za, -zb, xa, xb, gp),
                s_aa_bar: overlap_s_unchecked(za, za, xa, xa, gp),
                s_bb_bar: overlap_s_unchecked(zb, zb, xb, xb, gp),
            };
            (ov, m.s, m.x1, m.x2)
        } else {
            let ov = OverlapSet::new(za, zb, xa, xb, gp, level)?;
            let x1 = generalized_moment(level, 1, za, zb, xa, xb, gp)?;
            let x2 = generalized_moment(level, 2, za, zb, xa, xb, gp)?;
            (ov, ov.s_ab, x1, x2)
        };
        let nh = level as f64 + 0.5;
        let two_n1 = 2.0 * level as f64 + 1.0;
        let kin_a = nh * (xa + 1.0 / xa);
        let kin_b = nh * (xb + 1.0 / xb);
        let da = (1.0 - za) * gp;
        let db = (1.0 + zb) * gp;
        // p² φ_α = (ξ_α(2n+1) − ξ_α² x̂_α²) φ_α, acting to the left.
        let p2_ab = two_n1 * xa * s - xa * xa * x2;
        let h = [
            w2 * (kin_a + da * da),
            w2 * (kin_b + db * db),
            w2 * ((1.0 - xa * xa) * x2 + 2.0 * da * x1 + two_n1 * xa * s + da * da * s),
        ];
        let ca = za * gp;
        let cb = zb * gp;
        let h0 = [
            w2 * (kin_a + ca * ca),
            w2 * (kin_b + cb * cb),
            w2 * ((1.0 - xa * xa) * x2 - 2.0 * ca * x1 + two_n1 * xa * s + ca * ca * s),
        ];
        let x = [-ca, cb, x1 - ca * s];
        let p2 = [nh * xa, nh * xb, p2_ab];
        Ok(Self { ov, h, h0, x, p2 })
    }

    fn expect(&self, m: &[f64; 3], st: &VariationalState) -> f64 {
        st.alpha * st.alpha * m[0] + st.beta * st.beta * m[1] + 2.0 * st.alpha * st.beta * m[2]
    }

    /// ⟨ψ₊(x)|ψ₊(−x)⟩.
    fn reflected_overlap(&self, st: &VariationalState) -> f64 {
        st.alpha * st.alpha * self.ov.s_aa_bar
            + st.beta * st.beta * self.ov.s_bb_bar
            + 2.0 * st.alpha * st.beta * self.ov.s_ab_bar
    }
}

/// Ground-level energy.
pub fn energy(params: &ModelParams, state: &VariationalState) -> Result<f64> {
    energy_at_level(params, state, 0)
}

pub fn energy_at_level(params: &ModelParams, state: &VariationalState, level: usize) -> Result<f64> {
    let el = Elements::compute(params, level, state)?;
    Ok(energy_from(params, state, &el))
}

pub(crate) fn energy_from(params: &ModelParams, st: &VariationalState, el: &Elements) -> f64 {
    let gp = params.gprime();
    let e0 = -0.5 * params.omega * (gp * gp + 1.0);
    el.expect(&el.h, st) + params.eta() * 0.5 * params.big_omega * el.reflected_overlap(st) + e0
}

pub fn observables(params: &ModelParams, state: &VariationalState) -> Result<Observables> {
    observables_at_level(params, state, 0)
}

pub fn observables_at_level(params: &ModelParams, state: &VariationalState, level: usize) -> Result<Observables> {
    let el = Elements::compute(params, level, state)?;
    let photon_number = el.expect(&el.h0, state) / params.omega - 0.5;
    let t = 2.0 * el.expect(&el.p2, state);
    let ab = state.alpha * state.beta;
    Ok(Observables {
        energy: energy_from(params, state, &el),
        photon_number,
        coupling_corr: std::f64::consts::SQRT_2 * el.expect(&el.x, state),
        tunneling: params.eta() * el.reflected_overlap(state),
        t,
        gamma: scaling_gamma(params.omega, params.g, photon_number, t),
        channels: Some(Channels {
            aa: state.alpha * state.alpha * el.ov.s_aa_bar,
            bb: state.beta * state.beta * el.ov.s_bb_bar,
            ab: ab * el.ov.s_ab_bar,
            ba: ab * el.ov.s_ab_bar,
        }),
    })
}

/// Sampled spin amplitudes (ψ₊, ψ₋) on `xs`.
pub fn wavefunction_eval(state: &VariationalState, params: &ModelParams, xs: &[f64]) -> (Vec<f64>, Vec<f64>) {
    wavefunction_eval_at_level(state, params, xs, 0)
}

pub fn wavefunction_eval_at_level(
    state: &VariationalState,
    params: &ModelParams,
    xs: &[f64],
    level: usize,
) -> (Vec<f64>, Vec<f64>) {
    let up = |x: f64| spin_up_amplitude(state, params, x, level);
    let eta = params.eta();
    let psi_up = xs.iter().map(|&x| up(x)).collect();
    let psi_down = xs.iter().map(|&x| eta * up(-x)).collect();
    (psi_up, psi_down)
}

pub(crate) fn spin_up_amplitude(st: &VariationalState, params: &ModelParams, x: f64, level: usize) -> f64 {
    let gp = params.gprime();
    let mut v = 0.0;
    if st.alpha != 0.0 {
        v += st.alpha * oscillator_state(level, st.xi_a, x + st.zeta_a * gp);
    }
    if st.beta != 0.0 {
        v += st.beta * oscillator_state(level, st.xi_b, x - st.zeta_b * gp);
    }
    v
}
