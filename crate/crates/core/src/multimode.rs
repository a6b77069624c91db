//! Several oscillator modes coupled to one two-level system,
//! H = Σₖ ωₖ aₖ†aₖ + (Ω/2) σ_x + σ_z Σₖ gₖ (aₖ† + aₖ).
//!
//! The trial spin-up amplitude is α Πₖ φ_α⁽ᵏ⁾ + β Πₖ φ_β⁽ᵏ⁾ with one pair of
//! global weights; every two-packet integral factorizes over modes.

use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::exact::{initial_cutoff, lanczos_lowest, EDSolution};
use crate::optimize::{nelder_mead, SimplexOptions};
use crate::params::{semiclassical_coupling, ModelParams, Parity};
use crate::variational::{beta_from_alpha, optimize_ground_from, Elements, OptimizerConfig, VariationalState};

pub const DEFAULT_MODE_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    /// (ωₖ, gₖ) per mode.
    pub modes: Vec<(f64, f64)>,
    pub big_omega: f64,
    #[serde(default)]
    pub parity: Parity,
}

impl ModeParams {
    pub fn new(modes: Vec<(f64, f64)>, big_omega: f64) -> Result<Self> {
        let p = Self {
            modes,
            big_omega,
            parity: Parity::Negative,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(RabiError::InvalidParameter("at least one mode is required".into()));
        }
        for &(w, g) in &self.modes {
            ModelParams {
                omega: w,
                big_omega: self.big_omega,
                g,
                parity: self.parity,
            }
            .validate()?;
        }
        Ok(())
    }

    /// Single-mode parameters for mode k.
    pub fn mode(&self, k: usize) -> ModelParams {
        let (omega, g) = self.modes[k];
        ModelParams {
            omega,
            big_omega: self.big_omega,
            g,
            parity: self.parity,
        }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeDeformation {
    pub xi_a: f64,
    pub xi_b: f64,
    pub zeta_a: f64,
    pub zeta_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultimodeState {
    pub modes: Vec<ModeDeformation>,
    pub alpha: f64,
    pub beta: f64,
}

impl MultimodeState {
    /// State with β fixed by normalization.
    pub fn new(params: &ModeParams, modes: Vec<ModeDeformation>, alpha: f64) -> Result<Self> {
        if modes.len() != params.len() {
            return Err(RabiError::InvalidParameter(format!(
                "expected {} mode deformations, got {}",
                params.len(),
                modes.len()
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(RabiError::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        let els = elements(params, &modes)?;
        let s: f64 = els.iter().map(|e| e.ov.s_ab).product();
        Ok(Self {
            modes,
            alpha,
            beta: beta_from_alpha(alpha, s)?,
        })
    }

    pub fn from_single(state: &VariationalState) -> Self {
        Self {
            modes: vec![ModeDeformation {
                xi_a: state.xi_a,
                xi_b: state.xi_b,
                zeta_a: state.zeta_a,
                zeta_b: state.zeta_b,
            }],
            alpha: state.alpha,
            beta: state.beta,
        }
    }

    pub fn norm_residual(&self, params: &ModeParams) -> Result<f64> {
        let els = elements(params, &self.modes)?;
        let s: f64 = els.iter().map(|e| e.ov.s_ab).product();
        Ok((self.alpha * self.alpha + self.beta * self.beta + 2.0 * self.alpha * self.beta * s - 1.0).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultimodeObservables {
    pub energy: f64,
    /// ⟨aₖ†aₖ⟩ per mode.
    pub photon_numbers: Vec<f64>,
    /// ⟨σ_x⟩
    pub tunneling: f64,
}

fn elements(params: &ModeParams, modes: &[ModeDeformation]) -> Result<Vec<Elements>> {
    params
        .modes
        .iter()
        .zip(modes)
        .map(|(&(w, g), d)| {
            Elements::compute_raw(
                w,
                std::f64::consts::SQRT_2 * g / w,
                0,
                d.xi_a,
                d.xi_b,
                d.zeta_a,
                d.zeta_b,
            )
        })
        .collect()
}

/// Σₖ [αα, ββ, αβ] entries of a one-mode operator dressed by the other
/// modes' overlaps.
fn dressed(els: &[Elements], pick: impl Fn(&Elements) -> [f64; 3], k: usize) -> [f64; 3] {
    let others: f64 = els
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != k)
        .map(|(_, e)| e.ov.s_ab)
        .product();
    let m = pick(&els[k]);
    [m[0], m[1], m[2] * others]
}

fn evaluate(params: &ModeParams, state: &MultimodeState) -> Result<MultimodeObservables> {
    let els = elements(params, &state.modes)?;
    let (a, b) = (state.alpha, state.beta);
    let quad = |m: [f64; 3]| a * a * m[0] + b * b * m[1] + 2.0 * a * b * m[2];
    let mut h = 0.0;
    let mut photons = Vec::with_capacity(els.len());
    let mut e0 = 0.0;
    for (k, &(w, g)) in params.modes.iter().enumerate() {
        h += quad(dressed(&els, |e| e.h, k));
        photons.push(quad(dressed(&els, |e| e.h0, k)) / w - 0.5);
        let gp = std::f64::consts::SQRT_2 * g / w;
        e0 -= 0.5 * w * (gp * gp + 1.0);
    }
    let prod = |f: fn(&Elements) -> f64| els.iter().map(f).product::<f64>();
    let reflected =
        a * a * prod(|e| e.ov.s_aa_bar) + b * b * prod(|e| e.ov.s_bb_bar) + 2.0 * a * b * prod(|e| e.ov.s_ab_bar);
    let eta = params.parity.sign();
    Ok(MultimodeObservables {
        energy: h + eta * 0.5 * params.big_omega * reflected + e0,
        photon_numbers: photons,
        tunneling: eta * reflected,
    })
}

pub fn multimode_energy(params: &ModeParams, state: &MultimodeState) -> Result<f64> {
    Ok(evaluate(params, state)?.energy)
}

pub fn multimode_observables(params: &ModeParams, state: &MultimodeState) -> Result<MultimodeObservables> {
    evaluate(params, state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultimodeSolution {
    pub state: MultimodeState,
    pub observables: MultimodeObservables,
    pub converged: bool,
    pub objective_evals: usize,
}

fn expand(q: &[f64]) -> (Vec<ModeDeformation>, f64) {
    let m = (q.len() - 1) / 4;
    let modes = (0..m)
        .map(|k| ModeDeformation {
            xi_a: q[4 * k].exp(),
            xi_b: q[4 * k + 1].exp(),
            zeta_a: q[4 * k + 2],
            zeta_b: q[4 * k + 3],
        })
        .collect();
    (modes, 1.0 / (1.0 + (-q[4 * m]).exp()))
}

fn project(modes: &[ModeDeformation], alpha: f64) -> Vec<f64> {
    let a = alpha.clamp(1e-8, 1.0 - 1e-8);
    modes
        .iter()
        .flat_map(|d| [d.xi_a.ln(), d.xi_b.ln(), d.zeta_a, d.zeta_b])
        .chain(std::iter::once((a / (1.0 - a)).ln()))
        .collect()
}

/// Minimize over the 4M + 1 parameters. One mode delegates to the
/// single-mode solver.
pub fn multimode_optimize(
    params: &ModeParams,
    cfg: &OptimizerConfig,
    warm: Option<&MultimodeState>,
) -> Result<MultimodeSolution> {
    multimode_optimize_capped(params, cfg, warm, DEFAULT_MODE_CAP)
}

pub fn multimode_optimize_capped(
    params: &ModeParams,
    cfg: &OptimizerConfig,
    warm: Option<&MultimodeState>,
    mode_cap: usize,
) -> Result<MultimodeSolution> {
    params.validate()?;
    if params.len() > mode_cap {
        return Err(RabiError::InvalidParameter(format!(
            "{} modes exceed the cap of {mode_cap}",
            params.len()
        )));
    }
    if params.len() == 1 {
        let single_warm = warm.map(|w| VariationalState {
            xi_a: w.modes[0].xi_a,
            xi_b: w.modes[0].xi_b,
            zeta_a: w.modes[0].zeta_a,
            zeta_b: w.modes[0].zeta_b,
            alpha: w.alpha,
            beta: w.beta,
        });
        let sol = optimize_ground_from(&params.mode(0), cfg, single_warm.as_ref())?;
        let state = MultimodeState::from_single(&sol.state);
        return Ok(MultimodeSolution {
            observables: evaluate(params, &state)?,
            state,
            converged: sol.converged,
            objective_evals: sol.objective_evals,
        });
    }
    if params.modes.iter().all(|&(_, g)| g == 0.0) {
        let modes = vec![
            ModeDeformation {
                xi_a: 1.0,
                xi_b: 1.0,
                zeta_a: 0.0,
                zeta_b: 0.0,
            };
            params.len()
        ];
        let state = MultimodeState {
            modes,
            alpha: 1.0,
            beta: 0.0,
        };
        return Ok(MultimodeSolution {
            observables: evaluate(params, &state)?,
            state,
            converged: true,
            objective_evals: 0,
        });
    }

    let scale = params.modes.iter().map(|m| m.0).fold(params.big_omega, f64::max);
    let opts = SimplexOptions {
        tol_f: cfg.tol_energy * scale,
        tol_x: cfg.tol_param,
        max_evals: cfg.max_evals * params.len(),
        initial_step: cfg.initial_step,
    };
    let f = |q: &[f64]| {
        let (modes, alpha) = expand(q);
        MultimodeState::new(params, modes, alpha)
            .and_then(|s| multimode_energy(params, &s))
            .unwrap_or(f64::NAN)
    };

    let unit = |z: f64| ModeDeformation {
        xi_a: 1.0,
        xi_b: 1.0,
        zeta_a: z,
        zeta_b: z,
    };
    let collapse: Vec<ModeDeformation> = params
        .modes
        .iter()
        .map(|&(w, g)| {
            let r = if g > 0.0 {
                semiclassical_coupling(w, params.big_omega) / g
            } else {
                f64::INFINITY
            };
            unit((1.0 - r.powi(4)).max(0.0).sqrt())
        })
        .collect();
    let mut starts = vec![project(&vec![unit(1.0); params.len()], 0.95), project(&collapse, 0.7)];
    if let Some(w) = warm {
        if w.modes.len() == params.len() {
            starts.push(project(&w.modes, w.alpha));
        }
    }
    let heavy: Vec<ModeDeformation> = collapse.iter().map(|d| unit(d.zeta_a.max(0.5))).collect();
    starts.push(project(&heavy, 0.4));

    let mut evals = 0;
    let mut best: Option<crate::optimize::SimplexResult> = None;
    for q0 in starts {
        let r = nelder_mead(f, &q0, &opts);
        evals += r.evals;
        if best.as_ref().is_none_or(|b| r.f < b.f) {
            best = Some(r);
        }
    }
    let mut best = best.expect("at least one start");
    for _ in 0..cfg.restarts {
        let r = nelder_mead(f, &best.x, &opts);
        evals += r.evals;
        let improved = r.f < best.f - opts.tol_f;
        if r.f <= best.f {
            best = r;
        }
        if !improved && best.converged {
            break;
        }
    }
    let (modes, alpha) = expand(&best.x);
    let state = MultimodeState::new(params, modes, alpha)?;
    Ok(MultimodeSolution {
        observables: evaluate(params, &state)?,
        state,
        converged: best.converged,
        objective_evals: evals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoModeEdConfig {
    /// Initial cutoffs; `None` uses max(16, ⌈8(gₖ/ωₖ)²⌉).
    pub n_max: [Option<usize>; 2],
    pub tol_convergence: f64,
    /// Largest product basis n₁·n₂·2 allowed.
    pub max_basis: usize,
    pub max_lanczos: usize,
}

impl Default for TwoModeEdConfig {
    fn default() -> Self {
        Self {
            n_max: [None, None],
            tol_convergence: 1e-10,
            max_basis: 200_000,
            max_lanczos: 600,
        }
    }
}

/// Ground state of the two-mode model in the truncated product basis.
///
/// The parity block of `params.parity` is diagonalized by Lanczos
/// iteration; the cutoffs of both modes double together until the ground
/// energy settles.
pub fn two_mode_ed(params: &ModeParams, cfg: &TwoModeEdConfig) -> Result<EDSolution> {
    params.validate()?;
    if params.len() != 2 {
        return Err(RabiError::InvalidParameter(format!(
            "two modes required, got {}",
            params.len()
        )));
    }
    let mut n: Vec<usize> = (0..2)
        .map(|k| cfg.n_max[k].unwrap_or_else(|| initial_cutoff(params.modes[k].1, params.modes[k].0, 16)))
        .collect();
    let basis = |n: &[usize]| 2 * (n[0] + 1) * (n[1] + 1);
    let scale = params.modes.iter().map(|m| m.0).fold(params.big_omega, f64::max);
    if basis(&n) > cfg.max_basis {
        return Err(RabiError::TruncationNotConverged {
            cap: cfg.max_basis,
            last_change: f64::INFINITY,
        });
    }
    let mut prev = block_ground(params, &n, cfg.max_lanczos);
    loop {
        let next_n: Vec<usize> = n.iter().map(|v| 2 * v).collect();
        if basis(&next_n) > cfg.max_basis {
            return Err(RabiError::TruncationNotConverged {
                cap: cfg.max_basis,
                last_change: f64::INFINITY,
            });
        }
        let next = block_ground(params, &next_n, cfg.max_lanczos);
        let change = (next.energies[0] - prev.energies[0]).abs() / prev.energies[0].abs().max(scale);
        n = next_n;
        prev = next;
        if change < cfg.tol_convergence {
            prev.converged = true;
            return Ok(prev);
        }
    }
}

fn block_ground(params: &ModeParams, n: &[usize], max_lanczos: usize) -> EDSolution {
    let (d1, d2) = (n[0] + 1, n[1] + 1);
    let dim = d1 * d2;
    let (w1, g1) = params.modes[0];
    let (w2, g2) = params.modes[1];
    let half = 0.5 * params.big_omega * params.parity.sign();
    let diag: Vec<f64> = (0..dim)
        .map(|idx| {
            let (n1, n2) = (idx / d2, idx % d2);
            w1 * n1 as f64 + w2 * n2 as f64 + if (n1 + n2) % 2 == 0 { half } else { -half }
        })
        .collect();
    let sq: Vec<f64> = (0..d1.max(d2)).map(|k| (k as f64).sqrt()).collect();
    let apply = |x: &[f64], y: &mut [f64]| {
        for idx in 0..dim {
            let (n1, n2) = (idx / d2, idx % d2);
            let mut s = diag[idx] * x[idx];
            if n1 > 0 {
                s += g1 * sq[n1] * x[idx - d2];
            }
            if n1 + 1 < d1 {
                s += g1 * sq[n1 + 1] * x[idx + d2];
            }
            if n2 > 0 {
                s += g2 * sq[n2] * x[idx - 1];
            }
            if n2 + 1 < d2 {
                s += g2 * sq[n2 + 1] * x[idx + 1];
            }
            y[idx] = s;
        }
    };
    let r = lanczos_lowest(dim, apply, max_lanczos, 1e-14);
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let mut coeffs = Vec::with_capacity(2 * dim);
    for (idx, c) in r.vector.iter().enumerate() {
        let total = idx / d2 + idx % d2;
        let sx = params.parity.sign() * if total % 2 == 0 { 1.0 } else { -1.0 };
        coeffs.push(inv * c);
        coeffs.push(inv * sx * c);
    }
    EDSolution {
        energies: vec![r.value],
        coefficients: vec![coeffs],
        parities: vec![params.parity],
        n_max_used: n[0].max(n[1]),
        mode_dims: vec![d1, d2],
        converged: false,
    }
}
