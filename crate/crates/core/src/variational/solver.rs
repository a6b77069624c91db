use serde::{Deserialize, Serialize};

use super::{observables_at_level, Elements, Observables, VariationalState};
use crate::error::Result;
use crate::optimize::{nelder_mead, SimplexOptions};
use crate::params::ModelParams;

const ALPHA_CLAMP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Simplex value spread at convergence, in units of max(ω, Ω).
    pub tol_energy: f64,
    /// Simplex vertex spread at convergence (transformed coordinates).
    pub tol_param: f64,
    /// Objective evaluations allowed per start.
    pub max_evals: usize,
    /// Extra simplex runs launched from the best point found.
    pub restarts: usize,
    /// Minima closer than this (units of max(ω, Ω)) count as ties; the larger α wins.
    pub tie_tolerance: f64,
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tol_energy: 1e-12,
            tol_param: 1e-8,
            max_evals: 20_000,
            restarts: 2,
            tie_tolerance: 1e-10,
            initial_step: 0.1,
        }
    }
}

/// Parameter subsets for the ablation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSet {
    #[default]
    Full,
    /// ξ_α = ξ_β and ζ_α = ζ_β.
    Symmetric,
    /// ξ_α = ξ_β = 1.
    NoSqueeze,
}

impl ConstraintSet {
    fn dim(self) -> usize {
        match self {
            ConstraintSet::Full => 5,
            ConstraintSet::Symmetric | ConstraintSet::NoSqueeze => 3,
        }
    }

    /// (ξ_α, ξ_β, ζ_α, ζ_β, α) from transformed coordinates.
    fn expand(self, q: &[f64]) -> [f64; 5] {
        match self {
            ConstraintSet::Full => [q[0].exp(), q[1].exp(), q[2], q[3], logistic(q[4])],
            ConstraintSet::Symmetric => {
                let xi = q[0].exp();
                [xi, xi, q[1], q[1], logistic(q[2])]
            }
            ConstraintSet::NoSqueeze => [1.0, 1.0, q[0], q[1], logistic(q[2])],
        }
    }

    fn project(self, p: &[f64; 5]) -> Vec<f64> {
        let [xa, xb, za, zb, a] = *p;
        let u = logit(a.clamp(ALPHA_CLAMP, 1.0 - ALPHA_CLAMP));
        match self {
            ConstraintSet::Full => vec![xa.ln(), xb.ln(), za, zb, u],
            ConstraintSet::Symmetric => vec![(0.5 * (xa + xb)).ln(), 0.5 * (za + zb), u],
            ConstraintSet::NoSqueeze => vec![za, zb, u],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariationalSolution {
    pub state: VariationalState,
    pub observables: Observables,
    pub converged: bool,
    pub restarts_used: usize,
    pub objective_evals: usize,
    pub level: usize,
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

fn logit(a: f64) -> f64 {
    (a / (1.0 - a)).ln()
}

/// Energy at a raw parameter tuple; NaN when the tuple is not admissible.
fn objective(params: &ModelParams, level: usize, p: &[f64; 5]) -> f64 {
    let [xa, xb, za, zb, a] = *p;
    VariationalState::at_level(params, level, xa, xb, za, zb, a)
        .and_then(|st| Elements::compute(params, level, &st).map(|el| super::energy_from(params, &st, &el)))
        .unwrap_or(f64::NAN)
}

fn seeds(params: &ModelParams, warm: Option<&VariationalState>) -> Vec<[f64; 5]> {
    let ratio = params.derive().map(|d| d.gc0 / params.g).unwrap_or(0.0);
    let z_sym = (1.0 - ratio.powi(4)).max(0.0).sqrt();
    let mut out = vec![[1.0, 1.0, 1.0, 1.0, 0.95], [1.0, 1.0, z_sym, z_sym, 0.7]];
    if let Some(w) = warm {
        if w.xi_a > 0.0 && w.xi_b > 0.0 && w.alpha.is_finite() {
            out.push([w.xi_a, w.xi_b, w.zeta_a, w.zeta_b, w.alpha]);
        }
    }
    out.push([1.0, 1.0, z_sym.max(0.5), z_sym.max(0.5), 0.4]);
    // Deep coupling: a faint antipolaron balances its displacement cost
    // 2ωg′²β² against the tunneling gain Ωβ.
    let gp2 = params.gprime().powi(2);
    if gp2 > 0.0 && params.big_omega > 0.0 {
        let b = (params.big_omega / (4.0 * params.omega * gp2)).clamp(1e-6, 0.3);
        out.push([1.0, 1.0, 1.0, 1.0, (1.0 - b * b).sqrt()]);
    }
    out
}

fn decoupled(params: &ModelParams, level: usize) -> Result<VariationalSolution> {
    let state = VariationalState::polaron(0.0, 1.0);
    Ok(VariationalSolution {
        state,
        observables: observables_at_level(params, &state, level)?,
        converged: true,
        restarts_used: 0,
        objective_evals: 0,
        level,
    })
}

fn minimize(
    params: &ModelParams,
    level: usize,
    constraints: ConstraintSet,
    cfg: &OptimizerConfig,
    warm: Option<&VariationalState>,
) -> Result<VariationalSolution> {
    params.validate()?;
    if params.g == 0.0 {
        return decoupled(params, level);
    }
    let scale = params.omega.max(params.big_omega);
    let opts = SimplexOptions {
        tol_f: cfg.tol_energy * scale,
        tol_x: cfg.tol_param,
        max_evals: cfg.max_evals,
        initial_step: cfg.initial_step,
    };
    let f = |q: &[f64]| objective(params, level, &constraints.expand(q));

    let mut evals = 0;
    let mut candidates = Vec::new();
    for seed in seeds(params, warm) {
        let q0 = constraints.project(&seed);
        let r = nelder_mead(f, &q0, &opts);
        evals += r.evals;
        if r.f.is_finite() {
            candidates.push(r);
        }
    }
    debug_assert_eq!(candidates.first().map(|c| c.x.len()), Some(constraints.dim()));

    let tie = cfg.tie_tolerance * scale;
    let pick = |cands: &[crate::optimize::SimplexResult]| -> usize {
        let best_f = cands.iter().map(|c| c.f).fold(f64::INFINITY, f64::min);
        let mut idx = 0;
        let mut best_alpha = f64::NEG_INFINITY;
        for (i, c) in cands.iter().enumerate() {
            if c.f <= best_f + tie {
                let a = canonical_alpha(params, level, &constraints.expand(&c.x));
                if a > best_alpha + 1e-12 {
                    best_alpha = a;
                    idx = i;
                }
            }
        }
        idx
    };
    let mut best = candidates.swap_remove(pick(&candidates));

    let mut restarts_used = 0;
    for _ in 0..cfg.restarts {
        let r = nelder_mead(f, &best.x, &opts);
        evals += r.evals;
        restarts_used += 1;
        let improved = r.f < best.f - opts.tol_f;
        if r.f <= best.f {
            best = r;
        } else {
            best.converged = best.converged && r.converged;
        }
        if !improved && best.converged {
            break;
        }
    }

    let [xa, xb, za, zb, a] = constraints.expand(&best.x);
    let state = VariationalState::at_level(params, level, xa, xb, za, zb, a)?.canonical();
    Ok(VariationalSolution {
        state,
        observables: observables_at_level(params, &state, level)?,
        converged: best.converged,
        restarts_used,
        objective_evals: evals,
        level,
    })
}

fn canonical_alpha(params: &ModelParams, level: usize, p: &[f64; 5]) -> f64 {
    let [xa, xb, za, zb, a] = *p;
    VariationalState::at_level(params, level, xa, xb, za, zb, a)
        .map(|s| s.canonical().alpha)
        .unwrap_or(f64::NEG_INFINITY)
}

/// Minimize the ground-level energy over all five parameters.
pub fn optimize_ground(params: &ModelParams, cfg: &OptimizerConfig) -> Result<VariationalSolution> {
    minimize(params, 0, ConstraintSet::Full, cfg, None)
}

/// As [`optimize_ground`], adding `warm` as an extra start.
pub fn optimize_ground_from(
    params: &ModelParams,
    cfg: &OptimizerConfig,
    warm: Option<&VariationalState>,
) -> Result<VariationalSolution> {
    minimize(params, 0, ConstraintSet::Full, cfg, warm)
}

pub fn optimize_constrained(
    params: &ModelParams,
    constraints: ConstraintSet,
    cfg: &OptimizerConfig,
    warm: Option<&VariationalState>,
) -> Result<VariationalSolution> {
    minimize(params, 0, constraints, cfg, warm)
}

/// Minimize the level-n functional for the parity carried by `params`.
///
/// No orthogonalization against lower levels is imposed.
pub fn optimize_level(
    params: &ModelParams,
    level: usize,
    cfg: &OptimizerConfig,
    warm: Option<&VariationalState>,
) -> Result<VariationalSolution> {
    minimize(params, level, ConstraintSet::Full, cfg, warm)
}

/// Level-n energy together with its optimized state.
pub fn excited_energy(params: &ModelParams, level: usize, cfg: &OptimizerConfig) -> Result<(f64, VariationalSolution)> {
    let sol = optimize_level(params, level, cfg, None)?;
    Ok((sol.observables.energy, sol))
}
