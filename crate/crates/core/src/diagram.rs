//! Coupling sweeps, region labels and the boundaries of the ground-state
//! diagram in the (g, ω/Ω) plane.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};
use crate::exact::{self, EDConfig};
use crate::optimize::{bisect, golden_section};
use crate::params::{changeover_coupling, ModelParams, RegionLabel};
use crate::variational::{optimize_ground_from, Observables, OptimizerConfig, VariationalState};

pub const CELL_HEADER: [&str; 21] = [
    "omega",
    "bigOmega",
    "g",
    "g_over_gc",
    "region",
    "gamma",
    "energy",
    "photon_number",
    "sigma_x",
    "coupling_corr",
    "alpha",
    "beta",
    "xiA",
    "xiB",
    "zetaA",
    "zetaB",
    "ch_aa",
    "ch_bb",
    "ch_ab",
    "ch_ba",
    "converged",
];

pub const ED_HEADER: [&str; 6] = [
    "ed_energy",
    "ed_photon_number",
    "ed_sigma_x",
    "ed_coupling_corr",
    "ed_gamma",
    "ed_n_max",
];

/// A range of g/g_c sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioScan {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl RatioScan {
    pub fn ratios(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.points)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagramConfig {
    pub optimizer: OptimizerConfig,
    /// Weighted overlap below which a left–right channel counts as closed.
    pub channel_floor: f64,
    /// Half-width of the crossover band in units of g_c.
    pub crossover_band: f64,
    /// Absolute tolerance in g (units of Ω) for bisection and golden section.
    pub search_tol: f64,
    /// Attach exact-diagonalization columns to sweep cells.
    pub with_ed: bool,
    pub ed: EDConfig,
    /// Where to look for α = β crossings.
    pub weight_scan: RatioScan,
    /// Where to look for the minimum of (ξ_α + ξ_β)/2 and the maximum of γ.
    pub extremum_scan: RatioScan,
    /// Compute the numerical boundary curves in [`build_diagram`].
    pub boundaries: bool,
}

impl Default for DiagramConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            channel_floor: 1e-3,
            crossover_band: 0.1,
            search_tol: 1e-4,
            with_ed: false,
            ed: EDConfig::default(),
            weight_scan: RatioScan {
                min: 0.3,
                max: 1.1,
                points: 33,
            },
            extremum_scan: RatioScan {
                min: 0.5,
                max: 1.8,
                points: 27,
            },
            boundaries: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagramCell {
    pub g: f64,
    pub omega: f64,
    pub big_omega: f64,
    pub g_over_gc: f64,
    pub region: RegionLabel,
    pub gamma: Option<f64>,
    pub state: VariationalState,
    pub observables: Observables,
    pub converged: bool,
    pub ed: Option<EdColumns>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdColumns {
    pub observables: Observables,
    pub n_max_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    GcAnalytic,
    XiMinimum,
    WeightCrossingLower,
    WeightCrossingUpper,
}

impl BoundaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryKind::GcAnalytic => "gc_analytic",
            BoundaryKind::XiMinimum => "xi_minimum",
            BoundaryKind::WeightCrossingLower => "weight_crossing_lower",
            BoundaryKind::WeightCrossingUpper => "weight_crossing_upper",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub kind: BoundaryKind,
    /// (ω/Ω, g), sorted by ω/Ω.
    pub points: Vec<(f64, f64)>,
}

/// Region of one converged point.
pub fn classify(params: &ModelParams, state: &VariationalState, obs: &Observables, cfg: &DiagramConfig) -> RegionLabel {
    let gc = params.gc();
    let ratio = params.g / gc;
    if (ratio - 1.0).abs() <= cfg.crossover_band {
        return RegionLabel::Crossover;
    }
    // Without splitting there is no tunneling, so every channel is closed.
    let (aa, bb) = match obs.channels {
        Some(c) if params.big_omega > 0.0 => (c.aa, c.bb),
        _ => (0.0, 0.0),
    };
    if params.g > gc && aa < cfg.channel_floor && bb < cfg.channel_floor {
        RegionLabel::Bipolaron
    } else if state.beta > state.alpha {
        RegionLabel::QuadpolaronOverweighted
    } else {
        RegionLabel::QuadpolaronNormal
    }
}

fn make_cell(
    params: &ModelParams,
    sol: &crate::variational::VariationalSolution,
    cfg: &DiagramConfig,
) -> Result<DiagramCell> {
    let ed = if cfg.with_ed {
        let s = exact::solve(params, &cfg.ed)?;
        Some(EdColumns {
            observables: exact::ed_observables(&s, params),
            n_max_used: s.n_max_used,
        })
    } else {
        None
    };
    Ok(DiagramCell {
        g: params.g,
        omega: params.omega,
        big_omega: params.big_omega,
        g_over_gc: params.g / params.gc(),
        region: classify(params, &sol.state, &sol.observables, cfg),
        gamma: sol.observables.gamma,
        state: sol.state,
        observables: sol.observables,
        converged: sol.converged,
        ed,
    })
}

/// Optimize along an ascending g grid, each point warm-started from the last.
pub fn sweep_g(template: &ModelParams, g_grid: &[f64], cfg: &DiagramConfig) -> Result<Vec<DiagramCell>> {
    if g_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(RabiError::InvalidParameter("g grid must be ascending".into()));
    }
    let mut warm: Option<VariationalState> = None;
    let mut cells = Vec::with_capacity(g_grid.len());
    for &g in g_grid {
        let params = template.with_g(g);
        params.validate()?;
        let sol = optimize_ground_from(&params, &cfg.optimizer, warm.as_ref())?;
        warm = Some(sol.state);
        cells.push(make_cell(&params, &sol, cfg)?);
    }
    Ok(cells)
}

fn template(omega_ratio: f64, big_omega: f64) -> Result<ModelParams> {
    ModelParams::new(omega_ratio * big_omega, big_omega, 0.0)
}

/// Couplings bounding the β > α window, if one exists on the scan range.
///
/// A window already open at an end of the scan reports that end.
pub fn weight_crossing(omega_ratio: f64, big_omega: f64, cfg: &DiagramConfig) -> Result<Option<(f64, f64)>> {
    let tpl = template(omega_ratio, big_omega)?;
    let gc = tpl.gc();
    let gs: Vec<f64> = cfg.weight_scan.ratios().iter().map(|r| r * gc).collect();
    let cells = sweep_g(&tpl, &gs, &DiagramConfig { with_ed: false, ..*cfg })?;
    let diff: Vec<f64> = cells.iter().map(|c| c.state.alpha - c.state.beta).collect();
    let Some(first) = diff.iter().position(|d| *d < 0.0) else {
        return Ok(None);
    };
    let last = diff.iter().rposition(|d| *d < 0.0).unwrap();
    let tol = cfg.search_tol * big_omega.max(f64::MIN_POSITIVE);
    let refine = |i: usize, j: usize| -> f64 {
        let warm = cells[i].state;
        bisect(
            |g| {
                optimize_ground_from(&tpl.with_g(g), &cfg.optimizer, Some(&warm))
                    .map(|s| s.state.alpha - s.state.beta)
                    .unwrap_or(f64::NAN)
            },
            gs[i],
            gs[j],
            tol,
        )
        .unwrap_or(0.5 * (gs[i] + gs[j]))
    };
    let lower = if first == 0 { gs[0] } else { refine(first - 1, first) };
    let upper = if last + 1 == gs.len() {
        gs[last]
    } else {
        refine(last, last + 1)
    };
    Ok(Some((lower, upper)))
}

/// Sample a scalar of the optimized state along the scan and refine its
/// interior extremum by golden section, re-optimizing at every probe.
fn refine_extremum<F>(omega_ratio: f64, big_omega: f64, cfg: &DiagramConfig, value: F) -> Result<f64>
where
    F: Fn(&ModelParams, &crate::variational::VariationalSolution) -> f64,
{
    let tpl = template(omega_ratio, big_omega)?;
    let gc = tpl.gc();
    let gs: Vec<f64> = cfg.extremum_scan.ratios().iter().map(|r| r * gc).collect();
    let mut warm: Option<VariationalState> = None;
    let mut samples = Vec::with_capacity(gs.len());
    let mut states = Vec::with_capacity(gs.len());
    for &g in &gs {
        let p = tpl.with_g(g);
        let sol = optimize_ground_from(&p, &cfg.optimizer, warm.as_ref())?;
        warm = Some(sol.state);
        samples.push(value(&p, &sol));
        states.push(sol.state);
    }
    let spread =
        samples.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v)) - samples.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let imin = (0..samples.len())
        .min_by(|&a, &b| samples[a].total_cmp(&samples[b]))
        .ok_or(RabiError::NoInteriorMinimum)?;
    if spread < 1e-9 || imin == 0 || imin + 1 == samples.len() {
        return Err(RabiError::NoInteriorMinimum);
    }
    let warm = states[imin];
    let tol = cfg.search_tol * big_omega.max(f64::MIN_POSITIVE);
    let (g, _) = golden_section(
        |g| {
            let p = tpl.with_g(g);
            optimize_ground_from(&p, &cfg.optimizer, Some(&warm))
                .map(|s| value(&p, &s))
                .unwrap_or(f64::INFINITY)
        },
        gs[imin - 1],
        gs[imin + 1],
        tol,
    );
    Ok(g)
}

/// Coupling at which (ξ_α + ξ_β)/2 of the optimized state is smallest.
pub fn xi_minimum(omega_ratio: f64, big_omega: f64, cfg: &DiagramConfig) -> Result<f64> {
    if big_omega == 0.0 {
        return Err(RabiError::NoInteriorMinimum);
    }
    refine_extremum(omega_ratio, big_omega, cfg, |_, s| s.state.xi_mean())
}

/// Coupling at which the variational γ peaks.
pub fn gamma_maximum_variational(omega_ratio: f64, big_omega: f64, cfg: &DiagramConfig) -> Result<f64> {
    refine_extremum(omega_ratio, big_omega, cfg, |_, s| -s.observables.gamma.unwrap_or(0.0))
}

/// Coupling at which the exact γ peaks.
pub fn gamma_maximum_exact(omega_ratio: f64, big_omega: f64, cfg: &DiagramConfig) -> Result<f64> {
    let tpl = template(omega_ratio, big_omega)?;
    let gc = tpl.gc();
    let gamma_at = |g: f64| -> Result<f64> {
        let p = tpl.with_g(g);
        let s = exact::solve(&p, &EDConfig { n_levels: 1, ..cfg.ed })?;
        Ok(exact::ed_observables(&s, &p).gamma.unwrap_or(0.0))
    };
    let gs: Vec<f64> = cfg.extremum_scan.ratios().iter().map(|r| r * gc).collect();
    let samples = gs.iter().map(|&g| gamma_at(g)).collect::<Result<Vec<_>>>()?;
    let imax = (0..samples.len())
        .max_by(|&a, &b| samples[a].total_cmp(&samples[b]))
        .ok_or(RabiError::NoInteriorMinimum)?;
    if imax == 0 || imax + 1 == samples.len() {
        return Err(RabiError::NoInteriorMinimum);
    }
    let tol = cfg.search_tol * big_omega;
    let (g, _) = golden_section(|g| -gamma_at(g).unwrap_or(0.0), gs[imax - 1], gs[imax + 1], tol);
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    /// Ordered by (ω index, g index).
    pub cells: Vec<DiagramCell>,
    pub boundaries: Vec<BoundaryCurve>,
}

/// Evaluate every (ω/Ω, g/g_c) cell, columns in parallel.
pub fn build_diagram(omega_ratios: &[f64], g_over_gc: &[f64], big_omega: f64, cfg: &DiagramConfig) -> Result<Diagram> {
    let mut ratios = omega_ratios.to_vec();
    ratios.sort_by(f64::total_cmp);
    struct Column {
        cells: Vec<DiagramCell>,
        ratio: f64,
        gc: f64,
        xi_min: Option<f64>,
        window: Option<(f64, f64)>,
    }
    let columns = ratios
        .par_iter()
        .map(|&ratio| -> Result<Column> {
            let tpl = template(ratio, big_omega)?;
            let gc = tpl.gc();
            let gs: Vec<f64> = g_over_gc.iter().map(|r| r * gc).collect();
            let cells = sweep_g(&tpl, &gs, cfg)?;
            let (xi_min, window) = if cfg.boundaries {
                (
                    xi_minimum(ratio, big_omega, cfg).ok(),
                    weight_crossing(ratio, big_omega, cfg)?,
                )
            } else {
                (None, None)
            };
            Ok(Column {
                cells,
                ratio,
                gc,
                xi_min,
                window,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut boundaries = vec![
        BoundaryCurve {
            kind: BoundaryKind::GcAnalytic,
            points: columns.iter().map(|c| (c.ratio, c.gc)).collect(),
        },
        BoundaryCurve {
            kind: BoundaryKind::XiMinimum,
            points: columns.iter().filter_map(|c| c.xi_min.map(|g| (c.ratio, g))).collect(),
        },
        BoundaryCurve {
            kind: BoundaryKind::WeightCrossingLower,
            points: columns
                .iter()
                .filter_map(|c| c.window.map(|w| (c.ratio, w.0)))
                .collect(),
        },
        BoundaryCurve {
            kind: BoundaryKind::WeightCrossingUpper,
            points: columns
                .iter()
                .filter_map(|c| c.window.map(|w| (c.ratio, w.1)))
                .collect(),
        },
    ];
    if !cfg.boundaries {
        boundaries.truncate(1);
    }
    Ok(Diagram {
        cells: columns.into_iter().flat_map(|c| c.cells).collect(),
        boundaries,
    })
}

/// Analytic g_c for each ratio at splitting `big_omega`.
pub fn gc_curve(omega_ratios: &[f64], big_omega: f64) -> BoundaryCurve {
    BoundaryCurve {
        kind: BoundaryKind::GcAnalytic,
        points: omega_ratios
            .iter()
            .map(|&r| (r, changeover_coupling(r * big_omega, big_omega)))
            .collect(),
    }
}

/// Scientific notation with 16 fractional digits; non-finite values as `nan`.
pub fn fmt_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "nan".to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_else(|| "nan".to_string())
}

/// One CSV row per cell; ED columns are appended when any cell carries them.
pub fn write_cells_csv<W: Write>(cells: &[DiagramCell], out: W) -> Result<()> {
    let with_ed = cells.iter().any(|c| c.ed.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = CELL_HEADER.to_vec();
    if with_ed {
        header.extend(ED_HEADER);
    }
    w.write_record(&header)?;
    for c in cells {
        let ch = c.observables.channels;
        let mut row = vec![
            fmt_float(c.omega),
            fmt_float(c.big_omega),
            fmt_float(c.g),
            fmt_float(c.g_over_gc),
            c.region.as_str().to_string(),
            fmt_opt(c.gamma),
            fmt_float(c.observables.energy),
            fmt_float(c.observables.photon_number),
            fmt_float(c.observables.tunneling),
            fmt_float(c.observables.coupling_corr),
            fmt_float(c.state.alpha),
            fmt_float(c.state.beta),
            fmt_float(c.state.xi_a),
            fmt_float(c.state.xi_b),
            fmt_float(c.state.zeta_a),
            fmt_float(c.state.zeta_b),
            fmt_opt(ch.map(|x| x.aa)),
            fmt_opt(ch.map(|x| x.bb)),
            fmt_opt(ch.map(|x| x.ab)),
            fmt_opt(ch.map(|x| x.ba)),
            c.converged.to_string(),
        ];
        if with_ed {
            match &c.ed {
                Some(e) => {
                    let o = &e.observables;
                    row.extend([
                        fmt_float(o.energy),
                        fmt_float(o.photon_number),
                        fmt_float(o.tunneling),
                        fmt_float(o.coupling_corr),
                        fmt_opt(o.gamma),
                        e.n_max_used.to_string(),
                    ]);
                }
                None => row.extend(std::iter::repeat_n(String::new(), ED_HEADER.len())),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_boundaries_csv<W: Write>(curves: &[BoundaryCurve], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "omega_ratio", "g"])?;
    for c in curves {
        for &(r, g) in &c.points {
            w.write_record([c.kind.as_str().to_string(), fmt_float(r), fmt_float(g)])?;
        }
    }
    w.flush()?;
    Ok(())
}
