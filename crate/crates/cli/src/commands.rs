use std::path::Path;

use rabi_core::diagram::{self, fmt_float, DiagramConfig};
use rabi_core::exact::{self, EDConfig};
use rabi_core::multimode::{multimode_optimize, two_mode_ed, ModeParams, MultimodeSolution, TwoModeEdConfig};
use rabi_core::potential::{self, SelfConsistentConfig, Spin};
use rabi_core::variational;
use rabi_core::{ModelParams, OptimizerConfig, Parity, RabiError, VariationalState};
use serde_json::json;

use crate::args::*;
use crate::error::CliError;
use crate::output::{PlotScript, Sink};

/// What a finished command reports back to the dispatcher.
pub struct Outcome {
    /// The command with every input resolved, as recorded in the manifest.
    pub resolved: Command,
    pub converged: bool,
    pub summary: String,
}

struct Settings {
    optimizer: OptimizerConfig,
    ed: EDConfig,
    format: Format,
}

impl Settings {
    fn from_run(run: &RunSettings) -> Result<Self, CliError> {
        let mut optimizer = OptimizerConfig::default();
        let mut ed = EDConfig::default();
        if let Some(v) = run.tol_energy {
            optimizer.tol_energy = positive("tol-energy", v)?;
        }
        if let Some(v) = run.tol_param {
            optimizer.tol_param = positive("tol-param", v)?;
        }
        if let Some(v) = run.max_evals {
            optimizer.max_evals = v;
        }
        if let Some(v) = run.ed_tol {
            ed.tol_convergence = positive("ed-tol", v)?;
        }
        if let Some(v) = run.ed_n_max_cap {
            ed.n_max_cap = v;
        }
        ed.validate()?;
        Ok(Self {
            optimizer,
            ed,
            format: run.format,
        })
    }

    fn diagram(&self, with_ed: bool) -> DiagramConfig {
        DiagramConfig {
            optimizer: self.optimizer,
            ed: self.ed,
            with_ed,
            ..DiagramConfig::default()
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Invalid(format!("--{name} must be positive, got {v}")))
    }
}

/// Errors that leave a point unconverged rather than invalidating the run.
fn is_numerical(err: &RabiError) -> bool {
    matches!(CliError::from(err.clone()), CliError::NotConverged(_))
}

fn point(p: &PointArgs) -> Result<ModelParams, CliError> {
    Ok(ModelParams::new(p.omega, p.big_omega, p.g)?)
}

fn parity(p: ParityArg) -> Parity {
    match p {
        ParityArg::Negative => Parity::Negative,
        ParityArg::Positive => Parity::Positive,
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite()) || n == 0 || (n > 1 && hi <= lo) {
        return Err(CliError::Invalid(format!("bad grid [{lo}, {hi}] with {n} points")));
    }
    Ok(diagram::linspace(lo, hi, n))
}

fn x_grid(x: &XGridArgs, params: &ModelParams) -> Result<Vec<f64>, CliError> {
    let reach = params.gprime() + 5.0;
    grid(x.x_min.unwrap_or(-reach), x.x_max.unwrap_or(reach), x.x_points)
}

pub fn dispatch(command: &Command, run: &RunSettings, out: &Path) -> Result<Outcome, CliError> {
    let settings = Settings::from_run(run)?;
    let mut sink = Sink::new(out)?;
    let (stem, outcome) = match command {
        Command::Solve(a) => ("solve", solve(a, &settings, &mut sink)?),
        Command::Sweep(a) => ("sweep", sweep(a, &settings, &mut sink)?),
        Command::Diagram(a) => ("diagram", build_diagram(a, &settings, &mut sink)?),
        Command::Potential(a) => ("potential", potential(a, &settings, &mut sink)?),
        Command::Wavefunction(a) => ("wavefunction", wavefunction(a, &settings, &mut sink)?),
        Command::Multimode(a) => ("multimode", multimode(a, &settings, &mut sink)?),
        Command::Ed(a) => ("ed", ed(a, &settings, &mut sink)?),
        Command::Rerun(_) => return Err(CliError::Invalid("a manifest cannot hold a rerun".into())),
    };
    sink.finish(stem, run, &outcome.resolved)?;
    Ok(outcome)
}

fn solve(a: &SolveArgs, s: &Settings, sink: &mut Sink) -> Result<Outcome, CliError> {
    let sector = a.parity.map(parity).unwrap_or_else(|| Parity::lower_branch(a.level));
    let params = point(&a.point)?.with_parity(sector);
    let derived = params.derive()?;
    let want_var = matches!(a.method, Method::Variational | Method::Both);
    let want_ed = matches!(a.method, Method::Ed | Method::Both);
    let mut converged = true;
    let mut summary = format!(
        "omega={} Omega={} g={} level={} parity={sector}",
        params.omega, params.big_omega, params.g, a.level
    );
    let mut e_var = None;
    let mut e_ed = None;

    let variational = if want_var {
        match variational::optimize_level(&params, a.level, &s.optimizer, None) {
            Ok(sol) => {
                converged &= sol.converged;
                e_var = Some(sol.observables.energy);
                summary += &format!(" E_var={:.12}", sol.observables.energy);
                json!({
                    "level": sol.level,
                    "state": sol.state,
                    "observables": sol.observables,
                    "converged": sol.converged,
                    "objective_evals": sol.objective_evals,
                })
            }
            Err(e) if is_numerical(&e) => {
                converged = false;
                json!({ "level": a.level, "converged": false, "error": e.to_string() })
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        serde_json::Value::Null
    };

    let ed = if want_ed {
        let cfg = EDConfig {
            n_levels: s.ed.n_levels.max(a.level + 1),
            ..s.ed
        };
        match exact::solve(&params, &cfg) {
            Ok(sol) => {
                converged &= sol.converged;
                let energy = sol.energies[a.level];
                e_ed = Some(energy);
                summary += &format!(" E_ed={energy:.12}");
                json!({
                    "level": a.level,
                    "energy": energy,
                    "parity": sol.parities[a.level],
                    "observables": exact::level_observables(&sol, &params, a.level),
                    "n_max_used": sol.n_max_used,
                    "converged": sol.converged,
                })
            }
            Err(e) if is_numerical(&e) => {
                converged = false;
                json!({ "level": a.level, "converged": false, "error": e.to_string() })
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        serde_json::Value::Null
    };

    let self_consistent = if a.method == Method::SelfConsistent {
        if a.level != 0 {
            return Err(CliError::Invalid(
                "the self-consistent method covers level 0 only".into(),
            ));
        }
        match potential::self_consistent_solve(&params, &SelfConsistentConfig::default()) {
            Ok(state) => {
                let obs = variational::observables(&params, &state)?;
                e_var = Some(obs.energy);
                summary += &format!(" E_sc={:.12}", obs.energy);
                json!({ "state": state, "observables": obs, "converged": true })
            }
            Err(e) if is_numerical(&e) => {
                converged = false;
                json!({ "converged": false, "error": e.to_string() })
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        serde_json::Value::Null
    };

    let gap = match (e_var, e_ed) {
        (Some(v), Some(e)) => {
            summary += &format!(" gap={:.3e}", v - e);
            Some(v - e)
        }
        _ => None,
    };
    let record = json!({
        "params": params,
        "derived": derived,
        "method": a.method,
        "level": a.level,
        "converged": converged,
        "variational": variational,
        "ed": ed,
        "self_consistent": self_consistent,
        "energy_gap": gap,
    });
    sink.write_json("solve.json", &record)?;
    Ok(Outcome {
        resolved: Command::Solve(a.clone()),
        converged,
        summary,
    })
}

fn cell_plot(csv: &str, title: &str, with_ed: bool) -> String {
    let pair = |v: &'static str, e: &'static str| if with_ed { vec![v, e] } else { vec![v] };
    PlotScript::new(csv, title)
        .layout(2, 2)
        .panel("g", &pair("energy", "ed_energy"), "E")
        .panel("g", &pair("sigma_x", "ed_sigma_x"), "<sigma_x>")
        .panel("g", &pair("gamma", "ed_gamma"), "gamma")
        .panel("g", &["alpha", "beta", "xiA", "xiB"], "parameters")
        .render()
}

fn sweep(a: &SweepArgs, s: &Settings, sink: &mut Sink) -> Result<Outcome, CliError> {
    let tpl = ModelParams::new(a.omega_ratio * a.big_omega, a.big_omega, 0.0)?;
    let mut gs = grid(a.grid.g_min, a.grid.g_max, a.grid.g_points)?;
    if a.relative {
        gs.iter_mut().for_each(|g| *g *= tpl.gc());
    }
    let cells = diagram::sweep_g(&tpl, &gs, &s.diagram(a.with_ed))?;
    match s.format {
        Format::Csv => {
            sink.write_with("sweep.csv", |w| Ok(diagram::write_cells_csv(&cells, w)?))?;
            sink.write_text("sweep.gp", &cell_plot("sweep.csv", "coupling sweep", a.with_ed))?;
        }
        Format::Json => sink.write_json("sweep.json", &cells)?,
    }
    let ok = cells.iter().filter(|c| c.converged).count();
    let mut summary = format!("{} points, {ok} converged", cells.len());
    let gap = cells
        .iter()
        .filter_map(|c| c.ed.map(|e| (c.observables.energy - e.observables.energy).abs()))
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
    if let Some(gap) = gap {
        summary += &format!(", max |E_var - E_ed| = {gap:.3e}");
    }
    Ok(Outcome {
        resolved: Command::Sweep(a.clone()),
        converged: ok > 0,
        summary,
    })
}

fn build_diagram(a: &DiagramArgs, s: &Settings, sink: &mut Sink) -> Result<Outcome, CliError> {
    let ratios = if a.omega_ratio.is_empty() {
        grid(a.ratio_min, a.ratio_max, a.ratio_points)?
    } else {
        a.omega_ratio.clone()
    };
    let gs = grid(a.g_min, a.g_max, a.g_points)?;
    let cfg = DiagramConfig {
        boundaries: !a.no_boundaries,
        ..s.diagram(a.with_ed)
    };
    let d = diagram::build_diagram(&ratios, &gs, a.big_omega, &cfg)?;
    match s.format {
        Format::Csv => {
            sink.write_with("diagram_cells.csv", |w| Ok(diagram::write_cells_csv(&d.cells, w)?))?;
            sink.write_with("diagram_boundaries.csv", |w| {
                Ok(diagram::write_boundaries_csv(&d.boundaries, w)?)
            })?;
            let script = [
                "set datafile separator ','",
                "set datafile missing 'nan'",
                "set xlabel 'g'",
                "set ylabel 'omega/Omega'",
                "set cblabel 'gamma'",
                "plot 'diagram_cells.csv' using 'g':(column('omega')/column('bigOmega')):'gamma' with points pt 5 palette notitle, \\",
                "     'diagram_boundaries.csv' using 3:2:(stringcolumn(1)) every ::1 with points pt 7 lc variable title 'boundaries'",
                "",
            ]
            .join("\n");
            sink.write_text("diagram.gp", &script)?;
        }
        Format::Json => sink.write_json("diagram.json", &d)?,
    }
    let ok = d.cells.iter().filter(|c| c.converged).count();
    Ok(Outcome {
        resolved: Command::Diagram(DiagramArgs {
            omega_ratio: ratios,
            ..a.clone()
        }),
        converged: ok > 0,
        summary: format!(
            "{} cells, {ok} converged, {} boundary points",
            d.cells.len(),
            d.boundaries.iter().map(|b| b.points.len()).sum::<usize>()
        ),
    })
}

fn potential(a: &PotentialArgs, s: &Settings, sink: &mut Sink) -> Result<Outcome, CliError> {
    let params = point(&a.point)?;
    let xs = x_grid(&a.x, &params)?;
    let spin = match a.spin {
        SpinArg::Up => Spin::Up,
        SpinArg::Down => Spin::Down,
    };
    let mut converged = true;
    let profile = match (a.source, a.self_consistent) {
        (Source::Ed, true) => {
            return Err(CliError::Invalid(
                "--self-consistent needs the variational source".into(),
            ));
        }
        (Source::Ed, false) => {
            let sol = exact::solve(&params, &EDConfig { n_levels: 1, ..s.ed })?;
            converged = sol.converged;
            let (up, down) = exact::ed_wavefunction(&sol, &xs);
            potential::profile_from_amplitudes(&params, &xs, up, down, spin)
        }
        (Source::Variational, sc) => {
            let state: VariationalState = if sc {
                potential::self_consistent_solve(&params, &SelfConsistentConfig::default())?
            } else {
                let sol = variational::optimize_ground(&params, &s.optimizer)?;
                converged = sol.converged;
                sol.state
            };
            potential::potential_profile(&state, &params, &xs, spin)
        }
    };
    match s.format {
        Format::Csv => {
            sink.write_with("potential.csv", |w| Ok(profile.write_csv(w)?))?;
            let script = PlotScript::new("potential.csv", "effective potential")
                .layout(2, 1)
                .panel("x", &["v_bare", "v_delta", "v_total"], "v")
                .panel("x", &["psi_up", "psi_down"], "psi")
                .render();
            sink.write_text("potential.gp", &script)?;
        }
        Format::Json => sink.write_json("potential.json", &profile)?,
    }
    let undefined = (0..xs.len()).filter(|&i| !profile.is_defined(i)).count();
    Ok(Outcome {
        resolved: Command::Potential(a.clone()),
        converged,
        summary: format!("{} grid points, {undefined} below the amplitude floor", xs.len()),
    })
}

fn wavefunction(a: &WavefunctionArgs, s: &Settings, sink: &mut Sink) -> Result<Outcome, CliError> {
    let params = point(&a.point)?.with_parity(Parity::lower_branch(a.level));
    let xs = x_grid(&a.x, &params)?;
    let sol = variational::optimize_level(&params, a.level, &s.optimizer, None)?;
    let mut converged = sol.converged;
    // ψ₊ has unit norm; each spin component of the full state carries ½.
    let (up, down) = variational::wavefunction_eval_at_level(&sol.state, &params, &xs, a.level);
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let (up, down) = (
        up.iter().map(|v| v * half).collect(),
        down.iter().map(|v| v * half).collect(),
    );
    let mut header = vec!["x", "psi_up", "psi_down"];
    let mut columns = vec![xs.clone(), up, down];
    if a.with_ed {
        let ed = exact::solve(&params, &EDConfig { n_levels: 1, ..s.ed })?;
        converged &= ed.converged;
        let (eu, edn) = exact::ed_wavefunction(&ed, &xs);
        header.extend(["ed_psi_up", "ed_psi_down"]);
        columns.extend([eu, edn]);
    }
    match s.format {
        Format::Csv => {
            sink.write_with("wavefunction.csv", |w| {
                let mut out = csv::Writer::from_writer(w);
                out.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
                for i in 0..xs.len() {
                    out.write_record(columns.iter().map(|c| fmt_float(c[i])))
                        .map_err(|e| CliError::Io(e.to_string()))?;
                }
                out.flush()?;
                Ok(())
            })?;
            let script = PlotScript::new("wavefunction.csv", "spin amplitudes")
                .panel("x", &header[1..], "psi")
                .render();
            sink.write_text("wavefunction.gp", &script)?;
        }
        Format::Json => {
            let record: serde_json::Map<String, serde_json::Value> = header
                .iter()
                .zip(&columns)
                .map(|(h, c)| (h.to_string(), json!(c)))
                .collect();
            sink.write_json("wavefunction.json", &record)?;
        }
    }
    Ok(Outcome {
        resolved: Command::Wavefunction(a.clone()),
        converged,
        summary: format!("level {} energy {:.12}", a.level, sol.observables.energy),
    })
}

fn parse_pair(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Invalid(format!("mode '{text}' is not omega:g"));
    let (w, g) = text.split_once(':').ok_or_else(bad)?;
    Ok((
        w.trim().parse().map_err(|_| bad())?,
        g.trim().parse().map_err(|_| bad())?,
    ))
}

fn read_modes(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    let mut modes = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        let parsed: Option<(f64, f64)> = match (row.get(0), row.get(1)) {
            (Some(w), Some(g)) => w.parse().ok().zip(g.parse().ok()),
            _ => None,
        };
        match parsed {
            Some(m) => modes.push(m),
            // A leading header row is allowed.
            None if i == 0 => {}
            None => {
                return Err(CliError::Invalid(format!(
                    "{}: row {} is not omega,g",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(modes)
}

fn multimode(a: &MultimodeArgs, s: &Settings, sink: &mut Sink) -> Result<Outcome, CliError> {
    let modes = match &a.modes_file {
        Some(path) => read_modes(path)?,
        None => a.modes.iter().map(|m| parse_pair(m)).collect::<Result<_, _>>()?,
    };
    let base = ModeParams::new(modes.clone(), a.big_omega)?;
    if a.sweep_mode >= base.len() {
        return Err(CliError::Invalid(format!(
            "--sweep-mode {} but {} modes",
            a.sweep_mode,
            base.len()
        )));
    }
    let gs = match (a.g_min, a.g_max) {
        (Some(lo), Some(hi)) => grid(lo, hi, a.g_points)?,
        (None, None) => vec![base.modes[a.sweep_mode].1],
        _ => return Err(CliError::Invalid("--g-min and --g-max go together".into())),
    };
    let m = base.len();
    let mut header: Vec<String> = ["g_swept", "energy", "sigma_x", "alpha", "beta"]
        .map(String::from)
        .to_vec();
    header.extend((1..=m).map(|k| format!("photon_number_{k}")));
    header.push("converged".into());
    if a.with_ed {
        header.extend(["ed_energy", "ed_gap", "ed_n_max"].map(String::from));
    }
    let ed_cfg = TwoModeEdConfig {
        tol_convergence: s.ed.tol_convergence.max(TwoModeEdConfig::default().tol_convergence),
        ..TwoModeEdConfig::default()
    };
    let mut rows = Vec::with_capacity(gs.len());
    let mut warm: Option<MultimodeSolution> = None;
    let mut ok = 0;
    let mut worst_gap: f64 = 0.0;
    for &g in &gs {
        let mut p = base.clone();
        p.modes[a.sweep_mode].1 = g;
        let sol = match multimode_optimize(&p, &s.optimizer, warm.as_ref().map(|w| &w.state)) {
            Ok(sol) => Some(sol),
            Err(e) if is_numerical(&e) => None,
            Err(e) => return Err(e.into()),
        };
        let nan = f64::NAN;
        let mut row = vec![fmt_float(g)];
        match &sol {
            Some(sol) => {
                ok += sol.converged as usize;
                let o = &sol.observables;
                row.extend([o.energy, o.tunneling, sol.state.alpha, sol.state.beta].map(fmt_float));
                row.extend(o.photon_numbers.iter().map(|v| fmt_float(*v)));
                row.push(sol.converged.to_string());
            }
            None => {
                row.extend(std::iter::repeat_n(fmt_float(nan), 4 + m));
                row.push("false".into());
            }
        }
        if a.with_ed {
            match two_mode_ed(&p, &ed_cfg) {
                Ok(ed) => {
                    let e = ed.ground_energy();
                    let gap = sol.as_ref().map_or(nan, |s| s.observables.energy - e);
                    if gap.is_finite() {
                        worst_gap = worst_gap.max(gap.abs());
                    }
                    row.extend([fmt_float(e), fmt_float(gap), ed.n_max_used.to_string()]);
                }
                Err(e) if is_numerical(&e) => row.extend([fmt_float(nan), fmt_float(nan), String::new()]),
                Err(e) => return Err(e.into()),
            }
        }
        rows.push(row);
        if sol.is_some() {
            warm = sol;
        }
    }
    match s.format {
        Format::Csv => {
            sink.write_with("multimode.csv", |w| {
                let mut out = csv::Writer::from_writer(w);
                let io = |e: csv::Error| CliError::Io(e.to_string());
                out.write_record(&header).map_err(io)?;
                for r in &rows {
                    out.write_record(r).map_err(io)?;
                }
                out.flush()?;
                Ok(())
            })?;
            let energies: &[&str] = if a.with_ed {
                &["energy", "ed_energy"]
            } else {
                &["energy"]
            };
            let script = PlotScript::new("multimode.csv", "multimode sweep")
                .layout(2, 1)
                .panel("g_swept", energies, "E")
                .panel("g_swept", &["alpha", "beta", "sigma_x"], "weights")
                .render();
            sink.write_text("multimode.gp", &script)?;
        }
        Format::Json => {
            let records: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| header.iter().cloned().zip(r.iter().map(|v| json!(v))).collect())
                .collect();
            sink.write_json("multimode.json", &records)?;
        }
    }
    let mut summary = format!("{} points, {ok} converged", gs.len());
    if a.with_ed {
        summary += &format!(", max |E_var - E_ed| = {worst_gap:.3e}");
    }
    Ok(Outcome {
        resolved: Command::Multimode(MultimodeArgs {
            modes: modes.iter().map(|(w, g)| format!("{w}:{g}")).collect(),
            modes_file: None,
            ..a.clone()
        }),
        converged: ok > 0,
        summary,
    })
}

fn ed(a: &EdArgs, s: &Settings, sink: &mut Sink) -> Result<Outcome, CliError> {
    let params = point(&a.point)?;
    let cfg = EDConfig {
        n_levels: a.levels,
        n_max: a.n_max,
        ..s.ed
    };
    let sol = exact::solve(&params, &cfg)?;
    let obs = exact::ed_observables(&sol, &params);
    match s.format {
        Format::Csv => {
            sink.write_with("ed_spectrum.csv", |w| {
                let mut out = csv::Writer::from_writer(w);
                let io = |e: csv::Error| CliError::Io(e.to_string());
                out.write_record(["level", "energy", "parity"]).map_err(io)?;
                for (i, (e, p)) in sol.energies.iter().zip(&sol.parities).enumerate() {
                    out.write_record([i.to_string(), fmt_float(*e), p.to_string()])
                        .map_err(io)?;
                }
                out.flush()?;
                Ok(())
            })?;
            let script = PlotScript::new("ed_spectrum.csv", "exact spectrum")
                .panel("level", &["energy"], "E")
                .render();
            sink.write_text("ed_spectrum.gp", &script)?;
        }
        Format::Json => sink.write_json(
            "ed_spectrum.json",
            &json!({ "energies": sol.energies, "parities": sol.parities }),
        )?,
    }
    sink.write_json(
        "ed.json",
        &json!({
            "params": params,
            "ground_observables": obs,
            "n_max_used": sol.n_max_used,
            "converged": sol.converged,
        }),
    )?;
    Ok(Outcome {
        resolved: Command::Ed(a.clone()),
        converged: sol.converged,
        summary: format!("E0={:.12} n_max={}", sol.ground_energy(), sol.n_max_used),
    })
}
