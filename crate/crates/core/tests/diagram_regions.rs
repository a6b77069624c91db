use rabi_core::diagram::{self, BoundaryKind, DiagramConfig, CELL_HEADER, ED_HEADER};
use rabi_core::{ModelParams, RegionLabel};

fn cells_at(ratio: f64, xs: &[f64], cfg: &DiagramConfig) -> Vec<diagram::DiagramCell> {
    let tpl = ModelParams::new(ratio, 1.0, 0.0).unwrap();
    let gs: Vec<f64> = xs.iter().map(|x| x * tpl.gc()).collect();
    diagram::sweep_g(&tpl, &gs, cfg).unwrap()
}

#[test]
fn regions_along_a_low_frequency_sweep() {
    let cells = cells_at(0.01, &[0.2, 1.0, 3.0], &DiagramConfig::default());
    let labels: Vec<RegionLabel> = cells.iter().map(|c| c.region).collect();
    assert_eq!(labels[1], RegionLabel::Crossover);
    assert_eq!(labels[2], RegionLabel::Bipolaron);
    assert_ne!(labels[0], RegionLabel::Bipolaron);
}

#[test]
fn weight_reversal_is_labelled() {
    let cells = cells_at(0.15, &diagram::linspace(0.4, 0.85, 10), &DiagramConfig::default());
    let flagged: Vec<bool> = cells
        .iter()
        .map(|c| c.region == RegionLabel::QuadpolaronOverweighted)
        .collect();
    for (c, f) in cells.iter().zip(&flagged) {
        assert_eq!(*f, c.state.beta > c.state.alpha);
    }
    assert!(flagged.iter().any(|f| *f));
}

#[test]
fn cell_csv_layout() {
    let cfg = DiagramConfig {
        with_ed: true,
        ..DiagramConfig::default()
    };
    let cells = cells_at(0.2, &[0.0, 0.5, 1.5], &cfg);
    let mut buf = Vec::new();
    diagram::write_cells_csv(&cells, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    let expected: Vec<&str> = CELL_HEADER.iter().chain(ED_HEADER.iter()).copied().collect();
    assert_eq!(rows[0], expected);
    assert_eq!(rows.len(), 4);
    for r in &rows[1..] {
        assert_eq!(r.len(), expected.len());
    }
    // γ is undefined at g = 0.
    assert_eq!(rows[1][5], "nan");
    assert_eq!(rows[1][CELL_HEADER.len() + 4], "nan");
    assert!(rows[2][6].contains('e'));
}

#[test]
fn diagram_is_ordered_and_carries_boundaries() {
    let cfg = DiagramConfig::default();
    let d = diagram::build_diagram(&[0.5, 0.15], &[0.5, 1.0, 1.5], 1.0, &cfg).unwrap();
    assert_eq!(d.cells.len(), 6);
    assert!(d.cells[0].omega < d.cells[3].omega);
    assert!(d.cells[0].g < d.cells[1].g);
    let kinds: Vec<BoundaryKind> = d.boundaries.iter().map(|b| b.kind).collect();
    assert_eq!(
        kinds,
        [
            BoundaryKind::GcAnalytic,
            BoundaryKind::XiMinimum,
            BoundaryKind::WeightCrossingLower,
            BoundaryKind::WeightCrossingUpper
        ]
    );
    let gc = &d.boundaries[0].points;
    assert_eq!(gc.len(), 2);
    assert!((gc[0].1 - ModelParams::new(0.15, 1.0, 0.0).unwrap().gc()).abs() < 1e-15);
    // The window exists at 0.15 and closes below 0.5.
    assert_eq!(d.boundaries[2].points.len(), 1);
    let (lo, hi) = (d.boundaries[2].points[0].1, d.boundaries[3].points[0].1);
    assert!(lo < hi && hi < gc[0].1);
}

#[test]
fn boundaries_can_be_skipped() {
    let cfg = DiagramConfig {
        boundaries: false,
        ..DiagramConfig::default()
    };
    let d = diagram::build_diagram(&[0.3], &[0.5, 1.2], 1.0, &cfg).unwrap();
    assert_eq!(d.boundaries.len(), 1);
    let mut buf = Vec::new();
    diagram::write_boundaries_csv(&d.boundaries, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("kind,omega_ratio,g\ngc_analytic,"));
}

#[test]
fn high_frequency_keeps_the_polaron_dominant_below_gc() {
    let cells = cells_at(0.5, &diagram::linspace(0.05, 2.0, 60), &DiagramConfig::default());
    for c in cells.iter().filter(|c| c.g_over_gc < 1.0) {
        assert!(c.state.alpha > c.state.beta, "g/g_c = {}", c.g_over_gc);
    }
}

#[test]
fn channel_count_changes_across_gc() {
    let floor = DiagramConfig::default().channel_floor;
    for ratio in [0.05, 0.15, 0.5] {
        let cells = cells_at(ratio, &[0.3, 0.6, 0.75, 1.4, 2.0], &DiagramConfig::default());
        for c in &cells {
            let ch = c.observables.channels.unwrap();
            if c.g_over_gc < 0.8 {
                assert!(
                    [ch.aa, ch.bb, ch.ab, ch.ba].iter().all(|v| *v > floor),
                    "{ratio} {}: {ch:?}",
                    c.g_over_gc
                );
            } else {
                assert!(ch.aa < floor && ch.bb < floor, "{ratio} {}: {ch:?}", c.g_over_gc);
                assert!(ch.ab > floor && ch.ba > floor);
            }
        }
    }
    let deep = cells_at(0.05, &[1.5], &DiagramConfig::default());
    assert_eq!(deep[0].region, RegionLabel::Bipolaron);
}

#[test]
fn changeover_scale_increases_with_both_frequencies() {
    let axis = diagram::linspace(0.01, 2.0, 20);
    for &w in &axis {
        for pair in axis.windows(2) {
            let a = ModelParams::new(w, pair[0], 0.0).unwrap().gc();
            let b = ModelParams::new(w, pair[1], 0.0).unwrap().gc();
            assert!(b > a);
            let c = ModelParams::new(pair[0], w, 0.0).unwrap().gc();
            let d = ModelParams::new(pair[1], w, 0.0).unwrap().gc();
            assert!(d > c);
        }
    }
}

#[test]
fn low_frequency_squeezing_split_follows_the_expansion() {
    let tpl = ModelParams::new(0.001, 1.0, 0.0).unwrap();
    let cells = cells_at(0.001, &[1.5, 2.0, 2.5, 3.0], &DiagramConfig::default());
    for c in &cells {
        let s = c.state;
        let split = 0.5 * (s.xi_a - s.xi_b);
        let predicted = s.xi_mean() * tpl.omega.powi(2) / (4.0 * c.g * c.g);
        assert!(
            (split / predicted - 1.0).abs() < 0.2,
            "g/g_c {}: {split} vs {predicted}",
            c.g_over_gc
        );
    }
}
