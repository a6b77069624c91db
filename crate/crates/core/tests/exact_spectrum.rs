mod common;

use proptest::prelude::*;
use rabi_core::exact::{self, EDConfig};
use rabi_core::{ModelParams, Parity};

fn ground(p: &ModelParams) -> f64 {
    exact::solve(
        p,
        &EDConfig {
            n_levels: 1,
            ..EDConfig::default()
        },
    )
    .unwrap()
    .ground_energy()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parity_blocks_agree_with_dense_reference(w in 0.2f64..1.5, bo in 0.0f64..2.0, g in 0.0f64..0.8) {
        let p = ModelParams::new(w, bo, g).unwrap();
        let n_max = 60 + (16.0 * (g / w).powi(2)) as usize;
        let dense = common::dense_rabi_ground(w, bo, g, n_max);
        prop_assert!((ground(&p) - dense).abs() < 1e-9, "{} vs {dense}", ground(&p));
    }

    #[test]
    fn derivatives_follow_expectation_values(w in 0.1f64..1.0, bo in 0.2f64..1.5, x in 0.1f64..2.5) {
        let p = ModelParams::new(w, bo, 0.0).unwrap();
        let p = p.with_g(x * p.gc());
        let sol = exact::solve(&p, &EDConfig { n_levels: 1, ..EDConfig::default() }).unwrap();
        let o = exact::ed_observables(&sol, &p);
        let h = 1e-5;
        let d = |f: &dyn Fn(f64) -> ModelParams| (ground(&f(h)) - ground(&f(-h))) / (2.0 * h);
        let de_dg = d(&|e| p.with_g(p.g + e));
        let de_dbo = d(&|e| ModelParams { big_omega: p.big_omega + e, ..p });
        let de_dw = d(&|e| ModelParams { omega: p.omega + e, ..p });
        prop_assert!((de_dg - o.coupling_corr).abs() < 1e-5 * (1.0 + o.coupling_corr.abs()));
        prop_assert!((de_dbo - 0.5 * o.tunneling).abs() < 1e-5);
        prop_assert!((de_dw - o.photon_number).abs() < 1e-5 * (1.0 + o.photon_number));
    }
}

#[test]
fn decoupled_levels_are_shifted_ladders() {
    let p = ModelParams::new(0.7, 1.0, 0.0).unwrap();
    let spec = exact::spectrum(
        &p,
        &EDConfig {
            n_levels: 6,
            ..EDConfig::default()
        },
    )
    .unwrap();
    let mut expected: Vec<f64> = (0..4)
        .flat_map(|n| [0.7 * n as f64 - 0.5, 0.7 * n as f64 + 0.5])
        .collect();
    expected.sort_by(f64::total_cmp);
    for ((e, _), x) in spec.iter().zip(&expected) {
        assert!((e - x).abs() < 1e-12, "{e} vs {x}");
    }
    assert_eq!(spec[0].1, Parity::Negative);
}

#[test]
fn ground_state_has_negative_parity() {
    for g in [0.05, 0.3, 0.9] {
        let p = ModelParams::new(0.2, 1.0, g).unwrap();
        let sol = exact::solve(&p, &EDConfig::default()).unwrap();
        assert_eq!(sol.parities[0], Parity::Negative);
        let neg = exact::parity_spectrum(&p, Parity::Negative, &EDConfig::default()).unwrap();
        assert!((neg[0] - sol.ground_energy()).abs() < 1e-12);
    }
}

#[test]
fn energy_is_stable_under_cutoff_doubling() {
    let p = ModelParams::new(0.1, 1.0, 0.5).unwrap();
    let sol = exact::solve(&p, &EDConfig::default()).unwrap();
    assert!(sol.converged);
    let doubled = exact::solve(
        &p,
        &EDConfig {
            n_max: Some(2 * sol.n_max_used),
            ..EDConfig::default()
        },
    )
    .unwrap();
    assert!((doubled.ground_energy() - sol.ground_energy()).abs() < 1e-10);
}

#[test]
fn small_cap_reports_truncation() {
    let p = ModelParams::new(0.01, 1.0, 0.5).unwrap();
    let cfg = EDConfig {
        n_max: Some(8),
        n_max_cap: 16,
        ..EDConfig::default()
    };
    assert!(matches!(
        exact::solve(&p, &cfg),
        Err(rabi_core::RabiError::TruncationNotConverged { .. })
    ));
}

#[test]
fn observables_are_bounded() {
    let p = ModelParams::new(0.3, 1.0, 0.6).unwrap();
    let sol = exact::solve(&p, &EDConfig::default()).unwrap();
    let o = exact::ed_observables(&sol, &p);
    assert!(o.tunneling.abs() <= 1.0);
    assert!(o.photon_number >= 0.0);
    assert!(o.coupling_corr < 0.0);
    let norm: f64 = sol.coefficients[0].iter().map(|c| c * c).sum();
    assert!((norm - 1.0).abs() < 1e-12);
}
