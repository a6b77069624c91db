mod common;

use common::{integrate_line, packet};
use proptest::prelude::*;
use rabi_core::variational::{self, energy_at_level, observables_at_level};
use rabi_core::{ModelParams, Parity, VariationalState};

/// d/du of the level-n packet, from the ladder relation.
fn packet_slope(n: usize, xi: f64, u: f64) -> f64 {
    let down = if n > 0 {
        (n as f64 / 2.0).sqrt() * packet(n - 1, xi, u)
    } else {
        0.0
    };
    let up = ((n + 1) as f64 / 2.0).sqrt() * packet(n + 1, xi, u);
    xi.sqrt() * (down - up)
}

struct Trial {
    level: usize,
    alpha: f64,
    beta: f64,
    xa: f64,
    xb: f64,
    ca: f64,
    cb: f64,
}

impl Trial {
    fn new(p: &ModelParams, st: &VariationalState, level: usize) -> Self {
        let gp = p.gprime();
        Trial {
            level,
            alpha: st.alpha,
            beta: st.beta,
            xa: st.xi_a,
            xb: st.xi_b,
            ca: -st.zeta_a * gp,
            cb: st.zeta_b * gp,
        }
    }

    fn psi(&self, x: f64) -> f64 {
        self.alpha * packet(self.level, self.xa, x - self.ca) + self.beta * packet(self.level, self.xb, x - self.cb)
    }

    fn slope(&self, x: f64) -> f64 {
        self.alpha * packet_slope(self.level, self.xa, x - self.ca)
            + self.beta * packet_slope(self.level, self.xb, x - self.cb)
    }

    fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        let w = 1.0 / self.xa.min(self.xb).sqrt();
        integrate_line(f, &[self.ca, self.cb, -self.ca, -self.cb], w * 1.5)
    }
}

/// ⟨Ψ|H|Ψ⟩ for Ψ = (ψ₊|↑⟩ + ηψ₊(−x)|↓⟩)/√2 by direct quadrature.
fn energy_by_quadrature(p: &ModelParams, t: &Trial) -> f64 {
    let gp = p.gprime();
    let kinetic = t.integrate(|x| t.slope(x).powi(2));
    let well = t.integrate(|x| (x + gp).powi(2) * t.psi(x).powi(2));
    let tunnel = t.integrate(|x| t.psi(x) * t.psi(-x));
    0.5 * p.omega * (kinetic + well) - 0.5 * p.omega * (gp * gp + 1.0) + p.eta() * 0.5 * p.big_omega * tunnel
}

fn params_and_state() -> impl Strategy<Value = (ModelParams, VariationalState, usize)> {
    (
        0.05f64..1.0,
        0.0f64..1.5,
        0.02f64..0.6,
        0.5f64..2.0,
        0.5f64..2.0,
        -0.5f64..1.2,
        -0.5f64..1.2,
        0.05f64..0.99,
        0usize..4,
        prop::bool::ANY,
    )
        .prop_filter_map("admissible state", |(w, bo, g, xa, xb, za, zb, a, n, pos)| {
            let parity = if pos { Parity::Positive } else { Parity::Negative };
            let p = ModelParams::new(w, bo, g).ok()?.with_parity(parity);
            let st = VariationalState::at_level(&p, n, xa, xb, za, zb, a).ok()?;
            Some((p, st, n))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn closed_form_energy_matches_quadrature((p, st, n) in params_and_state()) {
        let t = Trial::new(&p, &st, n);
        let norm = t.integrate(|x| t.psi(x).powi(2));
        prop_assert!((norm - 1.0).abs() < 1e-10, "norm {norm}");
        let closed = energy_at_level(&p, &st, n).unwrap();
        let quad = energy_by_quadrature(&p, &t);
        prop_assert!((closed - quad).abs() < 1e-9 * (1.0 + quad.abs()), "{closed} vs {quad}");
    }

    #[test]
    fn observables_match_quadrature((p, st, _n) in params_and_state()) {
        let t = Trial::new(&p, &st, 0);
        let gp = p.gprime();
        let o = observables_at_level(&p, &st, 0).unwrap();
        let x2 = t.integrate(|x| x * x * t.psi(x).powi(2));
        let p2 = t.integrate(|x| t.slope(x).powi(2));
        let x1 = t.integrate(|x| x * t.psi(x).powi(2));
        let overlap = t.integrate(|x| t.psi(x) * t.psi(-x));
        let photons = 0.5 * (x2 + p2) - 0.5;
        prop_assert!((o.photon_number - photons).abs() < 1e-9 * (1.0 + photons));
        prop_assert!((o.tunneling - p.eta() * overlap).abs() < 1e-9);
        // σ_z(a† + a) = √2 σ_z x; the spin-down half mirrors the spin-up half.
        prop_assert!((o.coupling_corr - std::f64::consts::SQRT_2 * x1).abs() < 1e-9 * (1.0 + x1.abs()));
        prop_assert!((o.t - 2.0 * p2).abs() < 1e-9 * (1.0 + p2));
        if p.g > 0.0 {
            prop_assert!(gp > 0.0);
        }
    }

    #[test]
    fn mirror_image_has_the_same_energy((p, st, _n) in params_and_state()) {
        let e = variational::energy(&p, &st).unwrap();
        let m = variational::energy(&p, &st.mirrored()).unwrap();
        prop_assert!((e - m).abs() < 1e-12 * (1.0 + e.abs()));
        let c = st.canonical();
        prop_assert!(c.zeta_a + c.zeta_b >= 0.0);
    }
}
