//! Model inputs and the analytic coupling scales derived from them.
//!
//! All quantities share one energy unit (ħ = m = 1). Ratios such as ω/Ω or
//! g/g_c are computed on demand and never stored.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{RabiError, Result};

/// Eigenvalue of the parity operator σ_x(−1)^{a†a}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    #[default]
    Negative,
    Positive,
}

impl Parity {
    /// η = ±1.
    pub fn sign(self) -> f64 {
        match self {
            Parity::Negative => -1.0,
            Parity::Positive => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Parity::Negative => Parity::Positive,
            Parity::Positive => Parity::Negative,
        }
    }

    /// Parity of the lower member of the n-th tunneling doublet, η = −(−1)ⁿ.
    pub fn lower_branch(level: usize) -> Self {
        if level.is_multiple_of(2) {
            Parity::Negative
        } else {
            Parity::Positive
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Negative => write!(f, "negative"),
            Parity::Positive => write!(f, "positive"),
        }
    }
}

/// H = ω a†a + (Ω/2) σ_x + g σ_z (a† + a).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Oscillator frequency ω.
    pub omega: f64,
    /// Level splitting Ω.
    pub big_omega: f64,
    /// Coupling strength g.
    pub g: f64,
    #[serde(default)]
    pub parity: Parity,
}

impl ModelParams {
    /// Validated constructor with the default (negative, ground-state) parity.
    pub fn new(omega: f64, big_omega: f64, g: f64) -> Result<Self> {
        let params = Self {
            omega,
            big_omega,
            g,
            parity: Parity::Negative,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_parity(mut self, parity: Parity) -> Self {
        self.parity = parity;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(RabiError::InvalidParameter(format!(
                "omega must be positive and finite, got {}",
                self.omega
            )));
        }
        if !(self.big_omega.is_finite() && self.big_omega >= 0.0) {
            return Err(RabiError::InvalidParameter(format!(
                "Omega must be non-negative and finite, got {}",
                self.big_omega
            )));
        }
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(RabiError::InvalidParameter(format!(
                "g must be non-negative and finite, got {}",
                self.g
            )));
        }
        Ok(())
    }

    /// Dimensionless displacement g′ = √2 g/ω.
    pub fn gprime(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.g / self.omega
    }

    pub fn eta(&self) -> f64 {
        self.parity.sign()
    }

    pub fn gc(&self) -> f64 {
        changeover_coupling(self.omega, self.big_omega)
    }

    pub fn derive(&self) -> Result<DerivedParams> {
        derive(self)
    }
}

/// Scales that follow from ω, Ω and g.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub gprime: f64,
    /// Constant energy ℰ₀ = −(ω/2)(g′² + 1).
    pub e0: f64,
    /// Semiclassical scale √(ωΩ)/2.
    pub gc0: f64,
    /// Finite-frequency changeover scale √(ω² + √(ω⁴ + g_c0⁴)).
    pub gc: f64,
}

pub fn derive(params: &ModelParams) -> Result<DerivedParams> {
    params.validate()?;
    let gprime = params.gprime();
    Ok(DerivedParams {
        gprime,
        e0: -0.5 * params.omega * (gprime * gprime + 1.0),
        gc0: semiclassical_coupling(params.omega, params.big_omega),
        gc: changeover_coupling(params.omega, params.big_omega),
    })
}

pub fn semiclassical_coupling(omega: f64, big_omega: f64) -> f64 {
    0.5 * (omega * big_omega).sqrt()
}

pub fn changeover_coupling(omega: f64, big_omega: f64) -> f64 {
    let gc0 = semiclassical_coupling(omega, big_omega);
    let w2 = omega * omega;
    (w2 + (w2 * w2 + gc0.powi(4)).sqrt()).sqrt()
}

/// Region of the ground-state diagram a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionLabel {
    QuadpolaronNormal,
    QuadpolaronOverweighted,
    Bipolaron,
    Crossover,
}

impl RegionLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::QuadpolaronNormal => "quadpolaron_normal",
            RegionLabel::QuadpolaronOverweighted => "quadpolaron_overweighted",
            RegionLabel::Bipolaron => "bipolaron",
            RegionLabel::Crossover => "crossover",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn scales_at_low_frequency() {
        let d = ModelParams::new(0.1, 1.0, 0.3).unwrap().derive().unwrap();
        assert_abs_diff_eq!(d.gc0, 0.1581139, epsilon = 1e-7);
        assert_abs_diff_eq!(d.gc, 0.1921609, epsilon = 1e-7);
    }

    #[test]
    fn displacement_and_constant_energy() {
        let d = ModelParams::new(1.0, 1.0, 0.5).unwrap().derive().unwrap();
        assert_abs_diff_eq!(d.gprime, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(d.e0, -0.75, epsilon = 1e-15);
    }

    #[test]
    fn slow_oscillator_limit() {
        for &w in &[1e-3, 1e-4, 1e-6] {
            let ratio = changeover_coupling(w, 1.0) / semiclassical_coupling(w, 1.0);
            assert!(ratio >= 1.0);
            assert!(ratio - 1.0 < 20.0 * w.sqrt(), "w={w} ratio={ratio}");
        }
        let r = changeover_coupling(1e-8, 1.0) / semiclassical_coupling(1e-8, 1.0);
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn gc_monotone_on_grid() {
        let axis: Vec<f64> = (0..20).map(|i| 0.01 * 1.35f64.powi(i)).collect();
        for &w in &axis {
            for pair in axis.windows(2) {
                assert!(changeover_coupling(w, pair[1]) > changeover_coupling(w, pair[0]));
                assert!(changeover_coupling(pair[1], w) > changeover_coupling(pair[0], w));
            }
        }
        for &w in &axis {
            for &o in &axis {
                assert!(changeover_coupling(w, o) >= semiclassical_coupling(w, o));
            }
        }
    }

    #[test]
    fn constant_energy_bound() {
        for &g in &[0.0, 0.01, 0.3, 2.0] {
            let p = ModelParams::new(0.7, 1.0, g).unwrap();
            let d = p.derive().unwrap();
            if g == 0.0 {
                assert_eq!(d.e0, -0.35);
            } else {
                assert!(d.e0 < -0.35);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(ModelParams::new(0.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, 1.0, -0.1).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.1).is_ok());
        let bad = ModelParams {
            omega: 0.0,
            big_omega: 1.0,
            g: 0.0,
            parity: Parity::Negative,
        };
        assert!(derive(&bad).is_err());
    }

    #[test]
    fn default_parity_is_negative() {
        assert_eq!(ModelParams::new(1.0, 1.0, 0.0).unwrap().parity, Parity::Negative);
        assert_eq!(Parity::lower_branch(0), Parity::Negative);
        assert_eq!(Parity::lower_branch(3), Parity::Positive);
    }
}
