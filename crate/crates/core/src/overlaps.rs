//! Closed-form algebra of displaced, frequency-renormalized oscillator
//! eigenstates.
//!
//! A packet of level n is φₙ(ξω, x − x₀) with x₀ = −ζg′ for the polaron side
//! and x₀ = +ζg′ for the antipolaron side. In the dimensionless coordinate
//! used throughout, φₙ(ξω, x) = (ξ/π)^{1/4} (2ⁿ n!)^{−1/2} Hₙ(√ξ x) e^{−ξx²/2}.
//!
//! The two-packet integrals all take a polaron-side packet (ζ_α, ξ_α) on the
//! left and an antipolaron-side packet (ζ_β, ξ_β) on the right; reflected
//! overlaps are expressed through the same functions with a sign flip of ζ
//! and a factor (−1)ⁿ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{RabiError, Result};

const IMAG_TOL: f64 = 1e-10;

/// Which way a packet is displaced relative to the bare σ_z = +1 well.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacketSide {
    /// Centered at −ζg′, along the bare displacement.
    Polaron,
    /// Centered at +ζg′, against it.
    Antipolaron,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformedPacket {
    pub xi: f64,
    pub zeta: f64,
    pub side: PacketSide,
    pub level: usize,
}

impl DeformedPacket {
    pub fn new(xi: f64, zeta: f64, side: PacketSide, level: usize) -> Result<Self> {
        check_xi(xi)?;
        Ok(Self { xi, zeta, side, level })
    }

    pub fn center(&self, gprime: f64) -> f64 {
        match self.side {
            PacketSide::Polaron => -self.zeta * gprime,
            PacketSide::Antipolaron => self.zeta * gprime,
        }
    }

    pub fn eval(&self, x: f64, gprime: f64) -> f64 {
        oscillator_state(self.level, self.xi, x - self.center(gprime))
    }

    /// First and second derivative with respect to x (level 0 only needs
    /// these for the effective-potential expansion, but any level works).
    pub fn eval_with_derivatives(&self, x: f64, gprime: f64) -> (f64, f64, f64) {
        let u = x - self.center(gprime);
        let n = self.level;
        let f = oscillator_state(n, self.xi, u);
        // φₙ' = √ξ [√(n/2) φₙ₋₁ − √((n+1)/2) φₙ₊₁]
        let lower = if n > 0 {
            oscillator_state(n - 1, self.xi, u)
        } else {
            0.0
        };
        let upper = oscillator_state(n + 1, self.xi, u);
        let d1 = self.xi.sqrt() * ((n as f64 / 2.0).sqrt() * lower - ((n as f64 + 1.0) / 2.0).sqrt() * upper);
        // φₙ'' = (ξ² u² − ξ(2n+1)) φₙ
        let d2 = (self.xi * self.xi * u * u - self.xi * (2.0 * n as f64 + 1.0)) * f;
        (f, d1, d2)
    }
}

/// Four overlaps entering normalization and the tunneling energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapSet {
    /// S_{αβ} = ⟨φ_α(x)|φ_β(x)⟩.
    pub s_ab: f64,
    /// S_{αβ̄} = ⟨φ_α(x)|φ_β(−x)⟩ (equal to S_{βᾱ}).
    pub s_ab_bar: f64,
    /// S_{αᾱ}.
    pub s_aa_bar: f64,
    /// S_{ββ̄}.
    pub s_bb_bar: f64,
}

impl OverlapSet {
    pub fn new(zeta_a: f64, zeta_b: f64, xi_a: f64, xi_b: f64, gprime: f64, level: usize) -> Result<Self> {
        if level == 0 {
            return Ok(Self {
                s_ab: overlap_s(zeta_a, zeta_b, xi_a, xi_b, gprime)?,
                s_ab_bar: overlap_s(zeta_a, -zeta_b, xi_a, xi_b, gprime)?,
                s_aa_bar: overlap_s(zeta_a, zeta_a, xi_a, xi_a, gprime)?,
                s_bb_bar: overlap_s(zeta_b, zeta_b, xi_b, xi_b, gprime)?,
            });
        }
        let reflect = if level.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(Self {
            s_ab: generalized_moment(level, 0, zeta_a, zeta_b, xi_a, xi_b, gprime)?,
            s_ab_bar: reflect * generalized_moment(level, 0, zeta_a, -zeta_b, xi_a, xi_b, gprime)?,
            s_aa_bar: reflect * generalized_moment(level, 0, zeta_a, zeta_a, xi_a, xi_a, gprime)?,
            s_bb_bar: reflect * generalized_moment(level, 0, zeta_b, zeta_b, xi_b, xi_b, gprime)?,
        })
    }
}

/// Level-0 overlap ⟨φ₀(ξ₁, x + ζ₁g′)|φ₀(ξ₂, x − ζ₂g′)⟩.
pub fn overlap_s(zeta1: f64, zeta2: f64, xi1: f64, xi2: f64, gprime: f64) -> Result<f64> {
    check_xi(xi1)?;
    check_xi(xi2)?;
    Ok(overlap_s_unchecked(zeta1, zeta2, xi1, xi2, gprime))
}

#[inline]
pub(crate) fn overlap_s_unchecked(zeta1: f64, zeta2: f64, xi1: f64, xi2: f64, gprime: f64) -> f64 {
    let sum = xi1 + xi2;
    let d = (zeta1 + zeta2) * gprime;
    let prod = xi1 * xi2;
    (-d * d * prod / (2.0 * sum)).exp() * std::f64::consts::SQRT_2 * (prod / (sum * sum)).powf(0.25)
}

/// S_{αβ}, ⟨x̂_α⟩_{αβ} and ⟨x̂_α²⟩_{αβ} for level-0 packets, where
/// x̂_α = x + ζ_α g′ is measured from the polaron center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundMoments {
    pub s: f64,
    pub x1: f64,
    pub x2: f64,
}

pub fn ground_moments(zeta_a: f64, zeta_b: f64, xi_a: f64, xi_b: f64, gprime: f64) -> Result<GroundMoments> {
    check_xi(xi_a)?;
    check_xi(xi_b)?;
    Ok(ground_moments_unchecked(zeta_a, zeta_b, xi_a, xi_b, gprime))
}

#[inline]
pub(crate) fn ground_moments_unchecked(zeta_a: f64, zeta_b: f64, xi_a: f64, xi_b: f64, gprime: f64) -> GroundMoments {
    let s = overlap_s_unchecked(zeta_a, zeta_b, xi_a, xi_b, gprime);
    let sum = xi_a + xi_b;
    let d = (zeta_a + zeta_b) * gprime;
    let x1 = s * d * xi_b / sum;
    let x2 = s / sum * (1.0 + d * d * xi_b * xi_b / sum);
    GroundMoments { s, x1, x2 }
}

/// Physicists' Hermite polynomial Hₙ(x).
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for m in 1..n {
        let next = 2.0 * x * cur - 2.0 * m as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn hermite_complex(n: usize, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = z * 2.0;
    for m in 1..n {
        let next = z * cur * 2.0 - prev * (2.0 * m as f64);
        prev = cur;
        cur = next;
    }
    cur
}

/// sᵐ Hₘ(y/s) as a polynomial in s², well defined at s = 0 and for s² < 0.
fn scaled_hermite(m: usize, y: f64, s2: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 2.0 * y;
    for k in 1..m {
        let next = 2.0 * y * cur - 2.0 * k as f64 * s2 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// n! exactly for n ≤ 20, through the log-gamma sum above that.
pub(crate) fn factorial(n: usize) -> f64 {
    if n <= 20 {
        (1..=n as u64).product::<u64>() as f64
    } else {
        ln_factorial(n).exp()
    }
}

struct PairFactors {
    a: f64,
    b: f64,
    c: f64,
    /// (ζ_α + ζ_β) g′ / (2c) = 1/√(2(ξ_α + ξ_β)).
    scale: f64,
}

impl PairFactors {
    fn new(zeta_a: f64, zeta_b: f64, xi_a: f64, xi_b: f64, gprime: f64) -> Self {
        let sum = xi_a + xi_b;
        Self {
            a: (2.0 * xi_a / sum).sqrt(),
            b: (2.0 * xi_b / sum).sqrt(),
            c: (zeta_a + zeta_b) * gprime * (sum / 2.0).sqrt(),
            scale: 1.0 / (2.0 * sum).sqrt(),
        }
    }

    fn cross_overlap(&self, k: usize, kp: usize) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        let ab = a * b;
        let y1 = 0.5 * a * b * b * c;
        let y2 = -0.5 * a * a * b * c;
        let s2a = 1.0 - a * a;
        let s2b = 1.0 - b * b;
        let norm = (ab / (2f64.powi((k + kp) as i32) * factorial(k) * factorial(kp))).sqrt()
            * (-(ab * c) * (ab * c) / 4.0).exp()
            * factorial(k)
            * factorial(kp);
        (0..=k.min(kp))
            .map(|r| {
                let coeff = norm * (2.0 * ab).powi(r as i32) / (factorial(k - r) * factorial(kp - r) * factorial(r));
                coeff * scaled_hermite(k - r, y1, s2a) * scaled_hermite(kp - r, y2, s2b)
            })
            .sum()
    }
}

/// S̃_{k,k′} = ⟨φ_k(ξ₁, x + ζ₁g′)|φ_{k′}(ξ₂, x − ζ₂g′)⟩.
pub fn cross_level_overlap(
    k: usize,
    kp: usize,
    zeta1: f64,
    zeta2: f64,
    xi1: f64,
    xi2: f64,
    gprime: f64,
) -> Result<f64> {
    check_xi(xi1)?;
    check_xi(xi2)?;
    Ok(PairFactors::new(zeta1, zeta2, xi1, xi2, gprime).cross_overlap(k, kp))
}

/// X(n, j) = ⟨φₙ(ξ_α, x + ζ_αg′)| x̂_α^j |φₙ(ξ_β, x − ζ_βg′)⟩.
///
/// X(n, 0) is the level-n overlap S_{αβ}. The sum runs over complex terms
/// (−i)^m Hₘ(i b²c/2) whose imaginary parts cancel; a residual above
/// 1e−10 is reported as [`RabiError::NonReal`].
pub fn generalized_moment(
    n: usize,
    j: usize,
    zeta_a: f64,
    zeta_b: f64,
    xi_a: f64,
    xi_b: f64,
    gprime: f64,
) -> Result<f64> {
    check_xi(xi_a)?;
    check_xi(xi_b)?;
    let f = PairFactors::new(zeta_a, zeta_b, xi_a, xi_b, gprime);
    let arg = Complex64::new(0.0, 0.5 * f.b * f.b * f.c);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..=n.min(j) {
        for q in 0..=n.min(j - p) {
            let m = j - p - q;
            let weight = f.a.powi(p as i32) * f.b.powi(q as i32) / (factorial(p) * factorial(q) * factorial(m))
                * (2f64.powi((p + q) as i32) / (factorial(n - p) * factorial(n - q))).sqrt();
            let term = minus_i.powu(m as u32) * hermite_complex(m, arg) * (weight * f.cross_overlap(n - p, n - q));
            total += term;
        }
    }
    let total = total * (factorial(n) * factorial(j) * f.scale.powi(j as i32));
    if total.im.abs() > IMAG_TOL {
        return Err(RabiError::NonReal {
            residual: total.im.abs(),
        });
    }
    Ok(total.re)
}

/// φₙ(ξω, u) evaluated by upward recurrence on normalized Hermite functions.
pub fn oscillator_state(n: usize, xi: f64, u: f64) -> f64 {
    let t = xi.sqrt() * u;
    xi.powf(0.25) * hermite_functions(n, t)[n]
}

/// Normalized Hermite functions ψ₀(t)..ψₙ(t), ψₖ = (2ᵏk!√π)^{−1/2} Hₖ(t) e^{−t²/2}.
///
/// The recurrence runs on rescaled values with a running log-scale so that
/// high orders far out in the tails neither overflow nor underflow early.
pub fn hermite_functions(n_max: usize, t: f64) -> Vec<f64> {
    const BIG: f64 = 1e150;
    let mut out = Vec::with_capacity(n_max + 1);
    let mut log_scale = -0.5 * t * t - 0.25 * std::f64::consts::PI.ln();
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(log_scale.exp());
    for k in 0..n_max {
        let next = (2.0 / (k as f64 + 1.0)).sqrt() * t * cur - (k as f64 / (k as f64 + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
        out.push(cur * log_scale.exp());
    }
    out
}

fn check_xi(xi: f64) -> Result<()> {
    if xi.is_finite() && xi > 0.0 {
        Ok(())
    } else {
        Err(RabiError::InvalidParameter(format!(
            "frequency renormalization must be positive, got {xi}"
        )))
    }
}
