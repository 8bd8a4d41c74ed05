//! Closed-form signal-to-noise estimates and material feasibility.
//!
//! Formulas here are written in the conventional form where the signal uses
//! the half-count readout and the noise the unhalved shot noise `σ = |α|^K`.
//! The Monte Carlo uses the half-count convention throughout, for which the
//! consistent SNR is larger by [`half_count_snr_factor`].
//!
//! Material units are CGS-with-radians: `g` in rad/cm, lengths in cm,
//! densities in cm⁻³, areas in cm².

use std::ops::{Div, Mul};

use serde::Deserialize;

use crate::{Error, Result};

/// `(√L/2)·α·τ·C⁺`.
pub fn snr_first_order(alpha: f64, tau: f64, l: f64, c_plus: f64) -> f64 {
    0.5 * l.sqrt() * alpha * tau * c_plus
}

/// `2^{−K}·√L·α^K·τ^K·C`.
pub fn snr_kth_order(alpha: f64, tau: f64, l: f64, k: u32, c_k: f64) -> f64 {
    let k = k as i32;
    l.sqrt() * (0.5 * alpha * tau).powi(k) * c_k
}

/// Ratio between the half-count SNR `√L⟨ΠΛ⟩/√Var(ΠΛ)` and [`snr_kth_order`].
pub fn half_count_snr_factor(k: u32) -> f64 {
    2f64.powi(k as i32)
}

/// Faraday rotation angle `g·D·J` in radians.
pub fn faraday_angle(g: f64, d: f64, j_z: f64) -> f64 {
    g * d * j_z
}

/// Power of the centimetre carried by a quantity; radians and counts are dimensionless.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dim(pub i32);

impl Dim {
    pub const NONE: Dim = Dim(0);
    pub const CM: Dim = Dim(1);

    pub fn powi(self, n: i32) -> Dim {
        Dim(self.0 * n)
    }
}

// exponents add under multiplication
#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for Dim {
    type Output = Dim;
    fn mul(self, rhs: Dim) -> Dim {
        Dim(self.0 + rhs.0)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Dim {
    type Output = Dim;
    fn div(self, rhs: Dim) -> Dim {
        Dim(self.0 - rhs.0)
    }
}

/// Laser spot geometry.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Spot {
    /// `A = size²`.
    Square { size: f64 },
    /// `A = π r²`.
    Circle { radius: f64 },
}

impl Spot {
    pub fn area(&self) -> f64 {
        match *self {
            Spot::Square { size } => size * size,
            Spot::Circle { radius } => std::f64::consts::PI * radius * radius,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Uncorrelated,
    Critical,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Uncorrelated => "uncorrelated",
            Regime::Critical => "critical",
        }
    }
}

/// Inputs of the material SNR estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnrScenario {
    /// rad/cm
    pub g: f64,
    /// cm
    pub thickness: f64,
    /// cm⁻³
    pub spin_density: f64,
    /// cm²
    pub area: f64,
    /// photons per pulse
    pub photons: f64,
    pub sequences: f64,
    pub order: u32,
    /// `⟨(J^z_i)^K⟩`
    pub moment_k: f64,
    /// cm; selects the critical formula when present
    pub xi: Option<f64>,
}

impl SnrScenario {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("g", self.g),
            ("thickness", self.thickness),
            ("spin_density", self.spin_density),
            ("area", self.area),
            ("photons", self.photons),
            ("sequences", self.sequences),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.order == 0 {
            return Err(Error::InvalidInput("correlation order must be at least 1".into()));
        }
        if !self.moment_k.is_finite() {
            return Err(Error::InvalidInput("moment_k must be finite".into()));
        }
        if let Some(xi) = self.xi {
            if !(xi.is_finite() && xi > 0.0) {
                return Err(Error::InvalidInput(format!("xi must be positive, got {xi}")));
            }
        }
        Ok(())
    }

    pub fn regime(&self) -> Regime {
        if self.xi.is_some() {
            Regime::Critical
        } else {
            Regime::Uncorrelated
        }
    }

    /// Per-order factor raised to the `K`-th power, and its dimension.
    pub fn base_factor(&self) -> (f64, Dim) {
        let root_n = self.photons.sqrt();
        let g = Dim::CM.powi(-1);
        match self.xi {
            None => (
                self.g * root_n / (2.0 * self.spin_density * self.area),
                g / (Dim::CM.powi(-3) * Dim::CM.powi(2)),
            ),
            Some(xi) => (self.g * xi.powi(3) * root_n / (2.0 * self.area), g * Dim::CM.powi(3) / Dim::CM.powi(2)),
        }
    }

    /// Order-independent prefactor and its dimension.
    pub fn prefactor(&self) -> (f64, Dim) {
        let da = Dim::CM * Dim::CM.powi(2);
        match self.xi {
            None => (self.spin_density * self.thickness * self.area, Dim::CM.powi(-3) * da),
            Some(xi) => (self.thickness * self.area / xi.powi(3), da / Dim::CM.powi(3)),
        }
    }

    /// Dimension of the resulting SNR; zero for a consistent formula.
    pub fn snr_dimension(&self) -> Dim {
        self.base_factor().1.powi(self.order as i32) * self.prefactor().1
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeasibilityReport {
    pub snr: f64,
    pub snr_per_sqrt_l: f64,
    pub l_for_unit_snr: f64,
    pub regime: Regime,
    pub base_factor: f64,
    pub prefactor: f64,
}

/// Material SNR in the uncorrelated or critical regime.
pub fn snr_material(s: &SnrScenario) -> Result<FeasibilityReport> {
    s.validate()?;
    if s.snr_dimension() != Dim::NONE {
        return Err(Error::InvalidInput(format!("SNR carries cm^{}", s.snr_dimension().0)));
    }
    let (base, _) = s.base_factor();
    let (prefactor, _) = s.prefactor();
    let per_sqrt_l = base.powi(s.order as i32) * prefactor * s.moment_k;
    Ok(FeasibilityReport {
        snr: s.sequences.sqrt() * per_sqrt_l,
        snr_per_sqrt_l: per_sqrt_l,
        l_for_unit_snr: (1.0 / per_sqrt_l).powi(2),
        regime: s.regime(),
        base_factor: base,
        prefactor,
    })
}

/// Material parameters as written in a preset or the `[snr]` config table.
///
/// Exactly one of `moment_per_factor` (giving `⟨J^K⟩ = m^K`) and `moment_k`
/// (a fixed value for every order) must be set.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialPreset {
    pub name: String,
    /// rad/cm
    pub g: f64,
    /// cm
    pub thickness: f64,
    /// cm⁻³
    pub spin_density: f64,
    pub spot: Spot,
    pub photons: f64,
    #[serde(default)]
    pub moment_per_factor: Option<f64>,
    #[serde(default)]
    pub moment_k: Option<f64>,
}

const LIHOF4: &str = include_str!("../../../presets/lihof4.toml");

impl MaterialPreset {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let p: Self = toml::from_str(text).map_err(|e| Error::InvalidInput(format!("material preset: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.moment_per_factor, self.moment_k) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => Err(Error::InvalidInput("set exactly one of moment_per_factor and moment_k".into())),
        }
    }

    /// LiHoF₄: g = 20 rad/cm, n_s = 1.39×10²⁸ cm⁻³ (taken as printed, which is
    /// large for a crystal), 10⁻⁴ cm square focus, 10¹⁴ photons, 1 cm sample,
    /// `|J^z| = 8`.
    pub fn lihof4() -> Self {
        Self::from_toml_str(LIHOF4).expect("bundled preset parses")
    }

    pub fn moment(&self, k: u32) -> f64 {
        match (self.moment_per_factor, self.moment_k) {
            (Some(m), _) => m.powi(k as i32),
            (None, Some(m)) => m,
            (None, None) => unreachable!("validated on load"),
        }
    }

    pub fn scenario(&self, order: u32, sequences: f64, xi: Option<f64>) -> SnrScenario {
        SnrScenario {
            g: self.g,
            thickness: self.thickness,
            spin_density: self.spin_density,
            area: self.spot.area(),
            photons: self.photons,
            sequences,
            order,
            moment_k: self.moment(order),
            xi,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_examples() {
        assert_eq!(snr_first_order(1.0, 1.0, 4.0, 0.0), 0.0);
        assert!((snr_first_order(1.0, 1.0, 4.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((snr_kth_order(1.3, 0.2, 9.0, 1, 0.7) - snr_first_order(1.3, 0.2, 9.0, 0.7)).abs() < 1e-15);
    }

    #[test]
    fn kth_order_arithmetic() {
        assert!((snr_kth_order(10.0, 0.01, 1e4, 2, 1.0) - 0.25).abs() < 1e-15);
        assert_eq!(half_count_snr_factor(3), 8.0);
    }

    #[test]
    fn faraday_angle_examples() {
        assert_eq!(faraday_angle(20.0, 1.0, 0.0), 0.0);
        assert!((faraday_angle(20.0, 1.0, 1e-12) - 2e-11).abs() < 1e-25);
    }

    #[test]
    fn lihof4_preset_values() {
        let p = MaterialPreset::lihof4();
        assert_eq!(p.g, 20.0);
        assert_eq!(p.spin_density, 1.39e28);
        assert!((p.spot.area() - 1e-8).abs() < 1e-22);
        assert_eq!(p.moment(3), 512.0);
        let r = snr_material(&p.scenario(2, 1.0, None)).unwrap();
        assert!((r.prefactor - 1.39e20).abs() / 1.39e20 < 1e-12);
        let per_factor = r.base_factor * 8.0;
        assert!((per_factor - 20.0 * 1e7 / (2.0 * 1.39e28 * 1e-8) * 8.0).abs() < 1e-24);
    }

    #[test]
    fn single_spin_angle_matches_base_factor() {
        // one fully polarized spin J = 8 shared across N_s = n_s A D spins
        let p = MaterialPreset::lihof4();
        let s = p.scenario(1, 1.0, None);
        let n_spins = s.spin_density * s.area * s.thickness;
        let theta = faraday_angle(s.g, s.thickness, 8.0 / n_spins);
        let (base, _) = s.base_factor();
        // base·√N·... : θ·α/2 is the per-shot SNR contribution of that spin
        assert!((theta * s.photons.sqrt() / 2.0 - base * 8.0).abs() / (base * 8.0) < 1e-12);
    }

    #[test]
    fn dimensions_cancel() {
        let p = MaterialPreset::lihof4();
        for k in 1..6 {
            assert_eq!(p.scenario(k, 1.0, None).snr_dimension(), Dim::NONE);
            assert_eq!(p.scenario(k, 1.0, Some(1e-4)).snr_dimension(), Dim::NONE);
        }
    }

    #[test]
    fn circle_spot() {
        assert!((Spot::Circle { radius: 2.0 }.area() - 4.0 * std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn invalid_scenarios_rejected() {
        let p = MaterialPreset::lihof4();
        let mut s = p.scenario(2, 1.0, None);
        s.area = 0.0;
        assert!(snr_material(&s).is_err());
        let mut s = p.scenario(2, 1.0, Some(-1.0));
        assert!(snr_material(&s).is_err());
        s.xi = None;
        s.order = 0;
        assert!(snr_material(&s).is_err());
    }

    #[test]
    fn preset_requires_one_moment() {
        let text = LIHOF4.replace("moment_per_factor = 8.0", "");
        assert!(MaterialPreset::from_toml_str(&text).is_err());
        let both = format!("{LIHOF4}\nmoment_k = 3.0\n");
        assert!(MaterialPreset::from_toml_str(&both).is_err());
        assert!(MaterialPreset::from_toml_str(&format!("{LIHOF4}\nbogus = 1\n")).is_err());
    }
}
