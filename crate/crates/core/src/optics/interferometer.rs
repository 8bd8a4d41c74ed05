use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use super::Stokes;
use crate::correlations::BranchSign;
use crate::{Error, Result, C64};

/// Polarization component read out by one shot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasurementBasis {
    /// Diagonal/anti-diagonal readout, phase `π/2`; selects `𝔹⁺`.
    S2,
    /// Circular readout, phase `0`; selects `𝔹⁻`.
    S3,
}

impl MeasurementBasis {
    pub fn phase(self) -> f64 {
        match self {
            MeasurementBasis::S2 => FRAC_PI_2,
            MeasurementBasis::S3 => 0.0,
        }
    }

    pub fn sign(self) -> BranchSign {
        match self {
            MeasurementBasis::S2 => BranchSign::Plus,
            MeasurementBasis::S3 => BranchSign::Minus,
        }
    }

    pub fn stokes(self) -> Stokes {
        match self {
            MeasurementBasis::S2 => Stokes::S2,
            MeasurementBasis::S3 => Stokes::S3,
        }
    }
}

/// Coherent probe pulse and interferometer setting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorConfig {
    /// Real coherent amplitude; `α²` photons per pulse.
    pub alpha: f64,
    /// Pulse duration (s).
    pub tau: f64,
    /// Interferometer phase φ (rad).
    pub phase: f64,
    /// Exchange the detector labels `c ↔ d`, flipping every readout sign.
    pub swap_detectors: bool,
}

impl SensorConfig {
    pub fn new(alpha: f64, tau: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("alpha must be > 0, got {alpha}")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidInput(format!("tau must be > 0, got {tau}")));
        }
        Ok(Self { alpha, tau, phase: 0.0, swap_detectors: false })
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_basis(self, basis: MeasurementBasis) -> Self {
        self.with_phase(basis.phase())
    }

    pub fn photons(&self) -> f64 {
        self.alpha * self.alpha
    }
}

/// Coherent amplitudes arriving at detectors `c` and `d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutputAmplitudes {
    pub beta_c: C64,
    pub beta_d: C64,
}

impl OutputAmplitudes {
    pub fn mean_c(&self) -> f64 {
        self.beta_c.norm_sqr()
    }

    pub fn mean_d(&self) -> f64 {
        self.beta_d.norm_sqr()
    }

    pub fn total(&self) -> f64 {
        self.mean_c() + self.mean_d()
    }

    /// Mean of the half-count observable `(λ_d − λ_c)/2`.
    pub fn half_difference(&self) -> f64 {
        0.5 * (self.mean_d() - self.mean_c())
    }
}

/// Propagates mode amplitudes `(a_H, a_V)` through PBS, phase and 1:1 BS.
///
/// `H` is reflected into arm `a`, `V` is transmitted into arm `b`, which
/// picks up `e^{iφ}`. The splitter maps `c = (a + ib)/√2`, `d = (ia + b)/√2`,
/// so `(|d|² − |c|²)/2` is `⟨S₂⟩` at `φ = π/2` and `⟨S₃⟩` at `φ = 0`.
pub fn network_outputs(a_h: C64, a_v: C64, phase: f64, swap_detectors: bool) -> OutputAmplitudes {
    let i = C64::new(0.0, 1.0);
    let a = a_h;
    let b = C64::from_polar(1.0, phase) * a_v;
    let c = (a + i * b) * FRAC_1_SQRT_2;
    let d = (i * a + b) * FRAC_1_SQRT_2;
    if swap_detectors {
        OutputAmplitudes { beta_c: d, beta_d: c }
    } else {
        OutputAmplitudes { beta_c: c, beta_d: d }
    }
}

/// Output amplitudes after the polarization plane of `|α, H⟩` is rotated by
/// `faraday_angle`.
pub fn interferometer_amplitudes(cfg: &SensorConfig, faraday_angle: f64) -> OutputAmplitudes {
    let (s, c) = faraday_angle.sin_cos();
    network_outputs(C64::new(cfg.alpha * c, 0.0), C64::new(cfg.alpha * s, 0.0), cfg.phase, cfg.swap_detectors)
}
