//! Classical stochastic fields used in the semiclassical trajectory mode.
//!
//! A classical field commutes with itself at all times, so only the
//! all-`+` correlation survives and a shot in `S₃` reads zero on average.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Stationary classical field `b(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClassicalFieldModel {
    /// `b(t) = value` for every trajectory.
    Constant { value: f64 },
    /// Zero-mean Gaussian with `⟨b(t)b(t')⟩ = σ² e^{−|t−t'|/τ_c}`.
    OrnsteinUhlenbeck { sigma: f64, correlation_time: f64 },
    /// `b(t) = ±amplitude`, flipping so that `⟨b(t)b(t')⟩ = A² e^{−|t−t'|/τ_c}`.
    Telegraph { amplitude: f64, correlation_time: f64 },
}

impl ClassicalFieldModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Constant { value } => value.is_finite(),
            Self::OrnsteinUhlenbeck { sigma, correlation_time } | Self::Telegraph { amplitude: sigma, correlation_time } => {
                sigma.is_finite() && sigma >= 0.0 && correlation_time.is_finite() && correlation_time > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid classical field parameters: {self:?}")))
        }
    }

    /// Two-time correlation `⟨b(t)b(t')⟩`.
    pub fn covariance(&self, dt: f64) -> f64 {
        match *self {
            Self::Constant { value } => value * value,
            Self::OrnsteinUhlenbeck { sigma: a, correlation_time: tc } | Self::Telegraph { amplitude: a, correlation_time: tc } => {
                a * a * (-dt.abs() / tc).exp()
            }
        }
    }

    /// Samples `b` at ascending `times` using exact transition laws.
    pub fn sample_path<R: Rng + ?Sized>(&self, times: &[f64], rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(times.len());
        match *self {
            Self::Constant { value } => out.resize(times.len(), value),
            Self::OrnsteinUhlenbeck { sigma, correlation_time } => {
                let mut prev: Option<(f64, f64)> = None;
                for &t in times {
                    let z: f64 = StandardNormal.sample(rng);
                    let b = match prev {
                        None => sigma * z,
                        Some((t0, b0)) => {
                            let r = (-(t - t0) / correlation_time).exp();
                            r * b0 + sigma * (1.0 - r * r).max(0.0).sqrt() * z
                        }
                    };
                    out.push(b);
                    prev = Some((t, b));
                }
            }
            Self::Telegraph { amplitude, correlation_time } => {
                let mut prev: Option<(f64, f64)> = None;
                for &t in times {
                    let b = match prev {
                        None => {
                            if rng.random::<bool>() { amplitude } else { -amplitude }
                        }
                        Some((t0, b0)) => {
                            let p_flip = 0.5 * (1.0 - (-(t - t0) / correlation_time).exp());
                            if rng.random::<f64>() < p_flip { -b0 } else { b0 }
                        }
                    };
                    out.push(b);
                    prev = Some((t, b));
                }
            }
        }
        out
    }

    /// `E[b(t_1)…b(t_K)]` for ascending times.
    pub fn moment(&self, times: &[f64]) -> f64 {
        match *self {
            Self::Constant { value } => value.powi(times.len() as i32),
            Self::Telegraph { amplitude, correlation_time } => {
                if times.len() % 2 == 1 {
                    return 0.0;
                }
                times
                    .chunks(2)
                    .map(|p| amplitude * amplitude * (-(p[1] - p[0]).abs() / correlation_time).exp())
                    .product()
            }
            Self::OrnsteinUhlenbeck { .. } => isserlis(times, &|a, b| self.covariance(b - a)),
        }
    }

    /// Expected product of the half-count readouts for an all-`S₂` protocol,
    /// `Π (α²/2) sin(τ b(t_j))`, averaged over the field.
    ///
    /// Exact for constant and telegraph fields. For the Gaussian field the
    /// leading order `(τα²/2)^K E[b(t_1)…b(t_K)]` is returned.
    pub fn readout_product_mean(&self, times: &[f64], alpha: f64, tau: f64) -> f64 {
        let a2 = 0.5 * alpha * alpha;
        let k = times.len() as i32;
        match *self {
            Self::Constant { value } => (a2 * (tau * value).sin()).powi(k),
            Self::Telegraph { amplitude, .. } => {
                let unit = Self::Telegraph { amplitude: 1.0, correlation_time: self.correlation_time() };
                (a2 * (tau * amplitude).sin()).powi(k) * unit.moment(times)
            }
            Self::OrnsteinUhlenbeck { .. } => (a2 * tau).powi(k) * self.moment(times),
        }
    }

    fn correlation_time(&self) -> f64 {
        match *self {
            Self::Constant { .. } => f64::INFINITY,
            Self::OrnsteinUhlenbeck { correlation_time, .. } | Self::Telegraph { correlation_time, .. } => correlation_time,
        }
    }
}

/// Sum over perfect pairings of `Π cov(t_i, t_j)`.
fn isserlis(times: &[f64], cov: &dyn Fn(f64, f64) -> f64) -> f64 {
    match times.len() {
        0 => 1.0,
        n if n % 2 == 1 => 0.0,
        _ => {
            let first = times[0];
            let rest = &times[1..];
            (0..rest.len())
                .map(|j| {
                    let others: Vec<f64> = rest.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &t)| t).collect();
                    cov(first, rest[j]) * isserlis(&others, cov)
                })
                .sum()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn empirical_moment(field: ClassicalFieldModel, times: &[f64], n: usize) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws: Vec<f64> = (0..n).map(|_| field.sample_path(times, &mut rng).iter().product()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn isserlis_four_point() {
        let cov = |a: f64, b: f64| (-(b - a).abs()).exp();
        let t = [0.0, 0.5, 1.0, 2.0];
        let expected = cov(0.0, 0.5) * cov(1.0, 2.0) + cov(0.0, 1.0) * cov(0.5, 2.0) + cov(0.0, 2.0) * cov(0.5, 1.0);
        assert!((isserlis(&t, &cov) - expected).abs() < 1e-15);
    }

    #[test]
    fn sampled_moments_match() {
        let times = [0.0, 0.3, 0.7, 1.5];
        for field in [
            ClassicalFieldModel::OrnsteinUhlenbeck { sigma: 1.3, correlation_time: 0.8 },
            ClassicalFieldModel::Telegraph { amplitude: 0.9, correlation_time: 0.5 },
        ] {
            for k in [2, 4] {
                let (mean, se) = empirical_moment(field, &times[..k], 200_000);
                let exact = field.moment(&times[..k]);
                assert!((mean - exact).abs() < 4.0 * se, "{field:?} k={k}: {mean} vs {exact}");
            }
        }
    }

    #[test]
    fn constant_field_is_deterministic() {
        let f = ClassicalFieldModel::Constant { value: 0.4 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(f.sample_path(&[0.0, 1.0, 5.0], &mut rng), vec![0.4; 3]);
        assert!((f.moment(&[0.0, 1.0, 5.0]) - 0.064).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(ClassicalFieldModel::Telegraph { amplitude: 1.0, correlation_time: 0.0 }.validate().is_err());
        assert!(ClassicalFieldModel::OrnsteinUhlenbeck { sigma: -1.0, correlation_time: 1.0 }.validate().is_err());
        assert!(ClassicalFieldModel::Constant { value: f64::NAN }.validate().is_err());
        assert!(ClassicalFieldModel::Constant { value: 2.0 }.validate().is_ok());
    }
}
