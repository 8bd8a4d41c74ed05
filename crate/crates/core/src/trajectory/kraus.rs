//! Exact photon-count statistics of one shot on a quantum target.
//!
//! With `B = Σ_b b P_b`, the probe leaving the sample in branch `b` is the
//! coherent state rotated by `θ_b = bτ/2`, which the network maps onto
//! independent coherent amplitudes `β_c(b), β_d(b)`. Detecting `(n_c, n_d)`
//! applies the Kraus element `K = Σ_b f_b P_b` with
//! `f_b = ⟨n_c, n_d | β_c(b), β_d(b)⟩`. Because `Tr[P_b ρ P_{b'}] = 0` for
//! `b ≠ b'`, the count distribution is the Poisson mixture
//! `Σ_b Tr[P_b ρ] Pois(n_c; |β_c|²) Pois(n_d; |β_d|²)`. Interference between
//! branches shows up only in the post-measurement state, which is computed
//! with the full Kraus element.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::optics::{interferometer_amplitudes, OutputAmplitudes, SensorConfig};
use crate::quantum::{DensityMatrix, Operator, TOLERANCES};
use crate::{Result, C64};

#[derive(Clone, Debug)]
struct Branch {
    value: f64,
    projector: Operator,
    out: OutputAmplitudes,
}

/// Outcome of one sampled shot.
#[derive(Clone, Debug)]
pub struct ShotOutcome {
    pub n_c: u64,
    pub n_d: u64,
    pub state: DensityMatrix,
}

impl ShotOutcome {
    /// Half-count observable `(n_d − n_c)/2`.
    pub fn half_difference(&self) -> f64 {
        0.5 * (self.n_d as f64 - self.n_c as f64)
    }
}

/// Outcome sampler and state-update rule for one shot.
#[derive(Clone, Debug)]
pub struct KrausMeasurement {
    branches: Vec<Branch>,
}

/// Builds the sampler for coupling `b` read out at interferometer phase `basis_phase`.
///
/// The state only enters when sampling; this mirrors the usual
/// "distribution of outcomes for a given state" signature.
pub fn kraus_outcome_distribution(b: &Operator, cfg: &SensorConfig, basis_phase: f64) -> Result<KrausMeasurement> {
    KrausMeasurement::new(b, &cfg.with_phase(basis_phase))
}

fn ln_factorial(n: u64) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

impl KrausMeasurement {
    /// `cfg.phase` selects the readout basis.
    pub fn new(b: &Operator, cfg: &SensorConfig) -> Result<Self> {
        let branches = b
            .eigh()?
            .spectral_projectors(TOLERANCES.degeneracy)
            .into_iter()
            .map(|(value, projector)| Branch {
                value,
                projector,
                out: interferometer_amplitudes(cfg, 0.5 * value * cfg.tau),
            })
            .collect();
        Ok(Self { branches })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.value).collect()
    }

    pub fn amplitudes(&self) -> Vec<OutputAmplitudes> {
        self.branches.iter().map(|b| b.out).collect()
    }

    /// `Tr[P_b ρ]` per branch, clipped at zero and renormalized.
    pub fn branch_weights(&self, rho: &DensityMatrix) -> Vec<f64> {
        let raw: Vec<f64> = self.branches.iter().map(|b| rho.expectation(&b.projector).re.max(0.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    /// `ln|f_b|` and `arg f_b` of `⟨n_c, n_d|β_c(b), β_d(b)⟩`.
    fn log_amplitude(out: &OutputAmplitudes, n_c: u64, n_d: u64) -> (f64, f64) {
        let mut ln_mag = -0.5 * out.total() - 0.5 * (ln_factorial(n_c) + ln_factorial(n_d));
        let mut phase = 0.0;
        for (beta, n) in [(out.beta_c, n_c), (out.beta_d, n_d)] {
            if n > 0 {
                ln_mag += n as f64 * beta.norm().ln();
                phase += n as f64 * beta.arg();
            }
        }
        (ln_mag, phase)
    }

    /// `f_b(n_c, n_d)` for every branch.
    pub fn amplitudes_for(&self, n_c: u64, n_d: u64) -> Vec<C64> {
        self.branches
            .iter()
            .map(|b| {
                let (ln_mag, phase) = Self::log_amplitude(&b.out, n_c, n_d);
                C64::from_polar(ln_mag.exp(), phase)
            })
            .collect()
    }

    /// `K_{n_c,n_d} = Σ_b f_b P_b`.
    pub fn kraus_element(&self, n_c: u64, n_d: u64) -> Operator {
        let f = self.amplitudes_for(n_c, n_d);
        let dim = self.branches[0].projector.dim();
        self.branches.iter().zip(f).fold(Operator::zeros(dim), |acc, (b, fb)| &acc + &b.projector.scale(fb))
    }

    /// `P(n_c, n_d) = Tr[K ρ K†]`.
    pub fn probability(&self, rho: &DensityMatrix, n_c: u64, n_d: u64) -> f64 {
        let k = self.kraus_element(n_c, n_d);
        (&(&k * rho.op()) * &k.adjoint()).trace().re
    }

    /// Post-measurement state `KρK†/Tr[KρK†]`.
    ///
    /// The Kraus element is rescaled by its largest branch amplitude first so
    /// that far-tail outcomes do not underflow.
    pub fn update(&self, rho: &DensityMatrix, n_c: u64, n_d: u64) -> DensityMatrix {
        let logs: Vec<(f64, f64)> = self.branches.iter().map(|b| Self::log_amplitude(&b.out, n_c, n_d)).collect();
        let top = logs.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
        let dim = rho.dim();
        let k = self
            .branches
            .iter()
            .zip(&logs)
            .fold(Operator::zeros(dim), |acc, (b, &(ln_mag, phase))| {
                &acc + &b.projector.scale(C64::from_polar((ln_mag - top).exp(), phase))
            });
        let unnormalized = &(&k * rho.op()) * &k.adjoint();
        let p = unnormalized.trace().re;
        let mut next = &unnormalized * (1.0 / p);
        next = &(&next + &next.adjoint()) * 0.5;
        DensityMatrix::new_unchecked(next)
    }

    /// Draws `(n_c, n_d)` and the conditional state.
    pub fn sample<R: Rng + ?Sized>(&self, rho: &DensityMatrix, rng: &mut R) -> ShotOutcome {
        let weights = self.branch_weights(rho);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = self.branches.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                chosen = i;
                break;
            }
        }
        let out = self.branches[chosen].out;
        let n_c = sample_poisson(out.mean_c(), rng);
        let n_d = sample_poisson(out.mean_d(), rng);
        let state = if self.branches.len() == 1 { rho.clone() } else { self.update(rho, n_c, n_d) };
        ShotOutcome { n_c, n_d, state }
    }

    /// Counts-only draw for a fixed branch value (no quantum state).
    pub(crate) fn sample_counts<R: Rng + ?Sized>(out: &OutputAmplitudes, rng: &mut R) -> (u64, u64) {
        (sample_poisson(out.mean_c(), rng), sample_poisson(out.mean_d(), rng))
    }
}
