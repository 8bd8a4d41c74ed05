//! Photon-counting Monte Carlo of the sequential protocol.
//!
//! Each sequence runs on its own ChaCha8 stream (`seed`, stream = sequence
//! index), so results do not depend on thread count or scheduling. Per-sequence
//! results are gathered in index order and reduced by pairwise summation.

mod field;
mod kraus;

pub use field::ClassicalFieldModel;
pub use kraus::{kraus_outcome_distribution, KrausMeasurement, ShotOutcome};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::correlations::heisenberg_coupling;
use crate::exec::{map_indexed, pairwise_sum};
use crate::optics::{interferometer_amplitudes, MeasurementBasis};
use crate::quantum::TargetModel;
use crate::weak::ProtocolSpec;
use crate::{Error, Execution, Result};

/// What the probe light interacts with.
#[derive(Clone, Debug)]
pub enum Target {
    /// Quantum target with full measurement back-action.
    Quantum(TargetModel),
    /// Classical stochastic field; no back-action.
    Field(ClassicalFieldModel),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrajectoryMode {
    KrausQuantum,
    SemiclassicalField,
}

impl TrajectoryMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::KrausQuantum => "kraus_quantum",
            Self::SemiclassicalField => "semiclassical_field",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryConfig {
    pub sequences: usize,
    pub seed: u64,
    pub protocol: ProtocolSpec,
    pub target: Target,
}

impl TrajectoryConfig {
    pub fn new(sequences: usize, seed: u64, protocol: ProtocolSpec, target: Target) -> Result<Self> {
        if sequences == 0 {
            return Err(Error::InvalidInput("number of sequences must be at least 1".into()));
        }
        if let Target::Field(f) = &target {
            f.validate()?;
        }
        Ok(Self { sequences, seed, protocol, target })
    }

    pub fn mode(&self) -> TrajectoryMode {
        match self.target {
            Target::Quantum(_) => TrajectoryMode::KrausQuantum,
            Target::Field(_) => TrajectoryMode::SemiclassicalField,
        }
    }
}

/// Monte Carlo estimate of `G^(K)` from the half-count readouts `Λ = (n_d − n_c)/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Standard error of `mean`; infinite for a single sequence.
    pub std_error: f64,
    /// Sample variance of the readout product.
    pub product_variance: f64,
    /// Mean over shots of the per-shot sample variance of `Λ`.
    pub per_shot_variance: f64,
    pub shot_means: Vec<f64>,
    pub shot_variances: Vec<f64>,
    pub n_sequences: usize,
}

impl McEstimate {
    /// Per-shot variance of the raw difference `n_d − n_c`.
    pub fn raw_per_shot_variance(&self) -> f64 {
        4.0 * self.per_shot_variance
    }

    /// `mean / std_error`.
    pub fn empirical_snr(&self) -> f64 {
        self.mean / self.std_error
    }

    /// `Π_j Var(Λ_j)`, the product-variance expected when shots are independent.
    pub fn factorized_variance(&self) -> f64 {
        self.shot_variances.iter().product()
    }
}

/// Single sequence; returns the per-shot readouts `Λ_j`.
pub type Readouts = Vec<f64>;

pub fn run_sequences(cfg: &TrajectoryConfig) -> Result<McEstimate> {
    run_sequences_with(cfg, Execution::default())
}

pub fn run_sequences_with(cfg: &TrajectoryConfig, exec: Execution) -> Result<McEstimate> {
    let readouts = simulate_readouts(cfg, exec)?;
    Ok(estimate(&readouts))
}

/// Per-sequence readouts in sequence order.
pub fn simulate_readouts(cfg: &TrajectoryConfig, exec: Execution) -> Result<Vec<Readouts>> {
    let proto = &cfg.protocol;
    let rng_for = |i: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64);
        rng
    };
    match &cfg.target {
        Target::Quantum(model) => {
            // interaction picture: each shot couples through B(t_j) and the
            // conditional state is never propagated between shots
            let meas = proto
                .shots()
                .iter()
                .map(|s| {
                    let b = heisenberg_coupling(model, proto.effective_time(s));
                    KrausMeasurement::new(&b, &proto.sensor().with_basis(s.basis))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(map_indexed(cfg.sequences, exec, |i| {
                let mut rng = rng_for(i);
                let mut rho = model.initial_state().clone();
                meas.iter()
                    .map(|m| {
                        let o = m.sample(&rho, &mut rng);
                        let l = o.half_difference();
                        rho = o.state;
                        l
                    })
                    .collect()
            }))
        }
        Target::Field(field) => {
            let times: Vec<f64> = proto.shots().iter().map(|s| proto.effective_time(s)).collect();
            let bases: Vec<MeasurementBasis> = proto.shots().iter().map(|s| s.basis).collect();
            let sensor = *proto.sensor();
            Ok(map_indexed(cfg.sequences, exec, |i| {
                let mut rng = rng_for(i);
                let path = field.sample_path(&times, &mut rng);
                path.iter()
                    .zip(&bases)
                    .map(|(&b, &basis)| {
                        let out = interferometer_amplitudes(&sensor.with_basis(basis), 0.5 * b * sensor.tau);
                        let (n_c, n_d) = KrausMeasurement::sample_counts(&out, &mut rng);
                        0.5 * (n_d as f64 - n_c as f64)
                    })
                    .collect()
            }))
        }
    }
}

fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, pairwise_sum(&sq) / (n - 1.0))
}

/// Reduces per-sequence readouts to an [`McEstimate`].
pub fn estimate(readouts: &[Readouts]) -> McEstimate {
    let l = readouts.len();
    let k = readouts.first().map_or(0, Vec::len);
    let products: Vec<f64> = readouts.iter().map(|r| r.iter().product()).collect();
    let (mean, product_variance) = mean_var(&products);
    let (shot_means, shot_variances): (Vec<f64>, Vec<f64>) = (0..k)
        .map(|j| {
            let col: Vec<f64> = readouts.iter().map(|r| r[j]).collect();
            mean_var(&col)
        })
        .unzip();
    let std_error = if l < 2 { f64::INFINITY } else { (product_variance / l as f64).sqrt() };
    McEstimate {
        mean,
        std_error,
        product_variance,
        per_shot_variance: pairwise_sum(&shot_variances) / k.max(1) as f64,
        shot_means,
        shot_variances,
        n_sequences: l,
    }
}
