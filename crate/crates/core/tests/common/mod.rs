#![allow(dead_code)]

use faraday_qns::optics::{MeasurementBasis, SensorConfig};
use faraday_qns::quantum::{DensityMatrix, Operator};
use faraday_qns::weak::{ProtocolSpec, ShotSpec};
use faraday_qns::{TargetModel, C64};
use rand::Rng;

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> Operator {
    let m = Operator::from_fn(d, |_, _| random_complex(rng));
    &(&m + &m.adjoint()) * 0.5
}

pub fn random_density<R: Rng>(d: usize, rng: &mut R) -> DensityMatrix {
    let m = Operator::from_fn(d, |_, _| random_complex(rng));
    let p = &m * &m.adjoint();
    let tr = p.trace().re;
    DensityMatrix::new(&p * (1.0 / tr)).unwrap()
}

pub fn random_model<R: Rng>(d: usize, rng: &mut R) -> TargetModel {
    TargetModel::new(random_hermitian(d, rng), random_hermitian(d, rng), random_density(d, rng)).unwrap()
}

/// Ascending times starting at zero.
pub fn random_times<R: Rng>(k: usize, rng: &mut R) -> Vec<f64> {
    let mut t = 0.0;
    (0..k)
        .map(|i| {
            if i > 0 {
                t += rng.random_range(0.0..1.5);
            }
            t
        })
        .collect()
}

pub fn random_bases<R: Rng>(k: usize, rng: &mut R) -> Vec<MeasurementBasis> {
    (0..k).map(|_| if rng.random::<bool>() { MeasurementBasis::S2 } else { MeasurementBasis::S3 }).collect()
}

pub fn protocol(times: &[f64], bases: &[MeasurementBasis], alpha: f64, tau: f64) -> ProtocolSpec {
    let shots = times.iter().zip(bases).map(|(&t, &b)| ShotSpec::new(t, b)).collect();
    ProtocolSpec::new(shots, SensorConfig::new(alpha, tau).unwrap()).unwrap()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
