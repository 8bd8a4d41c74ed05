use super::{kron, pauli, spin_operators, thermal_state, DensityMatrix, Operator, TOLERANCES};
use crate::{Error, Result};

/// Initial state recipe for the built-in models.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// Highest-weight state of `Jz` on every site (`|↑…↑⟩`).
    Up,
    /// Lowest-weight state of `Jz` on every site.
    Down,
    /// Infinite-temperature state `I/d`.
    Mixed,
    /// Gibbs state of the model Hamiltonian.
    Thermal { beta: f64 },
}

/// Target spin system: Hamiltonian `H`, coupling `B` (both rad/s, ħ = 1)
/// and initial state.
#[derive(Clone, Debug)]
pub struct TargetModel {
    hamiltonian: Operator,
    coupling: Operator,
    initial_state: DensityMatrix,
}

impl TargetModel {
    pub fn new(hamiltonian: Operator, coupling: Operator, initial_state: DensityMatrix) -> Result<Self> {
        let d = hamiltonian.dim();
        for other in [coupling.dim(), initial_state.dim()] {
            if other != d {
                return Err(Error::DimensionMismatch { left: d, right: other });
            }
        }
        for op in [&hamiltonian, &coupling] {
            let deviation = op.hermiticity_error();
            if deviation > TOLERANCES.structural {
                return Err(Error::NonHermitian { deviation });
            }
        }
        Ok(Self { hamiltonian, coupling, initial_state })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn coupling(&self) -> &Operator {
        &self.coupling
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.initial_state
    }

    pub fn with_initial_state(&self, rho: DensityMatrix) -> Result<Self> {
        Self::new(self.hamiltonian.clone(), self.coupling.clone(), rho)
    }

    pub fn with_coupling(&self, coupling: Operator) -> Result<Self> {
        Self::new(self.hamiltonian.clone(), coupling, self.initial_state.clone())
    }

    /// Single spin-j with `H = h·J` and `B = b·J`.
    pub fn single_spin(two_j: usize, field: [f64; 3], coupling: [f64; 3], initial: &InitialState) -> Result<Self> {
        let s = spin_operators(two_j);
        let h = s.along(field);
        let b = s.along(coupling);
        let rho = initial_state(&h, two_j + 1, 1, initial)?;
        Self::new(h, b, rho)
    }

    /// Open transverse-field Ising chain of spin-1/2 sites,
    /// `H = −J Σ σᶻᵢσᶻᵢ₊₁ − Γ Σ σˣᵢ`, probed through the magnetization
    /// `B = g Σ Jᶻᵢ`. Site 0 is the most significant tensor factor.
    pub fn ising_chain(sites: usize, exchange: f64, transverse_field: f64, coupling: f64, initial: &InitialState) -> Result<Self> {
        if sites == 0 || sites > 10 {
            return Err(Error::InvalidInput(format!("ising chain needs 1..=10 sites, got {sites}")));
        }
        let (x, _, z) = pauli();
        let dim = 1usize << sites;
        let site_op = |op: &Operator, i: usize| -> Operator {
            let mut acc = Operator::identity(1);
            for k in 0..sites {
                acc = if k == i { kron(&acc, op) } else { kron(&acc, &Operator::identity(2)) };
            }
            acc
        };
        let mut h = Operator::zeros(dim);
        let mut b = Operator::zeros(dim);
        for i in 0..sites {
            let zi = site_op(&z, i);
            h = &h - &(&site_op(&x, i) * transverse_field);
            b = &b + &(&zi * (0.5 * coupling));
            if i + 1 < sites {
                h = &h - &(&(&zi * &site_op(&z, i + 1)) * exchange);
            }
        }
        let rho = initial_state(&h, 2, sites, initial)?;
        Self::new(h, b, rho)
    }
}

fn initial_state(h: &Operator, local_dim: usize, sites: usize, initial: &InitialState) -> Result<DensityMatrix> {
    let dim = h.dim();
    match initial {
        InitialState::Up => DensityMatrix::basis(dim, 0),
        InitialState::Down => {
            // every site in its last basis state: index Σ (local_dim−1)·local_dim^k
            let idx = (0..sites).fold(0, |acc, _| acc * local_dim + (local_dim - 1));
            DensityMatrix::basis(dim, idx)
        }
        InitialState::Mixed => Ok(DensityMatrix::maximally_mixed(dim)),
        InitialState::Thermal { beta } => thermal_state(h, *beta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_hermitian_coupling() {
        let a = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        let err = TargetModel::new(Operator::zeros(2), a, DensityMatrix::maximally_mixed(2)).unwrap_err();
        assert!(matches!(err, Error::NonHermitian { .. }));
    }

    #[test]
    fn rejects_dim_mismatch() {
        let err = TargetModel::new(Operator::zeros(2), Operator::zeros(3), DensityMatrix::maximally_mixed(2)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn ising_chain_down_state_and_magnetization() {
        let m = TargetModel::ising_chain(3, 1.0, 0.5, 2.0, &InitialState::Down).unwrap();
        assert_eq!(m.dim(), 8);
        let mz = m.initial_state().expectation(m.coupling());
        assert!((mz.re + 3.0).abs() < 1e-12);
        let up = TargetModel::ising_chain(3, 1.0, 0.5, 2.0, &InitialState::Up).unwrap();
        assert!((up.initial_state().expectation(up.coupling()).re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_spin_thermal_is_valid() {
        let m = TargetModel::single_spin(3, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0], &InitialState::Thermal { beta: 0.7 }).unwrap();
        assert_eq!(m.dim(), 4);
        assert!((m.initial_state().op().trace().re - 1.0).abs() < 1e-12);
    }
}
