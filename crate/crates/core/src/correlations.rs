//! Time-ordered correlations `C^{η_K…η_1} = Tr[𝔹_K^{η_K} ⋯ 𝔹_1^{η_1} ρ]`.
//!
//! `𝔹⁺ρ = (Bρ + ρB)/2` and `𝔹⁻ρ = (Bρ − ρB)/i`, with `B_k = B(t_k)` in the
//! interaction (Heisenberg) picture of the target Hamiltonian. A second,
//! independent evaluation builds every `𝔹^η` as a `d² × d²` matrix acting on
//! the column-major vectorization of `ρ`.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::quantum::{hermitian_expm, Operator, TargetModel, TOLERANCES};
use crate::{Error, Result, C64};

/// Branch of the Keldysh contour a superoperator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BranchSign {
    /// Anticommutator `(Bρ + ρB)/2`.
    Plus,
    /// Commutator `(Bρ − ρB)/i`.
    Minus,
}

impl BranchSign {
    pub fn symbol(self) -> char {
        match self {
            BranchSign::Plus => '+',
            BranchSign::Minus => '-',
        }
    }

    /// `+1` or `−1`.
    pub fn factor(self) -> f64 {
        match self {
            BranchSign::Plus => 1.0,
            BranchSign::Minus => -1.0,
        }
    }
}

/// Label `C^{η_K…η_1}` written latest time first, e.g. `C^{+-}`.
pub fn correlation_label(signs: &[BranchSign]) -> String {
    let s: String = signs.iter().rev().map(|s| s.symbol()).collect();
    format!("C^{{{s}}}")
}

/// Ordered times `t_1 ≤ … ≤ t_K` paired with branch signs.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationQuery {
    times: Vec<f64>,
    signs: Vec<BranchSign>,
}

impl CorrelationQuery {
    pub fn new(times: Vec<f64>, signs: Vec<BranchSign>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidInput("correlation order must be >= 1".into()));
        }
        if times.len() != signs.len() {
            return Err(Error::DimensionMismatch { left: times.len(), right: signs.len() });
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidInput("times must be finite".into()));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("times must be non-decreasing".into()));
        }
        Ok(Self { times, signs })
    }

    pub fn order(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn signs(&self) -> &[BranchSign] {
        &self.signs
    }

    pub fn label(&self) -> String {
        correlation_label(&self.signs)
    }
}

impl fmt::Display for CorrelationQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {:?}", self.label(), self.times)
    }
}

/// `𝔹^η ρ`.
pub fn apply_branch(b: &Operator, sign: BranchSign, rho: &Operator) -> Result<Operator> {
    if b.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { left: b.dim(), right: rho.dim() });
    }
    let left = b * rho;
    let right = rho * b;
    Ok(match sign {
        BranchSign::Plus => &(&left + &right) * 0.5,
        BranchSign::Minus => (&left - &right).scale(C64::new(0.0, -1.0)),
    })
}

/// `B(t) = e^{iHt} B e^{−iHt}`.
pub fn heisenberg_coupling(model: &TargetModel, t: f64) -> Operator {
    if t == 0.0 {
        return model.coupling().clone();
    }
    let u = hermitian_expm(model.hamiltonian(), t).expect("model Hamiltonian is Hermitian");
    let bt = &(&u.adjoint() * model.coupling()) * &u;
    // restore exact Hermiticity lost to roundoff
    &(&bt + &bt.adjoint()) * 0.5
}

fn real_trace(z: C64) -> Result<f64> {
    let tol = TOLERANCES.imaginary_residue * z.re.abs().max(1.0);
    if z.im.abs() > tol {
        return Err(Error::ImaginaryResidue { residue: z.im });
    }
    Ok(z.re)
}

/// Chains `𝔹^{η_k}_k` for `k = 1…K` onto `ρ_B` and returns the (untraced) operator.
pub fn branch_chain(model: &TargetModel, q: &CorrelationQuery) -> Result<Operator> {
    let mut rho = model.initial_state().op().clone();
    for (&t, &sign) in q.times.iter().zip(&q.signs) {
        rho = apply_branch(&heisenberg_coupling(model, t), sign, &rho)?;
    }
    Ok(rho)
}

/// `C^{η_K…η_1}` by direct superoperator algebra.
///
/// Returns exactly `0.0` when the last sign is minus (trace of a commutator).
/// An imaginary residue above tolerance is reported as an error.
pub fn correlation(model: &TargetModel, q: &CorrelationQuery) -> Result<f64> {
    if q.signs.last() == Some(&BranchSign::Minus) {
        return Ok(0.0);
    }
    real_trace(branch_chain(model, q)?.trace())
}

/// Superoperator as a matrix on column-major vectorized operators.
#[derive(Clone, Debug, PartialEq)]
pub struct LiouvilleMatrix {
    dim: usize,
    entries: DMatrix<C64>,
}

impl LiouvilleMatrix {
    /// `vec(Bρ) = (I⊗B) vec ρ`, `vec(ρB) = (Bᵀ⊗I) vec ρ`.
    pub fn from_branch(b: &Operator, sign: BranchSign) -> Self {
        let d = b.dim();
        let id = DMatrix::<C64>::identity(d, d);
        let left = id.kronecker(b.matrix());
        let right = b.matrix().transpose().kronecker(&id);
        let entries = match sign {
            BranchSign::Plus => (left + right) * C64::new(0.5, 0.0),
            BranchSign::Minus => (left - right) * C64::new(0.0, -1.0),
        };
        Self { dim: d, entries }
    }

    /// Side length `d²`.
    pub fn dim2(&self) -> usize {
        self.dim * self.dim
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.entries * v
    }

    /// Applies the superoperator to an operator through its vectorization.
    pub fn apply_operator(&self, rho: &Operator) -> Operator {
        unvectorize(&self.apply(&vectorize(rho)), self.dim)
    }
}

/// Column-major `vec(ρ)`.
pub fn vectorize(rho: &Operator) -> DVector<C64> {
    DVector::from_column_slice(rho.matrix().as_slice())
}

pub fn unvectorize(v: &DVector<C64>, dim: usize) -> Operator {
    Operator::from_matrix(DMatrix::from_column_slice(dim, dim, v.as_slice())).expect("square by construction")
}

/// `C^{η_K…η_1}` evaluated in Liouville space.
pub fn liouville_correlation(model: &TargetModel, q: &CorrelationQuery) -> Result<f64> {
    let d = model.dim();
    let mut v = vectorize(model.initial_state().op());
    for (&t, &sign) in q.times.iter().zip(&q.signs) {
        v = LiouvilleMatrix::from_branch(&heisenberg_coupling(model, t), sign).apply(&v);
    }
    let trace: C64 = (0..d).map(|i| v[i + i * d]).sum();
    real_trace(trace)
}
