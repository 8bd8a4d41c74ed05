use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use super::TOLERANCES;
use crate::{Error, Result, C64};

/// Dense complex square matrix acting on a finite Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        Ok(Self(m))
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { left: dim * dim, right: entries.len() });
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, entries)))
    }

    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        let c: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_rows(dim, &c)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn outer(psi: &DVector<C64>) -> Self {
        Self(psi * psi.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |A − B|` entrywise. Panics on dimension mismatch.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0.iter().zip(other.0.iter()).fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    /// Max absolute deviation between the operator and its conjugate transpose.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_error(&self) -> f64 {
        let prod = Operator(self.0.adjoint() * &self.0);
        prod.max_abs_diff(&Operator::identity(self.dim()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn anticommutator(&self, other: &Operator) -> Operator {
        Operator(&self.0 * &other.0 + &other.0 * &self.0)
    }

    /// Checked matrix product.
    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        matmul(self, other)
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        kron(self, other)
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.0 * v
    }

    /// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
    pub fn eigh(&self) -> Result<HermitianEigen> {
        let deviation = self.hermiticity_error();
        let scale = self.max_abs().max(1.0);
        if deviation > TOLERANCES.structural * scale {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(HermitianEigen::compute(&self.0))
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        Operator(&self.0 * rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        Operator(self.0.map(|z| z * rhs))
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}

/// Spectral data of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    fn compute(m: &DMatrix<C64>) -> Self {
        // symmetrize to strip roundoff before tridiagonalization
        let sym = (m + m.adjoint()).map(|z| z * 0.5);
        let eig = sym.symmetric_eigen();
        let n = m.nrows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Self { values, vectors }
    }

    /// `V diag(f(λ)) V†`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Operator {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        Operator(scaled * self.vectors.adjoint())
    }

    /// Distinct eigenvalues with their spectral projectors; eigenvalues within
    /// `tol` of the first member of a cluster are merged.
    pub fn spectral_projectors(&self, tol: f64) -> Vec<(f64, Operator)> {
        let n = self.values.len();
        let mut out: Vec<(f64, Operator)> = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && self.values[end] - self.values[start] <= tol {
                end += 1;
            }
            let cols = self.vectors.columns(start, end - start);
            let projector = Operator(cols * cols.adjoint());
            let mean = self.values[start..end].iter().sum::<f64>() / (end - start) as f64;
            out.push((mean, projector));
            start = end;
        }
        out
    }
}

/// Checked matrix product.
pub fn matmul(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(a * b)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator(a.0.kronecker(&b.0))
}

/// `exp(−i h t)` for Hermitian `h`, via eigendecomposition.
pub fn hermitian_expm(h: &Operator, t: f64) -> Result<Operator> {
    let eig = h.eigh()?;
    Ok(eig.map(|lambda| C64::from_polar(1.0, -lambda * t)))
}

/// Gibbs state `exp(−βh)/Tr exp(−βh)`.
pub fn thermal_state(h: &Operator, beta: f64) -> Result<DensityMatrix> {
    if beta.is_nan() || beta < 0.0 || beta.is_infinite() {
        return Err(Error::InvalidInput(format!("beta must be finite and >= 0, got {beta}")));
    }
    let eig = h.eigh()?;
    let ground = eig.values.first().copied().unwrap_or(0.0);
    let weights: Vec<f64> = eig.values.iter().map(|&e| (-beta * (e - ground)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let rho = eig.map(|lambda| C64::new((-beta * (lambda - ground)).exp() / z, 0.0));
    DensityMatrix::new(rho)
}

/// Traces out the sensor factor of an operator on `sensor ⊗ target`.
pub fn partial_trace_sensor(joint: &Operator, sensor_dim: usize) -> Result<Operator> {
    let n = joint.dim();
    if sensor_dim == 0 || !n.is_multiple_of(sensor_dim) {
        return Err(Error::DimensionMismatch { left: n, right: sensor_dim });
    }
    let d = n / sensor_dim;
    let mut out = DMatrix::zeros(d, d);
    for s in 0..sensor_dim {
        out += joint.0.view((s * d, s * d), (d, d));
    }
    Ok(Operator(out))
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    pub fn new(op: Operator) -> Result<Self> {
        let tol = TOLERANCES.structural;
        let herm = op.hermiticity_error();
        if herm > tol {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min_eig = op.eigh()?.values.first().copied().unwrap_or(0.0);
        if min_eig < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self(op))
    }

    /// Wraps without validation. Callers guarantee the invariants.
    pub(crate) fn new_unchecked(op: Operator) -> Self {
        Self(op)
    }

    /// Normalized projector onto `psi`.
    pub fn pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(Operator::outer(&(psi / C64::new(norm, 0.0))))
    }

    /// Projector onto basis state `index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidInput(format!("basis index {index} >= dim {dim}")));
        }
        let mut psi = DVector::zeros(dim);
        psi[index] = C64::new(1.0, 0.0);
        Self::pure(&psi)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(&Operator::identity(dim) * (1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn op(&self) -> &Operator {
        &self.0
    }

    pub fn into_operator(self) -> Operator {
        self.0
    }

    /// `Tr[A ρ]`.
    pub fn expectation(&self, a: &Operator) -> C64 {
        (a * &self.0).trace()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::pauli;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_is_neutral() {
        let (x, y, _) = pauli();
        let i2 = Operator::identity(2);
        assert_eq!(matmul(&i2, &y).unwrap(), y);
        assert_eq!(matmul(&x, &i2).unwrap(), x);
    }

    #[test]
    fn pauli_product() {
        let (x, y, z) = pauli();
        let xy = matmul(&x, &y).unwrap();
        assert!(xy.max_abs_diff(&z.scale(c(0.0, 1.0))) < 1e-15);
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let err = matmul(&Operator::identity(2), &Operator::identity(3)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn naive_triple_loop_agrees() {
        let a = Operator::from_fn(4, |i, j| c((i * 3 + j) as f64 * 0.25 - 1.0, (i as f64 - j as f64) * 0.5));
        let b = Operator::from_fn(4, |i, j| c(((i + 2 * j) % 5) as f64, -(i as f64) * 0.1 + j as f64));
        let p = matmul(&a, &b).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = c(0.0, 0.0);
                for k in 0..4 {
                    acc += a.get(i, k) * b.get(k, j);
                }
                assert!((acc - p.get(i, j)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kron_small_cases() {
        let (x, _, z) = pauli();
        let i2 = Operator::identity(2);
        assert_eq!(kron(&i2, &i2), Operator::identity(4));
        assert_eq!(kron(&z, &i2), Operator::diagonal(&[1.0, 1.0, -1.0, -1.0]));
        // index formula (a⊗b)[2i+k, 2j+l] = a[i,j] b[k,l]
        let xz = kron(&x, &z);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        assert_eq!(xz.get(2 * i + k, 2 * j + l), x.get(i, j) * z.get(k, l));
                    }
                }
            }
        }
        assert_eq!(xz.get(0, 2), c(1.0, 0.0));
        assert_eq!(xz.get(1, 3), c(-1.0, 0.0));
        assert_eq!(xz.get(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn expm_zero_time_is_identity() {
        let (x, _, _) = pauli();
        let u = hermitian_expm(&x, 0.0).unwrap();
        assert!(u.max_abs_diff(&Operator::identity(2)) < 1e-15);
    }

    #[test]
    fn expm_diagonal_case() {
        let (_, _, z) = pauli();
        let u = hermitian_expm(&z, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((u.get(0, 0) - c(0.0, -1.0)).norm() < 1e-14);
        assert!((u.get(1, 1) - c(0.0, 1.0)).norm() < 1e-14);
        assert!(u.get(0, 1).norm() < 1e-14);
    }

    /// Truncated Taylor series of exp(−i h t), independent of eigendecomposition.
    fn series_expm(h: &Operator, t: f64) -> Operator {
        let generator = h.scale(c(0.0, -t));
        let mut term = Operator::identity(h.dim());
        let mut sum = term.clone();
        for k in 1..60 {
            term = &(&term * &generator) * (1.0 / k as f64);
            sum = &sum + &term;
        }
        sum
    }

    #[test]
    fn expm_sigma_x_matches_series_and_closed_form() {
        let (x, _, _) = pauli();
        for &t in &[0.3, 1.0, 2.7] {
            let u = hermitian_expm(&x, t).unwrap();
            let closed = &Operator::identity(2).scale(c(t.cos(), 0.0)) - &x.scale(c(0.0, t.sin()));
            assert!(u.max_abs_diff(&series_expm(&x, t)) < 1e-12);
            assert!(u.max_abs_diff(&closed) < 1e-12);
        }
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let a = Operator::from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_expm(&a, 1.0), Err(Error::NonHermitian { .. })));
    }

    #[test]
    fn thermal_state_limits() {
        let (_, _, z) = pauli();
        let hot = thermal_state(&z, 0.0).unwrap();
        assert!(hot.op().max_abs_diff(&DensityMatrix::maximally_mixed(2).into_operator()) < 1e-15);

        let cold = thermal_state(&z, 50.0).unwrap();
        assert!(cold.op().get(0, 0).re < 1e-20);
        assert!((cold.op().get(1, 1).re - 1.0).abs() < 1e-15);

        let warm = thermal_state(&z, 1.0).unwrap();
        let zsum = (-1.0f64).exp() + 1.0f64.exp();
        assert!((warm.op().get(0, 0).re - (-1.0f64).exp() / zsum).abs() < 1e-14);
        assert!((warm.op().get(1, 1).re - 1.0f64.exp() / zsum).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_cases() {
        let (x, y, z) = pauli();
        let rho_s = DensityMatrix::basis(2, 0).unwrap().into_operator();
        let rho_b = DensityMatrix::maximally_mixed(2).into_operator();
        let joint = kron(&rho_s, &rho_b);
        assert!(partial_trace_sensor(&joint, 2).unwrap().max_abs_diff(&rho_b) < 1e-15);

        let xop = &(&x + &z) + &y.scale(c(0.3, 0.0));
        let tr = partial_trace_sensor(&kron(&Operator::identity(2), &xop), 2).unwrap();
        assert!(tr.max_abs_diff(&(&xop * 2.0)) < 1e-15);

        // (|00⟩ + |11⟩)/√2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = DVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
        let reduced = partial_trace_sensor(&Operator::outer(&bell), 2).unwrap();
        assert!(reduced.max_abs_diff(&(&Operator::identity(2) * 0.5)) < 1e-15);

        assert!(partial_trace_sensor(&Operator::identity(6), 4).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(Operator::identity(2)).is_err());
        assert!(DensityMatrix::new(Operator::diagonal(&[1.5, -0.5])).is_err());
        let skew = Operator::from_rows(2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.2, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(DensityMatrix::new(skew).is_err());
        assert!(DensityMatrix::new(Operator::diagonal(&[0.25, 0.75])).is_ok());
    }

    #[test]
    fn spectral_projectors_cluster_degenerate_levels() {
        let op = Operator::diagonal(&[1.0, -2.0, 1.0 + 1e-12, 3.0]);
        let proj = op.eigh().unwrap().spectral_projectors(1e-9);
        assert_eq!(proj.len(), 3);
        assert!((proj[1].0 - 1.0).abs() < 1e-11);
        assert!((proj[1].1.trace().re - 2.0).abs() < 1e-12);
        let total = proj.iter().fold(Operator::zeros(4), |acc, (_, p)| &acc + p);
        assert!(total.max_abs_diff(&Operator::identity(4)) < 1e-12);
    }
}
