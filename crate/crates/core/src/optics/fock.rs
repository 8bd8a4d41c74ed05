use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DVector;

use crate::exec::{map_indexed, Execution};
use crate::quantum::{kron, HermitianEigen, Operator};
use crate::{Error, Result, C64};

/// Largest dense two-mode operator set `stokes_operators` will allocate.
const DENSE_LIMIT_BYTES: u128 = 2 << 30;

/// Per-mode photon cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockTruncation {
    n_max: usize,
}

impl FockTruncation {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidInput("n_max must be >= 1".into()));
        }
        Ok(Self { n_max })
    }

    /// Default cutoff `ceil(α² + 10α + 10)`.
    pub fn for_alpha(alpha: f64) -> Result<Self> {
        validate_alpha(alpha)?;
        Self::new(Self::required_n_max(alpha))
    }

    pub fn required_n_max(alpha: f64) -> usize {
        (alpha * alpha + 10.0 * alpha + 10.0).ceil() as usize
    }

    /// Fails unless the coherent-state tail beyond `n_max` is negligible.
    pub fn check(&self, alpha: f64) -> Result<()> {
        validate_alpha(alpha)?;
        let required = Self::required_n_max(alpha);
        if self.n_max < required {
            return Err(Error::TruncationInsufficient { n_max: self.n_max, alpha, required });
        }
        Ok(())
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn two_mode_dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 1)
    }

    /// Dense index of `|n_H, n_V⟩` (H is the more significant factor).
    pub fn index(&self, n_h: usize, n_v: usize) -> usize {
        n_h * (self.n_max + 1) + n_v
    }

    /// `(n_H, n_V)` of a dense index.
    pub fn occupation(&self, index: usize) -> (usize, usize) {
        (index / (self.n_max + 1), index % (self.n_max + 1))
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidInput(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    Ok(())
}

/// Stokes component selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stokes {
    S1,
    S2,
    S3,
}

/// Dense Stokes operators on the full truncated two-mode space.
#[derive(Clone, Debug)]
pub struct StokesOperators {
    pub s1: Operator,
    pub s2: Operator,
    pub s3: Operator,
    /// `a_H = a ⊗ I`.
    pub a_h: Operator,
    /// `a_V = I ⊗ a`.
    pub a_v: Operator,
}

impl StokesOperators {
    pub fn get(&self, which: Stokes) -> &Operator {
        match which {
            Stokes::S1 => &self.s1,
            Stokes::S2 => &self.s2,
            Stokes::S3 => &self.s3,
        }
    }

    /// Diagonal projector onto states with `n_H + n_V ≤ max_total`.
    pub fn photon_number_projector(tr: FockTruncation, max_total: usize) -> Operator {
        let values: Vec<f64> = (0..tr.two_mode_dim())
            .map(|i| {
                let (h, v) = tr.occupation(i);
                if h + v <= max_total { 1.0 } else { 0.0 }
            })
            .collect();
        Operator::diagonal(&values)
    }
}

/// Builds `S₁, S₂, S₃` from truncated mode operators.
pub fn stokes_operators(tr: FockTruncation) -> Result<StokesOperators> {
    let dim = tr.two_mode_dim() as u128;
    let bytes = 8 * dim * dim * 16;
    if bytes > DENSE_LIMIT_BYTES {
        return Err(Error::ResourceGuard { bytes, limit: DENSE_LIMIT_BYTES });
    }
    let m = tr.n_max + 1;
    let a = Operator::from_fn(m, |r, c| {
        if c == r + 1 { C64::new((c as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) }
    });
    let id = Operator::identity(m);
    let a_h = kron(&a, &id);
    let a_v = kron(&id, &a);
    let n_h = &a_h.adjoint() * &a_h;
    let n_v = &a_v.adjoint() * &a_v;
    let hv = &a_h.adjoint() * &a_v;
    let vh = &a_v.adjoint() * &a_h;
    let s1 = &(&n_h - &n_v) * 0.5;
    let s2 = &(&hv + &vh) * 0.5;
    let s3 = (&hv - &vh).scale(C64::new(0.0, -0.5));
    Ok(StokesOperators { s1, s2, s3, a_h, a_v })
}

/// Two-mode state restricted to the complete blocks `N ≤ n_max`.
///
/// `blocks[N][k]` is the amplitude of `|N − k, k⟩` (`k` photons in V).
#[derive(Clone, Debug, PartialEq)]
pub struct BlockState {
    blocks: Vec<DVector<C64>>,
}

impl BlockState {
    pub fn zeros(n_max: usize) -> Self {
        Self { blocks: (0..=n_max).map(|n| DVector::zeros(n + 1)).collect() }
    }

    /// Coherent state `|β_H, β_V⟩` truncated to `N ≤ n_max`.
    pub fn coherent(beta_h: C64, beta_v: C64, n_max: usize) -> Self {
        let mut ln_fact = vec![0.0f64; n_max + 2];
        for n in 1..=n_max + 1 {
            ln_fact[n] = ln_fact[n - 1] + (n as f64).ln();
        }
        let norm = (-(beta_h.norm_sqr() + beta_v.norm_sqr()) / 2.0).exp();
        // amplitudes in log-magnitude form so α^N/√N! stays finite at large N
        let term = |z: C64, n: usize| -> C64 {
            if n == 0 {
                return C64::new(1.0, 0.0);
            }
            if z.norm() == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let ln_mag = n as f64 * z.norm().ln() - 0.5 * ln_fact[n];
            C64::from_polar(ln_mag.exp(), n as f64 * z.arg())
        };
        let blocks = (0..=n_max)
            .map(|n| DVector::from_fn(n + 1, |k, _| term(beta_h, n - k) * term(beta_v, k) * norm))
            .collect();
        Self { blocks }
    }

    pub fn n_max(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, n: usize) -> &DVector<C64> {
        &self.blocks[n]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &BlockState) -> C64 {
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.dotc(b)).sum()
    }

    /// Matrix-free `S_i |ψ⟩`.
    pub fn apply(&self, which: Stokes) -> BlockState {
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(n, v)| apply_block(which, n, v))
            .collect();
        BlockState { blocks }
    }

    pub fn expectation(&self, which: Stokes) -> C64 {
        self.inner(&self.apply(which))
    }

    /// Embeds into the dense `(n_max+1)²` space of `tr`.
    pub fn to_dense(&self, tr: FockTruncation) -> DVector<C64> {
        let mut out = DVector::zeros(tr.two_mode_dim());
        for (n, block) in self.blocks.iter().enumerate().take(tr.n_max + 1) {
            for k in 0..=n {
                out[tr.index(n - k, k)] = block[k];
            }
        }
        out
    }
}

fn apply_block(which: Stokes, n: usize, v: &DVector<C64>) -> DVector<C64> {
    let mut out = DVector::zeros(n + 1);
    match which {
        Stokes::S1 => {
            for k in 0..=n {
                out[k] = v[k] * ((n as f64 - 2.0 * k as f64) / 2.0);
            }
        }
        Stokes::S2 | Stokes::S3 => {
            // a_H†a_V: k → k−1, a_V†a_H: k → k+1
            let (up, down) = match which {
                Stokes::S2 => (C64::new(0.5, 0.0), C64::new(0.5, 0.0)),
                _ => (C64::new(0.0, -0.5), C64::new(0.0, 0.5)),
            };
            for k in 0..=n {
                if k >= 1 {
                    out[k - 1] += up * (((n - k + 1) * k) as f64).sqrt() * v[k];
                }
                if k < n {
                    out[k + 1] += down * (((n - k) * (k + 1)) as f64).sqrt() * v[k];
                }
            }
        }
    }
    out
}

fn block_operator(which: Stokes, n: usize) -> Operator {
    let mut m = Operator::zeros(n + 1).into_matrix();
    for k in 0..=n {
        let mut e = DVector::zeros(n + 1);
        e[k] = C64::new(1.0, 0.0);
        m.set_column(k, &apply_block(which, n, &e));
    }
    Operator::from_matrix(m).expect("square")
}

/// Spectral data of `S₃` on every complete photon-number block.
///
/// Shared through a process-wide cache keyed by `n_max`.
#[derive(Debug)]
pub struct FockSpace {
    tr: FockTruncation,
    s3_blocks: Vec<HermitianEigen>,
}

fn cache() -> &'static RwLock<HashMap<usize, Arc<FockSpace>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<FockSpace>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

impl FockSpace {
    pub fn shared(tr: FockTruncation) -> Arc<FockSpace> {
        if let Some(space) = cache().read().expect("fock cache poisoned").get(&tr.n_max) {
            return Arc::clone(space);
        }
        let built = Arc::new(Self::build(tr));
        let mut guard = cache().write().expect("fock cache poisoned");
        Arc::clone(guard.entry(tr.n_max).or_insert(built))
    }

    fn build(tr: FockTruncation) -> Self {
        let s3_blocks = map_indexed(tr.n_max + 1, Execution::Parallel, |n| {
            block_operator(Stokes::S3, n).eigh().expect("S3 block is Hermitian")
        });
        Self { tr, s3_blocks }
    }

    /// Bytes held by a cached space for this truncation.
    pub fn footprint_bytes(tr: FockTruncation) -> u128 {
        let n = tr.n_max as u128 + 1;
        // Σ (N+1)² complex eigenvector entries
        16 * n * (n + 1) * (2 * n + 1) / 6
    }

    pub fn truncation(&self) -> FockTruncation {
        self.tr
    }

    /// Dense `S_i` restricted to the `N`-photon block.
    pub fn block(&self, which: Stokes, n: usize) -> Operator {
        block_operator(which, n)
    }

    /// `exp(−i·angle·S₃) |ψ⟩` block by block.
    pub fn rotate_s3(&self, state: &BlockState, angle: f64) -> BlockState {
        let blocks = state
            .blocks
            .iter()
            .zip(&self.s3_blocks)
            .map(|(v, eig)| {
                let mut coeffs = eig.vectors.adjoint() * v;
                for (c, &lambda) in coeffs.iter_mut().zip(&eig.values) {
                    *c *= C64::from_polar(1.0, -lambda * angle);
                }
                &eig.vectors * coeffs
            })
            .collect();
        BlockState { blocks }
    }
}

/// `|α, H⟩` on the dense two-mode space.
pub fn coherent_state(alpha: f64, tr: FockTruncation) -> Result<DVector<C64>> {
    tr.check(alpha)?;
    Ok(BlockState::coherent(C64::new(alpha, 0.0), C64::new(0.0, 0.0), tr.n_max).to_dense(tr))
}

/// `(Tr_s[Λρ_s], Tr_s[Λ 𝕊₃⁺ρ_s], Tr_s[Λ 𝕊₃⁻ρ_s])` for one measured observable `Λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceTriple {
    pub t0: f64,
    pub t_plus: f64,
    pub t_minus: f64,
}

/// Selection traces for `Λ = S₂` and `Λ = S₃` with `ρ_s = |α,H⟩⟨α,H|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionTraces {
    pub s2: TraceTriple,
    pub s3: TraceTriple,
}

/// Evaluates the selection traces on the truncated Fock space.
pub fn selection_traces(alpha: f64, tr: FockTruncation) -> Result<SelectionTraces> {
    tr.check(alpha)?;
    let psi = BlockState::coherent(C64::new(alpha, 0.0), C64::new(0.0, 0.0), tr.n_max);
    let s3_psi = psi.apply(Stokes::S3);
    let triple = |which: Stokes| {
        let lam_psi = psi.apply(which);
        // p = ⟨ψ|Λ S₃|ψ⟩, and ⟨ψ|S₃ Λ|ψ⟩ = p*
        let p = lam_psi.inner(&s3_psi);
        TraceTriple { t0: psi.inner(&lam_psi).re, t_plus: p.re, t_minus: 2.0 * p.im }
    };
    Ok(SelectionTraces { s2: triple(Stokes::S2), s3: triple(Stokes::S3) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_rule() {
        assert_eq!(FockTruncation::required_n_max(2.0), 34);
        assert_eq!(FockTruncation::required_n_max(4.0), 66);
        assert!(FockTruncation::new(20).unwrap().check(2.0).is_err());
        assert!(FockTruncation::new(0).is_err());
        assert!(matches!(coherent_state(2.0, FockTruncation::new(10).unwrap()), Err(Error::TruncationInsufficient { .. })));
    }

    #[test]
    fn vacuum_limit() {
        let tr = FockTruncation::new(10).unwrap();
        let psi = coherent_state(0.0, tr).unwrap();
        assert_eq!(psi[0], C64::new(1.0, 0.0));
        assert!((psi.norm() - 1.0).abs() < 1e-15);
        let st = stokes_operators(tr).unwrap();
        for s in [&st.s1, &st.s2, &st.s3] {
            assert!((psi.dotc(&s.apply(&psi))).norm() < 1e-15);
        }
    }

    #[test]
    fn coherent_state_moments() {
        let alpha = 1.5;
        let tr = FockTruncation::for_alpha(alpha).unwrap();
        let psi = coherent_state(alpha, tr).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-10);
        let st = stokes_operators(tr).unwrap();
        let n_h = &st.a_h.adjoint() * &st.a_h;
        let ev = |op: &Operator| psi.dotc(&op.apply(&psi));
        assert!((ev(&n_h).re - alpha * alpha).abs() < 1e-9);
        assert!((ev(&st.s1).re - alpha * alpha / 2.0).abs() < 1e-9);
        assert!(ev(&st.s2).norm() < 1e-12);
        assert!(ev(&st.s3).norm() < 1e-12);
    }

    #[test]
    fn block_and_dense_stokes_agree() {
        let tr = FockTruncation::new(7).unwrap();
        let st = stokes_operators(tr).unwrap();
        let state = BlockState::coherent(C64::new(0.8, 0.2), C64::new(-0.3, 0.5), 7);
        let dense = state.to_dense(tr);
        for which in [Stokes::S1, Stokes::S2, Stokes::S3] {
            let via_blocks = state.apply(which).to_dense(tr);
            let via_dense = st.get(which).apply(&dense);
            assert!((via_blocks - via_dense).norm() < 1e-13);
        }
    }

    #[test]
    fn rotation_produces_rotated_coherent_state() {
        let alpha = 2.0;
        let tr = FockTruncation::for_alpha(alpha).unwrap();
        let space = FockSpace::shared(tr);
        let psi = BlockState::coherent(C64::new(alpha, 0.0), C64::new(0.0, 0.0), tr.n_max());
        for &angle in &[0.02, -0.3, 1.1] {
            let rotated = space.rotate_s3(&psi, angle);
            let theta = angle / 2.0;
            let expect = BlockState::coherent(C64::new(alpha * theta.cos(), 0.0), C64::new(alpha * theta.sin(), 0.0), tr.n_max());
            let diff: f64 = (0..=tr.n_max()).map(|n| (rotated.block(n) - expect.block(n)).norm_squared()).sum();
            assert!(diff.sqrt() < 1e-11, "angle {angle}: {}", diff.sqrt());
        }
    }

    #[test]
    fn selection_traces_s2_and_vanishing_alpha() {
        let alpha = 3.0;
        let tr = FockTruncation::for_alpha(alpha).unwrap();
        let t = selection_traces(alpha, tr).unwrap();
        let a2 = alpha * alpha;
        assert!(t.s2.t0.abs() < 1e-8 * a2);
        assert!(t.s2.t_plus.abs() < 1e-8 * a2);
        assert!((t.s2.t_minus - a2 / 2.0).abs() < 1e-8 * a2);

        let z = selection_traces(0.0, FockTruncation::for_alpha(0.0).unwrap()).unwrap();
        for v in [z.s2.t0, z.s2.t_plus, z.s2.t_minus, z.s3.t0, z.s3.t_plus, z.s3.t_minus] {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn selection_traces_s3_is_transverse_variance() {
        // ⟨S₃²⟩ for |α,H⟩ is α²/4 (spin-N/2 transverse variance N/4)
        let alpha = 2.5;
        let t = selection_traces(alpha, FockTruncation::for_alpha(alpha).unwrap()).unwrap();
        let a2 = alpha * alpha;
        assert!(t.s3.t0.abs() < 1e-8 * a2);
        assert!((t.s3.t_plus - a2 / 4.0).abs() < 1e-8 * a2);
        assert!(t.s3.t_minus.abs() < 1e-8 * a2);
    }

    #[test]
    fn dense_selection_traces_agree_with_blocks() {
        let alpha = 0.7;
        let tr = FockTruncation::for_alpha(alpha).unwrap();
        let st = stokes_operators(tr).unwrap();
        let psi = coherent_state(alpha, tr).unwrap();
        let rho = Operator::outer(&psi);
        let blocks = selection_traces(alpha, tr).unwrap();
        for (lam, triple) in [(&st.s2, blocks.s2), (&st.s3, blocks.s3)] {
            let plus = &(&(&st.s3 * &rho) + &(&rho * &st.s3)) * 0.5;
            let minus = (&(&st.s3 * &rho) - &(&rho * &st.s3)).scale(C64::new(0.0, -1.0));
            assert!(((lam * &rho).trace().re - triple.t0).abs() < 1e-12);
            assert!(((lam * &plus).trace().re - triple.t_plus).abs() < 1e-12);
            assert!(((lam * &minus).trace().re - triple.t_minus).abs() < 1e-12);
        }
    }

    #[test]
    fn cache_returns_same_instance() {
        let tr = FockTruncation::new(12).unwrap();
        let a = FockSpace::shared(tr);
        let b = FockSpace::shared(tr);
        assert!(Arc::ptr_eq(&a, &b));
    }
}
