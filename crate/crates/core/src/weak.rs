//! Sequential weak measurements: per-shot maps `𝕄_j` and the photon-count
//! correlation `G^(K) = Tr_B[𝕄_K ⋯ 𝕄_1 ρ_B]`.
//!
//! Three evaluations are provided:
//!
//! * [`gk_leading`]: each shot acts as `(τα²/2)·𝔹^{η_j}_j`, which makes
//!   `G^(K) = 2^{−K} τ^K α^{2K} C^{η_K…η_1}` an identity;
//! * [`gk_leading_calibrated`]: the same chain with each shot's coefficient
//!   taken from the actual selection trace, `α²/2` for `S₂` and `α²/4` for `S₃`;
//! * [`gk_exact_unitary`]: every order in `τ`, from the joint unitary
//!   `exp(−iτ S₃⊗B(t_j))` followed by `Tr_s[Λ_j ·]`.
//!
//! The target is kept in the interaction picture, so free evolution between
//! shots enters only through `B(t_j)`. Each shot uses a fresh probe pulse.

use crate::correlations::{apply_branch, correlation, correlation_label, heisenberg_coupling, BranchSign, CorrelationQuery};
use crate::optics::{stokes_operators, BlockState, FockSpace, FockTruncation, MeasurementBasis, SensorConfig};
use crate::quantum::{hermitian_expm, kron, partial_trace_sensor, DensityMatrix, Operator, TargetModel, TOLERANCES};
use crate::{Error, Result, C64};

/// Working-set limit for the all-orders evaluation.
pub const MEMORY_GUARD_BYTES: u128 = 2 << 30;

/// One measurement shot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotSpec {
    /// Nominal start time of the pulse (s).
    pub time: f64,
    pub basis: MeasurementBasis,
}

impl ShotSpec {
    pub fn new(time: f64, basis: MeasurementBasis) -> Self {
        Self { time, basis }
    }

    pub fn sign(&self) -> BranchSign {
        self.basis.sign()
    }
}

/// Time at which `B(t)` is frozen during a pulse.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CouplingTime {
    #[default]
    Start,
    Midpoint,
}

/// Ordered shots sharing one probe configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolSpec {
    shots: Vec<ShotSpec>,
    sensor: SensorConfig,
    coupling_time: CouplingTime,
}

impl ProtocolSpec {
    pub fn new(shots: Vec<ShotSpec>, sensor: SensorConfig) -> Result<Self> {
        if shots.is_empty() {
            return Err(Error::InvalidInput("protocol needs at least one shot".into()));
        }
        if shots.iter().any(|s| !s.time.is_finite()) {
            return Err(Error::InvalidInput("shot times must be finite".into()));
        }
        if shots.windows(2).any(|w| w[1].time < w[0].time) {
            return Err(Error::InvalidInput("shot times must be non-decreasing".into()));
        }
        Ok(Self { shots, sensor, coupling_time: CouplingTime::Start })
    }

    pub fn with_coupling_time(mut self, coupling_time: CouplingTime) -> Self {
        self.coupling_time = coupling_time;
        self
    }

    pub fn with_sensor(mut self, sensor: SensorConfig) -> Self {
        self.sensor = sensor;
        self
    }

    pub fn shots(&self) -> &[ShotSpec] {
        &self.shots
    }

    pub fn sensor(&self) -> &SensorConfig {
        &self.sensor
    }

    pub fn coupling_time(&self) -> CouplingTime {
        self.coupling_time
    }

    pub fn order(&self) -> usize {
        self.shots.len()
    }

    pub fn signs(&self) -> Vec<BranchSign> {
        self.shots.iter().map(ShotSpec::sign).collect()
    }

    /// Correlation label selected by the basis sequence, e.g. `C^{+-}`.
    pub fn label(&self) -> String {
        correlation_label(&self.signs())
    }

    /// Time at which `B` is evaluated for `shot`.
    pub fn effective_time(&self, shot: &ShotSpec) -> f64 {
        match self.coupling_time {
            CouplingTime::Start => shot.time,
            CouplingTime::Midpoint => shot.time + 0.5 * self.sensor.tau,
        }
    }

    /// The correlation `C^{η_K…η_1}` this protocol is proportional to.
    pub fn induced_query(&self) -> CorrelationQuery {
        let times = self.shots.iter().map(|s| self.effective_time(s)).collect();
        CorrelationQuery::new(times, self.signs()).expect("validated protocol")
    }

    /// Non-fatal problems, e.g. a final `S₃` shot whose signal vanishes.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.shots.last().map(|s| s.basis) == Some(MeasurementBasis::S3) {
            out.push(format!("last shot is measured in S3: {} vanishes identically", self.label()));
        }
        out
    }

    /// `2^{−K} τ^K α^{2K}`.
    pub fn proportionality_factor(&self) -> f64 {
        let k = self.order() as i32;
        let s = &self.sensor;
        (0.5 * s.tau * s.alpha * s.alpha).powi(k)
    }
}

/// Outcome of a `G^(K)` evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GkResult {
    /// `G^(K)` in counts^K (half-count convention).
    pub value: f64,
    pub order: usize,
    /// `2^{−K} τ^K α^{2K} C^{η_K…η_1}` from the correlations module.
    pub predicted_from_c: f64,
}

/// Leading-order measurement map `ρ ↦ coefficient·𝔹^η(t_j) ρ`.
#[derive(Clone, Debug)]
pub struct MeasurementMap {
    coupling: Operator,
    sign: BranchSign,
    coefficient: f64,
}

impl MeasurementMap {
    pub fn coupling(&self) -> &Operator {
        &self.coupling
    }

    pub fn sign(&self) -> BranchSign {
        self.sign
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        Ok(&apply_branch(&self.coupling, self.sign, rho)? * self.coefficient)
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<Operator> {
        self.apply(rho.op())
    }
}

/// `𝕄_j` at leading order: `(τα²/2)·𝔹^{η}(t_j)`, `η = +` for `S₂`, `−` for `S₃`.
pub fn measurement_superoperator(model: &TargetModel, shot: &ShotSpec, sensor: &SensorConfig) -> MeasurementMap {
    MeasurementMap {
        coupling: heisenberg_coupling(model, shot.time),
        sign: shot.sign(),
        coefficient: 0.5 * sensor.tau * sensor.alpha * sensor.alpha,
    }
}

/// First-order selection coefficient measured on `|α,H⟩`:
/// `Tr_s[S₂ 𝕊₃⁻ρ_s] = α²/2`, `Tr_s[S₃ 𝕊₃⁺ρ_s] = ⟨S₃²⟩ = α²/4`.
pub fn selection_coefficient(basis: MeasurementBasis, alpha: f64) -> f64 {
    match basis {
        MeasurementBasis::S2 => alpha * alpha / 2.0,
        MeasurementBasis::S3 => alpha * alpha / 4.0,
    }
}

fn chain_leading(model: &TargetModel, proto: &ProtocolSpec, coefficient: impl Fn(MeasurementBasis) -> f64) -> Result<GkResult> {
    let tau = proto.sensor.tau;
    let mut rho = model.initial_state().op().clone();
    for shot in &proto.shots {
        let map = MeasurementMap {
            coupling: heisenberg_coupling(model, proto.effective_time(shot)),
            sign: shot.sign(),
            coefficient: tau * coefficient(shot.basis),
        };
        rho = map.apply(&rho)?;
    }
    Ok(GkResult {
        value: rho.trace().re,
        order: proto.order(),
        predicted_from_c: predicted_from_c(model, proto)?,
    })
}

fn predicted_from_c(model: &TargetModel, proto: &ProtocolSpec) -> Result<f64> {
    Ok(proto.proportionality_factor() * correlation(model, &proto.induced_query())?)
}

/// `G^(K)` from the leading-order maps `(τα²/2)·𝔹^{η_j}_j`.
pub fn gk_leading(model: &TargetModel, proto: &ProtocolSpec) -> Result<GkResult> {
    let half = proto.sensor.alpha * proto.sensor.alpha / 2.0;
    chain_leading(model, proto, |_| half)
}

/// `G^(K)` from leading-order maps with per-basis selection coefficients.
pub fn gk_leading_calibrated(model: &TargetModel, proto: &ProtocolSpec) -> Result<GkResult> {
    let alpha = proto.sensor.alpha;
    chain_leading(model, proto, |basis| selection_coefficient(basis, alpha))
}

/// Estimated bytes held while running [`gk_exact_unitary`].
pub fn exact_unitary_footprint(model_dim: usize, tr: FockTruncation) -> u128 {
    let n = tr.n_max() as u128 + 1;
    let d = model_dim as u128;
    let block_states = 16 * n * (n + 1) / 2 * (d + 2);
    let target = 16 * d * d * (d + 4);
    FockSpace::footprint_bytes(tr) + block_states + target
}

fn guard(bytes: u128) -> Result<()> {
    if bytes > MEMORY_GUARD_BYTES {
        return Err(Error::ResourceGuard { bytes, limit: MEMORY_GUARD_BYTES });
    }
    Ok(())
}

fn real_value(z: C64, scale: f64) -> Result<f64> {
    if z.im.abs() > TOLERANCES.imaginary_residue * scale.max(z.re.abs()).max(1.0) {
        return Err(Error::ImaginaryResidue { residue: z.im });
    }
    Ok(z.re)
}

/// All-orders `G^(K)` on the truncated Fock space.
///
/// The joint unitary is applied through the spectral decomposition
/// `B(t_j) = Σ_b b P_b`, for which `exp(−iτ S₃⊗B) = Σ_b exp(−iτ b S₃) ⊗ P_b`.
/// One shot then maps `ρ_B ↦ Σ_{b,b'} ⟨v_{b'}|Λ_j|v_b⟩ P_b ρ_B P_{b'}` with
/// `|v_b⟩ = exp(−iτ b S₃)|α,H⟩`.
pub fn gk_exact_unitary(model: &TargetModel, proto: &ProtocolSpec, tr: FockTruncation) -> Result<GkResult> {
    let sensor = proto.sensor;
    tr.check(sensor.alpha)?;
    guard(exact_unitary_footprint(model.dim(), tr))?;
    let space = FockSpace::shared(tr);
    let psi = BlockState::coherent(C64::new(sensor.alpha, 0.0), C64::new(0.0, 0.0), tr.n_max());
    let mut rho = model.initial_state().op().clone();
    for shot in &proto.shots {
        let b = heisenberg_coupling(model, proto.effective_time(shot));
        let branches = b.eigh()?.spectral_projectors(TOLERANCES.degeneracy);
        let rotated: Vec<BlockState> = branches.iter().map(|(value, _)| space.rotate_s3(&psi, value * sensor.tau)).collect();
        let lam: Vec<BlockState> = rotated.iter().map(|v| v.apply(shot.basis.stokes())).collect();
        let mut next = Operator::zeros(model.dim());
        for (i, (_, p_i)) in branches.iter().enumerate() {
            let left = p_i * &rho;
            for (j, (_, p_j)) in branches.iter().enumerate() {
                let weight = rotated[j].inner(&lam[i]);
                if weight.norm() == 0.0 {
                    continue;
                }
                next = &next + &(&left * p_j).scale(weight);
            }
        }
        rho = next;
    }
    let scale = proto.proportionality_factor().abs();
    Ok(GkResult {
        value: real_value(rho.trace(), scale)?,
        order: proto.order(),
        predicted_from_c: predicted_from_c(model, proto)?,
    })
}

/// All-orders `G^(K)` by literal joint-space construction: builds
/// `ρ_s ⊗ ρ_B`, applies `exp(−iτ S₃⊗B(t_j))` as a dense matrix and traces the
/// sensor against `Λ_j ⊗ I`. Only practical for small cutoffs.
pub fn gk_exact_unitary_dense(model: &TargetModel, proto: &ProtocolSpec, tr: FockTruncation) -> Result<GkResult> {
    let sensor = proto.sensor;
    tr.check(sensor.alpha)?;
    let joint = (tr.two_mode_dim() * model.dim()) as u128;
    guard(16 * joint * joint * 8)?;
    let stokes = stokes_operators(tr)?;
    let psi = crate::optics::coherent_state(sensor.alpha, tr)?;
    let rho_s = Operator::outer(&psi);
    let id_b = Operator::identity(model.dim());
    let mut rho = model.initial_state().op().clone();
    for shot in &proto.shots {
        let b = heisenberg_coupling(model, proto.effective_time(shot));
        let u = hermitian_expm(&kron(&stokes.s3, &b), sensor.tau)?;
        let evolved = &(&u * &kron(&rho_s, &rho)) * &u.adjoint();
        let lam = kron(stokes.get(shot.basis.stokes()), &id_b);
        rho = partial_trace_sensor(&(&lam * &evolved), tr.two_mode_dim())?;
    }
    let scale = proto.proportionality_factor().abs();
    Ok(GkResult {
        value: real_value(rho.trace(), scale)?,
        order: proto.order(),
        predicted_from_c: predicted_from_c(model, proto)?,
    })
}
