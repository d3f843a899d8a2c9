//! Quantum expectation values for planar (X–Y plane) product observables.
//!
//! Production paths use the GHZ closed form `E = cos(Σ θ_j)`. State-vector
//! and density-matrix routines exist as independent cross-checks and for
//! Born-rule sampling.
//!
//! Qubit `j` (1-based) is bit `j-1` of a basis index, the same convention as
//! input bits and settings. Outcome `m_j = 0` is the `+1` eigenvalue.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::protocol::ProtocolInstance;
use crate::Rational;

pub const MAX_STATE_QUBITS: usize = 12;
pub const MAX_DENSITY_QUBITS: usize = 8;

pub type Unitary2 = [[Complex64; 2]; 2];

fn check_qubits(l: usize, cap: usize) -> Result<()> {
    if l == 0 || l > cap {
        return Err(Error::Cap {
            what: "qubit",
            found: l,
            cap,
        });
    }
    Ok(())
}

fn normalize_angle(theta: f64) -> f64 {
    let r = theta % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Per-party angles for setting 0 and setting 1; the observable for angle `θ`
/// is `cos θ X + sin θ Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    angles: Vec<[f64; 2]>,
}

impl MeasurementPlan {
    /// Angles are reduced to `[0, 2π)`.
    pub fn new(angles: Vec<[f64; 2]>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Dimension("plan needs at least one party".into()));
        }
        if angles.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::NonFiniteAngle);
        }
        Ok(Self {
            angles: angles
                .into_iter()
                .map(|[a, b]| [normalize_angle(a), normalize_angle(b)])
                .collect(),
        })
    }

    /// Flat vector `(θ_1^(0), θ_1^(1), θ_2^(0), ...)`.
    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(2) {
            return Err(Error::Dimension("flat angle vector must have even length".into()));
        }
        Self::new(flat.chunks(2).map(|c| [c[0], c[1]]).collect())
    }

    /// X for setting 0, Y for setting 1 on every party.
    pub fn xy(parties: usize) -> Self {
        Self {
            angles: alloc::vec![[0.0, FRAC_PI_2]; parties],
        }
    }

    /// Like [`MeasurementPlan::xy`] but the listed parties (1-based) measure
    /// Y for setting 0 and X for setting 1.
    pub fn xy_swapped(parties: usize, swapped: &[usize]) -> Result<Self> {
        let mut plan = Self::xy(parties);
        for &p in swapped {
            if p == 0 || p > parties {
                return Err(Error::Dimension(alloc::format!(
                    "party {p} outside 1..={parties}"
                )));
            }
            plan.angles[p - 1] = [FRAC_PI_2, 0.0];
        }
        Ok(plan)
    }

    pub fn parties(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[[f64; 2]] {
        &self.angles
    }

    pub fn flat(&self) -> Vec<f64> {
        self.angles.iter().flatten().copied().collect()
    }

    /// Angle list for the packed setting `s`.
    pub fn angles_for(&self, setting: u32) -> Vec<f64> {
        self.angles
            .iter()
            .enumerate()
            .map(|(j, a)| a[(setting >> j & 1) as usize])
            .collect()
    }

    pub fn angle_sum(&self, setting: u32) -> f64 {
        self.angles
            .iter()
            .enumerate()
            .map(|(j, a)| a[(setting >> j & 1) as usize])
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(qubits, MAX_STATE_QUBITS)?;
        if amplitudes.len() != 1 << qubits {
            return Err(Error::Dimension(alloc::format!(
                "{} amplitudes for {} qubits",
                amplitudes.len(),
                qubits
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(alloc::format!("state norm {norm} != 1")));
        }
        Ok(Self { qubits, amplitudes })
    }

    /// `|0...0⟩`.
    pub fn zero(qubits: usize) -> Result<Self> {
        check_qubits(qubits, MAX_STATE_QUBITS)?;
        let mut amplitudes = alloc::vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { qubits, amplitudes })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.qubits != other.qubits {
            return Err(Error::Dimension("qubit counts differ".into()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Equality up to global phase: `|⟨a|b⟩| = 1` within `tol`.
    pub fn equals_up_to_phase(&self, other: &PureState, tol: f64) -> bool {
        self.inner(other)
            .map(|z| (z.norm() - 1.0).abs() < tol)
            .unwrap_or(false)
    }

    /// `|ψ⟩⟨ψ|`, limited to the density-matrix cap.
    pub fn to_density(&self) -> Result<MixedState> {
        check_qubits(self.qubits, MAX_DENSITY_QUBITS)?;
        let dim = self.amplitudes.len();
        let mut rho = Vec::with_capacity(dim * dim);
        for a in &self.amplitudes {
            for b in &self.amplitudes {
                rho.push(a * b.conj());
            }
        }
        Ok(MixedState {
            qubits: self.qubits,
            rho,
        })
    }
}

/// Row-major `2^l x 2^l` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedState {
    qubits: usize,
    rho: Vec<Complex64>,
}

impl MixedState {
    /// Validates trace and Hermiticity; positivity is the caller's contract.
    pub fn new(qubits: usize, rho: Vec<Complex64>) -> Result<Self> {
        check_qubits(qubits, MAX_DENSITY_QUBITS)?;
        let dim = 1usize << qubits;
        if rho.len() != dim * dim {
            return Err(Error::Dimension(alloc::format!(
                "{} entries for a {dim}x{dim} matrix",
                rho.len()
            )));
        }
        let trace: Complex64 = (0..dim).map(|i| rho[i * dim + i]).sum();
        if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
            return Err(Error::InvalidArgument("density matrix trace != 1".into()));
        }
        for i in 0..dim {
            for k in 0..dim {
                if (rho[i * dim + k] - rho[k * dim + i].conj()).norm() > 1e-12 {
                    return Err(Error::InvalidArgument("density matrix is not Hermitian".into()));
                }
            }
        }
        Ok(Self { qubits, rho })
    }

    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        check_qubits(qubits, MAX_DENSITY_QUBITS)?;
        let dim = 1usize << qubits;
        let mut rho = alloc::vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            rho[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { qubits, rho })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.rho[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entry(i, i)).sum()
    }
}

/// White noise with visibility `V`: `ρ = V |GHZ⟩⟨GHZ| + (1-V) I / 2^l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    Ideal,
    WhiteNoise { visibility: f64 },
}

impl NoiseSpec {
    pub fn white_noise(visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::Visibility(visibility));
        }
        Ok(Self::WhiteNoise { visibility })
    }

    pub fn visibility(&self) -> f64 {
        match self {
            Self::Ideal => 1.0,
            Self::WhiteNoise { visibility } => *visibility,
        }
    }
}

pub fn ghz_state(qubits: usize) -> Result<PureState> {
    check_qubits(qubits, MAX_STATE_QUBITS)?;
    let mut amplitudes = alloc::vec![Complex64::new(0.0, 0.0); 1 << qubits];
    amplitudes[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amplitudes[(1 << qubits) - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(PureState { qubits, amplitudes })
}

/// `V |GHZ⟩⟨GHZ| + (1-V) I / 2^l` as an explicit density matrix.
pub fn white_noise_state(qubits: usize, visibility: f64) -> Result<MixedState> {
    NoiseSpec::white_noise(visibility)?;
    let pure = ghz_state(qubits)?.to_density()?;
    let mixed = MixedState::maximally_mixed(qubits)?;
    let rho = pure
        .rho
        .iter()
        .zip(&mixed.rho)
        .map(|(p, m)| p * visibility + m * (1.0 - visibility))
        .collect();
    Ok(MixedState { qubits, rho })
}

fn is_unitary(u: &Unitary2, tol: f64) -> bool {
    for i in 0..2 {
        for k in 0..2 {
            let dot: Complex64 = (0..2).map(|r| u[r][i].conj() * u[r][k]).sum();
            let target = if i == k { 1.0 } else { 0.0 };
            if (dot - target).norm() > tol {
                return false;
            }
        }
    }
    true
}

fn apply_single(amplitudes: &mut [Complex64], qubit: usize, u: &Unitary2) {
    let bit = 1usize << qubit;
    for i in 0..amplitudes.len() {
        if i & bit == 0 {
            let a0 = amplitudes[i];
            let a1 = amplitudes[i | bit];
            amplitudes[i] = u[0][0] * a0 + u[0][1] * a1;
            amplitudes[i | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

/// Applies `u[0] ⊗ u[1] ⊗ ...`, where `u[j]` acts on qubit `j+1`.
pub fn apply_local_unitaries(state: &PureState, unitaries: &[Unitary2]) -> Result<PureState> {
    if unitaries.len() != state.qubits {
        return Err(Error::Dimension(alloc::format!(
            "{} unitaries for {} qubits",
            unitaries.len(),
            state.qubits
        )));
    }
    if let Some(j) = unitaries.iter().position(|u| !is_unitary(u, 1e-10)) {
        return Err(Error::NotUnitary(j + 1));
    }
    let mut amplitudes = state.amplitudes.clone();
    for (q, u) in unitaries.iter().enumerate() {
        apply_single(&mut amplitudes, q, u);
    }
    Ok(PureState {
        qubits: state.qubits,
        amplitudes,
    })
}

pub mod gates {
    //! Single-qubit matrices.
    use super::Unitary2;
    use num_complex::Complex64;

    const O: Complex64 = Complex64::new(0.0, 0.0);
    const I1: Complex64 = Complex64::new(1.0, 0.0);

    pub const IDENTITY: Unitary2 = [[I1, O], [O, I1]];
    pub const X: Unitary2 = [[O, I1], [I1, O]];
    pub const Y: Unitary2 = [[O, Complex64::new(0.0, -1.0)], [Complex64::new(0.0, 1.0), O]];
    pub const Z: Unitary2 = [[I1, O], [O, Complex64::new(-1.0, 0.0)]];

    /// `cos θ X + sin θ Y`.
    pub fn planar(theta: f64) -> Unitary2 {
        [[O, Complex64::from_polar(1.0, -theta)], [Complex64::from_polar(1.0, theta), O]]
    }
}

/// Phase picked up by basis state `i` under `⊗_j (cos θ_j X + sin θ_j Y)`:
/// the product maps `|i⟩` to `phase(i) |i ⊕ 1...1⟩`.
fn product_phase(index: usize, angles: &[f64]) -> Complex64 {
    let total: f64 = angles
        .iter()
        .enumerate()
        .map(|(j, &t)| if index >> j & 1 == 0 { t } else { -t })
        .sum();
    Complex64::from_polar(1.0, total)
}

/// Quantum states the oracles can contract against.
pub trait QuantumState {
    fn qubits(&self) -> usize;
    /// `tr(ρ ⊗_j (cos θ_j X + sin θ_j Y))`.
    fn expectation_product(&self, angles: &[f64]) -> Result<f64>;
    /// Born-rule probabilities of outcome strings `m` (bit `j-1` is `m_j`).
    fn outcome_distribution(&self, angles: &[f64]) -> Result<Vec<f64>>;
}

fn check_angles(qubits: usize, angles: &[f64]) -> Result<()> {
    if angles.len() != qubits {
        return Err(Error::Dimension(alloc::format!(
            "{} angles for {} qubits",
            angles.len(),
            qubits
        )));
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFiniteAngle);
    }
    Ok(())
}

/// Rows are `⟨+θ|` and `⟨-θ|`, with `|±θ⟩ = (|0⟩ ± e^{iθ}|1⟩)/√2`.
fn measurement_basis(theta: f64) -> Unitary2 {
    let e = Complex64::from_polar(FRAC_1_SQRT_2, -theta);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[h, e], [h, -e]]
}

impl QuantumState for PureState {
    fn qubits(&self) -> usize {
        self.qubits
    }

    fn expectation_product(&self, angles: &[f64]) -> Result<f64> {
        check_angles(self.qubits, angles)?;
        let all = self.amplitudes.len() - 1;
        let value: Complex64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| self.amplitudes[i ^ all].conj() * product_phase(i, angles) * a)
            .sum();
        Ok(value.re)
    }

    fn outcome_distribution(&self, angles: &[f64]) -> Result<Vec<f64>> {
        check_angles(self.qubits, angles)?;
        let mut amplitudes = self.amplitudes.clone();
        for (q, &t) in angles.iter().enumerate() {
            apply_single(&mut amplitudes, q, &measurement_basis(t));
        }
        Ok(amplitudes.iter().map(|a| a.norm_sqr()).collect())
    }
}

impl QuantumState for MixedState {
    fn qubits(&self) -> usize {
        self.qubits
    }

    fn expectation_product(&self, angles: &[f64]) -> Result<f64> {
        check_angles(self.qubits, angles)?;
        let all = self.dim() - 1;
        let value: Complex64 = (0..self.dim())
            .map(|i| self.entry(i, i ^ all) * product_phase(i, angles))
            .sum();
        Ok(value.re)
    }

    fn outcome_distribution(&self, angles: &[f64]) -> Result<Vec<f64>> {
        check_angles(self.qubits, angles)?;
        let dim = self.dim();
        // W ρ W† column by column, then row by row
        let mut m = self.rho.clone();
        for (q, &t) in angles.iter().enumerate() {
            let w = measurement_basis(t);
            let bit = 1usize << q;
            for col in 0..dim {
                for row in 0..dim {
                    if row & bit == 0 {
                        let a0 = m[row * dim + col];
                        let a1 = m[(row | bit) * dim + col];
                        m[row * dim + col] = w[0][0] * a0 + w[0][1] * a1;
                        m[(row | bit) * dim + col] = w[1][0] * a0 + w[1][1] * a1;
                    }
                }
            }
            for row in 0..dim {
                for col in 0..dim {
                    if col & bit == 0 {
                        let a0 = m[row * dim + col];
                        let a1 = m[row * dim + (col | bit)];
                        m[row * dim + col] = a0 * w[0][0].conj() + a1 * w[0][1].conj();
                        m[row * dim + (col | bit)] = a0 * w[1][0].conj() + a1 * w[1][1].conj();
                    }
                }
            }
        }
        Ok((0..dim).map(|i| m[i * dim + i].re).collect())
    }
}

/// GHZ correlation of planar observables: `cos(Σ θ_j)`.
pub fn ghz_correlation(angles: &[f64]) -> f64 {
    libm::cos(angles.iter().sum())
}

fn check_plan(inst: &ProtocolInstance, plan: &MeasurementPlan) -> Result<()> {
    if plan.parties() != inst.parties() {
        return Err(Error::Dimension(alloc::format!(
            "plan has {} parties, instance has {}",
            plan.parties(),
            inst.parties()
        )));
    }
    Ok(())
}

/// `Σ_x β(x) E(x)` on the GHZ resource, scaled by the visibility.
pub fn beta_quantum(inst: &ProtocolInstance, plan: &MeasurementPlan, noise: NoiseSpec) -> Result<f64> {
    check_plan(inst, plan)?;
    let ideal: f64 = inst
        .settings_groups()
        .iter()
        .map(|g| crate::to_f64(&g.coefficient) * libm::cos(plan.angle_sum(g.setting)))
        .sum();
    Ok(noise.visibility() * ideal)
}

/// `Σ_x β(x) tr(ρ M(s(x)))` by explicit contraction against `state`.
pub fn beta_on_state<S: QuantumState>(
    inst: &ProtocolInstance,
    plan: &MeasurementPlan,
    state: &S,
) -> Result<f64> {
    check_plan(inst, plan)?;
    let mut total = 0.0;
    for g in inst.settings_groups() {
        total += crate::to_f64(&g.coefficient) * state.expectation_product(&plan.angles_for(g.setting))?;
    }
    Ok(total)
}

/// Smallest white-noise visibility at which the plan still reaches `c`.
pub fn critical_visibility(inst: &ProtocolInstance, plan: &MeasurementPlan, c: &Rational) -> Result<f64> {
    let quantum = beta_quantum(inst, plan, NoiseSpec::Ideal)?;
    let classical = crate::to_f64(c);
    if quantum <= classical {
        return Err(Error::NoViolation { quantum, classical });
    }
    Ok(classical / quantum)
}

pub fn fidelity(target: &PureState, rho: &MixedState) -> Result<f64> {
    if target.qubits != rho.qubits {
        return Err(Error::Dimension("qubit counts differ".into()));
    }
    let dim = rho.dim();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for k in 0..dim {
            total += target.amplitudes[i].conj() * rho.entry(i, k) * target.amplitudes[k];
        }
    }
    Ok(total.re)
}

/// Visibility whose white-noise GHZ state has fidelity `f` with the GHZ
/// state: inverse of `F = V + (1-V)/2^l`.
pub fn visibility_for_fidelity(qubits: usize, f: f64) -> f64 {
    let floor = 1.0 / (1u64 << qubits) as f64;
    (f - floor) / (1.0 - floor)
}

/// A resource that can be sampled without building a `4^l` density matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Resource {
    Pure(PureState),
    Mixed(MixedState),
    /// White-noise GHZ: mixture of the GHZ distribution and the uniform one.
    NoisyGhz { qubits: usize, visibility: f64 },
}

impl Resource {
    pub fn from_noise(qubits: usize, noise: NoiseSpec) -> Result<Self> {
        Ok(match noise {
            NoiseSpec::Ideal => Self::Pure(ghz_state(qubits)?),
            NoiseSpec::WhiteNoise { visibility } => {
                NoiseSpec::white_noise(visibility)?;
                check_qubits(qubits, MAX_STATE_QUBITS)?;
                Self::NoisyGhz { qubits, visibility }
            }
        })
    }
}

impl QuantumState for Resource {
    fn qubits(&self) -> usize {
        match self {
            Self::Pure(s) => s.qubits,
            Self::Mixed(s) => s.qubits,
            Self::NoisyGhz { qubits, .. } => *qubits,
        }
    }

    fn expectation_product(&self, angles: &[f64]) -> Result<f64> {
        match self {
            Self::Pure(s) => s.expectation_product(angles),
            Self::Mixed(s) => s.expectation_product(angles),
            Self::NoisyGhz { qubits, visibility } => {
                Ok(visibility * ghz_state(*qubits)?.expectation_product(angles)?)
            }
        }
    }

    fn outcome_distribution(&self, angles: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Pure(s) => s.outcome_distribution(angles),
            Self::Mixed(s) => s.outcome_distribution(angles),
            Self::NoisyGhz { qubits, visibility } => {
                let uniform = (1.0 - visibility) / (1u64 << qubits) as f64;
                Ok(ghz_state(*qubits)?
                    .outcome_distribution(angles)?
                    .into_iter()
                    .map(|p| visibility * p + uniform)
                    .collect())
            }
        }
    }
}

/// True when `θ` is within `tol` of `target` modulo `2π`.
pub fn angle_close(theta: f64, target: f64, tol: f64) -> bool {
    let d = normalize_angle(theta - target);
    d < tol || TAU - d < tol
}

/// Letter for axis angles: `X` at 0, `Y` at π/2, `-X` at π, `-Y` at 3π/2.
pub fn axis_letter(theta: f64) -> Option<&'static str> {
    const TOL: f64 = 1e-9;
    [(0.0, "X"), (FRAC_PI_2, "Y"), (PI, "-X"), (PI + FRAC_PI_2, "-Y")]
        .iter()
        .find(|(a, _)| angle_close(theta, *a, TOL))
        .map(|(_, l)| *l)
}
