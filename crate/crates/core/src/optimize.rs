//! Multi-start gradient ascent over planar measurement angles.
//!
//! On a GHZ resource the Bell functional is the trigonometric polynomial
//! `Σ_s c(s) cos(Σ_j θ_j^(s_j))` in `2l` angles. [`optimize_angles`] gives
//! the quantum bound; [`restricted_bound`] fixes one party to a deterministic
//! answer and optimizes the rest.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::classical::{classical_bound, Rule};
use crate::error::{Error, Result};
use crate::protocol::ProtocolInstance;
use crate::quantum::{beta_quantum, MeasurementPlan, NoiseSpec};
use crate::to_f64;

/// Sum of weighted cosines over packed settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigObjective {
    parties: usize,
    terms: Vec<(u32, f64)>,
}

impl TrigObjective {
    pub fn new(parties: usize, terms: Vec<(u32, f64)>) -> Self {
        Self { parties, terms }
    }

    pub fn for_instance(inst: &ProtocolInstance) -> Self {
        let terms = inst
            .settings_groups()
            .iter()
            .map(|g| (g.setting, to_f64(&g.coefficient)))
            .collect();
        Self::new(inst.parties(), terms)
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn dimension(&self) -> usize {
        2 * self.parties
    }

    fn phase(&self, setting: u32, angles: &[f64]) -> f64 {
        (0..self.parties)
            .map(|j| angles[2 * j + (setting >> j & 1) as usize])
            .sum()
    }

    pub fn value(&self, angles: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(s, c)| c * libm::cos(self.phase(s, angles)))
            .sum()
    }

    /// Value and gradient; `∂/∂θ_j^(b) = -Σ_{s_j = b} c(s) sin(phase(s))`.
    pub fn value_and_gradient(&self, angles: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = alloc::vec![0.0; self.dimension()];
        let mut value = 0.0;
        for &(s, c) in &self.terms {
            let phase = self.phase(s, angles);
            value += c * libm::cos(phase);
            let slope = -c * libm::sin(phase);
            for j in 0..self.parties {
                grad[2 * j + (s >> j & 1) as usize] += slope;
            }
        }
        (value, grad)
    }
}

/// Value and gradient of the instance's functional at a flat angle vector.
pub fn objective(inst: &ProtocolInstance, angles: &[f64]) -> Result<(f64, Vec<f64>)> {
    let obj = TrigObjective::for_instance(inst);
    if angles.len() != obj.dimension() {
        return Err(Error::Dimension(alloc::format!(
            "{} angles for {} parties",
            angles.len(),
            obj.parties()
        )));
    }
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFiniteAngle);
    }
    Ok(obj.value_and_gradient(angles))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    /// Number of random starts, in addition to the deterministic ones.
    pub starts: usize,
    pub seed: u64,
    /// Gradient-norm threshold for convergence.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 0,
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

impl OptimizeOptions {
    fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidArgument("starts must be at least 1".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ascent {
    pub angles: Vec<f64>,
    pub value: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gradient ascent with Barzilai–Borwein trial steps and Armijo backtracking.
pub fn ascend(obj: &TrigObjective, start: &[f64], tolerance: f64, max_iterations: usize) -> Ascent {
    const ARMIJO: f64 = 1e-4;
    let mut x = start.to_vec();
    let (mut value, mut grad) = obj.value_and_gradient(&x);
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;
    while iterations < max_iterations {
        let gn = norm(&grad);
        if gn < tolerance {
            break;
        }
        let mut step = match &previous {
            Some((s, pg)) => {
                let y: Vec<f64> = grad.iter().zip(pg).map(|(a, b)| a - b).collect();
                let sy = dot(s, &y).abs();
                if sy > 0.0 {
                    (dot(s, s) / sy).clamp(1e-6, 1e6)
                } else {
                    1.0
                }
            }
            None => 1.0,
        };
        // below this predicted gain the Armijo test is lost in rounding
        let noise = 8.0 * f64::EPSILON * value.abs().max(1.0);
        let mut accepted = None;
        while step > 1e-16 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            let (tv, tg) = obj.value_and_gradient(&trial);
            let gain = ARMIJO * step * gn * gn;
            if tv >= value + gain || (gain < noise && tv >= value - noise) {
                accepted = Some((trial, tv, tg));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        let Some((trial, tv, tg)) = accepted else {
            break;
        };
        let taken: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        x = trial.into_iter().map(|t| t - TAU * libm::floor(t / TAU)).collect();
        previous = Some((taken, core::mem::replace(&mut grad, tg)));
        value = tv;
    }
    let gradient_norm = norm(&grad);
    Ascent {
        angles: x,
        value,
        gradient_norm,
        iterations,
        converged: gradient_norm < tolerance,
    }
}

/// Runs [`ascend`] from every start and keeps the best value; the lowest
/// start index wins ties.
fn best_of(obj: &TrigObjective, starts: &[Vec<f64>], opts: &OptimizeOptions) -> Ascent {
    let mut best: Option<Ascent> = None;
    for start in starts {
        let run = ascend(obj, start, opts.tolerance, opts.max_iterations);
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    best.expect("at least one start")
}

fn xy_start(parties: usize) -> Vec<f64> {
    (0..parties).flat_map(|_| [0.0, FRAC_PI_2]).collect()
}

fn random_starts(rng: &mut ChaCha20Rng, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>() * TAU).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub value: f64,
    pub plan: MeasurementPlan,
    pub starts_used: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

/// Quantum bound over GHZ states with planar observables.
///
/// Start 0 is the X/Y plan, start 1 embeds the best classical strategy as
/// angles in `{0, π}`, and the remaining `opts.starts` are uniform in
/// `[0, 2π)^(2l)` from a ChaCha20 stream seeded with `opts.seed`.
pub fn optimize_angles(inst: &ProtocolInstance, opts: &OptimizeOptions) -> Result<OptimizationResult> {
    opts.validate()?;
    let obj = TrigObjective::for_instance(inst);
    let l = inst.parties();
    let mut starts = alloc::vec![xy_start(l)];
    let classical = classical_bound(inst)?;
    let witness = &classical.witnesses[0];
    starts.push(
        witness
            .rules()
            .iter()
            .flat_map(|r| [false, true].map(|s| if r.answer(s) { PI } else { 0.0 }))
            .collect(),
    );
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    starts.extend(random_starts(&mut rng, opts.starts, obj.dimension()));
    let best = best_of(&obj, &starts, opts);
    let plan = MeasurementPlan::from_flat(&best.angles)?;
    Ok(OptimizationResult {
        value: beta_quantum(inst, &plan, NoiseSpec::Ideal)?,
        plan,
        starts_used: starts.len(),
        converged: best.converged,
        gradient_norm: best.gradient_norm,
    })
}

/// Best value when party `party` (1-based) answers deterministically.
#[derive(Debug, Clone, PartialEq)]
pub struct PartyBound {
    pub party: usize,
    pub value: f64,
    pub rule: Rule,
    /// Angles for the remaining parties in their original order.
    pub plan: Option<MeasurementPlan>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedResult {
    pub per_party: Vec<PartyBound>,
    /// Maximum over every choice of local party.
    pub overall_max: f64,
    /// The designated local party (1-based).
    pub local_party: usize,
    /// Value with the designated party local.
    pub bound: f64,
}

impl RestrictedResult {
    pub fn converged(&self) -> bool {
        self.per_party.iter().all(|p| p.converged)
    }
}

/// Drops bit `k` from a packed setting.
fn remove_bit(setting: u32, k: usize) -> u32 {
    let low = setting & ((1 << k) - 1);
    let high = (setting >> (k + 1)) << k;
    low | high
}

/// Objective left after party `k` (0-based) answers `t ⊕ r s_k`.
pub fn reduced_objective(inst: &ProtocolInstance, k: usize, rule: Rule) -> TrigObjective {
    let mut terms: Vec<(u32, f64)> = Vec::new();
    for g in inst.settings_groups() {
        let flip = rule.answer(g.setting >> k & 1 == 1);
        let c = to_f64(&g.coefficient) * if flip { -1.0 } else { 1.0 };
        let s = remove_bit(g.setting, k);
        match terms.iter_mut().find(|(t, _)| *t == s) {
            Some(term) => term.1 += c,
            None => terms.push((s, c)),
        }
    }
    TrigObjective::new(inst.parties() - 1, terms)
}

/// Restricted bound with the last party as the designated local one.
pub fn restricted_bound(inst: &ProtocolInstance, opts: &OptimizeOptions) -> Result<RestrictedResult> {
    restricted_bound_with_local(inst, opts, inst.parties())
}

/// For each party `k` and each rule `(t_k, r_k)`, optimizes the remaining
/// `l-1` parties; `local_party` (1-based) selects the reported `bound`.
pub fn restricted_bound_with_local(
    inst: &ProtocolInstance,
    opts: &OptimizeOptions,
    local_party: usize,
) -> Result<RestrictedResult> {
    opts.validate()?;
    let l = inst.parties();
    if l < 2 {
        return Err(Error::InvalidArgument("restricted bound needs at least two parties".into()));
    }
    if local_party == 0 || local_party > l {
        return Err(Error::InvalidArgument(alloc::format!(
            "local party {local_party} outside 1..={l}"
        )));
    }
    let mut per_party = Vec::with_capacity(l);
    for k in 0..l {
        let mut best: Option<PartyBound> = None;
        for (combo, (offset, slope)) in [(false, false), (false, true), (true, false), (true, true)]
            .into_iter()
            .enumerate()
        {
            let rule = Rule { offset, slope };
            let obj = reduced_objective(inst, k, rule);
            let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
            rng.set_stream((4 * k + combo) as u64);
            let mut starts = alloc::vec![xy_start(l - 1)];
            starts.extend(random_starts(&mut rng, opts.starts, obj.dimension()));
            let run = best_of(&obj, &starts, opts);
            let candidate = PartyBound {
                party: k + 1,
                value: obj.value(&run.angles),
                rule,
                plan: Some(MeasurementPlan::from_flat(&run.angles)?),
                converged: run.converged,
            };
            if best.as_ref().is_none_or(|b| candidate.value > b.value) {
                best = Some(candidate);
            }
        }
        per_party.push(best.expect("four rules"));
    }
    let overall_max = per_party
        .iter()
        .map(|p| p.value)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RestrictedResult {
        bound: per_party[local_party - 1].value,
        per_party,
        overall_max,
        local_party,
    })
}
