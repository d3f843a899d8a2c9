//! Monte Carlo simulation of the protocol and its error analysis.
//!
//! Each trial draws `x ~ p(x)`, forms `s = A x ⊕ b`, samples the outcome
//! string `m` from the Born distribution of the resource for the angles of
//! `s`, and checks whether `z = ⊕ m_j` equals `f(x)`.
//!
//! Random numbers come from ChaCha20 (`rand_chacha` 0.3) seeded with
//! `seed_from_u64(seed)`; worker `w` uses stream `w`. One worker is the
//! reproducibility reference.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson};

use crate::boolfn::lexicographic_indices;
use crate::error::{Error, Result};
use crate::protocol::ProtocolInstance;
use crate::quantum::{MeasurementPlan, NoiseSpec, QuantumState, Resource, MAX_STATE_QUBITS};
use crate::{to_f64, Rational};

pub const RNG_ALGORITHM: &str = "chacha20/rand_chacha-0.3";

#[derive(Debug, Clone)]
pub struct RunConfig<'a> {
    pub instance: &'a ProtocolInstance,
    pub plan: &'a MeasurementPlan,
    pub noise: NoiseSpec,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
    /// Bound to report the σ-violation against.
    pub classical: Option<Rational>,
}

impl<'a> RunConfig<'a> {
    pub fn new(instance: &'a ProtocolInstance, plan: &'a MeasurementPlan, noise: NoiseSpec, trials: u64, seed: u64) -> Self {
        Self {
            instance,
            plan,
            noise,
            trials,
            seed,
            workers: 1,
            classical: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let l = self.instance.parties();
        if self.plan.parties() != l {
            return Err(Error::Dimension(alloc::format!(
                "plan has {} parties, instance has {l}",
                self.plan.parties()
            )));
        }
        if l > MAX_STATE_QUBITS {
            return Err(Error::Cap {
                what: "party",
                found: l,
                cap: MAX_STATE_QUBITS,
            });
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidArgument("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// Parity tallies for one setting group.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingCounts {
    pub setting: u32,
    pub coefficient: f64,
    pub even: u64,
    pub odd: u64,
}

impl SettingCounts {
    pub fn total(&self) -> u64 {
        self.even + self.odd
    }

    /// Empirical correlator `(n_even - n_odd) / n`.
    pub fn correlator(&self) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| (self.even as f64 - self.odd as f64) / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    /// Standard error of `p_hat`.
    pub se: f64,
    pub beta_hat: f64,
    pub se_beta: f64,
    pub sigma_vs_classical: Option<f64>,
    pub per_setting: Vec<SettingCounts>,
    pub workers: usize,
    pub rng: &'static str,
}

/// Draws inputs by inverse CDF in lexicographic order.
enum InputSampler {
    /// Integer numerators over a common denominator; exact.
    Exact { cumulative: Vec<(u64, usize)>, denominator: u64 },
    Float { cumulative: Vec<(f64, usize)> },
}

impl InputSampler {
    fn new(inst: &ProtocolInstance) -> Self {
        let n = inst.arity();
        let weights = inst.distribution().weights();
        let denominator = weights
            .iter()
            .fold(BigInt::one(), |d, w| d.lcm(w.denom()));
        if let Some(den) = denominator.to_u64() {
            let mut acc = 0u64;
            let cumulative = lexicographic_indices(n)
                .filter_map(|idx| {
                    let w = &weights[idx];
                    let num = (w.numer() * (&denominator / w.denom())).to_u64()?;
                    (num > 0).then(|| {
                        acc += num;
                        (acc, idx)
                    })
                })
                .collect();
            return Self::Exact {
                cumulative,
                denominator: den,
            };
        }
        let mut acc = 0.0;
        let cumulative = lexicographic_indices(n)
            .filter(|&idx| to_f64(&weights[idx]) > 0.0)
            .map(|idx| {
                acc += to_f64(&weights[idx]);
                (acc, idx)
            })
            .collect();
        Self::Float { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha20Rng) -> usize {
        match self {
            Self::Exact {
                cumulative,
                denominator,
            } => {
                let draw = rng.gen_range(0..*denominator);
                let pos = cumulative.partition_point(|&(c, _)| c <= draw);
                cumulative[pos].1
            }
            Self::Float { cumulative } => {
                let draw = rng.gen::<f64>() * cumulative.last().map_or(1.0, |c| c.0);
                let pos = cumulative.partition_point(|&(c, _)| c <= draw);
                cumulative[pos.min(cumulative.len() - 1)].1
            }
        }
    }
}

/// Exact inverse-CDF sampler over outcome strings `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSampler {
    cumulative: Vec<f64>,
}

impl OutcomeSampler {
    pub fn new<S: QuantumState>(state: &S, angles: &[f64]) -> Result<Self> {
        Ok(Self::from_probabilities(&state.outcome_distribution(angles)?))
    }

    pub fn from_probabilities(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        Self {
            cumulative: probs
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect(),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let c = &self.cumulative;
        let u = rng.gen::<f64>() * c[c.len() - 1];
        c.partition_point(|&x| x <= u).min(c.len() - 1)
    }
}

/// Everything a worker needs, computed once per run.
struct Prepared {
    sampler: InputSampler,
    /// Per input: (group index, f(x)).
    inputs: Vec<(usize, bool)>,
    /// Per group: Born-rule sampler for the group's setting.
    outcomes: Vec<OutcomeSampler>,
    groups: Vec<SettingCounts>,
}

impl Prepared {
    fn new(cfg: &RunConfig<'_>) -> Result<Self> {
        let inst = cfg.instance;
        let resource = Resource::from_noise(inst.parties(), cfg.noise)?;
        let groups = inst.settings_groups();
        let mut inputs = alloc::vec![(0usize, false); 1 << inst.arity()];
        let mut outcomes = Vec::with_capacity(groups.len());
        for (gi, g) in groups.iter().enumerate() {
            for &idx in &g.inputs {
                inputs[idx] = (gi, inst.function().at(idx));
            }
            outcomes.push(OutcomeSampler::new(&resource, &cfg.plan.angles_for(g.setting))?);
        }
        Ok(Self {
            sampler: InputSampler::new(inst),
            inputs,
            outcomes,
            groups: groups
                .iter()
                .map(|g| SettingCounts {
                    setting: g.setting,
                    coefficient: to_f64(&g.coefficient),
                    even: 0,
                    odd: 0,
                })
                .collect(),
        })
    }
}

/// Raw tallies from one worker's share of the trials.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerTally {
    pub trials: u64,
    pub successes: u64,
    pub per_setting: Vec<SettingCounts>,
}

fn worker_trials(total: u64, workers: usize, worker: usize) -> u64 {
    let w = workers as u64;
    total / w + u64::from((worker as u64) < total % w)
}

fn run_prepared(prep: &Prepared, cfg: &RunConfig<'_>, worker: usize) -> WorkerTally {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(worker as u64);
    let trials = worker_trials(cfg.trials, cfg.workers, worker);
    let mut per_setting = prep.groups.clone();
    let mut successes = 0;
    for _ in 0..trials {
        let x = prep.sampler.sample(&mut rng);
        let (gi, fx) = prep.inputs[x];
        let m = prep.outcomes[gi].sample(&mut rng);
        let z = m.count_ones() & 1 == 1;
        if z {
            per_setting[gi].odd += 1;
        } else {
            per_setting[gi].even += 1;
        }
        if z == fx {
            successes += 1;
        }
    }
    WorkerTally {
        trials,
        successes,
        per_setting,
    }
}

/// Runs one worker's share; merging all shares with [`merge_tallies`]
/// reproduces [`run_protocol`].
pub fn run_worker(cfg: &RunConfig<'_>, worker: usize) -> Result<WorkerTally> {
    cfg.validate()?;
    if worker >= cfg.workers {
        return Err(Error::InvalidArgument(alloc::format!(
            "worker {worker} outside 0..{}",
            cfg.workers
        )));
    }
    Ok(run_prepared(&Prepared::new(cfg)?, cfg, worker))
}

pub fn run_protocol(cfg: &RunConfig<'_>) -> Result<RunReport> {
    cfg.validate()?;
    let prep = Prepared::new(cfg)?;
    let tallies: Vec<WorkerTally> = (0..cfg.workers).map(|w| run_prepared(&prep, cfg, w)).collect();
    merge_tallies(cfg, &tallies)
}

/// Wilson score half-width at one standard deviation.
fn wilson_half_width(p: f64, n: f64) -> f64 {
    let z2 = 1.0;
    (1.0 / (1.0 + z2 / n)) * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
}

pub fn merge_tallies(cfg: &RunConfig<'_>, tallies: &[WorkerTally]) -> Result<RunReport> {
    let first = tallies
        .first()
        .ok_or_else(|| Error::InvalidArgument("no worker tallies".into()))?;
    let mut per_setting: Vec<SettingCounts> = first
        .per_setting
        .iter()
        .map(|c| SettingCounts {
            even: 0,
            odd: 0,
            ..c.clone()
        })
        .collect();
    let (mut trials, mut successes) = (0, 0);
    for t in tallies {
        trials += t.trials;
        successes += t.successes;
        for (acc, c) in per_setting.iter_mut().zip(&t.per_setting) {
            acc.even += c.even;
            acc.odd += c.odd;
        }
    }
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let se = if successes == 0 || successes == trials {
        wilson_half_width(p_hat, n)
    } else {
        libm::sqrt(p_hat * (1.0 - p_hat) / n)
    };
    let beta_hat = 2.0 * p_hat - 1.0;
    let se_beta = 2.0 * se;
    let sigma_vs_classical = cfg
        .classical
        .as_ref()
        .map(|c| sigma_violation(beta_hat, se_beta, c))
        .transpose()?;
    Ok(RunReport {
        trials,
        successes,
        p_hat,
        se,
        beta_hat,
        se_beta,
        sigma_vs_classical,
        per_setting,
        workers: cfg.workers,
        rng: RNG_ALGORITHM,
    })
}

/// `(β̂ - c) / se`; positive values are violations of the classical bound.
pub fn sigma_violation(beta_hat: f64, se_beta: f64, c: &Rational) -> Result<f64> {
    if se_beta.is_nan() || se_beta <= 0.0 {
        return Err(Error::NonPositiveStdErr(se_beta));
    }
    Ok((beta_hat - to_f64(c)) / se_beta)
}

/// `Σ_s c(s) E(s)` from per-setting tallies.
pub fn beta_from_counts(counts: &[SettingCounts]) -> f64 {
    counts
        .iter()
        .map(|c| c.coefficient * c.correlator().unwrap_or(0.0))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResampleSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub resamples: usize,
}

pub const DEFAULT_RESAMPLES: usize = 100;

/// Poisson bootstrap: every count `n` is replaced by a Poisson(`n`) draw,
/// `β` is recomputed from the resampled correlators, and the sample mean and
/// standard deviation over resamples are returned.
pub fn poisson_resample(counts: &[SettingCounts], resamples: usize, seed: u64) -> Result<ResampleSummary> {
    if resamples < 2 {
        return Err(Error::InvalidArgument("resamples must be at least 2".into()));
    }
    if let Some(c) = counts.iter().find(|c| c.total() == 0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "setting {:#b} has no counts",
            c.setting
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut draw = |n: u64| -> u64 {
        if n == 0 {
            return 0;
        }
        let poisson = Poisson::new(n as f64).expect("positive rate");
        poisson.sample(&mut rng) as u64
    };
    let betas: Vec<f64> = (0..resamples)
        .map(|_| {
            let resampled: Vec<SettingCounts> = counts
                .iter()
                .map(|c| SettingCounts {
                    even: draw(c.even),
                    odd: draw(c.odd),
                    ..c.clone()
                })
                .collect();
            beta_from_counts(&resampled)
        })
        .collect();
    let n = betas.len() as f64;
    let mean = betas.iter().sum::<f64>() / n;
    let var = betas.iter().map(|b| (b - mean) * (b - mean)).sum::<f64>() / (n - 1.0);
    Ok(ResampleSummary {
        mean,
        std_dev: libm::sqrt(var),
        resamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{paper_instance, ratio};

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_violation(0.5, 0.1, &ratio(1, 2)).unwrap(), 0.0);
        assert!((sigma_violation(0.9, 0.025, &ratio(1, 2)).unwrap() - 16.0).abs() < 1e-12);
        assert!(sigma_violation(0.4, 0.05, &ratio(1, 2)).unwrap() < 0.0);
        assert!(matches!(
            sigma_violation(0.9, 0.0, &ratio(1, 2)),
            Err(Error::NonPositiveStdErr(_))
        ));
    }

    #[test]
    fn deterministic_h3_run() {
        let inst = paper_instance("h3").unwrap();
        let plan = MeasurementPlan::xy(4);
        let report = run_protocol(&RunConfig::new(&inst, &plan, NoiseSpec::Ideal, 10_000, 1)).unwrap();
        assert_eq!(report.p_hat, 1.0);
        assert!(report.se > 0.0);
        assert!((report.se - 1.0 / (1.0 + 1e-4) / 2e4).abs() < 1e-15);
    }

    #[test]
    fn workers_cover_all_trials() {
        assert_eq!((0..3).map(|w| worker_trials(10, 3, w)).sum::<u64>(), 10);
        assert_eq!(worker_trials(10, 3, 0), 4);
    }

    #[test]
    fn config_validation() {
        let inst = paper_instance("h3").unwrap();
        let plan = MeasurementPlan::xy(3);
        assert!(run_protocol(&RunConfig::new(&inst, &plan, NoiseSpec::Ideal, 10, 0)).is_err());
        let plan = MeasurementPlan::xy(4);
        assert!(run_protocol(&RunConfig::new(&inst, &plan, NoiseSpec::Ideal, 0, 0)).is_err());
    }

    #[test]
    fn resample_rejects_empty_groups() {
        let counts = [SettingCounts {
            setting: 0,
            coefficient: 1.0,
            even: 0,
            odd: 0,
        }];
        assert!(poisson_resample(&counts, 100, 0).is_err());
        let counts = [SettingCounts {
            setting: 0,
            coefficient: 1.0,
            even: 5,
            odd: 0,
        }];
        assert!(poisson_resample(&counts, 1, 0).is_err());
    }
}
