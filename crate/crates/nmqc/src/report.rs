//! Task results and their text and JSON renderings.

use nmqc_core::boolfn::bit_string;
use nmqc_core::classical::{classical_bound, ClassicalResult};
use nmqc_core::optimize::{optimize_angles, restricted_bound_with_local, OptimizationResult, RestrictedResult};
use nmqc_core::protocol::{success_probability, success_probability_exact};
use nmqc_core::quantum::{beta_quantum, critical_visibility, MeasurementPlan};
use nmqc_core::simkit::{poisson_resample, ResampleSummary, RunReport};
use nmqc_core::{to_f64, Error, Rational};
use serde_json::{json, Value};

use crate::config::JobConfig;
use crate::render::{format_fraction, render_inequality, three_decimals, BoundFormatter};

pub const SCHEMA: u32 = 1;

fn rule_json(offset: bool, slope: bool) -> Value {
    json!({ "offset": u8::from(offset), "slope": u8::from(slope) })
}

fn plan_json(plan: &MeasurementPlan) -> Value {
    json!(plan.angles())
}

/// Success probability clamped into the domain rounding can leave.
fn p_success(beta: f64) -> f64 {
    success_probability(beta.clamp(-1.0, 1.0)).expect("clamped")
}

pub struct ClassicalReport<'a> {
    pub job: &'a JobConfig,
    pub result: ClassicalResult,
}

impl<'a> ClassicalReport<'a> {
    pub fn compute(job: &'a JobConfig) -> nmqc_core::Result<Self> {
        Ok(Self {
            job,
            result: classical_bound(&job.instance)?,
        })
    }

    pub fn json(&self) -> Value {
        let r = &self.result;
        let l = self.job.instance.parties();
        json!({
            "schema": SCHEMA,
            "task": "classical-bound",
            "instance": self.job.name,
            "bound": r.bound.to_string(),
            "value": to_f64(&r.bound),
            "success_probability": to_f64(&success_probability_exact(&r.bound)),
            "success_exact": success_probability_exact(&r.bound).to_string(),
            "classes": r.classes.iter().map(|c| json!({
                "flip": u8::from(c.flip),
                "slopes": bit_string(c.slopes as usize, l),
            })).collect::<Vec<_>>(),
            "witness": r.witnesses[0].rules().iter().map(|x| rule_json(x.offset, x.slope)).collect::<Vec<_>>(),
            "induced": r.induced.to_string(),
        })
    }

    pub fn text(&self) -> String {
        let r = &self.result;
        let p = success_probability_exact(&r.bound);
        let rules: Vec<String> = r.witnesses[0]
            .rules()
            .iter()
            .map(|x| format!("({},{})", u8::from(x.offset), u8::from(x.slope)))
            .collect();
        format!(
            "{}: classical bound c = {} ({:.6})\n\
             success probability {} ({})\n\
             optimal classes: {}\n\
             witness rules (t_j, r_j): {}\n\
             computes g(x) = {}\n",
            self.job.name,
            format_fraction(&r.bound),
            to_f64(&r.bound),
            three_decimals(to_f64(&p)),
            format_fraction(&p),
            r.classes.len(),
            rules.join(" "),
            r.induced
        )
    }
}

pub struct QuantumReport<'a> {
    pub job: &'a JobConfig,
    pub result: OptimizationResult,
    /// Value of the configured plan on the configured resource.
    pub plan_value: f64,
}

impl<'a> QuantumReport<'a> {
    pub fn compute(job: &'a JobConfig) -> nmqc_core::Result<Self> {
        Ok(Self {
            job,
            result: optimize_angles(&job.instance, &job.options.optimize())?,
            plan_value: beta_quantum(&job.instance, &job.plan, job.noise)?,
        })
    }

    pub fn converged(&self) -> bool {
        self.result.converged
    }

    fn formatter(&self) -> BoundFormatter {
        BoundFormatter::new(&self.job.instance, &self.job.plan)
    }

    pub fn json(&self) -> Value {
        let r = &self.result;
        json!({
            "schema": SCHEMA,
            "task": "quantum-bound",
            "instance": self.job.name,
            "value": r.value,
            "exact": self.formatter().snap(r.value).map(|q| q.to_string()),
            "success_probability": p_success(r.value),
            "converged": r.converged,
            "gradient_norm": r.gradient_norm,
            "starts_used": r.starts_used,
            "seed": self.job.options.seed,
            "plan": plan_json(&r.plan),
            "configured_plan_value": self.plan_value,
            "visibility": self.job.noise.visibility(),
        })
    }

    pub fn text(&self) -> String {
        let r = &self.result;
        let fmt = self.formatter();
        let mut out = format!(
            "{}: quantum bound q = {} ({:.8})\n\
             success probability {}\n\
             {} ({} starts, gradient norm {:.2e})\n",
            self.job.name,
            fmt.approx(r.value),
            r.value,
            three_decimals(p_success(r.value)),
            if r.converged { "converged" } else { "NOT converged" },
            r.starts_used,
            r.gradient_norm
        );
        for (j, [a, b]) in r.plan.angles().iter().enumerate() {
            out.push_str(&format!("  party {}: theta0 = {a:.6}, theta1 = {b:.6}\n", j + 1));
        }
        out.push_str(&format!(
            "configured plan reaches {:.8} (visibility {})\n",
            self.plan_value,
            self.job.noise.visibility()
        ));
        out
    }
}

pub struct TripartiteReport<'a> {
    pub job: &'a JobConfig,
    pub result: RestrictedResult,
}

impl<'a> TripartiteReport<'a> {
    pub fn compute(job: &'a JobConfig) -> nmqc_core::Result<Self> {
        let local = job.options.local_party.unwrap_or(job.instance.parties());
        Ok(Self {
            job,
            result: restricted_bound_with_local(&job.instance, &job.options.optimize(), local)?,
        })
    }

    pub fn converged(&self) -> bool {
        self.result.converged()
    }

    pub fn json(&self) -> Value {
        let r = &self.result;
        json!({
            "schema": SCHEMA,
            "task": "tripartite-bound",
            "instance": self.job.name,
            "bound": r.bound,
            "local_party": r.local_party,
            "success_probability": p_success(r.bound),
            "overall_max": r.overall_max,
            "converged": r.converged(),
            "per_party": r.per_party.iter().map(|p| json!({
                "party": p.party,
                "value": p.value,
                "rule": rule_json(p.rule.offset, p.rule.slope),
                "converged": p.converged,
                "plan": p.plan.as_ref().map(plan_json),
            })).collect::<Vec<_>>(),
        })
    }

    pub fn text(&self) -> String {
        let r = &self.result;
        let mut out = format!(
            "{}: tripartite bound {:.5} with party {} local (success probability {})\n",
            self.job.name,
            r.bound,
            r.local_party,
            three_decimals(p_success(r.bound))
        );
        for p in &r.per_party {
            out.push_str(&format!(
                "  party {} local: {:.5}  rule (t, r) = ({}, {}){}\n",
                p.party,
                p.value,
                u8::from(p.rule.offset),
                u8::from(p.rule.slope),
                if p.converged { "" } else { "  NOT converged" }
            ));
        }
        out.push_str(&format!("maximum over local parties: {:.5}\n", r.overall_max));
        out
    }
}

/// `(label, β, exact β, success probability, exact probability)`.
type TableRow = (&'static str, f64, Option<Rational>, f64, Option<Rational>);

/// Bounds, success probabilities and noise threshold of one instance.
pub struct InequalityReport<'a> {
    pub job: &'a JobConfig,
    pub inequality: String,
    pub classical: ClassicalReport<'a>,
    pub quantum: QuantumReport<'a>,
    pub tripartite: TripartiteReport<'a>,
    pub critical_visibility: Option<f64>,
}

impl<'a> InequalityReport<'a> {
    pub fn compute(job: &'a JobConfig) -> nmqc_core::Result<Self> {
        let classical = ClassicalReport::compute(job)?;
        let quantum = QuantumReport::compute(job)?;
        let critical_visibility =
            match critical_visibility(&job.instance, &quantum.result.plan, &classical.result.bound) {
                Ok(v) => Some(v),
                Err(Error::NoViolation { .. }) => None,
                Err(e) => return Err(e),
            };
        Ok(Self {
            job,
            inequality: render_inequality(&job.instance, &job.plan)?,
            classical,
            tripartite: TripartiteReport::compute(job)?,
            quantum,
            critical_visibility,
        })
    }

    pub fn converged(&self) -> bool {
        self.quantum.converged() && self.tripartite.converged()
    }

    fn quantum_exact(&self) -> Option<Rational> {
        self.quantum.formatter().snap(self.quantum.result.value)
    }

    fn critical_exact(&self) -> Option<Rational> {
        let q = self.quantum_exact()?;
        self.critical_visibility.map(|_| &self.classical.result.bound / q)
    }

    fn rows(&self) -> Vec<TableRow> {
        let c = &self.classical.result.bound;
        let q = self.quantum.result.value;
        let qx = self.quantum_exact();
        let t = self.tripartite.result.bound;
        vec![
            ("classical", to_f64(c), Some(c.clone()), p_success(to_f64(c)), Some(success_probability_exact(c))),
            ("quantum", q, qx.clone(), p_success(q), qx.as_ref().map(success_probability_exact)),
            ("tripartite", t, None, p_success(t), None),
        ]
    }

    pub fn json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows()
            .into_iter()
            .map(|(label, beta, exact, p, p_exact)| {
                json!({
                    "bound": label,
                    "beta": beta,
                    "beta_exact": exact.map(|r| r.to_string()),
                    "success_probability": p,
                    "success_rounded": three_decimals(p),
                    "success_exact": p_exact.map(|r| r.to_string()),
                })
            })
            .collect();
        json!({
            "schema": SCHEMA,
            "task": "report",
            "instance": self.job.name,
            "inequality": self.inequality,
            "table": rows,
            "classical": self.classical.json(),
            "quantum": self.quantum.json(),
            "tripartite": self.tripartite.json(),
            "critical_visibility": self.critical_visibility,
            "critical_visibility_exact": self.critical_exact().map(|r| r.to_string()),
            "converged": self.converged(),
        })
    }

    pub fn text(&self) -> String {
        let fmt = self.quantum.formatter();
        let mut out = format!("{}\n  {}\n\n", self.job.name, self.inequality);
        out.push_str(&format!("  {:<12} {:>10}   p(success)\n", "bound", "beta"));
        for (label, beta, exact, p, p_exact) in self.rows() {
            let beta = match &exact {
                Some(r) => fmt.exact(r),
                None => format!("{beta:.5}"),
            };
            let p = match p_exact {
                Some(r) => format!("{} ({})", three_decimals(p), format_fraction(&r)),
                None => three_decimals(p),
            };
            out.push_str(&format!("  {label:<12} {beta:>10}   {p}\n"));
        }
        match (self.critical_visibility, self.critical_exact()) {
            (Some(v), Some(r)) => out.push_str(&format!("  critical visibility {v:.4} ({})\n", format_fraction(&r))),
            (Some(v), None) => out.push_str(&format!("  critical visibility {v:.4}\n")),
            (None, _) => out.push_str("  no quantum violation; critical visibility undefined\n"),
        }
        if !self.converged() {
            out.push_str("  warning: optimizer did not converge\n");
        }
        out
    }
}

pub struct SimulationReport<'a> {
    pub job: &'a JobConfig,
    pub run: RunReport,
    pub classical: Rational,
    pub resample: Option<ResampleSummary>,
}

impl<'a> SimulationReport<'a> {
    pub fn new(job: &'a JobConfig, run: RunReport, classical: Rational) -> Self {
        let resample = poisson_resample(&run.per_setting, job.options.resamples, job.options.seed).ok();
        Self {
            job,
            run,
            classical,
            resample,
        }
    }

    pub fn json(&self) -> Value {
        let r = &self.run;
        let l = self.job.instance.parties();
        let per_setting: serde_json::Map<String, Value> = r
            .per_setting
            .iter()
            .map(|s| {
                (
                    bit_string(s.setting as usize, l),
                    json!({
                        "counts": { "even": s.even, "odd": s.odd },
                        "E": s.correlator(),
                        "coefficient": s.coefficient,
                    }),
                )
            })
            .collect();
        json!({
            "schema": SCHEMA,
            "task": "simulate",
            "instance": self.job.name,
            "trials": r.trials,
            "seed": self.job.options.seed,
            "visibility": self.job.noise.visibility(),
            "p_hat": r.p_hat,
            "se": r.se,
            "beta_hat": r.beta_hat,
            "se_beta": r.se_beta,
            "classical": self.classical.to_string(),
            "sigma_vs_classical": r.sigma_vs_classical,
            "per_setting": per_setting,
            "resample": self.resample.map(|s| json!({
                "mean": s.mean,
                "std_dev": s.std_dev,
                "resamples": s.resamples,
            })),
            "workers": r.workers,
            "rng": r.rng,
        })
    }

    pub fn text(&self) -> String {
        let r = &self.run;
        let l = self.job.instance.parties();
        let mut out = format!(
            "{}: {} trials, seed {}, {} worker(s), visibility {}\n\
             p_hat = {:.5} ± {:.5}\n\
             beta_hat = {:.5} ± {:.5}\n",
            self.job.name,
            r.trials,
            self.job.options.seed,
            r.workers,
            self.job.noise.visibility(),
            r.p_hat,
            r.se,
            r.beta_hat,
            r.se_beta
        );
        if let Some(sigma) = r.sigma_vs_classical {
            out.push_str(&format!(
                "violation of c = {}: {sigma:.2} sigma\n",
                format_fraction(&self.classical)
            ));
        }
        if let Some(s) = self.resample {
            out.push_str(&format!(
                "Poisson resampling ({}): beta = {:.5} ± {:.5}\n",
                s.resamples, s.mean, s.std_dev
            ));
        }
        out.push_str("  setting  even      odd       E\n");
        for s in &r.per_setting {
            out.push_str(&format!(
                "  {:<8} {:<9} {:<9} {}\n",
                bit_string(s.setting as usize, l),
                s.even,
                s.odd,
                s.correlator().map_or("-".to_string(), |e| format!("{e:+.4}"))
            ));
        }
        out
    }
}
