//! JSON job configs, inequality rendering and bound reports on top of
//! `nmqc-core`.

pub mod config;
pub mod render;
pub mod report;

use nmqc_core::classical::classical_bound;
use nmqc_core::simkit::{merge_tallies, run_worker, RunConfig};
use serde_json::Value;

use config::{JobConfig, Task};
use report::{ClassicalReport, InequalityReport, QuantumReport, SimulationReport, TripartiteReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

/// Rendered output of one task.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub json: Value,
    pub converged: bool,
}

impl Output {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text.clone(),
            Format::Json => format!("{}\n", serde_json::to_string_pretty(&self.json).expect("valid JSON")),
        }
    }
}

/// Runs the simulation with one thread per worker.
pub fn simulate(job: &JobConfig) -> nmqc_core::Result<SimulationReport<'_>> {
    let c = classical_bound(&job.instance)?.bound;
    let mut cfg = RunConfig::new(&job.instance, &job.plan, job.noise, job.options.trials, job.options.seed);
    cfg.workers = job.options.workers;
    cfg.classical = Some(c.clone());
    let tallies = if cfg.workers <= 1 {
        vec![run_worker(&cfg, 0)?]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..cfg.workers)
                .map(|w| {
                    let cfg = &cfg;
                    scope.spawn(move || run_worker(cfg, w))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker thread panicked"))
                .collect::<nmqc_core::Result<Vec<_>>>()
        })?
    };
    let run = merge_tallies(&cfg, &tallies)?;
    Ok(SimulationReport::new(job, run, c))
}

pub fn run_task(job: &JobConfig, task: Task) -> nmqc_core::Result<Output> {
    let (text, json, converged) = match task {
        Task::ClassicalBound => {
            let r = ClassicalReport::compute(job)?;
            (r.text(), r.json(), true)
        }
        Task::QuantumBound => {
            let r = QuantumReport::compute(job)?;
            (r.text(), r.json(), r.converged())
        }
        Task::TripartiteBound => {
            let r = TripartiteReport::compute(job)?;
            (r.text(), r.json(), r.converged())
        }
        Task::Simulate => {
            let r = simulate(job)?;
            (r.text(), r.json(), true)
        }
        Task::Report => {
            let r = InequalityReport::compute(job)?;
            (r.text(), r.json(), r.converged())
        }
    };
    Ok(Output { text, json, converged })
}
