//! JSON job configurations.
//!
//! A job names an instance (function, input distribution, pre-processing
//! matrix and optional offset), a resource, a measurement plan, and
//! optionally a task and its options. Every rational is read exactly from a
//! string such as `"3/10"` or `"0.3"`, or from a JSON integer.

use std::path::Path;

use nmqc_core::boolfn::{parse_bit_string, AnfPolynomial, BooleanFunction};
use nmqc_core::optimize::OptimizeOptions;
use nmqc_core::protocol::{InputDistribution, PreprocessMatrix, ProtocolInstance};
use nmqc_core::quantum::{visibility_for_fidelity, MeasurementPlan, NoiseSpec};
use nmqc_core::Rational;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("JSON parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Field { field: String, message: String },
    #[error("unknown bundled instance {0:?}")]
    UnknownBundled(String),
}

type Result<T> = std::result::Result<T, ConfigError>;

fn field_err(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    ClassicalBound,
    QuantumBound,
    TripartiteBound,
    Simulate,
    Report,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::ClassicalBound => "classical-bound",
            Task::QuantumBound => "quantum-bound",
            Task::TripartiteBound => "tripartite-bound",
            Task::Simulate => "simulate",
            Task::Report => "report",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Task::ClassicalBound,
            Task::QuantumBound,
            Task::TripartiteBound,
            Task::Simulate,
            Task::Report,
        ]
        .into_iter()
        .find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobOptions {
    pub starts: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub trials: u64,
    pub workers: usize,
    /// 1-based; defaults to the last party.
    pub local_party: Option<usize>,
    pub resamples: usize,
}

impl Default for JobOptions {
    fn default() -> Self {
        let opt = OptimizeOptions::default();
        Self {
            starts: opt.starts,
            seed: opt.seed,
            tolerance: opt.tolerance,
            max_iterations: opt.max_iterations,
            trials: 100_000,
            workers: 1,
            local_party: None,
            resamples: nmqc_core::simkit::DEFAULT_RESAMPLES,
        }
    }
}

impl JobOptions {
    pub fn optimize(&self) -> OptimizeOptions {
        OptimizeOptions {
            starts: self.starts,
            seed: self.seed,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub name: String,
    pub instance: ProtocolInstance,
    pub noise: NoiseSpec,
    pub plan: MeasurementPlan,
    pub task: Option<Task>,
    pub options: JobOptions,
}

const BUNDLED: [(&str, &str); 4] = [
    ("h3", include_str!("../configs/h3.json")),
    ("or3", include_str!("../configs/or3.json")),
    ("or3_x1x3", include_str!("../configs/or3_x1x3.json")),
    ("nand2", include_str!("../configs/nand2.json")),
];

pub fn bundled_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn bundled(name: &str) -> Result<JobConfig> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ConfigError::UnknownBundled(name.to_string()))?;
    parse_config(text, name)
}

pub fn load_config(path: &Path) -> Result<JobConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_config(&text, &stem)
}

/// Parses a config; `default_name` is used when the file has no `"name"`.
pub fn parse_config(text: &str, default_name: &str) -> Result<JobConfig> {
    let root: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let root = as_object(&root, "config")?;
    if let Some(v) = root.get("schema") {
        if v.as_u64() != Some(1) {
            return Err(field_err("schema", "only schema 1 is supported"));
        }
    }
    let name = match root.get("name") {
        Some(v) => v
            .as_str()
            .ok_or_else(|| field_err("name", "expected a string"))?
            .to_string(),
        None => default_name.to_string(),
    };
    let instance = parse_instance(required(root, "instance", "")?)?;
    let noise = match root.get("resource") {
        Some(v) => parse_resource(v, instance.parties())?,
        None => NoiseSpec::Ideal,
    };
    let plan = match root.get("plan") {
        Some(v) => parse_plan(v, instance.parties())?,
        None => MeasurementPlan::xy(instance.parties()),
    };
    let task = match root.get("task") {
        Some(v) => {
            let s = v.as_str().ok_or_else(|| field_err("task", "expected a string"))?;
            Some(Task::parse(s).ok_or_else(|| field_err("task", format!("unknown task {s:?}")))?)
        }
        None => None,
    };
    let options = match root.get("options") {
        Some(v) => parse_options(v, instance.parties())?,
        None => JobOptions::default(),
    };
    Ok(JobConfig {
        name,
        instance,
        noise,
        plan,
        task,
        options,
    })
}

fn as_object<'a>(v: &'a Value, field: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| field_err(field, "expected an object"))
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str, prefix: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| field_err(&join(prefix, key), "missing required field"))
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

/// Exact rational from `"p/q"`, a decimal string, or a JSON integer.
pub fn parse_rational(v: &Value, field: &str) -> Result<Rational> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|i| Rational::from_integer(BigInt::from(i)))
            .ok_or_else(|| field_err(field, "non-integer numbers must be written as strings like \"3/10\"")),
        Value::String(s) => rational_from_str(s.trim()).ok_or_else(|| field_err(field, format!("not a rational: {s:?}"))),
        _ => Err(field_err(field, "expected a rational")),
    }
}

fn rational_from_str(s: &str) -> Option<Rational> {
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (neg, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let num: BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(num, den);
    Some(if neg { -r } else { r })
}

fn parse_bits(v: &Value, field: &str) -> Result<Vec<u8>> {
    let arr = v.as_array().ok_or_else(|| field_err(field, "expected an array of 0/1"))?;
    arr.iter()
        .enumerate()
        .map(|(i, b)| match b.as_u64() {
            Some(0) => Ok(0),
            Some(1) => Ok(1),
            _ => Err(field_err(&format!("{field}[{i}]"), "expected 0 or 1")),
        })
        .collect()
}

fn parse_instance(v: &Value) -> Result<ProtocolInstance> {
    let obj = as_object(v, "instance")?;
    let matrix_v = required(obj, "matrix", "instance")?;
    let rows_v = matrix_v
        .as_array()
        .ok_or_else(|| field_err("instance.matrix", "expected an array of rows"))?;
    if rows_v.is_empty() {
        return Err(field_err("instance.matrix", "needs at least one row"));
    }
    let rows = rows_v
        .iter()
        .enumerate()
        .map(|(i, r)| parse_bits(r, &format!("instance.matrix[{i}]")))
        .collect::<Result<Vec<_>>>()?;

    let function = parse_function(required(obj, "function", "instance")?)?;
    let n = function.arity();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(field_err(
                &format!("instance.matrix[{i}]"),
                format!("row has length {}, function arity is {n}", r.len()),
            ));
        }
    }
    let matrix = match obj.get("offset") {
        Some(o) => {
            let offset = parse_bits(o, "instance.offset")?;
            if offset.len() != rows.len() {
                return Err(field_err(
                    "instance.offset",
                    format!("length {} does not match {} matrix rows", offset.len(), rows.len()),
                ));
            }
            PreprocessMatrix::with_offset(&rows, n, &offset)
        }
        None => PreprocessMatrix::new(&rows, n),
    }
    .map_err(|e| field_err("instance.matrix", e.to_string()))?;

    let distribution = parse_distribution(required(obj, "distribution", "instance")?, n)?;
    ProtocolInstance::new(function, distribution, matrix).map_err(|e| field_err("instance", e.to_string()))
}

fn parse_function(v: &Value) -> Result<BooleanFunction> {
    const FIELD: &str = "instance.function";
    let obj = as_object(v, FIELD)?;
    let arity = obj
        .get("arity")
        .map(|a| {
            a.as_u64()
                .map(|a| a as usize)
                .ok_or_else(|| field_err("instance.function.arity", "expected a non-negative integer"))
        })
        .transpose()?;
    match (obj.get("table"), obj.get("anf")) {
        (Some(t), None) => {
            let bits = t
                .as_str()
                .ok_or_else(|| field_err("instance.function.table", "expected a bit string"))?;
            let arity = match arity {
                Some(a) => a,
                None => table_arity(bits.len())
                    .ok_or_else(|| field_err("instance.function.table", "length is not a power of two"))?,
            };
            BooleanFunction::from_table_str(arity, bits)
                .map_err(|e| field_err("instance.function.table", e.to_string()))
        }
        (None, Some(a)) => {
            let arity = arity.ok_or_else(|| field_err("instance.function.arity", "required with \"anf\""))?;
            let list = a
                .as_array()
                .ok_or_else(|| field_err("instance.function.anf", "expected a list of monomials"))?;
            let monomials = list
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let field = format!("instance.function.anf[{i}]");
                    m.as_array()
                        .ok_or_else(|| field_err(&field, "expected a list of variable indices"))?
                        .iter()
                        .map(|k| {
                            k.as_u64()
                                .map(|k| k as usize)
                                .ok_or_else(|| field_err(&field, "variable indices are positive integers"))
                        })
                        .collect::<Result<Vec<usize>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            AnfPolynomial::new(arity, monomials)
                .map(|p| p.to_function())
                .map_err(|e| field_err("instance.function.anf", e.to_string()))
        }
        _ => Err(field_err(FIELD, "give exactly one of \"table\" or \"anf\"")),
    }
}

fn table_arity(len: usize) -> Option<usize> {
    (len.is_power_of_two() && len >= 2).then(|| len.trailing_zeros() as usize)
}

fn parse_distribution(v: &Value, arity: usize) -> Result<InputDistribution> {
    const FIELD: &str = "distribution";
    if let Some(s) = v.as_str() {
        return match s {
            "uniform" => InputDistribution::uniform(arity).map_err(|e| field_err(FIELD, e.to_string())),
            other => Err(field_err(FIELD, format!("unknown distribution {other:?}"))),
        };
    }
    let obj = v
        .as_object()
        .ok_or_else(|| field_err(FIELD, "expected \"uniform\" or an object of bit-string weights"))?;
    let mut weights = vec![Rational::zero(); 1 << arity];
    for (key, w) in obj {
        let field = format!("distribution.{key}");
        if key.len() != arity {
            return Err(field_err(&field, format!("input must have {arity} bits")));
        }
        let idx = parse_bit_string(key).ok_or_else(|| field_err(&field, "not a bit string"))?;
        let w = parse_rational(w, &field)?;
        if w < Rational::zero() {
            return Err(field_err(&field, "weights must be non-negative"));
        }
        weights[idx] = w;
    }
    let total: Rational = weights.iter().sum();
    if !total.is_one() {
        return Err(field_err(FIELD, format!("weights sum to {total}, not 1")));
    }
    InputDistribution::new(arity, weights).map_err(|e| field_err(FIELD, e.to_string()))
}

fn parse_resource(v: &Value, parties: usize) -> Result<NoiseSpec> {
    let obj = as_object(v, "resource")?;
    let kind = required(obj, "resource", "resource")?
        .as_str()
        .ok_or_else(|| field_err("resource.resource", "expected a string"))?;
    match kind {
        "ghz" => Ok(NoiseSpec::Ideal),
        "white-noise" => {
            let visibility = match (obj.get("visibility"), obj.get("fidelity")) {
                (Some(v), None) => number(v, "resource.visibility")?,
                (None, Some(f)) => visibility_for_fidelity(parties, number(f, "resource.fidelity")?),
                _ => {
                    return Err(field_err(
                        "resource",
                        "white-noise needs exactly one of \"visibility\" or \"fidelity\"",
                    ))
                }
            };
            NoiseSpec::white_noise(visibility).map_err(|e| field_err("resource.visibility", e.to_string()))
        }
        other => Err(field_err("resource.resource", format!("unknown resource {other:?}"))),
    }
}

fn number(v: &Value, field: &str) -> Result<f64> {
    v.as_f64()
        .or_else(|| v.as_str().and_then(rational_from_str).map(|r| nmqc_core::to_f64(&r)))
        .ok_or_else(|| field_err(field, "expected a number"))
}

fn parse_plan(v: &Value, parties: usize) -> Result<MeasurementPlan> {
    let obj = as_object(v, "plan")?;
    if let Some(angles) = obj.get("angles") {
        let list = angles
            .as_array()
            .ok_or_else(|| field_err("plan.angles", "expected a list of [theta0, theta1] pairs"))?;
        if list.len() != parties {
            return Err(field_err(
                "plan.angles",
                format!("{} pairs given for {parties} parties", list.len()),
            ));
        }
        let pairs = list
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let field = format!("plan.angles[{i}]");
                match p.as_array().map(Vec::as_slice) {
                    Some([a, b]) => Ok([number(a, &field)?, number(b, &field)?]),
                    _ => Err(field_err(&field, "expected [theta0, theta1]")),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        return MeasurementPlan::new(pairs).map_err(|e| field_err("plan.angles", e.to_string()));
    }
    let kind = required(obj, "plan", "plan")?
        .as_str()
        .ok_or_else(|| field_err("plan.plan", "expected a string"))?;
    match kind {
        "xy" => Ok(MeasurementPlan::xy(parties)),
        "xy-swapped" => {
            let list = required(obj, "parties", "plan")?
                .as_array()
                .ok_or_else(|| field_err("plan.parties", "expected a list of 1-based parties"))?;
            let swapped = list
                .iter()
                .map(|p| {
                    p.as_u64()
                        .map(|p| p as usize)
                        .ok_or_else(|| field_err("plan.parties", "expected positive integers"))
                })
                .collect::<Result<Vec<_>>>()?;
            MeasurementPlan::xy_swapped(parties, &swapped).map_err(|e| field_err("plan.parties", e.to_string()))
        }
        other => Err(field_err("plan.plan", format!("unknown plan {other:?}"))),
    }
}

fn parse_options(v: &Value, parties: usize) -> Result<JobOptions> {
    let obj = as_object(v, "options")?;
    let mut out = JobOptions::default();
    let uint = |key: &str| -> Result<Option<u64>> {
        obj.get(key)
            .map(|v| {
                v.as_u64()
                    .ok_or_else(|| field_err(&join("options", key), "expected a non-negative integer"))
            })
            .transpose()
    };
    for key in obj.keys() {
        const KNOWN: [&str; 8] = [
            "starts",
            "seed",
            "tolerance",
            "max_iterations",
            "trials",
            "workers",
            "local_party",
            "resamples",
        ];
        if !KNOWN.contains(&key.as_str()) {
            return Err(field_err(&join("options", key), "unknown option"));
        }
    }
    if let Some(s) = uint("starts")? {
        out.starts = s as usize;
    }
    if let Some(s) = uint("seed")? {
        out.seed = s;
    }
    if let Some(t) = obj.get("tolerance") {
        out.tolerance = number(t, "options.tolerance")?;
        if out.tolerance.is_nan() || out.tolerance <= 0.0 {
            return Err(field_err("options.tolerance", "must be positive"));
        }
    }
    if let Some(m) = uint("max_iterations")? {
        out.max_iterations = m as usize;
    }
    if let Some(t) = uint("trials")? {
        out.trials = t;
    }
    if let Some(w) = uint("workers")? {
        out.workers = w as usize;
    }
    if let Some(k) = uint("local_party")? {
        let k = k as usize;
        if k == 0 || k > parties {
            return Err(field_err("options.local_party", format!("must be in 1..={parties}")));
        }
        out.local_party = Some(k);
    }
    if let Some(r) = uint("resamples")? {
        out.resamples = r as usize;
    }
    Ok(out)
}
