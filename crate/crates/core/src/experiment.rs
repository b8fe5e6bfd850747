//! Config-driven experiment runner behind the `nucleatrace` binary.
//!
//! Every trial draws its random objects from `ChaCha8Rng` seeded with the
//! config seed and switched to a stream numbered by the trial, so trials are
//! independent of scheduling and reports are byte-stable.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ambient::{exponent_serde, AmbientSpace, Vector};
use crate::approx::{alpha_preset, build_approximant};
use crate::error::{Error, Result};
use crate::lorentz::{
    factor_l1_lorentz, holder_product_bound, product_law_check, sharpness_witness, DecayFamily, EpsilonRule,
    FiniteSequence, SWEEP_GROWTH,
};
use crate::spectral::{audit_trace_formula, eigenvalue_type_probe, similarity_spectrum_check_of, ProbeVerdict};
use crate::tensor_rep::{NuclearIndex, Representation};

pub const GENERATOR_NAME: &str = "ChaCha8Rng";
pub const GENERATOR_VERSION: &str = "rand_chacha-0.3/seed_from_u64+set_stream";
/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "NUCLEATRACE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Holder,
    Lorentz,
    Factorize,
    TraceAudit,
    EigenType,
    Approx,
    Similarity,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Holder => "holder",
            Self::Lorentz => "lorentz",
            Self::Factorize => "factorize",
            Self::TraceAudit => "trace-audit",
            Self::EigenType => "eigen-type",
            Self::Approx => "approx",
            Self::Similarity => "similarity",
        }
    }

    fn default_tolerance(self) -> f64 {
        match self {
            Self::Holder => 1e-9,
            Self::Approx => 1e-10,
            Self::Factorize => 0.0,
            Self::Lorentz => SWEEP_GROWTH,
            Self::TraceAudit | Self::EigenType | Self::Similarity => 1e-8,
        }
    }
}

/// Sequence profile for `approx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `x_n = n^(-beta) e_n`.
    #[default]
    Coordinate,
    /// Random directions with norms `n^(-beta)`, `2 · dim` vectors.
    Random,
}

/// One experiment. Unset parameters fall back to per-subcommand defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
    #[serde(default, with = "exponent_option_vec", skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, with = "exponent_serde::option", skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

fn one() -> usize {
    1
}

mod exponent_option_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrapped(#[serde(with = "crate::ambient::exponent_serde::vec")] Vec<f64>);

    pub fn serialize<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|x| Wrapped(x.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
        Ok(Option::<Wrapped>::deserialize(d)?.map(|w| w.0))
    }
}

impl ExperimentConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            seed: 0,
            trials: 1,
            dims: None,
            exponents: None,
            s: None,
            r: None,
            w: None,
            alpha: None,
            epsilon: None,
            beta: None,
            length: None,
            a: None,
            b: None,
            profile: None,
            tolerance: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance.unwrap_or_else(|| self.subcommand.default_tolerance())
    }

    fn dims_or(&self, default: &[usize]) -> Vec<usize> {
        self.dims.clone().unwrap_or_else(|| default.to_vec())
    }

    fn exponents_or(&self, default: &[f64]) -> Vec<f64> {
        self.exponents.clone().unwrap_or_else(|| default.to_vec())
    }

    /// Rejects configurations no subcommand can run.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if let Some(d) = &self.dims {
            if d.is_empty() {
                return Err(Error::Config("dims must be non-empty".into()));
            }
            if d.contains(&0) {
                return Err(Error::Config("dims must be positive".into()));
            }
        }
        if let Some(e) = &self.exponents {
            if e.is_empty() {
                return Err(Error::Config("exponents must be non-empty".into()));
            }
            for &p in e {
                AmbientSpace::new(1, p).map_err(|err| Error::Config(err.to_string()))?;
            }
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("tolerance must be positive, got {t}")));
            }
        }
        if self.r.is_some() != self.w.is_some() {
            return Err(Error::Config("r and w must be given together".into()));
        }
        if let (Some(r), Some(w)) = (self.r, self.w) {
            NuclearIndex::lorentz(r, w)?;
        }
        if let Some(s) = self.s {
            NuclearIndex::s(s)?;
        }
        if let Some(a) = self.alpha {
            if !(0.0..=0.5).contains(&a) {
                return Err(Error::Config(format!("alpha must lie in [0, 1/2], got {a}")));
            }
        }
        if self.a.is_some() != self.b.is_some() {
            return Err(Error::Config("a and b must be given together".into()));
        }
        Ok(())
    }
}

/// Outcome of one trial. Failing records carry the input needed to replay
/// them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub label: String,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<Value>,
}

impl TrialRecord {
    fn new(trial: usize, label: impl Into<String>) -> Self {
        Self { trial, label: label.into(), pass: true, metrics: BTreeMap::new(), note: String::new(), input: None }
    }

    /// Non-finite values are left out; JSON has no encoding for them.
    fn metric(&mut self, key: &str, value: f64) -> &mut Self {
        if value.is_finite() {
            self.metrics.insert(key.to_string(), value);
        }
        self
    }

    fn failed(trial: usize, label: impl Into<String>, err: &Error, input: Value) -> Self {
        let mut r = Self::new(trial, label);
        r.pass = false;
        r.note = err.to_string();
        r.input = Some(input);
        r
    }

    fn finish(mut self, pass: bool, input: impl FnOnce() -> Value) -> Self {
        self.pass = pass;
        if !pass {
            self.input = Some(input());
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub records: usize,
    pub pass_count: usize,
    pub fail_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub generator: Generator,
    pub records: Vec<TrialRecord>,
    pub aggregate: Aggregate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.aggregate.fail_count == 0
    }

    /// The report without its wall time; identical for identical configs.
    pub fn body(&self) -> RunReport {
        RunReport { wall_time_ms: None, ..self.clone() }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// One row per record; metric columns are the union of metric names.
    pub fn to_csv(&self) -> Result<String> {
        let keys: BTreeSet<&str> = self.records.iter().flat_map(|r| r.metrics.keys().map(String::as_str)).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Config(e.to_string());
        let mut header = vec!["trial", "label", "pass"];
        header.extend(keys.iter().copied());
        header.push("note");
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![r.trial.to_string(), r.label.clone(), if r.pass { "PASS" } else { "FAIL" }.to_string()];
            row.extend(keys.iter().map(|k| r.metrics.get(*k).map_or(String::new(), |v| v.to_string())));
            row.push(r.note.clone());
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// RNG for trial `index`: the config seed, on stream `index`.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Error::Config(format!("{THREADS_ENV} must be positive")));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(e.to_string()))
}

fn par_trials<F>(count: usize, f: F) -> Vec<TrialRecord>
where
    F: Fn(usize) -> TrialRecord + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let pool = thread_pool()?;
    let records = pool.install(|| match config.subcommand {
        Subcommand::Holder => run_holder(config),
        Subcommand::Lorentz => run_lorentz(config),
        Subcommand::Factorize => run_factorize(config),
        Subcommand::TraceAudit => run_trace_audit(config),
        Subcommand::EigenType => run_eigen_type(config),
        Subcommand::Approx => run_approx(config),
        Subcommand::Similarity => run_similarity(config),
    })?;
    let metric_max = |key: &str| {
        records.iter().filter_map(|r| r.metrics.get(key).copied()).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
    };
    let pass_count = records.iter().filter(|r| r.pass).count();
    let aggregate = Aggregate {
        records: records.len(),
        pass_count,
        fail_count: records.len() - pass_count,
        max_defect: metric_max("defect"),
        max_ratio: metric_max("ratio"),
    };
    Ok(RunReport {
        config: config.clone(),
        generator: Generator { name: GENERATOR_NAME.into(), version: GENERATOR_VERSION.into() },
        records,
        aggregate,
        wall_time_ms: Some(start.elapsed().as_secs_f64() * 1e3),
    })
}

// ---------------------------------------------------------------- samplers

/// `len` entries uniform in `[-1, 1]`.
pub fn random_values<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// A random vector of unit norm in `space`.
pub fn random_unit<R: Rng>(rng: &mut R, space: AmbientSpace) -> Vec<f64> {
    loop {
        let v = random_values(rng, space.dim());
        let norm = space.norm_of(&v);
        if norm > 1e-3 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

/// A random endomorphism representation on `space` with between 1 and
/// `max_atoms` atoms, weights in `(0, 1]` and unit functionals and vectors.
pub fn random_representation<R: Rng>(rng: &mut R, space: AmbientSpace, max_atoms: usize) -> Result<Representation> {
    let m = rng.gen_range(1..=max_atoms.max(1));
    let lambdas: Vec<f64> = (0..m).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let functionals = (0..m).map(|_| random_unit(rng, space.dual())).collect();
    let vectors = (0..m).map(|_| random_unit(rng, space)).collect();
    Representation::on(space, lambdas, functionals, vectors)
}

/// `s` with `1/s = 1 + |1/2 - 1/p|`.
pub fn natural_s(p: f64) -> f64 {
    1.0 / (1.0 + alpha_preset(p))
}

fn seq(values: Vec<f64>) -> Result<FiniteSequence> {
    FiniteSequence::new(values)
}

// ---------------------------------------------------------------- runners

fn run_holder(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let s = cfg.s.unwrap_or(2.0 / 3.0);
    let max_len = cfg.length.unwrap_or(64).max(1);
    let tol = cfg.tolerance();
    Ok(par_trials(cfg.trials, |t| {
        let (a, b) = match (&cfg.a, &cfg.b) {
            (Some(a), Some(b)) => (a.clone(), b.clone()),
            _ => {
                let mut rng = trial_rng(cfg.seed, t);
                let n = rng.gen_range(1..=max_len);
                (random_values(&mut rng, n), random_values(&mut rng, n))
            }
        };
        let input = || json!({ "a": a, "b": b, "s": s });
        let result = (|| {
            let (sa, sb) = (seq(a.clone())?, seq(b.clone())?);
            let rep = holder_product_bound(&sa, &sb, s)?;
            let mut rec = TrialRecord::new(t, if rep.defect().abs() <= tol { "equality" } else { "strict" });
            rec.metric("lhs", rep.lhs).metric("rhs", rep.rhs).metric("margin", rep.defect());
            let mut ok = rep.defect() >= -tol;
            if s < 1.0 && !sa.is_zero() {
                let witness = sharpness_witness(&sa, s)?;
                let w = holder_product_bound(&sa, &witness, s)?;
                let gap = (w.lhs - sa.l1_norm()).abs();
                rec.metric("witness_gap", gap);
                ok &= gap <= tol;
            }
            Ok::<_, Error>(rec.finish(ok, input))
        })();
        result.unwrap_or_else(|e| TrialRecord::failed(t, "error", &e, input()))
    }))
}

fn run_lorentz(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let exps: Vec<f64> = cfg.exponents_or(&[1.0, 2.0, 4.0]).into_iter().filter(|p| p.is_finite()).collect();
    if exps.is_empty() {
        return Err(Error::Config("lorentz needs a finite exponent".into()));
    }
    let truncation = cfg.length.unwrap_or(8192);
    let w = cfg.w;
    let growth = cfg.tolerance();
    Ok(par_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let pa = exps[rng.gen_range(0..exps.len())];
        let pb = exps[rng.gen_range(0..exps.len())];
        let (qa, qb) = (w.unwrap_or(pa), w.unwrap_or(pb));
        // k^(-beta) lies in l_{p,q} once beta > 1/p
        let ba = 1.0 / pa + rng.gen_range(0.25..=1.0);
        let bb = 1.0 / pb + rng.gen_range(0.25..=1.0);
        let input = || json!({ "a": { "exponent": ba, "p": pa, "q": qa }, "b": { "exponent": bb, "p": pb, "q": qb }, "truncation": truncation });
        let result = (|| {
            let fa = DecayFamily::new(1.0, ba, truncation)?;
            let fb = DecayFamily::new(1.0, bb, truncation)?;
            let rep = product_law_check(&fa, (pa, qa), &fb, (pb, qb), growth)?;
            let mut rec = TrialRecord::new(t, if rep.bounded { "bounded" } else { "growing" });
            rec.metric("s", rep.s).metric("t", rep.t);
            for (l, n) in rep.truncations.iter().zip(&rep.norms) {
                rec.metric(&format!("norm_{l}"), *n);
            }
            rec.metric("ratio", rep.norms[2] / rep.norms[1]);
            Ok::<_, Error>(rec.finish(rep.bounded, input))
        })();
        result.unwrap_or_else(|e| TrialRecord::failed(t, "error", &e, input()))
    }))
}

fn run_factorize(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let s = cfg.s.unwrap_or(2.0 / 3.0);
    let len = cfg.length.unwrap_or(4096).max(4);
    let tol = cfg.tolerance();
    Ok(par_trials(cfg.trials, |t| {
        let beta = cfg.beta.unwrap_or_else(|| trial_rng(cfg.seed, t).gen_range(1.6..=3.0));
        let input = || json!({ "beta": beta, "s": s, "length": len });
        let result = (|| {
            let d = seq((1..=len).map(|k| (k as f64).powf(-beta)).collect())?;
            let f = factor_l1_lorentz(&d, s, EpsilonRule::Adaptive)?;
            let recon = d
                .values()
                .iter()
                .zip(f.alpha.values().iter().zip(f.beta.values()))
                .map(|(&dk, (&a, &b))| if dk == 0.0 { (a * b).abs() } else { (a * b - dk).abs() / dk })
                .fold(0.0, f64::max);
            let wb = &f.certificate.weighted_beta;
            let tail_ok = f.certificate.non_increasing_from(len / 2 - 1);
            let decay = wb[len - 1] / wb[len / 4 - 1];
            let mut rec = TrialRecord::new(t, format!("beta={beta:.4}"));
            rec.metric("beta", beta)
                .metric("reconstruction", recon)
                .metric("alpha_l1", f.certificate.alpha_l1)
                .metric("tail_decay", decay);
            let ok = recon <= tol && tail_ok && decay <= 0.5;
            if !tail_ok {
                rec.note = "weighted beta increases on the tail".into();
            }
            Ok::<_, Error>(rec.finish(ok, input))
        })();
        result.unwrap_or_else(|e| TrialRecord::failed(t, "error", &e, input()))
    }))
}

fn audit_index(cfg: &ExperimentConfig, p: f64) -> Result<NuclearIndex> {
    match (cfg.r, cfg.w) {
        (Some(r), Some(w)) => NuclearIndex::lorentz(r, w),
        _ => NuclearIndex::s(cfg.s.unwrap_or_else(|| natural_s(p))),
    }
}

fn run_trace_audit(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let dims = cfg.dims_or(&[4, 8, 16, 32]);
    let exps = cfg.exponents_or(&[1.0, 1.5, 2.0, 4.0, f64::INFINITY]);
    let cells: Vec<(usize, f64, NuclearIndex)> = dims
        .iter()
        .flat_map(|&n| exps.iter().map(move |&p| (n, p)))
        .map(|(n, p)| Ok((n, p, audit_index(cfg, p)?)))
        .collect::<Result<_>>()?;
    let tol = cfg.tolerance();
    let per = cfg.trials;
    Ok(par_trials(cells.len() * per, |i| {
        let (n, p, idx) = cells[i / per];
        let mut rng = trial_rng(cfg.seed, i);
        let label = format!("n={n} p={}", fmt_exponent(p));
        let space = AmbientSpace::new(n, p).expect("validated exponent and dimension");
        let z = match random_representation(&mut rng, space, n) {
            Ok(z) => z,
            Err(e) => return TrialRecord::failed(i, label, &e, json!({ "n": n, "p": fmt_exponent(p) })),
        };
        let input = || json!({ "representation": z, "index": idx });
        match audit_trace_formula(&z, &idx, tol) {
            Ok(a) => {
                let mut rec = TrialRecord::new(i, label);
                rec.metric("atoms", z.len() as f64)
                    .metric("nuclear_trace", a.nuclear_trace)
                    .metric("spectral_sum_re", a.spectral_sum.re)
                    .metric("spectral_sum_im", a.spectral_sum.im)
                    .metric("defect", a.defect)
                    .metric("eigen_l1", a.eigen_l1)
                    .metric("quasi_norm", a.quasi_norm)
                    .metric("frobenius", a.frobenius);
                if let Some(r) = a.ratio {
                    rec.metric("ratio", r);
                }
                rec.finish(a.pass, input)
            }
            Err(e) => TrialRecord::failed(i, label, &e, input()),
        }
    }))
}

fn fmt_exponent(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        p.to_string()
    }
}

fn run_eigen_type(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let dims = cfg.dims_or(&[8, 16, 32, 64, 128, 256, 512]);
    let p = cfg.exponents_or(&[1.0])[0];
    let beta = cfg.beta.unwrap_or(1.5);
    let idx = match (cfg.r, cfg.w) {
        (Some(r), Some(w)) => NuclearIndex::lorentz(r, w)?,
        _ => NuclearIndex::s(cfg.s.unwrap_or(2.0 / 3.0))?,
    };
    let generator = |n: usize| {
        let space = AmbientSpace::new(n, p)?;
        let e = |j: usize| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        Representation::on(space, (1..=n).map(|k| (k as f64).powf(-beta)).collect(), (0..n).map(e).collect(), (0..n).map(e).collect())
    };
    let probe = eigenvalue_type_probe(generator, &dims, &idx, cfg.tolerance())?;
    let mut records: Vec<TrialRecord> = probe
        .reports
        .iter()
        .zip(&dims)
        .enumerate()
        .map(|(i, (a, &n))| {
            let mut rec = TrialRecord::new(i, format!("n={n}"));
            rec.metric("dimension", n as f64)
                .metric("defect", a.defect)
                .metric("eigen_l1", a.eigen_l1)
                .metric("quasi_norm", a.quasi_norm);
            match a.ratio {
                Some(r) => {
                    rec.metric("ratio", r);
                }
                None => rec.note = "quasi-norm vanishes; ratio skipped".into(),
            }
            rec.finish(a.pass, || json!({ "n": n, "p": fmt_exponent(p), "beta": beta, "index": idx }))
        })
        .collect();
    let mut verdict = TrialRecord::new(records.len(), "verdict");
    verdict.note = match probe.verdict {
        ProbeVerdict::Bounded => "bounded",
        ProbeVerdict::Growing => "growing",
        ProbeVerdict::Undefined => "undefined",
    }
    .into();
    let verdict = verdict.finish(probe.verdict != ProbeVerdict::Growing, || json!({ "dims": dims, "p": fmt_exponent(p), "beta": beta, "index": idx }));
    records.push(verdict);
    Ok(records)
}

fn run_approx(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let n = cfg.dims_or(&[256])[0];
    let p = cfg.exponents_or(&[2.0])[0];
    let beta = cfg.beta.unwrap_or(1.0);
    let eps = cfg.epsilon.unwrap_or(0.1);
    let alpha = cfg.alpha.unwrap_or_else(|| alpha_preset(p));
    let profile = cfg.profile.unwrap_or_default();
    let space = AmbientSpace::new(n, p)?;
    let head_tol = cfg.tolerance();
    Ok(par_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let xs: Vec<Vector> = match profile {
            Profile::Coordinate => (0..n).map(|j| Vector::basis(space, j).scaled(((j + 1) as f64).powf(-beta))).collect(),
            Profile::Random => (1..=2 * n)
                .map(|k| {
                    let u = random_unit(&mut rng, space);
                    Vector::new(u, space).expect("dimension matches").scaled((k as f64).powf(-beta))
                })
                .collect(),
        };
        let input = || {
            json!({
                "space": space,
                "epsilon": eps,
                "alpha": alpha,
                "xs": xs.iter().map(|x| x.coords().to_vec()).collect::<Vec<_>>(),
            })
        };
        match build_approximant(&xs, eps, space, alpha) {
            Ok((_, cert)) => {
                let mut rec = TrialRecord::new(t, if cert.guaranteed { "guaranteed" } else { "measured" });
                rec.metric("cutoff", cert.cutoff as f64)
                    .metric("rank", cert.rank as f64)
                    .metric("sup_error", cert.sup_error)
                    .metric("head_error", cert.head_error)
                    .metric("projection_norm_lower", cert.projection_norm.lower)
                    .metric("projection_norm_upper", cert.projection_norm.upper);
                let ok = cert.head_error <= head_tol * (1.0 + cert.projection_norm.upper);
                rec.finish(ok, input)
            }
            Err(e) => TrialRecord::failed(t, "error", &e, input()),
        }
    }))
}

fn run_similarity(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let max_dim = cfg.dims_or(&[12]).into_iter().max().expect("dims validated non-empty");
    let tol = cfg.tolerance();
    Ok(par_trials(cfg.trials, |t| {
        let mut rng = trial_rng(cfg.seed, t);
        let m = rng.gen_range(1..=max_dim);
        let n = rng.gen_range(1..=max_dim);
        let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..=1.0));
        let b = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..=1.0));
        let input = || {
            let rows = |x: &DMatrix<f64>| x.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>();
            json!({ "a": rows(&a), "b": rows(&b) })
        };
        match similarity_spectrum_check_of(&a, &b, tol) {
            Ok(r) => {
                let mut rec = TrialRecord::new(t, format!("{m}x{n}"));
                rec.metric("max_mismatch", r.max_mismatch)
                    .metric("nonzero_ab", r.nonzero_ab as f64)
                    .metric("nonzero_ba", r.nonzero_ba as f64);
                rec.finish(r.pass, input)
            }
            Err(e) => TrialRecord::failed(t, "error", &e, input()),
        }
    }))
}
