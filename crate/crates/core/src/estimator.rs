//! Recombination of fragment results.
//!
//! - [`estimate_enumerate`]: exact sum `Σ_s c_s ∏_j T_j(s)` with exact fragments.
//! - [`estimate_montecarlo`]: sample `s`, run every fragment once, average
//!   `sign(c_s) · ∏_e Σ_k|c^e_k| · f(y) ∏σ`. For wire cuts the coordinates are
//!   uniform and the multiplier is `8^K c_s`.
//! - [`estimate_tensor_contract`]: estimate every per-cluster tensor entry
//!   (cut coefficients absorbed into the lower-index cluster) and contract the
//!   cluster graph along its contraction order.

use std::f64::consts::E;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::circuit::PostProcess;
use crate::cutting::{CutPlan, Fragment};
use crate::error::{Error, Result};
use crate::network::graph::contract_with_order_dims;
use crate::rng::{keyed, stream};

/// Default cap on enumerated assignments.
pub const DEFAULT_BUDGET: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Enumerate,
    Montecarlo,
    Tensor,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "enumerate" => Ok(Mode::Enumerate),
            "montecarlo" | "monte-carlo" | "mc" => Ok(Mode::Montecarlo),
            "tensor" | "tensor-contract" => Ok(Mode::Tensor),
            other => Err(Error::InvalidArgument(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub mode: Mode,
    pub samples: u64,
    pub fragments: u64,
    pub wallclock_ms: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub d: usize,
    pub cc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub mode: Mode,
    pub epsilon: f64,
    /// Monte Carlo: `a = 2^{2K}` (or `∏_e Σ_k |c^e_k|` for mixed cuts).
    pub a: f64,
    /// Assignment samples (Monte Carlo) or shots per tensor entry (tensor mode).
    pub n: u64,
    /// Tensor mode: per-entry accuracy `δ = ε/((e−1)D)`.
    pub delta: Option<f64>,
    /// Tensor mode: number of tensor entries `D = r·8^{d'}`.
    pub entries: Option<f64>,
    /// Predicted fragment executions: `N·r` or `D·N`.
    pub predicted_executions: f64,
}

/// `⌈x⌉` that forgives a few ulps of round-off above an integer.
pub(crate) fn ceil_tol(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// Sample-count bounds from the cut parameters alone.
///
/// Monte Carlo: `N = ⌈4a²/ε²⌉` with `a = 2^{2K}` gives `|X̄ − T| < ε` with
/// probability at least `1 − 2exp(−Nε²/2a²) > 2/3`.
/// Tensor: `D = r·8^{d'}`, `δ = ε/((e−1)D)`, `N = ⌈2 ln(6D)/δ²⌉` shots per entry.
pub fn plan_samples(k: usize, r: usize, d_prime: usize, epsilon: f64, mode: Mode) -> SamplePlan {
    let a = 4f64.powi(k as i32);
    match mode {
        Mode::Tensor => tensor_plan(r as f64 * 8f64.powi(d_prime as i32), a, epsilon),
        _ => montecarlo_plan(a, r, epsilon, mode),
    }
}

fn montecarlo_plan(a: f64, r: usize, epsilon: f64, mode: Mode) -> SamplePlan {
    let n = ceil_tol(4.0 * a * a / (epsilon * epsilon));
    SamplePlan { mode, epsilon, a, n, delta: None, entries: None, predicted_executions: n as f64 * r as f64 }
}

fn tensor_plan(d: f64, a: f64, epsilon: f64) -> SamplePlan {
    let delta = epsilon / ((E - 1.0) * d);
    let n = ceil_tol(2.0 * (6.0 * d).ln() / (delta * delta));
    SamplePlan {
        mode: Mode::Tensor,
        epsilon,
        a,
        n,
        delta: Some(delta),
        entries: Some(d),
        predicted_executions: d * n as f64,
    }
}

/// Sample plan using the plan's actual cut alphabets: `a = ∏_e Σ_k |c^e_k|`
/// and `D = Σ_j ∏_{e∋j} |alphabet_e|`.
pub fn plan_samples_for(plan: &CutPlan, epsilon: f64, mode: Mode) -> SamplePlan {
    match mode {
        Mode::Tensor => {
            let d: f64 = plan.fragments.iter().map(|f| f.settings(plan) as f64).sum();
            tensor_plan(d.max(1.0), plan.overhead(), epsilon)
        }
        _ => montecarlo_plan(plan.overhead(), plan.r(), epsilon, mode),
    }
}

fn base_estimate(plan: &CutPlan, mode: Mode) -> Estimate {
    Estimate {
        value: 0.0,
        stderr: 0.0,
        mode,
        samples: 0,
        fragments: 0,
        wallclock_ms: 0.0,
        k: plan.params.k,
        d: plan.params.d,
        cc: plan.params.cc(),
    }
}

/// Exact terminal weights of every local setting of a fragment.
pub fn fragment_weight_table(plan: &CutPlan, frag: &Fragment, backend: &Backend) -> Result<Vec<Vec<f64>>> {
    (0..frag.settings(plan))
        .into_par_iter()
        .map(|idx| backend.exact_weights(&frag.job(plan, &frag.decode(plan, idx))))
        .collect()
}

/// Per-fragment scalar `Σ_y w(y) h_j(y)` where `h_j` multiplies the fragment's
/// blocks, or evaluates a general `f` when this fragment alone reads it.
fn fragment_value(plan: &CutPlan, frag: &Fragment, weights: &[f64]) -> f64 {
    let post = &plan.net.alg.post;
    weights
        .iter()
        .enumerate()
        .map(|(y, &w)| {
            if w == 0.0 {
                return 0.0;
            }
            let h = match post {
                PostProcess::General(_) if !frag.terminals.is_empty() => post.eval(frag.global_bits(y as u64)),
                PostProcess::General(_) => 1.0,
                PostProcess::Decomposable(_) => frag.block_factor(post, y as u64),
            };
            w * h
        })
        .sum()
}

/// Digits of assignment `index` (first coordinate most significant).
fn decode_assignment(plan: &CutPlan, mut index: u64) -> Vec<usize> {
    let mut s = vec![0; plan.coords.len()];
    for (e, c) in plan.coords.iter().enumerate().rev() {
        let a = c.alphabet() as u64;
        s[e] = (index % a) as usize;
        index /= a;
    }
    s
}

/// Deterministic parallel sum: fixed chunks, chunk sums added in order.
fn ordered_sum<F>(count: u64, term: F) -> Result<f64>
where
    F: Fn(u64) -> Result<f64> + Sync,
{
    const CHUNK: u64 = 4096;
    let chunks = count.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                acc += term(i)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(partial.iter().sum())
}

pub fn estimate_enumerate(plan: &CutPlan, budget: f64) -> Result<Estimate> {
    estimate_enumerate_with(plan, budget, &Backend::default())
}

pub fn estimate_enumerate_with(plan: &CutPlan, budget: f64, backend: &Backend) -> Result<Estimate> {
    let start = Instant::now();
    let count = plan.assignment_count();
    if count > budget {
        return Err(Error::BudgetExceeded { needed: count, budget });
    }
    let tables: Vec<Vec<Vec<f64>>> =
        plan.fragments.iter().map(|f| fragment_weight_table(plan, f, backend)).collect::<Result<_>>()?;
    let executions: usize = tables.iter().map(|t| t.len()).sum();
    let readers = plan.general_readers();
    let value = if readers.len() <= 1 {
        let values: Vec<Vec<f64>> = plan
            .fragments
            .iter()
            .zip(&tables)
            .map(|(f, t)| t.iter().map(|w| fragment_value(plan, f, w)).collect())
            .collect();
        ordered_sum(count as u64, |i| {
            let s = decode_assignment(plan, i);
            let mut prod = plan.coefficient(&s);
            for (f, v) in plan.fragments.iter().zip(&values) {
                prod *= v[f.encode(plan, &f.local(&s))];
                if prod == 0.0 {
                    break;
                }
            }
            Ok(prod)
        })?
    } else {
        ordered_sum(count as u64, |i| {
            let s = decode_assignment(plan, i);
            let c = plan.coefficient(&s);
            let mut scalar = c;
            let mut reading: Vec<(&Fragment, &Vec<f64>)> = Vec::new();
            for (f, t) in plan.fragments.iter().zip(&tables) {
                let w = &t[f.encode(plan, &f.local(&s))];
                if f.terminals.is_empty() {
                    scalar *= w.iter().sum::<f64>();
                } else {
                    reading.push((f, w));
                }
            }
            if scalar == 0.0 {
                return Ok(0.0);
            }
            Ok(scalar * joint_general_sum(&plan.net.alg.post, &reading, 0, 0, 1.0))
        })?
    };
    let mut est = base_estimate(plan, Mode::Enumerate);
    est.value = value;
    est.samples = count as u64;
    est.fragments = executions as u64;
    est.wallclock_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(est)
}

/// `Σ_y f(y) ∏_j w_j(y_j)` over the fragments reading the final observable.
fn joint_general_sum(post: &PostProcess, reading: &[(&Fragment, &Vec<f64>)], at: usize, y: u64, weight: f64) -> f64 {
    if at == reading.len() {
        return weight * post.eval(y);
    }
    let (f, w) = reading[at];
    let mut acc = 0.0;
    for (local, &wy) in w.iter().enumerate() {
        if wy != 0.0 {
            acc += joint_general_sum(post, reading, at + 1, y | f.global_bits(local as u64), weight * wy);
        }
    }
    acc
}

/// Draw each coordinate with probability `|c_k| / Σ|c|`.
fn sample_assignment<R: Rng>(cumulative: &[Vec<f64>], rng: &mut R) -> Vec<usize> {
    cumulative
        .iter()
        .map(|cum| {
            let u = rng.gen::<f64>() * cum[cum.len() - 1];
            cum.iter().position(|&x| u < x).unwrap_or(cum.len() - 1)
        })
        .collect()
}

/// Monte Carlo estimator with the planned sample count.
pub fn estimate_montecarlo(plan: &CutPlan, epsilon: f64, seed: u64) -> Result<Estimate> {
    let n = plan_samples_for(plan, epsilon, Mode::Montecarlo).n;
    estimate_montecarlo_n(plan, n, seed, &Backend::default())
}

/// Monte Carlo estimator with an explicit number of assignment samples.
pub fn estimate_montecarlo_n(plan: &CutPlan, n: u64, seed: u64, backend: &Backend) -> Result<Estimate> {
    let start = Instant::now();
    let cumulative: Vec<Vec<f64>> = plan
        .coords
        .iter()
        .map(|c| {
            c.coeffs()
                .iter()
                .scan(0.0, |acc, x| {
                    *acc += x.abs();
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    let post = &plan.net.alg.post;
    let samples: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let s = sample_assignment(&cumulative, &mut keyed(seed, stream::ASSIGNMENT, i));
            let inst = plan.instantiate(&s)?;
            let mut sign = 1.0;
            let mut y = 0u64;
            for (j, (frag, job)) in plan.fragments.iter().zip(&inst.jobs).enumerate() {
                let shot = backend.run_fragment_shot(job, &mut keyed(seed, stream::FRAGMENT | j as u64, i))?;
                sign *= shot.sign();
                y |= frag.global_bits(shot.terminal_bits);
            }
            Ok(inst.weight * sign * post.eval(y))
        })
        .collect::<Result<_>>()?;
    let (mean, stderr) = mean_stderr(&samples);
    let mut est = base_estimate(plan, Mode::Montecarlo);
    est.value = mean;
    est.stderr = stderr;
    est.samples = n;
    est.fragments = n * plan.r() as u64;
    est.wallclock_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(est)
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// How tensor entries are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entries {
    /// Exact fragment expectations.
    Exact,
    /// This many shots per entry.
    Shots(u64),
    /// Shot count from [`plan_samples_for`].
    Planned,
}

/// Per-cluster tensors `a(j)` with coefficients absorbed into the lower-index cluster,
/// plus the largest per-entry standard error.
pub fn cluster_tensors(
    plan: &CutPlan,
    entries: Entries,
    epsilon: f64,
    seed: u64,
    backend: &Backend,
) -> Result<(Vec<Vec<f64>>, f64, u64)> {
    if plan.net.alg.post.is_decomposable() || plan.general_readers().len() <= 1 {
        // fine
    } else {
        return Err(Error::NotDecomposable);
    }
    let shots = match entries {
        Entries::Exact => 0,
        Entries::Shots(n) => n,
        Entries::Planned => plan_samples_for(plan, epsilon, Mode::Tensor).n,
    };
    let post = &plan.net.alg.post;
    let mut tensors = Vec::with_capacity(plan.r());
    let mut worst_stderr: f64 = 0.0;
    for (j, frag) in plan.fragments.iter().enumerate() {
        let owned: Vec<Option<Vec<f64>>> = frag
            .coords
            .iter()
            .map(|&c| (plan.coords[c].owner() == j).then(|| plan.coords[c].coeffs()))
            .collect();
        let entries: Vec<(f64, f64)> = (0..frag.settings(plan))
            .into_par_iter()
            .map(|idx| {
                let local = frag.decode(plan, idx);
                let job = frag.job(plan, &local);
                let coeff: f64 = owned
                    .iter()
                    .zip(&local)
                    .filter_map(|(c, &k)| c.as_ref().map(|c| c[k]))
                    .product();
                let (v, se) = if shots == 0 {
                    (fragment_value(plan, frag, &backend.exact_weights(&job)?), 0.0)
                } else {
                    let xs = (0..shots)
                        .map(|t| {
                            let mut rng = keyed(seed, stream::ENTRY | j as u64, idx as u64 * shots + t);
                            let shot = backend.run_fragment_shot(&job, &mut rng)?;
                            let y = shot.terminal_bits;
                            let h = match post {
                                PostProcess::General(_) if !frag.terminals.is_empty() => post.eval(frag.global_bits(y)),
                                PostProcess::General(_) => 1.0,
                                PostProcess::Decomposable(_) => frag.block_factor(post, y),
                            };
                            Ok(shot.sign() * h)
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    mean_stderr(&xs)
                };
                Ok((coeff * v, coeff.abs() * se))
            })
            .collect::<Result<_>>()?;
        worst_stderr = entries.iter().fold(worst_stderr, |m, e| m.max(e.1));
        tensors.push(entries.into_iter().map(|e| e.0).collect());
    }
    Ok((tensors, worst_stderr, shots))
}

/// Tensor-contraction estimator.
pub fn estimate_tensor_contract(plan: &CutPlan, entries: Entries, epsilon: f64, seed: u64) -> Result<Estimate> {
    estimate_tensor_contract_with(plan, entries, epsilon, seed, &Backend::default())
}

pub fn estimate_tensor_contract_with(
    plan: &CutPlan,
    entries: Entries,
    epsilon: f64,
    seed: u64,
    backend: &Backend,
) -> Result<Estimate> {
    let start = Instant::now();
    let (tensors, worst, shots) = cluster_tensors(plan, entries, epsilon, seed, backend)?;
    let dims: Vec<usize> = plan.coords.iter().map(|c| c.alphabet()).collect();
    let value = contract_with_order_dims(&plan.params.g, &dims, &tensors, &plan.params.cc_order)?;
    let d_entries: usize = tensors.iter().map(|t| t.len()).sum();
    let mut est = base_estimate(plan, Mode::Tensor);
    est.value = value;
    est.stderr = (E - 1.0) * d_entries as f64 * worst;
    est.samples = shots;
    est.fragments = d_entries as u64 * shots.max(1);
    est.wallclock_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(est)
}

/// Options shared by the estimator front door.
#[derive(Debug, Clone, Copy)]
pub struct EstimatorConfig {
    pub mode: Mode,
    pub epsilon: f64,
    pub seed: u64,
    pub budget: f64,
    /// Tensor mode: use exact fragment expectations instead of shots.
    pub exact_entries: bool,
    /// Override of the planned sample or per-entry shot count.
    pub samples: Option<u64>,
    pub backend: Backend,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            mode: Mode::Enumerate,
            epsilon: 0.1,
            seed: 0,
            budget: DEFAULT_BUDGET,
            exact_entries: false,
            samples: None,
            backend: Backend::default(),
        }
    }
}

pub fn estimate(plan: &CutPlan, cfg: &EstimatorConfig) -> Result<Estimate> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1], got {}", cfg.epsilon)));
    }
    match cfg.mode {
        Mode::Enumerate => estimate_enumerate_with(plan, cfg.budget, &cfg.backend),
        Mode::Montecarlo => {
            let n = cfg.samples.unwrap_or_else(|| plan_samples_for(plan, cfg.epsilon, Mode::Montecarlo).n);
            estimate_montecarlo_n(plan, n, cfg.seed, &cfg.backend)
        }
        Mode::Tensor => {
            plan.require_separable()?;
            let entries = match (cfg.exact_entries, cfg.samples) {
                (true, _) => Entries::Exact,
                (false, Some(n)) => Entries::Shots(n),
                (false, None) => Entries::Planned,
            };
            estimate_tensor_contract_with(plan, entries, cfg.epsilon, cfg.seed, &cfg.backend)
        }
    }
}

/// Median of `2⌈ln(1/fail)⌉ + 1` independent runs, amplifying the 2/3
/// success probability of a single run.
pub fn estimate_median(plan: &CutPlan, cfg: &EstimatorConfig, fail: f64) -> Result<Estimate> {
    if !(fail > 0.0 && fail < 1.0) {
        return Err(Error::InvalidArgument(format!("failure probability must lie in (0, 1), got {fail}")));
    }
    let runs = 2 * (1.0 / fail).ln().ceil().max(0.0) as u64 + 1;
    let mut results = (0..runs)
        .map(|i| estimate(plan, &EstimatorConfig { seed: cfg.seed.wrapping_add(i.wrapping_mul(0x9E37_79B9)), ..*cfg }))
        .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| a.value.total_cmp(&b.value));
    let samples = results.iter().map(|r| r.samples).sum();
    let fragments = results.iter().map(|r| r.fragments).sum();
    let wall = results.iter().map(|r| r.wallclock_ms).sum();
    let mut mid = results.swap_remove(results.len() / 2);
    mid.samples = samples;
    mid.fragments = fragments;
    mid.wallclock_ms = wall;
    Ok(mid)
}
