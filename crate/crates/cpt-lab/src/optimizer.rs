//! Derivative-free search for high-value feasible payoffs X = f(U, U*).
//!
//! The search space is grid-valued payoffs on a tensor partition of the
//! (U, U*) unit square: U-cells geometric near both endpoints (the kernel is
//! extreme there), U*-cells uniform. Feasibility E_Q[X] = x0 is restored
//! after every proposal by an additive shift, never by rescaling, which can
//! only raise the value when the shift is upward and keeps the search inside
//! the feasible set otherwise.
//!
//! In the well-posed regime every trace is bounded by the analytic ceiling
//! assembled from the audited inequality constants; in the ill-posed regimes
//! `diverge` drives the matching witness construction past any target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::choquet::{cpt_value_with, ChoquetError, EngineConfig};
use crate::law::{Atom, AtomLaw, Law, LawError};
use crate::market::{KernelModel, MarketError};
use crate::prefs::CptSpec;
use crate::regime::{classify, Cause, RegimeVerdict, Verdict};
use crate::value::ExtendedValue;
use crate::witness::{witness, WitnessError, WitnessReport};

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("optimize requires a well-posed spec, classified {0:?}")]
    NotWellPosed(RegimeVerdict),
    #[error("diverge requires an ill-posed spec, classified {0:?}")]
    NotIllPosed(RegimeVerdict),
    #[error("profile violates the budget: residual {0}")]
    BudgetViolated(f64),
    #[error("witness values did not exceed the target by index {max_index}")]
    TargetNotReached { max_index: u64 },
    #[error(transparent)]
    Engine(#[from] ChoquetError),
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
}

/// Tensor partition of the (U, U*) unit square.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TensorGrid {
    u_edges: Vec<f64>,
    ustar_edges: Vec<f64>,
}

impl TensorGrid {
    pub fn new(u_edges: Vec<f64>, ustar_edges: Vec<f64>) -> Result<Self, OptimError> {
        for edges in [&u_edges, &ustar_edges] {
            if edges.len() < 2
                || edges[0] != 0.0
                || edges[edges.len() - 1] != 1.0
                || edges.windows(2).any(|w| w[1] <= w[0])
            {
                return Err(OptimError::Law(LawError::GridLevelOrder(0)));
            }
        }
        Ok(TensorGrid { u_edges, ustar_edges })
    }

    /// Default grid: U-cells geometric towards both endpoints (n_u even),
    /// U*-cells uniform.
    pub fn geometric(n_u: usize, n_ustar: usize) -> Result<Self, OptimError> {
        let half = (n_u / 2).max(1);
        let mut u = vec![0.0];
        for j in (1..=half - 1).rev() {
            u.push(2f64.powi(-(j as i32)) * 0.5);
        }
        u.push(0.5);
        for j in 1..half {
            u.push(1.0 - 2f64.powi(-(j as i32)) * 0.5);
        }
        u.push(1.0);
        let us: Vec<f64> = (0..=n_ustar).map(|j| j as f64 / n_ustar as f64).collect();
        TensorGrid::new(u, us)
    }

    pub fn u_edges(&self) -> &[f64] {
        &self.u_edges
    }
    pub fn ustar_edges(&self) -> &[f64] {
        &self.ustar_edges
    }
    pub fn n_u(&self) -> usize {
        self.u_edges.len() - 1
    }
    pub fn n_ustar(&self) -> usize {
        self.ustar_edges.len() - 1
    }
    pub fn n_nodes(&self) -> usize {
        self.n_u() * self.n_ustar()
    }

    /// Cell masses under both measures; each column sums to one exactly.
    fn masses(&self, model: &KernelModel) -> (Vec<f64>, Vec<f64>) {
        let nu = self.n_u();
        let nj = self.n_ustar();
        let mut pu: Vec<f64> = (0..nu)
            .map(|i| model.p_mass_of_u_interval(self.u_edges[i], self.u_edges[i + 1]))
            .collect();
        let ps: f64 = pu.iter().take(nu - 1).sum();
        pu[nu - 1] = (1.0 - ps).max(0.0);
        let mut qu: Vec<f64> =
            (0..nu).map(|i| self.u_edges[i + 1] - self.u_edges[i]).collect();
        let qs: f64 = qu.iter().take(nu - 1).sum();
        qu[nu - 1] = (1.0 - qs).max(0.0);
        let mut w: Vec<f64> =
            (0..nj).map(|j| self.ustar_edges[j + 1] - self.ustar_edges[j]).collect();
        let ws: f64 = w.iter().take(nj - 1).sum();
        w[nj - 1] = (1.0 - ws).max(0.0);

        let mut p = Vec::with_capacity(nu * nj);
        let mut q = Vec::with_capacity(nu * nj);
        for i in 0..nu {
            for &wj in &w {
                p.push(pu[i] * wj);
                q.push(qu[i] * wj);
            }
        }
        (p, q)
    }
}

/// A grid payoff with its budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PayoffProfile {
    pub grid: TensorGrid,
    /// Node values in u-major order: index = i * n_ustar + j.
    pub node_values: Vec<f64>,
    pub budget: f64,
}

impl PayoffProfile {
    pub fn constant(grid: TensorGrid, x0: f64) -> Self {
        let n = grid.n_nodes();
        PayoffProfile { grid, node_values: vec![x0; n], budget: x0 }
    }
}

const BUDGET_TOL: f64 = 1e-8;

/// Law of the profile under both measures.
fn profile_law(values: &[f64], masses: &(Vec<f64>, Vec<f64>)) -> Result<Law, LawError> {
    let atoms: Vec<Atom> = values
        .iter()
        .zip(masses.0.iter().zip(&masses.1))
        .map(|(&v, (&p, &q))| Atom { value: v, prob_p: p, prob_q: q })
        .collect();
    Ok(Law::DiscreteAtoms(AtomLaw::from_unsorted(atoms)?))
}

fn q_mean(values: &[f64], q: &[f64]) -> f64 {
    values.iter().zip(q).map(|(v, m)| v * m).sum()
}

/// CPT value of a feasible profile. The budget must already hold within
/// 1e-8; the loss side of a grid payoff is always certified finite.
pub fn evaluate(
    profile: &PayoffProfile,
    spec: &CptSpec,
    model: &KernelModel,
) -> Result<ExtendedValue, OptimError> {
    let masses = profile.grid.masses(model);
    let residual = (q_mean(&profile.node_values, &masses.1) - profile.budget).abs();
    if residual > BUDGET_TOL {
        return Err(OptimError::BudgetViolated(residual));
    }
    let law = profile_law(&profile.node_values, &masses)?;
    Ok(cpt_value_with(&law, spec, &EngineConfig::default())?)
}

/// Search options. Defaults give a 12 x 4 grid, six starts, and a step
/// ladder from half the budget scale down to 1e-6.
#[derive(Debug, Clone)]
pub struct OptimizeOptions {
    pub n_u: usize,
    pub n_ustar: usize,
    pub n_starts: usize,
    pub initial_step: Option<f64>,
    pub min_step: f64,
    /// Restrict node values to these levels (pre-shift); step moves walk the
    /// level ladder instead of shrinking.
    pub quantize: Option<Vec<f64>>,
    /// Explicit grid; overrides n_u / n_ustar when set.
    pub grid: Option<TensorGrid>,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            n_u: 12,
            n_ustar: 4,
            n_starts: 6,
            initial_step: None,
            min_step: 1e-6,
            quantize: None,
            grid: None,
        }
    }
}

/// Search outcome: the best profile, its value, the merged best-so-far
/// trace, and the evaluation count.
#[derive(Debug, Clone, Serialize)]
pub struct Optimized {
    pub best: PayoffProfile,
    pub best_value: f64,
    pub trace: Vec<f64>,
    pub evaluations: usize,
}

/// Coordinate pattern search with shrinking step and seeded multi-start.
///
/// Starts run concurrently on independent RNG streams; the merge keeps the
/// best value, ties resolved to the lowest start index, so the result does
/// not depend on scheduling. The reported trace is the chronological
/// best-so-far sequence, non-decreasing by construction.
pub fn optimize(
    spec: &CptSpec,
    model: &KernelModel,
    x0: f64,
    budget_iters: usize,
    seed: u64,
) -> Result<Optimized, OptimError> {
    optimize_with(spec, model, x0, budget_iters, seed, &OptimizeOptions::default())
}

pub fn optimize_with(
    spec: &CptSpec,
    model: &KernelModel,
    x0: f64,
    budget_iters: usize,
    seed: u64,
    opts: &OptimizeOptions,
) -> Result<Optimized, OptimError> {
    let verdict = classify(spec);
    if verdict.verdict != Verdict::WellPosed {
        return Err(OptimError::NotWellPosed(verdict));
    }
    let grid = match &opts.grid {
        Some(g) => g.clone(),
        None => TensorGrid::geometric(opts.n_u, opts.n_ustar)?,
    };
    let masses = grid.masses(model);
    let n = grid.n_nodes();
    let cfg = EngineConfig::default();

    let eval = |values: &[f64]| -> Result<f64, OptimError> {
        let law = profile_law(values, &masses)?;
        Ok(cpt_value_with(&law, spec, &cfg)?.value_or_bound())
    };
    let shift_to_budget = |values: &mut [f64]| {
        let c = x0 - q_mean(values, &masses.1);
        for v in values.iter_mut() {
            *v += c;
        }
    };

    struct StartOutcome {
        value: f64,
        values: Vec<f64>,
        trace: Vec<f64>,
        evals: usize,
    }

    let results: Result<Vec<StartOutcome>, OptimError> = if let Some(levels) = &opts.quantize {
        // quantized mode: the state is an index vector into the level
        // ladder, moves step one rung and clamp at the ends, so the search
        // space is exactly the finite lattice the enumeration oracle sees
        let starts = quantized_starts(levels.len(), n, opts.n_starts, seed);
        let per_start_budget = (budget_iters / starts.len().max(1)).max(2 * n + 1);
        starts
            .par_iter()
            .map(|start| {
                let values_of = |idx: &[usize]| -> Vec<f64> {
                    let mut v: Vec<f64> = idx.iter().map(|&i| levels[i]).collect();
                    shift_to_budget(&mut v);
                    v
                };
                let mut current = start.clone();
                let mut current_vals = values_of(&current);
                let mut current_val = eval(&current_vals)?;
                let mut evals = 1usize;
                let mut trace = vec![current_val];
                'outer: loop {
                    let mut improved = false;
                    for node in 0..n {
                        for dir in [1i64, -1] {
                            if evals >= per_start_budget {
                                break 'outer;
                            }
                            let moved = current[node] as i64 + dir;
                            if moved < 0 || moved >= levels.len() as i64 {
                                continue;
                            }
                            let mut cand = current.clone();
                            cand[node] = moved as usize;
                            let cand_vals = values_of(&cand);
                            let val = eval(&cand_vals)?;
                            evals += 1;
                            if val > current_val {
                                current = cand;
                                current_vals = cand_vals;
                                current_val = val;
                                trace.push(val);
                                improved = true;
                            }
                        }
                    }
                    if !improved {
                        break;
                    }
                }
                Ok(StartOutcome { value: current_val, values: current_vals, trace, evals })
            })
            .collect()
    } else {
        let starts = continuous_starts(x0, n, &grid, opts.n_starts, seed);
        let per_start_budget = (budget_iters / starts.len().max(1)).max(2 * n + 1);
        starts
            .par_iter()
            .map(|start| {
                let mut current = start.clone();
                shift_to_budget(&mut current);
                let mut current_val = eval(&current)?;
                let mut evals = 1usize;
                let mut trace = vec![current_val];
                let mut step =
                    opts.initial_step.unwrap_or_else(|| 0.5 * (x0.abs() + 1.0));
                'outer: loop {
                    let mut improved = false;
                    for node in 0..n {
                        for dir in [1.0, -1.0] {
                            if evals >= per_start_budget {
                                break 'outer;
                            }
                            let mut cand = current.clone();
                            cand[node] += dir * step;
                            shift_to_budget(&mut cand);
                            let val = eval(&cand)?;
                            evals += 1;
                            if val > current_val {
                                current = cand;
                                current_val = val;
                                trace.push(val);
                                improved = true;
                            }
                        }
                    }
                    if !improved {
                        step *= 0.5;
                        if step < opts.min_step {
                            break;
                        }
                    }
                }
                Ok(StartOutcome { value: current_val, values: current, trace, evals })
            })
            .collect()
    };
    let results = results?;

    let mut best_idx = 0;
    for (i, r) in results.iter().enumerate() {
        if r.value > results[best_idx].value {
            best_idx = i;
        }
    }
    let mut merged_trace = Vec::new();
    let mut best_so_far = f64::NEG_INFINITY;
    for r in &results {
        for &v in &r.trace {
            best_so_far = best_so_far.max(v);
            merged_trace.push(best_so_far);
        }
    }
    let evaluations = results.iter().map(|r| r.evals).sum();
    let best =
        PayoffProfile { grid, node_values: results[best_idx].values.clone(), budget: x0 };
    Ok(Optimized {
        best,
        best_value: results[best_idx].value,
        trace: merged_trace,
        evaluations,
    })
}

/// Start profiles for the continuous search: the constant, a U-monotone
/// ramp, then random profiles each paired with its U-monotone rearrangement
/// (same multiset of node values, non-increasing in U) as a seed.
fn continuous_starts(
    x0: f64,
    n: usize,
    grid: &TensorGrid,
    n_starts: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let nj = grid.n_ustar();
    let mut starts = Vec::with_capacity(n_starts.max(2));
    starts.push(vec![x0; n]);
    let scale = x0.abs() + 1.0;
    let ramp: Vec<f64> = (0..n)
        .map(|idx| {
            let i = idx / nj;
            x0 + scale * (1.0 - 2.0 * i as f64 / (grid.n_u() - 1).max(1) as f64)
        })
        .collect();
    starts.push(ramp);
    for s in 2..n_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        let vals: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x0 + scale * z
            })
            .collect();
        // the rearrangement seed: same values sorted non-increasing in U
        let mut sorted = vals.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        starts.push(sorted);
        starts.push(vals);
    }
    starts.truncate(n_starts.max(2));
    starts
}

/// Index-vector starts on the quantized lattice: every constant level, then
/// seeded random lattice points.
fn quantized_starts(n_levels: usize, n: usize, n_starts: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut starts: Vec<Vec<usize>> = (0..n_levels).map(|l| vec![l; n]).collect();
    for s in 0..n_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1000 + s as u64);
        starts.push((0..n).map(|_| rng.random_range(0..n_levels)).collect());
    }
    starts
}

/// Outcome of driving a witness construction past a value target.
#[derive(Debug, Serialize)]
pub struct DivergeOutcome {
    pub cause: Cause,
    pub target: f64,
    pub first_index: u64,
    pub value_at_index: f64,
    pub report: WitnessReport,
}

/// Index ladder for diverge: 1..16 densely, then doubling.
fn diverge_ladder(max_index: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=16).collect();
    let mut n = 32u64;
    while n <= max_index {
        out.push(n);
        n *= 2;
    }
    out
}

/// Dispatches to the witness construction matching the ill-posed cause and
/// returns the first tested index whose value exceeds `target`.
pub fn diverge(
    spec: &CptSpec,
    model: &KernelModel,
    x0: f64,
    target: f64,
) -> Result<DivergeOutcome, OptimError> {
    let verdict = classify(spec);
    if verdict.verdict != Verdict::IllPosed {
        return Err(OptimError::NotIllPosed(verdict));
    }
    let max_index = 1u64 << 31;
    let ladder = diverge_ladder(max_index);
    let report = witness(verdict.cause, spec, model, x0, &ladder)?;
    match report.points.iter().find(|p| p.numeric > target) {
        Some(p) => Ok(DivergeOutcome {
            cause: verdict.cause,
            target,
            first_index: p.index,
            value_at_index: p.numeric,
            report,
        }),
        None => Err(OptimError::TargetNotReached { max_index }),
    }
}
