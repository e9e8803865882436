//! Cardinality-constrained placement search: cross-entropy over a
//! multivariate Bernoulli family, plus a global-best PSO baseline.
//!
//! Both optimizers maximize a black-box objective over placements of exactly
//! `n_es` units among `m` candidates. Objective evaluations inside one batch
//! run on the rayon pool; every random draw comes from a ChaCha substream
//! keyed by `(seed, iteration, sample)`, so results do not depend on the
//! number of workers or on scheduling.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A choice of exactly `n_es` candidates, stored as a binary vector over the
/// candidate list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    z: Vec<bool>,
}

impl Placement {
    pub fn from_indices(m: usize, indices: &[usize]) -> Result<Self> {
        let mut z = vec![false; m];
        for &i in indices {
            if i >= m {
                return Err(Error::Domain(format!("candidate index {i} out of range for m = {m}")));
            }
            if z[i] {
                return Err(Error::Domain(format!("candidate index {i} repeated")));
            }
            z[i] = true;
        }
        Ok(Self { z })
    }

    /// Placement from bus ids, looked up in the candidate list.
    pub fn from_buses(candidates: &[u32], buses: &[u32]) -> Result<Self> {
        let idx = buses
            .iter()
            .map(|b| {
                candidates
                    .iter()
                    .position(|c| c == b)
                    .ok_or_else(|| Error::Domain(format!("bus {b} is not a placement candidate")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(candidates.len(), &idx)
    }

    pub fn z(&self) -> &[bool] {
        &self.z
    }

    pub fn m(&self) -> usize {
        self.z.len()
    }

    pub fn count(&self) -> usize {
        self.z.iter().filter(|&&b| b).count()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.z.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
    }

    pub fn bus_ids(&self, candidates: &[u32]) -> Vec<u32> {
        self.indices().into_iter().map(|i| candidates[i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CEParams {
    pub rho: f64,
    pub alpha: f64,
    pub n_samples: usize,
    pub max_iter: usize,
    /// Initial probabilities; `None` means uniform `n_es / m`.
    pub p_init: Option<Vec<f64>>,
    pub convergence_eps: f64,
    pub seed: u64,
}

impl Default for CEParams {
    fn default() -> Self {
        Self { rho: 0.5, alpha: 0.7, n_samples: 20, max_iter: 10, p_init: None, convergence_eps: 0.01, seed: 0 }
    }
}

impl CEParams {
    pub fn n_elite(&self) -> usize {
        (self.rho * self.n_samples as f64).ceil() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::Config(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if self.n_samples < 2 {
            return Err(Error::Config("n_samples must be at least 2".into()));
        }
        if self.n_elite() < 1 {
            return Err(Error::Config("elite set would be empty".into()));
        }
        if !(self.convergence_eps > 0.0) {
            return Err(Error::Config("convergence_eps must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CEState {
    pub p: Vec<f64>,
    pub gamma: f64,
    pub iter: usize,
    pub best_placement: Option<Placement>,
    pub best_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CETraceRow {
    pub iter: usize,
    pub best_value: f64,
    pub gamma: f64,
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CEOutcome {
    pub state: CEState,
    pub trace: Vec<CETraceRow>,
    /// Iteration at which the final incumbent was first found.
    pub converged_iter: usize,
    /// Distinct placements actually evaluated.
    pub evaluations: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PSOParams {
    pub swarm_size: usize,
    pub max_iter: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub v_max: f64,
    pub seed: u64,
}

impl Default for PSOParams {
    fn default() -> Self {
        Self { swarm_size: 30, max_iter: 20, inertia: 0.72, cognitive: 1.49, social: 1.49, v_max: 0.5, seed: 0 }
    }
}

impl PSOParams {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 1 {
            return Err(Error::Config("swarm_size must be at least 1".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.v_max > 0.0) {
            return Err(Error::Config("v_max must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PSOTraceRow {
    pub iter: usize,
    pub best_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PSOOutcome {
    pub best_placement: Placement,
    pub best_value: f64,
    pub trace: Vec<PSOTraceRow>,
    pub converged_iter: usize,
    pub evaluations: usize,
    pub failures: usize,
}

/// Independent RNG stream for one draw site.
pub fn substream(seed: u64, iter: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((iter as u64) << 32) | index as u64);
    rng
}

/// Product Bernoulli mass of `x` under `p`.
pub fn bernoulli_pdf(x: &[bool], p: &[f64]) -> f64 {
    x.iter().zip(p).map(|(&xi, &pi)| if xi { pi } else { 1.0 - pi }).product()
}

/// Draws exactly `n_es` distinct indices by sequential weighted sampling
/// without replacement, weights `p`.
pub fn sample_placement<R: Rng>(p: &[f64], n_es: usize, rng: &mut R) -> Result<Placement> {
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Infeasible("probability vector has negative or non-finite entries".into()));
    }
    let positive = p.iter().filter(|&&v| v > 0.0).count();
    if positive < n_es {
        return Err(Error::Infeasible(format!("{positive} positive weights, need {n_es}")));
    }
    let mut w = p.to_vec();
    let mut z = vec![false; p.len()];
    for _ in 0..n_es {
        let total: f64 = w.iter().sum();
        let u = rng.gen::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &wi) in w.iter().enumerate() {
            if wi <= 0.0 {
                continue;
            }
            acc += wi;
            pick = Some(i);
            if u < acc {
                break;
            }
        }
        // `pick` falls back to the last positive weight if rounding left u >= acc.
        let i = pick.expect("a positive weight remains");
        z[i] = true;
        w[i] = 0.0;
    }
    Ok(Placement { z })
}

/// Indices of the `n_elite` best scores, best first; ties go to the lower index.
pub fn elite_indices(scores: &[f64], n_elite: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(n_elite);
    order
}

/// `S_(N - Ne + 1)` of the ascending order statistics.
pub fn elite_threshold(scores: &[f64], n_elite: usize) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Domain("no scores".into()));
    }
    if n_elite == 0 || n_elite > scores.len() {
        return Err(Error::Domain(format!("n_elite = {n_elite} with {} scores", scores.len())));
    }
    let mut s = scores.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s[s.len() - n_elite])
}

/// Column means of the elite matrix, smoothed against the previous vector.
pub fn update_p(elites: &[Placement], previous: &[f64], alpha: f64) -> Vec<f64> {
    let n = elites.len() as f64;
    previous
        .iter()
        .enumerate()
        .map(|(j, &prev)| {
            let hat = elites.iter().filter(|e| e.z[j]).count() as f64 / n;
            (alpha * hat + (1.0 - alpha) * prev).clamp(0.0, 1.0)
        })
        .collect()
}

fn distance_to_binary(p: &[f64]) -> f64 {
    p.iter().map(|v| (v - v.round()).abs()).fold(0.0, f64::max)
}

/// Evaluation cache shared by one optimizer run. Failed evaluations are
/// remembered as `None` and scored with a sentinel below the worst finite
/// value seen so far.
struct Memo {
    values: BTreeMap<Placement, Option<f64>>,
    worst: Option<f64>,
    failures: usize,
}

impl Memo {
    fn new() -> Self {
        Self { values: BTreeMap::new(), worst: None, failures: 0 }
    }

    fn evaluate<F>(&mut self, objective: &F, batch: &[Placement]) -> Vec<f64>
    where
        F: Fn(&Placement) -> Result<f64> + Sync,
    {
        let mut fresh: Vec<Placement> = batch.iter().filter(|p| !self.values.contains_key(*p)).cloned().collect();
        fresh.sort();
        fresh.dedup();
        let results: Vec<Option<f64>> = fresh
            .par_iter()
            .map(|pl| objective(pl).ok().filter(|v| v.is_finite()))
            .collect();
        for (pl, r) in fresh.into_iter().zip(results) {
            match r {
                Some(v) => self.worst = Some(self.worst.map_or(v, |w| w.min(v))),
                None => self.failures += 1,
            }
            self.values.insert(pl, r);
        }
        let sentinel = self.worst.unwrap_or(0.0) - 1.0;
        batch.iter().map(|pl| self.values[pl].unwrap_or(sentinel)).collect()
    }
}

fn best_of(scores: &[f64]) -> usize {
    elite_indices(scores, 1)[0]
}

/// Cross-entropy search for the best `n_es`-of-`m` placement.
pub fn ce_optimize<F>(objective: F, params: &CEParams, m: usize, n_es: usize) -> Result<CEOutcome>
where
    F: Fn(&Placement) -> Result<f64> + Sync,
{
    params.validate()?;
    if n_es == 0 || m < n_es {
        return Err(Error::Config(format!("need 1 <= n_es <= m, got n_es = {n_es}, m = {m}")));
    }
    let p0 = match &params.p_init {
        Some(p) => {
            if p.len() != m || p.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Config("p_init must have length m with entries in [0, 1]".into()));
            }
            p.clone()
        }
        None => vec![n_es as f64 / m as f64; m],
    };

    let mut memo = Memo::new();
    let mut state = CEState { p: p0, gamma: f64::NEG_INFINITY, iter: 0, best_placement: None, best_value: f64::NEG_INFINITY };
    let mut trace = Vec::new();
    let mut converged_iter = 0;

    if distance_to_binary(&state.p) < params.convergence_eps {
        let z: Vec<bool> = state.p.iter().map(|v| v.round() == 1.0).collect();
        if z.iter().filter(|&&b| b).count() == n_es {
            let pl = Placement { z };
            let v = memo.evaluate(&objective, std::slice::from_ref(&pl))[0];
            state.best_placement = Some(pl);
            state.best_value = v;
            state.gamma = v;
            trace.push(CETraceRow { iter: 0, best_value: v, gamma: v, p: state.p.clone() });
            return Ok(CEOutcome { state, trace, converged_iter: 0, evaluations: memo.values.len(), failures: memo.failures });
        }
    }

    let n_elite = params.n_elite();
    for iter in 1..=params.max_iter {
        let samples = (0..params.n_samples)
            .map(|i| sample_placement(&state.p, n_es, &mut substream(params.seed, iter, i)))
            .collect::<Result<Vec<_>>>()?;
        debug_assert!(samples.iter().all(|s| s.count() == n_es));
        let scores = memo.evaluate(&objective, &samples);

        let top = best_of(&scores);
        if scores[top] > state.best_value {
            state.best_value = scores[top];
            state.best_placement = Some(samples[top].clone());
            converged_iter = iter;
        }
        state.gamma = elite_threshold(&scores, n_elite)?;
        let elites: Vec<Placement> = elite_indices(&scores, n_elite).into_iter().map(|i| samples[i].clone()).collect();
        state.p = update_p(&elites, &state.p, params.alpha);
        state.iter = iter;
        trace.push(CETraceRow { iter, best_value: state.best_value, gamma: state.gamma, p: state.p.clone() });

        if distance_to_binary(&state.p) < params.convergence_eps {
            break;
        }
    }
    Ok(CEOutcome { state, trace, converged_iter, evaluations: memo.values.len(), failures: memo.failures })
}

/// The `n_es` largest coordinates; ties go to the lower index.
pub fn rank_decode(x: &[f64], n_es: usize) -> Placement {
    let idx = elite_indices(x, n_es);
    let mut z = vec![false; x.len()];
    for i in idx {
        z[i] = true;
    }
    Placement { z }
}

/// Global-best PSO over `[0, 1]^m`, decoded by rank. The initial swarm counts
/// as iteration 1, so the evaluation budget is `swarm_size * max_iter`.
pub fn pso_optimize<F>(objective: F, params: &PSOParams, m: usize, n_es: usize) -> Result<PSOOutcome>
where
    F: Fn(&Placement) -> Result<f64> + Sync,
{
    params.validate()?;
    if n_es == 0 || m < n_es {
        return Err(Error::Config(format!("need 1 <= n_es <= m, got n_es = {n_es}, m = {m}")));
    }
    let vmax = params.v_max;
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(params.swarm_size);
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(params.swarm_size);
    for i in 0..params.swarm_size {
        let mut rng = substream(params.seed, 0, i);
        x.push((0..m).map(|_| rng.gen::<f64>()).collect());
        v.push((0..m).map(|_| rng.gen_range(-vmax..=vmax)).collect());
    }

    let mut memo = Memo::new();
    let decoded: Vec<Placement> = x.iter().map(|xi| rank_decode(xi, n_es)).collect();
    let scores = memo.evaluate(&objective, &decoded);
    let mut pbest = x.clone();
    let mut pbest_val = scores.clone();
    let g = best_of(&pbest_val);
    let mut gbest = pbest[g].clone();
    let mut gbest_val = pbest_val[g];
    let mut gbest_pl = decoded[g].clone();
    let mut converged_iter = 1;
    let mut trace = vec![PSOTraceRow { iter: 1, best_value: gbest_val }];

    for iter in 2..=params.max_iter {
        for i in 0..params.swarm_size {
            let mut rng = substream(params.seed, iter, i);
            for j in 0..m {
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let vel = params.inertia * v[i][j]
                    + params.cognitive * r1 * (pbest[i][j] - x[i][j])
                    + params.social * r2 * (gbest[j] - x[i][j]);
                v[i][j] = vel.clamp(-vmax, vmax);
                x[i][j] = (x[i][j] + v[i][j]).clamp(0.0, 1.0);
            }
        }
        let decoded: Vec<Placement> = x.iter().map(|xi| rank_decode(xi, n_es)).collect();
        let scores = memo.evaluate(&objective, &decoded);
        for i in 0..params.swarm_size {
            if scores[i] > pbest_val[i] {
                pbest_val[i] = scores[i];
                pbest[i] = x[i].clone();
            }
        }
        let top = best_of(&scores);
        if scores[top] > gbest_val {
            gbest_val = scores[top];
            gbest = x[top].clone();
            gbest_pl = decoded[top].clone();
            converged_iter = iter;
        }
        trace.push(PSOTraceRow { iter, best_value: gbest_val });
    }
    Ok(PSOOutcome {
        best_placement: gbest_pl,
        best_value: gbest_val,
        trace,
        converged_iter,
        evaluations: memo.values.len(),
        failures: memo.failures,
    })
}

/// Exhaustive argmax over all `n_es`-subsets, lexicographic tie-break.
pub fn brute_force<F>(objective: F, m: usize, n_es: usize) -> Result<(Placement, f64)>
where
    F: Fn(&Placement) -> Result<f64>,
{
    let mut idx: Vec<usize> = (0..n_es).collect();
    let mut best: Option<(Placement, f64)> = None;
    loop {
        let pl = Placement::from_indices(m, &idx)?;
        let v = objective(&pl)?;
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((pl, v));
        }
        // next combination
        let mut k = n_es;
        while k > 0 && idx[k - 1] == m - n_es + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        idx[k - 1] += 1;
        for t in k..n_es {
            idx[t] = idx[t - 1] + 1;
        }
    }
    best.ok_or_else(|| Error::Config("empty search space".into()))
}
