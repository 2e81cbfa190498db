//! Discrete-time synchronous SIR Monte-Carlo engine with multi-spreader
//! seeding and reproducible per-run RNG streams.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::centrality::ScoreVector;
use crate::error::{Error, Result};
use crate::graph::{mean_degree_moments, Graph};

/// SIR simulation parameters.
///
/// Per-run RNG streams are derived from `(master_seed, run_index)`, so the
/// per-run results are identical no matter how runs are scheduled.
#[derive(Debug, Clone, Copy)]
pub struct SirConfig {
    /// Per-contact infection probability.
    pub lambda: f64,
    /// Per-step recovery probability. 1.0 means recover after exactly one
    /// infectious step.
    pub gamma: f64,
    pub runs: usize,
    pub master_seed: u64,
    /// Safety cap; unreachable for `gamma > 0`.
    pub max_steps: usize,
}

impl SirConfig {
    pub fn new(lambda: f64, master_seed: u64) -> SirConfig {
        SirConfig { lambda, gamma: 1.0, runs: 100, master_seed, max_steps: 1_000_000 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidConfig(format!("lambda must be in [0, 1], got {}", self.lambda)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidConfig(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        if self.runs == 0 {
            return Err(Error::InvalidConfig("runs must be >= 1".into()));
        }
        Ok(())
    }
}

/// Aggregate outcome of repeated SIR runs for one seed set.
#[derive(Debug, Clone)]
pub struct SirOutcome {
    /// Final recovered count of each run, indexed by run.
    pub per_run_recovered: Vec<usize>,
    pub seed_set_size: usize,
}

impl SirOutcome {
    pub fn mean_recovered(&self) -> f64 {
        let total: usize = self.per_run_recovered.iter().sum();
        total as f64 / self.per_run_recovered.len() as f64
    }

    /// Sample standard deviation of the per-run outbreak sizes.
    pub fn std_recovered(&self) -> f64 {
        let n = self.per_run_recovered.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean_recovered();
        let ss: f64 = self
            .per_run_recovered
            .iter()
            .map(|&r| {
                let d = r as f64 - mean;
                d * d
            })
            .sum();
        (ss / (n - 1) as f64).sqrt()
    }
}

/// Epidemic threshold `lambda_th = <k> / (<k^2> - <k>)`.
pub fn epidemic_threshold(g: &Graph) -> Result<f64> {
    let (k1, k2) = mean_degree_moments(g);
    if k2 <= k1 {
        return Err(Error::ThresholdUndefined);
    }
    Ok(k1 / (k2 - k1))
}

/// The top `max(1, floor(f_o * N))` nodes of a ranking.
pub fn select_seed_set(ranking: &ScoreVector, f_o: f64, g: &Graph) -> Result<Vec<usize>> {
    if !(f_o > 0.0 && f_o <= 1.0) {
        return Err(Error::InvalidConfig(format!("f_o must be in (0, 1], got {f_o}")));
    }
    debug_assert_eq!(ranking.ranking.len(), g.node_count());
    let count = seed_count(g.node_count(), f_o);
    Ok(ranking.ranking[..count].to_vec())
}

/// `max(1, floor(f_o * n))`, with a tiny nudge so grid fractions like 0.29
/// floor to their mathematical value.
pub(crate) fn seed_count(n: usize, f_o: f64) -> usize {
    (((f_o * n as f64) + 1e-9).floor() as usize).clamp(1, n)
}

const SUSCEPTIBLE: u8 = 0;
const INFECTIOUS: u8 = 1;
const RECOVERED: u8 = 2;
/// Infected this step; starts transmitting next step.
const FRESH: u8 = 3;

/// Run `cfg.runs` independent SIR simulations from the given seed set.
///
/// Dynamics per discrete step: every infectious node attempts to infect each
/// susceptible neighbor with probability `lambda` (synchronously: nodes
/// infected this step start infecting next step), then every node that was
/// infectious at step start recovers with probability `gamma`. A run ends
/// when no infectious node remains.
pub fn run_sir(g: &Graph, seeds: &[usize], cfg: &SirConfig) -> Result<SirOutcome> {
    cfg.validate()?;
    let mut seed_set: Vec<usize> = seeds.to_vec();
    seed_set.sort_unstable();
    seed_set.dedup();
    if seed_set.is_empty() {
        return Err(Error::InvalidConfig("seed set must not be empty".into()));
    }
    if seed_set.last().is_some_and(|&s| s >= g.node_count()) {
        return Err(Error::InvalidConfig("seed node out of range".into()));
    }

    let per_run_recovered: Vec<usize> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| single_run(g, &seed_set, cfg, run as u64, None))
        .collect::<Result<Vec<_>>>()?;

    Ok(SirOutcome { per_run_recovered, seed_set_size: seed_set.len() })
}

/// One simulation with the stream belonging to `run`. When `transitions` is
/// supplied, every state change is appended as `(node, from, to)`.
fn single_run(
    g: &Graph,
    seeds: &[usize],
    cfg: &SirConfig,
    run: u64,
    mut transitions: Option<&mut Vec<(usize, u8, u8)>>,
) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    rng.set_stream(run);

    let n = g.node_count();
    let mut state = vec![SUSCEPTIBLE; n];
    let mut infectious = seeds.to_vec(); // kept sorted for a fixed draw order
    for &s in seeds {
        state[s] = INFECTIOUS;
        if let Some(log) = transitions.as_deref_mut() {
            log.push((s, SUSCEPTIBLE, INFECTIOUS));
        }
    }
    let mut recovered = 0usize;

    for _ in 0..cfg.max_steps {
        if infectious.is_empty() {
            return Ok(recovered);
        }
        let mut fresh: Vec<usize> = Vec::new();
        for &u in &infectious {
            for &v in g.neighbors(u) {
                if state[v] == SUSCEPTIBLE && rng.gen::<f64>() < cfg.lambda {
                    state[v] = FRESH;
                    fresh.push(v);
                }
            }
        }
        let mut still_infectious: Vec<usize> = Vec::new();
        for &u in &infectious {
            if rng.gen::<f64>() < cfg.gamma {
                state[u] = RECOVERED;
                recovered += 1;
                if let Some(log) = transitions.as_deref_mut() {
                    log.push((u, INFECTIOUS, RECOVERED));
                }
            } else {
                still_infectious.push(u);
            }
        }
        for &v in &fresh {
            state[v] = INFECTIOUS;
            if let Some(log) = transitions.as_deref_mut() {
                log.push((v, SUSCEPTIBLE, INFECTIOUS));
            }
        }
        still_infectious.extend_from_slice(&fresh);
        still_infectious.sort_unstable();
        infectious = still_infectious;
    }
    Err(Error::StepCapExceeded { cap: cfg.max_steps })
}
