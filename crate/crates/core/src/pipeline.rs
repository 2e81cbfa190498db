//! End-to-end experiment orchestration: per-network correlation heatmaps,
//! cross-network heatmap Pearson, mixing-vs-mean-correlation regression,
//! outbreak-gain sweeps against the degree baseline, and LCC dismantling
//! curves, all emitted as machine-readable CSV plus a JSON manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::{
    compute_measure, CommUndefined, Measure, MeasureConfig, ScoreVector,
};
use crate::error::{Error, Result};
use crate::graph::{
    largest_connected_component, load_edge_list_path, mean_degree_moments, Graph, LoadOptions,
};
use crate::louvain::louvain_partition;
use crate::partition::{
    load_partition_path, mixing_parameter, modularity, strength_category, StrengthThresholds,
};
use crate::report::{format_value, write_csv, write_json};
use crate::sir::{epidemic_threshold, run_sir, select_seed_set, SirConfig};
use crate::stats::{kendall_tau_b, ols_regression, pearson, RegressionResult};

/// One network of an experiment: an edge list plus either a partition file
/// or a Louvain seed.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub id: String,
    pub graph_path: PathBuf,
    pub partition_path: Option<PathBuf>,
    pub louvain_seed: Option<u64>,
    pub lcc_only: bool,
    pub delimiter: Option<char>,
}

/// Declarative description of a full evaluation run.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub networks: Vec<NetworkSpec>,
    pub measures: Vec<Measure>,
    /// Seed fractions for the spreading experiments, strictly increasing in
    /// (0, 1].
    pub fo_grid: Vec<f64>,
    /// Removal fractions for dismantling curves; defaults to `fo_grid`.
    pub lcc_fractions: Option<Vec<f64>>,
    pub runs: usize,
    pub master_seed: u64,
    pub gamma: f64,
    pub max_steps: usize,
    /// Fixed infection probability; when absent the per-network epidemic
    /// threshold scaled by each multiplier is used.
    pub lambda: Option<f64>,
    pub lambda_multipliers: Vec<f64>,
    pub measure_config: MeasureConfig,
    pub strength: StrengthThresholds,
    pub output_dir: PathBuf,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            networks: Vec::new(),
            measures: Measure::DEFAULT_REPORT.to_vec(),
            fo_grid: default_fo_grid(),
            lcc_fractions: None,
            runs: 100,
            master_seed: 0,
            gamma: 1.0,
            max_steps: 1_000_000,
            lambda: None,
            lambda_multipliers: vec![1.0],
            measure_config: MeasureConfig::default(),
            strength: StrengthThresholds::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

/// 1%..50% in 1% steps.
pub fn default_fo_grid() -> Vec<f64> {
    (1..=50).map(|i| i as f64 / 100.0).collect()
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.networks.is_empty() {
            return Err(Error::InvalidConfig("experiment needs at least one network".into()));
        }
        let mut ids: Vec<&str> = self.networks.iter().map(|n| n.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.networks.len() {
            return Err(Error::InvalidConfig("network ids must be unique".into()));
        }
        for network in &self.networks {
            if network.partition_path.is_some() && network.louvain_seed.is_some() {
                return Err(Error::InvalidConfig(format!(
                    "network '{}': partition file and louvain seed are mutually exclusive",
                    network.id
                )));
            }
            if network.partition_path.is_none() && network.louvain_seed.is_none() {
                return Err(Error::InvalidConfig(format!(
                    "network '{}': supply a partition file or a louvain seed",
                    network.id
                )));
            }
        }
        if self.measures.is_empty() {
            return Err(Error::InvalidConfig("measure list must not be empty".into()));
        }
        check_fraction_grid(&self.fo_grid, "fo_grid", false)?;
        if let Some(fractions) = &self.lcc_fractions {
            check_fraction_grid(fractions, "lcc_fractions", true)?;
        }
        if let Some(lambda) = self.lambda {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(Error::InvalidConfig(format!("lambda must be in [0, 1], got {lambda}")));
            }
        }
        if self.lambda_multipliers.is_empty()
            || self.lambda_multipliers.iter().any(|&m| m <= 0.0 || m.is_nan())
        {
            return Err(Error::InvalidConfig("lambda multipliers must be positive".into()));
        }
        self.measure_config.validate()?;
        // strength thresholds were already range-checked at construction
        StrengthThresholds::new(self.strength.strong_max, self.strength.weak_min)?;
        self.sir_config(0.0).validate()?;
        Ok(())
    }

    fn sir_config(&self, lambda: f64) -> SirConfig {
        SirConfig {
            lambda,
            gamma: self.gamma,
            runs: self.runs,
            master_seed: self.master_seed,
            max_steps: self.max_steps,
        }
    }

    /// Parse the TOML experiment file format; see the project README for
    /// the field list. Paths are resolved relative to `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<ExperimentSpec> {
        let raw: RawExperiment = toml::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("experiment config: {e}")))?;
        raw.into_spec(base_dir)
    }
}

fn check_fraction_grid(grid: &[f64], name: &str, allow_bounds: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig(format!("{name} must not be empty")));
    }
    let in_range = |f: f64| {
        if allow_bounds {
            (0.0..=1.0).contains(&f)
        } else {
            f > 0.0 && f <= 1.0
        }
    };
    if !grid.iter().all(|&f| in_range(f)) {
        return Err(Error::InvalidConfig(format!("{name} values out of range")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    output_dir: Option<String>,
    measures: Option<RawMeasures>,
    fo_grid: Option<Vec<f64>>,
    lcc_fractions: Option<Vec<f64>>,
    runs: Option<usize>,
    master_seed: Option<u64>,
    gamma: Option<f64>,
    max_steps: Option<usize>,
    lambda: Option<f64>,
    lambda_multipliers: Option<Vec<f64>>,
    comm_r: Option<f64>,
    ks_delta: Option<f64>,
    comm_undefined: Option<String>,
    strong_max: Option<f64>,
    weak_min: Option<f64>,
    #[serde(default, rename = "network")]
    networks: Vec<RawNetwork>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawMeasures {
    All(String),
    List(Vec<String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    id: String,
    graph: String,
    partition: Option<String>,
    louvain_seed: Option<u64>,
    lcc_only: Option<bool>,
    delimiter: Option<String>,
}

impl RawExperiment {
    fn into_spec(self, base_dir: &Path) -> Result<ExperimentSpec> {
        let defaults = ExperimentSpec::default();
        let measures = match self.measures {
            None => defaults.measures.clone(),
            Some(RawMeasures::All(word)) if word == "all" => defaults.measures.clone(),
            Some(RawMeasures::All(word)) => {
                return Err(Error::InvalidConfig(format!(
                    "measures must be \"all\" or a list of ids, got \"{word}\""
                )))
            }
            Some(RawMeasures::List(ids)) => parse_measures(&ids)?,
        };
        let comm_undefined = match self.comm_undefined.as_deref() {
            None => CommUndefined::Skip,
            Some("skip") => CommUndefined::Skip,
            Some("zero-term") => CommUndefined::ZeroTerm,
            Some(other) => {
                return Err(Error::InvalidConfig(format!(
                    "comm_undefined must be 'skip' or 'zero-term', got '{other}'"
                )))
            }
        };
        let strength = StrengthThresholds::new(
            self.strong_max.unwrap_or(defaults.strength.strong_max),
            self.weak_min.unwrap_or(defaults.strength.weak_min),
        )?;
        let networks = self
            .networks
            .into_iter()
            .map(|raw| {
                let delimiter = match raw.delimiter {
                    None => None,
                    Some(s) if s.chars().count() == 1 => s.chars().next(),
                    Some(s) => {
                        return Err(Error::InvalidConfig(format!(
                            "network '{}': delimiter must be a single character, got '{s}'",
                            raw.id
                        )))
                    }
                };
                Ok(NetworkSpec {
                    id: raw.id,
                    graph_path: base_dir.join(raw.graph),
                    partition_path: raw.partition.map(|p| base_dir.join(p)),
                    louvain_seed: raw.louvain_seed,
                    lcc_only: raw.lcc_only.unwrap_or(false),
                    delimiter,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let spec = ExperimentSpec {
            networks,
            measures,
            fo_grid: self.fo_grid.unwrap_or_else(default_fo_grid),
            lcc_fractions: self.lcc_fractions,
            runs: self.runs.unwrap_or(defaults.runs),
            master_seed: self.master_seed.unwrap_or(defaults.master_seed),
            gamma: self.gamma.unwrap_or(defaults.gamma),
            max_steps: self.max_steps.unwrap_or(defaults.max_steps),
            lambda: self.lambda,
            lambda_multipliers: self.lambda_multipliers.unwrap_or_else(|| vec![1.0]),
            measure_config: MeasureConfig {
                comm_r: self.comm_r.unwrap_or(1.0),
                ks_delta: self.ks_delta.unwrap_or(0.5),
                comm_undefined,
            },
            strength,
            output_dir: base_dir.join(self.output_dir.unwrap_or_else(|| "out".into())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub fn parse_measures(ids: &[String]) -> Result<Vec<Measure>> {
    let mut measures = Vec::new();
    for id in ids {
        let m = Measure::parse(id)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown measure '{id}'")))?;
        if !measures.contains(&m) {
            measures.push(m);
        }
    }
    Ok(measures)
}

/// Symmetric tau-b matrix over one network's measure score vectors.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    pub network_id: String,
    pub measures: Vec<Measure>,
    pub values: Vec<Vec<f64>>,
}

impl CorrelationMatrix {
    /// Row-major strict upper triangle, the network's correlation vector.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let k = self.measures.len();
        let mut flat = Vec::with_capacity(k * (k - 1) / 2);
        for i in 0..k {
            for j in (i + 1)..k {
                flat.push(self.values[i][j]);
            }
        }
        flat
    }
}

/// Pairwise tau-b between the given score vectors.
pub fn correlation_heatmap(
    network_id: &str,
    scores: &[&ScoreVector],
) -> Result<CorrelationMatrix> {
    let k = scores.len();
    let mut values = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let tau = kendall_tau_b(&scores[i].scores, &scores[j].scores)?;
            values[i][j] = tau;
            values[j][i] = tau;
        }
    }
    Ok(CorrelationMatrix {
        network_id: network_id.to_string(),
        measures: scores.iter().map(|s| s.measure).collect(),
        values,
    })
}

/// Pearson correlation between every pair of flattened heatmap vectors.
/// All heatmaps must share one measure ordering.
pub fn cross_network_pearson(heatmaps: &[&CorrelationMatrix]) -> Result<Vec<Vec<f64>>> {
    if heatmaps.len() < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: heatmaps.len() });
    }
    let reference = &heatmaps[0].measures;
    for h in heatmaps {
        if &h.measures != reference {
            return Err(Error::InvalidConfig(format!(
                "heatmap for '{}' has a different measure ordering",
                h.network_id
            )));
        }
    }
    let vectors: Vec<Vec<f64>> = heatmaps.iter().map(|h| h.upper_triangle()).collect();
    let k = vectors.len();
    let mut matrix = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let rho = pearson(&vectors[i], &vectors[j]).map_err(|e| match e {
                Error::ZeroVariance { .. } => Error::ZeroVariance {
                    which: format!(
                        "correlation vector of network '{}' or '{}'",
                        heatmaps[i].network_id, heatmaps[j].network_id
                    ),
                },
                other => other,
            })?;
            matrix[i][j] = rho;
            matrix[j][i] = rho;
        }
    }
    Ok(matrix)
}

/// OLS of per-network mean correlation on the mixing parameter.
pub fn mu_regression_points(points: &[(f64, f64)]) -> Result<RegressionResult> {
    let mu: Vec<f64> = points.iter().map(|&(x, _)| x).collect();
    let mean_tau: Vec<f64> = points.iter().map(|&(_, y)| y).collect();
    ols_regression(&mu, &mean_tau)
}

/// One outbreak-gain curve: a measure against the degree baseline across the
/// seed-fraction grid at one infection rate.
#[derive(Debug, Clone)]
pub struct DeltaRCurve {
    pub network_id: String,
    pub measure: Measure,
    pub lambda_multiplier: f64,
    pub lambda: f64,
    pub points: Vec<DeltaRPoint>,
}

#[derive(Debug, Clone)]
pub struct DeltaRPoint {
    pub f_o: f64,
    /// `(R_c - R_b) / R_b`; `None` only if the baseline outbreak were 0,
    /// which cannot happen while seeds recover.
    pub delta_r: Option<f64>,
    pub mean_measure: f64,
    pub mean_baseline: f64,
    pub std_measure: f64,
}

/// Sweep the seed-fraction grid for every measure ranking, pairing each
/// measure with a degree baseline that reuses the identical per-run RNG
/// streams.
pub fn delta_r_sweep(
    network_id: &str,
    g: &Graph,
    baseline: &ScoreVector,
    rankings: &[&ScoreVector],
    fo_grid: &[f64],
    lambda_multiplier: f64,
    cfg: &SirConfig,
) -> Result<Vec<DeltaRCurve>> {
    let baselines: Vec<(f64, f64)> = fo_grid
        .par_iter()
        .map(|&f_o| {
            let seeds = select_seed_set(baseline, f_o, g)?;
            let outcome = run_sir(g, &seeds, cfg)?;
            Ok((outcome.mean_recovered(), outcome.std_recovered()))
        })
        .collect::<Result<Vec<_>>>()?;

    let tasks: Vec<(usize, usize)> = (0..rankings.len())
        .flat_map(|m| (0..fo_grid.len()).map(move |f| (m, f)))
        .collect();
    let cells: Vec<DeltaRPoint> = tasks
        .par_iter()
        .map(|&(m, f)| {
            let f_o = fo_grid[f];
            let seeds = select_seed_set(rankings[m], f_o, g)?;
            let outcome = run_sir(g, &seeds, cfg)?;
            let mean_measure = outcome.mean_recovered();
            let (mean_baseline, _) = baselines[f];
            let delta_r = if mean_baseline > 0.0 {
                Some((mean_measure - mean_baseline) / mean_baseline)
            } else {
                log::warn!(
                    "network {network_id}: baseline outbreak is 0 at f_o={f_o}; emitting null"
                );
                None
            };
            Ok(DeltaRPoint {
                f_o,
                delta_r,
                mean_measure,
                mean_baseline,
                std_measure: outcome.std_recovered(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut curves = Vec::with_capacity(rankings.len());
    for (m, ranking) in rankings.iter().enumerate() {
        curves.push(DeltaRCurve {
            network_id: network_id.to_string(),
            measure: ranking.measure,
            lambda_multiplier,
            lambda: cfg.lambda,
            points: cells[m * fo_grid.len()..(m + 1) * fo_grid.len()].to_vec(),
        });
    }
    Ok(curves)
}

/// LCC sizes after removing the top `floor(f * N)` nodes of each static
/// ranking, for every fraction.
#[derive(Debug, Clone)]
pub struct LccCurve {
    pub network_id: String,
    pub measure: Measure,
    pub points: Vec<(f64, usize)>,
}

pub fn lcc_dismantling(
    network_id: &str,
    g: &Graph,
    rankings: &[&ScoreVector],
    fractions: &[f64],
) -> Vec<LccCurve> {
    let n = g.node_count();
    rankings
        .iter()
        .map(|ranking| {
            let points = fractions
                .iter()
                .map(|&f| {
                    let count = (((f * n as f64) + 1e-9).floor() as usize).min(n);
                    let removed: std::collections::HashSet<usize> =
                        ranking.ranking[..count].iter().copied().collect();
                    (f, largest_connected_component(g, &removed))
                })
                .collect();
            LccCurve {
                network_id: network_id.to_string(),
                measure: ranking.measure,
                points,
            }
        })
        .collect()
}

/// A (network, measure) cell that could not be computed, and why.
#[derive(Debug, Clone, Serialize)]
pub struct SkipRecord {
    pub network: String,
    pub stage: String,
    pub measure: String,
    pub reason: String,
}

#[derive(Debug, Serialize)]
pub struct NetworkSummary {
    pub id: String,
    pub nodes: usize,
    pub edges: usize,
    pub mean_degree: f64,
    pub mean_degree_squared: f64,
    pub epidemic_threshold: Option<f64>,
    pub mixing_parameter: f64,
    pub modularity: f64,
    pub communities: usize,
    pub strength: String,
    pub mean_tau_non_mv: Option<f64>,
    pub duplicate_edges_dropped: usize,
    pub self_loops_dropped: usize,
    pub partition_source: String,
}

#[derive(Debug, Serialize)]
pub struct MuRegressionSummary {
    pub slope: f64,
    pub intercept: f64,
    pub p_value: f64,
    pub r_squared: f64,
    pub n_networks: usize,
}

/// Run report written as `manifest.json`. Timings are wall-clock and are the
/// only non-reproducible content; every CSV data file is byte-identical
/// across reruns and thread counts.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub master_seed: u64,
    pub runs: usize,
    pub gamma: f64,
    pub lambda: Option<f64>,
    pub lambda_multipliers: Vec<f64>,
    pub measures: Vec<String>,
    pub fo_grid: Vec<f64>,
    pub networks: Vec<NetworkSummary>,
    pub mu_regression: Option<MuRegressionSummary>,
    pub degree_delta_r_identically_zero: bool,
    pub skips: Vec<SkipRecord>,
    pub outputs: Vec<String>,
    pub timings_ms: BTreeMap<String, u128>,
}

struct NetworkAnalysis {
    summary: NetworkSummary,
    heatmap: Option<CorrelationMatrix>,
    delta_r: Vec<DeltaRCurve>,
    lcc: Vec<LccCurve>,
    skips: Vec<SkipRecord>,
    duration_ms: u128,
}

/// Execute the full experiment and write all outputs under
/// `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Manifest> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.output_dir)?;
    let started = Instant::now();

    let analyses: Vec<NetworkAnalysis> = spec
        .networks
        .par_iter()
        .map(|network| process_network(network, spec))
        .collect::<Result<Vec<_>>>()?;

    let mut outputs = Vec::new();
    let mut skips = Vec::new();
    let mut timings = BTreeMap::new();
    let mut degree_zero = true;

    for analysis in &analyses {
        let id = &analysis.summary.id;
        if let Some(heatmap) = &analysis.heatmap {
            let path = spec.output_dir.join(format!("heatmap_{id}.csv"));
            write_heatmap_csv(&path, heatmap)?;
            outputs.push(file_name(&path));
        }
        if !analysis.delta_r.is_empty() {
            let path = spec.output_dir.join(format!("deltaR_{id}.csv"));
            write_delta_r_csv(&path, &analysis.delta_r)?;
            outputs.push(file_name(&path));
        }
        if !analysis.lcc.is_empty() {
            let path = spec.output_dir.join(format!("lcc_{id}.csv"));
            write_lcc_csv(&path, &analysis.lcc)?;
            outputs.push(file_name(&path));
        }
        for curve in &analysis.delta_r {
            if curve.measure == Measure::Degree {
                degree_zero &= curve.points.iter().all(|p| p.delta_r == Some(0.0));
            }
        }
        skips.extend(analysis.skips.iter().cloned());
        timings.insert(format!("network::{id}"), analysis.duration_ms);
    }
    debug_assert!(degree_zero, "degree baseline must match itself exactly");

    // Cross-network analyses need a shared measure ordering; restrict every
    // heatmap to the measures computed on all networks.
    let heatmaps: Vec<&CorrelationMatrix> =
        analyses.iter().filter_map(|a| a.heatmap.as_ref()).collect();
    if heatmaps.len() >= 2 {
        let common = common_measures(&heatmaps);
        if common.len() >= 2 {
            let reduced: Vec<CorrelationMatrix> =
                heatmaps.iter().map(|h| restrict_heatmap(h, &common)).collect();
            let refs: Vec<&CorrelationMatrix> = reduced.iter().collect();
            match cross_network_pearson(&refs) {
                Ok(matrix) => {
                    let path = spec.output_dir.join("cross_network_pearson.csv");
                    let ids: Vec<String> =
                        reduced.iter().map(|h| h.network_id.clone()).collect();
                    write_square_csv(&path, "network", &ids, &matrix)?;
                    outputs.push(file_name(&path));
                }
                Err(e) => skips.push(SkipRecord {
                    network: "*".into(),
                    stage: "cross_network_pearson".into(),
                    measure: "*".into(),
                    reason: e.to_string(),
                }),
            }
        } else {
            skips.push(SkipRecord {
                network: "*".into(),
                stage: "cross_network_pearson".into(),
                measure: "*".into(),
                reason: "fewer than two measures shared across all heatmaps".into(),
            });
        }
    }

    let points: Vec<(f64, f64)> = analyses
        .iter()
        .filter_map(|a| {
            a.summary.mean_tau_non_mv.map(|tau| (a.summary.mixing_parameter, tau))
        })
        .collect();
    let mu_regression = if points.len() >= 3 {
        match mu_regression_points(&points) {
            Ok(fit) => {
                let path = spec.output_dir.join("mu_regression.csv");
                write_csv(
                    &path,
                    &["slope".into(), "intercept".into(), "p_value".into(), "r_squared".into(), "n_networks".into()],
                    &[vec![
                        format_value(fit.slope),
                        format_value(fit.intercept),
                        format_value(fit.p_value),
                        format_value(fit.r_squared),
                        fit.n.to_string(),
                    ]],
                )?;
                outputs.push(file_name(&path));
                Some(MuRegressionSummary {
                    slope: fit.slope,
                    intercept: fit.intercept,
                    p_value: fit.p_value,
                    r_squared: fit.r_squared,
                    n_networks: fit.n,
                })
            }
            Err(e) => {
                skips.push(SkipRecord {
                    network: "*".into(),
                    stage: "mu_regression".into(),
                    measure: "*".into(),
                    reason: e.to_string(),
                });
                None
            }
        }
    } else {
        None
    };

    timings.insert("total".into(), started.elapsed().as_millis());
    let manifest = Manifest {
        tool: "commspread".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        master_seed: spec.master_seed,
        runs: spec.runs,
        gamma: spec.gamma,
        lambda: spec.lambda,
        lambda_multipliers: spec.lambda_multipliers.clone(),
        measures: spec.measures.iter().map(|m| m.id().to_string()).collect(),
        fo_grid: spec.fo_grid.clone(),
        networks: analyses.into_iter().map(|a| a.summary).collect(),
        mu_regression,
        degree_delta_r_identically_zero: degree_zero,
        skips,
        outputs,
        timings_ms: timings,
    };
    write_json(&spec.output_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
}

fn process_network(network: &NetworkSpec, spec: &ExperimentSpec) -> Result<NetworkAnalysis> {
    let started = Instant::now();
    let id = network.id.clone();
    let options =
        LoadOptions { lcc_only: network.lcc_only, delimiter: network.delimiter };
    let loaded = load_edge_list_path(&network.graph_path, &options)?;
    let g = loaded.graph;

    let (partition, partition_source) = match &network.partition_path {
        Some(path) => (load_partition_path(path, &g)?, path.to_string_lossy().into_owned()),
        None => {
            let seed = network.louvain_seed.expect("validated");
            let outcome = louvain_partition(&g, seed);
            (outcome.partition, format!("louvain(seed={seed})"))
        }
    };

    let (k1, k2) = mean_degree_moments(&g);
    let lambda_th = epidemic_threshold(&g).ok();
    let mu = mixing_parameter(&g, &partition)?;
    let q = modularity(&g, &partition)?;
    let strength = strength_category(mu, &spec.strength);

    let mut skips: Vec<SkipRecord> = Vec::new();

    // Degree is always computed as the spreading baseline.
    let mut wanted: Vec<Measure> = vec![Measure::Degree];
    wanted.extend(spec.measures.iter().copied().filter(|&m| m != Measure::Degree));
    let computed: Vec<(Measure, Result<ScoreVector>)> = wanted
        .par_iter()
        .map(|&m| (m, compute_measure(m, &g, &partition, &spec.measure_config)))
        .collect();
    let mut scores: Vec<ScoreVector> = Vec::new();
    for (measure, result) in computed {
        match result {
            Ok(sv) => scores.push(sv),
            Err(e) => skips.push(SkipRecord {
                network: id.clone(),
                stage: "centrality".into(),
                measure: measure.id().into(),
                reason: e.to_string(),
            }),
        }
    }
    let by_measure = |m: Measure| scores.iter().find(|s| s.measure == m);

    // Correlation heatmap over the community-aware measures, canonical order.
    let mut heatmap_scores: Vec<&ScoreVector> = Vec::new();
    for m in Measure::COMMUNITY_AWARE {
        if !spec.measures.contains(&m) {
            continue;
        }
        let Some(sv) = by_measure(m) else { continue };
        if sv.scores.iter().all(|&v| v == sv.scores[0]) {
            skips.push(SkipRecord {
                network: id.clone(),
                stage: "correlation".into(),
                measure: m.id().into(),
                reason: "constant scores: tau undefined".into(),
            });
            continue;
        }
        heatmap_scores.push(sv);
    }
    let heatmap = if heatmap_scores.len() >= 2 {
        Some(correlation_heatmap(&id, &heatmap_scores)?)
    } else {
        skips.push(SkipRecord {
            network: id.clone(),
            stage: "correlation".into(),
            measure: "*".into(),
            reason: "fewer than two community-aware measures available".into(),
        });
        None
    };
    let mean_tau_non_mv = heatmap.as_ref().and_then(mean_tau_excluding_vitality);

    // Outbreak sweeps: one lambda per multiplier (or a fixed lambda).
    let baseline = by_measure(Measure::Degree).expect("degree always computes");
    let rankings: Vec<&ScoreVector> = scores.iter().collect();
    let mut delta_r = Vec::new();
    let lambdas: Vec<(f64, f64)> = match (spec.lambda, lambda_th) {
        (Some(fixed), _) => vec![(1.0, fixed)],
        (None, Some(th)) => spec
            .lambda_multipliers
            .iter()
            .map(|&mult| {
                let lambda = (th * mult).min(1.0);
                if th * mult > 1.0 {
                    log::warn!("network {id}: lambda {mult} x {th} clamped to 1.0");
                }
                (mult, lambda)
            })
            .collect(),
        (None, None) => {
            skips.push(SkipRecord {
                network: id.clone(),
                stage: "sir".into(),
                measure: "*".into(),
                reason: "epidemic threshold undefined".into(),
            });
            Vec::new()
        }
    };
    for &(multiplier, lambda) in &lambdas {
        let cfg = spec.sir_config(lambda);
        delta_r.extend(delta_r_sweep(
            &id,
            &g,
            baseline,
            &rankings,
            &spec.fo_grid,
            multiplier,
            &cfg,
        )?);
    }

    let lcc_fractions = spec.lcc_fractions.clone().unwrap_or_else(|| spec.fo_grid.clone());
    let lcc = lcc_dismantling(&id, &g, &rankings, &lcc_fractions);

    let summary = NetworkSummary {
        id,
        nodes: g.node_count(),
        edges: g.edge_count(),
        mean_degree: k1,
        mean_degree_squared: k2,
        epidemic_threshold: lambda_th,
        mixing_parameter: mu,
        modularity: q,
        communities: partition.community_count(),
        strength: strength.as_str().into(),
        mean_tau_non_mv,
        duplicate_edges_dropped: loaded.duplicate_edges,
        self_loops_dropped: loaded.self_loops,
        partition_source,
    };
    Ok(NetworkAnalysis {
        summary,
        heatmap,
        delta_r,
        lcc,
        skips,
        duration_ms: started.elapsed().as_millis(),
    })
}

/// Mean of the heatmap entries over pairs of the six community-aware
/// measures other than Modularity Vitality.
fn mean_tau_excluding_vitality(heatmap: &CorrelationMatrix) -> Option<f64> {
    let keep: Vec<usize> = heatmap
        .measures
        .iter()
        .enumerate()
        .filter(|(_, m)| {
            !matches!(m, Measure::ModularityVitalityHubs | Measure::ModularityVitalityBridges)
        })
        .map(|(i, _)| i)
        .collect();
    if keep.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (a, &i) in keep.iter().enumerate() {
        for &j in &keep[(a + 1)..] {
            total += heatmap.values[i][j];
            count += 1;
        }
    }
    Some(total / count as f64)
}

fn common_measures(heatmaps: &[&CorrelationMatrix]) -> Vec<Measure> {
    Measure::COMMUNITY_AWARE
        .into_iter()
        .filter(|m| heatmaps.iter().all(|h| h.measures.contains(m)))
        .collect()
}

fn restrict_heatmap(heatmap: &CorrelationMatrix, measures: &[Measure]) -> CorrelationMatrix {
    let indices: Vec<usize> = measures
        .iter()
        .map(|m| heatmap.measures.iter().position(|x| x == m).expect("common measure"))
        .collect();
    let values = indices
        .iter()
        .map(|&i| indices.iter().map(|&j| heatmap.values[i][j]).collect())
        .collect();
    CorrelationMatrix {
        network_id: heatmap.network_id.clone(),
        measures: measures.to_vec(),
        values,
    }
}

fn write_heatmap_csv(path: &Path, heatmap: &CorrelationMatrix) -> Result<()> {
    let ids: Vec<String> = heatmap.measures.iter().map(|m| m.id().to_string()).collect();
    write_square_csv(path, "measure", &ids, &heatmap.values)
}

fn write_square_csv(
    path: &Path,
    corner: &str,
    ids: &[String],
    values: &[Vec<f64>],
) -> Result<()> {
    let mut header = vec![corner.to_string()];
    header.extend(ids.iter().cloned());
    let rows: Vec<Vec<String>> = ids
        .iter()
        .zip(values)
        .map(|(id, row)| {
            let mut out = vec![id.clone()];
            out.extend(row.iter().map(|&v| format_value(v)));
            out
        })
        .collect();
    write_csv(path, &header, &rows)
}

fn write_delta_r_csv(path: &Path, curves: &[DeltaRCurve]) -> Result<()> {
    let header: Vec<String> = [
        "lambda_multiplier",
        "lambda",
        "measure",
        "fo",
        "delta_r",
        "mean_r_measure",
        "mean_r_baseline",
        "std_r_measure",
    ]
    .map(String::from)
    .to_vec();
    let mut rows = Vec::new();
    for curve in curves {
        for point in &curve.points {
            rows.push(vec![
                format_value(curve.lambda_multiplier),
                format_value(curve.lambda),
                curve.measure.id().to_string(),
                format_value(point.f_o),
                point.delta_r.map(format_value).unwrap_or_default(),
                format_value(point.mean_measure),
                format_value(point.mean_baseline),
                format_value(point.std_measure),
            ]);
        }
    }
    write_csv(path, &header, &rows)
}

fn write_lcc_csv(path: &Path, curves: &[LccCurve]) -> Result<()> {
    let mut header = vec!["fraction".to_string()];
    header.extend(curves.iter().map(|c| format!("lcc_{}", c.measure.id())));
    let fractions: Vec<f64> = curves[0].points.iter().map(|&(f, _)| f).collect();
    let rows: Vec<Vec<String>> = fractions
        .iter()
        .enumerate()
        .map(|(row, &f)| {
            let mut out = vec![format_value(f)];
            out.extend(curves.iter().map(|c| c.points[row].1.to_string()));
            out
        })
        .collect();
    write_csv(path, &header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{community_based_centrality, degree_centrality};
    use crate::partition::Partition;
    use std::io::Write;

    fn fixture() -> (Graph, Partition) {
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]);
        let p = Partition::from_assignment(&g, &[0, 0, 0, 1, 1, 1]);
        (g, p)
    }

    #[test]
    fn heatmap_diagonal_is_one_and_symmetric() {
        let (g, p) = fixture();
        let cfg = MeasureConfig::default();
        let scores: Vec<ScoreVector> = [
            Measure::CommunityHubBridge,
            Measure::ParticipationCoefficient,
            Measure::CommunityBasedCentrality,
        ]
        .iter()
        .map(|&m| compute_measure(m, &g, &p, &cfg).unwrap())
        .collect();
        let refs: Vec<&ScoreVector> = scores.iter().collect();
        let heatmap = correlation_heatmap("fixture", &refs).unwrap();
        for i in 0..3 {
            assert_eq!(heatmap.values[i][i], 1.0);
            for j in 0..3 {
                assert_eq!(heatmap.values[i][j], heatmap.values[j][i]);
            }
        }
    }

    #[test]
    fn heatmap_cbc_vs_degree_is_one_on_fixture() {
        // With two equal-size communities CBC is proportional to degree.
        let (g, p) = fixture();
        let degree = degree_centrality(&g);
        let cbc = community_based_centrality(&g, &p);
        let heatmap = correlation_heatmap("fixture", &[&degree, &cbc]).unwrap();
        assert_eq!(heatmap.values[0][1], 1.0);
    }

    #[test]
    fn heatmap_matrix_matches_independent_recomputation() {
        let (g, p) = crate::synth::planted_partition(&[12, 12, 12], 0.5, 0.08, 3);
        let cfg = MeasureConfig::default();
        let scores: Vec<ScoreVector> = Measure::COMMUNITY_AWARE
            .iter()
            .filter_map(|&m| compute_measure(m, &g, &p, &cfg).ok())
            .collect();
        let refs: Vec<&ScoreVector> = scores.iter().collect();
        let heatmap = correlation_heatmap("bench", &refs).unwrap();
        for i in 0..refs.len() {
            for j in 0..refs.len() {
                if i != j {
                    let direct = kendall_tau_b(&refs[i].scores, &refs[j].scores).unwrap();
                    assert_eq!(heatmap.values[i][j], direct);
                }
            }
        }
    }

    #[test]
    fn cross_network_pearson_identity_and_composition() {
        let (g, p) = crate::synth::planted_partition(&[12, 12], 0.55, 0.1, 21);
        let cfg = MeasureConfig::default();
        let scores: Vec<ScoreVector> = Measure::COMMUNITY_AWARE
            .iter()
            .map(|&m| compute_measure(m, &g, &p, &cfg).unwrap())
            .collect();
        let refs: Vec<&ScoreVector> = scores.iter().collect();
        let a = correlation_heatmap("a", &refs).unwrap();
        let mut b = correlation_heatmap("b", &refs).unwrap();
        // identical networks correlate perfectly
        let matrix = cross_network_pearson(&[&a, &b]).unwrap();
        assert_eq!(matrix[0][1], 1.0);

        // flipping the sign of the vitality row changes the vector but the
        // matrix still equals direct pearson over the flat vectors
        for j in 0..b.measures.len() {
            let i = 4; // mv_plus position in COMMUNITY_AWARE
            if i != j {
                b.values[i][j] = -b.values[i][j];
                b.values[j][i] = b.values[i][j];
            }
        }
        let matrix = cross_network_pearson(&[&a, &b]).unwrap();
        let direct = pearson(&a.upper_triangle(), &b.upper_triangle()).unwrap();
        assert_eq!(matrix[0][1], direct);
        assert!(matrix[0][1] < 1.0);
    }

    #[test]
    fn cross_network_pearson_rejects_mismatched_orderings() {
        let (g, p) = fixture();
        let cfg = MeasureConfig::default();
        let chb = compute_measure(Measure::CommunityHubBridge, &g, &p, &cfg).unwrap();
        let pc = compute_measure(Measure::ParticipationCoefficient, &g, &p, &cfg).unwrap();
        let cbm = compute_measure(Measure::CommunityBasedMediator, &g, &p, &cfg).unwrap();
        let a = correlation_heatmap("a", &[&chb, &pc]).unwrap();
        let b = correlation_heatmap("b", &[&chb, &cbm]).unwrap();
        assert!(cross_network_pearson(&[&a, &b]).is_err());
        assert!(cross_network_pearson(&[&a]).is_err());
    }

    #[test]
    fn mu_regression_recovers_exact_affine_relation() {
        let points: Vec<(f64, f64)> =
            (0..10).map(|i| i as f64 / 20.0).map(|mu| (mu, 0.6 * mu + 0.1)).collect();
        let fit = mu_regression_points(&points).unwrap();
        assert!((fit.slope - 0.6).abs() < 1e-12);
        assert!((fit.intercept - 0.1).abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
        assert_eq!(fit.p_value, 0.0);
    }

    #[test]
    fn mu_regression_constant_response_is_flat() {
        let points = vec![(0.1, 0.3), (0.2, 0.3), (0.4, 0.3)];
        let fit = mu_regression_points(&points).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn delta_r_zero_under_no_transmission() {
        let (g, p) = fixture();
        let cfg = MeasureConfig::default();
        let degree = degree_centrality(&g);
        let chb = compute_measure(Measure::CommunityHubBridge, &g, &p, &cfg).unwrap();
        let sir = SirConfig { runs: 32, ..SirConfig::new(0.0, 11) };
        let curves =
            delta_r_sweep("fixture", &g, &degree, &[&degree, &chb], &[0.2, 0.5], 1.0, &sir)
                .unwrap();
        for curve in curves {
            for point in curve.points {
                assert_eq!(point.delta_r, Some(0.0));
            }
        }
    }

    #[test]
    fn delta_r_degree_vs_itself_exactly_zero() {
        let (g, _) = fixture();
        let degree = degree_centrality(&g);
        let sir = SirConfig { runs: 64, ..SirConfig::new(0.5, 23) };
        let curves =
            delta_r_sweep("fixture", &g, &degree, &[&degree], &[0.17, 0.34, 1.0], 1.0, &sir)
                .unwrap();
        for point in &curves[0].points {
            assert_eq!(point.delta_r, Some(0.0));
            assert_eq!(point.mean_measure, point.mean_baseline);
        }
    }

    #[test]
    fn delta_r_full_seeding_is_zero_for_every_measure() {
        let (g, p) = fixture();
        let cfg = MeasureConfig::default();
        let degree = degree_centrality(&g);
        let ksc = compute_measure(Measure::KShellWithCommunity, &g, &p, &cfg).unwrap();
        let sir = SirConfig { runs: 16, ..SirConfig::new(0.7, 2) };
        let curves = delta_r_sweep("fixture", &g, &degree, &[&ksc], &[1.0], 1.0, &sir).unwrap();
        assert_eq!(curves[0].points[0].delta_r, Some(0.0));
    }

    #[test]
    fn lcc_dismantling_endpoints_and_fixture_case() {
        let (g, _) = fixture();
        let degree = degree_centrality(&g);
        let curves = lcc_dismantling("fixture", &g, &[&degree], &[0.0, 1.0 / 3.0, 1.0]);
        let points = &curves[0].points;
        assert_eq!(points[0].1, 6); // nothing removed
        // top-2 by (degree desc, index asc) is {2, 3}: the bridge endpoints
        assert_eq!(points[1].1, 2);
        assert_eq!(points[2].1, 0); // everything removed
    }

    #[test]
    fn lcc_curves_monotone_non_increasing() {
        let (g, p) = crate::synth::planted_partition(&[15, 15], 0.4, 0.1, 77);
        let cfg = MeasureConfig::default();
        let fractions: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        for m in [Measure::Degree, Measure::CommunityBasedMediator] {
            let sv = compute_measure(m, &g, &p, &cfg).unwrap();
            let curves = lcc_dismantling("pp", &g, &[&sv], &fractions);
            let sizes: Vec<usize> = curves[0].points.iter().map(|&(_, s)| s).collect();
            assert!(sizes.windows(2).all(|w| w[1] <= w[0]), "{sizes:?}");
        }
    }

    fn write_fixture_files(dir: &Path) -> (PathBuf, PathBuf) {
        let graph_path = dir.join("fixture.edges");
        let partition_path = dir.join("fixture.part");
        let mut f = std::fs::File::create(&graph_path).unwrap();
        writeln!(f, "0 1\n0 2\n1 2\n3 4\n3 5\n4 5\n2 3").unwrap();
        let mut f = std::fs::File::create(&partition_path).unwrap();
        writeln!(f, "0 a\n1 a\n2 a\n3 b\n4 b\n5 b").unwrap();
        (graph_path, partition_path)
    }

    fn tiny_spec(dir: &Path) -> ExperimentSpec {
        let (graph_path, partition_path) = write_fixture_files(dir);
        let (g2, _) = crate::synth::planted_partition(&[10, 10], 0.6, 0.15, 5);
        let graph2 = dir.join("pp.edges");
        let mut f = std::fs::File::create(&graph2).unwrap();
        for (u, v) in g2.edges() {
            writeln!(f, "{u} {v}").unwrap();
        }
        ExperimentSpec {
            networks: vec![
                NetworkSpec {
                    id: "fixture".into(),
                    graph_path,
                    partition_path: Some(partition_path),
                    louvain_seed: None,
                    lcc_only: false,
                    delimiter: None,
                },
                NetworkSpec {
                    id: "pp".into(),
                    graph_path: graph2,
                    partition_path: None,
                    louvain_seed: Some(3),
                    lcc_only: true,
                    delimiter: None,
                },
            ],
            fo_grid: vec![0.1, 0.3, 0.5],
            runs: 20,
            master_seed: 99,
            output_dir: dir.join("out"),
            ..ExperimentSpec::default()
        }
    }

    #[test]
    fn run_experiment_writes_expected_files() {
        let dir = tempfile::tempdir().unwrap();
        let spec = tiny_spec(dir.path());
        let manifest = run_experiment(&spec).unwrap();
        assert!(manifest.degree_delta_r_identically_zero);
        assert_eq!(manifest.networks.len(), 2);
        for name in ["heatmap_fixture.csv", "deltaR_fixture.csv", "lcc_fixture.csv",
                     "heatmap_pp.csv", "deltaR_pp.csv", "lcc_pp.csv",
                     "cross_network_pearson.csv"] {
            assert!(
                spec.output_dir.join(name).exists(),
                "missing output {name}; manifest outputs: {:?}",
                manifest.outputs
            );
        }
        assert!(spec.output_dir.join("manifest.json").exists());
        // two networks only: no regression row
        assert!(manifest.mu_regression.is_none());
        // fixture mixing parameter from the file-loaded partition
        assert!((manifest.networks[0].mixing_parameter - 2.0 / 14.0).abs() < 1e-12);
    }

    #[test]
    fn csv_outputs_identical_across_thread_counts() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let mut spec_a = tiny_spec(dir_a.path());
        let mut spec_b = tiny_spec(dir_b.path());
        spec_a.output_dir = dir_a.path().join("out");
        spec_b.output_dir = dir_b.path().join("out");

        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        single.install(|| run_experiment(&spec_a)).unwrap();
        run_experiment(&spec_b).unwrap();

        let mut names: Vec<String> = std::fs::read_dir(&spec_a.output_dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n.ends_with(".csv"))
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let a = std::fs::read(spec_a.output_dir.join(&name)).unwrap();
            let b = std::fs::read(spec_b.output_dir.join(&name)).unwrap();
            assert_eq!(a, b, "file {name} differs between thread counts");
        }
    }

    #[test]
    fn toml_round_trip_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        write_fixture_files(dir.path());
        let text = r#"
            output_dir = "results"
            measures = ["degree", "chb", "mv_plus"]
            fo_grid = [0.1, 0.2]
            runs = 10
            master_seed = 7
            comm_undefined = "zero-term"

            [[network]]
            id = "fixture"
            graph = "fixture.edges"
            partition = "fixture.part"
        "#;
        let spec = ExperimentSpec::from_toml_str(text, dir.path()).unwrap();
        assert_eq!(spec.runs, 10);
        assert_eq!(spec.measures.len(), 3);
        assert_eq!(spec.measure_config.comm_undefined, CommUndefined::ZeroTerm);
        assert_eq!(spec.networks[0].graph_path, dir.path().join("fixture.edges"));

        let bad = r#"
            fo_grid = [0.2, 0.1]
            [[network]]
            id = "x"
            graph = "fixture.edges"
            partition = "fixture.part"
        "#;
        assert!(ExperimentSpec::from_toml_str(bad, dir.path()).is_err());

        let unknown_key = r#"
            runz = 10
            [[network]]
            id = "x"
            graph = "fixture.edges"
            partition = "fixture.part"
        "#;
        assert!(ExperimentSpec::from_toml_str(unknown_key, dir.path()).is_err());
    }
}
