//! The seven community-aware centrality measures plus the degree baseline,
//! each a pure function of `(Graph, Partition, MeasureConfig)` returning
//! per-node scores with a deterministic ranking.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kshell::shell_numbers;
use crate::partition::{modularity, Partition};

/// Identifier of one scoring scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    /// Total degree, the comparison baseline.
    Degree,
    /// Community Hub-Bridge: community-size-weighted intra links plus
    /// neighbor-community-count-weighted inter links.
    CommunityHubBridge,
    /// Participation Coefficient: evenness of links across communities.
    ParticipationCoefficient,
    /// Community-based Mediator: entropy of the intra/inter link split,
    /// scaled by normalized degree.
    CommunityBasedMediator,
    /// Comm Centrality: bridge-favoring mix of normalized intra and
    /// squared normalized inter contributions.
    CommCentrality,
    /// Modularity Vitality ranked hubs-first (signed value descending).
    ModularityVitalityHubs,
    /// Modularity Vitality ranked bridges-first (signed value ascending).
    ModularityVitalityBridges,
    /// Community-based Centrality: links weighted by target community size.
    CommunityBasedCentrality,
    /// K-shell with Community: blended shells of the intra- and inter-link
    /// subgraphs.
    KShellWithCommunity,
}

impl Measure {
    /// Stable identifier used in CSV headers and CLI flags.
    pub fn id(self) -> &'static str {
        match self {
            Measure::Degree => "degree",
            Measure::CommunityHubBridge => "chb",
            Measure::ParticipationCoefficient => "pc",
            Measure::CommunityBasedMediator => "cbm",
            Measure::CommCentrality => "comm",
            Measure::ModularityVitalityHubs => "mv_plus",
            Measure::ModularityVitalityBridges => "mv_minus",
            Measure::CommunityBasedCentrality => "cbc",
            Measure::KShellWithCommunity => "ksc",
        }
    }

    pub fn parse(token: &str) -> Option<Measure> {
        Measure::ALL.into_iter().find(|m| m.id() == token)
    }

    pub const ALL: [Measure; 9] = [
        Measure::Degree,
        Measure::CommunityHubBridge,
        Measure::ParticipationCoefficient,
        Measure::CommunityBasedMediator,
        Measure::CommCentrality,
        Measure::ModularityVitalityHubs,
        Measure::ModularityVitalityBridges,
        Measure::CommunityBasedCentrality,
        Measure::KShellWithCommunity,
    ];

    /// The seven community-aware measures compared in correlation heatmaps.
    /// The bridges-first vitality variant is excluded from default reports.
    pub const COMMUNITY_AWARE: [Measure; 7] = [
        Measure::CommunityHubBridge,
        Measure::ParticipationCoefficient,
        Measure::CommunityBasedMediator,
        Measure::CommCentrality,
        Measure::ModularityVitalityHubs,
        Measure::CommunityBasedCentrality,
        Measure::KShellWithCommunity,
    ];

    /// Degree baseline plus the seven community-aware measures.
    pub const DEFAULT_REPORT: [Measure; 8] = [
        Measure::Degree,
        Measure::CommunityHubBridge,
        Measure::ParticipationCoefficient,
        Measure::CommunityBasedMediator,
        Measure::CommCentrality,
        Measure::ModularityVitalityHubs,
        Measure::CommunityBasedCentrality,
        Measure::KShellWithCommunity,
    ];
}

/// What to do when Comm Centrality is undefined because some community has
/// no intra or no inter links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommUndefined {
    /// Report the error; callers typically skip the measure for the network.
    #[default]
    Skip,
    /// Treat the offending normalized term as zero and keep going.
    ZeroTerm,
}

#[derive(Debug, Clone, Copy)]
pub struct MeasureConfig {
    /// Standardization constant `R` of Comm Centrality.
    pub comm_r: f64,
    /// Intra/inter blend of K-shell with Community.
    pub ks_delta: f64,
    pub comm_undefined: CommUndefined,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig { comm_r: 1.0, ks_delta: 0.5, comm_undefined: CommUndefined::Skip }
    }
}

impl MeasureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.comm_r <= 0.0 || self.comm_r.is_nan() {
            return Err(Error::InvalidConfig(format!("comm_r must be > 0, got {}", self.comm_r)));
        }
        if !(0.0..=1.0).contains(&self.ks_delta) {
            return Err(Error::InvalidConfig(format!(
                "ks_delta must be in [0, 1], got {}",
                self.ks_delta
            )));
        }
        Ok(())
    }
}

/// Per-node scores for one measure, with the measure's deterministic ranking.
///
/// Rankings order by score descending and break ties by ascending dense node
/// index; the bridges-first vitality variant orders by signed score ascending.
#[derive(Debug, Clone)]
pub struct ScoreVector {
    pub measure: Measure,
    pub scores: Vec<f64>,
    pub ranking: Vec<usize>,
}

impl ScoreVector {
    fn new(measure: Measure, scores: Vec<f64>) -> ScoreVector {
        debug_assert!(scores.iter().all(|s| s.is_finite()));
        let mut ranking: Vec<usize> = (0..scores.len()).collect();
        match measure {
            Measure::ModularityVitalityBridges => ranking.sort_by(|&a, &b| {
                scores[a].partial_cmp(&scores[b]).expect("finite scores").then(a.cmp(&b))
            }),
            _ => ranking.sort_by(|&a, &b| {
                scores[b].partial_cmp(&scores[a]).expect("finite scores").then(a.cmp(&b))
            }),
        }
        ScoreVector { measure, scores, ranking }
    }

    /// Rebuild a score vector from externally stored scores (e.g. a CSV
    /// emitted by an earlier run), reapplying the measure's ranking rule.
    pub fn from_scores(measure: Measure, scores: Vec<f64>) -> ScoreVector {
        ScoreVector::new(measure, scores)
    }

    /// Adopt an externally stored ranking verbatim, synthesizing scores that
    /// reproduce it under the measure's ordering rule.
    pub fn from_ranking(measure: Measure, ranking: Vec<usize>) -> ScoreVector {
        let n = ranking.len();
        let mut scores = vec![0.0; n];
        for (position, &node) in ranking.iter().enumerate() {
            scores[node] = match measure {
                Measure::ModularityVitalityBridges => position as f64,
                _ => (n - position) as f64,
            };
        }
        ScoreVector { measure, scores, ranking }
    }

    /// 1-based rank of every node (position in `ranking` plus one).
    pub fn ranks(&self) -> Vec<usize> {
        let mut ranks = vec![0usize; self.ranking.len()];
        for (position, &node) in self.ranking.iter().enumerate() {
            ranks[node] = position + 1;
        }
        ranks
    }
}

/// Total degree baseline.
pub fn degree_centrality(g: &Graph) -> ScoreVector {
    let scores = (0..g.node_count()).map(|i| g.degree(i) as f64).collect();
    ScoreVector::new(Measure::Degree, scores)
}

/// Community Hub-Bridge:
/// `n_cq * k_i_intra + (#neighbor foreign communities) * k_i_inter`.
pub fn community_hub_bridge(g: &Graph, p: &Partition) -> ScoreVector {
    let scores = (0..g.node_count())
        .map(|i| {
            let own = p.community_of(i);
            let neighbor_communities =
                p.links_by_community(i).iter().filter(|&&(q, _)| q != own).count();
            p.community_size(own) as f64 * p.intra_degree(i) as f64
                + neighbor_communities as f64 * p.inter_degree(i) as f64
        })
        .collect();
    ScoreVector::new(Measure::CommunityHubBridge, scores)
}

/// Participation Coefficient: `1 - sum_q (k_{i,cq} / k_i)^2`.
/// Isolated nodes score 0.
pub fn participation_coefficient(g: &Graph, p: &Partition) -> ScoreVector {
    let scores = (0..g.node_count())
        .map(|i| {
            let k = g.degree(i) as f64;
            if k == 0.0 {
                return 0.0;
            }
            let sum_sq: f64 = p
                .links_by_community(i)
                .iter()
                .map(|&(_, k_ic)| {
                    let frac = k_ic as f64 / k;
                    frac * frac
                })
                .sum();
            1.0 - sum_sq
        })
        .collect();
    ScoreVector::new(Measure::ParticipationCoefficient, scores)
}

/// Community-based Mediator: entropy of the intra/inter split times
/// `k_i / 2M`, with `0 ln 0 = 0`. Isolated nodes score 0.
pub fn community_based_mediator(g: &Graph, p: &Partition) -> ScoreVector {
    let total_degree = (2 * g.edge_count()) as f64;
    let scores = (0..g.node_count())
        .map(|i| {
            let k = g.degree(i) as f64;
            if k == 0.0 {
                return 0.0;
            }
            let part = |links: usize| {
                let rho = links as f64 / k;
                if rho > 0.0 {
                    -rho * rho.ln()
                } else {
                    0.0
                }
            };
            let entropy = part(p.intra_degree(i)) + part(p.inter_degree(i));
            entropy * k / total_degree
        })
        .collect();
    ScoreVector::new(Measure::CommunityBasedMediator, scores)
}

/// Comm Centrality: `(1 + mu_cq) * chi + (1 - mu_cq) * phi^2` where `chi`
/// and `phi` normalize the node's intra/inter links by the community maxima
/// and scale by `R`.
///
/// Undefined when some community has no intra or no inter links at all
/// (e.g. a community disconnected from the rest), unless the config asks for
/// the zero-term fallback.
pub fn comm_centrality(g: &Graph, p: &Partition, cfg: &MeasureConfig) -> Result<ScoreVector> {
    let communities = p.community_count();
    let mut max_intra = vec![0usize; communities];
    let mut max_inter = vec![0usize; communities];
    let mut inter_links = vec![0usize; communities];
    for i in 0..g.node_count() {
        let q = p.community_of(i);
        max_intra[q] = max_intra[q].max(p.intra_degree(i));
        max_inter[q] = max_inter[q].max(p.inter_degree(i));
        inter_links[q] += p.inter_degree(i);
    }

    if cfg.comm_undefined == CommUndefined::Skip {
        for q in 0..communities {
            if max_intra[q] == 0 {
                return Err(Error::MeasureUndefined {
                    measure: "comm centrality",
                    community: q,
                    link_kind: "intra-community",
                });
            }
            if max_inter[q] == 0 {
                return Err(Error::MeasureUndefined {
                    measure: "comm centrality",
                    community: q,
                    link_kind: "inter-community",
                });
            }
        }
    }

    let scores = (0..g.node_count())
        .map(|i| {
            let q = p.community_of(i);
            // Edges incident to the community: intra counted once, inter once.
            let incident = p.community_internal_edges(q) + inter_links[q];
            let mu_q = if incident > 0 { inter_links[q] as f64 / incident as f64 } else { 0.0 };
            let chi = if max_intra[q] > 0 {
                p.intra_degree(i) as f64 / max_intra[q] as f64 * cfg.comm_r
            } else {
                0.0
            };
            let phi = if max_inter[q] > 0 {
                p.inter_degree(i) as f64 / max_inter[q] as f64 * cfg.comm_r
            } else {
                0.0
            };
            (1.0 + mu_q) * chi + (1.0 - mu_q) * phi * phi
        })
        .collect();
    Ok(ScoreVector::new(Measure::CommCentrality, scores))
}

/// Which end of the signed vitality ranking comes first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VitalityOrder {
    /// Positive-to-negative: hubs first.
    HubsFirst,
    /// Negative-to-positive: bridges first.
    BridgesFirst,
}

/// Modularity Vitality: `Q(G) - Q(G \ {i})`, computed incrementally from the
/// partition aggregates.
///
/// Removing node `i` shrinks `M` by `k_i`, the own community loses
/// `k_i^intra` internal edges and `k_i + k_i^intra` total degree, and each
/// foreign community `q` loses `k_{i,cq}` total degree. When a removal leaves
/// no edges at all, `Q` of the remainder is taken as 0.
pub fn modularity_vitality(g: &Graph, p: &Partition, order: VitalityOrder) -> Result<ScoreVector> {
    let m = g.edge_count() as f64;
    let q_base = modularity(g, p)?;
    let communities = p.community_count();

    let mut internal: Vec<f64> =
        (0..communities).map(|q| p.community_internal_edges(q) as f64).collect();
    let mut total: Vec<f64> =
        (0..communities).map(|q| p.community_total_degree(q) as f64).collect();

    let mut scores = Vec::with_capacity(g.node_count());
    for i in 0..g.node_count() {
        let k = g.degree(i) as f64;
        let own = p.community_of(i);
        let intra = p.intra_degree(i) as f64;
        let m_removed = m - k;

        let q_removed = if m_removed == 0.0 {
            0.0
        } else {
            internal[own] -= intra;
            total[own] -= k + intra;
            for &(q, k_iq) in p.links_by_community(i) {
                if q != own {
                    total[q] -= k_iq as f64;
                }
            }

            let mut q_sum = 0.0;
            for q in 0..communities {
                let frac = total[q] / (2.0 * m_removed);
                q_sum += internal[q] / m_removed - frac * frac;
            }

            internal[own] += intra;
            total[own] += k + intra;
            for &(q, k_iq) in p.links_by_community(i) {
                if q != own {
                    total[q] += k_iq as f64;
                }
            }
            q_sum
        };
        scores.push(q_base - q_removed);
    }

    let measure = match order {
        VitalityOrder::HubsFirst => Measure::ModularityVitalityHubs,
        VitalityOrder::BridgesFirst => Measure::ModularityVitalityBridges,
    };
    Ok(ScoreVector::new(measure, scores))
}

/// Community-based Centrality: `sum_q k_{i,cq} * (n_cq / N)`.
pub fn community_based_centrality(g: &Graph, p: &Partition) -> ScoreVector {
    let n = g.node_count() as f64;
    let scores = (0..g.node_count())
        .map(|i| {
            p.links_by_community(i)
                .iter()
                .map(|&(q, k_iq)| k_iq as f64 * (p.community_size(q) as f64 / n))
                .sum()
        })
        .collect();
    ScoreVector::new(Measure::CommunityBasedCentrality, scores)
}

/// K-shell with Community: `delta * shell_intra(i) + (1 - delta) *
/// shell_inter(i)` over the intra-link and inter-link subgraphs.
pub fn kshell_with_community(g: &Graph, p: &Partition, cfg: &MeasureConfig) -> ScoreVector {
    let n = g.node_count();
    let mut intra_adj = vec![Vec::new(); n];
    let mut inter_adj = vec![Vec::new(); n];
    for (u, v) in g.edges() {
        if p.community_of(u) == p.community_of(v) {
            intra_adj[u].push(v);
            intra_adj[v].push(u);
        } else {
            inter_adj[u].push(v);
            inter_adj[v].push(u);
        }
    }
    let intra_shell = shell_numbers(&intra_adj);
    let inter_shell = shell_numbers(&inter_adj);
    let scores = (0..n)
        .map(|i| {
            cfg.ks_delta * intra_shell[i] as f64 + (1.0 - cfg.ks_delta) * inter_shell[i] as f64
        })
        .collect();
    ScoreVector::new(Measure::KShellWithCommunity, scores)
}

/// Compute any measure through one entry point.
pub fn compute_measure(
    measure: Measure,
    g: &Graph,
    p: &Partition,
    cfg: &MeasureConfig,
) -> Result<ScoreVector> {
    cfg.validate()?;
    Ok(match measure {
        Measure::Degree => degree_centrality(g),
        Measure::CommunityHubBridge => community_hub_bridge(g, p),
        Measure::ParticipationCoefficient => participation_coefficient(g, p),
        Measure::CommunityBasedMediator => community_based_mediator(g, p),
        Measure::CommCentrality => comm_centrality(g, p, cfg)?,
        Measure::ModularityVitalityHubs => modularity_vitality(g, p, VitalityOrder::HubsFirst)?,
        Measure::ModularityVitalityBridges => {
            modularity_vitality(g, p, VitalityOrder::BridgesFirst)?
        }
        Measure::CommunityBasedCentrality => community_based_centrality(g, p),
        Measure::KShellWithCommunity => kshell_with_community(g, p, cfg),
    })
}
