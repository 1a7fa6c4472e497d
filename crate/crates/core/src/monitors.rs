//! Energy functions, disagreement projections, and consensus detection.
//!
//! Each control law has a matching scalar that is nonincreasing along its
//! trajectories whenever the governing hypotheses hold; watching these values
//! is how a run certifies it is behaving. Sums written `sum_{i,j}` run over
//! ordered pairs, exactly as each energy function is defined: `V_ct2_static`
//! and `V_dt2` count every unordered pair twice, the others carry an explicit
//! one-half.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ProtocolSpec, SystemState, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::graph::{algebraic_connectivity, build_laplacian, WeightedGraph};
use crate::weight::{staircase_w, StaircaseParams, UpperLimit, WeightFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MonitorId {
    /// Half the squared norm of the position disagreement.
    #[serde(rename = "V_half_p2")]
    VHalfP2,
    /// `||k x + v||^2 + ||v||^2 + sum_{i,j} G_ij int_0^{||x_i-x_j||^2} alpha`.
    #[serde(rename = "V_ct2_static")]
    VCt2Static,
    /// `||q||^2 + (1/2) sum_{i,j} G_ij int_0^{||p_i-p_j||^2} alpha`.
    #[serde(rename = "V_ct2_dynamic")]
    VCt2Dynamic,
    /// `(1/2) sum_{i,j} int_0^{||x_i-x_j||^2} alpha` over all pairs.
    #[serde(rename = "V1_integral")]
    V1Integral,
    /// `||k2 x + k1 v||^2 + k1 ||v||^2
    ///  + (1/2) k3 (k1+1-k2) sum_{i,j} G_ij w(||x_i-x_j||^2)`.
    #[serde(rename = "V_dt2")]
    VDt2,
    /// `(1/2) sum_{i,j} G_ij w(||x_i-x_j||^2)` at the configured grid width.
    #[serde(rename = "W_staircase")]
    WStaircase,
    /// Algebraic connectivity of the Laplacian at the current state.
    #[serde(rename = "lambda2_current")]
    Lambda2Current,
    #[serde(rename = "max_pairwise_dist")]
    MaxPairwiseDist,
    #[serde(rename = "max_speed")]
    MaxSpeed,
}

impl MonitorId {
    pub fn name(self) -> &'static str {
        match self {
            MonitorId::VHalfP2 => "V_half_p2",
            MonitorId::VCt2Static => "V_ct2_static",
            MonitorId::VCt2Dynamic => "V_ct2_dynamic",
            MonitorId::V1Integral => "V1_integral",
            MonitorId::VDt2 => "V_dt2",
            MonitorId::WStaircase => "W_staircase",
            MonitorId::Lambda2Current => "lambda2_current",
            MonitorId::MaxPairwiseDist => "max_pairwise_dist",
            MonitorId::MaxSpeed => "max_speed",
        }
    }

    pub fn all() -> &'static [MonitorId] {
        &[
            MonitorId::VHalfP2,
            MonitorId::VCt2Static,
            MonitorId::VCt2Dynamic,
            MonitorId::V1Integral,
            MonitorId::VDt2,
            MonitorId::WStaircase,
            MonitorId::Lambda2Current,
            MonitorId::MaxPairwiseDist,
            MonitorId::MaxSpeed,
        ]
    }
}

impl std::fmt::Display for MonitorId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MonitorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MonitorId::all()
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown monitor `{s}`")))
    }
}

/// State with the agent-mean removed: `p = x - mean(x)` and, when present,
/// `q = v - mean(v)`. Consensus is exactly `p -> 0` and `q -> 0`.
#[derive(Clone, Debug)]
pub struct DisagreementState {
    n: usize,
    m: usize,
    pub p: Vec<f64>,
    pub q: Option<Vec<f64>>,
}

impl DisagreementState {
    pub fn p_norm_sq(&self) -> f64 {
        self.p.iter().map(|c| c * c).sum()
    }

    pub fn q_norm_sq(&self) -> Option<f64> {
        self.q.as_ref().map(|q| q.iter().map(|c| c * c).sum())
    }

    pub fn p_agent(&self, i: usize) -> &[f64] {
        &self.p[i * self.m..(i + 1) * self.m]
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Subtract the agent-mean from every agent's position (and velocity).
pub fn disagreement(state: &SystemState) -> DisagreementState {
    let (n, m) = (state.n(), state.m());
    let center = |data: &[f64]| -> Vec<f64> {
        let mut mean = vec![0.0; m];
        for i in 0..n {
            for d in 0..m {
                mean[d] += data[i * m + d];
            }
        }
        for c in &mut mean {
            *c /= n as f64;
        }
        let mut out = data.to_vec();
        for i in 0..n {
            for d in 0..m {
                out[i * m + d] -= mean[d];
            }
        }
        out
    };
    DisagreementState {
        n,
        m,
        p: center(state.positions()),
        q: state.velocities().map(center),
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum()
}

/// `sum over unordered linked pairs of int_0^{||x_i-x_j||^2} alpha`.
fn pair_integral_sum(
    graph: &WeightedGraph,
    weight: &WeightFunction,
    state: &SystemState,
    all_pairs: bool,
) -> f64 {
    let n = state.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if all_pairs || graph.has_link(i, j) {
                acc += weight.integral(UpperLimit::Value(state.dist2(i, j)));
            }
        }
    }
    acc
}

/// `sum over unordered linked pairs of w(||x_i-x_j||^2)` at grid width `r`.
fn pair_staircase_sum(
    graph: &WeightedGraph,
    weight: &WeightFunction,
    state: &SystemState,
    r: f64,
) -> Result<f64> {
    let params = StaircaseParams::new(r)?;
    let n = state.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if graph.has_link(i, j) {
                acc += staircase_w(weight, params, state.dist2(i, j))?;
            }
        }
    }
    Ok(acc)
}

/// Evaluate one monitor at one state. `staircase_r` feeds the staircase
/// terms of `W_staircase` and `V_dt2`; the integral monitors ignore it.
pub fn evaluate_monitor(
    id: MonitorId,
    graph: &WeightedGraph,
    weight: &WeightFunction,
    spec: &ProtocolSpec,
    state: &SystemState,
    staircase_r: f64,
) -> Result<f64> {
    let incompatible = |why: &str| {
        Err(Error::IncompatibleMonitor {
            monitor: id.to_string(),
            law: spec.law.to_string(),
            why: why.to_string(),
        })
    };
    match id {
        MonitorId::VHalfP2 => Ok(0.5 * disagreement(state).p_norm_sq()),
        MonitorId::VCt2Static => {
            let Some(k) = spec.feedback_k() else {
                return incompatible("needs the velocity feedback gain k");
            };
            let Some(v) = state.velocities() else {
                return incompatible("needs velocities");
            };
            let x = state.positions();
            let kx_plus_v: f64 = x
                .iter()
                .zip(v)
                .map(|(xi, vi)| (k * xi + vi) * (k * xi + vi))
                .sum();
            // Ordered double sum: each unordered pair counts twice.
            Ok(kx_plus_v + norm_sq(v) + 2.0 * pair_integral_sum(graph, weight, state, false))
        }
        MonitorId::VCt2Dynamic => {
            if state.velocities().is_none() {
                return incompatible("needs velocities");
            }
            let d = disagreement(state);
            // ||p_i - p_j|| equals ||x_i - x_j||, so the integral term can be
            // taken on the raw positions.
            Ok(d.q_norm_sq().expect("velocities present")
                + pair_integral_sum(graph, weight, state, false))
        }
        MonitorId::V1Integral => Ok(pair_integral_sum(graph, weight, state, true)),
        MonitorId::VDt2 => {
            let Some((k1, k2, k3)) = spec.second_order_gains() else {
                return incompatible("needs the gains k1, k2, k3");
            };
            let Some(v) = state.velocities() else {
                return incompatible("needs velocities");
            };
            let x = state.positions();
            let mix: f64 = x
                .iter()
                .zip(v)
                .map(|(xi, vi)| (k2 * xi + k1 * vi) * (k2 * xi + k1 * vi))
                .sum();
            let w_sum = pair_staircase_sum(graph, weight, state, staircase_r)?;
            Ok(mix + k1 * norm_sq(v) + k3 * (k1 + 1.0 - k2) * w_sum)
        }
        MonitorId::WStaircase => pair_staircase_sum(graph, weight, state, staircase_r),
        MonitorId::Lambda2Current => Ok(algebraic_connectivity(&build_laplacian(
            graph, state, weight,
        )?)),
        MonitorId::MaxPairwiseDist => Ok(state.max_pairwise_distance()),
        MonitorId::MaxSpeed => match state.max_speed() {
            Some(s) => Ok(s),
            None => incompatible("needs velocities"),
        },
    }
}

/// Outcome of a finished (or aborted) run.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Consensus {
        /// True when the agreement point matches the initial mean.
        average: bool,
        value: Vec<f64>,
    },
    Clustered {
        clusters: usize,
    },
    Diverged,
    Undecided,
}

impl Verdict {
    pub fn is_consensus(&self) -> bool {
        matches!(self, Verdict::Consensus { .. })
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Consensus { average: true, .. } => write!(f, "consensus (average)"),
            Verdict::Consensus { average: false, .. } => write!(f, "consensus"),
            Verdict::Clustered { clusters } => write!(f, "clustered(k={clusters})"),
            Verdict::Diverged => write!(f, "diverged"),
            Verdict::Undecided => write!(f, "undecided"),
        }
    }
}

/// Single-linkage clusters of the agents at threshold `tol`: connected
/// components of the "within tol" relation on final positions.
fn single_linkage(state: &SystemState, tol: f64) -> Vec<Vec<usize>> {
    let n = state.n();
    let mut label = vec![usize::MAX; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        let id = clusters.len();
        let mut members = vec![start];
        label[start] = id;
        let mut cursor = 0;
        while cursor < members.len() {
            let u = members[cursor];
            cursor += 1;
            for v in 0..n {
                if label[v] == usize::MAX && state.dist2(u, v).sqrt() <= tol {
                    label[v] = id;
                    members.push(v);
                }
            }
        }
        clusters.push(members);
    }
    clusters
}

/// Decide what a trajectory did.
///
/// - `consensus` when every sample in the final 5% keeps the maximum pairwise
///   distance below `pos_tol` (and, with velocities, the top speed below
///   `vel_tol`); the value is the mean of the final positions and `average`
///   reports whether it matches the mean of the initial ones.
/// - `clustered(k)` when the final positions split into k >= 2 single-linkage
///   groups, each tighter than `pos_tol`, separated by more than 10 pos_tol.
/// - `diverged` when the record was cut short by a blowup.
/// - `undecided` otherwise.
pub fn detect_consensus(trajectory: &TrajectoryRecord, pos_tol: f64, vel_tol: f64) -> Verdict {
    if trajectory.is_empty() {
        return Verdict::Undecided;
    }
    if trajectory.blowup.is_some() {
        return Verdict::Diverged;
    }
    // The final 5% of samples (at least one) must all look settled;
    // a single converged frame right after a transient does not count.
    let len = trajectory.len();
    let tail = (len / 20).max(1);
    let settled = trajectory.states[len - tail..]
        .iter()
        .all(|s| s.max_pairwise_distance() < pos_tol && s.max_speed().is_none_or(|v| v < vel_tol));
    let final_state = trajectory.final_state();
    if settled {
        let value = final_state.mean_position();
        let initial_mean = trajectory.initial_state().mean_position();
        let off: f64 = value
            .iter()
            .zip(&initial_mean)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        return Verdict::Consensus {
            average: off < pos_tol,
            value,
        };
    }
    let clusters = single_linkage(final_state, pos_tol);
    if clusters.len() >= 2 {
        let spread_ok = clusters.iter().all(|members| {
            members.iter().all(|&a| {
                members
                    .iter()
                    .all(|&b| final_state.dist2(a, b).sqrt() < pos_tol)
            })
        });
        let mut min_gap = f64::INFINITY;
        for (ci, a_members) in clusters.iter().enumerate() {
            for b_members in clusters.iter().skip(ci + 1) {
                for &a in a_members {
                    for &b in b_members {
                        min_gap = min_gap.min(final_state.dist2(a, b).sqrt());
                    }
                }
            }
        }
        if spread_ok && min_gap > 10.0 * pos_tol {
            return Verdict::Clustered {
                clusters: clusters.len(),
            };
        }
    }
    Verdict::Undecided
}
