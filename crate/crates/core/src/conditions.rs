//! Gain constraints and initial-state criteria that certify consensus in
//! advance, plus closed-form consensus values.
//!
//! Each criterion compares a scalar built from the initial state against a
//! threshold built from the weight function; the run is certified when the
//! comparison holds *strictly* (boundary equality reports `holds = false`).
//! Criterion identifiers:
//!
//! | id     | applies to                | inequality checked                          |
//! |--------|---------------------------|---------------------------------------------|
//! | `GAIN` | discrete-time laws        | step / damping gains under their caps        |
//! | `COR1` | `ct2-dynamic`             | `||q(0)||^2 + pair integrals < k* int_0^inf` |
//! | `THM4` | `ct1-state-dep`           | pair integrals `< (n-1) int_0^{R^2}`         |
//! | `THM5` | `ct2-state-dep`           | `||v(0)||^2 +` pair integrals `< (n-1) int`  |
//! | `THM8` | `dt1-state-dep`           | `W(0) < (n-1) int_0^{R^2}`                   |
//! | `THM9` | `dt2-state-dep`           | mixed quadratic + `W(0)` under its cap       |
//! | `THM10`| symmetric scalar CT       | pair integrals `< (2n-3) int_0^{R^2}`        |
//! | `THM11`| symmetric scalar DT       | `W(0) < (2n-3) int_0^{R^2}`                  |
//!
//! `W(0)` is the staircase energy at the caller's grid width `r` summed over
//! all unordered pairs. The right-hand sides use the exact integral of the
//! weight over `[0, R^2]` (the `r = 0` staircase value): that is the
//! threshold the worked parameter sets are calibrated against. `r` must stay
//! below `R^2`, where the staircase collapses and the test becomes vacuous.

use serde::{Deserialize, Serialize};

use crate::dynamics::{ProtocolLaw, ProtocolSpec, SystemState};
use crate::error::{Error, Result};
use crate::graph::{vertex_connectivity, WeightedGraph};
use crate::monitors::disagreement;
use crate::weight::{staircase_w, StaircaseParams, UpperLimit, WeightFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionId {
    #[serde(rename = "GAIN")]
    Gain,
    #[serde(rename = "COR1")]
    Cor1,
    #[serde(rename = "THM4")]
    Thm4,
    #[serde(rename = "THM5")]
    Thm5,
    #[serde(rename = "THM8")]
    Thm8,
    #[serde(rename = "THM9")]
    Thm9,
    #[serde(rename = "THM10")]
    Thm10,
    #[serde(rename = "THM11")]
    Thm11,
}

impl ConditionId {
    pub fn name(self) -> &'static str {
        match self {
            ConditionId::Gain => "GAIN",
            ConditionId::Cor1 => "COR1",
            ConditionId::Thm4 => "THM4",
            ConditionId::Thm5 => "THM5",
            ConditionId::Thm8 => "THM8",
            ConditionId::Thm9 => "THM9",
            ConditionId::Thm10 => "THM10",
            ConditionId::Thm11 => "THM11",
        }
    }

    pub fn all() -> &'static [ConditionId] {
        &[
            ConditionId::Gain,
            ConditionId::Cor1,
            ConditionId::Thm4,
            ConditionId::Thm5,
            ConditionId::Thm8,
            ConditionId::Thm9,
            ConditionId::Thm10,
            ConditionId::Thm11,
        ]
    }
}

impl std::fmt::Display for ConditionId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ConditionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase();
        ConditionId::all()
            .iter()
            .copied()
            .find(|c| c.name() == up)
            .ok_or_else(|| Error::Config(format!("unknown criterion `{s}`")))
    }
}

/// One named gain bound: `value < bound` must hold strictly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GainConstraint {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Outcome of one criterion evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub criterion: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub staircase_r: Option<f64>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub notes: String,
    /// Per-constraint sub-results for gain criteria; empty otherwise.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub constraints: Vec<GainConstraint>,
}

impl std::fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion={} lhs={:.12e} rhs={:.12e} holds={}",
            self.criterion, self.lhs, self.rhs, self.holds
        )?;
        if let Some(r) = self.staircase_r {
            write!(f, " staircase_r={r}")?;
        }
        for c in &self.constraints {
            write!(
                f,
                " [{} value={:.12e} bound={:.12e} holds={}]",
                c.name, c.value, c.bound, c.holds
            )?;
        }
        if !self.notes.is_empty() {
            write!(f, " notes={:?}", self.notes)?;
        }
        Ok(())
    }
}

/// Effective degree cap: the maximum degree for fixed-link laws, `n - 1`
/// when the links follow the weight support (every pair can talk).
fn degree_cap(spec: &ProtocolSpec, graph: &WeightedGraph) -> f64 {
    if spec.law.state_dependent_links() {
        (graph.n() - 1) as f64
    } else {
        graph.max_degree() as f64
    }
}

/// Check the discrete-time gain constraints for the selected law.
///
/// First-order maps need `h < 1 / (d alpha(0))`; second-order maps need
/// `k2 < min(2, k1 + 1)` and
/// `k3 < min( k2 (2 - k2) / (2 d alpha(0) k1 (k1 + 1 - k2)),
///            k2 / (d alpha(0) (k1 + 1)) )`,
/// where `d` is the degree cap above. Continuous-time laws are rejected.
pub fn check_gain_constraints(
    spec: &ProtocolSpec,
    weight: &WeightFunction,
    graph: &WeightedGraph,
) -> Result<ConditionReport> {
    spec.validate()?;
    if spec.law.is_continuous() {
        return Err(Error::GainCheckContinuous);
    }
    let alpha0 = weight.alpha_zero();
    let d = degree_cap(spec, graph);
    let mut constraints = Vec::new();
    match spec.law {
        ProtocolLaw::Dt1Fixed | ProtocolLaw::Dt1StateDep => {
            let h = spec.step_gain().expect("validated");
            let bound = 1.0 / (d * alpha0);
            constraints.push(GainConstraint {
                name: "h".into(),
                value: h,
                bound,
                holds: h < bound,
            });
        }
        ProtocolLaw::Dt2Fixed | ProtocolLaw::Dt2StateDep => {
            let (k1, k2, k3) = spec.second_order_gains().expect("validated");
            let k2_bound = 2.0f64.min(k1 + 1.0);
            let k2_ok = k2 < k2_bound;
            constraints.push(GainConstraint {
                name: "k2".into(),
                value: k2,
                bound: k2_bound,
                holds: k2_ok,
            });
            // Both k3 caps need k2 < min(2, k1 + 1) to be positive; when the
            // k2 constraint already failed the cap is meaningless.
            let k3_bound = if k2_ok {
                let damping = k2 * (2.0 - k2) / (2.0 * d * alpha0 * k1 * (k1 + 1.0 - k2));
                let coupling = k2 / (d * alpha0 * (k1 + 1.0));
                damping.min(coupling)
            } else {
                f64::NAN
            };
            constraints.push(GainConstraint {
                name: "k3".into(),
                value: k3,
                bound: k3_bound,
                holds: k2_ok && k3 < k3_bound,
            });
        }
        _ => unreachable!("continuous laws rejected above"),
    }
    let holds = constraints.iter().all(|c| c.holds);
    let last = constraints.last().expect("at least one constraint");
    Ok(ConditionReport {
        criterion: ConditionId::Gain.to_string(),
        lhs: last.value,
        rhs: last.bound,
        holds,
        staircase_r: None,
        notes: String::new(),
        constraints,
    })
}

/// `sum over unordered pairs of int_0^{||x_i-x_j||^2} alpha`, restricted to
/// linked pairs when `linked_only`.
fn initial_pair_integrals(
    graph: &WeightedGraph,
    weight: &WeightFunction,
    state: &SystemState,
    linked_only: bool,
) -> f64 {
    let n = state.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if !linked_only || graph.has_link(i, j) {
                acc += weight.integral(UpperLimit::Value(state.dist2(i, j)));
            }
        }
    }
    acc
}

/// Staircase energy `W(0)` over all unordered pairs at grid width `r`.
fn initial_staircase_energy(weight: &WeightFunction, state: &SystemState, r: f64) -> Result<f64> {
    let params = StaircaseParams::new(r)?;
    let n = state.n();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            acc += staircase_w(weight, params, state.dist2(i, j))?;
        }
    }
    Ok(acc)
}

fn require_support(criterion: ConditionId, weight: &WeightFunction) -> Result<f64> {
    weight
        .support_bound_sq()
        .ok_or_else(|| Error::IncompatibleCriterion {
            criterion: criterion.to_string(),
            why: "needs a compact-support (bounded-confidence) weight".into(),
        })
}

fn require_staircase_below_support(criterion: ConditionId, r: f64, support: f64) -> Result<()> {
    if r < 0.0 {
        return Err(Error::NegativeInput {
            what: "staircase grid width",
            value: r,
        });
    }
    if r >= support {
        return Err(Error::IncompatibleCriterion {
            criterion: criterion.to_string(),
            why: format!(
                "staircase_r = {r} must stay below the squared confidence radius {support} \
                 (the threshold is vacuous there)"
            ),
        });
    }
    Ok(())
}

/// Check that scalar opinions are symmetric after sorting: every mirror pair
/// `(i, n+1-i)` shares the midpoint of the extremes, to 1e-9.
fn require_symmetric_scalar(criterion: ConditionId, state: &SystemState) -> Result<Vec<f64>> {
    if state.m() != 1 {
        return Err(Error::IncompatibleCriterion {
            criterion: criterion.to_string(),
            why: "symmetric-profile criteria need scalar opinions (m = 1)".into(),
        });
    }
    let mut sorted = state.positions().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite opinions"));
    let n = sorted.len();
    let extremes = sorted[0] + sorted[n - 1];
    for i in 0..n / 2 {
        let residual = (sorted[i] + sorted[n - 1 - i] - extremes).abs();
        if residual >= 1e-9 {
            return Err(Error::AsymmetricProfile { index: i, residual });
        }
    }
    Ok(sorted)
}

fn report(
    criterion: ConditionId,
    lhs: f64,
    rhs: f64,
    staircase_r: Option<f64>,
    notes: String,
) -> ConditionReport {
    ConditionReport {
        criterion: criterion.to_string(),
        lhs,
        rhs,
        holds: lhs < rhs,
        staircase_r,
        notes,
        constraints: Vec::new(),
    }
}

/// Evaluate an initial-state criterion. `spec` is only consulted by `THM9`,
/// which needs the gains `k1, k2, k3`; `staircase_r` feeds the staircase
/// criteria `THM8`, `THM9`, `THM11`.
pub fn check_initial_condition(
    criterion: ConditionId,
    graph: &WeightedGraph,
    weight: &WeightFunction,
    initial: &SystemState,
    staircase_r: f64,
    spec: Option<&ProtocolSpec>,
) -> Result<ConditionReport> {
    let n = initial.n() as f64;
    match criterion {
        ConditionId::Gain => Err(Error::IncompatibleCriterion {
            criterion: criterion.to_string(),
            why: "gain constraints are checked by check_gain_constraints".into(),
        }),
        ConditionId::Cor1 => {
            let Some(_) = initial.velocities() else {
                return Err(Error::MissingVelocities {
                    law: "COR1 (second-order)".into(),
                });
            };
            let d = disagreement(initial);
            let total = weight.integral(UpperLimit::Infinite);
            let k_star = vertex_connectivity(graph) as f64;
            // The pair differences of the disagreement equal those of the
            // raw positions, so the integral term is shared.
            let lhs = d.q_norm_sq().expect("velocities present")
                + initial_pair_integrals(graph, weight, initial, true);
            if total.is_infinite() {
                let mut rep = report(
                    ConditionId::Cor1,
                    lhs,
                    f64::INFINITY,
                    None,
                    "vacuously holds: the weight integral diverges, the unconditional \
                     consensus result applies"
                        .into(),
                );
                rep.holds = true;
                return Ok(rep);
            }
            Ok(report(
                ConditionId::Cor1,
                lhs,
                k_star * total,
                None,
                String::new(),
            ))
        }
        ConditionId::Thm4 | ConditionId::Thm5 => {
            let support = require_support(criterion, weight)?;
            let velocity_term = match criterion {
                ConditionId::Thm5 => {
                    let Some(v) = initial.velocities() else {
                        return Err(Error::MissingVelocities {
                            law: "THM5 (second-order)".into(),
                        });
                    };
                    v.iter().map(|c| c * c).sum::<f64>()
                }
                _ => 0.0,
            };
            let lhs = velocity_term + initial_pair_integrals(graph, weight, initial, false);
            let rhs = (n - 1.0) * weight.integral(UpperLimit::Value(support));
            Ok(report(criterion, lhs, rhs, None, String::new()))
        }
        ConditionId::Thm8 => {
            let support = require_support(criterion, weight)?;
            require_staircase_below_support(criterion, staircase_r, support)?;
            let lhs = initial_staircase_energy(weight, initial, staircase_r)?;
            let rhs = (n - 1.0) * weight.integral(UpperLimit::Value(support));
            Ok(report(
                criterion,
                lhs,
                rhs,
                Some(staircase_r),
                String::new(),
            ))
        }
        ConditionId::Thm9 => {
            let support = require_support(criterion, weight)?;
            require_staircase_below_support(criterion, staircase_r, support)?;
            let Some(spec) = spec else {
                return Err(Error::IncompatibleCriterion {
                    criterion: criterion.to_string(),
                    why: "needs the protocol gains k1, k2, k3".into(),
                });
            };
            let Some((k1, k2, k3)) = spec.second_order_gains() else {
                return Err(Error::IncompatibleCriterion {
                    criterion: criterion.to_string(),
                    why: "needs a second-order discrete law".into(),
                });
            };
            let Some(v) = initial.velocities() else {
                return Err(Error::MissingVelocities {
                    law: "THM9 (second-order)".into(),
                });
            };
            let x = initial.positions();
            let x_sq: f64 = x.iter().map(|c| c * c).sum();
            let cross: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum();
            let v_sq: f64 = v.iter().map(|c| c * c).sum();
            let energy = initial_staircase_energy(weight, initial, staircase_r)?;
            let lhs = k2 * k2 * x_sq
                + 2.0 * k1 * k2 * cross
                + (k1 * k1 + k1) * v_sq
                + (k1 + 1.0 - k2) * k3 * energy;
            let rhs =
                (k1 + 1.0 - k2) * k3 * (n - 1.0) * weight.integral(UpperLimit::Value(support));
            Ok(report(
                criterion,
                lhs,
                rhs,
                Some(staircase_r),
                String::new(),
            ))
        }
        ConditionId::Thm10 => {
            let support = require_support(criterion, weight)?;
            require_symmetric_scalar(criterion, initial)?;
            require_at_least_four(criterion, initial)?;
            let lhs = initial_pair_integrals(graph, weight, initial, false);
            let rhs = (2.0 * n - 3.0) * weight.integral(UpperLimit::Value(support));
            Ok(report(criterion, lhs, rhs, None, String::new()))
        }
        ConditionId::Thm11 => {
            let support = require_support(criterion, weight)?;
            require_staircase_below_support(criterion, staircase_r, support)?;
            require_symmetric_scalar(criterion, initial)?;
            require_at_least_four(criterion, initial)?;
            let lhs = initial_staircase_energy(weight, initial, staircase_r)?;
            let rhs = (2.0 * n - 3.0) * weight.integral(UpperLimit::Value(support));
            Ok(report(
                criterion,
                lhs,
                rhs,
                Some(staircase_r),
                String::new(),
            ))
        }
    }
}

fn require_at_least_four(criterion: ConditionId, state: &SystemState) -> Result<()> {
    if state.n() < 4 {
        return Err(Error::IncompatibleCriterion {
            criterion: criterion.to_string(),
            why: format!(
                "defined for n >= 4 (n = {}); small profiles reach consensus \
                 exactly when the initial graph is connected",
                state.n()
            ),
        });
    }
    Ok(())
}

/// Closed-form agreement point for the laws that have one.
///
/// - averaging laws (`ct1-fixed`, `ct1-state-dep`, `dt1-fixed`,
///   `dt1-state-dep`): the mean of the initial positions;
/// - `ct2-static`: `(sum v(0) + k sum x(0)) / (n k)`;
/// - `dt2-fixed`: `(k1 / (n k2)) sum v(0) + mean x(0)`;
/// - `ct2-dynamic`, `ct2-state-dep`, `dt2-state-dep`: only when the initial
///   velocities sum to zero, in which case the mean of the initial positions;
///   otherwise rejected.
pub fn predict_consensus_state(spec: &ProtocolSpec, initial: &SystemState) -> Result<Vec<f64>> {
    spec.validate()?;
    let (n, m) = (initial.n(), initial.m());
    let nf = n as f64;
    let sums = |data: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; m];
        for i in 0..n {
            for d in 0..m {
                out[d] += data[i * m + d];
            }
        }
        out
    };
    match spec.law {
        ProtocolLaw::Ct1Fixed
        | ProtocolLaw::Ct1StateDep
        | ProtocolLaw::Dt1Fixed
        | ProtocolLaw::Dt1StateDep => Ok(initial.mean_position()),
        ProtocolLaw::Ct2Static => {
            let k = spec.feedback_k().expect("validated");
            let v = initial.velocities().ok_or(Error::MissingVelocities {
                law: spec.law.to_string(),
            })?;
            let (sv, sx) = (sums(v), sums(initial.positions()));
            Ok((0..m).map(|d| (sv[d] + k * sx[d]) / (nf * k)).collect())
        }
        ProtocolLaw::Dt2Fixed => {
            let (k1, k2, _) = spec.second_order_gains().expect("validated");
            let v = initial.velocities().ok_or(Error::MissingVelocities {
                law: spec.law.to_string(),
            })?;
            let (sv, sx) = (sums(v), sums(initial.positions()));
            Ok((0..m)
                .map(|d| k1 * sv[d] / (nf * k2) + sx[d] / nf)
                .collect())
        }
        ProtocolLaw::Ct2Dynamic | ProtocolLaw::Ct2StateDep | ProtocolLaw::Dt2StateDep => {
            let v = initial.velocities().ok_or(Error::MissingVelocities {
                law: spec.law.to_string(),
            })?;
            let sv = sums(v);
            if sv.iter().any(|c| c.abs() > 1e-12) {
                return Err(Error::NoClosedForm {
                    law: spec.law.to_string(),
                    why: "the initial velocities do not sum to zero, so the agreement \
                          point depends on the trajectory"
                        .into(),
                });
            }
            Ok(initial.mean_position())
        }
    }
}
