//! Agent dynamics under the state-dependent consensus laws.
//!
//! Nine control laws are supported. With coupling
//! `coup_i(x) = sum_j G_ij alpha(||x_i - x_j||^2) (x_j - x_i)` (and the same
//! sum over velocity differences written `coup_i(v)`):
//!
//! | law              | dynamics                  | control `u_i`              |
//! |------------------|---------------------------|----------------------------|
//! | `ct1-fixed`      | `dx_i = u_i`              | `coup_i(x)`                |
//! | `ct2-static`     | `dx_i = v_i, dv_i = u_i`  | `-k v_i + coup_i(x)`       |
//! | `ct2-dynamic`    | `dx_i = v_i, dv_i = u_i`  | `coup_i(v) + coup_i(x)`    |
//! | `ct1-state-dep`  | `dx_i = u_i`              | `coup_i(x)`, links live    |
//! | `ct2-state-dep`  | `dx_i = v_i, dv_i = u_i`  | `-k v_i + coup_i(x)`, live |
//! | `dt1-fixed`      | `x+ = x + u`              | `h coup_i(x)`              |
//! | `dt2-fixed`      | `x+ = x + k1 v, v+ = v+u` | `-k2 v_i + k3 coup_i(x)`   |
//! | `dt1-state-dep`  | `x+ = x + u`              | `h coup_i(x)`, links live  |
//! | `dt2-state-dep`  | `x+ = x + k1 v, v+ = v+u` | `-k2 v_i + k3 coup_i(x)`, live |
//!
//! "Links live" means the link indicator is taken as complete and the
//! effective edge set is wherever `alpha` is positive.
//!
//! Continuous-time laws advance by classical fixed-step RK4 with the weights
//! re-evaluated at every stage; discrete-time laws apply the exact map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::monitors::{self, MonitorId};
use crate::weight::WeightFunction;

/// Any coordinate beyond this magnitude aborts a run as a blowup; unbounded
/// trajectories are a legitimate outcome and must terminate cleanly.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Positions (and velocities for second-order laws) of `n` agents in `m`
/// dimensions, stored agent-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    n: usize,
    m: usize,
    x: Vec<f64>,
    v: Option<Vec<f64>>,
}

impl SystemState {
    pub fn first_order(n: usize, m: usize, x: Vec<f64>) -> Result<Self> {
        Self::build(n, m, x, None)
    }

    pub fn second_order(n: usize, m: usize, x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        Self::build(n, m, x, Some(v))
    }

    fn build(n: usize, m: usize, x: Vec<f64>, v: Option<Vec<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                what: "agent count",
                why: "need at least one agent".into(),
            });
        }
        if m == 0 {
            return Err(Error::InvalidParameter {
                what: "state dimension",
                why: "m must be at least 1".into(),
            });
        }
        if x.len() != n * m {
            return Err(Error::DimensionMismatch {
                expected: n * m,
                actual: x.len(),
            });
        }
        if let Some(v) = &v {
            if v.len() != n * m {
                return Err(Error::DimensionMismatch {
                    expected: n * m,
                    actual: v.len(),
                });
            }
        }
        let finite = x.iter().all(|c| c.is_finite()) && v.iter().flatten().all(|c| c.is_finite());
        if !finite {
            return Err(Error::InvalidParameter {
                what: "state",
                why: "entries must be finite".into(),
            });
        }
        Ok(SystemState { n, m, x, v })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn velocities(&self) -> Option<&[f64]> {
        self.v.as_deref()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.x[i * self.m..(i + 1) * self.m]
    }

    pub fn velocity(&self, i: usize) -> Option<&[f64]> {
        self.v.as_ref().map(|v| &v[i * self.m..(i + 1) * self.m])
    }

    /// Squared distance between agents `i` and `j`.
    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.position(i), self.position(j));
        a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
    }

    pub fn mean_position(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.m];
        for i in 0..self.n {
            for (d, c) in self.position(i).iter().enumerate() {
                mean[d] += c;
            }
        }
        for c in &mut mean {
            *c /= self.n as f64;
        }
        mean
    }

    pub fn max_pairwise_distance(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max(self.dist2(i, j));
            }
        }
        worst.sqrt()
    }

    pub fn max_speed(&self) -> Option<f64> {
        self.v.as_ref().map(|v| {
            (0..self.n)
                .map(|i| {
                    v[i * self.m..(i + 1) * self.m]
                        .iter()
                        .map(|c| c * c)
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(0.0, f64::max)
        })
    }

    fn max_abs_coordinate(&self) -> f64 {
        self.x
            .iter()
            .chain(self.v.iter().flatten())
            .fold(0.0f64, |acc, c| acc.max(c.abs()))
    }

    fn is_finite(&self) -> bool {
        self.x.iter().all(|c| c.is_finite()) && self.v.iter().flatten().all(|c| c.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolLaw {
    Ct1Fixed,
    Ct2Static,
    Ct2Dynamic,
    Ct1StateDep,
    Ct2StateDep,
    Dt1Fixed,
    Dt2Fixed,
    Dt1StateDep,
    Dt2StateDep,
}

impl ProtocolLaw {
    pub fn is_continuous(self) -> bool {
        matches!(
            self,
            ProtocolLaw::Ct1Fixed
                | ProtocolLaw::Ct2Static
                | ProtocolLaw::Ct2Dynamic
                | ProtocolLaw::Ct1StateDep
                | ProtocolLaw::Ct2StateDep
        )
    }

    pub fn is_second_order(self) -> bool {
        matches!(
            self,
            ProtocolLaw::Ct2Static
                | ProtocolLaw::Ct2Dynamic
                | ProtocolLaw::Ct2StateDep
                | ProtocolLaw::Dt2Fixed
                | ProtocolLaw::Dt2StateDep
        )
    }

    /// True for laws whose links are decided by the weight support.
    pub fn state_dependent_links(self) -> bool {
        matches!(
            self,
            ProtocolLaw::Ct1StateDep
                | ProtocolLaw::Ct2StateDep
                | ProtocolLaw::Dt1StateDep
                | ProtocolLaw::Dt2StateDep
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ProtocolLaw::Ct1Fixed => "ct1-fixed",
            ProtocolLaw::Ct2Static => "ct2-static",
            ProtocolLaw::Ct2Dynamic => "ct2-dynamic",
            ProtocolLaw::Ct1StateDep => "ct1-state-dep",
            ProtocolLaw::Ct2StateDep => "ct2-state-dep",
            ProtocolLaw::Dt1Fixed => "dt1-fixed",
            ProtocolLaw::Dt2Fixed => "dt2-fixed",
            ProtocolLaw::Dt1StateDep => "dt1-state-dep",
            ProtocolLaw::Dt2StateDep => "dt2-state-dep",
        }
    }
}

impl std::fmt::Display for ProtocolLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A control law plus its gains and, for continuous time, the RK4 step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSpec {
    pub law: ProtocolLaw,
    /// Velocity feedback gain for `ct2-static` / `ct2-state-dep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Position step gain for the second-order discrete maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    /// Velocity damping gain for the second-order discrete maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    /// Coupling gain for the second-order discrete maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k3: Option<f64>,
    /// Control gain for the first-order discrete maps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// RK4 step for continuous-time laws.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

impl ProtocolSpec {
    pub fn ct1_fixed(dt: f64) -> Result<Self> {
        Self::checked(
            ProtocolLaw::Ct1Fixed,
            None,
            None,
            None,
            None,
            None,
            Some(dt),
        )
    }

    pub fn ct2_static(k: f64, dt: f64) -> Result<Self> {
        Self::checked(
            ProtocolLaw::Ct2Static,
            Some(k),
            None,
            None,
            None,
            None,
            Some(dt),
        )
    }

    pub fn ct2_dynamic(dt: f64) -> Result<Self> {
        Self::checked(
            ProtocolLaw::Ct2Dynamic,
            None,
            None,
            None,
            None,
            None,
            Some(dt),
        )
    }

    pub fn ct1_state_dep(dt: f64) -> Result<Self> {
        Self::checked(
            ProtocolLaw::Ct1StateDep,
            None,
            None,
            None,
            None,
            None,
            Some(dt),
        )
    }

    pub fn ct2_state_dep(k: f64, dt: f64) -> Result<Self> {
        Self::checked(
            ProtocolLaw::Ct2StateDep,
            Some(k),
            None,
            None,
            None,
            None,
            Some(dt),
        )
    }

    pub fn dt1_fixed(h: f64) -> Result<Self> {
        Self::checked(ProtocolLaw::Dt1Fixed, None, None, None, None, Some(h), None)
    }

    pub fn dt2_fixed(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        Self::checked(
            ProtocolLaw::Dt2Fixed,
            None,
            Some(k1),
            Some(k2),
            Some(k3),
            None,
            None,
        )
    }

    pub fn dt1_state_dep(h: f64) -> Result<Self> {
        Self::checked(
            ProtocolLaw::Dt1StateDep,
            None,
            None,
            None,
            None,
            Some(h),
            None,
        )
    }

    pub fn dt2_state_dep(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        Self::checked(
            ProtocolLaw::Dt2StateDep,
            None,
            Some(k1),
            Some(k2),
            Some(k3),
            None,
            None,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn checked(
        law: ProtocolLaw,
        k: Option<f64>,
        k1: Option<f64>,
        k2: Option<f64>,
        k3: Option<f64>,
        h: Option<f64>,
        dt: Option<f64>,
    ) -> Result<Self> {
        let spec = ProtocolSpec {
            law,
            k,
            k1,
            k2,
            k3,
            h,
            dt,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Check gains and step against the law: all present gains must be
    /// strictly positive, required ones present, irrelevant ones absent.
    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| {
            Err(Error::InvalidParameter {
                what: "protocol spec",
                why,
            })
        };
        let need = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(g) if g > 0.0 => Ok(()),
                Some(g) => bad(format!("{name} must be positive, got {g}")),
                None => bad(format!("law {} requires {name}", self.law)),
            }
        };
        let forbid = |name: &str, v: Option<f64>| -> Result<()> {
            if v.is_some() {
                bad(format!("law {} does not take {name}", self.law))
            } else {
                Ok(())
            }
        };
        if self.law.is_continuous() {
            need("dt", self.dt)?;
        } else {
            forbid("dt", self.dt)?;
        }
        match self.law {
            ProtocolLaw::Ct2Static | ProtocolLaw::Ct2StateDep => need("k", self.k)?,
            _ => forbid("k", self.k)?,
        }
        match self.law {
            ProtocolLaw::Dt1Fixed | ProtocolLaw::Dt1StateDep => need("h", self.h)?,
            _ => forbid("h", self.h)?,
        }
        match self.law {
            ProtocolLaw::Dt2Fixed | ProtocolLaw::Dt2StateDep => {
                need("k1", self.k1)?;
                need("k2", self.k2)?;
                need("k3", self.k3)?;
            }
            _ => {
                forbid("k1", self.k1)?;
                forbid("k2", self.k2)?;
                forbid("k3", self.k3)?;
            }
        }
        Ok(())
    }

    pub fn feedback_k(&self) -> Option<f64> {
        self.k
    }

    pub fn step_gain(&self) -> Option<f64> {
        self.h
    }

    pub fn second_order_gains(&self) -> Option<(f64, f64, f64)> {
        match (self.k1, self.k2, self.k3) {
            (Some(a), Some(b), Some(c)) => Some((a, b, c)),
            _ => None,
        }
    }
}

fn check_state_for_law(spec: &ProtocolSpec, state: &SystemState) -> Result<()> {
    if spec.law.is_second_order() && state.velocities().is_none() {
        return Err(Error::MissingVelocities {
            law: spec.law.to_string(),
        });
    }
    if !spec.law.is_second_order() && state.velocities().is_some() {
        return Err(Error::UnexpectedVelocities {
            law: spec.law.to_string(),
        });
    }
    Ok(())
}

fn check_weight_for_law(spec: &ProtocolSpec, weight: &WeightFunction) -> Result<()> {
    if spec.law.is_continuous() && weight.is_discontinuous() {
        return Err(Error::DiscontinuousWeightInContinuousTime);
    }
    Ok(())
}

/// Pairwise coupling sums `sum_j G_ij alpha_ij (y_j - y_i)` for positions
/// and, when requested, velocities, sharing one weight evaluation per pair.
fn couplings(
    spec: &ProtocolSpec,
    graph: &WeightedGraph,
    weight: &WeightFunction,
    state: &SystemState,
    with_velocity: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let (n, m) = (state.n(), state.m());
    let mut coup_x = vec![0.0; n * m];
    let mut coup_v = if with_velocity {
        Some(vec![0.0; n * m])
    } else {
        None
    };
    let live_links = spec.law.state_dependent_links();
    let v = state.velocities();
    for i in 0..n {
        for j in (i + 1)..n {
            if !(live_links || graph.has_link(i, j)) {
                continue;
            }
            let a = weight.evaluate(state.dist2(i, j))?;
            if a == 0.0 {
                continue;
            }
            for d in 0..m {
                let delta = state.x[j * m + d] - state.x[i * m + d];
                coup_x[i * m + d] += a * delta;
                coup_x[j * m + d] -= a * delta;
            }
            if let (Some(cv), Some(v)) = (coup_v.as_mut(), v) {
                for d in 0..m {
                    let delta = v[j * m + d] - v[i * m + d];
                    cv[i * m + d] += a * delta;
                    cv[j * m + d] -= a * delta;
                }
            }
        }
    }
    Ok((coup_x, coup_v))
}

/// The control vector `u` for the selected law at the given state.
pub fn control_input(
    spec: &ProtocolSpec,
    graph: &WeightedGraph,
    weight: &WeightFunction,
    state: &SystemState,
) -> Result<Vec<f64>> {
    spec.validate()?;
    check_state_for_law(spec, state)?;
    check_weight_for_law(spec, weight)?;
    if graph.n() != state.n() {
        return Err(Error::DimensionMismatch {
            expected: graph.n(),
            actual: state.n(),
        });
    }
    let needs_velocity_coupling = spec.law == ProtocolLaw::Ct2Dynamic;
    let (coup_x, coup_v) = couplings(spec, graph, weight, state, needs_velocity_coupling)?;
    let nm = state.n() * state.m();
    let mut u = vec![0.0; nm];
    match spec.law {
        ProtocolLaw::Ct1Fixed | ProtocolLaw::Ct1StateDep => u.copy_from_slice(&coup_x),
        ProtocolLaw::Ct2Static | ProtocolLaw::Ct2StateDep => {
            let k = spec.k.expect("validated");
            let v = state.velocities().expect("validated");
            for i in 0..nm {
                u[i] = -k * v[i] + coup_x[i];
            }
        }
        ProtocolLaw::Ct2Dynamic => {
            let cv = coup_v.expect("requested");
            for i in 0..nm {
                u[i] = cv[i] + coup_x[i];
            }
        }
        ProtocolLaw::Dt1Fixed | ProtocolLaw::Dt1StateDep => {
            let h = spec.h.expect("validated");
            for i in 0..nm {
                u[i] = h * coup_x[i];
            }
        }
        ProtocolLaw::Dt2Fixed | ProtocolLaw::Dt2StateDep => {
            let (_, k2, k3) = spec.second_order_gains().expect("validated");
            let v = state.velocities().expect("validated");
            for i in 0..nm {
                u[i] = -k2 * v[i] + k3 * coup_x[i];
            }
        }
    }
    Ok(u)
}

/// Time derivative of the flat (x, v?) vector for continuous-time laws.
fn derivative(
    spec: &ProtocolSpec,
    graph: &WeightedGraph,
    weight: &WeightFunction,
    state: &SystemState,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let u = control_input(spec, graph, weight, state)?;
    if spec.law.is_second_order() {
        let v = state.velocities().expect("second order").to_vec();
        Ok((v, Some(u)))
    } else {
        Ok((u, None))
    }
}

/// One classical RK4 step of size `spec.dt`; the state-dependent weights are
/// re-evaluated at every stage.
pub fn step_continuous(
    spec: &ProtocolSpec,
    graph: &WeightedGraph,
    weight: &WeightFunction,
    state: &SystemState,
) -> Result<SystemState> {
    spec.validate()?;
    if !spec.law.is_continuous() {
        return Err(Error::InvalidParameter {
            what: "protocol spec",
            why: format!("law {} is discrete-time", spec.law),
        });
    }
    check_state_for_law(spec, state)?;
    let dt = spec.dt.expect("validated");
    let (n, m) = (state.n(), state.m());
    let nm = n * m;
    let second = spec.law.is_second_order();

    let offset =
        |base: &SystemState, dx: &[f64], dv: &Option<Vec<f64>>, scale: f64| -> SystemState {
            let mut x = base.x.clone();
            for i in 0..nm {
                x[i] += scale * dx[i];
            }
            let v = base.v.as_ref().map(|v0| {
                let dv = dv.as_ref().expect("second order stage");
                let mut v = v0.clone();
                for i in 0..nm {
                    v[i] += scale * dv[i];
                }
                v
            });
            SystemState { n, m, x, v }
        };

    let (k1x, k1v) = derivative(spec, graph, weight, state)?;
    let s2 = offset(state, &k1x, &k1v, 0.5 * dt);
    let (k2x, k2v) = derivative(spec, graph, weight, &s2)?;
    let s3 = offset(state, &k2x, &k2v, 0.5 * dt);
    let (k3x, k3v) = derivative(spec, graph, weight, &s3)?;
    let s4 = offset(state, &k3x, &k3v, dt);
    let (k4x, k4v) = derivative(spec, graph, weight, &s4)?;

    let mut x = state.x.clone();
    for i in 0..nm {
        x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
    }
    let v = if second {
        let v0 = state.v.as_ref().expect("second order");
        let (a, b, c, d) = (
            k1v.as_ref().unwrap(),
            k2v.as_ref().unwrap(),
            k3v.as_ref().unwrap(),
            k4v.as_ref().unwrap(),
        );
        let mut v = v0.clone();
        for i in 0..nm {
            v[i] += dt / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
        }
        Some(v)
    } else {
        None
    };
    let next = SystemState { n, m, x, v };
    let magnitude = next.max_abs_coordinate();
    if !next.is_finite() || magnitude > BLOWUP_THRESHOLD {
        // The caller (`simulate`) knows the absolute time and fills it in.
        return Err(Error::IntegrationBlowup {
            time: None,
            magnitude,
            partial: None,
        });
    }
    Ok(next)
}

/// One application of the exact discrete-time map.
pub fn step_discrete(
    spec: &ProtocolSpec,
    graph: &WeightedGraph,
    weight: &WeightFunction,
    state: &SystemState,
) -> Result<SystemState> {
    spec.validate()?;
    if spec.law.is_continuous() {
        return Err(Error::InvalidParameter {
            what: "protocol spec",
            why: format!("law {} is continuous-time", spec.law),
        });
    }
    let u = control_input(spec, graph, weight, state)?;
    let (n, m) = (state.n(), state.m());
    let nm = n * m;
    if spec.law.is_second_order() {
        let (k1, _, _) = spec.second_order_gains().expect("validated");
        let v0 = state.velocities().expect("validated");
        let mut x = state.x.clone();
        let mut v = v0.to_vec();
        for i in 0..nm {
            x[i] += k1 * v0[i];
            v[i] += u[i];
        }
        Ok(SystemState {
            n,
            m,
            x,
            v: Some(v),
        })
    } else {
        let mut x = state.x.clone();
        for i in 0..nm {
            x[i] += u[i];
        }
        Ok(SystemState { n, m, x, v: None })
    }
}

/// Run length: wall time for continuous laws, a step count for either kind.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Horizon {
    Time(f64),
    Steps(usize),
}

impl Horizon {
    pub fn step_count(&self, spec: &ProtocolSpec) -> Result<usize> {
        match *self {
            Horizon::Steps(s) => Ok(s),
            Horizon::Time(t) => {
                if !spec.law.is_continuous() {
                    return Err(Error::InvalidParameter {
                        what: "horizon",
                        why: "a time horizon needs a continuous-time law".into(),
                    });
                }
                if t < 0.0 {
                    return Err(Error::NegativeInput {
                        what: "horizon",
                        value: t,
                    });
                }
                let dt = spec.dt.expect("validated continuous law");
                Ok((t / dt).round() as usize)
            }
        }
    }
}

/// Sampled trajectory: strictly increasing instants, one state per instant,
/// monitor values aligned with `monitor_ids`.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<SystemState>,
    pub monitor_ids: Vec<MonitorId>,
    /// One row per sample, one column per monitor.
    pub monitor_values: Vec<Vec<f64>>,
    /// Set when the run was cut short by a blowup: (time, magnitude).
    pub blowup: Option<(f64, f64)>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial_state(&self) -> &SystemState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &SystemState {
        self.states.last().expect("non-empty record")
    }

    /// Column of values for one monitor, if it was recorded.
    pub fn monitor_series(&self, id: MonitorId) -> Option<Vec<f64>> {
        let col = self.monitor_ids.iter().position(|&m| m == id)?;
        Some(self.monitor_values.iter().map(|row| row[col]).collect())
    }
}

/// Iterate the law from `initial`, recording every `sample_every`-th step
/// (plus the initial and final states) together with monitor values.
///
/// Deterministic: identical inputs produce identical records. A blowup stops
/// the run and surfaces as [`Error::IntegrationBlowup`] carrying the partial
/// record.
#[allow(clippy::too_many_arguments)]
pub fn simulate(
    spec: &ProtocolSpec,
    graph: &WeightedGraph,
    weight: &WeightFunction,
    initial: &SystemState,
    horizon: Horizon,
    sample_every: usize,
    monitors: &[MonitorId],
    staircase_r: f64,
) -> Result<TrajectoryRecord> {
    spec.validate()?;
    check_state_for_law(spec, initial)?;
    let steps = horizon.step_count(spec)?;
    let stride = sample_every.max(1);
    let continuous = spec.law.is_continuous();
    let dt = if continuous {
        spec.dt.expect("validated")
    } else {
        1.0
    };

    let mut record = TrajectoryRecord {
        times: Vec::new(),
        states: Vec::new(),
        monitor_ids: monitors.to_vec(),
        monitor_values: Vec::new(),
        blowup: None,
    };
    let push_sample = |record: &mut TrajectoryRecord, t: f64, state: &SystemState| -> Result<()> {
        let mut row = Vec::with_capacity(monitors.len());
        for &id in monitors {
            row.push(monitors::evaluate_monitor(
                id,
                graph,
                weight,
                spec,
                state,
                staircase_r,
            )?);
        }
        record.times.push(t);
        record.states.push(state.clone());
        record.monitor_values.push(row);
        Ok(())
    };

    let mut state = initial.clone();
    push_sample(&mut record, 0.0, &state)?;
    for step in 1..=steps {
        let t = step as f64 * dt;
        let next = if continuous {
            step_continuous(spec, graph, weight, &state)
        } else {
            step_discrete(spec, graph, weight, &state)
        };
        state = match next {
            Ok(s) => s,
            Err(Error::IntegrationBlowup { magnitude, .. }) => {
                record.blowup = Some((t, magnitude));
                return Err(Error::IntegrationBlowup {
                    time: Some(t),
                    magnitude,
                    partial: Some(Box::new(record)),
                });
            }
            Err(e) => return Err(e),
        };
        // Discrete maps have no internal blowup check; guard here.
        let magnitude = state.max_abs_coordinate();
        if !state.is_finite() || magnitude > BLOWUP_THRESHOLD {
            record.blowup = Some((t, magnitude));
            return Err(Error::IntegrationBlowup {
                time: Some(t),
                magnitude,
                partial: Some(Box::new(record)),
            });
        }
        if step % stride == 0 || step == steps {
            push_sample(&mut record, t, &state)?;
        }
    }
    Ok(record)
}
