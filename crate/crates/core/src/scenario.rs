//! Reproducible scenario fixtures and the runner that ties the library
//! together: build a configuration, realize it into graph + weight +
//! protocol + initial state, simulate, detect the verdict, and evaluate the
//! configured criteria.
//!
//! Scenarios serialize to a flat TOML document (see the repository README
//! for the schema and one annotated example per builtin). Every builtin is
//! fully pinned: explicit values or explicit seeds, so runs are
//! reproducible byte for byte.

use serde::{Deserialize, Serialize};

use crate::conditions::{
    check_gain_constraints, check_initial_condition, predict_consensus_state, ConditionId,
    ConditionReport,
};
use crate::dynamics::{simulate, Horizon, ProtocolSpec, SystemState, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::monitors::{detect_consensus, MonitorId, Verdict};
use crate::rng::SplitMix64;
use crate::weight::WeightFunction;

pub const DEFAULT_POS_TOL: f64 = 1e-3;
pub const DEFAULT_VEL_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSpec {
    /// Complete fixed-link graph on the initial state's agent count.
    Complete,
    /// Links decided by the weight support.
    StateDependent,
    /// Explicit fixed edge list.
    Edges { n: usize, list: Vec<(usize, usize)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Fully pinned values.
    Explicit {
        n: usize,
        m: usize,
        x: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v: Option<Vec<f64>>,
    },
    /// Scalar opinions `origin, origin + spacing, ...` with no velocities.
    EvenlySpaced { n: usize, spacing: f64, origin: f64 },
    /// Uniform draws from a box, optionally with velocities.
    RandomBox {
        n: usize,
        m: usize,
        low: f64,
        high: f64,
        seed: u64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        velocity_low: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        velocity_high: Option<f64>,
        /// Shift the drawn velocities so they sum to zero exactly.
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        balance_velocities: bool,
    },
    /// Scalar opinions symmetric about the center of `[0, span]`.
    SymmetricRandom { n: usize, span: f64, seed: u64 },
}

/// Serialized run length; mirrors [`Horizon`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HorizonSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

impl HorizonSpec {
    pub fn time(t: f64) -> Self {
        HorizonSpec {
            time: Some(t),
            steps: None,
        }
    }

    pub fn steps(s: usize) -> Self {
        HorizonSpec {
            time: None,
            steps: Some(s),
        }
    }

    pub fn to_horizon(self) -> Result<Horizon> {
        match (self.time, self.steps) {
            (Some(t), None) => Ok(Horizon::Time(t)),
            (None, Some(s)) => Ok(Horizon::Steps(s)),
            _ => Err(Error::Config(
                "horizon needs exactly one of `time` or `steps`".into(),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub horizon: HorizonSpec,
    /// Record every k-th step (the initial and final states always land in
    /// the record).
    pub sample_every: usize,
    /// Grid width for staircase-based monitors and criteria.
    pub staircase_r: f64,
    pub monitors: Vec<MonitorId>,
    pub conditions: Vec<ConditionId>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
    pub graph: GraphSpec,
    pub weight: WeightFunction,
    pub protocol: ProtocolSpec,
    pub initial: InitialSpec,
}

impl ScenarioConfig {
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.weight.validate()?;
        self.protocol.validate()?;
        if self.staircase_r < 0.0 {
            return Err(Error::NegativeInput {
                what: "staircase grid width",
                value: self.staircase_r,
            });
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be at least 1".into()));
        }
        if self.protocol.law.state_dependent_links()
            && !matches!(self.graph, GraphSpec::StateDependent)
        {
            return Err(Error::Config(format!(
                "law {} needs a state-dependent graph",
                self.protocol.law
            )));
        }
        self.horizon.to_horizon()?;
        Ok(())
    }

    /// Materialize the graph, weight, protocol, and initial state.
    /// `seed_override` replaces the seed of seeded generators.
    pub fn realize(&self, seed_override: Option<u64>) -> Result<RealizedScenario> {
        self.validate()?;
        let initial = build_initial(
            &self.initial,
            self.protocol.law.is_second_order(),
            seed_override,
        )?;
        let n = initial.n();
        let graph = match &self.graph {
            GraphSpec::Complete => WeightedGraph::complete(n),
            GraphSpec::StateDependent => WeightedGraph::state_dependent(n),
            GraphSpec::Edges { n: gn, list } => {
                if *gn != n {
                    return Err(Error::DimensionMismatch {
                        expected: *gn,
                        actual: n,
                    });
                }
                WeightedGraph::from_edges(*gn, list)?
            }
        };
        Ok(RealizedScenario {
            graph,
            weight: self.weight.clone(),
            protocol: self.protocol.clone(),
            initial,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RealizedScenario {
    pub graph: WeightedGraph,
    pub weight: WeightFunction,
    pub protocol: ProtocolSpec,
    pub initial: SystemState,
}

fn build_initial(
    spec: &InitialSpec,
    second_order: bool,
    seed_override: Option<u64>,
) -> Result<SystemState> {
    let state = match spec {
        InitialSpec::Explicit { n, m, x, v } => match v {
            Some(v) => SystemState::second_order(*n, *m, x.clone(), v.clone())?,
            None => SystemState::first_order(*n, *m, x.clone())?,
        },
        InitialSpec::EvenlySpaced { n, spacing, origin } => {
            evenly_spaced_opinions(*n, *spacing, *origin)?
        }
        InitialSpec::RandomBox {
            n,
            m,
            low,
            high,
            seed,
            velocity_low,
            velocity_high,
            balance_velocities,
        } => {
            let velocities = match (velocity_low, velocity_high) {
                (Some(lo), Some(hi)) => Some((*lo, *hi)),
                (None, None) => None,
                _ => {
                    return Err(Error::Config(
                        "velocity bounds need both velocity_low and velocity_high".into(),
                    ))
                }
            };
            let mut state = random_initial(
                *n,
                *m,
                *low,
                *high,
                seed_override.unwrap_or(*seed),
                velocities,
            )?;
            if *balance_velocities {
                state = balance(state)?;
            }
            state
        }
        InitialSpec::SymmetricRandom { n, span, seed } => {
            symmetric_random_opinions(*n, *span, seed_override.unwrap_or(*seed))?
        }
    };
    if second_order && state.velocities().is_none() {
        return Err(Error::Config(
            "a second-order law needs initial velocities".into(),
        ));
    }
    if !second_order && state.velocities().is_some() {
        return Err(Error::Config(
            "a first-order law must not carry initial velocities".into(),
        ));
    }
    Ok(state)
}

/// Shift velocities so each coordinate sums to zero exactly (the residual
/// of the float subtraction is folded into the last agent).
fn balance(state: SystemState) -> Result<SystemState> {
    let (n, m) = (state.n(), state.m());
    let Some(v) = state.velocities() else {
        return Ok(state);
    };
    let mut v = v.to_vec();
    for d in 0..m {
        let mean = (0..n).map(|i| v[i * m + d]).sum::<f64>() / n as f64;
        for i in 0..n {
            v[i * m + d] -= mean;
        }
        let residual: f64 = (0..n).map(|i| v[i * m + d]).sum();
        v[(n - 1) * m + d] -= residual;
    }
    SystemState::second_order(n, m, state.positions().to_vec(), v)
}

/// Scalar opinions `origin, origin + spacing, ..., origin + (n-1) spacing`.
pub fn evenly_spaced_opinions(n: usize, spacing: f64, origin: f64) -> Result<SystemState> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            what: "evenly spaced opinions",
            why: "need at least two agents".into(),
        });
    }
    if !(spacing > 0.0) {
        return Err(Error::InvalidParameter {
            what: "evenly spaced opinions",
            why: format!("spacing must be positive, got {spacing}"),
        });
    }
    let x = (0..n).map(|i| origin + i as f64 * spacing).collect();
    SystemState::first_order(n, 1, x)
}

/// Uniform per-coordinate draws from `[low, high)`, using the pinned
/// SplitMix64 stream; identical seeds give identical states.
pub fn random_initial(
    n: usize,
    m: usize,
    low: f64,
    high: f64,
    seed: u64,
    velocity_bounds: Option<(f64, f64)>,
) -> Result<SystemState> {
    if !(high > low) {
        return Err(Error::InvalidParameter {
            what: "random box",
            why: format!("empty bounds [{low}, {high})"),
        });
    }
    let mut rng = SplitMix64::new(seed);
    let x = (0..n * m).map(|_| rng.uniform(low, high)).collect();
    match velocity_bounds {
        None => SystemState::first_order(n, m, x),
        Some((lo, hi)) => {
            if !(hi > lo) {
                return Err(Error::InvalidParameter {
                    what: "random box",
                    why: format!("empty velocity bounds [{lo}, {hi})"),
                });
            }
            let v = (0..n * m).map(|_| rng.uniform(lo, hi)).collect();
            SystemState::second_order(n, m, x, v)
        }
    }
}

/// Scalar opinions symmetric about `span / 2`: mirror pairs share the
/// midpoint exactly, the center agent (odd n) sits on it.
pub fn symmetric_random_opinions(n: usize, span: f64, seed: u64) -> Result<SystemState> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            what: "symmetric opinions",
            why: "need at least two agents".into(),
        });
    }
    if !(span > 0.0) {
        return Err(Error::InvalidParameter {
            what: "symmetric opinions",
            why: format!("span must be positive, got {span}"),
        });
    }
    let mut rng = SplitMix64::new(seed);
    let center = span / 2.0;
    let half = n / 2;
    let mut offsets: Vec<f64> = (0..half).map(|_| rng.uniform(0.0, center)).collect();
    offsets.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut x = Vec::with_capacity(n);
    for &o in &offsets {
        x.push(center - o);
    }
    if n % 2 == 1 {
        x.push(center);
    }
    for &o in offsets.iter().rev() {
        x.push(center + o);
    }
    SystemState::first_order(n, 1, x)
}

/// Everything a finished run reports.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub scenario: String,
    pub trajectory: TrajectoryRecord,
    pub verdict: Verdict,
    pub final_max_pairwise: f64,
    /// Closed-form agreement point, when the law has one.
    pub predicted: Option<Vec<f64>>,
    /// Mean of the final positions.
    pub observed: Vec<f64>,
    /// Max-norm gap between predicted and observed.
    pub prediction_error: Option<f64>,
    pub condition_reports: Vec<ConditionReport>,
    /// Criteria that could not be evaluated, with the reason.
    pub condition_errors: Vec<(ConditionId, String)>,
}

/// Evaluate the scenario's configured criteria against its initial state.
pub fn evaluate_conditions(
    config: &ScenarioConfig,
    realized: &RealizedScenario,
) -> (Vec<ConditionReport>, Vec<(ConditionId, String)>) {
    let mut reports = Vec::new();
    let mut errors = Vec::new();
    for &cond in &config.conditions {
        let result = match cond {
            ConditionId::Gain => {
                check_gain_constraints(&realized.protocol, &realized.weight, &realized.graph)
            }
            _ => check_initial_condition(
                cond,
                &realized.graph,
                &realized.weight,
                &realized.initial,
                config.staircase_r,
                Some(&realized.protocol),
            ),
        };
        match result {
            Ok(rep) => reports.push(rep),
            Err(e) => errors.push((cond, e.to_string())),
        }
    }
    (reports, errors)
}

/// Simulate a scenario end to end. A blowup is not an error here: it yields
/// the partial trajectory and the `diverged` verdict.
pub fn run_scenario(
    config: &ScenarioConfig,
    seed_override: Option<u64>,
    pos_tol: f64,
    vel_tol: f64,
) -> Result<RunOutcome> {
    let realized = config.realize(seed_override)?;
    let (condition_reports, condition_errors) = evaluate_conditions(config, &realized);
    let horizon = config.horizon.to_horizon()?;
    let trajectory = match simulate(
        &realized.protocol,
        &realized.graph,
        &realized.weight,
        &realized.initial,
        horizon,
        config.sample_every,
        &config.monitors,
        config.staircase_r,
    ) {
        Ok(t) => t,
        Err(Error::IntegrationBlowup {
            partial: Some(partial),
            ..
        }) => *partial,
        Err(e) => return Err(e),
    };
    let verdict = detect_consensus(&trajectory, pos_tol, vel_tol);
    let final_state = trajectory.final_state();
    let observed = final_state.mean_position();
    let predicted = predict_consensus_state(&realized.protocol, &realized.initial).ok();
    let prediction_error = predicted.as_ref().map(|p| {
        p.iter()
            .zip(&observed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    Ok(RunOutcome {
        scenario: config.name.clone(),
        final_max_pairwise: final_state.max_pairwise_distance(),
        trajectory,
        verdict,
        predicted,
        observed,
        prediction_error,
        condition_reports,
        condition_errors,
    })
}

/// Builtin scenario names with one-line descriptions, in listing order.
pub fn builtin_catalog() -> &'static [(&'static str, &'static str)] {
    &[
        (
            "cs-ct2-static",
            "6 agents, damped second-order flocking weight (h=1, beta=3), complete graph",
        ),
        (
            "cs-dt2",
            "6 agents, discrete second-order flocking weight (h=1, beta=1), gains 1/1.5/0.14",
        ),
        (
            "cs-ct2-dynamic-fail",
            "6 agents, undamped second-order, weak coupling h=1: the initial-state bound fails",
        ),
        (
            "cs-ct2-dynamic-pass",
            "same initial state with h=150: the initial-state bound holds",
        ),
        (
            "opinion-ct-fail",
            "20 evenly spaced opinions, smoothed confidence, spacing 0.2: splits into clusters",
        ),
        (
            "opinion-ct-pass",
            "20 evenly spaced opinions, smoothed confidence, spacing 0.05: average consensus",
        ),
        (
            "opinion-dt-fail",
            "15 evenly spaced opinions, step confidence, spacing 0.35: no consensus",
        ),
        (
            "opinion-dt-pass",
            "15 evenly spaced opinions, step confidence, spacing 0.08: average consensus",
        ),
        (
            "opinion-dt-linear",
            "20 opinions, linearly decaying weight: the grid width decides the criterion",
        ),
        (
            "rendezvous-ct",
            "6 planar agents, damped second-order, smoothed confidence: rendezvous",
        ),
        (
            "rendezvous-dt",
            "6 planar agents, discrete second-order, step confidence: rendezvous",
        ),
    ]
}

pub fn builtin_names() -> Vec<&'static str> {
    builtin_catalog().iter().map(|(n, _)| *n).collect()
}

/// Build a builtin scenario. `cs-ct2-dynamic-pass` verifies its own
/// initial-state bound at construction so the fixture cannot silently
/// drift out of the certified regime.
pub fn build_builtin(name: &str) -> Result<ScenarioConfig> {
    let config = match name {
        "cs-ct2-static" => ScenarioConfig {
            name: name.into(),
            horizon: HorizonSpec::time(100.0),
            sample_every: 10,
            staircase_r: 0.0,
            monitors: vec![
                MonitorId::VCt2Static,
                MonitorId::MaxPairwiseDist,
                MonitorId::MaxSpeed,
            ],
            conditions: vec![],
            notes: String::new(),
            graph: GraphSpec::Complete,
            weight: WeightFunction::cucker_smale(1.0, 3.0)?,
            protocol: ProtocolSpec::ct2_static(1.0, 0.01)?,
            initial: InitialSpec::RandomBox {
                n: 6,
                m: 1,
                low: 0.0,
                high: 1.0,
                seed: 11,
                velocity_low: Some(-0.5),
                velocity_high: Some(0.5),
                balance_velocities: false,
            },
        },
        "cs-dt2" => ScenarioConfig {
            name: name.into(),
            horizon: HorizonSpec::steps(2000),
            sample_every: 10,
            staircase_r: 0.0,
            monitors: vec![
                MonitorId::VDt2,
                MonitorId::MaxPairwiseDist,
                MonitorId::MaxSpeed,
            ],
            conditions: vec![ConditionId::Gain],
            notes: String::new(),
            graph: GraphSpec::Complete,
            weight: WeightFunction::cucker_smale(1.0, 1.0)?,
            protocol: ProtocolSpec::dt2_fixed(1.0, 1.5, 0.14)?,
            initial: InitialSpec::RandomBox {
                n: 6,
                m: 1,
                low: 0.0,
                high: 10.0,
                seed: 2024,
                velocity_low: Some(-1.0),
                velocity_high: Some(1.0),
                balance_velocities: false,
            },
        },
        "cs-ct2-dynamic-fail" => cs_ct2_dynamic(name, 1.0, 0.01)?,
        "cs-ct2-dynamic-pass" => {
            // Strong coupling shrinks the integration step: the stiffest
            // mode scales like n * h, and RK4 needs lambda * dt under ~2.8.
            let config = cs_ct2_dynamic(name, 150.0, 0.001)?;
            let realized = config.realize(None)?;
            let rep = check_initial_condition(
                ConditionId::Cor1,
                &realized.graph,
                &realized.weight,
                &realized.initial,
                config.staircase_r,
                Some(&realized.protocol),
            )?;
            if !rep.holds {
                return Err(Error::Config(format!(
                    "cs-ct2-dynamic-pass must satisfy its initial-state bound; got {rep}; \
                     change the pinned initial state explicitly instead of letting it drift"
                )));
            }
            config
        }
        "opinion-ct-fail" => opinion_ct(name, 0.2)?,
        "opinion-ct-pass" => opinion_ct(name, 0.05)?,
        "opinion-dt-fail" => opinion_dt(name, 0.35)?,
        "opinion-dt-pass" => opinion_dt(name, 0.08)?,
        "opinion-dt-linear" => {
            let n = 20;
            let alpha0 = 25.0;
            ScenarioConfig {
                name: name.into(),
                horizon: HorizonSpec::steps(600),
                sample_every: 5,
                staircase_r: 1.8,
                monitors: vec![MonitorId::WStaircase, MonitorId::MaxPairwiseDist],
                conditions: vec![ConditionId::Gain, ConditionId::Thm11],
                notes: "weight alpha(s) = 25 - 10 s vanishes at s = 2.5, i.e. at distance \
                        sqrt(2.5) ~ 1.581; a confidence radius of 1.5 is sometimes quoted \
                        for this parameter set but is inconsistent with the formula, so the \
                        natural cutoff 2.5 is used throughout"
                    .into(),
                graph: GraphSpec::StateDependent,
                weight: WeightFunction::linear_decay(25.0, 10.0)?,
                protocol: ProtocolSpec::dt1_state_dep(1.0 / (alpha0 * n as f64))?,
                initial: InitialSpec::EvenlySpaced {
                    n,
                    spacing: 0.07,
                    origin: 0.0,
                },
            }
        }
        "rendezvous-ct" => ScenarioConfig {
            name: name.into(),
            horizon: HorizonSpec::time(50.0),
            sample_every: 10,
            staircase_r: 0.1,
            monitors: vec![
                MonitorId::VCt2Static,
                MonitorId::MaxPairwiseDist,
                MonitorId::MaxSpeed,
            ],
            conditions: vec![ConditionId::Thm5],
            notes: String::new(),
            graph: GraphSpec::StateDependent,
            weight: WeightFunction::smoothed_confidence(1.0, 1.0, 0.1)?,
            protocol: ProtocolSpec::ct2_state_dep(1.0, 0.01)?,
            initial: InitialSpec::Explicit {
                n: 6,
                m: 2,
                x: vec![
                    -0.30, -0.10, -0.15, 0.20, 0.00, -0.25, 0.10, 0.15, 0.25, -0.05, 0.30, 0.22,
                ],
                v: Some(vec![0.0; 12]),
            },
        },
        "rendezvous-dt" => ScenarioConfig {
            name: name.into(),
            horizon: HorizonSpec::steps(2000),
            sample_every: 10,
            staircase_r: 0.1,
            monitors: vec![
                MonitorId::VDt2,
                MonitorId::MaxPairwiseDist,
                MonitorId::MaxSpeed,
            ],
            conditions: vec![ConditionId::Gain, ConditionId::Thm9],
            notes: String::new(),
            graph: GraphSpec::StateDependent,
            weight: WeightFunction::step_confidence(1.0)?,
            protocol: ProtocolSpec::dt2_state_dep(1.0, 1.5, 0.14)?,
            initial: InitialSpec::Explicit {
                n: 6,
                m: 2,
                x: vec![
                    -0.12, -0.05, -0.08, 0.10, -0.02, -0.11, 0.03, 0.08, 0.09, -0.04, 0.10, 0.12,
                ],
                v: Some(vec![0.0; 12]),
            },
        },
        other => return Err(Error::UnknownScenario(other.to_string())),
    };
    config.validate()?;
    Ok(config)
}

/// Shared fixture for the undamped second-order pair: identical pinned
/// initial state, only the coupling strength (and the stable step) differ.
fn cs_ct2_dynamic(name: &str, coupling: f64, dt: f64) -> Result<ScenarioConfig> {
    Ok(ScenarioConfig {
        name: name.into(),
        horizon: HorizonSpec::time(100.0),
        sample_every: (0.1 / dt).round() as usize,
        staircase_r: 0.0,
        monitors: vec![
            MonitorId::VCt2Dynamic,
            MonitorId::MaxPairwiseDist,
            MonitorId::MaxSpeed,
        ],
        conditions: vec![ConditionId::Cor1],
        notes: String::new(),
        graph: GraphSpec::Complete,
        weight: WeightFunction::cucker_smale(coupling, 3.0)?,
        protocol: ProtocolSpec::ct2_dynamic(dt)?,
        initial: InitialSpec::Explicit {
            n: 6,
            m: 1,
            x: vec![0.05, 0.18, 0.32, 0.47, 0.61, 0.76],
            v: Some(vec![-2.5, -2.5, -2.5, 2.5, 2.5, 2.5]),
        },
    })
}

fn opinion_ct(name: &str, spacing: f64) -> Result<ScenarioConfig> {
    Ok(ScenarioConfig {
        name: name.into(),
        horizon: HorizonSpec::time(50.0),
        sample_every: 10,
        staircase_r: 0.0,
        monitors: vec![MonitorId::WStaircase, MonitorId::MaxPairwiseDist],
        conditions: vec![ConditionId::Thm10],
        notes: String::new(),
        graph: GraphSpec::StateDependent,
        weight: WeightFunction::smoothed_confidence(1.0, 1.0, 0.1)?,
        protocol: ProtocolSpec::ct1_state_dep(0.01)?,
        initial: InitialSpec::EvenlySpaced {
            n: 20,
            spacing,
            origin: 0.0,
        },
    })
}

fn opinion_dt(name: &str, spacing: f64) -> Result<ScenarioConfig> {
    let n = 15;
    Ok(ScenarioConfig {
        name: name.into(),
        horizon: HorizonSpec::steps(600),
        sample_every: 5,
        staircase_r: 0.1,
        monitors: vec![MonitorId::WStaircase, MonitorId::MaxPairwiseDist],
        conditions: vec![ConditionId::Gain, ConditionId::Thm11],
        notes: String::new(),
        graph: GraphSpec::StateDependent,
        weight: WeightFunction::step_confidence(1.0)?,
        protocol: ProtocolSpec::dt1_state_dep(1.0 / n as f64)?,
        initial: InitialSpec::EvenlySpaced {
            n: n as usize,
            spacing,
            origin: 0.0,
        },
    })
}
