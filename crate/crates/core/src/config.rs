//! Structured text configuration: parsing, serialization, dotted-key
//! overrides, and construction of the validated model objects.
//!
//! Layout (TOML):
//!
//! ```toml
//! [pressure]          # p0, gamma
//! [[arc]]             # id, tail, head, length, cells
//! [[node]]            # id, kind = "outer" | "junction", kappa = row-major
//!                     # matrix over the incident arcs in declared order
//! [[initial]]         # arc, kind = "constant" | "gaussian" | "perturbed"
//! [sim]               # cfl, t_end, output_every, junction_solver,
//!                     # safety_factor, snapshot_dir
//! [study]             # optional: dx_levels, reference_dx, fit_t_min
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PressureLaw;
use crate::network::{Arc, InitialCondition, Network, Node, NodeKind};
use crate::sim::{JunctionSolverKind, SimSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub pressure: PressureSection,
    #[serde(rename = "arc")]
    pub arcs: Vec<ArcSection>,
    #[serde(rename = "node")]
    pub nodes: Vec<NodeSection>,
    #[serde(rename = "initial")]
    pub initials: Vec<InitialSection>,
    pub sim: SimSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudySection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureSection {
    pub p0: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArcSection {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub length: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKindSection {
    Outer,
    Junction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSection {
    pub id: String,
    pub kind: NodeKindSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub arc: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverSection {
    Relaxation,
    Riemann,
}

fn default_cfl() -> f64 {
    0.9
}

fn default_safety() -> f64 {
    1.0
}

fn default_solver() -> SolverSection {
    SolverSection::Relaxation
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_every: Option<f64>,
    #[serde(default = "default_solver")]
    pub junction_solver: SolverSection,
    #[serde(default = "default_safety")]
    pub safety_factor: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dx_levels: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_dx: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_t_min: Option<f64>,
}

/// Study parameters with defaults resolved.
#[derive(Debug, Clone)]
pub struct StudyParams {
    pub dx_levels: Vec<f64>,
    /// `None` means one sixteenth of the finest level.
    pub reference_dx: Option<f64>,
    pub fit_t_min: f64,
}

impl Default for StudyParams {
    fn default() -> Self {
        Self {
            dx_levels: vec![0.0125, 0.00625, 0.003125, 0.0015625, 0.00078125],
            reference_dx: None,
            fit_t_min: 0.5,
        }
    }
}

/// Fully validated model objects ready to run.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub law: PressureLaw,
    pub network: Network,
    /// One initial condition per arc, aligned with `network.arcs()`.
    pub ics: Vec<InitialCondition>,
    pub sim: SimSpec,
    pub study: StudyParams,
}

/// Parse the configuration text; unknown keys are rejected with the parser's
/// line/key context.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn to_toml_string(cfg: &ConfigFile) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(e.to_string()))
}

/// Parse with `key=value` overrides applied to the raw TOML tree first.
/// Keys are dotted paths; numeric segments index arrays (`arc.0.cells`).
pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<ConfigFile> {
    let mut value: toml::Value =
        text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    for (key, raw) in overrides {
        apply_override(&mut value, key, raw)?;
    }
    ConfigFile::deserialize(value).map_err(|e| Error::Config(e.to_string()))
}

fn parse_scalar(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(value: &mut toml::Value, key: &str, raw: &str) -> Result<()> {
    let segments: Vec<&str> = key.split('.').collect();
    if segments.is_empty() {
        return Err(Error::Config(format!("empty override key in {key}={raw}")));
    }
    let mut cursor = value;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        if let Ok(idx) = seg.parse::<usize>() {
            let arr = cursor
                .as_array_mut()
                .ok_or_else(|| Error::Config(format!("override {key}: {seg} is not an array index")))?;
            if idx >= arr.len() {
                return Err(Error::Config(format!(
                    "override {key}: index {idx} out of bounds ({} entries)",
                    arr.len()
                )));
            }
            if last {
                arr[idx] = parse_scalar(raw);
                return Ok(());
            }
            cursor = &mut arr[idx];
        } else {
            let table = cursor
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("override {key}: {seg} is not a table key")))?;
            if last {
                table.insert(seg.to_string(), parse_scalar(raw));
                return Ok(());
            }
            cursor = table
                .get_mut(*seg)
                .ok_or_else(|| Error::Config(format!("override {key}: unknown key {seg}")))?;
        }
    }
    Ok(())
}

impl ConfigFile {
    /// Construct and validate the model objects.
    pub fn build(&self) -> Result<LoadedConfig> {
        let law = PressureLaw::new(self.pressure.p0, self.pressure.gamma)?;

        let arcs: Vec<Arc> = self
            .arcs
            .iter()
            .map(|a| Arc {
                id: a.id.clone(),
                tail: a.tail.clone(),
                head: a.head.clone(),
                length: a.length,
                cells: a.cells,
            })
            .collect();
        let nodes: Vec<Node> = self
            .nodes
            .iter()
            .map(|n| Node {
                id: n.id.clone(),
                kind: match n.kind {
                    NodeKindSection::Outer => NodeKind::Outer,
                    NodeKindSection::Junction => NodeKind::Junction,
                },
                kappa: n.kappa.clone(),
            })
            .collect();
        let network = Network::new(arcs, nodes)?;

        let mut ics: Vec<Option<InitialCondition>> = vec![None; network.arcs().len()];
        for init in &self.initials {
            let ai = network.arc_index(&init.arc).ok_or_else(|| {
                Error::Config(format!("initial condition references unknown arc {}", init.arc))
            })?;
            if ics[ai].is_some() {
                return Err(Error::Config(format!(
                    "arc {} has more than one initial condition",
                    init.arc
                )));
            }
            ics[ai] = Some(init.to_initial_condition()?);
        }
        let ics: Vec<InitialCondition> = ics
            .into_iter()
            .enumerate()
            .map(|(i, ic)| {
                ic.ok_or_else(|| {
                    Error::Config(format!(
                        "arc {} has no initial condition",
                        self.arcs[i].id
                    ))
                })
            })
            .collect::<Result<_>>()?;

        let sim = SimSpec {
            cfl: self.sim.cfl,
            t_end: self.sim.t_end,
            output_every: self.sim.output_every,
            junction_solver: match self.sim.junction_solver {
                SolverSection::Relaxation => JunctionSolverKind::Relaxation,
                SolverSection::Riemann => JunctionSolverKind::Riemann,
            },
            safety_factor: self.sim.safety_factor,
            snapshot_dir: self.sim.snapshot_dir.clone(),
        };
        sim.validate()?;
        if sim.junction_solver == JunctionSolverKind::Riemann {
            for ni in network.junction_nodes() {
                let inc = network.incident(ni);
                let io = inc.len() == 2 && inc[0].1 != inc[1].1;
                if !io {
                    return Err(Error::Config(format!(
                        "junction_solver = \"riemann\" needs two-arc junctions with one \
                         incoming and one outgoing arc; node {} is not one",
                        network.nodes()[ni].id
                    )));
                }
            }
        }

        let mut study = StudyParams::default();
        if let Some(s) = &self.study {
            if let Some(levels) = &s.dx_levels {
                if levels.is_empty() || levels.iter().any(|d| !(*d > 0.0)) {
                    return Err(Error::Config("study.dx_levels must be positive".into()));
                }
                study.dx_levels = levels.clone();
            }
            if let Some(r) = s.reference_dx {
                if !(r > 0.0) {
                    return Err(Error::Config("study.reference_dx must be positive".into()));
                }
                study.reference_dx = Some(r);
            }
            if let Some(t) = s.fit_t_min {
                if !(t >= 0.0) {
                    return Err(Error::Config("study.fit_t_min must be nonnegative".into()));
                }
                study.fit_t_min = t;
            }
        }

        Ok(LoadedConfig { law, network, ics, sim, study })
    }
}

impl InitialSection {
    fn require(&self, name: &str, v: Option<f64>) -> Result<f64> {
        v.ok_or_else(|| {
            Error::Config(format!(
                "initial condition for arc {}: kind {:?} needs key {name}",
                self.arc, self.kind
            ))
        })
    }

    fn forbid(&self, names: &[(&str, bool)]) -> Result<()> {
        for (name, present) in names {
            if *present {
                return Err(Error::Config(format!(
                    "initial condition for arc {}: key {name} does not apply to kind {:?}",
                    self.arc, self.kind
                )));
            }
        }
        Ok(())
    }

    fn to_initial_condition(&self) -> Result<InitialCondition> {
        match self.kind.as_str() {
            "constant" => {
                self.forbid(&[
                    ("base", self.base.is_some()),
                    ("amplitude", self.amplitude.is_some()),
                    ("sigma", self.sigma.is_some()),
                    ("center", self.center.is_some()),
                    ("seed", self.seed.is_some()),
                ])?;
                Ok(InitialCondition::Constant {
                    rho0: self.require("rho", self.rho)?,
                    q0: self.require("q", self.q)?,
                })
            }
            "gaussian" => {
                self.forbid(&[("rho", self.rho.is_some()), ("seed", self.seed.is_some())])?;
                Ok(InitialCondition::GaussianBump {
                    base: self.require("base", self.base)?,
                    amplitude: self.require("amplitude", self.amplitude)?,
                    sigma: self.require("sigma", self.sigma)?,
                    center: self.require("center", self.center)?,
                    q0: self.require("q", self.q)?,
                })
            }
            "perturbed" => {
                self.forbid(&[
                    ("base", self.base.is_some()),
                    ("sigma", self.sigma.is_some()),
                    ("center", self.center.is_some()),
                ])?;
                Ok(InitialCondition::PerturbedConstant {
                    rho0: self.require("rho", self.rho)?,
                    q0: self.require("q", self.q)?,
                    amplitude: self.amplitude.unwrap_or(0.01),
                    seed: self.seed.ok_or_else(|| {
                        Error::Config(format!(
                            "initial condition for arc {}: kind \"perturbed\" needs key seed",
                            self.arc
                        ))
                    })?,
                })
            }
            other => Err(Error::Config(format!(
                "initial condition for arc {}: unknown kind {other:?}",
                self.arc
            ))),
        }
    }
}
