//! Graph data model for networks of arcs, structural validation, and
//! initial-condition sampling.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Diagnostic, Error, Result};
use crate::model::State;

/// Directed-for-bookkeeping arc from `tail` (x = 0) to `head` (x = length).
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub length: f64,
    pub cells: usize,
}

impl Arc {
    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Outer,
    Junction,
}

/// Node of the network. Junction nodes carry a symmetric permeability matrix
/// indexed by their incident arcs in arc-declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    pub kappa: Option<Vec<Vec<f64>>>,
}

/// How an arc touches a node: incoming arcs have their head (x = L) there,
/// outgoing arcs their tail (x = 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Incoming,
    Outgoing,
}

/// Validated network with derived incidence tables.
#[derive(Debug, Clone)]
pub struct Network {
    arcs: Vec<Arc>,
    nodes: Vec<Node>,
    /// Per node: incident arcs in arc-declaration order.
    incidence: Vec<Vec<(usize, Orientation)>>,
}

impl Network {
    /// Build a network, rejecting any structural violation.
    pub fn new(arcs: Vec<Arc>, nodes: Vec<Node>) -> Result<Self> {
        let diags = validate(&arcs, &nodes);
        if !diags.is_empty() {
            return Err(Error::Validation(diags));
        }
        let incidence = incidence_table(&arcs, &nodes);
        Ok(Self { arcs, nodes, incidence })
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn incident(&self, node: usize) -> &[(usize, Orientation)] {
        &self.incidence[node]
    }

    pub fn arc_index(&self, id: &str) -> Option<usize> {
        self.arcs.iter().position(|a| a.id == id)
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn total_length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).sum()
    }

    /// Junction node indices in declaration order.
    pub fn junction_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == NodeKind::Junction)
            .map(|(i, _)| i)
    }
}

fn incidence_table(arcs: &[Arc], nodes: &[Node]) -> Vec<Vec<(usize, Orientation)>> {
    let mut table = vec![Vec::new(); nodes.len()];
    for (ai, arc) in arcs.iter().enumerate() {
        if let Some(ni) = nodes.iter().position(|n| n.id == arc.tail) {
            table[ni].push((ai, Orientation::Outgoing));
        }
        if let Some(ni) = nodes.iter().position(|n| n.id == arc.head) {
            table[ni].push((ai, Orientation::Incoming));
        }
    }
    table
}

/// Structural validation. Returns one diagnostic per violated invariant;
/// an empty list means the model is well formed.
pub fn validate(arcs: &[Arc], nodes: &[Node]) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let diag = |context: &str, message: String| Diagnostic {
        context: context.to_string(),
        message,
    };

    if arcs.is_empty() {
        diags.push(diag("network", "no arcs declared".into()));
    }
    for (i, a) in arcs.iter().enumerate() {
        if arcs[..i].iter().any(|b| b.id == a.id) {
            diags.push(diag(&format!("arc {}", a.id), "duplicate arc id".into()));
        }
        if !(a.length > 0.0) || !a.length.is_finite() {
            diags.push(diag(
                &format!("arc {}", a.id),
                format!("length must be positive, got {}", a.length),
            ));
        }
        if a.cells < 2 {
            diags.push(diag(
                &format!("arc {}", a.id),
                format!("needs at least 2 cells, got {}", a.cells),
            ));
        }
        if a.tail == a.head {
            diags.push(diag(
                &format!("arc {}", a.id),
                "tail and head must be distinct nodes".into(),
            ));
        }
        for (end, name) in [(&a.tail, "tail"), (&a.head, "head")] {
            if !nodes.iter().any(|n| n.id == **end) {
                diags.push(diag(
                    &format!("arc {}", a.id),
                    format!("{name} references unknown node {end}"),
                ));
            }
        }
    }

    let incidence = incidence_table(arcs, nodes);
    for (ni, n) in nodes.iter().enumerate() {
        if nodes[..ni].iter().any(|m| m.id == n.id) {
            diags.push(diag(&format!("node {}", n.id), "duplicate node id".into()));
        }
        let degree = incidence[ni].len();
        match n.kind {
            NodeKind::Outer => {
                if degree != 1 {
                    diags.push(diag(
                        &format!("node {}", n.id),
                        format!("outer node must have exactly one incident arc, has {degree}"),
                    ));
                }
                if n.kappa.is_some() {
                    diags.push(diag(
                        &format!("node {}", n.id),
                        "outer node must not carry a kappa matrix".into(),
                    ));
                }
            }
            NodeKind::Junction => {
                if degree == 0 {
                    diags.push(diag(
                        &format!("node {}", n.id),
                        "junction node has no incident arcs".into(),
                    ));
                }
                match &n.kappa {
                    None => diags.push(diag(
                        &format!("node {}", n.id),
                        "junction node requires a kappa matrix".into(),
                    )),
                    Some(k) => {
                        let square = k.len() == degree && k.iter().all(|row| row.len() == degree);
                        if !square {
                            diags.push(diag(
                                &format!("node {}", n.id),
                                format!(
                                    "kappa must be a {degree}x{degree} matrix over the incident arcs"
                                ),
                            ));
                        } else {
                            for i in 0..degree {
                                if k[i][i] != 0.0 {
                                    diags.push(diag(
                                        &format!("node {}", n.id),
                                        format!("kappa diagonal entry [{i}][{i}] must be zero"),
                                    ));
                                }
                                for j in 0..degree {
                                    if k[i][j] < 0.0 || !k[i][j].is_finite() {
                                        diags.push(diag(
                                            &format!("node {}", n.id),
                                            format!(
                                                "kappa[{i}][{j}] must be nonnegative, got {}",
                                                k[i][j]
                                            ),
                                        ));
                                    }
                                    if j > i && k[i][j] != k[j][i] {
                                        diags.push(diag(
                                            &format!("node {}", n.id),
                                            format!(
                                                "kappa must be symmetric: [{i}][{j}] = {} but [{j}][{i}] = {}",
                                                k[i][j], k[j][i]
                                            ),
                                        ));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Connectivity over the undirected arc graph.
    if !arcs.is_empty() && !nodes.is_empty() && diags.is_empty() {
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(ni) = stack.pop() {
            for &(ai, _) in &incidence[ni] {
                for end in [&arcs[ai].tail, &arcs[ai].head] {
                    let other = nodes.iter().position(|n| n.id == *end).unwrap();
                    if !seen[other] {
                        seen[other] = true;
                        stack.push(other);
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            diags.push(Diagnostic {
                context: "network".into(),
                message: "graph is not connected".into(),
            });
        }
    }

    diags
}

/// Per-arc initial profile. Cell values are midpoint evaluations.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Constant {
        rho0: f64,
        q0: f64,
    },
    /// `rho(x) = base + amplitude * exp(-(x-center)^2 / (2 sigma^2))`, constant q.
    GaussianBump {
        base: f64,
        amplitude: f64,
        sigma: f64,
        center: f64,
        q0: f64,
    },
    /// `rho = rho0 * (1 + amplitude * xi)` with `xi ~ U[-1, 1]` per cell from a
    /// seeded generator; constant q.
    PerturbedConstant {
        rho0: f64,
        q0: f64,
        amplitude: f64,
        seed: u64,
    },
}

/// Midpoint-sample an initial profile onto an arc's cells.
///
/// Densities must come out nonnegative, and exactly-zero density is admitted
/// only together with zero momentum (needed for the gas-into-empty-network
/// experiments).
pub fn sample_initial(arc: &Arc, ic: &InitialCondition) -> Result<Vec<State>> {
    let dx = arc.dx();
    let j = arc.cells;
    let states = match ic {
        InitialCondition::Constant { rho0, q0 } => {
            vec![State::new(*rho0, *q0); j]
        }
        InitialCondition::GaussianBump { base, amplitude, sigma, center, q0 } => {
            if *sigma <= 0.0 {
                return Err(Error::domain("gaussian sigma must be positive", *sigma));
            }
            (0..j)
                .map(|i| {
                    let x = (i as f64 + 0.5) * dx;
                    let g = (-(x - center) * (x - center) / (2.0 * sigma * sigma)).exp();
                    State::new(base + amplitude * g, *q0)
                })
                .collect()
        }
        InitialCondition::PerturbedConstant { rho0, q0, amplitude, seed } => {
            if !(*amplitude >= 0.0 && *amplitude < 1.0) {
                return Err(Error::domain(
                    "perturbation amplitude must lie in [0, 1)",
                    *amplitude,
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..j)
                .map(|_| {
                    let xi: f64 = rng.gen_range(-1.0..=1.0);
                    State::new(rho0 * (1.0 + amplitude * xi), *q0)
                })
                .collect()
        }
    };
    for (i, u) in states.iter().enumerate() {
        if u.rho < 0.0 || !u.rho.is_finite() {
            return Err(Error::NegativeDensity {
                arc: arc.id.clone(),
                cell: i + 1,
                rho: u.rho,
            });
        }
        if u.rho == 0.0 && u.q != 0.0 {
            return Err(Error::VacuumMomentum { q: u.q });
        }
    }
    Ok(states)
}
