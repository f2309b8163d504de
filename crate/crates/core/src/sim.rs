//! Time-loop orchestration across the network: per-step junction coupling,
//! conservative arc updates, and the mass/entropy/trace monitors.

use crate::error::{Error, Result};
use crate::grid::{arc_speed, cfl_dt, conservative_update, outer_ghost, ArcGrid};
use crate::junction_relax::{solve_node, two_arc_jtc, IncidentArc};
use crate::junction_riemann::{riemann_junction_solve, Applicability, TwoArcSolution};
use crate::model::{entropy, entropy_flux, PressureLaw, State};
use crate::network::{sample_initial, InitialCondition, Network, NodeKind, Orientation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JunctionSolverKind {
    Relaxation,
    Riemann,
}

/// Run parameters.
#[derive(Debug, Clone)]
pub struct SimSpec {
    pub cfl: f64,
    pub t_end: f64,
    /// Snapshot cadence; `None` keeps only the initial and final snapshots.
    pub output_every: Option<f64>,
    pub junction_solver: JunctionSolverKind,
    pub safety_factor: f64,
    pub snapshot_dir: Option<String>,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            cfl: 0.9,
            t_end: 1.0,
            output_every: None,
            junction_solver: JunctionSolverKind::Relaxation,
            safety_factor: 1.0,
            snapshot_dir: None,
        }
    }
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::domain("cfl must lie in (0, 1]", self.cfl));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::domain("t_end must be nonnegative", self.t_end));
        }
        if let Some(d) = self.output_every {
            if !(d > 0.0) {
                return Err(Error::domain("output_every must be positive", d));
            }
        }
        if !(self.safety_factor >= 1.0) {
            return Err(Error::domain("safety_factor must be >= 1", self.safety_factor));
        }
        Ok(())
    }
}

/// All arc grids of the network at one instant.
#[derive(Debug, Clone)]
pub struct NetworkState {
    pub time: f64,
    pub grids: Vec<ArcGrid>,
}

/// Junction unknowns of one node for one step, per incident arc in incidence
/// order.
#[derive(Debug, Clone)]
pub struct NodeTrace {
    pub node: usize,
    pub rho_star: Vec<f64>,
    pub q_star: Vec<f64>,
}

/// Per-arc distances to the asymptotic constant state:
/// `[L1(rho - rho_bar), Linf(rho - rho_bar), L1(q), Linf(q)]`.
pub type AsymptoteNorms = [f64; 4];

#[derive(Debug, Clone)]
pub struct MonitorRecord {
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub entropy: f64,
    /// Running entropy bound `S^0 - sum_k dt_k * dG*_k`.
    pub entropy_bound: f64,
    /// Entropy-flux jump at the starred states, per junction node (only
    /// defined for two-arc junctions).
    pub delta_g: Vec<Option<f64>>,
    pub traces: Vec<NodeTrace>,
    pub asymptote: Vec<AsymptoteNorms>,
}

#[derive(Debug, Clone)]
pub struct MonitorSeries {
    pub records: Vec<MonitorRecord>,
    /// Asymptotic density: total mass / total length at t = 0.
    pub rho_asymptotic: f64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub states: Vec<Vec<State>>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: NetworkState,
    pub monitors: MonitorSeries,
    pub snapshots: Vec<Snapshot>,
}

/// Sample the initial conditions (one per arc, aligned with the arc list).
pub fn initial_state(network: &Network, ics: &[InitialCondition]) -> Result<NetworkState> {
    if ics.len() != network.arcs().len() {
        return Err(Error::Usage(format!(
            "need exactly one initial condition per arc ({} arcs, {} conditions)",
            network.arcs().len(),
            ics.len()
        )));
    }
    let mut grids = Vec::with_capacity(ics.len());
    for (i, (arc, ic)) in network.arcs().iter().zip(ics).enumerate() {
        let states = sample_initial(arc, ic)?;
        grids.push(ArcGrid::new(i, arc.dx(), states));
    }
    Ok(NetworkState { time: 0.0, grids })
}

/// Total discrete mass `sum_arcs dx_i sum_j rho_j`.
pub fn total_mass(network: &Network, state: &NetworkState) -> f64 {
    network
        .arcs()
        .iter()
        .zip(&state.grids)
        .map(|(arc, g)| arc.dx() * g.states.iter().map(|u| u.rho).sum::<f64>())
        .sum()
}

/// Total discrete entropy `sum_arcs dx_i sum_j eta(U_j)`.
pub fn total_entropy(law: &PressureLaw, network: &Network, state: &NetworkState) -> Result<f64> {
    let mut s = 0.0;
    for (arc, g) in network.arcs().iter().zip(&state.grids) {
        let mut acc = 0.0;
        for u in &g.states {
            acc += entropy(law, *u)?;
        }
        s += arc.dx() * acc;
    }
    Ok(s)
}

/// Entropy-flux jump across a two-arc junction evaluated from the densities
/// and the transmission condition `q = kappa (rho_l - rho_r)`:
///
/// `dG = -kappa^3 (rho_l - rho_r)^4 (rho_l + rho_r) / (2 rho_l^2 rho_r^2)
///       + p0 gamma/(gamma-1) kappa (rho_l - rho_r) (rho_l^(g-1) - rho_r^(g-1))`
pub fn junction_delta_g(law: &PressureLaw, kappa: f64, rho_l: f64, rho_r: f64) -> Result<f64> {
    if rho_l <= 0.0 || rho_r <= 0.0 {
        return Err(Error::domain(
            "entropy-flux jump requires positive densities",
            rho_l.min(rho_r),
        ));
    }
    if kappa < 0.0 {
        return Err(Error::domain("kappa must be nonnegative", kappa));
    }
    let d = rho_l - rho_r;
    let g = law.gamma();
    let cubic = -0.5 * kappa.powi(3) * d.powi(4) * (rho_l + rho_r) / (rho_l * rho_l * rho_r * rho_r);
    let pow = |r: f64| if g == 2.0 { r } else { r.powf(g - 1.0) };
    Ok(cubic + law.p0() * g / (g - 1.0) * kappa * d * (pow(rho_l) - pow(rho_r)))
}

/// Discrete entropy bound `B^n = S^0 - sum_{k<=n} dt_k dG*_k` (left-endpoint
/// rule), including the `B^0 = S^0` entry.
pub fn entropy_bound_series(s0: f64, steps: &[(f64, f64)]) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    let mut b = s0;
    out.push(b);
    for &(dt, dg) in steps {
        b -= dt * dg;
        out.push(b);
    }
    out
}

/// Everything one global step produces besides the updated state.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub dt: f64,
    pub traces: Vec<NodeTrace>,
    pub delta_g: Vec<Option<f64>>,
    /// For each junction that is a plain in/out two-arc node: the inputs the
    /// solver saw (kappa, incoming adjacent, outgoing adjacent).
    pub two_arc_inputs: Vec<(usize, f64, State, State)>,
}

fn arc_lambdas(law: &PressureLaw, state: &NetworkState, safety: f64) -> Result<Vec<f64>> {
    let mut lambdas = Vec::with_capacity(state.grids.len());
    for g in &state.grids {
        lambdas.push(arc_speed(law, g, safety)?);
    }
    // a fully vacuous arc has no intrinsic speed; it still needs a positive
    // one for the junction system and the inflow fluxes, so borrow the
    // network-wide maximum
    let max = lambdas.iter().cloned().fold(0.0f64, f64::max);
    if max == 0.0 {
        return Err(Error::Numerical(
            "network carries no gas anywhere; no wave speed available".into(),
        ));
    }
    for l in &mut lambdas {
        if *l == 0.0 {
            *l = max;
        }
    }
    Ok(lambdas)
}

fn sanitize_ghost(rho: f64, q: f64, scale: f64) -> Result<State> {
    if rho > 0.0 {
        return Ok(State::new(rho, q));
    }
    if rho < -1e-9 * scale.max(1.0) {
        return Err(Error::Numerical(format!(
            "junction solve produced negative density {rho}"
        )));
    }
    if q.abs() <= 1e-10 * scale.max(1.0) {
        return Ok(State::new(0.0, 0.0));
    }
    Err(Error::Numerical(format!(
        "junction solve produced a vacuum ghost with momentum {q}"
    )))
}

struct GhostSet {
    /// Per arc: (left ghost, right ghost).
    ghosts: Vec<(State, State)>,
    traces: Vec<NodeTrace>,
    delta_g: Vec<Option<f64>>,
    two_arc_inputs: Vec<(usize, f64, State, State)>,
}

/// Solve all outer boundaries and junctions for one step, producing every
/// arc's two ghost states. Reads a frozen snapshot of the interior cells.
fn solve_ghosts(
    law: &PressureLaw,
    network: &Network,
    state: &NetworkState,
    lambdas: &[f64],
    solver: JunctionSolverKind,
) -> Result<GhostSet> {
    let placeholder = State::new(f64::NAN, f64::NAN);
    let mut ghosts = vec![(placeholder, placeholder); state.grids.len()];
    let mut traces = Vec::new();
    let mut delta_g = Vec::new();
    let mut two_arc_inputs = Vec::new();

    let adjacent = |ai: usize, orientation: Orientation| -> State {
        let cells = &state.grids[ai].states;
        match orientation {
            Orientation::Incoming => *cells.last().unwrap(),
            Orientation::Outgoing => cells[0],
        }
    };
    let place = |ghosts: &mut Vec<(State, State)>, ai: usize, o: Orientation, g: State| {
        match o {
            Orientation::Incoming => ghosts[ai].1 = g,
            Orientation::Outgoing => ghosts[ai].0 = g,
        }
    };

    for (ni, node) in network.nodes().iter().enumerate() {
        let incident = network.incident(ni);
        match node.kind {
            NodeKind::Outer => {
                let (ai, o) = incident[0];
                place(&mut ghosts, ai, o, outer_ghost(adjacent(ai, o)));
            }
            NodeKind::Junction => {
                let kappa = node.kappa.as_ref().expect("validated junction");
                let arcs: Vec<IncidentArc> = incident
                    .iter()
                    .map(|&(ai, o)| IncidentArc {
                        orientation: o,
                        adjacent: adjacent(ai, o),
                        lambda: lambdas[ai],
                    })
                    .collect();
                let scale = arcs.iter().map(|a| a.adjacent.rho.abs()).fold(1.0f64, f64::max);

                // plain in/out two-arc junctions use the closed form (and the
                // Riemann solver when selected); everything else the system
                let io_pair = if incident.len() == 2 {
                    match (arcs[0].orientation, arcs[1].orientation) {
                        (Orientation::Incoming, Orientation::Outgoing) => Some((0usize, 1usize)),
                        (Orientation::Outgoing, Orientation::Incoming) => Some((1usize, 0usize)),
                        _ => None,
                    }
                } else {
                    None
                };

                let (rho_star, q_star) = match (solver, io_pair) {
                    (JunctionSolverKind::Relaxation, Some((iin, iout))) => {
                        let k = kappa[0][1];
                        let (q, rl, rr) = two_arc_jtc(
                            k,
                            arcs[iin].lambda,
                            arcs[iout].lambda,
                            arcs[iin].adjacent,
                            arcs[iout].adjacent,
                        )?;
                        two_arc_inputs.push((ni, k, arcs[iin].adjacent, arcs[iout].adjacent));
                        let mut rho = vec![0.0; 2];
                        let mut qs = vec![0.0; 2];
                        rho[iin] = rl;
                        rho[iout] = rr;
                        qs[iin] = q;
                        qs[iout] = q;
                        (rho, qs)
                    }
                    (JunctionSolverKind::Relaxation, None) => {
                        let sol = solve_node(kappa, &arcs)?;
                        (sol.rho_star, sol.q_star)
                    }
                    (JunctionSolverKind::Riemann, Some((iin, iout))) => {
                        let k = kappa[0][1];
                        let res = riemann_junction_solve(
                            law,
                            k,
                            arcs[iin].adjacent,
                            arcs[iout].adjacent,
                        );
                        let sol = match res.applicability {
                            Applicability::Unsupported(reason) => {
                                return Err(Error::Unsupported(format!(
                                    "node {} at t = {}: {reason}",
                                    node.id, state.time
                                )));
                            }
                            _ => res.solution.expect("supported outcome has a solution"),
                        };
                        two_arc_inputs.push((ni, k, arcs[iin].adjacent, arcs[iout].adjacent));
                        let mut rho = vec![0.0; 2];
                        let mut qs = vec![0.0; 2];
                        rho[iin] = sol.rho_star_l;
                        rho[iout] = sol.rho_star_r;
                        qs[iin] = sol.q_star;
                        qs[iout] = sol.q_star;
                        (rho, qs)
                    }
                    (JunctionSolverKind::Riemann, None) => {
                        return Err(Error::Usage(format!(
                            "the Riemann junction solver only handles two-arc junctions \
                             with one incoming and one outgoing arc; node {} is not one",
                            node.id
                        )));
                    }
                };

                let mut rho_clean = Vec::with_capacity(arcs.len());
                let mut q_clean = Vec::with_capacity(arcs.len());
                for (&r, &q) in rho_star.iter().zip(&q_star) {
                    let g = sanitize_ghost(r, q, scale)?;
                    rho_clean.push(g.rho);
                    q_clean.push(g.q);
                }
                for (slot, &(ai, o)) in incident.iter().enumerate() {
                    place(&mut ghosts, ai, o, State::new(rho_clean[slot], q_clean[slot]));
                }

                // entropy-flux jump across plain two-arc junctions
                let dg = match io_pair {
                    Some((iin, iout))
                        if rho_clean[iin] > 0.0 && rho_clean[iout] > 0.0 =>
                    {
                        let g_l =
                            entropy_flux(law, State::new(rho_clean[iin], q_clean[iin]))?;
                        let g_r =
                            entropy_flux(law, State::new(rho_clean[iout], q_clean[iout]))?;
                        Some(g_l - g_r)
                    }
                    _ => None,
                };
                delta_g.push(dg);
                traces.push(NodeTrace { node: ni, rho_star: rho_clean, q_star: q_clean });
            }
        }
    }
    Ok(GhostSet { ghosts, traces, delta_g, two_arc_inputs })
}

/// One global step: per-arc speeds, global CFL time step (optionally capped),
/// junction and boundary ghosts, conservative update of every arc.
pub fn step(
    law: &PressureLaw,
    network: &Network,
    state: &mut NetworkState,
    spec: &SimSpec,
    dt_cap: Option<f64>,
) -> Result<StepOutcome> {
    let lambdas = arc_lambdas(law, state, spec.safety_factor)?;
    let dx_min = state.grids.iter().map(|g| g.dx).fold(f64::MAX, f64::min);
    let lambda_max = lambdas.iter().cloned().fold(0.0f64, f64::max);
    let mut dt = cfl_dt(dx_min, lambda_max, spec.cfl)?;
    if let Some(cap) = dt_cap {
        if cap <= 0.0 {
            return Err(Error::Numerical(format!("nonpositive time-step cap {cap}")));
        }
        dt = dt.min(cap);
    }

    let ghost_set = solve_ghosts(law, network, state, &lambdas, spec.junction_solver)?;

    for (i, g) in state.grids.iter_mut().enumerate() {
        g.lambda = lambdas[i];
    }
    let mut new_states = Vec::with_capacity(state.grids.len());
    for (i, g) in state.grids.iter().enumerate() {
        let (lg, rg) = ghost_set.ghosts[i];
        new_states.push(conservative_update(law, g, lg, rg, dt)?);
    }
    for (i, states) in new_states.into_iter().enumerate() {
        for (j, u) in states.iter().enumerate() {
            if !u.rho.is_finite() || !u.q.is_finite() {
                return Err(Error::Numerical(format!(
                    "non-finite state on arc {}, cell {}",
                    network.arcs()[i].id,
                    j + 1
                )));
            }
            if u.rho < 0.0 {
                return Err(Error::NegativeDensity {
                    arc: network.arcs()[i].id.clone(),
                    cell: j + 1,
                    rho: u.rho,
                });
            }
        }
        state.grids[i].states = states;
    }
    state.time += dt;

    Ok(StepOutcome {
        dt,
        traces: ghost_set.traces,
        delta_g: ghost_set.delta_g,
        two_arc_inputs: ghost_set.two_arc_inputs,
    })
}

fn asymptote_norms(network: &Network, state: &NetworkState, rho_bar: f64) -> Vec<AsymptoteNorms> {
    network
        .arcs()
        .iter()
        .zip(&state.grids)
        .map(|(arc, g)| {
            let dx = arc.dx();
            let mut l1_rho = 0.0;
            let mut linf_rho = 0.0f64;
            let mut l1_q = 0.0;
            let mut linf_q = 0.0f64;
            for u in &g.states {
                let dr = (u.rho - rho_bar).abs();
                l1_rho += dr;
                linf_rho = linf_rho.max(dr);
                l1_q += u.q.abs();
                linf_q = linf_q.max(u.q.abs());
            }
            [dx * l1_rho, linf_rho, dx * l1_q, linf_q]
        })
        .collect()
}

fn monitor_record(
    law: &PressureLaw,
    network: &Network,
    state: &NetworkState,
    dt: f64,
    bound: f64,
    traces: Vec<NodeTrace>,
    delta_g: Vec<Option<f64>>,
    rho_bar: f64,
) -> Result<MonitorRecord> {
    Ok(MonitorRecord {
        t: state.time,
        dt,
        mass: total_mass(network, state),
        entropy: total_entropy(law, network, state)?,
        entropy_bound: bound,
        delta_g,
        traces,
        asymptote: asymptote_norms(network, state, rho_bar),
    })
}

/// Run to `t_end`, landing exactly on every snapshot time and on `t_end`
/// via clipped steps.
pub fn run(
    law: &PressureLaw,
    network: &Network,
    ics: &[InitialCondition],
    spec: &SimSpec,
) -> Result<RunResult> {
    spec.validate()?;
    let mut state = initial_state(network, ics)?;
    let rho_bar = total_mass(network, &state) / network.total_length();
    let t_eps = 1e-12 * spec.t_end.max(1.0);

    // initial monitor row: junction unknowns solved on the initial data
    let lambdas0 = arc_lambdas(law, &state, spec.safety_factor)?;
    let ghost0 = solve_ghosts(law, network, &state, &lambdas0, spec.junction_solver)?;
    let s0 = total_entropy(law, network, &state)?;
    let mut records = vec![monitor_record(
        law, network, &state, 0.0, s0, ghost0.traces, ghost0.delta_g, rho_bar,
    )?];
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        states: state.grids.iter().map(|g| g.states.clone()).collect(),
    }];

    let mut bound = s0;
    let mut next_snap = 1u64;
    while state.time < spec.t_end - t_eps {
        let mut t_next = spec.t_end;
        if let Some(d) = spec.output_every {
            let cand = next_snap as f64 * d;
            if cand < t_next {
                t_next = cand;
            }
        }
        let cap = t_next - state.time;
        if cap <= t_eps {
            // rounding placed us a hair before the event; land on it
            state.time = t_next;
        } else {
            let out = step(law, network, &mut state, spec, Some(cap))?;
            let dg_total: f64 = out.delta_g.iter().flatten().sum();
            bound -= out.dt * dg_total;
            records.push(monitor_record(
                law, network, &state, out.dt, bound, out.traces, out.delta_g, rho_bar,
            )?);
        }
        if let Some(d) = spec.output_every {
            let cand = next_snap as f64 * d;
            if state.time >= cand - t_eps {
                snapshots.push(Snapshot {
                    t: state.time,
                    states: state.grids.iter().map(|g| g.states.clone()).collect(),
                });
                next_snap += 1;
            }
        }
    }
    let needs_final = snapshots
        .last()
        .map(|s| (s.t - state.time).abs() > t_eps)
        .unwrap_or(true);
    if needs_final {
        snapshots.push(Snapshot {
            t: state.time,
            states: state.grids.iter().map(|g| g.states.clone()).collect(),
        });
    }

    Ok(RunResult {
        final_state: state,
        monitors: MonitorSeries { records, rho_asymptotic: rho_bar },
        snapshots,
    })
}

/// One row of a junction-solver comparison: both solvers evaluated on the
/// same adjacent states (those of the relaxation trajectory).
#[derive(Debug, Clone)]
pub struct CompareRow {
    /// Time at which the junction inputs were taken.
    pub t: f64,
    /// Relaxation solution `(rho*_l, rho*_r, q*)`.
    pub relax: (f64, f64, f64),
    /// Riemann solution, if the case is supported.
    pub riemann: Option<(f64, f64, f64)>,
    pub applicability: Applicability,
    /// Max componentwise difference between the two solutions.
    pub discrepancy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CompareResult {
    pub rows: Vec<CompareRow>,
    pub max_discrepancy: Option<f64>,
    pub unsupported_rows: usize,
}

/// Evolve with the relaxation scheme and evaluate both junction solvers on
/// identical inputs each step. Requires a single plain two-arc junction.
pub fn run_compare(
    law: &PressureLaw,
    network: &Network,
    ics: &[InitialCondition],
    spec: &SimSpec,
) -> Result<(RunResult, CompareResult)> {
    let junctions: Vec<usize> = network.junction_nodes().collect();
    if junctions.len() != 1 || network.incident(junctions[0]).len() != 2 {
        return Err(Error::Usage(
            "junction-solver comparison needs a network with exactly one two-arc junction".into(),
        ));
    }
    let mut relax_spec = spec.clone();
    relax_spec.junction_solver = JunctionSolverKind::Relaxation;

    let result = run(law, network, ics, &relax_spec)?;
    let mut rows = Vec::new();
    let mut max_disc: Option<f64> = None;
    let mut unsupported = 0usize;

    // Replay the run step by step so the Riemann solver sees exactly the
    // inputs the relaxation solver saw.
    let mut state = initial_state(network, ics)?;
    let t_eps = 1e-12 * spec.t_end.max(1.0);
    loop {
        let lambdas = arc_lambdas(law, &state, spec.safety_factor)?;
        let ghost_set =
            solve_ghosts(law, network, &state, &lambdas, JunctionSolverKind::Relaxation)?;
        let (ni, kappa, u_in, u_out) = ghost_set.two_arc_inputs[0];
        let incident = network.incident(ni);
        let iin = incident.iter().position(|&(_, o)| o == Orientation::Incoming).unwrap();
        let iout = incident.iter().position(|&(_, o)| o == Orientation::Outgoing).unwrap();
        let trace = &ghost_set.traces[0];
        let relax = (trace.rho_star[iin], trace.rho_star[iout], trace.q_star[iin]);

        let res = riemann_junction_solve(law, kappa, u_in, u_out);
        let (riemann, disc) = match res.solution {
            Some(TwoArcSolution { q_star, rho_star_l, rho_star_r }) => {
                let d = (rho_star_l - relax.0)
                    .abs()
                    .max((rho_star_r - relax.1).abs())
                    .max((q_star - relax.2).abs());
                max_disc = Some(max_disc.map_or(d, |m: f64| m.max(d)));
                (Some((rho_star_l, rho_star_r, q_star)), Some(d))
            }
            None => {
                unsupported += 1;
                (None, None)
            }
        };
        rows.push(CompareRow {
            t: state.time,
            relax,
            riemann,
            applicability: res.applicability,
            discrepancy: disc,
        });

        if state.time >= spec.t_end - t_eps {
            break;
        }
        let cap = spec.t_end - state.time;
        step(law, network, &mut state, &relax_spec, Some(cap))?;
    }

    Ok((result, CompareResult { rows, max_discrepancy: max_disc, unsupported_rows: unsupported }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Arc, Node, NodeKind};
    use approx::assert_relative_eq;

    fn law2() -> PressureLaw {
        PressureLaw::new(1.0, 2.0).unwrap()
    }

    fn two_arc_network(kappa: f64, cells: usize) -> Network {
        Network::new(
            vec![
                Arc { id: "l".into(), tail: "w".into(), head: "j".into(), length: 2.0, cells },
                Arc { id: "r".into(), tail: "j".into(), head: "e".into(), length: 2.0, cells },
            ],
            vec![
                Node { id: "w".into(), kind: NodeKind::Outer, kappa: None },
                Node {
                    id: "j".into(),
                    kind: NodeKind::Junction,
                    kappa: Some(vec![vec![0.0, kappa], vec![kappa, 0.0]]),
                },
                Node { id: "e".into(), kind: NodeKind::Outer, kappa: None },
            ],
        )
        .unwrap()
    }

    #[test]
    fn rest_network_is_stationary() {
        let law = law2();
        let net = two_arc_network(1.0, 10);
        let ics = vec![
            InitialCondition::Constant { rho0: 1.2, q0: 0.0 },
            InitialCondition::Constant { rho0: 1.2, q0: 0.0 },
        ];
        let mut state = initial_state(&net, &ics).unwrap();
        let spec = SimSpec::default();
        let out = step(&law, &net, &mut state, &spec, None).unwrap();
        for g in &state.grids {
            for u in &g.states {
                assert_relative_eq!(u.rho, 1.2, max_relative = 1e-14);
                assert!(u.q.abs() <= 1e-14);
            }
        }
        let trace = &out.traces[0];
        assert!(trace.q_star.iter().all(|q| q.abs() <= 1e-13));
    }

    #[test]
    fn first_step_of_jtc_fixed_point_keeps_junction_values() {
        // small-jump entropy test data: junction returns the fixed point
        let law = law2();
        let net = two_arc_network(1.0, 40);
        let ics = vec![
            InitialCondition::Constant { rho0: 1.5, q0: 0.5 },
            InitialCondition::Constant { rho0: 1.0, q0: 0.5 },
        ];
        let mut state = initial_state(&net, &ics).unwrap();
        let m0 = total_mass(&net, &state);
        assert_relative_eq!(m0, 5.0, max_relative = 1e-14);
        let spec = SimSpec::default();
        let out = step(&law, &net, &mut state, &spec, None).unwrap();
        let trace = &out.traces[0];
        assert_relative_eq!(trace.q_star[0], 0.5, max_relative = 1e-13);
        assert_relative_eq!(trace.rho_star[0], 1.5, max_relative = 1e-13);
        assert_relative_eq!(trace.rho_star[1], 1.0, max_relative = 1e-13);
        // mass conserved across the step
        let m1 = total_mass(&net, &state);
        assert!((m1 - m0).abs() <= 1e-12 * m0);
    }

    #[test]
    fn delta_g_values() {
        let law = law2();
        let dg = junction_delta_g(&law, 1.0, 1.5, 1.0).unwrap();
        assert_relative_eq!(dg, 0.4652777777777778, epsilon = 1e-12);
        let dg = junction_delta_g(&law, 1.0, 6.0, 1.0).unwrap();
        assert_relative_eq!(dg, 50.0 - 2187.5 / 36.0, epsilon = 1e-10);
        assert!(dg < 0.0);
        assert_eq!(junction_delta_g(&law, 1.0, 2.0, 2.0).unwrap(), 0.0);
        assert!(junction_delta_g(&law, 1.0, 0.0, 1.0).is_err());
        // matches the direct entropy-flux difference under the JTC
        let (rl, rr, k) = (1.7, 0.9, 1.3);
        let q = k * (rl - rr);
        let direct = entropy_flux(&law, State::new(rl, q)).unwrap()
            - entropy_flux(&law, State::new(rr, q)).unwrap();
        assert_relative_eq!(junction_delta_g(&law, k, rl, rr).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn entropy_bound_series_examples() {
        let b = entropy_bound_series(2.0, &[(0.1, 0.0), (0.1, 0.0)]);
        assert_eq!(b, vec![2.0, 2.0, 2.0]);
        let b = entropy_bound_series(1.0, &[(0.5, 1.0), (0.5, -2.0)]);
        assert_relative_eq!(b[1], 0.5);
        assert_relative_eq!(b[2], 1.5);
    }

    #[test]
    fn zero_t_end_returns_initial_state() {
        let law = law2();
        let net = two_arc_network(1.0, 8);
        let ics = vec![
            InitialCondition::Constant { rho0: 1.0, q0: 0.0 },
            InitialCondition::Constant { rho0: 1.0, q0: 0.0 },
        ];
        let spec = SimSpec { t_end: 0.0, ..SimSpec::default() };
        let result = run(&law, &net, &ics, &spec).unwrap();
        assert_eq!(result.snapshots.len(), 1);
        assert_eq!(result.monitors.records.len(), 1);
        assert_eq!(result.final_state.time, 0.0);
    }

    #[test]
    fn run_lands_snapshots_exactly() {
        let law = law2();
        let net = two_arc_network(1.0, 16);
        let ics = vec![
            InitialCondition::Constant { rho0: 1.5, q0: 0.5 },
            InitialCondition::Constant { rho0: 1.0, q0: 0.5 },
        ];
        let spec = SimSpec {
            t_end: 1.0,
            output_every: Some(0.25),
            ..SimSpec::default()
        };
        let result = run(&law, &net, &ics, &spec).unwrap();
        let times: Vec<f64> = result.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times.len(), 5);
        for (s, want) in times.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]) {
            assert!((s - want).abs() <= 1e-9, "snapshot at {s}, wanted {want}");
        }
        assert!((result.final_state.time - 1.0).abs() <= 1e-9);
        // mass monitor stays flat
        let m0 = result.monitors.records[0].mass;
        for r in &result.monitors.records {
            assert!((r.mass - m0).abs() <= 1e-10 * m0);
        }
    }

    #[test]
    fn compare_agrees_on_quiet_fixed_point() {
        let law = law2();
        let net = two_arc_network(1.0, 40);
        let ics = vec![
            InitialCondition::Constant { rho0: 4.5, q0: 0.5 },
            InitialCondition::Constant { rho0: 4.0, q0: 0.5 },
        ];
        let spec = SimSpec { t_end: 0.5, ..SimSpec::default() };
        let (_, cmp) = run_compare(&law, &net, &ics, &spec).unwrap();
        assert_eq!(cmp.unsupported_rows, 0);
        assert!(cmp.max_discrepancy.unwrap() <= 1e-6, "disc {:?}", cmp.max_discrepancy);
    }

    #[test]
    fn vacuum_arcs_get_a_borrowed_speed() {
        // gas in one arc, vacuum in the other; the junction must still pass mass
        let law = law2();
        let net = two_arc_network(0.5, 10);
        let ics = vec![
            InitialCondition::Constant { rho0: 2.0, q0: 0.0 },
            InitialCondition::Constant { rho0: 0.0, q0: 0.0 },
        ];
        let mut state = initial_state(&net, &ics).unwrap();
        let m0 = total_mass(&net, &state);
        let spec = SimSpec::default();
        for _ in 0..20 {
            step(&law, &net, &mut state, &spec, None).unwrap();
        }
        let m1 = total_mass(&net, &state);
        assert!((m1 - m0).abs() <= 1e-12 * m0);
        // mass has actually crossed into the vacuum arc
        let right_mass: f64 = state.grids[1].states.iter().map(|u| u.rho).sum();
        assert!(right_mass > 0.0);
        assert!(state.grids.iter().all(|g| g.states.iter().all(|u| u.rho >= 0.0)));
    }
}
