//! Study drivers: L1 errors against a fine reference, grid-convergence
//! tables, and asymptotic-decay fits.

use crate::config::LoadedConfig;
use crate::error::{Error, Result};
use crate::network::Network;
use crate::sim::{run, MonitorSeries, NetworkState, RunResult};

/// L1 errors of one arc, per field.
#[derive(Debug, Clone)]
pub struct ArcErrors {
    pub arc_id: String,
    pub rho: f64,
    pub q: f64,
}

/// `dx * sum_j |v_j - vref_j|` per field per arc, with the reference
/// restricted onto each coarse cell by exact averaging of its subcells.
pub fn l1_error(
    network: &Network,
    coarse: &NetworkState,
    reference: &NetworkState,
) -> Result<Vec<ArcErrors>> {
    if coarse.grids.len() != reference.grids.len() {
        return Err(Error::Usage("runs cover different arc sets".into()));
    }
    let mut out = Vec::with_capacity(coarse.grids.len());
    for (i, (cg, rg)) in coarse.grids.iter().zip(&reference.grids).enumerate() {
        let (jc, jr) = (cg.states.len(), rg.states.len());
        if jr % jc != 0 {
            return Err(Error::Usage(format!(
                "reference cells ({jr}) must be a multiple of coarse cells ({jc}) on arc {}",
                network.arcs()[i].id
            )));
        }
        let len_c = cg.dx * jc as f64;
        let len_r = rg.dx * jr as f64;
        if (len_c - len_r).abs() > 1e-9 * len_c.max(1.0) {
            return Err(Error::Usage(format!(
                "arc {} lengths differ between runs",
                network.arcs()[i].id
            )));
        }
        let m = jr / jc;
        let mut err_rho = 0.0;
        let mut err_q = 0.0;
        for j in 0..jc {
            let mut rho_ref = 0.0;
            let mut q_ref = 0.0;
            for k in 0..m {
                let u = rg.states[j * m + k];
                rho_ref += u.rho;
                q_ref += u.q;
            }
            rho_ref /= m as f64;
            q_ref /= m as f64;
            err_rho += (cg.states[j].rho - rho_ref).abs();
            err_q += (cg.states[j].q - q_ref).abs();
        }
        out.push(ArcErrors {
            arc_id: network.arcs()[i].id.clone(),
            rho: cg.dx * err_rho,
            q: cg.dx * err_q,
        });
    }
    Ok(out)
}

/// One row of the convergence table.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub errors: Vec<ArcErrors>,
    /// `(order_rho, order_q)` per arc vs. the previous (coarser) row.
    pub orders: Option<Vec<(f64, f64)>>,
}

fn with_cells(cfg: &LoadedConfig, dx: f64) -> Result<(Network, f64)> {
    let mut arcs = cfg.network.arcs().to_vec();
    let mut actual = None;
    for arc in &mut arcs {
        let j = (arc.length / dx).round() as usize;
        if j < 2 {
            return Err(Error::Usage(format!(
                "dx = {dx} leaves fewer than 2 cells on arc {}",
                arc.id
            )));
        }
        arc.cells = j;
        let a = arc.length / j as f64;
        match actual {
            None => actual = Some(a),
            Some(prev) => {
                if (prev - a).abs() > 1e-12 * a {
                    return Err(Error::Usage(
                        "convergence study needs all arcs to share one cell width".into(),
                    ));
                }
            }
        }
    }
    let network = Network::new(arcs, cfg.network.nodes().to_vec())?;
    Ok((network, actual.unwrap()))
}

/// Run every level plus a fine reference and assemble errors and observed
/// orders `ln(e_prev/e_cur) / ln(dx_prev/dx_cur)`.
pub fn convergence_study(
    cfg: &LoadedConfig,
    dx_levels: &[f64],
    reference_dx: f64,
) -> Result<Vec<ConvergenceRow>> {
    if dx_levels.is_empty() {
        return Err(Error::Usage("convergence study needs at least one dx level".into()));
    }
    let mut levels = dx_levels.to_vec();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let finest = *levels.last().unwrap();
    if !(reference_dx < finest) {
        return Err(Error::Usage(format!(
            "reference dx {reference_dx} must be finer than the finest level {finest}"
        )));
    }

    let (ref_net, _) = with_cells(cfg, reference_dx)?;
    let reference = run(&cfg.law, &ref_net, &cfg.ics, &cfg.sim)?;

    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for &dx in &levels {
        let (net, actual_dx) = with_cells(cfg, dx)?;
        let result = run(&cfg.law, &net, &cfg.ics, &cfg.sim)?;
        let errors = l1_error(&net, &result.final_state, &reference.final_state)?;
        let orders = rows.last().map(|prev: &ConvergenceRow| {
            let ratio = (prev.dx / actual_dx).ln();
            prev.errors
                .iter()
                .zip(&errors)
                .map(|(pe, ce)| (((pe.rho / ce.rho).ln()) / ratio, ((pe.q / ce.q).ln()) / ratio))
                .collect()
        });
        rows.push(ConvergenceRow { dx: actual_dx, errors, orders });
    }
    Ok(rows)
}

/// Least-squares fit of `ln e = ln C - exponent * ln t`.
///
/// Returns `(C, exponent)`; needs at least three points with `t > 0`,
/// `e > 0`.
pub fn decay_fit(times: &[f64], errors: &[f64]) -> Result<(f64, f64)> {
    if times.len() != errors.len() {
        return Err(Error::Usage("times and errors must have equal length".into()));
    }
    if times.len() < 3 {
        return Err(Error::Usage(format!(
            "decay fit needs at least 3 points, got {}",
            times.len()
        )));
    }
    let mut xs = Vec::with_capacity(times.len());
    let mut ys = Vec::with_capacity(times.len());
    for (&t, &e) in times.iter().zip(errors) {
        if !(t > 0.0) {
            return Err(Error::domain("decay fit requires positive times", t));
        }
        if !(e > 0.0) {
            return Err(Error::domain("decay fit requires positive errors", e));
        }
        xs.push(t.ln());
        ys.push(e.ln());
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - xbar) * (x - xbar);
        sxy += (x - xbar) * (y - ybar);
    }
    if sxx == 0.0 {
        return Err(Error::Usage("decay fit needs at least two distinct times".into()));
    }
    let slope = sxy / sxx;
    let c = (ybar - slope * xbar).exp();
    Ok((c, -slope))
}

/// One fitted decay law.
#[derive(Debug, Clone)]
pub struct DecayRow {
    /// "L1" or "Linf".
    pub norm: &'static str,
    pub arc_id: String,
    /// "rho" or "q".
    pub field: &'static str,
    pub c: f64,
    pub exponent: f64,
}

/// Fit the recorded distances to the asymptotic state, per arc, field and
/// norm, over `t >= t_min`. Points with vanishing error are skipped.
pub fn decay_table(
    network: &Network,
    monitors: &MonitorSeries,
    t_min: f64,
) -> Result<Vec<DecayRow>> {
    let mut rows = Vec::new();
    for (ai, arc) in network.arcs().iter().enumerate() {
        for (field, base) in [("rho", 0usize), ("q", 2usize)] {
            for (norm, offset) in [("L1", 0usize), ("Linf", 1usize)] {
                let mut times = Vec::new();
                let mut errs = Vec::new();
                for rec in &monitors.records {
                    if rec.t < t_min || rec.t <= 0.0 {
                        continue;
                    }
                    let e = rec.asymptote[ai][base + offset];
                    if e > 0.0 {
                        times.push(rec.t);
                        errs.push(e);
                    }
                }
                let (c, exponent) = decay_fit(&times, &errs)?;
                rows.push(DecayRow { norm, arc_id: arc.id.clone(), field, c, exponent });
            }
        }
    }
    Ok(rows)
}

/// Convenience: final-state distance to the asymptotic constant, per arc:
/// `(max_j |rho_j - rho_bar|, max_j |q_j|)`.
pub fn asymptotic_distance(result: &RunResult) -> Vec<(f64, f64)> {
    result
        .monitors
        .records
        .last()
        .map(|rec| rec.asymptote.iter().map(|a| (a[1], a[3])).collect())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ArcGrid;
    use crate::model::State;
    use crate::network::{Arc, Node, NodeKind};
    use approx::assert_relative_eq;

    fn single_arc_network(cells: usize) -> Network {
        Network::new(
            vec![Arc {
                id: "a".into(),
                tail: "w".into(),
                head: "e".into(),
                length: 2.0,
                cells,
            }],
            vec![
                Node { id: "w".into(), kind: NodeKind::Outer, kappa: None },
                Node { id: "e".into(), kind: NodeKind::Outer, kappa: None },
            ],
        )
        .unwrap()
    }

    fn state_of(grids: Vec<ArcGrid>) -> NetworkState {
        NetworkState { time: 0.0, grids }
    }

    #[test]
    fn identical_runs_have_zero_error() {
        let net = single_arc_network(8);
        let grid = ArcGrid::new(0, 0.25, vec![State::new(1.3, 0.2); 8]);
        let errs = l1_error(&net, &state_of(vec![grid.clone()]), &state_of(vec![grid])).unwrap();
        assert_eq!(errs[0].rho, 0.0);
        assert_eq!(errs[0].q, 0.0);
    }

    #[test]
    fn constant_offset_gives_c_times_length() {
        let net = single_arc_network(8);
        let coarse = ArcGrid::new(0, 0.25, vec![State::new(1.5, 0.0); 8]);
        let refined = ArcGrid::new(0, 0.125, vec![State::new(1.2, 0.0); 16]);
        let errs = l1_error(&net, &state_of(vec![coarse]), &state_of(vec![refined])).unwrap();
        assert_relative_eq!(errs[0].rho, 0.3 * 2.0, max_relative = 1e-13);
    }

    #[test]
    fn incompatible_grids_error() {
        let net = single_arc_network(8);
        let coarse = ArcGrid::new(0, 2.0 / 7.0, vec![State::new(1.0, 0.0); 7]);
        let refined = ArcGrid::new(0, 0.125, vec![State::new(1.0, 0.0); 16]);
        assert!(l1_error(&net, &state_of(vec![coarse]), &state_of(vec![refined])).is_err());
    }

    #[test]
    fn decay_fit_recovers_exact_power_law() {
        let times: Vec<f64> = (1..40).map(|k| 0.5 + 0.25 * k as f64).collect();
        let errors: Vec<f64> = times.iter().map(|t| 0.5 / t).collect();
        let (c, g) = decay_fit(&times, &errors).unwrap();
        assert_relative_eq!(c, 0.5, epsilon = 1e-10);
        assert_relative_eq!(g, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn decay_fit_constant_series_has_zero_exponent() {
        let times = [1.0, 2.0, 3.0, 4.0];
        let errors = [0.7; 4];
        let (c, g) = decay_fit(&times, &errors).unwrap();
        assert_relative_eq!(c, 0.7, epsilon = 1e-12);
        assert!(g.abs() <= 1e-12);
    }

    #[test]
    fn decay_fit_rejects_degenerate_input() {
        assert!(decay_fit(&[1.0, 2.0], &[1.0, 0.5]).is_err());
        assert!(decay_fit(&[0.0, 1.0, 2.0], &[1.0, 1.0, 1.0]).is_err());
        assert!(decay_fit(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]).is_err());
    }
}
