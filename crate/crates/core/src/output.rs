//! CSV artifact writers and the high-level drivers shared by the command
//! line and library callers. All output is plain deterministic text so
//! repeated runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::LoadedConfig;
use crate::error::Result;
use crate::junction_riemann::Applicability;
use crate::network::{Network, Orientation};
use crate::sim::{run, run_compare, CompareResult, MonitorSeries, RunResult, Snapshot};
use crate::studies::{convergence_study, decay_table, ConvergenceRow, DecayRow};

fn fmt(x: f64) -> String {
    format!("{x}")
}

/// `arc_id, cell_index, x, rho, q` for every cell of a snapshot.
pub fn snapshot_csv(network: &Network, snap: &Snapshot) -> String {
    let mut out = String::from("arc_id,cell_index,x,rho,q\n");
    for (arc, states) in network.arcs().iter().zip(&snap.states) {
        let dx = arc.dx();
        for (j, u) in states.iter().enumerate() {
            let x = (j as f64 + 0.5) * dx;
            let _ = writeln!(out, "{},{},{},{},{}", arc.id, j + 1, fmt(x), fmt(u.rho), fmt(u.q));
        }
    }
    out
}

fn junction_columns(network: &Network) -> Vec<String> {
    let mut cols = Vec::new();
    for ni in network.junction_nodes() {
        let node = &network.nodes()[ni];
        let inc = network.incident(ni);
        let plain_two_arc = inc.len() == 2 && inc[0].1 != inc[1].1;
        if plain_two_arc {
            cols.push(format!("{}.rho_star_l", node.id));
            cols.push(format!("{}.rho_star_r", node.id));
            cols.push(format!("{}.q_star", node.id));
        } else {
            for &(ai, _) in inc {
                let arc = &network.arcs()[ai].id;
                cols.push(format!("{}.{}.rho_star", node.id, arc));
                cols.push(format!("{}.{}.q_star", node.id, arc));
            }
        }
    }
    cols
}

/// Monitor CSV: `t, dt, mass, entropy, entropy_bound` plus per-junction
/// trace columns; `with_delta_g` appends a `<node>.delta_g` column per
/// two-arc junction (used by the entropy study).
pub fn monitor_csv(network: &Network, monitors: &MonitorSeries, with_delta_g: bool) -> String {
    let mut header = vec![
        "t".to_string(),
        "dt".to_string(),
        "mass".to_string(),
        "entropy".to_string(),
        "entropy_bound".to_string(),
    ];
    header.extend(junction_columns(network));
    let junction_list: Vec<usize> = network.junction_nodes().collect();
    if with_delta_g {
        for &ni in &junction_list {
            header.push(format!("{}.delta_g", network.nodes()[ni].id));
        }
    }
    let mut out = header.join(",");
    out.push('\n');

    for rec in &monitors.records {
        let mut row = vec![fmt(rec.t), fmt(rec.dt), fmt(rec.mass), fmt(rec.entropy), fmt(rec.entropy_bound)];
        for trace in &rec.traces {
            let inc = network.incident(trace.node);
            let plain_two_arc = inc.len() == 2 && inc[0].1 != inc[1].1;
            if plain_two_arc {
                let iin = inc.iter().position(|&(_, o)| o == Orientation::Incoming).unwrap();
                let iout = 1 - iin;
                row.push(fmt(trace.rho_star[iin]));
                row.push(fmt(trace.rho_star[iout]));
                row.push(fmt(trace.q_star[iin]));
            } else {
                for k in 0..inc.len() {
                    row.push(fmt(trace.rho_star[k]));
                    row.push(fmt(trace.q_star[k]));
                }
            }
        }
        if with_delta_g {
            for dg in &rec.delta_g {
                row.push(dg.map(fmt).unwrap_or_default());
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Side-by-side junction traces of the two solvers.
pub fn compare_csv(cmp: &CompareResult) -> String {
    let mut out = String::from(
        "t,relax.rho_star_l,relax.rho_star_r,relax.q_star,\
         riemann.rho_star_l,riemann.rho_star_r,riemann.q_star,riemann_status,discrepancy\n",
    );
    for row in &cmp.rows {
        let status = match row.applicability {
            Applicability::SubsonicOk => "subsonic".to_string(),
            Applicability::SupersonicHandled { .. } => "supersonic-handled".to_string(),
            Applicability::Unsupported(r) => format!("unsupported:{r}"),
        };
        let (rl, rr, q) = row
            .riemann
            .map(|(a, b, c)| (fmt(a), fmt(b), fmt(c)))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt(row.t),
            fmt(row.relax.0),
            fmt(row.relax.1),
            fmt(row.relax.2),
            rl,
            rr,
            q,
            status,
            row.discrepancy.map(fmt).unwrap_or_default()
        );
    }
    out
}

/// Convergence table shaped like the error/order tables: one row per level.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("dx");
    if let Some(first) = rows.first() {
        for e in &first.errors {
            out.push_str(&format!(
                ",err_rho_{0},order_rho_{0},err_q_{0},order_q_{0}",
                e.arc_id
            ));
        }
    }
    out.push('\n');
    for row in rows {
        out.push_str(&fmt(row.dx));
        for (i, e) in row.errors.iter().enumerate() {
            let (o_rho, o_q) = row
                .orders
                .as_ref()
                .map(|o| (fmt(o[i].0), fmt(o[i].1)))
                .unwrap_or_default();
            out.push_str(&format!(",{},{},{},{}", fmt(e.rho), o_rho, fmt(e.q), o_q));
        }
        out.push('\n');
    }
    out
}

/// Decay-fit table: one row per norm, `C`/`exponent` per arc and field.
pub fn decay_csv(rows: &[DecayRow]) -> String {
    let mut norms: Vec<&'static str> = Vec::new();
    let mut cols: Vec<(String, &'static str)> = Vec::new();
    for r in rows {
        if !norms.contains(&r.norm) {
            norms.push(r.norm);
        }
        let key = (r.arc_id.clone(), r.field);
        if !cols.contains(&key) {
            cols.push(key);
        }
    }
    let mut out = String::from("norm");
    for (arc, field) in &cols {
        out.push_str(&format!(",C_{field}_{arc},exponent_{field}_{arc}"));
    }
    out.push('\n');
    for norm in norms {
        out.push_str(norm);
        for (arc, field) in &cols {
            let r = rows
                .iter()
                .find(|r| r.norm == norm && &r.arc_id == arc && r.field == *field)
                .expect("complete decay table");
            out.push_str(&format!(",{},{}", fmt(r.c), fmt(r.exponent)));
        }
        out.push('\n');
    }
    out
}

/// Time series of the distances to the asymptotic state (for decay plots).
pub fn decay_series_csv(network: &Network, monitors: &MonitorSeries) -> String {
    let mut out = String::from("t");
    for arc in network.arcs() {
        out.push_str(&format!(
            ",l1_rho_{0},linf_rho_{0},l1_q_{0},linf_q_{0}",
            arc.id
        ));
    }
    out.push('\n');
    for rec in &monitors.records {
        out.push_str(&fmt(rec.t));
        for a in &rec.asymptote {
            for v in a {
                out.push(',');
                out.push_str(&fmt(*v));
            }
        }
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

/// Run a config and write `monitor.csv` plus `snapshots/snapshot_NNNN.csv`
/// (with a `snapshots/index.csv` time table) under `out_dir`.
pub fn run_to_dir(cfg: &LoadedConfig, out_dir: &Path) -> Result<RunResult> {
    let result = run(&cfg.law, &cfg.network, &cfg.ics, &cfg.sim)?;
    write_run_artifacts(cfg, &result, out_dir)?;
    Ok(result)
}

fn write_run_artifacts(cfg: &LoadedConfig, result: &RunResult, out_dir: &Path) -> Result<()> {
    write_file(
        &out_dir.join("monitor.csv"),
        &monitor_csv(&cfg.network, &result.monitors, false),
    )?;
    let mut index = String::from("index,t,file\n");
    for (k, snap) in result.snapshots.iter().enumerate() {
        let name = format!("snapshot_{k:04}.csv");
        write_file(
            &out_dir.join("snapshots").join(&name),
            &snapshot_csv(&cfg.network, snap),
        )?;
        let _ = writeln!(index, "{k},{},snapshots/{name}", fmt(snap.t));
    }
    write_file(&out_dir.join("snapshots").join("index.csv"), &index)?;
    Ok(())
}

/// Run both junction solvers in lockstep and write `compare.csv` alongside
/// the usual run artifacts.
pub fn compare_to_dir(cfg: &LoadedConfig, out_dir: &Path) -> Result<(RunResult, CompareResult)> {
    let (result, cmp) = run_compare(&cfg.law, &cfg.network, &cfg.ics, &cfg.sim)?;
    write_run_artifacts(cfg, &result, out_dir)?;
    write_file(&out_dir.join("compare.csv"), &compare_csv(&cmp))?;
    Ok((result, cmp))
}

/// Grid-convergence study driver; writes `convergence.csv`.
pub fn converge_to_dir(cfg: &LoadedConfig, out_dir: &Path) -> Result<Vec<ConvergenceRow>> {
    let reference_dx = cfg.study.reference_dx.unwrap_or_else(|| {
        cfg.study.dx_levels.iter().cloned().fold(f64::MAX, f64::min) / 16.0
    });
    let rows = convergence_study(cfg, &cfg.study.dx_levels, reference_dx)?;
    write_file(&out_dir.join("convergence.csv"), &convergence_csv(&rows))?;
    Ok(rows)
}

/// Asymptotic-decay study driver; writes `decay.csv` and `decay_series.csv`.
pub fn decay_to_dir(cfg: &LoadedConfig, out_dir: &Path) -> Result<Vec<DecayRow>> {
    let result = run(&cfg.law, &cfg.network, &cfg.ics, &cfg.sim)?;
    let rows = decay_table(&cfg.network, &result.monitors, cfg.study.fit_t_min)?;
    write_file(&out_dir.join("decay.csv"), &decay_csv(&rows))?;
    write_file(
        &out_dir.join("decay_series.csv"),
        &decay_series_csv(&cfg.network, &result.monitors),
    )?;
    Ok(rows)
}

/// Entropy study driver: a run whose monitor CSV carries the per-junction
/// entropy-flux jump columns; writes `entropy.csv`.
pub fn entropy_to_dir(cfg: &LoadedConfig, out_dir: &Path) -> Result<RunResult> {
    let result = run(&cfg.law, &cfg.network, &cfg.ics, &cfg.sim)?;
    write_file(
        &out_dir.join("entropy.csv"),
        &monitor_csv(&cfg.network, &result.monitors, true),
    )?;
    Ok(result)
}

/// Resolve the output directory: explicit flag, else the config's
/// snapshot_dir, else `./out`.
pub fn resolve_out_dir(cfg: &LoadedConfig, flag: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    cfg.sim
        .snapshot_dir
        .as_ref()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("out"))
}
