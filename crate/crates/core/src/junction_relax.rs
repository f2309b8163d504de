//! Relaxation-based junction solver: closed form for two arcs, assembled
//! strictly diagonally dominant linear system for N arcs.
//!
//! A node solve reads a frozen snapshot of the cells adjacent to the node and
//! produces one ghost state `(rho*_i, q*_i)` per incident arc.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::State;
use crate::network::Orientation;

/// Everything a node solve needs about one incident arc.
#[derive(Debug, Clone, Copy)]
pub struct IncidentArc {
    pub orientation: Orientation,
    /// Interior cell next to the node: last cell for incoming arcs, first
    /// cell for outgoing ones.
    pub adjacent: State,
    /// Relaxation speed of the arc for this step; must match the speed used
    /// for the arc's interior fluxes.
    pub lambda: f64,
}

/// Junction unknowns per incident arc plus the residual norms of the defining
/// equations (transmission conditions and characteristic relations).
#[derive(Debug, Clone)]
pub struct JunctionSolution {
    pub rho_star: Vec<f64>,
    pub q_star: Vec<f64>,
    pub jtc_residual: f64,
    pub characteristic_residual: f64,
}

/// Closed-form two-arc junction solve.
///
/// `u_left` is the last cell of the incoming arc, `u_right` the first cell of
/// the outgoing arc. Returns `(q*, rho*_left, rho*_right)`.
pub fn two_arc_jtc(
    kappa: f64,
    lambda_l: f64,
    lambda_r: f64,
    u_left: State,
    u_right: State,
) -> Result<(f64, f64, f64)> {
    if kappa < 0.0 || !kappa.is_finite() {
        return Err(Error::domain("kappa must be nonnegative", kappa));
    }
    if lambda_l <= 0.0 || lambda_r <= 0.0 {
        return Err(Error::domain(
            "junction solve requires positive relaxation speeds",
            lambda_l.min(lambda_r),
        ));
    }
    let denom = kappa * (lambda_l + lambda_r) + lambda_l * lambda_r;
    let q_star = kappa / denom
        * (lambda_r * u_left.q
            + lambda_l * u_right.q
            + lambda_l * lambda_r * (u_left.rho - u_right.rho));
    let rho_star_r = u_right.rho + (q_star - u_right.q) / lambda_r;
    let rho_star_l = u_left.rho - (q_star - u_left.q) / lambda_l;
    Ok((q_star, rho_star_l, rho_star_r))
}

/// Assemble the node system `A rho* = b`.
///
/// `A` has diagonal `sum_{j != i} kappa_ij + lambda_i` and off-diagonal
/// `-kappa_ij`; `b_i` is `-q_adj + lambda_i rho_adj` for outgoing arcs and
/// `q_adj + lambda_i rho_adj` for incoming ones.
pub fn assemble_node_system(
    kappa: &[Vec<f64>],
    arcs: &[IncidentArc],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = arcs.len();
    if n == 0 {
        return Err(Error::Usage("node solve needs at least one incident arc".into()));
    }
    if kappa.len() != n || kappa.iter().any(|row| row.len() != n) {
        return Err(Error::Usage(format!(
            "kappa matrix must be {n}x{n} to match the incident arcs"
        )));
    }
    for arc in arcs {
        if arc.lambda <= 0.0 || !arc.lambda.is_finite() {
            return Err(Error::domain(
                "junction solve requires positive relaxation speeds",
                arc.lambda,
            ));
        }
    }
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            kappa[i].iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| v).sum::<f64>()
                + arcs[i].lambda
        } else {
            -kappa[i][j]
        }
    });
    let b = DVector::from_fn(n, |i, _| {
        let u = arcs[i].adjacent;
        match arcs[i].orientation {
            Orientation::Outgoing => -u.q + arcs[i].lambda * u.rho,
            Orientation::Incoming => u.q + arcs[i].lambda * u.rho,
        }
    });
    Ok((a, b))
}

/// Solve a node: densities from the linear system, momenta recovered from the
/// characteristic relations.
pub fn solve_node(kappa: &[Vec<f64>], arcs: &[IncidentArc]) -> Result<JunctionSolution> {
    let (a, b) = assemble_node_system(kappa, arcs)?;
    let n = arcs.len();
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        if !(a[(i, i)].abs() > off) {
            return Err(Error::Numerical(format!(
                "junction matrix lost strict diagonal dominance in row {i}"
            )));
        }
    }
    let rho = a
        .clone()
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("junction linear solve failed".into()))?;

    let scale = arcs.iter().map(|x| x.adjacent.rho.abs()).fold(1.0f64, f64::max);
    let mut rho_star = Vec::with_capacity(n);
    for i in 0..n {
        let mut r = rho[i];
        if r < 0.0 {
            if r < -1e-9 * scale {
                return Err(Error::Numerical(format!(
                    "junction solve produced negative density {r}"
                )));
            }
            r = 0.0; // round-off guard; the exact solution is nonnegative
        }
        rho_star.push(r);
    }

    let mut q_star = Vec::with_capacity(n);
    for i in 0..n {
        let u = arcs[i].adjacent;
        let q = match arcs[i].orientation {
            Orientation::Outgoing => u.q + arcs[i].lambda * (rho_star[i] - u.rho),
            Orientation::Incoming => u.q - arcs[i].lambda * (rho_star[i] - u.rho),
        };
        q_star.push(q);
    }

    // Residuals of the transmission conditions and characteristic relations.
    let mut jtc_residual = 0.0f64;
    for i in 0..n {
        let exchange: f64 =
            (0..n).map(|j| kappa[i][j] * (rho_star[i] - rho_star[j])).sum();
        let r = match arcs[i].orientation {
            Orientation::Outgoing => -q_star[i] - exchange,
            Orientation::Incoming => q_star[i] - exchange,
        };
        jtc_residual = jtc_residual.max(r.abs());
    }
    let characteristic_residual = (0..n)
        .map(|i| {
            let u = arcs[i].adjacent;
            let r = match arcs[i].orientation {
                Orientation::Outgoing => q_star[i] - (u.q + arcs[i].lambda * (rho_star[i] - u.rho)),
                Orientation::Incoming => q_star[i] - (u.q - arcs[i].lambda * (rho_star[i] - u.rho)),
            };
            r.abs()
        })
        .fold(0.0f64, f64::max);

    Ok(JunctionSolution { rho_star, q_star, jtc_residual, characteristic_residual })
}

/// Ghost states carried by each incident arc at its junction end: the right
/// ghost for incoming arcs, the left ghost for outgoing ones.
pub fn junction_ghosts(solution: &JunctionSolution) -> Vec<State> {
    solution
        .rho_star
        .iter()
        .zip(&solution.q_star)
        .map(|(&rho, &q)| State::new(rho, q))
        .collect()
}
