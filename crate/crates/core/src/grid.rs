//! Per-arc spatial discretization: HLL numerical flux, relaxation speed
//! selection, CFL time step, conservative update and outer-boundary ghosts.

use crate::error::{Error, Result};
use crate::model::{physical_flux, sound_speed, PressureLaw, State};

/// Uniform cell array of one arc together with its current relaxation speed.
///
/// Interior cells are indexed `1..=J` in the scheme's notation; ghosts `0` and
/// `J+1` are not stored here, they are supplied per step by boundary and
/// junction logic.
#[derive(Debug, Clone)]
pub struct ArcGrid {
    /// Index of the arc in the owning network.
    pub arc: usize,
    pub dx: f64,
    pub states: Vec<State>,
    /// Relaxation speed used for this arc's fluxes during the current step.
    pub lambda: f64,
}

impl ArcGrid {
    pub fn new(arc: usize, dx: f64, states: Vec<State>) -> Self {
        Self { arc, dx, states, lambda: 0.0 }
    }
}

/// Two-speed HLL flux with general speeds `c1 < c2`.
///
/// Kept for coverage and testing; production runs use [`symmetric_flux`].
pub fn general_flux(
    law: &PressureLaw,
    u_minus: State,
    u_plus: State,
    c1: f64,
    c2: f64,
) -> Result<(f64, f64)> {
    if !(c1 < c2) {
        return Err(Error::domain("general flux requires c1 < c2", c2 - c1));
    }
    if c1 > 0.0 {
        return physical_flux(law, u_minus);
    }
    if c2 < 0.0 {
        return physical_flux(law, u_plus);
    }
    let (fm_rho, fm_q) = physical_flux(law, u_minus)?;
    let (fp_rho, fp_q) = physical_flux(law, u_plus)?;
    let inv = 1.0 / (c2 - c1);
    let blend = c1 * c2 * inv;
    Ok((
        (c2 * fm_rho - c1 * fp_rho) * inv + blend * (u_plus.rho - u_minus.rho),
        (c2 * fm_q - c1 * fp_q) * inv + blend * (u_plus.q - u_minus.q),
    ))
}

/// HLL flux with symmetric speeds `c1 = -lambda`, `c2 = lambda`:
/// `(F(U-) + F(U+))/2 - lambda/2 (U+ - U-)`.
pub fn symmetric_flux(
    law: &PressureLaw,
    u_minus: State,
    u_plus: State,
    lambda: f64,
) -> Result<(f64, f64)> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::domain("symmetric flux requires lambda > 0", lambda));
    }
    let (fm_rho, fm_q) = physical_flux(law, u_minus)?;
    let (fp_rho, fp_q) = physical_flux(law, u_plus)?;
    Ok((
        0.5 * (fm_rho + fp_rho) - 0.5 * lambda * (u_plus.rho - u_minus.rho),
        0.5 * (fm_q + fp_q) - 0.5 * lambda * (u_plus.q - u_minus.q),
    ))
}

/// Subcharacteristic relaxation speed `safety * max_j (|u_j| + c(rho_j))`.
///
/// Vacuum cells contribute zero; a fully vacuous arc therefore yields 0 and
/// the caller must substitute a positive speed before fluxing.
pub fn arc_speed(law: &PressureLaw, grid: &ArcGrid, safety: f64) -> Result<f64> {
    if safety < 1.0 || !safety.is_finite() {
        return Err(Error::domain("safety factor must be >= 1", safety));
    }
    let mut max_speed: f64 = 0.0;
    for u in &grid.states {
        if u.rho == 0.0 {
            if u.q != 0.0 {
                return Err(Error::VacuumMomentum { q: u.q });
            }
            continue;
        }
        let c = sound_speed(law, u.rho)?;
        max_speed = max_speed.max(u.velocity().abs() + c);
    }
    Ok(safety * max_speed)
}

/// CFL time step `dt = cfl * dx_min / lambda_max`.
pub fn cfl_dt(dx_min: f64, lambda_max: f64, cfl: f64) -> Result<f64> {
    if lambda_max <= 0.0 || !lambda_max.is_finite() {
        return Err(Error::domain("cfl_dt requires lambda_max > 0", lambda_max));
    }
    if cfl <= 0.0 || cfl > 1.0 {
        return Err(Error::domain("cfl must lie in (0, 1]", cfl));
    }
    Ok(cfl * dx_min / lambda_max)
}

// Slack for the CFL check: dt is often computed as exactly dx/lambda and the
// product may round one ulp above dx.
const CFL_SLACK: f64 = 1.0 + 1e-12;

/// One conservative step `U_j - dt/dx (F_{j+1/2} - F_{j-1/2})` on a single arc.
///
/// Boundary interfaces use the supplied ghost states; all interfaces use the
/// grid's current `lambda`.
pub fn conservative_update(
    law: &PressureLaw,
    grid: &ArcGrid,
    left_ghost: State,
    right_ghost: State,
    dt: f64,
) -> Result<Vec<State>> {
    let j = grid.states.len();
    if dt * grid.lambda > grid.dx * CFL_SLACK {
        return Err(Error::CflViolation {
            arc: grid.arc.to_string(),
            ratio: dt * grid.lambda / grid.dx,
        });
    }
    // Physical flux of every cell (ghosts included) evaluated once.
    let mut phys = Vec::with_capacity(j + 2);
    phys.push(physical_flux(law, left_ghost)?);
    for u in &grid.states {
        phys.push(physical_flux(law, *u)?);
    }
    phys.push(physical_flux(law, right_ghost)?);

    let cell = |i: usize| -> State {
        if i == 0 {
            left_ghost
        } else if i == j + 1 {
            right_ghost
        } else {
            grid.states[i - 1]
        }
    };

    // Interface fluxes F_{i+1/2} between cell i and i+1, i = 0..=J.
    let mut fluxes = Vec::with_capacity(j + 1);
    for i in 0..=j {
        let (ul, ur) = (cell(i), cell(i + 1));
        let (fl, gl) = phys[i];
        let (fr, gr) = phys[i + 1];
        fluxes.push((
            0.5 * (fl + fr) - 0.5 * grid.lambda * (ur.rho - ul.rho),
            0.5 * (gl + gr) - 0.5 * grid.lambda * (ur.q - ul.q),
        ));
    }

    let nu = dt / grid.dx;
    let mut out = Vec::with_capacity(j);
    for i in 0..j {
        let u = grid.states[i];
        let (f_l, g_l) = fluxes[i];
        let (f_r, g_r) = fluxes[i + 1];
        out.push(State::new(u.rho - nu * (f_r - f_l), u.q - nu * (g_r - g_l)));
    }
    Ok(out)
}

/// Reflecting outer-boundary ghost `(rho, -q)`; makes the wall density flux
/// of [`symmetric_flux`] vanish identically.
pub fn outer_ghost(adjacent: State) -> State {
    State::new(adjacent.rho, -adjacent.q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn law2() -> PressureLaw {
        PressureLaw::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn general_flux_upwind_cases() {
        let law = law2();
        let a = State::new(1.0, 0.3);
        let b = State::new(2.0, -0.1);
        assert_eq!(
            general_flux(&law, a, b, 1.0, 2.0).unwrap(),
            physical_flux(&law, a).unwrap()
        );
        assert_eq!(
            general_flux(&law, a, b, -2.0, -1.0).unwrap(),
            physical_flux(&law, b).unwrap()
        );
        assert!(general_flux(&law, a, b, 2.0, 1.0).is_err());
        assert!(general_flux(&law, a, b, 1.0, 1.0).is_err());
    }

    #[test]
    fn general_flux_reduces_to_symmetric() {
        let law = law2();
        let a = State::new(1.3, 0.4);
        let b = State::new(0.8, -0.2);
        let lam = 2.5;
        let (fr, fq) = general_flux(&law, a, b, -lam, lam).unwrap();
        let (sr, sq) = symmetric_flux(&law, a, b, lam).unwrap();
        assert_relative_eq!(fr, sr, max_relative = 1e-14);
        assert_relative_eq!(fq, sq, max_relative = 1e-14);
    }

    #[test]
    fn symmetric_flux_values() {
        let law = law2();
        let rest = State::new(1.0, 0.0);
        assert_eq!(symmetric_flux(&law, rest, rest, 3.0).unwrap(), (0.0, 1.0));
        let (fr, fq) =
            symmetric_flux(&law, State::new(1.0, 0.0), State::new(2.0, 0.0), 3.0).unwrap();
        assert_relative_eq!(fr, -1.5);
        assert_relative_eq!(fq, 2.5);
        assert!(symmetric_flux(&law, rest, rest, 0.0).is_err());
    }

    #[test]
    fn symmetric_flux_is_consistent() {
        let law = law2();
        let u = State::new(1.7, -0.6);
        let f = symmetric_flux(&law, u, u, 4.0).unwrap();
        assert_eq!(f, physical_flux(&law, u).unwrap());
    }

    #[test]
    fn arc_speed_values() {
        let law = law2();
        let g = ArcGrid::new(0, 0.05, vec![State::new(1.0, 0.0); 10]);
        assert_relative_eq!(arc_speed(&law, &g, 1.0).unwrap(), 2f64.sqrt());
        let g = ArcGrid::new(0, 0.05, vec![State::new(2.0, 2.0); 4]);
        assert_relative_eq!(arc_speed(&law, &g, 1.0).unwrap(), 3.0);
        assert_relative_eq!(arc_speed(&law, &g, 1.1).unwrap(), 3.0 * 1.1);
        assert!(arc_speed(&law, &g, 0.9).is_err());
        // vacuum cells contribute zero
        let g = ArcGrid::new(0, 0.05, vec![State::new(0.0, 0.0), State::new(2.0, 2.0)]);
        assert_relative_eq!(arc_speed(&law, &g, 1.0).unwrap(), 3.0);
        let g = ArcGrid::new(0, 0.05, vec![State::new(0.0, 1.0)]);
        assert!(arc_speed(&law, &g, 1.0).is_err());
    }

    #[test]
    fn cfl_dt_values() {
        assert_relative_eq!(cfl_dt(0.05, 2.0, 1.0).unwrap(), 0.025);
        assert_relative_eq!(cfl_dt(0.05, 2.0, 0.5).unwrap(), 0.0125);
        assert!(cfl_dt(0.05, 0.0, 0.5).is_err());
        assert!(cfl_dt(0.05, 1.0, 0.0).is_err());
        assert!(cfl_dt(0.05, 1.0, 1.5).is_err());
    }

    #[test]
    fn update_keeps_constant_state() {
        let law = law2();
        let u = State::new(1.4, 0.7);
        let mut g = ArcGrid::new(0, 0.1, vec![u; 8]);
        g.lambda = 3.0;
        let out = conservative_update(&law, &g, u, u, 0.01).unwrap();
        for v in out {
            assert_relative_eq!(v.rho, u.rho);
            assert_relative_eq!(v.q, u.q);
        }
    }

    #[test]
    fn update_two_cell_example() {
        // Two cells (1,0)/(2,0), lambda = 3, dt = dx/6, wall ghosts.
        let law = law2();
        let dx = 0.3;
        let mut g = ArcGrid::new(0, dx, vec![State::new(1.0, 0.0), State::new(2.0, 0.0)]);
        g.lambda = 3.0;
        let dt = dx / 6.0;
        let lg = outer_ghost(g.states[0]);
        let rg = outer_ghost(g.states[1]);
        let out = conservative_update(&law, &g, lg, rg, dt).unwrap();
        // interior interface flux is (-1.5, 2.5); wall fluxes are (0, 1) and (0, 4)
        assert_relative_eq!(out[0].rho, 1.0 - (1.0 / 6.0) * (-1.5 - 0.0));
        assert_relative_eq!(out[0].q, 0.0 - (1.0 / 6.0) * (2.5 - 1.0));
        assert_relative_eq!(out[1].rho, 2.0 - (1.0 / 6.0) * (0.0 - (-1.5)));
        assert_relative_eq!(out[1].q, 0.0 - (1.0 / 6.0) * (4.0 - 2.5));
        // mass is conserved because the wall density fluxes vanish
        assert_relative_eq!(out[0].rho + out[1].rho, 3.0, max_relative = 1e-14);
    }

    #[test]
    fn update_rejects_cfl_violation() {
        let law = law2();
        let u = State::new(1.0, 0.0);
        let mut g = ArcGrid::new(0, 0.05, vec![u; 4]);
        g.lambda = 2.0;
        assert!(matches!(
            conservative_update(&law, &g, u, u, 0.05),
            Err(Error::CflViolation { .. })
        ));
        // dt exactly at the bound passes
        assert!(conservative_update(&law, &g, u, u, 0.025).is_ok());
    }

    #[test]
    fn outer_ghost_mirrors_momentum() {
        let g = outer_ghost(State::new(1.2, 0.7));
        assert_eq!(g, State::new(1.2, -0.7));
        let g = outer_ghost(State::new(1.2, 0.0));
        assert_eq!(g, State::new(1.2, 0.0));
        // wall density flux vanishes for any adjacent state and lambda
        let law = law2();
        let a = State::new(0.9, -0.4);
        let (f_rho, _) = symmetric_flux(&law, outer_ghost(a), a, 2.7).unwrap();
        assert_eq!(f_rho, 0.0);
    }
}
