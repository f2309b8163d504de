//! Riemann-invariant junction solver for two-arc junctions.
//!
//! The subsonic case intersects the two invariant curves with the jump
//! transmission condition via monotone bisection. Supersonic adjacent states
//! are handled by the zero-speed-shock mirror construction (fast states) or
//! by staying on the original invariant curve (reversed states); anything
//! else is reported as unsupported rather than guessed.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{
    classify, eigenvalues, riemann_invariants, sonic_curves, sound_speed, PressureLaw, Regime,
    State,
};

/// Which side of the junction a curve or state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Why the Riemann solver declined an input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnsupportedReason {
    /// The subsonic theory only covers 1 < gamma <= 3.
    GammaAboveThree,
    /// The invariant curves do not intersect (z1(left) < z2(right)).
    IntersectionCondition,
    /// Inputs violate the operation's regime precondition.
    InputRegime,
    /// No admissible intersection of the curve branches with the jump
    /// transmission condition.
    NoAdmissibleSolution,
    /// The solved junction states escape the subsonic bounds.
    SubsonicConstraint,
    /// A vacuum adjacent state.
    VacuumAdjacent,
    /// kappa or another parameter is out of range.
    InvalidParameter,
}

impl fmt::Display for UnsupportedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UnsupportedReason::GammaAboveThree => "gamma>3",
            UnsupportedReason::IntersectionCondition => "invariant-curves-disjoint",
            UnsupportedReason::InputRegime => "input-regime",
            UnsupportedReason::NoAdmissibleSolution => "no-admissible-solution",
            UnsupportedReason::SubsonicConstraint => "subsonic-constraint",
            UnsupportedReason::VacuumAdjacent => "vacuum-adjacent",
            UnsupportedReason::InvalidParameter => "invalid-parameter",
        };
        f.write_str(s)
    }
}

/// How each side of the junction was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideMode {
    Subsonic,
    /// Fast supersonic state replaced by its zero-speed-shock mirror.
    Mirrored,
    /// Reversed supersonic state kept on its own invariant curve.
    StayOnCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Applicability {
    SubsonicOk,
    SupersonicHandled { left: SideMode, right: SideMode },
    Unsupported(UnsupportedReason),
}

/// Junction trace produced by the Riemann solver; `q*` is shared by both
/// sides through the transmission condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoArcSolution {
    pub q_star: f64,
    pub rho_star_l: f64,
    pub rho_star_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannJunctionResult {
    pub solution: Option<TwoArcSolution>,
    pub applicability: Applicability,
}

/// One invariant curve in the `(rho, q)` plane.
///
/// Left curves are level sets of `z1`, right curves of `z2`:
/// `q_l(rho) = z rho - alpha rho c(rho)`, `q_r(rho) = z rho + alpha rho c(rho)`.
#[derive(Debug, Clone, Copy)]
pub struct InvariantCurve {
    law: PressureLaw,
    side: Side,
    z: f64,
}

impl InvariantCurve {
    pub fn new(law: PressureLaw, side: Side, z: f64) -> Self {
        Self { law, side, z }
    }

    /// Curve through a given state: takes `z1` of it on the left, `z2` on the
    /// right.
    pub fn from_state(law: PressureLaw, side: Side, u: State) -> Result<Self> {
        let (z1, z2) = riemann_invariants(&law, u)?;
        let z = match side {
            Side::Left => z1,
            Side::Right => z2,
        };
        Ok(Self { law, side, z })
    }

    pub fn constant(&self) -> f64 {
        self.z
    }

    pub fn eval(&self, rho: f64) -> f64 {
        assert!(rho >= 0.0, "invariant curves are defined for rho >= 0");
        if rho == 0.0 {
            return 0.0;
        }
        let c = sound_speed(&self.law, rho).expect("rho > 0");
        match self.side {
            Side::Left => self.z * rho - self.law.alpha() * rho * c,
            Side::Right => self.z * rho + self.law.alpha() * rho * c,
        }
    }
}

/// Evaluate an invariant curve at a density.
pub fn curve_eval(curve: &InvariantCurve, rho: f64) -> f64 {
    curve.eval(rho)
}

/// Density where the sound speed equals `c_target` (zero for nonpositive
/// targets).
fn rho_from_sound(law: &PressureLaw, c_target: f64) -> f64 {
    if c_target <= 0.0 {
        return 0.0;
    }
    let g = law.gamma();
    (c_target * c_target / (law.p0() * g)).powf(1.0 / (g - 1.0))
}

/// Monotone segment of an invariant curve: decreasing on the left side,
/// increasing on the right, over `rho in [rho_lo, rho_hi or infinity)`.
#[derive(Debug, Clone, Copy)]
struct Branch {
    curve: InvariantCurve,
    rho_lo: f64,
    rho_hi: Option<f64>,
}

const Q_TOL: f64 = 1e-12;
const MAX_BISECT: usize = 200;

impl Branch {
    fn q_at_lo(&self) -> f64 {
        self.curve.eval(self.rho_lo)
    }

    fn q_at_hi(&self) -> Option<f64> {
        self.rho_hi.map(|r| self.curve.eval(r))
    }

    /// Invert the monotone segment: find rho with `eval(rho) = q`.
    fn invert(&self, q: f64) -> Option<f64> {
        let decreasing = matches!(self.curve.side, Side::Left);
        let q_lo = self.q_at_lo();
        // q must sit on the segment's side of the endpoint value.
        let slack = 1e-9 * (1.0 + q.abs());
        if decreasing {
            if q > q_lo + slack {
                return None;
            }
            if q >= q_lo {
                return Some(self.rho_lo);
            }
        } else {
            if q < q_lo - slack {
                return None;
            }
            if q <= q_lo {
                return Some(self.rho_lo);
            }
        }
        let mut lo = self.rho_lo;
        let mut hi = match self.rho_hi {
            Some(h) => {
                let q_hi = self.curve.eval(h);
                let beyond = if decreasing { q < q_hi - slack } else { q > q_hi + slack };
                if beyond {
                    return None;
                }
                h
            }
            None => {
                // expand until the target value is bracketed
                let mut h = (self.rho_lo * 2.0).max(1e-6);
                let mut tries = 0;
                loop {
                    let v = self.curve.eval(h);
                    let past = if decreasing { v <= q } else { v >= q };
                    if past {
                        break h;
                    }
                    h *= 2.0;
                    tries += 1;
                    if tries > 2000 {
                        return None;
                    }
                }
            }
        };
        let mut iters = 0;
        while hi - lo > 1e-13 * hi.max(1.0) && iters < MAX_BISECT {
            let mid = 0.5 * (lo + hi);
            let v = self.curve.eval(mid);
            let keep_low = if decreasing { v >= q } else { v <= q };
            if keep_low {
                lo = mid;
            } else {
                hi = mid;
            }
            iters += 1;
        }
        Some(0.5 * (lo + hi))
    }
}

/// Subsonic monotone branch of a left curve: from the curve maximum (its
/// tangency with `q_s^+`, at `c = z/(alpha+1)`) rightwards.
fn subsonic_left_branch(law: PressureLaw, z: f64) -> Branch {
    let rho_lo = rho_from_sound(&law, z / (law.alpha() + 1.0));
    Branch { curve: InvariantCurve::new(law, Side::Left, z), rho_lo, rho_hi: None }
}

/// Subsonic monotone branch of a right curve: from the curve minimum
/// (`c = -z/(alpha+1)`) rightwards.
fn subsonic_right_branch(law: PressureLaw, z: f64) -> Branch {
    let rho_lo = rho_from_sound(&law, -z / (law.alpha() + 1.0));
    Branch { curve: InvariantCurve::new(law, Side::Right, z), rho_lo, rho_hi: None }
}

/// Part of a left curve where `mu2 < 0` (reversed supersonic admissible set).
fn stay_left_branch(law: PressureLaw, z: f64) -> Option<Branch> {
    let alpha = law.alpha();
    let rho_lo = if alpha > 1.0 {
        rho_from_sound(&law, z / (alpha - 1.0))
    } else {
        // gamma = 3: mu2 = z all along the curve
        if z < 0.0 {
            0.0
        } else {
            return None;
        }
    };
    Some(Branch { curve: InvariantCurve::new(law, Side::Left, z), rho_lo, rho_hi: None })
}

/// Part of a right curve where `mu1 > 0`.
fn stay_right_branch(law: PressureLaw, z: f64) -> Option<Branch> {
    let alpha = law.alpha();
    let rho_lo = if alpha > 1.0 {
        rho_from_sound(&law, -z / (alpha - 1.0))
    } else {
        if z > 0.0 {
            0.0
        } else {
            return None;
        }
    };
    Some(Branch { curve: InvariantCurve::new(law, Side::Right, z), rho_lo, rho_hi: None })
}

/// Unique positive intersection of the two invariant curves, by bracketed
/// bisection on the (strictly decreasing) difference of slopes.
pub fn intersection_point(
    law: &PressureLaw,
    u_left: State,
    u_right: State,
) -> std::result::Result<(f64, f64), UnsupportedReason> {
    if law.gamma() > 3.0 {
        return Err(UnsupportedReason::GammaAboveThree);
    }
    if u_left.rho <= 0.0 || u_right.rho <= 0.0 {
        return Err(UnsupportedReason::VacuumAdjacent);
    }
    let z1 = riemann_invariants(law, u_left).expect("rho > 0").0;
    let z2 = riemann_invariants(law, u_right).expect("rho > 0").1;
    if z1 < z2 {
        return Err(UnsupportedReason::IntersectionCondition);
    }
    if z1 == z2 {
        return Ok((0.0, 0.0));
    }
    // q_l(rho) = q_r(rho), rho > 0  <=>  (z1 - z2) - 2 alpha c(rho) = 0
    let gap = |rho: f64| (z1 - z2) - 2.0 * law.alpha() * sound_speed(law, rho).expect("rho > 0");
    let mut hi = u_left.rho.max(u_right.rho).max(1.0);
    let mut tries = 0;
    while gap(hi) > 0.0 {
        hi *= 2.0;
        tries += 1;
        if tries > 2000 {
            return Err(UnsupportedReason::NoAdmissibleSolution);
        }
    }
    let mut lo = hi * 1e-30;
    while gap(lo) < 0.0 {
        lo *= 1e-3;
        if lo < f64::MIN_POSITIVE {
            return Err(UnsupportedReason::NoAdmissibleSolution);
        }
    }
    let mut iters = 0;
    while hi - lo > 1e-13 * hi.max(1.0) && iters < MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if gap(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    let rho_i = 0.5 * (lo + hi);
    let q_i = InvariantCurve::new(*law, Side::Left, z1).eval(rho_i);
    Ok((rho_i, q_i))
}

/// Solve `q = kappa (phi_l(q) - phi_r(q))` on the admissible q-interval of
/// two monotone branches. The left inverse is decreasing and the right one
/// increasing, so `F(q) = q - kappa (phi_l - phi_r)` is strictly increasing.
fn solve_on_branches(
    kappa: f64,
    left: &Branch,
    right: &Branch,
) -> std::result::Result<TwoArcSolution, UnsupportedReason> {
    if kappa < 0.0 || !kappa.is_finite() {
        return Err(UnsupportedReason::InvalidParameter);
    }
    let mut q_lo = right.q_at_lo();
    let mut q_hi = left.q_at_lo();
    if let Some(h) = right.q_at_hi() {
        q_hi = q_hi.min(h);
    }
    if let Some(h) = left.q_at_hi() {
        q_lo = q_lo.max(h);
    }
    if q_lo > q_hi {
        return Err(UnsupportedReason::NoAdmissibleSolution);
    }
    let residual = |q: f64| -> Option<f64> {
        let rl = left.invert(q)?;
        let rr = right.invert(q)?;
        Some(q - kappa * (rl - rr))
    };
    let f_lo = residual(q_lo).ok_or(UnsupportedReason::NoAdmissibleSolution)?;
    let f_hi = residual(q_hi).ok_or(UnsupportedReason::NoAdmissibleSolution)?;
    let scale = 1e-10 * (1.0 + q_lo.abs().max(q_hi.abs()));
    let q_star = if f_lo >= 0.0 {
        if f_lo > scale {
            return Err(UnsupportedReason::NoAdmissibleSolution);
        }
        q_lo
    } else if f_hi <= 0.0 {
        if f_hi < -scale {
            return Err(UnsupportedReason::NoAdmissibleSolution);
        }
        q_hi
    } else {
        let mut lo = q_lo;
        let mut hi = q_hi;
        let mut iters = 0;
        while hi - lo > Q_TOL && iters < MAX_BISECT {
            let mid = 0.5 * (lo + hi);
            match residual(mid) {
                Some(v) if v < 0.0 => lo = mid,
                Some(_) => hi = mid,
                None => return Err(UnsupportedReason::NoAdmissibleSolution),
            }
            iters += 1;
        }
        0.5 * (lo + hi)
    };
    let rho_star_l = left.invert(q_star).ok_or(UnsupportedReason::NoAdmissibleSolution)?;
    let rho_star_r = right.invert(q_star).ok_or(UnsupportedReason::NoAdmissibleSolution)?;

    #[cfg(debug_assertions)]
    monotonicity_check(kappa, left, right, q_lo, q_hi);

    Ok(TwoArcSolution { q_star, rho_star_l, rho_star_r })
}

/// Debug-mode sampling of the solvability function over the bracket; the
/// existence lemma rests on its strict monotonicity.
#[cfg(debug_assertions)]
fn monotonicity_check(kappa: f64, left: &Branch, right: &Branch, q_lo: f64, q_hi: f64) {
    if !(q_hi - q_lo > Q_TOL) {
        return;
    }
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=100 {
        let q = q_lo + (q_hi - q_lo) * k as f64 / 100.0;
        let (rl, rr) = match (left.invert(q), right.invert(q)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        let f = q - kappa * (rl - rr);
        assert!(
            f >= prev - 1e-9 * (1.0 + f.abs()),
            "junction solvability function lost monotonicity at q = {q}"
        );
        prev = f;
    }
}

fn check_subsonic_constraint(
    law: &PressureLaw,
    rho: f64,
    q: f64,
) -> std::result::Result<(), UnsupportedReason> {
    if rho <= 0.0 {
        // a vanishing junction density is the degenerate wall limit
        return if q.abs() <= 1e-9 { Ok(()) } else { Err(UnsupportedReason::SubsonicConstraint) };
    }
    let (qs_minus, qs_plus) = sonic_curves(law, rho).expect("rho > 0");
    let slack = 1e-9 * (1.0 + qs_plus.abs());
    if q < qs_minus - slack || q > qs_plus + slack {
        return Err(UnsupportedReason::SubsonicConstraint);
    }
    Ok(())
}

/// Subsonic junction solve: both adjacent states strictly inside the sonic
/// curves, `1 < gamma <= 3`.
pub fn subsonic_solve(
    law: &PressureLaw,
    kappa: f64,
    u_left: State,
    u_right: State,
) -> std::result::Result<TwoArcSolution, UnsupportedReason> {
    if law.gamma() > 3.0 {
        return Err(UnsupportedReason::GammaAboveThree);
    }
    if u_left.rho <= 0.0 || u_right.rho <= 0.0 {
        return Err(UnsupportedReason::VacuumAdjacent);
    }
    for u in [u_left, u_right] {
        if classify(law, u).expect("rho > 0") == Regime::Supersonic {
            return Err(UnsupportedReason::InputRegime);
        }
    }
    let z1 = riemann_invariants(law, u_left).expect("rho > 0").0;
    let z2 = riemann_invariants(law, u_right).expect("rho > 0").1;
    let left = subsonic_left_branch(*law, z1);
    let right = subsonic_right_branch(*law, z2);
    let sol = solve_on_branches(kappa, &left, &right)?;
    check_subsonic_constraint(law, sol.rho_star_l, sol.q_star)?;
    check_subsonic_constraint(law, sol.rho_star_r, sol.q_star)?;
    Ok(sol)
}

/// Zero-speed-shock mirror: the other state with the same momentum and the
/// same Riemann invariant (`z1` on the left, `z2` on the right), on the
/// opposite side of the sonic point.
pub fn supersonic_mirror(law: &PressureLaw, u: State, side: Side) -> Result<State> {
    if u.rho <= 0.0 {
        return Err(Error::domain("mirror construction requires rho > 0", u.rho));
    }
    match side {
        Side::Left if u.q <= 0.0 => {
            return Err(Error::Usage(
                "left mirror construction needs positive momentum".into(),
            ));
        }
        Side::Right if u.q >= 0.0 => {
            return Err(Error::Usage(
                "right mirror construction needs negative momentum".into(),
            ));
        }
        _ => {}
    }
    let g = law.gamma();
    // sonic point of rho -> q/rho +- alpha c(rho): where |q| = rho c(rho)
    let rho_sonic = (u.q.abs() / (law.p0() * g).sqrt()).powf(2.0 / (g + 1.0));
    if (u.rho - rho_sonic).abs() <= 1e-12 * rho_sonic {
        return Ok(u); // sonic input is its own mirror (double root)
    }
    let (z1, z2) = riemann_invariants(law, u)?;
    let z = match side {
        Side::Left => z1,
        Side::Right => z2,
    };
    // Signed so that the extremum at rho_sonic is a minimum <= 0 and the
    // function grows to +inf towards rho -> 0 and rho -> inf on both sides.
    let objective = |rho: f64| -> f64 {
        let c = sound_speed(law, rho).expect("rho > 0");
        match side {
            Side::Left => u.q / rho + law.alpha() * c - z,
            Side::Right => -(u.q / rho - law.alpha() * c - z),
        }
    };
    // the input and its mirror are the two roots on either side of rho_sonic
    let search_up = u.rho < rho_sonic;
    let (mut lo, mut hi);
    if search_up {
        lo = rho_sonic;
        hi = rho_sonic * 2.0;
        let mut tries = 0;
        while objective(hi) < 0.0 {
            hi *= 2.0;
            tries += 1;
            if tries > 2000 {
                return Err(Error::Numerical("mirror bracket expansion failed".into()));
            }
        }
    } else {
        hi = rho_sonic;
        lo = rho_sonic * 0.5;
        let mut tries = 0;
        while objective(lo) < 0.0 {
            lo *= 0.5;
            tries += 1;
            if tries > 4000 {
                return Err(Error::Numerical("mirror bracket expansion failed".into()));
            }
        }
    }
    let mut iters = 0;
    while hi - lo > 1e-13 * hi.max(1.0) && iters < MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        let v = objective(mid);
        // keep the sign change between the sonic end (<= 0) and the far end
        let root_above_mid = if search_up { v < 0.0 } else { v > 0.0 };
        if root_above_mid {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    Ok(State::new(0.5 * (lo + hi), u.q))
}

/// Full two-arc dispatch: subsonic solve, mirror constructions for fast
/// supersonic states, stay-on-curve for reversed ones, otherwise unsupported.
pub fn riemann_junction_solve(
    law: &PressureLaw,
    kappa: f64,
    u_left: State,
    u_right: State,
) -> RiemannJunctionResult {
    let unsupported = |r: UnsupportedReason| RiemannJunctionResult {
        solution: None,
        applicability: Applicability::Unsupported(r),
    };
    if law.gamma() > 3.0 {
        return unsupported(UnsupportedReason::GammaAboveThree);
    }
    if kappa < 0.0 || !kappa.is_finite() {
        return unsupported(UnsupportedReason::InvalidParameter);
    }
    if u_left.rho <= 0.0 || u_right.rho <= 0.0 {
        return unsupported(UnsupportedReason::VacuumAdjacent);
    }
    let z1 = riemann_invariants(law, u_left).expect("rho > 0").0;
    let z2 = riemann_invariants(law, u_right).expect("rho > 0").1;

    let (left_branch, left_mode) = match classify(law, u_left).expect("rho > 0") {
        Regime::Subsonic | Regime::Sonic => (subsonic_left_branch(*law, z1), SideMode::Subsonic),
        Regime::Supersonic => {
            let (mu1, _) = eigenvalues(law, u_left).expect("rho > 0");
            if mu1 > 0.0 {
                let mirrored = match supersonic_mirror(law, u_left, Side::Left) {
                    Ok(m) => m,
                    Err(_) => return unsupported(UnsupportedReason::NoAdmissibleSolution),
                };
                (
                    Branch {
                        curve: InvariantCurve::new(*law, Side::Left, z1),
                        rho_lo: mirrored.rho,
                        rho_hi: None,
                    },
                    SideMode::Mirrored,
                )
            } else {
                match stay_left_branch(*law, z1) {
                    Some(b) => (b, SideMode::StayOnCurve),
                    None => return unsupported(UnsupportedReason::NoAdmissibleSolution),
                }
            }
        }
    };
    let (right_branch, right_mode) = match classify(law, u_right).expect("rho > 0") {
        Regime::Subsonic | Regime::Sonic => (subsonic_right_branch(*law, z2), SideMode::Subsonic),
        Regime::Supersonic => {
            let (_, mu2) = eigenvalues(law, u_right).expect("rho > 0");
            if mu2 < 0.0 {
                let mirrored = match supersonic_mirror(law, u_right, Side::Right) {
                    Ok(m) => m,
                    Err(_) => return unsupported(UnsupportedReason::NoAdmissibleSolution),
                };
                let mut b = subsonic_right_branch(*law, z2);
                b.rho_hi = Some(mirrored.rho);
                (b, SideMode::Mirrored)
            } else {
                match stay_right_branch(*law, z2) {
                    Some(b) => (b, SideMode::StayOnCurve),
                    None => return unsupported(UnsupportedReason::NoAdmissibleSolution),
                }
            }
        }
    };

    let sol = match solve_on_branches(kappa, &left_branch, &right_branch) {
        Ok(s) => s,
        Err(r) => return unsupported(r),
    };
    if left_mode == SideMode::Subsonic {
        if let Err(r) = check_subsonic_constraint(law, sol.rho_star_l, sol.q_star) {
            return unsupported(r);
        }
    }
    if right_mode == SideMode::Subsonic {
        if let Err(r) = check_subsonic_constraint(law, sol.rho_star_r, sol.q_star) {
            return unsupported(r);
        }
    }
    let applicability = if left_mode == SideMode::Subsonic && right_mode == SideMode::Subsonic {
        Applicability::SubsonicOk
    } else {
        Applicability::SupersonicHandled { left: left_mode, right: right_mode }
    };
    RiemannJunctionResult { solution: Some(sol), applicability }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn law2() -> PressureLaw {
        PressureLaw::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn curve_contains_its_defining_state() {
        let law = law2();
        let u = State::new(1.0, 0.0);
        let c = InvariantCurve::from_state(law, Side::Left, u).unwrap();
        assert_relative_eq!(c.eval(1.0), 0.0, epsilon = 1e-14);
        assert_eq!(c.eval(0.0), 0.0);
        let u = State::new(1.7, 0.4);
        let cl = InvariantCurve::from_state(law, Side::Left, u).unwrap();
        let cr = InvariantCurve::from_state(law, Side::Right, u).unwrap();
        assert_relative_eq!(cl.eval(1.7), 0.4, max_relative = 1e-13);
        assert_relative_eq!(cr.eval(1.7), 0.4, max_relative = 1e-13);
    }

    #[test]
    fn curve_maximum_is_at_the_sonic_intersection() {
        // maximum of the left curve sits where c(rho) = (gamma-1)/(gamma+1) z1
        let law = law2();
        let u = State::new(1.2, 0.3);
        let curve = InvariantCurve::from_state(law, Side::Left, u).unwrap();
        let z1 = curve.constant();
        let rho_max = rho_from_sound(&law, (law.gamma() - 1.0) / (law.gamma() + 1.0) * z1);
        let h = 1e-6;
        let slope = (curve.eval(rho_max + h) - curve.eval(rho_max - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-5, "slope at claimed maximum: {slope}");
        // and that point lies on the sonic curve
        let (_, qs_plus) = sonic_curves(&law, rho_max).unwrap();
        assert_relative_eq!(curve.eval(rho_max), qs_plus, max_relative = 1e-9);
    }

    #[test]
    fn intersection_of_symmetric_states() {
        let law = law2();
        let u = State::new(1.0, 0.0);
        let (rho_i, q_i) = intersection_point(&law, u, u).unwrap();
        assert_relative_eq!(rho_i, 1.0, max_relative = 1e-10);
        assert!(q_i.abs() < 1e-9);
    }

    #[test]
    fn intersection_matches_fine_scan() {
        let law = law2();
        let ul = State::new(1.5, 0.5);
        let ur = State::new(1.0, 0.5);
        let (rho_i, q_i) = intersection_point(&law, ul, ur).unwrap();
        // independent fine scan of both curves
        let cl = InvariantCurve::from_state(law, Side::Left, ul).unwrap();
        let cr = InvariantCurve::from_state(law, Side::Right, ur).unwrap();
        let mut best = (f64::MAX, 0.0);
        let mut rho = 1e-6;
        while rho < 5.0 {
            let d = (cl.eval(rho) - cr.eval(rho)).abs();
            if d < best.0 {
                best = (d, rho);
            }
            rho += 1e-6;
        }
        assert!((rho_i - best.1).abs() <= 2e-6, "bisection {rho_i} vs scan {}", best.1);
        assert_relative_eq!(q_i, cl.eval(best.1), epsilon = 1e-4);
        // hand-computed location for this data
        assert!((rho_i - 1.1727).abs() < 2e-3);
        assert!((q_i - 0.8613).abs() < 2e-3);
    }

    #[test]
    fn intersection_requires_curve_ordering() {
        let law = law2();
        // z1(left) < z2(right)
        let ul = State::new(1.0, -3.0);
        let ur = State::new(1.0, 3.0);
        assert_eq!(
            intersection_point(&law, ul, ur),
            Err(UnsupportedReason::IntersectionCondition)
        );
        let law43 = PressureLaw::new(1.0, 4.0).unwrap();
        assert_eq!(
            intersection_point(&law43, State::new(1.0, 0.0), State::new(1.0, 0.0)),
            Err(UnsupportedReason::GammaAboveThree)
        );
    }

    #[test]
    fn subsonic_solve_symmetric_rest() {
        let law = law2();
        let u = State::new(0.9, 0.0);
        for kappa in [0.0, 0.5, 3.0] {
            let sol = subsonic_solve(&law, kappa, u, u).unwrap();
            assert!(sol.q_star.abs() <= 1e-11);
            assert_relative_eq!(sol.rho_star_l, 0.9, max_relative = 1e-10);
            assert_relative_eq!(sol.rho_star_r, 0.9, max_relative = 1e-10);
        }
    }

    #[test]
    fn subsonic_solve_large_kappa_approaches_intersection() {
        let law = law2();
        let ul = State::new(1.5, 0.5);
        let ur = State::new(1.0, 0.5);
        let (rho_i, q_i) = intersection_point(&law, ul, ur).unwrap();
        let sol = subsonic_solve(&law, 1e8, ul, ur).unwrap();
        assert!((sol.q_star - q_i).abs() <= 1e-6, "q* {} vs q_I {q_i}", sol.q_star);
        assert!((sol.rho_star_l - sol.rho_star_r).abs() <= 1e-7);
        assert!((sol.rho_star_l - rho_i).abs() <= 1e-6);
    }

    #[test]
    fn subsonic_solve_on_jtc_fixed_point() {
        // constant subsonic data already satisfying the transmission condition
        let law = law2();
        let sol = subsonic_solve(&law, 1.0, State::new(4.5, 0.5), State::new(4.0, 0.5)).unwrap();
        assert!((sol.q_star - 0.5).abs() <= 1e-10);
        assert!((sol.rho_star_l - 4.5).abs() <= 1e-9);
        assert!((sol.rho_star_r - 4.0).abs() <= 1e-9);
    }

    #[test]
    fn subsonic_solve_satisfies_system_and_constraints() {
        let law = law2();
        let ul = State::new(4.5, 0.5);
        let ur = State::new(4.0, 0.5);
        let kappa = 1.0;
        let sol = subsonic_solve(&law, kappa, ul, ur).unwrap();
        let cl = InvariantCurve::from_state(law, Side::Left, ul).unwrap();
        let cr = InvariantCurve::from_state(law, Side::Right, ur).unwrap();
        assert!((cl.eval(sol.rho_star_l) - sol.q_star).abs() <= 1e-10);
        assert!((cr.eval(sol.rho_star_r) - sol.q_star).abs() <= 1e-10);
        assert!((sol.q_star - kappa * (sol.rho_star_l - sol.rho_star_r)).abs() <= 1e-10);
        for rho in [sol.rho_star_l, sol.rho_star_r] {
            let (qm, qp) = sonic_curves(&law, rho).unwrap();
            assert!(qm < sol.q_star && sol.q_star < qp);
        }
    }

    #[test]
    fn subsonic_solve_rejects_bad_inputs() {
        let law = law2();
        let sub = State::new(1.0, 0.5);
        let sup = State::new(1.0, 2.0);
        assert_eq!(
            subsonic_solve(&law, 1.0, sup, sub),
            Err(UnsupportedReason::InputRegime)
        );
        let law4 = PressureLaw::new(1.0, 3.5).unwrap();
        assert_eq!(
            subsonic_solve(&law4, 1.0, sub, sub),
            Err(UnsupportedReason::GammaAboveThree)
        );
        assert_eq!(
            subsonic_solve(&law, -1.0, sub, sub),
            Err(UnsupportedReason::InvalidParameter)
        );
    }

    #[test]
    fn mirror_left_example() {
        let law = law2();
        let u = State::new(1.0, 2.0);
        let m = supersonic_mirror(&law, u, Side::Left).unwrap();
        assert!((m.rho - 1.602).abs() < 3e-3, "mirror rho {}", m.rho);
        assert_eq!(m.q, 2.0);
        // same invariant, opposite sonic side
        let (z1_u, _) = riemann_invariants(&law, u).unwrap();
        let (z1_m, _) = riemann_invariants(&law, m).unwrap();
        assert_relative_eq!(z1_u, z1_m, max_relative = 1e-10);
        let (mu1, _) = eigenvalues(&law, m).unwrap();
        assert!(mu1 < 0.0);
        // scan oracle: the other root of z1(rho, 2) = z1(u)
        let mut best = (f64::MAX, 0.0);
        let mut rho: f64 = 1.2;
        while rho < 3.0 {
            let d = (2.0 / rho + 2.0 * (2.0 * rho).sqrt() - z1_u).abs();
            if d < best.0 {
                best = (d, rho);
            }
            rho += 1e-6;
        }
        assert!((m.rho - best.1).abs() <= 2e-6);
    }

    #[test]
    fn mirror_is_an_involution() {
        let law = law2();
        let u = State::new(1.0, 2.0);
        let m = supersonic_mirror(&law, u, Side::Left).unwrap();
        let back = supersonic_mirror(&law, m, Side::Left).unwrap();
        assert!((back.rho - u.rho).abs() <= 1e-8);
        // right side
        let u = State::new(0.8, -1.5);
        let m = supersonic_mirror(&law, u, Side::Right).unwrap();
        let (_, mu2) = eigenvalues(&law, m).unwrap();
        assert!(mu2 > 0.0);
        let back = supersonic_mirror(&law, m, Side::Right).unwrap();
        assert!((back.rho - u.rho).abs() <= 1e-8);
    }

    #[test]
    fn mirror_of_sonic_state_is_itself() {
        let law = law2();
        let rho = 1.3;
        let qs = rho * sound_speed(&law, rho).unwrap();
        let u = State::new(rho, qs);
        let m = supersonic_mirror(&law, u, Side::Left).unwrap();
        assert!((m.rho - rho).abs() <= 1e-9);
        assert!(supersonic_mirror(&law, State::new(1.0, -1.0), Side::Left).is_err());
        assert!(supersonic_mirror(&law, State::new(1.0, 1.0), Side::Right).is_err());
    }

    #[test]
    fn dispatch_subsonic_case() {
        let law = law2();
        let res = riemann_junction_solve(&law, 1.0, State::new(0.9, 0.0), State::new(0.9, 0.0));
        assert_eq!(res.applicability, Applicability::SubsonicOk);
        let sol = res.solution.unwrap();
        assert!(sol.q_star.abs() <= 1e-11);
    }

    #[test]
    fn dispatch_right_supersonic_positive_velocity() {
        // constant data supersonic on the right arc with positive velocity:
        // the solver stays on the right invariant curve and the transmission-
        // compatible data is reproduced exactly
        let law = PressureLaw::new(0.01, 2.0).unwrap();
        let ul = State::new(2.5, 0.5);
        let ur = State::new(2.0, 0.5);
        assert_eq!(classify(&law, ul).unwrap(), Regime::Subsonic);
        assert_eq!(classify(&law, ur).unwrap(), Regime::Supersonic);
        let res = riemann_junction_solve(&law, 1.0, ul, ur);
        assert_eq!(
            res.applicability,
            Applicability::SupersonicHandled {
                left: SideMode::Subsonic,
                right: SideMode::StayOnCurve
            }
        );
        let sol = res.solution.unwrap();
        assert!((sol.q_star - 0.5).abs() <= 1e-9, "q* = {}", sol.q_star);
        assert!((sol.rho_star_l - 2.5).abs() <= 1e-8);
        assert!((sol.rho_star_r - 2.0).abs() <= 1e-8);
    }

    #[test]
    fn dispatch_left_supersonic_negative_velocity() {
        // reversed supersonic left state stays on its invariant curve
        let law = law2();
        let ul = State::new(0.1, -0.2);
        let ur = State::new(0.3, -0.2);
        assert_eq!(classify(&law, ul).unwrap(), Regime::Supersonic);
        assert_eq!(classify(&law, ur).unwrap(), Regime::Subsonic);
        let res = riemann_junction_solve(&law, 1.0, ul, ur);
        assert_eq!(
            res.applicability,
            Applicability::SupersonicHandled {
                left: SideMode::StayOnCurve,
                right: SideMode::Subsonic
            }
        );
        let sol = res.solution.unwrap();
        assert!((sol.q_star + 0.2).abs() <= 1e-9, "q* = {}", sol.q_star);
        let (_, mu2) = eigenvalues(&law, State::new(sol.rho_star_l, sol.q_star)).unwrap();
        assert!(mu2 < 0.0);
    }

    #[test]
    fn dispatch_rejects_large_jump_with_large_kappa() {
        // kappa = 100 with the 2.5/0.5 jump drives q far beyond any
        // admissible intersection
        let law = law2();
        let kappa = 100.0;
        let q0 = kappa * (2.5 - 0.5);
        let res = riemann_junction_solve(&law, kappa, State::new(2.5, q0), State::new(0.5, q0));
        assert!(res.solution.is_none());
        assert!(matches!(res.applicability, Applicability::Unsupported(_)));
    }

    #[test]
    fn dispatch_rejects_gamma_above_three() {
        let law = PressureLaw::new(1.0, 4.0).unwrap();
        let res = riemann_junction_solve(&law, 1.0, State::new(1.0, 0.0), State::new(1.0, 0.0));
        assert_eq!(
            res.applicability,
            Applicability::Unsupported(UnsupportedReason::GammaAboveThree)
        );
    }
}
