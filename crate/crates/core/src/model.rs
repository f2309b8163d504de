//! Pointwise gas algebra: pressure law, wave speeds, Riemann invariants,
//! Maxwellian decomposition, entropy pair and flow-regime classification.
//!
//! Everything here is a pure function of value types, so states and laws can
//! be shared freely across threads.

use crate::error::{Error, Result};

/// Isentropic pressure law `p(rho) = p0 * rho^gamma` with `p0 > 0`, `gamma > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureLaw {
    p0: f64,
    gamma: f64,
}

impl PressureLaw {
    pub fn new(p0: f64, gamma: f64) -> Result<Self> {
        if !p0.is_finite() || p0 <= 0.0 {
            return Err(Error::domain("pressure coefficient p0 must be positive", p0));
        }
        if !gamma.is_finite() || gamma <= 1.0 {
            return Err(Error::domain("adiabatic exponent gamma must exceed 1", gamma));
        }
        Ok(Self { p0, gamma })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `alpha_gamma = 2/(gamma-1)`, the Riemann-invariant coefficient.
    pub fn alpha(&self) -> f64 {
        2.0 / (self.gamma - 1.0)
    }
}

/// Cell-averaged conserved pair: density and momentum `q = rho * u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub rho: f64,
    pub q: f64,
}

impl State {
    pub fn new(rho: f64, q: f64) -> Self {
        Self { rho, q }
    }

    pub fn is_vacuum(&self) -> bool {
        self.rho == 0.0 && self.q == 0.0
    }

    /// Velocity `u = q/rho`; only meaningful for `rho > 0`.
    pub fn velocity(&self) -> f64 {
        self.q / self.rho
    }
}

/// Flow regime of a state relative to the sonic curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Subsonic,
    Sonic,
    Supersonic,
}

/// `p(rho) = p0 * rho^gamma`.
pub fn pressure(law: &PressureLaw, rho: f64) -> Result<f64> {
    if rho < 0.0 || !rho.is_finite() {
        return Err(Error::domain("pressure requires rho >= 0", rho));
    }
    // gamma = 2 dominates the paper's runs; skip powf there.
    if law.gamma == 2.0 {
        Ok(law.p0 * rho * rho)
    } else {
        Ok(law.p0 * rho.powf(law.gamma))
    }
}

/// Sound speed `c(rho) = sqrt(p'(rho)) = sqrt(p0 * gamma * rho^(gamma-1))`.
pub fn sound_speed(law: &PressureLaw, rho: f64) -> Result<f64> {
    if rho <= 0.0 || !rho.is_finite() {
        return Err(Error::domain("sound speed requires rho > 0", rho));
    }
    if law.gamma == 2.0 {
        Ok((2.0 * law.p0 * rho).sqrt())
    } else {
        Ok((law.p0 * law.gamma * rho.powf(law.gamma - 1.0)).sqrt())
    }
}

/// Eigenvalues `(u - c, u + c)` of the flux Jacobian.
pub fn eigenvalues(law: &PressureLaw, u: State) -> Result<(f64, f64)> {
    let c = sound_speed(law, u.rho)?;
    let v = u.velocity();
    Ok((v - c, v + c))
}

/// Physical flux `F(U) = (q, q^2/rho + p(rho))`. Vacuum `(0, 0)` maps to `(0, 0)`.
pub fn physical_flux(law: &PressureLaw, u: State) -> Result<(f64, f64)> {
    if u.rho == 0.0 {
        if u.q == 0.0 {
            return Ok((0.0, 0.0));
        }
        return Err(Error::VacuumMomentum { q: u.q });
    }
    if u.rho < 0.0 || !u.rho.is_finite() {
        return Err(Error::domain("flux requires rho >= 0", u.rho));
    }
    let p = pressure(law, u.rho)?;
    Ok((u.q, u.q * u.q / u.rho + p))
}

/// Symmetric-speed Maxwellians `M1 = (U - F(U)/lambda)/2`, `M2 = (U + F(U)/lambda)/2`.
///
/// They satisfy `M1 + M2 = U` and `lambda (M2 - M1) = F(U)` exactly up to
/// round-off.
pub fn maxwellians(law: &PressureLaw, u: State, lambda: f64) -> Result<(State, State)> {
    if lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::domain("maxwellians require lambda > 0", lambda));
    }
    let (f_rho, f_q) = physical_flux(law, u)?;
    let m1 = State::new(0.5 * (u.rho - f_rho / lambda), 0.5 * (u.q - f_q / lambda));
    let m2 = State::new(0.5 * (u.rho + f_rho / lambda), 0.5 * (u.q + f_q / lambda));
    Ok((m1, m2))
}

/// Riemann invariants `z1 = u + alpha*c`, `z2 = u - alpha*c`.
pub fn riemann_invariants(law: &PressureLaw, u: State) -> Result<(f64, f64)> {
    let c = sound_speed(law, u.rho)?;
    let v = u.velocity();
    let a = law.alpha();
    Ok((v + a * c, v - a * c))
}

/// Sonic curves `(q_s^-(rho), q_s^+(rho)) = (-rho*c(rho), rho*c(rho))`.
pub fn sonic_curves(law: &PressureLaw, rho: f64) -> Result<(f64, f64)> {
    if rho < 0.0 || !rho.is_finite() {
        return Err(Error::domain("sonic curves require rho >= 0", rho));
    }
    if rho == 0.0 {
        return Ok((0.0, 0.0));
    }
    let qc = rho * sound_speed(law, rho)?;
    Ok((-qc, qc))
}

/// Classify a state as subsonic, sonic or supersonic.
pub fn classify(law: &PressureLaw, u: State) -> Result<Regime> {
    if u.rho <= 0.0 {
        return Err(Error::domain("classification requires rho > 0", u.rho));
    }
    let (qs_minus, qs_plus) = sonic_curves(law, u.rho)?;
    if u.q == qs_plus || u.q == qs_minus {
        Ok(Regime::Sonic)
    } else if qs_minus < u.q && u.q < qs_plus {
        Ok(Regime::Subsonic)
    } else {
        Ok(Regime::Supersonic)
    }
}

/// Entropy `eta = q^2/(2 rho) + p0/(gamma-1) rho^gamma`; zero for vacuum.
pub fn entropy(law: &PressureLaw, u: State) -> Result<f64> {
    if u.rho == 0.0 {
        if u.q == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::VacuumMomentum { q: u.q });
    }
    if u.rho < 0.0 || !u.rho.is_finite() {
        return Err(Error::domain("entropy requires rho >= 0", u.rho));
    }
    let rho_pow = if law.gamma == 2.0 {
        u.rho * u.rho
    } else {
        u.rho.powf(law.gamma)
    };
    Ok(0.5 * u.q * u.q / u.rho + law.p0 / (law.gamma - 1.0) * rho_pow)
}

/// Entropy flux `G = q^3/(2 rho^2) + p0*gamma/(gamma-1) rho^(gamma-1) q`.
pub fn entropy_flux(law: &PressureLaw, u: State) -> Result<f64> {
    if u.rho == 0.0 {
        if u.q == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::VacuumMomentum { q: u.q });
    }
    if u.rho < 0.0 || !u.rho.is_finite() {
        return Err(Error::domain("entropy flux requires rho >= 0", u.rho));
    }
    let rho_pow = if law.gamma == 2.0 {
        u.rho
    } else {
        u.rho.powf(law.gamma - 1.0)
    };
    Ok(0.5 * u.q * u.q * u.q / (u.rho * u.rho)
        + law.p0 * law.gamma / (law.gamma - 1.0) * rho_pow * u.q)
}
