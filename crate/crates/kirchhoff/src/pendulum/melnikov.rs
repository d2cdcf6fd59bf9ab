//! Melnikov function of the coupled pendulums along the separatrix of the
//! second pendulum times a libration of the first.

use serde::{Deserialize, Serialize};

use super::orbit::{PendulumOrbit, Separatrix};
use crate::error::{Error, Result};
use crate::ode::Dop853;

/// Half width of the truncated integration window; the integrands decay
/// like `e^{-|s|}`.
const WINDOW: f64 = 45.0;
const QUAD_TOL: f64 = 1e-13;

/// `∫ₐᵇ f` by integrating `y' = f(s)`.
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    let sol = Dop853::new(QUAD_TOL, 1e-16).solve(|s, _y: &[f64; 1], dy| dy[0] = f(s), a, [0.0], b)?;
    Ok(sol.y[0])
}

/// `ℳ(τ) = −(1/3) ∫ p_h(τ+s) sin ξ₁*(s) ds`
pub fn melnikov(tau: f64, a: f64) -> Result<f64> {
    let orb = PendulumOrbit::new(a)?;
    let v = quad(|s| Separatrix::p(tau + s) * orb.eval(s).0.sin(), -tau - WINDOW, -tau + WINDOW)?;
    Ok(-v / 3.0)
}

/// `J(a) = ∫₀^∞ sin q_h(s) sin ξ₁*(s) ds`
pub fn j_integral(a: f64) -> Result<f64> {
    let orb = PendulumOrbit::new(a)?;
    quad(|s| Separatrix::sin_q(s) * orb.eval(s).0.sin(), 0.0, WINDOW)
}

/// `J* = ∫₀^∞ g(s)² ds` with `g = 2 sinh s / cosh² s`; equals `4/3`.
pub fn j_limit() -> Result<f64> {
    quad(|s| Separatrix::sin_q(s).powi(2), 0.0, WINDOW)
}

/// `ℳ'(0) = (2/3) J(a)`
pub fn melnikov_slope0(a: f64) -> Result<f64> {
    Ok(2.0 / 3.0 * j_integral(a)?)
}

/// Central difference of [`melnikov`], independent of [`j_integral`].
pub fn melnikov_slope_fd(tau: f64, a: f64, h: f64) -> Result<f64> {
    Ok((melnikov(tau + h, a)? - melnikov(tau - h, a)?) / (2.0 * h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct A0Report {
    /// Smallest `a` such that `|J(a') − 4/3| ≤ 2/3` for every `a' ∈ [a, 2)`.
    pub a0: f64,
    pub j_at_a0: f64,
    pub period: f64,
}

/// Scans `a` downward from `2` and refines the first violation by bisection.
pub fn find_a0() -> Result<A0Report> {
    let j_star = 4.0 / 3.0;
    let ok = |a: f64| -> Result<bool> { Ok((j_integral(a)? - j_star).abs() <= j_star / 2.0) };
    let n = 400;
    let grid: Vec<f64> = (1..n).map(|i| 2.0 * (1.0 - i as f64 / n as f64)).collect();
    let mut good = 2.0 - 1e-9;
    if !ok(good)? {
        return Err(Error::NoBracket("J(a) misses the window near a = 2".into()));
    }
    let mut bad = None;
    for &a in &grid {
        if ok(a)? {
            good = a;
        } else {
            bad = Some(a);
            break;
        }
    }
    let mut lo = bad.ok_or_else(|| Error::NoBracket("window holds on the whole scan".into()))?;
    let mut hi = good;
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let orb = PendulumOrbit::new(hi)?;
    Ok(A0Report { a0: hi, j_at_a0: j_integral(hi)?, period: orb.period })
}
