//! Stable and unstable manifolds of the continued periodic orbit, their
//! splitting measured in `H₁`, and a transversality certificate.

use serde::{Deserialize, Serialize};

use super::melnikov::{melnikov, melnikov_slope0};
use super::orbit::Separatrix;
use super::periodic::{PeriodicOrbit, SHOOT_TOL};
use crate::cascade::{h_pendulum, StateXiEta, XiEtaSystem};
use crate::error::{Error, Result};
use crate::ode::{find_root, Control, Dop853, StepView};

/// Seeding distance from the orbit along the linear directions.
pub const SEED_DISTANCE: f64 = 1e-7;
const FLIGHT_MAX: f64 = 80.0;
const SCAN: usize = 48;

/// First time the orbit of `x` (backward when `backward`) crosses
/// `ξ₂ ≡ c (mod 2π)`.
pub fn hit_xi2(sys: &XiEtaSystem<f64>, x: &StateXiEta<f64>, c: f64, backward: bool, t_max: f64) -> Result<(f64, StateXiEta<f64>)> {
    let g = |_: f64, y: &StateXiEta<f64>| ((y[2] - c) / 2.0).sin();
    let mut hit = None;
    let t_end = if backward { -t_max } else { t_max };
    Dop853::new(SHOOT_TOL, SHOOT_TOL).with_dense().integrate(
        |_, y: &StateXiEta<f64>, dy| *dy = sys.rhs(y),
        0.0,
        *x,
        t_end,
        |st| {
            if let Some(r) = find_root(st, g, 1e-15 * st.t1().abs().max(1.0)) {
                if r.0 != st.t0() || st.t0() != 0.0 {
                    hit = Some(r);
                    return Control::Stop;
                }
            }
            Control::Continue
        },
    )?;
    hit.ok_or(Error::Escape { t: t_end })
}

/// Point of the manifold branch leaving along `η₂ > 0` at which
/// `ξ₁ = 0`, `η₁ > 0`, `ξ₂ ≡ ξ₂*`.
pub fn manifold_point(orbit: &PeriodicOrbit, xi2: f64, stable: bool, delta: f64) -> Result<StateXiEta<f64>> {
    Ok(manifold_point_phase(orbit, xi2, stable, delta)?.1)
}

/// Image on `ξ₂ ≡ ξ₂*` of the seed at phase `theta` of the fundamental domain.
pub fn manifold_trace(orbit: &PeriodicOrbit, theta: f64, xi2: f64, stable: bool, delta: f64) -> Result<StateXiEta<f64>> {
    let (x, v) = orbit.direction(theta, stable)?;
    let seed: StateXiEta<f64> = std::array::from_fn(|k| x[k] + delta * v[k]);
    Ok(hit_xi2(&orbit.system(), &seed, xi2, stable, FLIGHT_MAX)?.1)
}

/// As [`manifold_point`], also returning the seed phase.
pub fn manifold_point_phase(orbit: &PeriodicOrbit, xi2: f64, stable: bool, delta: f64) -> Result<(f64, StateXiEta<f64>)> {
    let at = |theta: f64| manifold_trace(orbit, theta, xi2, stable, delta);
    let t = orbit.period;
    let grid: Vec<f64> = (0..=SCAN).map(|i| t * i as f64 / SCAN as f64).collect();
    let vals = grid.iter().map(|&th| at(th)).collect::<Result<Vec<_>>>()?;
    for i in 0..SCAN {
        let (ya, yb) = (vals[i], vals[i + 1]);
        if ya[0] * yb[0] <= 0.0 && ya[1] + yb[1] > 0.0 && (ya[0] - yb[0]).abs() < 1.0 {
            let (mut lo, mut hi) = (grid[i], grid[i + 1]);
            let (mut flo, mut fhi) = (ya[0], yb[0]);
            let mut best = if flo.abs() < fhi.abs() { (lo, ya) } else { (hi, yb) };
            for _ in 0..100 {
                let mid = if fhi != flo { (lo * fhi - hi * flo) / (fhi - flo) } else { 0.5 * (lo + hi) };
                let mid = if mid > lo && mid < hi { mid } else { 0.5 * (lo + hi) };
                let y = at(mid)?;
                best = (mid, y);
                if y[0].abs() < 1e-14 || hi - lo < 1e-15 {
                    break;
                }
                if y[0].signum() == flo.signum() {
                    lo = mid;
                    flo = y[0];
                    fhi *= 0.5;
                } else {
                    hi = mid;
                    fhi = y[0];
                    flo *= 0.5;
                }
            }
            return Ok(best);
        }
    }
    Err(Error::NoBracket("manifold never meets ξ₁ = 0 with η₁ > 0".into()))
}

/// `H₁(zˢ) − H₁(zᵘ)` on `{ξ₁ = 0, ξ₂ = q_h(τ)}` in the energy level of the orbit.
pub fn manifold_gap(orbit: &PeriodicOrbit, tau: f64, delta: f64) -> Result<f64> {
    let c = Separatrix::q(tau);
    let zs = manifold_point(orbit, c, true, delta)?;
    let zu = manifold_point(orbit, c, false, delta)?;
    Ok(h_pendulum(zs[0], zs[1]) - h_pendulum(zu[0], zu[1]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSample {
    pub tau: f64,
    pub gap: f64,
    pub first_order: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transversality {
    pub sigma: f64,
    pub samples: Vec<GapSample>,
    /// Zero of the gap near `τ = 0`.
    pub tau_star: f64,
    pub slope: f64,
    /// `σℳ'(0)` expressed with the sign of the gap.
    pub first_order_slope: f64,
    /// Gap change between seeding at `δ` and `2δ`, relative.
    pub seed_sensitivity: f64,
}

/// Orientation of the first-order prediction: along the unperturbed
/// homoclinic, `H₁(zˢ) − H₁(zᵘ) = −σ ∫ DH₁·Y dt = −σℳ(τ)`.
pub const GAP_SIGN: f64 = -1.0;

pub fn transversality_check(orbit: &PeriodicOrbit, taus: &[f64]) -> Result<Transversality> {
    let samples = taus
        .iter()
        .map(|&tau| {
            Ok(GapSample {
                tau,
                gap: manifold_gap(orbit, tau, SEED_DISTANCE)?,
                first_order: GAP_SIGN * orbit.sigma * melnikov(tau, orbit.a)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut lo, mut hi) = (-0.5, 0.5);
    let (mut glo, mut ghi) = (manifold_gap(orbit, lo, SEED_DISTANCE)?, manifold_gap(orbit, hi, SEED_DISTANCE)?);
    if glo * ghi > 0.0 {
        return Err(Error::NoBracket("gap keeps its sign on [-0.5, 0.5]".into()));
    }
    for _ in 0..60 {
        let mid = (lo * ghi - hi * glo) / (ghi - glo);
        let g = manifold_gap(orbit, mid, SEED_DISTANCE)?;
        if g.abs() < 1e-13 || hi - lo < 1e-10 {
            lo = mid;
            hi = mid;
            break;
        }
        if g.signum() == glo.signum() {
            lo = mid;
            glo = g;
            ghi *= 0.5;
        } else {
            hi = mid;
            ghi = g;
            glo *= 0.5;
        }
    }
    let tau_star = 0.5 * (lo + hi);
    let h = 1e-3;
    let slope = (manifold_gap(orbit, tau_star + h, SEED_DISTANCE)? - manifold_gap(orbit, tau_star - h, SEED_DISTANCE)?) / (2.0 * h);
    let g1 = manifold_gap(orbit, 0.3, SEED_DISTANCE)?;
    let g2 = manifold_gap(orbit, 0.3, 2.0 * SEED_DISTANCE)?;
    Ok(Transversality {
        sigma: orbit.sigma,
        samples,
        tau_star,
        slope,
        first_order_slope: GAP_SIGN * orbit.sigma * melnikov_slope0(orbit.a)?,
        seed_sensitivity: (g1 - g2).abs() / g1.abs(),
    })
}
