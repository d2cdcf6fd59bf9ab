//! Poincaré section `Π = {ξ₂ ≡ 0 mod 2π, η₂ > 0}` inside an energy level,
//! return maps, symbols and itinerary targeting in extended precision.

use crate::cascade::{h_pendulum, StateXiEta, XiEtaSystem};
use crate::error::Result;
use crate::ode::taylor::sin_cos_jet_step;
use crate::ode::{find_root, Control, JetField, Taylor, TaylorStep, StepView};
use crate::scalar::Real;

impl<T: Real> JetField<T, 4> for XiEtaSystem<T> {
    fn jet(&self, x: &mut [[T; 4]], order: usize) {
        let mut u1 = vec![T::zero(); order + 1];
        let mut u2 = vec![T::zero(); order + 1];
        let mut s1 = vec![T::zero(); order + 1];
        let mut c1 = vec![T::zero(); order + 1];
        let mut s2 = vec![T::zero(); order + 1];
        let mut c2 = vec![T::zero(); order + 1];
        for k in 0..order {
            u1[k] = x[k][0];
            u2[k] = x[k][2];
            sin_cos_jet_step(&u1, &mut s1, &mut c1, k);
            sin_cos_jet_step(&u2, &mut s2, &mut c2, k);
            let d = T::lit((k + 1) as f64);
            x[k + 1] = [
                (x[k][1] - self.mu1 * x[k][3]) / d,
                -s1[k] / d,
                (x[k][3] - self.mu2 * x[k][1]) / d,
                -self.lambda * s2[k] / d,
            ];
        }
    }
}

/// Point of `Π` with the given `(ξ₁, η₁)` on the level `ℰ = energy`;
/// `None` when the level does not reach it.
pub fn lift_to_section<T: Real>(sys: &XiEtaSystem<T>, sigma: T, energy: T, xi1: T, eta1: T) -> Option<StateXiEta<T>> {
    let c = sys.mu2 * h_pendulum(xi1, eta1) - sigma * energy;
    let b = sys.mu2 * eta1;
    let disc = b * b - T::lit(2.0) * c / sys.mu1;
    (disc >= T::zero()).then(|| [xi1, eta1, T::zero(), b + disc.sqrt()])
}

const ETA2_SUBSAMPLES: usize = 16;

/// A crossing of a level set recorded along an orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing<T> {
    pub t: T,
    pub state: StateXiEta<T>,
}

/// Events along a forward orbit: returns to `Π` and crossings of `η₂ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitEvents<T> {
    pub returns: Vec<Crossing<T>>,
    pub up: Vec<T>,
    pub down: Vec<T>,
    /// `(t, η₂)` at every step end, for envelope checks.
    pub eta2: Vec<(f64, f64)>,
    pub t_end: T,
    /// Stopped because `η₂` fell below the guard level.
    pub escaped: bool,
}

/// Orbits with `η₂` below this level have left along the lower separatrix.
pub const ETA2_GUARD: f64 = -0.5;

/// Integrates until `max_returns` returns to `Π` or `t_max`; with `guard`,
/// also stops once `η₂ < ETA2_GUARD`.
pub fn orbit_events<T: Real>(
    sys: &XiEtaSystem<T>,
    x: StateXiEta<T>,
    max_returns: usize,
    t_max: T,
    tol: T,
    keep_eta2: bool,
    guard: bool,
) -> Result<OrbitEvents<T>> {
    let tau = T::TAU();
    let mut ev = OrbitEvents { returns: Vec::new(), up: Vec::new(), down: Vec::new(), eta2: Vec::new(), t_end: T::zero(), escaped: false };
    let t_tol = T::epsilon() * T::lit(64.0);
    let sol = Taylor::new(tol).integrate(sys, T::zero(), x, t_max, |st: &TaylorStep<T, 4>| {
        let (a, b) = (st.y0(), st.y1());
        let na = (a[2] / tau).floor();
        let nb = (b[2] / tau).floor();
        if nb > na && b[3] > T::zero() {
            let level = nb * tau;
            if let Some((t, y)) = find_root(st, |_, y: &StateXiEta<T>| y[2] - level, t_tol) {
                if t > T::zero() {
                    ev.returns.push(Crossing { t, state: y });
                }
            }
        }
        let one = T::one();
        if (a[3] - one) * (b[3] - one) <= T::zero() && a[3] != b[3] {
            if let Some((t, _)) = find_root(st, |_, y: &StateXiEta<T>| y[3] - one, t_tol) {
                if b[3] > a[3] {
                    ev.up.push(t);
                } else {
                    ev.down.push(t);
                }
            }
        }
        if keep_eta2 {
            for i in 1..=ETA2_SUBSAMPLES {
                let t = st.t0() + (st.t1() - st.t0()) * T::lit(i as f64 / ETA2_SUBSAMPLES as f64);
                ev.eta2.push((t.f64(), st.eval(t)[3].f64()));
            }
        }
        if guard && b[3] < T::lit(ETA2_GUARD) {
            ev.escaped = true;
            return Control::Stop;
        }
        if ev.returns.len() >= max_returns {
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    ev.t_end = sol.t;
    Ok(ev)
}

/// First return to `Π`, if it happens before `t_max`.
pub fn poincare_map<T: Real>(sys: &XiEtaSystem<T>, x: StateXiEta<T>, t_max: T, tol: T) -> Result<Option<Crossing<T>>> {
    Ok(orbit_events(sys, x, 1, t_max, tol, false, false)?.returns.first().copied())
}

/// `ωₖ = ⌊(tₖ − tₖ₋₁)/T⌋` with `t₀ = 0`.
pub fn extract_symbols<T: Real>(times: &[T], period: T) -> Vec<i64> {
    let mut prev = T::zero();
    times
        .iter()
        .map(|&t| {
            let w = ((t - prev) / period).floor();
            prev = t;
            w.to_i64().unwrap_or(i64::MAX)
        })
        .collect()
}

/// States at increasing `times` (first entry `0`), integrated by the Taylor method.
pub fn sample_orbit<T: Real>(sys: &XiEtaSystem<T>, x: StateXiEta<T>, times: &[T], tol: T) -> Result<Vec<StateXiEta<T>>> {
    let mut out = Vec::with_capacity(times.len());
    let mut idx = 0;
    while idx < times.len() && times[idx] <= T::zero() {
        out.push(x);
        idx += 1;
    }
    let Some(&t_end) = times.last() else { return Ok(out) };
    let sol = Taylor::new(tol).integrate(sys, T::zero(), x, t_end, |st: &TaylorStep<T, 4>| {
        while idx < times.len() && times[idx] <= st.t1() {
            out.push(st.eval(times[idx]));
            idx += 1;
        }
        Control::Continue
    })?;
    while out.len() < times.len() {
        out.push(sol.y);
    }
    Ok(out)
}
