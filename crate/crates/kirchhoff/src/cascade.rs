//! The truncated effective system with two triplets and its chain of charts
//!
//! ```text
//! (S₁..S₄, φ₁₂₃, φ₂₃₄) → (S₃, S₄, φ₁₂₃, φ₂₃₄) → (x, y) → (x, ỹ = y − q) → (ξ, η)
//! ```
//!
//! States are plain arrays; the order of components is given on each alias.

use serde::{Deserialize, Serialize};

use crate::config::TripletConfig;
use crate::error::{Error, Result};
use crate::ode::{Dop853, Stats};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// `[S₁, S₂, S₃, S₄, φ₁₂₃, φ₂₃₄]`
pub type State6<T> = [T; 6];
/// `[S₃, S₄, φ₁₂₃, φ₂₃₄]`
pub type State4<T> = [T; 4];
/// `[x₁, x₂, y₁, y₂]`
pub type StateXY<T> = [T; 4];
/// `[x₁, x₂, ỹ₁, ỹ₂]`
pub type StateTilde<T> = [T; 4];
/// `[ξ₁, η₁, ξ₂, η₂]`
pub type StateXiEta<T> = [T; 4];
/// `[S₁, S₂, S₃, S₄, Re Z₁₂₃, Im Z₁₂₃, Re Z₂₃₄, Im Z₂₃₄]`
pub type StateSZ<T> = [T; 8];

/// Integer data of the frequency configuration as reals.
#[derive(Debug, Clone, Copy)]
pub struct Weights<T> {
    pub al: [T; 4],
    pub sq: [T; 4],
    pub s123: T,
    pub s234: T,
    /// `α₃² − α₂²`
    pub diff: T,
    pub det: T,
}

impl<T: Real> Weights<T> {
    pub fn new(cfg: &TripletConfig) -> Self {
        let al = cfg.alphas_real::<T>();
        Self {
            al,
            sq: al.map(|a| a * a),
            s123: T::lit(cfg.sum123() as f64),
            s234: T::lit(cfg.sum234() as f64),
            diff: T::lit((cfg.alphas[2].pow(2) - cfg.alphas[1].pow(2)) as f64),
            det: T::lit(cfg.det_a as f64),
        }
    }

    /// `A⁻¹ b`
    pub fn solve_a(&self, b: [T; 2]) -> [T; 2] {
        [(self.s234 * b[0] + self.diff * b[1]) / self.det, (self.diff * b[0] + self.s123 * b[1]) / self.det]
    }

    /// `A y`
    pub fn apply_a(&self, y: [T; 2]) -> [T; 2] {
        [self.s123 * y[0] - self.diff * y[1], -self.diff * y[0] + self.s234 * y[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct EffConstants<T> {
    pub c123: T,
    pub c234: T,
    pub rho123: T,
    pub rho234: T,
    pub e1: T,
    pub e2: T,
    pub b1: T,
    pub b2: T,
    pub q1: T,
    pub q2: T,
    #[serde(rename = "A1")]
    pub a1: T,
    #[serde(rename = "A2")]
    pub a2: T,
    #[serde(rename = "B")]
    pub b: T,
    pub lambda: T,
    pub mu1: T,
    pub mu2: T,
    pub gamma: T,
}

impl<T: Real> EffConstants<T> {
    /// Everything from the couplings and the two first integrals.
    pub fn new(cfg: &TripletConfig, c123: T, c234: T, e1: T, e2: T) -> Self {
        let w = Weights::<T>::new(cfg);
        let b1 = w.sq[0] * e1 + w.sq[1] * e2;
        let b2 = w.sq[1] * e2;
        let [q1, q2] = w.solve_a([b1, b2]);
        let half = T::lit(0.5);
        let a1 = (T::lit(2.0) * c123 / w.s123).sqrt();
        let bb = (c123 * w.s123 * half).sqrt();
        let gamma = cfg.gamma_real::<T>();
        let k123 = T::lit(3.0 / 8.0) * w.al[0] * w.al[1] * w.al[2];
        let k234 = T::lit(3.0 / 8.0) * w.al[1] * w.al[2] * w.al[3];
        Self {
            c123,
            c234,
            rho123: c123 / k123,
            rho234: c234 / k234,
            e1,
            e2,
            b1,
            b2,
            q1,
            q2,
            a1,
            a2: T::lit(2.0) * bb / w.s234,
            b: bb,
            lambda: if c123 > T::zero() { c234 * gamma / c123 } else { T::zero() },
            mu1: cfg.mu1_real(),
            mu2: cfg.mu2_real(),
            gamma,
        }
    }

    /// Constants from `(ρ₁₂₃, ρ₂₃₄)` and a 6-state.
    pub fn from_state(cfg: &TripletConfig, rho123: T, rho234: T, s: &State6<T>) -> Self {
        let w = Weights::<T>::new(cfg);
        let k = T::lit(3.0 / 8.0);
        let c123 = k * rho123 * w.al[0] * w.al[1] * w.al[2];
        let c234 = k * rho234 * w.al[1] * w.al[2] * w.al[3];
        let (e1, e2) = first_integrals(s);
        Self::new(cfg, c123, c234, e1, e2)
    }

    /// `(E₁, E₂)` recovered from `b`.
    pub fn e_from_b(cfg: &TripletConfig, b1: T, b2: T) -> (T, T) {
        let w = Weights::<T>::new(cfg);
        ((b1 - b2) / w.sq[0], b2 / w.sq[1])
    }

    pub fn check(&self, cfg: &TripletConfig, rel: T) -> Result<()> {
        let w = Weights::<T>::new(cfg);
        let close = |a: T, b: T| (a - b).abs() <= rel * a.abs().max(b.abs()).max(T::min_positive_value());
        let ok = close(self.a1, self.a2 * self.gamma)
            && close(self.b, (w.s123 * self.c123 * T::lit(0.5)).sqrt())
            && close(self.c123, T::lit(3.0 / 8.0) * self.rho123 * w.al[0] * w.al[1] * w.al[2])
            && {
                let [b1, b2] = w.apply_a([self.q1, self.q2]);
                close(b1, self.b1) && close(b2, self.b2)
            };
        if ok {
            Ok(())
        } else {
            Err(Error::Config("effective constants are inconsistent".into()))
        }
    }
}

/// `(E₁, E₂) = (S₁+S₃+S₄, S₂+S₃+2S₄)`
pub fn first_integrals<T: Real>(s: &State6<T>) -> (T, T) {
    (s[0] + s[2] + s[3], s[1] + s[2] + s[3] + s[3])
}

/// `Σ αₙ Sₙ`
pub fn half_norm<T: Real>(cfg: &TripletConfig, s: &[T]) -> T {
    let al = cfg.alphas_real::<T>();
    (0..4).map(|n| al[n] * s[n]).sum()
}

pub fn rhs6<T: Real>(cfg: &TripletConfig, k: &EffConstants<T>, s: &State6<T>) -> State6<T> {
    let w = Weights::<T>::new(cfg);
    let a = k.c123 * s[4].sin();
    let b = k.c234 * s[5].sin();
    let half = T::lit(0.5);
    [
        a,
        a + b,
        b - a,
        -b,
        -half * (w.sq[0] * s[0] + w.sq[1] * s[1] - w.sq[2] * s[2]),
        -half * (w.sq[1] * s[1] + w.sq[2] * s[2] - w.sq[3] * s[3]),
    ]
}

/// Superactions with the two triple products as unknowns; `|Z|` is a first
/// integral here rather than a built-in constant.
pub fn rhs_sz<T: Real>(cfg: &TripletConfig, s: &StateSZ<T>) -> StateSZ<T> {
    let w = Weights::<T>::new(cfg);
    let k = T::lit(3.0 / 8.0);
    let th123 = s[5] * w.al[0] * w.al[1] * w.al[2];
    let th234 = s[7] * w.al[1] * w.al[2] * w.al[3];
    let half = T::lit(0.5);
    let om123 = w.sq[0] * s[0] + w.sq[1] * s[1] - w.sq[2] * s[2];
    let om234 = w.sq[1] * s[1] + w.sq[2] * s[2] - w.sq[3] * s[3];
    [
        k * th123,
        k * (th123 + th234),
        k * (th234 - th123),
        -k * th234,
        half * om123 * s[5],
        -half * om123 * s[4],
        half * om234 * s[7],
        -half * om234 * s[6],
    ]
}

pub fn rhs4<T: Real>(cfg: &TripletConfig, k: &EffConstants<T>, s: &State4<T>) -> State4<T> {
    let w = Weights::<T>::new(cfg);
    let a = k.c123 * s[2].sin();
    let b = k.c234 * s[3].sin();
    let half = T::lit(0.5);
    [
        b - a,
        -b,
        -half * k.b1 + half * w.s123 * s[0] + half * (w.sq[0] + T::lit(2.0) * w.sq[1]) * s[1],
        -half * k.b2 - half * w.diff * s[0] + half * (T::lit(2.0) * w.sq[1] + w.sq[3]) * s[1],
    ]
}

pub fn rhs_xy<T: Real>(cfg: &TripletConfig, k: &EffConstants<T>, s: &StateXY<T>) -> StateXY<T> {
    let w = Weights::<T>::new(cfg);
    let half = T::lit(0.5);
    let ay = w.apply_a([s[2], s[3]]);
    [-half * k.b1 + half * ay[0], -half * k.b2 + half * ay[1], -k.c123 * s[0].sin(), -k.c234 * s[1].sin()]
}

/// `H = −c₁₂₃ cos x₁ − c₂₃₄ cos x₂ − ½ b·y + ¼ Ay·y`
pub fn hamiltonian_xy<T: Real>(cfg: &TripletConfig, k: &EffConstants<T>, s: &StateXY<T>) -> T {
    let w = Weights::<T>::new(cfg);
    let ay = w.apply_a([s[2], s[3]]);
    -k.c123 * s[0].cos() - k.c234 * s[1].cos() - T::lit(0.5) * (k.b1 * s[2] + k.b2 * s[3])
        + T::lit(0.25) * (ay[0] * s[2] + ay[1] * s[3])
}

pub fn rhs_tilde<T: Real>(cfg: &TripletConfig, k: &EffConstants<T>, s: &StateTilde<T>) -> StateTilde<T> {
    let w = Weights::<T>::new(cfg);
    let half = T::lit(0.5);
    let ay = w.apply_a([s[2], s[3]]);
    [half * ay[0], half * ay[1], -k.c123 * s[0].sin(), -k.c234 * s[1].sin()]
}

/// `H̃ = −c₁₂₃ cos x₁ − c₂₃₄ cos x₂ + ¼ Aỹ·ỹ`
pub fn hamiltonian_tilde<T: Real>(cfg: &TripletConfig, k: &EffConstants<T>, s: &StateTilde<T>) -> T {
    let w = Weights::<T>::new(cfg);
    let ay = w.apply_a([s[2], s[3]]);
    -k.c123 * s[0].cos() - k.c234 * s[1].cos() + T::lit(0.25) * (ay[0] * s[2] + ay[1] * s[3])
}

/// Coupled pendulums in `(ξ, η)`, with general `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiEtaSystem<T> {
    pub mu1: T,
    pub mu2: T,
    pub lambda: T,
}

impl<T: Real> XiEtaSystem<T> {
    pub fn new(cfg: &TripletConfig) -> Self {
        Self { mu1: cfg.mu1_real(), mu2: cfg.mu2_real(), lambda: T::one() }
    }

    /// `μ₁ = σ(1/3 + μ̃₁)`, `μ₂ = σ(1 + μ̃₂)` with the correction terms of a
    /// configuration but an arbitrary `σ`; `σ = 0` decouples.
    pub fn from_sigma(sigma: T, tilde_mu1: T, tilde_mu2: T) -> Self {
        Self { mu1: sigma * (T::lit(1.0 / 3.0) + tilde_mu1), mu2: sigma * (T::one() + tilde_mu2), lambda: T::one() }
    }

    /// Leading-order coupling `μ₁ = σ/3`, `μ₂ = σ`.
    pub fn leading(sigma: T) -> Self {
        Self::from_sigma(sigma, T::zero(), T::zero())
    }

    #[inline]
    pub fn rhs(&self, s: &StateXiEta<T>) -> StateXiEta<T> {
        [s[1] - self.mu1 * s[3], -s[0].sin(), s[3] - self.mu2 * s[1], -self.lambda * s[2].sin()]
    }

    /// Jacobian of [`Self::rhs`].
    pub fn jacobian(&self, s: &StateXiEta<T>) -> [[T; 4]; 4] {
        let (o, z) = (T::one(), T::zero());
        [
            [z, o, z, -self.mu1],
            [-s[0].cos(), z, z, z],
            [z, -self.mu2, z, o],
            [z, z, -self.lambda * s[2].cos(), z],
        ]
    }

    /// First integral `μ₂H₁ + μ₁H₂ − μ₁μ₂η₁η₂`, divided by `σ` when `sigma > 0`.
    ///
    /// `H₂` carries the factor `λ` on its potential.
    pub fn energy(&self, s: &StateXiEta<T>, sigma: T) -> T {
        let e = self.mu2 * h_pendulum(s[0], s[1])
            + self.mu1 * (T::lit(0.5) * s[3] * s[3] + self.lambda * (T::one() - s[2].cos()))
            - self.mu1 * self.mu2 * s[1] * s[3];
        if sigma > T::zero() {
            e / sigma
        } else {
            e
        }
    }
}

/// `½η² + 1 − cos ξ`
#[inline]
pub fn h_pendulum<T: Real>(xi: T, eta: T) -> T {
    T::lit(0.5) * eta * eta + (T::one() - xi.cos())
}

/// The conserved quantity of the normalized system divided by `σ`:
/// `(1+μ̃₂)H₁ + (1/3+μ̃₁)H₂ − σ(1/3+μ̃₁)(1+μ̃₂)η₁η₂`.
pub fn conserved_e<T: Real>(cfg: &TripletConfig, s: &StateXiEta<T>) -> T {
    XiEtaSystem::<T>::new(cfg).energy(s, cfg.sigma_real())
}

pub fn rhs_xieta<T: Real>(cfg: &TripletConfig, s: &StateXiEta<T>) -> StateXiEta<T> {
    XiEtaSystem::<T>::new(cfg).rhs(s)
}

pub fn reduce6to4<T: Real>(s: &State6<T>) -> State4<T> {
    [s[2], s[3], s[4], s[5]]
}

pub fn lift4to6<T: Real>(k: &EffConstants<T>, s: &State4<T>) -> State6<T> {
    [k.e1 - s[0] - s[1], k.e2 - s[0] - s[1] - s[1], s[0], s[1], s[2], s[3]]
}

pub fn map4_to_xy<T: Real>(s: &State4<T>) -> StateXY<T> {
    [s[2], s[3], s[0] + s[1], s[1]]
}

pub fn map_xy_to4<T: Real>(s: &StateXY<T>) -> State4<T> {
    [s[2] - s[3], s[3], s[0], s[1]]
}

pub fn translate<T: Real>(k: &EffConstants<T>, s: &StateXY<T>) -> StateTilde<T> {
    [s[0], s[1], s[2] - k.q1, s[3] - k.q2]
}

pub fn untranslate<T: Real>(k: &EffConstants<T>, s: &StateTilde<T>) -> StateXY<T> {
    [s[0], s[1], s[2] + k.q1, s[3] + k.q2]
}

/// Pointwise part of the rescaling; time maps as `s = B t`.
pub fn rescale<T: Real>(k: &EffConstants<T>, s: &StateTilde<T>) -> Result<StateXiEta<T>> {
    if !(k.c123 > T::zero()) {
        return Err(Error::Domain("rescaling needs c123 > 0".into()));
    }
    Ok([s[0], s[2] / k.a1, s[1], s[3] / k.a2])
}

pub fn unrescale<T: Real>(k: &EffConstants<T>, s: &StateXiEta<T>) -> StateTilde<T> {
    [s[0], s[2], s[1] * k.a1, s[3] * k.a2]
}

/// `(ξ, η)` to the 6-state, through every chart.
pub fn xieta_to6<T: Real>(k: &EffConstants<T>, s: &StateXiEta<T>) -> State6<T> {
    lift4to6(k, &map_xy_to4(&untranslate(k, &unrescale(k, s))))
}

pub fn six_to_xieta<T: Real>(k: &EffConstants<T>, s: &State6<T>) -> Result<StateXiEta<T>> {
    rescale(k, &translate(k, &map4_to_xy(&reduce6to4(s))))
}

/// Result of an effective run with the positivity monitor.
#[derive(Debug, Clone)]
pub struct EffectiveRun {
    pub traj: Trajectory<State6<f64>>,
    /// First accepted step on which some `Sₙ ≤ 0`.
    pub first_nonpositive: Option<f64>,
    /// Smallest superaction seen on accepted steps.
    pub min_s: f64,
}

pub fn integrate6(cfg: &TripletConfig, k: &EffConstants<f64>, init: &State6<f64>, times: &[f64], tol: f64) -> Result<EffectiveRun> {
    let solver = Dop853::new(tol, tol * 1e-3).with_dense();
    let mut out = Vec::with_capacity(times.len());
    let mut idx = 0;
    while idx < times.len() && times[idx] == 0.0 {
        out.push(*init);
        idx += 1;
    }
    let mut first_nonpositive = None;
    let mut min_s = init[..4].iter().copied().fold(f64::INFINITY, f64::min);
    let t_end = times.last().copied().unwrap_or(0.0);
    let sol = solver.integrate(
        |_t, y: &[f64; 6], dy: &mut [f64; 6]| *dy = rhs6(cfg, k, y),
        0.0,
        *init,
        t_end,
        |st| {
            use crate::ode::StepView;
            let y1 = st.y1();
            let m = y1[..4].iter().copied().fold(f64::INFINITY, f64::min);
            min_s = min_s.min(m);
            if m <= 0.0 && first_nonpositive.is_none() {
                first_nonpositive = Some(st.t1());
            }
            while idx < times.len() && times[idx] <= st.t1() {
                out.push(st.eval(times[idx]));
                idx += 1;
            }
            crate::ode::Control::Continue
        },
    )?;
    while out.len() < times.len() {
        out.push(sol.y);
    }
    let mut traj = Trajectory::new().with_meta("chart", "state6");
    traj.stats = sol.stats;
    for (t, s) in times.iter().zip(out) {
        traj.push(*t, s);
    }
    Ok(EffectiveRun { traj, first_nonpositive, min_s })
}

/// Samples `(ξ, η)` at rescaled times.
pub fn integrate_xieta(sys: XiEtaSystem<f64>, init: &StateXiEta<f64>, times: &[f64], tol: f64) -> Result<(Vec<StateXiEta<f64>>, Stats)> {
    Dop853::new(tol, tol * 1e-3).sample(|_t, y: &[f64; 4], dy: &mut [f64; 4]| *dy = sys.rhs(y), times.first().copied().unwrap_or(0.0), *init, times)
}

/// Maps a `(ξ, η)` trajectory in rescaled time `s` to the 6-state in time `t = s/B`.
pub fn compose_chain(xi_eta: &Trajectory<StateXiEta<f64>>, k: &EffConstants<f64>) -> Trajectory<State6<f64>> {
    let mut out = Trajectory::new().with_meta("chart", "state6");
    out.stats = xi_eta.stats;
    out.meta.extend(xi_eta.meta.clone());
    out.meta.insert("chart".into(), "state6".into());
    for (s, st) in xi_eta.iter() {
        out.push(s / k.b, xieta_to6(k, st));
    }
    out
}

/// `Sₙ = ε² sₙ + ε³(…)` with `(A₁, A₂, B) = ε³(a₁, a₂, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowForm {
    pub s: [f64; 4],
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
}

impl SlowForm {
    pub fn new(k: &EffConstants<f64>, eps: f64) -> Self {
        let e2 = eps * eps;
        let e3 = e2 * eps;
        let c = xieta_to6(k, &[0.0, 0.0, 0.0, 0.0]);
        Self { s: [c[0] / e2, c[1] / e2, c[2] / e2, c[3] / e2], a1: k.a1 / e3, a2: k.a2 / e3, b: k.b / e3 }
    }

    /// Superactions at time `t` for a given `(η₁, η₂)` at `s = b ε³ t`.
    pub fn superactions(&self, eps: f64, eta1: f64, eta2: f64) -> [f64; 4] {
        let e2 = eps * eps;
        let e3 = e2 * eps;
        [
            e2 * self.s[0] - e3 * self.a1 * eta1,
            e2 * self.s[1] - e3 * (self.a1 * eta1 + self.a2 * eta2),
            e2 * self.s[2] + e3 * (self.a1 * eta1 - self.a2 * eta2),
            e2 * self.s[3] + e3 * self.a2 * eta2,
        ]
    }
}
