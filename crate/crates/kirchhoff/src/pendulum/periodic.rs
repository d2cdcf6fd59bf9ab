//! Continuation of the libration `(ξ₁*, η₁*, π, 0)` to `σ > 0` at fixed
//! period by reversible shooting, and its Floquet multipliers.

use serde::{Deserialize, Serialize};

use super::orbit::PendulumOrbit;
use crate::cascade::{StateXiEta, XiEtaSystem};
use crate::error::{Error, Result};
use crate::ode::Dop853;
use crate::scalar::{angle_diff, Real};

pub const SHOOT_TOL: f64 = 1e-13;
const CHECKPOINTS: usize = 64;

/// Couplings for a continuous `σ`, from `α = (σ, 1+σ, 1+2σ, 2+3σ)`; agree
/// with the exact rational values whenever `σ = m/p`.
pub fn coupling<T: Real>(sigma: T) -> XiEtaSystem<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let al = [sigma, one + sigma, one + two * sigma, two + T::lit(3.0) * sigma].map(|a| a * a);
    let diff = al[2] - al[1];
    XiEtaSystem { mu1: diff / (al[1] + al[2] + al[3]), mu2: diff / (al[0] + al[1] + al[2]), lambda: one }
}

/// `ρ(ξ₁, η₁, ξ₂, η₂) = (−ξ₁, η₁, −ξ₂, η₂)`
pub fn involution(x: &StateXiEta<f64>) -> StateXiEta<f64> {
    [-x[0], x[1], -x[2], x[3]]
}

type Var = [f64; 20];

fn var_rhs(sys: &XiEtaSystem<f64>, y: &Var, dy: &mut Var) {
    let x = [y[0], y[1], y[2], y[3]];
    let f = sys.rhs(&x);
    dy[..4].copy_from_slice(&f);
    let j = sys.jacobian(&x);
    for r in 0..4 {
        for c in 0..4 {
            dy[4 + 4 * r + c] = (0..4).map(|k| j[r][k] * y[4 + 4 * k + c]).sum();
        }
    }
}

fn var_init(x: &StateXiEta<f64>) -> Var {
    let mut y = [0.0; 20];
    y[..4].copy_from_slice(x);
    for i in 0..4 {
        y[4 + 5 * i] = 1.0;
    }
    y
}

fn split(y: &Var) -> (StateXiEta<f64>, [[f64; 4]; 4]) {
    let x = [y[0], y[1], y[2], y[3]];
    let m = std::array::from_fn(|r| std::array::from_fn(|c| y[4 + 4 * r + c]));
    (x, m)
}

/// Flow and its derivative over `[0, t]`.
pub fn flow_with_jacobian(sys: &XiEtaSystem<f64>, x: &StateXiEta<f64>, t: f64) -> Result<(StateXiEta<f64>, [[f64; 4]; 4])> {
    let sol = Dop853::new(SHOOT_TOL, SHOOT_TOL).solve(|_, y: &Var, dy| var_rhs(sys, y, dy), 0.0, var_init(x), t)?;
    Ok(split(&sol.y))
}

pub fn flow(sys: &XiEtaSystem<f64>, x: &StateXiEta<f64>, t: f64) -> Result<StateXiEta<f64>> {
    Ok(Dop853::new(SHOOT_TOL, SHOOT_TOL).solve(|_, y: &StateXiEta<f64>, dy| *dy = sys.rhs(y), 0.0, *x, t)?.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Floquet {
    /// Hyperbolic pair `(μ, 1/μ)` from the monodromy reduced to the energy
    /// level modulo the flow direction.
    pub hyperbolic: [f64; 2],
    /// Rayleigh quotients of the monodromy along the flow direction and the
    /// energy gradient; both are `1` exactly for the true orbit.
    pub trivial: [f64; 2],
    pub det: f64,
    /// Unstable and stable directions at the base point, unit length.
    pub unstable: [f64; 4],
    pub stable: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub sigma: f64,
    pub a: f64,
    pub period: f64,
    pub mu1: f64,
    pub mu2: f64,
    /// Symmetric base point `(0, η₁, π, η₂)`.
    pub x0: StateXiEta<f64>,
    pub energy: f64,
    pub newton_history: Vec<f64>,
    pub monodromy: [[f64; 4]; 4],
    pub floquet: Floquet,
    checkpoints: Vec<StateXiEta<f64>>,
}

impl PeriodicOrbit {
    pub fn system(&self) -> XiEtaSystem<f64> {
        XiEtaSystem { mu1: self.mu1, mu2: self.mu2, lambda: 1.0 }
    }

    /// State at any time, integrated from the nearest stored point.
    pub fn eval(&self, t: f64) -> Result<StateXiEta<f64>> {
        let tau = t.rem_euclid(self.period);
        let h = self.period / CHECKPOINTS as f64;
        let i = ((tau / h).round() as usize).min(CHECKPOINTS);
        flow(&self.system(), &self.checkpoints[i], tau - i as f64 * h)
    }

    /// Unit unstable (`stable = false`) or stable direction at phase `t`.
    pub fn direction(&self, t: f64, stable: bool) -> Result<(StateXiEta<f64>, [f64; 4])> {
        let v0 = if stable { self.floquet.stable } else { self.floquet.unstable };
        let (x, m) = flow_with_jacobian(&self.system(), &self.x0, t)?;
        let v = mat_vec(&m, &v0);
        let n = norm(&v);
        Ok((x, v.map(|c| c / n)))
    }

    pub fn diagnostics(&self, samples: usize) -> Result<OrbitDiagnostics> {
        let sys = self.system();
        let orb = PendulumOrbit::<f64>::new(self.a)?;
        let times: Vec<f64> = (0..=samples).map(|i| self.period * i as f64 / samples as f64).collect();
        let tol = Dop853::new(SHOOT_TOL, SHOOT_TOL);
        let (fwd, _) = tol.sample(|_, y: &StateXiEta<f64>, dy| *dy = sys.rhs(y), 0.0, self.x0, &times)?;
        let back: Vec<f64> = times.iter().map(|t| -t).collect();
        let (bwd, _) = tol.sample(|_, y: &StateXiEta<f64>, dy| *dy = sys.rhs(y), 0.0, self.x0, &back)?;
        let mut c0 = 0.0f64;
        let mut c1 = 0.0f64;
        let mut rev = 0.0f64;
        for (i, &t) in times.iter().enumerate() {
            let x = fwd[i];
            let (xs, es) = orb.eval(t);
            let d = [x[0] - xs, x[1] - es, angle_diff(x[2], std::f64::consts::PI), x[3]];
            c0 = c0.max(norm_inf(&d));
            let f = sys.rhs(&x);
            let fs = [es, -xs.sin(), 0.0, 0.0];
            c1 = c1.max(norm_inf(&std::array::from_fn::<f64, 4, _>(|k| f[k] - fs[k])));
            let r = involution(&bwd[i]);
            rev = rev.max(norm_inf(&[r[0] - x[0], r[1] - x[1], angle_diff(r[2], x[2]), r[3] - x[3]]));
        }
        let end = fwd[samples];
        let periodicity = norm_inf(&[end[0] - self.x0[0], end[1] - self.x0[1], angle_diff(end[2], self.x0[2]), end[3] - self.x0[3]]);
        Ok(OrbitDiagnostics { c0_distance: c0, c1_distance: c0.max(c1), reversibility: rev, periodicity })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitDiagnostics {
    /// `sup |𝒫σ − 𝒫|` over one period, `ξ₂` mod `2π`.
    pub c0_distance: f64,
    /// `max(C⁰ distance, sup |𝒫σ' − 𝒫'|)`
    pub c1_distance: f64,
    /// `sup |ρ𝒫σ(−t) − 𝒫σ(t)|`
    pub reversibility: f64,
    pub periodicity: f64,
}

/// Newton shooting on `(η₁(0), η₂(0))` from `(0, η₁, π, η₂)` for
/// `ξ₁(T/2) = 0`, `ξ₂(T/2) = π`, with `T = T_a`.
pub fn continue_periodic_orbit(sigma: f64, a: f64) -> Result<PeriodicOrbit> {
    let sys = coupling(sigma);
    let period = PendulumOrbit::<f64>::new(a)?.period;
    let pi = std::f64::consts::PI;
    let mut eta = [(2.0 * a).sqrt(), 0.0];
    let mut history = Vec::new();
    for _ in 0..30 {
        let x = [0.0, eta[0], pi, eta[1]];
        let (y, m) = flow_with_jacobian(&sys, &x, period / 2.0)?;
        let r = [y[0], y[2] - pi];
        let res = r[0].abs().max(r[1].abs());
        history.push(res);
        if res < 1e-12 {
            break;
        }
        if history.len() > 3 && res > 10.0 * history[0].max(1e-3) {
            return Err(Error::NewtonDiverged { history });
        }
        let j = [[m[0][1], m[0][3]], [m[2][1], m[2][3]]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        eta[0] -= (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        eta[1] -= (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
    }
    if history.last().copied().unwrap_or(f64::INFINITY) >= 1e-12 {
        return Err(Error::NewtonDiverged { history });
    }
    let x0 = [0.0, eta[0], pi, eta[1]];
    let h = period / CHECKPOINTS as f64;
    let times: Vec<f64> = (0..=CHECKPOINTS).map(|i| i as f64 * h).collect();
    let (checkpoints, _) = Dop853::new(SHOOT_TOL, SHOOT_TOL).sample(|_, y: &StateXiEta<f64>, dy| *dy = sys.rhs(y), 0.0, x0, &times)?;
    let (_, monodromy) = flow_with_jacobian(&sys, &x0, period)?;
    let floquet = floquet(&sys, &x0, &monodromy, sigma);
    Ok(PeriodicOrbit {
        sigma,
        a,
        period,
        mu1: sys.mu1,
        mu2: sys.mu2,
        x0,
        energy: sys.energy(&x0, sigma),
        newton_history: history,
        monodromy,
        floquet,
        checkpoints,
    })
}

fn floquet(sys: &XiEtaSystem<f64>, x0: &StateXiEta<f64>, m: &[[f64; 4]; 4], sigma: f64) -> Floquet {
    let f = sys.rhs(x0);
    let g = if sigma > 0.0 {
        energy_gradient(sys, x0, sigma)
    } else {
        // Limit of the scaled gradient as σ → 0, where μ₁/σ → 1/3 and μ₂/σ → 1.
        [x0[0].sin(), x0[1], x0[2].sin() / 3.0, x0[3] / 3.0]
    };
    let fh = unit(&f);
    let gh = unit(&g);
    // Orthonormal completion of {ĝ, f̂}: u₁, u₂ span ker g ⊖ f.
    let mut basis = vec![gh, fh];
    for e in 0..4 {
        let mut v = [0.0; 4];
        v[e] = 1.0;
        for b in &basis {
            let c = dot(&v, b);
            for k in 0..4 {
                v[k] -= c * b[k];
            }
        }
        if norm(&v) > 1e-6 && basis.len() < 4 {
            basis.push(unit(&v));
        }
    }
    let (u1, u2) = (basis[2], basis[3]);
    let mu1v = mat_vec(m, &u1);
    let mu2v = mat_vec(m, &u2);
    let r = [[dot(&u1, &mu1v), dot(&u1, &mu2v)], [dot(&u2, &mu1v), dot(&u2, &mu2v)]];
    let tr = r[0][0] + r[1][1];
    let det = r[0][0] * r[1][1] - r[0][1] * r[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let big = tr / 2.0 + tr.signum() * disc;
    let small = det / big;
    let eig = |lam: f64| -> [f64; 4] {
        // Eigenvector of r, lifted and corrected along f̂.
        let c = if (r[0][1]).abs() > (r[1][0]).abs() { [r[0][1], lam - r[0][0]] } else { [lam - r[1][1], r[1][0]] };
        let v: [f64; 4] = std::array::from_fn(|k| c[0] * u1[k] + c[1] * u2[k]);
        let mv = mat_vec(m, &v);
        let beta = dot(&fh, &mv) / (lam - 1.0);
        let w: [f64; 4] = std::array::from_fn(|k| v[k] + beta * fh[k]);
        let w = unit(&w);
        // Unstable branch oriented to increase η₂, stable to decrease ξ₂.
        let s = if lam.abs() > 1.0 { w[3].signum() } else { -w[2].signum() };
        w.map(|x| x * s)
    };
    let mf = mat_vec(m, &fh);
    let gm: [f64; 4] = std::array::from_fn(|c| (0..4).map(|k| gh[k] * m[k][c]).sum());
    Floquet {
        hyperbolic: [big, small],
        trivial: [dot(&fh, &mf), dot(&gm, &gh)],
        det: det4(m),
        unstable: eig(big),
        stable: eig(small),
    }
}

/// Gradient of the energy returned by [`XiEtaSystem::energy`].
pub fn energy_gradient(sys: &XiEtaSystem<f64>, x: &StateXiEta<f64>, sigma: f64) -> [f64; 4] {
    let s = if sigma > 0.0 { sigma } else { 1.0 };
    [
        sys.mu2 * x[0].sin() / s,
        (sys.mu2 * x[1] - sys.mu1 * sys.mu2 * x[3]) / s,
        sys.mu1 * sys.lambda * x[2].sin() / s,
        (sys.mu1 * x[3] - sys.mu1 * sys.mu2 * x[1]) / s,
    ]
}

pub(crate) fn mat_vec(m: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|r| (0..4).map(|k| m[r][k] * v[k]).sum())
}

pub(crate) fn dot(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..4).map(|k| a[k] * b[k]).sum()
}

pub(crate) fn norm(a: &[f64; 4]) -> f64 {
    dot(a, a).sqrt()
}

fn unit(a: &[f64; 4]) -> [f64; 4] {
    let n = norm(a);
    a.map(|x| x / n)
}

fn norm_inf(a: &[f64; 4]) -> f64 {
    a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for c in 0..4 {
        let p = (c..4).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap_or(c);
        if a[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c];
        for r in c + 1..4 {
            let f = a[r][c] / a[c][c];
            for k in c..4 {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    det
}
