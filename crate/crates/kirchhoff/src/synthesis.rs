//! Constants and an explicit trigonometric-polynomial initial datum that
//! realize a prescribed effective orbit.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::cascade::{xieta_to6, EffConstants, SlowForm, State6, StateXiEta, Weights};
use crate::config::TripletConfig;
use crate::error::{Error, Result};
use crate::field::{Flavor, SpectralField};
use crate::scalar::{angle_diff, wrap_angle};

/// Relative slack used when a threshold is met with equality by construction.
const EQ_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    /// `A₁ ≤ q₂/9`
    pub a1_vs_q2: bool,
    /// `A₁ ≤ (3α₁³/(32 Σ₁₂₃))^{1/2} q₂^{3/2}`
    pub a1_vs_q2_32: bool,
    /// `8 α₄^{2m₁} q₂ ≤ δ₁²`
    pub q2_small: bool,
}

impl Admissibility {
    pub fn all(&self) -> bool {
        self.a1_vs_q2 && self.a1_vs_q2_32 && self.q2_small
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisPlan {
    pub config: TripletConfig,
    pub eps: f64,
    pub q1: f64,
    pub q2: f64,
    pub consts: EffConstants<f64>,
    pub eps0: f64,
    pub flags: Admissibility,
    pub slow: SlowForm,
    /// `7α₄²/3`
    pub c1: f64,
    /// `2α₂α₃a₂`
    pub r1: f64,
    /// `√(2c₁)`: leading coefficient of the norm `𝒩 ≈ εc₀ + ε²r₀η₂/2`.
    pub c0: f64,
    /// `√2 r₁/√c₁`
    pub r0: f64,
}

/// `(3α₁³/(32 Σ₁₂₃))^{1/2}`
pub fn a1_coefficient(cfg: &TripletConfig) -> f64 {
    let a1 = cfg.alphas[0] as f64;
    (3.0 * a1.powi(3) / (32.0 * cfg.sum123() as f64)).sqrt()
}

pub fn eps0(cfg: &TripletConfig) -> f64 {
    let a1 = cfg.alphas[0] as f64;
    let second = (32.0 / 3.0 * cfg.sum123() as f64 / a1.powi(3)).sqrt() / 9.0;
    let third = cfg.delta1 / (8f64.sqrt() * (cfg.alphas[3] as f64).powi(cfg.m1 as i32));
    1f64.min(second).min(third)
}

pub fn make_plan(cfg: &TripletConfig, eps: f64) -> Result<SynthesisPlan> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    let w = Weights::<f64>::new(cfg);
    let q2 = eps * eps;
    let r = w.sq[3] / w.sq[2];
    let q1 = (1.0 + 2.0 * r / 3.0) * q2;
    let a1c = a1_coefficient(cfg);
    let big_a1 = a1c * eps.powi(3);
    let c123 = w.s123 * big_a1 * big_a1 / 2.0;
    let c234 = c123 / cfg.gamma_real::<f64>();
    let [b1, b2] = w.apply_a([q1, q2]);
    let (e1, e2) = EffConstants::<f64>::e_from_b(cfg, b1, b2);
    let consts = EffConstants::new(cfg, c123, c234, e1, e2);
    let flags = Admissibility {
        a1_vs_q2: big_a1 <= q2 / 9.0,
        a1_vs_q2_32: big_a1 <= a1c * q2.powf(1.5) * (1.0 + EQ_SLACK),
        q2_small: 8.0 * (w.al[3]).powi(2 * cfg.m1 as i32) * q2 <= cfg.delta1 * cfg.delta1,
    };
    let slow = SlowForm::new(&consts, eps);
    let c1 = 7.0 * w.sq[3] / 3.0;
    let r1 = 2.0 * w.al[1] * w.al[2] * slow.a2;
    Ok(SynthesisPlan {
        config: cfg.clone(),
        eps,
        q1,
        q2,
        consts,
        eps0: eps0(cfg),
        flags,
        slow,
        c1,
        r1,
        c0: (2.0 * c1).sqrt(),
        r0: 2f64.sqrt() * r1 / c1.sqrt(),
    })
}

impl SynthesisPlan {
    /// Effective 6-state at `t = 0` for a `(ξ, η)` initial point.
    pub fn initial_state(&self, xe: &StateXiEta<f64>) -> State6<f64> {
        xieta_to6(&self.consts, xe)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Moduli and arguments of the four `Bₙ` of the datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RnPsin {
    pub r0: f64,
    pub r: [f64; 4],
    pub psi: [f64; 4],
}

pub fn rn_psin(plan: &SynthesisPlan, phi123_0: f64, phi234_0: f64) -> Result<RnPsin> {
    let w = Weights::<f64>::new(&plan.config);
    let a1 = plan.consts.a1;
    let r0 = (4.0 / 3.0 * w.s123 * a1 * a1).cbrt();
    let gamma = plan.consts.gamma;
    let r = [r0 / w.al[0], r0 / w.al[1], r0 / w.al[2], r0 / (gamma * w.al[3])];
    if r[0] > plan.q2 / 2.0 * (1.0 + EQ_SLACK) {
        return Err(Error::Synthesis { what: "r1 exceeds q2/2".into(), residual: r[0], limit: plan.q2 / 2.0 });
    }
    Ok(RnPsin { r0, r, psi: [phi123_0, 0.0, 0.0, -phi234_0] })
}

/// `z₁, z₂` with `|z₁|² + |z₂|² = s` and `2z₁z₂ = r e^{iψ}`; the phase sits on `z₁`.
pub fn split_complex(s: f64, r: f64, psi: f64) -> Result<(Complex<f64>, Complex<f64>)> {
    if !(r > 0.0) || r > s {
        return Err(Error::Domain(format!("need 0 < r <= s, got r = {r}, s = {s}")));
    }
    let rho1 = ((s + (s * s - r * r).max(0.0).sqrt()) / 2.0).sqrt();
    let rho2 = r / (2.0 * rho1);
    Ok((Complex::from_polar(rho1, psi), Complex::new(rho2, 0.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatumSpec {
    pub s_target: [f64; 4],
    pub phi123: f64,
    pub phi234: f64,
    pub r: [f64; 4],
    pub psi: [f64; 4],
    /// `(z₁ₙ, z₂ₙ)` as `[re, im]` pairs.
    pub z: [[[f64; 2]; 2]; 4],
    /// Lattice vector of each sphere; `αₙ e₁`.
    pub k: Vec<Vec<i64>>,
}

impl DatumSpec {
    pub fn new(plan: &SynthesisPlan, s0: &State6<f64>) -> Result<Self> {
        let rp = rn_psin(plan, s0[4], s0[5])?;
        let mut z = [[[0.0; 2]; 2]; 4];
        for n in 0..4 {
            if rp.r[n] > s0[n] {
                return Err(Error::Synthesis { what: format!("r{} > S{}(0)", n + 1, n + 1), residual: rp.r[n], limit: s0[n] });
            }
            let (z1, z2) = split_complex(s0[n], rp.r[n], rp.psi[n])?;
            z[n] = [[z1.re, z1.im], [z2.re, z2.im]];
        }
        let d = plan.config.d as usize;
        let k = plan
            .config
            .alphas
            .iter()
            .map(|&a| {
                let mut v = vec![0; d];
                v[0] = a;
                v
            })
            .collect();
        Ok(Self { s_target: [s0[0], s0[1], s0[2], s0[3]], phi123: s0[4], phi234: s0[5], r: rp.r, psi: rp.psi, z, k })
    }
}

/// `u₀ = Σₙ (z₁ₙ e^{i kₙ·x} + z₂ₙ e^{−i kₙ·x})`.
pub fn build_u0(cfg: &TripletConfig, spec: &DatumSpec) -> SpectralField<f64> {
    let c = |p: [f64; 2]| Complex::new(p[0], p[1]);
    SpectralField {
        alphas: cfg.alphas,
        pos: std::array::from_fn(|n| c(spec.z[n][0])),
        neg: std::array::from_fn(|n| c(spec.z[n][1])),
        flavor: Flavor::ConjugatePair,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct U0Report {
    /// Relative residuals of `Sₙ^{(u₀)} = Sₙ(0)`.
    pub s_residual: [f64; 4],
    /// Angle residuals mod `2π`.
    pub phi_residual: [f64; 2],
    /// Relative residuals of `c₁₂₃^{(u₀)}`, `c₂₃₄^{(u₀)}`.
    pub c_residual: [f64; 2],
    /// `‖u₀‖ₛ²` and the bound `8α₄^{2s}q₂` for `s = 1` and `s = m₁`.
    pub norms: Vec<(u32, f64, f64)>,
    /// `‖u₀‖_{m₁} ≤ δ₁`
    pub in_ball: bool,
    pub pass: bool,
}

pub const U0_LIMIT: f64 = 1e-11;

pub fn verify_u0(u0: &SpectralField<f64>, plan: &SynthesisPlan, spec: &DatumSpec) -> U0Report {
    let obs = u0.observables();
    let w = Weights::<f64>::new(&plan.config);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    let s_residual = std::array::from_fn(|n| rel(obs.s[n], spec.s_target[n]));
    let phase = |z: Complex<f64>, target: f64| angle_diff(wrap_angle(z.arg()), wrap_angle(target)).abs();
    let phi_residual = [phase(obs.z123, spec.phi123), phase(obs.z234, spec.phi234)];
    let k = 3.0 / 8.0;
    let c123 = k * obs.z123.norm() * w.al[0] * w.al[1] * w.al[2];
    let c234 = k * obs.z234.norm() * w.al[1] * w.al[2] * w.al[3];
    let c_residual = [rel(c123, plan.consts.c123), rel(c234, plan.consts.c234)];
    let mut levels = vec![1u32];
    if plan.config.m1 != 1 {
        levels.push(plan.config.m1);
    }
    let norms: Vec<_> = levels
        .iter()
        .map(|&s| (s, u0.sobolev_norm_sq(s as f64), 8.0 * w.al[3].powi(2 * s as i32) * plan.q2))
        .collect();
    let in_ball = u0.sobolev_norm(plan.config.m1 as f64) <= plan.config.delta1;
    let worst = s_residual.iter().chain(&phi_residual).chain(&c_residual).fold(0.0f64, |m, &x| m.max(x));
    let norms_ok = norms.iter().all(|&(_, v, b)| v <= b);
    let pass = worst <= U0_LIMIT && norms_ok && (in_ball || !plan.flags.q2_small);
    U0Report { s_residual, phi_residual, c_residual, norms, in_ball, pass }
}
