//! Closed-form solutions of the normalized pendulum `ξ' = η, η' = −sin ξ`.

use serde::{Deserialize, Serialize};

use super::elliptic::{ellip_k, jacobi};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Libration of energy `a ∈ (0, 2)` with `ξ(0) = 0`, `η(0) = √(2a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumOrbit<T> {
    pub a: T,
    /// Elliptic parameter `a/2`.
    pub m: T,
    pub period: T,
}

impl<T: Real> PendulumOrbit<T> {
    pub fn new(a: T) -> Result<Self> {
        if !(a > T::zero() && a < T::lit(2.0)) {
            return Err(Error::Domain(format!("pendulum energy {a} outside (0, 2)")));
        }
        let m = a * T::lit(0.5);
        Ok(Self { a, m, period: T::lit(4.0) * ellip_k(m) })
    }

    /// `(ξ₁*(t), η₁*(t))`
    pub fn eval(&self, t: T) -> (T, T) {
        let (sn, cn, _) = jacobi(t, self.m);
        let k = self.m.sqrt();
        (T::lit(2.0) * (k * sn).asin(), T::lit(2.0) * k * cn)
    }

    pub fn omega(&self) -> T {
        T::TAU() / self.period
    }
}

/// Upper branch of the separatrix through `(0, 2)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Separatrix;

impl Separatrix {
    /// `q_h(s) = 2 arcsin(tanh s)`
    pub fn q<T: Real>(s: T) -> T {
        T::lit(2.0) * s.tanh().asin()
    }

    /// `p_h⁺(s) = 2 / cosh s`
    pub fn p<T: Real>(s: T) -> T {
        T::lit(2.0) / s.cosh()
    }

    /// `sin q_h(s) = 2 sinh s / cosh² s`
    pub fn sin_q<T: Real>(s: T) -> T {
        let c = s.cosh();
        T::lit(2.0) * s.sinh() / (c * c)
    }
}

/// Period by direct quadrature of `4∫₀^{ξmax} dξ / √(2(a − 1 + cos ξ))`,
/// after the substitution `sin(ξ/2) = k sin φ`, which removes the endpoint
/// singularity.
pub fn period_quadrature(a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 2.0) {
        return Err(Error::Domain(format!("pendulum energy {a} outside (0, 2)")));
    }
    let m = a / 2.0;
    // 4 ∫₀^{π/2} dφ / √(1 − m sin²φ), composite Simpson is spectrally
    // accurate for a smooth periodic integrand.
    let n = 2000;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let f = |p: f64| 1.0 / (1.0 - m * p.sin().powi(2)).sqrt();
    let mut acc = 0.5 * (f(0.0) + f(std::f64::consts::FRAC_PI_2));
    for i in 1..n {
        acc += f(i as f64 * h);
    }
    Ok(4.0 * acc * h)
}
