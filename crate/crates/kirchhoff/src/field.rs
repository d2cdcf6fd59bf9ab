//! Fourier fields on the support `{±α₁, …, ±α₄}`, their observables and the
//! two explicit linear changes of variables between physical and complex
//! coordinates.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    /// Real-valued function: `c₋ₖ = conj(cₖ)`.
    Physical,
    /// First component of a pair `(u, v)` with `v = conj(u)`; no constraint
    /// on the coefficients themselves.
    ConjugatePair,
}

/// Coefficients at `+αₙ` (`pos[n]`) and `-αₙ` (`neg[n]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct SpectralField<T> {
    pub alphas: [i64; 4],
    pub pos: [Complex<T>; 4],
    pub neg: [Complex<T>; 4],
    pub flavor: Flavor,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(alphas: [i64; 4], flavor: Flavor) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self { alphas, pos: [z; 4], neg: [z; 4], flavor }
    }

    pub fn new(alphas: [i64; 4], pos: [Complex<T>; 4], neg: [Complex<T>; 4], flavor: Flavor) -> Result<Self> {
        if alphas.iter().any(|&a| a <= 0) {
            return Err(Error::Domain("support must avoid the zero frequency".into()));
        }
        let f = Self { alphas, pos, neg, flavor };
        if flavor == Flavor::Physical && f.reality_defect() > T::lit(1e-14) {
            return Err(Error::Domain("coefficients violate the reality constraint".into()));
        }
        Ok(f)
    }

    /// Physical field from its positive-frequency half.
    pub fn physical(alphas: [i64; 4], pos: [Complex<T>; 4]) -> Self {
        Self { alphas, pos, neg: pos.map(|c| c.conj()), flavor: Flavor::Physical }
    }

    /// Coefficient at the signed frequency `k`; zero off the support.
    pub fn coeff(&self, k: i64) -> Complex<T> {
        for n in 0..4 {
            if k == self.alphas[n] {
                return self.pos[n];
            }
            if k == -self.alphas[n] {
                return self.neg[n];
            }
        }
        Complex::new(T::zero(), T::zero())
    }

    /// Relative violation of `c₋ₖ = conj(cₖ)`.
    pub fn reality_defect(&self) -> T {
        let mut num = T::zero();
        let mut den = T::zero();
        for n in 0..4 {
            num = num.max((self.neg[n] - self.pos[n].conj()).norm());
            den = den.max(self.pos[n].norm()).max(self.neg[n].norm());
        }
        if den == T::zero() {
            T::zero()
        } else {
            num / den
        }
    }

    pub fn sobolev_norm(&self, s: T) -> T {
        self.sobolev_norm_sq(s).sqrt()
    }

    pub fn sobolev_norm_sq(&self, s: T) -> T {
        let mut acc = T::zero();
        for n in 0..4 {
            let w = T::lit(self.alphas[n] as f64).powf(s + s);
            acc += (self.pos[n].norm_sqr() + self.neg[n].norm_sqr()) * w;
        }
        acc
    }

    /// Superaction `Sₙ = Σ_{|k|=αₙ} |cₖ|²`.
    pub fn superactions(&self) -> [T; 4] {
        std::array::from_fn(|n| self.pos[n].norm_sqr() + self.neg[n].norm_sqr())
    }

    /// `Bₙ = Σ_{|k|=αₙ} c_k c_{-k}`.
    pub fn b_products(&self) -> [Complex<T>; 4] {
        std::array::from_fn(|n| (self.pos[n] * self.neg[n]).scale(T::lit(2.0)))
    }

    pub fn observables(&self) -> Observables<T> {
        Observables::from_sb(self.alphas, self.superactions(), self.b_products())
    }

    /// Maximum coefficient gap to another field on the same support.
    pub fn distance(&self, other: &Self) -> T {
        let mut d = T::zero();
        for n in 0..4 {
            d = d.max((self.pos[n] - other.pos[n]).norm()).max((self.neg[n] - other.neg[n]).norm());
        }
        d
    }
}

/// Polar form of a triple product, or an explicit marker when its modulus
/// is below the degeneracy floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum Polar<T> {
    Defined { rho: T, phi: T },
    Degenerate,
}

impl<T: Real> Polar<T> {
    /// `floor` is compared against `|z|`.
    pub fn of(z: Complex<T>, floor: T) -> Self {
        let rho = z.norm();
        if rho <= floor || !rho.is_finite() {
            Polar::Degenerate
        } else {
            Polar::Defined { rho, phi: wrap_angle(z.arg()) }
        }
    }

    pub fn rho(&self) -> Option<T> {
        match *self {
            Polar::Defined { rho, .. } => Some(rho),
            Polar::Degenerate => None,
        }
    }

    pub fn phi(&self) -> Option<T> {
        match *self {
            Polar::Defined { phi, .. } => Some(phi),
            Polar::Degenerate => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct Observables<T> {
    pub s: [T; 4],
    pub b: [Complex<T>; 4],
    pub z123: Complex<T>,
    pub z234: Complex<T>,
    pub polar123: Polar<T>,
    pub polar234: Polar<T>,
    /// `Σ αₙ² Sₙ`
    pub n1: T,
    /// `√(2 N1)`, the norm of the physical pair `(ũ, ṽ)` in `H^{3/2} × H^{1/2}`.
    pub cal_n: T,
}

/// Absolute part of the degeneracy floor for polar forms.
pub const POLAR_FLOOR: f64 = 1e-300;

impl<T: Real> Observables<T> {
    pub fn from_sb(alphas: [i64; 4], s: [T; 4], b: [Complex<T>; 4]) -> Self {
        let z123 = b[0] * b[1] * b[2].conj();
        let z234 = b[1] * b[2] * b[3].conj();
        let eps = T::epsilon();
        let floor123 = T::lit(POLAR_FLOOR) + eps * s[0] * s[1] * s[2];
        let floor234 = T::lit(POLAR_FLOOR) + eps * s[1] * s[2] * s[3];
        let n1 = (0..4).map(|n| T::lit((alphas[n] * alphas[n]) as f64) * s[n]).sum::<T>();
        Self {
            s,
            b,
            z123,
            z234,
            polar123: Polar::of(z123, floor123),
            polar234: Polar::of(z234, floor234),
            n1,
            cal_n: (n1 + n1).sqrt(),
        }
    }

    pub fn rho123(&self) -> T {
        self.z123.norm()
    }

    pub fn rho234(&self) -> T {
        self.z234.norm()
    }
}

/// `q = (f + g)/√2`, `p = (f − g)/(i√2)` with `g = conj f`, per coefficient.
pub fn phi2_map<T: Real>(f: &SpectralField<T>) -> Result<(SpectralField<T>, SpectralField<T>)> {
    check_support(f)?;
    let r = T::one() / T::SQRT_2();
    let mut q = SpectralField::zeros(f.alphas, Flavor::Physical);
    let mut p = SpectralField::zeros(f.alphas, Flavor::Physical);
    for n in 0..4 {
        // g_k = conj(f_{-k})
        let (gp, gn) = (f.neg[n].conj(), f.pos[n].conj());
        q.pos[n] = (f.pos[n] + gp).scale(r);
        q.neg[n] = (f.neg[n] + gn).scale(r);
        p.pos[n] = (f.pos[n] - gp).scale(r) * Complex::new(T::zero(), -T::one());
        p.neg[n] = (f.neg[n] - gn).scale(r) * Complex::new(T::zero(), -T::one());
    }
    Ok((q, p))
}

/// `f = (q + i p)/√2`.
pub fn phi2_inverse<T: Real>(q: &SpectralField<T>, p: &SpectralField<T>) -> Result<SpectralField<T>> {
    check_support(q)?;
    let r = T::one() / T::SQRT_2();
    let i = Complex::new(T::zero(), T::one());
    let mut f = SpectralField::zeros(q.alphas, Flavor::ConjugatePair);
    for n in 0..4 {
        f.pos[n] = (q.pos[n] + i * p.pos[n]).scale(r);
        f.neg[n] = (q.neg[n] + i * p.neg[n]).scale(r);
    }
    Ok(f)
}

/// `ũ = |D|^{-1/2} q`, `ṽ = |D|^{1/2} p`.
pub fn phi1_map<T: Real>(q: &SpectralField<T>, p: &SpectralField<T>) -> Result<(SpectralField<T>, SpectralField<T>)> {
    check_support(q)?;
    let mut u = *q;
    let mut v = *p;
    for n in 0..4 {
        let w = T::lit(q.alphas[n] as f64).sqrt();
        u.pos[n] = q.pos[n].unscale(w);
        u.neg[n] = q.neg[n].unscale(w);
        v.pos[n] = p.pos[n].scale(w);
        v.neg[n] = p.neg[n].scale(w);
    }
    Ok((u, v))
}

pub fn phi1_inverse<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>) -> Result<(SpectralField<T>, SpectralField<T>)> {
    check_support(u)?;
    let mut q = *u;
    let mut p = *v;
    for n in 0..4 {
        let w = T::lit(u.alphas[n] as f64).sqrt();
        q.pos[n] = u.pos[n].scale(w);
        q.neg[n] = u.neg[n].scale(w);
        p.pos[n] = v.pos[n].unscale(w);
        p.neg[n] = v.neg[n].unscale(w);
    }
    Ok((q, p))
}

/// Complex field `f` to the physical pair `(ũ, ṽ)`.
pub fn to_physical<T: Real>(f: &SpectralField<T>) -> Result<(SpectralField<T>, SpectralField<T>)> {
    let (q, p) = phi2_map(f)?;
    phi1_map(&q, &p)
}

/// Physical pair `(ũ, ṽ)` back to the complex field `f`.
pub fn from_physical<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>) -> Result<SpectralField<T>> {
    let (q, p) = phi1_inverse(u, v)?;
    phi2_inverse(&q, &p)
}

/// `(‖ũ‖²_{3/2} + ‖ṽ‖²_{1/2})^{1/2}`
pub fn cal_n<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>) -> T {
    (u.sobolev_norm_sq(T::lit(1.5)) + v.sobolev_norm_sq(T::lit(0.5))).sqrt()
}

fn check_support<T: Real>(f: &SpectralField<T>) -> Result<()> {
    if f.alphas.iter().any(|&a| a <= 0) {
        Err(Error::Domain("zero frequency in support".into()))
    } else {
        Ok(())
    }
}
