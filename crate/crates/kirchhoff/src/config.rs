//! Frequency configuration `α = (m, m+p, 2m+p, 3m+2p)` and its exact
//! derived constants.

use std::collections::BTreeSet;
use std::path::Path;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Rational = Ratio<i64>;

/// Spatial measure used for the nonlocal coefficient `∫|∇u|²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// `∫|∇u|² = Σ|k|²|u_k|²`
    #[default]
    Normalized,
    /// `∫|∇u|² = (2π)^d Σ|k|²|u_k|²`
    Weighted,
}

impl Measure {
    pub fn factor<T: Real>(self, d: u32) -> T {
        match self {
            Measure::Normalized => T::one(),
            Measure::Weighted => T::TAU().powi(d as i32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripletConfig {
    pub m: i64,
    pub p: i64,
    pub d: u32,
    pub m1: u32,
    pub alphas: [i64; 4],
    pub sigma: Rational,
    pub gamma: Rational,
    pub mu1: Rational,
    pub mu2: Rational,
    pub tilde_mu1: Rational,
    pub tilde_mu2: Rational,
    #[serde(rename = "A")]
    pub a: [[i64; 2]; 2],
    #[serde(rename = "detA")]
    pub det_a: i64,
    pub delta1: f64,
}

impl TripletConfig {
    pub fn new(m: i64, p: i64, d: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("m = {m} must be at least 2")));
        }
        if m >= p {
            return Err(Error::Config(format!("need m < p, got m = {m}, p = {p}")));
        }
        if d < 1 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        let al = [m, m + p, 2 * m + p, 3 * m + 2 * p];
        let [a1, a2, a3, a4] = al.map(|a| a * a);
        let s123 = a1 + a2 + a3;
        let s234 = a2 + a3 + a4;
        let diff = a3 - a2;
        let a = [[s123, -diff], [-diff, s234]];
        let det_a = a1 * a4 + (a1 + a4) * (a2 + a3) + 4 * a2 * a3;
        let sigma = Rational::new(m, p);
        let gamma = Rational::new(s234, s123);
        let mu1 = Rational::new(diff, s234);
        let mu2 = Rational::new(diff, s123);
        let cfg = Self {
            m,
            p,
            d,
            m1: if d == 1 { 1 } else { 2 },
            alphas: al,
            sigma,
            gamma,
            mu1,
            mu2,
            tilde_mu1: mu1 / sigma - Rational::new(1, 3),
            tilde_mu2: mu2 / sigma - Rational::from_integer(1),
            a,
            det_a,
            delta1: 1.0,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Verifies every structural invariant; used after deserialization too.
    pub fn check(&self) -> Result<()> {
        let [a1, a2, a3, a4] = self.alphas;
        let bad = |s: &str| Err(Error::Config(s.to_string()));
        if self.m < 2 || self.m >= self.p {
            return bad("need 2 <= m < p");
        }
        if self.alphas != [self.m, self.m + self.p, 2 * self.m + self.p, 3 * self.m + 2 * self.p] {
            return bad("alphas do not match (m, p)");
        }
        if a1 + a2 != a3 || a2 + a3 != a4 || 2 * a1 == a2 {
            return bad("alphas are not an admissible chain");
        }
        let direct = self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0];
        if direct != self.det_a {
            return bad("detA differs from the determinant of A");
        }
        if self.gamma <= Rational::from_integer(1) || self.gamma >= Rational::from_integer(3) {
            return bad("gamma outside (1, 3)");
        }
        if self.mu2 != self.mu1 * self.gamma {
            return bad("mu2 != mu1 * gamma");
        }
        if self.mu1 != self.sigma * (Rational::new(1, 3) + self.tilde_mu1)
            || self.mu2 != self.sigma * (Rational::from_integer(1) + self.tilde_mu2)
        {
            return bad("tilde mu inconsistent with sigma");
        }
        if self.m1 != if self.d == 1 { 1 } else { 2 } {
            return bad("m1 inconsistent with d");
        }
        Ok(())
    }

    pub fn alpha<T: Real>(&self, n: usize) -> T {
        T::lit(self.alphas[n] as f64)
    }

    pub fn alphas_real<T: Real>(&self) -> [T; 4] {
        self.alphas.map(|a| T::lit(a as f64))
    }

    pub fn sigma_real<T: Real>(&self) -> T {
        ratio_real(self.sigma)
    }

    pub fn gamma_real<T: Real>(&self) -> T {
        ratio_real(self.gamma)
    }

    pub fn mu1_real<T: Real>(&self) -> T {
        ratio_real(self.mu1)
    }

    pub fn mu2_real<T: Real>(&self) -> T {
        ratio_real(self.mu2)
    }

    /// `α₁²+α₂²+α₃²`
    pub fn sum123(&self) -> i64 {
        self.a[0][0]
    }

    /// `α₂²+α₃²+α₄²`
    pub fn sum234(&self) -> i64 {
        self.a[1][1]
    }

    /// Ordered resonant triplets `(α, β, λ)` with `α + β = λ` inside the support.
    pub fn triplets(&self) -> Triplets {
        enumerate_triplets(&self.alphas)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Toml(e.to_string()))
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Toml(e.to_string()))?;
        c.check()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}

/// Exact rational to a real scalar: numerator and denominator are exact in
/// every supported scalar for the magnitudes involved.
pub fn ratio_real<T: Real>(r: Rational) -> T {
    T::lit(*r.numer() as f64) / T::lit(*r.denom() as f64)
}

pub fn ratio_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Triplets {
    pub found: BTreeSet<(i64, i64, i64)>,
    /// Exactly the four triplets of a two-triplet chain.
    pub admissible: bool,
}

/// Brute force over all ordered pairs of the support.
pub fn enumerate_triplets(alphas: &[i64]) -> Triplets {
    let set: BTreeSet<i64> = alphas.iter().copied().collect();
    let mut found = BTreeSet::new();
    for &a in &set {
        for &b in &set {
            if set.contains(&(a + b)) {
                found.insert((a, b, a + b));
            }
        }
    }
    let admissible = alphas.len() == 4 && {
        let [a1, a2, a3, a4] = [alphas[0], alphas[1], alphas[2], alphas[3]];
        let expect: BTreeSet<_> = [(a1, a2, a3), (a2, a1, a3), (a2, a3, a4), (a3, a2, a4)].into_iter().collect();
        found == expect
    };
    Triplets { found, admissible }
}
