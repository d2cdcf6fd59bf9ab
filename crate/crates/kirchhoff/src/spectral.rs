//! The Kirchhoff equation restricted to the four-sphere support, and the
//! cubic and quintic resonant operators of its normal form.
//!
//! The nonlinearity is the scalar `G = κ Σ|k|²|uₖ|²`, so the support is
//! invariant and the restriction is exact: 16 real unknowns.

use std::io::Write;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::config::{Measure, TripletConfig};
use crate::error::Result;
use crate::field::{cal_n, from_physical, Flavor, Observables, SpectralField};
use crate::ode::{Dop853, Stats};
use crate::scalar::Real;
use crate::trajectory::Trajectory;

/// Displacement and velocity of the original second-order equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct PhysicalState<T> {
    pub u: SpectralField<T>,
    pub v: SpectralField<T>,
    pub t: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KirchhoffModel {
    pub measure: Measure,
    /// Drops `G`, leaving the linear wave equation.
    pub linearize: bool,
}

impl<T: Real> PhysicalState<T> {
    pub fn new(u: SpectralField<T>, v: SpectralField<T>, t: T) -> Self {
        Self { u, v, t }
    }

    /// Positive-frequency coefficients packed as `[Re u, Im u, Re v, Im v]`.
    pub fn pack(&self) -> [T; 16] {
        let mut y = [T::zero(); 16];
        for n in 0..4 {
            y[n] = self.u.pos[n].re;
            y[4 + n] = self.u.pos[n].im;
            y[8 + n] = self.v.pos[n].re;
            y[12 + n] = self.v.pos[n].im;
        }
        y
    }

    pub fn unpack(alphas: [i64; 4], y: &[T; 16], t: T) -> Self {
        let u = std::array::from_fn(|n| Complex::new(y[n], y[4 + n]));
        let v = std::array::from_fn(|n| Complex::new(y[8 + n], y[12 + n]));
        Self { u: SpectralField::physical(alphas, u), v: SpectralField::physical(alphas, v), t }
    }

    /// The complex field `f` of the diagonal coordinates.
    pub fn complex_field(&self) -> SpectralField<T> {
        from_physical(&self.u, &self.v).expect("support checked at construction")
    }

    pub fn observables(&self) -> Observables<T> {
        self.complex_field().observables()
    }

    /// `(‖u‖²_{3/2} + ‖v‖²_{1/2})^{1/2}` evaluated directly on the physical pair.
    pub fn cal_n(&self) -> T {
        cal_n(&self.u, &self.v)
    }
}

/// `Σ|k|²|uₖ|²` over both signs.
fn grad_sq<T: Real>(alphas: [i64; 4], y: &[T; 16]) -> T {
    let mut acc = T::zero();
    for n in 0..4 {
        let k2 = T::lit((alphas[n] * alphas[n]) as f64);
        acc += k2 * (y[n] * y[n] + y[4 + n] * y[4 + n]);
    }
    acc + acc
}

impl KirchhoffModel {
    pub fn coupling<T: Real>(&self, d: u32) -> T {
        if self.linearize {
            T::zero()
        } else {
            self.measure.factor(d)
        }
    }

    /// Right side on the packed state.
    pub fn rhs_packed<T: Real>(&self, cfg: &TripletConfig, y: &[T; 16], dy: &mut [T; 16]) {
        let g = self.coupling::<T>(cfg.d) * grad_sq(cfg.alphas, y);
        for n in 0..4 {
            let k2 = T::lit((cfg.alphas[n] * cfg.alphas[n]) as f64);
            let w = -(T::one() + g) * k2;
            dy[n] = y[8 + n];
            dy[4 + n] = y[12 + n];
            dy[8 + n] = w * y[n];
            dy[12 + n] = w * y[4 + n];
        }
    }

    pub fn rhs<T: Real>(&self, cfg: &TripletConfig, s: &PhysicalState<T>) -> PhysicalState<T> {
        let mut dy = [T::zero(); 16];
        self.rhs_packed(cfg, &s.pack(), &mut dy);
        PhysicalState::unpack(cfg.alphas, &dy, T::one())
    }

    /// `½Σ|vₖ|² + ½Σ|k|²|uₖ|² + (κ/4)(Σ|k|²|uₖ|²)²`.
    pub fn energy<T: Real>(&self, cfg: &TripletConfig, s: &PhysicalState<T>) -> T {
        self.energy_packed(cfg, &s.pack())
    }

    pub fn energy_packed<T: Real>(&self, cfg: &TripletConfig, y: &[T; 16]) -> T {
        let p = grad_sq(cfg.alphas, y);
        let mut kin = T::zero();
        for n in 0..4 {
            kin += y[8 + n] * y[8 + n] + y[12 + n] * y[12 + n];
        }
        let half = T::lit(0.5);
        half * (kin + kin) + half * p + self.coupling::<T>(cfg.d) * p * p * T::lit(0.25)
    }
}

/// One sample of an exact run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralSample {
    pub obs: Observables<f64>,
    pub energy: f64,
    pub state: [f64; 16],
}

/// Integrates the exact finite-mode system and samples observables at `times`.
pub fn integrate_kirchhoff(
    cfg: &TripletConfig,
    model: KirchhoffModel,
    init: &PhysicalState<f64>,
    times: &[f64],
    tol: f64,
) -> Result<Trajectory<SpectralSample>> {
    let solver = Dop853::new(tol, tol * 1e-3);
    let f = |_t: f64, y: &[f64; 16], dy: &mut [f64; 16]| model.rhs_packed(cfg, y, dy);
    let (ys, stats) = solver.sample(f, init.t, init.pack(), times)?;
    let mut tr = Trajectory::new().with_meta("model", "kirchhoff").with_meta("measure", format!("{:?}", model.measure));
    tr.stats = stats;
    for (&t, y) in times.iter().zip(&ys) {
        let st = PhysicalState::unpack(cfg.alphas, y, t);
        tr.push(t, SpectralSample { obs: st.observables(), energy: model.energy_packed(cfg, y), state: *y });
    }
    Ok(tr)
}

/// Final state after integrating to `t_end`.
pub fn evolve_kirchhoff(
    cfg: &TripletConfig,
    model: KirchhoffModel,
    init: &PhysicalState<f64>,
    t_end: f64,
    tol: f64,
) -> Result<(PhysicalState<f64>, Stats)> {
    let solver = Dop853::new(tol, tol * 1e-3);
    let f = |_t: f64, y: &[f64; 16], dy: &mut [f64; 16]| model.rhs_packed(cfg, y, dy);
    let sol = solver.solve(f, init.t, init.pack(), t_end)?;
    Ok((PhysicalState::unpack(cfg.alphas, &sol.y, sol.t), sol.stats))
}

pub const CSV_HEADER: [&str; 12] = ["t", "S1", "S2", "S3", "S4", "phi123", "phi234", "rho123", "rho234", "N1", "calN", "energy"];

/// Writes the standard observable columns; undefined angles are left empty.
pub fn write_csv<W: Write>(out: W, tr: &Trajectory<SpectralSample>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for (t, s) in tr.iter() {
        let o = &s.obs;
        let ang = |p: Option<f64>| p.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            t.to_string(),
            o.s[0].to_string(),
            o.s[1].to_string(),
            o.s[2].to_string(),
            o.s[3].to_string(),
            ang(o.polar123.phi()),
            ang(o.polar234.phi()),
            o.rho123().to_string(),
            o.rho234().to_string(),
            o.n1.to_string(),
            o.cal_n.to_string(),
            s.energy.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(path: &Path, tr: &Trajectory<SpectralSample>) -> Result<()> {
    write_csv(std::fs::File::create(path)?, tr)
}

/// Signed support of a complex field: `(k, |k|, index into pos/neg)`.
fn signed_support(alphas: [i64; 4]) -> [(i64, bool, usize); 8] {
    std::array::from_fn(|i| if i < 4 { (alphas[i], true, i) } else { (-alphas[i - 4], false, i - 4) })
}

fn get<T: Real>(f: &SpectralField<T>, pos: bool, n: usize) -> Complex<T> {
    if pos {
        f.pos[n]
    } else {
        f.neg[n]
    }
}

fn put<T: Real>(f: &mut SpectralField<T>, pos: bool, n: usize, c: Complex<T>) {
    if pos {
        f.pos[n] += c;
    } else {
        f.neg[n] += c;
    }
}

/// Coefficients of `v = conj(u)`: `v_k = conj(u_{-k})`.
fn conj_pair<T: Real>(u: &SpectralField<T>) -> SpectralField<T> {
    SpectralField { alphas: u.alphas, pos: u.neg.map(|c| c.conj()), neg: u.pos.map(|c| c.conj()), flavor: Flavor::ConjugatePair }
}

/// Second component from the first by complex conjugation of the function.
fn second_component<T: Real>(w1: &SpectralField<T>) -> SpectralField<T> {
    conj_pair(w1)
}

/// `num/den` with the convention `0/0 = 0`.
fn ratio0<T: Real>(num: T, den: T) -> T {
    if den == T::zero() {
        T::zero()
    } else {
        num / den
    }
}

/// Linear part `(-i|D|u, i|D|v)`.
pub fn d1_field<T: Real>(u: &SpectralField<T>) -> (SpectralField<T>, SpectralField<T>) {
    let mut w = SpectralField::zeros(u.alphas, Flavor::ConjugatePair);
    for (k, pos, n) in signed_support(u.alphas) {
        let a = T::lit(k.abs() as f64);
        put(&mut w, pos, n, get(u, pos, n) * Complex::new(T::zero(), -a));
    }
    let w2 = second_component(&w);
    (w, w2)
}

/// Cubic resonant operator, both components, from the sums as displayed.
pub fn z3_field<T: Real>(u: &SpectralField<T>) -> (SpectralField<T>, SpectralField<T>) {
    let v = conj_pair(u);
    let sup = signed_support(u.alphas);
    let mut w = SpectralField::zeros(u.alphas, Flavor::ConjugatePair);
    let c = Complex::new(T::zero(), -T::lit(0.25));
    for &(k, kp, kn) in &sup {
        for &(j, jp, jn) in &sup {
            if j.abs() != k.abs() {
                continue;
            }
            let j2 = T::lit((j * j) as f64);
            let term = get(u, jp, jn) * get(u, !jp, jn) * get(&v, kp, kn);
            put(&mut w, kp, kn, c * term.scale(j2));
        }
    }
    let w2 = second_component(&w);
    (w, w2)
}

/// Quintic resonant operator: the four displayed sum groups, first component,
/// with the second obtained by conjugation.
pub fn z5_field<T: Real>(u: &SpectralField<T>) -> (SpectralField<T>, SpectralField<T>) {
    let v = conj_pair(u);
    let sup = signed_support(u.alphas);
    let mut w = SpectralField::zeros(u.alphas, Flavor::ConjugatePair);
    let i = Complex::new(T::zero(), T::one());
    let at = |f: &SpectralField<T>, x: i64| f.coeff(x);
    let absr = |x: i64| T::lit(x.abs() as f64);
    for &(k, kp, kn) in &sup {
        let ak = absr(k);
        let mut acc = Complex::new(T::zero(), T::zero());
        for &(j, _, _) in &sup {
            let aj = absr(j);
            for &(l, _, _) in &sup {
                let al = absr(l);
                if j.abs() == l.abs() {
                    let delta = if l.abs() == k.abs() { T::zero() } else { T::one() };
                    let coef = T::one() / (aj + ak) - ratio0(delta, al - ak);
                    let term = at(u, j) * at(u, -j) * at(&v, l) * at(&v, -l) * at(u, k);
                    acc += term.scale(aj * aj * al * al * coef) * i.scale(T::lit(1.0 / 32.0));
                }
                if k.abs() == j.abs() + l.abs() {
                    let term = at(u, j) * at(u, -j) * at(u, l) * at(u, -l) * at(&v, k);
                    acc += term.scale(aj * al * ak) * i.scale(T::lit(3.0 / 32.0));
                }
                if j.abs() == k.abs() {
                    let delta = if l.abs() == j.abs() { T::zero() } else { T::one() };
                    let coef = T::lit(6.0) + al / (al + aj) + ratio0(al * delta, al - aj);
                    let term = at(u, j) * at(u, -j) * at(u, l) * at(&v, -l) * at(&v, k);
                    acc += term.scale(aj * aj * al * coef) * i.scale(T::lit(1.0 / 16.0));
                }
                if k.abs() == j.abs() - l.abs() {
                    let term = at(u, j) * at(u, -j) * at(&v, l) * at(&v, -l) * at(&v, k);
                    acc += term.scale(aj * al * ak) * i.scale(T::lit(3.0 / 16.0));
                }
            }
        }
        put(&mut w, kp, kn, acc);
    }
    let w2 = second_component(&w);
    (w, w2)
}

/// `∂t Sₙ` induced by a vector field `(w₁, w₂)` at `u`:
/// `Σ_{|k|=αₙ} (w₁)ₖ v₋ₖ + uₖ (w₂)₋ₖ`.
pub fn superaction_rate<T: Real>(u: &SpectralField<T>, w1: &SpectralField<T>, w2: &SpectralField<T>) -> [Complex<T>; 4] {
    let v = conj_pair(u);
    std::array::from_fn(|n| {
        let a = u.alphas[n];
        w1.coeff(a) * v.coeff(-a) + w1.coeff(-a) * v.coeff(a) + u.coeff(a) * w2.coeff(-a) + u.coeff(-a) * w2.coeff(a)
    })
}

/// Resonant model `D₁ + Z₃ + Z₅` as a real ODE on the eight complex
/// coefficients of `u` (packed `[Re pos, Im pos, Re neg, Im neg]`).
pub fn resonant_rhs_packed(alphas: [i64; 4], y: &[f64; 16], dy: &mut [f64; 16]) {
    let u = unpack_complex(alphas, y);
    let (d1, _) = d1_field(&u);
    let (z3, _) = z3_field(&u);
    let (z5, _) = z5_field(&u);
    for n in 0..4 {
        let p = d1.pos[n] + z3.pos[n] + z5.pos[n];
        let m = d1.neg[n] + z3.neg[n] + z5.neg[n];
        dy[n] = p.re;
        dy[4 + n] = p.im;
        dy[8 + n] = m.re;
        dy[12 + n] = m.im;
    }
}

pub fn pack_complex(u: &SpectralField<f64>) -> [f64; 16] {
    let mut y = [0.0; 16];
    for n in 0..4 {
        y[n] = u.pos[n].re;
        y[4 + n] = u.pos[n].im;
        y[8 + n] = u.neg[n].re;
        y[12 + n] = u.neg[n].im;
    }
    y
}

pub fn unpack_complex(alphas: [i64; 4], y: &[f64; 16]) -> SpectralField<f64> {
    SpectralField {
        alphas,
        pos: std::array::from_fn(|n| Complex::new(y[n], y[4 + n])),
        neg: std::array::from_fn(|n| Complex::new(y[8 + n], y[12 + n])),
        flavor: Flavor::ConjugatePair,
    }
}
