//! Fixed-order Taylor series integration with step control from the tail of
//! the series. Precision follows the scalar type, so with a double-double
//! scalar the method resolves well below `f64` round-off.

use super::{Control, Solution, Stats, StepView};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// An autonomous analytic field that can produce normalized Taylor
/// coefficients of its solution through a point.
pub trait JetField<T: Real, const N: usize> {
    /// `x[0]` holds the base point on entry; fill `x[1..=order]` with
    /// `x^{(k)}(0)/k!`.
    fn jet(&self, x: &mut [[T; N]], order: usize);
}

#[derive(Debug, Clone)]
pub struct Taylor<T> {
    pub tol: T,
    pub order: usize,
    pub max_steps: usize,
    pub h_max: Option<T>,
}

impl<T: Real> Taylor<T> {
    /// Order chosen from the tolerance as `ceil(-ln(tol)/2) + 1`.
    pub fn new(tol: T) -> Self {
        let order = ((-tol.f64().ln()) / 2.0).ceil() as usize + 1;
        Self { tol, order: order.max(8), max_steps: 10_000_000, h_max: None }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self
    }

    pub fn integrate<const N: usize, F, O>(&self, field: &F, t0: T, y0: [T; N], t_end: T, mut observer: O) -> Result<Solution<T, N>>
    where
        F: JetField<T, N>,
        O: FnMut(&TaylorStep<T, N>) -> Control,
    {
        let p = self.order;
        let dir = if t_end >= t0 { T::one() } else { -T::one() };
        let mut stats = Stats::default();
        let mut step = TaylorStep { t0, h: T::zero(), coeffs: vec![[T::zero(); N]; p + 1], y1: y0 };
        let mut t = t0;
        let mut y = y0;
        let safety = T::lit((-0.7 / (p as f64 - 1.0)).exp());
        while (t_end - t) * dir > T::zero() {
            if stats.accepted >= self.max_steps {
                return Err(Error::StepBudget { t: t.f64(), steps: self.max_steps, last: y.iter().map(|v| v.f64()).collect() });
            }
            step.coeffs[0] = y;
            field.jet(&mut step.coeffs, p);
            stats.evaluations += 1;
            let scale = T::one().max(norm_inf(&y));
            let tol = self.tol * scale;
            let mut h = T::infinity();
            for j in [p - 1, p] {
                let nj = norm_inf(&step.coeffs[j]);
                if nj > T::zero() {
                    h = h.min((tol / nj).powf(T::one() / T::lit(j as f64)));
                }
            }
            if !h.is_finite() {
                h = (t_end - t).abs();
            }
            h *= safety;
            if let Some(hm) = self.h_max {
                h = h.min(hm);
            }
            if h < T::epsilon() * t.abs().max(T::one()) {
                return Err(Error::StepUnderflow { t: t.f64(), h: h.f64(), last: y.iter().map(|v| v.f64()).collect() });
            }
            let mut hs = h * dir;
            let mut last = false;
            if ((t + hs) - t_end) * dir >= T::zero() {
                hs = t_end - t;
                last = true;
            }
            step.t0 = t;
            step.h = hs;
            step.y1 = horner(&step.coeffs, hs);
            t = if last { t_end } else { t + hs };
            y = step.y1;
            stats.accepted += 1;
            if observer(&step) == Control::Stop {
                return Ok(Solution { t, y, stats, stopped: true });
            }
        }
        Ok(Solution { t, y, stats, stopped: false })
    }

    pub fn solve<const N: usize, F: JetField<T, N>>(&self, field: &F, t0: T, y0: [T; N], t_end: T) -> Result<Solution<T, N>> {
        self.integrate(field, t0, y0, t_end, |_| Control::Continue)
    }
}

fn norm_inf<T: Real, const N: usize>(v: &[T; N]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn horner<T: Real, const N: usize>(c: &[[T; N]], dt: T) -> [T; N] {
    let mut y = *c.last().expect("non-empty jet");
    for ck in c.iter().rev().skip(1) {
        for n in 0..N {
            y[n] = y[n] * dt + ck[n];
        }
    }
    y
}

#[derive(Debug, Clone)]
pub struct TaylorStep<T, const N: usize> {
    t0: T,
    h: T,
    coeffs: Vec<[T; N]>,
    y1: [T; N],
}

impl<T: Real, const N: usize> TaylorStep<T, N> {
    /// Normalized derivatives at the step start.
    pub fn coefficients(&self) -> &[[T; N]] {
        &self.coeffs
    }
}

impl<T: Real, const N: usize> StepView<T, N> for TaylorStep<T, N> {
    fn t0(&self) -> T {
        self.t0
    }
    fn t1(&self) -> T {
        self.t0 + self.h
    }
    fn y0(&self) -> &[T; N] {
        &self.coeffs[0]
    }
    fn y1(&self) -> &[T; N] {
        &self.y1
    }
    fn eval(&self, t: T) -> [T; N] {
        horner(&self.coeffs, t - self.t0)
    }
}

/// Running sin/cos jets: given `u[0..=k]` and `s[0..k]`, `c[0..k]`, extends
/// both to index `k`.
#[inline]
pub fn sin_cos_jet_step<T: Real>(u: &[T], s: &mut [T], c: &mut [T], k: usize) {
    if k == 0 {
        let (sv, cv) = u[0].sin_cos();
        s[0] = sv;
        c[0] = cv;
        return;
    }
    let mut ss = T::zero();
    let mut cc = T::zero();
    for j in 1..=k {
        let ju = T::lit(j as f64) * u[j];
        ss += ju * c[k - j];
        cc += ju * s[k - j];
    }
    let kk = T::lit(k as f64);
    s[k] = ss / kk;
    c[k] = -cc / kk;
}
