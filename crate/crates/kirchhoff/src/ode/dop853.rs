use super::tableau::{A, C, D, E3_SHIFT, E5};
use super::{Control, Solution, Stats, StepView};
use crate::error::{Error, Result};
use crate::scalar::Real;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Adaptive explicit Runge-Kutta 8(5,3) with 7th-order dense output.
#[derive(Debug, Clone)]
pub struct Dop853<T> {
    pub rtol: T,
    pub atol: T,
    pub h_init: Option<T>,
    pub h_max: Option<T>,
    pub max_steps: usize,
    /// Build the interpolant on every step (three extra evaluations).
    pub dense: bool,
}

impl<T: Real> Dop853<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Self { rtol, atol, h_init: None, h_max: None, max_steps: 50_000_000, dense: false }
    }

    pub fn with_dense(mut self) -> Self {
        self.dense = true;
        self
    }

    pub fn with_h_max(mut self, h: T) -> Self {
        self.h_max = Some(h);
        self
    }

    /// Integrates to `t_end`, calling `observer` after every accepted step.
    pub fn integrate<const N: usize, F, O>(
        &self,
        mut f: F,
        t0: T,
        y0: [T; N],
        t_end: T,
        mut observer: O,
    ) -> Result<Solution<T, N>>
    where
        F: FnMut(T, &[T; N], &mut [T; N]),
        O: FnMut(&Dense<T, N>) -> Control,
    {
        let dir = if t_end >= t0 { T::one() } else { -T::one() };
        let mut stats = Stats::default();
        let mut t = t0;
        let mut y = y0;
        let mut k = [[T::zero(); N]; 16];
        f(t, &y, &mut k[0]);
        stats.evaluations += 1;
        if t == t_end {
            return Ok(Solution { t, y, stats, stopped: false });
        }
        let span = (t_end - t0).abs();
        let h_max = self.h_max.unwrap_or(span).min(span);
        let mut h = match self.h_init {
            Some(h) => h.abs(),
            None => {
                stats.evaluations += 1;
                self.initial_step(&mut f, t, &y, &k[0], dir, h_max)
            }
        }
        .min(h_max);
        let mut e3w = [0.0; 13];
        e3w[..12].copy_from_slice(&A[12][..12]);
        for &(j, v) in &E3_SHIFT {
            e3w[j] -= v;
        }
        let mut rejected_last = false;
        let mut dense = Dense { t0: t, h: T::zero(), y0: y, y1: y, f: [[T::zero(); N]; 7], have_poly: false };

        loop {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::StepBudget { t: t.f64(), steps: self.max_steps, last: y.iter().map(|v| v.f64()).collect() });
            }
            let h_min = T::lit(10.0) * T::epsilon() * t.abs().max(T::one());
            if h < h_min {
                return Err(Error::StepUnderflow { t: t.f64(), h: h.f64(), last: y.iter().map(|v| v.f64()).collect() });
            }
            let mut hs = h * dir;
            let mut last = false;
            if ((t + hs) - t_end) * dir >= T::zero() {
                hs = t_end - t;
                last = true;
            }
            // stages 1..11
            for s in 1..12 {
                let mut ys = y;
                for i in 0..N {
                    let mut acc = T::zero();
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc += T::lit(a) * kj[i];
                        }
                    }
                    ys[i] += hs * acc;
                }
                f(t + T::lit(C[s]) * hs, &ys, &mut k[s]);
            }
            let mut y_new = y;
            for i in 0..N {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(12) {
                    let b = A[12][j];
                    if b != 0.0 {
                        acc += T::lit(b) * kj[i];
                    }
                }
                y_new[i] += hs * acc;
            }
            let t_new = if last { t_end } else { t + hs };
            f(t_new, &y_new, &mut k[12]);
            stats.evaluations += 12;

            let mut e5 = T::zero();
            let mut e3 = T::zero();
            for i in 0..N {
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                let mut a5 = T::zero();
                let mut a3 = T::zero();
                for j in 0..13 {
                    if E5[j] != 0.0 {
                        a5 += T::lit(E5[j]) * k[j][i];
                    }
                    if e3w[j] != 0.0 {
                        a3 += T::lit(e3w[j]) * k[j][i];
                    }
                }
                let a5 = a5 / sc;
                let a3 = a3 / sc;
                e5 += a5 * a5;
                e3 += a3 * a3;
            }
            let err = if e5 == T::zero() && e3 == T::zero() {
                T::zero()
            } else {
                hs.abs() * e5 / ((e5 + T::lit(0.01) * e3) * T::lit(N as f64)).sqrt()
            };

            if err < T::one() {
                let mut factor = if err == T::zero() {
                    T::lit(MAX_FACTOR)
                } else {
                    T::lit(MAX_FACTOR).min(T::lit(SAFETY) * err.powf(T::lit(-1.0 / 8.0)))
                };
                if rejected_last {
                    factor = factor.min(T::one());
                }
                stats.accepted += 1;
                dense.t0 = t;
                dense.h = hs;
                dense.y0 = y;
                dense.y1 = y_new;
                dense.have_poly = false;
                if self.dense {
                    self.build_dense(&mut f, &mut k, &mut dense);
                    stats.evaluations += 3;
                }
                t = t_new;
                y = y_new;
                k[0] = k[12];
                h = (h * factor).min(h_max);
                rejected_last = false;
                if observer(&dense) == Control::Stop {
                    return Ok(Solution { t, y, stats, stopped: true });
                }
                if last {
                    return Ok(Solution { t, y, stats, stopped: false });
                }
            } else {
                stats.rejected += 1;
                h *= T::lit(MIN_FACTOR).max(T::lit(SAFETY) * err.powf(T::lit(-1.0 / 8.0)));
                rejected_last = true;
            }
        }
    }

    /// Integrates to `t_end` and returns the final state only.
    pub fn solve<const N: usize, F>(&self, f: F, t0: T, y0: [T; N], t_end: T) -> Result<Solution<T, N>>
    where
        F: FnMut(T, &[T; N], &mut [T; N]),
    {
        self.integrate(f, t0, y0, t_end, |_| Control::Continue)
    }

    /// States at the requested increasing (or decreasing, for backward runs) times.
    pub fn sample<const N: usize, F>(&self, f: F, t0: T, y0: [T; N], times: &[T]) -> Result<(Vec<[T; N]>, Stats)>
    where
        F: FnMut(T, &[T; N], &mut [T; N]),
    {
        let Some(&t_end) = times.last() else {
            return Ok((Vec::new(), Stats::default()));
        };
        let dir = if t_end >= t0 { T::one() } else { -T::one() };
        let solver = Self { dense: true, ..self.clone() };
        let mut out = Vec::with_capacity(times.len());
        let mut idx = 0;
        while idx < times.len() && times[idx] == t0 {
            out.push(y0);
            idx += 1;
        }
        let sol = solver.integrate(f, t0, y0, t_end, |st| {
            while idx < times.len() && (times[idx] - st.t1()) * dir <= T::zero() {
                out.push(st.eval(times[idx]));
                idx += 1;
            }
            Control::Continue
        })?;
        while out.len() < times.len() {
            out.push(sol.y);
        }
        Ok((out, sol.stats))
    }

    fn initial_step<const N: usize, F>(&self, f: &mut F, t: T, y: &[T; N], f0: &[T; N], dir: T, h_max: T) -> T
    where
        F: FnMut(T, &[T; N], &mut [T; N]),
    {
        let n = T::lit(N as f64);
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d0 += (y[i] / sc).powi(2);
            d1 += (f0[i] / sc).powi(2);
        }
        let d0 = (d0 / n).sqrt();
        let d1 = (d1 / n).sqrt();
        let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 }.min(h_max);
        let mut y1 = *y;
        for i in 0..N {
            y1[i] += h0 * dir * f0[i];
        }
        let mut f1 = [T::zero(); N];
        f(t + h0 * dir, &y1, &mut f1);
        let mut d2 = T::zero();
        for i in 0..N {
            let sc = self.atol + self.rtol * y[i].abs();
            d2 += ((f1[i] - f0[i]) / sc).powi(2);
        }
        let d2 = (d2 / n).sqrt() / h0;
        let h1 = if d1 <= T::lit(1e-15) && d2 <= T::lit(1e-15) {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / d1.max(d2)).powf(T::lit(1.0 / 8.0))
        };
        (T::lit(100.0) * h0).min(h1).min(h_max)
    }

    fn build_dense<const N: usize, F>(&self, f: &mut F, k: &mut [[T; N]; 16], dense: &mut Dense<T, N>)
    where
        F: FnMut(T, &[T; N], &mut [T; N]),
    {
        let h = dense.h;
        for s in 13..16 {
            let mut ys = dense.y0;
            for i in 0..N {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s][j];
                    if a != 0.0 {
                        acc += T::lit(a) * kj[i];
                    }
                }
                ys[i] += h * acc;
            }
            f(dense.t0 + T::lit(C[s]) * h, &ys, &mut k[s]);
        }
        for i in 0..N {
            let dy = dense.y1[i] - dense.y0[i];
            dense.f[0][i] = dy;
            dense.f[1][i] = h * k[0][i] - dy;
            dense.f[2][i] = T::lit(2.0) * dy - h * (k[12][i] + k[0][i]);
            for (r, drow) in D.iter().enumerate() {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate() {
                    if drow[j] != 0.0 {
                        acc += T::lit(drow[j]) * kj[i];
                    }
                }
                dense.f[3 + r][i] = h * acc;
            }
        }
        dense.have_poly = true;
    }
}

/// An accepted step; carries the interpolant when the solver runs dense.
#[derive(Debug, Clone)]
pub struct Dense<T, const N: usize> {
    t0: T,
    h: T,
    y0: [T; N],
    y1: [T; N],
    f: [[T; N]; 7],
    have_poly: bool,
}

impl<T: Real, const N: usize> StepView<T, N> for Dense<T, N> {
    fn t0(&self) -> T {
        self.t0
    }
    fn t1(&self) -> T {
        self.t0 + self.h
    }
    fn y0(&self) -> &[T; N] {
        &self.y0
    }
    fn y1(&self) -> &[T; N] {
        &self.y1
    }
    fn eval(&self, t: T) -> [T; N] {
        assert!(self.have_poly, "interpolation needs a dense solver");
        let x = (t - self.t0) / self.h;
        let mut y = [T::zero(); N];
        for (i, fr) in self.f.iter().rev().enumerate() {
            for n in 0..N {
                y[n] += fr[n];
                y[n] *= if i % 2 == 0 { x } else { T::one() - x };
            }
        }
        for n in 0..N {
            y[n] += self.y0[n];
        }
        y
    }
}
