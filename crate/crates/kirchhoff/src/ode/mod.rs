//! Integrators: an adaptive Dormand-Prince 8(5,3) pair with dense output,
//! and an arbitrary-order Taylor series method for analytic autonomous fields.

mod dop853;
#[allow(clippy::excessive_precision, clippy::unreadable_literal)]
mod tableau;
pub mod taylor;

pub use dop853::{Dense, Dop853};
pub use taylor::{JetField, Taylor, TaylorStep};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// What an observer wants after seeing a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// One accepted step with an interpolant over `[t0, t1]`.
pub trait StepView<T: Real, const N: usize> {
    fn t0(&self) -> T;
    fn t1(&self) -> T;
    fn y0(&self) -> &[T; N];
    fn y1(&self) -> &[T; N];
    /// Interpolated state; `t` must lie in the step.
    fn eval(&self, t: T) -> [T; N];
}

#[derive(Debug, Clone)]
pub struct Solution<T, const N: usize> {
    pub t: T,
    pub y: [T; N],
    pub stats: Stats,
    /// True when an observer stopped the run before `t_end`.
    pub stopped: bool,
}

/// Locates zeros of `g` inside a step by Illinois false position on the
/// interpolant. Only sign changes between the step ends are seen.
pub fn find_root<T, const N: usize, S, G>(step: &S, g: G, t_tol: T) -> Option<(T, [T; N])>
where
    T: Real,
    S: StepView<T, N>,
    G: Fn(T, &[T; N]) -> T,
{
    let (mut a, mut b) = (step.t0(), step.t1());
    let mut ga = g(a, step.y0());
    let mut gb = g(b, step.y1());
    if ga == T::zero() {
        return Some((a, *step.y0()));
    }
    if ga.signum() == gb.signum() {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut t = (a * gb - b * ga) / (gb - ga);
        if !(t > a.min(b) && t < a.max(b)) {
            t = (a + b) * T::lit(0.5);
        }
        let y = step.eval(t);
        let gt = g(t, &y);
        if gt == T::zero() || (b - a).abs() < t_tol {
            return Some((t, y));
        }
        if gt.signum() == gb.signum() {
            b = t;
            gb = gt;
            if side == -1 {
                ga *= T::lit(0.5);
            }
            side = -1;
        } else {
            a = t;
            ga = gt;
            if side == 1 {
                gb *= T::lit(0.5);
            }
            side = 1;
        }
        if (b - a).abs() < t_tol {
            let t = (a + b) * T::lit(0.5);
            return Some((t, step.eval(t)));
        }
    }
    let t = (a + b) * T::lit(0.5);
    Some((t, step.eval(t)))
}
