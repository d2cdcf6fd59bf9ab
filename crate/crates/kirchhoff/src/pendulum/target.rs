//! Realizing a prescribed sequence of return symbols by nested bisection
//! along a segment of the section that crosses the stable manifold.

use serde::{Deserialize, Serialize};

use super::manifold::{manifold_point_phase, manifold_trace, SEED_DISTANCE};
use super::melnikov::find_a0;
use super::periodic::{continue_periodic_orbit, coupling, PeriodicOrbit};
use super::section::{extract_symbols, lift_to_section, orbit_events, sample_orbit, OrbitEvents};
use crate::cascade::{StateXiEta, XiEtaSystem};
use crate::dd::DoubleDouble as DD;
use crate::error::{Error, Result};
use crate::ode::{find_root, Control, StepView, Taylor, TaylorStep};
use num_traits::Float;


pub const DD_TOL: f64 = 1e-30;
const SCAN: usize = 48;
/// Accepted mismatch at a bisected level crossing, in periods. Integration
/// error is amplified by roughly `μ^{Σm}` along a nested orbit.
const LEVEL_TOL: f64 = 1e-3;

/// Segment `z_h + s t̂` of `Π` through the symmetric homoclinic point, in
/// the `(ξ₁, η₁)` chart, lifted to the energy level of the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub base: [f64; 2],
    pub dir: [f64; 2],
    /// Sign of `s` on which orbits leave along the branch that returns to `Π`.
    pub side: f64,
}

pub struct Targeter {
    pub orbit: PeriodicOrbit,
    pub segment: Segment,
    sys: XiEtaSystem<DD>,
    sigma: DD,
    energy: DD,
    period: DD,
}

impl Targeter {
    pub fn new(orbit: PeriodicOrbit) -> Result<Self> {
        let (theta, zh) = manifold_point_phase(&orbit, 0.0, false, SEED_DISTANCE)?;
        let d = 1e-4;
        let zp = manifold_trace(&orbit, theta + d, 0.0, false, SEED_DISTANCE)?;
        let zm = manifold_trace(&orbit, theta - d, 0.0, false, SEED_DISTANCE)?;
        let t = [zp[0] - zm[0], zp[1] - zm[1]];
        let n = t[0].hypot(t[1]);
        let sigma = DD::c(orbit.sigma);
        let mut me = Self {
            sys: coupling(sigma),
            sigma,
            energy: DD::c(orbit.energy),
            period: DD::c(orbit.period),
            segment: Segment { base: [zh[0], zh[1]], dir: [t[0] / n, t[1] / n], side: 1.0 },
            orbit,
        };
        // The returning side has first-return times growing towards `s = 0`.
        let probe = |me: &Self, s: f64| -> Result<Option<f64>> {
            Ok(me.events(DD::c(s), 1, 12.0)?.returns.first().map(|c| c.t.hi()))
        };
        let near = probe(&me, 1e-6)?;
        let far = probe(&me, 1e-2)?;
        me.segment.side = match (near, far) {
            (Some(a), Some(b)) if a > b => 1.0,
            _ => -1.0,
        };
        Ok(me)
    }

    pub fn point(&self, s: DD) -> Result<StateXiEta<DD>> {
        let [b0, b1] = self.segment.base.map(DD::c);
        let [d0, d1] = self.segment.dir.map(DD::c);
        let s = s * DD::c(self.segment.side);
        lift_to_section(&self.sys, self.sigma, self.energy, b0 + s * d0, b1 + s * d1)
            .ok_or_else(|| Error::Domain("segment leaves the energy level".into()))
    }

    /// Events up to `returns` returns, with a horizon of `periods` periods.
    pub fn events(&self, s: DD, returns: usize, periods: f64) -> Result<OrbitEvents<DD>> {
        orbit_events(&self.sys, self.point(s)?, returns, self.period * DD::c(periods), DD::c(DD_TOL), false, true)
    }

    /// Return intervals of the first `k + 1` returns, the last within
    /// `horizon` periods of the previous one; `None` entries did not occur.
    fn intervals(&self, s: DD, prefix: &[i64], horizon: f64) -> Result<Vec<DD>> {
        Ok(self.intervals_escape(s, prefix, horizon)?.0)
    }

    fn intervals_escape(&self, s: DD, prefix: &[i64], horizon: f64) -> Result<(Vec<DD>, bool)> {
        let periods = prefix.iter().map(|&m| m as f64 + 1.0).sum::<f64>() + horizon;
        let ev = self.events(s, prefix.len() + 1, periods)?;
        let mut prev = DD::ZERO;
        let iv = ev
            .returns
            .iter()
            .map(|c| {
                let d = c.t - prev;
                prev = c.t;
                d / self.period
            })
            .collect();
        Ok((iv, ev.escaped))
    }

    /// `Some(Δ)` with the normalized interval of return `prefix.len()`, when
    /// all earlier symbols match `prefix`.
    fn stage_value(&self, s: DD, prefix: &[i64], horizon: f64) -> Result<Option<DD>> {
        let iv = self.intervals(s, prefix, horizon)?;
        for (j, &m) in prefix.iter().enumerate() {
            match iv.get(j) {
                Some(d) if d.floor().hi() as i64 == m => {}
                _ => return Ok(None),
            }
        }
        Ok(iv.get(prefix.len()).copied())
    }

    /// Point of `(lo, hi)` at which the next interval equals `target`
    /// periods, by bisection on "returns earlier than target". Among several
    /// crossings the one whose earlier intervals sit farthest from integers
    /// is kept. With `last`, the bisection may stop at the resolution of the
    /// scalar; the point then only has to carry the right symbol.
    fn solve_level(&self, lo: DD, hi: DD, prefix: &[i64], target: f64, linear: bool, last: bool) -> Result<Option<DD>> {
        let horizon = target + 0.5;
        let below = |s: DD| -> Result<Option<bool>> {
            Ok(self.stage_value(s, prefix, horizon)?.map(|d| d.hi() < target))
        };
        let mut grid: Vec<DD> = (0..=SCAN)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * DD::c(i as f64 / SCAN as f64)).exp())
            .collect();
        if linear {
            grid.extend((1..SCAN).map(|i| lo + (hi - lo) * DD::c(i as f64 / SCAN as f64)));
            grid.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        }
        let vals = grid.iter().map(|&s| below(s)).collect::<Result<Vec<_>>>()?;
        let mut best: Option<(f64, DD)> = None;
        for i in 0..grid.len() - 1 {
            let a = vals[i] == Some(true);
            let b = vals[i + 1] == Some(true);
            if a == b {
                continue;
            }
            let (mut x_true, mut x_false) = if a { (grid[i], grid[i + 1]) } else { (grid[i + 1], grid[i]) };
            for _ in 0..140 {
                let mid = (x_true + x_false) * DD::c(0.5);
                if mid == x_true || mid == x_false {
                    break;
                }
                match below(mid)? {
                    Some(true) => x_true = mid,
                    _ => x_false = mid,
                }
            }
            // Accept only continuous crossings of the level.
            if let Some(d) = self.stage_value(x_true, prefix, horizon)? {
                let hit = if last { d.floor().hi() == target.floor() } else { (d.hi() - target).abs() < LEVEL_TOL };
                if hit {
                    let iv = self.intervals(x_true, prefix, horizon)?;
                    let margin = iv[..prefix.len()].iter().map(|d| frac_margin(d.hi())).fold(0.5, f64::min);
                    if best.is_none_or(|(m, _)| margin > m) {
                        best = Some((margin, x_true));
                    }
                }
            }
        }
        Ok(best.map(|b| b.1))
    }

    /// Runs the nested search for `(M₀ + o₁, M₀ + o₂, …)`; `M₀` is measured first.
    pub fn target(&self, offsets: &[i64]) -> Result<Itinerary> {
        let m0 = self.measure_m0()?;
        let symbols: Vec<i64> = offsets.iter().map(|o| m0 + o).collect();
        self.target_from(&symbols, m0)
    }

    /// Runs the nested search for absolute symbols, each at least `M₀`.
    pub fn target_symbols(&self, symbols: &[i64]) -> Result<Itinerary> {
        let m0 = self.measure_m0()?;
        if let Some(&m) = symbols.iter().find(|&&m| m < m0) {
            return Err(Error::Targeting { realized: 0, prescribed: symbols.len(), reason: format!("symbol {m} is below M0 = {m0}") });
        }
        self.target_from(symbols, m0)
    }

    fn target_from(&self, symbols: &[i64], m0: i64) -> Result<Itinerary> {
        if symbols.is_empty() {
            return Err(Error::Domain("empty itinerary".into()));
        }
        let (mut lo, mut hi) = (DD::c(1e-14), DD::c(0.5));
        let mut linear = false;
        let mut s_star = DD::ZERO;
        for j in 0..symbols.len() {
            let prefix = &symbols[..j];
            let m = symbols[j] as f64;
            s_star = self.solve_level(lo, hi, prefix, m + 0.5, linear, j + 1 == symbols.len())?.ok_or_else(|| Error::Targeting {
                realized: j,
                prescribed: symbols.len(),
                reason: format!("no crossing of level {} in the current strip", m + 0.5),
            })?;
            if j + 1 == symbols.len() {
                break;
            }
            // Strip of symbol m around s*: both edges by local bracketing.
            let (a, b) = self.strip(s_star, lo, hi, prefix, m)?;
            lo = a;
            hi = b;
            linear = true;
        }
        self.realize(s_star, symbols, m0)
    }

    fn strip(&self, s: DD, lo: DD, hi: DD, prefix: &[i64], m: f64) -> Result<(DD, DD)> {
        let inside = |x: DD| -> Result<bool> {
            Ok(self.stage_value(x, prefix, m + 1.5)?.map(|d| d.floor().hi() == m).unwrap_or(false))
        };
        let mut edges = [lo, hi];
        for (k, end) in [lo, hi].into_iter().enumerate() {
            let mut w = (end - s).abs().min((hi - lo).abs()) * DD::c(1e-12);
            let dir = if end > s { DD::ONE } else { -DD::ONE };
            let mut good = s;
            let mut bad = end;
            while w < (end - s).abs() {
                let x = s + dir * w;
                if inside(x)? {
                    good = x;
                } else {
                    bad = x;
                    break;
                }
                w *= DD::c(4.0);
            }
            for _ in 0..140 {
                let mid = (good + bad) * DD::c(0.5);
                if mid == good || mid == bad {
                    break;
                }
                if inside(mid)? {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            edges[k] = good;
        }
        Ok((edges[0].min(edges[1]), edges[0].max(edges[1])))
    }

    /// Smallest first-return symbol whose strip maps across the stable
    /// manifold: the strip holds both orbits that return a second time and
    /// orbits that first turn back along the lower separatrix, and the two
    /// behaviours are separated only by passages arbitrarily close to the
    /// periodic orbit.
    pub fn measure_m0(&self) -> Result<i64> {
        let samples: Vec<DD> = (0..=400).map(|i| DD::c(10f64.powf(-0.5 - 10.0 * i as f64 / 400.0))).collect();
        let mut seen = std::collections::BTreeMap::<i64, (bool, bool)>::new();
        for &s in &samples {
            let (iv, escaped) = self.intervals_escape(s, &[20], 20.0)?;
            let Some(first) = iv.first() else { continue };
            let m = first.floor().hi() as i64;
            let e = seen.entry(m).or_insert((false, false));
            match iv.get(1) {
                Some(_) => e.0 = true,
                None if escaped => e.1 = true,
                None => {}
            }
        }
        seen.iter()
            .find(|(_, &(returns, escapes))| returns && escapes)
            .map(|(&m, _)| m)
            .ok_or_else(|| Error::Targeting { realized: 0, prescribed: 0, reason: "no strip crosses the stable manifold".into() })
    }

    fn realize(&self, s: DD, symbols: &[i64], m0: i64) -> Result<Itinerary> {
        let x = self.point(s)?;
        let tol = DD::c(DD_TOL);
        let horizon = self.period * DD::c(symbols.iter().map(|&m| m as f64 + 2.0).sum::<f64>());
        let ev = orbit_events(&self.sys, x, symbols.len(), horizon, tol, true, false)?;
        let returns: Vec<DD> = ev.returns.iter().map(|c| c.t).collect();
        let realized = extract_symbols(&returns, self.period);
        let t0 = last_up_crossing_before(&self.sys, x, tol)?;
        let start = Taylor::new(tol).solve(&self.sys, DD::ZERO, x, t0)?.y;
        let mut t_j: Vec<f64> = vec![0.0];
        t_j.extend(ev.up.iter().map(|&t| (t - t0).hi()));
        let period = self.orbit.period;
        let theta: Vec<f64> = (0..symbols.len().min(t_j.len() - 1))
            .map(|j| (t_j[j + 1] - t_j[j]) / period - symbols[j] as f64)
            .collect();
        let shifted: Vec<(f64, f64)> = ev.eta2.iter().map(|&(t, v)| (t - t0.hi(), v)).collect();
        let c_measured = borraccia_constant(&shifted, &t_j, self.orbit.sigma);
        Ok(Itinerary {
            sigma: self.orbit.sigma,
            a0: self.orbit.a,
            period,
            m0,
            symbols_prescribed: symbols.to_vec(),
            symbols_realized: realized,
            return_times: returns.iter().map(|t| (*t - t0).hi()).collect(),
            t_j,
            theta_j: theta,
            c_measured,
            segment_parameter: [s.hi(), s.lo()],
            start: start.map(|v| [v.hi(), v.lo()]),
            section_point: x.map(|v| [v.hi(), v.lo()]),
        })
    }
}

/// Distance of `x` to the nearest integer.
fn frac_margin(x: f64) -> f64 {
    let f = x - x.floor();
    f.min(1.0 - f)
}

/// Time of the latest `η₂ = 1` upward crossing before `0`.
fn last_up_crossing_before(sys: &XiEtaSystem<DD>, x: StateXiEta<DD>, tol: DD) -> Result<DD> {
    let mut found = None;
    let one = DD::ONE;
    Taylor::new(tol).integrate(sys, DD::ZERO, x, DD::c(-40.0), |st: &TaylorStep<DD, 4>| {
        let (a, b) = (st.y0()[3], st.y1()[3]);
        // Backward in time: η₂ drops through 1.
        if a > one && b <= one {
            found = find_root(st, |_, y: &StateXiEta<DD>| y[3] - one, DD::c(1e-30)).map(|r| r.0);
            return Control::Stop;
        }
        Control::Continue
    })?;
    found.ok_or(Error::NoBracket("no η₂ = 1 crossing before the section point".into()))
}

/// Smallest `C` for which the sampled `η₂` obeys `1 < η₂ ≤ 2 + Cσ` with
/// `max ≥ 2 − Cσ` on each `(tⱼ, t̄ⱼ)`, and `−Cσ ≤ η₂ < 1` with
/// `min ≤ Cσ` on each `(t̄ⱼ, tⱼ₊₁)`.
pub fn borraccia_constant(eta2: &[(f64, f64)], t_j: &[f64], sigma: f64) -> f64 {
    let mut c = 0.0f64;
    for w in t_j.windows(2) {
        let seg: Vec<f64> = eta2.iter().filter(|(t, _)| *t > w[0] && *t < w[1]).map(|p| p.1).collect();
        let hi: Vec<f64> = seg.iter().copied().filter(|&v| v > 1.0).collect();
        let lo: Vec<f64> = seg.iter().copied().filter(|&v| v < 1.0).collect();
        if let Some(mx) = hi.iter().copied().reduce(f64::max) {
            c = c.max((2.0 - mx) / sigma).max((mx - 2.0) / sigma);
        }
        if let Some(mn) = lo.iter().copied().reduce(f64::min) {
            c = c.max(mn / sigma).max(-mn / sigma);
        }
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Itinerary {
    pub sigma: f64,
    pub a0: f64,
    pub period: f64,
    #[serde(rename = "M0")]
    pub m0: i64,
    pub symbols_prescribed: Vec<i64>,
    pub symbols_realized: Vec<i64>,
    /// Returns to the section, measured from `t₀`.
    pub return_times: Vec<f64>,
    /// Upward crossings of `η₂ = 1`, with `t₀ = 0`.
    pub t_j: Vec<f64>,
    pub theta_j: Vec<f64>,
    pub c_measured: f64,
    pub segment_parameter: [f64; 2],
    /// State at `t₀` as `(hi, lo)` pairs.
    pub start: [[f64; 2]; 4],
    pub section_point: [[f64; 2]; 4],
}

impl Itinerary {
    pub fn start_dd(&self) -> StateXiEta<DD> {
        self.start.map(|[h, l]| DD::new(h, l))
    }

    pub fn start_f64(&self) -> StateXiEta<f64> {
        self.start.map(|[h, l]| h + l)
    }

    pub fn realized(&self) -> bool {
        self.symbols_prescribed == self.symbols_realized && self.theta_j.iter().all(|t| (0.0..1.0).contains(t))
    }

    /// `ξη` states of the targeted orbit at `times` (from `t₀`), integrated
    /// in extended precision and rounded.
    pub fn sample(&self, times: &[f64]) -> Result<Vec<StateXiEta<f64>>> {
        let sys = coupling(DD::c(self.sigma));
        let t: Vec<DD> = times.iter().map(|&x| DD::c(x)).collect();
        let v = sample_orbit(&sys, self.start_dd(), &t, DD::c(DD_TOL))?;
        Ok(v.into_iter().map(|s| s.map(|x| x.hi() + x.lo())).collect())
    }

    /// Duration through the last prescribed symbol.
    pub fn span(&self) -> f64 {
        *self.t_j.last().unwrap_or(&0.0)
    }
}

/// Itinerary `(M₀ + o₁, M₀ + o₂, …)` at coupling `σ` on the orbit of energy `a₀`.
pub fn target_itinerary(sigma: f64, offsets: &[i64]) -> Result<Itinerary> {
    let a0 = find_a0()?.a0;
    let orbit = continue_periodic_orbit(sigma, a0)?;
    Targeter::new(orbit)?.target(offsets)
}

/// Itinerary with absolute symbols `m_seq`, each at least the measured `M₀`.
pub fn target_symbols(sigma: f64, m_seq: &[i64]) -> Result<Itinerary> {
    let a0 = find_a0()?.a0;
    let orbit = continue_periodic_orbit(sigma, a0)?;
    Targeter::new(orbit)?.target_symbols(m_seq)
}
