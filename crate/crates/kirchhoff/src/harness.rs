//! End-to-end runs: the exact finite-mode ODE started from a synthesized
//! datum, compared with the effective orbit it is built to shadow.
//!
//! Fast averages are exact window means: the exact ODE carries running
//! integrals of `Sₙ` and `𝒩`, so a centered mean over `W` is a difference of
//! two samples divided by `W`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cascade::{compose_chain, integrate6, xieta_to6, State6, StateXiEta};
use crate::config::{Measure, TripletConfig};
use crate::error::{Error, Result};
use crate::field::to_physical;
use crate::ode::{Dop853, Stats};
use crate::pendulum::{target_symbols, Itinerary};
use crate::scalar::angle_diff;
use crate::spectral::{save_csv, KirchhoffModel, PhysicalState, SpectralSample};
use crate::synthesis::{build_u0, make_plan, verify_u0, DatumSpec, SynthesisPlan, U0Report};
use crate::trajectory::Trajectory;

const TAU: f64 = std::f64::consts::TAU;

/// `ψ` uses `εᵝ` with this `β`.
pub const GRONWALL_BETA: i32 = -3;

/// Allowed relative gap of the calibration rate.
pub const CALIBRATION_GAP: f64 = 0.3;

/// Filtered tracking error allowed as a fraction of `2a₂`.
pub const TRACKING_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Horizon {
    /// Through the last prescribed return plus a margin.
    Itinerary,
    /// The first excursion `[0, s̄₀]` of `η₂` above 1.
    FirstExcursion,
    /// Through the first full oscillation, up to the start of the next.
    FirstOscillation,
    /// A fixed slow time.
    Slow(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub model: KirchhoffModel,
    pub tol: f64,
    pub effective_tol: f64,
    pub horizon: Horizon,
    /// Averaging window in fast periods `2π/α₁`.
    pub window_periods: f64,
    /// Grid points per window; even.
    pub grid_per_window: usize,
    /// `δ_ε / B_ε`.
    pub band_fraction: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            model: KirchhoffModel::default(),
            tol: 1e-13,
            effective_tol: 1e-12,
            horizon: Horizon::Itinerary,
            window_periods: 4.0,
            grid_per_window: 4,
            band_fraction: 0.1,
        }
    }
}

/// Slow time added after the last event a run must resolve.
const SLOW_MARGIN: f64 = 1.5;

/// Window mean of the superactions and of `𝒩` centered at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Filtered {
    pub t: f64,
    pub s: [f64; 4],
    pub cal_n: f64,
}

/// Superactions of the diagonal field, straight from the packed physical state:
/// `Sₙ = αₙ|ũ_{αₙ}|² + |ṽ_{αₙ}|²/αₙ`.
pub fn packed_superactions(alphas: [i64; 4], y: &[f64; 16]) -> [f64; 4] {
    std::array::from_fn(|n| {
        let k = alphas[n] as f64;
        let u2 = y[n] * y[n] + y[4 + n] * y[4 + n];
        let v2 = y[8 + n] * y[8 + n] + y[12 + n] * y[12 + n];
        k * u2 + v2 / k
    })
}

/// `𝒩 = (‖ũ‖²_{3/2} + ‖ṽ‖²_{1/2})^{1/2}` on the packed state.
pub fn packed_cal_n(alphas: [i64; 4], y: &[f64; 16]) -> f64 {
    let mut acc = 0.0;
    for n in 0..4 {
        let k = alphas[n] as f64;
        acc += k.powi(3) * (y[n] * y[n] + y[4 + n] * y[4 + n]) + k * (y[8 + n] * y[8 + n] + y[12 + n] * y[12 + n]);
    }
    (2.0 * acc).sqrt()
}

/// Exact run on a uniform grid together with window means.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactRun {
    pub traj: Trajectory<SpectralSample>,
    pub filtered: Vec<Filtered>,
    pub window: f64,
    /// Largest `|E(t) − E(0)|/|E(0)|` on the grid.
    pub energy_drift: f64,
}

/// Integrates the exact system on `[0, t_end]` with a grid of spacing
/// `window / grid_per_window`.
pub fn exact_run(cfg: &TripletConfig, init: &PhysicalState<f64>, t_end: f64, opts: &RunOptions) -> Result<ExactRun> {
    if opts.grid_per_window < 2 || !opts.grid_per_window.is_multiple_of(2) {
        return Err(Error::Domain(format!("grid_per_window = {} must be even and positive", opts.grid_per_window)));
    }
    let window = opts.window_periods * TAU / cfg.alphas[0] as f64;
    let h = window / opts.grid_per_window as f64;
    let n = (t_end / h).ceil().max(1.0) as usize;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let y0 = init.pack();
    let s0 = packed_superactions(cfg.alphas, &y0);
    let n0 = packed_cal_n(cfg.alphas, &y0);
    let mut z0 = [0.0; 21];
    z0[..16].copy_from_slice(&y0);
    let model = opts.model;
    let f = |_t: f64, z: &[f64; 21], dz: &mut [f64; 21]| {
        let y: &[f64; 16] = z[..16].try_into().unwrap();
        let mut dy = [0.0; 16];
        model.rhs_packed(cfg, y, &mut dy);
        dz[..16].copy_from_slice(&dy);
        let s = packed_superactions(cfg.alphas, y);
        for k in 0..4 {
            dz[16 + k] = s[k] - s0[k];
        }
        dz[20] = packed_cal_n(cfg.alphas, y) - n0;
    };
    let (zs, stats) = Dop853::new(opts.tol, opts.tol * 1e-3).sample(f, 0.0, z0, &times)?;
    let mut traj = Trajectory::new().with_meta("model", "kirchhoff").with_meta("measure", format!("{:?}", model.measure));
    traj.stats = stats;
    let e0 = model.energy_packed(cfg, &y0);
    let mut energy_drift = 0.0f64;
    for (&t, z) in times.iter().zip(&zs) {
        let y: [f64; 16] = z[..16].try_into().unwrap();
        let st = PhysicalState::unpack(cfg.alphas, &y, t);
        let energy = model.energy_packed(cfg, &y);
        energy_drift = energy_drift.max(((energy - e0) / e0).abs());
        traj.push(t, SpectralSample { obs: st.observables(), energy, state: y });
    }
    let half = opts.grid_per_window / 2;
    let filtered = (half..times.len().saturating_sub(half))
        .map(|i| {
            let (a, b) = (&zs[i - half], &zs[i + half]);
            Filtered {
                t: times[i],
                s: std::array::from_fn(|k| s0[k] + (b[16 + k] - a[16 + k]) / window),
                cal_n: n0 + (b[20] - a[20]) / window,
            }
        })
        .collect();
    Ok(ExactRun { traj, filtered, window, energy_drift })
}

/// Initial physical state `Φ₁∘Φ₂(u₀, ū₀)` for an effective start state.
pub fn datum(plan: &SynthesisPlan, s0: &State6<f64>) -> Result<(DatumSpec, U0Report, PhysicalState<f64>)> {
    let spec = DatumSpec::new(plan, s0)?;
    let u0 = build_u0(&plan.config, &spec);
    let report = verify_u0(&u0, plan, &spec);
    let (u, v) = to_physical(&u0)?;
    Ok((spec, report, PhysicalState::new(u, v, 0.0)))
}

/// `ψ` of the Gronwall argument: `ε⁻³(Sₙᵘ − Sₙ)` from window means, and
/// the raw phase gaps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GronwallDiag {
    pub beta: i32,
    pub times: Vec<f64>,
    pub psi: Vec<[f64; 6]>,
    /// `sup |ψ|` (Euclidean).
    pub sup: f64,
    /// Superaction part only.
    pub sup_s: f64,
    pub threshold: f64,
    /// First grid time with `|ψ| > ε^{3/4}`.
    pub first_exceed: Option<f64>,
    pub pass: bool,
}

impl GronwallDiag {
    pub fn new(eps: f64, exact: &ExactRun, effective: &Trajectory<State6<f64>>) -> Self {
        let scale = eps.powi(GRONWALL_BETA);
        let threshold = eps.powf(0.75);
        let stride = grid_index(exact);
        let mut times = Vec::with_capacity(exact.filtered.len());
        let mut psi = Vec::with_capacity(exact.filtered.len());
        let (mut sup, mut sup_s) = (0.0f64, 0.0f64);
        let mut first_exceed = None;
        for (j, f) in exact.filtered.iter().enumerate() {
            let i = j + stride;
            let e = &effective.states[i];
            let obs = &exact.traj.states[i].obs;
            let gap = |p: Option<f64>, q: f64| p.map(|p| angle_diff(p, q)).unwrap_or(f64::NAN);
            let v = [
                scale * (f.s[0] - e[0]),
                scale * (f.s[1] - e[1]),
                scale * (f.s[2] - e[2]),
                scale * (f.s[3] - e[3]),
                gap(obs.polar123.phi(), e[4]),
                gap(obs.polar234.phi(), e[5]),
            ];
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let norm_s = v[..4].iter().map(|x| x * x).sum::<f64>().sqrt();
            sup = sup.max(norm);
            sup_s = sup_s.max(norm_s);
            if first_exceed.is_none() && !(norm <= threshold) {
                first_exceed = Some(f.t);
            }
            times.push(f.t);
            psi.push(v);
        }
        Self { beta: GRONWALL_BETA, times, psi, sup, sup_s, threshold, first_exceed, pass: first_exceed.is_none() }
    }
}

/// Grid index of the first window mean.
fn grid_index(exact: &ExactRun) -> usize {
    exact.filtered.first().map(|f| exact.traj.times.iter().position(|&t| t == f.t).unwrap_or(0)).unwrap_or(0)
}

/// Largest `ε⁻³|S̄ₙᵘ − Sₙ|` over the window means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tracking {
    pub sup_scaled: f64,
    /// `0.2 · 2a₂`
    pub limit: f64,
    pub pass: bool,
}

impl Tracking {
    pub fn new(plan: &SynthesisPlan, g: &GronwallDiag) -> Self {
        let sup_scaled = g.psi.iter().flat_map(|v| v[..4].iter().map(|x| x.abs())).fold(0.0, f64::max);
        let limit = TRACKING_FRACTION * 2.0 * plan.slow.a2;
        Self { sup_scaled, limit, pass: sup_scaled <= limit }
    }
}

/// Window-averaged `dS₄/dt` at the start against the truncated effective rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub measure: Measure,
    /// Windows spanned by the fit.
    pub windows: usize,
    pub exact_rate: f64,
    /// `−(3/8) ρ₂₃₄ α₂α₃α₄ sin φ₂₃₄`
    pub effective_rate: f64,
    pub relative_gap: f64,
    pub pass: bool,
}

/// Least-squares slope of the window means of `S₄` centered at
/// `W/2, W, …, W/2 + nW` against the effective rate at the middle. With
/// `n = 1` this is the difference of the means over `[W, 2W]` and `[0, W]`
/// divided by `W`.
pub fn calibrate(plan: &SynthesisPlan, s0: &State6<f64>, measure: Measure, tol: f64, windows: usize) -> Result<Calibration> {
    let cfg = &plan.config;
    let n = windows.max(1);
    let (_, _, init) = datum(plan, s0)?;
    let opts = RunOptions { model: KirchhoffModel { measure, linearize: false }, tol, grid_per_window: 2, ..RunOptions::default() };
    let w = opts.window_periods * TAU / cfg.alphas[0] as f64;
    let run = exact_run(cfg, &init, (n + 1) as f64 * w, &opts)?;
    let pts: Vec<(f64, f64)> = run.filtered.iter().filter(|f| f.t <= w / 2.0 + n as f64 * w + 1e-9 * w).map(|f| (f.t, f.s[3])).collect();
    let exact_rate = if n == 1 {
        let (a, b) = (pts[0], pts[pts.len() - 1]);
        (b.1 - a.1) / (b.0 - a.0)
    } else {
        slope(&pts)
    };
    let mid = (pts[0].0 + pts[pts.len() - 1].0) / 2.0;
    let eff = integrate6(cfg, &plan.consts, s0, &[0.0, mid], 1e-12)?;
    let effective_rate = s4_rate(plan, &eff.traj.states[1]);
    let relative_gap = ((exact_rate - effective_rate) / effective_rate).abs();
    Ok(Calibration { measure, windows: n, exact_rate, effective_rate, relative_gap, pass: relative_gap <= CALIBRATION_GAP })
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// `−(3/8) ρ₂₃₄ α₂α₃α₄ sin φ₂₃₄`, which is `∂ₜS₄` of the truncated system.
pub fn s4_rate(plan: &SynthesisPlan, s: &State6<f64>) -> f64 {
    let a = plan.config.alphas.map(|x| x as f64);
    -3.0 / 8.0 * plan.consts.rho234 * a[1] * a[2] * a[3] * s[5].sin()
}

/// Calibrates both conventions and returns the one that matches, if any.
pub fn select_measure(plan: &SynthesisPlan, s0: &State6<f64>, tol: f64, windows: usize) -> Result<(Option<Measure>, [Calibration; 2])> {
    let a = calibrate(plan, s0, Measure::Normalized, tol, windows)?;
    let b = calibrate(plan, s0, Measure::Weighted, tol, windows)?;
    let pick = match (a.pass, b.pass) {
        (true, false) => Some(Measure::Normalized),
        (false, true) => Some(Measure::Weighted),
        (true, true) => Some(if a.relative_gap <= b.relative_gap { a.measure } else { b.measure }),
        (false, false) => None,
    };
    Ok((pick, [a, b]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    /// `I_j`: above the center.
    Up,
    /// `E_j`: below the center.
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excursion {
    pub phase: Phase,
    pub start: f64,
    pub end: f64,
    /// Max of `𝒩 − A` on `I_j`, min on `E_j`.
    pub extremum: f64,
    pub lower: f64,
    pub upper: f64,
    /// The inequalities of the oscillation template on this interval.
    pub template_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscillationReport {
    /// `A_ε = εc₀ + ε²r₀/2`
    pub center: f64,
    /// `B_ε = ε²r₀/2`
    pub amplitude: f64,
    /// `δ_ε = B_ε · band_fraction`
    pub delta: f64,
    pub intervals: Vec<Excursion>,
    /// Upward center crossings `t_j` (physical time).
    pub t_j: Vec<f64>,
    /// Downward center crossings `t̄_j`.
    pub t_bar_j: Vec<f64>,
    pub prescribed: Vec<i64>,
    /// `⌊bε³(t_{j+1} − t_j)/T⌋`
    pub realized: Vec<i64>,
    pub realized_count: usize,
    pub realized_prefix: usize,
    pub template_ok: bool,
    pub pass: bool,
}

/// Center, amplitude and band of the oscillation template.
pub fn template(plan: &SynthesisPlan, band_fraction: f64) -> (f64, f64, f64) {
    let e = plan.eps;
    let amplitude = e * e * plan.r0 / 2.0;
    (e * plan.c0 + amplitude, amplitude, amplitude * band_fraction)
}

/// Hysteresis detector on a (filtered) `𝒩` series. A sample above `A + δ/2`
/// after one below `A − δ/2` starts `I_j` at the last crossing of `A`;
/// symmetrically for `E_j`. A series starting above `A` opens `I_0` at its
/// first sample.
pub fn detect_oscillations(series: &[(f64, f64)], plan: &SynthesisPlan, m_seq: &[i64], period: f64, band_fraction: f64) -> OscillationReport {
    let (center, amplitude, delta) = template(plan, band_fraction);
    let band = delta / 2.0;
    let mut ups: Vec<f64> = Vec::new();
    let mut downs: Vec<f64> = Vec::new();
    let mut state: Option<Phase> = None;
    let mut last_cross = series.first().map(|p| p.0).unwrap_or(0.0);
    for (i, &(t, v)) in series.iter().enumerate() {
        let x = v - center;
        if i > 0 {
            let (t0, v0) = series[i - 1];
            let x0 = v0 - center;
            if (x0 < 0.0) != (x < 0.0) {
                last_cross = t0 + (t - t0) * x0 / (x0 - x);
            }
        }
        match state {
            None => {
                state = Some(if x >= 0.0 { Phase::Up } else { Phase::Down });
                if x >= 0.0 {
                    ups.push(t);
                } else {
                    downs.push(t);
                }
            }
            Some(Phase::Down) if x > band => {
                state = Some(Phase::Up);
                ups.push(last_cross);
            }
            Some(Phase::Up) if x < -band => {
                state = Some(Phase::Down);
                downs.push(last_cross);
            }
            _ => {}
        }
    }
    let t_end = series.last().map(|p| p.0).unwrap_or(0.0);
    let mut marks: Vec<(f64, Phase)> = ups.iter().map(|&t| (t, Phase::Up)).chain(downs.iter().map(|&t| (t, Phase::Down))).collect();
    marks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut intervals = Vec::new();
    for (k, &(start, phase)) in marks.iter().enumerate() {
        let end = marks.get(k + 1).map(|m| m.0).unwrap_or(t_end);
        let xs = series.iter().filter(|p| p.0 >= start && p.0 <= end).map(|p| p.1 - center);
        let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let complete = k + 1 < marks.len();
        let (extremum, template_ok) = match phase {
            Phase::Up => (hi, lo >= -delta && hi <= amplitude + delta && (!complete || hi >= amplitude - delta)),
            Phase::Down => (lo, hi <= delta && lo >= -amplitude - delta && (!complete || lo <= -amplitude + delta)),
        };
        intervals.push(Excursion { phase, start, end, extremum, lower: lo, upper: hi, template_ok });
    }
    let b_eps3 = plan.consts.b;
    let realized: Vec<i64> = ups.windows(2).map(|w| ((w[1] - w[0]) * b_eps3 / period).floor() as i64).collect();
    let realized_prefix = realized.iter().zip(m_seq).take_while(|(a, b)| a == b).count();
    let template_ok = intervals.iter().all(|e| e.template_ok);
    OscillationReport {
        center,
        amplitude,
        delta,
        intervals,
        t_j: ups.clone(),
        t_bar_j: downs,
        prescribed: m_seq.to_vec(),
        realized_count: realized.len(),
        pass: realized_prefix == m_seq.len() && !m_seq.is_empty(),
        realized,
        realized_prefix,
        template_ok,
    }
}

/// `εc₀ + ε²r₀η₂/2` along an effective orbit.
pub fn reference_cal_n(plan: &SynthesisPlan, eta2: f64) -> f64 {
    let e = plan.eps;
    e * plan.c0 + e * e * plan.r0 * eta2 / 2.0
}

/// Everything a verification run produces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Experiment {
    pub config: TripletConfig,
    pub eps: f64,
    pub options: RunOptions,
    pub plan: SynthesisPlan,
    pub itinerary: Itinerary,
    pub datum: DatumSpec,
    pub datum_report: U0Report,
    /// Slow time covered.
    pub slow_horizon: f64,
    pub exact: ExactRun,
    /// Targeted orbit through the chart chain, on the exact grid.
    pub effective: Trajectory<State6<f64>>,
    /// `ξη` of the targeted orbit on the exact grid.
    pub xieta: Vec<StateXiEta<f64>>,
    /// Double-precision effective run from the same start.
    pub effective_f64: Trajectory<State6<f64>>,
    /// First time the double-precision run departs from the targeted orbit
    /// by more than 1% of `2a₂` in `ε⁻³S`.
    pub shadow_horizon: Option<f64>,
    pub gronwall: GronwallDiag,
    pub tracking: Tracking,
    pub oscillations: OscillationReport,
    pub calibration: Calibration,
}

/// Targets `m_seq` at `σ = m/p`, then runs [`run_with_itinerary`].
pub fn run_experiment(cfg: &TripletConfig, eps: f64, m_seq: &[i64], opts: &RunOptions) -> Result<Experiment> {
    let it = target_symbols(cfg.sigma_real(), m_seq)?;
    run_with_itinerary(cfg, eps, &it, opts)
}

/// Slow-time end of a run.
pub fn slow_horizon(it: &Itinerary, horizon: Horizon) -> Result<f64> {
    Ok(match horizon {
        Horizon::Itinerary => it.span() + SLOW_MARGIN,
        Horizon::FirstOscillation => it.t_j.get(1).copied().ok_or(Error::Domain("itinerary has no return".into()))? + SLOW_MARGIN,
        Horizon::FirstExcursion => first_down_crossing(it)?,
        Horizon::Slow(s) => s,
    })
}

/// First `η₂ = 1` downward crossing of the targeted orbit.
fn first_down_crossing(it: &Itinerary) -> Result<f64> {
    let end = it.t_j.get(1).copied().unwrap_or(2.0 * it.period);
    let n = 2000;
    let s: Vec<f64> = (0..=n).map(|i| end * i as f64 / n as f64).collect();
    let xe = it.sample(&s)?;
    let k = (1..=n).find(|&i| xe[i - 1][3] >= 1.0 && xe[i][3] < 1.0 && s[i] > 0.0).ok_or(Error::NoBracket("η₂ never returns below 1".into()))?;
    let (a, b) = (xe[k - 1][3] - 1.0, xe[k][3] - 1.0);
    Ok(s[k - 1] + (s[k] - s[k - 1]) * a / (a - b))
}

pub fn run_with_itinerary(cfg: &TripletConfig, eps: f64, it: &Itinerary, opts: &RunOptions) -> Result<Experiment> {
    let sigma: f64 = cfg.sigma_real();
    if (it.sigma - sigma).abs() > 1e-12 {
        return Err(Error::Domain(format!("itinerary at σ = {} for a configuration with σ = {sigma}", it.sigma)));
    }
    let plan = make_plan(cfg, eps)?;
    let k = &plan.consts;
    let s0 = plan.initial_state(&it.start_f64());
    let (spec, datum_report, init) = datum(&plan, &s0)?;
    let slow = slow_horizon(it, opts.horizon)?;
    let exact = exact_run(cfg, &init, slow / k.b, opts)?;
    let grid = &exact.traj.times;
    let s_grid: Vec<f64> = grid.iter().map(|t| t * k.b).collect();
    let xieta = it.sample(&s_grid)?;
    let mut xt = Trajectory::new().with_meta("chart", "xieta");
    for (s, x) in s_grid.iter().zip(&xieta) {
        xt.push(*s, *x);
    }
    let mut effective = compose_chain(&xt, k);
    effective.times = grid.clone();
    let eff64 = integrate6(cfg, k, &s0, grid, opts.effective_tol)?;
    let e3 = eps.powi(3);
    let shadow_limit = 0.01 * 2.0 * plan.slow.a2;
    let shadow_horizon = eff64
        .traj
        .iter()
        .zip(&effective.states)
        .find(|((_, a), b)| (0..4).any(|n| ((a[n] - b[n]) / e3).abs() > shadow_limit))
        .map(|((t, _), _)| t);
    let gronwall = GronwallDiag::new(eps, &exact, &effective);
    let tracking = Tracking::new(&plan, &gronwall);
    let series: Vec<(f64, f64)> = exact.filtered.iter().map(|f| (f.t, f.cal_n)).collect();
    let oscillations = detect_oscillations(&series, &plan, &it.symbols_prescribed, it.period, opts.band_fraction);
    let calibration = calibrate(&plan, &s0, opts.model.measure, opts.tol, 1)?;
    Ok(Experiment {
        config: cfg.clone(),
        eps,
        options: *opts,
        plan,
        itinerary: it.clone(),
        datum: spec,
        datum_report,
        slow_horizon: slow,
        exact,
        effective,
        xieta,
        effective_f64: eff64.traj,
        shadow_horizon,
        gronwall,
        tracking,
        oscillations,
        calibration,
    })
}

/// Manifest written next to the series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config: TripletConfig,
    pub eps: f64,
    pub options: RunOptions,
    pub plan: SynthesisPlan,
    pub itinerary: Itinerary,
    pub datum: DatumSpec,
    pub datum_report: U0Report,
    pub stats: ManifestStats,
    pub diagnostics: Diagnostics,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ManifestStats {
    pub exact: Stats,
    pub effective_f64: Stats,
    pub samples: usize,
    pub slow_horizon: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub energy_drift: f64,
    pub gronwall_sup: f64,
    pub gronwall_sup_s: f64,
    pub gronwall_threshold: f64,
    pub gronwall_first_exceed: Option<f64>,
    pub tracking: Tracking,
    pub calibration: Calibration,
    pub shadow_horizon: Option<f64>,
    pub oscillations: OscillationSummary,
    /// The sufficient smallness thresholds are not met at this `ε`.
    pub above_eps0: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OscillationSummary {
    pub center: f64,
    pub amplitude: f64,
    pub delta: f64,
    pub t_j: Vec<f64>,
    pub t_bar_j: Vec<f64>,
    pub prescribed: Vec<i64>,
    pub realized: Vec<i64>,
    pub realized_prefix: usize,
    pub template_ok: bool,
    pub pass: bool,
}

impl Experiment {
    pub fn manifest(&self) -> Manifest {
        let o = &self.oscillations;
        Manifest {
            config: self.config.clone(),
            eps: self.eps,
            options: self.options,
            plan: self.plan.clone(),
            itinerary: self.itinerary.clone(),
            datum: self.datum.clone(),
            datum_report: self.datum_report.clone(),
            stats: ManifestStats {
                exact: self.exact.traj.stats,
                effective_f64: self.effective_f64.stats,
                samples: self.exact.traj.len(),
                slow_horizon: self.slow_horizon,
                t_end: self.exact.traj.times.last().copied().unwrap_or(0.0),
            },
            diagnostics: Diagnostics {
                energy_drift: self.exact.energy_drift,
                gronwall_sup: self.gronwall.sup,
                gronwall_sup_s: self.gronwall.sup_s,
                gronwall_threshold: self.gronwall.threshold,
                gronwall_first_exceed: self.gronwall.first_exceed,
                tracking: self.tracking,
                calibration: self.calibration,
                shadow_horizon: self.shadow_horizon,
                oscillations: OscillationSummary {
                    center: o.center,
                    amplitude: o.amplitude,
                    delta: o.delta,
                    t_j: o.t_j.clone(),
                    t_bar_j: o.t_bar_j.clone(),
                    prescribed: o.prescribed.clone(),
                    realized: o.realized.clone(),
                    realized_prefix: o.realized_prefix,
                    template_ok: o.template_ok,
                    pass: o.pass,
                },
                above_eps0: self.eps > self.plan.eps0,
            },
            pass: self.pass(),
        }
    }

    /// Oscillations realized in order, energy conserved, calibration matched.
    pub fn pass(&self) -> bool {
        self.oscillations.pass && self.calibration.pass && self.exact.energy_drift <= 1e-9
    }

    /// Writes `manifest.json`, `exact.csv`, `filtered.csv`, `effective.csv` and `plot.gp`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&self.manifest())?)?;
        save_csv(&dir.join("exact.csv"), &self.exact.traj)?;
        let mut w = csv::Writer::from_path(dir.join("filtered.csv"))?;
        w.write_record(["t", "S1", "S2", "S3", "S4", "calN"])?;
        for f in &self.exact.filtered {
            w.write_record([f.t, f.s[0], f.s[1], f.s[2], f.s[3], f.cal_n].map(|x| x.to_string()))?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("effective.csv"))?;
        w.write_record(["t", "S1", "S2", "S3", "S4", "phi123", "phi234", "calN_ref"])?;
        for ((t, s), x) in self.effective.iter().zip(&self.xieta) {
            let row = [t, s[0], s[1], s[2], s[3], s[4], s[5], reference_cal_n(&self.plan, x[3])];
            w.write_record(row.map(|x| x.to_string()))?;
        }
        w.flush()?;
        std::fs::write(dir.join("plot.gp"), plot_script(&self.oscillations))?;
        Ok(())
    }
}

/// Gnuplot script drawing `𝒩(t)` with `I_j` and `E_j` shaded.
pub fn plot_script(o: &OscillationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel 't'");
    let _ = writeln!(s, "set ylabel 'N(t)'");
    for (k, e) in o.intervals.iter().enumerate() {
        let color = match e.phase {
            Phase::Up => "#fbe3e3",
            Phase::Down => "#e3ecfb",
        };
        let _ = writeln!(
            s,
            "set object {} rect from {},graph 0 to {},graph 1 fillcolor rgb '{color}' fillstyle solid noborder behind",
            k + 1,
            e.start,
            e.end
        );
    }
    for (y, name) in [(o.center, "A"), (o.center + o.amplitude, "A+B"), (o.center - o.amplitude, "A-B")] {
        let _ = writeln!(s, "set arrow from graph 0,first {y} to graph 1,first {y} nohead dt 2 # {name}");
    }
    let _ = writeln!(
        s,
        "plot 'exact.csv' using 1:11 with lines lc rgb '#bbbbbb' title 'N', \
         'filtered.csv' using 1:6 with lines lw 2 title 'N (window mean)', \
         'effective.csv' using 1:8 with lines dt 3 title 'effective'"
    );
    s
}

/// What a scaling study fits against `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    /// Peak-to-peak `S₄` of the effective orbit alone.
    EffectiveAmplitude,
    /// Peak-to-peak window mean of `S₄` in the exact run.
    Amplitude,
    /// Peak-to-peak window mean of `𝒩` in the exact run.
    NormDeviation,
    /// Time between the first two upward center crossings of `𝒩`.
    Period,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub quantity: Quantity,
    pub eps: Vec<f64>,
    pub values: Vec<f64>,
    pub exponent: f64,
    pub intercept: f64,
}

/// Least-squares slope and intercept of `ln y` against `ln x`.
pub fn loglog_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// One measurement for a scaling study, on the first oscillation of `it`.
pub fn measure(cfg: &TripletConfig, eps: f64, it: &Itinerary, quantity: Quantity, opts: &RunOptions) -> Result<f64> {
    if quantity == Quantity::EffectiveAmplitude {
        let plan = make_plan(cfg, eps)?;
        let end = slow_horizon(it, Horizon::FirstOscillation)?;
        let n = 4000;
        let s: Vec<f64> = (0..=n).map(|i| end * i as f64 / n as f64).collect();
        let s4: Vec<f64> = it.sample(&s)?.iter().map(|x| xieta_to6(&plan.consts, x)[3]).collect();
        return Ok(peak_to_peak(s4.into_iter()));
    }
    let opts = RunOptions { horizon: Horizon::FirstOscillation, ..*opts };
    let ex = run_exact_only(cfg, eps, it, &opts)?;
    Ok(match quantity {
        Quantity::Amplitude => peak_to_peak(ex.1.filtered.iter().map(|f| f.s[3])),
        Quantity::NormDeviation => peak_to_peak(ex.1.filtered.iter().map(|f| f.cal_n)),
        Quantity::Period => {
            let series: Vec<(f64, f64)> = ex.1.filtered.iter().map(|f| (f.t, f.cal_n)).collect();
            let rep = detect_oscillations(&series, &ex.0, &it.symbols_prescribed, it.period, opts.band_fraction);
            match rep.t_j.as_slice() {
                [a, b, ..] => b - a,
                _ => f64::NAN,
            }
        }
        Quantity::EffectiveAmplitude => unreachable!(),
    })
}

/// Exact run of the synthesized datum alone, without the effective comparisons.
pub fn run_exact_only(cfg: &TripletConfig, eps: f64, it: &Itinerary, opts: &RunOptions) -> Result<(SynthesisPlan, ExactRun)> {
    let plan = make_plan(cfg, eps)?;
    let s0 = plan.initial_state(&it.start_f64());
    let (_, _, init) = datum(&plan, &s0)?;
    let slow = slow_horizon(it, opts.horizon)?;
    let run = exact_run(cfg, &init, slow / plan.consts.b, opts)?;
    Ok((plan, run))
}

fn peak_to_peak(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    hi - lo
}

/// Fits the exponent of `quantity` over `eps_list` for a fixed itinerary.
pub fn scaling_study(cfg: &TripletConfig, eps_list: &[f64], it: &Itinerary, quantity: Quantity, opts: &RunOptions) -> Result<ScalingStudy> {
    if eps_list.len() < 3 {
        return Err(Error::Domain("a scaling study needs at least three values of ε".into()));
    }
    let values = eps_list.iter().map(|&e| measure(cfg, e, it, quantity, opts)).collect::<Result<Vec<_>>>()?;
    let (exponent, intercept) = loglog_fit(eps_list, &values);
    Ok(ScalingStudy { quantity, eps: eps_list.to_vec(), values, exponent, intercept })
}
