//! `kirchhoff`: command-line driver for configuration, simulation, the
//! pendulum horseshoe, datum synthesis and verification runs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use kirchhoff::cascade::{first_integrals, half_norm, integrate_xieta, XiEtaSystem};
use kirchhoff::config::{Measure, TripletConfig};
use kirchhoff::harness::{self, Horizon, Quantity, RunOptions};
use kirchhoff::pendulum::{self, Itinerary};
use kirchhoff::spectral::KirchhoffModel;
use kirchhoff::synthesis::{build_u0, make_plan, verify_u0, DatumSpec};
use kirchhoff::trajectory::{linspace, Trajectory};
use kirchhoff::Error;

#[derive(Parser)]
#[command(name = "kirchhoff", version, about = "Finite-mode Kirchhoff dynamics and the coupled-pendulum horseshoe")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the frequency configuration and its derived constants.
    Config(RunArgs),
    /// Integrate the truncated effective system.
    SimulateEffective(RunArgs),
    /// Integrate the exact finite-mode system from a synthesized datum.
    SimulateKirchhoff(RunArgs),
    /// Tabulate the Melnikov function.
    Melnikov(RunArgs),
    /// Periodic orbit, transversality certificate and itinerary targeting.
    Horseshoe(RunArgs),
    /// Build the initial datum for a targeted orbit.
    Synthesize(RunArgs),
    /// Full pipeline: targeting, synthesis, exact run, diagnostics.
    Verify(RunArgs),
    /// Scaling study over several values of ε.
    Sweep(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum MeasureArg {
    Normalized,
    Weighted,
}

/// Every setting can come from the flat config file; flags win.
#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
struct RunArgs {
    /// Flat key-value config file (TOML).
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<i64>,
    #[arg(long)]
    p: Option<i64>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    /// Coupling of the pendulum system; defaults to m/p.
    #[arg(long)]
    sigma: Option<f64>,
    /// Energy of the pendulum orbit; defaults to the computed a₀.
    #[arg(long)]
    a: Option<f64>,
    /// Absolute return symbols, comma separated.
    #[arg(long, value_delimiter = ',')]
    itinerary: Option<Vec<i64>>,
    /// Symbols relative to the measured M₀, used when no itinerary is given.
    #[arg(long, value_delimiter = ',')]
    offsets: Option<Vec<i64>>,
    /// ε values for `sweep`.
    #[arg(long, value_delimiter = ',')]
    eps_list: Option<Vec<f64>>,
    /// Start point `ξ₁,η₁,ξ₂,η₂` for the simulations.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    start: Option<Vec<f64>>,
    /// Slow-time horizon for the simulations.
    #[arg(long)]
    slow_time: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    measure: Option<MeasureArg>,
    /// Drop the nonlinear coefficient.
    #[arg(long)]
    linearize: Option<bool>,
    #[arg(long)]
    delta1: Option<f64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => { $( if $dst.$f.is_none() { $dst.$f = $src.$f.clone(); } )* };
}

impl RunArgs {
    fn resolve(mut self) -> Result<Self, Error> {
        if let Some(path) = self.config.clone() {
            let text = std::fs::read_to_string(&path)?;
            let file: RunArgs = toml::from_str(&text).map_err(|e| Error::Toml(format!("{}: {e}", path.display())))?;
            overlay!(self, file; m, p, d, eps, sigma, a, itinerary, offsets, eps_list, start, slow_time, tol, samples, out, measure, linearize, delta1);
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::Config(format!("tol = {t} must be positive")));
            }
        }
        if let Some(e) = self.eps {
            if !(e > 0.0) {
                return Err(Error::Config(format!("eps = {e} must be positive")));
            }
        }
        Ok(self)
    }

    fn triplet(&self) -> Result<TripletConfig, Error> {
        let mut cfg = TripletConfig::new(self.m.unwrap_or(2), self.p.unwrap_or(25), self.d.unwrap_or(1))?;
        if let Some(d1) = self.delta1 {
            cfg.delta1 = d1;
        }
        Ok(cfg)
    }

    fn eps(&self) -> f64 {
        self.eps.unwrap_or(0.05)
    }

    fn out(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn model(&self) -> KirchhoffModel {
        let measure = match self.measure.unwrap_or(MeasureArg::Normalized) {
            MeasureArg::Normalized => Measure::Normalized,
            MeasureArg::Weighted => Measure::Weighted,
        };
        KirchhoffModel { measure, linearize: self.linearize.unwrap_or(false) }
    }

    fn options(&self) -> RunOptions {
        let mut o = RunOptions { model: self.model(), ..RunOptions::default() };
        if let Some(t) = self.tol {
            o.tol = t;
        }
        o
    }

    fn a(&self) -> Result<f64, Error> {
        match self.a {
            Some(a) => Ok(a),
            None => Ok(pendulum::find_a0()?.a0),
        }
    }

    fn start(&self) -> Result<[f64; 4], Error> {
        match &self.start {
            Some(v) if v.len() == 4 => Ok([v[0], v[1], v[2], v[3]]),
            Some(v) => Err(Error::Config(format!("start needs 4 values, got {}", v.len()))),
            None => Ok([0.0, (2.0 * self.a()?).sqrt(), 0.0, 1.9]),
        }
    }

    /// Targets the configured itinerary at `σ`.
    fn itinerary(&self, sigma: f64) -> Result<Itinerary, Error> {
        match (&self.itinerary, &self.offsets) {
            (Some(m), _) => pendulum::target_symbols(sigma, m),
            (None, Some(o)) => pendulum::target_itinerary(sigma, o),
            (None, None) => pendulum::target_itinerary(sigma, &[1, 3, 2]),
        }
    }
}

/// Exit code 2: the run completed but a diagnostic failed.
struct Outcome(bool);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(Outcome(true)) => ExitCode::SUCCESS,
        Ok(Outcome(false)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<Outcome, Error> {
    match cmd {
        Command::Config(a) => config(a.resolve()?),
        Command::SimulateEffective(a) => simulate_effective(a.resolve()?),
        Command::SimulateKirchhoff(a) => simulate_kirchhoff(a.resolve()?),
        Command::Melnikov(a) => melnikov(a.resolve()?),
        Command::Horseshoe(a) => horseshoe(a.resolve()?),
        Command::Synthesize(a) => synthesize(a.resolve()?),
        Command::Verify(a) => verify(a.resolve()?),
        Command::Sweep(a) => sweep(a.resolve()?),
    }
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value)?)?;
    Ok(path)
}

fn config(a: RunArgs) -> Result<Outcome, Error> {
    let cfg = a.triplet()?;
    let [a1, a2, a3, a4] = cfg.alphas;
    println!("alpha = ({a1},{a2},{a3},{a4})");
    println!("detA = {}", cfg.det_a);
    println!("sigma = {}  gamma = {}  mu1 = {}  mu2 = {}", cfg.sigma, cfg.gamma, cfg.mu1, cfg.mu2);
    print!("{}", cfg.to_toml()?);
    Ok(Outcome(cfg.check().is_ok() && cfg.triplets().admissible))
}

fn simulate_effective(a: RunArgs) -> Result<Outcome, Error> {
    let cfg = a.triplet()?;
    let plan = make_plan(&cfg, a.eps())?;
    let start = a.start()?;
    let slow = a.slow_time.unwrap_or(50.0);
    let n = a.samples.unwrap_or(2000);
    let s = linspace(0.0, slow, n);
    let tol = a.tol.unwrap_or(1e-12);
    let (xe, stats) = integrate_xieta(XiEtaSystem::new(&cfg), &start, &s, tol)?;
    let mut tr = Trajectory::new().with_meta("chart", "xieta");
    tr.stats = stats;
    for (t, x) in s.iter().zip(xe) {
        tr.push(*t, x);
    }
    let six = kirchhoff::cascade::compose_chain(&tr, &plan.consts);
    let out = a.out();
    std::fs::create_dir_all(&out)?;
    let mut w = csv::Writer::from_path(out.join("effective.csv"))?;
    w.write_record(["t", "S1", "S2", "S3", "S4", "phi123", "phi234", "xi1", "eta1", "xi2", "eta2", "E1", "E2", "half_norm"])?;
    let (e10, e20) = first_integrals(&six.states[0]);
    let h0 = half_norm(&cfg, &six.states[0]);
    let mut drift = 0.0f64;
    for ((t, st), x) in six.iter().zip(&tr.states) {
        let (e1, e2) = first_integrals(st);
        let h = half_norm(&cfg, st);
        drift = drift.max(((e1 - e10) / e10).abs()).max(((e2 - e20) / e20).abs()).max(((h - h0) / h0).abs());
        let row = [t, st[0], st[1], st[2], st[3], st[4], st[5], x[0], x[1], x[2], x[3], e1, e2, h];
        w.write_record(row.map(|v| v.to_string()))?;
    }
    w.flush()?;
    let min_s = six.states.iter().flat_map(|s| s[..4].iter().copied()).fold(f64::INFINITY, f64::min);
    println!("samples = {}  t_end = {}  steps = {:?}", six.len(), six.times.last().unwrap_or(&0.0), six.stats);
    println!("first-integral drift = {drift:.3e}  min S = {min_s:.6e}  q2/2 = {:.6e}", plan.q2 / 2.0);
    println!("wrote {}", out.join("effective.csv").display());
    Ok(Outcome(drift <= 1e-9 && min_s > 0.0))
}

fn simulate_kirchhoff(a: RunArgs) -> Result<Outcome, Error> {
    let cfg = a.triplet()?;
    let plan = make_plan(&cfg, a.eps())?;
    let s0 = plan.initial_state(&a.start()?);
    let (_, report, init) = harness::datum(&plan, &s0)?;
    let opts = a.options();
    let slow = a.slow_time.unwrap_or(1.0);
    let run = harness::exact_run(&cfg, &init, slow / plan.consts.b, &opts)?;
    let out = a.out();
    std::fs::create_dir_all(&out)?;
    kirchhoff::spectral::save_csv(&out.join("exact.csv"), &run.traj)?;
    let mut w = csv::Writer::from_path(out.join("filtered.csv"))?;
    w.write_record(["t", "S1", "S2", "S3", "S4", "calN"])?;
    for f in &run.filtered {
        w.write_record([f.t, f.s[0], f.s[1], f.s[2], f.s[3], f.cal_n].map(|x| x.to_string()))?;
    }
    w.flush()?;
    println!("samples = {}  t_end = {}  steps = {:?}", run.traj.len(), run.traj.times.last().unwrap_or(&0.0), run.traj.stats);
    println!("energy drift = {:.3e}  datum identities pass = {}", run.energy_drift, report.pass);
    println!("wrote {}", out.display());
    Ok(Outcome(run.energy_drift <= 1e-9 && report.pass))
}

fn melnikov(a: RunArgs) -> Result<Outcome, Error> {
    let a0 = pendulum::find_a0()?;
    let energy = a.a.unwrap_or(a0.a0);
    let sigma = sigma_of(&a)?;
    println!("a0 = {:.15}  J(a0) = {:.12}  T(a0) = {:.12}", a0.a0, a0.j_at_a0, a0.period);
    println!("a = {energy}  J(a) = {:.12}  M'(0) = {:.12}", pendulum::j_integral(energy)?, pendulum::melnikov_slope0(energy)?);
    println!("{:>8} {:>20} {:>20}", "tau", "M(tau)", "sigma*M(tau)");
    let mut ok = true;
    for k in -12..=12 {
        let tau = k as f64 * 0.25;
        let m = pendulum::melnikov(tau, energy)?;
        if k == 0 {
            ok &= m.abs() <= 1e-10;
        }
        println!("{tau:>8.2} {m:>20.12e} {:>20.12e}", sigma * m);
    }
    Ok(Outcome(ok))
}

#[derive(Serialize)]
struct HorseshoeReport {
    orbit: pendulum::PeriodicOrbit,
    diagnostics: pendulum::periodic::OrbitDiagnostics,
    transversality: pendulum::Transversality,
    itinerary: Itinerary,
}

fn sigma_of(a: &RunArgs) -> Result<f64, Error> {
    match a.sigma {
        Some(s) => Ok(s),
        None => Ok(a.triplet()?.sigma_real()),
    }
}

fn horseshoe(a: RunArgs) -> Result<Outcome, Error> {
    let sigma = sigma_of(&a)?;
    let energy = a.a()?;
    let orbit = pendulum::continue_periodic_orbit(sigma, energy)?;
    let diagnostics = orbit.diagnostics(400)?;
    let taus: Vec<f64> = (-4..=4).map(|k| k as f64 * 0.25).collect();
    let transversality = pendulum::transversality_check(&orbit, &taus)?;
    let itinerary = if a.a.is_some() {
        let t = pendulum::Targeter::new(orbit.clone())?;
        match (&a.itinerary, &a.offsets) {
            (Some(m), _) => t.target_symbols(m)?,
            (None, o) => t.target(o.as_deref().unwrap_or(&[1, 3, 2]))?,
        }
    } else {
        a.itinerary(sigma)?
    };
    println!("sigma = {sigma}  a = {energy}  T = {}", orbit.period);
    println!("multipliers: hyperbolic {:?}  trivial {:?}", orbit.floquet.hyperbolic, orbit.floquet.trivial);
    println!("C1 distance = {:.4e}  reversibility = {:.3e}  periodicity = {:.3e}", diagnostics.c1_distance, diagnostics.reversibility, diagnostics.periodicity);
    println!("tau* = {:.3e}  gap slope = {:.6e}  first order = {:.6e}", transversality.tau_star, transversality.slope, transversality.first_order_slope);
    println!("M0 = {}  prescribed {:?}  realized {:?}  theta {:?}", itinerary.m0, itinerary.symbols_prescribed, itinerary.symbols_realized, itinerary.theta_j);
    let ok = itinerary.realized();
    let path = write_json(&a.out(), "horseshoe.json", &HorseshoeReport { orbit, diagnostics, transversality, itinerary })?;
    println!("wrote {}", path.display());
    Ok(Outcome(ok))
}

#[derive(Serialize)]
struct SynthesisReport {
    plan: kirchhoff::synthesis::SynthesisPlan,
    itinerary: Itinerary,
    datum: DatumSpec,
    u0: kirchhoff::SpectralField<f64>,
    report: kirchhoff::synthesis::U0Report,
}

fn synthesize(a: RunArgs) -> Result<Outcome, Error> {
    let cfg = a.triplet()?;
    let plan = make_plan(&cfg, a.eps())?;
    let itinerary = a.itinerary(cfg.sigma_real())?;
    let s0 = plan.initial_state(&itinerary.start_f64());
    let datum = DatumSpec::new(&plan, &s0)?;
    let u0 = build_u0(&cfg, &datum);
    let report = verify_u0(&u0, &plan, &datum);
    println!("eps = {}  eps0 = {:.6}  admissible = {:?}", plan.eps, plan.eps0, plan.flags);
    println!("S residuals {:?}  phase residuals {:?}  c residuals {:?}", report.s_residual, report.phi_residual, report.c_residual);
    let ok = report.pass;
    let path = write_json(&a.out(), "u0.json", &SynthesisReport { plan, itinerary, datum, u0, report })?;
    println!("wrote {}", path.display());
    Ok(Outcome(ok))
}

fn verify(a: RunArgs) -> Result<Outcome, Error> {
    let cfg = a.triplet()?;
    let it = a.itinerary(cfg.sigma_real())?;
    let mut opts = a.options();
    if let Some(s) = a.slow_time {
        opts.horizon = Horizon::Slow(s);
    }
    let ex = harness::run_with_itinerary(&cfg, a.eps(), &it, &opts)?;
    let out = a.out();
    ex.save(&out)?;
    let o = &ex.oscillations;
    println!("itinerary: prescribed {:?}  realized in (xi,eta) {:?}", it.symbols_prescribed, it.symbols_realized);
    println!("oscillations: realized {:?}  prefix {}/{}  template ok {}", o.realized, o.realized_prefix, o.prescribed.len(), o.template_ok);
    println!("gronwall sup = {:.3e} (threshold {:.3e})  tracking {:.3e} (limit {:.3e})", ex.gronwall.sup, ex.gronwall.threshold, ex.tracking.sup_scaled, ex.tracking.limit);
    println!("calibration gap = {:.3e}  energy drift = {:.3e}", ex.calibration.relative_gap, ex.exact.energy_drift);
    println!("wrote {}", out.display());
    Ok(Outcome(ex.pass()))
}

#[derive(Serialize)]
struct SweepReport {
    studies: Vec<harness::ScalingStudy>,
    expected: Vec<(Quantity, f64)>,
    pass: bool,
}

fn sweep(a: RunArgs) -> Result<Outcome, Error> {
    let cfg = a.triplet()?;
    let it = a.itinerary(cfg.sigma_real())?;
    let eps = a.eps_list.clone().unwrap_or_else(|| vec![0.04, 0.06, 0.09]);
    if eps.len() < 3 {
        return Err(Error::Config("sweep needs at least three values in eps-list".into()));
    }
    let opts = a.options();
    let expected = [(Quantity::EffectiveAmplitude, 3.0), (Quantity::Amplitude, 3.0), (Quantity::NormDeviation, 2.0), (Quantity::Period, -3.0)];
    let jobs: Vec<(Quantity, f64)> = expected.iter().flat_map(|&(q, _)| eps.iter().map(move |&e| (q, e))).collect();
    let values = jobs.par_iter().map(|&(q, e)| harness::measure(&cfg, e, &it, q, &opts)).collect::<Result<Vec<f64>, Error>>()?;
    let mut studies = Vec::new();
    let mut pass = true;
    for (k, &(q, want)) in expected.iter().enumerate() {
        let v = values[k * eps.len()..(k + 1) * eps.len()].to_vec();
        let (exponent, intercept) = harness::loglog_fit(&eps, &v);
        let ok = (exponent - want).abs() <= 0.15;
        pass &= ok;
        println!("{q:?}: exponent {exponent:.4} (expected {want}) {}", if ok { "ok" } else { "off" });
        studies.push(harness::ScalingStudy { quantity: q, eps: eps.clone(), values: v, exponent, intercept });
    }
    let path = write_json(&a.out(), "sweep.json", &SweepReport { studies, expected: expected.to_vec(), pass })?;
    println!("wrote {}", path.display());
    Ok(Outcome(pass))
}
