use kirchhoff::field::{Flavor, SpectralField};
use kirchhoff::ode::Dop853;
use kirchhoff::spectral::{
    evolve_kirchhoff, integrate_kirchhoff, pack_complex, resonant_rhs_packed, superaction_rate, unpack_complex, write_csv, z3_field,
    z5_field, KirchhoffModel, PhysicalState, CSV_HEADER,
};
use kirchhoff::{Measure, TripletConfig};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn cfg() -> TripletConfig {
    TripletConfig::new(2, 3, 1).unwrap()
}

fn physical(cfg: &TripletConfig, u: [Complex<f64>; 4], v: [Complex<f64>; 4]) -> PhysicalState<f64> {
    PhysicalState::new(SpectralField::physical(cfg.alphas, u), SpectralField::physical(cfg.alphas, v), 0.0)
}

fn random_state(rng: &mut ChaCha8Rng, cfg: &TripletConfig, amp: f64) -> PhysicalState<f64> {
    let mut draw = || c(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp));
    let u = std::array::from_fn(|_| draw());
    let v = std::array::from_fn(|_| draw());
    physical(cfg, u, v)
}

fn random_pair(rng: &mut ChaCha8Rng, alphas: [i64; 4]) -> SpectralField<f64> {
    let mut draw = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    SpectralField { alphas, pos: std::array::from_fn(|_| draw()), neg: std::array::from_fn(|_| draw()), flavor: Flavor::ConjugatePair }
}

#[test]
fn rhs_of_zero_is_zero() {
    let cfg = cfg();
    let z = [c(0.0, 0.0); 4];
    let d = KirchhoffModel::default().rhs(&cfg, &physical(&cfg, z, z));
    assert_eq!(d.u.pos, z);
    assert_eq!(d.v.pos, z);
}

#[test]
fn single_mode_rhs_and_energy() {
    let cfg = cfg();
    let eps = 0.3;
    let z = [c(0.0, 0.0); 4];
    let mut u = z;
    u[0] = c(eps / 2.0, 0.0);
    let s = physical(&cfg, u, z);
    let a1 = 2.0f64;
    let g = 2.0 * a1 * a1 * (eps / 2.0f64).powi(2);
    let model = KirchhoffModel::default();
    let d = model.rhs(&cfg, &s);
    assert!((d.v.pos[0].re + a1 * a1 * (1.0 + g) * eps / 2.0).abs() < 1e-15);
    assert!((model.energy(&cfg, &s) - (0.5 * g + 0.25 * g * g)).abs() < 1e-15);
    let weighted = KirchhoffModel { measure: Measure::Weighted, linearize: false };
    let gw = std::f64::consts::TAU * g;
    assert!((weighted.energy(&cfg, &s) - (0.5 * g + 0.25 * gw * g)).abs() < 1e-14);
}

#[test]
fn linear_flow_matches_closed_form() {
    let cfg = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let init = random_state(&mut rng, &cfg, 0.5);
    let model = KirchhoffModel { linearize: true, ..Default::default() };
    let t = 37.0;
    let (end, _) = evolve_kirchhoff(&cfg, model, &init, t, 1e-13).unwrap();
    for n in 0..4 {
        let k = cfg.alphas[n] as f64;
        let (cs, sn) = ((k * t).cos(), (k * t).sin());
        let u = init.u.pos[n] * cs + init.v.pos[n] * (sn / k);
        let v = -init.u.pos[n] * (k * sn) + init.v.pos[n] * cs;
        assert!((end.u.pos[n] - u).norm() < 1e-10, "u mode {n}");
        assert!((end.v.pos[n] - v).norm() < 1e-10, "v mode {n}");
    }
}

#[test]
fn energy_conserved_over_thousand_time_units() {
    let cfg = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let init = random_state(&mut rng, &cfg, 0.05);
    let model = KirchhoffModel::default();
    let times: Vec<f64> = (0..=100).map(|i| 10.0 * i as f64).collect();
    // At tol 1e-11 this run drifts by 3e-9; one decade tighter stays inside 1e-9.
    let tr = integrate_kirchhoff(&cfg, model, &init, &times, 1e-12).unwrap();
    let e0 = tr.states[0].energy;
    let drift = tr.states.iter().map(|s| ((s.energy - e0) / e0).abs()).fold(0.0, f64::max);
    assert!(drift <= 1e-9, "drift {drift:e}");
    assert!(tr.stats.accepted > 10_000, "steps {}", tr.stats.accepted);
}

#[test]
fn forward_then_backward_returns() {
    let cfg = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let init = random_state(&mut rng, &cfg, 0.1);
    let model = KirchhoffModel::default();
    let (mid, _) = evolve_kirchhoff(&cfg, model, &init, 20.0, 1e-13).unwrap();
    let (back, _) = evolve_kirchhoff(&cfg, model, &mid, 0.0, 1e-13).unwrap();
    let gap = back.u.distance(&init.u).max(back.v.distance(&init.v));
    assert!(gap < 1e-8, "gap {gap:e}");
}

#[test]
fn csv_export_has_the_documented_header() {
    let cfg = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let init = random_state(&mut rng, &cfg, 0.1);
    let tr = integrate_kirchhoff(&cfg, KirchhoffModel::default(), &init, &[0.0, 0.5, 1.0], 1e-11).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, &tr).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, CSV_HEADER.join(","));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn resonant_fields_vanish_at_zero() {
    let z = SpectralField::<f64>::zeros([2, 5, 7, 12], Flavor::ConjugatePair);
    let (a, b) = z3_field(&z);
    let (c5, d5) = z5_field(&z);
    for f in [a, b, c5, d5] {
        assert_eq!(f.sobolev_norm(0.0), 0.0);
    }
}

/// Right side of the superaction law from `Bₙ` alone: the two ordered sums
/// over resonant pairs of the support.
fn truncated_superaction_law(u: &SpectralField<f64>) -> [f64; 4] {
    let b = u.b_products();
    let al = u.alphas;
    let theta = |i: usize, j: usize, l: usize| (b[i] * b[j] * b[l].conj()).im;
    std::array::from_fn(|l| {
        let mut acc = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let (a, bb, lam) = (al[i] as f64, al[j] as f64, al[l] as f64);
                if al[i] + al[j] == al[l] {
                    acc -= 3.0 / 16.0 * theta(i, j, l) * a * bb * lam;
                }
                if al[j] + al[l] == al[i] {
                    acc += 3.0 / 8.0 * theta(j, l, i) * a * bb * lam;
                }
            }
        }
        acc
    })
}

#[test]
fn z5_superaction_law_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..200 {
        let m = rng.gen_range(2..6);
        let cfg = TripletConfig::new(m, m + rng.gen_range(1..9), 1).unwrap();
        let u = random_pair(&mut rng, cfg.alphas);
        let (w1, w2) = z5_field(&u);
        let got = superaction_rate(&u, &w1, &w2);
        let want = truncated_superaction_law(&u);
        let scale = want.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for n in 0..4 {
            assert!((got[n].re - want[n]).abs() <= 1e-12 * scale, "trial {trial} n {n}: {} vs {}", got[n].re, want[n]);
            assert!(got[n].im.abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn z3_induces_no_superaction_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..200 {
        let u = random_pair(&mut rng, [2, 5, 7, 12]);
        let (w1, w2) = z3_field(&u);
        let rate = superaction_rate(&u, &w1, &w2);
        let scale = w1.sobolev_norm(0.0) * u.sobolev_norm(0.0);
        for r in rate {
            assert!(r.norm() <= 1e-15 * scale, "{r}");
        }
    }
}

#[test]
fn resonant_model_conserves_half_norm_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let alphas = [2, 5, 7, 12];
    let mut u = random_pair(&mut rng, alphas);
    for n in 0..4 {
        u.pos[n] = u.pos[n] * 0.1;
        u.neg[n] = u.neg[n] * 0.1;
    }
    let h = |u: &SpectralField<f64>| {
        let s = u.superactions();
        (0..4).map(|n| alphas[n] as f64 * s[n]).sum::<f64>()
    };
    let h0 = h(&u);
    let sol = Dop853::new(1e-12, 1e-15)
        .solve(|_, y: &[f64; 16], dy| resonant_rhs_packed(alphas, y, dy), 0.0, pack_complex(&u), 10.0)
        .unwrap();
    let end = unpack_complex(alphas, &sol.y);
    assert!(((h(&end) - h0) / h0).abs() <= 1e-10);
    assert!(end.superactions().iter().zip(u.superactions()).any(|(a, b)| (a - b).abs() > 1e-8), "dynamics should exchange energy");
}

proptest! {
    #[test]
    fn pack_round_trip(re in prop::array::uniform16(-1.0f64..1.0)) {
        let cfg = TripletConfig::new(2, 3, 1).unwrap();
        let st = PhysicalState::unpack(cfg.alphas, &re, 0.0);
        prop_assert_eq!(st.pack(), re);
        prop_assert!(st.u.reality_defect() == 0.0);
        let f = st.complex_field();
        let o = st.observables();
        prop_assert!((o.cal_n - st.cal_n()).abs() <= 1e-13 * st.cal_n().max(1e-300));
        prop_assert!((f.observables().n1 - o.n1).abs() <= 1e-13 * o.n1.max(1e-300));
    }
}
