use kirchhoff::cascade::h_pendulum;
use kirchhoff::DoubleDouble as DD;
use kirchhoff::pendulum::melnikov::{melnikov_slope_fd, quad};
use kirchhoff::pendulum::orbit::period_quadrature;
use kirchhoff::pendulum::periodic::flow;
use kirchhoff::pendulum::{
    continue_periodic_orbit, extract_symbols, find_a0, j_integral, j_limit, melnikov, melnikov_slope0, PendulumOrbit, Separatrix,
};
use proptest::prelude::*;

const PI: f64 = std::f64::consts::PI;

#[test]
fn small_energy_period_tends_to_two_pi() {
    let t = PendulumOrbit::<f64>::new(1e-6).unwrap().period;
    assert!((t - 2.0 * PI).abs() < 1e-4);
    assert!(PendulumOrbit::<f64>::new(0.0).is_err());
    assert!(PendulumOrbit::<f64>::new(2.0).is_err());
}

#[test]
fn unit_energy_period() {
    let t = PendulumOrbit::<f64>::new(1.0).unwrap().period;
    assert!((t - 7.4163).abs() < 1e-4, "{t}");
    assert!((t - period_quadrature(1.0).unwrap()).abs() < 1e-12);
}

#[test]
fn double_double_orbit_agrees() {
    let o = PendulumOrbit::<f64>::new(0.7).unwrap();
    let d = PendulumOrbit::<DD>::new(DD::c(0.7)).unwrap();
    assert!((o.period - (d.period.hi() + d.period.lo())).abs() < 1e-14);
    let (x, y) = o.eval(1.3);
    let (xd, yd) = d.eval(DD::c(1.3));
    assert!((x - xd.hi()).abs() < 1e-14 && (y - yd.hi()).abs() < 1e-14);
}

proptest! {
    #[test]
    fn libration_identities(a in 0.01f64..1.99, t in -30.0f64..30.0) {
        let o = PendulumOrbit::<f64>::new(a).unwrap();
        let (x0, y0) = o.eval(0.0);
        prop_assert!(x0.abs() < 1e-15);
        prop_assert!((y0 - (2.0 * a).sqrt()).abs() < 1e-14);
        let (x, y) = o.eval(t);
        prop_assert!((h_pendulum(x, y) - a).abs() <= 1e-11);
        let (xm, ym) = o.eval(-t);
        prop_assert!((xm + x).abs() < 1e-12 && (ym - y).abs() < 1e-12);
        let (xp, yp) = o.eval(t + o.period);
        prop_assert!((xp - x).abs() < 1e-10 && (yp - y).abs() < 1e-10);
    }

    #[test]
    fn separatrix_sits_on_the_top_level(s in -8.0f64..8.0) {
        let q = Separatrix::q(s);
        let p = Separatrix::p(s);
        prop_assert!((h_pendulum(q, p) - 2.0).abs() < 1e-12);
        prop_assert!((Separatrix::sin_q(s) - q.sin()).abs() < 1e-12);
    }
}

#[test]
fn libration_solves_the_pendulum() {
    let o = PendulumOrbit::<f64>::new(1.3).unwrap();
    let h = 1e-5;
    for i in 0..20 {
        let t = 0.37 * i as f64;
        let (xp, yp) = o.eval(t + h);
        let (xm, ym) = o.eval(t - h);
        let (x, y) = o.eval(t);
        assert!(((xp - xm) / (2.0 * h) - y).abs() < 1e-8);
        assert!(((yp - ym) / (2.0 * h) + x.sin()).abs() < 1e-8);
    }
}

#[test]
fn melnikov_is_odd_and_vanishes_at_zero() {
    for a in [0.3, 1.0, 1.7] {
        assert!(melnikov(0.0, a).unwrap().abs() <= 1e-10);
        for tau in [0.4, 1.1, 2.5] {
            let (p, m) = (melnikov(tau, a).unwrap(), melnikov(-tau, a).unwrap());
            assert!((p + m).abs() <= 1e-10 * p.abs().max(1.0));
        }
    }
}

#[test]
fn melnikov_slope_matches_j() {
    for a in [0.2, 0.9, 1.6] {
        let j = melnikov_slope0(a).unwrap();
        let fd = melnikov_slope_fd(0.0, a, 1e-3).unwrap();
        assert!((j - fd).abs() <= 1e-6, "a = {a}: {j} vs {fd}");
    }
}

#[test]
fn j_limit_is_four_thirds() {
    assert!((j_limit().unwrap() - 4.0 / 3.0).abs() <= 1e-8);
    let j = j_integral(1.999).unwrap();
    assert!((j - 4.0 / 3.0).abs() <= 0.02 * 4.0 / 3.0, "{j}");
    // g(s)² has the antiderivative 4/3 · tanh³ s.
    let part = quad(|s| Separatrix::sin_q(s).powi(2), 0.0, 1.0).unwrap();
    assert!((part - 4.0 / 3.0 * 1f64.tanh().powi(3)).abs() < 1e-12);
}

#[test]
fn a0_is_the_window_edge() {
    let r = find_a0().unwrap();
    assert!((r.a0 - 0.14565595279040278).abs() < 1e-9, "{}", r.a0);
    assert!((r.j_at_a0 - 2.0 / 3.0).abs() < 1e-6);
    assert!((r.period - PendulumOrbit::<f64>::new(r.a0).unwrap().period).abs() < 1e-12);
    for a in [r.a0 + 1e-3, 0.5, 1.0, 1.5, 1.99] {
        assert!((j_integral(a).unwrap() - 4.0 / 3.0).abs() <= 2.0 / 3.0);
    }
}

#[test]
fn symbols_from_return_times() {
    assert_eq!(extract_symbols(&[23.1], 7.4163), vec![3]);
    assert_eq!(extract_symbols(&[23.1, 30.0, 60.0], 7.4163), vec![3, 0, 4]);
    assert!(extract_symbols::<f64>(&[], 1.0).is_empty());
}

#[test]
fn uncoupled_orbit_is_the_product_orbit() {
    let a = 0.6;
    let orb = continue_periodic_orbit(0.0, a).unwrap();
    let p = PendulumOrbit::<f64>::new(a).unwrap();
    assert!((orb.period - p.period).abs() < 1e-14);
    assert!((orb.x0[1] - (2.0 * a).sqrt()).abs() < 1e-12);
    assert!(orb.x0[3].abs() < 1e-12);
    for i in 0..8 {
        let t = p.period * i as f64 / 8.0;
        let x = orb.eval(t).unwrap();
        let (xi, eta) = p.eval(t);
        assert!((x[0] - xi).abs() < 1e-10 && (x[1] - eta).abs() < 1e-10);
        assert!((x[2] - PI).abs() < 1e-10 && x[3].abs() < 1e-10);
    }
}

#[test]
fn continued_orbit_is_periodic_and_hyperbolic() {
    let a0 = find_a0().unwrap().a0;
    let orb = continue_periodic_orbit(0.05, a0).unwrap();
    let back = flow(&orb.system(), &orb.x0, orb.period).unwrap();
    let gap = back.iter().zip(&orb.x0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 1e-10, "{gap:e}");
    assert!((orb.floquet.det - 1.0).abs() < 1e-8);
    let [mu, inv] = orb.floquet.hyperbolic;
    assert!(mu > 1.0 && (mu * inv - 1.0).abs() < 1e-6);
    for t in orb.floquet.trivial {
        assert!((t - 1.0).abs() < 1e-8);
    }
    let d = orb.diagnostics(200).unwrap();
    assert!(d.reversibility < 1e-10 && d.periodicity < 1e-10);
    assert!(d.c1_distance < 0.1);
}
