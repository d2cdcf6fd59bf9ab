use kirchhoff::ode::{find_root, Control, Dop853, JetField, StepView, Taylor};
use kirchhoff::DoubleDouble as D;
use num_traits::Float;

fn oscillator(_t: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
    dy[0] = y[1];
    dy[1] = -y[0];
}

fn van_der_pol(_t: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
    dy[0] = y[1];
    dy[1] = (1.0 - y[0] * y[0]) * y[1] - y[0];
}

// step sequences and end states from an independent DOP853 implementation
#[test]
fn oscillator_matches_reference_run() {
    let sol = Dop853::new(1e-10, 1e-12).solve(oscillator, 0.0, [1.0, 0.0], 20.0).unwrap();
    assert_eq!(sol.stats.evaluations, 770);
    assert_eq!(sol.stats.accepted, 64);
    assert!((sol.y[0] - 0.40808206194034813).abs() < 1e-13);
    assert!((sol.y[1] + 0.9129452506524156).abs() < 1e-13);
    assert!((sol.y[0] - 20f64.cos()).abs() < 1e-8);
}

#[test]
fn van_der_pol_matches_reference_run() {
    let s = Dop853::new(1e-8, 1e-10);
    let sol = s.solve(van_der_pol, 0.0, [2.0, 0.0], 10.0).unwrap();
    assert_eq!(sol.stats.accepted, 61);
    assert!((sol.y[0] + 2.0083407823302655).abs() < 1e-11);
    assert!((sol.y[1] - 0.032907066102231416).abs() < 1e-11);
    let (ys, _) = s.sample(van_der_pol, 0.0, [2.0, 0.0], &[3.3, 10.0]).unwrap();
    assert!((ys[0][0] + 2.0079406171931256).abs() < 1e-11);
}

#[test]
fn dense_output_tracks_closed_form() {
    let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
    let (ys, _) = Dop853::new(1e-12, 1e-14).sample(oscillator, 0.0, [1.0, 0.0], &times).unwrap();
    for (t, y) in times.iter().zip(&ys) {
        assert!((y[0] - t.cos()).abs() < 1e-10, "t={t}");
        assert!((y[1] + t.sin()).abs() < 1e-10);
    }
}

#[test]
fn backward_run_returns() {
    let s = Dop853::new(1e-12, 1e-14);
    let fwd = s.solve(van_der_pol, 0.0, [2.0, 0.0], 5.0).unwrap();
    let back = s.solve(van_der_pol, 5.0, fwd.y, 0.0).unwrap();
    assert!((back.y[0] - 2.0).abs() < 1e-8 && back.y[1].abs() < 1e-8);
}

#[test]
fn event_location_on_dense_output() {
    // first zero of cos is pi/2
    let mut hit = None;
    Dop853::new(1e-12, 1e-14)
        .with_dense()
        .integrate(oscillator, 0.0, [1.0, 0.0], 10.0, |st| {
            if let Some((t, _)) = find_root(st, |_, y| y[0], 1e-13) {
                hit = Some(t);
                return Control::Stop;
            }
            Control::Continue
        })
        .unwrap();
    assert!((hit.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
}

struct Pendulum;

impl<T: kirchhoff::Real> JetField<T, 2> for Pendulum {
    fn jet(&self, x: &mut [[T; 2]], order: usize) {
        let mut q = vec![T::zero(); order + 1];
        let mut s = vec![T::zero(); order + 1];
        let mut c = vec![T::zero(); order + 1];
        for k in 0..order {
            q[k] = x[k][0];
            kirchhoff::ode::taylor::sin_cos_jet_step(&q, &mut s, &mut c, k);
            let k1 = T::lit((k + 1) as f64);
            x[k + 1][0] = x[k][1] / k1;
            x[k + 1][1] = -s[k] / k1;
        }
    }
}

#[test]
fn taylor_pendulum_conserves_energy_in_double_double() {
    let y0 = [D::c(0.0), D::c(1.5)];
    let h = |y: &[D; 2]| y[1] * y[1] * D::c(0.5) + D::c(1.0) - y[0].cos();
    let e0 = h(&y0);
    let sol = Taylor::new(D::c(1e-32)).solve(&Pendulum, D::c(0.0), y0, D::c(50.0)).unwrap();
    assert!((h(&sol.y) - e0).abs().hi() < 1e-29);
    let back = Taylor::new(D::c(1e-32)).solve(&Pendulum, D::c(50.0), sol.y, D::c(0.0)).unwrap();
    assert!((back.y[0] - y0[0]).abs().hi() < 1e-27);
}

#[test]
fn taylor_agrees_with_runge_kutta() {
    let rk = Dop853::new(1e-13, 1e-15)
        .solve(|_, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = -y[0].sin();
        }, 0.0, [0.0, 1.5], 20.0)
        .unwrap();
    let ty = Taylor::new(1e-15).solve(&Pendulum, 0.0, [0.0, 1.5], 20.0).unwrap();
    assert!((rk.y[0] - ty.y[0]).abs() < 1e-10);
    assert!((rk.y[1] - ty.y[1]).abs() < 1e-10);
    // the interpolant of the last step reproduces its end point
    let mut end = None;
    Taylor::new(1e-15)
        .integrate(&Pendulum, 0.0, [0.0, 1.5], 1.0, |st| {
            end = Some((st.eval(st.t1()), *st.y1()));
            Control::Continue
        })
        .unwrap();
    let (a, b) = end.unwrap();
    assert!((a[0] - b[0]).abs() < 1e-15);
}
