use std::f64::consts::PI;

use ppvl::averaging::{
    averaged_rotation_jacobian, averaged_rotation_rhs, max_real_eigenvalue, response_residual,
    response_roots, rotation_exists, rotation_steady,
};
use ppvl::floquet::{first_tongue_interval, halfcone_contains, monodromy};
use ppvl::integrate::integrate_ivp;
use ppvl::model::fourier_coeff_quadrature;
use ppvl::{DimensionlessParams, Excitation, IntegratorConfig, Pendulum, QState, State};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = DimensionlessParams> {
    (0.0..0.9f64, 0.0..0.3f64, 0.05..2.0f64)
        .prop_map(|(e, b, o)| DimensionlessParams::new(e, b, o).unwrap())
}

/// Random Fourier series with `Σ(|a_k| + |b_k|) ≤ 1`, hence `max|φ| ≤ 1`.
fn excitation() -> impl Strategy<Value = Excitation> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..4).prop_map(|terms| {
        let total: f64 = terms
            .iter()
            .map(|(a, b)| a.abs() + b.abs())
            .sum::<f64>()
            .max(1.0);
        let cos: Vec<f64> = terms.iter().map(|t| t.0 / total).collect();
        let sin: Vec<f64> = terms.iter().map(|t| t.1 / total).collect();
        Excitation::from_coefficients(&cos, &sin).unwrap()
    })
}

proptest! {
    #[test]
    fn angle_equation_is_odd(p in params(), exc in excitation(), th in -4.0..4.0f64, v in -3.0..3.0f64, tau in 0.0..20.0f64) {
        let pend = Pendulum::new(p, exc);
        let a = pend.rhs_theta(&State::new(th, v, tau));
        let b = pend.rhs_theta(&State::new(-th, -v, tau));
        prop_assert_eq!(a.0, -b.0);
        prop_assert!((a.1 + b.1).abs() <= 1e-15 * (1.0 + a.1.abs()));
    }

    #[test]
    fn equilibrium_is_a_rest_point(p in params(), exc in excitation(), tau in 0.0..20.0f64) {
        let pend = Pendulum::new(p, exc);
        let r = pend.rhs_theta(&State::new(0.0, 0.0, tau));
        prop_assert_eq!(r.0, 0.0);
        prop_assert_eq!(r.1.abs(), 0.0);
    }

    #[test]
    fn rhs_is_pure(p in params(), th in -4.0..4.0f64, v in -3.0..3.0f64, tau in 0.0..20.0f64) {
        let pend = Pendulum::cosine(p);
        let s = State::new(th, v, tau);
        prop_assert_eq!(pend.rhs_theta(&s), pend.rhs_theta(&s));
        let q = pend.to_q_state(&s);
        prop_assert_eq!(pend.rhs_q(&q), pend.rhs_q(&q));
    }

    #[test]
    fn angle_and_q_coordinates_round_trip(p in params(), exc in excitation(), th in -4.0..4.0f64, v in -3.0..3.0f64, tau in 0.0..20.0f64) {
        let pend = Pendulum::new(p, exc);
        let s = State::new(th, v, tau);
        let back = pend.to_theta_state(&pend.to_q_state(&s));
        prop_assert!((back.theta - th).abs() < 1e-12);
        prop_assert!((back.theta_dot - v).abs() < 1e-12 * (1.0 + v.abs() + th.abs()));
    }

    #[test]
    fn quadrature_reproduces_stored_coefficients(exc in excitation(), k in 1u32..6) {
        let (a, b) = exc.fourier_coeff(k);
        let (qa, qb) = fourier_coeff_quadrature(|t| exc.phi(t), k);
        prop_assert!((a - qa).abs() < 1e-10 && (b - qb).abs() < 1e-10);
    }

    #[test]
    fn first_tongue_is_symmetric_about_one_half(beta in 0.0..0.2f64, eps in 0.0..0.9f64) {
        if let Some((lo, hi)) = first_tongue_interval(beta, eps).interval {
            prop_assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn halfcone_agrees_with_first_tongue(p in params()) {
        let t = first_tongue_interval(p.beta, p.epsilon);
        prop_assert_eq!(halfcone_contains(1, &p, &Excitation::cosine()), t.contains(p.omega));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn liouville_determinant(p in params()) {
        let m = monodromy(&Pendulum::cosine(p), &IntegratorConfig::precise()).unwrap();
        let expected = (-2.0 * PI * p.beta * p.omega).exp();
        prop_assert!(((m.det() - expected) / expected).abs() < 1e-8);
    }

    #[test]
    fn unforced_damped_equilibrium_is_stable(beta in 0.01..0.3f64, omega in 0.05..2.0f64) {
        let p = DimensionlessParams::new(0.0, beta, omega).unwrap();
        let m = monodromy(&Pendulum::cosine(p), &IntegratorConfig::precise()).unwrap();
        prop_assert!(m.spectral_radius() < 1.0);
    }

    #[test]
    fn response_roots_are_certified(omega in 0.49..0.58f64, eps in 0.03..0.06f64) {
        let p = DimensionlessParams::new(eps, 0.05, omega).unwrap();
        for r in response_roots(omega, eps, 0.05).unwrap() {
            prop_assert!(response_residual(r.q, &p).unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn q_trajectory_satisfies_the_angle_equation() {
    let p = DimensionlessParams::new(0.4, 0.05, 0.6).unwrap();
    let pend = Pendulum::cosine(p);
    let s0 = pend.to_q_state(&State::new(0.8, -0.3, 0.0));
    let taus: Vec<f64> = (1..=60).map(|k| 0.25 * k as f64).collect();
    let traj = integrate_ivp(
        pend.q_field(),
        0.0,
        [s0.q, s0.q_dot],
        15.0,
        &taus,
        &IntegratorConfig::precise(),
    )
    .unwrap();
    let exc = Excitation::cosine();
    for (&tau, y) in traj.tau.iter().zip(&traj.y) {
        let (_, q_ddot) = pend.rhs_q(&QState {
            q: y[0],
            q_dot: y[1],
            tau,
        });
        let e = exc.eval(tau);
        let len = 1.0 + p.epsilon * e.phi;
        let (len_d, len_dd) = (p.epsilon * e.phi_dot, p.epsilon * e.phi_ddot);
        let th = y[0] / len;
        let th_d = (y[1] - th * len_d) / len;
        let th_dd = (q_ddot - 2.0 * th_d * len_d - th * len_dd) / len;
        let residual = th_dd
            + (2.0 * len_d / len + p.beta * p.omega) * th_d
            + p.omega * p.omega * th.sin() / len;
        assert!(residual.abs() < 1e-8, "τ={tau}: residual {residual:e}");
    }
}

#[test]
fn rotation_fixed_points_are_zeros_of_the_averaged_flow() {
    for b in [1i32, -1, 2, -2] {
        for eps in [0.2, 0.3, 0.43, 0.5] {
            for omega in [0.3, 0.5, 0.8, 1.2] {
                let p = DimensionlessParams::new(eps, 0.05, omega).unwrap();
                if !rotation_exists(b.unsigned_abs(), &p).unwrap() {
                    continue;
                }
                let r = rotation_steady(b, &p).unwrap();
                for x1 in [r.x1_stable, r.x1_unstable] {
                    let (d1, d2) = averaged_rotation_rhs(b, (x1, r.x2()), &p).unwrap();
                    assert!(
                        d1.abs() < 1e-12 && d2.abs() < 1e-12,
                        "b={b} ε={eps} ω={omega}"
                    );
                }
            }
        }
    }
}

#[test]
fn rotation_stability_dichotomy() {
    for b in [1, -1] {
        for eps in [0.1, 0.2, 0.3, 0.4, 0.5] {
            for omega in [0.4, 0.6, 0.8, 1.0, 1.2] {
                let p = DimensionlessParams::new(eps, 0.05, omega).unwrap();
                assert!(rotation_exists(1, &p).unwrap());
                let r = rotation_steady(b, &p).unwrap();
                let x2 = r.x2();
                let js = averaged_rotation_jacobian(b, (r.x1_stable, x2), &p).unwrap();
                let ju = averaged_rotation_jacobian(b, (r.x1_unstable, x2), &p).unwrap();
                assert!(max_real_eigenvalue(&js) < 0.0, "b={b} ε={eps} ω={omega}");
                assert!(max_real_eigenvalue(&ju) > 0.0, "b={b} ε={eps} ω={omega}");
            }
        }
    }
}

#[test]
fn counter_rotations_mirror_each_other() {
    let p = DimensionlessParams::new(0.28, 0.05, 0.5).unwrap();
    let (plus, minus) = (
        rotation_steady(1, &p).unwrap(),
        rotation_steady(-1, &p).unwrap(),
    );
    assert!((plus.x1_stable + minus.x1_stable).abs() < 1e-15);
    assert!((plus.x1_unstable + minus.x1_unstable).abs() < 1e-12);
}
