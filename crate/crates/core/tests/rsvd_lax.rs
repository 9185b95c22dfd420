mod common;

use cn_duality::matkit::{build_c, eig_paired_expp, expm, group_residual};
use cn_duality::oracle::rk4_rsvd;
use cn_duality::rsvd::{
    grad_f1, hamiltonian_r, lax_a, momentum_residual_r, reduced_observables, solve_flow_r,
    trace_observables, z_values, z_values_via_w,
};
use cn_duality::{CouplingParams, CxMatrix, Error, RsvdState, Tolerances};
use num_complex::Complex64;
use rand::Rng;

#[test]
fn lax_matrix_lies_in_the_group_and_is_positive() {
    let mut r = common::rng(31);
    let mut worst: f64 = 0.0;
    for draw in 0..500 {
        let n = 1 + draw % 4;
        let c = common::couplings(&mut r, 2.0);
        let st = common::rsvd_state(&mut r, n);
        let b = lax_a(&st, &c).unwrap();
        let big_c = build_c(n).unwrap();
        let an2 = b.a.norm_squared();
        assert!(group_residual(&b.a, &big_c) <= 1e-9 * an2, "draw {draw}");

        let norm_v = b.v.norm_squared();
        assert!((norm_v - 2.0 * n as f64).abs() <= 1e-9, "draw {draw}: {norm_v}");
        let cv = (&big_c * &b.v + &b.v).norm();
        worst = worst.max(cv).max((norm_v - 2.0 * n as f64).abs());
        assert!(cv <= 1e-9, "draw {draw}: {cv:e}");

        let sp = eig_paired_expp(&b.a, &Tolerances::default()).unwrap();
        assert!(sp.positive_part.iter().all(|&q| q > 0.0));

        let half_trace = 0.5 * b.a.trace().re;
        let h = hamiltonian_r(&st, &c);
        assert!((half_trace - h).abs() <= 1e-10 * (1.0 + h), "draw {draw}");
    }
    println!("worst orbit-vector residual {worst:e}");
}

#[test]
fn z_product_and_cauchy_routes_agree() {
    let mut r = common::rng(32);
    for draw in 0..200 {
        let n = 1 + draw % 4;
        let c = common::couplings(&mut r, 2.5);
        let st = common::rsvd_state(&mut r, n);
        let direct = z_values(st.lambda(), &c);
        let via_w = z_values_via_w(st.lambda(), &c).unwrap();
        for (a, b) in direct.iter().zip(&via_w) {
            assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }
}

#[test]
fn momentum_constraint_holds() {
    let mut r = common::rng(33);
    for draw in 0..200 {
        let n = 1 + draw % 4;
        let c = common::couplings(&mut r, 2.5);
        let st = common::rsvd_state(&mut r, n);
        let res = momentum_residual_r(&st, &c).unwrap();
        assert!(res <= 1e-8, "draw {draw}: {res:e}");
    }
}

#[test]
fn observables_reduce_to_closed_forms() {
    let mut r = common::rng(34);
    for draw in 0..60 {
        let n = 1 + draw % 3;
        let c = common::couplings(&mut r, 2.0);
        let st = common::rsvd_state(&mut r, n);
        for order in 1..=6 {
            let red = reduced_observables(&st, &c, order).unwrap();
            let tr = trace_observables(&st, &c, order).unwrap();
            let scale = 1.0 + red.psi.abs() + red.phi.abs();
            assert!((red.phi - tr.phi).abs() <= 1e-8 * scale, "draw {draw} r={order}");
            assert!((red.psi - tr.psi).abs() <= 1e-8 * scale, "draw {draw} r={order}");
        }
    }
}

#[test]
fn gradient_of_f1_matches_finite_differences() {
    let mut r = common::rng(35);
    let f1 = |y: &CxMatrix| 0.5 * (y * y.adjoint()).trace().re;
    for draw in 0..50 {
        let n = 1 + draw % 3;
        let c = common::couplings(&mut r, 2.0);
        let st = common::rsvd_state(&mut r, n);
        let y = lax_a(&st, &c).unwrap().r;
        let xi = common::random_p(&mut r, n, 1.0) + common::random_k(&mut r, n, 1.0);
        let h = 1e-5;
        let fd = (f1(&(&y * expm(&xi.scale(h)))) - f1(&(&y * expm(&xi.scale(-h))))) / (2.0 * h);
        let analytic: Complex64 = (grad_f1(&y).unwrap() * &xi).trace();
        assert!(analytic.im.abs() < 1e-9 * (1.0 + analytic.re.abs()));
        assert!((fd - analytic.re).abs() < 1e-6 * (1.0 + fd.abs()), "draw {draw}");
    }
}

#[test]
fn spectral_flow_matches_rk4() {
    let mut r = common::rng(36);
    let mut compared = 0;
    for draw in 0..9 {
        let n = 1 + draw % 3;
        let c = common::couplings(&mut r, 1.2);
        let st0 = common::rsvd_state(&mut r, n);
        let traj = match rk4_rsvd(&st0, &c, 2.0, 5e-4) {
            Ok(t) => t,
            Err(Error::IntegrationAborted { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        for (t, rk) in traj.samples.iter().step_by(500) {
            let sp = solve_flow_r(&st0, &c, *t).unwrap();
            let dev = common::max_abs_diff(&sp.to_vec(), &rk.to_vec());
            assert!(dev < 1e-5, "draw {draw} t={t}: {dev:e}");
        }
        compared += 1;
    }
    assert!(compared >= 6);
}

#[test]
fn flow_conserves_energy_and_composes() {
    let mut r = common::rng(37);
    for draw in 0..30 {
        let n = 1 + draw % 3;
        let c = common::couplings(&mut r, 2.0);
        let st0 = common::rsvd_state(&mut r, n);
        let h0 = hamiltonian_r(&st0, &c);
        let t1 = r.gen_range(0.1..0.8);
        let t2 = r.gen_range(0.1..0.8);
        let (Ok(direct), Ok(mid)) = (solve_flow_r(&st0, &c, t1 + t2), solve_flow_r(&st0, &c, t1))
        else {
            continue;
        };
        assert!((hamiltonian_r(&direct, &c) - h0).abs() < 1e-8 * (1.0 + h0));
        let composed = solve_flow_r(&mid, &c, t2).unwrap();
        assert!(common::max_abs_diff(&direct.to_vec(), &composed.to_vec()) < 1e-8);
    }
}

#[test]
fn n1_closed_form_flow() {
    let c = CouplingParams::new(1.0, 1.0).unwrap();
    let st0 = RsvdState::new(vec![1.0], vec![0.0]).unwrap();
    for t in [0.5, 1.0, 2.0] {
        let st = solve_flow_r(&st0, &c, t).unwrap();
        assert!((st.lambda()[0] - (1.0 + t * t).sqrt()).abs() < 1e-8);
    }
}
