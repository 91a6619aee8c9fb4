//! The core math is generic over the scalar; exercise the f32 path end to
//! end with tolerances that single precision can reach.

use phasecap::model::{simulate, SymbolBlock};
use phasecap::quad::{integrate_1d, solve_aux_params_with, AuxSolveOptions};
use phasecap::refs::c_awgn;
use phasecap::sampler::gb_m2;
use phasecap::{ChannelParams32, ChannelParams64};

#[test]
fn f32_channel_and_formulas() {
    let p32 = ChannelParams32::new(5e-3, 1e-3, 1.0).unwrap();
    let p64 = ChannelParams64::new(5e-3, 1e-3, 1.0).unwrap();
    assert!((c_awgn(&p32) as f64 - c_awgn(&p64)).abs() < 1e-5);
    assert!((gb_m2(&p32, 1.0, 2.0).unwrap() as f64 - gb_m2(&p64, 1.0, 2.0).unwrap()).abs() < 1e-9);

    let input = SymbolBlock::<f32>::new(vec![1.0; 64], vec![0.0; 64]).unwrap();
    let out = simulate(&p32, &input, 5, 0.25).unwrap();
    assert_eq!(out.len(), 64);
    assert!(out.phases().iter().all(|p| (0.0..std::f32::consts::TAU).contains(p)));
}

#[test]
fn f32_quadrature_and_solver_with_loose_tolerances() {
    let v = integrate_1d(|r: f32| (-r * r).exp(), 0.0f32, f32::INFINITY, 1e-4).unwrap();
    assert!((v - std::f32::consts::PI.sqrt() / 2.0).abs() < 1e-3);

    let p = ChannelParams32::new(5e-4, 1e-3, 1.0).unwrap();
    let opts = AuxSolveOptions::<f32> {
        ratio_rel_tol: 1e-4,
        quad_rel_tol: 1e-3,
        ..AuxSolveOptions::default()
    };
    let aux = solve_aux_params_with(&p, 0.0, &opts).unwrap();
    assert!((aux.alpha_u - 0.054).abs() < 5e-3, "alpha {}", aux.alpha_u);
    assert!((aux.beta_u - 0.738).abs() < 5e-3, "beta {}", aux.beta_u);
}
