//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them). Budgets are desk
//! scale; tolerances are pinned in the assertions.

mod common;

use std::time::Instant;

use common::{chi2_critical_001, correlation, ks_critical_001, ks_statistic, median};
use phasecap::bounds_upper::{
    default_mu_grid, default_r_grid, g_of_r, upper_bound_cu,
};
use phasecap::entropy::{knn_entropy, EntropySample};
use phasecap::model::{simulate, ChannelParams};
use phasecap::quad::{solve_aux_params, solve_input_params_with, InputSolveOptions};
use phasecap::rate::{
    estimate_rate, phase_grid_log_likelihood, InputLaw, PhaseParticleFilter, RateOptions,
};
use phasecap::rate::InitialPhase;
use phasecap::refs::crossover_snr_db;
use phasecap::sampler::{draw_input_block, f_input_density};
use phasecap::sweep::{run_sweep, BoundKind, SweepConfig};
use phasecap::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LN_2: f64 = std::f64::consts::LN_2;
const TAU: f64 = std::f64::consts::TAU;

fn params(sd2: f64, sw2: f64) -> ChannelParams<f64> {
    ChannelParams::new(sw2, sd2, 1.0).unwrap()
}

/// Criterion 1: the ten published (alpha_u, beta_u) pairs at mu = 0 are
/// reproduced within +-0.01 in under 10 seconds.
#[test]
fn criterion_01_aux_parameter_table() {
    let table: [(f64, f64, f64, f64); 10] = [
        (1e-2, 5e-2, 0.43, 0.88),
        (1e-2, 5e-3, 0.17, 0.73),
        (1e-2, 5e-4, 0.10, 0.59),
        (1e-2, 5e-5, 0.09, 0.53),
        (1e-2, 5e-6, 0.08, 0.51),
        (1e-3, 5e-2, 0.43, 0.94),
        (1e-3, 5e-3, 0.14, 0.92),
        (1e-3, 5e-4, 0.05, 0.73),
        (1e-3, 5e-5, 0.03, 0.59),
        (1e-3, 5e-6, 0.03, 0.53),
    ];
    let start = Instant::now();
    for (sd2, sw2, alpha, beta) in table {
        let aux = solve_aux_params(&params(sd2, sw2), 0.0).unwrap();
        assert!(
            (aux.alpha_u - alpha).abs() < 0.01,
            "alpha_u {} vs {alpha} at ({sd2:e}, {sw2:e})",
            aux.alpha_u
        );
        assert!(
            (aux.beta_u - beta).abs() < 0.01,
            "beta_u {} vs {beta} at ({sd2:e}, {sw2:e})",
            aux.beta_u
        );
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 10.0, "10 solves took {dt:.1} s (target < 10 s)");
    println!("criterion 01 (aux parameter table): PASS — 10/10 rows within ±0.01 in {dt:.2} s");
}

/// Criterion 2: the published (alpha_l, beta_l) rows for M = 2 and M = 3;
/// beta within 2%, alpha within printed precision, in under 5 minutes.
#[test]
fn criterion_02_input_parameter_table() {
    let sw2s = [5e-2, 5e-3, 5e-4, 5e-5, 5e-6];
    let alpha_tols = [0.02, 0.02, 0.10, 0.50, 0.50];
    let m2_table = [(0.509, 0.997), (0.051, 0.967), (0.006, 0.825), (0.001, 0.634), (0.001, 0.544)];
    let m3_table = [
        (0.125, 0.991),
        (0.004, 0.936),
        (0.0002, 0.756),
        (0.00003, 0.598),
        (0.00002, 0.533),
    ];
    let start = Instant::now();
    let opts = InputSolveOptions {
        mc_samples: 20_000_000,
        ..InputSolveOptions::default()
    };
    for i in 0..5 {
        let p = params(1e-3, sw2s[i]);
        for (m, (alpha, beta)) in [(2usize, m2_table[i]), (3, m3_table[i])] {
            let sol = solve_input_params_with(&p, m, &opts).unwrap();
            assert!(
                (sol.beta_l - beta).abs() / beta < 0.02,
                "m={m} sw2={:e}: beta_l {} vs {beta}",
                sw2s[i],
                sol.beta_l
            );
            assert!(
                (sol.alpha_l - alpha).abs() / alpha < alpha_tols[i],
                "m={m} sw2={:e}: alpha_l {} vs {alpha} (tol {})",
                sw2s[i],
                sol.alpha_l,
                alpha_tols[i]
            );
        }
    }
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 300.0, "table solve took {dt:.0} s (target < 300 s)");
    println!("criterion 02 (input parameter table): PASS — 10/10 entries in {dt:.0} s");
}

/// Criterion 3: closed-form reference values match hand evaluations through
/// an independent algebraic route at 1e-9 relative.
#[test]
fn criterion_03_closed_form_spot_checks() {
    use phasecap::refs::{c_awgn, c_lapidoth};

    // AWGN capacity
    assert!((c_awgn(&params(0.0, 0.5)) - 1.0).abs() < 1e-9);
    let got = c_awgn(&params(0.0, 5e-3));
    let want = 101.0_f64.log2();
    assert!(((got - want) / want).abs() < 1e-9, "c_awgn {got} vs {want}");
    assert!(c_awgn(&params(0.0, 1e12)) < 1e-11);

    // high-SNR phase-noise capacity, rearranged oracle
    let got = c_lapidoth(&params(1e-3, 5e-4)).unwrap();
    let want = 0.5 * 501.0_f64.log2() + 0.5 * (TAU / (std::f64::consts::E * 1e-3)).log2();
    assert!(((got - want) / want).abs() < 1e-9, "c_lapidoth {got} vs {want}");
    let d = c_lapidoth(&params(1e-3, 5e-4)).unwrap() - c_lapidoth(&params(2e-3, 5e-4)).unwrap();
    assert!((d - 0.5).abs() < 1e-12, "doubling law {d}");

    // closed-form upper bound with pinned table parameters, via
    // beta/ln2 (es + 2 sw2) - (log2 sw2 + 2/ln2 + 2 log2 alpha)/2
    let route_b = |sw2: f64, alpha: f64, beta: f64| {
        beta / LN_2 * (1.0 + 2.0 * sw2) - 0.5 * (sw2.log2() + 2.0 / LN_2 + 2.0 * alpha.log2())
    };
    for (sd2, sw2, alpha, beta) in [(1e-3, 5e-4, 0.05, 0.73), (1e-2, 5e-2, 0.43, 0.88)] {
        let aux = phasecap::quad::AuxOutputParams {
            mu: 0.0,
            alpha_u: alpha,
            beta_u: beta,
            residuals: (0.0, 0.0),
            iterations: 0,
        };
        let got = phasecap::bounds_upper::cu_tilde_from_aux(&params(sd2, sw2), &aux);
        let want = route_b(sw2, alpha, beta);
        assert!(
            ((got - want) / want).abs() < 1e-9,
            "cu_tilde {got} vs {want} at ({sd2:e},{sw2:e})"
        );
    }
    println!("criterion 03 (closed-form spot checks): PASS — all values at 1e-9 relative");
}

/// Criterion 4: crossover SNRs land in the published windows.
#[test]
fn criterion_04_crossover() {
    let x3 = crossover_snr_db(&params(1e-3, 5e-4)).unwrap();
    assert!((27.0..=33.0).contains(&x3), "crossover(1e-3) = {x3}");
    let x2 = crossover_snr_db(&params(1e-2, 5e-4)).unwrap();
    assert!((17.0..=23.0).contains(&x2), "crossover(1e-2) = {x2}");
    println!("criterion 04 (crossover): PASS — {x3:.2} dB and {x2:.2} dB");
}

/// Criterion 5: entropy-estimator oracles (uniform, Gaussian, exponential)
/// within 0.02 bits, median over 5 seeds, N = 1e5, k = 4.
#[test]
fn criterion_05_entropy_oracles() {
    let n = 100_000;
    let gauss_bits = 0.5 * (TAU * std::f64::consts::E).log2();
    let cases: [(&str, f64); 3] = [
        ("uniform", 0.0),
        ("gaussian", gauss_bits),
        ("exponential", 1.0 / LN_2),
    ];
    for (name, truth) in cases {
        let estimates: Vec<f64> = (0..5)
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(9000 + s);
                let xs: Vec<f64> = (0..n)
                    .map(|_| match name {
                        "uniform" => f64::unit_uniform(&mut rng),
                        "gaussian" => f64::standard_normal(&mut rng),
                        _ => -(1.0 - f64::unit_uniform(&mut rng)).ln(),
                    })
                    .collect();
                knn_entropy(&EntropySample::from_1d(xs).unwrap(), 4).unwrap()
            })
            .collect();
        let med = median(&estimates);
        assert!(
            (med - truth).abs() <= 0.02,
            "{name}: median {med} vs {truth}"
        );
    }
    println!("criterion 05 (entropy oracles): PASS — three closed forms within ±0.02 bits");
}

/// Criterion 6: G(R) at R = 1e3 matches the analytic large-R limit within
/// 0.1 bits at (sigma_delta_sq, sigma_w_sq) = (1e-3, 5e-4).
#[test]
fn criterion_06_g_of_r_asymptote() {
    let p = params(1e-3, 5e-4);
    let g = g_of_r(&p, 1e3, 0.0, 100_000, 616).unwrap();
    let limit = -(TAU * std::f64::consts::E).log2() - 0.5 * 5e-4_f64.log2();
    assert!(
        (g.value - limit).abs() <= 0.1,
        "G(1e3) = {} vs limit {limit}",
        g.value
    );
    println!(
        "criterion 06 (G(R) asymptote): PASS — {:.4} vs {:.4} bits",
        g.value, limit
    );
}

/// Criterion 7: |C_U - C_U~| <= 0.3 bits at 20/30/40 dB, sigma_delta_sq
/// = 1e-3, 1e5 entropy samples, under 15 minutes per point.
#[test]
fn criterion_07_upper_bound_agreement() {
    for (i, snr) in [20.0, 30.0, 40.0].into_iter().enumerate() {
        let p = ChannelParams::from_snr_db(snr, 1e-3, 1.0).unwrap();
        let start = Instant::now();
        let res = upper_bound_cu(
            &p,
            &default_mu_grid::<f64>(1.0),
            &default_r_grid::<f64>(1.0),
            100_000,
            700 + i as u64,
        )
        .unwrap();
        let dt = start.elapsed().as_secs_f64();
        assert!(dt < 900.0, "{snr} dB point took {dt:.0} s (target < 900 s)");
        assert!(
            (res.c_u - res.c_u_tilde).abs() <= 0.3,
            "{snr} dB: c_u {} vs c_u_tilde {}",
            res.c_u,
            res.c_u_tilde
        );
        println!(
            "criterion 07 (upper-bound agreement) at {snr} dB: PASS — c_u {:.4}, c_u~ {:.4} ({dt:.0} s)",
            res.c_u, res.c_u_tilde
        );
    }
}

/// Criterion 8: rate-estimator oracles — AWGN capacity at 10 dB with no
/// phase noise, and the particle conditional pass against a 512-bin phase
/// grid with phase noise.
#[test]
fn criterion_08_rate_oracles() {
    // (a) no phase noise, known initial phase, Gaussian input at 10 dB
    let p = ChannelParams::from_snr_db(10.0, 0.0, 1.0).unwrap();
    let opts = RateOptions {
        initial_phase: Some(0.0),
        ..RateOptions::default()
    };
    let est = estimate_rate(&p, &InputLaw::Gaussian, 10_000, 10_000, 88, &opts).unwrap();
    let want = 11.0_f64.log2();
    assert!(
        (est.bits_per_use - want).abs() <= 0.1,
        "AWGN oracle: {} vs {want} (se {})",
        est.bits_per_use,
        est.std_err
    );

    // (b) conditional pass vs quantized-phase forward algorithm
    let p = ChannelParams::from_snr_db(10.0, 1e-3, 1.0).unwrap();
    let law = InputLaw::<f64>::Gaussian;
    let n = 1000;
    let input = law.draw_input(&p, n, 881).unwrap();
    let received = simulate(&p, &input, 882, 0.0).unwrap();
    let xs = input.complex_symbols();
    let ys = received.complex_outputs();
    let grid = phase_grid_log_likelihood(&p, &xs, &ys, 512, Some(0.0)).unwrap();
    let mut filter = PhaseParticleFilter::new(&p, 10_000, InitialPhase::Known(0.0), 883).unwrap();
    let mut acc = 0.0;
    for k in 0..n {
        acc += filter.log_pred_density(ys[k], Some(xs[k])).unwrap();
    }
    let particle = acc / n as f64;
    assert!(
        (grid - particle).abs() <= 0.05,
        "grid {grid} vs particle {particle}"
    );
    println!(
        "criterion 08 (rate oracles): PASS — AWGN {:.3} vs {:.3}; grid {:.4} vs particle {:.4}",
        est.bits_per_use, want, grid, particle
    );
}

/// Criterion 9: desk-scale figure-shape sweep at sigma_delta_sq = 1e-3,
/// 1e4 particles x 1e3 uses, all bound relations hold, under one hour.
#[test]
fn criterion_09_figure_shape_sweep() {
    let cfg = SweepConfig {
        name: "acceptance".into(),
        snr_db: vec![0.0, 10.0, 20.0, 30.0, 40.0],
        sigma_delta_sq: 1e-3,
        es: 1.0,
        bounds: vec![
            BoundKind::CU,
            BoundKind::CUTilde,
            BoundKind::LbM2,
            BoundKind::LbM3,
        ],
        particles: 10_000,
        uses: 1000,
        entropy_samples: 100_000,
        input_mc_samples: 20_000_000,
        seed: 99,
    };
    let start = Instant::now();
    let out = run_sweep(&cfg).unwrap();
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < 3600.0, "sweep took {dt:.0} s (target < 3600 s)");

    for (prov, row) in out.provenance.rows.iter().zip(&out.rows) {
        assert!(
            prov.errors.is_empty(),
            "row {} dB reported errors: {:?}",
            row.snr_db,
            prov.errors
        );
    }
    for row in &out.rows {
        let c_u = row.c_u.expect("c_u computed");
        let c_u_tilde = row.c_u_tilde.expect("c_u_tilde computed");
        let lb2 = row.lb_m2.expect("lb_m2 computed");
        let lb3 = row.lb_m3.expect("lb_m3 computed");
        let cap = c_u.min(row.c_awgn);

        // the effective upper bound dominates the measured rates
        assert!(
            lb2.bits <= cap + 2.0 * lb2.std_err,
            "{} dB: lb_m2 {} above min(c_u, c_awgn) {cap}",
            row.snr_db,
            lb2.bits
        );
        assert!(
            lb2.bits.max(lb3.bits) - 2.0 * lb2.std_err.max(lb3.std_err) <= cap,
            "{} dB: row-level squeeze violated",
            row.snr_db
        );
        if row.snr_db >= 10.0 {
            assert!(
                lb2.bits <= c_u_tilde + 2.0 * lb2.std_err,
                "{} dB: lb_m2 {} above c_u~ {c_u_tilde}",
                row.snr_db,
                lb2.bits
            );
        }
        // low SNR: the bound hugs the AWGN capacity
        if row.snr_db <= 10.0 {
            assert!(
                lb2.bits >= row.c_awgn - 1.0,
                "{} dB: lb_m2 {} more than 1 bit under c_awgn {}",
                row.snr_db,
                lb2.bits,
                row.c_awgn
            );
        }
        // high SNR: the lower bound tracks the closed-form upper bound
        if row.snr_db >= 30.0 {
            assert!(
                (lb2.bits - c_u_tilde).abs() <= 1.5,
                "{} dB: lb_m2 {} vs c_u~ {c_u_tilde}",
                row.snr_db,
                lb2.bits
            );
        }
    }
    println!("criterion 09 (figure-shape sweep): PASS in {dt:.0} s");
    for row in &out.rows {
        println!(
            "  snr {:>4} dB: c_awgn {:.3}, c_u {:.3}, c_u~ {:.3}, lb_m2 {:.3}±{:.3}, lb_m3 {:.3}±{:.3}",
            row.snr_db,
            row.c_awgn,
            row.c_u.unwrap(),
            row.c_u_tilde.unwrap(),
            row.lb_m2.unwrap().bits,
            row.lb_m2.unwrap().std_err,
            row.lb_m3.unwrap().bits,
            row.lb_m3.unwrap().std_err,
        );
    }
}

/// Criterion 10: sampler fidelity — chi-square goodness of fit of accepted
/// M = 2 samples against the solved density, block power, and within-block
/// correlation.
#[test]
fn criterion_10_sampler_fidelity() {
    let p = params(1e-3, 5e-4);
    let dist = phasecap::quad::solve_input_params(&p, 2).unwrap();
    let n_blocks = 100_000;
    let drawn = draw_input_block(&p, &dist, n_blocks, 1010).unwrap();
    let amps = drawn.block.amplitudes();

    // chi-square GOF on a 30 x 30 amplitude grid
    let cells = 30usize;
    let hi = 4.2 / dist.beta_l.sqrt();
    let dx = hi / cells as f64;
    // expected cell probabilities by 2x2 Gauss-Legendre cubature
    let gl = 0.5 / 3.0_f64.sqrt();
    let offs = [0.5 - gl, 0.5 + gl];
    let mut expected = vec![0.0; cells * cells];
    for i in 0..cells {
        for j in 0..cells {
            let mut acc = 0.0;
            for oi in offs {
                for oj in offs {
                    let x = (i as f64 + oi) * dx;
                    let y = (j as f64 + oj) * dx;
                    acc += f_input_density(&p, &dist, &[x, y]).unwrap();
                }
            }
            expected[i * cells + j] = acc / 4.0 * dx * dx * n_blocks as f64;
        }
    }
    let mut observed = vec![0.0; cells * cells];
    let mut outside = 0.0;
    for b in amps.chunks(2) {
        let (i, j) = ((b[0] / dx) as usize, (b[1] / dx) as usize);
        if b[0] < hi && b[1] < hi {
            observed[i * cells + j] += 1.0;
        } else {
            outside += 1.0;
        }
    }
    // pool sparse cells and the outside mass
    let mut chi2 = 0.0;
    let mut dof = 0usize;
    let mut pool_exp = n_blocks as f64 - expected.iter().sum::<f64>();
    let mut pool_obs = outside;
    for (o, e) in observed.iter().zip(&expected) {
        if *e >= 5.0 {
            chi2 += (o - e) * (o - e) / e;
            dof += 1;
        } else {
            pool_exp += e;
            pool_obs += o;
        }
    }
    if pool_exp > 0.5 {
        chi2 += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
        dof += 1;
    }
    let crit = chi2_critical_001(dof - 1);
    assert!(
        chi2 < crit,
        "chi-square {chi2:.1} at {dof} buckets vs critical {crit:.1}"
    );

    // block power within 3 standard errors of es
    let pows: Vec<f64> = amps.chunks(2).map(|b| (b[0] * b[0] + b[1] * b[1]) / 2.0).collect();
    let mean = pows.iter().sum::<f64>() / pows.len() as f64;
    let var = pows.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (pows.len() - 1) as f64;
    let se = (var / pows.len() as f64).sqrt();
    assert!((mean - 1.0).abs() < 3.0 * se, "block power {mean} (se {se})");

    // within-block correlation significantly nonzero
    let (a, b): (Vec<f64>, Vec<f64>) = amps.chunks(2).map(|c| (c[0], c[1])).unzip();
    let rho = correlation(&a, &b);
    assert!(
        rho.abs() > 3.0 / (n_blocks as f64).sqrt(),
        "within-block correlation {rho} not significant"
    );

    // phase uniformity of the drawn symbols
    let d = ks_statistic(drawn.block.phases(), |x| x / TAU);
    assert!(d < ks_critical_001(drawn.block.len()));

    println!(
        "criterion 10 (sampler fidelity): PASS — chi2 {chi2:.1}/{crit:.1} ({dof} buckets), \
         power {mean:.4}, rho {rho:.4}"
    );
}
