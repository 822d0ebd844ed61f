use discsde::models;
use discsde::solver::{euler_maruyama, simulate_batch, BrownianGrid};
use discsde::{SchemeKind, Simulator};
use proptest::prelude::*;

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

#[test]
fn step_model_single_step() {
    let mut m = models::step_function_model();
    m.x0 = vec![-0.5, 0.0];
    m.horizon = 0.25;
    let sim = m.simulator(SchemeKind::EulerMaruyama).unwrap();
    let grid = sim.grid(11, 0, 1).unwrap();
    let w = grid.increment(0).to_vec();
    let x = sim.terminal(&grid).unwrap();
    assert_eq!(x, vec![-0.5 + 0.25 * -3.0 + w[0], 0.25 * 1.0 + w[1]]);
}

#[test]
fn prescribed_transform_scheme_is_exact() {
    let m = models::prescribed_transform_model();
    let sim = m.simulator(SchemeKind::Transformed).unwrap();
    let t = m.transform().unwrap();
    for i in 0..50 {
        let grid = sim.grid(3, i, 256).unwrap();
        let path = sim.path(&grid).unwrap();
        let mut w = t.apply(&m.x0).unwrap()[0];
        for (j, x) in path.states.iter().enumerate() {
            if j > 0 {
                w += grid.increment(j - 1)[0];
            }
            assert!((x[0] - t.inverse(&[w]).unwrap()[0]).abs() <= 1e-11);
        }
    }
}

#[test]
fn em_and_gm_approach_each_other_on_the_step_model() {
    let m = models::step_function_model();
    let em = m.simulator(SchemeKind::EulerMaruyama).unwrap();
    let gm = m.simulator(SchemeKind::Transformed).unwrap();
    let fine = 1 << 12;
    let n = 400;
    let mut mse = [0.0; 3];
    for i in 0..n {
        let grid = em.grid(17, i, fine).unwrap();
        for (l, factor) in [64, 8, 1].into_iter().enumerate() {
            let g = grid.coarsen(factor).unwrap();
            mse[l] += sq_dist(&em.terminal(&g).unwrap(), &gm.terminal(&g).unwrap()) / n as f64;
        }
    }
    assert!(mse[2] < mse[1] && mse[1] < mse[0], "{mse:?}");
}

#[test]
fn zero_noise_em_is_explicit_euler() {
    let m = models::linear_ode_model();
    let sim = m.simulator(SchemeKind::EulerMaruyama).unwrap();
    let grid = sim.grid(0, 0, 64).unwrap();
    let path = sim.path(&grid).unwrap();
    let mut x = m.x0.clone();
    for state in &path.states[1..] {
        x = x.iter().map(|v| v + (1.0 / 64.0) * -v).collect();
        assert_eq!(state, &x);
    }
}

#[test]
fn batches_depend_only_on_their_inputs() {
    let m = models::dividend_model_default();
    let sim = m.simulator(SchemeKind::EulerMaruyama).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_batch(&sim, 40, &[8, 32, 128], 99).unwrap())
    };
    let reference = run(1);
    assert_eq!(reference, run(2));
    assert_eq!(reference, run(5));
    assert_ne!(
        reference,
        rayon::ThreadPoolBuilder::new()
            .build()
            .unwrap()
            .install(|| simulate_batch(&sim, 40, &[8, 32, 128], 100).unwrap())
    );
}

fn model(i: usize) -> Simulator {
    let m = match i {
        0 => models::step_function_model(),
        1 => models::unit_circle_model(),
        _ => models::dividend_model_default(),
    };
    m.simulator(SchemeKind::EulerMaruyama).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coarse_increments_are_sums_of_fine_ones(seed in any::<u64>(), idx in 0u64..10_000, log_n in 1u32..8) {
        let fine = BrownianGrid::generate(seed, idx, 2, 1.0, 1 << log_n).unwrap();
        let coarse = fine.coarsen(2).unwrap();
        for j in 0..coarse.steps() {
            for c in 0..2 {
                prop_assert_eq!(coarse.increment(j)[c], fine.increment(2 * j)[c] + fine.increment(2 * j + 1)[c]);
            }
        }
    }

    #[test]
    fn timestamps_are_exact_multiples(k in 0u32..12, seed in any::<u64>()) {
        let m = models::brownian_model(1);
        let grid = BrownianGrid::generate(seed, 0, 1, m.horizon, 1 << k).unwrap();
        let path = euler_maruyama(&m.coefficients, &m.x0, &grid).unwrap();
        let delta = m.horizon / (1u64 << k) as f64;
        for (j, t) in path.times.iter().enumerate() {
            prop_assert_eq!(*t, j as f64 * delta);
        }
    }

    #[test]
    fn steps_respect_coefficient_bounds(which in 0usize..3, seed in any::<u64>(), log_n in 2u32..9) {
        let sim = model(which);
        let m = match which {
            0 => models::step_function_model(),
            1 => models::unit_circle_model(),
            _ => models::dividend_model_default(),
        };
        let grid = sim.grid(seed, 0, 1 << log_n).unwrap();
        let path = sim.path(&grid).unwrap();
        for (j, pair) in path.states.windows(2).enumerate() {
            let step = sq_dist(&pair[1], &pair[0]).sqrt();
            let noise = grid.increment(j).iter().map(|w| w * w).sum::<f64>().sqrt();
            let bound = m.coefficients.sup_drift * path.step + m.coefficients.sup_diffusion * noise;
            prop_assert!(step <= bound * (1.0 + 1e-12), "step {step} > {bound}");
        }
    }
}
