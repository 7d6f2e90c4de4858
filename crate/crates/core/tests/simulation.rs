mod common;

use chainhawkes::gof::{ks_exp1, time_rescale};
use chainhawkes::hawkes::{compensators_at_horizon, stationary_rates, HawkesModel, KernelSpec, Matrix};
use chainhawkes::sim::{simulate, SimConfig};
use chainhawkes::Error;
use common::*;

#[test]
fn counts_minus_compensator_is_a_martingale() {
    let mut r = rng(17);
    let model = random_sumexp(&mut r, 2, 2, 0.6);
    let reps = 200;
    let mut sums = [0.0f64; 2];
    let mut squares = [0.0f64; 2];
    for seed in 0..reps {
        let seq = sim(&model, 20.0, seed);
        let lambda = compensators_at_horizon(&model, &seq).unwrap();
        for (i, n) in seq.counts().into_iter().enumerate() {
            let d = n as f64 - lambda[i];
            sums[i] += d;
            squares[i] += d * d;
        }
    }
    for i in 0..2 {
        let mean = sums[i] / reps as f64;
        let sd = (squares[i] / reps as f64 - mean * mean).sqrt();
        assert!(
            mean.abs() <= 4.0 * sd / (reps as f64).sqrt(),
            "component {i}: mean {mean}, sd {sd}"
        );
    }
}

#[test]
fn long_run_rate_matches_stationary_rate() {
    let model = univariate_exp(1.0, 0.8, 1.2);
    let rate = stationary_rates(&model).unwrap()[0];
    assert!((rate - 3.0).abs() < 1e-12);
    // Var N(T) / T -> mu / (1 - n)^3 = 27, so the rate sd at T = 5000 is ~0.073
    let seq = sim(&model, 5000.0, 3);
    let observed = seq.len() as f64 / 5000.0;
    assert!((observed - 3.0).abs() < 0.3, "observed rate {observed}");
}

#[test]
fn poisson_interarrivals_are_exponential() {
    let model = HawkesModel::poisson(vec![4.0]).unwrap();
    let seq = sim(&model, 1000.0, 11);
    let times = seq.times_of(0);
    let gaps: Vec<f64> = std::iter::once(times[0])
        .chain(times.windows(2).map(|w| w[1] - w[0]))
        .map(|g| g * 4.0)
        .collect();
    assert!(ks_exp1(&gaps).unwrap().p_value > 1e-3);
}

#[test]
fn rescaled_residuals_are_unit_exponential() {
    let power = HawkesModel::new(
        vec![0.8, 0.5],
        KernelSpec::PowerLaw {
            alpha: Matrix::from_rows(vec![vec![0.3, 0.1], vec![0.2, 0.25]]).unwrap(),
            c: Matrix::filled(2, 0.5),
            beta: Matrix::filled(2, 2.5),
        },
    )
    .unwrap();
    let mut r = rng(5);
    let models = [random_sumexp(&mut r, 3, 3, 0.7), power];
    for (k, model) in models.iter().enumerate() {
        let seq = sim(model, 800.0, 100 + k as u64);
        for res in time_rescale(model, &seq).unwrap() {
            let p = ks_exp1(&res.interarrivals).unwrap().p_value;
            assert!(p > 1e-3, "model {k} component {}: p = {p}", res.component);
        }
    }
}

#[test]
fn seeds_are_reproducible_and_distinct() {
    let model = reference_model(vec![3.0, 1.0, 1.0]);
    let a = sim(&model, 2.0, 42);
    let b = sim(&model, 2.0, 42);
    let c = sim(&model, 2.0, 43);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.events().windows(2).all(|w| w[0].time <= w[1].time));
    assert!(a.events().iter().all(|e| e.time >= 0.0 && e.time <= 2.0));
}

#[test]
fn supercritical_model_needs_override_and_truncates() {
    let model = univariate_exp(1.0, 1.5, 1.0);
    let config = SimConfig::new(model, 50.0, 1);
    assert!(matches!(simulate(&config), Err(Error::Unstable { .. })));
    let config = config.allow_unstable(true).with_max_events(500);
    match simulate(&config) {
        Err(Error::Truncated {
            partial, max_events, ..
        }) => {
            assert_eq!(max_events, 500);
            assert_eq!(partial.len(), 500);
        }
        other => panic!("expected truncation, got {other:?}"),
    }
}
