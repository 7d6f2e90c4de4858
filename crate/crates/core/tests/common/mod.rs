//! Shared fixtures and slow oracles for the integration tests.
#![allow(dead_code)]

use chainhawkes::hawkes::{spectral_radius, EventSequence, HawkesModel, KernelSpec, Matrix};
use chainhawkes::sim::{simulate, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const REFERENCE_DECAYS: [f64; 3] = [2.340, 15.730, 21.875];

pub fn reference_alpha() -> Vec<Matrix> {
    vec![
        Matrix::from_rows(vec![
            vec![1.377, 1.635, 1.615],
            vec![0.244, 0.118, 0.558],
            vec![0.326, 0.497, 0.096],
        ])
        .unwrap(),
        Matrix::from_rows(vec![
            vec![1.526, 0.0, 0.215],
            vec![0.0, 0.0, 2.131],
            vec![0.0, 0.147, 0.0],
        ])
        .unwrap(),
        Matrix::from_rows(vec![vec![0.02, 0.0, 0.0], vec![0.0, 0.0, 1.357], vec![0.0, 0.0, 1.383]]).unwrap(),
    ]
}

pub fn reference_model(mu: Vec<f64>) -> HawkesModel {
    HawkesModel::sum_exponentials(mu, reference_alpha(), REFERENCE_DECAYS.to_vec()).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random sum-of-exponentials model with kernel-norm spectral radius `radius`.
pub fn random_sumexp(rng: &mut impl Rng, m: usize, num_decays: usize, radius: f64) -> HawkesModel {
    let mut decays: Vec<f64> = Vec::new();
    while decays.len() < num_decays {
        let b = 0.3 * 60f64.powf(rng.random::<f64>());
        if decays.iter().all(|d| (d - b).abs() > 1e-3 * b) {
            decays.push(b);
        }
    }
    decays.sort_by(f64::total_cmp);
    let mut alpha: Vec<Matrix> = (0..num_decays)
        .map(|_| {
            let mut a = Matrix::zeros(m);
            for i in 0..m {
                for j in 0..m {
                    // roughly a third of the entries are structural zeros
                    if rng.random::<f64>() > 0.3 {
                        a[(i, j)] = rng.random::<f64>();
                    }
                }
            }
            a
        })
        .collect();
    let mut norms = Matrix::zeros(m);
    for (a, b) in alpha.iter().zip(&decays) {
        for ((i, j), v) in a.iter() {
            norms[(i, j)] += v / b;
        }
    }
    let rho = spectral_radius(&norms);
    if rho > 0.0 {
        for a in &mut alpha {
            *a = a.map(|v| v * radius / rho);
        }
    }
    let mu = (0..m).map(|_| 0.3 + 1.5 * rng.random::<f64>()).collect();
    HawkesModel::sum_exponentials(mu, alpha, decays).unwrap()
}

pub fn sim(model: &HawkesModel, horizon: f64, seed: u64) -> EventSequence {
    simulate(&SimConfig::new(model.clone(), horizon, seed)).unwrap()
}

pub fn univariate_exp(mu: f64, alpha: f64, beta: f64) -> HawkesModel {
    let one = |v| Matrix::from_rows(vec![vec![v]]).unwrap();
    HawkesModel::exponential(vec![mu], one(alpha), one(beta)).unwrap()
}

/// `phi_ij(t)` evaluated from the raw parameters, independent of the library's kernel code.
pub fn kernel_value(kernel: &KernelSpec, i: usize, j: usize, t: f64) -> f64 {
    match kernel {
        KernelSpec::Exponential { alpha, beta } => alpha[(i, j)] * (-beta[(i, j)] * t).exp(),
        KernelSpec::SumExponentials { alpha, beta } => {
            (0..beta.len()).map(|u| alpha[u][(i, j)] * (-beta[u] * t).exp()).sum()
        }
        KernelSpec::PowerLaw { alpha, c, beta } => alpha[(i, j)] * (c[(i, j)] + t).powf(-beta[(i, j)]),
    }
}

/// Direct O(n^2) intensity from the definition (left limit).
pub fn oracle_intensity(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> f64 {
    model.mu()[i]
        + seq
            .events()
            .iter()
            .filter(|e| e.time < t)
            .map(|e| kernel_value(model.kernel(), i, e.mark, t - e.time))
            .sum::<f64>()
}

/// Composite Simpson integral of `oracle_intensity` between event times.
pub fn oracle_compensator(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64, panels: usize) -> f64 {
    let mut breaks: Vec<f64> = vec![0.0];
    breaks.extend(seq.events().iter().map(|e| e.time).filter(|&s| s > 0.0 && s < t));
    breaks.push(t);
    breaks.dedup();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = panels * 2;
        let h = (b - a) / n as f64;
        let f = |s: f64| oracle_intensity(model, seq, i, s);
        // right limit at a: the event at a already counts inside the piece
        let f_a = oracle_intensity(model, seq, i, a + 4.0 * f64::EPSILON * a.max(1.0));
        let mut acc = f_a + f(b);
        for k in 1..n {
            acc += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += acc * h / 3.0;
    }
    total
}

/// Log-likelihood from the definition: log intensities by direct summation
/// minus closed-form per-event kernel integrals computed here.
pub fn oracle_log_likelihood(model: &HawkesModel, seq: &EventSequence) -> f64 {
    let t_end = seq.horizon();
    let mut value = 0.0;
    for e in seq.events() {
        value += oracle_intensity(model, seq, e.mark, e.time).ln();
    }
    for i in 0..model.dim() {
        let mut comp = model.mu()[i] * t_end;
        for e in seq.events().iter().filter(|e| e.time < t_end) {
            let dt = t_end - e.time;
            comp += match model.kernel() {
                KernelSpec::Exponential { alpha, beta } => {
                    alpha[(i, e.mark)] / beta[(i, e.mark)] * (1.0 - (-beta[(i, e.mark)] * dt).exp())
                }
                KernelSpec::SumExponentials { alpha, beta } => (0..beta.len())
                    .map(|u| alpha[u][(i, e.mark)] / beta[u] * (1.0 - (-beta[u] * dt).exp()))
                    .sum(),
                KernelSpec::PowerLaw { alpha, c, beta } => {
                    let (a, c, b) = (alpha[(i, e.mark)], c[(i, e.mark)], beta[(i, e.mark)]);
                    a / (b - 1.0) * (c.powf(1.0 - b) - (c + dt).powf(1.0 - b))
                }
            };
        }
        value -= comp;
    }
    value
}

/// Sum-of-exponentials model with every `alpha` entry replaced from a flat vector.
pub fn with_params(model: &HawkesModel, mu: &[f64], alpha_flat: &[f64]) -> HawkesModel {
    let KernelSpec::SumExponentials { alpha, beta } = model.kernel() else {
        panic!("sum-of-exponentials expected")
    };
    let m = model.dim();
    let alpha = (0..alpha.len())
        .map(|u| {
            let mut a = Matrix::zeros(m);
            for i in 0..m {
                for j in 0..m {
                    a[(i, j)] = alpha_flat[u * m * m + i * m + j];
                }
            }
            a
        })
        .collect();
    HawkesModel::sum_exponentials(mu.to_vec(), alpha, beta.clone()).unwrap()
}

pub fn alpha_flat(model: &HawkesModel) -> Vec<f64> {
    let KernelSpec::SumExponentials { alpha, .. } = model.kernel() else {
        panic!("sum-of-exponentials expected")
    };
    alpha.iter().flat_map(|a| a.as_slice().to_vec()).collect()
}
