use crate::error::{Error, Result};
use crate::hawkes::compensator::compensators_at_horizon;
use crate::hawkes::intensity::{intensity_recursive, intensity_unchecked, ExcitationWalk};
use crate::hawkes::model::{EventSequence, HawkesModel, Matrix};

/// Intensities below this are treated as zero.
pub const INTENSITY_FLOOR: f64 = 1e-300;

/// `sum_k ln lambda_{d_k}(t_k) - sum_i Lambda_i(T)`.
///
/// Uses the Markov recursion when decays are shared, direct summation otherwise.
pub fn log_likelihood(model: &HawkesModel, seq: &EventSequence) -> Result<f64> {
    model.check_sequence(seq)?;
    let intensities = if model.kernel().shared_decays().is_some() {
        intensity_recursive(model, seq)?.at_events
    } else {
        seq.events()
            .iter()
            .map(|ev| intensity_unchecked(model, seq, ev.mark, ev.time))
            .collect()
    };
    let mut total = 0.0;
    for (k, &lam) in intensities.iter().enumerate() {
        total += checked_ln(k, lam)?;
    }
    let comp: f64 = compensators_at_horizon(model, seq)?.iter().sum();
    Ok(total - comp)
}

fn checked_ln(event_index: usize, lam: f64) -> Result<f64> {
    if !(lam >= INTENSITY_FLOOR) || !lam.is_finite() {
        return Err(Error::LikelihoodUndefined {
            event_index,
            intensity: lam,
        });
    }
    Ok(lam.ln())
}

/// Partial derivatives of the log-likelihood in `mu` and in each `alpha[u]_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodGradient {
    pub mu: Vec<f64>,
    pub alpha: Vec<Matrix>,
}

/// Log-likelihood and its analytic gradient for shared-decay exponential kernels.
///
/// `d l / d mu_i = sum_{d_k = i} 1 / lambda_k - T` and
/// `d l / d alpha[u]_ij = sum_{d_k = i} s_j^u(t_k) / lambda_k - M_j^u(T)`,
/// where `s` and `M` are the recursion states and their time integrals.
pub fn log_likelihood_gradient(model: &HawkesModel, seq: &EventSequence) -> Result<(f64, LikelihoodGradient)> {
    model.check_sequence(seq)?;
    let (decays, alpha) = model.kernel().shared_decays().ok_or_else(|| {
        Error::UnsupportedKernel("analytic gradient needs exponential decays shared by all pairs".into())
    })?;
    let m = model.dim();
    let horizon = seq.horizon();
    let mu = model.mu();
    let mut grad_mu = vec![-horizon; m];
    let mut grad_alpha = vec![Matrix::zeros(m); decays.len()];
    let mut value = 0.0;
    let mut walk = ExcitationWalk::new(&decays, m);
    for (k, ev) in seq.events().iter().enumerate() {
        walk.advance(ev.time);
        let i = ev.mark;
        let lam = mu[i] + walk.excitation(&alpha, i);
        value += checked_ln(k, lam)?;
        let inv = 1.0 / lam;
        grad_mu[i] += inv;
        for (u, g) in grad_alpha.iter_mut().enumerate() {
            for (j, s) in walk.states_for_decay(u).iter().enumerate() {
                g[(i, j)] += s * inv;
            }
        }
        walk.push(i);
    }
    walk.advance(horizon);
    for (i, &mu_i) in mu.iter().enumerate() {
        value -= mu_i * horizon;
        for (u, g) in grad_alpha.iter_mut().enumerate() {
            for j in 0..m {
                let integ = walk.integrated(u, j);
                value -= alpha[u][(i, j)] * integ;
                g[(i, j)] -= integ;
            }
        }
    }
    Ok((
        value,
        LikelihoodGradient {
            mu: grad_mu,
            alpha: grad_alpha,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hawkes::model::{Event, KernelSpec};

    fn m1(v: f64) -> Matrix {
        Matrix::from_rows(vec![vec![v]]).unwrap()
    }

    #[test]
    fn poisson_log_likelihood() {
        let model = HawkesModel::poisson(vec![1.7]).unwrap();
        let times = [0.4, 1.1, 2.5, 2.6, 7.0];
        let seq = EventSequence::new(times.iter().map(|&t| Event::new(t, 0)).collect(), 8.0, 1).unwrap();
        let l = log_likelihood(&model, &seq).unwrap();
        assert!((l - (5.0 * 1.7f64.ln() - 1.7 * 8.0)).abs() < 1e-12);
    }

    #[test]
    fn two_event_hand_expansion() {
        let model = HawkesModel::exponential(vec![1.0], m1(2.0), m1(1.0)).unwrap();
        let seq = EventSequence::new(vec![Event::new(1.0, 0), Event::new(2.0, 0)], 2.0, 1).unwrap();
        let e1 = (-1.0f64).exp();
        // ln(1) + ln(1 + 2/e) - [mu*T + 2(1 - e^-1) + 2(1 - e^0)]
        let expected = 0.0 + (1.0 + 2.0 * e1).ln() - (2.0 + 2.0 * (1.0 - e1) + 0.0);
        let l = log_likelihood(&model, &seq).unwrap();
        assert!((l - expected).abs() < 1e-14);
        let (lg, _) = log_likelihood_gradient(&model, &seq).unwrap();
        assert!((lg - expected).abs() < 1e-14);
    }

    #[test]
    fn power_law_uses_direct_path() {
        let model = HawkesModel::new(
            vec![0.5],
            KernelSpec::PowerLaw {
                alpha: m1(0.4),
                c: m1(1.0),
                beta: m1(2.0),
            },
        )
        .unwrap();
        let seq = EventSequence::new(vec![Event::new(1.0, 0), Event::new(2.0, 0)], 3.0, 1).unwrap();
        // lambda(2) = 0.5 + 0.4 / 4; Lambda(3) = 1.5 + 0.4 (1 - 1/3) + 0.4 (1 - 1/2)
        let expected = 0.5f64.ln() + 0.6f64.ln() - (1.5 + 0.4 * (2.0 / 3.0) + 0.2);
        assert!((log_likelihood(&model, &seq).unwrap() - expected).abs() < 1e-14);
        assert!(matches!(
            log_likelihood_gradient(&model, &seq),
            Err(Error::UnsupportedKernel(_))
        ));
    }

    #[test]
    fn floor_raises_named_error() {
        let model = HawkesModel::poisson(vec![1e-301]).unwrap();
        let seq = EventSequence::new(vec![Event::new(1.0, 0)], 2.0, 1).unwrap();
        match log_likelihood(&model, &seq) {
            Err(Error::LikelihoodUndefined { event_index, .. }) => assert_eq!(event_index, 0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
