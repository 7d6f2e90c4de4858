use serde::Serialize;

use crate::error::{Error, Result};
use crate::hawkes::{EventSequence, HawkesModel};

use super::MU_FLOOR;

/// Homogeneous-Poisson maximum-likelihood fit, `rate_i = N_i(T) / T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonFit {
    pub rates: Vec<f64>,
    /// Components with no events (rate 0; excluded from goodness of fit).
    pub empty: Vec<bool>,
    pub log_lik: f64,
}

pub fn fit_poisson(seq: &EventSequence) -> Result<PoissonFit> {
    let horizon = seq.horizon();
    if !(horizon > 0.0) {
        return Err(Error::invalid("observation window has zero length"));
    }
    let counts = seq.counts();
    let rates: Vec<f64> = counts.iter().map(|&n| n as f64 / horizon).collect();
    let log_lik = counts
        .iter()
        .zip(&rates)
        .map(|(&n, &r)| if n == 0 { 0.0 } else { n as f64 * r.ln() - r * horizon })
        .sum();
    Ok(PoissonFit {
        empty: counts.iter().map(|&n| n == 0).collect(),
        rates,
        log_lik,
    })
}

impl PoissonFit {
    /// The fit as a zero-kernel Hawkes model; empty components get the rate floor.
    pub fn model(&self) -> Result<HawkesModel> {
        HawkesModel::poisson(self.rates.iter().map(|r| r.max(MU_FLOOR)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hawkes::Event;

    #[test]
    fn closed_form_rate() {
        let events: Vec<Event> = (0..36).map(|k| Event::new(k as f64 / 6.0, 0)).collect();
        let seq = EventSequence::new(events, 6.0, 1).unwrap();
        let fit = fit_poisson(&seq).unwrap();
        assert_eq!(fit.rates, vec![6.0]);
        assert!((fit.log_lik - (36.0 * 6f64.ln() - 36.0)).abs() < 1e-12);
        assert_eq!(fit.empty, vec![false]);
    }

    #[test]
    fn empty_sequence_flags_every_component() {
        let seq = EventSequence::empty(3.0, 3).unwrap();
        let fit = fit_poisson(&seq).unwrap();
        assert_eq!(fit.rates, vec![0.0; 3]);
        assert_eq!(fit.empty, vec![true; 3]);
        assert_eq!(fit.log_lik, 0.0);
        assert!(fit.model().is_ok());
    }

    #[test]
    fn zero_horizon_is_rejected() {
        let seq = EventSequence::empty(0.0, 1).unwrap();
        assert!(fit_poisson(&seq).is_err());
    }
}
