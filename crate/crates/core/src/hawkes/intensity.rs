use crate::error::{Error, Result};
use crate::hawkes::model::{EventSequence, HawkesModel, Matrix};

/// Conditional intensity `lambda_i(t)` by direct summation over the history.
///
/// Only events strictly before `t` contribute, so an event never excites
/// itself. O(n) per call.
pub fn intensity_naive(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> Result<f64> {
    model.check_sequence(seq)?;
    model.check_component(i)?;
    check_time(seq, t)?;
    Ok(intensity_unchecked(model, seq, i, t))
}

pub(crate) fn intensity_unchecked(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> f64 {
    let kernel = model.kernel();
    let excitation: f64 = seq
        .events()
        .iter()
        .take_while(|ev| ev.time < t)
        .map(|ev| kernel.eval(i, ev.mark, t - ev.time))
        .sum();
    model.mu()[i] + excitation
}

pub(crate) fn check_time(seq: &EventSequence, t: f64) -> Result<()> {
    if !(t >= 0.0 && t <= seq.horizon()) {
        return Err(Error::domain(format!(
            "time {t} outside the observation window [0, {}]",
            seq.horizon()
        )));
    }
    Ok(())
}

/// Output of [`intensity_recursive`].
#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveIntensities {
    /// `lambda_{d_k}(t_k)` (left limit) for every event `k`.
    pub at_events: Vec<f64>,
    /// Excitation states `v_i^u(T)` at the horizon (left limit), indexed `[i][u]`.
    pub end_state: Vec<Vec<f64>>,
}

/// Intensities at every event time via the Markov recursion of exponential
/// kernels with shared decays. O(n * m * U).
pub fn intensity_recursive(model: &HawkesModel, seq: &EventSequence) -> Result<RecursiveIntensities> {
    model.check_sequence(seq)?;
    let (decays, alpha) = model
        .kernel()
        .shared_decays()
        .ok_or_else(|| Error::UnsupportedKernel("the recursion needs exponential decays shared by all pairs".into()))?;
    let m = model.dim();
    let mu = model.mu();
    let mut walk = ExcitationWalk::new(&decays, m);
    let mut at_events = Vec::with_capacity(seq.len());
    for ev in seq.events() {
        walk.advance(ev.time);
        at_events.push(mu[ev.mark] + walk.excitation(&alpha, ev.mark));
        walk.push(ev.mark);
    }
    walk.advance(seq.horizon());
    let end_state = (0..m)
        .map(|i| {
            (0..decays.len())
                .map(|u| {
                    let states = walk.states_for_decay(u);
                    alpha[u].row(i).iter().zip(states).map(|(a, s)| a * s).sum()
                })
                .collect()
        })
        .collect();
    Ok(RecursiveIntensities { at_events, end_state })
}

/// Per-source excitation states `s_j^u(t) = sum_{t_k < t, d_k = j} exp(-beta_u (t - t_k))`.
///
/// Jumps are held back until time strictly advances, so events sharing a
/// timestamp do not see each other (left-limit convention).
#[derive(Debug, Clone)]
pub(crate) struct ExcitationWalk<'a> {
    decays: &'a [f64],
    dim: usize,
    states: Vec<f64>,
    applied: Vec<f64>,
    pending: Vec<usize>,
    time: f64,
}

impl<'a> ExcitationWalk<'a> {
    pub(crate) fn new(decays: &'a [f64], dim: usize) -> Self {
        ExcitationWalk {
            decays,
            dim,
            states: vec![0.0; decays.len() * dim],
            applied: vec![0.0; dim],
            pending: Vec::new(),
            time: 0.0,
        }
    }

    pub(crate) fn advance(&mut self, t: f64) {
        if t <= self.time {
            return;
        }
        for &j in &self.pending {
            self.applied[j] += 1.0;
            for u in 0..self.decays.len() {
                self.states[u * self.dim + j] += 1.0;
            }
        }
        self.pending.clear();
        let dt = t - self.time;
        for (u, &b) in self.decays.iter().enumerate() {
            let factor = (-b * dt).exp();
            for s in &mut self.states[u * self.dim..(u + 1) * self.dim] {
                *s *= factor;
            }
        }
        self.time = t;
    }

    pub(crate) fn push(&mut self, mark: usize) {
        self.pending.push(mark);
    }

    /// All states, laid out `[u * dim + j]`.
    pub(crate) fn states(&self) -> &[f64] {
        &self.states
    }

    pub(crate) fn states_for_decay(&self, u: usize) -> &[f64] {
        &self.states[u * self.dim..(u + 1) * self.dim]
    }

    /// `sum_u sum_j alpha[u]_ij s_j^u` for target component `i`.
    pub(crate) fn excitation(&self, alpha: &[Matrix], i: usize) -> f64 {
        alpha
            .iter()
            .enumerate()
            .map(|(u, a)| {
                a.row(i)
                    .iter()
                    .zip(self.states_for_decay(u))
                    .map(|(x, s)| x * s)
                    .sum::<f64>()
            })
            .sum()
    }

    /// `M_j^u(t) = sum_{t_k < t, d_k = j} (1 - exp(-beta_u (t - t_k))) / beta_u`.
    pub(crate) fn integrated(&self, u: usize, j: usize) -> f64 {
        let s = self.states[u * self.dim + j];
        ((self.applied[j] - s) / self.decays[u]).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hawkes::model::{Event, KernelSpec};

    fn m1(v: f64) -> Matrix {
        Matrix::from_rows(vec![vec![v]]).unwrap()
    }

    fn univariate(mu: f64, alpha: f64, beta: f64) -> HawkesModel {
        HawkesModel::exponential(vec![mu], m1(alpha), m1(beta)).unwrap()
    }

    #[test]
    fn empty_sequence_gives_background() {
        let model = univariate(1.3, 2.0, 1.0);
        let seq = EventSequence::empty(5.0, 1).unwrap();
        assert_eq!(intensity_naive(&model, &seq, 0, 3.0).unwrap(), 1.3);
        let rec = intensity_recursive(&model, &seq).unwrap();
        assert!(rec.at_events.is_empty());
        assert_eq!(rec.end_state, vec![vec![0.0]]);
    }

    #[test]
    fn zero_kernel_is_poisson() {
        let model = univariate(0.7, 0.0, 1.0);
        let seq = EventSequence::new(vec![Event::new(0.5, 0), Event::new(1.0, 0)], 3.0, 1).unwrap();
        assert_eq!(intensity_naive(&model, &seq, 0, 2.0).unwrap(), 0.7);
    }

    #[test]
    fn single_event_hand_value() {
        let model = univariate(1.0, 2.0, 1.0);
        let seq = EventSequence::new(vec![Event::new(1.0, 0)], 2.0, 1).unwrap();
        let lam = intensity_naive(&model, &seq, 0, 2.0).unwrap();
        assert!((lam - (1.0 + 2.0 * (-1.0f64).exp())).abs() < 1e-15);
        assert!((lam - 1.7358).abs() < 1e-4);
        // the event does not excite itself
        assert_eq!(intensity_naive(&model, &seq, 0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn recursion_two_events() {
        let model = univariate(1.0, 2.0, 1.0);
        let seq = EventSequence::new(vec![Event::new(1.0, 0), Event::new(2.0, 0)], 2.0, 1).unwrap();
        let rec = intensity_recursive(&model, &seq).unwrap();
        assert_eq!(rec.at_events[0], 1.0);
        assert!((rec.at_events[1] - (1.0 + 2.0 * (-1.0f64).exp())).abs() < 1e-15);
        // event at the horizon is excluded from the left-limit end state
        assert!((rec.end_state[0][0] - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn simultaneous_cross_marks_do_not_excite_each_other() {
        let alpha = Matrix::filled(2, 0.5);
        let model = HawkesModel::exponential(vec![1.0, 1.0], alpha, Matrix::filled(2, 1.0)).unwrap();
        let seq = EventSequence::new(vec![Event::new(1.0, 0), Event::new(1.0, 1)], 2.0, 2).unwrap();
        let rec = intensity_recursive(&model, &seq).unwrap();
        assert_eq!(rec.at_events, vec![1.0, 1.0]);
        assert_eq!(intensity_naive(&model, &seq, 1, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn errors() {
        let model = univariate(1.0, 2.0, 1.0);
        let seq = EventSequence::empty(2.0, 1).unwrap();
        assert!(matches!(intensity_naive(&model, &seq, 0, 2.5), Err(Error::Domain(_))));
        assert!(matches!(intensity_naive(&model, &seq, 0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(
            intensity_naive(&model, &seq, 1, 1.0),
            Err(Error::InvalidInput(_))
        ));
        let seq2 = EventSequence::empty(2.0, 2).unwrap();
        assert!(matches!(
            intensity_naive(&model, &seq2, 0, 1.0),
            Err(Error::InvalidInput(_))
        ));

        let mut beta = Matrix::filled(2, 1.0);
        beta[(1, 0)] = 2.0;
        let varied = HawkesModel::exponential(vec![1.0, 1.0], Matrix::filled(2, 0.1), beta).unwrap();
        assert!(matches!(
            intensity_recursive(&varied, &seq2),
            Err(Error::UnsupportedKernel(_))
        ));
        let pl = HawkesModel::new(
            vec![1.0],
            KernelSpec::PowerLaw {
                alpha: m1(1.0),
                c: m1(1.0),
                beta: m1(2.0),
            },
        )
        .unwrap();
        assert!(matches!(
            intensity_recursive(&pl, &seq),
            Err(Error::UnsupportedKernel(_))
        ));
    }
}
