//! Exact simulation of multivariate Hawkes processes by Ogata's thinning.
//!
//! With nonnegative, nonincreasing kernels the total intensity can only
//! decrease between events, so the total intensity just after the last
//! accepted or rejected candidate bounds it until the next event.
//!
//! Randomness comes from ChaCha8 seeded with [`SimConfig::seed`]; the output
//! is bitwise reproducible across platforms. Independent replicates should use
//! distinct seeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hawkes::{kernel_norms, Event, EventSequence, HawkesModel, KernelSpec, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: HawkesModel,
    pub horizon: f64,
    pub seed: u64,
    pub max_events: usize,
    /// Simulate even when the kernel-norm spectral radius is >= 1.
    pub allow_unstable: bool,
}

impl SimConfig {
    pub fn new(model: HawkesModel, horizon: f64, seed: u64) -> Self {
        SimConfig {
            model,
            horizon,
            seed,
            max_events: 10_000_000,
            allow_unstable: false,
        }
    }

    pub fn with_max_events(mut self, max_events: usize) -> Self {
        self.max_events = max_events;
        self
    }

    pub fn allow_unstable(mut self, allow: bool) -> Self {
        self.allow_unstable = allow;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.max_events == 0 {
            return Err(Error::Config("max_events must be at least 1".into()));
        }
        let norms = kernel_norms(&self.model)?;
        if norms.supercritical && !self.allow_unstable {
            return Err(Error::Unstable {
                spectral_radius: norms.spectral_radius,
            });
        }
        Ok(())
    }
}

pub fn simulate(config: &SimConfig) -> Result<EventSequence> {
    config.validate()?;
    let model = &config.model;
    let m = model.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut tracker = Tracker::new(model);
    let mut events: Vec<Event> = Vec::new();
    let mut lam = vec![0.0; m];
    let mut t = 0.0;
    let mut bound: f64 = model.mu().iter().sum();
    loop {
        // 1 - U lies in (0, 1], so the waiting time is finite.
        let wait = -(1.0 - rng.random::<f64>()).ln() / bound;
        let s = t + wait;
        if s > config.horizon {
            break;
        }
        tracker.intensities_at(s, &mut lam);
        let total: f64 = lam.iter().sum();
        let draw = rng.random::<f64>() * bound;
        t = s;
        if draw > total {
            bound = total;
            continue;
        }
        let mut acc = 0.0;
        let mut mark = m - 1;
        for (i, l) in lam.iter().enumerate() {
            acc += l;
            if draw <= acc {
                mark = i;
                break;
            }
        }
        if events.len() == config.max_events {
            let horizon = events.last().map_or(0.0, |e| e.time);
            return Err(Error::Truncated {
                max_events: config.max_events,
                stopped_at: s,
                partial: Box::new(EventSequence::new(events, horizon, m)?),
            });
        }
        events.push(Event::new(s, mark));
        bound = total + tracker.jump(mark);
    }
    EventSequence::new(events, config.horizon, m)
}

/// Current intensities of every component during a simulation.
enum Tracker<'a> {
    /// Shared decays: states `v[i * U + u]`, exact O(m * U) updates.
    Markov {
        mu: &'a [f64],
        decays: Vec<f64>,
        alpha: Vec<Matrix>,
        states: Vec<f64>,
        time: f64,
    },
    /// Any other kernel: direct summation over the history.
    Direct {
        model: &'a HawkesModel,
        history: Vec<Event>,
        time: f64,
    },
}

impl<'a> Tracker<'a> {
    fn new(model: &'a HawkesModel) -> Self {
        match model.kernel().shared_decays() {
            Some((decays, alpha)) => Tracker::Markov {
                mu: model.mu(),
                states: vec![0.0; model.dim() * decays.len()],
                decays,
                alpha,
                time: 0.0,
            },
            None => Tracker::Direct {
                model,
                history: Vec::new(),
                time: 0.0,
            },
        }
    }

    /// Left-limit intensities at `t`; also moves the tracker to `t`.
    fn intensities_at(&mut self, t: f64, out: &mut [f64]) {
        match self {
            Tracker::Markov {
                mu,
                decays,
                states,
                time,
                ..
            } => {
                let nu = decays.len();
                let factors: Vec<f64> = decays.iter().map(|b| (-b * (t - *time)).exp()).collect();
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &mut states[i * nu..(i + 1) * nu];
                    let mut sum = mu[i];
                    for (v, f) in row.iter_mut().zip(&factors) {
                        *v *= f;
                        sum += *v;
                    }
                    *o = sum;
                }
                *time = t;
            }
            Tracker::Direct { model, history, time } => {
                let kernel = model.kernel();
                for (i, o) in out.iter_mut().enumerate() {
                    *o = model.mu()[i]
                        + history
                            .iter()
                            .map(|ev| kernel.eval(i, ev.mark, t - ev.time))
                            .sum::<f64>();
                }
                *time = t;
            }
        }
    }

    /// Registers an event of `mark` at the current time; returns the total
    /// intensity jump it causes.
    fn jump(&mut self, mark: usize) -> f64 {
        match self {
            Tracker::Markov {
                alpha, states, decays, ..
            } => {
                let nu = decays.len();
                let mut total = 0.0;
                for (u, a) in alpha.iter().enumerate() {
                    for i in 0..a.dim() {
                        let x = a[(i, mark)];
                        states[i * nu + u] += x;
                        total += x;
                    }
                }
                total
            }
            Tracker::Direct { model, history, time } => {
                history.push(Event::new(*time, mark));
                let kernel = model.kernel();
                (0..model.dim()).map(|i| peak(kernel, i, mark)).sum()
            }
        }
    }
}

/// `phi_ij(0+)`.
fn peak(kernel: &KernelSpec, i: usize, j: usize) -> f64 {
    match kernel {
        KernelSpec::Exponential { alpha, .. } => alpha[(i, j)],
        KernelSpec::SumExponentials { alpha, .. } => alpha.iter().map(|a| a[(i, j)]).sum(),
        KernelSpec::PowerLaw { alpha, c, beta } => alpha[(i, j)] * c[(i, j)].powf(-beta[(i, j)]),
    }
}
