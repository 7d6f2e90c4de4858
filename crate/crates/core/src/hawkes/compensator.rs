use crate::error::Result;
use crate::hawkes::intensity::{check_time, intensity_unchecked, ExcitationWalk};
use crate::hawkes::model::{EventSequence, HawkesModel};
use crate::quadrature::{self, Tolerance};

/// Compensator `Lambda_i(t) = int_0^t lambda_i(s) ds`.
///
/// Exact for every kernel family: each past event contributes the kernel's
/// antiderivative over `[t_k, t]`.
pub fn compensator(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> Result<f64> {
    model.check_sequence(seq)?;
    model.check_component(i)?;
    check_time(seq, t)?;
    Ok(compensator_unchecked(model, seq, i, t))
}

fn compensator_unchecked(model: &HawkesModel, seq: &EventSequence, i: usize, t: f64) -> f64 {
    let kernel = model.kernel();
    let excitation: f64 = seq
        .events()
        .iter()
        .take_while(|ev| ev.time < t)
        .map(|ev| kernel.integral(i, ev.mark, t - ev.time))
        .sum();
    model.mu()[i] * t + excitation
}

/// Compensator by adaptive quadrature of the direct-summation intensity.
///
/// The intensity is smooth between events, so the integral is split at every
/// event time before the adaptive rule is applied.
pub fn compensator_quadrature(
    model: &HawkesModel,
    seq: &EventSequence,
    i: usize,
    t: f64,
    tol: Tolerance,
) -> Result<f64> {
    model.check_sequence(seq)?;
    model.check_component(i)?;
    check_time(seq, t)?;
    let mut breaks = vec![0.0];
    breaks.extend(seq.events().iter().map(|ev| ev.time).filter(|&s| s > 0.0 && s < t));
    breaks.push(t);
    breaks.dedup();
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        // Events before the piece's right end are exactly those at or before a.
        total += quadrature::integrate(|s| intensity_unchecked(model, seq, i, s), a, b, tol)?;
    }
    Ok(total)
}

/// `Lambda_i(T)` for every component.
pub fn compensators_at_horizon(model: &HawkesModel, seq: &EventSequence) -> Result<Vec<f64>> {
    model.check_sequence(seq)?;
    let t = seq.horizon();
    if let Some((decays, alpha)) = model.kernel().shared_decays() {
        let m = model.dim();
        let mut walk = ExcitationWalk::new(&decays, m);
        for ev in seq.events() {
            walk.advance(ev.time);
            walk.push(ev.mark);
        }
        walk.advance(t);
        return Ok((0..m)
            .map(|i| model.mu()[i] * t + markov_excitation_integral(&walk, &alpha, i))
            .collect());
    }
    Ok((0..model.dim())
        .map(|i| compensator_unchecked(model, seq, i, t))
        .collect())
}

/// `Lambda_i(t_k)` at each of component `i`'s own event times, for every `i`.
pub fn compensator_at_own_events(model: &HawkesModel, seq: &EventSequence) -> Result<Vec<Vec<f64>>> {
    model.check_sequence(seq)?;
    let m = model.dim();
    let mut out = vec![Vec::new(); m];
    if let Some((decays, alpha)) = model.kernel().shared_decays() {
        let mut walk = ExcitationWalk::new(&decays, m);
        for ev in seq.events() {
            walk.advance(ev.time);
            let i = ev.mark;
            out[i].push(model.mu()[i] * ev.time + markov_excitation_integral(&walk, &alpha, i));
            walk.push(i);
        }
    } else {
        for ev in seq.events() {
            out[ev.mark].push(compensator_unchecked(model, seq, ev.mark, ev.time));
        }
    }
    Ok(out)
}

fn markov_excitation_integral(walk: &ExcitationWalk<'_>, alpha: &[crate::hawkes::Matrix], i: usize) -> f64 {
    alpha
        .iter()
        .enumerate()
        .map(|(u, a)| {
            a.row(i)
                .iter()
                .enumerate()
                .map(|(j, x)| if *x == 0.0 { 0.0 } else { x * walk.integrated(u, j) })
                .sum::<f64>()
        })
        .sum()
}
