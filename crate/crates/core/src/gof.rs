//! Goodness of fit by the random time change theorem.
//!
//! Under the true model, the compensator increments between successive events
//! of a component are i.i.d. unit exponentials. The residuals are compared to
//! Exp(1) with a Q-Q plot, the slope of the origin-anchored regression line
//! through it, and a one-sample Kolmogorov-Smirnov test.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::fit_poisson;
use crate::hawkes::{compensator_at_own_events, EventSequence, HawkesModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelLabel {
    Hawkes,
    Poisson,
}

/// Rescaled interarrivals of one component (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentResiduals {
    pub component: usize,
    pub interarrivals: Vec<f64>,
    /// Fewer than two events: no residuals are reported.
    pub insufficient: bool,
}

/// Maps each component's event times through its compensator and returns
/// the successive differences `Lambda_i(t_1), Lambda_i(t_2) - Lambda_i(t_1), ...`.
pub fn time_rescale(model: &HawkesModel, seq: &EventSequence) -> Result<Vec<ComponentResiduals>> {
    let values = compensator_at_own_events(model, seq)?;
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(component, lambdas)| {
            if lambdas.len() < 2 {
                return ComponentResiduals {
                    component,
                    interarrivals: Vec::new(),
                    insufficient: true,
                };
            }
            let mut prev = 0.0;
            let interarrivals = lambdas
                .iter()
                .map(|&v| {
                    let d = v - prev;
                    prev = v;
                    d
                })
                .collect();
            ComponentResiduals {
                component,
                interarrivals,
                insufficient: false,
            }
        })
        .collect())
}

/// Q-Q pairs `(theoretical, empirical)` against Exp(1) with plotting
/// positions `j / (n + 1)`. Empty input gives empty output.
pub fn qq_exponential(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(k, y)| {
            let p = (k + 1) as f64 / (n + 1.0);
            (-(-p).ln_1p(), y)
        })
        .collect()
}

/// Slope of the least-squares line through the origin, empirical on theoretical.
pub fn qq_slope(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::domain(format!(
            "slope needs at least 2 Q-Q pairs, got {}",
            pairs.len()
        )));
    }
    let x0 = pairs[0].0;
    if pairs.iter().all(|(x, _)| *x == x0) {
        return Err(Error::domain("slope undefined: all theoretical quantiles are equal"));
    }
    let sxy: f64 = pairs.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = pairs.iter().map(|(x, _)| x * x).sum();
    Ok(sxy / sxx)
}

/// `|slope - 1|` of [`qq_slope`].
pub fn slope_deviation(pairs: &[(f64, f64)]) -> Result<f64> {
    qq_slope(pairs).map(|s| (s - 1.0).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov-Smirnov test against the CDF `1 - exp(-x)`.
///
/// The p-value uses the asymptotic Kolmogorov distribution with Stephens'
/// finite-sample correction `(sqrt(n) + 0.12 + 0.11 / sqrt(n)) * D`.
pub fn ks_exp1(samples: &[f64]) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::invalid("KS test needs at least one sample"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let cdf = if x > 0.0 { -(-x).exp_m1() } else { 0.0 };
        d = d.max((k + 1) as f64 / n - cdf).max(cdf - k as f64 / n);
    }
    let root = n.sqrt();
    let p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
    Ok(KsResult { statistic: d, p_value })
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K <= l) = sqrt(2 pi) / l * sum exp(-(2k - 1)^2 pi^2 / (8 l^2))
        let f = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let cdf: f64 = (1..=8)
            .map(|k| {
                let o = (2 * k - 1) as f64;
                (o * o * f).exp()
            })
            .sum::<f64>()
            * (2.0 * std::f64::consts::PI).sqrt()
            / lambda;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let sum: f64 = (1..=100)
            .map(|k| {
                let k = k as f64;
                let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * k * k * lambda * lambda).exp()
            })
            .sum();
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentGof {
    /// 1-based component index.
    pub component: usize,
    pub events: usize,
    pub rescaled_interarrivals: Vec<f64>,
    pub qq_pairs: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub slope_deviation: Option<f64>,
    pub ks_statistic: Option<f64>,
    pub ks_p_value: Option<f64>,
    /// Why the statistics are missing, when they are.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GofReport {
    pub model_label: ModelLabel,
    pub components: Vec<ComponentGof>,
}

impl GofReport {
    pub fn component(&self, i: usize) -> &ComponentGof {
        &self.components[i]
    }
}

fn component_gof(res: ComponentResiduals, events: usize, flag: Option<String>) -> Result<ComponentGof> {
    let component = res.component + 1;
    let flag = flag.or_else(|| {
        res.insufficient
            .then(|| format!("{events} event(s); at least 2 are needed"))
    });
    if flag.is_some() {
        return Ok(ComponentGof {
            component,
            events,
            rescaled_interarrivals: Vec::new(),
            qq_pairs: Vec::new(),
            slope: None,
            slope_deviation: None,
            ks_statistic: None,
            ks_p_value: None,
            flag,
        });
    }
    let qq_pairs = qq_exponential(&res.interarrivals);
    let slope = qq_slope(&qq_pairs)?;
    let ks = ks_exp1(&res.interarrivals)?;
    Ok(ComponentGof {
        component,
        events,
        rescaled_interarrivals: res.interarrivals,
        qq_pairs,
        slope: Some(slope),
        slope_deviation: Some((slope - 1.0).abs()),
        ks_statistic: Some(ks.statistic),
        ks_p_value: Some(ks.p_value),
        flag: None,
    })
}

/// Full residual analysis of `model` on `seq`.
pub fn gof_report(model: &HawkesModel, seq: &EventSequence, label: ModelLabel) -> Result<GofReport> {
    let counts = seq.counts();
    let components = time_rescale(model, seq)?
        .into_iter()
        .map(|res| {
            let n = counts[res.component];
            component_gof(res, n, None)
        })
        .collect::<Result<_>>()?;
    Ok(GofReport {
        model_label: label,
        components,
    })
}

/// Residual analysis of the homogeneous-Poisson fit; empty components are flagged.
pub fn poisson_gof_report(seq: &EventSequence) -> Result<GofReport> {
    let fit = fit_poisson(seq)?;
    let model = fit.model()?;
    let counts = seq.counts();
    let components = time_rescale(&model, seq)?
        .into_iter()
        .map(|res| {
            let i = res.component;
            let flag = fit.empty[i].then(|| "no events; Poisson rate is zero".to_string());
            component_gof(res, counts[i], flag)
        })
        .collect::<Result<_>>()?;
    Ok(GofReport {
        model_label: ModelLabel::Poisson,
        components,
    })
}

/// Writes Q-Q pairs as a two-column CSV with header `theoretical,empirical`.
pub fn write_qq_csv<W: Write>(out: W, pairs: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theoretical", "empirical"]).map_err(csv_err)?;
    for (x, y) in pairs {
        w.write_record([format!("{x:.12e}"), format!("{y:.12e}")])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
