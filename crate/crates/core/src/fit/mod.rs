//! Maximum-likelihood estimation of sum-of-exponentials Hawkes models.
//!
//! [`fit_given_decays`] maximizes the log-likelihood over background rates
//! and excitation matrices for fixed decays. [`fit_full`] searches the decays
//! with Nelder-Mead on the profile log-likelihood, in log-decay coordinates.
//! [`fit_poisson`] is the homogeneous-Poisson baseline.

mod inner;
pub mod nelder_mead;
mod poisson;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hawkes::{kernel_norms, log_likelihood, EventSequence, HawkesModel, KernelNorms, Matrix};
use inner::{build_blocks, BlockSolver};
use nelder_mead::NelderMeadOptions;

pub use inner::MU_FLOOR;
pub use poisson::{fit_poisson, PoissonFit};

/// How the inner problem keeps `mu > 0` and `alpha >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Bound-constrained Newton with projection; active bounds land exactly on the floor.
    #[default]
    Projection,
    /// Interior log-barrier path following; estimates stay strictly inside.
    Barrier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub num_decays: usize,
    pub decay_init: Vec<f64>,
    pub inner_max_iter: usize,
    pub outer_max_iter: usize,
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub constraint: ConstraintMode,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            num_decays: 3,
            decay_init: vec![0.5, 5.0, 50.0],
            inner_max_iter: 100,
            outer_max_iter: 200,
            inner_tol: 1e-8,
            outer_tol: 1e-3,
            constraint: ConstraintMode::Projection,
        }
    }
}

impl FitConfig {
    /// Config with `decays` as the initial (or fixed) decays.
    pub fn with_decays(decays: Vec<f64>) -> Self {
        FitConfig {
            num_decays: decays.len(),
            decay_init: decays,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_decays == 0 {
            return Err(Error::Config("num_decays must be at least 1".into()));
        }
        if self.decay_init.len() != self.num_decays {
            return Err(Error::Config(format!(
                "decay_init has {} entries but num_decays is {}",
                self.decay_init.len(),
                self.num_decays
            )));
        }
        canonical_decays(&self.decay_init).map(|_| ())?;
        if self.inner_max_iter == 0 {
            return Err(Error::Config("inner_max_iter must be at least 1".into()));
        }
        if !(self.inner_tol > 0.0 && self.outer_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Sorted copy of `decays`; rejects nonpositive or repeated values.
fn canonical_decays(decays: &[f64]) -> Result<Vec<f64>> {
    let mut sorted = decays.to_vec();
    if sorted.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
        return Err(Error::Config(format!("decays must be positive, got {decays:?}")));
    }
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("decays must be distinct, got {decays:?}")));
    }
    Ok(sorted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Iterations {
    /// Newton iterations of the final inner fit.
    pub inner: usize,
    /// Nelder-Mead iterations.
    pub outer: usize,
    /// Profile-likelihood evaluations (inner fits) performed.
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: HawkesModel,
    /// Log-likelihood of `model`, recomputed by [`crate::hawkes::log_likelihood`].
    pub log_lik: f64,
    pub kernel_norms: KernelNorms,
    pub converged: bool,
    pub iterations: Iterations,
    pub optimizer_trace: Vec<TracePoint>,
    /// Largest projected-gradient entry over all blocks at the returned point.
    pub projected_gradient: f64,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn decays(&self) -> &[f64] {
        match self.model.kernel() {
            crate::hawkes::KernelSpec::SumExponentials { beta, .. } => beta,
            _ => unreachable!("fits always produce sum-of-exponentials kernels"),
        }
    }

    pub fn alpha(&self) -> &[Matrix] {
        match self.model.kernel() {
            crate::hawkes::KernelSpec::SumExponentials { alpha, .. } => alpha,
            _ => unreachable!("fits always produce sum-of-exponentials kernels"),
        }
    }
}

/// JSON layout: `mu`, `alpha[u][i][j]`, `beta[u]`, `log_lik`, `kernel_norms`, `converged`, ...
///
/// The `kernel`/`mu`/`alpha`/`beta` fields make the document loadable as a
/// [`HawkesModel`].
#[derive(Debug, Clone, Serialize)]
pub struct FitDocument<'a> {
    pub kernel: &'static str,
    pub mu: &'a [f64],
    pub alpha: &'a [Matrix],
    pub beta: &'a [f64],
    pub log_lik: f64,
    pub kernel_norms: &'a Matrix,
    pub spectral_radius: f64,
    pub converged: bool,
    pub iterations: Iterations,
    pub projected_gradient: f64,
    pub optimizer_trace: &'a [TracePoint],
    pub warnings: &'a [String],
}

impl FitResult {
    pub fn document(&self) -> FitDocument<'_> {
        FitDocument {
            kernel: "sum_exponentials",
            mu: self.model.mu(),
            alpha: self.alpha(),
            beta: self.decays(),
            log_lik: self.log_lik,
            kernel_norms: &self.kernel_norms.matrix,
            spectral_radius: self.kernel_norms.spectral_radius,
            converged: self.converged,
            iterations: self.iterations,
            projected_gradient: self.projected_gradient,
            optimizer_trace: &self.optimizer_trace,
            warnings: &self.warnings,
        }
    }
}

/// Maximizes the log-likelihood over `mu_i > 0` and `alpha[u]_ij >= 0` with
/// the decays fixed.
///
/// Non-convergence within `inner_max_iter` is reported through
/// `converged = false` with the best iterate, not as an error.
pub fn fit_given_decays(seq: &EventSequence, decays: &[f64], config: &FitConfig) -> Result<FitResult> {
    fit_from(seq, decays, config, None)
}

/// Inner fit, optionally warm-started from an earlier fit at other decays.
///
/// The warm start keeps each kernel norm `alpha[u]_ij / beta_u` of the earlier
/// fit (after sorting both decay sets) and falls back to the default start if
/// it is infeasible.
fn fit_from(seq: &EventSequence, decays: &[f64], config: &FitConfig, warm: Option<&HawkesModel>) -> Result<FitResult> {
    config.validate()?;
    let decays = canonical_decays(decays)?;
    if decays.len() != config.num_decays {
        return Err(Error::Config(format!(
            "{} decays supplied but num_decays is {}",
            decays.len(),
            config.num_decays
        )));
    }
    if !(seq.horizon() > 0.0) {
        return Err(Error::invalid("observation window has zero length"));
    }
    let m = seq.dim();
    let nu = decays.len();
    let counts = seq.counts();
    let mut warnings = Vec::new();
    let blocks = build_blocks(seq, &decays);
    let horizon = seq.horizon();

    let mut solvers: Vec<Option<BlockSolver>> = Vec::with_capacity(m);
    for (i, block) in blocks.iter().enumerate() {
        if counts[i] == 0 {
            warnings.push(format!(
                "component {} has no events; its background rate and excitation row are pinned to the floor",
                i + 1
            ));
            solvers.push(None);
            continue;
        }
        let mut theta = vec![0.0; block.width];
        theta[0] = (0.5 * counts[i] as f64 / horizon).max(MU_FLOOR);
        for u in 0..nu {
            for j in 0..m {
                theta[1 + u * m + j] = 0.1 * decays[u] / (m * nu) as f64;
            }
        }
        let warm_solver = warm
            .and_then(|w| warm_theta(w, i, &decays))
            .and_then(|t| BlockSolver::new(block, t, config.constraint).ok());
        let solver = match warm_solver {
            Some(s) => s,
            None => BlockSolver::new(block, theta, config.constraint)?,
        };
        solvers.push(Some(solver));
    }

    let objective = |solvers: &[Option<BlockSolver>]| -> f64 {
        solvers
            .iter()
            .zip(&blocks)
            .map(|(s, b)| match s {
                Some(s) => s.value,
                None => -MU_FLOOR * b.linear[0],
            })
            .sum()
    };
    let mut trace = vec![TracePoint {
        iteration: 0,
        objective: objective(&solvers),
    }];
    let mut iterations = 0;
    while iterations < config.inner_max_iter && solvers.iter().flatten().any(|s| !s.done()) {
        iterations += 1;
        for (solver, block) in solvers.iter_mut().zip(&blocks) {
            if let Some(s) = solver {
                if !s.done() {
                    s.step(block, config.inner_tol);
                }
            }
        }
        trace.push(TracePoint {
            iteration: iterations,
            objective: objective(&solvers),
        });
    }
    // Refresh the stationarity measure at the final iterates.
    let mut converged = true;
    let mut projected_gradient: f64 = 0.0;
    for (i, (solver, block)) in solvers.iter().zip(&blocks).enumerate() {
        let Some(s) = solver else { continue };
        let (value, grad, _) = block
            .derivatives(&s.theta)
            .ok_or_else(|| Error::Fit(format!("component {} reached a nonpositive intensity", i + 1)))?;
        let pg = block.projected_gradient_norm(&s.theta, &grad);
        projected_gradient = projected_gradient.max(pg);
        let stationary = pg <= config.inner_tol * (1.0 + value.abs());
        if !(s.converged && (stationary || config.constraint == ConstraintMode::Barrier)) {
            converged = false;
            if s.stalled && !stationary {
                warnings.push(format!(
                    "component {}: line search stalled with projected gradient {pg:e}",
                    i + 1
                ));
            }
        }
    }
    if !converged && iterations >= config.inner_max_iter {
        warnings.push(format!(
            "inner optimizer hit inner_max_iter = {}",
            config.inner_max_iter
        ));
    }

    let mut mu = vec![MU_FLOOR; m];
    let mut alpha = vec![Matrix::zeros(m); nu];
    for (i, solver) in solvers.iter().enumerate() {
        let Some(s) = solver else { continue };
        mu[i] = s.theta[0].max(MU_FLOOR);
        for (u, a) in alpha.iter_mut().enumerate() {
            for j in 0..m {
                a[(i, j)] = s.theta[1 + u * m + j].max(0.0);
            }
        }
    }
    let model = HawkesModel::sum_exponentials(mu, alpha, decays)?;
    let log_lik = log_likelihood(&model, seq)?;
    let inner_objective = objective(&solvers);
    if (inner_objective - log_lik).abs() > 1e-6 * (1.0 + log_lik.abs()) {
        warnings.push(format!(
            "inner objective {inner_objective} disagrees with recomputed log-likelihood {log_lik}"
        ));
    }
    let kernel_norms = kernel_norms(&model)?;
    Ok(FitResult {
        model,
        log_lik,
        kernel_norms,
        converged,
        iterations: Iterations {
            inner: iterations,
            outer: 0,
            evaluations: 1,
        },
        optimizer_trace: trace,
        projected_gradient,
        warnings,
    })
}

fn warm_theta(warm: &HawkesModel, i: usize, decays: &[f64]) -> Option<Vec<f64>> {
    let (old_decays, old_alpha) = warm.kernel().shared_decays()?;
    if old_decays.len() != decays.len() || warm.dim() <= i {
        return None;
    }
    let m = warm.dim();
    let mut theta = vec![0.0; 1 + m * decays.len()];
    // a background rate on the floor would make the start degenerate
    theta[0] = warm.mu()[i].max(1e-3);
    for (u, (a, b_old)) in old_alpha.iter().zip(&old_decays).enumerate() {
        for j in 0..m {
            // keep a small interior value so bounds can be released
            theta[1 + u * m + j] = (a[(i, j)] / b_old * decays[u]).max(1e-6);
        }
    }
    theta.iter().all(|v| v.is_finite()).then_some(theta)
}

/// Profile-likelihood search over the shared decays followed by the inner
/// fit at the best decays found.
pub fn fit_full(seq: &EventSequence, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let init = canonical_decays(&config.decay_init)?;
    if config.outer_max_iter == 0 {
        let mut result = fit_given_decays(seq, &init, config)?;
        result.converged = false;
        return Ok(result);
    }

    let mut best: Option<FitResult> = None;
    let mut failures: Vec<String> = Vec::new();
    let mut evaluations = 0;
    let profile = |log_decays: &[f64]| -> f64 {
        evaluations += 1;
        let decays: Vec<f64> = log_decays.iter().map(|y| y.exp()).collect();
        let outcome =
            canonical_decays(&decays).and_then(|d| fit_from(seq, &d, config, best.as_ref().map(|b| &b.model)));
        match outcome {
            Ok(fit) => {
                let value = fit.log_lik;
                if best.as_ref().is_none_or(|b| value > b.log_lik) {
                    best = Some(fit);
                }
                -value
            }
            Err(e) => {
                failures.push(format!("decays {decays:?}: {e}"));
                f64::INFINITY
            }
        }
    };
    let start: Vec<f64> = init.iter().map(|b| b.ln()).collect();
    let mut simplex = vec![start.clone()];
    for d in 0..start.len() {
        let mut v = start.clone();
        v[d] += 1.05f64.ln();
        simplex.push(v);
    }
    let opts = NelderMeadOptions {
        max_iter: config.outer_max_iter,
        diameter_tol: config.outer_tol,
        ..Default::default()
    };
    let outcome = nelder_mead::minimize(profile, simplex, &opts);
    let Some(mut result) = best else {
        return Err(Error::Fit(format!(
            "every profile evaluation failed; first failure: {}",
            failures.first().map_or("none recorded", String::as_str)
        )));
    };
    result.warnings.extend(
        failures
            .into_iter()
            .map(|f| format!("profile evaluation scored -inf: {f}")),
    );
    if !outcome.converged {
        result.warnings.push(format!(
            "decay search stopped after {} iterations without reaching outer_tol",
            outcome.iterations
        ));
    }
    result.converged = result.converged && outcome.converged;
    result.iterations.outer = outcome.iterations;
    result.iterations.evaluations = evaluations;
    let trace = outcome
        .trace
        .iter()
        .enumerate()
        .map(|(k, v)| TracePoint {
            iteration: k,
            objective: -v,
        })
        .collect();
    result.optimizer_trace = trace;
    Ok(result)
}
