//! Inner maximization over `(mu, alpha)` with the decays held fixed.
//!
//! With shared decays the log-likelihood separates by target component `i`:
//! `l_i(theta) = sum_{d_k = i} ln(theta . x_k) - theta . c`, where
//! `theta = (mu_i, alpha[u]_ij ...)`, `x_k = (1, s_j^u(t_k) ...)` are the
//! recursion states at the event and `c = (T, M_j^u(T) ...)`. Each `l_i` is
//! concave, so a bound-constrained Newton method with the exact Hessian
//! converges to the global maximum of each block.

use crate::error::Result;
use crate::hawkes::{EventSequence, ExcitationWalk};

use super::ConstraintMode;

/// Lower bound on background rates.
pub const MU_FLOOR: f64 = 1e-10;

const ARMIJO: f64 = 1e-4;

/// Design data of one component's block.
#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub(crate) width: usize,
    /// Row-major `rows x width`.
    pub(crate) features: Vec<f64>,
    pub(crate) linear: Vec<f64>,
    pub(crate) lower: Vec<f64>,
}

impl Block {
    pub(crate) fn rows(&self) -> usize {
        self.features.len() / self.width
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.features[k * self.width..(k + 1) * self.width]
    }

    /// Objective, or `None` if some intensity is not positive.
    pub(crate) fn value(&self, theta: &[f64]) -> Option<f64> {
        let mut total = -dot(theta, &self.linear);
        for k in 0..self.rows() {
            let lam = dot(theta, self.row(k));
            if !(lam > 0.0) {
                return None;
            }
            total += lam.ln();
        }
        Some(total)
    }

    /// Objective, gradient, and the negated Hessian `sum x x^T / lambda^2`.
    pub(crate) fn derivatives(&self, theta: &[f64]) -> Option<(f64, Vec<f64>, Vec<f64>)> {
        let p = self.width;
        let mut value = -dot(theta, &self.linear);
        let mut grad: Vec<f64> = self.linear.iter().map(|c| -c).collect();
        let mut curv = vec![0.0; p * p];
        for k in 0..self.rows() {
            let x = self.row(k);
            let lam = dot(theta, x);
            if !(lam > 0.0) {
                return None;
            }
            value += lam.ln();
            let inv = 1.0 / lam;
            for (g, xa) in grad.iter_mut().zip(x) {
                *g += xa * inv;
            }
            let inv2 = inv * inv;
            for a in 0..p {
                let xa = x[a] * inv2;
                if xa == 0.0 {
                    continue;
                }
                for b in a..p {
                    curv[a * p + b] += xa * x[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                curv[a * p + b] = curv[b * p + a];
            }
        }
        Some((value, grad, curv))
    }

    /// Largest projected-gradient entry.
    pub(crate) fn projected_gradient_norm(&self, theta: &[f64], grad: &[f64]) -> f64 {
        theta
            .iter()
            .zip(grad)
            .zip(&self.lower)
            .map(|((t, g), lb)| if *t <= *lb { g.max(0.0) } else { g.abs() })
            .fold(0.0, f64::max)
    }

    fn project(&self, theta: &mut [f64]) {
        for (t, lb) in theta.iter_mut().zip(&self.lower) {
            if *t < *lb {
                *t = *lb;
            }
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Builds one block per component from a single pass of the recursion.
pub(crate) fn build_blocks(seq: &EventSequence, decays: &[f64]) -> Vec<Block> {
    let m = seq.dim();
    let width = 1 + m * decays.len();
    let counts = seq.counts();
    let mut features: Vec<Vec<f64>> = counts.iter().map(|n| Vec::with_capacity(n * width)).collect();
    let mut walk = ExcitationWalk::new(decays, m);
    for ev in seq.events() {
        walk.advance(ev.time);
        let f = &mut features[ev.mark];
        f.push(1.0);
        f.extend_from_slice(walk.states());
        walk.push(ev.mark);
    }
    walk.advance(seq.horizon());
    let mut linear = Vec::with_capacity(width);
    linear.push(seq.horizon());
    for u in 0..decays.len() {
        for j in 0..m {
            linear.push(walk.integrated(u, j));
        }
    }
    let mut lower = vec![0.0; width];
    lower[0] = MU_FLOOR;
    features
        .into_iter()
        .map(|features| Block {
            width,
            features,
            linear: linear.clone(),
            lower: lower.clone(),
        })
        .collect()
}

/// State of one block's optimization.
#[derive(Debug, Clone)]
pub(crate) struct BlockSolver {
    pub(crate) theta: Vec<f64>,
    pub(crate) value: f64,
    pub(crate) pg_norm: f64,
    pub(crate) iterations: usize,
    pub(crate) converged: bool,
    pub(crate) stalled: bool,
    barrier: f64,
}

impl BlockSolver {
    pub(crate) fn new(block: &Block, theta: Vec<f64>, mode: ConstraintMode) -> Result<Self> {
        let value = block
            .value(&theta)
            .ok_or_else(|| crate::Error::Fit("initial point has a nonpositive intensity".into()))?;
        let barrier = match mode {
            ConstraintMode::Projection => 0.0,
            ConstraintMode::Barrier => 1e-2 * (1.0 + value.abs()) / block.width as f64,
        };
        Ok(BlockSolver {
            theta,
            value,
            pg_norm: f64::INFINITY,
            iterations: 0,
            converged: false,
            stalled: false,
            barrier,
        })
    }

    pub(crate) fn done(&self) -> bool {
        self.converged || self.stalled
    }

    /// One Newton iteration. Returns after updating `converged` / `stalled`.
    pub(crate) fn step(&mut self, block: &Block, tol: f64) {
        if self.barrier > 0.0 {
            self.barrier_step(block, tol);
        } else {
            self.projected_step(block, tol);
        }
    }

    fn projected_step(&mut self, block: &Block, tol: f64) {
        let Some((value, grad, curv)) = block.derivatives(&self.theta) else {
            self.stalled = true;
            return;
        };
        self.value = value;
        self.pg_norm = block.projected_gradient_norm(&self.theta, &grad);
        if self.pg_norm <= tol * (1.0 + value.abs()) {
            self.converged = true;
            return;
        }
        self.iterations += 1;
        let p = block.width;
        // Variables within eps of their bound and pushed outward are held.
        let mut trial = self.theta.clone();
        for (t, g) in trial.iter_mut().zip(&grad) {
            *t += g;
        }
        block.project(&mut trial);
        let eps = self
            .theta
            .iter()
            .zip(&trial)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
            .min(1e-6);
        let held: Vec<bool> = (0..p)
            .map(|a| self.theta[a] - block.lower[a] <= eps && grad[a] < 0.0)
            .collect();
        let free: Vec<usize> = (0..p).filter(|&a| !held[a]).collect();
        let mut direction = vec![0.0; p];
        for a in 0..p {
            if held[a] {
                direction[a] = block.lower[a] - self.theta[a];
            }
        }
        if !free.is_empty() {
            let sub: Vec<f64> = free
                .iter()
                .flat_map(|&a| free.iter().map(move |&b| (a, b)))
                .map(|(a, b)| curv[a * p + b])
                .collect();
            let rhs: Vec<f64> = free.iter().map(|&a| grad[a]).collect();
            if let Some(d) = solve_spd(&sub, free.len(), &rhs) {
                for (&a, v) in free.iter().zip(d) {
                    direction[a] = v;
                }
            }
        }
        if let Some((theta, value)) = self.search(block, &grad, &direction) {
            self.theta = theta;
            self.value = value;
            return;
        }
        // Newton direction failed the sufficient-increase test: projected gradient.
        if let Some((theta, value)) = self.search(block, &grad, &grad) {
            self.theta = theta;
            self.value = value;
            return;
        }
        self.stalled = true;
    }

    /// Backtracking along the projection arc `P(theta + s d)`.
    fn search(&self, block: &Block, grad: &[f64], direction: &[f64]) -> Option<(Vec<f64>, f64)> {
        let mut s = 1.0;
        for _ in 0..60 {
            let mut cand: Vec<f64> = self.theta.iter().zip(direction).map(|(t, d)| t + s * d).collect();
            block.project(&mut cand);
            let gain: f64 = cand
                .iter()
                .zip(&self.theta)
                .zip(grad)
                .map(|((c, t), g)| g * (c - t))
                .sum();
            if gain > 0.0 {
                if let Some(v) = block.value(&cand) {
                    if v >= self.value + ARMIJO * gain {
                        return Some((cand, v));
                    }
                }
            } else if gain == 0.0 {
                return None;
            }
            s *= 0.5;
        }
        None
    }

    /// Log-barrier path following: Newton on `l + tau * sum ln(theta - lower)`,
    /// shrinking `tau` tenfold each time the barrier problem is solved.
    fn barrier_step(&mut self, block: &Block, tol: f64) {
        let p = block.width;
        let Some((value, mut grad, mut curv)) = block.derivatives(&self.theta) else {
            self.stalled = true;
            return;
        };
        self.value = value;
        self.pg_norm = block.projected_gradient_norm(&self.theta, &grad);
        let tau = self.barrier;
        let slack: Vec<f64> = self.theta.iter().zip(&block.lower).map(|(t, l)| t - l).collect();
        for a in 0..p {
            grad[a] += tau / slack[a];
            curv[a * p + a] += tau / (slack[a] * slack[a]);
        }
        let Some(d) = solve_spd(&curv, p, &grad) else {
            self.stalled = true;
            return;
        };
        let decrement = dot(&grad, &d);
        let scale = 1.0 + value.abs();
        if decrement <= tol * scale {
            if tau * p as f64 <= tol * scale {
                self.converged = true;
                return;
            }
            self.barrier = tau * 0.1;
            return;
        }
        self.iterations += 1;
        let mut s: f64 = 1.0;
        for a in 0..p {
            if d[a] < 0.0 {
                s = s.min(-0.995 * slack[a] / d[a]);
            }
        }
        let merit = |theta: &[f64]| -> Option<f64> {
            let barrier: f64 = theta.iter().zip(&block.lower).map(|(t, l)| (t - l).ln()).sum();
            block.value(theta).map(|v| v + tau * barrier)
        };
        let current = merit(&self.theta).unwrap_or(f64::NEG_INFINITY);
        for _ in 0..60 {
            let cand: Vec<f64> = self.theta.iter().zip(&d).map(|(t, x)| t + s * x).collect();
            if let Some(v) = merit(&cand) {
                if v >= current + ARMIJO * s * decrement {
                    self.value = block.value(&cand).unwrap_or(self.value);
                    self.theta = cand;
                    return;
                }
            }
            s *= 0.5;
        }
        self.stalled = true;
    }
}

/// Solves `A x = b` for symmetric positive semidefinite `A`, adding a growing
/// ridge when the Cholesky factorization breaks down.
pub(crate) fn solve_spd(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let diag_max = (0..n).map(|i| a[i * n + i]).fold(0.0, f64::max);
    let mut ridge = 0.0;
    for _ in 0..12 {
        if let Some(x) = cholesky_solve(a, n, b, ridge) {
            return Some(x);
        }
        ridge = if ridge == 0.0 {
            1e-12 * diag_max.max(1e-300)
        } else {
            ridge * 100.0
        };
    }
    None
}

fn cholesky_solve(a: &[f64], n: usize, b: &[f64], ridge: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            if i == j {
                sum += ridge;
            }
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * n + i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
