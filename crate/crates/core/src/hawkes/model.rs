use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One event: a time in hours since the window start and a 0-based component index.
///
/// Files and the command line use 1-based marks; conversion happens at the I/O boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub mark: usize,
}

impl Event {
    pub fn new(time: f64, mark: usize) -> Self {
        Event { time, mark }
    }
}

/// Time-ordered marked events on the observation window `[0, horizon]`.
///
/// Events are kept in canonical `(time, mark)` order. Two components may fire
/// at the same instant; one component may not fire twice at the same instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSequence {
    events: Vec<Event>,
    horizon: f64,
    dim: usize,
}

impl EventSequence {
    /// Builds a sequence from events already in `(time, mark)` order.
    pub fn new(events: Vec<Event>, horizon: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !horizon.is_finite() || horizon < 0.0 {
            return Err(Error::invalid(format!(
                "horizon must be finite and >= 0, got {horizon}"
            )));
        }
        for (k, ev) in events.iter().enumerate() {
            if !ev.time.is_finite() || ev.time < 0.0 || ev.time > horizon {
                return Err(Error::invalid(format!(
                    "event {k} at time {} lies outside [0, {horizon}]",
                    ev.time
                )));
            }
            if ev.mark >= dim {
                return Err(Error::invalid(format!(
                    "event {k} has mark {} but dimension is {dim}",
                    ev.mark + 1
                )));
            }
            if k > 0 {
                let prev = events[k - 1];
                if ev.time < prev.time {
                    return Err(Error::invalid(format!(
                        "event {k} at time {} precedes event {} at time {}",
                        ev.time,
                        k - 1,
                        prev.time
                    )));
                }
                if ev.time == prev.time && ev.mark <= prev.mark {
                    if ev.mark == prev.mark {
                        return Err(Error::invalid(format!(
                            "component {} has two events at time {}",
                            ev.mark + 1,
                            ev.time
                        )));
                    }
                    return Err(Error::invalid(format!(
                        "simultaneous events {} and {k} are not ordered by mark",
                        k - 1
                    )));
                }
            }
        }
        Ok(EventSequence { events, horizon, dim })
    }

    /// Sorts by `(time, mark)` and validates.
    pub fn from_unsorted(mut events: Vec<Event>, horizon: f64, dim: usize) -> Result<Self> {
        events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.mark.cmp(&b.mark)));
        Self::new(events, horizon, dim)
    }

    pub fn empty(horizon: f64, dim: usize) -> Result<Self> {
        Self::new(Vec::new(), horizon, dim)
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Event counts per component.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.dim];
        for ev in &self.events {
            counts[ev.mark] += 1;
        }
        counts
    }

    /// Times of the events of one component, ascending.
    pub fn times_of(&self, mark: usize) -> Vec<f64> {
        self.events
            .iter()
            .filter(|ev| ev.mark == mark)
            .map(|ev| ev.time)
            .collect()
    }

    /// Multiplies every time and the horizon by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::invalid(format!("time scale must be positive, got {factor}")));
        }
        let events = self
            .events
            .iter()
            .map(|ev| Event::new(ev.time * factor, ev.mark))
            .collect();
        Self::new(events, self.horizon * factor, self.dim)
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }
}

/// Dense square matrix, row-major. Serialized as nested rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        Matrix {
            dim,
            data: vec![value; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            out[(i, i)] = 1.0;
        }
        out
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "matrix row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Matrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let dim = self.dim;
        self.data.iter().enumerate().map(move |(k, &v)| ((k / dim, k % dim), v))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim, "matrix dimensions differ");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.rows()
    }
}

/// Parametric excitation kernel `phi_ij(t)` of a multivariate Hawkes process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kernel", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `alpha_ij * exp(-beta_ij * t)`
    Exponential { alpha: Matrix, beta: Matrix },
    /// `sum_u alpha[u]_ij * exp(-beta[u] * t)` with decays shared by all pairs.
    SumExponentials { alpha: Vec<Matrix>, beta: Vec<f64> },
    /// `alpha_ij * (c_ij + t)^(-beta_ij)`
    PowerLaw { alpha: Matrix, c: Matrix, beta: Matrix },
}

impl KernelSpec {
    pub fn dim(&self) -> usize {
        match self {
            KernelSpec::Exponential { alpha, .. } | KernelSpec::PowerLaw { alpha, .. } => alpha.dim(),
            KernelSpec::SumExponentials { alpha, .. } => alpha.first().map_or(0, Matrix::dim),
        }
    }

    /// Checks the parameter constraints of each variant.
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if dim == 0 {
            return Err(Error::invalid("kernel has dimension 0"));
        }
        let nonneg = |name: &str, m: &Matrix| -> Result<()> {
            if m.dim() != dim {
                return Err(Error::invalid(format!(
                    "{name} is {0}x{0}, expected {dim}x{dim}",
                    m.dim()
                )));
            }
            match m.iter().find(|(_, v)| !(v.is_finite() && *v >= 0.0)) {
                Some(((i, j), v)) => Err(Error::invalid(format!(
                    "{name}[{}][{}] = {v} must be finite and >= 0",
                    i + 1,
                    j + 1
                ))),
                None => Ok(()),
            }
        };
        let above = |name: &str, m: &Matrix, floor: f64| -> Result<()> {
            if m.dim() != dim {
                return Err(Error::invalid(format!(
                    "{name} is {0}x{0}, expected {dim}x{dim}",
                    m.dim()
                )));
            }
            match m.iter().find(|(_, v)| !(v.is_finite() && *v > floor)) {
                Some(((i, j), v)) => Err(Error::invalid(format!(
                    "{name}[{}][{}] = {v} must be finite and > {floor}",
                    i + 1,
                    j + 1
                ))),
                None => Ok(()),
            }
        };
        match self {
            KernelSpec::Exponential { alpha, beta } => {
                nonneg("alpha", alpha)?;
                above("beta", beta, 0.0)
            }
            KernelSpec::SumExponentials { alpha, beta } => {
                if beta.is_empty() {
                    return Err(Error::invalid("sum-of-exponentials kernel needs at least one decay"));
                }
                if alpha.len() != beta.len() {
                    return Err(Error::invalid(format!(
                        "{} alpha matrices for {} decays",
                        alpha.len(),
                        beta.len()
                    )));
                }
                for (u, a) in alpha.iter().enumerate() {
                    nonneg(&format!("alpha[{}]", u + 1), a)?;
                }
                if let Some(b) = beta.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
                    return Err(Error::invalid(format!("decay {b} must be finite and > 0")));
                }
                if beta.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid(format!(
                        "decays must be strictly increasing, got {beta:?}"
                    )));
                }
                Ok(())
            }
            KernelSpec::PowerLaw { alpha, c, beta } => {
                nonneg("alpha", alpha)?;
                above("c", c, 0.0)?;
                above("beta", beta, 1.0)
            }
        }
    }

    /// `phi_ij(dt)` for `dt > 0`; zero otherwise.
    pub fn eval(&self, i: usize, j: usize, dt: f64) -> f64 {
        if dt <= 0.0 {
            return 0.0;
        }
        match self {
            KernelSpec::Exponential { alpha, beta } => alpha[(i, j)] * (-beta[(i, j)] * dt).exp(),
            KernelSpec::SumExponentials { alpha, beta } => {
                alpha.iter().zip(beta).map(|(a, b)| a[(i, j)] * (-b * dt).exp()).sum()
            }
            KernelSpec::PowerLaw { alpha, c, beta } => alpha[(i, j)] * (c[(i, j)] + dt).powf(-beta[(i, j)]),
        }
    }

    /// `int_0^dt phi_ij(s) ds` for `dt >= 0`.
    pub fn integral(&self, i: usize, j: usize, dt: f64) -> f64 {
        if dt <= 0.0 {
            return 0.0;
        }
        match self {
            KernelSpec::Exponential { alpha, beta } => {
                let b = beta[(i, j)];
                alpha[(i, j)] / b * -(-b * dt).exp_m1()
            }
            KernelSpec::SumExponentials { alpha, beta } => alpha
                .iter()
                .zip(beta)
                .map(|(a, b)| a[(i, j)] / b * -(-b * dt).exp_m1())
                .sum(),
            KernelSpec::PowerLaw { alpha, c, beta } => {
                let (a, c, b) = (alpha[(i, j)], c[(i, j)], beta[(i, j)]);
                a / (b - 1.0) * (c.powf(1.0 - b) - (c + dt).powf(1.0 - b))
            }
        }
    }

    /// Decays shared by every pair, with one excitation matrix per decay.
    ///
    /// `Some` for sum-of-exponentials kernels and for exponential kernels whose
    /// decay matrix is constant; these admit the O(n) Markov recursion.
    pub fn shared_decays(&self) -> Option<(Vec<f64>, Vec<Matrix>)> {
        match self {
            KernelSpec::SumExponentials { alpha, beta } => Some((beta.clone(), alpha.clone())),
            KernelSpec::Exponential { alpha, beta } => {
                let b0 = *beta.as_slice().first()?;
                beta.as_slice()
                    .iter()
                    .all(|&b| b == b0)
                    .then(|| (vec![b0], vec![alpha.clone()]))
            }
            KernelSpec::PowerLaw { .. } => None,
        }
    }
}

/// Background rates plus an excitation kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDocument", into = "ModelDocument")]
pub struct HawkesModel {
    mu: Vec<f64>,
    kernel: KernelSpec,
}

/// Serialized form: `{"mu": [...], "kernel": "sum_exponentials", "alpha": ..., "beta": ...}`.
#[derive(Serialize, Deserialize)]
struct ModelDocument {
    mu: Vec<f64>,
    #[serde(flatten)]
    kernel: KernelSpec,
}

impl TryFrom<ModelDocument> for HawkesModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        HawkesModel::new(doc.mu, doc.kernel)
    }
}

impl From<HawkesModel> for ModelDocument {
    fn from(m: HawkesModel) -> Self {
        ModelDocument {
            mu: m.mu,
            kernel: m.kernel,
        }
    }
}

impl HawkesModel {
    pub fn new(mu: Vec<f64>, kernel: KernelSpec) -> Result<Self> {
        kernel.validate()?;
        if mu.len() != kernel.dim() {
            return Err(Error::invalid(format!(
                "{} background rates for a {}-dimensional kernel",
                mu.len(),
                kernel.dim()
            )));
        }
        if let Some((i, m)) = mu.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::invalid(format!("mu[{}] = {m} must be finite and > 0", i + 1)));
        }
        Ok(HawkesModel { mu, kernel })
    }

    pub fn sum_exponentials(mu: Vec<f64>, alpha: Vec<Matrix>, beta: Vec<f64>) -> Result<Self> {
        Self::new(mu, KernelSpec::SumExponentials { alpha, beta })
    }

    pub fn exponential(mu: Vec<f64>, alpha: Matrix, beta: Matrix) -> Result<Self> {
        Self::new(mu, KernelSpec::Exponential { alpha, beta })
    }

    /// Homogeneous Poisson model: a zero exponential kernel with unit decay.
    pub fn poisson(mu: Vec<f64>) -> Result<Self> {
        let m = mu.len();
        Self::new(
            mu,
            KernelSpec::Exponential {
                alpha: Matrix::zeros(m),
                beta: Matrix::filled(m, 1.0),
            },
        )
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub(crate) fn check_sequence(&self, seq: &EventSequence) -> Result<()> {
        if seq.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "model has dimension {} but sequence has dimension {}",
                self.dim(),
                seq.dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn check_component(&self, i: usize) -> Result<()> {
        if i >= self.dim() {
            return Err(Error::invalid(format!(
                "component {} out of range 1..={}",
                i + 1,
                self.dim()
            )));
        }
        Ok(())
    }
}
