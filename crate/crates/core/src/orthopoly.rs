//! Three-term recurrences of the orthonormal polynomials `p_m(w)` and the
//! Gauss rules built from them.
//!
//! All supported weights are even, so the recurrence is symmetric
//! (`alpha ≡ 0`) and
//! `√β_{k+1} p_{k+1}(x) = x p_k(x) - √β_k p_{k-1}(x)`, `p_0 = β_0^{-1/2}`.
//!
//! Gauss nodes are the eigenvalues of the Jacobi matrix. Cotes numbers come
//! from the Christoffel function `λ_k = 1 / Σ_{j<m} p_j(x_k)²`, which is the
//! same quantity as `β_0 v_{0k}²` but stays relatively accurate for the tiny
//! tail weights; it is accumulated in log space so that weights far below
//! the `f64` range are still available in scaled form `λ_k / w(x_k)`.

use crate::error::{Error, Result};
use crate::tridiag;
use crate::weights::{Family, WeightSpec};

/// How a [`RecurrenceTable`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecurrenceMethod {
    ClosedForm,
    StieltjesLanczos,
}

/// Recurrence coefficients for the first `len()` orthonormal polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceTable {
    spec: WeightSpec,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    method: RecurrenceMethod,
}

impl RecurrenceTable {
    /// The univariate view of `spec` this table belongs to.
    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `beta[0] = ∫ w`, `beta[k] > 0` the squared off-diagonal entries.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn method(&self) -> RecurrenceMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    /// Closed form when available, otherwise the discretized Stieltjes
    /// procedure with default control.
    pub fn for_spec(spec: &WeightSpec, len: usize) -> Result<Self> {
        if supports_closed_form(spec) {
            recurrence_closed_form(spec, len)
        } else {
            recurrence_stieltjes(spec, len, &DiscretizationControl::default())
        }
    }

    /// Log of `Σ_{j<m} p_j(x)²`, the reciprocal Christoffel function.
    fn log_christoffel_sum(&self, m: usize, x: f64) -> f64 {
        const BIG: f64 = 1e100;
        const LN_BIG: f64 = 230.258_509_299_404_57;
        let mut prev = 0.0;
        let mut cur = 1.0 / self.beta[0].sqrt();
        let mut sum = cur * cur;
        let mut log_scale = 0.0;
        for j in 0..m - 1 {
            let next = ((x - self.alpha[j]) * cur
                - self.beta[j].sqrt() * prev * (j > 0) as u8 as f64)
                / self.beta[j + 1].sqrt();
            prev = cur;
            cur = next;
            sum += cur * cur;
            if cur.abs() > BIG {
                prev /= BIG;
                cur /= BIG;
                sum /= BIG * BIG;
                log_scale += LN_BIG;
            }
        }
        sum.ln() + 2.0 * log_scale
    }
}

pub(crate) fn supports_closed_form(spec: &WeightSpec) -> bool {
    match spec.family() {
        Family::Freud => spec.lambda() == 2.0,
        Family::MarkovSonin => true,
    }
}

/// Hermite / generalized-Hermite recurrences for `λ = 2` weights, rescaled
/// by `a` and `b`.
pub fn recurrence_closed_form(spec: &WeightSpec, len: usize) -> Result<RecurrenceTable> {
    if len == 0 {
        return Err(Error::InvalidParameter(
            "recurrence length must be >= 1".into(),
        ));
    }
    let a = spec.a();
    let mu = match spec.family() {
        Family::Freud if spec.lambda() == 2.0 => 0.0,
        Family::Freud => {
            return Err(Error::UnsupportedWeight(format!(
                "no closed-form recurrence for lambda = {}",
                spec.lambda()
            )))
        }
        Family::MarkovSonin => spec.beta().expect("markov-sonin has beta") / 2.0,
    };
    let mut beta = Vec::with_capacity(len);
    beta.push(spec.mass());
    for k in 1..len {
        let odd = if k % 2 == 1 { mu } else { 0.0 };
        beta.push((k as f64 / 2.0 + odd) / a);
    }
    Ok(RecurrenceTable {
        spec: spec.with_dim(1)?,
        alpha: vec![0.0; len],
        beta,
        method: RecurrenceMethod::ClosedForm,
    })
}

/// Discretization parameters for [`recurrence_stieltjes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationControl {
    /// Truncation radius `L`; `None` picks twice the larger of the
    /// `mrs_number` radius and the classical support radius.
    pub radius: Option<f64>,
    /// Initial number of uniform panels on `[0, L]`; `None` scales with `M`.
    pub panels: Option<usize>,
    pub points_per_panel: usize,
    /// Geometric refinement levels of the panel touching the origin.
    pub graded_levels: usize,
    pub max_doublings: usize,
    /// Relative change in any `beta[k]` accepted between two successive
    /// panel doublings.
    pub tol: f64,
}

impl Default for DiscretizationControl {
    fn default() -> Self {
        Self {
            radius: None,
            panels: None,
            points_per_panel: 20,
            graded_levels: 40,
            max_doublings: 8,
            tol: 1e-10,
        }
    }
}

/// Recurrence coefficients of a general Freud weight from a discretized
/// inner product on `[-L, L]` (Stieltjes procedure on the half line,
/// exploiting evenness).
pub fn recurrence_stieltjes(
    spec: &WeightSpec,
    len: usize,
    ctrl: &DiscretizationControl,
) -> Result<RecurrenceTable> {
    if spec.family() != Family::Freud {
        return Err(Error::UnsupportedWeight(
            "the discretized recurrence is implemented for Freud weights".into(),
        ));
    }
    if len == 0 {
        return Err(Error::InvalidParameter(
            "recurrence length must be >= 1".into(),
        ));
    }
    let spec1 = spec.with_dim(1)?;
    let radius = ctrl.radius.unwrap_or_else(|| {
        let classical =
            (2.0 * len as f64 / (spec.a() * spec.gamma_lambda())).powf(1.0 / spec.lambda());
        2.0 * spec.mrs_number(len).max(classical)
    });
    let mut panels = ctrl.panels.unwrap_or((len / 4).max(8));
    let legendre = legendre_rule(ctrl.points_per_panel)?;

    let mut previous =
        stieltjes_on_grid(&spec1, len, radius, panels, ctrl.graded_levels, &legendre);
    for _ in 0..ctrl.max_doublings {
        panels *= 2;
        let current = stieltjes_on_grid(&spec1, len, radius, panels, ctrl.graded_levels, &legendre);
        let worst = previous
            .iter()
            .zip(&current)
            .map(|(p, c)| ((p - c) / c).abs())
            .fold(0.0, f64::max);
        if worst <= ctrl.tol {
            return Ok(RecurrenceTable {
                spec: spec1,
                alpha: vec![0.0; len],
                beta: current,
                method: RecurrenceMethod::StieltjesLanczos,
            });
        }
        previous = current;
    }
    Err(Error::ConvergenceFailure(format!(
        "beta coefficients still changing by more than {:e} after {} panel doublings",
        ctrl.tol, ctrl.max_doublings
    )))
}

fn stieltjes_on_grid(
    spec: &WeightSpec,
    len: usize,
    radius: f64,
    panels: usize,
    graded_levels: usize,
    legendre: &(Vec<f64>, Vec<f64>),
) -> Vec<f64> {
    let (gl_x, gl_w) = legendre;
    let h = radius / panels as f64;
    let mut edges = vec![0.0];
    let mut lo = h * 0.5f64.powi(graded_levels as i32);
    edges.push(lo);
    for _ in 0..graded_levels {
        lo *= 2.0;
        edges.push(lo);
    }
    for p in 2..=panels {
        edges.push(h * p as f64);
    }

    // half-line nodes with mass doubled for the mirrored side
    let mut xs = Vec::with_capacity(edges.len() * gl_x.len());
    let mut sqrt_w = Vec::with_capacity(xs.capacity());
    for e in edges.windows(2) {
        let (c, r) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
        for (&t, &wt) in gl_x.iter().zip(gl_w) {
            let x = c + r * t;
            let mass = 2.0 * r * wt * spec.weight_1d(x);
            xs.push(x);
            sqrt_w.push(mass.sqrt());
        }
    }

    let beta0: f64 = sqrt_w.iter().map(|v| v * v).sum();
    let mut beta = Vec::with_capacity(len);
    beta.push(beta0);
    let norm = beta0.sqrt();
    let mut q_prev = vec![0.0; xs.len()];
    let mut q: Vec<f64> = sqrt_w.iter().map(|v| v / norm).collect();
    let mut off_prev = 0.0;
    for _ in 1..len {
        let mut u: Vec<f64> = xs
            .iter()
            .zip(q.iter().zip(&q_prev))
            .map(|(&x, (&qc, &qp))| x * qc - off_prev * qp)
            .collect();
        let b: f64 = u.iter().map(|v| v * v).sum();
        let off = b.sqrt();
        u.iter_mut().for_each(|v| *v /= off);
        beta.push(b);
        q_prev = std::mem::replace(&mut q, u);
        off_prev = off;
    }
    beta
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn legendre_rule(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let beta: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                2.0
            } else {
                let k2 = (k * k) as f64;
                k2 / (4.0 * k2 - 1.0)
            }
        })
        .collect();
    let (nodes, log_w) = symmetric_gauss(&vec![0.0; n], &beta, n)?;
    Ok((nodes, log_w.into_iter().map(f64::exp).collect()))
}

/// Nodes (ascending, exactly antisymmetric) and log Cotes numbers for the
/// `m`-point rule of a symmetric recurrence.
fn symmetric_gauss(alpha: &[f64], beta: &[f64], m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let table = RecurrenceTable {
        spec: WeightSpec::hermite(1),
        alpha: alpha.to_vec(),
        beta: beta.to_vec(),
        method: RecurrenceMethod::ClosedForm,
    };
    let nodes = symmetric_nodes(&table, m)?;
    let log_w = nodes
        .iter()
        .map(|&x| -table.log_christoffel_sum(m, x))
        .collect();
    Ok((nodes, log_w))
}

fn symmetric_nodes(table: &RecurrenceTable, m: usize) -> Result<Vec<f64>> {
    let off: Vec<f64> = table.beta[1..m].iter().map(|b| b.sqrt()).collect();
    let mut nodes = tridiag::eigenvalues(&table.alpha[..m], &off)?;
    for i in 0..m / 2 {
        let mag = 0.5 * (nodes[m - 1 - i] - nodes[i]);
        nodes[i] = -mag;
        nodes[m - 1 - i] = mag;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(nodes)
}

/// The `m`-point Gauss rule: zeros `x_{m,k}` of `p_m(w)` and Cotes numbers
/// `λ_{m,k}(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussData {
    spec: WeightSpec,
    m: usize,
    nodes: Vec<f64>,
    cotes: Vec<f64>,
    scaled_cotes: Vec<f64>,
}

impl GaussData {
    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Ascending nodes `x_{m,-⌊m/2⌋} < … < x_{m,⌊m/2⌋}`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Cotes numbers aligned with [`nodes`](Self::nodes). Far-tail values
    /// may underflow to zero; see [`scaled_cotes`](Self::scaled_cotes).
    pub fn cotes(&self) -> &[f64] {
        &self.cotes
    }

    /// `λ_{m,k}(w) / w(x_{m,k})`; infinite where `w` vanishes.
    pub fn scaled_cotes(&self) -> &[f64] {
        &self.scaled_cotes
    }

    /// Positive nodes `x_{m,1} < … < x_{m,⌊m/2⌋}`.
    pub fn positive_nodes(&self) -> &[f64] {
        &self.nodes[self.m.div_ceil(2)..]
    }

    /// Smallest `j ≥ 1` with `x_{m,j} ≥ θ a_m`, and whether no node reached
    /// the threshold (in which case all `⌊m/2⌋` positive indices are kept).
    pub fn j_index(&self, theta: f64) -> (usize, bool) {
        let threshold = theta * self.spec.mrs_number(self.m);
        let positive = self.positive_nodes();
        match positive.iter().position(|&x| x >= threshold) {
            Some(i) => (i + 1, false),
            None => (positive.len(), true),
        }
    }

    /// Selects the nodes with index `|k| ≤ j`, dropping the center when
    /// asked. Returns `(nodes, cotes, scaled_cotes)`.
    pub(crate) fn restrict(&self, j: usize, keep_center: bool) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let half = self.m / 2;
        let mid = self.m.div_ceil(2);
        let mut idx: Vec<usize> = ((half - j)..half).collect();
        if self.m % 2 == 1 && keep_center {
            idx.push(half);
        }
        idx.extend(mid..mid + j);
        (
            idx.iter().map(|&i| self.nodes[i]).collect(),
            idx.iter().map(|&i| self.cotes[i]).collect(),
            idx.iter().map(|&i| self.scaled_cotes[i]).collect(),
        )
    }
}

/// Golub–Welsch construction of the `m`-point Gauss rule from a recurrence
/// table.
pub fn gauss_rule(table: &RecurrenceTable, m: usize) -> Result<GaussData> {
    if m == 0 || m > table.len() {
        return Err(Error::InvalidParameter(format!(
            "rule size {m} must lie in 1..={}",
            table.len()
        )));
    }
    let nodes = symmetric_nodes(table, m)?;
    let mid = m / 2;
    let mut cotes = vec![0.0; m];
    let mut scaled = vec![0.0; m];
    for i in mid..m {
        let x = nodes[i];
        let log_lambda = -table.log_christoffel_sum(m, x);
        cotes[i] = log_lambda.exp();
        scaled[i] = (log_lambda - table.spec.log_weight_1d(x)).exp();
        let mirror = m - 1 - i;
        cotes[mirror] = cotes[i];
        scaled[mirror] = scaled[i];
    }
    Ok(GaussData {
        spec: table.spec,
        m,
        nodes,
        cotes,
        scaled_cotes: scaled,
    })
}

/// Min and max gap between consecutive zeros with `|k| ≤ j(m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacingReport {
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
    pub gaps: usize,
}

/// Spacing `d_{m,k} = x_{m,k} - x_{m,k-1}` over the truncated index range;
/// `None` when fewer than two nodes are in range.
pub fn node_spacing_profile(g: &GaussData, theta: f64) -> Result<Option<SpacingReport>> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    if g.m() < 2 {
        return Ok(None);
    }
    let (j, _) = g.j_index(theta);
    let (nodes, _, _) = g.restrict(j, true);
    let gaps: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
    if gaps.is_empty() {
        return Ok(None);
    }
    let min = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let max = gaps.iter().copied().fold(0.0, f64::max);
    Ok(Some(SpacingReport {
        min,
        max,
        ratio: max / min,
        gaps: gaps.len(),
    }))
}
