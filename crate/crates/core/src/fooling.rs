//! Lower-bound witnesses: nonnegative bumps that vanish on a given node set.
//!
//! The profile is `φ(y) = exp(-1/(y(1-y)))` on `(0, 1)`. With
//! `u = y(1-y)` every derivative has the form `φ^(s) = N_s(y) u^{-2s} φ`,
//! where `N_0 = 1` and `N_{s+1} = N_s' u² + (1 - 2su) u' N_s`.
//!
//! Given `n` nodes, a node-free box is located by pigeonhole:
//!
//! * `d = 1`: the grid `t_j = δ j`, `δ = n^{1/λ-1}`, and the first free
//!   interval `(t_{i-1}, t_i)` with `n+1 ≤ i ≤ 2n+2`;
//! * `d ≥ 2`: the boxes `K_s = Π (δ(s_i-1), δ s_i)` with
//!   `δ = M_n^{(1/λ-1)/d}` and `s` ranging over `Γ_d(M_n)`, where
//!   `M_n` is the least `M` on the half-integer grid with `|Γ_d(M)| > n`.
//!
//! On the box, `h = Π_i g_i / w` with `g_i(x) = φ((x - lo_i)/δ)`. Its
//! weighted Sobolev norm factorizes over coordinates and is computed by
//! adaptive quadrature of the Leibniz expansion
//! `h^(k) w = Σ_s C(k,s) g^(k-s) (w⁻¹)^(s) w`; the returned `h̄` is `h`
//! divided by that certified norm.

use std::collections::HashSet;

use serde::Serialize;

use crate::adaptive::{integrate, integrate_with_breaks, Tolerance};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quad1d::QuadRule1D;
use crate::sparse::SparseRule;
use crate::weights::{recip_derivative_times_weight, Family, RecipTerm, WeightSpec};

/// Absolute tolerance of every norm integral; added to the certificate.
pub const NORM_TOL: f64 = 1e-10;

/// The base profile `φ` with its derivative numerators and the constants
/// `b_s = ∫_0^1 |φ^(s)|` for `s ≤ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BumpSpec {
    r: usize,
    lambda: f64,
    numerators: Vec<Poly>,
    b: Vec<f64>,
}

impl BumpSpec {
    pub fn new(r: usize, lambda: f64) -> Result<Self> {
        if r == 0 || r > 8 {
            return Err(Error::InvalidParameter(format!(
                "smoothness r must lie in 1..=8, got {r}"
            )));
        }
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 1, got {lambda}"
            )));
        }
        let u = Poly(vec![0.0, 1.0, -1.0]);
        let du = Poly(vec![1.0, -2.0]);
        let u2 = u.mul(&u);
        let mut numerators = vec![Poly(vec![1.0])];
        for s in 0..r {
            let n = &numerators[s];
            let factor =
                Poly(vec![1.0]).add(&Poly(u.0.iter().map(|c| -2.0 * s as f64 * c).collect()));
            let next = n.derivative().mul(&u2).add(&factor.mul(&du).mul(n));
            numerators.push(next);
        }
        let mut spec = Self {
            r,
            lambda,
            numerators,
            b: Vec::new(),
        };
        spec.b = (0..=r)
            .map(|s| spec.abs_derivative_integral(s))
            .collect::<Result<_>>()?;
        Ok(spec)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `b_s = ∫_0^1 |φ^(s)(y)| dy`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `φ^(s)(y)`, zero outside `(0, 1)`.
    pub fn phi_derivative(&self, s: usize, y: f64) -> f64 {
        if y <= 0.0 || y >= 1.0 {
            return 0.0;
        }
        let u = y * (1.0 - y);
        self.numerators[s].eval(y) * (-1.0 / u - 2.0 * s as f64 * u.ln()).exp()
    }

    pub fn phi(&self, y: f64) -> f64 {
        self.phi_derivative(0, y)
    }

    /// Sign changes of `N_s` inside `(0, 1)`.
    fn numerator_roots(&self, s: usize) -> Vec<f64> {
        let p = &self.numerators[s];
        let grid = 4096;
        let mut roots = Vec::new();
        let mut prev = p.eval(0.5 / grid as f64);
        for i in 1..grid {
            let y = (i as f64 + 0.5) / grid as f64;
            let v = p.eval(y);
            if v == 0.0 || v.signum() != prev.signum() {
                let (mut lo, mut hi) = (y - 1.0 / grid as f64, y);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if p.eval(mid).signum() == prev.signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev = v;
        }
        roots
    }

    fn abs_derivative_integral(&self, s: usize) -> Result<f64> {
        let mut points = vec![0.0];
        points.extend(self.numerator_roots(s));
        points.push(1.0);
        Ok(integrate_with_breaks(
            |y| self.phi_derivative(s, y).abs(),
            &points,
            Tolerance::new(1e-15, 1e-12),
        )?
        .value)
    }
}

/// `Γ_d(M) = {s ∈ N^d : Π s_i ≤ 2M, s_i ≥ M^{1/d}}` in lexicographic order.
pub fn gamma_set(d: usize, m: f64) -> Result<Vec<Vec<u64>>> {
    let (lower, cap) = gamma_bounds(d, m)?;
    let mut out = Vec::new();
    let mut current = vec![0u64; d];
    gamma_recurse(&mut current, 0, lower, cap, &mut |s| out.push(s.to_vec()));
    Ok(out)
}

/// `|Γ_d(M)|` without materializing the set.
pub fn gamma_count(d: usize, m: f64) -> Result<u64> {
    let (lower, cap) = gamma_bounds(d, m)?;
    Ok(count_recurse(d, lower, cap))
}

fn gamma_bounds(d: usize, m: f64) -> Result<(u64, u64)> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if !(m >= 1.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("M must be >= 1, got {m}")));
    }
    // smallest integer c with c^d ≥ M, checked in exact-ish arithmetic
    let mut c = m.powf(1.0 / d as f64).ceil().max(1.0) as u64;
    while c > 1 && ((c - 1) as f64).powi(d as i32) >= m {
        c -= 1;
    }
    while (c as f64).powi(d as i32) < m {
        c += 1;
    }
    Ok((c, (2.0 * m).floor() as u64))
}

fn gamma_recurse<F: FnMut(&[u64])>(
    current: &mut Vec<u64>,
    pos: usize,
    lower: u64,
    cap: u64,
    visit: &mut F,
) {
    let d = current.len();
    let remaining = (d - pos - 1) as u32;
    let min_rest = lower.saturating_pow(remaining);
    let mut v = lower;
    while v.saturating_mul(min_rest) <= cap {
        current[pos] = v;
        if pos + 1 == d {
            visit(current);
        } else {
            gamma_recurse(current, pos + 1, lower, cap / v, visit);
        }
        v += 1;
    }
}

fn count_recurse(d: usize, lower: u64, cap: u64) -> u64 {
    if d == 1 {
        return (cap + 1).saturating_sub(lower);
    }
    let min_rest = lower.saturating_pow(d as u32 - 1);
    let mut total = 0;
    let mut v = lower;
    while v.saturating_mul(min_rest) <= cap {
        total += count_recurse(d - 1, lower, cap / v);
        v += 1;
    }
    total
}

/// A finite node set in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    d: usize,
    coords: Vec<f64>,
}

impl NodeSet {
    pub fn new(d: usize, points: &[Vec<f64>]) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * d);
        for p in points {
            if p.len() != d {
                return Err(Error::InvalidParameter(format!(
                    "node of dimension {} in a {d}-dimensional set",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Ok(Self { d, coords })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }
}

impl From<&SparseRule> for NodeSet {
    fn from(rule: &SparseRule) -> Self {
        Self {
            d: rule.d(),
            coords: rule.nodes().flatten().copied().collect(),
        }
    }
}

impl From<&QuadRule1D> for NodeSet {
    fn from(rule: &QuadRule1D) -> Self {
        Self {
            d: 1,
            coords: rule.nodes().to_vec(),
        }
    }
}

/// Index of the open cell `(δ(s-1), δ s)` containing `x`, if any.
fn cell_of(x: f64, delta: f64) -> Option<u64> {
    if x <= 0.0 {
        return None;
    }
    // the float quotient may be off by one near a grid line; the candidates
    // are confirmed against the cell edges directly
    let guess = (x / delta).ceil() as u64;
    [guess.saturating_sub(1), guess, guess + 1]
        .into_iter()
        .find(|&c| c >= 1 && delta * ((c - 1) as f64) < x && x < delta * (c as f64))
}

/// A node-free box located by pigeonhole.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeBox {
    pub d: usize,
    /// The node budget the construction was run for.
    pub n: usize,
    pub delta: f64,
    /// Cell index `i` (`d = 1`) or multi-index `s` (`d ≥ 2`).
    pub s: Vec<u64>,
    /// Lower corner `δ(s_i - 1)`; the box is `Π (lo_i, lo_i + δ)`.
    pub lows: Vec<f64>,
    /// `M_n` for `d ≥ 2`.
    pub m_n: Option<f64>,
    /// Other free cells of the scanned range (`d = 1`), nearest first.
    #[serde(skip)]
    pub alternatives: Vec<u64>,
}

impl FreeBox {
    /// True if `x` lies in the open box.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lows)
            .all(|(&xi, &lo)| lo < xi && xi < lo + self.delta)
    }
}

/// Smallest `M ∈ {1, 1.5, 2, …}` with `|Γ_d(M)| ≥ n + 1`.
pub fn minimal_gamma_m(d: usize, n: usize) -> Result<f64> {
    let mut m = 1.0;
    loop {
        if gamma_count(d, m)? > n as u64 {
            return Ok(m);
        }
        m += 0.5;
    }
}

/// Locates a box containing no node. `n` must be at least the node count.
pub fn find_free_box(nodes: &NodeSet, n: usize, lambda: f64) -> Result<FreeBox> {
    if nodes.len() > n {
        return Err(Error::InvalidParameter(format!(
            "{} nodes exceed the budget n = {n}",
            nodes.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("budget must be >= 1".into()));
    }
    if lambda.is_nan() || lambda <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be > 1, got {lambda}"
        )));
    }
    let d = nodes.d();
    if d == 1 {
        let delta = (n as f64).powf(1.0 / lambda - 1.0);
        let occupied: HashSet<u64> = nodes.iter().filter_map(|x| cell_of(x[0], delta)).collect();
        let free: Vec<u64> = ((n as u64 + 1)..=(2 * n as u64 + 2))
            .filter(|i| !occupied.contains(i))
            .collect();
        let Some(&i) = free.first() else {
            return Err(Error::InternalPigeonholeViolation(format!(
                "all {} cells of the scanned range hold a node",
                n + 2
            )));
        };
        return Ok(FreeBox {
            d,
            n,
            delta,
            s: vec![i],
            lows: vec![delta * (i - 1) as f64],
            m_n: None,
            alternatives: free[1..].to_vec(),
        });
    }
    let m_n = minimal_gamma_m(d, n)?;
    let delta = m_n.powf((1.0 / lambda - 1.0) / d as f64);
    let occupied: HashSet<Vec<u64>> = nodes
        .iter()
        .filter_map(|x| {
            x.iter()
                .map(|&xi| cell_of(xi, delta))
                .collect::<Option<Vec<u64>>>()
        })
        .collect();
    let (lower, cap) = gamma_bounds(d, m_n)?;
    let mut found = None;
    let mut current = vec![0u64; d];
    gamma_recurse(&mut current, 0, lower, cap, &mut |s| {
        if found.is_none() && !occupied.contains(s) {
            found = Some(s.to_vec());
        }
    });
    let s = found.ok_or_else(|| {
        Error::InternalPigeonholeViolation(format!(
            "every box of Gamma_{d}({m_n}) holds one of {} nodes",
            nodes.len()
        ))
    })?;
    Ok(FreeBox {
        d,
        n,
        delta,
        lows: s.iter().map(|&si| delta * (si - 1) as f64).collect(),
        s,
        m_n: Some(m_n),
        alternatives: Vec::new(),
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `h^(k)(x) w(x)` for one coordinate, `h = g / w`.
fn factor_weighted_derivative(
    bump: &BumpSpec,
    recip: &[Vec<RecipTerm>],
    lo: f64,
    delta: f64,
    k: usize,
    x: f64,
) -> f64 {
    let y = (x - lo) / delta;
    if y <= 0.0 || y >= 1.0 {
        return 0.0;
    }
    (0..=k)
        .map(|s| {
            binomial(k, s)
                * delta.powi(s as i32 - k as i32)
                * bump.phi_derivative(k - s, y)
                * recip_derivative_times_weight(&recip[s], s, x)
        })
        .sum()
}

/// Per-coordinate norm integrals `∫|h^(k)| w` for `k = 0..=r`, each with its
/// tolerance slack added.
fn factor_norm(bump: &BumpSpec, recip: &[Vec<RecipTerm>], lo: f64, delta: f64) -> Result<Vec<f64>> {
    let panels = 16;
    let points: Vec<f64> = (0..=panels)
        .map(|i| lo + delta * i as f64 / panels as f64)
        .collect();
    (0..=bump.r())
        .map(|k| {
            let est = integrate_with_breaks(
                |x| factor_weighted_derivative(bump, recip, lo, delta, k, x).abs(),
                &points,
                Tolerance::new(NORM_TOL, 0.0),
            )?;
            Ok(est.value + NORM_TOL.max(est.error))
        })
        .collect()
}

/// The normalized bump `h̄` on a node-free box.
#[derive(Debug, Clone)]
pub struct FoolingFunction {
    free_box: FreeBox,
    bump: BumpSpec,
    spec: WeightSpec,
    recip: Vec<Vec<RecipTerm>>,
    factor_norms: Vec<Vec<f64>>,
    normalizer: f64,
}

impl FoolingFunction {
    pub fn free_box(&self) -> &FreeBox {
        &self.free_box
    }

    pub fn d(&self) -> usize {
        self.free_box.d
    }

    pub fn delta(&self) -> f64 {
        self.free_box.delta
    }

    pub fn bump(&self) -> &BumpSpec {
        &self.bump
    }

    /// Factor turning `h` into `h̄`: the reciprocal of the certified norm,
    /// shrunk by a few ulps so the product stays at most one.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// Upper bound on `‖h‖` before normalization.
    pub fn certified_norm_of_h(&self) -> f64 {
        self.factor_norms
            .iter()
            .map(|f| f.iter().sum::<f64>())
            .product()
    }

    /// Upper bound on `Σ_{|k|_∞ ≤ r} ∫|D^k h̄| w`; at most one.
    pub fn norm_certificate(&self) -> f64 {
        self.normalizer * self.certified_norm_of_h()
    }

    /// `∫ h̄ w = normalizer · (b_0 δ)^d`.
    pub fn integral(&self) -> f64 {
        self.normalizer * (self.bump.b()[0] * self.delta()).powi(self.d() as i32)
    }

    /// `∫ h̄ w` by adaptive quadrature of each coordinate factor.
    pub fn integral_by_quadrature(&self) -> Result<f64> {
        let mut product = self.normalizer;
        for &lo in &self.free_box.lows {
            let est = integrate(
                |x| self.bump.phi((x - lo) / self.delta()),
                lo,
                lo + self.delta(),
                Tolerance::new(1e-300, 1e-14),
            )?;
            product *= est.value;
        }
        Ok(product)
    }

    /// `h̄(x)`; exactly zero outside the open box. May overflow to infinity
    /// for boxes deep in the tail, where `h̄ w` stays finite.
    pub fn eval(&self, x: &[f64]) -> f64 {
        if !self.free_box.contains(x) {
            return 0.0;
        }
        self.eval_weighted(x) / self.spec.eval_weight(x)
    }

    /// `h̄(x) w(x)`.
    pub fn eval_weighted(&self, x: &[f64]) -> f64 {
        if !self.free_box.contains(x) {
            return 0.0;
        }
        x.iter()
            .zip(&self.free_box.lows)
            .fold(self.normalizer, |acc, (&xi, &lo)| {
                acc * self.bump.phi((xi - lo) / self.delta())
            })
    }

    /// `D^k h̄(x) w(x)` for `|k|_∞ ≤ r`.
    pub fn weighted_derivative(&self, x: &[f64], k: &[usize]) -> Result<f64> {
        if k.len() != self.d() || k.iter().any(|&ki| ki > self.bump.r()) {
            return Err(Error::InvalidParameter(format!(
                "derivative order {k:?} outside |k|_inf <= {}",
                self.bump.r()
            )));
        }
        if !self.free_box.contains(x) {
            return Ok(0.0);
        }
        Ok(x.iter().zip(&self.free_box.lows).zip(k).fold(
            self.normalizer,
            |acc, ((&xi, &lo), &ki)| {
                acc * factor_weighted_derivative(&self.bump, &self.recip, lo, self.delta(), ki, xi)
            },
        ))
    }

    /// `D^k h̄(x)`.
    pub fn derivative(&self, x: &[f64], k: &[usize]) -> Result<f64> {
        Ok(self.weighted_derivative(x, k)? / self.spec.eval_weight(x))
    }

    /// Machine-readable summary.
    pub fn report(&self) -> WitnessReport {
        WitnessReport {
            schema: crate::io::SCHEMA_VERSION,
            d: self.d(),
            r: self.bump.r(),
            n: self.free_box.n,
            delta: self.delta(),
            s: self.free_box.s.clone(),
            lows: self.free_box.lows.clone(),
            m_n: self.free_box.m_n,
            b: self.bump.b().to_vec(),
            normalizer: self.normalizer,
            integral: self.integral(),
            norm_certificate: self.norm_certificate(),
        }
    }
}

/// Serializable description of a witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub schema: u32,
    pub d: usize,
    pub r: usize,
    pub n: usize,
    pub delta: f64,
    pub s: Vec<u64>,
    pub lows: Vec<f64>,
    pub m_n: Option<f64>,
    pub b: Vec<f64>,
    pub normalizer: f64,
    pub integral: f64,
    pub norm_certificate: f64,
}

/// Builds `h̄` on a free box.
pub fn build_fooling(
    free_box: FreeBox,
    bump: &BumpSpec,
    spec: &WeightSpec,
) -> Result<FoolingFunction> {
    if spec.family() != Family::Freud {
        return Err(Error::UnsupportedWeight(
            "fooling functions are built for Freud weights".into(),
        ));
    }
    if spec.lambda() != bump.lambda() {
        return Err(Error::InvalidParameter(format!(
            "bump built for lambda = {} used with lambda = {}",
            bump.lambda(),
            spec.lambda()
        )));
    }
    let spec = spec.with_dim(free_box.d)?;
    let recip = (0..=bump.r())
        .map(|s| spec.recip_weight_derivative_coeffs(s))
        .collect::<Result<Vec<_>>>()?;
    let factor_norms = free_box
        .lows
        .iter()
        .map(|&lo| factor_norm(bump, &recip, lo, free_box.delta))
        .collect::<Result<Vec<_>>>()?;
    let norm: f64 = factor_norms.iter().map(|f| f.iter().sum::<f64>()).product();
    let normalizer = (1.0 - 4.0 * f64::EPSILON) / norm;
    Ok(FoolingFunction {
        free_box,
        bump: bump.clone(),
        spec,
        recip,
        factor_norms,
        normalizer,
    })
}

/// Builds the witness against `nodes` with budget `n` and checks that it
/// vanishes on every node.
pub fn lower_bound_witness(
    nodes: &NodeSet,
    n: usize,
    bump: &BumpSpec,
    spec: &WeightSpec,
) -> Result<FoolingFunction> {
    let free_box = find_free_box(nodes, n, spec.lambda())?;
    let h = build_fooling(free_box, bump, spec)?;
    if let Some(x) = nodes.iter().find(|x| h.eval_weighted(x) != 0.0) {
        return Err(Error::InternalPigeonholeViolation(format!(
            "witness does not vanish at node {x:?}"
        )));
    }
    Ok(h)
}

/// The witness for the `d = 1` cell `i` of the grid `δ j`, used to compare
/// alternative placements.
pub fn witness_in_cell(
    n: usize,
    i: u64,
    bump: &BumpSpec,
    spec: &WeightSpec,
) -> Result<FoolingFunction> {
    if i == 0 {
        return Err(Error::InvalidParameter("cells are numbered from 1".into()));
    }
    let delta = (n as f64).powf(1.0 / spec.lambda() - 1.0);
    let free_box = FreeBox {
        d: 1,
        n,
        delta,
        s: vec![i],
        lows: vec![delta * (i - 1) as f64],
        m_n: None,
        alternatives: Vec::new(),
    };
    build_fooling(free_box, bump, spec)
}

/// A unit-norm bump on the interval `(lo, lo + delta)`, not tied to a
/// cell grid; `n` is recorded as 0.
pub fn bump_on_interval(
    lo: f64,
    delta: f64,
    bump: &BumpSpec,
    spec: &WeightSpec,
) -> Result<FoolingFunction> {
    if !(delta > 0.0 && delta.is_finite() && lo.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bad interval ({lo}, {lo} + {delta})"
        )));
    }
    let free_box = FreeBox {
        d: 1,
        n: 0,
        delta,
        s: Vec::new(),
        lows: vec![lo],
        m_n: None,
        alternatives: Vec::new(),
    };
    build_fooling(free_box, bump, spec)
}
