//! Test functions with known weighted integrals, convergence sweeps over
//! node budgets, and log-log rate fits.
//!
//! Every family is a tensor product `f(x) = Π_i f_1(x_i)`, so integrals and
//! the mixed Sobolev norm `Σ_{|k|_∞ ≤ r} ∫|D^k f| w` factor over coordinates.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::adaptive::{integrate_with_breaks, Tolerance};
use crate::error::{Error, Result};
use crate::fooling::{bump_on_interval, lower_bound_witness, BumpSpec, FoolingFunction, NodeSet};
use crate::poly::Poly;
use crate::quad1d::{apply_rule, apply_rule_weighted, DyadicFamily, LevelRules, QuadRule1D};
use crate::sparse::{apply_sparse, apply_sparse_weighted, select_xi_for_budget};
use crate::weights::{Family, WeightSpec};

/// Slope tolerance recorded with every fit.
pub const SLOPE_TOLERANCE: f64 = 0.15;

/// Relative agreement required between closed-form and adaptive integrals.
pub const REFERENCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// `f ≡ 1`.
    One,
    /// `Π x_i²`.
    Poly2,
    /// `Π (1 + x_i²) e^{-x_i²/2}`.
    GaussPoly,
    /// `Π (1 + x_i²)^{-1}`.
    Rational,
    /// Unit-norm bumps between the truncation radii of the dyadic rules.
    Bumps,
    /// Narrow bumps on the largest Gauss zero of each sweep budget.
    Tail,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 6] = [
        Self::One,
        Self::Poly2,
        Self::GaussPoly,
        Self::Rational,
        Self::Bumps,
        Self::Tail,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::One => "one",
            Self::Poly2 => "poly2",
            Self::GaussPoly => "gausspoly",
            Self::Rational => "rational",
            Self::Bumps => "bumps",
            Self::Tail => "tail",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let name = s.strip_prefix("builtin:").unwrap_or(s);
        Self::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown test function `{s}`")))
    }
}

const GAUSSPOLY_C: f64 = 0.5;

#[derive(Debug, Clone)]
enum Factor {
    One,
    Monomial(u32),
    GaussPoly,
    Rational,
    Bumps(Vec<FoolingFunction>),
}

/// A tensor-product test function with its weighted integral and a
/// certified norm bound.
#[derive(Debug, Clone)]
pub struct TestFunction {
    kind: FamilyKind,
    spec: WeightSpec,
    r: usize,
    factor: Factor,
    factor_integral: f64,
    factor_norm: f64,
    closed_form: bool,
}

impl TestFunction {
    /// Builds a family member. `max_budget` sets how many scales the bump
    /// families cover.
    pub fn build(
        kind: FamilyKind,
        rules: &DyadicFamily,
        d: usize,
        r: usize,
        max_budget: usize,
    ) -> Result<Self> {
        let spec = &rules.spec().with_dim(d)?;
        if r == 0 {
            return Err(Error::InvalidParameter("smoothness r must be >= 1".into()));
        }
        let spec1 = spec.with_dim(1)?;
        let factor = match kind {
            FamilyKind::One => Factor::One,
            FamilyKind::Poly2 => Factor::Monomial(2),
            FamilyKind::GaussPoly => Factor::GaussPoly,
            FamilyKind::Rational => Factor::Rational,
            FamilyKind::Bumps => Factor::Bumps(bump_chain(rules, r, max_budget)?),
            FamilyKind::Tail => {
                let budgets: Vec<usize> = (4..usize::BITS)
                    .map(|e| 1usize << e)
                    .take_while(|&n| n <= max_budget.max(16))
                    .collect();
                Factor::Bumps(tail_chain(&spec1, r, &budgets)?)
            }
        };
        Self::from_factor(kind, spec, r, factor)
    }

    /// The tail family for an explicit list of budgets.
    pub fn tail_mass(spec: &WeightSpec, r: usize, budgets: &[usize]) -> Result<Self> {
        let factor = Factor::Bumps(tail_chain(&spec.with_dim(1)?, r, budgets)?);
        Self::from_factor(FamilyKind::Tail, spec, r, factor)
    }

    fn from_factor(kind: FamilyKind, spec: &WeightSpec, r: usize, factor: Factor) -> Result<Self> {
        let spec1 = spec.with_dim(1)?;
        let (factor_integral, closed_form) = match closed_form_integral(&factor, &spec1) {
            Some(v) => (v, true),
            None => (reference_factor_integral(&factor, &spec1)?, false),
        };
        let factor_norm = factor_norm(&factor, &spec1, r)?;
        Ok(Self {
            kind,
            spec: *spec,
            r,
            factor,
            factor_integral,
            factor_norm,
            closed_form,
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn d(&self) -> usize {
        self.spec.dim()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// `∫ f w` over `R^d`.
    pub fn exact_integral(&self) -> f64 {
        self.factor_integral.powi(self.d() as i32)
    }

    /// Whether [`exact_integral`](Self::exact_integral) is a closed form
    /// rather than an adaptive reference value.
    pub fn closed_form(&self) -> bool {
        self.closed_form
    }

    /// Upper bound on `Σ_{|k|_∞ ≤ r} ∫|D^k f| w`.
    pub fn norm_estimate(&self) -> f64 {
        self.factor_norm.powi(self.d() as i32)
    }

    /// Number of bumps per coordinate for the bump families.
    pub fn bump_count(&self) -> usize {
        match &self.factor {
            Factor::Bumps(b) => b.len(),
            _ => 0,
        }
    }

    /// `f(x)`; may overflow for bumps deep in the tail.
    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter()
            .map(|&xi| factor_value(&self.factor, &self.spec, xi))
            .product()
    }

    /// `f(x) w(x)`.
    pub fn eval_weighted(&self, x: &[f64]) -> f64 {
        x.iter()
            .map(|&xi| factor_weighted(&self.factor, &self.spec, xi))
            .product()
    }

    /// Applies a univariate rule, through the weighted path when `w > 0`.
    pub fn integrate_1d(&self, rule: &QuadRule1D) -> Result<f64> {
        if self.spec.family() == Family::Freud {
            apply_rule_weighted(rule, |x| self.eval_weighted(&[x]))
        } else {
            apply_rule(rule, |x| self.eval(&[x]))
        }
    }

    /// Applies a sparse rule, through the weighted path when `w > 0`.
    pub fn integrate_sparse(&self, rule: &crate::sparse::SparseRule) -> Result<f64> {
        if self.spec.family() == Family::Freud {
            apply_sparse_weighted(rule, |x| self.eval_weighted(x))
        } else {
            apply_sparse(rule, |x| self.eval(x))
        }
    }

    /// `∫ f w` by adaptive quadrature of the univariate factor.
    pub fn reference_integral(&self) -> Result<f64> {
        Ok(reference_factor_integral(&self.factor, &self.spec.with_dim(1)?)?.powi(self.d() as i32))
    }

    /// Confirms the stored integral against adaptive quadrature.
    pub fn check_reference(&self) -> Result<()> {
        let reference = self.reference_integral()?;
        let exact = self.exact_integral();
        if (reference - exact).abs() > REFERENCE_TOLERANCE * exact.abs() {
            return Err(Error::ConvergenceFailure(format!(
                "{} integral {exact:e} disagrees with adaptive reference {reference:e}",
                self.kind
            )));
        }
        Ok(())
    }
}

/// The standard families for `spec`; bump families only for Freud weights.
pub fn builtin_families(rules: &DyadicFamily, d: usize, r: usize) -> Result<Vec<TestFunction>> {
    let freud = rules.spec().family() == Family::Freud;
    FamilyKind::ALL
        .into_iter()
        .filter(|k| freud || !matches!(k, FamilyKind::Bumps | FamilyKind::Tail))
        .map(|k| TestFunction::build(k, rules, d, r, 1 << 11))
        .collect()
}

/// Width of a chain bump in units of the local weight scale `x^{1-λ}`.
pub const CHAIN_WIDTH: f64 = 4.0;

/// Largest fraction of the gap between consecutive truncation radii a
/// chain bump may occupy.
const CHAIN_FILL: f64 = 0.5;

/// Budgets above `2^CHAIN_EXACT_LEVELS` extrapolate the truncation radius
/// instead of scanning for the rule degree.
const CHAIN_EXACT_LEVELS: u32 = 12;

/// Unit-norm bumps in the gaps between the truncation radii `T_j` of the
/// budget-`2^j` rules: bump `j` sits at `√(T_j T_{j+1})`, so the budget-`2^k`
/// rule sees exactly the bumps `j < k`. Bumps too wide for their gap are
/// narrowed to fit. The chain runs four levels past `max_budget`.
fn bump_chain(rules: &DyadicFamily, r: usize, max_budget: usize) -> Result<Vec<FoolingFunction>> {
    let spec = rules.spec().with_dim(1)?;
    let lambda = spec.lambda();
    let bump = BumpSpec::new(r, lambda)?;
    let top = usize::BITS - max_budget.max(2).leading_zeros();
    let exact = top.min(CHAIN_EXACT_LEVELS);
    let mut radii = Vec::new();
    for j in 1..=exact {
        let m = rules.degree_for_budget(1 << j)?;
        radii.push(rules.theta() * spec.mrs_number(m));
    }
    while radii.len() < (top + 6) as usize {
        let last = *radii.last().expect("at least one level");
        radii.push(last * 2f64.powf(1.0 / lambda));
    }
    let mut out = Vec::new();
    for pair in radii.windows(2) {
        let (t0, t1) = (pair[0], pair[1]);
        let center = (t0 * t1).sqrt();
        let delta = (CHAIN_WIDTH * center.powf(1.0 - lambda)).min(CHAIN_FILL * (t1 - t0));
        out.push(bump_on_interval(center - 0.5 * delta, delta, &bump, &spec)?);
    }
    Ok(out)
}

/// For each budget `n`, a bump of width `n^{1/λ-1}/4` centered on the
/// largest zero of the `n`-point Gauss rule.
fn tail_chain(spec: &WeightSpec, r: usize, budgets: &[usize]) -> Result<Vec<FoolingFunction>> {
    let bump = BumpSpec::new(r, spec.lambda())?;
    let max = budgets.iter().copied().max().unwrap_or(2).max(2);
    let table = crate::orthopoly::RecurrenceTable::for_spec(spec, max)?;
    let mut out: Vec<FoolingFunction> = Vec::new();
    let mut sorted = budgets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for n in sorted {
        let g = crate::orthopoly::gauss_rule(&table, n.max(2))?;
        let top = *g.nodes().last().expect("non-empty rule");
        let delta = 0.25 * (n as f64).powf(1.0 / spec.lambda() - 1.0);
        let lo = top - 0.5 * delta;
        if out.iter().any(|b| b.free_box().lows[0] + b.delta() >= lo) {
            return Err(Error::InvalidParameter(format!(
                "tail bumps overlap at budget {n}; use budgets further apart"
            )));
        }
        out.push(bump_on_interval(lo, delta, &bump, spec)?);
    }
    Ok(out)
}

fn find_bump(bumps: &[FoolingFunction], x: f64) -> Option<&FoolingFunction> {
    let i = bumps.partition_point(|b| b.free_box().lows[0] < x);
    i.checked_sub(1)
        .map(|i| &bumps[i])
        .filter(|b| b.free_box().contains(&[x]))
}

fn gausspoly_value(x: f64) -> f64 {
    (1.0 + x * x) * (-GAUSSPOLY_C * x * x).exp()
}

fn factor_value(factor: &Factor, spec: &WeightSpec, x: f64) -> f64 {
    match factor {
        Factor::One => 1.0,
        Factor::Monomial(p) => x.powi(*p as i32),
        Factor::GaussPoly => gausspoly_value(x),
        Factor::Rational => 1.0 / (1.0 + x * x),
        Factor::Bumps(b) => {
            find_bump(b, x).map_or(0.0, |h| h.eval_weighted(&[x]) / spec.weight_1d(x))
        }
    }
}

fn factor_weighted(factor: &Factor, spec: &WeightSpec, x: f64) -> f64 {
    match factor {
        Factor::Bumps(b) => find_bump(b, x).map_or(0.0, |h| h.eval_weighted(&[x])),
        _ => factor_value(factor, spec, x) * spec.weight_1d(x),
    }
}

fn closed_form_integral(factor: &Factor, spec: &WeightSpec) -> Option<f64> {
    match factor {
        Factor::One => Some(spec.mass()),
        Factor::Monomial(p) if p % 2 == 1 => Some(0.0),
        Factor::Monomial(p) => Some(spec.abs_moment(*p as f64)),
        Factor::GaussPoly if spec.lambda() == 2.0 => {
            // shift the Gaussian factor into the weight
            let shifted = match spec.family() {
                Family::Freud => WeightSpec::freud(2.0, spec.a() + GAUSSPOLY_C, spec.b(), 1),
                Family::MarkovSonin => WeightSpec::markov_sonin(
                    spec.beta().expect("markov-sonin has beta"),
                    spec.a() + GAUSSPOLY_C,
                    spec.b(),
                    1,
                ),
            }
            .ok()?;
            Some(shifted.abs_moment(0.0) + shifted.abs_moment(2.0))
        }
        Factor::Bumps(b) => Some(b.iter().map(FoolingFunction::integral).sum()),
        _ => None,
    }
}

/// Radius beyond which `w` is below `e^{-745}` relative to its peak.
fn weight_radius(spec: &WeightSpec) -> f64 {
    (760.0 / spec.a()).powf(1.0 / spec.lambda())
}

fn whole_line_breaks(spec: &WeightSpec) -> Vec<f64> {
    let l = weight_radius(spec);
    let mut points: Vec<f64> = (-16..=16).map(|i| l * i as f64 / 16.0).collect();
    points.extend([-1.0, 1.0]);
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

fn reference_factor_integral(factor: &Factor, spec: &WeightSpec) -> Result<f64> {
    match factor {
        Factor::Bumps(b) => b.iter().map(FoolingFunction::integral_by_quadrature).sum(),
        _ => Ok(integrate_with_breaks(
            |x| factor_weighted(factor, spec, x),
            &whole_line_breaks(spec),
            Tolerance::new(1e-300, 1e-13),
        )?
        .value),
    }
}

/// `k`-th derivative of `1/(1+x²) = Im 1/(x - i)`.
fn rational_derivative(k: usize, x: f64) -> f64 {
    let rho = x.hypot(1.0);
    let alpha = (-1.0f64).atan2(x);
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    -sign * fact * rho.powi(-(k as i32 + 1)) * ((k as f64 + 1.0) * alpha).sin()
}

fn factor_norm(factor: &Factor, spec: &WeightSpec, r: usize) -> Result<f64> {
    const SLACK: f64 = 1e-12;
    let tol = Tolerance::new(1e-300, 1e-12);
    let breaks = whole_line_breaks(spec);
    let integral = |g: &dyn Fn(f64) -> f64| -> Result<f64> {
        let est = integrate_with_breaks(|x| g(x).abs() * spec.weight_1d(x), &breaks, tol)?;
        Ok(est.value + est.error.max(SLACK * est.value))
    };
    match factor {
        Factor::One => Ok(spec.mass()),
        Factor::Monomial(p) => {
            let p = *p as usize;
            Ok((0..=r.min(p))
                .map(|k| {
                    let falling: f64 = ((p - k + 1)..=p).map(|i| i as f64).product();
                    falling * spec.abs_moment((p - k) as f64)
                })
                .sum())
        }
        Factor::GaussPoly => {
            // D^k[(1+x²) e^{-cx²}] = P_k(x) e^{-cx²}, P_{k+1} = P_k' - 2cx P_k
            let mut p = Poly(vec![1.0, 0.0, 1.0]);
            let mut total = 0.0;
            for _ in 0..=r {
                let q = p.clone();
                total += integral(&|x| q.eval(x) * (-GAUSSPOLY_C * x * x).exp())?;
                p = p
                    .derivative()
                    .add(&Poly(vec![0.0, -2.0 * GAUSSPOLY_C]).mul(&p));
            }
            Ok(total)
        }
        Factor::Rational => (0..=r)
            .map(|k| integral(&|x| rational_derivative(k, x)))
            .sum(),
        Factor::Bumps(b) => Ok(b.iter().map(FoolingFunction::norm_certificate).sum()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleFamily {
    TruncatedGauss,
    FullGauss,
    Sparse,
}

impl FromStr for RuleFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "truncated" | "truncated_gauss" => Ok(Self::TruncatedGauss),
            "full" | "full_gauss" => Ok(Self::FullGauss),
            "sparse" => Ok(Self::Sparse),
            _ => Err(Error::Parse(format!("unknown rule family `{s}`"))),
        }
    }
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    /// Node budget.
    pub n: usize,
    /// Nodes actually used.
    pub nodes: usize,
    /// Gauss degree `m` (one-dimensional rules) or level `ξ` (sparse).
    pub level: usize,
    pub value: f64,
    pub error: f64,
    /// `error · n^{r_λ}`.
    pub scaled_rate: f64,
    /// `error / (n^{-r_λ} (log n)^{r_λ(d-1)})`.
    pub scaled_lower: f64,
    /// `error / (n^{-r_λ} (log n)^{(r_λ+1)(d-1)})`.
    pub scaled_upper: f64,
    /// Integral of the lower-bound witness built against this rule's nodes.
    pub witness: Option<f64>,
    /// Witness integral over `n^{-r_λ} (log n)^{r_λ(d-1)}`.
    pub scaled_witness: Option<f64>,
}

/// Least-squares line through `(log n, log error)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Sweep results with fits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub schema: u32,
    pub family: FamilyKind,
    pub rule: RuleFamily,
    pub spec: WeightSpec,
    pub d: usize,
    pub r: usize,
    pub r_lambda: f64,
    pub theta: f64,
    pub exact_integral: f64,
    pub norm_estimate: f64,
    /// Errors at or below this level are excluded from fits.
    pub floor: f64,
    pub slope_tolerance: f64,
    pub points: Vec<SweepPoint>,
    pub fit: Option<Fit>,
    /// Fit with the smallest budget dropped.
    pub fit_without_first: Option<Fit>,
    /// Fit of `error / (log n)^{(r_λ+1)(d-1)}` for `d ≥ 2`.
    pub polylog_fit: Option<Fit>,
    /// Every error is at the noise floor; no rate can be fitted.
    pub all_errors_at_floor: bool,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// `error(4n) ≤ error(n)` for every pair past the first third of the
    /// sweep.
    pub fn monotone_beyond_knee(&self) -> bool {
        let start = self.points.len() / 3;
        let tail = &self.points[start..];
        tail.iter().all(|p| {
            tail.iter()
                .find(|q| q.n == 4 * p.n)
                .map_or(true, |q| q.error <= p.error)
        })
    }
}

/// Least-squares fit of `log y` against `log x`; `None` with fewer than
/// two points.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Option<Fit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some(Fit {
        slope,
        intercept: my - slope * mx,
        points: pts.len(),
    })
}

/// Options for [`run_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepOptions {
    /// Also build the lower-bound witness against each rule.
    pub witness: bool,
}

enum BuiltRule {
    OneD(QuadRule1D),
    Sparse(crate::sparse::SparseRule, u32),
}

fn integrate_on(rule: &BuiltRule, f: &TestFunction) -> Result<f64> {
    match rule {
        BuiltRule::OneD(q) => f.integrate_1d(q),
        BuiltRule::Sparse(s, _) => f.integrate_sparse(s),
    }
}

fn sweep_point(
    rules: &DyadicFamily,
    kind: RuleFamily,
    f: &TestFunction,
    n: usize,
    bump: Option<&BumpSpec>,
    r_lambda: f64,
) -> Result<SweepPoint> {
    let d = f.d();
    let built = match kind {
        RuleFamily::TruncatedGauss | RuleFamily::FullGauss if d != 1 => {
            return Err(Error::InvalidParameter(format!(
                "{kind:?} sweeps are one-dimensional; got d = {d}"
            )))
        }
        RuleFamily::TruncatedGauss => BuiltRule::OneD(rules.rule_for_budget(n)?),
        RuleFamily::FullGauss => BuiltRule::OneD(rules.full_rule(n)?),
        RuleFamily::Sparse => {
            let (xi, rule) = select_xi_for_budget(rules, d, n)?;
            BuiltRule::Sparse(rule, xi)
        }
    };
    let value = integrate_on(&built, f)?;
    let error = (value - f.exact_integral()).abs();
    let (nodes, level, node_set) = match &built {
        BuiltRule::OneD(q) => (q.len(), q.m(), NodeSet::from(q)),
        BuiltRule::Sparse(s, xi) => (s.len(), *xi as usize, NodeSet::from(s)),
    };
    let nf = n as f64;
    let log = nf.ln();
    let dm1 = (d - 1) as i32;
    let base = nf.powf(-r_lambda);
    let lower = base * log.powf(r_lambda * dm1 as f64);
    let upper = base * log.powf((r_lambda + 1.0) * dm1 as f64);
    let witness = match bump {
        Some(b) => Some(lower_bound_witness(&node_set, n, b, f.spec())?.integral()),
        None => None,
    };
    Ok(SweepPoint {
        n,
        nodes,
        level,
        value,
        error,
        scaled_rate: error / base,
        scaled_lower: error / lower,
        scaled_upper: error / upper,
        witness,
        scaled_witness: witness.map(|w| w / lower),
    })
}

/// Integrates `f` with the rule selected for each budget and fits the rate.
pub fn run_sweep(
    rules: &DyadicFamily,
    kind: RuleFamily,
    f: &TestFunction,
    budgets: &[usize],
    options: SweepOptions,
) -> Result<ConvergenceReport> {
    if budgets.is_empty() || budgets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "budgets must be non-empty and strictly increasing".into(),
        ));
    }
    if rules.spec().with_dim(1)? != f.spec().with_dim(1)? {
        return Err(Error::InvalidParameter(
            "rule family and test function use different weights".into(),
        ));
    }
    f.check_reference()?;
    let r_lambda = (1.0 - 1.0 / f.spec().lambda()) * f.r() as f64;
    let bump = if options.witness {
        Some(BumpSpec::new(f.r(), f.spec().lambda())?)
    } else {
        None
    };
    let points = budgets
        .par_iter()
        .map(|&n| sweep_point(rules, kind, f, n, bump.as_ref(), r_lambda))
        .collect::<Result<Vec<_>>>()?;

    let floor = 1e2 * f64::EPSILON * f.exact_integral().abs();
    let above: Vec<&SweepPoint> = points.iter().filter(|p| p.error > floor).collect();
    let ns: Vec<f64> = above.iter().map(|p| p.n as f64).collect();
    let errs: Vec<f64> = above.iter().map(|p| p.error).collect();
    let fit = fit_loglog(&ns, &errs);
    let fit_without_first = if ns.len() > 2 {
        fit_loglog(&ns[1..], &errs[1..])
    } else {
        None
    };
    let polylog_fit = if f.d() >= 2 {
        let corrected: Vec<f64> = above
            .iter()
            .map(|p| {
                p.error
                    / (p.n as f64)
                        .ln()
                        .powf((r_lambda + 1.0) * (f.d() - 1) as f64)
            })
            .collect();
        fit_loglog(&ns, &corrected)
    } else {
        None
    };
    Ok(ConvergenceReport {
        schema: crate::io::SCHEMA_VERSION,
        family: f.kind(),
        rule: kind,
        spec: *f.spec(),
        d: f.d(),
        r: f.r(),
        r_lambda,
        theta: rules.theta(),
        exact_integral: f.exact_integral(),
        norm_estimate: f.norm_estimate(),
        floor,
        slope_tolerance: SLOPE_TOLERANCE,
        all_errors_at_floor: above.is_empty(),
        points,
        fit,
        fit_without_first,
        polylog_fit,
    })
}

/// Truncated and full Gauss sweeps at equal budgets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullVsTruncated {
    pub truncated: ConvergenceReport,
    pub full: ConvergenceReport,
    /// `full error / truncated error` per budget (infinite when the
    /// truncated error is zero).
    pub ratios: Vec<f64>,
}

pub fn compare_full_vs_truncated(
    rules: &DyadicFamily,
    f: &TestFunction,
    budgets: &[usize],
) -> Result<FullVsTruncated> {
    let truncated = run_sweep(
        rules,
        RuleFamily::TruncatedGauss,
        f,
        budgets,
        SweepOptions::default(),
    )?;
    let full = run_sweep(
        rules,
        RuleFamily::FullGauss,
        f,
        budgets,
        SweepOptions::default(),
    )?;
    let ratios = truncated
        .points
        .iter()
        .zip(&full.points)
        .map(|(t, u)| u.error / t.error)
        .collect();
    Ok(FullVsTruncated {
        truncated,
        full,
        ratios,
    })
}

/// Parses `lo:hi:xK` (geometric) or `lo:hi:+K` (arithmetic) or a comma list.
pub fn parse_budgets(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("malformed budget list `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    let out: Vec<usize> = match parts.as_slice() {
        [lo, hi, step] => {
            let lo: usize = lo.parse().map_err(|_| bad())?;
            let hi: usize = hi.parse().map_err(|_| bad())?;
            let mut v = Vec::new();
            if let Some(f) = step.strip_prefix('x') {
                let f: usize = f.parse().map_err(|_| bad())?;
                if f < 2 || lo == 0 {
                    return Err(bad());
                }
                let mut n = lo;
                while n <= hi {
                    v.push(n);
                    n *= f;
                }
            } else if let Some(s) = step.strip_prefix('+') {
                let s: usize = s.parse().map_err(|_| bad())?;
                if s == 0 {
                    return Err(bad());
                }
                v.extend((lo..=hi).step_by(s));
            } else {
                return Err(bad());
            }
            v
        }
        [list] => list
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?,
        _ => return Err(bad()),
    };
    if out.is_empty() || out.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad());
    }
    Ok(out)
}
