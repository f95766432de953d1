//! One-dimensional rules: full Gauss, truncated Gauss, the index maps
//! `j(m)` and `m_n`, and the dyadic levels `Q_{2^k}` used by the sparse
//! construction.
//!
//! The truncated rule keeps the Gauss nodes with index `|k| ≤ j(m)`, where
//! `j(m)` is the first positive index whose zero reaches `θ a_m`. Rule sizes
//! for the budget scan are obtained from Sturm counts on the Jacobi matrix,
//! so scanning `m` costs `O(m)` per step instead of an eigensolve.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use crate::error::{Error, Result};
use crate::orthopoly::{gauss_rule, GaussData, RecurrenceTable};
use crate::tridiag;
use crate::weights::{Family, WeightSpec};

/// Default truncation parameter.
pub const DEFAULT_THETA: f64 = 0.5;

/// How many consecutive over-budget `m` end the budget scan.
const SCAN_PATIENCE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    FullGauss,
    TruncatedGauss,
}

/// Whether the zero `x_{m,0} = 0` of an odd-degree rule is kept.
///
/// Freud weights always keep it. For Markov–Sonin weights the center is
/// dropped when `β > r - 1` and kept otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterPolicy {
    Include,
    Exclude,
}

impl CenterPolicy {
    pub fn for_weight(spec: &WeightSpec, r: usize) -> Self {
        match (spec.family(), spec.beta()) {
            (Family::MarkovSonin, Some(beta)) if beta > r as f64 - 1.0 => Self::Exclude,
            _ => Self::Include,
        }
    }

    fn keeps_center(self) -> bool {
        self == Self::Include
    }
}

/// A univariate rule with positive weights on ascending nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule1D {
    kind: RuleKind,
    spec: WeightSpec,
    m: usize,
    theta: Option<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    scaled_weights: Vec<f64>,
    center_included: bool,
    degenerate: bool,
}

impl QuadRule1D {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    /// Degree of the underlying Gauss rule.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `weights[i] / w(nodes[i])`, finite even where `weights[i]` underflows.
    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }

    pub fn center_included(&self) -> bool {
        self.center_included
    }

    /// True when no zero reached `θ a_m` and the truncation kept everything.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "theta must lie in (0, 1), got {theta}"
        )))
    }
}

/// `j(m)` for a computed Gauss rule, plus the degenerate flag.
pub fn j_of_m(g: &GaussData, theta: f64) -> Result<(usize, bool)> {
    check_theta(theta)?;
    if g.m() < 2 {
        return Err(Error::InvalidParameter("j(m) needs m >= 2".into()));
    }
    Ok(g.j_index(theta))
}

/// The full `m`-point Gauss rule.
pub fn full_rule(table: &RecurrenceTable, m: usize) -> Result<QuadRule1D> {
    let g = gauss_rule(table, m)?;
    Ok(QuadRule1D {
        kind: RuleKind::FullGauss,
        spec: *table.spec(),
        m,
        theta: None,
        nodes: g.nodes().to_vec(),
        weights: g.cotes().to_vec(),
        scaled_weights: g.scaled_cotes().to_vec(),
        center_included: m % 2 == 1,
        degenerate: false,
    })
}

/// The Gauss rule restricted to `|k| ≤ j(m)`.
pub fn truncated_rule(
    table: &RecurrenceTable,
    m: usize,
    theta: f64,
    center: CenterPolicy,
) -> Result<QuadRule1D> {
    check_theta(theta)?;
    if m < 2 {
        return Err(Error::InvalidParameter(
            "a truncated rule needs m >= 2".into(),
        ));
    }
    let g = gauss_rule(table, m)?;
    let (j, degenerate) = g.j_index(theta);
    let (nodes, weights, scaled_weights) = g.restrict(j, center.keeps_center());
    Ok(QuadRule1D {
        kind: RuleKind::TruncatedGauss,
        spec: *table.spec(),
        m,
        theta: Some(theta),
        nodes,
        weights,
        scaled_weights,
        center_included: m % 2 == 1 && center.keeps_center(),
        degenerate,
    })
}

/// Size of the truncated rule at degree `m`, from a Sturm count.
fn truncated_size(table: &RecurrenceTable, m: usize, theta: f64, center: CenterPolicy) -> usize {
    let threshold = theta * table.spec().mrs_number(m);
    let below = tridiag::count_below(&table.alpha()[..m], &table.beta()[1..m], threshold);
    let half = m / 2;
    let positive_below = below.saturating_sub(m.div_ceil(2)).min(half);
    let j = if positive_below == half {
        half
    } else {
        positive_below + 1
    };
    2 * j + usize::from(m % 2 == 1 && center.keeps_center())
}

/// Largest `m` whose truncated rule has at most `n` nodes.
///
/// The scan is linear in `m`; it stops once [`SCAN_PATIENCE`] consecutive
/// degrees exceed the budget. Fails if the table ends before that.
pub fn select_m_for_budget(
    table: &RecurrenceTable,
    n: usize,
    theta: f64,
    center: CenterPolicy,
) -> Result<usize> {
    check_theta(theta)?;
    let mut sizes = Vec::new();
    scan_budget(table, n, theta, center, &mut sizes)
}

/// Scan shared by [`select_m_for_budget`] and [`DyadicFamily`]; `sizes[m]`
/// memoizes the rule size of degree `m` (entries 0 and 1 unused).
fn scan_budget(
    table: &RecurrenceTable,
    n: usize,
    theta: f64,
    center: CenterPolicy,
    sizes: &mut Vec<usize>,
) -> Result<usize> {
    let mut best = None;
    let mut over = 0;
    let mut m = 2;
    while over < SCAN_PATIENCE {
        if m > table.len() {
            return Err(Error::InvalidParameter(format!(
                "recurrence table of length {} is too short for budget {n}",
                table.len()
            )));
        }
        while sizes.len() <= m {
            let k = sizes.len();
            sizes.push(if k < 2 {
                0
            } else {
                truncated_size(table, k, theta, center)
            });
        }
        if sizes[m] <= n {
            best = Some(m);
            over = 0;
        } else {
            over += 1;
        }
        m += 1;
    }
    best.ok_or(Error::BudgetTooSmall {
        budget: n,
        required: sizes[2..].iter().copied().min().unwrap_or(2),
    })
}

/// `Σ w_i f(x_i)`.
pub fn apply_rule<F: Fn(f64) -> f64>(rule: &QuadRule1D, f: F) -> Result<f64> {
    let mut sum = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand {
                node: vec![x],
                value: v,
            });
        }
        sum += w * v;
    }
    Ok(sum)
}

/// Same sum for an integrand supplied already multiplied by the weight,
/// `fw(x) = f(x) w(x)`, using the scaled weights. Avoids underflow of
/// far-tail Cotes numbers.
pub fn apply_rule_weighted<F: Fn(f64) -> f64>(rule: &QuadRule1D, fw: F) -> Result<f64> {
    let mut sum = 0.0;
    for (&x, &mu) in rule.nodes.iter().zip(&rule.scaled_weights) {
        if !mu.is_finite() {
            return Err(Error::ZeroWeightNode(x));
        }
        let v = fw(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand {
                node: vec![x],
                value: v,
            });
        }
        sum += mu * v;
    }
    Ok(sum)
}

/// `Q_{2^k}`: the 1-point rule `{0, ∫w}` for `k = 0`, otherwise the
/// truncated rule at `m_{2^k}`.
pub fn dyadic_rule(
    table: &RecurrenceTable,
    k: u32,
    theta: f64,
    center: CenterPolicy,
) -> Result<QuadRule1D> {
    if k == 0 {
        return full_rule(table, 1);
    }
    let budget = 1usize << k;
    let mut m = select_m_for_budget(table, budget, theta, center)?;
    loop {
        let rule = truncated_rule(table, m, theta, center)?;
        // Sturm counts and eigenvalues may disagree when a zero sits on
        // the threshold; step down until the built rule fits.
        if rule.len() <= budget || m == 2 {
            return Ok(rule);
        }
        m -= 1;
    }
}

/// Source of the univariate level rules `Q_{2^k}`.
pub trait LevelRules: Sync {
    fn spec(&self) -> &WeightSpec;

    fn level(&self, k: u32) -> Result<Arc<QuadRule1D>>;

    /// Node count of level `k`; may avoid building the rule.
    fn level_size(&self, k: u32) -> Result<usize> {
        Ok(self.level(k)?.len())
    }
}

/// Cached dyadic rules of one weight, growing the recurrence table on
/// demand.
#[derive(Debug)]
pub struct DyadicFamily {
    spec: WeightSpec,
    theta: f64,
    center: CenterPolicy,
    table: RwLock<Arc<RecurrenceTable>>,
    sizes: Mutex<Vec<usize>>,
    degrees: Mutex<HashMap<usize, usize>>,
    levels: Mutex<HashMap<u32, Arc<QuadRule1D>>>,
}

impl DyadicFamily {
    pub fn new(spec: &WeightSpec, theta: f64, center: CenterPolicy) -> Result<Self> {
        check_theta(theta)?;
        let table = RecurrenceTable::for_spec(&spec.with_dim(1)?, 64)?;
        Ok(Self::from_table(table, theta, center))
    }

    /// Uses `table` as is; budgets beyond its length fail instead of
    /// regrowing it.
    pub fn with_table(table: RecurrenceTable, theta: f64, center: CenterPolicy) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self::from_table(table, theta, center))
    }

    fn from_table(table: RecurrenceTable, theta: f64, center: CenterPolicy) -> Self {
        Self {
            spec: *table.spec(),
            theta,
            center,
            table: RwLock::new(Arc::new(table)),
            sizes: Mutex::new(Vec::new()),
            degrees: Mutex::new(HashMap::new()),
            levels: Mutex::new(HashMap::new()),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn center(&self) -> CenterPolicy {
        self.center
    }

    pub fn table(&self) -> Arc<RecurrenceTable> {
        Arc::clone(&self.table.read().expect("table lock"))
    }

    /// `m_{2^k}` for `k ≥ 1`.
    pub fn degree(&self, k: u32) -> Result<usize> {
        self.degree_for_budget(1usize << k)
    }

    /// `m_n`: the largest degree whose truncated rule has at most `n` nodes.
    pub fn degree_for_budget(&self, n: usize) -> Result<usize> {
        if let Some(&m) = self.degrees.lock().expect("degree lock").get(&n) {
            return Ok(m);
        }
        let mut sizes = self.sizes.lock().expect("size lock");
        let m = loop {
            let table = self.table();
            match scan_budget(&table, n, self.theta, self.center, &mut sizes) {
                Ok(m) => break m,
                Err(Error::InvalidParameter(_)) if table.len() < (1 << 26) => {
                    let longer = RecurrenceTable::for_spec(table.spec(), 2 * table.len())?;
                    *self.table.write().expect("table lock") = Arc::new(longer);
                }
                Err(e) => return Err(e),
            }
        };
        self.degrees.lock().expect("degree lock").insert(n, m);
        Ok(m)
    }

    /// The truncated rule `Q^TG_{2j(m_n)}` for an arbitrary budget `n ≥ 2`.
    pub fn rule_for_budget(&self, n: usize) -> Result<QuadRule1D> {
        let mut m = self.degree_for_budget(n)?;
        let table = self.table();
        loop {
            let rule = truncated_rule(&table, m, self.theta, self.center)?;
            if rule.len() <= n || m == 2 {
                return Ok(rule);
            }
            m -= 1;
        }
    }

    /// The full Gauss rule with `m` nodes, growing the table if needed.
    pub fn full_rule(&self, m: usize) -> Result<QuadRule1D> {
        full_rule(&*self.table_with_len(m)?, m)
    }

    /// The truncated rule of degree `m`, growing the table if needed.
    pub fn truncated_rule(&self, m: usize) -> Result<QuadRule1D> {
        truncated_rule(&*self.table_with_len(m)?, m, self.theta, self.center)
    }

    fn table_with_len(&self, m: usize) -> Result<Arc<RecurrenceTable>> {
        let table = self.table();
        if table.len() >= m {
            return Ok(table);
        }
        let longer = Arc::new(RecurrenceTable::for_spec(
            table.spec(),
            m.max(2 * table.len()),
        )?);
        *self.table.write().expect("table lock") = Arc::clone(&longer);
        Ok(longer)
    }
}

impl LevelRules for DyadicFamily {
    fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    fn level(&self, k: u32) -> Result<Arc<QuadRule1D>> {
        if let Some(rule) = self.levels.lock().expect("level lock").get(&k) {
            return Ok(Arc::clone(rule));
        }
        let rule = if k == 0 {
            full_rule(&self.table(), 1)?
        } else {
            self.rule_for_budget(1usize << k)?
        };
        let rule = Arc::new(rule);
        self.levels
            .lock()
            .expect("level lock")
            .insert(k, Arc::clone(&rule));
        Ok(rule)
    }

    fn level_size(&self, k: u32) -> Result<usize> {
        if k == 0 {
            return Ok(1);
        }
        if let Some(rule) = self.levels.lock().expect("level lock").get(&k) {
            return Ok(rule.len());
        }
        let m = self.degree(k)?;
        Ok(self.sizes.lock().expect("size lock")[m])
    }
}

/// Full Gauss rules with exactly `2^k` nodes per level; the untruncated
/// baseline for sparse constructions.
#[derive(Debug)]
pub struct FullGaussLevels {
    spec: WeightSpec,
    table: RwLock<Arc<RecurrenceTable>>,
    levels: Mutex<HashMap<u32, Arc<QuadRule1D>>>,
}

impl FullGaussLevels {
    pub fn new(spec: &WeightSpec) -> Result<Self> {
        let table = RecurrenceTable::for_spec(&spec.with_dim(1)?, 64)?;
        Ok(Self {
            spec: *table.spec(),
            table: RwLock::new(Arc::new(table)),
            levels: Mutex::new(HashMap::new()),
        })
    }
}

impl LevelRules for FullGaussLevels {
    fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    fn level(&self, k: u32) -> Result<Arc<QuadRule1D>> {
        if let Some(rule) = self.levels.lock().expect("level lock").get(&k) {
            return Ok(Arc::clone(rule));
        }
        let m = 1usize << k;
        let current = Arc::clone(&self.table.read().expect("table lock"));
        let table = if current.len() >= m {
            current
        } else {
            let longer = Arc::new(RecurrenceTable::for_spec(&self.spec, m)?);
            *self.table.write().expect("table lock") = Arc::clone(&longer);
            longer
        };
        let rule = Arc::new(full_rule(&table, m)?);
        self.levels
            .lock()
            .expect("level lock")
            .insert(k, Arc::clone(&rule));
        Ok(rule)
    }

    fn level_size(&self, k: u32) -> Result<usize> {
        Ok(1 << k)
    }
}
