//! Smolyak quadrature on the step hyperbolic cross.
//!
//! `Q_ξ = Σ_{|k|_1 ≤ ξ} Δ_k` with `Δ_k = ⊗_i Δ_{k_i}`, `Δ_0 = Q_1` and
//! `Δ_k = Q_{2^k} - Q_{2^{k-1}}` otherwise. Two constructions are provided:
//! the direct expansion of every `Δ_k` into signed tensor grids, and the
//! combination technique, a signed sum of full tensor grids on the top `d`
//! layers of the index set.
//!
//! Coincident nodes are merged by exact bit equality. Contributions are
//! grouped by the bit pattern of their weight product, so terms that cancel
//! algebraically cancel exactly and both constructions yield the same map.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad1d::{LevelRules, QuadRule1D};

/// Multi-indices `k ∈ N_0^d` with `|k|_1 ≤ ⌊ξ⌋`, in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseIndexSet {
    d: usize,
    xi: f64,
    indices: Vec<Vec<u32>>,
}

impl SparseIndexSet {
    pub fn new(d: usize, xi: f64) -> Result<Self> {
        check_dims(d, xi)?;
        let level = xi.floor() as u32;
        let mut indices = Vec::new();
        let mut current = vec![0u32; d];
        enumerate_simplex(&mut current, 0, level, &mut indices);
        Ok(Self { d, xi, indices })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn level(&self) -> u32 {
        self.xi.floor() as u32
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, k: &[u32]) -> bool {
        k.len() == self.d && k.iter().sum::<u32>() <= self.level()
    }
}

fn check_dims(d: usize, xi: f64) -> Result<()> {
    if d == 0 || d > 16 {
        return Err(Error::InvalidParameter(format!(
            "dimension must lie in 1..=16, got {d}"
        )));
    }
    if !(xi >= 0.0 && xi.is_finite() && xi < 64.0) {
        return Err(Error::InvalidParameter(format!(
            "xi must lie in [0, 64), got {xi}"
        )));
    }
    Ok(())
}

fn enumerate_simplex(current: &mut Vec<u32>, pos: usize, budget: u32, out: &mut Vec<Vec<u32>>) {
    if pos == current.len() {
        out.push(current.clone());
        return;
    }
    for v in 0..=budget {
        current[pos] = v;
        enumerate_simplex(current, pos + 1, budget - v, out);
    }
    current[pos] = 0;
}

/// One signed tensor-product term of a sparse rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub node: Vec<f64>,
    pub coeff: f64,
    /// The multi-index `k` the term came from.
    pub k: Vec<u32>,
    /// Bit `i` set when coordinate `i` uses level `k_i` rather than `k_i - 1`.
    pub e: u32,
    /// Per-coordinate position of the node inside its level rule.
    pub s: Vec<usize>,
}

/// A `d`-dimensional rule: deduplicated nodes with their summed coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRule {
    d: usize,
    xi: f64,
    nodes: Vec<f64>,
    coeffs: Vec<f64>,
    scaled_coeffs: Vec<f64>,
    terms: Vec<Term>,
}

impl SparseRule {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Number of distinct nodes with a nonzero coefficient.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.d..(i + 1) * self.d]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.d)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `coeff / w(node)`, built from the scaled 1-d weights.
    pub fn scaled_coeffs(&self) -> &[f64] {
        &self.scaled_coeffs
    }

    /// All signed terms before merging, with provenance.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Largest absolute coordinate over all nodes.
    pub fn max_abs_coordinate(&self) -> f64 {
        self.nodes.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Comma-separated `x_1..x_d,coeff` rows under `#` comment lines.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let header: Vec<String> = (1..=self.d).map(|i| format!("x_{i}")).collect();
        let _ = writeln!(out, "{},coeff", header.join(","));
        for (node, c) in self.nodes().zip(&self.coeffs) {
            for x in node {
                let _ = write!(out, "{},", crate::io::fmt_f64(*x));
            }
            let _ = writeln!(out, "{}", crate::io::fmt_f64(*c));
        }
        out
    }

    /// Scatter plot of a two-dimensional node set; dot area tracks `|coeff|`
    /// only through color (positive blue, negative red).
    pub fn to_svg(&self) -> Result<String> {
        if self.d != 2 {
            return Err(Error::SvgDimension(self.d));
        }
        let size = 640.0;
        let pad = 20.0;
        let extent = self.max_abs_coordinate().max(1e-12) * 1.05;
        let map = |v: f64| pad + (v + extent) / (2.0 * extent) * (size - 2.0 * pad);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let mid = map(0.0);
        let _ = writeln!(
            out,
            r##"<path d="M{pad} {mid} H{} M{mid} {pad} V{}" stroke="#999" stroke-width="0.5"/>"##,
            size - pad,
            size - pad
        );
        for (node, c) in self.nodes().zip(&self.coeffs) {
            let fill = if *c >= 0.0 { "#1f4e9c" } else { "#c0392b" };
            let _ = writeln!(
                out,
                r#"<circle cx="{:.3}" cy="{:.3}" r="1.6" fill="{fill}"/>"#,
                map(node[0]),
                size - map(node[1])
            );
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}

/// Order-preserving integer key; -0.0 and 0.0 are the same node.
fn node_key(x: f64) -> u64 {
    let bits = if x == 0.0 { 0 } else { x.to_bits() };
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | 1 << 63
    }
}

fn key_node(key: u64) -> f64 {
    f64::from_bits(if key >> 63 == 1 {
        key & !(1 << 63)
    } else {
        !key
    })
}

/// Node map accumulating signed contributions by exact weight bit pattern.
#[derive(Default)]
struct Accumulator {
    map: BTreeMap<Vec<u64>, BTreeMap<(u64, u64), i64>>,
}

impl Accumulator {
    fn add(&mut self, node: &[f64], coeff: f64, scaled: f64, multiplicity: i64) {
        let key: Vec<u64> = node.iter().map(|&x| node_key(x)).collect();
        *self
            .map
            .entry(key)
            .or_default()
            .entry((coeff.to_bits(), scaled.to_bits()))
            .or_insert(0) += multiplicity;
    }

    fn finish(self, d: usize, xi: f64, terms: Vec<Term>) -> SparseRule {
        let mut nodes = Vec::new();
        let mut coeffs = Vec::new();
        let mut scaled_coeffs = Vec::new();
        for (key, parts) in self.map {
            let mut c = 0.0;
            let mut s = 0.0;
            let mut any = false;
            for ((cb, sb), mult) in parts {
                if mult != 0 {
                    any = true;
                    c += mult as f64 * f64::from_bits(cb);
                    s += mult as f64 * f64::from_bits(sb);
                }
            }
            if any {
                nodes.extend(key.iter().map(|&b| key_node(b)));
                coeffs.push(c);
                scaled_coeffs.push(s);
            }
        }
        SparseRule {
            d,
            xi,
            nodes,
            coeffs,
            scaled_coeffs,
            terms,
        }
    }
}

/// Calls `visit(node, coeff, scaled, s)` for every point of the tensor grid.
fn for_each_tensor_point<F: FnMut(&[f64], f64, f64, &[usize])>(
    rules: &[&QuadRule1D],
    mut visit: F,
) {
    let d = rules.len();
    let mut s = vec![0usize; d];
    let mut node = vec![0.0; d];
    loop {
        let mut coeff = 1.0;
        let mut scaled = 1.0;
        for i in 0..d {
            node[i] = rules[i].nodes()[s[i]];
            coeff *= rules[i].weights()[s[i]];
            scaled *= rules[i].scaled_weights()[s[i]];
        }
        visit(&node, coeff, scaled, &s);
        let mut i = d;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            s[i] += 1;
            if s[i] < rules[i].len() {
                break;
            }
            s[i] = 0;
        }
    }
}

/// Level vector and sign of each tensor product in the expansion of `Δ_k`.
/// Coordinates with `k_i = 0` contribute only `Q_1`.
fn delta_expansion(k: &[u32]) -> Vec<(u32, Vec<u32>, i64)> {
    let d = k.len();
    let mut out = Vec::new();
    for e in 0u32..(1 << d) {
        let skip = (0..d).any(|i| k[i] == 0 && e & (1 << i) == 0);
        if skip {
            continue;
        }
        let levels: Vec<u32> = (0..d)
            .map(|i| if e & (1 << i) != 0 { k[i] } else { k[i] - 1 })
            .collect();
        let excluded = (0..d).filter(|&i| k[i] > 0 && e & (1 << i) == 0).count();
        let sign = if excluded % 2 == 0 { 1 } else { -1 };
        out.push((e, levels, sign));
    }
    out
}

/// The signed terms of `Δ_k`.
pub fn delta_terms<R: LevelRules + ?Sized>(rules: &R, k: &[u32]) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for (e, levels, sign) in delta_expansion(k) {
        let owned = levels
            .iter()
            .map(|&l| rules.level(l))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&QuadRule1D> = owned.iter().map(|r| r.as_ref()).collect();
        for_each_tensor_point(&refs, |node, coeff, _, s| {
            out.push(Term {
                node: node.to_vec(),
                coeff: sign as f64 * coeff,
                k: k.to_vec(),
                e,
                s: s.to_vec(),
            });
        });
    }
    Ok(out)
}

/// `Q_ξ` by direct expansion of every `Δ_k`.
pub fn build_sparse_rule<R: LevelRules + ?Sized>(
    rules: &R,
    d: usize,
    xi: f64,
) -> Result<SparseRule> {
    let set = SparseIndexSet::new(d, xi)?;
    let mut acc = Accumulator::default();
    let mut terms = Vec::new();
    for k in set.indices() {
        for (e, levels, sign) in delta_expansion(k) {
            let owned = levels
                .iter()
                .map(|&l| rules.level(l))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&QuadRule1D> = owned.iter().map(|r| r.as_ref()).collect();
            for_each_tensor_point(&refs, |node, coeff, scaled, s| {
                acc.add(node, coeff, scaled, sign);
                terms.push(Term {
                    node: node.to_vec(),
                    coeff: sign as f64 * coeff,
                    k: k.clone(),
                    e,
                    s: s.to_vec(),
                });
            });
        }
    }
    Ok(acc.finish(d, xi, terms))
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// `Q_ξ` by the combination technique:
/// `Σ_{L-d+1 ≤ |l|_1 ≤ L} (-1)^{L-|l|} C(d-1, L-|l|) ⊗_i Q_{2^{l_i}}`.
pub fn build_sparse_rule_combination<R: LevelRules + ?Sized>(
    rules: &R,
    d: usize,
    xi: f64,
) -> Result<SparseRule> {
    let set = SparseIndexSet::new(d, xi)?;
    let level = set.level();
    let full = (1u32 << d) - 1;
    let mut acc = Accumulator::default();
    let mut terms = Vec::new();
    for l in set.indices() {
        let gap = level - l.iter().sum::<u32>();
        if gap as usize >= d {
            continue;
        }
        let mult = binomial(d as u64 - 1, gap as u64) as i64 * if gap % 2 == 0 { 1 } else { -1 };
        let owned = l
            .iter()
            .map(|&li| rules.level(li))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&QuadRule1D> = owned.iter().map(|r| r.as_ref()).collect();
        for_each_tensor_point(&refs, |node, coeff, scaled, s| {
            acc.add(node, coeff, scaled, mult);
            terms.push(Term {
                node: node.to_vec(),
                coeff: mult as f64 * coeff,
                k: l.clone(),
                e: full,
                s: s.to_vec(),
            });
        });
    }
    Ok(acc.finish(d, xi, terms))
}

/// `|G(ξ)|`: the number of terms in the `Δ` expansion before merging,
/// `Σ_{|k|_1 ≤ ξ} Π_i c(k_i)` with `c(0) = |Q_1|` and
/// `c(k) = |Q_{2^k}| + |Q_{2^{k-1}}|`.
pub fn term_count<R: LevelRules + ?Sized>(rules: &R, d: usize, xi: f64) -> Result<u64> {
    let set = SparseIndexSet::new(d, xi)?;
    let level = set.level();
    let mut c = vec![rules.level_size(0)? as u64];
    for k in 1..=level {
        c.push((rules.level_size(k)? + rules.level_size(k - 1)?) as u64);
    }
    Ok(set
        .indices()
        .iter()
        .map(|k| k.iter().map(|&ki| c[ki as usize]).product::<u64>())
        .sum())
}

fn checked_sum(rule: &SparseRule, values: Vec<f64>, weights: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (i, (v, w)) in values.into_iter().zip(weights).enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand {
                node: rule.node(i).to_vec(),
                value: v,
            });
        }
        sum += w * v;
    }
    Ok(sum)
}

/// Largest coefficient difference between two rules on the same node set;
/// `None` if the node sets differ.
pub fn coefficient_gap(a: &SparseRule, b: &SparseRule) -> Option<f64> {
    if a.d != b.d || a.nodes != b.nodes {
        return None;
    }
    Some(
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
    )
}

/// `Σ coeff · f(node)`. The integrand is evaluated on all nodes in parallel
/// before the sum is formed in node order.
pub fn apply_sparse<F: Fn(&[f64]) -> f64 + Sync>(rule: &SparseRule, f: F) -> Result<f64> {
    let values: Vec<f64> = rule.nodes.par_chunks_exact(rule.d).map(&f).collect();
    checked_sum(rule, values, &rule.coeffs)
}

/// As [`apply_sparse`] for an integrand already multiplied by the weight.
pub fn apply_sparse_weighted<F: Fn(&[f64]) -> f64 + Sync>(rule: &SparseRule, fw: F) -> Result<f64> {
    if let Some(i) = rule.scaled_coeffs.iter().position(|s| !s.is_finite()) {
        let node = rule.node(i);
        let zero = node.iter().copied().find(|&x| x == 0.0).unwrap_or(node[0]);
        return Err(Error::ZeroWeightNode(zero));
    }
    let values: Vec<f64> = rule.nodes.par_chunks_exact(rule.d).map(&fw).collect();
    checked_sum(rule, values, &rule.scaled_coeffs)
}

/// Largest integer `ξ` whose merged node count is at most `n`, with the
/// rule itself. Node counts grow with `ξ`, so the scan stops at the first
/// level over budget.
pub fn select_xi_for_budget<R: LevelRules + ?Sized>(
    rules: &R,
    d: usize,
    n: usize,
) -> Result<(u32, SparseRule)> {
    let mut best: Option<(u32, SparseRule)> = None;
    for xi in 0u32.. {
        let rule = build_sparse_rule_combination(rules, d, xi as f64)?;
        if rule.len() > n {
            break;
        }
        best = Some((xi, rule));
        if xi >= 40 {
            break;
        }
    }
    best.ok_or(Error::BudgetTooSmall {
        budget: n,
        required: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad1d::{CenterPolicy, DyadicFamily, FullGaussLevels};
    use crate::weights::WeightSpec;

    fn hermite() -> DyadicFamily {
        DyadicFamily::new(&WeightSpec::hermite(1), 0.5, CenterPolicy::Include).unwrap()
    }

    #[test]
    fn index_set_size_and_closure() {
        for d in 1..=4usize {
            for xi in [0.0, 1.5, 3.0, 5.7] {
                let set = SparseIndexSet::new(d, xi).unwrap();
                let l = xi.floor() as u64;
                assert_eq!(set.len() as u64, binomial(l + d as u64, d as u64));
                for k in set.indices() {
                    for i in 0..d {
                        if k[i] > 0 {
                            let mut lower = k.clone();
                            lower[i] -= 1;
                            assert!(set.contains(&lower));
                        }
                    }
                }
            }
        }
        assert!(SparseIndexSet::new(0, 1.0).is_err());
        assert!(SparseIndexSet::new(2, -1.0).is_err());
    }

    #[test]
    fn delta_expansion_examples() {
        let fam = hermite();
        let t = delta_terms(&fam, &[0]).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].node, vec![0.0]);
        let t = delta_terms(&fam, &[2]).unwrap();
        let q4 = fam.level(2).unwrap();
        let q2 = fam.level(1).unwrap();
        assert_eq!(t.len(), q4.len() + q2.len());
        assert_eq!(t.iter().filter(|x| x.coeff < 0.0).count(), q2.len());
        let e = delta_expansion(&[1, 1]);
        let signs: Vec<(Vec<u32>, i64)> = e.into_iter().map(|(_, l, s)| (l, s)).collect();
        assert_eq!(
            signs,
            vec![
                (vec![0, 0], 1),
                (vec![1, 0], -1),
                (vec![0, 1], -1),
                (vec![1, 1], 1)
            ]
        );
    }

    #[test]
    fn one_dimensional_collapse() {
        let fam = hermite();
        for xi in 0..=7u32 {
            let rule = build_sparse_rule(&fam, 1, xi as f64 + 0.3).unwrap();
            let q = fam.level(xi).unwrap();
            let nodes: Vec<f64> = rule.nodes().map(|n| n[0]).collect();
            assert_eq!(nodes, q.nodes());
            assert_eq!(rule.coeffs(), q.weights());
        }
    }

    #[test]
    fn level_zero_rule() {
        let fam = hermite();
        let rule = build_sparse_rule(&fam, 2, 0.0).unwrap();
        assert_eq!(rule.len(), 1);
        assert_eq!(rule.node(0), &[0.0, 0.0]);
        assert!((rule.coeffs()[0] - std::f64::consts::PI).abs() < 1e-14);
        let csv = rule.to_csv(&[]);
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn delta_and_combination_agree() {
        let fam = hermite();
        for d in 2..=3 {
            for xi in 0..=5 {
                let a = build_sparse_rule(&fam, d, xi as f64).unwrap();
                let b = build_sparse_rule_combination(&fam, d, xi as f64).unwrap();
                assert_eq!(a.nodes, b.nodes, "d={d} xi={xi}");
                for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                    assert!((x - y).abs() <= 1e-12, "d={d} xi={xi}");
                }
                assert_eq!(
                    a.terms().len() as u64,
                    term_count(&fam, d, xi as f64).unwrap()
                );
            }
        }
    }

    #[test]
    fn constants_and_symmetry() {
        let gauss = FullGaussLevels::new(&WeightSpec::hermite(1)).unwrap();
        let rule = build_sparse_rule_combination(&gauss, 3, 5.0).unwrap();
        let exact = std::f64::consts::PI.powf(1.5);
        assert!((apply_sparse(&rule, |_| 1.0).unwrap() - exact).abs() < 1e-12);
        assert!(apply_sparse(&rule, |x| x[0]).unwrap().abs() < 1e-13);

        // truncated levels drop tail mass; the sum follows the 1-d masses
        let fam = hermite();
        let rule = build_sparse_rule(&fam, 2, 3.0).unwrap();
        let mass = |k: u32| fam.level(k).unwrap().weights().iter().sum::<f64>();
        let mut expected = 0.0;
        for l1 in 0..=3u32 {
            for l2 in 0..=3 - l1 {
                let sign = if l1 + l2 == 3 {
                    1.0
                } else if l1 + l2 == 2 {
                    -1.0
                } else {
                    0.0
                };
                expected += sign * mass(l1) * mass(l2);
            }
        }
        assert!((apply_sparse(&rule, |_| 1.0).unwrap() - expected).abs() < 1e-13);
        assert!(apply_sparse(&rule, |x| x[1]).unwrap().abs() < 1e-13);

        let r2 = build_sparse_rule(&gauss, 2, 2.0).unwrap();
        let v = apply_sparse(&r2, |x| x[0] * x[0] * x[1] * x[1]).unwrap();
        assert!((v - std::f64::consts::PI / 4.0).abs() < 1e-13);
        let w = apply_sparse_weighted(&r2, |x| {
            x[0] * x[0] * x[1] * x[1] * (-x[0] * x[0] - x[1] * x[1]).exp()
        })
        .unwrap();
        assert!((w - std::f64::consts::PI / 4.0).abs() < 1e-13);
    }

    #[test]
    fn exactness_transfer() {
        // level k is the 2^k-point Gauss rule, exact for degree < 2^{k+1}
        let gauss = FullGaussLevels::new(&WeightSpec::hermite(1)).unwrap();
        let moment = |j: u32| -> f64 {
            if j % 2 == 1 {
                0.0
            } else {
                statrs::function::gamma::gamma((j as f64 + 1.0) / 2.0)
            }
        };
        let p = |k: u32| 2u32 << k;
        for xi in 0..=4u32 {
            let rule = build_sparse_rule(&gauss, 2, xi as f64).unwrap();
            for j1 in 0..40u32 {
                for j2 in 0..40u32 {
                    let dominated = (0..=xi).any(|k1| j1 < p(k1) && j2 < p(xi - k1));
                    let v = apply_sparse(&rule, |x| x[0].powi(j1 as i32) * x[1].powi(j2 as i32))
                        .unwrap();
                    let exact = moment(j1) * moment(j2);
                    // odd moments cancel large terms; scale by the absolute sum
                    let magnitude: f64 = rule
                        .nodes()
                        .zip(rule.coeffs())
                        .map(|(x, c)| (c * x[0].powi(j1 as i32) * x[1].powi(j2 as i32)).abs())
                        .sum();
                    let ok = (v - exact).abs() <= 1e-9 * exact + 1e-13 * magnitude;
                    if dominated {
                        assert!(ok, "xi={xi} j=({j1},{j2}): {v} vs {exact}");
                    }
                }
            }
        }
    }

    #[test]
    fn budget_selection() {
        let fam = hermite();
        assert_eq!(select_xi_for_budget(&fam, 2, 1).unwrap().0, 0);
        let g4 = build_sparse_rule_combination(&fam, 2, 4.0).unwrap().len();
        assert_eq!(select_xi_for_budget(&fam, 2, g4).unwrap().0, 4);
        assert!(matches!(
            select_xi_for_budget(&fam, 2, 0),
            Err(Error::BudgetTooSmall { .. })
        ));
    }

    #[test]
    fn svg_only_in_two_dimensions() {
        let fam = hermite();
        let r3 = build_sparse_rule_combination(&fam, 3, 2.0).unwrap();
        assert!(matches!(r3.to_svg(), Err(Error::SvgDimension(3))));
        let r2 = build_sparse_rule_combination(&fam, 2, 4.0).unwrap();
        let svg = r2.to_svg().unwrap();
        assert_eq!(svg.matches("<circle").count(), r2.len());
    }
}
