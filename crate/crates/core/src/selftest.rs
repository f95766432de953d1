//! Fast invariant checks across all modules, reported as a pass/fail table.

use std::fmt::Write as _;

use serde::Serialize;

use crate::convergence::{FamilyKind, TestFunction};
use crate::error::Result;
use crate::fooling::{gamma_count, gamma_set, lower_bound_witness, BumpSpec, NodeSet};
use crate::orthopoly::{
    gauss_rule, recurrence_closed_form, recurrence_stieltjes, DiscretizationControl,
};
use crate::quad1d::{apply_rule, CenterPolicy, DyadicFamily, FullGaussLevels, LevelRules};
use crate::sparse::{
    apply_sparse, build_sparse_rule, build_sparse_rule_combination, coefficient_gap,
};
use crate::weights::WeightSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub schema: u32,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_table(&self) -> String {
        let width = self
            .checks
            .iter()
            .map(|c| c.module.len() + c.name.len() + 1)
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let label = format!("{}/{}", c.module, c.name);
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {label:<width$}  {}", c.detail);
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.checks.len());
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

type Outcome = Result<(bool, String)>;

fn check(module: &'static str, name: &'static str, body: fn() -> Outcome) -> Check {
    let (passed, detail) = match body() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    Check {
        module,
        name,
        passed,
        detail,
    }
}

fn within(value: f64, tol: f64) -> (bool, String) {
    (
        value <= tol,
        format!("max deviation {value:.3e} (tol {tol:.0e})"),
    )
}

fn hermite_family() -> Result<DyadicFamily> {
    DyadicFamily::new(
        &WeightSpec::hermite(1),
        crate::quad1d::DEFAULT_THETA,
        CenterPolicy::Include,
    )
}

fn weight_mass() -> Outcome {
    let mut worst: f64 = 0.0;
    for (lambda, a, b) in [
        (2.0, 1.0, 0.0),
        (4.0, 1.0, 0.0),
        (1.5, 0.7, 0.3),
        (3.0, 2.0, -1.0),
    ] {
        let spec = WeightSpec::freud(lambda, a, b, 1)?;
        let est = crate::adaptive::integrate(
            |x| spec.weight_1d(x),
            -60.0,
            60.0,
            crate::adaptive::Tolerance::new(1e-300, 1e-13),
        )?;
        worst = worst.max((est.value - spec.mass()).abs() / spec.mass());
    }
    Ok(within(worst, 1e-11))
}

fn closed_form_hermite() -> Outcome {
    let t = recurrence_closed_form(&WeightSpec::hermite(1), 40)?;
    let worst = (1..40)
        .map(|k| (t.beta()[k] - k as f64 / 2.0).abs())
        .fold(0.0, f64::max);
    Ok(within(worst, 0.0))
}

fn string_equation() -> Outcome {
    let spec = WeightSpec::freud(4.0, 1.0, 0.0, 1)?;
    let t = recurrence_stieltjes(&spec, 20, &DiscretizationControl::default())?;
    let b = t.beta();
    let worst = (1..=18)
        .map(|k| (4.0 * b[k] * (b[k - 1] * f64::from(k > 1) + b[k] + b[k + 1]) - k as f64).abs())
        .fold(0.0, f64::max);
    Ok(within(worst, 1e-8))
}

fn stieltjes_matches_closed_form() -> Outcome {
    let spec = WeightSpec::hermite(1);
    let a = recurrence_closed_form(&spec, 40)?;
    let b = recurrence_stieltjes(&spec, 40, &DiscretizationControl::default())?;
    let worst = a
        .beta()
        .iter()
        .zip(b.beta())
        .map(|(x, y)| (x - y).abs() / x)
        .fold(0.0, f64::max);
    Ok(within(worst, 1e-10))
}

fn gauss_exactness() -> Outcome {
    let spec = WeightSpec::hermite(1);
    let t = recurrence_closed_form(&spec, 30)?;
    let mut worst: f64 = 0.0;
    for m in 1..=30 {
        let g = gauss_rule(&t, m)?;
        for j in (0..2 * m).step_by(2) {
            let q: f64 = g
                .nodes()
                .iter()
                .zip(g.cotes())
                .map(|(x, c)| c * x.powi(j as i32))
                .sum();
            let exact = spec.abs_moment(j as f64);
            worst = worst.max((q - exact).abs() / exact);
        }
    }
    Ok(within(worst, 1e-10))
}

fn node_symmetry_and_interlacing() -> Outcome {
    let t = recurrence_closed_form(&WeightSpec::hermite(1), 41)?;
    let mut ok = true;
    for m in 2..=40 {
        let g = gauss_rule(&t, m)?;
        let h = gauss_rule(&t, m + 1)?;
        let x = g.nodes();
        ok &= x.iter().zip(x.iter().rev()).all(|(a, b)| *a == -*b);
        ok &= (0..m).all(|i| h.nodes()[i] < x[i] && x[i] < h.nodes()[i + 1]);
    }
    Ok((ok, "m = 2..40".into()))
}

fn truncated_budget() -> Outcome {
    let fam = hermite_family()?;
    let mut ok = true;
    let mut worst_fill: f64 = 1.0;
    for n in [2usize, 5, 16, 33, 100, 256, 1000] {
        let rule = fam.rule_for_budget(n)?;
        ok &= rule.len() <= n;
        worst_fill = worst_fill.min(rule.len() as f64 / n as f64);
    }
    Ok((ok, format!("smallest fill {worst_fill:.3}")))
}

fn truncated_mass() -> Outcome {
    let fam = hermite_family()?;
    let spec = WeightSpec::hermite(1);
    let mut ok = true;
    for k in 1..=8 {
        let rule = fam.level(k)?;
        let mass = apply_rule(&rule, |_| 1.0)?;
        ok &= mass > 0.0 && mass <= spec.mass() * (1.0 + 1e-14);
    }
    Ok((ok, "0 < Q_k(1) <= mass for k = 1..8".into()))
}

fn sparse_forms_agree() -> Outcome {
    let fam = hermite_family()?;
    let mut worst: f64 = 0.0;
    for d in 2..=3 {
        for xi in 0..=4 {
            let a = build_sparse_rule(&fam, d, xi as f64)?;
            let b = build_sparse_rule_combination(&fam, d, xi as f64)?;
            match coefficient_gap(&a, &b) {
                Some(g) => worst = worst.max(g),
                None => return Ok((false, format!("node sets differ at d={d} xi={xi}"))),
            }
        }
    }
    Ok(within(worst, 1e-12))
}

fn sparse_collapse() -> Outcome {
    let fam = hermite_family()?;
    let mut ok = true;
    for k in 0..=6 {
        let rule = build_sparse_rule(&fam, 1, k as f64)?;
        let q = fam.level(k)?;
        ok &= rule.nodes().map(|x| x[0]).eq(q.nodes().iter().copied());
        ok &= rule.coeffs() == q.weights();
    }
    Ok((ok, "xi = 0..6".into()))
}

fn sparse_exactness() -> Outcome {
    let spec = WeightSpec::hermite(1);
    let levels = FullGaussLevels::new(&spec)?;
    let rule = build_sparse_rule(&levels, 2, 4.0)?;
    let mut worst: f64 = 0.0;
    for (j1, j2) in [(0, 0), (2, 0), (0, 30), (4, 6), (14, 2)] {
        let v = apply_sparse(&rule, |x| x[0].powi(j1) * x[1].powi(j2))?;
        let exact = spec.abs_moment(j1 as f64) * spec.abs_moment(j2 as f64);
        worst = worst.max((v - exact).abs() / exact);
    }
    Ok(within(worst, 1e-9))
}

fn gamma_enumeration() -> Outcome {
    let mut ok = true;
    for d in 1..=3 {
        for m in [1.0, 4.5, 32.0, 100.0] {
            ok &= gamma_set(d, m)?.len() as u64 == gamma_count(d, m)?;
        }
    }
    Ok((ok, "d = 1..3".into()))
}

fn bump_constant() -> Outcome {
    let b = BumpSpec::new(1, 2.0)?;
    Ok(within((b.b()[0] - 0.007_029_858_406_609_656).abs(), 1e-15))
}

fn witness_certificate() -> Outcome {
    let spec = WeightSpec::hermite(2);
    let fam = hermite_family()?;
    let bump = BumpSpec::new(1, 2.0)?;
    let rule = build_sparse_rule(&fam, 2, 5.0)?;
    let h = lower_bound_witness(&NodeSet::from(&rule), rule.len(), &bump, &spec)?;
    let at_nodes = apply_sparse(&rule, |x| h.eval(x))?;
    let quad = h.integral_by_quadrature()?;
    let gap = (quad - h.integral()).abs() / h.integral();
    let ok = at_nodes == 0.0 && h.norm_certificate() <= 1.0 && h.integral() > 0.0 && gap <= 1e-10;
    Ok((
        ok,
        format!("norm {:.6}, integral gap {gap:.3e}", h.norm_certificate()),
    ))
}

fn test_function_references() -> Outcome {
    let fam = hermite_family()?;
    for kind in FamilyKind::ALL {
        TestFunction::build(kind, &fam, 2, 2, 256)?.check_reference()?;
    }
    Ok((true, "all families".into()))
}

fn float_round_trip() -> Outcome {
    let ok = [0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::MIN_POSITIVE]
        .iter()
        .all(|&x| crate::io::fmt_f64(x).parse::<f64>().ok() == Some(x));
    Ok((ok, "17 significant digits".into()))
}

/// Runs every check in a fixed order.
pub fn run() -> SelftestReport {
    let checks = vec![
        check("weights", "mass", weight_mass),
        check("orthopoly", "closed_form_hermite", closed_form_hermite),
        check("orthopoly", "string_equation", string_equation),
        check(
            "orthopoly",
            "stieltjes_vs_closed_form",
            stieltjes_matches_closed_form,
        ),
        check("orthopoly", "gauss_exactness", gauss_exactness),
        check(
            "orthopoly",
            "symmetry_interlacing",
            node_symmetry_and_interlacing,
        ),
        check("quad1d", "budget", truncated_budget),
        check("quad1d", "truncated_mass", truncated_mass),
        check("sparse", "delta_vs_combination", sparse_forms_agree),
        check("sparse", "one_dim_collapse", sparse_collapse),
        check("sparse", "exactness", sparse_exactness),
        check("fooling", "gamma_enumeration", gamma_enumeration),
        check("fooling", "bump_constant", bump_constant),
        check("fooling", "witness_certificate", witness_certificate),
        check("bench", "reference_integrals", test_function_references),
        check("cli", "float_round_trip", float_round_trip),
    ];
    SelftestReport {
        schema: crate::io::SCHEMA_VERSION,
        checks,
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        let report = super::run();
        assert!(report.all_passed(), "{}", report.to_table());
        assert_eq!(report.to_table(), super::run().to_table());
    }
}
