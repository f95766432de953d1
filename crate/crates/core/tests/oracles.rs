//! Frozen reference values from independent sources (numpy `hermgauss`,
//! mpmath at 30 digits).

#![allow(clippy::excessive_precision)]

use wsquad::convergence::{FamilyKind, TestFunction};
use wsquad::orthopoly::{
    gauss_rule, recurrence_closed_form, recurrence_stieltjes, DiscretizationControl,
};
use wsquad::{CenterPolicy, DyadicFamily, WeightSpec};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn hermite_five_point_rule() {
    let nodes = [
        -2.0201828704560856,
        -0.9585724646138185,
        0.0,
        0.9585724646138185,
        2.0201828704560856,
    ];
    let cotes = [
        0.019953242059045917,
        0.3936193231522411,
        0.9453087204829418,
        0.3936193231522411,
        0.019953242059045917,
    ];
    let t = recurrence_closed_form(&WeightSpec::hermite(1), 5).unwrap();
    let g = gauss_rule(&t, 5).unwrap();
    for i in 0..5 {
        assert!((g.nodes()[i] - nodes[i]).abs() < 1e-14);
        assert!(rel(g.cotes()[i], cotes[i]) < 1e-13);
    }
}

#[test]
fn hermite_twenty_point_extreme_node() {
    let t = recurrence_closed_form(&WeightSpec::hermite(1), 20).unwrap();
    let g = gauss_rule(&t, 20).unwrap();
    assert!(rel(g.nodes()[19], 5.387480890011233) < 1e-14);
    assert!(rel(g.cotes()[19], 2.2293936455341447e-13) < 1e-10);
}

#[test]
fn first_recurrence_coefficients() {
    // β_1 = μ_2 / μ_0 = Γ(3/λ) / Γ(1/λ)
    let cases = [(4.0, 0.337989120033642364), (3.0, 0.373282173907395228)];
    for (lambda, beta1) in cases {
        let spec = WeightSpec::freud(lambda, 1.0, 0.0, 1).unwrap();
        let t = recurrence_stieltjes(&spec, 4, &DiscretizationControl::default()).unwrap();
        assert!(
            rel(t.beta()[1], beta1) < 1e-12,
            "lambda={lambda}: {}",
            t.beta()[1]
        );
    }
}

#[test]
fn test_function_integrals() {
    let rules = DyadicFamily::new(&WeightSpec::hermite(1), 0.5, CenterPolicy::Include).unwrap();
    let gp = TestFunction::build(FamilyKind::GaussPoly, &rules, 1, 2, 64).unwrap();
    assert!(gp.closed_form());
    assert!(rel(gp.exact_integral(), 1.929603345488713758) < 1e-14);
    let rational = TestFunction::build(FamilyKind::Rational, &rules, 1, 2, 64).unwrap();
    assert!(rel(rational.exact_integral(), 1.343293421646735170) < 1e-12);
    let r2 = TestFunction::build(FamilyKind::Rational, &rules, 2, 2, 64).unwrap();
    assert!(rel(r2.exact_integral(), 1.343293421646735170f64.powi(2)) < 1e-12);
}
