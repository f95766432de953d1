//! Freud-type and Markov–Sonin weights on the real line and their tensor
//! products on `R^d`.
//!
//! A Freud weight is `w(x) = exp(-a|x|^λ + b)` with `λ > 1`, `a > 0`; a
//! Markov–Sonin weight is `|x|^β exp(-a x² + b)` with `β > 0`. The
//! multivariate weight is always the product of the univariate one over the
//! coordinates.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Which weight family a [`WeightSpec`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Freud,
    MarkovSonin,
}

/// A member of one of the two weight families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeightSpec")]
pub struct WeightSpec {
    family: Family,
    lambda: f64,
    a: f64,
    b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    dim: usize,
}

#[derive(Deserialize)]
struct RawWeightSpec {
    family: Family,
    #[serde(default)]
    lambda: Option<f64>,
    a: f64,
    #[serde(default)]
    b: f64,
    #[serde(default)]
    beta: Option<f64>,
    #[serde(default = "default_dim")]
    dim: usize,
}

fn default_dim() -> usize {
    1
}

impl TryFrom<RawWeightSpec> for WeightSpec {
    type Error = Error;

    fn try_from(raw: RawWeightSpec) -> Result<Self> {
        match raw.family {
            Family::Freud => {
                let lambda = raw.lambda.ok_or_else(|| {
                    Error::InvalidParameter("a Freud weight needs `lambda`".into())
                })?;
                if raw.beta.is_some() {
                    return Err(Error::InvalidParameter(
                        "`beta` only applies to the markov_sonin family".into(),
                    ));
                }
                WeightSpec::freud(lambda, raw.a, raw.b, raw.dim)
            }
            Family::MarkovSonin => {
                if let Some(lambda) = raw.lambda {
                    if lambda != 2.0 {
                        return Err(Error::InvalidParameter(format!(
                            "Markov–Sonin weights have lambda = 2, got {lambda}"
                        )));
                    }
                }
                let beta = raw.beta.ok_or_else(|| {
                    Error::InvalidParameter("a Markov–Sonin weight needs `beta`".into())
                })?;
                WeightSpec::markov_sonin(beta, raw.a, raw.b, raw.dim)
            }
        }
    }
}

/// One term `coeff · |x|^exponent` of the expansion of `(w⁻¹)^(s) · w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecipTerm {
    pub coeff: f64,
    pub exponent: f64,
}

impl WeightSpec {
    /// `exp(-a|x|^λ + b)` in `dim` dimensions.
    pub fn freud(lambda: f64, a: f64, b: f64, dim: usize) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be > 1, got {lambda}"
            )));
        }
        check_common(a, b, dim)?;
        Ok(Self {
            family: Family::Freud,
            lambda,
            a,
            b,
            beta: None,
            dim,
        })
    }

    /// `|x|^β exp(-a x² + b)` in `dim` dimensions.
    pub fn markov_sonin(beta: f64, a: f64, b: f64, dim: usize) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be > 0, got {beta}"
            )));
        }
        check_common(a, b, dim)?;
        Ok(Self {
            family: Family::MarkovSonin,
            lambda: 2.0,
            a,
            b,
            beta: Some(beta),
            dim,
        })
    }

    /// The Hermite weight `exp(-x²)`.
    pub fn hermite(dim: usize) -> Self {
        Self::freud(2.0, 1.0, 0.0, dim).expect("valid hermite parameters")
    }

    /// The command-line default `exp(-x²/2)`.
    pub fn gaussian(dim: usize) -> Self {
        Self::freud(2.0, 0.5, 0.0, dim).expect("valid gaussian parameters")
    }

    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dim must be >= 1".into()));
        }
        self.dim = dim;
        Ok(self)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("weight spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `log w(x)` for a single coordinate; `-inf` where a Markov–Sonin weight
    /// vanishes.
    pub fn log_weight_1d(&self, x: f64) -> f64 {
        let ax = x.abs();
        let base = -self.a * ax.powf(self.lambda) + self.b;
        match self.beta {
            Some(beta) => beta * ax.ln() + base,
            None => base,
        }
    }

    pub fn weight_1d(&self, x: f64) -> f64 {
        self.log_weight_1d(x).exp()
    }

    /// `w(x) = ∏ w(x_i)`.
    pub fn eval_weight(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim, "point dimension does not match spec");
        x.iter().map(|&xi| self.weight_1d(xi)).product()
    }

    /// `γ_λ = 2Γ((1+λ)/2) / (√π Γ(λ/2))`.
    pub fn gamma_lambda(&self) -> f64 {
        let l = self.lambda;
        2.0 * (ln_gamma((1.0 + l) / 2.0) - ln_gamma(l / 2.0)).exp() / std::f64::consts::PI.sqrt()
    }

    /// Mhaskar–Rakhmanov–Saff number `a_m = (γ_λ m)^{1/λ}` (Freud) or `√m`
    /// (Markov–Sonin).
    pub fn mrs_number(&self, m: usize) -> f64 {
        assert!(m >= 1, "mrs_number needs m >= 1");
        match self.family {
            Family::Freud => (self.gamma_lambda() * m as f64).powf(1.0 / self.lambda),
            Family::MarkovSonin => (m as f64).sqrt(),
        }
    }

    /// `∫ |x|^p w(x) dx` over the real line (one coordinate).
    pub fn abs_moment(&self, p: f64) -> f64 {
        match self.beta {
            None => {
                let e = (p + 1.0) / self.lambda;
                2.0 * (self.b + ln_gamma(e) - e * self.a.ln()).exp() / self.lambda
            }
            Some(beta) => {
                let e = (p + beta + 1.0) / 2.0;
                (self.b + ln_gamma(e) - e * self.a.ln()).exp()
            }
        }
    }

    /// `∫ w(x) dx` over the real line (one coordinate).
    pub fn mass(&self) -> f64 {
        self.abs_moment(0.0)
    }

    /// Coefficients `c_{s,j}` and exponents `λ_{s,j}` with
    /// `(w⁻¹)^(s)(x) = w⁻¹(x) (sign x)^s Σ_j c_{s,j} |x|^{λ_{s,j}}`.
    ///
    /// Exponents are `tλ - s` for `t = s, …, 1` (strictly decreasing); the
    /// `s = 0` table is `{(1, 0)}`. Zero coefficients are kept so the
    /// exponent list is always complete.
    pub fn recip_weight_derivative_coeffs(&self, s: usize) -> Result<Vec<RecipTerm>> {
        if self.family != Family::Freud {
            return Err(Error::UnsupportedWeight(
                "reciprocal-weight derivatives are only defined for Freud weights".into(),
            ));
        }
        // coeffs[t] multiplies |x|^{tλ - s}; d/dx adds (tλ - s) c_t to slot t,
        // the chain-rule factor aλ|x|^{λ-1} moves c_t to slot t + 1.
        let al = self.a * self.lambda;
        let mut coeffs = vec![1.0];
        for step in 0..s {
            let mut next = vec![0.0; coeffs.len() + 1];
            for (t, &c) in coeffs.iter().enumerate() {
                next[t] += (t as f64 * self.lambda - step as f64) * c;
                next[t + 1] += al * c;
            }
            coeffs = next;
        }
        let lowest = if s == 0 { 0 } else { 1 };
        Ok((lowest..coeffs.len())
            .rev()
            .map(|t| RecipTerm {
                coeff: coeffs[t],
                exponent: t as f64 * self.lambda - s as f64,
            })
            .collect())
    }
}

fn check_common(a: f64, b: f64, dim: usize) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter(format!("a must be > 0, got {a}")));
    }
    if !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "b must be finite, got {b}"
        )));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dim must be >= 1".into()));
    }
    Ok(())
}

/// Evaluates `(w⁻¹)^(s)(x) · w(x) = (sign x)^s Σ c |x|^e` for a table from
/// [`WeightSpec::recip_weight_derivative_coeffs`] of order `s`.
pub fn recip_derivative_times_weight(terms: &[RecipTerm], s: usize, x: f64) -> f64 {
    let ax = x.abs();
    let sum: f64 = terms.iter().map(|t| t.coeff * ax.powf(t.exponent)).sum();
    if x < 0.0 && s % 2 == 1 {
        -sum
    } else {
        sum
    }
}

/// Parameters of the standard Gaussian measure viewed as a Freud weight for
/// the `L^p(γ)` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMeasureParams {
    pub p: f64,
}

impl GaussianMeasureParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in [1, inf), got {p}"
            )));
        }
        Ok(Self { p })
    }

    /// The weight `g^{1/p}` with `g` the `d`-dimensional Gaussian density:
    /// `λ = 2`, `a = 1/(2p)`, `b = -log(2π)/(2p)` per coordinate.
    pub fn to_weight_spec(&self, dim: usize) -> Result<WeightSpec> {
        let two_pi = 2.0 * std::f64::consts::PI;
        WeightSpec::freud(
            2.0,
            1.0 / (2.0 * self.p),
            -two_pi.ln() / (2.0 * self.p),
            dim,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn eval_weight_examples() {
        let g1 = WeightSpec::gaussian(1);
        assert_eq!(g1.eval_weight(&[0.0]), 1.0);
        let g2 = WeightSpec::gaussian(2);
        assert!(close(g2.eval_weight(&[1.0, 1.0]), (-1.0f64).exp(), 1e-15));
        let ms = WeightSpec::markov_sonin(1.0, 1.0, 0.0, 1).unwrap();
        assert!(close(ms.eval_weight(&[2.0]), 2.0 * (-4.0f64).exp(), 1e-15));
        assert!((ms.eval_weight(&[2.0]) - 0.036631).abs() < 1e-6);
        assert_eq!(ms.eval_weight(&[0.0]), 0.0);
    }

    #[test]
    fn mrs_number_examples() {
        let h = WeightSpec::freud(2.0, 0.5, 0.0, 1).unwrap();
        assert!(close(h.gamma_lambda(), 1.0, 1e-13));
        assert!(close(h.mrs_number(10), 10f64.sqrt(), 1e-13));
        let f4 = WeightSpec::freud(4.0, 1.0, 0.0, 1).unwrap();
        assert!(close(f4.gamma_lambda(), 1.5, 1e-13));
        assert!((f4.mrs_number(1) - 1.10668).abs() < 1e-5);
        let ms = WeightSpec::markov_sonin(1.0, 1.0, 0.0, 1).unwrap();
        assert_eq!(ms.mrs_number(9), 3.0);
    }

    #[test]
    fn mrs_number_squared_is_m_for_lambda_two() {
        let h = WeightSpec::hermite(1);
        for m in 1..200 {
            assert!((h.mrs_number(m).powi(2) - m as f64).abs() <= 1e-12 * m as f64);
        }
    }

    #[test]
    fn recip_coeffs_examples() {
        let g = WeightSpec::gaussian(1);
        let t0 = g.recip_weight_derivative_coeffs(0).unwrap();
        assert_eq!(
            t0,
            vec![RecipTerm {
                coeff: 1.0,
                exponent: 0.0
            }]
        );
        let t1 = g.recip_weight_derivative_coeffs(1).unwrap();
        assert_eq!(
            t1,
            vec![RecipTerm {
                coeff: 1.0,
                exponent: 1.0
            }]
        );
        let t2 = g.recip_weight_derivative_coeffs(2).unwrap();
        assert_eq!(
            t2,
            vec![
                RecipTerm {
                    coeff: 1.0,
                    exponent: 2.0
                },
                RecipTerm {
                    coeff: 1.0,
                    exponent: 0.0
                }
            ]
        );
    }

    #[test]
    fn recip_coeffs_exponent_range() {
        let f = WeightSpec::freud(3.5, 0.7, 0.1, 1).unwrap();
        for s in 1..6 {
            let t = f.recip_weight_derivative_coeffs(s).unwrap();
            assert_eq!(t.len(), s);
            assert!(close(t[0].exponent, s as f64 * 2.5, 1e-15));
            assert!(close(t[s - 1].exponent, 3.5 - s as f64, 1e-15));
            assert!(t.windows(2).all(|p| p[0].exponent > p[1].exponent));
        }
    }

    #[test]
    fn recip_coeffs_reject_markov_sonin() {
        let ms = WeightSpec::markov_sonin(1.0, 1.0, 0.0, 1).unwrap();
        assert!(matches!(
            ms.recip_weight_derivative_coeffs(1),
            Err(Error::UnsupportedWeight(_))
        ));
    }

    #[test]
    fn recip_coeffs_match_finite_differences() {
        // Central differences of w⁻¹ at 20 points of [0.5, 3], step 1e-5.
        for spec in [
            WeightSpec::gaussian(1),
            WeightSpec::freud(4.0, 1.0, 0.3, 1).unwrap(),
            WeightSpec::freud(1.5, 0.8, -0.2, 1).unwrap(),
        ] {
            let inv = |x: f64| (-spec.log_weight_1d(x)).exp();
            let h = 1e-5;
            let t1 = spec.recip_weight_derivative_coeffs(1).unwrap();
            let t2 = spec.recip_weight_derivative_coeffs(2).unwrap();
            for i in 0..20 {
                let x = 0.5 + 2.5 * i as f64 / 19.0;
                let fd1 = (inv(x + h) - inv(x - h)) / (2.0 * h);
                let fd2 = (inv(x + h) - 2.0 * inv(x) + inv(x - h)) / (h * h);
                let d1 = inv(x) * recip_derivative_times_weight(&t1, 1, x);
                let d2 = inv(x) * recip_derivative_times_weight(&t2, 2, x);
                assert!(
                    (fd1 - d1).abs() <= 1e-6 * d1.abs(),
                    "s=1 x={x}: {fd1} vs {d1}"
                );
                // second differences lose ~5 digits to cancellation at h = 1e-5
                assert!(
                    (fd2 - d2).abs() <= 1e-4 * d2.abs(),
                    "s=2 x={x}: {fd2} vs {d2}"
                );
            }
        }
    }

    #[test]
    fn gaussian_measure_p1() {
        let spec = GaussianMeasureParams::new(1.0)
            .unwrap()
            .to_weight_spec(1)
            .unwrap();
        assert_eq!(spec.lambda(), 2.0);
        assert_eq!(spec.a(), 0.5);
        for i in -20..=20 {
            let x = i as f64 * 0.3;
            let g = (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            assert!((spec.eval_weight(&[x]) - g).abs() <= 1e-14);
        }
        assert!(GaussianMeasureParams::new(0.5).is_err());
    }

    #[test]
    fn mass_closed_forms() {
        let h = WeightSpec::hermite(1);
        assert!(close(h.mass(), std::f64::consts::PI.sqrt(), 1e-14));
        let ms = WeightSpec::markov_sonin(1.0, 1.0, 0.0, 1).unwrap();
        assert!(close(ms.mass(), 1.0, 1e-14));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let f = WeightSpec::freud(4.0, 1.0, 0.25, 3).unwrap();
        let text = f.to_json();
        assert_eq!(
            text,
            r#"{"family":"freud","lambda":4.0,"a":1.0,"b":0.25,"dim":3}"#
        );
        assert_eq!(WeightSpec::from_json(&text).unwrap(), f);
        let ms = WeightSpec::from_json(r#"{"family":"markov_sonin","a":1,"b":0,"beta":3,"dim":1}"#)
            .unwrap();
        assert_eq!(ms.beta(), Some(3.0));
        assert_eq!(ms.lambda(), 2.0);
        assert!(WeightSpec::from_json(r#"{"family":"freud","lambda":0.5,"a":1}"#).is_err());
        assert!(WeightSpec::from_json(r#"{"family":"freud","lambda":2,"a":-1}"#).is_err());
        assert!(WeightSpec::from_json(r#"{"family":"markov_sonin","a":1}"#).is_err());
    }

    proptest::proptest! {
        #[test]
        fn weight_is_even_and_decreasing(
            lambda in 1.01f64..6.0, a in 0.05f64..3.0, b in -2.0f64..2.0, x in 0.0f64..4.0, dx in 1e-3f64..1.0
        ) {
            let spec = WeightSpec::freud(lambda, a, b, 1).unwrap();
            proptest::prop_assert_eq!(spec.eval_weight(&[x]), spec.eval_weight(&[-x]));
            // compare in log space: both values may underflow
            proptest::prop_assert!(spec.log_weight_1d(x + dx) < spec.log_weight_1d(x));
        }
    }
}
