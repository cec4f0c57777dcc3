//! Rho invariants: finite covers, lens spaces and flat cobordism bookkeeping.

use num::integer::gcd;
use num::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::quat::{trace_ad_minus_3_exact, Axis, ExactCircleElement};
use crate::rational::{format_rational, int, ratio, rationalize, to_f64, Rational};
use crate::signatures::{local_g_signature, signature_defect, FixedPointDatum, SignatureError};

/// Tolerance used when recognizing rho values as rationals.
pub const RHO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RhoError {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

/// A rho invariant: float value plus the exact rational when known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoValue {
    pub value: f64,
    #[serde(with = "crate::rational::serde_rational::option")]
    pub exact: Option<Rational>,
}

impl RhoValue {
    pub fn exact(r: Rational) -> Self {
        RhoValue {
            value: to_f64(&r),
            exact: Some(r),
        }
    }

    pub fn float(value: f64) -> Self {
        RhoValue { value, exact: None }
    }

    /// Recognizes `value` as a rational with denominator at most `max_den`, warning on failure.
    pub fn recognize(value: f64, max_den: u64) -> Self {
        match rationalize(value, max_den, RHO_TOL) {
            Ok(r) => RhoValue { value, exact: Some(r) },
            Err(e) => {
                log::warn!("rho value {value} kept as float: {e}");
                RhoValue::float(value)
            }
        }
    }

    pub fn zero() -> Self {
        RhoValue::exact(Rational::zero())
    }

    pub fn add_integer(&self, k: i64) -> Self {
        match &self.exact {
            Some(r) => RhoValue::exact(r + int(k)),
            None => RhoValue::float(self.value + k as f64),
        }
    }

    pub fn display(&self) -> String {
        match &self.exact {
            Some(r) => format_rational(r),
            None => format!("{}", self.value),
        }
    }
}

/// Defect and representation image for one power `gⁿ` of the deck generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTerm {
    pub n: u64,
    pub defect: f64,
    pub image: ExactCircleElement,
}

/// Isolated fixed points of the powers `g^{period·j}`, each rotating by `(θ₁, θ₂) = n·(step₁, step₂)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointFamily {
    pub count: u64,
    pub period: u64,
    #[serde(with = "crate::rational::serde_rational")]
    pub theta1_step: Rational,
    #[serde(with = "crate::rational::serde_rational")]
    pub theta2_step: Rational,
}

impl FixedPointFamily {
    pub fn data_at(&self, n: u64) -> Vec<FixedPointDatum> {
        if !n.is_multiple_of(self.period) {
            return Vec::new();
        }
        let k = int(n as i64);
        let datum = FixedPointDatum::Isolated {
            theta1: &self.theta1_step * &k,
            theta2: &self.theta2_step * &k,
        };
        vec![datum; self.count as usize]
    }
}

/// The regular `ℤ_m` cover induced by a representation with cyclic image.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverData {
    pub m: u64,
    pub terms: Vec<PowerTerm>,
}

impl CoverData {
    pub fn new(m: u64, terms: Vec<PowerTerm>) -> Result<Self, RhoError> {
        if m < 2 {
            return Err(RhoError::InvalidParameters(format!("group order {m} < 2")));
        }
        if let Some(t) = terms.iter().find(|t| t.n == 0 || t.n >= m) {
            return Err(RhoError::InvalidParameters(format!("power {} outside 1..{}", t.n, m)));
        }
        Ok(CoverData { m, terms })
    }

    /// Builds the terms from the image of the deck generator and per-power defects.
    pub fn from_defects<F>(m: u64, generator_image: &ExactCircleElement, mut defect: F) -> Result<Self, RhoError>
    where
        F: FnMut(u64) -> Result<f64, RhoError>,
    {
        let terms = (1..m)
            .map(|n| {
                Ok(PowerTerm {
                    n,
                    defect: defect(n)?,
                    image: generator_image.pow(n as i64),
                })
            })
            .collect::<Result<Vec<_>, RhoError>>()?;
        CoverData::new(m, terms)
    }

    /// Defects from isolated fixed-point families; the bounding manifold has `Sign(gⁿ, W) = sign_g(n)`.
    pub fn from_fixed_points(
        m: u64,
        generator_image: &ExactCircleElement,
        families: &[FixedPointFamily],
        sign_g: impl Fn(u64) -> f64,
    ) -> Result<Self, RhoError> {
        CoverData::from_defects(m, generator_image, |n| {
            let data: Vec<FixedPointDatum> = families.iter().flat_map(|f| f.data_at(n)).collect();
            Ok(signature_defect(local_g_signature(&data)?, sign_g(n)))
        })
    }

    /// Order of `gⁿ` in `ℤ_m`.
    pub fn order_of(&self, n: u64) -> u64 {
        self.m / gcd(n, self.m)
    }

    /// The terms whose group element has order `k`.
    pub fn restrict_to_order(&self, k: u64) -> CoverData {
        CoverData {
            m: self.m,
            terms: self.terms.iter().filter(|t| self.order_of(t.n) == k).cloned().collect(),
        }
    }

    pub fn max_denominator(&self) -> u64 {
        4 * self.m * self.m
    }
}

/// `(1/m) Σ_{n≠0} σ(gⁿ) (Tr Ad α(gⁿ) − 3)`.
pub fn rho_finite_image(cover: &CoverData) -> RhoValue {
    let sum: f64 = cover
        .terms
        .iter()
        .map(|t| t.defect * trace_ad_minus_3_exact(&t.image))
        .sum();
    RhoValue::recognize(sum / cover.m as f64, cover.max_denominator())
}

/// Rho of `L(p, q)` for the representation sending the deck generator to `exp(2πi·k/p)`.
///
/// `S³` bounds `D⁴`, on which `gⁿ` has one fixed point with rotation turns `(n/p, nq/p)`.
pub fn rho_lens_space(p: i64, q: i64, k: i64) -> Result<RhoValue, RhoError> {
    if p < 2 {
        return Err(RhoError::InvalidParameters(format!("p = {p} < 2")));
    }
    if gcd(p, q) != 1 {
        return Err(RhoError::InvalidParameters(format!("gcd({p}, {q}) != 1")));
    }
    if !(1..p).contains(&k) {
        return Err(RhoError::InvalidParameters(format!("k = {k} outside 1..{}", p - 1)));
    }
    let image = ExactCircleElement::new(Axis::I, ratio(k, p));
    let cover = CoverData::from_defects(p as u64, &image, |n| {
        let datum = FixedPointDatum::Isolated {
            theta1: ratio(n as i64, p),
            theta2: ratio(n as i64 * q, p),
        };
        Ok(signature_defect(local_g_signature(&[datum])?, 0.0))
    })?;
    Ok(rho_finite_image(&cover))
}

/// A flat cobordism from the old boundary to the new one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CobordismStep {
    pub label: String,
    pub sign_w: i64,
    pub sign_q: i64,
}

impl CobordismStep {
    pub fn new(label: impl Into<String>, sign_w: i64, sign_q: i64) -> Self {
        CobordismStep {
            label: label.into(),
            sign_w,
            sign_q,
        }
    }

    /// Twisted signature from the `ℝ ⊕ ℂ̃` splitting: `Sign^Q = Sign W + Sign^ℂ`.
    pub fn with_complex(label: impl Into<String>, sign_w: i64, sign_complex: i64) -> Self {
        CobordismStep::new(label, sign_w, sign_w + sign_complex)
    }

    /// `Sign^ℂ` of a complex line counted as a real form: twice the complex signature.
    pub fn complex_from_alpha(sign_alpha: i64) -> i64 {
        2 * sign_alpha
    }

    /// `ρ(new) − ρ(old)`.
    pub fn delta(&self) -> i64 {
        3 * self.sign_w - self.sign_q
    }
}

/// `ρ(new boundary) = ρ(old boundary) + 3 Sign W − Sign Q`.
pub fn cobordism_step(rho_in: &RhoValue, step: &CobordismStep) -> RhoValue {
    rho_in.add_integer(step.delta())
}

/// Recovers the initial rho from the terminal one across steps ordered initial → terminal.
pub fn rho_chain(rho_terminal: &RhoValue, steps: &[CobordismStep]) -> RhoValue {
    steps.iter().rev().fold(rho_terminal.clone(), |acc, s| acc.add_integer(-s.delta()))
}

pub fn connected_sum_rho(a: &RhoValue, b: &RhoValue) -> RhoValue {
    match (&a.exact, &b.exact) {
        (Some(x), Some(y)) => RhoValue::exact(x + y),
        _ => RhoValue::float(a.value + b.value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poincare_cover() -> CoverData {
        let step = || ratio(1, 60);
        let families = [
            FixedPointFamily { count: 24, period: 24, theta1_step: step(), theta2_step: step() },
            FixedPointFamily { count: 40, period: 40, theta1_step: step(), theta2_step: step() },
            FixedPointFamily { count: 60, period: 60, theta1_step: ratio(1, 120), theta2_step: ratio(1, 120) },
        ];
        let image = ExactCircleElement::new(Axis::I, ratio(-1, 120));
        CoverData::from_fixed_points(120, &image, &families, |_| 0.0).unwrap()
    }

    #[test]
    fn poincare_subtotals() {
        let cover = poincare_cover();
        assert_eq!(rho_finite_image(&cover.restrict_to_order(5)).exact, Some(ratio(6, 5)));
        assert_eq!(rho_finite_image(&cover.restrict_to_order(3)).exact, Some(ratio(2, 3)));
        assert_eq!(rho_finite_image(&cover.restrict_to_order(2)).exact, Some(int(0)));
        assert_eq!(rho_finite_image(&cover).exact, Some(ratio(28, 15)));
    }

    #[test]
    fn central_images_give_zero() {
        let image = ExactCircleElement::new(Axis::I, ratio(1, 2));
        let cover = CoverData::from_defects(6, &image, |n| Ok(n as f64 * 0.37)).unwrap();
        assert_eq!(rho_finite_image(&cover).exact, Some(int(0)));
    }

    #[test]
    fn cover_validation() {
        assert!(CoverData::new(1, vec![]).is_err());
        let t = PowerTerm { n: 5, defect: 0.0, image: ExactCircleElement::new(Axis::I, int(0)) };
        assert!(CoverData::new(5, vec![t]).is_err());
    }

    #[test]
    fn lens_examples() {
        assert_eq!(rho_lens_space(3, -1, 1).unwrap().exact, Some(ratio(-2, 3)));
        assert_eq!(rho_lens_space(3, -1, 2).unwrap().exact, Some(ratio(-2, 3)));
        assert_eq!(rho_lens_space(2, 1, 1).unwrap().exact, Some(int(0)));
        assert!(rho_lens_space(4, 2, 1).is_err());
        assert!(rho_lens_space(3, 1, 3).is_err());
        assert!(rho_lens_space(1, 1, 1).is_err());
    }

    #[test]
    fn cobordism_steps() {
        let m = RhoValue::exact(ratio(28, 15));
        let step = CobordismStep::new("W", -1, 0);
        assert_eq!(cobordism_step(&RhoValue::exact(ratio(73, 15)), &step).exact, Some(ratio(28, 15)));
        assert_eq!(rho_chain(&m, &[step]).exact, Some(ratio(73, 15)));
        assert_eq!(CobordismStep::new("W", 2, 0).delta(), 6);
        let id = CobordismStep::new("id", 0, 0);
        assert_eq!(cobordism_step(&m, &id), m);
        assert_eq!(rho_chain(&m, &[]), m);
        assert_eq!(rho_chain(&m, &[CobordismStep::new("s", 1, 0)]), m.add_integer(-3));
    }

    #[test]
    fn hyperbolic_table_chain() {
        let w6 = CobordismStep::with_complex("W6", -1, CobordismStep::complex_from_alpha(-1));
        assert_eq!(w6.sign_q, -3);
        let steps = [
            CobordismStep::new("W1", 0, 0),
            CobordismStep::new("W2", 0, 0),
            CobordismStep::new("W3", 0, 0),
            CobordismStep::new("W4", 1, 1),
            CobordismStep::new("W5", 0, 0),
            w6,
        ];
        let terminal = RhoValue::exact(ratio(448, 3));
        assert_eq!(rho_chain(&terminal, &steps), terminal.add_integer(-2));
    }

    #[test]
    fn connected_sums() {
        let s = connected_sum_rho(&RhoValue::exact(int(150)), &RhoValue::exact(ratio(-2, 3)));
        assert_eq!(s.exact, Some(ratio(448, 3)));
        let x = RhoValue::exact(ratio(28, 15));
        assert_eq!(connected_sum_rho(&x, &RhoValue::zero()), x);
        assert_eq!(connected_sum_rho(&x, &x).exact, Some(ratio(56, 15)));
        assert_eq!(connected_sum_rho(&x, &RhoValue::float(0.5)).exact, None);
    }

    #[test]
    fn irrational_value_stays_float() {
        let v = RhoValue::recognize(std::f64::consts::PI, 100);
        assert!(v.exact.is_none());
        assert_eq!(v.value, std::f64::consts::PI);
    }

    proptest! {
        #[test]
        fn lens_symmetric_in_k(p in 2i64..40, q in -40i64..40, k in 1i64..40) {
            prop_assume!(gcd(p, q) == 1 && k < p);
            let (a, b) = (rho_lens_space(p, q, k).unwrap(), rho_lens_space(p, q, p - k).unwrap());
            prop_assert_eq!(a.exact, b.exact);
            prop_assert!((a.value - b.value).abs() < 1e-12);
        }

        #[test]
        fn steps_compose(a in -5i64..5, b in -5i64..5, c in -5i64..5, d in -5i64..5) {
            let r = RhoValue::exact(ratio(7, 3));
            let s1 = CobordismStep::new("a", a, b);
            let s2 = CobordismStep::new("b", c, d);
            let both = CobordismStep::new("ab", a + c, b + d);
            prop_assert_eq!(cobordism_step(&cobordism_step(&r, &s1), &s2), cobordism_step(&r, &both));
        }
    }
}
