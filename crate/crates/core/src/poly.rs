//! Univariate polynomials in `t` with rational coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{One, Signed, Zero};

use crate::rational::{int, to_f64, Display as RDisplay, Rational};

/// Coefficients in ascending degree; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::new(vec![c])
    }

    /// The identity polynomial `t`.
    pub fn t() -> Self {
        Polynomial::new(vec![int(0), int(1)])
    }

    /// `a + b·t`.
    pub fn linear(a: Rational, b: Rational) -> Self {
        Polynomial::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Exact evaluation by Horner's rule.
    pub fn eval(&self, t: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * t + c)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + to_f64(c))
    }

    pub fn scale(&self, s: &Rational) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * int(k as i64))
                .collect(),
        )
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Polynomial {
        let mut out = vec![Rational::zero()];
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c / int(k as i64 + 1)),
        );
        Polynomial::new(out)
    }

    pub fn integrate(&self, a: &Rational, b: &Rational) -> Rational {
        let f = self.antiderivative();
        f.eval(b) - f.eval(a)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Polynomial) -> Polynomial {
        self.coeffs.iter().rev().fold(Polynomial::zero(), |acc, c| {
            &(&acc * inner) + &Polynomial::constant(c.clone())
        })
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = Rational::zero();
        Polynomial::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&zero) + rhs.coeffs.get(k).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            let unit = mag.is_one() && k > 0;
            if !unit {
                write!(f, "{}", RDisplay(&mag))?;
            }
            match k {
                0 => {}
                1 => write!(f, "{}t", if unit { "" } else { "·" })?,
                _ => write!(f, "{}t^{k}", if unit { "" } else { "·" })?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;

    fn poly(c: &[(i64, i64)]) -> Polynomial {
        Polynomial::new(c.iter().map(|&(p, q)| ratio(p, q)).collect())
    }

    #[test]
    fn arithmetic() {
        let p = poly(&[(-1, 120), (0, 1), (1, 120)]);
        assert_eq!(p.eval(&int(1)), int(0));
        assert_eq!(p.eval(&int(0)), ratio(-1, 120));
        assert_eq!(p.derivative(), poly(&[(0, 1), (1, 60)]));
        assert_eq!(poly(&[(0, 1), (2, 1)]).integrate(&int(0), &int(1)), int(1));
        assert_eq!((&p - &p), Polynomial::zero());
        assert_eq!(Polynomial::t().to_string(), "t");
        assert_eq!(p.to_string(), "1/120·t^2 - 1/120");
        assert_eq!(poly(&[(0, 1), (11, 6)]).to_string(), "11/6·t");
    }

    #[test]
    fn compose_with_square() {
        let sq = poly(&[(0, 1), (0, 1), (1, 1)]);
        let p = poly(&[(1, 1), (2, 1)]);
        assert_eq!(p.compose(&sq), poly(&[(1, 1), (0, 1), (2, 1)]));
    }

    proptest! {
        #[test]
        fn product_evaluates_pointwise(a in proptest::collection::vec(-20i64..20, 0..5),
                                        b in proptest::collection::vec(-20i64..20, 0..5),
                                        t in -10i64..10) {
            let pa = Polynomial::new(a.iter().map(|&c| int(c)).collect());
            let pb = Polynomial::new(b.iter().map(|&c| int(c)).collect());
            let t = ratio(t, 3);
            prop_assert_eq!((&pa * &pb).eval(&t), pa.eval(&t) * pb.eval(&t));
            prop_assert_eq!(pa.compose(&pb).eval(&t), pa.eval(&pb.eval(&t)));
        }
    }
}
