//! Chern–Simons invariants along abelian paths on surgered link exteriors.
//!
//! Each link component carries a meridian path `a_j(t)` and a longitude path `b_j(t)`,
//! both in full turns. The change in CS is `−Σ_j ∫₀¹ 2 b_j(t) a_j'(t) dt (mod 1)`, evaluated
//! exactly over ℚ.

use std::collections::BTreeMap;

use num::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::poly::Polynomial;
use crate::rational::{frac, int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CsError {
    #[error("no meridian path for component {0:?}")]
    MissingComponent(String),
    #[error("invalid breakpoints: {0}")]
    InvalidBreaks(String),
    #[error("path is discontinuous at t = {0}")]
    Discontinuous(String),
    #[error("reparametrization is not monotone onto [0, 1]")]
    NotMonotone,
}

/// Continuous piecewise polynomial on `[0, 1]`; piece `k` is a polynomial in the global `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piecewise {
    breaks: Vec<Rational>,
    pieces: Vec<Polynomial>,
}

impl Piecewise {
    pub fn new(breaks: Vec<Rational>, pieces: Vec<Polynomial>) -> Result<Self, CsError> {
        if breaks.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(CsError::InvalidBreaks(format!("{} breaks for {} pieces", breaks.len(), pieces.len())));
        }
        if breaks[0] != int(0) || breaks[breaks.len() - 1] != int(1) {
            return Err(CsError::InvalidBreaks("breakpoints must run from 0 to 1".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CsError::InvalidBreaks("breakpoints must increase".into()));
        }
        for k in 1..pieces.len() {
            if pieces[k - 1].eval(&breaks[k]) != pieces[k].eval(&breaks[k]) {
                return Err(CsError::Discontinuous(crate::rational::format_rational(&breaks[k])));
            }
        }
        Ok(Piecewise { breaks, pieces })
    }

    pub fn single(p: Polynomial) -> Self {
        Piecewise {
            breaks: vec![int(0), int(1)],
            pieces: vec![p],
        }
    }

    pub fn zero() -> Self {
        Piecewise::single(Polynomial::zero())
    }

    pub fn breaks(&self) -> &[Rational] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    fn piece_index(&self, t: &Rational) -> usize {
        self.breaks[1..self.breaks.len() - 1]
            .iter()
            .take_while(|b| *b <= t)
            .count()
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.pieces[self.piece_index(t)].eval(t)
    }

    pub fn is_constant(&self) -> bool {
        self.pieces.iter().all(Polynomial::is_constant) && self.pieces.windows(2).all(|w| w[0] == w[1])
    }

    /// The same function with extra breakpoints.
    pub fn refine(&self, breaks: &[Rational]) -> Piecewise {
        let mut all: Vec<Rational> = self.breaks.iter().chain(breaks).cloned().collect();
        all.sort();
        all.dedup();
        let pieces = all
            .windows(2)
            .map(|w| self.pieces[self.piece_index(&w[0])].clone())
            .collect();
        Piecewise { breaks: all, pieces }
    }

    /// Linear combination `Σ c_k · f_k` over a common refinement.
    pub fn combine(terms: &[(Rational, &Piecewise)]) -> Piecewise {
        let breaks: Vec<Rational> = terms.iter().flat_map(|(_, f)| f.breaks.iter().cloned()).collect();
        let refined: Vec<(Rational, Piecewise)> = terms.iter().map(|(c, f)| (c.clone(), f.refine(&breaks))).collect();
        let Some((_, first)) = refined.first() else {
            return Piecewise::zero();
        };
        let pieces = (0..first.pieces.len())
            .map(|k| {
                refined
                    .iter()
                    .fold(Polynomial::zero(), |acc, (c, f)| &acc + &f.pieces[k].scale(c))
            })
            .collect();
        Piecewise {
            breaks: first.breaks.clone(),
            pieces,
        }
    }

    /// `self` on `[0, 1/2]` then `other` on `[1/2, 1]`, each run at double speed.
    pub fn concat(&self, other: &Piecewise) -> Result<Piecewise, CsError> {
        if self.eval(&int(1)) != other.eval(&int(0)) {
            return Err(CsError::Discontinuous("1/2".into()));
        }
        let half = ratio(1, 2);
        let first = Polynomial::linear(int(0), int(2));
        let second = Polynomial::linear(int(-1), int(2));
        let mut breaks: Vec<Rational> = self.breaks.iter().map(|b| b * &half).collect();
        breaks.extend(other.breaks[1..].iter().map(|b| (b + int(1)) * &half));
        let mut pieces: Vec<Polynomial> = self.pieces.iter().map(|p| p.compose(&first)).collect();
        pieces.extend(other.pieces.iter().map(|p| p.compose(&second)));
        Piecewise::new(breaks, pieces)
    }

    /// Precomposition with a polynomial `φ` mapping `[0, 1]` monotonically onto itself.
    ///
    /// Only supported for single-piece paths, where the result stays a polynomial.
    pub fn compose_polynomial(&self, phi: &Polynomial) -> Result<Piecewise, CsError> {
        if phi.eval(&int(0)) != int(0) || phi.eval(&int(1)) != int(1) {
            return Err(CsError::NotMonotone);
        }
        if self.pieces.len() != 1 {
            return Err(CsError::InvalidBreaks("polynomial reparametrization needs a single piece".into()));
        }
        Ok(Piecewise::single(self.pieces[0].compose(phi)))
    }

    /// Precomposition with the piecewise-linear `φ` through `knots` (increasing, from (0,0) to (1,1)).
    pub fn reparametrize(&self, knots: &[(Rational, Rational)]) -> Result<Piecewise, CsError> {
        let ok_ends = knots.first() == Some(&(int(0), int(0))) && knots.last() == Some(&(int(1), int(1)));
        if knots.len() < 2 || !ok_ends || knots.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 >= w[1].1) {
            return Err(CsError::NotMonotone);
        }
        let mut breaks = vec![int(0)];
        let mut pieces = Vec::new();
        for w in knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (&w[0], &w[1]);
            let slope = (y1 - y0) / (x1 - x0);
            let phi = Polynomial::linear(y0 - &slope * x0, slope.clone());
            // self's breakpoints inside (y0, y1), pulled back to the x-axis
            let mut cuts: Vec<Rational> = self
                .breaks
                .iter()
                .filter(|b| *b > y0 && *b < y1)
                .map(|b| x0 + (b - y0) / &slope)
                .collect();
            cuts.push(x1.clone());
            let mut start = x0.clone();
            for cut in cuts {
                let mid = (&start + &cut) * ratio(1, 2);
                let k = self.piece_index(&phi.eval(&mid));
                pieces.push(self.pieces[k].compose(&phi));
                breaks.push(cut.clone());
                start = cut;
            }
        }
        Piecewise::new(breaks, pieces)
    }

    pub fn derivative(&self) -> Piecewise {
        Piecewise {
            breaks: self.breaks.clone(),
            pieces: self.pieces.iter().map(Polynomial::derivative).collect(),
        }
    }
}

/// `∫₀¹ f(t) g(t) dt` over the common refinement.
pub fn integrate_product(f: &Piecewise, g: &Piecewise) -> Rational {
    let f = f.refine(&g.breaks);
    let g = g.refine(&f.breaks);
    f.breaks
        .windows(2)
        .zip(f.pieces.iter().zip(&g.pieces))
        .map(|(w, (p, q))| (p * q).integrate(&w[0], &w[1]))
        .fold(Rational::zero(), |acc, x| acc + x)
}

/// Exponent sums of component meridians in one longitude.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurgeryRow {
    pub component: String,
    pub exponents: Vec<(String, i64)>,
}

/// `b_j = Σ_c (exponent of c in λ_j) · a_c`, in row order.
pub fn longitude_path(rows: &[SurgeryRow], meridians: &BTreeMap<String, Piecewise>) -> Result<Vec<(String, Piecewise)>, CsError> {
    rows.iter()
        .map(|row| {
            let terms = row
                .exponents
                .iter()
                .map(|(c, e)| {
                    meridians
                        .get(c)
                        .map(|a| (int(*e), a))
                        .ok_or_else(|| CsError::MissingComponent(c.clone()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((row.component.clone(), Piecewise::combine(&terms)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryComponent {
    pub name: String,
    pub meridian: Piecewise,
    pub longitude: Piecewise,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BoundaryPath {
    pub components: Vec<BoundaryComponent>,
}

impl BoundaryPath {
    /// Meridians as given, longitudes from the surgery rows.
    pub fn from_surgery(rows: &[SurgeryRow], meridians: &BTreeMap<String, Piecewise>) -> Result<Self, CsError> {
        let longitudes = longitude_path(rows, meridians)?;
        let components = longitudes
            .into_iter()
            .map(|(name, longitude)| {
                let meridian = meridians.get(&name).cloned().ok_or_else(|| CsError::MissingComponent(name.clone()))?;
                Ok(BoundaryComponent { name, meridian, longitude })
            })
            .collect::<Result<Vec<_>, CsError>>()?;
        Ok(BoundaryPath { components })
    }

    pub fn map_paths<F>(&self, mut f: F) -> Result<BoundaryPath, CsError>
    where
        F: FnMut(&Piecewise) -> Result<Piecewise, CsError>,
    {
        let components = self
            .components
            .iter()
            .map(|c| {
                Ok(BoundaryComponent {
                    name: c.name.clone(),
                    meridian: f(&c.meridian)?,
                    longitude: f(&c.longitude)?,
                })
            })
            .collect::<Result<Vec<_>, CsError>>()?;
        Ok(BoundaryPath { components })
    }

    /// Component-wise concatenation; both paths must list the same components in the same order.
    pub fn concat(&self, other: &BoundaryPath) -> Result<BoundaryPath, CsError> {
        if self.components.len() != other.components.len() {
            return Err(CsError::MissingComponent("component lists differ".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| {
                if a.name != b.name {
                    return Err(CsError::MissingComponent(b.name.clone()));
                }
                Ok(BoundaryComponent {
                    name: a.name.clone(),
                    meridian: a.meridian.concat(&b.meridian)?,
                    longitude: a.longitude.concat(&b.longitude)?,
                })
            })
            .collect::<Result<Vec<_>, CsError>>()?;
        Ok(BoundaryPath { components })
    }
}

/// A CS value modulo 1, with an optional chosen integer lift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CSValue {
    #[serde(with = "crate::rational::serde_rational")]
    pub residue: Rational,
    pub lift: Option<i64>,
}

impl CSValue {
    pub fn new(r: &Rational) -> Self {
        CSValue {
            residue: frac(r),
            lift: None,
        }
    }

    pub fn with_lift(self, lift: i64) -> Self {
        CSValue { lift: Some(lift), ..self }
    }

    /// `residue + lift`, or `None` when no lift was chosen.
    pub fn lifted(&self) -> Option<Rational> {
        self.lift.map(|k| cs_lift(self, k))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsResult {
    pub raw: Rational,
    pub value: CSValue,
    /// `∫ 2 b_j a_j'` per component, in path order.
    pub contributions: Vec<(String, Rational)>,
}

pub fn kirk_klassen_cs(path: &BoundaryPath) -> CsResult {
    let contributions: Vec<(String, Rational)> = path
        .components
        .iter()
        .map(|c| (c.name.clone(), int(2) * integrate_product(&c.longitude, &c.meridian.derivative())))
        .collect();
    let raw = -contributions.iter().fold(Rational::zero(), |acc, (_, x)| acc + x);
    CsResult {
        value: CSValue::new(&raw),
        raw,
        contributions,
    }
}

pub fn cs_lift(v: &CSValue, lift: i64) -> Rational {
    &v.residue + int(lift)
}

/// The lift `k` with `residue + k = target`, if `target ≡ residue (mod 1)`.
pub fn lift_for(v: &CSValue, target: &Rational) -> Option<i64> {
    use num::ToPrimitive;
    let d = target - &v.residue;
    d.is_integer().then(|| d.to_integer().to_i64()).flatten()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn lin(p: i64, q: i64) -> Piecewise {
        Piecewise::single(Polynomial::linear(int(0), ratio(p, q)))
    }

    fn row(c: &str, e: &[(&str, i64)]) -> SurgeryRow {
        SurgeryRow {
            component: c.into(),
            exponents: e.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
        }
    }

    pub(crate) fn hyperbolic_rows() -> Vec<SurgeryRow> {
        vec![
            row("X", &[("X", 4), ("V", 1), ("W", 1)]),
            row("Y", &[("Y", 4), ("V", 1), ("W", 1)]),
            row("Z", &[("Z", 3), ("V", 1), ("W", -1)]),
            row("V", &[("V", 2), ("X", 1), ("Y", 1), ("Z", 1)]),
            row("W", &[("W", 4), ("X", 1), ("Y", 1), ("Z", -1)]),
        ]
    }

    pub(crate) fn hyperbolic_meridians() -> BTreeMap<String, Piecewise> {
        [("V", lin(1, 2)), ("W", lin(1, 2)), ("X", lin(1, 4)), ("Y", lin(1, 4)), ("Z", lin(1, 3))]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }

    #[test]
    fn hyperbolic_longitudes() {
        let b = longitude_path(&hyperbolic_rows(), &hyperbolic_meridians()).unwrap();
        assert_eq!(b[0], ("X".to_string(), lin(2, 1)));
        assert_eq!(b[3], ("V".to_string(), lin(11, 6)));
    }

    #[test]
    fn hyperbolic_cs() {
        let path = BoundaryPath::from_surgery(&hyperbolic_rows(), &hyperbolic_meridians()).unwrap();
        let cs = kirk_klassen_cs(&path);
        assert_eq!(cs.raw, ratio(-10, 3));
        assert_eq!(cs.value.residue, ratio(2, 3));
        assert_eq!(cs_lift(&cs.value, -1), ratio(-1, 3));
        assert_eq!(lift_for(&cs.value, &ratio(-1, 3)), Some(-1));
        assert_eq!(lift_for(&cs.value, &ratio(1, 3)), None);
    }

    #[test]
    fn trivial_paths() {
        let zero: BTreeMap<String, Piecewise> = hyperbolic_meridians().keys().map(|k| (k.clone(), Piecewise::zero())).collect();
        let b = longitude_path(&hyperbolic_rows(), &zero).unwrap();
        assert!(b.iter().all(|(_, p)| p.is_constant() && p.eval(&int(1)).is_zero()));
        let path = BoundaryPath::from_surgery(&hyperbolic_rows(), &zero).unwrap();
        assert!(kirk_klassen_cs(&path).raw.is_zero());

        let single = BoundaryPath {
            components: vec![BoundaryComponent { name: "K".into(), meridian: lin(1, 2), longitude: Piecewise::zero() }],
        };
        assert!(kirk_klassen_cs(&single).raw.is_zero());
    }

    #[test]
    fn missing_component() {
        let mut m = hyperbolic_meridians();
        m.remove("Z");
        assert_eq!(longitude_path(&hyperbolic_rows(), &m), Err(CsError::MissingComponent("Z".into())));
    }

    #[test]
    fn lift_arithmetic() {
        let v = CSValue::new(&ratio(-1, 3));
        assert_eq!(v.residue, ratio(2, 3));
        assert_eq!(cs_lift(&CSValue::new(&int(0)), 4), int(4));
        assert_eq!(cs_lift(&CSValue::new(&ratio(-10, 3)), -1), ratio(-1, 3));
        assert_eq!(CSValue::new(&ratio(1, 120)).with_lift(0).lifted(), Some(ratio(1, 120)));
    }

    #[test]
    fn piecewise_validation() {
        assert!(Piecewise::new(vec![int(0), ratio(1, 2)], vec![Polynomial::zero()]).is_err());
        let jump = Piecewise::new(
            vec![int(0), ratio(1, 2), int(1)],
            vec![Polynomial::zero(), Polynomial::constant(int(1))],
        );
        assert_eq!(jump, Err(CsError::Discontinuous("1/2".into())));
    }

    #[test]
    fn flat_segment_adds_nothing() {
        let path = BoundaryPath::from_surgery(&hyperbolic_rows(), &hyperbolic_meridians()).unwrap();
        let end = path
            .map_paths(|p| Ok(Piecewise::single(Polynomial::constant(p.eval(&int(1))))))
            .unwrap();
        assert!(kirk_klassen_cs(&end).raw.is_zero());
        let longer = path.concat(&end).unwrap();
        assert_eq!(kirk_klassen_cs(&longer).raw, kirk_klassen_cs(&path).raw);
    }

    #[test]
    fn reparametrization_invariance() {
        let path = BoundaryPath::from_surgery(&hyperbolic_rows(), &hyperbolic_meridians()).unwrap();
        let base = kirk_klassen_cs(&path).raw;
        let phis = [
            Polynomial::new(vec![int(0), int(0), int(1)]),
            Polynomial::new(vec![int(0), ratio(1, 2), int(0), ratio(1, 2)]),
            Polynomial::new(vec![int(0), int(3), int(-3), int(1)]),
        ];
        for phi in &phis {
            let moved = path.map_paths(|p| p.compose_polynomial(phi)).unwrap();
            assert_eq!(kirk_klassen_cs(&moved).raw, base);
        }
        let knots = [(int(0), int(0)), (ratio(1, 3), ratio(1, 2)), (ratio(3, 4), ratio(3, 5)), (int(1), int(1))];
        let moved = path.map_paths(|p| p.reparametrize(&knots)).unwrap();
        assert_eq!(kirk_klassen_cs(&moved).raw, base);
        let twice = moved.map_paths(|p| p.reparametrize(&knots)).unwrap();
        assert_eq!(kirk_klassen_cs(&twice).raw, base);
    }

    #[test]
    fn concatenation_adds() {
        let path = BoundaryPath::from_surgery(&hyperbolic_rows(), &hyperbolic_meridians()).unwrap();
        let end: BTreeMap<String, Piecewise> = hyperbolic_meridians()
            .into_iter()
            .map(|(k, a)| {
                let a1 = a.eval(&int(1));
                (k, Piecewise::single(Polynomial::linear(a1.clone(), a1)))
            })
            .collect();
        let second = BoundaryPath::from_surgery(&hyperbolic_rows(), &end).unwrap();
        let joined = path.concat(&second).unwrap();
        let sum = kirk_klassen_cs(&path).raw + kirk_klassen_cs(&second).raw;
        assert_eq!(kirk_klassen_cs(&joined).value, CSValue::new(&sum));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_meridians(v: &[(i64, i64)]) -> BTreeMap<String, Piecewise> {
            ["V", "W", "X", "Y", "Z"]
                .iter()
                .zip(v)
                .map(|(k, (a, b))| (k.to_string(), Piecewise::single(Polynomial::new(vec![int(0), ratio(*a, 12), ratio(*b, 12)]))))
                .collect()
        }

        proptest! {
            #[test]
            fn knots_preserve_cs(
                v in prop::collection::vec((-12i64..12, -12i64..12), 5),
                x in 1i64..9, y in 1i64..9,
            ) {
                let path = BoundaryPath::from_surgery(&hyperbolic_rows(), &random_meridians(&v)).unwrap();
                let knots = [(int(0), int(0)), (ratio(x, 10), ratio(y, 10)), (int(1), int(1))];
                let moved = path.map_paths(|p| p.reparametrize(&knots)).unwrap();
                prop_assert_eq!(kirk_klassen_cs(&moved).raw, kirk_klassen_cs(&path).raw);
            }

            #[test]
            fn reversal_negates(v in prop::collection::vec((-12i64..12, -12i64..12), 5)) {
                let path = BoundaryPath::from_surgery(&hyperbolic_rows(), &random_meridians(&v)).unwrap();
                let back = Polynomial::linear(int(1), int(-1));
                let reversed = path.map_paths(|p| Ok(Piecewise::single(p.pieces()[0].compose(&back)))).unwrap();
                prop_assert_eq!(kirk_klassen_cs(&reversed).raw, -kirk_klassen_cs(&path).raw);
            }
        }
    }
}
