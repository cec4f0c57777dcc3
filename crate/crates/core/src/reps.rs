//! SU(2) representations of finitely presented groups and paths of them.

use std::f64::consts::PI;

use num::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::RatMatrix;
use crate::poly::Polynomial;
use crate::quat::{ad, product, Axis, ExactCircleElement, QuatError, Quaternion, UnitQuaternion};
use crate::rational::{int, to_f64, Rational};
use crate::words::{GeneratorId, GroupPresentation, GroupRingElement, Word};

/// Commutator deviation separating abelian from irreducible images.
pub const COMMUTATOR_TOL: f64 = 1e-8;
/// Relator deviation accepted from [`solve_conjugator`].
pub const SOLVE_TOL: f64 = 1e-10;
const SCAN_POINTS: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RepError {
    #[error("generator #{0} has no image")]
    UndefinedGenerator(usize),
    #[error("representation has {found} images but the presentation has {expected} generators")]
    ArityMismatch { expected: usize, found: usize },
    #[error("no conjugator solves relator {relator} at t = {t} (best deviation {best:e})")]
    NoSolution { relator: usize, t: f64, best: f64 },
    #[error("element refers to the solved conjugator but the path declares none")]
    MissingConjugatorSpec,
    #[error("relator index {0} out of range")]
    BadRelator(usize),
    #[error(transparent)]
    Quat(#[from] QuatError),
}

/// Closed-form description of a group element, possibly depending on `t`.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Quat(UnitQuaternion),
    /// `exp(2π · turns(t) · axis)`.
    Circle { axis: Axis, turns: Polynomial },
    /// `by · elem · by⁻¹`.
    Conjugate { elem: Box<Element>, by: Box<Element> },
    Product(Vec<Element>),
    Inverse(Box<Element>),
    /// The conjugator `g_t` solved along a path.
    Conjugator,
}

/// A value together with its Ad matrix when that is exactly rational.
#[derive(Debug, Clone)]
pub struct Evaluated {
    pub value: UnitQuaternion,
    pub exact_ad: Option<RatMatrix>,
}

impl Element {
    pub fn circle(axis: Axis, turns: Rational) -> Self {
        Element::Circle {
            axis,
            turns: Polynomial::constant(turns),
        }
    }

    pub fn conjugate(elem: Element, by: Element) -> Self {
        Element::Conjugate {
            elem: Box::new(elem),
            by: Box::new(by),
        }
    }

    pub fn uses_conjugator(&self) -> bool {
        match self {
            Element::Conjugator => true,
            Element::Quat(_) | Element::Circle { .. } => false,
            Element::Conjugate { elem, by } => elem.uses_conjugator() || by.uses_conjugator(),
            Element::Product(v) => v.iter().any(Element::uses_conjugator),
            Element::Inverse(e) => e.uses_conjugator(),
        }
    }

    /// First circle axis in the expression, used to pick a default conjugator axis.
    pub fn first_axis(&self) -> Option<Axis> {
        match self {
            Element::Circle { axis, .. } => Some(*axis),
            Element::Quat(_) | Element::Conjugator => None,
            Element::Conjugate { elem, by } => elem.first_axis().or_else(|| by.first_axis()),
            Element::Product(v) => v.iter().find_map(Element::first_axis),
            Element::Inverse(e) => e.first_axis(),
        }
    }

    pub fn evaluate(&self, t: &Rational, g: Option<&UnitQuaternion>) -> Result<Evaluated, RepError> {
        Ok(match self {
            Element::Quat(q) => Evaluated {
                value: *q,
                exact_ad: integral_ad(q),
            },
            Element::Circle { axis, turns } => {
                let e = ExactCircleElement::new(*axis, turns.eval(t));
                Evaluated {
                    value: e.to_unit(),
                    exact_ad: e.exact_ad(),
                }
            }
            Element::Conjugate { elem, by } => {
                let e = elem.evaluate(t, g)?;
                let b = by.evaluate(t, g)?;
                let exact_ad = match (&e.exact_ad, &b.exact_ad) {
                    (Some(me), Some(mb)) => Some(mb.mul(me).and_then(|m| m.mul(&mb.transpose())).expect("3x3")),
                    _ => None,
                };
                Evaluated {
                    value: e.value.conjugate_by(&b.value),
                    exact_ad,
                }
            }
            Element::Product(items) => {
                let parts = items
                    .iter()
                    .map(|e| e.evaluate(t, g))
                    .collect::<Result<Vec<_>, _>>()?;
                let exact_ad = parts.iter().try_fold(RatMatrix::identity(3), |acc, p| {
                    p.exact_ad.as_ref().map(|m| acc.mul(m).expect("3x3"))
                });
                Evaluated {
                    value: product(parts.iter().map(|p| p.value)),
                    exact_ad,
                }
            }
            Element::Inverse(e) => {
                let e = e.evaluate(t, g)?;
                Evaluated {
                    value: e.value.inverse(),
                    exact_ad: e.exact_ad.map(|m| m.transpose()),
                }
            }
            Element::Conjugator => {
                let g = g.copied().ok_or(RepError::MissingConjugatorSpec)?;
                Evaluated {
                    value: g,
                    exact_ad: (g == UnitQuaternion::IDENTITY).then(|| RatMatrix::identity(3)),
                }
            }
        })
    }
}

/// Ad(q) as an exact integer matrix when it is one (e.g. q ∈ {±1, ±i, ±j, ±k}).
fn integral_ad(q: &UnitQuaternion) -> Option<RatMatrix> {
    let m = ad(q);
    let mut out = RatMatrix::zeros(3, 3);
    for r in 0..3 {
        for c in 0..3 {
            let v = m[(r, c)];
            if (v - v.round()).abs() > 1e-14 {
                return None;
            }
            out[(r, c)] = int(v.round() as i64);
        }
    }
    Some(out)
}

/// Images of the generators, in presentation order.
#[derive(Debug, Clone)]
pub struct Representation {
    images: Vec<UnitQuaternion>,
    exact_ad: Vec<Option<RatMatrix>>,
}

impl Representation {
    pub fn new(images: Vec<UnitQuaternion>) -> Self {
        let exact_ad = images.iter().map(integral_ad).collect();
        Representation { images, exact_ad }
    }

    pub fn from_evaluated(values: Vec<Evaluated>) -> Self {
        let (images, exact_ad) = values.into_iter().map(|e| (e.value, e.exact_ad)).unzip();
        Representation { images, exact_ad }
    }

    /// Evaluates constant element expressions (no `t`, no conjugator).
    pub fn from_elements(elements: &[Element]) -> Result<Self, RepError> {
        let evaluated = elements
            .iter()
            .map(|e| e.evaluate(&Rational::zero(), None))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Representation::from_evaluated(evaluated))
    }

    pub fn trivial(generators: usize) -> Self {
        Representation::new(vec![UnitQuaternion::IDENTITY; generators])
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[UnitQuaternion] {
        &self.images
    }

    pub fn image(&self, g: GeneratorId) -> Result<UnitQuaternion, RepError> {
        self.images.get(g.0).copied().ok_or(RepError::UndefinedGenerator(g.0))
    }

    /// Exact Ad matrices of every image, if all of them are rational.
    pub fn exact_ad(&self) -> Option<Vec<RatMatrix>> {
        self.exact_ad.iter().cloned().collect()
    }

    pub fn exact_ad_of(&self, g: GeneratorId) -> Option<&RatMatrix> {
        self.exact_ad.get(g.0).and_then(Option::as_ref)
    }

    /// The images of the listed generators, in that order.
    pub fn restrict(&self, generators: &[usize]) -> Result<Representation, RepError> {
        let pick = |&g: &usize| {
            let image = *self.images.get(g).ok_or(RepError::UndefinedGenerator(g))?;
            Ok((image, self.exact_ad[g].clone()))
        };
        let (images, exact_ad) = generators.iter().map(pick).collect::<Result<Vec<_>, RepError>>()?.into_iter().unzip();
        Ok(Representation { images, exact_ad })
    }

    /// `q · ρ · q⁻¹`. Exactness is dropped unless `Ad(q)` is itself rational.
    pub fn conjugated(&self, q: &UnitQuaternion) -> Representation {
        let images: Vec<UnitQuaternion> = self.images.iter().map(|p| p.conjugate_by(q)).collect();
        let exact_ad = match integral_ad(q) {
            Some(mq) => self
                .exact_ad
                .iter()
                .map(|m| m.as_ref().map(|m| mq.mul(m).and_then(|x| x.mul(&mq.transpose())).expect("3x3")))
                .collect(),
            None => vec![None; images.len()],
        };
        Representation { images, exact_ad }
    }
}

pub fn evaluate_word(rep: &Representation, w: &Word) -> Result<UnitQuaternion, RepError> {
    let letters = w
        .letters()
        .iter()
        .map(|l| {
            let q = rep.image(l.generator)?;
            Ok(if l.inverse { q.inverse() } else { q })
        })
        .collect::<Result<Vec<_>, RepError>>()?;
    Ok(product(letters))
}

/// Image of a group-ring element in the quaternion algebra.
pub fn evaluate_ring(rep: &Representation, e: &GroupRingElement) -> Result<Quaternion, RepError> {
    e.terms().try_fold(Quaternion::new(0.0, 0.0, 0.0, 0.0), |acc, (w, c)| {
        Ok(acc + evaluate_word(rep, w)?.quaternion().scale(c as f64))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tol: f64,
    pub passed: bool,
}

impl ValidationReport {
    pub fn failures(&self) -> Vec<usize> {
        self.deviations
            .iter()
            .enumerate()
            .filter(|(_, &d)| d.is_nan() || d >= self.tol)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Per-relator distance `‖ρ(r) − 1‖`; relators naming a missing generator score `∞`.
pub fn validate(pres: &GroupPresentation, rep: &Representation, tol: f64) -> ValidationReport {
    let deviations: Vec<f64> = pres
        .relators()
        .iter()
        .map(|r| match evaluate_word(rep, r) {
            Ok(q) => q.quaternion().dist(&Quaternion::ONE),
            Err(_) => f64::INFINITY,
        })
        .collect();
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    ValidationReport {
        passed: max_deviation < tol,
        deviations,
        max_deviation,
        tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepClass {
    Central,
    AbelianNoncentral,
    Irreducible,
}

impl RepClass {
    /// Dimension of the Ad-invariants of the image.
    pub fn h0(self) -> usize {
        match self {
            RepClass::Central => 3,
            RepClass::AbelianNoncentral => 1,
            RepClass::Irreducible => 0,
        }
    }
}

/// Central iff every image is `±1`; abelian iff all generator images pairwise commute within `tol`.
pub fn classify(rep: &Representation, tol: f64) -> RepClass {
    let imgs = rep.images();
    if imgs.iter().all(|q| q.is_central(tol)) {
        return RepClass::Central;
    }
    let commute = imgs.iter().enumerate().all(|(i, p)| {
        imgs[i + 1..].iter().all(|q| {
            let c = *p * *q * p.inverse() * q.inverse();
            c.quaternion().dist(&Quaternion::ONE) < tol
        })
    });
    if commute {
        RepClass::AbelianNoncentral
    } else {
        RepClass::Irreducible
    }
}

/// Which relator pins the conjugator, and the search axis `u` of `g(s) = exp(2πs·u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatorSpec {
    pub axis: Option<Axis>,
    pub relator: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationPath {
    elements: Vec<Element>,
    conjugator: Option<ConjugatorSpec>,
}

impl RepresentationPath {
    pub fn new(elements: Vec<Element>, conjugator: Option<ConjugatorSpec>) -> Result<Self, RepError> {
        if conjugator.is_none() && elements.iter().any(Element::uses_conjugator) {
            return Err(RepError::MissingConjugatorSpec);
        }
        Ok(RepresentationPath { elements, conjugator })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn conjugator(&self) -> Option<&ConjugatorSpec> {
        self.conjugator.as_ref()
    }

    /// Axis searched by the conjugator solver: explicit, else perpendicular to the first circle axis.
    pub fn search_axis(&self) -> Axis {
        self.conjugator
            .as_ref()
            .and_then(|c| c.axis)
            .or_else(|| self.elements.iter().find_map(Element::first_axis).map(|a| a.perpendicular()))
            .unwrap_or(Axis::J)
    }

    pub fn images_with(&self, t: &Rational, g: Option<&UnitQuaternion>) -> Result<Vec<Evaluated>, RepError> {
        self.elements.iter().map(|e| e.evaluate(t, g)).collect()
    }

    /// The representation at time `t`, solving for the conjugator when one is declared.
    pub fn at(&self, pres: &GroupPresentation, t: &Rational) -> Result<Representation, RepError> {
        if self.elements.len() != pres.generator_count() {
            return Err(RepError::ArityMismatch {
                expected: pres.generator_count(),
                found: self.elements.len(),
            });
        }
        let g = match self.conjugator {
            Some(_) => Some(solve_conjugator(pres, self, t)?),
            None => None,
        };
        Ok(Representation::from_evaluated(self.images_with(t, g.as_ref())?))
    }
}

/// Finds `g = exp(2πs·u)`, `s ∈ [0, 1/2]`, making the designated relator evaluate to 1.
///
/// Scans `‖r(s) − 1‖` on a grid, then refines each local minimum in order of increasing `s`,
/// first by bisection on the projection of `r(s) − 1` onto the chord across the bracket and
/// then by golden-section search. Returns the smallest accepted root, so `g = 1` whenever the
/// relator already holds.
pub fn solve_conjugator(
    pres: &GroupPresentation,
    path: &RepresentationPath,
    t: &Rational,
) -> Result<UnitQuaternion, RepError> {
    let spec = path.conjugator.as_ref().ok_or(RepError::MissingConjugatorSpec)?;
    let relator = pres.relators().get(spec.relator).ok_or(RepError::BadRelator(spec.relator))?;
    let u = path.search_axis().vector();
    let g_at = |s: f64| UnitQuaternion::exp(u, 2.0 * PI * s);
    let compiled = path
        .elements
        .iter()
        .map(|e| Frozen::freeze(e, t))
        .collect::<Vec<_>>();
    let residual = |s: f64| -> Result<[f64; 4], RepError> {
        let g = g_at(s);
        let imgs: Vec<UnitQuaternion> = compiled.iter().map(|c| c.eval(&g)).collect();
        let q = evaluate_word(&Representation::new_unchecked(imgs), relator)?.quaternion();
        Ok([q.w - 1.0, q.x, q.y, q.z])
    };
    let norm = |d: &[f64; 4]| d.iter().map(|x| x * x).sum::<f64>().sqrt();

    let d0 = residual(0.0)?;
    if norm(&d0) < SOLVE_TOL {
        return Ok(UnitQuaternion::IDENTITY);
    }
    let step = 0.5 / SCAN_POINTS as f64;
    let grid: Vec<f64> = (0..=SCAN_POINTS)
        .map(|k| residual(k as f64 * step).map(|d| norm(&d)))
        .collect::<Result<_, _>>()?;
    let mut best = f64::INFINITY;
    for k in 0..=SCAN_POINTS {
        let left = if k == 0 { f64::INFINITY } else { grid[k - 1] };
        let right = if k == SCAN_POINTS { f64::INFINITY } else { grid[k + 1] };
        if !(grid[k] <= left && grid[k] <= right) {
            continue;
        }
        let a = (k.saturating_sub(1)) as f64 * step;
        let b = ((k + 1).min(SCAN_POINTS)) as f64 * step;
        let (s, dev) = refine(&residual, &norm, a, b)?;
        best = best.min(dev);
        if dev < SOLVE_TOL {
            return Ok(g_at(s));
        }
    }
    Err(RepError::NoSolution {
        relator: spec.relator,
        t: to_f64(t),
        best,
    })
}

fn refine<F, N>(residual: &F, norm: &N, a: f64, b: f64) -> Result<(f64, f64), RepError>
where
    F: Fn(f64) -> Result<[f64; 4], RepError>,
    N: Fn(&[f64; 4]) -> f64,
{
    let (da, db) = (residual(a)?, residual(b)?);
    let chord: Vec<f64> = (0..4).map(|i| db[i] - da[i]).collect();
    let phi = |d: &[f64; 4]| d.iter().zip(&chord).map(|(x, c)| x * c).sum::<f64>();
    let mut candidates = Vec::new();

    let (mut lo, mut hi) = (a, b);
    let (mut plo, phi_hi) = (phi(&da), phi(&db));
    if plo * phi_hi < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let pm = phi(&residual(mid)?);
            if (pm < 0.0) == (plo < 0.0) {
                lo = mid;
                plo = pm;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-17 {
                break;
            }
        }
        let s = 0.5 * (lo + hi);
        candidates.push((s, norm(&residual(s)?)));
    }

    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (norm(&residual(x1)?), norm(&residual(x2)?));
    for _ in 0..200 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = norm(&residual(x1)?);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = norm(&residual(x2)?);
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    candidates.push(if f1 < f2 { (x1, f1) } else { (x2, f2) });
    candidates.push((a, norm(&da)));
    candidates.push((b, norm(&db)));
    Ok(candidates
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)))
        .expect("nonempty"))
}

/// An element with `t` substituted, leaving only the conjugator free.
enum Frozen {
    Fixed(UnitQuaternion),
    Conjugate(Box<Frozen>, Box<Frozen>),
    Product(Vec<Frozen>),
    Inverse(Box<Frozen>),
    Conjugator,
}

impl Frozen {
    fn freeze(e: &Element, t: &Rational) -> Frozen {
        match e {
            Element::Quat(q) => Frozen::Fixed(*q),
            Element::Circle { axis, turns } => Frozen::Fixed(ExactCircleElement::new(*axis, turns.eval(t)).to_unit()),
            Element::Conjugate { elem, by } => Frozen::Conjugate(Box::new(Frozen::freeze(elem, t)), Box::new(Frozen::freeze(by, t))),
            Element::Product(v) => Frozen::Product(v.iter().map(|x| Frozen::freeze(x, t)).collect()),
            Element::Inverse(x) => Frozen::Inverse(Box::new(Frozen::freeze(x, t))),
            Element::Conjugator => Frozen::Conjugator,
        }
    }

    fn eval(&self, g: &UnitQuaternion) -> UnitQuaternion {
        match self {
            Frozen::Fixed(q) => *q,
            Frozen::Conjugate(e, by) => e.eval(g).conjugate_by(&by.eval(g)),
            Frozen::Product(v) => product(v.iter().map(|x| x.eval(g))),
            Frozen::Inverse(x) => x.eval(g).inverse(),
            Frozen::Conjugator => *g,
        }
    }
}

impl Representation {
    fn new_unchecked(images: Vec<UnitQuaternion>) -> Self {
        let n = images.len();
        Representation {
            images,
            exact_ad: vec![None; n],
        }
    }
}

/// Uniform samples `0, 1/n, …, 1`.
pub fn uniform_samples(n: usize) -> Vec<Rational> {
    (0..=n).map(|k| Rational::new(k.into(), n.into())).collect()
}

/// Largest relator deviation of a path over the given samples.
pub fn path_max_deviation(
    pres: &GroupPresentation,
    path: &RepresentationPath,
    samples: &[Rational],
) -> Result<f64, RepError> {
    samples.iter().try_fold(0.0f64, |acc, t| {
        let rep = path.at(pres, t)?;
        Ok(acc.max(validate(pres, &rep, 1.0).max_deviation))
    })
}
