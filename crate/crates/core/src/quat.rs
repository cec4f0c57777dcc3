//! Quaternions, SU(2) as the unit quaternions, exact circle elements and the adjoint action.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use num::{ToPrimitive, Zero};
use thiserror::Error;

use crate::linalg::RatMatrix;
use crate::rational::{frac, int, to_f64, Rational};

/// Construction tolerance on `|q|^2 - 1`.
pub const UNIT_TOL: f64 = 1e-12;
/// Chained products are renormalized after this many multiplications.
pub const RENORMALIZE_EVERY: usize = 32;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuatError {
    #[error("quaternion has squared norm {0}, not 1")]
    NotUnit(f64),
    #[error("axis {0:?} is not a unit imaginary quaternion")]
    BadAxis([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub fn imaginary(v: Vector3<f64>) -> Self {
        Quaternion::new(0.0, v.x, v.y, v.z)
    }

    pub fn vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn conj(&self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn inverse(&self) -> Self {
        self.conj().scale(1.0 / self.norm_sqr())
    }

    /// Distance `|self - other|` in R^4.
    pub fn dist(&self, other: &Quaternion) -> f64 {
        (*self - *other).norm()
    }
}

/// Hamilton product.
pub fn quat_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    Quaternion::new(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: Quaternion) -> Quaternion {
        quat_mul(self, rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w + r.w, self.x + r.x, self.y + r.y, self.z + r.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, r: Quaternion) -> Quaternion {
        Quaternion::new(self.w - r.w, self.x - r.x, self.y - r.y, self.z - r.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        self.scale(-1.0)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+.12} {:+.12}i {:+.12}j {:+.12}k", self.w, self.x, self.y, self.z)
    }
}

/// An element of SU(2) = Sp(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion(Quaternion);

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion(Quaternion::ONE);

    pub fn new(q: Quaternion) -> Result<Self, QuatError> {
        let n = q.norm_sqr();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(QuatError::NotUnit(n));
        }
        Ok(UnitQuaternion(q))
    }

    /// Rescales `q` onto the sphere; fails if `|q|^2` is more than `tol` away from 1.
    pub fn normalized(q: Quaternion, tol: f64) -> Result<Self, QuatError> {
        let n = q.norm_sqr();
        if (n - 1.0).abs() > tol {
            return Err(QuatError::NotUnit(n));
        }
        Ok(UnitQuaternion(q.scale(1.0 / n.sqrt())))
    }

    /// `exp(angle * axis)` for a unit imaginary axis.
    pub fn exp(axis: Vector3<f64>, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        UnitQuaternion(Quaternion::new(c, s * axis.x, s * axis.y, s * axis.z))
    }

    pub fn quaternion(&self) -> Quaternion {
        self.0
    }

    pub fn inverse(&self) -> Self {
        UnitQuaternion(self.0.conj())
    }

    pub fn conjugate_by(&self, g: &UnitQuaternion) -> Self {
        *g * *self * g.inverse()
    }

    pub fn renormalize(&self) -> Self {
        UnitQuaternion(self.0.scale(1.0 / self.0.norm()))
    }

    /// `true` for `±1` within `tol`.
    pub fn is_central(&self, tol: f64) -> bool {
        self.0.vector().norm() < tol
    }

    /// Rotation `v ↦ q v q⁻¹` of an imaginary vector.
    pub fn rotate(&self, v: Vector3<f64>) -> Vector3<f64> {
        (self.0 * Quaternion::imaginary(v) * self.0.conj()).vector()
    }
}

impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    fn mul(self, rhs: UnitQuaternion) -> UnitQuaternion {
        UnitQuaternion(self.0 * rhs.0)
    }
}

impl Neg for UnitQuaternion {
    type Output = UnitQuaternion;
    fn neg(self) -> UnitQuaternion {
        UnitQuaternion(-self.0)
    }
}

/// Product of a sequence of unit quaternions, renormalizing periodically.
pub fn product<I: IntoIterator<Item = UnitQuaternion>>(items: I) -> UnitQuaternion {
    let mut acc = UnitQuaternion::IDENTITY;
    for (n, q) in items.into_iter().enumerate() {
        acc = acc * q;
        if (n + 1) % RENORMALIZE_EVERY == 0 {
            acc = acc.renormalize();
        }
    }
    acc
}

/// Rotation axis of a circle subgroup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    I,
    J,
    K,
    Unit([f64; 3]),
}

impl Axis {
    pub fn unit(v: [f64; 3]) -> Result<Axis, QuatError> {
        let n = v.iter().map(|c| c * c).sum::<f64>();
        if (n - 1.0).abs() > 1e-9 {
            return Err(QuatError::BadAxis(v));
        }
        let s = 1.0 / n.sqrt();
        Ok(Axis::Unit([v[0] * s, v[1] * s, v[2] * s]))
    }

    pub fn vector(&self) -> Vector3<f64> {
        match self {
            Axis::I => Vector3::x(),
            Axis::J => Vector3::y(),
            Axis::K => Vector3::z(),
            Axis::Unit(v) => Vector3::new(v[0], v[1], v[2]),
        }
    }

    pub fn basis_index(&self) -> Option<usize> {
        match self {
            Axis::I => Some(0),
            Axis::J => Some(1),
            Axis::K => Some(2),
            Axis::Unit(_) => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Axis::I => "i".into(),
            Axis::J => "j".into(),
            Axis::K => "k".into(),
            Axis::Unit(v) => format!("({}, {}, {})", v[0], v[1], v[2]),
        }
    }

    /// A unit vector orthogonal to this axis.
    pub fn perpendicular(&self) -> Axis {
        match self {
            Axis::I => Axis::J,
            Axis::J => Axis::K,
            Axis::K => Axis::I,
            Axis::Unit(_) => {
                let v = self.vector();
                let seed = if v.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
                let p = v.cross(&seed).normalize();
                Axis::Unit([p.x, p.y, p.z])
            }
        }
    }
}

/// `exp(2π · turns · axis)`, with the angle kept as an exact fraction of a full turn.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCircleElement {
    pub axis: Axis,
    pub turns: Rational,
}

impl ExactCircleElement {
    pub fn new(axis: Axis, turns: Rational) -> Self {
        ExactCircleElement { axis, turns }
    }

    /// Turns reduced into `[0, 1)`.
    pub fn reduced_turns(&self) -> Rational {
        frac(&self.turns)
    }

    pub fn to_unit(&self) -> UnitQuaternion {
        UnitQuaternion::exp(self.axis.vector(), 2.0 * PI * turns_angle(&self.turns))
    }

    /// Same-axis composition adds turns exactly.
    pub fn compose(&self, other: &ExactCircleElement) -> Option<ExactCircleElement> {
        (self.axis == other.axis).then(|| ExactCircleElement {
            axis: self.axis,
            turns: &self.turns + &other.turns,
        })
    }

    pub fn pow(&self, n: i64) -> ExactCircleElement {
        ExactCircleElement {
            axis: self.axis,
            turns: &self.turns * int(n),
        }
    }

    pub fn inverse(&self) -> ExactCircleElement {
        self.pow(-1)
    }

    /// Ad of this element when all its entries are rational: the axis is i, j or k and the
    /// rotation angle `4π·turns` is a multiple of π/2.
    pub fn exact_ad(&self) -> Option<RatMatrix> {
        let axis = self.axis.basis_index()?;
        let eighths = &self.turns * int(8);
        if !eighths.is_integer() {
            return None;
        }
        let quarter = eighths.to_integer().to_i64()?.rem_euclid(4);
        let (c, s) = [(1, 0), (0, 1), (-1, 0), (0, -1)][quarter as usize];
        let mut m = RatMatrix::zeros(3, 3);
        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
        m[(axis, axis)] = int(1);
        m[(a, a)] = int(c);
        m[(b, b)] = int(c);
        m[(b, a)] = int(s);
        m[(a, b)] = int(-s);
        Some(m)
    }
}

/// Reduces a turn count mod 1 before conversion, so large rationals convert accurately.
fn turns_angle(turns: &Rational) -> f64 {
    let f = frac(turns);
    if f.is_zero() {
        0.0
    } else {
        to_f64(&f)
    }
}

/// 3×3 orthogonal matrix of the adjoint action on su(2) = span{i, j, k}.
pub type AdMatrix = Matrix3<f64>;

/// `Ad(q) v = q v q⁻¹`, as a matrix in the basis (i, j, k).
pub fn ad(q: &UnitQuaternion) -> AdMatrix {
    let Quaternion { w, x, y, z } = q.quaternion();
    Matrix3::new(
        w * w + x * x - y * y - z * z,
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        w * w - x * x + y * y - z * z,
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        w * w - x * x - y * y + z * z,
    )
}

/// Checked form of [`ad`] for raw quaternions.
pub fn ad_checked(q: Quaternion) -> Result<AdMatrix, QuatError> {
    UnitQuaternion::new(q).map(|u| ad(&u))
}

/// `Tr Ad(q) − 3`, which is `2(cos 2θ − 1)` for `q = e^{iθ}` and lies in `[−4, 0]`.
pub fn trace_ad_minus_3(q: &UnitQuaternion) -> f64 {
    // Tr Ad(q) = 4w² − 1, so the difference is 4(w² − 1) = −4|v|²
    -4.0 * q.quaternion().vector().norm_squared()
}

/// `Tr Ad − 3` for an exact circle element, evaluated from its rational angle.
pub fn trace_ad_minus_3_exact(e: &ExactCircleElement) -> f64 {
    // 2(cos 4πa − 1) = −4 sin²(2πa)
    let theta = 2.0 * PI * turns_angle(&e.turns);
    -4.0 * theta.sin().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn close(a: Quaternion, b: Quaternion) -> bool {
        a.dist(&b) < 1e-12
    }

    #[test]
    fn hamilton_rules() {
        assert!(close(Quaternion::I * Quaternion::J, Quaternion::K));
        assert!(close(Quaternion::J * Quaternion::K, Quaternion::I));
        assert!(close(Quaternion::K * Quaternion::I, Quaternion::J));
        assert!(close(Quaternion::I * Quaternion::I, -Quaternion::ONE));
        assert!(close(Quaternion::I.inverse() * Quaternion::J * Quaternion::I, -Quaternion::J));
    }

    #[test]
    fn sixth_turn_cubed() {
        let q = ExactCircleElement::new(Axis::I, ratio(1, 6)).to_unit();
        assert!(close((q * q * q).quaternion(), -Quaternion::ONE));
    }

    #[test]
    fn unit_check() {
        assert!(UnitQuaternion::new(Quaternion::new(1.0, 1.0, 0.0, 0.0)).is_err());
        assert!(ad_checked(Quaternion::new(0.5, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn ad_identity_and_rotation() {
        assert!((ad(&UnitQuaternion::IDENTITY) - Matrix3::identity()).norm() < 1e-15);
        let theta = 0.37;
        let m = ad(&UnitQuaternion::exp(Vector3::x(), theta));
        assert!((m * Vector3::x() - Vector3::x()).norm() < 1e-14);
        let expected = Vector3::new(0.0, (2.0 * theta).cos(), (2.0 * theta).sin());
        assert!((m * Vector3::y() - expected).norm() < 1e-14);
    }

    #[test]
    fn ad_matches_conjugation_and_closed_form() {
        let q = ExactCircleElement::new(Axis::I, ratio(1, 5)).to_unit();
        let m = ad(&q);
        for v in [Vector3::x(), Vector3::y(), Vector3::z()] {
            assert!((m * v - q.rotate(v)).norm() < 1e-14);
        }
        let closed = 2.0 * ((4.0 * PI / 5.0).cos() - 1.0);
        assert!((m.trace() - 3.0 - closed).abs() < 1e-12);
        assert!((closed + 3.618034).abs() < 1e-6);
        assert!((trace_ad_minus_3(&q) - closed).abs() < 1e-12);
    }

    #[test]
    fn trace_values() {
        assert_eq!(trace_ad_minus_3(&-UnitQuaternion::IDENTITY), 0.0);
        let third = ExactCircleElement::new(Axis::I, ratio(1, 3));
        assert!((trace_ad_minus_3(&third.to_unit()) + 3.0).abs() < 1e-12);
        assert!((trace_ad_minus_3_exact(&third) + 3.0).abs() < 1e-12);
        let i = UnitQuaternion::new(Quaternion::I).unwrap();
        assert!((trace_ad_minus_3(&i) + 4.0).abs() < 1e-15);
    }

    #[test]
    fn exact_composition() {
        let a = ExactCircleElement::new(Axis::I, ratio(1, 3));
        let b = ExactCircleElement::new(Axis::I, ratio(1, 5));
        assert_eq!(a.compose(&b).unwrap().turns, ratio(8, 15));
        assert!(a.compose(&ExactCircleElement::new(Axis::J, ratio(1, 5))).is_none());
        // thousands of compositions stay exact
        let step = ExactCircleElement::new(Axis::K, ratio(1, 7));
        let mut acc = ExactCircleElement::new(Axis::K, int(0));
        for _ in 0..7000 {
            acc = acc.compose(&step).unwrap();
        }
        assert_eq!(acc.turns, int(1000));
        assert!(acc.to_unit().quaternion().dist(&Quaternion::ONE) < 1e-14);
    }

    #[test]
    fn exact_ad_agrees_with_float() {
        for axis in [Axis::I, Axis::J, Axis::K] {
            for e in -8..=8 {
                let c = ExactCircleElement::new(axis, ratio(e, 8));
                let exact = c.exact_ad().unwrap().to_f64();
                let float = ad(&c.to_unit());
                for i in 0..3 {
                    for j in 0..3 {
                        assert!((exact[(i, j)] - float[(i, j)]).abs() < 1e-14);
                    }
                }
            }
        }
        assert!(ExactCircleElement::new(Axis::I, ratio(1, 3)).exact_ad().is_none());
    }

    fn random_unit(rng: &mut impl Rng) -> UnitQuaternion {
        loop {
            let q = Quaternion::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let n = q.norm();
            if n > 0.1 {
                return UnitQuaternion::new(q.scale(1.0 / n)).unwrap();
            }
        }
    }

    #[test]
    fn ad_is_a_homomorphism_on_random_pairs() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..1000 {
            let (p, q) = (random_unit(&mut rng), random_unit(&mut rng));
            let diff = ad(&(p * q)) - ad(&p) * ad(&q);
            assert!(diff.amax() < 1e-9);
            assert!((ad(&p) - ad(&-p)).amax() < 1e-15);
            let m = ad(&p);
            assert!((m.transpose() * m - Matrix3::identity()).amax() < 1e-10);
            assert!((m.determinant() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn long_products_stay_unit() {
        let q = UnitQuaternion::exp(Vector3::new(0.6, 0.0, 0.8), 0.123456789);
        let p = product(std::iter::repeat_n(q, 10_000));
        assert!((p.quaternion().norm_sqr() - 1.0).abs() < 1e-13);
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(a in proptest::array::uniform4(-3.0f64..3.0), b in proptest::array::uniform4(-3.0f64..3.0)) {
            let (a, b) = (Quaternion::new(a[0], a[1], a[2], a[3]), Quaternion::new(b[0], b[1], b[2], b[3]));
            let lhs = (a * b).norm();
            prop_assert!((lhs - a.norm() * b.norm()).abs() < 1e-9 * (1.0 + lhs));
            let conj = (a * b).conj() - b.conj() * a.conj();
            prop_assert!(conj.norm() < 1e-9 * (1.0 + lhs));
        }

        #[test]
        fn trace_in_range(w in -1.0f64..1.0, theta in 0.0f64..6.3, phi in 0.0f64..3.2) {
            let axis = Vector3::new(phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos());
            let q = UnitQuaternion::exp(axis, w * PI);
            let t = trace_ad_minus_3(&q);
            prop_assert!((-4.0 - 1e-12..=1e-12).contains(&t));
            prop_assert!((t - (ad(&q).trace() - 3.0)).abs() < 1e-12);
        }
    }
}
