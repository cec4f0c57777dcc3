//! Signatures of symmetric and Hermitian forms, Casson–Gordon eigenspace forms and
//! fixed-point contributions to g-signatures.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{LinalgError, RatMatrix};
use crate::rational::{frac, int, to_f64, Rational};

/// Default eigenvalue tolerance for Hermitian signatures.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Largest imaginary part tolerated in a sum that must be real.
pub const IMAGINARY_TOL: f64 = 1e-9;
const HERMITIAN_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignatureError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("basis vector {index} has length {found}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("target class is not a boundary")]
    NoSolution,
    #[error("eigenvalue {value:e} lies in the borderline band ({tol:e}, {:e})", 10.0 * tol)]
    BorderlineEigenvalue { value: f64, tol: f64 },
    #[error("eigenspace index r = {r} outside 1..{m}")]
    RangeError { r: i64, m: i64 },
    #[error("result has imaginary part {0:e}")]
    NonRealResult(f64),
    #[error("fixed-point angle is a multiple of a full turn")]
    SingularAngle,
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(LinalgError),
}

impl From<LinalgError> for SignatureError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::NoSolution => SignatureError::NoSolution,
            other => SignatureError::Linalg(other),
        }
    }
}

/// Symmetric bilinear form with exact rational entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricForm(RatMatrix);

impl SymmetricForm {
    pub fn new(m: RatMatrix) -> Result<Self, SignatureError> {
        if m.rows() != m.cols() {
            return Err(SignatureError::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if !m.is_symmetric() {
            return Err(SignatureError::NotSymmetric);
        }
        Ok(SymmetricForm(m))
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self, SignatureError> {
        SymmetricForm::new(RatMatrix::from_integers(rows)?)
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    /// `(positive, negative, zero)` counts.
    pub fn inertia(&self) -> (usize, usize, usize) {
        self.0.inertia().expect("square by construction")
    }
}

pub fn signature(q: &SymmetricForm) -> i64 {
    let (p, n, _) = q.inertia();
    p as i64 - n as i64
}

/// Gram matrix `Bᵀ Q B` of `q` on the span of `basis`.
pub fn restrict_form(q: &SymmetricForm, basis: &[Vec<Rational>]) -> Result<SymmetricForm, SignatureError> {
    let n = q.dim();
    for (index, v) in basis.iter().enumerate() {
        if v.len() != n {
            return Err(SignatureError::DimensionMismatch {
                index,
                expected: n,
                found: v.len(),
            });
        }
    }
    let k = basis.len();
    let mut b = RatMatrix::zeros(n, k);
    for (c, v) in basis.iter().enumerate() {
        for (r, x) in v.iter().enumerate() {
            b[(r, c)] = x.clone();
        }
    }
    let gram = b.transpose().mul(q.matrix())?.mul(&b)?;
    SymmetricForm::new(gram)
}

/// Rational `x` with `xᵀ · boundary = target`: the 2-chain whose boundary is `target`.
pub fn solve_boundary_class(boundary: &[Vec<i64>], target: &[i64]) -> Result<Vec<Rational>, SignatureError> {
    if boundary.is_empty() {
        return if target.iter().all(|&t| t == 0) {
            Ok(Vec::new())
        } else {
            Err(SignatureError::NoSolution)
        };
    }
    let m = RatMatrix::from_integers(boundary)?;
    let target: Vec<Rational> = target.iter().map(|&t| int(t)).collect();
    Ok(m.solve_left(&target)?)
}

/// Conjugate-symmetric complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm(DMatrix<Complex64>);

impl HermitianForm {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self, SignatureError> {
        if m.nrows() != m.ncols() {
            return Err(SignatureError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let asym = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > HERMITIAN_SYMMETRY_TOL {
            return Err(SignatureError::NotHermitian(asym));
        }
        Ok(HermitianForm(m))
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self, SignatureError> {
        HermitianForm::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        if n == 0 {
            return Vec::new();
        }
        // [[Re, -Im], [Im, Re]] is real symmetric with each eigenvalue doubled
        let re = self.0.map(|z| z.re);
        let im = self.0.map(|z| z.im);
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&re);
        big.view_mut((n, n), (n, n)).copy_from(&re);
        big.view_mut((0, n), (n, n)).copy_from(&(-&im));
        big.view_mut((n, 0), (n, n)).copy_from(&im);
        let mut ev: Vec<f64> = big.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HermitianSignature {
    pub signature: i64,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

pub fn hermitian_signature(h: &HermitianForm, tol: f64) -> Result<HermitianSignature, SignatureError> {
    let ev = h.eigenvalues();
    if let Some(&value) = ev.iter().find(|l| l.abs() > tol && l.abs() < 10.0 * tol) {
        return Err(SignatureError::BorderlineEigenvalue { value, tol });
    }
    let positive = ev.iter().filter(|&&l| l > tol).count();
    let negative = ev.iter().filter(|&&l| l < -tol).count();
    Ok(HermitianSignature {
        signature: positive as i64 - negative as i64,
        positive,
        negative,
        zero: ev.len() - positive - negative,
    })
}

/// Square integer Seifert matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeifertMatrix(Vec<Vec<i64>>);

impl SeifertMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self, SignatureError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(SignatureError::NotSquare { rows: n, cols: bad.len() });
        }
        Ok(SeifertMatrix(rows))
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

fn root_of_unity(k: i64, m: i64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (k.rem_euclid(m)) as f64 / m as f64)
}

/// `(1 − ω̄)A + (1 − ω)Aᵀ` with `ω = exp(2πir/m)`.
pub fn cg_eigenspace_form(a: &SeifertMatrix, m: i64, r: i64) -> Result<HermitianForm, SignatureError> {
    if !(1..m).contains(&r) {
        return Err(SignatureError::RangeError { r, m });
    }
    let n = a.dim();
    let w = root_of_unity(r, m);
    let one = Complex64::new(1.0, 0.0);
    let (c1, c2) = (one - w.conj(), one - w);
    let mut q = DMatrix::from_fn(n, n, |i, j| c1 * a.0[i][j] as f64 + c2 * a.0[j][i] as f64);
    // symmetrize away rounding so the form is exactly Hermitian
    let adj = q.adjoint();
    q = (&q + adj) * Complex64::new(0.5, 0.0);
    HermitianForm::new(q)
}

/// `Sign(X/ℤ_m) + Σ_{r=1}^{m−1} exp(2πirs/m) · Sign(Q|E_r)`.
pub fn g_signature_from_seifert(a: &SeifertMatrix, m: i64, s: i64, sign_quotient: i64) -> Result<f64, SignatureError> {
    if !(1..m).contains(&s) {
        return Err(SignatureError::RangeError { r: s, m });
    }
    let mut total = Complex64::new(sign_quotient as f64, 0.0);
    for r in 1..m {
        let sig = hermitian_signature(&cg_eigenspace_form(a, m, r)?, HERMITIAN_TOL)?.signature;
        total += root_of_unity(r * s, m) * sig as f64;
    }
    real_part(total)
}

fn real_part(z: Complex64) -> Result<f64, SignatureError> {
    if z.im.abs() >= IMAGINARY_TOL {
        return Err(SignatureError::NonRealResult(z.im));
    }
    Ok(z.re)
}

/// Transfer: the signature on the nontrivial eigenspace is the cover's minus the quotient's.
pub fn eigenspace_signature_from_cover(sign_total: i64, sign_quotient: i64) -> i64 {
    sign_total - sign_quotient
}

/// `(1/m) Σ_n Sign(gⁿ) χ(gⁿ)`, with both slices indexed by the power `n ∈ [0, m)`.
pub fn average_signature(m: usize, sign_g: &[f64], character: &[Complex64]) -> Result<f64, SignatureError> {
    for len in [sign_g.len(), character.len()] {
        if len != m {
            return Err(SignatureError::LengthMismatch { expected: m, found: len });
        }
    }
    let sum: Complex64 = sign_g.iter().zip(character).map(|(&s, &c)| c * s).sum();
    real_part(sum / m as f64)
}

/// Fixed-point component of a rotation action; angles are fractions of a full turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FixedPointDatum {
    Isolated {
        #[serde(with = "crate::rational::serde_rational")]
        theta1: Rational,
        #[serde(with = "crate::rational::serde_rational")]
        theta2: Rational,
    },
    Surface {
        self_intersection: i64,
        #[serde(with = "crate::rational::serde_rational")]
        psi: Rational,
    },
}

/// `cot(π · turns)`, i.e. `cot(θ/2)` for `θ = 2π · turns`.
fn half_cot(turns: &Rational) -> Result<f64, SignatureError> {
    let f = frac(turns);
    if f.is_zero() {
        return Err(SignatureError::SingularAngle);
    }
    if f == Rational::new(1.into(), 2.into()) {
        return Ok(0.0);
    }
    let x = PI * to_f64(&f);
    Ok(x.cos() / x.sin())
}

fn half_csc_sq(turns: &Rational) -> Result<f64, SignatureError> {
    let f = frac(turns);
    if f.is_zero() {
        return Err(SignatureError::SingularAngle);
    }
    let s = (PI * to_f64(&f)).sin();
    Ok(1.0 / (s * s))
}

/// Local g-signature: `Σ F·F csc²(ψ/2) − Σ cot(θ₁/2) cot(θ₂/2)`.
pub fn local_g_signature(data: &[FixedPointDatum]) -> Result<f64, SignatureError> {
    data.iter().try_fold(0.0, |acc, d| {
        Ok(acc
            + match d {
                FixedPointDatum::Isolated { theta1, theta2 } => -half_cot(theta1)? * half_cot(theta2)?,
                FixedPointDatum::Surface { self_intersection, psi } => *self_intersection as f64 * half_csc_sq(psi)?,
            })
    })
}

pub fn signature_defect(l: f64, sign_g: f64) -> f64 {
    l - sign_g
}
