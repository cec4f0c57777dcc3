//! Twisted group cohomology in degrees 0 and 1 via Fox calculus.
//!
//! A 1-cocycle is determined by its values on generators; the relators impose the linear
//! system whose `(r, g)` block is the coefficient system applied to `∂r/∂g`.

use nalgebra::{DMatrix, Matrix3};
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{float_rank, null_space, LinalgError, RatMatrix};
use crate::quat::{ad, Axis};
use crate::rational::{format_rational, int, Rational};
use crate::reps::{classify, validate, RepClass, RepError, Representation, RepresentationPath, COMMUTATOR_TOL};
use crate::words::{fox_derivative, GeneratorId, GroupPresentation, GroupRingElement, Word};

/// Relator tolerance required before cohomology is computed.
pub const VALIDITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CohomologyError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error("exact rank {exact} disagrees with floating rank {float}")]
    RankMismatch { exact: usize, float: usize },
    #[error("not a representation of the presentation: max relator deviation {0:e}")]
    NotARepresentation(f64),
    #[error("invalid inclusion: {0}")]
    InvalidInclusion(String),
    #[error("dim Z1 = {z1} is too small for dim H0 = {h0}")]
    Inconsistent { z1: usize, h0: usize },
}

/// Coefficient module for the cochains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalSystem {
    /// `su(2)` with `Ad ∘ ρ`.
    Adjoint,
    /// `ℝ` with trivial action.
    Trivial,
    /// The plane orthogonal to `axis` inside `su(2)`, for representations into that circle.
    Weight2 { axis: Axis },
}

impl LocalSystem {
    pub fn dim(&self) -> usize {
        match self {
            LocalSystem::Adjoint => 3,
            LocalSystem::Trivial => 1,
            LocalSystem::Weight2 { .. } => 2,
        }
    }

    /// Orthonormal frame of the coefficient subspace of su(2), as columns.
    fn frame(&self) -> Option<DMatrix<f64>> {
        match self {
            LocalSystem::Adjoint => Some(DMatrix::identity(3, 3)),
            LocalSystem::Trivial => None,
            LocalSystem::Weight2 { axis } => {
                let u = axis.vector();
                let a = axis.perpendicular().vector();
                let b = u.cross(&a);
                Some(DMatrix::from_fn(3, 2, |r, c| if c == 0 { a[r] } else { b[r] }))
            }
        }
    }

    fn exact_indices(&self) -> Option<Vec<usize>> {
        match self {
            LocalSystem::Adjoint => Some(vec![0, 1, 2]),
            LocalSystem::Trivial => None,
            LocalSystem::Weight2 { axis } => {
                let k = axis.basis_index()?;
                Some(vec![(k + 1) % 3, (k + 2) % 3])
            }
        }
    }
}

/// Float action matrix of a word on the coefficient space.
fn act(rep: &Representation, w: &Word, system: &LocalSystem) -> Result<DMatrix<f64>, RepError> {
    match system.frame() {
        None => Ok(DMatrix::identity(1, 1)),
        Some(p) => {
            let q = crate::reps::evaluate_word(rep, w)?;
            let m: Matrix3<f64> = ad(&q);
            let full = DMatrix::from_fn(3, 3, |r, c| m[(r, c)]);
            Ok(p.transpose() * full * p)
        }
    }
}

fn act_exact(exact: &[RatMatrix], w: &Word, system: &LocalSystem) -> Option<RatMatrix> {
    let Some(idx) = system.exact_indices() else {
        return Some(RatMatrix::identity(1));
    };
    let mut m = RatMatrix::identity(3);
    for l in w.letters() {
        let a = exact.get(l.generator.0)?;
        let a = if l.inverse { a.transpose() } else { a.clone() };
        m = m.mul(&a).ok()?;
    }
    let mut out = RatMatrix::zeros(idx.len(), idx.len());
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            out[(r, c)] = m[(i, j)].clone();
        }
    }
    Some(out)
}

fn ring_block(rep: &Representation, e: &GroupRingElement, system: &LocalSystem) -> Result<DMatrix<f64>, RepError> {
    let d = system.dim();
    e.terms().try_fold(DMatrix::zeros(d, d), |acc, (w, c)| Ok(acc + act(rep, w, system)? * c as f64))
}

fn ring_block_exact(exact: &[RatMatrix], e: &GroupRingElement, system: &LocalSystem) -> Option<RatMatrix> {
    let d = system.dim();
    let mut acc = RatMatrix::zeros(d, d);
    for (w, c) in e.terms() {
        let m = act_exact(exact, w, system)?;
        for r in 0..d {
            for k in 0..d {
                acc[(r, k)] += &m[(r, k)] * int(c);
            }
        }
    }
    Some(acc)
}

/// Linear conditions on cocycle values: kernel = Z¹.
#[derive(Debug, Clone)]
pub struct CocycleSystem {
    pub matrix: DMatrix<f64>,
    pub exact: Option<RatMatrix>,
    pub fiber_dim: usize,
    pub generators: usize,
    pub relators: usize,
}

impl CocycleSystem {
    pub fn unknowns(&self) -> usize {
        self.fiber_dim * self.generators
    }

    pub fn equations(&self) -> usize {
        self.fiber_dim * self.relators
    }

    /// `unknowns − rank`, with the exact rank taking precedence when available.
    pub fn kernel_dim(&self) -> Result<usize, CohomologyError> {
        let float = float_rank(&self.matrix);
        let rank = match (&self.exact, float) {
            (Some(m), Ok(f)) => {
                let e = m.rank();
                if e != f {
                    return Err(CohomologyError::RankMismatch { exact: e, float: f });
                }
                e
            }
            (Some(m), Err(_)) => m.rank(),
            (None, f) => f?,
        };
        Ok(self.unknowns() - rank)
    }
}

pub fn build_cocycle_system(
    pres: &GroupPresentation,
    rep: &Representation,
    system: LocalSystem,
) -> Result<CocycleSystem, CohomologyError> {
    if rep.len() != pres.generator_count() {
        return Err(RepError::ArityMismatch {
            expected: pres.generator_count(),
            found: rep.len(),
        }
        .into());
    }
    let d = system.dim();
    let (nr, ng) = (pres.relators().len(), pres.generator_count());
    let mut matrix = DMatrix::zeros(d * nr, d * ng);
    let exact_ad = rep.exact_ad();
    let mut exact = exact_ad.as_ref().map(|_| RatMatrix::zeros(d * nr, d * ng));
    for (r, rel) in pres.relators().iter().enumerate() {
        for g in 0..ng {
            let fox = fox_derivative(rel, GeneratorId(g));
            let block = ring_block(rep, &fox, &system)?;
            matrix.view_mut((d * r, d * g), (d, d)).copy_from(&block);
            if let (Some(ex), Some(ad)) = (exact.as_mut(), exact_ad.as_ref()) {
                match ring_block_exact(ad, &fox, &system) {
                    Some(b) => {
                        for i in 0..d {
                            for j in 0..d {
                                ex[(d * r + i, d * g + j)] = b[(i, j)].clone();
                            }
                        }
                    }
                    None => exact = None,
                }
            }
        }
    }
    Ok(CocycleSystem {
        matrix,
        exact,
        fiber_dim: d,
        generators: ng,
        relators: nr,
    })
}

fn check_valid(pres: &GroupPresentation, rep: &Representation) -> Result<(), CohomologyError> {
    let report = validate(pres, rep, VALIDITY_TOL);
    if report.passed {
        Ok(())
    } else {
        Err(CohomologyError::NotARepresentation(report.max_deviation))
    }
}

/// Dimension of the space of Ad-twisted 1-cocycles.
pub fn dim_z1(pres: &GroupPresentation, rep: &Representation) -> Result<usize, CohomologyError> {
    check_valid(pres, rep)?;
    build_cocycle_system(pres, rep, LocalSystem::Adjoint)?.kernel_dim()
}

/// Coboundaries `δv(g) = v − ρ(g)·v` for each basis vector `v`, as columns.
pub fn coboundary_matrix(pres: &GroupPresentation, rep: &Representation, system: LocalSystem) -> Result<DMatrix<f64>, CohomologyError> {
    let d = system.dim();
    let n = pres.generator_count();
    let mut out = DMatrix::zeros(d * n, d);
    for g in 0..n {
        let m = act(rep, &Word::generator(GeneratorId(g)), &system)?;
        let block = DMatrix::identity(d, d) - m;
        out.view_mut((d * g, 0), (d, d)).copy_from(&block);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CohomologySummary {
    pub dim_z1: usize,
    pub dim_h0: usize,
    pub dim_h1: usize,
    pub h: usize,
    pub class: RepClass,
}

pub fn cohomology_summary(pres: &GroupPresentation, rep: &Representation) -> Result<CohomologySummary, CohomologyError> {
    let z1 = dim_z1(pres, rep)?;
    let class = classify(rep, COMMUTATOR_TOL);
    let h0 = class.h0();
    let h1 = (z1 + h0).checked_sub(3).ok_or(CohomologyError::Inconsistent { z1, h0 })?;
    let s = CohomologySummary {
        dim_z1: z1,
        dim_h0: h0,
        dim_h1: h1,
        h: h0 + h1,
        class,
    };
    debug_assert_eq!(s.dim_h1 + 3, s.dim_z1 + s.dim_h0);
    Ok(s)
}

/// `target` generators mapped to words in the source group.
#[derive(Debug, Clone)]
pub struct Inclusion {
    pub target: usize,
    pub images: Vec<Word>,
}

/// A source space (e.g. `M` or the solid-Klein-bottle piece) with its maps into boundary targets.
#[derive(Debug, Clone)]
pub struct Piece {
    pub presentation: GroupPresentation,
    pub representation: Representation,
    pub inclusions: Vec<Inclusion>,
}

/// `dim coker(⊕ H¹(pieces) → ⊕ H¹(targets))` for the restriction maps along the inclusions.
///
/// Each source cocycle is pulled back to every target it includes into; the cokernel is
/// `Σ dim Z¹(target) − rank[restrictions | coboundaries of the targets]`.
pub fn restriction_cokernel(
    pieces: &[Piece],
    targets: &[GroupPresentation],
    system: LocalSystem,
) -> Result<usize, CohomologyError> {
    let d = system.dim();
    let offsets: Vec<usize> = targets
        .iter()
        .scan(0, |acc, t| {
            let o = *acc;
            *acc += d * t.generator_count();
            Some(o)
        })
        .collect();
    let total: usize = targets.iter().map(|t| d * t.generator_count()).sum();

    let mut target_reps: Vec<Option<Representation>> = vec![None; targets.len()];
    let mut columns: Vec<DMatrix<f64>> = Vec::new();
    for (p, piece) in pieces.iter().enumerate() {
        check_valid(&piece.presentation, &piece.representation)?;
        let src = build_cocycle_system(&piece.presentation, &piece.representation, system)?;
        let z = null_space(&src.matrix)?;
        let mut restricted = DMatrix::zeros(total, z.ncols());
        for inc in &piece.inclusions {
            let target = targets
                .get(inc.target)
                .ok_or_else(|| CohomologyError::InvalidInclusion(format!("piece {p}: no target {}", inc.target)))?;
            if inc.images.len() != target.generator_count() {
                return Err(CohomologyError::InvalidInclusion(format!(
                    "piece {p}: {} images for {} target generators",
                    inc.images.len(),
                    target.generator_count()
                )));
            }
            let mut imgs = Vec::with_capacity(inc.images.len());
            for w in &inc.images {
                if w.max_generator().is_some_and(|g| g.0 >= piece.presentation.generator_count()) {
                    return Err(CohomologyError::InvalidInclusion(format!("piece {p}: image word uses an undeclared generator")));
                }
                imgs.push(crate::reps::evaluate_word(&piece.representation, w)?);
            }
            let induced = Representation::new(imgs);
            if !validate(target, &induced, VALIDITY_TOL).passed {
                return Err(CohomologyError::InvalidInclusion(format!("piece {p}: image words violate target {} relators", inc.target)));
            }
            match &target_reps[inc.target] {
                Some(prev) if !same_images(prev, &induced) => {
                    return Err(CohomologyError::InvalidInclusion(format!(
                        "pieces induce different representations on target {}",
                        inc.target
                    )))
                }
                Some(_) => {}
                None => target_reps[inc.target] = Some(induced),
            }
            let mut pullback = DMatrix::zeros(d * target.generator_count(), d * piece.presentation.generator_count());
            for (h, w) in inc.images.iter().enumerate() {
                for g in 0..piece.presentation.generator_count() {
                    let block = ring_block(&piece.representation, &fox_derivative(w, GeneratorId(g)), &system)?;
                    pullback.view_mut((d * h, d * g), (d, d)).copy_from(&block);
                }
            }
            let image = pullback * &z;
            let mut rows = restricted.view_mut((offsets[inc.target], 0), (image.nrows(), image.ncols()));
            rows += &image;
        }
        columns.push(restricted);
    }

    let mut z1_total = 0;
    for (k, target) in targets.iter().enumerate() {
        let rep = target_reps[k]
            .clone()
            .unwrap_or_else(|| Representation::trivial(target.generator_count()));
        let sys = build_cocycle_system(target, &rep, system)?;
        z1_total += sys.kernel_dim()?;
        let b = coboundary_matrix(target, &rep, system)?;
        let mut block = DMatrix::zeros(total, b.ncols());
        block.view_mut((offsets[k], 0), (b.nrows(), b.ncols())).copy_from(&b);
        columns.push(block);
    }
    let ncols: usize = columns.iter().map(|c| c.ncols()).sum();
    let mut combined = DMatrix::zeros(total, ncols);
    let mut at = 0;
    for c in &columns {
        combined.view_mut((0, at), (total, c.ncols())).copy_from(c);
        at += c.ncols();
    }
    Ok(z1_total - float_rank(&combined)?)
}

fn same_images(a: &Representation, b: &Representation) -> bool {
    a.images()
        .iter()
        .zip(b.images())
        .all(|(p, q)| p.quaternion().dist(&q.quaternion()) < VALIDITY_TOL)
}

/// Default sample times for path certificates.
pub fn default_samples() -> Vec<Rational> {
    [(0, 1), (1, 1000), (1, 100), (1, 10), (1, 4), (1, 2), (3, 4), (1, 1)]
        .iter()
        .map(|&(p, q)| Rational::new(p.into(), q.into()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateVariant {
    /// `H⁰` drops from 1 to 0 and `H¹` from `h + 1` to `h` as `t` leaves 0.
    JumpAtZero,
    /// Abelian non-central throughout with constant cohomology.
    ConstantReducible,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ConstancyVerdict {
    RhoConstant { h: usize, variant: CertificateVariant },
    NotApplicable { reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSample {
    pub t: String,
    pub summary: CohomologySummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstancyCertificate {
    pub samples: Vec<CertificateSample>,
    pub verdict: ConstancyVerdict,
}

impl ConstancyCertificate {
    pub fn h(&self) -> Option<usize> {
        match self.verdict {
            ConstancyVerdict::RhoConstant { h, .. } => Some(h),
            ConstancyVerdict::NotApplicable { .. } => None,
        }
    }
}

/// Sample-based check that rho is constant along `path`.
pub fn rho_constancy_certificate(pres: &GroupPresentation, path: &RepresentationPath, samples: &[Rational]) -> ConstancyCertificate {
    let mut out = Vec::new();
    let not_applicable = |samples, reason: String| ConstancyCertificate {
        samples,
        verdict: ConstancyVerdict::NotApplicable { reason },
    };
    for t in samples {
        let summary = path
            .at(pres, t)
            .map_err(CohomologyError::from)
            .and_then(|rep| cohomology_summary(pres, &rep));
        match summary {
            Ok(summary) => out.push(CertificateSample {
                t: format_rational(t),
                summary,
            }),
            Err(e) => return not_applicable(out, format!("t = {}: {e}", format_rational(t))),
        }
    }
    let zero = int(0);
    let Some(start) = samples.iter().position(|t| *t == zero) else {
        return not_applicable(out, "samples do not include t = 0".into());
    };
    let s0 = out[start].summary;
    let rest: Vec<CohomologySummary> = out
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != start)
        .map(|(_, s)| s.summary)
        .collect();
    if rest.is_empty() {
        return not_applicable(out, "no samples with t > 0".into());
    }
    let h_rest = rest[0].dim_h1;
    let uniform = rest.iter().all(|s| s.dim_h0 == rest[0].dim_h0 && s.dim_h1 == h_rest);
    if !uniform {
        return not_applicable(out, "cohomology varies over t > 0".into());
    }
    if s0.dim_h0 == 1 && rest[0].dim_h0 == 0 && s0.dim_h1 == h_rest + 1 {
        return ConstancyCertificate {
            samples: out,
            verdict: ConstancyVerdict::RhoConstant {
                h: h_rest,
                variant: CertificateVariant::JumpAtZero,
            },
        };
    }
    if s0.class == RepClass::AbelianNoncentral
        && rest.iter().all(|s| s.class == RepClass::AbelianNoncentral)
        && s0.dim_h1 == h_rest
    {
        return ConstancyCertificate {
            samples: out,
            verdict: ConstancyVerdict::RhoConstant {
                h: 1 + h_rest,
                variant: CertificateVariant::ConstantReducible,
            },
        };
    }
    let reason = format!(
        "(H0, H1) goes from ({}, {}) at t = 0 to ({}, {}) for t > 0",
        s0.dim_h0, s0.dim_h1, rest[0].dim_h0, h_rest
    );
    not_applicable(out, reason)
}
