//! Spectral flow of the odd signature operator between two flat connections.

use num::{Integer, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{format_rational, int, ratio, to_f64, Rational};
use crate::rho::RhoValue;

/// Maximum distance from an integer tolerated when the rho values are floats.
pub const SF_FLOAT_TOL: f64 = 1e-6;

pub const CONVENTION: &str = "SF(a0 -> a1) = 8 (cs1 - cs0) + (rho1 - rho0 - h1 - h0) / 2, h = dim H0 + dim H1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralFlowError {
    #[error("spectral flow {value} is not an integer (residual {residual:e})")]
    NonIntegerSpectralFlow { value: String, residual: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFlowInput {
    /// Lifted CS values at the two endpoints.
    pub cs0: Rational,
    pub cs1: Rational,
    pub rho0: RhoValue,
    pub rho1: RhoValue,
    pub h0: u64,
    pub h1: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralFlowResult {
    pub sf: i64,
    pub sf_mod8: u8,
    pub residual: f64,
    pub exact: bool,
    pub convention: &'static str,
}

fn finish(sf: i64, residual: f64, exact: bool) -> SpectralFlowResult {
    SpectralFlowResult {
        sf,
        sf_mod8: sf.rem_euclid(8) as u8,
        residual,
        exact,
        convention: CONVENTION,
    }
}

pub fn spectral_flow(input: &SpectralFlowInput) -> Result<SpectralFlowResult, SpectralFlowError> {
    let dcs = &input.cs1 - &input.cs0;
    let h = int(input.h0 as i64 + input.h1 as i64);
    if let (Some(r0), Some(r1)) = (&input.rho0.exact, &input.rho1.exact) {
        let sf = int(8) * dcs + (r1 - r0 - h) * ratio(1, 2);
        return match sf.is_integer().then(|| sf.to_integer().to_i64()).flatten() {
            Some(n) => Ok(finish(n, 0.0, true)),
            None => Err(SpectralFlowError::NonIntegerSpectralFlow {
                value: format_rational(&sf),
                residual: (to_f64(&sf) - to_f64(&sf).round()).abs(),
            }),
        };
    }
    let x = 8.0 * to_f64(&dcs) + 0.5 * (input.rho1.value - input.rho0.value - to_f64(&h));
    let residual = (x - x.round()).abs();
    if !x.is_finite() || residual > SF_FLOAT_TOL {
        return Err(SpectralFlowError::NonIntegerSpectralFlow {
            value: format!("{x}"),
            residual,
        });
    }
    Ok(finish(x.round() as i64, residual, false))
}

/// SF mod 8 from the CS residues alone; independent of the chosen lifts.
pub fn spectral_flow_mod8(residue0: &Rational, residue1: &Rational, input: &SpectralFlowInput) -> Result<u8, SpectralFlowError> {
    let shifted = SpectralFlowInput {
        cs0: residue0.clone(),
        cs1: residue1.clone(),
        ..input.clone()
    };
    spectral_flow(&shifted).map(|r| r.sf_mod8)
}

/// Whether `8 Δcs + Δρ/2` has the right parity for an integral spectral flow at `h`.
pub fn admissible_h(dcs: &Rational, drho: &Rational, h: u64) -> bool {
    let x = int(16) * dcs + drho - int(h as i64);
    x.is_integer() && x.to_integer().is_even()
}
