//! Optimal detection of collapse when the initial state `ψ` is known.
//!
//! With `w_k = |ψ_k|² > 0` and `f(z) = Σ w_k/(z + w_k)`, the optimum for
//! `p < d/(d+1)` is `p(1 + z*)` where `f(z*) = p/(1−p)`, attained by
//! `E = I − |φ⟩⟨φ|` with `φ_k ∝ ψ_k/(z* + w_k)`. For `p ≥ d/(d+1)` blind
//! guessing (`E = I`) is optimal.

use super::{helstrom_operand, DiscriminationResult, Effect};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, zero_threshold, ComplexMatrix, C64};
use crate::model::{CollapseBasis, StateVector};

/// Weights at or below this are treated as vanishing components.
pub const ZERO_COMPONENT_TOL: f64 = 1e-12;
/// Tolerance on `p(d+1) − d` when classifying the regime.
pub const REGIME_TOL: f64 = 1e-12;
const INVERSE_TOL: f64 = 1e-12;
const NEWTON_STEPS: usize = 20;

fn weights_checked(psi: &StateVector, basis: &CollapseBasis) -> Result<Vec<f64>> {
    if psi.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: psi.dim(),
        });
    }
    let w = basis.weights(psi);
    match w.iter().position(|&x| x <= ZERO_COMPONENT_TOL) {
        Some(index) => Err(Error::ZeroComponent { index }),
        None => Ok(w),
    }
}

fn f_weights(w: &[f64], z: f64) -> f64 {
    w.iter().map(|&x| x / (z + x)).sum()
}

fn f_weights_derivative(w: &[f64], z: f64) -> f64 {
    -w.iter().map(|&x| x / ((z + x) * (z + x))).sum::<f64>()
}

/// Root of `f(z) = u` on `[0, ∞)`.
fn f_weights_inverse(w: &[f64], u: f64) -> Result<f64> {
    let d = w.len() as f64;
    if !(u > 0.0 && u <= d) {
        return Err(Error::OutOfRange {
            value: u,
            range: format!("(0, {d}]"),
        });
    }
    if f_weights(w, 0.0) <= u {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f_weights(w, hi) > u {
        lo = hi;
        hi *= 2.0;
    }
    // f is decreasing: f(lo) > u ≥ f(hi).
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f_weights(w, mid) > u {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-3 * hi {
            break;
        }
    }
    let mut z = 0.5 * (lo + hi);
    for _ in 0..NEWTON_STEPS {
        let r = f_weights(w, z) - u;
        if r.abs() <= 0.25 * INVERSE_TOL {
            break;
        }
        if r > 0.0 {
            lo = z;
        } else {
            hi = z;
        }
        let step = z - r / f_weights_derivative(w, z);
        z = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
    }
    Ok(z)
}

/// `f_ψ(z) = Σ |ψ_k|²/(z + |ψ_k|²)`.
pub fn f_psi(psi: &StateVector, z: f64, basis: &CollapseBasis) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(Error::OutOfRange {
            value: z,
            range: "[0, ∞)".into(),
        });
    }
    Ok(f_weights(&weights_checked(psi, basis)?, z))
}

/// The `z ≥ 0` with `f_ψ(z) = u`, for `0 < u ≤ d`.
pub fn f_psi_inverse(psi: &StateVector, u: f64, basis: &CollapseBasis) -> Result<f64> {
    f_weights_inverse(&weights_checked(psi, basis)?, u)
}

/// Known-`ψ` optimum for `0 < p < 1`. At `p = d/(d+1)` every
/// `I − κ|φ⟩⟨φ|`, `κ ∈ [0, 1]`, is optimal; `I` is returned.
pub fn optimal_known_psi(psi: &StateVector, p: f64, basis: &CollapseBasis) -> Result<DiscriminationResult> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            value: p,
            range: "(0, 1)".into(),
        });
    }
    let w = weights_checked(psi, basis)?;
    let d = w.len();
    let rho2 = psi.projector();
    let rho1 = basis.diag_part(&rho2)?;
    let a = helstrom_operand(&rho1, &rho2, p);
    let eig = hermitian_eig(&a)?;
    let thr = zero_threshold(&a);
    let zero_dim = eig.eigenvalues.iter().filter(|l| l.abs() <= thr).count();

    let gap = p * (d as f64 + 1.0) - d as f64;
    if gap >= -REGIME_TOL {
        return Ok(DiscriminationResult {
            p,
            r_max: p,
            e_opt: Effect::identity(d),
            lambda_plus: 2.0 * p - 1.0,
            lambda_minus: 0.0,
            helstrom_operand: a,
            operand_eigenvalues: eig.eigenvalues,
            negative_eigvec: None,
            zero_eigenspace_dim: zero_dim,
        });
    }

    let z = f_weights_inverse(&w, p / (1.0 - p))?;
    let r_max = p * (1.0 + z);
    let coords: Vec<C64> = basis
        .components(psi.amplitudes())
        .iter()
        .zip(&w)
        .map(|(c, wk)| c / (z + wk))
        .collect();
    let phi = StateVector::normalized(basis.synthesize(&coords))?;
    let id = ComplexMatrix::identity(d);
    Ok(DiscriminationResult {
        p,
        r_max,
        e_opt: Effect::from_computed(&id - &phi.projector())?,
        lambda_plus: r_max - (1.0 - p),
        lambda_minus: p - r_max,
        helstrom_operand: a,
        operand_eigenvalues: eig.eigenvalues,
        negative_eigvec: Some(phi),
        zero_eigenspace_dim: zero_dim,
    })
}

/// A known-state problem restricted to the components of `ψ` that survive.
#[derive(Clone, Debug)]
pub struct Reduction {
    /// `ψ` in coordinates of the surviving basis vectors, renormalized.
    pub state: StateVector,
    /// Standard basis of the reduced coordinate space.
    pub basis: CollapseBasis,
    /// Original indices of the surviving basis vectors.
    pub kept: Vec<usize>,
    /// Only one component survives: `ψ` is a basis state.
    pub degenerate: bool,
}

/// Drops components with `|ψ_k|² ≤ tol`.
pub fn reduce_dimension(psi: &StateVector, basis: &CollapseBasis, tol: f64) -> Result<Reduction> {
    if psi.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: psi.dim(),
        });
    }
    let comps = basis.components(psi.amplitudes());
    let kept: Vec<usize> = (0..comps.len()).filter(|&k| comps[k].norm_sqr() > tol).collect();
    if kept.is_empty() {
        return Err(Error::NullState);
    }
    let state = StateVector::normalized(kept.iter().map(|&k| comps[k]).collect())?;
    Ok(Reduction {
        basis: CollapseBasis::standard(kept.len()),
        degenerate: kept.len() == 1,
        state,
        kept,
    })
}

/// Maximal reliability for a known state, for any `p ∈ [0, 1]` and any `ψ`.
pub fn rmax_known_psi(psi: &StateVector, p: f64, basis: &CollapseBasis) -> Result<f64> {
    crate::error::check_probability(p)?;
    if p == 0.0 || p == 1.0 {
        return Ok(1.0);
    }
    let red = reduce_dimension(psi, basis, ZERO_COMPONENT_TOL)?;
    if red.degenerate {
        return Ok(p.max(1.0 - p));
    }
    Ok(optimal_known_psi(&red.state, p, &red.basis)?.r_max)
}
