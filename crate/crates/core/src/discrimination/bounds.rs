use serde::Serialize;

use super::known_state::{rmax_known_psi, REGIME_TOL, ZERO_COMPONENT_TOL};
use crate::error::{check_probability, Error, Result};
use crate::linalg::hermitian_eig;
use crate::model::{CollapseBasis, DensityMatrix, StateVector};

/// Sandwich on the known-state optimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KnownPsiBounds {
    /// `max(p, 1 − p·Σ|ψ_k|⁴)`.
    pub lower: f64,
    /// `max(p, 1 − p/d)`.
    pub upper: f64,
    /// Dimension-free bound in terms of `δ`.
    pub delta_upper: f64,
    /// `δ = max_k |ψ_k|²`.
    pub delta: f64,
}

pub fn rmax_bounds_known_psi(psi: &StateVector, p: f64, basis: &CollapseBasis) -> Result<KnownPsiBounds> {
    check_probability(p)?;
    if psi.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: psi.dim(),
        });
    }
    let w = basis.weights(psi);
    let d = w.len() as f64;
    let purity: f64 = w.iter().map(|x| x * x).sum();
    let delta = w.iter().cloned().fold(0.0, f64::max);
    Ok(KnownPsiBounds {
        lower: p.max(1.0 - p * purity),
        upper: p.max(1.0 - p / d),
        delta_upper: delta_bound(p, delta),
        delta,
    })
}

/// `½(1 + p(1−δ) + √((1−p)² + 2p(1−p)δ − (4−5p)pδ²))`.
pub fn delta_bound(p: f64, delta: f64) -> f64 {
    let radicand = (1.0 - p).powi(2) + 2.0 * p * (1.0 - p) * delta - (4.0 - 5.0 * p) * p * delta * delta;
    0.5 * (1.0 + p * (1.0 - delta) + radicand.max(0.0).sqrt())
}

/// The same bound in dimension `d`: the optimum for the state with one
/// weight `δ` and `d − 1` equal weights, which maximizes `f_ψ` among states
/// with largest weight `δ`. Increases with `d` towards [`delta_bound`].
pub fn finite_dim_delta_bound(p: f64, delta: f64, d: usize) -> f64 {
    assert!(d >= 2, "dimension must be at least 2");
    let df = d as f64;
    if p <= 0.0 || p * (df + 1.0) - df >= -REGIME_TOL {
        return p.max(1.0 - p);
    }
    let u = p / (1.0 - p);
    let c = (1.0 - delta) / (df - 1.0);
    let qa = u;
    let qb = u * (delta + c) - 1.0;
    let qc = u * delta * c - delta * c - delta * (1.0 - delta);
    let z = (-qb + (qb * qb - 4.0 * qa * qc).max(0.0).sqrt()) / (2.0 * qa);
    p * (1.0 + z.max(0.0))
}

/// How spectral terms whose eigenvector has vanishing basis components are handled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ZeroComponentPolicy {
    /// Restrict the term to its nonzero components.
    #[default]
    Reduce,
    /// Fail with [`Error::ZeroComponent`].
    Reject,
}

/// `Σ_i p_i R^max(φ_i)` over the spectral decomposition `ρ = Σ p_i |φ_i⟩⟨φ_i|`
/// returned by the eigensolver. Requires `0 < p < d/(d+1)`.
pub fn rmax_density_upper_bound(
    rho: &DensityMatrix,
    p: f64,
    basis: &CollapseBasis,
    policy: ZeroComponentPolicy,
) -> Result<f64> {
    let d = rho.dim();
    if basis.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: d,
        });
    }
    let df = d as f64;
    if !(p > 0.0 && p * (df + 1.0) - df < -REGIME_TOL) {
        return Err(Error::OutOfRange {
            value: p,
            range: format!("(0, {d}/{})", d + 1),
        });
    }
    let eig = hermitian_eig(rho.matrix())?;
    let mut total = 0.0;
    for i in 0..d {
        let weight = eig.eigenvalues[i];
        if weight <= ZERO_COMPONENT_TOL {
            continue;
        }
        let phi = StateVector::normalized(eig.eigenvector(i))?;
        if policy == ZeroComponentPolicy::Reject {
            if let Some(index) = basis.weights(&phi).iter().position(|&x| x <= ZERO_COMPONENT_TOL) {
                return Err(Error::ZeroComponent { index });
            }
        }
        total += weight * rmax_known_psi(&phi, p, basis)?;
    }
    Ok(total)
}
