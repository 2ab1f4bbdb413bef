//! Closed forms for `d = 2`.

use super::known_state::{REGIME_TOL, ZERO_COMPONENT_TOL};
use crate::error::{check_probability, Error, Result};
use crate::linalg::C64;
use crate::model::{CollapseBasis, StateVector};

fn require_qubit(psi: &StateVector, basis: &CollapseBasis) -> Result<()> {
    for d in [psi.dim(), basis.dim()] {
        if d != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: d });
        }
    }
    Ok(())
}

/// `½ + ½√((1−2p)² + 4p(2−3p)|ψ₁|²|ψ₂|²)` below `p = 2/3`, `p` above.
pub fn rmax_2d_closed_form(psi: &StateVector, p: f64, basis: &CollapseBasis) -> Result<f64> {
    check_probability(p)?;
    require_qubit(psi, basis)?;
    if 3.0 * p - 2.0 >= -REGIME_TOL {
        return Ok(p);
    }
    let w = basis.weights(psi);
    let radicand = (1.0 - 2.0 * p).powi(2) + 4.0 * p * (2.0 - 3.0 * p) * w[0] * w[1];
    Ok(0.5 + 0.5 * radicand.sqrt())
}

/// Spin measurement realizing the known-state optimum for a qubit.
#[derive(Clone, Debug)]
pub struct SternGerlach {
    /// Bloch vector of `ψ` relative to the collapse basis.
    pub v: [f64; 3],
    /// `v` dilated along the third axis by `1 − p/(1−p)`.
    pub w: [f64; 3],
    /// Spin state pointing along `−w`; `|χ⟩⟨χ|` is the optimal effect.
    pub chi: StateVector,
}

/// Unit vector whose Bloch vector is the unit vector `n`.
fn bloch_state(n: [f64; 3]) -> [C64; 2] {
    let transverse = C64::new(n[0], n[1]);
    if n[2] >= 0.0 {
        let c = (0.5 * (1.0 + n[2])).sqrt();
        [C64::new(c, 0.0), transverse / (2.0 * c)]
    } else {
        let s = (0.5 * (1.0 - n[2])).sqrt();
        [transverse.conj() / (2.0 * s), C64::new(s, 0.0)]
    }
}

/// Direction of the optimal spin measurement for `0 < p < 2/3`.
pub fn stern_gerlach_direction(psi: &StateVector, p: f64, basis: &CollapseBasis) -> Result<SternGerlach> {
    require_qubit(psi, basis)?;
    if !(p > 0.0 && 3.0 * p - 2.0 < -REGIME_TOL) {
        return Err(Error::OutOfRange {
            value: p,
            range: "(0, 2/3)".into(),
        });
    }
    let c = basis.components(psi.amplitudes());
    let (a, b) = (c[0], c[1]);
    if a.norm_sqr() <= ZERO_COMPONENT_TOL || b.norm_sqr() <= ZERO_COMPONENT_TOL {
        return Err(Error::BasisState);
    }
    let ab = a.conj() * b;
    let v = [2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr()];
    let w = [v[0], v[1], (1.0 - p / (1.0 - p)) * v[2]];
    let len = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let chi_coords = bloch_state([-w[0] / len, -w[1] / len, -w[2] / len]);
    let chi = StateVector::normalized(basis.synthesize(&chi_coords))?;
    Ok(SternGerlach { v, w, chi })
}
