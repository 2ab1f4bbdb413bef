//! Reliability of yes/no experiments that try to tell whether a collapse
//! happened, and the optimal such experiments.
//!
//! The reliability of an effect `E` for the pair `(ρ₁, ρ₂)` (collapsed,
//! uncollapsed) with prior `p` is `p·tr[ρ₁E] + (1−p)·tr[ρ₂(I−E)]`, which
//! equals `1 − p + tr[AE]` for the operand `A = p·ρ₁ − (1−p)·ρ₂`.

mod bounds;
mod known_state;
mod qubit;

pub use bounds::{
    delta_bound, finite_dim_delta_bound, rmax_bounds_known_psi, rmax_density_upper_bound, KnownPsiBounds,
    ZeroComponentPolicy,
};
pub use known_state::{
    f_psi, f_psi_inverse, optimal_known_psi, reduce_dimension, rmax_known_psi, Reduction, REGIME_TOL,
    ZERO_COMPONENT_TOL,
};
pub use qubit::{rmax_2d_closed_form, stern_gerlach_direction, SternGerlach};

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::linalg::{hermitian_eig, zero_threshold, ComplexMatrix, C64};
use crate::model::{CollapseBasis, DensityMatrix, StateVector, WireMatrix};

pub const EFFECT_TOL: f64 = 1e-10;
const FULL_RANK_TOL: f64 = 1e-10;
const DIAG_MATCH_TOL: f64 = 1e-9;

/// Self-adjoint operator with spectrum in `[0, 1]`: the "yes" outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireMatrix", into = "WireMatrix")]
pub struct Effect {
    matrix: ComplexMatrix,
}

impl Effect {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NonSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let defect = matrix.hermitian_defect();
        if defect > EFFECT_TOL {
            return Err(Error::InvalidEffect(format!("not Hermitian (asymmetry {defect:e})")));
        }
        let eig = hermitian_eig(&matrix)?;
        let (lo, hi) = (eig.min_eigenvalue(), eig.max_eigenvalue());
        if lo < -EFFECT_TOL || hi > 1.0 + EFFECT_TOL {
            return Err(Error::InvalidEffect(format!("spectrum [{lo}, {hi}] leaves [0, 1]")));
        }
        Ok(Self { matrix })
    }

    /// Symmetrizes a numerically assembled matrix before validating it.
    pub fn from_computed(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(matrix.hermitian_part())
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    /// Always answer the a-priori likelier alternative: `0` for `p ≤ ½`, `I` otherwise.
    pub fn blind_guess(dim: usize, p: f64) -> Self {
        if p <= 0.5 {
            Self::zero(dim)
        } else {
            Self::identity(dim)
        }
    }

    /// `|v⟩⟨v|` for the normalized `v`.
    pub fn projector_onto(v: &[C64]) -> Result<Self> {
        let s = StateVector::normalized(v.to_vec())?;
        Ok(Self { matrix: s.projector() })
    }

    /// `I − |v⟩⟨v|` for the normalized `v`.
    pub fn complement_of(v: &[C64]) -> Result<Self> {
        let s = StateVector::normalized(v.to_vec())?;
        let id = ComplexMatrix::identity(s.dim());
        Self::from_computed(&id - &s.projector())
    }

    /// `U diag(e) U†` where the columns of `frame` are orthonormal.
    pub fn from_spectral(frame: &ComplexMatrix, eigenvalues: &[f64]) -> Result<Self> {
        if frame.cols() != eigenvalues.len() {
            return Err(Error::DimensionMismatch {
                expected: frame.cols(),
                found: eigenvalues.len(),
            });
        }
        let d = ComplexMatrix::from_real_diagonal(eigenvalues);
        Self::from_computed(&(frame * &d) * &frame.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `E ⊗ I_T`.
    pub fn lift(&self, dim_t: usize) -> Self {
        Self {
            matrix: self.matrix.kron(&ComplexMatrix::identity(dim_t)),
        }
    }

    /// `⟨ψ|E|ψ⟩`, the probability of "yes" on `ψ`.
    pub fn yes_probability(&self, psi: &[C64]) -> f64 {
        self.matrix.hermitian_form(psi)
    }

    /// `⟨b_k|E|b_k⟩` for every basis vector.
    pub fn diagonal_in(&self, basis: &CollapseBasis) -> Vec<f64> {
        (0..basis.dim())
            .map(|k| {
                if basis.is_standard() {
                    self.matrix[(k, k)].re
                } else {
                    self.matrix.hermitian_form(&basis.vector(k))
                }
            })
            .collect()
    }
}

impl TryFrom<WireMatrix> for Effect {
    type Error = Error;

    fn try_from(w: WireMatrix) -> Result<Self> {
        Effect::new(w.into_matrix()?)
    }
}

impl From<Effect> for WireMatrix {
    fn from(e: Effect) -> Self {
        WireMatrix::from(&e.matrix)
    }
}

/// Optimum of a two-hypothesis discrimination problem.
#[derive(Clone, Debug)]
pub struct DiscriminationResult {
    pub p: f64,
    pub r_max: f64,
    /// Canonical optimal effect.
    pub e_opt: Effect,
    /// Sum of the positive eigenvalues of `A`.
    pub lambda_plus: f64,
    /// Sum of the negative eigenvalues of `A`.
    pub lambda_minus: f64,
    /// `A = p·ρ₁ − (1−p)·ρ₂`.
    pub helstrom_operand: ComplexMatrix,
    /// Spectrum of `A`, ascending.
    pub operand_eigenvalues: Vec<f64>,
    /// Eigenvector of the single negative eigenvalue, when there is exactly one.
    pub negative_eigvec: Option<StateVector>,
    /// Dimension of the kernel of `A`; the optimum is not unique when positive.
    pub zero_eigenspace_dim: usize,
}

impl DiscriminationResult {
    pub fn is_unique(&self) -> bool {
        self.zero_eigenspace_dim == 0
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// `p⟨ψ|diag E|ψ⟩ + (1−p)⟨ψ|I−E|ψ⟩`.
pub fn reliability_known_psi(psi: &StateVector, p: f64, e: &Effect, basis: &CollapseBasis) -> Result<f64> {
    check_probability(p)?;
    check_dims(basis.dim(), psi.dim())?;
    check_dims(basis.dim(), e.dim())?;
    let weights = basis.weights(psi);
    let collapsed: f64 = weights.iter().zip(e.diagonal_in(basis)).map(|(w, ekk)| w * ekk).sum();
    Ok(p * collapsed + (1.0 - p) * (1.0 - e.yes_probability(psi.amplitudes())))
}

/// Reliability minus that of blind guessing, `R − max(p, 1−p)`, arranged
/// so that blind guessing gives exactly zero and `E ∈ {0, I}` never gives
/// a positive value.
pub fn reliability_advantage(psi: &StateVector, p: f64, e: &Effect, basis: &CollapseBasis) -> Result<f64> {
    check_probability(p)?;
    check_dims(basis.dim(), psi.dim())?;
    check_dims(basis.dim(), e.dim())?;
    let m = advantage_operand(p, e);
    let weights = basis.weights(psi);
    let diag_form: f64 = (0..basis.dim())
        .map(|k| {
            let mkk = if basis.is_standard() {
                m[(k, k)].re
            } else {
                m.hermitian_form(&basis.vector(k))
            };
            weights[k] * mkk
        })
        .sum();
    Ok(advantage_from_forms(p, diag_form, m.hermitian_form(psi.amplitudes())))
}

/// `E` for `p ≤ ½`, `I − E` otherwise: the operator whose forms enter
/// [`advantage_from_forms`].
pub(crate) fn advantage_operand(p: f64, e: &Effect) -> ComplexMatrix {
    if p <= 0.5 {
        e.matrix().clone()
    } else {
        &ComplexMatrix::identity(e.dim()) - e.matrix()
    }
}

/// `diag_form = ⟨ψ|diag M|ψ⟩`, `form = ⟨ψ|M|ψ⟩` for `M` from [`advantage_operand`].
pub(crate) fn advantage_from_forms(p: f64, diag_form: f64, form: f64) -> f64 {
    if p <= 0.5 {
        p * diag_form - (1.0 - p) * form
    } else {
        (1.0 - p) * form - p * diag_form
    }
}

/// `tr[ρ(p·diag E + (1−p)(I−E))]`.
pub fn reliability_density(rho: &DensityMatrix, p: f64, e: &Effect, basis: &CollapseBasis) -> Result<f64> {
    check_probability(p)?;
    check_dims(basis.dim(), rho.dim())?;
    check_dims(basis.dim(), e.dim())?;
    let diag_e = basis.diag_part(e.matrix())?;
    let collapsed = rho.matrix().trace_product(&diag_e).re;
    let yes = rho.matrix().trace_product(e.matrix()).re;
    Ok(p * collapsed + (1.0 - p) * (1.0 - yes))
}

/// `1 − p + tr[AE]` for an arbitrary pair.
pub fn reliability_general(rho1: &DensityMatrix, rho2: &DensityMatrix, p: f64, e: &Effect) -> Result<f64> {
    check_probability(p)?;
    check_dims(rho1.dim(), rho2.dim())?;
    check_dims(rho1.dim(), e.dim())?;
    let yes1 = rho1.matrix().trace_product(e.matrix()).re;
    let yes2 = rho2.matrix().trace_product(e.matrix()).re;
    Ok(p * yes1 + (1.0 - p) * (1.0 - yes2))
}

/// `p·ρ₁ − (1−p)·ρ₂`.
pub fn helstrom_operand(rho1: &ComplexMatrix, rho2: &ComplexMatrix, p: f64) -> ComplexMatrix {
    &rho1.scale(p) - &rho2.scale(1.0 - p)
}

/// Optimal discrimination of `ρ₁` (prior `p`) from `ρ₂`, with the minimal
/// optimal effect `P⁺_A`.
pub fn helstrom(rho1: &DensityMatrix, rho2: &DensityMatrix, p: f64) -> Result<DiscriminationResult> {
    check_probability(p)?;
    check_dims(rho1.dim(), rho2.dim())?;
    spectral_optimum(helstrom_operand(rho1.matrix(), rho2.matrix(), p), p)
}

pub(crate) fn spectral_optimum(a: ComplexMatrix, p: f64) -> Result<DiscriminationResult> {
    let eig = hermitian_eig(&a)?;
    let thr = zero_threshold(&a);
    let mut lambda_plus = 0.0;
    let mut lambda_minus = 0.0;
    let mut zero_dim = 0;
    for group in eig.degenerate_groups() {
        let vals = &eig.eigenvalues[group.clone()];
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        if mean > thr {
            lambda_plus += vals.iter().sum::<f64>();
        } else if mean < -thr {
            lambda_minus += vals.iter().sum::<f64>();
        } else {
            zero_dim += vals.len();
        }
    }
    let negatives: Vec<usize> = (0..eig.dim()).filter(|&i| eig.eigenvalues[i] < -thr).collect();
    let negative_eigvec = match negatives.as_slice() {
        [i] => Some(StateVector::normalized(eig.eigenvector(*i))?),
        _ => None,
    };
    let e_opt = Effect::from_computed(eig.projector_where(|m| m > thr))?;
    Ok(DiscriminationResult {
        p,
        r_max: (1.0 - p) + lambda_plus,
        e_opt,
        lambda_plus,
        lambda_minus,
        helstrom_operand: a,
        operand_eigenvalues: eig.eigenvalues,
        negative_eigvec,
        zero_eigenspace_dim: zero_dim,
    })
}

/// Priors outside `(p_lo, p_hi)` make blind guessing optimal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlindGuessThresholds {
    pub p_lo: f64,
    pub p_hi: f64,
    /// True when the collapse-specific formulas were used.
    pub collapse_specialization: bool,
}

/// Thresholds from the extreme eigenvalues of a full-rank pair. When the
/// pair is rank deficient and `collapse_basis` is given with
/// `ρ₁ = diag ρ₂`, falls back to `p_lo = p_d / (max_k ⟨b_k|ρ₂|b_k⟩ + p_d)`
/// (`p_d` the smallest eigenvalue of `ρ₂`, clamped at zero) and
/// `p_hi = d/(d+1)`.
pub fn blind_guess_thresholds(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    collapse_basis: Option<&CollapseBasis>,
) -> Result<BlindGuessThresholds> {
    check_dims(rho1.dim(), rho2.dim())?;
    let e1 = hermitian_eig(rho1.matrix())?;
    let e2 = hermitian_eig(rho2.matrix())?;
    if e1.min_eigenvalue() > FULL_RANK_TOL && e2.min_eigenvalue() > FULL_RANK_TOL {
        let p_lo = e2.min_eigenvalue() / (e1.max_eigenvalue() + e2.min_eigenvalue());
        let p_hi = e2.max_eigenvalue() / (e1.min_eigenvalue() + e2.max_eigenvalue());
        return Ok(BlindGuessThresholds {
            p_lo,
            p_hi,
            collapse_specialization: false,
        });
    }
    let basis = collapse_basis.ok_or(Error::RankDeficient)?;
    check_dims(basis.dim(), rho2.dim())?;
    let diag2 = basis.diag_part(rho2.matrix())?;
    if diag2.max_abs_diff(rho1.matrix()) > DIAG_MATCH_TOL {
        return Err(Error::RankDeficient);
    }
    let p_d = e2.min_eigenvalue().max(0.0);
    let max_diag = (0..basis.dim())
        .map(|k| diag2.hermitian_form(&basis.vector(k)))
        .fold(f64::NEG_INFINITY, f64::max);
    let d = rho2.dim() as f64;
    Ok(BlindGuessThresholds {
        p_lo: p_d / (max_diag + p_d),
        p_hi: d / (d + 1.0),
        collapse_specialization: true,
    })
}
