//! States, bases, density matrices and the collapse channel.
//!
//! A collapse replaces `ψ` (with prior probability `p`) by one of the
//! normalized branches `K_k ψ / ‖K_k ψ‖`, chosen with Born weight
//! `‖K_k ψ‖²`. The operators `K_k` are rank-one basis projectors in the
//! plain case and subspace projectors or unsharp positive operators
//! otherwise; on a bipartite system `S ⊗ T` they may act on either factor
//! or on the joint space, and only `S` is observed.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::linalg::{self, hermitian_eig, ComplexMatrix, C64, ONE, ZERO};

pub const NORM_TOL: f64 = 1e-10;
pub const DENSITY_TOL: f64 = 1e-10;
pub const STRUCTURE_TOL: f64 = 1e-9;
/// Branches lighter than this can never be selected by the sampler.
pub const BRANCH_WEIGHT_FLOOR: f64 = 1e-30;

/// A unit vector in `ℂ^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireMatrix", into = "WireMatrix")]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidData("empty state vector".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidData("non-finite amplitude".into()));
        }
        let n = linalg::norm(&amplitudes);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit length.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let n = linalg::norm(&amplitudes);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized(n));
        }
        for z in &mut amplitudes {
            *z /= n;
        }
        Self::new(amplitudes)
    }

    /// Real nonnegative amplitudes `√(w_k / Σw)`.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::WeightMismatch("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::WeightMismatch("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| C64::new((w / total).sqrt(), 0.0)).collect())
    }

    /// `(1, …, 1)/√d`.
    pub fn uniform(dim: usize) -> Self {
        let a = 1.0 / (dim as f64).sqrt();
        Self {
            amplitudes: vec![C64::new(a, 0.0); dim],
        }
    }

    pub fn basis_vector(dim: usize, k: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[k] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> C64 {
        linalg::inner(&self.amplitudes, &other.amplitudes)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::projector(&self.amplitudes)
    }

    /// `ψ ⊗ χ`.
    pub fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Self { amplitudes }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// An orthonormal basis `b_1, …, b_d`, stored as the columns of a unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseBasis {
    matrix: ComplexMatrix,
    standard: bool,
}

impl CollapseBasis {
    pub fn standard(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            standard: true,
        }
    }

    /// Columns of `matrix` are the basis vectors.
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NonSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let gram = &matrix.adjoint() * &matrix;
        let defect = gram.max_abs_diff(&ComplexMatrix::identity(matrix.rows()));
        if defect > NORM_TOL {
            return Err(Error::NotOrthonormal(defect));
        }
        let standard = matrix == ComplexMatrix::identity(matrix.rows());
        Ok(Self { matrix, standard })
    }

    pub fn from_vectors(vectors: &[StateVector]) -> Result<Self> {
        let dim = vectors.first().map_or(0, StateVector::dim);
        if vectors.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: vectors.len(),
            });
        }
        let cols: Vec<Vec<C64>> = vectors.iter().map(|v| v.amplitudes.clone()).collect();
        Self::from_matrix(ComplexMatrix::from_columns(&cols)?)
    }

    /// The equivalent basis `{e^{iθ_k} b_k}`.
    pub fn rephased(&self, thetas: &[f64]) -> Result<Self> {
        if thetas.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: thetas.len(),
            });
        }
        let m = &self.matrix;
        let matrix = ComplexMatrix::from_fn(m.rows(), m.cols(), |i, k| m[(i, k)] * C64::from_polar(1.0, thetas[k]));
        Self::from_matrix(matrix)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.matrix.column(k)
    }

    /// `ψ_k = ⟨b_k|ψ⟩`.
    pub fn components(&self, psi: &[C64]) -> Vec<C64> {
        if self.standard {
            return psi.to_vec();
        }
        (0..self.dim())
            .map(|k| (0..self.dim()).map(|i| self.matrix[(i, k)].conj() * psi[i]).sum())
            .collect()
    }

    /// `|ψ_k|²`.
    pub fn weights(&self, psi: &StateVector) -> Vec<f64> {
        self.components(psi.amplitudes()).iter().map(|z| z.norm_sqr()).collect()
    }

    /// `Σ_k c_k b_k`: maps coordinates back to the ambient space.
    pub fn synthesize(&self, coords: &[C64]) -> Vec<C64> {
        if self.standard {
            return coords.to_vec();
        }
        self.matrix.mul_vec(coords)
    }

    /// Diagonal part of `a` relative to this basis.
    pub fn diag_part(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.standard {
            if a.rows() != self.dim() || a.cols() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: a.rows(),
                });
            }
            return Ok(linalg::diag_part_standard(a));
        }
        linalg::diag_part(a, &self.matrix)
    }

    /// Matrix of `Σ_k x_k |b_k⟩⟨b_k|`.
    pub fn diagonal_operator(&self, diag: &[f64]) -> ComplexMatrix {
        if self.standard {
            return ComplexMatrix::from_real_diagonal(diag);
        }
        let d = ComplexMatrix::from_real_diagonal(diag);
        &(&self.matrix * &d) * &self.matrix.adjoint()
    }
}

/// Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WireMatrix", into = "WireMatrix")]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NonSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let defect = matrix.hermitian_defect();
        if defect > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (asymmetry {defect:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} differs from 1")));
        }
        let min = hermitian_eig(&matrix)?.min_eigenvalue();
        if min < -DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    /// Symmetrizes a numerically computed matrix before validating it.
    pub(crate) fn from_computed(matrix: ComplexMatrix) -> Result<Self> {
        let mut m = matrix.hermitian_part();
        for i in 0..m.rows() {
            m[(i, i)].im = 0.0;
        }
        Self::new(m)
    }

    pub fn pure(psi: &StateVector) -> Self {
        let mut m = psi.projector();
        for i in 0..m.rows() {
            m[(i, i)].im = 0.0;
        }
        Self { matrix: m }
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// What a collapse projects onto.
#[derive(Clone, Debug)]
pub enum CollapseStructure {
    /// Rank-one projectors onto an orthonormal basis.
    Basis(CollapseBasis),
    /// Basis collapse on `S` of a state on `S ⊗ T`.
    FactorSBasis { dim_t: usize, basis_s: CollapseBasis },
    /// Basis collapse on `T` of a state on `S ⊗ T`; only `S` is observed.
    FactorTBasis { dim_s: usize, basis_t: CollapseBasis },
    /// Collapse onto a basis of the joint space `S ⊗ T`.
    JointBasis {
        basis: CollapseBasis,
        dim_s: usize,
        dim_t: usize,
    },
    /// Orthogonal projectors summing to the identity.
    Subspaces(Vec<ComplexMatrix>),
    /// Positive operators with `Σ P_k² = I`.
    Unsharp(Vec<ComplexMatrix>),
}

#[derive(Clone, Debug)]
pub struct CollapseScenario {
    p: f64,
    structure: CollapseStructure,
}

impl CollapseScenario {
    pub fn new(p: f64, structure: CollapseStructure) -> Result<Self> {
        check_probability(p)?;
        validate_structure(&structure)?;
        Ok(Self { p, structure })
    }

    pub fn basis(p: f64, basis: CollapseBasis) -> Result<Self> {
        Self::new(p, CollapseStructure::Basis(basis))
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn structure(&self) -> &CollapseStructure {
        &self.structure
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self {
            p,
            structure: self.structure.clone(),
        })
    }

    /// Dimension of the space the initial state lives in.
    pub fn total_dim(&self) -> usize {
        let (s, t) = self.observed_dims();
        s * t
    }

    /// `(dim_S, dim_T)`; `dim_T = 1` when there is no second factor.
    pub fn observed_dims(&self) -> (usize, usize) {
        match &self.structure {
            CollapseStructure::Basis(b) => (b.dim(), 1),
            CollapseStructure::FactorSBasis { dim_t, basis_s } => (basis_s.dim(), *dim_t),
            CollapseStructure::FactorTBasis { dim_s, basis_t } => (*dim_s, basis_t.dim()),
            CollapseStructure::JointBasis { dim_s, dim_t, .. } => (*dim_s, *dim_t),
            CollapseStructure::Subspaces(ops) | CollapseStructure::Unsharp(ops) => (ops[0].rows(), 1),
        }
    }

    /// Kraus operators `K_k` on the full space.
    pub fn kraus_operators(&self) -> Vec<ComplexMatrix> {
        let rank_one = |b: &CollapseBasis| -> Vec<ComplexMatrix> {
            (0..b.dim()).map(|k| ComplexMatrix::projector(&b.vector(k))).collect()
        };
        match &self.structure {
            CollapseStructure::Basis(b) => rank_one(b),
            CollapseStructure::FactorSBasis { dim_t, basis_s } => {
                let id = ComplexMatrix::identity(*dim_t);
                rank_one(basis_s).iter().map(|k| k.kron(&id)).collect()
            }
            CollapseStructure::FactorTBasis { dim_s, basis_t } => {
                let id = ComplexMatrix::identity(*dim_s);
                rank_one(basis_t).iter().map(|k| id.kron(k)).collect()
            }
            CollapseStructure::JointBasis { basis, .. } => rank_one(basis),
            CollapseStructure::Subspaces(ops) | CollapseStructure::Unsharp(ops) => ops.clone(),
        }
    }
}

fn validate_structure(structure: &CollapseStructure) -> Result<()> {
    let positive_dim = |d: usize, what: &str| {
        if d == 0 {
            Err(Error::InvalidScenario(format!("{what} must be positive")))
        } else {
            Ok(())
        }
    };
    match structure {
        CollapseStructure::Basis(_) => Ok(()),
        CollapseStructure::FactorSBasis { dim_t, .. } => positive_dim(*dim_t, "dim_T"),
        CollapseStructure::FactorTBasis { dim_s, .. } => positive_dim(*dim_s, "dim_S"),
        CollapseStructure::JointBasis { basis, dim_s, dim_t } => {
            positive_dim(*dim_s, "dim_S")?;
            positive_dim(*dim_t, "dim_T")?;
            if basis.dim() != dim_s * dim_t {
                return Err(Error::InvalidScenario(format!(
                    "joint basis has dimension {} but dim_S·dim_T = {}",
                    basis.dim(),
                    dim_s * dim_t
                )));
            }
            Ok(())
        }
        CollapseStructure::Subspaces(ops) => validate_subspaces(ops),
        CollapseStructure::Unsharp(ops) => validate_unsharp(ops),
    }
}

fn validate_operator_family(ops: &[ComplexMatrix]) -> Result<usize> {
    let first = ops
        .first()
        .ok_or_else(|| Error::InvalidScenario("no collapse operators".into()))?;
    let d = first.rows();
    for (k, op) in ops.iter().enumerate() {
        if !op.is_square() || op.rows() != d {
            return Err(Error::InvalidScenario(format!("operator {k} has the wrong shape")));
        }
        if op.hermitian_defect() > STRUCTURE_TOL {
            return Err(Error::InvalidScenario(format!("operator {k} is not Hermitian")));
        }
    }
    Ok(d)
}

fn validate_subspaces(ops: &[ComplexMatrix]) -> Result<()> {
    let d = validate_operator_family(ops)?;
    if ops.len() >= d {
        return Err(Error::InvalidScenario(format!(
            "{} subspaces in dimension {d}; need fewer subspaces than dimensions",
            ops.len()
        )));
    }
    let mut sum = ComplexMatrix::zeros(d, d);
    for (k, pk) in ops.iter().enumerate() {
        if (pk * pk).max_abs_diff(pk) > STRUCTURE_TOL {
            return Err(Error::InvalidScenario(format!("P_{k} is not idempotent")));
        }
        for (j, pj) in ops.iter().enumerate().skip(k + 1) {
            if (pk * pj).max_abs() > STRUCTURE_TOL {
                return Err(Error::InvalidScenario(format!("P_{k} and P_{j} overlap")));
            }
        }
        sum = &sum + pk;
    }
    if sum.max_abs_diff(&ComplexMatrix::identity(d)) > STRUCTURE_TOL {
        return Err(Error::InvalidScenario("projectors do not sum to the identity".into()));
    }
    Ok(())
}

fn validate_unsharp(ops: &[ComplexMatrix]) -> Result<()> {
    let d = validate_operator_family(ops)?;
    let mut sum = ComplexMatrix::zeros(d, d);
    for (k, pk) in ops.iter().enumerate() {
        if hermitian_eig(pk)?.min_eigenvalue() < -DENSITY_TOL {
            return Err(Error::InvalidScenario(format!("P_{k} is not positive")));
        }
        sum = &sum + &(pk * pk);
    }
    if sum.max_abs_diff(&ComplexMatrix::identity(d)) > STRUCTURE_TOL {
        return Err(Error::InvalidScenario("Σ P_k² differs from the identity".into()));
    }
    Ok(())
}

/// Density matrices of the observed system with and without collapse.
#[derive(Clone, Debug)]
pub struct CollapsePair {
    /// Collapsed branch.
    pub rho1: DensityMatrix,
    /// Uncollapsed state.
    pub rho2: DensityMatrix,
}

/// The pair `(ρ₁, ρ₂)` for a known pure initial state.
pub fn apply_collapse_channel(psi: &StateVector, scenario: &CollapseScenario) -> Result<CollapsePair> {
    collapse_pair_from_density(&DensityMatrix::pure(psi), scenario)
}

/// The pair `(ρ₁, ρ₂)` for a random initial state with density matrix `rho`
/// on the full space. The channel is linear, so this covers every
/// distribution with that density matrix.
pub fn collapse_pair_from_density(rho: &DensityMatrix, scenario: &CollapseScenario) -> Result<CollapsePair> {
    let total = scenario.total_dim();
    if rho.dim() != total {
        return Err(Error::DimensionMismatch {
            expected: total,
            found: rho.dim(),
        });
    }
    let (dim_s, dim_t) = scenario.observed_dims();
    let m = rho.matrix();
    let collapsed = match &scenario.structure {
        CollapseStructure::Basis(b) => b.diag_part(m)?,
        _ => {
            let mut acc = ComplexMatrix::zeros(total, total);
            for k in scenario.kraus_operators() {
                acc = &acc + &(&(&k * m) * &k.adjoint());
            }
            acc
        }
    };
    let rho1 = linalg::partial_trace_t(&collapsed, dim_s, dim_t)?;
    let rho2 = linalg::partial_trace_t(m, dim_s, dim_t)?;
    Ok(CollapsePair {
        rho1: DensityMatrix::from_computed(rho1)?,
        rho2: DensityMatrix::from_computed(rho2)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollapseSampleOutcome {
    pub state: StateVector,
    pub collapsed: bool,
    pub branch: Option<usize>,
}

/// Precomputed branch weights and post-collapse states for one `(ψ, scenario)`.
#[derive(Clone, Debug)]
pub struct CollapseSampler {
    p: f64,
    psi: StateVector,
    cumulative: Vec<f64>,
    branches: Vec<Option<StateVector>>,
}

impl CollapseSampler {
    pub fn new(psi: &StateVector, scenario: &CollapseScenario) -> Result<Self> {
        let total = scenario.total_dim();
        if psi.dim() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: psi.dim(),
            });
        }
        let mut cumulative = Vec::new();
        let mut branches = Vec::new();
        let mut acc = 0.0;
        for k in scenario.kraus_operators() {
            let image = k.mul_vec(psi.amplitudes());
            let weight = linalg::norm(&image).powi(2);
            acc += weight;
            cumulative.push(acc);
            branches.push(if weight >= BRANCH_WEIGHT_FLOOR {
                Some(StateVector::normalized(image)?)
            } else {
                None
            });
        }
        Ok(Self {
            p: scenario.p(),
            psi: psi.clone(),
            cumulative,
            branches,
        })
    }

    /// Born weights `‖K_k ψ‖²`.
    pub fn branch_weights(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cumulative
            .iter()
            .map(|&c| {
                let w = c - prev;
                prev = c;
                w
            })
            .collect()
    }

    pub fn branch_state(&self, k: usize) -> Option<&StateVector> {
        self.branches.get(k).and_then(Option::as_ref)
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.psi
    }

    /// Index of the branch selected by one uniform draw.
    pub fn sample_branch<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let total = *self.cumulative.last().expect("at least one branch");
        let u = rng.random::<f64>() * total;
        let k = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .or_else(|| self.branches.iter().rposition(Option::is_some))
            .unwrap_or(0);
        if self.branches[k].is_none() {
            return Err(Error::ZeroNormBranch(k));
        }
        Ok(k)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CollapseSampleOutcome> {
        let collapsed = rng.random::<f64>() < self.p;
        if !collapsed {
            return Ok(CollapseSampleOutcome {
                state: self.psi.clone(),
                collapsed: false,
                branch: None,
            });
        }
        let k = self.sample_branch(rng)?;
        Ok(CollapseSampleOutcome {
            state: self.branches[k].clone().expect("checked by sample_branch"),
            collapsed: true,
            branch: Some(k),
        })
    }
}

/// One draw of the post-collapse random state `ψ′`.
pub fn sample_collapse<R: Rng + ?Sized>(
    psi: &StateVector,
    scenario: &CollapseScenario,
    rng: &mut R,
) -> Result<CollapseSampleOutcome> {
    CollapseSampler::new(psi, scenario)?.sample(rng)
}

/// `Σ w_i |ψ_i⟩⟨ψ_i|`.
pub fn density_from_ensemble(states: &[StateVector], weights: &[f64]) -> Result<DensityMatrix> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(Error::WeightMismatch(format!(
            "{} states but {} weights",
            states.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::WeightMismatch("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > DENSITY_TOL {
        return Err(Error::WeightMismatch(format!("weights sum to {total}")));
    }
    let d = states[0].dim();
    let mut acc = ComplexMatrix::zeros(d, d);
    for (psi, &w) in states.iter().zip(weights) {
        if psi.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: psi.dim(),
            });
        }
        let a = psi.amplitudes();
        for i in 0..d {
            for j in 0..d {
                acc[(i, j)] += a[i] * a[j].conj() * w;
            }
        }
    }
    DensityMatrix::from_computed(acc)
}

fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// Unitarily invariant random unit vector: `2d` standard Gaussians, normalized.
pub fn sample_uniform_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    assert!(dim >= 1, "dimension must be positive");
    loop {
        let v = gaussian_vector(dim, rng);
        let n = linalg::norm(&v);
        if n > 1e-150 {
            return StateVector {
                amplitudes: v.into_iter().map(|z| z / n).collect(),
            };
        }
    }
}

/// Haar-random unitary from Gram–Schmidt on Gaussian columns.
pub fn sample_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
    while cols.len() < dim {
        let mut v = gaussian_vector(dim, rng);
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for c in &cols {
                let proj = linalg::inner(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
        }
        let n = linalg::norm(&v);
        if n > 1e-8 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    ComplexMatrix::from_columns(&cols).expect("columns have equal length")
}

/// Wire format shared by states and square matrices:
/// `{"dim": d, "re": [...], "im": [...]}` in row-major order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WireMatrix {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl WireMatrix {
    fn entries(&self, expected: usize) -> Result<Vec<C64>> {
        if self.re.len() != expected || self.im.len() != expected {
            return Err(Error::InvalidData(format!(
                "expected {expected} real and imaginary parts, found {} and {}",
                self.re.len(),
                self.im.len()
            )));
        }
        Ok(self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)).collect())
    }

    /// True when the payload has `dim²` entries (a matrix) rather than `dim`.
    pub fn is_matrix(&self) -> bool {
        self.dim > 1 && self.re.len() == self.dim * self.dim
    }

    pub fn into_matrix(self) -> Result<ComplexMatrix> {
        let d = self.dim;
        ComplexMatrix::new(d, d, self.entries(d * d)?)
    }
}

impl From<&ComplexMatrix> for WireMatrix {
    fn from(m: &ComplexMatrix) -> Self {
        assert!(m.is_square(), "wire format holds square matrices only");
        Self {
            dim: m.rows(),
            re: m.as_slice().iter().map(|z| z.re).collect(),
            im: m.as_slice().iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<WireMatrix> for StateVector {
    type Error = Error;

    fn try_from(w: WireMatrix) -> Result<Self> {
        let amps = w.entries(w.dim)?;
        StateVector::new(amps)
    }
}

impl From<StateVector> for WireMatrix {
    fn from(s: StateVector) -> Self {
        Self {
            dim: s.dim(),
            re: s.amplitudes.iter().map(|z| z.re).collect(),
            im: s.amplitudes.iter().map(|z| z.im).collect(),
        }
    }
}

impl TryFrom<WireMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(w: WireMatrix) -> Result<Self> {
        DensityMatrix::new(w.into_matrix()?)
    }
}

impl From<DensityMatrix> for WireMatrix {
    fn from(rho: DensityMatrix) -> Self {
        WireMatrix::from(&rho.matrix)
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string(&WireMatrix::from(m)).expect("matrix serialization is infallible")
}

pub fn matrix_from_json(text: &str) -> Result<ComplexMatrix> {
    serde_json::from_str::<WireMatrix>(text)?.into_matrix()
}
