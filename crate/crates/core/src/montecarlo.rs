//! Seeded Monte Carlo: simulated experiments and the fraction of the unit
//! sphere on which an effect beats blind guessing.
//!
//! Work is cut into chunks of [`CHUNK_SIZE`] draws. Chunk `i` always uses
//! substream `i` of the caller's stream and chunks only contribute integer
//! counts, so results do not depend on the thread pool.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discrimination::{advantage_from_forms, advantage_operand, reliability_general, Effect};
use crate::error::{check_probability, Error, Result};
use crate::model::{
    apply_collapse_channel, sample_uniform_state, sample_unitary, CollapseSampler, CollapseScenario, StateVector,
};
use crate::rng::RngStream;

pub const CHUNK_SIZE: u64 = 4096;

fn chunk_lengths(total: u64) -> Vec<u64> {
    let full = total / CHUNK_SIZE;
    let rest = total % CHUNK_SIZE;
    let mut v = vec![CHUNK_SIZE; full as usize];
    if rest > 0 {
        v.push(rest);
    }
    v
}

/// Sum of `body(substream_i, len_i)` over all chunks, in parallel.
fn count_in_chunks<F>(total: u64, stream: &RngStream, body: F) -> u64
where
    F: Fn(&mut RngStream, u64) -> u64 + Sync,
{
    chunk_lengths(total)
        .into_par_iter()
        .enumerate()
        .map(|(i, len)| body(&mut stream.substream(i as u64), len))
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalReliability {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub analytic: f64,
    /// Infinite (serialized as `null`) when the analytic value is 0 or 1
    /// and the estimate differs from it.
    pub z_score: f64,
}

fn z_score(estimate: f64, analytic: f64, n: u64) -> f64 {
    let var = analytic * (1.0 - analytic);
    if var > 0.0 {
        (estimate - analytic) / (var / n as f64).sqrt()
    } else if estimate == analytic {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Runs `trials` independent experiments: collapse with probability `p`,
/// measure `E` on the observed system, answer "collapsed" on "yes".
/// For bipartite scenarios `E` acts on `S` and is lifted to `E ⊗ I_T`.
pub fn simulate_reliability(
    psi: &StateVector,
    scenario: &CollapseScenario,
    e: &Effect,
    trials: u64,
    stream: &RngStream,
) -> Result<EmpiricalReliability> {
    if trials == 0 {
        return Err(Error::InvalidData("at least one trial is required".into()));
    }
    let (dim_s, dim_t) = scenario.observed_dims();
    if e.dim() != dim_s {
        return Err(Error::DimensionMismatch {
            expected: dim_s,
            found: e.dim(),
        });
    }
    let pair = apply_collapse_channel(psi, scenario)?;
    let analytic = reliability_general(&pair.rho1, &pair.rho2, scenario.p(), e)?;

    let lifted = if dim_t > 1 { e.lift(dim_t) } else { e.clone() };
    let sampler = CollapseSampler::new(psi, scenario)?;
    let yes_uncollapsed = lifted.yes_probability(psi.amplitudes()).clamp(0.0, 1.0);
    let yes_branch: Vec<f64> = (0..sampler.branch_weights().len())
        .map(|k| {
            sampler
                .branch_state(k)
                .map_or(0.0, |s| lifted.yes_probability(s.amplitudes()).clamp(0.0, 1.0))
        })
        .collect();
    let p = scenario.p();

    let failure = std::sync::Mutex::new(None);
    let successes = count_in_chunks(trials, stream, |rng, len| {
        let mut hits = 0;
        for _ in 0..len {
            let collapsed = rng.random::<f64>() < p;
            let q = if collapsed {
                match sampler.sample_branch(rng) {
                    Ok(k) => yes_branch[k],
                    Err(err) => {
                        *failure.lock().unwrap() = Some(err);
                        return hits;
                    }
                }
            } else {
                yes_uncollapsed
            };
            let yes = rng.random::<f64>() < q;
            hits += u64::from(yes == collapsed);
        }
        hits
    });
    if let Some(err) = failure.into_inner().unwrap() {
        return Err(err);
    }
    let estimate = successes as f64 / trials as f64;
    Ok(EmpiricalReliability {
        successes,
        trials,
        estimate,
        analytic,
        z_score: z_score(estimate, analytic, trials),
    })
}

/// `1 − (1 − 1/d)^(d−1)`.
pub fn conjecture_bound(dim: usize) -> f64 {
    let d = dim as f64;
    1.0 - (1.0 - 1.0 / d).powf(d - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub fraction: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub count: u64,
    pub p: f64,
    pub dim: usize,
    pub conjecture_bound: f64,
    /// `p = ½`: blind guessing ties on average, so strict wins are rare
    /// but still possible pointwise.
    pub tie_at_half: bool,
}

/// Fraction of uniformly drawn `ψ` (standard collapse basis) whose
/// reliability under `E` strictly exceeds `max(p, 1−p)`.
pub fn estimate_lambda(e: &Effect, p: f64, n_samples: u64, stream: &RngStream) -> Result<LambdaEstimate> {
    check_probability(p)?;
    if p == 0.0 || p == 1.0 {
        return Err(Error::OutOfRange {
            value: p,
            range: "(0, 1)".into(),
        });
    }
    let dim = e.dim();
    if dim < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: dim,
        });
    }
    if n_samples == 0 {
        return Err(Error::InvalidData("at least one sample is required".into()));
    }
    let m = advantage_operand(p, e);
    let diag: Vec<f64> = (0..dim).map(|k| m[(k, k)].re).collect();
    let count = count_in_chunks(n_samples, stream, |rng, len| {
        let mut wins = 0;
        for _ in 0..len {
            let psi = sample_uniform_state(dim, rng);
            let a = psi.amplitudes();
            let diag_form: f64 = a.iter().zip(&diag).map(|(z, mkk)| z.norm_sqr() * mkk).sum();
            wins += u64::from(advantage_from_forms(p, diag_form, m.hermitian_form(a)) > 0.0);
        }
        wins
    });
    let fraction = count as f64 / n_samples as f64;
    Ok(LambdaEstimate {
        fraction,
        std_error: (fraction * (1.0 - fraction) / n_samples as f64).sqrt(),
        n_samples,
        count,
        p,
        dim,
        conjecture_bound: conjecture_bound(dim),
        tie_at_half: p == 0.5,
    })
}

/// How `conjecture_scan` draws effects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectStrategy {
    /// Haar-random eigenframe with i.i.d. uniform eigenvalues.
    Spectral,
    /// `I − |φ⟩⟨φ|` with `φ` uniform.
    Complement,
    /// Alternates the two, starting with `Spectral`.
    Mixed,
}

impl std::str::FromStr for EffectStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Self::Spectral),
            "complement" => Ok(Self::Complement),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::InvalidData(format!("unknown effect strategy `{other}`"))),
        }
    }
}

pub fn sample_effect<R: Rng + ?Sized>(dim: usize, strategy: EffectStrategy, index: usize, rng: &mut R) -> Effect {
    let spectral = match strategy {
        EffectStrategy::Spectral => true,
        EffectStrategy::Complement => false,
        EffectStrategy::Mixed => index.is_multiple_of(2),
    };
    if spectral {
        let frame = sample_unitary(dim, rng);
        let eigenvalues: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        Effect::from_spectral(&frame, &eigenvalues).expect("spectrum lies in [0, 1]")
    } else {
        let phi = sample_uniform_state(dim, rng);
        Effect::complement_of(phi.amplitudes()).expect("unit vector")
    }
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub dim: usize,
    pub p_grid: Vec<f64>,
    pub strategy: EffectStrategy,
    pub n_effects: usize,
    pub n_samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanHit {
    pub p: f64,
    pub effect_index: usize,
    pub fraction: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub p: f64,
    pub max_fraction: f64,
    pub mean_fraction: f64,
    pub argmax_effect: usize,
    pub std_error_at_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanMetadata {
    pub seed: u64,
    pub stream_index: u64,
    pub chunk_size: u64,
    pub chunks_per_estimate: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub dim: usize,
    pub strategy: EffectStrategy,
    pub n_effects: usize,
    pub n_samples: u64,
    pub conjecture_bound: f64,
    pub points: Vec<ScanPoint>,
    pub max_fraction: f64,
    pub exceeds_half: bool,
    /// Estimates with fraction above ½.
    pub half_exceeding: Vec<ScanHit>,
    /// Estimates above the conjectured bound by more than four standard errors.
    pub violations: Vec<ScanHit>,
    pub notes: Vec<String>,
    pub metadata: ScanMetadata,
}

/// Searches random effects for large `Λ_p(E)` over a grid of priors.
/// Effect `j` comes from substream `j` of substream 0; the estimate for
/// grid point `i` and effect `j` from substream `i·n_effects + j` of
/// substream 1.
pub fn conjecture_scan(config: &ScanConfig, stream: &RngStream) -> Result<ScanReport> {
    if config.dim < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: config.dim,
        });
    }
    if config.p_grid.is_empty() || config.n_effects == 0 {
        return Err(Error::InvalidData("empty p grid or no effects".into()));
    }
    let effect_root = stream.substream(0);
    let effects: Vec<Effect> = (0..config.n_effects)
        .into_par_iter()
        .map(|j| sample_effect(config.dim, config.strategy, j, &mut effect_root.substream(j as u64)))
        .collect();

    let estimate_root = stream.substream(1);
    let bound = conjecture_bound(config.dim);
    let mut points = Vec::new();
    let mut half_exceeding = Vec::new();
    let mut violations = Vec::new();
    let mut notes = Vec::new();
    for (i, &p) in config.p_grid.iter().enumerate() {
        let estimates = effects
            .par_iter()
            .enumerate()
            .map(|(j, e)| {
                let s = estimate_root.substream((i * config.n_effects + j) as u64);
                estimate_lambda(e, p, config.n_samples, &s)
            })
            .collect::<Result<Vec<_>>>()?;
        let (argmax, best) = estimates.iter().enumerate().fold((0, &estimates[0]), |acc, (j, est)| {
            if est.fraction > acc.1.fraction {
                (j, est)
            } else {
                acc
            }
        });
        points.push(ScanPoint {
            p,
            max_fraction: best.fraction,
            mean_fraction: estimates.iter().map(|e| e.fraction).sum::<f64>() / estimates.len() as f64,
            argmax_effect: argmax,
            std_error_at_max: best.std_error,
        });
        for (j, est) in estimates.iter().enumerate() {
            let hit = ScanHit {
                p,
                effect_index: j,
                fraction: est.fraction,
                std_error: est.std_error,
            };
            if est.fraction > bound + 4.0 * est.std_error {
                violations.push(hit.clone());
            }
            if est.fraction > 0.5 {
                half_exceeding.push(hit);
            }
        }
        if p == 0.5 {
            notes.push(
                "p = 0.5: every effect ties with blind guessing on average over the sphere; \
                 strict wins are counted pointwise"
                    .to_string(),
            );
        }
    }
    let max_fraction = points.iter().map(|pt| pt.max_fraction).fold(0.0, f64::max);
    if !half_exceeding.is_empty() {
        notes.push(format!(
            "{} estimate(s) exceed 1/2 in dimension {}",
            half_exceeding.len(),
            config.dim
        ));
    }
    if !violations.is_empty() {
        notes.push(format!(
            "{} estimate(s) exceed the conjectured bound {bound:.6} by more than 4 standard errors",
            violations.len()
        ));
    }
    Ok(ScanReport {
        dim: config.dim,
        strategy: config.strategy,
        n_effects: config.n_effects,
        n_samples: config.n_samples,
        conjecture_bound: bound,
        points,
        max_fraction,
        exceeds_half: !half_exceeding.is_empty(),
        half_exceeding,
        violations,
        notes,
        metadata: ScanMetadata {
            seed: stream.seed(),
            stream_index: stream.index(),
            chunk_size: CHUNK_SIZE,
            chunks_per_estimate: chunk_lengths(config.n_samples).len(),
            wall_time_seconds: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CollapseBasis;

    #[test]
    fn chunking_covers_total() {
        assert_eq!(chunk_lengths(0), Vec::<u64>::new());
        assert_eq!(chunk_lengths(4096), vec![4096]);
        assert_eq!(chunk_lengths(5000), vec![4096, 904]);
    }

    #[test]
    fn conjecture_bound_values() {
        assert_eq!(conjecture_bound(2), 0.5);
        assert!((conjecture_bound(3) - 5.0 / 9.0).abs() < 1e-15);
        for d in [10, 1000, 1_000_000] {
            assert!(conjecture_bound(d) <= 1.0 - (-1.0f64).exp() + 1e-12);
        }
    }

    #[test]
    fn no_collapse_and_always_no_is_perfect() {
        let psi = StateVector::from_weights(&[0.3, 0.7]).unwrap();
        let scen = CollapseScenario::basis(0.0, CollapseBasis::standard(2)).unwrap();
        let r = simulate_reliability(&psi, &scen, &Effect::zero(2), 1000, &RngStream::new(1)).unwrap();
        assert_eq!(r.successes, 1000);
        assert_eq!(r.z_score, 0.0);
    }

    #[test]
    fn trivial_effects_never_win() {
        for p in [0.2, 0.5, 0.7] {
            for e in [Effect::zero(3), Effect::identity(3)] {
                let est = estimate_lambda(&e, p, 5000, &RngStream::new(3)).unwrap();
                assert_eq!(est.count, 0);
            }
        }
    }
}
