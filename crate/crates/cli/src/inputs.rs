//! Parsers for state, grid, effect and file arguments.

use std::fs;
use std::path::Path;

use collapse_core::linalg::ComplexMatrix;
use collapse_core::model::WireMatrix;
use collapse_core::{CollapseBasis, DensityMatrix, Effect, StateVector};

use crate::error::{CmdResult, Failure};

/// Grid points closer than this to `stop` (relative to the step) snap onto it.
const GRID_SNAP: f64 = 1e-9;
/// Grid values are rounded to this many decimals to shed accumulation noise.
const GRID_DECIMALS: i32 = 12;
/// Guard against runaway grids.
const MAX_GRID_POINTS: usize = 10_000_000;

pub fn read_text(path: &Path) -> CmdResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn file_ref(spec: &str) -> Option<&Path> {
    spec.strip_prefix('@').map(Path::new)
}

/// `w1,w2,...` (normalized weights, real nonnegative amplitudes), `uniform`
/// (needs `dim`), or `@file.json`.
pub fn parse_psi(spec: &str, dim: Option<usize>) -> CmdResult<StateVector> {
    let spec = spec.trim();
    let psi = if let Some(path) = file_ref(spec) {
        StateVector::from_json(&read_text(path)?)?
    } else if spec == "uniform" {
        let d = dim.ok_or_else(|| Failure::usage("`--psi uniform` needs a dimension (--dim)"))?;
        if d < 2 {
            return Err(Failure::usage(format!("dimension must be at least 2, got {d}")));
        }
        StateVector::uniform(d)
    } else {
        let weights = parse_list(spec, "weight")?;
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Failure::usage(format!("weights must be nonnegative: `{spec}`")));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Failure::usage("weights sum to zero"));
        }
        StateVector::from_weights(&weights)?
    };
    if let Some(d) = dim {
        if d != psi.dim() {
            return Err(Failure::usage(format!(
                "state has dimension {} but --dim is {d}",
                psi.dim()
            )));
        }
    }
    if psi.dim() < 2 {
        return Err(Failure::usage("state dimension must be at least 2"));
    }
    Ok(psi)
}

fn parse_list(spec: &str, what: &str) -> CmdResult<Vec<f64>> {
    spec.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Failure::usage(format!("invalid {what} `{tok}`")))
        })
        .collect()
}

pub fn parse_sizes(spec: &str) -> CmdResult<Vec<usize>> {
    spec.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Failure::usage(format!("invalid block size `{tok}`")))
        })
        .collect()
}

/// A single value or `start:stop:step`. Points are `start + i·step` while
/// they stay within half a step of `stop`; a point within rounding noise
/// of `stop` is replaced by `stop`. All values must lie in `[lo, hi]`.
pub fn parse_grid(spec: &str, lo: f64, hi: f64) -> CmdResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Failure::usage(format!("invalid number `{s}` in grid `{spec}`")))
    };
    let values = match parts.as_slice() {
        [v] => vec![num(v)?],
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 {
                return Err(Failure::usage(format!("grid step must be positive in `{spec}`")));
            }
            if stop < start {
                return Err(Failure::usage(format!("grid stop precedes start in `{spec}`")));
            }
            let steps = ((stop - start) / step + 0.5).floor();
            if steps >= MAX_GRID_POINTS as f64 {
                return Err(Failure::usage(format!("grid `{spec}` has too many points")));
            }
            let scale = 10f64.powi(GRID_DECIMALS);
            (0..=steps as usize)
                .map(|i| {
                    let v = start + i as f64 * step;
                    if (v - stop).abs() <= GRID_SNAP * step {
                        stop
                    } else {
                        (v * scale).round() / scale
                    }
                })
                .collect()
        }
        _ => {
            return Err(Failure::usage(format!(
                "expected a value or start:stop:step, got `{spec}`"
            )))
        }
    };
    if let Some(bad) = values.iter().find(|&&v| !(lo..=hi).contains(&v)) {
        return Err(Failure::usage(format!("grid value {bad} is outside [{lo}, {hi}]")));
    }
    Ok(values)
}

pub fn check_prior(p: f64) -> CmdResult<f64> {
    if p.is_finite() && (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Failure::usage(format!("prior {p} is outside [0, 1]")))
    }
}

fn wire_from_file(path: &Path) -> CmdResult<WireMatrix> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::usage(format!("{}: malformed JSON: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> CmdResult<ComplexMatrix> {
    Ok(wire_from_file(path)?.into_matrix()?)
}

pub fn read_density(path: &Path) -> CmdResult<DensityMatrix> {
    let m = read_matrix(path)?;
    DensityMatrix::new(m).map_err(|e| Failure::Invariant(format!("{}: {e}", path.display())))
}

/// `@file.json` holding a matrix whose columns are the basis vectors.
pub fn parse_basis(spec: Option<&str>, dim: usize) -> CmdResult<CollapseBasis> {
    let Some(spec) = spec else {
        return Ok(CollapseBasis::standard(dim));
    };
    if spec.trim() == "standard" {
        return Ok(CollapseBasis::standard(dim));
    }
    let path = file_ref(spec.trim())
        .ok_or_else(|| Failure::usage(format!("basis must be `standard` or @file, got `{spec}`")))?;
    let basis = CollapseBasis::from_matrix(read_matrix(path)?)?;
    if basis.dim() != dim {
        return Err(Failure::usage(format!(
            "basis has dimension {} but {dim} is required",
            basis.dim()
        )));
    }
    Ok(basis)
}

pub fn read_effect(path: &Path, dim: usize) -> CmdResult<Effect> {
    let e = Effect::new(read_matrix(path)?)?;
    if e.dim() != dim {
        return Err(Failure::usage(format!(
            "effect has dimension {} but {dim} is required",
            e.dim()
        )));
    }
    Ok(e)
}

pub fn effect_file(spec: &str) -> Option<&Path> {
    file_ref(spec.trim())
}

/// `@ops.json`: a JSON array of wire matrices.
pub fn read_operators(spec: &str) -> CmdResult<Vec<ComplexMatrix>> {
    let path = file_ref(spec.trim())
        .ok_or_else(|| Failure::usage(format!("operators must be given as @file, got `{spec}`")))?;
    let wires: Vec<WireMatrix> = serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::usage(format!("{}: malformed JSON: {e}", path.display())))?;
    if wires.is_empty() {
        return Err(Failure::usage("operator list is empty"));
    }
    wires.into_iter().map(|w| Ok(w.into_matrix()?)).collect()
}

/// Orthogonal projectors onto consecutive runs of standard basis vectors.
pub fn block_projectors(sizes: &[usize], dim: usize) -> CmdResult<Vec<ComplexMatrix>> {
    let total: usize = sizes.iter().sum();
    if total != dim {
        return Err(Failure::usage(format!(
            "block sizes sum to {total} but the state has dimension {dim}"
        )));
    }
    let mut start = 0;
    Ok(sizes
        .iter()
        .map(|&n| {
            let diag: Vec<f64> = (0..dim)
                .map(|k| if (start..start + n).contains(&k) { 1.0 } else { 0.0 })
                .collect();
            start += n;
            ComplexMatrix::from_real_diagonal(&diag)
        })
        .collect())
}
