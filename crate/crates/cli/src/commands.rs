use std::time::Instant;

use collapse_core::discrimination::{
    blind_guess_thresholds, reduce_dimension, rmax_bounds_known_psi, rmax_known_psi, ZERO_COMPONENT_TOL,
};
use collapse_core::montecarlo::{conjecture_bound, sample_effect, EffectStrategy, ScanConfig, CHUNK_SIZE};
use collapse_core::{
    apply_collapse_channel, conjecture_scan, estimate_lambda, helstrom, simulate_reliability, CollapseScenario,
    CollapseStructure, Effect, Error, RngStream, StateVector,
};
use serde_json::{json, Map, Value};

use crate::args::{
    EllipseArgs, HelstromArgs, LambdaArgs, RmaxArgs, ScenarioArgs, ScenarioKind, SimulateArgs, Strategy,
};
use crate::error::{CmdResult, Failure, EXIT_DEGENERATE};
use crate::inputs::{
    block_projectors, check_prior, effect_file, parse_basis, parse_grid, parse_psi, parse_sizes, read_density,
    read_effect, read_matrix, read_operators,
};
use crate::output::{matrix_json, Report, Table};

/// Estimates further than this many standard errors from the analytic value get a note.
const Z_NOTE: f64 = 4.0;

fn blind(p: f64) -> f64 {
    p.max(1.0 - p)
}

fn wall_time(start: Instant, timing: bool) -> Option<f64> {
    timing.then(|| start.elapsed().as_secs_f64())
}

fn gnuplot_preamble(data: &str, xlabel: &str, curves: &[(usize, &str)]) -> Vec<String> {
    let plots: Vec<String> = curves
        .iter()
        .enumerate()
        .map(|(i, (col, title))| {
            let file = if i == 0 { format!("\"{data}\"") } else { "\"\"".into() };
            format!("{file} every ::1 using 1:{col} with lines title \"{title}\"")
        })
        .collect();
    vec![
        format!("gnuplot: save this output (--format csv) as {data}, then load this script"),
        "set datafile separator \",\"".into(),
        format!("set xlabel \"{xlabel}\""),
        "set ylabel \"reliability\"".into(),
        format!("plot {}", plots.join(", ")),
    ]
}

pub fn rmax(a: &RmaxArgs) -> CmdResult<Report> {
    let psi = parse_psi(&a.psi, a.dim)?;
    let grid = parse_grid(&a.p, 0.0, 1.0)?;
    let basis = parse_basis(a.basis.as_deref(), psi.dim())?;
    let red = reduce_dimension(&psi, &basis, ZERO_COMPONENT_TOL)?;

    let mut table = Table::new(&["p", "r_max", "lower", "upper", "delta_upper", "blind_guess"]);
    let mut rows = Vec::with_capacity(grid.len());
    for &p in &grid {
        let r = rmax_known_psi(&psi, p, &basis)?;
        let b = rmax_bounds_known_psi(&psi, p, &basis)?;
        table.push(vec![
            p.into(),
            r.into(),
            b.lower.into(),
            b.upper.into(),
            b.delta_upper.into(),
            blind(p).into(),
        ]);
        rows.push(json!({
            "p": p, "r_max": r, "lower": b.lower, "upper": b.upper,
            "delta_upper": b.delta_upper, "blind_guess": blind(p),
        }));
    }

    let mut notes = Vec::new();
    if red.degenerate {
        notes.push(format!(
            "the state is collapse basis vector {} up to phase; collapse leaves it unchanged, \
             so no experiment beats blind guessing and r_max = max(p, 1-p)",
            red.kept[0]
        ));
    } else if red.kept.len() < psi.dim() {
        notes.push(format!(
            "components outside {:?} vanish; the optimum is computed in the {}-dimensional span they leave",
            red.kept,
            red.kept.len()
        ));
    }
    let json = json!({
        "command": "rmax",
        "dim": psi.dim(),
        "effective_dim": red.kept.len(),
        "degenerate": red.degenerate,
        "notes": notes,
        "rows": rows,
    });
    let mut report = Report::new(table, json);
    if a.gnuplot {
        report.preamble = gnuplot_preamble(
            "rmax.csv",
            "p",
            &[
                (2, "r_max"),
                (3, "lower"),
                (4, "upper"),
                (5, "delta bound"),
                (6, "blind guess"),
            ],
        );
    }
    report.notes = notes;
    if red.degenerate {
        report.status = EXIT_DEGENERATE;
    }
    Ok(report)
}

pub fn ellipse(a: &EllipseArgs) -> CmdResult<Report> {
    let p = check_prior(a.p)?;
    let grid = parse_grid(&a.grid, 0.0, 1.0)?;
    let basis = collapse_core::CollapseBasis::standard(2);
    let mut table = Table::new(&["psi1_sq", "r_max"]);
    let mut rows = Vec::with_capacity(grid.len());
    let mut peak = (f64::NAN, f64::NEG_INFINITY);
    for &w in &grid {
        let psi = StateVector::from_weights(&[w, 1.0 - w])?;
        let r = rmax_known_psi(&psi, p, &basis)?;
        if r > peak.1 {
            peak = (w, r);
        }
        table.push(vec![w.into(), r.into()]);
        rows.push(json!({ "psi1_sq": w, "r_max": r }));
    }
    let json = json!({
        "command": "ellipse",
        "p": p,
        "peak": { "psi1_sq": peak.0, "r_max": peak.1 },
        "rows": rows,
    });
    let mut report = Report::new(table, json);
    if a.gnuplot {
        report.preamble = gnuplot_preamble("ellipse.csv", "|psi_1|^2", &[(2, "r_max")]);
    }
    Ok(report)
}

pub fn helstrom_cmd(a: &HelstromArgs) -> CmdResult<Report> {
    let p = check_prior(a.p)?;
    let rho1 = read_density(&a.rho1)?;
    let rho2 = read_density(&a.rho2)?;
    if rho1.dim() != rho2.dim() {
        return Err(Failure::usage(format!(
            "dimensions differ: {} and {}",
            rho1.dim(),
            rho2.dim()
        )));
    }
    let res = helstrom(&rho1, &rho2, p)?;
    let standard = collapse_core::CollapseBasis::standard(rho1.dim());
    let mut notes = Vec::new();
    let thresholds = match blind_guess_thresholds(&rho1, &rho2, Some(&standard)) {
        Ok(t) => Some(t),
        Err(Error::RankDeficient) => {
            notes.push("thresholds need full-rank matrices or a standard-basis collapse pair; omitted".into());
            None
        }
        Err(e) => return Err(e.into()),
    };
    if !res.is_unique() {
        notes.push(format!(
            "the operand has a {}-dimensional null space; the optimal effect is not unique",
            res.zero_eigenspace_dim
        ));
    }
    let table = Table::key_value(vec![
        ("p", p.into()),
        ("r_max", res.r_max.into()),
        ("blind_guess", blind(p).into()),
        ("lambda_plus", res.lambda_plus.into()),
        ("lambda_minus", res.lambda_minus.into()),
        ("p_lo", thresholds.map(|t| t.p_lo).into()),
        ("p_hi", thresholds.map(|t| t.p_hi).into()),
        ("unique", res.is_unique().into()),
    ]);
    let json = json!({
        "command": "helstrom",
        "p": p,
        "r_max": res.r_max,
        "blind_guess": blind(p),
        "lambda_plus": res.lambda_plus,
        "lambda_minus": res.lambda_minus,
        "thresholds": thresholds,
        "unique": res.is_unique(),
        "e_opt": res.e_opt,
        "notes": notes,
    });
    let mut report = Report::new(table, json);
    report.sections.push(("e_opt".into(), res.e_opt.matrix().clone()));
    report.notes = notes;
    Ok(report)
}

/// Splits `total` into `(dim_s, dim_t)` from whichever factor is given.
fn factor_dims(total: usize, dim_s: Option<usize>, dim_t: Option<usize>) -> CmdResult<(usize, usize)> {
    let (s, t) = match (dim_s, dim_t) {
        (Some(s), Some(t)) => (s, t),
        (Some(s), None) if s > 0 => (s, total / s),
        (None, Some(t)) if t > 0 => (total / t, t),
        _ => return Err(Failure::usage("bipartite scenarios need --dim-s or --dim-t")),
    };
    if s == 0 || t == 0 || s * t != total {
        return Err(Failure::usage(format!(
            "dimensions {s} x {t} do not match the state dimension {total}"
        )));
    }
    Ok((s, t))
}

fn simulate_structure(a: &SimulateArgs, total: usize) -> CmdResult<CollapseStructure> {
    let basis = a.basis.as_deref();
    Ok(match a.scenario {
        ScenarioKind::Basis => CollapseStructure::Basis(parse_basis(basis, total)?),
        ScenarioKind::FactorS => {
            let (s, t) = factor_dims(total, a.dim_s, a.dim_t)?;
            CollapseStructure::FactorSBasis {
                dim_t: t,
                basis_s: parse_basis(basis, s)?,
            }
        }
        ScenarioKind::FactorT => {
            let (s, t) = factor_dims(total, a.dim_s, a.dim_t)?;
            CollapseStructure::FactorTBasis {
                dim_s: s,
                basis_t: parse_basis(basis, t)?,
            }
        }
        ScenarioKind::Joint => {
            let (s, t) = factor_dims(total, a.dim_s, a.dim_t)?;
            CollapseStructure::JointBasis {
                basis: parse_basis(basis, total)?,
                dim_s: s,
                dim_t: t,
            }
        }
        ScenarioKind::Blocks => {
            let spec = a
                .blocks
                .as_deref()
                .ok_or_else(|| Failure::usage("--scenario blocks needs --blocks"))?;
            CollapseStructure::Subspaces(block_projectors(&parse_sizes(spec)?, total)?)
        }
    })
}

pub fn simulate(a: &SimulateArgs, seed: u64, timing: bool) -> CmdResult<Report> {
    let start = Instant::now();
    let p = check_prior(a.p)?;
    let psi = parse_psi(&a.psi, a.dim)?;
    let scenario = CollapseScenario::new(p, simulate_structure(a, psi.dim())?)?;
    let (ds, dt) = scenario.observed_dims();
    let effect = match a.effect.trim() {
        "blind" => Effect::blind_guess(ds, p),
        "zero" => Effect::zero(ds),
        "identity" => Effect::identity(ds),
        "optimal" => {
            let pair = apply_collapse_channel(&psi, &scenario)?;
            helstrom(&pair.rho1, &pair.rho2, p)?.e_opt
        }
        "complement" if dt == 1 => Effect::complement_of(psi.amplitudes())?,
        "complement" => return Err(Failure::usage("`complement` needs a state on the observed space alone")),
        spec => match effect_file(spec) {
            Some(path) => read_effect(path, ds)?,
            None => return Err(Failure::usage(format!("unknown effect `{spec}`"))),
        },
    };
    if a.trials == 0 {
        return Err(Failure::usage("--trials must be positive"));
    }
    let sim = simulate_reliability(&psi, &scenario, &effect, a.trials, &RngStream::new(seed))?;

    let mut notes = Vec::new();
    if sim.z_score.abs() > Z_NOTE {
        notes.push(format!(
            "estimate lies {:.2} standard errors from the analytic value",
            sim.z_score
        ));
    }
    let table = Table::key_value(vec![
        ("successes", sim.successes.into()),
        ("trials", sim.trials.into()),
        ("estimate", sim.estimate.into()),
        ("analytic", sim.analytic.into()),
        ("z_score", sim.z_score.into()),
    ]);
    let mut json = match serde_json::to_value(&sim).expect("report serialization is infallible") {
        Value::Object(m) => m,
        _ => unreachable!("struct serializes to an object"),
    };
    json.insert("p".into(), json!(p));
    json.insert("effect".into(), json!(a.effect.trim()));
    json.insert("metadata".into(), metadata(seed, wall_time(start, timing)));
    let mut report = Report::new(table, Value::Object(json));
    report.notes = notes;
    Ok(report)
}

fn metadata(seed: u64, wall: Option<f64>) -> Value {
    let mut m = Map::new();
    m.insert("seed".into(), json!(seed));
    m.insert("chunk_size".into(), json!(CHUNK_SIZE));
    if let Some(t) = wall {
        m.insert("wall_time_seconds".into(), json!(t));
    }
    Value::Object(m)
}

fn strategy(s: Strategy) -> EffectStrategy {
    match s {
        Strategy::Spectral => EffectStrategy::Spectral,
        Strategy::Complement => EffectStrategy::Complement,
        Strategy::Mixed => EffectStrategy::Mixed,
    }
}

/// Random effects come from substream 0 of the seed, estimates from substream 1.
pub fn lambda(a: &LambdaArgs, seed: u64, timing: bool) -> CmdResult<Report> {
    if a.scan {
        return lambda_scan(a, seed, timing);
    }
    let start = Instant::now();
    let spec = a
        .effect
        .as_deref()
        .ok_or_else(|| Failure::usage("lambda needs --effect or --scan"))?
        .trim();
    let p = a.p.ok_or_else(|| Failure::usage("lambda --effect needs --p"))?;
    let p = check_open_prior(p)?;
    let root = RngStream::new(seed);
    let effect = match spec {
        "zero" => Effect::zero(check_dim(a.dim)?),
        "identity" => Effect::identity(check_dim(a.dim)?),
        "blind" => Effect::blind_guess(check_dim(a.dim)?, p),
        "random" => sample_effect(check_dim(a.dim)?, strategy(a.strategy), 0, &mut root.substream(0)),
        other => match effect_file(other) {
            Some(path) => Effect::new(read_matrix(path)?)?,
            None => return Err(Failure::usage(format!("unknown effect `{other}`"))),
        },
    };
    check_dim(effect.dim())?;
    if a.samples == 0 {
        return Err(Failure::usage("--samples must be positive"));
    }
    let est = estimate_lambda(&effect, p, a.samples, &root.substream(1))?;
    let table = Table::key_value(vec![
        ("p", est.p.into()),
        ("dim", est.dim.into()),
        ("fraction", est.fraction.into()),
        ("std_error", est.std_error.into()),
        ("count", est.count.into()),
        ("n_samples", est.n_samples.into()),
        ("conjecture_bound", est.conjecture_bound.into()),
        ("tie_at_half", est.tie_at_half.into()),
    ]);
    let mut notes = Vec::new();
    if est.tie_at_half {
        notes.push("p = 0.5: every effect ties with blind guessing on average; wins are counted pointwise".into());
    }
    let mut json = match serde_json::to_value(&est).expect("report serialization is infallible") {
        Value::Object(m) => m,
        _ => unreachable!("struct serializes to an object"),
    };
    json.insert("effect".into(), json!(spec));
    json.insert("metadata".into(), metadata(seed, wall_time(start, timing)));
    let mut report = Report::new(table, Value::Object(json));
    report.notes = notes;
    Ok(report)
}

fn check_dim(d: usize) -> CmdResult<usize> {
    if d < 2 {
        Err(Failure::usage(format!("dimension must be at least 2, got {d}")))
    } else {
        Ok(d)
    }
}

fn check_open_prior(p: f64) -> CmdResult<f64> {
    let p = check_prior(p)?;
    if p == 0.0 || p == 1.0 {
        return Err(Failure::usage("the prior must lie strictly between 0 and 1"));
    }
    Ok(p)
}

fn lambda_scan(a: &LambdaArgs, seed: u64, timing: bool) -> CmdResult<Report> {
    let start = Instant::now();
    let p_grid = parse_grid(&a.p_grid, 0.0, 1.0)?;
    for &p in &p_grid {
        check_open_prior(p)?;
    }
    if a.n_effects == 0 || a.samples == 0 {
        return Err(Failure::usage("--n-effects and --samples must be positive"));
    }
    let cfg = ScanConfig {
        dim: check_dim(a.dim)?,
        p_grid,
        strategy: strategy(a.strategy),
        n_effects: a.n_effects,
        n_samples: a.samples,
    };
    let mut scan = conjecture_scan(&cfg, &RngStream::new(seed))?;
    scan.metadata.wall_time_seconds = wall_time(start, timing);

    let mut table = Table::new(&[
        "p",
        "max_fraction",
        "mean_fraction",
        "argmax_effect",
        "std_error_at_max",
    ]);
    for pt in &scan.points {
        table.push(vec![
            pt.p.into(),
            pt.max_fraction.into(),
            pt.mean_fraction.into(),
            pt.argmax_effect.into(),
            pt.std_error_at_max.into(),
        ]);
    }
    let json = serde_json::to_value(&scan).expect("report serialization is infallible");
    let mut report = Report::new(table, json);
    debug_assert_eq!(scan.conjecture_bound, conjecture_bound(cfg.dim));
    report.preamble = vec![
        format!("dim = {}", scan.dim),
        format!("conjecture_bound = {:?}", scan.conjecture_bound),
        format!("max_fraction = {:?}", scan.max_fraction),
        format!("estimates above 0.5 = {}", scan.half_exceeding.len()),
        format!("violations = {}", scan.violations.len()),
    ];
    report.notes = scan.notes.clone();
    Ok(report)
}

pub fn scenario(a: &ScenarioArgs) -> CmdResult<Report> {
    let p = check_prior(a.p)?;
    if a.dim_t == 0 {
        return Err(Failure::usage("--dim-t must be positive"));
    }
    let total_hint = a.dim_s.map(|s| s * a.dim_t);
    let psi = parse_psi(&a.state, total_hint)?;
    let (ds, dt) = factor_dims(psi.dim(), a.dim_s, Some(a.dim_t))?;
    let basis = a.basis.as_deref();
    let structure = match a.variant {
        1 => CollapseStructure::FactorSBasis {
            dim_t: dt,
            basis_s: parse_basis(basis, ds)?,
        },
        2 => CollapseStructure::FactorTBasis {
            dim_s: ds,
            basis_t: parse_basis(basis, dt)?,
        },
        3 => CollapseStructure::JointBasis {
            basis: parse_basis(basis, psi.dim())?,
            dim_s: ds,
            dim_t: dt,
        },
        _ => {
            if dt != 1 {
                return Err(Failure::usage("variant 4 acts on a single system; omit --dim-t"));
            }
            match (&a.blocks, &a.operators) {
                (Some(spec), _) => CollapseStructure::Subspaces(block_projectors(&parse_sizes(spec)?, psi.dim())?),
                (None, Some(spec)) if a.unsharp => CollapseStructure::Unsharp(read_operators(spec)?),
                (None, Some(spec)) => CollapseStructure::Subspaces(read_operators(spec)?),
                (None, None) => return Err(Failure::usage("variant 4 needs --blocks or --operators")),
            }
        }
    };
    let scen = CollapseScenario::new(p, structure)?;
    let pair = apply_collapse_channel(&psi, &scen)?;
    let res = helstrom(&pair.rho1, &pair.rho2, p)?;

    let mut notes = Vec::new();
    if a.variant == 2 {
        notes.push("collapse on T leaves the state of S unchanged; blind guessing is optimal".into());
    }
    let table = Table::key_value(vec![
        ("variant", (a.variant as u64).into()),
        ("dim_s", ds.into()),
        ("dim_t", dt.into()),
        ("p", p.into()),
        ("r_max", res.r_max.into()),
        ("blind_guess", blind(p).into()),
        ("lambda_plus", res.lambda_plus.into()),
        ("lambda_minus", res.lambda_minus.into()),
    ]);
    let json = json!({
        "command": "scenario",
        "variant": a.variant,
        "dim_s": ds,
        "dim_t": dt,
        "p": p,
        "r_max": res.r_max,
        "blind_guess": blind(p),
        "lambda_plus": res.lambda_plus,
        "lambda_minus": res.lambda_minus,
        "rho1": matrix_json(pair.rho1.matrix()),
        "rho2": matrix_json(pair.rho2.matrix()),
        "e_opt": res.e_opt,
        "notes": notes,
    });
    let mut report = Report::new(table, json);
    report.sections = vec![
        ("rho1 (collapsed)".into(), pair.rho1.matrix().clone()),
        ("rho2 (uncollapsed)".into(), pair.rho2.matrix().clone()),
        ("e_opt".into(), res.e_opt.matrix().clone()),
    ];
    report.notes = notes;
    Ok(report)
}
