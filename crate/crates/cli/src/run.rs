//! Executes a validated [`RunSpec`].

use std::io::Write;

use gi_core::interferometers::{qfi_of, ActiveInputParams, InputParams, PassiveInputParams};
use gi_core::optimizer::{
    optimize_family, sweep, Bound, Family, OptimizerSettings, SearchBox, SweepMeta, SweepPoint,
    SweepResult,
};

use crate::emit::emit;
use crate::spec::{Command, ConfigArg, RunSpec, DEFAULT_R2};
use crate::verify::{print_table, run_suite};
use crate::CliError;

pub fn run(spec: &RunSpec) -> Result<(), CliError> {
    if spec.command == Command::Verify {
        let rows = run_suite(spec.suite.unwrap_or_default(), spec.seed);
        print_table(&rows, &mut std::io::stdout()).map_err(|e| CliError::Io(e.to_string()))?;
        let failed: Vec<&str> = rows.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
        return match failed.as_slice() {
            [] => Ok(()),
            names => Err(CliError::Numeric(format!("failed identities: {}", names.join(", ")))),
        };
    }
    let config = spec.config.ok_or_else(|| CliError::Usage("missing --config".into()))?;
    let family = config.family(spec.r2.unwrap_or(DEFAULT_R2));
    let result = match spec.command {
        Command::Qfi if spec.params.contains_key("alpha") => physical_qfi(spec, config)?,
        Command::Qfi | Command::Sensitivity => single_value(spec, &family)?,
        Command::Optimize | Command::Sweep => optimized(spec, &family)?,
        Command::Verify => unreachable!(),
    };
    write_output(spec, &emit(&result, spec, spec.format))?;
    match result.failures.as_slice() {
        [] => Ok(()),
        fails => Err(CliError::Numeric(
            fails
                .iter()
                .map(|f| format!("N_tot = {}: {}", f.n_tot, f.message))
                .collect::<Vec<_>>()
                .join("; "),
        )),
    }
}

fn write_output(spec: &RunSpec, bytes: &[u8]) -> Result<(), CliError> {
    match &spec.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn settings(spec: &RunSpec) -> OptimizerSettings {
    let base = OptimizerSettings::default();
    OptimizerSettings {
        grid_points: spec.grid_points.unwrap_or(base.grid_points),
        seed: spec.seed,
        threads: spec.threads,
        ..base
    }
}

fn meta(spec: &RunSpec, label: &str, names: &[&str], bx: SearchBox) -> SweepMeta {
    let settings = settings(spec);
    SweepMeta {
        label: label.to_string(),
        eta: spec.eta,
        param_names: names.iter().map(|s| s.to_string()).collect(),
        search_box: bx,
        settings,
        seed: spec.seed,
    }
}

fn frozen_box(names: &[&str], values: &[f64]) -> Result<SearchBox, CliError> {
    Ok(SearchBox::new(
        names.iter().zip(values).map(|(&n, &v)| (n, Bound::Frozen(v))).collect(),
    )?)
}

fn single_n(spec: &RunSpec) -> Result<f64, CliError> {
    spec.ntot
        .and_then(|g| g.as_single())
        .ok_or_else(|| CliError::Usage("a single --ntot is required".into()))
}

fn single_value(spec: &RunSpec, family: &Family) -> Result<SweepResult, CliError> {
    let n = single_n(spec)?;
    let names = family.param_names();
    let p: Vec<f64> = names.iter().map(|k| spec.params[*k]).collect();
    let value = family.evaluate(n, spec.eta, &p)?;
    Ok(SweepResult {
        meta: meta(spec, family.label(), names, frozen_box(names, &p)?),
        points: vec![SweepPoint { n_tot: n, value, params: p }],
        failures: vec![],
    })
}

fn physical_qfi(spec: &RunSpec, config: ConfigArg) -> Result<SweepResult, CliError> {
    let names = config.physical_names();
    let p: Vec<f64> = names.iter().map(|k| spec.params[*k]).collect();
    let input = match config {
        ConfigArg::QfiPassive => InputParams::Passive(passive_from_physical(p[0], p[1], p[2], p[3], p[4])?),
        _ => InputParams::Active(ActiveInputParams::from_physical(p[0], p[1], p[2], p[3], 0.0)?),
    };
    let value = qfi_of(&input)?;
    Ok(SweepResult {
        meta: meta(spec, config.family(DEFAULT_R2).label(), names, frozen_box(names, &p)?),
        points: vec![SweepPoint {
            n_tot: input.n_tot(),
            value,
            params: p,
        }],
        failures: vec![],
    })
}

/// Fractions of a passive input with coherent amplitudes `α, γ` and squeezing `ξ, r`.
pub fn passive_from_physical(
    alpha: f64,
    gamma: f64,
    xi: f64,
    r: f64,
    theta: f64,
) -> Result<PassiveInputParams, CliError> {
    if [alpha, gamma, xi, r].iter().any(|&x| x < 0.0) {
        return Err(CliError::Usage("alpha, gamma, xi and r must be >= 0".into()));
    }
    let (sx, sr) = (xi.sinh().powi(2), r.sinh().powi(2));
    let coh = alpha * alpha + gamma * gamma;
    let n = coh + sx + sr;
    if n <= 0.0 {
        return Err(CliError::Numeric("input state is the vacuum".into()));
    }
    let delta = if coh > 0.0 { alpha * alpha / coh } else { 0.5 };
    Ok(PassiveInputParams::new(n, delta, (sx + sr) / n, sx / n, theta, 0.0))
}

fn optimized(spec: &RunSpec, family: &Family) -> Result<SweepResult, CliError> {
    let mut bx = if spec.working_point {
        family.working_point_box()
    } else {
        family.default_box()
    };
    for (k, &v) in &spec.params {
        bx = bx.freeze(k, v)?;
    }
    let settings = settings(spec);
    let grid = spec
        .ntot
        .ok_or_else(|| CliError::Usage("missing --ntot".into()))?
        .values();
    if spec.command == Command::Optimize {
        let point = optimize_family(family, grid[0], spec.eta, &bx, &settings, &[])?;
        return Ok(SweepResult {
            meta: meta(spec, family.label(), family.param_names(), bx),
            points: vec![point],
            failures: vec![],
        });
    }
    Ok(sweep(family, spec.eta, &grid, &bx, &settings)?)
}
