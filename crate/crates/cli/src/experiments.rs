use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use weakmeas_core::fidelity::fidelity_from_s2;
use weakmeas_core::{
    avg_fidelity_curve, avg_fidelity_single, compare_propagator_path, completeness_residual,
    drift_purity, integrate_paths, saturation_value, time_from_count, BlochVector, Equation,
    FidelityMethod, NoisePath, Observable, PathInitial, QuadratureSpec, RandomStream, SdeConfig,
    TimePoint, Vec3,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;
use crate::output::{sidecar_path, write_json, CsvSink};

pub const VERSION: &str = env!("WEAKMEAS_VERSION");

/// Default spacing of recorded times when `t_record` is absent.
pub const DEFAULT_T_RECORD: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct Sidecar<'a> {
    pub version: &'a str,
    pub experiment: &'a str,
    pub config: &'a ExperimentConfig,
    pub columns: &'a [&'a str],
    pub rows: usize,
    pub summary: Value,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub csv_path: PathBuf,
    pub sidecar_path: PathBuf,
    pub rows: usize,
    pub summary: Value,
}

/// Validates the config, runs the experiment on the current rayon pool and
/// writes the CSV and its JSON sidecar.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunReport, CliError> {
    let exp = config.validate()?;
    let csv_path = PathBuf::from(config.out_path.as_deref().unwrap_or_default());
    let mut sink = CsvSink::create(&csv_path, exp.columns())?;
    let summary = match exp {
        Experiment::Saturation => saturation(config, &mut sink)?,
        Experiment::Drift => drift(config, &mut sink)?,
        Experiment::Single => single(config, &mut sink)?,
        Experiment::Equivalence => equivalence(config, &mut sink)?,
        Experiment::Propagator => propagator(config, &mut sink)?,
        Experiment::Completeness => completeness(config, &mut sink)?,
        Experiment::SequenceVsContinuum => sequence_vs_continuum(config, &mut sink)?,
    };
    let rows = sink.finish()?;
    let side = sidecar_path(&csv_path);
    write_json(
        &side,
        &Sidecar {
            version: VERSION,
            experiment: exp.name(),
            config,
            columns: exp.columns(),
            rows,
            summary: summary.clone(),
        },
    )?;
    Ok(RunReport {
        csv_path,
        sidecar_path: side,
        rows,
        summary,
    })
}

fn seed(c: &ExperimentConfig) -> u64 {
    c.seed.expect("validated")
}

/// `0, stride, 2·stride, …` up to and including `last`.
fn counts(last: usize, stride: usize) -> Vec<usize> {
    let mut ns: Vec<usize> = (0..=last).step_by(stride.max(1)).collect();
    if ns.last() != Some(&last) {
        ns.push(last);
    }
    ns
}

fn record_stride(dt: f64, t_record: f64) -> Result<usize, CliError> {
    let ratio = t_record / dt;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio {
        return Err(CliError::Validation(format!(
            "field 't_record': {t_record} is not a positive multiple of dt = {dt}"
        )));
    }
    Ok(k as usize)
}

fn sde_config(c: &ExperimentConfig) -> Result<SdeConfig, CliError> {
    let dt = c.dt.expect("validated");
    let t_end = c.t_end.expect("validated");
    let stride = record_stride(dt, c.t_record.unwrap_or(DEFAULT_T_RECORD).min(t_end))?;
    Ok(SdeConfig::new(dt, t_end, stride)?.with_scheme(c.scheme()))
}

fn saturation(c: &ExperimentConfig, sink: &mut CsvSink) -> Result<Value, CliError> {
    let delta = c.single_delta();
    let ns = counts(c.n_steps.expect("validated"), c.n_stride.unwrap_or(1));
    let curve = avg_fidelity_curve(&ns, delta, c.trajectories.expect("validated"), seed(c))?;
    let mut max_dev: f64 = 0.0;
    for (n, f) in &curve {
        let closed = saturation_value(*n, delta);
        max_dev = max_dev.max((f.value - closed).abs());
        sink.write_row(&[
            (*n).into(),
            time_from_count(*n, delta).into(),
            f.value.into(),
            f.standard_error.into(),
            closed.into(),
        ])?;
    }
    let last = curve.last().expect("at least n = 0").1;
    Ok(
        json!({ "max_abs_deviation": max_dev, "fbar_last": last.value, "fbar_last_se": last.standard_error }),
    )
}

fn drift(c: &ExperimentConfig, sink: &mut CsvSink) -> Result<Value, CliError> {
    let sde = sde_config(c)?;
    let series = integrate_paths(
        &sde,
        &PathInitial::Bloch(BlochVector::origin()),
        Equation::Purity,
        c.trajectories.expect("validated"),
        seed(c),
    )?;
    let mut max_dev: f64 = 0.0;
    for p in &series {
        let s = p.get(Observable::S2).expect("recorded");
        let closed = drift_purity(p.t);
        max_dev = max_dev.max((s.mean - closed).abs());
        sink.write_row(&[
            p.t.into(),
            s.mean.into(),
            s.standard_error().into(),
            closed.into(),
        ])?;
    }
    Ok(json!({ "max_abs_deviation": max_dev }))
}

fn single(c: &ExperimentConfig, sink: &mut CsvSink) -> Result<Value, CliError> {
    let samples = c.samples.expect("validated");
    for delta in c.deltas() {
        let f = avg_fidelity_single(delta, FidelityMethod::Direct, c.mode(), samples, seed(c))?;
        sink.write_row(&[delta.into(), f.value.into(), f.standard_error.into()])?;
    }
    Ok(json!({ "estimate_mode": c.mode() }))
}

fn equivalence(c: &ExperimentConfig, sink: &mut CsvSink) -> Result<Value, CliError> {
    let samples = c.samples.expect("validated");
    let mut max_z: f64 = 0.0;
    for delta in c.deltas() {
        let d = avg_fidelity_single(delta, FidelityMethod::Direct, c.mode(), samples, seed(c))?;
        let h = avg_fidelity_single(
            delta,
            FidelityMethod::Hypothetical,
            c.mode(),
            samples,
            seed(c),
        )?;
        max_z = max_z.max(d.z_score(&h));
        sink.write_row(&[
            delta.into(),
            d.value.into(),
            d.standard_error.into(),
            h.value.into(),
            h.standard_error.into(),
        ])?;
    }
    Ok(json!({ "max_z_score": max_z }))
}

fn propagator(c: &ExperimentConfig, sink: &mut CsvSink) -> Result<Value, CliError> {
    let sde = sde_config(c)?;
    let [x, y, z] = c.apriori.unwrap_or([0.0, 0.0, 1.0]);
    let apriori = BlochVector::clamped(Vec3::new(x, y, z), 1e-12)?.to_density();
    let mut rng = RandomStream::new(seed(c), 0);
    let path = NoisePath::sample(sde.steps(), sde.dt, &mut rng);
    let samples = compare_propagator_path(&apriori, &path, sde.record_stride, sde.scheme)?;
    let (mut max_dev, mut max_trace): (f64, f64) = (0.0, 0.0);
    for s in &samples {
        max_dev = max_dev.max(s.bloch_deviation);
        for tr in [s.tr_rho, s.tr_rho_prime, s.tr_rho_hypo] {
            max_trace = max_trace.max((tr - 1.0).abs());
        }
        sink.write_row(&[
            s.t.into(),
            s.tr_rho.into(),
            s.tr_rho_prime.into(),
            s.tr_rho_hypo.into(),
            s.bloch_deviation.into(),
        ])?;
    }
    Ok(json!({ "max_bloch_deviation": max_dev, "max_trace_defect": max_trace }))
}

fn completeness(c: &ExperimentConfig, sink: &mut CsvSink) -> Result<Value, CliError> {
    let mut worst: f64 = 0.0;
    for delta in c.deltas() {
        let r = completeness_residual(delta, QuadratureSpec::default())?;
        worst = worst.max(r);
        sink.write_row(&[delta.into(), r.into()])?;
    }
    Ok(json!({ "max_residual": worst }))
}

fn sequence_vs_continuum(c: &ExperimentConfig, sink: &mut CsvSink) -> Result<Value, CliError> {
    let delta = c.single_delta();
    let dt = c.dt.expect("validated");
    let stride = c.n_stride.unwrap_or(1);
    let n_last = c.n_steps.expect("validated") / stride * stride;
    if n_last == 0 {
        return Err(CliError::Validation(
            "field 'n_steps' must reach at least one n_stride".into(),
        ));
    }
    let ns: Vec<usize> = (0..=n_last).step_by(stride).collect();
    let trajectories = c.trajectories.expect("validated");
    let curve = avg_fidelity_curve(&ns, delta, trajectories, seed(c))?;

    let sde = SdeConfig::new(
        dt,
        time_from_count(n_last, delta),
        record_stride(dt, time_from_count(stride, delta))?,
    )?
    .with_scheme(c.scheme());
    let series: Vec<TimePoint> = integrate_paths(
        &sde,
        &PathInitial::Bloch(BlochVector::origin()),
        Equation::Bloch,
        trajectories,
        seed(c),
    )?;
    debug_assert_eq!(series.len(), ns.len());

    let (mut max_sde, mut max_closed): (f64, f64) = (0.0, 0.0);
    for ((n, f), p) in curve.iter().zip(&series) {
        let s2 = p.get(Observable::S2).expect("recorded");
        let (f_sde, se_sde) = (fidelity_from_s2(s2.mean), s2.standard_error() / 6.0);
        let closed = saturation_value(*n, delta);
        max_sde = max_sde.max((f.value - f_sde).abs());
        max_closed = max_closed.max((f.value - closed).abs());
        sink.write_row(&[
            (*n).into(),
            time_from_count(*n, delta).into(),
            f.value.into(),
            f.standard_error.into(),
            f_sde.into(),
            se_sde.into(),
            closed.into(),
        ])?;
    }
    Ok(json!({ "max_abs_discrete_vs_sde": max_sde, "max_abs_discrete_vs_closed": max_closed }))
}

/// Reads a config file if given.
pub fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, CliError> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_grid() {
        assert_eq!(counts(20, 10), vec![0, 10, 20]);
        assert_eq!(counts(25, 10), vec![0, 10, 20, 25]);
        assert_eq!(counts(0, 3), vec![0]);
    }

    #[test]
    fn record_stride_must_divide() {
        assert_eq!(record_stride(1e-4, 0.05).unwrap(), 500);
        assert!(record_stride(1e-4, 0.00015).is_err());
        assert!(record_stride(1e-2, 1e-3).is_err());
    }
}
