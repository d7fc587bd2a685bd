//! Scenario evaluation and artifact emission.

use std::path::Path;

use catforge_core::cat::{fit_cat_with, metrological_power, quadrature_variance, FitOptions};
use catforge_core::dynamics::{
    extinction_time, fluctuation_average, loss_evolve, loss_metrics, ExtinctionSearch,
    FluctuationSpec, LossSpec,
};
use catforge_core::interaction::{
    channel_decomposition, conditional_state, success_probability, ChannelNorm,
};
use catforge_core::phase_space::{local_extrema, negativity, wigner, ExtremumKind, WignerGrid};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, PhysicsConfig, Scenario, SweepParameter};
use crate::error::{CliError, CliResult};
use crate::manifest::{Artifact, Status};
use crate::records::{fmt_f64, ResultRecord, Table};
use crate::svg::{line_chart, wigner_heatmap, Series};

pub const AMPLITUDE_SCHEMA: &str = "catforge-amplitudes/1";
pub const WIGNER_SCHEMA: &str = "catforge-wigner/1";
pub const MARGINAL_SCHEMA: &str = "catforge-marginal/1";
pub const CHANNEL_SCHEMA: &str = "catforge-channels/1";
pub const EXTREMA_SCHEMA: &str = "catforge-extrema/1";

/// Everything one physics point produced, before anything is written.
#[derive(Debug, Default)]
struct PointOutput {
    records: Vec<ResultRecord>,
    tables: Vec<(&'static str, Table)>,
    figures: Vec<(&'static str, String)>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ResultRecord>,
    pub artifacts: Vec<Artifact>,
}

pub fn describe(p: &PhysicsConfig) -> String {
    format!(
        "g_mag={} alpha_sq={} k={}",
        fmt_f64(p.g_mag),
        fmt_f64(p.alpha_sq),
        p.k
    )
}

fn describe_run(config: &ExperimentConfig) -> String {
    let mut s = describe(&config.physics);
    if let Some(sw) = &config.sweep {
        let name = match sw.parameter {
            SweepParameter::GMag => "g_mag",
            SweepParameter::AlphaSq => "alpha_sq",
            SweepParameter::K => "k",
        };
        s.push_str(&format!(
            " sweep={name}:{}..{}/{}",
            fmt_f64(sw.start),
            fmt_f64(sw.stop),
            sw.steps
        ));
    }
    s
}

/// Long-format `(x, y, w)` rows, x-major.
pub fn wigner_table(w: &WignerGrid) -> Table {
    let mut t = Table::new(WIGNER_SCHEMA, &["x", "y", "w"]);
    for i in 0..w.axes.nx {
        for j in 0..w.axes.ny {
            t.push_f64(&[w.axes.x(i), w.axes.y(j), w.value(i, j)]);
        }
    }
    t
}

fn evaluate(config: &ExperimentConfig, p: &PhysicsConfig) -> CliResult<PointOutput> {
    let cfg = p.coupling()?;
    let k = p.k;
    let grid = config.grid.spec();
    let mut rec = ResultRecord::new(config.scenario.name(), p.g_mag, p.alpha_sq, k);
    let mut out = PointOutput::default();
    match config.scenario {
        Scenario::Probability => {
            rec.probability = Some(success_probability(&cfg, k)?);
        }
        Scenario::Conditional => {
            let c = conditional_state(&cfg, k)?;
            rec.probability = Some(c.probability());
            rec.var_x = Some(quadrature_variance(&c.state, 0.0));
            let mut t = Table::new(AMPLITUDE_SCHEMA, &["n", "re", "im", "population"]);
            for (n, a) in c.state.amps().iter().enumerate() {
                t.push(vec![
                    n.to_string(),
                    fmt_f64(a.re),
                    fmt_f64(a.im),
                    fmt_f64(a.norm_sqr()),
                ]);
            }
            out.tables.push(("amplitudes", t));
        }
        Scenario::Wigner => {
            let c = conditional_state(&cfg, k)?;
            let w = wigner(&c.state, &grid)?;
            rec.probability = Some(c.probability());
            rec.negativity = Some(negativity(&w)?);
            out.tables.push(("grid", wigner_table(&w)));
            let mut m = Table::new(MARGINAL_SCHEMA, &["quadrature", "coordinate", "density"]);
            for (i, v) in w.marginal_x().iter().enumerate() {
                m.push(vec!["X".into(), fmt_f64(w.axes.x(i)), fmt_f64(*v)]);
            }
            for (j, v) in w.marginal_y().iter().enumerate() {
                m.push(vec!["Y".into(), fmt_f64(w.axes.y(j)), fmt_f64(*v)]);
            }
            out.tables.push(("marginals", m));
            let title = format!("W(X, Y), |g| = {}, k = {k}", p.g_mag);
            out.figures.push(("wigner", wigner_heatmap(&w, &title)));
        }
        Scenario::CatFit => {
            let c = conditional_state(&cfg, k)?;
            let opts = FitOptions {
                frame: config.fit.frame(),
                ..FitOptions::default()
            };
            let fit = fit_cat_with(&c.state, &opts)?;
            rec.probability = Some(c.probability());
            rec.fidelity = Some(fit.fidelity);
            rec.beta_mag = Some(fit.params.beta_mag);
            rec.phi = Some(fit.params.phi);
        }
        Scenario::Channels => {
            let exact = channel_decomposition(&cfg, k, ChannelNorm::Exact)?;
            let large = channel_decomposition(&cfg, k, ChannelNorm::LargeAlpha)?;
            rec.s_even = Some(exact.s_even);
            rec.s_odd = Some(exact.s_odd);
            let mut t = Table::new(
                CHANNEL_SCHEMA,
                &["j", "weight", "weight_large_alpha", "sign"],
            );
            for ch in &exact.channels {
                let sign = if ch.coeff.phase.re < 0.0 { -1 } else { 1 };
                t.push(vec![
                    ch.j.to_string(),
                    fmt_f64(ch.weight),
                    fmt_f64(large.weight(ch.j)),
                    sign.to_string(),
                ]);
            }
            out.tables.push(("channels", t));
        }
        Scenario::NegativitySweep => {
            let c = conditional_state(&cfg, k)?;
            rec.negativity = Some(negativity(&wigner(&c.state, &grid)?)?);
        }
        Scenario::Metrology => {
            let c = conditional_state(&cfg, k)?;
            let m = metrological_power(&c.state);
            rec.metrological_power = Some(m.power);
            rec.var_x = Some(m.var_x);
        }
        Scenario::Loss => {
            let c = conditional_state(&cfg, k)?;
            let spec = LossSpec::uniform(config.loss.kappa, config.loss.t_max, config.loss.steps)?;
            let ev = loss_evolve(&c.state, &spec)?;
            for m in loss_metrics(&ev, &grid)? {
                let mut r = rec.clone();
                r.t = Some(m.t);
                r.negativity = Some(m.negativity);
                r.fidelity = Some(m.fidelity);
                out.records.push(r);
            }
            if config.loss.extinction {
                let t = extinction_time(
                    &c.state,
                    config.loss.kappa,
                    &grid,
                    &ExtinctionSearch::default(),
                )?;
                let mut r = rec.clone();
                r.lifetime = Some(t);
                out.records.push(r);
            }
            return Ok(out);
        }
        Scenario::Fluctuation => {
            for dg in &config.fluctuation.delta_g {
                let spec = FluctuationSpec::new(p.g_mag, *dg, config.fluctuation.samples)?;
                let avg =
                    fluctuation_average(&spec, &cfg, k, config.fluctuation.mode.into(), &grid)?;
                let mut r = rec.clone();
                r.delta_g = Some(*dg);
                r.negativity = Some(avg.negativity);
                r.fidelity = Some(avg.fidelity);
                out.records.push(r);
            }
            return Ok(out);
        }
    }
    out.records.push(rec);
    Ok(out)
}

/// Evaluates every point of `config` (in parallel) and writes the artifacts
/// under `dir`, named `{prefix}…`, in sweep order.
pub fn run_into(config: &ExperimentConfig, dir: &Path, prefix: &str) -> CliResult<RunOutput> {
    config.validate()?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
    let points = config.points();
    let outputs: Vec<CliResult<PointOutput>> =
        points.par_iter().map(|p| evaluate(config, p)).collect();
    let outputs = outputs.into_iter().collect::<CliResult<Vec<_>>>()?;

    let scenario = config.scenario.name().to_string();
    let mut artifacts = Vec::new();
    let mut emit = |name: String, bytes: &[u8], parameters: String| -> CliResult<()> {
        let path = dir.join(&name);
        std::fs::write(&path, bytes).map_err(|e| CliError::output(&path, e))?;
        artifacts.push(Artifact {
            path: name,
            scenario: scenario.clone(),
            parameters,
            status: Status::Untargeted,
        });
        Ok(())
    };

    let single = points.len() == 1;
    for (idx, (p, o)) in points.iter().zip(&outputs).enumerate() {
        let stem = if single {
            prefix.to_string()
        } else {
            format!("{prefix}_{idx:03}")
        };
        if config.output.csv {
            for (suffix, t) in &o.tables {
                emit(format!("{stem}_{suffix}.csv"), &t.to_bytes(), describe(p))?;
            }
        }
        if config.output.svg {
            for (suffix, svg) in &o.figures {
                emit(format!("{stem}_{suffix}.svg"), svg.as_bytes(), describe(p))?;
            }
        }
    }

    let records: Vec<ResultRecord> = outputs.into_iter().flat_map(|o| o.records).collect();
    if config.output.csv {
        emit(
            format!("{prefix}.csv"),
            &Table::results(&records).to_bytes(),
            describe_run(config),
        )?;
    }
    if let Some(sw) = &config.sweep {
        let xs = sweep_axis(&records, sw.parameter);
        let curves = sweep_curves(config.scenario, &records);
        if config.scenario == Scenario::NegativitySweep && config.output.csv {
            let samples: Vec<(f64, f64)> = xs
                .iter()
                .copied()
                .zip(curves[0].1.iter().copied())
                .collect();
            let mut t = Table::new(EXTREMA_SCHEMA, &["kind", "position", "value"]);
            for e in local_extrema(&samples) {
                let kind = match e.kind {
                    ExtremumKind::Maximum => "max",
                    ExtremumKind::Minimum => "min",
                };
                t.push(vec![kind.into(), fmt_f64(e.position), fmt_f64(e.value)]);
            }
            emit(
                format!("{prefix}_extrema.csv"),
                &t.to_bytes(),
                describe_run(config),
            )?;
        }
        if config.output.svg && !curves.is_empty() {
            let series_points: Vec<(&str, Vec<(f64, f64)>)> = curves
                .iter()
                .map(|(label, ys)| (*label, xs.iter().copied().zip(ys.iter().copied()).collect()))
                .collect();
            let series: Vec<Series<'_>> = series_points
                .iter()
                .map(|(label, pts)| Series { label, points: pts })
                .collect();
            let x_label = match sw.parameter {
                SweepParameter::GMag => "|g|",
                SweepParameter::AlphaSq => "|alpha|^2",
                SweepParameter::K => "k",
            };
            let svg = line_chart(
                &describe_run(config),
                x_label,
                config.scenario.name(),
                &series,
            );
            emit(
                format!("{prefix}_curve.svg"),
                svg.as_bytes(),
                describe_run(config),
            )?;
        }
    }
    Ok(RunOutput { records, artifacts })
}

fn sweep_axis(records: &[ResultRecord], parameter: SweepParameter) -> Vec<f64> {
    records
        .iter()
        .map(|r| match parameter {
            SweepParameter::GMag => r.g_mag.unwrap_or(f64::NAN),
            SweepParameter::AlphaSq => r.alpha_sq.unwrap_or(f64::NAN),
            SweepParameter::K => r.k.map_or(f64::NAN, |k| k as f64),
        })
        .collect()
}

/// The scalar curves plotted against a sweep, one value per record.
fn sweep_curves(scenario: Scenario, records: &[ResultRecord]) -> Vec<(&'static str, Vec<f64>)> {
    let col = |f: fn(&ResultRecord) -> Option<f64>| -> Vec<f64> {
        records.iter().map(|r| f(r).unwrap_or(f64::NAN)).collect()
    };
    match scenario {
        Scenario::NegativitySweep | Scenario::Wigner => vec![("delta", col(|r| r.negativity))],
        Scenario::Probability | Scenario::Conditional => vec![("Pr", col(|r| r.probability))],
        Scenario::CatFit => vec![("F", col(|r| r.fidelity))],
        Scenario::Channels => vec![("s_even", col(|r| r.s_even)), ("s_odd", col(|r| r.s_odd))],
        Scenario::Metrology => vec![
            ("M", col(|r| r.metrological_power)),
            ("var X", col(|r| r.var_x)),
        ],
        Scenario::Loss | Scenario::Fluctuation => Vec::new(),
    }
}

/// A single scenario run with its manifest, into `config.output.dir`.
pub fn run(config: &ExperimentConfig) -> CliResult<RunOutput> {
    let dir = &config.output.dir;
    let out = run_into(config, dir, config.scenario.name())?;
    crate::manifest::Manifest {
        artifacts: out.artifacts.clone(),
    }
    .write(dir)?;
    let config_path = dir.join("config.toml");
    std::fs::write(&config_path, config.emit()).map_err(|e| CliError::output(&config_path, e))?;
    Ok(out)
}
