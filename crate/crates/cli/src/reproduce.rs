//! The full set of figure-equivalent datasets plus a summary table that
//! compares computed values with reference targets.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use catforge_core::cat::{cat_state, fit_cat, metrological_power, quadrature_variance, CatParams};
use catforge_core::interaction::{
    channel_decomposition, channel_state, conditional_state, ChannelNorm, CouplingConfig,
};
use catforge_core::phase_space::{local_extrema, wigner, Extremum, ExtremumKind, GridSpec};
use catforge_core::{OpticalState, C64};

use crate::config::{
    ExperimentConfig, ModeChoice, PhysicsConfig, Scenario, SweepConfig, SweepParameter,
};
use crate::error::{CliError, CliResult};
use crate::manifest::{Artifact, Manifest, Status};
use crate::records::{fmt_f64, ResultRecord, Table, NULL};
use crate::scenario::{run_into, wigner_table, RunOutput};
use crate::svg::wigner_heatmap;

pub const SUMMARY_SCHEMA: &str = "catforge-summary/1";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const FAILURES_FILE: &str = "failures.txt";

/// Peaks of δ(|g|) closer than this to a neighbouring valley are ripples.
pub const PEAK_PROMINENCE: f64 = 0.05;
pub const PEAK_WINDOW: (f64, f64) = (0.1, 1.0);
pub const VALLEY_WINDOW: (f64, f64) = (0.2, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// Reference sampling densities.
    Full,
    /// Coarse sampling for smoke runs and rerun checks.
    Quick,
}

impl Profile {
    fn g_steps(self) -> usize {
        match self {
            Profile::Full => 400,
            Profile::Quick => 100,
        }
    }

    fn alpha_steps(self) -> usize {
        match self {
            Profile::Full => 49,
            Profile::Quick => 7,
        }
    }

    fn grid_points(self) -> usize {
        match self {
            Profile::Full => 201,
            Profile::Quick => 101,
        }
    }

    fn map_points(self) -> usize {
        match self {
            Profile::Full => 401,
            Profile::Quick => 121,
        }
    }

    fn loss_steps(self) -> usize {
        match self {
            Profile::Full => 20,
            Profile::Quick => 5,
        }
    }

    fn samples(self) -> usize {
        match self {
            Profile::Full => 21,
            Profile::Quick => 9,
        }
    }

    fn spreads(self, g0: f64) -> Vec<f64> {
        let unit = if g0 >= 1.0 { 0.025 } else { 0.005 };
        let count = match self {
            Profile::Full => 6,
            Profile::Quick => 2,
        };
        (0..=count).map(|i| i as f64 * unit).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Check {
    Near { target: f64, tolerance: f64 },
    Within { lo: f64, hi: f64 },
    AtLeast(f64),
    AtMost(f64),
    Above(f64),
    Below(f64),
    Info,
}

impl Check {
    fn status(self, v: f64) -> Status {
        let ok = match self {
            Check::Near { target, tolerance } => (v - target).abs() <= tolerance,
            Check::Within { lo, hi } => (lo..=hi).contains(&v),
            Check::AtLeast(x) => v >= x,
            Check::AtMost(x) => v <= x,
            Check::Above(x) => v > x,
            Check::Below(x) => v < x,
            Check::Info => return Status::Untargeted,
        };
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn target_fields(self) -> (String, String) {
        match self {
            Check::Near { target, tolerance } => (fmt_f64(target), fmt_f64(tolerance)),
            Check::Within { lo, hi } => {
                (format!("[{}, {}]", fmt_f64(lo), fmt_f64(hi)), NULL.into())
            }
            Check::AtLeast(x) => (format!(">= {}", fmt_f64(x)), NULL.into()),
            Check::AtMost(x) => (format!("<= {}", fmt_f64(x)), NULL.into()),
            Check::Above(x) => (format!("> {}", fmt_f64(x)), NULL.into()),
            Check::Below(x) => (format!("< {}", fmt_f64(x)), NULL.into()),
            Check::Info => (NULL.into(), NULL.into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub id: String,
    /// Artifact prefix the row was computed from.
    pub source: String,
    pub computed: f64,
    pub check: Check,
    pub status: Status,
}

#[derive(Debug, Clone, Default)]
pub struct ReproduceReport {
    pub summary: Vec<SummaryRow>,
    /// `(job, message)` for every job that could not complete.
    pub failures: Vec<(String, String)>,
    pub artifacts: Vec<Artifact>,
}

impl ReproduceReport {
    pub fn row(&self, id: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.id == id)
    }

    pub fn summary_table(&self) -> Table {
        let mut t = Table::new(
            SUMMARY_SCHEMA,
            &["id", "source", "computed", "target", "tolerance", "status"],
        );
        for r in &self.summary {
            let (target, tolerance) = r.check.target_fields();
            t.push(vec![
                r.id.clone(),
                r.source.clone(),
                fmt_f64(r.computed),
                target,
                tolerance,
                r.status.to_string(),
            ]);
        }
        t
    }
}

struct Reproduction<'a> {
    dir: &'a Path,
    profile: Profile,
    report: ReproduceReport,
}

fn physics(g_mag: f64, k: i64) -> PhysicsConfig {
    PhysicsConfig {
        g_mag,
        k,
        ..PhysicsConfig::default()
    }
}

fn sweep(parameter: SweepParameter, start: f64, stop: f64, steps: usize) -> Option<SweepConfig> {
    Some(SweepConfig {
        parameter,
        start,
        stop,
        steps,
    })
}

fn scalar(out: &RunOutput, f: fn(&ResultRecord) -> Option<f64>) -> CliResult<f64> {
    out.records
        .iter()
        .find_map(f)
        .ok_or_else(|| CliError::config("records", "expected value missing"))
}

/// Maxima inside `window` standing at least [`PEAK_PROMINENCE`] above both
/// neighbouring minima.
pub fn prominent_maxima(extrema: &[Extremum], window: (f64, f64)) -> Vec<Extremum> {
    let floor = |i: Option<usize>| i.map_or(0.0, |i: usize| extrema[i].value);
    let mut out = Vec::new();
    for (i, e) in extrema.iter().enumerate() {
        if e.kind != ExtremumKind::Maximum || e.position < window.0 || e.position > window.1 {
            continue;
        }
        let left = extrema[..i]
            .iter()
            .rposition(|x| x.kind == ExtremumKind::Minimum);
        let right = extrema[i + 1..]
            .iter()
            .position(|x| x.kind == ExtremumKind::Minimum)
            .map(|j| i + 1 + j);
        let base = floor(left).max(floor(right));
        if e.value - base >= PEAK_PROMINENCE {
            out.push(*e);
        }
    }
    out
}

/// The deepest minimum between consecutive prominent maxima, plus the one
/// after the last, restricted to `window`.
pub fn valleys_between(
    extrema: &[Extremum],
    peaks: &[Extremum],
    window: (f64, f64),
) -> Vec<Extremum> {
    let mut bounds: Vec<f64> = peaks.iter().map(|p| p.position).collect();
    bounds.push(f64::INFINITY);
    bounds
        .windows(2)
        .filter_map(|w| {
            extrema
                .iter()
                .filter(|e| {
                    e.kind == ExtremumKind::Minimum && e.position > w[0] && e.position < w[1]
                })
                .filter(|e| e.position >= window.0 && e.position <= window.1)
                .min_by(|a, b| a.value.total_cmp(&b.value))
                .copied()
        })
        .collect()
}

impl<'a> Reproduction<'a> {
    fn config(&self, scenario: Scenario, physics: PhysicsConfig) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(scenario);
        c.physics = physics;
        c.grid.points = self.profile.grid_points();
        c.loss.steps = self.profile.loss_steps();
        c.fluctuation.samples = self.profile.samples();
        // Written next to the artifacts, so the emitted config stays relocatable.
        c.output.dir = PathBuf::from(".");
        c
    }

    fn fail(&mut self, job: &str, e: impl std::fmt::Display) {
        self.report.failures.push((job.to_string(), e.to_string()));
    }

    fn job(&mut self, prefix: &str, config: ExperimentConfig) -> Option<RunOutput> {
        let config_path = self.dir.join(format!("{prefix}.toml"));
        if let Err(e) = std::fs::write(&config_path, config.emit()) {
            self.fail(prefix, CliError::output(config_path, e));
            return None;
        }
        match run_into(&config, self.dir, prefix) {
            Ok(out) => {
                self.report.artifacts.push(Artifact {
                    path: format!("{prefix}.toml"),
                    scenario: config.scenario.name().to_string(),
                    parameters: crate::scenario::describe(&config.physics),
                    status: Status::Untargeted,
                });
                self.report.artifacts.extend(out.artifacts.iter().cloned());
                Some(out)
            }
            Err(e) => {
                self.fail(prefix, e);
                None
            }
        }
    }

    fn check(&mut self, id: &str, source: &str, computed: f64, check: Check) {
        self.report.summary.push(SummaryRow {
            id: id.to_string(),
            source: source.to_string(),
            computed,
            status: check.status(computed),
            check,
        });
    }

    fn write(&mut self, name: &str, bytes: &[u8], scenario: &str, parameters: String) {
        let path = self.dir.join(name);
        match std::fs::write(&path, bytes) {
            Ok(()) => self.report.artifacts.push(Artifact {
                path: name.to_string(),
                scenario: scenario.to_string(),
                parameters,
                status: Status::Untargeted,
            }),
            Err(e) => self.fail(name, CliError::output(path, e)),
        }
    }

    /// Wigner CSV and SVG of a state that no scenario produces directly.
    fn state_map(&mut self, prefix: &str, state: &OpticalState, title: &str, parameters: String) {
        let spec = GridSpec::Auto {
            points: self.profile.map_points(),
            half_width: 6.0,
        };
        match wigner(state, &spec) {
            Ok(w) => {
                self.write(
                    &format!("{prefix}_grid.csv"),
                    &wigner_table(&w).to_bytes(),
                    "wigner",
                    parameters.clone(),
                );
                self.write(
                    &format!("{prefix}_wigner.svg"),
                    wigner_heatmap(&w, title).as_bytes(),
                    "wigner",
                    parameters,
                );
            }
            Err(e) => self.fail(prefix, e),
        }
    }

    fn fig2(&mut self) {
        let panels: [(&str, f64, i64, Option<(f64, f64, f64)>); 4] = [
            ("fig2a", 0.17, 0, Some((0.993, 7.021, 0.020))),
            ("fig2b", 0.275, 1, Some((0.994, 6.951, 0.021))),
            ("fig2c", 0.95, 0, None),
            ("fig2d", 0.95, 1, None),
        ];
        let mut fidelity = [f64::NAN; 4];
        for (idx, (name, g, k, target)) in panels.into_iter().enumerate() {
            let mut map = self.config(Scenario::Wigner, physics(g, k));
            map.grid.points = self.profile.map_points();
            self.job(&format!("{name}_wigner"), map);
            let prefix = format!("{name}_fit");
            let Some(out) = self.job(&prefix, self.config(Scenario::CatFit, physics(g, k))) else {
                continue;
            };
            let (Ok(f), Ok(b), Ok(phi)) = (
                scalar(&out, |r| r.fidelity),
                scalar(&out, |r| r.beta_mag),
                scalar(&out, |r| r.phi),
            ) else {
                self.fail(&prefix, "fit produced no record");
                continue;
            };
            fidelity[idx] = f;
            let id = format!("Fig{}", &name[3..]);
            if let Some((tf, tb, tphi)) = target {
                self.check(
                    &id,
                    &prefix,
                    f,
                    Check::Near {
                        target: tf,
                        tolerance: 0.003,
                    },
                );
                self.check(
                    &format!("{id}-beta"),
                    &prefix,
                    b,
                    Check::Near {
                        target: tb,
                        tolerance: 0.05,
                    },
                );
                self.check(
                    &format!("{id}-phi-over-pi"),
                    &prefix,
                    phi / PI,
                    Check::Near {
                        target: tphi,
                        tolerance: 0.002,
                    },
                );
            } else {
                let check = if idx == 3 {
                    Check::Near {
                        target: 0.996,
                        tolerance: 0.003,
                    }
                } else {
                    Check::Info
                };
                self.check(&id, &prefix, f, check);
                self.check(&format!("{id}-beta"), &prefix, b, Check::Info);
                self.check(&format!("{id}-phi-over-pi"), &prefix, phi / PI, Check::Info);
            }
            match cat_state(CatParams::new(b, phi), PhysicsConfig::default().n_max) {
                Ok(cat) => {
                    let title = format!("ideal cat |beta| = {b:.3}, phi = {:.3} pi", phi / PI);
                    self.state_map(
                        &format!("figS4_{name}_cat"),
                        &cat,
                        &title,
                        format!("beta_mag={} phi={}", fmt_f64(b), fmt_f64(phi)),
                    );
                }
                Err(e) => self.fail(&format!("figS4_{name}_cat"), e),
            }
        }
        if fidelity[2].is_finite() && fidelity[3].is_finite() {
            self.check(
                "Fig2c-below-Fig2d",
                "fig2c_fit",
                fidelity[2] - fidelity[3],
                Check::Below(0.0),
            );
        }
    }

    fn fig3a(&mut self) {
        let steps = self.profile.g_steps();
        // The k = 1 sector is empty at g = 0.
        let first = 2.0 / steps as f64;
        let mut k1 = self.config(Scenario::NegativitySweep, physics(first, 1));
        k1.sweep = sweep(SweepParameter::GMag, first, 2.0, steps - 1);
        self.job("fig3a_k1", k1);

        let mut k0 = self.config(Scenario::NegativitySweep, physics(0.0, 0));
        k0.sweep = sweep(SweepParameter::GMag, 0.0, 2.0, steps);
        let Some(out) = self.job("fig3a_k0", k0) else {
            return;
        };
        let curve: Vec<(f64, f64)> = out
            .records
            .iter()
            .filter_map(|r| Some((r.g_mag?, r.negativity?)))
            .collect();
        let flat = curve
            .iter()
            .filter(|(g, _)| *g <= 0.1)
            .map(|(_, d)| *d)
            .fold(0.0, f64::max);
        self.check("Fig3a-flat-region", "fig3a_k0", flat, Check::AtMost(2e-3));

        let extrema = local_extrema(&curve);
        let peaks = prominent_maxima(&extrema, PEAK_WINDOW);
        self.check(
            "Fig3a-peak-count",
            "fig3a_k0",
            peaks.len() as f64,
            Check::Near {
                target: 4.0,
                tolerance: 0.0,
            },
        );
        self.peak_analysis(&peaks);
        let valleys = valleys_between(&extrema, &peaks, VALLEY_WINDOW);
        self.valley_analysis(&valleys);
    }

    fn peak_analysis(&mut self, peaks: &[Extremum]) {
        const SOURCE: &str = "fig3a_peaks";
        const TARGETS: [f64; 4] = [0.171, 0.391, 0.612, 0.834];
        let mut records = Vec::new();
        let mut powers = Vec::new();
        for (i, p) in peaks.iter().enumerate() {
            let n = i + 1;
            let target = TARGETS.get(i).map_or(Check::Info, |t| Check::Near {
                target: *t,
                tolerance: 0.01,
            });
            self.check(&format!("Fig3a-peak-{n}"), "fig3a_k0", p.position, target);
            let cfg = CouplingConfig::new(p.position, PhysicsConfig::default().alpha_sq);
            let analysed = conditional_state(&cfg, 0).and_then(|c| {
                let fit = fit_cat(&c.state)?;
                let channels = channel_decomposition(&cfg, 0, ChannelNorm::Exact)?;
                Ok((c, fit, channels))
            });
            let (c, fit, channels) = match analysed {
                Ok(v) => v,
                Err(e) => {
                    self.fail(&format!("{SOURCE}-{n}"), e);
                    continue;
                }
            };
            let metrology = metrological_power(&c.state);
            let mut r = ResultRecord::new("peak-analysis", p.position, cfg.alpha_sq(), 0);
            r.probability = Some(c.probability());
            r.negativity = Some(p.value);
            r.fidelity = Some(fit.fidelity);
            r.beta_mag = Some(fit.params.beta_mag);
            r.phi = Some(fit.params.phi);
            r.metrological_power = Some(metrology.power);
            r.var_x = Some(metrology.var_x);
            r.s_even = Some(channels.s_even);
            r.s_odd = Some(channels.s_odd);
            records.push(r);
            self.check(
                &format!("S5-peak-{n}-F"),
                SOURCE,
                fit.fidelity,
                Check::AtLeast(0.99),
            );
            self.check(
                &format!("S5-peak-{n}-even-odd"),
                SOURCE,
                channels.even_odd_ratio(),
                Check::Near {
                    target: 1.0,
                    tolerance: 0.05,
                },
            );
            self.check(
                &format!("Fig4-peak-{n}-M"),
                SOURCE,
                metrology.power,
                Check::Info,
            );
            powers.push(metrology.power);
        }
        for (i, w) in powers.windows(2).enumerate() {
            self.check(
                &format!("Fig4-M-rise-{}-{}", i + 1, i + 2),
                SOURCE,
                w[1] - w[0],
                Check::Above(0.0),
            );
        }
        let params = "alpha_sq=50 k=0 g_mag=peaks".to_string();
        self.write(
            &format!("{SOURCE}.csv"),
            &Table::results(&records).to_bytes(),
            "peak-analysis",
            params,
        );
    }

    fn valley_analysis(&mut self, valleys: &[Extremum]) {
        const SOURCE: &str = "fig4_valleys";
        let mut records = Vec::new();
        for (i, v) in valleys.iter().enumerate() {
            let cfg = CouplingConfig::new(v.position, PhysicsConfig::default().alpha_sq);
            match conditional_state(&cfg, 0) {
                Ok(c) => {
                    let var_x = quadrature_variance(&c.state, 0.0);
                    let mut r = ResultRecord::new("valley-analysis", v.position, cfg.alpha_sq(), 0);
                    r.negativity = Some(v.value);
                    r.var_x = Some(var_x);
                    records.push(r);
                    self.check(
                        &format!("Fig4-valley-{}-varX", i + 1),
                        SOURCE,
                        var_x,
                        Check::Below(0.5),
                    );
                }
                Err(e) => self.fail(&format!("{SOURCE}-{}", i + 1), e),
            }
        }
        let params = "alpha_sq=50 k=0 g_mag=valleys".to_string();
        self.write(
            &format!("{SOURCE}.csv"),
            &Table::results(&records).to_bytes(),
            "valley-analysis",
            params,
        );
    }

    fn fig3_inset(&mut self) {
        let mut map = self.config(Scenario::Wigner, physics(2.0, 0));
        map.grid.points = self.profile.map_points();
        self.job("fig3a_inset_wigner", map);
        let prefix = "figS6_fit";
        let Some(out) = self.job(prefix, self.config(Scenario::CatFit, physics(2.0, 0))) else {
            return;
        };
        if let (Ok(f), Ok(b), Ok(phi)) = (
            scalar(&out, |r| r.fidelity),
            scalar(&out, |r| r.beta_mag),
            scalar(&out, |r| r.phi),
        ) {
            self.check(
                "S6",
                prefix,
                f,
                Check::Near {
                    target: 0.98,
                    tolerance: 0.01,
                },
            );
            self.check(
                "S6-beta",
                prefix,
                b,
                Check::Near {
                    target: 7.061,
                    tolerance: 0.05,
                },
            );
            self.check(
                "S6-phi-over-pi",
                prefix,
                phi / PI,
                Check::Near {
                    target: 0.085,
                    tolerance: 0.003,
                },
            );
        }
    }

    fn fig3bc(&mut self) {
        let panels: [(&str, i64, [f64; 4]); 2] = [
            ("fig3b", 0, [0.01, 0.17, 1.0, 2.0]),
            ("fig3c", 1, [0.17, 0.275, 1.0, 2.0]),
        ];
        for (name, k, gs) in panels {
            for g in gs {
                let mut c = self.config(Scenario::NegativitySweep, physics(g, k));
                c.sweep = sweep(
                    SweepParameter::AlphaSq,
                    2.0,
                    100.0,
                    self.profile.alpha_steps(),
                );
                self.job(&format!("{name}_g{g}"), c);
            }
        }
    }

    fn fig4(&mut self) {
        let mut c = self.config(Scenario::Metrology, physics(0.0, 0));
        c.sweep = sweep(SweepParameter::GMag, 0.0, 2.0, self.profile.g_steps());
        self.job("fig4", c);
        let alpha = PhysicsConfig::default().alpha_sq.sqrt();
        match OpticalState::coherent(C64::new(alpha, 0.0), PhysicsConfig::default().n_max) {
            Ok(coherent) => {
                let m = metrological_power(&coherent).power;
                self.check(
                    "Fig4-coherent-M",
                    "fig4",
                    m,
                    Check::Near {
                        target: 0.0,
                        tolerance: 0.0,
                    },
                );
            }
            Err(e) => self.fail("fig4-coherent", e),
        }
    }

    fn channels(&mut self) {
        for g in [0.01, 0.17] {
            self.job(
                &format!("figS1_g{g}"),
                self.config(Scenario::Channels, physics(g, 0)),
            );
        }
        for g in [0.171, 0.28, 0.391, 0.51, 0.612, 0.73, 0.834, 0.95, 1.8, 2.0] {
            self.job(
                &format!("figS5_g{g}"),
                self.config(Scenario::Channels, physics(g, 0)),
            );
        }
    }

    /// Single-channel states: low orders at weak coupling, high orders as
    /// they appear at strong coupling.
    fn channel_maps(&mut self) {
        let cfg = CouplingConfig::new(0.17, PhysicsConfig::default().alpha_sq);
        for (name, js) in [("figS2", [0usize, 1, 2, 3]), ("figS7", [10, 15, 20, 25])] {
            for j in js {
                match channel_state(&cfg, j) {
                    Ok(s) => self.state_map(
                        &format!("{name}_j{j}"),
                        &s,
                        &format!("channel j = {j}"),
                        format!("alpha_sq=50 j={j}"),
                    ),
                    Err(e) => self.fail(&format!("{name}_j{j}"), e),
                }
            }
        }
    }

    /// The g = 1.53 state for several phases of the input coherent state.
    fn phase_maps(&mut self) {
        let alpha = PhysicsConfig::default().alpha_sq.sqrt();
        for (label, phi) in [
            ("0", 0.0),
            ("pi4", PI / 4.0),
            ("pi2", PI / 2.0),
            ("3pi4", 0.75 * PI),
            ("pi", PI),
            ("3pi2", 1.5 * PI),
        ] {
            let cfg = CouplingConfig::new(1.53, PhysicsConfig::default().alpha_sq)
                .with_alpha(C64::from_polar(alpha, phi));
            let name = format!("figS3_phi{label}");
            match conditional_state(&cfg, 0) {
                Ok(c) => self.state_map(
                    &name,
                    &c.state,
                    &format!("|g| = 1.53, arg alpha = {phi:.4}"),
                    format!("g_mag=1.53 alpha_sq=50 k=0 arg_alpha={}", fmt_f64(phi)),
                ),
                Err(e) => self.fail(&name, e),
            }
        }
    }

    fn loss(&mut self) {
        let mut lifetimes = Vec::new();
        for g in [0.17, 2.0] {
            let prefix = format!("figS8_loss_g{g}");
            let Some(out) = self.job(&prefix, self.config(Scenario::Loss, physics(g, 0))) else {
                continue;
            };
            if let Ok(t) = scalar(&out, |r| r.lifetime) {
                self.check(
                    &format!("S8-lifetime-g{g}"),
                    &prefix,
                    t,
                    Check::Within { lo: 0.15, hi: 0.6 },
                );
                lifetimes.push(t);
            }
        }
        if let [a, b] = lifetimes[..] {
            self.check(
                "S8-lifetime-spread",
                "figS8_loss_g0.17",
                (a - b).abs() / a.max(b),
                Check::AtMost(0.3),
            );
        }
    }

    fn fluctuation(&mut self) {
        let states: [(f64, i64, Option<f64>); 4] = [
            (0.17, 0, Some(0.02)),
            (0.275, 1, None),
            (0.95, 1, None),
            (2.0, 0, Some(0.1)),
        ];
        for (g, k, threshold) in states {
            let mut c = self.config(Scenario::Fluctuation, physics(g, k));
            c.fluctuation.delta_g = self.profile.spreads(g);
            let prefix = format!("figS8_fluct_g{g}_k{k}");
            if let Some(out) = self.job(&prefix, c.clone()) {
                if let Some(limit) = threshold {
                    let below: Vec<&ResultRecord> = out
                        .records
                        .iter()
                        .filter(|r| r.delta_g.is_some_and(|d| d < limit))
                        .collect();
                    let min_of = |f: fn(&ResultRecord) -> Option<f64>| {
                        below
                            .iter()
                            .filter_map(|r| f(r))
                            .fold(f64::INFINITY, f64::min)
                    };
                    self.check(
                        &format!("S8-fluct-g{g}-min-delta"),
                        &prefix,
                        min_of(|r| r.negativity),
                        Check::Above(0.0),
                    );
                    self.check(
                        &format!("S8-fluct-g{g}-min-F"),
                        &prefix,
                        min_of(|r| r.fidelity),
                        Check::Above(0.5),
                    );
                }
            }
            if threshold.is_some() {
                c.fluctuation.mode = ModeChoice::DensityMatrix;
                self.job(&format!("figS8_fluct_dm_g{g}_k{k}"), c);
            }
        }
    }

    fn probability(&mut self) {
        for k in [0, 1, -1] {
            let mut c = self.config(Scenario::Probability, physics(0.0, k));
            c.sweep = sweep(SweepParameter::GMag, 0.0, 2.0, self.profile.g_steps());
            self.job(&format!("figS9_k{k}"), c);
        }
        for (g, k, target) in [
            (0.17, 0, 0.0076),
            (0.275, 1, 0.012),
            (0.95, 1, 0.020),
            (2.0, 0, 0.011),
        ] {
            let prefix = format!("prS9_g{g}_k{k}");
            if let Some(out) = self.job(&prefix, self.config(Scenario::Probability, physics(g, k)))
            {
                if let Ok(p) = scalar(&out, |r| r.probability) {
                    self.check(
                        &format!("PrS9-g{g}-k{k}"),
                        &prefix,
                        p,
                        Check::Near {
                            target,
                            tolerance: 5e-4,
                        },
                    );
                }
            }
        }
    }

    /// Artifacts inherit the worst status of the summary rows computed
    /// from their prefix.
    fn stamp_artifacts(&mut self) {
        let summary = &self.report.summary;
        for a in &mut self.report.artifacts {
            let stem = a.path.rsplit_once('.').map_or(a.path.as_str(), |(s, _)| s);
            let rows = summary.iter().filter(|r| {
                stem == r.source
                    || stem
                        .strip_prefix(r.source.as_str())
                        .is_some_and(|rest| rest.starts_with('_'))
            });
            for r in rows {
                a.status = match (a.status, r.status) {
                    (Status::Fail, _) | (_, Status::Fail) => Status::Fail,
                    (Status::Pass, _) | (_, Status::Pass) => Status::Pass,
                    _ => Status::Untargeted,
                };
            }
        }
    }
}

/// Regenerates every dataset under `dir`. Individual job failures are
/// recorded in the report (and `failures.txt`) without stopping the run.
pub fn reproduce(dir: &Path, profile: Profile) -> CliResult<ReproduceReport> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))?;
    let mut r = Reproduction {
        dir,
        profile,
        report: ReproduceReport::default(),
    };
    r.fig2();
    r.fig3a();
    r.fig3_inset();
    r.fig3bc();
    r.fig4();
    r.channels();
    r.channel_maps();
    r.phase_maps();
    r.loss();
    r.fluctuation();
    r.probability();
    r.stamp_artifacts();

    let mut report = r.report;
    let summary_path: PathBuf = dir.join(SUMMARY_FILE);
    report.summary_table().write(&summary_path)?;
    report.artifacts.push(Artifact {
        path: SUMMARY_FILE.to_string(),
        scenario: "reproduce".to_string(),
        parameters: format!("profile={profile:?}").to_lowercase(),
        status: Status::Untargeted,
    });
    let failures_path = dir.join(FAILURES_FILE);
    if report.failures.is_empty() {
        if failures_path.exists() {
            std::fs::remove_file(&failures_path)
                .map_err(|e| CliError::output(&failures_path, e))?;
        }
    } else {
        let text: String = report
            .failures
            .iter()
            .map(|(j, m)| format!("{j}\t{m}\n"))
            .collect();
        std::fs::write(&failures_path, text).map_err(|e| CliError::output(&failures_path, e))?;
    }
    Manifest {
        artifacts: report.artifacts.clone(),
    }
    .write(dir)?;
    Ok(report)
}
