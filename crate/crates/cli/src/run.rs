//! Scenario orchestration and CSV emission.
//!
//! Every series-producing scenario writes the same layout: `#` comment
//! lines carrying each effective parameter in config syntax (so a run
//! is re-creatable from its own output), `# meta` lines for
//! non-reproducible annotations (version, wall-clock time), a `t,E,G`
//! header, and one row per snapshot with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use mzchaos_core::basis::TripleTensor;
use mzchaos_core::chaos::{full_rhs, ChaosState, ViscosityExpansion};
use mzchaos_core::field::FourierField;
use mzchaos_core::reduced::{
    memory_hierarchy_rhs, markovian_only_rhs, BurgersReducedOps, MemoryLevel, ReducedConfig,
    ReducedState,
};
use mzchaos_core::select::{assess, select_memory_lengths, SelectGrid, StabilityReport};
use mzchaos_core::stats::MomentSeries;
use mzchaos_core::timestep::integrate_with;
use mzchaos_core::validation::{linear_decay_gpc, mc_reference, quadrature_reference};
use mzchaos_core::Complex;

use crate::config::{RunConfig, Scenario};

/// Formats with 17 significant digits (round-trip exact for f64).
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Scenario outcome: the CSV text plus whether the run blew up
/// mid-integration (partial series, nonzero exit).
pub struct ScenarioOutput {
    pub csv: String,
    pub blow_up: bool,
}

/// Runs one scenario and renders its CSV.
pub fn run_scenario(cfg: &RunConfig) -> Result<ScenarioOutput, String> {
    let started = Instant::now();
    match cfg.scenario {
        Scenario::Full => run_full(cfg, started),
        Scenario::ReducedMarkov => run_reduced_markov(cfg, started),
        Scenario::ReducedMemory => run_reduced_memory(cfg, started),
        Scenario::QuadOracle => run_quad_oracle(cfg, started),
        Scenario::Mc => run_mc(cfg, started),
        Scenario::LinDecay => run_lindecay(cfg, started),
        Scenario::SelectMemory => run_select_memory(cfg, started),
        Scenario::Tensor => run_tensor(cfg, started),
        Scenario::Compare => {
            let a = cfg.compare_a.as_ref().expect("validated");
            let b = cfg.compare_b.as_ref().expect("validated");
            let csv = crate::compare::compare_files(a, b)?;
            Ok(ScenarioOutput { csv, blow_up: false })
        }
    }
}

fn viscosity(cfg: &RunConfig) -> ViscosityExpansion<f64> {
    ViscosityExpansion::new(cfg.nu0, cfg.nu1).expect("validated by RunConfig")
}

fn initial_field(cfg: &RunConfig) -> Result<FourierField<f64>, String> {
    let modes: Vec<(i64, Complex<f64>)> = cfg
        .ic
        .iter()
        .map(|&(k, re, im)| (k, Complex::new(re, im)))
        .collect();
    let field = FourierField::from_modes(cfg.n, &modes).map_err(|e| e.to_string())?;
    if !field.is_real_valued(FourierField::<f64>::realness_tolerance()) {
        return Err(format!(
            "initial condition is not real-valued (hermitian defect {:.3e})",
            field.hermitian_defect()
        ));
    }
    Ok(field)
}

/// Header parameter lines common to every scenario, in config syntax.
fn push_params(out: &mut String, cfg: &RunConfig, extra: &[(&str, String)]) {
    let mut line = |k: &str, v: String| {
        let _ = writeln!(out, "# {k} = {v}");
    };
    line("scenario", cfg.scenario.name().to_string());
    line("N", cfg.n.to_string());
    line("M", cfg.m.to_string());
    line("lambda", cfg.lambda.to_string());
    line("nu0", sig17(cfg.nu0));
    line("nu1", sig17(cfg.nu1));
    line("dt", sig17(cfg.dt));
    line("T", sig17(cfg.t_end));
    line("stride", cfg.stride.to_string());
    line("seed", cfg.seed.to_string());
    line("n0", cfg.n0.to_string());
    line("n1", cfg.n1.to_string());
    line("ic", cfg.ic_string());
    line("zero_unpaired_mode", cfg.zero_unpaired_mode.to_string());
    for (k, v) in extra {
        line(k, v.clone());
    }
}

fn push_meta(out: &mut String, started: Instant, notes: &[&str]) {
    let _ = writeln!(out, "# meta version: {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(
        out,
        "# meta wall_clock_seconds: {:.3}",
        started.elapsed().as_secs_f64()
    );
    for note in notes {
        let _ = writeln!(out, "# meta {note}");
    }
}

fn render_series(
    cfg: &RunConfig,
    extra: &[(&str, String)],
    notes: &[&str],
    series: &MomentSeries<f64>,
    started: Instant,
    blow_up: bool,
) -> ScenarioOutput {
    let mut out = String::new();
    push_params(&mut out, cfg, extra);
    push_meta(&mut out, started, notes);
    if blow_up {
        let _ = writeln!(out, "# meta blow_up: true (series truncated)");
    }
    let _ = writeln!(out, "t,E,G");
    for i in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            sig17(series.times[i]),
            sig17(series.energy[i]),
            sig17(series.grad_sq[i])
        );
    }
    ScenarioOutput { csv: out, blow_up }
}

fn run_full(cfg: &RunConfig, started: Instant) -> Result<ScenarioOutput, String> {
    let nu = viscosity(cfg);
    let tensor = TripleTensor::with_default_rule(cfg.m);
    let ic = initial_field(cfg)?;
    let state0 = ChaosState::make_initial(&ic, cfg.m).map_err(|e| e.to_string())?;
    let zero_unpaired = cfg.zero_unpaired_mode;
    let rhs = |_t: f64, s: &ChaosState<f64>| full_rhs(s, &nu, &tensor).expect("validated dims");
    let trajectory = integrate_with(
        state0,
        &rhs,
        cfg.dt,
        cfg.t_end,
        cfg.stride,
        |s: &mut ChaosState<f64>| {
            if zero_unpaired {
                s.zero_unpaired_mode();
            }
        },
    )
    .map_err(|e| e.to_string())?;
    let fields: Vec<FourierField<f64>> = trajectory
        .states
        .iter()
        .map(|s| s.slice(0).clone())
        .collect();
    let series = MomentSeries::from_fields(trajectory.times.clone(), &fields);
    Ok(render_series(
        cfg,
        &[],
        &["note: T and ic defaults are tool choices, not published values"],
        &series,
        started,
        trajectory.blow_up.is_some(),
    ))
}

fn run_reduced_markov(cfg: &RunConfig, started: Instant) -> Result<ScenarioOutput, String> {
    let nu = viscosity(cfg);
    let tensor = TripleTensor::with_default_rule(cfg.m);
    let ic = initial_field(cfg)?;
    let zero_unpaired = cfg.zero_unpaired_mode;
    let rhs = |_t: f64, u: &FourierField<f64>| markovian_only_rhs(u, &nu, &tensor);
    let trajectory = integrate_with(
        ic,
        &rhs,
        cfg.dt,
        cfg.t_end,
        cfg.stride,
        |u: &mut FourierField<f64>| {
            if zero_unpaired {
                u.zero_unpaired_mode();
            }
        },
    )
    .map_err(|e| e.to_string())?;
    let series = MomentSeries::from_fields(trajectory.times.clone(), &trajectory.states);
    Ok(render_series(
        cfg,
        &[],
        &[],
        &series,
        started,
        trajectory.blow_up.is_some(),
    ))
}

/// Memory lengths: configured pair, or the a-priori selection.
fn memory_lengths(cfg: &RunConfig, nu: &ViscosityExpansion<f64>, tensor: &TripleTensor<f64>)
    -> Result<(f64, f64, bool), String>
{
    match (cfg.t0, cfg.t1) {
        (Some(t0), Some(t1)) => Ok((t0, t1, false)),
        _ => {
            let k_max = (cfg.n / 2) as i64;
            let selection = select_memory_lengths(k_max, cfg.dt, nu, tensor, SelectGrid::default())
                .map_err(|e| e.to_string())?;
            Ok((selection.t0, selection.t1, true))
        }
    }
}

fn run_reduced_memory(cfg: &RunConfig, started: Instant) -> Result<ScenarioOutput, String> {
    let nu = viscosity(cfg);
    let tensor = TripleTensor::with_default_rule(cfg.m);
    let ic = initial_field(cfg)?;
    let (t0, t1, auto_selected) = memory_lengths(cfg, &nu, &tensor)?;
    let reduced_cfg = ReducedConfig::new(
        cfg.n,
        cfg.lambda,
        vec![
            MemoryLevel { t_len: t0, subintervals: cfg.n0 },
            MemoryLevel { t_len: t1, subintervals: cfg.n1 },
        ],
    )
    .map_err(|e| e.to_string())?;
    let ops = BurgersReducedOps::new(cfg.n, nu, &tensor, 2).map_err(|e| e.to_string())?;
    let state0 = ReducedState::new(ic.amplitudes().to_vec(), &reduced_cfg);
    let zero_unpaired = cfg.zero_unpaired_mode;
    let unpaired_index = 0usize; // storage index of k = -N/2
    let rhs = |t: f64, s: &ReducedState<f64>| {
        memory_hierarchy_rhs(s, &reduced_cfg, &ops, t).expect("validated configuration")
    };
    let trajectory = integrate_with(
        state0,
        &rhs,
        cfg.dt,
        cfg.t_end,
        cfg.stride,
        |s: &mut ReducedState<f64>| {
            if zero_unpaired {
                s.resolved_mut()[unpaired_index] = Complex::new(0.0, 0.0);
            }
        },
    )
    .map_err(|e| e.to_string())?;
    let fields: Vec<FourierField<f64>> = trajectory
        .states
        .iter()
        .map(|s| s.resolved_field())
        .collect();
    let series = MomentSeries::from_fields(trajectory.times.clone(), &fields);
    let extra = [
        ("t0", sig17(t0)),
        ("t1", sig17(t1)),
    ];
    let note = if auto_selected {
        "note: (t0, t1) auto-selected from the linear stability bracket"
    } else {
        "note: (t0, t1) taken from the configuration"
    };
    Ok(render_series(
        cfg,
        &extra,
        &[note],
        &series,
        started,
        trajectory.blow_up.is_some(),
    ))
}

fn run_quad_oracle(cfg: &RunConfig, started: Instant) -> Result<ScenarioOutput, String> {
    let nu = viscosity(cfg);
    let ic = initial_field(cfg)?;
    let reference = quadrature_reference(
        &ic,
        &nu,
        cfg.effective_quad_nodes(),
        cfg.dt,
        cfg.t_end,
        cfg.stride,
        cfg.zero_unpaired_mode,
    )
    .map_err(|e| e.to_string())?;
    let extra = [("samples", cfg.effective_quad_nodes().to_string())];
    Ok(render_series(
        cfg,
        &extra,
        &["note: samples = quadrature node count for this scenario"],
        &reference.moments,
        started,
        false,
    ))
}

fn run_mc(cfg: &RunConfig, started: Instant) -> Result<ScenarioOutput, String> {
    let nu = viscosity(cfg);
    let ic = initial_field(cfg)?;
    let reference = mc_reference(
        &ic,
        &nu,
        cfg.effective_samples(),
        cfg.seed,
        cfg.dt,
        cfg.t_end,
        cfg.stride,
        cfg.zero_unpaired_mode,
    )
    .map_err(|e| e.to_string())?;
    let extra = [("samples", cfg.effective_samples().to_string())];
    Ok(render_series(cfg, &extra, &[], &reference.moments, started, false))
}

fn run_lindecay(cfg: &RunConfig, started: Instant) -> Result<ScenarioOutput, String> {
    let series = linear_decay_gpc(1.0, cfg.m, cfg.dt, cfg.t_end, cfg.stride)
        .map_err(|e| e.to_string())?;
    let moments = MomentSeries {
        times: series.mean.times.clone(),
        energy: series.mean.values.clone(),
        grad_sq: series.variance.values.clone(),
    };
    Ok(render_series(
        cfg,
        &[],
        &["note: columns for this scenario are t, mean(u), gpc variance"],
        &moments,
        started,
        false,
    ))
}

/// Renders a stability report as a per-k bracket table.
pub fn render_stability_report(
    report: &StabilityReport<f64>,
    header: &[(&str, String)],
) -> String {
    let mut out = String::new();
    for (k, v) in header {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let _ = writeln!(out, "# t0 = {}", sig17(report.t0));
    let _ = writeln!(out, "# t1 = {}", sig17(report.t1));
    let _ = writeln!(out, "# max_abs_z = {}", sig17(report.max_abs_z));
    let _ = writeln!(out, "# feasible = {}", report.feasible);
    let _ = writeln!(out, "k,bracket");
    for &(k, b) in &report.brackets {
        let _ = writeln!(out, "{k},{}", sig17(b));
    }
    out
}

fn run_select_memory(cfg: &RunConfig, _started: Instant) -> Result<ScenarioOutput, String> {
    let nu = viscosity(cfg);
    let tensor = TripleTensor::with_default_rule(cfg.m);
    let k_max = (cfg.n / 2) as i64;
    let report = match (cfg.t0, cfg.t1) {
        // Assess an explicit pair instead of searching.
        (Some(t0), Some(t1)) => assess(k_max, cfg.dt, t0, t1, &nu, &tensor),
        _ => {
            let selection =
                select_memory_lengths(k_max, cfg.dt, &nu, &tensor, SelectGrid::default())
                    .map_err(|e| e.to_string())?;
            selection.report
        }
    };
    let header = [
        ("scenario", cfg.scenario.name().to_string()),
        ("kmax", k_max.to_string()),
        ("dt", sig17(cfg.dt)),
        ("nu0", sig17(cfg.nu0)),
        ("nu1", sig17(cfg.nu1)),
    ];
    Ok(ScenarioOutput {
        csv: render_stability_report(&report, &header),
        blow_up: false,
    })
}

fn run_tensor(cfg: &RunConfig, _started: Instant) -> Result<ScenarioOutput, String> {
    Ok(ScenarioOutput {
        csv: render_tensor(cfg.m),
        blow_up: false,
    })
}

/// Nonzero `(l, m, r, c)` quadruples as CSV.
pub fn render_tensor(m: usize) -> String {
    let tensor = TripleTensor::<f64>::with_default_rule(m);
    let mut out = String::from("l,m,r,c\n");
    for (l, mm, r, c) in tensor.iter_nonzero() {
        let _ = writeln!(out, "{l},{mm},{r},{}", sig17(c));
    }
    out
}

/// Writes the scenario output to `path`.
pub fn emit(output: &ScenarioOutput, path: &Path) -> Result<(), String> {
    std::fs::write(path, &output.csv)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}
