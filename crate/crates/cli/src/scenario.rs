//! Scenario files: one TOML document describing a layout, a workload, a
//! repair setup, and what to run. Fixed seeds and stable formatting make a
//! rerun byte-identical.

use crate::commands::{emit, resolve_layout};
use crate::RunArgs;
use anyhow::{anyhow, bail, Context, Result};
use arraylab::exact::{decimal_sig, format_sig, Ratio};
use arraylab::layout::Layout;
use arraylab::queueing::{
    mg1_wait, mode_metrics, priority_read_wait, vsm_rebuild, DiskMode, RebuildParams,
    ServiceMoments, WorkloadMix,
};
use arraylab::repair_formulas::ClosedForm;
use arraylab::seek::{expected_seek, mc_seek, published_reference, SeekError, SeekKind};
use arraylab::sim::des::{
    des_queue, des_rebuild, DesConfig, Horizon, RebuildMode, RebuildSimConfig, RoutePolicy,
    ServiceModel,
};
use arraylab::sim::reliability::{
    mc_reliability, Lifetime, McReliabilityConfig, McTarget, RepairModel, Spares,
};
use num_traits::Zero;
use serde::Deserialize;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    layout: Option<LayoutSec>,
    workload: Option<WorkloadSec>,
    repair: Option<RepairSec>,
    sim: SimSec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LayoutSec {
    kind: String,
    n: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadSec {
    array_rate: f64,
    #[serde(default = "one_u32")]
    pairs: u32,
    read_fraction: f64,
    #[serde(default = "one_f64")]
    service_mean: f64,
    /// Squared coefficient of variation; 1 = exponential, 0 = deterministic.
    #[serde(default = "one_f64")]
    service_scv: f64,
    #[serde(default)]
    read_priority: bool,
    /// "normal" (default) or "degraded"
    #[serde(default)]
    mode: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RepairSec {
    mttf_hours: Option<f64>,
    mttr_hours: Option<f64>,
    t_rot: Option<f64>,
    n_track: Option<u64>,
    /// "vsm" or "pcm"
    mode: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSec {
    /// queue | mc | seek | des_queue | des_rebuild
    kind: String,
    #[serde(default = "default_seed")]
    seed: u64,
    trials: Option<u64>,
    samples: Option<u64>,
    arrivals: Option<u64>,
    replications: Option<u32>,
    seek: Option<String>,
    disks: Option<u32>,
    routing: Option<String>,
}

fn one_u32() -> u32 {
    1
}
fn one_f64() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    42
}

fn metric(name: &str, value: String, formula: &str, note: String) -> Vec<String> {
    vec!["metric".to_string(), name.to_string(), value, formula.to_string(), note]
}

fn meta(name: &str, value: String) -> Vec<String> {
    vec!["meta".to_string(), name.to_string(), value, String::new(), String::new()]
}

pub fn run(a: &RunArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.scenario)
        .with_context(|| format!("reading scenario {}", a.scenario.display()))?;
    let sc: ScenarioFile = toml::from_str(&text).context("parsing scenario")?;
    let mut rows = vec![
        meta("scenario", sc.sim.kind.clone()),
        meta("seed", sc.sim.seed.to_string()),
        meta("version", env!("CARGO_PKG_VERSION").to_string()),
    ];
    match sc.sim.kind.as_str() {
        "queue" => queue_rows(&sc, &mut rows)?,
        "mc" => mc_rows(&sc, &mut rows)?,
        "seek" => seek_rows(&sc, &mut rows)?,
        "des_queue" => des_queue_rows(&sc, &mut rows)?,
        "des_rebuild" => des_rebuild_rows(&sc, &mut rows)?,
        other => bail!("unknown sim kind {other:?} (expected queue, mc, seek, des_queue, or des_rebuild)"),
    }
    emit(&["kind", "name", "value", "formula", "note"], &rows, &a.format, &a.out)
}

fn workload(sc: &ScenarioFile) -> Result<(WorkloadMix, DiskMode, &WorkloadSec)> {
    let w = sc
        .workload
        .as_ref()
        .ok_or_else(|| anyhow!("this scenario needs a [workload] section"))?;
    let service = ServiceMoments::from_scv(w.service_mean, w.service_scv)?;
    let mix = WorkloadMix::new(w.array_rate, w.pairs, w.read_fraction, service, service)?;
    let mode = match w.mode.as_deref() {
        None | Some("normal") => DiskMode::Normal,
        Some("degraded") => DiskMode::Degraded,
        Some(other) => bail!("workload.mode {other:?} is not normal or degraded"),
    };
    Ok((mix, mode, w))
}

fn queue_rows(sc: &ScenarioFile, rows: &mut Vec<Vec<String>>) -> Result<()> {
    let (mix, mode, w) = workload(sc)?;
    let mm = mode_metrics(&mix, mode);
    rows.push(metric("rho", format_sig(mm.rho, 5), "utilization", String::new()));
    rows.push(metric("rho_read", format_sig(mm.rho_r, 5), "read_utilization", String::new()));
    rows.push(metric(
        "array_rate_max",
        format_sig(mm.array_rate_max, 5),
        "saturation_rate",
        String::new(),
    ));
    let (rate, moments) = mix.disk_demand(mode);
    let fcfs = mg1_wait(rate, moments)?;
    rows.push(metric("fcfs_wait", format_sig(fcfs, 5), "pk_wait", String::new()));
    if w.read_priority {
        let pw = priority_read_wait(&mix, mode)?;
        rows.push(metric(
            "read_wait",
            format_sig(pw.read_wait, 5),
            "priority_read_wait",
            String::new(),
        ));
        rows.push(metric(
            "wait_ratio",
            format_sig(pw.ratio, 5),
            "priority_ratio",
            "read wait over FCFS wait".to_string(),
        ));
    }
    Ok(())
}

fn mc_rows(sc: &ScenarioFile, rows: &mut Vec<Vec<String>>) -> Result<()> {
    let lsec = sc
        .layout
        .as_ref()
        .ok_or_else(|| anyhow!("an mc scenario needs a [layout] section"))?;
    let kind = resolve_layout(&lsec.kind)?;
    let lay = Layout::build(kind.clone(), lsec.n)?;
    let rsec = sc.repair.as_ref();
    let mttf = rsec.and_then(|r| r.mttf_hours).unwrap_or(1.0e6);
    if !(mttf.is_finite() && mttf > 0.0) {
        bail!("repair.mttf_hours must be positive");
    }
    let mttr = rsec.and_then(|r| r.mttr_hours);
    let repair = match mttr {
        Some(v) if v > 0.0 && v.is_finite() => RepairModel::Exponential { rate: 1.0 / v },
        Some(v) => bail!("repair.mttr_hours must be positive (got {v})"),
        None => RepairModel::None,
    };
    let trials = sc.sim.trials.unwrap_or(100_000);
    let cfg = McReliabilityConfig {
        target: McTarget::Layout(lay),
        lifetime: Lifetime::Exponential { rate: 1.0 / mttf },
        repair,
        spares: Spares::Unlimited,
        trials,
        seed: sc.sim.seed,
    };
    let est = mc_reliability(&cfg)?;
    rows.push(meta("trials", trials.to_string()));
    rows.push(metric(
        "mttdl_hours",
        format_sig(est.mean, 5),
        "mc_reliability",
        format!("ci95:{}", format_sig(est.half_width_95(), 3)),
    ));
    if let (arraylab::layout::LayoutKind::Raidk(1), Some(mttr_h)) = (&kind, mttr) {
        let form = ClosedForm::Raid5Uncorrectable {
            n: lsec.n,
            mttf: Ratio::from_float(mttf).unwrap(),
            mttr: Ratio::from_float(mttr_h).unwrap(),
            p_uf: Ratio::zero(),
        };
        let exact = form.evaluate()?;
        let exact_f = arraylab::exact::ratio_to_f64(&exact);
        rows.push(metric(
            "mttdl_closed_form",
            format_sig(exact_f, 5),
            form.id(),
            format!("rel_err:{}", format_sig((est.mean - exact_f).abs() / exact_f, 3)),
        ));
    }
    Ok(())
}

fn seek_rows(sc: &ScenarioFile, rows: &mut Vec<Vec<String>>) -> Result<()> {
    let tag = sc
        .sim
        .seek
        .as_deref()
        .ok_or_else(|| anyhow!("a seek scenario needs sim.seek, e.g. \"read:2\""))?;
    let kind = SeekKind::parse(tag)?;
    match expected_seek(kind) {
        Ok(r) => rows.push(metric("analytic", decimal_sig(&r, 5), &kind.tag(), r.to_string())),
        Err(SeekError::NoClosedForm(_)) => {
            let p = published_reference(kind).expect("reference value for the no-closed-form walk");
            rows.push(metric("analytic", "none".to_string(), &kind.tag(), format!("published:{p}")));
        }
        Err(e) => return Err(e.into()),
    }
    let samples = sc.sim.samples.unwrap_or(200_000);
    let est = mc_seek(kind, samples, sc.sim.seed)?;
    rows.push(metric(
        "mc_estimate",
        format!("{:.6}", est.mean),
        "mc_seek",
        format!("stderr:{:.3e}", est.stderr),
    ));
    Ok(())
}

fn service_model(w: &WorkloadSec) -> Result<ServiceModel> {
    if w.service_scv == 1.0 {
        Ok(ServiceModel::Exponential { mean: w.service_mean })
    } else if w.service_scv == 0.0 {
        Ok(ServiceModel::Deterministic { mean: w.service_mean })
    } else {
        bail!("event simulation supports service_scv 0 or 1 (got {})", w.service_scv)
    }
}

fn des_queue_rows(sc: &ScenarioFile, rows: &mut Vec<Vec<String>>) -> Result<()> {
    let (_, _, w) = workload(sc)?;
    let routing = match sc.sim.routing.as_deref() {
        None | Some("uniform") => RoutePolicy::Uniform,
        Some("round_robin") => RoutePolicy::RoundRobin,
        Some("jsq") => RoutePolicy::Jsq,
        Some(other) => bail!("sim.routing {other:?} is not uniform, round_robin, or jsq"),
    };
    let cfg = DesConfig {
        arrival_rate: w.array_rate,
        read_fraction: w.read_fraction,
        disks: sc.sim.disks.unwrap_or(2),
        service: service_model(w)?,
        routing,
        read_priority: w.read_priority,
        horizon: Horizon::Arrivals(sc.sim.arrivals.unwrap_or(200_000)),
        seed: sc.sim.seed,
    };
    let r = des_queue(&cfg)?;
    rows.push(meta("arrivals", sc.sim.arrivals.unwrap_or(200_000).to_string()));
    rows.push(metric("wait", format_sig(r.wait.mean, 5), "des_queue", ci_note(&r.wait)));
    rows.push(metric("response", format_sig(r.response.mean, 5), "des_queue", ci_note(&r.response)));
    if let Some(rw) = r.read_wait {
        rows.push(metric("read_wait", format_sig(rw.mean, 5), "des_queue", ci_note(&rw)));
    }
    if let Some(ww) = r.write_wait {
        rows.push(metric("write_wait", format_sig(ww.mean, 5), "des_queue", ci_note(&ww)));
    }
    rows.push(metric(
        "in_system_time_avg",
        format_sig(r.time_avg_in_system, 5),
        "des_queue",
        String::new(),
    ));
    rows.push(metric("served", r.served.to_string(), "des_queue", String::new()));
    Ok(())
}

fn ci_note(e: &arraylab::sim::stats::Estimate) -> String {
    format!("ci95:{}", format_sig(e.half_width_95(), 3))
}

fn des_rebuild_rows(sc: &ScenarioFile, rows: &mut Vec<Vec<String>>) -> Result<()> {
    let (_, _, w) = workload(sc)?;
    let rsec = sc
        .repair
        .as_ref()
        .ok_or_else(|| anyhow!("a des_rebuild scenario needs a [repair] section"))?;
    let t_rot = rsec.t_rot.ok_or_else(|| anyhow!("repair.t_rot missing"))?;
    let n_track = rsec.n_track.ok_or_else(|| anyhow!("repair.n_track missing"))?;
    let mode = match rsec.mode.as_deref() {
        None | Some("vsm") => RebuildMode::Vsm,
        Some("pcm") => RebuildMode::Pcm,
        Some(other) => bail!("repair.mode {other:?} is not vsm or pcm"),
    };
    let cfg = RebuildSimConfig {
        arrival_rate: w.array_rate,
        service: service_model(w)?,
        t_rot,
        n_track,
        mode,
        replications: sc.sim.replications.unwrap_or(8),
        seed: sc.sim.seed,
    };
    let r = des_rebuild(&cfg)?;
    rows.push(metric(
        "rebuild_time",
        format_sig(r.rebuild_time.mean, 5),
        "des_rebuild",
        ci_note(&r.rebuild_time),
    ));
    rows.push(metric("wait", format_sig(r.wait.mean, 5), "des_rebuild", ci_note(&r.wait)));
    rows.push(metric("response", format_sig(r.response.mean, 5), "des_rebuild", ci_note(&r.response)));
    if mode == RebuildMode::Vsm && w.array_rate > 0.0 {
        let service = ServiceMoments::from_scv(w.service_mean, w.service_scv)?;
        let mix = WorkloadMix::new(w.array_rate, 1, 1.0, service, service)?;
        let params = RebuildParams::deterministic_track(t_rot, n_track)?;
        let v = vsm_rebuild(&mix, &params)?;
        rows.push(metric(
            "analytic_wait",
            format_sig(v.wait, 5),
            "vsm_wait",
            String::new(),
        ));
    }
    Ok(())
}
