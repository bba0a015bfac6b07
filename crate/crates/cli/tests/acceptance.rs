//! Acceptance gate: one test per acceptance criterion, each printing a single
//! PASS line with the measured numbers. Criteria 1-6 are exact or analytic,
//! 7-9 hold the simulators to their closed-form counterparts at fixed seeds,
//! and 10 drives the installed binary and checks the emitted curve file.

use std::time::Instant;

use arraylab::ctmc::{build_model, RepairTemplate};
use arraylab::exact::{binom, rat, ratio_to_f64, Ratio};
use arraylab::layout::{Layout, LayoutKind};
use arraylab::queueing::{
    mg1_wait, mirrored_read_response, priority_read_wait, vsm_rebuild, DiskMode, MirrorPolicy,
    RebuildParams, ServiceMoments, WorkloadMix,
};
use arraylab::reliability::{
    epsilon_expansion, mttdl_no_repair, mttdl_truncated, SurvivorProfile,
};
use arraylab::repair_formulas::ClosedForm;
use arraylab::seek::{expected_seek, mc_seek, SeekKind};
use arraylab::sim::des::{
    des_queue, des_rebuild, DesConfig, Horizon, RebuildMode, RebuildSimConfig, RoutePolicy,
    ServiceModel,
};
use arraylab::sim::reliability::{
    mc_reliability, Lifetime, McReliabilityConfig, McTarget, RepairModel, Spares,
};
use num_bigint::BigInt;
use num_traits::One;

fn profile(kind: LayoutKind, n: u32) -> SurvivorProfile {
    let lay = Layout::build(kind, n).unwrap();
    SurvivorProfile::for_layout(&lay).unwrap()
}

#[test]
fn criterion_01_no_repair_table_exact() {
    let t0 = Instant::now();
    let frozen = [
        (LayoutKind::Raidk(1), rat(15, 56)),
        (LayoutKind::Bm, rat(163, 280)),
        (LayoutKind::Cd, rat(379, 840)),
        (LayoutKind::Grd, rat(3, 8)),
        (LayoutKind::Id(2), rat(61, 168)),
        (LayoutKind::Raidk(2), rat(73, 168)),
        (LayoutKind::Sspiral443, rat(701, 840)),
        (LayoutKind::Raidk(4), rat(743, 840)),
        (LayoutKind::Weaver { t: 3 }, rat(719, 840)),
    ];
    for (kind, expect) in &frozen {
        let got = mttdl_no_repair(&profile(kind.clone(), 8));
        assert_eq!(&got, expect, "{kind:?} mttdl (MTTF=1 units)");
    }
    let lsi = profile(LayoutKind::Lsi, 8);
    assert_eq!(mttdl_truncated(&lsi, 3), rat(521, 840), "lsi, terms up to three failures");
    assert_eq!(mttdl_no_repair(&lsi), rat(656, 840), "lsi, full enumeration");
    let raid7 = mttdl_no_repair(&profile(LayoutKind::Raidk(3), 8));
    assert_eq!(raid7, rat(533, 840));
    assert_ne!(raid7, rat(638, 840), "published 638/840 does not match the enumeration");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 1 PASS — 11 exact no-repair values at n=8 (lsi 521/840 truncated, \
         656/840 full; raid7 533/840, published 638/840 flagged as mismatch) in {elapsed:?}"
    );
}

#[test]
fn criterion_02_enumeration_matches_closed_forms() {
    let t0 = Instant::now();
    let mut checked = 0usize;
    for n in [4u32, 6, 8, 10] {
        let mut kinds = vec![LayoutKind::Bm, LayoutKind::Grd, LayoutKind::Id(2), LayoutKind::Cd];
        for k in 1..=4u32.min(n - 1) {
            kinds.push(LayoutKind::Raidk(k));
        }
        for kind in kinds {
            let lay = Layout::build(kind.clone(), n).unwrap();
            let enumerated = SurvivorProfile::enumerate(&lay).unwrap();
            let closed = SurvivorProfile::closed_form(&kind, n)
                .unwrap()
                .unwrap_or_else(|| panic!("{kind:?} n={n} has a closed form"));
            assert_eq!(enumerated, closed, "{kind:?} n={n}");
            checked += 1;
        }
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 2 PASS — enumeration equals closed-form survivor counts for \
         {checked} (layout, n) pairs over n in {{4,6,8,10}}, all failure levels, in {elapsed:?}"
    );
}

#[test]
fn criterion_03_published_failure_counts() {
    let lsi = profile(LayoutKind::Lsi, 8);
    assert_eq!(lsi.a[3], BigInt::from(52), "lsi survives 52 of 56 three-failure sets");
    let loss4 = Ratio::one() - lsi.visits(4);
    assert_eq!(loss4, rat(25, 70), "lsi loses 25 of the 70 four-failure sets");
    let ssp = profile(LayoutKind::Sspiral443, 8);
    assert_eq!(ssp.a[4], BigInt::from(56), "ssp survives 56 of 70 four-failure sets");
    assert_eq!(binom(8, 4) - &ssp.a[4], BigInt::from(14), "ssp data loss in 14 cases");
    let weaver = profile(LayoutKind::Weaver { t: 3 }, 8);
    assert_eq!(binom(8, 4) - &weaver.a[4], BigInt::from(8), "weaver fails 8 of 70");
    println!(
        "criterion 3 PASS — lsi A(8,3)=52 and four-failure loss 25/70; ssp A(8,4)=56 \
         (14 loss cases); weaver fails exactly 8 of 70 four-failure sets"
    );
}

#[test]
fn criterion_04_epsilon_leading_terms() {
    let mut cases: Vec<(LayoutKind, u32, i64, Option<&str>)> = vec![
        (LayoutKind::Bm, 2, 4, None),
        (LayoutKind::Cd, 2, 8, None),
        (LayoutKind::Id(2), 2, 12, None),
        (LayoutKind::Grd, 2, 16, Some("published coefficient is 14")),
        (LayoutKind::Lsi, 3, 4, None),
        (LayoutKind::Sspiral443, 4, 14, Some("published exponent is 5")),
    ];
    for k in 1..=4 {
        let coeff = binom(8, k as u64 + 1);
        let coeff_i64: i64 = coeff.to_string().parse().unwrap();
        cases.push((LayoutKind::Raidk(k), k + 1, coeff_i64, None));
    }
    let mut notes = Vec::new();
    for (kind, m, coeff, note) in &cases {
        let eps = epsilon_expansion(&profile(kind.clone(), 8))
            .unwrap_or_else(|| panic!("{kind:?} has failing sets"));
        assert_eq!(eps.m, *m, "{kind:?} leading exponent");
        assert_eq!(eps.coeff, BigInt::from(*coeff), "{kind:?} leading coefficient");
        if let Some(n) = note {
            notes.push(format!("{} {coeff}e^{m} holds, {n}", kind.tag()));
        }
    }
    println!(
        "criterion 4 PASS — leading unreliability terms match enumeration for {} layouts \
         at n=8; documented deviations: {}",
        cases.len(),
        notes.join("; ")
    );
}

#[test]
fn criterion_05_repair_chain_exact() {
    let delta = rat(1, 1_000_000);
    let mu = rat(1, 10);
    let model = build_model(&RepairTemplate::Raid5Repair {
        n: 8,
        delta: delta.clone(),
        mu: mu.clone(),
    })
    .unwrap();
    let mtta = model.solve_mtta().unwrap();
    assert!(mtta.exact);
    // ((2N−1)δ + μ) / (N(N−1)δ²) at N = 8
    let formula = (rat(15, 1) * &delta + &mu) / (rat(56, 1) * &delta * &delta);
    assert_eq!(mtta.value, formula, "three-state chain vs closed form");

    let printed = ClosedForm::Raid5Inf { n: 8, mttf: rat(1_000_000, 1), mttr: rat(10, 1) }
        .evaluate()
        .unwrap();
    let rel = ratio_to_f64(&((&mtta.value - &printed) / &mtta.value));
    let loose = 15.0 * 1e-6 / 0.1; // (2N−1)δ/μ
    let tight = 7.0 * 1e-6 / 0.1; // (N−1)δ/μ
    assert!(rel > 0.0 && rel < loose, "rel {rel:.4e} vs bound {loose:.4e}");
    // the tighter (N−1)δ/μ bound is not achievable: the gap is (2N−1)δ/((2N−1)δ+μ)
    assert!(rel > tight, "rel {rel:.4e} unexpectedly under {tight:.4e}");

    let mttf = rat(1_000_000, 1);
    let mttr = rat(10, 1);
    let unlimited = ClosedForm::RaidkUnlimitedRepair {
        n: 8,
        k: 2,
        mttf: mttf.clone(),
        mttr: mttr.clone(),
    }
    .evaluate()
    .unwrap();
    let corrected =
        ClosedForm::RaidkCorrected { n: 8, k: 2, mttf, mttr }.evaluate().unwrap();
    let factor = ratio_to_f64(&(&unlimited / &corrected));
    assert!(
        (factor / 2.0 - 1.0).abs() < 0.02,
        "unlimited-repair / single-repair = {factor:.5}, expected about 2! = 2"
    );
    println!(
        "criterion 5 PASS — chain solution equals ((2N−1)δ+μ)/(N(N−1)δ²) exactly; \
         gap to the two-term form is {rel:.3e} (< {loose:.1e}, above the often-quoted \
         {tight:.1e}); unlimited/single repair ratio {factor:.4} ≈ 2!"
    );
}

#[test]
fn criterion_06_queueing_closed_forms() {
    let t0 = Instant::now();
    let x = ServiceMoments::exponential(1.0).unwrap();
    // reads 2/3 of a rate-1.2 stream over one mirrored pair: rho 0.8, rho_r 0.4
    let mix = WorkloadMix::new(1.2, 1, 2.0 / 3.0, x, x).unwrap();
    let pw = priority_read_wait(&mix, DiskMode::Normal).unwrap();
    assert!((pw.ratio - 1.0 / 3.0).abs() < 1e-12, "priority ratio {}", pw.ratio);
    assert!((pw.read_wait - 4.0 / 3.0).abs() < 1e-12);

    let shared = mirrored_read_response(MirrorPolicy::Shared, 0.9, 1.0).unwrap();
    assert!((shared.response - 1.0 / 0.19).abs() < 1e-9, "M/M/2 at rho 0.9");

    // one mirror lost at per-disk read load 0.4: survivor runs at rho 0.8
    let degraded = mirrored_read_response(MirrorPolicy::Uniform, 0.8, 1.0).unwrap();
    assert!((degraded.response - 5.0).abs() < 1e-12, "degraded response 5x");

    for i in 1..=99 {
        let rho = i as f64 / 100.0;
        let rr = mirrored_read_response(MirrorPolicy::RoundRobin, rho, 1.0).unwrap();
        let sigma = rr.erlang_root.unwrap();
        assert!(sigma > 0.0 && sigma < rho, "sigma {sigma} !in (0, {rho})");
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "criterion 6 PASS — W_r/W = 1/3 at (rho, rho_r) = (0.8, 0.4); M/M/2 response \
         x/0.19 at rho 0.9; degraded response 5x at doubled load; sigma < rho on the \
         99-point grid; {elapsed:?}"
    );
}

#[allow(clippy::too_many_arguments)]
fn queue_cfg(
    arrival_rate: f64,
    read_fraction: f64,
    disks: u32,
    service: ServiceModel,
    routing: RoutePolicy,
    read_priority: bool,
    arrivals: u64,
    seed: u64,
) -> DesConfig {
    DesConfig {
        arrival_rate,
        read_fraction,
        disks,
        service,
        routing,
        read_priority,
        horizon: Horizon::Arrivals(arrivals),
        seed,
    }
}

#[test]
fn criterion_07_des_matches_analytic() {
    let t0 = Instant::now();
    let mut arrivals_total = 0u64;

    // M/M/1 at rho 0.5
    let mm1 = des_queue(&queue_cfg(
        0.5,
        1.0,
        1,
        ServiceModel::Exponential { mean: 1.0 },
        RoutePolicy::Uniform,
        false,
        1_000_000,
        101,
    ))
    .unwrap();
    arrivals_total += mm1.served;
    let w_mm1 = mg1_wait(0.5, ServiceMoments::exponential(1.0).unwrap()).unwrap();
    let hw = mm1.wait.half_width_95();
    assert!(
        (mm1.wait.mean - w_mm1).abs() <= hw,
        "M/M/1 wait {:.4} vs {w_mm1:.4} (hw {hw:.4})",
        mm1.wait.mean
    );

    // M/D/1 at rho 0.5
    let md1 = des_queue(&queue_cfg(
        0.5,
        1.0,
        1,
        ServiceModel::Deterministic { mean: 1.0 },
        RoutePolicy::Uniform,
        false,
        1_000_000,
        102,
    ))
    .unwrap();
    arrivals_total += md1.served;
    let w_md1 = mg1_wait(0.5, ServiceMoments::deterministic(1.0).unwrap()).unwrap();
    let hw = md1.wait.half_width_95();
    assert!(
        (md1.wait.mean - w_md1).abs() <= hw,
        "M/D/1 wait {:.4} vs {w_md1:.4} (hw {hw:.4})",
        md1.wait.mean
    );

    // strict alternation over two disks: each sees Erlang-2 arrivals
    let rr = des_queue(&queue_cfg(
        1.0,
        1.0,
        2,
        ServiceModel::Exponential { mean: 1.0 },
        RoutePolicy::RoundRobin,
        false,
        1_000_000,
        103,
    ))
    .unwrap();
    arrivals_total += rr.served;
    let w_rr = mirrored_read_response(MirrorPolicy::RoundRobin, 0.5, 1.0)
        .unwrap()
        .wait
        .unwrap();
    let hw = rr.wait.half_width_95();
    assert!(
        (rr.wait.mean - w_rr).abs() <= hw,
        "alternating-arrival wait {:.4} vs {w_rr:.4} (hw {hw:.4})",
        rr.wait.mean
    );

    // reads ahead of writes at (rho, rho_r) = (0.8, 0.4)
    let prio = des_queue(&queue_cfg(
        1.2,
        2.0 / 3.0,
        2,
        ServiceModel::Exponential { mean: 1.0 },
        RoutePolicy::Uniform,
        true,
        1_000_000,
        104,
    ))
    .unwrap();
    arrivals_total += prio.served;
    let x = ServiceMoments::exponential(1.0).unwrap();
    let mix = WorkloadMix::new(1.2, 1, 2.0 / 3.0, x, x).unwrap();
    let w_prio = priority_read_wait(&mix, DiskMode::Normal).unwrap().read_wait;
    let read_wait = prio.read_wait.expect("read class present");
    let hw = read_wait.half_width_95();
    assert!(
        (read_wait.mean - w_prio).abs() <= hw,
        "priority read wait {:.4} vs {w_prio:.4} (hw {hw:.4})",
        read_wait.mean
    );

    // rebuild by idle-time track copies: user delay gains the track residual
    let vsm = des_rebuild(&RebuildSimConfig {
        arrival_rate: 0.03,
        service: ServiceModel::Exponential { mean: 10.0 },
        t_rot: 8.33,
        n_track: 20_000,
        mode: RebuildMode::Vsm,
        replications: 8,
        seed: 105,
    })
    .unwrap();
    arrivals_total += vsm.served;
    let mix_r = WorkloadMix::new(0.03, 1, 1.0, ServiceMoments::exponential(10.0).unwrap(), x)
        .unwrap();
    let w_vsm = vsm_rebuild(&mix_r, &RebuildParams::deterministic_track(8.33, 20_000).unwrap())
        .unwrap()
        .wait;
    // eight replications: 95% t-quantile is 2.365 standard errors
    let hw = 2.37 * vsm.wait.stderr;
    assert!(
        (vsm.wait.mean - w_vsm).abs() <= hw,
        "vacation-rebuild wait {:.4} vs {w_vsm:.4} (hw {hw:.4})",
        vsm.wait.mean
    );

    // the circulating rebuild customer must never beat idle-time rebuilding
    for i in 1..=5u64 {
        let lambda = i as f64 / 100.0; // rho = 0.1 .. 0.5 at mean service 10
        let run = |mode| {
            des_rebuild(&RebuildSimConfig {
                arrival_rate: lambda,
                service: ServiceModel::Exponential { mean: 10.0 },
                t_rot: 8.33,
                n_track: 5_000,
                mode,
                replications: 3,
                seed: 110 + i,
            })
            .unwrap()
        };
        let vsm_run = run(RebuildMode::Vsm);
        let pcm_run = run(RebuildMode::Pcm);
        assert!(
            pcm_run.response.mean >= vsm_run.response.mean,
            "rho {:.1}: queued-customer response {:.3} < vacation response {:.3}",
            lambda * 10.0,
            pcm_run.response.mean,
            vsm_run.response.mean
        );
    }

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "criterion 7 PASS — simulated M/M/1, M/D/1, alternating-arrival, read-priority, \
         and vacation-rebuild waits all inside 95% intervals ({arrivals_total} arrivals \
         served); queued-customer rebuild response >= vacation rebuild at rho 0.1-0.5; \
         {elapsed:?}"
    );
}

#[test]
fn criterion_08_mc_reliability() {
    let t0 = Instant::now();
    let layout = Layout::build(LayoutKind::Raidk(1), 8).unwrap();
    let est = mc_reliability(&McReliabilityConfig {
        target: McTarget::Layout(layout),
        lifetime: Lifetime::Exponential { rate: 1e-6 },
        repair: RepairModel::Exponential { rate: 0.1 },
        spares: Spares::Unlimited,
        trials: 100_000,
        seed: 801,
    })
    .unwrap();
    let target = 1.7857e9;
    let rel = (est.mean / target - 1.0).abs();
    assert!(rel < 0.05, "repairable estimate {:.4e} vs {target:.4e} ({rel:.3})", est.mean);

    // no-repair estimates against every frozen exact value, in MTTF = 1 units;
    // lsi is checked against the full-enumeration value (the truncated one is
    // an analytic device) and raid7 against the corrected 533/840
    let frozen: Vec<(&str, LayoutKind, Ratio)> = vec![
        ("raid5", LayoutKind::Raidk(1), rat(15, 56)),
        ("bm", LayoutKind::Bm, rat(163, 280)),
        ("cd", LayoutKind::Cd, rat(379, 840)),
        ("grd", LayoutKind::Grd, rat(3, 8)),
        ("id", LayoutKind::Id(2), rat(61, 168)),
        ("raid6", LayoutKind::Raidk(2), rat(73, 168)),
        ("lsi", LayoutKind::Lsi, rat(656, 840)),
        ("raid7", LayoutKind::Raidk(3), rat(533, 840)),
        ("ssp", LayoutKind::Sspiral443, rat(701, 840)),
        ("raid8", LayoutKind::Raidk(4), rat(743, 840)),
        ("weaver", LayoutKind::Weaver { t: 3 }, rat(719, 840)),
    ];
    for (i, (name, kind, frac)) in frozen.iter().enumerate() {
        let layout = Layout::build(kind.clone(), 8).unwrap();
        let est = mc_reliability(&McReliabilityConfig {
            target: McTarget::Layout(layout),
            lifetime: Lifetime::Exponential { rate: 1.0 },
            repair: RepairModel::None,
            spares: Spares::Unlimited,
            trials: 20_000,
            seed: 810 + i as u64,
        })
        .unwrap();
        let exact = ratio_to_f64(frac);
        let slack = 3.0 * est.half_width_95();
        assert!(
            (est.mean - exact).abs() <= slack,
            "{name}: {:.4} vs {exact:.4} (slack {slack:.4})",
            est.mean
        );
    }
    let elapsed = t0.elapsed();
    println!(
        "criterion 8 PASS — repairable-array estimate {:.4e} h within {:.2}% of 1.7857e9 h \
         at 1e5 trials; 11 no-repair estimates each within 3 half-widths of the exact \
         value; {elapsed:?}",
        est.mean,
        rel * 100.0
    );
}

#[test]
fn criterion_09_seek_models() {
    let cases = [
        (SeekKind::ReadKway { k: 1 }, rat(1, 3)),
        (SeekKind::ReadKway { k: 2 }, rat(1, 5)),
        (SeekKind::WriteKway { k: 2 }, rat(7, 15)),
        (SeekKind::AapSingle, rat(1, 4)),
        (SeekKind::AapMirrored, rat(1, 8)),
    ];
    for (i, (kind, expect)) in cases.iter().enumerate() {
        assert_eq!(&expected_seek(*kind).unwrap(), expect, "{kind:?} closed form");
        let est = mc_seek(*kind, 1_000_000, 900 + i as u64).unwrap();
        let target = ratio_to_f64(expect);
        assert!(
            (est.mean - target).abs() <= 3.0 * est.stderr,
            "{kind:?}: {:.5} vs {target:.5} (stderr {:.2e})",
            est.mean,
            est.stderr
        );
    }
    let circle = mc_seek(SeekKind::NsCircle, 2_000_000, 907).unwrap();
    let target = ratio_to_f64(&rat(5, 36));
    let rel = (circle.mean / target - 1.0).abs();
    assert!(rel < 0.01, "nearer-server circle {:.5} vs {target:.5}", circle.mean);
    println!(
        "criterion 9 PASS — five seek estimates within 3 standard errors of 1/3, 1/5, \
         7/15, 1/4, 1/8 at 1e6 samples; nearer-server circle walk within {:.2}% of 5/36",
        rel * 100.0
    );
}

#[test]
fn criterion_10_curve_shape() {
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_arraylab"))
        .args(["curve", "--n", "8", "--step", "0.01", "--t-max", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "curve command failed: {out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();

    let mut lines = stdout.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "t,raid5,bm,cd,grd,id,raid6,lsi,raid7,ssp,raid8,weaver");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 301);

    // reliability never rises as the horizon grows
    for j in 1..=11 {
        for w in rows.windows(2) {
            assert!(w[1][j] <= w[0][j] + 1e-12, "column {j} rises at t={}", w[1][0]);
        }
    }
    // raid5 is pointwise lowest
    for row in &rows {
        for j in 2..=11 {
            assert!(row[1] <= row[j] + 1e-12, "raid5 above column {j} at t={}", row[0]);
        }
    }
    // among layouts tolerating at most three failures (columns raid5..raid7),
    // raid7 leads at small t; past t ≈ 0.059 the lsi curve overtakes it
    for row in rows.iter().filter(|r| r[0] > 0.0 && r[0] <= 0.05 + 1e-9) {
        for j in 1..=7 {
            assert!(row[8] >= row[j] - 1e-12, "raid7 below column {j} at t={}", row[0]);
        }
    }
    assert!(
        stderr.lines().any(|l| l.starts_with("crossover,bm,raid6,")),
        "missing bm/raid6 crossover, stderr: {stderr}"
    );
    println!(
        "criterion 10 PASS — emitted curves are monotone, raid7 leads the 3-fault-tolerant \
         group for t <= 0.05, raid5 is pointwise lowest, bm/raid6 crossover reported"
    );
}
