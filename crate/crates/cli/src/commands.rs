use crate::{CurveArgs, LayoutArgs, SeekArgs, TableArgs};
use anyhow::{bail, Context, Result};
use arraylab::exact::decimal_sig;
use arraylab::layout::{parse_kind_tag, Layout, LayoutError, LayoutKind};
use arraylab::poly::RatPoly;
use arraylab::queueing::QueueError;
use arraylab::reliability::{
    crossover_time, epsilon_expansion, mttdl_no_repair, mttdl_truncated, reliability_poly,
    SurvivorProfile,
};
use arraylab::seek::{expected_seek, mc_seek, published_reference, SeekError, SeekKind};
use arraylab::sim::SimError;
use std::path::PathBuf;

/// 0 success; 2 validation problems; 3 exceeded budgets or unstable models.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    if let Some(le) = e.downcast_ref::<LayoutError>() {
        if matches!(le, LayoutError::TooLarge(_) | LayoutError::BudgetExceeded { .. }) {
            return 3;
        }
    }
    if matches!(e.downcast_ref::<SimError>(), Some(SimError::Unstable { .. })) {
        return 3;
    }
    if matches!(e.downcast_ref::<QueueError>(), Some(QueueError::Unstable { .. })) {
        return 3;
    }
    2
}

/// Table rows and records share one shape: CSV with a fixed header, or a
/// JSON object carrying the same columns and rows.
pub fn emit(
    headers: &[&str],
    rows: &[Vec<String>],
    format: &str,
    out: &Option<PathBuf>,
) -> Result<()> {
    let text = match format {
        "csv" => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(headers)?;
            for row in rows {
                w.write_record(row)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
        "json" => {
            let doc = serde_json::json!({ "columns": headers, "rows": rows });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        other => bail!("unknown format {other:?} (expected csv or json)"),
    };
    write_out(out, &text)
}

pub fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Friendly names on top of the layout tags.
pub fn resolve_layout(name: &str) -> Result<LayoutKind, LayoutError> {
    match name {
        "raid5" => Ok(LayoutKind::Raidk(1)),
        "raid6" => Ok(LayoutKind::Raidk(2)),
        "raid7" => Ok(LayoutKind::Raidk(3)),
        "raid8" => Ok(LayoutKind::Raidk(4)),
        "id" => Ok(LayoutKind::Id(2)),
        "ssp" => Ok(LayoutKind::Sspiral443),
        "weaver" => Ok(LayoutKind::Weaver { t: 3 }),
        other => parse_kind_tag(other),
    }
}

/// The layouts the summary tables cover, in their row order, restricted to
/// the ones constructible at this n.
pub fn table_set(n: u32) -> Vec<(&'static str, LayoutKind)> {
    let mut v: Vec<(&'static str, LayoutKind)> = Vec::new();
    if n >= 2 {
        v.push(("raid5", LayoutKind::Raidk(1)));
    }
    if n >= 2 && n % 2 == 0 {
        v.push(("bm", LayoutKind::Bm));
    }
    if n >= 3 {
        v.push(("cd", LayoutKind::Cd));
    }
    if n >= 4 && n % 2 == 0 {
        v.push(("grd", LayoutKind::Grd));
        v.push(("id", LayoutKind::Id(2)));
    }
    if n >= 3 {
        v.push(("raid6", LayoutKind::Raidk(2)));
    }
    if n >= 4 && n % 2 == 0 {
        v.push(("lsi", LayoutKind::Lsi));
    }
    if n >= 4 {
        v.push(("raid7", LayoutKind::Raidk(3)));
    }
    if n == 8 {
        v.push(("ssp", LayoutKind::Sspiral443));
    }
    if n >= 5 {
        v.push(("raid8", LayoutKind::Raidk(4)));
        v.push(("weaver", LayoutKind::Weaver { t: 3 }));
    }
    v
}

pub fn table(a: &TableArgs) -> Result<()> {
    let (headers, rows): (&[&str], Vec<Vec<String>>) = match a.name.as_str() {
        "mttdl" => (&["layout", "mttdl", "decimal", "formula", "note"], mttdl_rows(a.n)?),
        "epsilon" => {
            (&["layout", "coefficient", "exponent", "formula", "note"], epsilon_rows(a.n)?)
        }
        other => bail!("unknown table {other:?} (expected mttdl or epsilon)"),
    };
    emit(headers, &rows, &a.format, &a.out)
}

fn mttdl_rows(n: u32) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for (name, kind) in table_set(n) {
        let lay = Layout::build(kind, n)?;
        let p = SurvivorProfile::for_layout(&lay)?;
        if name == "lsi" {
            // the summary tables stop this layout's chain after three
            // failures; report that value with the full one alongside
            let t = mttdl_truncated(&p, 3);
            let full = mttdl_no_repair(&p);
            rows.push(vec![
                name.to_string(),
                t.to_string(),
                decimal_sig(&t, 5),
                "mttdl_truncated:3".to_string(),
                format!("untruncated:{full}"),
            ]);
            continue;
        }
        let m = mttdl_no_repair(&p);
        let note = if name == "raid7" && n == 8 {
            "published:638/840".to_string()
        } else {
            String::new()
        };
        rows.push(vec![
            name.to_string(),
            m.to_string(),
            decimal_sig(&m, 5),
            "mttdl_no_repair".to_string(),
            note,
        ]);
    }
    Ok(rows)
}

fn epsilon_rows(n: u32) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for (name, kind) in table_set(n) {
        let lay = Layout::build(kind, n)?;
        let p = SurvivorProfile::for_layout(&lay)?;
        match epsilon_expansion(&p) {
            Some(e) => {
                let note = match (name, n) {
                    ("grd", 8) => "published:14".to_string(),
                    ("ssp", 8) => "published:eps^5".to_string(),
                    _ => String::new(),
                };
                rows.push(vec![
                    name.to_string(),
                    e.coeff.to_string(),
                    e.m.to_string(),
                    "epsilon_expansion".to_string(),
                    note,
                ]);
            }
            None => rows.push(vec![
                name.to_string(),
                "0".to_string(),
                String::new(),
                "epsilon_expansion".to_string(),
                "no failing sets".to_string(),
            ]),
        }
    }
    Ok(rows)
}

pub fn curve(a: &CurveArgs) -> Result<()> {
    if !(a.t_max > 0.0 && a.t_max.is_finite()) {
        bail!("t-max must be positive");
    }
    if !(a.step > 0.0 && a.step <= a.t_max) {
        bail!("step must be in (0, t-max]");
    }
    let names: Vec<String> = match &a.layout {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => table_set(a.n).iter().map(|(nm, _)| nm.to_string()).collect(),
    };
    let mut polys: Vec<RatPoly> = Vec::new();
    for nm in &names {
        let kind = resolve_layout(nm)?;
        let lay = Layout::build(kind, a.n)?;
        let p = SurvivorProfile::for_layout(&lay)?;
        polys.push(reliability_poly(&p));
    }
    let mut headers: Vec<&str> = vec!["t"];
    headers.extend(names.iter().map(String::as_str));
    let steps = (a.t_max / a.step).floor() as u64;
    let mut rows = Vec::new();
    for k in 0..=steps {
        let t = k as f64 * a.step;
        let r = (-t).exp();
        let mut row = vec![format!("{t:.6}")];
        row.extend(polys.iter().map(|p| format!("{:.6}", p.eval_f64(r).clamp(0.0, 1.0))));
        rows.push(row);
    }
    emit(&headers, &rows, "csv", &a.out)?;
    // pairwise order changes, as (pair, time in MTTF units) on stderr
    for i in 0..polys.len() {
        for j in i + 1..polys.len() {
            if let Some(t) = crossover_time(&polys[i], &polys[j], 1.0) {
                eprintln!("crossover,{},{},{t:.6}", names[i], names[j]);
            }
        }
    }
    Ok(())
}

pub fn seek(a: &SeekArgs) -> Result<()> {
    let kind = SeekKind::parse(&a.kind)?;
    let mut rows = Vec::new();
    match expected_seek(kind) {
        Ok(r) => rows.push(vec![
            "analytic".to_string(),
            r.to_string(),
            decimal_sig(&r, 5),
            kind.tag(),
            String::new(),
        ]),
        Err(SeekError::NoClosedForm(_)) => {
            let p = published_reference(kind).expect("reference value for the no-closed-form walk");
            rows.push(vec![
                "analytic".to_string(),
                "none".to_string(),
                String::new(),
                kind.tag(),
                format!("published:{p}"),
            ]);
        }
        Err(e) => return Err(e.into()),
    }
    let est = mc_seek(kind, a.trials, a.seed)?;
    rows.push(vec![
        "mc_estimate".to_string(),
        format!("{:.6}", est.mean),
        String::new(),
        "mc_seek".to_string(),
        format!("stderr:{:.3e}", est.stderr),
    ]);
    rows.push(vec![
        "samples".to_string(),
        a.trials.to_string(),
        String::new(),
        String::new(),
        format!("seed:{}", a.seed),
    ]);
    emit(&["quantity", "value", "decimal", "formula", "note"], &rows, &a.format, &a.out)
}

pub fn layout(a: &LayoutArgs) -> Result<()> {
    let kind = resolve_layout(&a.layout)?;
    let lay = Layout::build(kind, a.n)?;
    let p = SurvivorProfile::for_layout(&lay)?;
    let mut text = lay.to_text();
    let counts: Vec<String> = p.a.iter().map(|c| c.to_string()).collect();
    text.push_str(&format!("survivors: {}\n", counts.join(" ")));
    let m = mttdl_no_repair(&p);
    text.push_str(&format!("mttdl_no_repair: {m} ({})\n", decimal_sig(&m, 5)));
    write_out(&a.out, &text)
}
