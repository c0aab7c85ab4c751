use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;
use stratsim::coeffs::{table::export_table, CoeffEngine, IntegralSpec, Weights};
use stratsim::harness::{
    formula_cells, published_cells, reference_level, strong_order_experiment,
    validate_error_formulas, SlopeStatus, MIN_VALIDATION_SAMPLES,
};
use stratsim::mserror::{
    component_patterns, mc_error_estimate, ms_error_double, ms_error_permutation, select_family_q,
    tail_bound_log, upper_bound_factorial, Convention, ErrorMethod, SelectOptions,
};
use stratsim::scheme::{
    simulate as run_simulation, Builtin, Order, QLevels, SchemeConfig, SdeProblem,
};
use stratsim::Error;

use crate::settings::{parse_list, parse_q_range, Echo, FileConfig};
use crate::{
    ConvergeArgs, ErrorsArgs, Failure, GenCoeffsArgs, SchemeArgs, SimulateArgs, ValidateArgs,
};

/// Where tables go: files in a directory, or stdout.
struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn new(dir: Option<PathBuf>) -> Result<Self, Failure> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)
                .map_err(|e| Failure::usage(format!("cannot create {}: {e}", d.display())))?;
        }
        Ok(Self { dir })
    }

    fn table(&self, name: &str, content: &str) -> Result<(), Failure> {
        match &self.dir {
            Some(d) => write_file(&d.join(name), content),
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }

    fn finish(&self, echo: &Echo, summary: serde_json::Value) -> Result<(), Failure> {
        if let Some(d) = &self.dir {
            write_file(&d.join("config.txt"), &echo.render())?;
            let doc = json!({ "config": echo.json(), "summary": summary });
            write_file(
                &d.join("summary.json"),
                &(serde_json::to_string_pretty(&doc).unwrap() + "\n"),
            )?;
        }
        Ok(())
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    fs::write(path, content)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

/// Shortest round-trip form, in scientific notation outside `[1e−4, 1e6)`.
fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-4..1e6).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), num)
}

pub fn gen_coeffs(a: GenCoeffsArgs, file: &FileConfig) -> Result<(), Failure> {
    let weights: Weights = file.require(a.weights, "weights")?.parse()?;
    let q: usize = file.require(a.q, "q")?;
    let out: Option<PathBuf> = file.pick(a.out, "out")?;
    let tensor = CoeffEngine::global().build_tensor(&weights, q, 1.0)?;
    let mut buf = Vec::new();
    export_table(&tensor, &mut buf)?;
    let mut echo = Echo::new("gen-coeffs");
    echo.set("weights", &weights);
    echo.set("q", q);
    match out {
        Some(path) => {
            echo.set("out", path.display());
            fs::write(&path, &buf)
                .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
            write_file(&path.with_extension("config"), &echo.render())?;
            let doc = json!({
                "config": echo.json(),
                "summary": { "weights": weights.to_string(), "q": q, "entries": tensor.len() },
            });
            write_file(
                &path.with_extension("summary.json"),
                &(serde_json::to_string_pretty(&doc).unwrap() + "\n"),
            )?;
        }
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

pub fn errors(a: ErrorsArgs, file: &FileConfig) -> Result<(), Failure> {
    let families: Vec<Weights> = match file.pick(a.weights, "weights")? {
        Some(s) => parse_list(&s)?,
        None => Weights::scheme_families(),
    };
    let q_range: Option<String> = file.pick(a.q, "q")?;
    let qs = q_range
        .as_deref()
        .map(parse_q_range)
        .transpose()?
        .unwrap_or_default();
    let delta: f64 = file.require(a.delta, "delta")?;
    let c_target = file.or(a.c_target, "c-target", 1.0)?;
    let m = file.or(a.m, "m", 2)?;
    let samples: Option<usize> = file.pick(a.samples, "samples")?;
    let seed = file.or(a.seed, "seed", 0)?;
    let out = Output::new(file.pick(a.out, "out")?)?;
    if m == 0 {
        return Err(Failure::usage("--m must be at least 1"));
    }
    if let Some(n) = samples {
        if n < 2 {
            return Err(Failure::usage("--samples must be at least 2"));
        }
    }

    let mut echo = Echo::new("errors");
    echo.set(
        "weights",
        families
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    if let Some(q) = &q_range {
        echo.set("q", q);
    }
    echo.set("delta", delta);
    echo.set("c-target", c_target);
    echo.set("m", m);
    if let Some(n) = samples {
        echo.set("samples", n);
    }
    echo.set("seed", seed);

    let mut rows = String::from("spec\tq\texact\tbound\tmc_mean\tmc_se\tmethod\n");
    let mut cell = 0u64;
    for w in &families {
        let k = w.multiplicity();
        for comps in component_patterns(k, m) {
            let spec = IntegralSpec::new(w.clone(), comps)?;
            for &q in &qs {
                let (exact, bound, method) = match k {
                    1 => (0.0, None, ErrorMethod::ClosedForm),
                    2 => {
                        let c = spec.components();
                        let e = ms_error_double(w, q, delta, c[0] == c[1])?;
                        let b = if w.total() == 0 && c[0] != c[1] && q >= 1 {
                            Some(tail_bound_log(q, delta)?)
                        } else {
                            None
                        };
                        (e, b, ErrorMethod::ClosedForm)
                    }
                    _ => {
                        let t = CoeffEngine::global().build_tensor(w, q, delta)?;
                        let e = ms_error_permutation(&spec, &t)?;
                        let b = if spec.pairwise_distinct() {
                            None
                        } else {
                            Some(upper_bound_factorial(&spec, &t)?)
                        };
                        (e, b, ErrorMethod::PermutationForm)
                    }
                };
                let mc = match samples {
                    Some(n) if k >= 2 => {
                        let conv = if spec.pairwise_distinct() || (k == 2 && w.total() == 0) {
                            Convention::Stratonovich
                        } else {
                            Convention::Ito
                        };
                        cell += 1;
                        let est = mc_error_estimate(
                            &spec,
                            q,
                            reference_level(k, q),
                            n,
                            delta,
                            seed.wrapping_add(cell << 32),
                            conv,
                        )?;
                        Some(est)
                    }
                    _ => None,
                };
                writeln!(
                    rows,
                    "{spec}\t{q}\t{}\t{}\t{}\t{}\t{method}",
                    num(exact),
                    opt(bound),
                    opt(mc.map(|e| e.mean)),
                    opt(mc.map(|e| e.std_error)),
                )
                .unwrap();
            }
        }
    }

    let threshold = c_target * delta.powi(6);
    let mut qtab = String::from("family\tq\terror\tthreshold\tstatus\n");
    let mut selected = serde_json::Map::new();
    for w in &families {
        match select_family_q(w, m, delta, c_target, &SelectOptions::default()) {
            Ok((q, reports)) => {
                let worst = reports.iter().filter_map(|r| r.best()).fold(0.0, f64::max);
                writeln!(qtab, "{w}\t{q}\t{}\t{}\tok", num(worst), num(threshold)).unwrap();
                selected.insert(w.to_string(), json!(q));
            }
            Err(Error::QExceedsCap { cap, .. }) => {
                writeln!(qtab, "{w}\t-\t-\t{}\texceeds-cap-{cap}", num(threshold)).unwrap();
                selected.insert(w.to_string(), serde_json::Value::Null);
            }
            Err(e) => return Err(e.into()),
        }
    }
    if !qs.is_empty() {
        out.table("errors.tsv", &rows)?;
    }
    out.table("q_levels.tsv", &qtab)?;
    out.finish(
        &echo,
        json!({ "threshold": threshold, "selected_q": selected }),
    )
}

struct SchemeSetup {
    builtin: Builtin,
    problem: SdeProblem,
    config: SchemeConfig,
    x0: Vec<f64>,
    paths: usize,
    t_end: f64,
    out: Output,
    echo: Echo,
}

fn scheme_setup(
    command: &str,
    a: SchemeArgs,
    delta: f64,
    default_paths: usize,
    file: &FileConfig,
) -> Result<SchemeSetup, Failure> {
    let id: String = file.require(a.problem, "problem")?;
    let mut builtin = Builtin::from_id(&id)?;
    if let Builtin::Gbm { alpha, beta } = &mut builtin {
        *alpha = file.or(a.alpha, "alpha", *alpha)?;
        *beta = file.or(a.beta, "beta", *beta)?;
    }
    let order: Order = file.or(a.order, "order", "2.5".to_string())?.parse()?;
    let q: Option<usize> = file.pick(a.q, "q")?;
    let c_target = file.or(a.c_target, "c-target", 1.0)?;
    let seed = file.or(a.seed, "seed", 0)?;
    let paths = file.or(a.paths, "paths", default_paths)?;
    let t_end = file.or(a.t_end, "t-end", 1.0)?;
    let x0 = match file.pick(a.x0, "x0")? {
        Some(s) => parse_list::<f64>(&s)?,
        None => builtin.default_x0(),
    };
    let problem = builtin.problem();
    if x0.len() != problem.n() {
        return Err(Failure::usage(format!(
            "--x0 has {} entries, problem {id} has dimension {}",
            x0.len(),
            problem.n()
        )));
    }
    let mut config = SchemeConfig::new(order, delta)
        .with_seed(seed)
        .with_c_target(c_target);
    if let Some(q) = q {
        config = config.with_q_levels(QLevels::uniform(order, q));
    }
    let out = Output::new(file.pick(a.out, "out")?)?;

    let mut echo = Echo::new(command);
    echo.set("problem", &id);
    if let Builtin::Gbm { alpha, beta } = builtin {
        echo.set("alpha", alpha);
        echo.set("beta", beta);
    }
    echo.set("order", order);
    if let Some(q) = q {
        echo.set("q", q);
    }
    echo.set("c-target", c_target);
    echo.set("seed", seed);
    echo.set("paths", paths);
    echo.set("t-end", t_end);
    echo.set(
        "x0",
        x0.iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    Ok(SchemeSetup {
        builtin,
        problem,
        config,
        x0,
        paths,
        t_end,
        out,
        echo,
    })
}

fn q_json(q: &QLevels) -> serde_json::Value {
    serde_json::Value::Object(q.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

pub fn simulate(a: SimulateArgs, file: &FileConfig) -> Result<(), Failure> {
    let delta: f64 = file.require(a.delta, "delta")?;
    let mut s = scheme_setup("simulate", a.scheme, delta, 1, file)?;
    s.echo.set("delta", delta);
    let q = s.config.resolve_q_levels(s.problem.m())?;
    let trajs = run_simulation(&s.problem, &s.config, &s.x0, s.t_end, s.paths)?;
    let (n, m) = (s.problem.n(), s.problem.m());
    let mut t = String::from("path\tt");
    for i in 1..=n {
        write!(t, "\tx{i}").unwrap();
    }
    for i in 1..=m {
        write!(t, "\tw{i}").unwrap();
    }
    t.push('\n');
    for (p, traj) in trajs.iter().enumerate() {
        if p > 0 {
            t.push('\n');
        }
        for ((time, x), w) in traj.times.iter().zip(&traj.states).zip(&traj.wiener) {
            write!(t, "{p}\t{time}").unwrap();
            for v in x.iter().chain(w) {
                write!(t, "\t{v}").unwrap();
            }
            t.push('\n');
        }
    }
    s.out.table("trajectories.tsv", &t)?;
    let blown: Vec<usize> = trajs
        .iter()
        .enumerate()
        .filter(|(_, tr)| tr.blew_up)
        .map(|(p, _)| p)
        .collect();
    s.out.finish(
        &s.echo,
        json!({
            "problem": s.builtin.id(),
            "order": s.config.order.to_string(),
            "q_levels": q_json(&q),
            "paths": trajs.len(),
            "steps": trajs.first().map_or(0, |tr| tr.times.len() - 1),
            "blown_up_paths": blown,
        }),
    )?;
    if !blown.is_empty() {
        return Err(Failure::numeric(format!("{} paths blew up", blown.len())));
    }
    Ok(())
}

pub fn converge(a: ConvergeArgs, file: &FileConfig) -> Result<(), Failure> {
    let deltas: Vec<f64> = match file.pick(a.deltas, "deltas")? {
        Some(s) => parse_list(&s)?,
        None => (3..=7).map(|k| 2f64.powi(-k)).collect(),
    };
    let min_order: Option<f64> = file.pick(a.min_order, "min-order")?;
    let first = *deltas
        .first()
        .ok_or_else(|| Failure::usage("--deltas is empty"))?;
    let mut s = scheme_setup("converge", a.scheme, first, 1000, file)?;
    s.echo.set(
        "deltas",
        deltas
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    if let Some(mo) = min_order {
        s.echo.set("min-order", mo);
    }
    let report = strong_order_experiment(&s.problem, &s.config, &s.x0, &deltas, s.t_end, s.paths)?;
    let mut t = String::from("delta\trms_error\tmse_std_error\n");
    for ((d, e), se) in report
        .deltas
        .iter()
        .zip(&report.rms_errors)
        .zip(&report.mse_std_errors)
    {
        writeln!(t, "{}\t{}\t{}", num(*d), num(*e), num(*se)).unwrap();
    }
    let status = match report.status {
        SlopeStatus::Fitted => "fitted",
        SlopeStatus::Inconclusive => "inconclusive",
        SlopeStatus::Undefined => "undefined",
    };
    writeln!(
        t,
        "# order {} r2 {} status {status}",
        opt(report.fitted_order),
        opt(report.r_squared)
    )
    .unwrap();
    s.out.table("convergence.tsv", &t)?;
    let pass = match (report.status, min_order, report.fitted_order) {
        (SlopeStatus::Fitted, Some(mo), Some(slope)) => slope >= mo,
        _ => true,
    };
    s.out.finish(
        &s.echo,
        json!({
            "problem": s.builtin.id(),
            "order": s.config.order.to_string(),
            "deltas": report.deltas,
            "rms_errors": report.rms_errors,
            "fitted_order": report.fitted_order,
            "intercept": report.intercept,
            "r_squared": report.r_squared,
            "residuals": report.residuals,
            "status": status,
            "pass": pass,
        }),
    )?;
    if !pass {
        return Err(Failure::acceptance(format!(
            "fitted order {} is below {}",
            opt(report.fitted_order),
            opt(min_order)
        )));
    }
    Ok(())
}

pub fn validate(a: ValidateArgs, file: &FileConfig) -> Result<(), Failure> {
    let suite = file.or(a.suite, "suite", "all".to_string())?;
    let delta = file.or(a.delta, "delta", 1.0)?;
    let samples = file.or(a.samples, "samples", 100_000)?;
    let seed = file.or(a.seed, "seed", 0)?;
    let out = Output::new(file.pick(a.out, "out")?)?;
    if samples < MIN_VALIDATION_SAMPLES {
        return Err(Failure::usage(format!(
            "--samples must be at least {MIN_VALIDATION_SAMPLES}, got {samples}"
        )));
    }
    let cells = match suite.as_str() {
        "published" => published_cells(),
        "formulas" => formula_cells(),
        "all" => formula_cells()
            .into_iter()
            .chain(published_cells())
            .collect(),
        other => {
            return Err(Failure::usage(format!(
                "unknown suite {other:?}; use published, formulas or all"
            )))
        }
    };
    let mut echo = Echo::new("validate");
    echo.set("suite", &suite);
    echo.set("delta", delta);
    echo.set("samples", samples);
    echo.set("seed", seed);
    let rows = validate_error_formulas(&cells, delta, samples, seed)?;
    let mut t =
        String::from("spec\tq\tq_ref\texact\texpected\tmc_mean\tmc_se\tz\treference\tstatus\n");
    for r in &rows {
        writeln!(
            t,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.3}\t{}\t{}",
            r.spec,
            r.q,
            r.q_ref,
            num(r.exact_error),
            num(r.expected),
            num(r.mc.mean),
            num(r.mc.std_error),
            r.z,
            opt(r.reference),
            if r.pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    out.table("validation.tsv", &t)?;
    let failed = rows.iter().filter(|r| !r.pass).count();
    out.finish(
        &echo,
        json!({
            "cells": rows.len(),
            "failed": failed,
            "rows": rows.iter().map(|r| json!({
                "spec": r.spec.to_string(),
                "q": r.q,
                "z": r.z,
                "pass": r.pass,
            })).collect::<Vec<_>>(),
        }),
    )?;
    if failed > 0 {
        return Err(Failure::acceptance(format!(
            "{failed} of {} cells failed",
            rows.len()
        )));
    }
    Ok(())
}
