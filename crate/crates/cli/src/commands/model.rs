use std::collections::BTreeMap;

use hjortic::argauss::{fit, forecast_with, residuals};
use hjortic::confid::{cd_from_fit, reconstruct_missing};
use hjortic::dist::normal_quantile;
use hjortic::frame::write_csv_to;
use hjortic::modelsel::{aic, bic, fic_with, score_table, sequential_scores};
use hjortic::{ArxFit, ArxSpec, Frame};
use serde::Serialize;
use serde_json::json;

use super::{check_level, load_for, load_future, parse_specs, usage, CmdResult, Ctx};
use crate::args::{FicArgs, FitArgs, ForecastArgs, ModelArgs, SelectArgs};
use crate::output::{num, opt, write_rows};

#[derive(Serialize)]
struct FitSummary<'a> {
    model: String,
    parameters: BTreeMap<String, f64>,
    std_errors: BTreeMap<String, f64>,
    loglik_max: f64,
    aic: f64,
    bic: f64,
    n_effective: usize,
    first_year: i32,
    last_year: i32,
    stationary: bool,
    fit: &'a ArxFit,
}

fn summarize(f: &ArxFit) -> hjortic::Result<FitSummary<'_>> {
    let names = f.spec.param_names();
    let theta = f.params().to_vec();
    let se = f.std_errors()?;
    Ok(FitSummary {
        model: f.spec.to_string(),
        parameters: names.iter().cloned().zip(theta).collect(),
        std_errors: names.into_iter().zip(se).collect(),
        loglik_max: f.loglik_max,
        aic: aic(f),
        bic: bic(f, f.n_effective)?,
        n_effective: f.n_effective,
        first_year: f.first_year,
        last_year: f.last_year,
        stationary: f.stationary,
        fit: f,
    })
}

pub fn run_fit(args: &FitArgs, ctx: &Ctx) -> CmdResult {
    check_level(args.level)?;
    let focus = args.focus.parse()?;
    let (spec, frame) = args.model.load()?;
    let f = fit(&spec, &frame)?;
    let mut out = ctx.output("fit")?;
    let mut body = serde_json::to_value(summarize(&f)?).map_err(anyhow::Error::from)?;
    if let Some(focus) = focus {
        let cd = cd_from_fit(&f, &frame, &focus)?;
        let (lo, hi) = cd.interval(args.level)?;
        body["focus"] = json!({
            "focus": focus.to_string(),
            "estimate": cd.center,
            "spread": cd.spread,
            "level": args.level,
            "interval": [lo, hi],
        });
        out.json("cd", &cd)?;
        out.csv("cd", |w| cd.write_grid_csv(w, 401))?;
    }
    out.summary(args, &body)?;
    let res = residuals(&f, &frame)?.renamed("residual");
    out.csv("residuals", |w| write_csv_to(&Frame::new(vec![res])?, w))?;
    finish(out)
}

pub fn run_forecast(args: &ForecastArgs, ctx: &Ctx) -> CmdResult {
    check_level(args.level)?;
    if args.horizon == 0 {
        return Err(usage("--horizon must be at least 1"));
    }
    let (spec, frame) = args.model.load()?;
    let future = load_future(
        args.future.as_deref(),
        &args.model.data.year_column,
        std::slice::from_ref(&spec),
    )?;
    let f = fit(&spec, &frame)?;
    let steps = forecast_with(&f, &frame, args.horizon, future.as_ref())?;
    let z = normal_quantile(0.5 + args.level / 2.0);
    let mut out = ctx.output("forecast")?;
    out.summary(
        args,
        &json!({
            "model": spec.to_string(),
            "origin": steps[0].year - 1,
            "level": args.level,
            "steps": steps,
        }),
    )?;
    out.csv("", |w| {
        write_rows(
            w,
            &["year", "mean", "sd", "lower", "upper"],
            steps.iter().map(|s| {
                vec![
                    s.year.to_string(),
                    num(s.mean),
                    num(s.sd),
                    num(s.mean - z * s.sd),
                    num(s.mean + z * s.sd),
                ]
            }),
        )
    })?;
    finish(out)
}

pub fn run_select(args: &SelectArgs, ctx: &Ctx) -> CmdResult {
    let cands = match (&args.candidates[..], &args.wide) {
        ([], Some(w)) => {
            let wide = ArxSpec::parse(&args.data.response, w).map_err(|e| usage(e.to_string()))?;
            wide.submodels()
        }
        ([], None) => return Err(usage("give --candidate descriptors or --wide")),
        (c, _) => parse_specs(&args.data.response, c)?,
    };
    let baseline = match &args.baseline {
        Some(b) => parse_specs(&args.data.response, std::slice::from_ref(b))?.remove(0),
        None => cands[0].clone(),
    };
    let mut all = cands.clone();
    all.push(baseline.clone());
    let frame = load_for(&args.data, &all)?;
    let table = score_table(&cands, &frame)?;
    let best_aic = table
        .iter()
        .max_by(|a, b| a.aic.total_cmp(&b.aic))
        .map(|r| r.label.clone());
    let best_bic = table
        .iter()
        .max_by(|a, b| a.bic.total_cmp(&b.bic))
        .map(|r| r.label.clone());
    let race = match args.race_from {
        Some(year) => Some(sequential_scores(&cands, &frame, &baseline, year)?),
        None => None,
    };
    let mut out = ctx.output("select")?;
    out.summary(
        args,
        &json!({
            "response": args.data.response,
            "table": table,
            "best_aic": best_aic,
            "best_bic": best_bic,
            "race": race.as_ref().map(|r| json!({
                "baseline": r.baseline,
                "first_year": r.years.first(),
                "last_year": r.years.last(),
                "final_diffs": r.labels.iter().enumerate()
                    .map(|(j, l)| (l.clone(), r.diffs.last().and_then(|row| row[j])))
                    .collect::<BTreeMap<_, _>>(),
            })),
        }),
    )?;
    out.csv("", |w| {
        write_rows(
            w,
            &[
                "model",
                "n_params",
                "n_effective",
                "loglik_max",
                "aic",
                "bic",
            ],
            table.iter().map(|r| {
                vec![
                    r.label.clone(),
                    r.n_params.to_string(),
                    r.n_effective.to_string(),
                    num(r.loglik_max),
                    num(r.aic),
                    num(r.bic),
                ]
            }),
        )
    })?;
    if let Some(r) = &race {
        out.csv("race", |w| write_csv_to(&r.to_frame()?, w))?;
    }
    finish(out)
}

pub fn run_fic(args: &FicArgs, ctx: &Ctx) -> CmdResult {
    let focus = args.focus.require()?;
    let wide = ArxSpec::parse(&args.data.response, &args.wide).map_err(|e| usage(e.to_string()))?;
    let cands = if args.candidates.is_empty() {
        wide.submodels()
    } else {
        parse_specs(&args.data.response, &args.candidates)?
    };
    let mut all = cands.clone();
    all.push(wide.clone());
    let frame = load_for(&args.data, &all)?;
    let future = load_future(args.future.as_deref(), &args.data.year_column, &all)?;
    let report = fic_with(&cands, &wide, &frame, &focus, future.as_ref())?;
    let mut out = ctx.output("fic")?;
    out.summary(
        args,
        &json!({
            "best": report.best().map(|e| e.label.clone()),
            "report": report,
        }),
    )?;
    out.csv("", |w| report.write_plot_csv(w))?;
    out.csv("table", |w| {
        write_rows(
            w,
            &[
                "model",
                "n_params",
                "focus_estimate",
                "variance",
                "bias",
                "sq_bias",
                "fic_score",
            ],
            report.entries.iter().map(|e| {
                vec![
                    e.label.clone(),
                    e.n_params.to_string(),
                    num(e.focus_estimate),
                    num(e.variance),
                    num(e.bias),
                    num(e.sq_bias),
                    num(e.fic_score),
                ]
            }),
        )
    })?;
    finish(out)
}

pub fn run_reconstruct(args: &ModelArgs, ctx: &Ctx) -> CmdResult {
    let (spec, frame) = args.load()?;
    let f = fit(&spec, &frame)?;
    let s = frame.get(&spec.response)?;
    let rec = reconstruct_missing(s, &f)?;
    let filled: Vec<i32> = s
        .years()
        .enumerate()
        .filter(|&(i, _)| s.is_masked(i))
        .map(|(_, y)| y)
        .collect();
    let mut out = ctx.output("reconstruct")?;
    out.summary(
        args,
        &json!({
            "model": spec.to_string(),
            "filled_years": filled,
            "filled": filled.iter().map(|&y| json!({
                "year": y,
                "value": rec.values.get(y),
                "sd": rec.sd.get(y),
            })).collect::<Vec<_>>(),
        }),
    )?;
    out.csv("", |w| {
        write_rows(
            w,
            &["year", "observed", "reconstructed", "sd"],
            s.years().enumerate().map(|(i, y)| {
                vec![
                    y.to_string(),
                    opt(s.at(i)),
                    opt(rec.values.at(i)),
                    opt(rec.sd.at(i)),
                ]
            }),
        )
    })?;
    finish(out)
}

pub fn finish(out: crate::output::Output) -> CmdResult {
    for p in out.written() {
        println!("{}", p.display());
    }
    Ok(())
}
