use hjortic::dist::ks_uniform;
use hjortic::frame::write_csv_to;
use hjortic::monitor::{
    adf_test, break_scan, bridge, mean_abs_error_compare, prediction_monitor_detail, rolling_sd,
};
use hjortic::tvar::fit_tvar_local;
use hjortic::Frame;
use serde_json::json;

use super::model::finish;
use super::{read_frame, usage, CmdResult, Ctx};
use crate::args::{AdfArgs, BridgeArgs, MonitorArgs, RollsdArgs, TvarArgs};
use crate::output::{num, write_rows};

pub fn run_monitor(args: &MonitorArgs, ctx: &Ctx) -> CmdResult {
    let (spec, frame) = args.model.load()?;
    let mon = prediction_monitor_detail(&spec, &frame, args.start)?;
    let mae = mean_abs_error_compare(&spec, &frame, args.start, args.naive_window)?;
    let m = mon.m_values();
    let mean_m = m.iter().sum::<f64>() / m.len().max(1) as f64;
    let ks = (!m.is_empty()).then(|| ks_uniform(&m));
    let mut out = ctx.output("monitor")?;
    out.summary(
        args,
        &json!({
            "model": mon.model,
            "start_year": args.start,
            "n_monitored": m.len(),
            "mean_m": mean_m,
            "ks_uniform": ks,
            "mae": mae,
            "rows": mon.rows,
        }),
    )?;
    out.csv("", |w| write_csv_to(&mon.to_frame()?, w))?;
    finish(out)
}

pub fn run_bridge(args: &BridgeArgs, ctx: &Ctx) -> CmdResult {
    if !args.band.is_finite() || args.band <= 0.0 {
        return Err(usage("--band must be positive"));
    }
    let (spec, frame) = args.model.load()?;
    let path = bridge(&spec, &frame)?;
    let scan = break_scan(&path, args.band)?;
    let mut out = ctx.output("bridge")?;
    out.summary(args, &json!({ "scan": scan, "path": path }))?;
    out.csv("", |w| path.write_csv(w))?;
    finish(out)
}

pub fn run_adf(args: &AdfArgs, ctx: &Ctx) -> CmdResult {
    let frame = read_frame(
        &args.data.input,
        &args.data.year_column,
        &[args.data.response.as_str()],
    )?;
    let r = adf_test(frame.get(&args.data.response)?, args.max_lag)?;
    let mut out = ctx.output("adf")?;
    out.summary(args, &json!({ "series": args.data.response, "test": r }))?;
    out.csv("", |w| {
        write_rows(
            w,
            &[
                "series",
                "statistic",
                "lag",
                "n_obs",
                "first_year",
                "last_year",
                "p_interval",
            ],
            [vec![
                args.data.response.clone(),
                num(r.statistic),
                r.lag.to_string(),
                r.n_obs.to_string(),
                r.first_year.to_string(),
                r.last_year.to_string(),
                r.p_interval.clone(),
            ]],
        )
    })?;
    finish(out)
}

pub fn run_rollsd(args: &RollsdArgs, ctx: &Ctx) -> CmdResult {
    let frame = read_frame(
        &args.data.input,
        &args.data.year_column,
        &[args.data.response.as_str()],
    )?;
    let s = frame.get(&args.data.response)?;
    let sd = rolling_sd(s, args.bandwidth)?;
    let vals: Vec<(i32, f64)> = sd.observed().collect();
    let (min, max) = vals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, v)| {
            (a.min(v), b.max(v))
        });
    let mut out = ctx.output("rollsd")?;
    out.summary(
        args,
        &json!({
            "series": sd.name,
            "min_sd": min,
            "max_sd": max,
            "year_of_min": vals.iter().find(|p| p.1 == min).map(|p| p.0),
            "year_of_max": vals.iter().find(|p| p.1 == max).map(|p| p.0),
        }),
    )?;
    let both = Frame::new(vec![s.clone(), sd])?;
    out.csv("", |w| write_csv_to(&both, w))?;
    finish(out)
}

pub fn run_tvar(args: &TvarArgs, ctx: &Ctx) -> CmdResult {
    let frame = read_frame(
        &args.data.input,
        &args.data.year_column,
        &[args.data.response.as_str()],
    )?;
    let f = fit_tvar_local(frame.get(&args.data.response)?, args.order, args.bandwidth)?;
    let sig = f.sigma_curve();
    let mut out = ctx.output("tvar")?;
    out.summary(
        args,
        &json!({
            "n_years": f.points.len(),
            "sigma_min": sig.iter().copied().fold(f64::INFINITY, f64::min),
            "sigma_max": sig.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "fit": f,
        }),
    )?;
    out.csv("", |w| f.write_csv(w))?;
    finish(out)
}
