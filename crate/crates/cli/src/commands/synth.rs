use anyhow::Context;
use hjortic::argauss::simulate_with;
use hjortic::frame::write_csv_to;
use hjortic::hsicopula::FishPairs;
use hjortic::{ArxParams, ArxSpec, Frame, Series};
use serde_json::json;

use super::copula::parse_params;
use super::model::finish;
use super::{parse_floats, usage, CmdResult, Ctx};
use crate::args::{KolaArgs, SynthArgs};
use crate::kola::{read_monthly, winter_means};

pub fn run_synth(args: &SynthArgs, ctx: &Ctx) -> CmdResult {
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let echo = json!({ "args": args, "seed": ctx.seed });
    let mut out = ctx.output("synth")?;
    if args.model == "copula" {
        let params = args
            .params
            .as_deref()
            .ok_or_else(|| usage("copula synth needs --params"))?;
        let model = parse_params(params)?;
        let (x, y) = model.sample(args.n, ctx.seed)?;
        let (keep_x, keep_y): (Vec<f64>, Vec<f64>) =
            x.into_iter().zip(y).filter(|(a, b)| a < b).unzip();
        let dropped = args.n - keep_x.len();
        let pairs = FishPairs::new(keep_x, keep_y)?;
        out.summary(&echo, &json!({ "model": model, "n_pairs": pairs.len(), "dropped_liver_not_below_fish": dropped }))?;
        out.csv("", |w| pairs.write_csv(w))?;
        return finish(out);
    }

    let spec = ArxSpec::parse(&args.name, &args.model).map_err(|e| usage(e.to_string()))?;
    if !spec.regressors.is_empty() || !spec.include_intercept {
        return Err(usage("synth supports arK[+trend] models only"));
    }
    let rho = match (&args.rho, spec.ar_order) {
        (Some(r), k) => {
            let v = parse_floats(r, "--rho")?;
            if v.len() != k {
                return Err(usage(format!("--rho needs {k} values for {}", args.model)));
            }
            v
        }
        (None, 0) => vec![],
        (None, 1) => vec![0.6],
        (None, 2) => vec![0.77, -0.28],
        (None, k) => return Err(usage(format!("give --rho for order {k}"))),
    };
    let mut beta = vec![args.intercept];
    if spec.include_linear_trend {
        beta.push(args.slope);
    }
    let params = ArxParams::new(beta, rho, args.sigma);
    let blank = Frame::new(vec![Series::new(
        &args.name,
        args.start_year,
        vec![0.0; args.n],
    )?])?;
    let s = simulate_with(&spec, &params, &blank, args.n, ctx.seed)?;
    out.summary(
        &echo,
        &json!({ "model": spec.to_string(), "params": params }),
    )?;
    out.csv("", |w| write_csv_to(&Frame::new(vec![s])?, w))?;
    finish(out)
}

pub fn run_kola(args: &KolaArgs, ctx: &Ctx) -> CmdResult {
    let file = std::fs::File::open(&args.input)
        .with_context(|| format!("cannot read {}", args.input.display()))?;
    let monthly = read_monthly(file, args.value_column.as_deref())?;
    let s = winter_means(&monthly, &args.name)?;
    let missing: Vec<i32> = s
        .years()
        .enumerate()
        .filter(|&(i, _)| s.is_masked(i))
        .map(|(_, y)| y)
        .collect();
    let mut out = ctx.output("kola_winter")?;
    out.summary(
        args,
        &json!({
            "series": s.name,
            "first_year": s.start_year,
            "last_year": s.end_year(),
            "n_winters": s.n_observed(),
            "incomplete_winters": missing,
        }),
    )?;
    out.csv("", |w| write_csv_to(&Frame::new(vec![s])?, w))?;
    finish(out)
}
