use anyhow::Context;
use hjortic::dist::{gamma_pdf, gamma_quantile};
use hjortic::hsicopula::{
    fit_copula, hsi_bulk, hsi_ind, simulate_copula, translation_from, CopulaModel, FishPairs,
    MIN_TRANSLATION_REPS,
};
use serde::Deserialize;
use serde_json::json;

use super::model::finish;
use super::{parse_floats, usage, CmdResult, Ctx, Failure};
use crate::args::{CopulaCommand, CopulaFitArgs, CopulaModelArgs, CopulaSimArgs};
use crate::output::{num, write_rows};

pub fn run(cmd: &CopulaCommand, ctx: &Ctx) -> CmdResult {
    match cmd {
        CopulaCommand::Fit(a) => run_fit(a, ctx),
        CopulaCommand::Simulate(a) => run_simulate(a, ctx),
        CopulaCommand::Translate(a) => run_translate(a, ctx),
    }
}

pub fn parse_params(s: &str) -> Result<CopulaModel, Failure> {
    let v = parse_floats(s, "--params")?;
    let [a1, b1, a2, b2, rho] = v[..] else {
        return Err(usage("--params needs five values a1,b1,a2,b2,rho"));
    };
    CopulaModel::new(a1, b1, a2, b2, rho).map_err(|e| usage(e.to_string()))
}

// accepts a bare model or a `copula fit` summary holding one under "model"
#[derive(Deserialize)]
#[serde(untagged)]
enum ModelFile {
    Bare(CopulaModel),
    Wrapped { model: CopulaModel },
}

impl CopulaModelArgs {
    fn resolve(&self) -> Result<CopulaModel, Failure> {
        match (&self.params, &self.model) {
            (Some(p), _) => parse_params(p),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("cannot read {}", path.display()))?;
                let m = match serde_json::from_str::<ModelFile>(&text)
                    .with_context(|| format!("{} holds no copula model", path.display()))?
                {
                    ModelFile::Bare(m) | ModelFile::Wrapped { model: m } => m,
                };
                m.validate()?;
                Ok(m)
            }
            (None, None) => Err(usage("give --params a1,b1,a2,b2,rho or --model PATH")),
        }
    }
}

fn run_fit(args: &CopulaFitArgs, ctx: &Ctx) -> CmdResult {
    let pairs = FishPairs::load_csv(&args.pairs)?;
    let model = fit_copula(&pairs)?;
    let mut out = ctx.output("copula_fit")?;
    let (lm, ls) = model.liver_moments();
    let (fm, fs) = model.fish_moments();
    out.summary(
        args,
        &json!({
            "n_pairs": pairs.len(),
            "model": model,
            "liver_mean_sd": [lm, ls],
            "fish_mean_sd": [fm, fs],
            "hsi_bulk": hsi_bulk(&pairs)?,
            "hsi_ind": hsi_ind(&pairs)?,
        }),
    )?;
    // fitted margin densities on matching probability grids
    out.csv("", |w| {
        write_rows(
            w,
            &["p", "liver_kg", "liver_density", "fish_kg", "fish_density"],
            (1..200).map(|i| {
                let p = i as f64 / 200.0;
                let x = gamma_quantile(p, model.a1, model.b1);
                let y = gamma_quantile(p, model.a2, model.b2);
                vec![
                    num(p),
                    num(x),
                    num(gamma_pdf(x, model.a1, model.b1)),
                    num(y),
                    num(gamma_pdf(y, model.a2, model.b2)),
                ]
            }),
        )
    })?;
    finish(out)
}

fn check_sim(args: &CopulaSimArgs) -> Result<CopulaModel, Failure> {
    if args.n_fish == 0 || args.n_reps < 2 {
        return Err(usage("--n-fish must be at least 1 and --n-reps at least 2"));
    }
    args.model.resolve()
}

fn run_simulate(args: &CopulaSimArgs, ctx: &Ctx) -> CmdResult {
    let model = check_sim(args)?;
    let sim = simulate_copula(&model, args.n_fish, args.n_reps, ctx.seed)?;
    let mut out = ctx.output("copula_simulate")?;
    out.summary(
        &json!({ "args": args, "seed": ctx.seed }),
        &json!({ "model": model, "summary": sim.summary()? }),
    )?;
    out.csv("", |w| sim.write_csv(w))?;
    finish(out)
}

fn run_translate(args: &CopulaSimArgs, ctx: &Ctx) -> CmdResult {
    let model = check_sim(args)?;
    if args.n_reps < MIN_TRANSLATION_REPS {
        return Err(usage(format!(
            "translation needs --n-reps >= {MIN_TRANSLATION_REPS}"
        )));
    }
    let sim = simulate_copula(&model, args.n_fish, args.n_reps, ctx.seed)?;
    let line = translation_from(&sim)?;
    let mut out = ctx.output("copula_translate")?;
    out.summary(
        &json!({ "args": args, "seed": ctx.seed }),
        &json!({ "model": model, "line": line, "summary": sim.summary()? }),
    )?;
    out.csv("", |w| {
        write_rows(
            w,
            &["rep", "hsi_ind", "hsi_bulk", "fitted_bulk"],
            sim.reps.iter().map(|r| {
                vec![
                    r.rep.to_string(),
                    num(r.hsi_ind),
                    num(r.hsi_bulk),
                    num(line.predict(r.hsi_ind)),
                ]
            }),
        )
    })?;
    finish(out)
}
