use anyhow::Context;
use hjortic::confid::{combine, ConfidenceDistribution};
use serde_json::json;

use super::model::finish;
use super::{check_level, parse_floats, usage, CmdResult, Ctx, Failure};
use crate::args::CombineArgs;

fn load_inputs(args: &CombineArgs) -> Result<Vec<ConfidenceDistribution>, Failure> {
    let mut cds = Vec::new();
    for path in &args.cds {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let cd = ConfidenceDistribution::from_json(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        cds.push(cd);
    }
    check_level(args.interval_level)?;
    let label = match (&args.label, cds.first()) {
        (Some(l), _) => l.clone(),
        (None, Some(c)) => c.focus_label.clone(),
        (None, None) => "theta".to_string(),
    };
    for iv in &args.intervals {
        let v = parse_floats(iv, "--interval")?;
        let [lo, hi] = v[..] else {
            return Err(usage(format!("--interval {iv:?} must be LO,HI")));
        };
        cds.push(
            ConfidenceDistribution::from_interval(&label, lo, hi, args.interval_level)
                .map_err(|e| usage(e.to_string()))?,
        );
    }
    if cds.len() < 2 {
        return Err(usage(
            "combine needs at least two inputs (--cd or --interval)",
        ));
    }
    Ok(cds)
}

pub fn run_combine(args: &CombineArgs, ctx: &Ctx) -> CmdResult {
    check_level(args.level)?;
    if args.grid_points < 2 {
        return Err(usage("--grid-points must be at least 2"));
    }
    let cds = load_inputs(args)?;
    let combined = combine(&cds)?;
    let inputs = cds
        .iter()
        .map(|c| {
            let (lo, hi) = c.interval(args.level)?;
            Ok(json!({
                "focus_label": c.focus_label,
                "center": c.center,
                "spread": c.spread,
                "family": if c.is_normal() { "normal" } else { "grid" },
                "interval": [lo, hi],
            }))
        })
        .collect::<hjortic::Result<Vec<_>>>()?;
    let (lo, hi) = combined.interval(args.level)?;
    let mut out = ctx.output("combine")?;
    out.summary(
        args,
        &json!({
            "level": args.level,
            "inputs": inputs,
            "combined": {
                "center": combined.center,
                "spread": combined.spread,
                "interval": [lo, hi],
            },
        }),
    )?;
    out.json("cd", &combined)?;
    out.csv("", |w| combined.write_grid_csv(w, args.grid_points))?;
    finish(out)
}
