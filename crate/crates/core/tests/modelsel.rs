use hjortic::argauss::{fit, simulate_with};
use hjortic::modelsel::{fic, focus_estimate, sequential_scores, FocusSpec, Threshold};
use hjortic::{ArxParams, ArxSpec, Frame, Series};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn sim_frame(spec: &ArxSpec, p: &ArxParams, base: &Frame, n: usize, seed: u64) -> Frame {
    base.with_series(simulate_with(spec, p, base, n, seed).unwrap())
        .unwrap()
}

fn blank(n: usize) -> Frame {
    Frame::new(vec![Series::new("z", 1900, vec![0.0; n]).unwrap()]).unwrap()
}

/// Simulation oracle: 10^6 futures of the fitted AR(1) from the last value.
#[test]
fn threshold_probability_matches_simulated_futures() {
    let spec = ArxSpec::ar("z", 1);
    let fr = sim_frame(
        &spec,
        &ArxParams::new(vec![2.0], vec![0.7], 1.0),
        &blank(120),
        120,
        8,
    );
    let f = fit(&spec, &fr).unwrap();
    let last = fr.get("z").unwrap().at(119).unwrap();
    let level = f.beta[0] + 0.3;
    let focus = FocusSpec::ThresholdProbability {
        threshold: Threshold::Level(level),
        years: vec![2020, 2021],
    };
    let p = focus_estimate(&f, &fr, &focus).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = 1_000_000;
    let mut hits = 0usize;
    for _ in 0..draws {
        let d1: f64 = rng.sample(StandardNormal);
        let d2: f64 = rng.sample(StandardNormal);
        let e1 = f.rho[0] * (last - f.beta[0]) + f.sigma * d1;
        let e2 = f.rho[0] * e1 + f.sigma * d2;
        if f.beta[0] + e1 < level && f.beta[0] + e2 < level {
            hits += 1;
        }
    }
    let freq = hits as f64 / draws as f64;
    assert!((p - freq).abs() < 0.002, "model {p} simulated {freq}");
}

#[test]
fn threshold_mean_resolves_to_observed_mean() {
    let spec = ArxSpec::ar("z", 1);
    let fr = sim_frame(
        &spec,
        &ArxParams::new(vec![5.0], vec![0.5], 1.0),
        &blank(60),
        60,
        3,
    );
    let f = fit(&spec, &fr).unwrap();
    let mean = fr.get("z").unwrap().values().iter().sum::<f64>() / 60.0;
    let by_mean = FocusSpec::ThresholdProbability {
        threshold: Threshold::ResponseMean,
        years: vec![1960, 1961, 1962, 1963],
    };
    let by_level = FocusSpec::ThresholdProbability {
        threshold: Threshold::Level(mean),
        years: vec![1960, 1961, 1962, 1963],
    };
    let a = focus_estimate(&f, &fr, &by_mean).unwrap();
    assert_eq!(a, focus_estimate(&f, &fr, &by_level).unwrap());
    assert!(a > 0.0 && a < 1.0);
}

#[test]
fn race_penalizes_superfluous_order() {
    let base = ArxSpec::ar("z", 1);
    let big = ArxSpec::ar("z", 2);
    let truth = ArxParams::new(vec![0.0], vec![0.5], 1.0);
    let mut total = 0.0;
    let mut count = 0usize;
    for rep in 0..50 {
        let fr = sim_frame(&base, &truth, &blank(80), 80, 500 + rep);
        let race = sequential_scores(&[base.clone(), big.clone()], &fr, &base, 1930).unwrap();
        for row in &race.diffs {
            assert_eq!(row[0], Some(0.0));
            if let Some(d) = row[1] {
                total += d;
                count += 1;
            }
        }
    }
    assert!(total / (count as f64) <= 0.0);
}

#[test]
fn race_detects_planted_covariate() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 80;
    let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let base_frame = Frame::new(vec![
        Series::new("z", 1900, vec![0.0; n]).unwrap(),
        Series::new("x", 1900, x).unwrap(),
    ])
    .unwrap();
    let truth_spec = ArxSpec::ar("z", 1).with_regressor("x", 0);
    let truth = ArxParams::new(vec![0.0, 5.0], vec![0.4], 1.0);
    let fr = sim_frame(&truth_spec, &truth, &base_frame, n, 12);
    let base = ArxSpec::ar("z", 1);
    let race = sequential_scores(std::slice::from_ref(&truth_spec), &fr, &base, 1910).unwrap();
    let col = race.column(&truth_spec.label()).unwrap();
    let tail = &col[col.len() / 4..];
    assert!(tail.iter().all(|d| d.unwrap() > 0.0));
}

#[test]
fn wide_variance_dominates_on_average() {
    let narrow = ArxSpec::ar("z", 1);
    let wide = ArxSpec::ar("z", 3).with_trend();
    let truth = ArxParams::new(vec![1.0], vec![0.5], 1.0);
    let focus = FocusSpec::Prediction { horizon: 1 };
    let (mut vw, mut vn) = (0.0, 0.0);
    for rep in 0..100 {
        let fr = sim_frame(&narrow, &truth, &blank(100), 100, 900 + rep);
        let r = fic(&[narrow.clone(), wide.clone()], &wide, &fr, &focus).unwrap();
        vw += r.entry(&wide.label()).unwrap().variance;
        vn += r.entry(&narrow.label()).unwrap().variance;
    }
    assert!(vw >= vn, "wide {vw} narrow {vn}");
}

fn ladder() -> Vec<ArxSpec> {
    (1..=3)
        .flat_map(|k| [ArxSpec::ar("z", k), ArxSpec::ar("z", k).with_trend()])
        .collect()
}

#[test]
fn trend_models_win_long_horizon_under_planted_trend() {
    let cands = ladder();
    let wide = ArxSpec::ar("z", 3).with_trend();
    let truth = ArxParams::new(vec![0.0, 0.08], vec![0.4], 1.0);
    let fr = sim_frame(
        &ArxSpec::ar("z", 1).with_trend(),
        &truth,
        &blank(120),
        120,
        5,
    );
    let r = fic(&cands, &wide, &fr, &FocusSpec::Prediction { horizon: 10 }).unwrap();
    let top: Vec<bool> = r
        .entries
        .iter()
        .take(3)
        .map(|e| e.spec.include_linear_trend)
        .collect();
    assert!(
        top.iter().all(|&t| t),
        "{:?}",
        r.entries.iter().map(|e| &e.label).collect::<Vec<_>>()
    );
}

#[test]
fn fic_scores_ignore_candidate_order() {
    let cands = ladder();
    let wide = ArxSpec::ar("z", 3).with_trend();
    let fr = sim_frame(
        &ArxSpec::ar("z", 2),
        &ArxParams::new(vec![3.0], vec![0.5, -0.2], 1.0),
        &blank(90),
        90,
        6,
    );
    let focus = FocusSpec::Prediction { horizon: 3 };
    let a = fic(&cands, &wide, &fr, &focus).unwrap();
    let rev: Vec<ArxSpec> = cands.iter().rev().cloned().collect();
    let b = fic(&rev, &wide, &fr, &focus).unwrap();
    assert_eq!(a, b);
    for e in &a.entries {
        assert!(e.fic_score >= e.variance.sqrt());
        assert!(e.sq_bias >= 0.0);
    }
    let mut csv = Vec::new();
    a.write_plot_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "fic_score,focus_estimate");
    assert_eq!(text.lines().count(), cands.len() + 1);
}
