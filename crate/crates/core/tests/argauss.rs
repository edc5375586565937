use approx::assert_abs_diff_eq;
use hjortic::argauss::{
    fit, fit_with, forecast, is_stationary, loglik, residuals, simulate, simulate_with, ArxFit,
    ArxParams, ArxSpec, FitOptions,
};
use hjortic::{Frame, Series};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn frame_of(name: &str, start: i32, v: Vec<f64>) -> Frame {
    Frame::new(vec![Series::new(name, start, v).unwrap()]).unwrap()
}

fn blank(n: usize) -> Frame {
    frame_of("z", 1900, vec![0.0; n])
}

fn sim(spec: &ArxSpec, p: &ArxParams, n: usize, seed: u64) -> Frame {
    let s = simulate_with(spec, p, &blank(n), n, seed).unwrap();
    Frame::new(vec![s]).unwrap()
}

fn acf(x: &[f64], lag: usize) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    let c: f64 = x.windows(lag + 1).map(|w| (w[0] - m) * (w[lag] - m)).sum();
    c / c0
}

#[test]
fn ar1_parameters_are_recovered() {
    let spec = ArxSpec::ar("z", 1);
    let truth = ArxParams::new(vec![0.0], vec![0.5], 1.0);
    let f = fit(&spec, &sim(&spec, &truth, 2000, 11)).unwrap();
    assert!((f.rho[0] - 0.5).abs() < 0.05, "rho {}", f.rho[0]);
    assert!((f.sigma - 1.0).abs() < 0.05, "sigma {}", f.sigma);
    assert_eq!(f.n_effective, 1999);
}

/// Brute-force grid oracle: the defining conditional log-likelihood of an
/// AR(1) with intercept, maximized over a coarse then a fine grid.
#[test]
fn conditional_mle_matches_grid_search() {
    let z = [0.3, 1.2, 0.8, -0.4, 0.1, 0.9, 1.5, 0.7];
    let ll = |b0: f64, r: f64, s: f64| -> f64 {
        (1..z.len())
            .map(|t| {
                let u = (z[t] - b0) - r * (z[t - 1] - b0);
                -0.5 * (2.0 * std::f64::consts::PI).ln() - s.ln() - u * u / (2.0 * s * s)
            })
            .sum()
    };
    let grid = |lo: f64, hi: f64, step: f64| {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n).map(move |i| lo + i as f64 * step)
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    for b0 in grid(-2.0, 3.0, 0.01) {
        for r in grid(-0.99, 0.99, 0.01) {
            for s in grid(0.05, 2.0, 0.01) {
                let v = ll(b0, r, s);
                if v > best.0 {
                    best = (v, b0, r, s);
                }
            }
        }
    }
    let (_, cb, cr, cs) = best;
    for b0 in grid(cb - 0.02, cb + 0.02, 1e-3) {
        for r in grid(cr - 0.02, cr + 0.02, 1e-3) {
            for s in grid(cs - 0.02, cs + 0.02, 1e-3) {
                let v = ll(b0, r, s);
                if v > best.0 {
                    best = (v, b0, r, s);
                }
            }
        }
    }
    let f = fit(&ArxSpec::ar("z", 1), &frame_of("z", 2000, z.to_vec())).unwrap();
    assert!(f.loglik_max >= best.0 - 1e-12);
    assert!(
        (f.loglik_max - best.0).abs() < 1e-3,
        "fit {} grid {}",
        f.loglik_max,
        best.0
    );
    assert_abs_diff_eq!(f.beta[0], best.1, epsilon = 2e-3);
    assert_abs_diff_eq!(f.rho[0], best.2, epsilon = 2e-3);
    assert_abs_diff_eq!(f.sigma, best.3, epsilon = 2e-3);
}

#[test]
fn loglik_at_fit_is_loglik_max_and_is_optimal() {
    let spec = ArxSpec::ar("z", 2).with_trend();
    let truth = ArxParams::new(vec![5.0, -0.01], vec![0.6, -0.3], 0.8);
    let fr = sim(&spec, &truth, 150, 3);
    let f = fit(&spec, &fr).unwrap();
    let p = f.params();
    assert_eq!(loglik(&p, &spec, &fr).unwrap(), f.loglik_max);

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let theta = p.to_vec();
    for _ in 0..100 {
        let pert: Vec<f64> = theta
            .iter()
            .map(|t| t + rng.random_range(-1.0..1.0) * 1e-3 * t.abs().max(0.1))
            .collect();
        let q = ArxParams::from_slice(&spec, &pert).unwrap();
        assert!(loglik(&q, &spec, &fr).unwrap() < f.loglik_max);
    }
    // one coordinate at a time
    for i in 0..theta.len() {
        for d in [-1e-4, 1e-4] {
            let mut th = theta.clone();
            th[i] += d;
            let q = ArxParams::from_slice(&spec, &th).unwrap();
            assert!(loglik(&q, &spec, &fr).unwrap() < f.loglik_max, "param {i}");
        }
    }
}

#[test]
fn vcov_is_symmetric_positive_definite() {
    let spec = ArxSpec::ar("z", 2).with_trend();
    let truth = ArxParams::new(vec![5.0, 0.02], vec![0.5, -0.2], 1.0);
    let f = fit(&spec, &sim(&spec, &truth, 300, 5)).unwrap();
    let v = f.vcov_matrix().unwrap();
    assert_eq!(v.nrows(), spec.n_params());
    for i in 0..v.nrows() {
        for j in 0..v.ncols() {
            assert_eq!(v[(i, j)], v[(j, i)]);
        }
    }
    assert!(v.clone().cholesky().is_some());
    // sigma's standard error is close to sigma / sqrt(2 n)
    let se = f.std_errors().unwrap();
    let want = f.sigma / (2.0 * f.n_effective as f64).sqrt();
    assert!((se[spec.n_params() - 1] / want - 1.0).abs() < 0.05);
}

#[test]
fn estimation_error_shrinks_with_n() {
    let spec = ArxSpec::ar("z", 2);
    let truth = ArxParams::new(vec![1.0], vec![0.5, -0.3], 1.0);
    let err = |n: usize| -> f64 {
        (0..20)
            .map(|seed| {
                let f = fit(&spec, &sim(&spec, &truth, n, 1000 + seed)).unwrap();
                (f.rho[0] - 0.5).powi(2)
                    + (f.rho[1] + 0.3).powi(2)
                    + (f.beta[0] - 1.0).powi(2)
                    + (f.sigma - 1.0).powi(2)
            })
            .sum::<f64>()
    };
    assert!(err(5000) < err(500));
}

#[test]
fn simulate_degenerate_noise_and_determinism() {
    let spec = ArxSpec::ar("z", 0);
    let p = ArxParams::new(vec![3.0], vec![], 1e-12);
    let s = simulate_with(&spec, &p, &blank(10), 10, 1).unwrap();
    assert!(s.values().iter().all(|v| (v - 3.0).abs() < 1e-9));

    let spec = ArxSpec::ar("z", 2);
    let p = ArxParams::new(vec![0.0], vec![0.4, 0.2], 1.0);
    let a = simulate_with(&spec, &p, &blank(50), 50, 7).unwrap();
    let b = simulate_with(&spec, &p, &blank(50), 50, 7).unwrap();
    assert_eq!(a, b);
    let c = simulate_with(&spec, &p, &blank(50), 50, 8).unwrap();
    assert_ne!(a, c);
    assert!(simulate_with(
        &ArxSpec::ar("z", 1),
        &ArxParams::new(vec![0.0], vec![1.0], 1.0),
        &blank(5),
        5,
        1
    )
    .is_err());
}

#[test]
fn simulated_ar1_has_theoretical_acf() {
    let spec = ArxSpec::ar("z", 1);
    let p = ArxParams::new(vec![0.0], vec![0.8], 1.0);
    let s = simulate_with(&spec, &p, &blank(1), 100_000, 21).unwrap();
    assert!((acf(s.values(), 1) - 0.8).abs() < 0.02);
}

#[test]
fn simulate_fit_simulate_preserves_acf() {
    let spec = ArxSpec::ar("z", 2);
    let p = ArxParams::new(vec![2.0], vec![0.6, -0.25], 1.5);
    let fr = sim(&spec, &p, 50_000, 4);
    let f = fit(&spec, &fr).unwrap();
    let again = simulate(&f, &fr, 50_000, 5).unwrap();
    let orig = fr.get("z").unwrap();
    for lag in 1..=2 {
        assert!((acf(orig.values(), lag) - acf(again.values(), lag)).abs() < 0.05);
    }
}

#[test]
fn simulate_needs_covariates() {
    let fr = Frame::new(vec![
        Series::new("z", 2000, vec![0.0; 5]).unwrap(),
        Series::new("x", 2000, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(),
    ])
    .unwrap();
    let spec = ArxSpec::ar("z", 0).with_regressor("x", 0);
    let p = ArxParams::new(vec![1.0, 2.0], vec![], 1e-12);
    let s = simulate_with(&spec, &p, &fr, 5, 0).unwrap();
    assert_abs_diff_eq!(s.values()[4], 11.0, epsilon = 1e-9);
    assert!(simulate_with(&spec, &p, &fr, 6, 0).is_err());
}

fn manual_fit(spec: ArxSpec, beta: Vec<f64>, rho: Vec<f64>, sigma: f64) -> ArxFit {
    ArxFit {
        spec,
        beta,
        rho,
        sigma,
        loglik_max: 0.0,
        vcov: vec![],
        n_effective: 0,
        first_year: 0,
        last_year: 0,
        stationary: true,
        alignment: None,
    }
}

#[test]
fn forecast_closed_forms() {
    let fr = frame_of("z", 1990, vec![1.0, 2.0, 0.5, 1.5]);
    let f = manual_fit(
        ArxSpec::ar("z", 0).with_trend(),
        vec![2.0, 0.1],
        vec![],
        0.7,
    );
    for step in forecast(&f, &fr, 4).unwrap() {
        assert_abs_diff_eq!(
            step.mean,
            2.0 + 0.1 * (step.year - 1980) as f64,
            epsilon = 1e-12
        );
        assert_eq!(step.sd, 0.7);
    }
    let f = manual_fit(ArxSpec::ar("z", 1), vec![1.0], vec![0.6], 2.0);
    let steps = forecast(&f, &fr, 2).unwrap();
    assert_eq!(steps[0].year, 1994);
    assert_abs_diff_eq!(steps[0].mean, 1.0 + 0.6 * 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(steps[1].mean, 1.0 + 0.36 * 0.5, epsilon = 1e-12);
    assert_abs_diff_eq!(steps[1].sd, 2.0 * (1.0f64 + 0.36).sqrt(), epsilon = 1e-10);
}

/// Simulation oracle: propagate 10^6 paths of the AR(2) recursion from the
/// observed tail and compare the empirical moments at horizon 3.
#[test]
fn ar2_forecast_matches_path_simulation() {
    let spec = ArxSpec::ar("z", 2);
    let truth = ArxParams::new(vec![4.0], vec![0.7, -0.3], 1.0);
    let fr = sim(&spec, &truth, 200, 17);
    let f = fit(&spec, &fr).unwrap();
    let steps = forecast(&f, &fr, 3).unwrap();

    let z = fr.get("z").unwrap().values();
    let n = z.len();
    let (b0, r1, r2, s) = (f.beta[0], f.rho[0], f.rho[1], f.sigma);
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let paths = 1_000_000;
    let (mut sum, mut sum2) = ([0.0; 3], [0.0; 3]);
    for _ in 0..paths {
        let (mut e2, mut e1) = (z[n - 2] - b0, z[n - 1] - b0);
        for j in 0..3 {
            let d: f64 = rng.sample(rand_distr::StandardNormal);
            let e = r1 * e1 + r2 * e2 + s * d;
            e2 = e1;
            e1 = e;
            sum[j] += b0 + e;
            sum2[j] += (b0 + e).powi(2);
        }
    }
    for j in 0..3 {
        let m = sum[j] / paths as f64;
        let sd = (sum2[j] / paths as f64 - m * m).sqrt();
        assert!((m - steps[j].mean).abs() < 0.01, "mean step {j}");
        assert!((sd - steps[j].sd).abs() < 0.01, "sd step {j}");
    }
}

#[test]
fn residual_properties() {
    let spec = ArxSpec::ar("z", 2);
    let truth = ArxParams::new(vec![1.0], vec![0.5, -0.4], 1.0);
    let n = 5000;
    let fr = sim(&spec, &truth, n, 31);
    let f = fit(&spec, &fr).unwrap();
    let r = residuals(&f, &fr).unwrap();
    assert!(r.is_masked(0) && r.is_masked(1) && !r.is_masked(2));
    let obs: Vec<f64> = r.observed().map(|(_, v)| v).collect();
    let mean = obs.iter().sum::<f64>() / obs.len() as f64;
    assert!(mean.abs() < 3.0 / (n as f64).sqrt());
    assert!(acf(&obs, 1).abs() < 0.05);

    // k = 0: (z - fitted mean) / sigma
    let fr0 = frame_of("z", 2000, vec![1.0, 3.0, 2.0, 6.0, 3.0]);
    let f0 = fit(&ArxSpec::ar("z", 0), &fr0).unwrap();
    let r0 = residuals(&f0, &fr0).unwrap();
    for (v, z) in r0.values().iter().zip(fr0.get("z").unwrap().values()) {
        assert_abs_diff_eq!(*v, (z - 3.0) / f0.sigma, epsilon = 1e-12);
    }
}

#[test]
fn nonstationary_fits_are_rejected_unless_allowed() {
    // explosive series
    let v: Vec<f64> = (0..40)
        .map(|i| 1.08f64.powi(i) + ((i * 7 % 5) as f64) * 0.01)
        .collect();
    let fr = frame_of("z", 1900, v);
    let spec = ArxSpec::ar("z", 1).without_intercept();
    assert!(matches!(
        fit(&spec, &fr),
        Err(hjortic::Error::NonStationary(_))
    ));
    let opts = FitOptions {
        require_stationary: false,
        ..FitOptions::default()
    };
    let f = fit_with(&spec, &fr, &opts).unwrap();
    assert!(!f.stationary);
    assert!(!is_stationary(&f.rho));
}

#[test]
fn gaps_drop_rows_listwise() {
    let mut v: Vec<Option<f64>> = (0..60).map(|i| Some(((i * 13 % 7) as f64).sin())).collect();
    v[20] = None;
    let fr = Frame::new(vec![Series::from_options("z", 1900, &v).unwrap()]).unwrap();
    let f = fit(&ArxSpec::ar("z", 2), &fr).unwrap();
    // rows 0,1 condition; row 20 missing removes rows 20, 21, 22
    assert_eq!(f.n_effective, 60 - 2 - 3);
}

#[test]
fn fit_json_round_trip() {
    let spec = ArxSpec::ar("z", 1).with_trend();
    let truth = ArxParams::new(vec![1.0, 0.05], vec![0.3], 1.0);
    let f = fit(&spec, &sim(&spec, &truth, 80, 2)).unwrap();
    let back = ArxFit::from_json(&f.to_json().unwrap()).unwrap();
    assert_eq!(back, f);
    let v: serde_json::Value = serde_json::from_str(&f.to_json().unwrap()).unwrap();
    assert_eq!(v["vcov"].as_array().unwrap().len(), 16);
}
