use hjortic::hsicopula::{fit_margins, simulate_copula, translation, CopulaModel};
use std::time::Instant;

fn paper() -> CopulaModel {
    CopulaModel::new(2.51, 6.52, 3.99, 0.63, 0.83).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn paper_parameters_are_recovered_at_n_10000() {
    let truth = paper();
    let (x, y) = truth.sample(10_000, 21).unwrap();
    let m = fit_margins(&x, &y).unwrap();
    for (est, tv) in [
        (m.a1, truth.a1),
        (m.b1, truth.b1),
        (m.a2, truth.a2),
        (m.b2, truth.b2),
        (m.rho, truth.rho),
    ] {
        assert!(rel(est, tv) < 0.05, "estimate {est} truth {tv}");
    }
}

#[test]
fn independence_gives_small_score_correlation() {
    let truth = CopulaModel::new(2.51, 6.52, 3.99, 0.63, 0.0).unwrap();
    let (x, y) = truth.sample(10_000, 22).unwrap();
    assert!(fit_margins(&x, &y).unwrap().rho.abs() < 0.03);
}

#[test]
fn exponential_margin_shape_is_recovered() {
    let truth = CopulaModel::new(1.0, 2.0, 5.0, 0.8, 0.5).unwrap();
    let (x, y) = truth.sample(10_000, 23).unwrap();
    assert!(rel(fit_margins(&x, &y).unwrap().a1, 1.0) < 0.05);
}

#[test]
fn recovery_error_shrinks_with_sample_size() {
    let truth = paper();
    let err = |n: usize| {
        let (x, y) = truth.sample(n, 24).unwrap();
        let m = fit_margins(&x, &y).unwrap();
        rel(m.a1, truth.a1)
            + rel(m.b1, truth.b1)
            + rel(m.a2, truth.a2)
            + rel(m.b2, truth.b2)
            + rel(m.rho, truth.rho)
    };
    assert!(err(100_000) < err(1_000));
}

#[test]
fn simulated_margins_match_gamma_means() {
    let m = paper();
    let n = 200_000;
    let (x, y) = m.sample(n, 25).unwrap();
    for (v, (mean, sd)) in [(x, m.liver_moments()), (y, m.fish_moments())] {
        let got = v.iter().sum::<f64>() / n as f64;
        assert!(
            (got - mean).abs() < 3.0 * sd / (n as f64).sqrt(),
            "{got} vs {mean}"
        );
    }
}

#[test]
fn paper_model_index_distribution() {
    let t = Instant::now();
    let sim = simulate_copula(&paper(), 1000, 5000, 2024).unwrap();
    let s = sim.summary().unwrap();
    eprintln!("{s:?} in {:?}", t.elapsed());
    // strong positive link between the two indices, bulk above per-fish
    assert!(s.correlation > 0.7 && s.correlation < 0.95);
    assert!(s.mean_bulk > s.mean_ind);
    assert!(s.sd_ind > 0.0 && s.sd_bulk > 0.0);
    let mut csv = Vec::new();
    sim.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 5001);
}

#[test]
fn independence_pulls_the_line_away_from_identity() {
    let dep = translation(&paper(), 1000, 400, 31).unwrap();
    let ind_model = CopulaModel {
        rho: 0.0,
        ..paper()
    };
    let ind = translation(&ind_model, 1000, 400, 31).unwrap();
    eprintln!("{dep:?} {ind:?}");
    assert!((ind.slope - 1.0).abs() > (dep.slope - 1.0).abs());
}
