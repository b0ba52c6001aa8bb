//! Cross-checks between the three routes to every quantity: closed forms,
//! Gaussian conditional algebra on implied covariance matrices, and the
//! Monte Carlo engine.

mod util;

use biaslab::analytic;
use biaslab::catalog;
use biaslab::mc::{
    bias_experiment, binned_mean, ols, sample_linear, sample_nonlinear, sample_unit_square,
    select_band, BandRequest, BinFilter, SimConfig,
};
use biaslab::scm::LinearSCM;

fn corpus() -> Vec<(&'static str, LinearSCM)> {
    vec![
        ("fig1", util::load_fixture("fig1.scm")),
        ("fig2", util::load_fixture("fig2.scm")),
        ("fig3", util::load_fixture("fig3.scm")),
        ("fig4", util::load_fixture("fig4.scm")),
    ]
}

#[test]
fn fixtures_match_the_catalog_builders() {
    let fig1 = util::load_fixture("fig1.scm");
    let built = catalog::iv_model(0.3, 0.5, 0.4, 0.6).unwrap();
    assert_eq!(fig1.graph().names(), built.graph().names());
    assert_eq!(fig1.coefficients(), built.coefficients());

    let fig2 = util::load_fixture("fig2.scm");
    let built = catalog::imperfect_iv_model(0.3, 0.5, 0.4, 0.6, 0.3).unwrap();
    assert_eq!(fig2.coefficients(), built.coefficients());

    let fig4 = util::load_fixture("fig4.scm");
    let built = catalog::mixed_bias_model().unwrap();
    assert_eq!(fig4.graph().names(), built.graph().names());
    assert_eq!(fig4.coefficients(), built.coefficients());
}

#[test]
fn implied_covariance_agrees_with_path_enumeration() {
    for (name, model) in corpus() {
        let implied = model.implied_covariance();
        let wright = util::wright_covariance(&model);
        let diff = (implied - &wright).abs().max();
        assert!(diff < 1e-12, "{name}: max deviation {diff}");
    }
}

#[test]
fn implied_covariance_is_psd_and_matches_sampling() {
    let cfg = SimConfig::new(1_000_000, 2024);
    for (name, model) in corpus() {
        let sigma = model.implied_covariance();
        let eigen = sigma.clone().symmetric_eigen();
        assert!(
            eigen.eigenvalues.iter().all(|&l| l > -1e-9),
            "{name}: covariance not PSD"
        );

        let data = sample_linear(&model, &cfg, 0).unwrap();
        let n = data.n_rows() as f64;
        let names = model.graph().names();
        for i in 0..names.len() {
            for j in i..names.len() {
                let a = data.column(&names[i]).unwrap();
                let b = data.column(&names[j]).unwrap();
                let ma = util::mean(a);
                let mb = util::mean(b);
                let emp: f64 = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - ma) * (y - mb))
                    .sum::<f64>()
                    / (n - 1.0);
                let expect = sigma[(i, j)];
                // Var of a sample covariance of joint Gaussians.
                let se = ((sigma[(i, i)] * sigma[(j, j)] + expect * expect) / n).sqrt();
                assert!(
                    (emp - expect).abs() < 4.0 * se,
                    "{name}: Cov({},{}) = {emp}, expected {expect} +- {se}",
                    names[i],
                    names[j]
                );
            }
        }
    }
}

#[test]
fn instrument_is_empirically_uncorrelated_with_the_confounder() {
    let model = util::load_fixture("fig1.scm");
    let cfg = SimConfig::new(1_000_000, 5);
    let d = sample_linear(&model, &cfg, 0).unwrap();
    let corr = util::correlation(d.column("Z").unwrap(), d.column("U").unwrap());
    assert!(corr.abs() < 4.0 / (d.n_rows() as f64).sqrt());
}

/// Twenty seeds per closed-form family; at least 19 of 20 empirical
/// estimates must land within four standard errors of the closed form.
#[test]
fn oracle_agreement_over_twenty_seeds() {
    let n = 100_000;
    let mut failures: Vec<String> = vec![];

    // Linear bias pair: crude and conditioned slopes.
    {
        let (c0, c1, c2, c3) = (0.3, 0.5, 0.4, 0.6);
        let model = catalog::iv_model(c0, c1, c2, c3).unwrap();
        let report = analytic::linear_bias_pair(c0, c1, c2, c3).unwrap();
        let mut hits = 0;
        for seed in 0..20 {
            let d = sample_linear(&model, &SimConfig::new(n, seed), 0).unwrap();
            let crude = ols(&d, "Y", &["X"]).unwrap();
            let cond = ols(&d, "Y", &["X", "Z"]).unwrap();
            let ok_a2 = (crude.coefficient("X").unwrap() - report.a2).abs()
                <= 4.0 * crude.standard_error("X").unwrap();
            let ok_a3 = (cond.coefficient("X").unwrap() - report.a3).abs()
                <= 4.0 * cond.standard_error("X").unwrap();
            if ok_a2 && ok_a3 {
                hits += 1;
            }
        }
        if hits < 19 {
            failures.push(format!("linear_bias_pair: {hits}/20"));
        }
    }

    // U-projection.
    {
        let proj = analytic::u_projection(0.5, 0.6).unwrap();
        let model = catalog::iv_model(0.3, 0.5, 0.4, 0.6).unwrap();
        let mut hits = 0;
        for seed in 0..20 {
            let d = sample_linear(&model, &SimConfig::new(n, 100 + seed), 0).unwrap();
            let fit = ols(&d, "U", &["X", "Z"]).unwrap();
            let ok = (fit.coefficient("X").unwrap() - proj.beta).abs()
                <= 4.0 * fit.standard_error("X").unwrap()
                && (fit.coefficient("Z").unwrap() - proj.alpha).abs()
                    <= 4.0 * fit.standard_error("Z").unwrap();
            if ok {
                hits += 1;
            }
        }
        if hits < 19 {
            failures.push(format!("u_projection: {hits}/20"));
        }
    }

    // Imperfect instrument: the crude slope picks up the direct channel.
    {
        let (c0, c1, c2, c3, c4) = (0.3, 0.5, 0.4, 0.6, 0.3);
        let report = analytic::imperfect_instrument_report(c0, c1, c2, c3, c4).unwrap();
        let model = catalog::imperfect_iv_model(c0, c1, c2, c3, c4).unwrap();
        let mut hits = 0;
        for seed in 0..20 {
            let d = sample_linear(&model, &SimConfig::new(n, 200 + seed), 0).unwrap();
            let crude = ols(&d, "Y", &["X"]).unwrap();
            if (crude.coefficient("X").unwrap() - report.a2).abs()
                <= 4.0 * crude.standard_error("X").unwrap()
            {
                hits += 1;
            }
        }
        if hits < 19 {
            failures.push(format!("imperfect_instrument: {hits}/20"));
        }
    }

    // Selection bias via band conditioning, against the exact banded slope.
    {
        let (c0, b1, b2) = (0.5, 0.3, 0.4);
        let model = catalog::selection_model(c0, b1, b2).unwrap();
        let h = 0.1;
        let target = util::band_conditioned_slope(&model, "Y", "X", "S", h, &[]);
        let mut hits = 0;
        for seed in 0..20 {
            let d = sample_linear(&model, &SimConfig::new(n, 300 + seed), 0).unwrap();
            let sel = select_band(&d, "S", 0.0, h).unwrap();
            let fit = ols(&sel, "Y", &["X"]).unwrap();
            if (fit.coefficient("X").unwrap() - target).abs()
                <= 4.0 * fit.standard_error("X").unwrap()
            {
                hits += 1;
            }
        }
        if hits < 19 {
            failures.push(format!("selection band: {hits}/20"));
        }
    }

    // Attenuation factor from the unit-square model.
    {
        let mut hits = 0;
        for seed in 0..20 {
            let d = sample_unit_square(1.0, &SimConfig::new(n, 400 + seed), 0).unwrap();
            let fit = ols(&d, "U", &["X"]).unwrap();
            if (fit.coefficient("X").unwrap() - 0.5).abs() <= 4.0 * fit.standard_error("X").unwrap()
            {
                hits += 1;
            }
        }
        if hits < 19 {
            failures.push(format!("attenuation: {hits}/20"));
        }
    }

    // Nonlinear conditional mean at a point, via local bins.
    {
        let model = analytic::NonlinearOutcomeModel::new(
            0.6,
            0.5,
            analytic::FunctionSpec::identity(),
            analytic::FunctionSpec::Reciprocal(1.0),
            0.25,
        )
        .unwrap();
        let expected = model.conditional_mean(1.0, 1.0).unwrap();
        let filter = BinFilter {
            z_band: Some(("Z", 1.0, 0.1)),
            min_abs_x: 0.5,
        };
        let mut hits = 0;
        for seed in 0..20 {
            let d = sample_nonlinear(&model, &SimConfig::new(400_000, 500 + seed), 0).unwrap();
            let est = binned_mean(&d, "X", "Y", 1.0, 0.1, filter).unwrap();
            // Bin smoothing adds a small systematic term on top of the
            // Monte Carlo error.
            if (est.mean - expected).abs() <= 4.0 * est.std_error + 0.005 {
                hits += 1;
            }
        }
        if hits < 19 {
            failures.push(format!("nonlinear binned mean: {hits}/20"));
        }
    }

    assert!(
        failures.is_empty(),
        "oracle agreement failures: {failures:?}"
    );
}

#[test]
fn bias_experiment_amplification_ladder() {
    // Empirical bz/b0 over c3 in {0, 0.3, 0.6} tracks {1, 1.0989, 1.5625}.
    let cfg = SimConfig::new(400_000, 77).with_replications(3);
    let expected = [1.0, 1.0 / (1.0 - 0.09), 1.5625];
    for (&c3, &ratio) in [0.0, 0.3, 0.6].iter().zip(&expected) {
        let model = catalog::iv_model(0.3, 0.5, 0.4, c3).unwrap();
        let report =
            bias_experiment(&model, "X", "Y", &[vec![], vec!["Z".into()]], None, &cfg).unwrap();
        assert!(report.arms.iter().all(|a| a.pass));
        let b0 = report.arms[0].empirical - 0.3;
        let bz = report.arms[1].empirical - 0.3;
        assert!(
            (bz / b0 - ratio).abs() < 0.08,
            "c3 = {c3}: {} vs {ratio}",
            bz / b0
        );
    }
}

#[test]
fn band_conditioning_converges_to_the_point_limit() {
    // The exact banded slope approaches the point-conditioned slope
    // monotonically as the band shrinks; the Monte Carlo estimate tracks
    // the banded value at every h.
    let model = catalog::selection_model(0.5, 0.3, 0.4).unwrap();
    let point = model.partial_regression_slope("Y", "X", &["S"]).unwrap();
    let ladder = [0.4, 0.2, 0.1, 0.05];

    let exact: Vec<f64> = ladder
        .iter()
        .map(|&h| util::band_conditioned_slope(&model, "Y", "X", "S", h, &[]))
        .collect();
    for pair in exact.windows(2) {
        assert!(
            (pair[1] - point).abs() < (pair[0] - point).abs(),
            "banded slope not monotone: {exact:?} -> {point}"
        );
    }

    let cfg = SimConfig::new(2_000_000, 404);
    let d = sample_linear(&model, &cfg, 0).unwrap();
    for (&h, &target) in ladder.iter().zip(&exact) {
        let sel = select_band(&d, "S", 0.0, h).unwrap();
        let fit = ols(&sel, "Y", &["X"]).unwrap();
        assert!(
            (fit.coefficient("X").unwrap() - target).abs()
                <= 4.0 * fit.standard_error("X").unwrap(),
            "h = {h}"
        );
    }
}

#[test]
fn banded_experiment_reports_the_invariance() {
    // On band-selected selection-model data, adding Z to the regression
    // leaves the treatment slope where it was.
    let model = util::load_fixture("fig3.scm");
    let cfg = SimConfig::new(1_000_000, 7).with_selection_band(0.05);
    let report = bias_experiment(
        &model,
        "X",
        "Y",
        &[vec![], vec!["Z".into()]],
        Some(BandRequest {
            node: "S".into(),
            center: 0.0,
        }),
        &cfg,
    )
    .unwrap();
    assert!(report.arms.iter().all(|a| a.pass), "{report:?}");
    let without = report.arms[0].empirical;
    let with = report.arms[1].empirical;
    assert!(
        (with - without).abs() < 4.0 * (report.arms[0].std_error + report.arms[1].std_error),
        "slope moved: {without} -> {with}"
    );
}

#[test]
fn unit_square_attenuation_across_channel_strengths() {
    let cfg = SimConfig::new(300_000, 9);
    for &c in &[0.5, 1.0, 2.0] {
        let d = sample_unit_square(c, &cfg, 0).unwrap();
        let fit = ols(&d, "U", &["X"]).unwrap();
        let expected = analytic::attenuation_factor(1.0, c, 1.0).unwrap();
        assert!((fit.coefficient("X").unwrap() - expected).abs() < 0.01);
    }
}
