//! Monte Carlo checks of the max-stable machinery: simulated bivariate laws
//! against the closed form, per-site margins, and agreement between the
//! empirical pairwise extremal coefficient and its analytic value.

use abc_extremes_core::maxstable::{
    cluster_triplets, matern_correlation, maxstable_summary, pair_extremal_estimate,
    pairwise_extremal_coef, schlather_bivariate_cdf, schlather_simulate, MaternParams, SiteSet,
};
use abc_extremes_core::rng::stream_rng;
use abc_extremes_core::stats::{ks_critical, ks_statistic, mean, variance};

#[test]
fn bivariate_law_matches_closed_form() {
    // two sites at a separation with rho = 0.5 under the exponential member
    let rho_target: f64 = 0.5;
    let c2 = 2.0;
    let h = -c2 * rho_target.ln();
    let p = MaternParams::new(1.0, c2, 0.5).unwrap();
    let rho = matern_correlation(h, &p).unwrap();
    assert!((rho - rho_target).abs() < 1e-12);

    let sites = SiteSet::new(vec![(0.0, 0.0), (h, 0.0)]).unwrap();
    let n = 20_000;
    let field = schlather_simulate(&sites, &p, n, &mut stream_rng(600, 0)).unwrap();

    // z-grid at unit-Fréchet quantiles 0.3 .. 0.95
    let zs: Vec<f64> = [0.3, 0.5, 0.7, 0.85, 0.95]
        .iter()
        .map(|&q: &f64| -1.0 / q.ln())
        .collect();
    let mut fails = 0;
    for &z1 in &zs {
        for &z2 in &zs {
            let theory = schlather_bivariate_cdf(z1, z2, rho).unwrap();
            let count = (0..n)
                .filter(|&b| field.blocks[(b, 0)] <= z1 && field.blocks[(b, 1)] <= z2)
                .count();
            let emp = count as f64 / n as f64;
            let se = (theory * (1.0 - theory) / n as f64).sqrt();
            if (emp - theory).abs() > 3.0 * se {
                fails += 1;
            }
        }
    }
    assert!(fails <= 2, "{fails} of 25 grid points outside 3 SE");
}

#[test]
fn margins_are_unit_frechet_per_site() {
    let sites = SiteSet::new(vec![
        (0.0, 0.0),
        (1.0, 0.0),
        (0.0, 1.5),
        (2.0, 2.0),
        (4.0, 1.0),
    ])
    .unwrap();
    let p = MaternParams::new(1.0, 3.0, 1.0).unwrap();
    let n = 10_000;
    let field = schlather_simulate(&sites, &p, n, &mut stream_rng(601, 0)).unwrap();
    assert_eq!(field.capped_blocks, 0);
    for j in 0..sites.len() {
        let col = field.site_column(j);
        let d = ks_statistic(&col, |z| if z > 0.0 { (-1.0 / z).exp() } else { 0.0 });
        assert!(d < ks_critical(n, 0.01), "site {j}: KS {d}");
    }
}

#[test]
fn pairwise_estimator_tracks_analytic_coefficient() {
    // replicate fields, compare the mean empirical pair coefficient with
    // 1 + sqrt((1 - rho)/2) within 3 standard errors of the replicates
    let p = MaternParams::new(1.0, 3.0, 1.0).unwrap();
    for h in [1.0, 3.0, 8.0] {
        let analytic = pairwise_extremal_coef(h, &p).unwrap();
        let sites = SiteSet::new(vec![(0.0, 0.0), (h, 0.0)]).unwrap();
        let reps = 12;
        let estimates: Vec<f64> = (0..reps)
            .map(|r| {
                let field =
                    schlather_simulate(&sites, &p, 400, &mut stream_rng(602, r as u64)).unwrap();
                pair_extremal_estimate(&field.site_column(0), &field.site_column(1))
            })
            .collect();
        let m = mean(&estimates);
        let se = (variance(&estimates) / reps as f64).sqrt();
        assert!(
            (m - analytic).abs() < 3.0 * se + 0.02,
            "h={h}: estimate {m} vs analytic {analytic} (se {se})"
        );
    }
}

#[test]
fn dependent_field_summary_near_one() {
    // tightly clustered sites are near-fully dependent: cluster means of the
    // triplet coefficients sit close to 1
    let sites = SiteSet::new(vec![
        (0.0, 0.0),
        (0.01, 0.0),
        (0.0, 0.01),
        (0.01, 0.01),
        (0.005, 0.005),
    ])
    .unwrap();
    let p = MaternParams::new(1.0, 3.0, 1.0).unwrap();
    let field = schlather_simulate(&sites, &p, 2_000, &mut stream_rng(603, 0)).unwrap();
    let clustering = cluster_triplets(&sites, 2, 604).unwrap();
    let s = maxstable_summary(&field, &clustering);
    for v in &s.values {
        assert!((v - 1.0).abs() < 0.05, "summary {s:?}");
    }
}
