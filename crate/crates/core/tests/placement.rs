use statrs::distribution::{ChiSquared, ContinuousCDF};

use femtoreuse::topology::{classify, generate, neighbor_graph, DeploymentParams, Scenario};

// 10 rings of equal area times 10 angular wedges: 100 equiprobable cells.
#[test]
fn positions_uniform_over_disc() {
    let params = DeploymentParams {
        femto_count: 10_000,
        reference_distance: None,
        ..Default::default()
    };
    let d = generate(Scenario::D, &params, 1).unwrap();
    let (rings, wedges) = (10usize, 10usize);
    let mut cells = vec![0f64; rings * wedges];
    for f in &d.faps {
        let r2 = (f.position.norm() / params.macro_radius).powi(2);
        let ring = ((r2 * rings as f64) as usize).min(rings - 1);
        let angle = f
            .position
            .y
            .atan2(f.position.x)
            .rem_euclid(std::f64::consts::TAU);
        let wedge = ((angle / std::f64::consts::TAU * wedges as f64) as usize).min(wedges - 1);
        cells[ring * wedges + wedge] += 1.0;
    }
    let expected = d.len() as f64 / cells.len() as f64;
    let stat: f64 = cells
        .iter()
        .map(|o| (o - expected).powi(2) / expected)
        .sum();
    let chi2 = ChiSquared::new((cells.len() - 1) as f64).unwrap();
    let p = 1.0 - chi2.cdf(stat);
    assert!(p >= 0.01, "chi2 = {stat:.1}, p = {p:.4}");
}

#[test]
fn classification_by_density() {
    let sparse = DeploymentParams {
        femto_count: 20,
        reference_distance: None,
        ..Default::default()
    };
    let d = generate(Scenario::C, &sparse, 4).unwrap();
    let g = neighbor_graph(&d, sparse.neighbor_radius).unwrap();
    let got = classify(&d, &g);
    assert!(
        matches!(got, Some(Scenario::B) | Some(Scenario::C)),
        "{got:?}"
    );

    let dense = DeploymentParams::default();
    let d = generate(Scenario::D, &dense, 4).unwrap();
    let g = neighbor_graph(&d, dense.neighbor_radius).unwrap();
    assert_eq!(classify(&d, &g), Some(Scenario::D));

    let b = generate(Scenario::B, &sparse, 4).unwrap();
    let g = neighbor_graph(&b, sparse.neighbor_radius).unwrap();
    assert_eq!(classify(&b, &g), Some(Scenario::B));
}
