//! A victim UE asking its loudest co-channel neighbors to back off, then
//! new FAPs joining one at a time.

use femtoreuse::channel::PropagationParams;
use femtoreuse::outage::{estimate, place_ue, OutageConfig};
use femtoreuse::son::{SonConfig, SonCoordinator, VictimUe};
use femtoreuse::spectrum::{build_plan, Band, Scheme};
use femtoreuse::topology::{generate, neighbor_graph, DeploymentParams, Point, Scenario};

fn main() -> femtoreuse::Result<()> {
    let params = DeploymentParams::default();
    let prop = PropagationParams::default();
    let plan = build_plan(
        Scheme::Dedicated,
        Band::new(0, 60_000_000)?,
        3,
        1.0 / 3.0,
        0.5,
    )?;
    let mut d = generate(Scenario::D, &params, 5)?;
    let mut graph = neighbor_graph(&d, params.neighbor_radius)?;
    let config = OutageConfig::default();

    let reference = d.reference();
    let victim = VictimUe {
        serving: reference,
        position: place_ue(&d, reference, &config, 5)?,
        region: config.ue_region,
    };
    let before = estimate(&d, &graph, reference, &plan, &config, &prop, 5)?;

    // Aim 10 dB above the threshold so the mean SIR target actually binds.
    let mut son = SonCoordinator::new(SonConfig {
        margin_db: 10.0,
        ..Default::default()
    });
    let requests = son.adjust_power(&mut d, &graph, &plan, &victim, &prop, config.gamma_db)?;
    let after = estimate(&d, &graph, reference, &plan, &config, &prop, 5)?;
    let touched: std::collections::BTreeSet<_> = requests.iter().map(|e| e.subject).collect();
    println!(
        "{} power requests to {} FAPs",
        requests.len(),
        touched.len()
    );
    for e in requests.iter().take(5) {
        println!("  {}", serde_json::to_string(e)?);
    }
    println!(
        "p_out {:.4} -> {:.4}",
        before.p_out_closed, after.p_out_closed
    );

    // Admissions under dynamic re-use.
    let plan = build_plan(
        Scheme::DynamicReuse,
        Band::new(0, 60_000_000)?,
        3,
        1.0 / 3.0,
        0.5,
    )?;
    let mut son = SonCoordinator::default();
    son.configure_frequencies(&mut d, &graph, &plan)?;
    let r = d.fap(reference)?.position;
    for (dx, dy) in [(15.0, 5.0), (-20.0, 30.0), (40.0, -10.0)] {
        let (id, events) =
            son.admit_fap(&mut d, &mut graph, &plan, Point::new(r.x + dx, r.y + dy))?;
        let fap = d.fap(id)?;
        println!(
            "admitted {id} with {} neighbors on slice {}, {} events",
            graph.degree(id),
            fap.edge.expect("dynamic re-use assigns a slice"),
            events.len()
        );
    }
    Ok(())
}
