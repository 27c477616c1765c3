//! Outage of the reference femto UE with the default parameters: the averaged
//! closed form against direct Monte Carlo, and the effect of UE distance.

use femtoreuse::channel::{LinkBudget, PropagationParams};
use femtoreuse::outage::{estimate, place_ue, OutageConfig};
use femtoreuse::son::SonCoordinator;
use femtoreuse::spectrum::{build_plan, Band, Scheme};
use femtoreuse::topology::{generate, neighbor_graph, DeploymentParams, Scenario};

fn main() -> femtoreuse::Result<()> {
    let params = DeploymentParams::default();
    let prop = PropagationParams::default();
    let band = Band::new(0, 60_000_000)?;
    let base = generate(Scenario::D, &params, 1)?;
    let graph = neighbor_graph(&base, params.neighbor_radius)?;
    let config = OutageConfig::default();

    println!(
        "{:<10} {:>10} {:>10} {:>10} {:>12} {:>8}",
        "scheme", "closed", "mc", "ci95", "S/E[I] dB", "cochan"
    );
    for scheme in Scheme::ALL {
        let plan = build_plan(scheme, band, 3, 1.0 / 3.0, 0.5)?;
        let mut d = base.clone();
        if scheme.has_edge_bands() {
            SonCoordinator::default().configure_frequencies(&mut d, &graph, &plan)?;
        }
        let ue = place_ue(&d, d.reference(), &config, 1)?;
        let budget = LinkBudget::new(
            &d,
            &graph,
            d.reference(),
            ue,
            &plan,
            config.ue_region,
            &prop,
        )?;
        let e = estimate(&d, &graph, d.reference(), &plan, &config, &prop, 1)?;
        println!(
            "{:<10} {:>10.5} {:>10.5} {:>10.5} {:>12.1} {:>5}/{}",
            scheme.name(),
            e.p_out_closed,
            e.p_out_mc,
            e.ci95_halfwidth,
            10.0 * (budget.s_bar / budget.mean_interference()).log10(),
            budget.femto_cochannel.iter().filter(|&&x| x).count(),
            budget.neighbor_count()
        );
    }

    println!("\nsame scheme, UE distance sweep:");
    let plan = build_plan(Scheme::Same, band, 3, 1.0 / 3.0, 0.5)?;
    for dist in [1.0, 2.0, 5.0, 8.0, 10.0] {
        let cfg = OutageConfig {
            ue_distance: dist,
            n_trials: 20_000,
            ..config.clone()
        };
        let e = estimate(&base, &graph, base.reference(), &plan, &cfg, &prop, 1)?;
        println!("  {dist:>4} m  p_out {:.4}", e.p_out_closed);
    }
    Ok(())
}
