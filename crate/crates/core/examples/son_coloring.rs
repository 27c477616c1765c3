//! Edge-slice coloring by the SON coordinator versus random slices, plus
//! the event log written as NDJSON and replayed.

use femtoreuse::son::{
    assign_random_edges, orthogonal_pair_fraction, ColoringState, EventLog, SonCoordinator,
};
use femtoreuse::spectrum::{build_plan, Band, Scheme};
use femtoreuse::topology::{generate, neighbor_graph, DeploymentParams, Scenario};

fn main() -> femtoreuse::Result<()> {
    let params = DeploymentParams::default();
    let plan = build_plan(
        Scheme::DynamicReuse,
        Band::new(0, 60_000_000)?,
        3,
        1.0 / 3.0,
        0.5,
    )?;
    let start = generate(Scenario::D, &params, 3)?;
    let graph = neighbor_graph(&start, params.neighbor_radius)?;

    let mut colored = start.clone();
    let mut son = SonCoordinator::default();
    let state = son.configure_frequencies(&mut colored, &graph, &plan)?;

    let mut random = start.clone();
    assign_random_edges(&mut random, 3);
    let random_state = ColoringState::from_deployment(&random, &graph);

    println!("{} neighbor pairs", graph.edge_count());
    println!(
        "greedy: {} pairs share a slice, {:.1}% of ordered pairs orthogonal",
        state.conflict_count(),
        100.0 * orthogonal_pair_fraction(&colored, &graph, &plan)?
    );
    println!(
        "random: {} pairs share a slice, {:.1}% of ordered pairs orthogonal",
        random_state.conflict_count(),
        100.0 * orthogonal_pair_fraction(&random, &graph, &plan)?
    );

    let log = son.into_log();
    let mut ndjson = Vec::new();
    log.write_ndjson(&mut ndjson)?;
    println!(
        "\nevent log: {} events, {} bytes; first three:",
        log.len(),
        ndjson.len()
    );
    for line in String::from_utf8_lossy(&ndjson).lines().take(3) {
        println!("  {line}");
    }

    let parsed = EventLog::read_ndjson(ndjson.as_slice())?;
    let mut replayed = start;
    replayed.clear_edges();
    parsed.replay(&mut replayed)?;
    println!("replay matches: {}", replayed == colored);
    Ok(())
}
