//! Random FAP placement under one macrocell, the neighbor graph built on it,
//! and the deployment CSV.
//!
//!     cargo run --example deployment -- [count] [seed]

use femtoreuse::topology::{
    classify, generate, neighbor_graph, read_csv, write_csv, DeploymentParams, Scenario,
};

fn main() -> femtoreuse::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().map_or(1000, |a| a.parse().expect("count"));
    let seed: u64 = args.next().map_or(1, |a| a.parse().expect("seed"));

    let params = DeploymentParams {
        femto_count: count,
        ..Default::default()
    };
    let scenario = if count >= params.dense_threshold {
        Scenario::D
    } else {
        Scenario::C
    };
    let d = generate(scenario, &params, seed)?;
    let g = neighbor_graph(&d, params.neighbor_radius)?;

    let mut per_sector = vec![0; params.n_sectors];
    for f in &d.faps {
        per_sector[f.sector_index] += 1;
    }
    let max_degree = d.faps.iter().map(|f| g.degree(f.id)).max().unwrap_or(0);
    println!(
        "scenario {scenario}, {} FAPs, per sector {per_sector:?}",
        d.len()
    );
    println!(
        "{} neighbor pairs, mean degree {:.2} (expected about {:.2}), max {max_degree}",
        g.edge_count(),
        g.mean_degree(),
        params.expected_neighbors()
    );
    println!("classified as {:?}", classify(&d, &g));

    let r = d.fap(d.reference())?;
    println!(
        "reference {} at ({:.1}, {:.1}), {} m from the macro BS, {} neighbors",
        r.id,
        r.position.x,
        r.position.y,
        r.position.norm().round(),
        g.degree(r.id)
    );

    let mut buf = Vec::new();
    write_csv(&d, &mut buf)?;
    let back = read_csv(buf.as_slice())?;
    assert_eq!(back, d);
    println!("\nCSV ({} bytes), first lines:", buf.len());
    for line in String::from_utf8_lossy(&buf).lines().take(8) {
        println!("  {line}");
    }
    Ok(())
}
