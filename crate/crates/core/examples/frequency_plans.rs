//! Prints the four allocation schemes over a 60 MHz band and which links
//! end up co-channel for a UE in sector 0.

use femtoreuse::spectrum::{build_plan, cochannel, Band, EdgeColor, Interferer, Scheme, UeRegion};

fn mhz(b: Band) -> String {
    format!(
        "{:.2}-{:.2} MHz",
        b.lower() as f64 / 1e6,
        b.upper() as f64 / 1e6
    )
}

fn main() -> femtoreuse::Result<()> {
    let total = Band::new(0, 60_000_000)?;
    for scheme in Scheme::ALL {
        let plan = build_plan(scheme, total, 3, 1.0 / 3.0, 0.5)?;
        println!("== {scheme} (p = {}, q = {})", plan.p(), plan.q());
        for s in 0..plan.n_sectors() {
            print!(
                "  sector {s}: macro {}, femto {}",
                mhz(plan.macro_band(s)?),
                mhz(plan.center_band_per_sector()[s])
            );
            if scheme.has_edge_bands() {
                let edges: Vec<String> = EdgeColor::ALL
                    .iter()
                    .map(|&c| format!("{c}={}", mhz(plan.edge_band(s, c).unwrap().unwrap())))
                    .collect();
                print!(", edge {}", edges.join(" "));
            }
            println!();
        }

        let me = plan.allocation(0, Some(EdgeColor::X))?;
        let same_slice = plan.allocation(0, Some(EdgeColor::X))?;
        let other_slice = plan.allocation(0, Some(EdgeColor::Y))?;
        for region in [UeRegion::Center, UeRegion::Edge] {
            println!(
                "  {region:>6} UE: macro Y={} neighbor on X: {} neighbor on Y: {}",
                cochannel(&plan, &me, region, Interferer::Macro { sector: 0 }) as u8,
                cochannel(&plan, &me, region, Interferer::Femto(&same_slice)) as u8,
                cochannel(&plan, &me, region, Interferer::Femto(&other_slice)) as u8,
            );
        }
    }

    let plan = build_plan(Scheme::DynamicReuse, total, 3, 1.0 / 3.0, 0.5)?;
    println!(
        "\n# dynamic plan as a config block\n{}",
        plan.to_config_block()
    );
    Ok(())
}
