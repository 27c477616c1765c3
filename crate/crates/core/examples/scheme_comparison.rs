//! Runs a named experiment in-process and prints its CSV.
//!
//!     cargo run --release --example scheme_comparison -- fig6 n_trials=20000

use femtoreuse::config::ExperimentConfig;
use femtoreuse::experiment::{self, Experiment};

fn main() -> femtoreuse::Result<()> {
    let mut args = std::env::args().skip(1);
    let which: Experiment = args.next().as_deref().unwrap_or("fig5").parse()?;
    let mut config = ExperimentConfig::default();
    for kv in args {
        config.apply_override(&kv)?;
    }
    let rows = experiment::run(which, &config)?;
    experiment::write_csv(&rows, which, &config, std::io::stdout().lock())?;

    let dynamic = rows.iter().filter(|r| r.label == "dynamic");
    for r in dynamic {
        let worst = rows
            .iter()
            .filter(|o| o.density == r.density)
            .map(|o| o.estimate.p_out_closed)
            .fold(0.0, f64::max);
        eprintln!(
            "{} FAPs: dynamic {:.4}, worst scheme {:.4}",
            r.density, r.estimate.p_out_closed, worst
        );
    }
    Ok(())
}
