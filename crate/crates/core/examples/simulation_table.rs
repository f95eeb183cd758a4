//! A small Monte Carlo study written as the CSV table the CLI produces.

use genius_mediation::io::{simulation_csv, Invocation};
use genius_mediation::simulation::{run_study, StudyConfig};

fn main() -> genius_mediation::Result<()> {
    let cfg = StudyConfig {
        replications: 100,
        n: 500,
        bootstrap: None,
        ..StudyConfig::default()
    };
    let report = run_study(&cfg)?;
    let inv = Invocation::new(&["simulate".into(), "--replications".into(), "100".into()], Some(cfg.seed));
    print!("{}", simulation_csv(&report, &inv)?);
    Ok(())
}
