//! Reading a CSV with gaps, estimating, and serializing the report.

use std::io::Cursor;

use genius_mediation::genius::{nie_genius, GeniusOptions, Inference};
use genius_mediation::io::{read_csv, ColumnSpec, EstimateReport, Invocation};
use genius_mediation::simulation::{generate_dataset, Dag, DgpConfig};

fn main() -> genius_mediation::Result<()> {
    let sim = generate_dataset(&DgpConfig::new(Dag::B, 400, 21))?;
    let mut text = String::from("id,y,m,a\n");
    for i in 0..sim.n() {
        // a few holes to exercise complete-case handling
        let m = if i % 97 == 0 { "NA".to_string() } else { sim.m[i].to_string() };
        text.push_str(&format!("{i},{},{m},{}\n", sim.y[i], sim.a[i]));
    }

    let loaded = read_csv(Cursor::new(text), &ColumnSpec::new("y", "m", "a"))?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let est = nie_genius(&loaded.dataset, 1.0, 0.0, Inference::Delta, &GeniusOptions::default())?;

    let inv = Invocation::new(&["estimate".into(), "--input".into(), "in-memory.csv".into()], None);
    let mut report = EstimateReport::from_estimate(inv, &est, loaded.dataset.n());
    report.rows_dropped = loaded.rows_dropped;
    report.warnings = loaded.warnings.clone();

    println!("{}", report.to_json()?);
    print!("{}", report.to_csv()?);
    Ok(())
}
