//! Plug-in indirect effect on the risk-ratio scale from a table of counts.

use genius_mediation::mediation::{rr_nie_plugin, DiscreteMediationTable};

fn main() -> genius_mediation::Result<()> {
    // (y, m, a, c, count)
    let records = [
        (1, "lo", "0", "young", 30), (0, "lo", "0", "young", 170),
        (1, "hi", "0", "young", 25), (0, "hi", "0", "young", 75),
        (1, "lo", "1", "young", 12), (0, "lo", "1", "young", 88),
        (1, "hi", "1", "young", 60), (0, "hi", "1", "young", 140),
        (1, "lo", "0", "old", 40), (0, "lo", "0", "old", 110),
        (1, "hi", "0", "old", 45), (0, "hi", "0", "old", 55),
        (1, "lo", "1", "old", 20), (0, "lo", "1", "old", 60),
        (1, "hi", "1", "old", 110), (0, "hi", "1", "old", 110),
    ];
    let table = DiscreteMediationTable::from_records(records)?;
    for c in table.c_levels.clone() {
        let est = rr_nie_plugin(&table, "1", "0", &c)?;
        println!(
            "c = {:<6} RR_NIE = {:.4}  ({:.4} / {:.4})",
            est.c, est.rr, est.numerator, est.denominator
        );
    }
    Ok(())
}
