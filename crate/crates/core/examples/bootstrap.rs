//! Delta-method and nonparametric bootstrap intervals side by side.

use genius_mediation::genius::{nie_genius, BootstrapCi, BootstrapConfig, GeniusOptions, Inference};
use genius_mediation::simulation::{generate_dataset, Dag, DgpConfig};

fn main() -> genius_mediation::Result<()> {
    let data = generate_dataset(&DgpConfig::new(Dag::C, 1000, 5))?;
    let opts = GeniusOptions::default();
    for ci in [BootstrapCi::Percentile, BootstrapCi::Normal] {
        let cfg = BootstrapConfig { replicates: 500, seed: 99, ci };
        let est = nie_genius(&data, 1.0, 0.0, Inference::Both(cfg), &opts)?;
        let boot = est.bootstrap.as_ref().unwrap();
        println!("nie = {:.4}", est.nie);
        println!("  delta      se {:.4}  CI [{:.4}, {:.4}]", est.se_delta, est.ci_delta.0, est.ci_delta.1);
        println!(
            "  {:<10} se {:.4}  CI [{:.4}, {:.4}]  ({} of {} resamples failed)",
            format!("{ci:?}").to_lowercase(),
            boot.se,
            boot.ci.0,
            boot.ci.1,
            boot.failures,
            boot.replicates
        );
    }
    Ok(())
}
