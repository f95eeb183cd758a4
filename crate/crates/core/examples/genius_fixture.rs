//! Scalar GENIUS fit on simulated data with an unmeasured confounder, next to
//! the naive product estimate that ignores it.

use genius_mediation::genius::{genius_theta_m, nie_genius, GeniusOptions, Inference};
use genius_mediation::mediation::nie_naive;
use genius_mediation::simulation::{generate_dataset, Dag, DgpConfig};
use genius_mediation::stats::HcType;

fn main() -> genius_mediation::Result<()> {
    let data = generate_dataset(&DgpConfig::new(Dag::B, 5000, 7))?;
    let opts = GeniusOptions::default();

    let fit = genius_theta_m(&data, &opts)?;
    println!("theta_m = {:.4} (se {:.4}), weak_id = {}", fit.theta_m, fit.se_theta, fit.weak_id);
    println!(
        "het test: chi2 = {:.2} on {} df, p = {:.3e}",
        fit.het_test.statistic, fit.het_test.df, fit.het_test.p_value
    );

    let g = nie_genius(&data, 1.0, 0.0, Inference::Delta, &opts)?;
    let naive = nie_naive(&data, 1.0, 0.0, Inference::Delta, HcType::Hc0)?;
    println!("true NIE = 1");
    for est in [&g, &naive] {
        println!(
            "{:<8} nie = {:.4}  se = {:.4}  95% CI [{:.4}, {:.4}]",
            est.method, est.nie, est.se_delta, est.ci_delta.0, est.ci_delta.1
        );
    }
    Ok(())
}
