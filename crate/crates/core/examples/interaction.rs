//! Interaction-extended system: the mediator effect and the exposure effect on
//! the mediator both vary with a binary covariate.

use genius_mediation::genius::{nie_genius, nie_interaction, GeniusOptions, Inference};
use genius_mediation::stats::{standard_normal, uniform, RandomStream};
use genius_mediation::Dataset;

fn main() -> genius_mediation::Result<()> {
    let n = 20_000;
    let s = |k: u64| RandomStream::new(11, k);
    let c: Vec<f64> = uniform(s(1), n).iter().map(|u| (*u < 0.5) as u8 as f64).collect();
    let ua = uniform(s(2), n);
    let a: Vec<f64> = (0..n)
        .map(|i| (ua[i] < 1.0 / (1.0 + (0.1 - 0.3 * c[i]).exp())) as u8 as f64)
        .collect();
    let u = standard_normal(s(3), n);
    let z = standard_normal(s(4), n);
    let e = standard_normal(s(5), n);
    let m: Vec<f64> = (0..n).map(|i| a[i] + 0.5 * a[i] * c[i] + u[i] + (0.5 + 0.5 * a[i]) * z[i]).collect();
    let y: Vec<f64> = (0..n).map(|i| a[i] + m[i] + 0.5 * m[i] * c[i] - u[i] + e[i]).collect();
    let data = Dataset::with_covariates(y, m, a, vec![c], vec!["c".into()])?;

    let opts = GeniusOptions::default();
    let full = nie_interaction(&data, 1.0, 0.0, Inference::Delta, &opts)?;
    let scalar = nie_genius(&data, 1.0, 0.0, Inference::Delta, &opts)?;

    println!("true NIE = 1.625");
    println!(
        "interaction: nie = {:.4} (se {:.4}), theta_m = {:.4}, theta_mc = {:?}, beta_ac = {:?}",
        full.nie, full.se_delta, full.theta_m, full.theta_mc, full.beta_ac
    );
    println!("scalar:      nie = {:.4} (se {:.4})", scalar.nie, scalar.se_delta);
    Ok(())
}
