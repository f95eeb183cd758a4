//! Least squares with model-based and heteroskedasticity-robust standard errors.

use genius_mediation::stats::{ols_fit, sandwich_cov, standard_normal, DesignMatrix, HcType, RandomStream};

fn main() -> genius_mediation::Result<()> {
    let n = 2000;
    let x = standard_normal(RandomStream::new(1, 0), n);
    let e = standard_normal(RandomStream::new(1, 1), n);
    // error spread grows with |x|
    let y: Vec<f64> = x.iter().zip(&e).map(|(xi, ei)| 1.0 + 2.0 * xi + (0.5 + xi.abs()) * ei).collect();

    let design = DesignMatrix::from_columns(n, true, &[("x", x.as_slice())])?;
    let fit = ols_fit(&design, &y)?;
    let hc1 = sandwich_cov(&fit, &design, HcType::Hc1)?;

    println!("{:<12} {:>10} {:>10} {:>10} {:>10}", "term", "coef", "se_model", "se_hc0", "se_hc1");
    for (j, name) in fit.column_names.iter().enumerate() {
        println!(
            "{:<12} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            name,
            fit.coefficients[j],
            fit.cov_model[(j, j)].sqrt(),
            fit.cov_robust[(j, j)].sqrt(),
            hc1[(j, j)].sqrt()
        );
    }
    Ok(())
}
