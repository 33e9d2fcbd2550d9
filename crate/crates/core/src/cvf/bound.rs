use statrs::function::factorial::ln_binomial;

/// `P(|X/J − α| > ε)` for `X ~ Binomial(J, α)`: the chance that a check
/// point whose true rejection rate is exactly `α` still looks discrepant.
pub fn mc_discrepancy_bound(j: u64, alpha: f64, epsilon: f64) -> f64 {
    assert!(j >= 1, "need at least one replication");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    assert!(epsilon > 0.0, "epsilon must be positive");
    let jf = j as f64;
    let centre = alpha * jf;
    let width = epsilon * jf;
    let (la, lb) = (alpha.ln(), (1.0 - alpha).ln());
    let mut total = 0.0;
    for x in 0..=j {
        let dev = (x as f64 - centre).abs();
        // Ties in exact arithmetic must not count as exceedances.
        if dev <= width * (1.0 + 1e-12) {
            continue;
        }
        let xf = x as f64;
        total += (ln_binomial(j, x) + xf * la + (jf - xf) * lb).exp();
    }
    total.min(1.0)
}
