use std::f64::consts::PI;

use super::{demean, Cov2, Deterministic, Sample};

/// Contiguity rate `g_T(γ) = (Σ_{t=1}^{T−1} Σ_{l=0}^{t−1} γ^{2l})^{−1/2}`,
/// evaluated through the geometric-sum closed forms with `0⁰ = 1`.
pub fn scaling_g(gamma: f64, t: usize) -> f64 {
    assert!(t >= 2, "scaling_g needs T >= 2");
    (-0.5 * ln_double_sum(gamma * gamma, t)).exp()
}

/// `ln Σ_{t=1}^{T−1} (1 − q^t)/(1 − q)` for `q = γ² ≥ 0`.
fn ln_double_sum(q: f64, t: usize) -> f64 {
    let m = (t - 1) as f64;
    let h = q - 1.0;
    if h.abs() * m < 1e-3 {
        // near the unit root the closed form cancels; sum directly
        let mut total = 0.0;
        let mut inner = 0.0;
        let mut pow = 1.0;
        for _ in 1..t {
            inner += pow;
            total += inner;
            pow *= q;
        }
        return total.ln();
    }
    if q < 1.0 {
        // (m − q(1 − q^m)/(1 − q)) / (1 − q)
        let one_minus = -h;
        let qm = if q == 0.0 { 0.0 } else { (m * q.ln()).exp() };
        let geo = q * (1.0 - qm) / one_minus;
        ((m - geo) / one_minus).ln()
    } else {
        // (q(q^m − 1)/(q − 1) − m) / (q − 1), kept in log space
        let lq = q.ln();
        let l = m * lq;
        let ln_expm1 = if l > 30.0 { l + (-(-l).exp_m1()).ln() } else { l.exp_m1().ln() };
        let ln_first = lq + ln_expm1 - h.ln();
        ln_first + (-m * (-ln_first).exp()).ln_1p() - h.ln()
    }
}

/// Log density of the maximal invariant `(y^μ, x)` at `(β, γ)`.
///
/// The `y` block is written through the residual of
/// `y_t − δx_t − (β − γδ)x_{t−1}` off the deterministic regressors, whose sum
/// of squares equals that of the rotated vector; the exponent on
/// `2πσ_{yy.x}` is `−(T−p)/2` with `p` deterministic regressors.
pub fn log_density_invariant(s: &Sample, cov: &Cov2, beta: f64, gamma: f64, kind: Deterministic) -> f64 {
    let t = s.len();
    let xl = s.lagged_x();
    let delta = cov.delta();
    let syy_x = cov.syy_x();

    let ssx: f64 = s
        .x
        .iter()
        .zip(&xl)
        .map(|(x, xp)| {
            let e = x - gamma * xp;
            e * e
        })
        .sum();
    let coef = beta - gamma * delta;
    let u: Vec<f64> = s
        .y
        .iter()
        .zip(&s.x)
        .zip(&xl)
        .map(|((y, x), xp)| y - delta * x - coef * xp)
        .collect();
    let ssy: f64 = demean(&u, kind).iter().map(|v| v * v).sum();

    let dof = (t - kind.dim()) as f64;
    -0.5 * t as f64 * (2.0 * PI * cov.sxx).ln() - ssx / (2.0 * cov.sxx) - 0.5 * dof * (2.0 * PI * syy_x).ln()
        - ssy / (2.0 * syy_x)
}

/// `log_density_invariant(s, at) − log_density_invariant(s, base)` with the
/// two quadratic forms differenced term by term. Far from the data both log
/// densities are large and their plain difference loses absolute accuracy;
/// this form keeps it at the size of the ratio itself.
pub fn log_density_ratio(s: &Sample, cov: &Cov2, at: (f64, f64), base: (f64, f64), kind: Deterministic) -> f64 {
    let xl = s.lagged_x();
    let delta = cov.delta();
    let (beta0, gamma0) = base;
    let dg = at.1 - gamma0;
    let dcoef = (at.0 - beta0) - dg * delta;
    let coef0 = beta0 - gamma0 * delta;

    let mut dssx = 0.0;
    let mut u0 = Vec::with_capacity(xl.len());
    for ((x, xp), y) in s.x.iter().zip(&xl).zip(&s.y) {
        let e0 = x - gamma0 * xp;
        let d = -dg * xp;
        dssx += d * (2.0 * e0 + d);
        u0.push(y - delta * x - coef0 * xp);
    }
    let u0 = demean(&u0, kind);
    let xlm = demean(&xl, kind);
    let dssy: f64 = u0
        .iter()
        .zip(&xlm)
        .map(|(u, xm)| {
            let d = -dcoef * xm;
            d * (2.0 * u + d)
        })
        .sum();
    -dssx / (2.0 * cov.sxx) - dssy / (2.0 * cov.syy_x())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(gamma: f64, t: usize) -> f64 {
        let mut s = 0.0;
        for tt in 1..t {
            for l in 0..tt {
                s += gamma.powi(2 * l as i32);
            }
        }
        s.powf(-0.5)
    }

    #[test]
    fn unit_root_value() {
        let g = scaling_g(1.0, 100);
        assert!((g - 4950f64.powf(-0.5)).abs() < 1e-15);
        assert!((g - 0.014_213_4).abs() < 1e-7);
    }

    #[test]
    fn zero_gamma_collapses() {
        for t in [2, 3, 10, 500] {
            assert!((scaling_g(0.0, t) - ((t - 1) as f64).powf(-0.5)).abs() < 1e-15);
        }
    }

    #[test]
    fn matches_double_sum() {
        for &gamma in &[-1.1, -0.7, 0.0, 0.3, 0.9, 0.999, 0.99999, 1.0, 1.00001, 1.001, 1.05, 1.3] {
            for &t in &[2usize, 3, 17, 100, 250] {
                let a = scaling_g(gamma, t);
                let b = brute(gamma, t);
                assert!(((a - b) / b).abs() < 1e-11, "gamma={gamma} T={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn continuous_across_regimes() {
        let t = 300;
        let at_one = scaling_g(1.0, t);
        for eps in [1e-4, 1e-6, 1e-9] {
            // relative slope at the unit root is about T/3
            let tol = t as f64 * eps;
            assert!(((scaling_g(1.0 + eps, t) - at_one) / at_one).abs() < tol);
            assert!(((scaling_g(1.0 - eps, t) - at_one) / at_one).abs() < tol);
        }
    }

    #[test]
    fn explosive_large_t_does_not_overflow() {
        let g = scaling_g(1.05, 10_000);
        assert!(g > 0.0 && g.is_finite() || g == 0.0);
        let ln_g = -0.5 * ln_double_sum(1.05f64.powi(2), 10_000);
        let approx = (1.0 - 1.05f64.powi(-2)).ln() - 9998.0 * 1.05f64.ln();
        assert!((ln_g - approx).abs() < 1e-3);
    }

    #[test]
    fn ratio_matches_plain_difference() {
        use crate::model::{simulate, ModelParams};
        let cov = Cov2::new(1.3, -0.6, 0.8).unwrap();
        for kind in [Deterministic::Intercept, Deterministic::Trend] {
            let s = simulate(&ModelParams::null(0.95, cov, kind), 80, 3);
            let (at, base) = ((0.2, 0.97), (-0.1, 0.93));
            let plain = log_density_invariant(&s, &cov, at.0, at.1, kind) - log_density_invariant(&s, &cov, base.0, base.1, kind);
            assert!((log_density_ratio(&s, &cov, at, base, kind) - plain).abs() < 1e-9 * (1.0 + plain.abs()));
            assert_eq!(log_density_ratio(&s, &cov, base, base, kind), 0.0);
        }
    }
}
