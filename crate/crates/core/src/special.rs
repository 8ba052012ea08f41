//! Special functions needed by the prior optimizer.

/// Digamma function Ψ(x) for x > 0.
///
/// Shifts the argument to at least 10 with Ψ(x) = Ψ(x + 1) − 1/x and then applies
/// the asymptotic expansion in 1/x².
pub fn digamma(mut x: f64) -> f64 {
    if x.is_nan() || x <= 0.0 || x.is_infinite() {
        return f64::NAN;
    }
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli terms B2n / (2n) for n = 1..7
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + libm::log(x) - 0.5 * inv - series
}
