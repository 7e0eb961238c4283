//! Closed-form stationary quantities for the named games.

/// Stationary expected social welfare of the three-player congestion game.
pub fn ck_expected_welfare(beta: f64) -> f64 {
    let e4 = (-4.0 * beta).exp();
    let e6 = (-6.0 * beta).exp();
    -(6.0 + 39.0 * e4 + 63.0 * e6) / (1.0 + 3.0 * e4 + 4.0 * e6)
}

/// Stationary expected social welfare of the coordination game with row
/// payoffs `a, b` on the diagonal and `c, d` off it.
pub fn coordination_expected_welfare(a: f64, b: f64, c: f64, d: f64, beta: f64) -> f64 {
    let big = a - d;
    let small = b - c;
    let e_gap = (-(big - small) * beta).exp();
    let e_big = (-big * beta).exp();
    2.0 * (a + b * e_gap + (c + d) * e_big) / (1.0 + e_gap + 2.0 * e_big)
}

/// Stationary expected social welfare of the n-player OR game.
pub fn or_expected_welfare(n: usize, beta: f64) -> f64 {
    let m = 2f64.powi(n as i32) - 1.0;
    let e = (-beta).exp();
    -(n as f64) * m * e / (1.0 + m * e)
}

/// Stationary expected social welfare of the n-player XOR game.
pub fn xor_expected_welfare(n: usize, beta: f64) -> f64 {
    -(n as f64) / (1.0 + beta.exp())
}

/// `ln Z` of the Stairs game, `Z = (1 + e^beta)^n`.
pub fn stairs_log_partition(n: usize, beta: f64) -> f64 {
    n as f64 * (1.0 + beta.exp()).ln()
}

/// `ln Z` of the OR game, `Z = 1 + (2^n - 1) e^{-beta}`.
pub fn or_log_partition(n: usize, beta: f64) -> f64 {
    ((2f64.powi(n as i32) - 1.0) * (-beta).exp()).ln_1p()
}

/// `ln Z` of the XOR game, `Z = 2^{n-1} (1 + e^{-beta})`.
pub fn xor_log_partition(n: usize, beta: f64) -> f64 {
    (n as f64 - 1.0) * std::f64::consts::LN_2 + (-beta).exp().ln_1p()
}

/// `p = 1/(1 + e^{(a-d) beta})` and `q = 1/(1 + e^{(b-c) beta})`, the
/// probabilities of leaving the two equilibria of a coordination game.
pub fn coordination_exit_probabilities(a: f64, b: f64, c: f64, d: f64, beta: f64) -> (f64, f64) {
    (1.0 / (1.0 + ((a - d) * beta).exp()), 1.0 / (1.0 + ((b - c) * beta).exp()))
}

/// Second largest eigenvalue `((1-p) + (1-q))/2` of the coordination chain.
pub fn coordination_lambda_star(a: f64, b: f64, c: f64, d: f64, beta: f64) -> f64 {
    let (p, q) = coordination_exit_probabilities(a, b, c, d, beta);
    ((1.0 - p) + (1.0 - q)) / 2.0
}

/// Path-coupling bound `(1/(p+q)) ln(4/eps^2)` on the coordination chain's
/// mixing time.
pub fn coordination_path_coupling_bound(a: f64, b: f64, c: f64, d: f64, beta: f64, epsilon: f64) -> f64 {
    let (p, q) = coordination_exit_probabilities(a, b, c, d, beta);
    (4.0 / (epsilon * epsilon)).ln() / (p + q)
}

/// Smallest beta from which the coordination game's expected welfare
/// dominates its worst Nash equilibrium, for `a > b`.
pub fn coordination_welfare_threshold(a: f64, b: f64, c: f64, d: f64) -> Option<f64> {
    if a <= b {
        return None;
    }
    let ratio = (2.0 * b - c - d) / (a - b);
    if ratio <= 1.0 {
        return Some(0.0);
    }
    Some((ratio.ln() / (a - d)).max(0.0))
}
