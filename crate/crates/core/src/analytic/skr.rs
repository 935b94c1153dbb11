/// Binary entropy in bits, continuous at the endpoints.
pub fn binary_entropy(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -q * libm::log2(q) - (1.0 - q) * libm::log2(1.0 - q)
}

/// BB84 key rate on Werner pairs delivered at rate `lambda` with mean
/// fidelity `f`; the QBER is `2(1 − f)/3`.
pub fn secret_key_rate(lambda: f64, f: f64) -> f64 {
    let qber = 2.0 * (1.0 - f) / 3.0;
    (lambda * (1.0 - 2.0 * binary_entropy(qber))).max(0.0)
}

/// Fidelity above which the key rate is positive.
pub fn skr_threshold_fidelity() -> f64 {
    // 1 − 2 H2(2(1 − F)/3) increases on [3/4, 1]: negative at 3/4, one at 1.
    let yield_at = |f: f64| 1.0 - 2.0 * binary_entropy(2.0 * (1.0 - f) / 3.0);
    let (mut lo, mut hi) = (0.75, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if yield_at(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
