//! Complete elliptic integrals via the arithmetic-geometric mean.

use std::f64::consts::FRAC_PI_2;

const AGM_TOL: f64 = 1e-15;

/// Arithmetic-geometric mean of two nonnegative numbers.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        if (a - b).abs() <= AGM_TOL * a.abs() {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind, `F(k) = ∫₀^{π/2} dθ / √(1 − k² sin²θ)`,
/// parametrized by the modulus `k ∈ [0, 1)`.
pub fn elliptic_k(k: f64) -> f64 {
    elliptic_k_complement(((1.0 - k) * (1.0 + k)).sqrt())
}

/// `F(k)` given the complementary modulus `k′ = √(1 − k²)`; accurate when `k` is near 1.
pub fn elliptic_k_complement(kp: f64) -> f64 {
    FRAC_PI_2 / agm(1.0, kp)
}

/// Complete elliptic integral of the second kind for modulus `k ∈ [0, 1]`.
///
/// Uses the Gauss transformation: `E = K · (1 − Σ 2^{n−1} c_n²)` where the
/// `c_n` are the half-differences of the AGM sequence started at `(1, k')`.
pub fn elliptic_e(k: f64) -> f64 {
    if k >= 1.0 {
        return 1.0;
    }
    let mut a = 1.0_f64;
    let mut b = ((1.0 - k) * (1.0 + k)).sqrt();
    let mut c = k;
    let mut weight = 0.5;
    let mut sum = weight * c * c;
    for _ in 0..64 {
        if c.abs() <= AGM_TOL * a {
            break;
        }
        let next_a = 0.5 * (a + b);
        let next_b = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = next_a;
        b = next_b;
        weight *= 2.0;
        sum += weight * c * c;
    }
    FRAC_PI_2 / a * (1.0 - sum)
}

/// Perimeter of an ellipse with the given semi-axes.
pub fn ellipse_perimeter(semi_a: f64, semi_b: f64) -> f64 {
    let (major, minor) = if semi_a >= semi_b {
        (semi_a, semi_b)
    } else {
        (semi_b, semi_a)
    };
    let e = (1.0 - (minor / major).powi(2)).max(0.0).sqrt();
    4.0 * major * elliptic_e(e)
}
