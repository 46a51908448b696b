//! Closed-form capacities and the Jacobi theta functions behind them.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::elliptic_k_complement;

/// Γ(1/4) to 20 significant digits.
pub const GAMMA_QUARTER: f64 = 3.625_609_908_221_908;

/// Above this nome the theta series are evaluated through the modular transformation.
const MODULAR_SWITCH: f64 = 0.99;
const SERIES_EPS: f64 = 1e-16;

fn check_nome(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("nome must lie in (0, 1), got {q}")))
    }
}

/// `Σ_{n≥0} sign^n·q^((n+shift)²)`, stopped once a term drops below `SERIES_EPS` of the sum.
fn theta_tail(q: f64, shift: f64, alternate: bool) -> f64 {
    let lq = q.ln();
    let mut sum = 0.0;
    for n in 0.. {
        let e = n as f64 + shift;
        // q may underflow to 0 on the modular route; q^0 is still 1
        let term = if e == 0.0 { 1.0 } else { (e * e * lq).exp() };
        sum += if alternate && n % 2 == 1 { -term } else { term };
        if term < SERIES_EPS * sum.abs() || term == 0.0 {
            break;
        }
    }
    sum
}

fn theta2_series(q: f64) -> f64 {
    2.0 * theta_tail(q, 0.5, false)
}

fn theta3_series(q: f64) -> f64 {
    2.0 * theta_tail(q, 0.0, false) - 1.0
}

fn theta4_series(q: f64) -> f64 {
    2.0 * theta_tail(q, 0.0, true) - 1.0
}

/// `x` with `q = e^(−π/x)`, and the dual nome `e^(−πx)`.
fn modular(q: f64) -> (f64, f64) {
    let x = -PI / q.ln();
    (x, (-PI * x).exp())
}

/// `ϑ₂(q) = Σ_{n∈ℤ} q^((n+½)²)`
pub fn theta2(q: f64) -> Result<f64> {
    check_nome(q)?;
    if q > MODULAR_SWITCH {
        let (x, p) = modular(q);
        return Ok(x.sqrt() * theta4_series(p));
    }
    Ok(theta2_series(q))
}

/// `ϑ₃(q) = Σ_{n∈ℤ} q^(n²)`
pub fn theta3(q: f64) -> Result<f64> {
    check_nome(q)?;
    if q > MODULAR_SWITCH {
        let (x, p) = modular(q);
        return Ok(x.sqrt() * theta3_series(p));
    }
    Ok(theta3_series(q))
}

/// `ϑ₄(q) = Σ_{n∈ℤ} (−1)^n q^(n²)`
pub fn theta4(q: f64) -> Result<f64> {
    check_nome(q)?;
    if q > MODULAR_SWITCH {
        let (x, p) = modular(q);
        return Ok(x.sqrt() * theta2_series(p));
    }
    Ok(theta4_series(q))
}

/// `Π_{n≥1} f(n)` until the factors are within rounding of one.
fn product(q: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut acc = 1.0;
    let mut n = 1.0;
    while q.powf(2.0 * n - 1.0) > 1e-18 {
        acc *= f(n);
        n += 1.0;
    }
    acc
}

/// Jacobi triple-product forms of ϑ₂, ϑ₃, ϑ₄.
pub fn theta_products(q: f64) -> Result<(f64, f64, f64)> {
    check_nome(q)?;
    let t2 = 2.0
        * q.powf(0.25)
        * product(q, |n| {
            (1.0 - q.powf(2.0 * n)) * (1.0 + q.powf(2.0 * n)).powi(2)
        });
    let t3 = product(q, |n| {
        (1.0 - q.powf(2.0 * n)) * (1.0 + q.powf(2.0 * n - 1.0)).powi(2)
    });
    let t4 = product(q, |n| {
        (1.0 - q.powf(2.0 * n)) * (1.0 - q.powf(2.0 * n - 1.0)).powi(2)
    });
    Ok((t2, t3, t4))
}

fn check_disks(c: f64, r: f64) -> Result<()> {
    if r > 0.0 && c > r && c.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "need 0 < r < c, got c = {c}, r = {r}"
        )))
    }
}

/// Nome `q ∈ (0,1)` with `(q^(−½) + q^(½))/2 = c/r`.
///
/// Evaluated as `1/(ρ + √(ρ²−1))²`, `ρ = c/r`, which avoids the cancellation
/// of [`nome_closed_form`] for small `r/c`.
pub fn nome_from_geometry(c: f64, r: f64) -> Result<f64> {
    check_disks(c, r)?;
    let rho = c / r;
    let t = rho + ((rho - 1.0) * (rho + 1.0)).sqrt();
    Ok(1.0 / (t * t))
}

/// `(2c² − r² − 2c√(c²−r²))/r²`, the textbook form of [`nome_from_geometry`].
pub fn nome_closed_form(c: f64, r: f64) -> Result<f64> {
    check_disks(c, r)?;
    Ok((2.0 * c * c - r * r - 2.0 * c * (c * c - r * r).sqrt()) / (r * r))
}

/// Capacity of the union of the closed disks of radius `r` centered at `±c`.
pub fn two_disk_capacity(c: f64, r: f64) -> Result<f64> {
    let q = nome_from_geometry(c, r)?;
    Ok(((c - r) * (c + r)).sqrt() * theta2(q)?.powi(2))
}

/// The same capacity through complete elliptic integrals:
/// `(2/π)·c·k·F(k)·tanh((π/2)·F(k′)/F(k))` with `k = ϑ₂²/ϑ₃²`.
pub fn murai_capacity(c: f64, r: f64) -> Result<f64> {
    let q = nome_from_geometry(c, r)?;
    let t3 = theta3(q)?.powi(2);
    let k = theta2(q)?.powi(2) / t3;
    // k′ = √(1−k²) = ϑ₄²/ϑ₃² without cancellation near k = 1
    let kp = theta4(q)?.powi(2) / t3;
    let (fk, fkp) = (elliptic_k_complement(kp), elliptic_k_complement(k));
    Ok(2.0 / PI * c * k * fk * (0.5 * PI * fkp / fk).tanh())
}

/// Capacity of the square with corners `±s, ±is`.
pub fn square_capacity(s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Domain(format!(
            "half-diagonal must be positive, got {s}"
        )));
    }
    Ok(s * 2f64.sqrt() * GAMMA_QUARTER * GAMMA_QUARTER / (4.0 * PI.powf(1.5)))
}

/// Two-disk subadditivity ratio as a function of the nome, product form
/// `(1−q)·Π(1−q^(4n))²(1+q^(2n))²`.
pub fn ratio_f(q: f64) -> Result<f64> {
    check_nome(q)?;
    Ok((1.0 - q)
        * product(q, |n| {
            ((1.0 - q.powf(4.0 * n)) * (1.0 + q.powf(2.0 * n))).powi(2)
        }))
}

/// Series form `(1/4)(q^(−½) − q^(½))·ϑ₂(q)²` of [`ratio_f`].
pub fn ratio_f_series(q: f64) -> Result<f64> {
    let t2 = theta2(q)?;
    Ok(0.25 * (1.0 / q.sqrt() - q.sqrt()) * t2 * t2)
}

/// Partial sum of the logarithmic derivative `u(q) = q·f′(q)/f(q)` with rigorous tail bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDerivative {
    pub partial: f64,
    /// `lower ≤ u(q) ≤ upper`
    pub lower: f64,
    pub upper: f64,
}

/// `u(q) = −q/(1−q) − Σ 8n·q^(4n)/(1−q^(4n)) + Σ 4n·q^(2n)/(1+q^(2n))`, summed to `terms`.
pub fn log_deriv_u(q: f64, terms: usize) -> Result<LogDerivative> {
    check_nome(q)?;
    if terms == 0 {
        return Err(Error::Domain("need at least one term".into()));
    }
    let mut partial = -q / (1.0 - q);
    for n in 1..=terms {
        let nf = n as f64;
        let (q2, q4) = (q.powf(2.0 * nf), q.powf(4.0 * nf));
        partial += -8.0 * nf * q4 / (1.0 - q4) + 4.0 * nf * q2 / (1.0 + q2);
    }
    // Σ_{n≥k} n·x^n = x^k·(k − (k−1)x)/(1−x)²
    let k = (terms + 1) as f64;
    let moment = |x: f64| x.powf(k) * (k - (k - 1.0) * x) / ((1.0 - x) * (1.0 - x));
    let (x2, x4) = (q * q, q.powi(4));
    // each neglected negative term lies in [−8n·x4^n/(1−x4^k), −8n·x4^n],
    // each positive one in [0, 4n·x2^n]
    let upper = partial - 8.0 * moment(x4) + 4.0 * moment(x2);
    let lower = partial - 8.0 * moment(x4) / (1.0 - x4.powf(k));
    Ok(LogDerivative {
        partial,
        lower,
        upper,
    })
}
