//! Melnikov's discrete capacity of equal-radius disk families and the
//! quadratic forms governing the small-radius ratio expansion.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::solver::BoundsResult;

/// Triangles with area below this fraction of the squared diameter count as collinear.
const COLLINEAR_EPS: f64 = 1e-14;

fn check_distinct(z: &[Point]) -> Result<()> {
    if z.is_empty() {
        return Err(Error::Config("at least one center is required".into()));
    }
    for j in 0..z.len() {
        for k in (j + 1)..z.len() {
            if z[j] == z[k] {
                return Err(Error::DuplicateCenter(j, k));
            }
        }
    }
    Ok(())
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius must be positive, got {r}")))
    }
}

/// `c_jk = 1/(z_j − z_k)` off the diagonal, zero on it.
pub fn cauchy_matrix(z: &[Point]) -> Result<DMatrix<Complex64>> {
    check_distinct(z)?;
    let n = z.len();
    Ok(DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            Complex64::new(0.0, 0.0)
        } else {
            (z[j] - z[k]).inv()
        }
    }))
}

/// `λ(Z, r) = ⟨(I/r + r·C·Cᴴ)⁻¹ 1, 1⟩`, evaluated as `r·⟨(I + r²·C·Cᴴ)⁻¹ 1, 1⟩`.
pub fn lambda_discrete(z: &[Point], r: f64) -> Result<f64> {
    check_radius(r)?;
    let c = cauchy_matrix(z)?;
    let n = z.len();
    let a = DMatrix::<Complex64>::identity(n, n) + &c * c.adjoint() * Complex64::new(r * r, 0.0);
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::Solve("discrete capacity matrix is not positive definite".into()))?;
    let ones = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let x = chol.solve(&ones);
    let value = ones.dotc(&x);
    if value.im.abs() > 1e-12 * value.re.abs().max(1.0) {
        return Err(Error::Solve(format!(
            "discrete capacity has imaginary part {:.3e}",
            value.im
        )));
    }
    Ok(r * value.re)
}

fn inverse_power_sum(z: &[Point], p: i32) -> f64 {
    let mut s = 0.0;
    for j in 0..z.len() {
        for k in 0..z.len() {
            if j != k {
                s += (z[j] - z[k]).norm().powi(-p);
            }
        }
    }
    s
}

/// `M(Z, r) = r⁴ Σ_k Σ_{j≠k} |z_k − z_j|⁻⁴`
pub fn melnikov_m(z: &[Point], r: f64) -> Result<f64> {
    check_distinct(z)?;
    Ok(r.powi(4) * inverse_power_sum(z, 4))
}

/// `N(Z, r) = r·(Σ_k Σ_{j≠k} |z_k − z_j|⁻²)^½·M(Z, r)^½`
pub fn melnikov_n(z: &[Point], r: f64) -> Result<f64> {
    let m = melnikov_m(z, r)?;
    Ok(r * inverse_power_sum(z, 2).sqrt() * m.sqrt())
}

/// `α = ⟨C·Cᴴ 1, 1⟩ = ‖Cᴴ 1‖²`
pub fn alpha(z: &[Point]) -> Result<f64> {
    let c = cauchy_matrix(z)?;
    let ones = DVector::from_element(z.len(), Complex64::new(1.0, 0.0));
    Ok((c.adjoint() * ones).norm_squared())
}

/// `β = ⟨(C·Cᴴ)² 1, 1⟩ = ‖C·Cᴴ 1‖²`
pub fn beta(z: &[Point]) -> Result<f64> {
    let c = cauchy_matrix(z)?;
    let ones = DVector::from_element(z.len(), Complex64::new(1.0, 0.0));
    Ok((&c * (c.adjoint() * ones)).norm_squared())
}

/// `α` through pair distances and circumradii of all triples (collinear triples add nothing).
pub fn alpha_geometric(z: &[Point]) -> Result<f64> {
    check_distinct(z)?;
    let n = z.len();
    let diam = (0..n)
        .flat_map(|j| (0..n).map(move |k| (j, k)))
        .map(|(j, k)| (z[j] - z[k]).norm())
        .fold(0.0, f64::max);
    let mut triples = 0.0;
    for j in 0..n {
        for k in (j + 1)..n {
            for l in (k + 1)..n {
                let (a, b, c) = (
                    (z[k] - z[l]).norm(),
                    (z[j] - z[l]).norm(),
                    (z[j] - z[k]).norm(),
                );
                let u = z[k] - z[j];
                let v = z[l] - z[j];
                let area = 0.5 * (u.re * v.im - u.im * v.re).abs();
                if area < COLLINEAR_EPS * diam * diam {
                    continue;
                }
                // 1/R = 4S/(abc)
                triples += (4.0 * area / (a * b * c)).powi(2);
            }
        }
    }
    Ok(inverse_power_sum(z, 2) + triples)
}

fn check_split(n: usize, m: usize) -> Result<()> {
    if n >= 2 && (1..n).contains(&m) {
        Ok(())
    } else {
        Err(Error::Split {
            m,
            max: n.saturating_sub(1),
        })
    }
}

/// `δ = α(Z) − α(Z′) − α(Z″)` for `Z′ = z[..m]`, `Z″ = z[m..]`.
pub fn delta(z: &[Point], m: usize) -> Result<f64> {
    check_split(z.len(), m)?;
    let d = alpha(z)? - alpha(&z[..m])? - alpha(&z[m..])?;
    debug_assert!(d > 0.0, "δ must be positive, got {d}");
    Ok(d)
}

/// `(n·r − r³α, n·r − r³α + r⁵β)`
pub fn lambda_poly_bounds(z: &[Point], r: f64) -> Result<(f64, f64)> {
    check_radius(r)?;
    let (a, b) = (alpha(z)?, beta(z)?);
    let base = z.len() as f64 * r - r.powi(3) * a;
    Ok((base, base + r.powi(5) * b))
}

/// Coefficient `C = δ/n` of the expansion `R(Z, r, m) = 1 − C·r² + O(r³)`.
pub fn predicted_slope(z: &[Point], m: usize) -> Result<f64> {
    Ok(delta(z, m)? / z.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    pub pass: bool,
    pub lambda: f64,
    /// `γ_lower/(1 + 4N)`, must not exceed λ.
    pub lower_side: f64,
    /// `(1 + 2M)·γ_upper`, must not be below λ.
    pub upper_side: f64,
    pub slack: f64,
}

/// Checks `γ/(1+4N) ≤ λ ≤ (1+2M)·γ` against a certified bracket for γ.
pub fn sandwich_check(z: &[Point], r: f64, gb: &BoundsResult) -> Result<SandwichReport> {
    check_radius(r)?;
    check_distinct(z)?;
    for j in 0..z.len() {
        for k in (j + 1)..z.len() {
            if (z[j] - z[k]).norm() <= 4.0 * r {
                return Err(Error::Precondition(format!(
                    "disks of radius 2r around centers {j} and {k} intersect"
                )));
            }
        }
    }
    let lambda = lambda_discrete(z, r)?;
    let lower_side = gb.lower / (1.0 + 4.0 * melnikov_n(z, r)?);
    let upper_side = (1.0 + 2.0 * melnikov_m(z, r)?) * gb.upper;
    let eps = gb.slack;
    Ok(SandwichReport {
        pass: lower_side <= lambda + eps && lambda <= upper_side + eps,
        lambda,
        lower_side,
        upper_side,
        slack: eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteReport {
    pub lambda: f64,
    #[serde(rename = "M")]
    pub m_value: f64,
    #[serde(rename = "N")]
    pub n_value: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: Option<f64>,
    pub poly_lower: f64,
    pub poly_upper: f64,
}

/// All discrete quantities for one configuration; `delta` only when a split is given.
pub fn discrete_report(z: &[Point], r: f64, m: Option<usize>) -> Result<DiscreteReport> {
    let (poly_lower, poly_upper) = lambda_poly_bounds(z, r)?;
    Ok(DiscreteReport {
        lambda: lambda_discrete(z, r)?,
        m_value: melnikov_m(z, r)?,
        n_value: melnikov_n(z, r)?,
        alpha: alpha(z)?,
        beta: beta(z)?,
        delta: m.map(|m| delta(z, m)).transpose()?,
        poly_lower,
        poly_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Point {
        Complex64::new(re, im)
    }

    fn equilateral(s: f64) -> Vec<Point> {
        (0..3)
            .map(|k| {
                Complex64::from_polar(s / 3f64.sqrt(), 2.0 * std::f64::consts::PI * k as f64 / 3.0)
            })
            .collect()
    }

    #[test]
    fn cauchy_examples() {
        assert_eq!(cauchy_matrix(&[c(1.0, 0.0)]).unwrap()[(0, 0)], c(0.0, 0.0));
        let m = cauchy_matrix(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(m[(0, 1)], c(0.5, 0.0));
        assert_eq!(m[(1, 0)], c(-0.5, 0.0));
        let z = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        let m = cauchy_matrix(&z).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                if j != k {
                    assert!((m[(j, k)] * (z[j] - z[k]) - 1.0).norm() < 1e-15);
                }
            }
        }
        assert!(matches!(
            cauchy_matrix(&[c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::DuplicateCenter(0, 1))
        ));
    }

    #[test]
    fn lambda_closed_forms() {
        assert!((lambda_discrete(&[c(0.3, 0.1)], 0.7).unwrap() - 0.7).abs() < 1e-15);
        for &(cc, r) in &[(2.0, 1.0), (2.0, 0.4), (5.0, 0.01)] {
            let l = lambda_discrete(&[c(cc, 0.0), c(-cc, 0.0)], r).unwrap();
            let closed = 2.0 * r / (1.0 + r * r / (4.0 * cc * cc));
            assert!((l - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_matches_sup_form() {
        // max |a1 + a2|² over Σ_k (|a_k|²/r + r·|Σ_{j≠k} a_j/(z_k − z_j)|²) ≤ 1, by grid search
        let z = [c(0.5, 0.2), c(-1.0, 0.7)];
        let r = 0.6;
        let d = z[0] - z[1];
        let mut best: f64 = 0.0;
        let steps = 400;
        for i in 0..=steps {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
            for k in 0..steps {
                let phi = std::f64::consts::TAU * k as f64 / steps as f64;
                let a1 = c(theta.cos(), 0.0);
                let a2 = Complex64::from_polar(theta.sin(), phi);
                let q = (a1.norm_sqr() + a2.norm_sqr()) / r
                    + r * ((a2 / d).norm_sqr() + (a1 / -d).norm_sqr());
                best = best.max((a1 + a2).norm_sqr() / q);
            }
        }
        let l = lambda_discrete(&z, r).unwrap();
        assert!(best <= l + 1e-12);
        assert!((best - l).abs() < 1e-4 * l);
    }

    #[test]
    fn melnikov_quantities() {
        assert_eq!(melnikov_m(&[c(0.0, 0.0)], 1.0).unwrap(), 0.0);
        assert_eq!(melnikov_n(&[c(0.0, 0.0)], 1.0).unwrap(), 0.0);
        let z = [c(2.0, 0.0), c(-2.0, 0.0)];
        let m = melnikov_m(&z, 1.0).unwrap();
        assert!((m - 1.0 / 128.0).abs() < 1e-16);
        let n = melnikov_n(&z, 1.0).unwrap();
        assert!((n - (2.0f64 / 16.0).sqrt() * (1.0f64 / 128.0).sqrt()).abs() < 1e-16);
        let s = 3.0;
        let zs: Vec<Point> = z.iter().map(|p| p * s).collect();
        assert!((melnikov_m(&zs, s).unwrap() - m).abs() < 1e-16);
    }

    #[test]
    fn alpha_examples() {
        let d = 1.7;
        let two = [c(0.0, 0.0), c(d, 0.0)];
        assert!((alpha(&two).unwrap() - 2.0 / (d * d)).abs() < 1e-15);
        let s = 1.3;
        let tri = equilateral(s);
        let a = alpha(&tri).unwrap();
        assert!((a - 9.0 / (s * s)).abs() < 1e-13);
        assert!((alpha_geometric(&tri).unwrap() - a).abs() < 1e-13);
        assert_eq!(alpha(&[c(1.0, 1.0)]).unwrap(), 0.0);
        assert_eq!(beta(&[c(1.0, 1.0)]).unwrap(), 0.0);
        let line = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        assert!((alpha_geometric(&line).unwrap() - 4.5).abs() < 1e-15);
        assert!((alpha(&line).unwrap() - 4.5).abs() < 1e-14);
        assert!((alpha_geometric(&two).unwrap() - 2.0 / (d * d)).abs() < 1e-15);
    }

    #[test]
    fn delta_examples() {
        let z = [c(2.0, 0.0), c(-2.0, 0.0)];
        assert!((delta(&z, 1).unwrap() - 0.125).abs() < 1e-16);
        assert!((delta(&z, 1).unwrap() - alpha(&z).unwrap()).abs() < 1e-16);
        let s = 2.0;
        let tri = equilateral(s);
        assert!((delta(&tri, 1).unwrap() - 7.0 / (s * s)).abs() < 1e-13);
        assert!(matches!(delta(&z, 0), Err(Error::Split { .. })));
        assert!(matches!(delta(&z, 2), Err(Error::Split { .. })));
        assert!((predicted_slope(&z, 1).unwrap() - 1.0 / 16.0).abs() < 1e-16);
        let zs: Vec<Point> = z.iter().map(|p| p * 3.0).collect();
        assert!(
            (predicted_slope(&zs, 1).unwrap() - predicted_slope(&z, 1).unwrap() / 9.0).abs()
                < 1e-16
        );
    }

    #[test]
    fn poly_bounds_examples() {
        assert_eq!(lambda_poly_bounds(&[c(0.0, 0.0)], 0.3).unwrap(), (0.3, 0.3));
        let z = [c(2.0, 0.0), c(-2.0, 0.0)];
        let (lo, hi) = lambda_poly_bounds(&z, 0.5).unwrap();
        let exact = 2.0 * 0.5 / (1.0 + 0.25 / 16.0);
        assert!(lo <= exact && exact <= hi);
    }

    #[test]
    fn b_matrix_identity() {
        // b_jk = Σ_{m≠j,k} r/((z_j − z_m)·conj(z_k − z_m)) equals (C·D_R·Cᴴ)_jk off the diagonal
        let z = [c(0.0, 0.0), c(1.5, 0.3), c(-0.7, 2.0), c(2.2, -1.1)];
        let r = 0.4;
        let cm = cauchy_matrix(&z).unwrap();
        let b = &cm * cm.adjoint() * Complex64::new(r, 0.0);
        for j in 0..4 {
            for k in 0..4 {
                let mut s = Complex64::new(0.0, 0.0);
                for m in 0..4 {
                    if m != j && m != k {
                        s += r / ((z[j] - z[m]) * (z[k] - z[m]).conj());
                    }
                }
                assert!((s - b[(j, k)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn report_serializes_symbols() {
        let z = [c(2.0, 0.0), c(-2.0, 0.0)];
        let rep = discrete_report(&z, 0.5, Some(1)).unwrap();
        assert_eq!(rep.delta, Some(0.125));
        let json = serde_json::to_value(rep).unwrap();
        assert!(json.get("M").is_some() && json.get("N").is_some());
    }
}
