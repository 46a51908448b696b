//! Exact circle integrals of rational basis products via residues.
//!
//! On `|z − c| = r` write `z = c + r·w`. Then `|dz| = r·dw/(i·w)` and
//! `conj(z − p) = r·(1/w − conj(w_p))`, which turns `g₁·conj(g₂)·|dz|` into a
//! rational function of `w` integrated over the unit circle.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::basis::BasisFunction;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Poles closer than this (relative) to the unit circle are rejected.
const CONTOUR_TOL: f64 = 1e-12;
/// Factor points closer than this are merged into one higher-order point.
const MERGE_TOL: f64 = 1e-12;

/// `Π (w − p_j)^(−e_j)`; negative exponents are zeros.
struct Rational {
    factors: Vec<(Complex64, i32)>,
}

impl Rational {
    fn new() -> Self {
        Rational {
            factors: Vec::new(),
        }
    }

    fn push(&mut self, point: Complex64, exponent: i32) {
        if exponent == 0 {
            return;
        }
        if let Some(f) = self
            .factors
            .iter_mut()
            .find(|f| (f.0 - point).norm() <= MERGE_TOL)
        {
            f.1 += exponent;
        } else {
            self.factors.push((point, exponent));
        }
    }

    /// Sum of residues at the poles inside the open unit disk.
    fn residues_inside(&self) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (i, &(p, e)) in self.factors.iter().enumerate() {
            if e <= 0 || p.norm() >= 1.0 {
                continue;
            }
            total += self.residue_at(i, p, e as usize);
        }
        total
    }

    /// Coefficient of `t^(e−1)` in `Π_{j≠i} (p − p_j + t)^(−e_j)`.
    fn residue_at(&self, i: usize, p: Complex64, e: usize) -> Complex64 {
        let mut series = vec![Complex64::new(0.0, 0.0); e];
        series[0] = Complex64::new(1.0, 0.0);
        for (j, &(q, ej)) in self.factors.iter().enumerate() {
            if j == i {
                continue;
            }
            let d = p - q;
            // (d + t)^(−ej) = d^(−ej) · Σ binom(−ej, n) (t/d)^n
            let mut factor = vec![Complex64::new(0.0, 0.0); e];
            let lead = d.powi(-ej);
            let mut coeff = 1.0;
            let mut dpow = Complex64::new(1.0, 0.0);
            for (n, slot) in factor.iter_mut().enumerate() {
                *slot = lead * coeff * dpow;
                coeff *= (-(ej as f64) - n as f64) / (n as f64 + 1.0);
                dpow /= d;
            }
            let mut product = vec![Complex64::new(0.0, 0.0); e];
            for a in 0..e {
                for b in 0..(e - a) {
                    product[a + b] += series[a] * factor[b];
                }
            }
            series = product;
        }
        series[e - 1]
    }
}

fn rational_pole(b: &BasisFunction) -> Result<(Point, u32)> {
    b.rational_pole().ok_or(Error::NonRationalBasis)
}

fn unit_point(p: Point, center: Point, radius: f64) -> Result<Complex64> {
    let w = (p - center) / radius;
    if (w.norm() - 1.0).abs() <= CONTOUR_TOL {
        return Err(Error::PoleOnContour(p));
    }
    Ok(w)
}

/// `∮_{|z−c|=r} b1(z)·conj(b2(z)) |dz|` for rational `b1`, `b2`.
pub fn circle_pair_integral(
    b1: &BasisFunction,
    b2: &BasisFunction,
    center: Point,
    radius: f64,
) -> Result<Complex64> {
    let (p1, k1) = rational_pole(b1)?;
    let (p2, k2) = rational_pole(b2)?;
    let w1 = unit_point(p1, center, radius)?;
    let w2 = unit_point(p2, center, radius)?;
    let (k1, k2) = (k1 as i32, k2 as i32);

    // (w − w1)^(−k1) · w^(k2−1) · (1 − conj(w2)·w)^(−k2)
    let mut f = Rational::new();
    f.push(w1, k1);
    f.push(Complex64::new(0.0, 0.0), 1 - k2);
    let mut scale = Complex64::new(radius.powi(1 - k1 - k2), 0.0);
    if w2 != Complex64::new(0.0, 0.0) {
        // 1 − conj(w2)·w = −conj(w2)·(w − 1/conj(w2))
        f.push(w2.conj().inv(), k2);
        scale *= (-w2.conj()).powi(-k2);
    }
    Ok(scale * TAU * f.residues_inside())
}

/// `∮_{|z−c|=r} b(z) |dz|` for rational `b`.
pub fn circle_mean_integral(b: &BasisFunction, center: Point, radius: f64) -> Result<Complex64> {
    let (p, k) = rational_pole(b)?;
    let w = unit_point(p, center, radius)?;
    let k = k as i32;
    let mut f = Rational::new();
    f.push(w, k);
    f.push(Complex64::new(0.0, 0.0), 1);
    Ok(radius.powi(1 - k) * TAU * f.residues_inside())
}
