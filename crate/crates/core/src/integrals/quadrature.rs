//! Recursive adaptive Simpson quadrature along boundary arcs.
//!
//! Integrands are vector valued so that every Gram entry touching an arc is
//! computed from one shared set of samples. A panel is accepted once every
//! component passes the Simpson test in both real and imaginary parts.
//!
//! Arcs ending at a corner are integrated after the substitution `t = φ(s)`
//! with `φ′` vanishing to second order at that endpoint, which turns the
//! `|t|^(2β)` endpoint behaviour of corner-adapted functions into a smooth
//! integrand.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ArcPoint, ParametricArc};

/// Number of equal panels the parameter interval is split into before refinement.
const INITIAL_PANELS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings {
            abs_tol: 1e-9,
            max_depth: 50,
        }
    }
}

impl QuadratureSettings {
    pub fn new(abs_tol: f64, max_depth: u32) -> Result<Self> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() {
            return Err(Error::Config(format!(
                "quadrature tolerance must be positive, got {abs_tol}"
            )));
        }
        Ok(QuadratureSettings { abs_tol, max_depth })
    }
}

type Cvec = Vec<Complex64>;

struct Simpson<'a, F> {
    f: &'a F,
    dim: usize,
    max_depth: u32,
}

impl<F: Fn(f64, &mut [Complex64]) + Sync> Simpson<'_, F> {
    fn eval(&self, t: f64) -> Cvec {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        (self.f)(t, &mut out);
        out
    }

    fn rule(h: f64, fa: &[Complex64], fm: &[Complex64], fb: &[Complex64]) -> Cvec {
        fa.iter()
            .zip(fm)
            .zip(fb)
            .map(|((a, m), b)| (a + m * 4.0 + b) * (h / 6.0))
            .collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        a: f64,
        b: f64,
        fa: &[Complex64],
        fm: &[Complex64],
        fb: &[Complex64],
        whole: &[Complex64],
        tol: f64,
        depth: u32,
        acc: &mut [Complex64],
    ) -> Result<()> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let left = Self::rule(m - a, fa, &flm, fm);
        let right = Self::rule(b - m, fm, &frm, fb);
        let mut err = 0.0_f64;
        for ((l, r), w) in left.iter().zip(&right).zip(whole) {
            let d = l + r - w;
            err = err.max(d.re.abs()).max(d.im.abs());
        }
        if err <= 15.0 * tol {
            for (((s, l), r), w) in acc.iter_mut().zip(&left).zip(&right).zip(whole) {
                let two = l + r;
                *s += two + (two - w) / 15.0;
            }
            return Ok(());
        }
        if depth >= self.max_depth || !err.is_finite() {
            return Err(Error::MaxDepth { tol, depth, at: m });
        }
        self.refine(a, m, fa, &flm, fm, &left, 0.5 * tol, depth + 1, acc)?;
        self.refine(m, b, fm, &frm, fb, &right, 0.5 * tol, depth + 1, acc)
    }

    fn panel(&self, a: f64, b: f64, tol: f64) -> Result<Cvec> {
        let fa = self.eval(a);
        let fm = self.eval(0.5 * (a + b));
        let fb = self.eval(b);
        let whole = Self::rule(b - a, &fa, &fm, &fb);
        let mut acc = vec![Complex64::new(0.0, 0.0); self.dim];
        self.refine(a, b, &fa, &fm, &fb, &whole, tol, 1, &mut acc)?;
        Ok(acc)
    }
}

/// `∫₀¹ f(s) ds` for a vector-valued `f` writing `dim` components, to absolute
/// tolerance `settings.abs_tol` per component.
pub fn adaptive_simpson<F>(f: &F, dim: usize, settings: &QuadratureSettings) -> Result<Cvec>
where
    F: Fn(f64, &mut [Complex64]) + Sync,
{
    let s = Simpson {
        f,
        dim,
        max_depth: settings.max_depth,
    };
    let width = 1.0 / INITIAL_PANELS as f64;
    let panels: Vec<Result<Cvec>> = (0..INITIAL_PANELS)
        .into_par_iter()
        .map(|i| {
            let a = i as f64 * width;
            let b = if i + 1 == INITIAL_PANELS {
                1.0
            } else {
                a + width
            };
            s.panel(a, b, settings.abs_tol * width)
        })
        .collect();
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    for panel in panels {
        for (t, p) in total.iter_mut().zip(panel?) {
            *t += p;
        }
    }
    Ok(total)
}

/// Parameter change `t = φ(s)` grading towards singular endpoints, returned
/// as `(t, 1 − t, φ′(s))` with `1 − t` computed directly.
fn grading(arc: &ParametricArc) -> fn(f64) -> (f64, f64, f64) {
    fn smoothstep(s: f64) -> f64 {
        s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
    match (arc.singular_start, arc.singular_end) {
        (false, false) => |s| (s, 1.0 - s, 1.0),
        (true, false) => |s| {
            let t = s * s * s;
            (t, 1.0 - t, 3.0 * s * s)
        },
        (false, true) => |s| {
            let r = 1.0 - s;
            let rt = r * r * r;
            (1.0 - rt, rt, 3.0 * r * r)
        },
        (true, true) => |s| {
            let r = 1.0 - s;
            let dt = 30.0 * s * s * r * r;
            if s <= 0.5 {
                let t = smoothstep(s);
                (t, 1.0 - t, dt)
            } else {
                let rt = smoothstep(r);
                (1.0 - rt, rt, dt)
            }
        },
    }
}

/// `∫_arc f(z) |dz|` for a vector-valued `f(point, out)`.
///
/// Flagged endpoints are never evaluated: the graded weight vanishes there.
pub fn quad_arc_points<F>(
    f: &F,
    dim: usize,
    arc: &ParametricArc,
    settings: &QuadratureSettings,
) -> Result<Cvec>
where
    F: Fn(&ArcPoint, &mut [Complex64]) + Sync,
{
    let phi = grading(arc);
    let integrand = |s: f64, out: &mut [Complex64]| {
        let (t, r, dt) = phi(s);
        if dt == 0.0 {
            out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
            return;
        }
        f(&arc.arc_point(t, r), out);
        let w = arc.derivative(t).norm() * dt;
        out.iter_mut().for_each(|o| *o *= w);
    };
    adaptive_simpson(&integrand, dim, settings)
}

/// `∫₀¹ f(t)·|z′(t)| dt` for a scalar integrand given in the arc parameter.
pub fn quad_arc<F>(f: F, arc: &ParametricArc, settings: &QuadratureSettings) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let phi = grading(arc);
    let integrand = |s: f64, out: &mut [Complex64]| {
        let (t, _, dt) = phi(s);
        out[0] = if dt == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            f(t) * (arc.derivative(t).norm() * dt)
        };
    };
    Ok(adaptive_simpson(&integrand, 1, settings)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{arcs, square, Shape};
    use std::f64::consts::{PI, TAU};

    fn one(_: f64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn unit_circle_perimeter() {
        let arc = arcs(&Shape::Disk {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0,
        })[0];
        let s = QuadratureSettings::default();
        assert!((quad_arc(one, &arc, &s).unwrap() - TAU).norm() < 1e-9);
        let modulus = quad_arc(|t| Complex64::new(arc.point(t).norm_sqr(), 0.0), &arc, &s).unwrap();
        assert!((modulus - TAU).norm() < 1e-9);
    }

    #[test]
    fn ellipse_perimeter() {
        let arc = arcs(&Shape::Ellipse {
            center: Complex64::new(0.0, 0.0),
            semi_major: 2.0,
            semi_minor: 1.0,
            rotation: 0.0,
        })[0];
        let value = quad_arc(one, &arc, &QuadratureSettings::default()).unwrap();
        assert!((value.re - 9.688_448_220_547_675).abs() < 1e-9);
    }

    #[test]
    fn square_perimeter_with_graded_endpoints() {
        let s = QuadratureSettings::default();
        let total: f64 = arcs(&square(1.0))
            .iter()
            .map(|a| quad_arc(one, a, &s).unwrap().re)
            .sum();
        assert!((total - 4.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ t^(−1/3) dt = 3/2 along a unit segment flagged singular at its start
        let arc = ParametricArc {
            curve: crate::geometry::Curve::Segment {
                start: Complex64::new(0.0, 0.0),
                end: Complex64::new(1.0, 0.0),
            },
            singular_start: true,
            singular_end: true,
        };
        let value = quad_arc(
            |t| Complex64::new(t.powf(-1.0 / 3.0), 0.0),
            &arc,
            &QuadratureSettings::default(),
        )
        .unwrap();
        assert!((value.re - 1.5).abs() < 1e-9);
    }

    #[test]
    fn vector_components_converge_together() {
        let f = |s: f64, out: &mut [Complex64]| {
            out[0] = Complex64::new((PI * s).sin(), 0.0);
            out[1] = Complex64::new(0.0, s * s);
        };
        let v = adaptive_simpson(&f, 2, &QuadratureSettings::default()).unwrap();
        assert!((v[0].re - 2.0 / PI).abs() < 1e-10);
        assert!((v[1].im - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn max_depth_is_reported() {
        let f = |s: f64, out: &mut [Complex64]| {
            out[0] = Complex64::new((s - 0.3).abs().powf(-0.9), 0.0)
        };
        let s = QuadratureSettings {
            abs_tol: 1e-12,
            max_depth: 8,
        };
        assert!(matches!(
            adaptive_simpson(&f, 1, &s),
            Err(Error::MaxDepth { .. })
        ));
    }
}
