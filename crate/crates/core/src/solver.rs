//! Upper and lower capacity bounds from the two dual quadratic programs.
//!
//! With `g = 1 + Σ x_j g_j` the upper bound is the minimum of
//! `(1/2π)∮|g|²|dz| = c0 + 2·Re(yᴴu) + yᴴHy` over `y = conj(x)`, which equals
//! `c0 − uᴴH⁻¹u`. With `h = Σ x_j g_j` the lower bound is the maximum of
//! `2·Re h′(∞) − (1/2π)∮|h|²|dz|`, which equals `dᴴH⁻¹d`.

use std::time::Instant;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::Serialize;

use crate::basis::{build_basis, BasisFunction, Schedule};
use crate::error::{Error, Result};
use crate::geometry::{validate_scene, Scene};
use crate::integrals::{assemble_gram, GramData, QuadratureSettings};

/// Relative residual above which a solve is treated as a factorization failure.
const MAX_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem {
    pub gram: GramData,
    /// Derivatives at infinity of the basis functions.
    pub d: DVector<Complex64>,
}

impl GramSystem {
    pub fn new(gram: GramData, basis: &[BasisFunction]) -> Result<Self> {
        if gram.len() != basis.len() {
            return Err(Error::Solve(format!(
                "gram has size {} but the basis has {} functions",
                gram.len(),
                basis.len()
            )));
        }
        let d = DVector::from_iterator(basis.len(), basis.iter().map(BasisFunction::d_infinity));
        Ok(GramSystem { gram, d })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundsResult {
    pub lower: f64,
    pub upper: f64,
    pub n_basis: usize,
    /// Largest relative residual of the two linear solves.
    pub solve_residual: f64,
    /// `10·abs_tol·n_basis`, the allowance for quadrature error.
    pub slack: f64,
    pub wall_time_s: f64,
}

impl BoundsResult {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Whether `value` lies in the bracket widened by the slack.
    pub fn contains(&self, value: f64) -> bool {
        self.lower - self.slack <= value && value <= self.upper + self.slack
    }
}

/// Cholesky factor of the diagonally equilibrated Gram matrix `D·H·D`.
struct Factored {
    chol: Cholesky<Complex64, Dyn>,
    equil: DVector<f64>,
    scaled: DMatrix<Complex64>,
}

impl Factored {
    fn new(h: &DMatrix<Complex64>) -> Result<Self> {
        let n = h.nrows();
        let singular = || Error::SingularGram { n };
        let mut equil = DVector::zeros(n);
        for j in 0..n {
            let diag = h[(j, j)].re;
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(singular());
            }
            equil[j] = 1.0 / diag.sqrt();
        }
        let scaled = DMatrix::from_fn(n, n, |j, k| h[(j, k)] * (equil[j] * equil[k]));
        let chol = Cholesky::new(scaled.clone()).ok_or_else(singular)?;
        Ok(Factored {
            chol,
            equil,
            scaled,
        })
    }

    /// `bᴴH⁻¹b` and the relative residual of the solve.
    fn quadratic_form(&self, b: &DVector<Complex64>) -> (f64, f64) {
        let rhs = DVector::from_fn(b.len(), |j, _| b[j] * self.equil[j]);
        let x = self.chol.solve(&rhs);
        let value = rhs.dotc(&x).re;
        let norm = rhs.norm();
        let residual = if norm > 0.0 {
            (&self.scaled * &x - &rhs).norm() / norm
        } else {
            0.0
        };
        (value, residual)
    }
}

fn bounds(sys: &GramSystem) -> Result<(f64, f64, f64)> {
    let f = Factored::new(&sys.gram.h)?;
    let (uq, r1) = f.quadratic_form(&sys.gram.u);
    let (dq, r2) = f.quadratic_form(&sys.d);
    let residual = r1.max(r2);
    // A factorization can succeed on a numerically singular matrix; the solve then
    // carries no information.
    if !(residual <= MAX_RESIDUAL) {
        return Err(Error::SingularGram { n: sys.d.len() });
    }
    Ok((dq, sys.gram.c0 - uq, residual))
}

/// Minimum of the boundary integral of `|1 + Σ x_j g_j|²/2π`.
pub fn upper_bound(sys: &GramSystem) -> Result<f64> {
    Ok(bounds(sys)?.1)
}

/// Maximum of `2·Re h′(∞) − ∮|h|²|dz|/2π` over the span.
pub fn lower_bound(sys: &GramSystem) -> Result<f64> {
    Ok(bounds(sys)?.0)
}

/// Both bounds for an explicit basis; the scene is assumed valid.
pub fn bounds_for_basis(
    scene: &Scene,
    basis: &[BasisFunction],
    settings: &QuadratureSettings,
) -> Result<BoundsResult> {
    let start = Instant::now();
    let gram = assemble_gram(scene, basis, settings)?;
    let sys = GramSystem::new(gram, basis)?;
    let (lower, upper, solve_residual) = bounds(&sys)?;
    let slack = 10.0 * settings.abs_tol * basis.len() as f64;
    if lower > upper + slack {
        return Err(Error::BracketInverted {
            lower,
            upper,
            slack,
        });
    }
    Ok(BoundsResult {
        lower,
        upper,
        n_basis: basis.len(),
        solve_residual,
        slack,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Validates the scene, builds the basis and returns the certified bracket.
pub fn gamma_bounds(
    scene: &Scene,
    schedule: &Schedule,
    settings: &QuadratureSettings,
) -> Result<BoundsResult> {
    let start = Instant::now();
    validate_scene(scene)?;
    let basis = build_basis(scene, schedule)?;
    let mut result = bounds_for_basis(scene, &basis, settings)?;
    result.wall_time_s = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Bounds for each schedule of a ladder of growing bases.
pub fn refine(
    scene: &Scene,
    ladder: &[Schedule],
    settings: &QuadratureSettings,
) -> Result<Vec<BoundsResult>> {
    ladder
        .iter()
        .map(|s| gamma_bounds(scene, s, settings))
        .collect()
}

/// The largest schedule reachable by [`Schedule::coarser`] steps whose Gram matrix factors.
pub fn largest_usable(
    scene: &Scene,
    schedule: &Schedule,
    settings: &QuadratureSettings,
) -> Option<(Schedule, BoundsResult)> {
    let mut current = schedule.coarser();
    while let Some(s) = current {
        match gamma_bounds(scene, &s, settings) {
            Ok(r) => return Some((s, r)),
            Err(Error::SingularGram { .. }) | Err(Error::BracketInverted { .. }) => {
                current = s.coarser()
            }
            Err(_) => return None,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{square, Point, Shape};

    fn c(re: f64, im: f64) -> Point {
        Complex64::new(re, im)
    }

    /// Optimum of the real 2n×2n form `c0 + 2gᵀx + xᵀAx` with A built from H.
    fn real_upper(g: &GramData) -> f64 {
        let n = g.len();
        let a = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let h = g.h[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => h.re,
                (true, false) => -h.im,
                (false, true) => h.im,
            }
        });
        let b = DVector::from_fn(2 * n, |i, _| if i < n { g.u[i].re } else { g.u[i - n].im });
        let x = a.clone().cholesky().unwrap().solve(&(-&b));
        g.c0 + 2.0 * b.dot(&x) + x.dot(&(&a * &x))
    }

    #[test]
    fn unit_disk() {
        let scene = Scene::disks(&[c(0.0, 0.0)], 1.0);
        let r = gamma_bounds(&scene, &Schedule::rings(0), &QuadratureSettings::default()).unwrap();
        assert_eq!((r.lower, r.upper), (1.0, 1.0));
    }

    #[test]
    fn two_disks_row_one() {
        let scene = Scene::disks(&[c(2.0, 0.0), c(-2.0, 0.0)], 1.0);
        let r = gamma_bounds(&scene, &Schedule::rings(0), &QuadratureSettings::default()).unwrap();
        assert!((r.lower - 1.875).abs() < 1e-14);
        assert!((r.upper - 241.0 / 128.0).abs() < 1e-14);
        assert_eq!(r.n_basis, 2);
    }

    #[test]
    fn real_formulation_agrees() {
        let scene = Scene::new(vec![
            square(1.0),
            Shape::Disk {
                center: c(3.0, 1.0),
                radius: 0.5,
            },
        ]);
        let schedule = Schedule {
            default: crate::basis::BasisMode::Powers {
                n: 3,
                corners: true,
            },
            overrides: [(1, crate::basis::BasisMode::Rings { layers: 1 })]
                .into_iter()
                .collect(),
        };
        let basis = build_basis(&scene, &schedule).unwrap();
        let gram = assemble_gram(&scene, &basis, &QuadratureSettings::default()).unwrap();
        let sys = GramSystem::new(gram.clone(), &basis).unwrap();
        let upper = upper_bound(&sys).unwrap();
        assert!((upper - real_upper(&gram)).abs() < 1e-12);
    }

    #[test]
    fn square_monomials_n2() {
        let scene = Scene::new(vec![square(1.0)]);
        let r = gamma_bounds(
            &scene,
            &Schedule::powers(2, false),
            &QuadratureSettings::default(),
        )
        .unwrap();
        assert!((r.lower - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
        assert!((r.upper - 0.900_316_316_157_106).abs() < 1e-8);
    }
}
