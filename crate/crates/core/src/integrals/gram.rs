use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use super::quadrature::{quad_arc_points, QuadratureSettings};
use super::residue::{circle_mean_integral, circle_pair_integral};
use crate::basis::BasisFunction;
use crate::error::{Error, Result};
use crate::geometry::{arcs, ArcPoint, ParametricArc, Scene, Shape};

/// Samples per arc used to pick the normalization of each basis function.
const SCALE_SAMPLES: usize = 64;

/// Coefficients of the boundary quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct GramData {
    /// `H_jk = (1/2π) ∮ g_j·conj(g_k) |dz|`
    pub h: DMatrix<Complex64>,
    /// `u_j = (1/2π) ∮ g_j |dz|`
    pub u: DVector<Complex64>,
    /// Boundary length over 2π.
    pub c0: f64,
}

impl GramData {
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

/// Closed-form perimeter of one shape.
pub fn perimeter(shape: &Shape) -> f64 {
    arcs(shape).iter().map(ParametricArc::length).sum()
}

/// Which entries one boundary piece contributes by quadrature.
struct QuadTask<'a> {
    arc: ParametricArc,
    pairs: &'a [(usize, usize)],
    means: &'a [usize],
}

struct Contribution {
    pairs: Vec<Complex64>,
    means: Vec<Complex64>,
}

/// Per-function factors bringing the boundary maximum of each `|g_j|` to about one,
/// so the absolute quadrature tolerance is meaningful for every entry.
fn normalization(scene: &Scene, basis: &[BasisFunction]) -> Vec<f64> {
    let samples: Vec<_> = scene
        .shapes
        .iter()
        .flat_map(arcs)
        .flat_map(|arc| {
            (0..SCALE_SAMPLES).map(move |i| arc.point((i as f64 + 0.5) / SCALE_SAMPLES as f64))
        })
        .collect();
    basis
        .iter()
        .map(|b| {
            let max = samples
                .iter()
                .map(|&z| b.value(z).norm())
                .fold(0.0, f64::max);
            if max > 0.0 && max.is_finite() {
                1.0 / max
            } else {
                1.0
            }
        })
        .collect()
}

fn integrate_task(
    task: &QuadTask,
    basis: &[BasisFunction],
    scale: &[f64],
    settings: &QuadratureSettings,
) -> Result<Contribution> {
    let (np, nm) = (task.pairs.len(), task.means.len());
    if np + nm == 0 {
        return Ok(Contribution {
            pairs: vec![],
            means: vec![],
        });
    }
    let f = |p: &ArcPoint, out: &mut [Complex64]| {
        let values: Vec<Complex64> = basis
            .iter()
            .zip(scale)
            .map(|(b, s)| b.value_at(p) * *s)
            .collect();
        for (o, &(j, k)) in out.iter_mut().zip(task.pairs) {
            *o = values[j] * values[k].conj();
        }
        for (o, &j) in out[np..].iter_mut().zip(task.means) {
            *o = values[j];
        }
    };
    let mut v = quad_arc_points(&f, np + nm, &task.arc, settings)?;
    let means = v.split_off(np);
    Ok(Contribution {
        pairs: v
            .iter()
            .zip(task.pairs)
            .map(|(x, &(j, k))| x / (scale[j] * scale[k]))
            .collect(),
        means: means
            .iter()
            .zip(task.means)
            .map(|(x, &j)| x / scale[j])
            .collect(),
    })
}

/// Gram data of `basis` over the whole scene boundary.
///
/// Disk boundaries use residues for pairs of rational functions; every other
/// entry is integrated by adaptive quadrature. Contributions are summed in
/// shape order, so results do not depend on the number of worker threads.
pub fn assemble_gram(
    scene: &Scene,
    basis: &[BasisFunction],
    settings: &QuadratureSettings,
) -> Result<GramData> {
    if scene.shapes.is_empty() {
        return Err(Error::EmptyScene);
    }
    let n = basis.len();
    let scale = normalization(scene, basis);
    let all_pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (j..n).map(move |k| (j, k))).collect();
    let all_means: Vec<usize> = (0..n).collect();
    let rational: Vec<bool> = basis.iter().map(BasisFunction::is_rational).collect();
    let mixed_pairs: Vec<(usize, usize)> = all_pairs
        .iter()
        .copied()
        .filter(|&(j, k)| !(rational[j] && rational[k]))
        .collect();
    let mixed_means: Vec<usize> = (0..n).filter(|&j| !rational[j]).collect();

    let mut h = DMatrix::<Complex64>::zeros(n, n);
    let mut u = DVector::<Complex64>::zeros(n);
    let mut length = 0.0;

    for shape in &scene.shapes {
        length += perimeter(shape);
        let tasks: Vec<QuadTask> = match *shape {
            Shape::Disk { center, radius } => {
                let rows: Vec<Result<Vec<Complex64>>> = (0..n)
                    .into_par_iter()
                    .map(|j| {
                        (j..n)
                            .map(|k| {
                                if rational[j] && rational[k] {
                                    circle_pair_integral(&basis[j], &basis[k], center, radius)
                                } else {
                                    Ok(Complex64::new(0.0, 0.0))
                                }
                            })
                            .collect()
                    })
                    .collect();
                for (j, row) in rows.into_iter().enumerate() {
                    for (offset, v) in row?.into_iter().enumerate() {
                        h[(j, j + offset)] += v;
                    }
                    if rational[j] {
                        u[j] += circle_mean_integral(&basis[j], center, radius)?;
                    }
                }
                arcs(shape)
                    .into_iter()
                    .map(|arc| QuadTask {
                        arc,
                        pairs: &mixed_pairs,
                        means: &mixed_means,
                    })
                    .collect()
            }
            _ => arcs(shape)
                .into_iter()
                .map(|arc| QuadTask {
                    arc,
                    pairs: &all_pairs,
                    means: &all_means,
                })
                .collect(),
        };
        let parts: Vec<Result<Contribution>> = tasks
            .par_iter()
            .map(|t| integrate_task(t, basis, &scale, settings))
            .collect();
        for (task, part) in tasks.iter().zip(parts) {
            let part = part?;
            for (&(j, k), v) in task.pairs.iter().zip(&part.pairs) {
                h[(j, k)] += v;
            }
            for (&j, v) in task.means.iter().zip(&part.means) {
                u[j] += v;
            }
        }
    }

    h /= Complex64::new(TAU, 0.0);
    u /= Complex64::new(TAU, 0.0);
    for j in 0..n {
        h[(j, j)].im = 0.0;
        for k in (j + 1)..n {
            h[(k, j)] = h[(j, k)].conj();
        }
    }
    Ok(GramData {
        h,
        u,
        c0: length / TAU,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, Schedule};
    use crate::geometry::{square, Point};

    fn c(re: f64, im: f64) -> Point {
        Complex64::new(re, im)
    }

    #[test]
    fn corner_functions_far_from_origin() {
        // corners at |a| ≈ 10 used to stall the quadrature through cancellation in z − a
        let a = Complex64::from_polar(2.5, 1.1);
        let b = c(-4.0, 7.0);
        let scene = Scene::new(vec![square(1.0)]);
        let basis = build_basis(&scene, &Schedule::powers(3, true)).unwrap();
        let mapped: Vec<BasisFunction> = basis.iter().map(|f| f.transformed(a, b)).collect();
        let image = crate::geometry::transform(&scene, a, b).unwrap();
        let s = QuadratureSettings::default();
        let g = assemble_gram(&scene, &basis, &s).unwrap();
        let h = assemble_gram(&image, &mapped, &s).unwrap();
        // H scales by |a|^(1 − k_j − k_l) for the power parts, so compare c0 and the 1/z entry
        assert!((h.c0 - a.norm() * g.c0).abs() < 1e-12);
        assert!((h.h[(0, 0)].re - g.h[(0, 0)].re / a.norm()).abs() < 1e-9);
    }

    #[test]
    fn two_unit_disks_one_pole_each() {
        let scene = Scene::disks(&[c(2.0, 0.0), c(-2.0, 0.0)], 1.0);
        let basis = build_basis(&scene, &Schedule::rings(0)).unwrap();
        let g = assemble_gram(&scene, &basis, &QuadratureSettings::default()).unwrap();
        // hand computation: 1 on the own circle, 1/15 on the other one
        let diag = 16.0 / 15.0;
        assert!((g.h[(0, 0)] - diag).norm() < 1e-15);
        assert!((g.h[(1, 1)] - diag).norm() < 1e-15);
        assert!(g.h[(0, 1)].norm() < 1e-15);
        assert!((g.u[0] + 0.25).norm() < 1e-15);
        // 1/(z+2) ≈ 1/4 on the circle around 2
        assert!((g.u[1] - 0.25).norm() < 1e-15);
        assert!((g.c0 - 2.0).abs() < 1e-15);
    }

    #[test]
    fn unit_disk_center_pole() {
        let scene = Scene::disks(&[c(0.0, 0.0)], 1.0);
        let basis = build_basis(&scene, &Schedule::rings(0)).unwrap();
        let g = assemble_gram(&scene, &basis, &QuadratureSettings::default()).unwrap();
        assert_eq!(g.h[(0, 0)], c(1.0, 0.0));
        assert_eq!(g.u[0], c(0.0, 0.0));
        assert_eq!(g.c0, 1.0);
    }

    #[test]
    fn square_with_one_monomial() {
        let scene = Scene::new(vec![square(1.0)]);
        let basis = build_basis(&scene, &Schedule::powers(1, false)).unwrap();
        let g = assemble_gram(&scene, &basis, &QuadratureSettings::default()).unwrap();
        assert!((g.c0 - 4.0 * 2f64.sqrt() / TAU).abs() < 1e-15);
        // ∮ |z|^(−2) |dz| over the square: 4·∫ dt/(t² + (1−t)²)·√2 = 4√2·(π/2)
        let oracle = 4.0 * 2f64.sqrt() * std::f64::consts::FRAC_PI_2 / TAU;
        assert!((g.h[(0, 0)].re - oracle).abs() < 1e-9);
    }

    #[test]
    fn disk_entries_match_quadrature() {
        // the same disk entries computed by residues and by quadrature (via an ellipse with equal axes)
        let center = c(0.3, -0.4);
        let disk = Scene::new(vec![Shape::Disk {
            center,
            radius: 1.2,
        }]);
        let circle = Scene::new(vec![Shape::Ellipse {
            center,
            semi_major: 1.2,
            semi_minor: 1.2,
            rotation: 0.0,
        }]);
        let basis = build_basis(&disk, &Schedule::rings(2)).unwrap();
        let s = QuadratureSettings::default();
        let a = assemble_gram(&disk, &basis, &s).unwrap();
        let b = assemble_gram(&circle, &basis, &s).unwrap();
        assert!((&a.h - &b.h).camax() < 1e-9);
        assert!((&a.u - &b.u).camax() < 1e-9);
        assert!((a.c0 - b.c0).abs() < 1e-14);
    }
}
